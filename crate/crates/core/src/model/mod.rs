//! Binary factor graphs, Forney graphs, and the transformations between them.

mod convert;
mod exact;
mod factor_graph;
mod forney;
pub mod io;
mod table;

pub use convert::{factor_to_forney, reduce_degree, two_core};
pub use exact::{EXACT_VARIABLE_LIMIT, exact_log_z_factor_graph, exact_log_z_forney};
pub use factor_graph::{Factor, FactorGraph, VarId};
pub use forney::{EdgeId, ForneyGraph, ForneyNode, NodeId};
pub use table::{FactorTable, Spin, decode, encode, spin_at};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("factor table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("factor table entry {0} is negative or not finite")]
    InvalidEntry(f64),
    #[error("factor table is identically zero")]
    AllZeroTable,
    #[error("factor `{factor}` references undeclared variable {var}")]
    UnknownVariable { factor: String, var: usize },
    #[error("factor `{0}` lists a variable twice")]
    DuplicateScope(String),
    #[error("variable `{0}` does not appear in any factor")]
    UnusedVariable(String),
    #[error("edge {0} joins a node to itself")]
    SelfLoop(usize),
    #[error("nodes {0} and {1} share more than one edge")]
    ParallelEdge(usize, usize),
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("node {node} has degree {degree} but a table of arity {arity}")]
    DegreeMismatch {
        node: usize,
        degree: usize,
        arity: usize,
    },
    #[error("node {node} has degree {degree} and is not an equality node; cannot split")]
    UnsupportedDegree { node: usize, degree: usize },
    #[error("partition function is zero")]
    ZeroPartition,
    #[error("{count} variables exceed the exhaustive-enumeration limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
