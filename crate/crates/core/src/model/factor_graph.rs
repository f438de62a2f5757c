use super::{FactorTable, ModelError};

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub scope: Vec<VarId>,
    pub table: FactorTable,
}

/// Bipartite factor graph over binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    var_names: Vec<String>,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new(var_names: Vec<String>, factors: Vec<Factor>) -> Result<Self, ModelError> {
        for f in &factors {
            if f.table.arity() != f.scope.len() {
                return Err(ModelError::TableSize {
                    expected: 1 << f.scope.len(),
                    found: f.table.values().len(),
                });
            }
            if let Some(&var) = f.scope.iter().find(|&&v| v >= var_names.len()) {
                return Err(ModelError::UnknownVariable {
                    factor: f.name.clone(),
                    var,
                });
            }
            let mut sorted = f.scope.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ModelError::DuplicateScope(f.name.clone()));
            }
        }
        Ok(FactorGraph { var_names, factors })
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Factors containing each variable, as `(factor index, position in scope)`.
    pub fn occurrences(&self) -> Vec<Vec<(usize, usize)>> {
        let mut occ = vec![Vec::new(); self.num_vars()];
        for (fi, f) in self.factors.iter().enumerate() {
            for (pos, &v) in f.scope.iter().enumerate() {
                occ[v].push((fi, pos));
            }
        }
        occ
    }
}
