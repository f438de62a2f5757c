//! Line-oriented text format for models.
//!
//! ```text
//! # Forney graph: node ids are 0..n, variable order follows edge lines
//! forney 3
//! edge 0 1
//! edge 1 2
//! factor 0 1.0 2.0
//! factor 1 1.0 0.5 0.5 1.0
//! factor 2 3.0 1.0
//! ```
//!
//! ```text
//! # factor graph: `factor <id> <var...> <2^k values>`
//! factorgraph
//! var x
//! var y
//! factor A x y 1.0 0.5 0.5 1.0
//! factor hx x 0.8 1.2
//! ```
//!
//! Values follow the fixed table index convention (see [`FactorTable`]).

use super::{Factor, FactorGraph, FactorTable, ForneyGraph, ModelError};
use std::collections::HashMap;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Forney(ForneyGraph),
    FactorGraph(FactorGraph),
}

fn perr(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ModelError> {
    tok.parse::<f64>()
        .map_err(|_| perr(line, format!("`{tok}` is not a number")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, ModelError> {
    tok.parse::<usize>()
        .map_err(|_| perr(line, format!("`{tok}` is not a non-negative integer")))
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });
    let Some((line, header)) = lines.next() else {
        return Err(perr(0, "empty model file"));
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    match toks[0] {
        "forney" => {
            if toks.len() != 2 {
                return Err(perr(line, "expected `forney <num_nodes>`"));
            }
            let n = parse_usize(toks[1], line)?;
            parse_forney(n, lines)
        }
        "factorgraph" => {
            let declared = match toks.len() {
                1 => None,
                2 => Some(parse_usize(toks[1], line)?),
                _ => return Err(perr(line, "expected `factorgraph [num_vars]`")),
            };
            parse_factor_graph(declared, line, lines)
        }
        other => Err(perr(line, format!("unknown header `{other}`"))),
    }
}

fn parse_forney<'a>(
    n: usize,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<ModelFile, ModelError> {
    let mut edges = Vec::new();
    let mut tables: Vec<Option<Vec<f64>>> = vec![None; n];
    for (line, content) in lines {
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "edge" => {
                if toks.len() != 3 {
                    return Err(perr(line, "expected `edge <a> <b>`"));
                }
                edges.push([parse_usize(toks[1], line)?, parse_usize(toks[2], line)?]);
            }
            "factor" => {
                if toks.len() < 3 {
                    return Err(perr(line, "expected `factor <node> <values...>`"));
                }
                let id = parse_usize(toks[1], line)?;
                if id >= n {
                    return Err(perr(line, format!("node {id} out of range")));
                }
                if tables[id].is_some() {
                    return Err(perr(line, format!("duplicate factor for node {id}")));
                }
                let vals = toks[2..]
                    .iter()
                    .map(|t| parse_f64(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                tables[id] = Some(vals);
            }
            other => return Err(perr(line, format!("unknown directive `{other}`"))),
        }
    }
    let mut degree = vec![0usize; n];
    for &[a, b] in &edges {
        for x in [a, b] {
            if x >= n {
                return Err(ModelError::NodeOutOfRange(x));
            }
            degree[x] += 1;
        }
    }
    let named = tables
        .into_iter()
        .enumerate()
        .map(|(id, vals)| {
            let vals = vals.ok_or_else(|| perr(0, format!("node {id} has no factor line")))?;
            Ok((id.to_string(), FactorTable::new(degree[id], vals)?))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(ModelFile::Forney(ForneyGraph::from_edge_list(named, edges)?))
}

fn parse_factor_graph<'a>(
    declared: Option<usize>,
    header_line: usize,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<ModelFile, ModelError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut factors = Vec::new();
    for (line, content) in lines {
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "var" => {
                if toks.len() != 2 {
                    return Err(perr(line, "expected `var <id>`"));
                }
                if index.insert(toks[1].to_string(), names.len()).is_some() {
                    return Err(perr(line, format!("duplicate variable `{}`", toks[1])));
                }
                names.push(toks[1].to_string());
            }
            "factor" => {
                if toks.len() < 3 {
                    return Err(perr(line, "expected `factor <id> <vars...> <values...>`"));
                }
                let rest = &toks[2..];
                // k scope entries followed by 2^k values
                let k = (0..=EXTRA_ARITY_LIMIT)
                    .find(|&k| k + (1usize << k) == rest.len())
                    .ok_or_else(|| perr(line, "token count does not match any arity"))?;
                let scope = rest[..k]
                    .iter()
                    .map(|t| {
                        index
                            .get(*t)
                            .copied()
                            .ok_or_else(|| perr(line, format!("undeclared variable `{t}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let vals = rest[k..]
                    .iter()
                    .map(|t| parse_f64(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                factors.push(Factor {
                    name: toks[1].to_string(),
                    scope,
                    table: FactorTable::new(k, vals)?,
                });
            }
            other => return Err(perr(line, format!("unknown directive `{other}`"))),
        }
    }
    if let Some(n) = declared {
        if n != names.len() {
            return Err(perr(
                header_line,
                format!("header declares {n} variables, found {}", names.len()),
            ));
        }
    }
    Ok(ModelFile::FactorGraph(FactorGraph::new(names, factors)?))
}

const EXTRA_ARITY_LIMIT: usize = 24;

/// Writes a Forney graph; `log_scale` is folded into a table first.
pub fn write_forney(g: &ForneyGraph) -> String {
    let g = g.with_scale_folded();
    let mut out = format!("forney {}\n", g.num_nodes());
    for &[a, b] in g.edges() {
        writeln!(out, "edge {a} {b}").unwrap();
    }
    // edge lines fix each node's variable order, so re-sort tables to it
    let mut order_seen: Vec<Vec<usize>> = vec![Vec::new(); g.num_nodes()];
    for (e, &[a, b]) in g.edges().iter().enumerate() {
        order_seen[a].push(e);
        order_seen[b].push(e);
    }
    for (id, node) in g.nodes().iter().enumerate() {
        let order: Vec<usize> = order_seen[id]
            .iter()
            .map(|e| node.edges.iter().position(|x| x == e).expect("incident"))
            .collect();
        let table = node.table.permuted(&order);
        write!(out, "factor {id}").unwrap();
        for v in table.values() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_factor_graph(fg: &FactorGraph) -> String {
    let mut out = format!("factorgraph {}\n", fg.num_vars());
    for name in fg.var_names() {
        writeln!(out, "var {name}").unwrap();
    }
    for f in fg.factors() {
        write!(out, "factor {}", f.name).unwrap();
        for &v in &f.scope {
            write!(out, " {}", fg.var_names()[v]).unwrap();
        }
        for v in f.table.values() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_log_z_factor_graph, exact_log_z_forney};

    #[test]
    fn parses_forney_example() {
        let text = "# demo\nforney 2\nedge 0 1\nfactor 0 1 2\nfactor 1 3 4 # trailing\n";
        let ModelFile::Forney(g) = parse_model(text).unwrap() else {
            panic!("expected forney");
        };
        assert_eq!(g.num_edges(), 1);
        assert!((exact_log_z_forney(&g).unwrap() - 11f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn parses_factor_graph_and_round_trips() {
        let text = "factorgraph 2\nvar x\nvar y\nfactor A x y 1 0.5 0.5 1\nfactor hx x 0.8 1.2\n";
        let ModelFile::FactorGraph(fg) = parse_model(text).unwrap() else {
            panic!("expected factor graph");
        };
        assert_eq!(fg.factors().len(), 2);
        let again = parse_model(&write_factor_graph(&fg)).unwrap();
        assert_eq!(again, ModelFile::FactorGraph(fg.clone()));
        assert!(exact_log_z_factor_graph(&fg).unwrap().is_finite());
    }

    #[test]
    fn rejects_unknown_directives_and_bad_counts() {
        assert!(matches!(
            parse_model("forney 1\nnode 0\n"),
            Err(ModelError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_model("factorgraph\nvar x\nfactor A x 1 2 3\n"),
            Err(ModelError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_model("factorgraph 3\nvar x\n"),
            Err(ModelError::Parse { line: 1, .. })
        ));
        assert!(parse_model("").is_err());
    }

    #[test]
    fn forney_writer_preserves_partition_function() {
        // node 1's variable order differs from edge-line order
        let t3 = FactorTable::new(3, vec![1.0, 2.0, 0.5, 0.1, 3.0, 0.7, 1.1, 0.4]).unwrap();
        let g = ForneyGraph::from_edge_list(
            vec![
                ("a".into(), FactorTable::new(1, vec![0.3, 1.0]).unwrap()),
                ("b".into(), t3),
                ("c".into(), FactorTable::new(1, vec![1.0, 0.2]).unwrap()),
                ("d".into(), FactorTable::new(1, vec![2.0, 0.6]).unwrap()),
            ],
            vec![[0, 1], [1, 2], [3, 1]],
        )
        .unwrap();
        let order = vec![vec![0], vec![2, 0, 1], vec![0], vec![0]];
        let g = g.with_node_orders(&order);
        let ModelFile::Forney(back) = parse_model(&write_forney(&g)).unwrap() else {
            panic!()
        };
        let z0 = exact_log_z_forney(&g).unwrap();
        let z1 = exact_log_z_forney(&back).unwrap();
        assert!((z0 - z1).abs() < 1e-14);
    }
}
