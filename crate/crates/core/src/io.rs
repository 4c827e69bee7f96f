//! File formats: graph and circulant JSON, edge lists, representer JSON,
//! cosupport JSON, matrix and signal CSV.
//!
//! Floating values are written in scientific notation with 17 significant
//! digits, enough to round-trip an `f64` exactly.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circulant::RepresenterPolynomial;
use crate::error::{Error, Result};
use crate::graph::{CirculantSpec, Graph};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CirculantJson {
    pub n: usize,
    pub generators: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresenterJson {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_graph_json(text: &str) -> Result<Graph<f64>> {
    let g: GraphJson = serde_json::from_str(text).map_err(json_err)?;
    Graph::new(g.n, g.edges)
}

pub fn graph_to_json(g: &Graph<f64>) -> String {
    let doc = GraphJson {
        n: g.n(),
        edges: g.edges().iter().map(|e| (e.i, e.j, e.weight)).collect(),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

pub fn parse_circulant_json(text: &str) -> Result<CirculantSpec<f64>> {
    let c: CirculantJson = serde_json::from_str(text).map_err(json_err)?;
    CirculantSpec::new(c.n, c.generators)
}

pub fn circulant_to_json(spec: &CirculantSpec<f64>) -> String {
    let doc = CirculantJson {
        n: spec.n(),
        generators: spec.generators().to_vec(),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

pub fn parse_representer_json(text: &str) -> Result<RepresenterPolynomial<f64>> {
    let r: RepresenterJson = serde_json::from_str(text).map_err(json_err)?;
    RepresenterPolynomial::new(r.n, r.coeffs)
}

pub fn representer_to_json(p: &RepresenterPolynomial<f64>) -> String {
    let doc = RepresenterJson {
        n: p.n(),
        coeffs: p.coeffs().to_vec(),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

/// Sorted JSON integer array.
pub fn cosupport_to_json(idx: &[usize]) -> String {
    let mut v = idx.to_vec();
    v.sort_unstable();
    serde_json::to_string(&v).expect("integers serialize")
}

pub fn parse_index_json(text: &str) -> Result<Vec<usize>> {
    serde_json::from_str(text).map_err(json_err)
}

/// Parses `i j w` lines; `#` starts a comment and blank lines are ignored.
/// The vertex count is one more than the largest index seen.
pub fn parse_edge_list(text: &str) -> Result<Graph<f64>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `i j w`, got {raw:?}",
                lineno + 1
            )));
        }
        let bad = |what: &str| Error::Parse(format!("line {}: invalid {what} in {raw:?}", lineno + 1));
        let i: usize = fields[0].parse().map_err(|_| bad("vertex"))?;
        let j: usize = fields[1].parse().map_err(|_| bad("vertex"))?;
        let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
        edges.push((i, j, w));
    }
    let n = edges
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .ok_or(Error::EmptyGraph)?;
    Graph::new(n, edges)
}

/// Reads a graph from JSON (`{"n": .., "edges": ..}`) or edge-list text,
/// picking the format from the first non-blank character.
pub fn parse_graph_auto(text: &str) -> Result<Graph<f64>> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_edge_list(text)
    }
}

fn fmt_sci<T: Real>(v: T) -> String {
    // Normalize negative zero so byte-identical outputs do not depend on
    // the sign of a cancelled sum.
    let v = if v == T::zero() { T::zero() } else { v };
    format!("{v:.16e}")
}

/// One row per line, comma separated.
pub fn matrix_to_csv<T: Real>(m: &DMatrix<T>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_sci(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(r, line)| {
            line.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {}: bad number {f:?}", r + 1)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "row {} has {} fields, expected {ncols}",
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

/// Two-column `vertex,value` CSV with a header line.
pub fn signal_to_csv<T: Real>(x: &DVector<T>) -> String {
    let mut out = String::from("vertex,value\n");
    for (i, &v) in x.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_sci(v));
    }
    out
}

pub fn signal_from_csv(text: &str) -> Result<DVector<f64>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `vertex,value`", lineno + 1)))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad vertex", lineno + 1)))?;
        if idx != values.len() {
            return Err(Error::Parse(format!(
                "line {}: vertices must be listed in order",
                lineno + 1
            )));
        }
        values.push(
            val.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad value", lineno + 1)))?,
        );
    }
    Ok(DVector::from_vec(values))
}

/// Multi-column CSV with a header; the first column is the vertex index.
pub fn columns_to_csv<T: Real>(header: &[&str], columns: &[&DVector<T>]) -> String {
    let mut out = String::from("vertex");
    for h in header {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        let _ = write!(out, "{i}");
        for c in columns {
            let _ = write!(out, ",{}", fmt_sci(c[i]));
        }
        out.push('\n');
    }
    out
}
