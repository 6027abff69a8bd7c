use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use super::KernelSpec;
use crate::error::{LchsError, Result};
use crate::io::fmt_f64;

pub const WEIGHT_TABLE_HEADER: &str = "k,re_g,im_g";

/// Weights `g(k_j)` on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    spec: KernelSpec,
    nodes: Vec<f64>,
    values: Vec<Complex64>,
}

impl WeightTable {
    pub fn new(spec: KernelSpec, nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(LchsError::Shape(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(LchsError::invalid("nodes", "must be strictly increasing"));
        }
        Ok(WeightTable {
            spec,
            nodes,
            values,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `max_j |g(-k_j) - conj(g(k_j))|` if the grid is symmetric about zero.
    pub fn hermitian_residual(&self) -> Option<f64> {
        let n = self.nodes.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mirror = n - 1 - j;
            if (self.nodes[j] + self.nodes[mirror]).abs() > 1e-12 * self.nodes[j].abs().max(1.0) {
                return None;
            }
            worst = worst.max((self.values[mirror] - self.values[j].conj()).norm());
        }
        Some(worst)
    }

    /// Header `k,re_g,im_g` and one row per node.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{WEIGHT_TABLE_HEADER}")?;
        for (k, g) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", fmt_f64(*k), fmt_f64(g.re), fmt_f64(g.im))?;
        }
        Ok(())
    }

    /// Reads rows written by [`WeightTable::write_csv`]; `#` comment lines are skipped.
    pub fn read_csv<R: BufRead>(spec: KernelSpec, r: R) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut saw_header = false;
        for line in r.lines() {
            let line = line.map_err(|e| LchsError::Shape(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != WEIGHT_TABLE_HEADER {
                    return Err(LchsError::Shape(format!("unexpected header `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LchsError::Shape(format!("bad row `{line}`: {e}")))?;
            if fields.len() != 3 {
                return Err(LchsError::Shape(format!("expected 3 fields in `{line}`")));
            }
            nodes.push(fields[0]);
            values.push(Complex64::new(fields[1], fields[2]));
        }
        WeightTable::new(spec, nodes, values)
    }
}
