//! Binary linear codes given by a sparse parity-check matrix.

mod alist;
mod gallager;

pub use alist::{load_alist, load_alist_with, write_alist, LoadOptions};
pub use gallager::generate_gallager;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Sparse parity-check matrix `H` with both adjacency views of its Tanner graph.
///
/// Immutable once built. Under the full-rank convention the dimension is
/// `k = n - m_rows`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckCode {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    // Flat edge layout, edges ordered by check row.
    row_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    col_ptr: Vec<usize>,
    col_edges: Vec<usize>,
}

impl ParityCheckCode {
    /// Builds a code from per-row column indices (0-based).
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        if n == 0 || m == 0 || m >= n {
            return Err(Error::Construction(format!(
                "need 0 < m_rows < n, got n = {n}, m_rows = {m}"
            )));
        }
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                if c >= n {
                    return Err(Error::Construction(format!(
                        "row {r} references column {c} >= n = {n}"
                    )));
                }
                cols[c].push(r);
            }
        }
        for (r, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("duplicate entry in row {r}")));
            }
        }

        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        row_ptr.push(0);
        for row in &rows {
            edge_var.extend_from_slice(row);
            row_ptr.push(edge_var.len());
        }
        let mut col_ptr = vec![0; n + 1];
        for &v in &edge_var {
            col_ptr[v + 1] += 1;
        }
        for i in 0..n {
            col_ptr[i + 1] += col_ptr[i];
        }
        let mut fill = col_ptr.clone();
        let mut col_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            col_edges[fill[v]] = e;
            fill[v] += 1;
        }

        Ok(Self {
            n,
            rows,
            cols,
            row_ptr,
            edge_var,
            col_ptr,
            col_edges,
        })
    }

    /// Builds a code from a dense 0/1 row description such as `["110", "011"]`.
    pub fn from_dense(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let mut sparse = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: r.len(),
                });
            }
            let bits = BitString::parse(r)?;
            sparse.push((0..n).filter(|&i| bits.get(i)).collect());
        }
        Self::from_rows(n, sparse)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.n - self.rows.len()
    }

    pub fn base_rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge ids of check `j` are `row_ptr[j]..row_ptr[j + 1]`.
    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub(crate) fn edge_var(&self) -> &[usize] {
        &self.edge_var
    }

    /// `col_edges[col_ptr[v]..col_ptr[v + 1]]` lists the edge ids touching variable `v`.
    pub(crate) fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub(crate) fn col_edges(&self) -> &[usize] {
        &self.col_edges
    }

    pub fn max_col_degree(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_row_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `m(x) = H xᵀ` over GF(2).
    pub fn syndrome(&self, x: &BitString) -> Result<BitString> {
        x.check_len(self.n)?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(false, |acc, &c| acc ^ x.get(c)))
            .collect())
    }

    /// Rank of `H` over GF(2) by dense elimination on packed rows.
    pub fn rank(&self) -> usize {
        let words = self.n.div_ceil(64);
        let mut mat: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] ^= 1 << (c % 64);
                }
                w
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n {
            let (wi, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][wi] & bit != 0) else {
                continue;
            };
            mat.swap(rank, pivot);
            let (head, tail) = mat.split_at_mut(rank + 1);
            let prow = &head[rank];
            for row in tail.iter_mut() {
                if row[wi] & bit != 0 {
                    for (a, b) in row[wi..].iter_mut().zip(&prow[wi..]) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == mat.len() {
                break;
            }
        }
        rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.m_rows()
    }
}
