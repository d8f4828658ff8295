//! Sparse symmetric positive-definite systems for the FEM solves.
//!
//! Envelope (skyline) Cholesky on a reverse Cuthill-McKee ordering. For the
//! banded meshes used here the envelope stays within a few hundred entries per
//! row and the factorization has no fill outside it.

mod rcm;

pub use rcm::reverse_cuthill_mckee;

use crate::error::{Error, Result};

/// Lower envelope of a symmetric matrix, stored row by row.
#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    /// First stored column of each row.
    first: Vec<usize>,
    /// Offset of `(i, first[i])` in `data`.
    row_ptr: Vec<usize>,
    data: Vec<f64>,
    factored: bool,
}

impl SkylineMatrix {
    /// `first[i] <= i` is the leftmost nonzero column of row `i`.
    pub fn new(first: Vec<usize>) -> Self {
        let mut row_ptr = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            debug_assert!(f <= i);
            row_ptr.push(total);
            total += i - f + 1;
        }
        row_ptr.push(total);
        SkylineMatrix {
            first,
            row_ptr,
            data: vec![0.0; total],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.data.len()
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(j >= self.first[i], "entry ({i}, {j}) outside the envelope");
        self.data[self.row_ptr[i] + j - self.first[i]] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if j < self.first[i] {
            0.0
        } else {
            self.data[self.row_ptr[i] + j - self.first[i]]
        }
    }

    /// In-place `A = L L^T`.
    pub fn factor(&mut self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.row_ptr[i];
            for j in fi..i {
                let fj = self.first[j];
                let rj = self.row_ptr[j];
                let start = fi.max(fj);
                let len = j - start;
                let (head, tail) = self.data.split_at_mut(ri);
                let row_j = &head[rj + start - fj..rj + start - fj + len];
                let row_i = &tail[start - fi..start - fi + len];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let ljj = head[rj + j - fj];
                tail[j - fi] = (tail[j - fi] - dot) / ljj;
            }
            let row = &mut self.data[ri..ri + i - fi + 1];
            let (off, diag) = row.split_at_mut(i - fi);
            let d = diag[0] - off.iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::Factorization {
                    equation: i,
                    pivot: d,
                });
            }
            diag[0] = d.sqrt();
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` with the stored factor; `b` is overwritten by `x`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored, "solve before factor");
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.row_ptr[i]..self.row_ptr[i + 1]];
            let dot: f64 = row[..i - fi]
                .iter()
                .zip(&b[fi..i])
                .map(|(l, x)| l * x)
                .sum();
            b[i] = (b[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.row_ptr[i]..self.row_ptr[i + 1]];
            b[i] /= row[i - fi];
            let xi = b[i];
            for (l, x) in row[..i - fi].iter().zip(&mut b[fi..i]) {
                *x -= l * xi;
            }
        }
    }
}

/// Numbering of the unconstrained degrees of freedom with its envelope.
#[derive(Debug, Clone)]
pub struct DofNumbering {
    /// Equation number of every DOF, `None` when prescribed.
    pub equation: Vec<Option<usize>>,
    pub n_equations: usize,
    pub first: Vec<usize>,
}

impl DofNumbering {
    /// Orders free DOFs node by node along an RCM ordering of the node graph
    /// implied by `elements`, and computes the matrix envelope.
    pub fn build(
        n_nodes: usize,
        dofs_per_node: usize,
        elements: &[[usize; 9]],
        prescribed: &[bool],
    ) -> Self {
        let order = reverse_cuthill_mckee(n_nodes, elements);
        let mut equation = vec![None; n_nodes * dofs_per_node];
        let mut next = 0;
        for &node in &order {
            for c in 0..dofs_per_node {
                let dof = node * dofs_per_node + c;
                if !prescribed[dof] {
                    equation[dof] = Some(next);
                    next += 1;
                }
            }
        }
        let mut first: Vec<usize> = (0..next).collect();
        for el in elements {
            let mut eqs = [0usize; 18];
            let mut m = 0;
            for &node in el {
                for c in 0..dofs_per_node {
                    if let Some(q) = equation[node * dofs_per_node + c] {
                        eqs[m] = q;
                        m += 1;
                    }
                }
            }
            if let Some(&lo) = eqs[..m].iter().min() {
                for &q in &eqs[..m] {
                    first[q] = first[q].min(lo);
                }
            }
        }
        DofNumbering {
            equation,
            n_equations: next,
            first,
        }
    }
}
