use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::opcore::linalg::{self, ComplexMatrix};
use crate::opcore::serial;
use crate::opcore::Hermitian;
use crate::{Error, Result};

/// Sparse Hermitian matrix stored as its upper triangle; `(j, i)` is the
/// conjugate of `(i, j)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Adds `v` at `(i, j)` and `v̄` at `(j, i)`. Diagonal entries keep only
    /// their real part.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i < self.dim && j < self.dim, "entry ({i}, {j}) outside {0}×{0}", self.dim);
        let (i, j, v) = if i <= j { (i, j, v) } else { (j, i, v.conj()) };
        let v = if i == j { linalg::c(v.re, 0.0) } else { v };
        if v == linalg::ZERO {
            return;
        }
        match self.entries.iter_mut().find(|(a, b, _)| *a == i && *b == j) {
            Some(e) => e.2 += v,
            None => self.entries.push((i, j, v)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = Self::new(dim);
        for i in 0..dim {
            s.add(i, i, linalg::ONE);
        }
        s
    }

    /// Upper-triangle entries with modulus above `tol`.
    pub fn from_dense(m: &ComplexMatrix, tol: f64) -> Self {
        let mut s = Self::new(m.nrows());
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let v = m[(i, j)];
                if v.norm() > tol {
                    s.add(i, j, v);
                }
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v.conj();
            }
        }
        m
    }

    /// `Tr[self · X]` for Hermitian `X`.
    pub fn inner(&self, x: &ComplexMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v.re * x[(i, i)].re } else { 2.0 * (v * x[(j, i)]).re })
            .sum()
    }
}

impl Serialize for SparseHermitian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            row: usize,
            col: usize,
            value: serial::ScalarJson,
        }
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            upper_entries: Vec<Entry>,
        }
        Repr {
            dim: self.dim,
            upper_entries: self
                .entries
                .iter()
                .map(|&(row, col, v)| Entry {
                    row,
                    col,
                    value: [v.re, v.im],
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// One scalar equality `Σ_b Tr[A_b X_b] = rhs`.
///
/// Read from the dual side, each constraint is a free variable `y_i` with
/// cost `rhs`, and `A_b` is its coefficient in the matrix inequality of
/// block `b`.
#[derive(Debug, Clone, Serialize)]
pub struct Constraint {
    pub terms: Vec<(usize, SparseHermitian)>,
    pub rhs: f64,
}

/// A semidefinite program over block-diagonal Hermitian variables:
///
/// ```text
///   primal:  maximize  Σ_b Tr[C_b X_b]
///            s.t.      Σ_b Tr[A_ib X_b] = b_i,   X_b ⪰ 0
///
///   dual:    minimize  Σ_i b_i y_i
///            s.t.      S_b = Σ_i y_i A_ib − C_b ⪰ 0
/// ```
///
/// Weak duality reads `Σ b_i y_i − Σ Tr[C X] = Σ Tr[S X] ≥ 0`. Problems that
/// are naturally "minimize over matrix inequalities" are entered from the
/// dual side: add a variable per free real parameter and a block per
/// inequality.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    #[serde(with = "serial::matrix_list")]
    objective: Vec<ComplexMatrix>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a PSD block of the given dimension with zero objective.
    pub fn add_block(&mut self, dim: usize) -> usize {
        assert!(dim > 0, "block dimension must be positive");
        self.block_dims.push(dim);
        self.objective.push(ComplexMatrix::zeros(dim, dim));
        self.block_dims.len() - 1
    }

    /// Sets `C_b`. For a dual-side reading this is the constant term moved to
    /// the right-hand side of `Σ y_i A_i ⪰ C_b`.
    pub fn set_objective(&mut self, block: usize, c: &Hermitian) -> Result<()> {
        if c.dim() != self.block_dims[block] {
            return Err(Error::dims("objective block", self.block_dims[block], c.dim()));
        }
        self.objective[block] = c.matrix().clone();
        Ok(())
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, SparseHermitian)>, rhs: f64) -> Result<usize> {
        for (b, a) in &terms {
            let dim = *self
                .block_dims
                .get(*b)
                .ok_or_else(|| Error::Invalid(format!("constraint references missing block {b}")))?;
            if a.dim() != dim {
                return Err(Error::dims("constraint block", dim, a.dim()));
            }
        }
        self.constraints.push(Constraint { terms, rhs });
        Ok(self.constraints.len() - 1)
    }

    /// Dual-side alias: a free variable with the given cost.
    pub fn add_variable(&mut self, cost: f64) -> usize {
        self.add_constraint(Vec::new(), cost).expect("empty constraint is valid")
    }

    /// Dual-side alias: adds `A` to the coefficient of variable `var` in block `block`.
    pub fn add_coefficient(&mut self, var: usize, block: usize, a: SparseHermitian) -> Result<()> {
        let dim = self.block_dims[block];
        if a.dim() != dim {
            return Err(Error::dims("coefficient block", dim, a.dim()));
        }
        if a.is_empty() {
            return Ok(());
        }
        let terms = &mut self.constraints[var].terms;
        match terms.iter_mut().find(|(b, _)| *b == block) {
            Some((_, existing)) => {
                for &(i, j, v) in a.entries() {
                    existing.add(i, j, v);
                }
            }
            None => terms.push((block, a)),
        }
        Ok(())
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn objective(&self) -> &[ComplexMatrix] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Primal objective at block-diagonal `x`.
    pub fn primal_objective(&self, x: &[Hermitian]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, xb)| Hermitian::symmetrized(c.clone()).inner(xb))
            .sum()
    }

    /// Dual objective `Σ b_i y_i`.
    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        self.constraints.iter().zip(y).map(|(c, yi)| c.rhs * yi).sum()
    }

    /// `S_b = Σ_i y_i A_ib − C_b` for every block.
    pub fn dual_slack(&self, y: &[f64]) -> Vec<Hermitian> {
        let mut s: Vec<ComplexMatrix> = self.objective.iter().map(|c| -c).collect();
        for (con, &yi) in self.constraints.iter().zip(y) {
            for (b, a) in &con.terms {
                for &(i, j, v) in a.entries() {
                    s[*b][(i, j)] += v * yi;
                    if i != j {
                        s[*b][(j, i)] += v.conj() * yi;
                    }
                }
            }
        }
        s.into_iter().map(Hermitian::symmetrized).collect()
    }

    /// Constraint values `Σ_b Tr[A_ib X_b]`.
    pub fn constraint_values(&self, x: &[Hermitian]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.terms.iter().map(|(b, a)| a.inner(x[*b].matrix())).sum())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }
}
