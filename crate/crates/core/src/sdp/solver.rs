use std::cell::Cell;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Serialize, Serializer};

use super::problem::{SdpProblem, SparseHermitian};
use crate::opcore::linalg::{c, ComplexMatrix};
use crate::opcore::{serial, Hermitian};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Relative primal and dual residual target.
    pub feas_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iterations: 200,
        }
    }
}

thread_local! {
    static CURRENT: Cell<SolverOptions> = Cell::new(SolverOptions::default());
}

impl SolverOptions {
    /// Options used by [`solve`] on this thread.
    pub fn current() -> Self {
        CURRENT.with(Cell::get)
    }

    /// Runs `f` with `self` as the options used by [`solve`] on this thread.
    pub fn scoped<T>(self, f: impl FnOnce() -> T) -> T {
        struct Restore(SolverOptions);
        impl Drop for Restore {
            fn drop(&mut self) {
                CURRENT.with(|c| c.set(self.0));
            }
        }
        let _restore = Restore(CURRENT.with(|c| c.replace(self)));
        f()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    /// Primal blocks `X_b`.
    #[serde(serialize_with = "hermitian_list")]
    pub primal_certificate: Vec<Hermitian>,
    /// Dual slack blocks `S_b = Σ y_i A_ib − C_b`.
    #[serde(serialize_with = "hermitian_list")]
    pub dual_certificate: Vec<Hermitian>,
    pub y: Vec<f64>,
    /// `max(⟨X,S⟩, |pobj − dobj|) / (1 + |pobj| + |dobj|)`.
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }

    /// Converts a non-optimal solve into [`Error::Solver`].
    pub fn require_optimal(self) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status,
                iterations: self.iterations,
                gap: self.gap,
            })
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}

fn hermitian_list<S: Serializer>(list: &[Hermitian], s: S) -> std::result::Result<S::Ok, S::Error> {
    let ms: Vec<ComplexMatrix> = list.iter().map(|h| h.matrix().clone()).collect();
    serial::matrix_list::serialize(&ms, s)
}

/// Solves with [`SolverOptions::current`].
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, &SolverOptions::current())
}

/// Infeasible primal–dual path following with Nesterov–Todd scaling and a
/// Mehrotra predictor–corrector, run on the real symmetric embedding of the
/// problem.
pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let real = RealProblem::embed(problem)?;
    let out = real.run(opts);
    let primal_certificate: Vec<Hermitian> = out.x.iter().map(deembed).collect();
    let dual_certificate = problem.dual_slack(out.y.as_slice());
    Ok(SdpSolution {
        primal_value: problem.primal_objective(&primal_certificate),
        dual_value: problem.dual_objective(out.y.as_slice()),
        primal_certificate,
        dual_certificate,
        y: out.y.iter().copied().collect(),
        gap: out.measures.gap,
        primal_infeasibility: out.measures.pinf,
        dual_infeasibility: out.measures.dinf,
        iterations: out.iterations,
        status: out.status,
    })
}

/// Upper-triangle entries `(p, q, v)`, `p ≤ q`, of a real symmetric matrix.
type Entries = Vec<(usize, usize, f64)>;

struct RealProblem {
    dims: Vec<usize>,
    c: Vec<DMatrix<f64>>,
    a: Vec<Vec<(usize, Entries)>>,
    b: DVector<f64>,
    /// For each block, the constraints that touch it and the term index.
    by_block: Vec<Vec<(usize, usize)>>,
}

/// `½ [[Re A, −Im A], [Im A, Re A]]` as upper-triangle entries.
fn embed_sparse(a: &SparseHermitian) -> Entries {
    let n = a.dim();
    let mut out = Vec::with_capacity(4 * a.entries().len());
    for &(i, j, v) in a.entries() {
        if i == j {
            out.push((i, i, 0.5 * v.re));
            out.push((n + i, n + i, 0.5 * v.re));
            continue;
        }
        if v.re != 0.0 {
            out.push((i, j, 0.5 * v.re));
            out.push((n + i, n + j, 0.5 * v.re));
        }
        if v.im != 0.0 {
            out.push((i, n + j, -0.5 * v.im));
            out.push((j, n + i, 0.5 * v.im));
        }
    }
    out
}

fn embed_dense(m: &ComplexMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |p, q| {
        let z = m[(p % n, q % n)];
        0.5 * match (p < n, q < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Hermitian matrix whose embedding is closest to `x`.
fn deembed(x: &DMatrix<f64>) -> Hermitian {
    let n = x.nrows() / 2;
    Hermitian::symmetrized(ComplexMatrix::from_fn(n, n, |i, j| {
        c(
            0.5 * (x[(i, j)] + x[(n + i, n + j)]),
            0.5 * (x[(n + i, j)] - x[(i, n + j)]),
        )
    }))
}

fn sparse_inner(a: &Entries, x: &DMatrix<f64>) -> f64 {
    a.iter()
        .map(|&(p, q, v)| if p == q { v * x[(p, p)] } else { 2.0 * v * x[(p, q)] })
        .sum()
}

fn sparse_add(m: &mut DMatrix<f64>, a: &Entries, s: f64) {
    for &(p, q, v) in a {
        m[(p, q)] += s * v;
        if p != q {
            m[(q, p)] += s * v;
        }
    }
}

fn sparse_norm(a: &Entries) -> f64 {
    a.iter()
        .map(|&(p, q, v)| if p == q { v * v } else { 2.0 * v * v })
        .sum::<f64>()
        .sqrt()
}

fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

#[derive(Debug, Clone, Copy)]
struct Measures {
    gap: f64,
    pinf: f64,
    dinf: f64,
}

impl Measures {
    fn worst(&self) -> f64 {
        self.gap.max(self.pinf).max(self.dinf)
    }
}

struct Outcome {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    measures: Measures,
    iterations: usize,
    status: SolverStatus,
}

/// Per-block Nesterov–Todd scaling `W = G Gᵀ` with `G⁻¹ X G⁻ᵀ = Gᵀ S G = D`.
struct Scaling {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
    lx_inv: DMatrix<f64>,
    ls_inv: DMatrix<f64>,
}

impl Scaling {
    fn new(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Self> {
        let n = x.nrows();
        let lx = Cholesky::new(x.clone())?.unpack();
        let ls = Cholesky::new(s.clone())?.unpack();
        let eye = DMatrix::<f64>::identity(n, n);
        let lx_inv = lx.solve_lower_triangular(&eye)?;
        let ls_inv = ls.solve_lower_triangular(&eye)?;
        let svd = (ls.transpose() * &lx).svd(false, true);
        let v_t = svd.v_t?;
        let d = svd.singular_values;
        if d.iter().any(|&di| !di.is_finite() || di <= 0.0) {
            return None;
        }
        let d_isqrt = DMatrix::from_diagonal(&d.map(|di| 1.0 / di.sqrt()));
        let d_sqrt = DMatrix::from_diagonal(&d.map(f64::sqrt));
        let g = &lx * v_t.transpose() * d_isqrt;
        let ginv = d_sqrt * &v_t * &lx_inv;
        let w = sym(&g * g.transpose());
        Some(Self {
            g,
            ginv,
            w,
            d,
            lx_inv,
            ls_inv,
        })
    }
}

/// Largest step `α` with `M + αΔ ⪰ 0`, given `L⁻¹` for `M = LLᵀ`.
fn max_step(l_inv: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let scaled = sym(l_inv * delta * l_inv.transpose());
    let lmin = scaled.symmetric_eigenvalues().min();
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

impl RealProblem {
    fn embed(problem: &SdpProblem) -> Result<Self> {
        if problem.block_dims().is_empty() {
            return Err(Error::Invalid("SDP has no blocks".into()));
        }
        if problem.num_constraints() == 0 {
            return Err(Error::Invalid("SDP has no constraints".into()));
        }
        let dims: Vec<usize> = problem.block_dims().iter().map(|n| 2 * n).collect();
        let c = problem.objective().iter().map(embed_dense).collect();
        let mut a = Vec::with_capacity(problem.num_constraints());
        let mut by_block = vec![Vec::new(); dims.len()];
        for (i, con) in problem.constraints().iter().enumerate() {
            let terms: Vec<(usize, Entries)> = con
                .terms
                .iter()
                .map(|(blk, m)| (*blk, embed_sparse(m)))
                .filter(|(_, e)| !e.is_empty())
                .collect();
            if terms.is_empty() {
                return Err(Error::Invalid(format!("constraint {i} has no coefficients")));
            }
            for (t, (blk, _)) in terms.iter().enumerate() {
                by_block[*blk].push((i, t));
            }
            a.push(terms);
        }
        let b = DVector::from_iterator(problem.num_constraints(), problem.constraints().iter().map(|c| c.rhs));
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite constraint right-hand side".into()));
        }
        Ok(Self {
            dims,
            c,
            a,
            b,
            by_block,
        })
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn a_op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.a.iter().map(|terms| terms.iter().map(|(b, e)| sparse_inner(e, &x[*b])).sum()),
        )
    }

    fn at_op(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (terms, &yi) in self.a.iter().zip(y.iter()) {
            for (b, e) in terms {
                sparse_add(&mut out[*b], e, yi);
            }
        }
        out
    }

    /// `M_ij = Σ_b ⟨A_ib, W_b A_jb W_b⟩`.
    fn schur(&self, scal: &[Scaling]) -> DMatrix<f64> {
        let m = self.m();
        let mut big = DMatrix::<f64>::zeros(m, m);
        for (blk, users) in self.by_block.iter().enumerate() {
            let w = &scal[blk].w;
            let n = self.dims[blk];
            let mut buf = DMatrix::<f64>::zeros(n, n);
            for (pos, &(j, tj)) in users.iter().enumerate() {
                buf.fill(0.0);
                for &(p, q, v) in &self.a[j][tj].1 {
                    let wp = w.column(p);
                    let wq = w.column(q);
                    buf.ger(v, &wp, &wq, 1.0);
                    if p != q {
                        buf.ger(v, &wq, &wp, 1.0);
                    }
                }
                for &(i, ti) in &users[pos..] {
                    let val = sparse_inner(&self.a[i][ti].1, &buf);
                    big[(i, j)] += val;
                }
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let v = big[(i, j)] + big[(j, i)];
                big[(i, j)] = v;
                big[(j, i)] = v;
            }
        }
        big
    }

    fn residuals(
        &self,
        x: &[DMatrix<f64>],
        y: &DVector<f64>,
        s: &[DMatrix<f64>],
    ) -> (DVector<f64>, Vec<DMatrix<f64>>, Measures) {
        let rp = &self.b - self.a_op(x);
        let aty = self.at_op(y);
        let rd: Vec<DMatrix<f64>> = (0..self.dims.len()).map(|k| &aty[k] - &self.c[k] - &s[k]).collect();
        let pobj: f64 = self.c.iter().zip(x).map(|(c, x)| frob_inner(c, x)).sum();
        let dobj = self.b.dot(y);
        let xs: f64 = x.iter().zip(s).map(|(x, s)| frob_inner(x, s)).sum();
        let c_norm = self.c.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt();
        let rd_norm = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt();
        let measures = Measures {
            gap: xs.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs()),
            pinf: rp.norm() / (1.0 + self.b.norm()),
            dinf: rd_norm / (1.0 + c_norm),
        };
        (rp, rd, measures)
    }

    fn starting_point(&self) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
        let mut x = Vec::with_capacity(self.dims.len());
        let mut s = Vec::with_capacity(self.dims.len());
        for (blk, users) in self.by_block.iter().enumerate() {
            let n = self.dims[blk];
            let rn = (n as f64).sqrt();
            let mut xi: f64 = 10.0f64.max(rn);
            let mut eta: f64 = 10.0f64.max(rn).max(self.c[blk].norm());
            for &(i, t) in users {
                let norm = sparse_norm(&self.a[i][t].1);
                xi = xi.max(rn * (1.0 + self.b[i].abs()) / (1.0 + norm));
                eta = eta.max(norm);
            }
            x.push(DMatrix::identity(n, n) * xi);
            s.push(DMatrix::identity(n, n) * eta);
        }
        (x, s)
    }

    /// Solves the linearized system for a scaled complementarity target
    /// `rhs` (one symmetric matrix per block, in the `D` frame).
    #[allow(clippy::type_complexity)]
    fn direction(
        &self,
        scal: &[Scaling],
        chol: &Cholesky<f64, Dyn>,
        rhs: &[DMatrix<f64>],
        rp: &DVector<f64>,
        rd: &[DMatrix<f64>],
    ) -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
        let rc: Vec<DMatrix<f64>> = scal
            .iter()
            .zip(rhs)
            .map(|(sc, r)| {
                let n = r.nrows();
                let z = DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (sc.d[i] + sc.d[j]));
                &sc.g * z * sc.g.transpose()
            })
            .collect();
        let t: Vec<DMatrix<f64>> = (0..scal.len())
            .map(|k| &rc[k] - &scal[k].w * &rd[k] * &scal[k].w)
            .collect();
        let h = self.a_op(&t) - rp;
        let dy = chol.solve(&h);
        let aty = self.at_op(&dy);
        let ds: Vec<DMatrix<f64>> = (0..scal.len()).map(|k| &aty[k] + &rd[k]).collect();
        let dx: Vec<DMatrix<f64>> = (0..scal.len())
            .map(|k| sym(&rc[k] - &scal[k].w * &ds[k] * &scal[k].w))
            .collect();
        (dx, dy, ds)
    }

    fn step_lengths(&self, scal: &[Scaling], dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for k in 0..scal.len() {
            ap = ap.min(max_step(&scal[k].lx_inv, &dx[k]));
            ad = ad.min(max_step(&scal[k].ls_inv, &ds[k]));
        }
        (ap, ad)
    }

    fn run(&self, opts: &SolverOptions) -> Outcome {
        let n_total: usize = self.dims.iter().sum();
        let (mut x, mut s) = self.starting_point();
        let mut y = DVector::<f64>::zeros(self.m());
        let mut best: Option<(Vec<DMatrix<f64>>, DVector<f64>, Measures)> = None;

        let finish = |best: Option<(Vec<DMatrix<f64>>, DVector<f64>, Measures)>, iterations, status| {
            let (x, y, measures) = best.expect("at least one iterate evaluated");
            let status = if measures.gap <= opts.gap_tol && measures.pinf <= opts.feas_tol && measures.dinf <= opts.feas_tol {
                SolverStatus::Optimal
            } else {
                status
            };
            Outcome {
                x,
                y,
                measures,
                iterations,
                status,
            }
        };

        for iter in 0..=opts.max_iterations {
            let (rp, rd, measures) = self.residuals(&x, &y, &s);
            if best.as_ref().is_none_or(|b| measures.worst() <= b.2.worst()) {
                best = Some((x.clone(), y.clone(), measures));
            }
            if measures.gap <= opts.gap_tol && measures.pinf <= opts.feas_tol && measures.dinf <= opts.feas_tol {
                return finish(best, iter, SolverStatus::Optimal);
            }
            if iter == opts.max_iterations {
                return finish(best, iter, SolverStatus::MaxIterations);
            }

            let Some(scal) = x.iter().zip(&s).map(|(x, s)| Scaling::new(x, s)).collect::<Option<Vec<_>>>() else {
                return finish(best, iter, SolverStatus::NumericalFailure);
            };
            let schur = self.schur(&scal);
            let chol = match Cholesky::new(schur.clone()) {
                Some(ch) => ch,
                None => {
                    let ridge = 1e-13 * schur.diagonal().max().max(1.0);
                    let shifted = schur + DMatrix::identity(self.m(), self.m()) * ridge;
                    match Cholesky::new(shifted) {
                        Some(ch) => ch,
                        None => return finish(best, iter, SolverStatus::NumericalFailure),
                    }
                }
            };

            let mu: f64 = x.iter().zip(&s).map(|(x, s)| frob_inner(x, s)).sum::<f64>() / n_total as f64;

            // Predictor.
            let rhs_aff: Vec<DMatrix<f64>> = scal
                .iter()
                .map(|sc| DMatrix::from_diagonal(&sc.d.map(|d| -d * d)))
                .collect();
            let (dx_a, _, ds_a) = self.direction(&scal, &chol, &rhs_aff, &rp, &rd);
            let (ap_a, ad_a) = self.step_lengths(&scal, &dx_a, &ds_a);
            let (ap_a, ad_a) = (ap_a.min(1.0), ad_a.min(1.0));
            let mu_aff: f64 = (0..x.len())
                .map(|k| frob_inner(&(&x[k] + &dx_a[k] * ap_a), &(&s[k] + &ds_a[k] * ad_a)))
                .sum::<f64>()
                / n_total as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // Corrector.
            let rhs: Vec<DMatrix<f64>> = scal
                .iter()
                .enumerate()
                .map(|(k, sc)| {
                    let dxs = &sc.ginv * &dx_a[k] * sc.ginv.transpose();
                    let dss = sc.g.transpose() * &ds_a[k] * &sc.g;
                    let n = sc.d.len();
                    let mut r = -sym(dxs * dss);
                    for i in 0..n {
                        r[(i, i)] += sigma * mu - sc.d[i] * sc.d[i];
                    }
                    r
                })
                .collect();
            let (dx, dy, ds) = self.direction(&scal, &chol, &rhs, &rp, &rd);
            let (ap, ad) = self.step_lengths(&scal, &dx, &ds);
            let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
            let ap = (gamma * ap).min(1.0);
            let ad = (gamma * ad).min(1.0);
            if !(ap > 1e-12 && ad > 1e-12) || dy.iter().any(|v| !v.is_finite()) {
                return finish(best, iter, SolverStatus::NumericalFailure);
            }
            for k in 0..x.len() {
                x[k] = sym(&x[k] + &dx[k] * ap);
                s[k] = sym(&s[k] + &ds[k] * ad);
            }
            y += dy * ad;
        }
        unreachable!("loop returns on the last iteration")
    }
}
