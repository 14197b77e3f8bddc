//! Channel-distance programs built on the dual diamond-norm SDP
//!
//! ```text
//!   ½‖Δ‖◇ = max { Tr[𝙲(Δ) Y] : 0 ⪯ Y ⪯ 1_out ⊗ ρ, ρ a state }
//!         = min { ‖Tr_out R‖ : R ⪰ 𝙲(Δ), R ⪰ 0 }
//! ```
//!
//! with the unnormalized computational-basis Choi matrix. The minimizations
//! over constant channels, measure-prepare channels and recovery measurements
//! make `𝙲(Δ)` affine in extra parameters and minimize jointly.

use crate::channels::{ideal_measurement, Apparatus, FactorKind, Outcome, QuantumChannel};
use crate::opcore::linalg::{self, c, ComplexMatrix};
use crate::opcore::{partial_trace, DensityOperator, Hermitian, Observable};
use crate::{Error, Result};

use super::problem::{SdpProblem, SparseHermitian};
use super::solver::{solve, SdpSolution};

#[derive(Debug, Clone)]
pub struct DiamondResult {
    /// `δ(E₁, E₂) = ½‖E₁ − E₂‖◇`, the primal optimum.
    pub delta: f64,
    pub primal_value: f64,
    /// `‖Tr_out R‖` for the dual certificate, shifted if needed so that it is
    /// exactly feasible; a rigorous upper bound on `delta`.
    pub dual_value: f64,
    pub primal_y: Hermitian,
    pub primal_rho: DensityOperator,
    pub dual_r: Hermitian,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ConstantFit {
    /// Certified upper bound on `min_σ δ(E, 𝒞_σ)`, attained by `sigma`.
    pub delta: f64,
    /// Lower bound from the primal side of the joint program.
    pub lower_bound: f64,
    pub sigma: DensityOperator,
}

#[derive(Debug, Clone)]
pub struct MeasPrepFit {
    pub delta: f64,
    pub lower_bound: f64,
    /// Prepared state for each position of the X register.
    pub prep_states: Vec<DensityOperator>,
}

#[derive(Debug, Clone)]
pub struct RecoveryFit {
    pub delta: f64,
    pub lower_bound: f64,
    /// POVM element for each outcome of the target observable, in its order.
    pub povm: Vec<Hermitian>,
}

/// `δ(E₁, E₂)` with primal and dual certificates.
pub fn diamond_distance(e1: &QuantumChannel, e2: &QuantumChannel) -> Result<DiamondResult> {
    if e1.dim_in() != e2.dim_in() {
        return Err(Error::dims("channel input dimension", e1.dim_in(), e2.dim_in()));
    }
    if e1.dim_out() != e2.dim_out() {
        return Err(Error::dims("channel output dimension", e1.dim_out(), e2.dim_out()));
    }
    let j = e1.choi().matrix() - e2.choi().matrix();
    let program = DistanceProgram::new(e1.dim_in(), e1.dim_out(), j.clone());
    let out = program.solve()?;
    let (dual_r, dual_value) = certify(&j, &out.r, e1.dim_in(), e1.dim_out())?;
    Ok(DiamondResult {
        delta: out.solution.primal_value.clamp(0.0, 1.0),
        primal_value: out.solution.primal_value,
        dual_value,
        primal_y: out.y_block,
        primal_rho: DensityOperator::nearest(&out.rho),
        dual_r,
        gap: out.solution.gap,
        iterations: out.solution.iterations,
    })
}

/// Best approximation of `e` by a constant channel `ρ ↦ σ`.
pub fn min_constant_distance(e: &QuantumChannel) -> Result<ConstantFit> {
    let (din, m) = (e.dim_in(), e.dim_out());
    let choi = e.choi().matrix().clone();
    let id_in = linalg::identity(din);
    let mixed = linalg::identity(m) / c(m as f64, 0.0);

    let mut program = DistanceProgram::new(din, m, &choi - linalg::tensor(&mixed, &id_in));
    let sigma_block = program.add_extra_block(Hermitian::symmetrized(-&mixed));
    let basis = traceless_basis(m);
    for f in &basis {
        program.add_param(linalg::tensor(&f.to_dense(), &id_in).scale(-1.0), vec![(sigma_block, f.clone())]);
    }
    let out = program.solve()?;

    let raw = basis
        .iter()
        .zip(&out.params)
        .fold(mixed, |acc, (f, s)| acc + f.to_dense() * c(*s, 0.0));
    let sigma = DensityOperator::nearest(&Hermitian::symmetrized(raw));
    let j = &choi - linalg::tensor(sigma.matrix(), &id_in);
    let (_, bound) = certify(&j, &out.r, din, m)?;
    Ok(ConstantFit {
        delta: bound.clamp(0.0, 1.0),
        lower_bound: out.solution.primal_value,
        sigma,
    })
}

/// Best approximation of `A_X` (the apparatus with any Z register discarded)
/// by `𝒫∘Q_X` over conditional state preparations `𝒫`.
pub fn min_measprep_distance(a: &Apparatus, x: &Observable) -> Result<MeasPrepFit> {
    if a.dim_in() != x.dim() {
        return Err(Error::dims("apparatus input vs observable", x.dim(), a.dim_in()));
    }
    let ax = a.without(Outcome::Z)?;
    let order = ax.outcome_order(Outcome::X, x)?;
    let layout = RegisterLayout::new(&ax)?;
    let (din, dout, r) = (ax.dim_in(), ax.channel().dim_out(), layout.rest_dim);
    let q_conj: Vec<ComplexMatrix> = order
        .iter()
        .map(|&k| linalg::projector(x.eigenvector(k)).map(|z| z.conj()))
        .collect();
    let prep_choi = |k: usize, op: &ComplexMatrix| linalg::tensor(&layout.place(k, op), &q_conj[k]);

    let choi = ax.channel().choi().matrix().clone();
    let mixed = linalg::identity(r) / c(r as f64, 0.0);
    let mut j0 = choi.clone();
    for k in 0..layout.outcomes {
        j0 -= prep_choi(k, &mixed);
    }
    let mut program = DistanceProgram::new(din, dout, j0);
    let basis = traceless_basis(r);
    let blocks: Vec<usize> = (0..layout.outcomes)
        .map(|_| program.add_extra_block(Hermitian::symmetrized(-&mixed)))
        .collect();
    for (k, &blk) in blocks.iter().enumerate() {
        for f in &basis {
            program.add_param(-prep_choi(k, &f.to_dense()), vec![(blk, f.clone())]);
        }
    }
    let out = program.solve()?;

    let per = basis.len();
    let prep_states: Vec<DensityOperator> = (0..layout.outcomes)
        .map(|k| {
            let raw = basis
                .iter()
                .zip(&out.params[k * per..(k + 1) * per])
                .fold(mixed.clone(), |acc, (f, s)| acc + f.to_dense() * c(*s, 0.0));
            DensityOperator::nearest(&Hermitian::symmetrized(raw))
        })
        .collect();
    let mut j = choi;
    for (k, rho) in prep_states.iter().enumerate() {
        j -= prep_choi(k, rho.matrix());
    }
    let (_, bound) = certify(&j, &out.r, din, dout)?;
    Ok(MeasPrepFit {
        delta: bound.clamp(0.0, 1.0),
        lower_bound: out.solution.primal_value,
        prep_states,
    })
}

/// Best `δ(Q_X, Λ∘𝒩)` over measurements `Λ` on the output of `n`, with
/// outcomes in the order of `x`.
pub fn min_recovery_measurement(n: &QuantumChannel, x: &Observable) -> Result<RecoveryFit> {
    if n.dim_in() != x.dim() {
        return Err(Error::dims("channel input vs observable", x.dim(), n.dim_in()));
    }
    let (din, m, d) = (n.dim_in(), n.dim_out(), x.dim());
    let images: Vec<ComplexMatrix> = (0..din * din)
        .map(|ij| n.apply_matrix(&linalg::unit(din, din, ij / din, ij % din)))
        .collect::<Result<_>>()?;
    // Choi of ρ ↦ Σ_x Tr[Λ_x 𝒩(ρ)] |x⟩⟨x| for arbitrary (not necessarily
    // positive) operators Λ_x.
    let readout_choi = |povm: &[(usize, ComplexMatrix)]| {
        let mut out = ComplexMatrix::zeros(d * din, d * din);
        for (outcome, lam) in povm {
            for i in 0..din {
                for j in 0..din {
                    out[(outcome * din + i, outcome * din + j)] += linalg::trace(&(lam * &images[i * din + j]));
                }
            }
        }
        out
    };

    let target = ideal_measurement(x).channel().choi().matrix().clone();
    let share = linalg::identity(m) / c(d as f64, 0.0);
    let uniform: Vec<(usize, ComplexMatrix)> = (0..d).map(|k| (k, share.clone())).collect();
    let mut program = DistanceProgram::new(din, d, &target - readout_choi(&uniform));
    let blocks: Vec<usize> = (0..d)
        .map(|_| program.add_extra_block(Hermitian::symmetrized(-&share)))
        .collect();
    let basis = hermitian_basis(m);
    let last = d - 1;
    for k in 0..last {
        for g in &basis {
            let gd = g.to_dense();
            let coeff = readout_choi(&[(k, gd.clone()), (last, -gd)]);
            program.add_param(-coeff, vec![(blocks[k], g.clone()), (blocks[last], g.scaled(-1.0))]);
        }
    }
    let out = program.solve()?;

    let per = basis.len();
    let mut raw: Vec<ComplexMatrix> = vec![share.clone(); d];
    for k in 0..last {
        for (g, s) in basis.iter().zip(&out.params[k * per..(k + 1) * per]) {
            let term = g.to_dense() * c(*s, 0.0);
            raw[k] += &term;
            raw[last] -= &term;
        }
    }
    let povm = normalize_povm(raw);
    let elements: Vec<(usize, ComplexMatrix)> = povm.iter().map(|e| e.matrix().clone()).enumerate().collect();
    let j = &target - readout_choi(&elements);
    let (_, bound) = certify(&j, &out.r, din, d)?;
    Ok(RecoveryFit {
        delta: bound.clamp(0.0, 1.0),
        lower_bound: out.solution.primal_value,
        povm,
    })
}

/// Clips negative parts and restores `Σ Λ_x = 1` by congruence.
fn normalize_povm(raw: Vec<ComplexMatrix>) -> Vec<Hermitian> {
    let clipped: Vec<Hermitian> = raw
        .into_iter()
        .map(|m| Hermitian::symmetrized(m).positive_part())
        .collect();
    let m = clipped[0].dim();
    let total = clipped
        .iter()
        .fold(ComplexMatrix::zeros(m, m), |acc, e| acc + e.matrix());
    let inv_sqrt = linalg::spectral_map(&total, |v| 1.0 / v.max(1e-12).sqrt());
    clipped
        .iter()
        .map(|e| Hermitian::symmetrized(&inv_sqrt * e.matrix() * &inv_sqrt))
        .collect()
}

/// Shifts `R` by a multiple of the identity until `R ⪰ J` and `R ⪰ 0` hold
/// exactly, and returns it with `‖Tr_out R‖`.
fn certify(j: &ComplexMatrix, r: &Hermitian, din: usize, dout: usize) -> Result<(Hermitian, f64)> {
    let n = din * dout;
    let gap = Hermitian::symmetrized(r.matrix() - j).min_eigenvalue();
    let shift = (-gap).max(-r.min_eigenvalue()).max(0.0);
    let shifted = Hermitian::symmetrized(r.matrix() + linalg::identity(n) * c(shift, 0.0));
    let marginal = partial_trace(&shifted, &[dout, din], &[1])?;
    let bound = marginal.eigenvalues().into_iter().fold(0.0, f64::max);
    Ok((shifted, bound))
}

/// Basis of Hermitian `m × m` matrices: diagonal units, then `|i⟩⟨j| + h.c.`
/// and `i|i⟩⟨j| + h.c.` for `i < j`.
pub(crate) fn hermitian_basis(m: usize) -> Vec<SparseHermitian> {
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        let mut e = SparseHermitian::new(m);
        e.add(i, i, linalg::ONE);
        out.push(e);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            for v in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut e = SparseHermitian::new(m);
                e.add(i, j, v);
                out.push(e);
            }
        }
    }
    out
}

/// Basis of traceless Hermitian `m × m` matrices.
pub(crate) fn traceless_basis(m: usize) -> Vec<SparseHermitian> {
    let mut out = Vec::with_capacity(m * m - 1);
    for i in 0..m.saturating_sub(1) {
        let mut e = SparseHermitian::new(m);
        e.add(i, i, linalg::ONE);
        e.add(m - 1, m - 1, c(-1.0, 0.0));
        out.push(e);
    }
    out.extend(hermitian_basis(m).into_iter().skip(m));
    out
}

/// Output index bookkeeping for an apparatus with one X register: splits
/// each output index into the register value and the index on the remaining
/// factors.
struct RegisterLayout {
    outcomes: usize,
    rest_dim: usize,
    dim_out: usize,
    split: Vec<(usize, usize)>,
}

impl RegisterLayout {
    fn new(a: &Apparatus) -> Result<Self> {
        let reg = a
            .register(Outcome::X)
            .ok_or_else(|| Error::MissingRegister(Outcome::X.to_string()))?;
        let dims = a.factor_dims();
        let dim_out: usize = dims.iter().product();
        let split = (0..dim_out)
            .map(|mut o| {
                let mut digits = vec![0; dims.len()];
                for k in (0..dims.len()).rev() {
                    digits[k] = o % dims[k];
                    o /= dims[k];
                }
                let rest = (0..dims.len())
                    .filter(|&k| k != reg)
                    .fold(0, |acc, k| acc * dims[k] + digits[k]);
                (digits[reg], rest)
            })
            .collect();
        debug_assert!(matches!(a.factors()[reg].kind, FactorKind::Classical { .. }));
        Ok(Self {
            outcomes: dims[reg],
            rest_dim: dim_out / dims[reg],
            dim_out,
            split,
        })
    }

    /// `op ⊗ |k⟩⟨k|` with the register factor in its apparatus position.
    fn place(&self, k: usize, op: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for (o1, &(x1, r1)) in self.split.iter().enumerate() {
            if x1 != k {
                continue;
            }
            for (o2, &(x2, r2)) in self.split.iter().enumerate() {
                if x2 == k {
                    out[(o1, o2)] = op[(r1, r2)];
                }
            }
        }
        out
    }
}

/// `min_s ½‖Δ(s)‖◇` where `𝙲(Δ(s)) = J₀ + Σ_k s_k B_k`, subject to the
/// extra matrix inequalities `Σ_k s_k E_kb ⪰ C_b`.
struct DistanceProgram {
    dim_in: usize,
    dim_out: usize,
    j0: ComplexMatrix,
    extra: Vec<Hermitian>,
    params: Vec<(ComplexMatrix, Vec<(usize, SparseHermitian)>)>,
}

struct DistanceSolve {
    solution: SdpSolution,
    r: Hermitian,
    rho: Hermitian,
    y_block: Hermitian,
    params: Vec<f64>,
}

impl DistanceProgram {
    fn new(dim_in: usize, dim_out: usize, j0: ComplexMatrix) -> Self {
        Self {
            dim_in,
            dim_out,
            j0,
            extra: Vec::new(),
            params: Vec::new(),
        }
    }

    fn add_extra_block(&mut self, constant: Hermitian) -> usize {
        self.extra.push(constant);
        self.extra.len() - 1
    }

    fn add_param(&mut self, choi_coefficient: ComplexMatrix, extra: Vec<(usize, SparseHermitian)>) {
        self.params.push((choi_coefficient, extra));
    }

    fn solve(&self) -> Result<DistanceSolve> {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        let mut p = SdpProblem::new();
        let bt = p.add_block(din);
        let brj = p.add_block(n);
        let br = p.add_block(n);
        p.set_objective(brj, &Hermitian::symmetrized(self.j0.clone()))?;
        let extra_blocks: Vec<usize> = self
            .extra
            .iter()
            .map(|cst| {
                let b = p.add_block(cst.dim());
                p.set_objective(b, cst).map(|_| b)
            })
            .collect::<Result<_>>()?;

        let t = p.add_variable(1.0);
        p.add_coefficient(t, bt, SparseHermitian::identity(din))?;

        let basis = hermitian_basis(n);
        for e in &basis {
            let v = p.add_variable(0.0);
            p.add_coefficient(v, brj, e.clone())?;
            p.add_coefficient(v, br, e.clone())?;
            // −Tr_out of a matrix unit on output ⊗ input.
            let mut tr = SparseHermitian::new(din);
            for &(i, j, z) in e.entries() {
                if i / din == j / din {
                    tr.add(i % din, j % din, -z);
                }
            }
            p.add_coefficient(v, bt, tr)?;
        }
        for (coeff, extra) in &self.params {
            let v = p.add_variable(0.0);
            p.add_coefficient(v, brj, SparseHermitian::from_dense(&-coeff, 0.0))?;
            for (k, a) in extra {
                p.add_coefficient(v, extra_blocks[*k], a.clone())?;
            }
        }

        let solution = solve(&p)?.require_optimal()?;
        let mut r = ComplexMatrix::zeros(n, n);
        for (e, yk) in basis.iter().zip(&solution.y[1..]) {
            for &(i, j, z) in e.entries() {
                r[(i, j)] += z * *yk;
                if i != j {
                    r[(j, i)] += z.conj() * *yk;
                }
            }
        }
        Ok(DistanceSolve {
            r: Hermitian::symmetrized(r),
            rho: solution.primal_certificate[bt].clone(),
            y_block: solution.primal_certificate[brj].clone(),
            params: solution.y[1 + basis.len()..].to_vec(),
            solution,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{constant_channel, luders_apparatus, pinch};

    fn phase(theta: f64) -> QuantumChannel {
        let mut u = linalg::identity(2);
        u[(1, 1)] = c(theta.cos(), theta.sin());
        QuantumChannel::unitary(u).unwrap()
    }

    #[test]
    fn identical_channels_are_at_distance_zero() {
        let ch = QuantumChannel::depolarizing(2, 0.3).unwrap();
        let res = diamond_distance(&ch, &ch).unwrap();
        assert!(res.delta.abs() < 1e-7);
        assert!(res.dual_value < 1e-7);
    }

    #[test]
    fn phase_gate_matches_hull_distance() {
        for theta in [0.3, std::f64::consts::FRAC_PI_2, 2.5] {
            let res = diamond_distance(&QuantumChannel::identity(2), &phase(theta)).unwrap();
            assert!((res.delta - (theta / 2.0).sin()).abs() < 1e-6, "θ = {theta}: {}", res.delta);
            assert!(res.primal_value <= res.dual_value + 1e-9);
            assert!((res.dual_value - res.delta).abs() < 1e-7);
        }
    }

    #[test]
    fn mismatched_dims_rejected() {
        assert!(diamond_distance(&QuantumChannel::identity(2), &QuantumChannel::identity(3)).is_err());
    }

    #[test]
    fn constant_channel_fits_itself() {
        let tau = DensityOperator::from_matrix(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)],
        ))
        .unwrap();
        let fit = min_constant_distance(&constant_channel(&tau, 3)).unwrap();
        assert!(fit.delta < 1e-6);
        assert!(linalg::max_abs_diff(fit.sigma.matrix(), tau.matrix()) < 1e-4);
    }

    #[test]
    fn pinch_is_half_from_constant() {
        // The pinch sends |0⟩ and |1⟩ to orthogonal outputs, so no constant
        // channel does better than ½; σ = I/2 attains it.
        let fit = min_constant_distance(&pinch(&Observable::computational(2))).unwrap();
        assert!((fit.delta - 0.5).abs() < 1e-6);
        assert!(fit.lower_bound <= fit.delta + 1e-9);
    }

    #[test]
    fn luders_is_exactly_measure_prepare() {
        let x = Observable::fourier(2);
        let fit = min_measprep_distance(&luders_apparatus(&x), &x).unwrap();
        assert!(fit.delta < 1e-6);
        for (k, rho) in fit.prep_states.iter().enumerate() {
            let expected = linalg::projector(x.eigenvector(k));
            assert!(linalg::max_abs_diff(rho.matrix(), &expected) < 1e-3);
        }
    }

    #[test]
    fn identity_recovers_any_basis() {
        let x = Observable::fourier(2);
        let fit = min_recovery_measurement(&QuantumChannel::identity(2), &x).unwrap();
        assert!(fit.delta < 1e-6);
        for (k, e) in fit.povm.iter().enumerate() {
            assert!(linalg::max_abs_diff(e.matrix(), &linalg::projector(x.eigenvector(k))) < 1e-3);
        }
    }

    #[test]
    fn bases_are_spanning() {
        assert_eq!(hermitian_basis(3).len(), 9);
        let tl = traceless_basis(3);
        assert_eq!(tl.len(), 8);
        assert!(tl.iter().all(|f| linalg::trace(&f.to_dense()).norm() < 1e-15));
    }
}
