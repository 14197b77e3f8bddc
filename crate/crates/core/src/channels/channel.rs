use crate::opcore::linalg::{self, ComplexMatrix, ONE, ZERO};
use crate::opcore::{DensityOperator, Hermitian, Observable};
use crate::{Error, Result};

use super::choi::{choi_of, ChoiMatrix};
use super::stinespring::StinespringIsometry;

/// Tolerance on `‖Σ K†K − 1‖_max` for trace preservation.
pub const TP_TOL: f64 = 1e-9;

/// A completely positive, trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Builds a channel from Kraus operators, each `dim_out × dim_in`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let deviation = ch.trace_preservation_defect();
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(ch)
    }

    /// Shape checks only. Used for maps that are trace preserving by
    /// construction (compositions, marginals) where re-validating would
    /// only accumulate rounding complaints.
    pub(crate) fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Invalid("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Invalid("Kraus operators must be nonempty".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out {
                return Err(Error::dims("Kraus operator rows", dim_out, k.nrows()));
            }
            if k.ncols() != dim_in {
                return Err(Error::dims("Kraus operator columns", dim_in, k.ncols()));
            }
            linalg::check_finite(k)?;
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus_unchecked(vec![linalg::identity(d)]).expect("identity is valid")
    }

    /// Unitary (or isometric) channel `ρ ↦ UρU†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `ρ ↦ (1-p) ρ + p Tr[ρ] 1/d`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let mut kraus = vec![linalg::identity(d).scale((1.0 - p).sqrt())];
        let w = (p / d as f64).sqrt();
        if w > 0.0 {
            for i in 0..d {
                for j in 0..d {
                    kraus.push(linalg::unit(d, d, i, j).scale(w));
                }
            }
        }
        Self::new(kraus)
    }

    /// `ρ ↦ (1-p) ρ + p Σ_x Q(x) ρ Q(x)`: partial dephasing in an observable's eigenbasis.
    pub fn dephasing(basis: &Observable, p: f64) -> Result<Self> {
        check_probability(p)?;
        let d = basis.dim();
        let mut kraus = vec![linalg::identity(d).scale((1.0 - p).sqrt())];
        if p > 0.0 {
            kraus.extend((0..d).map(|x| basis.projector(x).scale(p.sqrt())));
        }
        Self::new(kraus)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim_in))
    }

    /// Linear extension of the channel to arbitrary `dim_in × dim_in` matrices.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::dims("channel input", self.dim_in, m.nrows()));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, k| {
                acc + k * m * k.adjoint()
            }))
    }

    /// `Σ_k K_k ρ K_k†`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply_matrix(rho.matrix())?;
        DensityOperator::new(Hermitian::symmetrized(out))
    }

    /// Heisenberg-picture action `A ↦ Σ_k K_k† A K_k`.
    pub fn adjoint_apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::dims("adjoint channel input", self.dim_out, a.nrows()));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                acc + k.adjoint() * a * k
            }))
    }

    /// Choi matrix with `|Ω⟩` in the computational basis.
    pub fn choi(&self) -> ChoiMatrix {
        choi_of(self, &Observable::computational(self.dim_in)).expect("basis has matching dimension")
    }

    pub fn stinespring(&self) -> StinespringIsometry {
        super::stinespring_of(self)
    }

    pub fn complement(&self) -> QuantumChannel {
        super::complement_of(self)
    }

    /// Convex mixture `(1-p)·self + p·other`.
    pub fn mix(&self, other: &QuantumChannel, p: f64) -> Result<QuantumChannel> {
        check_probability(p)?;
        if self.dim_in != other.dim_in {
            return Err(Error::dims("channel mixture input", self.dim_in, other.dim_in));
        }
        if self.dim_out != other.dim_out {
            return Err(Error::dims("channel mixture output", self.dim_out, other.dim_out));
        }
        let a = (1.0 - p).sqrt();
        let b = p.sqrt();
        let mut kraus: Vec<ComplexMatrix> = Vec::new();
        if a > 0.0 {
            kraus.extend(self.kraus.iter().map(|k| k.scale(a)));
        }
        if b > 0.0 {
            kraus.extend(other.kraus.iter().map(|k| k.scale(b)));
        }
        Self::from_kraus_unchecked(kraus)
    }

    /// Parallel composition `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::tensor(a, b)))
            .collect();
        Self::from_kraus_unchecked(kraus).expect("tensor of valid channels")
    }

    /// Equivalent channel with at most `dim_in · dim_out` Kraus operators,
    /// read off the Choi eigendecomposition. Returns `self` unchanged when it
    /// is already that small.
    pub fn compressed(&self) -> QuantumChannel {
        if self.kraus.len() <= self.dim_in * self.dim_out {
            return self.clone();
        }
        self.choi().to_channel()
    }

    /// Largest entrywise discrepancy between the outputs of two channels over
    /// a Hermitian basis of the input operator space. Zero exactly when the
    /// channels act identically, by linearity.
    pub fn action_difference(&self, other: &QuantumChannel) -> Result<f64> {
        if self.dim_in != other.dim_in {
            return Err(Error::dims("channel comparison input", self.dim_in, other.dim_in));
        }
        if self.dim_out != other.dim_out {
            return Err(Error::dims("channel comparison output", self.dim_out, other.dim_out));
        }
        let mut worst: f64 = 0.0;
        for e in hermitian_spanning_set(self.dim_in) {
            let a = self.apply_matrix(&e)?;
            let b = other.apply_matrix(&e)?;
            worst = worst.max(linalg::max_abs_diff(&a, &b));
        }
        Ok(worst)
    }
}

/// `f ∘ g`: apply `g` first, then `f`.
pub fn compose(f: &QuantumChannel, g: &QuantumChannel) -> Result<QuantumChannel> {
    if g.dim_out() != f.dim_in() {
        return Err(Error::dims("channel composition", f.dim_in(), g.dim_out()));
    }
    let kraus = f
        .kraus()
        .iter()
        .flat_map(|a| g.kraus().iter().map(move |b| a * b))
        .collect();
    QuantumChannel::from_kraus_unchecked(kraus)
}

/// The `d²` Hermitian basis elements `|i⟩⟨i|`, `|i⟩⟨j| + |j⟩⟨i|`, `i(|i⟩⟨j| − |j⟩⟨i|)`.
pub fn hermitian_spanning_set(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(linalg::unit(d, d, i, i));
        for j in (i + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(i, j)] = ONE;
            re[(j, i)] = ONE;
            out.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(i, j)] = linalg::c(0.0, -1.0);
            im[(j, i)] = linalg::c(0.0, 1.0);
            out.push(im);
        }
    }
    debug_assert!(out.iter().all(|m| m.iter().any(|z| *z != ZERO)));
    out
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}
