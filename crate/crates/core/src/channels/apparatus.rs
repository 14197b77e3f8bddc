use std::fmt;

use crate::opcore::linalg::{self, ComplexMatrix};
use crate::opcore::Observable;
use crate::{Error, Result};

use super::channel::{hermitian_spanning_set, QuantumChannel};

/// Largest off-diagonal modulus tolerated in a classical register marginal.
pub const CLASSICAL_TOL: f64 = 1e-9;

/// Which observable a classical register reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    X,
    Z,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::X => f.write_str("X"),
            Outcome::Z => f.write_str("Z"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorKind {
    Quantum,
    /// Diagonal register holding measurement outcomes, one label per basis state.
    Classical { role: Outcome, labels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFactor {
    pub dim: usize,
    pub kind: FactorKind,
}

impl OutputFactor {
    pub fn quantum(dim: usize) -> Self {
        Self {
            dim,
            kind: FactorKind::Quantum,
        }
    }

    pub fn classical(role: Outcome, labels: Vec<String>) -> Self {
        Self {
            dim: labels.len(),
            kind: FactorKind::Classical { role, labels },
        }
    }

    pub fn role(&self) -> Option<Outcome> {
        match &self.kind {
            FactorKind::Classical { role, .. } => Some(*role),
            FactorKind::Quantum => None,
        }
    }
}

/// A measuring device: a channel whose output splits into quantum and
/// classical registers.
///
/// The classical registers are the unprimed copies `X̂`, `Ẑ` of the doubled
/// outcome records; the primed copies are already traced out, which is why
/// their marginals must come out diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Apparatus {
    channel: QuantumChannel,
    factors: Vec<OutputFactor>,
}

impl Apparatus {
    pub fn new(channel: QuantumChannel, factors: Vec<OutputFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("apparatus needs at least one output factor".into()));
        }
        if factors.iter().any(|f| f.dim == 0) {
            return Err(Error::Invalid("output factor of dimension zero".into()));
        }
        let product: usize = factors.iter().map(|f| f.dim).product();
        if product != channel.dim_out() {
            return Err(Error::dims("apparatus output factors", channel.dim_out(), product));
        }
        for role in [Outcome::X, Outcome::Z] {
            if factors.iter().filter(|f| f.role() == Some(role)).count() > 1 {
                return Err(Error::Invalid(format!("more than one classical {role} register")));
            }
        }
        let app = Self { channel, factors };
        app.check_classical()?;
        Ok(app)
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn factors(&self) -> &[OutputFactor] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn dim_in(&self) -> usize {
        self.channel.dim_in()
    }

    pub fn register(&self, role: Outcome) -> Option<usize> {
        self.factors.iter().position(|f| f.role() == Some(role))
    }

    pub fn labels(&self, role: Outcome) -> Option<&[String]> {
        self.factors.iter().find_map(|f| match &f.kind {
            FactorKind::Classical { role: r, labels } if *r == role => Some(labels.as_slice()),
            _ => None,
        })
    }

    /// Channel onto the listed factors, all others traced out.
    pub fn marginal(&self, keep: &[usize]) -> Result<QuantumChannel> {
        marginal_channel(&self.channel, &self.factor_dims(), keep)
    }

    /// Outcome channel of one classical register (`M_X` or `M_Z`).
    pub fn outcome_channel(&self, role: Outcome) -> Result<QuantumChannel> {
        let idx = self
            .register(role)
            .ok_or_else(|| Error::MissingRegister(role.to_string()))?;
        self.marginal(&[idx])
    }

    /// The apparatus with the listed factors traced out.
    pub fn discard(&self, drop: &[usize]) -> Result<Apparatus> {
        let keep: Vec<usize> = (0..self.factors.len()).filter(|k| !drop.contains(k)).collect();
        if keep.is_empty() {
            return Err(Error::Invalid("cannot discard every output factor".into()));
        }
        let channel = self.marginal(&keep)?.compressed();
        let factors = keep.iter().map(|&k| self.factors[k].clone()).collect();
        Ok(Apparatus { channel, factors })
    }

    /// For each position of the `role` register, the index of the matching
    /// eigenvector of `obs`. Labels are matched by name when the register and
    /// the observable carry the same label set, and by position otherwise.
    pub fn outcome_order(&self, role: Outcome, obs: &Observable) -> Result<Vec<usize>> {
        let labels = self
            .labels(role)
            .ok_or_else(|| Error::MissingRegister(role.to_string()))?;
        if labels.len() != obs.dim() {
            return Err(Error::CountMismatch {
                context: format!("{role} register labels vs observable outcomes"),
                expected: obs.dim(),
                found: labels.len(),
            });
        }
        let by_name = labels
            .iter()
            .map(|l| obs.labels().iter().position(|m| m == l))
            .collect::<Option<Vec<usize>>>()
            .filter(|order| (0..order.len()).all(|k| order.contains(&k)));
        Ok(by_name.unwrap_or_else(|| (0..labels.len()).collect()))
    }

    /// The apparatus with the classical register for `role` traced out, if
    /// it has one.
    pub fn without(&self, role: Outcome) -> Result<Apparatus> {
        match self.register(role) {
            Some(idx) => self.discard(&[idx]),
            None => Ok(self.clone()),
        }
    }

    fn check_classical(&self) -> Result<()> {
        let inputs = hermitian_spanning_set(self.channel.dim_in());
        for (idx, f) in self.factors.iter().enumerate() {
            if f.role().is_none() {
                continue;
            }
            let marginal = self.marginal(&[idx])?;
            let mut mass: f64 = 0.0;
            for e in &inputs {
                let out = marginal.apply_matrix(e)?;
                for i in 0..out.nrows() {
                    for j in 0..out.ncols() {
                        if i != j {
                            mass = mass.max(out[(i, j)].norm());
                        }
                    }
                }
            }
            if mass > CLASSICAL_TOL {
                return Err(Error::NotClassical { register: idx, mass });
            }
        }
        Ok(())
    }
}

/// Kraus operators of `Tr_{traced}∘E` for a channel whose output factors have
/// dimensions `dims`.
pub(crate) fn marginal_channel(ch: &QuantumChannel, dims: &[usize], keep: &[usize]) -> Result<QuantumChannel> {
    let total: usize = dims.iter().product();
    if total != ch.dim_out() {
        return Err(Error::dims("marginal factor dims", ch.dim_out(), total));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Invalid(format!("factor index {bad} out of range")));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| keep.contains(k)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Output index → (kept index, traced index).
    let coords: Vec<(usize, usize)> = (0..total)
        .map(|mut o| {
            let mut digits = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                digits[k] = o % dims[k];
                o /= dims[k];
            }
            let ki = kept.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            let ti = traced.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            (ki, ti)
        })
        .collect();

    let din = ch.dim_in();
    let mut kraus = Vec::with_capacity(ch.kraus().len() * traced_dim);
    for k in ch.kraus() {
        for t in 0..traced_dim {
            let mut m = ComplexMatrix::zeros(kept_dim, din);
            for (o, &(ki, ti)) in coords.iter().enumerate() {
                if ti == t {
                    for i in 0..din {
                        m[(ki, i)] = k[(o, i)];
                    }
                }
            }
            if m.iter().any(|z| *z != linalg::ZERO) {
                kraus.push(m);
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(kept_dim, din));
    }
    QuantumChannel::from_kraus_unchecked(kraus)
}
