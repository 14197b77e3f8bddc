//! Constructors for the channels and devices that the uncertainty relations
//! talk about.

use crate::opcore::linalg::{self, ComplexMatrix};
use crate::opcore::{DensityOperator, Observable};
use crate::{Error, Result};

use super::apparatus::{Apparatus, OutputFactor, Outcome};
use super::channel::{QuantumChannel, TP_TOL};
use super::stinespring::StinespringIsometry;

/// Ideal measurement `Q_X : ρ ↦ Σ_x ⟨φ_x|ρ|φ_x⟩ |x⟩⟨x|` into one classical register.
pub fn ideal_measurement(x: &Observable) -> Apparatus {
    ideal_measurement_as(x, Outcome::X)
}

/// Ideal measurement of `obs`, with its register tagged `role`.
pub fn ideal_measurement_as(obs: &Observable, role: Outcome) -> Apparatus {
    let d = obs.dim();
    let kraus = (0..d)
        .map(|x| linalg::ket(d, x) * obs.eigenvector(x).adjoint())
        .collect();
    let channel = QuantumChannel::from_kraus_unchecked(kraus).expect("measurement Kraus shapes agree");
    Apparatus::new(channel, vec![OutputFactor::classical(role, obs.labels().to_vec())])
        .expect("ideal measurement is a valid apparatus")
}

/// Dilation `W_X = Σ_x Q_X(x) ⊗ |x⟩_{X̂} ⊗ |x⟩_{X̂'}` of the ideal measurement,
/// reordered so that the output is `X̂` and the environment is `S ⊗ X̂'`.
pub fn measurement_dilation(x: &Observable) -> StinespringIsometry {
    let d = x.dim();
    // Rows indexed by (x̂, s, x̂'), i.e. output X̂ first.
    let mut v = ComplexMatrix::zeros(d * d * d, d);
    for k in 0..d {
        let q = x.projector(k);
        for s in 0..d {
            for i in 0..d {
                v[((k * d + s) * d + k, i)] = q[(s, i)];
            }
        }
    }
    StinespringIsometry::new(v, d, d * d).expect("W_X is an isometry")
}

/// Pinch map (non-selective ideal measurement) `ρ ↦ Σ_z Q_Z(z) ρ Q_Z(z)`.
pub fn pinch(z: &Observable) -> QuantumChannel {
    let kraus = (0..z.dim()).map(|k| z.projector(k)).collect();
    QuantumChannel::from_kraus_unchecked(kraus).expect("projectors share a shape")
}

/// Lüders instrument `ρ ↦ Σ_x Q_X(x) ρ Q_X(x) ⊗ |x⟩⟨x|` with output (system, X̂).
pub fn luders_apparatus(x: &Observable) -> Apparatus {
    let d = x.dim();
    let kraus = (0..d)
        .map(|k| linalg::tensor(&x.projector(k), &linalg::ket(d, k)))
        .collect();
    let channel = QuantumChannel::from_kraus_unchecked(kraus).expect("Lüders Kraus shapes agree");
    Apparatus::new(
        channel,
        vec![
            OutputFactor::quantum(d),
            OutputFactor::classical(Outcome::X, x.labels().to_vec()),
        ],
    )
    .expect("Lüders instrument is a valid apparatus")
}

/// Constant channel `ρ ↦ Tr[ρ] σ` on a `dim_in`-dimensional input.
pub fn constant_channel(sigma: &DensityOperator, dim_in: usize) -> QuantumChannel {
    let (values, vectors) = linalg::hermitian_eigen(sigma.matrix());
    let m = sigma.dim();
    let mut kraus = Vec::new();
    for (k, &p) in values.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let s = ComplexMatrix::from_column_slice(m, 1, vectors.column(k).as_slice());
        for j in 0..dim_in {
            let bra = linalg::ket(dim_in, j).adjoint();
            kraus.push((&s * bra).scale(p.sqrt()));
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(m, dim_in));
    }
    QuantumChannel::from_kraus_unchecked(kraus).expect("constant channel Kraus shapes agree")
}

/// Conditional preparation `|x⟩⟨x| ↦ ρ^x ⊗ |x⟩⟨x|`; off-diagonal inputs are
/// annihilated. Output ordering is (prepared system, classical copy).
pub fn conditional_preparation(states: &[DensityOperator]) -> Result<QuantumChannel> {
    let k = states.len();
    let first = states
        .first()
        .ok_or_else(|| Error::Invalid("conditional preparation needs at least one state".into()))?;
    let r = first.dim();
    let mut kraus = Vec::new();
    for (x, rho) in states.iter().enumerate() {
        if rho.dim() != r {
            return Err(Error::dims("conditional preparation state", r, rho.dim()));
        }
        let (values, vectors) = linalg::hermitian_eigen(rho.matrix());
        let record = linalg::ket(k, x);
        let bra = record.adjoint();
        for (i, &p) in values.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let psi = ComplexMatrix::from_column_slice(r, 1, vectors.column(i).as_slice());
            kraus.push((linalg::tensor(&psi, &record) * &bra).scale(p.sqrt()));
        }
    }
    QuantumChannel::new(kraus)
}

/// Joint measuring device `V = Σ_{xz} M_{xz} ⊗ |x⟩|x⟩ ⊗ |z⟩|z⟩` with the primed
/// copies traced out. `kraus_xz[x][z]` maps the system into the device's
/// quantum output `R`. Output factors are `(R, X̂, Ẑ)`.
pub fn joint_apparatus(
    kraus_xz: &[Vec<ComplexMatrix>],
    x_labels: Vec<String>,
    z_labels: Vec<String>,
) -> Result<Apparatus> {
    if kraus_xz.len() != x_labels.len() {
        return Err(Error::CountMismatch {
            context: "kraus_xz rows vs x_labels".into(),
            expected: x_labels.len(),
            found: kraus_xz.len(),
        });
    }
    let dx = x_labels.len();
    let dz = z_labels.len();
    let mut kraus = Vec::with_capacity(dx * dz);
    for (x, row) in kraus_xz.iter().enumerate() {
        if row.len() != dz {
            return Err(Error::CountMismatch {
                context: format!("kraus_xz row {x} vs z_labels"),
                expected: dz,
                found: row.len(),
            });
        }
        for (z, m) in row.iter().enumerate() {
            let record = linalg::tensor(&linalg::ket(dx, x), &linalg::ket(dz, z));
            kraus.push(linalg::tensor(m, &record));
        }
    }
    let channel = QuantumChannel::from_kraus_unchecked(kraus)?;
    let deviation = channel.trace_preservation_defect();
    if deviation > TP_TOL {
        return Err(Error::NotTracePreserving { deviation });
    }
    let r = kraus_xz[0][0].nrows();
    Apparatus::new(
        channel,
        vec![
            OutputFactor::quantum(r),
            OutputFactor::classical(Outcome::X, x_labels),
            OutputFactor::classical(Outcome::Z, z_labels),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::compose;
    use crate::opcore::linalg::{c, max_abs_diff};
    use crate::opcore::Hermitian;

    fn plus() -> DensityOperator {
        DensityOperator::pure(&Observable::fourier(2).eigenvector(0).clone()).unwrap()
    }

    #[test]
    fn measurement_of_eigenstate_is_deterministic() {
        let x = Observable::fourier(3);
        let q = ideal_measurement(&x);
        for k in 0..3 {
            let out = q.channel().apply(&DensityOperator::pure(x.eigenvector(k)).unwrap()).unwrap();
            assert!(max_abs_diff(out.matrix(), DensityOperator::basis_state(3, k).matrix()) < 1e-14);
        }
    }

    #[test]
    fn measurement_statistics_of_mub_input() {
        let q = ideal_measurement(&Observable::fourier(2));
        let out = q.channel().apply(&DensityOperator::basis_state(2, 0)).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
        let out = q.channel().apply(&DensityOperator::maximally_mixed(2)).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
    }

    #[test]
    fn pinch_examples() {
        let z = Observable::computational(2);
        let p = pinch(&z);
        let out = p.apply(&plus()).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
        let e1 = DensityOperator::basis_state(2, 1);
        assert!(max_abs_diff(p.apply(&e1).unwrap().matrix(), e1.matrix()) < 1e-15);
        let twice = compose(&p, &p).unwrap();
        assert!(twice.action_difference(&p).unwrap() < 1e-15);
    }

    #[test]
    fn measure_after_pinch_on_mub_is_constant() {
        // Q_X ∘ Q_Z^♮ for qubit MUBs sends every state to the uniform distribution.
        let x = Observable::fourier(2);
        let z = Observable::computational(2);
        let ch = compose(ideal_measurement(&x).channel(), &pinch(&z)).unwrap();
        let expected = constant_channel(&DensityOperator::maximally_mixed(2), 2);
        assert!(ch.action_difference(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn luders_examples() {
        let x = Observable::fourier(2);
        let l = luders_apparatus(&x);
        for k in 0..2 {
            let phi = DensityOperator::pure(x.eigenvector(k)).unwrap();
            let out = l.channel().apply(&phi).unwrap();
            let expected = phi.tensor(&DensityOperator::basis_state(2, k));
            assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-14);
        }
        let xm = l.outcome_channel(Outcome::X).unwrap();
        assert!(xm.action_difference(ideal_measurement(&x).channel()).unwrap() < 1e-15);

        let comp = luders_apparatus(&Observable::computational(2));
        let out = comp.channel().apply(&plus()).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn constant_channel_examples() {
        let sigma = DensityOperator::new(Hermitian::from_real_diagonal(&[0.2, 0.8])).unwrap();
        let ch = constant_channel(&sigma, 3);
        assert!(ch.trace_preservation_defect() < 1e-14);
        let out = ch.apply(&DensityOperator::basis_state(3, 1)).unwrap();
        assert!(max_abs_diff(out.matrix(), sigma.matrix()) < 1e-14);
        let marginal = ch.choi().input_marginal();
        assert!(max_abs_diff(marginal.matrix(), &linalg::identity(3)) < 1e-14);
    }

    #[test]
    fn conditional_preparation_examples() {
        let rho = DensityOperator::new(Hermitian::from_real_diagonal(&[0.9, 0.1])).unwrap();
        let prep = conditional_preparation(&[rho.clone(), rho.clone(), rho.clone()]).unwrap();
        let dist = DensityOperator::new(Hermitian::from_real_diagonal(&[0.5, 0.3, 0.2])).unwrap();
        let out = prep.apply(&dist).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.tensor(&dist).matrix()) < 1e-14);

        // Off-diagonal classical inputs are annihilated.
        let coherent = prep.apply_matrix(&linalg::unit(3, 3, 0, 1)).unwrap();
        assert!(coherent.iter().all(|z| z.norm() < 1e-15));

        let mismatched = [DensityOperator::maximally_mixed(2), DensityOperator::maximally_mixed(3)];
        assert!(conditional_preparation(&mismatched).is_err());
    }

    #[test]
    fn measure_prepare_after_measurement() {
        let x = Observable::fourier(2);
        let states = [
            DensityOperator::new(Hermitian::from_real_diagonal(&[0.6, 0.4])).unwrap(),
            DensityOperator::basis_state(2, 1),
        ];
        let mp = compose(&conditional_preparation(&states).unwrap(), ideal_measurement(&x).channel()).unwrap();
        for (k, state) in states.iter().enumerate() {
            let out = mp.apply(&DensityOperator::pure(x.eigenvector(k)).unwrap()).unwrap();
            let expected = state.tensor(&DensityOperator::basis_state(2, k));
            assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-14);
        }
    }

    #[test]
    fn luders_is_measure_then_prepare_eigenstates() {
        let x = Observable::fourier(3);
        let eig: Vec<_> = (0..3).map(|k| DensityOperator::pure(x.eigenvector(k)).unwrap()).collect();
        let mp = compose(&conditional_preparation(&eig).unwrap(), ideal_measurement(&x).channel()).unwrap();
        assert!(mp.action_difference(luders_apparatus(&x).channel()).unwrap() < 1e-14);
    }

    #[test]
    fn ideal_dilation_complement() {
        let x = Observable::fourier(2);
        let w = measurement_dilation(&x);
        assert!(w.channel().action_difference(ideal_measurement(&x).channel()).unwrap() < 1e-14);
        // Complement: ρ ↦ Σ_x ⟨φ_x|ρ|φ_x⟩ |φ_x⟩⟨φ_x| ⊗ |x⟩⟨x| on (S, X̂').
        let comp = w.complement();
        let expected = luders_apparatus(&x).channel().clone();
        assert!(comp.action_difference(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn joint_measure_x_guess_z() {
        let x = Observable::fourier(2);
        let w = (0.5f64).sqrt();
        let kraus: Vec<Vec<ComplexMatrix>> = (0..2).map(|k| vec![x.projector(k).scale(w); 2]).collect();
        let app = joint_apparatus(&kraus, x.labels().to_vec(), vec!["0".into(), "1".into()]).unwrap();
        let mx = app.outcome_channel(Outcome::X).unwrap();
        assert!(mx.action_difference(ideal_measurement(&x).channel()).unwrap() < 1e-14);
        let mz = app.outcome_channel(Outcome::Z).unwrap();
        let uniform = constant_channel(&DensityOperator::maximally_mixed(2), 2);
        assert!(mz.action_difference(&uniform).unwrap() < 1e-14);
        assert!(mx.trace_preservation_defect() < 1e-14);
        assert!(mz.trace_preservation_defect() < 1e-14);
    }

    #[test]
    fn joint_commuting_case() {
        let x = Observable::computational(2);
        let kraus: Vec<Vec<ComplexMatrix>> = (0..2)
            .map(|a| {
                (0..2)
                    .map(|b| if a == b { x.projector(a) } else { ComplexMatrix::zeros(2, 2) })
                    .collect()
            })
            .collect();
        let app = joint_apparatus(&kraus, x.labels().to_vec(), x.labels().to_vec()).unwrap();
        let q = ideal_measurement(&x);
        assert!(app.outcome_channel(Outcome::X).unwrap().action_difference(q.channel()).unwrap() < 1e-14);
        assert!(app.outcome_channel(Outcome::Z).unwrap().action_difference(q.channel()).unwrap() < 1e-14);
    }

    #[test]
    fn joint_rejects_incomplete() {
        let kraus = vec![vec![linalg::identity(2).scale(0.5)]];
        let err = joint_apparatus(&kraus, vec!["a".into()], vec!["b".into()]).unwrap_err();
        assert!(matches!(err, Error::NotTracePreserving { .. }));
        assert!(joint_apparatus(&kraus, vec!["a".into(), "b".into()], vec!["c".into()]).is_err());
    }
}
