use std::collections::BTreeMap;

use crate::channels::{compose, complement_of, pinch, stinespring_of, Apparatus, Outcome, QuantumChannel};
use crate::opcore::Observable;
use crate::sdp::{diamond_distance, min_constant_distance, min_measprep_distance, min_recovery_measurement};
use crate::{Error, Result};

use super::alignment::align_isometries;
use super::constants::complementarity;
use super::quantities::{disturbance_certified, error_certified};
use super::report::{diamond_ref, fit_ref, Relation, Sense, VerificationReport};

fn components<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Joint-measurement relation `√ε_X + √ε_Z ≥ c₁(X,Z)`.
pub fn verify_jm(a: &Apparatus, x: &Observable, z: &Observable) -> Result<VerificationReport> {
    let pair = complementarity(x, z)?;
    let ex = error_certified(a, Outcome::X, x)?;
    let ez = error_certified(a, Outcome::Z, z)?;
    let lhs = ex.delta.sqrt() + ez.delta.sqrt();
    Ok(VerificationReport::new(
        Relation::Jm,
        Sense::Ge,
        lhs,
        pair.c1,
        components([
            ("eps_x", ex.delta),
            ("eps_z", ez.delta),
            ("c1", pair.c1),
            ("r_xz", pair.r_xz),
            ("r_zx", pair.r_zx),
        ]),
        vec![diamond_ref("eps_x", &ex), diamond_ref("eps_z", &ez)],
    ))
}

/// Error-disturbance relation `√2·√ε_X + η_Z ≥ c₂(X;Z)`. Any Z register of
/// `a` is traced out first, so a joint device is judged by its X part.
pub fn verify_ed(a: &Apparatus, x: &Observable, z: &Observable) -> Result<VerificationReport> {
    let pair = complementarity(x, z)?;
    let ax = a.without(Outcome::Z)?;
    let ex = error_certified(&ax, Outcome::X, x)?;
    let (eta, fit) = disturbance_certified(&ax, z)?;
    let lhs = std::f64::consts::SQRT_2 * ex.delta.sqrt() + eta;
    Ok(VerificationReport::new(
        Relation::Ed,
        Sense::Ge,
        lhs,
        pair.c2_xz,
        components([
            ("eps_x", ex.delta),
            ("eta_z", eta),
            ("c2", pair.c2_xz),
            ("c2_zx", pair.c2_zx),
            ("delta_const", fit.delta),
        ]),
        vec![diamond_ref("eps_x", &ex), fit_ref("delta_const", fit.delta, fit.lower_bound)],
    ))
}

/// `√(2ε_X) ≥ min_𝒫 δ(A_X, 𝒫∘Q_X)`.
pub fn verify_measprep(a: &Apparatus, x: &Observable) -> Result<VerificationReport> {
    let ex = error_certified(a, Outcome::X, x)?;
    let fit = min_measprep_distance(a, x)?;
    Ok(VerificationReport::new(
        Relation::Measprep,
        Sense::Ge,
        (2.0 * ex.delta).sqrt(),
        fit.delta,
        components([("eps_x", ex.delta), ("delta_measprep", fit.delta)]),
        vec![diamond_ref("eps_x", &ex), fit_ref("delta_measprep", fit.delta, fit.lower_bound)],
    ))
}

/// `min_𝒞 δ(𝒩^♯∘Q_Z^♮, 𝒞) ≤ 2√ε + 1 − c₂(X;Z)`, with `ε` the best error of
/// reading `X` off the output of `n` and `𝒩^♯` the complement of the
/// canonical dilation.
pub fn verify_leakage(n: &QuantumChannel, x: &Observable, z: &Observable) -> Result<VerificationReport> {
    if n.dim_in() != x.dim() {
        return Err(Error::dims("channel input vs observable", x.dim(), n.dim_in()));
    }
    let pair = complementarity(x, z)?;
    let recovery = min_recovery_measurement(n, x)?;
    let leak = min_constant_distance(&compose(&complement_of(n), &pinch(z))?)?;
    let eps = recovery.delta;
    let rhs = 2.0 * eps.sqrt() + 1.0 - pair.c2_xz;
    Ok(VerificationReport::new(
        Relation::Leakage,
        Sense::Le,
        leak.delta,
        rhs,
        components([("eps", eps), ("c2", pair.c2_xz), ("delta_const", leak.delta)]),
        vec![
            fit_ref("eps", recovery.delta, recovery.lower_bound),
            fit_ref("delta_const", leak.delta, leak.lower_bound),
        ],
    ))
}

/// `‖E₁ − E₂‖◇ ≤ 2‖(1 ⊗ U)V₁ − V₂‖` for the aligned canonical dilations.
pub fn verify_sandwich(e1: &QuantumChannel, e2: &QuantumChannel) -> Result<VerificationReport> {
    let dist = diamond_distance(e1, e2)?;
    let al = align_isometries(&stinespring_of(e1), &stinespring_of(e2))?;
    let norm = 2.0 * dist.delta;
    Ok(VerificationReport::new(
        Relation::StinespringSandwich,
        Sense::Le,
        norm,
        2.0 * al.achieved,
        components([("diamond_norm", norm), ("achieved", al.achieved)]),
        vec![diamond_ref("diamond_norm", &dist), format!("alignment: {:?}", al.method).to_lowercase()],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{joint_apparatus, luders_apparatus, OutputFactor};
    use crate::opcore::linalg::{self, c};
    use crate::random::{random_channel, random_joint_apparatus, seeded};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn qubit_pair() -> (Observable, Observable) {
        (Observable::computational(2), Observable::fourier(2))
    }

    fn reproduces(r: &VerificationReport, lhs: f64, rhs: f64) {
        assert!((r.lhs - lhs).abs() < 1e-9 && (r.rhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn jm_on_ideal_x_and_guessed_z() {
        let (x, z) = qubit_pair();
        let k = |i: usize| x.projector(i) * c(FRAC_1_SQRT_2, 0.0);
        let a = joint_apparatus(&[vec![k(0), k(0)], vec![k(1), k(1)]], x.labels().to_vec(), z.labels().to_vec())
            .unwrap();
        let r = verify_jm(&a, &x, &z).unwrap();
        assert!(r.pass);
        assert!(r.component("eps_x").unwrap() < 1e-7);
        assert!((r.rhs - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        reproduces(&r, r.component("eps_x").unwrap().sqrt() + r.component("eps_z").unwrap().sqrt(), r.component("c1").unwrap());
    }

    #[test]
    fn jm_commuting_case() {
        let x = Observable::computational(2);
        let k = |i: usize, j: usize| if i == j { x.projector(i) } else { linalg::identity(2) * c(0.0, 0.0) };
        let a = joint_apparatus(&[vec![k(0, 0), k(0, 1)], vec![k(1, 0), k(1, 1)]], x.labels().to_vec(), x.labels().to_vec())
            .unwrap();
        let r = verify_jm(&a, &x, &x).unwrap();
        assert!(r.pass && r.lhs < 1e-3 && r.rhs == 0.0);
    }

    #[test]
    fn ed_near_equality_for_luders() {
        let (x, z) = qubit_pair();
        let r = verify_ed(&luders_apparatus(&x), &x, &z).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 1.0).abs() < 1e-6 && (r.rhs - 1.0).abs() < 1e-12);
        assert!(r.slack.abs() < 1e-6);
        let sqrt2 = std::f64::consts::SQRT_2;
        reproduces(&r, sqrt2 * r.component("eps_x").unwrap().sqrt() + r.component("eta_z").unwrap(), r.component("c2").unwrap());
    }

    #[test]
    fn ed_same_observable() {
        let x = Observable::fourier(3);
        let r = verify_ed(&luders_apparatus(&x), &x, &x).unwrap();
        assert!(r.pass && (r.rhs - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ed_ignores_z_register() {
        let (x, z) = qubit_pair();
        let mut rng = seeded(21);
        let a = random_joint_apparatus(2, 2, &mut rng);
        let full = verify_ed(&a, &x, &z).unwrap();
        let stripped = verify_ed(&a.without(Outcome::Z).unwrap(), &x, &z).unwrap();
        assert!((full.lhs - stripped.lhs).abs() < 1e-7);
    }

    #[test]
    fn measprep_for_luders_is_tight() {
        let x = Observable::fourier(2);
        let r = verify_measprep(&luders_apparatus(&x), &x).unwrap();
        assert!(r.pass && r.rhs < 1e-6);
    }

    #[test]
    fn leakage_identity_and_dephasing() {
        let (x, z) = qubit_pair();
        let r = verify_leakage(&QuantumChannel::identity(2), &x, &z).unwrap();
        // The recovery error is zero up to solver noise, which 2√ε amplifies.
        assert!(r.pass && r.lhs < 1e-6 && r.rhs.abs() < 1e-4, "{r:?}");
        for p in [0.1, 0.5, 0.9] {
            let r = verify_leakage(&QuantumChannel::dephasing(&x, p).unwrap(), &x, &z).unwrap();
            assert!(r.pass, "p = {p}: slack {}", r.slack);
            reproduces(&r, r.component("delta_const").unwrap(), 2.0 * r.component("eps").unwrap().sqrt() + 1.0 - r.component("c2").unwrap());
        }
    }

    #[test]
    fn sandwich_on_unitaries_and_random_pairs() {
        let v = linalg::identity(2);
        let mut w = linalg::identity(2);
        w[(1, 1)] = c((PI / 2.0).cos(), (PI / 2.0).sin());
        let r = verify_sandwich(&QuantumChannel::unitary(v).unwrap(), &QuantumChannel::unitary(w).unwrap()).unwrap();
        assert!(r.pass);
        let mut rng = seeded(8);
        for _ in 0..5 {
            let r = verify_sandwich(&random_channel(2, 2, 2, &mut rng), &random_channel(2, 2, 3, &mut rng)).unwrap();
            assert!(r.pass, "slack {}", r.slack);
        }
        let ch = random_channel(2, 2, 2, &mut rng);
        let r = verify_sandwich(&ch, &ch).unwrap();
        assert!(r.lhs < 1e-6 && r.rhs < 1e-9);
    }

    #[test]
    fn marginal_error_matches_standalone() {
        let (x, _) = qubit_pair();
        let mut rng = seeded(30);
        let a = random_joint_apparatus(2, 2, &mut rng);
        let standalone = Apparatus::new(
            a.outcome_channel(Outcome::X).unwrap(),
            vec![OutputFactor::classical(Outcome::X, a.labels(Outcome::X).unwrap().to_vec())],
        )
        .unwrap();
        let e1 = super::super::quantities::error(&a, Outcome::X, &x).unwrap();
        let e2 = super::super::quantities::error(&standalone, Outcome::X, &x).unwrap();
        assert!((e1 - e2).abs() < 1e-9);
    }
}
