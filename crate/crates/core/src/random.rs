//! Seeded random instances: Haar unitaries, isometries, channels, states and
//! measuring devices. Every generator takes the RNG explicitly so a fixed seed
//! reproduces a whole test run.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::{
    joint_apparatus, Apparatus, Outcome, OutputFactor, QuantumChannel, StinespringIsometry,
};
use crate::opcore::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::opcore::{default_labels, DensityOperator, Observable};

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random `d × d` unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal absorbed).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { linalg::ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random isometry `ℂ^{dim_in} → ℂ^{dim_out}`.
pub fn random_isometry(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(dim_out >= dim_in, "isometry needs dim_out ≥ dim_in");
    random_unitary(dim_out, rng).columns(0, dim_in).into_owned()
}

/// Random channel with `kraus` Kraus operators, from a Haar isometry into
/// output ⊗ environment.
pub fn random_channel(dim_in: usize, dim_out: usize, kraus: usize, rng: &mut impl Rng) -> QuantumChannel {
    let v = random_isometry(dim_in, dim_out * kraus, rng);
    StinespringIsometry::new(v, dim_out, kraus)
        .expect("Haar isometry is isometric")
        .channel()
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> ComplexVector {
    let v = ComplexVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Ginibre-induced mixed state of full rank (almost surely).
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let t = linalg::trace(&m).re;
    DensityOperator::from_matrix(m / c(t, 0.0)).expect("Wishart matrix is a state")
}

pub fn random_basis(d: usize, rng: &mut impl Rng) -> Observable {
    Observable::from_columns(&random_unitary(d, rng)).expect("unitary columns are orthonormal")
}

/// Random joint measuring device with `d` outcomes for each of X and Z and a
/// quantum output of dimension `r`: one Kraus operator per outcome pair,
/// cut from a Haar isometry.
pub fn random_joint_apparatus(d: usize, r: usize, rng: &mut impl Rng) -> Apparatus {
    let v = random_isometry(d, d * d * r, rng);
    let kraus_xz: Vec<Vec<ComplexMatrix>> = (0..d)
        .map(|x| {
            (0..d)
                .map(|z| v.rows((x * d + z) * r, r).into_owned())
                .collect()
        })
        .collect();
    joint_apparatus(&kraus_xz, default_labels(d), default_labels(d)).expect("isometry slices form a device")
}

/// Random instrument with `d` X outcomes, quantum output of dimension `r`
/// and `k` Kraus operators per outcome. Factors are `[quantum r, X]`.
pub fn random_instrument(d: usize, r: usize, k: usize, rng: &mut impl Rng) -> Apparatus {
    let v = random_isometry(d, d * k * r, rng);
    let mut kraus = Vec::with_capacity(d * k);
    for x in 0..d {
        for j in 0..k {
            let block = v.rows((x * k + j) * r, r).into_owned();
            kraus.push(linalg::tensor(&block, &linalg::ket(d, x)));
        }
    }
    let channel = QuantumChannel::new(kraus).expect("isometry slices are trace preserving");
    Apparatus::new(
        channel,
        vec![
            OutputFactor::quantum(r),
            OutputFactor::classical(Outcome::X, default_labels(d)),
        ],
    )
    .expect("instrument registers are classical")
}

/// Largest trace distance `½‖(E₁ ⊗ 1)(ψ) − (E₂ ⊗ 1)(ψ)‖₁` over `samples`
/// random pure inputs on system ⊗ a copy of it; a lower bound on `δ(E₁, E₂)`.
pub fn sampled_distance(e1: &QuantumChannel, e2: &QuantumChannel, samples: usize, rng: &mut impl Rng) -> f64 {
    let d = e1.dim_in();
    let id = linalg::identity(d);
    let output = |ch: &QuantumChannel, psi: &ComplexMatrix| {
        ch.kraus().iter().fold(ComplexMatrix::zeros(ch.dim_out() * d, ch.dim_out() * d), |acc, k| {
            let phi = linalg::tensor(k, &id) * psi;
            acc + &phi * phi.adjoint()
        })
    };
    (0..samples)
        .map(|_| {
            let psi = ComplexMatrix::from_column_slice(d * d, 1, random_pure(d * d, rng).as_slice());
            0.5 * linalg::trace_norm(&(output(e1, &psi) - output(e2, &psi)))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitaries_are_unitary_and_reproducible() {
        let u = random_unitary(3, &mut seeded(7));
        assert!(linalg::max_abs_diff(&(u.adjoint() * &u), &linalg::identity(3)) < 1e-12);
        assert_eq!(u, random_unitary(3, &mut seeded(7)));
        assert_ne!(u, random_unitary(3, &mut seeded(8)));
    }

    #[test]
    fn generated_objects_validate() {
        let mut rng = seeded(1);
        let ch = random_channel(2, 3, 2, &mut rng);
        assert!(ch.trace_preservation_defect() < 1e-12);
        assert_eq!((ch.dim_in(), ch.dim_out()), (2, 3));
        assert!((random_pure(4, &mut rng).norm() - 1.0).abs() < 1e-12);
        assert_eq!(random_density(3, &mut rng).dim(), 3);
        let joint = random_joint_apparatus(2, 2, &mut rng);
        assert_eq!(joint.factor_dims(), vec![2, 2, 2]);
        let inst = random_instrument(3, 3, 2, &mut rng);
        assert_eq!(inst.factor_dims(), vec![3, 3]);
    }

    #[test]
    fn sampled_distance_of_orthogonal_preparations() {
        // Two constant channels onto orthogonal states are perfectly
        // distinguishable from any input.
        let mut rng = seeded(2);
        let a = crate::channels::constant_channel(&DensityOperator::basis_state(2, 0), 2);
        let b = crate::channels::constant_channel(&DensityOperator::basis_state(2, 1), 2);
        assert!((sampled_distance(&a, &b, 5, &mut rng) - 1.0).abs() < 1e-12);
        assert!(sampled_distance(&a, &a, 5, &mut rng) < 1e-12);
    }
}
