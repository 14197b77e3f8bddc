use nalgebra::DMatrix;

use crate::opcore::{overlap_matrix, Observable};
use crate::Result;

/// Complementarity constants of an observable pair, all read off the
/// overlap matrix `O[x][z] = |⟨φ_x|ϑ_z⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementarityPair {
    pub x: Observable,
    pub z: Observable,
    pub overlaps: DMatrix<f64>,
    /// `(1/√2)(1 − min_x max_z O[x][z])`.
    pub r_xz: f64,
    /// `(1/√2)(1 − min_z max_x O[x][z])`.
    pub r_zx: f64,
    pub c1: f64,
    /// `1 − max_z Σ_x {1/d − O[x][z]}₊`.
    pub c2_xz: f64,
    /// `1 − max_x Σ_z {1/d − O[x][z]}₊`.
    pub c2_zx: f64,
}

pub fn complementarity(x: &Observable, z: &Observable) -> Result<ComplementarityPair> {
    let overlaps = overlap_matrix(x, z)?;
    let d = x.dim();
    let inv_d = 1.0 / d as f64;
    let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| overlaps[(i, j)]).collect()).collect();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| overlaps[(i, j)]).collect()).collect();

    let min_of_max = |lines: &[Vec<f64>]| {
        lines
            .iter()
            .map(|l| l.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min)
    };
    let max_deficit = |lines: &[Vec<f64>]| {
        lines
            .iter()
            .map(|l| l.iter().map(|&o| (inv_d - o).max(0.0)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let r_xz = std::f64::consts::FRAC_1_SQRT_2 * (1.0 - min_of_max(&rows));
    let r_zx = std::f64::consts::FRAC_1_SQRT_2 * (1.0 - min_of_max(&cols));
    Ok(ComplementarityPair {
        x: x.clone(),
        z: z.clone(),
        r_xz,
        r_zx,
        c1: r_xz.max(r_zx),
        c2_xz: 1.0 - max_deficit(&cols),
        c2_zx: 1.0 - max_deficit(&rows),
        overlaps,
    })
}
