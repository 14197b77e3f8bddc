use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{compose, luders_apparatus, Apparatus, OutputFactor, Outcome, QuantumChannel};
use crate::opcore::linalg::{self, c, ComplexMatrix};
use crate::opcore::Observable;
use crate::{Error, Result};

use super::verify::{verify_ed, verify_jm};

/// One-parameter device families used by parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Depolarize with probability `p`, then measure X with the Lüders
    /// instrument; the joint device measures Z on the post-measurement state.
    DepolarizedLuders,
    /// With probability `1 − p` measure X, otherwise measure Z; both records
    /// are filled with independent uniform guesses for the other outcome.
    MixedIdealJoint,
    /// Measure X and guess Z uniformly; with probability `p` guess both.
    XMeasureZGuess,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::DepolarizedLuders, Family::MixedIdealJoint, Family::XMeasureZGuess];

    pub fn name(self) -> &'static str {
        match self {
            Family::DepolarizedLuders => "depolarized_luders",
            Family::MixedIdealJoint => "mixed_ideal_joint",
            Family::XMeasureZGuess => "x_measure_z_guess",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown device family {s:?}")))
    }
}

/// A family member at one parameter value: `joint` carries X and Z
/// registers, `marginal` is the X-only device judged for disturbance.
#[derive(Debug, Clone)]
pub struct FamilyDevice {
    pub joint: Apparatus,
    pub marginal: Apparatus,
}

fn joint_from_terms(d: usize, x: &Observable, z: &Observable, terms: Vec<(usize, usize, ComplexMatrix)>) -> Result<Apparatus> {
    let kraus = terms
        .into_iter()
        .filter(|(_, _, k)| k.norm() > 0.0)
        .map(|(i, j, k)| linalg::tensor(&k, &linalg::tensor(&linalg::ket(d, i), &linalg::ket(d, j))))
        .collect();
    Apparatus::new(
        QuantumChannel::new(kraus)?,
        vec![
            OutputFactor::quantum(d),
            OutputFactor::classical(Outcome::X, x.labels().to_vec()),
            OutputFactor::classical(Outcome::Z, z.labels().to_vec()),
        ],
    )
}

pub fn family_device(family: Family, p: f64, x: &Observable, z: &Observable) -> Result<FamilyDevice> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("family parameter {p} outside [0, 1]")));
    }
    let d = x.dim();
    if z.dim() != d {
        return Err(Error::dims("observable pair", d, z.dim()));
    }
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    let mut terms = Vec::new();
    match family {
        Family::DepolarizedLuders => {
            let dep = QuantumChannel::depolarizing(d, p)?;
            let luders = luders_apparatus(x);
            let marginal = Apparatus::new(compose(luders.channel(), &dep)?, luders.factors().to_vec())?;
            for i in 0..d {
                for j in 0..d {
                    for k in dep.kraus() {
                        terms.push((i, j, z.projector(j) * x.projector(i) * k));
                    }
                }
            }
            let joint = joint_from_terms(d, x, z, terms)?;
            Ok(FamilyDevice { joint, marginal })
        }
        Family::MixedIdealJoint | Family::XMeasureZGuess => {
            let a = c((1.0 - p).sqrt() * inv_sqrt_d, 0.0);
            for i in 0..d {
                for j in 0..d {
                    terms.push((i, j, x.projector(i) * a));
                    let other = match family {
                        Family::MixedIdealJoint => z.projector(j) * c(p.sqrt() * inv_sqrt_d, 0.0),
                        _ => linalg::identity(d) * c(p.sqrt() / d as f64, 0.0),
                    };
                    terms.push((i, j, other));
                }
            }
            let joint = joint_from_terms(d, x, z, terms)?;
            let marginal = joint.without(Outcome::Z)?;
            Ok(FamilyDevice { joint, marginal })
        }
    }
}

/// One line of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub eps_x: f64,
    pub eps_z: f64,
    pub eta_z: f64,
    pub c1: f64,
    pub c2: f64,
    pub lhs_jm: f64,
    pub lhs_ed: f64,
    pub slack_jm: f64,
    pub slack_ed: f64,
}

impl SweepRow {
    pub const HEADER: &'static str = "param,eps_x,eps_z,eta_z,c1,c2,lhs_jm,lhs_ed,slack_jm,slack_ed";

    pub fn values(&self) -> [f64; 10] {
        [
            self.param,
            self.eps_x,
            self.eps_z,
            self.eta_z,
            self.c1,
            self.c2,
            self.lhs_jm,
            self.lhs_ed,
            self.slack_jm,
            self.slack_ed,
        ]
    }
}

pub fn sweep_row(family: Family, p: f64, x: &Observable, z: &Observable) -> Result<SweepRow> {
    let dev = family_device(family, p, x, z)?;
    let jm = verify_jm(&dev.joint, x, z)?;
    let ed = verify_ed(&dev.marginal, x, z)?;
    let get = |r: &super::VerificationReport, k: &str| r.component(k).unwrap_or(f64::NAN);
    Ok(SweepRow {
        param: p,
        eps_x: get(&jm, "eps_x"),
        eps_z: get(&jm, "eps_z"),
        eta_z: get(&ed, "eta_z"),
        c1: jm.rhs,
        c2: ed.rhs,
        lhs_jm: jm.lhs,
        lhs_ed: ed.lhs,
        slack_jm: jm.slack,
        slack_ed: ed.slack,
    })
}
