//! End-to-end efficiency: probability that an excited ion emits into its
//! resonant cavity mode, detector and out-coupling losses, and the resulting
//! entangled-pair rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light, m/s.
pub const C: f64 = 299_792_458.0;
/// Planck constant, J s.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = H / (2.0 * PI);
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Published operating point for a ⁴⁰Ca⁺ implementation. These are quoted
/// numbers, kept apart from the formula evaluators below: the quoted decay
/// rate does not follow from the quoted finesse and length.
pub mod published {
    /// Cavity finesse.
    pub const FINESSE: f64 = 19_000.0;
    /// Cavity length, m.
    pub const CAVITY_LENGTH: f64 = 3e-3;
    /// Quoted cavity decay rate for the finesse and length above, 1/s.
    pub const QUOTED_DECAY_RATE: f64 = 9.9e6;
    /// Quoted probability of emission into the cavity mode.
    pub const P_CAV: f64 = 0.01;
    /// Detector efficiency.
    pub const DETECTOR_EFFICIENCY: f64 = 0.7;
    /// Input photon rate, 1/s.
    pub const PHOTON_RATE: f64 = 5000.0;
    /// Out-coupling factor, taken as close to unit.
    pub const OUT_COUPLING: f64 = 1.0;
    /// Initial fidelity of the mixed-state operating point.
    pub const MIXED_FIDELITY: f64 = 0.7;
    /// `|a|^2` of the product-state operating point.
    pub const PRODUCT_A2: f64 = 0.7;
    /// Claimed pairs per second for the mixed-state point ("eight pairs").
    pub const CLAIMED_MIXED_PAIRS: f64 = 8.0;
    /// Claimed pairs per second for the product-state point ("five pairs").
    pub const CLAIMED_PRODUCT_PAIRS: f64 = 5.0;
    /// P3/2 -> D5/2 versus P3/2 -> S1/2 branching, 1:30. Documentation only.
    pub const BRANCHING_RATIO: (f64, f64) = (1.0, 30.0);
    /// Transition probability quoted with the branching ratio, 1/s. Documentation only.
    pub const TRANSITION_RATE: f64 = 0.5e7;
    /// D5/2 <-> P3/2 wavelength, m.
    pub const WAVELENGTH_854: f64 = 854e-9;
    /// S1/2 <-> P3/2 wavelength (the cavity transition), m.
    pub const WAVELENGTH_393: f64 = 393e-9;
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonPositive(name))
    }
}

fn unit_interval(name: &'static str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::OutOfRange {
            name,
            range: "[0,1]",
            value: x,
        })
    }
}

/// `4 pi c / (F_cav L)`.
pub fn cavity_decay_rate(finesse: f64, length: f64) -> Result<f64> {
    Ok(4.0 * PI * C / (positive("finesse", finesse)? * positive("length", length)?))
}

/// Confocal mode volume `L^2 lambda / 4`.
pub fn mode_volume(length: f64, wavelength: f64) -> Result<f64> {
    Ok(positive("length", length)?.powi(2) * positive("wavelength", wavelength)? / 4.0)
}

/// Confocal waist `sqrt(L lambda / pi)`.
pub fn mode_waist(length: f64, wavelength: f64) -> Result<f64> {
    Ok((positive("length", length)? * positive("wavelength", wavelength)? / PI).sqrt())
}

/// `(D / hbar) sqrt(h c / (2 eps0 lambda V))` with the confocal mode volume.
pub fn coupling_constant(dipole: f64, wavelength: f64, length: f64) -> Result<f64> {
    let d = positive("dipole", dipole)?;
    let v = mode_volume(length, wavelength)?;
    Ok(d / HBAR * (H * C / (2.0 * EPSILON_0 * wavelength * v)).sqrt())
}

/// `4 gamma Omega^2 / ((gamma + Gamma)(gamma Gamma + 4 Omega^2))`, unclamped.
pub fn p_cav(gamma: f64, omega: f64, loss_rate: f64) -> Result<f64> {
    for (name, x) in [("gamma", gamma), ("omega", omega), ("loss_rate", loss_rate)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::OutOfRange {
                name,
                range: "[0,inf)",
                value: x,
            });
        }
    }
    let w = 4.0 * omega * omega;
    let denom = (gamma + loss_rate) * (gamma * loss_rate + w);
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("p_cav"));
    }
    Ok(4.0 * gamma * omega * omega / denom)
}

/// Coupling that makes `p_cav(gamma, Omega, loss_rate) == target`.
///
/// Requires `gamma > target (gamma + loss_rate)`; above that the target
/// is unreachable for any coupling.
pub fn coupling_for_p_cav(gamma: f64, loss_rate: f64, target: f64) -> Result<f64> {
    let gamma = positive("gamma", gamma)?;
    let loss_rate = positive("loss_rate", loss_rate)?;
    let target = unit_interval("p_cav", target)?;
    let slack = gamma - target * (gamma + loss_rate);
    if slack <= 0.0 {
        return Err(Error::OutOfRange {
            name: "p_cav",
            range: "[0, gamma/(gamma+loss_rate))",
            value: target,
        });
    }
    let four_omega_sq = target * gamma * loss_rate * (gamma + loss_rate) / slack;
    Ok((four_omega_sq / 4.0).sqrt())
}

/// Physical cavity description from which `p_cav` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub finesse: f64,
    /// m
    pub length: f64,
    /// m
    pub wavelength: f64,
    /// Dipole matrix element, C m.
    pub dipole: f64,
    /// Non-cavity loss rate, 1/s.
    pub loss_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityEvaluation {
    pub gamma: f64,
    pub omega: f64,
    pub mode_volume: f64,
    pub waist: f64,
    pub p_cav: f64,
}

impl CavityParams {
    pub fn evaluate(&self) -> Result<CavityEvaluation> {
        let gamma = cavity_decay_rate(self.finesse, self.length)?;
        let omega = coupling_constant(self.dipole, self.wavelength, self.length)?;
        Ok(CavityEvaluation {
            gamma,
            omega,
            mode_volume: mode_volume(self.length, self.wavelength)?,
            waist: mode_waist(self.length, self.wavelength)?,
            p_cav: p_cav(gamma, omega, positive("loss_rate", self.loss_rate)?)?,
        })
    }
}

/// Source of the cavity-emission probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityModel {
    /// Use a given `p_cav` directly.
    OperatingPoint { p_cav: f64 },
    /// Evaluate `p_cav` from cavity and atomic parameters.
    Physical(CavityParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyParams {
    pub cavity: CavityModel,
    /// Detector efficiency.
    pub eta: f64,
    /// Out-coupling factor.
    pub xi: f64,
    /// Input photons per second.
    pub photon_rate: f64,
}

impl EfficiencyParams {
    pub fn published() -> Self {
        EfficiencyParams {
            cavity: CavityModel::OperatingPoint {
                p_cav: published::P_CAV,
            },
            eta: published::DETECTOR_EFFICIENCY,
            xi: published::OUT_COUPLING,
            photon_rate: published::PHOTON_RATE,
        }
    }

    pub fn p_cav(&self) -> Result<f64> {
        match self.cavity {
            CavityModel::OperatingPoint { p_cav } => unit_interval("p_cav", p_cav),
            CavityModel::Physical(c) => Ok(c.evaluate()?.p_cav),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub p_protocol: f64,
    pub p_cav: f64,
    pub eta: f64,
    pub xi: f64,
    pub photon_rate: f64,
    pub p_total: f64,
    pub pairs_per_second: f64,
}

/// `p_protocol * p_cav * eta * xi`, scaled by the photon rate.
pub fn throughput(p_protocol: f64, params: &EfficiencyParams) -> Result<ThroughputReport> {
    let p_protocol = unit_interval("p_protocol", p_protocol)?;
    let eta = unit_interval("eta", params.eta)?;
    let xi = unit_interval("xi", params.xi)?;
    if !params.photon_rate.is_finite() || params.photon_rate < 0.0 {
        return Err(Error::OutOfRange {
            name: "photon_rate",
            range: "[0,inf)",
            value: params.photon_rate,
        });
    }
    let p_cav = params.p_cav()?;
    let p_total = p_protocol * p_cav * eta * xi;
    Ok(ThroughputReport {
        p_protocol,
        p_cav,
        eta,
        xi,
        photon_rate: params.photon_rate,
        p_total,
        pairs_per_second: p_total * params.photon_rate,
    })
}

/// The decay rate evaluated from the published finesse and length next to
/// the quoted value. The two differ by a factor of about 6.7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRateCheck {
    pub finesse: f64,
    pub length: f64,
    pub formula: f64,
    pub quoted: f64,
    pub ratio: f64,
}

pub fn published_decay_rate_check() -> DecayRateCheck {
    let formula = cavity_decay_rate(published::FINESSE, published::CAVITY_LENGTH)
        .expect("published constants are positive");
    DecayRateCheck {
        finesse: published::FINESSE,
        length: published::CAVITY_LENGTH,
        formula,
        quoted: published::QUOTED_DECAY_RATE,
        ratio: formula / published::QUOTED_DECAY_RATE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_rate_at_published_point() {
        let g = cavity_decay_rate(19_000.0, 3e-3).unwrap();
        // 4 pi 299792458 / 57
        assert!((g - 6.609_303_744_943_345e7).abs() / g < 1e-12);
        let check = published_decay_rate_check();
        assert_eq!(check.quoted, 9.9e6);
        assert!((check.ratio - 6.676).abs() < 1e-3);
    }

    #[test]
    fn decay_rate_scaling_and_limits() {
        let g = cavity_decay_rate(1e4, 1e-3).unwrap();
        assert!((cavity_decay_rate(1e4, 2e-3).unwrap() - g / 2.0).abs() < 1e-6);
        assert!(cavity_decay_rate(1e30, 1e-3).unwrap() < 1e-12);
        assert!(cavity_decay_rate(0.0, 1e-3).is_err());
        assert!(cavity_decay_rate(1e4, -1.0).is_err());
    }

    #[test]
    fn coupling_scaling() {
        let d = 2e-29;
        let o = coupling_constant(d, 393e-9, 3e-3).unwrap();
        assert!(o > 0.0);
        assert!((coupling_constant(2.0 * d, 393e-9, 3e-3).unwrap() - 2.0 * o).abs() / o < 1e-12);
        // doubling L quadruples V
        assert!((coupling_constant(d, 393e-9, 6e-3).unwrap() - o / 2.0).abs() / o < 1e-12);
        assert!(coupling_constant(0.0, 393e-9, 3e-3).is_err());
        let w = mode_waist(3e-3, 393e-9).unwrap();
        assert!((w - (3e-3 * 393e-9 / PI).sqrt()).abs() < 1e-18);
    }

    #[test]
    fn p_cav_limits() {
        assert!((p_cav(1e7, 3e6, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(p_cav(1e7, 0.0, 1e8).unwrap(), 0.0);
        assert_eq!(p_cav(0.0, 0.0, 0.0), Err(Error::ZeroDenominator("p_cav")));
        assert_eq!(p_cav(1e7, 0.0, 0.0), Err(Error::ZeroDenominator("p_cav")));
        assert!(p_cav(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn operating_point_round_trip() {
        // a coupling chosen to hit the quoted p_cav at the quoted gamma
        let loss = 1.4e8;
        let omega =
            coupling_for_p_cav(published::QUOTED_DECAY_RATE, loss, published::P_CAV).unwrap();
        let p = p_cav(published::QUOTED_DECAY_RATE, omega, loss).unwrap();
        assert!((p - published::P_CAV).abs() < 1e-12);
        assert!(coupling_for_p_cav(1e6, 1e8, 0.5).is_err());
    }

    #[test]
    fn published_throughput() {
        let params = EfficiencyParams::published();
        let mixed = throughput(published::MIXED_FIDELITY / 3.0, &params).unwrap();
        assert!((mixed.pairs_per_second - 8.1667).abs() < 1e-3);
        let a2 = published::PRODUCT_A2;
        let product = throughput(2.0 * a2 * (1.0 - a2) / 3.0, &params).unwrap();
        assert!((product.pairs_per_second - 4.9).abs() < 1e-9);
        let none = throughput(
            0.2,
            &EfficiencyParams {
                photon_rate: 0.0,
                ..params
            },
        )
        .unwrap();
        assert_eq!(none.pairs_per_second, 0.0);
    }

    #[test]
    fn throughput_validation() {
        let p = EfficiencyParams::published();
        assert!(throughput(1.2, &p).is_err());
        assert!(throughput(0.1, &EfficiencyParams { eta: 1.5, ..p }).is_err());
        assert!(throughput(
            0.1,
            &EfficiencyParams {
                photon_rate: -1.0,
                ..p
            }
        )
        .is_err());
        let physical = EfficiencyParams {
            cavity: CavityModel::Physical(CavityParams {
                finesse: published::FINESSE,
                length: published::CAVITY_LENGTH,
                wavelength: published::WAVELENGTH_393,
                dipole: 2e-29,
                loss_rate: 1.4e8,
            }),
            ..p
        };
        let t = throughput(0.1, &physical).unwrap();
        assert!(t.p_cav > 0.0 && t.p_cav <= 1.0);
    }
}
