//! Optical elements as linear maps on [`PureState`].

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    normalize, BasisState, Direction, IonId, IonLevel, PhotonMode, Port, PureState, PRUNE_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamSplitterId {
    Bs1,
    Bs2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mirror {
    /// Closes the left-lower (input) port.
    M1LeftLower,
    /// Closes the right-upper port.
    M2RightUpper,
}

impl Mirror {
    /// The propagating mode a photon must be in to hit this mirror.
    fn outgoing(self) -> (Port, Direction) {
        match self {
            Mirror::M1LeftLower => (Port::Lower, Direction::Backward),
            Mirror::M2RightUpper => (Port::Upper, Direction::Forward),
        }
    }

    /// Which mirror closes the given output port of a pass travelling in `direction`.
    pub fn at_exit(port: Port, direction: Direction) -> Option<Mirror> {
        [Mirror::M1LeftLower, Mirror::M2RightUpper]
            .into_iter()
            .find(|m| m.outgoing() == (port, direction))
    }
}

/// Reflection phase applied by a beam splitter for the given travel direction.
pub fn reflection_phase(direction: Direction) -> Complex64 {
    match direction {
        Direction::Forward => Complex64::i(),
        Direction::Backward => -Complex64::i(),
    }
}

/// Nonpolarizing 50-50 splitter. BS1 and BS2 are identical.
///
/// The crossing term keeps the amplitude; the term staying on the same port
/// picks up `+i` (forward) or `-i` (backward). Vacuum and scattered terms
/// pass through.
pub fn beam_splitter(s: &PureState, _id: BeamSplitterId) -> PureState {
    let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
    s.map_linear(|b| match b.photon {
        PhotonMode::Propagating {
            port,
            direction,
            polarization,
        } => {
            let r = reflection_phase(direction) * FRAC_1_SQRT_2;
            vec![
                (
                    b.with_photon(PhotonMode::propagating(
                        port.other(),
                        direction,
                        polarization,
                    )),
                    t,
                ),
                (
                    b.with_photon(PhotonMode::propagating(port, direction, polarization)),
                    r,
                ),
            ]
        }
        _ => vec![(*b, Complex64::new(1.0, 0.0))],
    })
}

/// Absorption by ion `id` followed by decay to `g`, emitting a scattered photon.
///
/// Only terms whose photon travels on the ion's arm with the polarization
/// matching the ion's level are affected.
pub fn ion_interaction(s: &PureState, id: IonId) -> PureState {
    s.map_linear(|b| {
        let out = match b.photon {
            PhotonMode::Propagating {
                port, polarization, ..
            } if port == id.arm() && b.level(id) == polarization.coupled_level() => b
                .with_photon(PhotonMode::Scattered(id))
                .with_level(id, IonLevel::G),
            _ => *b,
        };
        [(out, Complex64::new(1.0, 0.0))]
    })
}

/// Reflects every propagating term back into the interferometer with unit phase.
pub fn mirror(s: &PureState, at: Mirror) -> Result<PureState> {
    let (port, direction) = at.outgoing();
    if s.iter().any(|(b, _)| match b.photon {
        PhotonMode::Propagating {
            port: p,
            direction: d,
            ..
        } => (p, d) != (port, direction),
        _ => false,
    }) {
        return Err(Error::PhotonEscaped);
    }
    Ok(s.map_linear(|b| {
        let out = match b.photon {
            PhotonMode::Propagating {
                port,
                direction,
                polarization,
            } => b.with_photon(PhotonMode::propagating(
                port,
                direction.reversed(),
                polarization,
            )),
            _ => *b,
        };
        [(out, Complex64::new(1.0, 0.0))]
    }))
}

/// Outcome of a detector click.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub prob: f64,
    /// Normalized ion state with the photon absorbed (vacuum).
    pub post: PureState,
}

/// Projects onto the photon leaving through `port`. Scattered light never
/// reaches a detector.
pub fn detect(s: &PureState, port: Port) -> Result<Detection> {
    let hit =
        s.project(|b| matches!(b.photon, PhotonMode::Propagating { port: p, .. } if p == port));
    let prob = hit.norm_sqr();
    if prob < PRUNE_EPS {
        return Err(Error::NoSupport(prob));
    }
    // polarization-resolving: a click must identify a single mode
    hit.ion_factor()?;
    let consumed =
        hit.map_linear(|b| [(b.with_photon(PhotonMode::Vacuum), Complex64::new(1.0, 0.0))]);
    let (_, post) = normalize(&consumed)?;
    Ok(Detection { prob, post })
}

/// Keeps only the basis terms where a photon is still propagating.
pub fn propagating_part(s: &PureState) -> PureState {
    s.project(|b: &BasisState| matches!(b.photon, PhotonMode::Propagating { .. }))
}
