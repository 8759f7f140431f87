//! Joint photon/ion Hilbert space.
//!
//! A basis ket is the triple (photon mode, level of ion U, level of ion L).
//! States are sparse amplitude maps keyed by that triple. Keys are kept in a
//! `BTreeMap`, so two states holding the same amplitudes compare equal no
//! matter the order in which terms were inserted.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped from canonical states.
pub const PRUNE_EPS: f64 = 1e-12;
/// Tolerance on unit norm for anything that claims to be normalized.
pub const NORM_TOL: f64 = 1e-9;

/// Amplitudes indexed by `(ion U level, ion L level)`.
pub type IonAmplitudes = BTreeMap<(IonLevel, IonLevel), Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
}

impl Polarization {
    /// The metastable level this polarization excites.
    pub fn coupled_level(self) -> IonLevel {
        match self {
            Polarization::SigmaPlus => IonLevel::MPlus,
            Polarization::SigmaMinus => IonLevel::MMinus,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarization::SigmaPlus => Polarization::SigmaMinus,
            Polarization::SigmaMinus => Polarization::SigmaPlus,
        }
    }
}

/// Storable ion levels. The excited level is eliminated: absorption and
/// decay to `G` happen as one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IonLevel {
    MPlus,
    MMinus,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    Upper,
    Lower,
}

impl Port {
    pub fn other(self) -> Self {
        match self {
            Port::Upper => Port::Lower,
            Port::Lower => Port::Upper,
        }
    }
}

/// Travel direction through the interferometer. Forward runs from the M1
/// side (left) towards the M2 side (right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IonId {
    U,
    L,
}

impl IonId {
    /// Ion U sits on the upper arm, ion L on the lower arm.
    pub fn arm(self) -> Port {
        match self {
            IonId::U => Port::Upper,
            IonId::L => Port::Lower,
        }
    }
}

/// Where the single photonic excitation lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonMode {
    Vacuum,
    /// Re-emitted by the given ion after absorption. Terminal.
    Scattered(IonId),
    Propagating {
        port: Port,
        direction: Direction,
        polarization: Polarization,
    },
}

impl PhotonMode {
    pub fn propagating(port: Port, direction: Direction, polarization: Polarization) -> Self {
        PhotonMode::Propagating {
            port,
            direction,
            polarization,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub photon: PhotonMode,
    pub ion_u: IonLevel,
    pub ion_l: IonLevel,
}

impl BasisState {
    pub fn new(photon: PhotonMode, ion_u: IonLevel, ion_l: IonLevel) -> Self {
        BasisState {
            photon,
            ion_u,
            ion_l,
        }
    }

    pub fn level(&self, ion: IonId) -> IonLevel {
        match ion {
            IonId::U => self.ion_u,
            IonId::L => self.ion_l,
        }
    }

    pub fn with_level(mut self, ion: IonId, level: IonLevel) -> Self {
        match ion {
            IonId::U => self.ion_u = level,
            IonId::L => self.ion_l = level,
        }
        self
    }

    pub fn with_photon(mut self, photon: PhotonMode) -> Self {
        self.photon = photon;
        self
    }
}

/// Sparse pure state over [`BasisState`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PureState {
    amplitudes: BTreeMap<BasisState, Complex64>,
}

impl PureState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(b: BasisState) -> Self {
        Self::from_terms([(b, Complex64::new(1.0, 0.0))])
    }

    /// Builds a state by summing the given terms; repeated keys accumulate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BasisState, Complex64)>,
    {
        let mut amplitudes = BTreeMap::new();
        for (b, c) in terms {
            *amplitudes.entry(b).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut s = PureState { amplitudes };
        s.prune();
        s
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, c| c.norm() >= PRUNE_EPS);
    }

    pub fn amplitude(&self, b: &BasisState) -> Complex64 {
        self.amplitudes
            .get(b)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisState, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes
            .values()
            .fold(0.0, |acc, c| acc + c.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(self.amplitudes.iter().map(|(b, c)| (*b, c * k)))
    }

    pub fn add(&self, other: &PureState) -> Self {
        Self::from_terms(
            self.amplitudes
                .iter()
                .chain(other.amplitudes.iter())
                .map(|(b, c)| (*b, *c)),
        )
    }

    /// Applies a linear map given by its action on each basis ket.
    pub fn map_linear<F, I>(&self, f: F) -> Self
    where
        F: Fn(&BasisState) -> I,
        I: IntoIterator<Item = (BasisState, Complex64)>,
    {
        Self::from_terms(
            self.amplitudes
                .iter()
                .flat_map(|(b, c)| f(b).into_iter().map(move |(b2, k)| (b2, k * c))),
        )
    }

    /// Keeps only the terms satisfying `keep` (an orthogonal projection).
    pub fn project<F>(&self, keep: F) -> Self
    where
        F: Fn(&BasisState) -> bool,
    {
        PureState {
            amplitudes: self
                .amplitudes
                .iter()
                .filter(|(b, _)| keep(b))
                .map(|(b, c)| (*b, *c))
                .collect(),
        }
    }

    /// Splits off the ion factor. Fails unless every term shares one photon mode.
    pub fn ion_factor(&self) -> Result<(PhotonMode, IonAmplitudes)> {
        let mut photon = None;
        let mut ions = BTreeMap::new();
        for (b, c) in &self.amplitudes {
            match photon {
                None => photon = Some(b.photon),
                Some(p) if p != b.photon => return Err(Error::PhotonNotSeparable),
                _ => {}
            }
            ions.insert((b.ion_u, b.ion_l), *c);
        }
        photon.map(|p| (p, ions)).ok_or(Error::NullState)
    }

    /// Equality up to a single global phase, amplitude-wise within `tol`.
    pub fn eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        let overlap = inner_product(other, self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let keys = self.amplitudes.keys().chain(other.amplitudes.keys());
        keys.into_iter()
            .all(|b| (self.amplitude(b) - phase * other.amplitude(b)).norm() <= tol)
    }

    /// Amplitude-wise comparison within `tol` (phase sensitive).
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        let keys = self.amplitudes.keys().chain(other.amplitudes.keys());
        keys.into_iter()
            .all(|b| (self.amplitude(b) - other.amplitude(b)).norm() <= tol)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(
                f,
                "({:.6}{:+.6}i)|{:?};{:?},{:?}>",
                c.re, c.im, b.photon, b.ion_u, b.ion_l
            )?;
        }
        Ok(())
    }
}

/// Returns the pre-normalization norm together with the unit-norm state.
pub fn normalize(s: &PureState) -> Result<(f64, PureState)> {
    let norm = s.norm();
    if norm < PRUNE_EPS {
        return Err(Error::NullState);
    }
    Ok((norm, s.scale(Complex64::new(1.0 / norm, 0.0))))
}

/// `<s1|s2>`, conjugate-linear in `s1`.
pub fn inner_product(s1: &PureState, s2: &PureState) -> Complex64 {
    // iterate the smaller map
    let (small, large, conj_small) = if s1.len() <= s2.len() {
        (s1, s2, true)
    } else {
        (s2, s1, false)
    };
    small
        .iter()
        .map(|(b, c)| {
            let d = large.amplitude(b);
            if conj_small {
                c.conj() * d
            } else {
                d.conj() * c
            }
        })
        .sum()
}

/// Weighted ensemble of pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    /// Validates weights in (0, 1] summing to one and normalized components.
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::BadWeights("empty ensemble".into()));
        }
        let mut total = 0.0;
        for (w, s) in &components {
            if !(*w > 0.0 && *w <= 1.0 + NORM_TOL) {
                return Err(Error::BadWeights(format!("weight {w} outside (0,1]")));
            }
            let n = s.norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized {
                    what: "mixed-state component",
                    norm_sqr: n,
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::BadWeights(format!("sum to {total}, not 1")));
        }
        Ok(MixedState { components })
    }

    /// Renormalizes arbitrary non-negative weights and component norms,
    /// dropping components with zero weight.
    pub fn from_unnormalized<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PureState)>,
    {
        let mut kept = Vec::new();
        for (w, s) in terms {
            if w < 0.0 {
                return Err(Error::BadWeights(format!("negative weight {w}")));
            }
            if w > 0.0 {
                kept.push((w, normalize(&s)?.1));
            }
        }
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(Error::BadWeights("all weights zero".into()));
        }
        Self::new(kept.into_iter().map(|(w, s)| (w / total, s)).collect())
    }

    pub fn pure(s: PureState) -> Result<Self> {
        Self::new(vec![(1.0, s)])
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }
}

/// Fidelity `sum_i w_i |<target|s_i>|^2` over the ion factor, with the
/// photon traced out.
pub fn ion_fidelity(m: &MixedState, target: &PureState) -> Result<f64> {
    let (_, target_ions) = normalize(target)?.1.ion_factor()?;
    let mut photon = None;
    let mut fidelity = 0.0;
    for (w, s) in m.components() {
        let (p, ions) = s.ion_factor()?;
        match photon {
            None => photon = Some(p),
            Some(q) if q != p => return Err(Error::PhotonNotSeparable),
            _ => {}
        }
        let overlap: Complex64 = target_ions
            .iter()
            .filter_map(|(k, t)| ions.get(k).map(|c| t.conj() * c))
            .sum();
        fidelity += w * overlap.norm_sqr();
    }
    Ok(fidelity)
}
