//! One pass of a photon through the interferometer with both ions in place,
//! and the post-selected outcomes for product and mixed ion inputs.
//!
//! The pass is built by composing the elements in path order: entry
//! splitter, ion U, ion L, exit splitter. Nothing here hard-codes the
//! resulting branch amplitudes.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::{self, beam_splitter, ion_interaction, BeamSplitterId, Mirror};
use crate::error::{Error, Result};
use crate::qcore::{
    inner_product, normalize, BasisState, Direction, IonId, IonLevel, MixedState, PhotonMode,
    Polarization, Port, PureState, NORM_TOL, PRUNE_EPS,
};

use IonLevel::{MMinus, MPlus};

/// Two-ion state on the {m+, m-} x {m+, m-} subspace. Field names give
/// (ion U, ion L) levels, `m` for m- and `p` for m+.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonPairState {
    pub c_mp: Complex64,
    pub c_pm: Complex64,
    pub c_mm: Complex64,
    pub c_pp: Complex64,
}

impl IonPairState {
    pub fn new(c_mp: Complex64, c_pm: Complex64, c_mm: Complex64, c_pp: Complex64) -> Result<Self> {
        let s = IonPairState {
            c_mp,
            c_pm,
            c_mm,
            c_pp,
        };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                what: "ion pair state",
                norm_sqr: n,
            });
        }
        Ok(s)
    }

    /// `(alpha|m+> + beta|m->)_U (a|m+> + b|m->)_L`
    pub fn product(alpha: Complex64, beta: Complex64, a: Complex64, b: Complex64) -> Result<Self> {
        for (what, x, y) in [("ion U state", alpha, beta), ("ion L state", a, b)] {
            let n = x.norm_sqr() + y.norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { what, norm_sqr: n });
            }
        }
        Self::new(beta * a, alpha * b, beta * b, alpha * a)
    }

    fn bell(mp: f64, pm: f64, mm: f64, pp: f64) -> Self {
        let k = |x: f64| Complex64::new(x * FRAC_1_SQRT_2, 0.0);
        IonPairState {
            c_mp: k(mp),
            c_pm: k(pm),
            c_mm: k(mm),
            c_pp: k(pp),
        }
    }

    /// `(|m+ m-> + |m- m+>)/sqrt 2`
    pub fn psi_plus() -> Self {
        Self::bell(1.0, 1.0, 0.0, 0.0)
    }

    /// `(|m- m+> - |m+ m->)/sqrt 2`, the heralded target.
    pub fn psi_minus() -> Self {
        Self::bell(1.0, -1.0, 0.0, 0.0)
    }

    /// `(|m+ m+> + |m- m->)/sqrt 2`
    pub fn phi_plus() -> Self {
        Self::bell(0.0, 0.0, 1.0, 1.0)
    }

    pub fn phi_minus() -> Self {
        Self::bell(0.0, 0.0, -1.0, 1.0)
    }

    /// Both ions in the level the photon cannot excite.
    pub fn dark(pol: Polarization) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match pol {
            Polarization::SigmaPlus => IonPairState {
                c_mp: zero,
                c_pm: zero,
                c_mm: one,
                c_pp: zero,
            },
            Polarization::SigmaMinus => IonPairState {
                c_mp: zero,
                c_pm: zero,
                c_mm: zero,
                c_pp: one,
            },
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_mp.norm_sqr() + self.c_pm.norm_sqr() + self.c_mm.norm_sqr() + self.c_pp.norm_sqr()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        IonPairState {
            c_mp: self.c_mp * k,
            c_pm: self.c_pm * k,
            c_mm: self.c_mm * k,
            c_pp: self.c_pp * k,
        }
    }

    pub fn to_pure(&self, photon: PhotonMode) -> PureState {
        PureState::from_terms([
            (BasisState::new(photon, MMinus, MPlus), self.c_mp),
            (BasisState::new(photon, MPlus, MMinus), self.c_pm),
            (BasisState::new(photon, MMinus, MMinus), self.c_mm),
            (BasisState::new(photon, MPlus, MPlus), self.c_pp),
        ])
    }

    /// Reads back the ion factor of a photon-separable state, normalizing it.
    pub fn from_pure(s: &PureState) -> Result<Self> {
        let (_, ions) = normalize(s)?.1.ion_factor()?;
        let mut out = IonPairState {
            c_mp: Complex64::new(0.0, 0.0),
            c_pm: Complex64::new(0.0, 0.0),
            c_mm: Complex64::new(0.0, 0.0),
            c_pp: Complex64::new(0.0, 0.0),
        };
        for ((u, l), c) in ions {
            match (u, l) {
                (MMinus, MPlus) => out.c_mp = c,
                (MPlus, MMinus) => out.c_pm = c,
                (MMinus, MMinus) => out.c_mm = c,
                (MPlus, MPlus) => out.c_pp = c,
                _ => return Err(Error::NotAnIonPair),
            }
        }
        Ok(out)
    }

    /// `|<other|self>|^2`
    pub fn fidelity_with(&self, other: &IonPairState) -> f64 {
        let overlap = other.c_mp.conj() * self.c_mp
            + other.c_pm.conj() * self.c_pm
            + other.c_mm.conj() * self.c_mm
            + other.c_pp.conj() * self.c_pp;
        overlap.norm_sqr()
    }

    pub fn eq_up_to_phase(&self, other: &IonPairState, tol: f64) -> bool {
        self.to_pure(PhotonMode::Vacuum)
            .eq_up_to_phase(&other.to_pure(PhotonMode::Vacuum), tol)
    }
}

/// State of the ion left untouched when its partner scattered the photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonQubit {
    pub plus: Complex64,
    pub minus: Complex64,
}

/// Port and direction at which the photon enters the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub port: Port,
    pub direction: Direction,
}

impl Entry {
    /// Left-lower port, through M1, travelling forward.
    pub const M1_SIDE: Entry = Entry {
        port: Port::Lower,
        direction: Direction::Forward,
    };
    /// Right-upper port, through M2, travelling backward.
    pub const M2_SIDE: Entry = Entry {
        port: Port::Upper,
        direction: Direction::Backward,
    };

    fn validate(self) -> Result<Self> {
        if self == Self::M1_SIDE || self == Self::M2_SIDE {
            Ok(self)
        } else {
            Err(Error::InvalidEntry)
        }
    }

    /// Splitters in the order the photon meets them.
    fn splitters(self) -> [BeamSplitterId; 2] {
        match self.direction {
            Direction::Forward => [BeamSplitterId::Bs1, BeamSplitterId::Bs2],
            Direction::Backward => [BeamSplitterId::Bs2, BeamSplitterId::Bs1],
        }
    }
}

impl Default for Entry {
    fn default() -> Self {
        Entry::M1_SIDE
    }
}

/// Whether the exit port on the mirror side is closed by the enclosure cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    /// Detectors on both output ports.
    Open,
    /// The output port facing a mirror sends the photon back in (recycle branch).
    Enclosed,
}

/// Branch decomposition of one pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassResult {
    pub p_scatter_u: f64,
    pub p_scatter_l: f64,
    pub p_detect_upper: f64,
    pub p_detect_lower: f64,
    pub p_recycle: f64,
    pub post_detect_upper: Option<IonPairState>,
    pub post_detect_lower: Option<IonPairState>,
    pub post_recycle: Option<IonPairState>,
    /// Ion L after ion U scattered.
    pub post_scatter_u: Option<IonQubit>,
    /// Ion U after ion L scattered.
    pub post_scatter_l: Option<IonQubit>,
}

impl PassResult {
    pub fn total(&self) -> f64 {
        self.p_scatter_u
            + self.p_scatter_l
            + self.p_detect_upper
            + self.p_detect_lower
            + self.p_recycle
    }

    pub fn p_scatter(&self) -> f64 {
        self.p_scatter_u + self.p_scatter_l
    }

    pub fn p_detect(&self, port: Port) -> f64 {
        match port {
            Port::Upper => self.p_detect_upper,
            Port::Lower => self.p_detect_lower,
        }
    }

    pub fn post_detect(&self, port: Port) -> Option<IonPairState> {
        match port {
            Port::Upper => self.post_detect_upper,
            Port::Lower => self.post_detect_lower,
        }
    }
}

/// Photon mode in which a pass starting at `entry` begins.
pub fn input_mode(pol: Polarization, entry: Entry) -> PhotonMode {
    PhotonMode::propagating(entry.port, entry.direction, pol)
}

/// The linear map of one pass: entry splitter, both ions, exit splitter.
pub fn evolve_pass(state: &PureState, entry: Entry) -> Result<PureState> {
    let [first, second] = entry.validate()?.splitters();
    let s = beam_splitter(state, first);
    let s = ion_interaction(&s, IonId::U);
    let s = ion_interaction(&s, IonId::L);
    Ok(beam_splitter(&s, second))
}

fn scatter_branch(out: &PureState, ion: IonId) -> Result<(f64, Option<IonQubit>)> {
    let part = out.project(|b| b.photon == PhotonMode::Scattered(ion));
    let prob = part.norm_sqr();
    if part.is_empty() {
        return Ok((prob, None));
    }
    let (_, ions) = normalize(&part)?.1.ion_factor()?;
    let other = match ion {
        IonId::U => IonId::L,
        IonId::L => IonId::U,
    };
    let mut q = IonQubit {
        plus: Complex64::new(0.0, 0.0),
        minus: Complex64::new(0.0, 0.0),
    };
    for ((u, l), c) in ions {
        let level = if other == IonId::U { u } else { l };
        match level {
            MPlus => q.plus = c,
            MMinus => q.minus = c,
            IonLevel::G => return Err(Error::NotAnIonPair),
        }
    }
    Ok((prob, Some(q)))
}

/// Splits a pass output into scatter, detector and recycle branches.
pub fn decompose(out: &PureState, exit_direction: Direction, setup: Setup) -> Result<PassResult> {
    let (p_scatter_u, post_scatter_u) = scatter_branch(out, IonId::U)?;
    let (p_scatter_l, post_scatter_l) = scatter_branch(out, IonId::L)?;
    let mut r = PassResult {
        p_scatter_u,
        p_scatter_l,
        p_detect_upper: 0.0,
        p_detect_lower: 0.0,
        p_recycle: 0.0,
        post_detect_upper: None,
        post_detect_lower: None,
        post_recycle: None,
        post_scatter_u,
        post_scatter_l,
    };
    for port in [Port::Upper, Port::Lower] {
        let leaving = out
            .project(|b| matches!(b.photon, PhotonMode::Propagating { port: p, .. } if p == port));
        let prob = leaving.norm_sqr();
        let mirror = Mirror::at_exit(port, exit_direction).filter(|_| setup == Setup::Enclosed);
        if let Some(m) = mirror {
            r.p_recycle = prob;
            if !leaving.is_empty() {
                let reflected = elements::mirror(&leaving, m)?;
                r.post_recycle = Some(IonPairState::from_pure(&reflected)?);
            }
            continue;
        }
        let post = match elements::detect(out, port) {
            Ok(d) => Some(IonPairState::from_pure(&d.post)?),
            Err(Error::NoSupport(_)) => None,
            Err(e) => return Err(e),
        };
        match port {
            Port::Upper => {
                r.p_detect_upper = prob;
                r.post_detect_upper = post;
            }
            Port::Lower => {
                r.p_detect_lower = prob;
                r.post_detect_lower = post;
            }
        }
    }
    Ok(r)
}

fn check_normalized(ions: &IonPairState) -> Result<()> {
    let n = ions.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            what: "ion pair state",
            norm_sqr: n,
        });
    }
    Ok(())
}

/// One pass through the open interferometer (detectors on both outputs).
pub fn single_pass(ions: &IonPairState, pol: Polarization, entry: Entry) -> Result<PassResult> {
    pass_with_setup(ions, pol, entry, Setup::Open)
}

/// One pass inside the enclosure cavity: the mirror-side output is recycled.
pub fn enclosed_pass(ions: &IonPairState, pol: Polarization, entry: Entry) -> Result<PassResult> {
    pass_with_setup(ions, pol, entry, Setup::Enclosed)
}

pub fn pass_with_setup(
    ions: &IonPairState,
    pol: Polarization,
    entry: Entry,
    setup: Setup,
) -> Result<PassResult> {
    check_normalized(ions)?;
    let input = ions.to_pure(input_mode(pol, entry));
    let out = evolve_pass(&input, entry)?;
    decompose(&out, entry.direction, setup)
}

/// Product-input run with the maximal-entanglement diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRun {
    pub ions: IonPairState,
    pub pass: PassResult,
    /// `|alpha| = |a|` and `|beta| = |b|`.
    pub matched_moduli: bool,
    /// Fidelity of the lower-detector post-state with psi-minus.
    pub fidelity_psi_minus: Option<f64>,
}

pub fn run_product(
    alpha: Complex64,
    beta: Complex64,
    a: Complex64,
    b: Complex64,
) -> Result<ProductRun> {
    let ions = IonPairState::product(alpha, beta, a, b)?;
    let pass = single_pass(&ions, Polarization::SigmaPlus, Entry::M1_SIDE)?;
    let matched_moduli =
        (alpha.norm() - a.norm()).abs() <= NORM_TOL && (beta.norm() - b.norm()).abs() <= NORM_TOL;
    let fidelity_psi_minus = pass
        .post_detect_lower
        .map(|s| s.fidelity_with(&IonPairState::psi_minus()));
    Ok(ProductRun {
        ions,
        pass,
        matched_moduli,
        fidelity_psi_minus,
    })
}

/// `F |psi+><psi+| + (1-F) |phi+><phi+|`, zero-weight terms dropped.
pub fn rho_ul(fidelity: f64) -> Result<Vec<(f64, IonPairState)>> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::OutOfRange {
            name: "fidelity",
            range: "[0,1]",
            value: fidelity,
        });
    }
    Ok([
        (fidelity, IonPairState::psi_plus()),
        (1.0 - fidelity, IonPairState::phi_plus()),
    ]
    .into_iter()
    .filter(|(w, _)| *w > 0.0)
    .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedComponent {
    pub weight: f64,
    pub ions: IonPairState,
    pub pass: PassResult,
}

/// Per-component passes with pooled branch weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPassResult {
    pub components: Vec<MixedComponent>,
    pub p_scatter: f64,
    pub p_detect_upper: f64,
    pub p_detect_lower: f64,
    pub p_recycle: f64,
    pub post_detect_upper: Option<MixedState>,
    pub post_detect_lower: Option<MixedState>,
}

impl MixedPassResult {
    pub fn total(&self) -> f64 {
        self.p_scatter + self.p_detect_upper + self.p_detect_lower + self.p_recycle
    }
}

fn conditioned(components: &[MixedComponent], port: Port) -> Result<Option<MixedState>> {
    let terms: Vec<(f64, PureState)> = components
        .iter()
        .filter_map(|c| {
            c.pass.post_detect(port).map(|s| {
                (
                    c.weight * c.pass.p_detect(port),
                    s.to_pure(PhotonMode::Vacuum),
                )
            })
        })
        .filter(|(w, _)| *w >= PRUNE_EPS * PRUNE_EPS)
        .collect();
    if terms.is_empty() {
        return Ok(None);
    }
    MixedState::from_unnormalized(terms).map(Some)
}

/// Propagates each ensemble member separately and pools the outcomes.
pub fn run_ensemble(
    ensemble: &[(f64, IonPairState)],
    pol: Polarization,
    entry: Entry,
    setup: Setup,
) -> Result<MixedPassResult> {
    let total: f64 = ensemble.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > NORM_TOL || ensemble.iter().any(|(w, _)| *w <= 0.0) {
        return Err(Error::BadWeights(format!("sum to {total}, not 1")));
    }
    let components = ensemble
        .iter()
        .map(|(w, ions)| {
            Ok(MixedComponent {
                weight: *w,
                ions: *ions,
                pass: pass_with_setup(ions, pol, entry, setup)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = |f: fn(&PassResult) -> f64| components.iter().map(|c| c.weight * f(&c.pass)).sum();
    Ok(MixedPassResult {
        p_scatter: pooled(PassResult::p_scatter),
        p_detect_upper: pooled(|p| p.p_detect_upper),
        p_detect_lower: pooled(|p| p.p_detect_lower),
        p_recycle: pooled(|p| p.p_recycle),
        post_detect_upper: conditioned(&components, Port::Upper)?,
        post_detect_lower: conditioned(&components, Port::Lower)?,
        components,
    })
}

/// Single pass of the open interferometer on `rho_ul(fidelity)`.
pub fn run_mixed(fidelity: f64) -> Result<MixedPassResult> {
    run_ensemble(
        &rho_ul(fidelity)?,
        Polarization::SigmaPlus,
        Entry::M1_SIDE,
        Setup::Open,
    )
}

/// `|<target|s>|^2` helper for pure ion states.
pub fn overlap_sqr(target: &IonPairState, s: &IonPairState) -> f64 {
    inner_product(
        &target.to_pure(PhotonMode::Vacuum),
        &s.to_pure(PhotonMode::Vacuum),
    )
    .norm_sqr()
}
