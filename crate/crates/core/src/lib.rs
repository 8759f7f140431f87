//! Heralded entanglement of two trapped ions with a single photon in a
//! Mach-Zehnder interferometer.
//!
//! * [`qcore`]: joint photon/ion states, overlaps and fidelities.
//! * [`elements`]: beam splitters, ion scattering, mirrors and detectors.
//! * [`protocol`]: one pass for product, Bell and mixed ion inputs.
//! * [`recycler`]: repeated passes inside the enclosure cavity.
//! * [`efficiency`]: cavity emission probability and pair throughput.
//! * [`cli`]: configuration and report generation behind the `ionmzi` binary.

pub mod cli;
pub mod efficiency;
pub mod elements;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod recycler;

pub use error::{Error, Result};
pub use protocol::{IonPairState, PassResult};
pub use qcore::{MixedState, PureState};
pub use recycler::{IterationResult, RecycleConfig};
