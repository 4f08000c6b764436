//! Resource co-design simulator for optimistic quantum Fourier transforms on
//! a surface-code, neutral-atom architecture with mobile hot zones.
//!
//! Modules, bottom-up:
//! - [`params`]: physical parameters and the atom-transport timing model.
//! - [`census`]: rotation spectra, T counts and the five-layer block plan.
//! - [`oracle`]: dense statevector checks of the underlying identities.
//! - [`hl`]: high-level adder volume model with abstract factories.
//! - [`microsim`]: tick-level ripple-carry adder simulator.
//! - [`macro_eval`]: integrated OQFT and serial QFT evaluation.
//! - [`io`]: configuration files, CSV and trace output, run manifests.

pub mod census;
pub mod error;
pub mod hl;
pub mod io;
pub mod macro_eval;
pub mod microsim;
pub mod oracle;
pub mod params;

pub use error::{Error, Result};
pub use params::{DistanceMetric, PatchGeometry, SystemParams, ValidationReport};
