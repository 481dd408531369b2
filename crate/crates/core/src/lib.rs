//! Noise budget of a two-stage dc SQUID amplifier chain reading out a
//! high-Q series RLC resonator, with the on-resonance, complex-source and
//! scan-sensitivity matching optimizations.
//!
//! All internal computation is in SI base units. Power spectral densities are
//! two-sided throughout. Engineering units only appear at the config and
//! report boundaries (see [`units`] and [`sweep`]).

pub mod error;
pub mod first_stage;
pub mod matching;
pub mod quantities;
pub mod resonator;
pub mod second_stage;
pub mod sweep;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
pub use first_stage::{FirstStageNoise, FirstStageSquid, InputCoupling};
pub use matching::NoiseBudget;
pub use quantities::{AngularFrequency, ComplexImpedance};
pub use resonator::Resonator;
pub use second_stage::{ChainConfig, PreampModel, SecondStageDesign};
