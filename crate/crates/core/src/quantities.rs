//! Physical constants, frequency and impedance types, and the PSD convention.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{positive, Result};

/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

/// Strictly positive angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(omega: f64) -> Result<Self> {
        positive("omega", omega).map(Self)
    }

    pub fn from_hz(f: f64) -> Result<Self> {
        positive("frequency", f).map(|f| Self(TAU * f))
    }

    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / TAU
    }

    /// Returns `a * omega`; `a` must be positive.
    pub fn scaled(self, a: f64) -> Result<Self> {
        Self::new(a * self.0)
    }
}

/// Complex impedance R + iX in ohms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexImpedance {
    pub re: f64,
    pub im: f64,
}

impl ComplexImpedance {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl From<Complex64> for ComplexImpedance {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexImpedance> for Complex64 {
    fn from(z: ComplexImpedance) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl fmt::Display for ComplexImpedance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im < 0.0 { '-' } else { '+' };
        write!(f, "{:.6e} {} {:.6e}i Ohm", self.re, sign, self.im.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdKind {
    /// A^2/Hz
    Current,
    /// V^2/Hz
    Voltage,
    /// Wb^2/Hz
    Flux,
    /// A V/Hz, may be negative
    CrossIv,
}

impl PsdKind {
    pub fn unit(self) -> &'static str {
        match self {
            PsdKind::Current => "A^2/Hz",
            PsdKind::Voltage => "V^2/Hz",
            PsdKind::Flux => "Wb^2/Hz",
            PsdKind::CrossIv => "A V/Hz",
        }
    }
}

/// Two-sided power spectral density tagged with its physical kind.
///
/// The library computes with bare `f64` power PSDs; this type exists at the
/// I/O boundary where values are labelled and converted to amplitude
/// spectral densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psd {
    value: f64,
    kind: PsdKind,
}

impl Psd {
    pub fn new(value: f64, kind: PsdKind) -> Result<Self> {
        match kind {
            PsdKind::CrossIv if value.is_finite() => Ok(Self { value, kind }),
            _ => crate::error::non_negative("psd", value).map(|value| Self { value, kind }),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> PsdKind {
        self.kind
    }

    /// Amplitude spectral density sqrt(|PSD|), carrying the sign for cross PSDs.
    pub fn amplitude(&self) -> f64 {
        self.value.signum() * self.value.abs().sqrt()
    }

    /// Flux amplitude in micro flux quanta per root hertz.
    pub fn micro_phi0_per_rt_hz(&self) -> Option<f64> {
        (self.kind == PsdKind::Flux).then(|| self.amplitude() / FLUX_QUANTUM * 1e6)
    }
}

impl fmt::Display for Psd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e} {}", self.value, self.kind.unit())
    }
}

/// Standard-quantum-limit added noise k_B T = hbar omega / 2, returned in
/// energy units (J). Divide by [`BOLTZMANN`] for kelvin.
pub fn quantum_limit_temperature(omega: AngularFrequency) -> f64 {
    0.5 * HBAR * omega.rad_per_s()
}
