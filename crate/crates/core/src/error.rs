use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("frequency {freq_hz:.6e} Hz is outside every configured preamp band")]
    OutOfBand { freq_hz: f64 },

    #[error("preamp bands overlap: [{a_lo:.6e}, {a_hi:.6e}] Hz and [{b_lo:.6e}, {b_hi:.6e}] Hz")]
    OverlappingBands {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error(
        "required global coupling kappa_g = {kappa_g:.6} exceeds 1; resonator cannot be matched"
    )]
    CouplingUnreachable { kappa_g: f64 },

    #[error("inconsistent noise budget: S_VV*S_II - (Im S_IV)^2 = {radicand:.6e} < 0")]
    InconsistentBudget { radicand: f64 },

    #[error(
        "no positive capacitance realizes the optimum: omega*Ltot = {reactance:.6e} Ohm <= Im(Z_opt) = {x_opt:.6e} Ohm"
    )]
    NoPositiveCapacitance { reactance: f64, x_opt: f64 },

    #[error("brute-force minimum lies on the {axis} range boundary; widen the search range")]
    OracleBoundary { axis: &'static str },
}

/// Shorthand for rejecting anything that is not finite and strictly positive.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

/// Non-fatal notice that an input sits outside the regime the model was
/// derived for. Computation proceeds; callers decide whether to surface it.
#[derive(Debug, Clone, PartialEq)]
pub enum Advisory {
    BetaLOutsideOptimum(f64),
    BetaCOutsideOptimum(f64),
    GammaTooLarge(f64),
    SecondStageBelowOneKelvin(f64),
    CryoRfMismatch { dynamic_resistance: f64 },
}

impl std::fmt::Display for Advisory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Advisory::BetaLOutsideOptimum(b) => {
                write!(f, "beta_L = {b:.3} is outside [0.5, 2]")
            }
            Advisory::BetaCOutsideOptimum(b) => {
                write!(f, "beta_C = {b:.3} is outside [0.5, 2]")
            }
            Advisory::GammaTooLarge(g) => write!(f, "Gamma = {g:.4} exceeds 0.025"),
            Advisory::SecondStageBelowOneKelvin(t) => write!(
                f,
                "second-stage temperature {t} K is below 1 K; shunt self-heating may stop the noise from scaling"
            ),
            Advisory::CryoRfMismatch { dynamic_resistance } => write!(
                f,
                "second-stage dynamic resistance {dynamic_resistance:.1} Ohm is not within 20% of the 50 Ohm RF amplifier"
            ),
        }
    }
}
