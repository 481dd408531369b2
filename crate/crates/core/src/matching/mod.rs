//! Noise temperatures, SQL-relative figures of merit, and the three matching
//! optimizations: on-resonance real source, optimal complex source, and
//! scan sensitivity.
//!
//! Every function works on a [`NoiseBudget`] with the total-noise form
//!
//! ```text
//! S_tot(Z) = S_VV + |Z|^2 S_II - 2 Im(Z) Im(S_IV) + 2 Re(Z) Re(S_IV)
//! T_n(Z)   = S_tot(Z) / (4 k_B Re Z)
//! ```
//!
//! With Im(S_IV) > 0 the optimal source reactance is inductive. The sign is a
//! convention: only (Im S_IV)^2 is fixed by the SQUID model.

mod oracle;

pub use oracle::{brute_force_min_noise, OracleMinimum, SearchRange};

use crate::error::{positive, Error, Result};
use crate::first_stage::{input_referred_noise, FirstStageSquid, InputCoupling};
use crate::quantities::{AngularFrequency, ComplexImpedance, BOLTZMANN, HBAR};
use crate::resonator::{thermal_occupation, Resonator};
use crate::second_stage::{full_system_imprecision, ChainConfig};

/// Input-referred noise of an amplifier at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub omega: AngularFrequency,
    /// Imprecision current PSD including follow-on noise (A^2/Hz).
    pub s_ii_sys: f64,
    /// Backaction voltage PSD (V^2/Hz).
    pub s_vv: f64,
    pub im_s_iv: f64,
    /// Zero for TC-limited SQUIDs; kept so the general form stays testable.
    pub re_s_iv: f64,
}

impl NoiseBudget {
    pub fn new(
        omega: AngularFrequency,
        s_ii_sys: f64,
        s_vv: f64,
        im_s_iv: f64,
        re_s_iv: f64,
    ) -> Result<Self> {
        for (name, v) in [("Im S_IV", im_s_iv), ("Re S_IV", re_s_iv)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        Ok(Self {
            omega,
            s_ii_sys: positive("S_II_sys", s_ii_sys)?,
            s_vv: positive("S_VV", s_vv)?,
            im_s_iv,
            re_s_iv,
        })
    }

    /// First stage alone, no follow-on noise.
    pub fn from_first_stage(
        squid: &FirstStageSquid,
        coupling: &InputCoupling,
        omega: AngularFrequency,
    ) -> Self {
        let n = input_referred_noise(squid, coupling, omega);
        Self {
            omega,
            s_ii_sys: n.s_ii,
            s_vv: n.s_vv,
            im_s_iv: n.im_s_iv,
            re_s_iv: 0.0,
        }
    }

    /// Full chain: TC backaction and correlation, imprecision raised by the
    /// referred follow-on noise.
    pub fn from_chain(chain: &ChainConfig, omega: AngularFrequency) -> Result<Self> {
        let n = input_referred_noise(&chain.first_stage, &chain.coupling, omega);
        Ok(Self {
            omega,
            s_ii_sys: full_system_imprecision(chain, omega)?,
            s_vv: n.s_vv,
            im_s_iv: n.im_s_iv,
            re_s_iv: 0.0,
        })
    }

    /// S_VV S_II - (Im S_IV)^2, checked non-negative.
    fn radicand(&self) -> Result<f64> {
        let r = self.s_vv * self.s_ii_sys - self.im_s_iv * self.im_s_iv;
        if r < 0.0 {
            Err(Error::InconsistentBudget { radicand: r })
        } else {
            Ok(r)
        }
    }
}

/// Noise temperature (K) for an arbitrary source impedance with Re Z > 0.
pub fn noise_temperature(budget: &NoiseBudget, z: ComplexImpedance) -> Result<f64> {
    let r = positive("Re Z", z.re)?;
    if !z.im.is_finite() {
        return Err(Error::InvalidParameter {
            name: "Im Z",
            value: z.im,
            reason: "must be finite",
        });
    }
    Ok(total_noise(budget, r, z.im) / (4.0 * BOLTZMANN * r))
}

pub(crate) fn total_noise(b: &NoiseBudget, r: f64, x: f64) -> f64 {
    b.s_vv + (r * r + x * x) * b.s_ii_sys - 2.0 * x * b.im_s_iv + 2.0 * r * b.re_s_iv
}

/// Noise temperature (K) for a purely resistive source, ignoring correlation.
pub fn noise_temperature_real_source(budget: &NoiseBudget, r: f64) -> Result<f64> {
    let r = positive("R", r)?;
    Ok((budget.s_vv + r * r * budget.s_ii_sys) / (4.0 * BOLTZMANN * r))
}

/// Real source resistance minimizing [`noise_temperature_real_source`].
pub fn optimal_real_source(budget: &NoiseBudget) -> f64 {
    (budget.s_vv / budget.s_ii_sys).sqrt()
}

/// Minimum noise temperature (K) over real sources: sqrt(S_VV S_II) / 2 k_B.
pub fn t_min_on_resonance(budget: &NoiseBudget) -> f64 {
    0.5 * (budget.s_vv * budget.s_ii_sys).sqrt() / BOLTZMANN
}

/// Minimum noise temperature (K) over all complex sources.
pub fn t_min_complex(budget: &NoiseBudget) -> Result<f64> {
    Ok((0.5 * budget.radicand()?.sqrt() + 0.5 * budget.re_s_iv) / BOLTZMANN)
}

/// Source impedance achieving [`t_min_complex`].
pub fn optimal_complex_source(budget: &NoiseBudget) -> Result<ComplexImpedance> {
    let radicand = budget.radicand()?;
    Ok(ComplexImpedance::new(
        radicand.sqrt() / budget.s_ii_sys,
        budget.im_s_iv / budget.s_ii_sys,
    ))
}

/// Complex-source minimum noise energy in units of the SQL hbar omega / 2,
/// without the Re S_IV offset.
pub fn eta(budget: &NoiseBudget) -> Result<f64> {
    Ok(budget.radicand()?.sqrt() / (HBAR * budget.omega.rad_per_s()))
}

/// On-resonance minimum noise temperature of a TC-limited SQUID over the
/// SQL: 4 sqrt(11) k_B T_j L_sq / (hbar R_j). Frequency independent.
pub fn on_res_sql_ratio(squid: &FirstStageSquid) -> f64 {
    4.0 * 11f64.sqrt() * squid.noise_energy_scale() / HBAR
}

/// Uncoupled imprecision energy kappa^2 L_in S_II_sys / 2 (J/Hz).
pub fn epsilon_uc_system(chain: &ChainConfig, omega: AngularFrequency) -> Result<f64> {
    Ok(0.5 * chain.coupling.kappa_sq_lin() * full_system_imprecision(chain, omega)?)
}

/// Budget split into its coupling-invariant parts,
/// S_VV = a kappa^2 L_in and S_II_sys = b / (kappa^2 L_in).
struct InvariantBudget {
    a: f64,
    b: f64,
    budget: NoiseBudget,
}

fn invariant_budget(chain: &ChainConfig, omega: AngularFrequency) -> Result<InvariantBudget> {
    let budget = NoiseBudget::from_chain(chain, omega)?;
    let k2l = chain.coupling.kappa_sq_lin();
    Ok(InvariantBudget {
        a: budget.s_vv / k2l,
        b: budget.s_ii_sys * k2l,
        budget,
    })
}

fn check_kappa_g(kappa_g_sq: f64) -> Result<f64> {
    let kappa_g = kappa_g_sq.sqrt();
    if kappa_g > 1.0 {
        Err(Error::CouplingUnreachable { kappa_g })
    } else {
        Ok(kappa_g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnResonanceMatch {
    /// Global coupling efficiency kappa_g = sqrt(kappa^2 L_in / L_tot).
    pub kappa_g: f64,
    /// Matched noise temperature (K).
    pub t_min: f64,
}

/// Coupling that makes the resonator's loss resistance equal the optimal
/// real source resistance at resonance. Closed form because S_VV scales as
/// kappa^2 L_in and S_II_sys as its inverse.
pub fn match_on_resonance(chain: &ChainConfig, resonator: &Resonator) -> Result<OnResonanceMatch> {
    let res = resonator.resonance();
    if res.q < 1.0 {
        return Err(Error::InvalidParameter {
            name: "Q",
            value: res.q,
            reason: "on-resonance match needs Q >= 1",
        });
    }
    let inv = invariant_budget(chain, res.omega0)?;
    let kappa_sq_lin = resonator.resistance() * (inv.b / inv.a).sqrt();
    let kappa_g = check_kappa_g(kappa_sq_lin / resonator.total_inductance())?;
    Ok(OnResonanceMatch {
        kappa_g,
        t_min: t_min_on_resonance(&inv.budget),
    })
}

/// Imprecision maximizing scan sensitivity for source resistance `r` and
/// resonator occupation `n` (A^2/Hz).
pub fn scan_optimal_imprecision(omega: AngularFrequency, r: f64, eta: f64, n: f64) -> Result<f64> {
    let r = positive("R", r)?;
    let eta = positive("eta", eta)?;
    let n = crate::error::non_negative("n", n)?;
    Ok(HBAR * omega.rad_per_s() / r * 2.0 * eta * eta / scan_denominator(eta, n))
}

fn scan_denominator(eta: f64, n: f64) -> f64 {
    let m = 2.0 * n + 1.0;
    m + (m * m + 8.0 * eta * eta).sqrt()
}

/// Global coupling kappa_g that sets the chain's imprecision at `omega` to
/// [`scan_optimal_imprecision`] for the resonator's loss resistance and
/// thermal occupation.
///
/// Uses R / (omega L_tot), which is 1/Q at resonance, so that substituting
/// the result back reproduces the target exactly at any `omega`.
pub fn match_scan_sensitivity(
    chain: &ChainConfig,
    resonator: &Resonator,
    omega: AngularFrequency,
) -> Result<f64> {
    let budget = NoiseBudget::from_chain(chain, omega)?;
    let n = thermal_occupation(omega, resonator.temperature())?;
    let eta = eta(&budget)?;
    let eps = epsilon_uc_system(chain, omega)?;
    let inv_q = resonator.resistance() / (omega.rad_per_s() * resonator.total_inductance());
    check_kappa_g(inv_q * (eps / HBAR) * scan_denominator(eta, n) / (eta * eta))
}

/// Series resonator whose impedance at `omega` equals the optimal complex
/// source for the chain: R = Re Z_opt, C from omega L_tot - 1/(omega C) = Im Z_opt.
pub fn detuned_resonator_for_optimum(
    chain: &ChainConfig,
    omega: AngularFrequency,
    ltot: f64,
    tres: f64,
) -> Result<Resonator> {
    let ltot = positive("Ltot", ltot)?;
    let z = optimal_complex_source(&NoiseBudget::from_chain(chain, omega)?)?;
    let w = omega.rad_per_s();
    let reactance = w * ltot;
    if reactance <= z.im {
        return Err(Error::NoPositiveCapacitance {
            reactance,
            x_opt: z.im,
        });
    }
    Resonator::new(ltot, 1.0 / (w * (reactance - z.im)), z.re, tres)
}

/// All per-frequency figures of merit for one chain and resonator quality.
#[derive(Debug, Clone, PartialEq)]
pub struct FiguresOfMerit {
    pub t_min_on_res: f64,
    pub t_min_complex: f64,
    pub eta: f64,
    /// J/Hz
    pub epsilon_uc: f64,
    pub kappa_g_on_res: Result<f64>,
    pub kappa_g_scan: Result<f64>,
}

/// Evaluates every figure of merit at `omega`, matching to a resonator tuned
/// to `omega` with quality `q` at temperature `tres`. The coupling results
/// do not depend on the resonator's inductance.
pub fn figures_of_merit(
    chain: &ChainConfig,
    omega: AngularFrequency,
    q: f64,
    tres: f64,
) -> Result<FiguresOfMerit> {
    let budget = NoiseBudget::from_chain(chain, omega)?;
    let resonator = Resonator::from_target(omega.hz(), q, REFERENCE_INDUCTANCE, tres)?;
    Ok(FiguresOfMerit {
        t_min_on_res: t_min_on_resonance(&budget),
        t_min_complex: t_min_complex(&budget)?,
        eta: eta(&budget)?,
        epsilon_uc: epsilon_uc_system(chain, omega)?,
        kappa_g_on_res: match_on_resonance(chain, &resonator).map(|m| m.kappa_g),
        kappa_g_scan: match_scan_sensitivity(chain, &resonator, resonator.resonance().omega0),
    })
}

const REFERENCE_INDUCTANCE: f64 = 1e-6;
