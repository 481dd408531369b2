//! Second-stage series-array SQUID, preamplifiers, and referral of all
//! follow-on noise to an imprecision current at the first-stage input.
//!
//! Array designs are scaled from a measured 20x1 prototype at 4 K:
//!
//! | quantity      | scaling                         |
//! |---------------|---------------------------------|
//! | power         | N_ser N_par                     |
//! | dPhi/dI       | 1 / N_par                       |
//! | dV/dI         | N_ser / N_par                   |
//! | dV/dPhi       | N_ser                           |
//! | flux noise^2  | T_2 / (N_ser N_par)             |

use crate::error::{non_negative, positive, Advisory, Error, Result};
use crate::first_stage::{
    input_referred_noise, transfer_functions, FirstStageSquid, InputCoupling,
};
use crate::quantities::{AngularFrequency, BOLTZMANN, FLUX_QUANTUM};

/// Series count of the measured prototype.
pub const PROTOTYPE_SERIES: u32 = 20;
/// Parallel count of the measured prototype.
pub const PROTOTYPE_PARALLEL: u32 = 1;
/// Bath temperature of the prototype measurement (K).
pub const PROTOTYPE_TEMPERATURE: f64 = 4.0;

/// Characteristic impedance the arrays and RF amplifier are matched to.
pub const MATCHED_IMPEDANCE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackSlope {
    Negative,
    Positive,
}

/// Measured 20x1 prototype at 4 K, one bias slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrototypeRecord {
    pub ic_min: f64,
    pub ic_max: f64,
    /// Feedback-coil mutual inductance per SQUID (H).
    pub feedback_mutual: f64,
    /// Input-coil mutual inductance per SQUID (H).
    pub input_mutual: f64,
    /// Total dissipated power (W).
    pub power: f64,
    /// dPhi/dI at fixed V (H).
    pub flux_per_current: f64,
    /// dV/dI at fixed flux (Ohm).
    pub dynamic_resistance: f64,
    /// dV/dPhi at fixed I (V/Wb).
    pub flux_to_voltage: f64,
    /// SQUID-only flux noise with preamp noise removed (Wb/rtHz).
    pub flux_noise: f64,
    pub slope: FeedbackSlope,
}

impl PrototypeRecord {
    /// Positive-feedback (steep) slope column; the one every design uses.
    pub fn positive_slope() -> Self {
        Self {
            ic_min: 3.055e-6,
            ic_max: 9.485e-6,
            feedback_mutual: 44e-12,
            input_mutual: 105e-12,
            power: 0.834e-9,
            flux_per_current: 95.5e-12,
            dynamic_resistance: 64.9,
            flux_to_voltage: 6.80e11,
            flux_noise: 0.297e-6 * FLUX_QUANTUM,
            slope: FeedbackSlope::Positive,
        }
    }

    /// Negative-feedback (shallow) slope column. Stored for reference.
    pub fn negative_slope() -> Self {
        Self {
            flux_per_current: 231e-12,
            dynamic_resistance: 154.0,
            flux_to_voltage: 6.66e11,
            flux_noise: 0.247e-6 * FLUX_QUANTUM,
            slope: FeedbackSlope::Negative,
            ..Self::positive_slope()
        }
    }

    fn validate(&self) -> Result<()> {
        positive("M_IN2", self.input_mutual)?;
        positive("M_FB2", self.feedback_mutual)?;
        positive("P", self.power)?;
        positive("dPhi_dI", self.flux_per_current)?;
        positive("dV_dI", self.dynamic_resistance)?;
        positive("dV_dPhi", self.flux_to_voltage)?;
        positive("Phi_n_squid", self.flux_noise)?;
        Ok(())
    }
}

impl Default for PrototypeRecord {
    fn default() -> Self {
        Self::positive_slope()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondStageDesign {
    n_ser: u32,
    n_par: u32,
    temperature: f64,
    /// Input inductance of one array SQUID (H).
    squid_input_inductance: f64,
    /// Wirebond and interconnect inductance to the first stage (H).
    interconnect_inductance: f64,
    prototype: PrototypeRecord,
}

impl SecondStageDesign {
    pub const DEFAULT_SQUID_INPUT_INDUCTANCE: f64 = 120e-12;
    pub const DEFAULT_INTERCONNECT_INDUCTANCE: f64 = 2e-9;

    pub fn new(n_ser: u32, n_par: u32, temperature: f64) -> Result<Self> {
        Self::with_parts(
            n_ser,
            n_par,
            temperature,
            Self::DEFAULT_SQUID_INPUT_INDUCTANCE,
            Self::DEFAULT_INTERCONNECT_INDUCTANCE,
            PrototypeRecord::default(),
        )
    }

    pub fn with_parts(
        n_ser: u32,
        n_par: u32,
        temperature: f64,
        squid_input_inductance: f64,
        interconnect_inductance: f64,
        prototype: PrototypeRecord,
    ) -> Result<Self> {
        for (name, n) in [("N_ser", n_ser), ("N_par", n_par)] {
            if n == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "array dimension must be >= 1",
                });
            }
        }
        prototype.validate()?;
        Ok(Self {
            n_ser,
            n_par,
            temperature: positive("T2", temperature)?,
            squid_input_inductance: positive("L_SQ2", squid_input_inductance)?,
            interconnect_inductance: non_negative("L_int", interconnect_inductance)?,
            prototype,
        })
    }

    /// 16x1, high bandwidth.
    pub fn high_bandwidth(temperature: f64) -> Result<Self> {
        Self::new(16, 1, temperature)
    }

    /// 32x2, medium bandwidth.
    pub fn medium_bandwidth(temperature: f64) -> Result<Self> {
        Self::new(32, 2, temperature)
    }

    /// 48x3, low bandwidth.
    pub fn low_bandwidth(temperature: f64) -> Result<Self> {
        Self::new(48, 3, temperature)
    }

    pub fn n_ser(&self) -> u32 {
        self.n_ser
    }

    pub fn n_par(&self) -> u32 {
        self.n_par
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn squid_input_inductance(&self) -> f64 {
        self.squid_input_inductance
    }

    pub fn interconnect_inductance(&self) -> f64 {
        self.interconnect_inductance
    }

    pub fn prototype(&self) -> &PrototypeRecord {
        &self.prototype
    }

    fn count(&self) -> f64 {
        f64::from(self.n_ser) * f64::from(self.n_par)
    }

    fn series_ratio(&self) -> f64 {
        f64::from(self.n_ser) / f64::from(PROTOTYPE_SERIES)
    }

    fn parallel_ratio(&self) -> f64 {
        f64::from(self.n_par) / f64::from(PROTOTYPE_PARALLEL)
    }

    fn count_ratio(&self) -> f64 {
        self.count() / f64::from(PROTOTYPE_SERIES * PROTOTYPE_PARALLEL)
    }
}

/// Prototype parameters scaled to a design.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledArray {
    pub power: f64,
    pub flux_per_current: f64,
    pub dynamic_resistance: f64,
    pub flux_to_voltage: f64,
    /// SQUID-only flux noise at the design temperature (Wb/rtHz).
    pub flux_noise: f64,
    pub advisories: Vec<Advisory>,
}

pub fn scale_array(design: &SecondStageDesign) -> ScaledArray {
    let p = &design.prototype;
    let noise_sq =
        p.flux_noise.powi(2) / design.count_ratio() * design.temperature / PROTOTYPE_TEMPERATURE;
    let mut advisories = Vec::new();
    if design.temperature < 1.0 {
        advisories.push(Advisory::SecondStageBelowOneKelvin(design.temperature));
    }
    ScaledArray {
        power: p.power * design.count_ratio(),
        flux_per_current: p.flux_per_current / design.parallel_ratio(),
        dynamic_resistance: p.dynamic_resistance * design.series_ratio() / design.parallel_ratio(),
        flux_to_voltage: p.flux_to_voltage * design.series_ratio(),
        flux_noise: noise_sq.sqrt(),
        advisories,
    }
}

/// L_2 = N_ser N_par L_SQ2 + 2 N_par L_SQ2 + L_int. The second term counts
/// one unconnected dummy SQUID at each end of every parallel bank.
pub fn input_inductance(design: &SecondStageDesign) -> f64 {
    let dummies = 2.0 * f64::from(design.n_par);
    (design.count() + dummies) * design.squid_input_inductance + design.interconnect_inductance
}

/// Single-pole time constant L_2 / R_dyn1 of the first-to-second stage link.
pub fn coupling_time_constant(design: &SecondStageDesign, rdyn1: f64) -> Result<f64> {
    Ok(input_inductance(design) / positive("Rdyn1", rdyn1)?)
}

/// Room-temperature op-amp-mode SQUID preamplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpAmpPreamp {
    /// Input voltage noise (V/rtHz).
    pub voltage_noise: f64,
    /// Input current noise (A/rtHz).
    pub current_noise: f64,
    /// Effective lead resistance, frequency independent (Ohm).
    pub lead_resistance: f64,
    /// Effective lead temperature (K).
    pub lead_temperature: f64,
    pub f_max: f64,
}

/// Cryogenic 50 Ohm scattering-mode amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CryoRfPreamp {
    pub noise_temperature: f64,
    pub f_min: f64,
    pub f_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreampModel {
    OpAmp(OpAmpPreamp),
    CryoRf(CryoRfPreamp),
}

/// Lead assumption for the room-temperature preamps: copper coax from 4 K
/// with 1 Ohm effective resistance at 200 K.
pub const ROOM_TEMPERATURE_LEAD_RESISTANCE: f64 = 1.0;
pub const ROOM_TEMPERATURE_LEAD_TEMPERATURE: f64 = 200.0;

impl PreampModel {
    pub fn op_amp(
        voltage_noise: f64,
        current_noise: f64,
        lead_resistance: f64,
        lead_temperature: f64,
        f_max: f64,
    ) -> Result<Self> {
        Ok(PreampModel::OpAmp(OpAmpPreamp {
            voltage_noise: non_negative("Vn", voltage_noise)?,
            current_noise: non_negative("In", current_noise)?,
            lead_resistance: non_negative("Rlead", lead_resistance)?,
            lead_temperature: non_negative("Tlead", lead_temperature)?,
            f_max: positive("f_max", f_max)?,
        }))
    }

    pub fn cryo_rf(noise_temperature: f64, f_min: f64, f_max: f64) -> Result<Self> {
        let f_min = non_negative("f_min", f_min)?;
        let f_max = positive("f_max", f_max)?;
        if f_min >= f_max {
            return Err(Error::InvalidParameter {
                name: "f_min",
                value: f_min,
                reason: "must be below f_max",
            });
        }
        Ok(PreampModel::CryoRf(CryoRfPreamp {
            noise_temperature: non_negative("Tn", noise_temperature)?,
            f_min,
            f_max,
        }))
    }

    /// Magnicon XXF-1 class: 0.33 nV/rtHz, 2.6 pA/rtHz, 50 MHz, with the
    /// room-temperature lead assumption.
    pub fn magnicon() -> Self {
        Self::op_amp(
            0.33e-9,
            2.6e-12,
            ROOM_TEMPERATURE_LEAD_RESISTANCE,
            ROOM_TEMPERATURE_LEAD_TEMPERATURE,
            50e6,
        )
        .expect("preset is valid")
    }

    /// The unit used for the prototype measurement: 0.32 nV/rtHz,
    /// 2.7 pA/rtHz, negligible lead resistance.
    pub fn magnicon_as_measured() -> Self {
        Self::op_amp(0.32e-9, 2.7e-12, 0.0, 0.0, 50e6).expect("preset is valid")
    }

    /// High-speed discrete-bipolar room-temperature preamp: 0.3 nV/rtHz,
    /// 6 pA/rtHz, 300 MHz.
    pub fn high_speed_rt() -> Self {
        Self::op_amp(
            0.3e-9,
            6e-12,
            ROOM_TEMPERATURE_LEAD_RESISTANCE,
            ROOM_TEMPERATURE_LEAD_TEMPERATURE,
            300e6,
        )
        .expect("preset is valid")
    }

    /// Cryogenic RF amplifier, T_n = 2 K over 5-500 MHz.
    pub fn cryo_rf_2k() -> Self {
        Self::cryo_rf(2.0, 5e6, 500e6).expect("preset is valid")
    }

    /// Frequency range (Hz) the amplifier is specified over.
    pub fn operating_range(&self) -> (f64, f64) {
        match self {
            PreampModel::OpAmp(p) => (0.0, p.f_max),
            PreampModel::CryoRf(p) => (p.f_min, p.f_max),
        }
    }
}

/// Voltage, lead Johnson and current noise of an op-amp-mode preamp referred
/// to second-stage input flux (Wb^2/Hz).
pub fn opamp_referred_flux_noise(design: &SecondStageDesign, preamp: &OpAmpPreamp) -> f64 {
    let p = &design.prototype;
    let lead_johnson = 4.0 * BOLTZMANN * preamp.lead_temperature * preamp.lead_resistance;
    let voltage_term = (preamp.voltage_noise.powi(2) + lead_johnson)
        / p.flux_to_voltage.powi(2)
        / design.series_ratio().powi(2);
    let current_term =
        (preamp.current_noise * p.flux_per_current / design.parallel_ratio()).powi(2);
    voltage_term + current_term
}

/// Noise temperature of a matched cryogenic RF amplifier referred to
/// second-stage input flux (Wb^2/Hz). Taken as a positive magnitude.
pub fn cryo_rf_referred_flux_noise(design: &SecondStageDesign, preamp: &CryoRfPreamp) -> f64 {
    let p = &design.prototype;
    (4.0 * BOLTZMANN * preamp.noise_temperature / design.count_ratio() * p.flux_per_current
        / p.flux_to_voltage)
        .abs()
}

/// The RF referral assumes the array output is matched to 50 Ohm.
pub fn cryo_rf_match_advisory(design: &SecondStageDesign) -> Option<Advisory> {
    let r = scale_array(design).dynamic_resistance;
    ((r / MATCHED_IMPEDANCE - 1.0).abs() > 0.2).then_some(Advisory::CryoRfMismatch {
        dynamic_resistance: r,
    })
}

/// Preamp contribution to the second-stage flux noise (Wb^2/Hz).
pub fn preamp_referred_flux_noise(design: &SecondStageDesign, preamp: &PreampModel) -> f64 {
    match preamp {
        PreampModel::OpAmp(p) => opamp_referred_flux_noise(design, p),
        PreampModel::CryoRf(p) => cryo_rf_referred_flux_noise(design, p),
    }
}

/// SQUID and preamp flux noise added in quadrature (Wb^2/Hz). Lead
/// resistance is frequency independent, so this is white.
pub fn total_second_stage_flux_noise(design: &SecondStageDesign, preamp: &PreampModel) -> f64 {
    scale_array(design).flux_noise.powi(2) + preamp_referred_flux_noise(design, preamp)
}

/// A preamp assigned to the closed interval [f_lo, f_hi] (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreampBand {
    pub f_lo: f64,
    pub f_hi: f64,
    pub model: PreampModel,
}

impl PreampBand {
    pub fn new(f_lo: f64, f_hi: f64, model: PreampModel) -> Result<Self> {
        let f_lo = non_negative("band f_lo", f_lo)?;
        let f_hi = positive("band f_hi", f_hi)?;
        if f_lo >= f_hi {
            return Err(Error::InvalidParameter {
                name: "band f_lo",
                value: f_lo,
                reason: "must be below the band's upper edge",
            });
        }
        let (lo, hi) = model.operating_range();
        if f_lo < lo || f_hi > hi {
            return Err(Error::InvalidParameter {
                name: "band",
                value: if f_lo < lo { f_lo } else { f_hi },
                reason: "band extends beyond the preamp's operating range",
            });
        }
        Ok(Self { f_lo, f_hi, model })
    }

    /// Band equal to the model's full operating range.
    pub fn full_range(model: PreampModel) -> Self {
        let (f_lo, f_hi) = model.operating_range();
        Self { f_lo, f_hi, model }
    }

    pub fn contains(&self, f: f64) -> bool {
        (self.f_lo..=self.f_hi).contains(&f)
    }
}

/// Second-stage array plus the preamps reading it out.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowOnStage {
    pub design: SecondStageDesign,
    bands: Vec<PreampBand>,
}

impl FollowOnStage {
    /// Bands are sorted by lower edge; they may touch but not overlap. At a
    /// shared edge the lower band wins.
    pub fn new(design: SecondStageDesign, mut bands: Vec<PreampBand>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidParameter {
                name: "preamp_bands",
                value: 0.0,
                reason: "at least one preamp band is required",
            });
        }
        bands.sort_by(|a, b| a.f_lo.total_cmp(&b.f_lo));
        for pair in bands.windows(2) {
            if pair[1].f_lo < pair[0].f_hi {
                return Err(Error::OverlappingBands {
                    a_lo: pair[0].f_lo,
                    a_hi: pair[0].f_hi,
                    b_lo: pair[1].f_lo,
                    b_hi: pair[1].f_hi,
                });
            }
        }
        Ok(Self { design, bands })
    }

    pub fn bands(&self) -> &[PreampBand] {
        &self.bands
    }

    pub fn preamp_at(&self, omega: AngularFrequency) -> Result<&PreampModel> {
        let f = omega.hz();
        self.bands
            .iter()
            .find(|b| b.contains(f))
            .map(|b| &b.model)
            .ok_or(Error::OutOfBand { freq_hz: f })
    }
}

/// Complete readout: first-stage SQUID, its input coupling, and optionally
/// the follow-on amplification. Without a follow-on stage the chain is the
/// ideal TC-limited first stage alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub first_stage: FirstStageSquid,
    pub coupling: InputCoupling,
    follow_on: Option<FollowOnStage>,
}

impl ChainConfig {
    pub fn new(
        first_stage: FirstStageSquid,
        coupling: InputCoupling,
        second_stage: SecondStageDesign,
        bands: Vec<PreampBand>,
    ) -> Result<Self> {
        Ok(Self {
            first_stage,
            coupling,
            follow_on: Some(FollowOnStage::new(second_stage, bands)?),
        })
    }

    pub fn first_stage_only(first_stage: FirstStageSquid, coupling: InputCoupling) -> Self {
        Self {
            first_stage,
            coupling,
            follow_on: None,
        }
    }

    /// Magnicon below 50 MHz, high-speed room-temperature preamp 50-300 MHz.
    pub fn room_temperature_bands() -> Vec<PreampBand> {
        vec![
            PreampBand::full_range(PreampModel::magnicon()),
            PreampBand::new(50e6, 300e6, PreampModel::high_speed_rt()).expect("preset is valid"),
        ]
    }

    pub fn follow_on(&self) -> Option<&FollowOnStage> {
        self.follow_on.as_ref()
    }

    pub fn second_stage(&self) -> Option<&SecondStageDesign> {
        self.follow_on.as_ref().map(|s| &s.design)
    }

    pub fn bands(&self) -> &[PreampBand] {
        self.follow_on.as_ref().map_or(&[], |s| s.bands())
    }

    pub fn preamp_at(&self, omega: AngularFrequency) -> Result<Option<&PreampModel>> {
        self.follow_on
            .as_ref()
            .map(|s| s.preamp_at(omega))
            .transpose()
    }

    /// True when every frequency in [f_lo, f_hi] falls in some band. A chain
    /// without follow-on stage covers everything.
    pub fn covers(&self, f_lo: f64, f_hi: f64) -> bool {
        let Some(stage) = &self.follow_on else {
            return true;
        };
        let mut reached = f_lo;
        for band in &stage.bands {
            if band.f_lo <= reached && band.f_hi >= reached {
                reached = band.f_hi;
            }
            if reached >= f_hi {
                return true;
            }
        }
        false
    }

    /// Upper edge of the highest preamp band, or infinity without one.
    pub fn highest_band_edge(&self) -> f64 {
        match &self.follow_on {
            Some(stage) => stage.bands.iter().map(|b| b.f_hi).fold(0.0, f64::max),
            None => f64::INFINITY,
        }
    }

    /// Same chain with a different input coupling.
    pub fn with_coupling(&self, coupling: InputCoupling) -> Self {
        Self {
            coupling,
            ..self.clone()
        }
    }

    /// First-to-second stage time constant; `None` without a second stage.
    pub fn time_constant(&self) -> Option<f64> {
        let design = self.second_stage()?;
        let rdyn1 = transfer_functions(&self.first_stage).dynamic_resistance;
        Some(coupling_time_constant(design, rdyn1).expect("R_dyn is positive"))
    }

    pub fn advisories(&self) -> Vec<Advisory> {
        let mut out = crate::first_stage::tc_figures_of_merit(&self.first_stage).advisories;
        if let Some(stage) = &self.follow_on {
            out.extend(scale_array(&stage.design).advisories);
            if stage
                .bands
                .iter()
                .any(|b| matches!(b.model, PreampModel::CryoRf(_)))
            {
                out.extend(cryo_rf_match_advisory(&stage.design));
            }
        }
        out
    }
}

/// Second-stage flux noise of the chain at a frequency, SQUID plus whichever
/// preamp covers it (Wb^2/Hz). Zero without a follow-on stage.
pub fn chain_flux_noise(chain: &ChainConfig, omega: AngularFrequency) -> Result<f64> {
    match &chain.follow_on {
        Some(stage) => {
            let preamp = stage.preamp_at(omega)?;
            Ok(total_second_stage_flux_noise(&stage.design, preamp))
        }
        None => Ok(0.0),
    }
}

/// Follow-on noise referred to first-stage input current (A^2/Hz), including
/// the single-pole rolloff of the first-to-second stage link.
pub fn referred_imprecision(chain: &ChainConfig, omega: AngularFrequency) -> Result<f64> {
    let Some(stage) = &chain.follow_on else {
        return Ok(0.0);
    };
    let flux_sq = chain_flux_noise(chain, omega)?;
    let m_in2 = stage.design.prototype.input_mutual;
    let wt = omega.rad_per_s() * chain.time_constant().unwrap_or(0.0);
    Ok(
        flux_sq / (m_in2 * m_in2) * chain.first_stage.loop_inductance()
            / chain.coupling.kappa_sq_lin()
            * (1.0 + wt * wt),
    )
}

/// First-stage TC imprecision plus referred follow-on imprecision (A^2/Hz).
pub fn full_system_imprecision(chain: &ChainConfig, omega: AngularFrequency) -> Result<f64> {
    let first = input_referred_noise(&chain.first_stage, &chain.coupling, omega);
    Ok(first.s_ii + referred_imprecision(chain, omega)?)
}
