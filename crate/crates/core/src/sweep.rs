//! Sweep configuration (TOML), frequency sweeps, and CSV emission.
//!
//! ```toml
//! [first_stage]
//! preset = "c1"            # or I0 / Rj / Lsq / Tj (and optional Cj)
//!
//! [coupling]
//! Lin = "100 nH"
//! kappa = 0.1
//!
//! [second_stage]           # omit for the first stage alone
//! preset = "48x3"          # or N_ser / N_par / T2 / L_SQ2 / L_int
//!
//! [[preamp]]               # omit for the room-temperature pair
//! preset = "cryorf"        # or kind = "opamp" | "cryo_rf" plus its noise keys
//! f_lo = "5 MHz"
//! f_hi = "50 MHz"
//!
//! [sweep]
//! f_start = "5 MHz"
//! f_stop = "50 MHz"
//! points = 50
//! grid = "log"
//! outputs = ["eta", "epsilon_uc"]
//!
//! [resonator]
//! Q = 1e6
//! T = "10 mK"
//! ```
//!
//! Dimensioned values must be strings with a unit; bare numbers are
//! rejected. Unknown keys are errors.

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use thiserror::Error;

use crate::first_stage::{FirstStageSquid, InputCoupling};
use crate::matching::figures_of_merit;
use crate::quantities::{AngularFrequency, HBAR};
use crate::second_stage::{ChainConfig, PreampBand, PreampModel, SecondStageDesign};
use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("sweep range {f_start:.6e}-{f_stop:.6e} Hz leaves the configured preamp bands")]
    Coverage { f_start: f64, f_stop: f64 },
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn invalid(key: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Eta,
    EpsilonUc,
    TMinOnRes,
    TMinComplex,
    KappaGOnRes,
    KappaGScan,
}

impl Output {
    pub const ALL: [Output; 6] = [
        Output::Eta,
        Output::EpsilonUc,
        Output::TMinOnRes,
        Output::TMinComplex,
        Output::KappaGOnRes,
        Output::KappaGScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Eta => "eta",
            Output::EpsilonUc => "epsilon_uc",
            Output::TMinOnRes => "t_min_on_res",
            Output::TMinComplex => "t_min_complex",
            Output::KappaGOnRes => "kappa_g_on_res",
            Output::KappaGScan => "kappa_g_scan",
        }
    }

    /// CSV header: name with a unit suffix where the column has one.
    pub fn column(self) -> &'static str {
        match self {
            Output::Eta => "eta",
            Output::EpsilonUc => "epsilon_uc_hbar",
            Output::TMinOnRes => "t_min_on_res_K",
            Output::TMinComplex => "t_min_complex_K",
            Output::KappaGOnRes => "kappa_g_on_res",
            Output::KappaGScan => "kappa_g_scan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub chain: ChainConfig,
    pub f_start: f64,
    pub f_stop: f64,
    pub points: usize,
    pub grid: Grid,
    pub resonator_q: f64,
    /// K
    pub resonator_t: f64,
    pub outputs: Vec<Output>,
}

impl SweepConfig {
    pub const DEFAULT_POINTS: usize = 100;
    pub const DEFAULT_Q: f64 = 1e6;
    pub const DEFAULT_RESONATOR_T: f64 = 0.01;

    /// Sweep over as much of 1-300 MHz as the chain's bands allow.
    pub fn defaults_for(chain: ChainConfig) -> Result<Self, ConfigError> {
        let lowest = chain
            .bands()
            .iter()
            .map(|b| b.f_lo)
            .fold(f64::INFINITY, f64::min);
        let f_start = if lowest.is_finite() {
            lowest.max(1e6)
        } else {
            1e6
        };
        let f_stop = chain.highest_band_edge().min(300e6);
        Self::new(
            chain,
            f_start,
            f_stop,
            Self::DEFAULT_POINTS,
            Grid::Log,
            Self::DEFAULT_Q,
            Self::DEFAULT_RESONATOR_T,
            vec![Output::Eta, Output::EpsilonUc],
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        chain: ChainConfig,
        f_start: f64,
        f_stop: f64,
        points: usize,
        grid: Grid,
        resonator_q: f64,
        resonator_t: f64,
        outputs: Vec<Output>,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            chain,
            f_start,
            f_stop,
            points,
            grid,
            resonator_q,
            resonator_t,
            outputs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.f_start.is_finite() && self.f_start > 0.0) {
            return Err(invalid("f_start", "must be > 0"));
        }
        if self.f_stop <= self.f_start || !self.f_stop.is_finite() {
            return Err(invalid("f_stop", "must exceed f_start"));
        }
        if self.f_stop > self.chain.highest_band_edge()
            || !self.chain.covers(self.f_start, self.f_stop)
        {
            return Err(ConfigError::Coverage {
                f_start: self.f_start,
                f_stop: self.f_stop,
            });
        }
        if self.points < 2 {
            return Err(invalid("points", "need at least 2"));
        }
        if !(self.resonator_q.is_finite() && self.resonator_q > 0.0) {
            return Err(invalid("Q", "must be > 0"));
        }
        if !(self.resonator_t.is_finite() && self.resonator_t >= 0.0) {
            return Err(invalid("T", "must be >= 0"));
        }
        if self.outputs.is_empty() {
            return Err(invalid("outputs", "request at least one output"));
        }
        Ok(())
    }

    /// Replaces the range and point count, revalidating.
    pub fn with_range(
        mut self,
        f_start: Option<f64>,
        f_stop: Option<f64>,
        points: Option<usize>,
    ) -> Result<Self, ConfigError> {
        self.f_start = f_start.unwrap_or(self.f_start);
        self.f_stop = f_stop.unwrap_or(self.f_stop);
        self.points = points.unwrap_or(self.points);
        self.validate()?;
        Ok(self)
    }

    /// Grid frequencies in Hz, ascending, endpoints exact.
    pub fn frequencies(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    return self.f_stop;
                }
                let t = i as f64 / last as f64;
                match self.grid {
                    Grid::Log => self.f_start * (self.f_stop / self.f_start).powf(t),
                    Grid::Linear => self.f_start + (self.f_stop - self.f_start) * t,
                }
            })
            .collect()
    }
}

/// Quantity string such as `"200 pH"`; bare numbers fail to deserialize.
#[derive(Debug, Clone, PartialEq)]
struct Quantity(String);

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Quantity;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string with a unit suffix such as \"200 pH\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
                Ok(Quantity(v.to_owned()))
            }
        }
        d.deserialize_any(V)
    }
}

fn quantity(key: &str, q: &Quantity, dim: Dimension) -> Result<f64, ConfigError> {
    parse_quantity(&q.0, dim).map_err(|e| invalid(key, e))
}

fn opt_quantity(
    key: &str,
    q: &Option<Quantity>,
    dim: Dimension,
) -> Result<Option<f64>, ConfigError> {
    q.as_ref().map(|q| quantity(key, q, dim)).transpose()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    first_stage: Option<RawFirstStage>,
    coupling: Option<RawCoupling>,
    second_stage: Option<RawSecondStage>,
    #[serde(default)]
    preamp: Vec<RawPreamp>,
    sweep: Option<RawSweep>,
    resonator: Option<RawResonator>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFirstStage {
    preset: Option<String>,
    #[serde(rename = "I0")]
    i0: Option<Quantity>,
    #[serde(rename = "Rj")]
    rj: Option<Quantity>,
    #[serde(rename = "Lsq")]
    lsq: Option<Quantity>,
    #[serde(rename = "Tj")]
    tj: Option<Quantity>,
    #[serde(rename = "Cj")]
    cj: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    #[serde(rename = "Lin")]
    lin: Option<Quantity>,
    kappa: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSecondStage {
    preset: Option<String>,
    #[serde(rename = "N_ser")]
    n_ser: Option<u32>,
    #[serde(rename = "N_par")]
    n_par: Option<u32>,
    #[serde(rename = "T2")]
    t2: Option<Quantity>,
    #[serde(rename = "L_SQ2")]
    l_sq2: Option<Quantity>,
    #[serde(rename = "L_int")]
    l_int: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreamp {
    preset: Option<String>,
    kind: Option<String>,
    #[serde(rename = "Vn")]
    vn: Option<Quantity>,
    #[serde(rename = "In")]
    in_: Option<Quantity>,
    #[serde(rename = "Rlead")]
    rlead: Option<Quantity>,
    #[serde(rename = "Tlead")]
    tlead: Option<Quantity>,
    #[serde(rename = "Tn")]
    tn: Option<Quantity>,
    f_min: Option<Quantity>,
    f_max: Option<Quantity>,
    f_lo: Option<Quantity>,
    f_hi: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    f_start: Option<Quantity>,
    f_stop: Option<Quantity>,
    points: Option<usize>,
    grid: Option<String>,
    outputs: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonator {
    #[serde(rename = "Q")]
    q: Option<f64>,
    #[serde(rename = "T")]
    t: Option<Quantity>,
}

/// Default input coupling: kappa = 0.1 into 100 nH, i.e. kappa^2 L_in = 1 nH.
/// Every reported figure of merit is independent of this choice.
pub const DEFAULT_INPUT_INDUCTANCE: f64 = 100e-9;
pub const DEFAULT_KAPPA: f64 = 0.1;

/// Temperature the second-stage array presets are evaluated at (K).
pub const ARRAY_PRESET_TEMPERATURE: f64 = 1.0;

fn first_stage_preset(name: &str) -> Option<FirstStageSquid> {
    (name == "c1").then(FirstStageSquid::c1)
}

fn array_preset(name: &str) -> Option<(u32, u32)> {
    match name {
        "16x1" => Some((16, 1)),
        "32x2" => Some((32, 2)),
        "48x3" => Some((48, 3)),
        _ => None,
    }
}

fn preamp_preset(name: &str) -> Option<PreampModel> {
    match name {
        "magnicon" => Some(PreampModel::magnicon()),
        "rt300" => Some(PreampModel::high_speed_rt()),
        "cryorf" => Some(PreampModel::cryo_rf_2k()),
        _ => None,
    }
}

pub const PRESET_NAMES: [&str; 7] = ["c1", "16x1", "32x2", "48x3", "magnicon", "rt300", "cryorf"];

fn build_first_stage(raw: Option<&RawFirstStage>) -> Result<FirstStageSquid, ConfigError> {
    let default = RawFirstStage::default();
    let raw = raw.unwrap_or(&default);
    let base = match &raw.preset {
        Some(p) => Some(
            first_stage_preset(p)
                .ok_or_else(|| invalid("first_stage.preset", format!("unknown preset '{p}'")))?,
        ),
        None => None,
    };
    let explicit = raw.i0.is_some() || raw.rj.is_some() || raw.lsq.is_some() || raw.tj.is_some();
    let base = match (base, explicit) {
        (Some(b), _) => b,
        (None, false) => FirstStageSquid::c1(),
        (None, true) => {
            for (key, v) in [
                ("I0", &raw.i0),
                ("Rj", &raw.rj),
                ("Lsq", &raw.lsq),
                ("Tj", &raw.tj),
            ] {
                if v.is_none() {
                    return Err(invalid(
                        format!("first_stage.{key}"),
                        "required without a preset",
                    ));
                }
            }
            FirstStageSquid::c1()
        }
    };
    let i0 = opt_quantity("first_stage.I0", &raw.i0, Dimension::Current)?
        .unwrap_or(base.critical_current());
    let rj = opt_quantity("first_stage.Rj", &raw.rj, Dimension::Resistance)?
        .unwrap_or(base.shunt_resistance());
    let lsq = opt_quantity("first_stage.Lsq", &raw.lsq, Dimension::Inductance)?
        .unwrap_or(base.loop_inductance());
    let tj = opt_quantity("first_stage.Tj", &raw.tj, Dimension::Temperature)?
        .unwrap_or(base.shunt_temperature());
    let squid = FirstStageSquid::new(i0, rj, lsq, tj).map_err(|e| invalid("first_stage", e))?;
    match opt_quantity("first_stage.Cj", &raw.cj, Dimension::Capacitance)? {
        Some(cj) => squid
            .with_junction_capacitance(cj)
            .map_err(|e| invalid("first_stage.Cj", e)),
        None => Ok(squid),
    }
}

fn build_coupling(raw: Option<&RawCoupling>) -> Result<InputCoupling, ConfigError> {
    let lin = match raw.and_then(|r| r.lin.as_ref()) {
        Some(q) => quantity("coupling.Lin", q, Dimension::Inductance)?,
        None => DEFAULT_INPUT_INDUCTANCE,
    };
    let kappa = raw.and_then(|r| r.kappa).unwrap_or(DEFAULT_KAPPA);
    InputCoupling::new(lin, kappa).map_err(|e| invalid("coupling", e))
}

fn build_second_stage(raw: &RawSecondStage) -> Result<SecondStageDesign, ConfigError> {
    let (ns, np) = match &raw.preset {
        Some(p) => array_preset(p)
            .ok_or_else(|| invalid("second_stage.preset", format!("unknown preset '{p}'")))?,
        None => (
            raw.n_ser
                .ok_or_else(|| invalid("second_stage.N_ser", "required without a preset"))?,
            raw.n_par
                .ok_or_else(|| invalid("second_stage.N_par", "required without a preset"))?,
        ),
    };
    let ns = raw.n_ser.unwrap_or(ns);
    let np = raw.n_par.unwrap_or(np);
    let t2 = opt_quantity("second_stage.T2", &raw.t2, Dimension::Temperature)?
        .unwrap_or(ARRAY_PRESET_TEMPERATURE);
    let l_sq2 = opt_quantity("second_stage.L_SQ2", &raw.l_sq2, Dimension::Inductance)?
        .unwrap_or(SecondStageDesign::DEFAULT_SQUID_INPUT_INDUCTANCE);
    let l_int = opt_quantity("second_stage.L_int", &raw.l_int, Dimension::Inductance)?
        .unwrap_or(SecondStageDesign::DEFAULT_INTERCONNECT_INDUCTANCE);
    SecondStageDesign::with_parts(ns, np, t2, l_sq2, l_int, Default::default())
        .map_err(|e| invalid("second_stage", e))
}

fn build_preamp(raw: &RawPreamp, idx: usize) -> Result<PreampBand, ConfigError> {
    let key = |k: &str| format!("preamp[{idx}].{k}");
    let model = match (&raw.preset, raw.kind.as_deref()) {
        (Some(_), Some(_)) => {
            return Err(invalid(key("kind"), "give either preset or kind, not both"))
        }
        (Some(p), None) => {
            let noise_keys = [
                &raw.vn, &raw.in_, &raw.rlead, &raw.tlead, &raw.tn, &raw.f_min, &raw.f_max,
            ];
            if noise_keys.iter().any(|k| k.is_some()) {
                return Err(invalid(
                    key("preset"),
                    "preset amplifiers only accept f_lo / f_hi",
                ));
            }
            preamp_preset(p)
                .ok_or_else(|| invalid(key("preset"), format!("unknown preset '{p}'")))?
        }
        (None, Some("opamp")) => {
            let req = |k: &str, q: &Option<Quantity>, d| {
                q.as_ref()
                    .ok_or_else(|| invalid(key(k), "required for kind = \"opamp\""))
                    .and_then(|q| quantity(&key(k), q, d))
            };
            if raw.tn.is_some() || raw.f_min.is_some() {
                return Err(invalid(
                    key("kind"),
                    "Tn and f_min only apply to kind = \"cryo_rf\"",
                ));
            }
            PreampModel::op_amp(
                req("Vn", &raw.vn, Dimension::VoltageDensity)?,
                req("In", &raw.in_, Dimension::CurrentDensity)?,
                opt_quantity(&key("Rlead"), &raw.rlead, Dimension::Resistance)?.unwrap_or(0.0),
                opt_quantity(&key("Tlead"), &raw.tlead, Dimension::Temperature)?.unwrap_or(0.0),
                req("f_max", &raw.f_max, Dimension::Frequency)?,
            )
            .map_err(|e| invalid(key("kind"), e))?
        }
        (None, Some("cryo_rf")) => {
            if [&raw.vn, &raw.in_, &raw.rlead, &raw.tlead]
                .iter()
                .any(|k| k.is_some())
            {
                return Err(invalid(
                    key("kind"),
                    "Vn, In, Rlead and Tlead only apply to kind = \"opamp\"",
                ));
            }
            let tn = raw
                .tn
                .as_ref()
                .ok_or_else(|| invalid(key("Tn"), "required for kind = \"cryo_rf\""))
                .and_then(|q| quantity(&key("Tn"), q, Dimension::Temperature))?;
            let f_min =
                opt_quantity(&key("f_min"), &raw.f_min, Dimension::Frequency)?.unwrap_or(0.0);
            let f_max = raw
                .f_max
                .as_ref()
                .ok_or_else(|| invalid(key("f_max"), "required for kind = \"cryo_rf\""))
                .and_then(|q| quantity(&key("f_max"), q, Dimension::Frequency))?;
            PreampModel::cryo_rf(tn, f_min, f_max).map_err(|e| invalid(key("kind"), e))?
        }
        (None, Some(other)) => {
            return Err(invalid(
                key("kind"),
                format!("unknown kind '{other}' (opamp, cryo_rf)"),
            ))
        }
        (None, None) => return Err(invalid(key("preset"), "give a preset or a kind")),
    };
    let (lo, hi) = model.operating_range();
    let f_lo = opt_quantity(&key("f_lo"), &raw.f_lo, Dimension::Frequency)?.unwrap_or(lo);
    let f_hi = opt_quantity(&key("f_hi"), &raw.f_hi, Dimension::Frequency)?.unwrap_or(hi);
    PreampBand::new(f_lo, f_hi, model).map_err(|e| invalid(key("f_lo"), e))
}

fn build(raw: RawConfig) -> Result<SweepConfig, ConfigError> {
    let first = build_first_stage(raw.first_stage.as_ref())?;
    let coupling = build_coupling(raw.coupling.as_ref())?;
    let chain = match &raw.second_stage {
        None if !raw.preamp.is_empty() => {
            return Err(invalid(
                "preamp",
                "preamps need a [second_stage] to read out",
            ))
        }
        None => ChainConfig::first_stage_only(first, coupling),
        Some(s) => {
            let design = build_second_stage(s)?;
            let bands = if raw.preamp.is_empty() {
                ChainConfig::room_temperature_bands()
            } else {
                raw.preamp
                    .iter()
                    .enumerate()
                    .map(|(i, p)| build_preamp(p, i))
                    .collect::<Result<_, _>>()?
            };
            ChainConfig::new(first, coupling, design, bands).map_err(|e| invalid("preamp", e))?
        }
    };

    let mut cfg = SweepConfig::defaults_for(chain.clone()).unwrap_or(SweepConfig {
        chain,
        f_start: 1e6,
        f_stop: 300e6,
        points: SweepConfig::DEFAULT_POINTS,
        grid: Grid::Log,
        resonator_q: SweepConfig::DEFAULT_Q,
        resonator_t: SweepConfig::DEFAULT_RESONATOR_T,
        outputs: vec![Output::Eta, Output::EpsilonUc],
    });
    if let Some(s) = raw.sweep {
        if let Some(f) = opt_quantity("sweep.f_start", &s.f_start, Dimension::Frequency)? {
            cfg.f_start = f;
        }
        if let Some(f) = opt_quantity("sweep.f_stop", &s.f_stop, Dimension::Frequency)? {
            cfg.f_stop = f;
        }
        cfg.points = s.points.unwrap_or(cfg.points);
        cfg.grid = match s.grid.as_deref() {
            None | Some("log") => Grid::Log,
            Some("linear") => Grid::Linear,
            Some(g) => {
                return Err(invalid(
                    "sweep.grid",
                    format!("unknown grid '{g}' (log, linear)"),
                ))
            }
        };
        if let Some(outs) = s.outputs {
            let mut parsed = Vec::with_capacity(outs.len());
            for o in &outs {
                let out = Output::parse(o)
                    .ok_or_else(|| invalid("sweep.outputs", format!("unknown output '{o}'")))?;
                if parsed.contains(&out) {
                    return Err(invalid("sweep.outputs", format!("'{o}' listed twice")));
                }
                parsed.push(out);
            }
            cfg.outputs = parsed;
        }
    }
    if let Some(r) = raw.resonator {
        cfg.resonator_q = r.q.unwrap_or(cfg.resonator_q);
        if let Some(t) = opt_quantity("resonator.T", &r.t, Dimension::Temperature)? {
            cfg.resonator_t = t;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_owned(),
        }
    })?;
    build(raw)
}

pub fn load_config(path: &Path) -> Result<SweepConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

/// Builds a config from preset names: at most one first stage (`c1`, the
/// default), at most one array, any number of preamps. An array without
/// preamps uses the room-temperature pair.
pub fn config_from_presets<S: AsRef<str>>(names: &[S]) -> Result<SweepConfig, ConfigError> {
    let mut raw = RawConfig::default();
    for name in names {
        let name = name.as_ref();
        if first_stage_preset(name).is_some() {
            if raw.first_stage.is_some() {
                return Err(invalid("preset", "more than one first-stage preset"));
            }
            raw.first_stage = Some(RawFirstStage {
                preset: Some(name.to_owned()),
                ..Default::default()
            });
        } else if array_preset(name).is_some() {
            if raw.second_stage.is_some() {
                return Err(invalid("preset", "more than one second-stage preset"));
            }
            raw.second_stage = Some(RawSecondStage {
                preset: Some(name.to_owned()),
                ..Default::default()
            });
        } else if preamp_preset(name).is_some() {
            raw.preamp.push(RawPreamp {
                preset: Some(name.to_owned()),
                ..Default::default()
            });
        } else {
            return Err(invalid(
                "preset",
                format!(
                    "unknown preset '{name}' (one of {})",
                    PRESET_NAMES.join(", ")
                ),
            ));
        }
    }
    if raw.second_stage.is_none() && !raw.preamp.is_empty() {
        return Err(invalid(
            "preset",
            "preamp presets need an array preset (16x1, 32x2, 48x3)",
        ));
    }
    // Two full-range preamps overlap; trim the op-amp band to end where the
    // next one starts.
    if raw.preamp.len() > 1 {
        let mut bands: Vec<PreampBand> = raw
            .preamp
            .iter()
            .enumerate()
            .map(|(i, p)| build_preamp(p, i))
            .collect::<Result<_, _>>()?;
        bands.sort_by(|a, b| a.f_hi.total_cmp(&b.f_hi));
        for i in 1..bands.len() {
            let prev_hi = bands[i - 1].f_hi;
            if bands[i].f_lo < prev_hi {
                bands[i].f_lo = prev_hi;
            }
            if bands[i].f_lo >= bands[i].f_hi {
                return Err(invalid("preset", "preamp presets cover the same range"));
            }
        }
        let chain_first = build_first_stage(raw.first_stage.as_ref())?;
        let design = build_second_stage(raw.second_stage.as_ref().expect("checked above"))?;
        let chain = ChainConfig::new(chain_first, build_coupling(None)?, design, bands)
            .map_err(|e| invalid("preset", e))?;
        return SweepConfig::defaults_for(chain);
    }
    build(raw)
}

/// One sweep frequency. `values` lines up with the table's outputs; a
/// `None` marks a failed cell whose reason is in `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub f: f64,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub outputs: Vec<Output>,
    pub rows: Vec<SweepRow>,
}

fn evaluate(cfg: &SweepConfig, f: f64) -> SweepRow {
    let fail = |msg: String| SweepRow {
        f,
        values: vec![None; cfg.outputs.len()],
        error: Some(msg),
    };
    let omega = match AngularFrequency::from_hz(f) {
        Ok(w) => w,
        Err(e) => return fail(e.to_string()),
    };
    let fom = match figures_of_merit(&cfg.chain, omega, cfg.resonator_q, cfg.resonator_t) {
        Ok(fom) => fom,
        Err(e) => return fail(e.to_string()),
    };
    let mut errors = Vec::new();
    let mut take = |name: &str, r: &crate::Result<f64>| match r {
        Ok(v) => Some(*v),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    };
    let values = cfg
        .outputs
        .iter()
        .map(|o| match o {
            Output::Eta => Some(fom.eta),
            Output::EpsilonUc => Some(fom.epsilon_uc / HBAR),
            Output::TMinOnRes => Some(fom.t_min_on_res),
            Output::TMinComplex => Some(fom.t_min_complex),
            Output::KappaGOnRes => take(o.name(), &fom.kappa_g_on_res),
            Output::KappaGScan => take(o.name(), &fom.kappa_g_scan),
        })
        .collect();
    SweepRow {
        f,
        values,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

/// Evaluates every grid point in parallel; rows come back in ascending
/// frequency. Failures are recorded per row, never aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> SweepTable {
    let rows = cfg
        .frequencies()
        .into_par_iter()
        .map(|f| evaluate(cfg, f))
        .collect();
    SweepTable {
        outputs: cfg.outputs.clone(),
        rows,
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no rows to write")]
    Empty,
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn fmt_value(v: f64) -> String {
    format!("{v:.8e}")
}

/// CSV text: `f_Hz`, one column per output, and an `error` column only when
/// some row failed. Nine significant digits.
pub fn render_csv(table: &SweepTable) -> Result<String, EmitError> {
    if table.rows.is_empty() {
        return Err(EmitError::Empty);
    }
    let with_error = table.rows.iter().any(|r| r.error.is_some());
    let mut header: Vec<&str> = vec!["f_Hz"];
    header.extend(table.outputs.iter().map(|o| o.column()));
    if with_error {
        header.push("error");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_string_err = |e: csv::Error| EmitError::Io {
        path: PathBuf::new(),
        source: io::Error::other(e),
    };
    w.write_record(&header).map_err(to_string_err)?;
    for row in &table.rows {
        let mut rec = vec![fmt_value(row.f)];
        rec.extend(
            row.values
                .iter()
                .map(|v| v.map(fmt_value).unwrap_or_default()),
        );
        if with_error {
            rec.push(row.error.clone().unwrap_or_default());
        }
        w.write_record(&rec).map_err(to_string_err)?;
    }
    let bytes = w.into_inner().map_err(|e| EmitError::Io {
        path: PathBuf::new(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII and UTF-8 messages"))
}

/// Writes the CSV to `path`. Nothing is created when the table is empty.
pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<(), EmitError> {
    let text = render_csv(table)?;
    let io_err = |source| EmitError::Io {
        path: path.to_owned(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(text.as_bytes()).map_err(io_err)?;
    file.flush().map_err(io_err)
}

/// Aligned plain-text summary of the chain and its figures of merit at one
/// frequency.
pub fn render_report(cfg: &SweepConfig, f: f64) -> crate::Result<String> {
    use crate::first_stage::{epsilon_uc_first_stage, tc_figures_of_merit};
    use crate::second_stage::{input_inductance, scale_array};

    let omega = AngularFrequency::from_hz(f)?;
    let chain = &cfg.chain;
    let squid = &chain.first_stage;
    let tc = tc_figures_of_merit(squid);
    let fom = figures_of_merit(chain, omega, cfg.resonator_q, cfg.resonator_t)?;
    let mut out = String::new();
    let mut line = |label: &str, value: String| {
        let _ = writeln!(out, "{label:<28}{value}");
    };
    line("frequency", format!("{f:.6e} Hz"));
    line(
        "I0 / Rj / Lsq / Tj",
        format!(
            "{:.4e} A / {:.4} Ohm / {:.4e} H / {:.4} K",
            squid.critical_current(),
            squid.shunt_resistance(),
            squid.loop_inductance(),
            squid.shunt_temperature()
        ),
    );
    line("beta_L", format!("{:.4}", tc.beta_l));
    if let Some(bc) = tc.beta_c {
        line("beta_C", format!("{bc:.4}"));
    }
    line("Gamma", format!("{:.4e}", tc.gamma));
    line(
        "epsilon_uc first stage",
        format!("{:.4} hbar", epsilon_uc_first_stage(squid) / HBAR),
    );
    match chain.second_stage() {
        Some(d) => {
            let s = scale_array(d);
            line(
                "second stage",
                format!("{}x{} at {} K", d.n_ser(), d.n_par(), d.temperature()),
            );
            line("  power", format!("{:.4e} W", s.power));
            line("  dV/dI", format!("{:.4} Ohm", s.dynamic_resistance));
            line("  L2", format!("{:.4e} H", input_inductance(d)));
            line(
                "  tau",
                format!("{:.4e} s", chain.time_constant().unwrap_or(0.0)),
            );
            let preamp = match chain.preamp_at(omega)? {
                Some(PreampModel::OpAmp(p)) => format!("op-amp, f_max {:.3e} Hz", p.f_max),
                Some(PreampModel::CryoRf(p)) => {
                    format!("cryogenic RF, Tn {} K", p.noise_temperature)
                }
                None => "none".to_owned(),
            };
            line("  preamp", preamp);
        }
        None => line("second stage", "none".to_owned()),
    }
    line("eta", format!("{:.6}", fom.eta));
    line("epsilon_uc", format!("{:.6} hbar", fom.epsilon_uc / HBAR));
    line("T_min on resonance", format!("{:.6e} K", fom.t_min_on_res));
    line(
        "T_min complex source",
        format!("{:.6e} K", fom.t_min_complex),
    );
    let kg = |r: &crate::Result<f64>| match r {
        Ok(v) => format!("{v:.6e}"),
        Err(e) => format!("unavailable ({e})"),
    };
    line(
        "resonator Q / T",
        format!("{:.3e} / {} K", cfg.resonator_q, cfg.resonator_t),
    );
    line("kappa_g on resonance", kg(&fom.kappa_g_on_res));
    line("kappa_g scan", kg(&fom.kappa_g_scan));
    for a in chain.advisories() {
        line("advisory", a.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::second_stage::input_inductance;
    use approx::assert_relative_eq;

    #[test]
    fn presets_expand() {
        let cfg = config_from_presets(&["48x3"]).unwrap();
        let d = cfg.chain.second_stage().unwrap();
        assert_eq!((d.n_ser(), d.n_par()), (48, 3));
        assert_relative_eq!(input_inductance(d), 20e-9, max_relative = 1e-12);
        assert_eq!(cfg.chain.bands().len(), 2);

        let c1 = config_from_presets(&["c1"]).unwrap().chain.first_stage;
        assert_eq!(c1, FirstStageSquid::c1());
        assert!(config_from_presets(&["c2"]).is_err());
        assert!(config_from_presets(&["cryorf"]).is_err());
    }

    #[test]
    fn preset_preamp_pair_is_trimmed() {
        let cfg = config_from_presets(&["32x2", "magnicon", "rt300"]).unwrap();
        let bands = cfg.chain.bands();
        assert_eq!(bands[0].f_hi, 50e6);
        assert_eq!(bands[1].f_lo, 50e6);
        assert_eq!(cfg.f_stop, 300e6);
    }

    #[test]
    fn cryo_only_defaults_start_in_band() {
        let cfg = config_from_presets(&["48x3", "cryorf"]).unwrap();
        assert_eq!(cfg.f_start, 5e6);
        assert_eq!(cfg.f_stop, 300e6);
    }

    #[test]
    fn full_document() {
        let cfg = parse_config(
            r#"
            [first_stage]
            I0 = "6.3 uA"
            Rj = "6 Ohm"
            Lsq = "200 pH"
            Tj = "150 mK"

            [coupling]
            Lin = "50 nH"
            kappa = 0.3

            [second_stage]
            preset = "16x1"
            T2 = "2 K"

            [[preamp]]
            kind = "opamp"
            Vn = "0.3 nV/rtHz"
            In = "6 pA/rtHz"
            f_max = "300 MHz"

            [sweep]
            f_start = "10 MHz"
            f_stop = "100 MHz"
            points = 7
            grid = "linear"
            outputs = ["eta", "kappa_g_scan"]

            [resonator]
            Q = 1e5
            T = "20 mK"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.chain.first_stage, FirstStageSquid::c1());
        assert_relative_eq!(
            cfg.chain.coupling.kappa_sq_lin(),
            0.09 * 50e-9,
            max_relative = 1e-12
        );
        assert_eq!(cfg.chain.second_stage().unwrap().temperature(), 2.0);
        assert_eq!(
            cfg.frequencies(),
            vec![10e6, 25e6, 40e6, 55e6, 70e6, 85e6, 100e6]
        );
        assert_eq!(cfg.outputs, vec![Output::Eta, Output::KappaGScan]);
        assert_eq!(cfg.resonator_q, 1e5);
        assert_relative_eq!(cfg.resonator_t, 0.02);
    }

    #[test]
    fn bare_number_rejected_with_position() {
        let err = parse_config("[first_stage]\nLsq = 200\n").unwrap_err();
        match err {
            ConfigError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 7);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("[coupling]\nkapa = 0.1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn wrong_unit_names_key() {
        let err = parse_config("[first_stage]\npreset = \"c1\"\nLsq = \"200 pA\"\n").unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "first_stage.Lsq"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn incomplete_explicit_first_stage() {
        let err = parse_config("[first_stage]\nI0 = \"5 uA\"\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Invalid { ref key, .. } if key == "first_stage.Rj"),
            "{err}"
        );
    }

    #[test]
    fn band_coverage_enforced() {
        let text = r#"
            [second_stage]
            preset = "48x3"
            [[preamp]]
            preset = "rt300"
            f_lo = "0 Hz"
            [sweep]
            f_start = "10 MHz"
            f_stop = "400 MHz"
        "#;
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Coverage { .. })
        ));
        let gap = r#"
            [second_stage]
            preset = "48x3"
            [[preamp]]
            preset = "magnicon"
            f_hi = "20 MHz"
            [[preamp]]
            preset = "rt300"
            f_lo = "30 MHz"
            [sweep]
            f_start = "10 MHz"
            f_stop = "100 MHz"
        "#;
        assert!(matches!(
            parse_config(gap),
            Err(ConfigError::Coverage { .. })
        ));
    }

    #[test]
    fn preamp_without_array_rejected() {
        assert!(parse_config("[[preamp]]\npreset = \"cryorf\"\n").is_err());
    }

    #[test]
    fn sweep_rows_ordered_and_flat_for_tc_chain() {
        let cfg = SweepConfig::defaults_for(config_from_presets(&["c1"]).unwrap().chain).unwrap();
        let table = run_sweep(&cfg);
        assert_eq!(table.rows.len(), SweepConfig::DEFAULT_POINTS);
        assert!(table.rows.windows(2).all(|w| w[0].f < w[1].f));
        let eta0 = table.rows[0].values[0].unwrap();
        for r in &table.rows {
            assert_relative_eq!(r.values[0].unwrap(), eta0, max_relative = 1e-12);
        }
    }

    #[test]
    fn row_errors_are_captured() {
        let mut cfg = config_from_presets(&["48x3"]).unwrap();
        cfg.resonator_q = 1.5;
        cfg.outputs = vec![Output::Eta, Output::KappaGOnRes];
        let table = run_sweep(&cfg);
        assert!(table.rows.iter().all(|r| r.values[0].is_some()));
        assert!(table
            .rows
            .iter()
            .any(|r| r.values[1].is_none() && r.error.is_some()));
        let csv = render_csv(&table).unwrap();
        assert!(csv.starts_with("f_Hz,eta,kappa_g_on_res,error\n"));
    }

    #[test]
    fn csv_shape() {
        let cfg = config_from_presets(&["c1"])
            .unwrap()
            .with_range(Some(1e6), Some(2e6), Some(3))
            .unwrap();
        let csv = render_csv(&run_sweep(&cfg)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "f_Hz,eta,epsilon_uc_hbar");
        assert_eq!(lines.len(), 4);
        assert!(csv.ends_with('\n'));
        assert!(lines[1].starts_with("1.00000000e6,"));
    }

    #[test]
    fn empty_table_is_an_error() {
        let empty = SweepTable {
            outputs: vec![Output::Eta],
            rows: vec![],
        };
        assert!(matches!(render_csv(&empty), Err(EmitError::Empty)));
    }
}
