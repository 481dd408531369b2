//! Regression checks for the published headline numbers and the exact
//! identities of the model. Shared by the `validate` subcommand and the
//! acceptance test target.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::first_stage::{
    epsilon_uc_first_stage, input_referred_noise, transfer_functions, FirstStageSquid,
    InputCoupling,
};
use crate::matching::{
    brute_force_min_noise, detuned_resonator_for_optimum, epsilon_uc_system, eta,
    match_on_resonance, match_scan_sensitivity, noise_temperature, on_res_sql_ratio,
    optimal_complex_source, scan_optimal_imprecision, t_min_complex, t_min_on_resonance,
    NoiseBudget, SearchRange,
};
use crate::quantities::{AngularFrequency, BOLTZMANN, FLUX_QUANTUM, HBAR};
use crate::resonator::{thermal_occupation, Resonator};
use crate::second_stage::{
    coupling_time_constant, full_system_imprecision, input_inductance, opamp_referred_flux_noise,
    scale_array, ChainConfig, PreampBand, PreampModel, SecondStageDesign,
};
use crate::sweep::{config_from_presets, run_sweep, Output};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub computed: String,
    pub expected: String,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: computed {}; expected {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.computed,
            self.expected
        )
    }
}

fn w(f: f64) -> AngularFrequency {
    AngularFrequency::from_hz(f).expect("literal frequency")
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn tc_chain(kappa: f64, lin: f64) -> ChainConfig {
    ChainConfig::first_stage_only(
        FirstStageSquid::c1(),
        InputCoupling::new(lin, kappa).expect("valid coupling"),
    )
}

/// Complex-source minimum noise of the C1 SQUID over the SQL.
pub fn eta_tc() -> Check {
    let b = NoiseBudget::from_chain(&tc_chain(0.1, 100e-9), w(30e6)).expect("TC chain");
    let e = eta(&b).expect("consistent budget");
    Check {
        id: 1,
        name: "eta of the C1 SQUID",
        computed: format!("{e:.4}"),
        expected: "3.7 +/- 0.05".into(),
        pass: (e - 3.7).abs() <= 0.05,
    }
}

pub fn on_resonance_sql_ratio() -> Check {
    let r = on_res_sql_ratio(&FirstStageSquid::c1());
    Check {
        id: 2,
        name: "on-resonance noise over SQL, C1",
        computed: format!("{r:.4}"),
        expected: "8.7 +/- 0.3".into(),
        pass: (r - 8.7).abs() <= 0.3,
    }
}

pub fn epsilon_uc_tc_invariance() -> Check {
    let mut values = Vec::new();
    for kappa in [0.01, 0.1, 1.0] {
        for f in [1e5, 1e7, 3e8] {
            let c = tc_chain(kappa, 100e-9);
            values.push(epsilon_uc_system(&c, w(f)).expect("TC chain") / HBAR);
        }
    }
    let closed = epsilon_uc_first_stage(&FirstStageSquid::c1()) / HBAR;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let spread = hi / lo - 1.0;
    Check {
        id: 3,
        name: "epsilon_uc of C1, no follow-on noise, over omega and kappa",
        computed: format!("{closed:.4} hbar (range {lo:.6}-{hi:.6}, spread {spread:.1e})"),
        expected: "5.24 hbar +/- 1%, flat".into(),
        pass: values.iter().all(|&v| rel(v, 5.24) <= 0.01) && spread <= 1e-12,
    }
}

pub fn array_design_table() -> Check {
    let designs = [
        SecondStageDesign::low_bandwidth(1.0),
        SecondStageDesign::medium_bandwidth(1.0),
        SecondStageDesign::high_bandwidth(1.0),
    ]
    .map(|d| d.expect("preset"));
    let rdyn1 = transfer_functions(&FirstStageSquid::c1()).dynamic_resistance;
    let p_exp = [6.00e-9, 2.67e-9, 0.67e-9];
    let l_exp = [20e-9, 10e-9, 4e-9];
    let tau_exp = [3.3e-9, 1.7e-9, 0.7e-9];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, d) in designs.iter().enumerate() {
        let s = scale_array(d);
        let l2 = input_inductance(d);
        let tau = coupling_time_constant(d, rdyn1).expect("positive R_dyn");
        pass &= rel(s.power, p_exp[i]) <= 0.01
            && rel(l2, l_exp[i]) <= 0.05
            && rel(tau, tau_exp[i]) <= 0.05
            && rel(s.dynamic_resistance, 50.0) <= 0.05;
        parts.push(format!(
            "{}x{}: P {:.3} nW, L2 {:.2} nH, tau {:.3} ns, dV/dI {:.2} Ohm",
            d.n_ser(),
            d.n_par(),
            s.power * 1e9,
            l2 * 1e9,
            tau * 1e9,
            s.dynamic_resistance
        ));
    }
    Check {
        id: 4,
        name: "scaled array designs",
        computed: parts.join("; "),
        expected: "P 6.00/2.67/0.67 nW (1%), L2 20/10/4 nH, tau 3.3/1.7/0.7 ns, dV/dI 50 Ohm (5%)"
            .into(),
        pass,
    }
}

pub fn prototype_consistency() -> Check {
    let d = SecondStageDesign::new(20, 1, 4.0).expect("prototype geometry");
    let PreampModel::OpAmp(p) = PreampModel::magnicon_as_measured() else {
        unreachable!("op-amp preset")
    };
    let referral = opamp_referred_flux_noise(&d, &p).sqrt() / FLUX_QUANTUM * 1e6;
    let squid_only = (0.394f64.powi(2) - referral.powi(2)).sqrt();
    Check {
        id: 5,
        name: "prototype preamp referral and quadrature subtraction",
        computed: format!("referral {referral:.4}, SQUID-only {squid_only:.4} uPhi0/rtHz"),
        expected: "0.259 and 0.297 uPhi0/rtHz, 1% each".into(),
        pass: rel(referral, 0.259) <= 0.01 && rel(squid_only, 0.297) <= 0.01,
    }
}

/// Largest epsilon_uc of the low-bandwidth array with the cryogenic RF
/// preamp over 5-50 MHz, and the frequency it occurs at.
pub fn low_bandwidth_cryo_epsilon_peak() -> (f64, f64) {
    let mut cfg = config_from_presets(&["c1", "48x3", "cryorf"])
        .and_then(|c| c.with_range(Some(5e6), Some(50e6), Some(100)))
        .expect("preset chain");
    cfg.outputs = vec![Output::EpsilonUc];
    run_sweep(&cfg)
        .rows
        .iter()
        .map(|r| (r.values[0].expect("epsilon_uc never fails"), r.f))
        .fold(
            (f64::NEG_INFINITY, 0.0),
            |a, b| if b.0 > a.0 { b } else { a },
        )
}

pub fn low_bandwidth_cryo_bound() -> Check {
    let (peak, at) = low_bandwidth_cryo_epsilon_peak();
    Check {
        id: 6,
        name: "epsilon_uc, 48x3 array + 2 K cryogenic RF preamp, 5-50 MHz",
        computed: format!("max {peak:.4} hbar at {:.2} MHz", at / 1e6),
        expected: "< 7.6 hbar at every point".into(),
        pass: peak < 7.6,
    }
}

/// Random consistent budget spanning four decades in each PSD.
fn random_budget(rng: &mut ChaCha8Rng) -> NoiseBudget {
    let s_ii = 10f64.powf(rng.random_range(-24.0..-20.0));
    let s_vv = 10f64.powf(rng.random_range(-20.0..-16.0));
    let c: f64 = rng.random_range(-0.95..0.95);
    NoiseBudget::new(w(1e7), s_ii, s_vv, c * (s_ii * s_vv).sqrt(), 0.0).expect("positive PSDs")
}

pub const ORACLE_SEED: u64 = 0x5eed_5c1d;
pub const ORACLE_BUDGETS: usize = 50;

pub fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut worst_t = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut worst_real = 0.0f64;
    let mut failures = 0;
    for _ in 0..ORACLE_BUDGETS {
        let b = random_budget(&mut rng);
        // Ranges from the uncorrelated scale only; |X_opt| never exceeds it.
        let s = (b.s_vv / b.s_ii_sys).sqrt();
        let r_range = SearchRange::new(s * 1e-3, s * 1e3);
        let x_range = SearchRange::new(-2.0 * s, 2.0 * s);
        match (
            brute_force_min_noise(&b, r_range, x_range, 300),
            brute_force_min_noise(&b, r_range, SearchRange::fixed(0.0), 300),
        ) {
            (Ok(m), Ok(real)) => {
                let t = t_min_complex(&b).expect("consistent");
                let z = optimal_complex_source(&b).expect("consistent");
                let dz = (m.z_at_min.re - z.re).hypot(m.z_at_min.im - z.im) / z.abs();
                worst_t = worst_t.max(rel(m.t_min, t));
                worst_z = worst_z.max(dz);
                worst_real = worst_real.max(rel(real.t_min, t_min_on_resonance(&b)));
            }
            _ => failures += 1,
        }
    }
    Check {
        id: 7,
        name: "brute-force oracle vs closed forms, 50 random budgets",
        computed: format!(
            "worst T_min {worst_t:.1e}, worst Z_opt {worst_z:.1e}, worst real-axis {worst_real:.1e}, {failures} oracle failures"
        ),
        expected: "all < 1e-3".into(),
        pass: failures == 0 && worst_t < 1e-3 && worst_z < 1e-3 && worst_real < 1e-3,
    }
}

pub fn tc_identities() -> Check {
    const TOL: f64 = 1e-14;
    let squid = FirstStageSquid::c1();
    let omega = w(30e6);
    let chain = tc_chain(0.1, 100e-9);
    let b = NoiseBudget::from_chain(&chain, omega).expect("TC chain");
    let unit = BOLTZMANN / (squid.noise_energy_scale() * omega.rad_per_s());

    let on_res = t_min_on_resonance(&b) * unit / (2.0 * 11f64.sqrt());
    let complex = t_min_complex(&b).expect("consistent") * unit / (2.0 * 2f64.sqrt());
    let n = input_referred_noise(&squid, &chain.coupling, omega);
    let fraction = n.im_s_iv.powi(2) / (n.s_vv * n.s_ii) / (144.0 / 176.0);
    let q = 1e6;
    let res = Resonator::from_target(30e6, q, 1e-6, 0.01).expect("valid resonator");
    let kg = match_on_resonance(&chain, &res).expect("matchable").kappa_g;
    let match_ratio = kg * kg * res.resonance().q / (4.0 / 11f64.sqrt());
    let euler = transfer_functions(&squid).triple_product();

    let ratios = [on_res, complex, fraction, match_ratio];
    let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    Check {
        id: 8,
        name: "TC identities",
        computed: format!(
            "2sqrt11 {:.1e}, 2sqrt2 {:.1e}, 144/176 {:.1e}, kappa_g^2 Q {:.1e} (relative errors); chain rule {euler}",
            (on_res - 1.0).abs(),
            (complex - 1.0).abs(),
            (fraction - 1.0).abs(),
            (match_ratio - 1.0).abs()
        ),
        expected: format!("relative errors <= {TOL:.0e}; chain rule -1"),
        pass: worst <= TOL && (euler + 1.0).abs() <= 2.0 * f64::EPSILON,
    }
}

pub fn detuned_match_cross_check() -> Check {
    let squid = FirstStageSquid::c1();
    let chain = tc_chain(0.1, 100e-9);
    let omega = w(30e6);
    let r = detuned_resonator_for_optimum(&chain, omega, 1e-6, 0.01).expect("realizable");
    let b = NoiseBudget::from_chain(&chain, omega).expect("TC chain");
    let t = noise_temperature(&b, r.impedance(omega)).expect("positive R");
    let coeff = t * BOLTZMANN / (squid.noise_energy_scale() * omega.rad_per_s());
    let dev = rel(coeff, 2.8);
    Check {
        id: 9,
        name: "detuned-resonator minimum vs 2.8 k_B T_j L_sq omega / R_j",
        computed: format!("coefficient {coeff:.5} ({:.2}% off)", dev * 100.0),
        expected: "within 1.5% of 2.8".into(),
        pass: dev <= 0.015,
    }
}

/// Resonator temperature that gives occupation `n` at `omega`.
fn temperature_for_occupation(omega: AngularFrequency, n: f64) -> f64 {
    HBAR * omega.rad_per_s() / (BOLTZMANN * (1.0 / n).ln_1p())
}

pub fn scan_match_properties() -> Check {
    let chain = ChainConfig::new(
        FirstStageSquid::c1(),
        InputCoupling::new(100e-9, 0.1).expect("valid"),
        SecondStageDesign::low_bandwidth(1.0).expect("preset"),
        vec![PreampBand::full_range(PreampModel::cryo_rf_2k())],
    )
    .expect("valid chain");
    let f0 = 20e6;
    let ltot = 1e-6;
    let res = |q: f64, t: f64| Resonator::from_target(f0, q, ltot, t).expect("valid resonator");
    let base = res(1e6, 0.01);
    let omega = base.resonance().omega0;
    let kg2 = |r: &Resonator| {
        match_scan_sensitivity(&chain, r, omega)
            .expect("matchable")
            .powi(2)
    };

    let q_ratio = kg2(&base) / kg2(&res(1e7, 0.01)) / 10.0;

    let kg = kg2(&base).sqrt();
    let matched = chain
        .with_coupling(InputCoupling::new(kg * kg * ltot / 0.01, 0.1).expect("valid coupling"));
    let achieved = full_system_imprecision(&matched, omega).expect("in band");
    let b = NoiseBudget::from_chain(&chain, omega).expect("in band");
    let n = thermal_occupation(omega, base.temperature()).expect("valid T");
    let target =
        scan_optimal_imprecision(omega, base.resistance(), eta(&b).expect("consistent"), n)
            .expect("valid inputs");
    let substitution = rel(achieved, target);

    let hot = |n: f64| res(1e6, temperature_for_occupation(omega, n));
    let doubling = kg2(&hot(2e4)) / kg2(&hot(1e4));

    Check {
        id: 10,
        name: "scan-sensitivity match",
        computed: format!(
            "Q scaling error {:.1e}, substitution error {substitution:.1e}, high-occupation ratio {doubling:.5}",
            (q_ratio - 1.0).abs()
        ),
        expected: "exact 1/Q, substitution <= 1e-6, ratio 2 within 0.1%".into(),
        pass: (q_ratio - 1.0).abs() <= 1e-12 && substitution <= 1e-6 && rel(doubling, 2.0) <= 1e-3,
    }
}

pub fn coupling_invariance() -> Check {
    let designs = [
        SecondStageDesign::high_bandwidth(1.0),
        SecondStageDesign::medium_bandwidth(1.0),
        SecondStageDesign::low_bandwidth(1.0),
    ]
    .map(|d| d.expect("preset"));
    let band_sets = [
        ChainConfig::room_temperature_bands(),
        vec![PreampBand::full_range(PreampModel::cryo_rf_2k())],
    ];
    let k2l = 1e-9;
    let mut worst = 0.0f64;
    for d in designs {
        for bands in &band_sets {
            let base = ChainConfig::new(
                FirstStageSquid::c1(),
                InputCoupling::new(k2l / 0.01, 0.1).expect("valid"),
                d,
                bands.clone(),
            )
            .expect("valid chain");
            for f in [10e6, 40e6, 200e6] {
                let omega = w(f);
                let e0 = eta(&NoiseBudget::from_chain(&base, omega).expect("in band")).expect("ok");
                let u0 = epsilon_uc_system(&base, omega).expect("in band");
                for kappa in [0.01, 0.3, 1.0] {
                    let c = base.with_coupling(
                        InputCoupling::new(k2l / (kappa * kappa), kappa).expect("valid"),
                    );
                    let e = eta(&NoiseBudget::from_chain(&c, omega).expect("in band")).expect("ok");
                    let u = epsilon_uc_system(&c, omega).expect("in band");
                    worst = worst.max(rel(e, e0)).max(rel(u, u0));
                }
            }
        }
    }
    Check {
        id: 11,
        name: "eta and epsilon_uc at fixed kappa^2 L_in, varying kappa and L_in",
        computed: format!("worst relative change {worst:.1e}"),
        expected: "<= 1e-9".into(),
        pass: worst <= 1e-9,
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        eta_tc(),
        on_resonance_sql_ratio(),
        epsilon_uc_tc_invariance(),
        array_design_table(),
        prototype_consistency(),
        low_bandwidth_cryo_bound(),
        oracle_equivalence(),
        tc_identities(),
        detuned_match_cross_check(),
        scan_match_properties(),
        coupling_invariance(),
    ]
}
