//! First-stage dc SQUID at its optimal noise bias ("TC" limit): weakly coupled,
//! voltage biased, white-noise regime.
//!
//! Response-function prefactors are rounded to unity: dV/dPhi = R_j/L_sq and
//! R_dyn = R_j. The flux-to-current response of the voltage-biased SQUID then
//! follows from the triple product rule.

use crate::error::{positive, Advisory, Result};
use crate::quantities::{AngularFrequency, BOLTZMANN, FLUX_QUANTUM};

/// Regime in which the optimum-bias transfer functions hold.
pub const GAMMA_ADVISORY_LIMIT: f64 = 0.025;
pub const BETA_ADVISORY_RANGE: (f64, f64) = (0.5, 2.0);

// TC noise coefficients (in units of k_B T_j and powers of R_j).
const VOLTAGE_NOISE_COEFF: f64 = 16.0;
const CIRCULATING_NOISE_COEFF: f64 = 11.0;
const CROSS_NOISE_COEFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstStageSquid {
    critical_current: f64,
    shunt_resistance: f64,
    loop_inductance: f64,
    shunt_temperature: f64,
    junction_capacitance: Option<f64>,
}

impl FirstStageSquid {
    /// `i0` per-junction critical current (A), `rj` per-junction shunt (Ohm),
    /// `lsq` loop inductance (H), `tj` shunt electron temperature (K).
    pub fn new(i0: f64, rj: f64, lsq: f64, tj: f64) -> Result<Self> {
        Ok(Self {
            critical_current: positive("I0", i0)?,
            shunt_resistance: positive("Rj", rj)?,
            loop_inductance: positive("Lsq", lsq)?,
            shunt_temperature: positive("Tj", tj)?,
            junction_capacitance: None,
        })
    }

    pub fn with_junction_capacitance(mut self, cj: f64) -> Result<Self> {
        self.junction_capacitance = Some(positive("Cj", cj)?);
        Ok(self)
    }

    /// The "C1" SQUID: 6.3 uA, 6 Ohm, 200 pH, shunts self-heated
    /// to 150 mK. Junction capacitance is not published.
    pub fn c1() -> Self {
        Self::new(6.3e-6, 6.0, 200e-12, 0.150).expect("preset is valid")
    }

    pub fn critical_current(&self) -> f64 {
        self.critical_current
    }

    pub fn shunt_resistance(&self) -> f64 {
        self.shunt_resistance
    }

    pub fn loop_inductance(&self) -> f64 {
        self.loop_inductance
    }

    pub fn shunt_temperature(&self) -> f64 {
        self.shunt_temperature
    }

    pub fn junction_capacitance(&self) -> Option<f64> {
        self.junction_capacitance
    }

    /// k_B T_j L_sq / R_j, the energy scale (J/Hz) every TC noise term is a
    /// multiple of.
    pub(crate) fn noise_energy_scale(&self) -> f64 {
        BOLTZMANN * self.shunt_temperature * self.loop_inductance / self.shunt_resistance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcFiguresOfMerit {
    pub beta_l: f64,
    pub beta_c: Option<f64>,
    pub gamma: f64,
    pub advisories: Vec<Advisory>,
}

pub fn tc_figures_of_merit(squid: &FirstStageSquid) -> TcFiguresOfMerit {
    let beta_l = squid.loop_inductance * squid.critical_current / FLUX_QUANTUM;
    let beta_c = squid.junction_capacitance.map(|cj| {
        std::f64::consts::PI * squid.critical_current * squid.shunt_resistance.powi(2) * cj
            / FLUX_QUANTUM
    });
    let gamma = std::f64::consts::TAU * BOLTZMANN * squid.shunt_temperature
        / (squid.critical_current * FLUX_QUANTUM);

    let in_range = |b: f64| (BETA_ADVISORY_RANGE.0..=BETA_ADVISORY_RANGE.1).contains(&b);
    let mut advisories = Vec::new();
    if !in_range(beta_l) {
        advisories.push(Advisory::BetaLOutsideOptimum(beta_l));
    }
    if let Some(bc) = beta_c.filter(|&b| !in_range(b)) {
        advisories.push(Advisory::BetaCOutsideOptimum(bc));
    }
    if gamma > GAMMA_ADVISORY_LIMIT {
        advisories.push(Advisory::GammaTooLarge(gamma));
    }

    TcFiguresOfMerit {
        beta_l,
        beta_c,
        gamma,
        advisories,
    }
}

/// Small-signal response of the first stage at the optimal bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunctions {
    /// dV/dPhi at fixed output current (V/Wb).
    pub flux_to_voltage: f64,
    /// dV/dI at fixed flux (Ohm).
    pub dynamic_resistance: f64,
    /// dI/dPhi at fixed output voltage (A/Wb).
    pub flux_to_current: f64,
}

impl TransferFunctions {
    /// (dI/dPhi)|_V (dPhi/dV)|_I (dV/dI)|_Phi, which must equal -1.
    pub fn triple_product(&self) -> f64 {
        self.flux_to_current * self.dynamic_resistance / self.flux_to_voltage
    }
}

pub fn transfer_functions(squid: &FirstStageSquid) -> TransferFunctions {
    let flux_to_voltage = squid.shunt_resistance / squid.loop_inductance;
    let dynamic_resistance = squid.shunt_resistance;
    TransferFunctions {
        flux_to_voltage,
        dynamic_resistance,
        flux_to_current: -1.0 / squid.loop_inductance,
    }
}

/// Open-input TC noise of the bare SQUID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareOutputNoise {
    /// Output voltage PSD (V^2/Hz).
    pub voltage_out: f64,
    /// Circulating loop current PSD (A^2/Hz).
    pub circulating_current: f64,
    /// Real cross PSD of circulating current and output voltage (A V/Hz).
    pub cross: f64,
}

pub fn bare_output_noise(squid: &FirstStageSquid) -> BareOutputNoise {
    let kt = BOLTZMANN * squid.shunt_temperature;
    BareOutputNoise {
        voltage_out: VOLTAGE_NOISE_COEFF * kt * squid.shunt_resistance,
        circulating_current: CIRCULATING_NOISE_COEFF * kt / squid.shunt_resistance,
        cross: CROSS_NOISE_COEFF * kt,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputCoupling {
    input_inductance: f64,
    kappa: f64,
}

impl InputCoupling {
    /// `lin` input-coil inductance (H), `kappa` coupling constant in (0, 1].
    pub fn new(lin: f64, kappa: f64) -> Result<Self> {
        let kappa = positive("kappa", kappa)?;
        if kappa > 1.0 {
            return Err(crate::Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must not exceed 1",
            });
        }
        Ok(Self {
            input_inductance: positive("Lin", lin)?,
            kappa,
        })
    }

    pub fn input_inductance(&self) -> f64 {
        self.input_inductance
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// kappa^2 L_in (H); every referred PSD depends on the coupling only
    /// through this product.
    pub fn kappa_sq_lin(&self) -> f64 {
        self.kappa * self.kappa * self.input_inductance
    }

    pub fn mutual_inductance(&self, squid: &FirstStageSquid) -> f64 {
        self.kappa * (squid.loop_inductance * self.input_inductance).sqrt()
    }
}

/// First-stage noise referred to the input circuit at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstStageNoise {
    /// Imprecision current PSD (A^2/Hz).
    pub s_ii: f64,
    /// Backaction voltage PSD (V^2/Hz).
    pub s_vv: f64,
    /// Imaginary part of the current-voltage cross PSD (A V/Hz).
    ///
    /// Only its square is fixed by TC theory. It is stored positive, and the
    /// total-noise form used in [`crate::matching`] subtracts
    /// 2 Im(Z) Im(S_IV), so the optimal source reactance is inductive.
    /// Flip the sign here and nowhere else if a measurement says otherwise.
    pub im_s_iv: f64,
    pub omega: AngularFrequency,
}

pub fn input_referred_noise(
    squid: &FirstStageSquid,
    coupling: &InputCoupling,
    omega: AngularFrequency,
) -> FirstStageNoise {
    let scale = squid.noise_energy_scale();
    let k2l = coupling.kappa_sq_lin();
    let w = omega.rad_per_s();
    FirstStageNoise {
        s_ii: VOLTAGE_NOISE_COEFF * scale / k2l,
        s_vv: CIRCULATING_NOISE_COEFF * scale * k2l * w * w,
        im_s_iv: CROSS_NOISE_COEFF * scale * w,
        omega,
    }
}

/// Uncoupled energy sensitivity 8 k_B T_j L_sq / R_j (J/Hz).
pub fn epsilon_uc_first_stage(squid: &FirstStageSquid) -> f64 {
    0.5 * VOLTAGE_NOISE_COEFF * squid.noise_energy_scale()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::HBAR;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn w(f: f64) -> AngularFrequency {
        AngularFrequency::from_hz(f).unwrap()
    }

    #[test]
    fn c1_figures_of_merit() {
        let fom = tc_figures_of_merit(&FirstStageSquid::c1());
        assert_relative_eq!(fom.beta_l, 0.609, max_relative = 1e-3);
        assert_relative_eq!(fom.gamma, 1.0e-3, max_relative = 2e-3);
        assert!(fom.beta_c.is_none());
        assert!(fom.advisories.is_empty());
    }

    #[test]
    fn beta_l_unity_and_advisories() {
        let i0 = 10e-6;
        let squid = FirstStageSquid::new(i0, 6.0, FLUX_QUANTUM / i0, 0.1).unwrap();
        assert_relative_eq!(tc_figures_of_merit(&squid).beta_l, 1.0, epsilon = 1e-15);

        // hot and badly inductive: both flags, never an error
        let hot = FirstStageSquid::new(1e-6, 6.0, 10e-9, 20.0)
            .unwrap()
            .with_junction_capacitance(1e-12)
            .unwrap();
        let fom = tc_figures_of_merit(&hot);
        assert!(fom.beta_c.is_some());
        assert!(fom
            .advisories
            .iter()
            .any(|a| matches!(a, Advisory::BetaLOutsideOptimum(_))));
        assert!(fom
            .advisories
            .iter()
            .any(|a| matches!(a, Advisory::GammaTooLarge(_))));
    }

    #[test]
    fn c1_transfer_functions() {
        let tf = transfer_functions(&FirstStageSquid::c1());
        assert_relative_eq!(tf.flux_to_voltage, 3.0e10, max_relative = 1e-12);
        assert_relative_eq!(tf.dynamic_resistance, 6.0);
        assert_relative_eq!(tf.flux_to_current, -5.0e9, max_relative = 1e-12);
        assert!((tf.triple_product() + 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn doubling_rj_doubles_flux_to_voltage_only() {
        let a = transfer_functions(&FirstStageSquid::new(6.3e-6, 6.0, 200e-12, 0.15).unwrap());
        let b = transfer_functions(&FirstStageSquid::new(6.3e-6, 12.0, 200e-12, 0.15).unwrap());
        assert_relative_eq!(b.flux_to_voltage, 2.0 * a.flux_to_voltage);
        assert_relative_eq!(b.flux_to_current, a.flux_to_current);
    }

    #[test]
    fn c1_bare_noise() {
        let n = bare_output_noise(&FirstStageSquid::c1());
        assert_relative_eq!(n.voltage_out, 1.988e-22, max_relative = 1e-3);
        let ratio = n.cross / (n.voltage_out * n.circulating_current).sqrt();
        assert_relative_eq!(ratio, 12.0 / 176f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(ratio, 0.9045, max_relative = 1e-4);

        let cold = bare_output_noise(&FirstStageSquid::new(6.3e-6, 6.0, 200e-12, 1e-12).unwrap());
        assert_relative_eq!(
            cold.voltage_out,
            n.voltage_out * 1e-12 / 0.15,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cold.circulating_current,
            n.circulating_current * 1e-12 / 0.15,
            max_relative = 1e-12
        );
    }

    #[test]
    fn c1_input_referred_imprecision() {
        // kappa^2 Lin = 1 nH
        let coupling = InputCoupling::new(4e-9, 0.5).unwrap();
        let n = input_referred_noise(&FirstStageSquid::c1(), &coupling, w(30e6));
        assert_relative_eq!(n.s_ii, 1.105e-21, max_relative = 1e-3);
    }

    #[test]
    fn zero_kappa_rejected() {
        assert!(InputCoupling::new(1e-9, 0.0).is_err());
        assert!(InputCoupling::new(1e-9, 1.2).is_err());
        assert!(InputCoupling::new(0.0, 0.5).is_err());
        assert!(InputCoupling::new(1e-9, 1.0).is_ok());
    }

    #[test]
    fn frequency_dependence() {
        let squid = FirstStageSquid::c1();
        let c = InputCoupling::new(50e-9, 0.1).unwrap();
        let a = input_referred_noise(&squid, &c, w(10e6));
        let b = input_referred_noise(&squid, &c, w(20e6));
        assert_relative_eq!(b.s_vv, 4.0 * a.s_vv, max_relative = 1e-14);
        assert_relative_eq!(b.im_s_iv, 2.0 * a.im_s_iv, max_relative = 1e-14);
        assert_eq!(a.s_ii, b.s_ii);
    }

    #[test]
    fn c1_energy_sensitivity() {
        let squid = FirstStageSquid::c1();
        assert_relative_eq!(
            epsilon_uc_first_stage(&squid) / HBAR,
            5.24,
            max_relative = 1e-3
        );
        let doubled = FirstStageSquid::new(6.3e-6, 12.0, 200e-12, 0.15).unwrap();
        assert_relative_eq!(
            epsilon_uc_first_stage(&doubled),
            0.5 * epsilon_uc_first_stage(&squid),
            max_relative = 1e-14
        );
    }

    fn squid_strategy() -> impl Strategy<Value = FirstStageSquid> {
        (1e-7f64..1e-4, 0.1f64..50.0, 1e-12f64..1e-9, 1e-3f64..10.0)
            .prop_map(|(i0, rj, lsq, tj)| FirstStageSquid::new(i0, rj, lsq, tj).unwrap())
    }

    proptest! {
        #[test]
        fn correlation_fraction_is_144_over_176(
            squid in squid_strategy(),
            lin in 1e-10f64..1e-5,
            kappa in 1e-3f64..1.0,
            f in 1e3f64..3e8,
        ) {
            let c = InputCoupling::new(lin, kappa).unwrap();
            let n = input_referred_noise(&squid, &c, w(f));
            let frac = n.im_s_iv.powi(2) / (n.s_vv * n.s_ii);
            prop_assert!((frac - 144.0 / 176.0).abs() < 1e-14);
            prop_assert!(n.s_vv * n.s_ii >= n.im_s_iv.powi(2));
        }

        #[test]
        fn coupling_invariant_products(
            squid in squid_strategy(),
            lin_a in 1e-10f64..1e-5, kappa_a in 1e-3f64..1.0,
            lin_b in 1e-10f64..1e-5, kappa_b in 1e-3f64..1.0,
            f in 1e3f64..3e8,
        ) {
            let ca = InputCoupling::new(lin_a, kappa_a).unwrap();
            let cb = InputCoupling::new(lin_b, kappa_b).unwrap();
            let a = input_referred_noise(&squid, &ca, w(f));
            let b = input_referred_noise(&squid, &cb, w(f));
            let rel = |x: f64, y: f64| ((x - y) / y).abs();
            prop_assert!(rel(a.s_ii * ca.kappa_sq_lin(), b.s_ii * cb.kappa_sq_lin()) < 1e-13);
            prop_assert!(rel(a.s_vv / ca.kappa_sq_lin(), b.s_vv / cb.kappa_sq_lin()) < 1e-13);
            prop_assert_eq!(a.im_s_iv, b.im_s_iv);
        }

        #[test]
        fn bare_and_referred_noise_agree(
            squid in squid_strategy(),
            lin in 1e-10f64..1e-5,
            kappa in 1e-3f64..1.0,
            f in 1e3f64..3e8,
        ) {
            let c = InputCoupling::new(lin, kappa).unwrap();
            let omega = w(f);
            let n = input_referred_noise(&squid, &c, omega);
            let bare = bare_output_noise(&squid);
            let tf = transfer_functions(&squid);
            let m = c.mutual_inductance(&squid);
            let s_ii = bare.voltage_out / (tf.flux_to_voltage.powi(2) * m * m);
            let s_vv = omega.rad_per_s().powi(2) * m * m * bare.circulating_current;
            prop_assert!(((s_ii - n.s_ii) / n.s_ii).abs() < 1e-12);
            prop_assert!(((s_vv - n.s_vv) / n.s_vv).abs() < 1e-12);
            // epsilon_uc = M^2 S_II / (2 Lsq)
            let eps = m * m * n.s_ii / (2.0 * squid.loop_inductance());
            prop_assert!(((eps - epsilon_uc_first_stage(&squid)) / eps).abs() < 1e-12);
            prop_assert!(((0.5 * c.kappa_sq_lin() * n.s_ii - eps) / eps).abs() < 1e-12);
        }

        #[test]
        fn triple_product_is_minus_one(squid in squid_strategy()) {
            prop_assert!((transfer_functions(&squid).triple_product() + 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }
}
