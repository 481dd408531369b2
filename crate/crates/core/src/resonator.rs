//! Series RLC resonator seen by the SQUID input coil.

use std::f64::consts::TAU;

use crate::error::{non_negative, positive, Result};
use crate::quantities::{AngularFrequency, ComplexImpedance, BOLTZMANN, HBAR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonator {
    /// L_res + L_in (H)
    total_inductance: f64,
    capacitance: f64,
    /// Series loss (Ohm)
    resistance: f64,
    /// Physical temperature (K)
    temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub omega0: AngularFrequency,
    pub q: f64,
}

impl Resonator {
    pub fn new(ltot: f64, cres: f64, r: f64, tres: f64) -> Result<Self> {
        Ok(Self {
            total_inductance: positive("Ltot", ltot)?,
            capacitance: positive("Cres", cres)?,
            resistance: positive("R", r)?,
            temperature: non_negative("Tres", tres)?,
        })
    }

    /// Builds the resonator with resonance `f0` (Hz) and quality factor `q`
    /// for a given total inductance.
    pub fn from_target(f0: f64, q: f64, ltot: f64, tres: f64) -> Result<Self> {
        let w0 = TAU * positive("f0", f0)?;
        let q = positive("Q", q)?;
        let ltot = positive("Ltot", ltot)?;
        Self::new(ltot, 1.0 / (w0 * w0 * ltot), w0 * ltot / q, tres)
    }

    pub fn total_inductance(&self) -> f64 {
        self.total_inductance
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    pub fn resistance(&self) -> f64 {
        self.resistance
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn impedance(&self, omega: AngularFrequency) -> ComplexImpedance {
        let w = omega.rad_per_s();
        ComplexImpedance::new(
            self.resistance,
            w * self.total_inductance - 1.0 / (w * self.capacitance),
        )
    }

    pub fn resonance(&self) -> Resonance {
        let w0 = 1.0 / (self.total_inductance * self.capacitance).sqrt();
        Resonance {
            omega0: AngularFrequency::new(w0).expect("positive by construction"),
            q: w0 * self.total_inductance / self.resistance,
        }
    }
}

/// Bose occupation 1/(exp(hbar w / k_B T) - 1); zero at T = 0.
pub fn thermal_occupation(omega: AngularFrequency, tres: f64) -> Result<f64> {
    let t = non_negative("Tres", tres)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega.rad_per_s() / (BOLTZMANN * t);
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample() -> Resonator {
        Resonator::new(1e-6, 1e-9, 1.0, 0.01).unwrap()
    }

    #[test]
    fn on_resonance_impedance_is_real() {
        let r = sample();
        let z = r.impedance(r.resonance().omega0);
        assert!(z.im.abs() < 1e-9);
        assert_eq!(z.re, 1.0);
    }

    #[test]
    fn twice_resonance() {
        let r = sample();
        let w0 = r.resonance().omega0;
        let z = r.impedance(w0.scaled(2.0).unwrap());
        assert_relative_eq!(z.im, 1.5 * w0.rad_per_s() * 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn impedance_at_10_mhz() {
        let z = sample().impedance(AngularFrequency::from_hz(10e6).unwrap());
        assert_eq!(z.re, 1.0);
        assert_relative_eq!(z.im, 62.83185 - 15.91549, max_relative = 1e-6);
        assert_relative_eq!(z.im, 46.92, max_relative = 1e-3);
    }

    #[test]
    fn resonance_and_q() {
        let r = sample();
        assert_relative_eq!(r.resonance().omega0.hz(), 5.033e6, max_relative = 1e-4);
        let lossy = Resonator::new(1e-6, 1e-9, 0.0316, 0.01).unwrap();
        assert_relative_eq!(lossy.resonance().q, 1.0e3, max_relative = 1e-3);
        let w0 = r.resonance().omega0.rad_per_s();
        let unity = Resonator::new(1e-6, 1e-9, w0 * 1e-6, 0.01).unwrap();
        assert_relative_eq!(unity.resonance().q, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn build_from_target_values() {
        let r = Resonator::from_target(5.033e6, 1e6, 1e-6, 0.01).unwrap();
        assert_relative_eq!(r.capacitance(), 1e-9, max_relative = 1e-3);
        assert_relative_eq!(r.resistance(), 31.6e-6, max_relative = 1e-3);
        let unity = Resonator::from_target(5.0e6, 1.0, 1e-6, 0.01).unwrap();
        assert_relative_eq!(unity.resistance(), TAU * 5.0e6 * 1e-6, max_relative = 1e-15);
        assert!(Resonator::from_target(f64::INFINITY, 1.0, 1e-6, 0.01).is_err());
        assert!(Resonator::from_target(1e6, f64::NAN, 1e-6, 0.01).is_err());
    }

    #[test]
    fn occupation_values() {
        // hbar w = k_B T
        let w = AngularFrequency::new(BOLTZMANN * 0.05 / HBAR).unwrap();
        assert_relative_eq!(
            thermal_occupation(w, 0.05).unwrap(),
            0.5820,
            max_relative = 1e-4
        );
        assert_eq!(thermal_occupation(w, 0.0).unwrap(), 0.0);
        let n = thermal_occupation(AngularFrequency::from_hz(30e6).unwrap(), 0.010).unwrap();
        assert_relative_eq!(n, 6.45, max_relative = 2e-3);
        assert!(thermal_occupation(w, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn target_round_trip(f0 in 1e3f64..3e8, q in 1.0f64..1e8, ltot in 1e-9f64..1e-3) {
            let res = Resonator::from_target(f0, q, ltot, 0.01).unwrap().resonance();
            prop_assert!((res.omega0.hz() / f0 - 1.0).abs() < 1e-9);
            prop_assert!((res.q / q - 1.0).abs() < 1e-9);
        }

        #[test]
        fn impedance_magnitude_minimal_at_resonance(
            f0 in 1e5f64..3e8, q in 1.0f64..1e6, ratio in 0.01f64..100.0,
        ) {
            let r = Resonator::from_target(f0, q, 1e-6, 0.01).unwrap();
            let w0 = r.resonance().omega0;
            let z0 = r.impedance(w0).abs();
            prop_assert!((z0 / r.resistance() - 1.0).abs() < 1e-6);
            prop_assert!(r.impedance(w0.scaled(ratio).unwrap()).abs() >= z0 * (1.0 - 1e-9));
        }

        #[test]
        fn rayleigh_jeans_limit(f in 1e5f64..3e8, mult in 10.0f64..1e4) {
            let w = AngularFrequency::from_hz(f).unwrap();
            let t = mult * HBAR * w.rad_per_s() / BOLTZMANN;
            let n = thermal_occupation(w, t).unwrap();
            let classical = BOLTZMANN * t / (HBAR * w.rad_per_s()) - 0.5;
            prop_assert!((n / classical - 1.0).abs() < 0.01);
        }
    }
}
