//! Grid search plus golden-section refinement over source impedance. Shares
//! no code with the closed forms it checks.

use rayon::prelude::*;

use super::NoiseBudget;
use crate::error::{positive, Error, Result};
use crate::quantities::{ComplexImpedance, BOLTZMANN};

const MIN_GRID_POINTS: usize = 100;
const REFINE_TOLERANCE: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Closed interval searched on one axis. `lo == hi` pins the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRange {
    pub lo: f64,
    pub hi: f64,
}

impl SearchRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(value: f64) -> Self {
        Self {
            lo: value,
            hi: value,
        }
    }

    fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMinimum {
    /// K
    pub t_min: f64,
    pub z_at_min: ComplexImpedance,
}

fn objective(b: &NoiseBudget, r: f64, x: f64) -> f64 {
    let mag2 = r * r + x * x;
    (b.s_vv + mag2 * b.s_ii_sys - 2.0 * x * b.im_s_iv + 2.0 * r * b.re_s_iv) / (4.0 * BOLTZMANN * r)
}

/// Minimizes the noise temperature over a log grid in R and a linear grid
/// in X, then polishes the best cell by alternating golden-section searches.
/// Fails if the grid minimum sits on the edge of a non-fixed axis.
pub fn brute_force_min_noise(
    budget: &NoiseBudget,
    r_range: SearchRange,
    x_range: SearchRange,
    grid_points: usize,
) -> Result<OracleMinimum> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            value: grid_points as f64,
            reason: "need at least 100 points per axis",
        });
    }
    let r_lo = positive("R_range.lo", r_range.lo)?;
    let r_hi = positive("R_range.hi", r_range.hi)?;
    let x_ok = x_range.lo.is_finite() && x_range.hi.is_finite() && x_range.lo <= x_range.hi;
    if r_lo >= r_hi || !x_ok {
        return Err(Error::InvalidParameter {
            name: "range",
            value: r_lo,
            reason: "search ranges must be finite with lo < hi",
        });
    }

    let log_step = (r_hi / r_lo).ln() / (grid_points - 1) as f64;
    let rs: Vec<f64> = (0..grid_points)
        .map(|i| r_lo * (log_step * i as f64).exp())
        .collect();
    let xs: Vec<f64> = if x_range.is_fixed() {
        vec![x_range.lo]
    } else {
        let step = (x_range.hi - x_range.lo) / (grid_points - 1) as f64;
        (0..grid_points)
            .map(|j| x_range.lo + step * j as f64)
            .collect()
    };

    // Each row reports its own best column; rows are reduced in index order
    // so the answer does not depend on how rayon splits the work.
    let rows: Vec<(f64, usize)> = rs
        .par_iter()
        .map(|&r| {
            xs.iter()
                .enumerate()
                .map(|(j, &x)| (objective(budget, r, x), j))
                .fold(
                    (f64::INFINITY, 0),
                    |best, c| if c.0 < best.0 { c } else { best },
                )
        })
        .collect();
    let (i, &(_, j)) =
        rows.iter().enumerate().fold(
            (0, &rows[0]),
            |best, c| if c.1 .0 < best.1 .0 { c } else { best },
        );

    if i == 0 || i == rs.len() - 1 {
        return Err(Error::OracleBoundary { axis: "R" });
    }
    if xs.len() > 1 && (j == 0 || j == xs.len() - 1) {
        return Err(Error::OracleBoundary { axis: "X" });
    }

    let (ln_r_lo, ln_r_hi) = (rs[i - 1].ln(), rs[i + 1].ln());
    let (x_lo, x_hi) = if xs.len() > 1 {
        (xs[j - 1], xs[j + 1])
    } else {
        (xs[0], xs[0])
    };
    let mut r = rs[i];
    let mut x = xs[j];
    for _ in 0..100 {
        let new_x = if xs.len() > 1 {
            golden(
                |x| objective(budget, r, x),
                x_lo,
                x_hi,
                REFINE_TOLERANCE * (x.abs() + r),
            )
        } else {
            x
        };
        let new_r = golden(
            |ln_r| objective(budget, ln_r.exp(), new_x),
            ln_r_lo,
            ln_r_hi,
            REFINE_TOLERANCE,
        )
        .exp();
        let settled = (new_r - r).abs() <= REFINE_TOLERANCE * r
            && (new_x - x).abs() <= REFINE_TOLERANCE * (x.abs() + r);
        r = new_r;
        x = new_x;
        if settled {
            break;
        }
    }
    Ok(OracleMinimum {
        t_min: objective(budget, r, x),
        z_at_min: ComplexImpedance::new(r, x),
    })
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
