//! Stationary spacing distribution of a continuous split law.
//!
//! With `a = C(b − 1)` the stationary CDF is
//! `u(x) = C x^{−a} ∫_0^x F(s) s^{a−1} ds`, and `C` is fixed by `u(1) = 1`.
//! Integrals are evaluated after the substitution `s = x t^{1/a}`, which turns
//! them into `(1/(b−1)) ∫_0^1 F(x t^{1/a}) dt` and removes the endpoint
//! singularity.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::laws::SplitLaw;
use crate::quad::integrate;

/// Search bracket for `C`.
pub const C_BRACKET: (f64, f64) = (1e-3, 1e3);

const REL_TOL: f64 = 1e-13;
const ABS_TOL: f64 = 1e-15;
const MONOTONE_SAMPLES: usize = 48;

/// Finite-difference step used by [`ode_residual`].
pub const ODE_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub law: SplitLaw,
    pub b: u32,
    /// The constant `C = u'(1)`.
    pub c: f64,
    /// `|C ∫_0^1 F(s) s^{C(b−1)−1} ds − 1|` at the returned `C`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub x: f64,
    pub u: f64,
}

fn require_positive_density(law: &SplitLaw) -> Result<()> {
    if !law.is_continuous() {
        return Err(Error::Unsupported {
            law: law.to_string(),
            reason: "the stationary solution needs a continuous law".into(),
        });
    }
    for i in 0..256 {
        let x = i as f64 / 256.0;
        let f = law.density_unchecked(x);
        if !(f > 0.0) || !f.is_finite() {
            return Err(invalid(
                "law",
                format!("density must be positive on [0, 1); f({x}) = {f}"),
            ));
        }
    }
    Ok(())
}

/// `(1/(b−1)) ∫_0^1 F(x t^{1/a}) dt`.
fn mean_integral(law: &SplitLaw, a: f64, x: f64) -> Result<f64> {
    let b1 = (law.children() - 1) as f64;
    let v = integrate(
        |t: f64| law.expected_count_unchecked(x * t.powf(1.0 / a)),
        0.0,
        1.0,
        REL_TOL,
        ABS_TOL,
    )?;
    Ok(v.value / b1)
}

/// `g(C) = C ∫_0^1 F(s) s^{C(b−1)−1} ds − 1`.
fn g(law: &SplitLaw, c: f64) -> Result<f64> {
    let a = c * (law.children() - 1) as f64;
    Ok(mean_integral(law, a, 1.0)? - 1.0)
}

/// `g'(C) = a^{-2} ∫_0^1 f(t^{1/a}) t^{1/a} (−ln t) dt · (b − 1) / (b − 1)`.
fn g_prime(law: &SplitLaw, c: f64) -> Result<f64> {
    let a = c * (law.children() - 1) as f64;
    let v = integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let s = t.powf(1.0 / a);
            law.density_unchecked(s) * s * (-t.ln())
        },
        0.0,
        1.0,
        REL_TOL,
        ABS_TOL,
    )?;
    Ok(v.value / (a * a))
}

/// The positive root of `g(C) = 0` on [`C_BRACKET`].
pub fn solve_stationary_constant(law: &SplitLaw) -> Result<f64> {
    solve(law).map(|(c, _)| c)
}

fn solve(law: &SplitLaw) -> Result<(f64, f64)> {
    require_positive_density(law)?;
    let (lo, hi) = C_BRACKET;
    let ratio = (hi / lo).ln();
    let samples: Vec<f64> = (0..=MONOTONE_SAMPLES)
        .map(|k| g(law, lo * (ratio * k as f64 / MONOTONE_SAMPLES as f64).exp()))
        .collect::<Result<_>>()?;
    if samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NotMonotone {
            what: "C ∫ F(s) s^{C(b−1)−1} ds − 1",
        });
    }
    let (g_lo, g_hi) = (samples[0], samples[MONOTONE_SAMPLES]);
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::Bracketing {
            what: "the stationary constant C",
            lo,
            hi,
        });
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = (a * b).sqrt();
        if g(law, mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b / a - 1.0 < 1e-8 {
            break;
        }
    }
    let mut c = (a * b).sqrt();
    let mut value = g(law, c)?;
    for _ in 0..20 {
        if value.abs() < 1e-14 {
            break;
        }
        let next = c - value / g_prime(law, c)?;
        if !(next >= lo && next <= hi) {
            break;
        }
        let next_value = g(law, next)?;
        if next_value.abs() >= value.abs() {
            break;
        }
        c = next;
        value = next_value;
    }
    Ok((c, value.abs()))
}

impl StationarySolution {
    pub fn solve(law: &SplitLaw) -> Result<Self> {
        let (c, residual) = solve(law)?;
        Ok(Self {
            law: law.clone(),
            b: law.children(),
            c,
            residual,
        })
    }

    /// `a = C(b − 1)`.
    pub fn exponent(&self) -> f64 {
        self.c * (self.b - 1) as f64
    }

    /// `u(x)` for `0 < x ≤ 1`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "(0, 1]",
            });
        }
        mean_integral(&self.law, self.exponent(), x)
    }

    /// `u` on `points` equally spaced points of `(0, 1]`.
    pub fn tabulate(&self, points: usize) -> Result<Vec<CdfPoint>> {
        if points == 0 {
            return Err(invalid("points", "need at least one grid point"));
        }
        (1..=points)
            .map(|i| {
                let x = i as f64 / points as f64;
                Ok(CdfPoint { x, u: self.cdf(x)? })
            })
            .collect()
    }

    /// `max |u'(x) + C(b−1)u/x − C F(x)/x|` over the grid.
    pub fn ode_residual(&self, grid: &[f64]) -> Result<f64> {
        ode_residual(&self.law, self.c, |x| self.cdf(x), grid)
    }
}

/// `max |u'(x) + C(b−1)u/x − C F(x)/x|` for an arbitrary candidate `u`, with
/// `u'` by central differences of step [`ODE_STEP`] (one-sided near the ends).
pub fn ode_residual<U: Fn(f64) -> Result<f64>>(
    law: &SplitLaw,
    c: f64,
    u: U,
    grid: &[f64],
) -> Result<f64> {
    let a = c * (law.children() - 1) as f64;
    let h = ODE_STEP;
    let mut worst = 0.0f64;
    for &x in grid {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "(0, 1]",
            });
        }
        let ux = u(x)?;
        let du = if x + h > 1.0 {
            (3.0 * ux - 4.0 * u(x - h)? + u(x - 2.0 * h)?) / (2.0 * h)
        } else if x - h <= 0.0 {
            (-3.0 * ux + 4.0 * u(x + h)? - u(x + 2.0 * h)?) / (2.0 * h)
        } else {
            (u(x + h)? - u(x - h)?) / (2.0 * h)
        };
        let f = law.expected_count(x)?;
        worst = worst.max((du + a * ux / x - c * f / x).abs());
    }
    Ok(worst)
}
