//! Density of the largest spacing and subtree-size profiles.
//!
//! `H(y)` solves `H(y) = f(y) + ∫_y^1 f(y/t) H(t) / t dt`. For the m-ary law
//! it is a combination `Σ C_i y^{−z_i}` over the roots of
//! `z(z+1)⋯(z+m−2) = m!`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::laws::SplitLaw;

/// Largest `m` accepted by the root and Cauchy–Euler routines.
pub const MAX_ARITY: u32 = 40;

/// `Re(z_2)` below this is classified stationary.
pub const STATIONARITY_THRESHOLD: f64 = 1.5;

/// Pointwise relative Richardson estimate above which a grid is too coarse.
pub const RICHARDSON_TOLERANCE: f64 = 1e-3;

const ROOT_SEPARATION: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e12;

/// Grid solution of the Volterra equation.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub law: SplitLaw,
    /// Decreasing from 1 to `y_min`, uniform in `ln y`.
    pub grid: Vec<f64>,
    pub h: Vec<f64>,
    /// Max over the grid of `|H_h − H_{2h}| / (3|H_h|)`.
    pub richardson_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub y: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl ProfileSolution {
    pub fn points(&self) -> Vec<ProfilePoint> {
        self.grid
            .iter()
            .zip(&self.h)
            .map(|(&y, &h)| ProfilePoint { y, h })
            .collect()
    }

    /// `H(y)` by cubic interpolation in `ln y`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let y_min = *self.grid.last().expect("grid is non-empty");
        if !(y >= y_min * (1.0 - 1e-12) && y <= 1.0) {
            return Err(Error::Domain {
                what: "y",
                value: y,
                domain: "[y_min, 1]",
            });
        }
        let n = self.grid.len();
        let step = -self.grid[1].ln();
        let pos = -y.ln() / step;
        let base = (pos.floor() as usize).saturating_sub(1).min(n - 4);
        let mut value = 0.0;
        for i in base..base + 4 {
            let mut w = 1.0;
            for k in base..base + 4 {
                if k != i {
                    w *= (pos - k as f64) / (i as f64 - k as f64);
                }
            }
            value += w * self.h[i];
        }
        Ok(value)
    }
}

/// Trapezoid solve on `s = −ln y` with spacing `step`, returning `H` at
/// `y_j = e^{−j·step}` for `j < n`.
fn volterra_trapezoid(phi: &[f64], n: usize, stride: usize, step: f64) -> Vec<f64> {
    let f = |d: usize| phi[d * stride];
    let mut h = Vec::with_capacity(n);
    h.push(f(0));
    let diag = 1.0 - 0.5 * step * f(0);
    for j in 1..n {
        let mut acc = 0.5 * f(j) * h[0];
        for k in 1..j {
            acc += f(j - k) * h[k];
        }
        h.push((f(j) + step * acc) / diag);
    }
    h
}

/// Solves for `H` on `grid_size` points between 1 and `y_min`.
pub fn solve_volterra_h(law: &SplitLaw, y_min: f64, grid_size: usize) -> Result<ProfileSolution> {
    if !law.is_continuous() {
        return Err(Error::Unsupported {
            law: law.to_string(),
            reason: "H(y) is defined for continuous laws".into(),
        });
    }
    if !(y_min > 0.0 && y_min < 1.0) {
        return Err(Error::Domain {
            what: "y_min",
            value: y_min,
            domain: "(0, 1)",
        });
    }
    if grid_size < 5 {
        return Err(invalid("grid_size", "need at least 5 grid points"));
    }
    let step = -y_min.ln() / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|j| (-(j as f64) * step).exp()).collect();
    let phi: Vec<f64> = grid.iter().map(|&y| law.density_unchecked(y)).collect();
    let h = volterra_trapezoid(&phi, grid_size, 1, step);
    let coarse = volterra_trapezoid(&phi, grid_size.div_ceil(2), 2, 2.0 * step);
    let richardson_error = coarse
        .iter()
        .enumerate()
        .map(|(i, &hc)| {
            let hf = h[2 * i];
            let diff = (hf - hc).abs() / 3.0;
            if diff == 0.0 {
                0.0
            } else {
                diff / hf.abs()
            }
        })
        .fold(0.0, f64::max);
    if richardson_error > RICHARDSON_TOLERANCE {
        return Err(Error::GridTooCoarse {
            estimate: richardson_error,
            tolerance: RICHARDSON_TOLERANCE,
        });
    }
    Ok(ProfileSolution {
        law: law.clone(),
        grid,
        h,
        richardson_error,
    })
}

/// `f(y) + ∫_y^1 f(y/t) H(t)/t dt − H(y)` for a candidate `H`.
pub fn volterra_residual<H: Fn(f64) -> f64>(law: &SplitLaw, h: H, y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain {
            what: "y",
            value: y,
            domain: "(0, 1]",
        });
    }
    let rhs = volterra_rhs(law, &h, y)?;
    Ok(rhs - h(y))
}

/// `f(y) + ∫_y^1 f(y/t) H(t)/t dt`.
pub fn volterra_rhs<H: Fn(f64) -> f64>(law: &SplitLaw, h: &H, y: f64) -> Result<f64> {
    let integral = crate::quad::integrate(
        |t| law.density_unchecked(y / t) * h(t) / t,
        y,
        1.0,
        1e-12,
        1e-14,
    )?;
    Ok(law.density(y)? + integral.value)
}

/// Roots of `z(z+1)⋯(z+m−2) = m!`, largest real part first.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub m: u32,
    pub roots: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootRow {
    pub m: u32,
    pub i: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

impl RootSet {
    /// `|z(z+1)⋯(z+m−2) − m!|` at root `i`.
    pub fn residual(&self, i: usize) -> f64 {
        characteristic(self.m, self.roots[i]).norm()
    }

    pub fn rows(&self) -> Vec<RootRow> {
        (0..self.roots.len())
            .map(|i| RootRow {
                m: self.m,
                i: i + 1,
                re: self.roots[i].re,
                im: self.roots[i].im,
                residual: self.residual(i),
            })
            .collect()
    }
}

pub fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

fn characteristic(m: u32, z: Complex64) -> Complex64 {
    (0..m - 1).map(|l| z + l as f64).product::<Complex64>() - factorial(m)
}

/// Expanded coefficients of `z(z+1)⋯(z+m−2) − m!`, constant term first.
pub fn characteristic_coefficients(m: u32) -> Vec<f64> {
    let mut c = vec![1.0];
    for l in 0..m - 1 {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k] += v * l as f64;
            next[k + 1] += v;
        }
        c = next;
    }
    c[0] -= factorial(m);
    c
}

fn check_arity(m: u32, min: u32) -> Result<()> {
    if m < min || m > MAX_ARITY {
        return Err(invalid(
            "m",
            format!("arity {m} outside the supported range {min}..={MAX_ARITY}"),
        ));
    }
    Ok(())
}

pub fn characteristic_roots(m: u32) -> Result<RootSet> {
    check_arity(m, 2)?;
    let degree = (m - 1) as usize;
    let coeffs = characteristic_coefficients(m);
    // Roots scale like (m!)^{1/(m−1)}; work with w = z / σ.
    let sigma = factorial(m).powf(1.0 / degree as f64);
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for k in 0..degree {
        companion[(k, degree - 1)] = -coeffs[k] / sigma.powi((degree - k) as i32);
    }
    let seeds: Vec<Complex64> = companion
        .complex_eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            if w.re.is_finite() && w.im.is_finite() {
                w * sigma
            } else {
                Complex64::from_polar(sigma, 0.4 + k as f64)
            }
        })
        .collect();
    let mut roots = aberth(m, seeds);

    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let mut i = 0;
    while i < roots.len() {
        let z = roots[i];
        if z.im.abs() <= 1e-9 * z.norm().max(1.0) {
            roots[i] = Complex64::new(z.re, 0.0);
            i += 1;
        } else if i + 1 < roots.len() {
            let w = roots[i + 1];
            let re = 0.5 * (z.re + w.re);
            let im = 0.5 * (z.im.abs() + w.im.abs());
            roots[i] = Complex64::new(re, im);
            roots[i + 1] = Complex64::new(re, -im);
            i += 2;
        } else {
            i += 1;
        }
    }
    if (roots[0] - 2.0).norm() < 1e-9 {
        roots[0] = Complex64::new(2.0, 0.0);
    }
    Ok(RootSet { m, roots })
}

/// Simultaneous Aberth–Ehrlich refinement of all roots.
fn aberth(m: u32, mut z: Vec<Complex64>) -> Vec<Complex64> {
    let n = z.len();
    for _ in 0..500 {
        let mut largest = 0.0f64;
        for k in 0..n {
            let terms: Vec<Complex64> = (0..m - 1).map(|l| z[k] + l as f64).collect();
            let prod: Complex64 = terms.iter().product();
            let p = prod - factorial(m);
            let dp = prod * terms.iter().map(|t| t.inv()).sum::<Complex64>();
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let dz = ratio / (1.0 - ratio * repulsion);
            z[k] -= dz;
            largest = largest.max(dz.norm() / z[k].norm().max(1.0));
        }
        if largest <= 1e-15 {
            break;
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stationarity {
    pub m: u32,
    pub re_z2: f64,
    /// `3/2 − Re(z_2)`.
    pub margin: f64,
    pub stationary: bool,
}

pub fn classify_stationarity(m: u32) -> Result<Stationarity> {
    check_arity(m, 3)?;
    let roots = characteristic_roots(m)?;
    let re_z2 = roots.roots[1].re;
    let margin = STATIONARITY_THRESHOLD - re_z2;
    Ok(Stationarity {
        m,
        re_z2,
        margin,
        stationary: margin > 0.0,
    })
}

/// `H(y) = Σ C_i y^{−z_i}` for the m-ary law.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyEulerSolution {
    pub roots: RootSet,
    pub coefficients: Vec<Complex64>,
    pub condition: f64,
}

impl CauchyEulerSolution {
    pub fn eval(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        self.roots
            .roots
            .iter()
            .zip(&self.coefficients)
            .map(|(z, c)| c * (-z * ln_y).exp())
            .sum::<Complex64>()
            .re
    }

    /// Coefficient of the dominant `y^{−2}` term.
    pub fn leading(&self) -> f64 {
        self.coefficients[0].re
    }
}

/// Matches `H^{(j)}(1) = f^{(j)}(1)`, `j = 0..m−2`, for `f(x) = m(m−1)(1−x)^{m−2}`.
pub fn cauchy_euler_solution(m: u32) -> Result<CauchyEulerSolution> {
    let roots = characteristic_roots(m)?;
    let n = roots.roots.len();
    for i in 0..n {
        for k in i + 1..n {
            if (roots.roots[i] - roots.roots[k]).norm() <= ROOT_SEPARATION {
                return Err(invalid("m", format!("roots {i} and {k} are not separated")));
            }
        }
    }
    let system = DMatrix::<Complex64>::from_fn(n, n, |j, i| {
        let z = roots.roots[i];
        (0..j).map(|l| -z - l as f64).product::<Complex64>()
    });
    let mut rhs = DVector::<Complex64>::zeros(n);
    let sign = if (m - 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    rhs[n - 1] = Complex64::new(sign * factorial(m), 0.0);

    let norm1 = |a: &DMatrix<Complex64>| {
        (0..a.ncols())
            .map(|c| a.column(c).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let lu = system.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(&system) * norm1(&inverse);
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let solution = inverse * rhs;
    Ok(CauchyEulerSolution {
        roots,
        coefficients: solution.iter().copied().collect(),
        condition,
    })
}

/// Expected number of size-`k` subtrees in an `m`-ary tree on `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtreeCount {
    pub k: u64,
    /// `C_1 n / k²`.
    pub leading: f64,
    /// `(1/n) H(k/n)` with every root retained.
    pub full: f64,
}

pub fn subtree_profile(m: u32, n: u64, k: u64) -> Result<SubtreeCount> {
    if k == 0 || n == 0 {
        return Err(invalid("k", "subtree sizes and tree sizes are positive"));
    }
    if k > n {
        return Err(invalid(
            "k",
            format!("subtree size {k} exceeds tree size {n}"),
        ));
    }
    let sol = cauchy_euler_solution(m)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(SubtreeCount {
        k,
        leading: sol.leading() * nf / (kf * kf),
        full: sol.eval(kf / nf) / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ternary_h(y: f64) -> f64 {
        1.2 * (y.powi(-2) - y.powi(3))
    }

    #[test]
    fn volterra_matches_closed_forms() {
        let cases: [(SplitLaw, fn(f64) -> f64); 2] = [
            (SplitLaw::Kakutani, |y| 2.0 / (y * y)),
            (SplitLaw::b_uniform(3).unwrap(), ternary_h),
        ];
        for (law, exact) in cases {
            let sol = solve_volterra_h(&law, 0.05, 1 << 12).unwrap();
            assert_eq!(sol.h[0], law.density(1.0).unwrap());
            for (&y, &h) in sol.grid.iter().zip(&sol.h).skip(1) {
                let e = exact(y);
                assert!((h - e).abs() <= 1e-3 * e.abs(), "{law} y={y}: {h} vs {e}");
            }
            assert!(sol.richardson_error < 1e-3);
            for y in [0.05, 0.1, 0.37, 0.9] {
                assert!((sol.eval(y).unwrap() - exact(y)).abs() <= 1e-3 * exact(y));
            }
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let r = solve_volterra_h(&SplitLaw::m_ary(6).unwrap(), 1e-3, 8);
        assert!(matches!(r, Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn closed_forms_satisfy_the_equation() {
        for y in [0.05, 0.2, 0.5, 0.8, 1.0] {
            let r = volterra_residual(&SplitLaw::Kakutani, |t| 2.0 / (t * t), y).unwrap();
            assert!(r.abs() < 1e-6, "{y}: {r}");
            let r = volterra_residual(&SplitLaw::b_uniform(3).unwrap(), ternary_h, y).unwrap();
            assert!(r.abs() < 1e-6, "{y}: {r}");
        }
    }

    #[test]
    fn differentiated_equation_reduces_to_cauchy_euler() {
        // Second derivative of the right-hand side for m = 3 equals 3!·H(y)/y².
        let law = SplitLaw::b_uniform(3).unwrap();
        let rhs = |y: f64| volterra_rhs(&law, &ternary_h, y).unwrap();
        let (y, d) = (0.5, 1e-3);
        let second = (rhs(y + d) - 2.0 * rhs(y) + rhs(y - d)) / (d * d);
        let expected = 6.0 * ternary_h(y) / (y * y);
        assert!((second - expected).abs() < 1e-2 * expected.abs());
    }

    #[test]
    fn small_root_sets() {
        let r2 = characteristic_roots(2).unwrap();
        assert_eq!(r2.roots, vec![Complex64::new(2.0, 0.0)]);
        let r3 = characteristic_roots(3).unwrap();
        assert!((r3.roots[0] - 2.0).norm() < 1e-10);
        assert!((r3.roots[1] + 3.0).norm() < 1e-10);
        assert!(characteristic_roots(1).is_err());
        assert!(characteristic_roots(41).is_err());
    }

    #[test]
    fn roots_satisfy_vieta_and_close_under_conjugation() {
        for m in 2..=MAX_ARITY {
            let set = characteristic_roots(m).unwrap();
            assert_eq!(set.roots.len(), (m - 1) as usize);
            assert_eq!(set.roots[0], Complex64::new(2.0, 0.0));
            for i in 0..set.roots.len() {
                assert!(set.residual(i) < 1e-8 * factorial(m), "m={m} i={i}");
                let z = set.roots[i];
                assert!(set.roots.iter().any(|w| *w == z.conj()));
            }
            let coeffs = characteristic_coefficients(m);
            let sum: Complex64 = set.roots.iter().sum();
            let expected = -coeffs[coeffs.len() - 2];
            assert!((sum.re - expected).abs() < 1e-8 * expected.abs().max(1.0));
            assert!(sum.im.abs() < 1e-9);
            assert!(set.roots.windows(2).all(|w| w[0].re >= w[1].re));
        }
    }

    #[test]
    fn stationarity_boundary_and_monotone_margin() {
        assert!(classify_stationarity(3).unwrap().stationary);
        assert!((classify_stationarity(3).unwrap().re_z2 + 3.0).abs() < 1e-12);
        assert!(classify_stationarity(26).unwrap().stationary);
        assert!(!classify_stationarity(27).unwrap().stationary);
        let margins: Vec<f64> = (3..=30)
            .map(|m| classify_stationarity(m).unwrap().margin)
            .collect();
        assert!(margins.windows(2).all(|w| w[1] < w[0]));
        assert!(classify_stationarity(2).is_err());
    }

    #[test]
    fn cauchy_euler_small_cases() {
        let s3 = cauchy_euler_solution(3).unwrap();
        assert!((s3.coefficients[0] - 1.2).norm() < 1e-12);
        assert!((s3.coefficients[1] + 1.2).norm() < 1e-12);
        let s2 = cauchy_euler_solution(2).unwrap();
        assert!((s2.coefficients[0] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn cauchy_euler_agrees_with_volterra() {
        for m in 2..=6 {
            let ce = cauchy_euler_solution(m).unwrap();
            let vol = solve_volterra_h(&SplitLaw::m_ary(m).unwrap(), 0.05, 1 << 12).unwrap();
            for (&y, &h) in vol.grid.iter().zip(&vol.h).skip(1) {
                let e = ce.eval(y);
                assert!((h - e).abs() <= 1e-3 * e.abs(), "m={m} y={y}: {h} vs {e}");
            }
        }
    }

    #[test]
    fn subtree_profiles() {
        let bst = subtree_profile(2, 1_000_000, 1000).unwrap();
        assert!((bst.leading - 2.0 * 1e6 / 1e6).abs() < 1e-12);
        assert!((bst.full - bst.leading).abs() < 1e-9);
        let tst = subtree_profile(3, 1_000_000, 1000).unwrap();
        assert!((tst.leading - 1.2).abs() < 1e-12);
        assert!(subtree_profile(3, 100, 100).unwrap().full.abs() < 1e-12);
        assert!((subtree_profile(2, 100, 100).unwrap().full - 0.02).abs() < 1e-12);
        assert!(subtree_profile(3, 100, 101).is_err());
    }
}
