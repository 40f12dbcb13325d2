//! Empirical distribution functions, martingale increments and concentration
//! checks over finished runs.

use serde::Serialize;

use crate::engine::{xi_grid_point, FragResult, XI_GRID};
use crate::error::{invalid, Error, Result};
use crate::laws::SplitLaw;

/// Relative slack when matching a query point against the recorded grid.
const GRID_MATCH: f64 = 1e-12;

/// Right-continuous step function `x ↦ #{samples ≤ x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("empirical distribution"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("samples", "NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `sup_x |F_n(x) − G(x)|` for a continuous nondecreasing `G`, taken over
    /// both one-sided limits at every jump.
    pub fn sup_deviation<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let n = self.len() as f64;
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let gx = g(x);
            let below = i as f64 / n;
            let at = j as f64 / n;
            worst = worst.max((gx - below).abs()).max((at - gx).abs());
            i = j;
        }
        worst
    }
}

/// Empirical distribution of all spacing lengths of a run.
pub fn spacing_cdf(result: &FragResult) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(result.spacing_lengths())
}

/// `sup_x |F_n(x) − U(x / x_c)|` for the spacing lengths, `U` a distribution
/// on `[0, 1]`.
pub fn spacing_deviation<U: Fn(f64) -> f64>(result: &FragResult, u: U) -> Result<f64> {
    let x_c = result.x_c;
    Ok(spacing_cdf(result)?.sup_deviation(|x| u((x / x_c).clamp(0.0, 1.0))))
}

/// `sup_x |F_n(x) − x|` over the partition points.
pub fn point_cdf_deviation(result: &FragResult) -> Result<f64> {
    let cdf = EmpiricalCdf::new(result.partition_points.clone())
        .map_err(|_| Error::Empty("partition points"))?;
    Ok(cdf.sup_deviation(|x| x.clamp(0.0, 1.0)))
}

/// Spacings lying entirely inside `(0, y)`.
pub fn restricted_spacing_cdf(result: &FragResult, y: f64) -> Result<EmpiricalCdf> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain {
            what: "y",
            value: y,
            domain: "(0, 1]",
        });
    }
    let slack = 4.0 * f64::EPSILON;
    let inside: Vec<f64> = result
        .spacings
        .iter()
        .take_while(|s| s.right() <= y + slack)
        .map(|s| s.length)
        .collect();
    EmpiricalCdf::new(inside).map_err(|_| Error::Empty("no spacing lies inside (0, y)"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSeries {
    pub x_query: f64,
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub bound_c: f64,
}

impl MartingaleSeries {
    /// `S_n`, or zero before the first step.
    pub fn last(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// Index of `x` on the recorded query grid `x_c · j / 16`.
pub fn xi_grid_index(x_c: f64, x: f64) -> Result<usize> {
    if x > x_c * (1.0 + GRID_MATCH) {
        return Err(invalid(
            "x_query",
            format!("{x} exceeds the cutoff {x_c}; the conditional mean needs x ≤ x_c"),
        ));
    }
    (0..XI_GRID)
        .find(|&j| (xi_grid_point(x_c, j) - x).abs() <= GRID_MATCH * x_c)
        .ok_or_else(|| {
            invalid(
                "x_query",
                format!("{x} is not a recorded query point x_c·j/16"),
            )
        })
}

/// `X_i = ξ_i(x) − F(x / M_{i−1})` from the counts recorded during the run.
pub fn martingale_increments(
    result: &FragResult,
    law: &SplitLaw,
    x_query: f64,
) -> Result<MartingaleSeries> {
    let j = xi_grid_index(result.x_c, x_query)?;
    let x = xi_grid_point(result.x_c, j);
    let bound_c = law.children() as f64;
    let increments: Vec<f64> = result
        .xi_counts
        .iter()
        .zip(&result.maxima_trajectory)
        .map(|(counts, &m)| Ok(counts[j] as f64 - law.expected_count(x / m)?))
        .collect::<Result<_>>()?;
    let partial_sums = increments
        .iter()
        .scan(0.0, |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect();
    Ok(MartingaleSeries {
        x_query: x,
        increments,
        partial_sums,
        bound_c,
    })
}

/// Azuma–Hoeffding bound `2 exp(−λ² / (2 n c²))`.
pub fn azuma_bound(lambda: f64, n: u64, c: f64) -> f64 {
    2.0 * (-lambda * lambda / (2.0 * n as f64 * c * c)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub lambda: f64,
    pub empirical_tail: f64,
    pub azuma_bound: f64,
    /// Binomial standard error of the tail frequency at the bound.
    pub sigma: f64,
    /// Tail exceeds bound + 3σ.
    pub violated: bool,
}

/// Empirical `P(|S_n| ≥ λ)` against the Azuma bound for each `λ`.
pub fn concentration_check(
    samples: &[f64],
    n: u64,
    c: f64,
    lambdas: &[f64],
) -> Result<Vec<ConcentrationRow>> {
    if samples.is_empty() {
        return Err(Error::Empty("no replicate values of S_n"));
    }
    let count = samples.len() as f64;
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let hits = samples.iter().filter(|s| s.abs() >= lambda).count();
            let empirical_tail = hits as f64 / count;
            let azuma_bound = azuma_bound(lambda, n, c);
            let p = azuma_bound.min(1.0);
            let sigma = (p * (1.0 - p) / count).sqrt();
            ConcentrationRow {
                lambda,
                empirical_tail,
                azuma_bound,
                sigma,
                violated: empirical_tail > azuma_bound + 3.0 * sigma,
            }
        })
        .collect())
}

/// Linear-interpolated quantile, `q ∈ [0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of nothing"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid("q", format!("{q} is not in [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("mean of nothing"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// One row of a per-replicate deviation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    pub replicate: usize,
    pub statistic: String,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_steps, run_to_cutoff, Interval};

    fn fake_result(points: Vec<f64>) -> FragResult {
        let mut edges = vec![0.0];
        edges.extend(&points);
        edges.push(1.0);
        let spacings = edges
            .windows(2)
            .map(|w| Interval {
                left: w[0],
                length: w[1] - w[0],
            })
            .collect();
        FragResult {
            law: SplitLaw::Kakutani,
            x_c: 0.5,
            seed: 0,
            n_steps: points.len() as u64,
            spacings,
            partition_points: points,
            maxima_trajectory: vec![],
            xi_counts: vec![],
        }
    }

    #[test]
    fn empirical_cdf_is_right_continuous() {
        let cdf = EmpiricalCdf::new(vec![0.3, 0.1, 0.2, 0.2]).unwrap();
        assert_eq!(cdf.eval(0.0), 0.0);
        assert_eq!(cdf.eval(0.1), 0.25);
        assert_eq!(cdf.eval(0.2), 0.75);
        assert_eq!(cdf.eval(0.25), 0.75);
        assert_eq!(cdf.eval(0.3), 1.0);
        assert!(EmpiricalCdf::new(vec![]).is_err());
    }

    #[test]
    fn point_deviation_single_point() {
        assert_eq!(point_cdf_deviation(&fake_result(vec![0.5])).unwrap(), 0.5);
    }

    #[test]
    fn point_deviation_three_quartiles() {
        let pts = vec![0.25, 0.5, 0.75];
        // Brute force over a fine grid plus left limits at each point.
        let n = pts.len() as f64;
        let f = |x: f64| pts.iter().filter(|&&p| p <= x).count() as f64 / n;
        let mut brute = 0.0f64;
        for i in 0..=100_000 {
            let x = i as f64 / 100_000.0;
            brute = brute.max((f(x) - x).abs());
        }
        for &p in &pts {
            let left = pts.iter().filter(|&&q| q < p).count() as f64 / n;
            brute = brute.max((left - p).abs());
        }
        let got = point_cdf_deviation(&fake_result(pts.clone())).unwrap();
        assert!((got - brute).abs() < 1e-12);
        assert!((got - 0.25).abs() < 1e-15);
    }

    #[test]
    fn restricted_window_full_and_partial() {
        let r = run_to_cutoff(&SplitLaw::Kakutani, 1e-2, 4).unwrap();
        let full = restricted_spacing_cdf(&r, 1.0).unwrap();
        assert_eq!(full, spacing_cdf(&r).unwrap());
        let part = restricted_spacing_cdf(&r, 0.5).unwrap();
        assert!(part.len() < full.len());
        let first = r.spacings[0].length;
        assert!(matches!(
            restricted_spacing_cdf(&r, first * 0.5),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn xi_at_cutoff_sums_to_spacing_count() {
        for law in [SplitLaw::Kakutani, SplitLaw::b_uniform(3).unwrap()] {
            let r = run_to_cutoff(&law, 1e-3, 8).unwrap();
            let total: u64 = r.xi_counts.iter().map(|c| c[XI_GRID - 1] as u64).sum();
            assert_eq!(total, r.spacings.len() as u64);
        }
    }

    #[test]
    fn martingale_increments_are_bounded() {
        let r = run_steps(&SplitLaw::Kakutani, 1e-3, 1500, 3).unwrap();
        let series = martingale_increments(&r, &SplitLaw::Kakutani, 1e-3).unwrap();
        assert_eq!(series.bound_c, 2.0);
        assert!(series.increments.iter().all(|x| x.abs() <= 2.0));
        assert_eq!(series.partial_sums.len(), 1500);
        let zero = martingale_increments(&r, &SplitLaw::Kakutani, 0.0).unwrap();
        assert!(zero.increments.iter().all(|&x| x == 0.0));
        assert!(martingale_increments(&r, &SplitLaw::Kakutani, 2e-3).is_err());
        assert!(martingale_increments(&r, &SplitLaw::Kakutani, 0.3e-3).is_err());
    }

    #[test]
    fn concentration_rows() {
        let samples = vec![0.0, 1.0, -3.0, 10.0];
        let rows =
            concentration_check(&samples, 2000, 2.0, &[0.0, 2.0 * (4000f64).sqrt()]).unwrap();
        assert_eq!(rows[0].empirical_tail, 1.0);
        assert_eq!(rows[0].azuma_bound, 2.0);
        assert!((rows[1].azuma_bound - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        let lam = 4.0 * (2.0 * 2000.0 * 10f64.ln()).sqrt();
        assert!((azuma_bound(lam, 2000, 2.0) - 2e-4).abs() < 1e-16);
        assert!((azuma_bound(lam, 2000, 1.0) - 2e-16).abs() < 1e-28);
        assert!(concentration_check(&[], 1, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&v).unwrap(), 2.5);
        assert_eq!(quantile(&v, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert!(quantile(&[], 0.5).is_err());
    }
}
