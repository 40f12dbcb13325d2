//! Integer-mass fragmentation with heavy-tailed splits.
//!
//! A mass `s` is cut into a smaller piece `i ≤ ⌊s/2⌋` and the remainder
//! `s − i`; the largest mass is always cut next. Counts are kept per size.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::laws::SplitLaw;
use crate::quad::zeta;
use crate::replicate::rng_from_seed;

/// A detected critical size needs this many masses of each size…
pub const CRITICAL_COUNT: u64 = 2;
/// …at this many consecutive sizes.
pub const CRITICAL_RUN: u64 = 10;

/// Smallest `n` accepted by [`predict_critical_points`].
pub const MIN_CRITICAL_N: u64 = 10_000;

/// Bucketed state of an integer-mass fragmentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteProfile {
    pub n: u64,
    /// Size → number of masses of that size.
    pub counts: BTreeMap<u64, u64>,
    /// Steps taken so far.
    pub t: u64,
}

impl DiscreteProfile {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            counts: BTreeMap::from([(n, 1)]),
            t: 0,
        }
    }

    /// Current largest mass.
    pub fn white_size(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn count(&self, size: u64) -> u64 {
        self.counts.get(&size).copied().unwrap_or(0)
    }

    /// `Σ size · count`.
    pub fn total_mass(&self) -> u128 {
        self.counts
            .iter()
            .map(|(&s, &c)| s as u128 * c as u128)
            .sum()
    }

    pub fn pieces(&self) -> u64 {
        self.counts.values().sum()
    }

    fn remove(&mut self, size: u64) {
        match self.counts.get_mut(&size) {
            Some(c) if *c > 1 => *c -= 1,
            Some(_) => {
                self.counts.remove(&size);
            }
            None => unreachable!("no mass of size {size}"),
        }
    }

    fn add(&mut self, size: u64) {
        *self.counts.entry(size).or_insert(0) += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    /// Taken the first time the largest mass is at or below this size.
    pub milestone: u64,
    pub profile: DiscreteProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedCritical {
    /// `M̂_c`: the largest size of the first qualifying run.
    pub size: u64,
    /// State when the run completed (largest mass `size − CRITICAL_RUN + 1`).
    pub profile: DiscreteProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteParams {
    pub n: u64,
    pub stop_size: u64,
    /// End the run as soon as the critical point has been detected.
    pub stop_at_critical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOutcome {
    pub law: SplitLaw,
    pub seed: u64,
    pub last: DiscreteProfile,
    pub snapshots: Vec<Snapshot>,
    /// `L(s)`: count of size-`s` masses when `s` first became the largest.
    pub largest_counts: BTreeMap<u64, u64>,
    pub critical: Option<DetectedCritical>,
}

/// Splits the largest mass until it is at or below `stop_size`.
pub fn simulate_discrete(
    law: &SplitLaw,
    params: DiscreteParams,
    snapshot_sizes: &[u64],
    seed: u64,
) -> Result<DiscreteOutcome> {
    let DiscreteParams { n, stop_size, .. } = params;
    if n < 2 {
        return Err(invalid("n", format!("initial mass {n} cannot be split")));
    }
    if !(1..n).contains(&stop_size) {
        return Err(invalid(
            "stop_size",
            format!("stop size {stop_size} must lie in 1..{n}"),
        ));
    }
    let sampler = law.discrete_sampler()?;
    let mut rng = rng_from_seed(seed);

    let mut milestones: Vec<u64> = snapshot_sizes.to_vec();
    milestones.sort_unstable_by(|a, b| b.cmp(a));
    milestones.dedup();
    let mut pending = milestones.into_iter().peekable();

    let mut profile = DiscreteProfile::new(n);
    let mut snapshots = Vec::new();
    let mut largest_counts = BTreeMap::new();
    let mut critical = None;
    let mut last_max = u64::MAX;
    let mut run = 0u64;

    loop {
        let (&s, &c) = profile.counts.last_key_value().expect("mass is conserved");
        if s != last_max {
            largest_counts.insert(s, c);
            run = if c >= CRITICAL_COUNT {
                if s + 1 == last_max {
                    run + 1
                } else {
                    1
                }
            } else {
                0
            };
            last_max = s;
            if critical.is_none() && run == CRITICAL_RUN {
                critical = Some(DetectedCritical {
                    size: s + CRITICAL_RUN - 1,
                    profile: profile.clone(),
                });
            }
            while let Some(&m) = pending.peek() {
                if m < s {
                    break;
                }
                snapshots.push(Snapshot {
                    milestone: m,
                    profile: profile.clone(),
                });
                pending.next();
            }
        }
        if s <= stop_size || (params.stop_at_critical && critical.is_some()) {
            break;
        }
        let i = sampler.sample(s, &mut rng)?;
        profile.remove(s);
        profile.add(i);
        profile.add(s - i);
        profile.t += 1;
    }

    Ok(DiscreteOutcome {
        law: law.clone(),
        seed,
        last: profile,
        snapshots,
        largest_counts,
        critical,
    })
}

/// `H_0..H_T` of the renewal recurrence `H_t = Σ_{i=1}^t p_i H_{t−i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HtSeries {
    pub alpha: f64,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau {
    pub t_lo: usize,
    pub t_hi: usize,
    /// Median of `√t H_t` over the window.
    pub median: f64,
    /// `max |√t H_t − median| / median`.
    pub max_rel_deviation: f64,
}

impl HtSeries {
    /// `√t · H_t`.
    pub fn scaled(&self, t: usize) -> f64 {
        (t as f64).sqrt() * self.h[t]
    }

    pub fn plateau(&self, t_lo: usize, t_hi: usize) -> Result<Plateau> {
        if !(1 <= t_lo && t_lo <= t_hi && t_hi < self.h.len()) {
            return Err(invalid(
                "window",
                format!("[{t_lo}, {t_hi}] is not inside 1..{}", self.h.len()),
            ));
        }
        let values: Vec<f64> = (t_lo..=t_hi).map(|t| self.scaled(t)).collect();
        let median = crate::empirics::median(&values)?;
        let max_rel_deviation = values
            .iter()
            .map(|v| (v - median).abs() / median)
            .fold(0.0, f64::max);
        Ok(Plateau {
            t_lo,
            t_hi,
            median,
            max_rel_deviation,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 8];
    let split = a.len() - a.len() % 8;
    for (x, y) in a[..split].chunks_exact(8).zip(b[..split].chunks_exact(8)) {
        for l in 0..8 {
            lanes[l] += x[l] * y[l];
        }
    }
    let tail: f64 = a[split..].iter().zip(&b[split..]).map(|(x, y)| x * y).sum();
    lanes.iter().sum::<f64>() + tail
}

/// Direct convolution with `p_i = i^{−α} / ζ(α)`.
pub fn solve_ht_recurrence(alpha: f64, t_max: usize) -> Result<HtSeries> {
    if !(alpha > 1.0) {
        return Err(invalid("alpha", format!("{alpha} must exceed 1")));
    }
    if t_max < 1 {
        return Err(invalid("T", "need at least one step"));
    }
    let z = zeta(alpha);
    // reversed[j] = p_{T−j}, so p_{t−k} for k = 0..t is reversed[T−t..T].
    let reversed: Vec<f64> = (0..t_max)
        .map(|j| ((t_max - j) as f64).powf(-alpha) / z)
        .collect();
    let mut h = Vec::with_capacity(t_max + 1);
    h.push(1.0);
    for t in 1..=t_max {
        let next = dot(&reversed[t_max - t..], &h[..t]);
        h.push(next);
    }
    Ok(HtSeries { alpha, h })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoints {
    pub n: u64,
    pub m_c: f64,
    pub c_mc: f64,
    pub m_c_prime: f64,
    pub c_mc_prime: f64,
}

/// Closed-form critical sizes for `α = 3/2`.
pub fn predict_critical_points(alpha: f64, n: u64) -> Result<CriticalPoints> {
    if alpha != 1.5 {
        return Err(Error::Unsupported {
            law: format!("heavy{alpha}"),
            reason: "critical-point formulas are derived for alpha = 3/2 only".into(),
        });
    }
    if n < MIN_CRITICAL_N {
        return Err(invalid(
            "n",
            format!("{n} is below the asymptotic regime n ≥ {MIN_CRITICAL_N}"),
        ));
    }
    let z = zeta(1.5);
    let nf = n as f64;
    let m_c = (2.0 / z).powf(2.0 / 3.0) * nf.powf(2.0 / 3.0);
    Ok(CriticalPoints {
        n,
        m_c,
        c_mc: z * m_c / 4.0,
        m_c_prime: 4.0 * nf / (z * z * m_c),
        c_mc_prime: z / 4.0 * nf.sqrt() * m_c.sqrt(),
    })
}

/// `A_k` and its solution for one step of the reverse recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseSystem {
    pub k: usize,
    /// Row-major `k × k`.
    pub matrix: Vec<Vec<f64>>,
    /// `n_k(1..=k)`.
    pub solution: Vec<f64>,
}

/// `A_k` for the symmetric split probabilities `p[i−1] = p_i`, `i = 1..k−1`.
pub fn reverse_matrix(p: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; k]; k];
    for (r, row) in a.iter_mut().enumerate().take(k - 1) {
        row[r] = 1.0;
        for c in r + 1..k {
            row[c] = p[c - r - 1];
        }
    }
    for (c, v) in a[k - 1].iter_mut().enumerate() {
        *v = (c + 1) as f64;
    }
    a
}

/// Solves `A_k x = (b, n)` by back substitution on the unit upper-triangular
/// block with `x_k` eliminated through the mass row.
pub fn solve_reverse_system(p: &[f64], b: &[f64], n: f64) -> Result<Vec<f64>> {
    let k = b.len() + 1;
    if p.len() + 1 < k {
        return Err(invalid("p", format!("need p_1..p_{} for k = {k}", k - 1)));
    }
    // U y = rhs for y ∈ R^{k−1}.
    let back = |rhs: &dyn Fn(usize) -> f64| {
        let mut y = vec![0.0; k - 1];
        for r in (0..k - 1).rev() {
            let mut v = rhs(r);
            for c in r + 1..k - 1 {
                v -= p[c - r - 1] * y[c];
            }
            y[r] = v;
        }
        y
    };
    let ub = back(&|r| b[r]);
    let uu = back(&|r| p[k - 1 - r - 1]);
    let mass = |y: &[f64]| {
        y.iter()
            .enumerate()
            .map(|(j, v)| (j + 1) as f64 * v)
            .sum::<f64>()
    };
    let schur = k as f64 - mass(&uu);
    if schur.abs() <= 1e-12 * k as f64 {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    let last = (n - mass(&ub)) / schur;
    let mut x: Vec<f64> = ub.iter().zip(&uu).map(|(a, u)| a - last * u).collect();
    x.push(last);
    Ok(x)
}

/// `n_k(1..=k)` for `k = 1..=k_max`, seeded with `n_1(1) = n` and the
/// previous solution as right-hand side.
pub fn reverse_recurrence(law: &SplitLaw, n: u64, k_max: usize) -> Result<Vec<ReverseSystem>> {
    if k_max < 1 {
        return Err(invalid("k_max", "need k_max ≥ 1"));
    }
    if k_max as u64 >= n {
        return Err(invalid(
            "k_max",
            format!("k_max {k_max} must be below n = {n}"),
        ));
    }
    let nf = n as f64;
    let mut out = vec![ReverseSystem {
        k: 1,
        matrix: vec![vec![1.0]],
        solution: vec![nf],
    }];
    for k in 2..=k_max {
        let p = law.split_pmf(k as u64)?;
        let prev = &out[k - 2].solution;
        let solution = solve_reverse_system(&p, prev, nf)?;
        out.push(ReverseSystem {
            k,
            matrix: reverse_matrix(&p, k),
            solution,
        });
    }
    Ok(out)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Empty("fewer than two positive points to fit"));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "all abscissae are equal"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Log-log slope of the per-size count density over `[lo, hi]`, averaged
/// within `bins` geometric bins.
pub fn size_profile_slope(
    profile: &DiscreteProfile,
    lo: u64,
    hi: u64,
    bins: usize,
) -> Result<LogLogFit> {
    if !(1 <= lo && lo < hi && bins >= 2) {
        return Err(invalid("range", format!("bad size window [{lo}, {hi}]")));
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / bins as f64);
    let mut edges: Vec<u64> = (0..=bins)
        .map(|b| (lo as f64 * ratio.powi(b as i32)).round() as u64)
        .collect();
    edges.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let total: u64 = profile.counts.range(a..b).map(|(_, &c)| c).sum();
        xs.push(((a * (b - 1)) as f64).sqrt());
        ys.push(total as f64 / (b - a) as f64);
    }
    fit_loglog(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HkRow {
    pub k: u64,
    pub simulated: f64,
    pub conjectured: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HkReport {
    pub rows: Vec<HkRow>,
    pub fit: LogLogFit,
}

/// Compares `L(k)`, the count of size-`k` masses when `k` first becomes the
/// largest size, with `n / k^α`.
pub fn test_hk_conjecture(
    law: &SplitLaw,
    n: u64,
    k_range: std::ops::RangeInclusive<u64>,
    seed: u64,
) -> Result<HkReport> {
    let alpha = match law {
        SplitLaw::HeavyTail { alpha } => *alpha,
        SplitLaw::CatalanFringe => 1.5,
        _ => {
            return Err(Error::Unsupported {
                law: law.to_string(),
                reason: "the conjecture concerns integer-mass laws".into(),
            })
        }
    };
    let lo = *k_range.start();
    if lo < 1 || k_range.is_empty() {
        return Err(invalid("k_range", "need a non-empty range of sizes ≥ 1"));
    }
    let params = DiscreteParams {
        n,
        stop_size: lo,
        stop_at_critical: false,
    };
    let out = simulate_discrete(law, params, &[], seed)?;
    let nf = n as f64;
    let rows: Vec<HkRow> = k_range
        .map(|k| {
            let simulated = out.largest_counts.get(&k).copied().unwrap_or(0) as f64;
            let conjectured = nf / (k as f64).powf(alpha);
            HkRow {
                k,
                simulated,
                conjectured,
                ratio: simulated / conjectured,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.simulated).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok(HkReport { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_is_conserved_at_every_snapshot() {
        let law = SplitLaw::heavy_tail(1.5).unwrap();
        let params = DiscreteParams {
            n: 100_000,
            stop_size: 20,
            stop_at_critical: false,
        };
        let out = simulate_discrete(&law, params, &[50_000, 5_000, 500, 50], 1).unwrap();
        assert_eq!(out.snapshots.len(), 4);
        for s in &out.snapshots {
            assert_eq!(s.profile.total_mass(), 100_000);
            assert!(s.profile.white_size() <= s.milestone);
        }
        assert_eq!(out.last.total_mass(), 100_000);
        assert!(out.last.white_size() <= 20);
        assert_eq!(out.last.pieces(), out.last.t + 1);
    }

    #[test]
    fn catalan_runs_to_unit_masses() {
        let params = DiscreteParams {
            n: 2_000,
            stop_size: 1,
            stop_at_critical: false,
        };
        let out = simulate_discrete(&SplitLaw::CatalanFringe, params, &[], 3).unwrap();
        assert_eq!(out.last.counts, BTreeMap::from([(1, 2_000)]));
        assert_eq!(out.largest_counts[&1], 2_000);
    }

    #[test]
    fn rejects_bad_parameters() {
        let law = SplitLaw::heavy_tail(1.5).unwrap();
        let p = |n, stop_size| DiscreteParams {
            n,
            stop_size,
            stop_at_critical: false,
        };
        assert!(simulate_discrete(&law, p(1, 1), &[], 0).is_err());
        assert!(simulate_discrete(&law, p(10, 0), &[], 0).is_err());
        assert!(simulate_discrete(&law, p(10, 10), &[], 0).is_err());
        assert!(simulate_discrete(&SplitLaw::Kakutani, p(10, 2), &[], 0).is_err());
    }

    #[test]
    fn recurrence_first_terms() {
        let s = solve_ht_recurrence(1.5, 10).unwrap();
        let z = 2.612_375_348_685_488;
        let p1 = 1.0 / z;
        let p2 = 2f64.powf(-1.5) / z;
        assert_eq!(s.h[0], 1.0);
        assert!((s.h[1] - p1).abs() < 1e-15);
        assert!((s.h[1] - 0.3828).abs() < 1e-3);
        assert!((s.h[2] - (p1 * p1 + p2)).abs() < 1e-15);
        assert!(s.h.iter().all(|&h| h > 0.0 && h <= 1.0));
    }

    #[test]
    fn recurrence_matches_naive_convolution() {
        let s = solve_ht_recurrence(1.7, 300).unwrap();
        let z = zeta(1.7);
        let mut h = vec![1.0];
        for t in 1..=300usize {
            let v: f64 = (1..=t).map(|i| (i as f64).powf(-1.7) / z * h[t - i]).sum();
            h.push(v);
        }
        for (a, b) in s.h.iter().zip(&h) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_point_formulas() {
        let c = predict_critical_points(1.5, 1_000_000).unwrap();
        assert!((c.m_c / 8.37e3 - 1.0).abs() < 1e-3);
        let z = zeta(1.5);
        assert!((c.c_mc / c.m_c - z / 4.0).abs() < 1e-14);
        assert!((c.m_c_prime * c.m_c / (4e6 / (z * z)) - 1.0).abs() < 1e-14);
        assert!(c.m_c_prime < c.m_c);
        assert!(predict_critical_points(1.7, 1_000_000).is_err());
        assert!(predict_critical_points(1.5, 100).is_err());
    }

    #[test]
    fn reverse_matrix_shape() {
        let a = reverse_matrix(&[0.5, 0.5], 3);
        assert_eq!(
            a,
            vec![
                vec![1.0, 0.5, 0.5],
                vec![0.0, 1.0, 0.5],
                vec![1.0, 2.0, 3.0]
            ]
        );
    }

    #[test]
    fn reverse_recurrence_seeded_as_written_is_degenerate() {
        let law = SplitLaw::heavy_tail(1.5).unwrap();
        let systems = reverse_recurrence(&law, 1000, 8).unwrap();
        assert_eq!(systems[0].solution, vec![1000.0]);
        assert_eq!(systems[1].solution, vec![1000.0, 0.0]);
        for s in &systems {
            let mass: f64 = s
                .solution
                .iter()
                .enumerate()
                .map(|(j, v)| (j + 1) as f64 * v)
                .sum();
            assert!((mass - 1000.0).abs() <= 1e-9 * 1000.0);
        }
    }

    #[test]
    fn generic_reverse_solve_satisfies_every_row() {
        let law = SplitLaw::CatalanFringe;
        for k in 2..=12usize {
            let p = law.split_pmf(k as u64).unwrap();
            let b: Vec<f64> = (1..k).map(|j| 100.0 / j as f64).collect();
            let x = solve_reverse_system(&p, &b, 500.0).unwrap();
            let a = reverse_matrix(&p, k);
            for r in 0..k {
                let lhs: f64 = a[r].iter().zip(&x).map(|(a, x)| a * x).sum();
                let rhs = if r + 1 < k { b[r] } else { 500.0 };
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let xs: Vec<f64> = (1..50).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_loglog(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn hk_rows_start_at_n() {
        let law = SplitLaw::heavy_tail(1.5).unwrap();
        let r = test_hk_conjecture(&law, 20_000, 1..=8, 5).unwrap();
        assert_eq!(r.rows[0].simulated, 20_000.0);
        assert_eq!(r.rows.len(), 8);
    }
}
