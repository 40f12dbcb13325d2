//! Greedy largest-first fragmentation of the unit interval.
//!
//! The current maximum interval is split by the law until every interval is at
//! or below the cutoff `x_c`. Intervals that reach the cutoff are frozen at
//! creation and never enter the priority queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::laws::SplitLaw;
use crate::replicate::{rng_from_seed, SimRng};

/// Number of query points `x_c · j / 16`, `j = 0..=16`, at which per-split
/// child counts are recorded.
pub const XI_GRID: usize = 17;

/// The `j`-th recorded query point for cutoff `x_c`.
pub fn xi_grid_point(x_c: f64, j: usize) -> f64 {
    x_c * j as f64 / (XI_GRID - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub length: f64,
}

impl Interval {
    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn contains(&self, y: f64) -> bool {
        self.left < y && y < self.right()
    }
}

#[derive(Debug, Clone, Copy)]
struct Active {
    interval: Interval,
    seq: u64,
}

impl PartialEq for Active {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Active {}

impl PartialOrd for Active {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Active {
    // Longest first; among equal lengths the earliest created.
    fn cmp(&self, other: &Self) -> Ordering {
        self.interval
            .length
            .total_cmp(&other.interval.length)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvent {
    pub parent: Interval,
    pub children: Vec<Interval>,
}

/// Live state of one run.
#[derive(Debug, Clone)]
pub struct FragState {
    law: SplitLaw,
    x_c: f64,
    seed: u64,
    rng: SimRng,
    active: BinaryHeap<Active>,
    frozen: Vec<Interval>,
    step: u64,
    next_seq: u64,
    points: Vec<f64>,
    maxima: Vec<f64>,
    xi: Vec<[u16; XI_GRID]>,
    offsets: Vec<f64>,
}

impl FragState {
    pub fn new(law: SplitLaw, x_c: f64, seed: u64) -> Result<Self> {
        if !law.is_continuous() {
            return Err(Error::Unsupported {
                law: law.to_string(),
                reason: "the interval engine needs a continuous law".into(),
            });
        }
        if !(x_c > 0.0) {
            return Err(invalid("x_c", format!("cutoff {x_c} must be positive")));
        }
        let unit = Interval {
            left: 0.0,
            length: 1.0,
        };
        let mut state = Self {
            law,
            x_c,
            seed,
            rng: rng_from_seed(seed),
            active: BinaryHeap::new(),
            frozen: Vec::new(),
            step: 0,
            next_seq: 1,
            points: Vec::new(),
            maxima: Vec::new(),
            xi: Vec::new(),
            offsets: Vec::new(),
        };
        if unit.length <= x_c {
            state.frozen.push(unit);
        } else {
            state.active.push(Active {
                interval: unit,
                seq: 0,
            });
        }
        Ok(state)
    }

    pub fn x_c(&self) -> f64 {
        self.x_c
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.active.is_empty()
    }

    /// Length of the current largest interval, active or frozen.
    pub fn current_max(&self) -> f64 {
        self.active
            .peek()
            .map(|a| a.interval.length)
            .or_else(|| self.frozen.iter().map(|i| i.length).reduce(f64::max))
            .unwrap_or(0.0)
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.len()
    }

    /// Total length of all current intervals.
    pub fn total_length(&self) -> f64 {
        self.active.iter().map(|a| a.interval.length).sum::<f64>()
            + self.frozen.iter().map(|i| i.length).sum::<f64>()
    }

    /// All current intervals (frozen first, then active in heap order).
    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.frozen
            .iter()
            .copied()
            .chain(self.active.iter().map(|a| a.interval))
    }

    /// Splits the current maximum interval.
    pub fn step(&mut self) -> Result<SplitEvent> {
        let parent = self.active.pop().ok_or(Error::Finished)?.interval;
        let right = parent.right();
        let children = loop {
            self.law
                .sample_split(parent.length, &mut self.rng, &mut self.offsets)?;
            let mut children = Vec::with_capacity(self.offsets.len() + 1);
            let mut left = parent.left;
            for &offset in &self.offsets {
                let point = parent.left + offset;
                children.push(Interval {
                    left,
                    length: point - left,
                });
                left = point;
            }
            children.push(Interval {
                left,
                length: right - left,
            });
            // A division point can round onto an endpoint for very short
            // parents; redraw rather than create an empty child.
            if children.iter().all(|c| c.length > 0.0) {
                break children;
            }
        };

        let mut counts = [0u16; XI_GRID];
        for (j, count) in counts.iter_mut().enumerate() {
            let x = xi_grid_point(self.x_c, j);
            *count = children.iter().filter(|c| c.length <= x).count() as u16;
        }
        self.xi.push(counts);
        self.maxima.push(parent.length);
        self.points.extend(children.iter().skip(1).map(|c| c.left));

        for &child in &children {
            if child.length <= self.x_c {
                self.frozen.push(child);
            } else {
                self.active.push(Active {
                    interval: child,
                    seq: self.next_seq,
                });
                self.next_seq += 1;
            }
        }
        self.step += 1;
        Ok(SplitEvent { parent, children })
    }

    pub fn finish(self) -> FragResult {
        let mut spacings: Vec<Interval> = self.intervals().collect();
        spacings.sort_by(|a, b| a.left.total_cmp(&b.left));
        let mut partition_points = self.points;
        partition_points.sort_by(f64::total_cmp);
        FragResult {
            law: self.law,
            x_c: self.x_c,
            seed: self.seed,
            n_steps: self.step,
            spacings,
            partition_points,
            maxima_trajectory: self.maxima,
            xi_counts: self.xi,
        }
    }
}

/// Output of a completed (or step-limited) run.
#[derive(Debug, Clone)]
pub struct FragResult {
    pub law: SplitLaw,
    pub x_c: f64,
    pub seed: u64,
    pub n_steps: u64,
    /// Final intervals ordered by left end.
    pub spacings: Vec<Interval>,
    /// Absolute division points, sorted.
    pub partition_points: Vec<f64>,
    /// Length of the interval split at each step, `M_0, M_1, …`.
    pub maxima_trajectory: Vec<f64>,
    /// Per split, the number of children of length `≤ x_c·j/16`.
    pub xi_counts: Vec<[u16; XI_GRID]>,
}

impl FragResult {
    pub fn spacing_lengths(&self) -> Vec<f64> {
        self.spacings.iter().map(|s| s.length).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.spacings.iter().all(|s| s.length <= self.x_c)
    }

    /// Writes `left,length` rows, one per spacing.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "left,length")?;
        for s in &self.spacings {
            writeln!(out, "{:?},{:?}", s.left, s.length)?;
        }
        Ok(())
    }

    /// Sidecar manifest `{law, x_c, seed, n_steps, wall_time}`.
    pub fn manifest(&self, wall_time_secs: f64) -> serde_json::Value {
        serde_json::json!({
            "law": self.law,
            "x_c": self.x_c,
            "seed": self.seed,
            "n_steps": self.n_steps,
            "wall_time": wall_time_secs,
        })
    }
}

/// Runs until every interval is at or below `x_c`. A cutoff of one or more
/// yields the unsplit unit interval.
pub fn run_to_cutoff(law: &SplitLaw, x_c: f64, seed: u64) -> Result<FragResult> {
    run_steps(law, x_c, u64::MAX, seed)
}

/// Runs at most `max_steps` splits (fewer if the cutoff is reached first).
pub fn run_steps(law: &SplitLaw, x_c: f64, max_steps: u64, seed: u64) -> Result<FragResult> {
    let mut state = FragState::new(law.clone(), x_c, seed)?;
    while state.step_count() < max_steps && !state.is_finished() {
        state.step()?;
    }
    Ok(state.finish())
}

/// Shrinkage record of the interval containing a fixed point `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct YTrack {
    pub y: f64,
    /// Per-cut ratios `r_k` = retained length / parent length.
    pub ratios: Vec<f64>,
    pub n_cuts: usize,
    pub final_length: f64,
}

impl YTrack {
    pub fn total_shrinkage(&self) -> f64 {
        self.ratios.iter().product()
    }
}

/// Repeatedly splits the interval containing `y`, discarding the rest, until
/// the retained interval is at or below `x_c`.
pub fn track_y_interval(law: &SplitLaw, y: f64, x_c: f64, seed: u64) -> Result<YTrack> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain {
            what: "y",
            value: y,
            domain: "(0, 1)",
        });
    }
    if !(x_c > 0.0) {
        return Err(invalid("x_c", format!("cutoff {x_c} must be positive")));
    }
    let mut rng = rng_from_seed(seed);
    let mut offsets = Vec::new();
    let mut current = Interval {
        left: 0.0,
        length: 1.0,
    };
    let mut ratios = Vec::new();
    while current.length > x_c {
        let next = loop {
            law.sample_split(current.length, &mut rng, &mut offsets)?;
            let rel = y - current.left;
            // Landing exactly on a division point has probability zero; redraw.
            if offsets.contains(&rel) {
                continue;
            }
            let k = offsets.partition_point(|&o| o < rel);
            let lo = if k == 0 { 0.0 } else { offsets[k - 1] };
            let hi = if k == offsets.len() {
                current.length
            } else {
                offsets[k]
            };
            break Interval {
                left: current.left + lo,
                length: hi - lo,
            };
        };
        ratios.push(next.length / current.length);
        current = next;
    }
    Ok(YTrack {
        y,
        n_cuts: ratios.len(),
        ratios,
        final_length: current.length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear-scan simulator consuming the same random stream.
    fn naive_splits(law: &SplitLaw, x_c: f64, seed: u64, steps: usize) -> Vec<SplitEvent> {
        let mut rng = rng_from_seed(seed);
        let mut live: Vec<(Interval, u64)> = vec![(
            Interval {
                left: 0.0,
                length: 1.0,
            },
            0,
        )];
        let mut next = 1;
        let mut offsets = Vec::new();
        let mut events = Vec::new();
        for _ in 0..steps {
            let best = live
                .iter()
                .enumerate()
                .filter(|(_, (iv, _))| iv.length > x_c)
                .max_by(|a, b| {
                    a.1 .0
                        .length
                        .total_cmp(&b.1 .0.length)
                        .then_with(|| b.1 .1.cmp(&a.1 .1))
                })
                .map(|(i, _)| i);
            let Some(i) = best else { break };
            let (parent, _) = live.swap_remove(i);
            law.sample_split(parent.length, &mut rng, &mut offsets)
                .unwrap();
            let mut left = parent.left;
            let mut children = Vec::new();
            for &o in &offsets {
                let p = parent.left + o;
                children.push(Interval {
                    left,
                    length: p - left,
                });
                left = p;
            }
            children.push(Interval {
                left,
                length: parent.right() - left,
            });
            for &c in &children {
                if c.length > x_c {
                    live.push((c, next));
                    next += 1;
                } else {
                    live.push((c, u64::MAX));
                }
            }
            events.push(SplitEvent { parent, children });
        }
        events
    }

    #[test]
    fn heap_engine_matches_linear_scan_oracle() {
        for law in [SplitLaw::Kakutani, SplitLaw::b_uniform(3).unwrap()] {
            let mut state = FragState::new(law.clone(), 1e-3, 11).unwrap();
            let expected = naive_splits(&law, 1e-3, 11, 100);
            for e in expected {
                assert_eq!(state.step().unwrap(), e);
            }
        }
    }

    #[test]
    fn first_kakutani_step_conserves_length() {
        let mut state = FragState::new(SplitLaw::Kakutani, 1e-3, 1).unwrap();
        let ev = state.step().unwrap();
        assert_eq!(ev.children.len(), 2);
        let total: f64 = ev.children.iter().map(|c| c.length).sum();
        assert!((total - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn interval_count_grows_by_b_minus_one() {
        let mut state = FragState::new(SplitLaw::b_uniform(3).unwrap(), 1e-4, 2).unwrap();
        for n in 1..=500u64 {
            state.step().unwrap();
            assert_eq!(
                (state.active_count() + state.frozen_count()) as u64,
                1 + 2 * n
            );
        }
    }

    #[test]
    fn greedy_parent_is_the_global_maximum() {
        let mut state = FragState::new(SplitLaw::Kakutani, 1e-3, 3).unwrap();
        for _ in 0..300 {
            let max = state.intervals().map(|i| i.length).fold(0.0, f64::max);
            let ev = state.step().unwrap();
            assert_eq!(ev.parent.length, max);
        }
    }

    #[test]
    fn stepping_a_finished_state_fails() {
        let mut state = FragState::new(SplitLaw::Kakutani, 0.6, 4).unwrap();
        while !state.is_finished() {
            state.step().unwrap();
        }
        assert_eq!(state.step(), Err(Error::Finished));
        let result = state.finish();
        assert!(result.n_steps >= 1);
        assert!(result.is_complete());
    }

    #[test]
    fn trivial_and_rejected_cutoffs() {
        let r = run_to_cutoff(&SplitLaw::Kakutani, 1.0, 0).unwrap();
        assert_eq!(r.n_steps, 0);
        assert_eq!(
            r.spacings,
            vec![Interval {
                left: 0.0,
                length: 1.0
            }]
        );
        assert!(run_to_cutoff(&SplitLaw::Kakutani, 0.0, 0).is_err());
        assert!(run_to_cutoff(&SplitLaw::Kakutani, -1.0, 0).is_err());
        assert!(run_to_cutoff(&SplitLaw::heavy_tail(1.5).unwrap(), 0.1, 0).is_err());
    }

    #[test]
    fn run_is_deterministic_and_conserves_mass() {
        let a = run_to_cutoff(&SplitLaw::Kakutani, 1e-3, 9).unwrap();
        let b = run_to_cutoff(&SplitLaw::Kakutani, 1e-3, 9).unwrap();
        assert_eq!(a.spacings, b.spacings);
        assert_eq!(a.partition_points, b.partition_points);
        let total: f64 = a.spacings.iter().map(|s| s.length).sum();
        assert!((total - 1.0).abs() < 1e3 * f64::EPSILON);
        assert_eq!(a.partition_points.len() as u64, a.n_steps);
        assert!(a.maxima_trajectory.windows(2).all(|w| w[0] >= w[1]));
        assert!(a.spacings.iter().all(|s| s.length <= a.x_c));
        assert_eq!(a.spacings.len() as u64, a.n_steps + 1);
        // Spacings tile the unit interval.
        for w in a.spacings.windows(2) {
            assert!((w[0].right() - w[1].left).abs() < 1e-15);
        }
    }

    #[test]
    fn y_tracking_stops_at_the_cutoff() {
        let t = track_y_interval(&SplitLaw::Kakutani, 0.5, 1e-4, 5).unwrap();
        assert!(t.total_shrinkage() <= 1e-4 * (1.0 + 1e-12));
        assert!((t.total_shrinkage() - t.final_length).abs() < 1e-15);
        assert!(t.ratios.iter().all(|&r| r > 0.0 && r <= 1.0));
        assert_eq!(t.n_cuts, t.ratios.len());
        assert!(track_y_interval(&SplitLaw::Kakutani, 1.0, 1e-4, 5).is_err());
    }

    #[test]
    fn csv_has_one_row_per_spacing() {
        let r = run_to_cutoff(&SplitLaw::Kakutani, 0.05, 1).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("left,length"));
        assert_eq!(text.lines().count(), r.spacings.len() + 1);
        let manifest = r.manifest(0.5);
        assert_eq!(manifest["law"]["kind"], "kakutani");
        assert_eq!(manifest["n_steps"], r.n_steps);
    }
}
