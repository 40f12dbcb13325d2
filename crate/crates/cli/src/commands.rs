use std::time::Instant;

use fragmenta::discrete::{
    predict_critical_points, simulate_discrete, size_profile_slope, DiscreteParams, DiscreteProfile,
};
use fragmenta::empirics::{
    concentration_check, martingale_increments, point_cdf_deviation, spacing_deviation,
};
use fragmenta::profile::{
    characteristic_roots, classify_stationarity, solve_volterra_h, subtree_profile,
};
use fragmenta::replicate::{derive_seed, replicate};
use fragmenta::stationary::StationarySolution;
use fragmenta::verify::{run_criteria, AcceptanceScale, SpacingSuite};
use fragmenta::{run_steps, run_to_cutoff, SplitLaw};
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{num, Outputs, RunManifest};

pub const DEFAULT_PROFILE_GRID: usize = 4096;
pub const DEFAULT_THEORY_GRID: usize = 100;
pub const DEFAULT_VERIFY_REPLICATES: usize = 200;
pub const DEFAULT_DISCRETE_N: u64 = 1_000_000;
pub const DEFAULT_TREE_SIZE: u64 = 1000;

pub fn run(config: &RunConfig) -> CliResult<RunManifest> {
    config.validate()?;
    match config.command {
        Command::Simulate => simulate(config),
        Command::Theory => theory(config),
        Command::Roots => roots(config),
        Command::Profile => profile(config),
        Command::Discrete => discrete(config),
        Command::Verify => verify(config),
    }
}

fn simulate(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let law = config.law_or(SplitLaw::Kakutani)?;
    let x_c = config.x_c;
    let count = config.replicates_or(1);
    let runs = replicate(config.master_seed, count, |_, seed| {
        let t = Instant::now();
        let r = match config.steps {
            Some(n) => run_steps(&law, x_c, n, seed),
            None => run_to_cutoff(&law, x_c, seed),
        }?;
        Ok::<_, fragmenta::Error>((r, t.elapsed().as_secs_f64()))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let stationary = StationarySolution::solve(&law).ok();
    let u = |x: f64| match &stationary {
        Some(s) if x > 0.0 => s.cdf(x.min(1.0)).unwrap_or(f64::NAN),
        _ => 0.0,
    };
    let mut out = Outputs::create(&config.output_dir)?;
    let mut deviations = Vec::new();
    let mut per_replicate = Vec::new();
    for (i, (r, wall)) in runs.iter().enumerate() {
        let mut bytes = Vec::new();
        r.write_csv(&mut bytes)
            .map_err(CliError::io(config.output_dir.join("spacings")))?;
        out.write(&format!("spacings_{i:04}.csv"), &bytes)?;
        let mut stat = |name: &str, v: f64| {
            deviations.push(vec![i.to_string(), name.to_string(), num(v)]);
        };
        if stationary.is_some() && !r.spacings.is_empty() {
            stat("spacing_sup_deviation", spacing_deviation(r, u)?);
        }
        if !r.partition_points.is_empty() {
            stat("point_sup_deviation", point_cdf_deviation(r)?);
        }
        stat("spacings", r.spacings.len() as f64);
        stat("steps", r.n_steps as f64);
        per_replicate.push(r.manifest(*wall));
    }
    out.write_csv(
        "deviations.csv",
        &["replicate", "statistic", "value"],
        deviations,
    )?;

    let mut summary = json!({ "law": law, "x_c": x_c, "replicates": per_replicate });
    if let Some(n) = config.steps {
        let sums = runs
            .iter()
            .map(|(r, _)| martingale_increments(r, &law, x_c).map(|s| (s.last(), s.bound_c)))
            .collect::<Result<Vec<_>, _>>()?;
        let c = sums.first().map_or(2.0, |s| s.1);
        let values: Vec<f64> = sums.iter().map(|s| s.0).collect();
        let lambdas: Vec<f64> = (1..=4)
            .map(|k| k as f64 * (2.0 * n as f64).sqrt())
            .collect();
        let rows = concentration_check(&values, n, c, &lambdas)?;
        out.write_csv(
            "concentration.csv",
            &["lambda", "empirical_tail", "azuma_bound"],
            rows.iter()
                .map(|r| vec![num(r.lambda), num(r.empirical_tail), num(r.azuma_bound)]),
        )?;
        summary["azuma_violations"] = json!(rows.iter().filter(|r| r.violated).count());
    }
    let seeds = runs.iter().map(|(r, _)| r.seed).collect();
    let walls = runs.iter().map(|(_, w)| *w).collect();
    out.finish(config, seeds, walls, start.elapsed().as_secs_f64(), summary)
}

fn theory(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let law = config.law_or(SplitLaw::Kakutani)?;
    let sol = StationarySolution::solve(&law)?;
    let table = sol.tabulate(config.grid_or(DEFAULT_THEORY_GRID))?;
    let grid: Vec<f64> = table.iter().map(|p| p.x).collect();
    let ode = sol.ode_residual(&grid)?;
    let mut out = Outputs::create(&config.output_dir)?;
    out.write_csv(
        "stationary_cdf.csv",
        &["x", "u"],
        table.iter().map(|p| vec![num(p.x), num(p.u)]),
    )?;
    let summary = json!({
        "law": law,
        "C": sol.c,
        "exponent": sol.exponent(),
        "constant_residual": sol.residual,
        "ode_residual": ode,
    });
    out.finish(
        config,
        vec![],
        vec![],
        start.elapsed().as_secs_f64(),
        summary,
    )
}

fn roots(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    if config.m.is_empty() {
        return Err(CliError::usage("m", "give at least one arity, e.g. --m 3"));
    }
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for &m in &config.m {
        for r in characteristic_roots(m)?.rows() {
            rows.push(vec![
                r.m.to_string(),
                r.i.to_string(),
                num(r.re),
                num(r.im),
                num(r.residual),
            ]);
        }
        if m >= 3 {
            classes.push(classify_stationarity(m)?);
        }
    }
    let mut out = Outputs::create(&config.output_dir)?;
    out.write_csv("roots.csv", &["m", "i", "re", "im", "residual"], rows)?;
    let summary = json!({ "stationarity": classes });
    out.finish(
        config,
        vec![],
        vec![],
        start.elapsed().as_secs_f64(),
        summary,
    )
}

fn arity_of(law: &SplitLaw) -> Option<u32> {
    match law {
        SplitLaw::Kakutani => Some(2),
        SplitLaw::BUniform { b } => Some(*b),
        SplitLaw::MAry { m } => Some(*m),
        _ => None,
    }
}

/// Up to `points` distinct integers spread geometrically over `1..=n`.
fn geometric_sizes(n: u64, points: usize) -> Vec<u64> {
    let mut ks: Vec<u64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points.max(2) - 1) as f64;
            ((n as f64).powf(t).round() as u64).clamp(1, n)
        })
        .collect();
    ks.dedup();
    ks
}

fn profile(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let law = config.law_or(SplitLaw::Kakutani)?;
    let y_min = config.y_min.unwrap_or(0.05);
    if !(y_min > 0.0 && y_min < 1.0) {
        return Err(CliError::usage(
            "y_min",
            format!("{y_min} must lie in (0, 1)"),
        ));
    }
    let sol = solve_volterra_h(&law, y_min, config.grid_or(DEFAULT_PROFILE_GRID))?;
    let mut out = Outputs::create(&config.output_dir)?;
    out.write_csv(
        "profile_h.csv",
        &["y", "H"],
        sol.points().iter().map(|p| vec![num(p.y), num(p.h)]),
    )?;
    let mut summary = json!({ "law": law, "richardson_error": sol.richardson_error });
    if let Some(m) = arity_of(&law) {
        let n = config.n.unwrap_or(DEFAULT_TREE_SIZE);
        let rows = geometric_sizes(n, 60)
            .into_iter()
            .map(|k| subtree_profile(m, n, k))
            .collect::<Result<Vec<_>, _>>()?;
        out.write_csv(
            "subtree_counts.csv",
            &["k", "count"],
            rows.iter().map(|r| vec![r.k.to_string(), num(r.full)]),
        )?;
        summary["tree_size"] = json!(n);
    }
    out.finish(
        config,
        vec![],
        vec![],
        start.elapsed().as_secs_f64(),
        summary,
    )
}

fn profile_rows(p: &DiscreteProfile) -> Vec<Vec<String>> {
    p.counts
        .iter()
        .map(|(s, c)| vec![s.to_string(), c.to_string()])
        .collect()
}

fn discrete(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let law = config.law_or(SplitLaw::heavy_tail(1.5)?)?;
    let n = config.n.unwrap_or(DEFAULT_DISCRETE_N);
    let params = DiscreteParams {
        n,
        stop_size: config.stop_size.unwrap_or(1),
        stop_at_critical: false,
    };
    let seed = derive_seed(config.master_seed, 0);
    let outcome = simulate_discrete(&law, params, &config.snapshots, seed)?;
    let wall = start.elapsed().as_secs_f64();

    let mut out = Outputs::create(&config.output_dir)?;
    for snap in &outcome.snapshots {
        out.write_csv(
            &format!("snapshot_{}.csv", snap.milestone),
            &["size", "count"],
            profile_rows(&snap.profile),
        )?;
    }
    out.write_csv("final.csv", &["size", "count"], profile_rows(&outcome.last))?;
    out.write_csv(
        "largest_counts.csv",
        &["size", "count"],
        outcome
            .largest_counts
            .iter()
            .map(|(s, c)| vec![s.to_string(), c.to_string()]),
    )?;
    let detected = match &outcome.critical {
        Some(c) => {
            out.write_csv("critical.csv", &["size", "count"], profile_rows(&c.profile))?;
            let slope = size_profile_slope(&c.profile, 10, (c.size / 10).max(11), 12)
                .ok()
                .map(|f| f.slope);
            json!({ "size": c.size, "steps": c.profile.t, "size_profile_slope": slope })
        }
        None => serde_json::Value::Null,
    };
    let alpha = match law {
        SplitLaw::HeavyTail { alpha } => Some(alpha),
        _ => None,
    };
    let predicted = alpha.and_then(|a| predict_critical_points(a, n).ok());
    let summary = json!({
        "law": law,
        "n": n,
        "steps": outcome.last.t,
        "detected": detected,
        "predicted": predicted,
    });
    out.write_json("summary.json", &summary)?;
    out.finish(
        config,
        vec![seed],
        vec![wall],
        start.elapsed().as_secs_f64(),
        summary,
    )
}

fn verify(config: &RunConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let mut scale = AcceptanceScale {
        seed: config.master_seed,
        ..AcceptanceScale::default()
    };
    scale.spacing = SpacingSuite {
        law: config.law_or(SplitLaw::Kakutani)?,
        x_c: config.x_c,
        replicates: config.replicates_or(DEFAULT_VERIFY_REPLICATES),
        seed: config.master_seed,
    };
    if let Some(c) = config.criteria.iter().find(|c| !(1..=12).contains(*c)) {
        return Err(CliError::usage(
            "criteria",
            format!("no criterion {c}; use 1..=12"),
        ));
    }
    let reports = run_criteria(&scale, &config.criteria)?;
    let mut rows = Vec::new();
    for r in &reports {
        print!("{r}");
        for c in &r.checks {
            rows.push(vec![
                r.id.to_string(),
                r.title.clone(),
                c.label.clone(),
                num(c.value),
                c.lo.map(num).unwrap_or_default(),
                c.hi.map(num).unwrap_or_default(),
                c.enforced.to_string(),
                c.passed.to_string(),
            ]);
        }
    }
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let mut out = Outputs::create(&config.output_dir)?;
    out.write_csv(
        "verify.csv",
        &[
            "criterion",
            "title",
            "check",
            "value",
            "lo",
            "hi",
            "enforced",
            "passed",
        ],
        rows,
    )?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let summary = json!({
        "criteria": reports.iter().map(|r| json!({
            "id": r.id,
            "title": r.title,
            "passed": r.passed(),
            "seconds": r.seconds,
        })).collect::<Vec<_>>(),
        "failed": failed,
    });
    let manifest = out.finish(
        config,
        vec![],
        vec![],
        start.elapsed().as_secs_f64(),
        summary,
    )?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(manifest)
}
