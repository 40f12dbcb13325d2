//! SVG plots and a plain-text summary from CSV outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fragmenta::discrete::{size_profile_slope, DiscreteProfile};
use fragmenta::empirics::EmpiricalCdf;
use fragmenta::stationary::StationarySolution;
use fragmenta::SplitLaw;

use crate::error::{CliError, CliResult};
use crate::manifest::Outputs;
use crate::svg::{Plot, Series, Style};

const CDF_POINTS: usize = 2000;

#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub spacings: Vec<PathBuf>,
    pub theory: Option<PathBuf>,
    pub sizes: Option<PathBuf>,
    pub roots: Option<PathBuf>,
    pub verify: Option<PathBuf>,
    pub x_c: Option<f64>,
    pub law: Option<SplitLaw>,
    /// Size range of the log-log fit; defaults to `[10, max/10]`.
    pub fit_range: Option<(u64, u64)>,
    pub output_dir: PathBuf,
}

/// Rows of a CSV file whose header must equal `expected`.
fn read_table(path: &Path, expected: &[&str]) -> CliResult<Vec<csv::StringRecord>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(CliError::EmptyPlot(path.to_path_buf()));
    }
    for (i, want) in expected.iter().enumerate() {
        let found = header.get(i).unwrap_or("<missing>");
        if found.trim() != *want {
            return Err(CliError::Schema {
                path: path.to_path_buf(),
                index: i + 1,
                found: found.to_string(),
                expected: want.to_string(),
            });
        }
    }
    if let Some(extra) = header.get(expected.len()) {
        return Err(CliError::Schema {
            path: path.to_path_buf(),
            index: expected.len() + 1,
            found: extra.to_string(),
            expected: "<end of header>".into(),
        });
    }
    let rows = reader
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    if rows.is_empty() {
        return Err(CliError::EmptyPlot(path.to_path_buf()));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    columns: &[&str],
    record: &csv::StringRecord,
    index: usize,
) -> CliResult<T> {
    let raw = record.get(index).unwrap_or("");
    raw.trim().parse().map_err(|_| CliError::Value {
        path: path.to_path_buf(),
        row: row + 1,
        column: columns[index].to_string(),
        value: raw.to_string(),
    })
}

fn numeric_table(path: &Path, columns: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    read_table(path, columns)?
        .iter()
        .enumerate()
        .map(|(r, rec)| {
            (0..columns.len())
                .map(|i| field(path, r, columns, rec, i))
                .collect()
        })
        .collect()
}

/// Evenly spaced order statistics of the pooled sample, as step points.
fn thin_steps(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len();
    let stride = n.div_ceil(CDF_POINTS).max(1);
    let mut pts = vec![(0.0, 0.0)];
    for i in (0..n).step_by(stride).chain(std::iter::once(n - 1)) {
        pts.push((sorted[i], (i + 1) as f64 / n as f64));
    }
    pts.dedup();
    pts
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    if x <= table[0].0 {
        return table[0].1 * (x / table[0].0).max(0.0);
    }
    let i = table.partition_point(|p| p.0 < x);
    if i >= table.len() {
        return table[table.len() - 1].1;
    }
    let (a, b) = (table[i - 1], table[i]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

fn cdf_plot(inputs: &ReportInputs, summary: &mut String) -> CliResult<Option<String>> {
    if inputs.spacings.is_empty() {
        return Ok(None);
    }
    let x_c = inputs.x_c.ok_or_else(|| {
        CliError::usage(
            "xc",
            "the CDF overlay needs the cutoff (--xc or --manifest)",
        )
    })?;
    let mut pooled = Vec::new();
    for path in &inputs.spacings {
        for row in numeric_table(path, &["left", "length"])? {
            pooled.push(row[1] / x_c);
        }
    }
    let theory: Vec<(f64, f64)> = match (&inputs.theory, &inputs.law) {
        (Some(path), _) => numeric_table(path, &["x", "u"])?
            .into_iter()
            .map(|r| (r[0], r[1]))
            .collect(),
        (None, Some(law)) => StationarySolution::solve(law)?
            .tabulate(200)?
            .into_iter()
            .map(|p| (p.x, p.u))
            .collect(),
        (None, None) => {
            return Err(CliError::usage(
                "theory",
                "the CDF overlay needs --theory, --law or --manifest",
            ))
        }
    };
    let cdf = EmpiricalCdf::new(pooled)?;
    let sup = cdf.sup_deviation(|x| interpolate(&theory, x));
    let _ = writeln!(
        summary,
        "spacing CDF: {} spacings, sup deviation from u(x) = {sup:.5}",
        cdf.len()
    );
    let mut theory_curve = vec![(0.0, 0.0)];
    theory_curve.extend(theory.iter().copied());
    let plot = Plot {
        title: "Normalized spacing CDF".into(),
        x_label: "x / x_c".into(),
        y_label: "F(x)".into(),
        series: vec![
            Series {
                name: "empirical".into(),
                style: Style::Step,
                points: thin_steps(cdf.samples()),
            },
            Series {
                name: "theory u(x)".into(),
                style: Style::Line,
                points: theory_curve,
            },
        ],
        notes: vec![format!("sup deviation = {sup:.5}")],
        ..Plot::default()
    };
    Ok(plot.render())
}

fn sizes_plot(inputs: &ReportInputs, summary: &mut String) -> CliResult<Option<String>> {
    let Some(path) = &inputs.sizes else {
        return Ok(None);
    };
    let columns = ["size", "count"];
    let rows = read_table(path, &columns)?;
    let mut counts = BTreeMap::new();
    for (r, rec) in rows.iter().enumerate() {
        let s: u64 = field(path, r, &columns, rec, 0)?;
        let c: u64 = field(path, r, &columns, rec, 1)?;
        if c > 0 {
            *counts.entry(s).or_insert(0) += c;
        }
    }
    let max = counts.keys().next_back().copied().unwrap_or(0);
    let (lo, hi) = inputs.fit_range.unwrap_or((10, (max / 10).max(11)));
    let profile = DiscreteProfile {
        n: counts.iter().map(|(s, c)| s * c).sum(),
        counts: counts.clone(),
        t: 0,
    };
    let fit = size_profile_slope(&profile, lo, hi, 12).ok();
    let mut notes = Vec::new();
    let mut series = vec![Series {
        name: "counts".into(),
        style: Style::Points,
        points: counts.iter().map(|(&s, &c)| (s as f64, c as f64)).collect(),
    }];
    match fit {
        Some(f) => {
            let line = |x: f64| (f.intercept + f.slope * x.ln()).exp();
            series.push(Series {
                name: "least-squares fit".into(),
                style: Style::Line,
                points: vec![(lo as f64, line(lo as f64)), (hi as f64, line(hi as f64))],
            });
            notes.push(format!("slope = {:.3} over sizes [{lo}, {hi}]", f.slope));
            let _ = writeln!(
                summary,
                "size profile: log-log slope {:.4} over [{lo}, {hi}]",
                f.slope
            );
        }
        None => {
            let _ = writeln!(
                summary,
                "size profile: too few sizes in [{lo}, {hi}] to fit"
            );
        }
    }
    let plot = Plot {
        title: "Fragment size profile".into(),
        x_label: "size".into(),
        y_label: "count".into(),
        log_x: true,
        log_y: true,
        series,
        notes,
    };
    Ok(plot.render())
}

fn roots_plot(inputs: &ReportInputs, summary: &mut String) -> CliResult<Option<String>> {
    let Some(path) = &inputs.roots else {
        return Ok(None);
    };
    let rows = numeric_table(path, &["m", "i", "re", "im", "residual"])?;
    let mut by_m: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        by_m.entry(r[0] as u64).or_default().push((r[2], r[3]));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r[2], r[3])).collect();
    let (lo, hi) = points
        .iter()
        .fold((0.0f64, 0.0f64), |(l, h), p| (l.min(p.1), h.max(p.1)));
    let ms: Vec<u64> = by_m.keys().copied().collect();
    let _ = writeln!(
        summary,
        "roots: {} roots for m in [{}, {}]",
        rows.len(),
        ms[0],
        ms[ms.len() - 1]
    );
    for (m, roots) in &by_m {
        let mut re: Vec<f64> = roots.iter().map(|p| p.0).collect();
        re.sort_by(|a, b| b.total_cmp(a));
        if let Some(z2) = re.get(1) {
            let _ = writeln!(summary, "  m = {m}: Re z_2 = {z2:.5}");
        }
    }
    let plot = Plot {
        title: "Characteristic roots".into(),
        x_label: "Re z".into(),
        y_label: "Im z".into(),
        series: vec![
            Series {
                name: "roots".into(),
                style: Style::Points,
                points,
            },
            Series {
                name: "Re z = 3/2".into(),
                style: Style::Line,
                points: vec![(1.5, lo), (1.5, hi)],
            },
        ],
        ..Plot::default()
    };
    Ok(plot.render())
}

fn verify_summary(inputs: &ReportInputs, summary: &mut String) -> CliResult<bool> {
    let Some(path) = &inputs.verify else {
        return Ok(false);
    };
    let columns = [
        "criterion",
        "title",
        "check",
        "value",
        "lo",
        "hi",
        "enforced",
        "passed",
    ];
    let rows = read_table(path, &columns)?;
    let mut criteria: BTreeMap<u8, (String, bool)> = BTreeMap::new();
    for (r, rec) in rows.iter().enumerate() {
        let id: u8 = field(path, r, &columns, rec, 0)?;
        let enforced: bool = field(path, r, &columns, rec, 6)?;
        let passed: bool = field(path, r, &columns, rec, 7)?;
        let entry = criteria
            .entry(id)
            .or_insert_with(|| (rec[1].to_string(), true));
        entry.1 &= !enforced || passed;
    }
    for (id, (title, ok)) in &criteria {
        let _ = writeln!(
            summary,
            "criterion {id:>2}: {} {title}",
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    Ok(true)
}

/// Renders whichever plots have inputs and returns the summary text.
pub fn render_report(inputs: &ReportInputs) -> CliResult<String> {
    let any = !inputs.spacings.is_empty()
        || inputs.sizes.is_some()
        || inputs.roots.is_some()
        || inputs.verify.is_some();
    if !any {
        return Err(CliError::usage(
            "inputs",
            "give at least one of --spacings, --sizes, --roots, --verify",
        ));
    }
    let mut summary = String::new();
    let mut plots = Vec::new();
    let empty = |p: &Option<PathBuf>| CliError::EmptyPlot(p.clone().unwrap_or_default());
    if let Some(svg) = cdf_plot(inputs, &mut summary)? {
        plots.push(("cdf.svg", svg));
    } else if !inputs.spacings.is_empty() {
        return Err(empty(&inputs.spacings.first().cloned()));
    }
    match sizes_plot(inputs, &mut summary)? {
        Some(svg) => plots.push(("sizes.svg", svg)),
        None if inputs.sizes.is_some() => return Err(empty(&inputs.sizes)),
        None => {}
    }
    match roots_plot(inputs, &mut summary)? {
        Some(svg) => plots.push(("roots.svg", svg)),
        None if inputs.roots.is_some() => return Err(empty(&inputs.roots)),
        None => {}
    }
    verify_summary(inputs, &mut summary)?;
    let mut out = Outputs::create(&inputs.output_dir)?;
    for (name, svg) in &plots {
        out.write(name, svg.as_bytes())?;
    }
    out.write("summary.txt", summary.as_bytes())?;
    Ok(summary)
}
