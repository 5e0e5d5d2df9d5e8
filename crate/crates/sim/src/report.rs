//! Summary documents and the four report tables.
//!
//! Column orders are frozen:
//!
//! | table      | columns |
//! |------------|---------|
//! | funnel     | `measure`, one column per strategy, `total` |
//! | motion     | `measure`, one column per strategy, `total` |
//! | efficiency | `strategy`, `clusters_thinned`, `clusters_completely_removed`, `proportional_success`, `flowers`, `completely_removed`, `petal_anther_removed`, `petal_removed`, `saved`, `thinned_proportion` |
//! | cycle      | `strategy`, `clusters`, `segmentation`, `pose_estimation`, `motion_planning`, `approach`, `thin`, `retract`, `total` |
//!
//! Funnel and motion tables have no rows when nothing was detected; efficiency and
//! cycle tables have one row per strategy that thinned at least one cluster (the
//! efficiency table adds an `all` row). Replayed logs carry no timing, so their
//! cycle table is empty.

use std::fmt::Write as _;

use blossom_core::exec::{FlowerCategory, PhaseDurations, StrategySummary};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Delimited,
    Structured,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub acceptance_rate: Option<f64>,
    pub motion_success_rate: Option<f64>,
    pub thinned_proportion: Option<f64>,
    pub category_proportions: Option<[f64; 4]>,
    pub proportional_success: Option<f64>,
    pub mean_cycle_s: Option<f64>,
    pub mean_phases_s: Option<PhaseDurations>,
}

impl Derived {
    pub fn of(s: &StrategySummary) -> Self {
        let timed = s.cycle_sum_s > 0.0;
        Derived {
            acceptance_rate: s.acceptance_rate(),
            motion_success_rate: s.motion_success_rate(),
            thinned_proportion: s.thinned_proportion(),
            category_proportions: (s.flower_total() > 0)
                .then(|| FlowerCategory::ALL.map(|c| s.category_proportion(c).unwrap_or(0.0))),
            proportional_success: s.proportional_success(),
            mean_cycle_s: s.mean_cycle_s().filter(|_| timed),
            mean_phases_s: s.mean_phases().filter(|_| timed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    pub counts: StrategySummary,
    pub derived: Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synthetic,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryDoc {
    pub schema_version: u32,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub replicates: u32,
    pub strategies: Vec<StrategyReport>,
    /// Proportional success over every strategy's thinned clusters.
    pub proportional_success: Option<f64>,
}

impl SummaryDoc {
    pub fn new(mode: Mode, seed: Option<u64>, replicates: u32, summaries: &[StrategySummary]) -> Self {
        SummaryDoc {
            schema_version: SCHEMA_VERSION,
            mode,
            seed,
            replicates,
            strategies: summaries
                .iter()
                .map(|s| StrategyReport { counts: s.clone(), derived: Derived::of(s) })
                .collect(),
            proportional_success: overall_proportional_success(summaries),
        }
    }

    pub fn summaries(&self) -> Vec<StrategySummary> {
        self.strategies.iter().map(|s| s.counts.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub fn overall_proportional_success(summaries: &[StrategySummary]) -> Option<f64> {
    let thinned: u64 = summaries.iter().map(|s| s.clusters_thinned).sum();
    let removed: u64 = summaries.iter().map(|s| s.clusters_completely_removed).sum();
    (thinned > 0).then(|| 1.0 - removed as f64 / thinned as f64)
}

/// A rendered table: header plus string cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: &'static str,
    pub title: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Columns holding real numbers rather than counts.
    #[serde(skip)]
    pub float_cols: Vec<usize>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn wide_table(
    name: &'static str,
    title: &'static str,
    summaries: &[StrategySummary],
    rows: &[(&str, fn(&StrategySummary) -> u64)],
) -> Table {
    let mut header = vec!["measure".to_string()];
    header.extend(summaries.iter().map(|s| s.strategy.name().to_string()));
    header.push("total".into());
    let any = summaries.iter().any(|s| s.detected > 0);
    let rows = if any {
        rows.iter()
            .map(|(label, f)| {
                let mut r = vec![label.to_string()];
                r.extend(summaries.iter().map(|s| f(s).to_string()));
                r.push(summaries.iter().map(f).sum::<u64>().to_string());
                r
            })
            .collect()
    } else {
        Vec::new()
    };
    Table { name, title, header, rows, float_cols: Vec::new() }
}

pub fn funnel_table(summaries: &[StrategySummary]) -> Table {
    wide_table(
        "funnel",
        "Detected clusters vs clusters attempted",
        summaries,
        &[
            ("accepted", |s| s.accepted),
            ("rejected_automatic", |s| s.rejected_automatic),
            ("rejected_policy", |s| s.rejected_policy),
            ("total", |s| s.detected),
        ],
    )
}

pub fn motion_table(summaries: &[StrategySummary]) -> Table {
    wide_table(
        "motion",
        "Accepted clusters vs successful motion plans",
        summaries,
        &[
            ("success", |s| s.ik_success),
            ("no_ik", |s| s.no_ik),
            ("non_optimal_ik", |s| s.non_optimal_ik),
            ("total", |s| s.accepted),
        ],
    )
}

fn efficiency_row(label: &str, s: &StrategySummary) -> Vec<String> {
    let mut r = vec![
        label.to_string(),
        s.clusters_thinned.to_string(),
        s.clusters_completely_removed.to_string(),
        opt(s.proportional_success()),
        s.flower_total().to_string(),
    ];
    r.extend(FlowerCategory::ALL.iter().map(|c| opt(s.category_proportion(*c))));
    r.push(opt(s.thinned_proportion()));
    r
}

pub fn efficiency_table(summaries: &[StrategySummary]) -> Table {
    let mut header: Vec<String> = ["strategy", "clusters_thinned", "clusters_completely_removed", "proportional_success", "flowers"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(FlowerCategory::ALL.iter().map(|c| c.name().to_string()));
    header.push("thinned_proportion".into());
    let thinned: Vec<&StrategySummary> = summaries.iter().filter(|s| s.clusters_thinned > 0).collect();
    let mut rows: Vec<Vec<String>> = thinned.iter().map(|s| efficiency_row(s.strategy.name(), s)).collect();
    if let Some((first, rest)) = thinned.split_first() {
        let all = rest.iter().fold((*first).clone(), |acc, s| acc.merge(s));
        rows.push(efficiency_row("all", &all));
    }
    Table { name: "efficiency", title: "Thinning efficiency", header, rows, float_cols: vec![3, 5, 6, 7, 8, 9] }
}

pub fn cycle_table(summaries: &[StrategySummary]) -> Table {
    let mut header = vec!["strategy".to_string(), "clusters".to_string()];
    header.extend(PhaseDurations::NAMES.iter().map(|s| s.to_string()));
    header.push("total".into());
    let rows = summaries
        .iter()
        .filter(|s| s.cycle_sum_s > 0.0)
        .filter_map(|s| {
            let phases = s.mean_phases()?;
            let mut r = vec![s.strategy.name().to_string(), s.clusters_thinned.to_string()];
            r.extend(phases.as_array().iter().map(|x| num(*x)));
            r.push(opt(s.mean_cycle_s()));
            Some(r)
        })
        .collect();
    Table { name: "cycle", title: "Mean cycle time per thinned cluster, s", header, rows, float_cols: (2..9).collect() }
}

pub fn all_tables(summaries: &[StrategySummary]) -> Vec<Table> {
    vec![funnel_table(summaries), motion_table(summaries), efficiency_table(summaries), cycle_table(summaries)]
}

pub fn to_csv(table: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for r in &table.rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells")
}

pub fn tables_json(tables: &[Table]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema_version: u32,
        tables: &'a [Table],
    }
    let mut s = serde_json::to_string_pretty(&Doc { schema_version: SCHEMA_VERSION, tables }).expect("tables serialize");
    s.push('\n');
    s
}

fn pretty_cell(cell: &str, float: bool) -> String {
    match cell.parse::<f64>() {
        Ok(x) if float => format!("{x:.3}"),
        _ => cell.to_string(),
    }
}

/// Aligned text rendering, three decimals, followed by the proportional success line.
pub fn plain_report(summaries: &[StrategySummary]) -> String {
    let mut out = String::new();
    for t in all_tables(summaries) {
        let cells: Vec<Vec<String>> = std::iter::once(t.header.clone())
            .chain(t.rows.iter().map(|r| {
                r.iter().enumerate().map(|(i, c)| pretty_cell(c, t.float_cols.contains(&i))).collect()
            }))
            .collect();
        let widths: Vec<usize> = (0..t.header.len())
            .map(|i| cells.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        writeln!(out, "{}", t.title).unwrap();
        for r in &cells {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            writeln!(out, "  {}", line.join("  ").trim_end()).unwrap();
        }
        out.push('\n');
    }
    match overall_proportional_success(summaries) {
        Some(p) => writeln!(out, "proportional success {:.0}%", p * 100.0).unwrap(),
        None => writeln!(out, "proportional success n/a").unwrap(),
    }
    out
}
