//! Replicate runs, replay and output files.

use std::fs;
use std::io;
use std::path::Path;

use blossom_core::exec::{FlowerCategory, StrategySummary};
use blossom_core::geometry::Point3;
use blossom_core::perception::{depth_filter, to_cloud};
use blossom_core::pipeline::{run_scenario, PipelineError, ScenarioConfig, ScenarioRun};
use blossom_core::pose::estimate_pose;
use blossom_core::replay::{summarize_log, DecisionRecord, ReplayError};
use blossom_core::scene::ClusterObservation;
use rayon::prelude::*;

use crate::decision_log::write_log;
use crate::report::{all_tables, plain_report, tables_json, to_csv, Format, Mode, SummaryDoc};

pub struct RunOutput {
    pub replicates: Vec<ScenarioRun>,
    /// Merged over replicates, in the configured strategy order.
    pub summaries: Vec<StrategySummary>,
}

/// Runs `cfg.replicates` scenes with seeds `cfg.seed + i`. Results do not depend on `jobs`.
pub fn run_replicates(cfg: &ScenarioConfig, jobs: Option<usize>) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.replicates as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let work = || seeds.par_iter().map(|s| run_scenario(cfg, *s)).collect::<Vec<_>>();
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };
    let replicates = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summaries = cfg
        .strategy
        .strategies()
        .iter()
        .map(|s| {
            replicates
                .iter()
                .flat_map(|r| r.runs.iter().filter(|run| run.strategy == *s))
                .fold(StrategySummary::empty(*s), |acc, run| acc.merge(&run.summary))
        })
        .collect();
    Ok(RunOutput { replicates, summaries })
}

pub fn replay(records: &[DecisionRecord]) -> Result<Vec<StrategySummary>, ReplayError> {
    Ok(summarize_log(records)?.to_vec())
}

/// One row per executed cluster, replicate-major, tour order within a strategy.
pub fn traces_csv(replicates: &[ScenarioRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["seed", "strategy", "cluster", "ik", "aborted", "enter_s", "exit_s"];
    header.extend(blossom_core::exec::PhaseDurations::NAMES);
    header.extend(FlowerCategory::ALL.iter().map(|c| c.name()));
    w.write_record(&header).expect("in-memory write");
    for rep in replicates {
        for run in &rep.runs {
            for t in &run.execution.traces {
                let mut counts = [0u64; 4];
                for (_, c) in &t.flower_outcomes {
                    counts[c.index()] += 1;
                }
                let mut row = vec![
                    rep.seed.to_string(),
                    run.strategy.name().to_string(),
                    t.cluster_id.to_string(),
                    t.ik.name().to_string(),
                    (t.aborted as u8).to_string(),
                    t.enter_time.to_string(),
                    t.exit_time.to_string(),
                ];
                row.extend(t.phases.as_array().iter().map(f64::to_string));
                row.extend(counts.iter().map(u64::to_string));
                w.write_record(&row).expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells")
}

pub fn decisions_log(replicates: &[ScenarioRun]) -> String {
    let records: Vec<DecisionRecord> = replicates
        .iter()
        .flat_map(|r| r.runs.iter().flat_map(|run| run.decisions.iter().copied()))
        .collect();
    write_log(&records)
}

/// Table files for `format`: `tables_*.csv`, `tables.json` or `tables.txt`.
pub fn write_tables(dir: &Path, summaries: &[StrategySummary], format: Format) -> io::Result<()> {
    match format {
        Format::Delimited => {
            for t in all_tables(summaries) {
                fs::write(dir.join(format!("table_{}.csv", t.name)), to_csv(&t))?;
            }
            Ok(())
        }
        Format::Structured => fs::write(dir.join("tables.json"), tables_json(&all_tables(summaries))),
        Format::Plain => fs::write(dir.join("tables.txt"), plain_report(summaries)),
    }
}

/// Deterministic outputs of a synthetic run.
pub fn write_run(dir: &Path, cfg: &ScenarioConfig, out: &RunOutput, format: Format) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let doc = SummaryDoc::new(Mode::Synthetic, Some(cfg.seed), cfg.replicates, &out.summaries);
    fs::write(dir.join("summary.json"), doc.to_json())?;
    fs::write(dir.join("traces.csv"), traces_csv(&out.replicates))?;
    fs::write(dir.join("decisions.log"), decisions_log(&out.replicates))?;
    fs::write(dir.join("config.toml"), crate::config::to_toml(cfg))?;
    write_tables(dir, &out.summaries, format)
}

pub fn write_replay(dir: &Path, summaries: &[StrategySummary], format: Format) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let doc = SummaryDoc::new(Mode::Replay, None, 1, summaries);
    fs::write(dir.join("summary.json"), doc.to_json())?;
    write_tables(dir, summaries, format)
}

/// Host-specific run metadata, kept apart from the deterministic outputs.
pub fn write_meta(dir: &Path, args: &[String]) -> io::Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let host = std::env::var("HOSTNAME").unwrap_or_else(|_| "unknown".into());
    let text = format!(
        "version={}\nunix_time={now}\nhost={host}\nargs={}\n",
        env!("CARGO_PKG_VERSION"),
        args.join(" ")
    );
    fs::write(dir.join("run.meta"), text)
}

/// Pose estimation on annotated observations, camera frame. One CSV row per cluster.
pub fn poses_csv(cfg: &ScenarioConfig, observations: &[ClusterObservation]) -> String {
    let cam = cfg.camera.with_viewpoint(Point3::ORIGIN);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cluster", "status", "x", "y", "z", "nx", "ny", "nz", "sub_normals", "fallback", "error"])
        .expect("in-memory write");
    for obs in observations {
        let id = obs.id.to_string();
        let row: Vec<String> = match to_cloud(obs, &cam, &cfg.perception) {
            Err(e) => vec![id, "rejected_automatic".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), e.to_string()],
            Ok(cloud) => {
                let verdict = depth_filter(&cloud, cfg.perception.max_depth);
                let status = if verdict.is_accepted() { "accepted" } else { "rejected_automatic" };
                match estimate_pose(obs.id, &cloud.points, &Point3::ORIGIN, &cfg.pose) {
                    Ok(p) => vec![
                        id,
                        status.into(),
                        p.position.x.to_string(),
                        p.position.y.to_string(),
                        p.position.z.to_string(),
                        p.normal.x().to_string(),
                        p.normal.y().to_string(),
                        p.normal.z().to_string(),
                        p.sub_normal_count.to_string(),
                        (p.fallback as u8).to_string(),
                        String::new(),
                    ],
                    Err(e) => vec![id, "rejected_automatic".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), e.to_string()],
                }
            }
        };
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells")
}
