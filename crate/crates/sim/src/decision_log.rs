//! Whitespace-separated decision logs, one cluster per line:
//!
//! ```text
//! # strategy cluster status reason ik removed
//! boundary 12 accepted - success 0
//! center 40 rejected_policy obstacle_clearance - 0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use blossom_core::perception::{FilterStatus, RejectReason};
use blossom_core::replay::DecisionRecord;
use blossom_core::route::{IkVerdict, Strategy};
use blossom_core::scene::ClusterId;

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn strategy_token(s: Strategy) -> &'static str {
    s.name()
}

fn status_token(s: FilterStatus) -> &'static str {
    match s {
        FilterStatus::Accepted => "accepted",
        FilterStatus::RejectedAutomatic => "rejected_automatic",
        FilterStatus::RejectedPolicy => "rejected_policy",
    }
}

fn reason_token(r: Option<RejectReason>) -> &'static str {
    match r {
        None => "-",
        Some(RejectReason::BeyondDepthLimit) => "beyond_depth_limit",
        Some(RejectReason::InvalidDepth) => "invalid_depth",
        Some(RejectReason::ObstacleClearance) => "obstacle_clearance",
    }
}

fn ik_token(ik: Option<IkVerdict>) -> &'static str {
    ik.map_or("-", IkVerdict::name)
}

fn parse_record(fields: &[&str]) -> Result<DecisionRecord, String> {
    let [strategy, id, status, reason, ik, removed] = fields[..] else {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    };
    let strategy = match strategy {
        "boundary" => Strategy::Boundary,
        "center" => Strategy::Center,
        other => return Err(format!("unknown strategy `{other}`")),
    };
    let id = ClusterId(id.parse().map_err(|_| format!("bad cluster id `{id}`"))?);
    let status = match status {
        "accepted" => FilterStatus::Accepted,
        "rejected_automatic" => FilterStatus::RejectedAutomatic,
        "rejected_policy" => FilterStatus::RejectedPolicy,
        other => return Err(format!("unknown status `{other}`")),
    };
    let reason = match reason {
        "-" => None,
        "beyond_depth_limit" => Some(RejectReason::BeyondDepthLimit),
        "invalid_depth" => Some(RejectReason::InvalidDepth),
        "obstacle_clearance" => Some(RejectReason::ObstacleClearance),
        other => return Err(format!("unknown reason `{other}`")),
    };
    let ik = match ik {
        "-" => None,
        "success" => Some(IkVerdict::Success),
        "no_ik" => Some(IkVerdict::NoIk),
        "non_optimal_ik" => Some(IkVerdict::NonOptimalIk),
        other => return Err(format!("unknown IK verdict `{other}`")),
    };
    let completely_removed = match removed {
        "0" => false,
        "1" => true,
        other => return Err(format!("removed flag must be 0 or 1, got `{other}`")),
    };
    let record = DecisionRecord { id, strategy, status, reason, ik, completely_removed };
    record.check().map_err(str::to_string)?;
    Ok(record)
}

pub fn parse_log(text: &str) -> Result<Vec<DecisionRecord>, LogError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let record = parse_record(&fields).map_err(|message| LogError::Parse { line: i + 1, message })?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_log(path: &Path) -> Result<Vec<DecisionRecord>, LogError> {
    let text = std::fs::read_to_string(path).map_err(|source| LogError::Io { path: path.display().to_string(), source })?;
    parse_log(&text)
}

pub fn write_log(records: &[DecisionRecord]) -> String {
    let mut out = String::from("# strategy cluster status reason ik removed\n");
    for r in records {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            strategy_token(r.strategy),
            r.id,
            status_token(r.status),
            reason_token(r.reason),
            ik_token(r.ik),
            r.completely_removed as u8
        )
        .unwrap();
    }
    out
}
