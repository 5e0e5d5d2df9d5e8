//! Recorded per-cluster decisions and their reduction to run statistics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exec::StrategySummary;
use crate::perception::{FilterStatus, RejectReason};
use crate::route::{IkVerdict, Strategy};
use crate::scene::ClusterId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: ClusterId,
    pub strategy: Strategy,
    pub status: FilterStatus,
    pub reason: Option<RejectReason>,
    /// Present exactly for accepted clusters.
    pub ik: Option<IkVerdict>,
    /// Every flower of the cluster was removed. Only meaningful after a successful plan.
    pub completely_removed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("record {index} (cluster {id}): {problem}")]
    Inconsistent { index: usize, id: ClusterId, problem: &'static str },
    #[error("record {index}: cluster {id} appears twice for the same strategy")]
    Duplicate { index: usize, id: ClusterId },
}

impl DecisionRecord {
    pub fn check(&self) -> Result<(), &'static str> {
        match self.status {
            FilterStatus::Accepted => {
                if self.ik.is_none() {
                    return Err("accepted cluster without an IK verdict");
                }
                if self.reason.is_some() {
                    return Err("accepted cluster with a rejection reason");
                }
            }
            _ => {
                if self.ik.is_some() {
                    return Err("rejected cluster with an IK verdict");
                }
                if self.reason.is_none() {
                    return Err("rejected cluster without a reason");
                }
            }
        }
        if self.completely_removed && self.ik != Some(IkVerdict::Success) {
            return Err("completely removed but never thinned");
        }
        Ok(())
    }
}

/// Validates records, then tallies one summary per strategy (boundary first).
pub fn summarize_log(records: &[DecisionRecord]) -> Result<[StrategySummary; 2], ReplayError> {
    let mut seen: Vec<(Strategy, ClusterId)> = Vec::with_capacity(records.len());
    let mut out = [StrategySummary::empty(Strategy::Boundary), StrategySummary::empty(Strategy::Center)];
    for (index, r) in records.iter().enumerate() {
        r.check().map_err(|problem| ReplayError::Inconsistent { index, id: r.id, problem })?;
        if seen.contains(&(r.strategy, r.id)) {
            return Err(ReplayError::Duplicate { index, id: r.id });
        }
        seen.push((r.strategy, r.id));

        let s = &mut out[(r.strategy == Strategy::Center) as usize];
        s.detected += 1;
        match r.status {
            FilterStatus::Accepted => s.accepted += 1,
            FilterStatus::RejectedAutomatic => s.rejected_automatic += 1,
            FilterStatus::RejectedPolicy => s.rejected_policy += 1,
        }
        match r.ik {
            Some(IkVerdict::Success) => {
                s.ik_success += 1;
                s.clusters_thinned += 1;
                s.clusters_completely_removed += r.completely_removed as u64;
            }
            Some(IkVerdict::NoIk) => s.no_ik += 1,
            Some(IkVerdict::NonOptimalIk) => s.non_optimal_ik += 1,
            None => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u32, status: FilterStatus, ik: Option<IkVerdict>, removed: bool) -> DecisionRecord {
        let reason = match status {
            FilterStatus::Accepted => None,
            FilterStatus::RejectedAutomatic => Some(RejectReason::BeyondDepthLimit),
            FilterStatus::RejectedPolicy => Some(RejectReason::ObstacleClearance),
        };
        DecisionRecord { id: ClusterId(id), strategy: Strategy::Center, status, reason, ik, completely_removed: removed }
    }

    #[test]
    fn tallies() {
        let log = [
            rec(1, FilterStatus::Accepted, Some(IkVerdict::Success), true),
            rec(2, FilterStatus::Accepted, Some(IkVerdict::Success), false),
            rec(3, FilterStatus::Accepted, Some(IkVerdict::NoIk), false),
            rec(4, FilterStatus::RejectedPolicy, None, false),
            rec(5, FilterStatus::RejectedAutomatic, None, false),
        ];
        let [b, c] = summarize_log(&log).unwrap();
        assert_eq!(b.detected, 0);
        assert_eq!((c.detected, c.accepted, c.rejected_policy, c.rejected_automatic), (5, 3, 1, 1));
        assert_eq!((c.ik_success, c.no_ik, c.clusters_completely_removed), (2, 1, 1));
        c.check_consistency().unwrap();
    }

    #[test]
    fn rejects_inconsistent_records() {
        assert!(summarize_log(&[rec(1, FilterStatus::Accepted, None, false)]).is_err());
        assert!(summarize_log(&[rec(1, FilterStatus::Accepted, Some(IkVerdict::NoIk), true)]).is_err());
        let dup = [rec(1, FilterStatus::RejectedPolicy, None, false), rec(1, FilterStatus::RejectedPolicy, None, false)];
        assert_eq!(summarize_log(&dup), Err(ReplayError::Duplicate { index: 1, id: ClusterId(1) }));
    }
}
