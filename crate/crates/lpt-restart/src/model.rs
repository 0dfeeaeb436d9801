//! Domain types: jobs, instances, execution traces, and policy selection.
//!
//! All types are immutable value types after construction. The JSON formats
//! keep every rational as a string so parsing and serializing are lossless.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::rat::Rat;

pub type JobId = u64;
pub type MachineId = usize;

/// One task: release time `r_j` and processing size `p_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub release: Rat,
    pub size: Rat,
}

impl Job {
    pub fn new(id: JobId, release: Rat, size: Rat) -> Job {
        Job { id, release, size }
    }
}

/// Machine count plus job list; the unit of simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub machines: usize,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("machines must be >= 1")]
    NoMachines,
    #[error("instance has no jobs")]
    NoJobs,
    #[error("job {0}: size must be > 0")]
    NonPositiveSize(JobId),
    #[error("job {0}: release must be >= 0")]
    NegativeRelease(JobId),
    #[error("duplicate job id {0}")]
    DuplicateId(JobId),
    #[error("malformed instance JSON: {0}")]
    Json(String),
    #[error("scale factor must be > 0")]
    NonPositiveFactor,
}

impl Instance {
    pub fn new(machines: usize, jobs: Vec<Job>) -> Result<Instance, ModelError> {
        let inst = Instance { machines, jobs };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.machines < 1 {
            return Err(ModelError::NoMachines);
        }
        if self.jobs.is_empty() {
            return Err(ModelError::NoJobs);
        }
        let mut seen = HashSet::new();
        for job in &self.jobs {
            if !job.size.is_positive() {
                return Err(ModelError::NonPositiveSize(job.id));
            }
            if job.release.is_negative() {
                return Err(ModelError::NegativeRelease(job.id));
            }
            if !seen.insert(job.id) {
                return Err(ModelError::DuplicateId(job.id));
            }
        }
        Ok(())
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn total_work(&self) -> Rat {
        self.jobs.iter().fold(Rat::ZERO, |acc, j| acc + j.size)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// Parses the instance JSON format and validates it.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let inst: Instance =
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

/// Multiplies all releases and sizes by `factor` (> 0).
pub fn scale_instance(inst: &Instance, factor: Rat) -> Result<Instance, ModelError> {
    if !factor.is_positive() {
        return Err(ModelError::NonPositiveFactor);
    }
    Ok(Instance {
        machines: inst.machines,
        jobs: inst
            .jobs
            .iter()
            .map(|j| Job::new(j.id, j.release * factor, j.size * factor))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentOutcome {
    Completed,
    Replaced { by: JobId },
}

/// A maximal run of one job on one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub job_id: JobId,
    pub machine: MachineId,
    pub start: Rat,
    pub end: Rat,
    pub outcome: SegmentOutcome,
}

impl Segment {
    pub fn length(&self) -> Rat {
        self.end - self.start
    }

    /// Length of the overlap of this segment with `[0, t]`.
    pub fn overlap_before(&self, t: Rat) -> Rat {
        (self.end.min(t) - self.start).max(Rat::ZERO)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Event {
    Arrival { t: Rat, job: JobId },
    Start { t: Rat, job: JobId, machine: MachineId },
    Replace { t: Rat, victim: JobId, by: JobId, machine: MachineId },
    Complete { t: Rat, job: JobId, machine: MachineId },
}

impl Event {
    pub fn time(&self) -> Rat {
        match *self {
            Event::Arrival { t, .. }
            | Event::Start { t, .. }
            | Event::Replace { t, .. }
            | Event::Complete { t, .. } => t,
        }
    }
}

/// A maximal interval during which a job was released, unfinished, and not
/// being processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingInterval {
    pub job_id: JobId,
    pub start: Rat,
    pub end: Rat,
}

/// Complete execution record of one simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub instance: Instance,
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
    pub pending_intervals: Vec<PendingInterval>,
}

impl Trace {
    /// Completion time of `job`, from its unique Completed segment.
    pub fn completion(&self, job: JobId) -> Option<Rat> {
        self.segments
            .iter()
            .find(|s| s.job_id == job && matches!(s.outcome, SegmentOutcome::Completed))
            .map(|s| s.end)
    }

    pub fn makespan(&self) -> Rat {
        self.instance
            .jobs
            .iter()
            .map(|j| {
                self.completion(j.id)
                    .unwrap_or_else(|| panic!("job {} did not complete", j.id))
            })
            .max()
            .expect("nonempty instance")
    }

    /// Jobs being processed at time `t`: includes jobs completing or replaced
    /// at `t`, excludes jobs starting at `t`.
    pub fn processing_at(&self, t: Rat) -> Vec<JobId> {
        let mut ids: Vec<JobId> = self
            .segments
            .iter()
            .filter(|s| s.start < t && t <= s.end)
            .map(|s| s.job_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Trace, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }
}

/// Which online rule runs. Candidates 4 and 5 of the surveyed
/// alternatives are `LptRestart` with out-of-range parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyConfig {
    Lpt,
    LptRestart { alpha: Rat, beta: Rat },
    Candidate1 { rho: Rat },
    Candidate2 { rho: Rat, mu: Rat },
    Candidate3 { gamma: Rat },
}

impl PolicyConfig {
    /// General-machine-count parameterization: alpha = 1/200, beta ~ sqrt(2)-1.
    pub fn restart_default() -> PolicyConfig {
        PolicyConfig::LptRestart {
            alpha: Rat::new(1, 200),
            beta: Rat::new(414_213_562_373, 1_000_000_000_000),
        }
    }

    /// Sharper parameterization for two machines: alpha = beta = 1/5.
    pub fn restart_two_machines() -> PolicyConfig {
        PolicyConfig::LptRestart {
            alpha: Rat::new(1, 5),
            beta: Rat::new(1, 5),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let PolicyConfig::LptRestart { alpha, beta } = self {
            // Any positive values accepted so candidate-4/5 regimes are runnable.
            if !alpha.is_positive() || !beta.is_positive() {
                return Err(ModelError::Json(
                    "restart parameters must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}
