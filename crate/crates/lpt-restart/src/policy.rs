//! Scheduling decision rules. All shipped policies fill idle machines with
//! the largest pending job; they differ in when a new arrival is allowed to
//! replace a running job.

use crate::engine::EngineView;
use crate::model::{JobId, MachineId, PolicyConfig};
use crate::offline;
use crate::rat::Rat;

/// Job to start on an idle machine, if any. Every shipped policy is greedy:
/// largest pending job, ties broken toward the smaller id.
pub fn decide_idle(config: &PolicyConfig, view: &EngineView<'_>) -> Option<JobId> {
    match config {
        PolicyConfig::Lpt
        | PolicyConfig::LptRestart { .. }
        | PolicyConfig::Candidate1 { .. }
        | PolicyConfig::Candidate2 { .. }
        | PolicyConfig::Candidate3 { .. } => view.largest_pending(),
    }
}

/// Replacement decision for a job arriving while all machines are busy:
/// the machine whose job it preempts, or `None` to leave it pending.
pub fn decide_arrival(
    config: &PolicyConfig,
    view: &EngineView<'_>,
    arrival: JobId,
) -> Option<MachineId> {
    let p_j = view.job(arrival).size;
    match *config {
        PolicyConfig::Lpt => None,

        PolicyConfig::LptRestart { alpha, beta } => {
            // j must be the job the greedy rule would pick next
            if view.largest_pending() != Some(arrival) {
                return None;
            }
            let (machine, k, _) = view.smallest_running()?;
            let processed = view.processed_since_start(machine);
            let p_k = view.job(k).size;
            if processed < alpha * p_j && p_j > (Rat::ONE + beta) * p_k {
                Some(machine)
            } else {
                None
            }
        }

        // Replace the smallest running job that is both strictly smaller than
        // the arrival and has processed at most a rho fraction of itself.
        PolicyConfig::Candidate1 { rho } => smallest_eligible(view, |machine, p_k| {
            let processed = view.processed_since_start(machine);
            p_k < p_j && processed <= rho * p_k
        }),

        // Same shape with a multiplicative size threshold instead of strict
        // dominance.
        PolicyConfig::Candidate2 { rho, mu } => smallest_eligible(view, |machine, p_k| {
            let processed = view.processed_since_start(machine);
            p_j >= mu * p_k && processed <= rho * p_k
        }),

        // Replace the smallest running job whenever finishing the released
        // work greedily would already overshoot the current offline optimum
        // by more than a (1+gamma) factor.
        PolicyConfig::Candidate3 { gamma } => {
            let projected = crate::engine::project_greedy_makespan(view);
            let released = view.released_jobs();
            let opt = offline::optimal_makespan(view.machines.len(), &released)
                .expect("offline oracle unavailable for candidate policy");
            if projected > (Rat::ONE + gamma) * opt {
                view.smallest_running().map(|(machine, _, _)| machine)
            } else {
                None
            }
        }
    }
}

fn smallest_eligible(
    view: &EngineView<'_>,
    eligible: impl Fn(MachineId, Rat) -> bool,
) -> Option<MachineId> {
    view.running()
        .into_iter()
        .filter(|&(machine, k, _)| eligible(machine, view.job(k).size))
        .min_by_key(|&(machine, k, _)| (view.job(k).size, k, machine))
        .map(|(machine, _, _)| machine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::model::{Instance, Job, SegmentOutcome};
    use crate::rat::{rat, Rat};

    fn inst(machines: usize, jobs: &[(u64, Rat, Rat)]) -> Instance {
        Instance::new(
            machines,
            jobs.iter().map(|&(i, r, p)| Job::new(i, r, p)).collect(),
        )
        .unwrap()
    }

    // Replacement conditions exercised through full runs: the only victim
    // candidate is the smallest running job, and all three restart
    // conditions must hold at the arrival instant.

    #[test]
    fn restart_requires_largest_pending() {
        // jobs 3 and 4 arrive together at t=1 when one machine is free; job 3
        // takes it and job 4 (size 50) stays pending without any replacement
        // check. When job 5 arrives at t=3/2 it satisfies the processed-
        // fraction and growth conditions against job 1 (the smallest running
        // job), but job 4 outranks it in the pending pool, so nothing is
        // replaced.
        let params = PolicyConfig::LptRestart {
            alpha: rat(1, 2),
            beta: rat(1, 5),
        };
        let jobs = [
            (1, Rat::ZERO, Rat::from_int(3)),
            (2, Rat::ZERO, Rat::ONE),
            (3, Rat::ONE, Rat::from_int(100)),
            (4, Rat::ONE, Rat::from_int(50)),
            (5, rat(3, 2), Rat::from_int(5)),
        ];
        let trace = run(&inst(2, &jobs), &params).unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));

        // without job 4 the same arrival does replace job 1
        let jobs_without_blocker: Vec<_> =
            jobs.iter().copied().filter(|&(id, _, _)| id != 4).collect();
        let trace = run(&inst(2, &jobs_without_blocker), &params).unwrap();
        assert!(trace
            .segments
            .iter()
            .any(|s| s.job_id == 1 && matches!(s.outcome, SegmentOutcome::Replaced { by: 5 })));
    }

    #[test]
    fn restart_condition_processed_fraction_is_strict() {
        // processed = alpha * p_j exactly: condition 2 fails, no replacement
        let alpha = rat(1, 200);
        let p_j = Rat::from_int(2);
        let release = alpha * p_j; // = 1/100
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, release, p_j)],
        );
        let trace = run(
            &inst,
            &PolicyConfig::LptRestart {
                alpha,
                beta: rat(1, 5),
            },
        )
        .unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));
    }

    #[test]
    fn restart_condition_growth_is_strict() {
        // p_j = (1+beta) * p_k exactly: condition 3 fails
        let beta = rat(1, 5);
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 1000), Rat::ONE + beta)],
        );
        let trace = run(
            &inst,
            &PolicyConfig::LptRestart {
                alpha: rat(1, 2),
                beta,
            },
        )
        .unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));
    }

    #[test]
    fn restart_picks_smallest_running_as_victim() {
        let inst = inst(
            2,
            &[
                (1, Rat::ZERO, Rat::ONE),
                (2, Rat::ZERO, rat(3, 2)),
                (3, rat(1, 1000), Rat::from_int(3)),
            ],
        );
        let trace = run(&inst, &PolicyConfig::restart_default()).unwrap();
        let victim = trace
            .segments
            .iter()
            .find(|s| matches!(s.outcome, SegmentOutcome::Replaced { .. }))
            .expect("replacement happened");
        assert_eq!(victim.job_id, 1);
    }

    #[test]
    fn candidate1_fraction_boundary_allows_equality() {
        // processed = rho * p_k exactly: still eligible
        let rho = rat(1, 2);
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 2), rat(3, 2))],
        );
        let trace = run(&inst, &PolicyConfig::Candidate1 { rho }).unwrap();
        assert!(trace
            .segments
            .iter()
            .any(|s| matches!(s.outcome, SegmentOutcome::Replaced { by: 2 })));
    }

    #[test]
    fn candidate1_requires_strictly_larger_arrival() {
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 10), Rat::ONE)],
        );
        let trace = run(&inst, &PolicyConfig::Candidate1 { rho: rat(1, 2) }).unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));
    }

    #[test]
    fn candidate2_size_threshold_allows_equality() {
        // p_j = mu * p_k exactly: replace
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::from_int(2)), (2, rat(1, 10), Rat::from_int(3))],
        );
        let trace = run(
            &inst,
            &PolicyConfig::Candidate2 {
                rho: rat(1, 2),
                mu: rat(3, 2),
            },
        )
        .unwrap();
        assert!(trace
            .segments
            .iter()
            .any(|s| matches!(s.outcome, SegmentOutcome::Replaced { by: 2 })));
    }

    #[test]
    fn candidate2_below_threshold_keeps_running_job() {
        // p_j = 29/10 < mu * p_k = 3: keep
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::from_int(2)), (2, rat(1, 10), rat(29, 10))],
        );
        let trace = run(
            &inst,
            &PolicyConfig::Candidate2 {
                rho: rat(1, 2),
                mu: rat(3, 2),
            },
        )
        .unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));
    }

    #[test]
    fn candidate3_replaces_when_projection_overshoots() {
        // two unit jobs running, size-2 arrival at 1/10: waiting projects a
        // makespan of 3, while the offline optimum is 21/10. With gamma=1/10
        // the overshoot triggers a replacement; with gamma=1 it does not.
        let inst = inst(
            2,
            &[
                (1, Rat::ZERO, Rat::ONE),
                (2, Rat::ZERO, Rat::ONE),
                (3, rat(1, 10), Rat::from_int(2)),
            ],
        );
        let trace = run(&inst, &PolicyConfig::Candidate3 { gamma: rat(1, 10) }).unwrap();
        assert!(trace
            .segments
            .iter()
            .any(|s| matches!(s.outcome, SegmentOutcome::Replaced { by: 3 })));
        // generous slack: no replacement
        let trace = run(&inst, &PolicyConfig::Candidate3 { gamma: Rat::ONE }).unwrap();
        assert!(trace
            .segments
            .iter()
            .all(|s| matches!(s.outcome, SegmentOutcome::Completed)));
    }

    #[test]
    fn invalid_policy_parameters_rejected() {
        assert!(PolicyConfig::LptRestart {
            alpha: Rat::ZERO,
            beta: rat(1, 5)
        }
        .validate()
        .is_err());
        assert!(PolicyConfig::restart_default().validate().is_ok());
        assert!(PolicyConfig::restart_two_machines().validate().is_ok());
    }
}
