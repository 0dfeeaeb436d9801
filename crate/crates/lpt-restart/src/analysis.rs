//! Trace analysis: waste, idle, leftover and pending-time accounting, the
//! structural inequality checkers, and the per-replacement trace auditor.
//!
//! All quantities are piecewise linear in t between event breakpoints, so
//! checking them exactly at every breakpoint and every interval midpoint
//! certifies them for all t.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{JobId, SegmentOutcome, Trace};
use crate::offline::{self, OptSchedule, OracleError};
use crate::rat::Rat;
use crate::{engine, model::Event, model::Instance, model::PolicyConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("unknown job id {0}")]
    UnknownJob(JobId),
    #[error("schedule does not cover the trace's instance")]
    MismatchedInstance,
    #[error("sequence length mismatch")]
    LengthMismatch,
    #[error("sequence entries must be positive")]
    NonPositiveEntry,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sim(#[from] engine::SimError),
}

fn overlap_before(start: Rat, end: Rat, t: Rat) -> Rat {
    (end.min(t) - start.max(Rat::ZERO)).max(Rat::ZERO)
}

/// Replaced-segment mass overlapping [0, t]: the processing voided by
/// restarts, counting a segment crossing t only by its portion in [0, t].
pub fn waste_before(trace: &Trace, t: Rat) -> Rat {
    trace
        .segments
        .iter()
        .filter(|s| matches!(s.outcome, SegmentOutcome::Replaced { .. }))
        .fold(Rat::ZERO, |acc, s| acc + overlap_before(s.start, s.end, t))
}

/// Sorted, de-duplicated breakpoints of all piecewise-linear quantities:
/// segment bounds, pending-interval bounds, optional reference schedule
/// bounds, clipped to [0, t] with 0 and t included.
fn breakpoints(trace: &Trace, opt: Option<&OptSchedule>, t: Rat) -> Vec<Rat> {
    let mut pts = vec![Rat::ZERO, t];
    for s in &trace.segments {
        pts.push(s.start);
        pts.push(s.end);
    }
    for p in &trace.pending_intervals {
        pts.push(p.start);
        pts.push(p.end);
    }
    for job in &trace.instance.jobs {
        pts.push(job.release);
    }
    if let Some(opt) = opt {
        for (&id, &start) in &opt.starts {
            pts.push(start);
            if let Some(job) = trace.instance.job(id) {
                pts.push(start + job.size);
            }
        }
    }
    pts.retain(|&x| Rat::ZERO <= x && x <= t);
    pts.sort();
    pts.dedup();
    pts
}

/// Integrates `machines_active(x)` (an integer-valued indicator sum,
/// constant between breakpoints) over [0, t] by midpoint evaluation.
fn integrate(pts: &[Rat], mut count_at: impl FnMut(Rat) -> i64) -> Rat {
    let mut total = Rat::ZERO;
    for w in pts.windows(2) {
        let (x1, x2) = (w[0], w[1]);
        if x1 == x2 {
            continue;
        }
        let mid = (x1 + x2) / Rat::from_int(2);
        total = total + Rat::from_int(count_at(mid)) * (x2 - x1);
    }
    total
}

fn machine_processing_at(trace: &Trace, machine: usize, x: Rat) -> bool {
    trace
        .segments
        .iter()
        .any(|s| s.machine == machine && s.start < x && x < s.end)
}

fn pending_at(trace: &Trace, x: Rat) -> bool {
    trace
        .pending_intervals
        .iter()
        .any(|p| p.start < x && x < p.end)
}

/// Final-schedule waste: time during which a machine is not doing processing
/// that survives to completion while some job still awaits its final run.
/// On greedy traces without replacements this is 0; on restart traces it
/// equals the replaced-portion mass plus any idle-with-pending time.
pub fn general_waste_before(trace: &Trace, t: Rat) -> Rat {
    // a job is "unstarted" in the final-schedule view until its completed
    // run begins
    let final_starts: Vec<(Rat, Rat)> = trace
        .instance
        .jobs
        .iter()
        .filter_map(|j| {
            trace
                .segments
                .iter()
                .find(|s| s.job_id == j.id && matches!(s.outcome, SegmentOutcome::Completed))
                .map(|s| (j.release, s.start))
        })
        .collect();
    let pts = breakpoints(trace, None, t);
    let machines = trace.instance.machines;
    integrate(&pts, |x| {
        let awaiting = final_starts.iter().any(|&(r, s)| r < x && x < s);
        if !awaiting {
            return 0;
        }
        (0..machines)
            .filter(|&m| {
                !trace.segments.iter().any(|seg| {
                    seg.machine == m
                        && matches!(seg.outcome, SegmentOutcome::Completed)
                        && seg.start < x
                        && x < seg.end
                })
            })
            .count() as i64
    })
}

/// Idle time before t: a machine is idle when it runs nothing and no job is
/// pending.
pub fn idle_before(trace: &Trace, t: Rat) -> Rat {
    let pts = breakpoints(trace, None, t);
    let machines = trace.instance.machines;
    integrate(&pts, |x| {
        if pending_at(trace, x) {
            return 0;
        }
        (0..machines)
            .filter(|&m| !machine_processing_at(trace, m, x))
            .count() as i64
    })
}

/// Measure of [r_j, t] during which job j sits in the pending pool.
pub fn pending_time(trace: &Trace, job_id: JobId, t: Rat) -> Result<Rat, AnalysisError> {
    if trace.instance.job(job_id).is_none() {
        return Err(AnalysisError::UnknownJob(job_id));
    }
    Ok(trace
        .pending_intervals
        .iter()
        .filter(|p| p.job_id == job_id)
        .fold(Rat::ZERO, |acc, p| acc + overlap_before(p.start, p.end, t)))
}

/// Supremum of instants in [0, t] at which some machine is idle, if any.
fn last_idle_before(trace: &Trace, t: Rat) -> Option<Rat> {
    let pts = breakpoints(trace, None, t);
    let machines = trace.instance.machines;
    pts.windows(2)
        .filter(|w| w[0] < w[1])
        .filter(|w| {
            let mid = (w[0] + w[1]) / Rat::from_int(2);
            !pending_at(trace, mid)
                && (0..machines).any(|m| !machine_processing_at(trace, m, mid))
        })
        .map(|w| w[1])
        .last()
}

/// A_t: over jobs in process at the last idle instant t' before t, the sum
/// of min(pending time up to t', size). Zero when no idle precedes t.
pub fn a_value(trace: &Trace, t: Rat) -> Rat {
    let Some(t_idle) = last_idle_before(trace, t) else {
        return Rat::ZERO;
    };
    // jobs in process at t': segment start < t' <= end
    let mut total = Rat::ZERO;
    for job in &trace.instance.jobs {
        let in_process = trace
            .segments
            .iter()
            .any(|s| s.job_id == job.id && s.start < t_idle && t_idle <= s.end);
        if in_process {
            let delta_j = pending_time(trace, job.id, t_idle).expect("job exists");
            total = total + delta_j.min(job.size);
        }
    }
    total
}

fn opt_processing_before(trace: &Trace, opt: &OptSchedule, t: Rat) -> Rat {
    opt.starts.iter().fold(Rat::ZERO, |acc, (&id, &start)| {
        let size = trace.instance.job(id).expect("validated").size;
        acc + overlap_before(start, start + size, t)
    })
}

fn alg_processing_before(trace: &Trace, t: Rat, completed_only: bool) -> Rat {
    trace
        .segments
        .iter()
        .filter(|s| !completed_only || matches!(s.outcome, SegmentOutcome::Completed))
        .fold(Rat::ZERO, |acc, s| acc + overlap_before(s.start, s.end, t))
}

fn check_same_instance(trace: &Trace, opt: &OptSchedule) -> Result<(), AnalysisError> {
    for job in &trace.instance.jobs {
        if !opt.starts.contains_key(&job.id) {
            return Err(AnalysisError::MismatchedInstance);
        }
    }
    if opt.starts.len() != trace.instance.jobs.len() {
        return Err(AnalysisError::MismatchedInstance);
    }
    Ok(())
}

/// Leftover at t: processing the reference optimum has done before t minus
/// processing the trace has done before t. Replaced portions count as
/// processing done — they occupied the machine — and the waste terms of the
/// inequalities compensate for exactly that mass.
pub fn delta(trace: &Trace, opt: &OptSchedule, t: Rat) -> Result<Rat, AnalysisError> {
    check_same_instance(trace, opt)?;
    Ok(opt_processing_before(trace, opt, t) - alg_processing_before(trace, t, false))
}

#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub t: Rat,
    pub delta: Rat,
    pub waste: Rat,
    pub idle: Rat,
    pub a_value: Rat,
    /// t·m/4 + waste
    pub leftover_bound: Rat,
    /// min(a_value, idle) + waste
    pub claim2_bound: Rat,
    pub leftover_pass: bool,
    pub claim2_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyReport {
    pub checkpoints: Vec<Checkpoint>,
    pub leftover_pass: bool,
    pub claim2_pass: bool,
}

/// How densely the piecewise-linear quantities are sampled. Every quantity
/// checked here is linear between consecutive breakpoints, so evaluating at
/// breakpoints plus interval midpoints certifies the inequality on the whole
/// interval; breakpoints alone give a cheaper but weaker check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckpointMode {
    Breakpoints,
    BreakpointsAndMidpoints,
}

fn checkpoint_grid(trace: &Trace, opt: &OptSchedule, horizon: Rat, mode: CheckpointMode) -> Vec<Rat> {
    let pts = breakpoints(trace, Some(opt), horizon);
    if mode == CheckpointMode::Breakpoints {
        return pts;
    }
    let mut grid = Vec::with_capacity(pts.len() * 2);
    for w in pts.windows(2) {
        grid.push(w[0]);
        if w[0] < w[1] {
            grid.push((w[0] + w[1]) / Rat::from_int(2));
        }
    }
    grid.extend(pts.last().copied());
    grid
}

fn report_at(trace: &Trace, opt: &OptSchedule, grid: &[Rat]) -> Result<EfficiencyReport, AnalysisError> {
    let m = Rat::from_int(trace.instance.machines as i64);
    let checkpoints: Vec<Checkpoint> = grid
        .iter()
        .map(|&t| {
            let d = delta(trace, opt, t)?;
            let waste = waste_before(trace, t);
            let idle = idle_before(trace, t);
            let a = a_value(trace, t);
            let leftover_bound = t * m / Rat::from_int(4) + waste;
            let claim2_bound = a.min(idle) + waste;
            Ok(Checkpoint {
                t,
                delta: d,
                waste,
                idle,
                a_value: a,
                leftover_bound,
                claim2_bound,
                leftover_pass: d <= leftover_bound,
                claim2_pass: d <= claim2_bound,
            })
        })
        .collect::<Result<_, AnalysisError>>()?;
    Ok(EfficiencyReport {
        leftover_pass: checkpoints.iter().all(|c| c.leftover_pass),
        claim2_pass: checkpoints.iter().all(|c| c.claim2_pass),
        checkpoints,
    })
}

/// Checks Δ_t ≤ t·m/4 + W_t at every breakpoint and midpoint of both
/// schedules; scale-invariant, so no normalization is required.
pub fn check_leftover_lemma(trace: &Trace, opt: &OptSchedule) -> Result<EfficiencyReport, AnalysisError> {
    check_leftover_lemma_with(trace, opt, CheckpointMode::BreakpointsAndMidpoints)
}

pub fn check_leftover_lemma_with(
    trace: &Trace,
    opt: &OptSchedule,
    mode: CheckpointMode,
) -> Result<EfficiencyReport, AnalysisError> {
    check_same_instance(trace, opt)?;
    let horizon = engine::makespan(trace)?.max(opt.makespan);
    let grid = checkpoint_grid(trace, opt, horizon, mode);
    report_at(trace, opt, &grid)
}

/// Checks Δ_t ≤ min(A_t, I_t) + W_t for t ∈ [0, 1]; the instance must be
/// normalized so the optimal makespan is 1.
pub fn check_claim2(trace: &Trace, opt: &OptSchedule) -> Result<EfficiencyReport, AnalysisError> {
    check_claim2_with(trace, opt, CheckpointMode::BreakpointsAndMidpoints)
}

pub fn check_claim2_with(
    trace: &Trace,
    opt: &OptSchedule,
    mode: CheckpointMode,
) -> Result<EfficiencyReport, AnalysisError> {
    check_same_instance(trace, opt)?;
    assert_eq!(opt.makespan, Rat::ONE, "claim-2 check requires OPT = 1");
    let grid = checkpoint_grid(trace, opt, Rat::ONE, mode);
    report_at(trace, opt, &grid)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim3Result {
    PreconditionsUnmet,
    Checked { holds: bool, slack: Rat },
}

/// Sequence inequality: given 0 ≤ h_1 ≤ … ≤ h_k ≤ 1 and, for every prefix,
/// Σ a_i·h_i ≥ (1/4)·Σ (a_i + b_i), conclude Σ b_i(1−h_i) ≤ (1/4)·Σ (a_i+b_i).
/// `slack` is bound minus left-hand side (non-negative iff the conclusion
/// holds).
pub fn check_claim3(a: &[Rat], b: &[Rat], h: &[Rat]) -> Result<Claim3Result, AnalysisError> {
    if a.len() != b.len() || a.len() != h.len() {
        return Err(AnalysisError::LengthMismatch);
    }
    if a.iter().chain(b).any(|x| !x.is_positive()) {
        return Err(AnalysisError::NonPositiveEntry);
    }
    let quarter = Rat::new(1, 4);
    // (1) monotone h within [0,1]
    let mut prev = Rat::ZERO;
    for &hi in h {
        if hi < prev || hi > Rat::ONE {
            return Ok(Claim3Result::PreconditionsUnmet);
        }
        prev = hi;
    }
    // (2) prefix inequalities
    let mut lhs = Rat::ZERO;
    let mut mass = Rat::ZERO;
    for i in 0..a.len() {
        lhs = lhs + a[i] * h[i];
        mass = mass + a[i] + b[i];
        if lhs < quarter * mass {
            return Ok(Claim3Result::PreconditionsUnmet);
        }
    }
    let conclusion_lhs = (0..b.len()).fold(Rat::ZERO, |acc, i| acc + b[i] * (Rat::ONE - h[i]));
    let bound = quarter * mass;
    Ok(Claim3Result::Checked {
        holds: conclusion_lhs <= bound,
        slack: bound - conclusion_lhs,
    })
}

/// Checks that the completed processing after t is at most m(1−t) + Δ_t,
/// with Δ_t here also taken over completed runs only (the wasted portions
/// are neither useful work done nor work the bound owes). Requires OPT = 1.
pub fn check_observation1(trace: &Trace, opt: &OptSchedule, t: Rat) -> Result<bool, AnalysisError> {
    check_same_instance(trace, opt)?;
    assert_eq!(opt.makespan, Rat::ONE, "observation-1 check requires OPT = 1");
    let total_completed: Rat = trace
        .segments
        .iter()
        .filter(|s| matches!(s.outcome, SegmentOutcome::Completed))
        .fold(Rat::ZERO, |acc, s| acc + s.length());
    let after = total_completed - alg_processing_before(trace, t, true);
    let delta_completed =
        opt_processing_before(trace, opt, t) - alg_processing_before(trace, t, true);
    let m = Rat::from_int(trace.instance.machines as i64);
    Ok(after <= m * (Rat::ONE - t) + delta_completed)
}

/// Exact ratio of the policy's makespan to the offline optimum.
pub fn competitive_ratio(inst: &Instance, policy: &PolicyConfig) -> Result<Rat, AnalysisError> {
    let trace = engine::run(inst, policy)?;
    let alg = engine::makespan(&trace)?;
    let opt = offline::optimal_makespan(inst.machines, &inst.jobs)?;
    Ok(alg / opt)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AuditViolation {
    /// A job at least half the optimal makespan was replaced (impossible for
    /// the restart policy on instances with distinct sizes).
    LargeJobReplaced { job: JobId, size: Rat },
    /// A replacement wasted processing of at least alpha times the
    /// replacer's size.
    WasteBound { victim: JobId, by: JobId, wasted: Rat },
    /// A replacer not larger than (1+beta) times its victim.
    GrowthBound { victim: JobId, by: JobId },
    /// A replaced job restarted at a time that is not the completion time
    /// of some job j' with p_victim < p_{j'} <= restart time.
    RescheduleRule { job: JobId, restart: Rat },
}

/// Audits a restart-policy trace against the structural facts that the
/// competitive analysis relies on. `opt_makespan` scales the size threshold
/// of the large-job check. Size comparisons break ties by job id, matching
/// the engine's total order; the large-job check is strict at exactly half
/// the optimum, which duplicate sizes can legitimately attain.
pub fn audit_trace(trace: &Trace, alpha: Rat, beta: Rat, opt_makespan: Rat) -> Vec<AuditViolation> {
    let mut violations = Vec::new();
    let job = |id: JobId| trace.instance.job(id).expect("trace job");

    // Latest replacement time of each job seen so far (events are
    // chronological, so this is correct at the point of use).
    let mut replaced_at: std::collections::BTreeMap<JobId, Rat> = std::collections::BTreeMap::new();
    for event in &trace.events {
        match *event {
            Event::Replace { t, victim, by, machine } => {
                let v = job(victim);
                let b = job(by);
                if v.size * Rat::from_int(2) > opt_makespan {
                    violations.push(AuditViolation::LargeJobReplaced {
                        job: victim,
                        size: v.size,
                    });
                }
                let wasted = trace
                    .segments
                    .iter()
                    .find(|s| {
                        s.job_id == victim
                            && s.machine == machine
                            && s.end == t
                            && matches!(s.outcome, SegmentOutcome::Replaced { by: r } if r == by)
                    })
                    .map_or(Rat::ZERO, |s| s.length());
                if wasted >= alpha * b.size {
                    violations.push(AuditViolation::WasteBound { victim, by, wasted });
                }
                if b.size <= (Rat::ONE + beta) * v.size {
                    violations.push(AuditViolation::GrowthBound { victim, by });
                }
                replaced_at.insert(victim, t);
            }
            Event::Start { t, job: id, .. } => {
                let Some(&t_r) = replaced_at.get(&id) else {
                    continue;
                };
                let k = job(id);
                // A restart must coincide with the completion of a job j
                // with p_j <= restart time that beat k in whichever order
                // applied: the greedy pick order if j started while k was
                // pending, or the victim order if j was already running
                // when k was replaced (k was the smallest running job).
                // When j started at the very instant of k's replacement
                // (as a replacer itself), either tie order can apply
                // depending on the within-instant event order, so a size
                // tie is accepted with either id relation.
                let witnessed = trace.segments.iter().any(|s| {
                    if !matches!(s.outcome, SegmentOutcome::Completed) || s.end != t {
                        return false;
                    }
                    let j = job(s.job_id);
                    if j.size > t {
                        return false;
                    }
                    if s.start > t_r {
                        (j.size, std::cmp::Reverse(j.id)) > (k.size, std::cmp::Reverse(k.id))
                    } else if s.start < t_r {
                        (j.size, j.id) > (k.size, k.id)
                    } else {
                        j.size >= k.size
                    }
                });
                if !witnessed {
                    violations.push(AuditViolation::RescheduleRule { job: id, restart: t });
                }
            }
            _ => {}
        }
    }
    violations
}

/// Outcome of a randomized search for counter-examples to the sequence
/// inequality checked by [`check_claim3`].
#[derive(Debug, Clone, Serialize)]
pub struct Claim3Campaign {
    pub trials: usize,
    pub violations: usize,
    /// Smallest slack seen over all admissible triples; `None` if every
    /// generated triple failed the preconditions (cannot happen with the
    /// built-in generators).
    pub min_slack: Option<Rat>,
}

const H_GRID: i128 = 64;

/// Largest factor λ such that b = λ·b_raw keeps every prefix precondition
/// of the inequality satisfied; requires every h_i > 1/4.
fn claim3_b_scale(a: &[Rat], h: &[Rat], b_raw: &[Rat]) -> Rat {
    let quarter = Rat::new(1, 4);
    let mut headroom = Rat::ZERO;
    let mut b_sum = Rat::ZERO;
    let mut scale: Option<Rat> = None;
    for i in 0..a.len() {
        headroom = headroom + a[i] * (h[i] - quarter);
        b_sum = b_sum + b_raw[i];
        let cand = Rat::from_int(4) * headroom / b_sum;
        scale = Some(match scale {
            Some(s) => s.min(cand),
            None => cand,
        });
    }
    scale.expect("non-empty triple")
}

fn random_claim3_triple(rng: &mut impl Rng, k_max: usize) -> (Vec<Rat>, Vec<Rat>, Vec<Rat>) {
    let k = rng.gen_range(1..=k_max);
    let a: Vec<Rat> = (0..k)
        .map(|_| Rat::new(rng.gen_range(1..=16), rng.gen_range(1..=4)))
        .collect();
    // Nondecreasing h on a 1/64 grid, starting strictly above 1/4 so that
    // positive b values are always admissible.
    let mut level: i128 = rng.gen_range(H_GRID / 4 + 1..=H_GRID);
    let mut h = Vec::with_capacity(k);
    for _ in 0..k {
        h.push(Rat::new(level, H_GRID));
        level = rng.gen_range(level..=H_GRID);
    }
    let b_raw: Vec<Rat> = (0..k)
        .map(|_| Rat::new(rng.gen_range(1..=16), rng.gen_range(1..=4)))
        .collect();
    // A random fraction of the maximal admissible magnitude, so the search
    // covers both tight and slack prefix preconditions.
    let u = Rat::new(rng.gen_range(1..=8), 8);
    let scale = claim3_b_scale(&a, &h, &b_raw) * u;
    let b = b_raw.iter().map(|&x| x * scale).collect();
    (a, b, h)
}

fn record_claim3_trial(
    a: &[Rat],
    b: &[Rat],
    h: &[Rat],
    campaign: &mut Claim3Campaign,
) -> Option<Rat> {
    campaign.trials += 1;
    match check_claim3(a, b, h).expect("generated triples are well-formed") {
        Claim3Result::Checked { holds, slack } => {
            if !holds {
                campaign.violations += 1;
            }
            campaign.min_slack = Some(match campaign.min_slack {
                Some(s) => s.min(slack),
                None => slack,
            });
            Some(slack)
        }
        Claim3Result::PreconditionsUnmet => None,
    }
}

/// Random sampling of admissible triples (a, b, h).
pub fn claim3_random_campaign(seed: u64, trials: usize, k_max: usize) -> Claim3Campaign {
    assert!(k_max >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut campaign = Claim3Campaign { trials: 0, violations: 0, min_slack: None };
    for _ in 0..trials {
        let (a, b, h) = random_claim3_triple(&mut rng, k_max);
        record_claim3_trial(&a, &b, &h, &mut campaign);
    }
    campaign
}

/// Local search that minimizes the slack of the inequality: integer-grid
/// perturbations of a, b and h, with b always rescaled to the admissibility
/// boundary so some prefix precondition stays tight.
pub fn claim3_hill_climb_campaign(
    seed: u64,
    starts: usize,
    steps: usize,
    k_max: usize,
) -> Claim3Campaign {
    assert!(k_max >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut campaign = Claim3Campaign { trials: 0, violations: 0, min_slack: None };
    for _ in 0..starts {
        let k = rng.gen_range(1..=k_max);
        let mut a_units: Vec<i128> = (0..k).map(|_| rng.gen_range(1..=32)).collect();
        let mut b_units: Vec<i128> = (0..k).map(|_| rng.gen_range(1..=32)).collect();
        let mut levels: Vec<i128> = Vec::with_capacity(k);
        let mut level: i128 = rng.gen_range(H_GRID / 4 + 1..=H_GRID);
        for _ in 0..k {
            levels.push(level);
            level = rng.gen_range(level..=H_GRID);
        }
        let eval = |a_units: &[i128], b_units: &[i128], levels: &[i128], c: &mut Claim3Campaign| {
            let a: Vec<Rat> = a_units.iter().map(|&x| Rat::from_int(x as i64)).collect();
            let h: Vec<Rat> = levels.iter().map(|&l| Rat::new(l, H_GRID)).collect();
            let b_raw: Vec<Rat> = b_units.iter().map(|&x| Rat::from_int(x as i64)).collect();
            let scale = claim3_b_scale(&a, &h, &b_raw);
            let b: Vec<Rat> = b_raw.iter().map(|&x| x * scale).collect();
            record_claim3_trial(&a, &b, &h, c).expect("boundary triples are admissible")
        };
        let mut best = eval(&a_units, &b_units, &levels, &mut campaign);
        for _ in 0..steps {
            let i = rng.gen_range(0..k);
            let delta: i128 = if rng.gen::<bool>() { 1 } else { -1 };
            let field = rng.gen_range(0..3);
            let (mut a_try, mut b_try, mut l_try) =
                (a_units.clone(), b_units.clone(), levels.clone());
            match field {
                0 => a_try[i] += delta,
                1 => b_try[i] += delta,
                _ => l_try[i] += delta,
            }
            let feasible = a_try[i] >= 1
                && b_try[i] >= 1
                && l_try[0] > H_GRID / 4
                && l_try[i] <= H_GRID
                && l_try.windows(2).all(|w| w[0] <= w[1]);
            if !feasible {
                continue;
            }
            let slack = eval(&a_try, &b_try, &l_try, &mut campaign);
            if slack < best {
                best = slack;
                a_units = a_try;
                b_units = b_try;
                levels = l_try;
            }
        }
    }
    campaign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Job, PendingInterval, Segment};
    use crate::rat::rat;

    fn inst(machines: usize, jobs: &[(u64, Rat, Rat)]) -> Instance {
        Instance::new(
            machines,
            jobs.iter().map(|&(i, r, p)| Job::new(i, r, p)).collect(),
        )
        .unwrap()
    }

    fn lpt_tight(eps: Rat) -> Instance {
        inst(
            2,
            &[
                (1, Rat::ZERO, rat(1, 2)),
                (2, Rat::ZERO, rat(1, 2)),
                (3, eps, Rat::ONE),
            ],
        )
    }

    fn opt_of(inst: &Instance) -> OptSchedule {
        offline::optimal_schedule(inst.machines, &inst.jobs).unwrap()
    }

    #[test]
    fn waste_of_clean_trace_is_zero() {
        let inst = lpt_tight(rat(1, 100));
        let trace = engine::run(&inst, &PolicyConfig::Lpt).unwrap();
        assert_eq!(waste_before(&trace, Rat::from_int(10)), Rat::ZERO);
        assert_eq!(general_waste_before(&trace, Rat::from_int(10)), Rat::ZERO);
    }

    #[test]
    fn waste_counts_replaced_mass_with_fractional_crossing() {
        let inst = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 1000), rat(3, 2))],
        );
        let trace = engine::run(&inst, &PolicyConfig::restart_default()).unwrap();
        assert_eq!(waste_before(&trace, Rat::ONE), rat(1, 1000));
        assert_eq!(waste_before(&trace, rat(1, 2000)), rat(1, 2000));
        // final-schedule waste agrees on this restart trace
        assert_eq!(general_waste_before(&trace, Rat::ONE), rat(1, 1000));
    }

    #[test]
    fn hand_built_idle_with_pending_counts_as_general_waste() {
        // machine 1 works [0,1]; machine 2 sits on its hands while job 3
        // waits the whole time, then runs it on [1,2]
        let instance = inst(
            2,
            &[(1, Rat::ZERO, Rat::ONE), (3, Rat::ZERO, Rat::ONE)],
        );
        let seg = |job_id, machine, s: Rat, e: Rat| Segment {
            job_id,
            machine,
            start: s,
            end: e,
            outcome: SegmentOutcome::Completed,
        };
        let trace = Trace {
            instance,
            segments: vec![
                seg(1, 0, Rat::ZERO, Rat::ONE),
                seg(3, 1, Rat::ONE, Rat::from_int(2)),
            ],
            events: vec![],
            pending_intervals: vec![PendingInterval {
                job_id: 3,
                start: Rat::ZERO,
                end: Rat::ONE,
            }],
        };
        assert_eq!(general_waste_before(&trace, Rat::from_int(2)), Rat::ONE);
        // and it is not idle time, because a job was pending
        assert_eq!(idle_before(&trace, Rat::ONE), Rat::ZERO);
    }

    #[test]
    fn idle_requires_no_pending() {
        // one job on two machines: the free machine is idle the whole run
        let inst = inst(2, &[(1, Rat::ZERO, Rat::ONE)]);
        let trace = engine::run(&inst, &PolicyConfig::Lpt).unwrap();
        assert_eq!(idle_before(&trace, Rat::ONE), Rat::ONE);
        // fully busy prefix of the tight instance has no idle
        let trace = engine::run(&lpt_tight(rat(1, 100)), &PolicyConfig::Lpt).unwrap();
        assert_eq!(idle_before(&trace, rat(1, 2)), Rat::ZERO);
    }

    #[test]
    fn pending_time_of_delayed_job() {
        let trace = engine::run(&lpt_tight(rat(1, 100)), &PolicyConfig::Lpt).unwrap();
        assert_eq!(
            pending_time(&trace, 3, rat(1, 2)).unwrap(),
            rat(1, 2) - rat(1, 100)
        );
        assert_eq!(pending_time(&trace, 1, Rat::from_int(5)).unwrap(), Rat::ZERO);
        assert_eq!(
            pending_time(&trace, 99, Rat::ONE),
            Err(AnalysisError::UnknownJob(99))
        );
    }

    #[test]
    fn a_value_examples() {
        let trace = engine::run(&lpt_tight(rat(1, 100)), &PolicyConfig::Lpt).unwrap();
        // no idle before 1/2
        assert_eq!(a_value(&trace, rat(1, 2)), Rat::ZERO);
        // last idle instant before 3/2 is 3/2 itself (machine 2 is free
        // from 1/2 on with nothing pending); job 3 is in process there and
        // waited 1/2 - 1/100
        assert_eq!(a_value(&trace, rat(3, 2)), rat(49, 100));
    }

    #[test]
    fn delta_is_zero_when_schedules_coincide() {
        let inst = inst(1, &[(1, Rat::ZERO, Rat::ONE)]);
        let trace = engine::run(&inst, &PolicyConfig::Lpt).unwrap();
        let opt = opt_of(&trace.instance);
        for t in [Rat::ZERO, rat(1, 3), Rat::ONE, Rat::from_int(2)] {
            assert_eq!(delta(&trace, &opt, t).unwrap(), Rat::ZERO);
        }
    }

    #[test]
    fn leftover_lemma_on_tight_instances() {
        let trace = engine::run(&lpt_tight(rat(1, 100)), &PolicyConfig::Lpt).unwrap();
        let opt = opt_of(&trace.instance);
        let report = check_leftover_lemma(&trace, &opt).unwrap();
        assert!(report.leftover_pass);
    }

    #[test]
    fn claim2_on_normalized_tight_instance() {
        let inst = lpt_tight(rat(1, 100));
        let opt_makespan = offline::optimal_makespan(inst.machines, &inst.jobs).unwrap();
        let normalized =
            crate::model::scale_instance(&inst, opt_makespan.recip()).unwrap();
        let trace = engine::run(&normalized, &PolicyConfig::Lpt).unwrap();
        let opt = opt_of(&normalized);
        assert_eq!(opt.makespan, Rat::ONE);
        let report = check_claim2(&trace, &opt).unwrap();
        assert!(report.claim2_pass);
    }

    #[test]
    fn claim3_boundary_cases() {
        let one = Rat::ONE;
        // boundary equality at k=1
        assert_eq!(
            check_claim3(&[one], &[one], &[rat(1, 2)]).unwrap(),
            Claim3Result::Checked {
                holds: true,
                slack: Rat::ZERO
            }
        );
        assert_eq!(
            check_claim3(&[one], &[one], &[one]).unwrap(),
            Claim3Result::Checked {
                holds: true,
                slack: rat(1, 2)
            }
        );
        // k=2 example
        let r = check_claim3(&[one, one], &[one, one], &[rat(1, 2), one]).unwrap();
        assert_eq!(
            r,
            Claim3Result::Checked {
                holds: true,
                slack: rat(1, 2)
            }
        );
        // violated prefix condition
        assert_eq!(
            check_claim3(&[one], &[one], &[rat(1, 5)]).unwrap(),
            Claim3Result::PreconditionsUnmet
        );
        // non-monotone h
        assert_eq!(
            check_claim3(&[one, one], &[one, one], &[one, rat(1, 2)]).unwrap(),
            Claim3Result::PreconditionsUnmet
        );
        assert_eq!(
            check_claim3(&[one], &[one, one], &[one]),
            Err(AnalysisError::LengthMismatch)
        );
        assert_eq!(
            check_claim3(&[Rat::ZERO], &[one], &[one]),
            Err(AnalysisError::NonPositiveEntry)
        );
    }

    #[test]
    fn claim3_campaigns_find_no_violations_and_drive_slack_down() {
        let random = claim3_random_campaign(1, 500, 6);
        assert_eq!(random.trials, 500);
        assert_eq!(random.violations, 0);
        assert!(random.min_slack.unwrap() >= Rat::ZERO);

        let climb = claim3_hill_climb_campaign(2, 20, 40, 5);
        assert_eq!(climb.violations, 0);
        let climbed = climb.min_slack.unwrap();
        assert!(climbed >= Rat::ZERO);
        // local search with boundary-tight b should get closer to equality
        // than plain sampling
        assert!(climbed <= random.min_slack.unwrap());
    }

    #[test]
    fn observation1_holds_on_normalized_traces() {
        let inst = lpt_tight(rat(1, 100));
        let opt_makespan = offline::optimal_makespan(inst.machines, &inst.jobs).unwrap();
        let normalized =
            crate::model::scale_instance(&inst, opt_makespan.recip()).unwrap();
        let trace = engine::run(&normalized, &PolicyConfig::Lpt).unwrap();
        let opt = opt_of(&normalized);
        for t in [Rat::ZERO, rat(1, 4), rat(1, 2), Rat::ONE] {
            assert!(check_observation1(&trace, &opt, t).unwrap());
        }
    }

    #[test]
    fn competitive_ratio_of_tight_instance() {
        let ratio = competitive_ratio(&lpt_tight(rat(1, 100)), &PolicyConfig::Lpt).unwrap();
        assert_eq!(ratio, rat(150, 101));
    }

    #[test]
    fn audit_clean_restart_trace() {
        let instance = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 1000), rat(3, 2))],
        );
        let trace = engine::run(&instance, &PolicyConfig::restart_default()).unwrap();
        let opt = offline::optimal_makespan(1, &instance.jobs).unwrap();
        let PolicyConfig::LptRestart { alpha, beta } = PolicyConfig::restart_default() else {
            unreachable!()
        };
        assert!(audit_trace(&trace, alpha, beta, opt).is_empty());
    }

    #[test]
    fn audit_flags_forced_large_replacement() {
        // alpha = 2 makes the policy replace a half-size job even though
        // the standard parameters never would; the audit must flag it
        let instance = inst(
            1,
            &[(1, Rat::ZERO, Rat::ONE), (2, rat(1, 2), Rat::from_int(1000))],
        );
        let policy = PolicyConfig::LptRestart {
            alpha: Rat::from_int(2),
            beta: rat(1, 5),
        };
        let trace = engine::run(&instance, &policy).unwrap();
        let opt = offline::optimal_makespan(1, &instance.jobs).unwrap();
        // audited against a much smaller alpha, the wasted half unit of
        // job 1 exceeds the per-replacement budget
        let violations = audit_trace(&trace, rat(1, 20000), rat(1, 5), opt);
        assert!(violations
            .iter()
            .any(|v| matches!(v, AuditViolation::WasteBound { victim: 1, by: 2, .. })));
    }

    #[test]
    fn monotone_quantities() {
        let instance = inst(
            2,
            &[
                (1, Rat::ZERO, rat(1, 2)),
                (2, Rat::ZERO, rat(2, 3)),
                (3, rat(1, 100), rat(5, 4)),
                (4, rat(1, 10), rat(7, 3)),
            ],
        );
        let trace = engine::run(&instance, &PolicyConfig::restart_default()).unwrap();
        let m = Rat::from_int(2);
        let grid: Vec<Rat> = (0..=20).map(|i| rat(i, 4)).collect();
        for w in grid.windows(2) {
            let (t1, t2) = (w[0], w[1]);
            for f in [waste_before, idle_before, general_waste_before] {
                let (v1, v2) = (f(&trace, t1), f(&trace, t2));
                assert!(v1 <= v2);
                assert!(v2 - v1 <= m * (t2 - t1));
            }
            let (p1, p2) = (
                pending_time(&trace, 4, t1).unwrap(),
                pending_time(&trace, 4, t2).unwrap(),
            );
            assert!(p1 <= p2 && p2 - p1 <= t2 - t1);
        }
    }
}
