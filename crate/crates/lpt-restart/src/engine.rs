//! Deterministic event-driven execution of an online policy over an instance,
//! including adversary-in-the-loop mode where future arrivals depend on the
//! observed trace prefix.
//!
//! Event ordering at equal timestamps: completions first, then arrivals in
//! increasing job id, then adversary observation, then idle machines are
//! filled. A newly-arrived job may trigger a replacement only at its own
//! arrival instant and only when all machines are busy.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    Event, Instance, Job, JobId, MachineId, PendingInterval, PolicyConfig, Segment,
    SegmentOutcome, Trace,
};
use crate::policy;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineState {
    Idle,
    Running { job: JobId, started: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("adversary injected job {job} with release {release} before clock {clock}")]
    RetroactiveInjection { job: JobId, release: Rat, clock: Rat },
    #[error("adversary injected duplicate job id {0}")]
    DuplicateInjectedId(JobId),
    #[error("adversary injected job {0} with non-positive size")]
    InvalidInjectedJob(JobId),
    #[error("event guard exceeded ({0} events): likely engine bug")]
    TerminationGuard(usize),
    #[error("trace incomplete: job {0} never completed")]
    IncompleteTrace(JobId),
}

/// Read-only view of the engine state handed to policies and adversaries.
/// Only released jobs are visible.
pub struct EngineView<'a> {
    pub clock: Rat,
    pub machines: &'a [MachineState],
    pub pending: &'a BTreeSet<JobId>,
    pub completed: &'a BTreeSet<JobId>,
    pub segments: &'a [Segment],
    jobs: &'a BTreeMap<JobId, Job>,
    released: &'a BTreeSet<JobId>,
}

impl<'a> EngineView<'a> {
    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[&id]
    }

    /// All released jobs (completed, running, or pending), in id order.
    pub fn released_jobs(&self) -> Vec<Job> {
        self.released.iter().map(|id| self.jobs[id]).collect()
    }

    pub fn all_busy(&self) -> bool {
        self.machines
            .iter()
            .all(|m| matches!(m, MachineState::Running { .. }))
    }

    /// Largest pending job under the deterministic LPT order
    /// (larger size first, ties to the smaller id).
    pub fn largest_pending(&self) -> Option<JobId> {
        self.pending
            .iter()
            .copied()
            .max_by(|&a, &b| lpt_key(self.job(a)).cmp(&lpt_key(self.job(b))))
    }

    /// Smallest running job (smaller size first, ties to the smaller id).
    pub fn smallest_running(&self) -> Option<(MachineId, JobId, Rat)> {
        self.running()
            .into_iter()
            .min_by(|a, b| size_key(self.job(a.1)).cmp(&size_key(self.job(b.1))))
    }

    pub fn running(&self) -> Vec<(MachineId, JobId, Rat)> {
        self.machines
            .iter()
            .enumerate()
            .filter_map(|(m, s)| match *s {
                MachineState::Running { job, started } => Some((m, job, started)),
                MachineState::Idle => None,
            })
            .collect()
    }

    /// Portion of the current contiguous run of a running job.
    pub fn processed_since_start(&self, machine: MachineId) -> Rat {
        match self.machines[machine] {
            MachineState::Running { started, .. } => self.clock - started,
            MachineState::Idle => Rat::ZERO,
        }
    }
}

/// LPT priority: larger size wins, then smaller id. Max under this key is
/// the job the greedy rule schedules next.
fn lpt_key(job: &Job) -> (Rat, std::cmp::Reverse<JobId>) {
    (job.size, std::cmp::Reverse(job.id))
}

/// "Smallest job" order: smaller size wins, then smaller id. Min under this
/// key is the replacement victim candidate.
fn size_key(job: &Job) -> (Rat, JobId) {
    (job.size, job.id)
}

/// Compares two jobs in the engine's total size order ("a is larger than b").
pub fn larger_in_size_order(a: &Job, b: &Job) -> bool {
    size_key(a) > size_key(b)
}

/// Adversary callback interface: observed at its trigger times and allowed
/// to inject jobs with release >= the current clock.
pub trait Adversary {
    fn trigger_times(&self) -> Vec<Rat>;
    fn observe(&mut self, view: &EngineView<'_>) -> Vec<Job>;
}

/// Adversary that never injects; `run_with_adversary` with it is
/// extensionally equal to `run`.
pub struct NullAdversary;

impl Adversary for NullAdversary {
    fn trigger_times(&self) -> Vec<Rat> {
        Vec::new()
    }
    fn observe(&mut self, _view: &EngineView<'_>) -> Vec<Job> {
        Vec::new()
    }
}

struct Engine<'p> {
    policy: &'p PolicyConfig,
    machines: Vec<MachineState>,
    jobs: BTreeMap<JobId, Job>,
    released: BTreeSet<JobId>,
    pending: BTreeSet<JobId>,
    completed: BTreeSet<JobId>,
    /// (release, id), time-ordered arrival queue.
    future: BTreeSet<(Rat, JobId)>,
    clock: Rat,
    segments: Vec<Segment>,
    events: Vec<Event>,
    pending_intervals: Vec<PendingInterval>,
    /// Open pending interval start per job.
    pending_open: BTreeMap<JobId, Rat>,
    injected: usize,
}

impl<'p> Engine<'p> {
    fn new(machines: usize, seed_jobs: &[Job], policy: &'p PolicyConfig) -> Engine<'p> {
        let jobs: BTreeMap<JobId, Job> = seed_jobs.iter().map(|j| (j.id, *j)).collect();
        let future = jobs.values().map(|j| (j.release, j.id)).collect();
        Engine {
            policy,
            machines: vec![MachineState::Idle; machines],
            jobs,
            released: BTreeSet::new(),
            pending: BTreeSet::new(),
            completed: BTreeSet::new(),
            future,
            clock: Rat::ZERO,
            segments: Vec::new(),
            events: Vec::new(),
            pending_intervals: Vec::new(),
            pending_open: BTreeMap::new(),
            injected: 0,
        }
    }

    fn view(&self) -> EngineView<'_> {
        EngineView {
            clock: self.clock,
            machines: &self.machines,
            pending: &self.pending,
            completed: &self.completed,
            segments: &self.segments,
            jobs: &self.jobs,
            released: &self.released,
        }
    }

    fn event_guard(&self) -> usize {
        let n = self.jobs.len();
        (4 * n * n + 16 * n * self.injected).max(64)
    }

    fn next_completion(&self) -> Option<Rat> {
        self.machines
            .iter()
            .filter_map(|m| match *m {
                MachineState::Running { job, started } => Some(started + self.jobs[&job].size),
                MachineState::Idle => None,
            })
            .min()
    }

    fn complete_due(&mut self) {
        for m in 0..self.machines.len() {
            if let MachineState::Running { job, started } = self.machines[m] {
                if started + self.jobs[&job].size == self.clock {
                    self.segments.push(Segment {
                        job_id: job,
                        machine: m,
                        start: started,
                        end: self.clock,
                        outcome: SegmentOutcome::Completed,
                    });
                    self.events.push(Event::Complete {
                        t: self.clock,
                        job,
                        machine: m,
                    });
                    self.completed.insert(job);
                    self.machines[m] = MachineState::Idle;
                }
            }
        }
    }

    /// Moves a job into the pending pool, merging with an interval that was
    /// closed at this very instant (zero-length run).
    fn open_pending(&mut self, id: JobId) {
        let mut start = self.clock;
        if let Some(pos) = self
            .pending_intervals
            .iter()
            .rposition(|p| p.job_id == id && p.end == self.clock)
        {
            start = self.pending_intervals.remove(pos).start;
        }
        self.pending_open.insert(id, start);
        self.pending.insert(id);
    }

    fn close_pending(&mut self, id: JobId) {
        self.pending.remove(&id);
        if let Some(start) = self.pending_open.remove(&id) {
            if start < self.clock {
                self.pending_intervals.push(PendingInterval {
                    job_id: id,
                    start,
                    end: self.clock,
                });
            }
        }
    }

    fn start_job(&mut self, id: JobId, machine: MachineId) {
        self.close_pending(id);
        self.machines[machine] = MachineState::Running {
            job: id,
            started: self.clock,
        };
        self.events.push(Event::Start {
            t: self.clock,
            job: id,
            machine,
        });
    }

    fn arrive(&mut self, id: JobId) {
        self.released.insert(id);
        self.events.push(Event::Arrival { t: self.clock, job: id });
        self.open_pending(id);
        // Replacement is evaluated only when all machines are busy; with an
        // idle machine the greedy fill below schedules the arrival directly.
        if self.view().all_busy() {
            if let Some(victim_machine) = policy::decide_arrival(self.policy, &self.view(), id) {
                let (victim, started) = match self.machines[victim_machine] {
                    MachineState::Running { job, started } => (job, started),
                    MachineState::Idle => unreachable!("victim machine must be busy"),
                };
                if started < self.clock {
                    self.segments.push(Segment {
                        job_id: victim,
                        machine: victim_machine,
                        start: started,
                        end: self.clock,
                        outcome: SegmentOutcome::Replaced { by: id },
                    });
                }
                self.events.push(Event::Replace {
                    t: self.clock,
                    victim,
                    by: id,
                    machine: victim_machine,
                });
                self.open_pending(victim);
                self.start_job(id, victim_machine);
            }
        }
    }

    fn fill_idle(&mut self) {
        loop {
            let Some(machine) = self
                .machines
                .iter()
                .position(|m| matches!(m, MachineState::Idle))
            else {
                return;
            };
            match policy::decide_idle(self.policy, &self.view()) {
                Some(id) => self.start_job(id, machine),
                None => return,
            }
        }
    }

    fn inject(&mut self, new_jobs: Vec<Job>) -> Result<(), SimError> {
        for job in new_jobs {
            if job.release < self.clock {
                return Err(SimError::RetroactiveInjection {
                    job: job.id,
                    release: job.release,
                    clock: self.clock,
                });
            }
            if !job.size.is_positive() {
                return Err(SimError::InvalidInjectedJob(job.id));
            }
            if self.jobs.contains_key(&job.id) {
                return Err(SimError::DuplicateInjectedId(job.id));
            }
            self.jobs.insert(job.id, job);
            self.future.insert((job.release, job.id));
            self.injected += 1;
        }
        Ok(())
    }

    /// Releases jobs due at time `t`, in increasing job id.
    fn drain_arrivals(&mut self, t: Rat) {
        let due: Vec<JobId> = self
            .future
            .iter()
            .take_while(|&&(r, _)| r == t)
            .map(|&(_, id)| id)
            .collect();
        for id in due {
            self.future.remove(&(t, id));
            self.arrive(id);
        }
    }

    fn run(&mut self, adversary: &mut dyn Adversary) -> Result<(), SimError> {
        let mut triggers: Vec<Rat> = adversary.trigger_times();
        triggers.sort();
        triggers.dedup();
        let mut next_trigger = 0usize;

        loop {
            if self.events.len() > self.event_guard() {
                return Err(SimError::TerminationGuard(self.events.len()));
            }
            let t_completion = self.next_completion();
            let t_arrival = self.future.iter().next().map(|&(r, _)| r);
            let t_trigger = triggers.get(next_trigger).copied();
            let t = [t_completion, t_arrival, t_trigger]
                .into_iter()
                .flatten()
                .min();
            let Some(t) = t else {
                debug_assert!(self.pending.is_empty());
                return Ok(());
            };
            self.clock = t;
            self.complete_due();
            self.drain_arrivals(t);
            if t_trigger == Some(t) {
                next_trigger += 1;
                let injections = adversary.observe(&self.view());
                self.inject(injections)?;
                // jobs injected with release exactly t arrive now
                self.drain_arrivals(t);
            }
            self.fill_idle();
        }
    }

    fn into_trace(self) -> Trace {
        let instance = Instance {
            machines: self.machines.len(),
            jobs: self.jobs.into_values().collect(),
        };
        Trace {
            instance,
            segments: self.segments,
            events: self.events,
            pending_intervals: self.pending_intervals,
        }
    }
}

/// Runs a policy over an instance to completion.
pub fn run(inst: &Instance, policy: &PolicyConfig) -> Result<Trace, SimError> {
    run_with_adversary(&inst.jobs, inst.machines, policy, &mut NullAdversary)
}

/// Like [`run`], with the arrival queue extended by adversary callbacks
/// fired at their trigger times.
pub fn run_with_adversary(
    seed_jobs: &[Job],
    machines: usize,
    policy: &PolicyConfig,
    adversary: &mut dyn Adversary,
) -> Result<Trace, SimError> {
    let mut engine = Engine::new(machines, seed_jobs, policy);
    engine.run(adversary)?;
    let trace = engine.into_trace();
    for job in &trace.instance.jobs {
        if trace.completion(job.id).is_none() {
            return Err(SimError::IncompleteTrace(job.id));
        }
    }
    Ok(trace)
}

/// Completion time of the job that completes last.
pub fn makespan(trace: &Trace) -> Result<Rat, SimError> {
    trace
        .instance
        .jobs
        .iter()
        .map(|j| {
            trace
                .completion(j.id)
                .ok_or(SimError::IncompleteTrace(j.id))
        })
        .try_fold(Rat::ZERO, |acc, c| c.map(|c| acc.max(c)))
}

/// Projects the makespan of finishing all currently released work greedily
/// (LPT, no replacements, no further arrivals) from the given state.
pub fn project_greedy_makespan(view: &EngineView<'_>) -> Rat {
    // machine free times: running jobs finish their remaining work
    let mut free: Vec<Rat> = view
        .machines
        .iter()
        .map(|m| match *m {
            MachineState::Running { job, started } => started + view.job(job).size,
            MachineState::Idle => view.clock,
        })
        .collect();
    let mut queue: Vec<JobId> = view.pending.iter().copied().collect();
    queue.sort_by(|&a, &b| lpt_key(view.job(b)).cmp(&lpt_key(view.job(a))));
    let mut makespan = free.iter().copied().max().unwrap_or(view.clock);
    for id in queue {
        let (slot, _) = free
            .iter()
            .enumerate()
            .min_by_key(|&(i, &t)| (t, i))
            .expect("at least one machine");
        free[slot] = free[slot] + view.job(id).size;
        makespan = makespan.max(free[slot]);
    }
    makespan
}
