//! Exact offline optimum for makespan on identical machines with release
//! dates. Branch and bound over machine assignments; once an assignment is
//! fixed, sequencing each machine by earliest release date is optimal.

use std::collections::BTreeMap;

use crate::model::{Job, JobId, MachineId};
use crate::rat::Rat;

/// Hard cap on instance size for the exact oracle.
pub const ORACLE_JOB_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle cap exceeded: {0} jobs (max {ORACLE_JOB_CAP})")]
    TooManyJobs(usize),
    #[error("no machines")]
    NoMachines,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct OptSchedule {
    pub makespan: Rat,
    pub machine_of: BTreeMap<JobId, MachineId>,
    /// Start times under earliest-release-date order per machine.
    pub starts: BTreeMap<JobId, Rat>,
}

/// Completion time of a single machine processing `jobs` in earliest-release
/// order (ties to the smaller id), which minimizes its makespan.
pub fn erd_makespan(jobs: &[Job]) -> Rat {
    let mut order: Vec<&Job> = jobs.iter().collect();
    order.sort_by_key(|j| (j.release, j.id));
    order
        .iter()
        .fold(Rat::ZERO, |end, j| end.max(j.release) + j.size)
}

/// Assignment-independent lower bound: every job must fit after its release,
/// and the machines must absorb the total work.
pub fn lower_bound(machines: usize, jobs: &[Job]) -> Rat {
    let release_bound = jobs
        .iter()
        .map(|j| j.release + j.size)
        .max()
        .unwrap_or(Rat::ZERO);
    let total = jobs.iter().fold(Rat::ZERO, |a, j| a + j.size);
    release_bound.max(total / Rat::from_int(machines as i64))
}

struct Search<'a> {
    jobs: Vec<&'a Job>,
    machines: usize,
    best: Rat,
    best_assignment: Vec<MachineId>,
    assignment: Vec<MachineId>,
    /// Jobs currently assigned to each machine (indices into `jobs`).
    loads: Vec<Vec<usize>>,
    ends: Vec<Rat>,
}

impl<'a> Search<'a> {
    fn machine_end(&self, machine: MachineId) -> Rat {
        let mut order: Vec<&Job> = self.loads[machine].iter().map(|&i| self.jobs[i]).collect();
        order.sort_by_key(|j| (j.release, j.id));
        order
            .iter()
            .fold(Rat::ZERO, |end, j| end.max(j.release) + j.size)
    }

    fn dfs(&mut self, depth: usize) {
        if depth == self.jobs.len() {
            let makespan = self.ends.iter().copied().max().unwrap();
            if makespan < self.best {
                self.best = makespan;
                self.best_assignment = self.assignment.clone();
            }
            return;
        }
        // machine ends only grow as jobs are added, and each remaining job
        // bounds the makespan by its own release + size; note that an area
        // bound over current ends would be unsound, since later jobs can be
        // sequenced into release-forced idle gaps without moving any end
        let current_max = self.ends.iter().copied().max().unwrap();
        let release_bound = self.jobs[depth..]
            .iter()
            .map(|j| j.release + j.size)
            .max()
            .unwrap();
        if current_max.max(release_bound) >= self.best {
            return;
        }
        // identical machines: trying more than one currently-empty machine
        // only revisits symmetric assignments
        let mut seen_empty = false;
        for machine in 0..self.machines {
            if self.loads[machine].is_empty() {
                if seen_empty {
                    continue;
                }
                seen_empty = true;
            }
            let saved_end = self.ends[machine];
            self.loads[machine].push(depth);
            self.assignment[depth] = machine;
            self.ends[machine] = self.machine_end(machine);
            if self.ends[machine] < self.best {
                self.dfs(depth + 1);
            }
            self.loads[machine].pop();
            self.ends[machine] = saved_end;
        }
    }
}

/// Greedy upper bound: largest job first, placed on the machine where it
/// finishes earliest. Used to seed the search incumbent.
fn greedy_assignment(machines: usize, jobs: &[&Job]) -> (Rat, Vec<MachineId>) {
    let mut loads: Vec<Vec<Job>> = vec![Vec::new(); machines];
    let mut assignment = vec![0; jobs.len()];
    for (i, job) in jobs.iter().enumerate() {
        let slot = (0..machines)
            .min_by_key(|&m| {
                let mut with: Vec<Job> = loads[m].clone();
                with.push(**job);
                (erd_makespan(&with), m)
            })
            .unwrap();
        loads[slot].push(**job);
        assignment[i] = slot;
    }
    let makespan = loads
        .iter()
        .map(|l| erd_makespan(l))
        .max()
        .unwrap_or(Rat::ZERO);
    (makespan, assignment)
}

/// Exact optimal schedule. Deterministic: among equally good assignments the
/// search keeps the first one found in its fixed visiting order.
pub fn optimal_schedule(machines: usize, jobs: &[Job]) -> Result<OptSchedule, OracleError> {
    if machines == 0 {
        return Err(OracleError::NoMachines);
    }
    if jobs.len() > ORACLE_JOB_CAP {
        return Err(OracleError::TooManyJobs(jobs.len()));
    }
    if jobs.is_empty() {
        return Ok(OptSchedule {
            makespan: Rat::ZERO,
            machine_of: BTreeMap::new(),
            starts: BTreeMap::new(),
        });
    }
    // search in decreasing size (ties to smaller id): big jobs first makes
    // the area bound bite early
    let mut ordered: Vec<&Job> = jobs.iter().collect();
    ordered.sort_by(|a, b| (b.size, a.id).cmp(&(a.size, b.id)));

    let (greedy_makespan, greedy_assign) = greedy_assignment(machines, &ordered);
    let mut search = Search {
        machines,
        best: greedy_makespan,
        best_assignment: greedy_assign,
        assignment: vec![0; ordered.len()],
        loads: vec![Vec::new(); machines],
        ends: vec![Rat::ZERO; machines],
        jobs: ordered,
    };
    search.dfs(0);

    // rebuild deterministically: lexicographically smallest optimal
    // assignment over jobs in id order
    let mut by_id: Vec<&Job> = jobs.iter().collect();
    by_id.sort_by_key(|j| j.id);
    let lex = lex_optimal_assignment(machines, &by_id, search.best);
    let machine_of: BTreeMap<JobId, MachineId> = by_id
        .iter()
        .zip(&lex)
        .map(|(j, &m)| (j.id, m))
        .collect();
    let mut starts = BTreeMap::new();
    let mut makespan = Rat::ZERO;
    for machine in 0..machines {
        let mut assigned: Vec<&Job> = by_id
            .iter()
            .copied()
            .filter(|j| machine_of[&j.id] == machine)
            .collect();
        assigned.sort_by_key(|j| (j.release, j.id));
        let mut end = Rat::ZERO;
        for job in assigned {
            let start = end.max(job.release);
            starts.insert(job.id, start);
            end = start + job.size;
        }
        makespan = makespan.max(end);
    }
    Ok(OptSchedule {
        makespan,
        machine_of,
        starts,
    })
}

pub fn optimal_makespan(machines: usize, jobs: &[Job]) -> Result<Rat, OracleError> {
    optimal_schedule(machines, jobs).map(|s| s.makespan)
}

/// Finds the lexicographically smallest assignment (jobs in id order,
/// machine indices as digits) achieving the known optimal makespan.
fn lex_optimal_assignment(machines: usize, jobs: &[&Job], target: Rat) -> Vec<MachineId> {
    fn dfs(
        machines: usize,
        jobs: &[&Job],
        target: Rat,
        assignment: &mut Vec<MachineId>,
        loads: &mut Vec<Vec<Job>>,
    ) -> bool {
        let depth = assignment.len();
        if depth == jobs.len() {
            return true;
        }
        let mut seen_empty = false;
        for machine in 0..machines {
            if loads[machine].is_empty() {
                if seen_empty {
                    continue;
                }
                seen_empty = true;
            }
            loads[machine].push(*jobs[depth]);
            if erd_makespan(&loads[machine]) <= target {
                assignment.push(machine);
                if dfs(machines, jobs, target, assignment, loads) {
                    loads[machine].pop();
                    return true;
                }
                assignment.pop();
            }
            loads[machine].pop();
        }
        false
    }
    let mut assignment = Vec::with_capacity(jobs.len());
    let mut loads = vec![Vec::new(); machines];
    let found = dfs(machines, jobs, target, &mut assignment, &mut loads);
    debug_assert!(found, "optimal makespan must be attainable");
    assignment
}

/// Minimum completion time of one machine over every processing order of
/// `jobs`; the independent reference for the earliest-release-date rule.
fn min_completion_over_orders(jobs: &mut Vec<Job>, done: Rat) -> Rat {
    if jobs.is_empty() {
        return done;
    }
    let mut best: Option<Rat> = None;
    for i in 0..jobs.len() {
        let j = jobs.remove(i);
        let c = min_completion_over_orders(jobs, done.max(j.release) + j.size);
        jobs.insert(i, j);
        best = Some(best.map_or(c, |b| b.min(c)));
    }
    best.unwrap()
}

/// Exhaustive reference: tries every machine assignment and every
/// per-machine processing order. Exponential; only for cross-checking the
/// search on tiny instances.
pub fn enumerated_optimal_makespan(machines: usize, jobs: &[Job]) -> Rat {
    assert!(machines >= 1 && jobs.len() <= 8, "reference oracle is exponential");
    let mut best: Option<Rat> = None;
    let n = jobs.len();
    let mut assignment = vec![0usize; n];
    loop {
        let makespan = (0..machines)
            .map(|m| {
                let mut assigned: Vec<Job> = (0..n)
                    .filter(|&i| assignment[i] == m)
                    .map(|i| jobs[i])
                    .collect();
                min_completion_over_orders(&mut assigned, Rat::ZERO)
            })
            .max()
            .unwrap();
        best = Some(best.map_or(makespan, |b: Rat| b.min(makespan)));
        // odometer increment
        let mut i = 0;
        while i < n {
            assignment[i] += 1;
            if assignment[i] < machines {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == n {
            return best.unwrap();
        }
    }
}
