//! Task DAG derived from the elimination tree, a deterministic
//! discrete-event simulator of heterogeneous workers, list-scheduling
//! baselines and a brute-force optimal-makespan oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordering::{etree, OrderError, ETREE_ROOT};
use crate::qlearn::{featurize_scheduling, Domain, Policy};
use crate::sparse::{Permutation, SparsePattern};

#[derive(Debug, Error, PartialEq)]
pub enum SchedError {
    #[error("task DAG contains a cycle")]
    CyclicDag,
    #[error("edge references unknown task {0}")]
    UnknownTask(usize),
    #[error("task {0} has non-positive work")]
    NonPositiveWork(usize),
    #[error("instance too large for brute force: {tasks} tasks, {workers} workers")]
    TooLarge { tasks: usize, workers: usize },
    #[error("machine model has no workers")]
    NoWorkers,
    #[error("all reward weights are zero")]
    ZeroWeights,
    #[error("policy domain {0:?} is not the scheduling domain")]
    PolicyDomainMismatch(Domain),
    #[error(transparent)]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    /// Abstract work units; execution time is work / worker speed.
    pub work: f64,
    /// Peak live-memory units held while the task runs.
    pub memory: f64,
    /// Column/frontal the task came from.
    pub frontal: usize,
}

/// Dependency DAG of frontal tasks. Edges run parent -> child: the parent
/// must finish before the child starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDag {
    tasks: Vec<Task>,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    preds: Vec<Vec<usize>>,
    #[serde(skip)]
    succs: Vec<Vec<usize>>,
}

impl TaskDag {
    pub fn new(tasks: Vec<Task>, edges: Vec<(usize, usize)>) -> Result<Self, SchedError> {
        let n = tasks.len();
        for t in &tasks {
            if t.work <= 0.0 {
                return Err(SchedError::NonPositiveWork(t.id));
            }
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if a >= n {
                return Err(SchedError::UnknownTask(a));
            }
            if b >= n {
                return Err(SchedError::UnknownTask(b));
            }
            succs[a].push(b);
            preds[b].push(a);
        }
        let dag = Self { tasks, edges, preds, succs };
        dag.topo_order().map(|_| dag)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn preds(&self, t: usize) -> &[usize] {
        &self.preds[t]
    }

    pub fn succs(&self, t: usize) -> &[usize] {
        &self.succs[t]
    }

    pub fn total_work(&self) -> f64 {
        self.tasks.iter().map(|t| t.work).sum()
    }

    fn topo_order(&self) -> Result<Vec<usize>, SchedError> {
        let n = self.len();
        let mut indeg: Vec<usize> = (0..n).map(|t| self.preds[t].len()).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&t| indeg[t] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(t) = queue.pop() {
            order.push(t);
            for &s in &self.succs[t] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push(s);
                }
            }
        }
        if order.len() != n {
            return Err(SchedError::CyclicDag);
        }
        Ok(order)
    }

    /// Downstream critical path per task, in work units, including the
    /// task's own work.
    pub fn bottom_levels(&self) -> Vec<f64> {
        let order = self.topo_order().expect("validated at construction");
        let mut bl = vec![0.0; self.len()];
        for &t in order.iter().rev() {
            let down = self.succs[t].iter().map(|&s| bl[s]).fold(0.0, f64::max);
            bl[t] = self.tasks[t].work + down;
        }
        bl
    }

    /// Critical path length in work units.
    pub fn critical_path(&self) -> f64 {
        self.bottom_levels().into_iter().fold(0.0, f64::max)
    }

    /// Rebuilds the (serde-skipped) adjacency after deserialization.
    pub fn rebuild_adjacency(&mut self) {
        let n = self.len();
        self.preds = vec![Vec::new(); n];
        self.succs = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            self.succs[a].push(b);
            self.preds[b].push(a);
        }
    }
}

/// One task per column in permuted order; dependencies from the
/// elimination tree; work is the squared filled-column size.
pub fn dag_from_etree(p: &SparsePattern, perm: &Permutation) -> Result<TaskDag, SchedError> {
    let n = p.n();
    if perm.len() != n {
        return Err(SchedError::Order(OrderError::SizeMismatch { perm: perm.len(), n }));
    }
    let parent = etree(p, perm)?;
    // filled below-diagonal counts via symbolic elimination on the permuted graph
    let permuted = p.symmetrize().permute(perm).expect("size checked");
    let mut g = crate::ordering::EliminationGraph::from_pattern(&permuted);
    let mut below = vec![0usize; n];
    for col in 0..n {
        below[col] = g.neighbors(col).iter().filter(|&&u| u > col).count();
        g.eliminate_node(col).expect("natural order on permuted graph");
    }
    let tasks = (0..n)
        .map(|col| Task {
            id: col,
            work: ((1 + below[col]) as f64).powi(2),
            memory: (below[col] + 1) as f64,
            frontal: col,
        })
        .collect();
    let edges = (0..n)
        .filter(|&i| parent[i] != ETREE_ROOT)
        .map(|i| (i, parent[i]))
        .collect();
    TaskDag::new(tasks, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: usize,
    /// Work units per time unit.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineModel {
    pub workers: Vec<Worker>,
    /// Flat time penalty per cross-worker dependency edge.
    pub comm_cost: f64,
}

impl MachineModel {
    pub fn uniform(count: usize, speed: f64, comm_cost: f64) -> Self {
        Self {
            workers: (0..count).map(|id| Worker { id, speed }).collect(),
            comm_cost,
        }
    }

    pub fn total_speed(&self) -> f64 {
        self.workers.iter().map(|w| w.speed).sum()
    }

    pub fn max_speed(&self) -> f64 {
        self.workers.iter().map(|w| w.speed).fold(0.0, f64::max)
    }
}

/// Dispatch heuristic available at each decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchedulerAction {
    /// Longest downstream critical path, earliest-finish worker.
    Time,
    /// Smallest live-memory increase, earliest-finish worker.
    Mem,
    /// Critical-path task, least-busy worker.
    Balance,
    /// Critical-path task, worker that ran the most of its dependencies.
    Locality,
}

impl SchedulerAction {
    pub const ALL: [SchedulerAction; 4] = [
        SchedulerAction::Time,
        SchedulerAction::Mem,
        SchedulerAction::Balance,
        SchedulerAction::Locality,
    ];

    pub fn id(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SchedulerAction::Time => "TIME",
            SchedulerAction::Mem => "MEM",
            SchedulerAction::Balance => "BALANCE",
            SchedulerAction::Locality => "LOCALITY",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    pub makespan: f64,
    pub peak_memory: f64,
    /// Max worker busy time over mean worker busy time; >= 1.
    pub balance: f64,
    /// Number of cross-worker dependency edges.
    pub comm_volume: usize,
}

/// Nonnegative weights for makespan, memory, balance and communication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl RewardWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, SchedError> {
        let w = Self { alpha, beta, gamma, delta };
        if alpha <= 0.0 && beta <= 0.0 && gamma <= 0.0 && delta <= 0.0 {
            return Err(SchedError::ZeroWeights);
        }
        Ok(w)
    }

    pub fn makespan_only() -> Self {
        Self { alpha: 1.0, beta: 0.0, gamma: 0.0, delta: 0.0 }
    }
}

/// Negated weighted metric sum, so larger reward means a better schedule.
pub fn reward(metrics: &ScheduleMetrics, w: &RewardWeights) -> f64 {
    -(w.alpha * metrics.makespan
        + w.beta * metrics.peak_memory
        + w.gamma * (metrics.balance - 1.0)
        + w.delta * metrics.comm_volume as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub task: usize,
    pub worker: usize,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub seed: u64,
    pub assignment: Vec<usize>,
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    pub metrics: ScheduleMetrics,
    /// Per-worker timeline, sorted by start time.
    pub timeline: Vec<Vec<ScheduledTask>>,
    /// Dispatch action taken at each decision point.
    pub decisions: Vec<SchedulerAction>,
}

/// Resumable discrete-event simulation state. A decision point is an idle
/// worker paired with a nonempty ready set; one task is dispatched per
/// decision.
#[derive(Debug, Clone)]
pub struct SimState {
    dag: TaskDag,
    machine: MachineModel,
    bottom: Vec<f64>,
    time: f64,
    started: Vec<bool>,
    done: Vec<bool>,
    start: Vec<f64>,
    finish: Vec<f64>,
    assignment: Vec<usize>,
    worker_task: Vec<Option<usize>>,
    worker_until: Vec<f64>,
    worker_busy: Vec<f64>,
    done_count: usize,
    decisions: Vec<SchedulerAction>,
    peak_live: f64,
}

impl SimState {
    pub fn new(dag: &TaskDag, machine: &MachineModel) -> Result<Self, SchedError> {
        if machine.workers.is_empty() {
            return Err(SchedError::NoWorkers);
        }
        dag.topo_order()?;
        let n = dag.len();
        let w = machine.workers.len();
        Ok(Self {
            bottom: dag.bottom_levels(),
            dag: dag.clone(),
            machine: machine.clone(),
            time: 0.0,
            started: vec![false; n],
            done: vec![false; n],
            start: vec![0.0; n],
            finish: vec![0.0; n],
            assignment: vec![usize::MAX; n],
            worker_task: vec![None; w],
            worker_until: vec![0.0; w],
            worker_busy: vec![0.0; w],
            done_count: 0,
            decisions: Vec::new(),
            peak_live: 0.0,
        })
    }

    pub fn dag(&self) -> &TaskDag {
        &self.dag
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn is_finished(&self) -> bool {
        self.done_count == self.dag.len()
    }

    pub fn progress(&self) -> f64 {
        if self.dag.is_empty() {
            1.0
        } else {
            self.done_count as f64 / self.dag.len() as f64
        }
    }

    pub fn ready_tasks(&self) -> Vec<usize> {
        (0..self.dag.len())
            .filter(|&t| !self.started[t] && self.dag.preds(t).iter().all(|&p| self.done[p]))
            .collect()
    }

    pub fn idle_workers(&self) -> Vec<usize> {
        (0..self.machine.workers.len())
            .filter(|&w| self.worker_task[w].is_none())
            .collect()
    }

    pub fn live_memory(&self) -> f64 {
        self.worker_task
            .iter()
            .flatten()
            .map(|&t| self.dag.tasks()[t].memory)
            .sum()
    }

    pub fn peak_live_memory(&self) -> f64 {
        self.peak_live
    }

    /// Advances over completion events until a decision point exists.
    /// Returns false when the simulation has run to completion.
    pub fn advance_to_decision(&mut self) -> bool {
        loop {
            if self.is_finished() {
                return false;
            }
            if !self.ready_tasks().is_empty() && !self.idle_workers().is_empty() {
                return true;
            }
            // advance to the earliest completion among running tasks
            let next = (0..self.machine.workers.len())
                .filter(|&w| self.worker_task[w].is_some())
                .map(|w| self.worker_until[w])
                .fold(f64::INFINITY, f64::min);
            debug_assert!(next.is_finite(), "deadlock: nothing running, nothing ready");
            self.time = next;
            for w in 0..self.machine.workers.len() {
                if let Some(t) = self.worker_task[w] {
                    if self.worker_until[w] <= self.time {
                        self.done[t] = true;
                        self.done_count += 1;
                        self.worker_task[w] = None;
                    }
                }
            }
        }
    }

    fn earliest_start(&self, task: usize, worker: usize) -> f64 {
        let dep_ready = self
            .dag
            .preds(task)
            .iter()
            .map(|&p| {
                let comm = if self.assignment[p] != worker { self.machine.comm_cost } else { 0.0 };
                self.finish[p] + comm
            })
            .fold(0.0, f64::max);
        self.time.max(dep_ready)
    }

    fn earliest_finish(&self, task: usize, worker: usize) -> f64 {
        self.earliest_start(task, worker) + self.dag.tasks()[task].work / self.machine.workers[worker].speed
    }

    /// Applies `action` at the current decision point: picks a (task,
    /// worker) pair and starts the task. Call only after
    /// `advance_to_decision` returned true.
    pub fn dispatch(&mut self, action: SchedulerAction) {
        let ready = self.ready_tasks();
        let idle = self.idle_workers();
        debug_assert!(!ready.is_empty() && !idle.is_empty());

        let pick_cp_task = || {
            ready
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    self.bottom[a]
                        .partial_cmp(&self.bottom[b])
                        .unwrap()
                        .then(b.cmp(&a)) // ties -> lowest id
                })
                .unwrap()
        };
        let task = match action {
            SchedulerAction::Time | SchedulerAction::Balance | SchedulerAction::Locality => {
                pick_cp_task()
            }
            SchedulerAction::Mem => ready
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    self.dag.tasks()[a]
                        .memory
                        .partial_cmp(&self.dag.tasks()[b].memory)
                        .unwrap()
                        .then(a.cmp(&b))
                })
                .unwrap(),
        };

        let worker = match action {
            SchedulerAction::Time | SchedulerAction::Mem => idle
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    self.earliest_finish(task, a)
                        .partial_cmp(&self.earliest_finish(task, b))
                        .unwrap()
                        .then(a.cmp(&b))
                })
                .unwrap(),
            SchedulerAction::Balance => idle
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    self.worker_busy[a]
                        .partial_cmp(&self.worker_busy[b])
                        .unwrap()
                        .then(a.cmp(&b))
                })
                .unwrap(),
            SchedulerAction::Locality => {
                let affinity = |w: usize| {
                    self.dag.preds(task).iter().filter(|&&p| self.assignment[p] == w).count()
                };
                idle.iter()
                    .copied()
                    .max_by(|&a, &b| affinity(a).cmp(&affinity(b)).then(b.cmp(&a)))
                    .unwrap()
            }
        };

        let start = self.earliest_start(task, worker);
        let finish = start + self.dag.tasks()[task].work / self.machine.workers[worker].speed;
        self.started[task] = true;
        self.start[task] = start;
        self.finish[task] = finish;
        self.assignment[task] = worker;
        self.worker_task[worker] = Some(task);
        self.worker_until[worker] = finish;
        self.worker_busy[worker] += finish - start;
        self.decisions.push(action);
        self.peak_live = self.peak_live.max(self.live_memory());
    }

    /// Metrics of the run so far; meaningful once finished.
    pub fn metrics(&self) -> ScheduleMetrics {
        compute_metrics(&self.dag, &self.machine, &self.assignment, &self.start, &self.finish)
    }

    /// Finalizes the run into a schedule report.
    pub fn into_schedule(self, seed: u64) -> Schedule {
        debug_assert!(self.is_finished());
        let metrics = compute_metrics(&self.dag, &self.machine, &self.assignment, &self.start, &self.finish);
        let mut timeline = vec![Vec::new(); self.machine.workers.len()];
        for t in 0..self.dag.len() {
            timeline[self.assignment[t]].push(ScheduledTask {
                task: t,
                worker: self.assignment[t],
                start: self.start[t],
                finish: self.finish[t],
            });
        }
        for lane in &mut timeline {
            lane.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
        }
        Schedule {
            seed,
            assignment: self.assignment,
            start: self.start,
            finish: self.finish,
            metrics,
            timeline,
            decisions: self.decisions,
        }
    }
}

fn compute_metrics(
    dag: &TaskDag,
    machine: &MachineModel,
    assignment: &[usize],
    start: &[f64],
    finish: &[f64],
) -> ScheduleMetrics {
    let makespan = finish.iter().copied().fold(0.0, f64::max);
    // peak simultaneous live memory: finish events before start events at
    // equal times
    let mut events: Vec<(f64, i32, f64)> = Vec::new();
    for t in 0..dag.len() {
        events.push((start[t], 1, dag.tasks()[t].memory));
        events.push((finish[t], 0, dag.tasks()[t].memory));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut live = 0.0;
    let mut peak = 0.0f64;
    for (_, kind, mem) in events {
        if kind == 1 {
            live += mem;
            peak = peak.max(live);
        } else {
            live -= mem;
        }
    }
    let mut busy = vec![0.0f64; machine.workers.len()];
    for t in 0..dag.len() {
        busy[assignment[t]] += finish[t] - start[t];
    }
    let mean = busy.iter().sum::<f64>() / machine.workers.len() as f64;
    let balance = if mean > 0.0 {
        busy.iter().copied().fold(0.0, f64::max) / mean
    } else {
        1.0
    };
    let comm_volume = dag
        .edges()
        .iter()
        .filter(|&&(a, b)| assignment[a] != assignment[b])
        .count();
    ScheduleMetrics { makespan, peak_memory: peak, balance, comm_volume }
}

/// Dispatch rule for a full simulation run.
pub enum DispatchRule<'a> {
    Fixed(SchedulerAction),
    Learned(&'a Policy),
}

/// Runs the discrete-event simulation to completion. Deterministic given
/// inputs and seed; the seed is recorded in the report.
pub fn simulate(
    dag: &TaskDag,
    machine: &MachineModel,
    dispatch: DispatchRule<'_>,
    seed: u64,
) -> Result<Schedule, SchedError> {
    if let DispatchRule::Learned(p) = &dispatch {
        if p.domain() != Domain::Scheduling {
            return Err(SchedError::PolicyDomainMismatch(p.domain()));
        }
    }
    let mut sim = SimState::new(dag, machine)?;
    while sim.advance_to_decision() {
        let action = match &dispatch {
            DispatchRule::Fixed(a) => *a,
            DispatchRule::Learned(pol) => {
                let key = featurize_scheduling(&sim);
                SchedulerAction::from_id(pol.select(&key)).unwrap_or(SchedulerAction::Time)
            }
        };
        sim.dispatch(action);
    }
    Ok(sim.into_schedule(seed))
}

/// Deterministic single-pass baseline with one fixed heuristic.
pub fn list_schedule(
    dag: &TaskDag,
    machine: &MachineModel,
    heuristic: SchedulerAction,
) -> Result<Schedule, SchedError> {
    simulate(dag, machine, DispatchRule::Fixed(heuristic), 0)
}

/// Exhaustive minimal makespan over assignments and consistent orderings.
///
/// Searches semi-active schedules: tasks scheduled one at a time in
/// precedence order with earliest-start timing, branch-and-bound pruned.
pub fn brute_force_optimal(dag: &TaskDag, machine: &MachineModel) -> Result<f64, SchedError> {
    if dag.len() > 10 || machine.workers.len() > 3 {
        return Err(SchedError::TooLarge { tasks: dag.len(), workers: machine.workers.len() });
    }
    if machine.workers.is_empty() {
        return Err(SchedError::NoWorkers);
    }
    dag.topo_order()?;
    let n = dag.len();
    let nw = machine.workers.len();
    let mut best = f64::INFINITY;

    struct Search<'a> {
        dag: &'a TaskDag,
        machine: &'a MachineModel,
        finish: Vec<f64>,
        assignment: Vec<usize>,
        scheduled: Vec<bool>,
        worker_avail: Vec<f64>,
        remaining_work: f64,
    }

    fn dfs(s: &mut Search<'_>, placed: usize, best: &mut f64) {
        let n = s.dag.len();
        if placed == n {
            let makespan = s.finish.iter().copied().fold(0.0, f64::max);
            if makespan < *best {
                *best = makespan;
            }
            return;
        }
        // lower bound: current max finish, and remaining work spread over
        // all workers from the earliest available time
        let cur_max = s.finish.iter().copied().fold(0.0, f64::max);
        let earliest = s.worker_avail.iter().copied().fold(f64::INFINITY, f64::min);
        let lb = cur_max.max(earliest + s.remaining_work / s.machine.total_speed());
        if lb >= *best {
            return;
        }
        for t in 0..n {
            if s.scheduled[t] || !s.dag.preds(t).iter().all(|&p| s.scheduled[p]) {
                continue;
            }
            for w in 0..s.machine.workers.len() {
                let dep_ready = s
                    .dag
                    .preds(t)
                    .iter()
                    .map(|&p| {
                        let comm =
                            if s.assignment[p] != w { s.machine.comm_cost } else { 0.0 };
                        s.finish[p] + comm
                    })
                    .fold(0.0, f64::max);
                let start = s.worker_avail[w].max(dep_ready);
                let fin = start + s.dag.tasks()[t].work / s.machine.workers[w].speed;
                if fin >= *best {
                    continue;
                }
                let saved_avail = s.worker_avail[w];
                s.scheduled[t] = true;
                s.assignment[t] = w;
                s.finish[t] = fin;
                s.worker_avail[w] = fin;
                s.remaining_work -= s.dag.tasks()[t].work;
                dfs(s, placed + 1, best);
                s.scheduled[t] = false;
                s.finish[t] = 0.0;
                s.worker_avail[w] = saved_avail;
                s.remaining_work += s.dag.tasks()[t].work;
            }
        }
    }

    if n == 0 {
        return Ok(0.0);
    }
    let mut search = Search {
        dag,
        machine,
        finish: vec![0.0; n],
        assignment: vec![usize::MAX; n],
        scheduled: vec![false; n],
        worker_avail: vec![0.0; nw],
        remaining_work: dag.total_work(),
    };
    dfs(&mut search, 0, &mut best);
    Ok(best)
}

/// Structural validity of a schedule: precedence (with communication
/// delays) and worker exclusivity.
pub fn validate_schedule(dag: &TaskDag, machine: &MachineModel, s: &Schedule) -> bool {
    let eps = 1e-9;
    for &(a, b) in dag.edges() {
        let comm = if s.assignment[a] != s.assignment[b] { machine.comm_cost } else { 0.0 };
        if s.start[b] + eps < s.finish[a] + comm {
            return false;
        }
    }
    for lane in &s.timeline {
        for pair in lane.windows(2) {
            if pair[1].start + eps < pair[0].finish {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, work: f64) -> TaskDag {
        let tasks = (0..n)
            .map(|id| Task { id, work, memory: 1.0, frontal: id })
            .collect();
        let edges = (0..n - 1).map(|i| (i, i + 1)).collect();
        TaskDag::new(tasks, edges).unwrap()
    }

    fn independent(n: usize, work: f64) -> TaskDag {
        let tasks = (0..n)
            .map(|id| Task { id, work, memory: 1.0, frontal: id })
            .collect();
        TaskDag::new(tasks, vec![]).unwrap()
    }

    #[test]
    fn cycle_rejected() {
        let tasks = (0..2)
            .map(|id| Task { id, work: 1.0, memory: 1.0, frontal: id })
            .collect();
        assert_eq!(
            TaskDag::new(tasks, vec![(0, 1), (1, 0)]).unwrap_err(),
            SchedError::CyclicDag
        );
    }

    #[test]
    fn chain_makespan_is_serial() {
        let dag = chain(3, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        for a in SchedulerAction::ALL {
            let s = list_schedule(&dag, &m, a).unwrap();
            assert_eq!(s.metrics.makespan, 3.0, "{}", a.name());
        }
    }

    #[test]
    fn independent_tasks_pack() {
        let dag = independent(4, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        let s = list_schedule(&dag, &m, SchedulerAction::Time).unwrap();
        assert_eq!(s.metrics.makespan, 2.0);
    }

    #[test]
    fn heterogeneous_speeds() {
        let dag = independent(2, 2.0);
        let m = MachineModel {
            workers: vec![Worker { id: 0, speed: 1.0 }, Worker { id: 1, speed: 2.0 }],
            comm_cost: 0.0,
        };
        let s = list_schedule(&dag, &m, SchedulerAction::Time).unwrap();
        assert_eq!(s.metrics.makespan, 2.0);
        assert_eq!(brute_force_optimal(&dag, &m).unwrap(), 2.0);
    }

    #[test]
    fn brute_force_chain() {
        let dag = chain(3, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        assert_eq!(brute_force_optimal(&dag, &m).unwrap(), 3.0);
    }

    #[test]
    fn brute_force_independent() {
        let dag = independent(4, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        assert_eq!(brute_force_optimal(&dag, &m).unwrap(), 2.0);
    }

    #[test]
    fn brute_force_star() {
        // 3 leaves then a root
        let tasks = (0..4)
            .map(|id| Task { id, work: 1.0, memory: 1.0, frontal: id })
            .collect();
        let dag = TaskDag::new(tasks, vec![(0, 3), (1, 3), (2, 3)]).unwrap();
        let m = MachineModel::uniform(2, 1.0, 0.0);
        assert_eq!(brute_force_optimal(&dag, &m).unwrap(), 3.0);
    }

    #[test]
    fn brute_force_too_large() {
        let dag = independent(11, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        assert!(matches!(
            brute_force_optimal(&dag, &m),
            Err(SchedError::TooLarge { .. })
        ));
    }

    #[test]
    fn reward_arithmetic() {
        let metrics = ScheduleMetrics {
            makespan: 3.0,
            peak_memory: 2.0,
            balance: 1.0,
            comm_volume: 0,
        };
        let w = RewardWeights::makespan_only();
        assert_eq!(reward(&metrics, &w), -3.0);
        let w = RewardWeights::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(reward(&metrics, &w), 0.0);
        let metrics2 = ScheduleMetrics {
            makespan: 2.0,
            peak_memory: 0.0,
            balance: 1.0,
            comm_volume: 1,
        };
        let w = RewardWeights::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(reward(&metrics2, &w), -3.0);
    }

    #[test]
    fn zero_weights_rejected() {
        assert_eq!(
            RewardWeights::new(0.0, 0.0, 0.0, 0.0).unwrap_err(),
            SchedError::ZeroWeights
        );
    }

    #[test]
    fn schedules_are_valid_and_deterministic() {
        let dag = chain(4, 2.0);
        let m = MachineModel::uniform(2, 1.0, 0.5);
        for a in SchedulerAction::ALL {
            let s1 = list_schedule(&dag, &m, a).unwrap();
            let s2 = list_schedule(&dag, &m, a).unwrap();
            assert_eq!(s1, s2);
            assert!(validate_schedule(&dag, &m, &s1));
        }
    }

    #[test]
    fn makespan_lower_bounds_hold() {
        let dag = independent(5, 1.0);
        let m = MachineModel::uniform(2, 1.0, 0.0);
        let s = list_schedule(&dag, &m, SchedulerAction::Balance).unwrap();
        assert!(s.metrics.makespan >= dag.total_work() / m.total_speed());
        assert!(s.metrics.makespan >= dag.critical_path() / m.max_speed());
        assert!(s.metrics.balance >= 1.0);
    }

    #[test]
    fn dag_from_etree_shapes() {
        // diagonal pattern: all tasks independent
        let p = SparsePattern::identity(4);
        let d = dag_from_etree(&p, &Permutation::identity(4)).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.edges().is_empty());

        // tridiagonal: chain
        let mut e: Vec<(usize, usize)> = (0..4).map(|i| (i, i)).collect();
        for i in 0..3 {
            e.push((i, i + 1));
            e.push((i + 1, i));
        }
        let p = SparsePattern::new(4, e).unwrap();
        let d = dag_from_etree(&p, &Permutation::identity(4)).unwrap();
        assert_eq!(d.edges(), &[(0, 1), (1, 2), (2, 3)]);

        // arrow with hub last: 3 leaves feeding one root
        let mut e = vec![(0usize, 0usize)];
        for i in 1..4 {
            e.push((i, i));
            e.push((0, i));
            e.push((i, 0));
        }
        let p = SparsePattern::new(4, e).unwrap();
        let perm = Permutation::from_order(vec![1, 2, 3, 0]).unwrap();
        let d = dag_from_etree(&p, &perm).unwrap();
        assert_eq!(d.edges(), &[(0, 3), (1, 3), (2, 3)]);
    }
}
