//! Tabular Q-learning: state featurization for the three decision
//! domains, the update rule, the offline train/infer split, and Q-table
//! persistence.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordering::EliminationGraph;
use crate::pivoting::GrowthTrace;
use crate::scalar::Real;
use crate::scheduling::SimState;
use crate::sparse::DenseWorkingMatrix;

/// On-disk Q-table format version.
pub const QTABLE_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum QError {
    #[error("episode corpus is empty")]
    EmptyCorpus,
    #[error("domain mismatch: expected {expected:?}, got {got:?}")]
    DomainMismatch { expected: Domain, got: Domain },
    #[error("Q-table version {found} does not match current version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt Q-table: {0}")]
    Corrupt(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

/// The three decision domains of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Ordering,
    Pivoting,
    Scheduling,
}

impl Domain {
    pub fn action_names(self) -> Vec<&'static str> {
        match self {
            Domain::Ordering => crate::ordering::OrderingAction::ALL
                .iter()
                .map(|a| a.name())
                .collect(),
            Domain::Pivoting => crate::pivoting::PivotAction::ALL
                .iter()
                .map(|a| a.name())
                .collect(),
            Domain::Scheduling => crate::scheduling::SchedulerAction::ALL
                .iter()
                .map(|a| a.name())
                .collect(),
        }
    }

    pub fn action_count(self) -> usize {
        self.action_names().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Ordering => "ordering",
            Domain::Pivoting => "pivoting",
            Domain::Scheduling => "scheduling",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ordering" => Some(Domain::Ordering),
            "pivoting" => Some(Domain::Pivoting),
            "scheduling" => Some(Domain::Scheduling),
            _ => None,
        }
    }
}

/// Discretized state: a small integer feature vector plus a terminal flag.
/// Featurization is deterministic; equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey {
    pub domain: Domain,
    pub buckets: Vec<u8>,
    pub terminal: bool,
}

impl StateKey {
    pub fn new(domain: Domain, buckets: Vec<u8>) -> Self {
        Self { domain, buckets, terminal: false }
    }

    pub fn terminal(domain: Domain, buckets: Vec<u8>) -> Self {
        Self { domain, buckets, terminal: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub q: f64,
    pub visits: u64,
}

/// Learned Q(s, a) table for one domain. Absent entries read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    domain: Domain,
    entries: BTreeMap<(StateKey, usize), QEntry>,
}

impl QTable {
    pub fn new(domain: Domain) -> Self {
        Self { domain, entries: BTreeMap::new() }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn q(&self, s: &StateKey, a: usize) -> f64 {
        self.entries.get(&(s.clone(), a)).map_or(0.0, |e| e.q)
    }

    pub fn visits(&self, s: &StateKey, a: usize) -> u64 {
        self.entries.get(&(s.clone(), a)).map_or(0, |e| e.visits)
    }

    pub fn max_q(&self, s: &StateKey) -> f64 {
        (0..self.domain.action_count())
            .map(|a| self.q(s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action: argmax over Q(s, ·) with ties to the lowest action
    /// id. `None` when the state has never been visited.
    pub fn best_action(&self, s: &StateKey) -> Option<usize> {
        let seen = (0..self.domain.action_count()).any(|a| {
            self.entries.contains_key(&(s.clone(), a))
        });
        if !seen {
            return None;
        }
        let mut best = 0;
        let mut best_q = self.q(s, 0);
        for a in 1..self.domain.action_count() {
            let q = self.q(s, a);
            if q > best_q {
                best = a;
                best_q = q;
            }
        }
        Some(best)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(StateKey, usize), &QEntry)> {
        self.entries.iter()
    }
}

/// Training hyperparameters. `alpha` in (0,1], `gamma` in [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub episodes: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            gamma: 1.0,
            epsilon_start: 0.5,
            epsilon_end: 0.01,
            episodes: 2000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), QError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(QError::InvalidConfig(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(QError::InvalidConfig(format!("gamma {} not in [0, 1]", self.gamma)));
        }
        if self.episodes == 0 {
            return Err(QError::InvalidConfig("episodes must be >= 1".into()));
        }
        for (name, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)]
        {
            if !(0.0..=1.0).contains(&e) {
                return Err(QError::InvalidConfig(format!("{name} {e} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Linearly decayed exploration rate for episode `ep` (0-based).
    pub fn epsilon(&self, ep: usize) -> f64 {
        if self.episodes <= 1 {
            return self.epsilon_start;
        }
        let t = ep as f64 / (self.episodes - 1) as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * t
    }
}

/// One Watkins Q-learning update:
/// `Q(s,a) += alpha * (r + gamma * B - Q(s,a))` with `B = 0` on terminal
/// transitions, else `max_a' Q(s', a')`. Returns the updated value.
pub fn q_update(
    t: &mut QTable,
    s: &StateKey,
    a: usize,
    r: f64,
    s_next: &StateKey,
    terminal: bool,
    cfg: &TrainConfig,
) -> Result<f64, QError> {
    if s.domain != t.domain {
        return Err(QError::DomainMismatch { expected: t.domain, got: s.domain });
    }
    let backup = if terminal { 0.0 } else { t.max_q(s_next) };
    let entry = t
        .entries
        .entry((s.clone(), a))
        .or_insert(QEntry { q: 0.0, visits: 0 });
    entry.q += cfg.alpha * (r + cfg.gamma * backup - entry.q);
    entry.visits += 1;
    Ok(entry.q)
}

/// Greedy policy over a learned table. Unseen states fall back to a
/// per-domain default action and never abort inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    table: QTable,
    default_action: usize,
}

impl Policy {
    pub fn greedy(table: QTable, default_action: usize) -> Self {
        Self { table, default_action }
    }

    pub fn domain(&self) -> Domain {
        self.table.domain()
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn select(&self, s: &StateKey) -> usize {
        self.table.best_action(s).unwrap_or(self.default_action)
    }
}

/// A rollable episode source for offline training.
pub trait Environment {
    fn domain(&self) -> Domain;
    /// Starts a fresh episode, returning the initial state.
    fn reset(&mut self) -> StateKey;
    /// Applies an action: `(next_state, reward, terminal)`.
    fn step(&mut self, action: usize) -> (StateKey, f64, bool);
}

/// Offline training: for `cfg.episodes` iterations, sample a corpus
/// member (seeded), roll an episode with epsilon-greedy selection and
/// apply the update per step. Sequential and reproducible. Returns the
/// table and the per-episode return curve.
pub fn train_offline(
    corpus: &mut [Box<dyn Environment + '_>],
    domain: Domain,
    cfg: &TrainConfig,
) -> Result<(QTable, Vec<f64>), QError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(QError::EmptyCorpus);
    }
    for env in corpus.iter() {
        if env.domain() != domain {
            return Err(QError::DomainMismatch { expected: domain, got: env.domain() });
        }
    }
    let n_actions = domain.action_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = QTable::new(domain);
    let mut curve = Vec::with_capacity(cfg.episodes);

    for ep in 0..cfg.episodes {
        let eps = cfg.epsilon(ep);
        let idx = rng.gen_range(0..corpus.len());
        let env = &mut corpus[idx];
        let mut s = env.reset();
        let mut episode_return = 0.0;
        while !s.terminal {
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..n_actions)
            } else {
                table.best_action(&s).unwrap_or(0)
            };
            let (s_next, r, terminal) = env.step(a);
            q_update(&mut table, &s, a, r, &s_next, terminal, cfg)?;
            episode_return += r;
            if terminal {
                break;
            }
            s = s_next;
        }
        curve.push(episode_return);
    }
    Ok((table, curve))
}

// ---------------------------------------------------------------------------
// Featurization

fn bin8(fraction: f64) -> u8 {
    ((fraction * 8.0) as i64).clamp(0, 7) as u8
}

/// Ordering state: progress, live-edge density, degree spread, minimum
/// degree.
pub fn featurize_ordering(g: &EliminationGraph) -> StateKey {
    let n = g.n();
    if g.live_count() == 0 {
        return StateKey::terminal(Domain::Ordering, vec![7, 0, 0, 0]);
    }
    let progress = if n == 0 { 0.0 } else { (g.step() - 1) as f64 / n as f64 };
    let live = g.live_count();
    let density = if live >= 2 {
        g.live_edge_count() as f64 / (live * (live - 1) / 2) as f64
    } else {
        0.0
    };
    let degrees: Vec<f64> = g.live_nodes().map(|v| g.degree(v) as f64).collect();
    let mean = degrees.iter().sum::<f64>() / degrees.len() as f64;
    let cv_bin = if mean > 0.0 {
        let var = degrees.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / degrees.len() as f64;
        let cv = var.sqrt() / mean;
        if cv < 0.25 {
            0
        } else if cv < 0.5 {
            1
        } else if cv < 1.0 {
            2
        } else {
            3
        }
    } else {
        0
    };
    let min_degree = g.live_nodes().map(|v| g.degree(v)).min().unwrap_or(0).min(7) as u8;
    StateKey::new(
        Domain::Ordering,
        vec![bin8(progress), bin8(density), cv_bin, min_degree],
    )
}

/// Pivoting state: progress, diagonal dominance of the active column,
/// log-scale growth so far.
pub fn featurize_pivoting<T: Real>(m: &DenseWorkingMatrix<T>, t: &GrowthTrace<T>) -> StateKey {
    let n = m.n();
    let k = m.step(); // 1-based
    let growth_bin = {
        let ratio = if t.max_initial > T::zero() {
            (t.max_seen / t.max_initial).to_f64().unwrap_or(1.0)
        } else {
            1.0
        };
        (ratio.max(1.0).log2() as i64).clamp(0, 7) as u8
    };
    if k >= n {
        return StateKey::terminal(Domain::Pivoting, vec![7, 0, growth_bin]);
    }
    let progress = (k - 1) as f64 / n as f64;
    let k0 = k - 1;
    let diag = m.get(k0, k0).abs();
    let mut max_off = T::zero();
    for i in k0 + 1..n {
        max_off = max_off.max(m.get(i, k0).abs());
    }
    let dominance = if diag >= max_off {
        0
    } else if diag + diag >= max_off {
        1
    } else {
        2
    };
    StateKey::new(Domain::Pivoting, vec![bin8(progress), dominance, growth_bin])
}

/// Scheduling state: ready count, idle workers, completion fraction,
/// memory pressure.
pub fn featurize_scheduling(sim: &SimState) -> StateKey {
    if sim.is_finished() {
        return StateKey::terminal(Domain::Scheduling, vec![0, 0, 7, 0]);
    }
    let ready = sim.ready_tasks().len().min(7) as u8;
    let idle = sim.idle_workers().len().min(3) as u8;
    let progress = bin8(sim.progress());
    let peak = sim.peak_live_memory();
    let pressure = if peak > 0.0 {
        ((sim.live_memory() / peak) * 4.0 as f64).clamp(0.0, 3.0) as u8
    } else {
        0
    };
    StateKey::new(Domain::Scheduling, vec![ready, idle, progress, pressure])
}

// ---------------------------------------------------------------------------
// Persistence

#[derive(Serialize, Deserialize)]
struct QTableFileEntry {
    key: Vec<u8>,
    action: usize,
    q: f64,
    visits: u64,
}

#[derive(Serialize, Deserialize)]
struct QTableFile {
    version: u32,
    domain: Domain,
    actions: Vec<String>,
    entries: Vec<QTableFileEntry>,
}

/// Serializes a table to versioned JSON. Keys are emitted in sorted
/// order, so output is canonical; the terminal flag is appended to the
/// bucket vector as a trailing 0/1.
pub fn save_qtable(t: &QTable) -> String {
    let entries = t
        .entries()
        .map(|((s, a), e)| {
            let mut key = s.buckets.clone();
            key.push(u8::from(s.terminal));
            QTableFileEntry { key, action: *a, q: e.q, visits: e.visits }
        })
        .collect();
    let file = QTableFile {
        version: QTABLE_VERSION,
        domain: t.domain(),
        actions: t.domain().action_names().iter().map(|s| s.to_string()).collect(),
        entries,
    };
    serde_json::to_string_pretty(&file).expect("table serializes")
}

pub fn load_qtable(text: &str) -> Result<QTable, QError> {
    let file: QTableFile =
        serde_json::from_str(text).map_err(|e| QError::Corrupt(e.to_string()))?;
    if file.version != QTABLE_VERSION {
        return Err(QError::VersionMismatch { found: file.version, expected: QTABLE_VERSION });
    }
    let expected_actions: Vec<String> =
        file.domain.action_names().iter().map(|s| s.to_string()).collect();
    if file.actions != expected_actions {
        return Err(QError::Corrupt(format!(
            "action set {:?} does not match domain {:?}",
            file.actions, file.domain
        )));
    }
    let mut table = QTable::new(file.domain);
    for e in file.entries {
        let mut buckets = e.key;
        let terminal = match buckets.pop() {
            Some(0) => false,
            Some(1) => true,
            _ => return Err(QError::Corrupt("bad terminal flag in key".into())),
        };
        if e.action >= file.domain.action_count() {
            return Err(QError::Corrupt(format!("action id {} out of range", e.action)));
        }
        if !e.q.is_finite() || e.visits == 0 {
            return Err(QError::Corrupt("non-finite q or zero visits".into()));
        }
        let key = StateKey { domain: file.domain, buckets, terminal };
        table.entries.insert((key, e.action), QEntry { q: e.q, visits: e.visits });
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Episode environments for the three domains

/// Ordering episodes over one pattern: each action picks the metric for
/// one elimination step; reward is minus the fill added.
pub struct OrderingEnv {
    pattern: crate::sparse::SparsePattern,
    graph: EliminationGraph,
}

impl OrderingEnv {
    pub fn new(pattern: crate::sparse::SparsePattern) -> Self {
        let graph = EliminationGraph::from_pattern(&pattern);
        Self { pattern, graph }
    }
}

impl Environment for OrderingEnv {
    fn domain(&self) -> Domain {
        Domain::Ordering
    }

    fn reset(&mut self) -> StateKey {
        self.graph = EliminationGraph::from_pattern(&self.pattern);
        featurize_ordering(&self.graph)
    }

    fn step(&mut self, action: usize) -> (StateKey, f64, bool) {
        let a = crate::ordering::OrderingAction::from_id(action)
            .unwrap_or(crate::ordering::OrderingAction::Md);
        let (node, _) = self.graph.best_node(a).expect("episode not terminal");
        let fill = self.graph.eliminate_node(node).expect("chosen node live");
        let next = featurize_ordering(&self.graph);
        let terminal = next.terminal;
        (next, -(fill as f64), terminal)
    }
}

/// Pivoting episodes over one matrix: each action picks the pivot
/// strategy for one elimination step; rewards telescope to minus the
/// growth factor.
pub struct PivotingEnv {
    matrix: crate::sparse::SparseMatrix<f64>,
    work: DenseWorkingMatrix<f64>,
    growth: GrowthTrace<f64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    prev_ratio: f64,
    dead: bool,
}

impl PivotingEnv {
    pub fn new(matrix: crate::sparse::SparseMatrix<f64>) -> Self {
        let work = matrix.to_dense().expect("corpus matrices fit the dense cap");
        let n = work.n();
        let growth = GrowthTrace::new(work.max_abs());
        let mut env = Self {
            matrix,
            work,
            growth,
            row_perm: (0..n).collect(),
            col_perm: (0..n).collect(),
            prev_ratio: 0.0,
            dead: false,
        };
        env.reset();
        env
    }
}

impl Environment for PivotingEnv {
    fn domain(&self) -> Domain {
        Domain::Pivoting
    }

    fn reset(&mut self) -> StateKey {
        self.work = self.matrix.to_dense().expect("corpus matrices fit the dense cap");
        self.growth = GrowthTrace::new(self.work.max_abs());
        let n = self.work.n();
        self.row_perm = (0..n).collect();
        self.col_perm = (0..n).collect();
        self.prev_ratio = 0.0;
        self.dead = false;
        featurize_pivoting(&self.work, &self.growth)
    }

    fn step(&mut self, action: usize) -> (StateKey, f64, bool) {
        use crate::pivoting::{ge_step, select_pivot, PivotAction, BREAKDOWN_PENALTY};
        let n = self.work.n();
        let k = self.work.step() - 1;
        let a = PivotAction::from_id(action).unwrap_or(PivotAction::Pp);
        let tol = (n as f64) * f64::EPSILON * self.growth.max_initial;
        let mut penalty = 0.0;
        let pivot = match select_pivot(&self.work, k, a, tol) {
            Ok(p) => p,
            Err(_) if a == PivotAction::Skip => {
                penalty = BREAKDOWN_PENALTY;
                match select_pivot(&self.work, k, PivotAction::Pp, tol) {
                    Ok(p) => p,
                    Err(_) => {
                        self.dead = true;
                        let key = StateKey::terminal(Domain::Pivoting, vec![7, 0, 7]);
                        return (key, BREAKDOWN_PENALTY, true);
                    }
                }
            }
            Err(_) => {
                self.dead = true;
                let key = StateKey::terminal(Domain::Pivoting, vec![7, 0, 7]);
                return (key, BREAKDOWN_PENALTY, true);
            }
        };
        if ge_step(
            &mut self.work,
            pivot,
            &mut self.row_perm,
            &mut self.col_perm,
            &mut self.growth,
            tol,
        )
        .is_err()
        {
            self.dead = true;
            let key = StateKey::terminal(Domain::Pivoting, vec![7, 0, 7]);
            return (key, BREAKDOWN_PENALTY, true);
        }
        let ratio = self.growth.max_seen / self.growth.max_initial;
        let reward = -(ratio - self.prev_ratio) + penalty;
        self.prev_ratio = ratio;
        let next = featurize_pivoting(&self.work, &self.growth);
        let terminal = next.terminal;
        (next, reward, terminal)
    }
}

/// Scheduling episodes over one DAG/machine pair: each action dispatches
/// one task; the terminal reward is the weighted metric sum.
pub struct SchedulingEnv {
    dag: crate::scheduling::TaskDag,
    machine: crate::scheduling::MachineModel,
    weights: crate::scheduling::RewardWeights,
    sim: SimState,
}

impl SchedulingEnv {
    pub fn new(
        dag: crate::scheduling::TaskDag,
        machine: crate::scheduling::MachineModel,
        weights: crate::scheduling::RewardWeights,
    ) -> Result<Self, crate::scheduling::SchedError> {
        let sim = SimState::new(&dag, &machine)?;
        Ok(Self { dag, machine, weights, sim })
    }
}

impl Environment for SchedulingEnv {
    fn domain(&self) -> Domain {
        Domain::Scheduling
    }

    fn reset(&mut self) -> StateKey {
        self.sim = SimState::new(&self.dag, &self.machine).expect("validated in new");
        self.sim.advance_to_decision();
        featurize_scheduling(&self.sim)
    }

    fn step(&mut self, action: usize) -> (StateKey, f64, bool) {
        let a = crate::scheduling::SchedulerAction::from_id(action)
            .unwrap_or(crate::scheduling::SchedulerAction::Time);
        self.sim.dispatch(a);
        let more = self.sim.advance_to_decision();
        let next = featurize_scheduling(&self.sim);
        if more {
            (next, 0.0, false)
        } else {
            let r = crate::scheduling::reward(&self.sim.metrics(), &self.weights);
            (next, r, true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, gamma: f64) -> TrainConfig {
        TrainConfig { alpha, gamma, ..TrainConfig::default() }
    }

    fn key(buckets: Vec<u8>) -> StateKey {
        StateKey::new(Domain::Ordering, buckets)
    }

    #[test]
    fn q_update_terminal_backup_zero() {
        let mut t = QTable::new(Domain::Ordering);
        let s = key(vec![0]);
        let s2 = StateKey::terminal(Domain::Ordering, vec![1]);
        let c = cfg(0.5, 0.9);
        let q = q_update(&mut t, &s, 0, 1.0, &s2, true, &c).unwrap();
        assert_eq!(q, 0.5);
        let q = q_update(&mut t, &s, 0, 1.0, &s2, true, &c).unwrap();
        assert_eq!(q, 0.75);
        assert_eq!(t.visits(&s, 0), 2);
    }

    #[test]
    fn q_update_uses_max_next() {
        let mut t = QTable::new(Domain::Ordering);
        let s = key(vec![0]);
        let s2 = key(vec![1]);
        let c = cfg(0.5, 0.9);
        // prime Q(s2, 1) = 0.5
        let term = StateKey::terminal(Domain::Ordering, vec![2]);
        q_update(&mut t, &s2, 1, 1.0, &term, true, &c).unwrap();
        assert_eq!(t.q(&s2, 1), 0.5);
        let q = q_update(&mut t, &s, 0, 1.0, &s2, false, &c).unwrap();
        assert!((q - 0.725).abs() < 1e-12); // 0.5 * (1 + 0.9*0.5)
    }

    #[test]
    fn q_update_domain_mismatch() {
        let mut t = QTable::new(Domain::Ordering);
        let s = StateKey::new(Domain::Pivoting, vec![0]);
        let c = cfg(0.5, 0.9);
        assert!(matches!(
            q_update(&mut t, &s, 0, 0.0, &s, true, &c),
            Err(QError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn best_action_none_for_unseen() {
        let t = QTable::new(Domain::Ordering);
        assert_eq!(t.best_action(&key(vec![0])), None);
        let p = Policy::greedy(t, 2);
        assert_eq!(p.select(&key(vec![0])), 2);
    }

    #[test]
    fn best_action_ties_to_lowest_id() {
        let mut t = QTable::new(Domain::Ordering);
        let s = key(vec![0]);
        let term = StateKey::terminal(Domain::Ordering, vec![1]);
        let c = cfg(1.0, 0.0);
        q_update(&mut t, &s, 3, 1.0, &term, true, &c).unwrap();
        q_update(&mut t, &s, 1, 1.0, &term, true, &c).unwrap();
        assert_eq!(t.best_action(&s), Some(1));
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 0.5).validate().is_err());
        assert!(cfg(1.5, 0.5).validate().is_err());
        assert!(cfg(0.5, 1.5).validate().is_err());
        assert!(cfg(0.5, 0.5).validate().is_ok());
        let mut c = cfg(0.5, 0.5);
        c.episodes = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn epsilon_decays_linearly() {
        let mut c = TrainConfig::default();
        c.epsilon_start = 1.0;
        c.epsilon_end = 0.0;
        c.episodes = 5;
        assert_eq!(c.epsilon(0), 1.0);
        assert_eq!(c.epsilon(4), 0.0);
        assert_eq!(c.epsilon(2), 0.5);
    }

    #[test]
    fn save_load_round_trip() {
        let mut t = QTable::new(Domain::Pivoting);
        let c = cfg(0.5, 0.9);
        let s = StateKey::new(Domain::Pivoting, vec![1, 2, 3]);
        let term = StateKey::terminal(Domain::Pivoting, vec![7, 0, 0]);
        q_update(&mut t, &s, 0, 1.0, &term, true, &c).unwrap();
        q_update(&mut t, &s, 2, -0.5, &term, true, &c).unwrap();
        q_update(&mut t, &s, 2, -0.5, &term, true, &c).unwrap();
        let text = save_qtable(&t);
        let t2 = load_qtable(&text).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn empty_table_round_trip() {
        let t = QTable::new(Domain::Scheduling);
        assert_eq!(load_qtable(&save_qtable(&t)).unwrap(), t);
    }

    #[test]
    fn version_mismatch_rejected() {
        let t = QTable::new(Domain::Ordering);
        let text = save_qtable(&t).replace("\"version\": 1", "\"version\": 0");
        assert_eq!(
            load_qtable(&text).unwrap_err(),
            QError::VersionMismatch { found: 0, expected: QTABLE_VERSION }
        );
    }

    #[test]
    fn corrupt_rejected() {
        assert!(matches!(load_qtable("not json"), Err(QError::Corrupt(_))));
    }

    #[test]
    fn canonical_output_is_stable() {
        let mut t = QTable::new(Domain::Ordering);
        let c = cfg(0.5, 1.0);
        let term = StateKey::terminal(Domain::Ordering, vec![7, 0, 0, 0]);
        for b in [3u8, 1, 2] {
            q_update(&mut t, &key(vec![b]), 0, 1.0, &term, true, &c).unwrap();
        }
        assert_eq!(save_qtable(&t), save_qtable(&load_qtable(&save_qtable(&t)).unwrap()));
    }

    #[test]
    fn featurize_is_deterministic() {
        let p = crate::sparse::SparsePattern::new(4, vec![(0, 1), (1, 0), (1, 2), (2, 1)])
            .unwrap();
        let g = EliminationGraph::from_pattern(&p);
        assert_eq!(featurize_ordering(&g), featurize_ordering(&g));
    }

    #[test]
    fn featurize_ordering_terminal() {
        let p = crate::sparse::SparsePattern::identity(2);
        let mut g = EliminationGraph::from_pattern(&p);
        g.eliminate_node(0).unwrap();
        g.eliminate_node(1).unwrap();
        let k = featurize_ordering(&g);
        assert!(k.terminal);
        assert_eq!(k.buckets[0], 7);
    }

    #[test]
    fn featurize_ordering_empty_graph() {
        let p = crate::sparse::SparsePattern::identity(3);
        let g = EliminationGraph::from_pattern(&p);
        let k = featurize_ordering(&g);
        assert_eq!(k.buckets[1], 0); // density
        assert_eq!(k.buckets[3], 0); // min degree
    }

    #[test]
    fn featurize_pivoting_identity_start() {
        let m: crate::sparse::SparseMatrix<f64> = crate::sparse::SparseMatrix::identity(4);
        let d = m.to_dense().unwrap();
        let g = GrowthTrace::new(1.0);
        let k = featurize_pivoting(&d, &g);
        assert!(!k.terminal);
        assert_eq!(k.buckets[1], 0); // diagonally dominant
        assert_eq!(k.buckets[2], 0); // growth 1 -> bin 0
    }

    #[test]
    fn featurize_pivoting_growth_bin() {
        let m: crate::sparse::SparseMatrix<f64> = crate::sparse::SparseMatrix::identity(4);
        let d = m.to_dense().unwrap();
        let mut g = GrowthTrace::new(1.0);
        g.observe(8.0);
        let k = featurize_pivoting(&d, &g);
        assert_eq!(k.buckets[2], 3); // log2(8)
    }

    #[test]
    fn ordering_env_single_action_path_is_fill_free() {
        let mut e: Vec<(usize, usize)> = Vec::new();
        for i in 0..4 {
            e.push((i, i + 1));
            e.push((i + 1, i));
        }
        let p = crate::sparse::SparsePattern::new(5, e).unwrap();
        let mut env = OrderingEnv::new(p);
        let mut s = env.reset();
        let mut total = 0.0;
        while !s.terminal {
            let (next, r, terminal) = env.step(crate::ordering::OrderingAction::Md.id());
            total += r;
            s = next;
            if terminal {
                break;
            }
        }
        assert_eq!(total, 0.0);
    }

    #[test]
    fn training_is_reproducible() {
        let p = crate::sparse::SparsePattern::new(3, vec![(0, 1), (1, 0), (1, 2), (2, 1)])
            .unwrap();
        let c = TrainConfig { episodes: 50, ..TrainConfig::default() };
        let run = |p: &crate::sparse::SparsePattern| {
            let mut corpus: Vec<Box<dyn Environment>> =
                vec![Box::new(OrderingEnv::new(p.clone()))];
            train_offline(&mut corpus, Domain::Ordering, &c).unwrap()
        };
        let (t1, c1) = run(&p);
        let (t2, c2) = run(&p);
        assert_eq!(t1, t2);
        assert_eq!(c1, c2);
    }

    #[test]
    fn empty_corpus_rejected() {
        let mut corpus: Vec<Box<dyn Environment>> = vec![];
        assert_eq!(
            train_offline(&mut corpus, Domain::Ordering, &TrainConfig::default()).unwrap_err(),
            QError::EmptyCorpus
        );
    }
}
