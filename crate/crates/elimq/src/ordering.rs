//! Graph-elimination engine: minimum-degree-style orderings with a
//! per-step choice of selection metric, plus the fill-count and
//! elimination-tree oracles used to audit them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qlearn::{featurize_ordering, Domain, Policy};
use crate::sparse::{Permutation, SparsePattern};

#[derive(Debug, Error, PartialEq)]
pub enum OrderError {
    #[error("node {0} already eliminated")]
    AlreadyEliminated(usize),
    #[error("node {node} out of range for graph of size {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("permutation size {perm} does not match pattern size {n}")]
    SizeMismatch { perm: usize, n: usize },
    #[error("n = {0} too large for exhaustive order enumeration (max 8)")]
    TooLarge(usize),
    #[error("policy domain {0:?} is not the ordering domain")]
    PolicyDomainMismatch(Domain),
}

/// Node-selection metric used at one elimination step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderingAction {
    /// Exact minimum degree.
    Md,
    /// Upper-bound (approximate) degree.
    Amd,
    /// Minimum deficiency (fill edges the elimination would create).
    Mmdf,
    /// Minimum increase in neighborhood degree.
    Mind,
    /// Minimum mean local fill: deficiency per unit degree.
    Mmf,
}

impl OrderingAction {
    pub const ALL: [OrderingAction; 5] = [
        OrderingAction::Md,
        OrderingAction::Amd,
        OrderingAction::Mmdf,
        OrderingAction::Mind,
        OrderingAction::Mmf,
    ];

    pub fn id(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderingAction::Md => "MD",
            OrderingAction::Amd => "AMD",
            OrderingAction::Mmdf => "MMDF",
            OrderingAction::Mind => "MIND",
            OrderingAction::Mmf => "MMF",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.name().eq_ignore_ascii_case(name))
    }
}

/// Undirected elimination graph `G(V^k, E^k)`.
///
/// Eliminated nodes are retained with flags so node ids stay stable and
/// step logs remain auditable.
#[derive(Debug, Clone)]
pub struct EliminationGraph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
    eliminated: Vec<bool>,
    degrees: Vec<usize>,
    /// 1-based step counter: exactly `step - 1` nodes are eliminated.
    step: usize,
    live_count: usize,
    // AMD bookkeeping: last exact degree and the neighborhood size merged
    // in since then.
    amd_prev: Vec<usize>,
    amd_inherit: Vec<usize>,
}

impl EliminationGraph {
    /// Builds the graph from a pattern; the pattern is symmetrized and the
    /// diagonal dropped.
    pub fn from_pattern(p: &SparsePattern) -> Self {
        let n = p.n();
        let sym = p.symmetrize();
        let mut adj = vec![BTreeSet::new(); n];
        for &(r, c) in sym.entries() {
            adj[r].insert(c);
        }
        let degrees: Vec<usize> = adj.iter().map(BTreeSet::len).collect();
        Self {
            n,
            amd_prev: degrees.clone(),
            amd_inherit: vec![0; n],
            adj,
            eliminated: vec![false; n],
            degrees,
            step: 1,
            live_count: n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn is_live(&self, v: usize) -> bool {
        v < self.n && !self.eliminated[v]
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&v| !self.eliminated[v])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Number of live edges remaining.
    pub fn live_edge_count(&self) -> usize {
        self.live_nodes().map(|v| self.degrees[v]).sum::<usize>() / 2
    }

    fn check_live(&self, v: usize) -> Result<(), OrderError> {
        if v >= self.n {
            return Err(OrderError::NodeOutOfRange { node: v, n: self.n });
        }
        if self.eliminated[v] {
            return Err(OrderError::AlreadyEliminated(v));
        }
        Ok(())
    }

    /// Eliminates `v`: its live neighbors become a clique, `v` is flagged,
    /// degrees are recomputed. Returns the number of fill edges added.
    pub fn eliminate_node(&mut self, v: usize) -> Result<usize, OrderError> {
        self.check_live(v)?;
        let clique: Vec<usize> = self.adj[v].iter().copied().collect();

        for &u in &clique {
            self.amd_prev[u] = self.degrees[u];
            self.amd_inherit[u] = clique.len() - 1;
        }

        let mut fill = 0;
        for (i, &a) in clique.iter().enumerate() {
            for &b in &clique[i + 1..] {
                if self.adj[a].insert(b) {
                    self.adj[b].insert(a);
                    fill += 1;
                }
            }
        }
        for &u in &clique {
            self.adj[u].remove(&v);
        }
        self.eliminated[v] = true;
        self.live_count -= 1;
        self.step += 1;
        for &u in &clique {
            self.degrees[u] = self.adj[u].len();
        }
        Ok(fill)
    }

    /// Fill edges eliminating `v` would create, without mutating the graph.
    pub fn deficiency(&self, v: usize) -> usize {
        let nbrs: Vec<usize> = self.adj[v].iter().copied().collect();
        let mut def = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !self.adj[a].contains(&b) {
                    def += 1;
                }
            }
        }
        def
    }

    /// Score of `v` under a metric; smaller is better.
    pub fn metric_score(&self, v: usize, a: OrderingAction) -> Result<f64, OrderError> {
        self.check_live(v)?;
        let score = match a {
            OrderingAction::Md => self.degrees[v] as f64,
            OrderingAction::Amd => {
                let bound = self.amd_prev[v] + self.amd_inherit[v];
                bound.min(self.live_count - 1) as f64
            }
            OrderingAction::Mmdf => self.deficiency(v) as f64,
            OrderingAction::Mind => {
                // sum over live neighbors of the degree change eliminating v
                // would cause, evaluated hypothetically
                let nbrs = &self.adj[v];
                let mut total = 0.0;
                for &u in nbrs {
                    let gained = nbrs
                        .iter()
                        .filter(|&&w| w != u && !self.adj[u].contains(&w))
                        .count();
                    total += gained as f64 - 1.0; // loses v itself
                }
                total
            }
            OrderingAction::Mmf => {
                self.deficiency(v) as f64 / (self.degrees[v].max(1)) as f64
            }
        };
        Ok(score)
    }

    /// Argmin of the metric over live nodes, ties to the lowest node index.
    pub fn best_node(&self, a: OrderingAction) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for v in self.live_nodes() {
            let s = self.metric_score(v, a).expect("live node scores");
            match best {
                Some((_, bs)) if s >= bs => {}
                _ => best = Some((v, s)),
            }
        }
        best
    }
}

/// One step of a produced ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingStep {
    pub step: usize,
    pub node: usize,
    pub action: OrderingAction,
    pub score: f64,
    pub fill: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub perm: Permutation,
    pub total_fill: usize,
    pub step_log: Vec<OrderingStep>,
}

impl OrderingResult {
    /// Episode return under the fill reward: `-total_fill`.
    pub fn reward(&self) -> f64 {
        -(self.total_fill as f64)
    }
}

fn order_with<F>(p: &SparsePattern, mut pick_action: F) -> OrderingResult
where
    F: FnMut(&EliminationGraph) -> OrderingAction,
{
    let mut g = EliminationGraph::from_pattern(p);
    let n = p.n();
    let mut order = Vec::with_capacity(n);
    let mut step_log = Vec::with_capacity(n);
    let mut total_fill = 0;
    for step in 1..=n {
        let action = pick_action(&g);
        let (node, score) = g.best_node(action).expect("live nodes remain");
        let fill = g.eliminate_node(node).expect("chosen node is live");
        total_fill += fill;
        order.push(node);
        step_log.push(OrderingStep { step, node, action, score, fill });
    }
    let perm = Permutation::from_order(order).expect("each node eliminated once");
    OrderingResult { perm, total_fill, step_log }
}

/// Greedy ordering under one fixed metric.
pub fn greedy_order(p: &SparsePattern, a: OrderingAction) -> OrderingResult {
    order_with(p, |_| a)
}

/// Ordering where a learned policy picks the metric at every step.
pub fn adaptive_order(p: &SparsePattern, pol: &Policy) -> Result<OrderingResult, OrderError> {
    if pol.domain() != Domain::Ordering {
        return Err(OrderError::PolicyDomainMismatch(pol.domain()));
    }
    Ok(order_with(p, |g| {
        let key = featurize_ordering(g);
        OrderingAction::from_id(pol.select(&key)).unwrap_or(OrderingAction::Md)
    }))
}

/// Simulates elimination of `p` in `perm` order and returns the total fill.
/// This is the oracle the ordering strategies are judged against.
pub fn symbolic_fill_count(p: &SparsePattern, perm: &Permutation) -> Result<usize, OrderError> {
    if perm.len() != p.n() {
        return Err(OrderError::SizeMismatch { perm: perm.len(), n: p.n() });
    }
    let mut g = EliminationGraph::from_pattern(p);
    let mut fill = 0;
    for k in 0..p.n() {
        fill += g.eliminate_node(perm.inverse(k))?;
    }
    Ok(fill)
}

/// Sentinel parent for elimination-tree roots.
pub const ETREE_ROOT: usize = usize::MAX;

/// Elimination tree of the symmetrized pattern under `perm`, in permuted
/// labels: `parent[i]` is the smallest `j > i` adjacent to `i` in the
/// filled graph, or [`ETREE_ROOT`].
pub fn etree(p: &SparsePattern, perm: &Permutation) -> Result<Vec<usize>, OrderError> {
    if perm.len() != p.n() {
        return Err(OrderError::SizeMismatch { perm: perm.len(), n: p.n() });
    }
    let n = p.n();
    let sym = p
        .symmetrize()
        .permute(perm)
        .expect("sizes already checked");
    let mut parent = vec![ETREE_ROOT; n];
    let mut ancestor = vec![ETREE_ROOT; n];
    for j in 0..n {
        for &(r, c) in sym.entries() {
            if c != j || r >= j {
                continue;
            }
            // walk from r up to j, compressing paths
            let mut i = r;
            while i != ETREE_ROOT && i != j {
                let next = ancestor[i];
                ancestor[i] = j;
                if next == ETREE_ROOT {
                    parent[i] = j;
                }
                i = next;
            }
        }
    }
    Ok(parent)
}

/// Number of distinct row-elimination sequences of an `n`-row matrix: `n!`.
pub fn enumerate_elimination_orders(n: usize) -> Result<u64, OrderError> {
    if n > 8 {
        return Err(OrderError::TooLarge(n));
    }
    Ok((1..=n as u64).product())
}

/// Streams every elimination order of `[0, n)` to `f`, lexicographically.
pub fn for_each_elimination_order<F>(n: usize, mut f: F) -> Result<(), OrderError>
where
    F: FnMut(&[usize]),
{
    if n > 8 {
        return Err(OrderError::TooLarge(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        f(&order);
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| order[i] < order[i + 1]) else {
            return Ok(());
        };
        let j = (i + 1..n).rev().find(|&j| order[j] > order[i]).unwrap();
        order.swap(i, j);
        order[i + 1..].reverse();
    }
}

/// Minimum fill over all `n!` elimination orders; brute-force oracle.
pub fn min_fill_exhaustive(p: &SparsePattern) -> Result<usize, OrderError> {
    let n = p.n();
    if n > 8 {
        return Err(OrderError::TooLarge(n));
    }
    let mut best = usize::MAX;
    for_each_elimination_order(n, |order| {
        let perm = Permutation::from_order(order.to_vec()).unwrap();
        let fill = symbolic_fill_count(p, &perm).unwrap();
        best = best.min(fill);
    })?;
    Ok(if n == 0 { 0 } else { best })
}
