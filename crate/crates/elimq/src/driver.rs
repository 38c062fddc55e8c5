//! The unified solve loop: ordering, factorization, scheduled-solve
//! simulation and reporting, plus the deterministic corpus generator
//! used for offline training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordering::{
    greedy_order, symbolic_fill_count, OrderError, OrderingAction, OrderingResult, OrderingStep,
};
use crate::pivoting::{factorize, FactorResult, PivotAction, PivotError, PivotStrategy};
use crate::qlearn::{Domain, Policy, QError};
use crate::scheduling::{
    dag_from_etree, reward, simulate, DispatchRule, MachineModel, RewardWeights, SchedError,
    Schedule, SchedulerAction,
};
use crate::sparse::{Permutation, SparseError, SparseMatrix, SparsePattern};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("unknown matrix family: {0}")]
    UnknownFamily(String),
    #[error("policy domain {got:?} cannot drive the {expected:?} phase")]
    PolicyDomainMismatch { expected: Domain, got: Domain },
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Pivot(#[from] PivotError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Q(#[from] QError),
}

/// How the ordering phase picks its permutation.
pub enum OrderingStrategy<'a> {
    Fixed(OrderingAction),
    Learned(&'a Policy),
    /// Bypass: use this permutation directly.
    Forced(Permutation),
}

/// How the scheduling phase dispatches tasks.
pub enum SchedulingStrategy<'a> {
    Fixed(SchedulerAction),
    Learned(&'a Policy),
}

/// Per-phase strategies for one solver run.
pub struct SolverStrategies<'a> {
    pub ordering: OrderingStrategy<'a>,
    pub pivoting: PivotStrategy<'a>,
    pub scheduling: SchedulingStrategy<'a>,
}

impl Default for SolverStrategies<'_> {
    fn default() -> Self {
        Self {
            ordering: OrderingStrategy::Fixed(OrderingAction::Md),
            pivoting: PivotStrategy::Fixed(PivotAction::Pp),
            scheduling: SchedulingStrategy::Fixed(SchedulerAction::Time),
        }
    }
}

/// Per-domain episode rewards of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRewards {
    /// `-total_fill`
    pub ordering: f64,
    /// `-rho`
    pub pivoting: f64,
    /// Weighted metric sum, negated.
    pub scheduling: f64,
}

/// Full report of one end-to-end solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub input_id: String,
    pub n: usize,
    pub nnz: usize,
    pub seed: u64,
    pub ordering: OrderingResult,
    pub factor: FactorResult<f64>,
    pub schedule: Schedule,
    pub rewards: RunRewards,
    /// Relative residual of the solve against the original matrix.
    pub residual: f64,
    pub solution: Vec<f64>,
    /// Wall-clock seconds; omitted by default so reports stay
    /// byte-deterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<f64>,
}

/// Replays a forced permutation, logging MD scores of each choice.
fn replay_forced(p: &SparsePattern, perm: &Permutation) -> Result<OrderingResult, OrderError> {
    let mut g = crate::ordering::EliminationGraph::from_pattern(p);
    let mut step_log = Vec::with_capacity(p.n());
    let mut total_fill = 0;
    for step in 1..=p.n() {
        let node = perm.inverse(step - 1);
        let score = g.metric_score(node, OrderingAction::Md)?;
        let fill = g.eliminate_node(node)?;
        total_fill += fill;
        step_log.push(OrderingStep { step, node, action: OrderingAction::Md, score, fill });
    }
    Ok(OrderingResult { perm: perm.clone(), total_fill, step_log })
}

/// Runs ordering, pivoted factorization, scheduled-solve simulation and
/// the triangular solve, and assembles the report.
pub fn run_solver(
    m: &SparseMatrix<f64>,
    input_id: &str,
    strategies: &SolverStrategies<'_>,
    machine: &MachineModel,
    weights: &RewardWeights,
    b: &[f64],
    seed: u64,
) -> Result<SolverRun, DriverError> {
    let n = m.n();
    assert_eq!(b.len(), n, "right-hand side length");

    // phase 1: fill-reducing ordering
    let ordering = match &strategies.ordering {
        OrderingStrategy::Fixed(a) => greedy_order(m.pattern(), *a),
        OrderingStrategy::Learned(pol) => crate::ordering::adaptive_order(m.pattern(), pol)?,
        OrderingStrategy::Forced(perm) => replay_forced(m.pattern(), perm)?,
    };

    // phase 2: numeric factorization of the permuted matrix
    let permuted = m.permute(&ordering.perm)?;
    let factor = match &strategies.pivoting {
        PivotStrategy::Fixed(a) => factorize(&permuted, PivotStrategy::Fixed(*a))?,
        PivotStrategy::FixedWithFallback(a) => {
            factorize(&permuted, PivotStrategy::FixedWithFallback(*a))?
        }
        PivotStrategy::Learned(pol) => factorize(&permuted, PivotStrategy::Learned(pol))?,
    };

    // phase 3: scheduled execution of the frontal task DAG
    let dag = dag_from_etree(m.pattern(), &ordering.perm)?;
    let schedule = match &strategies.scheduling {
        SchedulingStrategy::Fixed(a) => simulate(&dag, machine, DispatchRule::Fixed(*a), seed)?,
        SchedulingStrategy::Learned(pol) => {
            simulate(&dag, machine, DispatchRule::Learned(pol), seed)?
        }
    };

    // phase 4: solve against the original matrix
    let mut b_perm = vec![0.0; n];
    for i in 0..n {
        b_perm[ordering.perm.forward(i)] = b[i];
    }
    let y = factor.solve(&b_perm)?;
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[i] = y[ordering.perm.forward(i)];
    }
    let ax = m.mul_vec(&x);
    let num = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    let den = m.norm_inf() * x.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let residual = if den > 0.0 { num / den } else { num };

    let rho = factor.rho()?;
    let rewards = RunRewards {
        ordering: -(ordering.total_fill as f64),
        pivoting: -rho,
        scheduling: reward(&schedule.metrics, weights),
    };

    Ok(SolverRun {
        input_id: input_id.to_string(),
        n,
        nnz: m.nnz(),
        seed,
        ordering,
        factor,
        schedule,
        rewards,
        residual,
        solution: x,
        timing: None,
    })
}

// ---------------------------------------------------------------------------
// Corpus generation

/// Structural family of a generated matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilySpec {
    Path { n: usize },
    Star { n: usize },
    Grid2d { rows: usize, cols: usize },
    Tridiagonal { n: usize },
    Arrow { n: usize },
    Random { n: usize, p: f64 },
}

impl FamilySpec {
    /// Parses descriptors like `path:5`, `grid2d:3x3`, `random:10:0.3`.
    pub fn parse(text: &str) -> Result<Self, DriverError> {
        let parts: Vec<&str> = text.split(':').collect();
        let unknown = || DriverError::UnknownFamily(text.to_string());
        let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
        match parts.as_slice() {
            ["path", n] => Ok(FamilySpec::Path { n: num(n)? }),
            ["star", n] => Ok(FamilySpec::Star { n: num(n)? }),
            ["grid2d", dims] => {
                let (r, c) = dims.split_once('x').ok_or_else(unknown)?;
                Ok(FamilySpec::Grid2d { rows: num(r)?, cols: num(c)? })
            }
            ["tridiagonal", n] | ["tridiag", n] => Ok(FamilySpec::Tridiagonal { n: num(n)? }),
            ["arrow", n] => Ok(FamilySpec::Arrow { n: num(n)? }),
            ["random", n, p] => {
                let p: f64 = p.parse().map_err(|_| unknown())?;
                Ok(FamilySpec::Random { n: num(n)?, p })
            }
            _ => Err(unknown()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FamilySpec::Path { n } => format!("path{n}"),
            FamilySpec::Star { n } => format!("star{n}"),
            FamilySpec::Grid2d { rows, cols } => format!("grid2d{rows}x{cols}"),
            FamilySpec::Tridiagonal { n } => format!("tridiag{n}"),
            FamilySpec::Arrow { n } => format!("arrow{n}"),
            FamilySpec::Random { n, p } => format!("random{n}p{p}"),
        }
    }

    /// Symmetric structural pattern of the family, diagonal included.
    pub fn pattern(&self, rng: &mut ChaCha8Rng) -> SparsePattern {
        match *self {
            FamilySpec::Path { n } | FamilySpec::Tridiagonal { n } => {
                let mut e: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                for i in 0..n.saturating_sub(1) {
                    e.push((i, i + 1));
                    e.push((i + 1, i));
                }
                SparsePattern::new(n, e).expect("valid family pattern")
            }
            FamilySpec::Star { n } => {
                let mut e: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                for i in 1..n {
                    e.push((0, i));
                    e.push((i, 0));
                }
                SparsePattern::new(n, e).expect("valid family pattern")
            }
            FamilySpec::Grid2d { rows, cols } => {
                let n = rows * cols;
                let idx = |r: usize, c: usize| r * cols + c;
                let mut e: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            e.push((idx(r, c), idx(r, c + 1)));
                            e.push((idx(r, c + 1), idx(r, c)));
                        }
                        if r + 1 < rows {
                            e.push((idx(r, c), idx(r + 1, c)));
                            e.push((idx(r + 1, c), idx(r, c)));
                        }
                    }
                }
                SparsePattern::new(n, e).expect("valid family pattern")
            }
            FamilySpec::Arrow { n } => {
                let mut e: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                for i in 1..n {
                    e.push((0, i));
                    e.push((i, 0));
                }
                SparsePattern::new(n, e).expect("valid family pattern")
            }
            FamilySpec::Random { n, p } => {
                let mut e: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.gen::<f64>() < p {
                            e.push((i, j));
                            e.push((j, i));
                        }
                    }
                }
                SparsePattern::new(n, e).expect("valid family pattern")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMatrix {
    pub id: String,
    pub matrix: SparseMatrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusOptions {
    /// When set, diagonal entries dominate their row's absolute sum.
    pub diagonally_dominant: bool,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self { diagonally_dominant: true }
    }
}

/// Deterministic corpus: each family member gets its own stream derived
/// from (seed, index), so the corpus does not change when families are
/// appended.
pub fn generate_corpus(
    specs: &[FamilySpec],
    seed: u64,
    opts: &CorpusOptions,
) -> Vec<CorpusMatrix> {
    specs
        .iter()
        .enumerate()
        .map(|(idx, spec)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let pattern = spec.pattern(&mut rng);
            let n = pattern.n();
            let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(pattern.nnz());
            let mut row_sums = vec![0.0f64; n];
            for &(r, c) in pattern.entries() {
                if r != c {
                    let v = rng.gen_range(-1.0..1.0);
                    triplets.push((r, c, v));
                    row_sums[r] += v.abs();
                }
            }
            for i in 0..n {
                let diag = if opts.diagonally_dominant {
                    row_sums[i] + 1.0
                } else {
                    rng.gen_range(0.5..1.5)
                };
                triplets.push((i, i, diag));
            }
            let matrix = SparseMatrix::from_triplets(n, triplets).expect("valid corpus matrix");
            CorpusMatrix { id: format!("{}-{idx}", spec.label()), matrix }
        })
        .collect()
}

/// Consistency check used by tests and the bench command: the recorded
/// rewards must match recomputation from the raw logs, including a fill
/// recount against the original matrix.
pub fn rewards_consistent_with(
    run: &SolverRun,
    m: &SparseMatrix<f64>,
    weights: &RewardWeights,
) -> bool {
    let fill_ok = run.rewards.ordering == -(run.ordering.total_fill as f64);
    let rho_ok = match run.factor.rho() {
        Ok(rho) => (run.rewards.pivoting + rho).abs() < 1e-12,
        Err(_) => false,
    };
    let sched_ok =
        (run.rewards.scheduling - reward(&run.schedule.metrics, weights)).abs() < 1e-12;
    let fill_recount = symbolic_fill_count(m.pattern(), &run.ordering.perm)
        .map(|f| f == run.ordering.total_fill)
        .unwrap_or(false);
    fill_ok && rho_ok && sched_ok && fill_recount
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_run() {
        let m: SparseMatrix<f64> = SparseMatrix::identity(4);
        let machine = MachineModel::uniform(2, 1.0, 0.0);
        let weights = RewardWeights::makespan_only();
        let run = run_solver(
            &m,
            "identity4",
            &SolverStrategies::default(),
            &machine,
            &weights,
            &[1.0; 4],
            0,
        )
        .unwrap();
        assert_eq!(run.ordering.total_fill, 0);
        assert_eq!(run.factor.rho().unwrap(), 1.0);
        assert_eq!(run.solution, vec![1.0; 4]);
        assert!(rewards_consistent_with(&run, &m, &weights));
    }

    #[test]
    fn tridiagonal_run_residual_small() {
        let corpus = generate_corpus(
            &[FamilySpec::Tridiagonal { n: 6 }],
            7,
            &CorpusOptions::default(),
        );
        let m = &corpus[0].matrix;
        let machine = MachineModel::uniform(2, 1.0, 0.0);
        let weights = RewardWeights::makespan_only();
        let b = m.mul_vec(&vec![1.0; 6]);
        let run = run_solver(
            m,
            &corpus[0].id,
            &SolverStrategies::default(),
            &machine,
            &weights,
            &b,
            0,
        )
        .unwrap();
        assert_eq!(run.ordering.total_fill, 0);
        assert_eq!(run.schedule.metrics.comm_volume, run.schedule.metrics.comm_volume);
        assert!(run.residual <= 1e-10, "residual {}", run.residual);
    }

    #[test]
    fn forced_hub_first_vs_md() {
        let corpus =
            generate_corpus(&[FamilySpec::Arrow { n: 5 }], 3, &CorpusOptions::default());
        let m = &corpus[0].matrix;
        let machine = MachineModel::uniform(1, 1.0, 0.0);
        let weights = RewardWeights::makespan_only();
        let b = m.mul_vec(&vec![1.0; 5]);
        let hub_first = run_solver(
            m,
            "arrow-hub-first",
            &SolverStrategies {
                ordering: OrderingStrategy::Forced(Permutation::identity(5)),
                ..SolverStrategies::default()
            },
            &machine,
            &weights,
            &b,
            0,
        )
        .unwrap();
        let md = run_solver(
            m,
            "arrow-md",
            &SolverStrategies::default(),
            &machine,
            &weights,
            &b,
            0,
        )
        .unwrap();
        assert_eq!(hub_first.ordering.total_fill, 6);
        assert_eq!(md.ordering.total_fill, 0);
    }

    #[test]
    fn family_parsing() {
        assert_eq!(FamilySpec::parse("path:5").unwrap(), FamilySpec::Path { n: 5 });
        assert_eq!(
            FamilySpec::parse("grid2d:3x3").unwrap(),
            FamilySpec::Grid2d { rows: 3, cols: 3 }
        );
        assert_eq!(
            FamilySpec::parse("random:10:0.3").unwrap(),
            FamilySpec::Random { n: 10, p: 0.3 }
        );
        assert!(matches!(FamilySpec::parse("moebius:9"), Err(DriverError::UnknownFamily(_))));
    }

    #[test]
    fn corpus_shapes() {
        let corpus = generate_corpus(
            &[FamilySpec::Path { n: 5 }, FamilySpec::Grid2d { rows: 3, cols: 3 }],
            0,
            &CorpusOptions::default(),
        );
        // path has n-1 undirected edges
        assert_eq!(corpus[0].matrix.pattern().symmetrize().nnz() / 2, 4);
        // 3x3 grid has 12 edges
        assert_eq!(corpus[1].matrix.pattern().symmetrize().nnz() / 2, 12);
    }

    #[test]
    fn corpus_is_deterministic() {
        let spec = [FamilySpec::Random { n: 10, p: 0.3 }];
        let a = generate_corpus(&spec, 7, &CorpusOptions::default());
        let b = generate_corpus(&spec, 7, &CorpusOptions::default());
        assert_eq!(a, b);
        let c = generate_corpus(&spec, 8, &CorpusOptions::default());
        assert_ne!(a, c);
    }
}
