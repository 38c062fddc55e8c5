//! elimq: a desk-scale laboratory for sparse Gaussian elimination.
//!
//! The three hard combinatorial choices inside a sparse direct solver —
//! fill-reducing ordering, pivoting and task dispatch — are each exposed
//! as a per-step decision that can be made by a fixed strategy or by a
//! tabular Q-learning policy trained offline. Every learned policy is
//! checkable against brute-force oracles and fixed-strategy baselines.
//!
//! Modules:
//! - [`sparse`]: matrix storage, Matrix Market I/O, pattern algebra
//! - [`ordering`]: elimination-graph engine and ordering metrics
//! - [`pivoting`]: dense LU with pivot-strategy choice and growth tracking
//! - [`scheduling`]: task DAG, discrete-event simulator, makespan oracle
//! - [`qlearn`]: tabular Q-learning, featurization, persistence
//! - [`driver`]: the unified solve loop and corpus generator

pub mod driver;
pub mod ordering;
pub mod pivoting;
pub mod qlearn;
pub mod scalar;
pub mod scheduling;
pub mod sparse;

pub use scalar::Real;

/// Default working precision.
pub type Scalar = f64;

pub type SparseMatrix32 = sparse::SparseMatrix<f32>;
pub type SparseMatrix64 = sparse::SparseMatrix<f64>;
pub type DenseWorkingMatrix32 = sparse::DenseWorkingMatrix<f32>;
pub type DenseWorkingMatrix64 = sparse::DenseWorkingMatrix<f64>;
pub type FactorResult32 = pivoting::FactorResult<f32>;
pub type FactorResult64 = pivoting::FactorResult<f64>;
pub type GrowthTrace32 = pivoting::GrowthTrace<f32>;
pub type GrowthTrace64 = pivoting::GrowthTrace<f64>;
