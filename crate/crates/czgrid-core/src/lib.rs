//! Harmonic-analysis toolkit for the semidirect-product group S = Rⁿ ⋊ R
//! with multiplication (x, t)·(x′, t′) = (x + eᵗ x′, t + t′).
//!
//! The group carries a left-invariant Riemannian distance and a right Haar
//! measure of exponential volume growth, which breaks the classical doubling
//! machinery.  This crate implements the substitute combinatorics: a calculus
//! of admissible boxes ("CZ sets"), a global dyadic-like grid built from them,
//! exact dyadic maximal and sharp operators on step functions,
//! Calderón–Zygmund decompositions, and the atomic-H¹ vs dyadic-H¹
//! counterexample that separates the two theories.
//!
//! Modules:
//! * [`geometry`] — points, group law, metric, Monte Carlo ball measures.
//! * [`czset`] — admissible sets, splits, parents, dilations.
//! * [`grid`] — the two-chain global grid, set ids, structural verifier.
//! * [`stepfn`] — subdivision windows and exact step-function calculus.
//! * [`maximal`] — dyadic maximal/sharp operators, level-set coverings, the
//!   CZ decomposition, and the seeded randomized checks.
//! * [`hardy`] — atoms, dyadic BMO bounds, and the wall construction
//!   separating atomic from dyadic H¹.

pub mod czset;
pub mod geometry;
pub mod grid;
pub mod hardy;
pub mod maximal;
pub mod stepfn;

pub use czset::{CzBox, CzSet, DyadicCube, ParentKind};
pub use geometry::Point;
pub use grid::{Band, Grid, Half, SetId};
pub use hardy::{
    bmo_dyadic_lower, log_bmo_upper, run_counterexample, validate_atom, Atom, BmoInput,
    CounterexampleRecord, HardyError,
};
pub use maximal::{
    covering, cz_decompose, dyadic_maximal, dyadic_sharp, restricted_maximal, Anchor, CoverSet,
    Covering, CzDecomposition, MaximalError, MaximalRecord, MaximalReport, WindowSampler,
};
pub use stepfn::{StepFn, Window};
