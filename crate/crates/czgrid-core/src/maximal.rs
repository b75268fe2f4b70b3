//! Dyadic maximal operators and the Calderón–Zygmund decomposition on window
//! step functions.
//!
//! A step function on a window is implicitly extended by zero to the rest of
//! the space.  The dyadic maximal function at a point is the supremum of the
//! averages of |f| over all grid sets containing it; on a grid-anchored window
//! this is an exact finite computation, because the in-window part is a tree
//! walk and the averages over ancestors of the window root decrease strictly
//! once the root is left behind.  The sharp function replaces averages of |f|
//! by mean oscillations and its climb terminates through the bound
//! osc(A) ≤ 2∫|f|/ρ(A).
//!
//! On top of the two operators sit the level-set covering (maximal disjoint
//! grid sets filling {M f > α} exactly), the decomposition f = g + Σ bᵢ it
//! induces, and the seeded randomized checks the CLI drives: the weak-(1,1)
//! ratio, maximal-vs-sharp norm ratios, and good-λ style distributional
//! comparisons.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::czset::{CzBox, CzSet};
use crate::geometry::Point;
use crate::grid::{Grid, GridError, Half, SetId};
use crate::stepfn::{StepFn, Window, WindowError};

const REL_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MaximalError {
    #[error("threshold must be a positive finite number, got {alpha}")]
    Threshold { alpha: f64 },
    #[error("anchor id {id} resolves to {set}, which is not the window root {window}")]
    AnchorMismatch { id: String, set: String, window: String },
    #[error(
        "the level set at threshold {alpha} reaches the top of the built chain; \
         rebuild the grid with a larger max level to cover it"
    )]
    Horizon { alpha: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// Pins a window to its position in a grid, so suprema can range over the
/// ancestors of the window root as well as the window's own nodes.
pub struct Anchor<'a> {
    grid: &'a Grid,
    root: SetId,
}

impl<'a> Anchor<'a> {
    /// Fails if `root` does not resolve to exactly the window root set.
    pub fn new(grid: &'a Grid, root: SetId, w: &Window) -> Result<Anchor<'a>, MaximalError> {
        let set = grid.resolve(&root)?;
        if set != *w.root() {
            return Err(MaximalError::AnchorMismatch {
                id: root.to_string(),
                set: set.canonical(),
                window: w.root().canonical(),
            });
        }
        Ok(Anchor { grid, root })
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn root_id(&self) -> &SetId {
        &self.root
    }

    /// Best average of |f| over ancestors strictly above the window root.
    /// The climb stops once ρ(ancestor) > ∫|f| / best-so-far, since no larger
    /// set can then improve on the best.
    fn best_above_average(&self, l1: f64) -> Result<f64, MaximalError> {
        if l1 <= 0.0 {
            return Ok(0.0);
        }
        let mut best = 0.0f64;
        let mut id = self.root.clone();
        loop {
            match self.grid.parent_id(&id) {
                Err(GridError::AboveTop { .. }) => return Ok(best),
                Err(e) => return Err(e.into()),
                Ok(pid) => {
                    let rho = self.grid.resolve(&pid)?.measure();
                    if best > 0.0 && rho > l1 / best {
                        return Ok(best);
                    }
                    best = best.max(l1 / rho);
                    id = pid;
                }
            }
        }
    }

    /// Best mean oscillation of f over ancestors strictly above the window
    /// root, using ∫_A |f − f_A| = ∫_w |f − f_A| + (ρ(A) − ρ(w)) |f_A| for the
    /// zero extension.  Stops once 2∫|f|/ρ(A) falls below the best so far.
    fn best_above_oscillation(
        &self,
        w: &Window,
        f: &StepFn,
        int0: f64,
        l1: f64,
    ) -> Result<f64, MaximalError> {
        if l1 <= 0.0 {
            return Ok(0.0);
        }
        let rho_w = w.measure();
        let mut best = 0.0f64;
        let mut id = self.root.clone();
        loop {
            match self.grid.parent_id(&id) {
                Err(GridError::AboveTop { .. }) => return Ok(best),
                Err(e) => return Err(e.into()),
                Ok(pid) => {
                    let rho = self.grid.resolve(&pid)?.measure();
                    if best > 0.0 && 2.0 * l1 / rho < best {
                        return Ok(best);
                    }
                    let mean = int0 / rho;
                    let dev: f64 = (0..w.cell_count())
                        .map(|c| (f.values[c] - mean).abs() * w.cell_measure(c))
                        .sum();
                    best = best.max((dev + (rho - rho_w) * mean.abs()) / rho);
                    id = pid;
                }
            }
        }
    }
}

/// Per-cell maximum of `node_values` along each cell's ancestor chain.
fn cell_chain_max(w: &Window, node_values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.cell_count()];
    let mut stack = vec![(0usize, f64::NEG_INFINITY)];
    while let Some((i, carried)) = stack.pop() {
        let m = carried.max(node_values[i]);
        let node = w.node(i);
        if node.is_leaf() {
            out[node.cells.start] = m;
        } else {
            for &c in &node.children {
                stack.push((c, m));
            }
        }
    }
    out
}

/// Exact dyadic maximal function of the zero-extended step function, one value
/// per base cell.  With an anchor the supremum also ranges over the ancestors
/// of the window root; without one it stops at the root.
pub fn dyadic_maximal(
    w: &Window,
    f: &StepFn,
    anchor: Option<&Anchor>,
) -> Result<StepFn, MaximalError> {
    let absint = w.node_integrals(f, f64::abs);
    let avgs: Vec<f64> =
        (0..w.nodes().len()).map(|i| absint[i] / w.node(i).set.measure()).collect();
    let mut vals = cell_chain_max(w, &avgs);
    if let Some(a) = anchor {
        let above = a.best_above_average(absint[0])?;
        for v in &mut vals {
            if above > *v {
                *v = above;
            }
        }
    }
    Ok(StepFn::from_values(w, vals))
}

/// The dyadic maximal function evaluated at an arbitrary point, including
/// points outside the window (where only ancestors of the root contribute)
/// and points no grid set reaches (value 0).
pub fn dyadic_maximal_at(
    w: &Window,
    f: &StepFn,
    anchor: Option<&Anchor>,
    p: &Point,
) -> Result<f64, MaximalError> {
    if let Some(c) = w.locate_cell(p) {
        return Ok(dyadic_maximal(w, f, anchor)?.values[c]);
    }
    let Some(a) = anchor else { return Ok(0.0) };
    let l1 = f.l1_norm(w);
    if l1 <= 0.0 {
        return Ok(0.0);
    }
    // The smallest ancestor containing p dominates all larger ones.
    let mut id = a.root.clone();
    loop {
        match a.grid.parent_id(&id) {
            Err(GridError::AboveTop { .. }) => return Ok(0.0),
            Err(e) => return Err(e.into()),
            Ok(pid) => {
                let set = a.grid.resolve(&pid)?;
                if set.contains(p) {
                    return Ok(l1 / set.measure());
                }
                id = pid;
            }
        }
    }
}

/// Exact dyadic sharp function: per base cell, the largest mean oscillation
/// (1/ρ(R)) ∫_R |f − f_R| over grid sets R containing the cell.
pub fn dyadic_sharp(
    w: &Window,
    f: &StepFn,
    anchor: Option<&Anchor>,
) -> Result<StepFn, MaximalError> {
    let ints = w.node_integrals(f, |v| v);
    let mut osc = vec![0.0; w.nodes().len()];
    for (i, o) in osc.iter_mut().enumerate() {
        let node = w.node(i);
        let rho = node.set.measure();
        let mean = ints[i] / rho;
        let dev: f64 = node
            .cells
            .clone()
            .map(|c| (f.values[c] - mean).abs() * w.cell_measure(c))
            .sum();
        *o = dev / rho;
    }
    let mut vals = cell_chain_max(w, &osc);
    if let Some(a) = anchor {
        let above = a.best_above_oscillation(w, f, ints[0], f.l1_norm(w))?;
        for v in &mut vals {
            if above > *v {
                *v = above;
            }
        }
    }
    Ok(StepFn::from_values(w, vals))
}

/// Maximal operator restricted to an explicit family of admissible boxes:
/// per base cell, the best average of |f| over family members containing the
/// cell center, floored by the cell's own value.
pub fn restricted_maximal(w: &Window, f: &StepFn, family: &[CzBox]) -> StepFn {
    let fabs = StepFn::from_values(w, f.values.iter().map(|v| v.abs()).collect());
    let avgs: Vec<f64> =
        family.iter().map(|b| w.box_integral(&fabs, b) / b.measure()).collect();
    let vals = (0..w.cell_count())
        .map(|c| {
            let p = w.cell(c).center();
            let mut m = f.values[c].abs();
            for (b, &a) in family.iter().zip(&avgs) {
                if a > m && b.contains(&p) {
                    m = a;
                }
            }
            m
        })
        .collect();
    StepFn::from_values(w, vals)
}

/// [`restricted_maximal`] at an arbitrary point; useful for probing points the
/// window (and the grid) do not cover.
pub fn restricted_maximal_at(w: &Window, f: &StepFn, family: &[CzBox], p: &Point) -> f64 {
    let fabs = StepFn::from_values(w, f.values.iter().map(|v| v.abs()).collect());
    let mut m = w.locate_cell(p).map_or(0.0, |c| f.values[c].abs());
    for b in family {
        if b.contains(p) {
            m = m.max(w.box_integral(&fabs, b) / b.measure());
        }
    }
    m
}

/// One set of a level-set covering: either a window node or an ancestor of
/// the window root.
#[derive(Clone, Debug)]
pub enum CoverSet {
    Node(usize),
    Above { id: SetId, set: CzSet },
}

impl CoverSet {
    pub fn set<'a>(&'a self, w: &'a Window) -> &'a CzSet {
        match self {
            CoverSet::Node(i) => &w.node(*i).set,
            CoverSet::Above { set, .. } => set,
        }
    }
}

/// Maximal disjoint grid sets whose union is exactly {M f > α}.
#[derive(Clone, Debug)]
pub struct Covering {
    pub alpha: f64,
    pub sets: Vec<CoverSet>,
    pub averages: Vec<f64>,
    pub total_measure: f64,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// α < average ≤ factor·α on every covering set.
    pub fn sandwich_ok(&self, factor: f64) -> bool {
        self.averages
            .iter()
            .all(|&a| a > self.alpha && a <= factor * self.alpha * (1.0 + REL_TOL))
    }
}

/// Maximal grid sets with average of |f| above α.  Two cases: if even the
/// window root averages above α the covering is the single highest ancestor
/// still above it (averages strictly decrease up the chain); otherwise a
/// downward sweep collects the topmost over-threshold nodes.  Either way the
/// union equals {M f > α} exactly at base-cell resolution.
pub fn covering(
    w: &Window,
    f: &StepFn,
    alpha: f64,
    anchor: Option<&Anchor>,
) -> Result<Covering, MaximalError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(MaximalError::Threshold { alpha });
    }
    let absint = w.node_integrals(f, f64::abs);
    let l1 = absint[0];
    let root_rho = w.measure();
    if l1 / root_rho > alpha {
        let root_cover = Covering {
            alpha,
            sets: vec![CoverSet::Node(0)],
            averages: vec![l1 / root_rho],
            total_measure: root_rho,
        };
        let Some(a) = anchor else { return Ok(root_cover) };
        let mut id = a.root.clone();
        let mut above: Option<(SetId, CzSet)> = None;
        loop {
            match a.grid.parent_id(&id) {
                // Still above threshold at the built top: maximality cannot
                // be certified, so refuse rather than undercount.
                Err(GridError::AboveTop { .. }) => {
                    return Err(MaximalError::Horizon { alpha });
                }
                Err(e) => return Err(e.into()),
                Ok(pid) => {
                    let set = a.grid.resolve(&pid)?;
                    if l1 / set.measure() > alpha {
                        id = pid.clone();
                        above = Some((pid, set));
                    } else {
                        break;
                    }
                }
            }
        }
        return Ok(match above {
            None => root_cover,
            Some((id, set)) => {
                let rho = set.measure();
                Covering {
                    alpha,
                    sets: vec![CoverSet::Above { id, set }],
                    averages: vec![l1 / rho],
                    total_measure: rho,
                }
            }
        });
    }
    let mut sets = Vec::new();
    let mut averages = Vec::new();
    let mut total = 0.0;
    let mut stack: Vec<usize> = w.node(0).children.iter().rev().copied().collect();
    while let Some(i) = stack.pop() {
        let rho = w.node(i).set.measure();
        let avg = absint[i] / rho;
        if avg > alpha {
            sets.push(CoverSet::Node(i));
            averages.push(avg);
            total += rho;
        } else {
            for &c in w.node(i).children.iter().rev() {
                stack.push(c);
            }
        }
    }
    Ok(Covering { alpha, sets, averages, total_measure: total })
}

/// ρ{ M f > α } over the whole space (the covering's total measure).
pub fn maximal_distribution(
    w: &Window,
    f: &StepFn,
    alpha: f64,
    anchor: Option<&Anchor>,
) -> Result<f64, MaximalError> {
    Ok(covering(w, f, alpha, anchor)?.total_measure)
}

/// f = good + Σ bᵢ at threshold α.  When the covering climbs above the window
/// root the window is enlarged to the covering set first (`enlarged` is set
/// and `window`/`f` are the rebuilt pair); each bad part is supported on one
/// covering set, carried here by its node index in `window`.
#[derive(Clone, Debug)]
pub struct CzDecomposition {
    pub alpha: f64,
    pub window: Window,
    pub f: StepFn,
    pub good: StepFn,
    pub bad: Vec<(StepFn, usize)>,
    pub averages: Vec<f64>,
    pub support_measure: f64,
    pub enlarged: bool,
}

/// Verification summary for one decomposition; `passed` requires exact
/// reconstruction and mean-zero bad parts to 1e-12, |good| ≤ factor·α,
/// disjoint supports, and Σρ(Rᵢ) ≤ ∫|f|/α.
#[derive(Clone, Debug)]
pub struct DecompReport {
    pub identity_err: f64,
    pub mean_err: f64,
    pub good_sup: f64,
    pub good_bound: f64,
    pub support_measure: f64,
    pub support_bound: f64,
    pub sandwich_ok: bool,
    pub disjoint: bool,
    pub passed: bool,
}

pub fn cz_decompose(
    w: &Window,
    f: &StepFn,
    alpha: f64,
    anchor: Option<&Anchor>,
) -> Result<CzDecomposition, MaximalError> {
    let cov = covering(w, f, alpha, anchor)?;
    if let Some(CoverSet::Above { id, .. }) = cov.sets.first() {
        let a = anchor.expect("an above-root covering set implies an anchor");
        let mut path = vec![a.root.clone()];
        while path.last() != Some(id) {
            path.push(a.grid.parent_id(path.last().unwrap())?);
        }
        path.reverse();
        let (w2, f2, _graft) = Window::enlarged(a.grid, &path, w, f)?;
        let mean = w2.integral(&f2) / w2.measure();
        let good = StepFn::constant(&w2, mean);
        let b = StepFn::from_values(&w2, f2.values.iter().map(|v| v - mean).collect());
        return Ok(CzDecomposition {
            alpha,
            window: w2,
            f: f2,
            good,
            bad: vec![(b, 0)],
            averages: cov.averages,
            support_measure: cov.total_measure,
            enlarged: true,
        });
    }
    let ints = w.node_integrals(f, |v| v);
    let mut good = f.clone();
    let mut bad = Vec::with_capacity(cov.sets.len());
    for cs in &cov.sets {
        let CoverSet::Node(i) = cs else { unreachable!("in-window covering") };
        let node = w.node(*i);
        let mean = ints[*i] / node.set.measure();
        let mut b = vec![0.0; w.cell_count()];
        for c in node.cells.clone() {
            b[c] = f.values[c] - mean;
            good.values[c] = mean;
        }
        bad.push((StepFn::from_values(w, b), *i));
    }
    Ok(CzDecomposition {
        alpha,
        window: w.clone(),
        f: f.clone(),
        good,
        bad,
        averages: cov.averages,
        support_measure: cov.total_measure,
        enlarged: false,
    })
}

impl CzDecomposition {
    pub fn verify(&self, factor: f64) -> DecompReport {
        let w = &self.window;
        let scale = self.f.sup_norm().max(1.0);
        let mut identity_err = 0.0f64;
        for c in 0..w.cell_count() {
            let mut s = self.good.values[c];
            for (b, _) in &self.bad {
                s += b.values[c];
            }
            identity_err = identity_err.max((self.f.values[c] - s).abs() / scale);
        }
        let mut mean_err = 0.0f64;
        for (b, _) in &self.bad {
            mean_err = mean_err.max(w.integral(b).abs() / b.l1_norm(w).max(1.0));
        }
        let good_sup = self.good.sup_norm();
        let good_bound = factor * self.alpha;
        let support_bound = self.f.l1_norm(w) / self.alpha;
        let mut disjoint = true;
        for (i, (_, ni)) in self.bad.iter().enumerate() {
            let bi = w.node(*ni).set.as_box();
            for (_, nj) in &self.bad[i + 1..] {
                if !bi.disjoint_from(&w.node(*nj).set.as_box()) {
                    disjoint = false;
                }
            }
        }
        let sandwich_ok = self
            .averages
            .iter()
            .all(|&a| a > self.alpha && a <= good_bound * (1.0 + REL_TOL));
        let passed = identity_err <= REL_TOL
            && mean_err <= REL_TOL
            && good_sup <= good_bound * (1.0 + REL_TOL)
            && self.support_measure <= support_bound * (1.0 + REL_TOL)
            && sandwich_ok
            && disjoint;
        DecompReport {
            identity_err,
            mean_err,
            good_sup,
            good_bound,
            support_measure: self.support_measure,
            support_bound,
            sandwich_ok,
            disjoint,
            passed,
        }
    }
}

/// Draws grid-anchored windows and sparse data for the randomized checks.
/// With `upper_only` every parent step above the root has measure ratio 2 or
/// 2ⁿ, so the covering averages obey the 2ⁿ·α bound; lower-half chains cross
/// ratio-3 junctions and need the weaker factor 3 (see the junction test).
#[derive(Clone, Debug)]
pub struct WindowSampler {
    pub upper_only: bool,
    pub depth: RangeInclusive<u32>,
    pub keep: f64,
}

impl Default for WindowSampler {
    fn default() -> WindowSampler {
        WindowSampler { upper_only: false, depth: 2..=4, keep: 0.7 }
    }
}

fn random_point_in<R: Rng>(s: &CzSet, rng: &mut R) -> Point {
    let x = (0..s.dim()).map(|d| rng.gen_range(s.cube.lo(d)..s.cube.hi(d))).collect();
    Point::new(x, rng.gen_range(s.t_lo()..s.t_hi()))
}

impl WindowSampler {
    pub fn sample<R: Rng>(&self, grid: &Grid, rng: &mut R) -> (SetId, Window) {
        let half = if self.upper_only || rng.gen_bool(0.5) { Half::Upper } else { Half::Lower };
        let level: i64 = rng.gen_range(1..=3);
        // Probe inside the chain entry two strips up, so the root and its
        // window sit strictly inside the covered region.
        let strip = (((level + 2) as u32).max(2)).min(grid.top(half));
        let entry = &grid.chain(half)[strip as usize].set;
        let p = random_point_in(entry, rng);
        let root = grid.locate(&p, level).expect("probe lies in the covered region");
        let cap = match grid.dim() {
            1 => 5,
            2 => 3,
            _ => 2,
        };
        let depth = rng.gen_range(self.depth.clone()).min(cap);
        let w = Window::from_grid(grid, &root, depth).expect("grid windows build");
        (root, w)
    }

    pub fn sample_fn<R: Rng>(&self, w: &Window, rng: &mut R) -> StepFn {
        StepFn::random_sparse(rng, w, -1.0, 1.0, self.keep)
    }
}

/// One record of a randomized check: the trial index, the swept parameter
/// (a threshold α or an exponent p), and the measured value.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaximalRecord {
    pub seed: u64,
    pub trial: u32,
    pub param: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SummaryStat {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaximalReport {
    pub experiment: String,
    pub seed: u64,
    pub trials: u32,
    pub skipped: u32,
    pub failures: u32,
    pub records: Vec<MaximalRecord>,
    pub summary: Vec<SummaryStat>,
}

/// Weak-(1,1) ratio α·ρ{M f > α}/‖f‖₁ over random windows and thresholds.
/// Each set in the covering averages strictly above α, so every recorded
/// value is < 1; the summary carries the sup.  A fixed seed reproduces the
/// run, and a longer run with the same seed extends it trial for trial.
pub fn check_weak11(
    grid: &Grid,
    seed: u64,
    trials: u32,
    alphas: &[f64],
) -> Result<MaximalReport, MaximalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = WindowSampler::default();
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut sup = 0.0f64;
    for trial in 0..trials {
        let (root, w) = sampler.sample(grid, &mut rng);
        let f = sampler.sample_fn(&w, &mut rng);
        let l1 = f.l1_norm(&w);
        if l1 <= 0.0 {
            skipped += 1;
            continue;
        }
        let anchor = Anchor::new(grid, root, &w)?;
        for &alpha in alphas {
            let dist = maximal_distribution(&w, &f, alpha, Some(&anchor))?;
            let value = alpha * dist / l1;
            sup = sup.max(value);
            records.push(MaximalRecord { seed, trial, param: alpha, value });
        }
    }
    Ok(MaximalReport {
        experiment: "weak11".into(),
        seed,
        trials,
        skipped,
        failures: 0,
        records,
        summary: vec![SummaryStat { name: "sup_alpha_level_measure_over_l1".into(), value: sup }],
    })
}

/// Norm-ratio comparison ‖M f‖_p / ‖f♯‖_p over random windows, one summary
/// maximum per exponent.  Trials whose sharp function vanishes identically
/// (f constant on the window and negligible above it) are skipped and
/// counted.
pub fn check_fefferman_stein(
    grid: &Grid,
    seed: u64,
    trials: u32,
    ps: &[f64],
) -> Result<MaximalReport, MaximalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = WindowSampler::default();
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut sup: Vec<f64> = vec![0.0; ps.len()];
    for trial in 0..trials {
        let (root, w) = sampler.sample(grid, &mut rng);
        let f = sampler.sample_fn(&w, &mut rng);
        let anchor = Anchor::new(grid, root, &w)?;
        let m = dyadic_maximal(&w, &f, Some(&anchor))?;
        let s = dyadic_sharp(&w, &f, Some(&anchor))?;
        if s.sup_norm() == 0.0 {
            skipped += 1;
            continue;
        }
        for (j, &p) in ps.iter().enumerate() {
            let value = m.lp_norm(&w, p) / s.lp_norm(&w, p);
            sup[j] = sup[j].max(value);
            records.push(MaximalRecord { seed, trial, param: p, value });
        }
    }
    let summary = ps
        .iter()
        .zip(&sup)
        .map(|(p, &v)| SummaryStat { name: format!("A_hat_p_{p}"), value: v })
        .collect();
    Ok(MaximalReport {
        experiment: "fefferman_stein".into(),
        seed,
        trials,
        skipped,
        failures: 0,
        records,
        summary,
    })
}

/// Measures, at base-cell resolution, the pair
/// (ρ{M f > α, f♯ ≤ c·α}, ρ{M f > b·α}) for one function.
pub fn check_distributional(
    w: &Window,
    f: &StepFn,
    anchor: Option<&Anchor>,
    alpha: f64,
    b: f64,
    c: f64,
) -> Result<(f64, f64), MaximalError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(MaximalError::Threshold { alpha });
    }
    assert!(0.0 < b && b < 1.0, "b must lie in (0,1)");
    assert!(c > 0.0, "c must be positive");
    let m = dyadic_maximal(w, f, anchor)?;
    let s = dyadic_sharp(w, f, anchor)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for cell in 0..w.cell_count() {
        let rho = w.cell_measure(cell);
        if m.values[cell] > alpha && s.values[cell] <= c * alpha {
            lhs += rho;
        }
        if m.values[cell] > b * alpha {
            rhs += rho;
        }
    }
    Ok((lhs, rhs))
}

/// Sweeps [`check_distributional`] over random trials and thresholds and fits
/// the smallest K with lhs ≤ K·c/(1−b)·rhs across the sweep.  Recorded values
/// are the per-point K, i.e. lhs·(1−b)/(c·rhs), zero where both sides vanish.
pub fn distributional_sweep(
    grid: &Grid,
    seed: u64,
    trials: u32,
    alphas: &[f64],
    b: f64,
    c: f64,
) -> Result<MaximalReport, MaximalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = WindowSampler::default();
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut k_fit = 0.0f64;
    for trial in 0..trials {
        let (root, w) = sampler.sample(grid, &mut rng);
        let f = sampler.sample_fn(&w, &mut rng);
        if f.l1_norm(&w) <= 0.0 {
            skipped += 1;
            continue;
        }
        let anchor = Anchor::new(grid, root, &w)?;
        for &alpha in alphas {
            let (lhs, rhs) = check_distributional(&w, &f, Some(&anchor), alpha, b, c)?;
            let value = if rhs > 0.0 { lhs * (1.0 - b) / (c * rhs) } else { 0.0 };
            k_fit = k_fit.max(value);
            records.push(MaximalRecord { seed, trial, param: alpha, value });
        }
    }
    Ok(MaximalReport {
        experiment: "distributional".into(),
        seed,
        trials,
        skipped,
        failures: 0,
        records,
        summary: vec![
            SummaryStat { name: "K_fit".into(), value: k_fit },
            SummaryStat { name: "b".into(), value: b },
            SummaryStat { name: "c".into(), value: c },
        ],
    })
}

/// Runs the full decomposition over random upper-half windows and thresholds
/// and verifies every invariant with the 2ⁿ constant (valid there; see
/// [`WindowSampler`]).  Recorded values are ‖good‖_∞/α; `failures` counts
/// trials whose verification report did not pass.
pub fn check_cz_decompose(
    grid: &Grid,
    seed: u64,
    trials: u32,
    alphas: &[f64],
) -> Result<MaximalReport, MaximalError> {
    let factor = (1u32 << grid.dim()) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = WindowSampler { upper_only: true, ..WindowSampler::default() };
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (root, w) = sampler.sample(grid, &mut rng);
        let f = sampler.sample_fn(&w, &mut rng);
        if f.l1_norm(&w) <= 0.0 {
            skipped += 1;
            continue;
        }
        let anchor = Anchor::new(grid, root, &w)?;
        for &alpha in alphas {
            let d = cz_decompose(&w, &f, alpha, Some(&anchor))?;
            let rep = d.verify(factor);
            if !rep.passed {
                failures += 1;
            }
            let value = rep.good_sup / alpha;
            worst = worst.max(value);
            records.push(MaximalRecord { seed, trial, param: alpha, value });
        }
    }
    Ok(MaximalReport {
        experiment: "cz_decompose".into(),
        seed,
        trials,
        skipped,
        failures,
        records,
        summary: vec![SummaryStat { name: "max_good_sup_over_alpha".into(), value: worst }],
    })
}
