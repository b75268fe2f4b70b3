//! Global dyadic-like grid on the group, assembled from two chains of nested
//! CZ sets.
//!
//! Each half-space carries an increasing chain E⁰ ⊂ E¹ ⊂ ⋯ of admissible
//! sets: the upper chain starts at [0,32)ⁿ × [0,2) and grows by horizontal
//! parents until the vertical side condition trips, then takes a vertical-up
//! parent; the lower chain starts at [0,4)ⁿ × [−2,0) and grows downward the
//! same way.  The complement E^{i+1} ∖ E^i of every step is a union of
//! admissible siblings, and canonical splits subdivide everything further
//! down.  The result is, for every level j (with the grid built high enough),
//! a partition of the covered region — the quadrant [0,∞)ⁿ in x, a growing
//! window in t — by admissible sets, nested across levels, with measure
//! ratios bounded above and below.
//!
//! Sets are addressed by [`SetId`]: a half, the chain strip the set hangs
//! off, chain/sibling band, the sibling cube cell, and a split path.  The
//! level of an id is `strip − path.len()`.

use std::collections::HashSet;
use std::fmt;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::czset::{CzBox, CzSet, DyadicCube, ParentKind};
use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Half {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Band {
    Chain,
    Sibling,
}

/// Address of a grid set.
///
/// Invariants: chain ids carry an empty `cell`; a chain id with a nonempty
/// split `path` roots at strip 0 (descents below the seed level).  Sibling
/// ids name the piece of E^{strip+1} ∖ E^{strip} by its cube `cell` at the
/// strip scale, then descend by `path`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct SetId {
    pub half: Half,
    pub strip: u32,
    pub band: Band,
    pub cell: Vec<i64>,
    pub path: Vec<u8>,
}

impl SetId {
    pub fn chain(half: Half, strip: u32) -> SetId {
        SetId { half, strip, band: Band::Chain, cell: Vec::new(), path: Vec::new() }
    }

    pub fn sibling(half: Half, strip: u32, cell: Vec<i64>) -> SetId {
        SetId { half, strip, band: Band::Sibling, cell, path: Vec::new() }
    }

    pub fn level(&self) -> i64 {
        self.strip as i64 - self.path.len() as i64
    }

    fn with_child(&self, c: u8) -> SetId {
        let mut id = self.clone();
        id.path.push(c);
        id
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = match self.half {
            Half::Upper => 'U',
            Half::Lower => 'L',
        };
        write!(f, "{h}{}", self.strip)?;
        match self.band {
            Band::Chain => write!(f, "C")?,
            Band::Sibling => {
                let cell: Vec<String> = self.cell.iter().map(|c| c.to_string()).collect();
                write!(f, "S@{}", cell.join(","))?;
            }
        }
        if !self.path.is_empty() {
            write!(f, ":")?;
            for p in &self.path {
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

/// One chain entry: the set E^i and the parent step taken from it (None at
/// the built top).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainEntry {
    pub set: CzSet,
    pub step: Option<ParentKind>,
}

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error(
        "point {point} lies outside the covered region ({hint}); extend the grid to reach it"
    )]
    Outside { point: String, hint: String },
    #[error(
        "level {level} is above the built top {top} of the {half:?} chain; \
         extend the grid with a larger max level"
    )]
    AboveTop { level: i64, top: i64, half: Half },
    #[error("invalid set id {id}: {reason}")]
    InvalidId { id: String, reason: String },
}

/// The built grid: both chains plus the build horizon.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    j_hi: i64,
    upper: Vec<ChainEntry>,
    lower: Vec<ChainEntry>,
}

fn build_chain(n: usize, half: Half, j_hi: i64) -> Vec<ChainEntry> {
    let seed = match half {
        Half::Upper => CzSet::new(DyadicCube::new(5, vec![0; n]), 1.0, 1.0),
        Half::Lower => CzSet::new(DyadicCube::new(2, vec![0; n]), -1.0, 1.0),
    };
    let mut entries = vec![ChainEntry { set: seed, step: None }];
    let floor = j_hi.max(0);
    let mut verticals_past = 0u32;
    loop {
        let i = entries.len() - 1;
        // Stop once the chain top clears the horizon with two vertical steps
        // beyond it, so every level ≤ j_hi sits strictly inside the top set.
        if i as i64 > j_hi && verticals_past >= 2 {
            break;
        }
        let cur = entries[i].set.clone();
        let kind = if cur.vertical_side_condition() {
            match half {
                Half::Upper => ParentKind::VerticalUp,
                Half::Lower => ParentKind::VerticalDown,
            }
        } else {
            ParentKind::Horizontal
        };
        let parent = cur.parent(kind).expect("chain entries satisfy a parent side condition");
        if kind != ParentKind::Horizontal && i as i64 >= floor {
            verticals_past += 1;
        }
        entries[i].step = Some(kind);
        entries.push(ChainEntry { set: parent.set, step: None });
    }
    entries
}

impl Grid {
    /// Builds both chains far enough to serve queries at levels ≤ `j_hi`.
    pub fn build(n: usize, j_hi: i64) -> Grid {
        assert!((1..=3).contains(&n), "supported dimensions are 1..=3");
        Grid {
            n,
            j_hi,
            upper: build_chain(n, Half::Upper, j_hi),
            lower: build_chain(n, Half::Lower, j_hi),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_level(&self) -> i64 {
        self.j_hi
    }

    pub fn chain(&self, half: Half) -> &[ChainEntry] {
        match half {
            Half::Upper => &self.upper,
            Half::Lower => &self.lower,
        }
    }

    /// Index of the topmost built chain entry.
    pub fn top(&self, half: Half) -> u32 {
        (self.chain(half).len() - 1) as u32
    }

    /// The full region covered by one half of the grid.
    pub fn covered_box(&self, half: Half) -> CzBox {
        self.chain(half).last().unwrap().set.as_box()
    }

    fn invalid(id: &SetId, reason: impl Into<String>) -> GridError {
        GridError::InvalidId { id: id.to_string(), reason: reason.into() }
    }

    /// Resolves an id to its concrete set, validating the id on the way.
    pub fn resolve(&self, id: &SetId) -> Result<CzSet, GridError> {
        let chain = self.chain(id.half);
        let top = (chain.len() - 1) as u32;
        if id.strip > top {
            return Err(GridError::AboveTop {
                level: id.strip as i64,
                top: top as i64,
                half: id.half,
            });
        }
        let entry = &chain[id.strip as usize];
        let base = match id.band {
            Band::Chain => {
                if !id.cell.is_empty() {
                    return Err(Self::invalid(id, "chain ids carry no cube cell"));
                }
                if !id.path.is_empty() && id.strip != 0 {
                    return Err(Self::invalid(id, "chain split paths root at strip 0"));
                }
                entry.set.clone()
            }
            Band::Sibling => {
                let step = entry
                    .step
                    .ok_or_else(|| Self::invalid(id, "no sibling strip at the chain top"))?;
                if id.cell.len() != self.n {
                    return Err(Self::invalid(id, "sibling cell dimension mismatch"));
                }
                let s = &entry.set;
                match step {
                    ParentKind::Horizontal => {
                        let ok = id.cell.iter().all(|&c| c == 0 || c == 1)
                            && id.cell.iter().any(|&c| c != 0);
                        if !ok {
                            return Err(Self::invalid(
                                id,
                                "horizontal sibling cell must be a nonzero 0/1 vector",
                            ));
                        }
                        CzSet::new(DyadicCube::new(s.cube.k, id.cell.clone()), s.t, s.r)
                    }
                    ParentKind::VerticalUp => {
                        if id.cell.iter().any(|&c| c != 0) {
                            return Err(Self::invalid(id, "vertical sibling cell must be zero"));
                        }
                        CzSet::new(s.cube.clone(), s.t + 2.0 * s.r, s.r)
                    }
                    ParentKind::VerticalDown => {
                        if id.cell.iter().any(|&c| c != 0) {
                            return Err(Self::invalid(id, "vertical sibling cell must be zero"));
                        }
                        CzSet::new(s.cube.clone(), s.t - 3.0 * s.r, 2.0 * s.r)
                    }
                }
            }
        };
        let mut cur = base;
        for &c in &id.path {
            let sp = cur
                .split()
                .map_err(|e| Self::invalid(id, format!("split failed on path replay: {e}")))?;
            cur = sp
                .children
                .get(c as usize)
                .cloned()
                .ok_or_else(|| Self::invalid(id, "path index out of child range"))?;
        }
        Ok(cur)
    }

    /// The level-(ℓ−1) children of a level-ℓ id, bottom-first / lexicographic.
    pub fn children(&self, id: &SetId) -> Result<Vec<SetId>, GridError> {
        if id.band == Band::Chain && id.path.is_empty() && id.strip > 0 {
            let s = id.strip - 1;
            let step = self.chain(id.half)[s as usize]
                .step
                .expect("interior chain entries have steps");
            return Ok(match step {
                ParentKind::Horizontal => (0..1usize << self.n)
                    .map(|i| {
                        let cell: Vec<i64> = (0..self.n)
                            .map(|d| ((i >> (self.n - 1 - d)) & 1) as i64)
                            .collect();
                        if cell.iter().all(|&c| c == 0) {
                            SetId::chain(id.half, s)
                        } else {
                            SetId::sibling(id.half, s, cell)
                        }
                    })
                    .collect(),
                ParentKind::VerticalUp => vec![
                    SetId::chain(id.half, s),
                    SetId::sibling(id.half, s, vec![0; self.n]),
                ],
                ParentKind::VerticalDown => vec![
                    SetId::sibling(id.half, s, vec![0; self.n]),
                    SetId::chain(id.half, s),
                ],
            });
        }
        let set = self.resolve(id)?;
        let sp = set
            .split()
            .map_err(|e| Self::invalid(id, format!("canonical split failed: {e}")))?;
        Ok((0..sp.children.len()).map(|c| id.with_child(c as u8)).collect())
    }

    /// The level-(ℓ+1) id containing a level-ℓ id.
    pub fn parent_id(&self, id: &SetId) -> Result<SetId, GridError> {
        if !id.path.is_empty() {
            let mut p = id.clone();
            p.path.pop();
            return Ok(p);
        }
        match id.band {
            Band::Chain => {
                let top = self.top(id.half);
                if id.strip >= top {
                    Err(GridError::AboveTop {
                        level: id.strip as i64 + 1,
                        top: top as i64,
                        half: id.half,
                    })
                } else {
                    Ok(SetId::chain(id.half, id.strip + 1))
                }
            }
            Band::Sibling => Ok(SetId::chain(id.half, id.strip + 1)),
        }
    }

    /// The unique level-`level` grid set containing `p`.
    pub fn locate(&self, p: &Point, level: i64) -> Result<SetId, GridError> {
        assert_eq!(p.dim(), self.n, "dimension mismatch");
        let half = if p.t >= 0.0 { Half::Upper } else { Half::Lower };
        let chain = self.chain(half);
        let top = (chain.len() - 1) as i64;
        if level > top {
            return Err(GridError::AboveTop { level, top, half });
        }
        let top_set = &chain[top as usize].set;
        if !top_set.contains(p) {
            return Err(GridError::Outside {
                point: format!("({:?}, {})", p.x, p.t),
                hint: format!("the {half:?} half covers {}", top_set.canonical()),
            });
        }
        let mut id = SetId::chain(half, top as u32);
        while id.level() > level {
            let kids = self.children(&id)?;
            id = kids
                .into_iter()
                .find(|k| self.resolve(k).map(|s| s.contains(p)).unwrap_or(false))
                .expect("children partition their parent");
        }
        Ok(id)
    }

    fn check_covered(&self, half: Half, clipped: &CzBox) -> Result<(), GridError> {
        let cover = self.covered_box(half);
        let inside = (0..self.n)
            .all(|i| cover.x_lo(i) <= clipped.x_lo(i) && clipped.x_hi(i) <= cover.x_hi(i))
            && cover.t_lo() <= clipped.t_lo()
            && clipped.t_hi() <= cover.t_hi();
        if inside {
            Ok(())
        } else {
            Err(GridError::Outside {
                point: format!("box corner {:?}, t in [{}, {})", clipped.corner, clipped.t_lo(), clipped.t_hi()),
                hint: format!(
                    "the {half:?} half covers x in [0, {})^n, t in [{}, {})",
                    cover.side,
                    cover.t_lo(),
                    cover.t_hi()
                ),
            })
        }
    }

    /// All level-`level` ids whose sets meet `within`, in descent order.
    ///
    /// `within` must lie inside the covered region (clipped to each half).
    pub fn enumerate_level(&self, level: i64, within: &CzBox) -> Result<Vec<SetId>, GridError> {
        assert_eq!(within.dim(), self.n, "dimension mismatch");
        let mut out = Vec::new();
        for half in [Half::Upper, Half::Lower] {
            let (lo, hi) = match half {
                Half::Upper => (within.t_lo().max(0.0), within.t_hi()),
                Half::Lower => (within.t_lo(), within.t_hi().min(0.0)),
            };
            if lo >= hi {
                continue;
            }
            let clipped = CzBox::new(within.corner.clone(), within.side, (lo + hi) / 2.0, (hi - lo) / 2.0);
            self.check_covered(half, &clipped)?;
            let top = self.top(half) as i64;
            if level > top {
                return Err(GridError::AboveTop { level, top, half });
            }
            self.collect_level(&SetId::chain(half, top as u32), level, &clipped, &mut out)?;
        }
        Ok(out)
    }

    fn collect_level(
        &self,
        id: &SetId,
        level: i64,
        within: &CzBox,
        out: &mut Vec<SetId>,
    ) -> Result<(), GridError> {
        let b = self.resolve(id)?.as_box();
        if b.disjoint_from(within) {
            return Ok(());
        }
        if id.level() == level {
            out.push(id.clone());
            return Ok(());
        }
        for k in self.children(id)? {
            self.collect_level(&k, level, within, out)?;
        }
        Ok(())
    }

    /// Runs the structural property checks and returns the tallied report.
    pub fn verify(&self, cfg: &VerifyConfig) -> GridReport {
        Verifier::new(self, cfg).run()
    }
}

/// Knobs for [`Grid::verify`].
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Levels to audit; each must sit at least two strips below the top.
    pub levels: RangeInclusive<i64>,
    /// Random points per (half, level) for locate round-trips.
    pub points_per_level: u32,
    /// Cap on pairwise disjointness tests per family before sampling.
    pub max_pairs: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> VerifyConfig {
        VerifyConfig { levels: -2..=4, points_per_level: 100, max_pairs: 200_000, seed: 0 }
    }
}

/// Tally of one audited property.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
    pub examples: Vec<String>,
}

impl PropertyCheck {
    fn new(name: &'static str) -> PropertyCheck {
        PropertyCheck { name, checked: 0, violations: 0, examples: Vec::new() }
    }

    fn pass(&mut self) {
        self.checked += 1;
    }

    fn fail(&mut self, example: impl Into<String>) {
        self.checked += 1;
        self.violations += 1;
        if self.examples.len() < 3 {
            self.examples.push(example.into());
        }
    }

    fn record(&mut self, ok: bool, example: impl FnOnce() -> String) {
        if ok {
            self.pass()
        } else {
            self.fail(example())
        }
    }
}

/// Outcome of [`Grid::verify`]: per-property tallies plus the count of
/// decomposition children whose measure fraction drops below 2⁻ⁿ (expected
/// at vertical-down junctions, where the chain child carries 1/3).
#[derive(Clone, Debug, serde::Serialize)]
pub struct GridReport {
    pub checks: Vec<PropertyCheck>,
    pub small_fraction_children: u64,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }
}

impl fmt::Display for GridReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{}: checked {} violations {}", c.name, c.checked, c.violations)?;
            for e in &c.examples {
                writeln!(f, "  e.g. {e}")?;
            }
        }
        write!(f, "children below the 2^-n fraction: {}", self.small_fraction_children)
    }
}

const REL_TOL: f64 = 1e-12;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

struct Verifier<'a> {
    grid: &'a Grid,
    cfg: &'a VerifyConfig,
    partition: PropertyCheck,
    disjoint: PropertyCheck,
    locate: PropertyCheck,
    nesting: PropertyCheck,
    ratio: PropertyCheck,
    children: PropertyCheck,
    growth: PropertyCheck,
    parents_seen: HashSet<SetId>,
    small_fraction: u64,
}

impl<'a> Verifier<'a> {
    fn new(grid: &'a Grid, cfg: &'a VerifyConfig) -> Verifier<'a> {
        Verifier {
            grid,
            cfg,
            partition: PropertyCheck::new("partition-measure"),
            disjoint: PropertyCheck::new("same-level-disjointness"),
            locate: PropertyCheck::new("locate-membership"),
            nesting: PropertyCheck::new("parent-nesting"),
            ratio: PropertyCheck::new("parent-measure-ratio"),
            children: PropertyCheck::new("child-decomposition"),
            growth: PropertyCheck::new("chain-growth"),
            parents_seen: HashSet::new(),
            small_fraction: 0,
        }
    }

    fn run(mut self) -> GridReport {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        for half in [Half::Upper, Half::Lower] {
            self.check_chain_growth(half);
            for level in self.cfg.levels.clone() {
                self.check_level(half, level, &mut rng);
            }
        }
        GridReport {
            checks: vec![
                self.partition,
                self.disjoint,
                self.locate,
                self.nesting,
                self.ratio,
                self.children,
                self.growth,
            ],
            small_fraction_children: self.small_fraction,
        }
    }

    fn check_chain_growth(&mut self, half: Half) {
        let n = self.grid.n;
        let chain = self.grid.chain(half);
        for w in chain.windows(2) {
            let q = w[1].set.measure() / w[0].set.measure();
            let exact = [2.0, 3.0, (1u64 << n) as f64].iter().any(|&v| rel_close(q, v));
            self.growth.record(exact && q >= 1.5, || {
                format!("{half:?} chain step ratio {q} at {}", w[0].set.canonical())
            });
        }
        // Audit every junction decomposition regardless of the level range, so
        // vertical steps (and their uneven children) are always covered.
        for i in 1..chain.len() {
            self.check_parent_children(SetId::chain(half, i as u32));
        }
    }

    fn check_parent_children(&mut self, pid: SetId) {
        if !self.parents_seen.insert(pid.clone()) {
            return;
        }
        let grid = self.grid;
        let n = grid.n;
        let pmeas = grid.resolve(&pid).expect("parents resolve").measure();
        let kids = grid.children(&pid).expect("parents subdivide");
        let ksum: f64 = kids
            .iter()
            .map(|k| grid.resolve(k).expect("children resolve").measure())
            .sum();
        let count_ok = kids.len() == 2 || kids.len() == 1 << n;
        let mut frac_ok = true;
        for k in &kids {
            let f = grid.resolve(k).unwrap().measure() / pmeas;
            let lo = (0.5f64.powi(n as i32)).min(1.0 / 3.0);
            if f < lo - REL_TOL || f > 2.0 / 3.0 + REL_TOL {
                frac_ok = false;
            }
            if f < 0.5f64.powi(n as i32) - REL_TOL {
                self.small_fraction += 1;
            }
        }
        self.children.record(count_ok && frac_ok && rel_close(ksum, pmeas), || {
            format!("{pid}: {} children, sum {ksum} vs {pmeas}", kids.len())
        });
    }

    fn check_level(&mut self, half: Half, level: i64, rng: &mut ChaCha8Rng) {
        let grid = self.grid;
        let top = grid.top(half) as i64;
        let anchor = (level + 2).clamp(2, top);
        let window = grid.chain(half)[anchor as usize].set.clone();
        let wbox = window.as_box();
        let ids = grid
            .enumerate_level(level, &wbox)
            .expect("anchor window lies inside the covered region");
        let boxes: Vec<CzBox> = ids
            .iter()
            .map(|id| grid.resolve(id).expect("enumerated ids resolve").as_box())
            .collect();

        // Partition: unique ids, all inside the window, measures sum exactly.
        let uniq: HashSet<&SetId> = ids.iter().collect();
        let total: f64 = boxes.iter().map(CzBox::measure).sum();
        self.partition.record(
            uniq.len() == ids.len() && rel_close(total, wbox.measure())
                && boxes.iter().all(|b| b.subset_of(&wbox)),
            || format!("{half:?} level {level}: sum {total} vs window {}", wbox.measure()),
        );

        // Pairwise disjointness, sampled beyond the pair budget.
        let m = boxes.len() as u64;
        let all_pairs = m * m.saturating_sub(1) / 2;
        if all_pairs <= self.cfg.max_pairs {
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    self.disjoint.record(boxes[i].disjoint_from(&boxes[j]), || {
                        format!("{} overlaps {}", ids[i], ids[j])
                    });
                }
            }
        } else {
            for _ in 0..self.cfg.max_pairs {
                let i = rng.gen_range(0..boxes.len());
                let j = rng.gen_range(0..boxes.len());
                if i == j {
                    continue;
                }
                self.disjoint.record(boxes[i].disjoint_from(&boxes[j]), || {
                    format!("{} overlaps {}", ids[i], ids[j])
                });
            }
        }

        // Locate round-trips: the located id belongs to the enumerated family
        // and its set contains the point.
        let id_set: HashSet<&SetId> = ids.iter().collect();
        for _ in 0..self.cfg.points_per_level {
            let x = (0..grid.n)
                .map(|i| rng.gen_range(wbox.x_lo(i)..wbox.x_hi(i)))
                .collect();
            let p = Point::new(x, rng.gen_range(wbox.t_lo()..wbox.t_hi()));
            match grid.locate(&p, level) {
                Ok(id) => {
                    let inside = grid.resolve(&id).map(|s| s.contains(&p)).unwrap_or(false);
                    self.locate.record(id_set.contains(&id) && inside, || {
                        format!("located {id} for ({:?}, {})", p.x, p.t)
                    });
                }
                Err(e) => self.locate.fail(format!("locate failed: {e}")),
            }
        }

        // Nesting and measure ratios through each distinct parent.
        let n = grid.n;
        for (id, b) in ids.iter().zip(&boxes) {
            let pid = grid.parent_id(id).expect("audited levels sit below the top");
            let pbox = grid.resolve(&pid).expect("parents resolve").as_box();
            self.nesting.record(b.subset_of(&pbox), || format!("{id} not inside {pid}"));
            let q = pbox.measure() / b.measure();
            let member = [1.5, 2.0, 3.0, (1u64 << n) as f64].iter().any(|&v| rel_close(q, v));
            self.ratio.record(member && q >= 1.5 && q <= 3f64.max((1u64 << n) as f64), || {
                format!("{pid} over {id}: ratio {q}")
            });
            self.check_parent_children(pid);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn czbox(x0: f64, x1: f64, t0: f64, t1: f64) -> CzBox {
        CzBox::new(vec![x0], x1 - x0, (t0 + t1) / 2.0, (t1 - t0) / 2.0)
    }

    #[test]
    fn upper_chain_doubles_then_steps_up() {
        let g = Grid::build(1, 6);
        let chain = g.chain(Half::Upper);
        for j in 0..=7 {
            let e = &chain[j];
            assert_eq!(e.set.cube.k, 5 + j as i32);
            assert_eq!((e.set.t, e.set.r), (1.0, 1.0));
            if j < 7 {
                assert_eq!(e.step, Some(ParentKind::Horizontal));
            }
        }
        assert_eq!(chain[7].step, Some(ParentKind::VerticalUp));
        assert_eq!((chain[8].set.cube.k, chain[8].set.t, chain[8].set.r), (12, 2.0, 2.0));
        assert_eq!(chain[21].step, Some(ParentKind::VerticalUp));
        assert_eq!((chain[22].set.cube.k, chain[22].set.t, chain[22].set.r), (25, 4.0, 4.0));
        assert_eq!(g.top(Half::Upper), 22);
    }

    #[test]
    fn lower_chain_doubles_then_steps_down() {
        let g = Grid::build(1, 6);
        let chain = g.chain(Half::Lower);
        for j in 0..=8 {
            let e = &chain[j];
            assert_eq!(e.set.cube.k, 2 + j as i32);
        }
        assert_eq!(chain[8].step, Some(ParentKind::VerticalDown));
        assert_eq!((chain[9].set.cube.k, chain[9].set.t, chain[9].set.r), (10, -3.0, 3.0));
        assert_eq!(chain[29].step, Some(ParentKind::VerticalDown));
        assert_eq!((chain[30].set.cube.k, chain[30].set.t, chain[30].set.r), (30, -9.0, 9.0));
        assert_eq!(g.top(Half::Lower), 30);
    }

    #[test]
    fn locate_hits_the_seed_set() {
        let g = Grid::build(1, 6);
        let id = g.locate(&Point::new(vec![0.0], 0.0), 0).unwrap();
        assert_eq!(id, SetId::chain(Half::Upper, 0));
        let s = g.resolve(&id).unwrap();
        assert_eq!(s.canonical(), "1 5 0 1 1");
    }

    #[test]
    fn locate_descends_to_negative_levels() {
        let g = Grid::build(1, 6);
        let id = g.locate(&Point::new(vec![0.5], 0.25), -1).unwrap();
        assert_eq!(id.strip, 0);
        assert_eq!(id.band, Band::Chain);
        assert_eq!(id.path.len(), 1);
        let s = g.resolve(&id).unwrap();
        // Seed [0,32)×[0,2) splits by height: the lower half holds t = 0.25.
        assert_eq!(s.canonical(), "1 5 0 0.5 0.5");
    }

    #[test]
    fn locate_reports_uncovered_points() {
        let g = Grid::build(1, 6);
        let err = g.locate(&Point::new(vec![-1.0], 0.5), 0).unwrap_err();
        assert!(matches!(err, GridError::Outside { .. }));
        assert!(err.to_string().contains("extend the grid"));
        let err = g.locate(&Point::new(vec![1.0], 0.5), 99).unwrap_err();
        assert!(matches!(err, GridError::AboveTop { .. }));
    }

    #[test]
    fn vertical_junction_splits_the_band() {
        let g = Grid::build(1, 6);
        // E⁸ = [0,4096)×[0,4): its two children split the band at t = 2.
        let ids = g.enumerate_level(7, &czbox(0.0, 4096.0, 0.0, 4.0)).unwrap();
        assert_eq!(ids, vec![
            SetId::chain(Half::Upper, 7),
            SetId::sibling(Half::Upper, 7, vec![0]),
        ]);
        let boxes: Vec<CzBox> = ids.iter().map(|i| g.resolve(i).unwrap().as_box()).collect();
        assert_eq!((boxes[0].t_lo(), boxes[0].t_hi()), (0.0, 2.0));
        assert_eq!((boxes[1].t_lo(), boxes[1].t_hi()), (2.0, 4.0));
        assert_eq!(boxes[0].side, 4096.0);
    }

    #[test]
    fn level_zero_partition_of_an_upper_window() {
        let g = Grid::build(1, 6);
        // E² = [0,128)×[0,2) tiles into four level-0 sets of measure 64.
        let ids = g.enumerate_level(0, &czbox(0.0, 128.0, 0.0, 2.0)).unwrap();
        assert_eq!(ids.len(), 4);
        let total: f64 = ids.iter().map(|i| g.resolve(i).unwrap().measure()).sum();
        assert_eq!(total, 256.0);
        let mut los: Vec<f64> = ids.iter().map(|i| g.resolve(i).unwrap().cube.lo(0)).collect();
        los.sort_by(f64::total_cmp);
        assert_eq!(los, vec![0.0, 32.0, 64.0, 96.0]);
    }

    #[test]
    fn vertical_down_parent_has_uneven_children() {
        let g = Grid::build(1, 6);
        // E⁹ of the lower chain is [0,1024)×[-6,0): chain child 1/3, sibling 2/3.
        let pid = SetId::chain(Half::Lower, 9);
        let kids = g.children(&pid).unwrap();
        assert_eq!(kids, vec![
            SetId::sibling(Half::Lower, 8, vec![0]),
            SetId::chain(Half::Lower, 8),
        ]);
        let p = g.resolve(&pid).unwrap();
        let sib = g.resolve(&kids[0]).unwrap();
        let chain = g.resolve(&kids[1]).unwrap();
        assert_eq!((sib.t_lo(), sib.t_hi()), (-6.0, -2.0));
        assert_eq!((chain.t_lo(), chain.t_hi()), (-2.0, 0.0));
        assert_eq!(sib.measure() / p.measure(), 2.0 / 3.0);
        assert_eq!(chain.measure() / p.measure(), 1.0 / 3.0);
        assert_eq!(g.parent_id(&kids[0]).unwrap(), pid);
        assert_eq!(g.parent_id(&kids[1]).unwrap(), pid);
    }

    #[test]
    fn set_id_round_trip_display() {
        let id = SetId { half: Half::Upper, strip: 7, band: Band::Sibling, cell: vec![0], path: vec![0, 1] };
        assert_eq!(id.to_string(), "U7S@0:01");
        assert_eq!(SetId::chain(Half::Lower, 3).to_string(), "L3C");
        assert_eq!(id.level(), 5);
    }

    #[test]
    fn build_is_deterministic() {
        let a = Grid::build(2, 5);
        let b = Grid::build(2, 5);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn verifier_passes_and_flags_uneven_children() {
        let g = Grid::build(1, 4);
        let cfg = VerifyConfig { levels: -2..=4, points_per_level: 50, max_pairs: 100_000, seed: 7 };
        let report = g.verify(&cfg);
        assert!(report.passed(), "{report}");
        assert!(report.small_fraction_children > 0);
        for c in &report.checks {
            assert!(c.checked > 0, "{} ran nothing", c.name);
        }
    }

    #[test]
    fn verifier_covers_dimension_two() {
        let g = Grid::build(2, 3);
        let cfg = VerifyConfig { levels: -1..=3, points_per_level: 25, max_pairs: 50_000, seed: 11 };
        let report = g.verify(&cfg);
        assert!(report.passed(), "{report}");
    }
}
