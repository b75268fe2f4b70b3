//! Calderón–Zygmund sets over dyadic cubes.
//!
//! A CZ set is a box R = Q × [t − r, t + r) where Q is a dyadic cube of side
//! L = 2^k.  Writing λ = k·ln 2, the admissibility condition couples the cube
//! side to the height band:
//!
//! * small regime r < 1:  2 + t + ln r ≤ λ < 8 + t + ln r,
//! * big regime  r ≥ 1:  t + 2r ≤ λ < t + 8r.
//!
//! Both are evaluated in this exact-exponent form with strict double
//! comparisons, which keeps the calculus overflow-free for large sides.  The
//! right Haar measure of R is exactly ρ(R) = 2 r Lⁿ.
//!
//! Admissible sets form a forest: [`CzSet::split`] subdivides into 2ⁿ
//! cube-halved children or 2 height-halved children (cube first), and the
//! three parent constructions of [`CzSet::parent`] extend a big-regime set
//! horizontally (measure ×2ⁿ), vertically upward (×2) or vertically downward
//! (×3), each with the sub-decomposition that contains the original set.

use std::fmt;

use rand::Rng;

use crate::geometry::Point;

const LN_2: f64 = std::f64::consts::LN_2;

/// A dyadic cube ∏ᵢ [mᵢ 2^k, (mᵢ+1) 2^k) of side 2^k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct DyadicCube {
    pub k: i32,
    pub m: Vec<i64>,
}

impl DyadicCube {
    pub fn new(k: i32, m: Vec<i64>) -> DyadicCube {
        assert!(!m.is_empty(), "dimension must be at least 1");
        DyadicCube { k, m }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Side length 2^k, exact in double precision.
    pub fn side(&self) -> f64 {
        (self.k as f64).exp2()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.m[axis] as f64 * self.side()
    }

    pub fn hi(&self, axis: usize) -> f64 {
        (self.m[axis] + 1) as f64 * self.side()
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| (self.lo(i) + self.hi(i)) / 2.0).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        (0..self.dim()).all(|i| self.lo(i) <= x[i] && x[i] < self.hi(i))
    }

    /// The unique dyadic cube of side 2^{k+1} containing this one.
    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            k: self.k + 1,
            m: self.m.iter().map(|v| v.div_euclid(2)).collect(),
        }
    }

    /// The 2ⁿ half-side subcubes, in lexicographic corner order.
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..1usize << n)
            .map(|i| DyadicCube {
                k: self.k - 1,
                m: (0..n)
                    .map(|d| 2 * self.m[d] + ((i >> (n - 1 - d)) & 1) as i64)
                    .collect(),
            })
            .collect()
    }
}

/// Log-side bounds (lo, hi) of the admissibility window for height data (t, r).
fn log_side_bounds(t: f64, r: f64) -> (f64, f64) {
    if r >= 1.0 {
        (t + 2.0 * r, t + 8.0 * r)
    } else {
        (2.0 + t + r.ln(), 8.0 + t + r.ln())
    }
}

fn admissibility_failure(lam: f64, t: f64, r: f64) -> Option<String> {
    let (lo, hi) = log_side_bounds(t, r);
    if lam < lo {
        Some(format!("log side {lam:.6} below lower bound {lo:.6}"))
    } else if lam >= hi {
        Some(format!("log side {lam:.6} at or above upper bound {hi:.6}"))
    } else {
        None
    }
}

/// A CZ set Q × [t − r, t + r) over a dyadic cube.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CzSet {
    pub cube: DyadicCube,
    pub t: f64,
    pub r: f64,
}

/// How a set was subdivided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// 2ⁿ children with half the cube side, same height band.
    Cube,
    /// 2 children with the same cube, half the height band.
    Interval,
}

/// Result of a canonical split: children partition the set exactly.
#[derive(Clone, Debug)]
pub struct Split {
    pub mode: SplitMode,
    pub children: Vec<CzSet>,
}

#[derive(Debug, thiserror::Error)]
#[error(
    "no admissible split of {set}: cube children: {cube}; lower interval child: {lower}; \
     upper interval child: {upper}"
)]
pub struct SplitError {
    pub set: String,
    pub cube: String,
    pub lower: String,
    pub upper: String,
}

/// The three parent constructions for big-regime sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum ParentKind {
    Horizontal,
    VerticalUp,
    VerticalDown,
}

/// A parent set together with its decomposition into admissible pieces, one of
/// which (at `child_index`) is the original set.
#[derive(Clone, Debug)]
pub struct Parent {
    pub set: CzSet,
    pub decomposition: Vec<CzSet>,
    pub child_index: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ParentError {
    #[error("parent constructions require the big regime r ≥ 1, got r = {r}")]
    SmallRegime { r: f64 },
    #[error(
        "{kind:?} side condition fails for {set}: log side {lam:.6} not in [{lo:.6}, {hi:.6})"
    )]
    SideCondition {
        kind: ParentKind,
        set: String,
        lam: f64,
        lo: f64,
        hi: f64,
    },
}

/// Verdict of the sampled dilated-set membership test.
///
/// `Inside` is certified (some sample of R is closer than r − tol), the other
/// two verdicts are only as sharp as the sampling lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DilatedPosition {
    Inside,
    Boundary,
    Outside,
}

impl CzSet {
    pub fn new(cube: DyadicCube, t: f64, r: f64) -> CzSet {
        assert!(r > 0.0 && r.is_finite() && t.is_finite(), "invalid height band");
        CzSet { cube, t, r }
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    /// k·ln 2, the exact-exponent form of the log side length.
    pub fn log_side(&self) -> f64 {
        self.cube.k as f64 * LN_2
    }

    pub fn is_admissible(&self) -> bool {
        admissibility_failure(self.log_side(), self.t, self.r).is_none()
    }

    /// ρ(R) = 2 r Lⁿ, exact for dyadic data.
    pub fn measure(&self) -> f64 {
        2.0 * self.r * ((self.dim() as i32 * self.cube.k) as f64).exp2()
    }

    /// Center x_R = (c_Q, t).
    pub fn center(&self) -> Point {
        Point::new(self.cube.center(), self.t)
    }

    pub fn t_lo(&self) -> f64 {
        self.t - self.r
    }

    pub fn t_hi(&self) -> f64 {
        self.t + self.r
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.t_lo() <= p.t && p.t < self.t_hi() && self.cube.contains(&p.x)
    }

    pub fn as_box(&self) -> CzBox {
        CzBox {
            corner: (0..self.dim()).map(|i| self.cube.lo(i)).collect(),
            side: self.cube.side(),
            t: self.t,
            r: self.r,
        }
    }

    /// Canonical text form `n k m.. t r`.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// Cube-first canonical subdivision into admissible children.
    ///
    /// The children partition R and each carries measure ρ(R)/2ⁿ (cube mode)
    /// or ρ(R)/2 (interval mode).  Failure of both modes is reported with the
    /// violated inequalities; for admissible inputs it is not expected to
    /// occur.
    pub fn split(&self) -> Result<Split, SplitError> {
        let cube_children = self.cube.children();
        // Cube children share (t, r), so one admissibility test covers all 2ⁿ.
        let cube_fail = admissibility_failure(self.log_side() - LN_2, self.t, self.r);
        if cube_fail.is_none() {
            return Ok(Split {
                mode: SplitMode::Cube,
                children: cube_children
                    .into_iter()
                    .map(|c| CzSet::new(c, self.t, self.r))
                    .collect(),
            });
        }
        let half = self.r / 2.0;
        let lower = CzSet::new(self.cube.clone(), self.t - half, half);
        let upper = CzSet::new(self.cube.clone(), self.t + half, half);
        let lower_fail = admissibility_failure(lower.log_side(), lower.t, lower.r);
        let upper_fail = admissibility_failure(upper.log_side(), upper.t, upper.r);
        if lower_fail.is_none() && upper_fail.is_none() {
            return Ok(Split {
                mode: SplitMode::Interval,
                children: vec![lower, upper],
            });
        }
        Err(SplitError {
            set: self.canonical(),
            cube: cube_fail.unwrap_or_else(|| "admissible".into()),
            lower: lower_fail.unwrap_or_else(|| "admissible".into()),
            upper: upper_fail.unwrap_or_else(|| "admissible".into()),
        })
    }

    /// Whether the vertical parent constructions apply, i.e. the side lies in
    /// the upper half [e^t e^{8r}/2, e^t e^{8r}) of the admissible window.
    pub fn vertical_side_condition(&self) -> bool {
        let lam = self.log_side();
        self.r >= 1.0 && self.t + 8.0 * self.r - LN_2 <= lam && lam < self.t + 8.0 * self.r
    }

    /// Builds the requested parent of a big-regime set.
    ///
    /// * `Horizontal` (side condition e^t e^{2r} ≤ L < e^t e^{8r}/2): the
    ///   dyadic parent cube over the same band, measure 2ⁿ ρ(R).
    /// * `VerticalUp` (side condition e^t e^{8r}/2 ≤ L < e^t e^{8r}):
    ///   Q × [t−r, t+3r), measure 2 ρ(R), sibling above.
    /// * `VerticalDown` (same side condition): Q × [t−5r, t+r), measure
    ///   3 ρ(R), sibling of measure 2 ρ(R) below.
    pub fn parent(&self, kind: ParentKind) -> Result<Parent, ParentError> {
        if self.r < 1.0 {
            return Err(ParentError::SmallRegime { r: self.r });
        }
        let lam = self.log_side();
        let (lo, hi) = match kind {
            ParentKind::Horizontal => (self.t + 2.0 * self.r, self.t + 8.0 * self.r - LN_2),
            ParentKind::VerticalUp | ParentKind::VerticalDown => {
                (self.t + 8.0 * self.r - LN_2, self.t + 8.0 * self.r)
            }
        };
        if !(lo <= lam && lam < hi) {
            return Err(ParentError::SideCondition {
                kind,
                set: self.canonical(),
                lam,
                lo,
                hi,
            });
        }

        let parent = match kind {
            ParentKind::Horizontal => {
                let set = CzSet::new(self.cube.parent(), self.t, self.r);
                let decomposition: Vec<CzSet> = set
                    .cube
                    .children()
                    .into_iter()
                    .map(|c| CzSet::new(c, self.t, self.r))
                    .collect();
                let child_index = decomposition
                    .iter()
                    .position(|c| c.cube == self.cube)
                    .expect("dyadic parent contains its child");
                Parent { set, decomposition, child_index }
            }
            ParentKind::VerticalUp => {
                let set = CzSet::new(self.cube.clone(), self.t + self.r, 2.0 * self.r);
                let sibling = CzSet::new(self.cube.clone(), self.t + 2.0 * self.r, self.r);
                Parent {
                    set,
                    decomposition: vec![self.clone(), sibling],
                    child_index: 0,
                }
            }
            ParentKind::VerticalDown => {
                let set = CzSet::new(self.cube.clone(), self.t - 2.0 * self.r, 3.0 * self.r);
                let sibling = CzSet::new(self.cube.clone(), self.t - 3.0 * self.r, 2.0 * self.r);
                Parent {
                    set,
                    decomposition: vec![sibling, self.clone()],
                    child_index: 1,
                }
            }
        };

        debug_assert!(parent.set.is_admissible(), "parent must be admissible");
        debug_assert!(
            parent.decomposition.iter().all(CzSet::is_admissible),
            "parent decomposition must be admissible"
        );
        Ok(parent)
    }

    /// Closed-form sup of d(x_R, ·) over the closure of R.
    ///
    /// In pulled-back coordinates the cosh is (e^s + e^{−s}(1 + |y|²))/2 with
    /// |y_i| ≤ e^{−t} L/2 and |s| ≤ r; it is increasing in each |y_i| and
    /// convex in s, so the sup sits at a corner.
    pub fn center_spread(&self) -> f64 {
        let yhw = (-self.t).exp() * self.cube.side() / 2.0;
        let q = self.dim() as f64 * yhw * yhw;
        let g = |s: f64| (s.exp() + (-s).exp() * (1.0 + q)) / 2.0;
        let arg = g(self.r).max(g(-self.r));
        if arg <= 1.0 { 0.0 } else { arg.acosh() }
    }

    /// Deterministic distance witnesses: a 5-per-axis interior lattice plus
    /// the 2^{n+1} closure corners.
    pub fn boundary_samples(&self) -> Vec<Point> {
        self.as_box().boundary_samples()
    }

    /// Min distance from `p` to the sample set (0 when p ∈ R).
    pub fn sample_distance(&self, p: &Point) -> f64 {
        self.as_box().sample_distance(p)
    }

    /// Sampled membership in the dilated set R* = {d(·, R) < r}.
    pub fn dilated_classify(&self, p: &Point, tol: f64) -> DilatedPosition {
        self.as_box().dilated_classify(p, tol)
    }

    /// True when `p` is certified interior to R* at tolerance `tol`.
    pub fn dilated_contains(&self, p: &Point, tol: f64) -> bool {
        self.dilated_classify(p, tol) == DilatedPosition::Inside
    }

    pub fn default_dilation_tol(&self) -> f64 {
        1e-3 * self.r
    }
}

impl fmt::Display for CzSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.dim(), self.cube.k)?;
        for v in &self.cube.m {
            write!(f, " {v}")?;
        }
        write!(f, " {} {}", self.t, self.r)
    }
}

/// A CZ box with an arbitrarily positioned cube.
///
/// Dyadic alignment matters for the grid, not for admissibility, and atoms or
/// maximal-operator competitor families may straddle dyadic walls.  `CzBox`
/// carries the same (side, t, r) inequalities without the lattice constraint.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CzBox {
    pub corner: Vec<f64>,
    pub side: f64,
    pub t: f64,
    pub r: f64,
}

impl CzBox {
    pub fn new(corner: Vec<f64>, side: f64, t: f64, r: f64) -> CzBox {
        assert!(!corner.is_empty(), "dimension must be at least 1");
        assert!(side > 0.0 && r > 0.0, "side and half-height must be positive");
        CzBox { corner, side, t, r }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn x_lo(&self, axis: usize) -> f64 {
        self.corner[axis]
    }

    pub fn x_hi(&self, axis: usize) -> f64 {
        self.corner[axis] + self.side
    }

    pub fn t_lo(&self) -> f64 {
        self.t - self.r
    }

    pub fn t_hi(&self) -> f64 {
        self.t + self.r
    }

    pub fn measure(&self) -> f64 {
        2.0 * self.r * self.side.powi(self.dim() as i32)
    }

    pub fn center(&self) -> Point {
        Point::new(
            (0..self.dim()).map(|i| self.corner[i] + self.side / 2.0).collect(),
            self.t,
        )
    }

    pub fn is_admissible(&self) -> bool {
        admissibility_failure(self.side.ln(), self.t, self.r).is_none()
    }

    pub fn contains(&self, p: &Point) -> bool {
        assert_eq!(p.dim(), self.dim(), "dimension mismatch");
        self.t_lo() <= p.t
            && p.t < self.t_hi()
            && (0..self.dim()).all(|i| self.x_lo(i) <= p.x[i] && p.x[i] < self.x_hi(i))
    }

    /// Whether `self` ⊆ `other` as half-open boxes.
    pub fn subset_of(&self, other: &CzBox) -> bool {
        (0..self.dim()).all(|i| other.x_lo(i) <= self.x_lo(i) && self.x_hi(i) <= other.x_hi(i))
            && other.t_lo() <= self.t_lo()
            && self.t_hi() <= other.t_hi()
    }

    pub fn disjoint_from(&self, other: &CzBox) -> bool {
        for i in 0..self.dim() {
            if self.x_hi(i) <= other.x_lo(i) || other.x_hi(i) <= self.x_lo(i) {
                return true;
            }
        }
        self.t_hi() <= other.t_lo() || other.t_hi() <= self.t_lo()
    }

    /// ρ of the intersection, exact for nested or disjoint dyadic boxes.
    pub fn intersection_measure(&self, other: &CzBox) -> f64 {
        let mut vol = (self.t_hi().min(other.t_hi()) - self.t_lo().max(other.t_lo())).max(0.0);
        for i in 0..self.dim() {
            vol *= (self.x_hi(i).min(other.x_hi(i)) - self.x_lo(i).max(other.x_lo(i))).max(0.0);
        }
        vol
    }

    pub fn boundary_samples(&self) -> Vec<Point> {
        let n = self.dim();
        let axes = n + 1;
        let fracs = [0.1, 0.3, 0.5, 0.7, 0.9];
        let at = |axis: usize, f: f64| -> f64 {
            if axis < n {
                self.x_lo(axis) + f * self.side
            } else {
                self.t_lo() + f * 2.0 * self.r
            }
        };
        let mut out = Vec::with_capacity(fracs.len().pow(axes as u32) + (1 << axes));
        let mut idx = vec![0usize; axes];
        loop {
            let x = (0..n).map(|a| at(a, fracs[idx[a]])).collect();
            out.push(Point::new(x, at(n, fracs[idx[n]])));
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < fracs.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == axes {
                    // Lattice exhausted; append the closure corners.
                    for c in 0..1usize << axes {
                        let f = |axis: usize| if (c >> axis) & 1 == 1 { 1.0 } else { 0.0 };
                        let x = (0..n).map(|a| at(a, f(a))).collect();
                        out.push(Point::new(x, at(n, f(n))));
                    }
                    return out;
                }
            }
        }
    }

    pub fn sample_distance(&self, p: &Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.boundary_samples()
            .iter()
            .map(|q| p.dist(q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dilated_classify(&self, p: &Point, tol: f64) -> DilatedPosition {
        let d = self.sample_distance(p);
        if d < self.r - tol {
            DilatedPosition::Inside
        } else if d <= self.r + tol {
            DilatedPosition::Boundary
        } else {
            DilatedPosition::Outside
        }
    }
}

impl From<&CzSet> for CzBox {
    fn from(s: &CzSet) -> CzBox {
        s.as_box()
    }
}

/// Draws an admissible set with n ∈ {1, 2, 3} support: r log-uniform in
/// [2⁻⁶, 2⁶], t uniform in [−6, 6], the side uniform over admissible powers of
/// two (capped so ρ(R) stays finite in doubles) and cube position uniform in
/// [−2²⁰, 2²⁰]ⁿ.
pub fn random_admissible<R: Rng>(rng: &mut R, n: usize) -> CzSet {
    assert!((1..=3).contains(&n));
    let r = rng.gen_range(-6.0..6.0_f64).exp2();
    let t = rng.gen_range(-6.0..6.0);
    let (lo, hi) = log_side_bounds(t, r);
    let mut k_min = (lo / LN_2).ceil() as i32;
    while (k_min as f64) * LN_2 < lo {
        k_min += 1;
    }
    let mut k_max = (hi / LN_2).floor() as i32;
    while (k_max as f64) * LN_2 >= hi {
        k_max -= 1;
    }
    k_max = k_max.min(900 / n as i32);
    assert!(k_min <= k_max, "admissible side window empty for t={t}, r={r}");
    let k = rng.gen_range(k_min..=k_max);
    let m = (0..n).map(|_| rng.gen_range(-(1 << 20)..(1 << 20))).collect();
    let set = CzSet::new(DyadicCube::new(k, m), t, r);
    debug_assert!(set.is_admissible());
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_set(k: i32, m: i64, t: f64, r: f64) -> CzSet {
        CzSet::new(DyadicCube::new(k, vec![m]), t, r)
    }

    #[test]
    fn admissibility_matches_hand_checked_windows() {
        // e³ ≈ 20.09 ≤ 32 < e⁹ ≈ 8103.1.
        assert!(interval_set(5, 0, 1.0, 1.0).is_admissible());
        // 16 < e³ fails the lower bound.
        assert!(!interval_set(4, 0, 1.0, 1.0).is_admissible());
        // Small regime: e^{2+0}·0.5 = 3.69 ≤ 4 < e^{8}·0.5 = 1490.5.
        assert!(interval_set(2, -1, 0.0, 0.5).is_admissible());
        // 2 < e²·0.5 ≈ 3.69 fails.
        assert!(!interval_set(1, 0, 0.0, 0.5).is_admissible());
    }

    #[test]
    fn measure_is_exact() {
        assert_eq!(interval_set(5, 0, 1.0, 1.0).measure(), 64.0);
        let square = CzSet::new(DyadicCube::new(3, vec![1, -2]), 0.0, 0.25);
        assert_eq!(square.measure(), 2.0 * 0.25 * 64.0);
    }

    #[test]
    fn split_prefers_cube_mode() {
        // [0,64)×[0,2): halving the cube keeps 32 ≥ e³, so cube mode wins.
        let s = interval_set(6, 0, 1.0, 1.0);
        let sp = s.split().unwrap();
        assert_eq!(sp.mode, SplitMode::Cube);
        assert_eq!(sp.children.len(), 2);
        assert_eq!(sp.children[0], interval_set(5, 0, 1.0, 1.0));
        assert_eq!(sp.children[1], interval_set(5, 1, 1.0, 1.0));
    }

    #[test]
    fn split_falls_back_to_interval_mode() {
        // [0,32)×[0,2): 16 < e³ kills the cube mode; height halves instead.
        let s = interval_set(5, 0, 1.0, 1.0);
        let sp = s.split().unwrap();
        assert_eq!(sp.mode, SplitMode::Interval);
        assert_eq!(sp.children[0], interval_set(5, 0, 0.5, 0.5));
        assert_eq!(sp.children[1], interval_set(5, 0, 1.5, 0.5));
    }

    #[test]
    fn split_children_partition_measure() {
        let s = interval_set(5, 0, 1.0, 1.0);
        let sp = s.split().unwrap();
        let sum: f64 = sp.children.iter().map(CzSet::measure).sum();
        assert_eq!(sum, s.measure());
        for c in &sp.children {
            assert!(c.is_admissible());
            assert!(c.as_box().subset_of(&s.as_box()));
        }
    }

    #[test]
    fn horizontal_parent_scales_by_two_pow_n() {
        let s = interval_set(5, 3, 1.0, 1.0);
        let p = s.parent(ParentKind::Horizontal).unwrap();
        assert_eq!(p.set, interval_set(6, 1, 1.0, 1.0));
        assert_eq!(p.set.measure(), 2.0 * s.measure());
        assert_eq!(p.decomposition[p.child_index], s);
    }

    #[test]
    fn vertical_up_parent_doubles_measure() {
        // λ = 12 ln 2 = 8.3178 sits in [9 − ln 2, 9): vertical window.
        let s = interval_set(12, 0, 1.0, 1.0);
        assert!(s.vertical_side_condition());
        let p = s.parent(ParentKind::VerticalUp).unwrap();
        assert_eq!(p.set, interval_set(12, 0, 2.0, 2.0));
        assert_eq!(p.set.measure(), 2.0 * s.measure());
        assert_eq!(p.decomposition, vec![s.clone(), interval_set(12, 0, 3.0, 1.0)]);
    }

    #[test]
    fn vertical_down_parent_triples_measure() {
        // e⁷/2 ≈ 548.3 ≤ 1024 < e⁷ ≈ 1096.6: vertical window for (t, r) = (−1, 1).
        let s = interval_set(10, 0, -1.0, 1.0);
        assert!(s.vertical_side_condition());
        let p = s.parent(ParentKind::VerticalDown).unwrap();
        assert_eq!(p.set, interval_set(10, 0, -3.0, 3.0));
        assert_eq!(p.set.measure(), 3.0 * s.measure());
        let sibling = interval_set(10, 0, -4.0, 2.0);
        assert_eq!(p.set.measure(), s.measure() + sibling.measure());
        assert_eq!(p.decomposition, vec![sibling, s]);
    }

    #[test]
    fn parent_rejects_wrong_side_condition() {
        let s = interval_set(5, 0, 1.0, 1.0);
        assert!(matches!(
            s.parent(ParentKind::VerticalUp),
            Err(ParentError::SideCondition { .. })
        ));
        let small = interval_set(2, 0, 0.0, 0.5);
        assert!(matches!(
            small.parent(ParentKind::Horizontal),
            Err(ParentError::SmallRegime { .. })
        ));
    }

    #[test]
    fn parent_decomposition_recovers_child_verbatim() {
        let s = interval_set(12, 5, 1.0, 1.0);
        for kind in [ParentKind::VerticalUp, ParentKind::VerticalDown] {
            let p = s.parent(kind).unwrap();
            assert_eq!(p.decomposition[p.child_index], s);
            let sum: f64 = p.decomposition.iter().map(CzSet::measure).sum();
            assert_eq!(sum, p.set.measure());
        }
    }

    #[test]
    fn canonical_text_form() {
        assert_eq!(interval_set(5, 0, 1.0, 1.0).canonical(), "1 5 0 1 1");
        let sq = CzSet::new(DyadicCube::new(-2, vec![-3, 7]), 0.5, 0.25);
        assert_eq!(sq.canonical(), "2 -2 -3 7 0.5 0.25");
    }

    #[test]
    fn dilated_membership_three_ways() {
        let s = interval_set(5, 0, 1.0, 1.0);
        let tol = s.default_dilation_tol();
        // Interior points are certified inside the dilation.
        assert!(s.dilated_contains(&Point::new(vec![16.0], 1.0), tol));
        // Points beyond (spread + r) around the center cannot be inside.
        let spread = s.center_spread();
        let far = Point::new(vec![16.0], 1.0 + 0.0_f64.max(spread + 2.0 * s.r));
        assert_eq!(s.dilated_classify(&far, tol), DilatedPosition::Outside);
    }

    #[test]
    fn center_spread_dominates_sampled_distances() {
        let s = interval_set(5, -2, 0.5, 0.5);
        let c = s.center();
        let spread = s.center_spread();
        for q in s.boundary_samples() {
            assert!(c.dist(&q) <= spread + 1e-9);
        }
    }
}
