//! Group structure and metric geometry of S = Rⁿ ⋊ R.
//!
//! Points are pairs (x, t) with x ∈ Rⁿ and t ∈ R, multiplied by
//! (x, t)·(x′, t′) = (x + eᵗ x′, t + t′).  The identity is o = (0, 0) and
//! (x, t)⁻¹ = (−e⁻ᵗ x, −t).  The left-invariant metric comes from the closed
//! form
//!
//! ```text
//! cosh d((x, t), o) = (eᵗ + e⁻ᵗ + e⁻ᵗ |x|²) / 2,
//! ```
//!
//! extended to arbitrary pairs through d(p, q) = d(o, p⁻¹ q).  The right Haar
//! measure is dρ = dx dt, so left translation by (x₀, t₀) scales ρ by e^{n t₀}.
//! Metric balls satisfy ρ(B(o, r)) ≍ r^{n+1} for r < 1 and ≍ e^{n r} for
//! r ≥ 1, which is what makes the group a natural testbed for exponential-
//! growth harmonic analysis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distance arguments whose cosh lies within this of 1 collapse to 0.
const COSH_ONE_TOL: f64 = 1e-12;

/// A point (x, t) of the group, with `x` the Euclidean part.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, t: f64) -> Point {
        assert!(!x.is_empty(), "dimension must be at least 1");
        assert!(
            x.iter().all(|v| v.is_finite()) && t.is_finite(),
            "coordinates must be finite"
        );
        Point { x, t }
    }

    /// Identity element o = (0, 0) in dimension `n`.
    pub fn origin(n: usize) -> Point {
        assert!(n >= 1, "dimension must be at least 1");
        Point { x: vec![0.0; n], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Group product (x, t)·(x′, t′) = (x + eᵗ x′, t + t′).
    pub fn mul(&self, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let scale = self.t.exp();
        let x = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| a + scale * b)
            .collect();
        Point { x, t: self.t + other.t }
    }

    /// Group inverse (x, t)⁻¹ = (−e⁻ᵗ x, −t).
    pub fn inv(&self) -> Point {
        let scale = (-self.t).exp();
        Point {
            x: self.x.iter().map(|a| -scale * a).collect(),
            t: -self.t,
        }
    }

    /// cosh of the distance to the identity, straight from the closed form.
    pub fn cosh_dist_origin(&self) -> f64 {
        let q: f64 = self.x.iter().map(|v| v * v).sum();
        (self.t.exp() + (-self.t).exp() * (1.0 + q)) / 2.0
    }

    /// Left-invariant distance d(p, q) = arccosh applied to p⁻¹q.
    ///
    /// The arccosh argument is clamped below at 1; arguments within 1e−12 of 1
    /// return distance 0 so that round-off near coincident points cannot
    /// produce NaN.
    pub fn dist(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let arg = self.inv().mul(other).cosh_dist_origin();
        if arg <= 1.0 + COSH_ONE_TOL {
            0.0
        } else {
            arg.acosh()
        }
    }
}

/// Monte-Carlo estimate of a ball measure, with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BallEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
}

/// Half-width of the x-bounding box for B(o, r).
///
/// From the closed form, (y, s) ∈ B(o, r) forces e⁻ˢ|y|² ≤ 2 cosh r and
/// |s| ≤ r, hence |y_i| ≤ eʳ √(2 cosh r).
pub fn ball_box_halfwidth(r: f64) -> f64 {
    r.exp() * (2.0 * r.cosh()).sqrt()
}

/// Estimates ρ(B(center, r)) by rejection sampling.
///
/// The ball is pulled back to the identity by left translation, sampled inside
/// the bounding box |y_i| ≤ eʳ √(2 cosh r), |s| ≤ r, and the hit fraction is
/// rescaled by the box volume times the translation Jacobian e^{n t_c}.  The
/// estimate is unbiased and fully determined by `seed`.
pub fn mc_ball_measure(center: &Point, r: f64, samples: u64, seed: u64) -> BallEstimate {
    assert!(r > 0.0 && r.is_finite(), "radius must be positive");
    assert!(samples > 0, "need at least one sample");
    let n = center.dim();
    let half = ball_box_halfwidth(r);
    let box_vol = (2.0 * half).powi(n as i32) * 2.0 * r;
    let cosh_r = r.cosh();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut q = 0.0;
        for _ in 0..n {
            let y = rng.gen_range(-half..half);
            q += y * y;
        }
        let s: f64 = rng.gen_range(-r..r);
        let cosh_d = (s.exp() + (-s).exp() * (1.0 + q)) / 2.0;
        if cosh_d < cosh_r {
            hits += 1;
        }
    }

    let frac = hits as f64 / samples as f64;
    let jacobian = (center.t * n as f64).exp();
    let scale = box_vol * jacobian;
    BallEstimate {
        estimate: scale * frac,
        stderr: scale * (frac * (1.0 - frac) / samples as f64).sqrt(),
        samples,
        hits,
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a slope");
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Least-squares affine fit, returning (slope, intercept, max |residual|).
pub fn fit_affine(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let slope = fit_slope(xs, ys);
    let m = xs.len() as f64;
    let intercept = ys.iter().sum::<f64>() / m - slope * xs.iter().sum::<f64>() / m;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, t: f64) -> Point {
        Point::new(vec![x], t)
    }

    #[test]
    fn product_follows_group_law() {
        // (0, ln 2)·(3, 0) = (0 + 2·3, ln 2) = (6, ln 2).
        let p = pt(0.0, 2.0_f64.ln()).mul(&pt(3.0, 0.0));
        assert!((p.x[0] - 6.0).abs() < 1e-15);
        assert!((p.t - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn inverse_cancels() {
        let p = Point::new(vec![1.5, -0.25], 0.75);
        let e = p.mul(&p.inv());
        assert!(e.x.iter().all(|v| v.abs() < 1e-12));
        assert!(e.t.abs() < 1e-12);
    }

    #[test]
    fn horizontal_distance_closed_form() {
        // d(o, (x, 0)) = arccosh(1 + |x|²/2).
        let o = Point::origin(1);
        for x in [0.25, 1.0, 3.0, 10.0_f64] {
            let want = (1.0 + x * x / 2.0).acosh();
            assert!((o.dist(&pt(x, 0.0)) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_distance_is_euclidean_in_t() {
        let o = Point::origin(2);
        let p = Point::new(vec![0.0, 0.0], -1.75);
        assert!((o.dist(&p) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_have_zero_distance() {
        let p = Point::new(vec![5.0, -2.0], 3.0);
        assert_eq!(p.dist(&p), 0.0);
    }

    #[test]
    fn small_ball_estimate_matches_quadrature() {
        // For n = 1 the ball measure has the exact 1-d integral
        // ρ(B(o,r)) = ∫_{-r}^{r} 2 √(2 eᵗ cosh r − e^{2t} − 1) dt.
        for r in [0.1, 0.5, 2.0] {
            let steps = 20_000;
            let h = 2.0 * r / steps as f64;
            let mut exact = 0.0;
            for i in 0..steps {
                let t = -r + (i as f64 + 0.5) * h;
                let w = (2.0 * t.exp() * r.cosh() - (2.0 * t).exp() - 1.0).max(0.0);
                exact += 2.0 * w.sqrt() * h;
            }
            let est = mc_ball_measure(&Point::origin(1), r, 200_000, 7);
            assert!(
                (est.estimate - exact).abs() < 4.0 * est.stderr.max(1e-9),
                "r={r}: estimate {} vs quadrature {exact} (stderr {})",
                est.estimate,
                est.stderr
            );
        }
    }

    #[test]
    fn ball_estimate_translates_by_haar_jacobian() {
        let r = 1.0;
        let at_origin = mc_ball_measure(&Point::origin(1), r, 50_000, 11);
        let shifted = mc_ball_measure(&Point::new(vec![40.0], 2.0), r, 50_000, 11);
        // Same seed, same hit pattern: the ratio is exactly the Jacobian e^{t}.
        assert!((shifted.estimate / at_origin.estimate - 2.0_f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn small_radius_growth_exponent_near_n_plus_one() {
        let radii = [0.05, 0.1, 0.2];
        let logs: Vec<f64> = radii
            .iter()
            .map(|&r| mc_ball_measure(&Point::origin(1), r, 100_000, 3).estimate.ln())
            .collect();
        let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let slope = fit_slope(&lr, &logs);
        assert!((slope - 2.0).abs() < 0.3, "small-radius slope {slope}");
    }

    #[test]
    fn large_radius_growth_exponent_near_n() {
        let radii = [2.0, 3.0, 4.0];
        let logs: Vec<f64> = radii
            .iter()
            .map(|&r| mc_ball_measure(&Point::origin(1), r, 100_000, 5).estimate.ln())
            .collect();
        let slope = fit_slope(&radii, &logs);
        assert!((slope - 1.0).abs() < 0.15, "large-radius slope {slope}");
    }

    #[test]
    fn slope_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (a, b, res) = fit_affine(&xs, &ys);
        assert!((a - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && res < 1e-12);
    }
}
