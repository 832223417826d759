//! Hyperbolic volumes: the Lobachevsky function, orthoschemes, geodesic
//! tetrahedra and convex polyhedra in the Klein model, and volumes of balls.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ball::{eta_inv, V3};

const MAX_TERMS: usize = 40;

/// Precomputed coefficients `(zeta(2n) - 1) / (n (2n + 1))`.
#[derive(Clone, Debug)]
pub struct LobachevskyTable {
    coeffs: Vec<f64>,
    terms: usize,
    precision: f64,
}

/// `zeta(s) - 1` for real `s >= 2`, by direct summation and an
/// Euler-Maclaurin tail.
fn zeta_minus_one(s: f64) -> f64 {
    const K: usize = 30;
    let mut sum = 0.0;
    for k in (2..K).rev() {
        sum += (k as f64).powf(-s);
    }
    let kf = K as f64;
    let tail = kf.powf(1.0 - s) / (s - 1.0) + 0.5 * kf.powf(-s) + s * kf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * kf.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * kf.powf(-s - 5.0) / 30240.0;
    sum + tail
}

impl LobachevskyTable {
    /// Table sized so that the series tail on `[0, pi/2]` stays below `precision`.
    pub fn new(precision: f64) -> Self {
        let coeffs = (1..=MAX_TERMS)
            .map(|n| {
                let z = if n == 1 { PI * PI / 6.0 - 1.0 } else { zeta_minus_one(2.0 * n as f64) };
                z / (n as f64 * (2.0 * n as f64 + 1.0))
            })
            .collect();
        let terms = (0..MAX_TERMS).find(|&r| Self::tail_bound(FRAC_PI_2, r) <= precision).unwrap_or(MAX_TERMS);
        Self { coeffs, terms, precision }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    /// Bound on the neglected part of the series after `r` terms.
    pub fn tail_bound(theta: f64, r: usize) -> f64 {
        let x = (theta / (2.0 * PI)).abs();
        x.powi(2 * r as i32 + 2) / (1.0 - x * x)
    }

    /// The series with `r` terms, for `theta` in `(-pi, pi)`.
    pub fn series(&self, theta: f64, r: usize) -> f64 {
        if theta == 0.0 {
            return 0.0;
        }
        let x = theta / PI;
        let x2 = x * x;
        let mut s = 0.0;
        for c in self.coeffs[..r.min(MAX_TERMS)].iter().rev() {
            s = s * x2 + c;
        }
        s *= x2;
        PI * ((PI - theta) / (PI + theta)).ln() + theta * (3.0 - (2.0 * theta.abs() * (1.0 - x2)).ln() + s)
    }

    /// `L(theta) = -int_0^theta ln|2 sin u| du`.
    pub fn eval(&self, theta: f64) -> f64 {
        if !theta.is_finite() {
            return f64::NAN;
        }
        let mut th = theta - PI * (theta / PI).round();
        let sign = if th < 0.0 { -1.0 } else { 1.0 };
        th = th.abs();
        if th == 0.0 || th == FRAC_PI_2 {
            return 0.0;
        }
        sign * self.series(th, self.terms)
    }

    /// `(1/4)[L(a + g) + L(a - g) + 2 L(pi/2 - a)]`: the region above the unit
    /// hemisphere over a right triangle with angle `a` at the centre and
    /// dihedral angle `g` along the hemisphere edge.
    pub fn orthoscheme(&self, alpha: f64, gamma: f64) -> f64 {
        0.25 * (self.eval(alpha + gamma) + self.eval(alpha - gamma) + 2.0 * self.eval(FRAC_PI_2 - alpha))
    }
}

/// `v(r) = pi (sinh 2r - 2r)`.
pub fn ball_volume(r: f64) -> f64 {
    let x = 2.0 * r;
    if x < 0.5 {
        // sinh x - x by its series
        let x2 = x * x;
        let mut term: f64 = x * x2 / 6.0;
        let mut sum = 0.0f64;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            term *= x2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        PI * sum
    } else {
        PI * (x.sinh() - x)
    }
}

/// Inverse of [`ball_volume`] by Newton iteration safeguarded with bisection.
pub fn inverse_ball_volume(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ball_volume(hi) < v {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut r = if v < 1.0 { (3.0 * v / (4.0 * PI)).cbrt() } else { 0.5 * (2.0 * v / PI).ln().max(0.1) };
    if !(lo..=hi).contains(&r) {
        r = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = ball_volume(r) - v;
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let df = 4.0 * PI * r.sinh().powi(2);
        let mut next = r - f / df;
        if !(df > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-16 * r.max(1e-300) || hi - lo <= 1e-16 * hi {
            return next;
        }
        r = next;
    }
    r
}

/// Klein-model point to Poincaré-ball point.
pub fn klein_to_poincare(k: V3) -> V3 {
    let s = (1.0 - k.norm_sqr()).max(0.0).sqrt();
    k.scale(1.0 / (1.0 + s))
}

pub fn poincare_to_klein(p: V3) -> V3 {
    p.scale(2.0 / (1.0 + p.norm_sqr()))
}

/// Rotation matrix (rows) sending the unit vector `u` to `(0, 0, 1)`.
fn rotation_to_pole(u: V3) -> [V3; 3] {
    let e3 = V3::new(0.0, 0.0, 1.0);
    let c = u.dot(e3);
    if c < -1.0 + 1e-12 {
        return [V3::new(1.0, 0.0, 0.0), V3::new(0.0, -1.0, 0.0), V3::new(0.0, 0.0, -1.0)];
    }
    let v = u.cross(e3);
    let k = 1.0 / (1.0 + c);
    let [x, y, z] = v.0;
    [
        V3::new(c + k * x * x, k * x * y - z, k * x * z + y),
        V3::new(k * x * y + z, c + k * y * y, k * y * z - x),
        V3::new(k * x * z - y, k * y * z + x, c + k * z * z),
    ]
}

fn apply(rot: &[V3; 3], v: V3) -> V3 {
    V3::new(rot[0].dot(v), rot[1].dot(v), rot[2].dot(v))
}

fn cross2(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Klein points at least this close to the sphere count as ideal.
pub const IDEAL_TOL: f64 = 1e-12;

impl LobachevskyTable {
    /// Region above the unit hemisphere over the triangle `(0, x, y)`, signed
    /// by the orientation of the triangle.
    fn cone_over_segment(&self, x: Complex64, y: Complex64) -> f64 {
        let d = y - x;
        let dd = d.norm_sqr();
        if dd < 1e-30 {
            return 0.0;
        }
        let s = -(x.re * d.re + x.im * d.im) / dd;
        let foot = x + d * s;
        let h = foot.norm();
        if h < 1e-15 {
            return 0.0;
        }
        let gamma = h.min(1.0).acos();
        let part = |p: Complex64, q: Complex64| {
            let cr = cross2(p, q);
            let ang = cr.abs().atan2(p.re * q.re + p.im * q.im);
            if ang == 0.0 {
                0.0
            } else {
                cr.signum() * self.orthoscheme(ang.min(gamma), gamma)
            }
        };
        part(x, foot) + part(foot, y)
    }

    /// Volume of the tetrahedron with Klein-model vertices `xi` (ideal) and
    /// `a, b, c`.
    fn ideal_tetrahedron(&self, xi: V3, a: V3, b: V3, c: V3) -> f64 {
        let rot = rotation_to_pole(xi.normalized());
        let upper = |k: V3| {
            let k = apply(&rot, k);
            let p = if k.norm_sqr() >= 1.0 - IDEAL_TOL { k.normalized() } else { klein_to_poincare(k) };
            let u = eta_inv(p.to_ham());
            (u.c0, u.c1.re.max(0.0))
        };
        let pts = [upper(a), upper(b), upper(c)];
        let (z1, t1) = pts[0];
        let area = cross2(pts[1].0 - z1, pts[2].0 - z1);
        let scale = (pts[1].0 - z1).norm_sqr().max((pts[2].0 - z1).norm_sqr());
        if area.abs() <= 1e-14 * scale {
            return 0.0;
        }
        // hemisphere through the three points: 2 Re((z_i - z_1) conj m) = h_i - h_1
        let h = |(z, t): (Complex64, f64)| z.norm_sqr() + t * t;
        let (d2, d3) = (pts[1].0 - z1, pts[2].0 - z1);
        let (r2, r3) = (0.5 * (h(pts[1]) - h(pts[0])), 0.5 * (h(pts[2]) - h(pts[0])));
        let det = d2.re * d3.im - d2.im * d3.re;
        let m = Complex64::new((r2 * d3.im - r3 * d2.im) / det, (d2.re * r3 - d3.re * r2) / det);
        let radius = ((z1 - m).norm_sqr() + t1 * t1).sqrt();
        let q: Vec<Complex64> = pts.iter().map(|(z, _)| (z - m) / radius).collect();
        let total = self.cone_over_segment(q[0], q[1]) + self.cone_over_segment(q[1], q[2]) + self.cone_over_segment(q[2], q[0]);
        total.abs()
    }

    /// Hyperbolic volume of the geodesic tetrahedron with Klein-model vertices
    /// `v` (points of the closed ball).
    pub fn tetrahedron(&self, v: [V3; 4]) -> f64 {
        if let Some(k) = (0..4).find(|&k| v[k].norm_sqr() >= 1.0 - IDEAL_TOL) {
            let o: Vec<V3> = (0..4).filter(|&i| i != k).map(|i| v[i]).collect();
            return self.ideal_tetrahedron(v[k], o[0], o[1], o[2]);
        }
        // extend the longest edge p -> q to the sphere at infinity
        let mut best = (0, 1, -1.0);
        for i in 0..4 {
            for j in 0..4 {
                let l = (v[j] - v[i]).norm_sqr();
                if i != j && l > best.2 {
                    best = (i, j, l);
                }
            }
        }
        let (i, j, _) = best;
        let (p, q) = (v[i], v[j]);
        let d = q - p;
        let (aa, bb, cc) = (d.norm_sqr(), p.dot(d), p.norm_sqr() - 1.0);
        let s = (-bb + (bb * bb - aa * cc).sqrt()) / aa;
        let xi = (p + d.scale(s)).normalized();
        let rest: Vec<V3> = (0..4).filter(|&k| k != i && k != j).map(|k| v[k]).collect();
        let big = self.ideal_tetrahedron(xi, p, rest[0], rest[1]);
        let small = self.ideal_tetrahedron(xi, q, rest[0], rest[1]);
        (big - small).max(0.0)
    }

    /// Volume of a convex polyhedron given by its faces as vertex loops in the
    /// Klein model, coned from `apex` (a point of the closed polyhedron).
    pub fn polyhedron(&self, faces: &[Vec<V3>], apex: V3) -> f64 {
        faces
            .par_iter()
            .map(|face| {
                let mut s = 0.0;
                for k in 1..face.len().saturating_sub(1) {
                    s += self.tetrahedron([apex, face[0], face[k], face[k + 1]]);
                }
                s
            })
            .sum()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent reference: `-int_0^theta ln(2 sin u) du` with the `ln u`
    /// singularity integrated exactly and the rest by adaptive Simpson.
    pub(crate) fn lobachevsky_quadrature(theta: f64) -> f64 {
        fn g(u: f64) -> f64 {
            if u == 0.0 { 0.0 } else { (u.sin() / u).ln() }
        }
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn adapt(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (g(lm), g(rm));
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                adapt(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adapt(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        if theta == 0.0 {
            return 0.0;
        }
        let (fa, fm, fb) = (g(0.0), g(theta / 2.0), g(theta));
        let smooth = adapt(0.0, theta, fa, fm, fb, simpson(0.0, theta, fa, fm, fb), 1e-14, 40);
        -(theta * 2f64.ln() + theta * theta.ln() - theta + smooth)
    }

    #[test]
    fn lobachevsky_values() {
        let t = LobachevskyTable::new(1e-16);
        assert_eq!(t.eval(0.0), 0.0);
        assert!(t.eval(FRAC_PI_2).abs() < 1e-15);
        assert!((t.eval(PI / 6.0) - 0.5074708032048268).abs() < 1e-12);
        // regular ideal tetrahedron: 3 L(pi/3)
        assert!((3.0 * t.eval(PI / 3.0) - 1.0149416064096536).abs() < 1e-13);
        for k in 1..50 {
            let th = k as f64 * 0.031;
            assert!((t.eval(th) - lobachevsky_quadrature(th)).abs() < 1e-10, "theta {th}");
            assert!((t.eval(-th) + t.eval(th)).abs() < 1e-15);
            assert!((t.eval(th + PI) - t.eval(th)).abs() < 1e-12);
        }
    }

    #[test]
    fn duplication_identity() {
        let t = LobachevskyTable::new(1e-16);
        for k in 0..200 {
            let th = -3.0 + 0.03 * k as f64;
            let lhs = t.eval(2.0 * th);
            let rhs = 2.0 * t.eval(th) + 2.0 * t.eval(th + FRAC_PI_2);
            assert!((lhs - rhs).abs() < 1e-10, "theta {th}");
        }
    }

    #[test]
    fn tail_bound_holds() {
        let t = LobachevskyTable::new(1e-16);
        for r in 1..12 {
            for k in 1..20 {
                let th = k as f64 * FRAC_PI_2 / 20.0;
                let diff = (t.series(th, r) - t.series(th, r + 10)).abs();
                assert!(diff <= th * LobachevskyTable::tail_bound(th, r) + 1e-15);
            }
        }
    }

    #[test]
    fn orthoscheme_special_cases() {
        let t = LobachevskyTable::new(1e-16);
        let g = 0.4;
        let v = t.orthoscheme(FRAC_PI_2, g);
        assert!((v - 0.25 * (t.eval(FRAC_PI_2 + g) + t.eval(FRAC_PI_2 - g))).abs() < 1e-15);
        let a = PI / 4.0;
        let q = |x: f64| lobachevsky_quadrature(x);
        let expected = 0.25 * (q(5.0 * PI / 12.0) + q(PI / 12.0) + 2.0 * q(PI / 4.0));
        assert!((t.orthoscheme(a, PI / 6.0) - expected).abs() < 1e-10);
        assert!((t.orthoscheme(0.3, 0.3) - 0.25 * (t.eval(0.6) + 2.0 * t.eval(FRAC_PI_2 - 0.3))).abs() < 1e-15);
    }

    #[test]
    fn ball_volume_and_inverse() {
        assert_eq!(ball_volume(0.0), 0.0);
        assert!((ball_volume(1.0) - PI * (2f64.sinh() - 2.0)).abs() < 1e-12);
        assert!((ball_volume(1.0) - 5.110_932_705_708_289).abs() < 1e-12);
        assert!((inverse_ball_volume(ball_volume(2.0)) - 2.0).abs() < 1e-12);
        for k in 1..100 {
            let r = 0.013 * k as f64 * k as f64 / 10.0;
            assert!((inverse_ball_volume(ball_volume(r)) - r).abs() < 1e-12 * r.max(1.0));
        }
        // small radii agree with the Euclidean ball
        let r = 1e-3;
        assert!((ball_volume(r) / (4.0 / 3.0 * PI * r.powi(3)) - 1.0).abs() < 1e-5);
    }

    fn regular_ideal_tetrahedron() -> [V3; 4] {
        let s = 1.0 / 3f64.sqrt();
        [V3::new(s, s, s), V3::new(s, -s, -s), V3::new(-s, s, -s), V3::new(-s, -s, s)]
    }

    #[test]
    fn ideal_regular_tetrahedron() {
        let t = LobachevskyTable::new(1e-16);
        let v = t.tetrahedron(regular_ideal_tetrahedron());
        assert!((v - 1.0149416064096536).abs() < 1e-10, "{v}");
        let faces: Vec<Vec<V3>> = {
            let p = regular_ideal_tetrahedron();
            vec![vec![p[0], p[1], p[2]], vec![p[0], p[1], p[3]], vec![p[0], p[2], p[3]], vec![p[1], p[2], p[3]]]
        };
        let total = t.polyhedron(&faces, V3::ZERO);
        assert!((total - 1.0149416064096536).abs() < 1e-10);
    }

    #[test]
    fn finite_tetrahedron_splits_additively() {
        let t = LobachevskyTable::new(1e-16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut p = [V3::ZERO; 4];
            for v in p.iter_mut() {
                loop {
                    let c = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if c.norm() < 0.95 {
                        *v = c;
                        break;
                    }
                }
            }
            let whole = t.tetrahedron(p);
            // barycentric split at an interior point
            let c = (p[0] + p[1] + p[2] + p[3]).scale(0.25);
            let parts = t.tetrahedron([c, p[1], p[2], p[3]])
                + t.tetrahedron([p[0], c, p[2], p[3]])
                + t.tetrahedron([p[0], p[1], c, p[3]])
                + t.tetrahedron([p[0], p[1], p[2], c]);
            assert!((whole - parts).abs() < 1e-9 * (1.0 + whole), "{whole} vs {parts}");
            // relabelling invariance
            let perm = t.tetrahedron([p[2], p[0], p[3], p[1]]);
            assert!((whole - perm).abs() < 1e-9 * (1.0 + whole));
        }
    }
}
