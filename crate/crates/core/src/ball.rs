//! The unit-ball model of hyperbolic 3-space: Hamilton quaternions, points,
//! isometries acting through their quaternionic coefficients, distances and
//! isometric spheres.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A real Hamilton quaternion `c0 + c1 j` with complex `c0, c1`
/// (`j z = conj(z) j`, `j^2 = -1`).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Ham {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Ham {
    pub const fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { c0, c1 }
    }

    pub fn real(x: f64) -> Self {
        Self { c0: Complex64::new(x, 0.0), c1: ZERO }
    }

    pub fn j() -> Self {
        Self { c0: ZERO, c1: ONE }
    }

    pub fn conj(self) -> Self {
        Self { c0: self.c0.conj(), c1: -self.c1 }
    }

    pub fn norm_sqr(self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self { c0: self.c0 * s, c1: self.c1 * s }
    }

    pub fn inv(self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    pub fn to_vec3(self) -> V3 {
        V3([self.c0.re, self.c0.im, self.c1.re])
    }
}

impl Add for Ham {
    type Output = Ham;
    fn add(self, o: Ham) -> Ham {
        Ham { c0: self.c0 + o.c0, c1: self.c1 + o.c1 }
    }
}

impl Sub for Ham {
    type Output = Ham;
    fn sub(self, o: Ham) -> Ham {
        Ham { c0: self.c0 - o.c0, c1: self.c1 - o.c1 }
    }
}

impl Neg for Ham {
    type Output = Ham;
    fn neg(self) -> Ham {
        Ham { c0: -self.c0, c1: -self.c1 }
    }
}

impl Mul for Ham {
    type Output = Ham;
    fn mul(self, q: Ham) -> Ham {
        Ham {
            c0: self.c0 * q.c0 - self.c1 * q.c1.conj(),
            c1: self.c0 * q.c1 + self.c1 * q.c0.conj(),
        }
    }
}

/// Euclidean 3-vector `(Re z, Im z, t)` for the point `z + t j`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct V3(pub [f64; 3]);

impl V3 {
    pub const ZERO: V3 = V3([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        V3([x, y, z])
    }

    pub fn dot(self, o: V3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: V3) -> V3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        V3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> V3 {
        V3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn normalized(self) -> V3 {
        self.scale(1.0 / self.norm())
    }

    pub fn to_ham(self) -> Ham {
        Ham::new(Complex64::new(self.0[0], self.0[1]), Complex64::new(self.0[2], 0.0))
    }

    pub fn lerp(self, o: V3, s: f64) -> V3 {
        self + (o - self).scale(s)
    }
}

impl Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for V3 {
    type Output = V3;
    fn sub(self, o: V3) -> V3 {
        V3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for V3 {
    type Output = V3;
    fn neg(self) -> V3 {
        self.scale(-1.0)
    }
}

/// A point of the closed ball, `w = z + t j`. Interior points have `|w| < 1`;
/// `at_infinity` marks points of the boundary sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Complex64,
    pub t: f64,
    pub at_infinity: bool,
}

impl Point {
    pub const ORIGIN: Point = Point { z: ZERO, t: 0.0, at_infinity: false };

    pub fn new(z: Complex64, t: f64) -> Self {
        Self { z, t, at_infinity: false }
    }

    pub fn from_vec3(v: V3) -> Self {
        Self::new(Complex64::new(v.0[0], v.0[1]), v.0[2])
    }

    pub fn ideal(v: V3) -> Self {
        let u = v.normalized();
        Self { at_infinity: true, ..Self::from_vec3(u) }
    }

    pub fn to_ham(self) -> Ham {
        Ham::new(self.z, Complex64::new(self.t, 0.0))
    }

    pub fn from_ham(h: Ham) -> Self {
        Self::new(h.c0, h.c1.re)
    }

    pub fn to_vec3(self) -> V3 {
        V3([self.z.re, self.z.im, self.t])
    }

    pub fn norm_sqr(self) -> f64 {
        self.z.norm_sqr() + self.t * self.t
    }
}

/// Maps the upper half-space (`t > 0`) to the ball: `(w - j)(1 - j w)^{-1}`.
pub fn eta(w: Ham) -> Ham {
    (w - Ham::j()) * (Ham::real(1.0) - Ham::j() * w).inv()
}

/// Inverse of [`eta`]: `(1 + u j)^{-1}(u + j)`.
pub fn eta_inv(u: Ham) -> Ham {
    (Ham::real(1.0) + u * Ham::j()).inv() * (u + Ham::j())
}

/// Hyperbolic distance in the ball.
pub fn dist(w: Point, w2: Point) -> f64 {
    let d = (w.to_vec3() - w2.to_vec3()).norm_sqr();
    let arg = 1.0 + 2.0 * d / ((1.0 - w.norm_sqr()) * (1.0 - w2.norm_sqr()));
    arg.max(1.0).acosh()
}

/// Hyperbolic distance in the upper half-space.
pub fn dist_upper(w: Ham, w2: Ham) -> f64 {
    let d = (w - w2).norm_sqr();
    (1.0 + d / (2.0 * w.c1.re * w2.c1.re)).max(1.0).acosh()
}

/// A 2x2 complex matrix `((a, b), (c, d))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: ONE, b: ZERO, c: ZERO, d: ONE };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Inverse of a unit-determinant matrix.
    pub fn adjugate(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        let adj = self.adjugate();
        Mat2 { a: adj.a / det, b: adj.b / det, c: adj.c / det, d: adj.d / det }
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Rescales to determinant one.
    pub fn normalized(&self) -> Mat2 {
        let s = self.det().sqrt();
        self.scale(1.0 / s)
    }

    /// Distance to `other` in PSL_2, i.e. up to sign.
    pub fn dist_pm(&self, other: &Mat2) -> f64 {
        self.sub(other).norm_sqr().sqrt().min(self.add(other).norm_sqr().sqrt())
    }

    pub fn is_pm_identity(&self, tol: f64) -> bool {
        self.dist_pm(&Mat2::IDENTITY) <= tol
    }

    /// Möbius action on the upper half-space, `(a w + b)(c w + d)^{-1}`.
    pub fn act_upper(&self, w: Ham) -> Ham {
        let a = Ham::new(self.a, ZERO);
        let b = Ham::new(self.b, ZERO);
        let c = Ham::new(self.c, ZERO);
        let d = Ham::new(self.d, ZERO);
        (a * w + b) * (c * w + d).inv()
    }
}

/// An isometric sphere: a Euclidean sphere orthogonal to the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: V3,
    pub radius: f64,
}

impl Sphere {
    /// Signed power of `x`: negative inside.
    pub fn power(&self, x: V3) -> f64 {
        (x - self.center).norm_sqr() - self.radius * self.radius
    }
}

/// An orientation-preserving isometry, stored as a unit-determinant matrix
/// together with its quaternionic ball-model coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub m: Mat2,
    pub qa: Ham,
    pub qb: Ham,
    pub qc: Ham,
    pub qd: Ham,
    pub norm: f64,
    pub invrad: f64,
    pub sphere: Option<Sphere>,
}

impl Isometry {
    pub fn new(m: Mat2) -> Self {
        let m = m.normalized();
        let (a, b, c, d) = (m.a, m.b, m.c, m.d);
        let qa = Ham::new(a + d.conj(), b - c.conj());
        let qb = Ham::new(b + c.conj(), a - d.conj());
        let qc = Ham::new(c + b.conj(), d - a.conj());
        let qd = Ham::new(d + a.conj(), c - b.conj());
        let norm2 = m.norm_sqr();
        let invrad = qc.norm_sqr();
        let sphere = (invrad > 0.0).then(|| {
            let center = -(qc.inv() * qd);
            Sphere { center: center.to_vec3(), radius: 2.0 / qc.norm() }
        });
        Self { m, qa, qb, qc, qd, norm: norm2.sqrt(), invrad, sphere }
    }

    pub fn identity() -> Self {
        Self::new(Mat2::IDENTITY)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.m.adjugate())
    }

    pub fn compose(&self, other: &Isometry) -> Self {
        Self::new(self.m.mul(&other.m))
    }

    /// `|C w + D|^2`; `g` moves `w` closer to the origin iff this exceeds 4.
    pub fn denom_sqr(&self, w: Ham) -> f64 {
        (self.qc * w + self.qd).norm_sqr()
    }

    /// `g . w` without precision checks.
    pub fn act_unchecked(&self, w: Point) -> Point {
        let h = w.to_ham();
        let img = (self.qa * h + self.qb) * (self.qc * h + self.qd).inv();
        let mut p = Point::from_ham(img);
        if w.at_infinity {
            p = Point::ideal(p.to_vec3());
        }
        p
    }

    /// `g . w`, failing when the error-propagation hypothesis
    /// `(|g| eps + 2 eta)^2 <= (1 - |w|^2)/3` does not hold.
    pub fn act(&self, w: Point, eps: f64) -> Result<Point> {
        if !w.at_infinity {
            let eta = 8.0 * eps / 3.0;
            let lhs = (self.norm * eps + 2.0 * eta).powi(2);
            if lhs > (1.0 - w.norm_sqr()) / 3.0 {
                return Err(Error::PrecisionExhausted(format!(
                    "point too close to the boundary for an isometry of norm {:.3e}",
                    self.norm
                )));
            }
        }
        Ok(self.act_unchecked(w))
    }

    pub fn act_vec(&self, v: V3) -> V3 {
        self.act_unchecked(Point::from_vec3(v)).to_vec3()
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }
}

/// A matrix sending the origin to `w`.
pub fn translation_to(w: Point) -> Mat2 {
    // In the half-space picture: j -> eta_inv(w) via h(z, t) = ((sqrt t, z/sqrt t), (0, 1/sqrt t)).
    let u = eta_inv(w.to_ham());
    let s = u.c1.re.sqrt();
    Mat2::new(s.into(), u.c0 / s, ZERO, (1.0 / s).into())
}
