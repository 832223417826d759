//! Positive-definite forms on the order lattice, Fincke-Pohst enumeration and
//! the two enumeration backends.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{translation_to, Mat2, Point, V3};
use crate::error::{Error, Result};
use crate::field::rat_to_f64;
use crate::group::{canonical_coords, ArithmeticGroup, Group, GroupElement};
use crate::vol::{ball_volume, inverse_ball_volume};

/// A symmetric matrix `G` with `Q(x) = x^T G x` on basis coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramForm {
    pub g: Vec<Vec<f64>>,
    /// Ball points `(w1, w2)` for the form `Q_{w1,w2}`; `None` for `Q`.
    pub centers: Option<([f64; 3], [f64; 3])>,
}

/// `invrad` polarised: `Re<M,N> - Re(a_M d_N + a_N d_M - b_M c_N - b_N c_M)`.
fn invrad_bilinear(m: &Mat2, n: &Mat2) -> f64 {
    let frob = (m.a * n.a.conj() + m.b * n.b.conj() + m.c * n.c.conj() + m.d * n.d.conj()).re;
    let det = (m.a * n.d + n.a * m.d - m.b * n.c - n.b * m.c).re;
    frob - det
}

impl GramForm {
    fn build(order_trace: &[Vec<f64>], images: &[Mat2], centers: Option<([f64; 3], [f64; 3])>) -> Result<Self> {
        let dim = images.len();
        let mut g = vec![vec![0.0; dim]; dim];
        for k in 0..dim {
            for l in k..dim {
                let v = invrad_bilinear(&images[k], &images[l]) + order_trace[k][l];
                g[k][l] = v;
                g[l][k] = v;
            }
        }
        let form = Self { g, centers };
        form.cholesky()?;
        Ok(form)
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        let mut s = 0.0;
        for (k, row) in self.g.iter().enumerate() {
            if x[k] == 0 {
                continue;
            }
            let r: f64 = row.iter().zip(x).map(|(a, &b)| a * b as f64).sum();
            s += r * x[k] as f64;
        }
        s
    }

    /// Quadratic completion `Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
    fn cholesky(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut q = self.g.clone();
        for i in 0..n {
            if !(q[i][i] > 0.0) {
                return Err(Error::NotPositiveDefinite(i));
            }
            for j in i + 1..n {
                q[j][i] = q[i][j];
                q[i][j] /= q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    q[k][l] -= q[k][i] * q[i][l];
                }
            }
        }
        Ok(q)
    }
}

fn trace_matrix(group: &ArithmeticGroup) -> Vec<Vec<f64>> {
    group.order.trace_form().iter().map(|row| row.iter().map(rat_to_f64).collect()).collect()
}

/// `Q(x) = invrad(rho(x)) + tr_{F/Q}(nrd(x))`.
pub fn gram_of_q(group: &ArithmeticGroup) -> Result<GramForm> {
    GramForm::build(&trace_matrix(group), &group.images, None)
}

/// `Q_{w1,w2}(x) = invrad(h2^{-1} rho(x) h1) + tr_{F/Q}(nrd(x))` with `h_i 0 = w_i`.
pub fn gram_of_q_centers(group: &ArithmeticGroup, w1: Point, w2: Point) -> Result<GramForm> {
    let h1 = translation_to(w1);
    let h2i = translation_to(w2).adjugate();
    let moved: Vec<Mat2> = group.images.iter().map(|m| h2i.mul(m).mul(&h1)).collect();
    GramForm::build(&trace_matrix(group), &moved, Some((w1.to_vec3().0, w2.to_vec3().0)))
}

/// All `x` with `x^T G x <= bound`, one of each pair `+-x` (first nonzero
/// entry positive), zero included, in a deterministic order.
pub fn fincke_pohst(form: &GramForm, bound: f64) -> Result<Vec<Vec<i64>>> {
    let q = form.cholesky()?;
    let n = form.dim();
    let slack = bound.abs() * 1e-9 + 1e-9;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    // partial sums from the top index down
    fn rec(q: &[Vec<f64>], i: usize, rem: f64, x: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, form: &GramForm, bound: f64) {
        let n = q.len();
        let c: f64 = -(i + 1..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
        let r = (rem.max(0.0) / q[i][i]).sqrt();
        let lo = (c - r - 1e-12).ceil() as i64;
        let hi = (c + r + 1e-12).floor() as i64;
        for v in lo..=hi {
            x[i] = v;
            let t = v as f64 - c;
            let left = rem - q[i][i] * t * t;
            if left < -1e-12 * (1.0 + rem.abs()) {
                continue;
            }
            if i == 0 {
                let first = x.iter().find(|&&e| e != 0);
                if first.is_none_or(|&e| e > 0) && form.eval(x) <= bound {
                    out.push(x.clone());
                }
            } else {
                rec(q, i - 1, left, x, out, form, bound);
            }
        }
        x[i] = 0;
    }
    if n == 0 || bound < 0.0 {
        return Ok(out);
    }
    rec(&q, n - 1, bound + slack, &mut x, &mut out, form, bound);
    Ok(out)
}

/// Constants of the probabilistic schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub epsilon: f64,
}

impl Default for EnumParams {
    fn default() -> Self {
        Self { alpha: 10.0, beta: 2.0, gamma: 2.2, eta: 0.5, epsilon: 0.3 }
    }
}

/// `A_n = n_deg + 2^n` for the deterministic backend.
pub fn deterministic_bound(degree: usize, n: u32) -> f64 {
    degree as f64 + 2f64.powi(n as i32)
}

/// Norm-one elements with the given coordinates, minus `+-1`.
fn norm_one(group: &ArithmeticGroup, wrapper: &Group, xs: Vec<Vec<i64>>) -> Vec<GroupElement> {
    xs.into_iter()
        .filter(|x| group.order.has_unit_norm(x))
        .map(|x| wrapper.from_coords_i64(&x))
        .filter(|g| !wrapper.is_trivial(g))
        .collect()
}

/// Norm-one `x` with `Q(x) <= A_n`.
pub fn enumerate_deterministic(group: &Group, n: u32) -> Result<Vec<GroupElement>> {
    let a = group.arithmetic().ok_or_else(|| Error::Config("lattice enumeration needs an arithmetic group".into()))?;
    let form = gram_of_q(a)?;
    let bound = deterministic_bound(a.order.degree(), n);
    Ok(norm_one(a, group, fincke_pohst(&form, bound)?))
}

/// The probabilistic schedule at step `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbSchedule {
    pub bound: f64,
    pub centers: usize,
    pub radius: f64,
}

pub fn probabilistic_schedule(params: &EnumParams, degree: usize, disc_norm: f64, covol: f64, n: u32) -> ProbSchedule {
    let bound = params.alpha * disc_norm.abs().powf(1.0 / (4.0 * degree as f64));
    let n0 = params.beta * covol * covol;
    let centers = ((1.0 + params.eta).powi(n as i32) * n0).ceil().max(1.0) as usize;
    let r0 = inverse_ball_volume(covol.powf(params.gamma));
    ProbSchedule { bound, centers, radius: r0 + params.epsilon * n as f64 }
}

/// Norm-one `x` with `Q_{0,w}(x) <= A` for random centres `w`.
pub fn enumerate_probabilistic<R: Rng>(group: &Group, schedule: &ProbSchedule, rng: &mut R) -> Result<Vec<GroupElement>> {
    let a = group.arithmetic().ok_or_else(|| Error::Config("lattice enumeration needs an arithmetic group".into()))?;
    let centers: Vec<Point> = (0..schedule.centers).map(|_| random_ball_point(schedule.radius, rng)).collect();
    let found: Vec<Vec<Vec<i64>>> = centers
        .par_iter()
        .map(|&w| {
            let form = gram_of_q_centers(a, Point::ORIGIN, w)?;
            Ok(fincke_pohst(&form, schedule.bound)?.into_iter().filter(|x| a.order.has_unit_norm(x)).collect())
        })
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for xs in found {
        for x in xs {
            let key = canonical_coords(&x.iter().map(|&c| c as i128).collect::<Vec<_>>());
            if seen.insert(key) {
                let g = group.from_coords_i64(&x);
                if !group.is_trivial(&g) {
                    out.push(g);
                }
            }
        }
    }
    Ok(out)
}

/// A point uniformly distributed for the hyperbolic volume in the ball of
/// radius `r` about the origin.
pub fn random_ball_point<R: Rng>(r: f64, rng: &mut R) -> Point {
    let dir = loop {
        let v = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm_sqr();
        if n > 1e-12 && n <= 1.0 {
            break v.normalized();
        }
    };
    let u: f64 = rng.gen_range(0.0..=1.0) * ball_volume(r);
    let d = inverse_ball_volume(u);
    Point::from_vec3(dir.scale((d / 2.0).tanh()))
}
