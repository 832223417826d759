#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use kleinian::ball::{translation_to, Point, V3};
use kleinian::basis::{exterior, BasisOptions};
use kleinian::config::JobConfig;
use kleinian::field::{FieldSpec, NumberField};
use kleinian::group::{Group, GroupElement};
use kleinian::lattice::GramForm;
use kleinian::poly::ExteriorDomain;
use kleinian::quat::QuatOrder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load_config(name: &str) -> JobConfig {
    JobConfig::load(&config_path(name)).unwrap()
}

/// `M_2(O_F)` for the field cut out by `coeffs` (leading coefficient first).
pub fn bianchi(coeffs: &[i64]) -> QuatOrder {
    let f = NumberField::new(&FieldSpec { coefficients: coeffs.to_vec(), ..Default::default() }).unwrap();
    QuatOrder::matrix_order(f).unwrap()
}

/// `-int_0^theta ln(2 sin u) du` for `theta` in `[0, pi]`: the `ln u` part
/// exactly, the smooth remainder by adaptive Simpson.
pub fn lobachevsky_quadrature(theta: f64) -> f64 {
    fn g(u: f64) -> f64 {
        if u == 0.0 { 0.0 } else { (u.sin() / u).ln() }
    }
    #[allow(clippy::too_many_arguments)]
    fn adapt(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (g(0.5 * (a + m)), g(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            adapt(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adapt(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if theta == 0.0 {
        return 0.0;
    }
    let (fa, fm, fb) = (g(0.0), g(0.5 * theta), g(theta));
    let whole = theta / 6.0 * (fa + 4.0 * fm + fb);
    let smooth = adapt(0.0, theta, fa, fm, fb, whole, 1e-14, 50);
    -(theta * 2f64.ln() + theta * theta.ln() - theta + smooth)
}

/// Hyperbolic volume of a ball of radius `r`.
pub fn ball_volume_oracle(r: f64) -> f64 {
    PI * ((2.0 * r).sinh() - 2.0 * r)
}

/// Exhaustive search over the box `|x_i| <= sqrt(bound * (G^-1)_ii)`, one of
/// each `+-x` with first nonzero entry positive.
pub fn box_search(g: &[Vec<f64>], bound: f64) -> Vec<Vec<i64>> {
    let n = g.len();
    let inv = invert(g);
    let r: Vec<i64> = (0..n).map(|i| (bound * inv[i][i]).max(0.0).sqrt().floor() as i64 + 1).collect();
    let mut out = Vec::new();
    let mut x: Vec<i64> = r.iter().map(|&b| -b).collect();
    loop {
        let first = x.iter().find(|&&e| e != 0);
        if first.is_none_or(|&e| e > 0) && quad(g, &x) <= bound {
            out.push(x.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                out.sort();
                return out;
            }
            if x[k] < r[k] {
                x[k] += 1;
                break;
            }
            x[k] = -r[k];
            k += 1;
        }
    }
}

pub fn quad(g: &[Vec<f64>], x: &[i64]) -> f64 {
    let mut s = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            s += g[i][j] * x[i] as f64 * x[j] as f64;
        }
    }
    s
}

/// Gauss-Jordan inverse.
pub fn invert(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] -= f * a[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

/// A random positive-definite Gram matrix `A^T A + s I` with integer-ish scale.
pub fn random_form<R: Rng>(n: usize, rng: &mut R) -> GramForm {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let s = rng.gen_range(0.05..0.5);
    let g = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { s } else { 0.0 }).collect())
        .collect();
    GramForm { g, centers: None }
}

/// Exterior domain of random translations at distances `1.0..1.6`, retried
/// until it is bounded with no ideal vertices.
pub fn synthetic_domain(seed: u64) -> (Vec<GroupElement>, ExteriorDomain) {
    let group = Group::Matrix { tol: 1e-9 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k = rng.gen_range(14..30);
        let set: Vec<GroupElement> = (0..k)
            .map(|_| {
                let dir = loop {
                    let v = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if v.norm_sqr() > 1e-4 && v.norm_sqr() <= 1.0 {
                        break v.normalized();
                    }
                };
                let d: f64 = rng.gen_range(1.0..1.6);
                group.from_matrix(translation_to(Point::from_vec3(dir.scale((d / 2.0).tanh()))))
            })
            .collect();
        let Ok(d) = exterior(&set, &BasisOptions::default()) else { continue };
        if d.bounded && d.vertices.iter().all(|v| !v.ideal) {
            return (set, d);
        }
    }
}

/// Monte-Carlo hyperbolic volume of the region of the Poincaré ball outside
/// every sphere: uniform samples in the cube `[-rho, rho]^3` weighted by the
/// hyperbolic density `(2 / (1 - |x|^2))^3`.
pub fn monte_carlo_volume(spheres: &[(V3, f64)], rho: f64, samples: usize, seed: u64) -> f64 {
    use rayon::prelude::*;
    const CHUNK: usize = 100_000;
    let chunks = samples.div_ceil(CHUNK);
    let sum: f64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(c as u64));
            let mut s = 0.0;
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let x = V3::new(rng.gen_range(-rho..rho), rng.gen_range(-rho..rho), rng.gen_range(-rho..rho));
                let n = x.norm_sqr();
                if n >= 1.0 || spheres.iter().any(|&(c, r)| (x - c).norm_sqr() < r * r) {
                    continue;
                }
                let l = 2.0 / (1.0 - n);
                s += l * l * l;
            }
            s
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum / samples as f64 * (2.0 * rho).powi(3)
}
