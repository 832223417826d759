//! One pass/fail line per acceptance criterion.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use kleinian::ball::{dist, Point, V3};
use kleinian::basis::domain_volume;
use kleinian::export::RunExport;
use kleinian::group::{eval_word, Letter};
use kleinian::lattice::{enumerate_deterministic, fincke_pohst, gram_of_q, gram_of_q_centers, random_ball_point};
use kleinian::master::{run_master, Backend, MasterOptions, RunResult};
use kleinian::quat::QuatOrder;
use kleinian::reduce::{reduce_element, PrecisionBudget};
use kleinian::vol::LobachevskyTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

struct Run {
    label: &'static str,
    order: QuatOrder,
    result: RunResult,
    seconds: f64,
    budget: PrecisionBudget,
}

fn run_config(label: &'static str, file: &str) -> Result<Run, String> {
    let cfg = load_config(file);
    let order = cfg.order().map_err(|e| e.to_string())?;
    let opts = cfg.master_options().map_err(|e| e.to_string())?;
    let t = Instant::now();
    let result = run_master(&order, &opts).map_err(|e| format!("{label}: {e}"))?;
    Ok(Run { label, order, result, seconds: t.elapsed().as_secs_f64(), budget: cfg.budget().unwrap() })
}

fn covolume_formula() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (coeffs, expected) in [([1i64, 1, 1], 0.169), ([1, 1, 4], 3.139), ([1, 1, 6], 6.449)] {
        let t = Instant::now();
        let order = bianchi(&coeffs);
        let z = order.algebra.field.dedekind_zeta_2(1_000_000).map_err(|e| e.to_string())?;
        let c = order.covolume(z.value).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        ok &= (c - expected).abs() <= 0.002 && secs < 10.0;
        parts.push(format!("disc {} covol {c:.5} ({secs:.2}s)", order.algebra.field.discriminant()));
    }
    check(ok, parts.join(", "))
}

fn end_to_end(r: &Run) -> Outcome {
    let ratio = r.result.volume_ratio();
    check(
        (ratio - 1.0).abs() <= 1e-4 && r.seconds < 600.0,
        format!("volume {:.8} covolume {:.8} ratio {ratio:.9} in {:.2}s", r.result.basis.volume, r.result.covolume, r.seconds),
    )
}

fn sextic(r: &Run) -> Outcome {
    let d = &r.result.basis.domain;
    let ratio = r.result.volume_ratio();
    check(
        (r.result.covolume - 0.3007).abs() <= 0.001 && (ratio - 1.0).abs() <= 1e-4,
        format!(
            "covolume {:.7} volume {:.7} ratio {ratio:.9}; faces {} edges {} (reference 18/42) in {:.2}s",
            r.result.covolume,
            r.result.basis.volume,
            d.faces.len(),
            d.edges.len(),
            r.seconds
        ),
    )
}

fn poincare_suite(runs: &[&Run]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs {
        let rep = &r.result.basis.report;
        let d = &r.result.basis.domain;
        let euler = d.vertices.iter().filter(|v| !v.faces.is_empty()).count() as i64 - d.edges.len() as i64 + d.faces.len() as i64;
        let this = rep.paired
            && rep.cycles_ok
            && rep.max_angle_error <= 1e-6
            && rep.max_power_error <= 1e-6
            && rep.complete
            && rep.max_tangency_trace_error <= 1e-6
            && (!d.bounded || euler == 2);
        ok &= this;
        parts.push(format!(
            "{}: cycles {} angle err {:.1e} power err {:.1e} tangencies {} trace err {:.1e} F-E+V {euler}",
            r.label, rep.cycle_count, rep.max_angle_error, rep.max_power_error, rep.tangency_count, rep.max_tangency_trace_error
        ));
    }
    check(ok, parts.join("; "))
}

fn word_problem(r: &Run) -> Outcome {
    let res = &r.result;
    let group = &res.group;
    let basis = &res.basis.elements;
    let gens = res.presentation.generator_elements(basis);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let len = rng.gen_range(0..=20);
        let word: Vec<Letter> = (0..len).map(|_| Letter { gen: rng.gen_range(0..gens.len()), inv: rng.gen() }).collect();
        let gamma = eval_word(group, &gens, &word).map_err(|e| e.to_string())?;
        let w = res.presentation.word_for(group, basis, &gamma, &r.budget).map_err(|e| e.to_string())?.ok_or("word not found")?;
        let back = eval_word(group, &gens, &w).map_err(|e| e.to_string())?;
        worst = worst.max(back.iso.m.dist_pm(&gamma.iso.m) / (1.0 + gamma.iso.m.norm_sqr().sqrt()));
    }
    // random norm-one elements: products of enumerated lattice points
    let pool: Vec<_> = enumerate_deterministic(group, res.basis.enumeration_level + 1)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|g| !group.is_trivial(g))
        .collect();
    let mut reduced = 0;
    for _ in 0..100 {
        let mut g = pool[rng.gen_range(0..pool.len())].clone();
        for _ in 0..rng.gen_range(0..3) {
            g = group.mul(&g, &pool[rng.gen_range(0..pool.len())]).map_err(|e| e.to_string())?;
        }
        let (bar, _) = reduce_element(group, &g, Point::ORIGIN, basis, &r.budget).map_err(|e| e.to_string())?;
        reduced += group.is_trivial(&bar) as usize;
    }
    check(
        worst <= 1e-6 && reduced == 100,
        format!("100 words: worst relative matrix error {worst:.1e}; {reduced}/100 norm-one elements reduce to +-1"),
    )
}

fn quadratic_forms(r: &Run) -> Outcome {
    let group = &r.result.group;
    let a = group.arithmetic().ok_or("not arithmetic")?;
    let n = r.order.degree() as f64;
    let q = gram_of_q(a).map_err(|e| format!("Q: {e}"))?;
    let elements = enumerate_deterministic(group, r.result.basis.enumeration_level).map_err(|e| e.to_string())?;
    let coords = |g: &kleinian::group::GroupElement| -> Vec<i64> { g.coords.as_ref().unwrap().iter().map(|&c| c as i64).collect() };
    let mut worst = 0.0f64;
    for g in &elements {
        let expected = match g.iso.sphere {
            Some(s) => 4.0 / (s.radius * s.radius) + n,
            None => n,
        };
        worst = worst.max((q.eval(&coords(g)) - expected).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_c = 0.0f64;
    for _ in 0..100 {
        let w1 = random_ball_point(1.0, &mut rng);
        let w2 = random_ball_point(1.0, &mut rng);
        let form = gram_of_q_centers(a, w1, w2).map_err(|e| format!("Q_w1,w2: {e}"))?;
        for g in &elements {
            let expected = 2.0 * dist(g.iso.act_unchecked(w1), w2).cosh() - 2.0 + n;
            worst_c = worst_c.max((form.eval(&coords(g)) - expected).abs());
        }
    }
    check(
        worst <= 1e-6 && worst_c <= 1e-6,
        format!("{} elements: Q err {worst:.1e}, Q_w1,w2 err {worst_c:.1e} over 100 centre pairs; all Gram matrices positive definite", elements.len()),
    )
}

fn lattice_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0;
    for k in 0..50 {
        let dim = 1 + k % 6;
        let form = random_form(dim, &mut rng);
        let bound = rng.gen_range(4.0..16.0);
        let mut fp = fincke_pohst(&form, bound).map_err(|e| e.to_string())?;
        fp.sort();
        let oracle = box_search(&form.g, bound);
        if fp != oracle {
            return Err(format!("form {k} (dim {dim}): {} vs {} vectors", fp.len(), oracle.len()));
        }
        total += fp.len();
    }
    Ok(format!("50 forms, {total} vectors, exact agreement"))
}

fn lobachevsky() -> Outcome {
    let t = LobachevskyTable::new(1e-16);
    let grid: Vec<f64> = (0..100).map(|k| FRAC_PI_2 * k as f64 / 99.0).collect();
    let quad = grid.iter().map(|&th| (t.eval(th) - lobachevsky_quadrature(th)).abs()).fold(0.0, f64::max);
    let dup = grid
        .iter()
        .map(|&th| (t.eval(2.0 * th) - 2.0 * t.eval(th) - 2.0 * t.eval(th + FRAC_PI_2)).abs())
        .fold(0.0, f64::max);
    let mut tail_ok = true;
    for r in 1..15 {
        for &th in &grid[1..] {
            let err = (t.series(th, r) - lobachevsky_quadrature(th)).abs();
            tail_ok &= err <= th * LobachevskyTable::tail_bound(th, r) + 1e-12;
        }
    }
    check(quad <= 1e-9 && dup <= 1e-10 && tail_ok, format!("quadrature err {quad:.1e}, duplication err {dup:.1e}, tail bounds honored {tail_ok}"))
}

/// Splits the Klein polytope by the plane `n . x = c`.
fn split(faces: &[Vec<V3>], n: V3, c: f64) -> [Vec<Vec<V3>>; 2] {
    let mut halves: [Vec<Vec<V3>>; 2] = [Vec::new(), Vec::new()];
    let mut cut = Vec::new();
    for face in faces {
        for (side, sign) in [(0, 1.0), (1, -1.0)] {
            let f = |x: V3| sign * (n.dot(x) - c);
            let mut out = Vec::new();
            for k in 0..face.len() {
                let (p, q) = (face[k], face[(k + 1) % face.len()]);
                let (fp, fq) = (f(p), f(q));
                if fp <= 0.0 {
                    out.push(p);
                }
                if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
                    let x = p.lerp(q, fp / (fp - fq));
                    out.push(x);
                    if side == 0 {
                        cut.push(x);
                    }
                }
            }
            if out.len() >= 3 {
                halves[side].push(out);
            }
        }
    }
    // cap polygon: cut points ordered by angle about their centroid
    let centre = cut.iter().fold(V3::ZERO, |a, &b| a + b).scale(1.0 / cut.len() as f64);
    let u = (cut[0] - centre).normalized();
    let w = n.normalized().cross(u);
    cut.sort_by(|a, b| {
        let (x, y) = (*a - centre, *b - centre);
        x.dot(w).atan2(x.dot(u)).total_cmp(&y.dot(w).atan2(y.dot(u)))
    });
    cut.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    halves[0].push(cut.clone());
    halves[1].push(cut);
    halves
}

fn centroid(faces: &[Vec<V3>]) -> V3 {
    let pts: Vec<V3> = faces.iter().flatten().copied().collect();
    pts.iter().fold(V3::ZERO, |a, &b| a + b).scale(1.0 / pts.len() as f64)
}

fn volume_engine() -> Outcome {
    let t = LobachevskyTable::new(1e-16);
    let mut worst_mc = 0.0f64;
    let mut worst_split = 0.0f64;
    for k in 0..10u64 {
        let (set, d) = synthetic_domain(100 + k);
        let vol = domain_volume(&d, &t).map_err(|e| e.to_string())?;
        let spheres: Vec<(V3, f64)> = set.iter().filter_map(|g| g.iso.sphere).map(|s| (s.center, s.radius)).collect();
        let rho = d.vertices.iter().filter(|v| !v.faces.is_empty()).map(|v| v.point().to_vec3().norm()).fold(0.0, f64::max);
        let mc = monte_carlo_volume(&spheres, (rho + 1e-3).min(1.0), 10_000_000, k);
        worst_mc = worst_mc.max((mc / vol - 1.0).abs());
        let faces = d.face_polygons();
        let normal = V3::new(0.3, -0.5, 0.8).normalized();
        let [a, b] = split(&faces, normal, 0.05);
        let parts = t.polyhedron(&a, centroid(&a)) + t.polyhedron(&b, centroid(&b));
        worst_split = worst_split.max((parts - vol).abs());
    }
    check(
        worst_mc <= 0.01 && worst_split <= 1e-6,
        format!("10 polyhedra: worst Monte-Carlo deviation {:.3}%, splitting err {worst_split:.1e}", 100.0 * worst_mc),
    )
}

fn enumeration_statistics() -> Outcome {
    let r = 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut radii: Vec<f64> = (0..100_000).map(|_| dist(Point::ORIGIN, random_ball_point(r, &mut rng))).collect();
    radii.sort_by(f64::total_cmp);
    let m = radii.len() as f64;
    let ks = radii
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ball_volume_oracle(x) / ball_volume_oracle(r);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    let order = bianchi(&[1, 1, 1]);
    let opts = MasterOptions { backend: Backend::Probabilistic, seed: 42, ..MasterOptions::default() };
    let json = |o: &MasterOptions| -> Result<String, String> {
        let res = run_master(&order, o).map_err(|e| e.to_string())?;
        RunExport::new(&res, None, o.seed).to_json().map_err(|e| e.to_string())
    };
    let (first, second) = (json(&opts)?, json(&opts)?);
    check(ks < 0.01 && first == second, format!("KS statistic {ks:.4}; seeded probabilistic runs byte-identical {}", first == second))
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut line = |id: u32, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(d) => println!("PASS {id:>2} {name}: {d}"),
            Err(d) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: {d}")
            }
        }
    };
    line(1, "covolume formula", covolume_formula());
    let runs: Vec<Result<Run, String>> = vec![
        run_config("disc -3", "bianchi3.toml"),
        run_config("sextic", "sextic92779.toml"),
        run_config("disc -15", "bianchi15.toml"),
        run_config("disc -23", "bianchi23.toml"),
    ];
    let ok: Vec<&Run> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let err = |k: usize| runs[k].as_ref().err().cloned().unwrap_or_default();
    let eisenstein = runs[0].as_ref().ok();
    line(2, "end-to-end Bianchi -3", eisenstein.map_or_else(|| Err(err(0)), end_to_end));
    line(3, "sextic field -92779", runs[1].as_ref().map_or_else(|_| Err(err(1)), sextic));
    let failed: Vec<String> = runs.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    line(4, "Poincare suite", if failed.is_empty() { poincare_suite(&ok) } else { Err(failed.join("; ")) });
    line(5, "word problem", eisenstein.map_or_else(|| Err(err(0)), word_problem));
    line(6, "quadratic-form identities", eisenstein.map_or_else(|| Err(err(0)), quadratic_forms));
    line(7, "lattice enumeration oracle", lattice_oracle());
    line(8, "Lobachevsky function", lobachevsky());
    line(9, "volume engine", volume_engine());
    line(10, "probabilistic enumeration", enumeration_statistics());
    println!("acceptance: {} failed, {:.1}s", failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
