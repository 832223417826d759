mod common;

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use kleinian::ball::{dist, Isometry, Mat2, Point, V3};
use kleinian::basis::free_reduce;
use kleinian::export::{parse_word, word_text};
use kleinian::field::NumberField;
use kleinian::group::Letter;
use kleinian::lattice::fincke_pohst;
use kleinian::quat::{QuatElement, QuatOrder, SplittingData};
use kleinian::vol::LobachevskyTable;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn sextic_order() -> &'static QuatOrder {
    static ORDER: OnceLock<QuatOrder> = OnceLock::new();
    ORDER.get_or_init(|| load_config("sextic92779.toml").order().unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Unit-determinant matrices with entries of moderate size.
fn matrix() -> impl Strategy<Value = Mat2> {
    (complex(), complex(), complex()).prop_filter_map("small a", |(a, b, c)| {
        (a.norm() > 0.3).then(|| Mat2::new(a, b, c, (Complex64::new(1.0, 0.0) + b * c) / a))
    })
}

fn ball_point() -> impl Strategy<Value = Point> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..0.9f64).prop_filter_map("zero direction", |(x, y, z, r)| {
        let v = V3::new(x, y, z);
        (v.norm() > 1e-3).then(|| Point::from_vec3(v.normalized().scale(r)))
    })
}

fn close(a: V3, b: V3, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn coords(dim: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, dim)
}

fn word(gens: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..gens, any::<bool>()).prop_map(|(gen, inv)| Letter { gen, inv }), 0..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn action_is_compatible_with_composition(g in matrix(), h in matrix(), w in ball_point()) {
        let (gi, hi) = (Isometry::new(g), Isometry::new(h));
        let gh = Isometry::new(g.mul(&h));
        let lhs = gh.act_unchecked(w).to_vec3();
        let rhs = gi.act_unchecked(hi.act_unchecked(w)).to_vec3();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn invrad_is_four_over_radius_squared(g in matrix()) {
        let iso = Isometry::new(g);
        if let Some(s) = iso.sphere {
            let expected = 4.0 / (s.radius * s.radius);
            prop_assert!((iso.invrad - expected).abs() <= 1e-9 * expected);
        }
    }

    #[test]
    fn height_transforms_by_the_denominator(g in matrix(), w in ball_point()) {
        let iso = Isometry::new(g);
        let img = iso.act_unchecked(w);
        let lhs = 1.0 - img.norm_sqr();
        let rhs = 4.0 / iso.denom_sqr(w.to_ham()) * (1.0 - w.norm_sqr());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300) + 1e-15);
    }

    #[test]
    fn norm_measures_displacement_of_the_origin(g in matrix()) {
        let iso = Isometry::new(g);
        let d = dist(Point::ORIGIN, iso.act_unchecked(Point::ORIGIN));
        prop_assert!((iso.norm * iso.norm - 2.0 * d.cosh()).abs() <= 1e-9 * iso.norm * iso.norm);
    }

    #[test]
    fn reduced_norm_is_multiplicative(a in coords(24), b in coords(24)) {
        let o = sextic_order();
        let alg = &o.algebra;
        let (p, q) = (o.element(&a), o.element(&b));
        let lhs = alg.nrd(&alg.mul(&p, &q));
        let rhs = alg.field.mul(&alg.nrd(&p), &alg.nrd(&q));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn element_times_conjugate_is_its_norm(a in coords(24)) {
        let o = sextic_order();
        let alg = &o.algebra;
        let p = o.element(&a);
        let n = alg.field.degree();
        let z = alg.field.zero();
        let expected = QuatElement::new(alg.nrd(&p), z.clone(), z.clone(), z);
        prop_assert_eq!(alg.mul(&p, &p.conj()), expected);
        prop_assert_eq!(p.parts()[0].degree(), n);
    }

    #[test]
    fn splitting_determinant_is_the_embedded_norm(a in coords(24)) {
        let o = sextic_order();
        let alg = &o.algebra;
        let p = o.element(&a);
        let det = SplittingData::new(alg).split(alg, &p).det();
        let nrd = alg.field.embed_sigma(&alg.nrd(&p));
        prop_assert!((det - nrd).norm() <= 1e-9 * (1.0 + nrd.norm()));
    }

    #[test]
    fn embeddings_are_ring_homomorphisms(a in prop::collection::vec(-5i64..=5, 6), b in prop::collection::vec(-5i64..=5, 6)) {
        let f: &NumberField = &sextic_order().algebra.field;
        let elt = |c: &[i64]| {
            c.iter().enumerate().fold(f.zero(), |acc, (k, &x)| &acc + &f.mul(&f.from_int(x), &f.integral_element(k)))
        };
        let (x, y) = (elt(&a), elt(&b));
        let xy = f.mul(&x, &y);
        for place in f.places() {
            let lhs = f.embed(&xy, place);
            let rhs = f.embed(&x, place) * f.embed(&y, place);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn lobachevsky_duplication_and_oddness(theta in -3.0..3.0f64) {
        let t = LobachevskyTable::new(1e-16);
        let dup = t.eval(2.0 * theta) - 2.0 * t.eval(theta) - 2.0 * t.eval(theta + FRAC_PI_2);
        prop_assert!(dup.abs() <= 1e-10);
        prop_assert!((t.eval(-theta) + t.eval(theta)).abs() <= 1e-14);
    }

    #[test]
    fn tetrahedron_volume_is_relabelling_invariant(seed in any::<u64>()) {
        let t = LobachevskyTable::new(1e-16);
        let (_, d) = synthetic_domain(seed % 1000);
        let faces = d.face_polygons();
        let a = t.polyhedron(&faces, V3::ZERO);
        let rotated: Vec<Vec<V3>> = faces.iter().map(|f| {
            let mut f = f.clone();
            f.rotate_left(1);
            f
        }).collect();
        let b = t.polyhedron(&rotated, V3::ZERO);
        prop_assert!(a > 0.0 && (a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn words_survive_text_round_trip(w in word(7)) {
        let text = word_text(&w);
        prop_assert_eq!(parse_word(&text, 7).unwrap(), w);
    }

    #[test]
    fn free_reduction_is_idempotent_and_reduced(w in word(3)) {
        let r = free_reduce(&w);
        prop_assert_eq!(free_reduce(&r), r.clone());
        prop_assert!(r.windows(2).all(|p| !(p[0].gen == p[1].gen && p[0].inv != p[1].inv)));
    }

    #[test]
    fn fincke_pohst_matches_box_search(seed in any::<u64>(), dim in 1usize..=4, bound in 0.5..12.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let form = random_form(dim, &mut rng);
        let mut fp = fincke_pohst(&form, bound).unwrap();
        fp.sort();
        prop_assert_eq!(fp, box_search(&form.g, bound));
    }
}
