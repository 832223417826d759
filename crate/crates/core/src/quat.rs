//! Quaternion algebras `(a, b | F)` over ATR fields, orders given by a
//! Z-basis, the splitting embedding into `M_2(C)` and the covolume formula.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::ball::Mat2;
use crate::error::{Error, Result};
use crate::field::{determinant, rat_to_f64, solve_exact, FieldElement, NumberField, Place};

/// `x + y i + z j + t ij` with `i^2 = a`, `j^2 = b`, `ji = -ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuatElement {
    pub x: FieldElement,
    pub y: FieldElement,
    pub z: FieldElement,
    pub t: FieldElement,
}

impl QuatElement {
    pub fn new(x: FieldElement, y: FieldElement, z: FieldElement, t: FieldElement) -> Self {
        Self { x, y, z, t }
    }

    pub fn zero(n: usize) -> Self {
        let z = FieldElement::zero(n);
        Self::new(z.clone(), z.clone(), z.clone(), z)
    }

    pub fn one(n: usize) -> Self {
        let z = FieldElement::zero(n);
        Self::new(FieldElement::one(n), z.clone(), z.clone(), z)
    }

    pub fn parts(&self) -> [&FieldElement; 4] {
        [&self.x, &self.y, &self.z, &self.t]
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.x + &o.x, &self.y + &o.y, &self.z + &o.z, &self.t + &o.t)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.x - &o.x, &self.y - &o.y, &self.z - &o.z, &self.t - &o.t)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(self.x.scale(q), self.y.scale(q), self.z.scale(q), self.t.scale(q))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x.clone(), -&self.y, -&self.z, -&self.t)
    }

    /// The 4n rational coordinates over Q, field component by component.
    pub fn rational_coords(&self) -> Vec<BigRational> {
        self.parts().iter().flat_map(|p| p.coords().iter().cloned()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct QuaternionAlgebra {
    pub field: NumberField,
    pub a: FieldElement,
    pub b: FieldElement,
}

impl QuaternionAlgebra {
    pub fn new(field: NumberField, a: FieldElement, b: FieldElement) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::Config("structure constants must be nonzero".into()));
        }
        Ok(Self { field, a, b })
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// True when `a` and `b` are negative at every real place, i.e. the algebra
    /// is ramified at all real places.
    pub fn is_kleinian(&self) -> bool {
        let f = &self.field;
        f.real_roots().iter().enumerate().all(|(k, _)| {
            f.embed(&self.a, Place::Real(k)).re < 0.0 && f.embed(&self.b, Place::Real(k)).re < 0.0
        })
    }

    pub fn mul(&self, p: &QuatElement, q: &QuatElement) -> QuatElement {
        let f = &self.field;
        let m = |u: &FieldElement, v: &FieldElement| f.mul(u, v);
        let ab = f.mul(&self.a, &self.b);
        let (x1, y1, z1, t1) = (&p.x, &p.y, &p.z, &p.t);
        let (x2, y2, z2, t2) = (&q.x, &q.y, &q.z, &q.t);
        let x = &(&(&m(x1, x2) + &m(&self.a, &m(y1, y2))) + &m(&self.b, &m(z1, z2))) - &m(&ab, &m(t1, t2));
        let y = &(&(&m(x1, y2) + &m(y1, x2)) - &m(&self.b, &m(z1, t2))) + &m(&self.b, &m(t1, z2));
        let z = &(&(&m(x1, z2) + &m(z1, x2)) + &m(&self.a, &m(y1, t2))) - &m(&self.a, &m(t1, y2));
        let t = &(&(&m(x1, t2) + &m(t1, x2)) + &m(y1, z2)) - &m(z1, y2);
        QuatElement::new(x, y, z, t)
    }

    pub fn nrd(&self, q: &QuatElement) -> FieldElement {
        let f = &self.field;
        let ab = f.mul(&self.a, &self.b);
        let xx = f.mul(&q.x, &q.x);
        let yy = f.mul(&self.a, &f.mul(&q.y, &q.y));
        let zz = f.mul(&self.b, &f.mul(&q.z, &q.z));
        let tt = f.mul(&ab, &f.mul(&q.t, &q.t));
        &(&(&xx - &yy) - &zz) + &tt
    }

    pub fn trd(&self, q: &QuatElement) -> FieldElement {
        &q.x + &q.x
    }

    /// `trd(p conj(q)) / 2`, the bilinear form attached to `nrd`.
    pub fn nrd_bilinear(&self, p: &QuatElement, q: &QuatElement) -> FieldElement {
        self.mul(p, &q.conj()).x
    }

    pub fn inverse(&self, q: &QuatElement) -> Option<QuatElement> {
        let n = self.field.inv(&self.nrd(q))?;
        let c = q.conj();
        let f = &self.field;
        Some(QuatElement::new(f.mul(&c.x, &n), f.mul(&c.y, &n), f.mul(&c.z, &n), f.mul(&c.t, &n)))
    }
}

/// Data fixing the embedding `rho : B -> M_2(C)` at the complex place.
#[derive(Clone, Debug)]
pub struct SplittingData {
    /// Principal square root of `sigma(a)`.
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Optional conjugating matrix `h`; the embedding becomes `h rho h^{-1}`.
    pub conjugator: Option<Mat2>,
}

impl SplittingData {
    pub fn new(alg: &QuaternionAlgebra) -> Self {
        let sa = alg.field.embed_sigma(&alg.a);
        Self { alpha: sa.sqrt(), beta: alg.field.embed_sigma(&alg.b), conjugator: None }
    }

    pub fn with_conjugator(&self, h: Mat2) -> Self {
        Self { conjugator: Some(h.normalized()), ..self.clone() }
    }

    /// `rho(x)` before conjugation, from the complex images of `x, y, z, t`.
    fn raw(&self, x: Complex64, y: Complex64, z: Complex64, t: Complex64) -> Mat2 {
        let al = self.alpha;
        Mat2::new(x + y * al, z + t * al, (z - t * al) * self.beta, x - y * al)
    }

    pub fn conjugate(&self, m: &Mat2) -> Mat2 {
        match &self.conjugator {
            Some(h) => h.mul(m).mul(&h.adjugate()),
            None => *m,
        }
    }

    pub fn split(&self, alg: &QuaternionAlgebra, q: &QuatElement) -> Mat2 {
        let f = &alg.field;
        let m = self.raw(f.embed_sigma(&q.x), f.embed_sigma(&q.y), f.embed_sigma(&q.z), f.embed_sigma(&q.t));
        self.conjugate(&m)
    }
}

/// A Z-lattice of rank 4n in B which is a ring containing 1.
#[derive(Clone, Debug)]
pub struct QuatOrder {
    pub algebra: QuaternionAlgebra,
    pub basis: Vec<QuatElement>,
    pub maximal: bool,
    pub ramified_prime_norms: Vec<u64>,
    /// Exact norm form: for each power-basis coordinate `m`, an integer
    /// symmetric matrix `N_m` with `denominator * nrd(sum c_k e_k)_m = c^T N_m c`.
    norm_form: Vec<Vec<Vec<i128>>>,
    norm_denominator: i128,
    /// `tr_{F/Q}(nrd(.))` as a rational symmetric matrix on the basis.
    trace_form: Vec<Vec<BigRational>>,
    coord_matrix_inv: Vec<Vec<BigRational>>,
    /// `e_k e_l = sum_m mult[k][l][m] e_m`.
    mult: Vec<Vec<Vec<i64>>>,
    /// `conj(e_k) = sum_m conj[k][m] e_m`.
    conj: Vec<Vec<i64>>,
    one: Vec<i64>,
}

impl QuatOrder {
    pub fn new(
        algebra: QuaternionAlgebra,
        basis: Vec<QuatElement>,
        maximal: bool,
        ramified_prime_norms: Vec<u64>,
    ) -> Result<Self> {
        let n = algebra.degree();
        let dim = 4 * n;
        if basis.len() != dim {
            return Err(Error::Config(format!("order basis must have {dim} elements, found {}", basis.len())));
        }
        // rows: rational coordinates of the basis elements
        let rows: Vec<Vec<BigRational>> = basis.iter().map(QuatElement::rational_coords).collect();
        if determinant(rows.clone()).is_zero() {
            return Err(Error::Config("order basis is linearly dependent".into()));
        }
        let coord_matrix_inv = invert(&rows).ok_or_else(|| Error::Config("order basis is singular".into()))?;

        let mut bil = vec![vec![FieldElement::zero(n); dim]; dim];
        for k in 0..dim {
            for l in k..dim {
                let v = if k == l {
                    algebra.nrd(&basis[k])
                } else {
                    // nrd(e_k + e_l) - nrd(e_k) - nrd(e_l) = trd(e_k conj e_l)
                    algebra.trd(&algebra.mul(&basis[k], &basis[l].conj()))
                };
                bil[k][l] = v.clone();
                bil[l][k] = v;
            }
        }
        let mut den = BigInt::one();
        for row in &bil {
            for v in row {
                for c in v.coords() {
                    den = den.lcm(c.denom());
                }
            }
        }
        // symmetric split of the cross terms: c_k c_l appears twice
        let two = BigInt::from(2);
        let den_full = &den * &two;
        let mut norm_form = vec![vec![vec![0i128; dim]; dim]; n];
        for k in 0..dim {
            for l in 0..dim {
                for m in 0..n {
                    let c = &bil[k][l].coords()[m];
                    let scaled = if k == l { c * BigRational::from_integer(den_full.clone()) } else { c * BigRational::from_integer(den.clone()) };
                    let v = scaled.to_integer().to_i128().ok_or_else(|| Error::Config("norm form coefficients overflow".into()))?;
                    norm_form[m][k][l] = v;
                }
            }
        }
        let norm_denominator = den_full.to_i128().ok_or_else(|| Error::Config("norm form denominator overflow".into()))?;

        let half = BigRational::new(1.into(), 2.into());
        let trace_form = (0..dim)
            .map(|k| {
                (0..dim)
                    .map(|l| {
                        let t = algebra.field.trace(&bil[k][l]);
                        if k == l { t } else { t * &half }
                    })
                    .collect()
            })
            .collect();

        let mut order = Self {
            algebra,
            basis,
            maximal,
            ramified_prime_norms,
            norm_form,
            norm_denominator,
            trace_form,
            coord_matrix_inv,
            mult: vec![],
            conj: vec![],
            one: vec![],
        };
        order.one = order
            .coordinates(&QuatElement::one(n))
            .ok_or_else(|| Error::Config("order does not contain 1".into()))?;
        let not_closed = || Error::Config("order basis is not closed under multiplication".into());
        let mut mult = vec![vec![vec![]; dim]; dim];
        for k in 0..dim {
            for l in 0..dim {
                let prod = order.algebra.mul(&order.basis[k], &order.basis[l]);
                mult[k][l] = order.coordinates(&prod).ok_or_else(not_closed)?;
            }
        }
        let conj = (0..dim)
            .map(|k| order.coordinates(&order.basis[k].conj()).ok_or_else(not_closed))
            .collect::<Result<Vec<_>>>()?;
        order.mult = mult;
        order.conj = conj;
        Ok(order)
    }

    /// `M_2(Z_F)` realised inside `(1, 1 | F)`: the basis `w_k (1+i)/2`,
    /// `w_k (1-i)/2`, `w_k (j+ij)/2`, `w_k (j-ij)/2` over an integral basis
    /// `w_k`, whose images under the splitting are the matrix units.
    pub fn matrix_order(field: NumberField) -> Result<Self> {
        let n = field.degree();
        let one = field.one();
        let alg = QuaternionAlgebra::new(field, one.clone(), one)?;
        let half = BigRational::new(1.into(), 2.into());
        let mut basis = Vec::with_capacity(4 * n);
        for k in 0..n {
            let w = alg.field.integral_element(k).scale(&half);
            let z = FieldElement::zero(n);
            let nw = -&w;
            basis.push(QuatElement::new(w.clone(), w.clone(), z.clone(), z.clone()));
            basis.push(QuatElement::new(w.clone(), nw.clone(), z.clone(), z.clone()));
            basis.push(QuatElement::new(z.clone(), z.clone(), w.clone(), w.clone()));
            basis.push(QuatElement::new(z.clone(), z, w, nw));
        }
        Self::new(alg, basis, true, vec![])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> usize {
        self.algebra.degree()
    }

    pub fn element(&self, coords: &[i64]) -> QuatElement {
        let n = self.degree();
        let mut acc = QuatElement::zero(n);
        for (c, e) in coords.iter().zip(&self.basis) {
            if *c != 0 {
                acc = acc.add(&e.scale(&BigRational::from_integer((*c).into())));
            }
        }
        acc
    }

    /// Rational coordinates on the order basis; `None` unless all are integers.
    pub fn coordinates(&self, q: &QuatElement) -> Option<Vec<i64>> {
        let v = q.rational_coords();
        let dim = self.dim();
        let mut out = Vec::with_capacity(dim);
        for k in 0..dim {
            let c: BigRational = (0..dim).map(|m| &v[m] * &self.coord_matrix_inv[m][k]).sum();
            if !c.is_integer() {
                return None;
            }
            out.push(c.to_integer().to_i64()?);
        }
        Some(out)
    }

    /// Exact test of `nrd(sum c_k e_k) = 1`.
    pub fn has_unit_norm(&self, c: &[i64]) -> bool {
        for (m, form) in self.norm_form.iter().enumerate() {
            let mut s: i128 = 0;
            for (k, row) in form.iter().enumerate() {
                if c[k] == 0 {
                    continue;
                }
                let mut r: i128 = 0;
                for (l, v) in row.iter().enumerate() {
                    r += v * c[l] as i128;
                }
                s += r * c[k] as i128;
            }
            let target = if m == 0 { self.norm_denominator } else { 0 };
            if s != target {
                return false;
            }
        }
        true
    }

    pub fn one_coords(&self) -> &[i64] {
        &self.one
    }

    /// Exact product on basis coordinates; `None` on `i128` overflow.
    pub fn mul_coords(&self, a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
        let dim = self.dim();
        let mut out = vec![0i128; dim];
        for (k, &ak) in a.iter().enumerate() {
            if ak == 0 {
                continue;
            }
            for (l, &bl) in b.iter().enumerate() {
                if bl == 0 {
                    continue;
                }
                let p = ak.checked_mul(bl)?;
                for (m, &c) in self.mult[k][l].iter().enumerate() {
                    if c != 0 {
                        out[m] = out[m].checked_add(p.checked_mul(c as i128)?)?;
                    }
                }
            }
        }
        Some(out)
    }

    /// Quaternion conjugate on basis coordinates (the inverse for norm-one elements).
    pub fn conj_coords(&self, a: &[i128]) -> Option<Vec<i128>> {
        let mut out = vec![0i128; self.dim()];
        for (k, &ak) in a.iter().enumerate() {
            if ak == 0 {
                continue;
            }
            for (m, &c) in self.conj[k].iter().enumerate() {
                if c != 0 {
                    out[m] = out[m].checked_add(ak.checked_mul(c as i128)?)?;
                }
            }
        }
        Some(out)
    }

    pub fn trace_form(&self) -> &[Vec<BigRational>] {
        &self.trace_form
    }

    /// Exact `tr_{F/Q}(nrd(x))`.
    pub fn trace_norm(&self, c: &[i64]) -> BigRational {
        let mut s = BigRational::zero();
        for (k, row) in self.trace_form.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                if c[k] != 0 && c[l] != 0 {
                    s += v * BigRational::from_integer((c[k] * c[l]).into());
                }
            }
        }
        s
    }

    /// Images of the basis elements under `rho` (without conjugation).
    pub fn split_basis(&self, s: &SplittingData) -> Vec<Mat2> {
        let plain = SplittingData { conjugator: None, ..s.clone() };
        self.basis.iter().map(|e| plain.split(&self.algebra, e)).collect()
    }

    /// `covol = |Delta_F|^{3/2} zeta_F(2) prod (q - 1) / (4 pi^2)^{n-1}`.
    pub fn covolume(&self, zeta2: f64) -> Result<f64> {
        if !self.maximal {
            return Err(Error::NotMaximal);
        }
        let n = self.degree() as i32;
        let disc = rat_to_f64(&BigRational::from_integer(self.algebra.field.discriminant().clone())).abs();
        let phi: f64 = self.ramified_prime_norms.iter().map(|&q| q as f64 - 1.0).product();
        Ok(disc.powf(1.5) * zeta2 * phi / (4.0 * PI * PI).powi(n - 1))
    }
}

fn invert(rows: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = rows.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for col in 0..n {
        let mut aug: Vec<Vec<BigRational>> = rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut v = row.clone();
                v.push(if r == col { BigRational::one() } else { BigRational::zero() });
                v
            })
            .collect();
        let sol = solve_exact(&mut aug)?;
        for r in 0..n {
            out[r][col] = sol[r].clone();
        }
    }
    Some(out)
}
