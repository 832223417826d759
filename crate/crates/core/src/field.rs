//! Exact arithmetic in number fields `Q[t]/(f)` together with numeric
//! embeddings and the invariants entering the covolume formula.
//!
//! Elements are stored on the power basis `1, t, ..., t^{n-1}` with
//! arbitrary-precision rational coordinates. Embeddings are plain `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parses `"p/q"`, `"-p/q"` or a plain integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() || s.len() > 4096 {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rat_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // huge numerator or denominator: scale down before dividing
            let shift = q.numer().bits().max(q.denom().bits()) as i64 - 900;
            let shift = shift.max(0) as usize;
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

/// An element of a number field, as rational coordinates on the power basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    coords: Vec<BigRational>,
}

impl FieldElement {
    pub fn zero(degree: usize) -> Self {
        Self { coords: vec![BigRational::zero(); degree] }
    }

    pub fn one(degree: usize) -> Self {
        Self::from_int(degree, 1)
    }

    pub fn from_int(degree: usize, k: i64) -> Self {
        let mut e = Self::zero(degree);
        e.coords[0] = BigRational::from_integer(k.into());
        e
    }

    pub fn from_rational(degree: usize, q: BigRational) -> Self {
        let mut e = Self::zero(degree);
        e.coords[0] = q;
        e
    }

    /// The generator `t` of the power basis.
    pub fn generator(degree: usize) -> Self {
        let mut e = Self::zero(degree);
        if degree > 1 {
            e.coords[1] = BigRational::one();
        } else {
            e.coords[0] = BigRational::one();
        }
        e
    }

    pub fn from_coords(coords: Vec<BigRational>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(Zero::is_zero)
    }

    /// `Some(q)` when the element is the rational number `q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.coords[1..].iter().all(Zero::is_zero).then(|| &self.coords[0])
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self { coords: self.coords.iter().map(|c| c * q).collect() }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(format_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let coords = items.iter().map(|s| parse_rational(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(Self { coords })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "({})*t", format_rational(c))?,
                _ => write!(f, "({})*t^{k}", format_rational(c))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        FieldElement { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        FieldElement { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { coords: self.coords.iter().map(|a| -a).collect() }
    }
}

/// An archimedean place of an ATR field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Place {
    Real(usize),
    Complex,
}

/// Declarative description of a number field; the maximal-order data is
/// supplied rather than computed.
#[derive(Clone, Debug, Default)]
pub struct FieldSpec {
    /// Coefficients of the monic defining polynomial, leading term first.
    pub coefficients: Vec<i64>,
    /// Rows: a Z-basis of the ring of integers on the power basis.
    pub integral_basis: Option<Vec<Vec<BigRational>>>,
    pub discriminant: Option<BigInt>,
    /// Approximate complex root used to pick the distinguished place.
    pub sigma_hint: Option<Complex64>,
    /// Residue degrees of the primes above `p`, for primes dividing the index.
    pub index_primes: BTreeMap<u64, Vec<u32>>,
    pub zeta2_override: Option<f64>,
}

/// `F = Q[t]/(f)` with exactly one complex place.
#[derive(Clone, Debug)]
pub struct NumberField {
    degree: usize,
    poly: Vec<BigInt>,
    integral_basis: Vec<Vec<BigRational>>,
    disc: BigInt,
    poly_disc: BigInt,
    index: BigInt,
    real_roots: Vec<f64>,
    sigma: Complex64,
    power_sums: Vec<BigRational>,
    index_primes: BTreeMap<u64, Vec<u32>>,
    zeta2_override: Option<f64>,
}

/// Euler-product approximation of `zeta_F(2)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZetaValue {
    pub value: f64,
    /// Crude relative truncation bound, `2 n / bound`.
    pub error_estimate: f64,
    pub prime_bound: u64,
}

impl NumberField {
    pub fn new(spec: &FieldSpec) -> Result<Self> {
        let n = spec.coefficients.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
            Error::Config("defining polynomial must have degree at least 1".into())
        })?;
        if spec.coefficients[0] != 1 {
            return Err(Error::Config("defining polynomial must be monic".into()));
        }
        let poly: Vec<BigInt> = spec.coefficients.iter().rev().map(|&c| BigInt::from(c)).collect();

        if let Some(root) = rational_root(&poly) {
            if n > 1 {
                return Err(Error::ReduciblePoly(root.to_string()));
            }
        }

        let roots = poly_roots(&poly.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>());
        let mut real_roots = Vec::new();
        let mut upper = Vec::new();
        for z in &roots {
            if z.im.abs() <= 1e-9 * (1.0 + z.norm()) {
                real_roots.push(z.re);
            } else if z.im > 0.0 {
                upper.push(*z);
            }
        }
        let r2 = n - real_roots.len();
        if r2 != 2 || upper.len() != 1 {
            return Err(Error::NotAtr { r2: r2 / 2 });
        }
        real_roots.sort_by(f64::total_cmp);
        let mut sigma = upper[0];
        if let Some(hint) = spec.sigma_hint {
            if (hint.conj() - sigma).norm() < (hint - sigma).norm() {
                sigma = sigma.conj();
            }
        }

        let integral_basis = match &spec.integral_basis {
            Some(b) => {
                if b.len() != n || b.iter().any(|r| r.len() != n) {
                    return Err(Error::Config(format!("integral basis must be {n}x{n}")));
                }
                b.clone()
            }
            None => (0..n)
                .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
                .collect(),
        };
        let det = determinant(integral_basis.clone());
        if det.is_zero() {
            return Err(Error::Config("integral basis is singular".into()));
        }
        let inv_det = det.recip().abs();
        if !inv_det.is_integer() {
            return Err(Error::Config("integral basis does not contain Z[t]".into()));
        }
        let index = inv_det.to_integer();

        let power_sums = power_sums(&poly, 2 * n);
        let trace_form: Vec<Vec<BigRational>> =
            (0..n).map(|i| (0..n).map(|j| power_sums[i + j].clone()).collect()).collect();
        let poly_disc = determinant(trace_form).to_integer();
        let disc = &poly_disc / (&index * &index);
        if let Some(d) = &spec.discriminant {
            if *d != disc {
                return Err(Error::Config(format!("supplied discriminant {d} disagrees with computed {disc}")));
            }
        }

        Ok(Self {
            degree: n,
            poly,
            integral_basis,
            disc,
            poly_disc,
            index,
            real_roots,
            sigma,
            power_sums,
            index_primes: spec.index_primes.clone(),
            zeta2_override: spec.zeta2_override,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monic defining polynomial, constant term first.
    pub fn poly(&self) -> &[BigInt] {
        &self.poly
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn poly_discriminant(&self) -> &BigInt {
        &self.poly_disc
    }

    pub fn index(&self) -> &BigInt {
        &self.index
    }

    pub fn integral_basis(&self) -> &[Vec<BigRational>] {
        &self.integral_basis
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.real_roots.len(), 1)
    }

    pub fn real_roots(&self) -> &[f64] {
        &self.real_roots
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn places(&self) -> impl Iterator<Item = Place> {
        (0..self.real_roots.len()).map(Place::Real).chain(std::iter::once(Place::Complex))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::zero(self.degree)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::one(self.degree)
    }

    pub fn from_int(&self, k: i64) -> FieldElement {
        FieldElement::from_int(self.degree, k)
    }

    /// The `k`-th element of the integral basis.
    pub fn integral_element(&self, k: usize) -> FieldElement {
        FieldElement::from_coords(self.integral_basis[k].clone())
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let n = self.degree;
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        for k in (n..2 * n - 1).rev() {
            let c = std::mem::take(&mut prod[k]);
            if c.is_zero() {
                continue;
            }
            for (i, p) in self.poly[..n].iter().enumerate() {
                if !p.is_zero() {
                    prod[k - n + i] -= &c * BigRational::from_integer(p.clone());
                }
            }
        }
        prod.truncate(n);
        FieldElement { coords: prod }
    }

    pub fn pow(&self, a: &FieldElement, e: u32) -> FieldElement {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Multiplicative inverse, or `None` for zero.
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        let n = self.degree;
        // column k of the multiplication-by-a matrix is a * t^k
        let mut cols = Vec::with_capacity(n);
        let mut tk = self.one();
        let t = FieldElement::generator(n);
        for _ in 0..n {
            cols.push(self.mul(a, &tk));
            tk = self.mul(&tk, &t);
        }
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c.coords[r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        let sol = solve_exact(&mut aug)?;
        Some(FieldElement { coords: sol })
    }

    /// Exact trace `Tr_{F/Q}`.
    pub fn trace(&self, a: &FieldElement) -> BigRational {
        a.coords.iter().zip(&self.power_sums).map(|(c, p)| c * p).sum()
    }

    /// Exact norm `N_{F/Q}` as the determinant of multiplication.
    pub fn norm(&self, a: &FieldElement) -> BigRational {
        let n = self.degree;
        let t = FieldElement::generator(n);
        let mut tk = self.one();
        let mut cols = Vec::with_capacity(n);
        for _ in 0..n {
            cols.push(self.mul(a, &tk));
            tk = self.mul(&tk, &t);
        }
        let m: Vec<Vec<BigRational>> = (0..n).map(|r| cols.iter().map(|c| c.coords[r].clone()).collect()).collect();
        determinant(m)
    }

    pub fn place_root(&self, place: Place) -> Complex64 {
        match place {
            Place::Real(k) => Complex64::new(self.real_roots[k], 0.0),
            Place::Complex => self.sigma,
        }
    }

    /// Numeric image of `a` at `place`; real places return a zero imaginary part.
    pub fn embed(&self, a: &FieldElement, place: Place) -> Complex64 {
        let root = self.place_root(place);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in a.coords.iter().rev() {
            acc = acc * root + rat_to_f64(c);
        }
        if matches!(place, Place::Real(_)) {
            acc.im = 0.0;
        }
        acc
    }

    pub fn embed_sigma(&self, a: &FieldElement) -> Complex64 {
        self.embed(a, Place::Complex)
    }

    /// `zeta_F(2)` by a truncated Euler product over primes up to `prime_bound`,
    /// or the configured override.
    pub fn dedekind_zeta_2(&self, prime_bound: u64) -> Result<ZetaValue> {
        if let Some(v) = self.zeta2_override {
            return Ok(ZetaValue { value: v, error_estimate: 0.0, prime_bound: 0 });
        }
        let n = self.degree;
        let coeffs: Vec<BigInt> = self.poly.clone();
        let terms: Vec<f64> = primes_up_to(prime_bound)
            .into_par_iter()
            .map(|p| {
                let degrees = if let Some(d) = self.index_primes.get(&p) {
                    d.clone()
                } else if (&self.index % BigInt::from(p)).is_zero() {
                    return Err(Error::IndexPrimeUnspecified(p));
                } else {
                    let f: Vec<u64> = coeffs
                        .iter()
                        .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap_or(0))
                        .collect();
                    splitting_degrees_mod_p(&f, p)
                };
                Ok(degrees
                    .into_iter()
                    .map(|f| {
                        let q = (p as f64).powi(f as i32);
                        -(-1.0 / (q * q)).ln_1p()
                    })
                    .sum::<f64>())
            })
            .collect::<Result<_>>()?;
        let log_sum: f64 = terms.iter().sum();
        Ok(ZetaValue {
            value: log_sum.exp(),
            error_estimate: 2.0 * n as f64 / prime_bound.max(1) as f64,
            prime_bound,
        })
    }
}

fn power_sums(poly: &[BigInt], count: usize) -> Vec<BigRational> {
    let n = poly.len() - 1;
    // a[i] = coefficient of x^i, monic
    let a: Vec<BigRational> = poly.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    let mut p = vec![BigRational::zero(); count.max(1)];
    p[0] = BigRational::from_integer(BigInt::from(n));
    for k in 1..count {
        let mut s = BigRational::zero();
        for i in 1..=k.min(n) {
            if i < k {
                s += &a[n - i] * &p[k - i];
            } else {
                s += &a[n - i] * BigRational::from_integer(BigInt::from(k));
            }
        }
        p[k] = -s;
    }
    p
}

fn rational_root(poly: &[BigInt]) -> Option<BigInt> {
    let eval = |x: &BigInt| poly.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c);
    let a0 = poly[0].abs();
    if a0.is_zero() {
        return Some(BigInt::zero());
    }
    let limit = BigInt::from(10_000_000u64);
    let mut d = BigInt::one();
    while &d * &d <= a0 && d <= limit {
        if (&a0 % &d).is_zero() {
            let other = &a0 / &d;
            for cand in [d.clone(), -d.clone(), other.clone(), -other] {
                if eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
        d += 1;
    }
    None
}

/// Complex roots by Aberth iteration followed by Newton polishing.
/// `coeffs` are constant term first.
pub(crate) fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    for _ in 0..1000 {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * s);
            z[k] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
        }
        if max_step < 1e-17 {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..3 {
            let (p, dp) = eval(*root);
            if dp.norm() > 0.0 {
                *root -= p / dp;
            }
        }
    }
    z
}

/// Determinant by fraction-free style Gaussian elimination over Q.
pub(crate) fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let v = &f * &m[col][c];
                m[r][c] -= v;
            }
        }
    }
    det
}

/// Solves an augmented system `[A | b]` exactly; `None` if singular.
pub(crate) fn solve_exact(aug: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let n = aug.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(piv, col);
        let p = aug[col][col].clone();
        for c in col..=n {
            aug[col][c] = &aug[col][c] / &p;
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            for c in col..=n {
                let v = &f * &aug[col][c];
                aug[r][c] -= v;
            }
        }
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

pub(crate) fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let b = bound as usize;
    let mut sieve = vec![true; b + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= b {
        if sieve[i] {
            let mut j = i * i;
            while j <= b {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| k as u64).collect()
}

// Dense polynomials over F_p, constant term first, no trailing zeros.

fn fp_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = fp_mulmod(result, base, p);
        }
        base = fp_mulmod(base, base, p);
        e >>= 1;
    }
    result
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = fp_inv(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = fp_mulmod(r[top], lead_inv, p);
        if c != 0 {
            for i in 0..=dm {
                let sub = fp_mulmod(c, m[i], p);
                let idx = top - dm + i;
                r[idx] = (r[idx] + p - sub) % p;
            }
        }
        r.pop();
        r = fp_trim(r);
    }
    fp_trim(r)
}

fn fp_mul_rem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + fp_mulmod(x, y, p)) % p;
        }
    }
    fp_rem(&fp_trim(prod), m, p)
}

fn fp_pow_rem(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = fp_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = fp_mul_rem(&result, &b, m, p);
        }
        b = fp_mul_rem(&b, &b, m, p);
        e >>= 1;
    }
    result
}

/// `h(q) mod m` by Horner's rule.
fn fp_compose_rem(h: &[u64], q: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = Vec::new();
    for &c in h.iter().rev() {
        acc = fp_mul_rem(&acc, q, m, p);
        if acc.is_empty() {
            acc.push(0);
        }
        acc[0] = (acc[0] + c) % p;
        acc = fp_trim(acc);
    }
    acc
}

fn fp_derivative(a: &[u64], p: u64) -> Vec<u64> {
    fp_trim(a.iter().enumerate().skip(1).map(|(k, &c)| fp_mulmod(c, k as u64 % p, p)).collect())
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = fp_trim(a.to_vec());
    let mut b = fp_trim(b.to_vec());
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Residue degrees of the distinct irreducible factors of `f mod p`.
/// `f` is monic, constant term first, with coefficients already reduced mod `p`.
pub(crate) fn splitting_degrees_mod_p(f: &[u64], p: u64) -> Vec<u32> {
    let f = fp_trim(f.to_vec());
    let n = f.len() - 1;
    let xp = fp_pow_rem(&[0u64, 1u64], p, &f, p);
    let mut frob = xp.clone();
    // counts[d] = number of distinct irreducible factors of degree d
    let mut counts = vec![0usize; n + 1];
    let mut found = 0;
    // for p > n the radical of f has degree n - deg gcd(f, f'), and a
    // remainder left after degree n/2 is one irreducible factor
    let (last, radical) = if p > n as u64 { (n / 2, Some(n + 1 - fp_gcd(&f, &fp_derivative(&f, p), p).len())) } else { (n, None) };
    for d in 1..=last {
        if d > 1 {
            frob = fp_compose_rem(&frob, &xp, &f, p);
        }
        let mut h = frob.clone();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        let g = fp_gcd(&f, &fp_trim(h), p);
        let total = g.len().saturating_sub(1);
        let lower: usize = (1..d).filter(|e| d % e == 0).map(|e| e * counts[e]).sum();
        counts[d] = total.saturating_sub(lower) / d;
        found += d * counts[d];
    }
    if let Some(r) = radical {
        if r > found {
            counts[r - found] += 1;
        }
    }
    let mut degrees = Vec::new();
    for (d, &c) in counts.iter().enumerate() {
        degrees.extend(std::iter::repeat_n(d as u32, c));
    }
    degrees
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    pub(crate) fn eisenstein() -> NumberField {
        NumberField::new(&FieldSpec {
            coefficients: vec![1, 0, 3],
            integral_basis: Some(vec![vec![q("1"), q("0")], vec![q("1/2"), q("1/2")]]),
            index_primes: [(2, vec![2])].into_iter().collect(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn eisenstein_invariants() {
        let f = eisenstein();
        assert_eq!(f.degree(), 2);
        assert_eq!(*f.discriminant(), BigInt::from(-3));
        assert_eq!(f.signature(), (0, 1));
        assert_eq!(*f.index(), BigInt::from(2));
    }

    #[test]
    fn gaussian_field() {
        let f = NumberField::new(&FieldSpec { coefficients: vec![1, 0, 1], ..Default::default() }).unwrap();
        assert_eq!(*f.discriminant(), BigInt::from(-4));
        let s = f.sigma();
        assert!((s - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let t = FieldElement::generator(2);
        assert!((f.embed_sigma(&t) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((f.embed_sigma(&f.one()) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sextic_discriminant() {
        let f = NumberField::new(&FieldSpec { coefficients: vec![1, -1, -2, 3, -1, -2, 1], ..Default::default() })
            .unwrap();
        assert_eq!(*f.discriminant(), BigInt::from(-92779));
        assert_eq!(f.signature(), (4, 1));
    }

    #[test]
    fn not_atr_and_reducible() {
        let quartic_cm = NumberField::new(&FieldSpec { coefficients: vec![1, 0, 0, 0, 1], ..Default::default() });
        assert!(matches!(quartic_cm, Err(Error::NotAtr { r2: 2 })));
        let real_quadratic = NumberField::new(&FieldSpec { coefficients: vec![1, 0, -2], ..Default::default() });
        assert!(matches!(real_quadratic, Err(Error::NotAtr { r2: 0 })));
        let rational = NumberField::new(&FieldSpec { coefficients: vec![1, -3], ..Default::default() });
        assert!(matches!(rational, Err(Error::NotAtr { .. })));
        let reducible = NumberField::new(&FieldSpec { coefficients: vec![1, -1, 1, -1], ..Default::default() });
        assert!(matches!(reducible, Err(Error::ReduciblePoly(_))));
    }

    #[test]
    fn traces() {
        let f = eisenstein();
        let t = FieldElement::generator(2);
        assert_eq!(f.trace(&f.one()), q("2"));
        assert_eq!(f.trace(&t), q("0"));
        assert_eq!(f.trace(&f.mul(&t, &t)), q("-6"));
        let t2 = f.embed_sigma(&f.mul(&t, &t));
        assert!((t2 - Complex64::new(-3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_and_norm() {
        let f = NumberField::new(&FieldSpec { coefficients: vec![1, -1, -2, 3, -1, -2, 1], ..Default::default() })
            .unwrap();
        let a = FieldElement::from_coords(vec![q("1"), q("-2"), q("0"), q("3/2"), q("0"), q("1")]);
        let b = f.inv(&a).unwrap();
        assert!(f.mul(&a, &b).is_one());
        let na = f.norm(&a);
        let prod: Complex64 = f
            .places()
            .map(|v| {
                let e = f.embed(&a, v);
                if v == Place::Complex { e * e.conj() } else { e }
            })
            .product();
        assert!((prod.re - rat_to_f64(&na)).abs() < 1e-9 * (1.0 + prod.re.abs()));
    }

    #[test]
    fn splitting_mod_small_primes() {
        // x^2 + 1 mod 5 splits, mod 3 is inert, mod 2 ramifies (one prime of degree 1)
        assert_eq!(splitting_degrees_mod_p(&[1, 0, 1], 5), vec![1, 1]);
        assert_eq!(splitting_degrees_mod_p(&[1, 0, 1], 3), vec![2]);
        assert_eq!(splitting_degrees_mod_p(&[1, 0, 1], 2), vec![1]);
    }

    #[test]
    fn zeta_gaussian_vs_dirichlet_series() {
        // independent route: zeta(2) * L(2, chi_-4) with L summed directly
        let mut catalan = 0.0f64;
        for k in (0..2_000_000u64).rev() {
            let term = 1.0 / ((2 * k + 1) as f64).powi(2);
            catalan += if k % 2 == 0 { term } else { -term };
        }
        let expected = std::f64::consts::PI.powi(2) / 6.0 * catalan;
        let f = NumberField::new(&FieldSpec { coefficients: vec![1, 0, 1], ..Default::default() }).unwrap();
        let z = f.dedekind_zeta_2(1_000_000).unwrap();
        assert!((z.value - expected).abs() < 1e-6, "{} vs {}", z.value, expected);
        assert!((z.value - 1.5067030099229).abs() < 1e-6);
    }

    #[test]
    fn zeta_needs_index_prime_data() {
        let f = NumberField::new(&FieldSpec {
            coefficients: vec![1, 0, 3],
            integral_basis: Some(vec![vec![q("1"), q("0")], vec![q("1/2"), q("1/2")]]),
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(f.dedekind_zeta_2(100), Err(Error::IndexPrimeUnspecified(2))));
    }

    #[test]
    fn zeta_bound_monotone_within_estimate() {
        let f = eisenstein();
        let a = f.dedekind_zeta_2(20_000).unwrap();
        let b = f.dedekind_zeta_2(200_000).unwrap();
        assert!(((a.value - b.value) / b.value).abs() < a.error_estimate);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(q("-3/6"), BigRational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&q("4/2")), "2");
    }

    fn fp_divrem(a: &[u64], m: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let dm = m.len() - 1;
        let mut r = a.to_vec();
        let mut q = vec![0u64; a.len().saturating_sub(dm).max(1)];
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top];
            q[top - dm] = c;
            for i in 0..=dm {
                let idx = top - dm + i;
                r[idx] = (r[idx] + p - fp_mulmod(c, m[i], p)) % p;
            }
            r.pop();
            r = fp_trim(r);
        }
        (fp_trim(q), r)
    }

    /// Distinct factor degrees by trial division with every monic polynomial
    /// of degree at most 3.
    fn brute_degrees(f: &[u64], p: u64) -> Vec<u32> {
        let mut rest = fp_trim(f.to_vec());
        let mut out = Vec::new();
        for d in 1..=3u32 {
            let count = p.pow(d);
            for k in 0..count {
                let mut g: Vec<u64> = (0..d).map(|i| (k / p.pow(i)) % p).collect();
                g.push(1);
                let mut hit = false;
                loop {
                    if rest.len() < g.len() {
                        break;
                    }
                    let (q, r) = fp_divrem(&rest, &g, p);
                    if !r.is_empty() {
                        break;
                    }
                    rest = q;
                    hit = true;
                }
                if hit {
                    out.push(d);
                }
            }
        }
        if rest.len() > 1 {
            out.push(rest.len() as u32 - 1);
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn factor_degrees_match_trial_division() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let p = [2u64, 3, 5, 7, 11, 13][rng.gen_range(0..6)];
            let n = rng.gen_range(2..=7);
            let mut f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            f.push(1);
            if f[0] == 0 {
                f[0] = 1;
            }
            let mut got = splitting_degrees_mod_p(&f, p);
            got.sort_unstable();
            assert_eq!(got, brute_degrees(&f, p), "f = {f:?} mod {p}");
        }
    }
}
