//! Group elements: isometries optionally backed by exact order coordinates.

use serde::{Deserialize, Serialize};

use crate::ball::{Isometry, Mat2};
use crate::error::{Error, Result};
use crate::quat::{QuatOrder, SplittingData};

/// An element of the working group. Arithmetic elements carry their integer
/// coordinates on the order basis; products are then exact and the matrix is
/// re-derived from the coordinates.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub iso: Isometry,
    pub coords: Option<Vec<i128>>,
}

impl GroupElement {
    pub fn matrix(&self) -> &Mat2 {
        &self.iso.m
    }
}

/// An arithmetic group `Gamma(O)` with a fixed embedding.
#[derive(Clone, Debug)]
pub struct ArithmeticGroup {
    pub order: QuatOrder,
    pub splitting: SplittingData,
    /// Images of the order basis under the (conjugated) embedding.
    pub images: Vec<Mat2>,
}

impl ArithmeticGroup {
    pub fn new(order: QuatOrder, splitting: SplittingData) -> Self {
        let images = order.split_basis(&splitting).iter().map(|m| splitting.conjugate(m)).collect();
        Self { order, splitting, images }
    }

    pub fn with_conjugator(&self, h: Mat2) -> Self {
        Self::new(self.order.clone(), self.splitting.with_conjugator(h))
    }

    pub fn embed(&self, coords: &[i128]) -> Mat2 {
        let mut m = Mat2::new(0.0.into(), 0.0.into(), 0.0.into(), 0.0.into());
        for (c, e) in coords.iter().zip(&self.images) {
            if *c != 0 {
                m = m.add(&e.scale((*c as f64).into()));
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub enum Group {
    Arithmetic(Box<ArithmeticGroup>),
    /// A group known only through matrices; identity is decided numerically.
    Matrix { tol: f64 },
}

fn overflow() -> Error {
    Error::PrecisionExhausted("order coordinates overflow 128-bit integers".into())
}

/// Sign-normalised coordinates: first nonzero entry positive.
pub fn canonical_coords(c: &[i128]) -> Vec<i128> {
    match c.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => c.iter().map(|v| -v).collect(),
        _ => c.to_vec(),
    }
}

impl Group {
    pub fn arithmetic(&self) -> Option<&ArithmeticGroup> {
        match self {
            Group::Arithmetic(a) => Some(a),
            Group::Matrix { .. } => None,
        }
    }

    fn tol(&self) -> f64 {
        match self {
            Group::Matrix { tol } => *tol,
            Group::Arithmetic(_) => 1e-8,
        }
    }

    pub fn from_coords(&self, coords: Vec<i128>) -> GroupElement {
        let a = self.arithmetic().expect("coordinates need an arithmetic group");
        GroupElement { iso: Isometry::new(a.embed(&coords)), coords: Some(coords) }
    }

    pub fn from_coords_i64(&self, coords: &[i64]) -> GroupElement {
        self.from_coords(coords.iter().map(|&c| c as i128).collect())
    }

    pub fn from_matrix(&self, m: Mat2) -> GroupElement {
        GroupElement { iso: Isometry::new(m), coords: None }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Arithmetic(a) => self.from_coords(a.order.one_coords().iter().map(|&c| c as i128).collect()),
            Group::Matrix { .. } => self.from_matrix(Mat2::IDENTITY),
        }
    }

    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        match (self, &x.coords, &y.coords) {
            (Group::Arithmetic(a), Some(cx), Some(cy)) => {
                let c = a.order.mul_coords(cx, cy).ok_or_else(overflow)?;
                Ok(self.from_coords(c))
            }
            _ => Ok(self.from_matrix(x.iso.m.mul(&y.iso.m))),
        }
    }

    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        match (self, &x.coords) {
            (Group::Arithmetic(a), Some(c)) => match a.order.conj_coords(c) {
                Some(ci) => self.from_coords(ci),
                None => self.from_matrix(x.iso.m.adjugate()),
            },
            _ => self.from_matrix(x.iso.m.adjugate()),
        }
    }

    pub fn is_trivial(&self, x: &GroupElement) -> bool {
        match (self, &x.coords) {
            (Group::Arithmetic(a), Some(c)) => {
                let one = a.order.one_coords();
                c.iter().zip(one).all(|(u, &v)| *u == v as i128) || c.iter().zip(one).all(|(u, &v)| *u == -(v as i128))
            }
            _ => x.iso.m.is_pm_identity(self.tol()),
        }
    }

    /// Equality in `PSL_2`.
    pub fn same(&self, x: &GroupElement, y: &GroupElement) -> bool {
        match (&x.coords, &y.coords) {
            (Some(a), Some(b)) => canonical_coords(a) == canonical_coords(b),
            _ => {
                x.iso.m.dist_pm(&y.iso.m) <= self.tol() * (1.0 + x.iso.norm)
            }
        }
    }

    pub fn pow(&self, x: &GroupElement, k: usize) -> Result<GroupElement> {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }
}

/// A letter of a word: an index into a generator list, possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

/// Product of the letters, left to right.
pub fn eval_word(group: &Group, gens: &[GroupElement], word: &[Letter]) -> Result<GroupElement> {
    let mut acc = group.identity();
    for l in word {
        let g = if l.inv { group.inverse(&gens[l.gen]) } else { gens[l.gen].clone() };
        acc = group.mul(&acc, &g)?;
    }
    Ok(acc)
}
