//! The master algorithm: enumerate, normalize, test the covolume, present.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{translation_to, Mat2, Point, V3};
use crate::basis::{normalized_basis, presentation, BasisOptions, NormalizedBasis, Presentation};
use crate::error::{Error, Result};
use crate::field::ZetaValue;
use crate::group::{canonical_coords, ArithmeticGroup, Group, GroupElement};
use crate::lattice::{enumerate_deterministic, enumerate_probabilistic, probabilistic_schedule, EnumParams};
use crate::poly::ExteriorDomain;
use crate::quat::{QuatOrder, SplittingData};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    #[serde(alias = "det")]
    Deterministic,
    #[serde(alias = "prob")]
    Probabilistic,
}

#[derive(Clone, Debug)]
pub struct MasterOptions {
    pub backend: Backend,
    pub params: EnumParams,
    pub seed: u64,
    pub basis: BasisOptions,
    pub zeta_prime_bound: u64,
    /// Number of random conjugations tried after a degenerate base point.
    pub conjugation_retries: usize,
    /// Hyperbolic distance range of the random conjugating translation.
    pub conjugation_distance: (f64, f64),
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Deterministic,
            params: EnumParams::default(),
            seed: 0,
            basis: BasisOptions::default(),
            zeta_prime_bound: 1_000_000,
            conjugation_retries: 5,
            conjugation_distance: (0.2, 0.5),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub group: Group,
    pub basis: NormalizedBasis,
    pub presentation: Presentation,
    pub zeta: ZetaValue,
    pub covolume: f64,
    pub conjugator: Option<Mat2>,
    pub attempts: usize,
    pub zeta_seconds: f64,
    pub total_seconds: f64,
}

impl RunResult {
    pub fn volume_ratio(&self) -> f64 {
        self.basis.volume / self.covolume
    }
}

/// Accepts when the measured volume is below twice the covolume.
pub fn is_full_group(domain: &ExteriorDomain, volume: f64, covolume: f64) -> bool {
    domain.bounded && volume.is_finite() && volume < 2.0 * covolume
}

/// A translation by a random hyperbolic distance in `range`.
pub fn random_conjugator<R: Rng>(range: (f64, f64), rng: &mut R) -> Mat2 {
    let dir = loop {
        let v = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm_sqr();
        if n > 1e-6 && n <= 1.0 {
            break v.normalized();
        }
    };
    let d = rng.gen_range(range.0..=range.1);
    translation_to(Point::from_vec3(dir.scale((d / 2.0).tanh())))
}

/// Norm of `Delta_F * Delta_B`, the discriminant entering the enumeration bound.
pub fn discriminant_norm(order: &QuatOrder) -> f64 {
    let df: f64 = order.algebra.field.discriminant().to_string().parse().unwrap_or(f64::NAN);
    let db: f64 = order.ramified_prime_norms.iter().map(|&q| q as f64).product();
    (df * db).abs()
}

fn attempt<R: Rng>(
    order: &QuatOrder,
    conjugator: Option<Mat2>,
    covolume: f64,
    opts: &MasterOptions,
    rng: &mut R,
) -> Result<(Group, NormalizedBasis, Presentation)> {
    let mut split = SplittingData::new(&order.algebra);
    if let Some(h) = conjugator {
        split = split.with_conjugator(h);
    }
    let group = Group::Arithmetic(Box::new(ArithmeticGroup::new(order.clone(), split)));
    let disc = discriminant_norm(order);
    let degree = order.degree();
    let mut seen: BTreeSet<Vec<i128>> = BTreeSet::new();
    let enumerate = |n: u32| -> Result<Vec<GroupElement>> {
        let found = match opts.backend {
            Backend::Deterministic => enumerate_deterministic(&group, n)?,
            Backend::Probabilistic => {
                let schedule = probabilistic_schedule(&opts.params, degree, disc, covolume, n);
                enumerate_probabilistic(&group, &schedule, rng)?
            }
        };
        Ok(found
            .into_iter()
            .filter(|g| seen.insert(canonical_coords(g.coords.as_deref().unwrap_or(&[]))))
            .collect())
    };
    let full = |_: &[GroupElement], d: &ExteriorDomain, v: f64| Ok(is_full_group(d, v, covolume));
    let basis = normalized_basis(&group, enumerate, full, &opts.basis)?;
    let pres = presentation(&group, &basis.elements, &basis.domain, &opts.basis)?;
    Ok((group, basis, pres))
}

/// Runs the master algorithm on a maximal order.
pub fn run_master(order: &QuatOrder, opts: &MasterOptions) -> Result<RunResult> {
    let start = Instant::now();
    let t = Instant::now();
    let zeta = order.algebra.field.dedekind_zeta_2(opts.zeta_prime_bound)?;
    let zeta_seconds = t.elapsed().as_secs_f64();
    let covolume = order.covolume(zeta.value)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut conjugator = None;
    let mut last = None;
    for k in 0..=opts.conjugation_retries {
        match attempt(order, conjugator, covolume, opts, &mut rng) {
            Ok((group, basis, presentation)) => {
                return Ok(RunResult {
                    group,
                    basis,
                    presentation,
                    zeta,
                    covolume,
                    conjugator,
                    attempts: k + 1,
                    zeta_seconds,
                    total_seconds: start.elapsed().as_secs_f64(),
                });
            }
            Err(e @ (Error::DegenerateBasePoint(_) | Error::OriginFixed(_))) => {
                last = Some(e);
                conjugator = Some(random_conjugator(opts.conjugation_distance, &mut rng));
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::BudgetExceeded(opts.conjugation_retries)))
}
