//! Point and element reduction against a finite set of isometries.

use serde::{Deserialize, Serialize};

use crate::ball::Point;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};

/// Floating-point guard rails for reductions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBudget {
    /// Error bound on points.
    pub eps: f64,
    /// Error bound on matrices, `8 eps / 3`.
    pub eta: f64,
    /// The provable slack `18 eps^(1/9)`.
    pub alpha: f64,
    /// Slack actually used in the exit test `4/|Cw+D|^2 <= 1 + slack`.
    pub slack: f64,
    /// Largest admitted `||g||`, `eps^(-1/9)`.
    pub norm_cap: f64,
    /// Smallest admitted `1 - |w|^2`, `2 eps^(2/9)`.
    pub height_floor: f64,
    pub max_steps: usize,
}

impl PrecisionBudget {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1e-9) {
            return Err(Error::Config(format!("precision must lie in (0, 1e-9), got {eps}")));
        }
        Ok(Self {
            eps,
            eta: 8.0 * eps / 3.0,
            alpha: 18.0 * eps.powf(1.0 / 9.0),
            slack: 1e-9,
            norm_cap: eps.powf(-1.0 / 9.0),
            height_floor: 2.0 * eps.powf(2.0 / 9.0),
            max_steps: 100_000,
        })
    }

    pub fn with_slack(self, slack: f64) -> Self {
        Self { slack, ..self }
    }

    /// The termination margin `alpha - 68 d^(5/2) M^3 eps - 136 d^(5/2) M^2 eta`
    /// at height `1 - |w|^2 = 1/d` with `M = max ||g||`.
    pub fn termination_margin(&self, slack: f64, height: f64, max_norm: f64) -> f64 {
        let d = 1.0 / height;
        slack - 68.0 * d.powf(2.5) * max_norm.powi(3) * self.eps - 136.0 * d.powf(2.5) * max_norm.powi(2) * self.eta
    }
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        Self::new(1e-15).expect("valid default")
    }
}

#[derive(Clone, Debug)]
pub struct PointReduction {
    pub point: Point,
    /// Indices into `S` in application order: `delta = S[w_k] ... S[w_1]`.
    pub word: Vec<usize>,
}

/// Index of the element of `s` minimising `|Cw+D|^2` (first on ties) and that value.
fn best_step(w: Point, s: &[GroupElement]) -> Option<(usize, f64)> {
    let h = w.to_ham();
    let mut best: Option<(usize, f64)> = None;
    for (k, g) in s.iter().enumerate() {
        let v = g.iso.denom_sqr(h);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    best
}

/// Moves `w` towards the origin by elements of `s` until no element brings it
/// closer by more than the slack.
pub fn reduce_point(w: Point, s: &[GroupElement], budget: &PrecisionBudget) -> Result<PointReduction> {
    let mut cur = w;
    let mut word = Vec::new();
    for _ in 0..budget.max_steps {
        if 1.0 - cur.norm_sqr() < budget.height_floor {
            return Err(Error::PrecisionExhausted(format!(
                "point at height {:.3e} below the floor {:.3e}",
                1.0 - cur.norm_sqr(),
                budget.height_floor
            )));
        }
        let Some((k, v)) = best_step(cur, s) else { break };
        if 4.0 / v <= 1.0 + budget.slack {
            return Ok(PointReduction { point: cur, word });
        }
        cur = s[k].iso.act(cur, budget.eps)?;
        word.push(k);
    }
    if s.is_empty() {
        return Ok(PointReduction { point: cur, word });
    }
    Err(Error::PrecisionExhausted("reduction did not terminate within the step budget".into()))
}

/// `red_S(gamma; w)`: the element `delta gamma` with `delta` in `<S>` such that
/// `delta gamma w` is reduced. Returns the reduced element and the word of `delta`.
///
/// At the origin the test is carried out on matrix norms, which stays
/// accurate for elements far beyond the point-height floor.
pub fn reduce_element(
    group: &Group,
    gamma: &GroupElement,
    w: Point,
    s: &[GroupElement],
    budget: &PrecisionBudget,
) -> Result<(GroupElement, Vec<usize>)> {
    let mut cur = gamma.clone();
    let mut word = Vec::new();
    let at_origin = w.norm_sqr() == 0.0 && !w.at_infinity;
    for _ in 0..budget.max_steps {
        let mut best: Option<(usize, f64)> = None;
        if at_origin {
            let base = cur.iso.m.norm_sqr() + 2.0;
            for (k, g) in s.iter().enumerate() {
                let ratio = base / (g.iso.m.mul(&cur.iso.m).norm_sqr() + 2.0);
                if best.is_none_or(|(_, b)| ratio > b) {
                    best = Some((k, ratio));
                }
            }
        } else {
            let p = cur.iso.act(w, budget.eps)?;
            if 1.0 - p.norm_sqr() < budget.height_floor {
                return Err(Error::PrecisionExhausted("reduced point below the height floor".into()));
            }
            best = best_step(p, s).map(|(k, v)| (k, 4.0 / v));
        }
        let Some((k, ratio)) = best else { return Ok((cur, word)) };
        if ratio <= 1.0 + budget.slack {
            return Ok((cur, word));
        }
        cur = group.mul(&s[k], &cur)?;
        word.push(k);
    }
    Err(Error::PrecisionExhausted("element reduction did not terminate within the step budget".into()))
}
