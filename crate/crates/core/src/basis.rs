//! Normalized bases: the routines that shrink an exterior domain until it is
//! a fundamental domain, and the presentation read off from it.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ball::{Point, V3};
use crate::error::{Error, Result};
use crate::group::{eval_word, Group, GroupElement, Letter};
use crate::poly::{compute_exterior, ExteriorDomain, PolyOptions};
use crate::reduce::{reduce_element, PrecisionBudget};
use crate::vol::{klein_to_poincare, LobachevskyTable};

/// Elements with `invrad` below this are treated as fixing the origin.
const ORIGIN_FIX_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingVariant {
    /// Reduce the pairing element at a witness point on an unpaired edge.
    Reduction,
    /// Add `g h^-1, h g^-1` for every pair of intersecting spheres.
    Products,
}

#[derive(Clone, Debug)]
pub struct BasisOptions {
    pub poly: PolyOptions,
    pub budget: PrecisionBudget,
    /// Slack of the strict exterior test used to declare an edge unpaired.
    pub pairing_slack: f64,
    pub pairing: PairingVariant,
    pub edge_samples: usize,
    /// Tolerance on cycle angle sums and on matrix identities.
    pub angle_tol: f64,
    /// Distance below which ideal or finite points are identified.
    pub match_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub order_cap: usize,
    pub volume_precision: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        let budget = PrecisionBudget::default();
        Self {
            poly: PolyOptions::default(),
            budget,
            pairing_slack: 1e-6,
            pairing: PairingVariant::Reduction,
            edge_samples: 8,
            angle_tol: 1e-6,
            match_tol: 1e-6,
            max_outer: 64,
            max_inner: 64,
            order_cap: (2.0 * budget.norm_cap * budget.norm_cap) as usize,
            volume_precision: 1e-12,
        }
    }
}

/// Adds `g` unless trivial, already present or beyond the norm cap.
/// Nontrivial elements fixing the origin are reported as a degenerate base point.
pub fn insert_element(group: &Group, set: &mut Vec<GroupElement>, g: GroupElement, budget: &PrecisionBudget) -> Result<bool> {
    if group.is_trivial(&g) {
        return Ok(false);
    }
    if g.iso.invrad < ORIGIN_FIX_TOL || g.iso.sphere.is_none() {
        return Err(Error::DegenerateBasePoint("a nontrivial element fixes the origin".into()));
    }
    if g.iso.norm > budget.norm_cap {
        return Ok(false);
    }
    if set.iter().any(|h| group.same(h, &g)) {
        return Ok(false);
    }
    set.push(g);
    Ok(true)
}

pub fn exterior(set: &[GroupElement], opts: &BasisOptions) -> Result<ExteriorDomain> {
    let isos: Vec<_> = set.iter().map(|g| g.iso.clone()).collect();
    compute_exterior(&isos, &opts.poly)
}

fn minimal(set: &[GroupElement], d: &ExteriorDomain) -> Vec<GroupElement> {
    d.minimal_defining_set().into_iter().map(|k| set[k].clone()).collect()
}

fn same_elements(group: &Group, a: &[GroupElement], b: &[GroupElement]) -> bool {
    a.len() == b.len() && a.iter().all(|g| b.iter().any(|h| group.same(g, h)))
}

/// Index of the inverse of `set[k]` in `set`.
fn inverse_index(group: &Group, set: &[GroupElement], k: usize) -> Option<usize> {
    let inv = group.inverse(&set[k]);
    set.iter().position(|h| group.same(h, &inv))
}

/// Algorithm "KeepSameGroup": replace elements by their reductions against
/// the minimal defining set, dropping those that reduce to the identity.
pub fn keep_same_group(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<Vec<GroupElement>> {
    let mut s = set;
    for _ in 0..opts.max_inner.max(1) * 16 {
        if s.is_empty() {
            return Ok(s);
        }
        let d = exterior(&s, opts)?;
        let u = minimal(&s, &d);
        let mut next = u.clone();
        for g in &s {
            let (bar, _) = reduce_element(group, g, Point::ORIGIN, &u, &opts.budget)?;
            insert_element(group, &mut next, bar, &opts.budget)?;
        }
        let dn = exterior(&next, opts)?;
        let changed = !same_elements(group, &minimal(&next, &dn), &u);
        s = next;
        if !changed {
            return Ok(s);
        }
    }
    Ok(s)
}

/// `S u S^-1`.
pub fn close_under_inverse(group: &Group, set: Vec<GroupElement>, budget: &PrecisionBudget) -> Result<Vec<GroupElement>> {
    let mut s = set.clone();
    for g in &set {
        insert_element(group, &mut s, group.inverse(g), budget)?;
    }
    Ok(s)
}

fn klein_point(p: Point) -> V3 {
    let v = p.to_vec3();
    if p.at_infinity {
        return v.normalized();
    }
    crate::vol::poincare_to_klein(v)
}

/// Klein endpoints of an edge clipped to the closed ball.
fn clipped_ends(d: &ExteriorDomain, edge: usize) -> Option<[V3; 2]> {
    let [a, b] = d.edges[edge].vertices;
    let (p, q) = (d.vertices[a].klein, d.vertices[b].klein);
    if !d.vertices[a].outside && !d.vertices[b].outside {
        return Some([p, q]);
    }
    let v = q - p;
    let (qa, qb, qc) = (v.norm_sqr(), 2.0 * p.dot(v), p.norm_sqr() - 1.0);
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let (lo, hi) = (((-qb - r) / (2.0 * qa)).max(0.0), ((-qb + r) / (2.0 * qa)).min(1.0));
    (lo < hi).then(|| [p.lerp(q, lo), p.lerp(q, hi)])
}

/// Poincaré point of a Klein point of the closed ball.
fn klein_to_point(k: V3) -> Point {
    if k.norm_sqr() >= 1.0 - 1e-12 {
        Point::ideal(k)
    } else {
        Point::from_vec3(klein_to_poincare(k))
    }
}

/// The edge of the face of `g^-1` that `g` maps the edge `edge` of the face
/// of `g = set[gen]` onto, if any.
fn edge_image(d: &ExteriorDomain, set: &[GroupElement], inv_face: Option<usize>, gen: usize, edge: usize, tol: f64) -> Option<usize> {
    let fi = inv_face?;
    let g = &set[gen].iso;
    let [a, b] = clipped_ends(d, edge)?;
    let ia = klein_point(g.act_unchecked(klein_to_point(a)));
    let ib = klein_point(g.act_unchecked(klein_to_point(b)));
    d.faces[fi].edges.iter().copied().find(|&e| {
        let Some([kp, kq]) = clipped_ends(d, e) else { return false };
        ((kp - ia).norm() < tol && (kq - ib).norm() < tol) || ((kp - ib).norm() < tol && (kq - ia).norm() < tol)
    })
}

/// Face of the inverse of each face's element.
fn inverse_faces(group: &Group, set: &[GroupElement], d: &ExteriorDomain) -> Vec<Option<usize>> {
    d.faces
        .iter()
        .map(|f| inverse_index(group, set, f.gen).and_then(|j| d.face_of_gen(j)))
        .collect()
}

/// Whether `y` lies in `Int(h)` for some face element, with the given slack.
fn strictly_outside(d: &ExteriorDomain, set: &[GroupElement], y: Point, slack: f64) -> bool {
    let h = y.to_ham();
    d.faces.iter().any(|f| set[f.gen].iso.denom_sqr(h) < 4.0 / (1.0 + slack))
}

/// Whether every edge of the domain is mapped onto an edge by its pairing.
pub fn has_face_pairing(group: &Group, set: &[GroupElement], d: &ExteriorDomain, opts: &BasisOptions) -> bool {
    let inv = inverse_faces(group, set, d);
    d.faces.iter().enumerate().all(|(fi, f)| {
        inv[fi].is_some() && f.edges.iter().all(|&e| edge_image(d, set, inv[fi], f.gen, e, opts.match_tol).is_some())
    })
}

/// Statistics of a pairing pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingStats {
    pub candidates: usize,
    pub added: usize,
}

/// Algorithm "CheckPairing": for each face edge whose image is not an edge,
/// reduce the pairing element at a witness point and add the result.
pub fn check_pairing(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<(Vec<GroupElement>, PairingStats)> {
    let mut s = close_under_inverse(group, set, &opts.budget)?;
    let d = exterior(&s, opts)?;
    let inv = inverse_faces(group, &s, &d);
    let margin = opts.budget.height_floor * 2.0;
    let mut stats = PairingStats::default();
    let mut found = Vec::new();
    for (fi, f) in d.faces.iter().enumerate() {
        let g = &s[f.gen];
        let mut witnesses: Vec<Vec<V3>> = Vec::new();
        for &e in &f.edges {
            if edge_image(&d, &s, inv[fi], f.gen, e, opts.match_tol).is_some() {
                continue;
            }
            witnesses.push(d.edge_samples(e, opts.edge_samples, margin));
        }
        if inv[fi].is_none() || f.edges.is_empty() {
            witnesses.push(d.face_samples(fi, margin));
        }
        for pts in witnesses {
            for x in pts {
                let xp = Point::from_vec3(x);
                stats.candidates += 1;
                let y = g.iso.act_unchecked(xp);
                if strictly_outside(&d, &s, y, opts.pairing_slack) {
                    match reduce_element(group, g, xp, &s, &opts.budget) {
                        Ok((bar, _)) => found.push(bar),
                        Err(Error::PrecisionExhausted(_)) => continue,
                        Err(e) => return Err(e),
                    }
                    break;
                }
            }
        }
    }
    for bar in found {
        let binv = group.inverse(&bar);
        stats.added += insert_element(group, &mut s, bar, &opts.budget)? as usize;
        stats.added += insert_element(group, &mut s, binv, &opts.budget)? as usize;
    }
    Ok((s, stats))
}

/// Algorithm "CheckPairing'": add `g h^-1` and `h g^-1` for every pair of face
/// elements with intersecting isometric spheres, `h != g^-1`.
pub fn check_pairing_alt(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<(Vec<GroupElement>, PairingStats)> {
    let mut s = close_under_inverse(group, set, &opts.budget)?;
    let d = exterior(&s, opts)?;
    let gens = d.minimal_defining_set();
    let mut stats = PairingStats::default();
    let mut found = Vec::new();
    for (i, &a) in gens.iter().enumerate() {
        for &b in &gens[i + 1..] {
            let (sa, sb) = (s[a].iso.sphere.unwrap(), s[b].iso.sphere.unwrap());
            let dist = (sa.center - sb.center).norm();
            if dist >= sa.radius + sb.radius || dist <= (sa.radius - sb.radius).abs() {
                continue;
            }
            if group.same(&s[b], &group.inverse(&s[a])) {
                continue;
            }
            stats.candidates += 1;
            found.push(group.mul(&s[a], &group.inverse(&s[b]))?);
            found.push(group.mul(&s[b], &group.inverse(&s[a]))?);
        }
    }
    for g in found {
        stats.added += insert_element(group, &mut s, g, &opts.budget)? as usize;
    }
    Ok((s, stats))
}

/// An edge cycle of a paired domain.
#[derive(Clone, Debug)]
pub struct EdgeCycle {
    pub edges: Vec<usize>,
    /// Index (into the element list) of the pairing applied at each step.
    pub transforms: Vec<usize>,
    pub angle_sum: f64,
    /// `h = g_m ... g_1`.
    pub transformation: GroupElement,
    /// Order of `h` when it fixes the edge pointwise (1 when `h = +-1`).
    pub order: Option<usize>,
    /// `h` fixes the first edge pointwise.
    pub fixes_edge: bool,
}

impl EdgeCycle {
    pub fn expected_angle(&self) -> Option<f64> {
        self.order.map(|nu| 2.0 * PI / nu as f64)
    }
}

fn fixes_points(g: &GroupElement, pts: &[V3], tol: f64) -> bool {
    pts.iter().all(|&x| (g.iso.act_unchecked(Point::from_vec3(x)).to_vec3() - x).norm() < tol)
}

/// Smallest `k <= cap` with `g^k = +-1`.
fn element_order(group: &Group, g: &GroupElement, cap: usize) -> Result<Option<usize>> {
    let mut acc = g.clone();
    for k in 1..=cap {
        if group.is_trivial(&acc) {
            return Ok(Some(k));
        }
        acc = group.mul(&acc, g)?;
    }
    Ok(None)
}

/// Edge cycles of a domain with a face pairing. Each edge appears in exactly
/// one cycle; the two traversal directions are identified.
pub fn edge_cycles(group: &Group, set: &[GroupElement], d: &ExteriorDomain, opts: &BasisOptions) -> Result<Vec<EdgeCycle>> {
    let inv = inverse_faces(group, set, d);
    let margin = opts.budget.height_floor * 2.0;
    let mut visited: HashSet<(usize, usize)> = HashSet::new();
    let mut seen_sets: HashSet<Vec<usize>> = HashSet::new();
    let mut cycles = Vec::new();
    for e0 in 0..d.edges.len() {
        for &f0 in &d.edges[e0].faces {
            if visited.contains(&(e0, f0)) {
                continue;
            }
            let mut seq: Vec<(usize, usize)> = Vec::new();
            let mut cur = (e0, f0);
            loop {
                visited.insert(cur);
                seq.push(cur);
                let (e, f) = cur;
                let gen = d.faces[f].gen;
                let img = edge_image(d, set, inv[f], gen, e, opts.match_tol).ok_or(Error::NotPaired(e))?;
                let fi = inv[f].ok_or(Error::NotPaired(e))?;
                let [a, b] = d.edges[img].faces;
                let next_face = if a == fi { b } else { a };
                cur = (img, next_face);
                if cur == (e0, f0) {
                    break;
                }
                if seq.len() > 2 * d.edges.len() + 2 {
                    return Err(Error::NotPaired(e0));
                }
            }
            let mut key: Vec<usize> = seq.iter().map(|&(e, _)| e).collect();
            key.sort_unstable();
            if !seen_sets.insert(key) {
                continue;
            }
            let transforms: Vec<usize> = seq.iter().map(|&(_, f)| d.faces[f].gen).collect();
            let mut h = group.identity();
            for &t in &transforms {
                h = group.mul(&set[t], &h)?;
            }
            let angle_sum: f64 = seq.iter().map(|&(e, _)| d.dihedral_angle(e)).sum();
            let samples = d.edge_samples(e0, 1, margin);
            let trivial = group.is_trivial(&h);
            let fixes_edge = trivial || (samples.len() >= 2 && fixes_points(&h, &samples, opts.match_tol));
            let order = if trivial {
                Some(1)
            } else if fixes_edge {
                match element_order(group, &h, opts.order_cap)? {
                    Some(k) => Some(k),
                    None => return Err(Error::NonFiniteOrder(opts.order_cap)),
                }
            } else {
                None
            };
            cycles.push(EdgeCycle {
                edges: seq.iter().map(|&(e, _)| e).collect(),
                transforms,
                angle_sum,
                transformation: h,
                order,
                fixes_edge,
            });
        }
    }
    Ok(cycles)
}

/// Whether a cycle meets the angle condition `sum = 2 pi / nu`.
pub fn cycle_ok(c: &EdgeCycle, tol: f64) -> bool {
    c.expected_angle().is_some_and(|a| (c.angle_sum - a).abs() <= tol)
}

/// How often each branch of the cycle check fired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStats {
    /// `h` does not fix its edge pointwise.
    pub moved: usize,
    /// `h` elliptic about the edge with the wrong angle.
    pub elliptic: usize,
    /// `h = +-1` with an angle sum other than `2 pi`.
    pub overflow: usize,
}

/// Algorithm "CheckCycleCondition".
pub fn check_cycle_condition(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<Vec<GroupElement>> {
    check_cycle_condition_stats(group, set, opts).map(|(s, _)| s)
}

pub fn check_cycle_condition_stats(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<(Vec<GroupElement>, CycleStats)> {
    let mut stats = CycleStats::default();
    let mut s = set;
    let d = exterior(&s, opts)?;
    let cycles = edge_cycles(group, &s, &d, opts)?;
    let mut found = Vec::new();
    for c in &cycles {
        let h = &c.transformation;
        let trivial = c.order == Some(1);
        if !trivial && !c.fixes_edge {
            stats.moved += 1;
            found.push(h.clone());
            found.push(group.inverse(h));
        } else if !trivial {
            if c.edges.len() > 1 && !cycle_ok(c, opts.angle_tol) {
                return Err(Error::DegenerateBasePoint("elliptic cycle of length above one".into()));
            }
            if !cycle_ok(c, opts.angle_tol) {
                stats.elliptic += 1;
                let nu = c.order.unwrap_or(1);
                let mut p = h.clone();
                for _ in 1..nu {
                    found.push(p.clone());
                    p = group.mul(&p, h)?;
                }
            }
        } else if !cycle_ok(c, opts.angle_tol) {
            stats.overflow += 1;
            let mut p = group.identity();
            for &t in &c.transforms[..c.transforms.len() - 1] {
                p = group.mul(&s[t], &p)?;
                found.push(p.clone());
                found.push(group.inverse(&p));
            }
        }
    }
    for g in found {
        insert_element(group, &mut s, g, &opts.budget)?;
    }
    Ok((s, stats))
}

/// A periodic chain of tangency vertices.
#[derive(Clone, Debug)]
pub struct TangencyCycle {
    pub vertices: Vec<usize>,
    pub transforms: Vec<usize>,
    pub transformation: GroupElement,
}

impl TangencyCycle {
    pub fn is_parabolic(&self, tol: f64) -> bool {
        let t = self.transformation.iso.trace();
        (t.norm() - 2.0).abs() <= tol && t.im.abs() <= tol
    }

    pub fn is_loxodromic(&self, tol: f64) -> bool {
        let t = self.transformation.iso.trace();
        !(t.im.abs() <= tol && t.re.abs() <= 2.0 + tol)
    }
}

/// Tangency vertex cycles: from a pair of faces `(a, b)` tangent at `z`,
/// move to `g_b z`, where the face of `g_b^-1` must again be tangent to a
/// face. Chains that end are dropped.
pub fn tangency_cycles(group: &Group, set: &[GroupElement], d: &ExteriorDomain, opts: &BasisOptions) -> Result<Vec<TangencyCycle>> {
    let inv = inverse_faces(group, set, d);
    let mut records: Vec<(usize, usize, usize)> = Vec::new();
    for t in &d.tangencies {
        records.push((t.vertex, t.faces[0], t.faces[1]));
        records.push((t.vertex, t.faces[1], t.faces[0]));
    }
    let find_vertex = |p: V3| {
        d.vertices.iter().position(|v| v.ideal && (v.klein - p).norm() < opts.match_tol)
    };
    let mut seen: BTreeSet<Vec<(usize, usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in &records {
        let mut cur = start;
        let mut chain = vec![];
        let mut closed = false;
        for _ in 0..=records.len() {
            chain.push(cur);
            let (v, _, b) = cur;
            let gen = d.faces[b].gen;
            let img = set[gen].iso.act_unchecked(Point::ideal(d.vertices[v].klein)).to_vec3().normalized();
            let (Some(v2), Some(a2)) = (find_vertex(img), inv[b]) else { break };
            let Some(&(_, _, b2)) = records.iter().find(|&&(vv, aa, _)| vv == v2 && aa == a2) else { break };
            cur = (v2, a2, b2);
            if cur == start {
                closed = true;
                break;
            }
        }
        if !closed {
            continue;
        }
        let mut key = chain.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        let transforms: Vec<usize> = chain.iter().map(|&(_, _, b)| d.faces[b].gen).collect();
        let mut h = group.identity();
        for &t in &transforms {
            h = group.mul(&set[t], &h)?;
        }
        out.push(TangencyCycle { vertices: chain.iter().map(|&(v, _, _)| v).collect(), transforms, transformation: h });
    }
    Ok(out)
}

/// Algorithm "CheckComplete": add loxodromic tangency transformations.
pub fn check_complete(group: &Group, set: Vec<GroupElement>, opts: &BasisOptions) -> Result<Vec<GroupElement>> {
    let mut s = set;
    let d = exterior(&s, opts)?;
    if d.tangencies.is_empty() {
        return Ok(s);
    }
    let mut found = Vec::new();
    for c in tangency_cycles(group, &s, &d, opts)? {
        if c.is_loxodromic(opts.angle_tol) {
            found.push(group.inverse(&c.transformation));
            found.push(c.transformation);
        }
    }
    for g in found {
        insert_element(group, &mut s, g, &opts.budget)?;
    }
    Ok(s)
}

/// Hyperbolic volume of a bounded exterior domain.
pub fn domain_volume(d: &ExteriorDomain, table: &LobachevskyTable) -> Result<f64> {
    if !d.bounded {
        return Err(Error::UnboundedDomain);
    }
    Ok(table.polyhedron(&d.face_polygons(), V3::ZERO))
}

/// Outcome of the Poincaré checks on a domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub bounded: bool,
    pub paired: bool,
    pub cycles_ok: bool,
    pub complete: bool,
    pub euler: Option<i64>,
    pub cycle_count: usize,
    pub tangency_count: usize,
    pub max_angle_error: f64,
    pub max_power_error: f64,
    pub max_tangency_trace_error: f64,
}

impl PoincareReport {
    pub fn all_ok(&self) -> bool {
        self.bounded && self.paired && self.cycles_ok && self.complete && self.euler == Some(2)
    }
}

/// Checks face pairing, the cycle condition and completeness.
pub fn poincare_report(group: &Group, set: &[GroupElement], d: &ExteriorDomain, opts: &BasisOptions) -> Result<PoincareReport> {
    let mut r = PoincareReport { bounded: d.bounded, ..Default::default() };
    if d.bounded {
        r.euler = Some(d.euler_characteristic());
    }
    r.paired = has_face_pairing(group, set, d, opts);
    if !r.paired {
        return Ok(r);
    }
    let cycles = edge_cycles(group, set, d, opts)?;
    r.cycle_count = cycles.len();
    r.cycles_ok = true;
    for c in &cycles {
        match c.expected_angle() {
            Some(a) => {
                r.max_angle_error = r.max_angle_error.max((c.angle_sum - a).abs());
                let nu = c.order.unwrap_or(1);
                let p = group.pow(&c.transformation, nu)?;
                r.max_power_error = r.max_power_error.max(p.iso.m.dist_pm(&crate::ball::Mat2::IDENTITY));
            }
            None => r.cycles_ok = false,
        }
    }
    r.cycles_ok &= r.max_angle_error <= opts.angle_tol && r.max_power_error <= opts.angle_tol;
    let tcycles = tangency_cycles(group, set, d, opts)?;
    r.tangency_count = tcycles.len();
    r.complete = true;
    for c in &tcycles {
        let t = c.transformation.iso.trace();
        r.max_tangency_trace_error = r.max_tangency_trace_error.max((t.norm() - 2.0).abs());
        if !c.is_parabolic(opts.angle_tol) {
            r.complete = false;
        }
    }
    Ok(r)
}

/// Timings (seconds) per routine.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub enumerate: f64,
    pub keep_same_group: f64,
    pub check_pairing: f64,
    pub check_cycle_condition: f64,
    pub check_complete: f64,
    pub is_full_group: f64,
}

#[derive(Clone, Debug)]
pub struct NormalizedBasis {
    pub elements: Vec<GroupElement>,
    pub domain: ExteriorDomain,
    pub report: PoincareReport,
    pub volume: f64,
    pub outer_iterations: usize,
    pub enumeration_level: u32,
    pub timings: Timings,
    pub pairing_stats: PairingStats,
    pub cycle_stats: CycleStats,
}

/// Canonical order: by `invrad`, then coordinates or matrix entries.
fn sort_elements(set: &mut [GroupElement]) {
    set.sort_by(|a, b| {
        a.iso.invrad.total_cmp(&b.iso.invrad).then_with(|| match (&a.coords, &b.coords) {
            (Some(x), Some(y)) => crate::group::canonical_coords(x).cmp(&crate::group::canonical_coords(y)),
            _ => {
                let c = |g: &GroupElement| {
                    let s = g.iso.sphere.unwrap();
                    s.center.0
                };
                let (p, q) = (c(a), c(b));
                p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(p[2].total_cmp(&q[2]))
            }
        })
    });
}

/// The normalized basis algorithm. `enumerate(n)` supplies group elements,
/// `is_full_group(set, domain, volume)` decides whether `<S>` is the whole group.
pub fn normalized_basis<E, F>(group: &Group, mut enumerate: E, mut is_full_group: F, opts: &BasisOptions) -> Result<NormalizedBasis>
where
    E: FnMut(u32) -> Result<Vec<GroupElement>>,
    F: FnMut(&[GroupElement], &ExteriorDomain, f64) -> Result<bool>,
{
    let table = LobachevskyTable::new(opts.volume_precision);
    let mut s: Vec<GroupElement> = Vec::new();
    let mut n: u32 = 0;
    let mut timings = Timings::default();
    let mut stats = PairingStats::default();
    let mut cycle_stats = CycleStats::default();
    for outer in 0..opts.max_outer {
        for _ in 0..opts.max_inner {
            n += 1;
            let t = Instant::now();
            for g in enumerate(n)? {
                insert_element(group, &mut s, g, &opts.budget)?;
            }
            timings.enumerate += t.elapsed().as_secs_f64();
            if s.is_empty() {
                continue;
            }
            let before = minimal(&s, &exterior(&s, opts)?);

            let t = Instant::now();
            s = keep_same_group(group, s, opts)?;
            timings.keep_same_group += t.elapsed().as_secs_f64();

            let t = Instant::now();
            let (s2, st) = match opts.pairing {
                PairingVariant::Reduction => check_pairing(group, s, opts)?,
                PairingVariant::Products => check_pairing_alt(group, s, opts)?,
            };
            s = s2;
            stats.candidates += st.candidates;
            stats.added += st.added;
            timings.check_pairing += t.elapsed().as_secs_f64();

            let d = exterior(&s, opts)?;
            if has_face_pairing(group, &s, &d, opts) {
                let t = Instant::now();
                let (s2, cs) = check_cycle_condition_stats(group, s, opts)?;
                s = s2;
                cycle_stats.moved += cs.moved;
                cycle_stats.elliptic += cs.elliptic;
                cycle_stats.overflow += cs.overflow;
                timings.check_cycle_condition += t.elapsed().as_secs_f64();
                let d = exterior(&s, opts)?;
                if has_face_pairing(group, &s, &d, opts) {
                    let t = Instant::now();
                    s = check_complete(group, s, opts)?;
                    timings.check_complete += t.elapsed().as_secs_f64();
                }
            }
            let d = exterior(&s, opts)?;
            if same_elements(group, &minimal(&s, &d), &before) {
                break;
            }
        }
        let d = exterior(&s, opts)?;
        let u = minimal(&s, &d);
        let report = poincare_report(group, &u, &d_of(&u, opts)?, opts)?;
        if report.all_ok() {
            let t = Instant::now();
            let mut basis = u;
            sort_elements(&mut basis);
            let domain = exterior(&basis, opts)?;
            let volume = domain_volume(&domain, &table)?;
            let full = is_full_group(&basis, &domain, volume)?;
            timings.is_full_group += t.elapsed().as_secs_f64();
            if full {
                let report = poincare_report(group, &basis, &domain, opts)?;
                return Ok(NormalizedBasis {
                    elements: basis,
                    domain,
                    report,
                    volume,
                    outer_iterations: outer + 1,
                    enumeration_level: n,
                    timings,
                    pairing_stats: stats,
                    cycle_stats,
                });
            }
        }
    }
    Err(Error::BudgetExceeded(opts.max_outer))
}

fn d_of(set: &[GroupElement], opts: &BasisOptions) -> Result<ExteriorDomain> {
    exterior(set, opts)
}

/// A finite presentation read off a normalized basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Presentation {
    /// Basis indices of the generators (one per inverse pair).
    pub generators: Vec<usize>,
    /// For each basis element, the generator letter representing it.
    pub letter_of: Vec<Letter>,
    pub relations: Vec<Vec<Letter>>,
}

/// Cancels adjacent inverse letters.
pub fn free_reduce(word: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for &l in word {
        if out.last().is_some_and(|p| p.gen == l.gen && p.inv != l.inv) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl Presentation {
    pub fn generator_elements(&self, basis: &[GroupElement]) -> Vec<GroupElement> {
        self.generators.iter().map(|&k| basis[k].clone()).collect()
    }

    /// The word map: writes `gamma` in the generators when it reduces to `+-1`.
    pub fn word_for(&self, group: &Group, basis: &[GroupElement], gamma: &GroupElement, budget: &PrecisionBudget) -> Result<Option<Vec<Letter>>> {
        let (bar, word) = reduce_element(group, gamma, Point::ORIGIN, basis, budget)?;
        if !group.is_trivial(&bar) {
            return Ok(None);
        }
        Ok(Some(free_reduce(
            &word.iter().map(|&k| Letter { gen: self.letter_of[k].gen, inv: !self.letter_of[k].inv }).collect::<Vec<_>>(),
        )))
    }

    /// The evaluation map.
    pub fn evaluate(&self, group: &Group, basis: &[GroupElement], word: &[Letter]) -> Result<GroupElement> {
        eval_word(group, &self.generator_elements(basis), word)
    }
}

/// Generators are the face pairings; relations are the reflection relations
/// `g^2` for self-paired faces and one cycle relation `h^nu` per edge cycle.
pub fn presentation(group: &Group, basis: &[GroupElement], d: &ExteriorDomain, opts: &BasisOptions) -> Result<Presentation> {
    let mut letter_of: Vec<Option<Letter>> = vec![None; basis.len()];
    let mut generators = Vec::new();
    let mut relations = Vec::new();
    for i in 0..basis.len() {
        if letter_of[i].is_some() {
            continue;
        }
        let k = generators.len();
        generators.push(i);
        letter_of[i] = Some(Letter { gen: k, inv: false });
        match inverse_index(group, basis, i) {
            Some(j) if j != i => letter_of[j] = Some(Letter { gen: k, inv: true }),
            Some(_) => relations.push(vec![Letter { gen: k, inv: false }; 2]),
            None => return Err(Error::NotPaired(i)),
        }
    }
    let letter_of: Vec<Letter> = letter_of.into_iter().map(|l| l.expect("assigned")).collect();
    let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
    for c in edge_cycles(group, basis, d, opts)? {
        let nu = c.order.ok_or(Error::NonFiniteOrder(opts.order_cap))?;
        let once: Vec<Letter> = c.transforms.iter().rev().map(|&t| letter_of[t]).collect();
        let word: Vec<Letter> = free_reduce(&once.repeat(nu));
        if word.is_empty() || seen.contains(&word) {
            continue;
        }
        seen.insert(word.clone());
        relations.push(word);
    }
    Ok(Presentation { generators, letter_of, relations })
}
