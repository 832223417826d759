//! Exterior domains `Ext(S)`: the face/edge/vertex lattice of the
//! intersection of the exteriors of isometric spheres.
//!
//! Each isometric sphere with centre `c` meets the ball in a geodesic plane
//! whose Klein-model image is the flat disc `x . c = 1`; the exterior (the side
//! containing the origin) is `x . c < 1`. The domain is therefore a convex
//! Euclidean polytope intersected with the ball, built by clipping a box with
//! one half-space at a time.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ball::{Isometry, Point, Sphere, V3};
use crate::error::{Error, Result};
use crate::vol::klein_to_poincare;

const BOX: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Label {
    Box(usize),
    Gen(usize),
}

#[derive(Clone, Debug)]
struct PFace {
    label: Label,
    verts: Vec<usize>,
}

/// A convex polytope `{x : n_k . x <= 1}` with faces stored as vertex loops,
/// counter-clockwise seen from outside.
#[derive(Clone, Debug)]
struct Polytope {
    verts: Vec<V3>,
    faces: Vec<PFace>,
}

impl Polytope {
    fn cube() -> Self {
        let s = BOX;
        let verts: Vec<V3> = (0..8)
            .map(|k| V3::new(if k & 1 == 1 { s } else { -s }, if k & 2 == 2 { s } else { -s }, if k & 4 == 4 { s } else { -s }))
            .collect();
        // loops chosen so that the right-hand normal points outward
        let loops: [(usize, [usize; 4]); 6] = [
            (0, [1, 3, 7, 5]),
            (1, [0, 4, 6, 2]),
            (2, [2, 6, 7, 3]),
            (3, [0, 1, 5, 4]),
            (4, [4, 5, 7, 6]),
            (5, [0, 2, 3, 1]),
        ];
        let faces = loops
            .iter()
            .map(|(k, l)| PFace { label: Label::Box(*k), verts: l.to_vec() })
            .collect();
        Self { verts, faces }
    }

    /// Intersects with `normal . x <= 1`. Returns whether anything was cut.
    fn clip(&mut self, label: Label, normal: V3, tol: f64) -> bool {
        let inv_len = 1.0 / normal.norm();
        let dist: Vec<f64> = self.verts.iter().map(|v| (normal.dot(*v) - 1.0) * inv_len).collect();
        let used: Vec<bool> = {
            let mut u = vec![false; self.verts.len()];
            for f in &self.faces {
                for &v in &f.verts {
                    u[v] = true;
                }
            }
            u
        };
        if !dist.iter().zip(&used).any(|(d, &u)| u && *d > tol) {
            return false;
        }
        let out = |v: usize| dist[v] > tol;
        let strictly_in = |v: usize| dist[v] < -tol;
        let mut cut_cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut on_plane: Vec<usize> = Vec::new();
        let mut new_faces = Vec::with_capacity(self.faces.len() + 1);
        for face in &self.faces {
            let n = face.verts.len();
            let mut lp = Vec::with_capacity(n + 2);
            for k in 0..n {
                let a = face.verts[k];
                let b = face.verts[(k + 1) % n];
                if !out(a) {
                    lp.push(a);
                }
                if (strictly_in(a) && out(b)) || (out(a) && strictly_in(b)) {
                    let key = (a.min(b), a.max(b));
                    let idx = *cut_cache.entry(key).or_insert_with(|| {
                        let (p, q) = (self.verts[key.0], self.verts[key.1]);
                        let (dp, dq) = (dist[key.0], dist[key.1]);
                        let s = dp / (dp - dq);
                        self.verts.push(p.lerp(q, s));
                        self.verts.len() - 1
                    });
                    lp.push(idx);
                }
            }
            lp.dedup();
            if lp.len() > 1 && lp.first() == lp.last() {
                lp.pop();
            }
            if lp.len() >= 3 {
                new_faces.push(PFace { verts: lp, ..face.clone() });
            }
        }
        for f in &new_faces {
            for &v in &f.verts {
                let on = v >= dist.len() || dist[v].abs() <= tol;
                if on && !on_plane.contains(&v) {
                    on_plane.push(v);
                }
            }
        }
        // merge coincident cap vertices
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut cap: Vec<usize> = Vec::new();
        for &v in &on_plane {
            match cap.iter().find(|&&w| (self.verts[w] - self.verts[v]).norm() <= tol) {
                Some(&w) => {
                    remap.insert(v, w);
                }
                None => cap.push(v),
            }
        }
        if !remap.is_empty() {
            for f in &mut new_faces {
                for v in &mut f.verts {
                    if let Some(&w) = remap.get(v) {
                        *v = w;
                    }
                }
                f.verts.dedup();
                if f.verts.len() > 1 && f.verts.first() == f.verts.last() {
                    f.verts.pop();
                }
            }
            new_faces.retain(|f| f.verts.len() >= 3);
        }
        if cap.len() >= 3 {
            let centroid = cap.iter().fold(V3::ZERO, |acc, &v| acc + self.verts[v]).scale(1.0 / cap.len() as f64);
            let nz = normal.normalized();
            let helper = if nz.0[0].abs() < 0.9 { V3::new(1.0, 0.0, 0.0) } else { V3::new(0.0, 1.0, 0.0) };
            let u = nz.cross(helper).normalized();
            let w = nz.cross(u);
            let mut keyed: Vec<(f64, usize)> = cap
                .iter()
                .map(|&v| {
                    let d = self.verts[v] - centroid;
                    (d.dot(w).atan2(d.dot(u)), v)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
            new_faces.push(PFace { label, verts: keyed.into_iter().map(|(_, v)| v).collect() });
        }
        self.faces = new_faces;
        true
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainVertex {
    /// Klein-model position.
    pub klein: V3,
    pub ideal: bool,
    /// Outside the closed ball (only in infinite-volume domains).
    pub outside: bool,
    pub faces: Vec<usize>,
}

impl DomainVertex {
    /// Position in the Poincaré ball (meaningless when `outside`).
    pub fn point(&self) -> Point {
        if self.ideal {
            Point::ideal(self.klein)
        } else {
            Point::from_vec3(klein_to_poincare(self.klein))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainFace {
    /// Index of the defining element in the input list.
    pub gen: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainEdge {
    pub faces: [usize; 2],
    pub vertices: [usize; 2],
}

/// Two faces touching tangentially at an ideal vertex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tangency {
    pub vertex: usize,
    pub faces: [usize; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExteriorDomain {
    pub spheres: Vec<Sphere>,
    pub faces: Vec<DomainFace>,
    pub edges: Vec<DomainEdge>,
    pub vertices: Vec<DomainVertex>,
    pub tangencies: Vec<Tangency>,
    /// Every vertex lies in the closed ball (finite hyperbolic volume).
    pub bounded: bool,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PolyOptions {
    /// Merge distance for vertices and plane-incidence tolerance (Klein model).
    pub vertex_tol: f64,
}

impl Default for PolyOptions {
    fn default() -> Self {
        Self { vertex_tol: 1e-9 }
    }
}

/// The Klein image of an isometric sphere with centre `c` is the plane `x . c = 1`.
pub fn klein_normal(s: &Sphere) -> V3 {
    s.center
}

/// Distance from the origin to a convex planar polygon.
fn origin_distance_to_polygon(pts: &[V3], normal: V3) -> f64 {
    let nz = normal.normalized();
    let foot = nz.scale(1.0 / normal.norm());
    let n = pts.len();
    let mut inside = true;
    for k in 0..n {
        let (a, b) = (pts[k], pts[(k + 1) % n]);
        if (b - a).cross(foot - a).dot(nz) < 0.0 {
            inside = false;
            break;
        }
    }
    if inside {
        return foot.norm();
    }
    (0..n).map(|k| origin_distance_to_segment(pts[k], pts[(k + 1) % n])).fold(f64::INFINITY, f64::min)
}

fn origin_distance_to_segment(a: V3, b: V3) -> f64 {
    let d = b - a;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return a.norm();
    }
    let s = (-a.dot(d) / dd).clamp(0.0, 1.0);
    (a + d.scale(s)).norm()
}

/// Builds the lattice of `Ext(S)` for the given elements, in input order.
pub fn compute_exterior(elements: &[Isometry], opts: &PolyOptions) -> Result<ExteriorDomain> {
    let tol = opts.vertex_tol;
    let mut spheres = Vec::with_capacity(elements.len());
    for (k, g) in elements.iter().enumerate() {
        spheres.push(g.sphere.ok_or(Error::OriginFixed(k))?);
    }
    let normals: Vec<V3> = spheres.iter().map(klein_normal).collect();
    let mut order: Vec<usize> = (0..spheres.len()).collect();
    order.sort_by(|&a, &b| {
        spheres[b]
            .radius
            .total_cmp(&spheres[a].radius)
            .then_with(|| {
                let (ca, cb) = (spheres[a].center.0, spheres[b].center.0);
                ca[0].total_cmp(&cb[0]).then(ca[1].total_cmp(&cb[1])).then(ca[2].total_cmp(&cb[2]))
            })
            .then(a.cmp(&b))
    });
    for w in order.windows(2) {
        if (normals[w[0]] - normals[w[1]]).norm() <= tol {
            return Err(Error::DegenerateIncidence(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    // exact duplicates might not be adjacent in the sort when radii tie within tol
    {
        let mut keyed: Vec<(i64, usize)> = order.iter().map(|&k| ((normals[k].norm() / tol).round() as i64, k)).collect();
        keyed.sort();
        for i in 0..keyed.len() {
            for j in i + 1..keyed.len() {
                if keyed[j].0 - keyed[i].0 > 1 {
                    break;
                }
                let (a, b) = (keyed[i].1, keyed[j].1);
                if (normals[a] - normals[b]).norm() <= tol {
                    return Err(Error::DegenerateIncidence(a.min(b), a.max(b)));
                }
            }
        }
    }

    let mut poly = Polytope::cube();
    for &k in &order {
        poly.clip(Label::Gen(k), normals[k], tol);
    }
    Ok(assemble(poly, spheres, &normals, tol))
}

fn assemble(poly: Polytope, spheres: Vec<Sphere>, normals: &[V3], tol: f64) -> ExteriorDomain {
    let mut vmap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices: Vec<DomainVertex> = Vec::new();
    let mut bounded = true;
    for f in &poly.faces {
        if matches!(f.label, Label::Box(_)) {
            bounded = false;
        }
        for &v in &f.verts {
            vmap.entry(v).or_insert_with(|| {
                let p = poly.verts[v];
                let r = p.norm();
                let ideal = (r - 1.0).abs() <= tol;
                let outside = r > 1.0 + tol;
                if outside {
                    bounded = false;
                }
                vertices.push(DomainVertex { klein: if ideal { p.normalized() } else { p }, ideal, outside, faces: vec![] });
                vertices.len() - 1
            });
        }
    }

    let mut faces: Vec<DomainFace> = Vec::new();
    let mut face_of_pface: Vec<Option<usize>> = vec![None; poly.faces.len()];
    for (pi, f) in poly.faces.iter().enumerate() {
        let Label::Gen(g) = f.label else { continue };
        let pts: Vec<V3> = f.verts.iter().map(|&v| poly.verts[v]).collect();
        if !bounded && origin_distance_to_polygon(&pts, normals[g]) >= 1.0 - tol {
            continue;
        }
        face_of_pface[pi] = Some(faces.len());
        faces.push(DomainFace { gen: g, vertices: f.verts.iter().map(|v| vmap[v]).collect(), edges: vec![] });
    }

    let mut edge_faces: BTreeMap<(usize, usize), Vec<Option<usize>>> = BTreeMap::new();
    for (pi, f) in poly.faces.iter().enumerate() {
        let n = f.verts.len();
        for k in 0..n {
            let (a, b) = (vmap[&f.verts[k]], vmap[&f.verts[(k + 1) % n]]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(face_of_pface[pi]);
        }
    }
    let mut edges: Vec<DomainEdge> = Vec::new();
    for ((a, b), fs) in edge_faces {
        if fs.len() != 2 {
            continue;
        }
        let (Some(f1), Some(f2)) = (fs[0], fs[1]) else { continue };
        if !bounded && origin_distance_to_segment(vertices[a].klein, vertices[b].klein) >= 1.0 - tol {
            continue;
        }
        if vertices[a].ideal && vertices[b].ideal && origin_distance_to_segment(vertices[a].klein, vertices[b].klein) >= 1.0 - tol {
            continue;
        }
        let e = edges.len();
        edges.push(DomainEdge { faces: [f1, f2], vertices: [a, b] });
        faces[f1].edges.push(e);
        faces[f2].edges.push(e);
    }
    for (fi, f) in faces.iter().enumerate() {
        for &v in &f.vertices {
            vertices[v].faces.push(fi);
        }
    }

    let mut tangencies = Vec::new();
    for (vi, v) in vertices.iter().enumerate() {
        if !v.ideal {
            continue;
        }
        for (i, &f1) in v.faces.iter().enumerate() {
            for &f2 in &v.faces[i + 1..] {
                let d = normals[faces[f1].gen].cross(normals[faces[f2].gen]);
                let dn = d.norm();
                if dn > 0.0 && (d.dot(v.klein) / dn).abs() <= tol.sqrt() {
                    tangencies.push(Tangency { vertex: vi, faces: [f1, f2] });
                }
            }
        }
    }

    ExteriorDomain { spheres, faces, edges, vertices, tangencies, bounded, tolerance: tol }
}

impl ExteriorDomain {
    /// Indices (into the input list) of the elements supporting a face.
    pub fn minimal_defining_set(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().map(|f| f.gen).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn face_of_gen(&self, gen: usize) -> Option<usize> {
        self.faces.iter().position(|f| f.gen == gen)
    }

    /// Interior dihedral angle along an edge, from the two sphere radii and
    /// the distance between their centres.
    pub fn dihedral_angle(&self, edge: usize) -> f64 {
        let [f1, f2] = self.edges[edge].faces;
        let s1 = self.spheres[self.faces[f1].gen];
        let s2 = self.spheres[self.faces[f2].gen];
        sphere_angle(&s1, &s2)
    }

    /// Euler characteristic `F - E + V` of the domain lattice.
    pub fn euler_characteristic(&self) -> i64 {
        let used = self.vertices.iter().filter(|v| !v.faces.is_empty()).count();
        self.faces.len() as i64 - self.edges.len() as i64 + used as i64
    }

    /// Klein-model membership: strictly on the origin side of every face plane.
    pub fn contains_klein(&self, x: V3) -> bool {
        x.norm_sqr() < 1.0 && self.faces.iter().all(|f| klein_normal(&self.spheres[f.gen]).dot(x) < 1.0)
    }

    /// Face polygons in the Klein model, for the volume engine.
    pub fn face_polygons(&self) -> Vec<Vec<V3>> {
        self.faces.iter().map(|f| f.vertices.iter().map(|&v| self.vertices[v].klein).collect()).collect()
    }

    /// Number of faces through each ideal vertex, for vertices met by three or
    /// more faces (cusps).
    pub fn cusps(&self) -> Vec<(usize, usize)> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.ideal && v.faces.len() >= 3)
            .map(|(k, v)| (k, v.faces.len()))
            .collect()
    }

    /// Poincaré-ball points along an edge, restricted to the part with
    /// `1 - |x|^2 >= margin`.
    pub fn edge_samples(&self, edge: usize, count: usize, margin: f64) -> Vec<V3> {
        let [a, b] = self.edges[edge].vertices;
        segment_samples(self.vertices[a].klein, self.vertices[b].klein, count, margin)
    }

    /// Sample points of a face: the point nearest the origin when it lies on
    /// the face, and the vertex centroid.
    pub fn face_samples(&self, face: usize, margin: f64) -> Vec<V3> {
        let f = &self.faces[face];
        let c = klein_normal(&self.spheres[f.gen]);
        let pts: Vec<V3> = f.vertices.iter().map(|&v| self.vertices[v].klein).collect();
        let mut out = Vec::new();
        let foot = c.scale(1.0 / c.norm_sqr());
        if (origin_distance_to_polygon(&pts, c) - foot.norm()).abs() < 1e-12 {
            out.extend(segment_samples(foot, foot, 0, margin));
        }
        let centroid = pts.iter().fold(V3::ZERO, |acc, &p| acc + p).scale(1.0 / pts.len().max(1) as f64);
        out.extend(segment_samples(centroid, centroid, 0, margin));
        out
    }
}

/// Klein radius at which the Poincaré height `1 - |x|^2` equals `margin`.
fn klein_radius_for_margin(margin: f64) -> f64 {
    let s = margin / (2.0 - margin);
    (1.0 - s * s).max(0.0).sqrt()
}

/// `count + 2` evenly spaced Poincaré points on the Klein segment `[p, q]`
/// clipped to the region of height at least `margin`.
pub fn segment_samples(p: V3, q: V3, count: usize, margin: f64) -> Vec<V3> {
    let rho = klein_radius_for_margin(margin);
    let d = q - p;
    let (a, b, c) = (d.norm_sqr(), 2.0 * p.dot(d), p.norm_sqr() - rho * rho);
    let (lo, hi) = if a < 1e-300 {
        if c > 0.0 {
            return vec![];
        }
        (0.0, 0.0)
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return vec![];
        }
        let r = disc.sqrt();
        (((-b - r) / (2.0 * a)).max(0.0), ((-b + r) / (2.0 * a)).min(1.0))
    };
    if lo > hi {
        return vec![];
    }
    let steps = if hi > lo { count + 1 } else { 0 };
    (0..=steps)
        .map(|k| {
            let s = if steps == 0 { lo } else { lo + (hi - lo) * k as f64 / steps as f64 };
            klein_to_poincare(p.lerp(q, s))
        })
        .collect()
}

/// Interior angle between two isometric spheres on the exterior side.
pub fn sphere_angle(s1: &Sphere, s2: &Sphere) -> f64 {
    let d2 = (s1.center - s2.center).norm_sqr();
    let c = (d2 - s1.radius * s1.radius - s2.radius * s2.radius) / (2.0 * s1.radius * s2.radius);
    c.clamp(-1.0, 1.0).acos()
}
