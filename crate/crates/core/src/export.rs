//! Exports: versioned JSON, OFF meshes and plain-text presentations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ball::Mat2;
use crate::basis::{PoincareReport, Presentation};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Letter};
use crate::master::RunResult;
use crate::poly::ExteriorDomain;

pub const SCHEMA: &str = "kleinian.run/1";

/// Matrix entries as `[[re, im]; 4]` in the order `a, b, c, d`.
pub type MatrixData = [[f64; 2]; 4];

pub fn matrix_data(m: &Mat2) -> MatrixData {
    [[m.a.re, m.a.im], [m.b.re, m.b.im], [m.c.re, m.c.im], [m.d.re, m.d.im]]
}

pub fn matrix_from_data(d: &MatrixData) -> Mat2 {
    let c = |k: usize| num_complex::Complex64::new(d[k][0], d[k][1]);
    Mat2::new(c(0), c(1), c(2), c(3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementData {
    pub matrix: MatrixData,
    /// Integer coordinates on the order basis, as decimal strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<String>>,
}

impl ElementData {
    pub fn of(g: &GroupElement) -> Self {
        Self { matrix: matrix_data(&g.iso.m), coords: g.coords.as_ref().map(|c| c.iter().map(i128::to_string).collect()) }
    }

    pub fn element(&self, group: &Group) -> Result<GroupElement> {
        match &self.coords {
            Some(c) if group.arithmetic().is_some() => {
                let coords = c
                    .iter()
                    .map(|s| s.parse::<i128>().map_err(|e| Error::Parse(format!("coordinate {s}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(group.from_coords(coords))
            }
            _ => Ok(group.from_matrix(matrix_from_data(&self.matrix))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldData {
    pub coefficients: Vec<String>,
    pub discriminant: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunExport {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub seed: u64,
    pub field: FieldData,
    pub zeta2: f64,
    pub covolume: f64,
    pub volume: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<MatrixData>,
    pub basis: Vec<ElementData>,
    pub presentation: PresentationData,
    pub report: PoincareReport,
    pub domain: DomainData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresentationData {
    pub generators: Vec<usize>,
    pub letter_of: Vec<Letter>,
    pub relations: Vec<Vec<Letter>>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainData {
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
    pub ideal_vertices: usize,
    /// Klein-model vertex positions.
    pub vertex_positions: Vec<[f64; 3]>,
    /// Per face: the basis index and the vertex cycle.
    pub face_vertices: Vec<(usize, Vec<usize>)>,
}

impl DomainData {
    pub fn of(d: &ExteriorDomain) -> Self {
        Self {
            faces: d.faces.len(),
            edges: d.edges.len(),
            vertices: d.vertices.iter().filter(|v| !v.faces.is_empty()).count(),
            ideal_vertices: d.vertices.iter().filter(|v| v.ideal && !v.faces.is_empty()).count(),
            vertex_positions: d.vertices.iter().map(|v| v.klein.0).collect(),
            face_vertices: d.faces.iter().map(|f| (f.gen, f.vertices.clone())).collect(),
        }
    }
}

impl RunExport {
    pub fn new(r: &RunResult, name: Option<String>, seed: u64) -> Self {
        let field = &r.group.arithmetic().expect("arithmetic run").order.algebra.field;
        let p = &r.presentation;
        Self {
            schema: SCHEMA.into(),
            name,
            seed,
            field: FieldData {
                coefficients: field.poly().iter().rev().map(|c| c.to_string()).collect(),
                discriminant: field.discriminant().to_string(),
            },
            zeta2: r.zeta.value,
            covolume: r.covolume,
            volume: r.basis.volume,
            conjugator: r.conjugator.as_ref().map(matrix_data),
            basis: r.basis.elements.iter().map(ElementData::of).collect(),
            presentation: PresentationData {
                generators: p.generators.clone(),
                letter_of: p.letter_of.clone(),
                relations: p.relations.clone(),
                text: presentation_text(p),
            },
            report: r.basis.report.clone(),
            domain: DomainData::of(&r.basis.domain),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported schema {}", doc.schema)));
        }
        Ok(doc)
    }

    pub fn presentation(&self) -> Presentation {
        Presentation {
            generators: self.presentation.generators.clone(),
            letter_of: self.presentation.letter_of.clone(),
            relations: self.presentation.relations.clone(),
        }
    }
}

/// Letters separated by spaces, `g3^-1` for an inverse.
pub fn word_text(word: &[Letter]) -> String {
    let parts: Vec<String> =
        word.iter().map(|l| if l.inv { format!("g{}^-1", l.gen + 1) } else { format!("g{}", l.gen + 1) }).collect();
    parts.join(" ")
}

/// Parses a word over `gens` generators.
pub fn parse_word(text: &str, gens: usize) -> Result<Vec<Letter>> {
    let mut word = Vec::new();
    for tok in text.split_whitespace() {
        word.extend(parse_letter(tok, gens)?);
    }
    Ok(word)
}

/// `gens: g1 ... gk` followed by `rels:` and one relation per line.
pub fn presentation_text(p: &Presentation) -> String {
    let mut out = String::from("gens:");
    for k in 0..p.generators.len() {
        let _ = write!(out, " g{}", k + 1);
    }
    out.push_str("\nrels:\n");
    for r in &p.relations {
        out.push_str(&word_text(r));
        out.push('\n');
    }
    out
}

/// A presentation read back from text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPresentation {
    pub generators: usize,
    pub relations: Vec<Vec<Letter>>,
}

fn parse_letter(tok: &str, gens: usize) -> Result<Vec<Letter>> {
    let bad = || Error::Parse(format!("bad letter {tok:?}"));
    let rest = tok.strip_prefix('g').ok_or_else(bad)?;
    let (idx, exp) = match rest.split_once('^') {
        Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad())?),
        None => (rest, 1),
    };
    let k: usize = idx.parse().map_err(|_| bad())?;
    if k == 0 || k > gens || exp == 0 || exp.unsigned_abs() > 1 << 16 {
        return Err(bad());
    }
    Ok(vec![Letter { gen: k - 1, inv: exp < 0 }; exp.unsigned_abs() as usize])
}

/// Parses the text written by [`presentation_text`]. Letters accept integer
/// exponents, `g2^3` standing for `g2 g2 g2`.
pub fn parse_presentation(text: &str) -> Result<ParsedPresentation> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let head = lines.next().ok_or_else(|| Error::Parse("empty presentation".into()))?;
    let gens = head.strip_prefix("gens:").ok_or_else(|| Error::Parse("expected `gens:`".into()))?;
    let names: Vec<&str> = gens.split_whitespace().collect();
    for (k, n) in names.iter().enumerate() {
        if *n != format!("g{}", k + 1) {
            return Err(Error::Parse(format!("generator {} must be named g{}", n, k + 1)));
        }
    }
    match lines.next() {
        Some("rels:") => {}
        _ => return Err(Error::Parse("expected `rels:`".into())),
    }
    let mut relations = Vec::new();
    for l in lines {
        relations.push(parse_word(l, names.len())?);
    }
    Ok(ParsedPresentation { generators: names.len(), relations })
}

/// OFF mesh of the fan-triangulated boundary (Klein-model coordinates).
pub fn off_mesh(d: &ExteriorDomain) -> String {
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut tris = Vec::new();
    for f in &d.faces {
        for &v in &f.vertices {
            let next = index.len();
            index.entry(v).or_insert(next);
        }
        for k in 1..f.vertices.len().saturating_sub(1) {
            tris.push([index[&f.vertices[0]], index[&f.vertices[k]], index[&f.vertices[k + 1]]]);
        }
    }
    let mut verts = vec![0usize; index.len()];
    for (&v, &i) in &index {
        verts[i] = v;
    }
    let mut out = format!("OFF\n{} {} 0\n", verts.len(), tris.len());
    for v in verts {
        let [x, y, z] = d.vertices[v].klein.0;
        let _ = writeln!(out, "{x:.17e} {y:.17e} {z:.17e}");
    }
    for [a, b, c] in tris {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    out
}

/// Vertex and triangle counts of an OFF mesh.
pub fn parse_off_counts(text: &str) -> Result<(usize, usize)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("OFF") {
        return Err(Error::Parse("missing OFF header".into()));
    }
    let counts: Vec<usize> = lines
        .next()
        .ok_or_else(|| Error::Parse("missing counts".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(Error::Parse("expected three counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut seen_v = 0;
    let mut seen_f = 0;
    for l in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if seen_v < nv {
            if toks.len() != 3 || toks.iter().any(|t| t.parse::<f64>().is_err()) {
                return Err(Error::Parse(format!("bad vertex line {l:?}")));
            }
            seen_v += 1;
        } else {
            let k: usize = toks.first().and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse(format!("bad face line {l:?}")))?;
            if toks.len() - 1 != k || toks[1..].iter().any(|t| t.parse::<usize>().map_or(true, |i| i >= nv)) {
                return Err(Error::Parse(format!("bad face line {l:?}")));
            }
            seen_f += 1;
        }
    }
    if seen_v != nv || seen_f != nf {
        return Err(Error::Parse("counts do not match the body".into()));
    }
    Ok((nv, nf))
}
