//! Watertight triangle meshes of void-body boundaries.
//!
//! The boundary of a body has two kinds of patch. Each generating sphere
//! contributes a spherical polygon (triangle for the STT, square for the STO)
//! whose corners are the tangency points with its neighbours; it is refined by
//! geodesic subdivision. Each parent face contributes a planar region bounded
//! by three circular arcs; it is fanned from the face centre against those
//! arcs. Every arc is exactly an edge of a spherical patch, and both sides
//! build it from one shared midpoint cache, so the two patches meet vertex for
//! vertex at every depth.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::metrics::body_metrics;
use crate::regions::VoidBody;

/// Deepest subdivision level accepted by [`mesh_body`] (4^8 triangles per
/// spherical triangle).
pub const MAX_DEPTH: u32 = 8;
pub const DEFAULT_DEPTH: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatchTag {
    /// Patch on generating sphere `i`.
    Spherical(usize),
    /// Planar face `j` of the parent polyhedron.
    Planar(usize),
}

impl fmt::Display for PatchTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatchTag::Spherical(i) => write!(f, "spherical_{i}"),
            PatchTag::Planar(j) => write!(f, "planar_{j}"),
        }
    }
}

impl PatchTag {
    fn parse(s: &str) -> Option<PatchTag> {
        if let Some(i) = s.strip_prefix("spherical_") {
            i.parse().ok().map(PatchTag::Spherical)
        } else if let Some(j) = s.strip_prefix("planar_") {
            j.parse().ok().map(PatchTag::Planar)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub patch_tags: Vec<PatchTag>,
}

impl TriangleMesh {
    fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Distinct tags in sorted order.
    pub fn groups(&self) -> Vec<PatchTag> {
        let mut tags = self.patch_tags.clone();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    /// Every undirected edge is used by exactly two triangles, once in each
    /// direction.
    pub fn is_watertight(&self) -> bool {
        if self.triangles.is_empty() {
            return false;
        }
        let mut directed: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                if e.0 == e.1 {
                    return false;
                }
                *directed.entry(e).or_default() += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &count)| count == 1 && directed.get(&(b, a)) == Some(&1))
    }

    pub fn min_triangle_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest interior angle over all triangles.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let p = self.triangle(t);
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                min = min.min(u.cross(&v).norm().atan2(u.dot(&v)));
            }
        }
        min
    }

    fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}

struct Builder<'a> {
    body: &'a VoidBody,
    vertices: Vec<Vec3>,
    tangency: HashMap<(usize, usize), usize>,
    midpoints: HashMap<(usize, usize), usize>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<PatchTag>,
}

impl<'a> Builder<'a> {
    fn push(&mut self, p: Vec3) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    /// Contact point of generators `i` and `j`.
    fn contact(&mut self, i: usize, j: usize) -> usize {
        let key = (i.min(j), i.max(j));
        if let Some(&v) = self.tangency.get(&key) {
            return v;
        }
        let c = self.body.centers();
        let v = self.push((c[i] + c[j]) / 2.0);
        self.tangency.insert(key, v);
        v
    }

    /// Point halfway along the great-circle arc from `a` to `b` on sphere `s`.
    fn midpoint(&mut self, a: usize, b: usize, s: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.midpoints.get(&key) {
            return v;
        }
        let c = self.body.centers()[s];
        let dir = (self.vertices[a] - c) + (self.vertices[b] - c);
        let v = self.push(c + self.body.radius() * dir.normalize());
        self.midpoints.insert(key, v);
        v
    }

    fn arc(&mut self, a: usize, b: usize, s: usize, depth: u32) -> Vec<usize> {
        if depth == 0 {
            return vec![a, b];
        }
        let m = self.midpoint(a, b, s);
        let mut left = self.arc(a, m, s, depth - 1);
        let right = self.arc(m, b, s, depth - 1);
        left.extend_from_slice(&right[1..]);
        left
    }

    fn subdivide(&mut self, t: [usize; 3], s: usize, depth: u32) {
        if depth == 0 {
            self.emit(t, PatchTag::Spherical(s));
            return;
        }
        let [a, b, c] = t;
        let ab = self.midpoint(a, b, s);
        let bc = self.midpoint(b, c, s);
        let ca = self.midpoint(c, a, s);
        for sub in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            self.subdivide(sub, s, depth - 1);
        }
    }

    fn emit(&mut self, t: [usize; 3], tag: PatchTag) {
        self.triangles.push(t);
        self.tags.push(tag);
    }

    /// Flips triangles whose normal does not point out of the body.
    fn orient(&mut self) {
        let centers = self.body.centers();
        let planes = self.body.bounding_polyhedron();
        for (t, tag) in self.triangles.iter_mut().zip(&self.tags) {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let n = (b - a).cross(&(c - a));
            let outward = match *tag {
                PatchTag::Spherical(s) => centers[s] - (a + b + c) / 3.0,
                PatchTag::Planar(f) => -planes[f].normal,
            };
            if n.dot(&outward) < 0.0 {
                t.swap(1, 2);
            }
        }
    }
}

/// Tangent neighbours of generator `s`, in cyclic order around it.
fn ring(body: &VoidBody, s: usize) -> Vec<usize> {
    let c = body.centers();
    let tol = 1e-8 * body.radius();
    let tangent = |i: usize, j: usize| ((c[i] - c[j]).norm() - 2.0 * body.radius()).abs() <= tol;
    let neighbours: Vec<usize> = (0..c.len()).filter(|&j| j != s && tangent(s, j)).collect();
    let mut ordered = vec![neighbours[0]];
    while ordered.len() < neighbours.len() {
        let last = *ordered.last().unwrap();
        let next = neighbours
            .iter()
            .copied()
            .find(|&j| !ordered.contains(&j) && tangent(last, j))
            .expect("neighbour ring is connected");
        ordered.push(next);
    }
    ordered
}

/// Meshes the boundary of `body` at subdivision level `depth`.
pub fn mesh_body(body: &VoidBody, depth: u32) -> Result<TriangleMesh> {
    if depth > MAX_DEPTH {
        return Err(Error::ResourceLimit(format!(
            "mesh depth {depth} exceeds the cap of {MAX_DEPTH}"
        )));
    }
    let mut b = Builder {
        body,
        vertices: Vec::new(),
        tangency: HashMap::new(),
        midpoints: HashMap::new(),
        triangles: Vec::new(),
        tags: Vec::new(),
    };

    for s in 0..body.centers().len() {
        let corners: Vec<usize> = ring(body, s).into_iter().map(|j| b.contact(s, j)).collect();
        if corners.len() == 3 {
            b.subdivide([corners[0], corners[1], corners[2]], s, depth);
        } else {
            // Square patches are fanned from their pole.
            let c = body.centers()[s];
            let pole = b.push(c + body.radius() * (body.centroid() - c).normalize());
            for k in 0..corners.len() {
                b.subdivide([pole, corners[k], corners[(k + 1) % corners.len()]], s, depth);
            }
        }
    }

    for (f, &[i, j, k]) in body.faces().iter().enumerate() {
        let (ij, ik, jk) = (b.contact(i, j), b.contact(i, k), b.contact(j, k));
        let mut lp = b.arc(ij, ik, i, depth);
        lp.pop();
        let mut second = b.arc(ik, jk, k, depth);
        second.pop();
        let mut third = b.arc(jk, ij, j, depth);
        third.pop();
        lp.extend(second);
        lp.extend(third);
        let c = body.centers();
        let centre = b.push((c[i] + c[j] + c[k]) / 3.0);
        for t in 0..lp.len() {
            b.emit([centre, lp[t], lp[(t + 1) % lp.len()]], PatchTag::Planar(f));
        }
    }

    b.orient();
    Ok(TriangleMesh {
        vertices: b.vertices,
        triangles: b.triangles,
        patch_tags: b.tags,
    })
}

pub fn mesh_area(mesh: &TriangleMesh) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum()
}

/// Enclosed volume by the divergence theorem.
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    if !mesh.is_watertight() {
        return Err(Error::InvalidMesh("volume needs a watertight mesh".into()));
    }
    Ok(mesh.signed_volume())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityReport {
    /// `|mesh - exact| / exact` for the surface area.
    pub area_error: f64,
    /// Same for the enclosed volume (signed volume if not watertight).
    pub volume_error: f64,
    pub is_watertight: bool,
    pub min_angle: f64,
    pub triangles: usize,
    pub vertices: usize,
}

/// Compares a mesh against the closed forms for `body`'s kind and radius.
pub fn quality(mesh: &TriangleMesh, body: &VoidBody) -> Result<MeshQualityReport> {
    let exact = body_metrics(body.kind(), body.radius())?;
    Ok(MeshQualityReport {
        area_error: ((mesh_area(mesh) - exact.surface_area) / exact.surface_area).abs(),
        volume_error: ((mesh.signed_volume() - exact.volume) / exact.volume).abs(),
        is_watertight: mesh.is_watertight(),
        min_angle: mesh.min_angle(),
        triangles: mesh.triangles.len(),
        vertices: mesh.vertices.len(),
    })
}

/// Text OBJ with one group per patch tag.
pub fn export_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "# ccp-voids mesh: {} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len()).map_err(io)?;
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(io)?;
    }
    for tag in mesh.groups() {
        writeln!(w, "g {tag}").map_err(io)?;
        for (t, _) in mesh.triangles.iter().zip(&mesh.patch_tags).filter(|(_, g)| **g == tag) {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn import_obj(path: &Path) -> Result<TriangleMesh> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: &str| Error::InvalidMesh(format!("malformed OBJ line: {line}"));
    let mut mesh = TriangleMesh::default();
    let mut tag = PatchTag::Planar(0);
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xyz: Vec<f64> = parts.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad(&line))?;
                if xyz.len() != 3 {
                    return Err(bad(&line));
                }
                mesh.vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("g") => tag = parts.next().and_then(PatchTag::parse).ok_or_else(|| bad(&line))?,
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|p| p.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(&line))?;
                if idx.len() != 3 || idx.iter().any(|&i| i == 0 || i > mesh.vertices.len()) {
                    return Err(bad(&line));
                }
                mesh.triangles.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
                mesh.patch_tags.push(tag);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

/// Binary little-endian STL: 80-byte header, triangle count, then 50 bytes
/// per facet (normal, three vertices, attribute word).
pub fn export_stl(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut header = [0u8; 80];
    let label = b"ccp-voids binary STL";
    header[..label.len()].copy_from_slice(label);
    w.write_all(&header).map_err(io)?;
    w.write_all(&(mesh.triangles.len() as u32).to_le_bytes()).map_err(io)?;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n, a, b, c] {
            for x in v.iter() {
                w.write_all(&(*x as f32).to_le_bytes()).map_err(io)?;
            }
        }
        w.write_all(&0u16.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a binary STL. Vertices are not merged; tags are all `Planar(0)`.
pub fn import_stl(path: &Path) -> Result<TriangleMesh> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 84 {
        return Err(Error::InvalidMesh("STL shorter than its header".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(Error::InvalidMesh(format!("STL size does not match {count} facets")));
    }
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let mut mesh = TriangleMesh::default();
    for t in 0..count {
        let base = 84 + 50 * t + 12;
        let start = mesh.vertices.len();
        for k in 0..3 {
            let o = base + 12 * k;
            mesh.vertices.push(Vec3::new(f32_at(o), f32_at(o + 4), f32_at(o + 8)));
        }
        mesh.triangles.push([start, start + 1, start + 2]);
        mesh.patch_tags.push(PatchTag::Planar(0));
    }
    Ok(mesh)
}
