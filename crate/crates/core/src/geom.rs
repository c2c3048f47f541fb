//! Small geometric vocabulary shared by the other modules: points, half-spaces,
//! periodic wrapping and polytope volumes.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;

/// An inward-facing half-space `{p : normal · p - offset >= 0}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    /// Half-space bounded by the plane through `a`, `b`, `c`, containing `inside`.
    pub fn through(a: &Vec3, b: &Vec3, c: &Vec3, inside: &Vec3) -> Option<HalfSpace> {
        let n = (b - a).cross(&(c - a));
        let norm = n.norm();
        if !(norm > 0.0) {
            return None;
        }
        let mut normal = n / norm;
        if normal.dot(&(inside - a)) < 0.0 {
            normal = -normal;
        }
        Some(HalfSpace {
            normal,
            offset: normal.dot(a),
        })
    }

    /// Signed distance, positive on the inner side.
    #[inline]
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Volume of the bounded intersection of half-spaces.
///
/// Vertices are found by intersecting every triple of planes; each face is then
/// fanned around its own centroid and coned to the vertex centroid. Returns 0 for
/// an empty or degenerate intersection.
pub fn polytope_volume(planes: &[HalfSpace]) -> f64 {
    let tol = 1e-9 * planes.iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let mut vertices: Vec<Vec3> = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            for k in j + 1..planes.len() {
                let m = Matrix3::from_rows(&[
                    planes[i].normal.transpose(),
                    planes[j].normal.transpose(),
                    planes[k].normal.transpose(),
                ]);
                let Some(inv) = m.try_inverse() else { continue };
                let p = inv * Vec3::new(planes[i].offset, planes[j].offset, planes[k].offset);
                if planes.iter().all(|h| h.signed_distance(&p) >= -tol)
                    && !vertices.iter().any(|v| (v - p).norm() <= tol)
                {
                    vertices.push(p);
                }
            }
        }
    }
    if vertices.len() < 4 {
        return 0.0;
    }
    let interior = vertices.iter().sum::<Vec3>() / vertices.len() as f64;

    let mut volume = 0.0;
    for h in planes {
        let on_face: Vec<&Vec3> = vertices
            .iter()
            .filter(|v| h.signed_distance(v).abs() <= tol)
            .collect();
        if on_face.len() < 3 {
            continue;
        }
        let centre = on_face.iter().copied().sum::<Vec3>() / on_face.len() as f64;
        let u = (on_face[0] - centre).normalize();
        let w = h.normal.cross(&u);
        let mut ordered: Vec<(f64, &Vec3)> = on_face
            .iter()
            .map(|v| {
                let d = *v - centre;
                (d.dot(&w).atan2(d.dot(&u)), *v)
            })
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut area = 0.0;
        for idx in 0..ordered.len() {
            let a = ordered[idx].1 - centre;
            let b = ordered[(idx + 1) % ordered.len()].1 - centre;
            area += 0.5 * a.cross(&b).norm();
        }
        volume += area * h.signed_distance(&interior) / 3.0;
    }
    volume
}

/// Volume of the tetrahedron `(a, b, c, d)`, unsigned.
pub fn tetra_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)).abs() / 6.0
}

/// Wraps each coordinate into `[-edge/2, edge/2)`.
#[inline]
pub fn minimum_image(d: Vec3, edge: f64) -> Vec3 {
    d.map(|x| x - edge * (x / edge).round())
}

/// Folds a point into the half-open cell `[0, edge)^3`. Coordinates within `tol`
/// of the upper face are snapped to zero so that a lattice site sitting on the
/// cell boundary has one canonical image.
pub fn fold_into_cell(p: Vec3, edge: f64, tol: f64) -> Vec3 {
    p.map(|x| {
        let y = x.rem_euclid(edge);
        if edge - y <= tol || y <= tol {
            0.0
        } else {
            y
        }
    })
}

/// Axis-aligned bounds of a point set.
pub fn bounds(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Serde adapter for point lists as `[[x, y, z], ...]`.
pub(crate) mod point_list {
    use super::Vec3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(points: &[Vec3], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec3>, D::Error> {
        let raw = Vec::<[f64; 3]>::deserialize(d)?;
        Ok(raw.into_iter().map(Vec3::from).collect())
    }
}
