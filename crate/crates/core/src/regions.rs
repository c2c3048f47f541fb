//! The two void bodies as implicit regions: a parent polyhedron (regular
//! tetrahedron or octahedron of edge `2R` whose vertices are sphere centers)
//! minus the balls of radius `R` around those vertices.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::{Matrix3, Rotation3, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bounds, point_list, tetra_volume, HalfSpace, Vec3};
use crate::lattice::{HexamerSite, TetradSite};

/// Relative tolerance when checking generator geometry.
const SHAPE_TOL: f64 = 1e-8;

/// Default membership band, relative to the radius.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    /// Spherically truncated tetrahedron.
    Stt,
    /// Spherically truncated octahedron.
    Sto,
}

impl BodyKind {
    pub fn vertex_count(self) -> usize {
        match self {
            BodyKind::Stt => 4,
            BodyKind::Sto => 6,
        }
    }

    pub fn face_count(self) -> usize {
        match self {
            BodyKind::Stt => 4,
            BodyKind::Sto => 8,
        }
    }
}

impl fmt::Display for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BodyKind::Stt => "stt",
            BodyKind::Sto => "sto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

/// A rotation followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

impl RigidTransform {
    /// Fails unless `rotation` is orthonormal with determinant +1 to 1e-12.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if defect > 1e-12 || rotation.determinant() <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "not a proper rotation (orthonormality defect {defect:e})"
            )));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn translation(v: Vec3) -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: v,
        }
    }

    /// Rotation by `angle` about the line through `point` along `axis`.
    pub fn rotation_about(axis: Vec3, angle: f64, point: Vec3) -> Result<Self> {
        if !(axis.norm() > 0.0) {
            return Err(Error::InvalidArgument("rotation axis must be non-zero".into()));
        }
        let r = *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix();
        Ok(RigidTransform {
            rotation: r,
            translation: point - r * point,
        })
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self` after `first`.
    pub fn after(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }
}

/// A spherically truncated tetrahedron or octahedron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRecord", into = "BodyRecord")]
pub struct VoidBody {
    kind: BodyKind,
    radius: f64,
    centers: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    planes: Vec<HalfSpace>,
}

#[derive(Serialize, Deserialize)]
struct BodyRecord {
    kind: BodyKind,
    radius: f64,
    #[serde(with = "point_list")]
    centers: Vec<Vec3>,
}

impl TryFrom<BodyRecord> for VoidBody {
    type Error = Error;
    fn try_from(r: BodyRecord) -> Result<Self> {
        VoidBody::new(r.kind, &r.centers, r.radius)
    }
}

impl From<VoidBody> for BodyRecord {
    fn from(b: VoidBody) -> Self {
        BodyRecord {
            kind: b.kind,
            radius: b.radius,
            centers: b.centers,
        }
    }
}

impl VoidBody {
    /// Builds and validates a body from its generating sphere centers.
    pub fn new(kind: BodyKind, centers: &[Vec3], radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if centers.len() != kind.vertex_count() {
            return Err(Error::InvalidGeometry(format!(
                "{kind} needs {} generator centers, got {}",
                kind.vertex_count(),
                centers.len()
            )));
        }
        let tol = SHAPE_TOL * radius;
        let edge = 2.0 * radius;
        for i in 0..centers.len() {
            let mut tangent = 0;
            let mut opposite = 0;
            for j in 0..centers.len() {
                if i == j {
                    continue;
                }
                let d = (centers[i] - centers[j]).norm();
                if (d - edge).abs() <= tol {
                    tangent += 1;
                } else if (d - SQRT_2 * edge).abs() <= tol {
                    opposite += 1;
                }
            }
            let ok = match kind {
                BodyKind::Stt => tangent == 3,
                BodyKind::Sto => tangent == 4 && opposite == 1,
            };
            if !ok {
                return Err(Error::InvalidGeometry(format!(
                    "generator centers are not a regular {} of edge {edge}",
                    match kind {
                        BodyKind::Stt => "tetrahedron",
                        BodyKind::Sto => "octahedron",
                    }
                )));
            }
        }

        let centroid = centers.iter().sum::<Vec3>() / centers.len() as f64;
        let mut faces = Vec::with_capacity(kind.face_count());
        let mut planes = Vec::with_capacity(kind.face_count());
        let n = centers.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let tangent = |i: usize, j: usize| ((centers[i] - centers[j]).norm() - edge).abs() <= tol;
                    if tangent(a, b) && tangent(b, c) && tangent(a, c) {
                        let plane = HalfSpace::through(&centers[a], &centers[b], &centers[c], &centroid)
                            .ok_or_else(|| Error::InvalidGeometry("degenerate face".into()))?;
                        faces.push([a, b, c]);
                        planes.push(plane);
                    }
                }
            }
        }
        debug_assert_eq!(faces.len(), kind.face_count());
        Ok(VoidBody {
            kind,
            radius,
            centers: centers.to_vec(),
            faces,
            planes,
        })
    }

    /// STT with generators `(±1, ±1, ±1)·R/√2` (even sign count), centered at the origin.
    pub fn canonical_stt(radius: f64) -> Result<Self> {
        let s = radius / SQRT_2;
        let centers = [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
            .map(|(x, y, z)| Vec3::new(x, y, z) * s);
        VoidBody::new(BodyKind::Stt, &centers, radius)
    }

    /// STO with generators `±√2·R·e_i` in antipodal pairs x, y, z.
    pub fn canonical_sto(radius: f64) -> Result<Self> {
        let s = SQRT_2 * radius;
        let centers = [
            Vec3::x() * s,
            -Vec3::x() * s,
            Vec3::y() * s,
            -Vec3::y() * s,
            Vec3::z() * s,
            -Vec3::z() * s,
        ];
        VoidBody::new(BodyKind::Sto, &centers, radius)
    }

    pub fn canonical(kind: BodyKind, radius: f64) -> Result<Self> {
        match kind {
            BodyKind::Stt => VoidBody::canonical_stt(radius),
            BodyKind::Sto => VoidBody::canonical_sto(radius),
        }
    }

    pub fn kind(&self) -> BodyKind {
        self.kind
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    /// Parent-polyhedron faces as triples of generator indices, aligned with
    /// [`VoidBody::bounding_polyhedron`].
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Inward half-spaces whose intersection is the parent polyhedron.
    pub fn bounding_polyhedron(&self) -> &[HalfSpace] {
        &self.planes
    }

    pub fn centroid(&self) -> Vec3 {
        self.centers.iter().sum::<Vec3>() / self.centers.len() as f64
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        bounds(&self.centers)
    }

    /// Parent-polyhedron volume, coned from the centroid over the faces.
    pub fn parent_volume(&self) -> f64 {
        let g = self.centroid();
        self.faces
            .iter()
            .map(|&[a, b, c]| tetra_volume(&g, &self.centers[a], &self.centers[b], &self.centers[c]))
            .sum()
    }

    /// Smallest constraint slack at `p`: positive inside the body, negative
    /// when some half-space or sphere constraint is violated.
    pub fn margin(&self, p: &Vec3) -> f64 {
        let planes = self
            .planes
            .iter()
            .map(|h| h.signed_distance(p))
            .fold(f64::INFINITY, f64::min);
        self.centers
            .iter()
            .map(|c| (p - c).norm() - self.radius)
            .fold(planes, f64::min)
    }

    /// Classifies `p` with a boundary band of half-width `eps`.
    pub fn contains(&self, p: &Vec3, eps: f64) -> Membership {
        let m = self.margin(p);
        if m >= eps {
            Membership::Inside
        } else if m < -eps {
            Membership::Outside
        } else {
            Membership::Boundary
        }
    }

    /// True when `p` lies in the parent polyhedron (ignoring the spheres).
    pub fn in_parent(&self, p: &Vec3, eps: f64) -> bool {
        self.planes.iter().all(|h| h.signed_distance(p) >= -eps)
    }

    pub fn transformed(&self, t: &RigidTransform) -> Result<Self> {
        let centers: Vec<Vec3> = self.centers.iter().map(|c| t.apply(c)).collect();
        VoidBody::new(self.kind, &centers, self.radius)
    }

    pub fn translated(&self, v: Vec3) -> Self {
        let centers: Vec<Vec3> = self.centers.iter().map(|c| c + v).collect();
        let planes = self
            .planes
            .iter()
            .map(|h| HalfSpace {
                normal: h.normal,
                offset: h.offset + h.normal.dot(&v),
            })
            .collect();
        VoidBody {
            centers,
            planes,
            ..self.clone()
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let centers: Vec<Vec3> = self.centers.iter().map(|c| c * s).collect();
        VoidBody::new(self.kind, &centers, self.radius * s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn stt_from_tetrad(site: &TetradSite, radius: f64) -> Result<VoidBody> {
    VoidBody::new(BodyKind::Stt, &site.centers, radius)
}

pub fn sto_from_hexamer(site: &HexamerSite, radius: f64) -> Result<VoidBody> {
    VoidBody::new(BodyKind::Sto, &site.centers, radius)
}
