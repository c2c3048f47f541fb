//! Brute-force cross-checks of the closed forms: Monte Carlo volumes and
//! surface-patch areas of the void bodies, sampled cell fractions, and the
//! exact cuboctahedron projection that partitions the unit sphere.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::lattice::SpherePack;
use crate::metrics::polygon_excess;
use crate::regions::VoidBody;
use crate::sampling::{par_blocks, uniform_direction, uniform_in_box, RNG_ALGORITHM};
use crate::tiling::{verify_partition, Assembly, Domain};

/// Cap on bounding-box draws per accepted point inside a parent polyhedron.
const MAX_REJECTIONS: u32 = 10_000;

/// A Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(scale: f64, hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        McEstimate {
            value: scale * p,
            std_error: scale * (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            seed,
        }
    }

    /// `(value - reference) / std_error`; infinite when the error is zero and
    /// the values differ.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.value - reference;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    }

    /// True if `reference` lies within `k` standard errors.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        self.z_score(reference).abs() <= k
    }

    pub fn row(&self, quantity: &str, closed_form: f64) -> EstimateRow {
        EstimateRow {
            quantity: quantity.to_string(),
            value: self.value,
            std_error: self.std_error,
            n: self.n_samples,
            seed: self.seed,
            closed_form,
            z_score: self.z_score(closed_form),
            rng: RNG_ALGORITHM.to_string(),
        }
    }
}

/// One line of oracle output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
    pub closed_form: f64,
    pub z_score: f64,
    pub rng: String,
}

fn need_samples(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("need at least one sample".into()))
    } else {
        Ok(())
    }
}

fn sum_hits(blocks: Vec<Result<u64>>) -> Result<u64> {
    blocks.into_iter().sum()
}

/// Volume by rejection sampling: `n` uniform points in the parent polyhedron
/// (drawn from its bounding box), scaled by the fraction inside the body.
pub fn mc_volume(body: &VoidBody, n: u64, seed: u64) -> Result<McEstimate> {
    need_samples(n)?;
    let (lo, hi) = body.bounding_box();
    let hits = sum_hits(par_blocks(n, seed, |rng, len| {
        let mut hits = 0;
        for _ in 0..len {
            let p = sample_parent(body, rng, &lo, &hi)?;
            if body.margin(&p) >= 0.0 {
                hits += 1;
            }
        }
        Ok(hits)
    }))?;
    Ok(McEstimate::from_hits(body.parent_volume(), hits, n, seed))
}

fn sample_parent<R: Rng>(body: &VoidBody, rng: &mut R, lo: &Vec3, hi: &Vec3) -> Result<Vec3> {
    for _ in 0..MAX_REJECTIONS {
        let p = uniform_in_box(rng, lo, hi);
        if body.in_parent(&p, 0.0) {
            return Ok(p);
        }
    }
    Err(Error::Sampling("parent polyhedron rejection sampling did not converge".into()))
}

/// Area of the spherical patch on generator `generator_index`: uniform
/// directions on that sphere, counting surface points strictly inside the
/// parent polyhedron and outside the other generating spheres.
pub fn mc_spherical_patch_area(body: &VoidBody, generator_index: usize, n: u64, seed: u64) -> Result<McEstimate> {
    need_samples(n)?;
    let centers = body.centers();
    let Some(&center) = centers.get(generator_index) else {
        return Err(Error::InvalidArgument(format!(
            "generator index {generator_index} out of range for {} generators",
            centers.len()
        )));
    };
    let r = body.radius();
    let planes = body.bounding_polyhedron();
    let hits = sum_hits(par_blocks(n, seed, |rng, len| {
        let mut hits = 0;
        for _ in 0..len {
            let p = center + r * uniform_direction(rng);
            let in_parent = planes.iter().all(|h| h.signed_distance(&p) > 0.0);
            let clear = centers
                .iter()
                .enumerate()
                .all(|(j, c)| j == generator_index || (p - c).norm() > r);
            if in_parent && clear {
                hits += 1;
            }
        }
        Ok(hits)
    }))?;
    Ok(McEstimate::from_hits(4.0 * PI * r * r, hits, n, seed))
}

/// Area of the planar concave face `face_index` of a body.
pub fn mc_planar_face_area(body: &VoidBody, face_index: usize, n: u64, seed: u64) -> Result<McEstimate> {
    let Some(face) = body.faces().get(face_index) else {
        return Err(Error::InvalidArgument(format!(
            "face index {face_index} out of range for {} faces",
            body.faces().len()
        )));
    };
    let tri = face.map(|i| body.centers()[i]);
    mc_triangle_outside_circles(&tri, body.radius(), n, seed)
}

/// Area of the part of triangle `tri` farther than `circle_radius` from all
/// three corners, by uniform sampling of the triangle.
pub fn mc_triangle_outside_circles(tri: &[Vec3; 3], circle_radius: f64, n: u64, seed: u64) -> Result<McEstimate> {
    need_samples(n)?;
    let [a, b, c] = *tri;
    let (ab, ac) = (b - a, c - a);
    let area = 0.5 * ab.cross(&ac).norm();
    let hits = sum_hits(par_blocks(n, seed, |rng, len| {
        let mut hits = 0;
        for _ in 0..len {
            let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let p = a + u * ab + v * ac;
            if tri.iter().all(|k| (p - k).norm() > circle_radius) {
                hits += 1;
            }
        }
        Ok(hits)
    }))?;
    Ok(McEstimate::from_hits(area, hits, n, seed))
}

/// Volume fractions of a periodic cell by region type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellFractions {
    pub sphere_frac: f64,
    pub stt_frac: f64,
    pub sto_frac: f64,
    /// Boundary band, gaps and overlaps together.
    pub unclassified_frac: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl CellFractions {
    /// Binomial standard error of a fraction estimated from this run.
    pub fn std_error(&self, frac: f64) -> f64 {
        (frac * (1.0 - frac) / self.n_samples as f64).sqrt()
    }

    pub fn estimate(&self, frac: f64) -> McEstimate {
        McEstimate {
            value: frac,
            std_error: self.std_error(frac),
            n_samples: self.n_samples,
            seed: self.seed,
        }
    }
}

/// Classifies `n` uniform points of the periodic cell as sphere, STT, STO, or
/// unclassified (boundary band, gap or overlap).
pub fn mc_cell_fractions(pack: &SpherePack, bodies: &[VoidBody], n: u64, seed: u64) -> Result<CellFractions> {
    let Some(edge) = pack.cell_edge() else {
        return Err(Error::InvalidArgument("cell fractions need a periodic pack".into()));
    };
    let assembly = Assembly::new(pack.clone(), bodies.to_vec(), Domain::Periodic { edge })?;
    let eps = crate::regions::DEFAULT_EPS * pack.radius();
    let r = verify_partition(&assembly, n, seed, eps)?;
    let nf = n as f64;
    Ok(CellFractions {
        sphere_frac: r.sphere_points as f64 / nf,
        stt_frac: r.stt_points as f64 / nf,
        sto_frac: r.sto_points as f64 / nf,
        unclassified_frac: (r.boundary + r.gaps + r.overlaps) as f64 / nf,
        n_samples: n,
        seed,
    })
}

/// Per-face spherical areas of the cuboctahedron projected onto its circumsphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionAreas {
    /// Area of one projected square (all six agree).
    pub square_area: f64,
    /// Area of one projected triangle (all eight agree).
    pub triangle_area: f64,
    /// Sum over all fourteen faces.
    pub total: f64,
    pub square_areas: Vec<f64>,
    pub triangle_areas: Vec<f64>,
}

/// The twelve vertices of the unit-edge cuboctahedron, `(±1, ±1, 0)/√2` and
/// permutations; they lie on the unit sphere.
pub fn cuboctahedron_vertices() -> Vec<Vec3> {
    let mut v = Vec::with_capacity(12);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut p = Vec3::zeros();
            p[i] = a / SQRT_2;
            p[j] = b / SQRT_2;
            v.push(p);
        }
    }
    v
}

/// Orders a face's vertices counter-clockwise about its outward normal.
fn ordered_face(mut verts: Vec<Vec3>) -> Vec<Vec3> {
    let centre = verts.iter().sum::<Vec3>() / verts.len() as f64;
    let n = centre.normalize();
    let u = (verts[0] - centre).normalize();
    let w = n.cross(&u);
    verts.sort_by(|a, b| {
        let ta = (a - centre).dot(&w).atan2((a - centre).dot(&u));
        let tb = (b - centre).dot(&w).atan2((b - centre).dot(&u));
        ta.total_cmp(&tb)
    });
    verts
}

/// Girard excess of every projected cuboctahedron face, computed from vertex
/// coordinates alone.
pub fn cuboctahedron_projection_areas() -> Result<ProjectionAreas> {
    let verts = cuboctahedron_vertices();
    let tol = 1e-12;
    let mut square_areas = Vec::with_capacity(6);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let face: Vec<Vec3> = verts
                .iter()
                .copied()
                .filter(|v| (v[axis] - sign / SQRT_2).abs() < tol)
                .collect();
            square_areas.push(polygon_excess(&ordered_face(face))?);
        }
    }
    let mut triangle_areas = Vec::with_capacity(8);
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let s = Vec3::new(sx, sy, sz);
                // Vertices in the closed octant: two non-zero coordinates matching its signs.
                let face: Vec<Vec3> = verts
                    .iter()
                    .copied()
                    .filter(|v| (0..3).all(|i| v[i] * s[i] >= -tol))
                    .collect();
                triangle_areas.push(polygon_excess(&ordered_face(face))?);
            }
        }
    }
    let total = square_areas.iter().sum::<f64>() + triangle_areas.iter().sum::<f64>();
    Ok(ProjectionAreas {
        square_area: square_areas[0],
        triangle_area: triangle_areas[0],
        total,
        square_areas,
        triangle_areas,
    })
}
