//! Closed-form areas, volumes and sphere-section packing densities of the two
//! void bodies, with the spherical-trigonometry routines they rest on.
//!
//! Everything is evaluated from exact expressions (arccos of rationals and
//! surds). Quantities are for generating spheres of radius `R`; areas scale as
//! `R²`, volumes as `R³`, and ratios are dimensionless.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::regions::BodyKind;

/// Central angles subtended by the three sides of a spherical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTriangleSpec {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl SphericalTriangleSpec {
    /// Each side must lie in `(0, π)` and the sides must satisfy the
    /// triangle inequality.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let sides = [alpha, beta, gamma];
        if sides.iter().any(|s| !(*s > 0.0 && *s < PI)) {
            return Err(Error::InvalidArgument(format!(
                "spherical triangle sides must lie in (0, π): {sides:?}"
            )));
        }
        if alpha + beta < gamma || alpha + gamma < beta || beta + gamma < alpha {
            return Err(Error::InvalidArgument(format!(
                "sides {sides:?} violate the triangle inequality"
            )));
        }
        Ok(SphericalTriangleSpec { alpha, beta, gamma })
    }
}

/// Vertex angle `C` opposite side `γ`, from the spherical law of cosines
/// `cos γ = cos α cos β + sin α sin β cos C`.
pub fn vertex_angle_from_sides(t: &SphericalTriangleSpec) -> Result<f64> {
    let denom = t.alpha.sin() * t.beta.sin();
    if denom.abs() < 1e-15 {
        return Err(Error::InvalidArgument("degenerate spherical triangle".into()));
    }
    let cos_c = (t.gamma.cos() - t.alpha.cos() * t.beta.cos()) / denom;
    Ok(cos_c.clamp(-1.0, 1.0).acos())
}

/// Spherical excess `A + B + C - π` of a triangle with the given vertex angles.
pub fn triangle_excess(a: f64, b: f64, c: f64) -> Result<f64> {
    let e = a + b + c - PI;
    if !(e > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "angle sum {} does not exceed π",
            a + b + c
        )));
    }
    Ok(e)
}

/// Girard excess of a convex spherical polygon given by vertex directions:
/// interior-angle sum minus `(n - 2)π`. Equals the polygon's area on the unit
/// sphere. Vertices are normalised; either winding order is accepted.
pub fn polygon_excess(vertex_directions: &[Vec3]) -> Result<f64> {
    let n = vertex_directions.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "a spherical polygon needs at least 3 vertices, got {n}"
        )));
    }
    let mut v = Vec::with_capacity(n);
    for d in vertex_directions {
        let norm = d.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!("bad vertex direction {d:?}")));
        }
        v.push(d / norm);
    }
    for i in 0..n {
        let (a, b) = (&v[i], &v[(i + 1) % n]);
        if a.dot(b) <= -1.0 + 1e-12 || (a - b).norm() < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "adjacent vertices {i} and {} are coincident or antipodal",
                (i + 1) % n
            )));
        }
    }
    // Convexity: every consecutive triple turns the same way.
    let turn = |i: usize| v[i].cross(&v[(i + 1) % n]).dot(&v[(i + 2) % n]);
    let sign = turn(0).signum();
    if (0..n).any(|i| turn(i) * sign <= 0.0) {
        return Err(Error::InvalidArgument("spherical polygon is not convex".into()));
    }

    let mut angle_sum = 0.0;
    for i in 0..n {
        let p = &v[i];
        let prev = &v[(i + n - 1) % n];
        let next = &v[(i + 1) % n];
        // Tangent directions at p along the great circles to its neighbours.
        let t1 = prev - p * p.dot(prev);
        let t2 = next - p * p.dot(next);
        angle_sum += t1.cross(&t2).norm().atan2(t1.dot(&t2));
    }
    Ok(angle_sum - (n as f64 - 2.0) * PI)
}

/// Solid angle of a regular tetrahedron's corner, `arccos(23/27)`: the area
/// of the unit spherical triangle with sides π/3.
pub fn tetra_corner_excess() -> f64 {
    (23.0_f64 / 27.0).acos()
}

/// Solid angle of a regular octahedron's corner, `arccos(17/81)`: the area of
/// the unit spherical square with sides π/3 and diagonals π/2.
pub fn octa_corner_excess() -> f64 {
    (17.0_f64 / 81.0).acos()
}

/// Area of one half of the octahedral corner square, `arccos(7/9)`.
pub fn half_square_excess() -> f64 {
    (7.0_f64 / 9.0).acos()
}

/// The same half-square area reached through the law of cosines: vertex
/// angles of the triangle with sides (π/3, π/3, π/2), then their excess.
pub fn half_square_excess_by_cosine_rule() -> f64 {
    let right = vertex_angle_from_sides(&SphericalTriangleSpec::new(PI / 3.0, PI / 3.0, PI / 2.0).unwrap()).unwrap();
    let acute = vertex_angle_from_sides(&SphericalTriangleSpec::new(PI / 3.0, PI / 2.0, PI / 3.0).unwrap()).unwrap();
    triangle_excess(acute, acute, right).unwrap()
}

/// Area of the planar region of an equilateral triangle of side `2R` left
/// after removing the three 60° sectors of radius `R` at its corners.
pub fn concave_triangle_area(radius: f64) -> f64 {
    (3.0_f64.sqrt() - PI / 2.0) * radius * radius
}

pub fn tetrahedron_volume(edge: f64) -> f64 {
    edge.powi(3) / (6.0 * SQRT_2)
}

pub fn octahedron_volume(edge: f64) -> f64 {
    SQRT_2 * edge.powi(3) / 3.0
}

/// Volume of the spherical sector cut from one generating sphere by a corner
/// of solid angle `excess`.
pub fn sector_volume(excess: f64, radius: f64) -> f64 {
    excess / (4.0 * PI) * (4.0 / 3.0 * PI * radius.powi(3))
}

pub fn sphere_area(radius: f64) -> f64 {
    4.0 * PI * radius * radius
}

pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

/// Closed-form description of one void body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyMetrics {
    pub kind: BodyKind,
    pub radius: f64,
    pub surface_area: f64,
    pub volume: f64,
    /// Surface area over `4πR²`.
    pub area_rel_sphere: f64,
    /// Volume over `(4/3)πR³`.
    pub vol_rel_sphere: f64,
    /// Removed-sector volume over parent-polyhedron volume.
    pub phi: f64,
    pub planar_area: f64,
    pub spherical_area: f64,
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")))
    }
}

pub fn stt_metrics(radius: f64) -> Result<BodyMetrics> {
    check_radius(radius)?;
    let r2 = radius * radius;
    let e = tetra_corner_excess();
    let planar_area = (4.0 * 3.0_f64.sqrt() - 2.0 * PI) * r2;
    let spherical_area = 4.0 * e * r2;
    let volume = 2.0 / 3.0 * (SQRT_2 - 2.0 * e) * r2 * radius;
    let surface_area = planar_area + spherical_area;
    Ok(BodyMetrics {
        kind: BodyKind::Stt,
        radius,
        surface_area,
        volume,
        area_rel_sphere: surface_area / sphere_area(radius),
        vol_rel_sphere: volume / sphere_volume(radius),
        phi: SQRT_2 * e,
        planar_area,
        spherical_area,
    })
}

pub fn sto_metrics(radius: f64) -> Result<BodyMetrics> {
    check_radius(radius)?;
    let r2 = radius * radius;
    let e = octa_corner_excess();
    let planar_area = 8.0 * concave_triangle_area(radius);
    let spherical_area = 6.0 * e * r2;
    let volume = (8.0 * SQRT_2 / 3.0 - 2.0 * e) * r2 * radius;
    let surface_area = planar_area + spherical_area;
    Ok(BodyMetrics {
        kind: BodyKind::Sto,
        radius,
        surface_area,
        volume,
        area_rel_sphere: surface_area / sphere_area(radius),
        vol_rel_sphere: volume / sphere_volume(radius),
        phi: 3.0 / (4.0 * SQRT_2) * e,
        planar_area,
        spherical_area,
    })
}

pub fn body_metrics(kind: BodyKind, radius: f64) -> Result<BodyMetrics> {
    match kind {
        BodyKind::Stt => stt_metrics(radius),
        BodyKind::Sto => sto_metrics(radius),
    }
}

/// `V_STT / V_STO`, independent of the radius.
pub fn stt_sto_volume_ratio() -> f64 {
    let e_t = tetra_corner_excess();
    let e_o = octa_corner_excess();
    (2.0 / 3.0 * (SQRT_2 - 2.0 * e_t)) / (8.0 * SQRT_2 / 3.0 - 2.0 * e_o)
}

/// Density of cubic close packing, `π/√18`.
pub fn ccp_density() -> f64 {
    PI / 18.0_f64.sqrt()
}

/// `(2·φ_STO + φ_STT) / 3`.
pub fn weighted_average_density() -> f64 {
    let phi_stt = SQRT_2 * tetra_corner_excess();
    let phi_sto = 3.0 / (4.0 * SQRT_2) * octa_corner_excess();
    (2.0 * phi_sto + phi_stt) / 3.0
}

/// The same average read as a volume-weighted mean over the holes of one
/// sphere: one octahedron and two tetrahedra of edge `2R`.
pub fn volume_weighted_density() -> f64 {
    let v_oct = octahedron_volume(2.0);
    let v_tet = tetrahedron_volume(2.0);
    let phi_stt = 4.0 * sector_volume(tetra_corner_excess(), 1.0) / v_tet;
    let phi_sto = 6.0 * sector_volume(octa_corner_excess(), 1.0) / v_oct;
    (v_oct * phi_sto + 2.0 * v_tet * phi_stt) / (v_oct + 2.0 * v_tet)
}

/// `|6·arccos(17/81) + 8·arccos(23/27) - 4π|`.
pub fn packing_identity_residual() -> f64 {
    (6.0 * octa_corner_excess() + 8.0 * tetra_corner_excess() - 4.0 * PI).abs()
}

/// `|4·(4π/3) + 8·V_STT + 4·V_STO - (2√2)³|` for unit spheres: the
/// conventional cell split into spheres and void bodies.
pub fn cell_volume_residual() -> f64 {
    let stt = stt_metrics(1.0).expect("unit radius");
    let sto = sto_metrics(1.0).expect("unit radius");
    let cell = (2.0 * SQRT_2).powi(3);
    (4.0 * sphere_volume(1.0) + 8.0 * stt.volume + 4.0 * sto.volume - cell).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tri(a: f64, b: f64, c: f64) -> SphericalTriangleSpec {
        SphericalTriangleSpec::new(a, b, c).unwrap()
    }

    #[test]
    fn vertex_angles() {
        let equilateral = vertex_angle_from_sides(&tri(PI / 3.0, PI / 3.0, PI / 3.0)).unwrap();
        assert_abs_diff_eq!(equilateral.cos(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(equilateral, 1.230959, epsilon = 1e-6);
        let half_square = vertex_angle_from_sides(&tri(PI / 3.0, PI / 3.0, PI / 2.0)).unwrap();
        assert_abs_diff_eq!(half_square, (-1.0_f64 / 3.0).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(half_square, 1.910633, epsilon = 1e-6);
        let octant = vertex_angle_from_sides(&tri(PI / 2.0, PI / 2.0, PI / 2.0)).unwrap();
        assert_abs_diff_eq!(octant, PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_triangle_specs() {
        assert!(SphericalTriangleSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(SphericalTriangleSpec::new(PI, 1.0, 1.0).is_err());
        assert!(SphericalTriangleSpec::new(0.2, 0.2, 1.0).is_err());
    }

    #[test]
    fn triangle_excesses() {
        let c = (1.0_f64 / 3.0).acos();
        let e = triangle_excess(c, c, c).unwrap();
        assert_abs_diff_eq!(e, tetra_corner_excess(), epsilon = 1e-14);
        assert_abs_diff_eq!(e, 0.551286, epsilon = 1e-6);
        assert_abs_diff_eq!(triangle_excess(PI / 2.0, PI / 2.0, PI / 2.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        let half = triangle_excess(0.955317, 0.955317, 1.910633).unwrap();
        assert_abs_diff_eq!(half, 0.679674, epsilon = 2e-6);
        assert!(triangle_excess(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn half_square_two_routes() {
        assert_abs_diff_eq!(half_square_excess_by_cosine_rule(), half_square_excess(), epsilon = 1e-14);
        assert_abs_diff_eq!(2.0 * half_square_excess(), octa_corner_excess(), epsilon = 1e-14);
    }

    #[test]
    fn polygon_excess_of_octant_and_cuboctahedron_faces() {
        let octant = [Vec3::x(), Vec3::y(), Vec3::z()];
        assert_abs_diff_eq!(polygon_excess(&octant).unwrap(), PI / 2.0, epsilon = 1e-14);
        let mut reversed = octant;
        reversed.reverse();
        assert_abs_diff_eq!(polygon_excess(&reversed).unwrap(), PI / 2.0, epsilon = 1e-14);

        let square = [
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(1.0, 0.0, -1.0),
        ];
        assert_abs_diff_eq!(polygon_excess(&square).unwrap(), 1.359347, epsilon = 1e-6);
        let triangle = [Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 1.0)];
        assert_abs_diff_eq!(polygon_excess(&triangle).unwrap(), 0.551286, epsilon = 1e-6);
    }

    #[test]
    fn polygon_excess_errors() {
        assert!(polygon_excess(&[Vec3::x(), Vec3::y()]).is_err());
        assert!(polygon_excess(&[Vec3::x(), -Vec3::x(), Vec3::z()]).is_err());
        assert!(polygon_excess(&[Vec3::x(), Vec3::zeros(), Vec3::z()]).is_err());
        // Bow-tie ordering of a square is not convex.
        let bowtie = [
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, -1.0),
        ];
        assert!(polygon_excess(&bowtie).is_err());
    }

    #[test]
    fn stt_values() {
        let m = stt_metrics(1.0).unwrap();
        assert_abs_diff_eq!(m.surface_area, 2.85016, epsilon = 1e-5);
        assert_abs_diff_eq!(m.area_rel_sphere, 0.226809, epsilon = 1e-5);
        assert_abs_diff_eq!(m.volume, 0.207762, epsilon = 1e-5);
        assert_abs_diff_eq!(m.vol_rel_sphere, 0.0495994, epsilon = 1e-5);
        assert_abs_diff_eq!(m.phi, 0.779636, epsilon = 1e-5);
        assert_abs_diff_eq!(m.surface_area, m.planar_area + m.spherical_area, epsilon = 1e-15);
        let m2 = stt_metrics(2.0).unwrap();
        assert_abs_diff_eq!(m2.volume, 8.0 * m.volume, epsilon = 1e-14);
        assert!(stt_metrics(0.0).is_err());
        assert!(stt_metrics(-1.0).is_err());
    }

    #[test]
    fn sto_values() {
        let m = sto_metrics(1.0).unwrap();
        assert_abs_diff_eq!(m.surface_area, 9.44612, epsilon = 1e-5);
        assert_abs_diff_eq!(m.area_rel_sphere, 0.751698, epsilon = 1e-5);
        assert_abs_diff_eq!(m.volume, 1.05254, epsilon = 1e-5);
        assert_abs_diff_eq!(m.vol_rel_sphere, 0.251276, epsilon = 1e-5);
        assert_abs_diff_eq!(m.phi, 0.720903, epsilon = 1e-5);
        assert!(sto_metrics(f64::NAN).is_err());
    }

    #[test]
    fn phi_from_sector_volumes() {
        let j = sector_volume(tetra_corner_excess(), 1.0);
        let k = tetrahedron_volume(2.0);
        assert_abs_diff_eq!(k, 2.0 * SQRT_2 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(4.0 * j / k, stt_metrics(1.0).unwrap().phi, epsilon = 1e-14);
        let p = sector_volume(octa_corner_excess(), 1.0);
        let q = octahedron_volume(2.0);
        assert_abs_diff_eq!(q, 8.0 * SQRT_2 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(6.0 * p / q, sto_metrics(1.0).unwrap().phi, epsilon = 1e-14);
    }

    #[test]
    fn ratios_and_densities() {
        assert_abs_diff_eq!(stt_sto_volume_ratio(), 0.197391, epsilon = 1e-6);
        for r in [0.5, 1.0, 3.0] {
            let ratio = stt_metrics(r).unwrap().volume / sto_metrics(r).unwrap().volume;
            assert_abs_diff_eq!(ratio, stt_sto_volume_ratio(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(ccp_density(), 0.740480, epsilon = 1e-6);
        assert_abs_diff_eq!(ccp_density(), PI / (3.0 * SQRT_2), epsilon = 1e-15);
        assert_abs_diff_eq!(ccp_density(), 4.0 * sphere_volume(1.0) / (2.0 * SQRT_2).powi(3), epsilon = 1e-15);
        assert_abs_diff_eq!(weighted_average_density(), ccp_density(), epsilon = 1e-12);
        assert_abs_diff_eq!(volume_weighted_density(), weighted_average_density(), epsilon = 1e-14);
        let (phi_stt, phi_sto) = (stt_metrics(1.0).unwrap().phi, sto_metrics(1.0).unwrap().phi);
        assert!(phi_sto < ccp_density() && ccp_density() < phi_stt);
    }

    #[test]
    fn identities() {
        assert!(packing_identity_residual() < 1e-12);
        assert_abs_diff_eq!(6.0 * 1.359347 + 8.0 * 0.551286, 4.0 * PI, epsilon = 1e-5);
        assert!(cell_volume_residual() < 1e-12);
    }
}
