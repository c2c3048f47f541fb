//! Cubic close packed sphere arrays, their tangency graphs, and the tetrahedral
//! (tetrad) and octahedral (hexamer) sites between tangent spheres.
//!
//! Finite packs are plain center lists. Periodic packs live in a cubic box of
//! edge `cells * 2√2·R` and every distance is taken under the minimum-image
//! convention. A box of a single conventional cell is small enough that one
//! sphere touches several images of the same neighbour, so index-based graphs
//! collapse there; site enumeration therefore always works on explicit images.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fold_into_cell, minimum_image, point_list, Vec3};

/// Relative tolerance used for tangency and non-overlap checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite or periodic array of equal spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PackRecord", into = "PackRecord")]
pub struct SpherePack {
    radius: f64,
    cell: Option<f64>,
    centers: Vec<Vec3>,
}

#[derive(Serialize, Deserialize)]
struct PackRecord {
    radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell: Option<f64>,
    #[serde(with = "point_list")]
    centers: Vec<Vec3>,
}

impl TryFrom<PackRecord> for SpherePack {
    type Error = Error;

    fn try_from(r: PackRecord) -> Result<Self> {
        match r.cell {
            Some(edge) => SpherePack::periodic(r.radius, edge, r.centers),
            None => SpherePack::new(r.radius, r.centers),
        }
    }
}

impl From<SpherePack> for PackRecord {
    fn from(p: SpherePack) -> Self {
        PackRecord {
            radius: p.radius,
            cell: p.cell,
            centers: p.centers,
        }
    }
}

impl SpherePack {
    /// A finite pack. Fails if the radius is not positive or two spheres overlap.
    pub fn new(radius: f64, centers: Vec<Vec3>) -> Result<Self> {
        let pack = SpherePack {
            radius,
            cell: None,
            centers,
        };
        pack.validate()?;
        Ok(pack)
    }

    /// A periodic pack in the cubic box `[0, edge)^3`.
    pub fn periodic(radius: f64, edge: f64, centers: Vec<Vec3>) -> Result<Self> {
        if !(edge > 0.0) || !edge.is_finite() {
            return Err(Error::InvalidArgument(format!("cell edge must be positive, got {edge}")));
        }
        if let Some(p) = centers
            .iter()
            .find(|p| p.iter().any(|&x| !(0.0..edge).contains(&x)))
        {
            return Err(Error::InvalidGeometry(format!(
                "center {p:?} lies outside the half-open cell of edge {edge}"
            )));
        }
        let pack = SpherePack {
            radius,
            cell: Some(edge),
            centers,
        };
        pack.validate()?;
        Ok(pack)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        let min_dist = 2.0 * self.radius * (1.0 - DEFAULT_TOL);
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let d = self.separation(i, &self.centers[j]).norm();
                if d < min_dist {
                    return Err(Error::InvalidGeometry(format!(
                        "spheres {i} and {j} overlap (distance {d})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Edge of the periodic box, if any.
    pub fn cell_edge(&self) -> Option<f64> {
        self.cell
    }

    pub fn is_periodic(&self) -> bool {
        self.cell.is_some()
    }

    /// Conventional FCC cell edge for this radius, `2√2·R`.
    pub fn conventional_edge(&self) -> f64 {
        2.0 * SQRT_2 * self.radius
    }

    /// Number of conventional cells along each axis of a periodic box.
    pub fn cells_per_axis(&self) -> Option<usize> {
        self.cell
            .map(|edge| (edge / self.conventional_edge()).round().max(1.0) as usize)
    }

    /// `p - center[i]`, wrapped to the nearest image for periodic packs.
    #[inline]
    pub fn separation(&self, i: usize, p: &Vec3) -> Vec3 {
        let d = p - self.centers[i];
        match self.cell {
            Some(edge) => minimum_image(d, edge),
            None => d,
        }
    }

    /// Fraction of the periodic box occupied by spheres.
    pub fn volume_fraction(&self) -> Option<f64> {
        self.cell.map(|edge| {
            let sphere = 4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3);
            self.centers.len() as f64 * sphere / edge.powi(3)
        })
    }

    /// Uniform scaling of centers, radius and cell.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let centers = self.centers.iter().map(|c| c * s).collect();
        match self.cell {
            Some(edge) => SpherePack::periodic(self.radius * s, edge * s, centers),
            None => SpherePack::new(self.radius * s, centers),
        }
    }

    /// Every image `(index, position)` of a sphere center within `reach` of `p`.
    /// For a finite pack these are just the centers themselves.
    pub fn images_near(&self, p: &Vec3, reach: f64) -> Vec<(usize, Vec3)> {
        let mut out = Vec::new();
        match self.cell {
            None => {
                for (i, c) in self.centers.iter().enumerate() {
                    if (c - p).norm() <= reach {
                        out.push((i, *c));
                    }
                }
            }
            Some(edge) => {
                for (i, c) in self.centers.iter().enumerate() {
                    let nearest = p + minimum_image(c - p, edge);
                    let m = (reach / edge).ceil() as i32 + 1;
                    for a in -m..=m {
                        for b in -m..=m {
                            for k in -m..=m {
                                let q = nearest + edge * Vec3::new(a as f64, b as f64, k as f64);
                                if (q - p).norm() <= reach {
                                    out.push((i, q));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The symmetric 19-sphere array of unit spheres: a 3×3 square layer in the
/// plane `z = 0`, four spheres above and four below it in the hollows around
/// the origin, and one apex sphere on each side.
pub fn generate_fig2_array() -> SpherePack {
    let h = SQRT_2;
    let mut centers = Vec::with_capacity(19);
    for x in [2.0, 0.0, -2.0] {
        for y in [-2.0, 0.0, 2.0] {
            centers.push(Vec3::new(x, y, 0.0));
        }
    }
    for z in [h, -h] {
        for (x, y) in [(1.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (-1.0, 1.0)] {
            centers.push(Vec3::new(x, y, z));
        }
        centers.push(Vec3::new(0.0, 0.0, 2.0 * z));
    }
    SpherePack::new(1.0, centers).expect("19-sphere array is a valid pack")
}

/// Periodic FCC pack of unit spheres, `repeats^3` conventional cells.
pub fn generate_fcc_cell(repeats: usize) -> Result<SpherePack> {
    generate_fcc_cell_with_radius(repeats, 1.0)
}

pub fn generate_fcc_cell_with_radius(repeats: usize, radius: f64) -> Result<SpherePack> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let a = 2.0 * SQRT_2 * radius;
    let half = 0.5 * a;
    let basis = [
        Vec3::zeros(),
        Vec3::new(0.0, half, half),
        Vec3::new(half, 0.0, half),
        Vec3::new(half, half, 0.0),
    ];
    let mut centers = Vec::with_capacity(4 * repeats.pow(3));
    for i in 0..repeats {
        for j in 0..repeats {
            for k in 0..repeats {
                let origin = a * Vec3::new(i as f64, j as f64, k as f64);
                centers.extend(basis.iter().map(|b| origin + b));
            }
        }
    }
    SpherePack::periodic(radius, a * repeats as f64, centers)
}

/// Undirected tangency graph of a pack.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyGraph {
    n: usize,
    tol: f64,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl TangencyGraph {
    /// Edges `(i, j)`, `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }
}

/// Tangency graph with an absolute distance tolerance `tol`.
///
/// For periodic packs an index pair is connected when any image pair is
/// tangent, so a single conventional cell yields a complete graph on its four
/// spheres rather than the degree-12 coordination of the infinite lattice.
pub fn tangency_graph(pack: &SpherePack, tol: f64) -> Result<TangencyGraph> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = pack.len();
    let target = 2.0 * pack.radius();
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        let c = pack.centers()[i];
        for j in i + 1..n {
            let tangent = match pack.cell_edge() {
                None => ((pack.centers()[j] - c).norm() - target).abs() <= tol,
                Some(_) => pack
                    .images_near(&c, target + tol)
                    .iter()
                    .any(|&(k, q)| k == j && ((q - c).norm() - target).abs() <= tol),
            };
            if tangent {
                edges.push((i, j));
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(TangencyGraph {
        n,
        tol,
        edges,
        adjacency,
    })
}

fn pairwise_check(centers: &[Vec3], radius: f64, tol: f64, expect: impl Fn(usize, usize) -> f64) -> bool {
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if ((centers[i] - centers[j]).norm() - expect(i, j) * radius).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Four mutually tangent spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct TetradSite {
    pub sphere_indices: [usize; 4],
    pub centers: [Vec3; 4],
}

impl TetradSite {
    /// Validates that the centers form a regular tetrahedron of edge `2·radius`.
    pub fn new(sphere_indices: [usize; 4], centers: [Vec3; 4], radius: f64) -> Result<Self> {
        if !pairwise_check(&centers, radius, DEFAULT_TOL * radius.max(1.0) * 10.0, |_, _| 2.0) {
            return Err(Error::InvalidGeometry(format!(
                "tetrad centers {centers:?} are not a regular tetrahedron of edge {}",
                2.0 * radius
            )));
        }
        Ok(TetradSite {
            sphere_indices,
            centers,
        })
    }

    pub fn centroid(&self) -> Vec3 {
        self.centers.iter().sum::<Vec3>() / 4.0
    }
}

/// Six spheres at the vertices of a regular octahedron. Centers are stored as
/// three antipodal pairs: `(0, 1)`, `(2, 3)`, `(4, 5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HexamerSite {
    pub sphere_indices: [usize; 6],
    pub centers: [Vec3; 6],
}

impl HexamerSite {
    /// Validates the octahedral arrangement: each vertex tangent to the four
    /// non-opposite vertices, opposite vertices `2√2·radius` apart.
    pub fn new(sphere_indices: [usize; 6], centers: [Vec3; 6], radius: f64) -> Result<Self> {
        let tol = DEFAULT_TOL * radius.max(1.0) * 10.0;
        let ok = pairwise_check(&centers, radius, tol, |i, j| {
            if i / 2 == j / 2 {
                2.0 * SQRT_2
            } else {
                2.0
            }
        });
        if !ok {
            return Err(Error::InvalidGeometry(format!(
                "hexamer centers {centers:?} are not a regular octahedron of edge {}",
                2.0 * radius
            )));
        }
        Ok(HexamerSite {
            sphere_indices,
            centers,
        })
    }

    pub fn centroid(&self) -> Vec3 {
        self.centers.iter().sum::<Vec3>() / 6.0
    }
}

/// Explicit point images with a tangency adjacency, the common ground for all
/// site searches.
struct ImageGraph {
    points: Vec<(usize, Vec3)>,
    adjacency: Vec<Vec<usize>>,
    radius: f64,
    tol: f64,
}

impl ImageGraph {
    fn from_distances(points: Vec<(usize, Vec3)>, radius: f64, tol: f64) -> Self {
        let target = 2.0 * radius;
        let mut adjacency = vec![Vec::new(); points.len()];
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if ((points[i].1 - points[j].1).norm() - target).abs() <= tol {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        ImageGraph {
            points,
            adjacency,
            radius,
            tol,
        }
    }

    fn from_graph(pack: &SpherePack, graph: &TangencyGraph) -> Self {
        ImageGraph {
            points: pack.centers().iter().copied().enumerate().collect(),
            adjacency: (0..pack.len()).map(|i| graph.neighbours(i).to_vec()).collect(),
            radius: pack.radius(),
            tol: graph.tol(),
        }
    }

    fn common(&self, a: usize, b: usize) -> Vec<usize> {
        self.adjacency[a]
            .iter()
            .copied()
            .filter(|x| self.adjacency[b].contains(x))
            .collect()
    }

    fn tetrads(&self) -> Vec<TetradSite> {
        let mut out = Vec::new();
        for a in 0..self.points.len() {
            for &b in self.adjacency[a].iter().filter(|&&b| b > a) {
                let ab = self.common(a, b);
                for &c in ab.iter().filter(|&&c| c > b) {
                    for &d in ab.iter().filter(|&&d| d > c) {
                        if !self.adjacency[c].contains(&d) {
                            continue;
                        }
                        let ids = [a, b, c, d];
                        if let Ok(site) = TetradSite::new(
                            ids.map(|k| self.points[k].0),
                            ids.map(|k| self.points[k].1),
                            self.radius,
                        ) {
                            out.push(site);
                        }
                    }
                }
            }
        }
        out
    }

    fn hexamers(&self) -> Vec<HexamerSite> {
        let far = 2.0 * SQRT_2 * self.radius;
        let mut out = Vec::new();
        for a in 0..self.points.len() {
            for f in a + 1..self.points.len() {
                if ((self.points[a].1 - self.points[f].1).norm() - far).abs() > self.tol {
                    continue;
                }
                let ring = self.common(a, f);
                if ring.len() != 4 {
                    continue;
                }
                // Pair each ring member with the one it does not touch.
                let r0 = ring[0];
                let Some(&opposite) = ring[1..].iter().find(|&&r| !self.adjacency[r0].contains(&r)) else {
                    continue;
                };
                let rest: Vec<usize> = ring[1..].iter().copied().filter(|&r| r != opposite).collect();
                let ids = [a, f, r0, opposite, rest[0], rest[1]];
                if let Ok(site) = HexamerSite::new(
                    ids.map(|k| self.points[k].0),
                    ids.map(|k| self.points[k].1),
                    self.radius,
                ) {
                    out.push(site);
                }
            }
        }
        out
    }
}

/// Images of a periodic pack covering every site whose centroid lies in the box.
fn periodic_images(pack: &SpherePack, graph: &TangencyGraph) -> ImageGraph {
    let edge = pack.cell_edge().expect("periodic pack");
    let margin = SQRT_2 * pack.radius() + graph.tol() + 1e-9 * edge;
    let mut points = Vec::new();
    for (i, c) in pack.centers().iter().enumerate() {
        for a in -1..=1 {
            for b in -1..=1 {
                for k in -1..=1 {
                    let q = c + edge * Vec3::new(a as f64, b as f64, k as f64);
                    if q.iter().all(|&x| x >= -margin && x <= edge + margin) {
                        points.push((i, q));
                    }
                }
            }
        }
    }
    ImageGraph::from_distances(points, pack.radius(), graph.tol())
}

/// Keeps one copy of each site per periodic cell, translated so that its
/// centroid lies in `[0, edge)^3`.
fn fold_sites<S, const N: usize>(
    sites: Vec<S>,
    edge: f64,
    parts: impl Fn(&mut S) -> &mut [Vec3; N],
) -> Vec<S> {
    let tol = 1e-9 * edge;
    let mut seen: HashMap<[i64; 3], ()> = HashMap::new();
    let mut out = Vec::new();
    for mut site in sites {
        let centers = parts(&mut site);
        let centroid = centers.iter().sum::<Vec3>() / N as f64;
        let folded = fold_into_cell(centroid, edge, tol);
        let key = folded.map(|x| (x / edge * 1e6).round() as i64);
        if seen.insert([key.x, key.y, key.z], ()).is_some() {
            continue;
        }
        let shift = folded - centroid;
        let shift = shift.map(|x| edge * (x / edge).round());
        for c in centers.iter_mut() {
            *c += shift;
        }
        out.push(site);
    }
    out
}

/// All tetrahedral sites. Finite packs are searched through `graph`; periodic
/// packs through explicit images, one site per cell.
pub fn find_tetrads(pack: &SpherePack, graph: &TangencyGraph) -> Vec<TetradSite> {
    match pack.cell_edge() {
        None => ImageGraph::from_graph(pack, graph).tetrads(),
        Some(edge) => fold_sites(periodic_images(pack, graph).tetrads(), edge, |s| &mut s.centers),
    }
}

/// All octahedral sites, deduplicated the same way as [`find_tetrads`].
pub fn find_hexamers(pack: &SpherePack, graph: &TangencyGraph) -> Vec<HexamerSite> {
    match pack.cell_edge() {
        None => {
            let mut search = ImageGraph::from_graph(pack, graph);
            search.tol = graph.tol();
            let mut sites = search.hexamers();
            // Each octahedron is found once per antipodal pair.
            let mut seen = Vec::<Vec<usize>>::new();
            sites.retain(|s| {
                let mut key = s.sphere_indices.to_vec();
                key.sort_unstable();
                if seen.contains(&key) {
                    false
                } else {
                    seen.push(key);
                    true
                }
            });
            sites
        }
        Some(edge) => fold_sites(periodic_images(pack, graph).hexamers(), edge, |s| &mut s.centers),
    }
}

/// The spheres and sites incident to one sphere.
#[derive(Debug, Clone)]
pub struct Neighbourhood {
    pub center: Vec3,
    /// Tangent neighbours as `(sphere index, image position)`.
    pub tangent: Vec<(usize, Vec3)>,
    pub tetrads: Vec<TetradSite>,
    pub hexamers: Vec<HexamerSite>,
}

/// Tangent neighbours and incident sites of sphere `index`, using actual image
/// positions around it.
pub fn neighbourhood(pack: &SpherePack, index: usize, tol: f64) -> Result<Neighbourhood> {
    if index >= pack.len() {
        return Err(Error::InvalidArgument(format!(
            "sphere index {index} out of range for {} spheres",
            pack.len()
        )));
    }
    let center = pack.centers()[index];
    let reach = 2.0 * SQRT_2 * pack.radius() + tol;
    let mut points = pack.images_near(&center, reach);
    // Self first so the search can anchor on it.
    let self_pos = points
        .iter()
        .position(|&(i, q)| i == index && (q - center).norm() <= tol)
        .expect("a sphere is near itself");
    points.swap(0, self_pos);
    let search = ImageGraph::from_distances(points, pack.radius(), tol);
    let tangent = search.adjacency[0].iter().map(|&k| search.points[k]).collect();
    let tetrads = search
        .tetrads()
        .into_iter()
        .filter(|t| t.centers.iter().any(|c| (c - center).norm() <= tol))
        .collect();
    let hexamers = search
        .hexamers()
        .into_iter()
        .filter(|h| (h.centers[0] - center).norm() <= tol)
        .collect();
    Ok(Neighbourhood {
        center,
        tangent,
        tetrads,
        hexamers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has(pack: &SpherePack, p: Vec3) -> Option<usize> {
        pack.centers().iter().position(|c| (c - p).norm() < 1e-12)
    }

    #[test]
    fn nineteen_sphere_array_contents() {
        let pack = generate_fig2_array();
        assert_eq!(pack.len(), 19);
        assert_eq!(pack.radius(), 1.0);
        assert!(has(&pack, Vec3::zeros()).is_some());
        assert!(has(&pack, Vec3::new(0.0, 0.0, 2.0 * SQRT_2)).is_some());
        assert!(has(&pack, Vec3::new(-1.0, 1.0, SQRT_2)).is_some());
        assert!(has(&pack, Vec3::new(-1.0, 1.0, -SQRT_2)).is_some());
    }

    #[test]
    fn array_origin_has_twelve_tangent_neighbours_by_enumeration() {
        let pack = generate_fig2_array();
        let origin = has(&pack, Vec3::zeros()).unwrap();
        let count = pack
            .centers()
            .iter()
            .filter(|c| (c.norm() - 2.0).abs() < 1e-12)
            .count();
        assert_eq!(count, 12);
        let g = tangency_graph(&pack, 1e-9).unwrap();
        assert_eq!(g.degree(origin), 12);
        let apex = has(&pack, Vec3::new(0.0, 0.0, 2.0 * SQRT_2)).unwrap();
        assert_eq!(g.degree(apex), 4);
    }

    #[test]
    fn graph_is_symmetric_without_loops() {
        let g = tangency_graph(&generate_fig2_array(), 1e-9).unwrap();
        for &(i, j) in g.edges() {
            assert!(i < j);
            assert!(g.contains(i, j) && g.contains(j, i));
        }
    }

    #[test]
    fn single_sphere_graph_is_empty() {
        let pack = SpherePack::new(1.0, vec![Vec3::zeros()]).unwrap();
        assert!(tangency_graph(&pack, 1e-9).unwrap().edges().is_empty());
        assert!(tangency_graph(&pack, 0.0).is_err());
    }

    #[test]
    fn fcc_cell_shape() {
        let pack = generate_fcc_cell(1).unwrap();
        assert_eq!(pack.len(), 4);
        assert!((pack.cell_edge().unwrap() - 2.828427).abs() < 1e-6);
        assert!((pack.volume_fraction().unwrap() - 0.740480).abs() < 1e-6);
        let mut nearest = f64::INFINITY;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    nearest = nearest.min(pack.separation(i, &pack.centers()[j]).norm());
                }
            }
        }
        assert!((nearest - 2.0).abs() < 1e-12);
        assert_eq!(generate_fcc_cell(2).unwrap().len(), 32);
        assert!(matches!(generate_fcc_cell(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn periodic_degree_twelve_from_two_cells() {
        let pack = generate_fcc_cell(2).unwrap();
        let g = tangency_graph(&pack, 1e-9).unwrap();
        assert!((0..pack.len()).all(|i| g.degree(i) == 12));
    }

    #[test]
    fn array_contains_named_tetrad_and_hexamer() {
        let pack = generate_fig2_array();
        let g = tangency_graph(&pack, 1e-9).unwrap();
        let tetrad: Vec<usize> = [
            Vec3::zeros(),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, -1.0, SQRT_2),
            Vec3::new(1.0, 1.0, SQRT_2),
        ]
        .iter()
        .map(|p| has(&pack, *p).unwrap())
        .collect();
        let found = find_tetrads(&pack, &g);
        assert!(found.iter().any(|t| {
            let mut ids = t.sphere_indices.to_vec();
            ids.sort_unstable();
            let mut want = tetrad.clone();
            want.sort_unstable();
            ids == want
        }));

        let hexamer: Vec<usize> = [
            Vec3::new(0.0, 0.0, 2.0 * SQRT_2),
            Vec3::new(1.0, 1.0, SQRT_2),
            Vec3::new(1.0, -1.0, SQRT_2),
            Vec3::new(-1.0, 1.0, SQRT_2),
            Vec3::new(-1.0, -1.0, SQRT_2),
            Vec3::zeros(),
        ]
        .iter()
        .map(|p| has(&pack, *p).unwrap())
        .collect();
        let found = find_hexamers(&pack, &g);
        assert!(found.iter().any(|h| {
            let mut ids = h.sphere_indices.to_vec();
            ids.sort_unstable();
            let mut want = hexamer.clone();
            want.sort_unstable();
            ids == want
        }));
    }

    #[test]
    fn periodic_site_counts_per_cell() {
        for repeats in 1..=2 {
            let pack = generate_fcc_cell(repeats).unwrap();
            let g = tangency_graph(&pack, 1e-9).unwrap();
            let cells = repeats.pow(3);
            assert_eq!(find_tetrads(&pack, &g).len(), 8 * cells);
            assert_eq!(find_hexamers(&pack, &g).len(), 4 * cells);
        }
    }

    #[test]
    fn periodic_site_centroids_are_folded_into_cell() {
        let pack = generate_fcc_cell(1).unwrap();
        let edge = pack.cell_edge().unwrap();
        let g = tangency_graph(&pack, 1e-9).unwrap();
        for t in find_tetrads(&pack, &g) {
            assert!(t.centroid().iter().all(|&x| (0.0..edge).contains(&x)));
        }
        for h in find_hexamers(&pack, &g) {
            assert!(h.centroid().iter().all(|&x| x > -1e-12 && x < edge));
        }
    }

    #[test]
    fn degenerate_packs_have_no_sites() {
        let two = SpherePack::new(1.0, vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)]).unwrap();
        let g = tangency_graph(&two, 1e-9).unwrap();
        assert!(find_tetrads(&two, &g).is_empty());

        let four = SpherePack::new(
            1.0,
            [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
                .iter()
                .map(|&(x, y, z)| Vec3::new(x, y, z) / SQRT_2)
                .collect(),
        )
        .unwrap();
        let g = tangency_graph(&four, 1e-9).unwrap();
        assert_eq!(find_tetrads(&four, &g).len(), 1);
        assert!(find_hexamers(&four, &g).is_empty());
    }

    #[test]
    fn overlapping_spheres_rejected() {
        let err = SpherePack::new(1.0, vec![Vec3::zeros(), Vec3::new(1.5, 0.0, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
        let err = SpherePack::periodic(1.0, 3.0, vec![Vec3::new(3.0, 0.0, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
        assert!(SpherePack::new(0.0, vec![]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let pack = generate_fcc_cell(1).unwrap();
        let back = SpherePack::from_json(&pack.to_json().unwrap()).unwrap();
        assert_eq!(back, pack);
        let json = r#"{"radius": 1.0, "centers": [[0,0,0],[1,0,0]]}"#;
        assert!(SpherePack::from_json(json).is_err());
        let v: serde_json::Value = serde_json::from_str(&generate_fig2_array().to_json().unwrap()).unwrap();
        assert!(v.get("cell").is_none());
        assert_eq!(v["centers"].as_array().unwrap().len(), 19);
    }

    #[test]
    fn neighbourhood_of_array_origin() {
        let pack = generate_fig2_array();
        let origin = has(&pack, Vec3::zeros()).unwrap();
        let n = neighbourhood(&pack, origin, 1e-9).unwrap();
        assert_eq!(n.tangent.len(), 12);
        assert_eq!(n.tetrads.len(), 8);
        assert_eq!(n.hexamers.len(), 6);
    }

    #[test]
    fn neighbourhood_in_single_periodic_cell_uses_images() {
        let pack = generate_fcc_cell(1).unwrap();
        let n = neighbourhood(&pack, 2, 1e-9).unwrap();
        assert_eq!(n.tangent.len(), 12);
        assert_eq!(n.tetrads.len(), 8);
        assert_eq!(n.hexamers.len(), 6);
    }
}
