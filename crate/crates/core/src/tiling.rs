//! Assemblies of void bodies around sphere packs and sampled partition checks.
//!
//! Two configurations are built: the 6 octahedral + 8 tetrahedral bodies that
//! enclose one interior sphere, and the full periodic tiling of an FCC box
//! (4 spheres, 4 STO and 8 STT per conventional cell). Every body comes from
//! its lattice site's actual sphere centers, so orientations are never chosen
//! by hand.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bounds, minimum_image, Vec3};
use crate::lattice::{find_hexamers, find_tetrads, neighbourhood, tangency_graph, SpherePack, DEFAULT_TOL};
use crate::regions::{sto_from_hexamer, stt_from_tetrad, BodyKind, Membership, RigidTransform, VoidBody};
use crate::sampling::{par_blocks, uniform_in_box};

/// Upper bound on rejection draws per accepted sample.
const MAX_REJECTIONS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    /// Union of the bodies' parent polyhedra.
    Local,
    /// The periodic box of the pack.
    Periodic { edge: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    spheres: SpherePack,
    bodies: Vec<VoidBody>,
    domain: Domain,
}

/// Which region a sample point fell in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Sphere(usize),
    Body(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// Number of regions containing the point (outside their boundary bands).
    pub multiplicity: usize,
    /// Within the boundary band of some region.
    pub boundary: bool,
    /// The last region found containing the point.
    pub region: Option<Region>,
}

impl Assembly {
    /// Checks that every generator of every body is a sphere of the pack.
    pub fn new(spheres: SpherePack, bodies: Vec<VoidBody>, domain: Domain) -> Result<Self> {
        let tol = 1e-7 * spheres.radius();
        for (b, body) in bodies.iter().enumerate() {
            for c in body.centers() {
                let found = (0..spheres.len()).any(|i| spheres.separation(i, c).norm() <= tol);
                if !found {
                    return Err(Error::InvalidGeometry(format!(
                        "body {b} has generator {c:?} that is not a sphere of the pack"
                    )));
                }
            }
        }
        if let Domain::Periodic { edge } = domain {
            if spheres.cell_edge() != Some(edge) {
                return Err(Error::InvalidArgument("periodic domain must match the pack cell".into()));
            }
        }
        Ok(Assembly {
            spheres,
            bodies,
            domain,
        })
    }

    pub fn spheres(&self) -> &SpherePack {
        &self.spheres
    }

    pub fn bodies(&self) -> &[VoidBody] {
        &self.bodies
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn count(&self, kind: BodyKind) -> usize {
        self.bodies.iter().filter(|b| b.kind() == kind).count()
    }

    /// The same assembly with a different body list (for fault injection).
    pub fn with_bodies(&self, bodies: Vec<VoidBody>) -> Result<Self> {
        Assembly::new(self.spheres.clone(), bodies, self.domain)
    }

    /// Volume of the sampling domain: the periodic box, or the summed parent
    /// volumes of a local assembly (parents meet only along faces).
    pub fn domain_volume(&self) -> f64 {
        match self.domain {
            Domain::Periodic { edge } => edge.powi(3),
            Domain::Local => self.bodies.iter().map(|b| b.parent_volume()).sum(),
        }
    }

    /// Classifies `p` against every sphere and every body.
    pub fn classify(&self, p: &Vec3, eps: f64) -> Classification {
        let mut out = Classification {
            multiplicity: 0,
            boundary: false,
            region: None,
        };
        let r = self.spheres.radius();
        for i in 0..self.spheres.len() {
            let d = self.spheres.separation(i, p).norm() - r;
            if d < -eps {
                out.multiplicity += 1;
                out.region = Some(Region::Sphere(i));
            } else if d <= eps {
                out.boundary = true;
            }
        }
        for (k, body) in self.bodies.iter().enumerate() {
            let g = body.centroid();
            let q = match self.domain {
                Domain::Periodic { edge } => g + minimum_image(p - g, edge),
                Domain::Local => *p,
            };
            // Every body point is within √2·R of its centroid.
            if (q - g).norm() > SQRT_2 * r + eps {
                continue;
            }
            match body.contains(&q, eps) {
                Membership::Inside => {
                    out.multiplicity += 1;
                    out.region = Some(Region::Body(k));
                }
                Membership::Boundary => out.boundary = true,
                Membership::Outside => {}
            }
        }
        out
    }

    fn sample_point<R: Rng>(&self, rng: &mut R, lo: &Vec3, hi: &Vec3) -> Option<Vec3> {
        match self.domain {
            Domain::Periodic { .. } => Some(uniform_in_box(rng, lo, hi)),
            Domain::Local => {
                for _ in 0..MAX_REJECTIONS {
                    let p = uniform_in_box(rng, lo, hi);
                    if self.bodies.iter().any(|b| b.in_parent(&p, 0.0)) {
                        return Some(p);
                    }
                }
                None
            }
        }
    }

    fn sampling_box(&self) -> (Vec3, Vec3) {
        match self.domain {
            Domain::Periodic { edge } => (Vec3::zeros(), Vec3::repeat(edge)),
            Domain::Local => {
                let all: Vec<Vec3> = self.bodies.iter().flat_map(|b| b.centers().iter().copied()).collect();
                bounds(&all)
            }
        }
    }
}

/// Outcome of a sampled partition check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub n_samples: u64,
    pub seed: u64,
    pub eps: f64,
    /// Fraction of samples in exactly one region.
    pub covered_once: f64,
    pub overlaps: u64,
    pub gaps: u64,
    pub boundary: u64,
    pub max_multiplicity: usize,
    /// Breakdown of the singly covered samples.
    pub sphere_points: u64,
    pub stt_points: u64,
    pub sto_points: u64,
}

impl PartitionReport {
    pub fn gap_fraction(&self) -> f64 {
        self.gaps as f64 / self.n_samples as f64
    }

    pub fn boundary_fraction(&self) -> f64 {
        self.boundary as f64 / self.n_samples as f64
    }
}

#[derive(Default)]
struct Tally {
    once: u64,
    overlaps: u64,
    gaps: u64,
    boundary: u64,
    max_multiplicity: usize,
    sphere: u64,
    stt: u64,
    sto: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.once += o.once;
        self.overlaps += o.overlaps;
        self.gaps += o.gaps;
        self.boundary += o.boundary;
        self.max_multiplicity = self.max_multiplicity.max(o.max_multiplicity);
        self.sphere += o.sphere;
        self.stt += o.stt;
        self.sto += o.sto;
        self
    }
}

/// Samples `n` uniform points of the assembly's domain and counts how many
/// regions (spheres and bodies) contain each.
pub fn verify_partition(assembly: &Assembly, n: u64, seed: u64, eps: f64) -> Result<PartitionReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let (lo, hi) = assembly.sampling_box();
    let tallies = par_blocks(n, seed, |rng, len| -> Result<Tally> {
        let mut t = Tally::default();
        for _ in 0..len {
            let p = assembly
                .sample_point(rng, &lo, &hi)
                .ok_or_else(|| Error::Sampling("could not draw a point inside the local domain".into()))?;
            let c = assembly.classify(&p, eps);
            t.max_multiplicity = t.max_multiplicity.max(c.multiplicity);
            if c.boundary {
                t.boundary += 1;
            } else if c.multiplicity == 0 {
                t.gaps += 1;
            } else if c.multiplicity > 1 {
                t.overlaps += 1;
            } else {
                t.once += 1;
                match c.region {
                    Some(Region::Sphere(_)) => t.sphere += 1,
                    Some(Region::Body(k)) => match assembly.bodies[k].kind() {
                        BodyKind::Stt => t.stt += 1,
                        BodyKind::Sto => t.sto += 1,
                    },
                    None => unreachable!("multiplicity one implies a region"),
                }
            }
        }
        Ok(t)
    });
    let mut total = Tally::default();
    for t in tallies {
        total = total.merge(t?);
    }
    Ok(PartitionReport {
        n_samples: n,
        seed,
        eps,
        covered_once: total.once as f64 / n as f64,
        overlaps: total.overlaps,
        gaps: total.gaps,
        boundary: total.boundary,
        max_multiplicity: total.max_multiplicity,
        sphere_points: total.sphere,
        stt_points: total.stt,
        sto_points: total.sto,
    })
}

/// Partition of one parent polyhedron into its body and the sectors of its
/// generating spheres.
pub fn verify_parent_partition(body: &VoidBody, n: u64, seed: u64, eps: f64) -> Result<PartitionReport> {
    let spheres = SpherePack::new(body.radius(), body.centers().to_vec())?;
    let assembly = Assembly::new(spheres, vec![body.clone()], Domain::Local)?;
    verify_partition(&assembly, n, seed, eps)
}

/// The 6 STO and 8 STT bodies around sphere `center_index`.
pub fn enclose_sphere(pack: &SpherePack, center_index: usize) -> Result<Assembly> {
    let tol = DEFAULT_TOL * pack.radius();
    let hood = neighbourhood(pack, center_index, tol)?;
    let incomplete = |detail: String| Error::IncompleteNeighbourhood {
        index: center_index,
        detail,
    };
    if hood.tangent.len() != 12 {
        return Err(incomplete(format!("{} tangent neighbours, need 12", hood.tangent.len())));
    }
    if hood.tetrads.len() != 8 || hood.hexamers.len() != 6 {
        return Err(incomplete(format!(
            "{} tetrads and {} hexamers, need 8 and 6",
            hood.tetrads.len(),
            hood.hexamers.len()
        )));
    }
    let r = pack.radius();
    let mut bodies = Vec::with_capacity(14);
    for h in &hood.hexamers {
        bodies.push(sto_from_hexamer(h, r)?);
    }
    for t in &hood.tetrads {
        bodies.push(stt_from_tetrad(t, r)?);
    }
    Assembly::new(pack.clone(), bodies, Domain::Local)
}

/// Bodies for every tetrahedral and octahedral site of a periodic pack.
pub fn cell_tiling(pack: &SpherePack) -> Result<Assembly> {
    let Some(edge) = pack.cell_edge() else {
        return Err(Error::InvalidArgument("cell tiling needs a periodic pack".into()));
    };
    let graph = tangency_graph(pack, DEFAULT_TOL * pack.radius())?;
    let r = pack.radius();
    let mut bodies = Vec::new();
    for h in find_hexamers(pack, &graph) {
        bodies.push(sto_from_hexamer(&h, r)?);
    }
    for t in find_tetrads(pack, &graph) {
        bodies.push(stt_from_tetrad(&t, r)?);
    }
    Assembly::new(pack.clone(), bodies, Domain::Periodic { edge })
}

/// If `b` is `a` turned a quarter turn about one of `a`'s two-fold axes (up to
/// translation), returns that axis direction.
pub fn quarter_turn_axis(a: &VoidBody, b: &VoidBody) -> Option<Vec3> {
    if a.kind() != BodyKind::Stt || b.kind() != BodyKind::Stt {
        return None;
    }
    let g = a.centroid();
    let target: Vec<Vec3> = b.centers().iter().map(|c| c - b.centroid() + g).collect();
    let v = a.centers();
    let tol = 1e-9 * a.radius();
    for (p, q) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))] {
        let axis = (v[p.0] + v[p.1]) / 2.0 - (v[q.0] + v[q.1]) / 2.0;
        let Ok(turn) = RigidTransform::rotation_about(axis, FRAC_PI_2, g) else {
            continue;
        };
        let turned: Vec<Vec3> = v.iter().map(|c| turn.apply(c)).collect();
        let matches = turned
            .iter()
            .all(|t| target.iter().any(|s| (t - s).norm() <= tol));
        if matches {
            return Some(axis.normalize());
        }
    }
    None
}

/// Pairs of STT bodies lying point-symmetrically about `center`.
pub fn opposing_stt_pairs(assembly: &Assembly, center: &Vec3) -> Vec<(usize, usize)> {
    let tol = 1e-9 * assembly.spheres.radius();
    let stts: Vec<usize> = (0..assembly.bodies.len())
        .filter(|&k| assembly.bodies[k].kind() == BodyKind::Stt)
        .collect();
    let mut pairs = Vec::new();
    for (i, &a) in stts.iter().enumerate() {
        for &b in &stts[i + 1..] {
            let ga = assembly.bodies[a].centroid() - center;
            let gb = assembly.bodies[b].centroid() - center;
            if (ga + gb).norm() <= tol {
                pairs.push((a, b));
            }
        }
    }
    pairs
}
