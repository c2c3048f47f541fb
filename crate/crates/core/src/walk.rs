//! Restricted diffusion in the void space of a periodic sphere pack.
//!
//! Walkers take fixed-length steps in isotropic random directions and either
//! reflect specularly off sphere surfaces or resample blocked steps. Time is
//! counted in steps; the free-space diffusivity for step length δ and step
//! duration τ would be δ²/(6τ), but only the dimensionless ratio of the fitted
//! long-time slope to the free slope is reported.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{minimum_image, Vec3};
use crate::lattice::SpherePack;
use crate::sampling::{block_rng, uniform_direction, CompensatedSum};

/// Reflections allowed within one step before the step is abandoned.
pub const MAX_REFLECTIONS: u32 = 16;
/// Attempts to place a walker in the void before giving up.
pub const INIT_RETRIES: u32 = 100_000;
/// Attempts to draw an unobstructed step in [`Reflection::Reject`] mode.
pub const REJECT_RETRIES: u32 = 1_000;
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reflection {
    Specular,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub step_length: f64,
    pub n_steps: usize,
    pub n_walkers: usize,
    pub seed: u64,
    pub reflection: Reflection,
    /// Wave-vectors at which to evaluate the propagator, in 1/length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_samples: Option<Vec<[f64; 3]>>,
    /// Trailing fraction of the MSD series used for the slope fit.
    pub fit_window: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            step_length: 0.01,
            n_steps: 10_000,
            n_walkers: 1_000,
            seed: 0,
            reflection: Reflection::Specular,
            q_samples: None,
            fit_window: 0.5,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self, radius: f64) -> Result<()> {
        if !(self.step_length > 0.0) || self.step_length > 0.1 * radius * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "step length must lie in (0, {}], got {}",
                0.1 * radius,
                self.step_length
            )));
        }
        if self.n_steps == 0 || self.n_walkers == 0 {
            return Err(Error::InvalidArgument("step and walker counts must be at least 1".into()));
        }
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fit window must lie in (0, 1], got {}",
                self.fit_window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorPoint {
    pub q: [f64; 3],
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    /// Mean squared displacement after 0, 1, ..., n_steps steps.
    pub msd: Vec<f64>,
    pub d_eff_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagator_magnitude: Option<Vec<PropagatorPoint>>,
    pub n_reflections: u64,
    /// Steps abandoned after [`MAX_REFLECTIONS`] bounces or, in reject mode,
    /// after [`REJECT_RETRIES`] blocked draws. The walker stays put.
    pub n_discarded_steps: u64,
    /// Smallest distance from a walker to a sphere surface over the whole run
    /// (negative would mean a walker entered a sphere).
    pub min_clearance: f64,
    /// Net displacement of every walker, in walker order.
    #[serde(skip)]
    pub displacements: Vec<Vec3>,
}

/// Sphere images near a point, found through a uniform bin grid.
struct Obstacles<'a> {
    pack: &'a SpherePack,
    edge: f64,
    bins: usize,
    members: Vec<Vec<usize>>,
    everyone: Vec<usize>,
}

impl<'a> Obstacles<'a> {
    fn new(pack: &'a SpherePack, reach: f64) -> Self {
        let edge = pack.cell_edge().expect("periodic pack");
        let bins = (edge / reach).floor() as usize;
        let mut members = Vec::new();
        if bins >= 3 {
            members = vec![Vec::new(); bins * bins * bins];
            for (i, c) in pack.centers().iter().enumerate() {
                members[Self::bin_of(c, edge, bins)].push(i);
            }
        }
        Obstacles {
            pack,
            edge,
            bins,
            members,
            everyone: (0..pack.len()).collect(),
        }
    }

    fn coords(p: &Vec3, edge: f64, bins: usize) -> [usize; 3] {
        [p.x, p.y, p.z].map(|x| ((x.rem_euclid(edge) / edge * bins as f64) as usize).min(bins - 1))
    }

    fn bin_of(p: &Vec3, edge: f64, bins: usize) -> usize {
        let [i, j, k] = Self::coords(p, edge, bins);
        (i * bins + j) * bins + k
    }

    /// Nearest image of every sphere that may lie within `reach` of `p`.
    fn near(&self, p: &Vec3, out: &mut Vec<Vec3>) {
        out.clear();
        let centers = self.pack.centers();
        let mut push = |i: usize| out.push(p + minimum_image(centers[i] - p, self.edge));
        if self.bins < 3 {
            self.everyone.iter().for_each(|&i| push(i));
            return;
        }
        let n = self.bins as isize;
        let [i, j, k] = Self::coords(p, self.edge, self.bins).map(|x| x as isize);
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    let idx = ((i + a).rem_euclid(n) * n + (j + b).rem_euclid(n)) * n + (k + c).rem_euclid(n);
                    self.members[idx as usize].iter().for_each(|&s| push(s));
                }
            }
        }
    }
}

/// Distance along `dir` to the first sphere entered, if within `limit`.
fn first_hit(pos: &Vec3, dir: &Vec3, limit: f64, spheres: &[Vec3], radius: f64) -> Option<(f64, Vec3)> {
    let mut best: Option<(f64, Vec3)> = None;
    for c in spheres {
        let w = pos - c;
        let b = w.dot(dir);
        if b >= 0.0 {
            continue;
        }
        let disc = b * b - (w.norm_squared() - radius * radius);
        if disc < 0.0 {
            continue;
        }
        let t = (-b - disc.sqrt()).max(0.0);
        if t <= limit && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, *c));
        }
    }
    best
}

fn clearance(pos: &Vec3, spheres: &[Vec3], radius: f64, default: f64) -> f64 {
    spheres
        .iter()
        .map(|c| (pos - c).norm() - radius)
        .fold(default, f64::min)
}

struct ChunkOutput {
    msd: Vec<f64>,
    displacements: Vec<Vec3>,
    reflections: u64,
    discarded: u64,
    min_clearance: f64,
}

struct Walker<'a> {
    obstacles: &'a Obstacles<'a>,
    radius: f64,
    cfg: &'a WalkConfig,
    scratch: Vec<Vec3>,
    reflections: u64,
    discarded: u64,
}

impl Walker<'_> {
    fn start(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec3> {
        let edge = self.obstacles.edge;
        for _ in 0..INIT_RETRIES {
            let p = Vec3::new(rng.random(), rng.random(), rng.random()) * edge;
            self.obstacles.near(&p, &mut self.scratch);
            if clearance(&p, &self.scratch, self.radius, f64::INFINITY) > 0.0 {
                return Ok(p);
            }
        }
        Err(Error::Sampling(format!(
            "no void point found in {INIT_RETRIES} attempts"
        )))
    }

    /// Advances `pos` by one step and returns the clearance at the new point.
    fn step(&mut self, pos: &mut Vec3, rng: &mut ChaCha8Rng) -> f64 {
        let delta = self.cfg.step_length;
        self.obstacles.near(pos, &mut self.scratch);
        match self.cfg.reflection {
            Reflection::Specular => {
                let mut p = *pos;
                let mut dir = uniform_direction(rng);
                let mut remaining = delta;
                let mut bounces = 0;
                loop {
                    match first_hit(&p, &dir, remaining, &self.scratch, self.radius) {
                        None => {
                            p += remaining * dir;
                            break;
                        }
                        Some((t, c)) => {
                            bounces += 1;
                            if bounces > MAX_REFLECTIONS {
                                self.discarded += 1;
                                return clearance(pos, &self.scratch, self.radius, delta);
                            }
                            let n = (p + t * dir - c).normalize();
                            p = c + self.radius * n;
                            dir -= 2.0 * dir.dot(&n) * n;
                            remaining -= t;
                        }
                    }
                }
                self.reflections += bounces as u64;
                *pos = p;
            }
            Reflection::Reject => {
                let mut moved = false;
                for _ in 0..REJECT_RETRIES {
                    let dir = uniform_direction(rng);
                    if first_hit(pos, &dir, delta, &self.scratch, self.radius).is_none() {
                        *pos += delta * dir;
                        moved = true;
                        break;
                    }
                    self.reflections += 1;
                }
                if !moved {
                    self.discarded += 1;
                }
            }
        }
        clearance(pos, &self.scratch, self.radius, delta)
    }
}

fn run_chunk(obstacles: &Obstacles, radius: f64, cfg: &WalkConfig, chunk: usize) -> Result<ChunkOutput> {
    let first = chunk * CHUNK;
    let last = (first + CHUNK).min(cfg.n_walkers);
    let mut walker = Walker {
        obstacles,
        radius,
        cfg,
        scratch: Vec::new(),
        reflections: 0,
        discarded: 0,
    };
    let mut msd = vec![0.0; cfg.n_steps + 1];
    let mut displacements = Vec::with_capacity(last - first);
    let mut min_clearance = f64::INFINITY;
    for w in first..last {
        let mut rng = block_rng(cfg.seed, w as u64);
        let origin = walker.start(&mut rng)?;
        let mut pos = origin;
        for slot in msd.iter_mut().skip(1) {
            min_clearance = min_clearance.min(walker.step(&mut pos, &mut rng));
            *slot += (pos - origin).norm_squared();
        }
        displacements.push(pos - origin);
    }
    Ok(ChunkOutput {
        msd,
        displacements,
        reflections: walker.reflections,
        discarded: walker.discarded,
        min_clearance,
    })
}

/// Least-squares slope of the trailing `window` fraction of `msd` against
/// step number.
pub fn fit_slope(msd: &[f64], window: f64) -> f64 {
    let n = msd.len() - 1;
    let m = ((window * n as f64).floor() as usize).clamp(1, n);
    let ks: Vec<f64> = (n - m..=n).map(|k| k as f64).collect();
    let ys = &msd[n - m..=n];
    let kbar = ks.iter().sum::<f64>() / ks.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in ks.iter().zip(ys) {
        sxy += (k - kbar) * (y - ybar);
        sxx += (k - kbar) * (k - kbar);
    }
    sxy / sxx
}

/// Runs the walk. Results depend only on `pack` and `cfg`, not on the number
/// of threads.
pub fn simulate(pack: &SpherePack, cfg: &WalkConfig) -> Result<WalkResult> {
    if !pack.is_periodic() {
        return Err(Error::InvalidArgument("random walks need a periodic pack".into()));
    }
    cfg.validate(pack.radius())?;
    let obstacles = Obstacles::new(pack, pack.radius() + 2.0 * cfg.step_length);
    let chunks: Vec<ChunkOutput> = (0..cfg.n_walkers.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| run_chunk(&obstacles, pack.radius(), cfg, c))
        .collect::<Result<_>>()?;

    let mut sums = vec![CompensatedSum::default(); cfg.n_steps + 1];
    let mut displacements = Vec::with_capacity(cfg.n_walkers);
    let (mut reflections, mut discarded, mut min_clearance) = (0, 0, f64::INFINITY);
    for c in chunks {
        for (s, x) in sums.iter_mut().zip(&c.msd) {
            s.add(*x);
        }
        displacements.extend(c.displacements);
        reflections += c.reflections;
        discarded += c.discarded;
        min_clearance = min_clearance.min(c.min_clearance);
    }
    let msd: Vec<f64> = sums.iter().map(|s| s.value() / cfg.n_walkers as f64).collect();
    let d_eff_ratio = fit_slope(&msd, cfg.fit_window) / (cfg.step_length * cfg.step_length);
    let propagator_magnitude = cfg.q_samples.as_ref().map(|qs| {
        let qv: Vec<Vec3> = qs.iter().map(|q| Vec3::from(*q)).collect();
        propagator(&displacements, &qv)
            .into_iter()
            .zip(qs)
            .map(|(magnitude, q)| PropagatorPoint { q: *q, magnitude })
            .collect()
    });
    Ok(WalkResult {
        msd,
        d_eff_ratio,
        propagator_magnitude,
        n_reflections: reflections,
        n_discarded_steps: discarded,
        min_clearance,
        displacements,
    })
}

/// `|mean exp(i q·Δr)|` over the displacements, for each q.
pub fn propagator(displacements: &[Vec3], qs: &[Vec3]) -> Vec<f64> {
    qs.par_iter()
        .map(|q| {
            let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
            for d in displacements {
                let (s, c) = q.dot(d).sin_cos();
                re.add(c);
                im.add(s);
            }
            let n = displacements.len() as f64;
            (re.value() / n).hypot(im.value() / n)
        })
        .collect()
}

/// `count` evenly spaced wave-vectors from 0 to `q_max` along `axis`.
pub fn q_line(axis: Vec3, q_max: f64, count: usize) -> Vec<Vec3> {
    let u = axis.normalize();
    (0..count)
        .map(|i| u * q_max * i as f64 / (count.max(2) - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::generate_fcc_cell;

    fn small(seed: u64) -> WalkConfig {
        WalkConfig {
            step_length: 0.05,
            n_steps: 300,
            n_walkers: 300,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn walkers_stay_out_of_spheres() {
        let pack = generate_fcc_cell(1).unwrap();
        for reflection in [Reflection::Specular, Reflection::Reject] {
            let r = simulate(&pack, &WalkConfig { reflection, ..small(1) }).unwrap();
            assert!(r.min_clearance >= -1e-9, "{reflection:?}: {}", r.min_clearance);
            assert!(r.n_reflections > 0);
            assert!(r.d_eff_ratio > 0.0 && r.d_eff_ratio < 1.0);
        }
    }

    #[test]
    fn same_seed_same_result() {
        let pack = generate_fcc_cell(1).unwrap();
        let a = simulate(&pack, &small(9)).unwrap();
        let b = simulate(&pack, &small(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.displacements, b.displacements);
        let c = simulate(&pack, &small(10)).unwrap();
        assert_ne!(a.msd, c.msd);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let pack = generate_fcc_cell(2).unwrap();
        let cfg = WalkConfig { n_walkers: 700, n_steps: 50, ..small(4) };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&pack, &cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn larger_packs_match_the_unit_cell_statistically() {
        // The bin grid is only used once the box holds three bins per axis.
        let cfg = small(2);
        let one = simulate(&generate_fcc_cell(1).unwrap(), &cfg).unwrap();
        let three = simulate(&generate_fcc_cell(3).unwrap(), &cfg).unwrap();
        assert!(three.min_clearance >= -1e-9);
        assert!((one.d_eff_ratio - three.d_eff_ratio).abs() < 0.15);
    }

    #[test]
    fn free_space_msd_grows_linearly() {
        let pack = SpherePack::periodic(1.0, 2.0, vec![]).unwrap();
        let cfg = WalkConfig { n_walkers: 20_000, n_steps: 40, ..small(5) };
        let r = simulate(&pack, &cfg).unwrap();
        assert_eq!(r.n_reflections, 0);
        assert!((r.msd[1] - 0.0025).abs() < 1e-12);
        assert!((r.d_eff_ratio - 1.0).abs() < 0.03, "{}", r.d_eff_ratio);
    }

    #[test]
    fn bad_configs_rejected() {
        let pack = generate_fcc_cell(1).unwrap();
        for cfg in [
            WalkConfig { step_length: 0.2, ..small(0) },
            WalkConfig { step_length: 0.0, ..small(0) },
            WalkConfig { n_walkers: 0, ..small(0) },
            WalkConfig { fit_window: 0.0, ..small(0) },
        ] {
            assert!(matches!(simulate(&pack, &cfg), Err(Error::InvalidArgument(_))));
        }
        let finite = SpherePack::new(1.0, vec![Vec3::zeros()]).unwrap();
        assert!(simulate(&finite, &small(0)).is_err());
    }

    #[test]
    fn filled_cell_cannot_start() {
        // One sphere whose images overlap the whole box leaves no void.
        let pack = SpherePack::periodic(1.0, 0.5, vec![Vec3::zeros()]).unwrap();
        let cfg = WalkConfig { step_length: 0.01, ..small(0) };
        assert!(matches!(simulate(&pack, &cfg), Err(Error::Sampling(_))));
    }

    #[test]
    fn propagator_basics() {
        let d = vec![Vec3::new(0.3, -1.0, 2.0), Vec3::new(1.5, 0.2, 0.0)];
        assert_eq!(propagator(&d, &[]), Vec::<f64>::new());
        assert!((propagator(&d, &[Vec3::zeros()])[0] - 1.0).abs() < 1e-15);
        let q = Vec3::new(std::f64::consts::PI / 1.2, 0.0, 0.0);
        let both = propagator(&d, &[q])[0];
        assert!(both < 1.0 && both >= 0.0);
        let line = q_line(Vec3::x(), 2.0, 5);
        assert_eq!(line.len(), 5);
        assert_eq!(line[4], Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn slope_of_a_line() {
        let y: Vec<f64> = (0..=10).map(|k| 3.0 * k as f64 + 1.0).collect();
        assert!((fit_slope(&y, 0.5) - 3.0).abs() < 1e-12);
        assert!((fit_slope(&y, 1.0) - 3.0).abs() < 1e-12);
    }
}
