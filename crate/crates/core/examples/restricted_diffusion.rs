//! Random walk in the pore space of an FCC pack: tortuosity from the MSD
//! slope, and the propagator along a cubic axis and along a body diagonal.
//!
//! Along [111] the pore space has a strong density wave at |q| = 2π√3/a, and
//! the propagator shows a diffraction peak there. Along [100] the first
//! allowed wave (q = 4π/a) almost coincides with a zero of the sphere form
//! factor, so nothing rises above the sampling noise.

use std::f64::consts::SQRT_2;

use ccp_voids::geom::Vec3;
use ccp_voids::lattice::{generate_fcc_cell, SpherePack};
use ccp_voids::walk::{propagator, q_line, simulate, WalkConfig};

fn main() -> ccp_voids::Result<()> {
    let pack = generate_fcc_cell(1)?;
    let cfg = WalkConfig { step_length: 0.01, n_steps: 10_000, n_walkers: 1_000, seed: 3, ..Default::default() };
    let r = simulate(&pack, &cfg)?;
    println!(
        "FCC pore space: d_eff = {:.4}, {} reflections, {} abandoned steps, min clearance {:.1e}",
        r.d_eff_ratio, r.n_reflections, r.n_discarded_steps, r.min_clearance
    );

    let empty = SpherePack::periodic(1.0, pack.cell_edge().unwrap(), vec![])?;
    let free = simulate(&empty, &WalkConfig { n_steps: 100, n_walkers: 50_000, ..cfg.clone() })?;
    println!("free space:     d_eff = {:.4}", free.d_eff_ratio);

    let long = WalkConfig { step_length: 0.1, n_steps: 4_000, n_walkers: 20_000, ..cfg };
    let r = simulate(&pack, &long)?;
    let a = 2.0 * SQRT_2;
    println!("\n|E(q)| after {} steps of {}; noise floor ≈ {:.4}", long.n_steps, long.step_length, 1.0 / (long.n_walkers as f64).sqrt());
    for (name, axis) in [("[100]", Vec3::x()), ("[111]", Vec3::new(1.0, 1.0, 1.0))] {
        let qs = q_line(axis, 4.0 * std::f64::consts::PI / a, 21);
        let e = propagator(&r.displacements, &qs);
        let line: Vec<String> = qs.iter().zip(&e).map(|(q, v)| format!("{:.2}:{v:.3}", q.norm())).collect();
        println!("{name} {}", line.join(" "));
    }
    Ok(())
}
