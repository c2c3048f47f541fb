//! Checks the closed forms against independent Monte Carlo estimates.
//!
//! Every estimate is reproducible from its seed and does not depend on the
//! number of rayon threads.

use ccp_voids::lattice::generate_fcc_cell;
use ccp_voids::metrics::{ccp_density, stt_metrics, sto_metrics};
use ccp_voids::oracle::{mc_cell_fractions, mc_planar_face_area, mc_spherical_patch_area, mc_volume, EstimateRow};
use ccp_voids::regions::VoidBody;
use ccp_voids::tiling::cell_tiling;

fn main() -> ccp_voids::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let seed = 1;
    let stt = VoidBody::canonical_stt(1.0)?;
    let sto = VoidBody::canonical_sto(1.0)?;
    let ms = stt_metrics(1.0)?;
    let mo = sto_metrics(1.0)?;

    let mut rows: Vec<EstimateRow> = vec![
        mc_volume(&stt, n, seed)?.row("STT volume", ms.volume),
        mc_volume(&sto, n, seed)?.row("STO volume", mo.volume),
        mc_spherical_patch_area(&stt, 0, n, seed)?.row("STT spherical patch", ms.spherical_area / 4.0),
        mc_spherical_patch_area(&sto, 0, n, seed)?.row("STO spherical patch", mo.spherical_area / 6.0),
        mc_planar_face_area(&stt, 0, n, seed)?.row("STT planar face", ms.planar_area / 4.0),
    ];

    let pack = generate_fcc_cell(1)?;
    let tiling = cell_tiling(&pack)?;
    let f = mc_cell_fractions(&pack, tiling.bodies(), n, seed)?;
    rows.push(f.estimate(f.sphere_frac).row("sphere fraction", ccp_density()));
    rows.push(f.estimate(f.stt_frac).row("STT fraction", 8.0 * ms.volume / tiling.domain_volume()));
    rows.push(f.estimate(f.sto_frac).row("STO fraction", 4.0 * mo.volume / tiling.domain_volume()));

    println!("{} samples per estimate, seed {seed}\n", n);
    println!("{:<22} {:>10} {:>10} {:>10} {:>7}", "quantity", "estimate", "std err", "exact", "z");
    for r in rows {
        println!("{:<22} {:>10.6} {:>10.6} {:>10.6} {:>+7.2}", r.quantity, r.value, r.std_error, r.closed_form, r.z_score);
    }
    Ok(())
}
