//! Surrounds one sphere with its 6 STOs and 8 STTs, samples the assembly for
//! gaps and overlaps, then removes one STT to show the hole it leaves.

use ccp_voids::lattice::{generate_fcc_cell, generate_fig2_array};
use ccp_voids::metrics::stt_metrics;
use ccp_voids::regions::{BodyKind, DEFAULT_EPS};
use ccp_voids::tiling::{cell_tiling, enclose_sphere, opposing_stt_pairs, quarter_turn_axis, verify_partition};

fn main() -> ccp_voids::Result<()> {
    let array = generate_fig2_array();
    let assembly = enclose_sphere(&array, 4)?;
    println!(
        "enclosure: {} STO + {} STT",
        assembly.count(BodyKind::Sto),
        assembly.count(BodyKind::Stt)
    );
    let r = verify_partition(&assembly, 500_000, 7, DEFAULT_EPS)?;
    println!(
        "  {} samples: overlaps {}, gaps {}, boundary band {}, sphere/STT/STO {}/{}/{}",
        r.n_samples, r.overlaps, r.gaps, r.boundary, r.sphere_points, r.stt_points, r.sto_points
    );

    let centre = array.centers()[4];
    for (a, b) in opposing_stt_pairs(&assembly, &centre) {
        let axis = quarter_turn_axis(&assembly.bodies()[a], &assembly.bodies()[b]);
        println!("  STT {a} and {b} are a quarter turn apart about {:?}", axis.map(|v| [v.x, v.y, v.z]));
    }

    let pack = generate_fcc_cell(1)?;
    let full = cell_tiling(&pack)?;
    let mut bodies = full.bodies().to_vec();
    let first_stt = bodies.iter().position(|b| b.kind() == BodyKind::Stt).unwrap();
    bodies.remove(first_stt);
    let holed = full.with_bodies(bodies)?;
    let r = verify_partition(&holed, 1_000_000, 7, DEFAULT_EPS)?;
    println!(
        "\nperiodic cell without one STT: gap fraction {:.6}, expected V_STT/cell = {:.6}",
        r.gap_fraction(),
        stt_metrics(1.0)?.volume / full.domain_volume()
    );
    Ok(())
}
