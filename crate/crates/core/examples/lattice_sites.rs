//! Finds the tetrahedral and octahedral holes of the 19-sphere array and of
//! periodic FCC boxes.

use ccp_voids::lattice::{
    find_hexamers, find_tetrads, generate_fcc_cell, generate_fig2_array, neighbourhood, tangency_graph,
    DEFAULT_TOL,
};

fn main() -> ccp_voids::Result<()> {
    let array = generate_fig2_array();
    let hood = neighbourhood(&array, 4, DEFAULT_TOL)?;
    println!(
        "19-sphere array, central sphere: {} contacts, {} tetrads, {} hexamers",
        hood.tangent.len(),
        hood.tetrads.len(),
        hood.hexamers.len()
    );
    for t in &hood.tetrads {
        let c = t.centroid();
        println!("  tetrad {:?} at ({:+.4}, {:+.4}, {:+.4})", t.sphere_indices, c.x, c.y, c.z);
    }

    for repeats in 1..=3 {
        let pack = generate_fcc_cell(repeats)?;
        let graph = tangency_graph(&pack, DEFAULT_TOL)?;
        println!(
            "FCC {repeats}³ cells: {} spheres, {} contacts, {} tetrads, {} hexamers, packing fraction {:.6}",
            pack.len(),
            graph.edges().len(),
            find_tetrads(&pack, &graph).len(),
            find_hexamers(&pack, &graph).len(),
            pack.volume_fraction().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
