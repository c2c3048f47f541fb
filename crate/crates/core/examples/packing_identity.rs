//! The corner excesses of the two holes around one sphere cover its whole
//! surface, which pins the CCP density at π/√18.

use std::f64::consts::PI;

use ccp_voids::metrics::{
    ccp_density, cell_volume_residual, octa_corner_excess, packing_identity_residual,
    tetra_corner_excess, volume_weighted_density, weighted_average_density,
};
use ccp_voids::oracle::cuboctahedron_projection_areas;

fn main() -> ccp_voids::Result<()> {
    let oct = octa_corner_excess();
    let tet = tetra_corner_excess();
    println!("octahedral corner  arccos(17/81) = {oct:.15}");
    println!("tetrahedral corner arccos(23/27) = {tet:.15}");
    println!("6·oct + 8·tet - 4π               = {:.3e}", packing_identity_residual());

    // The same split read off a cuboctahedron: project its faces from the
    // centre onto the circumsphere and measure each face by Girard's theorem.
    let p = cuboctahedron_projection_areas()?;
    println!("\nprojected cuboctahedron");
    println!("  square   {:.15} (x{})", p.square_area, p.square_areas.len());
    println!("  triangle {:.15} (x{})", p.triangle_area, p.triangle_areas.len());
    println!("  total    {:.15} (4π = {:.15})", p.total, 4.0 * PI);

    println!("\n(2φ_STO + φ_STT)/3   = {:.15}", weighted_average_density());
    println!("volume-weighted mean = {:.15}", volume_weighted_density());
    println!("π/√18                = {:.15}", ccp_density());
    println!("cell bookkeeping residual {:.3e}", cell_volume_residual());
    Ok(())
}
