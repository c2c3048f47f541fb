//! Prints the closed-form areas, volumes and sector densities of both void
//! bodies for a chosen sphere radius.
//!
//! ```text
//! cargo run --example closed_forms -- 2.5
//! ```

use ccp_voids::metrics::{body_metrics, stt_sto_volume_ratio};
use ccp_voids::regions::BodyKind;

fn main() -> ccp_voids::Result<()> {
    let radius: f64 = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse()).unwrap_or(1.0);
    println!("sphere radius {radius}\n");
    println!("{:<5} {:>12} {:>12} {:>12} {:>12} {:>10}", "body", "area", "area/4πR²", "volume", "vol/(4πR³/3)", "φ");
    for kind in [BodyKind::Stt, BodyKind::Sto] {
        let m = body_metrics(kind, radius)?;
        println!(
            "{:<5} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>10.6}",
            kind.to_string(),
            m.surface_area,
            m.area_rel_sphere,
            m.volume,
            m.vol_rel_sphere,
            m.phi
        );
        println!("      spherical {:.6}, planar {:.6}", m.spherical_area, m.planar_area);
    }
    println!("\nV_STT / V_STO = {:.6} (independent of radius)", stt_sto_volume_ratio());
    Ok(())
}
