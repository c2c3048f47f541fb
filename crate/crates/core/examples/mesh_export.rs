//! Meshes both bodies at increasing depth and writes OBJ and STL files.
//!
//! ```text
//! cargo run --example mesh_export -- out_dir
//! ```

use std::path::PathBuf;

use ccp_voids::mesh::{export_obj, export_stl, mesh_body, quality};
use ccp_voids::regions::{BodyKind, VoidBody};

fn main() -> ccp_voids::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "meshes".into()));
    std::fs::create_dir_all(&dir).map_err(|e| ccp_voids::Error::Io { path: dir.clone(), source: e })?;

    for kind in [BodyKind::Stt, BodyKind::Sto] {
        let body = VoidBody::canonical(kind, 1.0)?;
        println!("{kind}");
        for depth in 0..=6 {
            let mesh = mesh_body(&body, depth)?;
            let q = quality(&mesh, &body)?;
            println!(
                "  depth {depth}: {:>6} triangles, area err {:.2e}, volume err {:.2e}, watertight {}",
                q.triangles, q.area_error, q.volume_error, q.is_watertight
            );
        }
        let mesh = mesh_body(&body, 4)?;
        export_obj(&mesh, &dir.join(format!("{kind}.obj")))?;
        export_stl(&mesh, &dir.join(format!("{kind}.stl")))?;
    }
    println!("wrote depth-4 meshes to {}", dir.display());
    Ok(())
}
