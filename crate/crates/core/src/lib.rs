//! Void bodies of cubic close packing.
//!
//! Equal spheres in cubic close packing leave two kinds of hole. A tetrahedral
//! hole between four mutually tangent spheres is filled by the spherically
//! truncated tetrahedron (STT): the regular tetrahedron on their centres minus
//! the four spheres. An octahedral hole between six spheres is filled by the
//! spherically truncated octahedron (STO). Together with the spheres these
//! bodies tile space.
//!
//! - [`lattice`]: sphere packs, tangency graphs, tetrahedral and octahedral sites.
//! - [`regions`]: the bodies as implicit regions with a membership test.
//! - [`metrics`]: closed-form areas, volumes and densities.
//! - [`oracle`]: Monte Carlo estimates of the same quantities.
//! - [`tiling`]: assemblies of bodies and sampled partition checks.
//! - [`mesh`]: watertight triangle meshes and OBJ/STL output.
//! - [`walk`]: restricted diffusion in the pore space.
//! - [`cli`]: the `ccp-voids` command line.

pub mod cli;
pub mod error;
pub mod geom;
pub mod lattice;
pub mod mesh;
pub mod metrics;
pub mod oracle;
pub mod regions;
pub mod sampling;
pub mod tiling;
pub mod walk;

pub use error::{Error, Result};
