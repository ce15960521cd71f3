//! Multivariate medians, median filters and the PDEs they approximate.
//!
//! The crate is organised bottom-up: geometric types and I/O, univariate
//! medians, multivariate medians, median filtering, reference PDE right-hand
//! sides, and the numerical consistency harness tying filters to PDEs.

pub mod config;
pub mod consistency;
pub mod error;
pub mod filtering;
pub mod geom;
pub mod hull;
pub mod image;
pub mod io;
pub mod maps;
pub mod medians;
pub mod pde;
pub mod univariate;

pub use error::{Error, Result};
pub use geom::{ConvexPolytope, MedianResult, PointN, Status, WeightedPointSet};
pub use hull::convex_hull_2d;
pub use image::ImageGrid;
pub use maps::{apply_projective, AffineMap, ProjectiveMap};
