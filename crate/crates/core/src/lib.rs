//! Finite-scale computational topology: open Vietoris–Rips, Čech and
//! Vietoris complexes, exact 1-Wasserstein geometry of finitely supported
//! measures, metric-thickening covers, Freudenthal–Kuhn triangulations,
//! simplexwise straightening of sampled maps, and ℤ/2 persistent homology.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod complex;
pub mod fk;
pub mod io;
pub mod measure;
pub mod metric;
pub mod oracle;
pub mod persistence;
pub mod straighten;
pub mod thickening;
pub mod transport;
pub mod verify;

pub use complex::{build_cech, build_vietoris, build_vr, FilteredComplex, RealizationPoint, Simplex};
pub use fk::{FkSimplex, FkTriangulation};
pub use measure::{barycentric_distance, common_mass_coupling, convex_combine, Coupling, FiniteMeasure};
pub use metric::{Cover, FiniteMetricSpace, PointSet};
pub use persistence::{betti_at, compute_diagram, diagram_distance, Interval, PersistenceDiagram};
pub use straighten::{straighten, StraightenConfig};
pub use transport::wasserstein;
