//! Singular de-Sitter tori built from lightlike polygon gluings.
//!
//! The library models the de-Sitter plane as RP^1 x RP^1 minus the diagonal,
//! builds tori by identifying edges of lightlike polygons through PSL(2, R)
//! elements, and studies the resulting structures through vertex holonomies,
//! cone angles, first-return dynamics on closed loops, rotation numbers and
//! realization solvers for prescribed rotation data.

pub mod desitter;
pub mod error;
pub mod hiet;
pub mod moebius;

pub use desitter::{DSPoint, LShapedPolygon, LightlikeRectangle};
pub use hiet::{CircleMap, Hiet, OneSingFamilyX, TwoSingFamilyXY};
pub use error::{Error, Result};
pub use moebius::{cross_ratio, cyclic_order, CyclicOrder, MapClass, MoebiusMap, ProjectivePoint};
