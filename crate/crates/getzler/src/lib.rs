//! Exact-arithmetic toolkit for the heat-kernel proof of the equivariant index
//! theorem: graded algebras, equivariant forms, deformation to the normal cone,
//! Getzler rescaling, symbol calculus, the Mehler kernel, and a numerical check
//! of the Kirillov formula on the two-sphere.

pub mod dnc;
pub mod eqforms;
pub mod gradealg;
pub mod harness;
pub mod kirillov;
pub mod matrix;
pub mod mehler;
pub mod poly;
pub mod rescale;
pub mod scalar;
pub mod series;
pub mod symbols;
