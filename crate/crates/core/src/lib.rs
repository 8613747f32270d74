//! Embodied cafe-robot stack: a deterministic simulated cafe with synthetic
//! RGB-D/segmentation sensing, a multimodal environment memory built from
//! fused observations, an atomic skill layer, pluggable text planners, an
//! embodied question-answering dataset generator, and evaluation harnesses.

pub mod eqa;
pub mod eval;
pub mod geometry;
pub mod mem;
pub mod simworld;
pub mod planner;
pub mod skills;
pub mod tasks;
pub mod util;

pub use geometry::Vec3;
