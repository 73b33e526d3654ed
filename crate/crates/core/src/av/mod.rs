//! Autonomous-vehicle building blocks: analytic lateral control, simulated
//! longitudinal brake control, and catalogue-backed hardware blocks.

pub mod blocks;
pub mod lateral;
pub mod longitudinal;
