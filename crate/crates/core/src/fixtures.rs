//! Bundled example models.

use crate::model::{load_model, ArchitectureModel};

/// Two components, two units, one resource; small enough to expand the cost
/// by hand.
pub const E1_JSON: &str = include_str!("../fixtures/e1.json");

/// Autonomous underwater vehicle: 11 components on a multicore CPU, a GPU and
/// an FPGA. Values are synthetic and chosen so that the optimum is unique.
pub const AUV_JSON: &str = include_str!("../fixtures/auv.json");

pub fn e1() -> ArchitectureModel {
    load_model(E1_JSON.as_bytes()).expect("bundled E1 fixture is valid")
}

pub fn auv() -> ArchitectureModel {
    load_model(AUV_JSON.as_bytes()).expect("bundled AUV fixture is valid")
}
