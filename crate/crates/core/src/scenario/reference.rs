//! The reference scenarios shipped in `configs/`, embedded at compile time.

use nalgebra::{dvector, DMatrix};

use super::config::ScenarioConfig;
use crate::model::LtvModel;

pub const EXAMPLE1_CFG: &str = include_str!("../../../../configs/example1.cfg");
pub const EXAMPLE2_CASE1_CFG: &str = include_str!("../../../../configs/example2_case1.cfg");
pub const EXAMPLE2_CASE2_CFG: &str = include_str!("../../../../configs/example2_case2.cfg");
pub const EXAMPLE2_CASE3_CFG: &str = include_str!("../../../../configs/example2_case3.cfg");

/// `(file name, contents)` of every reference config.
pub const ALL: [(&str, &str); 4] = [
    ("example1.cfg", EXAMPLE1_CFG),
    ("example2_case1.cfg", EXAMPLE2_CASE1_CFG),
    ("example2_case2.cfg", EXAMPLE2_CASE2_CFG),
    ("example2_case3.cfg", EXAMPLE2_CASE3_CFG),
];

fn parse(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(text).expect("reference config parses")
}

pub fn example1() -> ScenarioConfig {
    parse(EXAMPLE1_CFG)
}

pub fn example2_case1() -> ScenarioConfig {
    parse(EXAMPLE2_CASE1_CFG)
}

pub fn example2_case2() -> ScenarioConfig {
    parse(EXAMPLE2_CASE2_CFG)
}

pub fn example2_case3() -> ScenarioConfig {
    parse(EXAMPLE2_CASE3_CFG)
}

/// Two-state plant with full disturbance and fault channels.
pub fn example_model() -> LtvModel {
    LtvModel::time_invariant(
        DMatrix::from_row_slice(2, 2, &[-0.0005, -0.0084, 0.0517, 0.8069]),
        DMatrix::from_row_slice(2, 1, &[0.1815, 1.7902]),
        DMatrix::from_diagonal(&dvector![0.629, -0.52504]),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
        DMatrix::from_diagonal(&dvector![4.0e-6, 4.0e-6]),
        DMatrix::from_diagonal(&dvector![1.0e-4, 1.0e-4]),
    )
    .expect("reference model is valid")
}
