//! Test-only oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

pub mod enumerate;
pub mod fixtures;
pub mod random_system;
