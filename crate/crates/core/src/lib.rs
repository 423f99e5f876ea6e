pub mod analysis;
pub mod catalog;
pub mod lp;
pub mod model;
pub mod runner;
pub mod solver;
