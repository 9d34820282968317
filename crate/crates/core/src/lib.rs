pub mod linalg;
pub mod poly;
pub mod problem;
pub mod sets;
pub mod subproblem;
pub mod mmp;
pub mod diagnostics;
pub mod methods;
pub mod problems;
pub mod config;
pub mod runner;
