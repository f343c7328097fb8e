pub mod cli;
pub mod config;
pub mod feeder;
pub mod model;
pub mod report;
pub mod scenario;
pub mod scheduler;
pub mod synth;
