pub mod attention;
pub mod demo;
pub mod driver;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod task;
pub mod vehicle;
