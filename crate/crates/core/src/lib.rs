pub mod adaptation;
pub mod cli;
pub mod demo;
pub mod macbeth;
pub mod model;
pub mod optim;
pub mod project;
pub mod scoring;
