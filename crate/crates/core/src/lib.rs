pub mod dynamics;
pub mod engine;
pub mod measures;
pub mod network;
