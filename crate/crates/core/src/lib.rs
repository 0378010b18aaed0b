pub mod cli;
pub mod config;
pub mod error;
pub mod exprlang;
pub mod geometry;
pub mod moments;
pub mod residue;
pub mod symbols;
