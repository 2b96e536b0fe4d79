//! Neuron-coupled finite-element membrane ("neuro-skin") and its trainer.

pub mod commands;
pub mod config;
pub mod error;
pub mod fe;
pub mod io;
pub mod lbfgsb;
pub mod mesh;
pub mod neuro;
pub mod objective;
pub mod simulation;

pub use error::{Error, Result};
