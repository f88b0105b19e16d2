//! Exact-arithmetic toolkit for weighted inhomogeneous Diophantine
//! approximation: a Cantor potential game engine with certified legality
//! checking, lattice successive minima, Mahler-style transference checks,
//! fractal support measures, and curve nullity experiments.

pub mod adversary;
pub mod arith;
pub mod badeval;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod interval;
pub mod lattice;
pub mod mat;
pub mod measures;
pub mod nullity;
pub mod run;
pub mod strategy;
pub mod transference;

pub use error::{Error, Result};
