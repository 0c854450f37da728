//! Numerics for stochastic partly dissipative systems: a diffusive component coupled to a
//! non-diffusive one on `[0, pi]^n` with Dirichlet conditions, driven by additive trace-class
//! noise.
//!
//! The crate is organized around a conjugation trick: subtracting stationary
//! Ornstein-Uhlenbeck convolutions `z = (z1, z2)` of the driving noise turns the stochastic
//! system into a random PDE for `v = u - z` that can be stepped with deterministic exponential
//! integrators. Everything downstream (pullback contraction, absorbing radii, component
//! splitting) is built on three reproducibility contracts:
//!
//! * noise increments are pure functions of `(seed, channel, mode, step)`, so time shifts of
//!   the driving path are index arithmetic and ensembles are order-independent;
//! * OU states are anchored at the grid's earliest point and always advanced in `h_noise`
//!   substeps, so every route to a given time performs identical floating-point arithmetic;
//! * single trajectories are strictly sequential; parallelism only ever distributes whole
//!   trajectories.
//!
//! `no_std` builds (with `alloc`) are supported; disable the default `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod attractor;
pub mod error;
pub mod integrate;
pub mod models;
pub mod noise;
pub mod ou;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
