//! Numerical core for the heat equation in the exterior of the unit ball
//! with the dynamical boundary condition `∂_t u + ∂_ν u = 0`.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic
//! piece: the Poisson/Kelvin kernel calculus, spherical quadrature, the
//! radial Dirichlet heat semigroup, the limit semigroup and its forcing,
//! the direct stiff solver, the Duhamel fixed-point solver, the
//! lower-bound constructions and the auxiliary estimate checks.
//!
//! Orientation: the exterior normal of `Ω = {|x| > 1}` on the unit sphere
//! points toward the origin, so `∂_ν = -∂_r` and the radial boundary law
//! reads `du_b/dt = ∂_r u(1, t)`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dynbc;
mod error;
pub mod fit;
pub mod kernels;
pub mod limit;
pub mod lower_bound;
pub mod numerics;
pub mod picard;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
