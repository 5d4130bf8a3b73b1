//! Discretization-error diagnostics built around Richardson extrapolation,
//! together with the numerical experiment families used to exercise them:
//! composite-trapezoid quadrature, point-mass exterior ballistics, a damped
//! ion trap with switching-function force truncation, and SHAKE-constrained
//! Newtonian dynamics.
//!
//! The central workflow is: run a family of simulations at halving step
//! sizes ([`extrapolation::SampleSweep`]), then ask [`extrapolation::diagnose`]
//! whether the data shows an asymptotic error expansion — and if so, with
//! what empirical order. The experiment modules exist to produce sweeps that
//! succeed (smooth problems, tight tolerances) and sweeps that fail in
//! instructive ways (discontinuous forces, sloppy inner solves).

pub mod atmosphere;
pub mod ballistics;
pub mod constrained_md;
pub mod dragmodel;
pub mod exec;
pub mod extrapolation;
pub mod integrators;
pub mod iontrap;
pub mod quadrature;
pub mod solvers;
pub mod sweep_io;
