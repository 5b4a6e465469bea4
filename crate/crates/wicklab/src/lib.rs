//! wicklab: a pseudo-spectral laboratory for Wick calculus on the 2-torus.
//!
//! The crate simulates the stationary solution of the additive stochastic heat
//! equation on `T^2 = R^2/Z^2` through its Fourier modes, builds its Wick
//! powers by Hermite renormalization, measures everything in Besov/Sobolev
//! norms via Littlewood-Paley blocks, and cross-checks the results against
//! exact lattice-convolution identities and Monte Carlo.
//!
//! Main entry points:
//!
//! - [`hermite`]: real and complex Hermite polynomials, basis conversions.
//! - [`fourier`]: truncated Fourier series <-> torus grids, aliasing-safe products.
//! - [`besov`]: dyadic block decomposition, Besov/Hölder/Sobolev norms, Bony paraproducts.
//! - [`she`]: stationary Ornstein-Uhlenbeck mode ensembles, Wick powers, covariance oracles.
//! - [`kernels`]: the `⋆`-convolution algebra on `Z^2` and its decay bounds.
//! - [`support`]: moment-matched profiles, shift functions, shifted-driver demonstrations.
//! - [`gmc`]: Gaussian free field, Wick exponentials, second-moment series.
//! - [`cli`]: reproducible command-line runs with manifests and CSV output.
//!
//! Every runnable capability also ships as an example under `examples/`.

pub mod besov;
pub mod cli;
pub mod fourier;
pub mod gmc;
pub mod hermite;
pub mod kernels;
pub mod mc;
pub mod numeric;
pub mod she;
pub mod support;
