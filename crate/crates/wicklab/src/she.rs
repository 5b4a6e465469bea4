//! Exact stationary sampling of the Galerkin-truncated stochastic heat
//! equation on the torus, its Wick powers, and closed-form covariance
//! oracles.
//!
//! Each Fourier mode `a_m(t) = <Z(t), e_m>` is an Ornstein-Uhlenbeck process
//! with rate `mu_m = 1 + 4 pi^2 |m|^2` and stationary variance
//! `E|a_m|^2 = 1/(2 mu_m)`; the real-field convention `a_{-m} = conj(a_m)`
//! makes the synthesized field real. Time stepping uses the exact OU
//! transition, so Monte Carlo error is the only error source anywhere in the
//! module.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fourier::{mu, synthesize, FourierError, GridField, SpectralField};
use crate::hermite::hermite_eval_all;
use crate::kernels::{heat_kernel, star_power};
use crate::numeric::factorial;

/// Renormalization constant `R_n = E[Z_n(t,x)^2] = sum_{|m|<=n} 1/(2 mu_m)`.
pub fn variance_r(n: i32) -> f64 {
    let mut acc = 0.0;
    for m1 in -n..=n {
        for m2 in -n..=n {
            if m1 * m1 + m2 * m2 <= n * n {
                acc += 0.5 / mu((m1, m2));
            }
        }
    }
    acc
}

/// Stationary covariance `E[Z_n(t,0) Z_n(t,x)] = sum_{|m|<=n} cos(2 pi m.x) / (2 mu_m)`.
pub fn covariance_c(n: i32, x: (f64, f64)) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = 0.0;
    for m1 in -n..=n {
        for m2 in -n..=n {
            if m1 * m1 + m2 * m2 <= n * n {
                let phase = two_pi * (f64::from(m1) * x.0 + f64::from(m2) * x.1);
                acc += phase.cos() / (2.0 * mu((m1, m2)));
            }
        }
    }
    acc
}

/// Spectral covariance of Wick powers:
/// `E[<Z_n^{:k:}(t), e_p> conj(<Z_n^{:k:}(t+dt), e_p>)] = k! (K_n(dt))^{⋆k}(p)`.
///
/// The `k!` symmetrization factor is pinned by the exhaustive Isserlis oracle
/// in the test suite before anything else relies on this formula.
pub fn wick_mode_covariance(n: i32, k: usize, dt: f64, p: (i32, i32)) -> f64 {
    assert!(k >= 1);
    factorial(k) * star_power(&heat_kernel(dt, n), k).get(p)
}

/// Per-mode Ornstein-Uhlenbeck state of the truncated stationary solution.
///
/// Single-owner mutable state: replicas are independent ensembles with seeds
/// derived from a master seed (see [`crate::mc::derive_seed`]), so parallel
/// sweeps stay reproducible regardless of scheduling.
#[derive(Debug, Clone)]
pub struct OUEnsemble {
    n: i32,
    t: f64,
    seed: u64,
    field: SpectralField,
    rng: ChaCha12Rng,
}

/// Canonical half-lattice order: modes are visited with `m1` ascending and
/// `m2` ascending within each `m1`, keeping only `m1 > 0 || (m1 == 0 && m2 >= 0)`;
/// the draw order is part of the determinism contract.
fn canonical_modes(n: i32) -> impl Iterator<Item = (i32, i32)> {
    (0..=n).flat_map(move |m1| {
        (-n..=n).filter_map(move |m2| {
            if m1 == 0 && m2 < 0 {
                return None;
            }
            if m1 * m1 + m2 * m2 > n * n {
                return None;
            }
            Some((m1, m2))
        })
    })
}

/// Draws the stationary law at time 0: independent mode pairs `(m, -m)` with
/// `E|a_m|^2 = 1/(2 mu_m)`, `a_0` real with variance `1/2`.
pub fn stationary_sample(n: i32, seed: u64) -> OUEnsemble {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut field = SpectralField::zero(n, false);
    for m in canonical_modes(n) {
        let variance = 0.5 / mu(m);
        if m == (0, 0) {
            let g: f64 = normal.sample(&mut rng);
            field.set(m, Complex64::new(g * variance.sqrt(), 0.0));
        } else {
            let g1: f64 = normal.sample(&mut rng);
            let g2: f64 = normal.sample(&mut rng);
            let a = Complex64::new(g1, g2) * (variance / 2.0).sqrt();
            field.set(m, a);
            field.set((-m.0, -m.1), a.conj());
        }
    }
    let field = field.into_hermitian();
    OUEnsemble {
        n,
        t: 0.0,
        seed,
        field,
        rng,
    }
}

impl OUEnsemble {
    pub fn truncation(&self) -> i32 {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn mode(&self, m: (i32, i32)) -> Complex64 {
        self.field.get(m)
    }

    /// Exact OU transition over `dt > 0`:
    /// `a_m <- e^{-mu_m dt} a_m + eta_m` with
    /// `E|eta_m|^2 = (1 - e^{-2 mu_m dt})/(2 mu_m)`. The stationary law is
    /// invariant under this step.
    pub fn evolve(&mut self, dt: f64) {
        assert!(dt > 0.0, "evolve needs a positive time step");
        let normal = StandardNormal;
        for m in canonical_modes(self.n) {
            let rate = mu(m);
            let decay = (-rate * dt).exp();
            let noise_var = (1.0 - decay * decay) / (2.0 * rate);
            let old = self.field.get(m);
            if m == (0, 0) {
                let g: f64 = normal.sample(&mut self.rng);
                self.field
                    .set(m, Complex64::new(old.re * decay + g * noise_var.sqrt(), 0.0));
            } else {
                let g1: f64 = normal.sample(&mut self.rng);
                let g2: f64 = normal.sample(&mut self.rng);
                let eta = Complex64::new(g1, g2) * (noise_var / 2.0).sqrt();
                let new = old * decay + eta;
                self.field.set(m, new);
                self.field.set((-m.0, -m.1), new.conj());
            }
        }
        self.t += dt;
    }
}

/// Indexed family `k -> Z_n^{:k:}(t)` of Wick powers at a fixed time,
/// realized on a shared grid. `members[0]` is identically 1 and
/// `members[1]` is the field itself.
#[derive(Debug, Clone)]
pub struct WickFamily {
    pub kmax: usize,
    pub n: i32,
    /// Renormalization constant used inside the Hermite evaluation.
    pub r: f64,
    pub members: Vec<GridField>,
}

impl WickFamily {
    /// Builds a family from arbitrary real member grids (used by shift maps).
    pub fn from_members(n: i32, r: f64, members: Vec<GridField>) -> Self {
        assert!(!members.is_empty());
        let p = members[0].resolution();
        assert!(members.iter().all(|m| m.resolution() == p));
        Self {
            kmax: members.len() - 1,
            n,
            r,
            members,
        }
    }

    pub fn resolution(&self) -> usize {
        self.members[0].resolution()
    }

    /// Fourier coefficient `<member_k, e_p>` by direct grid quadrature,
    /// exact for `P > 2 k n`.
    pub fn mode_coefficient(&self, k: usize, p: (i32, i32)) -> Complex64 {
        let grid = &self.members[k];
        let res = grid.resolution();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..res {
            for j in 0..res {
                let phase = -two_pi * (f64::from(p.0) * i as f64 + f64::from(p.1) * j as f64)
                    / res as f64;
                acc += grid.at(i, j) * Complex64::new(phase.cos(), phase.sin());
            }
        }
        acc / (res * res) as f64
    }
}

/// Wick powers `Z_n^{:k:} = H_k(Z_n, R_n)` for `k = 0..=kmax`, evaluated
/// pointwise on a `P x P` grid. Requires `P > 2 kmax n` so that the order-k
/// members stay alias-free under spectral analysis at radius `k n`.
pub fn wick_powers(state: &OUEnsemble, kmax: usize, p: usize) -> Result<WickFamily, FourierError> {
    let needed = 2 * kmax.max(1) * state.n.unsigned_abs() as usize;
    if p <= needed {
        return Err(FourierError::ResolutionTooSmall { p, n: state.n });
    }
    let r = variance_r(state.n);
    let grid = synthesize(&state.field, p)?;
    let z = grid.real_values();
    let mut layers: Vec<Vec<f64>> = vec![Vec::with_capacity(z.len()); kmax + 1];
    for &value in &z {
        let h = hermite_eval_all(kmax, value, r);
        for (k, hk) in h.into_iter().enumerate() {
            layers[k].push(hk);
        }
    }
    let members = layers
        .into_iter()
        .map(|vals| GridField::from_real(vals, p))
        .collect();
    Ok(WickFamily {
        kmax,
        n: state.n,
        r,
        members,
    })
}
