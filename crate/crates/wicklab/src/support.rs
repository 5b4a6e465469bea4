//! Constructive support-theorem machinery: smooth profiles with prescribed
//! moments, the slowly-growing frequency scales `l_n`, shift fields `h_n`,
//! the binomial shift operator `T_h` on Wick families, and the shifted-driver
//! convergence demonstration.

use num_complex::Complex64;
use thiserror::Error;

use crate::besov::{c1_norm, holder_norm, BesovError};
use crate::fourier::{
    analyze, good_resolution, mu, project, synthesize, FourierError, GridField, SpectralField,
};
use crate::hermite::{hermite_eval, hermite_eval_all};
use crate::numeric::{binomial, double_factorial, solve_dense};
use crate::she::{variance_r, wick_powers, OUEnsemble, WickFamily};

#[derive(Debug, Error)]
pub enum SupportError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("shift index must satisfy n >= 3 (log log n > 0), got {0}")]
    IndexTooSmall(usize),
    #[error("moment matching stalled at residual {residual:e} (target {target:e})")]
    NoConvergence { residual: f64, target: f64 },
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Besov(#[from] BesovError),
}

/// Numerical quadratures for the explicit moment identities behind the
/// profile construction.
pub mod quad {
    use crate::numeric::gauss_laguerre;

    /// `int_0^1 (2 log(1/x))^k dx`, via `x = e^{-y}` and Gauss-Laguerre
    /// (exact for polynomial integrands, so exact here). Equals `(2k)!!`.
    pub fn log_power_integral(k: usize) -> f64 {
        let (nodes, weights) = gauss_laguerre(32);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&y, &w)| w * (2.0 * y).powi(k as i32))
            .sum()
    }

    /// `int_0^1 cos^k(pi x) dx` by the composite trapezoid rule; even powers
    /// are band-limited and periodic, so the rule is exact to roundoff.
    /// Equals `(k-1)!!/k!!` for even `k` and `0` for odd `k`.
    pub fn cos_power_integral(k: usize) -> f64 {
        let p = 512usize;
        let h = 1.0 / p as f64;
        let f = |x: f64| (std::f64::consts::PI * x).cos().powi(k as i32);
        let mut acc = 0.5 * (f(0.0) + f(1.0));
        for i in 1..p {
            acc += f(i as f64 * h);
        }
        acc * h
    }
}

/// Samples the damped profile
/// `g(a, x) = sqrt(2 log(1/x1)) cos(pi x2) exp(-a^2 (x1^{-1/2} + (1-x1)^{-1/2} + x2^{-1/2} + (1-x2)^{-1/2}))`
/// on the `P x P` torus grid. The removable boundary values (grid lines
/// `x1 = 0` or `x2 = 0`, where the damping wins against the log) are set
/// to 0.
pub fn base_profile(a: f64, p: usize) -> Result<GridField, SupportError> {
    if !(0.0 < a && a < 1.0) {
        return Err(SupportError::Domain(format!(
            "smoothing parameter must lie in (0,1), got {a}"
        )));
    }
    let mut values = vec![0.0f64; p * p];
    for i in 1..p {
        let x1 = i as f64 / p as f64;
        let log_part = (2.0 * (1.0 / x1).ln()).max(0.0).sqrt();
        let damp1 = x1.powf(-0.5) + (1.0 - x1).powf(-0.5);
        for j in 1..p {
            let x2 = j as f64 / p as f64;
            let damp = (-a * a * (damp1 + x2.powf(-0.5) + (1.0 - x2).powf(-0.5))).exp();
            values[i * p + j] = log_part * (std::f64::consts::PI * x2).cos() * damp;
        }
    }
    Ok(GridField::from_real(values, p))
}

/// Moment targets `b_k` for `k = 1..=2N` (vector index `k-1`): zero for odd
/// `k`, `(k-1)!!` for even `k`, so that `int f^{2j} = (2j-1)!!` as the Wick
/// cancellation requires.
pub fn moment_targets(n_order: usize) -> Vec<f64> {
    (1..=2 * n_order)
        .map(|k| {
            if k % 2 == 1 {
                0.0
            } else {
                double_factorial(k as i64 - 1)
            }
        })
        .collect()
}

/// A profile `f` (band-limited to radius 32) with
/// `int H_k(f) = 0` for `k = 1..=2N`.
#[derive(Debug, Clone)]
pub struct MomentProfile {
    /// Band-limited representation of the profile.
    pub field: SpectralField,
    /// Order `N`: controls which Hermite moments vanish.
    pub order: usize,
    /// Solved parameter vector `(a_0, a_1, ..., a_{2N})`.
    pub coefficients: Vec<f64>,
    /// `|int H_k(f)|` for `k = 1..=2N`, measured at 4x quadrature resolution.
    pub residuals: Vec<f64>,
}

/// Spectral radius of the delivered profile.
pub const PROFILE_RADIUS: i32 = 32;

struct NewtonSetup {
    p: usize,
    base_spec: SpectralField,
    base_grid: Vec<f64>,
    /// Correction directions, band-limited to the profile radius.
    basis_specs: Vec<SpectralField>,
    basis_grids: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl NewtonSetup {
    fn field_for(&self, a: &[f64]) -> SpectralField {
        let mut acc = self.base_spec.clone();
        for (phi, &ai) in self.basis_specs.iter().zip(a) {
            if ai != 0.0 {
                acc = acc.add(&phi.scaled(ai));
            }
        }
        acc
    }

    fn grid_for(&self, a: &[f64]) -> Vec<f64> {
        let mut out = self.base_grid.clone();
        for (phi, &ai) in self.basis_grids.iter().zip(a) {
            if ai != 0.0 {
                for (o, &v) in out.iter_mut().zip(phi) {
                    *o += ai * v;
                }
            }
        }
        out
    }

    /// `F_k(a) = mean(h^k) - b_k`, exact on the band-limited representation.
    fn residual(&self, h: &[f64]) -> Vec<f64> {
        let dim = self.targets.len();
        let mut sums = vec![0.0f64; dim];
        for &v in h {
            let mut pw = v;
            for s in sums.iter_mut() {
                *s += pw;
                pw *= v;
            }
        }
        let inv = 1.0 / h.len() as f64;
        sums.iter()
            .zip(&self.targets)
            .map(|(s, b)| s * inv - b)
            .collect()
    }

    /// `J_ki = k * mean(h^{k-1} phi_i)`.
    fn jacobian(&self, h: &[f64]) -> Vec<f64> {
        let dim = self.targets.len();
        let mut j = vec![0.0f64; dim * dim];
        let inv = 1.0 / h.len() as f64;
        for (i, phi) in self.basis_grids.iter().enumerate() {
            let mut sums = vec![0.0f64; dim];
            for (&v, &w) in h.iter().zip(phi) {
                let mut pw = w; // h^0 * phi
                for s in sums.iter_mut() {
                    *s += pw;
                    pw *= v;
                }
            }
            for k in 0..dim {
                j[k * dim + i] = (k + 1) as f64 * sums[k] * inv;
            }
        }
        j
    }
}

fn newton_setup(n_order: usize, a0: f64) -> Result<NewtonSetup, SupportError> {
    if n_order == 0 || n_order > 4 {
        return Err(SupportError::Domain(format!(
            "moment order must lie in 1..=4, got {n_order}"
        )));
    }
    if !(0.0 < a0 && a0 <= 0.05) {
        return Err(SupportError::Domain(format!(
            "smoothing parameter a0 must lie in (0, 0.05], got {a0}"
        )));
    }
    let dim = 2 * n_order;
    // resolution comfortably above twice the bandwidth of f^{2N}
    let p = good_resolution((256 * n_order + 30).max(512));
    let raw = base_profile(a0, p)?;
    let base_spec = analyze(&raw, PROFILE_RADIUS)?.into_hermitian();
    let base_grid = synthesize(&base_spec, p)?.real_values();

    // candidate directions w_k = Pi_32[k g^{k-1}]; the dual basis of their
    // Gram matrix makes the starting Jacobian the identity
    let mut candidates = Vec::with_capacity(dim);
    for k in 1..=dim {
        let vals: Vec<f64> = base_grid
            .iter()
            .map(|&v| k as f64 * v.powi(k as i32 - 1))
            .collect();
        let w = analyze(&GridField::from_real(vals, p), PROFILE_RADIUS)?.into_hermitian();
        candidates.push(w);
    }
    // Gram in normalized form for conditioning
    let norms: Vec<f64> = candidates.iter().map(|w| w.coeff_energy().sqrt()).collect();
    let mut dual_coeffs = vec![vec![0.0f64; dim]; dim];
    for i in 0..dim {
        let mut gram = vec![0.0f64; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut dot = 0.0;
                for (m, v) in candidates[r].iter() {
                    dot += (v * candidates[c].get(m).conj()).re;
                }
                gram[r * dim + c] = dot / (norms[r] * norms[c]);
            }
        }
        let mut rhs = vec![0.0f64; dim];
        rhs[i] = 1.0 / norms[i];
        let sol = solve_dense(&mut gram, &mut rhs, dim).ok_or_else(|| SupportError::Domain(
            "profile candidate directions are numerically dependent".into(),
        ))?;
        for (r, &s) in sol.iter().enumerate() {
            dual_coeffs[i][r] = s / norms[r];
        }
    }
    let mut basis_specs = Vec::with_capacity(dim);
    let mut basis_grids = Vec::with_capacity(dim);
    for coeffs in &dual_coeffs {
        let mut phi = SpectralField::zero(PROFILE_RADIUS, true);
        for (w, &c) in candidates.iter().zip(coeffs) {
            if c != 0.0 {
                phi = phi.add(&w.scaled(c));
            }
        }
        basis_grids.push(synthesize(&phi, p)?.real_values());
        basis_specs.push(phi);
    }
    Ok(NewtonSetup {
        p,
        base_spec,
        base_grid,
        basis_specs,
        basis_grids,
        targets: moment_targets(n_order),
    })
}

fn hermite_residuals(field: &SpectralField, p: usize, orders: usize) -> Vec<f64> {
    let grid = synthesize(field, p).expect("resolution checked by caller");
    let len = (p * p) as f64;
    let mut sums = vec![0.0f64; orders + 1];
    for v in grid.values() {
        let h = hermite_eval_all(orders, v.re, 1.0);
        for (s, hv) in sums.iter_mut().zip(&h) {
            *s += hv;
        }
    }
    (1..=orders).map(|k| (sums[k] / len).abs()).collect()
}

/// Damped-Newton moment matching: finds `f = g(a_0) + sum a_i phi_i`
/// (band-limited to radius 32) with `max_{1<=k<=2N} |int H_k(f)| <= tol`,
/// verified by an independent quadrature at four times the solver
/// resolution.
pub fn match_moments(
    n_order: usize,
    a0: f64,
    tol: f64,
) -> Result<MomentProfile, SupportError> {
    let setup = newton_setup(n_order, a0)?;
    let dim = 2 * n_order;
    // Hermite coefficients amplify power-moment errors by at most their l^1
    // norm, so drive the power system well below the requested tolerance.
    let amplification: f64 = (1..=dim)
        .map(|k| {
            crate::hermite::hermite_inverse_coeffs(k, 1.0)
                .iter()
                .map(|c| c.abs())
                .sum::<f64>()
        })
        .fold(1.0, f64::max);
    let inner_tol = (tol / (4.0 * amplification)).max(1e-13);

    let mut a = vec![0.0f64; dim];
    let mut h = setup.grid_for(&a);
    let mut f = setup.residual(&h);
    let norm_inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut best = norm_inf(&f);
    for _ in 0..80 {
        if best <= inner_tol {
            break;
        }
        let mut jac = setup.jacobian(&h);
        let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let step = solve_dense(&mut jac, &mut rhs, dim).ok_or(SupportError::NoConvergence {
            residual: best,
            target: inner_tol,
        })?;
        let mut lambda = 1.0f64;
        let mut advanced = false;
        while lambda >= 1.0 / 64.0 {
            let trial: Vec<f64> = a
                .iter()
                .zip(&step)
                .map(|(&ai, &di)| ai + lambda * di)
                .collect();
            let trial_h = setup.grid_for(&trial);
            let trial_f = setup.residual(&trial_h);
            let trial_norm = norm_inf(&trial_f);
            if trial_norm < (1.0 - 0.5 * lambda) * best || trial_norm <= inner_tol {
                a = trial;
                h = trial_h;
                f = trial_f;
                best = trial_norm;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            return Err(SupportError::NoConvergence {
                residual: best,
                target: inner_tol,
            });
        }
    }
    if best > inner_tol {
        return Err(SupportError::NoConvergence {
            residual: best,
            target: inner_tol,
        });
    }

    let field = setup.field_for(&a);
    // independent verification at 4x the solver resolution
    let residuals = hermite_residuals(&field, good_resolution(4 * setup.p), dim);
    let worst = residuals.iter().fold(0.0f64, |m, &x| m.max(x));
    if worst > tol {
        return Err(SupportError::NoConvergence {
            residual: worst,
            target: tol,
        });
    }
    let mut coefficients = Vec::with_capacity(dim + 1);
    coefficients.push(a0);
    coefficients.extend_from_slice(&a);
    Ok(MomentProfile {
        field,
        order: n_order,
        coefficients,
        residuals,
    })
}

/// Frequency scale `l_n = floor((log n)^{log log n})`, floored at 1.
/// Natural logarithms; needs `n >= 3` so that `log log n > 0`.
pub fn frequency_scale(n: usize) -> Result<u32, SupportError> {
    if n < 3 {
        return Err(SupportError::IndexTooSmall(n));
    }
    let ln = (n as f64).ln();
    Ok((ln.powf(ln.ln()).floor() as u32).max(1))
}

/// The shift field
/// `h_n(t) = sqrt(C_n) sum_m a_m (1 - e^{-lambda_{n,m}(t+1)}) e_{l_n m}`
/// with `lambda_{n,m} = 1 + 4 pi^2 l_n^2 |m|^2` and `a_m` the coefficients
/// of the base profile.
pub fn build_shift(
    n: usize,
    c_n: f64,
    base: &MomentProfile,
    t: f64,
) -> Result<SpectralField, SupportError> {
    if c_n < 0.0 {
        return Err(SupportError::Domain(format!(
            "variance budget must be nonnegative, got {c_n}"
        )));
    }
    let l = frequency_scale(n)? as i32;
    let amp = c_n.sqrt();
    let mut out = SpectralField::zero(base.field.radius() * l, true);
    if c_n == 0.0 {
        return Ok(out);
    }
    for (m, v) in base.field.iter() {
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let lambda = mu((l * m.0, l * m.1));
        let factor = amp * (1.0 - (-lambda * (t + 1.0)).exp());
        out.set((l * m.0, l * m.1), v * factor);
    }
    Ok(out)
}

/// `|| H_k(h(t), C_n) ||_{C^{-alpha}}` for a shift field at a fixed time.
pub fn shift_vanishing_norm(h: &SpectralField, c_n: f64, k: usize, alpha: f64) -> f64 {
    assert!(k >= 1);
    let radius = h.radius().max(1);
    let p = good_resolution(2 * k * radius as usize + 2);
    let grid = synthesize(h, p).expect("de-aliased by construction");
    let powered = grid.map_real(|v| hermite_eval(k, v, c_n));
    let out = analyze(&powered, k as i32 * radius)
        .expect("de-aliased by construction")
        .into_hermitian();
    holder_norm(&out, -alpha)
}

/// Binomial shift action on a Wick family:
/// `(T_h z)_k = sum_{l<=k} C(k,l) z_l h^{k-l}`, pointwise on the shared grid.
pub fn shift_family(shift: &GridField, family: &WickFamily) -> WickFamily {
    let p = family.resolution();
    assert_eq!(
        shift.resolution(),
        p,
        "shift grid and family resolution differ"
    );
    let kmax = family.kmax;
    let sources: Vec<Vec<f64>> = family.members.iter().map(|g| g.real_values()).collect();
    let hv = shift.real_values();
    let mut outputs = vec![vec![0.0f64; p * p]; kmax + 1];
    for idx in 0..p * p {
        let h = hv[idx];
        // running powers h^{k-l}
        for (k, out) in outputs.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut pw = 1.0; // h^{k-l} starting at l = k
            for l in (0..=k).rev() {
                acc += binomial(k, l) * sources[l][idx] * pw;
                pw *= h;
            }
            out[idx] = acc;
        }
    }
    WickFamily::from_members(
        family.n,
        family.r,
        outputs
            .into_iter()
            .map(|v| GridField::from_real(v, p))
            .collect(),
    )
}

/// One-realization shifted-driver distances of the truncation demonstration:
/// samples `Z_M`, forms its Wick family, applies `T_{-Z_n - h_n}` with
/// `C_n = max(R_n - R, 0)`, and returns
/// `|| (T_{-Z_n-h_n} Z_M)_k - H_k(0, R) ||_{C^{-alpha}}` for `k = 1..=kmax`.
pub fn shifted_driver_distance(
    n: usize,
    m_trunc: usize,
    r_target: f64,
    kmax: usize,
    alpha: f64,
    seed: u64,
    base: &MomentProfile,
) -> Result<Vec<f64>, SupportError> {
    if m_trunc < n {
        return Err(SupportError::Domain(format!(
            "need M >= n, got M={m_trunc}, n={n}"
        )));
    }
    let ensemble = crate::she::stationary_sample(m_trunc as i32, seed);
    distances_from_ensemble(n, &ensemble, r_target, kmax, alpha, base)
}

/// Same as [`shifted_driver_distance`] but on a caller-supplied realization.
pub fn distances_from_ensemble(
    n: usize,
    ensemble: &OUEnsemble,
    r_target: f64,
    kmax: usize,
    alpha: f64,
    base: &MomentProfile,
) -> Result<Vec<f64>, SupportError> {
    let m_trunc = ensemble.truncation();
    let r_n = variance_r(n as i32);
    let c_n = (r_n - r_target).max(0.0);
    let h = build_shift(n, c_n, base, ensemble.time())?;
    let shift_spec = project(ensemble.field(), n as i32).add(&h).scaled(-1.0);
    let reach = m_trunc.max(shift_spec.radius()).max(1);
    let p = good_resolution(2 * kmax * reach as usize + 2);
    let family = wick_powers(ensemble, kmax, p)?;
    let shift_grid = synthesize(&shift_spec, p)?;
    let shifted = shift_family(&shift_grid, &family);
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let target = hermite_eval(k, 0.0, r_target);
        let diff = shifted.members[k].add_scalar(-target);
        let spec = analyze(&diff, k as i32 * reach)?.into_hermitian();
        out.push(holder_norm(&spec, -alpha));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::derive_seed;
    use crate::numeric::{double_factorial, gauss_laguerre};
    use crate::she::stationary_sample;

    #[test]
    fn profile_boundary_and_symmetry() {
        let p = 64usize;
        let g = base_profile(0.03, p).unwrap();
        // x2 = 1/2 column vanishes (cos(pi/2) = 0 up to float pi)
        for i in 0..p {
            assert!(g.at(i, p / 2).re.abs() < 1e-14);
        }
        // boundary rows are zeroed
        for j in 0..p {
            assert_eq!(g.at(0, j).re, 0.0);
            assert_eq!(g.at(j, 0).re, 0.0);
        }
        // sign symmetry g(a, (x1, 1-x2)) = -g(a, (x1, x2))
        for i in 1..p {
            for j in 1..p {
                let a = g.at(i, j).re;
                let b = g.at(i, p - j).re;
                assert!((a + b).abs() < 1e-12, "at ({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn profile_small_damping_limit() {
        let p = 64usize;
        let g = base_profile(0.001, p).unwrap();
        for &(i, j) in &[(13usize, 7usize), (32, 20), (50, 45)] {
            let x1 = i as f64 / p as f64;
            let x2 = j as f64 / p as f64;
            let undamped = (2.0 * (1.0 / x1).ln()).sqrt() * (std::f64::consts::PI * x2).cos();
            assert!((g.at(i, j).re - undamped).abs() < 1e-3);
        }
    }

    #[test]
    fn profile_domain_errors() {
        assert!(base_profile(0.0, 32).is_err());
        assert!(base_profile(1.0, 32).is_err());
        assert!(base_profile(-0.2, 32).is_err());
    }

    #[test]
    fn quadrature_identities() {
        // int_0^1 (2 log(1/x))^k dx = (2k)!!
        for k in 0..=5usize {
            let got = quad::log_power_integral(k);
            let expect = double_factorial(2 * k as i64);
            assert!(
                (got - expect).abs() / expect < 1e-12,
                "log moment {k}: {got} vs {expect}"
            );
        }
        // int_0^1 cos^{2k}(pi x) dx = (2k-1)!!/(2k)!!
        for k in 0..=5usize {
            let got = quad::cos_power_integral(2 * k);
            let expect = double_factorial(2 * k as i64 - 1) / double_factorial(2 * k as i64);
            assert!(
                (got - expect).abs() < 1e-10,
                "cos moment {k}: {got} vs {expect}"
            );
        }
        for k in [1usize, 3, 5] {
            assert!(quad::cos_power_integral(k).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_targets_values() {
        let b = moment_targets(3);
        assert_eq!(b, vec![0.0, 1.0, 0.0, 3.0, 0.0, 15.0]);
    }

    #[test]
    fn target_matches_two_dimensional_quadrature() {
        // b_2 oracle: direct 2-D quadrature of g(0,.)^2 (Gauss-Laguerre in
        // x1 through x = e^{-y}, trapezoid in x2)
        let (nodes, weights) = gauss_laguerre(32);
        let p = 256usize;
        let mut acc = 0.0;
        for (&y, &w) in nodes.iter().zip(&weights) {
            let x1: f64 = (-y).exp();
            for j in 0..p {
                let x2 = j as f64 / p as f64;
                let g0 = (2.0 * (1.0 / x1).ln()).sqrt() * (std::f64::consts::PI * x2).cos();
                acc += w * g0 * g0 / p as f64;
            }
        }
        assert!((acc - 1.0).abs() < 1e-4, "quadrature oracle gave {acc}");
    }

    #[test]
    fn starting_jacobian_is_near_identity() {
        let setup = newton_setup(2, 0.02).unwrap();
        let jac = setup.jacobian(&setup.base_grid);
        let dim = setup.targets.len();
        for r in 0..dim {
            for c in 0..dim {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!(
                    (jac[r * dim + c] - expect).abs() < 0.2,
                    "J[{r}][{c}] = {}",
                    jac[r * dim + c]
                );
            }
        }
    }

    #[test]
    fn match_moments_order_one() {
        let profile = match_moments(1, 0.02, 1e-8).unwrap();
        assert_eq!(profile.residuals.len(), 2);
        for (k, r) in profile.residuals.iter().enumerate() {
            assert!(*r <= 1e-8, "residual H_{} = {r:e}", k + 1);
        }
        // the first Hermite moment is the plain mean
        assert!(profile.field.mean_coeff().norm() <= 1e-8);
    }

    #[test]
    fn match_moments_order_two() {
        let profile = match_moments(2, 0.02, 1e-8).unwrap();
        for (k, r) in profile.residuals.iter().enumerate() {
            assert!(*r <= 1e-8, "residual H_{} = {r:e}", k + 1);
        }
    }

    #[test]
    fn match_moments_rejects_bad_params() {
        assert!(match_moments(0, 0.02, 1e-8).is_err());
        assert!(match_moments(5, 0.02, 1e-8).is_err());
        assert!(match_moments(2, 0.2, 1e-8).is_err());
    }

    #[test]
    fn frequency_scale_values() {
        assert!(frequency_scale(2).is_err());
        assert_eq!(frequency_scale(3).unwrap(), 1);
        assert_eq!(frequency_scale(4).unwrap(), 1);
        assert_eq!(frequency_scale(16).unwrap(), 2);
        assert_eq!(frequency_scale(64).unwrap(), 7);
    }

    fn test_profile() -> MomentProfile {
        match_moments(2, 0.02, 1e-8).unwrap()
    }

    #[test]
    fn shift_with_zero_budget_vanishes() {
        let base = test_profile();
        let h = build_shift(8, 0.0, &base, 0.0).unwrap();
        assert_eq!(h.coeff_energy(), 0.0);
    }

    #[test]
    fn shift_close_to_scaled_profile() {
        // sup_t ||h_n(t) - sqrt(C_n) f(l_n .)||_{C^1} <= 1/n: the decay
        // factors e^{-lambda(t+1)} are smallest at t = 0
        let base = test_profile();
        for n in [4usize, 16, 64] {
            let c_n = 0.8;
            let h = build_shift(n, c_n, &base, 0.0).unwrap();
            let l = frequency_scale(n).unwrap();
            let scaled = crate::fourier::scale_lambda(&base.field, l).scaled(c_n.sqrt());
            let diff = h.sub(&scaled);
            assert!(
                c1_norm(&diff) <= 1.0 / n as f64,
                "n={n}: C1 distance {}",
                c1_norm(&diff)
            );
        }
    }

    #[test]
    fn vanishing_norm_scales_with_frequency() {
        let base = test_profile();
        let alpha = 0.4;
        let c = 0.5;
        // q_n = norm * l_n^alpha should stay bounded as n (hence l_n) grows
        let mut qs = Vec::new();
        for n in [8usize, 64] {
            let h = build_shift(n, c, &base, 0.0).unwrap();
            let l = frequency_scale(n).unwrap() as f64;
            let norm = shift_vanishing_norm(&h, c, 1, alpha);
            qs.push(norm * l.powf(alpha));
        }
        let ratio = qs[1] / qs[0];
        assert!(
            (0.25..4.0).contains(&ratio),
            "scaled norms moved too much: {qs:?}"
        );
    }

    #[test]
    fn vanishing_norm_of_zero_field() {
        let zero = SpectralField::zero(0, true);
        // odd orders vanish at 0, even orders reduce to the constant H_k(0,C)
        assert_eq!(shift_vanishing_norm(&zero, 0.7, 1, 0.4), 0.0);
        let expect = 2f64.powf(0.4) * 0.7; // |H_2(0, C)| = C on block -1
        assert!((shift_vanishing_norm(&zero, 0.7, 2, 0.4) - expect).abs() < 1e-12);
    }

    #[test]
    fn dilated_profile_keeps_zero_hermite_means() {
        let base = test_profile();
        let l = 3u32;
        let scaled = crate::fourier::scale_lambda(&base.field, l);
        let p = good_resolution(2 * 4 * scaled.radius() as usize + 2);
        let grid = synthesize(&scaled, p).unwrap();
        for k in 1..=4usize {
            let mean = grid
                .values()
                .iter()
                .map(|v| hermite_eval(k, v.re, 1.0))
                .sum::<f64>()
                / (p * p) as f64;
            assert!(mean.abs() < 1e-7, "H_{k} mean after dilation: {mean:e}");
        }
    }

    #[test]
    fn shift_family_identity_and_inverse() {
        let ens = stationary_sample(3, 17);
        let p = 32usize;
        let family = wick_powers(&ens, 4, p).unwrap();
        let zero = GridField::constant(0.0, p);
        let same = shift_family(&zero, &family);
        for k in 0..=4usize {
            for (a, b) in same.members[k].values().iter().zip(family.members[k].values()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        let h = synthesize(&crate::fourier::random_real_field(3, 5, 0.5), p).unwrap();
        let minus_h = h.scaled(-1.0);
        let back = shift_family(&minus_h, &shift_family(&h, &family));
        for k in 0..=4usize {
            for (a, b) in back.members[k].values().iter().zip(family.members[k].values()) {
                assert!((a - b).norm() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn shift_family_collapses_hermite_argument() {
        // z_k = H_k(g, C) implies (T_h z)_k = H_k(g + h, C)
        let p = 32usize;
        let c = 0.7;
        let g = synthesize(&crate::fourier::random_real_field(2, 31, 0.3), p).unwrap();
        let members: Vec<GridField> = (0..=4)
            .map(|k| g.map_real(|v| hermite_eval(k, v, c)))
            .collect();
        let family = WickFamily::from_members(2, c, members);
        let h = synthesize(&crate::fourier::random_real_field(2, 32, 0.3), p).unwrap();
        let shifted = shift_family(&h, &family);
        for k in 0..=4usize {
            for idx_i in 0..p {
                for idx_j in 0..p {
                    let expect = hermite_eval(k, g.at(idx_i, idx_j).re + h.at(idx_i, idx_j).re, c);
                    let got = shifted.members[k].at(idx_i, idx_j).re;
                    assert!((got - expect).abs() < 1e-10, "k={k}");
                }
            }
        }
    }

    #[test]
    fn equal_truncation_collapse() {
        // at M = n the shifted family is exactly H_k(-h_n, R_n)
        let base = test_profile();
        let n = 4usize;
        let r_target = 0.3;
        let r_n = variance_r(n as i32);
        let c_n = (r_n - r_target).max(0.0);
        let ensemble = stationary_sample(n as i32, derive_seed(915, 0));
        let kmax = 3usize;

        let h = build_shift(n, c_n, &base, 0.0).unwrap();
        let shift_spec = project(ensemble.field(), n as i32).add(&h).scaled(-1.0);
        let reach = shift_spec.radius().max(n as i32);
        let p = good_resolution(2 * kmax * reach as usize + 2);
        let family = wick_powers(&ensemble, kmax, p).unwrap();
        let shift_grid = synthesize(&shift_spec, p).unwrap();
        let shifted = shift_family(&shift_grid, &family);
        let h_grid = synthesize(&h, p).unwrap();
        for k in 1..=kmax {
            for idx in 0..p * p {
                let expect = hermite_eval(k, -h_grid.values()[idx].re, r_n);
                let got = shifted.members[k].values()[idx].re;
                assert!(
                    (got - expect).abs() < 1e-8,
                    "k={k}: {got} vs {expect}"
                );
            }
        }

        // k = 1 distance telescopes to ||h_n||_{C^{-alpha}}
        let dists = distances_from_ensemble(n, &ensemble, r_target, kmax, 0.4, &base).unwrap();
        let h_norm = holder_norm(&h, -0.4);
        assert!(
            (dists[0] - h_norm).abs() < 1e-8,
            "{} vs {h_norm}",
            dists[0]
        );

        // with R = R_n the budget is zero and the k-distances vanish
        let clean = distances_from_ensemble(n, &ensemble, r_n, kmax, 0.4, &base).unwrap();
        for (k, d) in clean.iter().enumerate() {
            assert!(*d < 1e-8, "k={} distance {d}", k + 1);
        }
    }
}
