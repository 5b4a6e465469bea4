//! Littlewood-Paley block decomposition, Besov / Hölder / Sobolev norms and
//! Bony paraproducts for truncated fields on the torus.
//!
//! The dyadic multipliers come from a radial bump `chi` supported in the
//! annulus `3/4 < r < 8/3` with plateau `[7/8, 2]`, normalized by its own
//! dyadic sum so that `chi_{-1}(r) + sum_{k>=0} chi(r/2^k) = 1` holds exactly
//! by construction. Block `-1` carries everything below `|m| = 4/3`, block
//! `k >= 0` the annulus `3*2^k/4 < |m| < 8*2^k/3`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fourier::{good_resolution, multiply, mu, synthesize, SpectralField};

#[derive(Debug, Error)]
pub enum BesovError {
    #[error("field radius {radius} not covered by partition with kmax={kmax} (needs |m| < 3*2^kmax/4)")]
    Coverage { radius: i32, kmax: i32 },
}

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Unnormalized radial bump: 0 outside (3/4, 8/3), 1 on [7/8, 2].
fn raw_bump(r: f64) -> f64 {
    smooth_step((r - 0.75) / 0.125) * smooth_step((8.0 / 3.0 - r) / (2.0 / 3.0))
}

/// Normalized annulus profile: `chi(r) = raw(r) / sum_j raw(r / 2^j)`.
/// The dyadic plateaus overlap, so the denominator is >= 1 wherever the
/// numerator is nonzero, and `sum_{k in Z} chi(r/2^k) = 1` for every r > 0.
fn chi(r: f64) -> f64 {
    let raw = raw_bump(r);
    if raw == 0.0 {
        return 0.0;
    }
    let mut denom = 0.0;
    // raw(r/2^j) != 0 needs 3/4 < r/2^j < 8/3; only a couple of j qualify
    let jmid = r.log2();
    let lo = (jmid - 2.0).floor() as i32;
    let hi = (jmid + 2.0).ceil() as i32;
    for j in lo..=hi {
        denom += raw_bump(r / 2f64.powi(j));
    }
    raw / denom
}

/// Dyadic partition of unity on the frequency lattice, blocks `-1..=kmax`.
///
/// Multiplier values are radial and cheap, so they are computed on demand
/// rather than tabulated.
#[derive(Debug, Clone, Copy)]
pub struct DyadicPartition {
    kmax: i32,
}

impl DyadicPartition {
    pub fn new(kmax: i32) -> Self {
        assert!(kmax >= 0);
        Self { kmax }
    }

    /// Partition sized for a field of spectral radius `n`:
    /// `kmax = ceil(log2 n) + 2`, which keeps `|m| <= n` strictly inside the
    /// covered region.
    pub fn for_radius(n: i32) -> Self {
        let kmax = if n <= 1 {
            2
        } else {
            (n as f64).log2().ceil() as i32 + 2
        };
        Self { kmax }
    }

    pub fn kmax(&self) -> i32 {
        self.kmax
    }

    /// Lattice points with `|m| < coverage_radius()` are safely decomposed.
    pub fn coverage_radius(&self) -> f64 {
        0.75 * 2f64.powi(self.kmax)
    }

    /// Multiplier `chi_k(m)` for `k in -1..=kmax`.
    pub fn multiplier(&self, k: i32, m: (i32, i32)) -> f64 {
        assert!((-1..=self.kmax).contains(&k));
        let r = (f64::from(m.0) * f64::from(m.0) + f64::from(m.1) * f64::from(m.1)).sqrt();
        self.multiplier_radial(k, r)
    }

    pub fn multiplier_radial(&self, k: i32, r: f64) -> f64 {
        if k >= 0 {
            chi(r / 2f64.powi(k))
        } else if r == 0.0 {
            1.0
        } else if r >= 4.0 / 3.0 {
            // outside supp(chi_{-1}); the dyadic sum below is analytically 1
            // there and clipping removes its roundoff residue
            0.0
        } else {
            // chi_{-1} = 1 - sum_{k>=0} chi(r/2^k); only nearby k contribute
            let mut s = 0.0;
            let hi = (r.log2() + 1.0).ceil().max(0.0) as i32;
            for j in 0..=hi {
                s += chi(r / 2f64.powi(j));
            }
            (1.0 - s).max(0.0)
        }
    }

    /// Upper bound for the spectral radius of block `k` (the support is the
    /// open annulus, so rounding up never drops a mode).
    pub fn block_radius(&self, k: i32) -> i32 {
        if k < 0 {
            1
        } else {
            (8.0 * 2f64.powi(k) / 3.0).ceil() as i32
        }
    }

    fn check_coverage(&self, radius: i32) -> Result<(), BesovError> {
        if (radius as f64) >= self.coverage_radius() {
            Err(BesovError::Coverage {
                radius,
                kmax: self.kmax,
            })
        } else {
            Ok(())
        }
    }
}

/// The blocks `Delta_k f` for `k = -1..=kmax`, index 0 holding `k = -1`.
pub struct BlockDecomposition {
    pub blocks: Vec<SpectralField>,
}

impl BlockDecomposition {
    pub fn block(&self, k: i32) -> &SpectralField {
        &self.blocks[(k + 1) as usize]
    }

    pub fn resum(&self) -> SpectralField {
        let mut acc = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            acc = acc.add(b);
        }
        acc
    }
}

/// Frequency-localized pieces `(Delta_k f)^(m) = chi_k(m) f^(m)`.
pub fn lp_blocks(
    f: &SpectralField,
    part: &DyadicPartition,
) -> Result<BlockDecomposition, BesovError> {
    part.check_coverage(f.radius())?;
    let mut blocks = Vec::with_capacity((part.kmax + 2) as usize);
    for k in -1..=part.kmax {
        let radius = part.block_radius(k).min(f.radius());
        let mut b = SpectralField::zero(radius, false);
        let mut any = false;
        for m1 in -radius..=radius {
            for m2 in -radius..=radius {
                let m = (m1, m2);
                if m1 * m1 + m2 * m2 > radius * radius {
                    continue;
                }
                let w = part.multiplier(k, m);
                if w == 0.0 {
                    continue;
                }
                let v = f.get(m);
                if v != Complex64::new(0.0, 0.0) {
                    b.set(m, w * v);
                    any = true;
                }
            }
        }
        let b = if any && f.is_hermitian() {
            b.into_hermitian()
        } else {
            b
        };
        blocks.push(b);
    }
    Ok(BlockDecomposition { blocks })
}

/// Integrability exponent restricted to what the norms here need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Inf,
}

impl Exponent {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "1" => Some(Self::One),
            "2" => Some(Self::Two),
            "inf" | "Inf" | "INF" => Some(Self::Inf),
            _ => None,
        }
    }
}

/// Grid L^p norm at the field's sampling resolution. For `p = inf` the grid
/// max is a lower bound of the true sup; all comparisons in the crate are
/// made like-with-like at a fixed resolution, so this is consistent.
fn grid_lp_norm(f: &SpectralField, p: Exponent) -> f64 {
    let res = good_resolution(4 * f.radius().max(1) as usize + 1);
    let g = synthesize(f, res).expect("resolution exceeds 2n by construction");
    match p {
        Exponent::One => g.values().iter().map(|v| v.norm()).sum::<f64>() / (res * res) as f64,
        Exponent::Two => {
            (g.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / (res * res) as f64).sqrt()
        }
        Exponent::Inf => g.values().iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}

/// Besov norm `|| (2^{alpha k} ||Delta_k f||_{L^p})_k ||_{l^q}`.
pub fn besov_norm(
    f: &SpectralField,
    alpha: f64,
    p: Exponent,
    q: Exponent,
    part: &DyadicPartition,
) -> Result<f64, BesovError> {
    let blocks = lp_blocks(f, part)?;
    let mut weighted = Vec::with_capacity(blocks.blocks.len());
    for (i, b) in blocks.blocks.iter().enumerate() {
        let k = i as i32 - 1;
        weighted.push(2f64.powf(alpha * k as f64) * grid_lp_norm(b, p));
    }
    Ok(match q {
        Exponent::One => weighted.iter().sum(),
        Exponent::Two => weighted.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Exponent::Inf => weighted.iter().fold(0.0f64, |a, &b| a.max(b)),
    })
}

/// Hölder norm `C^alpha = B^alpha_{inf,inf}`, with a partition sized for the
/// field's own radius.
pub fn holder_norm(f: &SpectralField, alpha: f64) -> f64 {
    let part = DyadicPartition::for_radius(f.radius());
    besov_norm(f, alpha, Exponent::Inf, Exponent::Inf, &part)
        .expect("partition sized for the field")
}

/// Sobolev norm `sqrt(sum_m (1+4pi^2|m|^2)^gamma |f^(m)|^2)`.
pub fn sobolev_norm(f: &SpectralField, gamma: f64) -> f64 {
    f.iter()
        .map(|(m, v)| mu(m).powf(gamma) * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Classical `C^1` norm proxy: `max |f| + max |grad f|` on the sampling grid.
pub fn c1_norm(f: &SpectralField) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut dx = SpectralField::zero(f.radius(), false);
    let mut dy = SpectralField::zero(f.radius(), false);
    for (m, v) in f.iter() {
        if v != Complex64::new(0.0, 0.0) {
            let i = Complex64::new(0.0, 1.0);
            dx.set(m, v * i * two_pi * f64::from(m.0));
            dy.set(m, v * i * two_pi * f64::from(m.1));
        }
    }
    let res = good_resolution(4 * f.radius().max(1) as usize + 1);
    let g = synthesize(f, res).expect("de-aliased");
    let gx = synthesize(&dx, res).expect("de-aliased");
    let gy = synthesize(&dy, res).expect("de-aliased");
    let sup = g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let grad = gx
        .values()
        .iter()
        .zip(gy.values())
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .fold(0.0, f64::max);
    sup + grad
}

/// Bony paraproduct `f < g = sum_{j < k-1} Delta_j f Delta_k g`.
pub fn paraproduct_less(
    f: &SpectralField,
    g: &SpectralField,
    part: &DyadicPartition,
) -> Result<SpectralField, BesovError> {
    let bf = lp_blocks(f, part)?;
    let bg = lp_blocks(g, part)?;
    let out_radius = f.radius() + g.radius();
    let mut acc = SpectralField::zero(out_radius, f.is_hermitian() && g.is_hermitian());
    let mut partial: Option<SpectralField> = None; // sum of Delta_j f for j <= k-2
    for k in -1..=part.kmax {
        if k - 2 >= -1 {
            let add = bf.block(k - 2).clone();
            partial = Some(match partial {
                Some(s) => s.add(&add),
                None => add,
            });
        }
        if let Some(ref s) = partial {
            acc = acc.add(&multiply(s, bg.block(k)));
        }
    }
    Ok(acc)
}

/// `f > g = g < f`.
pub fn paraproduct_greater(
    f: &SpectralField,
    g: &SpectralField,
    part: &DyadicPartition,
) -> Result<SpectralField, BesovError> {
    paraproduct_less(g, f, part)
}

/// Resonance term `f o g = sum_{|j-k| <= 1} Delta_j f Delta_k g`.
pub fn resonance(
    f: &SpectralField,
    g: &SpectralField,
    part: &DyadicPartition,
) -> Result<SpectralField, BesovError> {
    let bf = lp_blocks(f, part)?;
    let bg = lp_blocks(g, part)?;
    let out_radius = f.radius() + g.radius();
    let mut acc = SpectralField::zero(out_radius, f.is_hermitian() && g.is_hermitian());
    for k in -1..=part.kmax {
        for j in (k - 1).max(-1)..=(k + 1).min(part.kmax) {
            acc = acc.add(&multiply(bf.block(j), bg.block(k)));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::random_real_field;

    #[test]
    fn partition_pointwise_examples() {
        let part = DyadicPartition::new(6);
        // the -1 block captures the mean
        assert_eq!(part.multiplier(-1, (0, 0)), 1.0);
        // full partition of unity at m = (5,0)
        let total: f64 = (-1..=6).map(|k| part.multiplier(k, (5, 0))).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // chi_2 vanishes at |m| = 1 < 3*4/4
        assert_eq!(part.multiplier(2, (1, 0)), 0.0);
    }

    #[test]
    fn partition_of_unity_and_supports() {
        let part = DyadicPartition::new(6);
        let cover = part.coverage_radius(); // 48
        for m1 in 0..=48i32 {
            for m2 in 0..=m1 {
                let r = ((m1 * m1 + m2 * m2) as f64).sqrt();
                if r >= cover {
                    continue;
                }
                let m = (m1, m2);
                let mut total = 0.0;
                for k in -1..=6 {
                    let w = part.multiplier(k, m);
                    assert!((0.0..=1.0 + 1e-15).contains(&w));
                    if k >= 0 && w > 0.0 {
                        let lo = 0.75 * 2f64.powi(k);
                        let hi = 8.0 * 2f64.powi(k) / 3.0;
                        assert!(r > lo && r < hi, "chi_{k} support violated at {m:?}");
                    }
                    if k == -1 && w > 0.0 {
                        assert!(r < 4.0 / 3.0);
                    }
                    total += w;
                }
                assert!((total - 1.0).abs() < 1e-12, "partition fails at {m:?}");
            }
        }
    }

    #[test]
    fn blocks_of_constant_and_pure_mode() {
        let part = DyadicPartition::new(4);
        let c = SpectralField::constant(3.25);
        let blocks = lp_blocks(&c, &part).unwrap();
        assert_eq!(blocks.block(-1).get((0, 0)).re, 3.25);
        for k in 0..=4 {
            assert_eq!(blocks.block(k).coeff_energy(), 0.0);
        }

        // |m| = 4 lands exactly in blocks 1 and 2
        let e4 = SpectralField::mode((4, 0), Complex64::new(1.0, 0.0));
        let blocks = lp_blocks(&e4, &part).unwrap();
        for k in -1..=4 {
            let energy = blocks.block(k).coeff_energy();
            if k == 1 || k == 2 {
                assert!(energy > 0.0, "block {k} should be active");
            } else {
                assert_eq!(energy, 0.0, "block {k} should vanish");
            }
        }
    }

    #[test]
    fn blocks_resum_to_field() {
        let f = random_real_field(8, 2, 0.3);
        let part = DyadicPartition::for_radius(8);
        let blocks = lp_blocks(&f, &part).unwrap();
        let back = blocks.resum();
        for (m, v) in f.iter() {
            assert!((back.get(m) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn coverage_rejected() {
        let part = DyadicPartition::new(3); // covers |m| < 6
        let f = random_real_field(6, 1, 0.0);
        assert!(matches!(
            lp_blocks(&f, &part),
            Err(BesovError::Coverage { .. })
        ));
    }

    #[test]
    fn norm_of_constant() {
        let c = SpectralField::constant(-2.0);
        let part = DyadicPartition::new(3);
        for &alpha in &[-0.7f64, 0.0, 1.3] {
            let got = besov_norm(&c, alpha, Exponent::Inf, Exponent::Inf, &part).unwrap();
            let expect = 2f64.powf(-alpha) * 2.0;
            assert!((got - expect).abs() < 1e-12, "alpha={alpha}");
        }
        assert!((holder_norm(&c, 0.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn norm_of_pure_mode_is_max_multiplier() {
        let part = DyadicPartition::new(4);
        let e4 = SpectralField::mode((4, 0), Complex64::new(1.0, 0.0));
        let got = besov_norm(&e4, 0.0, Exponent::Inf, Exponent::Inf, &part).unwrap();
        let expect = part.multiplier(1, (4, 0)).max(part.multiplier(2, (4, 0)));
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn sobolev_examples() {
        let e0 = SpectralField::constant(1.0);
        for &g in &[-1.5f64, 0.0, 2.0] {
            assert!((sobolev_norm(&e0, g) - 1.0).abs() < 1e-15);
        }
        let e1 = SpectralField::mode((1, 0), Complex64::new(1.0, 0.0));
        let expect = (1.0 + 4.0 * std::f64::consts::PI.powi(2)).powf(-0.5);
        assert!((sobolev_norm(&e1, -1.0) - expect).abs() < 1e-15);
        // Parseval at gamma = 0
        let f = random_real_field(5, 9, 0.2);
        assert!((sobolev_norm(&f, 0.0) - f.coeff_energy().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn besov22_brackets_sobolev() {
        // empirical norm equivalence B^g_{2,2} ~ H^g within [1/c, c], c <= 4
        for &gamma in &[-0.5f64, 0.5] {
            for seed in 0..8u64 {
                let f = random_real_field(12, seed, 0.4);
                let part = DyadicPartition::for_radius(12);
                let b = besov_norm(&f, gamma, Exponent::Two, Exponent::Two, &part).unwrap();
                let s = sobolev_norm(&f, gamma);
                let ratio = b / s;
                assert!(
                    (0.25..4.0).contains(&ratio),
                    "gamma={gamma} seed={seed} ratio={ratio}"
                );
            }
        }
    }

    #[test]
    fn paraproducts_on_constants() {
        let part = DyadicPartition::new(3);
        let f = SpectralField::constant(2.0);
        let g = SpectralField::constant(-1.5);
        let less = paraproduct_less(&f, &g, &part).unwrap();
        assert_eq!(less.coeff_energy(), 0.0);
        let res = resonance(&f, &g, &part).unwrap();
        assert!((res.get((0, 0)).re - (-3.0)).abs() < 1e-13);
    }

    #[test]
    fn paraproduct_constant_against_high_mode() {
        let part = DyadicPartition::new(4);
        let f = SpectralField::constant(2.0);
        let g = SpectralField::real_mode_pair((8, 0), Complex64::new(0.5, 0.0));
        let less = paraproduct_less(&f, &g, &part).unwrap();
        let prod = multiply(&f, &g);
        for (m, v) in prod.iter() {
            assert!((less.get(m) - v).norm() < 1e-13);
        }
        let res = resonance(&f, &g, &part).unwrap();
        assert!(res.coeff_energy() < 1e-26);
    }

    #[test]
    fn bony_reconstruction() {
        let f = random_real_field(8, 21, 0.2);
        let g = random_real_field(8, 22, 0.2);
        let part = DyadicPartition::for_radius(8);
        let less = paraproduct_less(&f, &g, &part).unwrap();
        let grtr = paraproduct_greater(&f, &g, &part).unwrap();
        let reso = resonance(&f, &g, &part).unwrap();
        let sum = less.add(&grtr).add(&reso);
        let prod = multiply(&f, &g);
        for (m, v) in prod.iter() {
            assert!((sum.get(m) - v).norm() < 1e-12, "mode {m:?}");
        }
    }

    #[test]
    fn paraproduct_bound_ratio_stays_bounded() {
        // Empirical constant in ||f<g||_{C^a} <= C ||f||_inf ||g||_{C^a}
        // (the alpha_1 = 0 case) over random pairs, stable across seeds.
        let alpha = 0.5;
        for master in [1u64, 2] {
            let mut worst = 0.0f64;
            for i in 0..50u64 {
                let f = random_real_field(16, 1000 * master + 2 * i, 0.4);
                let g = random_real_field(16, 1000 * master + 2 * i + 1, 0.4);
                let part = DyadicPartition::for_radius(32);
                let less = paraproduct_less(&f, &g, &part).unwrap();
                let num = holder_norm(&less, alpha);
                let f_inf = grid_lp_norm(&f, Exponent::Inf);
                let den = f_inf * holder_norm(&g, alpha);
                worst = worst.max(num / den);
            }
            assert!(worst < 50.0, "paraproduct ratio blew up: {worst}");
        }
    }

    #[test]
    fn resonance_bound_ratio_stays_bounded() {
        // alpha_1 = alpha_2 = 0.5, target regularity 1.0
        let mut worst = 0.0f64;
        for i in 0..50u64 {
            let f = random_real_field(16, 5000 + 2 * i, 0.6);
            let g = random_real_field(16, 5000 + 2 * i + 1, 0.6);
            let part = DyadicPartition::for_radius(32);
            let reso = resonance(&f, &g, &part).unwrap();
            let num = holder_norm(&reso, 1.0);
            let den = holder_norm(&f, 0.5) * holder_norm(&g, 0.5);
            worst = worst.max(num / den);
        }
        assert!(worst < 50.0, "resonance ratio blew up: {worst}");
    }

    #[test]
    fn scaling_ratio_bounded_for_mean_zero() {
        // ||Lambda_l f||_{C^{-a}} <~ l^{-a} ||f||_{C^{-a}} for mean-zero f
        let alpha = 0.4;
        for seed in [3u64, 7, 11] {
            let mut f = random_real_field(8, seed, 0.2);
            f.set((0, 0), Complex64::new(0.0, 0.0));
            let base = holder_norm(&f, -alpha);
            for &lambda in &[2u32, 4, 8, 16] {
                let scaled = crate::fourier::scale_lambda(&f, lambda);
                let ratio =
                    holder_norm(&scaled, -alpha) / (f64::from(lambda).powf(-alpha) * base);
                assert!(ratio < 10.0, "lambda={lambda} seed={seed} ratio={ratio}");
            }
        }
    }
}
