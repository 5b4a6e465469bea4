//! Truncated Fourier series on the 2-torus and their exact correspondence
//! with uniform grids.
//!
//! A [`SpectralField`] stores coefficients `a_m` for lattice points inside
//! the Euclidean ball `|m| <= n`; a [`GridField`] stores samples at the
//! points `(i/P, j/P)`. As long as `P > 2n`, [`synthesize`] and [`analyze`]
//! are mutually inverse up to roundoff, and [`multiply`] computes pointwise
//! products with full de-aliasing (the product grid always satisfies
//! `P > 2(n_f + n_g)`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("grid resolution {p} too small for spectral radius {n} (need P > 2n)")]
    ResolutionTooSmall { p: usize, n: i32 },
    #[error("invalid serialized field: {0}")]
    BadSerialization(String),
}

/// Truncated Fourier coefficient table: `a_m` for `|m| <= n`, `m` in `Z^2`.
///
/// When `hermitian` is set, `a_{-m} = conj(a_m)` holds exactly for every
/// stored coefficient and the synthesized field is real.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: i32,
    hermitian: bool,
    side: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(n: i32, hermitian: bool) -> Self {
        assert!(n >= 0);
        let side = (2 * n + 1) as usize;
        Self {
            n,
            hermitian,
            side,
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    /// The constant field `c`.
    pub fn constant(c: f64) -> Self {
        let mut f = Self::zero(0, true);
        f.set((0, 0), Complex64::new(c, 0.0));
        f
    }

    /// The single exponential `amp * e_m`.
    pub fn mode(m: (i32, i32), amp: Complex64) -> Self {
        let n = norm_ceil(m);
        let mut f = Self::zero(n, false);
        f.set(m, amp);
        f
    }

    /// The real field `2 Re(amp * e_m) = amp e_m + conj(amp) e_{-m}`.
    pub fn real_mode_pair(m: (i32, i32), amp: Complex64) -> Self {
        let n = norm_ceil(m);
        let mut f = Self::zero(n, true);
        f.set(m, amp);
        if m != (0, 0) {
            f.set((-m.0, -m.1), amp.conj());
        }
        f
    }

    pub fn radius(&self) -> i32 {
        self.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    #[inline]
    fn in_ball(&self, m: (i32, i32)) -> bool {
        let r2 = i64::from(m.0) * i64::from(m.0) + i64::from(m.1) * i64::from(m.1);
        r2 <= i64::from(self.n) * i64::from(self.n)
    }

    #[inline]
    fn idx(&self, m: (i32, i32)) -> usize {
        ((m.0 + self.n) as usize) * self.side + (m.1 + self.n) as usize
    }

    /// Coefficient at `m`; zero outside the truncation ball.
    #[inline]
    pub fn get(&self, m: (i32, i32)) -> Complex64 {
        if m.0.abs() <= self.n && m.1.abs() <= self.n && self.in_ball(m) {
            self.coeffs[self.idx(m)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Sets a coefficient; panics outside the ball `|m| <= n`. The hermitian
    /// flag is not policed here, callers keep the symmetry themselves or go
    /// through [`SpectralField::into_hermitian`].
    pub fn set(&mut self, m: (i32, i32), v: Complex64) {
        assert!(self.in_ball(m), "mode {m:?} outside radius {}", self.n);
        let i = self.idx(m);
        self.coeffs[i] = v;
    }

    /// Iterates over all lattice points of the ball with their coefficients.
    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32), Complex64)> + '_ {
        let n = self.n;
        (-n..=n).flat_map(move |m1| {
            (-n..=n).filter_map(move |m2| {
                let m = (m1, m2);
                if self.in_ball(m) {
                    Some((m, self.coeffs[self.idx(m)]))
                } else {
                    None
                }
            })
        })
    }

    pub fn mean_coeff(&self) -> Complex64 {
        self.get((0, 0))
    }

    /// Largest `|m|` carrying a nonzero coefficient, 0 for the zero field.
    pub fn active_radius(&self) -> i32 {
        let mut r2max = 0i64;
        for (m, v) in self.iter() {
            if v != Complex64::new(0.0, 0.0) {
                let r2 = i64::from(m.0) * i64::from(m.0) + i64::from(m.1) * i64::from(m.1);
                r2max = r2max.max(r2);
            }
        }
        (r2max as f64).sqrt().ceil() as i32
    }

    /// Enforces `a_{-m} = conj(a_m)` exactly by averaging opposite modes,
    /// and sets the hermitian flag.
    pub fn into_hermitian(mut self) -> Self {
        let n = self.n;
        for m1 in 0..=n {
            for m2 in -n..=n {
                if m1 == 0 && m2 < 0 {
                    continue;
                }
                let m = (m1, m2);
                if !self.in_ball(m) {
                    continue;
                }
                if m == (0, 0) {
                    let i = self.idx(m);
                    self.coeffs[i] = Complex64::new(self.coeffs[i].re, 0.0);
                    continue;
                }
                let i = self.idx(m);
                let j = self.idx((-m1, -m2));
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
        self.hermitian = true;
        self
    }

    /// Checks the hermitian symmetry exactly.
    pub fn check_hermitian(&self) -> bool {
        self.iter().all(|(m, v)| self.get((-m.0, -m.1)).conj() == v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    /// Coefficient-wise sum; the result radius is the max of the two.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.n.max(other.n);
        let mut out = Self::zero(n, self.hermitian && other.hermitian);
        for (m, v) in self.iter() {
            if v != Complex64::new(0.0, 0.0) {
                out.set(m, v);
            }
        }
        for (m, v) in other.iter() {
            if v != Complex64::new(0.0, 0.0) {
                let cur = out.get(m);
                out.set(m, cur + v);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `sum_m |a_m|^2`.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> String {
        let mut coeffs: Vec<(i32, i32, f64, f64)> = self
            .iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .map(|(m, v)| (m.0, m.1, v.re, v.im))
            .collect();
        coeffs.sort_by_key(|&(m1, m2, _, _)| (m1, m2));
        let doc = FieldJson {
            n: self.n,
            hermitian: self.hermitian,
            coeffs,
        };
        serde_json::to_string(&doc).expect("field serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, FourierError> {
        let doc: FieldJson =
            serde_json::from_str(text).map_err(|e| FourierError::BadSerialization(e.to_string()))?;
        if doc.n < 0 {
            return Err(FourierError::BadSerialization("negative radius".into()));
        }
        let mut f = Self::zero(doc.n, false);
        for &(m1, m2, re, im) in &doc.coeffs {
            if !f.in_ball((m1, m2)) {
                return Err(FourierError::BadSerialization(format!(
                    "mode ({m1},{m2}) outside radius {}",
                    doc.n
                )));
            }
            f.set((m1, m2), Complex64::new(re, im));
        }
        if doc.hermitian {
            if !f.check_hermitian() {
                return Err(FourierError::BadSerialization(
                    "hermitian flag set but coefficients are not symmetric".into(),
                ));
            }
            f.hermitian = true;
        }
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    n: i32,
    hermitian: bool,
    coeffs: Vec<(i32, i32, f64, f64)>,
}

fn norm_ceil(m: (i32, i32)) -> i32 {
    ((f64::from(m.0) * f64::from(m.0) + f64::from(m.1) * f64::from(m.1)).sqrt()).ceil() as i32
}

/// Samples of a field at the uniform grid `(i/P, j/P)`, row-major in `i`.
#[derive(Debug, Clone)]
pub struct GridField {
    p: usize,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn from_complex(values: Vec<Complex64>, p: usize) -> Self {
        assert_eq!(values.len(), p * p);
        Self { p, values }
    }

    pub fn from_real(values: Vec<f64>, p: usize) -> Self {
        assert_eq!(values.len(), p * p);
        Self {
            p,
            values: values
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect(),
        }
    }

    pub fn constant(c: f64, p: usize) -> Self {
        Self::from_real(vec![c; p * p], p)
    }

    pub fn resolution(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.p + j]
    }

    /// Real parts of the samples. For fields synthesized from hermitian
    /// coefficients this is the field itself up to roundoff in the imaginary
    /// part.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Applies `f` to the real part of every sample, producing a real grid.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            p: self.p,
            values: self.values.iter().map(|v| Complex64::new(f(v.re), 0.0)).collect(),
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn mul_pointwise(&self, other: &GridField) -> GridField {
        assert_eq!(self.p, other.p, "grid resolutions differ");
        GridField {
            p: self.p,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &GridField) -> GridField {
        assert_eq!(self.p, other.p);
        GridField {
            p: self.p,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> GridField {
        GridField {
            p: self.p,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> GridField {
        GridField {
            p: self.p,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Fourier multiplier of `1 - Delta` at mode `m`: `mu_m = 1 + 4 pi^2 |m|^2`.
/// This is both the Ornstein-Uhlenbeck rate of mode `m` and the weight in the
/// Sobolev inner products.
#[inline]
pub fn mu(m: (i32, i32)) -> f64 {
    let r2 = f64::from(m.0) * f64::from(m.0) + f64::from(m.1) * f64::from(m.1);
    1.0 + 4.0 * std::f64::consts::PI * std::f64::consts::PI * r2
}

/// Smallest 5-smooth integer `>= min` (FFT-friendly resolutions).
pub fn good_resolution(min: usize) -> usize {
    let mut p = min.max(4);
    loop {
        let mut q = p;
        for d in [2usize, 3, 5] {
            while q % d == 0 {
                q /= d;
            }
        }
        if q == 1 {
            return p;
        }
        p += 1;
    }
}

/// Evaluates the field on the `P x P` grid: `values(i,j) = sum_m a_m e_m(i/P, j/P)`.
/// Exact for band-limited inputs whenever `P > 2n`.
pub fn synthesize(f: &SpectralField, p: usize) -> Result<GridField, FourierError> {
    if p <= 2 * f.n.unsigned_abs() as usize {
        return Err(FourierError::ResolutionTooSmall { p, n: f.n });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); p * p];
    for (m, v) in f.iter() {
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let i = m.0.rem_euclid(p as i32) as usize;
        let j = m.1.rem_euclid(p as i32) as usize;
        values[i * p + j] += v;
    }
    fft2::fft2(&mut values, p, true);
    Ok(GridField { p, values })
}

/// Trapezoidal (equal-weight) quadrature of the Fourier integral on the grid:
/// exact on band-limited inputs with `P > 2n`. The result carries
/// `hermitian = false`; callers with real grids follow up with
/// [`SpectralField::into_hermitian`].
pub fn analyze(g: &GridField, n: i32) -> Result<SpectralField, FourierError> {
    let p = g.p;
    if p <= 2 * n.unsigned_abs() as usize {
        return Err(FourierError::ResolutionTooSmall { p, n });
    }
    let mut work = g.values.clone();
    fft2::fft2(&mut work, p, false);
    let norm = 1.0 / (p * p) as f64;
    let mut f = SpectralField::zero(n, false);
    for m1 in -n..=n {
        for m2 in -n..=n {
            let m = (m1, m2);
            if !f.in_ball(m) {
                continue;
            }
            let i = m1.rem_euclid(p as i32) as usize;
            let j = m2.rem_euclid(p as i32) as usize;
            f.set(m, work[i * p + j] * norm);
        }
    }
    Ok(f)
}

/// Galerkin projection: zeroes all coefficients with `|m| > n2`.
pub fn project(f: &SpectralField, n2: i32) -> SpectralField {
    let n = f.n.min(n2.max(0));
    let mut out = SpectralField::zero(n, f.hermitian);
    for m1 in -n..=n {
        for m2 in -n..=n {
            let m = (m1, m2);
            if !out.in_ball(m) {
                continue;
            }
            let v = f.get(m);
            if v != Complex64::new(0.0, 0.0) {
                out.set(m, v);
            }
        }
    }
    out
}

/// Integer dilation `f(lambda x)`: coefficient `m` moves to `lambda m`.
pub fn scale_lambda(f: &SpectralField, lambda: u32) -> SpectralField {
    assert!(lambda >= 1);
    let l = lambda as i32;
    let mut out = SpectralField::zero(f.n * l, f.hermitian);
    for (m, v) in f.iter() {
        if v != Complex64::new(0.0, 0.0) {
            out.set((m.0 * l, m.1 * l), v);
        }
    }
    out
}

/// Spectral coefficients of the pointwise product `f g`, computed on a fully
/// de-aliased grid (`P > 2(n_f + n_g)`). The result has radius `n_f + n_g`.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let n_out = f.n + g.n;
    let p = good_resolution(2 * n_out as usize + 2);
    let gf = synthesize(f, p).expect("internal resolution is de-aliased");
    let gg = synthesize(g, p).expect("internal resolution is de-aliased");
    let prod = gf.mul_pointwise(&gg);
    let out = analyze(&prod, n_out).expect("internal resolution is de-aliased");
    if f.hermitian && g.hermitian {
        out.into_hermitian()
    } else {
        out
    }
}

/// Random real (hermitian) band-limited field with independent Gaussian
/// coefficients damped by `(1+|m|^2)^{-decay/2}`. Used by demos and the
/// statistical test corpus.
pub fn random_real_field(n: i32, seed: u64, decay: f64) -> SpectralField {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut f = SpectralField::zero(n, false);
    let normal = StandardNormal;
    for m1 in 0..=n {
        for m2 in -n..=n {
            if m1 == 0 && m2 < 0 {
                continue;
            }
            let m = (m1, m2);
            if !f.in_ball(m) {
                continue;
            }
            let w = (1.0 + (m.0 * m.0 + m.1 * m.1) as f64).powf(-decay / 2.0);
            if m == (0, 0) {
                let g: f64 = normal.sample(&mut rng);
                f.set(m, Complex64::new(w * g, 0.0));
            } else {
                let gr: f64 = normal.sample(&mut rng);
                let gi: f64 = normal.sample(&mut rng);
                let v = Complex64::new(gr, gi) * w * std::f64::consts::FRAC_1_SQRT_2;
                f.set(m, v);
                f.set((-m.0, -m.1), v.conj());
            }
        }
    }
    f.hermitian = true;
    f
}

pub(crate) mod fft2 {
    use num_complex::Complex64;
    use rustfft::FftPlanner;
    use std::cell::RefCell;

    thread_local! {
        static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    }

    /// In-place 2-D FFT of a row-major `P x P` array. Forward uses
    /// `e^{-2 pi i}`, inverse `e^{+2 pi i}`; both are unnormalized.
    pub fn fft2(values: &mut [Complex64], p: usize, inverse: bool) {
        assert_eq!(values.len(), p * p);
        let fft = PLANNER.with(|pl| {
            let mut pl = pl.borrow_mut();
            if inverse {
                pl.plan_fft_inverse(p)
            } else {
                pl.plan_fft_forward(p)
            }
        });
        for row in values.chunks_exact_mut(p) {
            fft.process(row);
        }
        transpose(values, p);
        for row in values.chunks_exact_mut(p) {
            fft.process(row);
        }
        transpose(values, p);
    }

    fn transpose(values: &mut [Complex64], p: usize) {
        for i in 0..p {
            for j in 0..i {
                values.swap(i * p + j, j * p + i);
            }
        }
    }
}
