//! Hermite polynomials `H_k(x, C)` with variance parameter, their complex
//! bidegree analogue `H_{k,l}(z, c)`, and conversions between the monomial
//! and Hermite bases.
//!
//! The family is generated by `exp(t x - C t^2 / 2) = sum_k t^k/k! H_k(x, C)`,
//! so `H_0 = 1`, `H_1 = x`, `H_2 = x^2 - C`, and in general
//! `H_{k+1}(x, C) = x H_k(x, C) - k C H_{k-1}(x, C)`.
//!
//! Evaluation goes through the three-term recurrence, not the explicit
//! alternating sum: the recurrence is numerically stable at large degree,
//! while the alternating sum cancels catastrophically. The explicit sum only
//! appears in tests as an oracle.

use num_complex::Complex64;

use crate::numeric::{binomial, factorial, pair_partition_count};

/// Degrees above this are rejected: the coefficient tables leave the exactly
/// representable integer range and nothing in the library needs them.
pub const MAX_DEGREE: usize = 64;

fn check_degree(k: usize) {
    assert!(k <= MAX_DEGREE, "Hermite degree {k} exceeds cap {MAX_DEGREE}");
}

/// Evaluates `H_k(x, C)` by the three-term recurrence.
pub fn hermite_eval(k: usize, x: f64, c: f64) -> f64 {
    check_degree(k);
    assert!(c >= 0.0, "variance parameter must be nonnegative");
    let mut prev = 1.0f64; // H_0
    if k == 0 {
        return prev;
    }
    let mut cur = x; // H_1
    for j in 1..k {
        let next = x * cur - (j as f64) * c * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Evaluates `H_0(x,C), ..., H_kmax(x,C)` in one pass. Handy for pointwise
/// Wick powers where all orders are needed at every grid node.
pub fn hermite_eval_all(kmax: usize, x: f64, c: f64) -> Vec<f64> {
    check_degree(kmax);
    assert!(c >= 0.0);
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    out.push(x);
    for j in 1..kmax {
        let next = x * out[j] - (j as f64) * c * out[j - 1];
        out.push(next);
    }
    out
}

/// Coefficients `c_l` with `x^k = sum_l c_l H_{k-2l}(x, C)`,
/// `c_l = k! C^l / (2^l l! (k-2l)!)` for `0 <= l <= k/2`.
///
/// The integer part `k!/(2^l l! (k-2l)!)` is computed exactly; only the
/// multiplication by `C^l` rounds.
pub fn hermite_inverse_coeffs(k: usize, c: f64) -> Vec<f64> {
    check_degree(k);
    (0..=k / 2)
        .map(|l| pair_partition_count(k, l) * c.powi(l as i32))
        .collect()
}

/// Complex Hermite polynomial
/// `H_{k,l}(z, c) = sum_m m! C(k,m) C(l,m) (-c)^m z^{k-m} conj(z)^{l-m}`.
pub fn complex_hermite_eval(k: usize, l: usize, z: Complex64, c: f64) -> Complex64 {
    check_degree(k);
    check_degree(l);
    assert!(c >= 0.0);
    let zbar = z.conj();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=k.min(l) {
        let coef = factorial(m) * binomial(k, m) * binomial(l, m) * (-c).powi(m as i32);
        acc += coef * z.powu((k - m) as u32) * zbar.powu((l - m) as u32);
    }
    acc
}

/// Rewrites a polynomial from the monomial basis into the Hermite basis:
/// given `p(x) = sum_k coeffs[k] x^k`, returns `q` with
/// `p(x) = sum_k q[k] H_k(x, C)`.
pub fn monomial_to_hermite(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (k, &p) in coeffs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (l, &w) in hermite_inverse_coeffs(k, c).iter().enumerate() {
            out[k - 2 * l] += p * w;
        }
    }
    out
}

/// Inverse of [`monomial_to_hermite`]: expands `sum_k coeffs[k] H_k(x, C)`
/// back into powers of `x`. Uses the explicit representation of `H_k`, which
/// equals the inverse table at `-C`.
pub fn hermite_to_monomial(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (k, &q) in coeffs.iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        for l in 0..=k / 2 {
            out[k - 2 * l] += q * pair_partition_count(k, l) * (-c).powi(l as i32);
        }
    }
    out
}
