//! Small numerical utilities shared across modules: combinatorics, a dense
//! linear solver for the Newton systems, least-squares slopes and
//! Gauss-Laguerre rules for the logarithmic moment integrals.

/// `n!` as f64. Exact for `n <= 22`, correctly rounded well beyond.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Double factorial `n!! = n (n-2) (n-4) ...` with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Binomial coefficient as f64 (exact for all arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Exact `k! / (2^l l! (k-2l)!)` via u128 arithmetic. This is the number of
/// ways to pick `l` disjoint pairs out of `k` items, so it is an integer.
/// Falls back to floating point when the intermediate product overflows.
pub fn pair_partition_count(k: usize, l: usize) -> f64 {
    debug_assert!(2 * l <= k);
    // product formula: prod_{i=0}^{l-1} C(k-2i, 2) / l! * ... easier to build
    // incrementally: c(k,l) = c(k-2, l-1) * (k choose 2) style recursion is
    // quadratic; use the direct factorial ratio in u128 when it fits.
    let mut num: u128 = 1;
    let mut ok = true;
    for i in (k - 2 * l + 1)..=k {
        num = match num.checked_mul(i as u128) {
            Some(v) => v,
            None => {
                ok = false;
                break;
            }
        };
    }
    if ok {
        let mut den: u128 = 1 << l;
        for i in 1..=l {
            den *= i as u128;
        }
        // the ratio is exact by the combinatorial interpretation
        return (num / den) as f64;
    }
    let mut acc = 0.0f64;
    for i in (k - 2 * l + 1)..=k {
        acc += (i as f64).ln();
    }
    acc -= (l as f64) * std::f64::consts::LN_2;
    for i in 1..=l {
        acc -= (i as f64).ln();
    }
    acc.exp()
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` for (numerically) singular systems.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[piv * n + col].abs() {
                piv = row;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * x[j];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

/// Slope of `ln y` against `ln x`; all entries must be positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ls_slope(&lx, &ly)
}

/// Nodes and weights of the `n`-point Gauss-Laguerre rule for
/// `int_0^inf f(y) e^{-y} dy ~= sum w_i f(y_i)`.
///
/// Newton iteration on the Laguerre recurrence, initial guesses as in the
/// classical gaulag routine. Exact for polynomials of degree `< 2n`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut z = if i == 0 {
            3.0 / (1.0 + 2.4 * n as f64)
        } else if i == 1 {
            nodes[0] + 15.0 / (1.0 + 2.5 * n as f64)
        } else {
            let ai = i as f64 - 1.0;
            nodes[i - 1]
                + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (nodes[i - 1] - nodes[i - 2])
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate L_n and its derivative at z via the recurrence
            let mut p1 = 1.0f64;
            let mut p2 = 0.0f64;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = (n as f64) * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = -1.0 / (pp * n as f64 * poly_laguerre(n - 1, z));
    }
    (nodes, weights)
}

fn poly_laguerre(n: usize, x: f64) -> f64 {
    let mut p1 = 1.0f64;
    let mut p2 = 0.0f64;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0 - x) * p2 - jf * p3) / (jf + 1.0);
    }
    p1
}
