use wicklab::fourier::mu;
use wicklab::kernels::{star_capped, LatticeKernel};

fn annulus(n_lo: i32, m_hi: i32) -> LatticeKernel {
    LatticeKernel::from_fn(m_hi, |p| {
        let r2 = p.0 * p.0 + p.1 * p.1;
        if r2 > n_lo * n_lo && r2 <= m_hi * m_hi { 0.5 / mu(p) } else { 0.0 }
    })
}

fn boost(n_lo: i32, m_hi: i32, gamma: f64, beta: f64, lambda: f64, cap: i32, tol: f64) -> (f64, usize) {
    let a = annulus(n_lo, m_hi);
    let c = lambda * gamma * gamma;
    let mass = a.mass();
    // crude tail bound (c*mass)^{K+1}/(K+1)! * e^{c*mass} < tol
    let x = c * mass;
    let mut kcut = 1usize;
    let mut term = x; // x^{K+1}/(K+1)! at K = kcut-1... iterate
    while term * x.exp() >= tol && kcut < 200 {
        kcut += 1;
        term *= x / (kcut as f64 + 0.0);
    }
    let mut total = 1.0; // k = 0
    let mut coeff = 1.0;
    let mut power = LatticeKernel::delta();
    for k in 1..=kcut {
        power = star_capped(&power, &a, cap);
        coeff *= c / k as f64;
        let s: f64 = power.iter().map(|(m, v)| v * mu(m).powf(-beta)).sum();
        total += coeff * s;
    }
    (total, kcut)
}

fn main() {
    for &(beta, lambda) in &[(0.5, 6.0), (0.5, 16.0), (0.9, 12.0), (0.9, 28.0)] {
        let thresh = 8.0 * std::f64::consts::PI * beta;
        println!("beta={beta} lambda={lambda} (lambda*gamma^2 {} threshold {thresh:.2})",
                 lambda);
        let mut prev = None;
        for &m in &[4i32, 8, 16, 32] {
            let (v, k) = boost(1, m, 1.0, beta, lambda, 64, 1e-7);
            let incr = prev.map(|p: f64| v - p);
            println!("  M={m:3} value={v:.6} K={k} incr={:?}", incr);
            prev = Some(v);
        }
    }
}
