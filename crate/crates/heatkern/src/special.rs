//! Special functions and combinatorial helpers.

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as an exact integer (small arguments only).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// (2k-1)!! with the convention (-1)!! = 1.
pub fn double_factorial_odd(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64)
}

/// Exponentially scaled modified Bessel function `e^{-z} I_ν(z)` for `ν > -1`, `z ≥ 0`.
///
/// Summed from the power series, whose terms are all positive.
pub fn bessel_i_scaled(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let lz = (0.5 * z).ln();
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let log_term = (2.0 * kf + nu) * lz - ln_gamma(kf + 1.0) - ln_gamma(kf + nu + 1.0) - z;
        let term = log_term.exp();
        sum += term;
        if kf > 0.5 * z && term <= 1e-17 * sum {
            break;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    sum
}

/// Bernoulli numbers B_0..=B_n (B_1 = -1/2).
pub fn bernoulli(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut s = 0.0;
        for k in 0..m {
            s += binomial(m + 1, k) as f64 * b[k];
        }
        b[m] = -s / (m as f64 + 1.0);
    }
    b
}
