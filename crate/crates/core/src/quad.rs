//! Small quadrature and extrapolation helpers.

use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1] for `n` points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached 16-point rule used by the panel integrators.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Cached 8-point rule.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Trapezoid rule with Gregory end corrections through third differences.
/// Exact for cubics; falls back to the plain trapezoid below 8 samples.
pub fn gregory(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let trap: Complex64 =
        values.iter().sum::<Complex64>() - (values[0] + values[n - 1]) * 0.5;
    if n < 8 {
        return trap * h;
    }
    let f = values;
    let l = n - 1;
    let d1 = f[1] - f[0];
    let d2 = f[2] - f[1] * 2.0 + f[0];
    let d3 = f[3] - f[2] * 3.0 + f[1] * 3.0 - f[0];
    let b1 = f[l] - f[l - 1];
    let b2 = f[l] - f[l - 1] * 2.0 + f[l - 2];
    let b3 = f[l] - f[l - 1] * 3.0 + f[l - 2] * 3.0 - f[l - 3];
    let corr = (b1 - d1) * (1.0 / 12.0) + (b2 + d2) * (1.0 / 24.0) + (b3 - d3) * (19.0 / 720.0);
    (trap - corr) * h
}

/// Polynomial extrapolation to `x = 0` through `(xs[i], ys[i])` (Neville).
/// Returns the value and the difference between the two highest orders.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len();
    assert_eq!(n, ys.len());
    let mut table: Vec<Complex64> = ys.to_vec();
    let mut prev_top = table[n - 1];
    for level in 1..n {
        for i in (level..n).rev() {
            let xi = xs[i];
            let xj = xs[i - level];
            table[i] = (table[i] * xj - table[i - 1] * xi) / (xj - xi);
        }
        if level == n - 1 {
            prev_top = table[n - 2];
        }
    }
    let best = table[n - 1];
    (best, (best - prev_top).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gregory_exact_for_cubic() {
        let n = 21;
        let h = 0.1;
        let v: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                Complex64::new(x * x * x - 2.0 * x, x * x)
            })
            .collect();
        let exact = Complex64::new(16.0 / 4.0 - 4.0, 8.0 / 3.0);
        assert!((gregory(&v, h) - exact).norm() < 1e-13);
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<Complex64> = xs
            .iter()
            .map(|&x| Complex64::new(1.0 + x - 3.0 * x * x, 0.0))
            .collect();
        let (v, err) = extrapolate_to_zero(&xs, &ys);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(err < 1e-12);
    }
}
