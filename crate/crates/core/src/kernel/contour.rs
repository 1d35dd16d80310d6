//! Integration of `(1/2pi) * integral f(k) dk` along contours in the complex
//! k-plane on which the symbol `exp(alpha t k^p)` decays.

use num_complex::Complex64;

use super::EvolutionSpec;

/// Drop contributions below `exp(-LOG_DROP)` times the integrand peak.
const LOG_DROP: f64 = 42.0;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Contour {
    /// `k = s + i c`.
    Line { c: f64 },
    /// `k = s + i delta tanh((s - s0) / sigma)`; `delta` carries the sign.
    Tanh { delta: f64, s0: f64, sigma: f64 },
}

impl Contour {
    pub(crate) fn point(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Contour::Line { c } => (Complex64::new(s, c), Complex64::new(1.0, 0.0)),
            Contour::Tanh { delta, s0, sigma } => {
                let th = ((s - s0) / sigma).tanh();
                let dk = Complex64::new(1.0, delta * (1.0 - th * th) / sigma);
                (Complex64::new(s, delta * th), dk)
            }
        }
    }

    /// Imaginary part where the contour crosses `Re k = 0`.
    pub(crate) fn height_at_origin(&self) -> f64 {
        self.point(0.0).0.im
    }
}

/// Quadrature nodes `k_j` with weights `k'(s_j) ds / 2pi` for a truncated
/// trapezoid rule along a contour.
pub(crate) struct ContourRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

fn log_modulus(spec: &EvolutionSpec, t: f64, k: Complex64) -> f64 {
    (spec.alpha() * t * k.powu(spec.p())).re
}

/// Log of the integrand envelope at parameter `s`, including the worst-case
/// growth `exp(|Im k| x_span)` of the Fourier factor.
fn envelope(spec: &EvolutionSpec, t: f64, contour: &Contour, x_span: f64, s: f64) -> f64 {
    let (k, _) = contour.point(s);
    log_modulus(spec, t, k) + k.im.abs() * x_span
}

/// Truncation point on one side (`sign = +-1`) beyond which the envelope
/// stays below `level`, starting the outward walk at `start`.
fn cutoff(spec: &EvolutionSpec, t: f64, contour: &Contour, x_span: f64, sign: f64, level: f64, start: f64, unit: f64) -> f64 {
    let f = |s: f64| envelope(spec, t, contour, x_span, sign * s);
    let mut lo = start;
    let mut hi = start.max(unit / 8.0);
    let mut below_run = 0;
    let mut first_below = f64::NAN;
    // Walk outwards by doublings until two consecutive probes are below level.
    for _ in 0..200 {
        if f(hi) < level {
            if below_run == 0 {
                first_below = hi;
            }
            below_run += 1;
            if below_run == 2 {
                break;
            }
        } else {
            below_run = 0;
            lo = hi;
        }
        hi *= 2.0;
    }
    let mut hi = first_below;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Integration range `[s_lo, s_hi]` and the envelope peak.
pub(crate) fn range(spec: &EvolutionSpec, t: f64, contour: &Contour, x_span: f64) -> (f64, f64, f64) {
    let height = match *contour {
        Contour::Line { c } => c.abs(),
        Contour::Tanh { delta, .. } => delta.abs(),
    };
    let unit = (1.0 / spec.width(t)).max(height);
    let probes: Vec<(f64, f64)> = (-64..=64)
        .map(|j| {
            let s = unit * j as f64 / 8.0;
            (s, envelope(spec, t, contour, x_span, s))
        })
        .collect();
    let peak = probes.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let level = peak - LOG_DROP;
    let start = |sign: f64| {
        probes
            .iter()
            .filter(|(s, v)| s * sign >= 0.0 && *v >= level)
            .map(|(s, _)| s.abs())
            .fold(0.0, f64::max)
    };
    let hi = cutoff(spec, t, contour, x_span, 1.0, level, start(1.0), unit);
    let lo = cutoff(spec, t, contour, x_span, -1.0, level, start(-1.0), unit);
    (-lo, hi, peak)
}

/// Largest angular frequency of `exp(alpha t k^p + i k x)` along the
/// contour for `|x| <= x_span`, sampled on the integration range.
fn max_frequency(spec: &EvolutionSpec, t: f64, contour: &Contour, x_span: f64, lo: f64, hi: f64) -> f64 {
    let p = spec.p();
    let a = spec.alpha() * t * p as f64;
    let samples = 512;
    let mut omega: f64 = 0.0;
    for j in 0..=samples {
        let s = lo + (hi - lo) * j as f64 / samples as f64;
        let (k, dk) = contour.point(s);
        let d = (a * k.powu(p - 1)) * dk;
        omega = omega.max(d.norm() + x_span * dk.norm());
    }
    omega
}

/// Trapezoid rule for `(1/2pi) integral f(k) dk` along `contour`, accurate for
/// integrands `S(k) e^{ikx} r(k)` with `|x| <= x_span` and `r` slowly varying.
/// `max_ds` caps the step, e.g. to resolve a nearby pole.
pub(crate) fn rule(spec: &EvolutionSpec, t: f64, contour: Contour, x_span: f64, max_ds: f64) -> ContourRule {
    let (lo, hi, _) = range(spec, t, &contour, x_span);
    let omega = max_frequency(spec, t, &contour, x_span, lo, hi).max(1e-300);
    let mut ds = (std::f64::consts::PI / (2.0 * omega)).min(max_ds);
    if let Contour::Tanh { sigma, .. } = contour {
        ds = ds.min(sigma / 4.0);
    }
    let n = ((hi - lo) / ds).ceil() as usize + 1;
    let ds = (hi - lo) / (n - 1) as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for j in 0..n {
        let s = lo + j as f64 * ds;
        let (k, dk) = contour.point(s);
        let end = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        nodes.push(k);
        weights.push(dk * (end * ds / (2.0 * std::f64::consts::PI)));
    }
    ContourRule { nodes, weights }
}

/// `J(c) = (1/2pi) integral |S(s + ic)| ds`, the Paley-Wiener constant in
/// `|g(x)| <= e^{-cx} J(c)`.
pub(crate) fn line_envelope_integral(spec: &EvolutionSpec, t: f64, c: f64) -> f64 {
    let contour = Contour::Line { c };
    let (lo, hi, _) = range(spec, t, &contour, 0.0);
    let n = 4096;
    let ds = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for j in 0..=n {
        let s = lo + j as f64 * ds;
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        sum += w * log_modulus(spec, t, Complex64::new(s, c)).exp();
    }
    sum * ds / (2.0 * std::f64::consts::PI)
}

/// Wavenumber beyond which `|S(s + ic)|` is negligible relative to its peak.
pub(crate) fn line_cutoff(spec: &EvolutionSpec, t: f64, c: f64) -> f64 {
    let (lo, hi, _) = range(spec, t, &Contour::Line { c }, 0.0);
    lo.abs().max(hi.abs())
}
