//! Mass of the kernel outside a finite window: a sample-based envelope bound
//! used for grid validation, and exact spectral tail integrals used by
//! `kernel_mass`.

use num_complex::Complex64;

use super::contour::{self, Contour};
use super::sample::{even_contour, line_shift};
use super::{EvolutionSpec, SymbolClass};
use crate::grid::Grid1D;

/// Envelope-extrapolated bound on `integral |g|` outside the grid for a
/// decaying symbol. The two outermost octiles on each side fix a stretched
/// exponential `A exp(-C |x|^q)` with the saddle-point exponent
/// `q = p / (p - 1)`, which is then integrated to infinity.
pub(crate) fn envelope_bound(spec: &EvolutionSpec, grid: &Grid1D, values: &[Complex64]) -> f64 {
    let n = values.len();
    let oct = (n / 8).max(1);
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let q = spec.p() as f64 / (spec.p() as f64 - 1.0);
    let max_norm = |vs: &[Complex64]| vs.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let side = |outer: &[Complex64], inner: &[Complex64], u_inner: f64, u_outer: f64, u_edge: f64| -> f64 {
        let m_out = max_norm(outer);
        let m_in = max_norm(inner);
        let fallback = m_out * grid.length();
        if m_out <= 1e-14 * peak {
            return fallback;
        }
        if u_inner <= 0.0 || u_outer <= u_inner || m_in <= m_out {
            // Window not reaching outward on this side, or no visible decay.
            return fallback.max(m_out * 1e6);
        }
        let c = (m_in / m_out).ln() / (u_outer.powf(q) - u_inner.powf(q));
        let at_edge = m_out * (-c * (u_edge.powf(q) - u_outer.powf(q))).exp();
        (at_edge / (c * q * u_edge.powf(q - 1.0))).max(m_out * 1e-3 * grid.spacing())
    };

    let right = side(
        &values[n - oct..],
        &values[n - 2 * oct..n - oct],
        grid.point(n - 2 * oct),
        grid.point(n - oct),
        grid.x_max(),
    );
    let left = side(
        &values[..oct],
        &values[oct..2 * oct],
        -grid.point(2 * oct - 1),
        -grid.point(oct - 1),
        -grid.x_min(),
    );
    left + right
}

/// `(integral_{-inf}^{a} g, integral_{b}^{inf} g)` evaluated in Fourier space:
/// `int_b^inf e^{ikx} dx = i e^{ikb} / k` on a contour above the real axis,
/// `int_{-inf}^a e^{ikx} dx = -i e^{ika} / k` below it; crossing the pole at
/// `k = 0` adds the unit mass.
pub(crate) fn spectral_tails(spec: &EvolutionSpec, t: f64, grid: &Grid1D, a: f64, b: f64) -> (Complex64, Complex64) {
    let x_span = grid.max_abs().max(spec.width(t));
    let contour = match spec.class() {
        SymbolClass::Decaying => {
            let c = (0.5 / spec.width(t)).min(8.0 / x_span);
            Contour::Line { c }
        }
        SymbolClass::OddDispersive { dir } => Contour::Line {
            c: dir * line_shift(spec, t, grid),
        },
        SymbolClass::EvenDispersive { dir } => {
            even_contour(spec, t, x_span, dir, 1.0 / spec.width(t))
        }
    };
    let gap = contour.height_at_origin();
    let rule = contour::rule(spec, t, contour, x_span, gap.abs() / 5.0);
    let alpha_t = spec.alpha() * t;
    let p = spec.p();
    let i = Complex64::i();
    let mut left = Complex64::new(0.0, 0.0);
    let mut right = Complex64::new(0.0, 0.0);
    for (k, w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (alpha_t * k.powu(p)).exp() * w / k;
        left += -i * s * (i * k * a).exp();
        right += i * s * (i * k * b).exp();
    }
    let one = Complex64::new(1.0, 0.0);
    if gap > 0.0 {
        (one + left, right)
    } else {
        (left, one + right)
    }
}
