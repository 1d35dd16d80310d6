//! Sampling `g_t(x) = (1/2pi) integral e^{ikx} e^{alpha t k^p} dk` on a grid.

use num_complex::Complex64;
use rayon::prelude::*;

use super::contour::{self, Contour};
use super::{EvolutionSpec, SymbolClass};
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::grid::Grid1D;

/// Largest transform length the line sampler will allocate.
pub const MAX_TRANSFORM_LEN: usize = 1 << 23;

/// Relative size of the periodization error allowed in the line sampler.
const LOG_EPS: f64 = 39.0;

pub(crate) fn sample(spec: &EvolutionSpec, t: f64, grid: &Grid1D) -> Result<Vec<Complex64>> {
    match spec.class() {
        SymbolClass::Decaying => sample_line(spec, t, grid, 0.0),
        SymbolClass::OddDispersive { dir } => {
            let c = dir * line_shift(spec, t, grid);
            sample_line(spec, t, grid, c)
        }
        SymbolClass::EvenDispersive { dir } => Ok(sample_direct(spec, t, grid, dir)),
    }
}

/// Height of the shifted integration line: large enough to make the symbol
/// decay, small enough that `e^{c|x|}` stays harmless over the grid.
pub(crate) fn line_shift(spec: &EvolutionSpec, t: f64, grid: &Grid1D) -> f64 {
    let x_span = grid.max_abs().max(spec.width(t));
    (1.0 / spec.width(t)).min(8.0 / x_span)
}

/// Distance beyond which `|g_t(x)| < e^{-39} J(0)` for a decaying symbol.
pub fn decay_radius(spec: &EvolutionSpec, t: f64) -> f64 {
    let j0 = contour::line_envelope_integral(spec, t, 0.0).ln();
    let c0 = 0.25 / spec.width(t);
    (0..24)
        .map(|j| {
            let c = c0 * 2f64.powf(j as f64 / 2.0);
            let jc = contour::line_envelope_integral(spec, t, c)
                .max(contour::line_envelope_integral(spec, t, -c))
                .ln();
            (jc - j0 + LOG_EPS) / c
        })
        .fold(f64::INFINITY, f64::min)
}

/// Period needed on the line `Im k = c` (`c != 0`) for the kernel of an odd
/// dispersive symbol, which decays only on the side `sign(c)`.
fn dispersive_period(spec: &EvolutionSpec, t: f64, grid: &Grid1D, c: f64) -> f64 {
    let a = c.abs();
    let jc = contour::line_envelope_integral(spec, t, c).ln();
    // Image from the oscillatory side, damped by e^{-|c| L}.
    let from_slow_side = (LOG_EPS + 6.0 + jc.max(0.0)) / a;
    // Image from the decaying side, bounded through a steeper line c'.
    let x_worst = if c > 0.0 { grid.x_min() } else { -grid.x_max() };
    let from_fast_side = (1..24)
        .map(|j| {
            let cp = a * (1.0 + 0.25 * 2f64.powf(j as f64 / 2.0));
            let jcp = contour::line_envelope_integral(spec, t, c.signum() * cp).ln();
            (jcp - jc + LOG_EPS - cp * x_worst) / (cp - a)
        })
        .fold(f64::INFINITY, f64::min);
    from_slow_side.max(from_fast_side)
}

/// Transform on the line `Im k = c`: `g(x_j) = e^{-c x_j} (dk/2pi) sum_m
/// S(k_m + ic) e^{i k_m x_j}`, with an interior step `h / r` fine enough to
/// carry the symbol's bandwidth and a period long enough to suppress images.
fn sample_line(spec: &EvolutionSpec, t: f64, grid: &Grid1D, c: f64) -> Result<Vec<Complex64>> {
    let h = grid.spacing();
    let n = grid.n_points();
    let k_max = contour::line_cutoff(spec, t, c);
    let r = ((k_max * h / std::f64::consts::PI).ceil() as usize).max(1);
    let h_int = h / r as f64;

    let period = if c == 0.0 {
        grid.max_abs() + decay_radius(spec, t)
    } else {
        dispersive_period(spec, t, grid, c)
    };
    let cells = (period / h_int).ceil().max((r * n) as f64);
    if !cells.is_finite() || cells > MAX_TRANSFORM_LEN as f64 {
        return Err(Error::ResolutionLimit {
            requested: if cells.is_finite() { cells as usize } else { usize::MAX },
            max: MAX_TRANSFORM_LEN,
        });
    }
    let m_len = (cells as usize).next_power_of_two();
    if m_len > MAX_TRANSFORM_LEN {
        return Err(Error::ResolutionLimit {
            requested: m_len,
            max: MAX_TRANSFORM_LEN,
        });
    }
    let dk = 2.0 * std::f64::consts::PI / (m_len as f64 * h_int);
    let x0 = grid.x_min();
    let alpha_t = spec.alpha() * t;
    let p = spec.p();
    let half = m_len / 2;
    let mut buf: Vec<Complex64> = (0..m_len)
        .into_par_iter()
        .map(|m| {
            let signed = if m < half { m as f64 } else { m as f64 - m_len as f64 };
            let k = Complex64::new(signed * dk, c);
            (alpha_t * k.powu(p) + Complex64::i() * k * x0).exp()
        })
        .collect();
    let mut fft = FftPair::new(m_len);
    // Unnormalized inverse: sum_m buf[m] e^{+2 pi i m j / M}.
    fft.inverse_normalized(&mut buf);
    let scale = m_len as f64 * dk / (2.0 * std::f64::consts::PI);
    Ok((0..n)
        .map(|i| {
            let j = i * r;
            buf[j] * (scale * (-c * j as f64 * h_int).exp())
        })
        .collect())
}

/// Deformed contour for an even-order unimodular symbol: tilts into the
/// half-plane where `exp(i beta t k^p)` decays on each side of the origin.
pub(crate) fn even_contour(spec: &EvolutionSpec, t: f64, x_span: f64, dir: f64, s0: f64) -> Contour {
    let scale = 1.0 / spec.width(t);
    let delta = (0.5 * scale).min(10.0 / x_span.max(spec.width(t)));
    Contour::Tanh {
        delta: dir * delta,
        s0,
        sigma: scale,
    }
}

/// Pointwise trapezoid sums along a deformed contour, one per grid point.
fn sample_direct(spec: &EvolutionSpec, t: f64, grid: &Grid1D, dir: f64) -> Vec<Complex64> {
    let x_span = grid.max_abs();
    let contour = even_contour(spec, t, x_span, dir, 0.0);
    let rule = contour::rule(spec, t, contour, x_span, f64::INFINITY);
    let alpha_t = spec.alpha() * t;
    let p = spec.p();
    let weighted: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(k, w)| (alpha_t * k.powu(p)).exp() * w)
        .collect();
    grid.points()
        .par_iter()
        .map(|&x| {
            rule.nodes
                .iter()
                .zip(&weighted)
                .map(|(k, w)| (Complex64::i() * k * x).exp() * w)
                .sum()
        })
        .collect()
}
