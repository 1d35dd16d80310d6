//! Semigroup law of the kernels, growth of the total variation of the
//! finite-dimensional marginals, and the product-variation gate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid1D;
use crate::kernel::{self, compute_kernel, total_variation, EvolutionSpec, SampledKernel};
use crate::projective::TimeGrid;

/// Per-slice variation must exceed `1 + GATE_MARGIN` before blow-up is reported.
pub const GATE_MARGIN: f64 = 1e-4;

/// Default bound on `sum log |mu_n|` for the product gate.
pub const DEFAULT_LOG_THRESHOLD: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ProjectiveLimitPossible,
    NoBoundedComplexMeasure,
}

/// Total variation of the marginal on a uniform partition into `n_slices`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub n_slices: usize,
    pub per_slice_tv: f64,
    pub total: f64,
    pub verdict: Verdict,
}

/// Kernel family probed for the semigroup law on a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionSemigroupProbe {
    spec: EvolutionSpec,
    grid: Grid1D,
    times: Vec<f64>,
}

impl ConvolutionSemigroupProbe {
    pub fn new(spec: EvolutionSpec, grid: Grid1D, times: Vec<f64>) -> Result<Self> {
        for &t in &times {
            spec.check_time(t)?;
        }
        Ok(Self { spec, grid, times })
    }

    pub fn spec(&self) -> &EvolutionSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Largest residual over all ordered pairs of probe times.
    pub fn max_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &s in &self.times {
            for &t in &self.times {
                worst = worst.max(chapman_kolmogorov_residual(self, s, t)?);
            }
        }
        Ok(worst)
    }
}

/// Full linear convolution `d_s = sum_j a_j b_{s-j}`.
fn linear_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len() + b.len() - 1;
    let m = len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); m];
    let mut fb = fa.clone();
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let mut pair = fft::FftPair::new(m);
    pair.forward(&mut fa);
    pair.forward(&mut fb);
    fa.iter_mut().zip(&fb).for_each(|(x, y)| *x *= y);
    pair.inverse_normalized(&mut fa);
    fa.truncate(len);
    fa
}

/// `(a * b)(x_i)` on the common grid, via zero-padded transforms.
///
/// When the grid lattice contains the origin the differences `x_i - x_j` are
/// grid points and the discrete convolution is exact-index. Otherwise the
/// half-cell offset is applied as a Fourier phase, which assumes both kernels
/// are negligible at the grid edges.
pub fn convolve_kernels(a: &SampledKernel, b: &SampledKernel) -> Result<SampledKernel> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    if a.spec() != b.spec() {
        return Err(Error::SpecMismatch(format!("{:?} vs {:?}", a.spec(), b.spec())));
    }
    let grid = a.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let values: Vec<Complex64> = match grid.origin_offset() {
        Some(m0) => {
            let d = linear_convolve(a.values(), b.values());
            (0..n)
                .map(|i| {
                    let s = i as i64 - m0;
                    if s >= 0 && (s as usize) < d.len() {
                        d[s as usize] * h
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        None => {
            let m = (2 * n).next_power_of_two();
            let mut fa = vec![Complex64::new(0.0, 0.0); m];
            let mut fb = fa.clone();
            fa[..n].copy_from_slice(a.values());
            fb[..n].copy_from_slice(b.values());
            let mut pair = fft::FftPair::new(m);
            pair.forward(&mut fa);
            pair.forward(&mut fb);
            let dk = 2.0 * std::f64::consts::PI / (m as f64 * h);
            let x0 = grid.x_min();
            for (j, (x, y)) in fa.iter_mut().zip(&fb).enumerate() {
                let signed = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
                *x *= y * Complex64::from_polar(1.0, -signed * dk * x0);
            }
            pair.inverse_normalized(&mut fa);
            fa[..n].iter().map(|v| v * h).collect()
        }
    };
    let tail = if a.spec().is_integrable() {
        let tv_a = kernel::abs_integral(a.values(), h);
        let tv_b = kernel::abs_integral(b.values(), h);
        a.tail_mass_bound() * tv_b + b.tail_mass_bound() * tv_a + a.tail_mass_bound() * b.tail_mass_bound()
    } else {
        f64::INFINITY
    };
    Ok(SampledKernel::from_parts(
        a.spec().clone(),
        a.t() + b.t(),
        grid.clone(),
        values,
        tail,
    ))
}

/// `sup_x |(g_s * g_t)(x) - g_{s+t}(x)|` over the probe grid.
///
/// `g_s` is sampled on a lattice through the origin covering twice the probe
/// width on each side and `g_t` on the probe lattice extended by one width on
/// each side, so every difference `x_i - z_j` is a sample of `g_t`.
pub fn chapman_kolmogorov_residual(probe: &ConvolutionSemigroupProbe, s: f64, t: f64) -> Result<f64> {
    let spec = probe.spec();
    spec.check_time(s)?;
    spec.check_time(t)?;
    spec.check_time(s + t)?;
    let grid = probe.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let lattice = Grid1D::new(-2.0 * n as f64 * h, 2.0 * n as f64 * h, 4 * n)?;
    let outer = grid.extended(n, n);
    let a = compute_kernel(spec, s, &lattice)?;
    let b = compute_kernel(spec, t, &outer)?;
    let direct = compute_kernel(spec, s + t, grid)?;
    let d = linear_convolve(a.values(), b.values());
    Ok(direct
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (d[i + 3 * n] * h - v).norm())
        .fold(0.0, f64::max))
}

/// Variation of the marginal on the uniform partition of `[0, t]` into
/// `n_slices`. Every increment has the same variation as `g_1` by scaling, so
/// the single-slice value is computed once at `t = 1` on `grid`.
pub fn marginal_variation(spec: &EvolutionSpec, t: f64, n_slices: usize, grid: &Grid1D) -> Result<VariationReport> {
    if n_slices == 0 {
        return Err(Error::InvalidTimeGrid("n_slices must be at least 1".into()));
    }
    spec.check_time(t / n_slices as f64)?;
    if !spec.is_integrable() {
        return Err(Error::NotIntegrable(format!(
            "alpha = {} has zero real part",
            spec.alpha()
        )));
    }
    let per_slice_tv = total_variation(&compute_kernel(spec, 1.0, grid)?)?;
    Ok(report(n_slices, per_slice_tv))
}

fn report(n_slices: usize, per_slice_tv: f64) -> VariationReport {
    let total = per_slice_tv.powi(n_slices as i32);
    let verdict = if per_slice_tv > 1.0 + GATE_MARGIN {
        Verdict::NoBoundedComplexMeasure
    } else {
        Verdict::ProjectiveLimitPossible
    };
    VariationReport {
        n_slices,
        per_slice_tv,
        total,
        verdict,
    }
}

/// `|mu_J|` for the pinned marginal on an arbitrary time grid: the product of
/// the per-increment variations, each equal to the variation of `g_1`.
pub fn partition_variation(spec: &EvolutionSpec, times: &TimeGrid, grid: &Grid1D) -> Result<f64> {
    let increments = times.increments();
    for &tau in &increments {
        spec.check_time(tau)?;
    }
    let per_slice = marginal_variation(spec, 1.0, 1, grid)?.per_slice_tv;
    Ok(increments.iter().map(|_| per_slice).product())
}

/// Finite-horizon surrogate for convergence of `prod |mu_n|`.
pub fn product_variation_gate(tv_list: &[f64]) -> Result<Verdict> {
    product_variation_gate_with(tv_list, DEFAULT_LOG_THRESHOLD)
}

pub fn product_variation_gate_with(tv_list: &[f64], log_threshold: f64) -> Result<Verdict> {
    let mut sum = 0.0;
    for (index, &value) in tv_list.iter().enumerate() {
        if !(value >= 0.0) {
            return Err(Error::NegativeVariation { index, value });
        }
        sum += value.ln();
    }
    Ok(if sum <= log_threshold {
        Verdict::ProjectiveLimitPossible
    } else {
        Verdict::NoBoundedComplexMeasure
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_examples() {
        assert_eq!(
            product_variation_gate(&[1.0; 50]).unwrap(),
            Verdict::ProjectiveLimitPossible
        );
        assert_eq!(
            product_variation_gate(&[1.1; 100]).unwrap(),
            Verdict::NoBoundedComplexMeasure
        );
        assert_eq!(product_variation_gate(&[]).unwrap(), Verdict::ProjectiveLimitPossible);
        assert!(matches!(
            product_variation_gate(&[1.0, -0.5]),
            Err(Error::NegativeVariation { index: 1, .. })
        ));
        assert!(product_variation_gate(&[f64::NAN]).is_err());
    }

    #[test]
    fn linear_convolution_small() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let b = [Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0), Complex64::new(5.0, 0.0)];
        let d = linear_convolve(&a, &b);
        let expect = [3.0, 10.0, 13.0, 10.0];
        for (x, e) in d.iter().zip(expect) {
            assert!((x.re - e).abs() < 1e-12 && x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn verdict_uses_margin() {
        assert_eq!(report(10, 1.00005).verdict, Verdict::ProjectiveLimitPossible);
        assert_eq!(report(1, 1.2).verdict, Verdict::NoBoundedComplexMeasure);
    }
}
