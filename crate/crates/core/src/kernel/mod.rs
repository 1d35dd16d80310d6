//! Fundamental solutions `g_t(x) = (1/2pi) integral e^{ikx} e^{alpha t k^p} dk`
//! of `du/dt = (-i)^p alpha d^p u / dx^p`.

mod contour;
mod sample;
mod tails;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::quad::gregory;

pub use sample::{decay_radius, MAX_TRANSFORM_LEN};

/// Largest admissible tail mass bound for a sampled kernel.
pub const TAIL_THRESHOLD: f64 = 1e-6;

/// Default smallest admissible time.
pub const DEFAULT_T_EPS: f64 = 1e-6;

/// Order `p` and coefficient `alpha` of the evolution equation, with the
/// smallest time `t_eps` at which kernels are sampled.
///
/// Admissible when `p >= 2`, `alpha != 0`, `Re alpha <= 0` for even `p` and
/// `Re alpha = 0` for odd `p`, i.e. `|exp(alpha t k^p)| <= 1` on the real
/// axis. The free Schrodinger kernel with Planck constant `hbar` is `p = 2`,
/// `alpha = -i hbar / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct EvolutionSpec {
    p: u32,
    alpha: Complex64,
    t_eps: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    p: u32,
    alpha: Complex64,
    #[serde(default = "default_t_eps")]
    t_eps: f64,
}

fn default_t_eps() -> f64 {
    DEFAULT_T_EPS
}

impl TryFrom<RawSpec> for EvolutionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        EvolutionSpec::with_t_eps(raw.p, raw.alpha, raw.t_eps)
    }
}

/// How the symbol behaves on the real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolClass {
    /// `Re alpha < 0`: the symbol decays on the real axis.
    Decaying,
    /// Odd `p`, `alpha = i beta`; `dir = sign(beta)` is the side on which
    /// the kernel decays.
    OddDispersive { dir: f64 },
    /// Even `p`, `alpha = i beta`; unimodular kernel of Schrodinger type.
    EvenDispersive { dir: f64 },
}

impl EvolutionSpec {
    pub fn new(p: u32, alpha: Complex64) -> Result<Self> {
        Self::with_t_eps(p, alpha, DEFAULT_T_EPS)
    }

    pub fn with_t_eps(p: u32, alpha: Complex64, t_eps: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InadmissibleSpec(format!("order p = {p} must be at least 2")));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() || alpha.norm() == 0.0 {
            return Err(Error::InadmissibleSpec(format!(
                "alpha = {alpha} must be finite and nonzero"
            )));
        }
        if !(t_eps.is_finite() && t_eps > 0.0) {
            return Err(Error::InadmissibleSpec(format!("t_eps = {t_eps} must be positive")));
        }
        // Round-off sized real parts are treated as exactly zero.
        let mut alpha = alpha;
        if alpha.re.abs() <= 1e-14 * alpha.norm() {
            alpha.re = 0.0;
        }
        if p % 2 == 0 && alpha.re > 0.0 {
            return Err(Error::InadmissibleSpec(format!(
                "even order p = {p} requires Re alpha <= 0, got {}",
                alpha.re
            )));
        }
        if p % 2 == 1 && alpha.re != 0.0 {
            return Err(Error::InadmissibleSpec(format!(
                "odd order p = {p} requires Re alpha = 0, got {}",
                alpha.re
            )));
        }
        Ok(Self { p, alpha, t_eps })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn t_eps(&self) -> f64 {
        self.t_eps
    }

    pub fn class(&self) -> SymbolClass {
        if self.alpha.re < 0.0 {
            SymbolClass::Decaying
        } else if self.p % 2 == 1 {
            SymbolClass::OddDispersive {
                dir: self.alpha.im.signum(),
            }
        } else {
            SymbolClass::EvenDispersive {
                dir: self.alpha.im.signum(),
            }
        }
    }

    /// True when `|g_t|` is integrable, i.e. the symbol decays.
    pub fn is_integrable(&self) -> bool {
        self.alpha.re < 0.0
    }

    /// `exp(alpha t k^p)`.
    pub fn symbol(&self, t: f64, k: f64) -> Complex64 {
        (self.alpha * (t * k.powi(self.p as i32))).exp()
    }

    /// Natural length scale `(|alpha| t)^{1/p}` of `g_t`.
    pub fn width(&self, t: f64) -> f64 {
        (self.alpha.norm() * t).powf(1.0 / self.p as f64)
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < self.t_eps {
            return Err(Error::TimeTooSmall {
                t,
                t_eps: self.t_eps,
            });
        }
        Ok(())
    }
}

/// Wavenumber beyond which `|exp(alpha t k^p)|` is below `e^{-42}` on the
/// real axis. Only meaningful for decaying symbols.
pub fn bandwidth(spec: &EvolutionSpec, t: f64) -> f64 {
    contour::line_cutoff(spec, t, 0.0)
}

/// `g_t` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledKernel {
    spec: EvolutionSpec,
    t: f64,
    grid: Grid1D,
    values: Vec<Complex64>,
    tail_mass_bound: f64,
}

impl SampledKernel {
    pub(crate) fn from_parts(
        spec: EvolutionSpec,
        t: f64,
        grid: Grid1D,
        values: Vec<Complex64>,
        tail_mass_bound: f64,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self {
            spec,
            t,
            grid,
            values,
            tail_mass_bound,
        }
    }

    pub fn spec(&self) -> &EvolutionSpec {
        &self.spec
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Bound on `integral |g|` outside the grid. Infinite for unimodular
    /// symbols, whose kernels are not absolutely integrable.
    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    /// Writes `x,re,im` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        crate::io::write_samples_csv(out, &self.grid, &self.values)
    }
}

/// Samples `g_t` on `grid`.
pub fn compute_kernel(spec: &EvolutionSpec, t: f64, grid: &Grid1D) -> Result<SampledKernel> {
    spec.check_time(t)?;
    let values = sample::sample(spec, t, grid)?;
    let tail = if spec.is_integrable() {
        tails::envelope_bound(spec, grid, &values)
    } else {
        f64::INFINITY
    };
    if spec.is_integrable() && tail > TAIL_THRESHOLD {
        return Err(Error::GridTooNarrow {
            tail,
            threshold: TAIL_THRESHOLD,
        });
    }
    Ok(SampledKernel::from_parts(spec.clone(), t, grid.clone(), values, tail))
}

/// `integral g_t dx`: end-corrected trapezoid over the grid plus the two
/// outer tails integrated in Fourier space.
pub fn kernel_mass(k: &SampledKernel) -> Complex64 {
    let grid = k.grid();
    let n = grid.n_points();
    let inner = gregory(k.values(), grid.spacing());
    let (left, right) =
        tails::spectral_tails(k.spec(), k.t(), grid, grid.point(0), grid.point(n - 1));
    inner + left + right
}

/// `integral |g_t| dx` over the grid. Real kernels are integrated cell by
/// cell through a local degree-5 interpolant whose sign changes are located
/// exactly, so the kinks of `|g|` at zeros cost no accuracy.
pub fn total_variation(k: &SampledKernel) -> Result<f64> {
    if !k.spec().is_integrable() {
        return Err(Error::NotIntegrable(format!(
            "alpha = {} has zero real part, so |g_t| decays too slowly to be integrable",
            k.spec().alpha()
        )));
    }
    Ok(abs_integral(k.values(), k.grid().spacing()))
}

pub(crate) fn abs_integral(values: &[Complex64], h: f64) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let real = values.iter().all(|v| v.im.abs() <= 1e-9 * scale);
    if !real || values.len() < 6 {
        // |g| is smooth away from zeros, which complex kernels generically avoid.
        let n = values.len();
        let sum: f64 = values.iter().map(|v| v.norm()).sum::<f64>()
            - 0.5 * (values[0].norm() + values[n - 1].norm());
        return sum * h;
    }
    let f: Vec<f64> = values.iter().map(|v| v.re).collect();
    (0..f.len() - 1).map(|i| cell_abs_integral(&f, i)).sum::<f64>() * h
}

/// `integral_0^1 |P(u)| du` for the degree-5 interpolant of `f` through the
/// six samples nearest to cell `[i, i + 1]`, in units of the spacing.
fn cell_abs_integral(f: &[f64], i: usize) -> f64 {
    const STENCIL: usize = 6;
    let start = i.saturating_sub(2).min(f.len() - STENCIL);
    let nodes: Vec<f64> = (0..STENCIL).map(|j| (start + j) as f64 - i as f64).collect();
    let vals = &f[start..start + STENCIL];
    let poly = |u: f64| -> f64 {
        let mut sum = 0.0;
        for j in 0..STENCIL {
            let mut w = vals[j];
            for m in 0..STENCIL {
                if m != j {
                    w *= (u - nodes[m]) / (nodes[j] - nodes[m]);
                }
            }
            sum += w;
        }
        sum
    };
    let gauss = |a: f64, b: f64| -> f64 {
        let (x, w) = crate::quad::gl8();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        x.iter().zip(w).map(|(x, w)| w * poly(mid + half * x)).sum::<f64>() * half
    };
    let (a, b) = (f[i], f[i + 1]);
    if a * b >= 0.0 {
        return gauss(0.0, 1.0).abs();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if poly(mid) * a > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    gauss(0.0, root).abs() + gauss(root, 1.0).abs()
}

/// `max_i |g_t(x_i) - t^{-1/p} g_1(t^{-1/p} x_i)|`.
pub fn scaling_check(spec: &EvolutionSpec, t: f64, grid: &Grid1D) -> Result<f64> {
    spec.check_time(1.0)?;
    let direct = compute_kernel(spec, t, grid)?;
    let factor = t.powf(-1.0 / spec.p() as f64);
    let unit = compute_kernel(spec, 1.0, &grid.scaled(factor)?)?;
    Ok(direct
        .values()
        .iter()
        .zip(unit.values())
        .map(|(a, b)| (a - b * factor).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat() -> EvolutionSpec {
        EvolutionSpec::new(2, Complex64::new(-0.5, 0.0)).unwrap()
    }

    fn airy() -> EvolutionSpec {
        EvolutionSpec::new(3, Complex64::new(0.0, 1.0 / 3.0)).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(EvolutionSpec::new(1, Complex64::new(-1.0, 0.0)).is_err());
        assert!(EvolutionSpec::new(2, Complex64::new(0.1, 0.0)).is_err());
        assert!(EvolutionSpec::new(3, Complex64::new(-0.1, 1.0)).is_err());
        assert!(EvolutionSpec::new(4, Complex64::new(0.0, 0.0)).is_err());
        assert!(EvolutionSpec::new(4, Complex64::new(-1.0, 2.0)).is_ok());
        assert!(EvolutionSpec::new(2, Complex64::new(0.0, -1.0)).is_ok());
    }

    #[test]
    fn zero_time_rejected() {
        let g = Grid1D::symmetric(10.0, 256).unwrap();
        assert!(matches!(
            compute_kernel(&heat(), 0.0, &g),
            Err(Error::TimeTooSmall { .. })
        ));
    }

    #[test]
    fn heat_kernel_peak() {
        let g = Grid1D::symmetric(10.0, 256).unwrap();
        let k = compute_kernel(&heat(), 1.0, &g).unwrap();
        let v = k.values()[128];
        assert!((v.re - 0.398_942_280_401_432_7).abs() < 1e-12, "{v}");
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn airy_at_origin() {
        let g = Grid1D::new(-8.0, 4.0, 1536).unwrap();
        let k = compute_kernel(&airy(), 1.0, &g).unwrap();
        let v = k.values()[1024];
        assert!((v.re - 0.355_028_053_887_817_2).abs() < 1e-10, "{v}");
    }

    #[test]
    fn narrow_grid_rejected() {
        let g = Grid1D::symmetric(2.0, 64).unwrap();
        assert!(matches!(
            compute_kernel(&heat(), 1.0, &g),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn unimodular_kernel_not_integrable() {
        let spec = EvolutionSpec::new(2, Complex64::new(0.0, -1.0)).unwrap();
        let g = Grid1D::symmetric(10.0, 512).unwrap();
        let k = compute_kernel(&spec, 1.0, &g).unwrap();
        assert!(matches!(total_variation(&k), Err(Error::NotIntegrable(_))));
        assert!(k.tail_mass_bound().is_infinite());
    }

    #[test]
    fn sign_changes_integrated_exactly() {
        // |x^3 - x| on [-2, 2) sampled at 0.25: piecewise polynomial of degree 3.
        let v: Vec<Complex64> = (0..=16)
            .map(|i| {
                let x = -2.0 + 0.25 * i as f64;
                Complex64::new(x * x * x - x, 0.0)
            })
            .collect();
        assert!((abs_integral(&v, 0.25) - 5.0).abs() < 1e-13);
    }
}
