//! The path functional on cylinder functions and the time-sliced
//! Feynman-Kac solver for `du/dt = (-i)^p alpha d^p u / dx^p + V u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::grid::Grid1D;
use crate::kernel::EvolutionSpec;
use crate::projective::{eval_lj, Atom, AtomicComplexMeasure, CylinderFunction, CylinderMarginal, EvalMethod};

/// Successive reference solutions must agree to this discrete L2 distance.
pub const REFERENCE_TOLERANCE: f64 = 1e-9;

/// Most step halvings attempted by the reference solver.
pub const MAX_HALVINGS: usize = 20;

/// Slack allowed when judging error monotonicity along a slice ladder.
pub const NOISE_ALLOWANCE: f64 = 0.05;

/// Evolution spec together with the time horizon of the paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFunctionalSpec {
    spec: EvolutionSpec,
    horizon: f64,
}

impl PathFunctionalSpec {
    pub fn new(spec: EvolutionSpec, horizon: f64) -> Result<Self> {
        spec.check_time(horizon)?;
        Ok(Self { spec, horizon })
    }

    pub fn spec(&self) -> &EvolutionSpec {
        &self.spec
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

#[derive(Deserialize)]
struct RawAtoms {
    atoms: Vec<Atom>,
    #[serde(default)]
    grid_samples: Option<Vec<Complex64>>,
}

#[derive(Serialize)]
struct AtomsJson<'a> {
    atoms: &'a [Atom],
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_samples: Option<&'a Vec<Complex64>>,
}

fn one_dimensional(atoms: Vec<Atom>) -> Result<AtomicComplexMeasure> {
    AtomicComplexMeasure::new(1, atoms)
}

/// Bounded potential `V(x) = sum_j w_j e^{i y_j x}`. JSON: `{atoms: [{y: [..], w: [re, im]}]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    fourier: AtomicComplexMeasure,
}

impl PotentialSpec {
    pub fn new(fourier: AtomicComplexMeasure) -> Result<Self> {
        if fourier.dimension() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: fourier.dimension(),
            });
        }
        Ok(Self { fourier })
    }

    pub fn zero() -> Self {
        Self {
            fourier: AtomicComplexMeasure::zero(1).expect("dimension 1"),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            fourier: AtomicComplexMeasure::dirac(vec![0.0], c).expect("dimension 1"),
        }
    }

    /// `amplitude * cos(frequency x)` as a conjugate-symmetric atom pair.
    pub fn cosine(amplitude: Complex64, frequency: f64) -> Self {
        let half = amplitude * 0.5;
        Self {
            fourier: one_dimensional(vec![
                Atom::new(vec![frequency], half),
                Atom::new(vec![-frequency], half),
            ])
            .expect("dimension 1"),
        }
    }

    pub fn fourier(&self) -> &AtomicComplexMeasure {
        &self.fourier
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.fourier.evaluate(&[x]).expect("dimension 1")
    }
}

impl Serialize for PotentialSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AtomsJson {
            atoms: self.fourier.atoms(),
            grid_samples: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawAtoms::deserialize(d)?;
        one_dimensional(raw.atoms)
            .and_then(PotentialSpec::new)
            .map_err(serde::de::Error::custom)
    }
}

/// Initial datum `u_0(x) = sum_j w_j e^{i y_j x}`, optionally with its
/// samples on a grid. JSON: `{atoms: [...], grid_samples?: [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialDatum {
    fourier: AtomicComplexMeasure,
    grid_samples: Option<Vec<Complex64>>,
}

impl InitialDatum {
    pub fn new(fourier: AtomicComplexMeasure) -> Result<Self> {
        if fourier.dimension() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: fourier.dimension(),
            });
        }
        Ok(Self {
            fourier,
            grid_samples: None,
        })
    }

    /// Attaches samples on `grid`; they must match the atoms to 1e-12.
    pub fn with_samples(self, grid: &Grid1D, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                got: samples.len(),
            });
        }
        let exact = self.sample(grid);
        if let Some((i, _)) = exact
            .iter()
            .zip(&samples)
            .enumerate()
            .find(|(_, (a, b))| (*a - *b).norm() > 1e-12)
        {
            return Err(Error::InvalidMeasure(format!(
                "grid sample {i} differs from the atomic initial datum"
            )));
        }
        Ok(Self {
            grid_samples: Some(samples),
            ..self
        })
    }

    pub fn fourier(&self) -> &AtomicComplexMeasure {
        &self.fourier
    }

    pub fn grid_samples(&self) -> Option<&[Complex64]> {
        self.grid_samples.as_deref()
    }

    fn sample(&self, grid: &Grid1D) -> Vec<Complex64> {
        grid.points()
            .iter()
            .map(|&x| self.fourier.evaluate(&[x]).expect("dimension 1"))
            .collect()
    }

    /// Samples on `grid`, reusing stored samples when they fit.
    pub fn samples_on(&self, grid: &Grid1D) -> Vec<Complex64> {
        match &self.grid_samples {
            Some(s) if s.len() == grid.n_points() => s.clone(),
            _ => self.sample(grid),
        }
    }
}

impl Serialize for InitialDatum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AtomsJson {
            atoms: self.fourier.atoms(),
            grid_samples: self.grid_samples.as_ref(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for InitialDatum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawAtoms::deserialize(d)?;
        let datum = one_dimensional(raw.atoms)
            .and_then(InitialDatum::new)
            .map_err(serde::de::Error::custom)?;
        Ok(InitialDatum {
            grid_samples: raw.grid_samples,
            ..datum
        })
    }
}

/// `L(f)` for a cylinder function on a grid ending at the horizon.
pub fn eval_path_functional(pf: &PathFunctionalSpec, f: &CylinderFunction) -> Result<Complex64> {
    if f.grid().horizon() != pf.horizon() {
        return Err(Error::InvalidTimeGrid(format!(
            "cylinder horizon {} differs from path horizon {}",
            f.grid().horizon(),
            pf.horizon()
        )));
    }
    let marginal = CylinderMarginal::new(pf.spec().clone(), f.grid().clone())?;
    eval_lj(f, &marginal, EvalMethod::Fourier)
}

/// `|L(f)| <= ||f|| + 1e-12`.
pub fn continuity_bound_check(pf: &PathFunctionalSpec, f: &CylinderFunction) -> Result<bool> {
    Ok(eval_path_functional(pf, f)?.norm() <= f.norm() + 1e-12)
}

/// Periodic propagator pieces on a grid.
struct Stepper {
    fft: FftPair,
    propagator: Vec<Complex64>,
}

impl Stepper {
    fn new(spec: &EvolutionSpec, dt: f64, grid: &Grid1D) -> Self {
        let n = grid.n_points();
        let ks = grid.wavenumbers();
        let mut propagator: Vec<Complex64> = ks.iter().map(|&k| spec.symbol(dt, k)).collect();
        if n % 2 == 0 {
            // The Nyquist mode stands for both +k and -k.
            let k = ks[n / 2].abs();
            propagator[n / 2] = (spec.symbol(dt, k) + spec.symbol(dt, -k)) * 0.5;
        }
        Self {
            fft: FftPair::new(n),
            propagator,
        }
    }

    fn propagate(&mut self, u: &mut [Complex64]) {
        self.fft.forward(u);
        u.iter_mut().zip(&self.propagator).for_each(|(v, s)| *v *= s);
        self.fft.inverse_normalized(u);
    }
}

fn check_frequencies(measure: &AtomicComplexMeasure, grid: &Grid1D) -> Result<()> {
    let period = grid.length();
    let n = grid.n_points();
    for atom in measure.atoms() {
        let y = atom.y[0];
        let mode = y * period / (2.0 * std::f64::consts::PI);
        let off = (mode - mode.round()).abs() > 1e-9 * mode.abs().max(1.0);
        if off || 2.0 * mode.abs() >= n as f64 {
            return Err(Error::FrequencyOffGrid {
                y,
                period,
                n_points: n,
            });
        }
    }
    Ok(())
}

fn exp_potential(v: &PotentialSpec, grid: &Grid1D, dt: f64) -> Vec<Complex64> {
    grid.points().iter().map(|&x| (v.evaluate(x) * dt).exp()).collect()
}

fn validate(u0: &InitialDatum, v: &PotentialSpec, grid: &Grid1D) -> Result<()> {
    check_frequencies(u0.fourier(), grid)?;
    check_frequencies(v.fourier(), grid)
}

/// Time-sliced path integral on the periodic grid: each of the `n_slices`
/// steps multiplies by `e^{dt V}` (the left-endpoint Riemann sum of the
/// potential along the path) and then propagates freely by `dt`.
pub fn fk_time_sliced(
    pf: &PathFunctionalSpec,
    u0: &InitialDatum,
    v: &PotentialSpec,
    n_slices: usize,
    grid: &Grid1D,
) -> Result<Vec<Complex64>> {
    if n_slices == 0 {
        return Err(Error::InvalidLadder("n_slices must be at least 1".into()));
    }
    let dt = pf.horizon() / n_slices as f64;
    if dt < pf.spec().t_eps() {
        return Err(Error::SliceTooSmall {
            dt,
            t_eps: pf.spec().t_eps(),
        });
    }
    validate(u0, v, grid)?;
    let factor = exp_potential(v, grid, dt);
    let mut stepper = Stepper::new(pf.spec(), dt, grid);
    let mut u = u0.samples_on(grid);
    for _ in 0..n_slices {
        u.iter_mut().zip(&factor).for_each(|(a, b)| *a *= b);
        stepper.propagate(&mut u);
    }
    Ok(u)
}

fn strang(pf: &PathFunctionalSpec, u0: &[Complex64], v: &PotentialSpec, n: usize, grid: &Grid1D) -> Vec<Complex64> {
    let dt = pf.horizon() / n as f64;
    let half = exp_potential(v, grid, 0.5 * dt);
    let full = exp_potential(v, grid, dt);
    let mut stepper = Stepper::new(pf.spec(), dt, grid);
    let mut u = u0.to_vec();
    u.iter_mut().zip(&half).for_each(|(a, b)| *a *= b);
    for step in 0..n {
        stepper.propagate(&mut u);
        let f = if step + 1 == n { &half } else { &full };
        u.iter_mut().zip(f).for_each(|(a, b)| *a *= b);
    }
    u
}

/// Strang splitting with the step halved until successive solutions agree
/// to `REFERENCE_TOLERANCE` in discrete L2.
pub fn spectral_reference(
    pf: &PathFunctionalSpec,
    u0: &InitialDatum,
    v: &PotentialSpec,
    grid: &Grid1D,
) -> Result<Vec<Complex64>> {
    Ok(spectral_reference_steps(pf, u0, v, grid)?.0)
}

/// As `spectral_reference`, also returning the number of steps used.
pub fn spectral_reference_steps(
    pf: &PathFunctionalSpec,
    u0: &InitialDatum,
    v: &PotentialSpec,
    grid: &Grid1D,
) -> Result<(Vec<Complex64>, usize)> {
    validate(u0, v, grid)?;
    let start = u0.samples_on(grid);
    let mut n = 8;
    let mut prev = strang(pf, &start, v, n, grid);
    let mut last_diff = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let cur = strang(pf, &start, v, n, grid);
        last_diff = grid.l2_distance(&cur, &prev);
        if last_diff < REFERENCE_TOLERANCE {
            return Ok((cur, n));
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        halvings: MAX_HALVINGS,
        last_diff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkErrorEntry {
    pub n_slices: usize,
    pub abs_l2: f64,
    pub rel_l2: f64,
}

/// Errors of the time-sliced solver against the reference along a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkConvergenceReport {
    pub entries: Vec<FkErrorEntry>,
    /// `log(e_i / e_{i+1}) / log(n_{i+1} / n_i)` for consecutive entries.
    pub orders: Vec<f64>,
    /// Errors decrease along the ladder, up to `NOISE_ALLOWANCE` once they
    /// reach ten times the reference tolerance.
    pub monotone: bool,
    pub reference_steps: usize,
}

pub fn fk_convergence_report(
    pf: &PathFunctionalSpec,
    u0: &InitialDatum,
    v: &PotentialSpec,
    grid: &Grid1D,
    slice_ladder: &[usize],
) -> Result<FkConvergenceReport> {
    if slice_ladder.is_empty() || slice_ladder[0] == 0 || slice_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidLadder(format!(
            "{slice_ladder:?} must be nonempty, positive and strictly increasing"
        )));
    }
    let (reference, reference_steps) = spectral_reference_steps(pf, u0, v, grid)?;
    let scale = grid.l2_norm(&reference).max(f64::MIN_POSITIVE);
    let entries = slice_ladder
        .iter()
        .map(|&n| {
            let u = fk_time_sliced(pf, u0, v, n, grid)?;
            let abs_l2 = grid.l2_distance(&u, &reference);
            Ok(FkErrorEntry {
                n_slices: n,
                abs_l2,
                rel_l2: abs_l2 / scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = entries
        .windows(2)
        .map(|w| (w[0].abs_l2 / w[1].abs_l2).ln() / (w[1].n_slices as f64 / w[0].n_slices as f64).ln())
        .collect();
    let floor = 10.0 * REFERENCE_TOLERANCE;
    let monotone = entries.windows(2).all(|w| {
        w[1].abs_l2 < w[0].abs_l2
            || (w[0].abs_l2 <= floor && w[1].abs_l2 <= floor.max((1.0 + NOISE_ALLOWANCE) * w[0].abs_l2))
    });
    Ok(FkConvergenceReport {
        entries,
        orders,
        monotone,
        reference_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn periodic_grid() -> Grid1D {
        Grid1D::new(-4.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI, 128).unwrap()
    }

    #[test]
    fn off_grid_frequency_rejected() {
        let pf = PathFunctionalSpec::new(EvolutionSpec::new(2, c(-0.5, 0.0)).unwrap(), 1.0).unwrap();
        let u0 = InitialDatum::new(AtomicComplexMeasure::dirac(vec![0.3], c(1.0, 0.0)).unwrap()).unwrap();
        let r = fk_time_sliced(&pf, &u0, &PotentialSpec::zero(), 4, &periodic_grid());
        assert!(matches!(r, Err(Error::FrequencyOffGrid { .. })));
    }

    #[test]
    fn slices_below_t_eps_rejected() {
        let spec = EvolutionSpec::with_t_eps(2, c(-0.5, 0.0), 0.1).unwrap();
        let pf = PathFunctionalSpec::new(spec, 1.0).unwrap();
        let u0 = InitialDatum::new(AtomicComplexMeasure::dirac(vec![0.0], c(1.0, 0.0)).unwrap()).unwrap();
        let r = fk_time_sliced(&pf, &u0, &PotentialSpec::zero(), 20, &periodic_grid());
        assert!(matches!(r, Err(Error::SliceTooSmall { .. })));
    }

    #[test]
    fn constant_potential_scales() {
        let pf = PathFunctionalSpec::new(EvolutionSpec::new(4, c(-1.0, 0.0)).unwrap(), 0.5).unwrap();
        let u0 = InitialDatum::new(AtomicComplexMeasure::dirac(vec![0.5], c(1.0, 0.0)).unwrap()).unwrap();
        let g = periodic_grid();
        let free = fk_time_sliced(&pf, &u0, &PotentialSpec::zero(), 3, &g).unwrap();
        let shifted = fk_time_sliced(&pf, &u0, &PotentialSpec::constant(c(0.7, 0.2)), 3, &g).unwrap();
        let factor = (c(0.7, 0.2) * 0.5).exp();
        for (a, b) in free.iter().zip(&shifted) {
            assert!((a * factor - b).norm() < 1e-13);
        }
    }

    #[test]
    fn datum_json_round_trip() {
        let u0 = InitialDatum::new(
            AtomicComplexMeasure::new(1, vec![Atom::new(vec![1.0], c(0.5, 0.0)), Atom::new(vec![-1.0], c(0.5, 0.0))])
                .unwrap(),
        )
        .unwrap();
        let s = serde_json::to_string(&u0).unwrap();
        let back: InitialDatum = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u0);
    }
}
