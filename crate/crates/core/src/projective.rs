//! Time grids as a directed set, cylinder functions with atomic Fourier
//! measures, their extension maps, and the pinned marginal functionals.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kernel::{compute_kernel, decay_radius, EvolutionSpec};

/// Largest number of times accepted by the quadrature evaluation.
pub const QUADRATURE_MAX_TIMES: usize = 3;

/// Weights below this magnitude are dropped by canonicalization.
pub const ZERO_WEIGHT: f64 = 1e-14;

/// Relative tolerance on weights when comparing canonical forms.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Finite, strictly increasing times `t_1 < ... < t_n` in `[0, horizon)`.
/// Refinement (inclusion of time sets at equal horizon) makes the grids a
/// directed set with the union as an upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeGrid")]
pub struct TimeGrid {
    horizon: f64,
    times: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTimeGrid {
    horizon: f64,
    times: Vec<f64>,
}

impl TryFrom<RawTimeGrid> for TimeGrid {
    type Error = Error;

    fn try_from(raw: RawTimeGrid) -> Result<Self> {
        TimeGrid::new(raw.horizon, raw.times)
    }
}

impl TimeGrid {
    pub fn new(horizon: f64, times: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("horizon {horizon} must be positive")));
        }
        if times.is_empty() {
            return Err(Error::InvalidTimeGrid("at least one time is required".into()));
        }
        if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0 && **t < horizon)) {
            return Err(Error::InvalidTimeGrid(format!(
                "time {bad} is outside [0, {horizon})"
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
        }
        // Normalize -0.0 so equal grids compare and sort identically.
        let times = times.into_iter().map(|t| t + 0.0).collect();
        Ok(Self { horizon, times })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_{j+1} - t_j` for `j = 1..n`, with `t_{n+1}` the horizon.
    pub fn increments(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        out.push(self.horizon - self.times[self.times.len() - 1]);
        out
    }

    /// True when `self` contains every time of `coarse` at the same horizon.
    pub fn refines(&self, coarse: &TimeGrid) -> bool {
        self.horizon == coarse.horizon
            && coarse
                .times
                .iter()
                .all(|t| self.times.binary_search_by(|s| s.total_cmp(t)).is_ok())
    }

    /// Smallest common refinement.
    pub fn union(&self, other: &TimeGrid) -> Result<TimeGrid> {
        if self.horizon != other.horizon {
            return Err(Error::InvalidTimeGrid(format!(
                "horizons differ: {} vs {}",
                self.horizon, other.horizon
            )));
        }
        let mut times: Vec<f64> = self.times.iter().chain(&other.times).copied().collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        TimeGrid::new(self.horizon, times)
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        self.times.binary_search_by(|s| s.total_cmp(&t)).ok()
    }
}

/// One point mass `w * delta_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub y: Vec<f64>,
    pub w: Complex64,
}

impl Atom {
    pub fn new(y: Vec<f64>, w: Complex64) -> Self {
        Self { y, w }
    }
}

/// Finite complex measure `sum_j w_j delta_{y_j}` on `R^dimension`. Its
/// Fourier transform `x -> sum_j w_j e^{i <y_j, x>}` is the function it
/// represents, with norm `sum_j |w_j|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct AtomicComplexMeasure {
    dimension: usize,
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawMeasure {
    dimension: usize,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for AtomicComplexMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicComplexMeasure::new(raw.dimension, raw.atoms)
    }
}

impl AtomicComplexMeasure {
    pub fn new(dimension: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for atom in &atoms {
            if atom.y.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: atom.y.len(),
                });
            }
            if atom.y.iter().any(|v| !v.is_finite()) || !atom.w.re.is_finite() || !atom.w.im.is_finite() {
                return Err(Error::InvalidMeasure("atoms must be finite".into()));
            }
        }
        Ok(Self { dimension, atoms })
    }

    pub fn zero(dimension: usize) -> Result<Self> {
        Self::new(dimension, Vec::new())
    }

    /// Single atom; `dirac(vec![0.0; d], 1)` represents the constant 1.
    pub fn dirac(y: Vec<f64>, w: Complex64) -> Result<Self> {
        Self::new(y.len(), vec![Atom::new(y, w)])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Total variation `sum |w_j|`.
    pub fn norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.norm()).sum()
    }

    /// `sum_j w_j e^{i <y_j, x>}`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| {
                let phase: f64 = a.y.iter().zip(x).map(|(y, x)| y * x).sum();
                a.w * Complex64::from_polar(1.0, phase)
            })
            .sum())
    }

    /// `a * self + b * other`, as a concatenated atom list.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom::new(x.y.clone(), x.w * a))
            .chain(other.atoms.iter().map(|x| Atom::new(x.y.clone(), x.w * b)))
            .collect();
        Self::new(self.dimension, atoms)
    }

    /// Atoms at identical locations merged, weights below `ZERO_WEIGHT`
    /// dropped, locations sorted lexicographically.
    pub fn canonical(&self) -> Self {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.y.iter().map(|v| v + 0.0).collect(), a.w))
            .collect();
        atoms.sort_by(|a, b| compare_locations(&a.y, &b.y));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.y == atom.y => last.w += atom.w,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.w.norm() >= ZERO_WEIGHT);
        Self {
            dimension: self.dimension,
            atoms: merged,
        }
    }

    /// Equality of canonical forms: identical locations, weights equal to
    /// `WEIGHT_TOLERANCE` relative. `Err` carries the first difference.
    pub fn same_function(&self, other: &Self) -> std::result::Result<(), String> {
        if self.dimension != other.dimension {
            return Err(format!("dimensions {} and {}", self.dimension, other.dimension));
        }
        let a = self.canonical();
        let b = other.canonical();
        if a.atoms.len() != b.atoms.len() {
            return Err(format!("{} atoms vs {} atoms", a.atoms.len(), b.atoms.len()));
        }
        for (x, y) in a.atoms.iter().zip(&b.atoms) {
            if x.y != y.y {
                return Err(format!("atom locations {:?} vs {:?}", x.y, y.y));
            }
            let scale = x.w.norm().max(y.w.norm()).max(1.0);
            if (x.w - y.w).norm() > WEIGHT_TOLERANCE * scale {
                return Err(format!("weights {} vs {} at {:?}", x.w, y.w, x.y));
            }
        }
        Ok(())
    }
}

fn compare_locations(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// `F(x_1, ..., x_n) = sum_j w_j e^{i sum_k y_{j,k} x_k}` attached to the
/// times of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction {
    grid: TimeGrid,
    fourier: AtomicComplexMeasure,
}

/// JSON shape `{horizon, times, atoms: [{y, w}]}`.
#[derive(Serialize, Deserialize)]
struct CylinderJson {
    horizon: f64,
    times: Vec<f64>,
    atoms: Vec<Atom>,
}

impl Serialize for CylinderFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CylinderJson {
            horizon: self.grid.horizon,
            times: self.grid.times.clone(),
            atoms: self.fourier.atoms.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CylinderFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = CylinderJson::deserialize(deserializer)?;
        let grid = TimeGrid::new(raw.horizon, raw.times).map_err(serde::de::Error::custom)?;
        let fourier =
            AtomicComplexMeasure::new(grid.len(), raw.atoms).map_err(serde::de::Error::custom)?;
        CylinderFunction::new(grid, fourier).map_err(serde::de::Error::custom)
    }
}

impl CylinderFunction {
    pub fn new(grid: TimeGrid, fourier: AtomicComplexMeasure) -> Result<Self> {
        if fourier.dimension() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: fourier.dimension(),
            });
        }
        Ok(Self { grid, fourier })
    }

    /// The constant function 1 on `grid`.
    pub fn one(grid: TimeGrid) -> Self {
        let d = grid.len();
        let fourier = AtomicComplexMeasure::dirac(vec![0.0; d], Complex64::new(1.0, 0.0))
            .expect("positive dimension");
        Self { grid, fourier }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn fourier(&self) -> &AtomicComplexMeasure {
        &self.fourier
    }

    /// `||f|| = sum |w_j|`.
    pub fn norm(&self) -> f64 {
        self.fourier.norm()
    }

    /// Value at path positions `x_k` taken at the grid times.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        self.fourier.evaluate(x)
    }
}

/// How the path is tied down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pinning {
    /// Paths end at 0 at the horizon.
    TerminalDelta,
}

/// Complex marginal on the times of a grid:
/// `prod_j g_{t_{j+1} - t_j}(x_{j+1} - x_j) dx_1 ... dx_n` with `x_{n+1} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMarginal {
    spec: EvolutionSpec,
    grid: TimeGrid,
    pinning: Pinning,
}

impl CylinderMarginal {
    pub fn new(spec: EvolutionSpec, grid: TimeGrid) -> Result<Self> {
        for tau in grid.increments() {
            spec.check_time(tau)?;
        }
        Ok(Self {
            spec,
            grid,
            pinning: Pinning::TerminalDelta,
        })
    }

    pub fn spec(&self) -> &EvolutionSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn pinning(&self) -> Pinning {
        self.pinning
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMethod {
    Fourier,
    Quadrature,
}

/// `f` composed with the projection from `K` onto `f`'s grid: coordinates at
/// inserted times get zero frequency.
pub fn extend_cylinder(f: &CylinderFunction, k: &TimeGrid) -> Result<CylinderFunction> {
    if !k.refines(f.grid()) {
        return Err(Error::NotARefinement(format!(
            "{:?} at horizon {} does not contain {:?} at horizon {}",
            k.times(),
            k.horizon(),
            f.grid().times(),
            f.grid().horizon()
        )));
    }
    let positions: Vec<usize> = f
        .grid()
        .times()
        .iter()
        .map(|&t| k.index_of(t).expect("refinement contains every time"))
        .collect();
    let atoms = f
        .fourier()
        .atoms()
        .iter()
        .map(|a| {
            let mut y = vec![0.0; k.len()];
            for (pos, v) in positions.iter().zip(&a.y) {
                y[*pos] = *v;
            }
            Atom::new(y, a.w)
        })
        .collect();
    CylinderFunction::new(k.clone(), AtomicComplexMeasure::new(k.len(), atoms)?)
}

/// Fourier transform of the marginal, `integral e^{i <y, x>} mu_J(dx)
/// = prod_j exp(alpha tau_j Y_j^p)` with `Y_j = y_1 + ... + y_j`.
pub fn marginal_fourier(m: &CylinderMarginal, y: &[f64]) -> Result<Complex64> {
    if y.len() != m.grid().len() {
        return Err(Error::DimensionMismatch {
            expected: m.grid().len(),
            got: y.len(),
        });
    }
    let alpha = m.spec().alpha();
    let p = m.spec().p() as i32;
    let mut partial = 0.0;
    let mut exponent = Complex64::new(0.0, 0.0);
    for (yj, tau) in y.iter().zip(m.grid().increments()) {
        partial += yj;
        exponent += alpha * (tau * partial.powi(p));
    }
    Ok(exponent.exp())
}

/// `L_J(f) = integral f d mu_J`.
pub fn eval_lj(f: &CylinderFunction, m: &CylinderMarginal, method: EvalMethod) -> Result<Complex64> {
    if f.grid() != m.grid() {
        return Err(Error::GridMismatch(format!(
            "function grid {:?} vs marginal grid {:?}",
            f.grid(),
            m.grid()
        )));
    }
    match method {
        EvalMethod::Fourier => f
            .fourier()
            .atoms()
            .iter()
            .map(|a| Ok(a.w * marginal_fourier(m, &a.y)?))
            .sum(),
        EvalMethod::Quadrature => eval_by_quadrature(f, m),
    }
}

/// Iterated integral over the path positions on a uniform lattice through
/// the origin: `psi_j(x) = integral psi_{j-1}(z) e^{i y_j z} g_{tau_j}(x - z) dz`
/// starting from `psi_0 = 1`, and `L_J = psi_n(0)`.
fn eval_by_quadrature(f: &CylinderFunction, m: &CylinderMarginal) -> Result<Complex64> {
    let n = m.grid().len();
    if n > QUADRATURE_MAX_TIMES {
        return Err(Error::QuadratureCostGate {
            n,
            max: QUADRATURE_MAX_TIMES,
        });
    }
    let spec = m.spec();
    if !spec.is_integrable() {
        return Err(Error::NotIntegrable(format!(
            "quadrature needs absolutely integrable kernels, alpha = {}",
            spec.alpha()
        )));
    }
    let taus = m.grid().increments();
    let radius = taus
        .iter()
        .map(|&t| decay_radius(spec, t))
        .fold(0.0, f64::max);
    let bandwidths: Vec<f64> = taus.iter().map(|&t| crate::kernel::bandwidth(spec, t)).collect();
    let y_max = f
        .fourier()
        .atoms()
        .iter()
        .flat_map(|a| a.y.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let k_max = 2.0 * bandwidths.iter().fold(0.0f64, |a, b| a.max(*b)) + y_max;
    let h_target = 1.8 * std::f64::consts::PI / k_max;
    let half_width = (n + 1) as f64 * radius;
    let half_cells = (half_width / h_target).ceil() as usize;
    let h = half_width / half_cells as f64;
    let npts = 2 * half_cells;
    let origin = half_cells;

    // g_tau at every lattice difference (a - b) h, indexed by a - b + npts.
    let diff_grid = Grid1D::new(-(npts as f64) * h, npts as f64 * h, 2 * npts)?;
    let kernels: Vec<Vec<Complex64>> = taus
        .iter()
        .map(|&t| compute_kernel(spec, t, &diff_grid).map(|k| k.values().to_vec()))
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = (0..npts).map(|a| (a as f64 - origin as f64) * h).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for atom in f.fourier().atoms() {
        let mut psi = vec![Complex64::new(1.0, 0.0); npts];
        for j in 0..n {
            let phi: Vec<Complex64> = psi
                .iter()
                .zip(&xs)
                .map(|(v, x)| v * Complex64::from_polar(1.0, atom.y[j] * x))
                .collect();
            let g = &kernels[j];
            let targets: Vec<usize> = if j + 1 == n { vec![origin] } else { (0..npts).collect() };
            let mut next = vec![Complex64::new(0.0, 0.0); npts];
            for a in targets {
                let mut acc = Complex64::new(0.0, 0.0);
                for (b, v) in phi.iter().enumerate() {
                    acc += v * g[a + npts - b];
                }
                next[a] = acc * h;
            }
            psi = next;
        }
        total += atom.w * psi[origin];
    }
    Ok(total)
}

/// `|L_J(f) - L_K(extend(f, K))|` with the Fourier evaluation.
pub fn compatibility_check(
    f: &CylinderFunction,
    k: &TimeGrid,
    m_j: &CylinderMarginal,
    m_k: &CylinderMarginal,
) -> Result<f64> {
    compatibility_check_with(f, k, m_j, m_k, EvalMethod::Fourier)
}

pub fn compatibility_check_with(
    f: &CylinderFunction,
    k: &TimeGrid,
    m_j: &CylinderMarginal,
    m_k: &CylinderMarginal,
    method: EvalMethod,
) -> Result<f64> {
    if m_j.spec() != m_k.spec() {
        return Err(Error::SpecMismatch("marginals use different specs".into()));
    }
    if m_j.grid().horizon() != m_k.grid().horizon() {
        return Err(Error::InvalidTimeGrid("marginals use different horizons".into()));
    }
    let extended = extend_cylinder(f, k)?;
    let coarse = eval_lj(f, m_j, method)?;
    let fine = eval_lj(&extended, m_k, method)?;
    Ok((coarse - fine).norm())
}

/// Common value of `L` over representations of one cylinder function on
/// possibly different grids. All representations are extended to the union
/// grid and must agree there atom by atom.
pub fn minimal_extension_eval(representations: &[(CylinderFunction, CylinderMarginal)]) -> Result<Complex64> {
    let Some((first_f, first_m)) = representations.first() else {
        return Err(Error::InconsistentRepresentations("no representations given".into()));
    };
    let mut union = first_f.grid().clone();
    for (i, (f, m)) in representations.iter().enumerate() {
        if f.grid() != m.grid() {
            return Err(Error::GridMismatch(format!(
                "representation {i}: function and marginal grids differ"
            )));
        }
        if m.spec() != first_m.spec() {
            return Err(Error::SpecMismatch(format!(
                "representation {i} uses a different evolution spec"
            )));
        }
        if f.grid().horizon() != union.horizon() {
            return Err(Error::InconsistentRepresentations(format!(
                "representation {i} has horizon {} instead of {}",
                f.grid().horizon(),
                union.horizon()
            )));
        }
        union = union.union(f.grid())?;
    }
    let reference = extend_cylinder(first_f, &union)?;
    for (i, (f, _)) in representations.iter().enumerate().skip(1) {
        let ext = extend_cylinder(f, &union)?;
        reference
            .fourier()
            .same_function(ext.fourier())
            .map_err(|d| Error::InconsistentRepresentations(format!("representation {i}: {d}")))?;
    }
    let marginal = CylinderMarginal::new(first_m.spec().clone(), union)?;
    eval_lj(&reference, &marginal, EvalMethod::Fourier)
}
