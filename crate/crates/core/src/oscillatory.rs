//! Normalized Fresnel integrals in finite dimension with a quadratic phase
//! perturbation `e^{-(i/2hbar)<x, Bx>}`, the closed-form Parseval side with
//! the Fredholm determinant, and the projection-chain approximations.
//!
//! The Fresnel weight is `e^{i|x|^2 / (2 hbar)} / (2 pi i hbar)^{d/2}` with
//! `i^{1/2} = e^{i pi / 4}`. In the eigenframe of `B` the integrand of every
//! atom factorizes into one-dimensional integrals
//! `int e^{i m z^2 / (2 hbar) + i y z} dz` with `m = 1 - lambda`, which is how
//! the quadrature side is evaluated.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::AtomicComplexMeasure;
use crate::quad::{extrapolate_to_zero, gl16};

/// Largest dimension accepted by `fresnel_quadrature_lhs`.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Largest ambient dimension for projection chains.
pub const MAX_AMBIENT_DIM: usize = 6;

/// Orthonormality tolerance for frames and projection bases.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// `|1 - lambda|` below this makes `I - B` singular.
pub const SINGULAR_GAP: f64 = 1e-12;

const EPS_LEVELS: usize = 8;
const EPS_RATIO: f64 = 0.6;
const EPS_CAP: f64 = 0.2;
// Gaussian tails are cut where the regularized modulus drops below e^{-40}.
const GAUSS_CUT: f64 = 40.0;
const BOX_FIRST: f64 = 4.0;
const BOX_STEP: f64 = 2.0;
const BOX_STEPS: usize = 120;
const BOX_SETTLE: f64 = 1e-9;

/// Self-adjoint operator of finite rank given by its spectral decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteRankOperator {
    eigenvalues: Vec<f64>,
    frame: DMatrix<f64>,
}

impl FiniteRankOperator {
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Result<Self> {
        let d = eigenvalues.len();
        if d == 0 {
            return Err(Error::InvalidOperator("dimension must be positive".into()));
        }
        if eigenvectors.len() != d || eigenvectors.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidOperator(format!("expected {d} eigenvectors of length {d}")));
        }
        let frame = DMatrix::from_fn(d, d, |r, c| eigenvectors[c][r]);
        Self::from_frame(eigenvalues, frame)
    }

    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        let d = eigenvalues.len();
        if d == 0 {
            return Err(Error::InvalidOperator("dimension must be positive".into()));
        }
        Self::from_frame(eigenvalues, DMatrix::identity(d, d))
    }

    /// Spectral decomposition of a symmetric matrix.
    pub fn from_symmetric(matrix: &DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator("matrix must be square and nonempty".into()));
        }
        let asym = (matrix - matrix.transpose()).amax();
        if asym > 1e-12 * matrix.amax().max(1.0) {
            return Err(Error::InvalidOperator(format!("matrix is not symmetric (defect {asym:e})")));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        Self::from_frame(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    fn from_frame(eigenvalues: Vec<f64>, frame: DMatrix<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|l| !l.is_finite()) || frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entries".into()));
        }
        let d = eigenvalues.len();
        let defect = (frame.transpose() * &frame - DMatrix::<f64>::identity(d, d)).amax();
        if defect > FRAME_TOLERANCE {
            return Err(Error::InvalidOperator(format!("frame not orthonormal (defect {defect:e})")));
        }
        if let Some(&eigenvalue) = eigenvalues.iter().find(|l| (1.0 - *l).abs() < SINGULAR_GAP) {
            return Err(Error::SingularOperator { eigenvalue });
        }
        Ok(Self { eigenvalues, frame })
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as the columns of an orthogonal matrix.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        &self.frame * DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues)) * self.frame.transpose()
    }

    /// Number of eigenvalues of `B` above 1, i.e. negative eigenvalues of `I - B`.
    pub fn index(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > 1.0).count()
    }

    /// Coordinates of `y` in the eigenframe.
    fn rotate(&self, y: &[f64]) -> Vec<f64> {
        (self.frame.transpose() * DVector::from_column_slice(y)).iter().copied().collect()
    }

    /// `<y, (I - B)^{-1} y>`.
    pub fn resolvent_form(&self, y: &[f64]) -> f64 {
        self.rotate(y)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| c * c / (1.0 - l))
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    eigenvalues: Vec<f64>,
    #[serde(default)]
    eigenvectors: Option<Vec<Vec<f64>>>,
}

impl Serialize for FiniteRankOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let vectors = self.frame.column_iter().map(|c| c.iter().copied().collect()).collect();
        RawOperator {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: Some(vectors),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteRankOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawOperator::deserialize(d)?;
        match raw.eigenvectors {
            Some(v) => FiniteRankOperator::new(raw.eigenvalues, v),
            None => FiniteRankOperator::diagonal(raw.eigenvalues),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `f = F mu_f` together with the scale `hbar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FresnelIntegrand {
    fourier: AtomicComplexMeasure,
    hbar: f64,
}

impl FresnelIntegrand {
    pub fn new(fourier: AtomicComplexMeasure, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidOperator(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { fourier, hbar })
    }

    /// `f = 1` in dimension `d`.
    pub fn one(d: usize, hbar: f64) -> Result<Self> {
        Self::new(AtomicComplexMeasure::dirac(vec![0.0; d], Complex64::new(1.0, 0.0))?, hbar)
    }

    pub fn dimension(&self) -> usize {
        self.fourier.dimension()
    }

    pub fn fourier(&self) -> &AtomicComplexMeasure {
        &self.fourier
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureMethod {
    /// Damp the quadratic phase by `e^{-eps z^2 / (2 hbar)}` and extrapolate `eps -> 0`.
    Regularized,
    /// Smooth box cutoffs of growing half width with pairwise averaging.
    GrowingBox,
}

/// `det(I - B)` with the phase `e^{-i pi Ind}`. Also returns `Ind`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredholmDet {
    pub value: Complex64,
    pub modulus: f64,
    pub index: usize,
}

impl FredholmDet {
    /// `det^{-1/2} = |det|^{-1/2} e^{-i pi Ind / 2}`, the branch the
    /// one-dimensional Fresnel integrals produce.
    pub fn inverse_sqrt(&self) -> Complex64 {
        Complex64::from_polar(self.modulus.powf(-0.5), -std::f64::consts::FRAC_PI_2 * self.index as f64)
    }
}

pub fn fredholm_det(b: &FiniteRankOperator) -> Result<FredholmDet> {
    let mut modulus = 1.0;
    for &l in b.eigenvalues() {
        if (1.0 - l).abs() < SINGULAR_GAP {
            return Err(Error::SingularOperator { eigenvalue: l });
        }
        modulus *= (1.0 - l).abs();
    }
    let index = b.index();
    Ok(FredholmDet {
        value: Complex64::from_polar(modulus, -std::f64::consts::PI * index as f64),
        modulus,
        index,
    })
}

fn check_dims(b: &FiniteRankOperator, f: &FresnelIntegrand) -> Result<()> {
    if b.dimension() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: b.dimension(),
            got: f.dimension(),
        });
    }
    Ok(())
}

/// `det(I - B)^{-1/2} sum_j w_j e^{-(i hbar / 2) <y_j, (I - B)^{-1} y_j>}`.
pub fn parseval_rhs(b: &FiniteRankOperator, f: &FresnelIntegrand) -> Result<Complex64> {
    check_dims(b, f)?;
    let det = fredholm_det(b)?;
    let hbar = f.hbar();
    let sum: Complex64 = f
        .fourier()
        .atoms()
        .iter()
        .map(|a| a.w * Complex64::from_polar(1.0, -0.5 * hbar * b.resolvent_form(&a.y)))
        .sum();
    Ok(det.inverse_sqrt() * sum)
}

/// `int_a^b g` on Gauss-Legendre panels no wider than `width(z)`.
fn panels(a: f64, b: f64, width: impl Fn(f64) -> f64, g: impl Fn(f64) -> Complex64) -> Complex64 {
    let (nodes, weights) = gl16();
    let mut total = Complex64::new(0.0, 0.0);
    let mut lo = a;
    while lo < b {
        let hi = (lo + width(lo)).min(b);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            s += g(mid + half * x) * *w;
        }
        total += s * half;
        lo = hi;
    }
    total
}

/// Panel width keeping the local phase change per panel near 4 radians.
fn oscillation_width(m: f64, y: f64, hbar: f64, cap: f64) -> impl Fn(f64) -> f64 {
    move |z: f64| {
        let freq = m.abs() * (z.abs() + 1.0) / hbar + y.abs() + 1.0;
        (4.0 / freq).min(cap)
    }
}

fn normalization(hbar: f64) -> Complex64 {
    Complex64::from_polar((2.0 * std::f64::consts::PI * hbar).powf(-0.5), -std::f64::consts::FRAC_PI_4)
}

/// `int e^{(i m - eps) z^2 / (2 hbar) + i y z} dz` by panels.
fn damped_integral(m: f64, y: f64, hbar: f64, eps: f64) -> Complex64 {
    let reach = (2.0 * GAUSS_CUT * hbar / eps).sqrt();
    let quad = Complex64::new(-eps, m) / (2.0 * hbar);
    panels(-reach, reach, oscillation_width(m, y, hbar, 1.0), |z| {
        (quad * z * z + Complex64::new(0.0, y * z)).exp()
    })
}

fn factor_regularized(m: f64, y: f64, hbar: f64) -> Result<Complex64> {
    // The damped value is analytic in eps with radius |m|; the exponent
    // hbar y^2 / (2 (eps - i m)) bends quickly once eps is comparable to
    // m^2 / (hbar y^2), so the ladder starts well inside both scales.
    let a = 0.5 * hbar * y * y;
    let mut eps0 = EPS_CAP.min(0.125 * m.abs());
    if a > 0.0 {
        eps0 = eps0.min(m * m / (8.0 * a));
    }
    let xs: Vec<f64> = (0..EPS_LEVELS).map(|j| eps0 * EPS_RATIO.powi(j as i32)).collect();
    let ys: Vec<Complex64> = xs.iter().map(|&e| damped_integral(m, y, hbar, e)).collect();
    let (value, err) = extrapolate_to_zero(&xs, &ys);
    if !(err <= 1e-6 * value.norm().max(1e-300)) {
        return Err(Error::LadderDivergence(format!(
            "damping extrapolation for m = {m}, y = {y} left an error estimate {err:e}"
        )));
    }
    Ok(value * normalization(hbar))
}

/// Smooth cutoff equal to 1 on `[-1, 1]` and 0 outside `[-2, 2]`.
fn window(u: f64) -> f64 {
    let u = u.abs();
    if u <= 1.0 {
        return 1.0;
    }
    if u >= 2.0 {
        return 0.0;
    }
    let psi = |s: f64| (-1.0 / s).exp();
    let a = psi(2.0 - u);
    a / (a + psi(u - 1.0))
}

fn factor_box(m: f64, y: f64, hbar: f64) -> Result<Complex64> {
    // The box must cover the stationary point before the ladder can settle.
    let centre = (hbar * y / m).abs();
    let mut prev_raw: Option<Complex64> = None;
    let mut prev_avg: Option<Complex64> = None;
    let mut last_change = f64::INFINITY;
    for step in 0..BOX_STEPS {
        let r = BOX_FIRST + BOX_STEP * step as f64;
        let raw = if r <= centre {
            None
        } else {
            let quad = Complex64::new(0.0, m / (2.0 * hbar));
            let base = oscillation_width(m, y, hbar, 1.0);
            Some(panels(
                -2.0 * r,
                2.0 * r,
                |z| base(z).min(r / 16.0),
                |z| (quad * z * z + Complex64::new(0.0, y * z)).exp() * window(z / r),
            ))
        };
        let Some(raw) = raw else { continue };
        if let Some(p) = prev_raw {
            let avg = 0.5 * (raw + p);
            if let Some(pa) = prev_avg {
                last_change = (avg - pa).norm();
                if last_change <= BOX_SETTLE * avg.norm().max(1.0) {
                    return Ok(avg * normalization(hbar));
                }
            }
            prev_avg = Some(avg);
        }
        prev_raw = Some(raw);
    }
    Err(Error::LadderDivergence(format!(
        "box ladder for m = {m}, y = {y} still moving by {last_change:e} at R = {}",
        BOX_FIRST + BOX_STEP * (BOX_STEPS - 1) as f64
    )))
}

/// Normalized value in the eigenframe: `sum_j w_j prod_k F(m_k, y_jk)`.
fn factorized_lhs(
    eigenvalues: &[f64],
    rotated: &[(Vec<f64>, Complex64)],
    hbar: f64,
    method: QuadratureMethod,
) -> Result<Complex64> {
    let terms: Vec<Complex64> = rotated
        .par_iter()
        .map(|(y, w)| {
            let mut prod = *w;
            for (&l, &c) in eigenvalues.iter().zip(y) {
                let m = 1.0 - l;
                prod *= match method {
                    QuadratureMethod::Regularized => factor_regularized(m, c, hbar)?,
                    QuadratureMethod::GrowingBox => factor_box(m, c, hbar)?,
                };
            }
            Ok(prod)
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().sum())
}

/// Normalized oscillatory integral of `f(x) e^{-(i / 2 hbar) <x, Bx>}`
/// against the Fresnel weight, by quadrature.
pub fn fresnel_quadrature_lhs(
    b: &FiniteRankOperator,
    f: &FresnelIntegrand,
    method: QuadratureMethod,
) -> Result<Complex64> {
    check_dims(b, f)?;
    if b.dimension() > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            d: b.dimension(),
            max: MAX_QUADRATURE_DIM,
        });
    }
    fredholm_det(b)?;
    let rotated: Vec<(Vec<f64>, Complex64)> =
        f.fourier().atoms().iter().map(|a| (b.rotate(&a.y), a.w)).collect();
    factorized_lhs(b.eigenvalues(), &rotated, f.hbar(), method)
}

/// Orthogonal projection given by an orthonormal basis of its range.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    basis: DMatrix<f64>,
}

impl Projection {
    /// Columns of `basis` span the range and must be orthonormal.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        if k == 0 || k > basis.nrows() {
            return Err(Error::InvalidChain(format!(
                "projection rank {k} outside 1..={}",
                basis.nrows()
            )));
        }
        let defect = (basis.transpose() * &basis - DMatrix::<f64>::identity(k, k)).amax();
        if !(defect <= FRAME_TOLERANCE) {
            return Err(Error::InvalidChain(format!("basis not orthonormal (defect {defect:e})")));
        }
        Ok(Self { basis })
    }

    /// Projection onto the listed coordinate axes of `R^ambient`.
    pub fn coordinates(ambient: usize, axes: &[usize]) -> Result<Self> {
        if let Some(&a) = axes.iter().find(|&&a| a >= ambient) {
            return Err(Error::InvalidChain(format!("axis {a} outside dimension {ambient}")));
        }
        Self::new(DMatrix::from_fn(ambient, axes.len(), |r, c| if r == axes[c] { 1.0 } else { 0.0 }))
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Whether the range of `self` lies inside the range of `other`.
    pub fn contained_in(&self, other: &Projection) -> bool {
        let residual = &self.basis - &other.basis * (other.basis.transpose() * &self.basis);
        residual.amax() <= 1e-10
    }
}

/// Nested projections `P_1 <= P_2 <= ... <= P_n = I`.
pub type ProjectionChain = Vec<Projection>;

/// Chain of coordinate projections adding the axes in `order`.
pub fn coordinate_chain(order: &[usize]) -> Result<ProjectionChain> {
    let d = order.len();
    (1..=d).map(|k| Projection::coordinates(d, &order[..k])).collect()
}

fn validate_chains(d: usize, chains: &[ProjectionChain]) -> Result<()> {
    if chains.len() < 2 {
        return Err(Error::InvalidChain(format!("need at least two chains, got {}", chains.len())));
    }
    for (ci, chain) in chains.iter().enumerate() {
        if chain.is_empty() || chain.len() > d {
            return Err(Error::InvalidChain(format!("chain {ci} has length {}", chain.len())));
        }
        if let Some(p) = chain.iter().find(|p| p.ambient() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.ambient(),
            });
        }
        for level in 1..chain.len() {
            if !chain[level - 1].contained_in(&chain[level]) || chain[level - 1].rank() >= chain[level].rank() {
                return Err(Error::NonNested { chain: ci, level });
            }
        }
        if chain.last().map(Projection::rank) != Some(d) {
            return Err(Error::InvalidChain(format!("chain {ci} does not end at the identity")));
        }
    }
    Ok(())
}

/// Finite-dimensional values `I_{P_n}` along each chain. Level `n` restricts
/// the phase to the range of `P_n`: `B_n = U^T B U` and `f(Uz)` for an
/// orthonormal basis `U`, evaluated by the damped-phase quadrature.
pub fn idim_osc_approx(
    b: &FiniteRankOperator,
    f: &FresnelIntegrand,
    ambient: usize,
    chains: &[ProjectionChain],
) -> Result<Vec<Vec<Complex64>>> {
    if ambient > MAX_AMBIENT_DIM {
        return Err(Error::DimensionTooLarge {
            d: ambient,
            max: MAX_AMBIENT_DIM,
        });
    }
    check_dims(b, f)?;
    if b.dimension() != ambient {
        return Err(Error::DimensionMismatch {
            expected: ambient,
            got: b.dimension(),
        });
    }
    validate_chains(ambient, chains)?;
    let matrix = b.matrix();
    chains
        .par_iter()
        .map(|chain| {
            chain
                .iter()
                .map(|p| {
                    let u = p.basis();
                    let restricted = u.transpose() * &matrix * u;
                    let sym = 0.5 * (&restricted + restricted.transpose());
                    let bn = FiniteRankOperator::from_symmetric(&sym)?;
                    let rotated: Vec<(Vec<f64>, Complex64)> = f
                        .fourier()
                        .atoms()
                        .iter()
                        .map(|a| {
                            let local: Vec<f64> =
                                (u.transpose() * DVector::from_column_slice(&a.y)).iter().copied().collect();
                            (bn.rotate(&local), a.w)
                        })
                        .collect();
                    factorized_lhs(bn.eigenvalues(), &rotated, f.hbar(), QuadratureMethod::Regularized)
                })
                .collect()
        })
        .collect()
}
