//! Independent reference values and random case generators shared by the
//! integration tests. Nothing here calls into the kernel sampler.

#![allow(dead_code)]

use num_complex::Complex64;
use pseudopath::quad::{extrapolate_to_zero, gl16};
use pseudopath::{Atom, AtomicComplexMeasure, CylinderFunction, TimeGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(2 pi)^{-1/2} e^{-x^2/2}`.
pub fn heat(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Airy function values from scipy.special.airy, frozen.
pub const AIRY_TABLE: [(f64, f64); 8] = [
    (-8.0, -0.05270505035638643),
    (-5.0, 0.3507610090241142),
    (-2.5, -0.11232506769296623),
    (-1.0, 0.5355608832923522),
    (0.0, 0.3550280538878172),
    (1.0, 0.13529241631288147),
    (2.5, 0.015725923380470484),
    (4.0, 0.0009515638512048024),
];

/// `g_1` for `p = 4, alpha = -1` from scipy.integrate.quad of
/// `(1/pi) int_0^inf cos(kx) e^{-k^4} dk`, frozen.
pub const QUARTIC_TABLE: [(f64, f64); 5] = [
    (0.0, 0.28851686930823484),
    (1.0, 0.24266509456410373),
    (2.0, 0.13560885893431077),
    (3.5, -0.002594581338565384),
    (5.0, -0.027297405763275266),
];

/// `integral |g_1| dx` for `p = 4, alpha = -1`, from an adaptive quadrature
/// of the cosine integral above split at its zeros, frozen.
pub const QUARTIC_VARIATION: f64 = 1.2372943854593788;

/// `(1/pi) int_0^K cos(kx + k^3/3) e^{-eps k^2} dk` on Gauss-Legendre panels
/// sized to the local phase speed.
fn damped_airy(x: f64, eps: f64) -> f64 {
    let (nodes, weights) = gl16();
    let reach = (40.0 / eps).sqrt();
    let mut total = 0.0;
    let mut lo = 0.0;
    while lo < reach {
        let speed = (lo + 1.0) * (lo + 1.0) + x.abs() + 1.0;
        let hi = (lo + (4.0 / speed).min(0.5)).min(reach);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut s = 0.0;
        for (u, w) in nodes.iter().zip(weights) {
            let k = mid + half * u;
            s += w * (k * x + k * k * k / 3.0).cos() * (-eps * k * k).exp();
        }
        total += s * half;
        lo = hi;
    }
    total / std::f64::consts::PI
}

/// Airy function through the damped integrals extrapolated to zero damping.
pub fn mollified_airy(x: f64) -> f64 {
    let eps: Vec<f64> = (0..7).map(|j| 0.08 * 0.7f64.powi(j)).collect();
    let vals: Vec<Complex64> = eps.iter().map(|&e| c(damped_airy(x, e), 0.0)).collect();
    extrapolate_to_zero(&eps, &vals).0.re
}

pub fn random_grid(rng: &mut ChaCha8Rng, horizon: f64, max_len: usize) -> TimeGrid {
    let n = rng.random_range(1..=max_len);
    let mut times: Vec<f64> = (0..n)
        .map(|_| (rng.random_range(0..64) as f64) / 64.0 * horizon)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    TimeGrid::new(horizon, times).unwrap()
}

/// Adds up to `extra` new times on the 1/64 lattice.
pub fn random_refinement(rng: &mut ChaCha8Rng, grid: &TimeGrid, extra: usize) -> TimeGrid {
    let mut times = grid.times().to_vec();
    for _ in 0..rng.random_range(1..=extra) {
        times.push((rng.random_range(0..64) as f64) / 64.0 * grid.horizon());
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    TimeGrid::new(grid.horizon(), times).unwrap()
}

pub fn random_measure(rng: &mut ChaCha8Rng, dim: usize, atoms: usize, y_max: f64) -> AtomicComplexMeasure {
    let atoms = (0..atoms)
        .map(|_| {
            let y = (0..dim).map(|_| rng.random_range(-y_max..y_max)).collect();
            Atom::new(y, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    AtomicComplexMeasure::new(dim, atoms).unwrap()
}

pub fn random_cylinder(rng: &mut ChaCha8Rng, grid: TimeGrid, atoms: usize, y_max: f64) -> CylinderFunction {
    let m = random_measure(rng, grid.len(), atoms, y_max);
    CylinderFunction::new(grid, m).unwrap()
}

/// Periodic grid of period `8 pi` with `n` points, centred on 0.
pub fn periodic_grid(n: usize) -> pseudopath::Grid1D {
    let half = 4.0 * std::f64::consts::PI;
    pseudopath::Grid1D::new(-half, half, n).unwrap()
}

/// `u_0 = sum_j w_j e^{i y_j x}` with `y_j = j/4`, `|j| <= 16`, and
/// `w_j` proportional to `e^{-y_j^2/2}` with unit sum.
pub fn gaussian_datum() -> pseudopath::InitialDatum {
    let ys: Vec<f64> = (-16..=16).map(|j| j as f64 / 4.0).collect();
    let total: f64 = ys.iter().map(|y| (-0.5 * y * y).exp()).sum();
    let atoms = ys
        .iter()
        .map(|&y| Atom::new(vec![y], c((-0.5 * y * y).exp() / total, 0.0)))
        .collect();
    pseudopath::InitialDatum::new(AtomicComplexMeasure::new(1, atoms).unwrap()).unwrap()
}

/// Random symmetric operator with eigenvalues in `[-max_eig, max_eig]` and a
/// random orthonormal frame.
pub fn random_operator(rng: &mut ChaCha8Rng, d: usize, max_eig: f64) -> pseudopath::FiniteRankOperator {
    let m = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let q = m.qr().q();
    let eigs = nalgebra::DVector::from_fn(d, |_, _| rng.random_range(-max_eig..max_eig));
    let b = &q * nalgebra::DMatrix::from_diagonal(&eigs) * q.transpose();
    let b = 0.5 * (&b + b.transpose());
    pseudopath::FiniteRankOperator::from_symmetric(&b).unwrap()
}
