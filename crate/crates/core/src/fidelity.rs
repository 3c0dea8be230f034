//! Operator-inequality fidelity lines `F ≥ f_k·s_k − μ_k` and the network
//! bounds built from them.
//!
//! The positivity scan works with real symmetric matrices: every operator
//! involved is a real combination of `σz`, `σx` and a real target
//! projector.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BitString, Variant};
use crate::error::{invalid, Error, Result};
use crate::quantum::{c, ComplexMatrix};

type RMat = DMatrix<f64>;

/// Default bisection tolerance on `f`.
pub const DEFAULT_F_TOL: f64 = 1e-4;
/// An operator counts as positive when its minimum eigenvalue is at least
/// `-POSITIVITY_TOL`.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// `F ≥ f·s − μ` for `k` effective parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityLine {
    pub k: usize,
    pub f: f64,
    pub mu: f64,
}

impl FidelityLine {
    /// Line through fidelity 1 at the quantum maximum `2^{k−1}√2`.
    pub fn through_maximum(k: usize, f: f64) -> Self {
        Self {
            k,
            f,
            mu: f * quantum_max(k) - 1.0,
        }
    }

    /// Stored constants for `k ∈ {2, 3, 4}`.
    pub fn analytic(k: usize) -> Result<Self> {
        let f = match k {
            2 => (4.0 + 5.0 * SQRT_2) / 16.0,
            3 => 3.0 * (1.0 + SQRT_2) / 16.0,
            4 => (1.0 + SQRT_2) / 16.0,
            _ => {
                return Err(Error::Unsupported(format!(
                    "no fidelity line is available for k = {k}"
                )))
            }
        };
        Ok(Self::through_maximum(k, f))
    }

    /// `f·s − μ`, unclamped.
    pub fn value(&self, s_k: f64) -> f64 {
        self.f * s_k - self.mu
    }
}

fn quantum_max(k: usize) -> f64 {
    (1u64 << (k - 1)) as f64 * SQRT_2
}

/// `g(a) = (1+√2)(sin a + cos a − 1)`.
pub fn dephasing_gain(a: f64) -> f64 {
    (1.0 + SQRT_2) * (a.sin() + a.cos() - 1.0)
}

fn check_angle(a: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&a) {
        return Err(invalid(format!("angle {a} outside [0, π/2]")));
    }
    Ok(())
}

/// `Λ†_a(ρ) = (1+g)/2·ρ + (1−g)/2·ΓρΓ` on a single qubit, with `Γ = σz` for
/// `a ≤ π/4` and `σx` otherwise.
pub fn extraction_channel_adjoint(angle: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_angle(angle)?;
    if rho.nrows() != 2 || rho.ncols() != 2 {
        return Err(invalid("the extraction channel acts on a single qubit"));
    }
    let g = dephasing_gain(angle);
    let gamma = if angle <= FRAC_PI_4 {
        crate::quantum::pauli_z()
    } else {
        crate::quantum::pauli_x()
    };
    Ok(rho.scale((1.0 + g) / 2.0) + (&gamma * rho * &gamma).scale((1.0 - g) / 2.0))
}

fn party_observables(a: f64) -> [RMat; 2] {
    let (s, co) = a.sin_cos();
    [
        RMat::from_row_slice(2, 2, &[co, s, s, -co]),
        RMat::from_row_slice(2, 2, &[co, -s, -s, -co]),
    ]
}

fn kron(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

/// Bell operator of `S_k^+` with `A_{0,1} = cos a·σz ± sin a·σx` per party.
fn bell_operator(angles: &[f64]) -> RMat {
    let k = angles.len();
    let obs: Vec<[RMat; 2]> = angles.iter().map(|&a| party_observables(a)).collect();
    let d = 1usize << k;
    let mut w = RMat::zeros(d, d);
    for x in BitString::all(k) {
        let c = Variant::Plus.sign_for_weight(x.weight()) as f64;
        let term = (1..k).fold(obs[0][x.bit(0) as usize].clone(), |acc, i| {
            kron(&acc, &obs[i][x.bit(i) as usize])
        });
        w += term * c;
    }
    w
}

/// Channel `Λ†_{a_i}` applied on every qubit of `rho`.
fn apply_channels(rho: &RMat, angles: &[f64]) -> RMat {
    let k = angles.len();
    let d = rho.nrows();
    let mut out = rho.clone();
    for (i, &a) in angles.iter().enumerate() {
        let g = dephasing_gain(a);
        let (keep, flip) = ((1.0 + g) / 2.0, (1.0 - g) / 2.0);
        let bit = 1usize << (k - 1 - i);
        let prev = out.clone();
        if a <= FRAC_PI_4 {
            for r in 0..d {
                for col in 0..d {
                    let sign = if ((r ^ col) & bit) == 0 { 1.0 } else { -1.0 };
                    out[(r, col)] = prev[(r, col)] * (keep + flip * sign);
                }
            }
        } else {
            for r in 0..d {
                for col in 0..d {
                    out[(r, col)] = keep * prev[(r, col)] + flip * prev[(r ^ bit, col ^ bit)];
                }
            }
        }
    }
    out
}

fn min_eig(m: RMat) -> f64 {
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Target projector and cached data for the operator `K − fW + μI`.
#[derive(Debug, Clone)]
pub struct StopiProblem {
    k: usize,
    target: RMat,
}

impl StopiProblem {
    /// The target is the top eigenvector of `W` at all angles `π/4`, where
    /// `W` attains `2^{k−1}√2` with a one-dimensional eigenspace.
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(invalid("the operator inequality needs k >= 2"));
        }
        let w = bell_operator(&vec![FRAC_PI_4; k]);
        let eig = SymmetricEigen::new(w);
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let (top, second) = (eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]]);
        if (top - quantum_max(k)).abs() > 1e-9 || top - second < 1e-6 {
            return Err(Error::NumericalFailure(
                "maximal eigenvector of the Bell operator is not unique".into(),
            ));
        }
        let v = eig.eigenvectors.column(idx[0]).into_owned();
        Ok(Self {
            k,
            target: &v * v.transpose(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Target state as a complex matrix.
    pub fn target(&self) -> ComplexMatrix {
        self.target.map(|x| c(x, 0.0))
    }

    fn operator(&self, f: f64, mu: f64, angles: &[f64]) -> RMat {
        let d = self.target.nrows();
        apply_channels(&self.target, angles) - bell_operator(angles) * f + RMat::identity(d, d) * mu
    }

    pub fn min_eigenvalue(&self, f: f64, mu: f64, angles: &[f64]) -> f64 {
        min_eig(self.operator(f, mu, angles))
    }
}

/// `K − fW + μI` for the given angles, as a complex Hermitian matrix.
pub fn stopi_operator(k: usize, f: f64, mu: f64, angles: &[f64]) -> Result<ComplexMatrix> {
    if angles.len() != k {
        return Err(invalid(format!(
            "expected {k} angles, got {}",
            angles.len()
        )));
    }
    for &a in angles {
        check_angle(a)?;
    }
    let p = StopiProblem::new(k)?;
    Ok(p.operator(f, mu, angles).map(|x| c(x, 0.0)))
}

/// Coarse grid on `[0, π/2]^k` plus local refinement around the incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AngleGrid {
    pub points: usize,
    pub refinements: usize,
    pub factor: usize,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self {
            points: 25,
            refinements: 2,
            factor: 5,
        }
    }
}

impl AngleGrid {
    pub fn new(points: usize, refinements: usize, factor: usize) -> Result<Self> {
        if points < 2 || factor < 2 {
            return Err(invalid(
                "grids need at least 2 points and a refinement factor >= 2",
            ));
        }
        Ok(Self {
            points,
            refinements,
            factor,
        })
    }

    fn step(&self) -> f64 {
        FRAC_PI_2 / (self.points - 1) as f64
    }
}

/// Non-decreasing index tuples; the operator spectrum is symmetric under
/// permutations of the parties.
fn sorted_tuples(k: usize, points: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < points {
                let v = cur[i] + 1;
                for slot in cur.iter_mut().skip(i) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

fn argmin(samples: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    samples
        .into_iter()
        .reduce(|a, b| {
            // Deterministic tie-breaking by angle tuple.
            match b.0.total_cmp(&a.0) {
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal if b.1 < a.1 => b,
                _ => a,
            }
        })
        .expect("non-empty grid")
}

/// Minimum over the grid of the smallest eigenvalue of `K − fW + μI`, with
/// its minimizing angles.
pub fn min_eig_over_grid(
    problem: &StopiProblem,
    f: f64,
    mu: f64,
    grid: &AngleGrid,
) -> (f64, Vec<f64>) {
    let k = problem.k();
    let step = grid.step();
    let coarse: Vec<(f64, Vec<f64>)> = sorted_tuples(k, grid.points)
        .into_par_iter()
        .map(|idx| {
            let angles: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            (problem.min_eigenvalue(f, mu, &angles), angles)
        })
        .collect();
    let mut best = argmin(coarse);
    let mut width = step;
    for _ in 0..grid.refinements {
        let fine = width / grid.factor as f64;
        let offsets: Vec<f64> = (-(grid.factor as i64)..=grid.factor as i64)
            .map(|j| j as f64 * fine)
            .collect();
        let n_off = offsets.len();
        let centre = best.1.clone();
        let local: Vec<(f64, Vec<f64>)> = (0..n_off.pow(k as u32))
            .into_par_iter()
            .map(|mut code| {
                let mut angles = Vec::with_capacity(k);
                for &c0 in &centre {
                    let a = (c0 + offsets[code % n_off]).clamp(0.0, FRAC_PI_2);
                    code /= n_off;
                    angles.push(a);
                }
                (problem.min_eigenvalue(f, mu, &angles), angles)
            })
            .collect();
        let cand = argmin(local);
        if cand.0 < best.0 {
            best = cand;
        }
        width = fine;
    }
    best
}

/// Result of the threshold search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub line: FidelityLine,
    pub grid_minimum: f64,
    pub minimizer: Vec<f64>,
    pub iterations: usize,
}

/// Bisection for the smallest `f` whose line `μ(f) = f·2^{k−1}√2 − 1` keeps
/// the operator positive (within [`POSITIVITY_TOL`]) on the grid. `tol` is
/// the bisection tolerance on `f`.
pub fn find_f_threshold(k: usize, grid: &AngleGrid, tol: f64) -> Result<ThresholdResult> {
    if !(2..=4).contains(&k) {
        return Err(Error::Unsupported(format!(
            "threshold search supports k in 2..=4, got {k}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }
    let problem = StopiProblem::new(k)?;
    let passes = |f: f64| {
        let line = FidelityLine::through_maximum(k, f);
        let (m, angles) = min_eig_over_grid(&problem, line.f, line.mu, grid);
        (m >= -POSITIVITY_TOL, m, angles)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if passes(lo).0 {
        return Err(Error::NumericalFailure(
            "bracket failure: f = 0 already passes".into(),
        ));
    }
    let (ok, mut best_min, mut best_angles) = passes(hi);
    if !ok {
        return Err(Error::NumericalFailure(
            "bracket failure: f = 1 does not pass".into(),
        ));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, m, angles) = passes(mid);
        if ok {
            hi = mid;
            best_min = m;
            best_angles = angles;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        line: FidelityLine::through_maximum(k, hi),
        grid_minimum: best_min,
        minimizer: best_angles,
        iterations,
    })
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(invalid(format!("need 2 <= k <= N, got N = {n}, k = {k}")));
    }
    Ok(())
}

/// `f_k·s_N/2^{N−k} − μ_k`, unclamped.
pub fn network_bound_unclamped(s_n: f64, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let line = FidelityLine::analytic(k)?;
    Ok(line.value(s_n / (1u64 << (n - k)) as f64))
}

/// Network fidelity bound, clamped below at 0.
pub fn network_bound(s_n: f64, n: usize, k: usize) -> Result<f64> {
    Ok(network_bound_unclamped(s_n, n, k)?.max(0.0))
}

/// Minimum of [`network_bound`] over `ks` and the `k` attaining it (the
/// smallest such `k` on ties).
pub fn worst_case_bound(s_n: f64, n: usize, ks: &[usize]) -> Result<(f64, usize)> {
    if ks.is_empty() {
        return Err(invalid("empty k range"));
    }
    let mut best: Option<(f64, usize)> = None;
    for &k in ks {
        let b = network_bound(s_n, n, k)?;
        best = match best {
            Some((v, bk)) if v < b || (v == b && bk < k) => Some((v, bk)),
            _ => Some((b, k)),
        };
    }
    Ok(best.expect("non-empty"))
}

/// One sample of a fidelity curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub s_value: f64,
    pub k: usize,
    pub assumed_dishonest: usize,
    pub bound: f64,
    pub bound_clamped: f64,
    pub worst_case: f64,
}

/// Lines for every coalition size `1..N−1` over `samples` values of `s_N`
/// between `2^{N−1}` and `2^{N−1}√2`. The worst-case column is the
/// unclamped minimum over all lines at that `s`.
pub fn curve_rows(n: usize, samples: usize) -> Result<Vec<CurveRow>> {
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!(
            "curves need lines for every k <= N; available for N in 2..=4, got {n}"
        )));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let lo = (1u64 << (n - 1)) as f64;
    let hi = lo * SQRT_2;
    let s_values: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect();
    let ks: Vec<usize> = (2..=n).rev().collect();
    let mut rows = Vec::with_capacity(ks.len() * samples);
    for &k in &ks {
        for &s in &s_values {
            let bound = network_bound_unclamped(s, n, k)?;
            let worst = ks
                .iter()
                .map(|&kk| network_bound_unclamped(s, n, kk))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            rows.push(CurveRow {
                s_value: s,
                k,
                assumed_dishonest: n - k + 1,
                bound,
                bound_clamped: bound.max(0.0),
                worst_case: worst,
            });
        }
    }
    Ok(rows)
}
