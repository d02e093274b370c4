//! Eigenvalue trajectories t -> lambda_j(t): tracking with optimal matching
//! and adaptive step refinement, first-order velocities, the second-order
//! trajectory ODE (residual check and integration), and t -> infinity
//! limits.
//!
//! The trajectory equation is
//!
//!   lambda_j'' = 2 lambda_j' sum_{k != j} lambda_k' / (lambda_j - lambda_k),
//!
//! a deterministic evolution once positions and velocities at the base point
//! are known. Velocities come from first-order perturbation theory,
//! lambda_j' = L_j (dG/dt) R_j, and are never trusted blind: tests hold them
//! against central finite differences.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::linalg::{dot_herm, dot_plain, eigen_decompose, eigenvalues, outer, CMatrix};
use crate::models::{build_matrix, ModelConfig, ModelKind};

/// Maximum bisection depth before a close encounter is reported unresolved.
const MAX_REFINEMENT_DEPTH: usize = 20;

/// Matched eigenvalue paths over a parameter grid.
#[derive(Debug, Clone)]
pub struct TrajectoryBundle {
    /// Ordered parameter values, including refinement midpoints.
    pub grid: Vec<f64>,
    /// `paths[j][k]` is the j-th eigenvalue at `grid[k]`; labels are fixed
    /// at the start of the grid.
    pub paths: Vec<Vec<Complex64>>,
    /// Smallest pairwise eigenvalue distance seen at any grid point.
    pub min_gap: f64,
    /// Number of adaptive step subdivisions performed.
    pub refinements: usize,
}

impl TrajectoryBundle {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn cross_section(&self, k: usize) -> Vec<Complex64> {
        self.paths.iter().map(|p| p[k]).collect()
    }
}

fn min_pair_gap(points: &[Complex64]) -> f64 {
    let n = points.len();
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            gap = gap.min((points[i] - points[j]).norm());
        }
    }
    gap
}

/// Minimum-total-distance assignment between two equal-cardinality point
/// sets (shortest augmenting paths with potentials, O(n^3)). Returns the
/// permutation pi with `prev[i] -> next[pi[i]]`. Cost ties during column
/// selection break toward the lexicographically smaller (Re, Im) target so
/// the result is deterministic.
pub fn match_sets(prev: &[Complex64], next: &[Complex64]) -> Result<Vec<usize>> {
    if prev.len() != next.len() {
        return Err(LabError::CardinalityMismatch(prev.len(), next.len()));
    }
    let n = prev.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let cost = |i: usize, j: usize| (prev[i] - next[j]).norm();
    let lex_less = |a: Complex64, b: Complex64| (a.re, a.im) < (b.re, b.im);

    // 1-based arrays; row 0 / column 0 are sentinels.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                let better = minv[j] < delta
                    || (minv[j] == delta && j1 != 0 && lex_less(next[j - 1], next[j1 - 1]));
                if better {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            perm[matched_row[j] - 1] = j - 1;
        }
    }
    Ok(perm)
}

fn spectrum_at(model: &ModelConfig, base: &CMatrix, t: f64) -> Result<Vec<Complex64>> {
    let g = build_matrix(model, base, t)?;
    Ok(eigenvalues(&g)?.to_vec())
}

fn align(prev: &[Complex64], next_raw: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let perm = match_sets(prev, next_raw)?;
    let aligned: Vec<Complex64> = perm.iter().map(|&j| next_raw[j]).collect();
    let disp = prev
        .iter()
        .zip(aligned.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    Ok((aligned, disp))
}

/// Track all eigenvalue paths from `t_start` to `t_end`.
///
/// Diagonalizes at each grid point, matches consecutive spectra by optimal
/// assignment, and bisects any step whose maximum displacement exceeds half
/// the local minimum gap, so labels are provably consistent away from
/// collisions. Paths are labeled from the `t_start` cross-section in
/// lexicographic (Re, Im) order.
pub fn track(
    model: &ModelConfig,
    base: &CMatrix,
    t_start: f64,
    t_end: f64,
    initial_steps: usize,
) -> Result<TrajectoryBundle> {
    if initial_steps < 2 {
        return Err(LabError::InvalidArgument(format!(
            "initial_steps = {initial_steps}, need at least 2"
        )));
    }
    if t_start == t_end {
        return Err(LabError::InvalidArgument("empty parameter range".into()));
    }
    let mut start = spectrum_at(model, base, t_start)?;
    start.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let mut grid = vec![t_start];
    let mut sections: Vec<Vec<Complex64>> = vec![start];
    let mut refinements = 0usize;

    let h = (t_end - t_start) / initial_steps as f64;
    for step in 0..initial_steps {
        let t0 = t_start + h * step as f64;
        let t1 = if step + 1 == initial_steps { t_end } else { t_start + h * (step + 1) as f64 };
        let prev = sections.last().unwrap().clone();
        extend_segment(model, base, t0, &prev, t1, 0, &mut grid, &mut sections, &mut refinements)?;
    }

    let min_gap = sections.iter().map(|s| min_pair_gap(s)).fold(f64::INFINITY, f64::min);
    let n = sections[0].len();
    let mut paths = vec![Vec::with_capacity(grid.len()); n];
    for section in &sections {
        for (j, z) in section.iter().enumerate() {
            paths[j].push(*z);
        }
    }
    Ok(TrajectoryBundle { grid, paths, min_gap, refinements })
}

#[allow(clippy::too_many_arguments)]
fn extend_segment(
    model: &ModelConfig,
    base: &CMatrix,
    t0: f64,
    s0: &[Complex64],
    t1: f64,
    depth: usize,
    grid: &mut Vec<f64>,
    sections: &mut Vec<Vec<Complex64>>,
    refinements: &mut usize,
) -> Result<()> {
    let raw = spectrum_at(model, base, t1)?;
    let (aligned, disp) = align(s0, &raw)?;
    let local_gap = min_pair_gap(s0).min(min_pair_gap(&aligned));
    if disp <= 0.5 * local_gap {
        grid.push(t1);
        sections.push(aligned);
        return Ok(());
    }
    if depth >= MAX_REFINEMENT_DEPTH {
        return Err(LabError::RefinementExhausted { t: 0.5 * (t0 + t1) });
    }
    let tm = 0.5 * (t0 + t1);
    *refinements += 1;
    extend_segment(model, base, t0, s0, tm, depth + 1, grid, sections, refinements)?;
    let sm = sections.last().unwrap().clone();
    extend_segment(model, base, tm, &sm, t1, depth + 1, grid, sections, refinements)
}

/// dG/dt for each family; constant in t.
fn derivative_matrix(model: &ModelConfig) -> CMatrix {
    match model.kind() {
        ModelKind::Additive => outer(model.v(), model.w()),
        ModelKind::AntiHermitian => {
            outer(model.v(), model.v()).mapv(|z| z * Complex64::new(0.0, 1.0))
        }
        ModelKind::Multiplicative => {
            let mut d = outer(model.v(), model.v());
            for v in model.directions().iter().skip(1) {
                d += &outer(v, v);
            }
            d
        }
    }
}

/// Eigenvalues and their t-derivatives at parameter value t, from one
/// eigendecomposition: lambda_j' = L_j (dG/dt) R_j. For the multiplicative
/// family dG/dt = U sum_i v_i v_i*.
pub fn eigen_state_at(
    model: &ModelConfig,
    base: &CMatrix,
    t: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let g = build_matrix(model, base, t)?;
    let es = eigen_decompose(&g)?;
    let mut dg = derivative_matrix(model);
    if model.kind() == ModelKind::Multiplicative {
        dg = base.dot(&dg);
    }
    let n = es.n();
    let mut velocities = Vec::with_capacity(n);
    for j in 0..n {
        let dr = dg.dot(&es.right(j).to_owned());
        velocities.push(dot_plain(es.left(j), dr.view()));
    }
    Ok((es.values.to_vec(), velocities))
}

/// Path velocities at the base point t = 0.
pub fn initial_velocities(model: &ModelConfig, base: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(eigen_state_at(model, base, 0.0)?.1)
}

/// Pick a uniform sub-grid out of a (possibly refined) grid: refinement only
/// inserts midpoints, so the coarsest arithmetic progression through both
/// endpoints survives. Returns selected indices and the spacing.
fn uniform_subgrid(grid: &[f64]) -> Option<(Vec<usize>, f64)> {
    if grid.len() < 3 {
        return None;
    }
    let span = grid.last().unwrap() - grid.first().unwrap();
    let tol = 1e-9 * span.abs().max(1.0);
    let mut h = grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max)
        * span.signum();
    for _ in 0..30 {
        let mut indices = vec![0usize];
        let mut target = grid[0] + h;
        let mut ok = true;
        let mut i = 1;
        while (target - grid[grid.len() - 1]).abs() > tol
            && (target - grid[0]).abs() <= span.abs() + tol
        {
            while i < grid.len() && (grid[i] - target).abs() > tol {
                i += 1;
            }
            if i == grid.len() {
                ok = false;
                break;
            }
            indices.push(i);
            target += h;
        }
        if ok {
            indices.push(grid.len() - 1);
            if indices.len() >= 3 {
                return Some((indices, h));
            }
        }
        h *= 0.5;
    }
    None
}

/// Pointwise relative residual of the trajectory ODE on a uniform sub-grid,
/// with derivatives from central finite differences. Entry `[j][k]` covers
/// path j at the k-th interior sub-grid point.
pub fn ode_residual(bundle: &TrajectoryBundle) -> Result<Vec<Vec<f64>>> {
    let (indices, h) = uniform_subgrid(&bundle.grid)
        .ok_or_else(|| LabError::InvalidArgument("no uniform sub-grid available".into()))?;
    let spacing = h.abs();
    if bundle.min_gap <= 10.0 * spacing {
        return Err(LabError::GapTooSmall { min_gap: bundle.min_gap, spacing });
    }
    let n = bundle.n_paths();
    let m = indices.len();
    let mut residuals = vec![Vec::with_capacity(m.saturating_sub(2)); n];
    for k in 1..m - 1 {
        let at = |j: usize, s: usize| bundle.paths[j][indices[s]];
        // Central differences for lambda' and lambda''.
        let primes: Vec<Complex64> =
            (0..n).map(|j| (at(j, k + 1) - at(j, k - 1)) / Complex64::new(2.0 * h, 0.0)).collect();
        for j in 0..n {
            let second = (at(j, k + 1) - at(j, k) * 2.0 + at(j, k - 1))
                / Complex64::new(h * h, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for l in 0..n {
                if l != j {
                    sum += primes[l] / (at(j, k) - at(l, k));
                }
            }
            let rhs = primes[j] * 2.0 * sum;
            let denom = second.norm() + rhs.norm() + 1e-12;
            residuals[j].push((second - rhs).norm() / denom);
        }
    }
    Ok(residuals)
}

type Derivative = (Vec<Complex64>, Vec<Complex64>);

fn ode_rhs(positions: &[Complex64], velocities: &[Complex64], t: f64) -> Result<Derivative> {
    let n = positions.len();
    let mut accel = Vec::with_capacity(n);
    for j in 0..n {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..n {
            if k == j {
                continue;
            }
            let gap = positions[j] - positions[k];
            if gap.norm() < 1e-6 {
                return Err(LabError::CollisionAbort { t, i: j.min(k), j: j.max(k) });
            }
            sum += velocities[k] / gap;
        }
        accel.push(velocities[j] * 2.0 * sum);
    }
    Ok((velocities.to_vec(), accel))
}

/// Fourth-order (classical Runge-Kutta) integration of the second-order
/// trajectory system. Refuses to step through near-collisions: any pairwise
/// gap below 1e-6 aborts with the offending time and pair.
pub fn integrate_ode(
    positions: &[Complex64],
    velocities: &[Complex64],
    t_span: (f64, f64),
    step: f64,
) -> Result<TrajectoryBundle> {
    if positions.len() != velocities.len() {
        return Err(LabError::CardinalityMismatch(positions.len(), velocities.len()));
    }
    if !(step > 0.0) {
        return Err(LabError::InvalidArgument(format!("step = {step}")));
    }
    let (t0, t1) = t_span;
    let span = t1 - t0;
    if span == 0.0 {
        return Err(LabError::InvalidArgument("empty integration span".into()));
    }
    let steps = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / steps as f64;

    let n = positions.len();
    let mut lam = positions.to_vec();
    let mut mu = velocities.to_vec();
    let mut grid = Vec::with_capacity(steps + 1);
    let mut paths = vec![Vec::with_capacity(steps + 1); n];
    let mut min_gap = min_pair_gap(&lam);
    grid.push(t0);
    for (j, z) in lam.iter().enumerate() {
        paths[j].push(*z);
    }

    let add = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
        a.iter().zip(b.iter()).map(|(x, y)| x + y * Complex64::new(s, 0.0)).collect()
    };

    for k in 0..steps {
        let t = t0 + h * k as f64;
        let (k1p, k1v) = ode_rhs(&lam, &mu, t)?;
        let (k2p, k2v) = ode_rhs(&add(&lam, &k1p, h / 2.0), &add(&mu, &k1v, h / 2.0), t + h / 2.0)?;
        let (k3p, k3v) = ode_rhs(&add(&lam, &k2p, h / 2.0), &add(&mu, &k2v, h / 2.0), t + h / 2.0)?;
        let (k4p, k4v) = ode_rhs(&add(&lam, &k3p, h), &add(&mu, &k3v, h), t + h)?;
        for j in 0..n {
            lam[j] += (k1p[j] + (k2p[j] + k3p[j]) * 2.0 + k4p[j]) * Complex64::new(h / 6.0, 0.0);
            mu[j] += (k1v[j] + (k2v[j] + k3v[j]) * 2.0 + k4v[j]) * Complex64::new(h / 6.0, 0.0);
        }
        min_gap = min_gap.min(min_pair_gap(&lam));
        grid.push(t0 + h * (k + 1) as f64);
        for (j, z) in lam.iter().enumerate() {
            paths[j].push(*z);
        }
    }
    Ok(TrajectoryBundle { grid, paths, min_gap, refinements: 0 })
}

/// Where the non-escaping paths end up as t -> +-infinity.
#[derive(Debug, Clone)]
pub struct LargeTLimits {
    /// The n-1 finite limit points.
    pub finite_limits: Vec<Complex64>,
    /// Whether one path escapes to infinity (the outlier).
    pub outlier_escapes: bool,
}

/// Finite t -> infinity limits.
///
/// Additive: the n-1 roots of the numerator of the weighted resolvent
/// w*(zI - G)^-1 v, assembled from the eigen-expansion
/// sum_j (w* R_j)(L_j v) prod_{k != j} (z - lambda_k).
///
/// Anti-Hermitian: the spectrum of H compressed to the orthogonal complement
/// of v; those limits are real and interlace Sp(H).
pub fn large_t_limits(model: &ModelConfig, base: &CMatrix) -> Result<LargeTLimits> {
    match model.kind() {
        ModelKind::Additive => {
            // The numerator polynomial of w*(zI - G)^-1 v factors through the
            // bordered determinant det([zI - G, -v; w*, 0]); its roots are
            // the eigenvalues of (P* Q)^-1 (P* G Q) with Q spanning the
            // w-complement and P the v-complement. Assembling coefficients
            // from the eigen-expansion and feeding a degree n-1 companion
            // matrix computes the same roots but loses most digits beyond
            // n ~ 20; tests keep that construction as the small-n oracle.
            let q = complement_basis(model.w());
            let p = complement_basis(model.v());
            let pq = crate::linalg::adjoint(&p).dot(&q);
            let pgq = crate::linalg::adjoint(&p).dot(&base.dot(&q));
            use ndarray_linalg::Inverse;
            let m = pq
                .inv()
                .map_err(|_| LabError::IllConditionedBasis { condition: f64::INFINITY })?
                .dot(&pgq);
            let finite_limits = eigenvalues(&m)?.to_vec();
            let lead = dot_herm(model.w().view(), model.v().view());
            Ok(LargeTLimits { finite_limits, outlier_escapes: lead.norm() > 1e-9 })
        }
        ModelKind::AntiHermitian => {
            let q = complement_basis(model.v());
            let compressed = crate::linalg::adjoint(&q).dot(&base.dot(&q));
            // Symmetrize: the compression of a Hermitian matrix is Hermitian.
            let herm = (&compressed + &crate::linalg::adjoint(&compressed)).mapv(|z| z * 0.5);
            use ndarray_linalg::{Eigh, UPLO};
            let (w, _) = herm.eigh(UPLO::Lower)?;
            let finite_limits = w.iter().map(|x| Complex64::new(*x, 0.0)).collect();
            Ok(LargeTLimits { finite_limits, outlier_escapes: true })
        }
        ModelKind::Multiplicative => Err(LabError::KindMismatch(
            "large-t limits are defined for the additive and anti-Hermitian families".into(),
        )),
    }
}

/// Orthonormal basis of the orthogonal complement of v (n x (n-1)), from the
/// Householder reflector that maps v onto the first coordinate axis.
pub fn complement_basis(v: &Array1<Complex64>) -> CMatrix {
    let n = v.len();
    let phase = if v[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut w = v.to_owned();
    w[0] += phase * norm;
    let wnorm2 = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
    // Reflector I - 2 w w* / ||w||^2; columns 2..n span v-perp.
    let mut q = Array2::zeros((n, n - 1));
    for col in 1..n {
        let mut e = Array1::zeros(n);
        e[col] = Complex64::new(1.0, 0.0);
        let coeff = 2.0 * w[col].conj() / wnorm2;
        for row in 0..n {
            q[[row, col - 1]] = e[row] - coeff * w[row];
        }
    }
    q
}
