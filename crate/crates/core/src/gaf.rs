//! Truncated Gaussian power series g(z) = sum_k g_k z^k with i.i.d. standard
//! complex Gaussian coefficients: sampling, zero finding in a disk, and
//! annulus-count comparison of zero clouds against other point ensembles.
//!
//! Zeros come from companion-matrix eigenvalues of the truncated polynomial
//! and every count is cross-validated by an argument-principle winding
//! integral on the circle; a disagreement is an error, not a warning.

use num_complex::Complex64;

use crate::ensembles::{complex_standard_gaussian, SeedSpec};
use crate::error::{LabError, Result};
use crate::poly;

/// Where truncation stops mattering: the default tail budget at the working
/// radius.
pub const TAIL_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GafSample {
    coefficients: Vec<Complex64>,
}

impl GafSample {
    pub fn from_coefficients(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(LabError::InvalidTruncation(coefficients.len()));
        }
        if !coefficients.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::NonFinite);
        }
        Ok(GafSample { coefficients })
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Drop the constant term: the series sum_{k>=1} g_k z^k that shows up
    /// when a characterization function is expanded around its (known)
    /// constant value.
    pub fn without_constant_term(&self) -> GafSample {
        let mut coefficients = self.coefficients.clone();
        coefficients[0] = Complex64::new(0.0, 0.0);
        GafSample { coefficients }
    }
}

/// K i.i.d. standard complex Gaussian coefficients.
pub fn sample_gaf(k: usize, seed: SeedSpec) -> Result<GafSample> {
    if k < 2 {
        return Err(LabError::InvalidTruncation(k));
    }
    let mut rng = seed.rng();
    Ok(GafSample {
        coefficients: (0..k).map(|_| complex_standard_gaussian(&mut rng)).collect(),
    })
}

/// Smallest truncation K making the tail of the series negligible at radius
/// r: K >= log(budget * (1 - r)) / log(r).
pub fn required_truncation(r: f64) -> usize {
    assert!(r > 0.0 && r < 1.0, "radius must sit strictly inside the unit disk");
    let k = ((TAIL_BUDGET * (1.0 - r)).ln() / r.ln()).ceil();
    (k.max(2.0)) as usize
}

/// Zeros of g - c inside |z| <= r, sorted by (Re, Im).
///
/// The companion-matrix roots are filtered by modulus and the count is
/// checked against the winding number of g - c on |z| = r (4096 base
/// points, adaptive bisection near rapid phase swings).
pub fn gaf_zeros(gaf: &GafSample, c: Complex64, r: f64) -> Result<Vec<Complex64>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::InvalidArgument(format!("radius {r} outside (0, 1)")));
    }
    let required = required_truncation(r);
    if gaf.truncation() < required {
        return Err(LabError::TruncationTooSmall { k: gaf.truncation(), required });
    }
    let mut p = gaf.coefficients.clone();
    p[0] -= c;
    if p.iter().all(|z| z.norm() == 0.0) {
        return Err(LabError::DegenerateInput(
            "sample coincides with the target level; g - c is identically zero".into(),
        ));
    }
    let mut zeros: Vec<Complex64> = poly::roots(&p)?.into_iter().filter(|z| z.norm() <= r).collect();
    zeros.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let winding = winding_number(
        |z| Ok(poly::eval(&p, z)),
        Complex64::new(0.0, 0.0),
        r,
        4096,
    )?;
    if winding != zeros.len() as i64 {
        return Err(LabError::CountMismatch { roots: zeros.len(), winding });
    }
    Ok(zeros)
}

/// Winding number of f around 0 along the circle |z - center| = radius,
/// from accumulated phase increments. Segments whose phase jump exceeds
/// pi/2 are bisected (that keeps the count exact unless a zero sits on the
/// contour itself).
pub fn winding_number<F>(
    mut f: F,
    center: Complex64,
    radius: f64,
    base_points: usize,
) -> Result<i64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let at = |theta: f64, f: &mut F| -> Result<Complex64> {
        let z = center + Complex64::from_polar(radius, theta);
        let val = f(z)?;
        if !val.re.is_finite() || !val.im.is_finite() || val.norm() < 1e-290 {
            return Err(LabError::DegenerateInput(format!(
                "function vanishes or blows up on the contour at theta = {theta}"
            )));
        }
        Ok(val)
    };

    fn segment<F>(
        f: &mut F,
        at: &dyn Fn(f64, &mut F) -> Result<Complex64>,
        t0: f64,
        v0: Complex64,
        t1: f64,
        v1: Complex64,
        depth: usize,
    ) -> Result<f64>
    where
        F: FnMut(Complex64) -> Result<Complex64>,
    {
        let delta = (v1 / v0).arg();
        if delta.abs() <= std::f64::consts::FRAC_PI_2 {
            return Ok(delta);
        }
        if depth == 0 {
            return Err(LabError::DegenerateInput(
                "phase winding did not converge (zero too close to the contour)".into(),
            ));
        }
        let tm = 0.5 * (t0 + t1);
        let vm = at(tm, f)?;
        Ok(segment(f, at, t0, v0, tm, vm, depth - 1)?
            + segment(f, at, tm, vm, t1, v1, depth - 1)?)
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let mut total = 0.0f64;
    let mut theta0 = 0.0f64;
    let mut v0 = at(0.0, &mut f)?;
    let first = v0;
    for k in 1..=base_points {
        let theta1 = two_pi * k as f64 / base_points as f64;
        let v1 = if k == base_points { first } else { at(theta1, &mut f)? };
        total += segment(&mut f, &at, theta0, v0, theta1, v1, 48)?;
        theta0 = theta1;
        v0 = v1;
    }
    let turns = total / two_pi;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(LabError::DegenerateInput(format!(
            "winding number {turns} is not close to an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Per-annulus two-sample comparison of point clouds.
#[derive(Debug, Clone)]
pub struct AnnulusComparison {
    pub inner: f64,
    pub outer: f64,
    pub mean_a: f64,
    pub stderr_a: f64,
    pub mean_b: f64,
    pub stderr_b: f64,
    /// Standardized difference of the two means.
    pub z_score: f64,
}

fn mean_and_stderr(counts: &[f64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean annulus counts and standardized differences for two ensembles of
/// point sets. No verdict is attached; thresholds belong to the caller.
pub fn compare_clouds(
    sample_a: &[Vec<Complex64>],
    sample_b: &[Vec<Complex64>],
    annuli: &[(f64, f64)],
) -> Result<Vec<AnnulusComparison>> {
    const MIN_TRIALS: usize = 100;
    if sample_a.len() < MIN_TRIALS || sample_b.len() < MIN_TRIALS {
        return Err(LabError::InsufficientTrials {
            got: sample_a.len().min(sample_b.len()),
            required: MIN_TRIALS,
        });
    }
    let mut out = Vec::with_capacity(annuli.len());
    for &(inner, outer) in annuli {
        if !(0.0..=outer).contains(&inner) {
            return Err(LabError::InvalidArgument(format!(
                "annulus [{inner}, {outer}) is not ordered"
            )));
        }
        let count = |sets: &[Vec<Complex64>]| -> Vec<f64> {
            sets.iter()
                .map(|s| s.iter().filter(|z| (inner..outer).contains(&z.norm())).count() as f64)
                .collect()
        };
        let (mean_a, stderr_a) = mean_and_stderr(&count(sample_a));
        let (mean_b, stderr_b) = mean_and_stderr(&count(sample_b));
        let denom = (stderr_a * stderr_a + stderr_b * stderr_b).sqrt();
        let z_score = if denom == 0.0 {
            if mean_a == mean_b {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (mean_a - mean_b) / denom
        };
        out.push(AnnulusComparison { inner, outer, mean_a, stderr_a, mean_b, stderr_b, z_score });
    }
    Ok(out)
}
