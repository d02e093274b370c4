//! Outlier separation analysis: eigenvalue classification against a pair of
//! disjoint domains, the localization domains for the anti-Hermitian and
//! multiplicative regimes, the isotropic resolvent-law margin, and threshold
//! counts against the asymptotic prediction.

use num_complex::Complex64;
use serde::Serialize;

use crate::ensembles::{unit_vector_from_rng, SeedSpec};
use crate::error::{LabError, Result};
use crate::linalg::{dot_herm, shifted_solve, CMatrix, CVector};
use crate::models::{build_matrix, expected_count, msc, spectral_function, ModelConfig, ModelKind};

/// A region of the complex plane used to classify eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Region {
    Disk { center_re: f64, center_im: f64, radius: f64 },
    /// Horizontal band im_min <= Im z < im_max, all real parts.
    Strip { im_min: f64, im_max: f64 },
    /// Centered annulus inner <= |z| <= outer (outer may be infinite).
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Region {
        Region::Disk { center_re: center.re, center_im: center.im, radius }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center_re, center_im, radius } => {
                (z - Complex64::new(center_re, center_im)).norm() <= radius
            }
            Region::Strip { im_min, im_max } => z.im >= im_min && z.im < im_max,
            Region::Annulus { inner, outer } => {
                let r = z.norm();
                r >= inner && r <= outer
            }
        }
    }

    /// Euclidean distance between two regions (0 means they touch or
    /// overlap). Exact for every pair involving a disk and for same-type
    /// pairs; other combinations are treated as touching.
    pub fn distance(&self, other: &Region) -> f64 {
        use Region::*;
        match (self, other) {
            (Disk { center_re, center_im, radius }, _) => {
                let c = Complex64::new(*center_re, *center_im);
                (other.distance_to_point(c) - radius).max(0.0)
            }
            (_, Disk { .. }) => other.distance(self),
            (Strip { im_min: a0, im_max: a1 }, Strip { im_min: b0, im_max: b1 }) => {
                interval_gap(*a0, *a1, *b0, *b1)
            }
            (Annulus { inner: a0, outer: a1 }, Annulus { inner: b0, outer: b1 }) => {
                interval_gap(*a0, *a1, *b0, *b1)
            }
            _ => 0.0,
        }
    }

    fn distance_to_point(&self, z: Complex64) -> f64 {
        match *self {
            Region::Disk { center_re, center_im, radius } => {
                ((z - Complex64::new(center_re, center_im)).norm() - radius).max(0.0)
            }
            Region::Strip { im_min, im_max } => {
                if z.im < im_min {
                    im_min - z.im
                } else if z.im > im_max {
                    z.im - im_max
                } else {
                    0.0
                }
            }
            Region::Annulus { inner, outer } => {
                let r = z.norm();
                if r < inner {
                    inner - r
                } else if r > outer {
                    r - outer
                } else {
                    0.0
                }
            }
        }
    }
}

fn interval_gap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (b0 - a1).max(a0 - b1).max(0.0)
}

/// Outcome of classifying a spectrum against a candidate outlier domain D1
/// and bulk domain D2.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub outlier: Option<Complex64>,
    /// How many eigenvalues landed in D1.
    pub outlier_count: usize,
    pub d1: Region,
    pub d2: Region,
    /// Distance between the two domains.
    pub margin: f64,
    /// True exactly when D1 holds the expected count, D2 holds everything
    /// else, and the margin is positive.
    pub satisfied: bool,
}

/// Classify a spectrum expecting exactly one eigenvalue in D1.
pub fn detect_separation(
    spectrum: &[Complex64],
    d1: &Region,
    d2: &Region,
) -> Result<SeparationReport> {
    detect_separation_count(spectrum, d1, d2, 1)
}

/// Classify a spectrum expecting `expected` eigenvalues in D1 (rank-d
/// perturbations put d paths in the outlier domain).
pub fn detect_separation_count(
    spectrum: &[Complex64],
    d1: &Region,
    d2: &Region,
    expected: usize,
) -> Result<SeparationReport> {
    let margin = d1.distance(d2);
    if margin <= 0.0 {
        return Err(LabError::OverlappingDomains);
    }
    let mut in_d1 = Vec::new();
    let mut in_d2 = 0usize;
    for &z in spectrum {
        if d1.contains(z) {
            in_d1.push(z);
        } else if d2.contains(z) {
            in_d2 += 1;
        }
    }
    let satisfied = in_d1.len() == expected && in_d1.len() + in_d2 == spectrum.len();
    let outlier = if in_d1.len() == 1 { Some(in_d1[0]) } else { None };
    Ok(SeparationReport {
        outlier,
        outlier_count: in_d1.len(),
        d1: d1.clone(),
        d2: d2.clone(),
        margin,
        satisfied,
    })
}

/// Localization domains for the anti-Hermitian family at supercritical
/// coupling t > 1:
///
///   D1 = disk centered at i(t - 1/t) with radius n^eps / sqrt(n (t - 1/t)),
///   D2 = band 0 <= Im z < n^eps / (n (t - 1/t)).
///
/// The band floor is padded by 1e-12 so that eigenvalues that are exactly
/// real up to floating-point noise still classify as bulk.
pub fn anti_hermitian_domains(n: usize, t: f64, epsilon: f64) -> Result<(Region, Region)> {
    if t <= 1.0 {
        return Err(LabError::RegimeViolation(format!(
            "separated outlier needs t > 1, got t = {t}"
        )));
    }
    let nn = n as f64;
    let gap = t - 1.0 / t;
    let n_eps = nn.powf(epsilon);
    let d1 = Region::disk(Complex64::new(0.0, gap), n_eps / (nn * gap).sqrt());
    let d2 = Region::Strip { im_min: -1e-12, im_max: n_eps / (nn * gap) };
    Ok((d1, d2))
}

/// Rouche-style localization region for the multiplicative family at
/// 0 < |t| < 1: the predicted outlier z_t = t / ((1-t) c1) together with the
/// region where N^eps |z|^2 / (1 - |z|) < |c1| |z - z_t| (membership test);
/// c1 = v* U* v is the trial's linear coefficient.
#[derive(Debug, Clone)]
pub struct MultiplicativeRegion {
    pub z_t: Complex64,
    n_eps: f64,
    c1_abs: f64,
}

impl MultiplicativeRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if r >= 1.0 {
            return false;
        }
        self.n_eps * r * r / (1.0 - r) < self.c1_abs * (z - self.z_t).norm()
    }
}

pub fn multiplicative_domain(
    n: usize,
    t: f64,
    epsilon: f64,
    c1: Complex64,
) -> Result<(Complex64, MultiplicativeRegion)> {
    if t == 0.0 || t.abs() >= 1.0 {
        return Err(LabError::RegimeViolation(format!(
            "multiplicative regime needs 0 < |t| < 1, got t = {t}"
        )));
    }
    if c1.norm() < 1e-10 {
        return Err(LabError::DegenerateCoupling(c1.norm()));
    }
    let z_t = Complex64::new(t / (1.0 - t), 0.0) / c1;
    let region = MultiplicativeRegion { z_t, n_eps: (n as f64).powf(epsilon), c1_abs: c1.norm() };
    Ok((z_t, region))
}

/// Normalized isotropic-law margin
/// |v*(H - z)^-1 v - m_sc(z)| sqrt(n Im z) / n^eps; at most 1 when the
/// resolvent bound holds with exponent eps.
pub fn local_law_margin(h: &CMatrix, v: &CVector, z: Complex64, epsilon: f64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "need Im z > 0, got z = {} + {}i",
            z.re, z.im
        )));
    }
    let n = h.nrows();
    // v*(H - zI)^-1 v = -v*(zI - H)^-1 v.
    let x = shifted_solve(h, z, v)?;
    let w = -dot_herm(v.view(), x.view());
    let m = msc(z)?;
    Ok((w - m).norm() * (n as f64 * z.im).sqrt() / (n as f64).powf(epsilon))
}

/// Number of eigenvalues with imaginary part above y.
pub fn count_above(spectrum: &[Complex64], y: f64) -> usize {
    spectrum.iter().filter(|z| z.im > y).count()
}

/// Monte Carlo mean of the threshold count for H + i t v v* against the
/// asymptotic prediction. Returns (empirical mean, predicted).
pub fn compare_counts(
    n: usize,
    t: f64,
    y: f64,
    trials: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(LabError::InsufficientTrials { got: 0, required: 1 });
    }
    let predicted = expected_count(n, t, y)?;
    let mut acc = 0usize;
    for trial in 0..trials {
        let mut rng = SeedSpec::new(master_seed, trial as u64).rng();
        let h = crate::ensembles::gue_from_rng(n, &mut rng)?;
        let v = unit_vector_from_rng(n, &mut rng)?;
        let model = ModelConfig::anti_hermitian(v)?;
        let g = build_matrix(&model, &h, t)?;
        let vals = crate::linalg::eigenvalues(&g)?;
        acc += count_above(&vals.to_vec(), y);
    }
    Ok((acc as f64 / trials as f64, predicted))
}

/// Count the zeros of the rank-one characterization inside a disk by the
/// argument principle, without diagonalizing the perturbed matrix. The
/// winding of 1 - t-level * spectral form has the perturbed eigenvalues as
/// zeros and Sp(base) as poles, so on disks away from the base spectrum the
/// winding equals the eigenvalue count.
pub fn argument_principle_count(
    model: &ModelConfig,
    base: &CMatrix,
    t: f64,
    center: Complex64,
    radius: f64,
    base_points: usize,
) -> Result<i64> {
    let f = |z: Complex64| -> Result<Complex64> {
        let w = spectral_function(model, base, z)?;
        Ok(match model.kind() {
            ModelKind::Additive => Complex64::new(1.0, 0.0) - Complex64::new(t, 0.0) * w,
            ModelKind::AntiHermitian => Complex64::new(1.0, 0.0) + Complex64::new(0.0, t) * w,
            ModelKind::Multiplicative => Complex64::new(1.0, 0.0) - Complex64::new(1.0 - t, 0.0) * w,
        })
    };
    crate::gaf::winding_number(f, center, radius, base_points)
}
