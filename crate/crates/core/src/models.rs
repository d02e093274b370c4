//! The three perturbed matrix families, their spectral characterization
//! functions, and closed-form outlier predictions.
//!
//! Each family couples a random base matrix to a rank-one (or rank-d)
//! direction through a real parameter t:
//!
//! * additive:        G(t) = G + t v w*          (G with i.i.d. entries)
//! * anti-Hermitian:  G(t) = H + i t v v*        (H Hermitian)
//! * multiplicative:  G(t) = U (I - (1-t) sum_i v_i v_i*)   (U unitary)
//!
//! In every case, z is an eigenvalue of G(t) exactly when a scalar resolvent
//! form hits a level that depends only on t; `spectral_function` and
//! `level_target` expose the two sides of that equivalence.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::linalg::{
    adjoint, all_finite, dot_herm, fro_norm, identity, outer, solve_checked, CMatrix, CVector,
};

pub const UNIT_NORM_TOL: f64 = 1e-10;
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Additive,
    AntiHermitian,
    Multiplicative,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Additive => "additive",
            ModelKind::AntiHermitian => "anti-hermitian",
            ModelKind::Multiplicative => "multiplicative",
        }
    }
}

/// One perturbation family, fixed direction vectors included.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    kind: ModelKind,
    v: CVector,
    w: Option<CVector>,
    extra_vectors: Vec<CVector>,
}

fn check_unit(v: &CVector, name: &str) -> Result<()> {
    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(LabError::NonFinite);
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(LabError::NonOrthonormal(format!("||{name}|| = {norm}, expected 1")));
    }
    Ok(())
}

impl ModelConfig {
    /// G + t v w*. Pass w = v for the symmetric-direction variant.
    pub fn additive(v: CVector, w: CVector) -> Result<Self> {
        check_unit(&v, "v")?;
        check_unit(&w, "w")?;
        if v.len() != w.len() {
            return Err(LabError::DimensionMismatch(format!(
                "v has length {}, w has length {}",
                v.len(),
                w.len()
            )));
        }
        Ok(ModelConfig { kind: ModelKind::Additive, v, w: Some(w), extra_vectors: Vec::new() })
    }

    /// H + i t v v*.
    pub fn anti_hermitian(v: CVector) -> Result<Self> {
        check_unit(&v, "v")?;
        Ok(ModelConfig { kind: ModelKind::AntiHermitian, v, w: None, extra_vectors: Vec::new() })
    }

    /// U (I - (1-t) v v*).
    pub fn multiplicative(v: CVector) -> Result<Self> {
        check_unit(&v, "v")?;
        Ok(ModelConfig { kind: ModelKind::Multiplicative, v, w: None, extra_vectors: Vec::new() })
    }

    /// U (I - (1-t) sum_i v_i v_i*) with pairwise orthonormal directions
    /// sharing a single coupling t.
    pub fn multiplicative_rank_d(vectors: Vec<CVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(LabError::InvalidArgument("need at least one direction vector".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            check_unit(v, &format!("v{i}"))?;
        }
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                let ip = dot_herm(vectors[i].view(), vectors[j].view()).norm();
                if ip > ORTHONORMAL_TOL {
                    return Err(LabError::NonOrthonormal(format!(
                        "|<v{i}, v{j}>| = {ip:.3e}"
                    )));
                }
            }
        }
        let mut it = vectors.into_iter();
        let v = it.next().unwrap();
        Ok(ModelConfig {
            kind: ModelKind::Multiplicative,
            v,
            w: None,
            extra_vectors: it.collect(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn v(&self) -> &CVector {
        &self.v
    }

    /// Second direction of the additive model (falls back to v).
    pub fn w(&self) -> &CVector {
        self.w.as_ref().unwrap_or(&self.v)
    }

    /// All multiplicative directions, primary first.
    pub fn directions(&self) -> Vec<&CVector> {
        let mut out = vec![&self.v];
        out.extend(self.extra_vectors.iter());
        out
    }

    pub fn rank(&self) -> usize {
        1 + self.extra_vectors.len()
    }
}

/// Closed-form outlier prediction for a given coupling.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub location: Complex64,
    pub target: Complex64,
    pub regime_note: String,
}

fn check_base(model: &ModelConfig, base: &CMatrix) -> Result<()> {
    let n = model.dim();
    if base.nrows() != n || base.ncols() != n {
        return Err(LabError::DimensionMismatch(format!(
            "base is {}x{}, directions have length {}",
            base.nrows(),
            base.ncols(),
            n
        )));
    }
    if !all_finite(base) {
        return Err(LabError::NonFinite);
    }
    match model.kind {
        ModelKind::Additive => Ok(()),
        ModelKind::AntiHermitian => {
            let defect = fro_norm(&(base - &adjoint(base)));
            if defect > 1e-10 * fro_norm(base).max(1.0) {
                Err(LabError::KindMismatch(format!(
                    "anti-Hermitian model needs a Hermitian base (defect {defect:.3e})"
                )))
            } else {
                Ok(())
            }
        }
        ModelKind::Multiplicative => {
            if unitarity_defect(base) > 1e-8 {
                Err(LabError::KindMismatch("multiplicative model needs a unitary base".into()))
            } else {
                Ok(())
            }
        }
    }
}

/// Cheap unitarity probe: exact Gram check up to n = 64, two fixed probe
/// vectors above that (full U*U at n = 250 would double a trial's cost).
fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    if n <= 64 {
        fro_norm(&(&adjoint(u).dot(u) - &identity(n))) / (n as f64).sqrt()
    } else {
        let mut worst = 0.0f64;
        for probe in 0..2 {
            let x = Array1::from_shape_fn(n, |i| {
                let phase = (i as f64 + 1.0) * (0.7 + probe as f64);
                Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
            });
            let ux = u.dot(&x);
            let norm_in = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let norm_out = ux.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max((norm_out - norm_in).abs());
        }
        worst
    }
}

/// Assemble G(t) for the given family.
pub fn build_matrix(model: &ModelConfig, base: &CMatrix, t: f64) -> Result<CMatrix> {
    check_base(model, base)?;
    if !t.is_finite() {
        return Err(LabError::TOutOfRange(t));
    }
    match model.kind {
        ModelKind::Additive => {
            let mut g = base.clone();
            g.scaled_add(Complex64::new(t, 0.0), &outer(&model.v, model.w()));
            Ok(g)
        }
        ModelKind::AntiHermitian => {
            let mut g = base.clone();
            g.scaled_add(Complex64::new(0.0, t), &outer(&model.v, &model.v));
            Ok(g)
        }
        ModelKind::Multiplicative => {
            if !(-1.0..=1.0).contains(&t) {
                return Err(LabError::TOutOfRange(t));
            }
            let mut a = identity(model.dim());
            for v in model.directions() {
                a.scaled_add(Complex64::new(-(1.0 - t), 0.0), &outer(v, v));
            }
            Ok(base.dot(&a))
        }
    }
}

/// The scalar meromorphic function whose level sets carve out Sp(G(t)):
///
/// * additive:        w* (zI - G)^-1 v
/// * anti-Hermitian:  v* (H - zI)^-1 v
/// * multiplicative:  v* (I - z U*)^-1 v
pub fn spectral_function(model: &ModelConfig, base: &CMatrix, z: Complex64) -> Result<Complex64> {
    check_base(model, base)?;
    let v = &model.v;
    match model.kind {
        ModelKind::Additive => crate::linalg::resolvent_bilinear(base, z, v, model.w()),
        ModelKind::AntiHermitian => {
            let x = crate::linalg::shifted_solve(base, z, v)?;
            // (H - zI)^-1 = -(zI - H)^-1.
            Ok(-dot_herm(v.view(), x.view()))
        }
        ModelKind::Multiplicative => {
            let n = model.dim();
            let mut a = identity(n);
            a.scaled_add(Complex64::new(-1.0, 0.0) * z, &adjoint(base));
            let x = solve_checked(&a, v)?;
            Ok(dot_herm(v.view(), x.view()))
        }
    }
}

/// The level hit by `spectral_function` exactly on Sp(G(t)): 1/t, i/t, or
/// 1/(1-t).
pub fn level_target(kind: ModelKind, t: f64) -> Result<Complex64> {
    match kind {
        ModelKind::Additive => {
            if t == 0.0 {
                Err(LabError::DegenerateT(t))
            } else {
                Ok(Complex64::new(1.0 / t, 0.0))
            }
        }
        ModelKind::AntiHermitian => {
            if t == 0.0 {
                Err(LabError::DegenerateT(t))
            } else {
                Ok(Complex64::new(0.0, 1.0 / t))
            }
        }
        ModelKind::Multiplicative => {
            if t == 1.0 {
                Err(LabError::DegenerateT(t))
            } else {
                Ok(Complex64::new(1.0 / (1.0 - t), 0.0))
            }
        }
    }
}

/// Taylor coefficients of the characterization function at its expansion
/// point: w* G^k v for the additive family, v* (U*)^k v for the
/// multiplicative one. Computed by iterated matrix-vector products.
///
/// No expansion is offered for the anti-Hermitian family: its interesting
/// regime sits right on the support, where the series is meaningless; that
/// characterization is evaluated only by linear solve.
pub fn series_coefficients(model: &ModelConfig, base: &CMatrix, k: usize) -> Result<Vec<Complex64>> {
    if k == 0 {
        return Err(LabError::InvalidArgument("need at least one coefficient".into()));
    }
    check_base(model, base)?;
    match model.kind {
        ModelKind::AntiHermitian => Err(LabError::KindMismatch(
            "no series expansion for the anti-Hermitian family".into(),
        )),
        ModelKind::Additive => {
            let w = model.w();
            let mut x = model.v.clone();
            let mut coeffs = Vec::with_capacity(k);
            coeffs.push(dot_herm(w.view(), x.view()));
            for _ in 1..k {
                x = base.dot(&x);
                coeffs.push(dot_herm(w.view(), x.view()));
            }
            Ok(coeffs)
        }
        ModelKind::Multiplicative => {
            let uh = adjoint(base);
            let v = &model.v;
            let mut x = v.clone();
            let mut coeffs = Vec::with_capacity(k);
            coeffs.push(dot_herm(v.view(), x.view()));
            for _ in 1..k {
                x = uh.dot(&x);
                coeffs.push(dot_herm(v.view(), x.view()));
            }
            Ok(coeffs)
        }
    }
}

/// Stieltjes transform of the semicircle law: the root of m^2 + z m + 1 = 0
/// with m -> 0 at infinity (the smaller-modulus root; the two roots have
/// product 1).
pub fn msc(z: Complex64) -> Result<Complex64> {
    let dist = distance_to_segment(z);
    if dist <= 1e-12 {
        return Err(LabError::OnSupport { re: z.re, im: z.im });
    }
    let s = (z * z - 4.0).sqrt();
    let r1 = (-z + s) / 2.0;
    let r2 = (-z - s) / 2.0;
    Ok(if r1.norm() <= r2.norm() { r1 } else { r2 })
}

fn distance_to_segment(z: Complex64) -> f64 {
    if z.re.abs() <= 2.0 {
        z.im.abs()
    } else {
        let anchor = Complex64::new(2.0f64.copysign(z.re), 0.0);
        (z - anchor).norm()
    }
}

/// Where the outlier is expected for a supercritical coupling:
/// t itself (additive), i(t - 1/t) (anti-Hermitian), or
/// z_t = t / ((1-t) v*U*v) (multiplicative).
pub fn predicted_outlier(
    model: &ModelConfig,
    base: &CMatrix,
    t: f64,
    n: usize,
) -> Result<Prediction> {
    match model.kind {
        ModelKind::Additive => {
            if t.abs() <= 1.0 {
                return Err(LabError::RegimeViolation(format!(
                    "additive outlier needs |t| > 1, got t = {t}"
                )));
            }
            Ok(Prediction {
                location: Complex64::new(t, 0.0),
                target: level_target(model.kind, t)?,
                regime_note: format!("supercritical additive coupling at n = {n}"),
            })
        }
        ModelKind::AntiHermitian => {
            if t.abs() <= 1.0 {
                return Err(LabError::RegimeViolation(format!(
                    "anti-Hermitian outlier needs |t| > 1, got t = {t}"
                )));
            }
            Ok(Prediction {
                location: Complex64::new(0.0, t - 1.0 / t),
                target: level_target(model.kind, t)?,
                regime_note: format!("supercritical anti-Hermitian coupling at n = {n}"),
            })
        }
        ModelKind::Multiplicative => {
            if t == 0.0 || t.abs() >= 1.0 {
                return Err(LabError::RegimeViolation(format!(
                    "multiplicative outlier needs 0 < |t| < 1, got t = {t}"
                )));
            }
            check_base(model, base)?;
            let c1 = dot_herm(model.v.view(), adjoint(base).dot(&model.v).view());
            if c1.norm() < 1e-14 {
                return Err(LabError::DegenerateCoupling(c1.norm()));
            }
            let z_t = Complex64::new(t / (1.0 - t), 0.0) / c1;
            Ok(Prediction {
                location: z_t,
                target: level_target(model.kind, t)?,
                regime_note: format!("weak multiplicative coupling at n = {n}"),
            })
        }
    }
}

/// Modified Bessel function I_1: power series up to x = 20, asymptotic
/// expansion e^x / sqrt(2 pi x) (1 - 3/(8x) - ...) beyond.
pub fn bessel_i1(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(LabError::NegativeArgument(x));
    }
    if x <= 20.0 {
        Ok(bessel_i1_series(x))
    } else {
        Ok(ln_bessel_i1_asymptotic(x).exp())
    }
}

fn bessel_i1_series(x: f64) -> f64 {
    // sum_{k>=0} (x/2)^(2k+1) / (k! (k+1)!)
    let half = x / 2.0;
    let mut term = half;
    let mut sum = term;
    let mut k = 0usize;
    while term > 1e-18 * sum.max(f64::MIN_POSITIVE) && k < 200 {
        let kf = (k + 1) as f64;
        term *= half * half / (kf * (kf + 1.0));
        sum += term;
        k += 1;
    }
    sum
}

fn ln_bessel_i1_asymptotic(x: f64) -> f64 {
    // I_1(x) ~ e^x / sqrt(2 pi x) * (1 - 3/(8x) - 15/(2 (8x)^2) - 315/(6 (8x)^3) - ...)
    let u = 8.0 * x;
    let correction = 1.0 - 3.0 / u - 15.0 / (2.0 * u * u) - 315.0 / (6.0 * u * u * u)
        - 14175.0 / (24.0 * u * u * u * u);
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + correction.ln()
}

/// Asymptotic mean number of eigenvalues of H + i t v v* with imaginary part
/// above y: (1/y) e^{-N y (t + 1/t)} I_1(2 N y), evaluated at N = n.
///
/// Since t + 1/t >= 2, the combined exponent never overflows; the large-
/// argument branch is evaluated in log space.
pub fn expected_count(n: usize, t: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) || !(t > 0.0) {
        return Err(LabError::InvalidArgument(format!("need t > 0 and y > 0, got t = {t}, y = {y}")));
    }
    let nn = n as f64;
    let x = 2.0 * nn * y;
    let exponent = -nn * y * (t + 1.0 / t);
    if x <= 20.0 {
        Ok(exponent.exp() * bessel_i1_series(x) / y)
    } else {
        let ln_val = exponent + ln_bessel_i1_asymptotic(x) - y.ln();
        Ok(ln_val.exp())
    }
}

/// The d x d determinant whose zeros in z are the perturbed-eigenvalue
/// condition for the rank-d multiplicative model:
/// det(I_d - (1-t) V* (I - z U*)^-1 V). For d = 1 this is
/// 1 - (1-t) * spectral_function(z), the usual level-set condition up to a
/// nonvanishing factor.
pub fn rank_d_condition(
    base: &CMatrix,
    vectors: &[CVector],
    t: f64,
    z: Complex64,
) -> Result<Complex64> {
    let model = ModelConfig::multiplicative_rank_d(vectors.to_vec())?;
    check_base(&model, base)?;
    if z.norm() >= 1.0 {
        return Err(LabError::PoleProximity { residual: z.norm() });
    }
    let n = base.nrows();
    let d = vectors.len();
    let mut a = identity(n);
    a.scaled_add(Complex64::new(-1.0, 0.0) * z, &adjoint(base));
    // Columns of X solve (I - z U*) X = V.
    let mut m = Array2::zeros((d, d));
    let mut solved = Vec::with_capacity(d);
    for vj in vectors {
        solved.push(solve_checked(&a, vj)?);
    }
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = -Complex64::new(1.0 - t, 0.0) * dot_herm(vectors[i].view(), solved[j].view());
            if i == j {
                m[[i, j]] += 1.0;
            }
        }
    }
    use ndarray_linalg::Determinant;
    Ok(m.det()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_ginibre, sample_gue, sample_haar_unitary, sample_unit_vector, SeedSpec};
    use crate::linalg::eigenvalues;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e1(n: usize) -> CVector {
        let mut v = Array1::zeros(n);
        v[0] = c(1.0, 0.0);
        v
    }

    #[test]
    fn additive_t_zero_leaves_base() {
        let g = sample_ginibre(6, SeedSpec::new(30, 0)).unwrap();
        let v = sample_unit_vector(6, SeedSpec::new(30, 1)).unwrap();
        let w = sample_unit_vector(6, SeedSpec::new(30, 2)).unwrap();
        let model = ModelConfig::additive(v, w).unwrap();
        let built = build_matrix(&model, &g, 0.0).unwrap();
        assert_eq!(built, g);
    }

    #[test]
    fn anti_hermitian_scalar_case() {
        let model = ModelConfig::anti_hermitian(e1(1)).unwrap();
        let h = Array2::zeros((1, 1));
        let built = build_matrix(&model, &h, 3.0).unwrap();
        assert_abs_diff_eq!((built[[0, 0]] - c(0.0, 3.0)).norm(), 0.0, epsilon = 1e-15);
        let vals = eigenvalues(&built).unwrap();
        assert_abs_diff_eq!((vals[0] - c(0.0, 3.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn anti_hermitian_rejects_non_hermitian_base() {
        let g = sample_ginibre(4, SeedSpec::new(31, 0)).unwrap();
        let model = ModelConfig::anti_hermitian(e1(4)).unwrap();
        assert!(matches!(build_matrix(&model, &g, 1.0), Err(LabError::KindMismatch(_))));
    }

    #[test]
    fn multiplicative_singular_at_t_zero() {
        let u = sample_haar_unitary(20, SeedSpec::new(32, 0)).unwrap();
        let v = sample_unit_vector(20, SeedSpec::new(32, 1)).unwrap();
        let model = ModelConfig::multiplicative(v).unwrap();
        let g0 = build_matrix(&model, &u, 0.0).unwrap();
        let vals = eigenvalues(&g0).unwrap();
        let min_mod = vals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        assert!(min_mod <= 1e-12, "min |lambda| = {min_mod:.3e}");
    }

    #[test]
    fn multiplicative_t_range_enforced() {
        let u = sample_haar_unitary(5, SeedSpec::new(33, 0)).unwrap();
        let v = sample_unit_vector(5, SeedSpec::new(33, 1)).unwrap();
        let model = ModelConfig::multiplicative(v).unwrap();
        assert!(matches!(build_matrix(&model, &u, 1.5), Err(LabError::TOutOfRange(_))));
    }

    #[test]
    fn spectral_function_trivial_values() {
        // Multiplicative at z = 0: the constant term v*v = 1.
        let u = sample_haar_unitary(7, SeedSpec::new(34, 0)).unwrap();
        let v = sample_unit_vector(7, SeedSpec::new(34, 1)).unwrap();
        let model = ModelConfig::multiplicative(v).unwrap();
        let val = spectral_function(&model, &u, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!((val - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);

        // Anti-Hermitian with H = 0 (n = 2), v = e1, z = i: v*(H - iI)^-1 v = i.
        let h = Array2::zeros((2, 2));
        let model = ModelConfig::anti_hermitian(e1(2)).unwrap();
        let val = spectral_function(&model, &h, c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!((val - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn level_targets() {
        assert_abs_diff_eq!(
            (level_target(ModelKind::Additive, 2.0).unwrap() - c(0.5, 0.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (level_target(ModelKind::AntiHermitian, 1.0).unwrap() - c(0.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (level_target(ModelKind::Multiplicative, 0.5).unwrap() - c(2.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert!(matches!(level_target(ModelKind::Additive, 0.0), Err(LabError::DegenerateT(_))));
        assert!(matches!(level_target(ModelKind::Multiplicative, 1.0), Err(LabError::DegenerateT(_))));
    }

    #[test]
    fn level_set_equivalence_additive() {
        // Every eigenvalue of G(t) satisfies W(lambda) = 1/t.
        let n = 6;
        let g = sample_ginibre(n, SeedSpec::new(35, 0)).unwrap();
        let v = sample_unit_vector(n, SeedSpec::new(35, 1)).unwrap();
        let w = sample_unit_vector(n, SeedSpec::new(35, 2)).unwrap();
        let model = ModelConfig::additive(v, w).unwrap();
        let t = 5.0;
        let gt = build_matrix(&model, &g, t).unwrap();
        let vals = eigenvalues(&gt).unwrap();
        let base_vals = eigenvalues(&g).unwrap();
        let target = level_target(ModelKind::Additive, t).unwrap();
        for lam in vals.iter() {
            let pole_dist = base_vals.iter().map(|b| (lam - b).norm()).fold(f64::INFINITY, f64::min);
            if pole_dist < 1e-6 {
                continue;
            }
            let w_val = spectral_function(&model, &g, *lam).unwrap();
            assert!(
                (w_val - target).norm() <= 1e-8,
                "|W(lambda) - 1/t| = {:.3e}",
                (w_val - target).norm()
            );
        }
    }

    #[test]
    fn series_coefficients_basics() {
        // Multiplicative k = 0 coefficient is exactly 1.
        let u = sample_haar_unitary(5, SeedSpec::new(36, 0)).unwrap();
        let v = sample_unit_vector(5, SeedSpec::new(36, 1)).unwrap();
        let model = ModelConfig::multiplicative(v).unwrap();
        let coeffs = series_coefficients(&model, &u, 4).unwrap();
        assert_abs_diff_eq!((coeffs[0] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);

        // Additive with G = 0: (w*v, 0, 0, ...).
        let v = sample_unit_vector(5, SeedSpec::new(36, 2)).unwrap();
        let w = sample_unit_vector(5, SeedSpec::new(36, 3)).unwrap();
        let expected0 = dot_herm(w.view(), v.view());
        let model = ModelConfig::additive(v, w).unwrap();
        let zero = Array2::zeros((5, 5));
        let coeffs = series_coefficients(&model, &zero, 4).unwrap();
        assert_abs_diff_eq!((coeffs[0] - expected0).norm(), 0.0, epsilon = 1e-14);
        for k in 1..4 {
            assert_abs_diff_eq!(coeffs[k].norm(), 0.0, epsilon = 1e-15);
        }

        // Anti-Hermitian refuses.
        let model = ModelConfig::anti_hermitian(e1(3)).unwrap();
        let h = Array2::zeros((3, 3));
        assert!(matches!(series_coefficients(&model, &h, 3), Err(LabError::KindMismatch(_))));
    }

    #[test]
    fn multiplicative_coefficients_normalized_gaussian() {
        // E |sqrt(n) c_1|^2 = 1 within 10% at n = 100.
        let n = 100;
        let trials = 500;
        let mut acc = 0.0;
        for trial in 0..trials {
            let u = sample_haar_unitary(n, SeedSpec::new(37, trial)).unwrap();
            let v = sample_unit_vector(n, SeedSpec::new(38, trial)).unwrap();
            let model = ModelConfig::multiplicative(v).unwrap();
            let coeffs = series_coefficients(&model, &u, 2).unwrap();
            acc += (n as f64) * coeffs[1].norm_sqr();
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() <= 0.1, "E|sqrt(n) c1|^2 = {mean}");
    }

    #[test]
    fn additive_series_matches_resolvent_outside_radius() {
        // For |z| beyond the norm, the truncated series approximates W with a
        // geometric tail.
        let n = 8;
        let g = sample_ginibre(n, SeedSpec::new(39, 0)).unwrap();
        let v = sample_unit_vector(n, SeedSpec::new(39, 1)).unwrap();
        let w = sample_unit_vector(n, SeedSpec::new(39, 2)).unwrap();
        let model = ModelConfig::additive(v, w).unwrap();
        let norm = fro_norm(&g);
        let z = c(norm + 0.5, 0.3);
        let k = 48usize;
        let coeffs = series_coefficients(&model, &g, k).unwrap();
        let mut series = c(0.0, 0.0);
        let mut zpow = z;
        for ck in coeffs.iter() {
            series += ck / zpow;
            zpow *= z;
        }
        let direct = spectral_function(&model, &g, z).unwrap();
        let q = norm / z.norm();
        let tail = q.powi(k as i32) / (1.0 - q) / z.norm();
        assert!(
            (direct - series).norm() <= tail + 1e-12,
            "series gap {:.3e} vs tail bound {:.3e}",
            (direct - series).norm(),
            tail
        );
    }

    #[test]
    fn msc_values_and_branch() {
        // z = 1.5i -> 0.5i.
        let m = msc(c(0.0, 1.5)).unwrap();
        assert_abs_diff_eq!((m - c(0.0, 0.5)).norm(), 0.0, epsilon = 1e-14);
        // Asymptotics: m ~ -1/z.
        let z = c(1e6, 0.0);
        let m = msc(z).unwrap();
        assert!((m + 1.0 / z).norm() <= 1e-11);
        // Quadratic residual at assorted points.
        for &z in &[c(3.0, 0.1), c(-2.5, 1.0), c(0.2, 2.0), c(5.0, -4.0)] {
            let m = msc(z).unwrap();
            assert!((m * m + z * m + 1.0).norm() <= 1e-12);
        }
        assert!(matches!(msc(c(1.0, 0.0)), Err(LabError::OnSupport { .. })));
    }

    #[test]
    fn predicted_outlier_locations() {
        let v = e1(4);
        let model = ModelConfig::anti_hermitian(v.clone()).unwrap();
        let h = Array2::zeros((4, 4));
        let p = predicted_outlier(&model, &h, 2.0, 4).unwrap();
        assert_abs_diff_eq!((p.location - c(0.0, 1.5)).norm(), 0.0, epsilon = 1e-14);

        let g = Array2::zeros((4, 4));
        let model = ModelConfig::additive(v.clone(), v.clone()).unwrap();
        let p = predicted_outlier(&model, &g, 20.0, 4).unwrap();
        assert_abs_diff_eq!((p.location - c(20.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert!(matches!(
            predicted_outlier(&model, &g, 0.5, 4),
            Err(LabError::RegimeViolation(_))
        ));

        // Multiplicative: z_t -> 0 as t -> 0.
        let u = sample_haar_unitary(4, SeedSpec::new(40, 0)).unwrap();
        let v = sample_unit_vector(4, SeedSpec::new(40, 1)).unwrap();
        let model = ModelConfig::multiplicative(v).unwrap();
        let mut prev = f64::INFINITY;
        for &t in &[0.5, 0.1, 0.01, 0.001] {
            let p = predicted_outlier(&model, &u, t, 4).unwrap();
            assert!(p.location.norm() < prev);
            prev = p.location.norm();
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i1(0.0).unwrap(), 0.0);
        // Truncated-series references.
        assert_abs_diff_eq!(bessel_i1(0.2).unwrap(), 0.10050083402813512, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_i1(2.0).unwrap(), 1.5906368546373291, epsilon = 1e-10);
        assert!(matches!(bessel_i1(-1.0), Err(LabError::NegativeArgument(_))));
        // The two evaluation branches agree at the switch point.
        let series = bessel_i1(20.0).unwrap();
        let asym = bessel_i1(20.0 + 1e-9).unwrap();
        assert!((series / asym - 1.0).abs() < 1e-6, "switch mismatch {series} vs {asym}");
    }

    #[test]
    fn expected_count_values() {
        // Direct evaluation at the reference point.
        let val = expected_count(100, 1.0, 0.03).unwrap();
        let reference = (1.0 / 0.03) * (-6.0f64).exp() * bessel_i1(6.0).unwrap();
        assert_abs_diff_eq!(val, reference, epsilon = 1e-12);
        assert!((val - 5.07).abs() < 0.01, "reference value {val}");
        // Decay in y: exponential for t away from 1, polynomial at t = 1.
        assert!(expected_count(100, 2.0, 2.0).unwrap() < 1e-10);
        assert!(expected_count(100, 1.0, 1e4).unwrap() < 1e-6);
        // t + 1/t is minimized at t = 1.
        let at_one = expected_count(100, 1.0, 0.03).unwrap();
        let at_two = expected_count(100, 2.0, 0.03).unwrap();
        assert!(at_two < at_one);
        assert!(matches!(expected_count(100, 0.0, 0.1), Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn rank_d_condition_matches_level_set_for_d1() {
        let n = 8;
        let u = sample_haar_unitary(n, SeedSpec::new(41, 0)).unwrap();
        let v = sample_unit_vector(n, SeedSpec::new(41, 1)).unwrap();
        let model = ModelConfig::multiplicative(v.clone()).unwrap();
        let t = 0.3;
        for &z in &[c(0.2, 0.1), c(-0.4, 0.3), c(0.0, -0.6)] {
            let det = rank_d_condition(&u, &[v.clone()], t, z).unwrap();
            let w = spectral_function(&model, &u, z).unwrap();
            let direct = c(1.0, 0.0) - Complex64::new(1.0 - t, 0.0) * w;
            assert!((det - direct).norm() <= 1e-9, "gap {:.3e}", (det - direct).norm());
        }
    }

    #[test]
    fn rank_d_condition_no_zero_at_t_one() {
        // t = 1 removes the perturbation; no eigenvalue of U sits inside
        // |z| < 1 - 1e-3, so the condition never vanishes there.
        let n = 16;
        let u = sample_haar_unitary(n, SeedSpec::new(42, 0)).unwrap();
        let v = sample_unit_vector(n, SeedSpec::new(42, 1)).unwrap();
        let vals = eigenvalues(&u).unwrap();
        for lam in vals.iter() {
            assert!(lam.norm() > 1.0 - 1e-3);
        }
        for &r in &[0.2, 0.5, 0.8] {
            for k in 0..12 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
                let z = Complex64::from_polar(r, theta);
                let det = rank_d_condition(&u, &[v.clone()], 1.0, z).unwrap();
                assert!((det - c(1.0, 0.0)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn rank_d_requires_orthonormal() {
        let n = 6;
        let v = sample_unit_vector(n, SeedSpec::new(43, 0)).unwrap();
        let almost = v.mapv(|z| z * c(0.0, 1.0));
        assert!(matches!(
            ModelConfig::multiplicative_rank_d(vec![v, almost]),
            Err(LabError::NonOrthonormal(_))
        ));
    }

    #[test]
    fn trace_identity_anti_hermitian() {
        // sum Im lambda = t exactly.
        let n = 40;
        for (trial, &t) in [0.3, 1.0, 2.5, 7.0].iter().enumerate() {
            let h = sample_gue(n, SeedSpec::new(44, trial as u64)).unwrap();
            let v = sample_unit_vector(n, SeedSpec::new(45, trial as u64)).unwrap();
            let model = ModelConfig::anti_hermitian(v).unwrap();
            let gt = build_matrix(&model, &h, t).unwrap();
            let vals = eigenvalues(&gt).unwrap();
            let trace_im: f64 = vals.iter().map(|z| z.im).sum();
            assert!(
                (trace_im - t).abs() <= 1e-9 * n as f64,
                "trace identity broken: {trace_im} vs {t}"
            );
            // All imaginary parts are nonnegative.
            for z in vals.iter() {
                assert!(z.im >= -1e-10, "negative imaginary part {}", z.im);
            }
        }
    }

    #[test]
    fn determinant_identity_multiplicative() {
        // prod |lambda_j| = |t| to relative 1e-8.
        let n = 40;
        for (trial, &t) in [-0.7, -0.2, 0.15, 0.6, 0.99].iter().enumerate() {
            let u = sample_haar_unitary(n, SeedSpec::new(46, trial as u64)).unwrap();
            let v = sample_unit_vector(n, SeedSpec::new(47, trial as u64)).unwrap();
            let model = ModelConfig::multiplicative(v).unwrap();
            let gt = build_matrix(&model, &u, t).unwrap();
            let vals = eigenvalues(&gt).unwrap();
            let log_prod: f64 = vals.iter().map(|z| z.norm().ln()).sum();
            let rel = (log_prod - t.abs().ln()).abs();
            assert!(rel <= 1e-8, "determinant identity broken: rel log gap {rel:.3e}");
        }
    }
}
