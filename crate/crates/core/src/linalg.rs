//! Dense complex kernel: eigendecomposition with both eigenvector families,
//! resolvent bilinear forms, and determinant-identity primitives.
//!
//! The eigensolver is delegated to LAPACK (`zgeev` through `ndarray-linalg`);
//! everything downstream only relies on the [`EigenSystem`] contract. Left
//! eigenvectors are obtained by inverting the right-eigenvector matrix rather
//! than decomposing the adjoint, so biorthogonality holds up to solve error
//! and can then be pinned exactly on the diagonal.

use ndarray::prelude::*;
use ndarray_linalg::{Determinant, Eig, EigVals, Inverse, Norm, OperationNorm, Solve};
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

/// Relative residual tolerance for reconstruction-grade identities.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Tolerance on `L_i R_j = delta_ij` off the pinned diagonal.
pub const BIORTHOGONALITY_TOL: f64 = 1e-8;
/// Above this condition number of P the matrix is treated as
/// numerically non-diagonalizable.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Plain bilinear pairing `sum_k a_k b_k` (no conjugation). Rows of the
/// inverse eigenvector matrix pair with columns this way.
pub fn dot_plain(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `sum_k conj(a_k) b_k`.
pub fn dot_herm(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_square_finite(m: &CMatrix) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(LabError::DimensionMismatch(format!("{r}x{c} matrix is not square")));
    }
    if !all_finite(m) {
        return Err(LabError::NonFinite);
    }
    Ok(r)
}

/// Eigenvalues, right eigenvectors (columns of P) and left eigenvectors
/// (rows of P^-1), normalized so that `L_j R_j = 1` exactly.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: CVector,
    rights: CMatrix,
    lefts: CMatrix,
    pub basis_condition: f64,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// j-th right eigenvector (column vector).
    pub fn right(&self, j: usize) -> ArrayView1<'_, Complex64> {
        self.rights.column(j)
    }

    /// j-th left eigenvector (row vector, pairs without conjugation).
    pub fn left(&self, j: usize) -> ArrayView1<'_, Complex64> {
        self.lefts.row(j)
    }

    pub fn rights(&self) -> &CMatrix {
        &self.rights
    }

    pub fn lefts(&self) -> &CMatrix {
        &self.lefts
    }

    #[cfg(test)]
    pub(crate) fn from_parts_for_tests(values: CVector, rights: CMatrix, lefts: CMatrix) -> Self {
        EigenSystem { values, rights, lefts, basis_condition: 1.0 }
    }

    /// Largest deviation of `L_i R_j` from the identity.
    pub fn biorthogonality_defect(&self) -> f64 {
        let prod = self.lefts.dot(&self.rights);
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((prod[[i, j]] - target).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition M = P diag(values) P^-1.
///
/// Errors with `IllConditionedBasis` when the eigenvector matrix is
/// numerically singular (condition above [`CONDITION_LIMIT`]); all downstream
/// formulas assume diagonalizability, which holds almost surely for the
/// random models.
pub fn eigen_decompose(m: &CMatrix) -> Result<EigenSystem> {
    ensure_square_finite(m)?;
    let (values, rights) = m.eig()?;
    let lefts = rights.inv().map_err(|_| LabError::IllConditionedBasis { condition: f64::INFINITY })?;
    let condition = rights.opnorm_one()? * lefts.opnorm_one()?;
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(LabError::IllConditionedBasis { condition });
    }
    // Pin L_j R_j = 1 exactly; inversion already gives it to solve accuracy.
    let mut lefts = lefts;
    for j in 0..values.len() {
        let d = dot_plain(lefts.row(j), rights.column(j));
        if d.norm() == 0.0 {
            return Err(LabError::IllConditionedBasis { condition });
        }
        let scale = Complex64::new(1.0, 0.0) / d;
        lefts.row_mut(j).mapv_inplace(|x| x * scale);
    }
    Ok(EigenSystem { values, rights, lefts, basis_condition: condition })
}

/// Eigenvalues only; the fast path for Monte Carlo counting.
pub fn eigenvalues(m: &CMatrix) -> Result<CVector> {
    ensure_square_finite(m)?;
    Ok(m.eigvals()?)
}

/// `w* (zI - M)^-1 v` by one pivoted linear solve (never by inversion).
///
/// Errors with `PoleProximity` when the solve residual exceeds
/// `1e-8 * ||v||`, which catches z too close to the spectrum.
pub fn resolvent_bilinear(
    m: &CMatrix,
    z: Complex64,
    v: &CVector,
    w: &CVector,
) -> Result<Complex64> {
    let n = ensure_square_finite(m)?;
    if v.len() != n || w.len() != n {
        return Err(LabError::DimensionMismatch(format!(
            "vectors of length {} / {} against {}x{} matrix",
            v.len(),
            w.len(),
            n,
            n
        )));
    }
    let x = shifted_solve(m, z, v)?;
    Ok(dot_herm(w.view(), x.view()))
}

/// Solve (zI - M) x = b with a residual check against pole proximity.
pub(crate) fn shifted_solve(m: &CMatrix, z: Complex64, b: &CVector) -> Result<CVector> {
    let n = m.nrows();
    let mut a = -m.clone();
    for i in 0..n {
        a[[i, i]] += z;
    }
    solve_checked(&a, b)
}

/// Solve A x = b, rejecting solutions whose residual exceeds `1e-8 ||b||`.
pub(crate) fn solve_checked(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let x = a.solve(b).map_err(|_| LabError::PoleProximity { residual: f64::INFINITY })?;
    let residual = (&a.dot(&x) - b).norm_l2();
    if !residual.is_finite() || residual > 1e-8 * b.norm_l2().max(f64::MIN_POSITIVE) {
        return Err(LabError::PoleProximity { residual });
    }
    Ok(x)
}

/// Evaluate both sides of det(I_n + AB) = det(I_d + BA) for an n x d matrix A
/// and a d x n matrix B.
pub fn sylvester_check(a: &CMatrix, b: &CMatrix) -> Result<(Complex64, Complex64)> {
    let (n, d) = a.dim();
    let (d2, n2) = b.dim();
    if d != d2 || n != n2 {
        return Err(LabError::DimensionMismatch(format!(
            "A is {n}x{d} but B is {d2}x{n2}"
        )));
    }
    if !all_finite(a) || !all_finite(b) {
        return Err(LabError::NonFinite);
    }
    let lhs = {
        let mut m = a.dot(b);
        for i in 0..n {
            m[[i, i]] += 1.0;
        }
        m.det()?
    };
    let rhs = {
        let mut m = b.dot(a);
        for i in 0..d {
            m[[i, i]] += 1.0;
        }
        m.det()?
    };
    Ok((lhs, rhs))
}

/// Frobenius norm, the scale used in residual tolerances.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outer product v w* (rank-one matrix).
pub fn outer(v: &CVector, w: &CVector) -> CMatrix {
    let n = v.len();
    let m = w.len();
    Array2::from_shape_fn((n, m), |(i, j)| v[i] * w[j].conj())
}

pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag(&Array1::from_elem(n, Complex64::new(1.0, 0.0)))
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_ginibre, sample_unit_vector, SeedSpec};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::Determinant;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_case() {
        let m = Array2::from_diag(&array![c(1.0, 0.0), c(0.0, 2.0)]);
        let es = eigen_decompose(&m).unwrap();
        let mut values: Vec<Complex64> = es.values.to_vec();
        values.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_abs_diff_eq!(values[0].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(values[0].im, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(values[1].re, 1.0, epsilon = 1e-14);
        // Right and left eigenvectors reduce to the standard basis.
        for j in 0..2 {
            let r = es.right(j);
            let l = es.left(j);
            for k in 0..2 {
                let expect = if (es.values[j].re - m[[k, k]].re).abs() < 0.5 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(r[k].norm(), expect, epsilon = 1e-12);
                assert_abs_diff_eq!(l[k].norm(), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn jordan_like_two_by_two() {
        // [[0, a], [0, 1]]: values {0, 1}, R1 = e1, R2 ~ (a, 1), L1 = (1, -a), L2 = (0, 1).
        let a = c(0.7, -0.3);
        let m = array![[c(0.0, 0.0), a], [c(0.0, 0.0), c(1.0, 0.0)]];
        let es = eigen_decompose(&m).unwrap();
        let idx0 = if es.values[0].norm() < 0.5 { 0 } else { 1 };
        let idx1 = 1 - idx0;
        assert_abs_diff_eq!(es.values[idx0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((es.values[idx1] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        // R1 proportional to e1.
        let r1 = es.right(idx0);
        assert!(r1[1].norm() < 1e-12 * r1[0].norm());
        // R2 proportional to (a, 1).
        let r2 = es.right(idx1);
        assert_abs_diff_eq!((r2[0] / r2[1] - a).norm(), 0.0, epsilon = 1e-10);
        // L1 proportional to (1, -a) after the L_j R_j = 1 normalization, and
        // the proportionality constant is fixed by L1 R1 = 1.
        let l1 = es.left(idx0);
        assert_abs_diff_eq!((l1[1] / l1[0] + a).norm(), 0.0, epsilon = 1e-10);
        // L2 proportional to (0, 1).
        let l2 = es.left(idx1);
        assert!(l2[0].norm() < 1e-12);
    }

    #[test]
    fn reconstruction_on_random_matrix() {
        let g = sample_ginibre(5, SeedSpec::new(11, 0)).unwrap();
        let es = eigen_decompose(&g).unwrap();
        let d = Array2::from_diag(&es.values);
        let rec = es.rights().dot(&d).dot(es.lefts());
        let err = fro_norm(&(&rec - &g));
        assert!(err <= RESIDUAL_TOL * fro_norm(&g), "reconstruction error {err:.3e}");
    }

    #[test]
    fn eigen_invariants_on_random_matrix() {
        let g = sample_ginibre(7, SeedSpec::new(12, 3)).unwrap();
        let es = eigen_decompose(&g).unwrap();
        let scale = fro_norm(&g);
        for j in 0..es.n() {
            let r = es.right(j).to_owned();
            let gr = g.dot(&r);
            let res = (&gr - &r.mapv(|x| x * es.values[j])).norm_l2();
            assert!(res <= 1e-10 * scale, "right residual {res:.3e}");
            let l = es.left(j).to_owned();
            let lg = l.dot(&g);
            let res_l = (&lg - &l.mapv(|x| x * es.values[j])).norm_l2();
            assert!(res_l <= 1e-10 * scale * es.basis_condition.sqrt(), "left residual {res_l:.3e}");
        }
        assert!(es.biorthogonality_defect() <= BIORTHOGONALITY_TOL);
        // sum_j R_j L_j = I.
        let resolution = es.rights().dot(es.lefts());
        let err = fro_norm(&(&resolution - &identity(es.n())));
        assert!(err <= BIORTHOGONALITY_TOL, "resolution of identity defect {err:.3e}");
    }

    #[test]
    fn overlap_row_sums_from_gram_matrices() {
        // sum_j (L_i L_j*)(R_j* R_i) = 1, a consequence of P P^-1 = I.
        let g = sample_ginibre(6, SeedSpec::new(13, 1)).unwrap();
        let es = eigen_decompose(&g).unwrap();
        for i in 0..es.n() {
            let mut row_sum = c(0.0, 0.0);
            for j in 0..es.n() {
                let ll = dot_herm(es.left(j), es.left(i));
                let rr = dot_herm(es.right(j), es.right(i));
                row_sum += ll * rr;
            }
            assert_abs_diff_eq!((row_sum - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut m = identity(3);
        m[[1, 1]] = c(f64::NAN, 0.0);
        assert!(matches!(eigen_decompose(&m), Err(LabError::NonFinite)));
        assert!(matches!(eigenvalues(&m), Err(LabError::NonFinite)));
    }

    #[test]
    fn resolvent_trivial_cases() {
        // M = 0 (n = 2), z = 1, v = w = e1 -> 1.
        let m = Array2::zeros((2, 2));
        let e1 = array![c(1.0, 0.0), c(0.0, 0.0)];
        let r = resolvent_bilinear(&m, c(1.0, 0.0), &e1, &e1).unwrap();
        assert_abs_diff_eq!((r - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);

        // n = 1: 1 / (z - a).
        let a = c(0.4, 1.3);
        let z = c(-0.2, 0.5);
        let m1 = array![[a]];
        let one = array![c(1.0, 0.0)];
        let r1 = resolvent_bilinear(&m1, z, &one, &one).unwrap();
        assert_abs_diff_eq!((r1 - 1.0 / (z - a)).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn resolvent_matches_eigen_expansion() {
        let g = sample_ginibre(6, SeedSpec::new(14, 2)).unwrap();
        let v = sample_unit_vector(6, SeedSpec::new(14, 3)).unwrap();
        let w = sample_unit_vector(6, SeedSpec::new(14, 4)).unwrap();
        let z = c(3.0, 0.0);
        let direct = resolvent_bilinear(&g, z, &v, &w).unwrap();
        let es = eigen_decompose(&g).unwrap();
        let mut expansion = c(0.0, 0.0);
        for j in 0..6 {
            let wr = dot_herm(w.view(), es.right(j));
            let lv = dot_plain(es.left(j), v.view());
            expansion += wr * lv / (z - es.values[j]);
        }
        assert!((direct - expansion).norm() <= 1e-9, "expansion gap {:.3e}", (direct - expansion).norm());
    }

    #[test]
    fn resolvent_pole_proximity() {
        let m = Array2::from_diag(&array![c(1.0, 0.0), c(2.0, 0.0)]);
        let e1 = array![c(1.0, 0.0), c(0.0, 0.0)];
        let err = resolvent_bilinear(&m, c(1.0, 0.0), &e1, &e1);
        assert!(matches!(err, Err(LabError::PoleProximity { .. })));
    }

    #[test]
    fn resolvent_hermitian_real() {
        // Hermitian M, real z off the spectrum, v = w: the form is real.
        let g = sample_ginibre(5, SeedSpec::new(15, 0)).unwrap();
        let h = (&g + &adjoint(&g)).mapv(|z| z * 0.5);
        let v = sample_unit_vector(5, SeedSpec::new(15, 1)).unwrap();
        let r = resolvent_bilinear(&h, c(10.0, 0.0), &v, &v).unwrap();
        assert!(r.im.abs() <= 1e-10, "imaginary part {:.3e}", r.im);
    }

    #[test]
    fn sylvester_rank_one_and_zero() {
        let n = 5;
        let v = sample_unit_vector(n, SeedSpec::new(16, 0)).unwrap();
        let w = sample_unit_vector(n, SeedSpec::new(16, 1)).unwrap();
        let t = c(2.5, -1.0);
        // A = v (n x 1), B = t w* (1 x n): both sides 1 + t w*v.
        let a = Array2::from_shape_fn((n, 1), |(i, _)| v[i]);
        let b = Array2::from_shape_fn((1, n), |(_, j)| t * w[j].conj());
        let (lhs, rhs) = sylvester_check(&a, &b).unwrap();
        let expect = c(1.0, 0.0) + t * dot_herm(w.view(), v.view());
        assert!((lhs - expect).norm() <= 1e-12);
        assert!((rhs - expect).norm() <= 1e-12);

        let zero = Array2::zeros((n, 2));
        let b2 = Array2::from_shape_fn((2, n), |(i, j)| c((i + j) as f64, 0.5));
        let (l0, r0) = sylvester_check(&zero, &b2).unwrap();
        assert!((l0 - c(1.0, 0.0)).norm() <= 1e-14);
        assert!((r0 - c(1.0, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn sylvester_random_rectangular() {
        let mut rng_seed = 0u64;
        for _ in 0..5 {
            rng_seed += 1;
            let g = sample_ginibre(3, SeedSpec::new(17, rng_seed)).unwrap();
            let h = sample_ginibre(3, SeedSpec::new(18, rng_seed)).unwrap();
            let a = g.slice(ndarray::s![.., ..2]).to_owned();
            let b = h.slice(ndarray::s![..2, ..]).to_owned();
            let (lhs, rhs) = sylvester_check(&a, &b).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn sylvester_dimension_mismatch() {
        let a = Array2::zeros((3, 2));
        let b = Array2::zeros((3, 2));
        assert!(matches!(sylvester_check(&a, &b), Err(LabError::DimensionMismatch(_))));
    }

    #[test]
    fn matrix_determinant_lemma() {
        // det(I + (M - zI)^-1 t v w*) = 1 + t w*(M - zI)^-1 v.
        for trial in 0..5 {
            let m = sample_ginibre(5, SeedSpec::new(19, trial)).unwrap();
            let v = sample_unit_vector(5, SeedSpec::new(20, trial)).unwrap();
            let w = sample_unit_vector(5, SeedSpec::new(21, trial)).unwrap();
            let t = c(1.7, 0.9);
            let z = c(2.0, 2.0);
            let mut shifted = m.clone();
            for i in 0..5 {
                shifted[[i, i]] -= z;
            }
            let inv = shifted.inv().unwrap();
            let lhs = {
                let mut p = inv.dot(&outer(&v.mapv(|x| x * t), &w));
                for i in 0..5 {
                    p[[i, i]] += 1.0;
                }
                p.det().unwrap()
            };
            let rhs = c(1.0, 0.0) + t * dot_herm(w.view(), inv.dot(&v).view());
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn ill_conditioned_basis_detected() {
        // An exact Jordan block is numerically non-diagonalizable.
        let m = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        match eigen_decompose(&m) {
            Err(LabError::IllConditionedBasis { .. }) => {}
            other => panic!("expected IllConditionedBasis, got {other:?}"),
        }
    }
}
