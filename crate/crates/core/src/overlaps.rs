//! Eigenvector overlap matrix O_ij = (L_i L_j*)(R_j* R_i) and its exact
//! algebraic identities.
//!
//! With the normalization L_i R_i = 1, the diagonal satisfies
//! O_ii = ||L_i||^2 ||R_i||^2 >= 1 (Cauchy-Schwarz) and every row sums to 1
//! because sum_j R_j L_j = I. Both facts hold at any size and make sharp
//! regression checks.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::linalg::{adjoint, CMatrix, EigenSystem, BIORTHOGONALITY_TOL};

#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub entries: CMatrix,
}

impl OverlapMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.entries[[i, i]].re).collect()
    }

    pub fn row_sum(&self, i: usize) -> Complex64 {
        self.entries.row(i).iter().sum()
    }
}

/// Overlap matrix from a biorthogonalized eigensystem, via two Gram
/// matrices (O(n^3) total).
pub fn overlap_matrix(es: &EigenSystem) -> Result<OverlapMatrix> {
    let defect = es.biorthogonality_defect();
    if defect > BIORTHOGONALITY_TOL {
        return Err(LabError::BiorthogonalityViolated(defect));
    }
    // gl[i][j] = L_i L_j* ; gr[j][i] = R_j* R_i.
    let gl = es.lefts().dot(&adjoint(es.lefts()));
    let gr = adjoint(es.rights()).dot(es.rights());
    let n = es.n();
    let entries = Array2::from_shape_fn((n, n), |(i, j)| gl[[i, j]] * gr[[j, i]]);
    Ok(OverlapMatrix { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_ginibre, sample_gue, SeedSpec};
    use crate::linalg::eigen_decompose;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normal_input_gives_identity() {
        let h = sample_gue(8, SeedSpec::new(60, 0)).unwrap();
        let es = eigen_decompose(&h).unwrap();
        let o = overlap_matrix(&es).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((o.entries[[i, j]] - c(expect, 0.0)).norm(), 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // G = [[0, a], [0, 1]]: O_11 = O_22 = 1 + |a|^2, O_12 = O_21 = -|a|^2.
        let a = c(1.3, -0.6);
        let g = array![[c(0.0, 0.0), a], [c(0.0, 0.0), c(1.0, 0.0)]];
        let es = eigen_decompose(&g).unwrap();
        let o = overlap_matrix(&es).unwrap();
        let asq = a.norm_sqr();
        assert_abs_diff_eq!((o.entries[[0, 0]] - c(1.0 + asq, 0.0)).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((o.entries[[1, 1]] - c(1.0 + asq, 0.0)).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((o.entries[[0, 1]] - c(-asq, 0.0)).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((o.entries[[1, 0]] - c(-asq, 0.0)).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn row_sums_and_diagonal_bounds() {
        let g = sample_ginibre(6, SeedSpec::new(61, 0)).unwrap();
        let es = eigen_decompose(&g).unwrap();
        let o = overlap_matrix(&es).unwrap();
        for i in 0..6 {
            assert_abs_diff_eq!((o.row_sum(i) - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-9);
            let d = o.entries[[i, i]];
            assert!(d.im.abs() <= 1e-10, "diagonal not real: {d}");
            assert!(d.re >= 1.0 - 1e-8, "O_ii = {} < 1", d.re);
        }
    }

    #[test]
    fn invariant_under_eigenvector_rescaling() {
        // O is unchanged by R_j -> c_j R_j, L_j -> L_j / c_j.
        let g = sample_ginibre(5, SeedSpec::new(62, 0)).unwrap();
        let es = eigen_decompose(&g).unwrap();
        let o = overlap_matrix(&es).unwrap();

        let scales = [c(2.0, 0.0), c(0.3, 0.4), c(-1.0, 2.0), c(0.0, -0.7), c(1.5, 1.5)];
        let mut rights = es.rights().clone();
        let mut lefts = es.lefts().clone();
        for (j, s) in scales.iter().enumerate() {
            rights.column_mut(j).mapv_inplace(|x| x * s);
            lefts.row_mut(j).mapv_inplace(|x| x / s);
        }
        let gl = lefts.dot(&adjoint(&lefts));
        let gr = adjoint(&rights).dot(&rights);
        for i in 0..5 {
            for j in 0..5 {
                let rescaled = gl[[i, j]] * gr[[j, i]];
                assert_abs_diff_eq!((rescaled - o.entries[[i, j]]).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rejects_broken_biorthogonality() {
        let g = sample_ginibre(4, SeedSpec::new(63, 0)).unwrap();
        let mut es = eigen_decompose(&g).unwrap();
        // Corrupt a left eigenvector.
        let mut lefts = es.lefts().clone();
        lefts[[0, 0]] += c(0.1, 0.0);
        es = EigenSystemFixture::with_lefts(es, lefts);
        assert!(matches!(overlap_matrix(&es), Err(LabError::BiorthogonalityViolated(_))));
    }

    // Test-only helper to rebuild an EigenSystem with tampered lefts.
    struct EigenSystemFixture;
    impl EigenSystemFixture {
        fn with_lefts(es: EigenSystem, lefts: CMatrix) -> EigenSystem {
            EigenSystem::from_parts_for_tests(es.values.clone(), es.rights().clone(), lefts)
        }
    }
}
