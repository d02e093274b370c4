//! Small dense-polynomial toolbox: construction from roots, synthetic
//! division, Horner evaluation, and root finding via companion-matrix
//! eigenvalues. Coefficients are stored in ascending order.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::linalg::eigenvalues;

/// Monic polynomial with the given roots, coefficients ascending.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

/// Divide by (z - root), dropping the remainder (synthetic division).
pub fn deflate(coeffs: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let n = coeffs.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n - 1];
    out[n - 2] = coeffs[n - 1];
    for k in (1..n - 1).rev() {
        out[k - 1] = coeffs[k] + root * out[k];
    }
    out
}

/// Horner evaluation.
pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// All roots, via eigenvalues of the companion matrix. Near-zero leading
/// coefficients are trimmed relative to the largest coefficient.
///
/// Errors with `DegenerateInput` on the identically-zero polynomial;
/// a nonzero constant has no roots and returns an empty list.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_mag == 0.0 || coeffs.is_empty() {
        return Err(LabError::DegenerateInput("identically zero polynomial".into()));
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * max_mag {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut companion = Array2::zeros((deg, deg));
    for i in 0..deg {
        companion[[i, deg - 1]] = -coeffs[i] / lead;
        if i + 1 < deg {
            companion[[i + 1, i]] = Complex64::new(1.0, 0.0);
        }
    }
    let vals = eigenvalues(&companion)?;
    Ok(vals.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_roundtrip() {
        let rs = [c(1.0, 0.0), c(-0.5, 0.5), c(0.0, -2.0)];
        let p = from_roots(&rs);
        assert_eq!(p.len(), 4);
        for r in rs.iter() {
            assert!(eval(&p, *r).norm() <= 1e-12);
        }
        let mut found = roots(&p).unwrap();
        found.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expect = rs.to_vec();
        expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (f, e) in found.iter().zip(expect.iter()) {
            assert!((f - e).norm() <= 1e-10);
        }
    }

    #[test]
    fn deflate_removes_one_root() {
        let rs = [c(2.0, 1.0), c(-1.0, 0.0), c(0.5, -0.5)];
        let p = from_roots(&rs);
        let q = deflate(&p, rs[0]);
        assert_eq!(q.len(), 3);
        for r in &rs[1..] {
            assert!(eval(&q, *r).norm() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_and_constant() {
        assert!(matches!(
            roots(&[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(LabError::DegenerateInput(_))
        ));
        assert!(roots(&[c(3.0, 0.0)]).unwrap().is_empty());
    }

    #[test]
    fn linear_case() {
        // 0.3 is the single zero of z - 0.3.
        let p = [c(-0.3, 0.0), c(1.0, 0.0)];
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(0.3, 0.0)).norm() <= 1e-14);
    }
}
