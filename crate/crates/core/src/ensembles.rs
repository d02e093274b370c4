//! Seeded, reproducible samplers for the random inputs: complex Ginibre,
//! GUE, Haar unitary, and uniform unit vectors.
//!
//! Every draw goes through a ChaCha12 stream keyed by the master seed, with
//! the trial index mapped to the ChaCha stream id. Distinct trials therefore
//! use provably disjoint streams and can be generated in any order (or in
//! parallel) with identical results. Normal variates come from the ziggurat
//! sampler in `rand_distr`; the combination is what "same RNG algorithm"
//! means for cross-platform determinism.

use ndarray::prelude::*;
use ndarray_linalg::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{CMatrix, CVector};

/// Identifies one RNG stream: a master seed plus a trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        SeedSpec { master_seed, trial_index }
    }

    pub fn trial(self, trial_index: u64) -> Self {
        SeedSpec { trial_index, ..self }
    }

    /// The stream for this (master, trial) pair. The 256-bit ChaCha key is
    /// expanded from the master seed; the trial index selects the stream, so
    /// streams never collide across trials.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Standard complex Gaussian N_C(0, 1): independent real and imaginary parts
/// of variance 1/2, so E|g|^2 = 1.
pub fn complex_standard_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(LabError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

/// Complex Ginibre matrix: i.i.d. entries N_C(0, 1/n), so the bulk spectrum
/// fills the unit disk.
pub fn sample_ginibre(n: usize, seed: SeedSpec) -> Result<CMatrix> {
    check_dim(n)?;
    ginibre_from_rng(n, &mut seed.rng())
}

pub fn ginibre_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(Array2::from_shape_simple_fn((n, n), || {
        complex_standard_gaussian(rng) * scale
    }))
}

/// GUE matrix: Hermitian, off-diagonal entries N_C(0, 1/n), real diagonal of
/// variance 1/n. The spectrum concentrates on [-2, 2] with semicircle
/// density (1/2pi) sqrt(4 - x^2).
pub fn sample_gue(n: usize, seed: SeedSpec) -> Result<CMatrix> {
    check_dim(n)?;
    gue_from_rng(n, &mut seed.rng())
}

pub fn gue_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        h[[i, i]] = Complex64::new(d * scale, 0.0);
        for j in (i + 1)..n {
            let z = complex_standard_gaussian(rng) * scale;
            h[[i, j]] = z;
            h[[j, i]] = z.conj();
        }
    }
    Ok(h)
}

/// Haar-distributed unitary: QR of a Ginibre draw, with the diagonal of R
/// rephased to be positive. Plain QR is not Haar; the rephase is the
/// standard correction.
pub fn sample_haar_unitary(n: usize, seed: SeedSpec) -> Result<CMatrix> {
    check_dim(n)?;
    haar_from_rng(n, &mut seed.rng())
}

pub fn haar_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(n)?;
    let g = Array2::from_shape_simple_fn((n, n), || complex_standard_gaussian(rng));
    let (q, r) = g.qr()?;
    let mut u = q;
    for k in 0..n {
        let d = r[[k, k]];
        let phase = if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() };
        u.column_mut(k).mapv_inplace(|x| x * phase);
    }
    Ok(u)
}

/// Uniform unit vector on the complex sphere: normalized Gaussian vector.
pub fn sample_unit_vector(n: usize, seed: SeedSpec) -> Result<CVector> {
    check_dim(n)?;
    let mut rng = seed.rng();
    unit_vector_from_rng(n, &mut rng)
}

pub fn unit_vector_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CVector> {
    let mut v = Array1::from_shape_simple_fn(n, || complex_standard_gaussian(rng));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(LabError::DegenerateInput("zero Gaussian vector".into()));
    }
    v.mapv_inplace(|z| z / norm);
    Ok(v)
}

/// Tail of the rank-k Gamma variable, P(Gamma_k > x) = e^-x sum_{j<k} x^j/j!,
/// exact for integer k. Used for the Kostlan radii prediction
/// sum_{k=1..n} P(Gamma_k > n r^2).
pub fn gamma_tail(k: usize, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut sum = term;
    for j in 1..k {
        term *= x / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Expected number of Ginibre eigenvalues with |lambda| > r at size n.
pub fn kostlan_expected_count(n: usize, r: f64) -> f64 {
    let x = n as f64 * r * r;
    (1..=n).map(|k| gamma_tail(k, x)).sum()
}
