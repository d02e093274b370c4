//! Distribution of the bulk's maximal imaginary part for H + i t v v* at
//! the anti-Hermitian verification scale, against the band heights
//! n^eps / (n (t - 1/t)) for several eps.

use rayon::prelude::*;
use rmt_lab::ensembles::SeedSpec;
use rmt_lab::linalg::eigenvalues;
use rmt_lab::models::{build_matrix, ModelConfig};

fn main() {
    let n = 100usize;
    let t = 2.0f64;
    let trials = 200u64;
    let mut rest_max: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeedSpec::new(4242, trial).rng();
            let h = rmt_lab::ensembles::gue_from_rng(n, &mut rng).unwrap();
            let v = rmt_lab::ensembles::unit_vector_from_rng(n, &mut rng).unwrap();
            let model = ModelConfig::anti_hermitian(v).unwrap();
            let vals = eigenvalues(&build_matrix(&model, &h, t).unwrap()).unwrap();
            let mut ims: Vec<f64> = vals.iter().map(|z| z.im).collect();
            ims.sort_by(|a, b| b.partial_cmp(a).unwrap());
            ims[1] // largest imaginary part excluding the outlier
        })
        .collect();
    rest_max.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| rest_max[((trials as f64 - 1.0) * p).round() as usize];
    println!("bulk max Im: q50 {:.4}  q95 {:.4}  q99 {:.4}  max {:.4}", q(0.5), q(0.95), q(0.99), rest_max.last().unwrap());
    let gap = t - 1.0 / t;
    for eps in [0.3, 0.4, 0.5, 0.6] {
        let height = (n as f64).powf(eps) / (n as f64 * gap);
        let freq = rest_max.iter().filter(|m| **m < height).count() as f64 / trials as f64;
        let radius = (n as f64).powf(eps) / (n as f64 * gap).sqrt();
        println!("eps {eps}: band height {height:.4} (disk radius {radius:.3}) -> P(bulk fits) = {freq:.3}");
    }
}
