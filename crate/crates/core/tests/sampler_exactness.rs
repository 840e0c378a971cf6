//! Circulant embedding against a dense Cholesky factor, compared through
//! sample covariances at 10^5 draws.

use fou_core::fgn::{fgn_autocov, FgnSampler, Grid};
use fou_core::rng::{stream_rng, stream_seed};

const DRAWS: usize = 100_000;

fn sample_covariance(sampler: &FgnSampler<f64>, n: usize, master: u64) -> Vec<f64> {
    let mut cov = vec![0.0; n * n];
    let mut xi = vec![0.0; n];
    for r in 0..DRAWS {
        let mut rng = stream_rng(stream_seed(master, &[r as u64]));
        sampler.fill(&mut rng, &mut xi);
        for i in 0..n {
            for j in i..n {
                cov[i * n + j] += xi[i] * xi[j];
            }
        }
    }
    cov.iter().map(|c| c / DRAWS as f64).collect()
}

#[test]
fn circulant_and_cholesky_have_the_same_covariance() {
    let n = 24;
    for &h in &[0.5, 0.6, 0.75] {
        let grid = Grid::new(6.0, n).unwrap();
        let circulant = FgnSampler::new(&grid, h).unwrap();
        let cholesky = FgnSampler::cholesky(&grid, h).unwrap();
        assert!(circulant.is_circulant());
        assert!(!cholesky.is_circulant());
        let a = sample_covariance(&circulant, n, 1);
        let b = sample_covariance(&cholesky, n, 2);
        let g0 = fgn_autocov(0, grid.step(), h);
        for i in 0..n {
            for j in i..n {
                let exact = fgn_autocov(j - i, grid.step(), h);
                // Var of x_i x_j for a Gaussian pair is γ0² + γ².
                let se = ((g0 * g0 + exact * exact) / DRAWS as f64).sqrt();
                let (ca, cb) = (a[i * n + j], b[i * n + j]);
                assert!((ca - exact).abs() < 4.0 * se, "H={h} ({i},{j}) circulant {ca} vs {exact}");
                assert!((cb - exact).abs() < 4.0 * se, "H={h} ({i},{j}) cholesky {cb} vs {exact}");
                assert!((ca - cb).abs() < 4.0 * std::f64::consts::SQRT_2 * se, "H={h} ({i},{j})");
            }
        }
    }
}
