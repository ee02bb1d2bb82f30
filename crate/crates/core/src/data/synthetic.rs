use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, SparseRow};
use crate::linalg::{DenseMatrix, Design};
use crate::oracle::{GroundTruth, QuadraticProblem};

/// Stream for problem data (matrices, targets, curvatures).
pub const PROBLEM_STREAM: u64 = 0;
/// Stream for the starting point.
pub const START_STREAM: u64 = 1;
/// Stream for label noise.
pub const LABEL_STREAM: u64 = 2;

/// ChaCha8 seeded from `seed` on the given stream. Different streams of the
/// same seed are independent, so adding draws to one never shifts another.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Starting point with iid standard normal entries.
pub fn start_point(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed, START_STREAM);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SyntheticKind {
    /// `½ Σ dᵢ (xᵢ − cᵢ)²` with `dᵢ ∈ {1, 10⁻¹, …, 10^{−ξ}}`.
    DiagonalSpectrum { xi: u32, m: usize },
    /// Dense `A` and `b` with standard normal entries.
    GaussianLeastSquares { m: usize, n: usize },
    /// Binary classification with labels from a planted linear model.
    /// `nnz_per_row = None` gives a dense Gaussian design, otherwise each row
    /// has that many unit entries at random columns.
    Classification { m: usize, n: usize, nnz_per_row: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub seed: u64,
}

/// Diagonal quadratic with `L = 1` and `μ = 10^{−ξ}` exactly, and its exact minimizer.
///
/// Curvatures are drawn uniformly from the `ξ + 1` powers of ten; the values
/// `1` and `10^{−ξ}` are then placed at two distinct random positions so that
/// `κ = 10^ξ` holds for every seed. The center is uniform on `[0, 1]^m`.
pub fn gen_diagonal_quadratic(xi: u32, m: usize, seed: u64) -> Result<(QuadraticProblem, GroundTruth), DataError> {
    if xi < 1 || m < 2 {
        return Err(DataError::InvalidSpec(format!("need xi >= 1 and m >= 2, got xi = {xi}, m = {m}")));
    }
    let powers: Vec<f64> = (0..=xi)
        .map(|j| format!("1e-{j}").parse().expect("literal power of ten"))
        .collect();
    let mut rng = seeded_rng(seed, PROBLEM_STREAM);
    let mut curvature: Vec<f64> = (0..m).map(|_| powers[rng.random_range(0..=xi as usize)]).collect();
    let forced = sample(&mut rng, m, 2);
    curvature[forced.index(0)] = 1.0;
    curvature[forced.index(1)] = powers[xi as usize];
    let center: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let problem = QuadraticProblem::separable(curvature, center, 0.0)?;
    let truth = problem.ground_truth(1e-12)?;
    Ok((problem, truth))
}

/// `(1/2m)‖Ax − b‖² + (τ/2)‖x‖²` with standard normal `A` (row-major draws) and then `b`.
pub fn gen_gaussian_ls(m: usize, n: usize, ridge: f64, seed: u64) -> Result<QuadraticProblem, DataError> {
    if m == 0 || n == 0 {
        return Err(DataError::InvalidSpec(format!("need m, n >= 1, got {m}x{n}")));
    }
    let mut rng = seeded_rng(seed, PROBLEM_STREAM);
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let targets: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let design = Design::Dense(DenseMatrix::from_row_major(m, n, data));
    Ok(QuadraticProblem::least_squares(design, targets, ridge)?)
}

/// Classification set with labels `sign(zᵢ − median(z) + ½ noise)` where
/// `z = Aw / √(nnz per row)` for a standard normal `w`.
pub fn gen_classification(m: usize, n: usize, nnz_per_row: Option<usize>, seed: u64) -> Result<Dataset, DataError> {
    if m == 0 || n == 0 || nnz_per_row.is_some_and(|k| k == 0 || k > n) {
        return Err(DataError::InvalidSpec(format!(
            "need m, n >= 1 and 1 <= nnz per row <= n, got {m}x{n}, {nnz_per_row:?}"
        )));
    }
    let mut rng = seeded_rng(seed, PROBLEM_STREAM);
    let rows: Vec<SparseRow> = (0..m)
        .map(|_| match nnz_per_row {
            None => SparseRow {
                indices: (0..n).collect(),
                values: (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            },
            Some(k) => {
                let mut indices = sample(&mut rng, n, k).into_vec();
                indices.sort_unstable();
                SparseRow {
                    indices,
                    values: vec![1.0; k],
                }
            }
        })
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let scale = (nnz_per_row.unwrap_or(n) as f64).sqrt();
    let z: Vec<f64> = rows
        .iter()
        .map(|r| r.indices.iter().zip(&r.values).map(|(&j, v)| v * w[j]).sum::<f64>() / scale)
        .collect();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[m / 2];
    let mut noise = seeded_rng(seed, LABEL_STREAM);
    let labels = z
        .iter()
        .map(|zi| {
            let e: f64 = noise.sample(StandardNormal);
            if zi - median + 0.5 * e >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let source = match nnz_per_row {
        None => format!("synthetic dense classification {m}x{n} seed {seed}"),
        Some(k) => format!("synthetic binary classification {m}x{n} ({k} per row) seed {seed}"),
    };
    Ok(Dataset {
        rows,
        labels,
        n_features: n,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Objective;

    #[test]
    fn diagonal_constants_are_exact() {
        let (p, t) = gen_diagonal_quadratic(3, 1000, 7).unwrap();
        assert_eq!(p.lipschitz(), 1.0);
        assert_eq!(p.strong_convexity(), 1e-3);
        assert_eq!(p.condition_number(), 1e3);
        assert!(t.residual_grad_norm <= 1e-12);
        let est = p.estimate_lipschitz(20_000, 1e-12).unwrap();
        assert!((est - 1.0).abs() <= 1e-6, "{est}");
    }

    #[test]
    fn minimal_case() {
        let (p, _) = gen_diagonal_quadratic(1, 2, 0).unwrap();
        let s = p.spectrum().unwrap();
        assert_eq!((s.max, s.min), (1.0, 0.1));
        assert!(gen_diagonal_quadratic(0, 5, 0).is_err());
        assert!(gen_diagonal_quadratic(2, 1, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_diagonal_quadratic(4, 50, 9).unwrap();
        let b = gen_diagonal_quadratic(4, 50, 9).unwrap();
        let x = start_point(50, 3);
        assert_eq!(a.0.value(&x).to_bits(), b.0.value(&x).to_bits());
        assert_eq!(a.1, b.1);
        let c = gen_diagonal_quadratic(4, 50, 10).unwrap();
        assert_ne!(a.1.x_star, c.1.x_star);
        let g1 = gen_gaussian_ls(1, 1, 0.0, 5).unwrap();
        let g2 = gen_gaussian_ls(1, 1, 0.0, 5).unwrap();
        assert_eq!(g1.value(&[0.3]).to_bits(), g2.value(&[0.3]).to_bits());
        assert_eq!(gen_classification(20, 7, Some(3), 1).unwrap(), gen_classification(20, 7, Some(3), 1).unwrap());
        assert_eq!(start_point(4, 1), start_point(4, 1));
    }

    #[test]
    fn gaussian_entries_are_standard_normal() {
        let (m, n) = (400, 300);
        let p = gen_gaussian_ls(m, n, 0.0, 42).unwrap();
        let Some(Design::Dense(a)) = p.design() else {
            panic!("dense design expected")
        };
        let data = a.as_slice();
        let count = data.len() as f64;
        let mean = data.iter().sum::<f64>() / count;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        // standard errors: 1/√N for the mean and √(2/N) for the variance
        assert!(mean.abs() <= 3.0 / count.sqrt(), "{mean}");
        assert!((var - 1.0).abs() <= 3.0 * (2.0 / count).sqrt(), "{var}");
        assert_eq!((a.rows(), a.cols()), (m, n));
    }

    #[test]
    fn paper_shape() {
        let p = gen_gaussian_ls(800, 1000, 1e-5, 0).unwrap();
        assert_eq!(p.dim(), 1000);
        assert_eq!(p.samples(), 800);
    }

    #[test]
    fn classification_shapes() {
        let ds = gen_classification(1605, 123, Some(14), 0).unwrap();
        assert_eq!((ds.samples(), ds.n_features), (1605, 123));
        assert!(ds.rows.iter().all(|r| r.nnz() == 14));
        let pos = ds.labels.iter().filter(|&&b| b == 1.0).count();
        assert!(pos > 600 && pos < 1000, "{pos}");
        let ds = gen_classification(62, 2000, None, 0).unwrap();
        assert_eq!(ds.rows[0].nnz(), 2000);
        assert!(gen_classification(5, 3, Some(4), 0).is_err());
    }

    #[test]
    fn streams_are_independent() {
        let a: f64 = seeded_rng(1, PROBLEM_STREAM).random();
        let b: f64 = seeded_rng(1, START_STREAM).random();
        assert_ne!(a, b);
    }
}
