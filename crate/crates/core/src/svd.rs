//! Truncated SVD of sparse word × feature matrices and the symmetric
//! embedding `U_d Σ_d^½` built from it.
//!
//! The decomposition uses randomized subspace iteration: a Gaussian sketch of
//! the column space is refined by alternating products with `M` and `Mᵀ`,
//! re-orthonormalized each time, and the small projected matrix is
//! decomposed densely. After the configured number of power iterations the
//! loop keeps going while the Ritz values are still moving.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::matrix::{transform_idf, transform_pmi, SparseMatrix, WordFeatureMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SvdConfig {
    pub dim: usize,
    pub oversampling: usize,
    /// Power iterations always performed.
    pub power_iterations: usize,
    /// Upper bound on power iterations while Ritz values have not converged.
    pub max_power_iterations: usize,
    /// Relative change of the leading Ritz values below which iteration stops.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            dim: 500,
            oversampling: 10,
            power_iterations: 7,
            max_power_iterations: 100,
            tolerance: 1e-10,
            seed: 1,
        }
    }
}

/// `M ≈ U diag(σ) Vᵀ` with `σ` non-increasing.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
    pub power_iterations: usize,
}

/// `M X` for a dense `X` with `n_cols` rows.
fn mul(m: &SparseMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let columns: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let col = x.column(j);
            (0..m.n_rows())
                .map(|r| {
                    let (cols, vals) = m.row(r);
                    cols.iter().zip(vals).map(|(&c, &v)| v * col[c as usize]).sum()
                })
                .collect()
        })
        .collect();
    DMatrix::from_vec(m.n_rows(), x.ncols(), columns.concat())
}

/// `Mᵀ X` for a dense `X` with `n_rows` rows.
fn mul_transpose(m: &SparseMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let columns: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let col = x.column(j);
            let mut out = vec![0.0; m.n_cols()];
            for r in 0..m.n_rows() {
                let (cols, vals) = m.row(r);
                let xr = col[r];
                for (&c, &v) in cols.iter().zip(vals) {
                    out[c as usize] += v * xr;
                }
            }
            out
        })
        .collect();
    DMatrix::from_vec(m.n_cols(), x.ncols(), columns.concat())
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Leading `k` singular values of `Zᵀ`, descending.
fn ritz_values(z: &DMatrix<f64>, k: usize) -> Vec<f64> {
    let gram = z.transpose() * z;
    let mut values: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(k);
    values
}

fn converged(prev: &[f64], next: &[f64], tolerance: f64) -> bool {
    let scale = next.first().copied().unwrap_or(0.0);
    prev.iter()
        .zip(next)
        .all(|(&a, &b)| (a - b).abs() <= tolerance * b + 1e-14 * scale)
}

/// Rank-`rank` truncated SVD of a sparse matrix.
pub fn truncated_svd(m: &SparseMatrix, rank: usize, config: &SvdConfig) -> Result<TruncatedSvd> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let max = m.n_rows().min(m.n_cols());
    if rank == 0 {
        return Err(Error::InvalidConfig("rank must be positive".into()));
    }
    if rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    let width = (rank + config.oversampling).min(max);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let omega = DMatrix::from_fn(m.n_cols(), width, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(mul(m, &omega));
    let mut previous: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let z = loop {
        // Zᵀ = Qᵀ M is the projection of M onto the current basis
        let z = mul_transpose(m, &q);
        let ritz = ritz_values(&z, rank);
        let done = previous
            .as_deref()
            .is_some_and(|p| converged(p, &ritz, config.tolerance));
        if iterations >= config.power_iterations && (done || iterations >= config.max_power_iterations) {
            break z;
        }
        previous = Some(ritz);
        q = orthonormalize(mul(m, &orthonormalize(z)));
        iterations += 1;
    };

    // Z = U_z Σ V_zᵀ  ⇒  M ≈ Q Zᵀ = (Q V_z) Σ U_zᵀ
    let svd = z.svd(true, true);
    let (uz, vzt) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᵀ"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(rank);

    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(m.n_cols(), rank, |r, k| uz[(r, order[k])]);
    let vz = DMatrix::from_fn(width, rank, |r, k| vzt[(order[k], r)]);
    let u = q * vz;
    Ok(TruncatedSvd {
        u,
        singular_values,
        v,
        power_iterations: iterations,
    })
}

/// Word vectors `U_d Σ_d^½` and feature vectors `V_d Σ_d^½` of the given
/// (already transformed) matrix.
pub fn train_inverted_index(m: &WordFeatureMatrix, config: &SvdConfig) -> Result<Embeddings> {
    let svd = truncated_svd(&m.matrix, config.dim, config)?;
    let d = config.dim;
    let scale: Vec<f64> = svd.singular_values.iter().map(|s| s.sqrt()).collect();
    let row_major = |x: &DMatrix<f64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(x.nrows() * d);
        for r in 0..x.nrows() {
            out.extend((0..d).map(|k| x[(r, k)] * scale[k]));
        }
        out
    };
    Embeddings::new(m.vocab.lexicon().clone(), d, row_major(&svd.u), Some(row_major(&svd.v)))
}

/// Which matrix the SVD factorizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvdInput {
    Idf,
    PositivePmi,
}

/// Transforms an indicator (or count) matrix and factorizes it.
pub fn svd_embeddings(indicator: &WordFeatureMatrix, input: SvdInput, config: &SvdConfig) -> Result<Embeddings> {
    let matrix = match input {
        SvdInput::Idf => transform_idf(&indicator.matrix)?,
        SvdInput::PositivePmi => transform_pmi(&indicator.matrix, true)?,
    };
    let transformed = WordFeatureMatrix {
        vocab: indicator.vocab.clone(),
        matrix,
        granularity: indicator.granularity,
    };
    train_inverted_index(&transformed, config)
}
