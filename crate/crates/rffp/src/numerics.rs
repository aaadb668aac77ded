//! Matrix aliases, symmetric eigendecomposition, and the seeded random
//! stream that every stochastic step in the crate draws from.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Complex double-precision matrix (row/column semantics follow nalgebra).
pub type CMat = DMatrix<Complex64>;
/// Real double-precision matrix.
pub type RMat = DMatrix<f64>;
/// Real double-precision vector.
pub type RVec = DVector<f64>;
/// Complex double-precision vector.
pub type CVec = DVector<Complex64>;

/// Maximum dimension accepted by [`eig_sym`].
pub const EIG_MAX_DIM: usize = 64;

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues sorted descending and the matching orthonormal
/// eigenvectors as matrix columns. Input must be square, symmetric within
/// `1e-9` relative tolerance, and of dimension at most [`EIG_MAX_DIM`].
pub fn eig_sym(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    check_symmetric(m)?;
    let es = m.clone().symmetric_eigen();
    Ok(sort_eigen_desc(
        es.eigenvalues.iter().copied().collect(),
        RMat::from_columns(&es.eigenvectors.column_iter().collect::<Vec<_>>()),
    ))
}

/// Eigendecomposition of a complex Hermitian matrix (real eigenvalues,
/// descending). Used by the subspace estimator.
pub fn eig_herm(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let es = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..es.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| es.eigenvalues[b].total_cmp(&es.eigenvalues[a]));
    let vals = idx.iter().map(|&i| es.eigenvalues[i]).collect();
    let cols: Vec<_> = idx.iter().map(|&i| es.eigenvectors.column(i)).collect();
    Ok((vals, CMat::from_columns(&cols)))
}

fn check_symmetric(m: &RMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    assert!(m.nrows() <= EIG_MAX_DIM, "eig_sym limited to {EIG_MAX_DIM}x{EIG_MAX_DIM}");
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).norm() / scale;
    if asym > 1e-9 {
        return Err(Error::NotSymmetric { asym });
    }
    Ok(())
}

fn sort_eigen_desc(vals: Vec<f64>, vecs: RMat) -> (Vec<f64>, RMat) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let sorted_vals = idx.iter().map(|&i| vals[i]).collect();
    let cols: Vec<_> = idx.iter().map(|&i| vecs.column(i)).collect();
    (sorted_vals, RMat::from_columns(&cols))
}

/// Real widening `[[Re M, -Im M], [Im M, Re M]]` of a complex matrix,
/// acting on stacked `[Re v; Im v]` vectors.
pub fn realrep(m: &CMat) -> RMat {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = RMat::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + c)] = z.re;
        }
    }
    out
}

/// Stack a complex vector as `[Re; Im]`.
pub fn widen(v: &CVec) -> RVec {
    let n = v.len();
    RVec::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`widen`].
pub fn narrow(v: &RVec) -> CVec {
    let n = v.len() / 2;
    CVec::from_fn(n, |i, _| Complex64::new(v[i], v[i + n]))
}

/// A splittable deterministic random source.
///
/// The output sequence is fully determined by `(master_seed, domain_tag,
/// indices)`; streams that differ in any component are statistically
/// independent. Stream derivation (stable across releases): the 256-bit
/// ChaCha12 key is produced by absorbing, in order, the master seed, the
/// tag bytes (chunked little-endian into 64-bit words, with the tag length
/// absorbed first), and each index, into a SplitMix64-style accumulator
/// (`state = splitmix(state ^ word)`), then squeezing four further
/// SplitMix64 outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    master_seed: u64,
    domain_tag: String,
    indices: Vec<u64>,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(master_seed: u64, domain_tag: &str) -> Self {
        Self {
            master_seed,
            domain_tag: domain_tag.to_owned(),
            indices: Vec::new(),
        }
    }

    /// Child stream with one more index appended (device id, frame index...).
    pub fn child(&self, index: u64) -> Self {
        let mut s = self.clone();
        s.indices.push(index);
        s
    }

    /// Same seed, different domain tag.
    pub fn domain(&self, tag: &str) -> Self {
        Self {
            master_seed: self.master_seed,
            domain_tag: tag.to_owned(),
            indices: self.indices.clone(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Materialize the RNG for this stream identity.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut state = splitmix(self.master_seed ^ 0x5261_6e64_5374_726d);
        state = splitmix(state ^ self.domain_tag.len() as u64);
        for chunk in self.domain_tag.as_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            state = splitmix(state ^ u64::from_le_bytes(word));
        }
        state = splitmix(state ^ self.indices.len() as u64);
        for &ix in &self.indices {
            state = splitmix(state ^ ix);
        }
        let mut key = [0u8; 32];
        for (i, slot) in key.chunks_exact_mut(8).enumerate() {
            state = splitmix(state.wrapping_add(i as u64 + 1));
            slot.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

/// `n` i.i.d. circularly symmetric complex Gaussian samples with per-value
/// variance `variance` (real and imaginary parts each carry half).
pub fn gaussian_complex(stream: &RandomStream, n: usize, variance: f64) -> Result<Vec<Complex64>> {
    if variance < 0.0 {
        return Err(Error::NegativeVariance(variance));
    }
    let mut rng = stream.rng();
    let sigma = (variance / 2.0).sqrt();
    Ok((0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect())
}

/// `n` i.i.d. real Gaussian samples with the given mean and standard deviation.
pub fn gaussian_real(stream: &RandomStream, n: usize, mean: f64, std: f64) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + std * z
        })
        .collect()
}

/// Uniform random bits.
pub fn random_bits(stream: &RandomStream, n: usize) -> Vec<u8> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}
