//! QPSK mapping, Tarokh rate-1/2 G3 orthogonal space-time block coding,
//! the real-valued linear code-matrix model, and coherent decoding.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numerics::{narrow, random_bits, realrep, widen, CMat, CVec, RMat, RVec, RandomStream};
use crate::{Error, Result};

/// Time slots per code block.
pub const SLOTS: usize = 8;
/// Transmit antennas of the G3 code.
pub const N_TX: usize = 3;
/// Symbols carried per block.
pub const SYMBOLS_PER_BLOCK: usize = 4;

/// Four QPSK symbols entering one code block.
pub type SymbolQuad = [Complex64; SYMBOLS_PER_BLOCK];

/// One encoded block: 8 time slots x 3 transmit antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct StbcBlock {
    pub x: CMat,
}

/// Gray-mapped QPSK: 00 -> (1+j)/√2, 01 -> (−1+j)/√2, 11 -> (−1−j)/√2,
/// 10 -> (1−j)/√2.
pub fn qpsk_map(b1: u8, b0: u8) -> Complex64 {
    assert!(b1 <= 1 && b0 <= 1, "bits must be 0/1");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Gray order 00, 01, 11, 10 walks the corners counter-clockwise from 1+j.
    match (b1, b0) {
        (0, 0) => Complex64::new(s, s),
        (0, 1) => Complex64::new(-s, s),
        (1, 1) => Complex64::new(-s, -s),
        _ => Complex64::new(s, -s),
    }
}

/// Uniform random QPSK symbols from a stream.
pub fn random_qpsk(stream: &RandomStream, n: usize) -> Vec<Complex64> {
    let bits = random_bits(stream, 2 * n);
    (0..n).map(|i| qpsk_map(bits[2 * i], bits[2 * i + 1])).collect()
}

/// Encode four symbols with the rate-1/2 G3 layout: four linear rows
/// followed by their complex conjugates.
pub fn encode_g3(q: &SymbolQuad) -> StbcBlock {
    let [s1, s2, s3, s4] = *q;
    let top = [
        [s1, s2, s3],
        [-s2, s1, -s4],
        [-s3, s4, s1],
        [-s4, -s3, s2],
    ];
    let mut x = CMat::zeros(SLOTS, N_TX);
    for (r, row) in top.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            x[(r, c)] = v;
            x[(r + 4, c)] = v.conj();
        }
    }
    StbcBlock { x }
}

/// The real (and complex) linear code-matrix model for `n_rx` receive
/// antennas: with `h̃ = [Re vec(H); Im vec(H)]` and
/// `y = [Re vec(Y); Im vec(Y)]`, noiseless reception satisfies
/// `y = Σ_m s̃_m Φ_m h̃`, `s̃ = (Re s1, Im s1, …, Re s4, Im s4)`.
#[derive(Debug, Clone)]
pub struct CodeMatrices {
    /// Φ_1..Φ_8, each (16·n_rx) x (6·n_rx) real.
    pub phi: Vec<RMat>,
    /// The complex counterparts `I_{n_rx} ⊗ C_k`, `I ⊗ D_k` (8·n_rx x 3·n_rx).
    pub cplx: Vec<CMat>,
    pub n_rx: usize,
}

impl CodeMatrices {
    /// Real channel-vector dimension (`2·N_TX·n_rx`).
    pub fn h_dim(&self) -> usize {
        2 * N_TX * self.n_rx
    }

    /// Real received-vector dimension (`2·SLOTS·n_rx`).
    pub fn y_dim(&self) -> usize {
        2 * SLOTS * self.n_rx
    }
}

pub fn build_code_matrices(n_rx: usize) -> CodeMatrices {
    assert!(n_rx >= 1);
    let eye = CMat::identity(n_rx, n_rx);
    let mut cplx = Vec::with_capacity(8);
    for k in 0..SYMBOLS_PER_BLOCK {
        let mut e = [Complex64::new(0.0, 0.0); 4];
        e[k] = Complex64::new(1.0, 0.0);
        let c = encode_g3(&e).x;
        e[k] = Complex64::i();
        let d = encode_g3(&e).x;
        cplx.push(eye.kronecker(&c));
        cplx.push(eye.kronecker(&d));
    }
    let phi = cplx.iter().map(realrep).collect();
    CodeMatrices { phi, cplx, n_rx }
}

/// Column-stack a complex channel matrix `H` (N_TX x n_rx) into `h̃ ∈ R^{6·n_rx}`.
pub fn h_tilde(h: &CMat) -> RVec {
    widen(&vec_cols(h))
}

/// Column-stack a received block `Y` (SLOTS x n_rx) into `y ∈ R^{16·n_rx}`.
pub fn y_stack(y: &CMat) -> RVec {
    widen(&vec_cols(y))
}

fn vec_cols(m: &CMat) -> CVec {
    CVec::from_iterator(m.nrows() * m.ncols(), m.column_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()))
}

/// Rebuild the complex channel matrix from its stacked form.
pub fn h_from_tilde(h: &RVec, n_rx: usize) -> CMat {
    let hc = narrow(h);
    DMatrix::from_fn(N_TX, n_rx, |i, j| hc[j * N_TX + i])
}

/// The 16-column stacked symbol representation of a quad.
pub fn s_tilde(q: &SymbolQuad) -> RVec {
    RVec::from_iterator(8, q.iter().flat_map(|s| [s.re, s.im]))
}

/// Matched-filter OSTBC decoding with a channel estimate:
/// `ŝ̃ = A(ĥ)ᵀ y / (2‖ĥ‖²)` where `A(ĥ) = [Φ_1ĥ … Φ_8ĥ]`.
/// Returns the four soft complex symbols (no slicing).
pub fn decode_coherent(y: &RVec, h_est: &RVec, code: &CodeMatrices) -> Result<SymbolQuad> {
    let norm_sq = h_est.norm_squared();
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut quad = [Complex64::new(0.0, 0.0); 4];
    for k in 0..SYMBOLS_PER_BLOCK {
        let re = (&code.phi[2 * k] * h_est).dot(y) / (2.0 * norm_sq);
        let im = (&code.phi[2 * k + 1] * h_est).dot(y) / (2.0 * norm_sq);
        quad[k] = Complex64::new(re, im);
    }
    Ok(quad)
}
