//! Random draws of channels, estimates and NRC matrices.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;
use crate::model::{NrcStats, SystemConfig};

/// Stream reserved for the frozen NRC draw.
pub(crate) const FROZEN_NRC_STREAM: u64 = u64::MAX;
/// Stream reserved for bootstrap resampling.
pub(crate) const BOOTSTRAP_STREAM: u64 = u64::MAX - 1;

/// Random stream of realization `index` under job seed `seed`.
///
/// Streams are addressed by index alone, so results do not depend on the
/// order or the worker on which realizations are drawn.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer, used to derive independent job seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from `CN(0, variance)`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = libm::sqrt(0.5 * variance);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Effective UL channel with its MMSE estimate and estimation error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `G`, N×M_tot.
    pub g: CMatrix,
    /// `Ĝ`, N×M_tot.
    pub g_hat: CMatrix,
    /// `ε`, M_tot×N, with `G = Ĝ + εᵀ`.
    pub eps: CMatrix,
}

/// Draws `Ĝ` and `ε` independently from their exact laws and forms `G`.
///
/// This skips the explicit pilot transmission; the joint law of
/// `(G, Ĝ, ε)` is the same.
pub fn sample_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let n = cfg.n_bs();
    let m = cfg.m_tot();
    let x = cfg.pilot_gain();
    let var_hat = x / (x + 1.0);
    let var_eps = 1.0 / (x + 1.0);
    let g_hat = CMatrix::from_fn(n, m, |_, _| complex_gaussian(rng, var_hat));
    let eps = CMatrix::from_fn(m, n, |_, _| complex_gaussian(rng, var_eps));
    let g = g_hat.add(&eps.transpose());
    ChannelRealization { g, g_hat, eps }
}

/// `A = I + A′` (UE side) and `C = I + C′` (BS side).
#[derive(Debug, Clone, PartialEq)]
pub struct NrcRealization {
    /// M_tot×M_tot, block-diagonal over UEs.
    pub a: CMatrix,
    /// N×N.
    pub c: CMatrix,
}

impl NrcRealization {
    pub fn identity(cfg: &SystemConfig) -> Self {
        NrcRealization {
            a: CMatrix::identity(cfg.m_tot()),
            c: CMatrix::identity(cfg.n_bs()),
        }
    }
}

/// Draws the NRC matrices.
///
/// The diagonal of `C′` shares one common factor:
/// `c′_ii = sqrt(δ²)·z₀ + sqrt(σ² − δ²)·z_i`, which gives variance `σ²_c′d`
/// and pairwise cross-correlation `δ²_c′d`. `δ² ≤ σ²` is guaranteed by
/// [`NrcStats`] construction.
pub fn sample_nrc<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    rng: &mut R,
) -> NrcRealization {
    let m = cfg.m_tot();
    let n = cfg.n_bs();
    let mut a = CMatrix::identity(m);
    for k in 0..cfg.num_ues() {
        let block = cfg.ue_block(k);
        for i in block.clone() {
            for j in block.clone() {
                let var = if i == j {
                    nrc.sigma2_a_d()
                } else {
                    nrc.sigma2_a_od()
                };
                a[(i, j)] += complex_gaussian(rng, var);
            }
        }
    }

    let mut c = CMatrix::identity(n);
    let z0 = complex_gaussian(rng, 1.0);
    let common = libm::sqrt(nrc.delta2_c_d());
    let own = libm::sqrt(nrc.sigma2_c_d() - nrc.delta2_c_d());
    for i in 0..n {
        for j in 0..n {
            if i == j {
                c[(i, i)] += z0 * common + complex_gaussian(rng, 1.0) * own;
            } else {
                c[(i, j)] += complex_gaussian(rng, nrc.sigma2_c_od());
            }
        }
    }
    NrcRealization { a, c }
}
