//! Precoder construction and effective DL gains.

use crate::linalg::CMatrix;
use crate::model::PrecoderKind;

use super::sampling::{ChannelRealization, NrcRealization};

/// Relative pivot floor of the ZF Gram factorization.
pub const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularChannel;

/// Precoder `U` (N×M_tot) from the UL estimate `Ĝ`, with `Ĥ = Ĝᵀ`.
///
/// ZF solves `(ĤĤᴴ) Y = Ĥ` by Cholesky and returns `Yᴴ = Ĥᴴ(ĤĤᴴ)⁻¹`.
pub fn precode(g_hat: &CMatrix, kind: PrecoderKind) -> Result<CMatrix, SingularChannel> {
    let h_hat = g_hat.transpose();
    match kind {
        PrecoderKind::Mrt => Ok(h_hat.conj_transpose()),
        PrecoderKind::Zf => {
            let gram = h_hat.matmul(&g_hat.conj());
            let chol = gram.cholesky(SINGULAR_PIVOT).map_err(|_| SingularChannel)?;
            Ok(chol.solve(&h_hat).conj_transpose())
        }
    }
}

/// `Γ = β·H·U` with the true DL channel `H = A·Gᵀ·C`.
pub fn effective_gains(
    chan: &ChannelRealization,
    nrc: &NrcRealization,
    u: &CMatrix,
    beta: f64,
) -> CMatrix {
    // Γ = A·(Gᵀ·(C·U)): the N×N product is applied to the thin precoder.
    let cu = nrc.c.matmul(u);
    let gcu = chan.g.transpose().matmul(&cu);
    nrc.a.matmul(&gcu).scale(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::beta;
    use crate::model::SystemConfig;
    use crate::montecarlo::sampling::{sample_channel, substream};
    use num_complex::Complex64;

    fn perfect_csi(cfg: &SystemConfig, seed: u64) -> ChannelRealization {
        let mut ch = sample_channel(cfg, &mut substream(seed, 0));
        ch.g = ch.g_hat.clone();
        ch.eps = CMatrix::zeros(cfg.m_tot(), cfg.n_bs());
        ch
    }

    #[test]
    fn zf_is_right_inverse() {
        let cfg = SystemConfig::baseline();
        let ch = sample_channel(&cfg, &mut substream(2, 0));
        let u = precode(&ch.g_hat, PrecoderKind::Zf).unwrap();
        let prod = ch.g_hat.transpose().matmul(&u);
        assert!(prod.max_abs_diff(&CMatrix::identity(20)) < 1e-8);
    }

    #[test]
    fn mrt_is_conjugate_transpose() {
        let cfg = SystemConfig::baseline();
        let ch = sample_channel(&cfg, &mut substream(2, 0));
        let u = precode(&ch.g_hat, PrecoderKind::Mrt).unwrap();
        assert_eq!(u, ch.g_hat.transpose().conj_transpose());
    }

    #[test]
    fn single_stream_precoders_are_parallel() {
        let cfg = SystemConfig::single_antenna_ues(8, 1, 1, 1.0, 1.0, 10).unwrap();
        let ch = sample_channel(&cfg, &mut substream(4, 0));
        let zf = precode(&ch.g_hat, PrecoderKind::Zf).unwrap();
        let mrt = precode(&ch.g_hat, PrecoderKind::Mrt).unwrap();
        let ratio = zf[(0, 0)] / mrt[(0, 0)];
        for i in 1..8 {
            assert!((zf[(i, 0)] / mrt[(i, 0)] - ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_estimate_is_rejected() {
        let col = CMatrix::from_fn(4, 1, |i, _| Complex64::new(i as f64 + 1.0, 0.0));
        let g_hat = CMatrix::from_fn(4, 2, |i, _| col[(i, 0)]);
        assert_eq!(precode(&g_hat, PrecoderKind::Zf), Err(SingularChannel));
        assert!(precode(&g_hat, PrecoderKind::Mrt).is_ok());
    }

    #[test]
    fn zf_perfect_csi_gains_are_scaled_identity() {
        let cfg = SystemConfig::baseline();
        let ch = perfect_csi(&cfg, 9);
        let u = precode(&ch.g_hat, PrecoderKind::Zf).unwrap();
        let b = beta(&cfg, PrecoderKind::Zf);
        let gamma = effective_gains(&ch, &NrcRealization::identity(&cfg), &u, b);
        assert!(gamma.max_abs_diff(&CMatrix::identity(20).scale(b)) < 1e-8);
    }

    #[test]
    fn mrt_perfect_csi_single_stream_gain() {
        let cfg = SystemConfig::single_antenna_ues(16, 1, 1, 1.0, 1.0, 10).unwrap();
        let ch = perfect_csi(&cfg, 3);
        let u = precode(&ch.g_hat, PrecoderKind::Mrt).unwrap();
        let gamma = effective_gains(&ch, &NrcRealization::identity(&cfg), &u, 0.5);
        let norm2: f64 = (0..16).map(|i| ch.g[(i, 0)].norm_sqr()).sum();
        assert!((gamma[(0, 0)] - Complex64::new(0.5 * norm2, 0.0)).norm() < 1e-12);
    }
}
