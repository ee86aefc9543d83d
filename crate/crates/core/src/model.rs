//! Domain types shared by the analytic and Monte Carlo engines.
//!
//! UE-side antennas are indexed logically from `0` to `M_tot - 1`: the first
//! `M_1` indices belong to UE 0, the next `M_2` to UE 1, and so on.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use crate::units::db_to_linear;
use crate::ModelError;

/// Dimensions and SNRs of one cell.
///
/// SNRs are linear power ratios. Instances are only created through
/// validating constructors, so every `SystemConfig` satisfies
/// `N > M_tot >= 1`, `tau_u >= M_tot`, `T >= tau_u` and positive SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    n_bs: usize,
    ue_antennas: Vec<usize>,
    m_tot: usize,
    owner: Vec<usize>,
    tau_u: usize,
    rho_u: f64,
    rho_d: f64,
    coherence_symbols: usize,
}

impl SystemConfig {
    pub fn new(
        n_bs: usize,
        ue_antennas: Vec<usize>,
        tau_u: usize,
        rho_u: f64,
        rho_d: f64,
        coherence_symbols: usize,
    ) -> Result<Self, ModelError> {
        check_ranges(n_bs, &ue_antennas, tau_u, rho_u, rho_d, coherence_symbols)?;
        let m_tot: usize = ue_antennas.iter().sum();
        if n_bs <= m_tot {
            return Err(ModelError::Dimension { n_bs, m_tot });
        }
        if tau_u < m_tot {
            return Err(ModelError::Pilot { tau_u, m_tot });
        }
        if coherence_symbols < tau_u {
            return Err(ModelError::Range {
                field: "coherence_symbols",
                reason: "coherence interval is shorter than the pilot length",
            });
        }
        let owner = ue_antennas
            .iter()
            .enumerate()
            .flat_map(|(k, &m_k)| core::iter::repeat(k).take(m_k))
            .collect();
        Ok(SystemConfig {
            n_bs,
            ue_antennas,
            m_tot,
            owner,
            tau_u,
            rho_u,
            rho_d,
            coherence_symbols,
        })
    }

    /// `k` single-antenna UEs.
    pub fn single_antenna_ues(
        n_bs: usize,
        k: usize,
        tau_u: usize,
        rho_u: f64,
        rho_d: f64,
        coherence_symbols: usize,
    ) -> Result<Self, ModelError> {
        Self::new(n_bs, vec![1; k], tau_u, rho_u, rho_d, coherence_symbols)
    }

    /// N = 100, 20 single-antenna UEs, `tau_u = M_tot`, `rho_u` = 0 dB,
    /// `rho_d` = 20 dB, T = 196.
    pub fn baseline() -> Self {
        Self::single_antenna_ues(100, 20, 20, 1.0, db_to_linear(20.0), 196)
            .expect("baseline configuration is valid")
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn ue_antennas(&self) -> &[usize] {
        &self.ue_antennas
    }

    pub fn num_ues(&self) -> usize {
        self.ue_antennas.len()
    }

    pub fn m_tot(&self) -> usize {
        debug_assert_eq!(self.m_tot, self.ue_antennas.iter().sum::<usize>());
        self.m_tot
    }

    pub fn tau_u(&self) -> usize {
        self.tau_u
    }

    pub fn rho_u(&self) -> f64 {
        self.rho_u
    }

    pub fn rho_d(&self) -> f64 {
        self.rho_d
    }

    pub fn coherence_symbols(&self) -> usize {
        self.coherence_symbols
    }

    /// `tau_u * rho_u`, the processed pilot SNR.
    pub fn pilot_gain(&self) -> f64 {
        self.tau_u as f64 * self.rho_u
    }

    /// Fraction of the coherence interval left for data, `1 - tau_u / T`.
    pub fn data_fraction(&self) -> f64 {
        1.0 - self.tau_u as f64 / self.coherence_symbols as f64
    }

    /// UE that owns antenna `m`.
    ///
    /// # Panics
    /// If `m >= M_tot`.
    pub fn owner_of(&self, m: usize) -> usize {
        self.owner[m]
    }

    /// Antenna indices of UE `k`.
    pub fn ue_block(&self, k: usize) -> Range<usize> {
        let start: usize = self.ue_antennas[..k].iter().sum();
        start..start + self.ue_antennas[k]
    }

    /// Antenna indices of the UE that owns antenna `m`.
    pub fn block_of(&self, m: usize) -> Range<usize> {
        self.ue_block(self.owner_of(m))
    }

    pub fn with_rho_d(&self, rho_d: f64) -> Result<Self, ModelError> {
        Self::new(
            self.n_bs,
            self.ue_antennas.clone(),
            self.tau_u,
            self.rho_u,
            rho_d,
            self.coherence_symbols,
        )
    }

    pub fn with_n_bs(&self, n_bs: usize) -> Result<Self, ModelError> {
        Self::new(
            n_bs,
            self.ue_antennas.clone(),
            self.tau_u,
            self.rho_u,
            self.rho_d,
            self.coherence_symbols,
        )
    }

    /// Replaces the UE layout together with the pilot length it requires.
    pub fn with_ue_antennas(
        &self,
        ue_antennas: Vec<usize>,
        tau_u: usize,
    ) -> Result<Self, ModelError> {
        Self::new(
            self.n_bs,
            ue_antennas,
            tau_u,
            self.rho_u,
            self.rho_d,
            self.coherence_symbols,
        )
    }
}

fn check_ranges(
    n_bs: usize,
    ue_antennas: &[usize],
    tau_u: usize,
    rho_u: f64,
    rho_d: f64,
    coherence_symbols: usize,
) -> Result<(), ModelError> {
    let range = |field, reason| Err(ModelError::Range { field, reason });
    if n_bs == 0 {
        return range("n_bs", "must be at least 1");
    }
    if ue_antennas.is_empty() {
        return range("ue_antennas", "at least one UE is required");
    }
    if ue_antennas.contains(&0) {
        return range("ue_antennas", "every UE needs at least one antenna");
    }
    if tau_u == 0 {
        return range("tau_u", "must be at least 1");
    }
    if coherence_symbols == 0 {
        return range("coherence_symbols", "must be at least 1");
    }
    if !(rho_u.is_finite() && rho_u > 0.0) {
        return range("rho_u", "must be a finite, positive linear SNR");
    }
    if !(rho_d.is_finite() && rho_d > 0.0) {
        return range("rho_d", "must be a finite, positive linear SNR");
    }
    Ok(())
}

/// Checks every [`SystemConfig`] invariant.
///
/// Construction already enforces these, so this only fails if an invariant
/// was broken after the fact; it exists as the explicit validation entry point.
pub fn validate_config(cfg: &SystemConfig) -> Result<(), ModelError> {
    SystemConfig::new(
        cfg.n_bs,
        cfg.ue_antennas.clone(),
        cfg.tau_u,
        cfg.rho_u,
        cfg.rho_d,
        cfg.coherence_symbols,
    )
    .map(|_| ())
}

/// Second-order statistics of the NRC matrices `A′` and `C′`, in linear power.
///
/// Statistics are homogeneous: every element of a class shares the class
/// value, so `σ²_{a′_mm} = sigma2_a_d` for all `m`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NrcStats {
    sigma2_a_d: f64,
    sigma2_a_od: f64,
    sigma2_c_d: f64,
    delta2_c_d: f64,
    sigma2_c_od: f64,
}

impl NrcStats {
    pub const ZERO: NrcStats = NrcStats {
        sigma2_a_d: 0.0,
        sigma2_a_od: 0.0,
        sigma2_c_d: 0.0,
        delta2_c_d: 0.0,
        sigma2_c_od: 0.0,
    };

    /// Arguments: diagonal and off-diagonal variance of `A′`, diagonal
    /// variance and pairwise diagonal cross-correlation of `C′`, and
    /// off-diagonal variance of `C′`.
    pub fn new(
        sigma2_a_d: f64,
        sigma2_a_od: f64,
        sigma2_c_d: f64,
        delta2_c_d: f64,
        sigma2_c_od: f64,
    ) -> Result<Self, ModelError> {
        for (field, value) in [
            ("sigma2_a_d", sigma2_a_d),
            ("sigma2_a_od", sigma2_a_od),
            ("sigma2_c_d", sigma2_c_d),
            ("delta2_c_d", delta2_c_d),
            ("sigma2_c_od", sigma2_c_od),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::NegativeStatistic { field, value });
            }
        }
        if delta2_c_d > sigma2_c_d {
            return Err(ModelError::CrossCorrelation {
                delta2_c_d,
                sigma2_c_d,
            });
        }
        Ok(NrcStats {
            sigma2_a_d,
            sigma2_a_od,
            sigma2_c_d,
            delta2_c_d,
            sigma2_c_od,
        })
    }

    pub fn sigma2_a_d(&self) -> f64 {
        self.sigma2_a_d
    }

    pub fn sigma2_a_od(&self) -> f64 {
        self.sigma2_a_od
    }

    pub fn sigma2_c_d(&self) -> f64 {
        self.sigma2_c_d
    }

    pub fn delta2_c_d(&self) -> f64 {
        self.delta2_c_d
    }

    pub fn sigma2_c_od(&self) -> f64 {
        self.sigma2_c_od
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// Fields in constructor order.
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.sigma2_a_d,
            self.sigma2_a_od,
            self.sigma2_c_d,
            self.delta2_c_d,
            self.sigma2_c_od,
        ]
    }
}

/// Trace and sum aggregates of the NRC covariances; the only NRC quantities
/// the closed forms consume.
#[derive(Debug, Clone, PartialEq)]
pub struct NrcAggregates {
    /// `Tr(R_{a′_m})` per UE antenna.
    pub tr_ra: Vec<f64>,
    /// `σ²_{a′_mm}`, identical for every antenna.
    pub sigma2_a_mm: f64,
    pub tr_rc_d: f64,
    pub sum_rc_d: f64,
    pub tr_rc_od: f64,
}

pub fn nrc_aggregates(cfg: &SystemConfig, nrc: &NrcStats) -> NrcAggregates {
    let n = cfg.n_bs() as f64;
    let tr_ra = (0..cfg.m_tot())
        .map(|m| {
            let m_k = cfg.ue_antennas()[cfg.owner_of(m)] as f64;
            nrc.sigma2_a_d + (m_k - 1.0) * nrc.sigma2_a_od
        })
        .collect();
    NrcAggregates {
        tr_ra,
        sigma2_a_mm: nrc.sigma2_a_d,
        tr_rc_d: n * nrc.sigma2_c_d,
        sum_rc_d: n * nrc.sigma2_c_d + n * (n - 1.0) * nrc.delta2_c_d,
        tr_rc_od: n * (n - 1.0) * nrc.sigma2_c_od,
    }
}

/// Linear precoder family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecoderKind {
    /// Zero forcing: pseudo-inverse of the estimated DL channel.
    Zf,
    /// Maximum-ratio transmission: conjugate transpose of the estimate.
    Mrt,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 2] = [PrecoderKind::Zf, PrecoderKind::Mrt];

    pub fn as_str(&self) -> &'static str {
        match self {
            PrecoderKind::Zf => "zf",
            PrecoderKind::Mrt => "mrt",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecoderKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zf" | "ZF" => Ok(PrecoderKind::Zf),
            "mrt" | "MRT" => Ok(PrecoderKind::Mrt),
            _ => Err(ModelError::Range {
                field: "precoder",
                reason: "expected `zf` or `mrt`",
            }),
        }
    }
}

/// Maps a scalar NRC level to the five statistics.
///
/// Diagonal variances (`σ²_{a′_d}`, `σ²_{c′_d}`) sit at `level + diag_offset_db`;
/// the off-diagonal variances and `δ²_{c′_d}` at `level + offdiag_offset_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRule {
    pub diag_offset_db: f64,
    pub offdiag_offset_db: f64,
}

impl Default for CouplingRule {
    /// Off-diagonal and cross-correlation statistics 10 dB below the diagonal ones.
    fn default() -> Self {
        CouplingRule {
            diag_offset_db: 0.0,
            offdiag_offset_db: -10.0,
        }
    }
}

impl CouplingRule {
    /// Statistics for a linear NRC level (`0` gives the reciprocal case).
    pub fn stats(&self, level: f64) -> Result<NrcStats, ModelError> {
        let diag = level * db_to_linear(self.diag_offset_db);
        let off = level * db_to_linear(self.offdiag_offset_db);
        NrcStats::new(diag, off, diag, off, off)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.diag_offset_db.is_finite() && self.offdiag_offset_db.is_finite()) {
            return Err(ModelError::Range {
                field: "coupling",
                reason: "offsets must be finite dB values",
            });
        }
        if self.offdiag_offset_db > self.diag_offset_db {
            return Err(ModelError::Range {
                field: "coupling",
                reason: "cross-correlation offset above the diagonal offset violates delta2_c_d <= sigma2_c_d",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn baseline_with(n_bs: usize, k: usize, tau_u: usize) -> Result<SystemConfig, ModelError> {
        SystemConfig::single_antenna_ues(n_bs, k, tau_u, 1.0, 100.0, 196)
    }

    #[test]
    fn baseline_is_valid() {
        let cfg = baseline_with(100, 20, 20).unwrap();
        assert_eq!(validate_config(&cfg), Ok(()));
        assert_eq!(cfg, SystemConfig::baseline());
        assert_eq!(cfg.m_tot(), 20);
        assert_eq!(cfg.num_ues(), 20);
    }

    #[test]
    fn square_system_is_rejected() {
        assert_eq!(
            baseline_with(20, 20, 20),
            Err(ModelError::Dimension {
                n_bs: 20,
                m_tot: 20
            })
        );
    }

    #[test]
    fn short_pilots_are_rejected() {
        assert_eq!(
            baseline_with(100, 20, 19),
            Err(ModelError::Pilot {
                tau_u: 19,
                m_tot: 20
            })
        );
    }

    #[test]
    fn range_errors() {
        let err = |r: Result<SystemConfig, ModelError>| match r {
            Err(ModelError::Range { field, .. }) => field,
            other => panic!("expected range error, got {other:?}"),
        };
        assert_eq!(
            err(SystemConfig::new(100, vec![1, 0], 2, 1.0, 1.0, 196)),
            "ue_antennas"
        );
        assert_eq!(
            err(SystemConfig::new(100, vec![], 2, 1.0, 1.0, 196)),
            "ue_antennas"
        );
        assert_eq!(
            err(SystemConfig::new(100, vec![1], 1, 0.0, 1.0, 196)),
            "rho_u"
        );
        assert_eq!(
            err(SystemConfig::new(100, vec![1], 1, 1.0, -1.0, 196)),
            "rho_d"
        );
        assert_eq!(
            err(SystemConfig::new(100, vec![1], 1, 1.0, f64::NAN, 196)),
            "rho_d"
        );
        assert_eq!(
            err(SystemConfig::new(100, vec![1], 4, 1.0, 1.0, 3)),
            "coherence_symbols"
        );
    }

    #[test]
    fn owner_map_follows_logical_indexing() {
        let cfg = SystemConfig::new(16, vec![2, 1, 4], 7, 1.0, 1.0, 50).unwrap();
        let owners: Vec<usize> = (0..cfg.m_tot()).map(|m| cfg.owner_of(m)).collect();
        assert_eq!(owners, vec![0, 0, 1, 2, 2, 2, 2]);
        assert_eq!(cfg.ue_block(2), 3..7);
        assert_eq!(cfg.block_of(1), 0..2);
    }

    #[test]
    fn nrc_stats_validation() {
        assert!(matches!(
            NrcStats::new(0.0, -1e-3, 0.0, 0.0, 0.0),
            Err(ModelError::NegativeStatistic {
                field: "sigma2_a_od",
                ..
            })
        ));
        assert!(matches!(
            NrcStats::new(0.0, 0.0, 1e-3, 1e-2, 0.0),
            Err(ModelError::CrossCorrelation { .. })
        ));
        assert!(NrcStats::new(0.0, 0.0, 1e-2, 1e-2, 0.0).is_ok());
    }

    #[test]
    fn zero_stats_give_zero_aggregates() {
        let cfg = SystemConfig::new(10, vec![2, 3], 5, 1.0, 1.0, 20).unwrap();
        let ag = nrc_aggregates(&cfg, &NrcStats::ZERO);
        assert!(ag.tr_ra.iter().all(|&t| t == 0.0));
        assert_eq!(
            (ag.tr_rc_d, ag.sum_rc_d, ag.tr_rc_od, ag.sigma2_a_mm),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn bs_side_aggregates() {
        let cfg = SystemConfig::baseline();
        let nrc = NrcStats::new(0.0, 0.0, 0.01, 0.001, 0.0).unwrap();
        let ag = nrc_aggregates(&cfg, &nrc);
        assert!((ag.tr_rc_d - 1.0).abs() < 1e-15);
        assert!((ag.sum_rc_d - 10.9).abs() < 1e-12);
    }

    #[test]
    fn dual_antenna_trace() {
        let cfg = SystemConfig::new(100, vec![2; 10], 20, 1.0, 100.0, 196).unwrap();
        let nrc = NrcStats::new(0.01, 0.001, 0.0, 0.0, 0.0).unwrap();
        let ag = nrc_aggregates(&cfg, &nrc);
        for t in ag.tr_ra {
            assert!((t - 0.011).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_rule_default() {
        let s = CouplingRule::default().stats(0.01).unwrap();
        assert_eq!(s.sigma2_a_d(), 0.01);
        assert_eq!(s.sigma2_c_d(), 0.01);
        assert!((s.sigma2_c_od() - 0.001).abs() < 1e-18);
        assert!((s.delta2_c_d() - 0.001).abs() < 1e-18);
        assert!(CouplingRule {
            diag_offset_db: 0.0,
            offdiag_offset_db: 3.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn precoder_names() {
        for p in PrecoderKind::ALL {
            assert_eq!(p.as_str().parse::<PrecoderKind>().unwrap(), p);
        }
        assert!("bd".parse::<PrecoderKind>().is_err());
    }

    fn layout() -> impl Strategy<Value = (SystemConfig, [f64; 5])> {
        (
            prop::collection::vec(1usize..4, 1..6),
            1usize..40,
            prop::array::uniform5(0.0f64..0.1),
        )
            .prop_map(|(ues, extra, s)| {
                let m_tot: usize = ues.iter().sum();
                let cfg = SystemConfig::new(m_tot + extra, ues, m_tot, 1.0, 10.0, 200).unwrap();
                (cfg, s)
            })
    }

    proptest! {
        #[test]
        fn aggregates_are_linear_in_each_stat((cfg, s) in layout()) {
            let unit = |i: usize| {
                let mut v = [0.0; 5];
                v[i] = 1.0;
                NrcStats::new(v[0], v[1], v[2], v[3], v[4]).unwrap()
            };
            // delta2 <= sigma2_c_d is a constraint, so the superposition uses
            // the unconstrained formula parts directly.
            let full = NrcStats { sigma2_a_d: s[0], sigma2_a_od: s[1], sigma2_c_d: s[2], delta2_c_d: s[3], sigma2_c_od: s[4] };
            let whole = nrc_aggregates(&cfg, &full);
            let mut acc = nrc_aggregates(&cfg, &NrcStats::ZERO);
            for (i, w) in s.iter().enumerate() {
                let basis = if i == 3 {
                    NrcStats { delta2_c_d: 1.0, ..NrcStats::ZERO }
                } else {
                    unit(i)
                };
                let part = nrc_aggregates(&cfg, &basis);
                for (a, p) in acc.tr_ra.iter_mut().zip(&part.tr_ra) { *a += w * p; }
                acc.tr_rc_d += w * part.tr_rc_d;
                acc.sum_rc_d += w * part.sum_rc_d;
                acc.tr_rc_od += w * part.tr_rc_od;
            }
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
            for (a, b) in acc.tr_ra.iter().zip(&whole.tr_ra) { prop_assert!(close(*a, *b)); }
            prop_assert!(close(acc.tr_rc_d, whole.tr_rc_d));
            prop_assert!(close(acc.sum_rc_d, whole.sum_rc_d));
            prop_assert!(close(acc.tr_rc_od, whole.tr_rc_od));
            prop_assert!(whole.sum_rc_d >= whole.tr_rc_d);
        }

        #[test]
        fn single_antenna_trace_ignores_off_diagonal(n_extra in 1usize..50, k in 1usize..30, a_d in 0.0f64..0.1, a_od in 0.0f64..0.1) {
            let cfg = SystemConfig::single_antenna_ues(k + n_extra, k, k, 1.0, 1.0, 400).unwrap();
            let ag = nrc_aggregates(&cfg, &NrcStats::new(a_d, a_od, 0.0, 0.0, 0.0).unwrap());
            prop_assert!(ag.tr_ra.iter().all(|&t| t == a_d));
        }
    }
}
