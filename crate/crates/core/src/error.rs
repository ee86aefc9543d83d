use core::fmt;

/// Rejection of a system configuration or NRC statistics set.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// The BS must have strictly more antennas than the UE side in total.
    Dimension { n_bs: usize, m_tot: usize },
    /// Orthogonal pilots need at least one symbol per UE antenna.
    Pilot { tau_u: usize, m_tot: usize },
    /// A count or SNR is out of its admissible range.
    Range {
        field: &'static str,
        reason: &'static str,
    },
    /// A second-order statistic is negative or not finite.
    NegativeStatistic { field: &'static str, value: f64 },
    /// The diagonal cross-correlation of C′ exceeds the diagonal variance.
    CrossCorrelation { delta2_c_d: f64, sigma2_c_d: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Dimension { n_bs, m_tot } => write!(
                f,
                "BS antenna count N = {n_bs} must exceed the total UE antenna count M_tot = {m_tot}"
            ),
            ModelError::Pilot { tau_u, m_tot } => write!(
                f,
                "pilot length tau_u = {tau_u} is shorter than M_tot = {m_tot}; pilots cannot be orthogonal"
            ),
            ModelError::Range { field, reason } => write!(f, "{field}: {reason}"),
            ModelError::NegativeStatistic { field, value } => {
                write!(f, "{field} = {value} must be a finite, nonnegative power")
            }
            ModelError::CrossCorrelation {
                delta2_c_d,
                sigma2_c_d,
            } => write!(
                f,
                "diagonal cross-correlation delta2_c_d = {delta2_c_d} exceeds the diagonal variance sigma2_c_d = {sigma2_c_d}"
            ),
        }
    }
}

impl core::error::Error for ModelError {}
