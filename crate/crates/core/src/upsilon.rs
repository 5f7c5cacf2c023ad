//! The deterministic block aggregate `Upsilon = Omega |sum_{l,s,m} zeta_{l,s,m}|^2`.
//!
//! `zeta_{l,s,m} = sqrt(a_{l,s} a_{l,m} (d_U d_B)^-delta) exp(i(Psi_m - theta_s - Phi_m))`.
//!
//! Two routes are provided and must agree: [`upsilon_direct`] evaluates the
//! complex sum (factored as `sum_l (sum_s ..)(sum_m ..)`, `O(M'^2)`), while
//! [`upsilon_expanded`] enumerates every term and every unordered pair of
//! distinct terms, `|sum zeta|^2 = sum |zeta|^2 + 2 sum_{pairs} Re(zeta zeta'*)`.
//!
//! Element subsets are given as zero-based indices of the *active*
//! (non-failed) elements; failed elements drop out of all three sums.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{LinearBudget, RisBlockConfig};
use crate::numeric::CompensatedSum;

/// Largest block the pair enumeration accepts.
pub const EXPANDED_MAX_ELEMENTS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpsilonError {
    #[error("element index {index} out of range for a block of {m_prime} elements")]
    IndexOutOfRange { index: usize, m_prime: usize },
    #[error("duplicate element index {0} in active set")]
    DuplicateIndex(usize),
    #[error("pair expansion refused for M' = {0} (limit {EXPANDED_MAX_ELEMENTS})")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonValue {
    /// `Omega (diag_sum + cross_sum)`.
    pub total: f64,
    /// `sum |zeta|^2`.
    pub diag_sum: f64,
    /// `2 sum_{pairs} Re(zeta zeta'*)`.
    pub cross_sum: f64,
    pub active_elements: usize,
}

impl UpsilonValue {
    fn empty() -> Self {
        Self {
            total: 0.0,
            diag_sum: 0.0,
            cross_sum: 0.0,
            active_elements: 0,
        }
    }
}

/// One term `zeta_{l,s,m}` of the block sum (zero-based indices).
pub fn zeta(
    block: &RisBlockConfig,
    l: usize,
    s: usize,
    m: usize,
) -> Result<Complex64, UpsilonError> {
    let m_prime = block.m_prime();
    for index in [l, s, m] {
        if index >= m_prime {
            return Err(UpsilonError::IndexOutOfRange { index, m_prime });
        }
    }
    Ok(zeta_unchecked(block, block.distance_factor(), l, s, m))
}

#[inline]
fn zeta_unchecked(block: &RisBlockConfig, dist: f64, l: usize, s: usize, m: usize) -> Complex64 {
    let c = &block.correlation;
    let mag = (c.get(l, s) * c.get(l, m) * dist).sqrt();
    let phase = block.phases_psi[m] - block.phases_theta[s] - block.phases_phi[m];
    Complex64::from_polar(mag, phase)
}

fn check_active(active: &[usize], m_prime: usize) -> Result<(), UpsilonError> {
    let mut seen = vec![false; m_prime];
    for &index in active {
        if index >= m_prime {
            return Err(UpsilonError::IndexOutOfRange { index, m_prime });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(UpsilonError::DuplicateIndex(index));
        }
    }
    Ok(())
}

/// `Omega |sum zeta|^2` over the active elements. An empty set gives 0.
pub fn upsilon_direct(
    block: &RisBlockConfig,
    budget: LinearBudget,
    active: &[usize],
) -> Result<UpsilonValue, UpsilonError> {
    check_active(active, block.m_prime())?;
    Ok(BlockKernel::new(block).upsilon(budget.omega, active))
}

/// Same quantity through explicit term and pair enumeration (`O(M'^6)`).
pub fn upsilon_expanded(
    block: &RisBlockConfig,
    budget: LinearBudget,
    active: &[usize],
) -> Result<UpsilonValue, UpsilonError> {
    let m_prime = block.m_prime();
    if m_prime > EXPANDED_MAX_ELEMENTS {
        return Err(UpsilonError::TooLarge(m_prime));
    }
    check_active(active, m_prime)?;
    if active.is_empty() {
        return Ok(UpsilonValue::empty());
    }
    let dist = block.distance_factor();
    let mut terms = Vec::with_capacity(active.len().pow(3));
    for &l in active {
        for &s in active {
            for &m in active {
                terms.push(zeta_unchecked(block, dist, l, s, m));
            }
        }
    }
    let diag: CompensatedSum = terms.iter().map(|z| z.norm_sqr()).collect();
    let mut cross = CompensatedSum::new();
    for (i, zi) in terms.iter().enumerate() {
        for zj in &terms[i + 1..] {
            cross.add(2.0 * (zi * zj.conj()).re);
        }
    }
    let (diag_sum, cross_sum) = (diag.value(), cross.value());
    Ok(UpsilonValue {
        total: budget.omega * (diag_sum + cross_sum),
        diag_sum,
        cross_sum,
        active_elements: active.len(),
    })
}

/// Precomputed per-block factors for repeated evaluation over subsets.
#[derive(Debug, Clone)]
pub struct BlockKernel {
    m_prime: usize,
    corr: Vec<f64>,
    sqrt_corr: Vec<f64>,
    /// `exp(-i theta_s)`.
    user_phasor: Vec<Complex64>,
    /// `exp(i (Psi_m - Phi_m))`.
    bs_phasor: Vec<Complex64>,
    dist: f64,
}

impl BlockKernel {
    pub fn new(block: &RisBlockConfig) -> Self {
        let m = block.m_prime();
        let corr: Vec<f64> = (0..m * m)
            .map(|i| block.correlation.get(i / m, i % m))
            .collect();
        Self {
            m_prime: m,
            sqrt_corr: corr.iter().map(|a| a.sqrt()).collect(),
            corr,
            user_phasor: block
                .phases_theta
                .iter()
                .map(|&t| Complex64::from_polar(1.0, -t))
                .collect(),
            bs_phasor: block
                .phases_psi
                .iter()
                .zip(&block.phases_phi)
                .map(|(&psi, &phi)| Complex64::from_polar(1.0, psi - phi))
                .collect(),
            dist: block.distance_factor(),
        }
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    /// Indices must be in range and distinct; not rechecked here.
    pub fn upsilon(&self, omega: f64, active: &[usize]) -> UpsilonValue {
        if active.is_empty() {
            return UpsilonValue::empty();
        }
        let m = self.m_prime;
        let mut amplitude = Complex64::new(0.0, 0.0);
        let mut diag = 0.0;
        for &l in active {
            let row = l * m;
            let mut user = Complex64::new(0.0, 0.0);
            let mut bs = Complex64::new(0.0, 0.0);
            let mut corr_sum = 0.0;
            for &e in active {
                let r = self.sqrt_corr[row + e];
                user += self.user_phasor[e] * r;
                bs += self.bs_phasor[e] * r;
                corr_sum += self.corr[row + e];
            }
            amplitude += user * bs;
            diag += corr_sum * corr_sum;
        }
        let diag_sum = diag * self.dist;
        let coherent = amplitude.norm_sqr() * self.dist;
        UpsilonValue {
            total: omega * coherent,
            diag_sum,
            cross_sum: coherent - diag_sum,
            active_elements: active.len(),
        }
    }

    /// Upsilon with every element active.
    pub fn upsilon_all(&self, omega: f64) -> UpsilonValue {
        let all: Vec<usize> = (0..self.m_prime).collect();
        self.upsilon(omega, &all)
    }
}
