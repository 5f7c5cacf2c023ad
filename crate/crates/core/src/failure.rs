//! Element failure patterns.
//!
//! The Monte Carlo engine samples each element independently; the closed
//! form conditions on the failure count and takes the first `q` elements as
//! the failed ones. Indices are zero-based.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FailureError {
    #[error("cannot fail {q} of {m_prime} elements")]
    CountOutOfRange { q: usize, m_prime: usize },
    #[error("failure probability {0} outside [0, 1]")]
    Probability(f64),
}

/// Which elements of a block have failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailurePattern {
    m_prime: usize,
    failed: Vec<usize>,
}

impl FailurePattern {
    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    /// Failed indices, ascending.
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn q(&self) -> usize {
        self.failed.len()
    }

    /// Working element indices, ascending.
    pub fn active(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.m_prime - self.failed.len());
        let mut failed = self.failed.iter().peekable();
        for e in 0..self.m_prime {
            if failed.peek() == Some(&&e) {
                failed.next();
            } else {
                out.push(e);
            }
        }
        out
    }
}

/// Fails each of `m_prime` elements independently with probability `p`,
/// consuming exactly one uniform per element.
pub fn sample_pattern<R: Rng + ?Sized>(
    rng: &mut R,
    m_prime: usize,
    p: f64,
) -> Result<FailurePattern, FailureError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FailureError::Probability(p));
    }
    let failed = (0..m_prime).filter(|_| rng.random::<f64>() < p).collect();
    Ok(FailurePattern { m_prime, failed })
}

/// The first `q` elements failed.
pub fn first_q_pattern(m_prime: usize, q: usize) -> Result<FailurePattern, FailureError> {
    if q > m_prime {
        return Err(FailureError::CountOutOfRange { q, m_prime });
    }
    Ok(FailurePattern {
        m_prime,
        failed: (0..q).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_q_examples() {
        assert!(first_q_pattern(5, 0).unwrap().failed().is_empty());
        assert_eq!(first_q_pattern(5, 5).unwrap().failed(), &[0, 1, 2, 3, 4]);
        let p = first_q_pattern(5, 2).unwrap();
        assert_eq!(p.failed(), &[0, 1]);
        assert_eq!(p.active(), vec![2, 3, 4]);
        assert_eq!(p.q(), 2);
        assert_eq!(
            first_q_pattern(5, 6),
            Err(FailureError::CountOutOfRange { q: 6, m_prime: 5 })
        );
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sample_pattern(&mut rng, 12, 0.0).unwrap().q(), 0);
            assert_eq!(sample_pattern(&mut rng, 12, 1.0).unwrap().q(), 12);
        }
        assert!(sample_pattern(&mut rng, 3, -0.1).is_err());
        assert!(sample_pattern(&mut rng, 3, f64::NAN).is_err());
    }

    #[test]
    fn binomial_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let total: usize = (0..n)
            .map(|_| sample_pattern(&mut rng, 30, 0.1).unwrap().q())
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 3.0).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn active_complements_failed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = sample_pattern(&mut rng, 9, 0.4).unwrap();
            let mut all: Vec<usize> = p
                .active()
                .into_iter()
                .chain(p.failed().iter().copied())
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..9).collect::<Vec<_>>());
        }
    }
}
