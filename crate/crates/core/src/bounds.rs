//! Closed-form security calculus.
//!
//! Conventions: logarithms are base 2 except the Eve min-entropy bound,
//! which divides by 2 ln 2 as printed. All bounds clamp into their
//! meaningful ranges so parameter sweeps stay total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

/// log2(3), the settings min-entropy at which the biased local bound
/// reaches the algebraic maximum.
pub const LOG2_3: f64 = 1.584_962_500_721_156_2;

/// Loss rate at which the product-state bound R(L) clamps to 1:
/// solves 3/4 + L / (2 (2 - log2 3)) = 1.
pub const CLAMP_LOSS_RATE: f64 = 0.207_518_749_639_421_96;

fn check_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(x >= lo && x <= hi) {
        return Err(Error::InvalidParameter(format!(
            "{name}={x} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Maximal CGLMP value attainable with product states when the settings
/// randomness has min-entropy loss rate `l`:
/// R(L) = min{ 3/4 + L / (2 (2 - log2 3)), 1 }.
pub fn product_state_bound(l: f64) -> Result<f64> {
    check_range("L", l, 0.0, 1.0)?;
    Ok((0.75 + l / (2.0 * (2.0 - LOG2_3))).min(1.0))
}

/// Per-round local bound under biased settings with min-entropy `h_min`:
/// min{ 3 * 2^(-h_min), 1 }.
pub fn biased_round_bound(h_min: f64) -> Result<f64> {
    check_range("h_min", h_min, 0.0, 2.0)?;
    Ok((3.0 * (-h_min).exp2()).min(1.0))
}

/// Loss rate at which R(L) reaches the quantum value `q`; at or above it
/// no security is possible.
pub fn critical_loss_rate(q: f64) -> Result<f64> {
    check_range("Q", q, 0.75, 1.0)?;
    Ok((q - 0.75) * 2.0 * (2.0 - LOG2_3))
}

/// Per-round settings min-entropy at which the biased local bound meets
/// the quantum value `q`: log2(3 / Q).
pub fn critical_min_entropy(q: f64) -> Result<f64> {
    if !(q > 0.75 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Q={q} outside (3/4, 1]"
        )));
    }
    Ok((3.0 / q).log2())
}

/// Lower bound on Eve's min-entropy rate about Alice's key:
/// H(L) = max{0, (R_obs - R(L)) / (2 ln 2)}.
///
/// Positive exactly when the product-state bound is strictly violated.
pub fn eve_min_entropy_bound(r_obs: f64, l: f64) -> Result<f64> {
    check_range("R_obs", r_obs, 0.0, 1.0)?;
    let r_l = product_state_bound(l)?;
    Ok(((r_obs - r_l) / (2.0 * std::f64::consts::LN_2)).max(0.0))
}

/// Eve's guessing probability given a Bell value `q` against local bound
/// `r` at settings min-entropy `h_min`:
/// min{1, max{0, 1 - 2^(h_min - 1) (q - r)}}.
///
/// `q < r` yields the vacuous bound 1.
pub fn guessing_probability_bound(q: f64, r: f64, h_min: f64) -> Result<f64> {
    if h_min < 0.0 {
        return Err(Error::InvalidParameter(format!("h_min={h_min} < 0")));
    }
    Ok((1.0 - (h_min - 1.0).exp2() * (q - r)).clamp(0.0, 1.0))
}

/// Key-rate lower bound K >= H_min(A|E) - N_pub / N_key. May be negative,
/// meaning no key.
pub fn key_rate_lower_bound(h_min_ae: f64, n_pub: f64, n_key: f64) -> Result<f64> {
    if n_key <= 0.0 {
        return Err(Error::InvalidParameter(format!("n_key={n_key} <= 0")));
    }
    if h_min_ae < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "h_min_ae={h_min_ae} < 0"
        )));
    }
    Ok(h_min_ae - n_pub / n_key)
}

/// Adversary's optimal split of a total settings-entropy budget `h_sigma`
/// over `m_rounds` rounds: `m_low` rounds run at entropy log2(3) and the
/// rest at the full 2 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyAllocation {
    /// Number of rounds allocated the minimal useful entropy log2(3).
    pub m_low: f64,
    /// Resulting average local bound over all rounds.
    pub r_avg: f64,
}

/// Optimal entropy allocation: m = (2M - H_sigma) / (2 - log2 3), with the
/// average bound R_avg = (m + (3/4)(M - m)) / M.
///
/// Consistency with the loss-rate form: R_avg equals
/// `product_state_bound(1 - H_sigma / 2M)`.
pub fn optimal_entropy_allocation(m_rounds: u64, h_sigma: f64) -> Result<EntropyAllocation> {
    let m = m_rounds as f64;
    if m_rounds == 0 {
        return Err(Error::InvalidParameter("M=0".into()));
    }
    if !(h_sigma >= m * LOG2_3 - 1e-9 && h_sigma <= 2.0 * m + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "H_sigma={h_sigma} outside [M log2 3, 2M] = [{}, {}]",
            m * LOG2_3,
            2.0 * m
        )));
    }
    let m_low = ((2.0 * m - h_sigma) / (2.0 - LOG2_3)).clamp(0.0, m);
    let r_avg = (m_low + 0.75 * (m - m_low)) / m;
    Ok(EntropyAllocation { m_low, r_avg })
}

/// Advisory EC/PA feasibility predicate (conjectured sufficient condition):
/// H(L) - H(A|B) > L.
///
/// Never feeds a secure/insecure verdict; reported separately.
pub fn ecpa_conjecture_check(h_of_l: f64, h_a_given_b: f64, l: f64) -> bool {
    h_of_l - h_a_given_b > l
}

/// Security verdict for a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecurityFlag {
    /// Observed violation strictly above the product-state bound.
    Secure,
    /// Observed violation at the product-state bound within 1e-9.
    Boundary,
    /// Observed violation at or below the product-state bound.
    Insecure,
}

/// Bundle of security quantities for one (L, R_obs) parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecurityAssessment {
    pub loss_rate: f64,
    pub r_of_l: f64,
    pub r_obs: f64,
    pub r_q: f64,
    /// Eve min-entropy rate bound H(L), per round. Multiply by log2(d)
    /// for per-symbol accounting.
    pub h_of_l: f64,
    /// Minimal k/f ratio Eve needs to fake `r_obs`.
    pub k_ratio: f64,
    /// Largest admissible test fraction, if any.
    pub f_max: Option<f64>,
    /// Key-rate lower bound when (n_pub, n_key) were supplied.
    pub key_rate: Option<f64>,
    pub flag: SecurityFlag,
}

/// Assemble the full assessment for a parameter point. `r_q` is the
/// quantum bound used for the k-requirement (algebraic fallback: 1).
pub fn assess(
    l: f64,
    r_obs: f64,
    r_q: f64,
    pub_key: Option<(f64, f64)>,
) -> Result<SecurityAssessment> {
    let r_of_l = product_state_bound(l)?;
    let h_of_l = eve_min_entropy_bound(r_obs, l)?;
    let flag = if (r_obs - r_of_l).abs() <= 1e-9 {
        SecurityFlag::Boundary
    } else if r_obs > r_of_l {
        SecurityFlag::Secure
    } else {
        SecurityFlag::Insecure
    };
    let (k_ratio, f_max) = if r_obs > r_of_l && r_q > r_of_l {
        let k = sampling::required_k_ratio(r_obs, l, r_q)?;
        let f = match sampling::solve_secure_fraction(l, r_obs, r_q)? {
            sampling::FractionBound::UpTo(f) => Some(f),
            sampling::FractionBound::NoSecureFraction => None,
        };
        (k, f)
    } else {
        (0.0, None)
    };
    let key_rate = match pub_key {
        Some((n_pub, n_key)) => Some(key_rate_lower_bound(h_of_l, n_pub, n_key)?),
        None => None,
    };
    Ok(SecurityAssessment {
        loss_rate: l,
        r_of_l,
        r_obs,
        r_q,
        h_of_l,
        k_ratio,
        f_max,
        key_rate,
        flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_bound_anchors() {
        assert_eq!(product_state_bound(0.0).unwrap(), 0.75);
        // Fig. 2 caption anchor
        assert!((product_state_bound(0.03).unwrap() - 0.786141).abs() < 1e-6);
        // clamp point
        assert_eq!(product_state_bound(CLAMP_LOSS_RATE).unwrap(), 1.0);
        assert_eq!(product_state_bound(0.5).unwrap(), 1.0);
        assert!(product_state_bound(-0.1).is_err());
        assert!(product_state_bound(1.1).is_err());
    }

    #[test]
    fn product_state_bound_monotone_continuous() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let l = i as f64 / 1000.0;
            let r = product_state_bound(l).unwrap();
            assert!(r >= prev);
            assert!((0.75..=1.0).contains(&r));
            prev = r;
        }
    }

    #[test]
    fn biased_round_bound_anchors() {
        assert_eq!(biased_round_bound(2.0).unwrap(), 0.75);
        assert!((biased_round_bound(LOG2_3).unwrap() - 1.0).abs() < 1e-12);
        // critical min entropy of 1.875 from the d=2 quantum anchor
        assert!((biased_round_bound(1.875).unwrap() - 0.8177).abs() < 1e-4);
        assert!(biased_round_bound(2.5).is_err());
    }

    #[test]
    fn critical_loss_rate_anchors() {
        // Fig. 1 caption: qubits lose security near L ~ 0.043
        assert!((critical_loss_rate(0.801777).unwrap() - 0.043).abs() < 5e-4);
        assert_eq!(critical_loss_rate(0.75).unwrap(), 0.0);
        assert!((critical_loss_rate(1.0).unwrap() - 0.207519).abs() < 1e-6);
    }

    #[test]
    fn critical_min_entropy_anchors() {
        assert!((critical_min_entropy(0.8177).unwrap() - 1.875).abs() < 1e-3);
        assert!((critical_min_entropy(0.8516).unwrap() - 1.817).abs() < 1e-3);
        assert!((critical_min_entropy(0.75 + 1e-15).unwrap() - 2.0).abs() < 1e-9);
        assert!(critical_min_entropy(0.75).is_err());
    }

    #[test]
    fn inverse_pairs() {
        for i in 0..=100 {
            let h = LOG2_3 + (2.0 - LOG2_3) * i as f64 / 100.0;
            let q = biased_round_bound(h).unwrap();
            assert!((critical_min_entropy(q).unwrap() - h).abs() < 1e-12);
        }
        for i in 0..=100 {
            let l = CLAMP_LOSS_RATE * i as f64 / 100.0;
            let q = product_state_bound(l).unwrap();
            assert!((critical_loss_rate(q).unwrap() - l).abs() < 1e-12);
        }
    }

    #[test]
    fn eve_min_entropy_examples() {
        let r_l = product_state_bound(0.03).unwrap();
        assert_eq!(eve_min_entropy_bound(r_l, 0.03).unwrap(), 0.0);
        // Fig. 2 arithmetic: (0.801777 - 0.786141) / (2 ln 2)
        let h = eve_min_entropy_bound(0.801777, 0.03).unwrap();
        assert!((h - 0.011279).abs() < 1e-5);
        // below the bound: clamped to zero
        assert_eq!(eve_min_entropy_bound(0.7, 0.03).unwrap(), 0.0);
    }

    #[test]
    fn eve_bound_positive_iff_violation() {
        // Lemma-1 consequence, tested as stated.
        for i in 0..200 {
            let l = (i % 20) as f64 / 20.0;
            let r_obs = (i / 20) as f64 / 10.0;
            let r_l = product_state_bound(l).unwrap();
            let h = eve_min_entropy_bound(r_obs, l).unwrap();
            assert_eq!(h > 0.0, r_obs > r_l, "L={l} R_obs={r_obs}");
        }
    }

    #[test]
    fn guessing_probability_examples() {
        assert_eq!(guessing_probability_bound(0.8, 0.8, 1.0).unwrap(), 1.0);
        assert!((guessing_probability_bound(0.9, 0.8, 1.0).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(guessing_probability_bound(1.0, 0.5, 2.0).unwrap(), 0.0);
        // vacuous when Q < R
        assert_eq!(guessing_probability_bound(0.5, 0.8, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn key_rate_examples() {
        assert_eq!(key_rate_lower_bound(0.5, 0.0, 100.0).unwrap(), 0.5);
        let k = key_rate_lower_bound(0.011279, 0.5, 100.0).unwrap();
        assert!((k - 0.006279).abs() < 1e-9);
        assert!((key_rate_lower_bound(0.0, 1.0, 10.0).unwrap() + 0.1).abs() < 1e-12);
        assert!(key_rate_lower_bound(0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn entropy_allocation_endpoints() {
        let a = optimal_entropy_allocation(100, 200.0).unwrap();
        assert!(a.m_low.abs() < 1e-9);
        assert!((a.r_avg - 0.75).abs() < 1e-12);

        let b = optimal_entropy_allocation(100, 100.0 * LOG2_3).unwrap();
        assert!((b.m_low - 100.0).abs() < 1e-9);
        assert!((b.r_avg - 1.0).abs() < 1e-12);

        // M=100, H_sigma=194: m = 6/(2 - log2 3), R_avg = R(0.03)
        let c = optimal_entropy_allocation(100, 194.0).unwrap();
        assert!((c.m_low - 14.456525037919251).abs() < 1e-9);
        assert!((c.r_avg - product_state_bound(0.03).unwrap()).abs() < 1e-12);

        assert!(optimal_entropy_allocation(100, 120.0).is_err());
        assert!(optimal_entropy_allocation(100, 220.0).is_err());
    }

    #[test]
    fn ecpa_examples() {
        assert!(ecpa_conjecture_check(0.5, 0.1, 0.2));
        // strict inequality
        assert!(!ecpa_conjecture_check(0.1, 0.1, 0.0));
        // Fig. 2 parameter point fails the conjectured condition
        assert!(!ecpa_conjecture_check(0.011279, 0.0, 0.03));
    }

    #[test]
    fn assessment_bundle() {
        let a = assess(0.03, 0.801777, 1.0, Some((0.5, 100.0))).unwrap();
        assert_eq!(a.flag, SecurityFlag::Secure);
        assert!((a.r_of_l - 0.786141).abs() < 1e-6);
        assert!((a.k_ratio - 0.073112).abs() < 1e-5);
        assert!((a.f_max.unwrap() - 0.723026).abs() < 2e-3);
        assert!(a.key_rate.unwrap() > 0.0);

        let b = assess(0.03, 0.7, 1.0, None).unwrap();
        assert_eq!(b.flag, SecurityFlag::Insecure);
        assert_eq!(b.h_of_l, 0.0);
        assert!(b.f_max.is_none());
    }
}
