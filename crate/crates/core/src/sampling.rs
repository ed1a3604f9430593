//! Test-sample combinatorics.
//!
//! Exact and asymptotic min-entropy loss of sample-fixing attacks, the
//! attack-fraction requirement, and solvers for the admissible test
//! fraction and the required violation.
//!
//! Log-binomials are evaluated through ln-factorials (tabulated for small
//! arguments, Stirling series above), so N up to 1e9 and beyond stays
//! overflow-free. Non-integer fN/kN round to nearest; the asymptotic
//! formula is the canonical quantity.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::bounds::product_state_bound;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_4;
const FACT_TABLE_LEN: usize = 1024;

fn ln_factorial_table() -> &'static [f64; FACT_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; FACT_TABLE_LEN];
        for n in 2..FACT_TABLE_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!) — exact accumulation below 1024, Stirling series above
/// (relative error < 1e-15 there).
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < FACT_TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (LN_2PI + x.ln())
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// ln C(n, k). Out-of-range k yields negative infinity.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Shannon binary entropy h(x) in bits, with 0 log 0 = 0.
pub fn binary_entropy(x: f64) -> f64 {
    xlg(x) + xlg(1.0 - x)
}

fn xlg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Exact min-entropy loss rate of forcing an fN-sample to contain kN
/// predetermined rounds:
/// [log C(N, fN) - log C((1-k)N, (1-f)N)] / log C(N, fN).
pub fn loss_exact(n: u64, f: f64, k: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N=0".into()));
    }
    if !(0.0..1.0).contains(&f) || !(0.0..=f).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= k <= f < 1, got k={k}, f={f}"
        )));
    }
    let fn_ = (f * n as f64).round() as u64;
    let kn = (k * n as f64).round() as u64;
    if fn_ == 0 {
        return Err(Error::InfeasibleCardinality(format!(
            "fN rounds to 0 (N={n}, f={f})"
        )));
    }
    if kn > fn_ {
        return Err(Error::InfeasibleCardinality(format!(
            "kN={kn} exceeds fN={fn_} after rounding"
        )));
    }
    let denom = ln_choose(n, fn_);
    let num = denom - ln_choose(n - kn, n - fn_);
    Ok(num / denom)
}

/// Large-N limit of [`loss_exact`]:
/// [-f log f - (1-k) log(1-k) + (f-k) log(f-k)] / h(f).
pub fn loss_asymptotic(k: f64, f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidParameter(format!("f={f} outside (0,1)")));
    }
    if !(0.0..=f).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "k={k} outside [0, f={f}]"
        )));
    }
    Ok((xlg(f) + xlg(1.0 - k) - xlg(f - k)) / binary_entropy(f))
}

/// Minimal fraction k/f of the test sample Eve must control to fake an
/// observed violation `r_obs`: (R_obs - R(L)) / (R_Q - R(L)), clamped to
/// [0, 1]. `r_q` defaults to the algebraic bound 1 at call sites.
pub fn required_k_ratio(r_obs: f64, l: f64, r_q: f64) -> Result<f64> {
    if !(r_obs <= r_q && r_q <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need R_obs <= R_Q <= 1, got R_obs={r_obs}, R_Q={r_q}"
        )));
    }
    let r_l = product_state_bound(l)?;
    if r_q - r_l <= 1e-12 {
        return Err(Error::DegenerateDenominator(format!(
            "R_Q={r_q} does not exceed R(L)={r_l}"
        )));
    }
    Ok(((r_obs - r_l) / (r_q - r_l)).clamp(0.0, 1.0))
}

/// Result of solving for the admissible test fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionBound {
    /// Largest f such that Eve's sample-fixing attack needs more loss
    /// than available. 1.0 means every fraction is admissible.
    UpTo(f64),
    /// No fraction is safe at this parameter point.
    NoSecureFraction,
}

const BISECT_TOL: f64 = 1e-6;
const F_EDGE: f64 = 1e-9;

/// Largest test fraction f with loss_asymptotic(k_ratio * f, f) >= L.
///
/// Below the returned fraction Eve's attack requires more min-entropy
/// loss than the sources provide; above it the attack fits the budget
/// (choosing f too large makes Eve's task easier).
pub fn solve_secure_fraction(l: f64, r_obs: f64, r_q: f64) -> Result<FractionBound> {
    if !(0.0..1.0).contains(&l) {
        return Err(Error::InvalidParameter(format!("L={l} outside [0,1)")));
    }
    let r_l = product_state_bound(l)?;
    if r_obs <= r_l {
        return Ok(FractionBound::NoSecureFraction);
    }
    let kr = required_k_ratio(r_obs, l, r_q)?;
    let g = |f: f64| loss_asymptotic(kr * f, f).expect("f in (0,1)") - l;
    if g(1.0 - F_EDGE) >= 0.0 {
        return Ok(FractionBound::UpTo(1.0));
    }
    if g(F_EDGE) < 0.0 {
        // even vanishing fractions fit Eve's budget
        return Ok(FractionBound::NoSecureFraction);
    }
    // the crossing must be unique: scan before bisecting
    let mut crossings = 0;
    let mut prev = g(F_EDGE);
    for i in 1..=128 {
        let f = F_EDGE + (1.0 - 2.0 * F_EDGE) * i as f64 / 128.0;
        let cur = g(f);
        if prev >= 0.0 && cur < 0.0 || prev < 0.0 && cur >= 0.0 {
            crossings += 1;
        }
        prev = cur;
    }
    if crossings > 1 {
        return Err(Error::MultipleCrossings(format!(
            "{crossings} sign changes of the loss budget on (0,1)"
        )));
    }
    let (mut lo, mut hi) = (F_EDGE, 1.0 - F_EDGE);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FractionBound::UpTo(0.5 * (lo + hi)))
}

/// Smallest observed violation making the fraction `f` admissible at loss
/// rate `l`; inverse of [`solve_secure_fraction`] in R_obs.
pub fn required_violation(l: f64, f: f64, r_q: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidParameter(format!("f={f} outside (0,1)")));
    }
    let crit = crate::bounds::critical_loss_rate(r_q)?;
    if !(l > 0.0 && l < crit) {
        return Err(Error::InvalidParameter(format!(
            "L={l} outside (0, critical {crit})"
        )));
    }
    let r_l = product_state_bound(l)?;
    let g = |r: f64| match required_k_ratio(r, l, r_q) {
        Ok(kr) => loss_asymptotic(kr * f, f).expect("f in (0,1)") - l,
        Err(_) => -1.0,
    };
    let (mut lo, mut hi) = (r_l + 1e-12, r_q);
    if g(hi) < 0.0 {
        return Err(Error::NoSolution(format!(
            "no violation below R_Q={r_q} admits f={f} at L={l}"
        )));
    }
    // g is nondecreasing in R_obs: more violation demands more control
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finite-N evaluation of the sublinear-sample loss ratio
/// [log C(N, t) - log C(kN, t)] / log C(N, t) with t = N^(1-alpha);
/// tends to 0 as N grows, which is why sublinear samples are hopeless.
pub fn sublinear_loss(n: u64, alpha: f64, k: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha={alpha} outside (0,1)"
        )));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::InvalidParameter(format!("k={k} outside (0,1]")));
    }
    let t = (n as f64).powf(1.0 - alpha).round() as u64;
    let kn = (k * n as f64).round() as u64;
    if t == 0 || kn < t {
        return Err(Error::InfeasibleCardinality(format!(
            "need kN >= N^(1-alpha), got kN={kn}, sample={t}"
        )));
    }
    let denom = ln_choose(n, t);
    Ok((denom - ln_choose(kn, t)) / denom)
}

/// Smallest round count n with sqrt(R(1-R)/n) <= target_sigma, the
/// Bernoulli standard-error model for the violation estimate.
pub fn min_sample_for_precision(target_sigma: f64, r: f64) -> Result<u64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("R={r} outside (0,1)")));
    }
    if target_sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target_sigma={target_sigma} <= 0"
        )));
    }
    let x = r * (1.0 - r) / (target_sigma * target_sigma);
    Ok(((x - 1e-9).ceil() as u64).max(1))
}

/// A test-sampling plan: N rounds, tested fraction f, Eve's controlled
/// fraction k, optional sublinearity exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub rounds: u64,
    pub test_fraction: f64,
    pub controlled_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("N=0".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "f={} outside (0,1)",
                self.test_fraction
            )));
        }
        if !(0.0..=self.test_fraction).contains(&self.controlled_fraction) {
            return Err(Error::InvalidParameter(format!(
                "k={} outside [0, f]",
                self.controlled_fraction
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "alpha={a} outside (0,1)"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_direct_product() {
        // independent oracle: direct product in f64
        for n in [0u64, 1, 2, 5, 20, 170] {
            let direct: f64 = (1..=n).map(|i| i as f64).product::<f64>().ln();
            assert!((ln_factorial(n) - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
        // Stirling branch continuity at the table edge
        let below = ln_factorial(1023);
        let above = ln_factorial(1024);
        assert!((above - below - (1024f64).ln()).abs() < 1e-9);
        // no overflow at a billion
        assert!(ln_factorial(1_000_000_000).is_finite());
    }

    #[test]
    fn loss_exact_endpoints() {
        // k=0: numerator vanishes
        assert_eq!(loss_exact(1000, 0.2, 0.0).unwrap(), 0.0);
        // k=f: sample fully determined
        assert!((loss_exact(1000, 0.2, 0.2).unwrap() - 1.0).abs() < 1e-12);
        // frozen log-gamma evaluations
        assert!((loss_exact(100, 0.2, 0.1).unwrap() - 0.3845650098952869).abs() < 1e-10);
        assert!((loss_exact(1000, 0.2, 0.1).unwrap() - 0.37460861626158315).abs() < 1e-10);
    }

    #[test]
    fn loss_exact_converges_to_asymptotic() {
        let a = loss_asymptotic(0.1, 0.2).unwrap();
        assert!((loss_exact(1000, 0.2, 0.1).unwrap() - a).abs() < 2e-2);
        assert!((loss_exact(1_000_000, 0.2, 0.1).unwrap() - a).abs() < 1e-4);
    }

    #[test]
    fn loss_asymptotic_endpoints() {
        for f in [0.1, 0.25, 0.5, 0.723026, 0.9] {
            assert_eq!(loss_asymptotic(0.0, f).unwrap(), 0.0);
            assert!((loss_asymptotic(f, f).unwrap() - 1.0).abs() < 1e-12);
        }
        // Fig. 2 solution point, hand-evaluated
        let v = loss_asymptotic(0.052864, 0.723026).unwrap();
        assert!((v - 0.0300).abs() < 2e-4);
        assert!(loss_asymptotic(0.0, 0.0).is_err());
        assert!(loss_asymptotic(0.0, 1.0).is_err());
    }

    #[test]
    fn loss_asymptotic_increasing_in_k() {
        for &f in &[0.2, 0.5, 0.8] {
            let mut prev = 0.0;
            for i in 1..=50 {
                let k = f * i as f64 / 50.0;
                let v = loss_asymptotic(k, f).unwrap();
                assert!(v > prev, "not increasing at k={k}, f={f}");
                prev = v;
            }
        }
    }

    #[test]
    fn required_k_ratio_examples() {
        let r_l = product_state_bound(0.03).unwrap();
        assert_eq!(required_k_ratio(r_l, 0.03, 1.0).unwrap(), 0.0);
        assert_eq!(required_k_ratio(1.0, 0.03, 1.0).unwrap(), 1.0);
        let k = required_k_ratio(0.801777, 0.03, 1.0).unwrap();
        assert!((k - 0.073115).abs() < 1e-5);
        // degenerate denominator: R_Q at R(L)
        assert!(required_k_ratio(0.7861, 0.03, r_l).is_err());
    }

    #[test]
    fn secure_fraction_fig2_point() {
        let f = match solve_secure_fraction(0.03, 0.801777, 1.0).unwrap() {
            FractionBound::UpTo(f) => f,
            other => panic!("unexpected {other:?}"),
        };
        assert!((f - 0.723026).abs() < 2e-3, "f_max = {f}");
    }

    #[test]
    fn secure_fraction_edge_cases() {
        // no loss: the attack always needs more entropy than available
        assert_eq!(
            solve_secure_fraction(0.0, 0.76, 1.0).unwrap(),
            FractionBound::UpTo(1.0)
        );
        // no violation above R(L): nothing to certify
        assert_eq!(
            solve_secure_fraction(0.03, 0.78, 1.0).unwrap(),
            FractionBound::NoSecureFraction
        );
    }

    #[test]
    fn required_violation_examples() {
        let r = required_violation(0.03, 0.723026, 1.0).unwrap();
        assert!((r - 0.801777).abs() < 1e-3, "R_obs_min = {r}");
        let r5 = required_violation(0.03, 0.5, 1.0).unwrap();
        assert!(r5 > 0.786141 && r5 < 0.801777);
        assert!((r5 - 0.7986988).abs() < 1e-4);
    }

    #[test]
    fn solver_inverse_pair() {
        for &(l, f) in &[(0.03, 0.3), (0.03, 0.6), (0.01, 0.5), (0.08, 0.4)] {
            let r = required_violation(l, f, 1.0).unwrap();
            match solve_secure_fraction(l, r, 1.0).unwrap() {
                FractionBound::UpTo(f_back) => {
                    assert!((f_back - f).abs() < 1e-3, "L={l} f={f} -> {f_back}")
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn secure_fraction_crossing_sides() {
        // monotone crossing at the Fig. 2 parameter point
        let l = 0.03;
        let kr = required_k_ratio(0.801777, l, 1.0).unwrap();
        let f_max = match solve_secure_fraction(l, 0.801777, 1.0).unwrap() {
            FractionBound::UpTo(f) => f,
            other => panic!("unexpected {other:?}"),
        };
        for df in [0.01, 0.05, 0.2] {
            let below = loss_asymptotic(kr * (f_max - df), f_max - df).unwrap();
            let above = loss_asymptotic(kr * (f_max + df), f_max + df).unwrap();
            assert!(below > l, "secure side violated at f={}", f_max - df);
            assert!(above < l, "insecure side violated at f={}", f_max + df);
        }
    }

    #[test]
    fn sublinear_loss_examples() {
        // k=1: numerator vanishes
        assert_eq!(sublinear_loss(1_000_000, 0.5, 1.0).unwrap(), 0.0);
        // frozen log-gamma evaluations; the ratio sinks toward 0 with N
        let v4 = sublinear_loss(10_000, 0.5, 0.01).unwrap();
        let v6 = sublinear_loss(1_000_000, 0.5, 0.01).unwrap();
        let v8 = sublinear_loss(100_000_000, 0.5, 0.01).unwrap();
        assert!((v4 - 1.0).abs() < 1e-12);
        assert!((v6 - 0.5891993299596668).abs() < 1e-9);
        assert!((v8 - 0.4515430713066284).abs() < 1e-9);
        assert!(v4 > v6 && v6 > v8);
        assert!(v6 > 0.0);
        // infeasible: kN below the sample size
        assert!(sublinear_loss(10_000, 0.5, 0.005).is_err());
    }

    #[test]
    fn min_sample_examples() {
        assert_eq!(min_sample_for_precision(0.05, 0.5).unwrap(), 100);
        assert_eq!(min_sample_for_precision(0.01, 0.8).unwrap(), 1600);
        assert_eq!(min_sample_for_precision(0.5, 0.5).unwrap(), 1);
        assert_eq!(min_sample_for_precision(0.7, 0.5).unwrap(), 1);
    }

    #[test]
    fn sample_plan_validation() {
        let ok = SamplePlan {
            rounds: 1000,
            test_fraction: 0.2,
            controlled_fraction: 0.1,
            alpha: Some(0.5),
        };
        assert!(ok.validate().is_ok());
        let bad = SamplePlan {
            controlled_fraction: 0.3,
            ..ok.clone()
        };
        assert!(bad.validate().is_err());
    }
}
