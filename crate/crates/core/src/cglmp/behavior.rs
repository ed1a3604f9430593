//! Behavior tables, input distributions, the functional, and the
//! deterministic-strategy enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const NS_TOL: f64 = 1e-9;

/// Conditional outcome table P(A, B | a, b) for two parties, a in {0,1},
/// b in {0,1} plus an optional third Bob setting (b=2) used as the key
/// basis by the simulator. Outcomes range over 0..d per side.
///
/// Serialized as `{"d": .., "settings": [2, nb], "table": [..]}` with the
/// table row-major in (a, b, A, B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBehavior", into = "RawBehavior")]
pub struct Behavior {
    d: usize,
    bob_settings: usize,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBehavior {
    d: usize,
    settings: [usize; 2],
    table: Vec<f64>,
}

impl TryFrom<RawBehavior> for Behavior {
    type Error = Error;
    fn try_from(raw: RawBehavior) -> Result<Self> {
        if raw.settings[0] != 2 {
            return Err(Error::DimensionMismatch(format!(
                "alice settings must be 2, got {}",
                raw.settings[0]
            )));
        }
        Behavior::new(raw.d, raw.settings[1], raw.table)
    }
}

impl From<Behavior> for RawBehavior {
    fn from(b: Behavior) -> Self {
        RawBehavior {
            d: b.d,
            settings: [2, b.bob_settings],
            table: b.table,
        }
    }
}

impl Behavior {
    /// Validate and wrap a dense table, row-major in (a, b, A, B).
    pub fn new(d: usize, bob_settings: usize, table: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionMismatch(format!("d={d} < 2")));
        }
        if !(bob_settings == 2 || bob_settings == 3) {
            return Err(Error::DimensionMismatch(format!(
                "bob settings must be 2 or 3, got {bob_settings}"
            )));
        }
        let expect = 2 * bob_settings * d * d;
        if table.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "table length {} != {expect}",
                table.len()
            )));
        }
        let b = Behavior {
            d,
            bob_settings,
            table,
        };
        for a in 0..2 {
            for s in 0..bob_settings {
                let mut sum = 0.0;
                for &p in b.conditional(a, s) {
                    if p < 0.0 {
                        return Err(Error::InvalidDistribution(format!(
                            "negative entry {p} at (a={a}, b={s})"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "P(.|a={a}, b={s}) sums to {sum}"
                    )));
                }
            }
        }
        Ok(b)
    }

    /// Independent uniformly random outcomes on both sides.
    pub fn independent_uniform(d: usize, bob_settings: usize) -> Self {
        let p = 1.0 / (d * d) as f64;
        Behavior::new(d, bob_settings, vec![p; 2 * bob_settings * d * d])
            .expect("uniform table is valid")
    }

    /// Deterministic outputs: Alice answers `alice_out[a]`, Bob
    /// `bob_out[b]`, regardless of the other side.
    pub fn deterministic(d: usize, alice_out: [usize; 2], bob_out: &[usize]) -> Result<Self> {
        let nb = bob_out.len();
        if nb != 2 && nb != 3 {
            return Err(Error::DimensionMismatch(format!("bob settings {nb}")));
        }
        if alice_out.iter().any(|&x| x >= d) || bob_out.iter().any(|&y| y >= d) {
            return Err(Error::DimensionMismatch("output >= d".into()));
        }
        let mut table = vec![0.0; 2 * nb * d * d];
        for a in 0..2 {
            for b in 0..nb {
                let idx = ((a * nb + b) * d + alice_out[a]) * d + bob_out[b];
                table[idx] = 1.0;
            }
        }
        Behavior::new(d, nb, table)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bob_settings(&self) -> usize {
        self.bob_settings
    }

    /// P(A=x, B=y | a, b).
    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[((a * self.bob_settings + b) * self.d + x) * self.d + y]
    }

    /// The d*d slice P(.,.|a,b), row-major in (A, B).
    pub fn conditional(&self, a: usize, b: usize) -> &[f64] {
        let start = (a * self.bob_settings + b) * self.d * self.d;
        &self.table[start..start + self.d * self.d]
    }

    /// Alice's marginal P(A=x | a, b).
    fn alice_marginal(&self, a: usize, b: usize, x: usize) -> f64 {
        (0..self.d).map(|y| self.prob(a, b, x, y)).sum()
    }

    /// Bob's marginal P(B=y | a, b).
    fn bob_marginal(&self, a: usize, b: usize, y: usize) -> f64 {
        (0..self.d).map(|x| self.prob(a, b, x, y)).sum()
    }
}

/// Per-round setting probabilities p_ij (Alice i, Bob j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDistribution {
    p: [[f64; 2]; 2],
}

impl InputDistribution {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let mut sum = 0.0;
        for row in &p {
            for &v in row {
                if v < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "negative setting probability {v}"
                    )));
                }
                sum += v;
            }
        }
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "setting probabilities sum to {sum}"
            )));
        }
        Ok(InputDistribution { p })
    }

    pub fn uniform() -> Self {
        InputDistribution {
            p: [[0.25; 2]; 2],
        }
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.p[a][b]
    }

    /// r = min p_ij; the biased local bound is 1 - r.
    pub fn r(&self) -> f64 {
        self.p
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Settings min-entropy -log2(max p_ij), in [0, 2].
    pub fn h_min(&self) -> f64 {
        let max = self.p.iter().flatten().copied().fold(0.0, f64::max);
        -max.log2()
    }
}

/// Win condition of the setting pair (a, b) on outcomes (x, y):
/// (0,0) A<=B, (0,1) B<=A, (1,1) A<=B, (1,0) B<A.
pub fn term_wins(a: usize, b: usize, x: usize, y: usize) -> bool {
    match (a, b) {
        (0, 0) => x <= y,
        (0, 1) => y <= x,
        (1, 1) => x <= y,
        (1, 0) => y < x,
        _ => unreachable!("settings beyond the CGLMP pairs"),
    }
}

/// The normalized CGLMP functional with biased inputs:
/// sum over setting pairs of p_ij times that pair's win probability.
pub fn evaluate_cglmp(behavior: &Behavior, inputs: &InputDistribution) -> Result<f64> {
    let d = behavior.d();
    let mut total = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let mut win = 0.0;
            for x in 0..d {
                for y in 0..d {
                    if term_wins(a, b, x, y) {
                        win += behavior.prob(a, b, x, y);
                    }
                }
            }
            total += inputs.weight(a, b) * win;
        }
    }
    Ok(total)
}

/// Exhaustive maximum of the functional over the d^4 deterministic
/// strategies; ties resolve to the lowest strategy index. Equals
/// 1 - min p_ij.
///
/// Returns the value and the achieving outputs (A|a=0, A|a=1, B|b=0,
/// B|b=1).
pub fn local_bound_enumeration(
    d: usize,
    inputs: &InputDistribution,
) -> Result<(f64, [usize; 4])> {
    if !(2..=8).contains(&d) {
        return Err(Error::EnumerationRange(d));
    }
    let mut best = -1.0;
    let mut arg = [0usize; 4];
    for a0 in 0..d {
        for a1 in 0..d {
            for b0 in 0..d {
                for b1 in 0..d {
                    let mut v = 0.0;
                    if a0 <= b0 {
                        v += inputs.weight(0, 0);
                    }
                    if b1 <= a0 {
                        v += inputs.weight(0, 1);
                    }
                    if a1 <= b1 {
                        v += inputs.weight(1, 1);
                    }
                    if b0 < a1 {
                        v += inputs.weight(1, 0);
                    }
                    if v > best {
                        best = v;
                        arg = [a0, a1, b0, b1];
                    }
                }
            }
        }
    }
    Ok((best, arg))
}

/// True iff each party's marginal is independent of the other's setting
/// within 1e-9, across every setting column the behavior carries.
pub fn no_signaling_check(behavior: &Behavior) -> bool {
    let d = behavior.d();
    let nb = behavior.bob_settings();
    for a in 0..2 {
        for x in 0..d {
            let reference = behavior.alice_marginal(a, 0, x);
            for b in 1..nb {
                if (behavior.alice_marginal(a, b, x) - reference).abs() > NS_TOL {
                    return false;
                }
            }
        }
    }
    for b in 0..nb {
        for y in 0..d {
            let reference = behavior.bob_marginal(0, b, y);
            if (behavior.bob_marginal(1, b, y) - reference).abs() > NS_TOL {
                return false;
            }
        }
    }
    true
}
