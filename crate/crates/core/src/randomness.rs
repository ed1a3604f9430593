//! Weak randomness sources and seeded adversarial generators.
//!
//! Every stochastic operation takes an explicit 64-bit seed and is
//! reproducible bit-for-bit: the generator is ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, and draws happen in documented order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling;

/// The crate-wide deterministic generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An imperfect source emitting `output_len` bits with min-entropy
/// `min_entropy_bits`; its loss rate is L = (M - b) / M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakSourceSpec {
    pub output_len: u64,
    pub min_entropy_bits: f64,
}

impl WeakSourceSpec {
    pub fn new(output_len: u64, min_entropy_bits: f64) -> Result<Self> {
        if output_len == 0 {
            return Err(Error::InvalidParameter("M=0".into()));
        }
        if !(0.0..=output_len as f64).contains(&min_entropy_bits) {
            return Err(Error::InvalidParameter(format!(
                "min-entropy {min_entropy_bits} outside [0, M={output_len}]"
            )));
        }
        Ok(Self {
            output_len,
            min_entropy_bits,
        })
    }

    pub fn loss_rate(&self) -> f64 {
        (self.output_len as f64 - self.min_entropy_bits) / self.output_len as f64
    }
}

/// The source families the simulator understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceKind {
    /// Perfect randomness.
    Uniform,
    /// Each bit equals the adversary's target with probability 1/2 + eps.
    /// Without targets the realized bits are biased toward 0.
    SanthaVazirani { epsilon: f64 },
    /// The test-sample choice is forced to contain these rounds.
    SampleFixing { forced: Vec<u64> },
    /// Independent draws from a fixed per-symbol distribution.
    BiasedIid { probabilities: Vec<f64> },
}

impl SourceKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceKind::Uniform | SourceKind::SampleFixing { .. } => Ok(()),
            SourceKind::SanthaVazirani { epsilon } => {
                if !(0.0..=0.5).contains(epsilon) {
                    return Err(Error::InvalidParameter(format!(
                        "epsilon={epsilon} outside [0, 1/2]"
                    )));
                }
                Ok(())
            }
            SourceKind::BiasedIid { probabilities } => {
                min_entropy(probabilities).map(|_| ())
            }
        }
    }

    /// Min-entropy loss rate this source exhibits in a protocol with `n`
    /// rounds and test fraction `f` (needed only for sample fixing).
    pub fn loss_rate(&self, n: u64, f: f64) -> Result<f64> {
        self.validate()?;
        match self {
            SourceKind::Uniform => Ok(0.0),
            SourceKind::SanthaVazirani { epsilon } => sv_loss_rate(*epsilon),
            SourceKind::SampleFixing { forced } => {
                if forced.is_empty() {
                    return Ok(0.0);
                }
                sampling::loss_exact(n, f, forced.len() as f64 / n as f64)
            }
            SourceKind::BiasedIid { probabilities } => {
                let h = min_entropy(probabilities)?;
                let m = (probabilities.len() as f64).log2();
                Ok((1.0 - h / m).clamp(0.0, 1.0))
            }
        }
    }
}

/// Min-entropy loss rate of a Santha-Vazirani source:
/// L = 1 + log2(1/2 + eps).
///
/// As printed the conversion carries a minus sign inside the logarithm,
/// which would make L negative for eps > 0; the sign used here satisfies
/// the boundary conditions L(0) = 0 and L(1/2) = 1.
pub fn sv_loss_rate(epsilon: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon={epsilon} outside [0, 1/2]"
        )));
    }
    Ok(1.0 + (0.5 + epsilon).log2())
}

/// Min-entropy of a distribution: -log2(max probability).
pub fn min_entropy(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for &p in probabilities {
        if p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "negative probability {p}"
            )));
        }
        sum += p;
        max = max.max(p);
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {sum}, not 1"
        )));
    }
    Ok(-max.log2())
}

/// Uniformly choose a floor(fN)-subset of {0,..,N-1} that contains every
/// forced round. Returned sorted.
///
/// The choice has min-entropy log2 C(N - |forced|, fN - |forced|), so its
/// loss rate equals `sampling::loss_exact(N, f, |forced|/N)`.
pub fn sample_fixing_chooser(n: u64, f: f64, forced: &[u64], seed: u64) -> Result<Vec<u64>> {
    let mut rng = seeded_rng(seed);
    sample_fixing_with_rng(n, f, forced, &mut rng)
}

/// Same as [`sample_fixing_chooser`] but drawing from a caller-owned
/// generator, for embedding into a longer deterministic stream.
pub fn sample_fixing_with_rng<R: Rng>(
    n: u64,
    f: f64,
    forced: &[u64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("f={f} outside [0,1]")));
    }
    let t = (f * n as f64).floor() as u64;
    let mut forced_sorted: Vec<u64> = forced.to_vec();
    forced_sorted.sort_unstable();
    forced_sorted.dedup();
    if forced_sorted.len() != forced.len() {
        return Err(Error::InvalidParameter(
            "forced rounds contain duplicates".into(),
        ));
    }
    if let Some(&last) = forced_sorted.last() {
        if last >= n {
            return Err(Error::InvalidParameter(format!(
                "forced round {last} >= N={n}"
            )));
        }
    }
    let nf = forced_sorted.len() as u64;
    if nf > t || t > n {
        return Err(Error::InfeasibleCardinality(format!(
            "|forced|={nf} <= fN={t} <= N={n} violated"
        )));
    }
    // Floyd's algorithm over the complement of the forced set.
    let free = n - nf;
    let draw = t - nf;
    let mut picked: std::collections::HashSet<u64> =
        std::collections::HashSet::with_capacity(draw as usize);
    for j in free - draw..free {
        let x = rng.gen_range(0..=j);
        if !picked.insert(x) {
            picked.insert(j);
        }
    }
    // map complement ranks back to round indices, skipping forced rounds
    let mut out: Vec<u64> = Vec::with_capacity(t as usize);
    out.extend_from_slice(&forced_sorted);
    for rank in picked {
        out.push(unrank_skipping(rank, &forced_sorted));
    }
    out.sort_unstable();
    Ok(out)
}

/// Index of the `rank`-th element of {0..} \ `skip` (skip sorted).
fn unrank_skipping(rank: u64, skip: &[u64]) -> u64 {
    let mut idx = rank;
    for &s in skip {
        if s <= idx {
            idx += 1;
        } else {
            break;
        }
    }
    idx
}

/// Santha-Vazirani bit stream: bit i equals `targets[i]` with probability
/// 1/2 + eps, independently. Without targets the bits are fair.
pub fn sv_bitstream(
    epsilon: f64,
    targets: Option<&[bool]>,
    count: usize,
    seed: u64,
) -> Result<Vec<bool>> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon={epsilon} outside [0, 1/2]"
        )));
    }
    if let Some(t) = targets {
        if t.len() < count {
            return Err(Error::InvalidParameter(format!(
                "{} targets for {count} bits",
                t.len()
            )));
        }
    }
    let mut rng = seeded_rng(seed);
    let p = 0.5 + epsilon;
    Ok((0..count)
        .map(|i| match targets {
            Some(t) => {
                if rng.gen_bool(p) {
                    t[i]
                } else {
                    !t[i]
                }
            }
            None => rng.gen_bool(0.5),
        })
        .collect())
}
