//! Security calculus and protocol simulation for device-independent quantum
//! key distribution (DIQKD) with weak randomness sources.
//!
//! The crate has five parts:
//!
//! * [`cglmp`] — outcome behaviors, the normalized CGLMP functional with
//!   biased inputs, deterministic-strategy enumeration, and quantum values
//!   for maximally entangled d-level states measured in phase-shifted
//!   Fourier bases.
//! * [`randomness`] — weak-source models (min-entropy loss rate,
//!   Santha-Vazirani, sample-fixing, biased i.i.d.) and seeded generators.
//! * [`bounds`] — closed-form security bounds: the product-state bound
//!   R(L), critical thresholds, Eve's min-entropy and guessing-probability
//!   bounds, the key-rate bound, and the (advisory) EC/PA conjecture check.
//! * [`sampling`] — test-sample combinatorics: exact and asymptotic
//!   min-entropy loss of sample-fixing attacks and solvers for the
//!   admissible test fraction and required violation.
//! * [`attack`] — seeded Monte Carlo simulation of the protocol under
//!   honest and adversarial conditions.
//!
//! All stochastic operations take an explicit 64-bit seed and are
//! reproducible bit-for-bit for a fixed seed (generator: ChaCha8).

pub mod attack;
pub mod bounds;
pub mod cglmp;
pub mod error;
pub mod randomness;
pub mod sampling;

pub use error::{Error, Result};
