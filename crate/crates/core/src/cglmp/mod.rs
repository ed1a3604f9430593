//! Outcome behaviors and the normalized CGLMP functional.
//!
//! The functional averages four win probabilities over the setting pairs
//! (a, b) with win conditions A<=B, B<=A, A<=B, B<A for (0,0), (0,1),
//! (1,1), (1,0); uniform inputs give the classical bound 3/4.

mod behavior;
mod quantum;

pub use behavior::{
    evaluate_cglmp, local_bound_enumeration, no_signaling_check, term_wins, Behavior,
    InputDistribution,
};
pub use quantum::{
    honest_behavior_with_key, honest_quantum_behavior, matched_d2_anchor,
    optimize_quantum_value, PhaseSet, QuantumOptimum, D2_ANCHOR_APPENDIX, D2_ANCHOR_FIGURE,
};
