//! Named inputs shared by the benchmarks.

use destack_core::corpus;
use destack_core::grouprep::{examples, MonomialGroup};
use destack_core::StackyFan;
use std::sync::Arc;

/// Fans of increasing difficulty for the pipeline benchmarks.
pub fn pipeline_inputs() -> Vec<(&'static str, StackyFan)> {
    vec![
        ("A1", corpus::cyclic_cone(2, 1)),
        ("1/12(1,5)", corpus::cyclic_cone(12, 5)),
        ("P(2,3,5)", corpus::weighted_projective(&[2, 3, 5])),
        ("random-7", corpus::random_fan(7, corpus::RANDOM_MAX_ORDER)),
    ]
}

pub fn group_inputs() -> Vec<(&'static str, Arc<MonomialGroup>)> {
    examples::non_abelian()
}
