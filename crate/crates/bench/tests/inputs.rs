use destack_bench::{group_inputs, pipeline_inputs};
use destack_core::destackify::{destackify_all, Config};
use destack_core::grouprep::{decompose_dim_one, Block};
use destack_core::stackyfan::validate;

#[test]
fn pipeline_inputs_are_valid_and_resolve() {
    for (name, f) in pipeline_inputs() {
        assert!(validate(&f, false).is_valid(), "{name}");
        let out = destackify_all(&f, Config::default()).unwrap();
        assert!(out.fan.cones().iter().all(|c| out.fan.is_coarse_smooth(c)), "{name}");
    }
}

#[test]
fn group_inputs_are_non_abelian() {
    for (name, g) in group_inputs() {
        assert!(!g.is_abelian(), "{name}");
        let chi = g.character(&Block::all(g.degree())).unwrap();
        assert!(decompose_dim_one(&g.whole(), &chi).ord_na >= 2, "{name}");
    }
}
