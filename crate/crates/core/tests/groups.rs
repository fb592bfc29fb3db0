use destack_core::grouprep::{
    abelianize_iterated, abelianize_local_step, decompose_dim_one, examples, fo_degree, gamma_bar, poly_dim, Block, GroupError, LineCount,
    StratumKind,
};

#[test]
fn ord_na_of_bundled_representations() {
    let expected = [("S3 standard", 2), ("S3 sign+standard", 2), ("D4", 2), ("Q8", 2), ("A4", 3)];
    for ((name, g), (want_name, want)) in examples::non_abelian().into_iter().zip(expected) {
        assert_eq!(name, want_name);
        let chi = g.character(&Block::all(g.degree())).unwrap();
        assert_eq!(decompose_dim_one(&g.whole(), &chi).ord_na, want, "{name}");
    }
}

#[test]
fn sign_plus_standard_gamma_bar_is_a3() {
    let g = examples::s3_sign_standard();
    let chi = g.character(&Block::all(3)).unwrap();
    assert_eq!(gamma_bar(&g.whole(), &chi).order(), 3);
}

#[test]
fn s3_step_strata() {
    let g = examples::s3_standard();
    let chi = g.character(&Block::all(2)).unwrap();
    let step = abelianize_local_step(&g.whole(), &chi).unwrap();
    assert_eq!(step.max_ord_na(), 0);
    let mut exceptional: Vec<(usize, LineCount)> =
        step.strata.iter().filter(|s| s.kind == StratumKind::Exceptional).map(|s| (s.stabilizer.order(), s.lines)).collect();
    exceptional.sort_by_key(|(k, _)| *k);
    assert_eq!(
        exceptional,
        vec![(1, LineCount::Family(1)), (2, LineCount::Finite(3)), (2, LineCount::Finite(3)), (3, LineCount::Finite(2))]
    );
}

#[test]
fn iteration_terminates_for_every_example() {
    for (name, g) in examples::non_abelian() {
        let chi = g.character(&Block::all(g.degree())).unwrap();
        let levels = abelianize_iterated(&g.whole(), &chi, 16).unwrap();
        let last = levels.last().unwrap();
        assert_eq!(last.iter().map(|s| s.max_ord_na()).max(), Some(0), "{name}");
    }
}

#[test]
fn abelian_operations() {
    let g = examples::cyclic_diagonal(3, &[1, 1]);
    let (v, w) = (Block { start: 0, len: 1 }, Block { start: 1, len: 1 });
    // e ≡ 1 mod 3 with e ≤ 7: 1, 4, 7
    assert_eq!(poly_dim(&g, &v, &w, 7).unwrap(), 3);
    assert_eq!(fo_degree(&g, &v, &w).unwrap(), 1);
    let s3 = examples::s3_standard();
    assert_eq!(poly_dim(&s3, &Block::all(2), &Block::all(2), 1).unwrap_err(), GroupError::NonAbelian);
}
