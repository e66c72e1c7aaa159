mod support;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use s1graph::graph_model::{Chain, Edge, Extreme};
use s1graph::morphisms::counterexample_pair;
use s1graph::rational::{q, qi};
use s1graph::reconstruct::{algebraic_input, recover_decorated, recover_dull, xi_invariant, AlgebraicInput, Tau};
use s1graph::surgery::{blowup, minimal_cp2, BlowupSite, End};
use s1graph::{Error, ExtendedGraph};

fn graphs() -> &'static [ExtendedGraph] {
    static G: OnceLock<Vec<ExtendedGraph>> = OnceLock::new();
    G.get_or_init(|| support::corpus(5))
}

fn cp2_211() -> ExtendedGraph {
    ExtendedGraph {
        genus: 0,
        min: Extreme::Isolated { height: qi(0) },
        max: Extreme::Isolated { height: qi(2) },
        chains: vec![
            Chain::new(vec![Edge::new(2, qi(2))]),
            Chain::new(vec![Edge::new(1, qi(1)), Edge::new(1, qi(1))]),
        ],
    }
}

fn all_ids(inp: &AlgebraicInput) -> Vec<String> {
    let mut ids = inp.generators.clone();
    for t in [&inp.tau_min, &inp.tau_max] {
        if let Tau::Class(c) = t {
            ids.push(c.clone());
        }
    }
    ids
}

#[test]
fn cp2_211_dull_graph_comes_back() {
    let g = cp2_211();
    let inp = algebraic_input(&g, false).unwrap();
    assert_eq!(inp.tau_min, Tau::Product("x1_1".into(), "x2_1".into()));
    assert_eq!(recover_dull(&inp).unwrap(), g.dull());
}

#[test]
fn no_fixed_surface_is_out_of_scope() {
    let inp = algebraic_input(&cp2_211(), true).unwrap();
    assert!(matches!(recover_decorated(&inp), Err(Error::Constraint(_))));
}

#[test]
fn fat_max_graph_comes_back_exactly() {
    let base = minimal_cp2(1, 1, &qi(3)).unwrap();
    let (g, _) = blowup(&base, BlowupSite::IsolatedExtreme(End::Min), &q(1, 2)).unwrap();
    let inp = algebraic_input(&g, true).unwrap();
    assert_eq!(recover_decorated(&inp).unwrap(), g.normalized().0);
}

#[test]
fn missing_omega_pairing() {
    let (m, _) = counterexample_pair();
    let mut inp = algebraic_input(&m, true).unwrap();
    let first = inp.generators[0].clone();
    inp.omega.as_mut().unwrap().remove(&first);
    assert!(matches!(recover_decorated(&inp), Err(Error::Missing(_))));
    inp.omega = None;
    assert!(matches!(recover_decorated(&inp), Err(Error::Missing(_))));
}

#[test]
fn counterexample_images_differ() {
    let (m, n) = counterexample_pair();
    let (a, b) = (algebraic_input(&m, true).unwrap(), algebraic_input(&n, true).unwrap());
    assert_eq!(recover_dull(&a).unwrap(), recover_dull(&b).unwrap());
    assert_ne!(xi_invariant(&a), xi_invariant(&b));
    assert_eq!(recover_decorated(&a).unwrap(), m.normalized().0);
    assert_eq!(recover_decorated(&b).unwrap(), n.normalized().0);
}

#[test]
fn duplicate_ids_rejected() {
    let mut inp = algebraic_input(&cp2_211(), false).unwrap();
    let x = inp.generators[0].clone();
    inp.generators.push(x);
    assert!(matches!(recover_dull(&inp), Err(Error::Inconsistent(_))));
}

#[test]
fn json_round_trip() {
    for g in graphs().iter().step_by(7) {
        let inp = algebraic_input(g, true).unwrap();
        let back = AlgebraicInput::from_json(&inp.to_json()).unwrap();
        assert_eq!(back, inp);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recovery_ignores_names(i in 0..graphs().len(), seed in any::<u64>()) {
        let g = &graphs()[i];
        let inp = algebraic_input(g, true).unwrap();
        let ids = all_ids(&inp);
        // a bijection onto fresh names, scrambled by the seed
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by_key(|&k| (k as u64 + 1).wrapping_mul(seed | 1).rotate_left(17));
        let names: BTreeMap<String, String> =
            ids.iter().zip(&order).map(|(a, &k)| (a.clone(), format!("c{k}"))).collect();
        let mut renamed = inp.relabel(&names);
        let n = renamed.generators.len();
        renamed.generators.rotate_left((seed as usize) % n.max(1));
        prop_assert_eq!(recover_dull(&renamed).unwrap(), g.dull());
        prop_assert_eq!(xi_invariant(&renamed), xi_invariant(&inp));
        if g.fat_count() > 0 {
            prop_assert_eq!(recover_decorated(&renamed).unwrap(), g.normalized().0);
        }
    }

    #[test]
    fn tampering_never_recovers_the_original(i in 0..graphs().len(), k in any::<prop::sample::Index>(), up in any::<bool>()) {
        let g = &graphs()[i];
        let mut inp = algebraic_input(g, false).unwrap();
        let keys: Vec<(String, String)> = inp.pairing.keys().cloned().collect();
        let (a, b) = &keys[k.index(keys.len())];
        let v = inp.pair(a, b);
        inp.set_pair(a, b, if up { v + 1 } else { v - 1 });
        match recover_dull(&inp) {
            Err(Error::Inconsistent(_)) => {}
            Ok(d) => prop_assert_ne!(d, g.dull()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
