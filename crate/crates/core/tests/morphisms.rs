mod support;

use std::sync::OnceLock;

use proptest::prelude::*;
use s1graph::cohomology::{generators, pi_star_t, CohClass2, Gen, NormalForm};
use s1graph::localization::intersect;
use s1graph::morphisms::{
    counterexample_pair, diffeo_obstruction, dull_isomorphic, full_flip, is_flippable, minus_id, negated_weights,
    partial_flip, symplectic_flip, weak_isomorphisms, DiffeoVerdict, GeneratorMap, WeakIsoVerdict, Witness,
};
use s1graph::rational::qi;
use s1graph::surgery::minimal_cp2;
use s1graph::{Error, ExtendedGraph, Extreme};

fn graphs() -> &'static [ExtendedGraph] {
    static G: OnceLock<Vec<ExtendedGraph>> = OnceLock::new();
    G.get_or_init(|| support::corpus(5))
}

/// Whether f sends every generator x to `sign`·x (read in its target).
fn acts_as(f: &GeneratorMap, sign: i64) -> bool {
    let nf = NormalForm::new(&f.target).unwrap();
    generators(&f.source)
        .into_iter()
        .all(|x| nf.equal(&f.apply(&CohClass2::gen(x)).unwrap(), &CohClass2::term(x, sign)).unwrap())
}

fn scaled(g: &ExtendedGraph, k: i64) -> ExtendedGraph {
    let k = qi(k);
    let ext = |e: &Extreme| match e {
        Extreme::Isolated { height } => Extreme::Isolated { height: height * &k },
        Extreme::Fat { height, area } => Extreme::Fat { height: height * &k, area: area * &k },
    };
    let mut out = g.clone();
    out.min = ext(&g.min);
    out.max = ext(&g.max);
    for c in &mut out.chains {
        for e in &mut c.edges {
            e.len = &e.len * &k;
        }
    }
    out
}

#[test]
fn full_flip_twice_is_identity() {
    for g in graphs().iter().step_by(3) {
        let (r, f) = full_flip(g).unwrap();
        let (back, f2) = full_flip(&r).unwrap();
        assert_eq!(back, *g);
        let c = f.then(&f2).unwrap();
        assert_eq!(c.epsilon, 1);
        assert!(acts_as(&c, 1), "{g}");
    }
}

#[test]
fn symplectic_after_full_is_minus_id() {
    for g in graphs().iter().step_by(3) {
        let (r, f) = full_flip(g).unwrap();
        let (_, s) = symplectic_flip(&r).unwrap();
        let c = f.then(&s).unwrap();
        assert_eq!(c.epsilon, -1);
        assert!(acts_as(&c, -1), "{g}");
        assert!(minus_id(g).check().unwrap().ok());
    }
}

#[test]
fn cp2_211_full_flip_images() {
    let g = minimal_cp2(2, 1, &qi(1)).unwrap();
    let (r, f) = full_flip(&g).unwrap();
    assert_eq!(r.chains[1].labels(), vec![1, 1]);
    assert_eq!(f.map[&Gen::Sigma(2, 1)], CohClass2::gen(Gen::Sigma(2, 2)));
    assert_eq!(r.isotropy_weights(), negated_weights(&g.isotropy_weights()));
}

#[test]
fn flips_negate_weights_on_corpus() {
    for g in graphs() {
        let (r, _) = full_flip(g).unwrap();
        assert_eq!(r.isotropy_weights(), negated_weights(&g.isotropy_weights()), "{g}");
    }
}

#[test]
fn partial_flip_twice_is_identity() {
    let (m, n) = counterexample_pair();
    let labels = |g: &ExtendedGraph| g.chains.iter().map(|c| c.labels()).collect::<Vec<_>>();
    let (n2, f) = partial_flip(&m, 2).unwrap();
    assert!(n2.validate().is_ok());
    assert_eq!(labels(&n2), labels(&n));
    assert_eq!(n2.dull(), n.dull());
    assert_eq!(f.map[&Gen::Sigma(2, 2)], CohClass2::term(Gen::Sigma(2, 3), -1));
    let (m2, f2) = partial_flip(&n2, 2).unwrap();
    assert_eq!(labels(&m2), labels(&m));
    assert!(acts_as(&f.then(&f2).unwrap(), 1));
}

#[test]
fn flips_fix_pi_star() {
    let (m, _) = counterexample_pair();
    let (n, f) = partial_flip(&m, 2).unwrap();
    let nf = NormalForm::new(&n).unwrap();
    assert!(nf.equal(&f.apply(&pi_star_t(&m).unwrap()).unwrap(), &pi_star_t(&n).unwrap()).unwrap());
}

#[test]
fn short_chain_with_label_two_is_not_flippable() {
    let g = minimal_cp2(2, 1, &qi(1)).unwrap();
    let i = (1..=g.k()).find(|&i| g.chains[i - 1].labels() == [2]).unwrap();
    assert!(!is_flippable(&g, i));
    assert!(matches!(partial_flip(&g, i), Err(Error::NotFlippable(_))));
}

#[test]
fn corrupted_map_fails_its_check() {
    let (m, _) = counterexample_pair();
    let mut f = GeneratorMap::identity(&m);
    f.map.insert(Gen::Sigma(2, 2), CohClass2::gen(Gen::Sigma(2, 2)).plus(&CohClass2::gen(Gen::Sigma(2, 3))));
    assert!(!f.check().unwrap().ok());
    let mut g = GeneratorMap::identity(&m);
    g.epsilon = -1;
    assert!(!g.check().unwrap().pi_star);
}

#[test]
fn dull_examples() {
    let (m, n) = counterexample_pair();
    assert!(dull_isomorphic(&m.dull(), &n.dull()).is_some());
    let a = minimal_cp2(2, 1, &qi(1)).unwrap();
    let b = minimal_cp2(3, 2, &qi(1)).unwrap();
    assert!(dull_isomorphic(&a.dull(), &b.dull()).is_none());
    for g in graphs().iter().step_by(5) {
        let d = g.dull();
        assert!(dull_isomorphic(&d, &d.swapped()).is_some());
        assert!(dull_isomorphic(&d, &full_flip(g).unwrap().0.dull()).is_some());
    }
}

#[test]
fn weak_iso_examples() {
    let (m, n) = counterexample_pair();
    let v = weak_isomorphisms(&m, &n).unwrap();
    assert_eq!(v.to_string(), "isomorphic via: partial_flip(chain 2)");
    let r = weak_isomorphisms(&m, &scaled(&m, 3)).unwrap();
    assert!(matches!(&r, WeakIsoVerdict::Isomorphic { moves, .. } if moves.is_empty()), "{r}");
    let a = minimal_cp2(2, 1, &qi(1)).unwrap();
    let b = minimal_cp2(3, 2, &qi(1)).unwrap();
    assert!(matches!(weak_isomorphisms(&a, &b).unwrap(), WeakIsoVerdict::NotIsomorphic(Witness::LabelMultiset)));
}

#[test]
fn obstruction_examples() {
    let (m, n) = counterexample_pair();
    assert_eq!(diffeo_obstruction(&m, &n).to_string(), "equivariant diffeomorphism obstructed: weight multisets");
    for g in graphs().iter().step_by(11) {
        assert_eq!(diffeo_obstruction(g, g), DiffeoVerdict::NotObstructed);
        assert_eq!(diffeo_obstruction(g, &full_flip(g).unwrap().0), DiffeoVerdict::NotObstructed);
    }
}

fn combo(g: &ExtendedGraph, coeffs: &[i64]) -> CohClass2 {
    let mut c = CohClass2::zero();
    for (x, k) in generators(g).into_iter().zip(coeffs.iter().cycle()) {
        c.add_term(x, *k);
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flip_maps_preserve_pairings(
        i in 0..graphs().len(),
        a in prop::collection::vec(-3i64..=3, 1..6),
        b in prop::collection::vec(-3i64..=3, 1..6),
        which in 0usize..3,
    ) {
        let g = &graphs()[i];
        let flippable: Vec<usize> = (1..=g.k()).filter(|&c| is_flippable(g, c)).collect();
        let (r, f) = match which {
            0 => full_flip(g).unwrap(),
            1 => symplectic_flip(g).unwrap(),
            _ if !flippable.is_empty() => partial_flip(g, flippable[i % flippable.len()]).unwrap(),
            _ => full_flip(g).unwrap(),
        };
        let (x, y) = (combo(g, &a), combo(g, &b));
        let lhs = intersect(g, &x, &y).unwrap();
        let rhs = intersect(&r, &f.apply(&x).unwrap(), &f.apply(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(f.invariant_mismatches().unwrap().is_empty());
    }
}
