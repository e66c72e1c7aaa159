mod support;

use std::sync::OnceLock;

use proptest::prelude::*;
use s1graph::cohomology::{generators, CohClass2, Gen};
use s1graph::finiteness::b2;
use s1graph::graph_model::{enumerate_graphs, parse_graph, EnumBounds};
use s1graph::localization::{class_label, intersect, intersect_abbv, omega_pairing, zero_length};
use s1graph::rational::{q, qi};
use s1graph::surgery::{
    blowdown, blowdown_targets, blowup, minimal_cp2, minimal_hirzebruch, reduce, BlowupSite, End,
    MinimalModelId,
};
use s1graph::{Error, ExtendedGraph};

fn graphs() -> &'static [ExtendedGraph] {
    static G: OnceLock<Vec<ExtendedGraph>> = OnceLock::new();
    G.get_or_init(|| support::corpus(5))
}

fn combo(g: &ExtendedGraph, coeffs: &[i64]) -> CohClass2 {
    let mut c = CohClass2::zero();
    for (x, k) in generators(g).into_iter().zip(coeffs.iter().cycle()) {
        c.add_term(x, *k);
    }
    c
}

#[test]
fn parse_rejects_zero_area_and_reduces_fractions() {
    let fat = |area: &str| {
        format!(
            r#"{{"genus":0,"min":{{"fat":false,"height":"0"}},"max":{{"fat":true,"height":"1","area":"{area}"}},
               "chains":[{{"edges":[{{"m":1,"len":"1"}}]}}]}}"#
        )
    };
    assert!(parse_graph(&fat("0")).is_err());
    let g = parse_graph(&fat("3/6")).unwrap();
    assert_eq!(g.max.area(), q(1, 2));
    assert!(matches!(parse_graph("{"), Err(Error::Parse { .. })));
}

#[test]
fn extremal_self_intersections() {
    let cp2 = minimal_cp2(1, 1, &qi(1)).unwrap();
    assert_eq!(cp2.extremal_self_intersections(), (qi(-1), qi(1)));
    assert!(cp2.max.is_fat());
    let (f1, _) = blowup(&cp2, BlowupSite::IsolatedExtreme(End::Min), &q(1, 2)).unwrap();
    assert!(f1.min.is_fat());
    assert_eq!(f1.extremal_self_intersections(), (qi(-1), qi(1)));
}

#[test]
fn enumeration_contains_cp2_211() {
    let want = minimal_cp2(2, 1, &qi(1)).unwrap().normalized().0;
    let all = enumerate_graphs(EnumBounds::new(3, 2, 1));
    assert!(all.iter().any(|g| g.normalized().0 == want));
    assert!(all.iter().all(|g| g.validate().is_ok()));
}

#[test]
fn fat_blowup_shrinks_area() {
    let g = minimal_hirzebruch(1, 1, 1, &qi(2), &qi(1)).unwrap();
    assert!(g.max.is_fat());
    let (emin, emax) = g.extremal_self_intersections();
    let lam = q(1, 2);
    let (h, rec) = blowup(&g, BlowupSite::FatExtreme(End::Max), &lam).unwrap();
    assert_eq!(h.max.area(), g.max.area() - &lam);
    assert_eq!(h.extremal_self_intersections(), (emin, emax - qi(1)));
    assert_eq!(intersect(&h, &CohClass2::gen(rec.exceptional), &CohClass2::gen(rec.exceptional)).unwrap(), -1);
    let undo = blowdown_targets(&h)
        .into_iter()
        .any(|t| blowdown(&h, t).map(|(b, _)| b.normalized().0 == g.normalized().0).unwrap_or(false));
    assert!(undo);
}

#[test]
fn blowup_too_large_is_rejected() {
    let g = minimal_cp2(1, 1, &qi(1)).unwrap();
    assert!(blowup(&g, BlowupSite::IsolatedExtreme(End::Min), &qi(1)).is_err());
}

#[test]
fn every_blowdown_is_valid_and_undoable() {
    for g in graphs().iter().step_by(4) {
        for t in blowdown_targets(g) {
            let (h, rec) = blowdown(g, t).unwrap();
            assert!(h.normalized().0.validate().is_ok(), "{g} at {t}");
            let (back, _) = blowup(&h, rec.site, &rec.lambda).unwrap();
            assert_eq!(back.normalized().0, g.normalized().0, "{g} at {t}");
        }
    }
}

#[test]
fn reduction_ends_minimal() {
    for g in graphs() {
        let r = reduce(g).unwrap();
        assert!(blowdown_targets(&r.base).is_empty() || matches!(r.model, MinimalModelId::CP2 { .. }), "{g}");
        assert_eq!(r.base.normalized().0.validate(), Ok(()));
    }
}

#[test]
fn exceptional_class_has_square_minus_one() {
    let g = minimal_cp2(2, 1, &qi(3)).unwrap();
    for site in [BlowupSite::IsolatedExtreme(End::Min), BlowupSite::Interior { i: 2, j: 1 }] {
        let (h, rec) = blowup(&g, site, &q(1, 2)).unwrap();
        let e = CohClass2::gen(rec.exceptional);
        assert_eq!(intersect(&h, &e, &e).unwrap(), -1, "{site}");
        assert_eq!(omega_pairing(&h, &e).unwrap(), q(1, 2), "{site}");
    }
}

#[test]
fn generator_labels() {
    for g in graphs().iter().step_by(5) {
        for i in 1..=g.k() {
            for j in 1..=g.ell(i) {
                let x = CohClass2::gen(Gen::Sigma(i, j));
                if intersect(g, &x, &x).unwrap() == 0 {
                    continue;
                }
                assert_eq!(class_label(g, &x).unwrap(), qi(g.m(i, j)), "{g} σ{i}{j}");
                assert_eq!(class_label(g, &x.scaled(-1)).unwrap(), qi(g.m(i, j)), "{g} σ{i}{j}");
            }
        }
    }
}

#[test]
fn zero_length_of_zero_counts_every_component() {
    for g in graphs().iter().step_by(9) {
        assert_eq!(zero_length(g, &CohClass2::zero()).unwrap(), g.components().len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_symmetric_bilinear(
        i in 0..graphs().len(),
        a in prop::collection::vec(-3i64..=3, 1..5),
        b in prop::collection::vec(-3i64..=3, 1..5),
        c in prop::collection::vec(-3i64..=3, 1..5),
    ) {
        let g = &graphs()[i];
        let (x, y, z) = (combo(g, &a), combo(g, &b), combo(g, &c));
        let xy = intersect(g, &x, &y).unwrap();
        prop_assert_eq!(xy, intersect(g, &y, &x).unwrap());
        prop_assert_eq!(
            intersect(g, &x.plus(&y), &z).unwrap(),
            intersect(g, &x, &z).unwrap() + intersect(g, &y, &z).unwrap()
        );
        prop_assert_eq!(intersect_abbv(g, &x, &y).unwrap(), qi(xy));
    }

    #[test]
    fn blowup_then_blowdown(i in 0..graphs().len(), pick in any::<prop::sample::Index>(), l in 1i64..4) {
        let g = &graphs()[i];
        let mut sites = vec![
            BlowupSite::IsolatedExtreme(End::Min),
            BlowupSite::IsolatedExtreme(End::Max),
            BlowupSite::FatExtreme(End::Min),
            BlowupSite::FatExtreme(End::Max),
        ];
        for c in 1..=g.k() {
            for j in 1..g.ell(c) {
                sites.push(BlowupSite::Interior { i: c, j });
            }
        }
        let site = sites[pick.index(sites.len())];
        let lam = q(l, 8);
        match blowup(g, site, &lam) {
            Ok((h, rec)) => {
                prop_assert!(h.normalized().0.validate().is_ok());
                prop_assert_eq!(b2(&h), b2(g) + 1);
                let e = CohClass2::gen(rec.exceptional);
                prop_assert_eq!(intersect(&h, &e, &e).unwrap(), -1);
                let undo = blowdown_targets(&h).into_iter().any(|t| {
                    blowdown(&h, t).map(|(b, _)| b.normalized().0 == g.normalized().0).unwrap_or(false)
                });
                prop_assert!(undo);
            }
            Err(_) => {}
        }
    }
}
