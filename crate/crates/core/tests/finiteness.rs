mod support;

use std::sync::OnceLock;

use proptest::prelude::*;
use s1graph::cohomology::chern_c1;
use s1graph::finiteness::{b2, bound_constants, check_box, edge_bound, recognize_fiber_class, FiberClass};
use s1graph::localization::{omega_pairing, omega_square};
use s1graph::morphisms::counterexample_pair;
use s1graph::rational::{q, qi};
use s1graph::surgery::{minimal_cp2, minimal_ruled, reduce, MinimalModelId};
use s1graph::{ExtendedGraph, Q};

fn graphs() -> &'static [ExtendedGraph] {
    static G: OnceLock<Vec<ExtendedGraph>> = OnceLock::new();
    G.get_or_init(|| support::corpus(5))
}

/// ⟨ω,ω⟩, ∫c1·ω and c1²−2c2 from the blowup history alone: each blowup of
/// size λ removes λ² from the volume form, λ from ∫c1·ω and 3 from c1²−2c2.
fn by_blowups(g: &ExtendedGraph) -> Option<(Q, Q, i64)> {
    let r = reduce(g).ok()?;
    let (w2, c1w, a) = match &r.model {
        MinimalModelId::CP2 { lambda, .. } => (lambda * lambda, lambda * qi(3), 3),
        MinimalModelId::Ruled { genus: 0, fiber, base, e_min: 0 } => {
            (fiber * base * qi(2), (fiber + base) * qi(2), 0)
        }
        _ => return None,
    };
    let sq: Q = r.records.iter().map(|x| &x.lambda * &x.lambda).sum();
    let lin: Q = r.records.iter().map(|x| x.lambda.clone()).sum();
    Some((w2 - sq, c1w - lin, a - 3 * r.records.len() as i64))
}

#[test]
fn cp2_211_constants() {
    let rep = bound_constants(&minimal_cp2(2, 1, &qi(1)).unwrap()).unwrap();
    assert_eq!(rep.a, 3);
    assert_eq!(rep.b2, 1);
    assert_eq!(rep.n, 3);
    assert_eq!(rep.omega_sq, qi(1));
    // C_h = N·max(ω(F), ω(B)) with both bounded by λ
    assert_eq!(rep.c_h, qi(3));
    assert_eq!(rep.c, qi(6));
}

#[test]
fn ruled_positive_genus_constant() {
    let g = minimal_ruled(1, &qi(1), &qi(2), 0).unwrap();
    let rep = bound_constants(&g).unwrap();
    assert_eq!((rep.b2, rep.n), (2, 4));
    assert_eq!(rep.c_h, qi(2 + 4) * qi(1));
}

#[test]
fn ruled_genus_zero_constant() {
    let g = minimal_ruled(0, &qi(1), &q(3, 2), 0).unwrap();
    let rep = bound_constants(&g).unwrap();
    assert_eq!(rep.n, 4);
    assert_eq!(rep.c_h, qi(4) * q(3, 2));
    // odd parity: the section of square 1 has size base + fiber/2
    let odd = bound_constants(&minimal_ruled(0, &qi(1), &q(3, 2), 1).unwrap()).unwrap();
    assert_eq!(odd.omega_b, q(3, 2) + q(1, 2));
}

#[test]
fn counterexample_constants() {
    let (m, _) = counterexample_pair();
    let rep = bound_constants(&m).unwrap();
    assert_eq!((rep.b2, rep.n), (8, 14));
    let (w2, c1w, a) = by_blowups(&m).unwrap();
    assert_eq!(rep.a, a);
    assert_eq!(rep.a, -18);
    assert_eq!(rep.omega_sq, w2);
    assert_eq!(rep.c1_omega, c1w);
    assert_eq!(rep.omega_sq, q(59, 6));
    assert_eq!(rep.c, qi(90));
}

#[test]
fn volume_and_chern_match_blowup_history() {
    let mut seen = 0;
    for g in graphs() {
        let Some((w2, c1w, a)) = by_blowups(g) else { continue };
        seen += 1;
        assert_eq!(omega_square(g).unwrap(), w2, "{g}");
        assert_eq!(omega_pairing(g, &chern_c1(g)).unwrap(), c1w, "{g}");
        assert_eq!(bound_constants(g).unwrap().a, a, "{g}");
    }
    assert!(seen > 100);
}

#[test]
fn box_holds_beyond_the_sum() {
    for g in graphs() {
        let b = check_box(g).unwrap();
        assert!(b.xh_bounded(), "{g}: {} > {}", b.xh, b.c_h);
        assert!(b.out_of_range.is_empty() && b.y_violations.is_empty(), "{g}");
    }
}

#[test]
fn edge_count_within_bound() {
    for g in graphs() {
        assert!(g.edge_count() <= edge_bound(b2(g)), "{g}");
    }
}

#[test]
fn fiber_examples() {
    assert_eq!(recognize_fiber_class(0, 1, 2, 0), FiberClass::Fiber);
    assert_eq!(recognize_fiber_class(1, 0, 0, 0), FiberClass::Base);
    assert_eq!(recognize_fiber_class(-1, 0, 2, 0), FiberClass::Neither("ω(A) is not positive".into()));
    assert!(matches!(recognize_fiber_class(-1, 3, 2, 0), FiberClass::Neither(_)));
}

proptest! {
    #[test]
    fn only_fiber_and_base_survive(p in -6i64..=6, qq in -6i64..=6, genus in 0u32..4, parity in 0i64..2) {
        let want = match (p, qq) {
            (0, 1) => FiberClass::Fiber,
            (1, 0) if genus == 0 && parity == 0 => FiberClass::Base,
            _ => FiberClass::Neither(String::new()),
        };
        let got = recognize_fiber_class(p, qq, genus, parity);
        match want {
            FiberClass::Neither(_) => prop_assert!(matches!(got, FiberClass::Neither(_))),
            w => prop_assert_eq!(got, w),
        }
    }
}
