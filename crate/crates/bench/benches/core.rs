use criterion::{black_box, criterion_group, criterion_main, Criterion};

use s1graph::cohomology::{chern_classes, generators, presentation};
use s1graph::finiteness::bound_constants;
use s1graph::graph_model::{enumerate_graphs, EnumBounds};
use s1graph::localization::{intersect, intersect_abbv};
use s1graph::morphisms::{counterexample_pair, weak_isomorphisms};
use s1graph::reconstruct::{algebraic_input, recover_decorated};
use s1graph::surgery::reduce;
use s1graph::CohClass2;
use s1graph_bench::{corpus, largest};

fn enumeration(c: &mut Criterion) {
    c.bench_function("enumerate <=4 edges", |b| b.iter(|| enumerate_graphs(black_box(EnumBounds::new(4, 3, 2))).len()));
}

fn pairings(c: &mut Criterion) {
    let g = largest(5);
    let gens = generators(&g);
    c.bench_function("intersection table", |b| {
        b.iter(|| {
            let mut s = 0;
            for &x in &gens {
                for &y in &gens {
                    s += intersect(&g, &CohClass2::gen(x), &CohClass2::gen(y)).unwrap();
                }
            }
            s
        })
    });
    c.bench_function("intersection by localization", |b| {
        b.iter(|| {
            for &x in &gens {
                for &y in &gens {
                    black_box(intersect_abbv(&g, &CohClass2::gen(x), &CohClass2::gen(y)).unwrap());
                }
            }
        })
    });
}

fn algebra(c: &mut Criterion) {
    let g = largest(5);
    c.bench_function("presentation", |b| b.iter(|| presentation(black_box(&g)).unwrap()));
    c.bench_function("chern classes", |b| b.iter(|| chern_classes(black_box(&g)).unwrap()));
}

fn surgery(c: &mut Criterion) {
    let (m, _) = counterexample_pair();
    c.bench_function("reduce counterexample", |b| b.iter(|| reduce(black_box(&m)).unwrap()));
}

fn morphisms(c: &mut Criterion) {
    let (m, n) = counterexample_pair();
    c.bench_function("weak isomorphism counterexample", |b| b.iter(|| weak_isomorphisms(black_box(&m), black_box(&n)).unwrap()));
}

fn reconstruction(c: &mut Criterion) {
    let gs: Vec<_> = corpus(4).into_iter().filter(|g| g.fat_count() > 0).collect();
    c.bench_function("recover corpus <=4 edges", |b| {
        b.iter(|| {
            for g in &gs {
                black_box(recover_decorated(&algebraic_input(g, true).unwrap()).unwrap());
            }
        })
    });
}

fn finiteness(c: &mut Criterion) {
    let g = largest(4);
    c.bench_function("bound constants", |b| b.iter(|| bound_constants(black_box(&g)).unwrap()));
}

criterion_group!(benches, enumeration, pairings, algebra, surgery, morphisms, reconstruction, finiteness);
criterion_main!(benches);
