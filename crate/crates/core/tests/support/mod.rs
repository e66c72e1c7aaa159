//! Shared helpers for integration tests: corpus access and an independent
//! bounded search for ring isomorphisms built only from restriction images.
#![allow(dead_code)]

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use s1graph::cohomology::{CohClass2, NormalForm};
use s1graph::graph_model::{enumerate_graphs, EnumBounds};
use s1graph::linalg::{det, nullspace_q, ColumnReduction};
use s1graph::localization::{intersect_abbv, restrict, ComponentValue, RestrictionTuple};
use s1graph::{ExtendedGraph, Q};

pub fn corpus(max_edges: usize) -> Vec<ExtendedGraph> {
    enumerate_graphs(EnumBounds::new(max_edges, 4, 2))
}

fn vec_deg(r: &RestrictionTuple, degs: &[i32]) -> Vec<Q> {
    let mut v = Vec::new();
    for cv in r.0.values() {
        match cv {
            ComponentValue::Point(l) => v.extend(degs.iter().map(|&d| l.coeff(d))),
            ComponentValue::Surface { p, q } => {
                v.extend(degs.iter().map(|&d| p.coeff(d)));
                v.extend(degs.iter().map(|&d| q.coeff(d)));
            }
        }
    }
    v
}

fn to_ints(vs: &[Vec<Q>]) -> Vec<Vec<i128>> {
    let mut l = num_bigint::BigInt::from(1);
    for v in vs {
        for x in v {
            l = l.lcm(x.denom());
        }
    }
    let lq = Q::from_integer(l);
    vs.iter()
        .map(|v| v.iter().map(|x| (x * &lq).to_integer().to_i128().expect("fits")).collect())
        .collect()
}

/// Data of one side: a basis (t, lifts) of degree-2 classes, the ordinary
/// intersection form on the lifts, and products of basis monomials.
struct Side {
    r: usize,
    form: Vec<Vec<i64>>,
    /// prod2[a*r+b], prod3[(a*r+b)*r+c]: scaled coefficient vectors.
    prod2: Vec<Vec<i128>>,
    prod3: Vec<Vec<i128>>,
}

fn side(g: &ExtendedGraph) -> Option<Side> {
    let nf = NormalForm::new(g).ok()?;
    let r = nf.rank();
    let rs: Vec<RestrictionTuple> = nf.basis.iter().map(|b| restrict(g, b).unwrap()).collect();
    // the class restricting to t everywhere, found by linear algebra on restrictions
    let mut cols: Vec<Vec<Q>> = rs.iter().map(|x| vec_deg(x, &[0, 1])).collect();
    let t = vec_deg(&RestrictionTuple::t(g), &[0, 1]);
    cols.push(t.iter().map(|x| -x.clone()).collect());
    let ker = nullspace_q(&cols);
    let k = ker.iter().find(|v| !v[r].is_zero())?;
    let p: Vec<i64> = (0..r).map(|a| (&k[a] / &k[r]).to_integer().to_i64().unwrap()).collect();
    let red = ColumnReduction::new(&[p.clone()], r, &[]);
    if !red.unimodular() {
        return None;
    }
    let mut basis = vec![p];
    basis.extend(red.free_columns().into_iter().map(|j| red.basis_row(j)));
    let classes: Vec<CohClass2> = basis.iter().map(|c| nf.class_of(c)).collect();
    let n = r - 1;
    let form: Vec<Vec<i64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| intersect_abbv(g, &classes[a + 1], &classes[b + 1]).unwrap().to_i64().unwrap())
                .collect()
        })
        .collect();
    let rt: Vec<RestrictionTuple> = classes.iter().map(|c| restrict(g, c).unwrap()).collect();
    let mut p2 = Vec::new();
    let mut p3 = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let ab = rt[a].mul(&rt[b]);
            p2.push(vec_deg(&ab, &[0, 1, 2]));
            for c in 0..r {
                p3.push(vec_deg(&ab.mul(&rt[c]), &[0, 1, 2, 3]));
            }
        }
    }
    Some(Side { r, form, prod2: to_ints(&p2), prod3: to_ints(&p3) })
}

type Relation = Vec<(Vec<usize>, i128)>;

fn monomials(upto: usize, deg: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..deg {
        out = out
            .into_iter()
            .flat_map(|m| {
                let lo = m.last().copied().unwrap_or(0);
                (lo..upto).map(move |x| {
                    let mut w = m.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn mono_vec<'a>(s: &'a Side, m: &[usize]) -> &'a Vec<i128> {
    let r = s.r;
    match m {
        [a, b] => &s.prod2[a * r + b],
        [a, b, c] => &s.prod3[(a * r + b) * r + c],
        _ => unreachable!(),
    }
}

/// Quadratic and cubic relations among the first `upto` basis elements, for each prefix.
fn prefix_kernels(s: &Side) -> Vec<Vec<Relation>> {
    let mut out = Vec::new();
    for upto in 1..=s.r {
        let mut rels = Vec::new();
        for deg in [2, 3] {
            let monos = monomials(upto, deg);
            let cols: Vec<Vec<Q>> = monos
                .iter()
                .map(|m| mono_vec(s, m).iter().map(|&x| Q::from_integer(x.into())).collect())
                .collect();
            for k in nullspace_q(&cols) {
                let ints = to_ints(&[k])[0].clone();
                let rel: Relation =
                    monos.iter().zip(ints).filter(|(_, c)| *c != 0).map(|(m, c)| (m.clone(), c)).collect();
                rels.push(rel);
            }
        }
        out.push(rels);
    }
    out
}

/// Coefficient vector of Π images, expanded in the target basis.
fn image_monomial(t: &Side, imgs: &[Vec<i64>], m: &[usize]) -> Vec<i128> {
    let dim = t.prod3[0].len().max(t.prod2[0].len());
    let mut out = vec![0i128; dim];
    let r = t.r;
    let mut idx = vec![0usize; m.len()];
    loop {
        let f: i128 = m.iter().zip(&idx).map(|(&a, &c)| imgs[a][c] as i128).product();
        if f != 0 {
            for (o, v) in out.iter_mut().zip(mono_vec(t, &{
                let mut s = idx.clone();
                s.sort();
                s
            })) {
                *o += f * v;
            }
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                return out;
            }
            idx[p] += 1;
            if idx[p] < r {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

fn relations_hold(t: &Side, imgs: &[Vec<i64>], rels: &[Relation]) -> bool {
    rels.iter().all(|rel| {
        let mut acc: Vec<i128> = Vec::new();
        for (m, c) in rel {
            let v = image_monomial(t, imgs, m);
            if acc.is_empty() {
                acc = vec![0; v.len()];
            }
            for (o, x) in acc.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        acc.iter().all(|&x| x == 0)
    })
}

#[derive(Debug)]
pub enum Search {
    Found,
    NotFound,
    Unsupported,
}

/// Bounded search for a degree-2 map (t ↦ ±t, lifts ↦ isometric images plus
/// multiples of t, all coefficients in [−bound, bound]) preserving every
/// quadratic relation among restriction images.
pub fn brute_force_iso(g1: &ExtendedGraph, g2: &ExtendedGraph, bound: i64) -> Search {
    let (Some(s1), Some(s2)) = (side(g1), side(g2)) else { return Search::Unsupported };
    if s1.r != s2.r || g1.genus != g2.genus {
        return Search::NotFound;
    }
    let r = s1.r;
    let n = r - 1;
    let kernels = prefix_kernels(&s1);
    let mut vecs: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        vecs = vecs
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    let qf = |a: &[i64], b: &[i64]| -> i64 {
        (0..n).map(|i| (0..n).map(|j| a[i] * s2.form[i][j] * b[j]).sum::<i64>()).sum()
    };
    for eps in [1i64, -1] {
        for sgn in [1i64, -1] {
            let mut t0 = vec![0i64; r];
            t0[0] = eps;
            if !relations_hold(&s2, &[t0.clone()], &kernels[0]) {
                continue;
            }
            let mut imgs = vec![t0];
            let mut lifts: Vec<Vec<i64>> = Vec::new();
            if extend(&s1, &s2, &kernels, &vecs, bound, sgn, &qf, &mut imgs, &mut lifts) {
                return Search::Found;
            }
        }
    }
    Search::NotFound
}

#[allow(clippy::too_many_arguments)]
fn extend(
    s1: &Side,
    s2: &Side,
    kernels: &[Vec<Relation>],
    vecs: &[Vec<i64>],
    bound: i64,
    sgn: i64,
    qf: &dyn Fn(&[i64], &[i64]) -> i64,
    imgs: &mut Vec<Vec<i64>>,
    lifts: &mut Vec<Vec<i64>>,
) -> bool {
    let j = lifts.len();
    let n = s1.r - 1;
    if j == n {
        return det(imgs).abs() == 1;
    }
    for v in vecs {
        if qf(v, v) != sgn * s1.form[j][j] {
            continue;
        }
        if (0..j).any(|b| qf(&lifts[b], v) != sgn * s1.form[b][j]) {
            continue;
        }
        for d in -bound..=bound {
            let mut img = vec![d];
            img.extend(v.iter().copied());
            imgs.push(img);
            if relations_hold(s2, imgs, &kernels[j + 1]) {
                lifts.push(v.clone());
                if extend(s1, s2, kernels, vecs, bound, sgn, qf, imgs, lifts) {
                    return true;
                }
                lifts.pop();
            }
            imgs.pop();
        }
    }
    false
}
