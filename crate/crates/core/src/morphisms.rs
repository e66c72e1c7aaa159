//! Flip maps between presentations, dull-graph isomorphism, weak isomorphisms
//! and the isotropy-weight obstruction to equivariant diffeomorphism.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::cohomology::{generators, linear_relations, pi_star_t, CohClass2, Gen, NormalForm};
use crate::error::{Error, Result};
use crate::graph_model::{Attach, Chain, DullChain, DullGraph, Edge, ExtendedGraph, Extreme};
use crate::linalg::{det, rank_q};
use crate::localization::{class_label, intersect, restrict, zero_length, ComponentValue, RestrictionTuple};
use crate::rational::{q, qi, Q};

/// A map on degree-2 generators, extended linearly.
#[derive(Clone, Debug)]
pub struct GeneratorMap {
    pub name: String,
    pub source: ExtendedGraph,
    pub target: ExtendedGraph,
    pub map: BTreeMap<Gen, CohClass2>,
    /// +1 for an isomorphism, −1 when t ↦ −t.
    pub epsilon: i64,
    pub notes: Vec<String>,
}

/// Outcome of the individual checks of `GeneratorMap::check`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapCheck {
    pub relations: bool,
    pub pi_star: bool,
    pub unimodular: bool,
    pub intersections: bool,
    pub products: bool,
}

impl MapCheck {
    pub fn ok(&self) -> bool {
        self.relations && self.pi_star && self.unimodular && self.intersections && self.products
    }
}

impl GeneratorMap {
    pub fn identity(g: &ExtendedGraph) -> GeneratorMap {
        let map = generators(g).into_iter().map(|x| (x, CohClass2::gen(x))).collect();
        GeneratorMap {
            name: "id".into(),
            source: g.clone(),
            target: g.clone(),
            map,
            epsilon: 1,
            notes: vec![],
        }
    }

    pub fn apply(&self, c: &CohClass2) -> Result<CohClass2> {
        let mut out = CohClass2::zero();
        for (x, k) in c.terms() {
            let img = self.map.get(&x).ok_or_else(|| Error::Symbol(x.to_string()))?;
            out = out.plus(&img.scaled(k));
        }
        Ok(out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &GeneratorMap) -> Result<GeneratorMap> {
        let map = self
            .map
            .iter()
            .map(|(x, c)| Ok((*x, next.apply(c)?)))
            .collect::<Result<_>>()?;
        let mut notes = self.notes.clone();
        notes.extend(next.notes.iter().cloned());
        Ok(GeneratorMap {
            name: format!("{} ∘ {}", next.name, self.name),
            source: self.source.clone(),
            target: next.target.clone(),
            map,
            epsilon: self.epsilon * next.epsilon,
            notes,
        })
    }

    /// Same generator images, read in a different target with the same labels.
    pub fn retarget(&self, target: &ExtendedGraph) -> GeneratorMap {
        GeneratorMap { target: target.clone(), ..self.clone() }
    }

    pub fn check(&self) -> Result<MapCheck> {
        let (src, tgt) = (&self.source, &self.target);
        let nf_s = NormalForm::new(src)?;
        let nf_t = NormalForm::new(tgt)?;
        for x in generators(src) {
            let img = self.map.get(&x).ok_or_else(|| Error::Missing(format!("no image for {x}")))?;
            crate::cohomology::check_symbols(tgt, img)?;
        }
        let mut relations = true;
        for r in linear_relations(src) {
            if nf_t.coords(&self.apply(&r)?)?.iter().any(|&c| c != 0) {
                relations = false;
            }
        }
        let pi_img = nf_t.coords(&self.apply(&pi_star_t(src)?)?)?;
        let pi_t: Vec<i64> = nf_t.coords(&pi_star_t(tgt)?)?.iter().map(|c| c * self.epsilon).collect();
        let pi_star = pi_img == pi_t;
        let unimodular = nf_s.rank() == nf_t.rank() && {
            let m: Vec<Vec<i64>> =
                nf_s.basis.iter().map(|b| nf_t.coords(&self.apply(b)?)).collect::<Result<_>>()?;
            det(&m).abs() == 1
        };
        let gens = generators(src);
        let imgs: Vec<CohClass2> = gens.iter().map(|&x| self.map[&x].clone()).collect();
        let mut intersections = true;
        for a in 0..gens.len() {
            for b in a..gens.len() {
                let lhs = intersect(src, &CohClass2::gen(gens[a]), &CohClass2::gen(gens[b]))?;
                let rhs = intersect(tgt, &imgs[a], &imgs[b])?;
                if lhs != rhs {
                    intersections = false;
                }
            }
        }
        let bimgs: Vec<CohClass2> = nf_s.basis.iter().map(|b| self.apply(b)).collect::<Result<_>>()?;
        let products = preserves_products(src, tgt, &nf_s.basis, &bimgs)?;
        Ok(MapCheck { relations, pi_star, unimodular, intersections, products })
    }

    pub fn verify(&self) -> Result<()> {
        let c = self.check()?;
        if c.ok() {
            Ok(())
        } else {
            Err(Error::BugTrap(format!("{} fails verification: {c:?}", self.name)))
        }
    }

    /// Generators whose zero length or label differs from that of their image.
    pub fn invariant_mismatches(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for x in generators(&self.source) {
            let a = CohClass2::gen(x);
            let b = &self.map[&x];
            if zero_length(&self.source, &a)? != zero_length(&self.target, b)? {
                out.push(format!("zero length of {x}"));
            }
            let la = class_label(&self.source, &a).ok();
            let lb = class_label(&self.target, b).ok();
            if la != lb {
                out.push(format!("label of {x}"));
            }
        }
        Ok(out)
    }

    /// After composing with −id when ε = −1, (τ₀, τ∞, τ_h) goes to
    /// (τ₀, τ∞, τ_h) or (−τ∞, −τ₀, −τ_h).
    pub fn preserves_extremes(&self) -> Result<bool> {
        let nf = NormalForm::new(&self.target)?;
        let src_has = |x: Gen| generators(&self.source).contains(&x);
        let tgt_has = |x: Gen| generators(&self.target).contains(&x);
        let img = |x: Gen| -> Result<Vec<i64>> {
            if src_has(x) {
                Ok(nf.coords(&self.map[&x].scaled(self.epsilon))?)
            } else {
                Ok(vec![0; nf.rank()])
            }
        };
        let tv = |x: Gen, s: i64| -> Result<Vec<i64>> {
            if tgt_has(x) {
                nf.coords(&CohClass2::term(x, s))
            } else {
                Ok(vec![0; nf.rank()])
            }
        };
        let (i0, ii, ih) = (img(Gen::Tau0)?, img(Gen::TauInf)?, img(Gen::TauH)?);
        let straight = i0 == tv(Gen::Tau0, 1)? && ii == tv(Gen::TauInf, 1)? && ih == tv(Gen::TauH, 1)?;
        let swapped = i0 == tv(Gen::TauInf, -1)? && ii == tv(Gen::Tau0, -1)? && ih == tv(Gen::TauH, -1)?;
        Ok(straight || swapped)
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> =
            self.map.iter().map(|(x, c)| (x.to_string(), json!(c.to_string()))).collect();
        json!({
            "name": self.name,
            "epsilon": self.epsilon,
            "source": self.source.to_string(),
            "target": self.target.to_string(),
            "map": map,
            "notes": self.notes,
        })
    }
}

impl fmt::Display for GeneratorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (ε = {:+})", self.name, self.epsilon)?;
        for (x, c) in &self.map {
            writeln!(f, "  {x} ↦ {c}")?;
        }
        Ok(())
    }
}

/// Coefficient vector of a restriction tuple in degrees 0..=top.
fn tuple_vector(r: &RestrictionTuple, top: i32) -> Vec<Q> {
    let mut v = Vec::new();
    for cv in r.0.values() {
        match cv {
            ComponentValue::Point(l) => v.extend((0..=top).map(|d| l.coeff(d))),
            ComponentValue::Surface { p, q } => {
                v.extend((0..=top).map(|d| p.coeff(d)));
                v.extend((0..=top).map(|d| q.coeff(d)));
            }
        }
    }
    v
}

/// Every quadratic and cubic relation among the source basis holds among the
/// images: the product rows of the target add no rank to those of the source.
fn preserves_products(src: &ExtendedGraph, tgt: &ExtendedGraph, basis: &[CohClass2], imgs: &[CohClass2]) -> Result<bool> {
    let rs: Vec<RestrictionTuple> = basis.iter().map(|c| restrict(src, c)).collect::<Result<_>>()?;
    let rt: Vec<RestrictionTuple> = imgs.iter().map(|c| restrict(tgt, c)).collect::<Result<_>>()?;
    let n = basis.len();
    let mut deg2 = (Vec::new(), Vec::new());
    let mut deg3 = (Vec::new(), Vec::new());
    for a in 0..n {
        for b in a..n {
            let (ps, pt) = (rs[a].mul(&rs[b]), rt[a].mul(&rt[b]));
            deg2.0.push(tuple_vector(&ps, 2));
            deg2.1.push(tuple_vector(&pt, 2));
            for c in b..n {
                deg3.0.push(tuple_vector(&ps.mul(&rs[c]), 3));
                deg3.1.push(tuple_vector(&pt.mul(&rt[c]), 3));
            }
        }
    }
    for (cs, ct) in [deg2, deg3] {
        let rows_s = transpose(&cs);
        let mut both = rows_s.clone();
        both.extend(transpose(&ct));
        if rank_q(&both) != rank_q(&rows_s) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn transpose(cols: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let rows = cols.first().map(|c| c.len()).unwrap_or(0);
    (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

/// Reverses the graph and re-sorts; returns the flipped graph and new chain positions.
fn reverse_sorted(g: &ExtendedGraph) -> (ExtendedGraph, Vec<usize>) {
    let mut r = g.reversed_raw();
    let perm = r.sort_chains();
    (r, inverse(&perm))
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    pos
}

fn flip_map(g: &ExtendedGraph, sign: i64) -> (ExtendedGraph, BTreeMap<Gen, CohClass2>) {
    let (r, pos) = reverse_sorted(g);
    let mut map = BTreeMap::new();
    if g.min.is_fat() {
        map.insert(Gen::Tau0, CohClass2::term(Gen::TauInf, sign));
    }
    if g.max.is_fat() {
        map.insert(Gen::TauInf, CohClass2::term(Gen::Tau0, sign));
    }
    map.insert(Gen::TauH, CohClass2::term(Gen::TauH, sign));
    for i in 1..=g.k() {
        let l = g.ell(i);
        for j in 1..=l {
            map.insert(Gen::Sigma(i, j), CohClass2::term(Gen::Sigma(pos[i - 1] + 1, l - j + 1), sign));
        }
    }
    (r, map)
}

/// The graph upside down with τ₀ ↔ τ∞ and σ_{i,j} ↦ σ_{i,ℓ−j+1}; t ↦ −t.
pub fn full_flip(g: &ExtendedGraph) -> Result<(ExtendedGraph, GeneratorMap)> {
    let (r, map) = flip_map(g, 1);
    let f = GeneratorMap { name: "full_flip".into(), source: g.clone(), target: r.clone(), map, epsilon: -1, notes: vec![] };
    f.verify()?;
    Ok((r, f))
}

/// ω ↦ −ω: the same reversal with every generator negated.
pub fn symplectic_flip(g: &ExtendedGraph) -> Result<(ExtendedGraph, GeneratorMap)> {
    let (r, map) = flip_map(g, -1);
    let f = GeneratorMap {
        name: "symplectic_flip".into(),
        source: g.clone(),
        target: r.clone(),
        map,
        epsilon: 1,
        notes: vec![],
    };
    f.verify()?;
    Ok((r, f))
}

pub fn minus_id(g: &ExtendedGraph) -> GeneratorMap {
    let mut f = GeneratorMap::identity(g);
    for c in f.map.values_mut() {
        *c = c.scaled(-1);
    }
    f.name = "-id".into();
    f.epsilon = -1;
    f
}

pub fn is_flippable(g: &ExtendedGraph, i: usize) -> bool {
    if i == 0 || i > g.k() {
        return false;
    }
    let l = g.ell(i);
    if l == 1 {
        g.m(i, 1) == 1
    } else {
        g.m(i, 1) == 1 && g.m(i, l) == 1
    }
}

/// Lengths for the reversed chain that keep Σ y_p/(m m') over its vertices,
/// so e_min and e_max do not move.
fn flipped_lengths(c: &Chain) -> (Vec<Q>, Option<String>) {
    let l = c.len();
    let rev: Vec<Q> = c.edges.iter().rev().map(|e| e.len.clone()).collect();
    if l <= 1 {
        return (rev, None);
    }
    let m = c.labels();
    let h = c.total();
    let heights = |xs: &[Q]| -> Vec<Q> {
        let mut acc = Q::zero();
        xs[..l - 1].iter().map(|x| {
            acc += x;
            acc.clone()
        }).collect()
    };
    let old_w: Vec<Q> = (0..l - 1).map(|j| q(1, m[j] * m[j + 1])).collect();
    let new_w: Vec<Q> = old_w.iter().rev().cloned().collect();
    let lengths: Vec<Q> = c.edges.iter().map(|e| e.len.clone()).collect();
    let dot = |ys: &[Q], ws: &[Q]| ys.iter().zip(ws).fold(Q::zero(), |a, (y, w)| a + y * w);
    let target = dot(&heights(&lengths), &old_w);
    let z = heights(&rev);
    let t_rev = dot(&z, &new_w);
    if t_rev == target {
        return (rev, None);
    }
    let s: Q = new_w.iter().fold(Q::zero(), |a, w| a + w);
    let ys: Vec<Q> = if target < t_rev {
        let lam = &target / &t_rev;
        z.iter().map(|y| y * &lam).collect()
    } else {
        let lam = (&h * &s - &target) / (&h * &s - &t_rev);
        z.iter().map(|y| &h - (&h - y) * &lam).collect()
    };
    let mut out = Vec::with_capacity(l);
    let mut prev = Q::zero();
    for y in ys.iter().chain(std::iter::once(&h)) {
        out.push(y - &prev);
        prev = y.clone();
    }
    (out, Some("flipped chain heights moved to keep e_min and e_max".into()))
}

/// Partial flip of chain `i` (1-based).
pub fn partial_flip(g: &ExtendedGraph, i: usize) -> Result<(ExtendedGraph, GeneratorMap)> {
    if i == 0 || i > g.k() {
        return Err(Error::Symbol(format!("chain {i}")));
    }
    if !is_flippable(g, i) {
        return Err(Error::NotFlippable(format!(
            "chain {i} has labels {:?}; both end labels must be 1",
            g.chains[i - 1].labels()
        )));
    }
    let name = format!("partial_flip(chain {i})");
    let l = g.ell(i);
    if l == 1 {
        let mut f = GeneratorMap::identity(g);
        f.name = name;
        return Ok((g.clone(), f));
    }
    let old = &g.chains[i - 1];
    let (lens, note) = flipped_lengths(old);
    let labels: Vec<i64> = old.labels().into_iter().rev().collect();
    let mut raw = g.clone();
    raw.chains[i - 1] = Chain::new(labels.iter().zip(lens).map(|(&m, x)| Edge::new(m, x)).collect());
    let perm = raw.sort_chains();
    let pos = inverse(&perm);
    let viol_before = g.violations_relaxed().len();
    let v = raw.violations_relaxed();
    if v.len() > viol_before {
        return Err(Error::BugTrap(format!("partial flip produced an invalid graph: {v:?}")));
    }
    let sig = |r: usize, j: usize| Gen::Sigma(pos[r - 1] + 1, j);
    let mut map = BTreeMap::new();
    for x in generators(g) {
        let img = match x {
            Gen::Sigma(r, j) if r == i => {
                if j == 1 {
                    (1..l).fold(CohClass2::zero(), |a, s| a.plus(&CohClass2::term(sig(i, s), labels[s - 1])))
                } else if j == l {
                    (2..=l).fold(CohClass2::zero(), |a, s| a.plus(&CohClass2::term(sig(i, s), labels[s - 1])))
                } else {
                    CohClass2::term(sig(i, l - j + 1), -1)
                }
            }
            Gen::Sigma(r, j) => CohClass2::gen(sig(r, j)),
            other => CohClass2::gen(other),
        };
        map.insert(x, img);
    }
    let f = GeneratorMap {
        name,
        source: g.clone(),
        target: raw.clone(),
        map,
        epsilon: 1,
        notes: note.into_iter().collect(),
    };
    f.verify()?;
    Ok((raw, f))
}

// ------------------------------------------------------------ dull matching

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DullMatching {
    /// Extremes exchanged (global flip).
    pub swapped: bool,
    /// (chain of d1, chain of d2, reversed), 0-based.
    pub pairs: Vec<(usize, usize, bool)>,
}

fn swap_chain_raw(c: &DullChain) -> DullChain {
    let attach = match c.attach {
        Attach::Min => Attach::Max,
        Attach::Max => Attach::Min,
        a => a,
    };
    DullChain { labels: c.labels.iter().rev().copied().collect(), attach }
}

fn match_chains(a: &[DullChain], b: &[DullChain]) -> Option<Vec<(usize, usize, bool)>> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut out = Vec::new();
    for (x, ca) in a.iter().enumerate() {
        let rev: Vec<i64> = ca.labels.iter().rev().copied().collect();
        let hit = (0..b.len()).filter(|&y| !used[y] && b[y].attach == ca.attach).find_map(|y| {
            if b[y].labels == ca.labels {
                Some((y, false))
            } else if ca.attach == Attach::Free && b[y].labels == rev {
                Some((y, true))
            } else {
                None
            }
        });
        let (y, r) = hit?;
        used[y] = true;
        out.push((x, y, r));
    }
    Some(out)
}

/// Labelled-graph isomorphism of dull graphs, preferring the direct orientation.
pub fn dull_isomorphic(d1: &DullGraph, d2: &DullGraph) -> Option<DullMatching> {
    if d1.genus != d2.genus {
        return None;
    }
    if d1.min == d2.min && d1.max == d2.max {
        if let Some(pairs) = match_chains(&d1.chains, &d2.chains) {
            return Some(DullMatching { swapped: false, pairs });
        }
    }
    if d1.min == d2.max && d1.max == d2.min {
        let s: Vec<DullChain> = d1.chains.iter().map(swap_chain_raw).collect();
        if let Some(pairs) = match_chains(&s, &d2.chains) {
            return Some(DullMatching { swapped: true, pairs });
        }
    }
    None
}

// ------------------------------------------------------------ weak isomorphisms

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    PartialFlip(usize),
    SymplecticFlip,
    FullFlip,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::PartialFlip(i) => write!(f, "partial_flip(chain {i})"),
            Move::SymplecticFlip => write!(f, "symplectic_flip"),
            Move::FullFlip => write!(f, "full_flip"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Genus,
    Extremes,
    LabelMultiset,
}

impl Witness {
    pub fn code(self) -> &'static str {
        match self {
            Witness::Genus => "genus",
            Witness::Extremes => "extremes",
            Witness::LabelMultiset => "label multiset",
        }
    }
}

#[derive(Clone, Debug)]
pub enum WeakIsoVerdict {
    NotIsomorphic(Witness),
    Isomorphic { moves: Vec<Move>, factors: Vec<GeneratorMap>, composite: GeneratorMap },
}

impl WeakIsoVerdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, WeakIsoVerdict::Isomorphic { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            WeakIsoVerdict::NotIsomorphic(w) => json!({"verdict": "not_isomorphic", "witness": w.code()}),
            WeakIsoVerdict::Isomorphic { moves, composite, .. } => json!({
                "verdict": "isomorphic",
                "moves": moves.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "map": composite.to_json(),
            }),
        }
    }
}

impl fmt::Display for WeakIsoVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakIsoVerdict::NotIsomorphic(w) => write!(f, "not isomorphic: {}", w.code()),
            WeakIsoVerdict::Isomorphic { moves, .. } if moves.is_empty() => write!(f, "isomorphic via: identity"),
            WeakIsoVerdict::Isomorphic { moves, .. } => {
                let s: Vec<String> = moves.iter().map(|m| m.to_string()).collect();
                write!(f, "isomorphic via: {}", s.join(" ∘ "))
            }
        }
    }
}

fn witness(d1: &DullGraph, d2: &DullGraph) -> Witness {
    if d1.genus != d2.genus {
        return Witness::Genus;
    }
    let mut e1 = [d1.min.clone(), d1.max.clone()];
    let mut e2 = [d2.min.clone(), d2.max.clone()];
    e1.sort();
    e2.sort();
    if e1 != e2 {
        Witness::Extremes
    } else {
        Witness::LabelMultiset
    }
}

fn label_counts(g: &ExtendedGraph) -> BTreeMap<Vec<i64>, usize> {
    let mut m = BTreeMap::new();
    for c in &g.chains {
        *m.entry(c.labels()).or_insert(0) += 1;
    }
    m
}

/// Weak isomorphism between the even-degree equivariant cohomologies, realized
/// as partial flips after an optional symplectic flip.
pub fn weak_isomorphisms(g1: &ExtendedGraph, g2: &ExtendedGraph) -> Result<WeakIsoVerdict> {
    let (d1, d2) = (g1.dull(), g2.dull());
    let Some(matching) = dull_isomorphic(&d1, &d2) else {
        return Ok(WeakIsoVerdict::NotIsomorphic(witness(&d1, &d2)));
    };
    let mut moves = Vec::new();
    let mut factors = Vec::new();
    let mut cur = g1.clone();
    if matching.swapped {
        let (r, f) = symplectic_flip(&cur)?;
        moves.push(Move::SymplecticFlip);
        factors.push(f);
        cur = r;
    }
    let want = label_counts(g2);
    loop {
        let have = label_counts(&cur);
        if have == want {
            break;
        }
        let surplus = have.iter().find(|(l, &n)| n > want.get(*l).copied().unwrap_or(0)).map(|(l, _)| l.clone());
        let Some(l) = surplus else {
            return Err(Error::BugTrap("dull graphs agree but chain labels cannot be matched".into()));
        };
        let i = (1..=cur.k()).rev().find(|&i| cur.chains[i - 1].labels() == l).unwrap();
        let rev: Vec<i64> = l.iter().rev().copied().collect();
        if rev == l || !is_flippable(&cur, i) {
            return Err(Error::BugTrap(format!("chain labels {l:?} need a flip that is not allowed")));
        }
        let (r, f) = partial_flip(&cur, i)?;
        moves.push(Move::PartialFlip(i));
        factors.push(f);
        cur = r;
    }
    let mut composite = GeneratorMap::identity(g1);
    for f in &factors {
        composite = composite.then(f)?;
    }
    composite = composite.retarget(g2);
    if factors.is_empty() {
        composite.name = "id".into();
    }
    composite.verify()?;
    Ok(WeakIsoVerdict::Isomorphic { moves, factors, composite })
}

// ------------------------------------------------------------ obstruction

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    Census,
    WeightMultisets { first: Vec<(i64, i64)>, second: Vec<(i64, i64)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffeoVerdict {
    Obstructed(Obstruction),
    NotObstructed,
}

impl fmt::Display for DiffeoVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffeoVerdict::NotObstructed => write!(f, "not obstructed by isotropy weights"),
            DiffeoVerdict::Obstructed(Obstruction::Census) => {
                write!(f, "equivariant diffeomorphism obstructed: fixed-point census")
            }
            DiffeoVerdict::Obstructed(Obstruction::WeightMultisets { .. }) => {
                write!(f, "equivariant diffeomorphism obstructed: weight multisets")
            }
        }
    }
}

impl DiffeoVerdict {
    pub fn to_json(&self) -> Value {
        match self {
            DiffeoVerdict::NotObstructed => json!({"verdict": "not_obstructed"}),
            DiffeoVerdict::Obstructed(Obstruction::Census) => json!({"verdict": "obstructed", "reason": "census"}),
            DiffeoVerdict::Obstructed(Obstruction::WeightMultisets { first, second }) => json!({
                "verdict": "obstructed",
                "reason": "weight_multisets",
                "first": first,
                "second": second,
            }),
        }
    }
}

pub fn negated_weights(w: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = w.iter().map(|&(a, b)| (-b, -a)).collect();
    out.sort();
    out
}

pub fn diffeo_obstruction(g1: &ExtendedGraph, g2: &ExtendedGraph) -> DiffeoVerdict {
    let census = |g: &ExtendedGraph| (g.iso(), g.fat_count(), g.genus);
    if census(g1) != census(g2) {
        return DiffeoVerdict::Obstructed(Obstruction::Census);
    }
    let (w1, w2) = (g1.isotropy_weights(), g2.isotropy_weights());
    if w1 == w2 || w1 == negated_weights(&w2) {
        DiffeoVerdict::NotObstructed
    } else {
        DiffeoVerdict::Obstructed(Obstruction::WeightMultisets { first: w1, second: w2 })
    }
}

/// The pair of graphs that differ by a partial flip of their second chain.
pub fn counterexample_pair() -> (ExtendedGraph, ExtendedGraph) {
    let chain = |ls: [i64; 4]| {
        let lens = [q(1, 2), qi(1), qi(1), q(1, 2)];
        Chain::new(ls.iter().zip(lens).map(|(&m, x)| Edge::new(m, x)).collect())
    };
    let m = ExtendedGraph {
        genus: 0,
        min: Extreme::Fat { height: qi(0), area: qi(1) },
        max: Extreme::Fat { height: qi(3), area: q(4, 3) },
        chains: vec![chain([1, 3, 2, 1]), chain([1, 3, 2, 1])],
    };
    let n = ExtendedGraph {
        genus: 0,
        min: Extreme::Fat { height: qi(0), area: qi(1) },
        max: Extreme::Fat { height: qi(3), area: qi(1) },
        chains: vec![chain([1, 3, 2, 1]), chain([1, 2, 3, 1])],
    };
    (m, n)
}
