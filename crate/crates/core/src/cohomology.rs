//! Generators and relations for the even equivariant cohomology, and the image of t.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph_model::{ExtendedGraph, FatShape, FixedComponent};
use crate::linalg::{rank_q, ColumnReduction};
use crate::localization::{euler_inverse, has_gen, integrate, intersect, restrict, ComponentValue, Laurent, RestrictionTuple};
use crate::rational::{as_i64, egcd, qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Tau0,
    TauInf,
    TauH,
    Sigma(usize, usize),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Tau0 => write!(f, "τ0"),
            Gen::TauInf => write!(f, "τ∞"),
            Gen::TauH => write!(f, "τh"),
            Gen::Sigma(i, j) => write!(f, "σ{i},{j}"),
        }
    }
}

impl Gen {
    pub fn parse(s: &str) -> Option<Gen> {
        let s = s.trim();
        match s {
            "τ0" | "tau0" | "t0" => return Some(Gen::Tau0),
            "τ∞" | "tauinf" | "tinf" => return Some(Gen::TauInf),
            "τh" | "tauh" | "th" => return Some(Gen::TauH),
            _ => {}
        }
        let rest = s.strip_prefix("σ").or_else(|| s.strip_prefix("sigma")).or_else(|| s.strip_prefix('s'))?;
        let rest = rest.trim_start_matches('(').trim_end_matches(')');
        let (a, b) = rest.split_once(',').or_else(|| rest.split_once('_'))?;
        Some(Gen::Sigma(a.trim().parse().ok()?, b.trim().parse().ok()?))
    }
}

/// Integer combination of generator symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CohClass2(pub BTreeMap<Gen, i64>);

impl CohClass2 {
    pub fn zero() -> Self {
        CohClass2(BTreeMap::new())
    }

    pub fn gen(x: Gen) -> Self {
        Self::term(x, 1)
    }

    pub fn term(x: Gen, c: i64) -> Self {
        let mut a = Self::zero();
        a.add_term(x, c);
        a
    }

    pub fn add_term(&mut self, x: Gen, c: i64) {
        let e = self.0.entry(x).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&x);
        }
    }

    pub fn coeff(&self, x: Gen) -> i64 {
        self.0.get(&x).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Gen, i64)> + '_ {
        self.0.iter().map(|(x, c)| (*x, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn plus(&self, o: &CohClass2) -> CohClass2 {
        let mut r = self.clone();
        for (x, c) in o.terms() {
            r.add_term(x, c);
        }
        r
    }

    pub fn minus(&self, o: &CohClass2) -> CohClass2 {
        self.plus(&o.scaled(-1))
    }

    pub fn scaled(&self, k: i64) -> CohClass2 {
        if k == 0 {
            return Self::zero();
        }
        CohClass2(self.0.iter().map(|(x, c)| (*x, c * k)).collect())
    }

    /// Parses expressions like "2σ1,1 - σ2,1 + τh" or "2*s1_1-s2_1".
    pub fn parse(s: &str) -> Option<CohClass2> {
        let mut out = CohClass2::zero();
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut tokens = Vec::new();
        let mut cur = String::new();
        for ch in cleaned.chars() {
            if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with(',') && !cur.ends_with('(') {
                tokens.push(cur.clone());
                cur.clear();
            }
            cur.push(ch);
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
        if tokens.is_empty() {
            return None;
        }
        for t in tokens {
            let (sign, body) = match t.strip_prefix('-') {
                Some(b) => (-1, b.to_string()),
                None => (1, t.trim_start_matches('+').to_string()),
            };
            if body == "0" {
                continue;
            }
            let split = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
            let (num, sym) = body.split_at(split);
            let c: i64 = if num.is_empty() { 1 } else { num.parse().ok()? };
            let sym = sym.trim_start_matches('*');
            out.add_term(Gen::parse(sym)?, sign * c);
        }
        Some(out)
    }
}

impl fmt::Display for CohClass2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (x, c)) in self.terms().enumerate() {
            let mag = c.abs();
            if n == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag != 1 {
                write!(f, "{mag}")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

pub fn generators(g: &ExtendedGraph) -> Vec<Gen> {
    let mut out = Vec::new();
    if g.min.is_fat() {
        out.push(Gen::Tau0);
    }
    if g.max.is_fat() {
        out.push(Gen::TauInf);
    }
    out.push(Gen::TauH);
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            out.push(Gen::Sigma(i, j));
        }
    }
    out
}

/// τ_h − Σ_j m_{i,j} σ_{i,j} for each chain i.
pub fn linear_relations(g: &ExtendedGraph) -> Vec<CohClass2> {
    (1..=g.k())
        .map(|i| {
            let mut r = CohClass2::gen(Gen::TauH);
            for j in 1..=g.ell(i) {
                r.add_term(Gen::Sigma(i, j), -g.m(i, j));
            }
            r
        })
        .collect()
}

/// Quotient of the generator lattice by the linear relations.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub gens: Vec<Gen>,
    red: ColumnReduction,
    pub basis: Vec<CohClass2>,
}

impl NormalForm {
    pub fn new(g: &ExtendedGraph) -> Result<Self> {
        let gens = generators(g);
        let col = |x: Gen| gens.iter().position(|&y| y == x).unwrap();
        let rels: Vec<Vec<i64>> = linear_relations(g)
            .iter()
            .map(|r| gens.iter().map(|&x| r.coeff(x)).collect())
            .collect();
        let mirrored = g.shape() == FatShape::MinOnly;
        let mut prefs = Vec::new();
        for i in 1..=g.k() {
            let l = g.ell(i);
            let (near, far) = if mirrored { (l, 1) } else { (1, l) };
            let mut p = Vec::new();
            if i == 1 {
                p.push(col(Gen::TauH));
            } else if i == 2 {
                p.push(col(Gen::Sigma(2, far)));
                p.push(col(Gen::Sigma(2, near)));
            } else {
                p.push(col(Gen::Sigma(i, near)));
                p.push(col(Gen::Sigma(i, far)));
            }
            for j in 1..=l {
                p.push(col(Gen::Sigma(i, j)));
            }
            prefs.push(p);
        }
        let red = ColumnReduction::new(&rels, gens.len(), &prefs);
        if !red.unimodular() {
            return Err(Error::BugTrap("linear relations do not have a free quotient".into()));
        }
        let basis = red
            .free_columns()
            .into_iter()
            .map(|j| {
                let row = red.basis_row(j);
                let mut c = CohClass2::zero();
                for (k, &x) in gens.iter().enumerate() {
                    c.add_term(x, row[k]);
                }
                c
            })
            .collect();
        Ok(NormalForm { gens, red, basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, c: &CohClass2) -> Result<Vec<i64>> {
        let mut v = vec![0i64; self.gens.len()];
        for (x, k) in c.terms() {
            let p = self.gens.iter().position(|&y| y == x).ok_or_else(|| Error::Symbol(x.to_string()))?;
            v[p] += k;
        }
        Ok(self.red.coords(&v))
    }

    /// The class Σ coords·basis.
    pub fn class_of(&self, coords: &[i64]) -> CohClass2 {
        let mut c = CohClass2::zero();
        for (b, &k) in self.basis.iter().zip(coords) {
            c = c.plus(&b.scaled(k));
        }
        c
    }

    pub fn equal(&self, a: &CohClass2, b: &CohClass2) -> Result<bool> {
        Ok(self.coords(a)? == self.coords(b)?)
    }
}

pub fn normal_form(g: &ExtendedGraph, c: &CohClass2) -> Result<Vec<i64>> {
    NormalForm::new(g)?.coords(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BCoefficients {
    /// b[i-1][j-1] = b_{i,j}
    pub b: Vec<Vec<i64>>,
    /// Coefficient of τ_h in π*(t).
    pub c: i64,
    /// Chains whose recursion runs in the orientation opposite to the textbook one.
    pub sign_corrected: Vec<usize>,
}

impl BCoefficients {
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.b[i - 1][j - 1]
    }
}

/// Particular solution and homogeneous generator of
/// b_j m_{j+1} − b_{j+1} m_j = 1 along chain i.
fn chain_solution(g: &ExtendedGraph, i: usize) -> Result<(Vec<i64>, Vec<i64>)> {
    let l = g.ell(i);
    let m: Vec<i64> = (1..=l).map(|j| g.m(i, j)).collect();
    if l == 1 {
        return Ok((vec![0], vec![1]));
    }
    let (d, x, _) = egcd(m[1], m[0]);
    if d != 1 {
        return Err(Error::BugTrap(format!("labels {} and {} not coprime on chain {i}", m[0], m[1])));
    }
    let mut b = vec![x.rem_euclid(m[0])];
    for j in 0..l - 1 {
        let num = b[j] * m[j + 1] - 1;
        if num % m[j] != 0 {
            return Err(Error::BugTrap(format!("b-recursion not exact on chain {i} at {j}")));
        }
        b.push(num / m[j]);
    }
    Ok((b, m))
}

pub fn b_coefficients(g: &ExtendedGraph) -> Result<BCoefficients> {
    let k = g.k();
    let sols: Vec<(Vec<i64>, Vec<i64>)> = (1..=k).map(|i| chain_solution(g, i)).collect::<Result<_>>()?;
    let (emin, emax) = g.extremal_self_intersections();
    let sign_corrected: Vec<usize> = (1..=k).filter(|&i| g.ell(i) >= 2).collect();
    let (c, s): (i64, Vec<i64>) = if g.shape() == FatShape::Both {
        let c = as_i64(&emin).ok_or_else(|| Error::BugTrap("e_min not integral".into()))?;
        let s = sols.iter().map(|(b0, h)| -b0[0] / h[0]).collect();
        (c, s)
    } else {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let first = |n: usize| (sols[n].0[0], sols[n].1[0]);
        let last = |n: usize| (*sols[n].0.last().unwrap(), *sols[n].1.last().unwrap());
        if g.min.is_fat() {
            // Σ b_{i,1} = −e_min
            let e = as_i64(&emin).ok_or_else(|| Error::BugTrap("e_min not integral".into()))?;
            rows.push((0..k).map(|n| first(n).1).collect::<Vec<_>>());
            rhs.push(-e - (0..k).map(|n| first(n).0).sum::<i64>());
        } else {
            // −Σ b_{i,1} m_{i,0} = 1
            rows.push((0..k).map(|n| -first(n).1 * g.m_signed(n + 1, 0)).collect());
            rhs.push(1 + (0..k).map(|n| first(n).0 * g.m_signed(n + 1, 0)).sum::<i64>());
        }
        if g.max.is_fat() {
            let e = as_i64(&emax).ok_or_else(|| Error::BugTrap("e_max not integral".into()))?;
            rows.push((0..k).map(|n| last(n).1).collect());
            rhs.push(e - (0..k).map(|n| last(n).0).sum::<i64>());
        } else {
            rows.push((0..k).map(|n| last(n).1 * g.m_signed(n + 1, g.ell(n + 1) + 1)).collect());
            rhs.push(1 - (0..k).map(|n| last(n).0 * g.m_signed(n + 1, g.ell(n + 1) + 1)).sum::<i64>());
        }
        let s = crate::linalg::solve_int(&rows, &rhs)
            .ok_or_else(|| Error::BugTrap("no sign assignment passes oracle".into()))?;
        (0, s)
    };
    let b: Vec<Vec<i64>> = sols
        .iter()
        .zip(&s)
        .map(|((b0, h), s)| b0.iter().zip(h).map(|(x, y)| x + s * y).collect())
        .collect();
    let out = BCoefficients { b, c, sign_corrected };
    let pi = assemble_pi(g, &out);
    let r = restrict(g, &pi)?;
    if r != RestrictionTuple::t(g) {
        return Err(Error::BugTrap(format!("π*(t) fails the restriction oracle: {r}")));
    }
    Ok(out)
}

fn assemble_pi(g: &ExtendedGraph, b: &BCoefficients) -> CohClass2 {
    let mut p = CohClass2::zero();
    if g.max.is_fat() {
        p.add_term(Gen::TauInf, 1);
    }
    if g.min.is_fat() {
        p.add_term(Gen::Tau0, -1);
    }
    p.add_term(Gen::TauH, b.c);
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            p.add_term(Gen::Sigma(i, j), -b.get(i, j));
        }
    }
    p
}

/// π*(t) = τ∞ − τ₀ + c·τ_h − Σ b_{i,j} σ_{i,j}.
pub fn pi_star_t(g: &ExtendedGraph) -> Result<CohClass2> {
    Ok(assemble_pi(g, &b_coefficients(g)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProductSource {
    /// Listed in the explicit quotient.
    Listed,
    /// Two classes whose restrictions have disjoint supports.
    Disjoint,
    /// The extra cubic relation of CP².
    Cp2Triple,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductRelation {
    pub factors: Vec<Gen>,
    pub source: ProductSource,
}

#[derive(Clone, Debug)]
pub struct Presentation {
    pub gens: Vec<Gen>,
    pub linear: Vec<CohClass2>,
    pub products: Vec<ProductRelation>,
    pub pi_star: CohClass2,
    pub b: BCoefficients,
    pub nf: NormalForm,
}

fn listed_products(g: &ExtendedGraph) -> Vec<Vec<Gen>> {
    use Gen::*;
    let mut out: Vec<Vec<Gen>> = Vec::new();
    let k = g.k();
    let both = g.min.is_fat() && g.max.is_fat();
    if both {
        out.push(vec![Tau0, TauInf]);
        out.push(vec![TauH, TauH]);
    }
    for i in 1..=k {
        let l = g.ell(i);
        for j in 1..=l {
            if g.min.is_fat() && j >= 2 {
                out.push(vec![Tau0, Sigma(i, j)]);
            }
            if g.max.is_fat() && j + 1 <= l {
                out.push(vec![TauInf, Sigma(i, j)]);
            }
            for n in j + 2..=l {
                out.push(vec![Sigma(i, j), Sigma(i, n)]);
            }
        }
    }
    for i in 1..=k {
        for a in i + 1..=k {
            let (li, la) = (g.ell(i), g.ell(a));
            for j in 2..li {
                for n in 2..la {
                    out.push(vec![Sigma(i, j), Sigma(a, n)]);
                }
            }
            // a pair of single-edge chains also meets at the other, isolated, extreme
            let both_short = li == 1 && la == 1;
            if g.min.is_fat() && !(both_short && !g.max.is_fat()) {
                out.push(vec![Sigma(i, 1), Sigma(a, 1)]);
            }
            if g.max.is_fat() && !(both_short && !g.min.is_fat()) {
                out.push(vec![Sigma(i, li), Sigma(a, la)]);
            }
        }
    }
    out
}

fn gen_restrictions(g: &ExtendedGraph, gens: &[Gen]) -> Result<BTreeMap<Gen, RestrictionTuple>> {
    gens.iter().map(|&x| Ok((x, restrict(g, &CohClass2::gen(x))?))).collect()
}

/// Whether the graph is a minimal CP² model (no blowdown possible).
pub fn is_minimal_cp2(g: &ExtendedGraph) -> bool {
    let (h, _) = g.normalized();
    matches!(
        crate::surgery::reduce_to_minimal(&h),
        Ok((crate::surgery::MinimalModelId::CP2 { .. }, ref recs)) if recs.is_empty()
    )
}

pub fn cp2_triple(g: &ExtendedGraph) -> Vec<Gen> {
    match g.shape() {
        FatShape::MaxOnly => vec![Gen::TauInf, Gen::Sigma(1, 1), Gen::Sigma(2, 1)],
        FatShape::MinOnly => vec![Gen::Tau0, Gen::Sigma(1, g.ell(1)), Gen::Sigma(2, g.ell(2))],
        _ => {
            let mut v = Vec::new();
            for i in 1..=g.k() {
                for j in 1..=g.ell(i) {
                    v.push(Gen::Sigma(i, j));
                }
            }
            v
        }
    }
}

pub fn presentation(g: &ExtendedGraph) -> Result<Presentation> {
    let gens = generators(g);
    let res = gen_restrictions(g, &gens)?;
    let mut products: BTreeSet<ProductRelation> = BTreeSet::new();
    let mut seen: BTreeSet<Vec<Gen>> = BTreeSet::new();
    for f in listed_products(g) {
        let mut key = f.clone();
        key.sort();
        if seen.insert(key.clone()) {
            products.insert(ProductRelation { factors: key, source: ProductSource::Listed });
        }
    }
    for (n, &x) in gens.iter().enumerate() {
        for &y in &gens[n..] {
            let sx: BTreeSet<FixedComponent> = res[&x].support().into_iter().collect();
            let sy: BTreeSet<FixedComponent> = res[&y].support().into_iter().collect();
            if sx.is_disjoint(&sy) && seen.insert(vec![x, y]) {
                products.insert(ProductRelation { factors: vec![x, y], source: ProductSource::Disjoint });
            }
        }
    }
    if is_minimal_cp2(g) {
        let mut t = cp2_triple(g);
        t.sort();
        products.insert(ProductRelation { factors: t, source: ProductSource::Cp2Triple });
    }
    let b = b_coefficients(g)?;
    let pi_star = assemble_pi(g, &b);
    Ok(Presentation {
        gens,
        linear: linear_relations(g),
        products: products.into_iter().collect(),
        pi_star,
        b,
        nf: NormalForm::new(g)?,
    })
}

impl Presentation {
    pub fn to_json(&self) -> Value {
        let names = |v: &[Gen]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let products: Vec<Value> = self
            .products
            .iter()
            .map(|p| json!({ "factors": names(&p.factors), "source": format!("{:?}", p.source) }))
            .collect();
        let coords = self.nf.coords(&self.pi_star).unwrap_or_default();
        json!({
            "generators": names(&self.gens),
            "basis": self.nf.basis.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            "linear": self.linear.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "products": products,
            "pi_star": self.pi_star.to_string(),
            "pi_star_normal_form": self.nf.class_of(&coords).to_string(),
        })
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        s.push_str("generators: ");
        s.push_str(&self.gens.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        s.push('\n');
        s.push_str("basis: ");
        s.push_str(&self.nf.basis.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        s.push('\n');
        for r in &self.linear {
            s.push_str(&format!("linear: {r} = 0\n"));
        }
        for p in &self.products {
            let f: Vec<String> = p.factors.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("product: {} = 0 ({:?})\n", f.join("·"), p.source));
        }
        let coords = self.nf.coords(&self.pi_star).unwrap_or_default();
        s.push_str(&format!("pi*(t) = {} ~ {}\n", self.pi_star, self.nf.class_of(&coords)));
        if !self.b.sign_corrected.is_empty() {
            s.push_str(&format!("sign-corrected chains: {:?}\n", self.b.sign_corrected));
        }
        s
    }
}

/// Polynomial of a product of degree-2 classes in normal-form coordinates,
/// as a map from sorted basis-index tuples to coefficients.
pub fn product_polynomial(nf: &NormalForm, factors: &[CohClass2]) -> Result<BTreeMap<Vec<usize>, i64>> {
    let mut poly: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    poly.insert(vec![], 1);
    for f in factors {
        let c = nf.coords(f)?;
        let mut next: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (mono, k) in &poly {
            for (a, &ca) in c.iter().enumerate() {
                if ca == 0 {
                    continue;
                }
                let mut m = mono.clone();
                m.push(a);
                m.sort();
                *next.entry(m).or_insert(0) += k * ca;
            }
        }
        next.retain(|_, v| *v != 0);
        poly = next;
    }
    Ok(poly)
}

/// Rank of the degree-4 part of the presented ring: Sym² of the basis
/// modulo the quadratic product relations.
pub fn degree4_quotient_rank(p: &Presentation) -> Result<usize> {
    let n = p.nf.rank();
    let monos: Vec<Vec<usize>> = (0..n).flat_map(|a| (a..n).map(move |b| vec![a, b])).collect();
    let mut rows = Vec::new();
    for r in p.products.iter().filter(|r| r.factors.len() == 2) {
        let f: Vec<CohClass2> = r.factors.iter().map(|&x| CohClass2::gen(x)).collect();
        let poly = product_polynomial(&p.nf, &f)?;
        rows.push(monos.iter().map(|m| qi(poly.get(m).copied().unwrap_or(0))).collect::<Vec<Q>>());
    }
    Ok(monos.len() - rank_q(&rows))
}

/// Rank of the span of restrictions of all quadratic monomials in the generators.
pub fn degree4_image_rank(g: &ExtendedGraph) -> Result<usize> {
    let gens = generators(g);
    let res = gen_restrictions(g, &gens)?;
    let mut rows = Vec::new();
    for (n, x) in gens.iter().enumerate() {
        for y in &gens[n..] {
            let r = res[x].mul(&res[y]);
            let mut row = Vec::new();
            for v in r.0.values() {
                match v {
                    ComponentValue::Point(l) => row.push(l.coeff(2)),
                    ComponentValue::Surface { p, q } => {
                        row.push(p.coeff(2));
                        row.push(q.coeff(1));
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(rank_q(&rows))
}

#[derive(Clone, Debug)]
pub struct ChernData {
    pub c1: CohClass2,
    pub c1sq_minus_2c2: i64,
    pub euler: i64,
    /// (k−2)·τ_h² − Σ_{i≥3} z_i², zero when the identity holds.
    pub eqc3_defect: i64,
}

pub fn chern_c1(g: &ExtendedGraph) -> CohClass2 {
    let mut c1 = CohClass2::zero();
    if g.min.is_fat() {
        c1.add_term(Gen::Tau0, 1);
    }
    if g.max.is_fat() {
        c1.add_term(Gen::TauInf, 1);
    }
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            c1.add_term(Gen::Sigma(i, j), 1);
        }
    }
    c1.add_term(Gen::TauH, -(2 * g.genus as i64 + g.k() as i64 - 2));
    c1
}

pub fn chern_classes(g: &ExtendedGraph) -> Result<ChernData> {
    let c1 = chern_c1(g);
    let sq = |x: Gen| intersect(g, &CohClass2::gen(x), &CohClass2::gen(x));
    let mut a = 0;
    if g.min.is_fat() {
        a += sq(Gen::Tau0)?;
    }
    if g.max.is_fat() {
        a += sq(Gen::TauInf)?;
    }
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            a += sq(Gen::Sigma(i, j))?;
        }
    }
    let k2 = g.k() as i64 - 2;
    let th2 = sq(Gen::TauH)?;
    a -= k2 * th2;
    let mut z2 = 0;
    for i in 3..=g.k() {
        match g.shape() {
            FatShape::MaxOnly => z2 += sq(Gen::Sigma(i, 1))?,
            FatShape::MinOnly => z2 += sq(Gen::Sigma(i, g.ell(i)))?,
            _ => {}
        }
    }
    let fat_chi: i64 = g.fat_count() as i64 * (2 - 2 * g.genus as i64);
    Ok(ChernData { c1, c1sq_minus_2c2: a, euler: g.iso() as i64 + fat_chi, eqc3_defect: k2 * th2 - z2 })
}

/// c₁ at each fixed component from the isotropy data alone.
pub fn chern_fixed_point_data(g: &ExtendedGraph) -> RestrictionTuple {
    let (emin, emax) = g.extremal_self_intersections();
    let chi = qi(2 - 2 * g.genus as i64);
    let mut out = BTreeMap::new();
    for c in g.components() {
        let v = match g.weights_at(c) {
            Some((w1, w2)) => ComponentValue::Point(Laurent::mono(qi(-w1 - w2), 1)),
            None => {
                let (e, s) = if c == FixedComponent::Min { (&emin, -1) } else { (&emax, 1) };
                ComponentValue::Surface { p: Laurent::mono(qi(s), 1), q: Laurent::constant(&chi + e) }
            }
        };
        out.insert(c, v);
    }
    RestrictionTuple(out)
}

/// ∫(c₁² − 2c₂) from the fixed-point data, without the generators.
pub fn c1sq_minus_2c2_fixed_points(g: &ExtendedGraph) -> Result<Q> {
    let (emin, emax) = g.extremal_self_intersections();
    let mut out = BTreeMap::new();
    for c in g.components() {
        let v = match g.weights_at(c) {
            Some((w1, w2)) => ComponentValue::Point(Laurent::mono(qi(w1 * w1 + w2 * w2), 2)),
            None => {
                let (e, s) = if c == FixedComponent::Min { (&emin, -2) } else { (&emax, 2) };
                ComponentValue::Surface { p: Laurent::mono(qi(1), 2), q: Laurent::mono(qi(s) * e, 1) }
            }
        };
        out.insert(c, v);
    }
    let l = integrate(g, &RestrictionTuple(out))?;
    Ok(l.coeff(0))
}

/// Sanity hook used by tests: the Euler inverse at a component times the
/// Euler class is one.
pub fn euler_check(g: &ExtendedGraph, c: FixedComponent) -> bool {
    let inv = euler_inverse(g, c);
    let e = match g.weights_at(c) {
        Some((w1, w2)) => ComponentValue::Point(Laurent::mono(qi(w1 * w2), 2)),
        None => {
            let (emin, emax) = g.extremal_self_intersections();
            if c == FixedComponent::Min {
                ComponentValue::Surface { p: Laurent::mono(qi(-1), 1), q: Laurent::constant(emin) }
            } else {
                ComponentValue::Surface { p: Laurent::mono(qi(1), 1), q: Laurent::constant(emax) }
            }
        }
    };
    let prod = inv.mul(&e);
    prod == ComponentValue::one_like(!g.is_point(c))
}

pub fn check_symbols(g: &ExtendedGraph, c: &CohClass2) -> Result<()> {
    for (x, _) in c.terms() {
        if !has_gen(g, x) {
            return Err(Error::Symbol(x.to_string()));
        }
    }
    Ok(())
}
