//! Minimal models, equivariant blowups and blowdowns of extended graphs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::cohomology::{CohClass2, Gen};
use crate::error::{Error, Result};
use crate::graph_model::{build_extended, Chain, DecEdge, Decorated, Edge, ExtendedGraph, Extreme, FatShape, FixedComponent};
use crate::rational::{fmt_q, gcd, parse_q, q, qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Min,
    Max,
}

impl End {
    pub fn name(self) -> &'static str {
        match self {
            End::Min => "min",
            End::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<End> {
        match s {
            "min" => Some(End::Min),
            "max" => Some(End::Max),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlowupSite {
    /// The interior vertex v_{i,j} (1-based).
    Interior { i: usize, j: usize },
    /// An isolated extreme; type III, or IV when both weights are 1.
    IsolatedExtreme(End),
    /// A point of a fixed surface off every chain; type II.
    FatExtreme(End),
}

impl BlowupSite {
    /// "i,j" for an interior vertex, "isolated-min", "fat-max" and so on.
    pub fn parse(s: &str) -> Option<BlowupSite> {
        if let Some((kind, end)) = s.split_once('-') {
            let e = End::parse(end)?;
            return match kind {
                "isolated" => Some(BlowupSite::IsolatedExtreme(e)),
                "fat" => Some(BlowupSite::FatExtreme(e)),
                _ => None,
            };
        }
        let (i, j) = parse_pair(s)?;
        Some(BlowupSite::Interior { i, j })
    }
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let s = s.trim().trim_start_matches(['v', '(']).trim_end_matches(')');
    let (i, j) = s.split_once(',')?;
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

impl fmt::Display for BlowupSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowupSite::Interior { i, j } => write!(f, "v({i},{j})"),
            BlowupSite::IsolatedExtreme(e) => write!(f, "isolated {}", e.name()),
            BlowupSite::FatExtreme(e) => write!(f, "fat {}", e.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlowupType {
    I,
    II,
    III,
    IV,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupRecord {
    pub site: BlowupSite,
    pub kind: BlowupType,
    pub lambda: Q,
    /// chain_map[old] = new chain index (0-based); None for a dropped [1] chain.
    pub chain_map: Vec<Option<usize>>,
    /// (old chain, position) where the new edge was inserted, in old edge indexing.
    pub inserted: Option<(usize, usize)>,
    /// Index (0-based, after) of a chain created by the move.
    pub new_chain: Option<usize>,
    /// The class of the exceptional divisor in the blown-up graph.
    pub exceptional: Gen,
}

impl BlowupRecord {
    pub fn to_json(&self) -> Value {
        let site = match self.site {
            BlowupSite::Interior { i, j } => json!({ "interior": [i, j] }),
            BlowupSite::IsolatedExtreme(e) => json!({ "isolated": e.name() }),
            BlowupSite::FatExtreme(e) => json!({ "fat": e.name() }),
        };
        json!({ "type": format!("{:?}", self.kind), "site": site, "lambda": fmt_q(&self.lambda) })
    }
}

impl fmt::Display for BlowupRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {:?} at {}, λ = {}, e = {}", self.kind, self.site, fmt_q(&self.lambda), self.exceptional)
    }
}

/// Reads a "history" array into (site, λ) pairs.
pub fn history_from_json(v: &Value) -> Result<Vec<(BlowupSite, Q)>> {
    let perr = |p: String, m: &str| Error::Parse { path: p, msg: m.to_string() };
    let arr = v.as_array().ok_or_else(|| perr("history".into(), "expected an array"))?;
    let mut out = Vec::new();
    for (n, r) in arr.iter().enumerate() {
        let p = format!("history[{n}]");
        let site = r.get("site").ok_or_else(|| perr(format!("{p}.site"), "missing"))?;
        let s = if let Some(ij) = site.get("interior").and_then(Value::as_array) {
            let get = |k: usize| ij.get(k).and_then(Value::as_u64).map(|x| x as usize);
            match (get(0), get(1)) {
                (Some(i), Some(j)) => BlowupSite::Interior { i, j },
                _ => return Err(perr(format!("{p}.site.interior"), "expected [i, j]")),
            }
        } else if let Some(e) = site.get("isolated").and_then(Value::as_str).and_then(End::parse) {
            BlowupSite::IsolatedExtreme(e)
        } else if let Some(e) = site.get("fat").and_then(Value::as_str).and_then(End::parse) {
            BlowupSite::FatExtreme(e)
        } else {
            return Err(perr(format!("{p}.site"), "unknown site"));
        };
        let l = r
            .get("lambda")
            .and_then(Value::as_str)
            .ok_or_else(|| perr(format!("{p}.lambda"), "expected a rational string"))?;
        out.push((s, parse_q(l).map_err(|e| perr(format!("{p}.lambda"), &e))?));
    }
    Ok(out)
}

pub fn history_to_json(recs: &[BlowupRecord]) -> Value {
    Value::Array(recs.iter().map(|r| r.to_json()).collect())
}

// ---------------------------------------------------------------- minimal models

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimalModelId {
    CP2 { m: i64, n: i64, lambda: Q },
    Hirzebruch { twist: i64, m: i64, n: i64, beta: Q, f: Q },
    Ruled { genus: u32, fiber: Q, base: Q, e_min: i64 },
}

impl MinimalModelId {
    pub fn graph(&self) -> Result<ExtendedGraph> {
        match self {
            MinimalModelId::CP2 { m, n, lambda } => minimal_cp2(*m, *n, lambda),
            MinimalModelId::Hirzebruch { twist, m, n, beta, f } => minimal_hirzebruch(*twist, *m, *n, beta, f),
            MinimalModelId::Ruled { genus, fiber, base, e_min } => minimal_ruled(*genus, fiber, base, *e_min),
        }
    }

    pub fn is_cp2(&self) -> bool {
        matches!(self, MinimalModelId::CP2 { .. })
    }
}

impl fmt::Display for MinimalModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimalModelId::CP2 { m, n, lambda } => write!(f, "CP2(m={m}, n={n}, λ={})", fmt_q(lambda)),
            MinimalModelId::Hirzebruch { twist, m, n, beta, f: ff } => {
                write!(f, "Hirzebruch(N={twist}, m={m}, n={n}, β={}, f={})", fmt_q(beta), fmt_q(ff))
            }
            MinimalModelId::Ruled { genus, fiber, base, e_min } => {
                write!(f, "Ruled(g={genus}, fiber={}, base={}, e_min={e_min}, parity={})", fmt_q(fiber), fmt_q(base), e_min.rem_euclid(2))
            }
        }
    }
}

/// Primitive integer direction and affine length of a rational vector.
fn primitive(dx: &Q, dy: &Q) -> ((i64, i64), Q) {
    let den = dx.denom().lcm(dy.denom());
    let ix: i64 = (dx * Q::from_integer(den.clone())).to_integer().try_into().unwrap();
    let iy: i64 = (dy * Q::from_integer(den.clone())).to_integer().try_into().unwrap();
    let g = gcd(ix, iy);
    let den: i64 = den.try_into().unwrap();
    ((ix / g, iy / g), q(g, den))
}

/// Extended graph of the circle (m,n) inside the torus acting on a Delzant polygon.
pub fn project_polygon(verts: &[(Q, Q)], m: i64, n: i64) -> Result<ExtendedGraph> {
    let nv = verts.len();
    let h: Vec<Q> = verts.iter().map(|(x, y)| x * qi(m) + y * qi(n)).collect();
    let ymin = h.iter().min().unwrap().clone();
    let ymax = h.iter().max().unwrap().clone();
    let mut min = Extreme::Isolated { height: ymin.clone() };
    let mut max = Extreme::Isolated { height: ymax.clone() };
    let mut edges = Vec::new();
    let id = |k: usize| -> String {
        if h[k] == ymin {
            "min".into()
        } else if h[k] == ymax {
            "max".into()
        } else {
            format!("p{k}")
        }
    };
    for k in 0..nv {
        let k2 = (k + 1) % nv;
        let (u, len) = primitive(&(&verts[k2].0 - &verts[k].0), &(&verts[k2].1 - &verts[k].1));
        let label = (m * u.0 + n * u.1).abs();
        if label == 0 {
            let fat = Extreme::Fat { height: h[k].clone(), area: len };
            if h[k] == ymin {
                min = fat;
            } else {
                max = fat;
            }
        } else if label >= 2 {
            edges.push(DecEdge { from: id(k), to: id(k2), m: label });
        }
    }
    let vertices = (0..nv).filter(|&k| h[k] != ymin && h[k] != ymax).map(|k| (id(k), h[k].clone())).collect();
    build_extended(&Decorated { genus: 0, min, max, vertices, edges })
}

fn check_coprime(m: i64, n: i64) -> Result<()> {
    if gcd(m, n) != 1 {
        return Err(Error::Constraint(format!("gcd({m}, {n}) must be 1")));
    }
    Ok(())
}

pub fn minimal_cp2(m: i64, n: i64, lambda: &Q) -> Result<ExtendedGraph> {
    check_coprime(m, n)?;
    if !lambda.is_positive() {
        return Err(Error::Constraint("λ must be positive".into()));
    }
    let z = Q::zero();
    project_polygon(&[(z.clone(), z.clone()), (lambda.clone(), z.clone()), (z, lambda.clone())], m, n)
}

pub fn minimal_hirzebruch(twist: i64, m: i64, n: i64, beta: &Q, f: &Q) -> Result<ExtendedGraph> {
    check_coprime(m, n)?;
    if twist < 0 {
        return Err(Error::Constraint("N must be non-negative".into()));
    }
    if !f.is_positive() {
        return Err(Error::Constraint("f must be positive".into()));
    }
    let half = qi(twist) * f / qi(2);
    if !(beta - &half).is_positive() {
        return Err(Error::Constraint("β − N·f/2 must be positive".into()));
    }
    let z = Q::zero();
    let verts = [
        (z.clone(), z.clone()),
        (beta + &half, z.clone()),
        (beta - &half, f.clone()),
        (z, f.clone()),
    ];
    project_polygon(&verts, m, n)
}

pub fn minimal_ruled(genus: u32, fiber: &Q, base: &Q, e_min: i64) -> Result<ExtendedGraph> {
    if !fiber.is_positive() || !base.is_positive() {
        return Err(Error::Constraint("sizes must be positive".into()));
    }
    let d = qi(e_min) * fiber / qi(2);
    let (amin, amax) = (base + &d, base - &d);
    if !amin.is_positive() || !amax.is_positive() {
        return Err(Error::Constraint(format!("derived areas {} and {} must be positive", fmt_q(&amin), fmt_q(&amax))));
    }
    let chain = Chain::new(vec![Edge::new(1, fiber.clone())]);
    Ok(ExtendedGraph {
        genus,
        min: Extreme::Fat { height: Q::zero(), area: amin },
        max: Extreme::Fat { height: fiber.clone(), area: amax },
        chains: vec![chain.clone(), chain],
    })
}

fn euler_char(g: &ExtendedGraph) -> i64 {
    g.iso() as i64 + g.fat_count() as i64 * (2 - 2 * g.genus as i64)
}

fn label_multiset(g: &ExtendedGraph) -> Vec<i64> {
    let mut v: Vec<i64> = g.chains.iter().flat_map(|c| c.labels()).collect();
    v.sort();
    v
}

fn sizes(g: &ExtendedGraph) -> BTreeSet<Q> {
    let mut s: BTreeSet<Q> = g.chains.iter().flat_map(|c| c.edges.iter().map(|e| &e.len / qi(e.m))).collect();
    for x in [&g.min, &g.max] {
        if x.is_fat() {
            s.insert(x.area());
        }
    }
    s
}

fn signed_candidates(g: &ExtendedGraph) -> Vec<i64> {
    let mut ls: BTreeSet<i64> = g.chains.iter().flat_map(|c| c.labels()).collect();
    ls.insert(1);
    let mut out = vec![0];
    for l in ls {
        out.push(l);
        out.push(-l);
    }
    out
}

fn poly_labels(ls: &[i64]) -> Vec<i64> {
    let mut v: Vec<i64> = ls.iter().map(|x| x.abs()).filter(|&x| x != 0).collect();
    v.sort();
    v
}

/// Identifies a graph with one of the minimal models, if it is one.
pub fn match_model(g: &ExtendedGraph, cp2_only: bool) -> Option<MinimalModelId> {
    let gn = g.normalized().0;
    let chi = euler_char(&gn);
    let same = |x: Result<ExtendedGraph>| x.map(|x| x.normalized().0 == gn).unwrap_or(false);
    if gn.genus == 0 && chi == 3 {
        let labels = label_multiset(&gn);
        let cands = signed_candidates(&gn);
        let sz = sizes(&gn);
        for &m in &cands {
            for &n in &cands {
                if gcd(m, n) != 1 || poly_labels(&[m, n, m - n]) != labels {
                    continue;
                }
                for l in &sz {
                    if same(minimal_cp2(m, n, l)) {
                        return Some(MinimalModelId::CP2 { m, n, lambda: l.clone() });
                    }
                }
            }
        }
        return None;
    }
    if cp2_only {
        return None;
    }
    if gn.shape() == FatShape::Both && gn.k() == 2 && gn.chains.iter().all(|c| c.is_trivial()) {
        let (emin, _) = gn.extremal_self_intersections();
        let e: i64 = crate::rational::as_i64(&emin)?;
        let fiber = gn.y_max().clone();
        let base = (gn.min.area() + gn.max.area()) / qi(2);
        if gn.genus > 0 {
            let id = MinimalModelId::Ruled { genus: gn.genus, fiber, base, e_min: e };
            return if same(id.graph()) { Some(id) } else { None };
        }
        for n in [1, -1] {
            let id = MinimalModelId::Hirzebruch { twist: e.abs(), m: 0, n, beta: base.clone(), f: fiber.clone() };
            if same(id.graph()) {
                return Some(id);
            }
        }
        return None;
    }
    if gn.genus == 0 && chi == 4 {
        let labels = label_multiset(&gn);
        let cands = signed_candidates(&gn);
        let sz = sizes(&gn);
        let maxl = labels.iter().copied().max().unwrap_or(1);
        for &m in &cands {
            for &n in &cands {
                if gcd(m, n) != 1 {
                    continue;
                }
                for twist in 0..=2 * maxl + 1 {
                    if poly_labels(&[m, m, n, n - m * twist]) != labels {
                        continue;
                    }
                    for f in &sz {
                        let half = qi(twist) * f / qi(2);
                        for s in &sz {
                            for beta in [s - &half, s + &half] {
                                if same(minimal_hirzebruch(twist, m, n, &beta, f)) {
                                    return Some(MinimalModelId::Hirzebruch { twist, m, n, beta, f: f.clone() });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------- blowup

/// Min at 0, max at the chain total, chains sorted. Returns perm[new] = old.
fn settle(mut g: ExtendedGraph) -> (ExtendedGraph, Vec<usize>) {
    let h = g.chains[0].total();
    g.min = g.min.with_height(Q::zero());
    g.max = g.max.with_height(h);
    let p = g.sort_chains();
    (g, p)
}

/// Drops or adds trivial [1] chains to reach the canonical count.
fn repad(g: &mut ExtendedGraph) -> Vec<Option<usize>> {
    let h = g.chains.iter().find(|c| !c.is_trivial()).map(|c| c.total()).unwrap_or_else(|| g.chains[0].total());
    let nontrivial = g.chains.iter().filter(|c| !c.is_trivial()).count();
    let want = if g.fat_count() >= 1 { 2usize.saturating_sub(nontrivial) } else { 0 };
    let mut kept = 0;
    let mut chains = Vec::new();
    let mut map = Vec::new();
    for c in &g.chains {
        if c.is_trivial() {
            if kept < want {
                kept += 1;
                map.push(Some(chains.len()));
                chains.push(c.clone());
            } else {
                map.push(None);
            }
        } else {
            map.push(Some(chains.len()));
            chains.push(c.clone());
        }
    }
    while kept < want {
        kept += 1;
        chains.push(Chain::new(vec![Edge::new(1, h.clone())]));
    }
    g.chains = chains;
    map
}

fn invalid(msg: String) -> Error {
    Error::InvalidBlowup(msg)
}

struct Raw {
    g: ExtendedGraph,
    map: Vec<Option<usize>>,
    inserted: Option<(usize, usize)>,
    new_chain: Option<usize>,
    /// exceptional: (raw chain, raw edge) or the fat end (in raw orientation: min).
    e_edge: Option<(usize, usize)>,
    kind: BlowupType,
}

fn identity_map(k: usize) -> Vec<Option<usize>> {
    (0..k).map(Some).collect()
}

/// Blowup at the min of a raw graph (already mirrored when the site is the max).
fn blowup_at_min(g: &ExtendedGraph, fat_site: bool, lambda: &Q) -> Result<Raw> {
    let k = g.k();
    let mut r = g.clone();
    if fat_site {
        let area = g.min.area();
        let h = g.y_max() - g.y_min();
        if *lambda >= area {
            return Err(invalid(format!("λ = {} must be below the area {}", fmt_q(lambda), fmt_q(&area))));
        }
        if *lambda >= h {
            return Err(invalid(format!("new vertex at {} surpasses the max", fmt_q(lambda))));
        }
        r.min = Extreme::Fat { height: Q::zero(), area: &area - lambda };
        r.chains.push(Chain::new(vec![Edge::new(1, lambda.clone()), Edge::new(1, &h - lambda)]));
        let pad = repad(&mut r);
        let new_chain = pad[k].unwrap();
        let map = pad[..k].to_vec();
        return Ok(Raw { g: r, map, inserted: None, new_chain: Some(new_chain), e_edge: Some((new_chain, 0)), kind: BlowupType::II });
    }
    // the two weights at the isolated min are the two largest first labels
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(g.chains[c].edges[0].m));
    let a_chain = order[0];
    let a = g.chains[order[0]].edges[0].m;
    let b = g.chains[order[1]].edges[0].m;
    if a == b {
        // both weights 1: the point becomes a fixed sphere
        for (c, ch) in g.chains.iter().enumerate() {
            if *lambda >= ch.edges[0].len {
                return Err(invalid(format!("new fat min surpasses the first vertex of chain {}", c + 1)));
            }
        }
        for ch in r.chains.iter_mut() {
            ch.edges[0].len = &ch.edges[0].len - lambda;
        }
        r.min = Extreme::Fat { height: Q::zero(), area: lambda.clone() };
        return Ok(Raw { g: r, map: identity_map(k), inserted: None, new_chain: None, e_edge: None, kind: BlowupType::IV });
    }
    let la = qi(a) * lambda;
    let lb = qi(b) * lambda;
    for (c, ch) in g.chains.iter().enumerate() {
        let need = if c == a_chain { &la } else { &lb };
        if *need >= ch.edges[0].len {
            return Err(invalid(format!("created vertex surpasses the first vertex of chain {}", c + 1)));
        }
    }
    for (c, ch) in r.chains.iter_mut().enumerate() {
        if c == a_chain {
            ch.edges[0].len = &ch.edges[0].len - &la;
            ch.edges.insert(0, Edge::new(a - b, qi(a - b) * lambda));
        } else {
            ch.edges[0].len = &ch.edges[0].len - &lb;
        }
    }
    Ok(Raw {
        g: r,
        map: identity_map(k),
        inserted: Some((a_chain, 0)),
        new_chain: None,
        e_edge: Some((a_chain, 0)),
        kind: BlowupType::III,
    })
}

fn blowup_interior(g: &ExtendedGraph, i: usize, j: usize, lambda: &Q) -> Result<Raw> {
    let c = i - 1;
    let mut r = g.clone();
    let (ea, eb) = (&g.chains[c].edges[j - 1], &g.chains[c].edges[j]);
    let (la, lb) = (qi(ea.m) * lambda, qi(eb.m) * lambda);
    if la >= ea.len || lb >= eb.len {
        return Err(invalid(format!("created vertices surpass the neighbours of v({i},{j})")));
    }
    let ch = &mut r.chains[c];
    ch.edges[j - 1].len = &ea.len - &la;
    ch.edges[j].len = &eb.len - &lb;
    ch.edges.insert(j, Edge::new(ea.m + eb.m, qi(ea.m + eb.m) * lambda));
    Ok(Raw {
        g: r,
        map: identity_map(g.k()),
        inserted: Some((c, j)),
        new_chain: None,
        e_edge: Some((c, j)),
        kind: BlowupType::I,
    })
}

fn mirror_raw(raw: Raw) -> Raw {
    let g = raw.g.reversed_raw();
    let e_edge = raw.e_edge.map(|(c, e)| (c, g.chains[c].len() - 1 - e));
    let inserted = raw.inserted.map(|(c, _)| {
        // an edge inserted at the min end of the mirror sits at the max end
        (c, g.chains[c].len() - 1)
    });
    Raw { g, e_edge, inserted, ..raw }
}

pub fn blowup(g: &ExtendedGraph, site: BlowupSite, lambda: &Q) -> Result<(ExtendedGraph, BlowupRecord)> {
    let v = g.violations_relaxed();
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    if !lambda.is_positive() {
        return Err(invalid("λ must be positive".into()));
    }
    let mism = |m: &str| Error::SiteMismatch(format!("{site}: {m}"));
    let (raw, end) = match site {
        BlowupSite::Interior { i, j } => {
            if i == 0 || i > g.k() || j == 0 || j >= g.ell(i) {
                return Err(mism("no such interior vertex"));
            }
            (blowup_interior(g, i, j, lambda)?, None)
        }
        BlowupSite::IsolatedExtreme(e) | BlowupSite::FatExtreme(e) => {
            let want_fat = matches!(site, BlowupSite::FatExtreme(_));
            let x = if e == End::Min { &g.min } else { &g.max };
            if x.is_fat() != want_fat {
                return Err(mism(if want_fat { "extreme is isolated" } else { "extreme is fat" }));
            }
            let raw = match e {
                End::Min => blowup_at_min(g, want_fat, lambda)?,
                End::Max => mirror_raw(blowup_at_min(&g.reversed_raw(), want_fat, lambda)?),
            };
            (raw, Some(e))
        }
    };
    let (out, perm) = settle(raw.g.clone());
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let v = out.violations_relaxed();
    if !v.is_empty() {
        return Err(invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")));
    }
    let exceptional = match (raw.e_edge, end) {
        (Some((c, e)), _) => Gen::Sigma(inv[c] + 1, e + 1),
        (None, Some(End::Min)) => Gen::Tau0,
        (None, _) => Gen::TauInf,
    };
    let rec = BlowupRecord {
        site,
        kind: raw.kind,
        lambda: lambda.clone(),
        chain_map: raw.map.iter().map(|x| x.map(|c| inv[c])).collect(),
        inserted: raw.inserted,
        new_chain: raw.new_chain.map(|c| inv[c]),
        exceptional,
    };
    Ok((out, rec))
}

// ---------------------------------------------------------------- blowdown

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlowdownTarget {
    Edge { i: usize, j: usize },
    Fat(End),
}

impl BlowdownTarget {
    /// "i,j" for an edge, "fat-min" or "fat-max".
    pub fn parse(s: &str) -> Option<BlowdownTarget> {
        if let Some(end) = s.strip_prefix("fat-") {
            return End::parse(end).map(BlowdownTarget::Fat);
        }
        let (i, j) = parse_pair(s)?;
        Some(BlowdownTarget::Edge { i, j })
    }
}

impl fmt::Display for BlowdownTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowdownTarget::Edge { i, j } => write!(f, "edge ({i},{j})"),
            BlowdownTarget::Fat(e) => write!(f, "fat {}", e.name()),
        }
    }
}

fn nbd(msg: String) -> Error {
    Error::NotBlowdownable(msg)
}

/// Reverse move at the min of a raw graph. Returns the raw result and (site kind, λ).
fn blowdown_min_edge(g: &ExtendedGraph, c: usize) -> Result<(ExtendedGraph, bool, Q)> {
    let mut r = g.clone();
    let ch = &g.chains[c];
    if g.min.is_fat() {
        if ch.labels() != vec![1, 1] {
            return Err(nbd(format!("chain {} is not a [1,1] chain", c + 1)));
        }
        let lambda = ch.edges[0].len.clone();
        r.min = Extreme::Fat { height: Q::zero(), area: g.min.area() + &lambda };
        r.chains.remove(c);
        repad(&mut r);
        return Ok((r, true, lambda));
    }
    if ch.len() < 2 {
        return Err(nbd("edge reaches the other extreme".into()));
    }
    let (cm, a) = (ch.edges[0].m, ch.edges[1].m);
    let b = -g.m_signed(c + 1, 0);
    if a != b + cm {
        return Err(nbd(format!("labels {cm}, {a} do not fit the weight {b}")));
    }
    let lambda = &ch.edges[0].len / qi(cm);
    for (n, x) in r.chains.iter_mut().enumerate() {
        if n == c {
            x.edges.remove(0);
            x.edges[0].len = &x.edges[0].len + qi(a) * &lambda;
        } else {
            x.edges[0].len = &x.edges[0].len + qi(b) * &lambda;
        }
    }
    Ok((r, false, lambda))
}

fn blowdown_min_fat(g: &ExtendedGraph) -> Result<(ExtendedGraph, Q)> {
    if !g.min.is_fat() {
        return Err(nbd("extreme is isolated".into()));
    }
    if g.genus != 0 {
        return Err(nbd("fixed surface has positive genus".into()));
    }
    let (emin, _) = g.extremal_self_intersections();
    if emin != qi(-1) {
        return Err(nbd(format!("self-intersection {} is not -1", fmt_q(&emin))));
    }
    if !g.max.is_fat() && g.k() != 2 {
        return Err(nbd("blowdown would leave more than two chains between isolated extremes".into()));
    }
    let lambda = g.min.area();
    let mut r = g.clone();
    r.min = Extreme::Isolated { height: Q::zero() };
    for x in r.chains.iter_mut() {
        x.edges[0].len = &x.edges[0].len + &lambda;
    }
    Ok((r, lambda))
}

pub fn blowdown(g: &ExtendedGraph, target: BlowdownTarget) -> Result<(ExtendedGraph, BlowupRecord)> {
    let v = g.violations_relaxed();
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    let (raw, site, lambda) = match target {
        BlowdownTarget::Edge { i, j } => {
            if i == 0 || i > g.k() || j == 0 || j > g.ell(i) {
                return Err(Error::SiteMismatch(format!("no edge ({i},{j})")));
            }
            if g.ephemeral_edges().contains(&(i, j)) {
                return Err(nbd(format!("edge ({i},{j}) is ephemeral")));
            }
            let s = g.self_intersection(i, j);
            if s != qi(-1) {
                return Err(nbd(format!("edge ({i},{j}) has self-intersection {}", fmt_q(&s))));
            }
            let l = g.ell(i);
            let c = i - 1;
            if j >= 2 && j < l {
                let ch = &g.chains[c];
                let lambda = &ch.edges[j - 1].len / qi(ch.edges[j - 1].m);
                let mut r = g.clone();
                let x = &mut r.chains[c];
                let (mp, mn) = (x.edges[j - 2].m, x.edges[j].m);
                x.edges[j - 2].len = &x.edges[j - 2].len + qi(mp) * &lambda;
                x.edges[j].len = &x.edges[j].len + qi(mn) * &lambda;
                x.edges.remove(j - 1);
                (r, (Some((c, j - 1)), None, false), lambda)
            } else if j == 1 {
                let (r, fat, lambda) = blowdown_min_edge(g, c)?;
                (r, (None, Some(End::Min), fat), lambda)
            } else {
                let (r, fat, lambda) = blowdown_min_edge(&g.reversed_raw(), c)?;
                (r.reversed_raw(), (None, Some(End::Max), fat), lambda)
            }
        }
        BlowdownTarget::Fat(End::Min) => {
            let (r, lambda) = blowdown_min_fat(g)?;
            (r, (None, Some(End::Min), false), lambda)
        }
        BlowdownTarget::Fat(End::Max) => {
            let (r, lambda) = blowdown_min_fat(&g.reversed_raw())?;
            (r.reversed_raw(), (None, Some(End::Max), false), lambda)
        }
    };
    // chain identity survives repadding only up to trivial chains, so the site
    // of an interior move is found by matching the merged chain
    let interior_chain = site.0.map(|(c, _)| raw.chains[c].clone());
    let (r, _) = settle(raw);
    let v = r.violations_relaxed();
    if !v.is_empty() {
        return Err(nbd(format!(
            "blown-down graph is invalid: {}",
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
        )));
    }
    let site = match site {
        (Some((_, j)), _, _) => {
            let ch = interior_chain.unwrap();
            let i = r.chains.iter().position(|x| *x == ch).unwrap() + 1;
            BlowupSite::Interior { i, j }
        }
        (None, Some(e), true) => BlowupSite::FatExtreme(e),
        (None, Some(e), false) => BlowupSite::IsolatedExtreme(e),
        _ => unreachable!(),
    };
    let (back, rec) = blowup(&r, site, &lambda)?;
    if back != *g {
        return Err(Error::BugTrap(format!("blowdown at {target} does not invert: {site}, λ = {}", fmt_q(&lambda))));
    }
    Ok((r, rec))
}

/// Features with self-intersection −1, highest first, then by chain index.
pub fn blowdown_targets(g: &ExtendedGraph) -> Vec<BlowdownTarget> {
    let eph = g.ephemeral_edges();
    let mut out: Vec<(Q, usize, usize, BlowdownTarget)> = Vec::new();
    let (emin, emax) = g.extremal_self_intersections();
    if g.genus == 0 {
        if g.max.is_fat() && emax == qi(-1) {
            out.push((g.y_max().clone(), 0, 0, BlowdownTarget::Fat(End::Max)));
        }
        if g.min.is_fat() && emin == qi(-1) {
            out.push((g.y_min().clone(), 0, 0, BlowdownTarget::Fat(End::Min)));
        }
    }
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            if eph.contains(&(i, j)) || g.self_intersection(i, j) != qi(-1) {
                continue;
            }
            let top = g.vertex_height(i, j);
            out.push((top, i, j, BlowdownTarget::Edge { i, j }));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut seen = BTreeSet::new();
    out.into_iter().map(|x| x.3).filter(|t| seen.insert(*t)).collect()
}

// ---------------------------------------------------------------- reduction

#[derive(Clone, Debug)]
pub struct Reduction {
    pub model: MinimalModelId,
    /// The graph reached by the blowdowns; equal to the model up to orientation.
    pub base: ExtendedGraph,
    /// Blowups in replay order, from `base` up to the input.
    pub records: Vec<BlowupRecord>,
}

type Found = (MinimalModelId, ExtendedGraph, Vec<BlowupRecord>);

fn search(g: &ExtendedGraph, cp2_only: bool, dead: &mut HashSet<ExtendedGraph>) -> Option<Found> {
    if let Some(id) = match_model(g, cp2_only) {
        return Some((id, g.clone(), Vec::new()));
    }
    if dead.contains(g) {
        return None;
    }
    for t in blowdown_targets(g) {
        if let Ok((r, rec)) = blowdown(g, t) {
            if let Some((id, base, mut recs)) = search(&r, cp2_only, dead) {
                recs.push(rec);
                return Some((id, base, recs));
            }
        }
    }
    dead.insert(g.clone());
    None
}

/// Blows down to a minimal model, preferring CP² when some order of
/// blowdowns reaches it.
pub fn reduce(g: &ExtendedGraph) -> Result<Reduction> {
    let v = g.violations_relaxed();
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    let mut dead = HashSet::new();
    let found = if g.genus == 0 { search(g, true, &mut dead) } else { None };
    let found = match found {
        Some(f) => Some(f),
        None => {
            dead.clear();
            search(g, false, &mut dead)
        }
    };
    let (model, base, records) = found.ok_or_else(|| Error::Irreducible(format!("no blowdown sequence of {g} reaches a minimal model")))?;
    Ok(Reduction { model, base, records })
}

pub fn reduce_to_minimal(g: &ExtendedGraph) -> Result<(MinimalModelId, Vec<BlowupRecord>)> {
    let r = reduce(g)?;
    Ok((r.model, r.records))
}

pub fn replay(base: &ExtendedGraph, steps: &[(BlowupSite, Q)]) -> Result<(ExtendedGraph, Vec<BlowupRecord>)> {
    let mut g = base.clone();
    let mut recs = Vec::new();
    for (s, l) in steps {
        let (h, r) = blowup(&g, *s, l)?;
        g = h;
        recs.push(r);
    }
    Ok((g, recs))
}

// ---------------------------------------------------------------- transport

#[derive(Clone, Debug)]
pub struct Transport {
    /// Image of each generator of the old graph.
    pub map: BTreeMap<Gen, CohClass2>,
    pub exceptional: Gen,
    /// Old fixed components untouched by the blowup, with their new names.
    pub components: BTreeMap<FixedComponent, FixedComponent>,
}

pub fn transport_generators(before: &ExtendedGraph, rec: &BlowupRecord) -> Result<Transport> {
    let (after, _) = blowup(before, rec.site, &rec.lambda)?;
    let mut map = BTreeMap::new();
    for x in crate::cohomology::generators(before) {
        let img = match x {
            Gen::Sigma(i, j) => {
                let (c, mut e) = (i - 1, j - 1);
                if let Some((ic, p)) = rec.inserted {
                    if ic == c && e >= p {
                        e += 1;
                    }
                }
                match rec.chain_map[c] {
                    Some(nc) => CohClass2::gen(Gen::Sigma(nc + 1, e + 1)),
                    None => match after.chains.iter().position(|ch| ch.is_trivial()) {
                        Some(t) => CohClass2::gen(Gen::Sigma(t + 1, 1)),
                        None => {
                            let nc = rec.new_chain.ok_or_else(|| Error::BugTrap("dropped chain without replacement".into()))?;
                            CohClass2::gen(Gen::Sigma(nc + 1, 1)).plus(&CohClass2::gen(Gen::Sigma(nc + 1, 2)))
                        }
                    },
                }
            }
            other => CohClass2::gen(other),
        };
        map.insert(x, img);
    }
    let touched = match rec.site {
        BlowupSite::Interior { i, j } => Some(FixedComponent::Interior(i, j)),
        BlowupSite::IsolatedExtreme(End::Min) | BlowupSite::FatExtreme(End::Min) => Some(FixedComponent::Min),
        BlowupSite::IsolatedExtreme(End::Max) | BlowupSite::FatExtreme(End::Max) => Some(FixedComponent::Max),
    };
    let mut components = BTreeMap::new();
    for c in before.components() {
        if Some(c) == touched {
            continue;
        }
        let nc = match c {
            FixedComponent::Interior(i, j) => {
                let ci = i - 1;
                let mut j2 = j;
                if let Some((ic, p)) = rec.inserted {
                    if ic == ci && j > p {
                        j2 = j + 1;
                    }
                }
                match rec.chain_map[ci] {
                    Some(n) => FixedComponent::Interior(n + 1, j2),
                    None => continue,
                }
            }
            other => other,
        };
        components.insert(c, nc);
    }
    Ok(Transport { map, exceptional: rec.exceptional, components })
}
