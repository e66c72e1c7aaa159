//! Recovering graphs from abstract cohomological data.
//!
//! The input names generators by opaque ids. An isolated extreme is given
//! as the pair of edge generators meeting there; pairings of a generator
//! with such a pair are stored under the id `"a*b"`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::cohomology::{CohClass2, Gen};
use crate::error::{Error, Result};
use crate::graph_model::{Chain, DullExtreme, DullGraph, Edge, ExtendedGraph, Extreme, FatShape};
use crate::localization::{integrate, intersect, omega_pairing, restrict_product};
use crate::rational::{fmt_q, parse_q, q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tau {
    Class(String),
    Product(String, String),
}

impl Tau {
    fn to_json(&self) -> Value {
        match self {
            Tau::Class(a) => json!(a),
            Tau::Product(a, b) => json!([a, b]),
        }
    }

    fn from_json(v: &Value, key: &str) -> Result<Tau> {
        let bad = || Error::Parse { path: key.to_string(), msg: "expected an id or a pair of ids".into() };
        match v {
            Value::String(s) => Ok(Tau::Class(s.clone())),
            Value::Array(a) if a.len() == 2 => {
                let a0 = a[0].as_str().ok_or_else(bad)?;
                let a1 = a[1].as_str().ok_or_else(bad)?;
                Ok(Tau::Product(a0.to_string(), a1.to_string()))
            }
            _ => Err(bad()),
        }
    }

    fn pair_id(&self) -> String {
        match self {
            Tau::Class(a) => a.clone(),
            Tau::Product(a, b) => product_id(a, b),
        }
    }
}

fn product_id(a: &str, b: &str) -> String {
    format!("{a}*{b}")
}

/// Generator ids, the extremal classes, integer pairings and optional ω-pairings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicInput {
    pub genus: u32,
    pub generators: Vec<String>,
    pub tau_min: Tau,
    pub tau_max: Tau,
    /// Symmetric; keys are stored with the smaller id first. Missing entries are zero.
    pub pairing: BTreeMap<(String, String), i64>,
    pub omega: Option<BTreeMap<String, Q>>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl AlgebraicInput {
    pub fn pair(&self, a: &str, b: &str) -> i64 {
        self.pairing.get(&key(a, b)).copied().unwrap_or(0)
    }

    pub fn set_pair(&mut self, a: &str, b: &str, v: i64) {
        if v == 0 {
            self.pairing.remove(&key(a, b));
        } else {
            self.pairing.insert(key(a, b), v);
        }
    }

    /// Renames every id through `names`; ids missing from the map are kept.
    pub fn relabel(&self, names: &BTreeMap<String, String>) -> AlgebraicInput {
        let n = |s: &String| names.get(s).cloned().unwrap_or_else(|| s.clone());
        let n_any = |s: &String| match s.split_once('*') {
            Some((a, b)) => product_id(&n(&a.to_string()), &n(&b.to_string())),
            None => n(s),
        };
        let tau = |t: &Tau| match t {
            Tau::Class(a) => Tau::Class(n(a)),
            Tau::Product(a, b) => Tau::Product(n(a), n(b)),
        };
        let mut out = AlgebraicInput {
            genus: self.genus,
            generators: self.generators.iter().map(n).collect(),
            tau_min: tau(&self.tau_min),
            tau_max: tau(&self.tau_max),
            pairing: BTreeMap::new(),
            omega: self.omega.as_ref().map(|w| w.iter().map(|(k, v)| (n(k), v.clone())).collect()),
        };
        for ((a, b), v) in &self.pairing {
            out.set_pair(&n_any(a), &n_any(b), *v);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let pairing: Vec<Value> = self.pairing.iter().map(|((a, b), v)| json!([a, b, v])).collect();
        let mut v = json!({
            "genus": self.genus,
            "generators": self.generators,
            "tau_min": self.tau_min.to_json(),
            "tau_max": self.tau_max.to_json(),
            "pairing": pairing,
        });
        if let Some(w) = &self.omega {
            let om: Vec<Value> = w.iter().map(|(k, x)| json!([k, fmt_q(x)])).collect();
            v["omega"] = Value::Array(om);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<AlgebraicInput> {
        let perr = |path: &str, msg: &str| Error::Parse { path: path.to_string(), msg: msg.to_string() };
        let genus = v.get("genus").and_then(Value::as_u64).ok_or_else(|| perr("genus", "expected a non-negative integer"))?;
        let generators = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("generators", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, x)| x.as_str().map(str::to_string).ok_or_else(|| perr(&format!("generators[{i}]"), "expected a string")))
            .collect::<Result<Vec<_>>>()?;
        let tau_min = Tau::from_json(v.get("tau_min").ok_or_else(|| perr("tau_min", "missing"))?, "tau_min")?;
        let tau_max = Tau::from_json(v.get("tau_max").ok_or_else(|| perr("tau_max", "missing"))?, "tau_max")?;
        let mut out = AlgebraicInput { genus: genus as u32, generators, tau_min, tau_max, pairing: BTreeMap::new(), omega: None };
        let entries = v.get("pairing").and_then(Value::as_array).ok_or_else(|| perr("pairing", "expected an array"))?;
        for (i, e) in entries.iter().enumerate() {
            let path = format!("pairing[{i}]");
            let (a, b, x) = match e.as_array().map(|a| a.as_slice()) {
                Some([a, b, x]) => (a.as_str(), b.as_str(), x.as_i64()),
                _ => return Err(perr(&path, "expected [id, id, integer]")),
            };
            match (a, b, x) {
                (Some(a), Some(b), Some(x)) => out.set_pair(a, b, x),
                _ => return Err(perr(&path, "expected [id, id, integer]")),
            }
        }
        if let Some(om) = v.get("omega") {
            let mut w = BTreeMap::new();
            for (i, e) in om.as_array().ok_or_else(|| perr("omega", "expected an array"))?.iter().enumerate() {
                let path = format!("omega[{i}]");
                let (id, x) = match e.as_array().map(|a| a.as_slice()) {
                    Some([id, x]) => (id.as_str().ok_or_else(|| perr(&path, "expected an id"))?, x),
                    _ => return Err(perr(&path, "expected [id, rational]")),
                };
                let x = match x {
                    Value::String(s) => parse_q(s).map_err(|m| perr(&path, &m))?,
                    Value::Number(n) => Q::from_integer(n.as_i64().ok_or_else(|| perr(&path, "expected an integer"))?.into()),
                    _ => return Err(perr(&path, "expected a rational")),
                };
                w.insert(id.to_string(), x);
            }
            out.omega = Some(w);
        }
        Ok(out)
    }
}

impl fmt::Display for AlgebraicInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string_pretty(&self.to_json()).unwrap_or_default())
    }
}

/// The classes z_i, i ≥ 3: the edge at the isolated end of each extra
/// chain when exactly one extreme is fat.
pub fn z_generators(g: &ExtendedGraph) -> Vec<Gen> {
    (3..=g.k())
        .filter_map(|i| match g.shape() {
            FatShape::MaxOnly => Some(Gen::Sigma(i, 1)),
            FatShape::MinOnly => Some(Gen::Sigma(i, g.ell(i))),
            _ => None,
        })
        .collect()
}

/// The edge generators of X: every σ except the z_i.
pub fn xi_generators(g: &ExtendedGraph) -> Vec<Gen> {
    let z = z_generators(g);
    let mut out = Vec::new();
    for i in 1..=g.k() {
        for j in 1..=g.ell(i) {
            if !z.contains(&Gen::Sigma(i, j)) {
                out.push(Gen::Sigma(i, j));
            }
        }
    }
    out
}

fn gen_id(x: Gen) -> String {
    match x {
        Gen::Tau0 => "x0".into(),
        Gen::TauInf => "xinf".into(),
        Gen::TauH => "xh".into(),
        Gen::Sigma(i, j) => format!("x{i}_{j}"),
    }
}

/// The abstract data of a graph, ids named after generators.
/// A graph whose only fat extreme is the min is normalized first.
pub fn algebraic_input(g: &ExtendedGraph, with_omega: bool) -> Result<AlgebraicInput> {
    g.check()?;
    input_of(&g.normalized().0, with_omega)
}

fn input_of(g: &ExtendedGraph, with_omega: bool) -> Result<AlgebraicInput> {
    let xs = xi_generators(&g);
    let tau = |fat: bool, cls: Gen, a: Gen, b: Gen| {
        if fat {
            (Tau::Class(gen_id(cls)), Some(cls))
        } else {
            (Tau::Product(gen_id(a), gen_id(b)), None)
        }
    };
    let (tau_min, c0) = tau(g.min.is_fat(), Gen::Tau0, Gen::Sigma(1, 1), Gen::Sigma(2, 1));
    let (tau_max, c1) = tau(g.max.is_fat(), Gen::TauInf, Gen::Sigma(1, g.ell(1)), Gen::Sigma(2, g.ell(2)));
    let classes: Vec<Gen> = c0.into_iter().chain(c1).chain(xs.iter().copied()).collect();
    let mut out = AlgebraicInput {
        genus: g.genus,
        generators: xs.iter().map(|&x| gen_id(x)).collect(),
        tau_min: tau_min.clone(),
        tau_max: tau_max.clone(),
        pairing: BTreeMap::new(),
        omega: None,
    };
    for (a, &x) in classes.iter().enumerate() {
        for &y in &classes[a..] {
            let v = intersect(&g, &CohClass2::gen(x), &CohClass2::gen(y))?;
            out.set_pair(&gen_id(x), &gen_id(y), v);
        }
    }
    for (t, at_max) in [(&tau_min, false), (&tau_max, true)] {
        if let Tau::Product(..) = t {
            let (a, b) = if at_max {
                (Gen::Sigma(1, g.ell(1)), Gen::Sigma(2, g.ell(2)))
            } else {
                (Gen::Sigma(1, 1), Gen::Sigma(2, 1))
            };
            for &x in &xs {
                let v = product_pairing(&g, x, a, b)?;
                out.set_pair(&gen_id(x), &t.pair_id(), v);
            }
        }
    }
    if with_omega {
        let mut w = BTreeMap::new();
        for &x in &classes {
            w.insert(gen_id(x), omega_pairing(&g, &CohClass2::gen(x))?);
        }
        out.omega = Some(w);
    }
    Ok(out)
}

/// Pairing of x with the degree-4 class a·b at an isolated extreme:
/// the t-coefficient of ∫ x·a·b, signed so edge labels come out positive.
fn product_pairing(g: &ExtendedGraph, x: Gen, a: Gen, b: Gen) -> Result<i64> {
    let r = restrict_product(g, &[CohClass2::gen(x), CohClass2::gen(a), CohClass2::gen(b)])?;
    let c = integrate(g, &r)?.coeff(1).abs();
    crate::rational::as_i64(&c).ok_or_else(|| Error::BugTrap(format!("non-integral product pairing {c}")))
}

/// A chain as recovered: ids bottom-up (None for an omitted first generator) and labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredChain {
    pub ids: Vec<Option<String>>,
    pub labels: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovered {
    pub genus: u32,
    pub min: DullExtreme,
    pub max: DullExtreme,
    pub chains: Vec<RecoveredChain>,
}

impl Recovered {
    pub fn dull(&self) -> DullGraph {
        let labels: Vec<Vec<i64>> = self.chains.iter().map(|c| c.labels.clone()).collect();
        DullGraph::from_labels(self.genus, self.min.clone(), self.max.clone(), &labels)
    }
}

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::Inconsistent(msg.into())
}

/// Top-down recovery of chains and labels.
pub fn recover_chains(inp: &AlgebraicInput) -> Result<Recovered> {
    let s: Vec<&String> = inp.generators.iter().collect();
    let sset: BTreeSet<&String> = s.iter().copied().collect();
    if sset.len() != s.len() {
        return Err(inconsistent("duplicate generator ids"));
    }
    let fat_min = matches!(inp.tau_min, Tau::Class(_));
    let fat_max = matches!(inp.tau_max, Tau::Class(_));
    if fat_min && !fat_max {
        return Err(Error::Constraint("the only fat extreme must be the max".into()));
    }
    for t in [&inp.tau_min, &inp.tau_max] {
        match t {
            Tau::Class(c) if sset.contains(c) => return Err(inconsistent(format!("{c} is both an extreme and an edge"))),
            Tau::Product(a, b) if !sset.contains(a) || !sset.contains(b) || a == b => {
                return Err(inconsistent(format!("extreme pair ({a}, {b}) does not name two edges")))
            }
            _ => {}
        }
    }
    // pairs meeting at an isolated extreme do not link chains
    let skip: BTreeSet<(String, String)> = [&inp.tau_min, &inp.tau_max]
        .into_iter()
        .filter_map(|t| match t {
            Tau::Product(a, b) => Some(key(a, b)),
            _ => None,
        })
        .collect();
    let adj = |x: &str, y: &str| x != y && !skip.contains(&key(x, y)) && inp.pair(x, y) != 0;

    let top_id = inp.tau_max.pair_id();
    let mut layer: BTreeMap<&String, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &x in &s {
        if inp.pair(x, &top_id) != 0 {
            layer.insert(x, 0);
            queue.push_back(x);
        }
    }
    if queue.is_empty() {
        return Err(inconsistent("no generator meets the max"));
    }
    while let Some(x) = queue.pop_front() {
        let d = layer[x];
        for &y in &s {
            if !layer.contains_key(y) && adj(x, y) {
                layer.insert(y, d + 1);
                queue.push_back(y);
            }
        }
    }
    if layer.len() != s.len() {
        return Err(inconsistent("some generators are not connected to the max"));
    }

    // classes: connected components under adjacency
    let mut comp: BTreeMap<&String, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<&String>> = Vec::new();
    for &x in &s {
        if comp.contains_key(x) {
            continue;
        }
        let id = classes.len();
        let mut members = vec![x];
        comp.insert(x, id);
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            for &y in &s {
                if !comp.contains_key(y) && adj(u, y) {
                    comp.insert(y, id);
                    members.push(y);
                }
            }
            i += 1;
        }
        members.sort_by_key(|m| layer[m]);
        for (r, m) in members.iter().enumerate() {
            if layer[m] != r {
                return Err(inconsistent(format!("chain through {} is not a path from the max", members[0])));
            }
            if r > 0 && !adj(members[r - 1], m) {
                return Err(inconsistent(format!("{} and {m} are not adjacent", members[r - 1])));
            }
        }
        classes.push(members);
    }

    let (ends_min, ends_max) = (pair_of(&inp.tau_min), pair_of(&inp.tau_max));
    if !fat_max && classes.len() != 2 {
        return Err(inconsistent("an isolated max needs exactly two chains"));
    }
    let one_fat = fat_max && !fat_min;
    let mut chains = Vec::new();
    // top labels and the label beyond the top, per class
    let mut tops: Vec<(i64, i64)> = Vec::new();
    for members in &classes {
        match &ends_max {
            None => tops.push((1, 0)),
            Some((a, b)) => {
                let pid = inp.tau_max.pair_id();
                let (m_self, m_other) = if members.contains(&a) {
                    (inp.pair(b, &pid), inp.pair(a, &pid))
                } else if members.contains(&b) {
                    (inp.pair(a, &pid), inp.pair(b, &pid))
                } else {
                    return Err(inconsistent("a chain misses the isolated max"));
                };
                if members[0] != *a && members[0] != *b {
                    return Err(inconsistent("the max pair is not at the top of its chains"));
                }
                tops.push((m_self, -m_other));
            }
        }
    }
    for (members, &(m_top, m_beyond)) in classes.iter().zip(&tops) {
        let full = match &ends_min {
            Some((a, b)) => members.contains(&a) || members.contains(&b),
            None => true,
        };
        let omitted = one_fat && !full;
        let len = members.len() + omitted as usize;
        // m[j] for j = 0..=len+1, ids[j] for j = 1..=len
        let mut ids: Vec<Option<String>> = vec![None; len + 1];
        for (r, m) in members.iter().enumerate() {
            ids[len - r] = Some((*m).clone());
        }
        let mut m = vec![0i64; len + 2];
        m[len] = m_top;
        m[len + 1] = m_beyond;
        for j in (2..=len).rev() {
            let x = ids[j].as_ref().ok_or_else(|| inconsistent("missing interior generator"))?;
            m[j - 1] = -m[j] * inp.pair(x, x) - m[j + 1];
        }
        let labels: Vec<i64> = m[1..=len].to_vec();
        if labels.iter().any(|&l| l < 1) {
            return Err(inconsistent(format!("non-positive label in chain through {}", members[0])));
        }
        if omitted && labels[0] != 1 {
            return Err(inconsistent(format!("chain through {} must start with label 1", members[0])));
        }
        chains.push(RecoveredChain { ids: ids[1..].to_vec(), labels });
    }

    // boundary checks at the min
    let extreme = |t: &Tau| -> Result<DullExtreme> {
        Ok(match t {
            Tau::Class(c) => DullExtreme::Fat(inp.pair(c, c)),
            Tau::Product(a, b) => {
                if inp.pair(a, b) != 1 {
                    return Err(inconsistent(format!("edges {a}, {b} at an isolated extreme must pair to 1")));
                }
                DullExtreme::Isolated
            }
        })
    };
    let min = extreme(&inp.tau_min)?;
    let max = extreme(&inp.tau_max)?;
    match &ends_min {
        Some((a, b)) => {
            let first = |id: &String| chains.iter().find(|c| c.ids[0].as_ref() == Some(id)).map(|c| c.labels[0]);
            let (ma, mb) = match (first(a), first(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(inconsistent("the min pair is not at the bottom of its chains")),
            };
            for c in &chains {
                let Some(x) = &c.ids[0] else { continue };
                let below = if x == *a { -mb } else if x == *b { -ma } else { return Err(inconsistent(format!("{x} starts a chain away from the min"))) };
                check_self(inp, x, c.labels[0], below, c.labels.get(1).copied().unwrap_or(m_after(&tops, &chains, c)))?;
            }
        }
        None => {
            let Tau::Class(c0) = &inp.tau_min else { unreachable!() };
            for c in &chains {
                let x = c.ids[0].as_ref().ok_or_else(|| inconsistent("omitted generator with a fat min"))?;
                if inp.pair(x, c0) != 1 {
                    return Err(inconsistent(format!("{x} must meet the min once")));
                }
                check_self(inp, x, c.labels[0], 0, c.labels.get(1).copied().unwrap_or(m_after(&tops, &chains, c)))?;
            }
        }
    }
    if let Tau::Class(c1) = &inp.tau_max {
        for c in &chains {
            let x = c.ids.last().unwrap().as_ref().ok_or_else(|| inconsistent("chain without a top"))?;
            if inp.pair(x, c1) != 1 {
                return Err(inconsistent(format!("{x} must meet the max once")));
            }
        }
    }
    let rec = Recovered { genus: inp.genus, min, max, chains };
    check_pairings(inp, &rec)?;
    Ok(rec)
}

/// A graph with the recovered labels and extremal self-intersections. Heights
/// and areas are placeholders; only the pairings are meaningful.
fn stand_in(rec: &Recovered, order: &[usize]) -> ExtendedGraph {
    let chains: Vec<Chain> = order
        .iter()
        .map(|&c| {
            let ls = &rec.chains[c].labels;
            let len = q(1, ls.len() as i64);
            Chain::new(ls.iter().map(|&m| Edge::new(m, len.clone())).collect())
        })
        .collect();
    let ext = |d: &DullExtreme, h: i64| match d {
        DullExtreme::Fat(_) => Extreme::Fat { height: qi(h), area: Q::zero() },
        DullExtreme::Isolated => Extreme::Isolated { height: qi(h) },
    };
    let mut g = ExtendedGraph { genus: rec.genus, min: ext(&rec.min, 0), max: ext(&rec.max, 1), chains };
    // e is affine in the areas with slope ±1 at unit height
    let (e0min, e0max) = g.extremal_self_intersections();
    match (&rec.min, &rec.max) {
        (DullExtreme::Fat(emin), DullExtreme::Fat(_)) => {
            g.max = Extreme::Fat { height: qi(1), area: qi(1) };
            g.min = Extreme::Fat { height: Q::zero(), area: qi(1) + qi(*emin) - e0min };
        }
        (_, DullExtreme::Fat(emax)) => {
            g.max = Extreme::Fat { height: qi(1), area: qi(*emax) - e0max };
        }
        _ => {}
    }
    g
}

/// Recomputes every pairing from the recovered graph and compares with the input.
fn check_pairings(inp: &AlgebraicInput, rec: &Recovered) -> Result<()> {
    let pos = |id: &String| {
        rec.chains
            .iter()
            .position(|c| c.ids.iter().any(|x| x.as_ref() == Some(id)))
            .ok_or_else(|| inconsistent(format!("{id} is on no chain")))
    };
    let mut order: Vec<usize> = (0..rec.chains.len()).collect();
    if let Some((a, b)) = pair_of(&inp.tau_min).or(pair_of(&inp.tau_max)) {
        let (pa, pb) = (pos(a)?, pos(b)?);
        if pa == pb {
            return Err(inconsistent(format!("{a} and {b} lie on one chain")));
        }
        order.retain(|&c| c != pa && c != pb);
        order.splice(0..0, [pa, pb]);
    }
    let g = stand_in(rec, &order);
    let want = input_of(&g, false)?;
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    for (n, &c) in order.iter().enumerate() {
        for (j, id) in rec.chains[c].ids.iter().enumerate() {
            if let Some(id) = id {
                names.insert(format!("x{}_{}", n + 1, j + 1), id.clone());
            }
        }
    }
    for (t, u) in [(&want.tau_min, &inp.tau_min), (&want.tau_max, &inp.tau_max)] {
        names.insert(t.pair_id(), u.pair_id());
    }
    let tr = |id: &String| names.get(id).cloned().ok_or_else(|| Error::BugTrap(format!("no input id for {id}")));
    let mut got: BTreeMap<(String, String), i64> = BTreeMap::new();
    for ((a, b), v) in &want.pairing {
        got.insert(key(&tr(a)?, &tr(b)?), *v);
    }
    for k in got.keys().chain(inp.pairing.keys()) {
        let (w, v) = (got.get(k).copied().unwrap_or(0), inp.pair(&k.0, &k.1));
        if w != v {
            return Err(inconsistent(format!("pairing of {} and {} is {v}, the recovered graph gives {w}", k.0, k.1)));
        }
    }
    Ok(())
}

fn m_after(tops: &[(i64, i64)], chains: &[RecoveredChain], c: &RecoveredChain) -> i64 {
    let i = chains.iter().position(|x| std::ptr::eq(x, c)).unwrap_or(0);
    tops[i].1
}

fn pair_of(t: &Tau) -> Option<(&String, &String)> {
    match t {
        Tau::Product(a, b) => Some((a, b)),
        Tau::Class(_) => None,
    }
}

/// x·x = −(m_below + m_above)/m for a bottom edge with label m.
fn check_self(inp: &AlgebraicInput, x: &str, m: i64, below: i64, above: i64) -> Result<()> {
    if inp.pair(x, x) * m != -(below + above) {
        return Err(inconsistent(format!("self-pairing of {x} disagrees with the recovered labels")));
    }
    Ok(())
}

/// Dull graph from the abstract data.
pub fn recover_dull(inp: &AlgebraicInput) -> Result<DullGraph> {
    Ok(recover_chains(inp)?.dull())
}

/// Full graph from the abstract data with ω-pairings. Needs a fat extreme.
pub fn recover_decorated(inp: &AlgebraicInput) -> Result<ExtendedGraph> {
    let rec = recover_chains(inp)?;
    if rec.max == DullExtreme::Isolated {
        return Err(Error::Constraint("no fixed surface: outside the supported scope".into()));
    }
    let w = inp.omega.as_ref().ok_or_else(|| Error::Missing("omega pairings".into()))?;
    let om = |id: &String| w.get(id).cloned().ok_or_else(|| Error::Missing(format!("omega pairing of {id}")));
    let mut top: Option<Q> = None;
    for c in rec.chains.iter().filter(|c| c.ids.iter().all(Option::is_some)) {
        let mut h = Q::zero();
        for (id, m) in c.ids.iter().zip(&c.labels) {
            h += om(id.as_ref().unwrap())? * Q::from_integer((*m).into());
        }
        match &top {
            None => top = Some(h),
            Some(t) if *t != h => return Err(inconsistent("chains disagree on the height of the max")),
            _ => {}
        }
    }
    let top = top.ok_or_else(|| inconsistent("no complete chain"))?;
    let mut chains = Vec::new();
    for c in &rec.chains {
        let mut edges: Vec<Edge> = Vec::new();
        for (id, m) in c.ids.iter().zip(&c.labels) {
            let len = match id {
                Some(id) => om(id)? * Q::from_integer((*m).into()),
                None => Q::zero(),
            };
            edges.push(Edge::new(*m, len));
        }
        if c.ids[0].is_none() {
            let rest: Q = edges.iter().map(|e| e.len.clone()).sum();
            edges[0].len = &top - rest;
        }
        if edges.iter().any(|e| !e.len.is_positive()) {
            return Err(inconsistent("non-positive edge length"));
        }
        chains.push(Chain::new(edges));
    }
    let ext = |t: &Tau, h: Q| -> Result<Extreme> {
        Ok(match t {
            Tau::Class(c) => Extreme::Fat { height: h, area: om(c)? },
            Tau::Product(..) => Extreme::Isolated { height: h },
        })
    };
    let mut g = ExtendedGraph { genus: rec.genus, min: ext(&inp.tau_min, Q::zero())?, max: ext(&inp.tau_max, top)?, chains };
    g.sort_chains();
    g.check().map_err(|e| inconsistent(format!("recovered graph is invalid: {e}")))?;
    if g.shape() == FatShape::MinOnly {
        return Err(Error::BugTrap("recovered graph is not normalized".into()));
    }
    Ok(g)
}

/// Relabeling-invariant summary of the data, for telling images apart.
pub fn xi_invariant(inp: &AlgebraicInput) -> Vec<String> {
    let om = |id: &String| inp.omega.as_ref().and_then(|w| w.get(id)).map(fmt_q).unwrap_or_default();
    let mut rows: Vec<String> = inp
        .generators
        .iter()
        .map(|x| {
            let mut nb: Vec<String> = inp
                .generators
                .iter()
                .filter(|y| *y != x && inp.pair(x, y) != 0)
                .map(|y| format!("{}@{}", inp.pair(x, y), om(y)))
                .collect();
            nb.sort();
            format!(
                "{}|{}|min:{}|max:{}|{}",
                om(x),
                inp.pair(x, x),
                inp.pair(x, &inp.tau_min.pair_id()),
                inp.pair(x, &inp.tau_max.pair_id()),
                nb.join(",")
            )
        })
        .collect();
    rows.sort();
    let ext = |t: &Tau| match t {
        Tau::Class(c) => format!("fat({},{})", inp.pair(c, c), om(c)),
        Tau::Product(..) => "pt".to_string(),
    };
    rows.push(format!("g={} min={} max={}", inp.genus, ext(&inp.tau_min), ext(&inp.tau_max)));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cp2_211() {
        let g = crate::graph_model::tests::cp2_211();
        let inp = algebraic_input(&g, true).unwrap();
        assert_eq!(recover_dull(&inp).unwrap(), g.dull());
    }

    #[test]
    fn tampered_label_is_rejected() {
        let chain = Chain::new(vec![Edge::new(1, q(3, 2)), Edge::new(1, q(1, 2))]);
        let g = ExtendedGraph {
            genus: 0,
            min: Extreme::Isolated { height: qi(0) },
            max: Extreme::Fat { height: qi(2), area: q(1, 2) },
            chains: vec![chain.clone(), chain.clone(), chain],
        };
        let mut inp = algebraic_input(&g, false).unwrap();
        assert_eq!(recover_dull(&inp).unwrap(), g.dull());
        let x = "x3_2";
        let v = inp.pair(x, x);
        inp.set_pair(x, x, v - 1);
        let r = recover_dull(&inp);
        assert!(matches!(r, Err(Error::Inconsistent(_))), "{inp}\n{r:?}");
    }
}
