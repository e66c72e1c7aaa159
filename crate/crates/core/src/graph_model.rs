//! Extended, decorated and dull graphs of a 4-dimensional Hamiltonian circle action.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{as_i64, fmt_q, gcd, is_int, parse_q, q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extreme {
    Isolated { height: Q },
    Fat { height: Q, area: Q },
}

impl Extreme {
    pub fn height(&self) -> &Q {
        match self {
            Extreme::Isolated { height } | Extreme::Fat { height, .. } => height,
        }
    }

    pub fn is_fat(&self) -> bool {
        matches!(self, Extreme::Fat { .. })
    }

    /// Area label, zero for an isolated extreme.
    pub fn area(&self) -> Q {
        match self {
            Extreme::Fat { area, .. } => area.clone(),
            Extreme::Isolated { .. } => Q::zero(),
        }
    }

    pub fn with_height(&self, h: Q) -> Extreme {
        match self {
            Extreme::Isolated { .. } => Extreme::Isolated { height: h },
            Extreme::Fat { area, .. } => Extreme::Fat { height: h, area: area.clone() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub m: i64,
    pub len: Q,
}

impl Edge {
    pub fn new(m: i64, len: Q) -> Self {
        Edge { m, len }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    pub edges: Vec<Edge>,
}

impl Chain {
    pub fn new(edges: Vec<Edge>) -> Self {
        Chain { edges }
    }

    pub fn labels(&self) -> Vec<i64> {
        self.edges.iter().map(|e| e.m).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total(&self) -> Q {
        self.edges.iter().fold(Q::zero(), |a, e| a + &e.len)
    }

    pub fn reversed(&self) -> Chain {
        Chain { edges: self.edges.iter().rev().cloned().collect() }
    }

    /// A chain consisting of a single label-1 edge.
    pub fn is_trivial(&self) -> bool {
        self.edges.len() == 1 && self.edges[0].m == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedGraph {
    pub genus: u32,
    pub min: Extreme,
    pub max: Extreme,
    pub chains: Vec<Chain>,
}

/// A fixed component. Chain and edge indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixedComponent {
    Min,
    Interior(usize, usize),
    Max,
}

impl fmt::Display for FixedComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixedComponent::Min => write!(f, "min"),
            FixedComponent::Max => write!(f, "max"),
            FixedComponent::Interior(i, j) => write!(f, "v({i},{j})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Violation {
    pub code: &'static str,
    pub msg: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.msg)
    }
}

fn viol(code: &'static str, msg: impl Into<String>) -> Violation {
    Violation { code, msg: msg.into() }
}

/// Which extremes are fat.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FatShape {
    None,
    MaxOnly,
    MinOnly,
    Both,
}

impl ExtendedGraph {
    pub fn k(&self) -> usize {
        self.chains.len()
    }

    pub fn ell(&self, i: usize) -> usize {
        self.chains[i - 1].len()
    }

    /// Label m_{i,j}, 1-based, for 1 <= j <= ℓ_i.
    pub fn m(&self, i: usize, j: usize) -> i64 {
        self.chains[i - 1].edges[j - 1].m
    }

    pub fn len_of(&self, i: usize, j: usize) -> &Q {
        &self.chains[i - 1].edges[j - 1].len
    }

    pub fn shape(&self) -> FatShape {
        match (self.min.is_fat(), self.max.is_fat()) {
            (false, false) => FatShape::None,
            (false, true) => FatShape::MaxOnly,
            (true, false) => FatShape::MinOnly,
            (true, true) => FatShape::Both,
        }
    }

    pub fn fat_count(&self) -> usize {
        self.min.is_fat() as usize + self.max.is_fat() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }

    pub fn interior_count(&self) -> usize {
        self.chains.iter().map(|c| c.len().saturating_sub(1)).sum()
    }

    /// Number of isolated fixed points.
    pub fn iso(&self) -> usize {
        self.interior_count() + (!self.min.is_fat()) as usize + (!self.max.is_fat()) as usize
    }

    pub fn y_min(&self) -> &Q {
        self.min.height()
    }

    pub fn y_max(&self) -> &Q {
        self.max.height()
    }

    /// Height of the interior vertex v_{i,j}.
    pub fn vertex_height(&self, i: usize, j: usize) -> Q {
        let c = &self.chains[i - 1];
        c.edges[..j].iter().fold(self.y_min().clone(), |a, e| a + &e.len)
    }

    pub fn components(&self) -> Vec<FixedComponent> {
        let mut out = vec![FixedComponent::Min];
        for (i, c) in self.chains.iter().enumerate() {
            for j in 1..c.len() {
                out.push(FixedComponent::Interior(i + 1, j));
            }
        }
        out.push(FixedComponent::Max);
        out
    }

    pub fn height_of(&self, c: FixedComponent) -> Q {
        match c {
            FixedComponent::Min => self.y_min().clone(),
            FixedComponent::Max => self.y_max().clone(),
            FixedComponent::Interior(i, j) => self.vertex_height(i, j),
        }
    }

    pub fn is_point(&self, c: FixedComponent) -> bool {
        match c {
            FixedComponent::Min => !self.min.is_fat(),
            FixedComponent::Max => !self.max.is_fat(),
            FixedComponent::Interior(..) => true,
        }
    }

    /// Signed label m_{i,j} for 0 <= j <= ℓ_i + 1, with the boundary conventions
    /// m_{i,0} and m_{i,ℓ+1} depending on which extremes are fat.
    pub fn m_signed(&self, i: usize, j: usize) -> i64 {
        let l = self.ell(i);
        if j >= 1 && j <= l {
            return self.m(i, j);
        }
        let other = if i == 1 { 2 } else { 1 };
        if j == 0 {
            if self.min.is_fat() {
                0
            } else if i <= 2 {
                -self.m(other, 1)
            } else {
                -self.m(1, 1) * self.m(2, 1)
            }
        } else {
            debug_assert_eq!(j, l + 1);
            if self.max.is_fat() {
                0
            } else if i <= 2 {
                -self.m(other, self.ell(other))
            } else {
                -self.m(1, self.ell(1)) * self.m(2, self.ell(2))
            }
        }
    }

    /// Combinatorial self-intersection −(m_{i,j−1} + m_{i,j+1})/m_{i,j}.
    pub fn self_intersection(&self, i: usize, j: usize) -> Q {
        -q(self.m_signed(i, j - 1) + self.m_signed(i, j + 1), self.m(i, j))
    }

    /// Isotropy weights at an isolated fixed point.
    pub fn weights_at(&self, c: FixedComponent) -> Option<(i64, i64)> {
        match c {
            FixedComponent::Interior(i, j) => Some((-self.m(i, j), self.m(i, j + 1))),
            FixedComponent::Min if !self.min.is_fat() => Some((self.m(1, 1), self.m(2, 1))),
            FixedComponent::Max if !self.max.is_fat() => {
                Some((-self.m(1, self.ell(1)), -self.m(2, self.ell(2))))
            }
            _ => None,
        }
    }

    /// The graph upside down: heights y ↦ y_max − y, chains reversed, not re-sorted.
    pub fn reversed_raw(&self) -> ExtendedGraph {
        let h = self.y_max() - self.y_min();
        ExtendedGraph {
            genus: self.genus,
            min: self.max.with_height(Q::zero()),
            max: self.min.with_height(h),
            chains: self.chains.iter().map(|c| c.reversed()).collect(),
        }
    }

    /// Sort key order between chains, depending on the fat shape.
    pub fn chain_cmp(&self, a: &Chain, b: &Chain) -> Ordering {
        let (la, lb, ra, rb);
        let (ka, kb) = if self.shape() == FatShape::MinOnly {
            ra = a.reversed();
            rb = b.reversed();
            la = ra.labels();
            lb = rb.labels();
            (&ra, &rb)
        } else {
            la = a.labels();
            lb = b.labels();
            (a, b)
        };
        lb.cmp(&la).then_with(|| {
            let xa: Vec<&Q> = ka.edges.iter().map(|e| &e.len).collect();
            let xb: Vec<&Q> = kb.edges.iter().map(|e| &e.len).collect();
            xa.cmp(&xb)
        })
    }

    /// Permutation that sorts the chains canonically: perm[new] = old (0-based).
    pub fn canonical_perm(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.k()).collect();
        idx.sort_by(|&x, &y| self.chain_cmp(&self.chains[x], &self.chains[y]).then(x.cmp(&y)));
        idx
    }

    pub fn sort_chains(&mut self) -> Vec<usize> {
        let p = self.canonical_perm();
        self.chains = p.iter().map(|&o| self.chains[o].clone()).collect();
        p
    }

    pub fn is_sorted(&self) -> bool {
        self.chains
            .windows(2)
            .all(|w| self.chain_cmp(&w[0], &w[1]) != Ordering::Greater)
    }

    pub fn ephemeral_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        match self.shape() {
            FatShape::MaxOnly if self.k() >= 2 && self.m(2, 1) >= 2 => {
                out.extend((3..=self.k()).map(|i| (i, 1)));
            }
            FatShape::MinOnly if self.k() >= 2 && self.m(2, self.ell(2)) >= 2 => {
                out.extend((3..=self.k()).map(|i| (i, self.ell(i))));
            }
            _ => {}
        }
        out
    }

    /// Coefficient of t^q in the equivariant Poincaré series.
    pub fn poincare_rank(&self, q: usize) -> usize {
        let iso = self.iso();
        let fat = self.fat_count();
        let g2 = 2 * self.genus as usize;
        match q {
            0 => 1,
            1 => {
                if self.min.is_fat() {
                    g2
                } else {
                    0
                }
            }
            2 => iso + 2 * fat - 1,
            _ if q % 2 == 0 => iso + 2 * fat,
            _ => fat * g2,
        }
    }

    /// Sum over interior points of 1/(m m'), and of y_p/(m m').
    fn interior_sums(&self) -> (Q, Q) {
        let mut s = Q::zero();
        let mut sy = Q::zero();
        for (i, c) in self.chains.iter().enumerate() {
            for j in 1..c.len() {
                let e = q(1, c.edges[j - 1].m * c.edges[j].m);
                sy += self.vertex_height(i + 1, j) * &e;
                s += e;
            }
        }
        (s, sy)
    }

    /// (e_min, e_max) from heights, areas and interior weights.
    pub fn extremal_self_intersections(&self) -> (Q, Q) {
        let (s, sy) = self.interior_sums();
        let (ymin, ymax) = (self.y_min(), self.y_max());
        let h = ymax - ymin;
        let (amin, amax) = (self.min.area(), self.max.area());
        if h.is_zero() {
            return (Q::zero(), Q::zero());
        }
        let emin = (&sy + &amin - &s * ymax - &amax) / &h;
        let emax = (&s * ymin + &amax - &sy - &amin) / &h;
        (emin, emax)
    }

    /// Dull-graph data: label>1 subchains with attachment.
    pub fn dull(&self) -> DullGraph {
        let (emin, emax) = self.extremal_self_intersections();
        let mark = |x: &Extreme, e: &Q| {
            if x.is_fat() {
                DullExtreme::Fat(as_i64(e).unwrap_or(0))
            } else {
                DullExtreme::Isolated
            }
        };
        let labels: Vec<Vec<i64>> = self.chains.iter().map(|c| c.labels()).collect();
        DullGraph::from_labels(self.genus, mark(&self.min, &emin), mark(&self.max, &emax), &labels)
    }

    /// Multiset of isotropy weight pairs, each pair sorted.
    pub fn isotropy_weights(&self) -> Vec<(i64, i64)> {
        let mut out: Vec<(i64, i64)> = self
            .components()
            .into_iter()
            .filter_map(|c| self.weights_at(c))
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        out.sort();
        out
    }

    /// Translates heights so the min sits at 0, flips a graph whose only fat
    /// extreme is the min, and sorts chains. Returns notes on what changed.
    pub fn normalized(&self) -> (ExtendedGraph, Vec<String>) {
        let mut notes = Vec::new();
        let mut g = self.clone();
        if !g.y_min().is_zero() {
            notes.push(format!("translated heights by {}", fmt_q(&-g.y_min().clone())));
            let h = g.y_max() - g.y_min();
            g.min = g.min.with_height(Q::zero());
            g.max = g.max.with_height(h);
        }
        if g.shape() == FatShape::MinOnly {
            notes.push("only fat extreme was the min; stored flipped".to_string());
            g = g.reversed_raw();
        }
        g.sort_chains();
        (g, notes)
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn check(&self) -> Result<()> {
        self.validate().map_err(Error::Invalid)
    }

    /// All structural checks, without requiring the one-fat-at-max convention.
    pub fn violations_relaxed(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let k = self.k();
        if k < 2 {
            v.push(viol("k_lt_2", format!("k >= 2 required, found {k}")));
        }
        for x in [&self.min, &self.max] {
            if let Extreme::Fat { area, .. } = x {
                if !area.is_positive() {
                    v.push(viol("area_nonpositive", "area must be positive"));
                }
            }
        }
        if !self.y_min().is_zero() {
            v.push(viol("min_height", "min height must be 0"));
        }
        let h = self.y_max() - self.y_min();
        if !h.is_positive() {
            v.push(viol("height_order", "max must lie above min"));
        }
        let mut structural = true;
        for (i, c) in self.chains.iter().enumerate() {
            let i1 = i + 1;
            if c.is_empty() {
                v.push(viol("empty_chain", format!("chain {i1} has no edges")));
                structural = false;
                continue;
            }
            for (j, e) in c.edges.iter().enumerate() {
                if e.m < 1 {
                    v.push(viol("label_nonpositive", format!("edge ({i1},{}) label {}", j + 1, e.m)));
                    structural = false;
                }
                if !e.len.is_positive() {
                    v.push(viol("length_nonpositive", format!("edge ({i1},{}) length must be positive", j + 1)));
                }
            }
            if c.total() != h {
                v.push(viol("chain_sum", format!("chain {i1} lengths sum to {}, expected {}", fmt_q(&c.total()), fmt_q(&h))));
            }
            for (j, w) in c.edges.windows(2).enumerate() {
                if gcd(w[0].m, w[1].m) != 1 {
                    v.push(viol(
                        "adjacent_not_coprime",
                        format!("adjacent labels not coprime: {} and {} at v({i1},{})", w[0].m, w[1].m, j + 1),
                    ));
                }
            }
            let l = c.len();
            for (j, e) in c.edges.iter().enumerate() {
                if e.m == 1 && j != 0 && j + 1 != l {
                    v.push(viol("label1_interior", format!("label-1 edge ({i1},{}) is neither first nor last", j + 1)));
                }
            }
            if self.min.is_fat() && c.edges[0].m != 1 {
                v.push(viol("fat_edge_label", format!("edge ({i1},1) at the fat min must have label 1")));
            }
            if self.max.is_fat() && c.edges[l - 1].m != 1 {
                v.push(viol("fat_edge_label", format!("edge ({i1},{l}) at the fat max must have label 1")));
            }
        }
        match self.shape() {
            FatShape::None => {
                if k != 2 {
                    v.push(viol("no_fat_k", format!("no fat extreme requires k = 2, found {k}")));
                }
            }
            FatShape::MaxOnly => {
                for i in 3..=k {
                    if !self.chains[i - 1].is_empty() && self.m(i, 1) != 1 {
                        v.push(viol("one_fat_chain_start", format!("chain {i} must start with label 1")));
                    }
                }
            }
            FatShape::MinOnly => {
                for i in 3..=k {
                    if !self.chains[i - 1].is_empty() && self.m(i, self.ell(i)) != 1 {
                        v.push(viol("one_fat_chain_start", format!("chain {i} must end with label 1")));
                    }
                }
            }
            FatShape::Both => {}
        }
        if self.genus > 0 && self.fat_count() < 2 {
            v.push(viol("genus_fat", "positive genus requires two fat extremes"));
        }
        let trivial = self.chains.iter().filter(|c| c.is_trivial()).count();
        let nontrivial = k - trivial;
        if trivial > 0 {
            let want = if self.fat_count() >= 1 { 2usize.saturating_sub(nontrivial) } else { 0 };
            if trivial != want {
                v.push(viol(
                    "redundant_chain",
                    format!("{trivial} trivial [1] chains present, canonical count is {want}"),
                ));
            }
        }
        if !structural || k < 2 {
            return v;
        }
        if !self.is_sorted() {
            v.push(viol("chain_order", "chains not in canonical order"));
        }
        for extreme in [FixedComponent::Min, FixedComponent::Max] {
            if let Some((a, b)) = self.weights_at(extreme) {
                if gcd(a, b) != 1 {
                    v.push(viol("extreme_weights_not_coprime", format!("weights {a},{b} at {extreme} not coprime")));
                }
            }
        }
        for i in 1..=k {
            for j in 1..=self.ell(i) {
                if !is_int(&self.self_intersection(i, j)) {
                    v.push(viol(
                        "self_int_nonintegral",
                        format!("self-intersection of edge ({i},{j}) is {}", fmt_q(&self.self_intersection(i, j))),
                    ));
                }
            }
        }
        if h.is_positive() {
            let (emin, emax) = self.extremal_self_intersections();
            for (x, e, name) in [(&self.min, &emin, "e_min"), (&self.max, &emax, "e_max")] {
                let c = if name == "e_min" { FixedComponent::Min } else { FixedComponent::Max };
                match x {
                    Extreme::Fat { .. } => {
                        if !is_int(e) {
                            v.push(viol("e_consistency", format!("{name} = {} is not an integer", fmt_q(e))));
                        }
                    }
                    Extreme::Isolated { .. } => {
                        let (a, b) = self.weights_at(c).unwrap();
                        let want = q(-1, a * b);
                        if *e != want {
                            v.push(viol(
                                "e_consistency",
                                format!("{name} = {} but isolated weights give {}", fmt_q(e), fmt_q(&want)),
                            ));
                        }
                    }
                }
            }
        }
        v
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = self.violations_relaxed();
        if self.shape() == FatShape::MinOnly {
            v.push(viol("one_fat_not_max", "a single fat extreme must be the max"));
        }
        v
    }

    /// Label>1 data of the graph: what `build_extended` would receive.
    pub fn to_decorated(&self) -> Decorated {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (i, c) in self.chains.iter().enumerate() {
            let id = |j: usize| -> String {
                if j == 0 {
                    "min".into()
                } else if j == c.len() {
                    "max".into()
                } else {
                    format!("v{}_{}", i + 1, j)
                }
            };
            for j in 1..c.len() {
                vertices.push((id(j), self.vertex_height(i + 1, j)));
            }
            for (j, e) in c.edges.iter().enumerate() {
                if e.m > 1 {
                    edges.push(DecEdge { from: id(j), to: id(j + 1), m: e.m });
                }
            }
        }
        Decorated { genus: self.genus, min: self.min.clone(), max: self.max.clone(), vertices, edges }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DullExtreme {
    Isolated,
    Fat(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attach {
    Min,
    Max,
    Both,
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DullChain {
    pub labels: Vec<i64>,
    pub attach: Attach,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DullGraph {
    pub genus: u32,
    pub min: DullExtreme,
    pub max: DullExtreme,
    pub chains: Vec<DullChain>,
}

impl DullChain {
    /// Free components are unoriented; keep the smaller of the two readings.
    fn canonical(&self) -> DullChain {
        if self.attach == Attach::Free {
            let r: Vec<i64> = self.labels.iter().rev().copied().collect();
            DullChain { labels: r.min(self.labels.clone()), attach: Attach::Free }
        } else {
            self.clone()
        }
    }

    /// The same component seen from the other end of the graph.
    pub fn swapped(&self) -> DullChain {
        let attach = match self.attach {
            Attach::Min => Attach::Max,
            Attach::Max => Attach::Min,
            a => a,
        };
        DullChain { labels: self.labels.iter().rev().copied().collect(), attach }.canonical()
    }
}

impl DullGraph {
    /// Dull graph of an extended graph given only its chain labels.
    pub fn from_labels(genus: u32, min: DullExtreme, max: DullExtreme, chains: &[Vec<i64>]) -> DullGraph {
        let mut comps = Vec::new();
        for ls in chains {
            let inner: Vec<i64> = ls.iter().copied().filter(|&m| m > 1).collect();
            if inner.is_empty() {
                if ls.len() == 2 {
                    comps.push(DullChain { labels: vec![], attach: Attach::Free });
                }
                continue;
            }
            let attach = match (ls[0] > 1, *ls.last().unwrap() > 1) {
                (true, true) => Attach::Both,
                (true, false) => Attach::Min,
                (false, true) => Attach::Max,
                (false, false) => Attach::Free,
            };
            comps.push(DullChain { labels: inner, attach });
        }
        DullGraph { genus, min, max, chains: comps }.canonical()
    }

    pub fn canonical(&self) -> DullGraph {
        let mut chains: Vec<DullChain> = self.chains.iter().map(|c| c.canonical()).collect();
        chains.sort();
        DullGraph { genus: self.genus, min: self.min.clone(), max: self.max.clone(), chains }
    }

    /// The dull graph with the roles of min and max exchanged.
    pub fn swapped(&self) -> DullGraph {
        DullGraph {
            genus: self.genus,
            min: self.max.clone(),
            max: self.min.clone(),
            chains: self.chains.iter().map(|c| c.swapped()).collect(),
        }
        .canonical()
    }

    pub fn to_json(&self) -> Value {
        let ext = |x: &DullExtreme| match x {
            DullExtreme::Isolated => json!({"fat": false}),
            DullExtreme::Fat(e) => json!({"fat": true, "e": e}),
        };
        let chains: Vec<Value> = self
            .chains
            .iter()
            .map(|c| {
                let a = match c.attach {
                    Attach::Min => "min",
                    Attach::Max => "max",
                    Attach::Both => "both",
                    Attach::Free => "free",
                };
                json!({"labels": c.labels, "attach": a})
            })
            .collect();
        json!({"genus": self.genus, "min": ext(&self.min), "max": ext(&self.max), "chains": chains})
    }
}

impl fmt::Display for DullGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ext = |x: &DullExtreme| match x {
            DullExtreme::Isolated => "isolated".to_string(),
            DullExtreme::Fat(e) => format!("fat(e={e})"),
        };
        write!(f, "g={} min={} max={} chains=[", self.genus, ext(&self.min), ext(&self.max))?;
        for (n, c) in self.chains.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}@{:?}", c.labels, c.attach)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------- decorated

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecEdge {
    pub from: String,
    pub to: String,
    pub m: i64,
}

/// Decorated graph: label>1 edges only, vertices named by id ("min"/"max" reserved).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decorated {
    pub genus: u32,
    pub min: Extreme,
    pub max: Extreme,
    pub vertices: Vec<(String, Q)>,
    pub edges: Vec<DecEdge>,
}

pub fn build_extended(d: &Decorated) -> Result<ExtendedGraph> {
    let ymin = d.min.height().clone();
    let ymax = d.max.height().clone();
    let mut height: BTreeMap<String, Q> = BTreeMap::new();
    for (id, h) in &d.vertices {
        if id == "min" || id == "max" {
            return Err(Error::Constraint(format!("vertex id {id:?} is reserved")));
        }
        if !(*h > ymin && *h < ymax) {
            return Err(Error::Constraint(format!("interior vertex {id} height {} not strictly between extremes", fmt_q(h))));
        }
        if height.insert(id.clone(), h.clone()).is_some() {
            return Err(Error::Constraint(format!("duplicate vertex {id}")));
        }
    }
    let h_of = |id: &str| -> Result<Q> {
        match id {
            "min" => Ok(ymin.clone()),
            "max" => Ok(ymax.clone()),
            _ => height.get(id).cloned().ok_or_else(|| Error::Constraint(format!("unknown vertex {id}"))),
        }
    };
    // up[v] = (w, m): the label>1 edge leaving v upward
    let mut up: BTreeMap<String, Vec<(String, i64)>> = BTreeMap::new();
    let mut down: BTreeMap<String, usize> = BTreeMap::new();
    for e in &d.edges {
        if e.m < 2 {
            return Err(Error::Constraint(format!("decorated edge {}-{} has label {} < 2", e.from, e.to, e.m)));
        }
        let (a, b) = (h_of(&e.from)?, h_of(&e.to)?);
        let (lo, hi) = match a.cmp(&b) {
            Ordering::Less => (e.from.clone(), e.to.clone()),
            Ordering::Greater => (e.to.clone(), e.from.clone()),
            Ordering::Equal => return Err(Error::Constraint(format!("edge {}-{} is horizontal", e.from, e.to))),
        };
        up.entry(lo).or_default().push((hi.clone(), e.m));
        *down.entry(hi).or_default() += 1;
    }
    for (v, ups) in &up {
        if v != "min" && ups.len() > 1 {
            return Err(Error::Constraint(format!("vertex {v} has more than one edge above it")));
        }
    }
    for (v, n) in &down {
        if v != "max" && *n > 1 {
            return Err(Error::Constraint(format!("vertex {v} has more than one edge below it")));
        }
    }
    let mut chains = Vec::new();
    let mut starts: Vec<String> = Vec::new();
    if let Some(ups) = up.get("min") {
        starts.extend(std::iter::repeat("min".to_string()).take(ups.len()));
    }
    for (id, _) in &d.vertices {
        if up.contains_key(id) && !down.contains_key(id) {
            starts.push(id.clone());
        }
    }
    let mut min_used = 0usize;
    for s in starts {
        let mut edges = Vec::new();
        if s != "min" {
            edges.push(Edge::new(1, h_of(&s)? - &ymin));
        }
        let mut cur = s.clone();
        let mut first = true;
        loop {
            let next = match up.get(&cur) {
                Some(v) if cur == "min" => {
                    if !first {
                        break;
                    }
                    let n = v[min_used].clone();
                    min_used += 1;
                    Some(n)
                }
                Some(v) => Some(v[0].clone()),
                None => None,
            };
            first = false;
            match next {
                Some((w, m)) => {
                    edges.push(Edge::new(m, h_of(&w)? - h_of(&cur)?));
                    cur = w;
                    if cur == "max" {
                        break;
                    }
                }
                None => break,
            }
        }
        if cur != "max" {
            edges.push(Edge::new(1, &ymax - h_of(&cur)?));
        }
        chains.push(Chain::new(edges));
    }
    for (id, h) in &d.vertices {
        if !up.contains_key(id) && !down.contains_key(id) {
            chains.push(Chain::new(vec![Edge::new(1, h - &ymin), Edge::new(1, &ymax - h)]));
        }
    }
    let fat = d.min.is_fat() as usize + d.max.is_fat() as usize;
    if fat >= 1 {
        while chains.len() < 2 {
            chains.push(Chain::new(vec![Edge::new(1, &ymax - &ymin)]));
        }
    }
    let g = ExtendedGraph { genus: d.genus, min: d.min.clone(), max: d.max.clone(), chains };
    Ok(g.normalized().0)
}

// ---------------------------------------------------------------- file format

fn perr(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.into(), msg: msg.into() }
}

fn get_q(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| perr(path, e)),
        Value::Number(n) if n.is_i64() => Ok(qi(n.as_i64().unwrap())),
        _ => Err(perr(path, "expected a rational string")),
    }
}

fn get_extreme(v: &Value, path: &str) -> Result<Extreme> {
    let fat = v
        .get("fat")
        .and_then(Value::as_bool)
        .ok_or_else(|| perr(format!("{path}.fat"), "expected a boolean"))?;
    let height = get_q(v.get("height").unwrap_or(&Value::Null), &format!("{path}.height"))?;
    if fat {
        let area = get_q(v.get("area").unwrap_or(&Value::Null), &format!("{path}.area"))?;
        if !area.is_positive() {
            return Err(perr(format!("{path}.area"), "area must be positive"));
        }
        Ok(Extreme::Fat { height, area })
    } else {
        if v.get("area").is_some() {
            return Err(perr(format!("{path}.area"), "area present on an isolated extreme"));
        }
        Ok(Extreme::Isolated { height })
    }
}

fn get_genus(v: &Value) -> Result<u32> {
    v.get("genus")
        .and_then(Value::as_u64)
        .map(|g| g as u32)
        .ok_or_else(|| perr("genus", "expected a non-negative integer"))
}

/// Parses a graph document. Accepts the chain form and the decorated form
/// (with "vertices"/"edges"); the latter goes through `build_extended`.
pub fn parse_graph(text: &str) -> Result<ExtendedGraph> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr(format!("line {}", e.line()), e.to_string()))?;
    graph_from_json(&v)
}

pub fn graph_from_json(v: &Value) -> Result<ExtendedGraph> {
    let genus = get_genus(v)?;
    let min = get_extreme(v.get("min").unwrap_or(&Value::Null), "min")?;
    let max = get_extreme(v.get("max").unwrap_or(&Value::Null), "max")?;
    if let Some(chains) = v.get("chains") {
        let arr = chains.as_array().ok_or_else(|| perr("chains", "expected an array"))?;
        let mut out = Vec::new();
        for (i, c) in arr.iter().enumerate() {
            let edges = c
                .get("edges")
                .and_then(Value::as_array)
                .ok_or_else(|| perr(format!("chains[{i}].edges"), "expected an array"))?;
            let mut es = Vec::new();
            for (j, e) in edges.iter().enumerate() {
                let p = format!("chains[{i}].edges[{j}]");
                let m = e
                    .get("m")
                    .and_then(Value::as_i64)
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| perr(format!("{p}.m"), "expected an integer >= 1"))?;
                let len = get_q(e.get("len").unwrap_or(&Value::Null), &format!("{p}.len"))?;
                if !len.is_positive() {
                    return Err(perr(format!("{p}.len"), "length must be positive"));
                }
                es.push(Edge::new(m, len));
            }
            out.push(Chain::new(es));
        }
        return Ok(ExtendedGraph { genus, min, max, chains: out });
    }
    if v.get("vertices").is_some() || v.get("edges").is_some() {
        return build_extended(&decorated_from_json(v)?);
    }
    Err(perr("chains", "missing"))
}

pub fn decorated_from_json(v: &Value) -> Result<Decorated> {
    let genus = get_genus(v)?;
    let min = get_extreme(v.get("min").unwrap_or(&Value::Null), "min")?;
    let max = get_extreme(v.get("max").unwrap_or(&Value::Null), "max")?;
    let mut vertices = Vec::new();
    for (i, x) in v.get("vertices").and_then(Value::as_array).cloned().unwrap_or_default().iter().enumerate() {
        let id = x
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| perr(format!("vertices[{i}].id"), "expected a string"))?;
        let h = get_q(x.get("height").unwrap_or(&Value::Null), &format!("vertices[{i}].height"))?;
        vertices.push((id.to_string(), h));
    }
    let mut edges = Vec::new();
    for (i, x) in v.get("edges").and_then(Value::as_array).cloned().unwrap_or_default().iter().enumerate() {
        let s = |k: &str| {
            x.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| perr(format!("edges[{i}].{k}"), "expected a string"))
        };
        let m = x
            .get("m")
            .and_then(Value::as_i64)
            .ok_or_else(|| perr(format!("edges[{i}].m"), "expected an integer"))?;
        edges.push(DecEdge { from: s("from")?, to: s("to")?, m });
    }
    Ok(Decorated { genus, min, max, vertices, edges })
}

fn extreme_json(x: &Extreme) -> Value {
    match x {
        Extreme::Isolated { height } => json!({"fat": false, "height": fmt_q(height)}),
        Extreme::Fat { height, area } => json!({"fat": true, "height": fmt_q(height), "area": fmt_q(area)}),
    }
}

impl ExtendedGraph {
    pub fn to_json(&self) -> Value {
        let chains: Vec<Value> = self
            .chains
            .iter()
            .map(|c| {
                let es: Vec<Value> = c.edges.iter().map(|e| json!({"m": e.m, "len": fmt_q(&e.len)})).collect();
                json!({ "edges": es })
            })
            .collect();
        json!({
            "genus": self.genus,
            "min": extreme_json(&self.min),
            "max": extreme_json(&self.max),
            "chains": chains,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).unwrap()
    }
}

impl fmt::Display for ExtendedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ext = |x: &Extreme| match x {
            Extreme::Isolated { height } => format!("pt@{}", fmt_q(height)),
            Extreme::Fat { height, area } => format!("fat@{}(a={})", fmt_q(height), fmt_q(area)),
        };
        write!(f, "g={} min={} max={} chains=", self.genus, ext(&self.min), ext(&self.max))?;
        for c in &self.chains {
            write!(f, "[")?;
            for (n, e) in c.edges.iter().enumerate() {
                if n > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}:{}", e.m, fmt_q(&e.len))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- enumeration

/// Label sequences admissible for one chain, ignoring lengths.
fn chain_label_seqs(max_len: usize, max_label: i64, first_one: bool, last_one: bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(cur: &mut Vec<i64>, max_len: usize, max_label: i64, first_one: bool, last_one: bool, out: &mut Vec<Vec<i64>>) {
        let l = cur.len();
        if l >= 1 {
            let last = *cur.last().unwrap();
            let ok_last = !last_one || last == 1;
            let interior_ok = cur.iter().enumerate().all(|(j, &m)| m != 1 || j == 0 || j + 1 == l);
            if ok_last && interior_ok {
                out.push(cur.clone());
            }
        }
        if l == max_len {
            return;
        }
        for m in 1..=max_label {
            if l == 0 && first_one && m != 1 {
                continue;
            }
            if l >= 1 && gcd(cur[l - 1], m) != 1 {
                continue;
            }
            // label 1 strictly inside is never allowed; a 1 can only be first or final
            if l >= 2 && cur[l - 1] == 1 {
                continue;
            }
            cur.push(m);
            rec(cur, max_len, max_label, first_one, last_one, out);
            cur.pop();
        }
    }
    rec(&mut cur, max_len, max_label, first_one, last_one, &mut out);
    out
}

/// Strictly increasing sequences of `n` grid values inside (0, h).
fn interior_heights(grid: &[Q], h: &Q, n: usize) -> Vec<Vec<Q>> {
    let inside: Vec<&Q> = grid.iter().filter(|x| x.is_positive() && *x < h).collect();
    let mut out = Vec::new();
    let mut cur: Vec<Q> = Vec::new();
    fn rec(inside: &[&Q], start: usize, n: usize, cur: &mut Vec<Q>, out: &mut Vec<Vec<Q>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for s in start..inside.len() {
            cur.push(inside[s].clone());
            rec(inside, s + 1, n, cur, out);
            cur.pop();
        }
    }
    rec(&inside, 0, n, &mut cur, &mut out);
    out
}

/// Grid of heights/areas: multiples of 1/d for d <= max_den, in (0, 2].
pub fn value_grid(max_den: i64) -> Vec<Q> {
    let mut s = BTreeSet::new();
    for d in 1..=max_den.max(1) {
        for n in 1..=2 * d {
            s.insert(q(n, d));
        }
    }
    s.into_iter().collect()
}

#[derive(Clone, Copy, Debug)]
pub struct EnumBounds {
    pub max_edges: usize,
    pub max_label: i64,
    pub max_den: i64,
    pub max_genus: u32,
}

impl EnumBounds {
    pub fn new(max_edges: usize, max_label: i64, max_den: i64) -> Self {
        EnumBounds { max_edges, max_label, max_den, max_genus: 1 }
    }
}

/// Every valid extended graph within the bounds, in a deterministic order.
///
/// Total heights and interior heights come from `value_grid(max_den)`. Fat
/// areas range over the same grid, except that an area forced by the
/// extremal self-intersection constraint is taken as computed.
pub fn enumerate_graphs(b: EnumBounds) -> Vec<ExtendedGraph> {
    let grid = value_grid(b.max_den);
    let mut found: BTreeSet<(usize, ExtendedGraph)> = BTreeSet::new();
    let shapes = [(false, false), (false, true), (true, true)];
    for &(fmin, fmax) in &shapes {
        let seqs = chain_label_seqs(b.max_edges, b.max_label, fmin, fmax);
        let max_k = if !fmin && !fmax { 2 } else { b.max_edges };
        let mut multisets: Vec<Vec<usize>> = Vec::new();
        let mut cur = Vec::new();
        fn rec_ms(seqs: &[Vec<i64>], start: usize, budget: usize, max_k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            if cur.len() == max_k {
                return;
            }
            for s in start..seqs.len() {
                if seqs[s].len() <= budget {
                    cur.push(s);
                    rec_ms(seqs, s, budget - seqs[s].len(), max_k, cur, out);
                    cur.pop();
                }
            }
        }
        rec_ms(&seqs, 0, b.max_edges, max_k, &mut cur, &mut multisets);
        let genera: Vec<u32> = if fmin && fmax { (0..=b.max_genus).collect() } else { vec![0] };
        for ms in multisets {
            let labels: Vec<&Vec<i64>> = ms.iter().map(|&s| &seqs[s]).collect();
            if !labels_admissible(&labels, fmin, fmax) {
                continue;
            }
            for h in &grid {
                let per_chain: Vec<Vec<Vec<Q>>> = labels.iter().map(|l| interior_heights(&grid, h, l.len() - 1)).collect();
                if per_chain.iter().any(|x| x.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; per_chain.len()];
                loop {
                    let chains: Vec<Chain> = labels
                        .iter()
                        .zip(&idx)
                        .enumerate()
                        .map(|(c, (l, &n))| {
                            let hs = &per_chain[c][n];
                            let mut pts = vec![Q::zero()];
                            pts.extend(hs.iter().cloned());
                            pts.push(h.clone());
                            Chain::new(l.iter().enumerate().map(|(j, &m)| Edge::new(m, &pts[j + 1] - &pts[j])).collect())
                        })
                        .collect();
                    for &genus in &genera {
                        for g in complete_extremes(genus, fmin, fmax, h, &chains, &grid) {
                            let (g, _) = g.normalized();
                            if g.violations().is_empty() {
                                found.insert((g.edge_count(), g));
                            }
                        }
                    }
                    // odometer
                    let mut p = 0;
                    loop {
                        if p == idx.len() {
                            break;
                        }
                        idx[p] += 1;
                        if idx[p] < per_chain[p].len() {
                            break;
                        }
                        idx[p] = 0;
                        p += 1;
                    }
                    if p == idx.len() {
                        break;
                    }
                }
            }
        }
    }
    found.into_iter().map(|(_, g)| g).collect()
}

/// Cheap label-only filters applied before heights are chosen.
fn labels_admissible(labels: &[&Vec<i64>], fmin: bool, fmax: bool) -> bool {
    let k = labels.len();
    let trivial = labels.iter().filter(|l| l.len() == 1 && l[0] == 1).count();
    let want = if fmin || fmax { 2usize.saturating_sub(k - trivial) } else { 0 };
    if trivial != want {
        return false;
    }
    if fmax && !fmin {
        let mut firsts: Vec<i64> = labels.iter().map(|l| l[0]).collect();
        firsts.sort_by(|a, b| b.cmp(a));
        if firsts[2..].iter().any(|&m| m != 1) {
            return false;
        }
    }
    true
}

fn complete_extremes(genus: u32, fmin: bool, fmax: bool, h: &Q, chains: &[Chain], grid: &[Q]) -> Vec<ExtendedGraph> {
    let base = |min: Extreme, max: Extreme| ExtendedGraph { genus, min, max, chains: chains.to_vec() };
    let iso_min = Extreme::Isolated { height: Q::zero() };
    let iso_max = Extreme::Isolated { height: h.clone() };
    match (fmin, fmax) {
        (false, false) => vec![base(iso_min, iso_max)],
        (false, true) => {
            // a_max is forced by e_min = −1/(m11 m21); compute it from a probe with area 1
            let mut g = base(iso_min, Extreme::Fat { height: h.clone(), area: Q::one() });
            g.sort_chains();
            let (emin, _) = g.extremal_self_intersections();
            let want = q(-1, g.m(1, 1) * g.m(2, 1));
            let area = Q::one() + (&emin - &want) * h;
            if !area.is_positive() {
                return vec![];
            }
            g.max = Extreme::Fat { height: h.clone(), area };
            vec![g]
        }
        (true, true) => {
            let mut out = Vec::new();
            for amax in grid {
                let g0 = base(
                    Extreme::Fat { height: Q::zero(), area: Q::one() },
                    Extreme::Fat { height: h.clone(), area: amax.clone() },
                );
                let (e0, _) = g0.extremal_self_intersections();
                // a_min = 1 + (e − e0)·h for integer e; keep those on the grid
                for amin in grid {
                    let e = &e0 + (amin - Q::one()) / h;
                    if is_int(&e) {
                        let mut g = g0.clone();
                        g.min = Extreme::Fat { height: Q::zero(), area: amin.clone() };
                        out.push(g);
                    }
                }
            }
            out
        }
        (true, false) => vec![],
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn cp2_211() -> ExtendedGraph {
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

    #[test]
    fn cp2_211_invariants() {
        let g = cp2_211();
        assert!(g.validate().is_ok(), "{:?}", g.validate());
        let (a, b) = g.extremal_self_intersections();
        assert_eq!(a, q(-1, 2));
        assert_eq!(b, q(-1, 2));
        assert_eq!(g.isotropy_weights(), vec![(-2, -1), (-1, 1), (1, 2)]);
        let ranks: Vec<usize> = (0..7).map(|n| g.poincare_rank(n)).collect();
        assert_eq!(ranks, vec![1, 0, 2, 0, 3, 0, 3]);
        assert_eq!(g.self_intersection(2, 1), qi(1));
    }

    #[test]
    fn adjacent_labels_flagged() {
        let mut g = cp2_211();
        g.chains[1].edges[0].m = 2;
        g.chains[1].edges[1].m = 4;
        let v = g.violations();
        assert!(v.iter().any(|x| x.code == "adjacent_not_coprime"));
    }

    #[test]
    fn decorated_roundtrip() {
        let g = cp2_211();
        assert_eq!(build_extended(&g.to_decorated()).unwrap(), g);
    }

    #[test]
    fn lone_point_without_second_chain() {
        let d = Decorated {
            genus: 0,
            min: Extreme::Isolated { height: qi(0) },
            max: Extreme::Isolated { height: qi(2) },
            vertices: vec![("p".into(), qi(1))],
            edges: vec![],
        };
        let g = build_extended(&d).unwrap();
        assert!(g.violations().iter().any(|v| v.code == "k_lt_2"));
    }

    #[test]
    fn json_roundtrip() {
        let g = cp2_211();
        assert_eq!(parse_graph(&g.to_json_string()).unwrap(), g);
        let bad = r#"{"genus":0,"min":{"fat":true,"height":"0","area":"0"},"max":{"fat":false,"height":"1"},"chains":[]}"#;
        match parse_graph(bad) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("area must be positive")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_seqs_respect_rules() {
        for s in chain_label_seqs(4, 4, true, true) {
            assert_eq!(s[0], 1);
            assert_eq!(*s.last().unwrap(), 1);
        }
    }
}
