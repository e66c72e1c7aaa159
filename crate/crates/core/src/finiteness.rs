//! Constants bounding the classes of maximal actions, and fiber-class recognition.

use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::cohomology::{chern_c1, chern_classes, CohClass2, Gen};
use crate::error::{Error, Result};
use crate::graph_model::ExtendedGraph;
use crate::localization::{intersect, omega_pairing, omega_square};
use crate::rational::{fmt_q, qi, Q};
use crate::reconstruct::{xi_generators, z_generators};
use crate::surgery::{reduce_to_minimal, MinimalModelId};

/// Rank of H²(M): iso + 2·fat − 2.
pub fn b2(g: &ExtendedGraph) -> usize {
    (g.iso() + 2 * g.fat_count()).saturating_sub(2)
}

/// Maximal possible number of edges for a given b₂.
pub fn edge_bound(b2: usize) -> usize {
    (b2 + 2).max((2 * b2).saturating_sub(2))
}

/// ω(F) and ω(B) of the minimal model. For the non-trivial bundle B is the
/// section class of square 1. A CP² model has no ruling of its own; λ bounds
/// both values for any ruling H − E of a blowup.
pub fn ruling_sizes(model: &MinimalModelId) -> (Q, Q) {
    match model {
        MinimalModelId::CP2 { lambda, .. } => (lambda.clone(), lambda.clone()),
        MinimalModelId::Hirzebruch { twist, beta, f, .. } => {
            let b = if twist % 2 == 0 { beta.clone() } else { beta + f / qi(2) };
            (f.clone(), b)
        }
        MinimalModelId::Ruled { fiber, base, e_min, .. } => {
            let b = if e_min.rem_euclid(2) == 0 { base.clone() } else { base + fiber / qi(2) };
            (fiber.clone(), b)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub model: MinimalModelId,
    pub b2: usize,
    pub n: usize,
    pub omega_f: Q,
    pub omega_b: Q,
    pub c_h: Q,
    pub c1_omega: Q,
    pub c: Q,
    pub a: i64,
    pub omega_sq: Q,
    /// Upper bound for −⟨y,y⟩: N·C²/⟨ω,ω⟩ − A.
    pub y_bound: Q,
}

impl BoundReport {
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_string(),
            "b2": self.b2,
            "N": self.n,
            "omega_F": fmt_q(&self.omega_f),
            "omega_B": fmt_q(&self.omega_b),
            "C_h": fmt_q(&self.c_h),
            "c1_omega": fmt_q(&self.c1_omega),
            "C": fmt_q(&self.c),
            "A": self.a,
            "omega_omega": fmt_q(&self.omega_sq),
            "box": {
                "r": format!("0 <= <x,w> <= {}", fmt_q(&self.c)),
                "y": format!("0 <= -<y,y> <= {}", fmt_q(&self.y_bound)),
            },
        })
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model: {}", self.model)?;
        writeln!(f, "b2 = {}, N = {}", self.b2, self.n)?;
        writeln!(f, "ω(F) = {}, ω(B) = {}", fmt_q(&self.omega_f), fmt_q(&self.omega_b))?;
        writeln!(f, "C_h = {}", fmt_q(&self.c_h))?;
        writeln!(f, "∫c1·ω = {}, C = {}", fmt_q(&self.c1_omega), fmt_q(&self.c))?;
        writeln!(f, "A = {}, ⟨ω,ω⟩ = {}", self.a, fmt_q(&self.omega_sq))?;
        write!(f, "box: 0 ≤ ⟨x,ω⟩ ≤ {}, 0 ≤ −⟨y,y⟩ ≤ {}", fmt_q(&self.c), fmt_q(&self.y_bound))
    }
}

pub fn bound_constants(g: &ExtendedGraph) -> Result<BoundReport> {
    g.check()?;
    let (model, _) = reduce_to_minimal(g)?;
    let (omega_f, omega_b) = ruling_sizes(&model);
    let b2 = b2(g);
    let n = edge_bound(b2);
    let nq = qi(n as i64);
    let c_h = if g.genus > 0 {
        qi(2 * g.genus as i64 + n as i64) * &omega_f
    } else {
        nq.clone() * omega_f.clone().max(omega_b.clone())
    };
    let c1_omega = omega_pairing(g, &chern_c1(g))?;
    let c = &c1_omega + &c_h;
    let a = chern_classes(g)?.c1sq_minus_2c2;
    let omega_sq = omega_square(g)?;
    if !omega_sq.is_positive() {
        return Err(Error::BugTrap(format!("⟨ω,ω⟩ = {} is not positive", fmt_q(&omega_sq))));
    }
    let y_bound = &nq * &c * &c / &omega_sq - qi(a);
    Ok(BoundReport { model, b2, n, omega_f, omega_b, c_h, c1_omega, c, a, omega_sq, y_bound })
}

/// ∫((2g+k−2)x_h − Σ z_i)ω.
pub fn xh_functional(g: &ExtendedGraph) -> Result<Q> {
    let mut out = qi(2 * g.genus as i64 + g.k() as i64 - 2) * omega_pairing(g, &CohClass2::gen(Gen::TauH))?;
    for z in z_generators(g) {
        out -= omega_pairing(g, &CohClass2::gen(z))?;
    }
    Ok(out)
}

/// One class x_n = y_n + r_n[ω] of {x₀, x∞} ∪ X.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxEntry {
    pub gen: Gen,
    pub self_pairing: i64,
    pub omega: Q,
    pub r: Q,
    pub yy: Q,
}

/// The classes {x₀, x∞} ∪ X, omitting x₀ or x∞ when that class is zero.
pub fn box_generators(g: &ExtendedGraph) -> Vec<Gen> {
    let mut out = Vec::new();
    if g.min.is_fat() {
        out.push(Gen::Tau0);
    }
    if g.max.is_fat() {
        out.push(Gen::TauInf);
    }
    out.extend(xi_generators(g));
    out
}

pub fn decomposition(g: &ExtendedGraph) -> Result<Vec<BoxEntry>> {
    let w2 = omega_square(g)?;
    box_generators(g)
        .into_iter()
        .map(|x| {
            let c = CohClass2::gen(x);
            let self_pairing = intersect(g, &c, &c)?;
            let omega = omega_pairing(g, &c)?;
            let r = &omega / &w2;
            let yy = qi(self_pairing) - &omega * &omega / &w2;
            Ok(BoxEntry { gen: x, self_pairing, omega, r, yy })
        })
        .collect()
}

/// Outcome of checking a graph's classes against its box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxCheck {
    pub sum_self: i64,
    pub a: i64,
    pub xh: Q,
    pub c_h: Q,
    /// Classes with ⟨x,ω⟩ outside [0, C].
    pub out_of_range: Vec<Gen>,
    /// Classes with ⟨y,y⟩ > 0 or −⟨y,y⟩ above the bound.
    pub y_violations: Vec<Gen>,
}

impl BoxCheck {
    pub fn sum_matches(&self) -> bool {
        self.sum_self == self.a
    }

    pub fn xh_bounded(&self) -> bool {
        self.xh <= self.c_h
    }

    pub fn ok(&self) -> bool {
        self.sum_matches() && self.xh_bounded() && self.out_of_range.is_empty() && self.y_violations.is_empty()
    }
}

pub fn check_box(g: &ExtendedGraph) -> Result<BoxCheck> {
    let rep = bound_constants(g)?;
    let entries = decomposition(g)?;
    let zero = Q::zero();
    let out_of_range = entries.iter().filter(|e| e.omega < zero || e.omega > rep.c).map(|e| e.gen).collect();
    let y_violations = entries.iter().filter(|e| e.yy > zero || -&e.yy > rep.y_bound).map(|e| e.gen).collect();
    Ok(BoxCheck {
        sum_self: entries.iter().map(|e| e.self_pairing).sum(),
        a: rep.a,
        xh: xh_functional(g)?,
        c_h: rep.c_h,
        out_of_range,
        y_violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiberClass {
    Fiber,
    Base,
    Neither(String),
}

impl fmt::Display for FiberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberClass::Fiber => write!(f, "fiber"),
            FiberClass::Base => write!(f, "base"),
            FiberClass::Neither(why) => write!(f, "neither: {why}"),
        }
    }
}

/// Classifies A = p·B̂ + q·F in a ruled surface over a genus-g base.
/// `parity` 0 is the trivial bundle (B̂ = B, B² = 0); 1 the other (B̂² = 1).
pub fn recognize_fiber_class(p: i64, qq: i64, genus: u32, parity: i64) -> FiberClass {
    let trivial = parity.rem_euclid(2) == 0;
    let g = genus as i64;
    let sq = if trivial { 2 * p * qq } else { p * p + 2 * p * qq };
    if sq != 0 {
        return FiberClass::Neither(format!("A·A = {sq}, not 0"));
    }
    let c1_b = if trivial { 2 - 2 * g } else { 3 - 2 * g };
    let c1 = p * c1_b + 2 * qq;
    if c1 != 2 {
        return FiberClass::Neither(format!("c1(A) = {c1}, not 2"));
    }
    // ω(B̂) > ω(F) > 0 for the twisted bundle, so only signs matter here
    let positive = match (p.signum(), qq.signum()) {
        (0, s) | (s, 0) => s > 0,
        (1, 1) => true,
        (-1, -1) => false,
        _ => !trivial && qq < 0,
    };
    if !positive {
        return FiberClass::Neither("ω(A) is not positive".into());
    }
    match (p, qq) {
        (0, 1) => FiberClass::Fiber,
        (1, 0) if g == 0 && trivial => FiberClass::Base,
        _ => FiberClass::Neither(format!("({p}, {qq}) is neither F nor B")),
    }
}

/// Fiber and base sizes of a ruled model, for reports.
pub fn fiber_sizes_note(model: &MinimalModelId) -> String {
    let (f, b) = ruling_sizes(model);
    format!("ω(F) = {}, ω(B) = {}", fmt_q(&f), fmt_q(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_recognition_cases() {
        assert_eq!(recognize_fiber_class(0, 1, 2, 0), FiberClass::Fiber);
        assert_eq!(recognize_fiber_class(1, 0, 0, 0), FiberClass::Base);
        assert!(matches!(recognize_fiber_class(-1, 0, 2, 0), FiberClass::Neither(w) if w.contains("ω")));
        assert!(matches!(recognize_fiber_class(1, 0, 2, 0), FiberClass::Neither(_)));
        assert!(matches!(recognize_fiber_class(1, 1, 0, 0), FiberClass::Neither(w) if w.contains("A·A")));
        assert_eq!(recognize_fiber_class(0, 1, 0, 1), FiberClass::Fiber);
    }

    #[test]
    fn edge_bound_values() {
        assert_eq!(edge_bound(1), 3);
        assert_eq!(edge_bound(2), 4);
        assert_eq!(edge_bound(4), 6);
        assert_eq!(edge_bound(6), 10);
    }
}
