//! Restriction to fixed components, equivariant Euler classes and ABBV integration.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::cohomology::{CohClass2, Gen};
use crate::error::{Error, Result};
use crate::graph_model::{ExtendedGraph, FixedComponent};
use crate::rational::{as_i64, fmt_q, q, qi, Q};

/// Laurent polynomial in t with rational coefficients (zero terms never stored).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Laurent(pub BTreeMap<i32, Q>);

impl Laurent {
    pub fn zero() -> Self {
        Laurent(BTreeMap::new())
    }

    pub fn mono(c: Q, d: i32) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(d, c);
        }
        Laurent(m)
    }

    pub fn constant(c: Q) -> Self {
        Self::mono(c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, d: i32) -> Q {
        self.0.get(&d).cloned().unwrap_or_else(Q::zero)
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.0.keys().next().copied()
    }

    pub fn scale(&self, c: &Q) -> Laurent {
        if c.is_zero() {
            return Laurent::zero();
        }
        Laurent(self.0.iter().map(|(d, x)| (*d, x * c)).collect())
    }

    fn add_term(&mut self, d: i32, c: Q) {
        let e = self.0.entry(d).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&d);
        }
    }
}

impl<'a> Add<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn add(self, o: &Laurent) -> Laurent {
        let mut r = self.clone();
        for (d, c) in &o.0 {
            r.add_term(*d, c.clone());
        }
        r
    }
}

impl<'a> Sub<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn sub(self, o: &Laurent) -> Laurent {
        self + &(-o)
    }
}

impl<'a> Neg for &'a Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent(self.0.iter().map(|(d, c)| (*d, -c)).collect())
    }
}

impl<'a> Mul<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn mul(self, o: &Laurent) -> Laurent {
        let mut r = Laurent::zero();
        for (d1, c1) in &self.0 {
            for (d2, c2) in &o.0 {
                r.add_term(d1 + d2, c1 * c2);
            }
        }
        r
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.0.iter().rev() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let cs = fmt_q(&mag);
            match d {
                0 => write!(f, "{cs}")?,
                1 if cs == "1" => write!(f, "t")?,
                1 => write!(f, "{cs}t")?,
                _ if cs == "1" => write!(f, "t^{d}")?,
                _ => write!(f, "{cs}t^{d}")?,
            }
        }
        Ok(())
    }
}

/// Value at one fixed component: a Laurent polynomial at a point, or
/// p ⊗ 1 + q ⊗ [Σ] at a surface, with [Σ]² = 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ComponentValue {
    Point(Laurent),
    Surface { p: Laurent, q: Laurent },
}

impl ComponentValue {
    pub fn zero_like(surface: bool) -> Self {
        if surface {
            ComponentValue::Surface { p: Laurent::zero(), q: Laurent::zero() }
        } else {
            ComponentValue::Point(Laurent::zero())
        }
    }

    pub fn one_like(surface: bool) -> Self {
        if surface {
            ComponentValue::Surface { p: Laurent::constant(qi(1)), q: Laurent::zero() }
        } else {
            ComponentValue::Point(Laurent::constant(qi(1)))
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ComponentValue::Point(l) => l.is_zero(),
            ComponentValue::Surface { p, q } => p.is_zero() && q.is_zero(),
        }
    }

    pub fn add(&self, o: &ComponentValue) -> ComponentValue {
        match (self, o) {
            (ComponentValue::Point(a), ComponentValue::Point(b)) => ComponentValue::Point(a + b),
            (ComponentValue::Surface { p: p1, q: q1 }, ComponentValue::Surface { p: p2, q: q2 }) => {
                ComponentValue::Surface { p: p1 + p2, q: q1 + q2 }
            }
            _ => panic!("component kind mismatch"),
        }
    }

    pub fn scale(&self, c: &Q) -> ComponentValue {
        match self {
            ComponentValue::Point(a) => ComponentValue::Point(a.scale(c)),
            ComponentValue::Surface { p, q } => ComponentValue::Surface { p: p.scale(c), q: q.scale(c) },
        }
    }

    pub fn mul(&self, o: &ComponentValue) -> ComponentValue {
        match (self, o) {
            (ComponentValue::Point(a), ComponentValue::Point(b)) => ComponentValue::Point(a * b),
            (ComponentValue::Surface { p: p1, q: q1 }, ComponentValue::Surface { p: p2, q: q2 }) => {
                ComponentValue::Surface { p: p1 * p2, q: &(p1 * q2) + &(q1 * p2) }
            }
            _ => panic!("component kind mismatch"),
        }
    }

    /// Integral over the component: identity at a point, the [Σ] coefficient at a surface.
    pub fn integral(&self) -> Laurent {
        match self {
            ComponentValue::Point(a) => a.clone(),
            ComponentValue::Surface { q, .. } => q.clone(),
        }
    }

    /// Coefficient of t at a point; zero at a surface.
    pub fn t_coeff(&self) -> Q {
        match self {
            ComponentValue::Point(a) => a.coeff(1),
            ComponentValue::Surface { .. } => Q::zero(),
        }
    }
}

impl fmt::Display for ComponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentValue::Point(a) => write!(f, "{a}"),
            ComponentValue::Surface { p, q } => write!(f, "({p})⊗1 + ({q})[Σ]"),
        }
    }
}

/// Restriction of a class to every fixed component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionTuple(pub BTreeMap<FixedComponent, ComponentValue>);

impl RestrictionTuple {
    pub fn zero(g: &ExtendedGraph) -> Self {
        RestrictionTuple(g.components().into_iter().map(|c| (c, ComponentValue::zero_like(!g.is_point(c)))).collect())
    }

    pub fn one(g: &ExtendedGraph) -> Self {
        RestrictionTuple(g.components().into_iter().map(|c| (c, ComponentValue::one_like(!g.is_point(c)))).collect())
    }

    /// The class t: t at points, 1 ⊗ t at surfaces.
    pub fn t(g: &ExtendedGraph) -> Self {
        let t = Laurent::mono(qi(1), 1);
        RestrictionTuple(
            g.components()
                .into_iter()
                .map(|c| {
                    let v = if g.is_point(c) {
                        ComponentValue::Point(t.clone())
                    } else {
                        ComponentValue::Surface { p: t.clone(), q: Laurent::zero() }
                    };
                    (c, v)
                })
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        RestrictionTuple(self.0.iter().map(|(c, v)| (*c, v.add(&o.0[c]))).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        RestrictionTuple(self.0.iter().map(|(c, v)| (*c, v.mul(&o.0[c]))).collect())
    }

    pub fn scale(&self, x: &Q) -> Self {
        RestrictionTuple(self.0.iter().map(|(c, v)| (*c, v.scale(x))).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.values().all(|v| v.is_zero())
    }

    pub fn support(&self) -> Vec<FixedComponent> {
        self.0.iter().filter(|(_, v)| !v.is_zero()).map(|(c, _)| *c).collect()
    }
}

impl fmt::Display for RestrictionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (c, v)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}: {v}")?;
        }
        Ok(())
    }
}

fn surf(p: Q, q: Q) -> ComponentValue {
    ComponentValue::Surface { p: Laurent::mono(p, 1), q: Laurent::constant(q) }
}

fn pt(c: i64) -> ComponentValue {
    ComponentValue::Point(Laurent::mono(qi(c), 1))
}

pub fn has_gen(g: &ExtendedGraph, x: Gen) -> bool {
    match x {
        Gen::Tau0 => g.min.is_fat(),
        Gen::TauInf => g.max.is_fat(),
        Gen::TauH => true,
        Gen::Sigma(i, j) => i >= 1 && i <= g.k() && j >= 1 && j <= g.ell(i),
    }
}

/// Restriction of one generator to one fixed component.
pub fn restrict_gen_at(g: &ExtendedGraph, x: Gen, c: FixedComponent) -> Result<ComponentValue> {
    if !has_gen(g, x) {
        return Err(Error::Symbol(x.to_string()));
    }
    let surface = !g.is_point(c);
    let zero = ComponentValue::zero_like(surface);
    let (emin, emax) = g.extremal_self_intersections();
    Ok(match x {
        Gen::Tau0 => match c {
            FixedComponent::Min => surf(qi(-1), emin),
            _ => zero,
        },
        Gen::TauInf => match c {
            FixedComponent::Max => surf(qi(1), emax),
            _ => zero,
        },
        Gen::TauH => match c {
            FixedComponent::Min if surface => surf(qi(0), qi(1)),
            FixedComponent::Min => pt(-g.m(1, 1) * g.m(2, 1)),
            FixedComponent::Max if surface => surf(qi(0), qi(1)),
            FixedComponent::Max => pt(g.m(1, g.ell(1)) * g.m(2, g.ell(2))),
            FixedComponent::Interior(..) => zero,
        },
        Gen::Sigma(i, j) => {
            let l = g.ell(i);
            let lower = if j == 1 { FixedComponent::Min } else { FixedComponent::Interior(i, j - 1) };
            let upper = if j == l { FixedComponent::Max } else { FixedComponent::Interior(i, j) };
            if c == lower {
                if surface {
                    surf(qi(0), qi(1))
                } else {
                    pt(g.m_signed(i, j - 1))
                }
            } else if c == upper {
                if surface {
                    surf(qi(0), qi(1))
                } else {
                    pt(-g.m_signed(i, j + 1))
                }
            } else {
                zero
            }
        }
    })
}

pub fn restrict(g: &ExtendedGraph, a: &CohClass2) -> Result<RestrictionTuple> {
    let mut r = RestrictionTuple::zero(g);
    for (x, c) in a.terms() {
        let mut t = BTreeMap::new();
        for comp in g.components() {
            t.insert(comp, restrict_gen_at(g, x, comp)?);
        }
        r = r.add(&RestrictionTuple(t).scale(&qi(c)));
    }
    Ok(r)
}

/// Restriction of a product of degree-2 classes.
pub fn restrict_product(g: &ExtendedGraph, factors: &[CohClass2]) -> Result<RestrictionTuple> {
    let mut r = RestrictionTuple::one(g);
    for f in factors {
        r = r.mul(&restrict(g, f)?);
    }
    Ok(r)
}

pub fn euler_inverse(g: &ExtendedGraph, c: FixedComponent) -> ComponentValue {
    let (emin, emax) = g.extremal_self_intersections();
    match c {
        FixedComponent::Interior(i, j) => {
            ComponentValue::Point(Laurent::mono(q(-1, g.m(i, j) * g.m(i, j + 1)), -2))
        }
        FixedComponent::Min if !g.min.is_fat() => {
            ComponentValue::Point(Laurent::mono(q(1, g.m(1, 1) * g.m(2, 1)), -2))
        }
        FixedComponent::Max if !g.max.is_fat() => {
            ComponentValue::Point(Laurent::mono(q(1, g.m(1, g.ell(1)) * g.m(2, g.ell(2))), -2))
        }
        FixedComponent::Min => ComponentValue::Surface { p: Laurent::mono(qi(-1), -1), q: Laurent::mono(-emin, -2) },
        FixedComponent::Max => ComponentValue::Surface { p: Laurent::mono(qi(1), -1), q: Laurent::mono(-emax, -2) },
    }
}

/// ABBV sum Σ_F ∫_F r(F) e(F)⁻¹; negative powers of t must cancel.
pub fn integrate(g: &ExtendedGraph, r: &RestrictionTuple) -> Result<Laurent> {
    let mut total = Laurent::zero();
    for (c, v) in &r.0 {
        total = &total + &v.mul(&euler_inverse(g, *c)).integral();
    }
    if let Some(d) = total.min_degree() {
        if d < 0 {
            return Err(Error::Residue(format!("t^{d} survives in {total}")));
        }
    }
    Ok(total)
}

/// Intersection number by localization, the oracle of record.
pub fn intersect_abbv(g: &ExtendedGraph, a: &CohClass2, b: &CohClass2) -> Result<Q> {
    let r = restrict(g, a)?.mul(&restrict(g, b)?);
    let l = integrate(g, &r)?;
    if l.0.keys().any(|&d| d != 0) {
        return Err(Error::Residue(format!("pairing is not a number: {l}")));
    }
    Ok(l.coeff(0))
}

/// Equivariant extension of ω: y(F)·t at each component, plus the area at a surface.
pub fn omega_tuple(g: &ExtendedGraph) -> RestrictionTuple {
    RestrictionTuple(
        g.components()
            .into_iter()
            .map(|c| {
                let y = Laurent::mono(g.height_of(c), 1);
                let v = match c {
                    FixedComponent::Min if g.min.is_fat() => ComponentValue::Surface { p: y, q: Laurent::constant(g.min.area()) },
                    FixedComponent::Max if g.max.is_fat() => ComponentValue::Surface { p: y, q: Laurent::constant(g.max.area()) },
                    _ => ComponentValue::Point(y),
                };
                (c, v)
            })
            .collect(),
    )
}

/// ⟨a, ω⟩ in 1/2π-normalized units.
pub fn omega_pairing(g: &ExtendedGraph, a: &CohClass2) -> Result<Q> {
    let l = integrate(g, &restrict(g, a)?.mul(&omega_tuple(g)))?;
    Ok(l.coeff(0))
}

/// ⟨ω, ω⟩, twice the normalized volume.
pub fn omega_square(g: &ExtendedGraph) -> Result<Q> {
    let w = omega_tuple(g);
    let l = integrate(g, &w.mul(&w))?;
    Ok(l.coeff(0))
}

/// Generator pairing from the combinatorial tables.
pub fn gen_pair(g: &ExtendedGraph, x: Gen, y: Gen) -> Q {
    use Gen::*;
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let (emin, emax) = g.extremal_self_intersections();
    let ends = |i: usize, j: usize| (j == 1, j == g.ell(i));
    match (x, y) {
        (Tau0, Tau0) => emin,
        (TauInf, TauInf) => emax,
        (Tau0, TauInf) => Q::zero(),
        (Tau0, TauH) | (TauInf, TauH) => qi(1),
        (Tau0, Sigma(i, j)) => qi(ends(i, j).0 as i64),
        (TauInf, Sigma(i, j)) => qi(ends(i, j).1 as i64),
        (TauH, TauH) => {
            let mut s = 0;
            if !g.min.is_fat() {
                s += g.m(1, 1) * g.m(2, 1);
            }
            if !g.max.is_fat() {
                s += g.m(1, g.ell(1)) * g.m(2, g.ell(2));
            }
            qi(s)
        }
        (TauH, Sigma(i, j)) => {
            let (lo, hi) = ends(i, j);
            let mut s = 0;
            if lo {
                s -= g.m_signed(i, 0);
            }
            if hi {
                s -= g.m_signed(i, g.ell(i) + 1);
            }
            qi(s)
        }
        (Sigma(i, j), Sigma(a, b)) => {
            if i == a {
                if j == b {
                    g.self_intersection(i, j)
                } else if j.abs_diff(b) == 1 {
                    qi(1)
                } else {
                    Q::zero()
                }
            } else {
                let mut s = Q::zero();
                if j == 1 && b == 1 && !g.min.is_fat() {
                    s += q(g.m_signed(i, 0) * g.m_signed(a, 0), g.m(1, 1) * g.m(2, 1));
                }
                if j == g.ell(i) && b == g.ell(a) && !g.max.is_fat() {
                    s += q(
                        g.m_signed(i, g.ell(i) + 1) * g.m_signed(a, g.ell(a) + 1),
                        g.m(1, g.ell(1)) * g.m(2, g.ell(2)),
                    );
                }
                s
            }
        }
        _ => unreachable!("pairs are ordered"),
    }
}

/// Intersection number from the tables, extended bilinearly.
pub fn intersect(g: &ExtendedGraph, a: &CohClass2, b: &CohClass2) -> Result<i64> {
    let mut s = Q::zero();
    for (x, cx) in a.terms() {
        if !has_gen(g, x) {
            return Err(Error::Symbol(x.to_string()));
        }
        for (y, cy) in b.terms() {
            if !has_gen(g, y) {
                return Err(Error::Symbol(y.to_string()));
            }
            s += gen_pair(g, x, y) * qi(cx * cy);
        }
    }
    as_i64(&s).ok_or_else(|| Error::BugTrap(format!("non-integral pairing {}", fmt_q(&s))))
}

pub fn zero_length(g: &ExtendedGraph, a: &CohClass2) -> Result<usize> {
    Ok(restrict(g, a)?.0.values().filter(|v| v.is_zero()).count())
}

/// Label of a class supported on exactly two components with non-zero square.
pub fn class_label(g: &ExtendedGraph, a: &CohClass2) -> Result<Q> {
    let r = restrict(g, a)?;
    let supp = r.support();
    if supp.len() == 1 && !g.is_point(supp[0]) {
        // ±τ₀ and ±τ∞
        return Ok(Q::zero());
    }
    if supp.len() != 2 {
        return Err(Error::LabelUndefined(format!("support has {} components", supp.len())));
    }
    let sq = intersect(g, a, a)?;
    if sq == 0 {
        return Err(Error::LabelUndefined("self-intersection is zero".into()));
    }
    let mut num = Q::zero();
    for c in supp {
        let w = r.0[&c].t_coeff().abs();
        let sign = if matches!(c, FixedComponent::Min | FixedComponent::Max) { -1 } else { 1 };
        num += w * qi(sign);
    }
    Ok(-num / qi(sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{Chain, Edge, Extreme};

    fn cp2_211() -> ExtendedGraph {
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
    fn tau_h_restriction_and_square() {
        let g = cp2_211();
        let th = CohClass2::gen(Gen::TauH);
        let r = restrict(&g, &th).unwrap();
        assert_eq!(r.0[&FixedComponent::Min], pt(-2));
        assert!(r.0[&FixedComponent::Interior(2, 1)].is_zero());
        assert_eq!(r.0[&FixedComponent::Max], pt(2));
        assert_eq!(intersect_abbv(&g, &th, &th).unwrap(), qi(4));
        assert_eq!(intersect(&g, &th, &th).unwrap(), 4);
        assert_eq!(zero_length(&g, &th).unwrap(), 1);
    }

    #[test]
    fn euler_inverse_values() {
        let g = cp2_211();
        assert_eq!(
            euler_inverse(&g, FixedComponent::Min),
            ComponentValue::Point(Laurent::mono(q(1, 2), -2))
        );
    }

    #[test]
    fn integral_of_one_vanishes() {
        let g = cp2_211();
        let l = integrate(&g, &RestrictionTuple::one(&g)).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn label_of_sigma_22() {
        let g = cp2_211();
        assert_eq!(class_label(&g, &CohClass2::gen(Gen::Sigma(2, 2))).unwrap(), qi(1));
        assert_eq!(class_label(&g, &CohClass2::gen(Gen::Sigma(1, 1))).unwrap(), qi(2));
    }

    #[test]
    fn missing_symbol() {
        let g = cp2_211();
        assert!(matches!(restrict(&g, &CohClass2::gen(Gen::Tau0)), Err(Error::Symbol(_))));
    }
}
