//! Multivariate polynomials over exact rationals.
//!
//! A `Universe` fixes the variable set; a `Monomial` is a dense exponent
//! vector indexed by universe position; a `MultiPoly` is a sparse map from
//! monomials to nonzero rational coefficients. Monomial orders (lex,
//! degrevlex, block elimination) are compiled against a universe before use
//! so comparisons are cheap inside the basis algorithms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rat::{lcm_bigint, rat_str, Rat};

/// What role a variable plays. The rank drives the canonical variable sort:
/// initial values first, then program variables, then everything internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// Symbolic value of a program variable before the loop (`v_0`).
    Initial,
    /// A loop-body variable (`v`).
    Program,
    /// A path's iteration counter (`n1`, `n2`, ...).
    Counter,
    /// Stand-in for an exponential sequence `theta^n` (`t1`, `t2`, ...).
    BaseSequence,
    /// Internal helper (intersection tag, composition middles).
    Auxiliary,
}

impl VarKind {
    fn rank(self) -> u8 {
        match self {
            VarKind::Initial => 0,
            VarKind::Program => 1,
            VarKind::Counter => 2,
            VarKind::BaseSequence => 3,
            VarKind::Auxiliary => 4,
        }
    }
}

/// A named variable. Names are unique within a universe regardless of kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarId {
    pub name: String,
    pub kind: VarKind,
}

impl VarId {
    pub fn new(name: impl Into<String>, kind: VarKind) -> Self {
        VarId { name: name.into(), kind }
    }

    pub fn program(name: impl Into<String>) -> Self {
        VarId::new(name, VarKind::Program)
    }

    /// The initial-value twin of a program variable: `v` -> `v_0`.
    pub fn initial_of(v: &VarId) -> VarId {
        VarId::new(format!("{}_0", v.name), VarKind::Initial)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Canonical variable precedence: by kind rank, then by name. This is the
/// sequence used for the canonical lex order and for printing.
pub fn canonical_var_cmp(a: &VarId, b: &VarId) -> Ordering {
    a.kind.rank().cmp(&b.kind.rank()).then_with(|| a.name.cmp(&b.name))
}

/// An ordered set of variables. All polynomials carry an `Arc<Universe>`;
/// arithmetic requires both operands to share one.
#[derive(Debug, PartialEq, Eq)]
pub struct Universe {
    vars: Vec<VarId>,
}

impl Universe {
    /// Panics on duplicate names: a universe is a set.
    pub fn new(vars: Vec<VarId>) -> Arc<Universe> {
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                assert_ne!(vars[i].name, vars[j].name, "duplicate variable in universe");
            }
        }
        Arc::new(Universe { vars })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn pos(&self, v: &VarId) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    pub fn pos_by_name(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|w| w.name == name)
    }

    pub fn contains(&self, v: &VarId) -> bool {
        self.pos(v).is_some()
    }

    /// Universe positions in canonical precedence order (largest first).
    pub fn canonical_positions(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vars.len()).collect();
        idx.sort_by(|&a, &b| canonical_var_cmp(&self.vars[a], &self.vars[b]));
        idx
    }

    /// Variables sorted canonically.
    pub fn canonical_vars(&self) -> Vec<VarId> {
        let mut vs = self.vars.clone();
        vs.sort_by(canonical_var_cmp);
        vs
    }

    /// A new universe with `kill` removed.
    pub fn without(&self, kill: &[VarId]) -> Arc<Universe> {
        Universe::new(self.vars.iter().filter(|v| !kill.contains(v)).cloned().collect())
    }
}

/// Exponent vector, one entry per universe position. `Ord` is plain
/// lexicographic on the vector and is used only for deterministic storage;
/// algebraic comparisons go through a `CompiledOrder`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(len: usize) -> Self {
        Monomial(vec![0; len])
    }

    pub fn var(len: usize, pos: usize) -> Self {
        let mut e = vec![0; len];
        e[pos] = 1;
        Monomial(e)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise quotient, `None` unless `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&o.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// True when the supports are disjoint (gcd is 1).
    pub fn coprime(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// A monomial order specification over explicit variable sequences. The
/// sequences must jointly cover the universe the order is compiled against;
/// earlier variables are larger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Pure lexicographic.
    Lex(Vec<VarId>),
    /// Graded reverse lexicographic.
    DegRevLex(Vec<VarId>),
    /// Elimination order: compare the `elim` part by lex first, then the
    /// rest by degrevlex. Any monomial mentioning an `elim` variable is
    /// larger than any monomial that does not.
    Block { elim: Vec<VarId>, rest: Vec<VarId> },
}

impl MonomialOrder {
    /// The fixed order used for ideal equality and printed output: pure lex
    /// over the canonically sorted universe (initial values largest).
    pub fn canonical_lex(u: &Universe) -> MonomialOrder {
        MonomialOrder::Lex(u.canonical_vars())
    }

    /// Degrevlex over the canonically sorted universe.
    pub fn canonical_degrevlex(u: &Universe) -> MonomialOrder {
        MonomialOrder::DegRevLex(u.canonical_vars())
    }

    /// Block order eliminating `kill` (lex among them, canonical sort),
    /// degrevlex on the remaining variables.
    pub fn elimination(u: &Universe, kill: &[VarId]) -> MonomialOrder {
        let mut elim: Vec<VarId> = kill.to_vec();
        elim.sort_by(canonical_var_cmp);
        let mut rest: Vec<VarId> =
            u.vars().iter().filter(|v| !kill.contains(v)).cloned().collect();
        rest.sort_by(canonical_var_cmp);
        MonomialOrder::Block { elim, rest }
    }

    /// Resolve variable names to universe positions. Panics if the order does
    /// not cover the universe exactly.
    pub fn compile(&self, u: &Universe) -> CompiledOrder {
        let resolve = |vars: &[VarId]| -> Vec<usize> {
            vars.iter()
                .map(|v| u.pos(v).unwrap_or_else(|| panic!("order variable {} not in universe", v)))
                .collect()
        };
        let groups = match self {
            MonomialOrder::Lex(vs) => vec![OrderGroup::Lex(resolve(vs))],
            MonomialOrder::DegRevLex(vs) => vec![OrderGroup::DegRevLex(resolve(vs))],
            MonomialOrder::Block { elim, rest } => {
                vec![OrderGroup::Lex(resolve(elim)), OrderGroup::DegRevLex(resolve(rest))]
            }
        };
        let total: usize = groups.iter().map(|g| g.len()).sum();
        assert_eq!(total, u.len(), "order must cover the universe");
        CompiledOrder { groups }
    }
}

#[derive(Debug, Clone)]
enum OrderGroup {
    Lex(Vec<usize>),
    DegRevLex(Vec<usize>),
}

impl OrderGroup {
    fn len(&self) -> usize {
        match self {
            OrderGroup::Lex(v) | OrderGroup::DegRevLex(v) => v.len(),
        }
    }

    fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            OrderGroup::Lex(pos) => {
                for &p in pos {
                    match a.0[p].cmp(&b.0[p]) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            OrderGroup::DegRevLex(pos) => {
                let da: u32 = pos.iter().map(|&p| a.0[p]).sum();
                let db: u32 = pos.iter().map(|&p| b.0[p]).sum();
                match da.cmp(&db) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
                // Reverse lex tiebreak: scanning from the smallest variable,
                // the monomial with the smaller exponent at the first
                // difference is the larger one.
                for &p in pos.iter().rev() {
                    match a.0[p].cmp(&b.0[p]) {
                        Ordering::Equal => continue,
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                    }
                }
                Ordering::Equal
            }
        }
    }
}

/// A monomial order resolved against a concrete universe.
#[derive(Debug, Clone)]
pub struct CompiledOrder {
    groups: Vec<OrderGroup>,
}

impl CompiledOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for g in &self.groups {
            match g.cmp(a, b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Sparse multivariate polynomial over `Rat`. Zero coefficients are never
/// stored; the zero polynomial has an empty term map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    universe: Arc<Universe>,
    terms: BTreeMap<Monomial, Rat>,
}

impl MultiPoly {
    pub fn zero(u: &Arc<Universe>) -> MultiPoly {
        MultiPoly { universe: Arc::clone(u), terms: BTreeMap::new() }
    }

    pub fn constant(u: &Arc<Universe>, c: Rat) -> MultiPoly {
        let mut p = MultiPoly::zero(u);
        p.add_term(Monomial::one(u.len()), c);
        p
    }

    pub fn one(u: &Arc<Universe>) -> MultiPoly {
        MultiPoly::constant(u, Rat::one())
    }

    pub fn var(u: &Arc<Universe>, v: &VarId) -> MultiPoly {
        let pos = u.pos(v).unwrap_or_else(|| panic!("variable {} not in universe", v));
        let mut p = MultiPoly::zero(u);
        p.add_term(Monomial::var(u.len(), pos), Rat::one());
        p
    }

    pub fn from_terms(u: &Arc<Universe>, terms: Vec<(Monomial, Rat)>) -> MultiPoly {
        let mut p = MultiPoly::zero(u);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// The constant term (zero if absent).
    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Monomial::one(self.universe.len())).cloned().unwrap_or_else(Rat::zero)
    }

    /// As a rational constant, if the polynomial is one.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one(self.universe.len())) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.0.len(), self.universe.len());
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn assert_same_universe(&self, o: &MultiPoly) {
        assert!(
            Arc::ptr_eq(&self.universe, &o.universe) || self.universe == o.universe,
            "polynomial arithmetic across different universes"
        );
    }

    pub fn add(&self, o: &MultiPoly) -> MultiPoly {
        self.assert_same_universe(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        self.assert_same_universe(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.universe);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c;
        }
        out
    }

    /// Multiply by a single term.
    pub fn mul_term(&self, m: &Monomial, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.universe);
        }
        let mut out = MultiPoly::zero(&self.universe);
        for (mm, cc) in &self.terms {
            out.terms.insert(mm.mul(m), cc.clone() * c);
        }
        out
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        self.assert_same_universe(o);
        let mut out = MultiPoly::zero(&self.universe);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = MultiPoly::one(&self.universe);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Leading term under a compiled order. Panics on the zero polynomial.
    pub fn leading<'a>(&'a self, ord: &CompiledOrder) -> (&'a Monomial, &'a Rat) {
        self.terms
            .iter()
            .max_by(|a, b| ord.cmp(a.0, b.0))
            .expect("leading term of zero polynomial")
    }

    /// Highest exponent of `v` across all terms.
    pub fn degree_in(&self, v: &VarId) -> u32 {
        match self.universe.pos(v) {
            None => 0,
            Some(p) => self.terms.keys().map(|m| m.0[p]).max().unwrap_or(0),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Total degree counting only variables of the given kind.
    pub fn degree_over_kind(&self, kind: VarKind) -> u32 {
        let pos: Vec<usize> = (0..self.universe.len())
            .filter(|&i| self.universe.vars()[i].kind == kind)
            .collect();
        self.terms
            .keys()
            .map(|m| pos.iter().map(|&p| m.0[p]).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.degree_in(v) > 0
    }

    pub fn mentions_any(&self, vars: &[VarId]) -> bool {
        vars.iter().any(|v| self.mentions(v))
    }

    /// Variables that actually occur, in universe order.
    pub fn vars_present(&self) -> Vec<VarId> {
        (0..self.universe.len())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .map(|i| self.universe.vars()[i].clone())
            .collect()
    }

    /// The coefficient polynomial of `v^k` (with `v` stripped from it).
    pub fn coeff_of_power(&self, v: &VarId, k: u32) -> MultiPoly {
        let p = match self.universe.pos(v) {
            Some(p) => p,
            None => {
                return if k == 0 { self.clone() } else { MultiPoly::zero(&self.universe) };
            }
        };
        let mut out = MultiPoly::zero(&self.universe);
        for (m, c) in &self.terms {
            if m.0[p] == k {
                let mut mm = m.clone();
                mm.0[p] = 0;
                out.add_term(mm, c.clone());
            }
        }
        out
    }

    /// Replace `v` by the polynomial `q` (same universe). Horner evaluation.
    pub fn substitute(&self, v: &VarId, q: &MultiPoly) -> MultiPoly {
        self.assert_same_universe(q);
        let deg = self.degree_in(v);
        if deg == 0 {
            return self.clone();
        }
        let mut acc = self.coeff_of_power(v, deg);
        for k in (0..deg).rev() {
            acc = acc.mul(q).add(&self.coeff_of_power(v, k));
        }
        acc
    }

    /// Move the polynomial into `to`, renaming variables through `rename`.
    /// Every present variable must map to a member of `to`.
    pub fn map_universe(
        &self,
        to: &Arc<Universe>,
        rename: impl Fn(&VarId) -> VarId,
    ) -> MultiPoly {
        let mut posmap: Vec<Option<usize>> = Vec::with_capacity(self.universe.len());
        for v in self.universe.vars() {
            let w = rename(v);
            posmap.push(to.pos(&w));
        }
        let mut out = MultiPoly::zero(to);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; to.len()];
            for (i, &exp) in m.0.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                match posmap[i] {
                    Some(j) => e[j] += exp,
                    None => panic!(
                        "variable {} has no image in target universe",
                        self.universe.vars()[i]
                    ),
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Same-name embedding into a larger (or reordered) universe.
    pub fn extend_to(&self, to: &Arc<Universe>) -> MultiPoly {
        self.map_universe(to, |v| v.clone())
    }

    /// Evaluate fully; every present variable must be bound.
    pub fn eval(&self, bind: &dyn Fn(&VarId) -> Rat) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let v = bind(&self.universe.vars()[i]);
                    t *= num_traits::pow::pow(v, e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Multiply by the least common multiple of coefficient denominators,
    /// divide by the gcd of the resulting numerators, and flip signs so the
    /// leading coefficient under `ord` is positive. Result generates the
    /// same ideal; coefficients are coprime integers.
    pub fn integer_normalized(&self, ord: &CompiledOrder) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut l = BigInt::one();
        for c in self.terms.values() {
            l = lcm_bigint(&l, c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = (c.clone() * Rat::from_integer(l.clone())).numer().clone();
            g = num_integer::Integer::gcd(&g, &n);
        }
        let scale = Rat::new(l, g);
        let mut out = self.scale(&scale);
        let (_, lc) = out.leading(ord);
        if lc.is_negative() {
            out = out.neg();
        }
        out
    }

    /// Render with terms in descending canonical-lex order: explicit `*`
    /// between factors, `^` for powers, no spaces. `0` for the zero
    /// polynomial.
    pub fn canonical_string(&self) -> String {
        self.render_with(&|v: &VarId| v.name.clone())
    }

    /// `canonical_string` with a custom variable renderer.
    pub fn render_with(&self, var_name: &dyn Fn(&VarId) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let ord = MonomialOrder::canonical_lex(&self.universe).compile(&self.universe);
        let canon = self.universe.canonical_positions();
        let mut monos: Vec<&Monomial> = self.terms.keys().collect();
        monos.sort_by(|a, b| ord.cmp(b, a));
        let mut out = String::new();
        for (i, m) in monos.iter().enumerate() {
            let c = &self.terms[*m];
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                factors.push(rat_str(&mag));
            }
            for &p in &canon {
                let e = m.0[p];
                if e == 1 {
                    factors.push(var_name(&self.universe.vars()[p]));
                } else if e > 1 {
                    factors.push(format!("{}^{}", var_name(&self.universe.vars()[p]), e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn uni(names: &[&str]) -> Arc<Universe> {
        Universe::new(names.iter().map(|n| VarId::program(*n)).collect())
    }

    fn xy() -> Arc<Universe> {
        uni(&["x", "y"])
    }

    #[test]
    fn arithmetic_basics() {
        let u = xy();
        let x = MultiPoly::var(&u, &VarId::program("x"));
        let y = MultiPoly::var(&u, &VarId::program("y"));
        let p = x.add(&y).mul(&x.sub(&y)); // x^2 - y^2
        let q = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(p, q);
        assert!(p.sub(&q).is_zero());
        assert_eq!(p.total_degree(), 2);
    }

    #[test]
    fn substitution_is_horner_exact() {
        let u = xy();
        let xv = VarId::program("x");
        let x = MultiPoly::var(&u, &xv);
        let y = MultiPoly::var(&u, &VarId::program("y"));
        // (x^2 + x + 1) with x := y + 1  ==>  y^2 + 3y + 3
        let p = x.pow(2).add(&x).add(&MultiPoly::one(&u));
        let s = p.substitute(&xv, &y.add(&MultiPoly::one(&u)));
        let expect = y.pow(2).add(&y.scale(&rat_int(3))).add(&MultiPoly::constant(&u, rat_int(3)));
        assert_eq!(s, expect);
    }

    #[test]
    fn lex_order_and_leading_term() {
        let u = xy();
        let ord = MonomialOrder::Lex(u.vars().to_vec()).compile(&u);
        let x = MultiPoly::var(&u, &VarId::program("x"));
        let y = MultiPoly::var(&u, &VarId::program("y"));
        // x > y^5 under lex with x first
        let p = x.add(&y.pow(5));
        let (lm, _) = p.leading(&ord);
        assert_eq!(lm, &Monomial(vec![1, 0]));
    }

    #[test]
    fn degrevlex_grades_first() {
        let u = xy();
        let ord = MonomialOrder::DegRevLex(u.vars().to_vec()).compile(&u);
        let a = Monomial(vec![1, 0]); // x
        let b = Monomial(vec![0, 2]); // y^2
        assert_eq!(ord.cmp(&a, &b), Ordering::Less);
        // x*y^2 vs x^2*y: same degree; revlex looks at y from the end:
        // smaller y-exponent wins, so x^2*y is larger.
        let c = Monomial(vec![1, 2]);
        let d = Monomial(vec![2, 1]);
        assert_eq!(ord.cmp(&c, &d), Ordering::Less);
    }

    #[test]
    fn block_order_separates_elim_variables() {
        let u = uni(&["t", "x", "y"]);
        let ord = MonomialOrder::elimination(&u, &[VarId::program("t")]).compile(&u);
        // any power of t beats any t-free monomial
        let t1 = Monomial(vec![1, 0, 0]);
        let big = Monomial(vec![0, 9, 9]);
        assert_eq!(ord.cmp(&t1, &big), Ordering::Greater);
    }

    #[test]
    fn one_is_minimal_in_every_order() {
        let u = uni(&["a", "b", "c"]);
        let one = Monomial::one(3);
        for ord in [
            MonomialOrder::Lex(u.vars().to_vec()),
            MonomialOrder::DegRevLex(u.vars().to_vec()),
            MonomialOrder::elimination(&u, &[VarId::program("b")]),
        ] {
            let c = ord.compile(&u);
            for e in [[1, 0, 0], [0, 1, 0], [2, 1, 3]] {
                let m = Monomial(e.to_vec());
                assert_eq!(c.cmp(&one, &m), Ordering::Less);
            }
        }
    }

    #[test]
    fn orders_are_multiplicative() {
        // a < b implies a*c < b*c, for a grid of small monomials.
        let u = uni(&["a", "b", "c"]);
        let orders = [
            MonomialOrder::Lex(u.vars().to_vec()),
            MonomialOrder::DegRevLex(u.vars().to_vec()),
            MonomialOrder::elimination(&u, &[VarId::program("a")]),
        ];
        let mut monos = Vec::new();
        for i in 0..3u32 {
            for j in 0..3u32 {
                for k in 0..3u32 {
                    monos.push(Monomial(vec![i, j, k]));
                }
            }
        }
        for ord in &orders {
            let c = ord.compile(&u);
            for a in &monos {
                for b in &monos {
                    let ab = c.cmp(a, b);
                    for m in &monos {
                        assert_eq!(c.cmp(&a.mul(m), &b.mul(m)), ab);
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_rendering_matches_fixture() {
        // initials sort before program variables; explicit `*`; `^` powers
        let u = Universe::new(vec![
            VarId::program("r"),
            VarId::program("v"),
            VarId::new("r_0", VarKind::Initial),
            VarId::new("v_0", VarKind::Initial),
        ]);
        let r = MultiPoly::var(&u, &VarId::program("r"));
        let v = MultiPoly::var(&u, &VarId::program("v"));
        let r0 = MultiPoly::var(&u, &VarId::new("r_0", VarKind::Initial));
        let v0 = MultiPoly::var(&u, &VarId::new("v_0", VarKind::Initial));
        // 4r - 4r_0 + v^2 - v_0^2 - 2v + 2v_0
        let p = r
            .scale(&rat_int(4))
            .sub(&r0.scale(&rat_int(4)))
            .add(&v.pow(2))
            .sub(&v0.pow(2))
            .sub(&v.scale(&rat_int(2)))
            .add(&v0.scale(&rat_int(2)));
        assert_eq!(p.canonical_string(), "-4*r_0-v_0^2+2*v_0+4*r+v^2-2*v");
        let ord = MonomialOrder::canonical_lex(&u).compile(&u);
        assert_eq!(
            p.integer_normalized(&ord).canonical_string(),
            "4*r_0+v_0^2-2*v_0-4*r-v^2+2*v"
        );
    }

    #[test]
    fn integer_normalization_clears_denominators() {
        let u = xy();
        let ord = MonomialOrder::canonical_lex(&u).compile(&u);
        let x = MultiPoly::var(&u, &VarId::program("x"));
        let y = MultiPoly::var(&u, &VarId::program("y"));
        let p = x.scale(&rat(-1, 2)).add(&y.scale(&rat(1, 3)));
        let n = p.integer_normalized(&ord);
        assert_eq!(n.canonical_string(), "3*x-2*y");
    }

    #[test]
    fn map_universe_renames() {
        let u = xy();
        let w = Universe::new(vec![VarId::program("a"), VarId::program("b")]);
        let x = MultiPoly::var(&u, &VarId::program("x"));
        let y = MultiPoly::var(&u, &VarId::program("y"));
        let p = x.pow(2).add(&y);
        let q = p.map_universe(&w, |v| {
            VarId::program(if v.name == "x" { "a" } else { "b" })
        });
        let a = MultiPoly::var(&w, &VarId::program("a"));
        let b = MultiPoly::var(&w, &VarId::program("b"));
        assert_eq!(q, a.pow(2).add(&b));
    }

    #[test]
    fn eval_exact() {
        let u = xy();
        let x = MultiPoly::var(&u, &VarId::program("x"));
        let y = MultiPoly::var(&u, &VarId::program("y"));
        let p = x.pow(2).sub(&y.scale(&rat(1, 2)));
        let val = p.eval(&|v| if v.name == "x" { rat(3, 2) } else { rat_int(7) });
        assert_eq!(val, rat(9, 4) - rat(7, 2));
    }
}
