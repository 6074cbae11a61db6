//! Exponential polynomials: finite sums Σ qᵢ(n)·θᵢⁿ with pairwise distinct
//! rational bases θᵢ ≠ 0 and coefficients qᵢ that are polynomials in the
//! loop counter over Q[initial values].
//!
//! Closed forms of C-finite and telescoping rational-scale recurrences live
//! here. Base 1 carries the pure polynomial part.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::poly::{MultiPoly, Universe, VarId, VarKind};
use crate::rat::{rat_int, rat_pow, rat_str, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    counter: VarId,
    universe: Arc<Universe>,
    /// base θ -> coefficient polynomial q(counter); q never zero, θ never 0
    terms: BTreeMap<Rat, MultiPoly>,
}

impl ExpPoly {
    pub fn new(counter: &VarId, universe: &Arc<Universe>, parts: Vec<(Rat, MultiPoly)>) -> Self {
        assert!(universe.contains(counter), "counter must live in the universe");
        let mut terms: BTreeMap<Rat, MultiPoly> = BTreeMap::new();
        for (base, coeff) in parts {
            assert!(!base.is_zero(), "exponential base must be nonzero");
            assert!(
                coeff.universe() == universe,
                "coefficient universe mismatch"
            );
            match terms.get_mut(&base) {
                Some(q) => *q = q.add(&coeff),
                None => {
                    terms.insert(base, coeff);
                }
            }
        }
        terms.retain(|_, q| !q.is_zero());
        ExpPoly { counter: counter.clone(), universe: universe.clone(), terms }
    }

    pub fn zero(counter: &VarId, universe: &Arc<Universe>) -> Self {
        ExpPoly::new(counter, universe, Vec::new())
    }

    /// Pure polynomial part (base 1).
    pub fn from_poly(counter: &VarId, p: MultiPoly) -> Self {
        let universe = p.universe().clone();
        ExpPoly::new(counter, &universe, vec![(rat_int(1), p)])
    }

    pub fn constant(counter: &VarId, universe: &Arc<Universe>, c: Rat) -> Self {
        ExpPoly::from_poly(counter, MultiPoly::constant(universe, c))
    }

    pub fn counter(&self) -> &VarId {
        &self.counter
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// (base, coefficient) pairs, bases ascending.
    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &MultiPoly)> {
        self.terms.iter()
    }

    pub fn bases(&self) -> Vec<Rat> {
        self.terms.keys().cloned().collect()
    }

    pub fn coeff_of_base(&self, base: &Rat) -> MultiPoly {
        self.terms
            .get(base)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(&self.universe))
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        assert_eq!(self.counter, other.counter);
        let mut parts: Vec<(Rat, MultiPoly)> =
            self.terms.iter().map(|(b, q)| (b.clone(), q.clone())).collect();
        parts.extend(other.terms.iter().map(|(b, q)| (b.clone(), q.clone())));
        ExpPoly::new(&self.counter, &self.universe, parts)
    }

    pub fn neg(&self) -> ExpPoly {
        self.scale(&rat_int(-1))
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> ExpPoly {
        let parts = self.terms.iter().map(|(b, q)| (b.clone(), q.scale(c))).collect();
        ExpPoly::new(&self.counter, &self.universe, parts)
    }

    /// Multiply every coefficient by a polynomial (in counter and initials).
    pub fn mul_poly(&self, p: &MultiPoly) -> ExpPoly {
        let parts = self.terms.iter().map(|(b, q)| (b.clone(), q.mul(p))).collect();
        ExpPoly::new(&self.counter, &self.universe, parts)
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        assert_eq!(self.counter, other.counter);
        let mut parts = Vec::new();
        for (b1, q1) in &self.terms {
            for (b2, q2) in &other.terms {
                parts.push((b1 * b2, q1.mul(q2)));
            }
        }
        ExpPoly::new(&self.counter, &self.universe, parts)
    }

    /// e(n + k) as an exponential polynomial in n (k may be negative).
    pub fn shift(&self, k: i64) -> ExpPoly {
        if k == 0 {
            return self.clone();
        }
        let n_plus_k = MultiPoly::var(&self.universe, &self.counter)
            .add(&MultiPoly::constant(&self.universe, rat_int(k)));
        let parts = self
            .terms
            .iter()
            .map(|(b, q)| {
                let shifted = q.substitute(&self.counter, &n_plus_k);
                (b.clone(), shifted.scale(&rat_pow(b, k)))
            })
            .collect();
        ExpPoly::new(&self.counter, &self.universe, parts)
    }

    /// Exact value at integer n ≥ 0, as a polynomial over the initials.
    pub fn eval_at_int(&self, n: u64) -> MultiPoly {
        let nv = MultiPoly::constant(&self.universe, rat_int(n as i64));
        let mut acc = MultiPoly::zero(&self.universe);
        for (b, q) in &self.terms {
            let qn = q.substitute(&self.counter, &nv);
            acc = acc.add(&qn.scale(&rat_pow(b, n as i64)));
        }
        acc
    }

    /// Fully numeric value: bind the initials, fix the counter.
    pub fn eval_num(&self, bind: &dyn Fn(&VarId) -> Rat, n: u64) -> Rat {
        let counter = self.counter.clone();
        let nv = rat_int(n as i64);
        let mut acc = Rat::zero();
        for (b, q) in &self.terms {
            let v = q.eval(&|var: &VarId| if *var == counter { nv.clone() } else { bind(var) });
            acc += v * rat_pow(b, n as i64);
        }
        acc
    }

    /// Highest counter power at any base.
    pub fn degree(&self) -> u32 {
        self.terms.values().map(|q| q.degree_in(&self.counter)).max().unwrap_or(0)
    }

    /// Display rendering: exponential parts first (bases descending),
    /// polynomial part last; counter powers descending; initial values as
    /// `v(0)`; multi-term coefficients parenthesized with the sign factored
    /// out.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let var_name = |v: &VarId| -> String {
            if v.kind == VarKind::Initial && v.name.ends_with("_0") {
                format!("{}(0)", &v.name[..v.name.len() - 2])
            } else {
                v.name.clone()
            }
        };
        let mut pieces: Vec<String> = Vec::new();
        let one = rat_int(1);
        let mut order: Vec<&Rat> = self.terms.keys().filter(|b| **b != one).collect();
        order.sort_by(|a, b| b.cmp(a));
        if self.terms.contains_key(&one) {
            order.push(&one);
        }
        for base in order {
            let q = &self.terms[base];
            let base_factor = if *base == one {
                None
            } else if base.is_integer() && base.is_positive() {
                Some(format!("{}^{}", rat_str(base), self.counter.name))
            } else {
                Some(format!("({})^{}", rat_str(base), self.counter.name))
            };
            let deg = q.degree_in(&self.counter);
            for k in (0..=deg).rev() {
                let c = q.coeff_of_power(&self.counter, k);
                if c.is_zero() {
                    continue;
                }
                pieces.push(self.render_piece(&c, k, base_factor.as_deref(), &var_name));
            }
        }
        let mut out = pieces.concat();
        if out.starts_with('+') {
            out.remove(0);
        }
        out
    }

    /// One signed piece `±[coeff*]n^k[*θ^n]`.
    fn render_piece(
        &self,
        c: &MultiPoly,
        k: u32,
        base_factor: Option<&str>,
        var_name: &dyn Fn(&VarId) -> String,
    ) -> String {
        let counter_factor = match k {
            0 => None,
            1 => Some(self.counter.name.clone()),
            _ => Some(format!("{}^{}", self.counter.name, k)),
        };
        let mut factors: Vec<String> = Vec::new();
        // multi-term coefficients render after the counter power (`n1*(v(0)-1)`),
        // single-term ones before it (`2*n1`)
        let mut trailing: Option<String> = None;
        let sign;
        if c.num_terms() == 1 {
            let (m, coeff) = c.terms().next().unwrap();
            sign = coeff.is_negative();
            let mag = coeff.abs();
            let mut mono_factors: Vec<String> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = var_name(&self.universe.vars()[i]);
                mono_factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            let has_other =
                !mono_factors.is_empty() || counter_factor.is_some() || base_factor.is_some();
            if !mag.is_one() || !has_other {
                factors.push(rat_str(&mag));
            }
            factors.extend(mono_factors);
        } else {
            // multi-term coefficient: factor the leading sign out, then
            // parenthesize (unless it stands alone as the whole piece)
            let lead_negative = {
                let ord = crate::poly::MonomialOrder::canonical_lex(&self.universe)
                    .compile(&self.universe);
                c.leading(&ord).1.is_negative()
            };
            sign = lead_negative;
            let inner = if lead_negative { c.neg() } else { c.clone() };
            let rendered = inner.render_with(&|v| var_name(v));
            if counter_factor.is_some() || base_factor.is_some() {
                trailing = Some(format!("({rendered})"));
            } else {
                factors.push(rendered);
            }
        }
        if let Some(cf) = counter_factor {
            factors.push(cf);
        }
        if let Some(t) = trailing {
            factors.push(t);
        }
        if let Some(bf) = base_factor {
            factors.push(bf.to_string());
        }
        format!("{}{}", if sign { "-" } else { "+" }, factors.join("*"))
    }
}
