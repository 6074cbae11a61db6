//! Groebner bases over the rationals: multivariate division, Buchberger's
//! algorithm (product + chain criteria, smallest-lcm pair selection),
//! elimination ideals through block orders, ideal intersection via the
//! tag-variable trick, and canonical-form ideal equality.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::poly::{CompiledOrder, Monomial, MonomialOrder, MultiPoly, Universe, VarId, VarKind};
use crate::rat::Rat;

/// A polynomial ideal presented by generators under a monomial order.
/// When `reduced` is set the generators are the reduced Groebner basis for
/// `order`: monic, sorted by ascending leading monomial, and no monomial of
/// any generator is divisible by the leading monomial of another.
#[derive(Debug, Clone)]
pub struct Ideal {
    pub universe: Arc<Universe>,
    pub generators: Vec<MultiPoly>,
    pub order: MonomialOrder,
    pub reduced: bool,
}

impl Ideal {
    /// Basic constructor; drops zero generators, makes no basis claim.
    pub fn new(universe: Arc<Universe>, generators: Vec<MultiPoly>, order: MonomialOrder) -> Ideal {
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal { universe, generators, order, reduced: false }
    }

    pub fn zero(universe: Arc<Universe>) -> Ideal {
        let order = MonomialOrder::canonical_lex(&universe);
        Ideal { universe, generators: Vec::new(), order, reduced: true }
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Reduced Groebner basis under the canonical lex order. Idempotent.
    pub fn canonicalize(&self) -> Ideal {
        let canon = MonomialOrder::canonical_lex(&self.universe);
        if self.reduced && self.order == canon {
            return self.clone();
        }
        buchberger(&self.universe, &self.generators, canon)
    }

    /// Ideal membership. Requires `reduced` (any Groebner basis would do).
    pub fn contains(&self, p: &MultiPoly) -> bool {
        assert!(self.reduced, "membership test needs a Groebner basis");
        normal_form(p, &self.generators, &self.order).is_zero()
    }
}

// ---------------------------------------------------------------------------
// Ordered polynomials: term list ascending under a compiled order, leading
// term last. All the division hot paths work on this representation.

#[derive(Debug, Clone)]
struct OrdPoly {
    terms: Vec<(Monomial, Rat)>,
}

impl OrdPoly {
    fn from_multi(p: &MultiPoly, ord: &CompiledOrder) -> OrdPoly {
        let mut terms: Vec<(Monomial, Rat)> =
            p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| ord.cmp(&a.0, &b.0));
        OrdPoly { terms }
    }

    fn to_multi(&self, u: &Arc<Universe>) -> MultiPoly {
        MultiPoly::from_terms(u, self.terms.clone())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn leading(&self) -> &(Monomial, Rat) {
        self.terms.last().expect("leading term of zero")
    }

    /// self - g * (m * c), merging two ascending term lists.
    fn sub_scaled(&self, g: &OrdPoly, m: &Monomial, c: &Rat, ord: &CompiledOrder) -> OrdPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < g.terms.len() {
            if i == self.terms.len() {
                let (gm, gc) = &g.terms[j];
                out.push((gm.mul(m), -(gc.clone() * c)));
                j += 1;
                continue;
            }
            if j == g.terms.len() {
                out.push(self.terms[i].clone());
                i += 1;
                continue;
            }
            let gm = g.terms[j].0.mul(m);
            match ord.cmp(&self.terms[i].0, &gm) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((gm, -(g.terms[j].1.clone() * c)));
                    j += 1;
                }
                Ordering::Equal => {
                    let coeff = self.terms[i].1.clone() - g.terms[j].1.clone() * c;
                    if !coeff.is_zero() {
                        out.push((gm, coeff));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        OrdPoly { terms: out }
    }

    fn scale(&mut self, c: &Rat) {
        for (_, v) in &mut self.terms {
            *v = v.clone() * c;
        }
    }
}

/// Full normal form of `p` modulo `gens`: repeatedly cancels the largest
/// reducible term, trying generators in list order; irreducible leading
/// terms move to the remainder. The result has no monomial divisible by any
/// generator's leading monomial. Deterministic in `order` and list order.
pub fn normal_form(p: &MultiPoly, gens: &[MultiPoly], order: &MonomialOrder) -> MultiPoly {
    let u = p.universe();
    let ord = order.compile(u);
    let gens_ord: Vec<OrdPoly> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| OrdPoly::from_multi(g, &ord))
        .collect();
    normal_form_ord(&OrdPoly::from_multi(p, &ord), &gens_ord, &ord).to_multi(u)
}

fn normal_form_ord(p: &OrdPoly, gens: &[OrdPoly], ord: &CompiledOrder) -> OrdPoly {
    let mut work = p.clone();
    let mut rem: Vec<(Monomial, Rat)> = Vec::new();
    'outer: while !work.is_zero() {
        let (lm, lc) = work.leading().clone();
        for g in gens {
            let (gm, gc) = g.leading();
            if let Some(q) = lm.div(gm) {
                let c = lc.clone() / gc.clone();
                work = work.sub_scaled(g, &q, &c, ord);
                continue 'outer;
            }
        }
        // irreducible: emit and keep dividing the tail
        work.terms.pop();
        rem.push((lm, lc));
    }
    rem.reverse();
    OrdPoly { terms: rem }
}

fn spoly(f: &OrdPoly, g: &OrdPoly, ord: &CompiledOrder) -> OrdPoly {
    let (fm, fc) = f.leading();
    let (gm, gc) = g.leading();
    let l = fm.lcm(gm);
    let mf = l.div(fm).unwrap();
    let mg = l.div(gm).unwrap();
    // f*(l/LM f)/lc(f) - g*(l/LM g)/lc(g)
    let mut left = OrdPoly {
        terms: f.terms.iter().map(|(m, c)| (m.mul(&mf), c.clone() / fc.clone())).collect(),
    };
    left = left.sub_scaled(g, &mg, &(Rat::one() / gc.clone()), ord);
    left
}

/// Buchberger's algorithm with the product (coprime) and chain criteria and
/// smallest-lcm pair selection, followed by full interreduction. Returns the
/// reduced Groebner basis: unique for the order, independent of generator
/// presentation.
pub fn buchberger(u: &Arc<Universe>, gens: &[MultiPoly], order: MonomialOrder) -> Ideal {
    let ord = order.compile(u);
    let mut basis: Vec<OrdPoly> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| OrdPoly::from_multi(g, &ord))
        .collect();

    let mut pairs: Vec<(Monomial, usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            pairs.push((basis[i].leading().0.lcm(&basis[j].leading().0), i, j));
        }
    }
    let mut treated: HashSet<(usize, usize)> = HashSet::new();

    while !pairs.is_empty() {
        // normal selection: smallest lcm first, ties by index pair
        let mut best = 0;
        for k in 1..pairs.len() {
            let c = ord.cmp(&pairs[k].0, &pairs[best].0);
            if c == Ordering::Less
                || (c == Ordering::Equal && (pairs[k].1, pairs[k].2) < (pairs[best].1, pairs[best].2))
            {
                best = k;
            }
        }
        let (l, i, j) = pairs.swap_remove(best);
        treated.insert((i, j));

        let (lmi, _) = basis[i].leading();
        let (lmj, _) = basis[j].leading();
        if lmi.coprime(lmj) {
            continue; // product criterion
        }
        // chain criterion: some k with LM(k) | lcm and both (i,k),(j,k) done
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].leading().0.divides(&l)
                && treated.contains(&(i.min(k), i.max(k)))
                && treated.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }

        let s = spoly(&basis[i], &basis[j], &ord);
        let r = normal_form_ord(&s, &basis, &ord);
        if !r.is_zero() {
            let new_idx = basis.len();
            for t in 0..new_idx {
                pairs.push((basis[t].leading().0.lcm(&r.leading().0), t, new_idx));
            }
            basis.push(r);
        }
    }

    // minimal basis: drop generators whose leading monomial is divisible by
    // another kept one (prefer smaller leading monomials)
    let mut idx: Vec<usize> = (0..basis.len()).collect();
    idx.sort_by(|&a, &b| {
        ord.cmp(&basis[a].leading().0, &basis[b].leading().0).then(a.cmp(&b))
    });
    let mut kept: Vec<OrdPoly> = Vec::new();
    for &k in &idx {
        let lm = basis[k].leading().0.clone();
        if !kept.iter().any(|g| g.leading().0.divides(&lm)) {
            kept.push(basis[k].clone());
        }
    }

    // interreduce to the reduced basis (tail reduction; leading monomials of
    // a minimal basis are untouched), then make monic
    loop {
        let mut changed = false;
        for i in 0..kept.len() {
            let others: Vec<OrdPoly> =
                kept.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, g)| g.clone()).collect();
            let r = normal_form_ord(&kept[i], &others, &ord);
            assert!(!r.is_zero(), "minimal basis element reduced to zero");
            if r.terms != kept[i].terms {
                kept[i] = r;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for g in &mut kept {
        let lc = g.leading().1.clone();
        g.scale(&(Rat::one() / lc));
    }
    kept.sort_by(|a, b| ord.cmp(&a.leading().0, &b.leading().0));

    Ideal {
        universe: Arc::clone(u),
        generators: kept.iter().map(|g| g.to_multi(u)).collect(),
        order,
        reduced: true,
    }
}

/// Exact substitution shortcut for elimination: while some generator has the
/// shape `c*x + rest` with `c` a nonzero rational, `x` a kill variable and
/// `rest` free of `x`, replace `x := -rest/c` everywhere and drop the
/// generator. This is an affine change of variables, so the elimination
/// ideal is unchanged; it clears loop counters and composition middles
/// without running Buchberger on them.
fn presubstitute(gens: &mut Vec<MultiPoly>, kill: &mut Vec<VarId>) {
    'outer: loop {
        for gi in 0..gens.len() {
            for ki in 0..kill.len() {
                let x = &kill[ki];
                if gens[gi].degree_in(x) != 1 {
                    continue;
                }
                let coeff = gens[gi].coeff_of_power(x, 1);
                let c = match coeff.as_constant() {
                    Some(c) if !c.is_zero() => c,
                    _ => continue,
                };
                let u = gens[gi].universe().clone();
                let rest = gens[gi].sub(&MultiPoly::var(&u, x).scale(&c));
                debug_assert!(!rest.mentions(x));
                let image = rest.scale(&(-Rat::one() / c));
                let x = kill.remove(ki);
                gens.remove(gi);
                for g in gens.iter_mut() {
                    *g = g.substitute(&x, &image);
                }
                gens.retain(|g| !g.is_zero());
                continue 'outer;
            }
        }
        return;
    }
}

/// Generators of `I ∩ Q[universe \ kill]`, over the universe without `kill`.
/// Linear kill variables with constant coefficients are substituted away;
/// the rest go through a block order (kill variables lex-first). The block
/// path returns the reduced basis restricted to degrevlex on the survivors;
/// the substitution-only path returns the substituted generators unreduced,
/// since callers canonicalize and reduction in an unrelated order can be far
/// more expensive than the basis is worth.
pub fn eliminate(ideal: &Ideal, kill: &[VarId]) -> Ideal {
    for v in kill {
        assert!(ideal.universe.contains(v), "kill variable {} not in universe", v);
    }
    let out_universe = ideal.universe.without(kill);
    let mut gens = ideal.generators.clone();
    let mut kill_left: Vec<VarId> = kill.to_vec();
    presubstitute(&mut gens, &mut kill_left);

    if kill_left.is_empty() {
        let mapped: Vec<MultiPoly> = gens.iter().map(|g| g.extend_to(&out_universe)).collect();
        return Ideal::new(
            out_universe.clone(),
            mapped,
            MonomialOrder::canonical_degrevlex(&out_universe),
        );
    }

    let ord = MonomialOrder::elimination(&ideal.universe, &kill_left);
    let gb = buchberger(&ideal.universe, &gens, ord);
    let survivors: Vec<MultiPoly> =
        gb.generators.into_iter().filter(|g| !g.mentions_any(kill)).collect();
    let mapped: Vec<MultiPoly> =
        survivors.iter().map(|g| g.extend_to(&out_universe)).collect();
    buchberger(&out_universe, &mapped, MonomialOrder::canonical_degrevlex(&out_universe))
}

/// Fresh auxiliary variable avoiding every name in `u`.
fn fresh_aux(u: &Universe, stem: &str) -> VarId {
    let mut name = stem.to_string();
    let mut k = 0;
    while u.pos_by_name(&name).is_some() {
        k += 1;
        name = format!("{}{}", stem, k);
    }
    VarId::new(name, VarKind::Auxiliary)
}

/// Ideal intersection via the tag-variable trick:
/// `I ∩ J = (t·I + (1-t)·J) ∩ Q[universe]` for a fresh `t`.
pub fn intersect(lhs: &Ideal, rhs: &Ideal) -> Ideal {
    assert_eq!(lhs.universe, rhs.universe, "intersection across universes");
    if lhs.is_zero() {
        return lhs.clone();
    }
    if rhs.is_zero() {
        return rhs.clone();
    }
    let t = fresh_aux(&lhs.universe, "__t");
    let mut vars = vec![t.clone()];
    vars.extend(lhs.universe.vars().iter().cloned());
    let big = Universe::new(vars);

    let tp = MultiPoly::var(&big, &t);
    let one_minus_t = MultiPoly::one(&big).sub(&tp);
    let mut gens: Vec<MultiPoly> = Vec::new();
    for g in &lhs.generators {
        gens.push(g.extend_to(&big).mul(&tp));
    }
    for h in &rhs.generators {
        gens.push(h.extend_to(&big).mul(&one_minus_t));
    }
    let tmp = Ideal::new(Arc::clone(&big), gens, MonomialOrder::elimination(&big, &[t.clone()]));
    let out = eliminate(&tmp, &[t]);
    // eliminate() rebuilt the universe without t; its contents equal the
    // inputs' universe, but reuse the callers' Arc for downstream identity.
    Ideal {
        universe: Arc::clone(&lhs.universe),
        generators: out.generators.iter().map(|g| g.extend_to(&lhs.universe)).collect(),
        order: out.order,
        reduced: out.reduced,
    }
}

/// True exactly when both ideals are equal, decided by comparing reduced
/// Groebner bases under the canonical lex order term by term.
pub fn ideal_equal(lhs: &Ideal, rhs: &Ideal) -> bool {
    assert_eq!(lhs.universe, rhs.universe, "equality across universes");
    let a = lhs.canonicalize();
    let b = rhs.canonicalize();
    a.generators == b.generators
}
