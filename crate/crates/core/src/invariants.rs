//! Polynomial invariants from closed forms.
//!
//! Per path, every closed form gives one generator `v − form(n)` after each
//! exponential sequence θ^n is replaced by a fresh sequence variable t_i.
//! The t_i are not independent: all multiplicative relations among the bases
//! (e.g. 4^n = (2^n)², 2^n·(1/2)^n = 1) are adjoined as binomial generators,
//! found by factoring the bases into a common coprime set and computing an
//! integer kernel. Eliminating the loop counter and the t_i then yields every
//! polynomial relation that holds along the path, between current values and
//! initial values.
//!
//! Across paths, any execution is a word p_{i1}^{a1} ... p_{im}^{am} of path
//! powers. Each round extends a symbolic word by one run of every path in a
//! fixed cyclic order: the stage's closed forms are threaded through the
//! previous symbolic state with a fresh counter and fresh base-sequence
//! variables, every prefix of the word contributes the elimination ideal of
//! its final state (runs of length zero at inner stages make the cyclic
//! order lose no interleavings), and all prefix ideals are intersected. The
//! iteration stops when the intersection stabilizes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Diagnostic, DiagnosticCode};
use crate::groebner::{buchberger, eliminate, ideal_equal, intersect, Ideal};
use crate::poly::{MonomialOrder, MultiPoly, Universe, VarId, VarKind};
use crate::rat::{rat_int, rat_pow, Rat};
use crate::recurrence::{RecurrenceSystem, Update};
use crate::solver::{symbolic_unroll, ClosedFormSystem};

/// Universe the loop relation lives in: the program variables and their
/// initials.
pub fn relation_universe(variables: &[VarId]) -> Arc<Universe> {
    let mut vars = variables.to_vec();
    vars.extend(variables.iter().map(VarId::initial_of));
    Universe::new(vars)
}

// ---------------------------------------------------------------------------
// Multiplicative relations among exponential bases
// ---------------------------------------------------------------------------

/// Pairwise coprime integers > 1 over which every input factors.
fn coprime_basis(inputs: &[BigInt]) -> Vec<BigInt> {
    let mut basis: Vec<BigInt> = Vec::new();
    for x in inputs {
        insert_coprime(&mut basis, x.abs());
    }
    basis.sort();
    basis
}

fn insert_coprime(basis: &mut Vec<BigInt>, x: BigInt) {
    if x <= BigInt::one() {
        return;
    }
    for i in 0..basis.len() {
        let g = x.gcd(&basis[i]);
        if g.is_one() {
            continue;
        }
        if g == basis[i] {
            // strip all full copies of basis[i], refine the rest
            let mut y = x;
            while (&y % &basis[i]).is_zero() {
                y /= &basis[i];
            }
            insert_coprime(basis, y);
            return;
        }
        // proper common divisor: split basis[i] and retry
        let b = basis.remove(i);
        let quot = &b / &g;
        insert_coprime(basis, g);
        insert_coprime(basis, quot);
        insert_coprime(basis, x);
        return;
    }
    basis.push(x);
}

/// Exponents of |x| over the coprime basis; panics if x does not factor
/// (cannot happen when the basis was refined from x itself).
fn exponents_over(x: &BigInt, basis: &[BigInt]) -> Vec<i128> {
    let mut rest = x.abs();
    let mut out = vec![0i128; basis.len()];
    for (i, b) in basis.iter().enumerate() {
        while (&rest % b).is_zero() {
            rest /= b;
            out[i] += 1;
        }
    }
    assert!(rest.is_one(), "input does not factor over its coprime basis");
    out
}

/// Basis of { z ∈ Z^k : z·m = 0 }, by integer row reduction of [m | I].
fn left_kernel(mut m: Vec<Vec<i128>>, k: usize) -> Vec<Vec<i128>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut u: Vec<Vec<i128>> = (0..k)
        .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut row = 0;
    for col in 0..cols {
        loop {
            let mut piv: Option<usize> = None;
            for r in row..k {
                if m[r][col] != 0
                    && piv.map_or(true, |p: usize| m[r][col].abs() < m[p][col].abs())
                {
                    piv = Some(r);
                }
            }
            let Some(p) = piv else { break };
            m.swap(row, p);
            u.swap(row, p);
            let mut clean = true;
            for r in row + 1..k {
                if m[r][col] == 0 {
                    continue;
                }
                let q = m[r][col].div_euclid(m[row][col]);
                if q != 0 {
                    for c in 0..cols {
                        m[r][c] -= q * m[row][c];
                    }
                    for c in 0..k {
                        u[r][c] -= q * u[row][c];
                    }
                }
                if m[r][col] != 0 {
                    clean = false;
                }
            }
            if clean {
                row += 1;
                break;
            }
        }
    }
    u.split_off(row)
}

/// Generators (in the t variables) of all relations Π t_i^{z_i} = 1 that the
/// bases satisfy as rational numbers, including sign: the lattice of
/// exponent vectors with Π θ_i^{z_i} = 1, rendered as binomials
/// t^{z⁺} − t^{z⁻}. The basis binomials alone can fail to generate the
/// binomial of a combined lattice vector, so the ideal is saturated by the
/// product of the t variables (which never vanish, since every θ ≠ 0) before
/// it is returned.
pub fn base_relations(bases: &[Rat], ts: &[VarId], universe: &Arc<Universe>) -> Vec<MultiPoly> {
    assert_eq!(bases.len(), ts.len());
    if bases.is_empty() {
        return Vec::new();
    }
    let mut inputs: Vec<BigInt> = Vec::new();
    for b in bases {
        inputs.push(b.numer().abs());
        inputs.push(b.denom().abs());
    }
    let basis = coprime_basis(&inputs);
    let matrix: Vec<Vec<i128>> = bases
        .iter()
        .map(|b| {
            let num = exponents_over(b.numer(), &basis);
            let den = exponents_over(b.denom(), &basis);
            num.iter().zip(&den).map(|(a, c)| a - c).collect()
        })
        .collect();
    let mut kernel = left_kernel(matrix, bases.len());

    // sign: −1 acts like a generator of order two; restrict to the
    // even-parity sublattice (index at most 2)
    let signs: Vec<bool> = bases.iter().map(|b| b.is_negative()).collect();
    if signs.iter().any(|&s| s) {
        let parity = |z: &[i128]| -> i128 {
            let s: i128 = z.iter().zip(&signs).filter(|(_, &s)| s).map(|(c, _)| *c).sum();
            s.rem_euclid(2)
        };
        if let Some(j0) = kernel.iter().position(|z| parity(z) == 1) {
            let pivot = kernel[j0].clone();
            for (j, z) in kernel.iter_mut().enumerate() {
                if j != j0 && parity(z) == 1 {
                    for (c, p) in z.iter_mut().zip(&pivot) {
                        *c += p;
                    }
                }
            }
            for c in kernel[j0].iter_mut() {
                *c *= 2;
            }
        }
    }

    // build the basis binomials over the ts alone, plus an inverse witness
    // for the saturation step below
    let w = VarId::new("__sat", VarKind::Auxiliary);
    let mut small_vars = ts.to_vec();
    small_vars.push(w.clone());
    let small = Universe::new(small_vars);
    let mut gens = Vec::new();
    for z in kernel {
        let mut pos = MultiPoly::one(&small);
        let mut neg = MultiPoly::one(&small);
        for (i, &zi) in z.iter().enumerate() {
            if zi > 0 {
                pos = pos.mul(&MultiPoly::var(&small, &ts[i]).pow(zi as u32));
            } else if zi < 0 {
                neg = neg.mul(&MultiPoly::var(&small, &ts[i]).pow((-zi) as u32));
            }
        }
        let g = pos.sub(&neg);
        if !g.is_zero() {
            gens.push(g);
        }
    }

    // a single basis binomial has monomial sides with disjoint support, so
    // its principal ideal is already saturated
    if gens.len() > 1 {
        let mut prod = MultiPoly::var(&small, &w);
        for t in ts {
            prod = prod.mul(&MultiPoly::var(&small, t));
        }
        gens.push(prod.sub(&MultiPoly::one(&small)));
        let kill = [w];
        let order = MonomialOrder::elimination(&small, &kill);
        gens = eliminate(&Ideal::new(small, gens, order), &kill).generators;
    }
    gens.iter().map(|g| g.extend_to(universe)).collect()
}

// ---------------------------------------------------------------------------
// Per-path relation ideal
// ---------------------------------------------------------------------------

/// All polynomial relations between initial and current values that hold
/// after any number of iterations of one path, as an ideal over `target`
/// (programs and initials).
///
/// Forms that are only valid from step S > 0 on are handled exactly: the
/// elimination ideal covers n ≥ S, and the finitely many earlier steps
/// contribute one linear relation ideal each, all intersected.
pub fn path_ideal(
    sys: &RecurrenceSystem,
    cfs: &ClosedFormSystem,
    target: &Arc<Universe>,
) -> Ideal {
    let ts: Vec<VarId> = (1..=cfs.bases.len())
        .map(|i| VarId::new(format!("t{i}"), VarKind::BaseSequence))
        .collect();
    let mut vars = cfs.variables.clone();
    vars.extend(cfs.variables.iter().map(VarId::initial_of));
    vars.push(cfs.counter.clone());
    vars.extend(ts.iter().cloned());
    let big = Universe::new(vars);

    let t_of = |theta: &Rat| -> MultiPoly {
        let i = cfs.bases.iter().position(|b| b == theta).expect("unlisted base");
        MultiPoly::var(&big, &ts[i])
    };

    let mut gens: Vec<MultiPoly> = Vec::new();
    for (i, v) in cfs.variables.iter().enumerate() {
        let mut rhs = MultiPoly::zero(&big);
        for (theta, q) in cfs.forms[i].terms() {
            let q = q.extend_to(&big);
            if theta.is_one() {
                rhs = rhs.add(&q);
            } else {
                rhs = rhs.add(&q.mul(&t_of(theta)));
            }
        }
        gens.push(MultiPoly::var(&big, v).sub(&rhs));
    }
    gens.extend(base_relations(&cfs.bases, &ts, &big));

    let mut kill = vec![cfs.counter.clone()];
    kill.extend(ts.iter().cloned());
    let order = MonomialOrder::elimination(&big, &kill);
    let elim = eliminate(&Ideal::new(Arc::clone(&big), gens, order), &kill);
    let mut result = Ideal {
        universe: Arc::clone(target),
        generators: elim.generators.iter().map(|g| g.extend_to(target)).collect(),
        order: MonomialOrder::canonical_degrevlex(target),
        reduced: false,
    };
    result = result.canonicalize();

    // early steps not covered by the shifted forms
    let s = cfs.valid_from.iter().copied().max().unwrap_or(0);
    if s > 0 {
        let unrolled = symbolic_unroll(sys, &cfs.universe, s - 1)
            .expect("solved systems unroll everywhere");
        for row in unrolled.iter().take(s as usize) {
            let gens: Vec<MultiPoly> = cfs
                .variables
                .iter()
                .zip(row)
                .map(|(v, value)| {
                    MultiPoly::var(target, v).sub(&value.extend_to(target))
                })
                .collect();
            let ek = buchberger(target, &gens, MonomialOrder::canonical_lex(target));
            result = intersect(&result, &ek).canonicalize();
        }
    }
    result
}

// ---------------------------------------------------------------------------
// Relation algebra across paths
// ---------------------------------------------------------------------------

/// The identity relation `v = v_0` for every program variable, as a reduced
/// basis.
pub fn identity_ideal(universe: &Arc<Universe>) -> Ideal {
    let gens: Vec<MultiPoly> = universe
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Program)
        .map(|v| {
            MultiPoly::var(universe, v).sub(&MultiPoly::var(universe, &VarId::initial_of(v)))
        })
        .collect();
    buchberger(universe, &gens, MonomialOrder::canonical_lex(universe))
}

/// Relational composition: states (x, z) such that some y satisfies
/// lhs(x, y) and rhs(y, z). The middle copy uses auxiliary variables indexed
/// by `round` so repeated compositions stay distinct.
pub fn compose(lhs: &Ideal, rhs: &Ideal, round: usize) -> Ideal {
    assert_eq!(lhs.universe, rhs.universe, "composition across universes");
    let u = &lhs.universe;
    let programs: Vec<VarId> =
        u.vars().iter().filter(|v| v.kind == VarKind::Program).cloned().collect();
    let middles: HashMap<String, VarId> = programs
        .iter()
        .map(|v| {
            (v.name.clone(), VarId::new(format!("{}__m{}", v.name, round), VarKind::Auxiliary))
        })
        .collect();
    let mut vars = u.vars().to_vec();
    let mut middle_list: Vec<VarId> = programs.iter().map(|v| middles[&v.name].clone()).collect();
    middle_list.sort_by(|a, b| a.name.cmp(&b.name));
    vars.extend(middle_list.iter().cloned());
    let big = Universe::new(vars);

    let mut gens: Vec<MultiPoly> = Vec::new();
    for g in &lhs.generators {
        gens.push(g.map_universe(&big, |v| {
            if v.kind == VarKind::Program {
                middles[&v.name].clone()
            } else {
                v.clone()
            }
        }));
    }
    for g in &rhs.generators {
        gens.push(g.map_universe(&big, |v| {
            if v.kind == VarKind::Initial {
                if let Some(stem) = v.name.strip_suffix("_0") {
                    if let Some(m) = middles.get(stem) {
                        return m.clone();
                    }
                }
            }
            v.clone()
        }));
    }
    let order = MonomialOrder::elimination(&big, &middle_list);
    let out = eliminate(&Ideal::new(Arc::clone(&big), gens, order), &middle_list);
    Ideal {
        universe: Arc::clone(u),
        generators: out.generators.iter().map(|g| g.extend_to(u)).collect(),
        order: out.order,
        reduced: out.reduced,
    }
}

/// One position in a symbolic word of path powers: the path that runs there
/// and the fresh counter / base-sequence variables describing its length.
struct Stage<'a> {
    sys: &'a RecurrenceSystem,
    cfs: &'a ClosedFormSystem,
    counter: VarId,
    ts: Vec<VarId>,
}

/// How a stage's run length is treated in one case of the split: exactly `c`
/// steps (short runs where a shifted closed form is not yet exact), or any
/// run of at least `shift` steps threaded through the closed forms.
#[derive(Clone, Copy)]
enum StageCase {
    Concrete(u64),
    Tail(u64),
}

/// Image of `p` under a variable substitution, rebuilt over `big`. Variables
/// absent from `map` pass through unchanged.
fn poly_image(
    p: &MultiPoly,
    big: &Arc<Universe>,
    map: &HashMap<VarId, MultiPoly>,
) -> MultiPoly {
    let src = Arc::clone(p.universe());
    let mut out = MultiPoly::zero(big);
    for (mono, coeff) in p.terms() {
        let mut term = MultiPoly::constant(big, coeff.clone());
        for (i, &e) in mono.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let v = &src.vars()[i];
            match map.get(v) {
                Some(img) => term = term.mul(&img.pow(e)),
                None => term = term.mul(&MultiPoly::var(big, v).pow(e)),
            }
        }
        out = out.add(&term);
    }
    out
}

/// One exact symbolic step of `sys` from `state` at concrete counter value
/// `idx`; entries of `state` are polynomials over `big`.
fn step_state(
    sys: &RecurrenceSystem,
    state: &[MultiPoly],
    big: &Arc<Universe>,
    idx: u64,
) -> Result<Vec<MultiPoly>, Diagnostic> {
    let n = rat_int(idx as i64);
    let mut out = Vec::with_capacity(state.len());
    for (i, upd) in sys.updates.iter().enumerate() {
        match upd {
            Update::Affine { coeffs, constant } => {
                let mut acc = MultiPoly::constant(big, constant.clone());
                for (w, c) in coeffs {
                    let j = sys.variables.iter().position(|v| v == w).unwrap();
                    acc = acc.add(&state[j].scale(c));
                }
                out.push(acc);
            }
            Update::RationalScale { num, den } => {
                let d = den.eval(&n);
                if d.is_zero() {
                    return Err(Diagnostic::new(
                        DiagnosticCode::NonTelescoping,
                        format!("scale denominator vanishes at step {idx}"),
                    ));
                }
                out.push(state[i].scale(&(num.eval(&n) / d)));
            }
        }
    }
    Ok(out)
}

/// Thread `state` through one stage's closed forms for a run of length
/// `n_s + shift`: the counter maps to `n_s + shift`, each exponential θ^n to
/// t_s·θ^shift, and each initial to the incoming state polynomial.
fn tail_state(
    stage: &Stage,
    state: &[MultiPoly],
    big: &Arc<Universe>,
    shift: u64,
) -> Vec<MultiPoly> {
    let cfs = stage.cfs;
    let mut map: HashMap<VarId, MultiPoly> = HashMap::new();
    for (i, v) in cfs.variables.iter().enumerate() {
        map.insert(VarId::initial_of(v), state[i].clone());
    }
    map.insert(
        cfs.counter.clone(),
        MultiPoly::var(big, &stage.counter)
            .add(&MultiPoly::constant(big, rat_int(shift as i64))),
    );
    cfs.forms
        .iter()
        .map(|form| {
            let mut acc = MultiPoly::zero(big);
            for (theta, q) in form.terms() {
                let mut part = poly_image(q, big, &map);
                if !theta.is_one() {
                    let i = cfs.bases.iter().position(|b| b == theta).expect("unlisted base");
                    part = part
                        .mul(&MultiPoly::var(big, &stage.ts[i]))
                        .scale(&rat_pow(theta, shift as i64));
                }
                acc = acc.add(&part);
            }
            acc
        })
        .collect()
}

/// Case split for one stage. Variables whose closed form only becomes exact
/// from step S > 0 force runs shorter than S to be stepped concretely, but
/// only when a wrong early value could be observed: at an inner stage a
/// variable no path ever reads is dead until the final stage fixes it, so it
/// cannot force a split there. The final stage must be exact for every
/// variable; its length-zero case is dropped because that state is the
/// previous prefix's, which is intersected separately.
fn stage_cases(stage: &Stage, last: bool, read: &HashSet<VarId>) -> Vec<StageCase> {
    let cfs = stage.cfs;
    let s = cfs
        .variables
        .iter()
        .zip(&cfs.valid_from)
        .filter(|(v, &s)| s > 0 && (last || read.contains(*v)))
        .map(|(_, &s)| s)
        .max()
        .unwrap_or(0);
    if s == 0 {
        return vec![StageCase::Tail(0)];
    }
    let lo = if last { 1 } else { 0 };
    let mut out: Vec<StageCase> = (lo..s).map(StageCase::Concrete).collect();
    out.push(StageCase::Tail(s));
    out
}

/// Relation ideal of one case vector over a word prefix: thread the symbolic
/// state stage by stage, equate the result with the program variables, and
/// eliminate every stage counter and base sequence.
fn case_ideal(
    stages: &[Stage],
    cases: &[StageCase],
    big: &Arc<Universe>,
    target: &Arc<Universe>,
) -> Result<Ideal, Diagnostic> {
    let variables = &stages[0].cfs.variables;
    let mut state: Vec<MultiPoly> = variables
        .iter()
        .map(|v| MultiPoly::var(big, &VarId::initial_of(v)))
        .collect();
    let mut gens: Vec<MultiPoly> = Vec::new();
    let mut kill: Vec<VarId> = Vec::new();
    for (stage, case) in stages.iter().zip(cases) {
        match *case {
            StageCase::Concrete(c) => {
                for idx in 0..c {
                    state = step_state(stage.sys, &state, big, idx)?;
                }
            }
            StageCase::Tail(shift) => {
                state = tail_state(stage, &state, big, shift);
                gens.extend(base_relations(&stage.cfs.bases, &stage.ts, big));
                kill.push(stage.counter.clone());
                kill.extend(stage.ts.iter().cloned());
            }
        }
    }
    for (i, v) in variables.iter().enumerate() {
        gens.push(MultiPoly::var(big, v).sub(&state[i]));
    }
    let order = MonomialOrder::elimination(big, &kill);
    let elim = eliminate(&Ideal::new(Arc::clone(big), gens, order), &kill);
    Ok(Ideal {
        universe: Arc::clone(target),
        generators: elim.generators.iter().map(|g| g.extend_to(target)).collect(),
        order: MonomialOrder::canonical_degrevlex(target),
        reduced: false,
    })
}

/// Relation ideal of one word prefix: the intersection of its case ideals.
fn prefix_ideal(
    stages: &[Stage],
    read: &HashSet<VarId>,
    target: &Arc<Universe>,
) -> Result<Ideal, Diagnostic> {
    let mut vars = target.vars().to_vec();
    for st in stages {
        vars.push(st.counter.clone());
        vars.extend(st.ts.iter().cloned());
    }
    let big = Universe::new(vars);
    let case_sets: Vec<Vec<StageCase>> = stages
        .iter()
        .enumerate()
        .map(|(i, st)| stage_cases(st, i + 1 == stages.len(), read))
        .collect();
    let mut acc: Option<Ideal> = None;
    let mut choice = vec![0usize; case_sets.len()];
    loop {
        let cases: Vec<StageCase> =
            choice.iter().zip(&case_sets).map(|(&c, set)| set[c]).collect();
        let ideal = case_ideal(stages, &cases, &big, target)?;
        acc = Some(match acc {
            None => ideal,
            Some(a) => intersect(&a, &ideal),
        });
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(acc.unwrap().canonicalize());
            }
            choice[k] += 1;
            if choice[k] < case_sets[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// All polynomial relations preserved by every execution of the loop, as an
/// ideal over programs and initials.
///
/// A single path composes with itself, so its path ideal is already closed
/// and is returned directly. Otherwise the symbolic word grows by one run of
/// every path per round and the intersection of all prefix ideals is tracked
/// until it stabilizes. When no closed form needs a shift the prefix chain
/// is itself descending (specializing the newest stage to length zero maps
/// each prefix's system onto the previous one), so only the full prefix per
/// round is computed.
pub fn invariant_ideal(
    systems: &[RecurrenceSystem],
    forms: &[ClosedFormSystem],
    target: &Arc<Universe>,
) -> Result<Ideal, Diagnostic> {
    assert_eq!(systems.len(), forms.len());
    assert!(!systems.is_empty());
    if systems.len() == 1 {
        return Ok(path_ideal(&systems[0], &forms[0], target));
    }
    let read: HashSet<VarId> = systems
        .iter()
        .flat_map(|sys| {
            sys.variables.iter().zip(&sys.updates).flat_map(|(v, u)| u.reads(v))
        })
        .collect();
    let nested = forms.iter().all(|c| c.valid_from.iter().all(|&s| s == 0));

    const MAX_ROUNDS: usize = 50;
    let k = systems.len();
    let mut stages: Vec<Stage> = Vec::new();
    let mut acc = identity_ideal(target);
    for round in 1..=MAX_ROUNDS {
        for (p, (sys, cfs)) in systems.iter().zip(forms).enumerate() {
            stages.push(Stage {
                sys,
                cfs,
                counter: VarId::new(
                    format!("{}__w{round}", cfs.counter.name),
                    VarKind::Counter,
                ),
                ts: (1..=cfs.bases.len())
                    .map(|i| {
                        VarId::new(
                            format!("t{i}__w{round}p{}", p + 1),
                            VarKind::BaseSequence,
                        )
                    })
                    .collect(),
            });
        }
        let next = if nested {
            prefix_ideal(&stages, &read, target)?
        } else {
            let mut next = acc.clone();
            let start = stages.len() - k;
            for l in 1..=k {
                let pre = prefix_ideal(&stages[..start + l], &read, target)?;
                next = intersect(&next, &pre);
            }
            next.canonicalize()
        };
        if ideal_equal(&next, &acc) {
            return Ok(next);
        }
        acc = next;
    }
    Err(Diagnostic::new(
        DiagnosticCode::NonTermination,
        format!("invariant computation did not stabilize within {MAX_ROUNDS} rounds"),
    ))
}
