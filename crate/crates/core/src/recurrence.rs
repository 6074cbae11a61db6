//! Straight-line paths into simultaneous recurrence systems.
//!
//! A path executes its assignments in order, so a later assignment sees the
//! updated values of earlier ones. Composing the whole path by forward
//! substitution turns it into one simultaneous step
//! `v_i(n+1) = f_i(v_1(n), ..., v_m(n))`. During substitution every value is
//! carried as a rational function whose denominator only involves the loop
//! counter; at the end each variable's composed update must be either affine
//! with constant coefficients or `v * ρ(counter)`.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Diagnostic, DiagnosticCode};
use crate::frontend::{AssignSeq, Expr};
use crate::poly::{Monomial, MultiPoly, Universe, VarId, VarKind};
use crate::rat::{rat_int, Rat};
use crate::roots::UniPoly;

/// One variable's simultaneous update.
#[derive(Clone, Debug, PartialEq)]
pub enum Update {
    /// v(n+1) = Σ coeffs[w]·w(n) + constant
    Affine { coeffs: Vec<(VarId, Rat)>, constant: Rat },
    /// v(n+1) = v(n) · num(n)/den(n)
    RationalScale { num: UniPoly, den: UniPoly },
}

impl Update {
    pub fn identity(v: &VarId) -> Update {
        Update::Affine { coeffs: vec![(v.clone(), rat_int(1))], constant: Rat::zero() }
    }

    /// Affine coefficient of `w` (zero when absent). Panics on RationalScale.
    pub fn coeff(&self, w: &VarId) -> Rat {
        match self {
            Update::Affine { coeffs, .. } => coeffs
                .iter()
                .find(|(v, _)| v == w)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Rat::zero),
            Update::RationalScale { .. } => panic!("coeff() on a rational-scale update"),
        }
    }

    /// Variables this update reads.
    pub fn reads(&self, this: &VarId) -> Vec<VarId> {
        match self {
            Update::Affine { coeffs, .. } => coeffs.iter().map(|(v, _)| v.clone()).collect(),
            Update::RationalScale { .. } => vec![this.clone()],
        }
    }
}

/// A path as one simultaneous recurrence step over a fresh counter.
#[derive(Clone, Debug)]
pub struct RecurrenceSystem {
    pub counter: VarId,
    /// Program variables, in PathSystem order; `updates` is parallel.
    pub variables: Vec<VarId>,
    pub updates: Vec<Update>,
}

impl RecurrenceSystem {
    pub fn update_of(&self, v: &VarId) -> &Update {
        let i = self.variables.iter().position(|w| w == v).expect("unknown variable");
        &self.updates[i]
    }

    /// One exact simultaneous step from `state` at counter value `n`.
    /// `None` when a rational-scale denominator (or numerator's own
    /// denominator) vanishes at `n`.
    pub fn step(&self, state: &[Rat], n: i64) -> Option<Vec<Rat>> {
        let nv = rat_int(n);
        let mut out = Vec::with_capacity(self.variables.len());
        for (i, upd) in self.updates.iter().enumerate() {
            match upd {
                Update::Affine { coeffs, constant } => {
                    let mut acc = constant.clone();
                    for (w, c) in coeffs {
                        let j = self.variables.iter().position(|v| v == w).unwrap();
                        acc += c * &state[j];
                    }
                    out.push(acc);
                }
                Update::RationalScale { num, den } => {
                    let d = den.eval(&nv);
                    if d.is_zero() {
                        return None;
                    }
                    out.push(&state[i] * num.eval(&nv) / d);
                }
            }
        }
        Some(out)
    }
}

/// Rational function with a counter-only denominator (kept monic).
#[derive(Clone, Debug)]
struct Rf {
    num: MultiPoly,
    den: UniPoly,
}

struct Ctx {
    universe: Arc<Universe>,
    counter: VarId,
    counter_pos: usize,
}

impl Ctx {
    fn up_to_mp(&self, u: &UniPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.universe);
        for (k, c) in u.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; self.universe.len()];
            e[self.counter_pos] = k as u32;
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Counter-only multivariate polynomial to univariate. Panics otherwise.
    fn mp_to_up(&self, p: &MultiPoly) -> UniPoly {
        let deg = p.degree_in(&self.counter) as usize;
        let mut coeffs = vec![Rat::zero(); deg + 1];
        for (m, c) in p.terms() {
            for (i, &exp) in m.0.iter().enumerate() {
                assert!(
                    exp == 0 || i == self.counter_pos,
                    "polynomial is not counter-only"
                );
            }
            coeffs[m.0[self.counter_pos] as usize] += c;
        }
        UniPoly::new(coeffs)
    }

    fn is_counter_only(&self, p: &MultiPoly) -> bool {
        p.vars_present().iter().all(|v| *v == self.counter)
    }

    /// Cancel the common counter-only content of num and den, and make the
    /// denominator monic.
    fn reduce(&self, num: MultiPoly, den: UniPoly) -> Rf {
        assert!(!den.is_zero());
        if num.is_zero() {
            return Rf { num, den: UniPoly::one() };
        }
        let mut g = den.clone();
        if den.degree() > 0 {
            // group num's terms by their variable part; each group's
            // counter-coefficients form a univariate polynomial
            let mut groups: std::collections::BTreeMap<Monomial, UniPoly> =
                std::collections::BTreeMap::new();
            for (m, c) in num.terms() {
                let mut var_part = m.clone();
                let k = var_part.0[self.counter_pos] as usize;
                var_part.0[self.counter_pos] = 0;
                let entry = groups.entry(var_part).or_insert_with(UniPoly::zero);
                let mut coeffs = entry.coeffs().to_vec();
                if coeffs.len() <= k {
                    coeffs.resize(k + 1, Rat::zero());
                }
                coeffs[k] += c;
                *entry = UniPoly::new(coeffs);
            }
            for u in groups.values() {
                g = UniPoly::gcd(&g, u);
                if g.degree() == 0 {
                    break;
                }
            }
            if g.degree() > 0 {
                let (new_den, r) = den.divrem(&g);
                debug_assert!(r.is_zero());
                let mut new_num = MultiPoly::zero(&self.universe);
                for (var_part, u) in &groups {
                    let (q, r) = u.divrem(&g);
                    debug_assert!(r.is_zero());
                    for (k, c) in q.coeffs().iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut m = var_part.clone();
                        m.0[self.counter_pos] = k as u32;
                        new_num.add_term(m, c.clone());
                    }
                }
                let lead = new_den.leading();
                return Rf {
                    num: new_num.scale(&lead.recip()),
                    den: new_den.monic(),
                };
            }
        }
        let lead = den.leading();
        Rf { num: num.scale(&lead.recip()), den: den.monic() }
    }

    fn rf_of_expr(&self, e: &Expr, state: &[Rf], target: &VarId) -> Result<Rf, Diagnostic> {
        Ok(match e {
            Expr::Num(c) => Rf {
                num: MultiPoly::constant(&self.universe, c.clone()),
                den: UniPoly::one(),
            },
            Expr::Var(name) => {
                let i = self
                    .universe
                    .pos_by_name(name)
                    .expect("flatten lists every read variable");
                state[i].clone()
            }
            Expr::Counter => Rf {
                num: MultiPoly::var(&self.universe, &self.counter),
                den: UniPoly::one(),
            },
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let x = self.rf_of_expr(a, state, target)?;
                let y = self.rf_of_expr(b, state, target)?;
                let lhs = x.num.mul(&self.up_to_mp(&y.den));
                let rhs = y.num.mul(&self.up_to_mp(&x.den));
                let num = if matches!(e, Expr::Add(..)) { lhs.add(&rhs) } else { lhs.sub(&rhs) };
                self.reduce(num, x.den.mul(&y.den))
            }
            Expr::Mul(a, b) => {
                let x = self.rf_of_expr(a, state, target)?;
                let y = self.rf_of_expr(b, state, target)?;
                self.reduce(x.num.mul(&y.num), x.den.mul(&y.den))
            }
            Expr::Div(a, b) => {
                let x = self.rf_of_expr(a, state, target)?;
                let y = self.rf_of_expr(b, state, target)?;
                // the parser guarantees divisors mention no program variables
                assert!(self.is_counter_only(&y.num), "divisor mentions a program variable");
                let y_num = self.mp_to_up(&y.num);
                if y_num.is_zero() {
                    return Err(Diagnostic::new(
                        DiagnosticCode::UnsupportedUpdate,
                        format!(
                            "update of `{}` divides by an expression that is identically zero",
                            target.name
                        ),
                    ));
                }
                self.reduce(x.num.mul(&self.up_to_mp(&y.den)), x.den.mul(&y_num))
            }
            Expr::Neg(a) => {
                let x = self.rf_of_expr(a, state, target)?;
                Rf { num: x.num.neg(), den: x.den }
            }
        })
    }
}

/// Compose a straight-line path into one simultaneous recurrence step over
/// the fresh counter `n<index>`. Variables not assigned on the path get the
/// identity update.
pub fn extract_recurrences(
    path: &AssignSeq,
    variables: &[VarId],
    index: usize,
) -> Result<RecurrenceSystem, Diagnostic> {
    assert!(index >= 1);
    let counter = VarId::new(format!("n{index}"), VarKind::Counter);
    let mut uni_vars: Vec<VarId> = variables.to_vec();
    uni_vars.push(counter.clone());
    let universe = Universe::new(uni_vars);
    let counter_pos = universe.pos(&counter).unwrap();
    let ctx = Ctx { universe: universe.clone(), counter: counter.clone(), counter_pos };

    // forward substitution: state[i] is v_i's value in terms of OLD values
    let mut state: Vec<Rf> = variables
        .iter()
        .map(|v| Rf { num: MultiPoly::var(&universe, v), den: UniPoly::one() })
        .collect();
    for (target, rhs) in path {
        let value = ctx.rf_of_expr(rhs, &state, target)?;
        let i = universe.pos(target).expect("flatten lists every assigned variable");
        state[i] = value;
    }

    let mut updates = Vec::with_capacity(variables.len());
    for (i, v) in variables.iter().enumerate() {
        updates.push(classify(&ctx, v, &state[i], variables)?);
    }
    Ok(RecurrenceSystem { counter, variables: variables.to_vec(), updates })
}

fn classify(
    ctx: &Ctx,
    v: &VarId,
    rf: &Rf,
    variables: &[VarId],
) -> Result<Update, Diagnostic> {
    // constant denominator (monic => 1): affine candidate
    if rf.den.degree() == 0 {
        let p = &rf.num;
        if !p.mentions(&ctx.counter) && p.total_degree() <= 1 {
            let mut coeffs = Vec::new();
            for w in variables {
                let c = p.coeff_of_power(w, 1).as_constant().unwrap_or_else(Rat::zero);
                if !c.is_zero() {
                    coeffs.push((w.clone(), c));
                }
            }
            return Ok(Update::Affine { coeffs, constant: p.constant_term() });
        }
    }
    // v * ρ(counter) candidate
    if rf.num.degree_in(v) == 1 && rf.num.coeff_of_power(v, 0).is_zero() {
        let q = rf.num.coeff_of_power(v, 1);
        if ctx.is_counter_only(&q) {
            return Ok(Update::RationalScale { num: ctx.mp_to_up(&q), den: rf.den.clone() });
        }
    }
    Err(Diagnostic::new(
        DiagnosticCode::UnsupportedUpdate,
        format!(
            "update of `{}` composes to neither an affine combination with constant \
             coefficients nor `{}` times a rational function of the counter",
            v.name, v.name
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{eval_expr, flatten, parse};
    use crate::rat::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn system_of(src: &str, path_index: usize) -> Result<RecurrenceSystem, Diagnostic> {
        let ps = flatten(&parse(src).unwrap());
        extract_recurrences(&ps.paths[path_index], &ps.variables, path_index + 1)
    }

    fn affine(sys: &RecurrenceSystem, v: &str) -> (Vec<(String, Rat)>, Rat) {
        match sys.update_of(&VarId::program(v)) {
            Update::Affine { coeffs, constant } => (
                coeffs.iter().map(|(w, c)| (w.name.clone(), c.clone())).collect(),
                constant.clone(),
            ),
            other => panic!("expected affine update for {v}, got {other:?}"),
        }
    }

    const SQUARES: &str =
        "while true if true r = r - v; v = v + 2 else r = r + u; u = u + 2 end end";

    #[test]
    fn two_branch_loop_first_path() {
        let sys = system_of(SQUARES, 0).unwrap();
        assert_eq!(sys.counter, VarId::new("n1", VarKind::Counter));
        assert_eq!(
            sys.variables,
            vec![VarId::program("r"), VarId::program("v"), VarId::program("u")]
        );
        // r is assigned first, so it reads v's OLD value
        let (coeffs, c) = affine(&sys, "r");
        assert_eq!(coeffs, vec![("r".into(), rat_int(1)), ("v".into(), rat_int(-1))]);
        assert_eq!(c, rat_int(0));
        let (coeffs, c) = affine(&sys, "v");
        assert_eq!(coeffs, vec![("v".into(), rat_int(1))]);
        assert_eq!(c, rat_int(2));
        // u untouched on this path
        assert_eq!(*sys.update_of(&VarId::program("u")), Update::identity(&VarId::program("u")));
        // second path gets its own counter
        let sys2 = system_of(SQUARES, 1).unwrap();
        assert_eq!(sys2.counter, VarId::new("n2", VarKind::Counter));
    }

    #[test]
    fn swapped_order_reads_updated_value() {
        let sys = system_of("while true v = v + 2; r = r - v end", 0).unwrap();
        let (coeffs, c) = affine(&sys, "r");
        // first-occurrence variable order is [v, r] for this source
        assert_eq!(coeffs, vec![("v".into(), rat_int(-1)), ("r".into(), rat_int(1))]);
        assert_eq!(c, rat_int(-2));
    }

    #[test]
    fn identity_path() {
        let sys = system_of("while true x = x end", 0).unwrap();
        assert_eq!(*sys.update_of(&VarId::program("x")), Update::identity(&VarId::program("x")));
    }

    #[test]
    fn scale_updates() {
        let sys = system_of("while true x = x/2 end", 0).unwrap();
        let (coeffs, c) = affine(&sys, "x");
        assert_eq!(coeffs, vec![("x".into(), rat(1, 2))]);
        assert_eq!(c, rat_int(0));

        let sys = system_of("while true x = x*(n1 + 2)/(n1 + 1) end", 0).unwrap();
        match sys.update_of(&VarId::program("x")) {
            Update::RationalScale { num, den } => {
                assert_eq!(num.coeffs(), &[rat_int(2), rat_int(1)]);
                assert_eq!(den.coeffs(), &[rat_int(1), rat_int(1)]);
            }
            other => panic!("expected rational scale, got {other:?}"),
        }

        let sys = system_of("while true x = 2*x/(n1 + 1) end", 0).unwrap();
        match sys.update_of(&VarId::program("x")) {
            Update::RationalScale { num, den } => {
                assert_eq!(num.coeffs(), &[rat_int(2)]);
                assert_eq!(den.coeffs(), &[rat_int(1), rat_int(1)]);
            }
            other => panic!("expected rational scale, got {other:?}"),
        }
    }

    #[test]
    fn counter_content_cancels_to_affine() {
        let sys = system_of("while true x = (x*(n1 + 2) + n1 + 2)/(n1 + 2) end", 0).unwrap();
        let (coeffs, c) = affine(&sys, "x");
        assert_eq!(coeffs, vec![("x".into(), rat_int(1))]);
        assert_eq!(c, rat_int(1));
    }

    #[test]
    fn unsupported_updates_name_the_variable() {
        for src in [
            "while true x = x*y end",
            "while true x = x + n1 end",
            "while true x = x*x end",
            "while true x = x*(n1 + 1) + 1 end",
        ] {
            let err = system_of(src, 0).unwrap_err();
            assert_eq!(err.code, DiagnosticCode::UnsupportedUpdate, "{src}");
            assert!(err.message.contains("`x`"), "{src}: {}", err.message);
        }
    }

    #[test]
    fn no_auxiliary_variables_survive() {
        let sys = system_of(SQUARES, 0).unwrap();
        for upd in &sys.updates {
            if let Update::Affine { coeffs, .. } = upd {
                for (w, _) in coeffs {
                    assert_eq!(w.kind, VarKind::Program);
                }
            }
        }
    }

    /// Iterating the simultaneous system must match executing the original
    /// assignment sequence, step for step, in exact arithmetic.
    #[test]
    fn semantic_fidelity_against_sequential_interpretation() {
        let sources = [
            SQUARES,
            "while true v = v + 2; r = r - v end",
            "while true y = y + x; x = 2*x - 1; z = x + y end",
            "while true x = x*(n1 + 2)/(n1 + 1); y = y + 3 end",
            "while true a = a/2 + b; b = b - a end",
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for src in sources {
            let ps = flatten(&parse(src).unwrap());
            let path = &ps.paths[0];
            let sys = extract_recurrences(path, &ps.variables, 1).unwrap();
            for _trial in 0..10 {
                let mut env: BTreeMap<String, Rat> = BTreeMap::new();
                for v in &ps.variables {
                    env.insert(
                        v.name.clone(),
                        rat(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=9)),
                    );
                }
                let mut state: Vec<Rat> =
                    ps.variables.iter().map(|v| env[&v.name].clone()).collect();
                for n in 0..20i64 {
                    // sequential reference semantics
                    let counter = rat_int(n);
                    for (v, e) in path {
                        let looked = env.clone();
                        let value =
                            eval_expr(e, &|name| looked[name].clone(), &counter).unwrap();
                        env.insert(v.name.clone(), value);
                    }
                    // simultaneous step
                    state = sys.step(&state, n).unwrap();
                    for (i, v) in ps.variables.iter().enumerate() {
                        assert_eq!(state[i], env[&v.name], "{src} diverged at step {n} on {}", v.name);
                    }
                }
            }
        }
    }
}
