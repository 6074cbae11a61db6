//! Randomized numeric cross-check: interpret the original loop on random
//! rational inputs with random branch choices and confirm that every reported
//! invariant evaluates to zero at every step.
//!
//! Counter references (`n1`, ...) in update expressions denote the number of
//! immediately preceding consecutive iterations that took the same branch
//! combination, matching the per-path recurrence indexing: the counter reads
//! 0 on the first iteration of a run and resets whenever the branch pattern
//! changes.

use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::{eval_expr, LoopAst, Stmt};
use crate::poly::{MultiPoly, VarId, VarKind};
use crate::rat::{rat, rat_int, rat_str, Rat};

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub trials: u64,
    pub max_steps: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { trials: 100, max_steps: 30, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub trials: u64,
    pub max_steps: u64,
    pub passed: bool,
    pub counterexample: Option<String>,
}

/// Run `trials` random executions of `max_steps` iterations each and check
/// the invariants exactly (no rounding). Returns the first counterexample
/// found, if any.
pub fn verify_numeric(
    ast: &LoopAst,
    variables: &[VarId],
    invariants: &[MultiPoly],
    opts: &VerifyOptions,
) -> VerifyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for trial in 0..opts.trials {
        let mut state: HashMap<String, Rat> = HashMap::new();
        for v in variables {
            state.insert(
                v.name.clone(),
                rat(rng.gen_range(-9i64..=9), rng.gen_range(1i64..=9)),
            );
        }
        let initial = state.clone();
        let mut prev_choices: Option<Vec<bool>> = None;
        let mut streak: u64 = 0;
        for step in 0..=opts.max_steps {
            if let Some(detail) = first_violation(invariants, &state, &initial) {
                return VerifyOutcome {
                    trials: opts.trials,
                    max_steps: opts.max_steps,
                    passed: false,
                    counterexample: Some(format!("trial {trial}, step {step}: {detail}")),
                };
            }
            if step == opts.max_steps {
                break;
            }
            let mut choices = Vec::new();
            draw_choices(&ast.body, &mut rng, &mut choices);
            let counter =
                if prev_choices.as_ref() == Some(&choices) { streak } else { 0 };
            let counter_rat = rat_int(counter as i64);
            let mut idx = 0;
            if let Err(detail) =
                exec_stmts(&ast.body, &choices, &mut idx, &mut state, &counter_rat)
            {
                return VerifyOutcome {
                    trials: opts.trials,
                    max_steps: opts.max_steps,
                    passed: false,
                    counterexample: Some(format!("trial {trial}, step {step}: {detail}")),
                };
            }
            streak = counter + 1;
            prev_choices = Some(choices);
        }
    }
    VerifyOutcome {
        trials: opts.trials,
        max_steps: opts.max_steps,
        passed: true,
        counterexample: None,
    }
}

/// Pre-draw the branch decisions for one iteration; guards are opaque, every
/// reachable `if` flips a fair coin.
fn draw_choices(stmts: &[Stmt], rng: &mut ChaCha8Rng, out: &mut Vec<bool>) {
    for s in stmts {
        if let Stmt::If { then_body, else_body, .. } = s {
            let c: bool = rng.gen();
            out.push(c);
            draw_choices(if c { then_body } else { else_body }, rng, out);
        }
    }
}

fn exec_stmts(
    stmts: &[Stmt],
    choices: &[bool],
    idx: &mut usize,
    state: &mut HashMap<String, Rat>,
    counter: &Rat,
) -> Result<(), String> {
    for s in stmts {
        match s {
            Stmt::Assign { var, rhs } => {
                let value = eval_expr(rhs, &|name| state[name].clone(), counter)
                    .ok_or_else(|| format!("division by zero updating `{var}`"))?;
                state.insert(var.clone(), value);
            }
            Stmt::If { then_body, else_body, .. } => {
                let c = choices[*idx];
                *idx += 1;
                exec_stmts(if c { then_body } else { else_body }, choices, idx, state, counter)?;
            }
        }
    }
    Ok(())
}

fn first_violation(
    invariants: &[MultiPoly],
    state: &HashMap<String, Rat>,
    initial: &HashMap<String, Rat>,
) -> Option<String> {
    for g in invariants {
        let val = g.eval(&|v: &VarId| match v.kind {
            VarKind::Program => state[&v.name].clone(),
            VarKind::Initial => {
                let stem = v.name.strip_suffix("_0").expect("initial variable name");
                initial[stem].clone()
            }
            _ => unreachable!("invariants mention only program and initial variables"),
        });
        if !val.is_zero() {
            return Some(format!("{} evaluates to {}", g.canonical_string(), rat_str(&val)));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{flatten, parse};
    use crate::invariants::{invariant_ideal, relation_universe};
    use crate::recurrence::extract_recurrences;
    use crate::solver::closed_forms;

    const SQUARES: &str =
        "while true if true r = r - v; v = v + 2 else r = r + u; u = u + 2 end end";

    fn full_invariants(src: &str) -> (LoopAst, Vec<VarId>, Vec<MultiPoly>) {
        let ast = parse(src).unwrap();
        let ps = flatten(&ast);
        let u = relation_universe(&ps.variables);
        let mut systems = Vec::new();
        let mut forms = Vec::new();
        for (i, path) in ps.paths.iter().enumerate() {
            let sys = extract_recurrences(path, &ps.variables, i + 1).unwrap();
            forms.push(closed_forms(&sys).unwrap());
            systems.push(sys);
        }
        let inv = invariant_ideal(&systems, &forms, &u).unwrap();
        (ast, ps.variables, inv.generators)
    }

    #[test]
    fn squares_invariants_verify() {
        let (ast, vars, gens) = full_invariants(SQUARES);
        assert!(!gens.is_empty());
        let out = verify_numeric(&ast, &vars, &gens, &VerifyOptions::default());
        assert!(out.passed, "{:?}", out.counterexample);
    }

    #[test]
    fn planted_false_invariant_is_caught() {
        let (ast, vars, _) = full_invariants(SQUARES);
        let u = relation_universe(&vars);
        // claim r stays put: false on every path
        let bogus = MultiPoly::var(&u, &VarId::program("r"))
            .sub(&MultiPoly::var(&u, &VarId::initial_of(&VarId::program("r"))));
        let out = verify_numeric(&ast, &vars, &[bogus], &VerifyOptions::default());
        assert!(!out.passed);
        let cx = out.counterexample.unwrap();
        assert!(cx.contains("evaluates to"), "{cx}");
    }

    #[test]
    fn counter_reference_sees_run_position() {
        // x scales by (n+2)/(n+1) with n the per-run counter; alongside the
        // step count y, x = x_0·(y − y_0 + 1) is invariant, and only the
        // run-position counter semantics makes it hold
        let (ast, vars, gens) =
            full_invariants("while true x = x*(n1 + 2)/(n1 + 1); y = y + 1 end");
        assert!(!gens.is_empty());
        let out = verify_numeric(&ast, &vars, &gens, &VerifyOptions::default());
        assert!(out.passed, "{:?}", out.counterexample);
    }

    #[test]
    fn deterministic_given_seed() {
        let (ast, vars, gens) = full_invariants(SQUARES);
        let a = verify_numeric(&ast, &vars, &gens, &VerifyOptions { trials: 7, max_steps: 9, seed: 5 });
        let b = verify_numeric(&ast, &vars, &gens, &VerifyOptions { trials: 7, max_steps: 9, seed: 5 });
        assert_eq!(a.passed, b.passed);
        assert_eq!(a.counterexample, b.counterexample);
        // a planted failure reproduces the same counterexample string
        let u = relation_universe(&vars);
        let bogus = MultiPoly::var(&u, &VarId::program("v"))
            .sub(&MultiPoly::var(&u, &VarId::initial_of(&VarId::program("v"))));
        let c1 = verify_numeric(&ast, &vars, &[bogus.clone()], &VerifyOptions::default());
        let c2 = verify_numeric(&ast, &vars, &[bogus], &VerifyOptions::default());
        assert_eq!(c1.counterexample, c2.counterexample);
        assert!(!c1.passed);
    }

    #[test]
    fn zero_invariants_trivially_pass() {
        let ast = parse("while true x = 2*x end").unwrap();
        let ps = flatten(&ast);
        let out = verify_numeric(&ast, &ps.variables, &[], &VerifyOptions::default());
        assert!(out.passed);
    }
}
