//! Acceptance suite: one test per shipping criterion, each printing a single
//! `acceptance: ...: pass` line when it holds. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aligator_core::expoly::ExpPoly;
use aligator_core::frontend::{flatten, parse};
use aligator_core::groebner::{buchberger, ideal_equal, intersect, normal_form};
use aligator_core::invariants::{
    base_relations, compose, identity_ideal, invariant_ideal, relation_universe,
};
use aligator_core::pipeline::{run, RunOptions};
use aligator_core::poly::{
    CompiledOrder, Monomial, MonomialOrder, MultiPoly, Universe, VarId, VarKind,
};
use aligator_core::rat::{rat, rat_int, rat_pow, Rat};
use aligator_core::recurrence::{extract_recurrences, RecurrenceSystem, Update};
use aligator_core::solver::closed_forms;
use aligator_core::verify::VerifyOptions;

const SQUARES: &str =
    "while r != 0 if r > 0 r = r - v; v = v + 2 else r = r + u; u = u + 2 end end";

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("benchmark corpus directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "loop"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let src = std::fs::read_to_string(&p).unwrap();
            (name, src)
        })
        .collect()
}

fn analyzed(src: &str) -> (Vec<RecurrenceSystem>, Vec<aligator_core::solver::ClosedFormSystem>, Arc<Universe>) {
    let ps = flatten(&parse(src).unwrap());
    let u = relation_universe(&ps.variables);
    let mut systems = Vec::new();
    let mut forms = Vec::new();
    for (i, path) in ps.paths.iter().enumerate() {
        let sys = extract_recurrences(path, &ps.variables, i + 1).unwrap();
        forms.push(closed_forms(&sys).unwrap());
        systems.push(sys);
    }
    (systems, forms, u)
}

fn var(u: &Arc<Universe>, n: &str) -> MultiPoly {
    MultiPoly::var(u, &VarId::program(n))
}

fn init(u: &Arc<Universe>, n: &str) -> MultiPoly {
    MultiPoly::var(u, &VarId::initial_of(&VarId::program(n)))
}

#[test]
fn published_invariant_ideal_reproduced_quickly() {
    let started = Instant::now();
    let (systems, forms, u) = analyzed(SQUARES);
    let inv = invariant_ideal(&systems, &forms, &u).unwrap();
    // v_0² − u_0² − v² + u² + 4r_0 − 2v_0 + 2u_0 − 4r + 2v − 2u
    let g = init(&u, "v")
        .pow(2)
        .sub(&init(&u, "u").pow(2))
        .sub(&var(&u, "v").pow(2))
        .add(&var(&u, "u").pow(2))
        .add(&init(&u, "r").scale(&rat_int(4)))
        .sub(&init(&u, "v").scale(&rat_int(2)))
        .add(&init(&u, "u").scale(&rat_int(2)))
        .sub(&var(&u, "r").scale(&rat_int(4)))
        .add(&var(&u, "v").scale(&rat_int(2)))
        .sub(&var(&u, "u").scale(&rat_int(2)));
    let expect = buchberger(&u, &[g], MonomialOrder::canonical_lex(&u));
    assert!(ideal_equal(&inv, &expect), "ideal differs from the published generator");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("acceptance: published invariant ideal reproduced in {elapsed:?}: pass");
}

#[test]
fn two_path_closed_forms_are_exact() {
    let (_, forms, _) = analyzed(SQUARES);
    let check = |cfs: &aligator_core::solver::ClosedFormSystem,
                 expected: &[(&str, MultiPoly)]| {
        for (name, poly) in expected {
            let i = cfs
                .variables
                .iter()
                .position(|v| v.name == *name)
                .unwrap_or_else(|| panic!("no form for {name}"));
            let want = ExpPoly::new(&cfs.counter, &cfs.universe, vec![(rat_int(1), poly.clone())]);
            assert_eq!(cfs.forms[i], want, "form for {name} differs");
            assert_eq!(cfs.valid_from[i], 0);
        }
    };

    // path 1: v = 2n1 + v_0, u = u_0, r = −n1² − n1(v_0 − 1) + r_0
    let u1 = Arc::clone(&forms[0].universe);
    let n1 = MultiPoly::var(&u1, &forms[0].counter);
    check(
        &forms[0],
        &[
            ("v", n1.scale(&rat_int(2)).add(&init(&u1, "v"))),
            ("u", init(&u1, "u")),
            (
                "r",
                init(&u1, "r")
                    .sub(&n1.pow(2))
                    .sub(&n1.mul(&init(&u1, "v").sub(&MultiPoly::one(&u1)))),
            ),
        ],
    );

    // path 2: u = 2n2 + u_0, v = v_0, r = n2² + n2(u_0 − 1) + r_0
    let u2 = Arc::clone(&forms[1].universe);
    let n2 = MultiPoly::var(&u2, &forms[1].counter);
    check(
        &forms[1],
        &[
            ("u", n2.scale(&rat_int(2)).add(&init(&u2, "u"))),
            ("v", init(&u2, "v")),
            (
                "r",
                init(&u2, "r")
                    .add(&n2.pow(2))
                    .add(&n2.mul(&init(&u2, "u").sub(&MultiPoly::one(&u2)))),
            ),
        ],
    );
    println!("acceptance: both paths' closed forms match the published example exactly: pass");
}

#[test]
fn corpus_bases_nonempty_within_budget() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 14, "expected the full 14-instance corpus");
    for (name, src) in &corpus {
        let started = Instant::now();
        let report = run(src, &RunOptions::default());
        let elapsed = started.elapsed();
        assert!(
            report.diagnostics.is_empty(),
            "{name}: {:?}",
            report.diagnostics
        );
        assert!(!report.trivial_ideal, "{name}: trivial ideal");
        assert!(!report.invariant_basis.is_empty(), "{name}: empty basis");
        assert!(elapsed < Duration::from_secs(60), "{name}: took {elapsed:?}");
    }
    println!("acceptance: all 14 corpus instances nonempty within 60 s: pass");
}

#[test]
fn corpus_invariants_verify_numerically() {
    for (name, src) in &corpus() {
        let opts = RunOptions { verify: Some(VerifyOptions::default()) };
        let report = run(src, &opts);
        let v = report.verification.unwrap_or_else(|| panic!("{name}: no verification"));
        assert_eq!((v.trials, v.max_steps), (100, 30));
        assert!(v.passed, "{name}: {:?}", v.counterexample);
    }
    println!("acceptance: 100 trials x 30 steps exact verification per instance: pass");
}

// --- algebra property suite -------------------------------------------------

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let mut num = 0i64;
    while num == 0 {
        num = rng.gen_range(-9..=9);
    }
    rat(num, rng.gen_range(1..=4))
}

fn random_poly(rng: &mut ChaCha8Rng, u: &Arc<Universe>) -> MultiPoly {
    let mut p = MultiPoly::zero(u);
    for _ in 0..rng.gen_range(1..=4usize) {
        let mut exps = vec![0u32; u.len()];
        let degree = rng.gen_range(0..=3u32);
        for _ in 0..degree {
            let at = rng.gen_range(0..u.len());
            exps[at] += 1;
        }
        p.add_term(Monomial(exps), random_rat(rng));
    }
    p
}

fn random_ideal(rng: &mut ChaCha8Rng, u: &Arc<Universe>) -> Vec<MultiPoly> {
    let n = rng.gen_range(1..=4usize);
    (0..n).map(|_| random_poly(rng, u)).filter(|p| !p.is_zero()).collect()
}

fn s_polynomial(f: &MultiPoly, g: &MultiPoly, ord: &CompiledOrder) -> MultiPoly {
    let (mf, cf) = f.leading(ord);
    let (mg, cg) = g.leading(ord);
    let lcm: Vec<u32> = mf.0.iter().zip(&mg.0).map(|(a, b)| *a.max(b)).collect();
    let df = Monomial(lcm.iter().zip(&mf.0).map(|(l, e)| l - e).collect());
    let dg = Monomial(lcm.iter().zip(&mg.0).map(|(l, e)| l - e).collect());
    f.mul_term(&df, &(Rat::one() / cf)).sub(&g.mul_term(&dg, &(Rat::one() / cg)))
}

#[test]
fn algebra_property_suite() {
    let vars = vec![VarId::program("x"), VarId::program("y")];
    let u = relation_universe(&vars); // x, y, x_0, y_0
    // degrevlex: random draws routinely give zero-dimensional cubic systems,
    // whose lex bases carry shape polynomials of Bezout degree (up to 81)
    let order = MonomialOrder::canonical_degrevlex(&u);
    let compiled = order.compile(&u);
    let id = identity_ideal(&u);
    let mut rng = ChaCha8Rng::seed_from_u64(414243);

    // ideal equality by mutual containment against degrevlex bases, instead
    // of comparing lex canonical forms
    let same_ideal = |a: &[MultiPoly], b: &[MultiPoly]| -> bool {
        let ga = buchberger(&u, a, order.clone());
        let gb = buchberger(&u, b, order.clone());
        a.iter().all(|p| normal_form(p, &gb.generators, &order).is_zero())
            && b.iter().all(|p| normal_form(p, &ga.generators, &order).is_zero())
    };

    for round in 0..200 {
        let gens = random_ideal(&mut rng, &u);
        if gens.is_empty() {
            continue;
        }
        let gb = buchberger(&u, &gens, order.clone());

        // (a) every S-polynomial of the reduced basis reduces to zero
        for i in 0..gb.generators.len() {
            for j in i + 1..gb.generators.len() {
                let s = s_polynomial(&gb.generators[i], &gb.generators[j], &compiled);
                assert!(
                    normal_form(&s, &gb.generators, &order).is_zero(),
                    "S-polynomial survived at round {round}"
                );
            }
        }

        // (b) the reduced basis ignores generator order
        let mut shuffled = gens.clone();
        shuffled.shuffle(&mut rng);
        let gb2 = buchberger(&u, &shuffled, order.clone());
        assert_eq!(gb.generators, gb2.generators, "permutation changed the basis");

        // (c) intersection is idempotent and identity is neutral for composition
        let ii = intersect(&gb, &gb);
        assert!(same_ideal(&ii.generators, &gb.generators), "I ∩ I ≠ I at round {round}");
        let cj = compose(&id, &gb, 1);
        assert!(same_ideal(&cj.generators, &gb.generators), "compose(id, J) ≠ J at round {round}");
    }
    println!("acceptance: algebra property suite over 200 random ideals: pass");
}

// --- recurrence oracle -------------------------------------------------------

type Mat = Vec<Vec<Rat>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += &a[i][k] * &bk[j];
            }
        }
    }
    out
}

/// Inverse of an integer matrix with determinant ±1, via the adjugate.
fn mat_inv_unimodular(m: &Mat) -> Mat {
    let n = m.len();
    let d = det(m);
    assert!(d.abs() == Rat::one());
    let mut adj = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Mat = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { rat_int(1) } else { rat_int(-1) };
            adj[j][i] = sign * det(&minor) / d.clone();
        }
    }
    adj
}

fn det(m: &Mat) -> Rat {
    match m.len() {
        0 => Rat::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        3 => {
            &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
        }
        _ => unreachable!("oracle systems stay at ≤ 3 variables"),
    }
}

/// Random similarity transform of a triangular matrix: rational spectrum by
/// construction, dense coefficients by conjugation.
fn random_affine_system(
    rng: &mut ChaCha8Rng,
    eigenvalues: &[Rat],
) -> RecurrenceSystem {
    let n = rng.gen_range(1..=3usize);
    let mut t = vec![vec![Rat::zero(); n]; n];
    for (i, row) in t.iter_mut().enumerate() {
        row[i] = eigenvalues[rng.gen_range(0..eigenvalues.len())].clone();
        for item in row.iter_mut().take(n).skip(i + 1) {
            if rng.gen_bool(0.6) {
                *item = rat_int(rng.gen_range(-3..=3));
            }
        }
    }
    let mut unimod: Mat = (0..n)
        .map(|i| (0..n).map(|j| rat_int((i == j) as i64)).collect())
        .collect();
    for _ in 0..rng.gen_range(0..=6usize) {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let f = rat_int(if rng.gen_bool(0.5) { 1 } else { -1 });
        for c in 0..n {
            let add = &f * &unimod[j][c];
            unimod[i][c] += add;
        }
    }
    let m = mat_mul(&mat_mul(&unimod, &t), &mat_inv_unimodular(&unimod));

    let names = ["x", "y", "z"];
    let variables: Vec<VarId> = names[..n].iter().map(|s| VarId::program(*s)).collect();
    let updates: Vec<Update> = (0..n)
        .map(|i| Update::Affine {
            coeffs: variables
                .iter()
                .zip(&m[i])
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (v.clone(), c.clone()))
                .collect(),
            constant: if rng.gen_bool(0.5) { random_rat(rng) } else { Rat::zero() },
        })
        .collect();
    RecurrenceSystem {
        counter: VarId::new("n1", VarKind::Counter),
        variables,
        updates,
    }
}

fn check_forms_against_unrolling(sys: &RecurrenceSystem, rng: &mut ChaCha8Rng, tag: &str) {
    let cfs = closed_forms(sys).unwrap_or_else(|e| panic!("{tag}: solver failed: {e:?}"));
    for _ in 0..2 {
        let initials: Vec<Rat> = sys.variables.iter().map(|_| random_rat(rng)).collect();
        let bind = |w: &VarId| -> Rat {
            let stem = w.name.strip_suffix("_0").expect("initial variable");
            let i = sys.variables.iter().position(|v| v.name == stem).unwrap();
            initials[i].clone()
        };
        let mut state = initials.clone();
        for n in 0..=25u64 {
            for (i, v) in cfs.variables.iter().enumerate() {
                if n < cfs.valid_from[i] {
                    continue;
                }
                let got = cfs.forms[i].eval_num(&bind, n);
                let j = sys.variables.iter().position(|w| w == v).unwrap();
                assert_eq!(got, state[j], "{tag}: {} at n = {n}", v.name);
            }
            state = sys.step(&state, n as i64).expect("affine step");
        }
    }
}

#[test]
fn cfinite_closed_forms_match_unrolling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let nonzero: Vec<Rat> = vec![
        rat_int(1),
        rat_int(2),
        rat_int(3),
        rat_int(-1),
        rat_int(-2),
        rat(1, 2),
        rat(-1, 3),
        rat(5, 3),
        rat_int(4),
    ];
    for k in 0..200 {
        let sys = random_affine_system(&mut rng, &nonzero);
        check_forms_against_unrolling(&sys, &mut rng, &format!("system {k}"));
    }
    // resets: zero eigenvalues force shifted forms, exact from their shift on
    let with_zero: Vec<Rat> = vec![Rat::zero(), rat_int(1), rat_int(2), rat(1, 2)];
    for k in 0..30 {
        let sys = random_affine_system(&mut rng, &with_zero);
        check_forms_against_unrolling(&sys, &mut rng, &format!("zero-root system {k}"));
    }
    println!("acceptance: 230 random affine systems match exact unrolling to n = 25: pass");
}

// --- base-relation completeness ----------------------------------------------

fn grid() -> Vec<Rat> {
    let mut out = Vec::new();
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            for c in -3i64..=3 {
                let v = rat_pow(&rat_int(2), a) * rat_pow(&rat_int(3), b) * rat_pow(&rat_int(5), c);
                out.push(v.clone());
                out.push(-v);
            }
        }
    }
    out
}

fn relation_holds(bases: &[Rat], z: &[i64]) -> bool {
    let mut acc = Rat::one();
    for (theta, &e) in bases.iter().zip(z) {
        acc *= rat_pow(theta, e);
    }
    acc.is_one()
}

fn binomial(u: &Arc<Universe>, z: &[i64]) -> MultiPoly {
    let pos = Monomial(z.iter().map(|&e| e.max(0) as u32).collect());
    let neg = Monomial(z.iter().map(|&e| (-e).max(0) as u32).collect());
    let mut p = MultiPoly::zero(u);
    p.add_term(pos, rat_int(1));
    p.add_term(neg, rat_int(-1));
    p
}

fn check_triple(bases: &[Rat]) {
    let ts: Vec<VarId> = (1..=3).map(|i| VarId::new(format!("t{i}"), VarKind::BaseSequence)).collect();
    let u = Universe::new(ts.clone());
    let rels = base_relations(bases, &ts, &u);
    let gb = buchberger(&u, &rels, MonomialOrder::canonical_lex(&u));
    for z1 in -3i64..=3 {
        for z2 in -3i64..=3 {
            for z3 in -3i64..=3 {
                let z = [z1, z2, z3];
                if z == [0, 0, 0] {
                    continue;
                }
                let holds = relation_holds(bases, &z);
                let member = if gb.generators.is_empty() {
                    false
                } else {
                    gb.contains(&binomial(&u, &z))
                };
                assert_eq!(
                    member, holds,
                    "bases {bases:?}, vector {z:?}: lattice {} the numeric relation",
                    if holds { "missed" } else { "invented" }
                );
            }
        }
    }
}

#[test]
fn base_relation_lattice_is_complete_on_the_grid() {
    // exhaustive on a structured subgrid
    let small: Vec<Rat> = vec![
        rat_int(2),
        rat_int(3),
        rat_int(5),
        rat(1, 2),
        rat(1, 3),
        rat(1, 5),
        rat_int(-2),
        rat_int(-3),
        rat_int(6),
        rat_int(10),
    ];
    let mut triples = 0usize;
    for a in &small {
        for b in &small {
            for c in &small {
                check_triple(&[a.clone(), b.clone(), c.clone()]);
                triples += 1;
            }
        }
    }
    // seeded sample of the full ±2^a·3^b·5^c grid, |a|,|b|,|c| ≤ 3
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for _ in 0..400 {
        let pick: Vec<Rat> =
            (0..3).map(|_| grid[rng.gen_range(0..grid.len())].clone()).collect();
        check_triple(&pick);
        triples += 1;
    }
    println!("acceptance: base-relation lattice complete on {triples} grid triples: pass");
}
