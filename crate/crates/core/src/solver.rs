//! Closed forms for the per-path recurrence systems.
//!
//! Pipeline inside one path: order the variables into dependency blocks
//! (strongly connected components of the read graph), then solve each block
//! in order. Mutually dependent affine blocks are uncoupled through the
//! characteristic polynomial of the block matrix (Cayley–Hamilton): every
//! block variable satisfies the same scalar C-finite recurrence, with the
//! inhomogeneity folded from already-solved inputs. Rational-scale updates
//! `v := v·ρ(n)` are solved by telescoping the running product.
//!
//! A characteristic root 0 (e.g. `v := 0` or `v := w`) makes the solution
//! exponential-polynomial only from some step S ≥ 1 onward. Each form
//! carries that threshold (`valid_from`); the first S values are plain
//! polynomials in the initials, obtained by unrolling, and the invariant
//! construction accounts for them separately.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Diagnostic, DiagnosticCode};
use crate::expoly::ExpPoly;
use crate::poly::{MultiPoly, Universe, VarId};
use crate::rat::{is_nonneg_integer, rat_int, rat_pow, Rat};
use crate::recurrence::{RecurrenceSystem, Update};
use crate::roots::{rational_roots, UniPoly};

/// Closed forms for every variable of one path.
#[derive(Clone, Debug)]
pub struct ClosedFormSystem {
    pub counter: VarId,
    /// Universe of the coefficient polynomials: initials plus the counter.
    pub universe: Arc<Universe>,
    /// Program variables, in recurrence-system order; `forms` and
    /// `valid_from` are parallel.
    pub variables: Vec<VarId>,
    pub forms: Vec<ExpPoly>,
    /// First n from which forms[i] matches the exact iteration. 0 except for
    /// variables affected by characteristic root 0.
    pub valid_from: Vec<u64>,
    /// All distinct bases θ ≠ 1 across the forms, ascending.
    pub bases: Vec<Rat>,
    /// Variable indices in the order the blocks were solved.
    pub order: Vec<usize>,
}

impl ClosedFormSystem {
    pub fn form_of(&self, v: &VarId) -> &ExpPoly {
        let i = self.variables.iter().position(|w| w == v).expect("unknown variable");
        &self.forms[i]
    }

    pub fn valid_from_of(&self, v: &VarId) -> u64 {
        let i = self.variables.iter().position(|w| w == v).expect("unknown variable");
        self.valid_from[i]
    }

    /// `v(n1) = ...` lines in solve order.
    pub fn rendered(&self) -> Vec<String> {
        self.order
            .iter()
            .map(|&i| {
                format!(
                    "{}({}) = {}",
                    self.variables[i].name,
                    self.counter.name,
                    self.forms[i].render()
                )
            })
            .collect()
    }
}

/// Universe the coefficient polynomials live in: one initial per variable,
/// plus the counter.
pub fn solve_universe(sys: &RecurrenceSystem) -> Arc<Universe> {
    let mut vars: Vec<VarId> = sys.variables.iter().map(VarId::initial_of).collect();
    vars.push(sys.counter.clone());
    Universe::new(vars)
}

// ---------------------------------------------------------------------------
// Dependency blocks
// ---------------------------------------------------------------------------

/// Strongly connected components of the variable read graph, ordered so that
/// every block comes after the blocks it reads, layer by layer; within a
/// layer, blocks keep variable order. Block members are in variable order.
pub fn dependency_blocks(sys: &RecurrenceSystem) -> Vec<Vec<usize>> {
    let m = sys.variables.len();
    let reads: Vec<Vec<usize>> = sys
        .variables
        .iter()
        .zip(&sys.updates)
        .map(|(v, upd)| {
            upd.reads(v)
                .iter()
                .map(|w| sys.variables.iter().position(|x| x == w).unwrap())
                .collect()
        })
        .collect();

    let comps = tarjan(m, &reads);
    let mut comp_of = vec![0usize; m];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    // component dependencies (ignoring self-edges)
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for v in 0..m {
        for &w in &reads[v] {
            if comp_of[v] != comp_of[w] && !deps[comp_of[v]].contains(&comp_of[w]) {
                deps[comp_of[v]].push(comp_of[w]);
            }
        }
    }
    // layer = longest dependency chain below
    let mut layer = vec![usize::MAX; comps.len()];
    fn layer_of(c: usize, deps: &[Vec<usize>], layer: &mut [usize]) -> usize {
        if layer[c] != usize::MAX {
            return layer[c];
        }
        let l = deps[c]
            .iter()
            .map(|&d| layer_of(d, deps, layer) + 1)
            .max()
            .unwrap_or(0);
        layer[c] = l;
        l
    }
    for c in 0..comps.len() {
        layer_of(c, &deps, &mut layer);
    }
    let mut blocks: Vec<Vec<usize>> = comps
        .into_iter()
        .map(|mut b| {
            b.sort_unstable();
            b
        })
        .collect();
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by_key(|&c| (layer[c], blocks[c][0]));
    order.into_iter().map(|c| std::mem::take(&mut blocks[c])).collect()
}

fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn strong(v: usize, st: &mut St) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        let neighbors = st.adj[v].clone();
        for w in neighbors {
            if st.index[w].is_none() {
                strong(w, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.index[w].unwrap());
            }
        }
        if st.low[v] == st.index[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            st.out.push(comp);
        }
    }
    let mut st = St {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            strong(v, &mut st);
        }
    }
    st.out
}

// ---------------------------------------------------------------------------
// Exact linear algebra over Q (with polynomial right-hand sides)
// ---------------------------------------------------------------------------

type Mat = Vec<Vec<Rat>>;

/// Solve M·x = rhs for a provably invertible square M. Panics on a singular
/// matrix: that would mean a broken solver invariant, not bad input.
fn solve_linear(mut m: Mat, mut rhs: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let n = m.len();
    assert_eq!(rhs.len(), n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("singular linear system in recurrence solver");
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = m[col][col].recip();
        for c in col..n {
            m[col][c] = &m[col][c] * &inv;
        }
        rhs[col] = rhs[col].scale(&inv);
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..n {
                let t = &m[col][c] * &f;
                m[r][c] = &m[r][c] - t;
            }
            rhs[r] = rhs[r].sub(&rhs[col].scale(&f));
        }
    }
    rhs
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = &a[i][k] * &b[k][j];
                out[i][j] += t;
            }
        }
    }
    out
}

fn mat_identity(n: usize) -> Mat {
    let mut out = vec![vec![Rat::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = rat_int(1);
    }
    out
}

fn trace(a: &Mat) -> Rat {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

/// Monic characteristic polynomial det(xI − A) by Faddeev–LeVerrier.
fn char_poly(a: &Mat) -> UniPoly {
    let s = a.len();
    let mut coeffs = vec![Rat::zero(); s + 1];
    coeffs[s] = rat_int(1);
    let mut m = a.clone();
    for k in 1..=s {
        let ck = -trace(&m) / rat_int(k as i64);
        coeffs[s - k] = ck.clone();
        if k < s {
            let mut shifted = m.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] = &row[i] + &ck;
            }
            m = mat_mul(a, &shifted);
        }
    }
    UniPoly::new(coeffs)
}

fn binom(i: u64, t: u64) -> Rat {
    if t > i {
        return Rat::zero();
    }
    let mut acc = rat_int(1);
    for z in 1..=t {
        acc = acc * rat_int((i - t + z) as i64) / rat_int(z as i64);
    }
    acc
}

// ---------------------------------------------------------------------------
// The scalar solver
// ---------------------------------------------------------------------------

/// Solve Σ_j ψ_j z(n+j) = inhom(n) for all n ≥ 0, where ψ is monic with
/// ψ(0) ≠ 0 and `roots` is its full rational root list. `initials` are
/// z(0), ..., z(d'−1).
fn solve_by_roots(
    psi: &UniPoly,
    roots: &[(Rat, usize)],
    inhom: &ExpPoly,
    initials: &[MultiPoly],
) -> ExpPoly {
    let counter = inhom.counter().clone();
    let universe = inhom.universe().clone();
    let d = psi.degree();
    assert_eq!(initials.len(), d);
    assert_eq!(roots.iter().map(|(_, m)| m).sum::<usize>(), d, "psi must split");
    if d == 0 {
        return inhom.clone();
    }

    // Particular solution, base by base: ansatz n^m · Σ b_i n^i with
    // m = multiplicity of the base among the roots. The linear map on the
    // b_i is triangular with nonzero diagonal, hence uniquely solvable.
    let mut particular_parts: Vec<(Rat, MultiPoly)> = Vec::new();
    for (theta, q) in inhom.terms() {
        let m = roots
            .iter()
            .find(|(r, _)| r == theta)
            .map(|(_, mult)| *mult as u64)
            .unwrap_or(0);
        let e = q.degree_in(&counter) as u64;
        let mut mat = vec![vec![Rat::zero(); (e + 1) as usize]; (e + 1) as usize];
        for i in 0..=e {
            // L[n^(m+i) θ^n] / θ^n = Σ_j ψ_j θ^j (n+j)^(m+i), expanded in n
            for t in 0..=e {
                if t > m + i {
                    continue;
                }
                let mut acc = Rat::zero();
                for (j, psi_j) in psi.coeffs().iter().enumerate() {
                    if psi_j.is_zero() {
                        continue;
                    }
                    let p = m + i - t;
                    let jp = if p == 0 { rat_int(1) } else { rat_pow(&rat_int(j as i64), p as i64) };
                    acc += psi_j * rat_pow(theta, j as i64) * binom(m + i, t) * jp;
                }
                mat[t as usize][i as usize] = acc;
            }
        }
        let rhs: Vec<MultiPoly> =
            (0..=e).map(|t| q.coeff_of_power(&counter, t as u32)).collect();
        let b = solve_linear(mat, rhs);
        let nvar = MultiPoly::var(&universe, &counter);
        let mut coeff = MultiPoly::zero(&universe);
        for (i, bi) in b.iter().enumerate() {
            coeff = coeff.add(&bi.mul(&nvar.pow(m as u32 + i as u32)));
        }
        particular_parts.push((theta.clone(), coeff));
    }
    let particular = ExpPoly::new(&counter, &universe, particular_parts);

    // Homogeneous completion: match the residual initial values with the
    // Casorati system over the root basis n^i β^n.
    let mut basis: Vec<(Rat, u64)> = Vec::new();
    for (beta, mult) in roots {
        for i in 0..*mult {
            basis.push((beta.clone(), i as u64));
        }
    }
    let mut mat = vec![vec![Rat::zero(); d]; d];
    let mut rhs = Vec::with_capacity(d);
    for t in 0..d {
        for (c, (beta, i)) in basis.iter().enumerate() {
            let ti = if *i == 0 { rat_int(1) } else { rat_pow(&rat_int(t as i64), *i as i64) };
            mat[t][c] = ti * rat_pow(beta, t as i64);
        }
        rhs.push(initials[t].sub(&particular.eval_at_int(t as u64)));
    }
    let a = solve_linear(mat, rhs);
    let nvar = MultiPoly::var(&universe, &counter);
    let mut hom_parts: Vec<(Rat, MultiPoly)> = Vec::new();
    for (c, (beta, i)) in basis.iter().enumerate() {
        if a[c].is_zero() {
            continue;
        }
        hom_parts.push((beta.clone(), a[c].mul(&nvar.pow(*i as u32))));
    }
    let homogeneous = ExpPoly::new(&counter, &universe, hom_parts);
    particular.add(&homogeneous)
}

/// Solve y(n+d) = a_{d−1} y(n+d−1) + … + a_0 y(n) + inhom(n) with
/// coeffs = [a_0, …, a_{d−1}] and symbolic initial values y(0), …, y(d−1).
///
/// When the characteristic polynomial has 0 as a root of multiplicity μ the
/// returned form is valid from n = μ on (such sequences are not exponential
/// polynomials at the first μ points in general).
pub fn solve_cfinite(
    coeffs: &[Rat],
    inhom: &ExpPoly,
    initials: &[MultiPoly],
) -> Result<ExpPoly, Diagnostic> {
    let d = coeffs.len();
    assert!(d >= 1, "order-0 recurrence");
    assert_eq!(initials.len(), d);
    let mut chi = vec![Rat::zero(); d + 1];
    for (k, a) in coeffs.iter().enumerate() {
        chi[k] = -a.clone();
    }
    chi[d] = rat_int(1);
    let chi = UniPoly::new(chi);
    let (roots, cofactor) = rational_roots(&chi);
    if cofactor.degree() > 0 {
        return Err(Diagnostic::new(
            DiagnosticCode::IrrationalRoots,
            "characteristic polynomial does not split over the rationals".to_string(),
        ));
    }
    let mu = roots
        .iter()
        .find(|(r, _)| r.is_zero())
        .map(|(_, m)| *m)
        .unwrap_or(0);
    let psi = UniPoly::new(chi.coeffs()[mu..].to_vec());
    let psi_roots: Vec<(Rat, usize)> =
        roots.iter().filter(|(r, _)| !r.is_zero()).cloned().collect();
    let z = solve_by_roots(&psi, &psi_roots, inhom, &initials[mu..]);
    Ok(z.shift(-(mu as i64)))
}

// ---------------------------------------------------------------------------
// Symbolic summation
// ---------------------------------------------------------------------------

/// S with S(n) = Σ_{k=0}^{n−1} e(k): base 1 by polynomial antidifference,
/// every base θ ≠ 1 by the ansatz q̃(n)θ^n + constant.
pub fn sum_exp_poly(e: &ExpPoly) -> ExpPoly {
    let counter = e.counter().clone();
    let universe = e.universe().clone();
    let one = rat_int(1);
    let mut parts: Vec<(Rat, MultiPoly)> = Vec::new();
    for (theta, q) in e.terms() {
        let deg = q.degree_in(&counter) as u64;
        let nvar = MultiPoly::var(&universe, &counter);
        if *theta == one {
            // Q(n+1) − Q(n) = q(n), Q(0) = 0; unknowns b_1..b_{deg+1}
            let n_unk = (deg + 1) as usize;
            let mut mat = vec![vec![Rat::zero(); n_unk]; n_unk];
            for i in 1..=deg + 1 {
                for t in 0..=deg {
                    let mut c = binom(i, t);
                    if t == i {
                        c -= rat_int(1);
                    }
                    mat[t as usize][(i - 1) as usize] = c;
                }
            }
            let rhs: Vec<MultiPoly> =
                (0..=deg).map(|t| q.coeff_of_power(&counter, t as u32)).collect();
            let b = solve_linear(mat, rhs);
            let mut acc = MultiPoly::zero(&universe);
            for (i, bi) in b.iter().enumerate() {
                acc = acc.add(&bi.mul(&nvar.pow(i as u32 + 1)));
            }
            parts.push((one.clone(), acc));
        } else {
            // θ·q̃(n+1) − q̃(n) = q(n)
            let n_unk = (deg + 1) as usize;
            let mut mat = vec![vec![Rat::zero(); n_unk]; n_unk];
            for i in 0..=deg {
                for t in 0..=deg {
                    let mut c = theta * binom(i, t);
                    if t == i {
                        c -= rat_int(1);
                    }
                    mat[t as usize][i as usize] = c;
                }
            }
            let rhs: Vec<MultiPoly> =
                (0..=deg).map(|t| q.coeff_of_power(&counter, t as u32)).collect();
            let b = solve_linear(mat, rhs);
            let mut acc = MultiPoly::zero(&universe);
            for (i, bi) in b.iter().enumerate() {
                acc = acc.add(&bi.mul(&nvar.pow(i as u32)));
            }
            // S(0) = 0 fixes the additive constant to −q̃(0)
            parts.push((one.clone(), b[0].neg()));
            parts.push((theta.clone(), acc));
        }
    }
    ExpPoly::new(&counter, &universe, parts)
}

// ---------------------------------------------------------------------------
// Rational-scale telescoping
// ---------------------------------------------------------------------------

/// Solve v(n+1) = v(n)·num(n)/den(n): the running product must telescope to
/// c^n·u(n)/u(0) for a constant c and polynomial u, found by pairing each
/// denominator root with a numerator root shifted down by at most 4 (and
/// matching non-splitting cofactors up to the same shift).
pub fn solve_rational_scale(
    v: &VarId,
    num: &UniPoly,
    den: &UniPoly,
    counter: &VarId,
    universe: &Arc<Universe>,
) -> Result<ExpPoly, Diagnostic> {
    assert!(!num.is_zero() && !den.is_zero());
    let g = UniPoly::gcd(num, den);
    let (num, _) = num.divrem(&g);
    let (den, _) = den.divrem(&g);

    let nontel = |msg: String| Diagnostic::new(DiagnosticCode::NonTelescoping, msg);

    let (den_roots, den_cof) = rational_roots(&den.monic());
    for (r, _) in &den_roots {
        if is_nonneg_integer(r) {
            return Err(nontel(format!(
                "the ratio for `{}` has a denominator vanishing at n = {}",
                v.name, r
            )));
        }
    }
    if num.degree() != den.degree() {
        return Err(nontel(format!(
            "the running product for `{}` is not an exponential polynomial \
             (numerator and denominator of the ratio have different degrees)",
            v.name
        )));
    }
    let c = num.leading() / den.leading();
    let (num_roots, num_cof) = rational_roots(&num.monic());

    // non-splitting cofactors must cancel directly or after a shift
    let mut u = UniPoly::one();
    if num_cof != den_cof {
        let mut matched = false;
        for j in 1..=4i64 {
            if num_cof == den_cof.shift(&rat_int(j)) {
                for i in 0..j {
                    u = u.mul(&den_cof.shift(&rat_int(i)));
                }
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(nontel(format!(
                "the ratio for `{}` has non-telescoping irrational factors",
                v.name
            )));
        }
    }

    // root multiset matching with shifts 0..=4
    let mut nm: BTreeMap<Rat, usize> = BTreeMap::new();
    for (r, m) in num_roots {
        *nm.entry(r).or_insert(0) += m;
    }
    let mut dm: BTreeMap<Rat, usize> = BTreeMap::new();
    for (r, m) in den_roots {
        *dm.entry(r).or_insert(0) += m;
    }
    let mut u_roots = Vec::new();
    if !match_roots(&mut nm, &mut dm, &mut u_roots) {
        return Err(nontel(format!(
            "no shift pattern telescopes the ratio for `{}`",
            v.name
        )));
    }
    for r in u_roots {
        u = u.mul(&UniPoly::new(vec![-r, rat_int(1)]));
    }

    let u0 = u.eval(&Rat::zero());
    assert!(!u0.is_zero(), "telescoping factor must not vanish at 0");
    // v(n) = v_0 · c^n · u(n)/u(0)
    let v0 = MultiPoly::var(universe, &VarId::initial_of(v));
    let nvar = MultiPoly::var(universe, counter);
    let mut upoly = MultiPoly::zero(universe);
    for (k, ck) in u.coeffs().iter().enumerate() {
        if ck.is_zero() {
            continue;
        }
        upoly = upoly.add(&nvar.pow(k as u32).scale(ck));
    }
    let coeff = v0.mul(&upoly).scale(&u0.recip());
    Ok(ExpPoly::new(counter, universe, vec![(c, coeff)]))
}

/// Pair every denominator root b with a numerator root b − k (k ≤ 4);
/// each pairing contributes the chain b, b−1, …, b−k+1 to u's roots.
fn match_roots(
    num: &mut BTreeMap<Rat, usize>,
    den: &mut BTreeMap<Rat, usize>,
    u_roots: &mut Vec<Rat>,
) -> bool {
    let Some(b) = den.keys().next_back().cloned() else {
        return num.values().all(|&m| m == 0);
    };
    if den[&b] == 0 {
        den.remove(&b);
        return match_roots(num, den, u_roots);
    }
    for k in 0..=4i64 {
        let a = &b - rat_int(k);
        if num.get(&a).copied().unwrap_or(0) == 0 {
            continue;
        }
        *den.get_mut(&b).unwrap() -= 1;
        *num.get_mut(&a).unwrap() -= 1;
        for j in 0..k {
            u_roots.push(&b - rat_int(j));
        }
        if match_roots(num, den, u_roots) {
            return true;
        }
        for _ in 0..k {
            u_roots.pop();
        }
        *den.get_mut(&b).unwrap() += 1;
        *num.get_mut(&a).unwrap() += 1;
    }
    false
}

// ---------------------------------------------------------------------------
// Block solving and orchestration
// ---------------------------------------------------------------------------

/// Exact symbolic values of every variable at steps 0..=steps, as
/// polynomials over the initials.
pub(crate) fn symbolic_unroll(
    sys: &RecurrenceSystem,
    universe: &Arc<Universe>,
    steps: u64,
) -> Result<Vec<Vec<MultiPoly>>, Diagnostic> {
    let mut rows = Vec::with_capacity(steps as usize + 1);
    let mut state: Vec<MultiPoly> = sys
        .variables
        .iter()
        .map(|v| MultiPoly::var(universe, &VarId::initial_of(v)))
        .collect();
    rows.push(state.clone());
    for k in 0..steps {
        let mut next = Vec::with_capacity(state.len());
        for (i, upd) in sys.updates.iter().enumerate() {
            match upd {
                Update::Affine { coeffs, constant } => {
                    let mut acc = MultiPoly::constant(universe, constant.clone());
                    for (w, c) in coeffs {
                        let j = sys.variables.iter().position(|v| v == w).unwrap();
                        acc = acc.add(&state[j].scale(c));
                    }
                    next.push(acc);
                }
                Update::RationalScale { num, den } => {
                    let kn = rat_int(k as i64);
                    let d = den.eval(&kn);
                    if d.is_zero() {
                        return Err(Diagnostic::new(
                            DiagnosticCode::NonTelescoping,
                            format!(
                                "the ratio for `{}` has a denominator vanishing at n = {}",
                                sys.variables[i].name, k
                            ),
                        ));
                    }
                    next.push(state[i].scale(&(num.eval(&kn) / d)));
                }
            }
        }
        state = next;
        rows.push(state.clone());
    }
    Ok(rows)
}

/// Forms solved so far, per variable index of the recurrence system.
pub struct Fragment {
    pub counter: VarId,
    pub universe: Arc<Universe>,
    forms: Vec<Option<(ExpPoly, u64)>>,
}

impl Fragment {
    pub fn empty(sys: &RecurrenceSystem) -> Fragment {
        Fragment {
            counter: sys.counter.clone(),
            universe: solve_universe(sys),
            forms: vec![None; sys.variables.len()],
        }
    }

    pub fn get(&self, i: usize) -> Option<&(ExpPoly, u64)> {
        self.forms[i].as_ref()
    }

    pub fn set(&mut self, i: usize, form: ExpPoly, valid_from: u64) {
        self.forms[i] = Some((form, valid_from));
    }
}

/// Solve one mutually dependent affine block, all of whose inputs are
/// already in `solved`. Returns (form, valid_from) per block variable, in
/// block order.
pub fn solve_block(
    sys: &RecurrenceSystem,
    block: &[usize],
    solved: &Fragment,
) -> Result<Vec<(ExpPoly, u64)>, Diagnostic> {
    let s = block.len();
    let counter = &solved.counter;
    let universe = &solved.universe;

    // block matrix and folded inhomogeneity
    let mut a = vec![vec![Rat::zero(); s]; s];
    let mut inhoms: Vec<ExpPoly> = Vec::with_capacity(s);
    let mut v_in: u64 = 0;
    for (r, &vi) in block.iter().enumerate() {
        let Update::Affine { coeffs, constant } = &sys.updates[vi] else {
            panic!("rational-scale update inside an affine block");
        };
        let mut inhom = ExpPoly::constant(counter, universe, constant.clone());
        for (w, c) in coeffs {
            let wi = sys.variables.iter().position(|v| v == w).unwrap();
            if let Some(col) = block.iter().position(|&b| b == wi) {
                a[r][col] = c.clone();
            } else {
                let (form, from) = solved
                    .get(wi)
                    .expect("dependency order violated: input block not solved");
                inhom = inhom.add(&form.scale(c));
                v_in = v_in.max(*from);
            }
        }
        inhoms.push(inhom);
    }

    let chi = char_poly(&a);
    let (roots, cofactor) = rational_roots(&chi);
    if cofactor.degree() > 0 {
        let names: Vec<&str> = block.iter().map(|&i| sys.variables[i].name.as_str()).collect();
        return Err(Diagnostic::new(
            DiagnosticCode::IrrationalRoots,
            format!(
                "characteristic polynomial of the block {{{}}} does not split over \
                 the rationals",
                names.join(", ")
            ),
        ));
    }
    let mu = roots
        .iter()
        .find(|(r, _)| r.is_zero())
        .map(|(_, m)| *m as u64)
        .unwrap_or(0);
    let psi = UniPoly::new(chi.coeffs()[mu as usize..].to_vec());
    let psi_roots: Vec<(Rat, usize)> =
        roots.iter().filter(|(r, _)| !r.is_zero()).cloned().collect();
    let d_psi = s as u64 - mu;
    let start = mu + v_in;

    // symbolic initial values z(t) = y(start + t)
    let unrolled = if d_psi > 0 && start + d_psi - 1 > 0 {
        symbolic_unroll(sys, universe, start + d_psi - 1)?
    } else {
        symbolic_unroll(sys, universe, 0)?
    };

    // A^0..A^(s-1), then B_j = Σ_{k=j+1..s} χ_k A^(k-1-j)
    let mut a_pows = vec![mat_identity(s)];
    for _ in 1..s {
        a_pows.push(mat_mul(a_pows.last().unwrap(), &a));
    }
    let mut out = Vec::with_capacity(s);
    for (r, &vi) in block.iter().enumerate() {
        // h_r(n) = Σ_j (B_j i(n+j))_r
        let mut h = ExpPoly::zero(counter, universe);
        for j in 0..s {
            let mut row = vec![Rat::zero(); s];
            for k in (j + 1)..=s {
                let ck = chi.coeff(k);
                if ck.is_zero() {
                    continue;
                }
                for (l, cell) in row.iter_mut().enumerate() {
                    *cell += &ck * &a_pows[k - 1 - j][r][l];
                }
            }
            for (l, cell) in row.iter().enumerate() {
                if cell.is_zero() {
                    continue;
                }
                h = h.add(&inhoms[l].shift(j as i64).scale(cell));
            }
        }
        let inhom_z = h.shift(v_in as i64);
        let z = if d_psi == 0 {
            inhom_z
        } else {
            let initials: Vec<MultiPoly> = (0..d_psi)
                .map(|t| unrolled[(start + t) as usize][vi].clone())
                .collect();
            solve_by_roots(&psi, &psi_roots, &inhom_z, &initials)
        };
        out.push((z.shift(-(start as i64)), start));
    }
    Ok(out)
}

/// Solve a whole recurrence system: dependency blocks in order, each by
/// telescoping (rational scale) or uncoupling (affine). Failures are
/// collected per variable; any failure fails the path.
pub fn closed_forms(sys: &RecurrenceSystem) -> Result<ClosedFormSystem, Vec<Diagnostic>> {
    let universe = solve_universe(sys);
    let blocks = dependency_blocks(sys);
    let mut fragment = Fragment::empty(sys);
    let mut diags: Vec<Diagnostic> = Vec::new();
    let mut failed = vec![false; sys.variables.len()];
    let mut order: Vec<usize> = Vec::new();

    for block in &blocks {
        order.extend_from_slice(block);
        // a block whose inputs failed cannot be solved; the root cause is
        // already recorded
        let inputs_failed = block.iter().any(|&i| {
            let v = &sys.variables[i];
            sys.updates[i].reads(v).iter().any(|w| {
                let wi = sys.variables.iter().position(|x| x == w).unwrap();
                failed[wi]
            })
        });
        if inputs_failed {
            for &i in block {
                failed[i] = true;
            }
            continue;
        }
        let result: Result<Vec<(ExpPoly, u64)>, Diagnostic> = if block.len() == 1
            && matches!(sys.updates[block[0]], Update::RationalScale { .. })
        {
            let i = block[0];
            let Update::RationalScale { num, den } = &sys.updates[i] else { unreachable!() };
            solve_rational_scale(&sys.variables[i], num, den, &sys.counter, &universe)
                .map(|f| vec![(f, 0)])
        } else {
            solve_block(sys, block, &fragment)
        };
        match result {
            Ok(forms) => {
                for (&i, (form, from)) in block.iter().zip(forms) {
                    fragment.set(i, form, from);
                }
            }
            Err(d) => {
                diags.push(d);
                for &i in block {
                    failed[i] = true;
                }
            }
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let mut forms = Vec::with_capacity(sys.variables.len());
    let mut valid_from = Vec::with_capacity(sys.variables.len());
    for i in 0..sys.variables.len() {
        let (form, from) = fragment.forms[i].clone().expect("all blocks solved");
        forms.push(form);
        valid_from.push(from);
    }
    let mut bases: Vec<Rat> = Vec::new();
    for f in &forms {
        for b in f.bases() {
            if !b.is_one() && !bases.contains(&b) {
                bases.push(b);
            }
        }
    }
    bases.sort();
    Ok(ClosedFormSystem {
        counter: sys.counter.clone(),
        universe,
        variables: sys.variables.clone(),
        forms,
        valid_from,
        bases,
        order,
    })
}
