//! One-call analysis: source text in, serializable report out.

use std::time::Instant;

use serde::Serialize;

use crate::error::Diagnostic;
use crate::frontend::{flatten, parse};
use crate::invariants::{invariant_ideal, relation_universe};
use crate::poly::{MonomialOrder, MultiPoly};
use crate::recurrence::extract_recurrences;
use crate::solver::closed_forms;
use crate::verify::{verify_numeric, VerifyOptions};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Numerically cross-check the reported invariants after analysis.
    pub verify: Option<VerifyOptions>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub parse: u128,
    pub extract: u128,
    pub solve: u128,
    pub invariants: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub trials: u64,
    pub max_steps: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// Everything the analysis produced. Serializes to the stable JSON layout;
/// output is byte-identical across runs of the same input except for
/// `timings_ms`.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub variables: Vec<String>,
    pub initial_variables: Vec<String>,
    pub paths: usize,
    /// One list of `v(nk) = ...` lines per path, in solve order.
    pub closed_forms: Vec<Vec<String>>,
    /// Reduced basis of the invariant ideal, integer-normalized.
    pub invariant_basis: Vec<String>,
    pub trivial_ideal: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub timings_ms: Timings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl AnalysisReport {
    /// Process exit code the report maps to: 0 on success, otherwise the
    /// first diagnostic decides.
    pub fn exit_code(&self) -> i32 {
        self.diagnostics.first().map_or(0, |d| d.code.exit_code())
    }
}

fn ms(t: Instant) -> u128 {
    t.elapsed().as_millis()
}

/// Run the full pipeline on one loop. Never panics on user input: every
/// rejection becomes a diagnostic in the report.
pub fn run(source: &str, opts: &RunOptions) -> AnalysisReport {
    let mut report = AnalysisReport {
        variables: Vec::new(),
        initial_variables: Vec::new(),
        paths: 0,
        closed_forms: Vec::new(),
        invariant_basis: Vec::new(),
        trivial_ideal: false,
        diagnostics: Vec::new(),
        timings_ms: Timings::default(),
        verification: None,
    };

    let t = Instant::now();
    let ast = match parse(source) {
        Ok(ast) => ast,
        Err(d) => {
            report.diagnostics.push(d);
            report.timings_ms.parse = ms(t);
            return report;
        }
    };
    let ps = flatten(&ast);
    report.timings_ms.parse = ms(t);
    report.variables = ps.variables.iter().map(|v| v.name.clone()).collect();
    report.initial_variables =
        ps.variables.iter().map(|v| format!("{}_0", v.name)).collect();
    report.paths = ps.paths.len();

    let t = Instant::now();
    let mut systems = Vec::new();
    for (i, path) in ps.paths.iter().enumerate() {
        match extract_recurrences(path, &ps.variables, i + 1) {
            Ok(sys) => systems.push(sys),
            Err(d) => report.diagnostics.push(d),
        }
    }
    report.timings_ms.extract = ms(t);
    if !report.diagnostics.is_empty() {
        return report;
    }

    let t = Instant::now();
    let mut forms = Vec::new();
    for sys in &systems {
        match closed_forms(sys) {
            Ok(cfs) => forms.push(cfs),
            Err(ds) => report.diagnostics.extend(ds),
        }
    }
    report.timings_ms.solve = ms(t);
    if !report.diagnostics.is_empty() {
        return report;
    }
    report.closed_forms = forms.iter().map(|c| c.rendered()).collect();

    let t = Instant::now();
    let universe = relation_universe(&ps.variables);
    let inv = match invariant_ideal(&systems, &forms, &universe) {
        Ok(ideal) => ideal,
        Err(d) => {
            report.diagnostics.push(d);
            report.timings_ms.invariants = ms(t);
            return report;
        }
    };
    report.timings_ms.invariants = ms(t);

    let order = MonomialOrder::canonical_lex(&universe).compile(&universe);
    let gens: Vec<MultiPoly> =
        inv.generators.iter().map(|g| g.integer_normalized(&order)).collect();
    report.invariant_basis = gens.iter().map(|g| g.canonical_string()).collect();
    report.trivial_ideal = gens.is_empty();

    if let Some(vopts) = &opts.verify {
        let outcome = verify_numeric(&ast, &ps.variables, &gens, vopts);
        report.verification = Some(VerificationReport {
            trials: outcome.trials,
            max_steps: outcome.max_steps,
            passed: outcome.passed,
            counterexample: outcome.counterexample,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DiagnosticCode;

    const SQUARES: &str =
        "while true if true r = r - v; v = v + 2 else r = r + u; u = u + 2 end end";

    #[test]
    fn squares_report() {
        let report = run(
            SQUARES,
            &RunOptions { verify: Some(VerifyOptions { trials: 20, max_steps: 10, seed: 1 }) },
        );
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.variables, vec!["r", "v", "u"]);
        assert_eq!(report.initial_variables, vec!["r_0", "v_0", "u_0"]);
        assert_eq!(report.paths, 2);
        assert_eq!(report.closed_forms.len(), 2);
        assert_eq!(report.closed_forms[0][0], "v(n1) = 2*n1+v(0)");
        assert_eq!(report.invariant_basis.len(), 1);
        assert!(!report.trivial_ideal);
        assert!(report.diagnostics.is_empty());
        let v = report.verification.as_ref().unwrap();
        assert!(v.passed);
        assert_eq!((v.trials, v.max_steps), (20, 10));
    }

    #[test]
    fn syntax_error_exit_code() {
        let report = run("while true x = + end", &RunOptions::default());
        assert_eq!(report.exit_code(), 1);
        assert_eq!(report.diagnostics[0].code, DiagnosticCode::Syntax);
        assert!(report.closed_forms.is_empty());
    }

    #[test]
    fn unsupported_update_exit_code() {
        let report = run("while true x = x*y end", &RunOptions::default());
        assert_eq!(report.exit_code(), 2);
        assert_eq!(report.diagnostics[0].code, DiagnosticCode::UnsupportedUpdate);
        assert!(report.diagnostics[0].message.contains('x'));
    }

    #[test]
    fn trivial_ideal_flagged() {
        let report = run("while true x = 2*x end", &RunOptions::default());
        assert_eq!(report.exit_code(), 0);
        assert!(report.trivial_ideal);
        assert!(report.invariant_basis.is_empty());
        assert_eq!(report.closed_forms, vec![vec!["x(n1) = x(0)*2^n1".to_string()]]);
    }

    #[test]
    fn json_shape_is_stable() {
        let a = run(SQUARES, &RunOptions::default());
        let b = run(SQUARES, &RunOptions::default());
        let mut ja: serde_json::Value = serde_json::to_value(&a).unwrap();
        let mut jb: serde_json::Value = serde_json::to_value(&b).unwrap();
        // identical modulo timings
        ja["timings_ms"] = serde_json::json!(null);
        jb["timings_ms"] = serde_json::json!(null);
        assert_eq!(ja, jb);
        // field order in the emitted text follows the documented layout
        let s = serde_json::to_string(&a).unwrap();
        let mut last = 0;
        for key in [
            "variables",
            "initial_variables",
            "paths",
            "closed_forms",
            "invariant_basis",
            "trivial_ideal",
            "diagnostics",
            "timings_ms",
        ] {
            let i = s.find(&format!("\"{key}\"")).unwrap();
            assert!(i >= last, "field {key} out of order");
            last = i;
        }
    }
}
