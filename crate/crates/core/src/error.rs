//! Diagnostic codes shared by the whole pipeline. Every user-visible failure
//! is one of these; the CLI maps them onto process exit codes.

use serde::Serialize;
use thiserror::Error;

/// Stable machine-readable code for a diagnostic. The string forms appear in
/// JSON reports and must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    /// Malformed source text (lexing or grammar).
    Syntax,
    /// Identifier uses a reserved shape (`*_0` suffix, `t<digits>`, `__`).
    ReservedIdentifier,
    /// Assignment target is a loop counter (`n<digits>`).
    AssignToCounter,
    /// Division whose divisor mentions a program variable.
    DivisionByVariable,
    /// `while` nested inside the loop body.
    NestedWhile,
    /// Call syntax `ident(...)`; the language has no functions.
    FunctionCall,
    /// Index syntax `ident[...]`; the language has no arrays.
    ArrayAccess,
    /// A composed path update is neither affine nor a self-scaling.
    UnsupportedUpdate,
    /// A characteristic polynomial does not split over the rationals.
    IrrationalRoots,
    /// A multiplicative ratio has no telescoping product form.
    NonTelescoping,
    /// The invariant-ideal chain did not stabilize within the round cap.
    NonTermination,
    /// Analysis exceeded the configured wall-clock budget.
    Timeout,
    /// Internal solver failure (a bug, not a user error).
    Internal,
}

impl DiagnosticCode {
    /// Process exit code the CLI uses for this diagnostic.
    ///
    /// 1 = syntax, 2 = unsupported construct, 3 = timeout, 4 = non-termination.
    pub fn exit_code(self) -> i32 {
        use DiagnosticCode::*;
        match self {
            Syntax | ReservedIdentifier | AssignToCounter => 1,
            DivisionByVariable | NestedWhile | FunctionCall | ArrayAccess
            | UnsupportedUpdate | IrrationalRoots | NonTelescoping | Internal => 2,
            Timeout => 3,
            NonTermination => 4,
        }
    }
}

/// A single diagnostic: code plus human-readable message. Messages for source
/// errors carry `line:col` positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("{message}")]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Diagnostic { code, message: message.into() }
    }

    pub fn at(code: DiagnosticCode, line: usize, col: usize, message: impl std::fmt::Display) -> Self {
        Diagnostic { code, message: format!("{}:{}: {}", line, col, message) }
    }
}
