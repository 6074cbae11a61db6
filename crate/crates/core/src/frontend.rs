//! Lexer, parser, and path flattening for the loop mini-language.
//!
//! Grammar (guards are parsed and then discarded — branching is treated as
//! non-deterministic):
//!
//! ```text
//! loop   = "while" guard stmts "end"
//! stmts  = { stmt [";" | newline] }
//! stmt   = ident "=" expr | "if" guard stmts [ "else" stmts ] "end"
//! guard  = "true" | "false" | expr relop expr
//! expr   = term { ("+"|"-") term }
//! term   = factor { ("*"|"/") factor }
//! factor = ident | number | "(" expr ")" | "-" factor
//! ```
//!
//! Reserved identifiers: names ending in `_0` (initial values), names
//! matching `t<digits>` (base sequences), and names containing `__`
//! (internal) are rejected everywhere. Names matching `n<digits>` denote the
//! loop counter: readable inside expressions, never assignable.
//!
//! Division is only allowed when the divisor involves no program variables:
//! either a constant (folded) or a polynomial in the loop counter (kept for
//! the recurrence extractor).

use std::fmt;

use num_traits::Zero;

use crate::error::{Diagnostic, DiagnosticCode};
use crate::poly::VarId;
use crate::rat::{parse_rat, rat_str, Rat};

/// Expression tree over program variables, the loop counter, and rational
/// constants. Division of two constants and negation of a constant are
/// folded at parse time, so `Num` is the only way a non-integer constant
/// appears.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rat),
    Var(String),
    /// Any `n<digits>` identifier: the current path's loop counter.
    Counter,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

/// Parsed-and-ignored loop/branch condition.
#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    True,
    False,
    Cmp(Expr, &'static str, Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign { var: String, rhs: Expr },
    If { guard: Guard, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
}

/// One top-level while loop.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopAst {
    pub guard: Guard,
    pub body: Vec<Stmt>,
}

/// Straight-line assignment sequence: one flattened path through the body.
pub type AssignSeq = Vec<(VarId, Expr)>;

/// The loop body flattened into its non-deterministic paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSystem {
    /// Program variables in first-occurrence order.
    pub variables: Vec<VarId>,
    pub paths: Vec<AssignSeq>,
}

pub fn is_counter_name(s: &str) -> bool {
    s.len() >= 2 && s.starts_with('n') && s.as_bytes()[1..].iter().all(u8::is_ascii_digit)
}

fn is_base_seq_name(s: &str) -> bool {
    s.len() >= 2 && s.starts_with('t') && s.as_bytes()[1..].iter().all(u8::is_ascii_digit)
}

/// Why a name may not be used as a program variable, if any.
fn reserved_reason(s: &str) -> Option<&'static str> {
    if s.ends_with("_0") {
        Some("names ending in `_0` are reserved for initial values")
    } else if is_base_seq_name(s) {
        Some("names `t<digits>` are reserved for base sequences")
    } else if s.contains("__") {
        Some("names containing `__` are reserved for internal variables")
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rat),
    KwWhile,
    KwIf,
    KwElse,
    KwEnd,
    KwTrue,
    KwFalse,
    Plus,
    Minus,
    Star,
    Slash,
    Assign,
    Relop(&'static str),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Sep,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(r) => format!("number `{}`", rat_str(r)),
            Tok::KwWhile => "`while`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwEnd => "`end`".into(),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Relop(op) => format!("`{op}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! push {
        ($t:expr, $l:expr, $c:expr) => {
            toks.push(Token { tok: $t, line: $l, col: $c })
        };
    }
    while i < bytes.len() {
        let (l, c) = (line, col);
        let ch = bytes[i];
        match ch {
            '\n' => {
                push!(Tok::Sep, l, c);
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            ';' => {
                push!(Tok::Sep, l, c);
                i += 1;
                col += 1;
            }
            '+' => {
                push!(Tok::Plus, l, c);
                i += 1;
                col += 1;
            }
            '-' => {
                push!(Tok::Minus, l, c);
                i += 1;
                col += 1;
            }
            '*' => {
                push!(Tok::Star, l, c);
                i += 1;
                col += 1;
            }
            '/' => {
                push!(Tok::Slash, l, c);
                i += 1;
                col += 1;
            }
            '(' => {
                push!(Tok::LParen, l, c);
                i += 1;
                col += 1;
            }
            ')' => {
                push!(Tok::RParen, l, c);
                i += 1;
                col += 1;
            }
            '[' => {
                push!(Tok::LBracket, l, c);
                i += 1;
                col += 1;
            }
            ']' => {
                push!(Tok::RBracket, l, c);
                i += 1;
                col += 1;
            }
            '=' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push!(Tok::Relop("=="), l, c);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Assign, l, c);
                    i += 1;
                    col += 1;
                }
            }
            '!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push!(Tok::Relop("!="), l, c);
                    i += 2;
                    col += 2;
                } else {
                    return Err(Diagnostic::at(
                        DiagnosticCode::Syntax,
                        l,
                        c,
                        "unexpected character `!`",
                    ));
                }
            }
            '<' | '>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push!(Tok::Relop(if ch == '<' { "<=" } else { ">=" }), l, c);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Relop(if ch == '<' { "<" } else { ">" }), l, c);
                    i += 1;
                    col += 1;
                }
            }
            _ if ch.is_ascii_alphabetic() || ch == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                let tok = match word.as_str() {
                    "while" => Tok::KwWhile,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "end" => Tok::KwEnd,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    _ => Tok::Ident(word),
                };
                push!(tok, l, c);
            }
            _ if ch.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                if i < bytes.len() && bytes[i] == '.' {
                    if i + 1 >= bytes.len() || !bytes[i + 1].is_ascii_digit() {
                        return Err(Diagnostic::at(
                            DiagnosticCode::Syntax,
                            l,
                            c,
                            "malformed number: digits must follow `.`",
                        ));
                    }
                    i += 1;
                    col += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                        col += 1;
                    }
                }
                let text: String = bytes[start..i].iter().collect();
                let value = parse_rat(&text).ok_or_else(|| {
                    Diagnostic::at(DiagnosticCode::Syntax, l, c, format!("malformed number `{text}`"))
                })?;
                push!(Tok::Number(value), l, c);
            }
            _ => {
                return Err(Diagnostic::at(
                    DiagnosticCode::Syntax,
                    l,
                    c,
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl fmt::Display) -> Diagnostic {
        let t = self.peek();
        Diagnostic::at(DiagnosticCode::Syntax, t.line, t.col, msg)
    }

    fn err_at(&self, code: DiagnosticCode, tok: &Token, msg: impl fmt::Display) -> Diagnostic {
        Diagnostic::at(code, tok.line, tok.col, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, Diagnostic> {
        if self.peek().tok == want {
            Ok(self.bump())
        } else {
            Err(self.err(format!("expected {what}, found {}", self.peek().tok.describe())))
        }
    }

    fn skip_seps(&mut self) {
        while self.peek().tok == Tok::Sep {
            self.bump();
        }
    }

    fn parse_loop(&mut self) -> Result<LoopAst, Diagnostic> {
        self.skip_seps();
        self.expect(Tok::KwWhile, "`while`")?;
        let guard = self.parse_guard()?;
        let body = self.parse_stmts()?;
        self.expect(Tok::KwEnd, "`end`")?;
        self.skip_seps();
        if self.peek().tok != Tok::Eof {
            return Err(self.err(format!(
                "expected end of input after loop, found {}",
                self.peek().tok.describe()
            )));
        }
        Ok(LoopAst { guard, body })
    }

    fn parse_stmts(&mut self) -> Result<Vec<Stmt>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            self.skip_seps();
            match self.peek().tok {
                Tok::KwEnd | Tok::KwElse | Tok::Eof => break,
                _ => {}
            }
            let stmt = self.parse_stmt()?;
            let block_form = matches!(stmt, Stmt::If { .. });
            out.push(stmt);
            match self.peek().tok {
                Tok::Sep | Tok::KwEnd | Tok::KwElse | Tok::Eof => {}
                // an `if ... end` block terminates itself
                _ if block_form => {}
                _ => {
                    return Err(self.err(format!(
                        "expected `;` or newline after statement, found {}",
                        self.peek().tok.describe()
                    )));
                }
            }
        }
        Ok(out)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        match self.peek().tok.clone() {
            Tok::KwIf => {
                self.bump();
                let guard = self.parse_guard()?;
                let then_body = self.parse_stmts()?;
                let else_body = if self.peek().tok == Tok::KwElse {
                    self.bump();
                    self.parse_stmts()?
                } else {
                    Vec::new()
                };
                self.expect(Tok::KwEnd, "`end`")?;
                Ok(Stmt::If { guard, then_body, else_body })
            }
            Tok::KwWhile => {
                let t = self.peek().clone();
                Err(self.err_at(
                    DiagnosticCode::NestedWhile,
                    &t,
                    "nested `while` loops are not supported",
                ))
            }
            Tok::Ident(name) => {
                let ident_tok = self.bump();
                match self.peek().tok {
                    Tok::LParen => {
                        return Err(self.err_at(
                            DiagnosticCode::FunctionCall,
                            &ident_tok,
                            format!("function calls are not supported: `{name}(...)`"),
                        ));
                    }
                    Tok::LBracket => {
                        return Err(self.err_at(
                            DiagnosticCode::ArrayAccess,
                            &ident_tok,
                            format!("array accesses are not supported: `{name}[...]`"),
                        ));
                    }
                    _ => {}
                }
                if is_counter_name(&name) {
                    return Err(self.err_at(
                        DiagnosticCode::AssignToCounter,
                        &ident_tok,
                        format!("`{name}` names the loop counter and cannot be assigned"),
                    ));
                }
                if let Some(reason) = reserved_reason(&name) {
                    return Err(self.err_at(
                        DiagnosticCode::ReservedIdentifier,
                        &ident_tok,
                        format!("`{name}` is reserved: {reason}"),
                    ));
                }
                self.expect(Tok::Assign, "`=`")?;
                let rhs = self.parse_expr()?;
                Ok(Stmt::Assign { var: name, rhs })
            }
            _ => Err(self.err(format!(
                "expected a statement, found {}",
                self.peek().tok.describe()
            ))),
        }
    }

    fn parse_guard(&mut self) -> Result<Guard, Diagnostic> {
        match self.peek().tok {
            Tok::KwTrue => {
                self.bump();
                Ok(Guard::True)
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Guard::False)
            }
            _ => {
                let lhs = self.parse_expr()?;
                let op = match self.peek().tok {
                    Tok::Relop(op) => {
                        self.bump();
                        op
                    }
                    _ => {
                        return Err(self.err(format!(
                            "expected a comparison operator in guard, found {}",
                            self.peek().tok.describe()
                        )));
                    }
                };
                let rhs = self.parse_expr()?;
                Ok(Guard::Cmp(lhs, op, rhs))
            }
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    let slash = self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = self.make_div(lhs, rhs, &slash)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    /// Build a division node, enforcing the divisor rules: no program
    /// variables; constant divisors are folded (and must be nonzero).
    fn make_div(&self, num: Expr, den: Expr, slash: &Token) -> Result<Expr, Diagnostic> {
        if expr_mentions_var(&den) {
            return Err(self.err_at(
                DiagnosticCode::DivisionByVariable,
                slash,
                "division by a program variable is not supported; divisors may \
                 only involve constants and the loop counter",
            ));
        }
        if !expr_mentions_counter(&den) {
            let value = const_eval(&den);
            if value.is_zero() {
                return Err(self.err_at(DiagnosticCode::Syntax, slash, "division by zero"));
            }
            if let Expr::Num(n) = num {
                return Ok(Expr::Num(n / value));
            }
            return Ok(Expr::Div(Box::new(num), Box::new(Expr::Num(value))));
        }
        Ok(Expr::Div(Box::new(num), Box::new(den)))
    }

    fn parse_factor(&mut self) -> Result<Expr, Diagnostic> {
        match self.peek().tok.clone() {
            Tok::Number(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Ident(name) => {
                let ident_tok = self.bump();
                match self.peek().tok {
                    Tok::LParen => {
                        return Err(self.err_at(
                            DiagnosticCode::FunctionCall,
                            &ident_tok,
                            format!("function calls are not supported: `{name}(...)`"),
                        ));
                    }
                    Tok::LBracket => {
                        return Err(self.err_at(
                            DiagnosticCode::ArrayAccess,
                            &ident_tok,
                            format!("array accesses are not supported: `{name}[...]`"),
                        ));
                    }
                    _ => {}
                }
                if is_counter_name(&name) {
                    return Ok(Expr::Counter);
                }
                if let Some(reason) = reserved_reason(&name) {
                    return Err(self.err_at(
                        DiagnosticCode::ReservedIdentifier,
                        &ident_tok,
                        format!("`{name}` is reserved: {reason}"),
                    ));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Minus => {
                self.bump();
                let inner = self.parse_factor()?;
                if let Expr::Num(r) = inner {
                    Ok(Expr::Num(-r))
                } else {
                    Ok(Expr::Neg(Box::new(inner)))
                }
            }
            _ => Err(self.err(format!(
                "expected an expression, found {}",
                self.peek().tok.describe()
            ))),
        }
    }
}

fn expr_mentions_var(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Num(_) | Expr::Counter => false,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            expr_mentions_var(a) || expr_mentions_var(b)
        }
        Expr::Neg(a) => expr_mentions_var(a),
    }
}

fn expr_mentions_counter(e: &Expr) -> bool {
    match e {
        Expr::Counter => true,
        Expr::Num(_) | Expr::Var(_) => false,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            expr_mentions_counter(a) || expr_mentions_counter(b)
        }
        Expr::Neg(a) => expr_mentions_counter(a),
    }
}

/// Exact value of a constant expression (no variables, no counter).
/// Division by zero cannot occur here: nested divisions were already folded
/// and checked while parsing inner expressions.
fn const_eval(e: &Expr) -> Rat {
    match e {
        Expr::Num(r) => r.clone(),
        Expr::Add(a, b) => const_eval(a) + const_eval(b),
        Expr::Sub(a, b) => const_eval(a) - const_eval(b),
        Expr::Mul(a, b) => const_eval(a) * const_eval(b),
        Expr::Div(a, b) => const_eval(a) / const_eval(b),
        Expr::Neg(a) => -const_eval(a),
        Expr::Var(_) | Expr::Counter => unreachable!("const_eval on non-constant expression"),
    }
}

/// Parse a complete loop program.
pub fn parse(source: &str) -> Result<LoopAst, Diagnostic> {
    let toks = lex(source)?;
    Parser { toks, pos: 0 }.parse_loop()
}

/// Exact evaluation of an expression given variable values and the current
/// counter value. `None` when a divisor evaluates to zero.
pub fn eval_expr(
    e: &Expr,
    lookup: &dyn Fn(&str) -> Rat,
    counter: &Rat,
) -> Option<Rat> {
    match e {
        Expr::Num(r) => Some(r.clone()),
        Expr::Var(name) => Some(lookup(name)),
        Expr::Counter => Some(counter.clone()),
        Expr::Add(a, b) => Some(eval_expr(a, lookup, counter)? + eval_expr(b, lookup, counter)?),
        Expr::Sub(a, b) => Some(eval_expr(a, lookup, counter)? - eval_expr(b, lookup, counter)?),
        Expr::Mul(a, b) => Some(eval_expr(a, lookup, counter)? * eval_expr(b, lookup, counter)?),
        Expr::Div(a, b) => {
            let den = eval_expr(b, lookup, counter)?;
            if den.is_zero() {
                return None;
            }
            Some(eval_expr(a, lookup, counter)? / den)
        }
        Expr::Neg(a) => Some(-eval_expr(a, lookup, counter)?),
    }
}

// ---------------------------------------------------------------------------
// Flattening
// ---------------------------------------------------------------------------

/// Flatten nested conditionals into the cartesian product of their branches,
/// in deterministic then-before-else order. An `if` without `else`
/// contributes an implicit empty (skip) branch.
pub fn flatten(ast: &LoopAst) -> PathSystem {
    let mut names: Vec<String> = Vec::new();
    collect_vars(&ast.body, &mut names);
    let raw = flatten_body(&ast.body);
    PathSystem {
        variables: names.into_iter().map(VarId::program).collect(),
        paths: raw
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|(v, e)| (VarId::program(v), e))
                    .collect()
            })
            .collect(),
    }
}

fn flatten_body(stmts: &[Stmt]) -> Vec<Vec<(String, Expr)>> {
    let mut acc: Vec<Vec<(String, Expr)>> = vec![Vec::new()];
    for st in stmts {
        match st {
            Stmt::Assign { var, rhs } => {
                for p in &mut acc {
                    p.push((var.clone(), rhs.clone()));
                }
            }
            Stmt::If { then_body, else_body, .. } => {
                let mut branches = flatten_body(then_body);
                branches.extend(flatten_body(else_body));
                let mut next = Vec::with_capacity(acc.len() * branches.len());
                for p in &acc {
                    for b in &branches {
                        let mut q = p.clone();
                        q.extend(b.iter().cloned());
                        next.push(q);
                    }
                }
                acc = next;
            }
        }
    }
    acc
}

/// Program variables in first-occurrence order: assignment targets and
/// expression reads, in source order. Guard variables do not count — guards
/// carry no semantic content.
fn collect_vars(stmts: &[Stmt], out: &mut Vec<String>) {
    fn add(name: &str, out: &mut Vec<String>) {
        if !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
    }
    fn walk_expr(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Var(name) => add(name, out),
            Expr::Num(_) | Expr::Counter => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                walk_expr(a, out);
                walk_expr(b, out);
            }
            Expr::Neg(a) => walk_expr(a, out),
        }
    }
    for st in stmts {
        match st {
            Stmt::Assign { var, rhs } => {
                add(var, out);
                walk_expr(rhs, out);
            }
            Stmt::If { then_body, else_body, .. } => {
                collect_vars(then_body, out);
                collect_vars(else_body, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

/// Printing precedence: additive 1, multiplicative 2, atoms 3. Unary minus
/// and negative constants print at additive level so they are always
/// parenthesized as operands.
fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) | Expr::Neg(..) => 1,
        Expr::Num(r) => {
            if r < &Rat::zero() {
                1
            } else {
                3
            }
        }
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Var(_) | Expr::Counter => 3,
    }
}

fn fmt_expr(e: &Expr, min_prec: u8, out: &mut String) {
    let prec = expr_prec(e);
    let need = prec < min_prec;
    if need {
        out.push('(');
    }
    match e {
        Expr::Num(r) => out.push_str(&rat_str(r)),
        Expr::Var(name) => out.push_str(name),
        Expr::Counter => out.push_str("n1"),
        Expr::Add(a, b) => {
            fmt_expr(a, 1, out);
            out.push_str(" + ");
            fmt_expr(b, 2, out);
        }
        Expr::Sub(a, b) => {
            fmt_expr(a, 1, out);
            out.push_str(" - ");
            fmt_expr(b, 2, out);
        }
        Expr::Mul(a, b) => {
            fmt_expr(a, 2, out);
            out.push('*');
            fmt_expr(b, 3, out);
        }
        Expr::Div(a, b) => {
            fmt_expr(a, 2, out);
            out.push('/');
            fmt_expr(b, 3, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            fmt_expr(a, 3, out);
        }
    }
    if need {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        fmt_expr(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::False => f.write_str("false"),
            Guard::Cmp(a, op, b) => write!(f, "{a} {op} {b}"),
        }
    }
}

fn fmt_stmts(stmts: &[Stmt], indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let pad = "  ".repeat(indent);
    for st in stmts {
        match st {
            Stmt::Assign { var, rhs } => writeln!(f, "{pad}{var} = {rhs}")?,
            Stmt::If { guard, then_body, else_body } => {
                writeln!(f, "{pad}if {guard}")?;
                fmt_stmts(then_body, indent + 1, f)?;
                if !else_body.is_empty() {
                    writeln!(f, "{pad}else")?;
                    fmt_stmts(else_body, indent + 1, f)?;
                }
                writeln!(f, "{pad}end")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for LoopAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "while {}", self.guard)?;
        fmt_stmts(&self.body, 1, f)?;
        writeln!(f, "end")
    }
}
