//! The `.qnl` netlist language: a line-oriented text format for optical
//! circuits, with a recursive-descent parser, a canonical pretty-printer,
//! and an interpreter over the Fock-space engine.
//!
//! Grammar, one statement per line, `#` starting a comment, keywords
//! case-insensitive, modes named by letters `a..z` in declaration order:
//!
//! ```text
//! modes <m>                        # header, required first
//! cutoff <d>
//! state fock <n1> ... <nm>         # or one coherent line per mode:
//! state coherent <mode> <re> [<im>]
//! bs <m1> <m2> [theta]             # default theta = pi/4
//! phase <mode> <phi>
//! kerr <m1> <m2> <chi>
//! fredkin <m1> <m2> <m3> [chi]     # default chi = pi
//! damp <mode> <gamma>
//! adjoint { ... }                  # adjoint of the enclosed sequence
//! measure                          # optional, last
//! ```
//!
//! Angles accept literals and `pi` combined with `*` and `/`, e.g.
//! `pi/2`, `-pi/4`, `2*pi/3`. Every parse failure carries a line and
//! column.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitElement, InitialState, State};
use crate::error::Error as SimError;
use crate::fock::{FockBasis, OutcomeDist};
use crate::ops::GateSpec;

/// Netlist-level errors: positioned syntax diagnostics or evaluation
/// failures from the simulation layers.
#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error(transparent)]
    Eval(#[from] SimError),
}

pub type NetlistResult<T> = std::result::Result<T, NetlistError>;

fn parse_err<T>(line: usize, col: usize, message: impl Into<String>) -> NetlistResult<T> {
    Err(NetlistError::Parse {
        line,
        col,
        message: message.into(),
    })
}

/// One gate statement of the netlist grammar.
#[derive(Clone, Debug, PartialEq)]
pub enum NetGate {
    Bs { a: usize, b: usize, theta: f64 },
    Phase { mode: usize, phi: f64 },
    Kerr { a: usize, b: usize, chi: f64 },
    Fredkin { a: usize, b: usize, c: usize, chi: f64 },
    Damp { mode: usize, gamma: f64 },
}

/// A statement: a gate or an adjoint block.
#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Gate(NetGate),
    Adjoint(Vec<Stmt>),
}

/// A parsed netlist program.
#[derive(Clone, Debug, PartialEq)]
pub struct NetlistProgram {
    pub modes: usize,
    pub cutoff: usize,
    pub initial: InitialState,
    pub body: Vec<Stmt>,
    pub measure: bool,
}

/// Result of executing a program: the final state, and the count
/// distribution when the program ends in `measure`.
#[derive(Clone, Debug)]
pub struct ExecutionOutcome {
    pub final_state: State,
    pub distribution: Option<OutcomeDist>,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut start_col = 0;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch == '#' {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..byte],
                    col: start_col + 1,
                });
            }
            return tokens;
        }
        if ch.is_whitespace() || ch == '{' || ch == '}' {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..byte],
                    col: start_col + 1,
                });
            }
            if ch == '{' || ch == '}' {
                tokens.push(Token {
                    text: &line[byte..byte + 1],
                    col: col + 1,
                });
            }
        } else if start.is_none() {
            start = Some(byte);
            start_col = col;
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            col: start_col + 1,
        });
    }
    tokens
}

/// Evaluate an angle token: optional sign, then `pi` or numeric factors
/// joined by `*` and `/`, evaluated left to right.
fn parse_angle(tok: &Token<'_>, line: usize) -> NetlistResult<f64> {
    let text = tok.text;
    let (negative, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text),
    };
    if rest.is_empty() {
        return parse_err(line, tok.col, "expected a number or pi expression");
    }
    let mut value = f64::NAN;
    let mut op: Option<char> = None;
    let mut factor = String::new();
    let flush = |factor: &str, value: &mut f64, op: &mut Option<char>| -> Result<(), String> {
        if factor.is_empty() {
            return Err("empty factor in angle expression".into());
        }
        let f = if factor.eq_ignore_ascii_case("pi") {
            PI
        } else {
            factor
                .parse::<f64>()
                .map_err(|_| format!("cannot parse `{factor}` as a number"))?
        };
        match op.take() {
            None => *value = f,
            Some('*') => *value *= f,
            Some('/') => *value /= f,
            Some(_) => unreachable!(),
        }
        Ok(())
    };
    let mut seen_first = false;
    for ch in rest.chars() {
        if ch == '*' || ch == '/' {
            if let Err(msg) = flush(&factor, &mut value, &mut op) {
                return parse_err(line, tok.col, msg);
            }
            seen_first = true;
            op = Some(ch);
            factor.clear();
        } else {
            factor.push(ch);
        }
    }
    if let Err(msg) = flush(&factor, &mut value, &mut op) {
        return parse_err(line, tok.col, msg);
    }
    let _ = seen_first;
    if !value.is_finite() {
        return parse_err(line, tok.col, "angle expression is not finite");
    }
    Ok(if negative { -value } else { value })
}

fn parse_usize(tok: &Token<'_>, line: usize, what: &str) -> NetlistResult<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| NetlistError::Parse {
            line,
            col: tok.col,
            message: format!("cannot parse `{}` as {what}", tok.text),
        })
}

fn parse_mode(tok: &Token<'_>, line: usize, num_modes: usize) -> NetlistResult<usize> {
    let mut chars = tok.text.chars();
    let (ch, extra) = (chars.next(), chars.next());
    match (ch, extra) {
        (Some(c), None) if c.is_ascii_alphabetic() => {
            let idx = (c.to_ascii_lowercase() as u8 - b'a') as usize;
            if idx < num_modes {
                Ok(idx)
            } else {
                parse_err(
                    line,
                    tok.col,
                    format!("mode `{c}` out of range (circuit has {num_modes} modes)"),
                )
            }
        }
        _ => parse_err(
            line,
            tok.col,
            format!("expected a mode letter a..z, got `{}`", tok.text),
        ),
    }
}

fn expect_arity(
    tokens: &[Token<'_>],
    line: usize,
    keyword: &Token<'_>,
    min: usize,
    max: usize,
) -> NetlistResult<()> {
    let args = tokens.len() - 1;
    if args < min {
        let col = tokens.last().map(|t| t.col + t.text.len()).unwrap_or(1);
        return parse_err(
            line,
            col,
            format!(
                "`{}` needs at least {min} argument{}, got {args}",
                keyword.text,
                if min == 1 { "" } else { "s" }
            ),
        );
    }
    if args > max {
        return parse_err(
            line,
            tokens[1 + max].col,
            format!("`{}` takes at most {max} arguments", keyword.text),
        );
    }
    Ok(())
}

fn distinct(modes: &[usize], line: usize, col: usize) -> NetlistResult<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return parse_err(
                line,
                col,
                format!("mode `{}` listed more than once", (b'a' + *m as u8) as char),
            );
        }
    }
    Ok(())
}

/// Parse a `.qnl` program. Never panics; every failure is a positioned
/// diagnostic.
pub fn parse(text: &str) -> NetlistResult<NetlistProgram> {
    let mut modes: Option<usize> = None;
    let mut cutoff: Option<usize> = None;
    let mut fock: Option<Vec<usize>> = None;
    let mut coherent: BTreeMap<usize, C64> = BTreeMap::new();
    let mut measure = false;
    let mut body: Vec<Stmt> = Vec::new();
    // open adjoint blocks: statements collected so far + opening position
    let mut blocks: Vec<(Vec<Stmt>, usize, usize)> = Vec::new();
    let mut seen_gate = false;
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let kw = &tokens[0];
        let keyword = kw.text.to_ascii_lowercase();

        if measure && keyword != "}" {
            return parse_err(line, kw.col, "statement after `measure`");
        }

        // header and state directives need the header context
        let need_header = |what: &str| -> NetlistResult<(usize, usize)> {
            match (modes, cutoff) {
                (Some(m), Some(d)) => Ok((m, d)),
                (None, _) => parse_err(line, kw.col, format!("`{what}` before `modes`")),
                (_, None) => parse_err(line, kw.col, format!("`{what}` before `cutoff`")),
            }
        };

        match keyword.as_str() {
            "modes" => {
                if modes.is_some() {
                    return parse_err(line, kw.col, "duplicate `modes` directive");
                }
                expect_arity(&tokens, line, kw, 1, 1)?;
                let m = parse_usize(&tokens[1], line, "a mode count")?;
                if m == 0 || m > 26 {
                    return parse_err(line, tokens[1].col, "mode count must be 1..=26");
                }
                modes = Some(m);
            }
            "cutoff" => {
                if cutoff.is_some() {
                    return parse_err(line, kw.col, "duplicate `cutoff` directive");
                }
                expect_arity(&tokens, line, kw, 1, 1)?;
                let d = parse_usize(&tokens[1], line, "a cutoff")?;
                if d == 0 {
                    return parse_err(line, tokens[1].col, "cutoff must be positive");
                }
                cutoff = Some(d);
            }
            "state" => {
                let (m, d) = need_header("state")?;
                if seen_gate {
                    return parse_err(line, kw.col, "state directive after a gate statement");
                }
                if tokens.len() < 2 {
                    return parse_err(line, kw.col + 5, "expected `fock` or `coherent`");
                }
                match tokens[1].text.to_ascii_lowercase().as_str() {
                    "fock" => {
                        if fock.is_some() {
                            return parse_err(line, kw.col, "duplicate `state fock` directive");
                        }
                        if !coherent.is_empty() {
                            return parse_err(
                                line,
                                kw.col,
                                "cannot mix `state fock` with `state coherent`",
                            );
                        }
                        if tokens.len() - 2 != m {
                            return parse_err(
                                line,
                                tokens.last().unwrap().col,
                                format!("`state fock` needs {m} occupations, got {}", tokens.len() - 2),
                            );
                        }
                        let mut occ = Vec::with_capacity(m);
                        for t in &tokens[2..] {
                            let n = parse_usize(t, line, "an occupation number")?;
                            if n >= d {
                                return parse_err(
                                    line,
                                    t.col,
                                    format!("occupation {n} exceeds cutoff {d} (allowed 0..{d})"),
                                );
                            }
                            occ.push(n);
                        }
                        fock = Some(occ);
                    }
                    "coherent" => {
                        if fock.is_some() {
                            return parse_err(
                                line,
                                kw.col,
                                "cannot mix `state coherent` with `state fock`",
                            );
                        }
                        expect_arity(&tokens, line, kw, 3, 4)?;
                        let mode = parse_mode(&tokens[2], line, m)?;
                        if coherent.contains_key(&mode) {
                            return parse_err(
                                line,
                                tokens[2].col,
                                format!(
                                    "duplicate coherent state on mode `{}`",
                                    (b'a' + mode as u8) as char
                                ),
                            );
                        }
                        let re = parse_angle(&tokens[3], line)?;
                        let im = if tokens.len() > 4 {
                            parse_angle(&tokens[4], line)?
                        } else {
                            0.0
                        };
                        coherent.insert(mode, C64::new(re, im));
                    }
                    other => {
                        return parse_err(
                            line,
                            tokens[1].col,
                            format!("expected `fock` or `coherent`, got `{other}`"),
                        )
                    }
                }
            }
            "bs" => {
                let (m, _) = need_header("bs")?;
                expect_arity(&tokens, line, kw, 2, 3)?;
                let a = parse_mode(&tokens[1], line, m)?;
                let b = parse_mode(&tokens[2], line, m)?;
                distinct(&[a, b], line, tokens[2].col)?;
                let theta = if tokens.len() > 3 {
                    parse_angle(&tokens[3], line)?
                } else {
                    FRAC_PI_4
                };
                push_stmt(
                    &mut blocks,
                    &mut body,
                    Stmt::Gate(NetGate::Bs { a, b, theta }),
                );
                seen_gate = true;
            }
            "phase" => {
                let (m, _) = need_header("phase")?;
                expect_arity(&tokens, line, kw, 2, 2)?;
                let mode = parse_mode(&tokens[1], line, m)?;
                let phi = parse_angle(&tokens[2], line)?;
                push_stmt(&mut blocks, &mut body, Stmt::Gate(NetGate::Phase { mode, phi }));
                seen_gate = true;
            }
            "kerr" => {
                let (m, _) = need_header("kerr")?;
                expect_arity(&tokens, line, kw, 3, 3)?;
                let a = parse_mode(&tokens[1], line, m)?;
                let b = parse_mode(&tokens[2], line, m)?;
                distinct(&[a, b], line, tokens[2].col)?;
                let chi = parse_angle(&tokens[3], line)?;
                push_stmt(&mut blocks, &mut body, Stmt::Gate(NetGate::Kerr { a, b, chi }));
                seen_gate = true;
            }
            "fredkin" => {
                let (m, _) = need_header("fredkin")?;
                expect_arity(&tokens, line, kw, 3, 4)?;
                let a = parse_mode(&tokens[1], line, m)?;
                let b = parse_mode(&tokens[2], line, m)?;
                let c = parse_mode(&tokens[3], line, m)?;
                distinct(&[a, b, c], line, tokens[3].col)?;
                let chi = if tokens.len() > 4 {
                    parse_angle(&tokens[4], line)?
                } else {
                    PI
                };
                push_stmt(
                    &mut blocks,
                    &mut body,
                    Stmt::Gate(NetGate::Fredkin { a, b, c, chi }),
                );
                seen_gate = true;
            }
            "damp" => {
                let (m, _) = need_header("damp")?;
                if !blocks.is_empty() {
                    return parse_err(
                        line,
                        kw.col,
                        "`damp` inside `adjoint`: channels have no adjoint",
                    );
                }
                expect_arity(&tokens, line, kw, 2, 2)?;
                let mode = parse_mode(&tokens[1], line, m)?;
                let gamma = parse_angle(&tokens[2], line)?;
                if gamma < 0.0 {
                    return parse_err(line, tokens[2].col, "gamma must be nonnegative");
                }
                push_stmt(&mut blocks, &mut body, Stmt::Gate(NetGate::Damp { mode, gamma }));
                seen_gate = true;
            }
            "adjoint" => {
                need_header("adjoint")?;
                if tokens.len() != 2 || tokens[1].text != "{" {
                    let col = tokens.get(1).map(|t| t.col).unwrap_or(kw.col + 7);
                    return parse_err(line, col, "expected `{` after `adjoint`");
                }
                blocks.push((Vec::new(), line, kw.col));
                seen_gate = true;
            }
            "}" => {
                if tokens.len() != 1 {
                    return parse_err(line, tokens[1].col, "`}` must stand alone");
                }
                match blocks.pop() {
                    Some((stmts, _, _)) => {
                        push_stmt(&mut blocks, &mut body, Stmt::Adjoint(stmts));
                    }
                    None => return parse_err(line, kw.col, "unmatched `}`"),
                }
            }
            "measure" => {
                need_header("measure")?;
                if !blocks.is_empty() {
                    return parse_err(line, kw.col, "`measure` inside `adjoint`");
                }
                expect_arity(&tokens, line, kw, 0, 0)?;
                measure = true;
            }
            other => {
                return parse_err(line, kw.col, format!("unknown keyword `{other}`"));
            }
        }
    }

    if let Some((_, open_line, open_col)) = blocks.pop() {
        return parse_err(open_line, open_col, "unclosed `adjoint` block");
    }
    let modes = match modes {
        Some(m) => m,
        None => return parse_err(last_line.max(1), 1, "missing `modes` directive"),
    };
    let cutoff = match cutoff {
        Some(d) => d,
        None => return parse_err(last_line.max(1), 1, "missing `cutoff` directive"),
    };
    let initial = if let Some(occ) = fock {
        InitialState::Fock(occ)
    } else if !coherent.is_empty() {
        let alphas = (0..modes).map(|m| coherent.get(&m).copied()).collect();
        InitialState::Coherent(alphas)
    } else {
        InitialState::Fock(vec![0; modes])
    };
    Ok(NetlistProgram {
        modes,
        cutoff,
        initial,
        body,
        measure,
    })
}

fn push_stmt(blocks: &mut [(Vec<Stmt>, usize, usize)], body: &mut Vec<Stmt>, stmt: Stmt) {
    match blocks.last_mut() {
        Some((block, _, _)) => block.push(stmt),
        None => body.push(stmt),
    }
}

fn mode_letter(m: usize) -> char {
    (b'a' + m as u8) as char
}

impl NetGate {
    fn to_element(&self) -> CircuitElement {
        match *self {
            NetGate::Bs { a, b, theta } => {
                CircuitElement::new(GateSpec::Beamsplitter { theta }, vec![a, b])
            }
            NetGate::Phase { mode, phi } => CircuitElement::new(GateSpec::Phase { phi }, vec![mode]),
            NetGate::Kerr { a, b, chi } => CircuitElement::new(GateSpec::Kerr { chi }, vec![a, b]),
            NetGate::Fredkin { a, b, c, chi } => {
                CircuitElement::new(GateSpec::Fredkin { chi }, vec![a, b, c])
            }
            NetGate::Damp { mode, gamma } => {
                CircuitElement::new(GateSpec::Damp { gamma }, vec![mode])
            }
        }
    }
}

fn flatten(stmts: &[Stmt], out: &mut Vec<CircuitElement>) {
    for stmt in stmts {
        match stmt {
            Stmt::Gate(g) => out.push(g.to_element()),
            Stmt::Adjoint(inner) => {
                let mut block = Vec::new();
                flatten(inner, &mut block);
                for el in block.into_iter().rev() {
                    let spec = el
                        .spec
                        .adjoint()
                        .expect("parser rejects channels inside adjoint");
                    out.push(CircuitElement::new(spec, el.modes));
                }
            }
        }
    }
}

impl NetlistProgram {
    /// Lower the program to an executable circuit, expanding adjoint
    /// blocks into reversed adjoint elements.
    pub fn to_circuit(&self) -> NetlistResult<Circuit> {
        let basis = FockBasis::new(self.modes, self.cutoff)?;
        let mut elements = Vec::new();
        flatten(&self.body, &mut elements);
        Ok(Circuit::new(basis, self.initial.clone(), elements)?)
    }

    /// Execute: run the circuit and, when the program ends in `measure`,
    /// produce the photon-count distribution.
    pub fn execute(&self) -> NetlistResult<ExecutionOutcome> {
        let circuit = self.to_circuit()?;
        let final_state = circuit.run()?;
        let distribution = if self.measure {
            Some(final_state.measure_counts()?)
        } else {
            None
        };
        Ok(ExecutionOutcome {
            final_state,
            distribution,
        })
    }
}

fn fmt_stmts(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], indent: usize) -> fmt::Result {
    let pad = "  ".repeat(indent);
    for stmt in stmts {
        match stmt {
            Stmt::Gate(g) => {
                write!(f, "{pad}")?;
                match *g {
                    NetGate::Bs { a, b, theta } => {
                        writeln!(f, "bs {} {} {}", mode_letter(a), mode_letter(b), theta)?
                    }
                    NetGate::Phase { mode, phi } => {
                        writeln!(f, "phase {} {}", mode_letter(mode), phi)?
                    }
                    NetGate::Kerr { a, b, chi } => {
                        writeln!(f, "kerr {} {} {}", mode_letter(a), mode_letter(b), chi)?
                    }
                    NetGate::Fredkin { a, b, c, chi } => writeln!(
                        f,
                        "fredkin {} {} {} {}",
                        mode_letter(a),
                        mode_letter(b),
                        mode_letter(c),
                        chi
                    )?,
                    NetGate::Damp { mode, gamma } => {
                        writeln!(f, "damp {} {}", mode_letter(mode), gamma)?
                    }
                }
            }
            Stmt::Adjoint(inner) => {
                writeln!(f, "{pad}adjoint {{")?;
                fmt_stmts(f, inner, indent + 1)?;
                writeln!(f, "{pad}}}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for NetlistProgram {
    /// Canonical form: explicit state line(s), decimal angles, two-space
    /// indentation inside adjoint blocks. Reparsing the output yields a
    /// structurally equal program.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "modes {}", self.modes)?;
        writeln!(f, "cutoff {}", self.cutoff)?;
        match &self.initial {
            InitialState::Fock(occ) => {
                let parts: Vec<String> = occ.iter().map(|n| n.to_string()).collect();
                writeln!(f, "state fock {}", parts.join(" "))?;
            }
            InitialState::Coherent(alphas) => {
                for (m, alpha) in alphas.iter().enumerate() {
                    if let Some(a) = alpha {
                        writeln!(f, "state coherent {} {} {}", mode_letter(m), a.re, a.im)?;
                    }
                }
            }
        }
        fmt_stmts(f, &self.body, 0)?;
        if self.measure {
            writeln!(f, "measure")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse_ok(text: &str) -> NetlistProgram {
        match parse(text) {
            Ok(p) => p,
            Err(e) => panic!("parse failed: {e}\n---\n{text}"),
        }
    }

    #[test]
    fn beamsplitter_program_executes_born_rule() {
        let p = parse_ok("modes 2\ncutoff 2\nstate fock 0 1\nbs a b\nmeasure\n");
        let out = p.execute().unwrap();
        let dist = out.distribution.unwrap();
        assert!((dist.prob(&[0, 1]) - 0.5).abs() < 1e-12);
        assert!((dist.prob(&[1, 0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn phase_is_invisible_to_counting() {
        let p = parse_ok("modes 1\ncutoff 2\nstate fock 1\nphase a pi\nmeasure\n");
        let dist = p.execute().unwrap().distribution.unwrap();
        assert!((dist.prob(&[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arity_error_is_positioned() {
        let err = parse("modes 2\ncutoff 2\nbs a\n").unwrap_err();
        match err {
            NetlistError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn comments_and_case_are_accepted() {
        let p = parse_ok(
            "# a comment line\nMODES 2  # trailing comment\nCutoff 2\nState Fock 0 1\nBS a b PI/4\nMeasure\n",
        );
        assert_eq!(p.modes, 2);
        assert!(p.measure);
    }

    #[test]
    fn angle_expressions() {
        let p = parse_ok(
            "modes 2\ncutoff 2\nbs a b pi/2\nbs a b -pi/4\nbs a b 2*pi/3\nbs a b 0.5\nbs a b 1e-3\n",
        );
        let want = [
            PI / 2.0,
            -FRAC_PI_4,
            2.0 * PI / 3.0,
            0.5,
            1e-3,
        ];
        for (stmt, expect) in p.body.iter().zip(want) {
            match stmt {
                Stmt::Gate(NetGate::Bs { theta, .. }) => {
                    assert!((theta - expect).abs() < 1e-15)
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn default_angles() {
        let p = parse_ok("modes 3\ncutoff 2\nbs a b\nfredkin a b c\n");
        match &p.body[0] {
            Stmt::Gate(NetGate::Bs { theta, .. }) => assert_eq!(*theta, FRAC_PI_4),
            other => panic!("unexpected {other:?}"),
        }
        match &p.body[1] {
            Stmt::Gate(NetGate::Fredkin { chi, .. }) => assert_eq!(*chi, PI),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adjoint_block_round_trips_and_cancels() {
        let text = "modes 2\ncutoff 2\nstate fock 0 1\nbs a b\nadjoint {\n  bs a b\n}\nmeasure\n";
        let p = parse_ok(text);
        let dist = p.execute().unwrap().distribution.unwrap();
        assert!((dist.prob(&[0, 1]) - 1.0).abs() < 1e-12, "B then B^dag is the identity");
    }

    #[test]
    fn coherent_state_lines() {
        let p = parse_ok(
            "modes 4\ncutoff 16\nstate coherent b 1\nstate coherent d 1 0\nmeasure\n",
        );
        match &p.initial {
            InitialState::Coherent(alphas) => {
                assert_eq!(alphas[0], None);
                assert_eq!(alphas[1], Some(C64::new(1.0, 0.0)));
                assert_eq!(alphas[2], None);
                assert_eq!(alphas[3], Some(C64::new(1.0, 0.0)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vacuum_default_when_no_state_line() {
        let p = parse_ok("modes 2\ncutoff 2\nmeasure\n");
        assert_eq!(p.initial, InitialState::Fock(vec![0, 0]));
        let dist = p.execute().unwrap().distribution.unwrap();
        assert!((dist.prob(&[0, 0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_inputs_give_positioned_diagnostics() {
        // (text, expected line, expected column)
        let cases: Vec<(&str, usize, usize)> = vec![
            ("bogus 1\n", 1, 1),                                     // unknown keyword
            ("modes 2\ncutoff 2\nsplit a b\n", 3, 1),                // unknown gate
            ("modes 0\n", 1, 7),                                     // zero modes
            ("modes 27\n", 1, 7),                                    // too many modes
            ("modes x\n", 1, 7),                                     // non-numeric count
            ("modes 2\nmodes 2\n", 2, 1),                            // duplicate modes
            ("modes 2\ncutoff 2\ncutoff 2\n", 3, 1),                 // duplicate cutoff
            ("modes 2\ncutoff 0\n", 2, 8),                           // zero cutoff
            ("bs a b\n", 1, 1),                                      // gate before modes
            ("modes 2\nbs a b\n", 2, 1),                             // gate before cutoff
            ("modes 2\ncutoff 2\nbs a\n", 3, 5),                     // missing mode
            ("modes 2\ncutoff 2\nbs a b 1 2\n", 3, 10),              // extra argument
            ("modes 2\ncutoff 2\nbs a a\n", 3, 6),                   // repeated mode
            ("modes 2\ncutoff 2\nbs a c\n", 3, 6),                   // mode out of range
            ("modes 2\ncutoff 2\nbs 1 2\n", 3, 4),                   // numeric mode name
            ("modes 2\ncutoff 2\nbs a b pi/x\n", 3, 8),              // bad angle factor
            ("modes 2\ncutoff 2\nbs a b 1.2.3\n", 3, 8),             // bad number
            ("modes 2\ncutoff 2\nstate fock 0\n", 3, 12),            // occupation count
            ("modes 2\ncutoff 2\nstate fock 0 2\n", 3, 14),          // occupation >= cutoff
            ("modes 2\ncutoff 2\nstate fock 0 1\nstate fock 0 1\n", 4, 1), // duplicate fock
            ("modes 2\ncutoff 2\nstate plasma 0 1\n", 3, 7),         // unknown state kind
            (
                "modes 2\ncutoff 2\nstate coherent a 1\nstate fock 0 1\n",
                4,
                1,
            ), // mixing kinds
            (
                "modes 2\ncutoff 2\nstate coherent a 1\nstate coherent a 2\n",
                4,
                16,
            ), // duplicate coherent mode
            ("modes 2\ncutoff 2\nbs a b\nstate fock 0 1\n", 4, 1),   // state after gate
            ("modes 2\ncutoff 2\ndamp a -1\n", 3, 8),                // negative gamma
            ("modes 2\ncutoff 2\nadjoint {\ndamp a 0.1\n}\n", 4, 1), // damp inside adjoint
            ("modes 2\ncutoff 2\nadjoint {\nbs a b\n", 3, 1),        // unclosed adjoint
            ("modes 2\ncutoff 2\n}\n", 3, 1),                        // unmatched close
            ("modes 2\ncutoff 2\nadjoint [\n", 3, 9),                // wrong opener
            ("modes 2\ncutoff 2\nmeasure\nbs a b\n", 4, 1),          // statement after measure
            ("modes 2\ncutoff 2\nmeasure now\n", 3, 9),              // measure takes no args
            ("modes 2\ncutoff 2\nphase a\n", 3, 8),                  // missing angle
            ("cutoff 2\nstate fock 0\n", 2, 1),                      // state before modes
        ];
        for (text, line, col) in cases {
            match parse(text) {
                Err(NetlistError::Parse {
                    line: l, col: c, ..
                }) => {
                    assert_eq!((l, c), (line, col), "wrong position for:\n{text}");
                }
                Ok(_) => panic!("parse unexpectedly succeeded:\n{text}"),
                Err(other) => panic!("unexpected error kind {other} for:\n{text}"),
            }
        }
    }

    #[test]
    fn pretty_print_reparses_equal() {
        let texts = [
            "modes 2\ncutoff 2\nstate fock 0 1\nbs a b\nmeasure\n",
            "modes 4\ncutoff 2\nstate fock 0 1 0 1\nbs c d\nbs a b\nkerr b c pi\nbs a b -pi/4\nphase a pi\nadjoint {\n  bs a b\n  kerr b c pi\n  bs a b -pi/4\n}\nbs c d -pi/4\nmeasure\n",
            "modes 4\ncutoff 16\nstate coherent b 1\nstate coherent d 1\nbs c d\n",
            "modes 3\ncutoff 3\nfredkin a b c\nadjoint {\n  adjoint {\n    bs a b pi/3\n  }\n}\n",
        ];
        for text in texts {
            let p = parse_ok(text);
            let printed = p.to_string();
            let q = parse_ok(&printed);
            assert_eq!(p, q, "round trip changed the program:\n{printed}");
        }
    }

    #[test]
    fn fredkin_statement_executes() {
        // F|101> = -|011>: counting sees the exchanged occupations
        let p = parse_ok("modes 3\ncutoff 2\nstate fock 1 0 1\nfredkin a b c\nmeasure\n");
        let dist = p.execute().unwrap().distribution.unwrap();
        assert!((dist.prob(&[0, 1, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn execution_enforces_coherent_tail_bound() {
        let p = parse_ok("modes 1\ncutoff 4\nstate coherent a 3\nmeasure\n");
        match p.execute() {
            Err(NetlistError::Eval(SimError::CutoffTooSmall { required, .. })) => {
                assert!(required > 4)
            }
            other => panic!("expected a cutoff error, got {other:?}"),
        }
    }

    // arbitrary input text never crashes the parser
    proptest! {
        #[test]
        fn parser_is_total(chars in prop::collection::vec(proptest::char::any(), 0..200)) {
            let text: String = chars.into_iter().collect();
            let _ = parse(&text);
        }
    }

    // random well-formed programs survive a print/parse round trip
    proptest! {
        #[test]
        fn roundtrip_random_programs(
            modes in 1usize..5,
            cutoff in 2usize..4,
            gates in prop::collection::vec((0usize..4, 0usize..5, 0usize..5, -3.2f64..3.2), 0..12),
            measure in prop::bool::ANY,
        ) {
            let mut body = Vec::new();
            for (kind, m1, m2, angle) in gates {
                let a = m1 % modes;
                let b = (a + 1 + m2 % modes.max(2)) % modes;
                let stmt = match kind {
                    0 => Stmt::Gate(NetGate::Phase { mode: a, phi: angle }),
                    1 if modes >= 2 && a != b => Stmt::Gate(NetGate::Bs { a, b, theta: angle }),
                    2 if modes >= 2 && a != b => Stmt::Gate(NetGate::Kerr { a, b, chi: angle }),
                    _ => Stmt::Gate(NetGate::Damp { mode: a, gamma: angle.abs() }),
                };
                body.push(stmt);
            }
            let program = NetlistProgram {
                modes,
                cutoff,
                initial: InitialState::Fock(vec![0; modes]),
                body,
                measure,
            };
            let printed = program.to_string();
            let reparsed = parse(&printed).expect("printed program must parse");
            prop_assert_eq!(program, reparsed);
        }
    }
}
