//! Frontend parser for the input language: an SMT-LIB 2.6 subset over the
//! reals with transcendental function symbols as an extension.
//!
//! Grammar (documented in the README): `(set-logic QF_NRA)`, `declare-const`
//! with sort `Real`, `assert` over `and or not < <= > >= = distinct + - * /
//! sin cos exp log pow sqrt`, decimal and `(/ p q)` rational literals,
//! `check-sat`, `get-model`, `exit`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::num::Rational;
use crate::term::{Rel, SymbolTable, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Boolean structure of an assertion; atoms are `term rel 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolExpr {
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Not(Box<BoolExpr>),
    Atom(Rel, Term),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    CheckSat,
    GetModel,
    Exit,
}

/// Parsed input problem.
#[derive(Clone, Debug)]
pub struct InputScript {
    pub symbols: SymbolTable,
    pub assertions: Vec<BoolExpr>,
    pub commands: Vec<Command>,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Sym(String),
    Numeral(BigInt),
    Decimal(Rational),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

fn is_symbol_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || b"~!@$%^&*_-+=<>.?/".contains(&c)
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize, usize)>, ParseError> {
        loop {
            match self.peek() {
                None => return Ok(None),
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(c) = self.bump() {
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.peek().unwrap();
        if c == b'(' {
            self.bump();
            return Ok(Some((Tok::LParen, line, col)));
        }
        if c == b')' {
            self.bump();
            return Ok(Some((Tok::RParen, line, col)));
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    digits.push(c as char);
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek() == Some(b'.') {
                self.bump();
                let mut frac = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        frac.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if frac.is_empty() {
                    return Err(self.err("expected digits after decimal point"));
                }
                let scale = BigInt::from(10u32).pow(frac.len() as u32);
                let whole: BigInt = digits.parse().unwrap();
                let frac_int: BigInt = frac.parse().unwrap();
                let q = Rational::new(whole * &scale + frac_int, scale);
                return Ok(Some((Tok::Decimal(q), line, col)));
            }
            return Ok(Some((Tok::Numeral(digits.parse().unwrap()), line, col)));
        }
        if is_symbol_char(c) {
            let mut s = String::new();
            while let Some(c) = self.peek() {
                if is_symbol_char(c) {
                    s.push(c as char);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Some((Tok::Sym(s), line, col)));
        }
        Err(self.err(format!("unexpected character '{}'", c as char)))
    }
}

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum SExpr {
    Sym(String, usize, usize),
    Num(BigInt, usize, usize),
    Dec(Rational, usize, usize),
    List(Vec<SExpr>, usize, usize),
}

impl SExpr {
    fn pos(&self) -> (usize, usize) {
        match self {
            SExpr::Sym(_, l, c) | SExpr::Num(_, l, c) | SExpr::Dec(_, l, c) | SExpr::List(_, l, c) => {
                (*l, *c)
            }
        }
    }
}

fn err_at(e: &SExpr, msg: impl Into<String>) -> ParseError {
    let (line, col) = e.pos();
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

fn parse_sexprs(src: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut lx = Lexer::new(src);
    let mut stack: Vec<(Vec<SExpr>, usize, usize)> = Vec::new();
    let mut top: Vec<SExpr> = Vec::new();
    loop {
        let Some((tok, line, col)) = lx.next_token()? else {
            if let Some((_, l, c)) = stack.last() {
                return Err(ParseError {
                    line: *l,
                    col: *c,
                    msg: "unclosed '(' at end of input".into(),
                });
            }
            return Ok(top);
        };
        let item = match tok {
            Tok::LParen => {
                stack.push((Vec::new(), line, col));
                continue;
            }
            Tok::RParen => {
                let Some((items, l, c)) = stack.pop() else {
                    return Err(ParseError {
                        line,
                        col,
                        msg: "unmatched ')'".into(),
                    });
                };
                SExpr::List(items, l, c)
            }
            Tok::Sym(s) => SExpr::Sym(s, line, col),
            Tok::Numeral(n) => SExpr::Num(n, line, col),
            Tok::Decimal(q) => SExpr::Dec(q, line, col),
        };
        match stack.last_mut() {
            Some((items, _, _)) => items.push(item),
            None => top.push(item),
        }
    }
}

// ---------------------------------------------------------------------------
// Script parsing
// ---------------------------------------------------------------------------

/// Parses an input problem from text. Rational literals (decimal or
/// `(/ p q)`) are represented exactly.
pub fn parse(text: &str) -> Result<InputScript, ParseError> {
    let exprs = parse_sexprs(text)?;
    let mut script = InputScript {
        symbols: SymbolTable::new(),
        assertions: Vec::new(),
        commands: Vec::new(),
    };
    let mut logic_seen = false;
    for e in &exprs {
        let SExpr::List(items, line, col) = e else {
            return Err(err_at(e, "expected a command list"));
        };
        let Some(SExpr::Sym(head, ..)) = items.first() else {
            return Err(ParseError {
                line: *line,
                col: *col,
                msg: "empty or malformed command".into(),
            });
        };
        match head.as_str() {
            "set-logic" => {
                match items.get(1) {
                    Some(SExpr::Sym(l, ..)) if l == "QF_NRA" => logic_seen = true,
                    Some(other) => return Err(err_at(other, "unsupported logic (expected QF_NRA)")),
                    None => return Err(err_at(e, "set-logic needs an argument")),
                }
                if items.len() != 2 {
                    return Err(err_at(e, "set-logic takes one argument"));
                }
            }
            "declare-const" => {
                if items.len() != 3 {
                    return Err(err_at(e, "declare-const takes a name and a sort"));
                }
                let SExpr::Sym(name, ..) = &items[1] else {
                    return Err(err_at(&items[1], "expected a variable name"));
                };
                match &items[2] {
                    SExpr::Sym(s, ..) if s == "Real" => {}
                    other => return Err(err_at(other, "only sort Real is supported")),
                }
                if script.symbols.lookup(name).is_some() {
                    return Err(err_at(&items[1], format!("variable '{name}' redeclared")));
                }
                script.symbols.intern(name);
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(err_at(e, "assert takes one formula"));
                }
                let f = parse_bool(&items[1], &script.symbols)?;
                script.assertions.push(f);
            }
            "check-sat" => script.commands.push(Command::CheckSat),
            "get-model" => script.commands.push(Command::GetModel),
            "exit" => script.commands.push(Command::Exit),
            other => {
                return Err(ParseError {
                    line: *line,
                    col: *col,
                    msg: format!("unsupported command '{other}'"),
                })
            }
        }
    }
    let _ = logic_seen; // a missing set-logic is tolerated
    Ok(script)
}

fn parse_bool(e: &SExpr, symbols: &SymbolTable) -> Result<BoolExpr, ParseError> {
    match e {
        SExpr::List(items, line, col) => {
            let Some(SExpr::Sym(head, ..)) = items.first() else {
                return Err(ParseError {
                    line: *line,
                    col: *col,
                    msg: "expected an operator".into(),
                });
            };
            let args = &items[1..];
            match head.as_str() {
                "and" | "or" => {
                    if args.is_empty() {
                        return Err(err_at(e, format!("'{head}' needs arguments")));
                    }
                    let parsed: Result<Vec<_>, _> =
                        args.iter().map(|a| parse_bool(a, symbols)).collect();
                    let parsed = parsed?;
                    Ok(if head == "and" {
                        BoolExpr::And(parsed)
                    } else {
                        BoolExpr::Or(parsed)
                    })
                }
                "not" => {
                    if args.len() != 1 {
                        return Err(err_at(e, "'not' takes one argument"));
                    }
                    Ok(BoolExpr::Not(Box::new(parse_bool(&args[0], symbols)?)))
                }
                "<" | "<=" | ">" | ">=" | "=" => {
                    if args.len() < 2 {
                        return Err(err_at(e, format!("'{head}' needs two arguments")));
                    }
                    let rel = match head.as_str() {
                        "<" => Rel::Lt,
                        "<=" => Rel::Le,
                        ">" => Rel::Gt,
                        ">=" => Rel::Ge,
                        _ => Rel::Eq,
                    };
                    let terms: Result<Vec<_>, _> =
                        args.iter().map(|a| parse_term(a, symbols)).collect();
                    let terms = terms?;
                    // chained relations are conjunctions of adjacent pairs
                    let mut conj = Vec::new();
                    for w in terms.windows(2) {
                        conj.push(BoolExpr::Atom(rel, Term::sub(w[0].clone(), w[1].clone())));
                    }
                    Ok(if conj.len() == 1 {
                        conj.pop().unwrap()
                    } else {
                        BoolExpr::And(conj)
                    })
                }
                "distinct" => {
                    if args.len() < 2 {
                        return Err(err_at(e, "'distinct' needs two arguments"));
                    }
                    let terms: Result<Vec<_>, _> =
                        args.iter().map(|a| parse_term(a, symbols)).collect();
                    let terms = terms?;
                    let mut conj = Vec::new();
                    for i in 0..terms.len() {
                        for j in i + 1..terms.len() {
                            conj.push(BoolExpr::Atom(
                                Rel::Ne,
                                Term::sub(terms[i].clone(), terms[j].clone()),
                            ));
                        }
                    }
                    Ok(if conj.len() == 1 {
                        conj.pop().unwrap()
                    } else {
                        BoolExpr::And(conj)
                    })
                }
                _ => Err(err_at(e, format!("unsupported boolean operator '{head}'"))),
            }
        }
        _ => Err(err_at(e, "expected a formula")),
    }
}

fn parse_term(e: &SExpr, symbols: &SymbolTable) -> Result<Term, ParseError> {
    match e {
        SExpr::Num(n, ..) => Ok(Term::constant(Rational::from_integer(n.clone()))),
        SExpr::Dec(q, ..) => Ok(Term::constant(q.clone())),
        SExpr::Sym(name, ..) => match symbols.lookup(name) {
            Some(v) => Ok(Term::var(v)),
            None => Err(err_at(e, format!("undeclared variable '{name}'"))),
        },
        SExpr::List(items, line, col) => {
            let Some(SExpr::Sym(head, ..)) = items.first() else {
                return Err(ParseError {
                    line: *line,
                    col: *col,
                    msg: "expected a term operator".into(),
                });
            };
            let args = &items[1..];
            let sub = |i: usize| parse_term(&args[i], symbols);
            match head.as_str() {
                "+" => {
                    if args.is_empty() {
                        return Err(err_at(e, "'+' needs arguments"));
                    }
                    let mut acc = sub(0)?;
                    for i in 1..args.len() {
                        acc = Term::add(acc, sub(i)?);
                    }
                    Ok(acc)
                }
                "-" => match args.len() {
                    0 => Err(err_at(e, "'-' needs arguments")),
                    1 => Ok(Term::neg(sub(0)?)),
                    _ => {
                        let mut acc = sub(0)?;
                        for i in 1..args.len() {
                            acc = Term::sub(acc, sub(i)?);
                        }
                        Ok(acc)
                    }
                },
                "*" => {
                    if args.is_empty() {
                        return Err(err_at(e, "'*' needs arguments"));
                    }
                    let mut acc = sub(0)?;
                    for i in 1..args.len() {
                        acc = Term::mul(acc, sub(i)?);
                    }
                    Ok(acc)
                }
                "/" => {
                    if args.len() != 2 {
                        return Err(err_at(e, "'/' takes two arguments"));
                    }
                    Ok(Term::div(sub(0)?, sub(1)?))
                }
                "sin" | "cos" | "exp" | "log" | "sqrt" => {
                    if args.len() != 1 {
                        return Err(err_at(e, format!("'{head}' takes one argument")));
                    }
                    let a = sub(0)?;
                    Ok(match head.as_str() {
                        "sin" => Term::sin(a),
                        "cos" => Term::cos(a),
                        "exp" => Term::exp(a),
                        "log" => Term::log(a),
                        _ => Term::sqrt(a),
                    })
                }
                "pow" => {
                    if args.len() != 2 {
                        return Err(err_at(e, "'pow' takes two arguments"));
                    }
                    let base = sub(0)?;
                    let exp_term = sub(1)?;
                    let Term::Const(q) = &exp_term else {
                        return Err(err_at(&args[1], "'pow' exponent must be an integer constant"));
                    };
                    if !q.denom().eq(&BigInt::from(1)) {
                        return Err(err_at(&args[1], "'pow' exponent must be an integer constant"));
                    }
                    let n = i32::try_from(q.numer())
                        .ok()
                        .filter(|n| n.abs() <= 4096)
                        .ok_or_else(|| err_at(&args[1], "'pow' exponent out of range"))?;
                    Ok(Term::pow(base, n))
                }
                _ => Err(err_at(e, format!("unsupported function '{head}'"))),
            }
        }
    }
}

impl std::fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoolExpr::And(xs) => {
                write!(f, "(and")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            BoolExpr::Or(xs) => {
                write!(f, "(or")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            BoolExpr::Not(x) => write!(f, "(not {x})"),
            BoolExpr::Atom(rel, t) => write!(f, "({} {t:?} 0)", rel.symbol()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::term::VarId;

    #[test]
    fn parse_simple_script() {
        let s = parse("(declare-const x Real)(assert (>= x 1))(check-sat)").unwrap();
        assert_eq!(s.assertions.len(), 1);
        assert_eq!(s.commands, vec![Command::CheckSat]);
        // x - 1 >= 0
        match &s.assertions[0] {
            BoolExpr::Atom(Rel::Ge, t) => {
                let alpha = crate::term::Assignment::from_pairs([(VarId(0), rat(1, 1))]);
                assert_eq!(t.eval_exact(&alpha), Some(rat(0, 1)));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn parse_fig_conjuncts() {
        let text = r#"
(set-logic QF_NRA)
(declare-const x Real)
(declare-const y Real)
(assert (<= y (/ 1 x)))
(assert (<= (+ (/ x 4) 1) y))
(assert (<= y (* 4 (- x 1))))
(assert (or (<= x (/ 12 19)) (<= y (/ 19 12))))
(assert (or (<= x (/ 220 223)) (<= y (/ 223 220))))
(assert (and (<= (/ 4 3) x) (<= x (/ 220 223))))
(assert (<= (/ 4 3) (/ 220 223)))
(check-sat)
"#;
        let s = parse(text).unwrap();
        assert_eq!(s.assertions.len(), 7);
        assert_eq!(s.symbols.len(), 2);
        // the first assertion contains a genuine division by a variable
        assert!(format!("{}", s.assertions[0]).contains("Div"));
    }

    #[test]
    fn parse_errors() {
        let e = parse("(assert (>= x").unwrap_err();
        assert!(e.msg.contains("unclosed") || e.msg.contains("unexpected"));
        let e = parse("(declare-const x Real)(assert (>= y 1))").unwrap_err();
        assert!(e.msg.contains("undeclared"));
        let e = parse("(declare-const x Int)").unwrap_err();
        assert!(e.msg.contains("Real"));
        let e = parse("(declare-const x Real)(assert (pow x x))").unwrap_err();
        assert!(e.msg.contains("exponent"));
    }

    #[test]
    fn literals_parse_exactly() {
        let s = parse("(declare-const x Real)(assert (= x 1.25))").unwrap();
        match &s.assertions[0] {
            BoolExpr::Atom(Rel::Eq, t) => {
                let alpha = crate::term::Assignment::from_pairs([(VarId(0), rat(5, 4))]);
                assert_eq!(t.eval_exact(&alpha), Some(rat(0, 1)));
            }
            other => panic!("unexpected {other:?}"),
        }
        // (/ 1 3) folds to the exact rational 1/3
        let s = parse("(declare-const x Real)(assert (>= x (/ 1 3)))").unwrap();
        match &s.assertions[0] {
            BoolExpr::Atom(Rel::Ge, t) => {
                let alpha = crate::term::Assignment::from_pairs([(VarId(0), rat(1, 3))]);
                assert_eq!(t.eval_exact(&alpha), Some(rat(0, 1)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chained_and_distinct() {
        let s = parse("(declare-const x Real)(declare-const y Real)(assert (<= 0 x y))").unwrap();
        assert!(matches!(&s.assertions[0], BoolExpr::And(v) if v.len() == 2));
        let s = parse("(declare-const x Real)(assert (distinct x 1))").unwrap();
        assert!(matches!(&s.assertions[0], BoolExpr::Atom(Rel::Ne, _)));
    }
}
