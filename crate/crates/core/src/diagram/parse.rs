//! Parser for the textual model format.
//!
//! ```text
//! object Coin = { H, T }
//! object Bit  = { 0, 1 }
//! state prior : Coin = { H: 0.5, T: 0.5 }
//! kernel f : Coin -> Bit = { H -> { 0: 0.9, 1: 0.1 }, T -> { 0: 0.2, 1: 0.8 } }
//! diagram post : I -> Coin = prior ; copy[Coin] ; (id[Coin] * (f ; observe[Bit = 0]))
//! ```
//!
//! `#` starts a line comment. In terms `*` binds tighter than `;` and both
//! associate to the left. Besides `NAME` and `(NAME, ...)`, a label may be
//! written `()`, which is the single label of the unit `I`; this is how
//! predicates `Y -> I` are declared.

use std::fmt;

use super::model::{Model, ModelError};
use super::term::Term;
use crate::error::Error;
use crate::kernel::SubKernel;
use crate::object::{render_label, Atom, FinObject, Label};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Every error found while reading a model, in source order.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ParseErrors(pub Vec<SyntaxError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

fn lex(text: &str, errors: &mut Vec<SyntaxError>) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token {
                tok: Tok::Arrow,
                line: tl,
                col: tc,
            });
            i += 2;
            col += 2;
            continue;
        }
        let starts_negative = c == '-'
            && chars
                .get(i + 1)
                .is_some_and(|d| d.is_ascii_digit() || *d == '.');
        if is_word_char(c) || starts_negative {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exponent_sign = matches!(d, '+' | '-')
                    && matches!(chars[i - 1], 'e' | 'E')
                    && chars[start..i]
                        .iter()
                        .next()
                        .is_some_and(|s| s.is_ascii_digit() || *s == '.' || *s == '-')
                    && chars.get(i + 1).is_some_and(char::is_ascii_digit);
                if is_word_char(d) || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Word(word),
                line: tl,
                col: tc,
            });
            continue;
        }
        if "={}:,()*;[]".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
        } else {
            errors.push(SyntaxError {
                line: tl,
                col: tc,
                message: format!("unexpected character `{c}`"),
            });
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    out
}

const STATEMENTS: [&str; 4] = ["object", "kernel", "state", "diagram"];
const PRIMITIVES: [&str; 6] = ["id", "copy", "discard", "swap", "compare", "observe"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    model: Model,
    errors: Vec<SyntaxError>,
}

type PResult<T> = Result<T, SyntaxError>;

/// Parses a model, collecting every syntax and validation error.
pub fn parse(text: &str) -> Result<Model, ParseErrors> {
    let mut errors = Vec::new();
    let toks = lex(text, &mut errors);
    let mut p = Parser {
        toks,
        pos: 0,
        model: Model::new(),
        errors,
    };
    while p.peek() != &Tok::Eof {
        if let Err(e) = p.statement() {
            p.errors.push(e);
            p.recover();
        }
    }
    if p.errors.is_empty() {
        Ok(p.model)
    } else {
        p.errors.sort_by_key(|e| (e.line, e.col));
        Err(ParseErrors(p.errors))
    }
}

/// Parses a single term against the names declared in `model`.
pub fn parse_term(text: &str, model: &Model) -> Result<Term, ParseErrors> {
    let mut errors = Vec::new();
    let toks = lex(text, &mut errors);
    let mut p = Parser {
        toks,
        pos: 0,
        model: model.clone(),
        errors,
    };
    match p.term_seq() {
        Ok(t) if p.errors.is_empty() && p.peek() == &Tok::Eof => Ok(t),
        Ok(_) if p.errors.is_empty() => Err(ParseErrors(vec![p.error_here(format!(
            "expected end of term, found {}",
            Parser::describe(p.peek())
        ))])),
        Ok(_) => Err(ParseErrors(p.errors)),
        Err(e) => {
            p.errors.push(e);
            Err(ParseErrors(p.errors))
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError {
            line,
            col,
            message: message.into(),
        }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn advance(&mut self) {
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
    }

    fn recover(&mut self) {
        self.advance();
        while !matches!(self.peek(), Tok::Eof) {
            if let Tok::Word(w) = self.peek() {
                if STATEMENTS.contains(&w.as_str()) {
                    return;
                }
            }
            self.advance();
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Sym(c) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected `{c}`, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    fn expect_arrow(&mut self) -> PResult<()> {
        if self.peek() == &Tok::Arrow {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected `->`, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    fn expect_word(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.advance();
                Ok(w)
            }
            other => {
                Err(self.error_here(format!("expected {what}, found {}", Self::describe(&other))))
            }
        }
    }

    fn semantic(&mut self, at: (usize, usize), message: impl Into<String>) {
        self.errors.push(SyntaxError {
            line: at.0,
            col: at.1,
            message: message.into(),
        });
    }

    fn statement(&mut self) -> PResult<()> {
        let at = self.here();
        let keyword = self.expect_word("a statement")?;
        match keyword.as_str() {
            "object" => self.object_stmt(at),
            "kernel" => self.kernel_stmt(at),
            "state" => self.state_stmt(at),
            "diagram" => self.diagram_stmt(at),
            other => Err(SyntaxError {
                line: at.0,
                col: at.1,
                message: format!(
                    "expected `object`, `kernel`, `state` or `diagram`, found `{other}`"
                ),
            }),
        }
    }

    fn object_stmt(&mut self, at: (usize, usize)) -> PResult<()> {
        let name = self.expect_word("an object name")?;
        if name == "I" {
            return Err(SyntaxError {
                line: at.0,
                col: at.1,
                message: "`I` is reserved for the unit object".into(),
            });
        }
        self.expect_sym('=')?;
        self.expect_sym('{')?;
        let mut labels = vec![self.expect_word("a label")?];
        while self.eat_sym(',') {
            labels.push(self.expect_word("a label")?);
        }
        self.expect_sym('}')?;
        match Atom::new(name.clone(), labels) {
            Ok(atom) => {
                if let Err(e) = self.model.add_object(&name, FinObject::from_atom(atom)) {
                    self.semantic(at, e.to_string());
                }
            }
            Err(e) => self.semantic(at, e.to_string()),
        }
        Ok(())
    }

    fn obj_expr(&mut self) -> PResult<FinObject> {
        let mut obj = self.obj_factor()?;
        while self.peek() == &Tok::Sym('*') {
            self.advance();
            obj = obj.tensor(&self.obj_factor()?);
        }
        Ok(obj)
    }

    fn obj_factor(&mut self) -> PResult<FinObject> {
        let at = self.here();
        let name = self.expect_word("an object")?;
        if name == "I" {
            return Ok(FinObject::unit());
        }
        self.model.object(&name).cloned().ok_or(SyntaxError {
            line: at.0,
            col: at.1,
            message: format!("unknown object `{name}`"),
        })
    }

    fn label_tuple(&mut self) -> PResult<Label> {
        if self.eat_sym('(') {
            let mut parts = Vec::new();
            if !self.eat_sym(')') {
                parts.push(self.expect_word("a label")?);
                while self.eat_sym(',') {
                    parts.push(self.expect_word("a label")?);
                }
                self.expect_sym(')')?;
            }
            Ok(parts)
        } else {
            Ok(vec![self.expect_word("a label")?])
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let at = self.here();
        let w = self.expect_word("a number")?;
        w.parse::<f64>().map_err(|_| SyntaxError {
            line: at.0,
            col: at.1,
            message: format!("expected a number, found `{w}`"),
        })
    }

    /// `{ label: w, ... }` into a row of `cod`.
    fn weights(&mut self, cod: &FinObject, row: &mut [f64]) -> PResult<()> {
        self.expect_sym('{')?;
        let mut seen = vec![false; row.len()];
        loop {
            if self.eat_sym('}') {
                return Ok(());
            }
            let at = self.here();
            let label = self.label_tuple()?;
            self.expect_sym(':')?;
            let w = self.number()?;
            match cod.index_of(&label) {
                Some(i) if seen[i] => {
                    self.semantic(at, format!("duplicate output `{}`", render_label(&label)))
                }
                Some(i) => {
                    seen[i] = true;
                    row[i] = w;
                }
                None => self.semantic(
                    at,
                    format!(
                        "label `{}` does not belong to `{cod}`",
                        render_label(&label)
                    ),
                ),
            }
            if !self.eat_sym(',') {
                self.expect_sym('}')?;
                return Ok(());
            }
        }
    }

    fn finish_kernel(
        &mut self,
        at: (usize, usize),
        what: &str,
        name: &str,
        dom: FinObject,
        cod: FinObject,
        weights: Vec<f64>,
    ) -> Option<SubKernel> {
        match SubKernel::new(dom.clone(), cod, weights) {
            Ok(k) => Some(k),
            Err(Error::RowOverflow { row, sum }) => {
                self.semantic(
                    at,
                    format!(
                        "{what} `{name}`: row `{}` sums to {sum}, more than 1",
                        dom.render_label(row)
                    ),
                );
                None
            }
            Err(e) => {
                self.semantic(at, format!("{what} `{name}`: {e}"));
                None
            }
        }
    }

    fn kernel_stmt(&mut self, at: (usize, usize)) -> PResult<()> {
        let name = self.expect_word("a kernel name")?;
        self.expect_sym(':')?;
        let dom = self.obj_expr()?;
        self.expect_arrow()?;
        let cod = self.obj_expr()?;
        self.expect_sym('=')?;
        self.expect_sym('{')?;
        let cols = cod.size();
        let mut weights = vec![0.0; dom.size() * cols];
        let mut seen = vec![false; dom.size()];
        loop {
            if self.eat_sym('}') {
                break;
            }
            let row_at = self.here();
            let label = self.label_tuple()?;
            self.expect_arrow()?;
            let mut row = vec![0.0; cols];
            self.weights(&cod, &mut row)?;
            match dom.index_of(&label) {
                Some(x) if seen[x] => {
                    self.semantic(row_at, format!("duplicate row `{}`", render_label(&label)))
                }
                Some(x) => {
                    seen[x] = true;
                    weights[x * cols..(x + 1) * cols].copy_from_slice(&row);
                }
                None => self.semantic(
                    row_at,
                    format!(
                        "label `{}` does not belong to `{dom}`",
                        render_label(&label)
                    ),
                ),
            }
            if !self.eat_sym(',') {
                self.expect_sym('}')?;
                break;
            }
        }
        if let Some(k) = self.finish_kernel(at, "kernel", &name, dom, cod, weights) {
            if let Err(e) = self.model.add_kernel(&name, k) {
                self.semantic(at, e.to_string());
            }
        }
        Ok(())
    }

    fn state_stmt(&mut self, at: (usize, usize)) -> PResult<()> {
        let name = self.expect_word("a state name")?;
        self.expect_sym(':')?;
        let cod = self.obj_expr()?;
        self.expect_sym('=')?;
        let mut row = vec![0.0; cod.size()];
        self.weights(&cod, &mut row)?;
        if let Some(k) = self.finish_kernel(at, "state", &name, FinObject::unit(), cod, row) {
            if let Err(e) = self.model.add_state(&name, k) {
                self.semantic(at, e.to_string());
            }
        }
        Ok(())
    }

    fn diagram_stmt(&mut self, at: (usize, usize)) -> PResult<()> {
        let name = self.expect_word("a diagram name")?;
        self.expect_sym(':')?;
        let dom = self.obj_expr()?;
        self.expect_arrow()?;
        let cod = self.obj_expr()?;
        self.expect_sym('=')?;
        let term = self.term_seq()?;
        if let Err(e) = self.model.add_diagram(&name, dom, cod, term) {
            let message = match e {
                ModelError::Type(t) => format!("diagram `{name}`: {t}"),
                other => other.to_string(),
            };
            self.semantic(at, message);
        }
        Ok(())
    }

    fn term_seq(&mut self) -> PResult<Term> {
        let mut t = self.term_par()?;
        while self.eat_sym(';') {
            t = Term::seq(t, self.term_par()?);
        }
        Ok(t)
    }

    fn term_par(&mut self) -> PResult<Term> {
        let mut t = self.term_atom()?;
        while self.eat_sym('*') {
            t = Term::par(t, self.term_atom()?);
        }
        Ok(t)
    }

    fn term_atom(&mut self) -> PResult<Term> {
        if self.eat_sym('(') {
            let t = self.term_seq()?;
            self.expect_sym(')')?;
            return Ok(t);
        }
        let at = self.here();
        let word = self.expect_word("a term")?;
        if PRIMITIVES.contains(&word.as_str()) && self.peek() == &Tok::Sym('[') {
            self.advance();
            let t = match word.as_str() {
                "id" => Term::Id(self.obj_expr()?),
                "copy" => Term::Copy(self.obj_expr()?),
                "discard" => Term::Discard(self.obj_expr()?),
                "compare" => Term::Compare(self.obj_expr()?),
                "swap" => {
                    let x = self.obj_expr()?;
                    self.expect_sym(',')?;
                    Term::Swap(x, self.obj_expr()?)
                }
                _ => {
                    let x = self.obj_expr()?;
                    self.expect_sym('=')?;
                    let label_at = self.here();
                    let label = self.label_tuple()?;
                    if x.index_of(&label).is_none() {
                        return Err(SyntaxError {
                            line: label_at.0,
                            col: label_at.1,
                            message: format!(
                                "label `{}` does not belong to `{x}`",
                                render_label(&label)
                            ),
                        });
                    }
                    Term::Observe(x, label)
                }
            };
            self.expect_sym(']')?;
            return Ok(t);
        }
        if self.model.boundary(&word).is_none() {
            return Err(SyntaxError {
                line: at.0,
                col: at.1,
                message: format!("unknown generator `{word}`"),
            });
        }
        Ok(Term::Gen(word))
    }
}
