use num_traits::ToPrimitive;

use super::lexer::{is_keyword, lex, Tok, Token};
use super::DslError;
use crate::dataterm::DataTerm;
use crate::meadow::Quantity;
use crate::normalize::zt_leq;
use crate::tuplix::{AttrSet, Attribute, Tuplix};

/// Parsed term before references, `let` and `select` are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Surface {
    Empty,
    Null,
    Entry(Attribute, DataTerm),
    Test(DataTerm),
    TVar(String),
    Ref(String, usize, usize),
    Conj(Box<Surface>, Box<Surface>),
    Choice(Box<Surface>, Box<Surface>),
    Sum(String, Box<Surface>),
    Let(String, DataTerm, Box<Surface>),
    Scalar(DataTerm, Box<Surface>),
    Clear(AttrSet, Box<Surface>),
    Encap(AttrSet, Box<Surface>),
    Select(AttrSet, Box<Surface>),
}

pub(crate) struct RawDef {
    pub name: String,
    pub body: Surface,
    pub line: usize,
    pub col: usize,
}

type PResult<T> = Result<T, DslError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(DslError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(n) => format!("`{}`", n),
            Tok::Sym(c) => format!("`{}`", c),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn at_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.at_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{}`, found {}", c, self.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{}`, found {}", kw, self.describe()))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected {}, found {}", what, self.describe())),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn file(&mut self) -> PResult<Vec<RawDef>> {
        let mut defs = Vec::new();
        while !self.at_eof() {
            self.expect_kw("def")?;
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            let name = self.name("a definition name")?;
            self.expect_sym('=')?;
            let body = self.term()?;
            self.expect_sym(';')?;
            defs.push(RawDef {
                name,
                body,
                line,
                col,
            });
        }
        Ok(defs)
    }

    pub fn finish(&mut self) -> PResult<()> {
        if self.at_sym(';') {
            self.bump();
        }
        if self.at_eof() {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.describe()))
        }
    }

    pub fn term(&mut self) -> PResult<Surface> {
        let mut t = self.conj()?;
        while self.at_sym('+') {
            self.bump();
            let rhs = self.conj()?;
            t = Surface::Choice(Box::new(t), Box::new(rhs));
        }
        Ok(t)
    }

    fn conj(&mut self) -> PResult<Surface> {
        let mut t = self.prefix()?;
        while self.at_sym('&') {
            self.bump();
            let rhs = self.prefix()?;
            t = Surface::Conj(Box::new(t), Box::new(rhs));
        }
        Ok(t)
    }

    fn attr_set(&mut self) -> PResult<AttrSet> {
        self.expect_sym('{')?;
        let mut set = AttrSet::new();
        if !self.at_sym('}') {
            loop {
                set.insert(Attribute::new(self.name("an attribute")?));
                if self.at_sym(',') {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym('}')?;
        Ok(set)
    }

    fn prefix(&mut self) -> PResult<Surface> {
        if self.at_kw("sum") {
            self.bump();
            let u = self.name("a variable")?;
            self.expect_sym('.')?;
            return Ok(Surface::Sum(u, Box::new(self.prefix()?)));
        }
        if self.at_kw("let") {
            self.bump();
            let u = self.name("a variable")?;
            self.expect_sym('=')?;
            let p = self.dexpr()?;
            self.expect_kw("in")?;
            return Ok(Surface::Let(u, p, Box::new(self.prefix()?)));
        }
        for kw in ["clear", "encap", "select"] {
            if self.at_kw(kw) {
                self.bump();
                let set = self.attr_set()?;
                let body = Box::new(self.prefix()?);
                return Ok(match kw {
                    "clear" => Surface::Clear(set, body),
                    "encap" => Surface::Encap(set, body),
                    _ => Surface::Select(set, body),
                });
            }
        }
        let save = self.pos;
        if let Ok(p) = self.product() {
            if self.at_sym('*') {
                self.bump();
                return Ok(Surface::Scalar(p, Box::new(self.prefix()?)));
            }
        }
        self.pos = save;
        self.atom()
    }

    fn atom(&mut self) -> PResult<Surface> {
        match self.peek().clone() {
            Tok::Sym('(') => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(')')?;
                Ok(t)
            }
            Tok::Sym('$') => {
                self.bump();
                Ok(Surface::TVar(self.name("a tuplix variable")?))
            }
            Tok::Sym('@') => {
                let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
                self.bump();
                Ok(Surface::Ref(self.name("a definition name")?, line, col))
            }
            Tok::Ident(s) => match s.as_str() {
                "eps" => {
                    self.bump();
                    Ok(Surface::Empty)
                }
                "delta" => {
                    self.bump();
                    Ok(Surface::Null)
                }
                "test" | "ntest" => {
                    self.bump();
                    self.expect_sym('(')?;
                    let p = self.dexpr()?;
                    self.expect_sym(')')?;
                    Ok(if s == "test" {
                        Surface::Test(p)
                    } else {
                        match Tuplix::ntest(p) {
                            Tuplix::Test(q) => Surface::Test(q),
                            _ => unreachable!(),
                        }
                    })
                }
                "leq" => {
                    self.bump();
                    self.expect_sym('(')?;
                    let p = self.dexpr()?;
                    self.expect_sym(',')?;
                    let q = self.dexpr()?;
                    self.expect_sym(')')?;
                    Ok(Surface::Test(zt_leq(p, q)))
                }
                _ if !is_keyword(&s) && *self.peek_at(1) == Tok::Sym('(') => {
                    self.bump();
                    self.bump();
                    let p = self.dexpr()?;
                    self.expect_sym(')')?;
                    Ok(Surface::Entry(Attribute::new(s), p))
                }
                _ => self.error(format!("expected a tuplix term, found {}", self.describe())),
            },
            _ => self.error(format!("expected a tuplix term, found {}", self.describe())),
        }
    }

    pub fn dexpr(&mut self) -> PResult<DataTerm> {
        let mut p = self.product()?;
        loop {
            if self.at_sym('+') {
                self.bump();
                p = DataTerm::add(p, self.product()?);
            } else if self.at_sym('-') {
                self.bump();
                p = DataTerm::sub(p, self.product()?);
            } else {
                return Ok(p);
            }
        }
    }

    /// Stops before a `*` or `/` whose right operand is not a data factor,
    /// so that `2 * a(1)` leaves `* a(1)` to the scalar prefix.
    fn product(&mut self) -> PResult<DataTerm> {
        let mut p = self.unary()?;
        loop {
            let div = if self.at_sym('*') {
                false
            } else if self.at_sym('/') {
                true
            } else {
                return Ok(p);
            };
            let save = self.pos;
            self.bump();
            match self.unary() {
                Ok(q) if div => p = DataTerm::div(p, q),
                Ok(q) => p = DataTerm::mul(p, q),
                Err(e) if div => return Err(e),
                Err(_) => {
                    self.pos = save;
                    return Ok(p);
                }
            }
        }
    }

    fn unary(&mut self) -> PResult<DataTerm> {
        if self.at_sym('-') {
            self.bump();
            return Ok(DataTerm::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<DataTerm> {
        let base = self.primary()?;
        if !self.at_sym('^') {
            return Ok(base);
        }
        self.bump();
        let k = match self.peek().clone() {
            Tok::Int(n) => n,
            _ => return self.error(format!("expected an exponent, found {}", self.describe())),
        };
        let Some(k) = k.to_u32().filter(|k| *k <= 64) else {
            return self.error("exponent too large");
        };
        self.bump();
        Ok(DataTerm::pow(base, k))
    }

    fn primary(&mut self) -> PResult<DataTerm> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(DataTerm::konst(Quantity::from_bigint(n)))
            }
            Tok::Sym('(') => {
                self.bump();
                let p = self.dexpr()?;
                self.expect_sym(')')?;
                Ok(p)
            }
            Tok::Ident(s) if s == "inv" || s == "abs" => {
                self.bump();
                self.expect_sym('(')?;
                let p = self.dexpr()?;
                self.expect_sym(')')?;
                Ok(if s == "inv" {
                    DataTerm::inv(p)
                } else {
                    DataTerm::abs(p)
                })
            }
            Tok::Ident(s) if !is_keyword(&s) && *self.peek_at(1) != Tok::Sym('(') => {
                self.bump();
                Ok(DataTerm::var(s))
            }
            _ => self.error(format!("expected a data term, found {}", self.describe())),
        }
    }
}

pub(crate) fn parse_data(text: &str) -> PResult<DataTerm> {
    let mut p = Parser::new(text)?;
    let d = p.dexpr()?;
    if !p.at_eof() {
        return p.error(format!("unexpected {}", p.describe()));
    }
    Ok(d)
}
