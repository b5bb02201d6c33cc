//! Recursive-descent parser. Declarations are checked and built as they are
//! read, so later statements can rely on the dimensions of earlier objects.

use num_traits::{One, Zero};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::bundle::{self, BasePoint, CommuteKind, GluePoint, GluingSet, GluingSpec, PseudoBundle, Sign3, SubspaceGluing};
use crate::dvs::{self, DVSpace};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RatMatrix};
use crate::metric::{CellPattern, PolyMatrix, Section, StratifiedSection};
use crate::pwpoly::{Monomial, OrthantPoly, PlotMap};
use crate::rat::{self, parse_rat, Rat};

/// Expression tree; positions are kept for diagnostics.
#[derive(Clone, Debug)]
enum Expr {
    Num(Rat),
    Var { letter: char, index: usize, at: (usize, usize) },
    Abs(Box<Expr>, (usize, usize)),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, (usize, usize)),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

fn split_var(name: &str) -> Option<(char, usize)> {
    let mut chars = name.chars();
    let letter = chars.next()?;
    let digits = chars.as_str();
    if !matches!(letter, 'x' | 'y' | 'v') || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: usize = digits.parse().ok()?;
    (index > 0).then_some((letter, index))
}

impl Expr {
    fn max_index(&self, letter: char) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var { letter: l, index, .. } => {
                if *l == letter {
                    *index
                } else {
                    0
                }
            }
            Expr::Abs(e, _) | Expr::Pow(e, _) | Expr::Neg(e) => e.max_index(letter),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => a.max_index(letter).max(b.max_index(letter)),
        }
    }
}

/// How variables of an expression map to polynomial variables.
struct Vars<'a> {
    dim: usize,
    resolve: &'a dyn Fn(char, usize) -> Option<usize>,
    allowed: String,
}

fn to_poly(e: &Expr, vars: &Vars) -> Result<OrthantPoly> {
    Ok(match e {
        Expr::Num(r) => OrthantPoly::constant(vars.dim, r.clone()),
        Expr::Var { letter, index, at } => match (vars.resolve)(*letter, *index) {
            Some(i) => OrthantPoly::var(vars.dim, i),
            None => return Err(Error::Parse { line: at.0, column: at.1, expected: vars.allowed.clone() }),
        },
        Expr::Abs(inner, at) => match &**inner {
            Expr::Var { .. } => {
                let v = to_poly(inner, vars)?;
                let i = v.support()[0];
                OrthantPoly::abs_var(vars.dim, i)
            }
            other => {
                return Err(Error::ParseBreakLocus { line: at.0, column: at.1, found: describe(other) });
            }
        },
        Expr::Add(a, b) => to_poly(a, vars)?.add(&to_poly(b, vars)?),
        Expr::Sub(a, b) => to_poly(a, vars)?.sub(&to_poly(b, vars)?),
        Expr::Mul(a, b) => to_poly(a, vars)?.mul(&to_poly(b, vars)?),
        Expr::Div(a, b, at) => {
            let d = to_poly(b, vars)?.as_constant().filter(|c| !c.is_zero());
            let Some(d) = d else {
                return Err(Error::Parse { line: at.0, column: at.1, expected: "a nonzero constant divisor".into() });
            };
            to_poly(a, vars)?.scale(&(Rat::one() / d))
        }
        Expr::Pow(a, n) => to_poly(a, vars)?.pow(*n),
        Expr::Neg(a) => to_poly(a, vars)?.neg(),
    })
}

fn describe(e: &Expr) -> String {
    match e {
        Expr::Num(r) => rat::fmt_rat(r),
        Expr::Var { letter, index, .. } => format!("{letter}{index}"),
        Expr::Abs(a, _) => format!("abs({})", describe(a)),
        Expr::Add(a, b) => format!("{} + {}", describe(a), describe(b)),
        Expr::Sub(a, b) => format!("{} - {}", describe(a), describe(b)),
        Expr::Mul(a, b) => format!("{}*{}", describe(a), describe(b)),
        Expr::Div(a, b, _) => format!("{}/{}", describe(a), describe(b)),
        Expr::Pow(a, n) => format!("{}^{n}", describe(a)),
        Expr::Neg(a) => format!("-{}", describe(a)),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    doc: Document,
}

fn located(t: &Token, e: Error) -> Error {
    match e {
        Error::Parse { .. } | Error::ParseBreakLocus { .. } => e,
        other => Error::Document(format!("{}:{}: {other}", t.line, t.column)),
    }
}

pub fn parse(text: &str) -> Result<Document> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, doc: Document::default() };
    loop {
        while p.peek().tok == Tok::Newline {
            p.pos += 1;
        }
        if p.peek().tok == Tok::Eof {
            break;
        }
        let item = p.statement()?;
        p.doc.items.push(item);
        match p.peek().tok {
            Tok::Newline | Tok::Eof => {}
            _ => return Err(p.error("end of statement")),
        }
    }
    Ok(p.doc)
}

const COMMANDS: [&str; 13] = [
    "dual",
    "forms",
    "pseudometric",
    "fibre",
    "dual_profile",
    "member",
    "smoothmap",
    "check_metric",
    "find_metric",
    "compatible",
    "commute",
    "glue_metric",
    "sub_gluing",
];

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        let t = self.peek();
        Error::Parse { line: t.line, column: t.column, expected: expected.into() }
    }

    fn error_at(t: &Token, expected: impl Into<String>) -> Error {
        Error::Parse { line: t.line, column: t.column, expected: expected.into() }
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<Token> {
        if self.at_sym(s) {
            Ok(self.next())
        } else {
            Err(self.error(&format!("'{s}'")))
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(i) if i == w)
    }

    fn word(&mut self, w: &str) -> Result<Token> {
        if self.at_word(w) {
            Ok(self.next())
        } else {
            Err(self.error(&format!("'{w}'")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(i) => {
                let i = i.clone();
                Ok((i, self.next()))
            }
            _ => Err(self.error(what)),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match &self.peek().tok {
            Tok::Num(n) if n.bytes().all(|b| b.is_ascii_digit()) => {
                let v = n.parse().map_err(|_| self.error("a small integer"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("an integer")),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat_sym("*") {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.at_sym("/") {
                let t = self.next();
                e = Expr::Div(Box::new(e), Box::new(self.unary()?), (t.line, t.column));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat_sym("^") {
            let n = self.int()?;
            return Ok(Expr::Pow(Box::new(base), n as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Num(parse_rat(n).ok_or_else(|| Self::error_at(&t, "a number"))?))
            }
            Tok::Ident(name) if name == "abs" => {
                self.pos += 1;
                self.sym("(")?;
                let inner = self.expr()?;
                self.sym(")")?;
                Ok(Expr::Abs(Box::new(inner), (t.line, t.column)))
            }
            Tok::Ident(name) => match split_var(name) {
                Some((letter, index)) => {
                    self.pos += 1;
                    Ok(Expr::Var { letter, index, at: (t.line, t.column) })
                }
                None => Err(self.error("a number, a variable or abs(...)")),
            },
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn tuple(&mut self) -> Result<Vec<Expr>> {
        self.sym("(")?;
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        self.sym(")")?;
        Ok(out)
    }

    fn constant(&mut self) -> Result<Rat> {
        let t = self.peek().clone();
        let e = self.expr()?;
        let vars = Vars { dim: 0, resolve: &|_, _| None, allowed: "a constant".into() };
        to_poly(&e, &vars)?.as_constant().ok_or_else(|| Self::error_at(&t, "a constant"))
    }

    fn vector(&mut self) -> Result<Vec<Rat>> {
        self.sym("[")?;
        let mut out = vec![self.constant()?];
        while self.eat_sym(",") {
            out.push(self.constant()?);
        }
        self.sym("]")?;
        Ok(out)
    }

    fn vectors(&mut self) -> Result<Vec<Vec<Rat>>> {
        let mut out = vec![self.vector()?];
        while self.eat_sym(",") {
            out.push(self.vector()?);
        }
        Ok(out)
    }

    fn expr_matrix(&mut self) -> Result<(Token, Vec<Vec<Expr>>)> {
        let start = self.sym("[")?;
        let mut rows = Vec::new();
        loop {
            self.sym("[")?;
            let mut row = vec![self.expr()?];
            while self.eat_sym(",") {
                row.push(self.expr()?);
            }
            self.sym("]")?;
            rows.push(row);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.sym("]")?;
        Ok((start, rows))
    }

    fn poly_matrix(&mut self, vars: &Vars) -> Result<(Token, PolyMatrix)> {
        let (t, rows) = self.expr_matrix()?;
        let m = rows.iter().map(|r| r.iter().map(|e| to_poly(e, vars)).collect()).collect::<Result<PolyMatrix>>()?;
        Ok((t, m))
    }

    fn rat_matrix(&mut self) -> Result<RatMatrix> {
        let vars = Vars { dim: 0, resolve: &|_, _| None, allowed: "a constant".into() };
        let (t, m) = self.poly_matrix(&vars)?;
        let cols = m[0].len();
        if m.iter().any(|r| r.len() != cols) {
            return Err(Self::error_at(&t, "rows of equal length"));
        }
        Ok(Matrix::from_rows(cols, m.into_iter().map(|r| r.into_iter().map(|e| e.as_constant().unwrap()).collect()).collect()))
    }

    fn point(&mut self) -> Result<Vec<Rat>> {
        if self.eat_sym("(") {
            let mut out = vec![self.constant()?];
            while self.eat_sym(",") {
                out.push(self.constant()?);
            }
            self.sym(")")?;
            Ok(out)
        } else {
            Ok(vec![self.constant()?])
        }
    }

    fn space_plot(&mut self) -> Result<PlotMap> {
        let t = self.peek().clone();
        let comps = self.tuple()?;
        let dim = comps.iter().map(|c| c.max_index('x')).max().unwrap_or(0).max(1);
        let vars = Vars { dim, resolve: &|l, i| (l == 'x').then(|| i - 1), allowed: "a variable x1, x2, ...".into() };
        let polys = comps.iter().map(|c| to_poly(c, &vars)).collect::<Result<Vec<_>>>()?;
        PlotMap::new(dim, polys).map_err(|e| located(&t, e))
    }

    fn bundle_plot(&mut self, k: usize) -> Result<PlotMap> {
        let t = self.peek().clone();
        let comps = self.tuple()?;
        let r = comps.iter().map(|c| c.max_index('y')).max().unwrap_or(0);
        let resolve = move |l: char, i: usize| match l {
            'x' if i <= k => Some(i - 1),
            'y' => Some(k + i - 1),
            _ => None,
        };
        let vars = Vars { dim: k + r, resolve: &resolve, allowed: format!("a base variable x1..x{k} or a parameter y1, y2, ...") };
        let polys = comps.iter().map(|c| to_poly(c, &vars)).collect::<Result<Vec<_>>>()?;
        PlotMap::new(k + r, polys).map_err(|e| located(&t, e))
    }

    fn plots(&mut self, one: &mut dyn FnMut(&mut Self) -> Result<PlotMap>) -> Result<Vec<PlotMap>> {
        let mut out = Vec::new();
        if self.at_sym(")") {
            return Ok(out);
        }
        out.push(one(self)?);
        while self.eat_sym(",") {
            out.push(one(self)?);
        }
        Ok(out)
    }

    // ---- symbols ----

    fn fresh_name(&mut self) -> Result<(String, Token)> {
        let (name, t) = self.ident("a name")?;
        if self.doc.object(&name).is_some() {
            return Err(Self::error_at(&t, format!("a new name ({name} is already declared)")));
        }
        Ok((name, t))
    }

    fn space_ref(&mut self) -> Result<(String, DVSpace)> {
        let (name, t) = self.ident("a space name")?;
        match self.doc.object(&name) {
            Some(Object::Space(v)) => Ok((name, v.clone())),
            _ => Err(Self::error_at(&t, format!("a declared space ({name} is not one)"))),
        }
    }

    fn bundle_ref(&mut self) -> Result<(String, PseudoBundle)> {
        let (name, t) = self.ident("a bundle name")?;
        match self.doc.object(&name) {
            Some(Object::Bundle(b)) => Ok((name, b.clone())),
            _ => Err(Self::error_at(&t, format!("a declared bundle ({name} is not one)"))),
        }
    }

    fn glue_ref(&mut self) -> Result<String> {
        let (name, t) = self.ident("a glued bundle name")?;
        match self.doc.object(&name) {
            Some(Object::Bundle(b)) if b.is_glued() => Ok(name),
            _ => Err(Self::error_at(&t, format!("a declared glued bundle ({name} is not one)"))),
        }
    }

    fn section_ref(&mut self) -> Result<String> {
        let (name, t) = self.ident("a section name")?;
        match self.doc.object(&name) {
            Some(Object::Section { .. }) => Ok(name),
            _ => Err(Self::error_at(&t, format!("a declared section ({name} is not one)"))),
        }
    }

    fn define(&mut self, name: String, decl: Decl, object: Object) -> Item {
        Item::Define(Definition { name, decl, object })
    }

    // ---- statements ----

    fn statement(&mut self) -> Result<Item> {
        let (kw, t) = self.ident("a declaration or command")?;
        match kw.as_str() {
            "space" => self.space_decl(),
            "bundle" => self.bundle_decl(),
            "glue" => self.glue_decl(),
            "section" => self.section_decl(),
            c if COMMANDS.contains(&c) => self.command(c, t),
            _ => Err(Self::error_at(&t, "a declaration or command")),
        }
    }

    fn space_decl(&mut self) -> Result<Item> {
        let (name, _) = self.fresh_name()?;
        self.sym("=")?;
        let (kind, t) = self.ident("standard, coarse, generated, sum, tensor or quotient")?;
        self.sym("(")?;
        let decl = match kind.as_str() {
            "standard" => SpaceDecl::Standard(self.int()?),
            "coarse" => SpaceDecl::Coarse(self.int()?),
            "generated" => {
                let n = self.int()?;
                self.sym(";")?;
                SpaceDecl::Generated(n, self.plots(&mut |p| p.space_plot())?)
            }
            "sum" | "tensor" => {
                let (a, _) = self.space_ref()?;
                self.sym(",")?;
                let (b, _) = self.space_ref()?;
                if kind == "sum" {
                    SpaceDecl::Sum(a, b)
                } else {
                    SpaceDecl::Tensor(a, b)
                }
            }
            "quotient" => {
                let (a, _) = self.space_ref()?;
                self.sym(";")?;
                SpaceDecl::Quotient(a, self.vectors()?)
            }
            _ => return Err(Self::error_at(&t, "standard, coarse, generated, sum, tensor or quotient")),
        };
        self.sym(")")?;
        let space = build_space(&self.doc, &decl).map_err(|e| located(&t, e))?;
        Ok(self.define(name, Decl::Space(decl), Object::Space(space)))
    }

    fn bundle_decl(&mut self) -> Result<Item> {
        let (name, _) = self.fresh_name()?;
        self.sym("=")?;
        let (kind, t) = self.ident("generated, standard, pullback_coarse, sum, tensor, quotient or sub")?;
        self.sym("(")?;
        let decl = match kind.as_str() {
            "generated" => {
                let total = self.int()?;
                self.sym(",")?;
                let base = self.int()?;
                self.sym(";")?;
                BundleDecl::Generated { total, base, plots: self.plots(&mut |p| p.bundle_plot(base))? }
            }
            "standard" | "pullback_coarse" => {
                let n = self.int()?;
                self.sym(",")?;
                let k = self.int()?;
                if kind == "standard" {
                    BundleDecl::Standard(n, k)
                } else {
                    BundleDecl::PullbackCoarse(n, k)
                }
            }
            "sum" | "tensor" => {
                let (a, _) = self.bundle_ref()?;
                self.sym(",")?;
                let (b, _) = self.bundle_ref()?;
                if kind == "sum" {
                    BundleDecl::Sum(a, b)
                } else {
                    BundleDecl::Tensor(a, b)
                }
            }
            "quotient" | "sub" => {
                let (a, _) = self.bundle_ref()?;
                self.sym(";")?;
                let vs = self.vectors()?;
                if kind == "quotient" {
                    BundleDecl::Quotient(a, vs)
                } else {
                    BundleDecl::Sub(a, vs)
                }
            }
            _ => return Err(Self::error_at(&t, "generated, standard, pullback_coarse, sum, tensor, quotient or sub")),
        };
        self.sym(")")?;
        let b = build_bundle(&self.doc, &decl).map_err(|e| located(&t, e))?;
        Ok(self.define(name, Decl::Bundle(decl), Object::Bundle(b)))
    }

    fn glue_decl(&mut self) -> Result<Item> {
        let (name, _) = self.fresh_name()?;
        let eq = self.sym("=")?;
        self.sym("(")?;
        let (left, b1) = self.bundle_ref()?;
        self.sym(",")?;
        let (right, b2) = self.bundle_ref()?;
        self.sym(";")?;
        let k1 = b1.base_dim();
        let set = if self.eat_sym("{") {
            let mut pts = Vec::new();
            if !self.at_sym("}") {
                pts.push(self.point()?);
                while self.eat_sym(",") {
                    pts.push(self.point()?);
                }
            }
            self.sym("}")?;
            GluingSetDecl::Points(pts)
        } else {
            self.word("subspace")?;
            self.sym("(")?;
            let mut coords = Vec::new();
            loop {
                let (v, t) = self.ident("a base variable")?;
                match split_var(&v) {
                    Some(('x', i)) if i <= k1 => coords.push(i - 1),
                    _ => return Err(Self::error_at(&t, format!("a base variable x1..x{k1}"))),
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.sym(")")?;
            GluingSetDecl::Subspace(coords)
        };
        self.sym(";")?;
        let base = |l: char, i: usize| (l == 'x' && i <= k1).then(|| i - 1);
        let base_vars = Vars { dim: k1, resolve: &base, allowed: format!("a left base variable x1..x{k1}") };
        let image = self.tuple()?.iter().map(|e| to_poly(e, &base_vars)).collect::<Result<Vec<_>>>()?;
        self.sym(";")?;
        let m1 = b1.fibre_dim();
        let lift = if self.at_sym("[") {
            LiftDecl::Matrix(self.poly_matrix(&base_vars)?.1)
        } else {
            let fib = |l: char, i: usize| (l == 'v' && i <= m1).then(|| i - 1);
            let fib_vars = Vars { dim: m1, resolve: &fib, allowed: format!("a left fibre variable v1..v{m1}") };
            LiftDecl::Map(self.tuple()?.iter().map(|e| to_poly(e, &fib_vars)).collect::<Result<Vec<_>>>()?)
        };
        self.sym(")")?;
        let decl = GlueDecl { left, right, set, image, lift };
        let g = build_glue(&b1, &b2, &decl).map_err(|e| located(&eq, e))?;
        Ok(self.define(name, Decl::Glue(decl), Object::Bundle(g)))
    }

    fn sign(&mut self) -> Result<Option<Sign3>> {
        let s = if self.eat_sym("-") {
            Some(Sign3::Neg)
        } else if self.eat_sym("+") {
            Some(Sign3::Pos)
        } else if self.eat_sym("*") {
            None
        } else if matches!(&self.peek().tok, Tok::Num(n) if n == "0") {
            self.pos += 1;
            Some(Sign3::Zero)
        } else {
            return Err(self.error("a sign pattern entry: -, 0, + or *"));
        };
        Ok(s)
    }

    fn pattern(&mut self, k: usize) -> Result<CellPattern> {
        let t = self.peek().clone();
        if self.eat_sym("*") {
            return Ok(vec![None; k]);
        }
        let p = if self.eat_sym("(") {
            let mut p = vec![self.sign()?];
            while self.eat_sym(",") {
                p.push(self.sign()?);
            }
            self.sym(")")?;
            p
        } else {
            vec![self.sign()?]
        };
        if p.len() != k {
            return Err(Self::error_at(&t, format!("a pattern with {k} entries")));
        }
        Ok(p)
    }

    fn section_decl(&mut self) -> Result<Item> {
        let (name, _) = self.fresh_name()?;
        self.word("on")?;
        let (bname, b) = self.bundle_ref()?;
        let eq = self.sym("=")?;
        if self.at_word("glued") {
            self.next();
            self.sym("(")?;
            let left = self.section_ref()?;
            self.sym(",")?;
            let right = self.section_ref()?;
            self.sym(")")?;
            let decl = SectionDecl::Glued { bundle: bname.clone(), left, right };
            let section = build_glued_section(&self.doc, &b, &decl).map_err(|e| located(&eq, e))?;
            return Ok(self.define(name, Decl::Section(decl), Object::Section { bundle: bname, section }));
        }
        let k = b.base_dim();
        let m = b.fibre_dim();
        let resolve = |l: char, i: usize| (l == 'x' && i <= k).then(|| i - 1);
        let vars = Vars { dim: k, resolve: &resolve, allowed: format!("a base variable x1..x{k}") };
        let mut pieces: Vec<(CellPattern, PolyMatrix)> = Vec::new();
        loop {
            let p = self.pattern(k)?;
            self.sym(":")?;
            pieces.push((p, self.poly_matrix(&vars)?.1));
            if !self.eat_sym("|") {
                break;
            }
        }
        let (default, overrides) = if pieces[0].0.iter().all(Option::is_none) {
            let d = pieces.remove(0).1;
            (d, pieces)
        } else {
            (vec![vec![OrthantPoly::zero(k); m]; m], pieces)
        };
        let section = StratifiedSection::new(k, m, default, overrides).map_err(|e| located(&eq, e))?;
        let decl = SectionDecl::Stratified { bundle: bname.clone(), section: section.clone() };
        Ok(self.define(name, Decl::Section(decl), Object::Section { bundle: bname, section: Section::Stratified(section) }))
    }

    fn command(&mut self, kw: &str, t: Token) -> Result<Item> {
        let kind = match kw {
            "dual" => CommandKind::Dual(self.space_ref()?.0),
            "forms" => CommandKind::Forms(self.space_ref()?.0),
            "pseudometric" => CommandKind::Pseudometric(self.space_ref()?.0),
            "fibre" => {
                let (name, _) = self.bundle_ref()?;
                self.word("at")?;
                let side = if self.at_word("left") || self.at_word("right") { Some(self.ident("a side")?.0) } else { None };
                let p = self.point()?;
                let point = match side.as_deref() {
                    Some("left") => BasePoint::Left(p),
                    Some(_) => BasePoint::Right(p),
                    None => BasePoint::Plain(p),
                };
                CommandKind::Fibre(name, point)
            }
            "dual_profile" => CommandKind::DualProfile(self.bundle_ref()?.0),
            "member" => {
                let (name, _) = self.space_ref()?;
                CommandKind::Member(name, self.space_plot()?)
            }
            "smoothmap" => {
                let (a, _) = self.space_ref()?;
                let (b, _) = self.space_ref()?;
                CommandKind::SmoothMap(a, b, self.rat_matrix()?)
            }
            "check_metric" => CommandKind::CheckMetric(self.section_ref()?),
            "find_metric" => CommandKind::FindMetric(self.bundle_ref()?.0),
            "compatible" | "glue_metric" => {
                let left = self.section_ref()?;
                let right = self.section_ref()?;
                let glue = self.glue_ref()?;
                if kw == "compatible" {
                    CommandKind::Compatible { left, right, glue }
                } else {
                    CommandKind::GlueMetric { left, right, glue }
                }
            }
            "commute" => {
                let (k, kt) = self.ident("product, tensor or dual")?;
                let kind = match k.as_str() {
                    "product" => CommuteKind::Product,
                    "tensor" => CommuteKind::Tensor,
                    "dual" => CommuteKind::Dual,
                    _ => return Err(Self::error_at(&kt, "product, tensor or dual")),
                };
                let first = self.glue_ref()?;
                let second = if kind == CommuteKind::Dual { None } else { Some(self.glue_ref()?) };
                CommandKind::Commute(kind, first, second)
            }
            "sub_gluing" => {
                let glue = self.glue_ref()?;
                self.sym("(")?;
                let left = self.vectors()?;
                self.sym(")")?;
                self.sym("(")?;
                let right = self.vectors()?;
                self.sym(")")?;
                CommandKind::SubGluing { glue, left, right }
            }
            _ => unreachable!("command keywords are listed"),
        };
        let expect = if self.at_word("expect") {
            self.next();
            let mut e = Expectation::default();
            if !self.at_word("dimension") {
                e.status = Some(self.ident("a status")?.0);
            }
            if self.at_word("dimension") {
                self.next();
                e.dimension = Some(self.int()?);
            }
            Some(e)
        } else {
            None
        };
        Ok(Item::Run(Command { kind, expect, line: t.line }))
    }
}

fn space_of<'a>(doc: &'a Document, name: &str) -> &'a DVSpace {
    match doc.object(name) {
        Some(Object::Space(v)) => v,
        _ => unreachable!("references are checked while parsing"),
    }
}

fn bundle_of<'a>(doc: &'a Document, name: &str) -> &'a PseudoBundle {
    match doc.object(name) {
        Some(Object::Bundle(b)) => b,
        _ => unreachable!("references are checked while parsing"),
    }
}

fn build_space(doc: &Document, d: &SpaceDecl) -> Result<DVSpace> {
    Ok(match d {
        SpaceDecl::Standard(n) => DVSpace::standard(*n),
        SpaceDecl::Coarse(n) => DVSpace::coarse(*n),
        SpaceDecl::Generated(n, plots) if plots.is_empty() => DVSpace::standard(*n),
        SpaceDecl::Generated(n, plots) => DVSpace::generated(*n, plots.clone())?,
        SpaceDecl::Sum(a, b) => dvs::direct_sum(space_of(doc, a), space_of(doc, b))?,
        SpaceDecl::Tensor(a, b) => dvs::tensor(space_of(doc, a), space_of(doc, b))?,
        SpaceDecl::Quotient(a, vs) => dvs::quotient(space_of(doc, a), vs)?,
    })
}

fn build_bundle(doc: &Document, d: &BundleDecl) -> Result<PseudoBundle> {
    match d {
        BundleDecl::Generated { total, base, plots } => PseudoBundle::generated(*total, *base, plots.clone()),
        BundleDecl::Standard(n, k) => PseudoBundle::standard(*n, *k),
        BundleDecl::PullbackCoarse(n, k) => PseudoBundle::pullback_coarse(*n, *k),
        BundleDecl::Sum(a, b) => bundle::direct_sum(bundle_of(doc, a), bundle_of(doc, b)),
        BundleDecl::Tensor(a, b) => bundle::tensor(bundle_of(doc, a), bundle_of(doc, b)),
        BundleDecl::Quotient(a, vs) => bundle::quotient(bundle_of(doc, a), vs),
        BundleDecl::Sub(a, vs) => bundle::sub(bundle_of(doc, a), vs),
    }
}

/// Restriction of a left-base polynomial to the free coordinates of a
/// subspace gluing set.
fn restrict(p: &OrthantPoly, coords: &[usize]) -> Result<OrthantPoly> {
    let fixed: Vec<usize> = (0..p.dim()).filter(|i| !coords.contains(i)).collect();
    let q = p.substitute_point(&fixed, &vec![rat::zero(); fixed.len()])?;
    let order: Vec<usize> = (0..p.dim()).filter(|i| coords.contains(i)).collect();
    let map: Vec<usize> = order.iter().map(|i| coords.iter().position(|c| c == i).unwrap()).collect();
    Ok(q.remap(coords.len(), &map))
}

fn build_glue(b1: &PseudoBundle, b2: &PseudoBundle, d: &GlueDecl) -> Result<PseudoBundle> {
    let (k1, k2, m1, m2) = (b1.base_dim(), b2.base_dim(), b1.fibre_dim(), b2.fibre_dim());
    if d.image.len() != k2 {
        return Err(Error::DimensionMismatch { context: "base map".into(), expected: k2, found: d.image.len() });
    }
    let lift_rows = match &d.lift {
        LiftDecl::Matrix(m) => m.len(),
        LiftDecl::Map(c) => c.len(),
    };
    if lift_rows != m2 || matches!(&d.lift, LiftDecl::Matrix(m) if m.iter().any(|r| r.len() != m1)) {
        return Err(Error::DimensionMismatch { context: "lift".into(), expected: m2 * m1, found: lift_rows });
    }
    let set = match &d.set {
        GluingSetDecl::Points(pts) => {
            let mut out = Vec::new();
            for y in pts {
                if y.len() != k1 {
                    return Err(Error::PointDimMismatch { expected: k1, found: y.len() });
                }
                let fy = d.image.iter().map(|c| c.eval(y)).collect();
                let lift = match &d.lift {
                    LiftDecl::Matrix(m) => Matrix::from_rows(m1, m.iter().map(|r| r.iter().map(|e| e.eval(y)).collect()).collect()),
                    LiftDecl::Map(c) => bundle::lift_from_map(c, m1)?,
                };
                out.push(GluePoint { y: y.clone(), fy, lift });
            }
            GluingSet::Points(out)
        }
        GluingSetDecl::Subspace(coords) => {
            let r = coords.len();
            let mut map = RatMatrix::zeros(k2, r);
            let mut offset = Vec::with_capacity(k2);
            for (row, c) in d.image.iter().enumerate() {
                let t = restrict(c, coords)?;
                if t.degree() > 1 || !t.is_ordinarily_smooth() {
                    return Err(Error::UnsupportedGluing(format!("base map component {} is not affine on the gluing set", row + 1)));
                }
                offset.push(t.coeff(&Monomial::one(r)));
                for j in 0..r {
                    let mut e = vec![0; r];
                    e[j] = 1;
                    map.data[row][j] = t.coeff(&Monomial::new(e, 0));
                }
            }
            let lift = match &d.lift {
                LiftDecl::Matrix(m) => m.iter().map(|row| row.iter().map(|e| restrict(e, coords)).collect()).collect::<Result<Vec<Vec<_>>>>()?,
                LiftDecl::Map(c) => {
                    let l = bundle::lift_from_map(c, m1)?;
                    l.data.iter().map(|row| row.iter().map(|e| OrthantPoly::constant(r, e.clone())).collect()).collect()
                }
            };
            GluingSet::Subspace(SubspaceGluing { coords: coords.clone(), map, offset, lift })
        }
    };
    bundle::glue(b1, b2, GluingSpec { set })
}

fn build_glued_section(doc: &Document, b: &PseudoBundle, d: &SectionDecl) -> Result<Section> {
    let SectionDecl::Glued { left, right, .. } = d else { unreachable!() };
    let bundle::BundleKind::Glued(g) = b.kind() else {
        return Err(Error::StrataMismatch("glued(...) needs a glued bundle".into()));
    };
    let piece = |name: &str, on: &PseudoBundle| -> Result<StratifiedSection> {
        match doc.object(name) {
            Some(Object::Section { bundle, section: Section::Stratified(s) }) if bundle_of(doc, bundle) == on => Ok(s.clone()),
            _ => Err(Error::StrataMismatch(format!("{name} is not a section of the matching piece"))),
        }
    };
    Ok(Section::Glued { left: piece(left, &g.left)?, right: piece(right, &g.right)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_of_a_sum_is_rejected_at_its_position() {
        let e = parse("space V = generated(2; (abs(x1+x2), 0))").unwrap_err();
        assert_eq!(e, Error::ParseBreakLocus { line: 1, column: 25, found: "x1 + x2".into() });
    }

    #[test]
    fn expressions_follow_precedence() {
        let d = parse("space V = generated(1; (-2*x1^2 + 1/2*abs(x1)))").unwrap();
        let Object::Space(v) = d.object("V").unwrap() else { panic!() };
        let x = OrthantPoly::var(1, 0);
        let want = x.mul(&x).scale(&rat::int(-2)).add(&OrthantPoly::abs_var(1, 0).scale(&rat::frac(1, 2)));
        assert_eq!(v.generators()[0].component(0), &want);
    }

    #[test]
    fn diagnostics_point_into_the_offending_token() {
        let e = parse("space V = standard(2)\ndual W").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 6, .. }));
        let e = parse("space V = standard(2)\nspace V = coarse(1)").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 7, .. }));
        let e = parse("bundle B = generated(2, 1; (x1, x2))").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 33, .. }));
        let e = parse("dual (").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 6, .. }));
    }

    #[test]
    fn sections_and_gluings() {
        let text = "bundle A = standard(3, 1)\n\
                    bundle B = standard(3, 1)\n\
                    glue G = (A, B; {0}; (x1); (v1, v2))\n\
                    section g on A = * : [[1, 0], [0, 1]]\n\
                    section d on A = * : [[x1^2, 0], [0, 0]] | (0) : [[1, 0], [0, 0]]\n\
                    section h on G = glued(g, g)\n\
                    fibre G at left(0) expect standard dimension 2\n";
        let d = parse(text).unwrap();
        assert_eq!(d.commands().count(), 1);
        let Some(Object::Section { section: Section::Stratified(s), .. }) = d.object("d") else { panic!() };
        assert_eq!(s.overrides().len(), 1);
        assert_eq!(s.value_at(&[rat::zero()]).unwrap(), crate::linalg::rat_matrix(&[&[1, 0], &[0, 0]]));
        assert!(matches!(d.object("h"), Some(Object::Section { section: Section::Glued { .. }, .. })));
        let c = d.commands().next().unwrap();
        assert_eq!(c.expect, Some(Expectation { status: Some("standard".into()), dimension: Some(2) }));
    }

    #[test]
    fn subspace_gluing_is_affine() {
        let text = "bundle A = standard(3, 2)\nbundle B = standard(3, 2)\nglue G = (A, B; subspace(x1); (x1, 2); [[x1]])";
        let d = parse(text).unwrap();
        let Some(Object::Bundle(g)) = d.object("G") else { panic!() };
        let bundle::BundleKind::Glued(g) = g.kind() else { panic!() };
        let GluingSet::Subspace(s) = &g.spec.set else { panic!() };
        assert_eq!(s.offset, vec![rat::zero(), rat::int(2)]);
        assert_eq!(s.lift, vec![vec![OrthantPoly::var(1, 0)]]);
        let bad = "bundle A = standard(3, 2)\nbundle B = standard(3, 2)\nglue G = (A, B; subspace(x1); (x1^2, 0); [[1]])";
        assert!(matches!(parse(bad), Err(Error::Document(_))));
    }
}
