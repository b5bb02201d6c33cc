//! Prints a document back in its source grammar.

use super::ast::*;
use super::run::fmt_pattern;
use crate::bundle::BasePoint;
use crate::linalg::RatMatrix;
use crate::metric::{PolyMatrix, StratifiedSection};
use crate::pwpoly::{OrthantPoly, PlotMap};
use crate::rat::{fmt_rat, Rat};

fn x_name(i: usize) -> String {
    format!("x{}", i + 1)
}

fn v_name(i: usize) -> String {
    format!("v{}", i + 1)
}

fn join(parts: impl IntoIterator<Item = String>) -> String {
    parts.into_iter().collect::<Vec<_>>().join(", ")
}

fn vector(v: &[Rat]) -> String {
    format!("[{}]", join(v.iter().map(fmt_rat)))
}

fn vectors(vs: &[Vec<Rat>]) -> String {
    join(vs.iter().map(|v| vector(v)))
}

fn point(p: &[Rat]) -> String {
    match p {
        [c] => fmt_rat(c),
        _ => format!("({})", join(p.iter().map(fmt_rat))),
    }
}

fn poly_matrix(m: &PolyMatrix, name: &dyn Fn(usize) -> String) -> String {
    format!("[{}]", join(m.iter().map(|r| format!("[{}]", join(r.iter().map(|e| e.to_expr(name)))))))
}

fn rat_matrix(m: &RatMatrix) -> String {
    format!("[{}]", join(m.data.iter().map(|r| format!("[{}]", join(r.iter().map(fmt_rat))))))
}

fn exprs(ps: &[OrthantPoly], name: &dyn Fn(usize) -> String) -> String {
    format!("({})", join(ps.iter().map(|p| p.to_expr(name))))
}

fn bundle_plot(p: &PlotMap, k: usize) -> String {
    let name = move |i: usize| if i < k { format!("x{}", i + 1) } else { format!("y{}", i - k + 1) };
    p.to_expr(&name)
}

fn section(s: &StratifiedSection) -> String {
    let mut pieces = vec![format!("* : {}", poly_matrix(s.default_matrix(), &x_name))];
    for (p, m) in s.overrides() {
        pieces.push(format!("{} : {}", fmt_pattern(p), poly_matrix(m, &x_name)));
    }
    pieces.join(" | ")
}

pub fn emit_definition(d: &Definition) -> String {
    let n = &d.name;
    match &d.decl {
        Decl::Space(s) => match s {
            SpaceDecl::Standard(k) => format!("space {n} = standard({k})"),
            SpaceDecl::Coarse(k) => format!("space {n} = coarse({k})"),
            SpaceDecl::Generated(k, plots) => {
                format!("space {n} = generated({k}; {})", join(plots.iter().map(|p| p.to_expr(&x_name))))
            }
            SpaceDecl::Sum(a, b) => format!("space {n} = sum({a}, {b})"),
            SpaceDecl::Tensor(a, b) => format!("space {n} = tensor({a}, {b})"),
            SpaceDecl::Quotient(a, vs) => format!("space {n} = quotient({a}; {})", vectors(vs)),
        },
        Decl::Bundle(b) => match b {
            BundleDecl::Generated { total, base, plots } => format!(
                "bundle {n} = generated({total}, {base}; {})",
                join(plots.iter().map(|p| bundle_plot(p, *base)))
            ),
            BundleDecl::Standard(t, k) => format!("bundle {n} = standard({t}, {k})"),
            BundleDecl::PullbackCoarse(t, k) => format!("bundle {n} = pullback_coarse({t}, {k})"),
            BundleDecl::Sum(a, b) => format!("bundle {n} = sum({a}, {b})"),
            BundleDecl::Tensor(a, b) => format!("bundle {n} = tensor({a}, {b})"),
            BundleDecl::Quotient(a, vs) => format!("bundle {n} = quotient({a}; {})", vectors(vs)),
            BundleDecl::Sub(a, vs) => format!("bundle {n} = sub({a}; {})", vectors(vs)),
        },
        Decl::Glue(g) => {
            let set = match &g.set {
                GluingSetDecl::Points(ps) => format!("{{{}}}", join(ps.iter().map(|p| point(p)))),
                GluingSetDecl::Subspace(cs) => format!("subspace({})", join(cs.iter().map(|&c| x_name(c)))),
            };
            let lift = match &g.lift {
                LiftDecl::Matrix(m) => poly_matrix(m, &x_name),
                LiftDecl::Map(c) => exprs(c, &v_name),
            };
            format!("glue {n} = ({}, {}; {set}; {}; {lift})", g.left, g.right, exprs(&g.image, &x_name))
        }
        Decl::Section(SectionDecl::Stratified { bundle, section: s }) => format!("section {n} on {bundle} = {}", section(s)),
        Decl::Section(SectionDecl::Glued { bundle, left, right }) => format!("section {n} on {bundle} = glued({left}, {right})"),
    }
}

fn base_point(p: &BasePoint) -> String {
    match p {
        BasePoint::Plain(c) => point(c),
        BasePoint::Left(c) => format!("left {}", point(c)),
        BasePoint::Right(c) => format!("right {}", point(c)),
    }
}

pub fn emit_command(c: &Command) -> String {
    let kw = c.kind.keyword();
    let mut s = match &c.kind {
        CommandKind::Dual(a) | CommandKind::Forms(a) | CommandKind::Pseudometric(a) | CommandKind::DualProfile(a) => {
            format!("{kw} {a}")
        }
        CommandKind::CheckMetric(a) | CommandKind::FindMetric(a) => format!("{kw} {a}"),
        CommandKind::Fibre(b, x) => format!("fibre {b} at {}", base_point(x)),
        CommandKind::Member(v, q) => format!("member {v} {}", q.to_expr(&x_name)),
        CommandKind::SmoothMap(v, w, m) => format!("smoothmap {v} {w} {}", rat_matrix(m)),
        CommandKind::Compatible { left, right, glue } | CommandKind::GlueMetric { left, right, glue } => {
            format!("{kw} {left} {right} {glue}")
        }
        CommandKind::Commute(kind, a, b) => {
            let k = commute_word(*kind);
            match b {
                Some(b) => format!("commute {k} {a} {b}"),
                None => format!("commute {k} {a}"),
            }
        }
        CommandKind::SubGluing { glue, left, right } => format!("sub_gluing {glue} ({}) ({})", vectors(left), vectors(right)),
    };
    if let Some(e) = &c.expect {
        s.push_str(" expect");
        if let Some(st) = &e.status {
            s.push(' ');
            s.push_str(st);
        }
        if let Some(d) = e.dimension {
            s.push_str(&format!(" dimension {d}"));
        }
    }
    s
}

/// One statement per line, in document order.
pub fn emit_document(doc: &Document) -> String {
    let mut out = String::new();
    for item in &doc.items {
        out.push_str(&match item {
            Item::Define(d) => emit_definition(d),
            Item::Run(c) => emit_command(c),
        });
        out.push('\n');
    }
    out
}
