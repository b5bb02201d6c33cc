//! Executes the commands of a document and collects a report.

use std::fmt::Write as _;

use serde::Serialize;

use super::ast::*;
use crate::bundle::{self, BundleKind, CommuteKind, Gluing, PseudoBundle, Sign3};
use crate::dvs::{self, DVSpace, SpaceKind};
use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::metric::{self, CellPattern, FailureKind, MetricSearch, MetricVerdict, PolyMatrix, Section, StratifiedSection};
use crate::rat::{fmt_rat, Rat};
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Degree bound of the metric search ansatz.
    pub degree: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { degree: metric::DEFAULT_DEGREE }
    }
}

pub type Grid = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum MatrixField {
    One(Grid),
    Many(Vec<Grid>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumEntry {
    pub region: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Grid>,
}

/// One command's outcome. Field order is the serialization order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub command: String,
    pub object: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<StratumEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip)]
    pub line: usize,
    #[serde(skip)]
    pub expect: Option<Expectation>,
}

impl Entry {
    fn new(command: &str, object: String, status: &str) -> Self {
        Entry {
            command: command.into(),
            object,
            status: status.into(),
            dimension: None,
            basis: None,
            matrix: None,
            strata: None,
            witness: None,
            reason: None,
            line: 0,
            expect: None,
        }
    }

    /// Whether the outcome agrees with the `expect` clause. Without one, only
    /// errors count as unexpected.
    pub fn as_expected(&self) -> bool {
        match &self.expect {
            None => self.status != "error",
            Some(e) => {
                e.status.as_ref().map_or(self.status != "error", |s| *s == self.status)
                    && e.dimension.map_or(true, |d| self.dimension == Some(d))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn mismatches(&self) -> usize {
        self.entries.iter().filter(|e| !e.as_expected()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("report entries serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{} {}: {}", e.command, e.object, e.status);
            if let Some(d) = e.dimension {
                let _ = writeln!(out, "  dimension: {d}");
            }
            if let Some(b) = e.basis.as_ref().filter(|b| !b.is_empty()) {
                let _ = writeln!(out, "  basis: {}", fmt_grid_rows(b));
            }
            match &e.matrix {
                Some(MatrixField::One(m)) => {
                    let _ = writeln!(out, "  matrix: {}", fmt_grid(m));
                }
                Some(MatrixField::Many(ms)) => {
                    for m in ms {
                        let _ = writeln!(out, "  matrix: {}", fmt_grid(m));
                    }
                }
                None => {}
            }
            for s in e.strata.iter().flatten() {
                let mut line = format!("  stratum {}", s.region);
                if let Some(d) = s.dimension {
                    let _ = write!(line, ": dimension {d}");
                }
                if s.exact == Some(false) {
                    line.push_str(" (upper bound)");
                }
                if let Some(b) = s.basis.as_ref().filter(|b| !b.is_empty()) {
                    let _ = write!(line, ", basis {}", fmt_grid_rows(b));
                }
                if let Some(m) = &s.matrix {
                    let _ = write!(line, ": {}", fmt_grid(m));
                }
                out.push_str(&line);
                out.push('\n');
            }
            if let Some(w) = &e.witness {
                let _ = writeln!(out, "  witness: {w}");
            }
            if let Some(r) = &e.reason {
                let _ = writeln!(out, "  reason: {r}");
            }
            if !e.as_expected() {
                let _ = writeln!(out, "  MISMATCH at line {}: expected {}", e.line, fmt_expectation(e.expect.as_ref()));
            }
        }
        out
    }
}

fn fmt_expectation(e: Option<&Expectation>) -> String {
    let Some(e) = e else { return "no error".into() };
    let mut parts = Vec::new();
    if let Some(s) = &e.status {
        parts.push(s.clone());
    }
    if let Some(d) = e.dimension {
        parts.push(format!("dimension {d}"));
    }
    parts.join(" ")
}

fn fmt_grid_rows(g: &Grid) -> String {
    g.iter().map(|r| format!("({})", r.join(", "))).collect::<Vec<_>>().join(", ")
}

fn fmt_grid(g: &Grid) -> String {
    format!("[{}]", g.iter().map(|r| format!("[{}]", r.join(", "))).collect::<Vec<_>>().join(", "))
}

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn rat_grid(m: &RatMatrix) -> Grid {
    m.data.iter().map(|r| rats(r)).collect()
}

fn poly_grid(m: &PolyMatrix) -> Grid {
    m.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

fn fmt_vector(v: &[Rat]) -> String {
    format!("({})", rats(v).join(", "))
}

/// Pads fibre-coordinate vectors with zeros for the base coordinates.
fn padded(k: usize, v: &[String]) -> Vec<String> {
    std::iter::repeat("0".to_string()).take(k).chain(v.iter().cloned()).collect()
}

pub fn fmt_pattern(p: &CellPattern) -> String {
    let s = |x: &Option<Sign3>| match x {
        None => "*",
        Some(Sign3::Neg) => "-",
        Some(Sign3::Zero) => "0",
        Some(Sign3::Pos) => "+",
    };
    if p.iter().all(Option::is_none) {
        "*".into()
    } else if p.len() == 1 {
        s(&p[0]).into()
    } else {
        format!("({})", p.iter().map(s).collect::<Vec<_>>().join(", "))
    }
}

fn space_status(v: &DVSpace) -> &'static str {
    match v.kind() {
        SpaceKind::Standard => "standard",
        SpaceKind::Coarse => "coarse",
        SpaceKind::Generated(_) => "generated",
    }
}

struct Runner<'a> {
    doc: &'a Document,
    config: &'a RunConfig,
}

fn object_error(name: &str, what: &str) -> Error {
    Error::Document(format!("{name} is not a {what}"))
}

impl Runner<'_> {
    fn space(&self, name: &str) -> Result<&DVSpace> {
        match self.doc.object(name) {
            Some(Object::Space(v)) => Ok(v),
            _ => Err(object_error(name, "space")),
        }
    }

    fn bundle(&self, name: &str) -> Result<&PseudoBundle> {
        match self.doc.object(name) {
            Some(Object::Bundle(b)) => Ok(b),
            _ => Err(object_error(name, "bundle")),
        }
    }

    fn gluing(&self, name: &str) -> Result<&Gluing> {
        match self.bundle(name)?.kind() {
            BundleKind::Glued(g) => Ok(g),
            _ => Err(object_error(name, "glued bundle")),
        }
    }

    fn section(&self, name: &str) -> Result<(&PseudoBundle, &Section)> {
        match self.doc.object(name) {
            Some(Object::Section { bundle, section }) => Ok((self.bundle(bundle)?, section)),
            _ => Err(object_error(name, "section")),
        }
    }

    /// A plain section living on the given piece of a gluing.
    fn piece(&self, name: &str, on: &PseudoBundle, side: &str) -> Result<&StratifiedSection> {
        match self.section(name)? {
            (b, Section::Stratified(s)) if b == on => Ok(s),
            _ => Err(Error::Document(format!("{name} is not a section of the {side} bundle of the gluing"))),
        }
    }

    fn execute(&self, kind: &CommandKind, object: String) -> Result<Entry> {
        let kw = kind.keyword();
        Ok(match kind {
            CommandKind::Dual(v) => {
                let d = dvs::smooth_dual(self.space(v)?);
                let mut e = Entry::new(kw, object.clone(), "ok");
                e.dimension = Some(d.dim());
                e.basis = Some(d.basis.iter().map(|f| rats(f)).collect());
                e
            }
            CommandKind::Forms(v) => {
                let forms = dvs::smooth_symmetric_forms(self.space(v)?);
                let mut e = Entry::new(kw, object.clone(), "ok");
                e.dimension = Some(forms.len());
                e.matrix = Some(MatrixField::Many(forms.iter().map(rat_grid).collect()));
                e
            }
            CommandKind::Pseudometric(v) => match dvs::pseudo_metric(self.space(v)?) {
                Some(m) => {
                    let mut e = Entry::new(kw, object.clone(), "exists");
                    e.matrix = Some(MatrixField::One(rat_grid(&m)));
                    e
                }
                None => Entry::new(kw, object.clone(), "none"),
            },
            CommandKind::Fibre(b, x) => {
                let bundle = self.bundle(b)?;
                let f = bundle::fibre_space(bundle, x)?;
                let dual = dvs::smooth_dual(&f.space);
                let mut e = Entry::new(kw, object.clone(), space_status(&f.space));
                e.dimension = Some(dual.dim());
                let k = bundle.base_dim();
                e.basis = Some(dual.basis.iter().map(|v| padded(k, &rats(v))).collect());
                if !f.exact {
                    e.reason = Some(format!("subset diffeology only bounded: dual dimension between {} and {}", f.dual_lower, dual.dim()));
                }
                e
            }
            CommandKind::DualProfile(b) => {
                let bundle = self.bundle(b)?;
                let k = bundle.base_dim();
                let profile = bundle::dual_profile(bundle)?;
                let strata = profile
                    .strata
                    .iter()
                    .map(|s| {
                        let basis = s.basis.iter().map(|v| padded(k, &v.iter().map(|c| c.to_expr("x1")).collect::<Vec<_>>())).collect();
                        StratumEntry {
                            region: s.region.to_string(),
                            dimension: Some(s.dim),
                            exact: Some(s.exact),
                            basis: Some(basis),
                            matrix: None,
                        }
                    })
                    .collect();
                let mut e = Entry::new(kw, object.clone(), "ok");
                e.strata = Some(strata);
                e
            }
            CommandKind::Member(v, q) => verdict_entry(kw, object.clone(), dvs::is_plot_member(q, self.space(v)?)?),
            CommandKind::SmoothMap(v, w, m) => {
                let verdict = dvs::is_smooth_linear_map(m, self.space(v)?, self.space(w)?)?;
                let mut e = verdict_entry(kw, object.clone(), verdict);
                e.matrix = Some(MatrixField::One(rat_grid(m)));
                e
            }
            CommandKind::CheckMetric(g) => {
                let (b, s) = self.section(g)?;
                match metric::is_pseudometric(s, b)? {
                    MetricVerdict::Valid => Entry::new(kw, object.clone(), "valid"),
                    MetricVerdict::Invalid(fails) => {
                        let mut e = Entry::new(kw, object.clone(), "invalid");
                        e.reason = Some(fails.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
                        e.witness = fails.iter().find_map(|f| match (&f.point, &f.kind) {
                            (_, FailureKind::NotSmooth(w)) => Some(w.to_string()),
                            (Some(p), _) => Some(p.to_string()),
                            _ => None,
                        });
                        e
                    }
                    MetricVerdict::Unknown(r) => {
                        let mut e = Entry::new(kw, object.clone(), "unknown");
                        e.reason = Some(r);
                        e
                    }
                }
            }
            CommandKind::FindMetric(b) => {
                let bundle = self.bundle(b)?;
                let found = metric::find_pseudometric(bundle, self.config.degree);
                let mut e = Entry::new(kw, object.clone(), found.status());
                match found {
                    MetricSearch::Exists(s) => section_fields(&mut e, &s),
                    MetricSearch::NotExists(o) => e.reason = Some(o.to_string()),
                    MetricSearch::Unknown(r) => e.reason = Some(r),
                }
                e
            }
            CommandKind::Compatible { left, right, glue } => {
                let g = self.gluing(glue)?;
                let (s1, s2) = (self.piece(left, &g.left, "left")?, self.piece(right, &g.right, "right")?);
                match metric::check_compatible(s1, &g.left, s2, &g.right, &g.spec) {
                    Ok(c) if c.holds => Entry::new(kw, object.clone(), "compatible"),
                    Ok(c) => {
                        let mut e = Entry::new(kw, object.clone(), "incompatible");
                        e.matrix = c.difference.as_ref().map(|d| MatrixField::One(rat_grid(d)));
                        e.witness = c.witness.as_deref().map(fmt_vector);
                        e.reason = Some(c.describe());
                        e
                    }
                    Err(err @ Error::NotAPseudometric { .. }) => {
                        let mut e = Entry::new(kw, object.clone(), "not_pseudometric");
                        e.reason = Some(err.to_string());
                        e
                    }
                    Err(err) => return Err(err),
                }
            }
            CommandKind::GlueMetric { left, right, glue } => {
                let g = self.gluing(glue)?;
                let (s1, s2) = (self.piece(left, &g.left, "left")?, self.piece(right, &g.right, "right")?);
                match metric::glue_metrics(s1, &g.left, s2, &g.right, &g.spec) {
                    Ok((glued, section)) => {
                        let profile = bundle::dual_profile(&glued)?;
                        let mut strata = Vec::new();
                        for w in profile.witnesses() {
                            let m = section.value_at(&glued, &w)?;
                            strata.push(StratumEntry {
                                region: w.to_string(),
                                dimension: None,
                                exact: None,
                                basis: None,
                                matrix: Some(rat_grid(&m)),
                            });
                        }
                        let mut e = Entry::new(kw, object.clone(), "valid");
                        e.strata = Some(strata);
                        e
                    }
                    Err(err @ (Error::Incompatible(_) | Error::NotAPseudometric { .. })) => {
                        let status = if matches!(err, Error::Incompatible(_)) { "incompatible" } else { "not_pseudometric" };
                        let mut e = Entry::new(kw, object.clone(), status);
                        e.reason = Some(err.to_string());
                        e
                    }
                    Err(err) => return Err(err),
                }
            }
            CommandKind::Commute(kind, first, second) => {
                let a = self.bundle(first)?;
                let b = second.as_deref().map(|s| self.bundle(s)).transpose()?;
                match bundle::check_gluing_commutes(*kind, a, b) {
                    Ok(r) => {
                        let mut e = Entry::new(kw, object.clone(), "commutes");
                        e.strata = Some(if *kind == CommuteKind::Dual {
                            r.dual_lifts
                                .iter()
                                .map(|(y, m)| StratumEntry {
                                    region: fmt_vector(y),
                                    dimension: Some(m.rows),
                                    exact: None,
                                    basis: None,
                                    matrix: Some(rat_grid(m)),
                                })
                                .collect()
                        } else {
                            r.witnesses
                                .iter()
                                .map(|(p, d)| StratumEntry { region: p.to_string(), dimension: Some(*d), exact: None, basis: None, matrix: None })
                                .collect()
                        });
                        e
                    }
                    Err(err @ Error::HypothesisFailed { .. }) => {
                        let mut e = Entry::new(kw, object.clone(), "hypothesis_failed");
                        e.reason = Some(err.to_string());
                        e
                    }
                    Err(err @ Error::WitnessMismatch { .. }) => {
                        let mut e = Entry::new(kw, object.clone(), "fails");
                        e.reason = Some(err.to_string());
                        e
                    }
                    Err(err) => return Err(err),
                }
            }
            CommandKind::SubGluing { glue, left, right } => {
                let g = self.gluing(glue)?;
                let z1 = bundle::fibre_coordinates(&g.left, left)?;
                let z2 = bundle::fibre_coordinates(&g.right, right)?;
                let r = bundle::check_subbundle_gluing(g, &z1, &z2)?;
                let mut e = Entry::new(kw, object.clone(), if r.holds { "holds" } else { "fails" });
                e.witness = r.witness.as_deref().map(fmt_vector);
                if let Some(y) = &r.point {
                    e.reason = Some(format!("the lift over {} leaves the sub-bundle", fmt_vector(y)));
                }
                e
            }
        })
    }
}

fn verdict_entry(kw: &str, object: String, v: Verdict) -> Entry {
    let mut e = Entry::new(kw, object, v.status());
    match v {
        Verdict::Smooth(_) => {}
        Verdict::NotSmooth(w) => e.witness = Some(w.to_string()),
        Verdict::Unknown(r) => e.reason = Some(r),
    }
    e
}

fn section_fields(e: &mut Entry, s: &StratifiedSection) {
    e.matrix = Some(MatrixField::One(poly_grid(s.default_matrix())));
    if !s.overrides().is_empty() {
        e.strata = Some(
            s.overrides()
                .iter()
                .map(|(p, m)| StratumEntry { region: fmt_pattern(p), dimension: None, exact: None, basis: None, matrix: Some(poly_grid(m)) })
                .collect(),
        );
    }
}

fn object_names(kind: &CommandKind) -> String {
    match kind {
        CommandKind::Dual(a)
        | CommandKind::Forms(a)
        | CommandKind::Pseudometric(a)
        | CommandKind::DualProfile(a)
        | CommandKind::CheckMetric(a)
        | CommandKind::FindMetric(a)
        | CommandKind::SubGluing { glue: a, .. } => a.clone(),
        CommandKind::Fibre(b, x) => format!("{b} at {x}"),
        CommandKind::Member(a, q) => format!("{a} {q}"),
        CommandKind::SmoothMap(a, b, _) => format!("{a} {b}"),
        CommandKind::Compatible { left, right, glue } | CommandKind::GlueMetric { left, right, glue } => {
            format!("{left} {right} {glue}")
        }
        CommandKind::Commute(k, a, b) => {
            let k = commute_word(*k);
            match b {
                Some(b) => format!("{k} {a} {b}"),
                None => format!("{k} {a}"),
            }
        }
    }
}

/// Runs every command in order. Module errors become entries with status
/// `error`; they never abort the run.
pub fn run_document(doc: &Document, config: &RunConfig) -> Report {
    let runner = Runner { doc, config };
    let entries = doc
        .commands()
        .map(|c| {
            let object = object_names(&c.kind);
            let mut e = runner.execute(&c.kind, object.clone()).unwrap_or_else(|err| {
                let mut e = Entry::new(c.kind.keyword(), object, "error");
                e.reason = Some(err.to_string());
                e
            });
            e.line = c.line;
            e.expect = c.expect.clone();
            e
        })
        .collect();
    Report { entries }
}
