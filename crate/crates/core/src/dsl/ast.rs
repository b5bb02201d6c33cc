//! Parsed documents: declarations keep their source form next to the
//! objects they build, so a document can be printed back.

use std::collections::BTreeMap;

use crate::bundle::{BasePoint, CommuteKind, PseudoBundle};
use crate::dvs::DVSpace;
use crate::linalg::RatMatrix;
use crate::metric::{PolyMatrix, Section, StratifiedSection};
use crate::pwpoly::{OrthantPoly, PlotMap};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceDecl {
    Standard(usize),
    Coarse(usize),
    Generated(usize, Vec<PlotMap>),
    Sum(String, String),
    Tensor(String, String),
    Quotient(String, Vec<Vec<Rat>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleDecl {
    Generated { total: usize, base: usize, plots: Vec<PlotMap> },
    Standard(usize, usize),
    PullbackCoarse(usize, usize),
    Sum(String, String),
    Tensor(String, String),
    Quotient(String, Vec<Vec<Rat>>),
    Sub(String, Vec<Vec<Rat>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingSetDecl {
    Points(Vec<Vec<Rat>>),
    /// Free coordinates of the left base (0-based).
    Subspace(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftDecl {
    /// Entries in the left base variables.
    Matrix(PolyMatrix),
    /// Components in the left fibre variables `v1..vm`.
    Map(Vec<OrthantPoly>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueDecl {
    pub left: String,
    pub right: String,
    pub set: GluingSetDecl,
    /// Components of `f` in the left base variables.
    pub image: Vec<OrthantPoly>,
    pub lift: LiftDecl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectionDecl {
    Stratified { bundle: String, section: StratifiedSection },
    Glued { bundle: String, left: String, right: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Space(SpaceDecl),
    Bundle(BundleDecl),
    Glue(GlueDecl),
    Section(SectionDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    Space(DVSpace),
    Bundle(PseudoBundle),
    Section { bundle: String, section: Section },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub decl: Decl,
    pub object: Object,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Dual(String),
    Forms(String),
    Pseudometric(String),
    Fibre(String, BasePoint),
    DualProfile(String),
    Member(String, PlotMap),
    SmoothMap(String, String, RatMatrix),
    CheckMetric(String),
    FindMetric(String),
    Compatible { left: String, right: String, glue: String },
    Commute(CommuteKind, String, Option<String>),
    GlueMetric { left: String, right: String, glue: String },
    SubGluing { glue: String, left: Vec<Vec<Rat>>, right: Vec<Vec<Rat>> },
}

impl CommandKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            CommandKind::Dual(_) => "dual",
            CommandKind::Forms(_) => "forms",
            CommandKind::Pseudometric(_) => "pseudometric",
            CommandKind::Fibre(..) => "fibre",
            CommandKind::DualProfile(_) => "dual_profile",
            CommandKind::Member(..) => "member",
            CommandKind::SmoothMap(..) => "smoothmap",
            CommandKind::CheckMetric(_) => "check_metric",
            CommandKind::FindMetric(_) => "find_metric",
            CommandKind::Compatible { .. } => "compatible",
            CommandKind::Commute(..) => "commute",
            CommandKind::GlueMetric { .. } => "glue_metric",
            CommandKind::SubGluing { .. } => "sub_gluing",
        }
    }
}

pub fn commute_word(k: CommuteKind) -> &'static str {
    match k {
        CommuteKind::Product => "product",
        CommuteKind::Tensor => "tensor",
        CommuteKind::Dual => "dual",
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expectation {
    pub status: Option<String>,
    pub dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub kind: CommandKind,
    pub expect: Option<Expectation>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Define(Definition),
    Run(Command),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub items: Vec<Item>,
}

impl Document {
    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.items.iter().filter_map(|i| match i {
            Item::Define(d) => Some(d),
            Item::Run(_) => None,
        })
    }

    pub fn commands(&self) -> impl Iterator<Item = &Command> {
        self.items.iter().filter_map(|i| match i {
            Item::Run(c) => Some(c),
            Item::Define(_) => None,
        })
    }

    pub fn symbols(&self) -> BTreeMap<&str, &Object> {
        self.definitions().map(|d| (d.name.as_str(), &d.object)).collect()
    }

    pub fn object(&self, name: &str) -> Option<&Object> {
        self.definitions().find(|d| d.name == name).map(|d| &d.object)
    }
}
