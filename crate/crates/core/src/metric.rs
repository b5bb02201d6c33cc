//! Pseudo-metrics on pseudo-bundles.
//!
//! A section assigns a symmetric matrix of orthant polynomials in the base
//! variables to every cell of the coordinate-hyperplane arrangement of the
//! base. Matrices are in fibre coordinates. The default matrix applies to
//! every cell without a matching override; the last matching override wins.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::bundle::{
    self, cell_witness, dual_profile, fibre_space, fmt_cell, fmt_point, side_roots, to_upoly, BasePoint, Bound,
    BundleKind, DualProfile, GluingSet, GluingSpec, PseudoBundle, Region, Side, Sign3, SubspaceGluing,
};
use crate::dvs::{self, sym_count, sym_unflatten};
use crate::error::{Error, Result};
use crate::linalg::{det, echelon_basis, fmt_matrix, ldl_inertia, span_rank, Matrix, RatMatrix};
use crate::pwpoly::{Monomial, OrthantPoly, PlotMap, Sign};
use crate::rat::{self, Rat};
use crate::upoly::RatFunc;
use crate::verdict::{Certificate, Verdict, Witness};

/// Default degree bound of the coefficient ansatz in [`find_pseudometric`].
pub const DEFAULT_DEGREE: u32 = 4;

pub type PolyMatrix = Vec<Vec<OrthantPoly>>;

/// Cell pattern, one entry per base coordinate; `None` matches every sign.
pub type CellPattern = Vec<Option<Sign3>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratifiedSection {
    base_dim: usize,
    fibre_dim: usize,
    default: PolyMatrix,
    overrides: Vec<(CellPattern, PolyMatrix)>,
}

fn check_matrix(m: &PolyMatrix, k: usize, n: usize, what: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::StrataMismatch(format!("{what} is not {n}x{n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if m[i][j].dim() != k {
                return Err(Error::StrataMismatch(format!("{what} has an entry in {} variables, the base has {k}", m[i][j].dim())));
            }
            if m[i][j] != m[j][i] {
                return Err(Error::StrataMismatch(format!("{what} is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

fn matches(pattern: &[Option<Sign3>], cell: &[Sign3]) -> bool {
    pattern.iter().zip(cell).all(|(p, c)| p.is_none_or(|p| p == *c))
}

fn constant_matrix(k: usize, m: &RatMatrix) -> PolyMatrix {
    m.data.iter().map(|r| r.iter().map(|c| OrthantPoly::constant(k, c.clone())).collect()).collect()
}

fn is_top(cell: &[Sign3]) -> bool {
    cell.iter().all(|s| *s != Sign3::Zero)
}

impl StratifiedSection {
    pub fn new(base_dim: usize, fibre_dim: usize, default: PolyMatrix, overrides: Vec<(CellPattern, PolyMatrix)>) -> Result<Self> {
        check_matrix(&default, base_dim, fibre_dim, "default matrix")?;
        for (n, (pattern, m)) in overrides.iter().enumerate() {
            if pattern.len() != base_dim {
                return Err(Error::StrataMismatch(format!(
                    "override {} names {} coordinates, the base has {base_dim}",
                    n + 1,
                    pattern.len()
                )));
            }
            check_matrix(m, base_dim, fibre_dim, &format!("override {}", n + 1))?;
        }
        Ok(StratifiedSection { base_dim, fibre_dim, default, overrides })
    }

    /// The same constant matrix over every point.
    pub fn constant(base_dim: usize, m: &RatMatrix) -> Result<Self> {
        Self::new(base_dim, m.rows, constant_matrix(base_dim, m), Vec::new())
    }

    pub fn zero(base_dim: usize, fibre_dim: usize) -> Self {
        StratifiedSection {
            base_dim,
            fibre_dim,
            default: vec![vec![OrthantPoly::zero(base_dim); fibre_dim]; fibre_dim],
            overrides: Vec::new(),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fibre_dim(&self) -> usize {
        self.fibre_dim
    }

    pub fn default_matrix(&self) -> &PolyMatrix {
        &self.default
    }

    pub fn overrides(&self) -> &[(CellPattern, PolyMatrix)] {
        &self.overrides
    }

    pub fn matrix_for(&self, cell: &[Sign3]) -> &PolyMatrix {
        self.overrides.iter().rev().find(|(p, _)| matches(p, cell)).map_or(&self.default, |(_, m)| m)
    }

    pub fn value_at(&self, x: &[Rat]) -> Result<RatMatrix> {
        if x.len() != self.base_dim {
            return Err(Error::PointDimMismatch { expected: self.base_dim, found: x.len() });
        }
        let cell: Vec<Sign3> = x.iter().map(Sign3::of).collect();
        let m = self.matrix_for(&cell);
        Ok(Matrix::from_rows(self.fibre_dim, m.iter().map(|r| r.iter().map(|e| e.eval(x)).collect()).collect()))
    }

    fn is_zero(&self) -> bool {
        let zero = |m: &PolyMatrix| m.iter().flatten().all(OrthantPoly::is_zero);
        zero(&self.default) && self.overrides.iter().all(|(_, m)| zero(m))
    }
}

/// A section over a plain base, or one piece per side of a glued base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Section {
    Stratified(StratifiedSection),
    Glued { left: StratifiedSection, right: StratifiedSection },
}

impl From<StratifiedSection> for Section {
    fn from(s: StratifiedSection) -> Self {
        Section::Stratified(s)
    }
}

impl Section {
    pub fn value_at(&self, b: &PseudoBundle, x: &BasePoint) -> Result<RatMatrix> {
        match (self, b.kind()) {
            (Section::Stratified(s), _) => s.value_at(b.plain_point(x)?),
            (Section::Glued { left, right }, BundleKind::Glued(g)) => {
                let (side, p) = g.resolve(x)?;
                match side {
                    Side::Left => left.value_at(&p),
                    Side::Right => right.value_at(&p),
                }
            }
            (Section::Glued { .. }, _) => Err(glued_mismatch()),
        }
    }
}

fn glued_mismatch() -> Error {
    Error::StrataMismatch("a section with two pieces needs a glued bundle".into())
}

fn check_dims(g: &StratifiedSection, b: &PseudoBundle) -> Result<()> {
    if g.base_dim != b.base_dim() || g.fibre_dim != b.fibre_dim() {
        return Err(Error::StrataMismatch(format!(
            "section has base {} and fibre {}, the bundle has base {} and fibre {}",
            g.base_dim,
            g.fibre_dim,
            b.base_dim(),
            b.fibre_dim()
        )));
    }
    Ok(())
}

/// Fibre part of a plot of the total space over the identity of the base.
struct FibrePlot {
    label: String,
    /// Parameters beyond the base variables.
    extra: usize,
    comps: Vec<OrthantPoly>,
    constant: bool,
}

fn fibre_plots(k: usize, m: usize, gens: &[PlotMap]) -> Vec<FibrePlot> {
    let mut out: Vec<FibrePlot> = gens
        .iter()
        .enumerate()
        .map(|(j, g)| FibrePlot {
            label: format!("p{}", j + 1),
            extra: g.domain_dim() - k,
            comps: g.components()[k..].to_vec(),
            constant: false,
        })
        .collect();
    for i in 0..m {
        let comps = (0..m).map(|r| if r == i { OrthantPoly::int(k, 1) } else { OrthantPoly::zero(k) }).collect();
        out.push(FibrePlot { label: format!("e{}", k + i + 1), extra: 0, comps, constant: true });
    }
    out
}

/// Both plots on the joint domain `(x, u, u')`; the base variables are shared.
fn joint(k: usize, p: &FibrePlot, q: &FibrePlot) -> (usize, Vec<OrthantPoly>, Vec<OrthantPoly>) {
    let d = k + p.extra + q.extra;
    let pm: Vec<usize> = (0..k + p.extra).collect();
    let qm: Vec<usize> = (0..k).chain(k + p.extra..d).collect();
    (d, p.comps.iter().map(|c| c.remap(d, &pm)).collect(), q.comps.iter().map(|c| c.remap(d, &qm)).collect())
}

/// `Σ g_ij P_i Q_j` on the joint domain.
fn evaluate(g: &PolyMatrix, d: usize, k: usize, p: &[OrthantPoly], q: &[OrthantPoly]) -> OrthantPoly {
    let base: Vec<usize> = (0..k).collect();
    let mut e = OrthantPoly::zero(d);
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            if gij.is_zero() || p[i].is_zero() || q[j].is_zero() {
                continue;
            }
            e = e.add(&gij.remap(d, &base).mul(&p[i]).mul(&q[j]));
        }
    }
    e
}

fn signed(cell: &[Sign3], e: &OrthantPoly) -> OrthantPoly {
    e.specialize_where(|i| cell.get(i).and_then(|s| s.as_sign()))
}

/// The evaluation of `g` on one pair of plots must agree with a single
/// ordinarily smooth function: the pieces over the open cells coincide and
/// are smooth, and every lower cell carries the restriction of that function.
/// Two constant plots are not checked over the origin.
fn check_pair(g: &StratifiedSection, k: usize, p: &FibrePlot, q: &FibrePlot, generator: Option<usize>) -> Result<Verdict> {
    let (d, pc, qc) = joint(k, p, q);
    let cells = Sign3::all(k);
    let assembled = evaluate(&g.default, d, k, &pc, &qc);
    let pair = format!("pair ({}, {})", p.label, q.label);
    let witness = |note: String| {
        Verdict::NotSmooth(Witness {
            generator,
            expression: (!assembled.is_ordinarily_smooth()).then(|| assembled.clone()),
            note,
            ..Default::default()
        })
    };
    let top: Vec<&Vec<Sign3>> = cells.iter().filter(|c| is_top(c)).collect();
    let first = signed(top[0], &evaluate(g.matrix_for(top[0]), d, k, &pc, &qc));
    if !first.is_ordinarily_smooth() {
        return Ok(witness(format!("{pair} is not smooth on {}", fmt_cell(top[0]))));
    }
    for cell in &top[1..] {
        if signed(cell, &evaluate(g.matrix_for(cell), d, k, &pc, &qc)) != first {
            return Ok(witness(format!("{pair} has different pieces on {} and {}", fmt_cell(top[0]), fmt_cell(cell))));
        }
    }
    for cell in cells.iter().filter(|c| !is_top(c)) {
        let origin = cell.iter().all(|s| *s == Sign3::Zero);
        if origin && p.constant && q.constant {
            continue;
        }
        let zeros: Vec<usize> = (0..k).filter(|&i| cell[i] == Sign3::Zero).collect();
        let vals = vec![rat::zero(); zeros.len()];
        let here = signed(cell, &evaluate(g.matrix_for(cell), d, k, &pc, &qc)).substitute_point(&zeros, &vals)?;
        if here != first.substitute_point(&zeros, &vals)? {
            return Ok(witness(format!("{pair} on {} is not the limit of the open cells", fmt_cell(cell))));
        }
    }
    Ok(Verdict::Smooth(Certificate::Ordinary))
}

fn smooth_piece(g: &StratifiedSection, b: &PseudoBundle) -> Result<Verdict> {
    check_dims(g, b)?;
    match b.kind() {
        BundleKind::Generated(gens) => {
            let plots = fibre_plots(b.base_dim(), b.fibre_dim(), gens);
            let mut out = Vec::new();
            for i in 0..plots.len() {
                for j in i..plots.len() {
                    let generator = [i, j].into_iter().find(|&n| !plots[n].constant);
                    let v = check_pair(g, b.base_dim(), &plots[i], &plots[j], generator)?;
                    if v.is_not_smooth() {
                        return Ok(v);
                    }
                    out.push(v);
                }
            }
            Ok(Verdict::all(out))
        }
        BundleKind::PullbackCoarse => Ok(if g.is_zero() {
            Verdict::Smooth(Certificate::Coarse)
        } else {
            Verdict::NotSmooth(Witness::note("coarse fibres carry only the zero form"))
        }),
        BundleKind::Glued(_) => Err(Error::StrataMismatch("a glued bundle needs a section with one piece per side".into())),
        BundleKind::Sub { .. } | BundleKind::Combined { .. } => {
            Ok(Verdict::Unknown("sections of derived bundles are not checked; declare the bundle by generators".into()))
        }
    }
}

pub fn is_smooth_section(g: &Section, b: &PseudoBundle) -> Result<Verdict> {
    match (g, b.kind()) {
        (Section::Stratified(s), _) => smooth_piece(s, b),
        (Section::Glued { left, right }, BundleKind::Glued(gl)) => {
            let v = Verdict::all([smooth_piece(left, &gl.left)?, smooth_piece(right, &gl.right)?]);
            if !v.is_smooth() {
                return Ok(v);
            }
            let c = compare_on_gluing(left, &gl.left, right, &gl.right, &gl.spec)?;
            if !c.holds {
                return Ok(Verdict::Unknown(format!(
                    "the pieces disagree over the gluing set ({}); plots crossing the gluing are not enumerated",
                    c.describe()
                )));
            }
            Ok(v)
        }
        (Section::Glued { .. }, _) => Err(glued_mismatch()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    RankDeficit { rank: usize, required: usize },
    NotPsd,
    NotSmooth(Witness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub point: Option<BasePoint>,
    pub kind: FailureKind,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FailureKind::RankDeficit { rank, required } => write!(f, "rank {rank} != required {required}")?,
            FailureKind::NotPsd => f.write_str("not positive semi-definite")?,
            FailureKind::NotSmooth(w) => write!(f, "not smooth: {w}")?,
        }
        match &self.point {
            Some(p) => write!(f, " at {p}"),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricVerdict {
    Valid,
    Invalid(Vec<Failure>),
    Unknown(String),
}

impl MetricVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, MetricVerdict::Valid)
    }

    pub fn status(&self) -> &'static str {
        match self {
            MetricVerdict::Valid => "valid",
            MetricVerdict::Invalid(_) => "invalid",
            MetricVerdict::Unknown(_) => "unknown",
        }
    }
}

/// Base points at which rank and positivity are checked: the profile
/// witnesses and, over a line, the real roots of the principal minors of the
/// section together with a point in every gap between them. `Err` carries the
/// reason the points cannot be listed exactly.
fn witness_points(g: &Section, b: &PseudoBundle, profile: &DualProfile) -> Result<std::result::Result<Vec<BasePoint>, String>> {
    let mut points = profile.witnesses();
    let Section::Stratified(s) = g else { return Ok(Ok(points)) };
    if b.base_dim() != 1 {
        return Ok(Ok(points));
    }
    let mut bounds: Vec<Rat> = vec![rat::zero()];
    for st in &profile.strata {
        if let Region::Interval { lo: Bound::Closed(a), hi: Bound::Closed(c) } = &st.region {
            if a == c {
                bounds.push(a.clone());
            }
        }
    }
    for (sign, s3) in [(Sign::Minus, Sign3::Neg), (Sign::Plus, Sign3::Pos)] {
        let m = s.matrix_for(&[s3]);
        let n = m.len();
        let polys: Vec<Vec<RatFunc>> =
            m.iter().map(|r| r.iter().map(|e| RatFunc::poly(to_upoly(&e.specialize_where(|_| Some(sign))))).collect()).collect();
        for subset in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| subset >> i & 1 == 1).collect();
            let minor = Matrix::from_rows(idx.len(), idx.iter().map(|&i| idx.iter().map(|&j| polys[i][j].clone()).collect()).collect());
            let d = det(&minor);
            if d.num().degree().unwrap_or(0) == 0 {
                continue;
            }
            match side_roots(d.num(), sign, "principal minor") {
                Ok(r) => bounds.extend(r),
                Err(Error::IrrationalBreakpoint(reason)) => return Ok(Err(reason)),
                Err(e) => return Err(e),
            }
        }
    }
    bounds.sort();
    bounds.dedup();
    let mut coords: Vec<Rat> = points.iter().map(|p| p.coords()[0].clone()).collect();
    for r in &bounds {
        if !coords.contains(r) {
            coords.push(r.clone());
        }
    }
    let one = rat::one();
    let mut gaps: Vec<(Option<&Rat>, Option<&Rat>)> = vec![(None, bounds.first())];
    gaps.extend(bounds.windows(2).map(|w| (Some(&w[0]), Some(&w[1]))));
    gaps.push((bounds.last(), None));
    let mut extra = Vec::new();
    for (lo, hi) in gaps {
        let inside = |c: &Rat| lo.is_none_or(|l| c > l) && hi.is_none_or(|h| c < h);
        if coords.iter().any(inside) {
            continue;
        }
        extra.push(match (lo, hi) {
            (Some(l), Some(h)) => (l + h) / rat::int(2),
            (None, Some(h)) => h - &one,
            (Some(l), None) => l + &one,
            (None, None) => rat::zero(),
        });
    }
    coords.extend(extra);
    coords.sort();
    coords.dedup();
    points = coords.into_iter().map(|c| BasePoint::Plain(vec![c])).collect();
    Ok(Ok(points))
}

/// Fibre dual dimension at `x`, when it is known exactly.
fn required_rank(b: &PseudoBundle, x: &BasePoint) -> Result<Option<usize>> {
    let f = fibre_space(b, x)?;
    Ok((f.exact || f.dual_lower == f.dual_upper()).then_some(f.dual_lower))
}

/// Smoothness, then positivity and the rank condition at witness points.
pub fn is_pseudometric(g: &Section, b: &PseudoBundle) -> Result<MetricVerdict> {
    match is_smooth_section(g, b)? {
        Verdict::NotSmooth(w) => return Ok(MetricVerdict::Invalid(vec![Failure { point: None, kind: FailureKind::NotSmooth(w) }])),
        Verdict::Unknown(r) => return Ok(MetricVerdict::Unknown(r)),
        Verdict::Smooth(_) => {}
    }
    let profile = dual_profile(b)?;
    let points = match witness_points(g, b, &profile)? {
        Ok(p) => p,
        Err(reason) => return Ok(MetricVerdict::Unknown(reason)),
    };
    let mut failures = Vec::new();
    for x in points {
        let Some(required) = required_rank(b, &x)? else {
            return Ok(MetricVerdict::Unknown(format!("the fibre dual over {x} is only bounded")));
        };
        let (inertia, _) = ldl_inertia(&g.value_at(b, &x)?);
        if !inertia.is_psd() {
            failures.push(Failure { point: Some(x.clone()), kind: FailureKind::NotPsd });
        }
        if inertia.rank() != required {
            failures.push(Failure { point: Some(x), kind: FailureKind::RankDeficit { rank: inertia.rank(), required } });
        }
    }
    Ok(if failures.is_empty() { MetricVerdict::Valid } else { MetricVerdict::Invalid(failures) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    pub holds: bool,
    /// Left base point of the violation.
    pub point: Option<Vec<Rat>>,
    /// `g1(y) - f̃ᵀ g2(f(y)) f̃` there, in left fibre coordinates.
    pub difference: Option<RatMatrix>,
    /// A vector of the left total space on which the two sides differ.
    pub witness: Option<Vec<Rat>>,
}

impl Compatibility {
    fn holds() -> Self {
        Compatibility { holds: true, point: None, difference: None, witness: None }
    }

    fn violated(k: usize, y: Vec<Rat>, d: RatMatrix) -> Self {
        let n = d.rows;
        let mut v = vec![rat::zero(); k + n];
        if let Some(i) = (0..n).find(|&i| !d.data[i][i].is_zero()) {
            v[k + i] = rat::one();
        } else if let Some((i, j)) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !d.data[i][j].is_zero()) {
            v[k + i] = rat::one();
            v[k + j] = rat::one();
        }
        Compatibility { holds: false, point: Some(y), difference: Some(d), witness: Some(v) }
    }

    pub fn describe(&self) -> String {
        match (&self.point, &self.difference, &self.witness) {
            (Some(p), Some(d), Some(w)) => {
                format!("over {} the forms differ by {} on {}", fmt_point(p), fmt_matrix(d), fmt_point(w))
            }
            _ => "compatible".into(),
        }
    }
}

fn pulled_difference(g1: &RatMatrix, lift: &RatMatrix, g2: &RatMatrix) -> RatMatrix {
    g1.sub(&lift.transpose().mul(g2).mul(lift))
}

/// Rational points of the subspace to test when the default matrices
/// already differ symbolically: a grid fine enough to see a nonzero
/// polynomial of the difference's degree.
fn symbolic_points(g1: &StratifiedSection, g2: &StratifiedSection, s: &SubspaceGluing, k1: usize) -> Result<Vec<Vec<Rat>>> {
    let r = s.coords.len();
    let mut emb = RatMatrix::zeros(k1, r);
    for (c, &i) in s.coords.iter().enumerate() {
        emb.data[i][c] = rat::one();
    }
    let sub = |m: &PolyMatrix, a: &RatMatrix, off: &[Rat]| -> Result<PolyMatrix> {
        m.iter().map(|row| row.iter().map(|e| e.affine_substitute(a, off)).collect()).collect()
    };
    let a = sub(&g1.default, &emb, &vec![rat::zero(); k1])?;
    let b = sub(&g2.default, &s.map, &s.offset)?;
    let (m1, m2) = (a.len(), b.len());
    let mut degree = 0;
    let mut differs = false;
    for i in 0..m1 {
        for j in 0..m1 {
            let mut e = a[i][j].clone();
            for p in 0..m2 {
                for q in 0..m2 {
                    e = e.sub(&s.lift[p][i].mul(&b[p][q]).mul(&s.lift[q][j]));
                }
            }
            if !e.is_zero() {
                differs = true;
                degree = degree.max(e.degree());
            }
        }
    }
    if !differs {
        return Ok(Vec::new());
    }
    let values: Vec<Rat> = (0..=degree as i64).map(|n| if n % 2 == 1 { rat::int((n + 1) / 2) } else { rat::int(-n / 2) }).collect();
    let mut grid = vec![Vec::new()];
    for _ in 0..r {
        grid = grid.into_iter().flat_map(|t: Vec<Rat>| values.iter().map(move |v| [t.clone(), vec![v.clone()]].concat())).collect();
    }
    Ok(grid.into_iter().map(|t| emb.mul_vec(&t)).collect())
}

/// Compares `g1` with the pull-back of `g2` over the gluing set, without
/// checking that either is a pseudo-metric.
fn compare_on_gluing(
    g1: &StratifiedSection,
    b1: &PseudoBundle,
    g2: &StratifiedSection,
    b2: &PseudoBundle,
    spec: &GluingSpec,
) -> Result<Compatibility> {
    check_dims(g1, b1)?;
    check_dims(g2, b2)?;
    let k1 = b1.base_dim();
    let mut points = spec.check_points(k1);
    if let GluingSet::Subspace(s) = &spec.set {
        points.extend(symbolic_points(g1, g2, s, k1)?);
    }
    for y in points {
        let (Some(fy), Some(lift)) = (spec.image(&y), spec.lift_at(&y)) else { continue };
        let d = pulled_difference(&g1.value_at(&y)?, &lift, &g2.value_at(&fy)?);
        if !d.is_zero() {
            return Ok(Compatibility::violated(k1, y, d));
        }
    }
    Ok(Compatibility::holds())
}

/// `g1(y) = f̃ᵀ g2(f(y)) f̃` over the gluing set. Both sections must first
/// pass [`is_pseudometric`].
pub fn check_compatible(
    g1: &StratifiedSection,
    b1: &PseudoBundle,
    g2: &StratifiedSection,
    b2: &PseudoBundle,
    spec: &GluingSpec,
) -> Result<Compatibility> {
    for (side, g, b) in [("left", g1, b1), ("right", g2, b2)] {
        let reason = match is_pseudometric(&Section::Stratified(g.clone()), b)? {
            MetricVerdict::Valid => continue,
            MetricVerdict::Invalid(f) => f[0].to_string(),
            MetricVerdict::Unknown(r) => format!("undecided: {r}"),
        };
        return Err(Error::NotAPseudometric { side: side.into(), reason });
    }
    compare_on_gluing(g1, b1, g2, b2, spec)
}

/// Glues the bundles and returns the glued bundle with the section that is
/// `g1` off the gluing set and `g2` on the right base.
pub fn glue_metrics(
    g1: &StratifiedSection,
    b1: &PseudoBundle,
    g2: &StratifiedSection,
    b2: &PseudoBundle,
    spec: &GluingSpec,
) -> Result<(PseudoBundle, Section)> {
    let c = check_compatible(g1, b1, g2, b2, spec)?;
    if !c.holds {
        return Err(Error::Incompatible(c.describe()));
    }
    let glued = bundle::glue(b1, b2, spec.clone())?;
    let section = Section::Glued { left: g1.clone(), right: g2.clone() };
    match is_pseudometric(&section, &glued)? {
        MetricVerdict::Valid => Ok((glued, section)),
        MetricVerdict::Invalid(f) => Err(Error::Incompatible(format!("glued section fails: {}", f[0]))),
        MetricVerdict::Unknown(r) => Err(Error::Incompatible(format!("glued section undecided: {r}"))),
    }
}

/// Name of the `i`-th upper-triangle coefficient: `a`, `b`, `c`, ...
pub fn coefficient_name(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("a{}", i + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deficit {
    pub stratum: String,
    pub ceiling: usize,
    pub required: usize,
}

/// Why no pseudo-metric exists within the ansatz.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    /// Coefficients whose polynomial part vanishes for every smooth section.
    pub forced_zero: Vec<String>,
    /// Strata on which no smooth section reaches the fibre dual dimension.
    pub deficits: Vec<Deficit>,
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.forced_zero.len() {
            0 => {}
            1 => parts.push(format!("coefficient {} forced to 0", self.forced_zero[0])),
            _ => parts.push(format!("coefficients {} forced to 0", self.forced_zero.join(","))),
        }
        for d in &self.deficits {
            parts.push(format!("rank {} < required {} on stratum {}", d.ceiling, d.required, d.stratum));
        }
        f.write_str(&parts.join("; "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricSearch {
    Exists(StratifiedSection),
    NotExists(Obstruction),
    Unknown(String),
}

impl MetricSearch {
    pub fn status(&self) -> &'static str {
        match self {
            MetricSearch::Exists(_) => "exists",
            MetricSearch::NotExists(_) => "not_exists",
            MetricSearch::Unknown(_) => "unknown",
        }
    }
}

/// Sections whose coefficients are polynomials of degree at most `degree`,
/// with a free constant matrix at the origin of a positive-dimensional base.
/// Unknowns: for every upper-triangle entry the coefficients of its
/// monomials, then the origin entries.
struct Ansatz {
    k: usize,
    m: usize,
    monomials: Vec<Vec<u32>>,
    origin: bool,
}

impl Ansatz {
    fn new(k: usize, m: usize, degree: u32) -> Self {
        let mut monomials = vec![Vec::new()];
        for _ in 0..k {
            monomials = monomials
                .into_iter()
                .flat_map(|e: Vec<u32>| {
                    let used: u32 = e.iter().sum();
                    (0..=degree - used).map(move |d| [e.clone(), vec![d]].concat())
                })
                .collect();
        }
        monomials.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
        Ansatz { k, m, monomials, origin: k > 0 }
    }

    fn entries(&self) -> usize {
        sym_count(self.m)
    }

    fn width(&self) -> usize {
        let e = self.entries();
        e * self.monomials.len() + if self.origin { e } else { 0 }
    }

    fn origin_col(&self, e: usize) -> usize {
        self.entries() * self.monomials.len() + e
    }

    fn positions(&self) -> Vec<(usize, usize)> {
        (0..self.m).flat_map(|i| (i..self.m).map(move |j| (i, j))).collect()
    }

    fn unit(&self, (i, j): (usize, usize), exps: &[u32]) -> PolyMatrix {
        let mut g = vec![vec![OrthantPoly::zero(self.k); self.m]; self.m];
        let x = OrthantPoly::from_terms(self.k, [(Monomial::new(exps.to_vec(), 0), rat::one())]);
        g[i][j] = x.clone();
        g[j][i] = x;
        g
    }

    fn value(&self, sol: &[Rat], x: &[Rat]) -> RatMatrix {
        let e = self.entries();
        if self.origin && x.iter().all(Zero::is_zero) {
            return sym_unflatten(self.m, &sol[self.origin_col(0)..]);
        }
        let t = self.monomials.len();
        let flat: Vec<Rat> = (0..e)
            .map(|n| {
                self.monomials.iter().enumerate().fold(rat::zero(), |acc, (c, exps)| {
                    let mono: Rat = exps.iter().zip(x).map(|(&p, v)| num_traits::pow(v.clone(), p as usize)).product();
                    acc + &sol[n * t + c] * mono
                })
            })
            .collect();
        sym_unflatten(self.m, &flat)
    }

    /// Linear constraints from every pair involving a generator; the
    /// solution space is returned as a basis.
    fn solutions(&self, gens: &[PlotMap]) -> Result<Vec<Vec<Rat>>> {
        let (k, t) = (self.k, self.monomials.len());
        let plots = fibre_plots(k, self.m, gens);
        let positions = self.positions();
        let mut rows: BTreeMap<(usize, bool, Monomial), Vec<Rat>> = BTreeMap::new();
        let width = self.width();
        let mut pair = 0;
        for i in 0..plots.len() {
            for j in i..plots.len() {
                if plots[i].constant && plots[j].constant {
                    continue;
                }
                let (d, pc, qc) = joint(k, &plots[i], &plots[j]);
                for (e, &pos) in positions.iter().enumerate() {
                    for (c, exps) in self.monomials.iter().enumerate() {
                        let ev = evaluate(&self.unit(pos, exps), d, k, &pc, &qc);
                        for (mono, coef) in ev.nonsmooth_part().terms() {
                            rows.entry((pair, false, mono.clone())).or_insert_with(|| vec![rat::zero(); width])[e * t + c] += coef;
                        }
                    }
                }
                if self.origin {
                    let base: Vec<usize> = (0..k).collect();
                    let zeros = vec![rat::zero(); k];
                    let p0 = pc.iter().map(|c| c.substitute_point(&base, &zeros)).collect::<Result<Vec<_>>>()?;
                    let q0 = qc.iter().map(|c| c.substitute_point(&base, &zeros)).collect::<Result<Vec<_>>>()?;
                    for (e, &(a, b)) in positions.iter().enumerate() {
                        let mut v = p0[a].mul(&q0[b]);
                        if a != b {
                            v = v.add(&p0[b].mul(&q0[a]));
                        }
                        for (mono, coef) in v.terms() {
                            let row = rows.entry((pair, true, mono.clone())).or_insert_with(|| vec![rat::zero(); width]);
                            row[self.origin_col(e)] += coef;
                            row[e * t] -= coef;
                        }
                    }
                }
                pair += 1;
            }
        }
        let rows: Vec<Vec<Rat>> = rows.into_values().collect();
        if rows.is_empty() {
            return Ok((0..width).map(|c| (0..width).map(|n| if n == c { rat::one() } else { rat::zero() }).collect()).collect());
        }
        Ok(Matrix::from_rows(width, rows).nullspace())
    }
}

/// Points checked for a rank obstruction, labelled by their stratum: the
/// cell witnesses and, over a line, the profile witnesses.
fn obstruction(b: &PseudoBundle, a: &Ansatz, sols: &[Vec<Rat>]) -> Result<Option<Obstruction>> {
    let t = a.monomials.len();
    let forced: Vec<String> = (0..a.entries())
        .filter(|&e| sols.iter().all(|s| s[e * t..(e + 1) * t].iter().all(Zero::is_zero)))
        .map(coefficient_name)
        .collect();
    let measure = |x: &[Rat]| -> Result<Option<(usize, usize)>> {
        let Some(required) = required_rank(b, &BasePoint::Plain(x.to_vec()))? else { return Ok(None) };
        let rows: Vec<Vec<Rat>> = sols.iter().flat_map(|s| a.value(s, x).data).collect();
        Ok(Some((span_rank(a.m, &rows), required)))
    };
    let mut by_zero_set: BTreeMap<Vec<usize>, Vec<(Vec<Sign3>, Option<(usize, usize)>)>> = BTreeMap::new();
    for cell in Sign3::all(a.k) {
        let zs: Vec<usize> = (0..a.k).filter(|&i| cell[i] == Sign3::Zero).collect();
        let r = measure(&cell_witness(&cell))?;
        by_zero_set.entry(zs).or_default().push((cell, r));
    }
    let mut deficits = Vec::new();
    let short = |r: &Option<(usize, usize)>| r.is_some_and(|(c, q)| c < q);
    for (zs, cells) in &by_zero_set {
        let first = cells[0].1;
        if cells.iter().all(|(_, r)| short(r) && *r == first) {
            let (ceiling, required) = first.unwrap();
            let stratum = (0..a.k)
                .map(|i| if zs.contains(&i) { format!("x{}=0", i + 1) } else { format!("x{}≠0", i + 1) })
                .filter(|s| zs.is_empty() || s.ends_with("=0"))
                .collect::<Vec<_>>()
                .join(", ");
            deficits.push(Deficit { stratum, ceiling, required });
        } else {
            for (cell, r) in cells.iter().filter(|(_, r)| short(r)) {
                let (ceiling, required) = r.unwrap();
                deficits.push(Deficit { stratum: fmt_cell(cell), ceiling, required });
            }
        }
    }
    if a.k == 1 {
        if let Ok(profile) = dual_profile(b) {
            for w in profile.witnesses() {
                let x = w.coords().to_vec();
                if rat::abs(&x[0]) == rat::one() || x[0].is_zero() {
                    continue;
                }
                if let Some((ceiling, required)) = measure(&x)?.filter(|(c, q)| c < q) {
                    deficits.push(Deficit { stratum: format!("x1={}", rat::fmt_rat(&x[0])), ceiling, required });
                }
            }
        }
    }
    Ok((!deficits.is_empty()).then_some(Obstruction { forced_zero: forced, deficits }))
}

fn gram(k: usize, m: usize, basis: &[Vec<Rat>]) -> PolyMatrix {
    let mut g = RatMatrix::zeros(m, m);
    for f in basis {
        for i in 0..m {
            for j in 0..m {
                g.data[i][j] += &f[i] * &f[j];
            }
        }
    }
    constant_matrix(k, &g)
}

/// `Σ f ⊗ f` over the dual of the open cells, overridden on lower cells
/// whose dual differs. `None` when the open cells disagree.
fn candidate(b: &PseudoBundle) -> Result<Option<StratifiedSection>> {
    let (k, m) = (b.base_dim(), b.fibre_dim());
    let dual_at = |cell: &[Sign3]| -> Result<Vec<Vec<Rat>>> {
        let f = fibre_space(b, &BasePoint::Plain(cell_witness(cell)))?;
        Ok(echelon_basis(m, dvs::smooth_dual(&f.space).basis))
    };
    let cells = Sign3::all(k);
    let top: Vec<&Vec<Sign3>> = cells.iter().filter(|c| is_top(c)).collect();
    let generic = dual_at(top[0])?;
    for c in &top[1..] {
        if dual_at(c)? != generic {
            return Ok(None);
        }
    }
    let mut overrides = Vec::new();
    for c in cells.iter().filter(|c| !is_top(c)) {
        let d = dual_at(c)?;
        if d != generic {
            overrides.push((c.iter().map(|s| Some(*s)).collect(), gram(k, m, &d)));
        }
    }
    StratifiedSection::new(k, m, gram(k, m, &generic), overrides).map(Some)
}

fn confirm(b: &PseudoBundle, g: StratifiedSection) -> Result<MetricSearch> {
    Ok(match is_pseudometric(&Section::Stratified(g.clone()), b)? {
        MetricVerdict::Valid => MetricSearch::Exists(g),
        MetricVerdict::Invalid(f) => MetricSearch::Unknown(format!("candidate rejected: {}", f[0])),
        MetricVerdict::Unknown(r) => MetricSearch::Unknown(r),
    })
}

fn search(b: &PseudoBundle, degree: u32) -> Result<MetricSearch> {
    let gens = match b.kind() {
        BundleKind::Generated(g) => g,
        BundleKind::PullbackCoarse => return confirm(b, StratifiedSection::zero(b.base_dim(), b.fibre_dim())),
        _ => return Ok(MetricSearch::Unknown("the search needs a bundle declared by generators".into())),
    };
    let ansatz = Ansatz::new(b.base_dim(), b.fibre_dim(), degree);
    let sols = ansatz.solutions(gens)?;
    if let Some(ob) = obstruction(b, &ansatz, &sols)? {
        return Ok(MetricSearch::NotExists(ob));
    }
    match candidate(b)? {
        Some(g) => confirm(b, g),
        None => Ok(MetricSearch::Unknown("the fibre duals differ between open cells".into())),
    }
}

/// Searches for a pseudo-metric with coefficients of degree at most `degree`.
pub fn find_pseudometric(b: &PseudoBundle, degree: u32) -> MetricSearch {
    search(b, degree).unwrap_or_else(|e| MetricSearch::Unknown(e.to_string()))
}

#[cfg(test)]
mod tests;
