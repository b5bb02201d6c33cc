//! Diffeological vector pseudo-bundles over standard `ℝ^k`.
//!
//! Generated bundles use base-identity generators `p(x, u) = (x, g(x, u))`,
//! so the fibre over `x0` is the space generated by `u ↦ g(x0, u)`.

mod glue;
mod profile;

use std::fmt;

use num_traits::Zero;

use crate::dvs::{self, DVSpace};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RatMatrix};
use crate::pwpoly::{OrthantPoly, PlotMap};
use crate::rat::{self, fmt_rat, Rat};

pub use glue::{
    check_gluing_commutes, check_subbundle_gluing, glue, induced_gluing, lift_from_map, CommuteKind, CommuteReport,
    GluePoint, Gluing, GluingSet, GluingSpec, SubbundleReport, SubspaceGluing,
};
pub use profile::{cell_witness, dual_profile, Bound, DualProfile, Region, Sign3, Stratum};
pub(crate) use glue::Side;
pub(crate) use profile::{fmt_cell, side_roots, to_upoly};

/// A point of the base. Glued bases are a tagged union of the two pieces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasePoint {
    Plain(Vec<Rat>),
    Left(Vec<Rat>),
    Right(Vec<Rat>),
}

impl BasePoint {
    pub fn coords(&self) -> &[Rat] {
        match self {
            BasePoint::Plain(c) | BasePoint::Left(c) | BasePoint::Right(c) => c,
        }
    }
}

pub(crate) fn fmt_point(p: &[Rat]) -> String {
    format!("({})", p.iter().map(fmt_rat).collect::<Vec<_>>().join(", "))
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePoint::Plain(c) => f.write_str(&fmt_point(c)),
            BasePoint::Left(c) => write!(f, "left{}", fmt_point(c)),
            BasePoint::Right(c) => write!(f, "right{}", fmt_point(c)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    DirectSum,
    Tensor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleKind {
    /// Base-identity generators; an empty list is the standard trivial bundle.
    Generated(Vec<PlotMap>),
    /// Every fibre coarse.
    PullbackCoarse,
    Glued(Box<Gluing>),
    /// Coordinate sub-bundle keeping the listed fibre coordinates.
    Sub { parent: Box<PseudoBundle>, keep: Vec<usize> },
    /// Fibrewise combination of bundles at least one of which is glued.
    Combined { op: CombineOp, left: Box<PseudoBundle>, right: Box<PseudoBundle> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoBundle {
    total_dim: usize,
    base_dim: usize,
    kind: BundleKind,
}

/// A fibre together with how much is known about it. Sub-bundle fibres may
/// only be bounded: `space` then carries the plots known to belong to the
/// subset diffeology, so its dual is an upper bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fibre {
    pub space: DVSpace,
    pub exact: bool,
    /// Lower bound on the dual dimension (equal to the dual of `space` when exact).
    pub dual_lower: usize,
}

impl Fibre {
    fn exact(space: DVSpace) -> Self {
        let d = dvs::smooth_dual(&space).dim();
        Fibre { space, exact: true, dual_lower: d }
    }

    pub fn dual_upper(&self) -> usize {
        dvs::smooth_dual(&self.space).dim()
    }
}

impl PseudoBundle {
    /// Validates base-identity form: the first `k` components of every
    /// generator are exactly the first `k` domain variables.
    pub fn generated(total_dim: usize, base_dim: usize, generators: Vec<PlotMap>) -> Result<Self> {
        if base_dim >= total_dim {
            return Err(Error::DimensionMismatch { context: "bundle base".into(), expected: total_dim - 1, found: base_dim });
        }
        for (j, g) in generators.iter().enumerate() {
            if g.codomain_dim() != total_dim {
                return Err(Error::DimensionMismatch {
                    context: format!("generator {}", j + 1),
                    expected: total_dim,
                    found: g.codomain_dim(),
                });
            }
            if g.domain_dim() < base_dim {
                return Err(Error::NotBaseIdentity { generator: j + 1, component: g.domain_dim() + 1 });
            }
            for i in 0..base_dim {
                if *g.component(i) != OrthantPoly::var(g.domain_dim(), i) {
                    return Err(Error::NotBaseIdentity { generator: j + 1, component: i + 1 });
                }
            }
        }
        Ok(PseudoBundle { total_dim, base_dim, kind: BundleKind::Generated(generators) })
    }

    pub fn standard(total_dim: usize, base_dim: usize) -> Result<Self> {
        Self::generated(total_dim, base_dim, Vec::new())
    }

    pub fn pullback_coarse(total_dim: usize, base_dim: usize) -> Result<Self> {
        if base_dim >= total_dim {
            return Err(Error::DimensionMismatch { context: "bundle base".into(), expected: total_dim - 1, found: base_dim });
        }
        Ok(PseudoBundle { total_dim, base_dim, kind: BundleKind::PullbackCoarse })
    }

    pub(crate) fn from_kind(total_dim: usize, base_dim: usize, kind: BundleKind) -> Self {
        PseudoBundle { total_dim, base_dim, kind }
    }

    /// Total dimension; for glued bundles, that of the left piece.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Fibre dimension; for glued bundles, that of the left piece.
    pub fn fibre_dim(&self) -> usize {
        self.total_dim - self.base_dim
    }

    pub fn kind(&self) -> &BundleKind {
        &self.kind
    }

    pub fn generators(&self) -> &[PlotMap] {
        match &self.kind {
            BundleKind::Generated(g) => g,
            _ => &[],
        }
    }

    pub fn is_glued(&self) -> bool {
        match &self.kind {
            BundleKind::Glued(_) => true,
            BundleKind::Combined { left, right, .. } => left.is_glued() || right.is_glued(),
            BundleKind::Sub { parent, .. } => parent.is_glued(),
            _ => false,
        }
    }

    /// Fibre dimension over a base point.
    pub fn fibre_dim_at(&self, x: &BasePoint) -> Result<usize> {
        Ok(match &self.kind {
            BundleKind::Glued(g) => match g.resolve(x)? {
                (glue::Side::Left, _) => g.left.fibre_dim(),
                (glue::Side::Right, _) => g.right.fibre_dim(),
            },
            BundleKind::Combined { op, left, right } => {
                let (a, b) = (left.fibre_dim_at(x)?, right.fibre_dim_at(x)?);
                match op {
                    CombineOp::DirectSum => a + b,
                    CombineOp::Tensor => a * b,
                }
            }
            BundleKind::Sub { keep, .. } => keep.len(),
            _ => self.fibre_dim(),
        })
    }

    pub(crate) fn plain_point<'a>(&self, x: &'a BasePoint) -> Result<&'a [Rat]> {
        let BasePoint::Plain(c) = x else {
            return Err(Error::Document(format!("{x} is a point of a glued base, the bundle is not glued")));
        };
        if c.len() != self.base_dim {
            return Err(Error::PointDimMismatch { expected: self.base_dim, found: c.len() });
        }
        Ok(c)
    }
}

/// The fibre part `u ↦ g(x0, u)` of a base-identity generator.
pub(crate) fn fibre_generator(p: &PlotMap, base_dim: usize, x0: &[Rat]) -> Result<PlotMap> {
    let vars: Vec<usize> = (0..base_dim).collect();
    let fib: Vec<usize> = (base_dim..p.codomain_dim()).collect();
    p.select(&fib).substitute_point(&vars, x0)
}

pub fn fibre_space(b: &PseudoBundle, x: &BasePoint) -> Result<Fibre> {
    match &b.kind {
        BundleKind::Generated(gens) => {
            let x0 = b.plain_point(x)?;
            let fibre_gens = gens.iter().map(|p| fibre_generator(p, b.base_dim, x0)).collect::<Result<Vec<_>>>()?;
            Ok(Fibre::exact(DVSpace::generated_or_standard(b.fibre_dim(), fibre_gens)?))
        }
        BundleKind::PullbackCoarse => {
            b.plain_point(x)?;
            Ok(Fibre::exact(DVSpace::coarse(b.fibre_dim())))
        }
        BundleKind::Glued(g) => {
            let (side, p) = g.resolve(x)?;
            match side {
                glue::Side::Left => fibre_space(&g.left, &BasePoint::Plain(p)),
                glue::Side::Right => fibre_space(&g.right, &BasePoint::Plain(p)),
            }
        }
        BundleKind::Sub { parent, keep } => {
            let pf = fibre_space(parent, x)?;
            let sub = sub_fibre(&pf.space, keep)?;
            Ok(if pf.exact { sub } else { Fibre { exact: false, dual_lower: 0, ..sub } })
        }
        BundleKind::Combined { op, left, right } => {
            let (a, c) = (fibre_space(left, x)?, fibre_space(right, x)?);
            let space = match op {
                CombineOp::DirectSum => dvs::direct_sum(&a.space, &c.space)?,
                CombineOp::Tensor => dvs::tensor(&a.space, &c.space)?,
            };
            let lower = match op {
                CombineOp::DirectSum => a.dual_lower + c.dual_lower,
                CombineOp::Tensor => a.dual_lower * c.dual_lower,
            };
            let exact = a.exact && c.exact;
            let dual_lower = if exact { dvs::smooth_dual(&space).dim() } else { lower };
            Ok(Fibre { space, exact, dual_lower })
        }
    }
}

/// Subset diffeology of the coordinate subspace spanned by `keep`.
///
/// Every plot of `v` landing in the subspace has the form
/// `F + Σ h (p_j ∘ ψ)` with vanishing complement part. If one linear map `L`
/// sends the non-smooth complement part of every generator to its non-smooth
/// kept part, such a plot differs from a smooth map by a combination of the
/// generators whose complement part is smooth, and those generators
/// (restricted) are plots of the subspace: the fibre is then exact.
/// Otherwise the restricted plots only bound the dual from above, and
/// restrictions of smooth functionals of `v` bound it from below.
pub fn sub_fibre(v: &DVSpace, keep: &[usize]) -> Result<Fibre> {
    let n = v.dim();
    for (i, &c) in keep.iter().enumerate() {
        if c >= n || keep[..i].contains(&c) {
            return Err(Error::NonCoordinateSubspace(format!("coordinate {} of a fibre of dimension {n}", c + 1)));
        }
    }
    let comp: Vec<usize> = (0..n).filter(|c| !keep.contains(c)).collect();
    let m = keep.len();
    match v.kind() {
        dvs::SpaceKind::Standard => return Ok(Fibre::exact(DVSpace::standard(m))),
        dvs::SpaceKind::Coarse => return Ok(Fibre::exact(DVSpace::coarse(m))),
        dvs::SpaceKind::Generated(_) => {}
    }
    let mut kept = Vec::new();
    let mut dependent = Vec::new();
    for p in v.generators() {
        let pc = p.select(&comp);
        let pz = p.select(keep);
        if pc.is_ordinarily_smooth() {
            kept.push(pz);
        } else {
            dependent.push((pz, pc));
        }
    }
    let space = DVSpace::generated_or_standard(m, kept)?;
    if dependent_parts_eliminate(&dependent, m, comp.len()) {
        return Ok(Fibre::exact(space));
    }
    let parent_dual = dvs::smooth_dual(v);
    let restricted: Vec<Vec<Rat>> = parent_dual.basis.iter().map(|f| keep.iter().map(|&c| f[c].clone()).collect()).collect();
    let lower = crate::linalg::span_rank(m, &restricted);
    Ok(Fibre { space, exact: false, dual_lower: lower })
}

/// Whether one `L` (`kept × complement`) satisfies `ns(p_Z) = L · ns(p_c)`
/// for every listed generator.
fn dependent_parts_eliminate(dependent: &[(PlotMap, PlotMap)], m: usize, c: usize) -> bool {
    if dependent.is_empty() {
        return true;
    }
    // Rows: one per (generator, monomial); unknown row of L solved per kept coordinate.
    let mut a_rows: Vec<Vec<Rat>> = Vec::new();
    let mut b_rows: Vec<Vec<Rat>> = Vec::new();
    for (pz, pc) in dependent {
        let mut monos: Vec<crate::pwpoly::Monomial> = Vec::new();
        for comp in pz.components().iter().chain(pc.components()) {
            monos.extend(comp.terms().filter(|(mo, _)| !mo.is_smooth()).map(|(mo, _)| mo.clone()));
        }
        monos.sort();
        monos.dedup();
        for mo in monos {
            a_rows.push(pc.components().iter().map(|x| x.coeff(&mo)).collect());
            b_rows.push(pz.components().iter().map(|x| x.coeff(&mo)).collect());
        }
    }
    let a = Matrix::from_rows(c, a_rows);
    (0..m).all(|z| {
        let b: Vec<Rat> = b_rows.iter().map(|r| r[z].clone()).collect();
        a.solve(&b).is_some()
    })
}

/// Places the fibre components of a base-identity generator at the given
/// fibre positions of a combined bundle with shared base.
fn embed_generator(p: &PlotMap, k: usize, total: usize, at: &[usize]) -> PlotMap {
    let d = p.domain_dim();
    let mut comps: Vec<OrthantPoly> = (0..k).map(|i| OrthantPoly::var(d, i)).collect();
    comps.resize(total, OrthantPoly::zero(d));
    for (c, &t) in p.components()[k..].iter().zip(at) {
        comps[k + t] = c.clone();
    }
    PlotMap::new(d, comps).expect("embedding preserves domain")
}

/// `p` on `(x, u)` and `q` on `(x, u')` moved to a joint domain `(x, u, u')`.
fn joint_over_base(p: &PlotMap, q: &PlotMap, k: usize) -> (PlotMap, PlotMap) {
    let (dp, dq) = (p.domain_dim(), q.domain_dim());
    let d = dp + dq - k;
    let pm: Vec<usize> = (0..dp).collect();
    let qm: Vec<usize> = (0..k).chain(dp..d).collect();
    (p.remap_domain(d, &pm), q.remap_domain(d, &qm))
}

fn check_same_base(a: &PseudoBundle, b: &PseudoBundle) -> Result<()> {
    if a.base_dim != b.base_dim {
        return Err(Error::BaseMismatch(format!("base dimensions {} and {}", a.base_dim, b.base_dim)));
    }
    Ok(())
}

fn combined(op: CombineOp, a: &PseudoBundle, b: &PseudoBundle) -> PseudoBundle {
    let fib = match op {
        CombineOp::DirectSum => a.fibre_dim() + b.fibre_dim(),
        CombineOp::Tensor => a.fibre_dim() * b.fibre_dim(),
    };
    PseudoBundle {
        total_dim: a.base_dim + fib,
        base_dim: a.base_dim,
        kind: BundleKind::Combined { op, left: Box::new(a.clone()), right: Box::new(b.clone()) },
    }
}

pub fn direct_sum(a: &PseudoBundle, b: &PseudoBundle) -> Result<PseudoBundle> {
    check_same_base(a, b)?;
    let k = a.base_dim;
    let (m1, m2) = (a.fibre_dim(), b.fibre_dim());
    match (&a.kind, &b.kind) {
        (BundleKind::Generated(ga), BundleKind::Generated(gb)) => {
            let total = k + m1 + m2;
            let left: Vec<usize> = (0..m1).collect();
            let right: Vec<usize> = (m1..m1 + m2).collect();
            let gens = ga
                .iter()
                .map(|p| embed_generator(p, k, total, &left))
                .chain(gb.iter().map(|q| embed_generator(q, k, total, &right)))
                .filter(|g| !g.is_ordinarily_smooth())
                .collect();
            PseudoBundle::generated(total, k, gens)
        }
        (BundleKind::PullbackCoarse, BundleKind::PullbackCoarse) => PseudoBundle::pullback_coarse(k + m1 + m2, k),
        (BundleKind::PullbackCoarse, BundleKind::Generated(_)) | (BundleKind::Generated(_), BundleKind::PullbackCoarse) => {
            Err(Error::CoarseFactor)
        }
        _ => Ok(combined(CombineOp::DirectSum, a, b)),
    }
}

/// Fibrewise tensor product; fibre coordinate `e_v ⊗ e_w ↦ v·m2 + w`.
pub fn tensor(a: &PseudoBundle, b: &PseudoBundle) -> Result<PseudoBundle> {
    check_same_base(a, b)?;
    let k = a.base_dim;
    let (m1, m2) = (a.fibre_dim(), b.fibre_dim());
    let total = k + m1 * m2;
    match (&a.kind, &b.kind) {
        (BundleKind::Generated(ga), BundleKind::Generated(gb)) => {
            let mut gens = Vec::new();
            for p in ga {
                for w in 0..m2 {
                    let at: Vec<usize> = (0..m1).map(|v| v * m2 + w).collect();
                    gens.push(embed_generator(p, k, total, &at));
                }
            }
            for q in gb {
                for v in 0..m1 {
                    let at: Vec<usize> = (0..m2).map(|w| v * m2 + w).collect();
                    gens.push(embed_generator(q, k, total, &at));
                }
            }
            for p in ga {
                for q in gb {
                    let (pj, qj) = joint_over_base(p, q, k);
                    let d = pj.domain_dim();
                    let mut comps: Vec<OrthantPoly> = (0..k).map(|i| OrthantPoly::var(d, i)).collect();
                    for v in 0..m1 {
                        for w in 0..m2 {
                            comps.push(pj.component(k + v).mul(qj.component(k + w)));
                        }
                    }
                    gens.push(PlotMap::new(d, comps)?);
                }
            }
            gens.retain(|g| !g.is_ordinarily_smooth());
            PseudoBundle::generated(total, k, gens)
        }
        (BundleKind::PullbackCoarse, _) | (_, BundleKind::PullbackCoarse) => Err(Error::CoarseFactor),
        _ => Ok(combined(CombineOp::Tensor, a, b)),
    }
}

/// Reads fibre coordinate indices from standard basis vectors given in total
/// coordinates.
pub fn fibre_coordinates(b: &PseudoBundle, vectors: &[Vec<Rat>]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for v in vectors {
        let shown = fmt_point(v);
        if v.len() != b.total_dim {
            return Err(Error::NonCoordinateSubspace(format!("{shown} has length {}, expected {}", v.len(), b.total_dim)));
        }
        let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
        match nz.as_slice() {
            [i] if *i >= b.base_dim && v[*i] == rat::one() => {
                if out.contains(&(i - b.base_dim)) {
                    return Err(Error::NonCoordinateSubspace(format!("{shown} is repeated")));
                }
                out.push(i - b.base_dim);
            }
            _ => return Err(Error::NonCoordinateSubspace(format!("{shown} is not a fibre coordinate vector"))),
        }
    }
    out.sort();
    Ok(out)
}

/// Quotient by a coordinate subspace of the fibre (given by total-coordinate
/// basis vectors): generators are projected to the complement.
pub fn quotient(b: &PseudoBundle, vectors: &[Vec<Rat>]) -> Result<PseudoBundle> {
    let kill = fibre_coordinates(b, vectors)?;
    let k = b.base_dim;
    let keep: Vec<usize> = (0..b.fibre_dim()).filter(|c| !kill.contains(c)).collect();
    let total = k + keep.len();
    match &b.kind {
        BundleKind::Generated(gens) => {
            let comps: Vec<usize> = (0..k).chain(keep.iter().map(|c| k + c)).collect();
            let gens = gens.iter().map(|p| p.select(&comps)).filter(|g| !g.is_ordinarily_smooth()).collect();
            PseudoBundle::generated(total, k, gens)
        }
        BundleKind::PullbackCoarse => PseudoBundle::pullback_coarse(total, k),
        _ => Err(Error::UnsupportedGluing("quotients of glued or derived bundles".into())),
    }
}

/// Coordinate sub-bundle spanned by the given total-coordinate basis vectors.
pub fn sub(b: &PseudoBundle, vectors: &[Vec<Rat>]) -> Result<PseudoBundle> {
    let keep = fibre_coordinates(b, vectors)?;
    Ok(PseudoBundle {
        total_dim: b.base_dim + keep.len(),
        base_dim: b.base_dim,
        kind: BundleKind::Sub { parent: Box::new(b.clone()), keep },
    })
}

/// Fibre-coordinate matrix of a fibrewise linear bundle map given on total
/// coordinates: it must be `diag(I_k, F)`.
pub fn fibre_block(m: &RatMatrix, k: usize) -> Result<RatMatrix> {
    if m.rows < k || m.cols < k {
        return Err(Error::ProjectionMismatch(format!("a {}×{} matrix cannot fix a base of dimension {k}", m.rows, m.cols)));
    }
    for i in 0..m.rows {
        for j in 0..m.cols {
            let expected_base = i < k || j < k;
            if expected_base {
                let want = if i == j { rat::one() } else { rat::zero() };
                if m.data[i][j] != want {
                    return Err(Error::ProjectionMismatch(format!("entry ({}, {}) mixes base and fibre", i + 1, j + 1)));
                }
            }
        }
    }
    let data = (k..m.rows).map(|i| m.data[i][k..].to_vec()).collect();
    Ok(Matrix::from_rows(m.cols - k, data))
}
