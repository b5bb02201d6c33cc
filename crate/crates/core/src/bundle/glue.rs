//! Gluing of pseudo-bundles along a base map and a fibrewise linear lift.
//!
//! Glued bundles stay symbolic: a point of the glued base is a point of the
//! left base outside the gluing set or any point of the right base, and the
//! fibre over a glued point is the fibre of the right bundle.

use num_traits::Zero;

use crate::bundle::profile::{cell_witness, glued_witnesses, Sign3};
use crate::bundle::{direct_sum, fibre_block, fibre_space, fmt_point, tensor, BasePoint, BundleKind, CombineOp, PseudoBundle};
use crate::dvs::{self, DVSpace};
use crate::error::{Error, Result};
use crate::linalg::{in_span, span_rank, Matrix, RatMatrix};
use crate::pwpoly::OrthantPoly;
use crate::rat::{self, Rat};
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

/// `y ↦ f(y)` with the lift `f̃` on the fibre over `y`, in fibre coordinates
/// (`m2 × m1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluePoint {
    pub y: Vec<Rat>,
    pub fy: Vec<Rat>,
    pub lift: RatMatrix,
}

/// Gluing along the coordinate subspace `{x : x_i = 0 for i ∉ coords}` of the
/// left base. With `t` the free coordinates, `f(t) = map · t + offset` and the
/// lift has entries in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceGluing {
    pub coords: Vec<usize>,
    pub map: RatMatrix,
    pub offset: Vec<Rat>,
    pub lift: Vec<Vec<OrthantPoly>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingSet {
    Points(Vec<GluePoint>),
    Subspace(SubspaceGluing),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingSpec {
    pub set: GluingSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub left: PseudoBundle,
    pub right: PseudoBundle,
    pub spec: GluingSpec,
}

impl SubspaceGluing {
    fn params(&self, y: &[Rat]) -> Vec<Rat> {
        self.coords.iter().map(|&i| y[i].clone()).collect()
    }

    fn contains(&self, y: &[Rat]) -> bool {
        (0..y.len()).all(|i| self.coords.contains(&i) || y[i].is_zero())
    }

    fn image(&self, t: &[Rat]) -> Vec<Rat> {
        self.map.mul_vec(t).into_iter().zip(&self.offset).map(|(a, b)| a + b).collect()
    }

    fn lift_at(&self, t: &[Rat]) -> RatMatrix {
        let cols = self.lift.first().map_or(0, Vec::len);
        Matrix::from_rows(cols, self.lift.iter().map(|r| r.iter().map(|e| e.eval(t)).collect()).collect())
    }

    /// Left-base points standing for the strata of the gluing set.
    fn witnesses(&self, base_dim: usize) -> Vec<Vec<Rat>> {
        Sign3::all(self.coords.len())
            .into_iter()
            .map(|cell| {
                let t = cell_witness(&cell);
                let mut y = vec![rat::zero(); base_dim];
                for (i, &c) in self.coords.iter().enumerate() {
                    y[c] = t[i].clone();
                }
                y
            })
            .collect()
    }
}

impl GluingSpec {
    pub fn points(points: Vec<GluePoint>) -> Self {
        GluingSpec { set: GluingSet::Points(points) }
    }

    /// Whether `y` lies in the gluing set.
    pub fn contains(&self, y: &[Rat]) -> bool {
        match &self.set {
            GluingSet::Points(ps) => ps.iter().any(|p| p.y == y),
            GluingSet::Subspace(s) => s.contains(y),
        }
    }

    pub fn image(&self, y: &[Rat]) -> Option<Vec<Rat>> {
        match &self.set {
            GluingSet::Points(ps) => ps.iter().find(|p| p.y == y).map(|p| p.fy.clone()),
            GluingSet::Subspace(s) => s.contains(y).then(|| s.image(&s.params(y))),
        }
    }

    pub fn lift_at(&self, y: &[Rat]) -> Option<RatMatrix> {
        match &self.set {
            GluingSet::Points(ps) => ps.iter().find(|p| p.y == y).map(|p| p.lift.clone()),
            GluingSet::Subspace(s) => s.contains(y).then(|| s.lift_at(&s.params(y))),
        }
    }

    /// Points of the gluing set at which fibrewise checks are made: all of a
    /// finite set, or one point per stratum of a subspace.
    pub fn check_points(&self, base_dim: usize) -> Vec<Vec<Rat>> {
        match &self.set {
            GluingSet::Points(ps) => ps.iter().map(|p| p.y.clone()).collect(),
            GluingSet::Subspace(s) => s.witnesses(base_dim),
        }
    }

    /// Images of the check points in the right base.
    pub(crate) fn glued_images(&self) -> Vec<Vec<Rat>> {
        match &self.set {
            GluingSet::Points(ps) => ps.iter().map(|p| p.fy.clone()).collect(),
            GluingSet::Subspace(s) => Sign3::all(s.coords.len()).iter().map(|c| s.image(&cell_witness(c))).collect(),
        }
    }
}

impl Gluing {
    pub(crate) fn resolve(&self, x: &BasePoint) -> Result<(Side, Vec<Rat>)> {
        let check = |c: &[Rat], k: usize| {
            if c.len() == k {
                Ok(())
            } else {
                Err(Error::PointDimMismatch { expected: k, found: c.len() })
            }
        };
        match x {
            BasePoint::Left(c) => {
                check(c, self.left.base_dim())?;
                match self.spec.image(c) {
                    Some(fy) => Ok((Side::Right, fy)),
                    None => Ok((Side::Left, c.clone())),
                }
            }
            BasePoint::Right(c) => {
                check(c, self.right.base_dim())?;
                Ok((Side::Right, c.clone()))
            }
            BasePoint::Plain(_) => Err(Error::Document(format!("{x} does not name a side of the glued base"))),
        }
    }
}

/// Lift matrix from component expressions in the left fibre variables
/// `v1..vm`; each component must be a linear form.
pub fn lift_from_map(components: &[OrthantPoly], source_dim: usize) -> Result<RatMatrix> {
    let mut m = RatMatrix::zeros(components.len(), source_dim);
    for (r, c) in components.iter().enumerate() {
        if c.dim() != source_dim {
            return Err(Error::DimensionMismatch { context: "lift component".into(), expected: source_dim, found: c.dim() });
        }
        for (mono, coef) in c.terms() {
            let exps = mono.exps();
            let deg: u32 = exps.iter().sum();
            if !mono.is_smooth() || deg != 1 {
                return Err(Error::LiftNotLinear(format!("component {} is {c}", r + 1)));
            }
            let j = exps.iter().position(|&e| e == 1).unwrap();
            m.data[r][j] = coef.clone();
        }
    }
    Ok(m)
}

fn lift_verdict(lift: &RatMatrix, from: &DVSpace, to: &DVSpace, at: &[Rat]) -> Result<()> {
    match dvs::is_smooth_linear_map(lift, from, to)? {
        Verdict::Smooth(_) => Ok(()),
        Verdict::NotSmooth(w) => Err(Error::LiftNotSmooth(format!("over {}: {w}", fmt_point(at)))),
        Verdict::Unknown(r) => Err(Error::LiftUndecided(format!("over {}: {r}", fmt_point(at)))),
    }
}

fn check_shape(lift: &RatMatrix, b1: &PseudoBundle, b2: &PseudoBundle, at: &[Rat]) -> Result<()> {
    let (m1, m2) = (b1.fibre_dim(), b2.fibre_dim());
    if lift.rows != m2 || lift.cols != m1 {
        return Err(Error::DimensionMismatch {
            context: format!("lift over {}", fmt_point(at)),
            expected: m2 * m1,
            found: lift.rows * lift.cols,
        });
    }
    Ok(())
}

/// Glues `b1` to `b2`. Both must be unglued; every fibre map of the lift is
/// checked for smoothness between the corresponding fibres.
pub fn glue(b1: &PseudoBundle, b2: &PseudoBundle, spec: GluingSpec) -> Result<PseudoBundle> {
    if b1.is_glued() || b2.is_glued() {
        return Err(Error::UnsupportedGluing("glued bundles cannot be glued again".into()));
    }
    let (k1, k2) = (b1.base_dim(), b2.base_dim());
    match &spec.set {
        GluingSet::Points(ps) => {
            for (i, p) in ps.iter().enumerate() {
                if p.y.len() != k1 {
                    return Err(Error::PointDimMismatch { expected: k1, found: p.y.len() });
                }
                if p.fy.len() != k2 {
                    return Err(Error::PointDimMismatch { expected: k2, found: p.fy.len() });
                }
                for q in &ps[..i] {
                    if q.y == p.y {
                        return Err(Error::FNotInjective(format!("{} is listed twice", fmt_point(&p.y))));
                    }
                    if q.fy == p.fy {
                        return Err(Error::FNotInjective(format!(
                            "{} and {} both map to {}",
                            fmt_point(&q.y),
                            fmt_point(&p.y),
                            fmt_point(&p.fy)
                        )));
                    }
                }
                check_shape(&p.lift, b1, b2, &p.y)?;
            }
        }
        GluingSet::Subspace(s) => {
            let r = s.coords.len();
            if s.coords.iter().any(|&c| c >= k1) || s.map.rows != k2 || s.map.cols != r || s.offset.len() != k2 {
                return Err(Error::UnsupportedGluing("subspace gluing data does not match the bases".into()));
            }
            if s.map.rank() < r {
                return Err(Error::FNotInjective("the affine base map has a kernel".into()));
            }
            if s.lift.len() != b2.fibre_dim() || s.lift.iter().any(|row| row.len() != b1.fibre_dim()) {
                return Err(Error::DimensionMismatch {
                    context: "subspace lift".into(),
                    expected: b2.fibre_dim() * b1.fibre_dim(),
                    found: s.lift.iter().map(Vec::len).sum(),
                });
            }
            for row in &s.lift {
                for e in row {
                    if !e.is_ordinarily_smooth() {
                        return Err(Error::LiftNotSmooth(format!("lift entry {e} is not smooth along the gluing set")));
                    }
                }
            }
        }
    }
    for y in spec.check_points(k1) {
        let lift = spec.lift_at(&y).unwrap();
        let fy = spec.image(&y).unwrap();
        let from = fibre_space(b1, &BasePoint::Plain(y.clone()))?;
        let to = fibre_space(b2, &BasePoint::Plain(fy))?;
        if !from.exact || !to.exact {
            return Err(Error::LiftUndecided(format!("fibre over {} is only bounded", fmt_point(&y))));
        }
        lift_verdict(&lift, &from.space, &to.space, &y)?;
    }
    let gluing = Gluing { left: b1.clone(), right: b2.clone(), spec };
    Ok(PseudoBundle::from_kind(b1.total_dim(), k1, BundleKind::Glued(Box::new(gluing))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubbundleReport {
    pub holds: bool,
    /// Offending point of the gluing set.
    pub point: Option<Vec<Rat>>,
    /// Offending vector of the left sub-bundle, in total coordinates.
    pub witness: Option<Vec<Rat>>,
}

/// Whether `f̃` maps the fibres of the coordinate sub-bundle `z1` of the
/// left bundle into those of `z2` (fibre coordinate lists) over the gluing set.
pub fn check_subbundle_gluing(g: &Gluing, z1: &[usize], z2: &[usize]) -> Result<SubbundleReport> {
    let (m1, m2) = (g.left.fibre_dim(), g.right.fibre_dim());
    if let Some(&c) = z1.iter().find(|&&c| c >= m1).or_else(|| z2.iter().find(|&&c| c >= m2)) {
        return Err(Error::NonCoordinateSubspace(format!("fibre coordinate {} out of range", c + 1)));
    }
    let k = g.left.base_dim();
    let symbolic = match &g.spec.set {
        GluingSet::Subspace(s) => Some(s),
        GluingSet::Points(_) => None,
    };
    for y in g.spec.check_points(k) {
        let lift = g.spec.lift_at(&y).unwrap();
        for &i in z1 {
            let bad = (0..m2).any(|r| {
                !z2.contains(&r)
                    && match symbolic {
                        Some(s) => !s.lift[r][i].is_zero(),
                        None => !lift.data[r][i].is_zero(),
                    }
            });
            if bad {
                let mut v = vec![rat::zero(); g.left.total_dim()];
                v[k + i] = rat::one();
                return Ok(SubbundleReport { holds: false, point: Some(y), witness: Some(v) });
            }
        }
    }
    Ok(SubbundleReport { holds: true, point: None, witness: None })
}

/// `f̃' = F2 ∘ f̃ ∘ F1` for fibrewise maps `F1 : B1' → B1` and `F2 : B2 → B2'`
/// given on total coordinates.
pub fn induced_gluing(
    g: &Gluing,
    b1p: &PseudoBundle,
    b2p: &PseudoBundle,
    f1: &RatMatrix,
    f2: &RatMatrix,
) -> Result<GluingSpec> {
    let (b1, b2) = (&g.left, &g.right);
    if b1p.base_dim() != b1.base_dim() || b2p.base_dim() != b2.base_dim() {
        return Err(Error::ProjectionMismatch("induced bundles must share the bases".into()));
    }
    if f1.rows != b1.total_dim() || f1.cols != b1p.total_dim() || f2.rows != b2p.total_dim() || f2.cols != b2.total_dim() {
        return Err(Error::ProjectionMismatch("bundle map shapes do not match the bundles".into()));
    }
    let f1b = fibre_block(f1, b1.base_dim())?;
    let f2b = fibre_block(f2, b2.base_dim())?;
    let k = b1.base_dim();
    for y in g.spec.check_points(k) {
        let fy = g.spec.image(&y).unwrap();
        let p = BasePoint::Plain(y.clone());
        let q = BasePoint::Plain(fy.clone());
        lift_verdict(&f1b, &fibre_space(b1p, &p)?.space, &fibre_space(b1, &p)?.space, &y)?;
        lift_verdict(&f2b, &fibre_space(b2, &q)?.space, &fibre_space(b2p, &q)?.space, &fy)?;
    }
    let set = match &g.spec.set {
        GluingSet::Points(ps) => GluingSet::Points(
            ps.iter()
                .map(|p| GluePoint { y: p.y.clone(), fy: p.fy.clone(), lift: f2b.mul(&p.lift).mul(&f1b) })
                .collect(),
        ),
        GluingSet::Subspace(s) => {
            let d = s.coords.len();
            let poly = |c: &Rat| OrthantPoly::constant(d, c.clone());
            let mul = |a: &[Vec<OrthantPoly>], b: &[Vec<OrthantPoly>]| -> Vec<Vec<OrthantPoly>> {
                a.iter()
                    .map(|row| {
                        (0..b[0].len())
                            .map(|j| row.iter().zip(b).fold(OrthantPoly::zero(d), |acc, (x, br)| acc.add(&x.mul(&br[j]))))
                            .collect()
                    })
                    .collect()
            };
            let lift_f1: Vec<Vec<OrthantPoly>> = f1b.data.iter().map(|r| r.iter().map(poly).collect()).collect();
            let lift_f2: Vec<Vec<OrthantPoly>> = f2b.data.iter().map(|r| r.iter().map(poly).collect()).collect();
            GluingSet::Subspace(SubspaceGluing { lift: mul(&mul(&lift_f2, &s.lift), &lift_f1), ..s.clone() })
        }
    };
    Ok(GluingSpec { set })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommuteKind {
    Product,
    Tensor,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommuteReport {
    /// Fibre dual dimension at every witness, the same on both sides.
    pub witnesses: Vec<(BasePoint, usize)>,
    /// For the dual case: over each glued point `y`, the matrix of
    /// `f̃* : w ↦ w ∘ f̃` in the computed dual bases (right dual to left dual).
    pub dual_lifts: Vec<(Vec<Rat>, RatMatrix)>,
}

fn block_diag(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let mut m = RatMatrix::zeros(a.rows + b.rows, a.cols + b.cols);
    for i in 0..a.rows {
        m.data[i][..a.cols].clone_from_slice(&a.data[i]);
    }
    for i in 0..b.rows {
        m.data[a.rows + i][a.cols..].clone_from_slice(&b.data[i]);
    }
    m
}

fn kron(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let mut m = RatMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m.data[i * b.rows + r][j * b.cols + c] = &a.data[i][j] * &b.data[r][c];
                }
            }
        }
    }
    m
}

fn combine_specs(op: CombineOp, s1: &GluingSpec, s2: &GluingSpec) -> Result<GluingSpec> {
    let (GluingSet::Points(p1), GluingSet::Points(p2)) = (&s1.set, &s2.set) else {
        return Err(Error::UnsupportedGluing("commutation checks need finite gluing sets".into()));
    };
    let same_map = p1.len() == p2.len() && p1.iter().all(|a| p2.iter().any(|b| a.y == b.y && a.fy == b.fy));
    if !same_map {
        return Err(Error::BaseMismatch("the two gluings use different base maps".into()));
    }
    let points = p1
        .iter()
        .map(|a| {
            let b = p2.iter().find(|b| b.y == a.y).unwrap();
            let lift = match op {
                CombineOp::DirectSum => block_diag(&a.lift, &b.lift),
                CombineOp::Tensor => kron(&a.lift, &b.lift),
            };
            GluePoint { y: a.y.clone(), fy: a.fy.clone(), lift }
        })
        .collect();
    Ok(GluingSpec::points(points))
}

fn as_gluing(b: &PseudoBundle) -> Result<&Gluing> {
    match b.kind() {
        BundleKind::Glued(g) => Ok(g),
        _ => Err(Error::Document("expected a glued bundle".into())),
    }
}

/// Compares glue-then-combine with combine-then-glue (product, tensor), or
/// checks the hypothesis under which gluing commutes with taking duals and
/// builds `f̃*` (dual; `second` is ignored).
pub fn check_gluing_commutes(kind: CommuteKind, first: &PseudoBundle, second: Option<&PseudoBundle>) -> Result<CommuteReport> {
    let g1 = as_gluing(first)?;
    if kind == CommuteKind::Dual {
        return dual_hypothesis(g1);
    }
    let second = second.ok_or_else(|| Error::Document("commutation needs two gluings".into()))?;
    let g2 = as_gluing(second)?;
    let op = if kind == CommuteKind::Product { CombineOp::DirectSum } else { CombineOp::Tensor };
    let combine = |a: &PseudoBundle, b: &PseudoBundle| match op {
        CombineOp::DirectSum => direct_sum(a, b),
        CombineOp::Tensor => tensor(a, b),
    };
    let spec = combine_specs(op, &g1.spec, &g2.spec)?;
    let glued_first = combine(first, second)?;
    let combined_first = glue(&combine(&g1.left, &g2.left)?, &combine(&g1.right, &g2.right)?, spec)?;
    let mut points = glued_witnesses(&combined_first)?;
    for w in glued_witnesses(&glued_first)? {
        if !points.contains(&w) {
            points.push(w);
        }
    }
    let mut witnesses = Vec::new();
    for w in points {
        let a = fibre_space(&glued_first, &w)?;
        let b = fibre_space(&combined_first, &w)?;
        let mismatch = |reason: String| Error::WitnessMismatch { point: w.to_string(), reason };
        if a.space.dim() != b.space.dim() {
            return Err(mismatch(format!("fibre dimensions {} and {}", a.space.dim(), b.space.dim())));
        }
        let (da, db) = (dvs::smooth_dual(&a.space).dim(), dvs::smooth_dual(&b.space).dim());
        if da != db {
            return Err(mismatch(format!("fibre dual dimensions {da} and {db}")));
        }
        let id = RatMatrix::identity(a.space.dim());
        let forward = dvs::is_smooth_linear_map(&id, &a.space, &b.space)?;
        let backward = dvs::is_smooth_linear_map(&id, &b.space, &a.space)?;
        if !forward.is_smooth() || !backward.is_smooth() {
            return Err(mismatch("the identification is not smooth in both directions".into()));
        }
        witnesses.push((w, da));
    }
    Ok(CommuteReport { witnesses, dual_lifts: Vec::new() })
}

fn dual_hypothesis(g: &Gluing) -> Result<CommuteReport> {
    let GluingSet::Points(ps) = &g.spec.set else {
        return Err(Error::UnsupportedGluing("the dual case needs a finite gluing set".into()));
    };
    let mut witnesses = Vec::new();
    let mut dual_lifts = Vec::new();
    for p in ps {
        let failed = |reason: String| Error::HypothesisFailed { point: fmt_point(&p.y), reason };
        let left = fibre_space(&g.left, &BasePoint::Plain(p.y.clone()))?;
        let right = fibre_space(&g.right, &BasePoint::Plain(p.fy.clone()))?;
        let d1 = dvs::smooth_dual(&left.space);
        let d2 = dvs::smooth_dual(&right.space);
        if d1.dim() != d2.dim() {
            return Err(failed(format!("fibre duals have dimensions {} and {}", d1.dim(), d2.dim())));
        }
        let m1 = left.space.dim();
        // f̃*(w) = w ∘ f̃, i.e. the row vector w · L.
        let images: Vec<Vec<Rat>> = d2.basis.iter().map(|w| p.lift.transpose().mul_vec(w)).collect();
        if let Some(bad) = images.iter().find(|v| !in_span(m1, &d1.basis, v)) {
            return Err(failed(format!("f̃* sends a smooth functional to the non-smooth functional {}", fmt_point(bad))));
        }
        if span_rank(m1, &images) < d1.dim() {
            return Err(failed("f̃* is not onto the left dual fibre".into()));
        }
        // Coordinates of each image in the left dual basis.
        let basis_t = Matrix::from_rows(d1.dim(), (0..m1).map(|i| d1.basis.iter().map(|b| b[i].clone()).collect()).collect());
        let mut coords = RatMatrix::zeros(d1.dim(), d2.dim());
        for (j, v) in images.iter().enumerate() {
            let c = basis_t.solve(v).expect("image lies in the span");
            for (i, x) in c.into_iter().enumerate() {
                coords.data[i][j] = x;
            }
        }
        witnesses.push((BasePoint::Right(p.fy.clone()), d2.dim()));
        dual_lifts.push((p.y.clone(), coords));
    }
    Ok(CommuteReport { witnesses, dual_lifts })
}
