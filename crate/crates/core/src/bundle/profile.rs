//! Fibre duals as a function of the base point.
//!
//! Over a one-dimensional base the fibre constraint matrix is a polynomial
//! matrix in the base coordinate on each open half-line. Its rank can only
//! drop where every maximal minor vanishes, so the breakpoints are the roots
//! of the gcd of those minors; they must be rational.

use std::fmt;

use crate::bundle::{fibre_space, BasePoint, BundleKind, PseudoBundle};
use crate::dvs;
use crate::error::{Error, Result};
use crate::linalg::{det, in_span, Matrix};
use crate::pwpoly::{Monomial, Sign};
use crate::rat::{self, fmt_rat, Rat};
use crate::upoly::{RatFunc, UPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Infinite,
    Open(Rat),
    Closed(Rat),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign3 {
    Neg,
    Zero,
    Pos,
}

impl Sign3 {
    pub fn of(r: &Rat) -> Sign3 {
        use num_traits::Signed;
        if r.is_negative() {
            Sign3::Neg
        } else if r.is_positive() {
            Sign3::Pos
        } else {
            Sign3::Zero
        }
    }

    pub fn all(k: usize) -> Vec<Vec<Sign3>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|p: Vec<Sign3>| {
                    [Sign3::Neg, Sign3::Zero, Sign3::Pos].into_iter().map(move |s| {
                        let mut p = p.clone();
                        p.push(s);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn as_sign(self) -> Option<Sign> {
        match self {
            Sign3::Neg => Some(Sign::Minus),
            Sign3::Pos => Some(Sign::Plus),
            Sign3::Zero => None,
        }
    }
}

pub(crate) fn fmt_cell(cell: &[Sign3]) -> String {
    if cell.is_empty() {
        return "point".into();
    }
    cell.iter()
        .enumerate()
        .map(|(i, s)| {
            let op = match s {
                Sign3::Neg => "<",
                Sign3::Zero => "=",
                Sign3::Pos => ">",
            };
            format!("x{}{op}0", i + 1)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Witness point of an arrangement cell: coordinate `i` is `±(i+1)` or `0`.
pub fn cell_witness(cell: &[Sign3]) -> Vec<Rat> {
    cell.iter()
        .enumerate()
        .map(|(i, s)| match s {
            Sign3::Neg => rat::int(-(i as i64 + 1)),
            Sign3::Zero => rat::zero(),
            Sign3::Pos => rat::int(i as i64 + 1),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// Subset of a one-dimensional base.
    Interval { lo: Bound, hi: Bound },
    /// Cell of the coordinate-hyperplane arrangement.
    Cell(Vec<Sign3>),
    /// A single point queried on its own (glued bases).
    At(BasePoint),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval { lo: Bound::Closed(a), hi: Bound::Closed(b) } if a == b => write!(f, "{{{}}}", fmt_rat(a)),
            Region::Interval { lo, hi } => {
                let l = match lo {
                    Bound::Infinite => "(-inf".to_string(),
                    Bound::Open(a) => format!("({}", fmt_rat(a)),
                    Bound::Closed(a) => format!("[{}", fmt_rat(a)),
                };
                let h = match hi {
                    Bound::Infinite => "inf)".to_string(),
                    Bound::Open(a) => format!("{})", fmt_rat(a)),
                    Bound::Closed(a) => format!("{}]", fmt_rat(a)),
                };
                write!(f, "{l}, {h}")
            }
            Region::Cell(c) => f.write_str(&fmt_cell(c)),
            Region::At(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub region: Region,
    /// Points at which the recorded dual was checked.
    pub witnesses: Vec<BasePoint>,
    pub dim: usize,
    /// Dual basis in fibre coordinates; entries are rational functions of the
    /// base coordinate when the base is a line, constants otherwise.
    pub basis: Vec<Vec<RatFunc>>,
    /// False when the fibre is only bounded (the recorded dimension is then
    /// an upper bound).
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualProfile {
    pub strata: Vec<Stratum>,
}

impl DualProfile {
    /// Every witness point, in stratum order, without repetitions.
    pub fn witnesses(&self) -> Vec<BasePoint> {
        let mut out: Vec<BasePoint> = Vec::new();
        for s in &self.strata {
            for w in &s.witnesses {
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
        }
        out
    }
}

fn constant_basis(basis: &[Vec<Rat>]) -> Vec<Vec<RatFunc>> {
    basis.iter().map(|v| v.iter().map(|c| RatFunc::constant(c.clone())).collect()).collect()
}

fn pointwise(b: &PseudoBundle, region: Region, witnesses: Vec<BasePoint>) -> Result<Stratum> {
    let f = fibre_space(b, &witnesses[0])?;
    let dual = dvs::smooth_dual(&f.space);
    Ok(Stratum { region, witnesses, dim: dual.dim(), basis: constant_basis(&dual.basis), exact: f.exact })
}

pub fn dual_profile(b: &PseudoBundle) -> Result<DualProfile> {
    if b.is_glued() {
        return glued_profile(b);
    }
    let k = b.base_dim();
    match (b.kind(), k) {
        (BundleKind::Generated(_), 1) => line_profile(b),
        (BundleKind::Sub { parent, .. }, _) => {
            let strata = dual_profile(parent)?
                .strata
                .into_iter()
                .map(|s| pointwise(b, s.region, s.witnesses))
                .collect::<Result<Vec<_>>>()?;
            Ok(DualProfile { strata })
        }
        (_, 1) => {
            let regions = [
                (Region::Interval { lo: Bound::Infinite, hi: Bound::Open(rat::zero()) }, rat::int(-1)),
                (Region::Interval { lo: Bound::Closed(rat::zero()), hi: Bound::Closed(rat::zero()) }, rat::zero()),
                (Region::Interval { lo: Bound::Open(rat::zero()), hi: Bound::Infinite }, rat::one()),
            ];
            let strata = regions
                .into_iter()
                .map(|(r, w)| pointwise(b, r, vec![BasePoint::Plain(vec![w])]))
                .collect::<Result<Vec<_>>>()?;
            Ok(DualProfile { strata: merge(strata) })
        }
        _ => {
            let strata = Sign3::all(k)
                .into_iter()
                .map(|c| {
                    let w = BasePoint::Plain(cell_witness(&c));
                    pointwise(b, Region::Cell(c), vec![w])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DualProfile { strata })
        }
    }
}

/// Witness points of a glued (or glued-derived) bundle: both pieces'
/// witnesses, with points of the gluing set read on the right.
pub(crate) fn glued_witnesses(b: &PseudoBundle) -> Result<Vec<BasePoint>> {
    let mut out: Vec<BasePoint> = Vec::new();
    let push = |p: BasePoint, out: &mut Vec<BasePoint>| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    match b.kind() {
        BundleKind::Glued(g) => {
            let right_of_y = g.spec.glued_images();
            for w in dual_profile(&g.left)?.witnesses() {
                let c = w.coords().to_vec();
                if g.spec.contains(&c) {
                    continue;
                }
                push(BasePoint::Left(c), &mut out);
            }
            for p in right_of_y {
                push(BasePoint::Right(p), &mut out);
            }
            for w in dual_profile(&g.right)?.witnesses() {
                push(BasePoint::Right(w.coords().to_vec()), &mut out);
            }
        }
        BundleKind::Combined { left, right, .. } => {
            for side in [left, right] {
                if side.is_glued() {
                    for w in glued_witnesses(side)? {
                        push(w, &mut out);
                    }
                }
            }
        }
        BundleKind::Sub { parent, .. } => return glued_witnesses(parent),
        _ => return Err(Error::Document("bundle is not glued".into())),
    }
    Ok(out)
}

fn glued_profile(b: &PseudoBundle) -> Result<DualProfile> {
    let strata = glued_witnesses(b)?
        .into_iter()
        .map(|w| pointwise(b, Region::At(w.clone()), vec![w]))
        .collect::<Result<Vec<_>>>()?;
    Ok(DualProfile { strata })
}

/// Univariate polynomial from a smooth one-variable orthant polynomial.
pub(crate) fn to_upoly(p: &crate::pwpoly::OrthantPoly) -> UPoly {
    let deg = p.degree() as usize;
    let mut c = vec![rat::zero(); deg + 1];
    for (m, coef) in p.terms() {
        debug_assert!(m.is_smooth());
        c[m.exps()[0] as usize] += coef;
    }
    UPoly::new(c)
}

/// Fibre constraint rows on the half-line of the given sign, as polynomials
/// in the base coordinate.
fn half_line_rows(b: &PseudoBundle, sign: Sign) -> Vec<Vec<UPoly>> {
    let m = b.fibre_dim();
    let mut rows: Vec<Vec<UPoly>> = Vec::new();
    for p in b.generators() {
        let d = p.domain_dim();
        let outer: Vec<usize> = (1..d).collect();
        let mut by_mono: std::collections::BTreeMap<Monomial, Vec<UPoly>> = Default::default();
        for c in 0..m {
            let comp = p.component(1 + c).specialize_where(|i| (i == 0).then_some(sign));
            for (om, inner) in comp.split(&outer) {
                if om.is_smooth() {
                    continue;
                }
                by_mono.entry(om).or_insert_with(|| vec![UPoly::default(); m])[c] = to_upoly(&inner);
            }
        }
        for row in by_mono.into_values() {
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
    }
    rows
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    go(0, n, r, &mut cur, &mut out);
    out
}

/// gcd of all `r × r` minors of a polynomial matrix.
fn minor_gcd(rows: &[Vec<UPoly>], cols: usize, r: usize) -> UPoly {
    let mut g = UPoly::default();
    for rs in combinations(rows.len(), r) {
        for cs in combinations(cols, r) {
            let sub = Matrix::from_rows(
                r,
                rs.iter().map(|&i| cs.iter().map(|&j| RatFunc::poly(rows[i][j].clone())).collect()).collect(),
            );
            let d = det(&sub);
            g = g.gcd(&d.num().clone());
            if g.degree() == Some(0) {
                return g;
            }
        }
    }
    g
}

struct HalfLine {
    dim: usize,
    basis: Vec<Vec<RatFunc>>,
    breakpoints: Vec<Rat>,
}

fn on_side(r: &Rat, sign: Sign) -> bool {
    match sign {
        Sign::Plus => *r > rat::zero(),
        Sign::Minus => *r < rat::zero(),
    }
}

/// Rational roots of `p` on the half-line; an irrational real root there is
/// an error.
pub(crate) fn side_roots(p: &UPoly, sign: Sign, what: &str) -> Result<Vec<Rat>> {
    let (roots, rest) = p.rational_roots();
    let zero = rat::zero();
    let stray = match sign {
        Sign::Plus => rest.count_real_roots(Some(&zero), None),
        Sign::Minus => rest.count_real_roots(None, Some(&zero)),
    };
    if stray > 0 {
        return Err(Error::IrrationalBreakpoint(format!("{what} {} has an irrational root", p.to_expr("x1"))));
    }
    Ok(roots.into_iter().filter(|r| on_side(r, sign)).collect())
}

fn half_line(b: &PseudoBundle, sign: Sign) -> Result<HalfLine> {
    let m = b.fibre_dim();
    let rows = half_line_rows(b, sign);
    let mat: Matrix<RatFunc> =
        Matrix::from_rows(m, rows.iter().map(|r| r.iter().map(|p| RatFunc::poly(p.clone())).collect()).collect());
    let basis = mat.nullspace();
    let r = m - basis.len();
    let mut breakpoints = Vec::new();
    if r > 0 {
        breakpoints.extend(side_roots(&minor_gcd(&rows, m, r), sign, "rank-drop polynomial")?);
    }
    for v in &basis {
        for e in v {
            if e.den().degree().unwrap_or(0) > 0 {
                // The basis representation changes where a denominator
                // vanishes even if the dimension does not.
                let (roots, _) = e.den().rational_roots();
                breakpoints.extend(roots.into_iter().filter(|x| on_side(x, sign)));
            }
        }
    }
    Ok(HalfLine { dim: basis.len(), basis, breakpoints })
}

fn eval_basis(basis: &[Vec<RatFunc>], t: &Rat) -> Option<Vec<Vec<Rat>>> {
    basis.iter().map(|v| v.iter().map(|e| e.eval(t)).collect()).collect()
}

fn same_span(width: usize, a: &[Vec<Rat>], b: &[Vec<Rat>]) -> bool {
    a.len() == b.len() && (a.is_empty() || b.iter().all(|v| in_span(width, a, v)))
}

fn line_profile(b: &PseudoBundle) -> Result<DualProfile> {
    let m = b.fibre_dim();
    let neg = half_line(b, Sign::Minus)?;
    let pos = half_line(b, Sign::Plus)?;
    let mut points: Vec<Rat> = neg.breakpoints.iter().chain(&pos.breakpoints).cloned().collect();
    points.push(rat::zero());
    points.sort();
    points.dedup();

    let mut strata = Vec::new();
    let interval = |lo: Option<&Rat>, hi: Option<&Rat>| -> Result<Stratum> {
        let witness = match (lo, hi) {
            (Some(a), Some(c)) => (a + c) / rat::int(2),
            (Some(a), None) => a + rat::one(),
            (None, Some(c)) => c - rat::one(),
            (None, None) => rat::zero(),
        };
        let side = if witness < rat::zero() { &neg } else { &pos };
        let point = BasePoint::Plain(vec![witness.clone()]);
        let actual = dvs::smooth_dual(&fibre_space(b, &point)?.space);
        let expected = eval_basis(&side.basis, &witness);
        if expected.as_ref().is_none_or(|e| !same_span(m, e, &actual.basis)) {
            return Err(Error::Document(format!("dual profile check failed at {}", fmt_rat(&witness))));
        }
        let bound = |x: Option<&Rat>| x.map_or(Bound::Infinite, |v| Bound::Open(v.clone()));
        Ok(Stratum {
            region: Region::Interval { lo: bound(lo), hi: bound(hi) },
            witnesses: vec![point],
            dim: side.dim,
            basis: side.basis.clone(),
            exact: true,
        })
    };
    strata.push(interval(None, points.first())?);
    for (i, p) in points.iter().enumerate() {
        let region = Region::Interval { lo: Bound::Closed(p.clone()), hi: Bound::Closed(p.clone()) };
        strata.push(pointwise(b, region, vec![BasePoint::Plain(vec![p.clone()])])?);
        strata.push(interval(Some(p), points.get(i + 1))?);
    }
    Ok(DualProfile { strata: merge(strata) })
}

/// Joins neighbouring strata of a line that carry the same dual.
fn merge(strata: Vec<Stratum>) -> Vec<Stratum> {
    let mut out: Vec<Stratum> = Vec::new();
    for s in strata {
        if let Some(last) = out.last_mut() {
            if last.dim == s.dim && last.basis == s.basis && last.exact == s.exact {
                if let (Region::Interval { hi, .. }, Region::Interval { hi: new_hi, .. }) = (&mut last.region, &s.region) {
                    *hi = new_hi.clone();
                    last.witnesses.extend(s.witnesses);
                    continue;
                }
            }
        }
        out.push(s);
    }
    out
}
