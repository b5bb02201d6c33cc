//! Finitely generated diffeological vector spaces.
//!
//! A generated space carries the finest vector space diffeology containing a
//! finite family of plots. A linear functional `f` is smooth exactly when
//! `f ∘ p` is ordinarily smooth for every generator `p`, so duals and smooth
//! bilinear forms reduce to exact linear constraints on coefficients of
//! non-smooth monomials.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{in_span, ldl_inertia, Matrix, RatMatrix};
use crate::pwpoly::{Monomial, OrthantPoly, PlotMap};
use crate::rat::{self, Rat};
use crate::verdict::{CatalogMap, Certificate, DecompTerm, Decomposition, Verdict, Witness};

/// Degree bound for the polynomial coefficients `h` in membership
/// decompositions.
pub const DECOMPOSITION_DEGREE: u32 = 1;

/// Catalog enumeration is skipped for generators whose catalog would exceed
/// this many maps.
const CATALOG_LIMIT: usize = 2401;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Standard,
    Coarse,
    Generated(Vec<PlotMap>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DVSpace {
    dim: usize,
    kind: SpaceKind,
}

/// Basis of the diffeological dual, each functional as a coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualBasis {
    pub basis: Vec<Vec<Rat>>,
}

impl DualBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

impl DVSpace {
    pub fn standard(dim: usize) -> Self {
        DVSpace { dim, kind: SpaceKind::Standard }
    }

    pub fn coarse(dim: usize) -> Self {
        DVSpace { dim, kind: SpaceKind::Coarse }
    }

    /// A space generated by at least one plot into `ℝ^dim`.
    pub fn generated(dim: usize, generators: Vec<PlotMap>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Document("a generated space needs at least one generator".into()));
        }
        for g in &generators {
            if g.codomain_dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "generator codomain".into(),
                    expected: dim,
                    found: g.codomain_dim(),
                });
            }
        }
        Ok(DVSpace { dim, kind: SpaceKind::Generated(generators) })
    }

    /// Drops ordinarily smooth generators (they add nothing); the space is
    /// Standard when none remain.
    pub fn generated_or_standard(dim: usize, generators: Vec<PlotMap>) -> Result<Self> {
        let kept: Vec<PlotMap> = generators.into_iter().filter(|g| !g.is_ordinarily_smooth()).collect();
        if kept.is_empty() {
            Ok(Self::standard(dim))
        } else {
            Self::generated(dim, kept)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn is_standard(&self) -> bool {
        self.kind == SpaceKind::Standard
    }

    pub fn is_coarse(&self) -> bool {
        self.kind == SpaceKind::Coarse
    }

    /// Generators of a Generated space; empty otherwise.
    pub fn generators(&self) -> &[PlotMap] {
        match &self.kind {
            SpaceKind::Generated(g) => g,
            _ => &[],
        }
    }
}

/// Groups the coefficients of every non-smooth monomial across components.
fn nonsmooth_rows(p: &PlotMap) -> BTreeMap<Monomial, Vec<Rat>> {
    let n = p.codomain_dim();
    let mut rows: BTreeMap<Monomial, Vec<Rat>> = BTreeMap::new();
    for (i, c) in p.components().iter().enumerate() {
        for (m, coef) in c.terms() {
            if !m.is_smooth() {
                rows.entry(m.clone()).or_insert_with(|| vec![rat::zero(); n])[i] = coef.clone();
            }
        }
    }
    rows
}

pub fn smooth_dual(v: &DVSpace) -> DualBasis {
    let n = v.dim;
    match &v.kind {
        SpaceKind::Coarse => DualBasis { basis: Vec::new() },
        SpaceKind::Standard => DualBasis { basis: Matrix::<Rat>::identity(n).data },
        SpaceKind::Generated(gens) => {
            let rows: Vec<Vec<Rat>> = gens.iter().flat_map(|g| nonsmooth_rows(g).into_values()).collect();
            DualBasis { basis: Matrix::from_rows(n, rows).nullspace() }
        }
    }
}

/// Position of the unknown `A_ij = A_ji` in the upper-triangle ordering.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn sym_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper-triangle coordinates of a symmetric matrix.
pub fn sym_flatten(a: &RatMatrix) -> Vec<Rat> {
    let n = a.rows;
    let mut out = Vec::with_capacity(sym_count(n));
    for i in 0..n {
        for j in i..n {
            out.push(a.data[i][j].clone());
        }
    }
    out
}

pub fn sym_unflatten(n: usize, v: &[Rat]) -> RatMatrix {
    let mut a = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = v[sym_index(n, i, j)].clone();
            a.data[i][j] = x.clone();
            a.data[j][i] = x;
        }
    }
    a
}

/// `p` and `q` placed on disjoint variable blocks of a joint domain.
pub(crate) fn joint_pair(p: &PlotMap, q: &PlotMap) -> (PlotMap, PlotMap) {
    let (dp, dq) = (p.domain_dim(), q.domain_dim());
    let d = dp + dq;
    let pm: Vec<usize> = (0..dp).collect();
    let qm: Vec<usize> = (dp..d).collect();
    (p.remap_domain(d, &pm), q.remap_domain(d, &qm))
}

/// Basis of the smooth symmetric bilinear forms, in reduced row-echelon
/// order over the upper-triangle coordinates.
pub fn smooth_symmetric_forms(v: &DVSpace) -> Vec<RatMatrix> {
    let n = v.dim;
    let count = sym_count(n);
    let gens = match &v.kind {
        SpaceKind::Coarse => return Vec::new(),
        SpaceKind::Standard => &[][..],
        SpaceKind::Generated(g) => &g[..],
    };
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for p in gens {
        for coefs in nonsmooth_rows(p).values() {
            for w in 0..n {
                let mut row = vec![rat::zero(); count];
                for (i, c) in coefs.iter().enumerate() {
                    row[sym_index(n, i, w)] += c;
                }
                rows.push(row);
            }
        }
    }
    for (a, p) in gens.iter().enumerate() {
        for q in &gens[a..] {
            let (pj, qj) = joint_pair(p, q);
            let mut by_mono: BTreeMap<Monomial, Vec<Rat>> = BTreeMap::new();
            for i in 0..n {
                for j in 0..n {
                    let prod = pj.component(i).mul(qj.component(j));
                    for (m, c) in prod.terms() {
                        if !m.is_smooth() {
                            by_mono.entry(m.clone()).or_insert_with(|| vec![rat::zero(); count])[sym_index(n, i, j)] += c;
                        }
                    }
                }
            }
            rows.extend(by_mono.into_values());
        }
    }
    Matrix::from_rows(count, rows).nullspace().iter().map(|v| sym_unflatten(n, v)).collect()
}

/// `Σ f_i ⊗ f_i` over the computed dual basis, returned only after checking
/// smoothness, positive semi-definiteness and rank.
pub fn pseudo_metric(v: &DVSpace) -> Option<RatMatrix> {
    let n = v.dim;
    let dual = smooth_dual(v);
    let mut g = RatMatrix::zeros(n, n);
    for f in &dual.basis {
        for i in 0..n {
            for j in 0..n {
                g.data[i][j] += &f[i] * &f[j];
            }
        }
    }
    let forms: Vec<Vec<Rat>> = smooth_symmetric_forms(v).iter().map(sym_flatten).collect();
    let flat = sym_flatten(&g);
    let in_forms = if forms.is_empty() { flat.iter().all(Zero::is_zero) } else { in_span(sym_count(n), &forms, &flat) };
    let (inertia, _) = ldl_inertia(&g);
    (in_forms && inertia.is_psd() && inertia.rank() == dual.dim()).then_some(g)
}

pub fn direct_sum(v: &DVSpace, w: &DVSpace) -> Result<DVSpace> {
    let (n, m) = (v.dim, w.dim);
    match (&v.kind, &w.kind) {
        (SpaceKind::Coarse, SpaceKind::Coarse) => return Ok(DVSpace::coarse(n + m)),
        (SpaceKind::Coarse, _) | (_, SpaceKind::Coarse) => return Err(Error::CoarseFactor),
        _ => {}
    }
    let left: Vec<usize> = (0..n).collect();
    let right: Vec<usize> = (n..n + m).collect();
    let gens = v
        .generators()
        .iter()
        .map(|p| embed(p, n + m, &left))
        .chain(w.generators().iter().map(|q| embed(q, n + m, &right)))
        .collect();
    DVSpace::generated_or_standard(n + m, gens)
}

/// Places the components of `p` at the given target coordinates.
fn embed(p: &PlotMap, total: usize, at: &[usize]) -> PlotMap {
    let d = p.domain_dim();
    let mut comps = vec![OrthantPoly::zero(d); total];
    for (c, &t) in p.components().iter().zip(at) {
        comps[t] = c.clone();
    }
    PlotMap::new(d, comps).expect("embedding preserves domain")
}

/// Tensor product with coordinates `e_v ⊗ e_w ↦ v·m + w`.
pub fn tensor(v: &DVSpace, w: &DVSpace) -> Result<DVSpace> {
    if v.is_coarse() || w.is_coarse() {
        return Err(Error::CoarseFactor);
    }
    let (n, m) = (v.dim, w.dim);
    let total = n * m;
    let mut gens = Vec::new();
    for p in v.generators() {
        for wi in 0..m {
            let at: Vec<usize> = (0..n).map(|vi| vi * m + wi).collect();
            gens.push(embed(p, total, &at));
        }
    }
    for q in w.generators() {
        for vi in 0..n {
            let at: Vec<usize> = (0..m).map(|wi| vi * m + wi).collect();
            gens.push(embed(q, total, &at));
        }
    }
    for p in v.generators() {
        for q in w.generators() {
            let (pj, qj) = joint_pair(p, q);
            let mut comps = Vec::with_capacity(total);
            for vi in 0..n {
                for wi in 0..m {
                    comps.push(pj.component(vi).mul(qj.component(wi)));
                }
            }
            gens.push(PlotMap::new(pj.domain_dim(), comps)?);
        }
    }
    DVSpace::generated_or_standard(total, gens)
}

/// Projection `ℝ^n → ℝ^{n-r}` killing the span of `basis`: the RREF pivots of
/// the subspace are eliminated and the remaining coordinates kept in order.
pub fn quotient_projection(n: usize, basis: &[Vec<Rat>]) -> Result<RatMatrix> {
    for b in basis {
        if b.len() != n {
            return Err(Error::InvalidSubspace(format!("vector of length {} in a space of dimension {n}", b.len())));
        }
    }
    if basis.is_empty() {
        return Ok(RatMatrix::identity(n));
    }
    let (r, pivots) = Matrix::from_rows(n, basis.to_vec()).rref();
    if pivots.len() < basis.len() {
        return Err(Error::InvalidSubspace("basis vectors are linearly dependent".into()));
    }
    let keep: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut proj = RatMatrix::zeros(keep.len(), n);
    for (k, &c) in keep.iter().enumerate() {
        proj.data[k][c] = rat::one();
        for (row, &p) in pivots.iter().enumerate() {
            proj.data[k][p] = -r.data[row][c].clone();
        }
    }
    Ok(proj)
}

pub fn quotient(v: &DVSpace, basis: &[Vec<Rat>]) -> Result<DVSpace> {
    let proj = quotient_projection(v.dim, basis)?;
    let m = proj.rows;
    match &v.kind {
        SpaceKind::Standard => Ok(DVSpace::standard(m)),
        SpaceKind::Coarse => Ok(DVSpace::coarse(m)),
        SpaceKind::Generated(gens) => {
            let images = gens.iter().map(|p| p.apply_linear(&proj)).collect::<Result<Vec<_>>>()?;
            DVSpace::generated_or_standard(m, images)
        }
    }
}

/// Decides whether the linear map `M : V → W` is smooth.
pub fn is_smooth_linear_map(m: &RatMatrix, v: &DVSpace, w: &DVSpace) -> Result<Verdict> {
    if m.rows != w.dim || m.cols != v.dim {
        return Err(Error::DimensionMismatch {
            context: "linear map shape".into(),
            expected: w.dim * v.dim,
            found: m.rows * m.cols,
        });
    }
    if w.is_coarse() {
        return Ok(Verdict::Smooth(Certificate::Coarse));
    }
    match &v.kind {
        SpaceKind::Coarse => {
            if m.is_zero() {
                Ok(Verdict::Smooth(Certificate::Ordinary))
            } else {
                Ok(Verdict::NotSmooth(Witness::note(
                    "a nonzero linear map out of a coarse space sends non-continuous plots to non-plots",
                )))
            }
        }
        SpaceKind::Standard => Ok(Verdict::Smooth(Certificate::Ordinary)),
        SpaceKind::Generated(gens) => {
            let mut verdicts = Vec::with_capacity(gens.len());
            for (j, p) in gens.iter().enumerate() {
                let image = p.apply_linear(m)?;
                let verdict = match is_plot_member(&image, w)? {
                    Verdict::NotSmooth(mut wit) => {
                        wit.generator = Some(j);
                        Verdict::NotSmooth(wit)
                    }
                    other => other,
                };
                verdicts.push(verdict);
            }
            Ok(Verdict::all(verdicts))
        }
    }
}

/// Three-valued membership of `q` in the diffeology of `v`.
pub fn is_plot_member(q: &PlotMap, v: &DVSpace) -> Result<Verdict> {
    if q.codomain_dim() != v.dim {
        return Err(Error::DimensionMismatch {
            context: "plot codomain".into(),
            expected: v.dim,
            found: q.codomain_dim(),
        });
    }
    if v.is_coarse() {
        return Ok(Verdict::Smooth(Certificate::Coarse));
    }
    if q.is_ordinarily_smooth() {
        return Ok(Verdict::Smooth(Certificate::Ordinary));
    }
    if v.is_standard() {
        let c = q.first_nonsmooth().unwrap();
        return Ok(Verdict::NotSmooth(Witness {
            component: Some(c),
            expression: Some(q.component(c).clone()),
            ..Default::default()
        }));
    }
    for f in smooth_dual(v).basis {
        let e = q.pair(&f);
        if !e.is_ordinarily_smooth() {
            return Ok(Verdict::NotSmooth(Witness {
                functional: Some(f),
                expression: Some(e),
                note: "a smooth functional of the space is not smooth along the plot".into(),
                ..Default::default()
            }));
        }
    }
    Ok(match decompose(q, v.generators())? {
        Some(d) => Verdict::Smooth(Certificate::Decomposition(d)),
        None => Verdict::Unknown("no catalog decomposition found and no smooth functional refutes membership".into()),
    })
}

/// Every map whose target coordinates are each `0` or `±u_i`.
pub fn catalog(source_dim: usize, target_dim: usize) -> Vec<CatalogMap> {
    let choices: Vec<Option<(usize, bool)>> = std::iter::once(None)
        .chain((0..source_dim).flat_map(|i| [Some((i, false)), Some((i, true))]))
        .collect();
    let mut out = vec![CatalogMap { slots: Vec::new(), source_dim }];
    for _ in 0..target_dim {
        out = out
            .into_iter()
            .flat_map(|m| {
                choices.iter().map(move |c| {
                    let mut m = m.clone();
                    m.slots.push(*c);
                    m
                })
            })
            .collect();
    }
    out
}

fn catalog_matrix(map: &CatalogMap) -> RatMatrix {
    let mut mat = RatMatrix::zeros(map.slots.len(), map.source_dim);
    for (t, s) in map.slots.iter().enumerate() {
        if let Some((i, neg)) = s {
            mat.data[t][*i] = if *neg { -rat::one() } else { rat::one() };
        }
    }
    mat
}

/// Monomials of total degree at most `deg` in `d` variables, no absolute values.
fn smooth_monomials(d: usize, deg: u32) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=deg - used).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out.into_iter().map(|e| Monomial::new(e, 0)).collect()
}

/// Solves `ns(q) = Σ h_t · ns(p_{j_t} ∘ φ_t)` exactly for polynomial `h_t`.
fn decompose(q: &PlotMap, gens: &[PlotMap]) -> Result<Option<Decomposition>> {
    let d = q.domain_dim();
    let n = q.codomain_dim();
    let mut pieces: Vec<(usize, CatalogMap, PlotMap)> = Vec::new();
    let mut seen: Vec<Vec<OrthantPoly>> = Vec::new();
    for (j, p) in gens.iter().enumerate() {
        let dj = p.domain_dim();
        if (2 * d + 1).checked_pow(dj as u32).is_none_or(|c| c > CATALOG_LIMIT) {
            continue;
        }
        for map in catalog(d, dj) {
            let r = p.precompose_affine(&catalog_matrix(&map), &vec![rat::zero(); dj])?;
            let ns: Vec<OrthantPoly> = r.components().iter().map(OrthantPoly::nonsmooth_part).collect();
            if ns.iter().all(OrthantPoly::is_zero) || seen.contains(&ns) {
                continue;
            }
            seen.push(ns);
            pieces.push((j, map, r));
        }
    }
    if pieces.is_empty() {
        return Ok(None);
    }
    let monos = smooth_monomials(d, DECOMPOSITION_DEGREE);
    // Columns: one per (piece, coefficient monomial); rows: (component, monomial).
    let mut columns: Vec<BTreeMap<(usize, Monomial), Rat>> = Vec::new();
    for (_, _, r) in &pieces {
        for h in &monos {
            let hp = OrthantPoly::from_terms(d, [(h.clone(), rat::one())]);
            let mut col = BTreeMap::new();
            for (i, c) in r.components().iter().enumerate() {
                for (m, coef) in hp.mul(&c.nonsmooth_part()).terms() {
                    col.insert((i, m.clone()), coef.clone());
                }
            }
            columns.push(col);
        }
    }
    let mut target = BTreeMap::new();
    for (i, c) in q.components().iter().enumerate() {
        for (m, coef) in c.nonsmooth_part().terms() {
            target.insert((i, m.clone()), coef.clone());
        }
    }
    let mut keys: Vec<(usize, Monomial)> = target.keys().cloned().collect();
    for col in &columns {
        keys.extend(col.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    let a = Matrix::from_rows(
        columns.len(),
        keys.iter().map(|k| columns.iter().map(|c| c.get(k).cloned().unwrap_or_else(rat::zero)).collect()).collect(),
    );
    let b: Vec<Rat> = keys.iter().map(|k| target.get(k).cloned().unwrap_or_else(rat::zero)).collect();
    let Some(x) = a.solve(&b) else {
        return Ok(None);
    };
    let mut terms = Vec::new();
    let mut rest: Vec<OrthantPoly> = q.components().to_vec();
    for (pi, (j, map, r)) in pieces.iter().enumerate() {
        let coefs = &x[pi * monos.len()..(pi + 1) * monos.len()];
        if coefs.iter().all(Zero::is_zero) {
            continue;
        }
        let h = OrthantPoly::from_terms(d, monos.iter().cloned().zip(coefs.iter().cloned()));
        for (i, c) in r.components().iter().enumerate() {
            rest[i] = rest[i].sub(&h.mul(c));
        }
        terms.push(DecompTerm { generator: *j, map: map.clone(), coefficient: h });
    }
    let smooth = PlotMap::new(d, rest)?;
    debug_assert!(smooth.is_ordinarily_smooth());
    debug_assert_eq!(n, smooth.codomain_dim());
    Ok(Some(Decomposition { smooth, terms }))
}

/// Checks a decomposition against its defining identity.
pub fn verify_decomposition(q: &PlotMap, v: &DVSpace, d: &Decomposition) -> Result<bool> {
    if !d.smooth.is_ordinarily_smooth() {
        return Ok(false);
    }
    let mut sum: Vec<OrthantPoly> = d.smooth.components().to_vec();
    for t in &d.terms {
        let Some(p) = v.generators().get(t.generator) else {
            return Ok(false);
        };
        if t.coefficient.terms().any(|(m, _)| !m.is_smooth()) {
            return Ok(false);
        }
        let r = p.precompose_affine(&catalog_matrix(&t.map), &vec![rat::zero(); p.domain_dim()])?;
        for (s, c) in sum.iter_mut().zip(r.components()) {
            *s = s.add(&t.coefficient.mul(c));
        }
    }
    Ok(sum == q.components())
}
