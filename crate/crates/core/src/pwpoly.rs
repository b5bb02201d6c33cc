//! Piecewise polynomials whose breaks lie on coordinate hyperplanes.
//!
//! An [`OrthantPoly`] in `d` variables is a polynomial over ℚ in the formal
//! symbols `x_1..x_d` and `a_1..a_d`, where `a_i` stands for `|x_i|`. The
//! rewrite `a_i² → x_i²` keeps every monomial at most linear in each `a_i`,
//! and in that normal form two expressions are equal as functions on ℝ^d
//! exactly when they are equal term by term. (On the orthant with sign vector
//! σ the monomial `x^α a^S` becomes `σ^S x^α x^S`, and the characters σ ↦ σ^S
//! are linearly independent.)
//!
//! The same independence argument makes smoothness trivial to decide: the
//! function is C^∞ iff all orthant pieces coincide iff no monomial carries an
//! `a` factor.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::rat::{self, Rat};

/// `x^exps · Π_{i ∈ abs} |x_i|`, with `abs` a bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
    abs: u64,
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial { exps: vec![0; dim], abs: 0 }
    }

    pub fn new(exps: Vec<u32>, abs: u64) -> Self {
        debug_assert!(exps.len() <= 64 && abs >> exps.len() == 0);
        Monomial { exps, abs }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn abs_mask(&self) -> u64 {
        self.abs
    }

    pub fn has_abs(&self, i: usize) -> bool {
        self.abs >> i & 1 == 1
    }

    pub fn is_smooth(&self) -> bool {
        self.abs == 0
    }

    /// Total degree counting each `|x_i|` as degree one.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum::<u32>() + self.abs.count_ones()
    }

    /// Degree in `x_i`, counting `|x_i|`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.exps[i] + u32::from(self.has_abs(i))
    }

    fn mul(&self, o: &Self) -> Self {
        let shared = self.abs & o.abs;
        let exps = self
            .exps
            .iter()
            .zip(&o.exps)
            .enumerate()
            .map(|(i, (a, b))| a + b + if shared >> i & 1 == 1 { 2 } else { 0 })
            .collect();
        Monomial { exps, abs: self.abs ^ o.abs }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn factor(self) -> Rat {
        match self {
            Sign::Plus => rat::one(),
            Sign::Minus => rat::int(-1),
        }
    }

    /// All `2^d` sign vectors, minus-first lexicographic.
    pub fn all(d: usize) -> Vec<Vec<Sign>> {
        (0..1u64 << d)
            .map(|m| (0..d).map(|i| if m >> (d - 1 - i) & 1 == 1 { Sign::Plus } else { Sign::Minus }).collect())
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrthantPoly {
    dim: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl fmt::Debug for OrthantPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrthantPoly[{}]({})", self.dim, self)
    }
}

impl fmt::Display for OrthantPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr(&default_name))
    }
}

pub fn default_name(i: usize) -> String {
    format!("x{}", i + 1)
}

impl OrthantPoly {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= 64, "at most 64 variables");
        OrthantPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Rat) -> Self {
        let mut p = Self::zero(dim);
        p.push(Monomial::one(dim), c);
        p
    }

    pub fn int(dim: usize, c: i64) -> Self {
        Self::constant(dim, rat::int(c))
    }

    /// `x_i` (zero-based).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::zero(dim);
        p.push(Monomial::new(e, 0), rat::one());
        p
    }

    /// `|x_i|` (zero-based).
    pub fn abs_var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut p = Self::zero(dim);
        p.push(Monomial::new(vec![0; dim], 1 << i), rat::one());
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            assert_eq!(m.exps.len(), dim);
            p.push(m, c);
        }
        p
    }

    fn push(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(rat::zero)
    }

    /// Constant value if the expression has no variables.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn check_dim(&self, o: &Self) {
        assert_eq!(self.dim, o.dim, "orthant polynomials of different dimension");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_dim(o);
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.push(m.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        OrthantPoly { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        OrthantPoly { dim: self.dim, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_dim(o);
        let mut p = Self::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                p.push(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::int(self.dim, 1), |acc, _| acc.mul(self))
    }

    /// True iff the function is C^∞ on ℝ^d: no monomial carries an `|x_i|`.
    pub fn is_ordinarily_smooth(&self) -> bool {
        self.terms.keys().all(Monomial::is_smooth)
    }

    pub fn smooth_part(&self) -> Self {
        self.filter(|m| m.is_smooth())
    }

    pub fn nonsmooth_part(&self) -> Self {
        self.filter(|m| !m.is_smooth())
    }

    fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        OrthantPoly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// The polynomial piece on the orthant with the given signs
    /// (`|x_i| ↦ sign_i · x_i`).
    pub fn orthant_specialize(&self, signs: &[Sign]) -> Result<Self> {
        if signs.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "orthant_specialize".into(),
                expected: self.dim,
                found: signs.len(),
            });
        }
        Ok(self.specialize_where(|i| Some(signs[i])))
    }

    /// Replaces `|x_i|` by `±x_i` for every variable whose sign is given.
    pub fn specialize_where(&self, sign: impl Fn(usize) -> Option<Sign>) -> Self {
        let mut p = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut exps = m.exps.clone();
            let mut abs = m.abs;
            let mut c = c.clone();
            for (i, e) in exps.iter_mut().enumerate() {
                if m.has_abs(i) {
                    if let Some(s) = sign(i) {
                        *e += 1;
                        abs &= !(1 << i);
                        c *= s.factor();
                    }
                }
            }
            p.push(Monomial::new(exps, abs), c);
        }
        p
    }

    /// Substitutes exact values for the listed variables. The result lives in
    /// the remaining variables, kept in their original order.
    pub fn substitute_point(&self, vars: &[usize], values: &[Rat]) -> Result<Self> {
        if vars.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "substitute_point".into(),
                expected: vars.len(),
                found: values.len(),
            });
        }
        let mut value_of: Vec<Option<&Rat>> = vec![None; self.dim];
        for (&v, val) in vars.iter().zip(values) {
            if v >= self.dim {
                return Err(Error::DimensionMismatch { context: "substitute_point".into(), expected: self.dim, found: v + 1 });
            }
            value_of[v] = Some(val);
        }
        let keep: Vec<usize> = (0..self.dim).filter(|&i| value_of[i].is_none()).collect();
        let mut p = Self::zero(keep.len());
        for (m, c) in &self.terms {
            let mut c = c.clone();
            for (i, val) in value_of.iter().enumerate() {
                if let Some(val) = val {
                    c *= num_traits::pow(Rat::clone(val), m.exps[i] as usize);
                    if m.has_abs(i) {
                        c *= val.abs();
                    }
                }
            }
            let exps = keep.iter().map(|&i| m.exps[i]).collect();
            let abs = keep.iter().enumerate().fold(0u64, |acc, (j, &i)| acc | (u64::from(m.has_abs(i)) << j));
            p.push(Monomial::new(exps, abs), c);
        }
        Ok(p)
    }

    /// Renames variables into a larger (or equal) ambient space:
    /// old variable `i` becomes new variable `map[i]`.
    pub fn remap(&self, new_dim: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.dim);
        let mut p = Self::zero(new_dim);
        for (m, c) in &self.terms {
            let mut exps = vec![0; new_dim];
            let mut abs = 0u64;
            for i in 0..self.dim {
                exps[map[i]] += m.exps[i];
                if m.has_abs(i) {
                    abs |= 1 << map[i];
                }
            }
            p.push(Monomial::new(exps, abs), c.clone());
        }
        p
    }

    /// Precomposes with the affine map `u ↦ M u + b` (`M` is `dim × new_dim`).
    ///
    /// `|x_i|` can only be rewritten when the i-th affine form is a constant
    /// or a single scaled coordinate; any other form is rejected.
    pub fn affine_substitute(&self, m: &RatMatrix, offset: &[Rat]) -> Result<Self> {
        if m.rows != self.dim || offset.len() != self.dim {
            return Err(Error::DimensionMismatch { context: "affine_substitute".into(), expected: self.dim, found: m.rows });
        }
        let nd = m.cols;
        let lin: Vec<OrthantPoly> = (0..self.dim)
            .map(|i| {
                let mut l = Self::constant(nd, offset[i].clone());
                for j in 0..nd {
                    l = l.add(&Self::var(nd, j).scale(&m.data[i][j]));
                }
                l
            })
            .collect();
        let mut abs_of: Vec<Option<OrthantPoly>> = vec![None; self.dim];
        for i in 0..self.dim {
            if !self.terms.keys().any(|t| t.has_abs(i)) {
                continue;
            }
            let nz: Vec<usize> = (0..nd).filter(|&j| !m.data[i][j].is_zero()).collect();
            let a = match (nz.as_slice(), offset[i].is_zero()) {
                ([], _) => Self::constant(nd, offset[i].abs()),
                ([j], true) => Self::abs_var(nd, *j).scale(&m.data[i][*j].abs()),
                _ => return Err(Error::SubstitutionOutsideClass(lin[i].to_string())),
            };
            abs_of[i] = Some(a);
        }
        let mut out = Self::zero(nd);
        for (mono, c) in &self.terms {
            let mut t = Self::constant(nd, c.clone());
            for i in 0..self.dim {
                if mono.exps[i] > 0 {
                    t = t.mul(&lin[i].pow(mono.exps[i]));
                }
                if mono.has_abs(i) {
                    t = t.mul(abs_of[i].as_ref().unwrap());
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.dim);
        self.substitute_point(&(0..self.dim).collect::<Vec<_>>(), point)
            .expect("full substitution")
            .as_constant()
            .unwrap()
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = rat::to_f64(c);
                for (i, x) in point.iter().enumerate() {
                    v *= x.powi(m.exps[i] as i32);
                    if m.has_abs(i) {
                        v *= x.abs();
                    }
                }
                v
            })
            .sum()
    }

    /// Splits into coefficients with respect to the `outer` variables:
    /// `self = Σ_m m(outer) · coeff_m(inner)`, where the coefficients live in
    /// the remaining variables (original order).
    pub fn split(&self, outer: &[usize]) -> BTreeMap<Monomial, OrthantPoly> {
        let inner: Vec<usize> = (0..self.dim).filter(|i| !outer.contains(i)).collect();
        let mut out: BTreeMap<Monomial, OrthantPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let om = Monomial::new(
                outer.iter().map(|&i| m.exps[i]).collect(),
                outer.iter().enumerate().fold(0, |acc, (j, &i)| acc | (u64::from(m.has_abs(i)) << j)),
            );
            let im = Monomial::new(
                inner.iter().map(|&i| m.exps[i]).collect(),
                inner.iter().enumerate().fold(0, |acc, (j, &i)| acc | (u64::from(m.has_abs(i)) << j)),
            );
            out.entry(om).or_insert_with(|| OrthantPoly::zero(inner.len())).push(im, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Variables the expression actually depends on.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.terms.keys().any(|m| m.degree_in(i) > 0)).collect()
    }

    /// Prints in the DSL expression grammar.
    pub fn to_expr(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut ordered: Vec<(&Monomial, &Rat)> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
        let mut out = String::new();
        for (m, c) in ordered {
            let neg = c.is_negative();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            for i in 0..self.dim {
                match m.exps[i] {
                    0 => {}
                    1 => factors.push(name(i)),
                    e => factors.push(format!("{}^{e}", name(i))),
                }
                if m.has_abs(i) {
                    factors.push(format!("abs({})", name(i)));
                }
            }
            let a = c.abs();
            if factors.is_empty() {
                out.push_str(&rat::fmt_rat(&a));
            } else {
                if !a.is_one() {
                    out.push_str(&rat::fmt_rat(&a));
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

/// A globally defined map ℝ^d → ℝ^n with orthant-polynomial components.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlotMap {
    domain_dim: usize,
    components: Vec<OrthantPoly>,
}

impl PlotMap {
    pub fn new(domain_dim: usize, components: Vec<OrthantPoly>) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| c.dim() != domain_dim) {
            return Err(Error::DimensionMismatch {
                context: "plot component".into(),
                expected: domain_dim,
                found: c.dim(),
            });
        }
        Ok(PlotMap { domain_dim, components })
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[OrthantPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &OrthantPoly {
        &self.components[i]
    }

    pub fn is_ordinarily_smooth(&self) -> bool {
        self.components.iter().all(OrthantPoly::is_ordinarily_smooth)
    }

    /// First component that is not ordinarily smooth.
    pub fn first_nonsmooth(&self) -> Option<usize> {
        self.components.iter().position(|c| !c.is_ordinarily_smooth())
    }

    /// `u ↦ M · p(u)`.
    pub fn apply_linear(&self, m: &RatMatrix) -> Result<Self> {
        if m.cols != self.codomain_dim() {
            return Err(Error::DimensionMismatch {
                context: "linear map after plot".into(),
                expected: m.cols,
                found: self.codomain_dim(),
            });
        }
        let comps = (0..m.rows)
            .map(|i| {
                (0..m.cols).fold(OrthantPoly::zero(self.domain_dim), |acc, j| {
                    acc.add(&self.components[j].scale(&m.data[i][j]))
                })
            })
            .collect();
        Ok(PlotMap { domain_dim: self.domain_dim, components: comps })
    }

    /// Linear functional applied pointwise: `u ↦ Σ f_i p_i(u)`.
    pub fn pair(&self, f: &[Rat]) -> OrthantPoly {
        assert_eq!(f.len(), self.codomain_dim());
        self.components
            .iter()
            .zip(f)
            .fold(OrthantPoly::zero(self.domain_dim), |acc, (c, fi)| acc.add(&c.scale(fi)))
    }

    pub fn remap_domain(&self, new_dim: usize, map: &[usize]) -> Self {
        PlotMap { domain_dim: new_dim, components: self.components.iter().map(|c| c.remap(new_dim, map)).collect() }
    }

    pub fn precompose_affine(&self, m: &RatMatrix, offset: &[Rat]) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.affine_substitute(m, offset)).collect::<Result<Vec<_>>>()?;
        Ok(PlotMap { domain_dim: m.cols, components: comps })
    }

    pub fn substitute_point(&self, vars: &[usize], values: &[Rat]) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.substitute_point(vars, values)).collect::<Result<Vec<_>>>()?;
        Ok(PlotMap { domain_dim: self.domain_dim - vars.len(), components: comps })
    }

    /// Keeps the listed components, in the listed order.
    pub fn select(&self, comps: &[usize]) -> Self {
        PlotMap { domain_dim: self.domain_dim, components: comps.iter().map(|&i| self.components[i].clone()).collect() }
    }

    pub fn to_expr(&self, name: &dyn Fn(usize) -> String) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_expr(name)).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for PlotMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr(&default_name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat_matrix;
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    fn x(d: usize, i: usize) -> OrthantPoly {
        OrthantPoly::var(d, i)
    }
    fn a(d: usize, i: usize) -> OrthantPoly {
        OrthantPoly::abs_var(d, i)
    }

    #[test]
    fn abs_squared_is_x_squared() {
        assert_eq!(a(1, 0).mul(&a(1, 0)), x(1, 0).pow(2));
        assert!(a(1, 0).mul(&a(1, 0)).is_ordinarily_smooth());
    }

    #[test]
    fn product_of_distinct_abs_stays_nonsmooth() {
        let p = a(2, 0).mul(&a(2, 1));
        assert_eq!(p.num_terms(), 1);
        assert!(!p.is_ordinarily_smooth());
        assert_eq!(p.to_string(), "abs(x1)*abs(x2)");
    }

    #[test]
    fn sign_flip_substitution() {
        let m = rat_matrix(&[&[-1]]);
        assert_eq!(a(1, 0).affine_substitute(&m, &[int(0)]).unwrap(), a(1, 0));
        let shifted = a(1, 0).affine_substitute(&rat_matrix(&[&[1]]), &[int(1)]);
        assert!(matches!(shifted, Err(Error::SubstitutionOutsideClass(_))));
        let oblique = a(1, 0).affine_substitute(&rat_matrix(&[&[1, 1]]), &[int(0)]);
        assert!(matches!(oblique, Err(Error::SubstitutionOutsideClass(_))));
        let scaled = a(1, 0).affine_substitute(&rat_matrix(&[&[-3]]), &[int(0)]).unwrap();
        assert_eq!(scaled, a(1, 0).scale(&int(3)));
    }

    #[test]
    fn specialization_examples() {
        assert_eq!(a(1, 0).orthant_specialize(&[Sign::Plus]).unwrap(), x(1, 0));
        let p = x(2, 0).mul(&a(2, 1));
        assert_eq!(p.orthant_specialize(&[Sign::Plus, Sign::Minus]).unwrap(), x(2, 0).mul(&x(2, 1)).neg());
        let ramp = x(1, 0).add(&a(1, 0)).scale(&frac(1, 2));
        assert!(ramp.orthant_specialize(&[Sign::Minus]).unwrap().is_zero());
        assert!(p.orthant_specialize(&[Sign::Plus]).is_err());
    }

    #[test]
    fn smoothness_examples() {
        assert!(!a(1, 0).is_ordinarily_smooth());
        assert!(a(1, 0).pow(2).is_ordinarily_smooth());
        assert!(!x(1, 0).mul(&a(1, 0)).is_ordinarily_smooth());
    }

    #[test]
    fn point_substitution_examples() {
        let xy = x(2, 0).mul(&a(2, 1));
        assert_eq!(xy.substitute_point(&[0], &[int(2)]).unwrap(), a(1, 0).scale(&int(2)));
        let aa = a(2, 0).mul(&a(2, 1));
        assert!(aa.substitute_point(&[0], &[int(0)]).unwrap().is_zero());
        assert_eq!(a(1, 0).substitute_point(&[0], &[int(-3)]).unwrap(), OrthantPoly::int(0, 3));
    }

    #[test]
    fn split_by_outer_variables() {
        // x1*|x1|*|y| + 2*y
        let p = x(2, 0).mul(&a(2, 0)).mul(&a(2, 1)).add(&x(2, 1).scale(&int(2)));
        let parts = p.split(&[1]);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&Monomial::new(vec![0], 1)], x(1, 0).mul(&a(1, 0)));
        assert_eq!(parts[&Monomial::new(vec![1], 0)], OrthantPoly::int(1, 2));
    }

    /// Random normal-form polynomial in `d` variables with small degrees.
    pub(crate) fn arb_poly(d: usize) -> impl Strategy<Value = OrthantPoly> {
        proptest::collection::vec((proptest::collection::vec(0u32..3, d), 0u64..(1 << d), -4i64..=4), 0..5)
            .prop_map(move |ts| OrthantPoly::from_terms(d, ts.into_iter().map(|(e, m, c)| (Monomial::new(e, m), int(c)))))
    }

    fn arb_triple() -> impl Strategy<Value = (OrthantPoly, OrthantPoly, OrthantPoly)> {
        (1usize..4).prop_flat_map(|d| (arb_poly(d), arb_poly(d), arb_poly(d)))
    }

    proptest! {
        #[test]
        fn ring_laws((f, g, h) in arb_triple()) {
            prop_assert_eq!(f.add(&g), g.add(&f));
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
            prop_assert!(f.sub(&f).is_zero());
        }

        #[test]
        fn normalization_is_idempotent((f, _g, _h) in arb_triple()) {
            let once = OrthantPoly::from_terms(f.dim(), f.terms().map(|(m, c)| (m.clone(), c.clone())));
            let twice = OrthantPoly::from_terms(f.dim(), once.terms().map(|(m, c)| (m.clone(), c.clone())));
            prop_assert_eq!(&once, &f);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn specialization_is_a_homomorphism((f, g, _h) in arb_triple()) {
            for s in Sign::all(f.dim()) {
                let lhs = f.mul(&g).orthant_specialize(&s).unwrap();
                let rhs = f.orthant_specialize(&s).unwrap().mul(&g.orthant_specialize(&s).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn smooth_iff_all_pieces_agree((f, _g, _h) in arb_triple()) {
            let pieces: Vec<_> = Sign::all(f.dim()).iter().map(|s| f.orthant_specialize(s).unwrap()).collect();
            let agree = pieces.windows(2).all(|w| w[0] == w[1]);
            prop_assert_eq!(agree, f.is_ordinarily_smooth());
        }

        #[test]
        fn exact_and_float_evaluation_agree((f, _g, _h) in arb_triple(), pt in proptest::collection::vec(-5i64..=5, 3)) {
            let p: Vec<Rat> = pt[..f.dim()].iter().map(|&v| frac(v, 2)).collect();
            let pf: Vec<f64> = pt[..f.dim()].iter().map(|&v| v as f64 / 2.0).collect();
            let exact = rat::to_f64(&f.eval(&p));
            prop_assert!((exact - f.eval_f64(&pf)).abs() <= 1e-9 * (1.0 + exact.abs()));
        }
    }
}
