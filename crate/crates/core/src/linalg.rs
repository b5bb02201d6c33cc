//! Exact linear algebra over a field.
//!
//! Matrices are dense row-major `Vec<Vec<F>>`. Everything here is exact:
//! Gauss-Jordan elimination picks the first nonzero pivot, never the largest.

use std::fmt::Debug;

use num_traits::{Signed, Zero};

use crate::rat::Rat;

/// The arithmetic the elimination routines need.
pub trait Field: Clone + PartialEq + Debug {
    fn zero_elt() -> Self;
    fn one_elt() -> Self;
    fn is_zero_elt(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// `o` is nonzero.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Field for Rat {
    fn zero_elt() -> Self {
        <Rat as Zero>::zero()
    }
    fn one_elt() -> Self {
        <Rat as num_traits::One>::one()
    }
    fn is_zero_elt(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<F>>,
}

pub type RatMatrix = Matrix<Rat>;

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![vec![F::zero_elt(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = F::one_elt();
        }
        m
    }

    /// Builds from rows; all rows must share the given width.
    pub fn from_rows(cols: usize, data: Vec<Vec<F>>) -> Self {
        debug_assert!(data.iter().all(|r| r.len() == cols));
        Matrix { rows: data.len(), cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i][j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero_elt() {
                    continue;
                }
                for j in 0..o.cols {
                    let t = a.mul(&o.data[k][j]);
                    out.data[i][j] = out.data[i][j].add(&t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        self.data.iter().map(|row| dot(row, v)).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &F) -> Self {
        let data = self.data.iter().map(|r| r.iter().map(|x| x.mul(c)).collect()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().flatten().all(|x| x.is_zero_elt())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.data[i][j] == self.data[j][i]))
    }

    /// In-place reduced row-echelon form; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.data[i][c].is_zero_elt()) else {
                continue;
            };
            self.data.swap(r, p);
            let inv = F::one_elt().div(&self.data[r][c]);
            for j in c..self.cols {
                self.data[r][j] = self.data[r][j].mul(&inv);
            }
            for i in 0..self.rows {
                if i == r || self.data[i][c].is_zero_elt() {
                    continue;
                }
                let f = self.data[i][c].clone();
                for j in c..self.cols {
                    let t = f.mul(&self.data[r][j]);
                    self.data[i][j] = self.data[i][j].sub(&t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place();
        (m, p)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : self * v = 0}`, returned in reduced row-echelon order.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let raw: Vec<Vec<F>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![F::zero_elt(); self.cols];
                v[fc] = F::one_elt();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = r.data[row][fc].neg();
                }
                v
            })
            .collect();
        echelon_basis(self.cols, raw)
    }

    /// Some `x` with `self * x = b`, if one exists.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = self.clone();
        for (row, bi) in aug.data.iter_mut().zip(b) {
            row.push(bi.clone());
        }
        aug.cols += 1;
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![F::zero_elt(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.data[row][self.cols].clone();
        }
        Some(x)
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }
}

/// Determinant by elimination over the field.
pub fn det<F: Field>(m: &Matrix<F>) -> F {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.data.clone();
    let mut d = F::one_elt();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero_elt()) else {
            return F::zero_elt();
        };
        if p != c {
            a.swap(p, c);
            d = d.neg();
        }
        d = d.mul(&a[c][c]);
        let inv = F::one_elt().div(&a[c][c]);
        for i in c + 1..n {
            if a[i][c].is_zero_elt() {
                continue;
            }
            let f = a[i][c].mul(&inv);
            for j in c..n {
                let t = f.mul(&a[c][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    d
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero_elt(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// Row-reduces a spanning family and returns the nonzero rows: a canonical
/// basis of the span in reduced row-echelon order.
pub fn echelon_basis<F: Field>(width: usize, vectors: Vec<Vec<F>>) -> Vec<Vec<F>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(width, vectors);
    let (r, pivots) = m.rref();
    r.data.into_iter().take(pivots.len()).collect()
}

pub fn span_rank<F: Field>(width: usize, vectors: &[Vec<F>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(width, vectors.to_vec()).rank()
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span<F: Field>(width: usize, basis: &[Vec<F>], v: &[F]) -> bool {
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    span_rank(width, &with) == span_rank(width, basis)
}

/// Signature of a symmetric rational matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }

    pub fn is_psd(&self) -> bool {
        self.negative == 0
    }
}

/// `[[a, b], [c, d]]` with rationals as `p/q`.
pub fn fmt_matrix(m: &RatMatrix) -> String {
    let rows: Vec<String> = m
        .data
        .iter()
        .map(|r| format!("[{}]", r.iter().map(crate::rat::fmt_rat).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Exact symmetric (pivoted LDLᵀ) diagonalization by congruence.
///
/// Returns the inertia and the diagonal `D`. Panics if `a` is not symmetric.
pub fn ldl_inertia(a: &RatMatrix) -> (Inertia, Vec<Rat>) {
    assert!(a.is_symmetric(), "ldl_inertia needs a symmetric matrix");
    let n = a.rows;
    let mut m = a.data.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut diag = Vec::with_capacity(n);
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !Zero::is_zero(&m[i][i]));
        let p = match pivot {
            Some(p) => p,
            None => {
                // Zero diagonal: a nonzero off-diagonal entry (i,j) lets the
                // congruence row_i += row_j make the (i,i) entry 2*a_ij.
                let hit = active.iter().copied().find_map(|i| {
                    active.iter().copied().find(|&j| j != i && !Zero::is_zero(&m[i][j])).map(|j| (i, j))
                });
                match hit {
                    None => {
                        diag.extend(std::iter::repeat(<Rat as Zero>::zero()).take(active.len()));
                        break;
                    }
                    Some((i, j)) => {
                        for k in 0..n {
                            let v = m[j][k].clone();
                            m[i][k] += v;
                        }
                        for k in 0..n {
                            let v = m[k][j].clone();
                            m[k][i] += v;
                        }
                        i
                    }
                }
            }
        };
        let d = m[p][p].clone();
        active.retain(|&i| i != p);
        for &i in &active {
            if Zero::is_zero(&m[i][p]) {
                continue;
            }
            let f = &m[i][p] / &d;
            for &j in &active {
                let t = &f * &m[p][j];
                m[i][j] -= t;
            }
        }
        for &i in &active {
            m[i][p] = <Rat as Zero>::zero();
            m[p][i] = <Rat as Zero>::zero();
        }
        diag.push(d);
    }
    let positive = diag.iter().filter(|d| d.is_positive()).count();
    let negative = diag.iter().filter(|d| d.is_negative()).count();
    (Inertia { positive, negative, zero: n - positive - negative }, diag)
}

pub fn rat_matrix(rows: &[&[i64]]) -> RatMatrix {
    let cols = rows.first().map_or(0, |r| r.len());
    Matrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| crate::rat::int(x)).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    #[test]
    fn determinant_with_row_swap() {
        assert_eq!(det(&rat_matrix(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(det(&rat_matrix(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]])), int(4));
        assert_eq!(det(&rat_matrix(&[&[1, 2], &[2, 4]])), int(0));
    }

    #[test]
    fn nullspace_of_angled_constraint() {
        let m = rat_matrix(&[&[1, 1]]);
        assert_eq!(m.nullspace(), vec![vec![int(1), int(-1)]]);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = rat_matrix(&[&[1, 2], &[2, 4]]);
        assert!(m.solve(&[int(1), int(3)]).is_none());
        let x = m.solve(&[int(1), int(2)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![int(1), int(2)]);
    }

    #[test]
    fn inertia_with_zero_diagonal() {
        // [[0,1],[1,0]] has eigenvalues +1, -1.
        let (i, _) = ldl_inertia(&rat_matrix(&[&[0, 1], &[1, 0]]));
        assert_eq!(i, Inertia { positive: 1, negative: 1, zero: 0 });
        let (i, _) = ldl_inertia(&rat_matrix(&[&[1, -1], &[-1, 1]]));
        assert_eq!(i, Inertia { positive: 1, negative: 0, zero: 1 });
        let (i, _) = ldl_inertia(&rat_matrix(&[&[0, 0], &[0, 0]]));
        assert_eq!(i.rank(), 0);
    }

    fn small_sym(n: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |v| {
            let mut m = Matrix::<Rat>::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x = frac(v[i * n + j], 1 + (i + j) as i64 % 2);
                    m.data[i][j] = x.clone();
                    m.data[j][i] = x;
                }
            }
            m
        })
    }

    proptest! {
        #[test]
        fn inertia_rank_matches_elimination_rank(m in (1usize..5).prop_flat_map(small_sym)) {
            let (i, _) = ldl_inertia(&m);
            prop_assert_eq!(i.rank(), m.rank());
        }

        #[test]
        fn gram_matrices_are_psd(v in proptest::collection::vec(-4i64..=4, 6)) {
            // B^T B is always PSD.
            let b = Matrix::from_rows(3, vec![v[..3].iter().map(|&x| int(x)).collect(), v[3..].iter().map(|&x| int(x)).collect()]);
            let g = b.transpose().mul(&b);
            let (i, _) = ldl_inertia(&g);
            prop_assert!(i.is_psd());
            prop_assert_eq!(i.rank(), b.rank());
        }

        #[test]
        fn nullspace_vectors_are_annihilated(v in proptest::collection::vec(-3i64..=3, 8)) {
            let m = Matrix::from_rows(4, vec![v[..4].iter().map(|&x| int(x)).collect(), v[4..].iter().map(|&x| int(x)).collect()]);
            let ns = m.nullspace();
            prop_assert_eq!(ns.len() + m.rank(), 4);
            for n in &ns {
                prop_assert!(m.mul_vec(n).iter().all(|x| Field::is_zero_elt(x)));
            }
        }
    }
}
