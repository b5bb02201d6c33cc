//! Univariate polynomials over ℚ and the rational-function field ℚ(t).
//!
//! Used when a single base coordinate is treated as a parameter: rank of a
//! parameterized constraint matrix, its breakpoints, and fibre-dual bases as
//! functions of the base point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::Field;
use crate::rat::{self, Rat};

/// Dense coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    coeffs: Vec<Rat>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::new(vec![rat::zero(), rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(rat::zero)
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(rat::zero(), |acc, c| acc * t + c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = rat::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::default();
        }
        let mut out = vec![rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Euclidean division; `d` must be nonzero.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lc = d.lead();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::default(), self.clone());
        }
        let mut q = vec![rat::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &rem[k + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        rem.truncate(dd);
        (Self::new(q), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        self.scale(&(rat::one() / l))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat::int(i as i64)).collect())
    }

    /// Rational roots (sorted, distinct) and the cofactor left after
    /// dividing all of them out with multiplicity.
    pub fn rational_roots(&self) -> (Vec<Rat>, UPoly) {
        let mut roots = Vec::new();
        let mut p = self.clone();
        if p.is_zero() {
            return (roots, p);
        }
        // Clear denominators to get an integer polynomial.
        let lcm = p.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p.coeffs.iter().map(|c| (c * Rat::from_integer(lcm.clone())).to_integer()).collect();
        let lowest = ints.iter().position(|c| !c.is_zero()).unwrap();
        if lowest > 0 {
            roots.push(rat::zero());
            let t = UPoly::t();
            for _ in 0..lowest {
                p = p.divrem(&t).0;
            }
        }
        let a0 = ints[lowest].abs();
        let an = ints.last().unwrap().abs();
        let mut candidates = Vec::new();
        for num in divisors(&a0) {
            for den in divisors(&an) {
                let r = Rat::new(num.clone(), den.clone());
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            if p.degree().unwrap_or(0) == 0 {
                break;
            }
            let lin = UPoly::new(vec![-r.clone(), rat::one()]);
            let mut hit = false;
            loop {
                let (q, rem) = p.divrem(&lin);
                if !rem.is_zero() {
                    break;
                }
                p = q;
                hit = true;
            }
            if hit {
                roots.push(r);
            }
        }
        roots.sort();
        (roots, p)
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`, where
    /// `None` stands for an infinite end. Sturm's theorem; `lo`, `hi` must not
    /// be roots.
    pub fn count_real_roots(&self, lo: Option<&Rat>, hi: Option<&Rat>) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let r = seq[n - 2].divrem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        let variations = |end: Option<&Rat>, at_plus_inf: bool| -> usize {
            let signs: Vec<i8> = seq
                .iter()
                .map(|p| {
                    let v = match end {
                        Some(t) => p.eval(t),
                        None => {
                            let odd = p.degree().unwrap_or(0) % 2 == 1;
                            if at_plus_inf || !odd {
                                p.lead()
                            } else {
                                -p.lead()
                            }
                        }
                    };
                    if v.is_zero() {
                        0
                    } else if v.is_negative() {
                        -1
                    } else {
                        1
                    }
                })
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        variations(lo, false).saturating_sub(variations(hi, true))
    }

    /// Prints in the DSL expression grammar with the given variable name.
    pub fn to_expr(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                k => format!("{var}^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&rat::fmt_rat(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{}", rat::fmt_rat(&a), mono));
            }
        }
        out
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    // Coefficients here come from small hand-entered examples; trial division
    // is adequate.
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            let e = &n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += 1;
    }
    out
}

/// Element of ℚ(t), kept as `num/den` with `den` monic and coprime to `num`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: UPoly,
    den: UPoly,
}

impl RatFunc {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc { num, den: UPoly::constant(rat::one()) };
        }
        let g = num.gcd(&den);
        let (mut n, _) = num.divrem(&g);
        let (mut d, _) = den.divrem(&g);
        let l = d.lead();
        n = n.scale(&(rat::one() / &l));
        d = d.monic();
        RatFunc { num: n, den: d }
    }

    pub fn poly(p: UPoly) -> Self {
        RatFunc { num: p, den: UPoly::constant(rat::one()) }
    }

    pub fn constant(c: Rat) -> Self {
        Self::poly(UPoly::constant(c))
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    /// Value at `t`, or `None` at a pole.
    pub fn eval(&self, t: &Rat) -> Option<Rat> {
        let d = self.den.eval(t);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(t) / d)
        }
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(rat::zero()),
            (Some(0), Some(0)) => Some(self.num.lead()),
            _ => None,
        }
    }

    pub fn to_expr(&self, var: &str) -> String {
        if self.den.degree() == Some(0) {
            return self.num.to_expr(var);
        }
        format!("({})/({})", self.num.to_expr(var), self.den.to_expr(var))
    }
}

impl Field for RatFunc {
    fn zero_elt() -> Self {
        Self::constant(rat::zero())
    }
    fn one_elt() -> Self {
        Self::constant(rat::one())
    }
    fn is_zero_elt(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::new(self.num.add(&o.num), self.den.clone());
        }
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn div(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }
    fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn p(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn roots_of_products_of_linear_factors() {
        // (2t - 1)(t + 3) t^2 = 2t^4 + 5t^3 - 3t^2
        let (roots, rest) = p(&[0, 0, -3, 5, 2]).rational_roots();
        assert_eq!(roots, vec![int(-3), int(0), frac(1, 2)]);
        assert_eq!(rest.degree(), Some(0));
    }

    #[test]
    fn irreducible_quadratic_is_left_over() {
        let (roots, rest) = p(&[-2, 0, 1]).rational_roots();
        assert!(roots.is_empty());
        assert_eq!(rest.degree(), Some(2));
    }

    #[test]
    fn gcd_and_divrem() {
        let a = p(&[-1, 0, 1]); // t^2 - 1
        let b = p(&[1, 1]); // t + 1
        assert_eq!(a.gcd(&b), b);
        let (q, r) = a.divrem(&b);
        assert_eq!(q, p(&[-1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn ratfunc_reduces() {
        let f = RatFunc::new(p(&[-1, 0, 1]), p(&[2, 2]));
        assert_eq!(f.num(), &UPoly::new(vec![frac(-1, 2), frac(1, 2)]));
        assert_eq!(f.den(), &p(&[1]));
        assert_eq!(f.eval(&int(3)), Some(int(1)));
    }

    #[test]
    fn sturm_counts() {
        let q = p(&[-2, 0, 1]); // t^2 - 2
        assert_eq!(q.count_real_roots(None, None), 2);
        assert_eq!(q.count_real_roots(Some(&int(0)), None), 1);
        assert_eq!(p(&[1, 0, 1]).count_real_roots(None, None), 0);
        assert_eq!(p(&[-6, 11, -6, 1]).count_real_roots(Some(&frac(3, 2)), Some(&int(4))), 2);
    }

    #[test]
    fn expr_rendering() {
        assert_eq!(p(&[1, 0, -2]).to_expr("x1"), "-2*x1^2 + 1");
        assert_eq!(UPoly::default().to_expr("x1"), "0");
    }
}
