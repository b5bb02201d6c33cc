//! Strategies and property checks shared by the property and acceptance
//! targets.
#![allow(dead_code)]

use diffeolab::dsl::{emit_document, parse, run_document, RunConfig};
use diffeolab::dvs::{self, DVSpace};
use diffeolab::linalg::{ldl_inertia, RatMatrix};
use diffeolab::pwpoly::{Monomial, OrthantPoly, PlotMap};
use diffeolab::rat::{self, Rat};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 128;

/// Normal-form polynomial in `d` variables, each exponent below `max_exp`.
pub fn arb_poly(d: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = OrthantPoly> {
    proptest::collection::vec((proptest::collection::vec(0..max_exp, d), 0u64..(1 << d), -4i64..=4), 0..=max_terms)
        .prop_map(move |ts| OrthantPoly::from_terms(d, ts.into_iter().map(|(e, m, c)| (Monomial::new(e, m), rat::int(c)))))
}

pub fn arb_triple() -> impl Strategy<Value = (OrthantPoly, OrthantPoly, OrthantPoly)> {
    (1usize..4).prop_flat_map(|d| (arb_poly(d, 3, 4), arb_poly(d, 3, 4), arb_poly(d, 3, 4)))
}

pub fn ring_laws((f, g, h): (OrthantPoly, OrthantPoly, OrthantPoly)) -> Result<(), TestCaseError> {
    let d = f.dim();
    prop_assert_eq!(f.add(&g), g.add(&f));
    prop_assert_eq!(f.mul(&g), g.mul(&f));
    prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
    prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
    prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
    prop_assert_eq!(f.add(&OrthantPoly::zero(d)), f.clone());
    prop_assert_eq!(f.mul(&OrthantPoly::int(d, 1)), f.clone());
    prop_assert!(f.sub(&f).is_zero());
    for i in 0..d {
        let a = OrthantPoly::abs_var(d, i);
        let x = OrthantPoly::var(d, i);
        prop_assert_eq!(a.mul(&a), x.mul(&x));
    }
    Ok(())
}

/// Polynomial of degree at most three along each axis, with
/// non-zero probe coordinates in `[0.3, 2.7]` up to sign.
pub fn arb_oracle_case() -> impl Strategy<Value = (OrthantPoly, Vec<Vec<f64>>)> {
    (1usize..4).prop_flat_map(|d| {
        let probe = proptest::collection::vec((0.3f64..2.7, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v }), d);
        (arb_poly(d, 3, 4), proptest::collection::vec(probe, 2))
    })
}

/// Coefficients of the cubic through `(t_j, y_j)`, by Gaussian elimination.
fn fit_cubic(ts: &[f64; 4], ys: &[f64; 4]) -> [f64; 4] {
    let mut m = [[0.0; 5]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = ts[r].powi(c as i32);
        }
        m[r][4] = ys[r];
    }
    for c in 0..4 {
        let p = (c..4).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, p);
        for r in 0..4 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..5 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    [m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]]
}

/// One-sided derivatives of orders 0..=3 at `t = 0` of `t ↦ f(p + t e_i)`.
fn one_sided(f: &OrthantPoly, p: &[f64], i: usize, dir: f64) -> [f64; 4] {
    let h = 0.5;
    let ts = [0.0, dir * h, dir * 2.0 * h, dir * 3.0 * h];
    let ys = ts.map(|t| {
        let mut q = p.to_vec();
        q[i] = t;
        f.eval_f64(&q)
    });
    let c = fit_cubic(&ts, &ys);
    [c[0], c[1], 2.0 * c[2], 6.0 * c[3]]
}

/// Numeric kink test: some one-sided derivative of order at most three
/// jumps across a coordinate hyperplane at one of the probes.
pub fn numerically_kinked(f: &OrthantPoly, probes: &[Vec<f64>]) -> bool {
    probes.iter().any(|p| {
        (0..f.dim()).any(|i| {
            let (r, l) = (one_sided(f, p, i, 1.0), one_sided(f, p, i, -1.0));
            r.iter().zip(&l).any(|(a, b)| (a - b).abs() > 1e-6 * a.abs().max(b.abs()).max(1.0))
        })
    })
}

pub fn oracle_agreement((f, probes): (OrthantPoly, Vec<Vec<f64>>)) -> Result<(), TestCaseError> {
    prop_assert_eq!(f.is_ordinarily_smooth(), !numerically_kinked(&f, &probes), "{}", f);
    Ok(())
}

fn arb_plot(n: usize) -> impl Strategy<Value = PlotMap> {
    proptest::collection::vec(arb_poly(1, 3, 2), n).prop_map(|c| PlotMap::new(1, c).unwrap())
}

/// Generators on `ℝ^n` (n = 2, 3) and one extra generator.
pub fn arb_generators() -> impl Strategy<Value = (usize, Vec<PlotMap>, PlotMap)> {
    (2usize..4).prop_flat_map(|n| (Just(n), proptest::collection::vec(arb_plot(n), 1..3), arb_plot(n)))
}

fn functional_is_smooth(f: &[Rat], p: &PlotMap) -> bool {
    p.pair(f).is_ordinarily_smooth()
}

pub fn dual_monotone((n, gens, extra): (usize, Vec<PlotMap>, PlotMap)) -> Result<(), TestCaseError> {
    let small = dvs::smooth_dual(&DVSpace::generated(n, gens.clone()).unwrap());
    let mut more = gens.clone();
    more.push(extra);
    let big = dvs::smooth_dual(&DVSpace::generated(n, more.clone()).unwrap());
    prop_assert!(big.dim() <= small.dim());
    for f in &big.basis {
        prop_assert!(diffeolab::linalg::in_span(n, &small.basis, f));
        prop_assert!(more.iter().all(|p| functional_is_smooth(f, p)));
    }
    for f in &small.basis {
        prop_assert!(gens.iter().all(|p| functional_is_smooth(f, p)));
    }
    Ok(())
}

/// Random generated space and integer coefficients for its forms.
pub fn arb_space_and_weights() -> impl Strategy<Value = (usize, Vec<PlotMap>, Vec<i64>)> {
    (2usize..4).prop_flat_map(|n| (Just(n), proptest::collection::vec(arb_plot(n), 1..3), proptest::collection::vec(-3i64..=3, 6)))
}

fn combination(forms: &[RatMatrix], weights: &[i64], n: usize) -> RatMatrix {
    forms.iter().zip(weights).fold(RatMatrix::zeros(n, n), |acc, (m, &w)| acc.add(&m.scale(&rat::int(w))))
}

/// Every smooth symmetric form has rank at most the dual dimension and
/// kills the common kernel of the dual; the pseudo-metric reaches the bound.
pub fn rank_ceiling((n, gens, weights): (usize, Vec<PlotMap>, Vec<i64>)) -> Result<(), TestCaseError> {
    let v = DVSpace::generated(n, gens).unwrap();
    let dual = dvs::smooth_dual(&v);
    let forms = dvs::smooth_symmetric_forms(&v);
    let a = combination(&forms, &weights, n);
    prop_assert!(a.rank() <= dual.dim());
    let dual_matrix = RatMatrix::from_rows(n, if dual.basis.is_empty() { vec![vec![rat::zero(); n]] } else { dual.basis.clone() });
    for k in dual_matrix.nullspace() {
        prop_assert!(a.mul_vec(&k).iter().all(|c| *c == rat::zero()));
    }
    let g = dvs::pseudo_metric(&v).unwrap();
    let (inertia, _) = ldl_inertia(&g);
    prop_assert!(inertia.is_psd());
    prop_assert_eq!(inertia.rank(), dual.dim());
    Ok(())
}

/// Forms on `ℝ^n` generated by `|x| e_n`, with random weights.
pub fn arb_abs_last_weights() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (1usize..6).prop_flat_map(|n| (Just(n), proptest::collection::vec(-5i64..=5, n * (n + 1) / 2)))
}

pub fn abs_last(n: usize) -> DVSpace {
    let mut comps = vec![OrthantPoly::zero(1); n];
    comps[n - 1] = OrthantPoly::abs_var(1, 0);
    DVSpace::generated(n, vec![PlotMap::new(1, comps).unwrap()]).unwrap()
}

/// Every form in the computed span has `e_n` in its kernel.
pub fn eigenvector_constraint((n, weights): (usize, Vec<i64>)) -> Result<(), TestCaseError> {
    let forms = dvs::smooth_symmetric_forms(&abs_last(n));
    prop_assert_eq!(forms.len(), n * (n - 1) / 2);
    let a = combination(&forms, &weights, n);
    let mut e = vec![rat::zero(); n];
    e[n - 1] = rat::one();
    prop_assert!(a.mul_vec(&e).iter().all(|c| *c == rat::zero()));
    Ok(())
}

/// A small random document over spaces and bundles.
pub fn arb_document() -> impl Strategy<Value = String> {
    (arb_generators(), arb_poly(2, 2, 3), -2i64..=2).prop_map(|((n, gens, extra), g, x)| {
        let plots = gens.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
        let fibre = g.to_expr(&|i| if i == 0 { "x1".into() } else { "y1".into() });
        format!(
            "space V = generated({n}; {plots})\ndual V\nforms V\npseudometric V\nmember V {extra}\n\
             bundle B = generated(2, 1; (x1, {fibre}))\nfibre B at {x}\nfind_metric B\n"
        )
    })
}

pub fn report_determinism(text: String) -> Result<(), TestCaseError> {
    let doc = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
    let config = RunConfig::default();
    let first = run_document(&doc, &config).to_json();
    prop_assert_eq!(&first, &run_document(&doc, &config).to_json());
    let again = parse(&emit_document(&doc)).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&first, &run_document(&again, &config).to_json());
    Ok(())
}

/// Runs a property with a fixed seed; returns the number of cases run.
pub fn run_suite<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<u32, String> {
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map(|_| CASES).map_err(|e| e.to_string())
}
