use super::*;
use crate::bundle::{glue, GluePoint};
use crate::linalg::rat_matrix;
use crate::rat::int;

fn v(d: usize, i: usize) -> OrthantPoly {
    OrthantPoly::var(d, i)
}
fn a(d: usize, i: usize) -> OrthantPoly {
    OrthantPoly::abs_var(d, i)
}
fn c1(n: i64) -> OrthantPoly {
    OrthantPoly::int(1, n)
}
fn pt(x: i64) -> BasePoint {
    BasePoint::Plain(vec![int(x)])
}

fn zero_abs() -> PseudoBundle {
    PseudoBundle::generated(3, 1, vec![PlotMap::new(2, vec![v(2, 0), OrthantPoly::zero(2), a(2, 1)]).unwrap()]).unwrap()
}

fn abs_xy() -> PseudoBundle {
    PseudoBundle::generated(2, 1, vec![PlotMap::new(2, vec![v(2, 0), a(2, 0).mul(&a(2, 1))]).unwrap()]).unwrap()
}

fn paper_nonexistence() -> PseudoBundle {
    let g = PlotMap::new(3, vec![v(3, 0), v(3, 1), OrthantPoly::zero(3), v(3, 1).mul(&a(3, 2))]).unwrap();
    PseudoBundle::generated(4, 2, vec![g]).unwrap()
}

fn delta() -> StratifiedSection {
    StratifiedSection::new(1, 1, vec![vec![c1(0)]], vec![(vec![Some(Sign3::Zero)], vec![vec![c1(1)]])]).unwrap()
}

fn e2e2(f: OrthantPoly) -> StratifiedSection {
    StratifiedSection::new(1, 2, vec![vec![f, c1(0)], vec![c1(0), c1(0)]], vec![]).unwrap()
}

fn square_plus_one() -> OrthantPoly {
    v(1, 0).mul(&v(1, 0)).add(&c1(1))
}

#[test]
fn sections_validate_shape() {
    let bad = StratifiedSection::new(1, 2, vec![vec![c1(0), c1(1)], vec![c1(0), c1(0)]], vec![]);
    assert!(matches!(bad, Err(Error::StrataMismatch(_))));
    let bad = StratifiedSection::new(1, 1, vec![vec![c1(0)]], vec![(vec![None, None], vec![vec![c1(1)]])]);
    assert!(matches!(bad, Err(Error::StrataMismatch(_))));
    assert!(matches!(is_smooth_section(&delta().into(), &zero_abs()), Err(Error::StrataMismatch(_))));
    assert_eq!(delta().value_at(&[int(0)]).unwrap(), rat_matrix(&[&[1]]));
    assert_eq!(delta().value_at(&[int(3)]).unwrap(), rat_matrix(&[&[0]]));
}

#[test]
fn smooth_sections_from_the_examples() {
    let g = e2e2(square_plus_one());
    assert!(is_smooth_section(&g.clone().into(), &zero_abs()).unwrap().is_smooth());
    assert!(is_pseudometric(&g.into(), &zero_abs()).unwrap().is_valid());
    assert!(is_smooth_section(&delta().into(), &abs_xy()).unwrap().is_smooth());
    assert!(is_pseudometric(&delta().into(), &abs_xy()).unwrap().is_valid());
}

#[test]
fn constant_section_on_abs_xy_is_not_smooth() {
    let one = StratifiedSection::constant(1, &rat_matrix(&[&[1]])).unwrap();
    let Verdict::NotSmooth(w) = is_smooth_section(&one.into(), &abs_xy()).unwrap() else { panic!() };
    assert_eq!(w.generator, Some(0));
    // Independent check: x²|u||u'| at x = 1, u' = 1 has a kink in u.
    let e = w.expression.unwrap();
    let h = 1e-4;
    let at = |u: f64| e.eval_f64(&[1.0, u, 1.0]);
    let right = (at(h) - at(0.0)) / h;
    let left = (at(0.0) - at(-h)) / h;
    assert!((right - left).abs() > 1.0);
}

#[test]
fn sign_changing_coefficient_fails_positivity_and_rank() {
    let MetricVerdict::Invalid(f) = is_pseudometric(&e2e2(v(1, 0)).into(), &zero_abs()).unwrap() else { panic!() };
    assert!(f.contains(&Failure { point: Some(pt(-1)), kind: FailureKind::NotPsd }));
    assert!(f.contains(&Failure { point: Some(pt(0)), kind: FailureKind::RankDeficit { rank: 0, required: 1 } }));
    assert!(f.iter().all(|x| x.point != Some(pt(1))));
    let zero = StratifiedSection::zero(1, 1);
    let MetricVerdict::Invalid(f) = is_pseudometric(&zero.into(), &PseudoBundle::standard(2, 1).unwrap()).unwrap() else { panic!() };
    assert!(matches!(f[0].kind, FailureKind::RankDeficit { rank: 0, required: 1 }));
}

#[test]
fn minor_roots_become_witnesses() {
    // (x - 2)² vanishes at 2 only; the profile alone never looks there.
    let f = v(1, 0).sub(&c1(2)).pow(2);
    let MetricVerdict::Invalid(fs) = is_pseudometric(&e2e2(f).into(), &zero_abs()).unwrap() else { panic!() };
    assert_eq!(fs, vec![Failure { point: Some(pt(2)), kind: FailureKind::RankDeficit { rank: 0, required: 1 } }]);
    let f = v(1, 0).mul(&v(1, 0)).sub(&c1(2)).pow(2).add(&c1(1));
    assert!(is_pseudometric(&e2e2(f).into(), &zero_abs()).unwrap().is_valid());
}

#[test]
fn search_finds_delta_and_identity() {
    assert_eq!(find_pseudometric(&abs_xy(), DEFAULT_DEGREE), MetricSearch::Exists(delta()));
    let id = StratifiedSection::constant(1, &RatMatrix::identity(2)).unwrap();
    assert_eq!(find_pseudometric(&PseudoBundle::standard(3, 1).unwrap(), DEFAULT_DEGREE), MetricSearch::Exists(id));
    let MetricSearch::Exists(g) = find_pseudometric(&zero_abs(), DEFAULT_DEGREE) else { panic!() };
    assert_eq!(g, StratifiedSection::constant(1, &rat_matrix(&[&[1, 0], &[0, 0]])).unwrap());
    let coarse = PseudoBundle::pullback_coarse(2, 1).unwrap();
    assert_eq!(find_pseudometric(&coarse, 2), MetricSearch::Exists(StratifiedSection::zero(1, 1)));
}

#[test]
fn search_proves_nonexistence() {
    let MetricSearch::NotExists(ob) = find_pseudometric(&paper_nonexistence(), DEFAULT_DEGREE) else { panic!() };
    assert_eq!(ob.forced_zero, vec!["b", "c"]);
    assert_eq!(ob.to_string(), "coefficients b,c forced to 0; rank 1 < required 2 on stratum x2=0");
}

#[test]
fn forced_coefficients_are_rechecked() {
    let b = paper_nonexistence();
    let z = OrthantPoly::zero(2);
    let one = OrthantPoly::int(2, 1);
    for (i, j) in [(0, 1), (1, 1)] {
        let mut m = vec![vec![z.clone(), z.clone()], vec![z.clone(), z.clone()]];
        m[0][0] = one.clone();
        m[i][j] = one.clone();
        m[j][i] = one.clone();
        let g = StratifiedSection::new(2, 2, m, vec![]).unwrap();
        assert!(is_smooth_section(&g.into(), &b).unwrap().is_not_smooth());
    }
}

fn at_origin(lift: RatMatrix) -> GluingSpec {
    GluingSpec::points(vec![GluePoint { y: vec![int(0)], fy: vec![int(0)], lift }])
}

#[test]
fn compatibility_of_the_standard_pair() {
    let b = PseudoBundle::standard(3, 1).unwrap();
    let spec = at_origin(RatMatrix::identity(2));
    let g1 = StratifiedSection::constant(1, &RatMatrix::identity(2)).unwrap();
    assert!(check_compatible(&g1, &b, &g1, &b, &spec).unwrap().holds);
    let g2 = StratifiedSection::constant(1, &rat_matrix(&[&[1, 0], &[0, 0]])).unwrap();
    let c = check_compatible(&g1, &b, &g2, &b, &spec);
    assert!(matches!(c, Err(Error::NotAPseudometric { ref side, .. }) if side == "right"));
    let c = compare_on_gluing(&g1, &b, &g2, &b, &spec).unwrap();
    assert!(!c.holds);
    assert_eq!(c.witness, Some(vec![int(0), int(0), int(1)]));
    assert_eq!(c.difference, Some(rat_matrix(&[&[0, 0], &[0, 1]])));
}

#[test]
fn incompatible_metrics_are_rejected() {
    let b = PseudoBundle::standard(3, 1).unwrap();
    let g1 = StratifiedSection::constant(1, &RatMatrix::identity(2)).unwrap();
    let g2 = StratifiedSection::constant(1, &rat_matrix(&[&[2, 0], &[0, 1]])).unwrap();
    let spec = at_origin(RatMatrix::identity(2));
    let c = check_compatible(&g1, &b, &g2, &b, &spec).unwrap();
    assert_eq!(c.witness, Some(vec![int(0), int(1), int(0)]));
    assert!(matches!(glue_metrics(&g1, &b, &g2, &b, &spec), Err(Error::Incompatible(_))));
    let glued = glue(&b, &b, spec).unwrap();
    let s = Section::Glued { left: g1, right: g2 };
    assert!(is_smooth_section(&s, &glued).unwrap().is_unknown());
}

#[test]
fn glued_metrics_from_the_examples() {
    let b = PseudoBundle::standard(3, 1).unwrap();
    let id = StratifiedSection::constant(1, &RatMatrix::identity(2)).unwrap();
    let (glued, s) = glue_metrics(&id, &b, &id, &b, &at_origin(RatMatrix::identity(2))).unwrap();
    assert!(is_pseudometric(&s, &glued).unwrap().is_valid());
    let w = dual_profile(&glued).unwrap().witnesses();
    for side in [BasePoint::Left, BasePoint::Right] {
        for x in [-1, 1] {
            assert!(w.contains(&side(vec![int(x)])));
        }
    }
    assert!(w.contains(&BasePoint::Right(vec![int(0)])));

    let b1 = PseudoBundle::generated(3, 1, vec![PlotMap::new(3, vec![v(3, 0), v(3, 1), a(3, 2)]).unwrap()]).unwrap();
    let b2 = PseudoBundle::standard(2, 1).unwrap();
    let g1 = StratifiedSection::constant(1, &rat_matrix(&[&[1, 0], &[0, 0]])).unwrap();
    let g2 = StratifiedSection::constant(1, &rat_matrix(&[&[1]])).unwrap();
    let (glued, s) = glue_metrics(&g1, &b1, &g2, &b2, &at_origin(rat_matrix(&[&[1, 0]]))).unwrap();
    assert!(is_pseudometric(&s, &glued).unwrap().is_valid());
}

#[test]
fn subspace_gluing_compares_symbolically() {
    let b = PseudoBundle::standard(3, 2).unwrap();
    let spec = GluingSpec {
        set: GluingSet::Subspace(SubspaceGluing {
            coords: vec![0],
            map: rat_matrix(&[&[1], &[0]]),
            offset: vec![int(0), int(0)],
            lift: vec![vec![OrthantPoly::int(1, 1)]],
        }),
    };
    let x1 = OrthantPoly::var(2, 0);
    let sq = x1.mul(&x1).add(&OrthantPoly::int(2, 1));
    let g1 = StratifiedSection::new(2, 1, vec![vec![sq.clone()]], vec![]).unwrap();
    assert!(check_compatible(&g1, &b, &g1, &b, &spec).unwrap().holds);
    let g2 = StratifiedSection::new(2, 1, vec![vec![sq.add(&x1.pow(4))]], vec![]).unwrap();
    let c = check_compatible(&g1, &b, &g2, &b, &spec).unwrap();
    assert!(!c.holds);
    assert!(!c.point.unwrap()[0].is_zero());
}
