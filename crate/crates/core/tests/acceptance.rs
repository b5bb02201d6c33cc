//! Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any fails.

mod common;

use diffeolab::bundle::{
    self, check_gluing_commutes, check_subbundle_gluing, dual_profile, fibre_space, glue, BasePoint, Bound, BundleKind,
    CommuteKind, GluePoint, GluingSpec, PseudoBundle, Region,
};
use diffeolab::dvs::{self, DVSpace};
use diffeolab::error::Error;
use diffeolab::linalg::{ldl_inertia, rat_matrix, RatMatrix};
use diffeolab::metric::{
    find_pseudometric, glue_metrics, is_pseudometric, MetricSearch, Section, StratifiedSection, DEFAULT_DEGREE,
};
use diffeolab::pwpoly::{OrthantPoly, PlotMap};
use diffeolab::rat::{self, Rat};
use diffeolab::verdict::Verdict;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ints(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&c| rat::int(c)).collect()
}

fn x(d: usize, i: usize) -> OrthantPoly {
    OrthantPoly::var(d, i)
}

fn ax(d: usize, i: usize) -> OrthantPoly {
    OrthantPoly::abs_var(d, i)
}

fn zero(d: usize) -> OrthantPoly {
    OrthantPoly::zero(d)
}

fn plain(v: i64) -> BasePoint {
    BasePoint::Plain(ints(&[v]))
}

fn dual_dim_at(b: &PseudoBundle, p: &BasePoint) -> Result<usize, String> {
    let f = fibre_space(b, p).map_err(|e| e.to_string())?;
    Ok(dvs::smooth_dual(&f.space).dim())
}

fn unit_rows(n: usize, count: usize) -> Vec<Vec<Rat>> {
    (0..count)
        .map(|i| {
            let mut v = vec![rat::zero(); n];
            v[i] = rat::one();
            v
        })
        .collect()
}

fn criterion_1() -> Outcome {
    for n in 1..=5 {
        let d = dvs::smooth_dual(&common::abs_last(n));
        ensure(d.dim() == n - 1, format!("n={n}: dual dim {}", d.dim()))?;
        ensure(d.basis == unit_rows(n, n - 1), format!("n={n}: basis {:?}", d.basis))?;
    }
    Ok("dual dim n-1 with basis e1..e(n-1) for n=1..5".into())
}

fn angled() -> DVSpace {
    let h = rat::frac(1, 2);
    let p = PlotMap::new(1, vec![x(1, 0).add(&ax(1, 0)).scale(&h), ax(1, 0).sub(&x(1, 0)).scale(&h)]).unwrap();
    DVSpace::generated(2, vec![p]).unwrap()
}

fn criterion_2() -> Outcome {
    let v = angled();
    let d = dvs::smooth_dual(&v);
    ensure(d.basis == vec![ints(&[1, -1])], format!("dual {:?}", d.basis))?;
    let forms = dvs::smooth_symmetric_forms(&v);
    ensure(forms == vec![rat_matrix(&[&[1, -1], &[-1, 1]])], format!("forms {forms:?}"))?;
    ensure(forms[0].mul_vec(&ints(&[1, 1])) == ints(&[0, 0]), "e1+e2 not in the kernel")?;
    Ok("dual span{e1-e2}, forms span{(e1-e2)x(e1-e2)}, e1+e2 in the kernel".into())
}

fn criterion_3() -> Outcome {
    let cases = common::run_suite(common::arb_abs_last_weights(), common::eigenvector_constraint)?;
    Ok(format!("e_n annihilated by every sampled form ({cases} cases, n=1..5)"))
}

fn abs_xy() -> PseudoBundle {
    PseudoBundle::generated(2, 1, vec![PlotMap::new(2, vec![x(2, 0), ax(2, 0).mul(&ax(2, 1))]).unwrap()]).unwrap()
}

fn criterion_4() -> Outcome {
    let b = abs_xy();
    let f0 = fibre_space(&b, &plain(0)).map_err(|e| e.to_string())?;
    ensure(f0.space.is_standard() && dvs::smooth_dual(&f0.space).dim() == 1, "fibre at 0 is not standard with dual 1")?;
    for w in [-3, -1, 1, 2] {
        ensure(dual_dim_at(&b, &plain(w))? == 0, format!("dual at {w} is not 0"))?;
    }
    let p = dual_profile(&b).map_err(|e| e.to_string())?;
    let shape: Vec<(Region, usize)> = p.strata.iter().map(|s| (s.region.clone(), s.dim)).collect();
    let z = rat::zero();
    let want = vec![
        (Region::Interval { lo: Bound::Infinite, hi: Bound::Open(z.clone()) }, 0),
        (Region::Interval { lo: Bound::Closed(z.clone()), hi: Bound::Closed(z.clone()) }, 1),
        (Region::Interval { lo: Bound::Open(z), hi: Bound::Infinite }, 0),
    ];
    ensure(shape == want, format!("profile {shape:?}"))?;
    Ok("fibre at 0 standard (dual 1), dual 0 off 0, profile [(-inf,0):0, {0}:1, (0,inf):0]".into())
}

fn zero_abs() -> PseudoBundle {
    PseudoBundle::generated(3, 1, vec![PlotMap::new(2, vec![x(2, 0), zero(2), ax(2, 1)]).unwrap()]).unwrap()
}

fn criterion_5() -> Outcome {
    let one = OrthantPoly::int(1, 1);
    let sq = x(1, 0).mul(&x(1, 0)).add(&one);
    let g = StratifiedSection::new(1, 2, vec![vec![sq, zero(1)], vec![zero(1), zero(1)]], vec![]).map_err(|e| e.to_string())?;
    let v = is_pseudometric(&Section::Stratified(g), &zero_abs()).map_err(|e| e.to_string())?;
    ensure(v.is_valid(), format!("(x^2+1) e2 x e2: {v:?}"))?;
    let delta = StratifiedSection::new(1, 1, vec![vec![zero(1)]], vec![(vec![Some(bundle::Sign3::Zero)], vec![vec![one]])])
        .map_err(|e| e.to_string())?;
    let v = is_pseudometric(&Section::Stratified(delta), &abs_xy()).map_err(|e| e.to_string())?;
    ensure(v.is_valid(), format!("delta: {v:?}"))?;
    Ok("(x^2+1) e2 x e2 on (x,0,|y|) and delta on (x,|xy|) are valid".into())
}

fn criterion_6() -> Outcome {
    let g = PlotMap::new(3, vec![x(3, 0), x(3, 1), zero(3), x(3, 1).mul(&ax(3, 2))]).unwrap();
    let b = PseudoBundle::generated(4, 2, vec![g]).unwrap();
    let MetricSearch::NotExists(ob) = find_pseudometric(&b, DEFAULT_DEGREE) else {
        return Err("search did not prove nonexistence".into());
    };
    ensure(ob.forced_zero == vec!["b", "c"], format!("forced {:?}", ob.forced_zero))?;
    // Base coordinates (x, y) are named x1, x2, so {y = 0} is x2=0.
    let d = ob.deficits.iter().find(|d| d.stratum == "x2=0").ok_or(format!("no deficit on x2=0: {ob}"))?;
    ensure(d.ceiling < d.required, "deficit is not a deficit")?;
    Ok(format!("NotExists: {ob}"))
}

fn at_origin(lift: RatMatrix) -> GluingSpec {
    GluingSpec::points(vec![GluePoint { y: ints(&[0]), fy: ints(&[0]), lift }])
}

/// Glues, validates the glued section, and checks it pointwise at -1, 0, 1
/// on both branches against the fibre dual dimensions.
fn glued_metric_check(b1: &PseudoBundle, g1: &RatMatrix, b2: &PseudoBundle, g2: &RatMatrix, lift: RatMatrix) -> Result<(), String> {
    let spec = at_origin(lift);
    glue(b1, b2, spec.clone()).map_err(|e| e.to_string())?;
    let s1 = StratifiedSection::constant(1, g1).map_err(|e| e.to_string())?;
    let s2 = StratifiedSection::constant(1, g2).map_err(|e| e.to_string())?;
    let (glued, section) = glue_metrics(&s1, b1, &s2, b2, &spec).map_err(|e| e.to_string())?;
    ensure(is_pseudometric(&section, &glued).map_err(|e| e.to_string())?.is_valid(), "glued section not valid")?;
    for side in [BasePoint::Left, BasePoint::Right] {
        for v in [-1, 0, 1] {
            let p = side(ints(&[v]));
            let m = section.value_at(&glued, &p).map_err(|e| e.to_string())?;
            let (inertia, _) = ldl_inertia(&m);
            let want = dual_dim_at(&glued, &p)?;
            ensure(inertia.is_psd() && inertia.rank() == want, format!("at {p}: rank {} vs dual {want}", inertia.rank()))?;
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let std2 = PseudoBundle::standard(3, 1).unwrap();
    glued_metric_check(&std2, &RatMatrix::identity(2), &std2, &RatMatrix::identity(2), RatMatrix::identity(2))?;
    let y_absz = PseudoBundle::generated(3, 1, vec![PlotMap::new(3, vec![x(3, 0), x(3, 1), ax(3, 2)]).unwrap()]).unwrap();
    let line = PseudoBundle::standard(2, 1).unwrap();
    glued_metric_check(&y_absz, &rat_matrix(&[&[1, 0], &[0, 0]]), &line, &rat_matrix(&[&[1]]), rat_matrix(&[&[1, 0]]))?;
    Ok("both gluings accepted; glued sections valid and of full rank at -1, 0, 1 on each branch".into())
}

fn criterion_8() -> Outcome {
    let b = PseudoBundle::standard(3, 1).unwrap();
    let g = glue(&b, &b, at_origin(RatMatrix::identity(2))).map_err(|e| e.to_string())?;
    let BundleKind::Glued(g) = g.kind() else { return Err("not glued".into()) };
    // Z1 = {z = 0} keeps fibre coordinate y, Z2 = {y = 0} keeps z.
    let r = check_subbundle_gluing(g, &[0], &[1]).map_err(|e| e.to_string())?;
    ensure(!r.holds, "sub-bundle gluing reported as valid")?;
    let w = r.witness.ok_or("no witness")?;
    ensure(w == ints(&[0, 1, 0]), format!("witness {w:?}"))?;
    // The witness lies in Z1 and its image leaves Z2.
    let image = g.spec.lift_at(&ints(&[0])).unwrap().mul_vec(&w[1..]);
    ensure(image[0] != rat::zero(), "image of the witness stays in Z2")?;
    Ok("fails with witness (0, 1, 0)".into())
}

fn criterion_9() -> Outcome {
    let y_absz = PseudoBundle::generated(3, 1, vec![PlotMap::new(3, vec![x(3, 0), x(3, 1), ax(3, 2)]).unwrap()]).unwrap();
    let line = PseudoBundle::standard(2, 1).unwrap();
    let g = glue(&y_absz, &line, at_origin(rat_matrix(&[&[1, 0]]))).map_err(|e| e.to_string())?;
    let r = check_gluing_commutes(CommuteKind::Dual, &g, None).map_err(|e| e.to_string())?;
    ensure(r.dual_lifts == vec![(ints(&[0]), rat_matrix(&[&[1]]))], format!("dual lift {:?}", r.dual_lifts))?;
    let std2 = PseudoBundle::standard(3, 1).unwrap();
    let bad = glue(&std2, &line, at_origin(rat_matrix(&[&[1, 0]]))).map_err(|e| e.to_string())?;
    let r = check_gluing_commutes(CommuteKind::Dual, &bad, None);
    ensure(matches!(r, Err(Error::HypothesisFailed { .. })), format!("mismatched pair: {r:?}"))?;
    Ok("hypothesis holds with dual lift [[1]]; mismatched pair gives HypothesisFailed".into())
}

fn criterion_10() -> Outcome {
    let xa = x(2, 0).mul(&ax(2, 1));
    let four = PseudoBundle::generated(4, 1, vec![PlotMap::new(2, vec![x(2, 0), zero(2), xa.clone(), xa]).unwrap()]).unwrap();
    let whole = dual_dim_at(&four, &plain(1))?;
    let sum = bundle::direct_sum(&PseudoBundle::standard(3, 1).unwrap(), &PseudoBundle::standard(2, 1).unwrap())
        .map_err(|e| e.to_string())?;
    let split = dual_dim_at(&sum, &plain(1))?;
    ensure(whole == 2 && split == 3, format!("dual dims {whole} and {split}"))?;
    Ok("fibre dual 2 against 3 for the sum of standard sub-bundles".into())
}

fn criterion_11() -> Outcome {
    let angled_plot = angled().generators()[0].clone();
    let std1 = DVSpace::standard(1);
    let mut verdicts = vec![dvs::is_plot_member(&angled_plot, &DVSpace::standard(2)).map_err(|e| e.to_string())?];
    for axis in 0..2 {
        verdicts.push(dvs::is_plot_member(&angled_plot.select(&[axis]), &std1).map_err(|e| e.to_string())?);
    }
    ensure(verdicts.iter().all(Verdict::is_not_smooth), format!("angled plot: {verdicts:?}"))?;
    let axes = [
        PlotMap::new(1, vec![x(1, 0), zero(1)]).unwrap(),
        PlotMap::new(1, vec![zero(1), x(1, 0)]).unwrap(),
    ];
    for q in &axes {
        let v = dvs::is_plot_member(q, &angled()).map_err(|e| e.to_string())?;
        ensure(v.is_smooth(), format!("{q}: {v:?}"))?;
    }
    Ok("angled plot NotSmooth in the axis diffeologies; axis plots Smooth in the angled one".into())
}

fn criterion_12() -> Outcome {
    use common::*;
    let suites: [(&str, Result<u32, String>); 5] = [
        ("ring laws", run_suite(arb_triple(), ring_laws)),
        ("smoothness oracle", run_suite(arb_oracle_case(), oracle_agreement)),
        ("dual monotonicity", run_suite(arb_generators(), dual_monotone)),
        ("rank ceiling", run_suite(arb_space_and_weights(), rank_ceiling)),
        ("report determinism", run_suite(arb_document(), report_determinism)),
    ];
    let mut parts = Vec::new();
    for (name, r) in suites {
        parts.push(format!("{name} {}", r.map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(format!("cases: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let start = std::time::Instant::now();
        match check() {
            Ok(detail) => println!("criterion {n:>2}: PASS ({:.2}s) {detail}", start.elapsed().as_secs_f64()),
            Err(reason) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
