use super::*;
use crate::expr::{canonical_eq, parse, Params, SampleBox};
use crate::nonholonomic::ConstraintSet;

fn e(s: &str, coords: &[&str]) -> Expr {
    parse(s, coords, &[] as &[&str]).unwrap()
}

fn probe(l: &CotangentLayout, ranges: &[(&str, f64, f64)]) -> Probe {
    let b = ranges.iter().fold(SampleBox::new(), |b, (n, lo, hi)| b.with(n, *lo, *hi));
    Probe::new(l.chart()).with_box(b)
}

#[test]
fn oscillator_level_set_section() {
    let l = CotangentLayout::standard(1, &[]);
    let h = e("(p^2 + q^2)/2", &["q", "p"]);
    let pr = probe(&l, &[("q", -1.0, 1.0)]);
    let r = hj_symplectic(&l, &h, &[e("sqrt(2 - q^2)", &["q"])], Some(1.0), &pr).unwrap();
    assert!(r.verdict().ok(), "{}", r);
    assert!(r.relatedness.unwrap() < 1e-12);

    let r = hj_symplectic(&l, &h, &[e("q^2", &["q"])], None, &pr).unwrap();
    assert_eq!(r.verdict(), Verdict::Fail);
    assert!(!r.related().unwrap());
    assert_eq!(r.equivalence_holds(), Some(true));
}

#[test]
fn constant_section_defect_vanishes() {
    let l = CotangentLayout::standard(1, &[]);
    let h = e("p^2/2", &["q", "p"]);
    let s = l.section(&[Expr::float(1.7)], &[]).unwrap();
    let x = l.omega().sharp(&KForm::differential(&l.chart(), &h)).unwrap();
    assert_eq!(relatedness_defect(&x, &s, &Probe::new(l.chart())).unwrap(), 0.0);

    // γ_p = q is closed and related to nothing: the residual flags it.
    let r = hj_symplectic(&l, &h, &[e("q", &["q"])], None, &Probe::new(l.chart())).unwrap();
    assert!(r.preconditions.passed());
    assert!(!r.residual_ok());
}

#[test]
fn time_dependent_principal_function() {
    let l = CotangentLayout::standard(1, &[]);
    let h = e("p^2/2", &["q", "p"]);
    let pr = probe(&l, &[]);
    let s = e("-2*t + 2*q", &["t", "q"]);
    let gamma = [s.diff("t"), s.diff("q")];
    let r = hj_tdep(&l, "t", "e", &h, &gamma, &pr).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass, "{}", r);
    assert!(r.related().unwrap());

    let s = e("q*t", &["t", "q"]);
    let r = hj_tdep(&l, "t", "e", &h, &[s.diff("t"), s.diff("q")], &pr).unwrap();
    assert_eq!(r.verdict(), Verdict::Fail);
    assert_eq!(r.related(), Some(false));
}

#[test]
fn conformal_reduces_to_symplectic_at_zero() {
    let l = CotangentLayout::standard(1, &[]);
    let h = e("p^3/3 + q*p", &["q", "p"]);
    let g = [e("q^2 - 2*q + 3", &["q"])];
    let pr = probe(&l, &[]);
    let a = hj_conformal(&l, &h, &Expr::zero(), &g, &pr).unwrap();
    let b = hj_symplectic(&l, &h, &g, None, &pr).unwrap();
    assert_eq!(canonical_eq(&a.residuals[0].expr, &b.residuals[0].expr), Some(true));
}

#[test]
fn forced_rejects_fiber_legs() {
    let l = CotangentLayout::standard(1, &[]);
    let beta = KForm::coordinate(&l.chart(), "p");
    let err = hj_forced(&l, &e("p^2/2", &["q", "p"]), &beta, &[Expr::one()], &Probe::new(l.chart())).unwrap_err();
    assert!(matches!(err, HjError::NotSemibasic(_)));
    let beta = KForm::coordinate(&l.chart(), "q");
    let r = hj_forced(&l, &e("p^2/2 + q", &["q", "p"]), &beta, &[Expr::one()], &Probe::new(l.chart())).unwrap();
    assert!(!r.residual_ok());
}

#[test]
fn damped_oscillator_full_and_stationary() {
    let l = CotangentLayout::new(&["x"], &["p"], &["t"]).unwrap();
    let c = ["x", "p", "t"];
    let h = e("p^2/2*exp(-5/2*t) + x^2/2*exp(5/2*t)", &c);
    let pr = probe(&l, &[("x", -1.0, 1.0), ("t", 0.0, 1.0)]);
    let r = hj_cosymplectic(&l, &h, &[e("-1/2*exp(5/2*t)*x", &c)], &pr).unwrap();
    assert!(r.verdict().ok(), "{}", r);
    assert!(r.related().unwrap());
    assert!(r.extras["stationary_residual.p"] > 0.1);
}

#[test]
fn lcs_gaussian_and_reductions() {
    let l = CotangentLayout::standard(2, &[]);
    let c = ["q1", "q2", "p1", "p2"];
    let h = e("(p1^2 + p2^2)/2 - 1/2", &c);
    let pr = probe(&l, &[]);
    let th = [Expr::int(-1), Expr::zero()];
    let r = hj_lcs(&l, &h, &th, &[Expr::one(), Expr::zero()], &pr).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    let r = hj_lcs(&l, &h, &th, &[e("1 + q1/10", &c), Expr::zero()], &pr).unwrap();
    assert!(!r.residual_ok() && !r.related().unwrap());

    let g = [e("q1 + q2^2", &c), e("2*q1*q2", &c)];
    let a = hj_lcs(&l, &h, &[Expr::zero(), Expr::zero()], &g, &pr).unwrap();
    let b = hj_symplectic(&l, &h, &g, None, &pr).unwrap();
    for (x, y) in a.residuals.iter().zip(&b.residuals) {
        assert_eq!(canonical_eq(&x.expr, &y.expr), Some(true));
    }
    let err = hj_lcs(&l, &h, &[e("q2", &c), Expr::zero()], &g, &pr).unwrap_err();
    assert!(matches!(err, HjError::NotClosed(_)));
}

#[test]
fn lichnerowicz_exact_sections_pass_precondition() {
    let l = CotangentLayout::standard(2, &[]);
    let c = ["q1", "q2"];
    let f = e("q1^2*q2 - 3*q2 + 1", &c);
    let th = [e("2", &c), e("-1", &c)];
    let g: Vec<Expr> = c.iter().zip(&th).map(|(q, t)| f.diff(q) - &f * t).collect();
    let r = hj_lcs(&l, &e("p1*p2", &["q1", "q2", "p1", "p2"]), &th, &g, &probe(&l, &[])).unwrap();
    assert_eq!(r.preconditions.checks[1].verdict, Verdict::Pass);
}

fn parachute() -> (CotangentLayout, Expr) {
    let l = CotangentLayout::standard(1, &["z"]);
    (l, e("(p + 2*z)^2/2 + (exp(2*q) - 1)/2", &["q", "p", "z"]))
}

#[test]
fn contact_approach_one() {
    let (l, h) = parachute();
    let c = ["q", "z"];
    let pr = probe(&l, &[("q", 0.0, 1.0)]);
    let r = hj_contact_i(&l, &h, &[e("-2*z + sqrt(1 - exp(2*q) + 100*exp(-2*q))", &c)], &pr).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    let r = hj_contact_i(&l, &h, &[e("-2*z + sqrt(10 - exp(2*q))", &c)], &pr).unwrap();
    assert!(!r.residual_ok() && !r.related().unwrap());
    let r = hj_contact_i(&l, &h, &[e("z*q", &c)], &pr).unwrap();
    assert_eq!(r.preconditions.checks[1].verdict, Verdict::Pass);

    let l2 = CotangentLayout::standard(2, &["z"]);
    let c2 = ["q1", "q2", "z"];
    let r = hj_contact_i(&l2, &e("p1*p2", &["q1", "q2", "p1", "p2", "z"]), &[e("z", &c2), e("q1", &c2)], &pr).unwrap();
    assert_eq!(r.preconditions.checks[1].verdict, Verdict::Fail);
}

#[test]
fn contact_one_without_z_is_symplectic() {
    let l = CotangentLayout::standard(1, &["z"]);
    let plain = CotangentLayout::standard(1, &[]);
    let h = e("p^2/2 + q^3", &["q", "p"]);
    let g = [e("q^2 + 1", &["q"])];
    let a = hj_contact_i(&l, &h, &g, &probe(&l, &[])).unwrap();
    let b = hj_symplectic(&plain, &h, &g, None, &probe(&plain, &[])).unwrap();
    assert_eq!(canonical_eq(&a.residuals[0].expr, &b.residuals[0].expr), Some(true));
}

#[test]
fn contact_approach_two() {
    let (l, h) = parachute();
    let pr = probe(&l, &[("q", -1.0, -0.1)]);
    let gz = e("-(1/3)*exp(-2*q)*(1 - exp(2*q))^(3/2)", &["q"]);
    let r = hj_contact_ii(&l, &h, &[gz.diff("q")], &gz, None, &pr).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);

    // k ≠ 0 level sets are not invariant under X_H.
    let pr = probe(&l, &[("q", 0.0, 1.0)]);
    let gz = e("-(1/3)*exp(-2*q)*(9 - exp(2*q))^(3/2)", &["q"]);
    let r = hj_contact_ii(&l, &h, &[gz.diff("q")], &gz, Some(4.0), &pr).unwrap();
    assert!(r.residual_ok() && !r.related().unwrap());

    let r = hj_contact_ii(&l, &h, &[Expr::zero()], &gz, Some(4.0), &pr).unwrap();
    assert_eq!(r.preconditions.verdict(), Verdict::Fail);

    let zero = hj_contact_ii(&l, &e("z", &["q", "p", "z"]), &[Expr::zero()], &Expr::zero(), None, &pr).unwrap();
    assert_eq!(zero.verdict(), Verdict::Pass);
}

#[test]
fn evolution_approaches() {
    let (l, h) = parachute();
    let pr = probe(&l, &[("q", 0.0, 1.0)]);
    let r = hj_evolution_i(&l, &h, &[e("-2*z + sqrt(10 - exp(2*q))", &["q", "z"])], &pr).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    let gz = e("-(1/3)*exp(-2*q)*(9 - exp(2*q))^(3/2)", &["q"]);
    let r = hj_evolution_ii(&l, &h, &gz, &pr).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    let r = hj_evolution_ii(&l, &h, &(gz + e("q/10", &["q"])), &pr).unwrap();
    assert!(!r.residual_ok() && !r.related().unwrap());
}

#[test]
fn evolution_one_without_z_is_symplectic() {
    let l = CotangentLayout::standard(1, &["z"]);
    let plain = CotangentLayout::standard(1, &[]);
    let h = e("p^2/2 + q^3", &["q", "p"]);
    let g = [e("q^2 + 1", &["q"])];
    let a = hj_evolution_i(&l, &h, &g, &probe(&l, &[])).unwrap();
    let b = hj_symplectic(&plain, &h, &g, None, &probe(&plain, &[])).unwrap();
    assert_eq!(canonical_eq(&a.residuals[0].expr, &b.residuals[0].expr), Some(true));
}

fn free_particle() -> ConstrainedSystem {
    let l = CotangentLayout::new(&["x", "y", "z"], &["px", "py", "pz"], &[]).unwrap();
    let c = ["x", "y", "z"];
    let cs = ConstraintSet::new(&l, vec![vec![-e("y", &c), Expr::zero(), Expr::one()]]).unwrap();
    let h = e("(px^2 + py^2 + pz^2)/2", &["x", "y", "z", "px", "py", "pz"]);
    ConstrainedSystem::new(&cs, &h, &Probe::new(l.chart())).unwrap()
}

#[test]
fn nonholonomic_free_particle() {
    let sys = free_particle();
    let c = ["x", "y", "z"];
    let sigma = [e("(1+y^2)^(-1/2)", &c), Expr::one(), e("y*(1+y^2)^(-1/2)", &c)];
    let pr = Probe::new(sys.chart());
    for mode in [NhMode::Ideal, NhMode::Complete] {
        let r = hj_nonholonomic(&sys, &sigma, mode, &pr).unwrap();
        assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    }
    let r = hj_nonholonomic(&sys, &sigma, NhMode::Complete, &pr).unwrap();
    assert_eq!(r.extras["bracket_generating"], 1.0);

    let bent = [sigma[0].clone(), e("1 + x/10", &c), sigma[2].clone()];
    let r = hj_nonholonomic(&sys, &bent, NhMode::Ideal, &pr).unwrap();
    assert!(!r.residual_ok() && !r.related().unwrap());
    assert!(!r.preconditions.passed());

    let off = [Expr::one(), Expr::one(), Expr::one()];
    assert!(matches!(hj_nonholonomic(&sys, &off, NhMode::Ideal, &pr), Err(HjError::OffConstraint(_))));
}

#[test]
fn tangent_algebroid_is_symplectic() {
    let base = Chart::new(&["q1", "q2"]);
    let alg = AlmostLieAlgebroid::tangent(&base);
    let h = e("(p1^2 + p2^2)/2 + q1*q2", &["q1", "q2", "p1", "p2"]);
    let psi = [e("q2 + 1", &["q1", "q2"]), e("q1", &["q1", "q2"])];
    let a = hj_algebroid(&alg, &["p1", "p2"], &h, &psi, &Probe::new(base.clone())).unwrap();
    let l = CotangentLayout::standard(2, &[]);
    let b = hj_symplectic(&l, &h, &psi, None, &Probe::new(l.chart())).unwrap();
    for (x, y) in a.residuals.iter().zip(&b.residuals) {
        assert_eq!(canonical_eq(&x.expr, &y.expr), Some(true));
    }
    assert_eq!(a.residual_ok(), a.related().unwrap());
}

#[test]
fn twisted_algebroid_theorem_holds() {
    // Rank-2 algebroid over ℝ² with [X1, X2] = X2, ρ(X1) = ∂q1, ρ(X2) = ∂q2.
    let base = Chart::new(&["q1", "q2"]);
    let z = Expr::zero;
    let c = vec![vec![vec![z(), z()], vec![z(), z()]], vec![vec![z(), Expr::one()], vec![Expr::int(-1), z()]]];
    let rho = vec![vec![Expr::one(), z()], vec![z(), Expr::one()]];
    let alg = AlmostLieAlgebroid::new(&base, c, rho).unwrap();
    let h = e("p1^2/2 + p2", &["q1", "q2", "p1", "p2"]);
    // d^Dψ = ρ1ψ2 − ρ2ψ1 − ψ2 = 0 and d^D(h∘ψ) = 0 for ψ = (1, 0).
    let r = hj_algebroid(&alg, &["p1", "p2"], &h, &[Expr::one(), Expr::zero()], &Probe::new(base.clone())).unwrap();
    assert!(r.verdict().ok() && r.related().unwrap(), "{}", r);
    let psi = [Expr::zero(), e("exp(q1)", &["q1", "q2"])];
    let r = hj_algebroid(&alg, &["p1", "p2"], &h, &psi, &Probe::new(base)).unwrap();
    assert_eq!(r.preconditions.verdict(), Verdict::Pass, "{}", r);
    assert_eq!(r.residual_ok(), r.related().unwrap());
}

#[test]
fn separable_family_commutes() {
    let l = CotangentLayout::standard(2, &[]);
    let h = e("(p1^2 + q1^2)/2 + (p2^2 + q2^2)/2", &["q1", "q2", "p1", "p2"]);
    let c = ["q1", "q2", "E1", "E2"];
    let fam = [e("sqrt(2*E1 - q1^2)", &c), e("sqrt(2*E2 - q2^2)", &c)];
    let pr = Probe::new(l.chart()).with_box(
        SampleBox::new().with("q1", -0.5, 0.5).with("q2", -0.5, 0.5).with("E1", 0.5, 1.0).with("E2", 0.5, 1.0),
    );
    let r = complete_solution_check(&l, &h, &fam, &["E1", "E2"], &pr, 1e-5).unwrap();
    assert!(r.passed(1e-5), "{:?}", r);

    let flat = [e("E1 - E1 + 1", &c), e("2", &c)];
    assert!(matches!(complete_solution_check(&l, &h, &flat, &["E1", "E2"], &pr, 1e-5), Err(HjError::Singular(_))));
}

#[test]
fn flat_report_lines() {
    let l = CotangentLayout::standard(1, &[]);
    let r = hj_symplectic(&l, &e("p^2/2", &["q", "p"]), &[Expr::one()], Some(0.5), &Probe::new(l.chart())).unwrap();
    let flat = r.to_flat();
    assert!(flat.lines().all(|line| line.contains(" = ")));
    assert!(flat.contains("evaluator = symplectic\n"));
    assert!(flat.contains("precondition.d_0 = pass") || flat.contains("precondition.d"));
    assert!(flat.ends_with("verdict = pass\n"));
    let _ = Params::new();
}
