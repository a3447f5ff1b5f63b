//! Randomized algebraic identities over seeded polynomial data.

use geomhj::brackets::{jacobiator, random_triples, Bracket};
use geomhj::expr::{canonical_eq, expand, Chart, Expr, Params, Point};
use geomhj::exterior::{CotangentLayout, KForm, Multivector, VectorField};
use geomhj::hj::{hj_conformal, hj_contact_i, hj_contact_ii, hj_evolution_i, hj_lcs, hj_symplectic};
use geomhj::expr::Probe;
use proptest::prelude::*;

fn r3() -> Chart {
    Chart::new(&["x", "y", "z"])
}

/// `n` seeded polynomials on `chart`.
fn polys(chart: &Chart, n: usize, seed: u64) -> Vec<Expr> {
    random_triples(chart, n.div_ceil(3), seed).into_iter().flatten().take(n).collect()
}

fn field(chart: &Chart, seed: u64) -> VectorField {
    VectorField::new(chart, polys(chart, chart.dim(), seed))
}

fn two_form(chart: &Chart, seed: u64) -> KForm {
    let c = polys(chart, 3, seed);
    KForm::from_terms(chart, 2, [(vec![0, 1], c[0].clone()), (vec![0, 2], c[1].clone()), (vec![1, 2], c[2].clone())])
}

fn zero(e: &Expr) -> bool {
    expand(e).is_zero()
}

fn form_zero(w: &KForm) -> bool {
    w.expanded().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn d_squared_is_zero(seed in any::<u64>()) {
        let ch = r3();
        let f = polys(&ch, 1, seed).remove(0);
        prop_assert!(form_zero(&KForm::function(&ch, f).d().d()));
        let a = KForm::one_form(&ch, polys(&ch, 3, seed ^ 1));
        prop_assert!(form_zero(&a.d().d()));
        prop_assert!(form_zero(&two_form(&ch, seed ^ 2).d().d()));
    }

    #[test]
    fn d_matches_invariant_formula(seed in any::<u64>()) {
        let ch = r3();
        let a = KForm::one_form(&ch, polys(&ch, 3, seed));
        let (x, y) = (field(&ch, seed ^ 1), field(&ch, seed ^ 2));
        let xy = x.lie_bracket(&y).unwrap();
        let lhs = a.d().eval(&[&x, &y]);
        let rhs = x.apply(&a.eval(&[&y])) - y.apply(&a.eval(&[&x])) - a.eval(&[&xy]);
        prop_assert!(zero(&(lhs - rhs)));
    }

    #[test]
    fn lie_derivative_matches_invariant_formula(seed in any::<u64>()) {
        let ch = r3();
        let w = two_form(&ch, seed);
        let (x, y, z) = (field(&ch, seed ^ 1), field(&ch, seed ^ 2), field(&ch, seed ^ 3));
        let lhs = w.lie(&x).unwrap().eval(&[&y, &z]);
        let xy = x.lie_bracket(&y).unwrap();
        let xz = x.lie_bracket(&z).unwrap();
        let rhs = x.apply(&w.eval(&[&y, &z])) - w.eval(&[&xy, &z]) - w.eval(&[&y, &xz]);
        prop_assert!(zero(&(lhs - rhs)));
    }

    #[test]
    fn interior_products_anticommute(seed in any::<u64>()) {
        let ch = r3();
        let (x, y) = (field(&ch, seed ^ 1), field(&ch, seed ^ 2));
        let w = two_form(&ch, seed);
        let xy = w.interior(&y).unwrap().interior(&x).unwrap();
        let yx = w.interior(&x).unwrap().interior(&y).unwrap();
        prop_assert!(form_zero(&xy.add(&yx)));
        let vol = KForm::coordinate(&ch, "x").wedge(&KForm::coordinate(&ch, "y")).unwrap()
            .wedge(&KForm::coordinate(&ch, "z")).unwrap();
        let a = vol.interior(&x).unwrap().interior(&y).unwrap();
        let b = vol.interior(&y).unwrap().interior(&x).unwrap();
        prop_assert!(form_zero(&a.add(&b)));
    }

    #[test]
    fn sharp_inverts_flat(seed in any::<u64>(), c in -3i64..=3) {
        let l = CotangentLayout::standard(2, &[]);
        let ch = l.chart();
        let twist = KForm::from_terms(&ch, 2, [(vec![0, 1], Expr::int(c))]);
        let omega = l.omega().add(&twist);
        let alpha = KForm::one_form(&ch, polys(&ch, 4, seed));
        let x = omega.sharp(&alpha).unwrap();
        prop_assert!(form_zero(&omega.flat(&x).unwrap().sub(&alpha)));
        let y = field(&ch, seed ^ 7);
        let back = omega.sharp(&omega.flat(&y).unwrap()).unwrap();
        prop_assert!(back.sub(&y).expanded().is_zero());
    }

    #[test]
    fn schouten_square_is_twice_jacobiator(seed in any::<u64>()) {
        let ch = r3();
        let c = polys(&ch, 3, seed);
        let lam = Multivector::from_terms(&ch, 2, [(vec![0, 1], c[0].clone()), (vec![0, 2], c[1].clone()), (vec![1, 2], c[2].clone())]);
        let b = Bracket::from_bivector("random", lam.clone());
        let ll = lam.schouten(&lam).unwrap();
        for [f, h, g] in random_triples(&ch, 2, seed ^ 5) {
            let half = Expr::rat(1, 2) * ll.eval_functions(&[&f, &h, &g]);
            prop_assert!(zero(&(half - jacobiator(&b, &f, &h, &g))));
        }
    }

    #[test]
    fn jets_are_legendrian(seed in any::<u64>()) {
        let l = CotangentLayout::standard(1, &["z"]);
        let base = Chart::new(&["q"]);
        let f = polys(&base, 1, seed).remove(0);
        let h = polys(&l.chart(), 1, seed ^ 3).remove(0);
        let probe = Probe::new(l.chart());
        let r = hj_contact_ii(&l, &h, &[f.diff("q")], &f, None, &probe).unwrap();
        prop_assert!(r.preconditions.passed());
        let bent = f.diff("q") + Expr::one();
        let r = hj_contact_ii(&l, &h, &[bent], &f, None, &probe).unwrap();
        prop_assert!(!r.preconditions.passed());
    }

    #[test]
    fn reductions_recover_symplectic_residual(seed in any::<u64>()) {
        let plain = CotangentLayout::standard(2, &[]);
        let ext = CotangentLayout::standard(2, &["z"]);
        let base = plain.base();
        let h = polys(&plain.chart(), 1, seed).remove(0);
        let w = polys(&base, 1, seed ^ 9).remove(0);
        let g = [w.diff("q1"), w.diff("q2")];
        let (pp, pe) = (Probe::new(plain.chart()), Probe::new(ext.chart()));
        let reference = hj_symplectic(&plain, &h, &g, None, &pp).unwrap();
        let reduced = [
            hj_conformal(&plain, &h, &Expr::zero(), &g, &pp).unwrap(),
            hj_lcs(&plain, &h, &[Expr::zero(), Expr::zero()], &g, &pp).unwrap(),
            hj_contact_i(&ext, &h, &g, &pe).unwrap(),
            hj_evolution_i(&ext, &h, &g, &pe).unwrap(),
        ];
        for r in &reduced {
            for (a, b) in r.residuals.iter().zip(&reference.residuals) {
                prop_assert_eq!(canonical_eq(&a.expr, &b.expr), Some(true), "{}", r.evaluator);
            }
        }
    }

    #[test]
    fn residual_and_relatedness_agree(seed in any::<u64>(), lift in 0i64..3) {
        let l = CotangentLayout::standard(1, &[]);
        let h = polys(&l.chart(), 1, seed).remove(0);
        let q = Expr::sym("q");
        // Constant sections are related whenever the residual vanishes; polynomial ones generically neither.
        let g = if lift == 0 { Expr::int(seed as i64 % 5) } else { expand(&(q.powi(lift) + Expr::int(1))) };
        let r = hj_symplectic(&l, &h, &[g], None, &Probe::new(l.chart())).unwrap();
        prop_assert_eq!(r.equivalence_holds(), Some(true), "{}", r);
    }

    #[test]
    fn expansion_preserves_values(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0) {
        let ch = r3();
        let [a, b, c] = random_triples(&ch, 1, seed).remove(0);
        let e = (&a + &b) * (&b - &c) * &a;
        let pt = Point::new().with("x", x).with("y", y).with("z", z);
        let params = Params::new();
        let lhs = e.evaluate(&pt, &params).unwrap();
        let rhs = expand(&e).evaluate(&pt, &params).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert_eq!(canonical_eq(&(&a * &b), &(&b * &a)), Some(true));
    }
}
