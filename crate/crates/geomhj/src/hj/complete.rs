use super::HjError;
use crate::exterior::CotangentLayout;
use crate::expr::{Chart, Compiled, Expr, Probe, Verdict};
use crate::structures::{scalar_vanishes, Check};
use nalgebra::{DMatrix, DVector};

/// Outcome of [`complete_solution_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompleteReport {
    /// Every member of the family solves `d(H∘γ_λ) = 0`.
    pub hj: Check,
    /// Largest `|{F_i, F_j}|` over the sample points.
    pub max_commutator: f64,
    /// Smallest `|det ∂γ/∂λ|` seen.
    pub min_abs_det: f64,
    pub samples: usize,
}

impl CompleteReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.hj.verdict.ok() && self.max_commutator <= tol
    }
}

/// Commutation of the functions `F_i = λ_i(q, p)` defined by a family of
/// solutions `γ_λ`. `family[i]` is `γ_i(q, λ)`; the probe box must cover both
/// the positions and the parameters `lambdas`.
pub fn complete_solution_check(
    layout: &CotangentLayout,
    h: &Expr,
    family: &[Expr],
    lambdas: &[&str],
    probe: &Probe,
    step: f64,
) -> Result<CompleteReport, HjError> {
    let n = layout.dof();
    if family.len() != n || lambdas.len() != n {
        return Err(HjError::Invalid(format!("a complete family on {} degrees of freedom needs {} parameters", n, n)));
    }
    let coords: Vec<&str> = layout.q.iter().map(String::as_str).chain(lambdas.iter().copied()).collect();
    let chart = Chart::new(&coords);
    let mut p = probe.clone();
    p.chart = chart.clone();

    let section = layout.section(family, &[])?;
    let h_on = section.compose(h);
    let mut hj = Check::new("d(H∘γ_λ) = 0", Verdict::Pass, None);
    for q in &layout.q {
        let c = scalar_vanishes("d(H∘γ_λ) = 0", &h_on.diff(q), &chart, &p);
        if c.verdict != Verdict::Pass && hj.verdict != Verdict::Fail {
            hj = c;
        }
    }

    let gamma: Vec<Expr> = family.iter().map(|g| g.bind(&p.params)).collect();
    let jac: Vec<Expr> = gamma.iter().flat_map(|g| lambdas.iter().map(move |l| g.diff(l))).collect();
    if jac.iter().all(Expr::is_zero) {
        return Err(HjError::Singular("family does not depend on its parameters".into()));
    }
    let fg = Compiled::new(&gamma, &coords).map_err(|e| HjError::Invalid(e.to_string()))?;
    let fj = Compiled::new(&jac, &coords).map_err(|e| HjError::Invalid(e.to_string()))?;

    let refs: Vec<&Expr> = gamma.iter().chain(&jac).collect();
    let pts = p.points_for(&refs);
    if pts.is_empty() {
        return Err(HjError::Domain("family does not evaluate on the sample box".into()));
    }
    let eval = |q: &[f64], l: &[f64], f: &Compiled| -> Option<Vec<f64>> {
        let mut x = q.to_vec();
        x.extend_from_slice(l);
        f.eval(&x).ok()
    };
    // λ with γ(q, λ) = p by Newton's method from `guess`.
    let recover = |q: &[f64], pm: &[f64], guess: &[f64]| -> Result<Vec<f64>, HjError> {
        let mut l = guess.to_vec();
        for _ in 0..60 {
            let (Some(g), Some(j)) = (eval(q, &l, &fg), eval(q, &l, &fj)) else { break };
            let r = DVector::from_iterator(n, g.iter().zip(pm).map(|(a, b)| a - b));
            if r.amax() < 1e-15 {
                return Ok(l);
            }
            let Some(inv) = DMatrix::from_row_slice(n, n, &j).try_inverse() else { break };
            let dl = inv * r;
            for i in 0..n {
                l[i] -= dl[i];
            }
            if dl.amax() < 1e-16 * (1.0 + l.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                return Ok(l);
            }
        }
        Err(HjError::Singular(format!("could not recover λ at q = {:?}, p = {:?}", q, pm)))
    };

    let mut min_det = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for pt in &pts {
        let all = chart.values(pt);
        let (q0, l0) = all.split_at(n);
        let j = eval(q0, l0, &fj).ok_or_else(|| HjError::Domain(format!("Jacobian does not evaluate at {}", pt)))?;
        let det = DMatrix::from_row_slice(n, n, &j).determinant();
        min_det = min_det.min(det.abs());
        if det.abs() < 1e-10 {
            return Err(HjError::Singular(format!("det ∂γ/∂λ = {:e} at {}", det, pt)));
        }
        let p0 = eval(q0, l0, &fg).ok_or_else(|| HjError::Domain(format!("section does not evaluate at {}", pt)))?;
        // dF[k] = (∂λ/∂q_k, ∂λ/∂p_k) by central differences.
        let mut dq = vec![vec![0.0; n]; n];
        let mut dp = vec![vec![0.0; n]; n];
        for k in 0..n {
            let mut qa = q0.to_vec();
            let mut qb = q0.to_vec();
            qa[k] += step;
            qb[k] -= step;
            let (la, lb) = (recover(&qa, &p0, l0)?, recover(&qb, &p0, l0)?);
            let mut pa = p0.clone();
            let mut pb = p0.clone();
            pa[k] += step;
            pb[k] -= step;
            let (ma, mb) = (recover(q0, &pa, l0)?, recover(q0, &pb, l0)?);
            for i in 0..n {
                dq[k][i] = (la[i] - lb[i]) / (2.0 * step);
                dp[k][i] = (ma[i] - mb[i]) / (2.0 * step);
            }
        }
        for i in 0..n {
            for jj in i + 1..n {
                let b: f64 = (0..n).map(|k| dq[k][i] * dp[k][jj] - dp[k][i] * dq[k][jj]).sum();
                worst = worst.max(b.abs());
            }
        }
    }
    Ok(CompleteReport { hj, max_commutator: worst, min_abs_det: min_det, samples: pts.len() })
}
