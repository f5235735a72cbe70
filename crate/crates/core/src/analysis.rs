//! Evaluation of the convergence-bound right-hand sides on finished runs,
//! empirical rate fitting, and per-iterate certificate audits.
//!
//! The main bound for the Lipschitz-free rule reads
//!
//! ```text
//! f(x_hat) - f* <= sqrt(R / 2 sigma)
//!                  * (N^{(m+1)/2} + sum_k k^{(m-1)/2}) / (sum_k k^{m/2})
//!                  * max_k ||g_k||_*
//! ```
//!
//! and the composite variant adds
//! `(||g_1||_* / max_k ||g_k||_*)^m * h(x_1) / sum_k k^{m/2}` for
//! `-1 <= m <= 0`. All power sums are accumulated directly over
//! `k = N .. 1`; for the common negative exponents that adds the small terms
//! first. Audits read the max dual gradient norm from the trace itself, so no
//! Lipschitz constant is involved anywhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::TestProblem;
use crate::schedule::RuleKind;
use crate::solver::RunTrace;

/// Tolerance used when declaring a bound satisfied.
pub const BOUND_SLACK: f64 = 1e-9;

/// Tolerance for the per-iterate certificate inequality.
pub const CERTIFICATE_SLACK: f64 = 1e-8;

/// Constants entering the bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    /// Uniform upper bound on `V(x*, x)` over the feasible set.
    pub r: f64,
    pub sigma: f64,
    pub m: f64,
    pub n: usize,
}

impl BoundParams {
    pub fn new(r: f64, sigma: f64, m: f64, n: usize) -> Result<Self> {
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::Domain("R must be positive".into()));
        }
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be positive".into()));
        }
        if !m.is_finite() || m < -1.0 {
            return Err(Error::InvalidM(m, "m must be >= -1"));
        }
        if n == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        Ok(Self { r, sigma, m, n })
    }
}

/// `sum_{k=1}^{n} k^p`, accumulated in descending k.
pub fn power_sum(n: usize, p: f64) -> f64 {
    (1..=n).rev().map(|k| (k as f64).powf(p)).sum()
}

/// Main-theorem right-hand side for the Lipschitz-free rule.
pub fn theorem1_rhs(p: &BoundParams, max_grad_dual: f64) -> f64 {
    let nf = p.n as f64;
    let numerator = nf.powf((p.m + 1.0) / 2.0) + power_sum(p.n, (p.m - 1.0) / 2.0);
    let denominator = power_sum(p.n, p.m / 2.0);
    (p.r / (2.0 * p.sigma)).sqrt() * numerator / denominator * max_grad_dual
}

/// Simplified `m = 0` bound, `3 sqrt(R / 2 sigma) / sqrt(N) * max ||g||_*`.
/// Always at least as large as [`theorem1_rhs`] at `m = 0`.
pub fn corollary1_rhs(p: &BoundParams, max_grad_dual: f64) -> Result<f64> {
    if p.m != 0.0 {
        return Err(Error::InvalidM(p.m, "the simplified bound requires m = 0"));
    }
    let value = 3.0 * (p.r / (2.0 * p.sigma)).sqrt() / (p.n as f64).sqrt() * max_grad_dual;
    debug_assert!(theorem1_rhs(p, max_grad_dual) <= value + 1e-12 * value.abs());
    Ok(value)
}

/// Composite bound: [`theorem1_rhs`] plus the `h(x_1)` term. Requires
/// `-1 <= m <= 0` and, when `h(x_1) > 0` and `m < 0`, a positive first
/// gradient norm (the ratio is otherwise undefined).
pub fn theorem2_rhs(
    p: &BoundParams,
    max_grad_dual: f64,
    grad1_dual: f64,
    h_x1: f64,
) -> Result<f64> {
    if !(-1.0..=0.0).contains(&p.m) {
        return Err(Error::InvalidM(
            p.m,
            "the composite bound requires -1 <= m <= 0",
        ));
    }
    if h_x1 < 0.0 {
        return Err(Error::Domain("h(x1) must be nonnegative".into()));
    }
    let base = theorem1_rhs(p, max_grad_dual);
    if h_x1 == 0.0 {
        return Ok(base);
    }
    if grad1_dual <= 0.0 || grad1_dual > max_grad_dual * (1.0 + 1e-12) {
        return Err(Error::Domain(
            "composite bound needs 0 < ||g_1||_* <= max ||g_k||_* when h(x1) > 0".into(),
        ));
    }
    let ratio = (grad1_dual / max_grad_dual).powf(p.m);
    Ok(base + ratio * h_x1 / power_sum(p.n, p.m / 2.0))
}

/// Simplified composite bound at `m = 0`: [`corollary1_rhs`] plus `h(x_1)/N`.
pub fn corollary2_rhs(p: &BoundParams, max_grad_dual: f64, h_x1: f64) -> Result<f64> {
    if h_x1 < 0.0 {
        return Err(Error::Domain("h(x1) must be nonnegative".into()));
    }
    Ok(corollary1_rhs(p, max_grad_dual)? + h_x1 / p.n as f64)
}

/// Least-squares slope of `log(gap)` against `log(N)`.
pub fn empirical_rate(gaps: &[(usize, f64)]) -> Result<f64> {
    if gaps.len() < 4 {
        return Err(Error::DegenerateFit("need at least 4 points"));
    }
    for w in gaps.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::DegenerateFit("N values must be strictly increasing"));
        }
    }
    if gaps.iter().any(|(_, g)| *g <= 0.0 || !g.is_finite()) {
        return Err(Error::DegenerateFit("gaps must be positive and finite"));
    }
    let xs: Vec<f64> = gaps.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|(_, g)| g.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(num / den)
}

/// What an audit asserted about a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    /// The run used the Lipschitz-free rule, so the bound applies.
    Bound,
    /// The rule carries no bound guarantee (fixed or Nesterov steps); only
    /// the observed gap and trace statistics are reported.
    DiagnosticOnly,
}

/// Evaluated bound against the observed gap of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: ReportKind,
    /// `f(x_hat) - f*`, or `F(x_hat) - F*` for composite runs.
    pub observed_gap: f64,
    pub theorem_rhs: Option<f64>,
    /// Simplified bound, present only at `m = 0`.
    pub corollary_rhs: Option<f64>,
    /// `observed_gap <= theorem_rhs + 1e-9`; absent for diagnostic reports.
    pub satisfied: Option<bool>,
    /// `theorem_rhs - observed_gap` when a bound was evaluated.
    pub slack: Option<f64>,
    pub max_grad_dual: f64,
    /// Iterations actually executed (differs from the configured N when the
    /// run stopped on a zero subgradient).
    pub effective_n: usize,
}

/// Summary of the per-iterate certificate check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateLog {
    pub checked: usize,
    /// Minimum of `rhs_k - lhs_k` across iterations; nonnegative (up to
    /// rounding) when every certificate holds.
    pub worst_slack: f64,
    pub worst_k: usize,
}

impl CertificateLog {
    pub fn all_hold(&self) -> bool {
        self.checked == 0 || self.worst_slack >= -CERTIFICATE_SLACK
    }
}

/// Audit of one finished run against a problem with a known optimum.
#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub report: BoundReport,
    /// Present when the trace recorded its iterates.
    pub certificates: Option<CertificateLog>,
}

/// Evaluates the matching bound on a finished trace and runs the per-iterate
/// certificates. Bounds are evaluated over the iterations the run actually
/// executed. Runs driven by rules other than the Lipschitz-free one get a
/// diagnostic report with no bound.
pub fn audit_trace(
    trace: &RunTrace,
    problem: &TestProblem,
    params: &BoundParams,
) -> Result<AuditOutcome> {
    let opt = problem.known_opt.as_ref().ok_or(Error::MissingOptimum)?;
    let composite = problem.composite.is_some();
    let observed_gap = problem.objective_gap(&trace.x_hat)?;
    let effective_n = trace.completed();
    let max_grad_dual = trace.max_grad_dual();

    let is_lipschitz_free = matches!(trace.rule.kind(), RuleKind::LipschitzFree { .. });
    let report = if is_lipschitz_free && effective_n > 0 {
        let p = BoundParams::new(params.r, params.sigma, params.m, effective_n)?;
        let theorem = if composite {
            let grad1 = trace.first_grad_dual().unwrap_or(0.0);
            let h_x1 = trace.rows[0].h_value.unwrap_or(0.0);
            theorem2_rhs(&p, max_grad_dual, grad1, h_x1)?
        } else {
            theorem1_rhs(&p, max_grad_dual)
        };
        let corollary = if p.m == 0.0 {
            Some(if composite {
                let h_x1 = trace.rows[0].h_value.unwrap_or(0.0);
                corollary2_rhs(&p, max_grad_dual, h_x1)?
            } else {
                corollary1_rhs(&p, max_grad_dual)?
            })
        } else {
            None
        };
        BoundReport {
            kind: ReportKind::Bound,
            observed_gap,
            theorem_rhs: Some(theorem),
            corollary_rhs: corollary,
            satisfied: Some(observed_gap <= theorem + BOUND_SLACK),
            slack: Some(theorem - observed_gap),
            max_grad_dual,
            effective_n,
        }
    } else {
        BoundReport {
            kind: ReportKind::DiagnosticOnly,
            observed_gap,
            theorem_rhs: None,
            corollary_rhs: None,
            satisfied: None,
            slack: None,
            max_grad_dual,
            effective_n,
        }
    };

    let certificates = match &trace.iterates {
        None => None,
        Some(iterates) => {
            let mut worst_slack = f64::INFINITY;
            let mut worst_k = 0;
            let x_star = &opt.x_star;
            for (i, row) in trace.rows.iter().enumerate() {
                let x_k = &iterates[i];
                let x_next = &iterates[i + 1];
                // f(x_k) - f*  <=  (V(x*, x_k) - V(x*, x_next)) / gamma
                //                  + gamma / (2 sigma) ||g_k||^2,
                // with f(x_k) + h(x_next) - F* on the left for composite runs.
                let lhs = if composite {
                    let h = problem.composite.as_ref().expect("composite");
                    row.f_value + h.eval(x_next) - opt.big_f_star.unwrap_or(opt.f_star)
                } else {
                    row.f_value - opt.f_star
                };
                let v_k = problem.map.bregman(x_star, x_k)?;
                let v_next = problem.map.bregman(x_star, x_next)?;
                let rhs = (v_k - v_next) / row.gamma
                    + row.gamma / (2.0 * params.sigma) * row.grad_dual_norm * row.grad_dual_norm;
                let slack = rhs - lhs;
                if slack < worst_slack {
                    worst_slack = slack;
                    worst_k = row.k;
                }
            }
            Some(CertificateLog {
                checked: trace.rows.len(),
                worst_slack: if trace.rows.is_empty() {
                    0.0
                } else {
                    worst_slack
                },
                worst_k,
            })
        }
    };

    Ok(AuditOutcome {
        report,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::schedule::{StepSizeRule, WeightScheme};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn theorem1_examples() {
        // single term, R = 2 sigma
        let p = BoundParams::new(2.0, 1.0, 0.0, 1).unwrap();
        assert_eq!(theorem1_rhs(&p, 3.0), 6.0);

        // m = 0, N = 4: direct sums computed independently in ascending order
        let p = BoundParams::new(50.0, 1.0, 0.0, 4).unwrap();
        let s: f64 = (1..=4).map(|k| (k as f64).powf(-0.5)).sum();
        let expected = 5.0 * (2.0 + s) / 4.0 * 10.0;
        let got = theorem1_rhs(&p, 10.0);
        assert!(rel(got, expected) < 1e-14);
        assert!(rel(got, 59.80571312970216) < 1e-12);

        // m = 2, N = 4
        let p = BoundParams::new(50.0, 1.0, 2.0, 4).unwrap();
        let s: f64 = (1..=4).map(|k| (k as f64).sqrt()).sum();
        let expected = 5.0 * (8.0 + s) / 10.0 * 10.0;
        let got = theorem1_rhs(&p, 10.0);
        assert!(rel(got, expected) < 1e-14);
        assert!(rel(got, 70.73132184970987) < 1e-12);
    }

    #[test]
    fn corollary1_examples() {
        let p = BoundParams::new(50.0, 1.0, 0.0, 4).unwrap();
        assert_eq!(corollary1_rhs(&p, 10.0).unwrap(), 75.0);
        assert!(theorem1_rhs(&p, 10.0) <= 75.0);

        let p = BoundParams::new(2.0, 1.0, 0.0, 1).unwrap();
        assert_eq!(corollary1_rhs(&p, 1.0).unwrap(), 3.0);

        let p = BoundParams::new(0.5, 1.0, 0.0, 100).unwrap();
        assert!(rel(corollary1_rhs(&p, 1.0).unwrap(), 0.15) < 1e-14);

        let p = BoundParams::new(1.0, 1.0, 0.5, 10).unwrap();
        assert!(matches!(
            corollary1_rhs(&p, 1.0),
            Err(Error::InvalidM(_, _))
        ));
    }

    #[test]
    fn theorem2_examples() {
        let p = BoundParams::new(50.0, 1.0, 0.0, 4).unwrap();
        // h(x1) = 0 collapses to the plain bound
        assert_eq!(
            theorem2_rhs(&p, 10.0, 10.0, 0.0).unwrap(),
            theorem1_rhs(&p, 10.0)
        );
        // m = 0: ratio^0 = 1, extra term h/N
        let got = theorem2_rhs(&p, 10.0, 10.0, 2.0).unwrap();
        assert!(rel(got, theorem1_rhs(&p, 10.0) + 0.5) < 1e-14);
        assert!(rel(got, 60.30571312970216) < 1e-12);

        // m = -1: ratio^{-1} with grad1 = 5, max = 10
        let p = BoundParams::new(50.0, 1.0, -1.0, 4).unwrap();
        let got = theorem2_rhs(&p, 10.0, 5.0, 2.0).unwrap();
        let s: f64 = (1..=4).map(|k| (k as f64).powf(-0.5)).sum();
        let expected = theorem1_rhs(&p, 10.0) + 2.0 * 2.0 / s;
        assert!(rel(got, expected) < 1e-14);
        assert!((got - theorem1_rhs(&p, 10.0) - 1.4365457709105658).abs() < 1e-14);
    }

    #[test]
    fn theorem2_guards() {
        let p = BoundParams::new(1.0, 1.0, 0.5, 4).unwrap();
        assert!(matches!(
            theorem2_rhs(&p, 1.0, 1.0, 0.5),
            Err(Error::InvalidM(_, _))
        ));
        let p = BoundParams::new(1.0, 1.0, -0.5, 4).unwrap();
        // zero first gradient with positive h(x1) has no defined ratio
        assert!(theorem2_rhs(&p, 1.0, 0.0, 0.5).is_err());
        // but is fine when h(x1) = 0
        assert!(theorem2_rhs(&p, 1.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn corollary2_examples() {
        let p = BoundParams::new(50.0, 1.0, 0.0, 4).unwrap();
        assert_eq!(corollary2_rhs(&p, 10.0, 0.0).unwrap(), 75.0);
        assert_eq!(corollary2_rhs(&p, 10.0, 2.0).unwrap(), 75.5);
        let p = BoundParams::new(0.5, 1.0, 0.0, 100).unwrap();
        assert!(rel(corollary2_rhs(&p, 1.0, 5.0).unwrap(), 0.2) < 1e-14);
    }

    #[test]
    fn bound_dominance_sampled() {
        for n in [1usize, 2, 5, 10, 100, 1000, 10_000, 250_000, 1_000_000] {
            let p = BoundParams::new(3.0, 1.0, 0.0, n).unwrap();
            assert!(theorem1_rhs(&p, 1.0) <= corollary1_rhs(&p, 1.0).unwrap());
        }
    }

    #[test]
    fn corollary_strictly_decreasing_in_n() {
        let mut prev = f64::INFINITY;
        for n in [1usize, 2, 4, 10, 50, 300, 2000, 50_000] {
            let p = BoundParams::new(2.0, 1.0, 0.0, n).unwrap();
            let v = corollary1_rhs(&p, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn theorem2_dominates_theorem1() {
        for m in [-1.0, -0.5, 0.0] {
            let p = BoundParams::new(4.0, 1.0, m, 32).unwrap();
            let t1 = theorem1_rhs(&p, 2.0);
            let t2 = theorem2_rhs(&p, 2.0, 1.0, 0.7).unwrap();
            assert!(t2 >= t1);
        }
    }

    #[test]
    fn empirical_rate_synthetic() {
        let half: Vec<(usize, f64)> = [100usize, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (n, 3.0 / (n as f64).sqrt()))
            .collect();
        assert!((empirical_rate(&half).unwrap() + 0.5).abs() < 1e-12);

        let linear: Vec<(usize, f64)> = [100usize, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (n, 7.0 / n as f64))
            .collect();
        assert!((empirical_rate(&linear).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_rate_guards() {
        assert!(matches!(
            empirical_rate(&[(10, 1.0), (20, 0.5), (30, 0.2)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            empirical_rate(&[(10, 1.0), (20, 0.5), (30, 0.0), (40, 0.1)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            empirical_rate(&[(10, 1.0), (10, 0.5), (30, 0.2), (40, 0.1)]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn audit_reports_bound_for_lipschitz_free() {
        let problem = problems::example1();
        let trace = problem
            .run(
                StepSizeRule::lipschitz_free(0.0, 200.0, 1.0).unwrap(),
                WeightScheme::uniform(),
                100,
            )
            .unwrap();
        let params = BoundParams::new(200.0, 1.0, 0.0, 100).unwrap();
        let outcome = audit_trace(&trace, &problem, &params).unwrap();
        assert_eq!(outcome.report.kind, ReportKind::Bound);
        assert_eq!(outcome.report.satisfied, Some(true));
        assert!(outcome.report.corollary_rhs.is_some());
        let certs = outcome.certificates.unwrap();
        assert!(certs.all_hold(), "worst slack {}", certs.worst_slack);
    }

    #[test]
    fn audit_is_diagnostic_for_nesterov() {
        let problem = problems::example1();
        let trace = problem
            .run(
                StepSizeRule::nesterov(1.0).unwrap(),
                WeightScheme::uniform(),
                81,
            )
            .unwrap();
        let params = BoundParams::new(200.0, 1.0, 0.0, 81).unwrap();
        let outcome = audit_trace(&trace, &problem, &params).unwrap();
        assert_eq!(outcome.report.kind, ReportKind::DiagnosticOnly);
        assert_eq!(outcome.report.theorem_rhs, None);
        assert_eq!(outcome.report.satisfied, None);
        // the step sequence is genuinely non-monotone
        let gammas: Vec<f64> = trace.rows.iter().map(|r| r.gamma).collect();
        assert!(gammas.windows(2).any(|w| w[1] > w[0]));
        // certificates hold regardless of the rule
        assert!(outcome.certificates.unwrap().all_hold());
    }

    #[test]
    fn audit_requires_known_optimum() {
        let mut problem = problems::example1();
        problem.known_opt = None;
        let trace = problem
            .run(
                StepSizeRule::nesterov(1.0).unwrap(),
                WeightScheme::uniform(),
                10,
            )
            .unwrap();
        let params = BoundParams::new(200.0, 1.0, 0.0, 10).unwrap();
        assert!(matches!(
            audit_trace(&trace, &problem, &params),
            Err(Error::MissingOptimum)
        ));
    }

    /// Full composite run with a linear term, audited end to end. The
    /// optimum is known in closed form: minimizing
    /// 0.5 ||x - (0.8, 0.2)||^2 + <(0.3, 0.7), x> over [0,1]^2 decouples per
    /// coordinate into clamp(0.8 - 0.3) = 0.5 and clamp(0.2 - 0.7) = 0.
    #[test]
    fn linear_composite_run_audits_clean() {
        use crate::geometry::{CompositeTerm, FeasibleSet, MirrorMap, NormPair, Vector};
        use crate::problems::KnownOptimum;
        use crate::solver::Objective;

        let target = [0.8, 0.2];
        let objective = Objective::new(
            "half-sq-to-target",
            move |x| 0.5 * ((x[0] - target[0]).powi(2) + (x[1] - target[1]).powi(2)),
            move |x| vec![x[0] - target[0], x[1] - target[1]],
        );
        let coeffs = Vector::new(vec![0.3, 0.7]).unwrap();
        let h = CompositeTerm::linear(coeffs.clone());
        let x_star = Vector::new(vec![0.5, 0.0]).unwrap();
        let f_star = objective.eval(&x_star);
        let big_f_star = f_star + h.eval(&x_star);
        assert!((big_f_star - 0.215).abs() < 1e-15);

        let problem = crate::problems::TestProblem {
            name: "linear-composite-square".into(),
            objective,
            composite: Some(h),
            feasible: FeasibleSet::box_set(
                Vector::new(vec![0.0, 0.0]).unwrap(),
                Vector::new(vec![1.0, 1.0]).unwrap(),
            )
            .unwrap(),
            map: MirrorMap::EuclideanHalfSq,
            norms: NormPair::L2,
            start: Vector::new(vec![1.0, 1.0]).unwrap(),
            known_opt: Some(KnownOptimum {
                x_star,
                f_star,
                big_f_star: Some(big_f_star),
            }),
            lipschitz_on_q: true,
        };

        // grid oracle confirms the planted optimum
        let grid_min = crate::problems::verify_by_grid(&problem, 201).unwrap();
        assert!((grid_min - big_f_star).abs() < 1e-12, "grid min {grid_min}");

        let r = crate::problems::safe_r(&problem.feasible, problem.map).unwrap();
        for m in [-1.0, -0.5, 0.0] {
            let trace = problem
                .run(
                    StepSizeRule::lipschitz_free(0.5, r, 1.0).unwrap(),
                    WeightScheme::new(m).unwrap(),
                    2000,
                )
                .unwrap();
            let params = BoundParams::new(r, 1.0, m, trace.completed()).unwrap();
            let outcome = audit_trace(&trace, &problem, &params).unwrap();
            assert_eq!(outcome.report.satisfied, Some(true), "m = {m}");
            let certs = outcome.certificates.unwrap();
            assert!(
                certs.all_hold(),
                "m = {m}: worst slack {}",
                certs.worst_slack
            );
        }
    }

    #[test]
    fn audit_without_iterates_skips_certificates() {
        use crate::solver::{mirror_descent, IterateStorage, SolverConfig};
        let problem = problems::example1();
        let mut cfg = SolverConfig::new(
            50,
            StepSizeRule::lipschitz_free(0.0, 200.0, 1.0).unwrap(),
            WeightScheme::uniform(),
            problem.map,
            problem.feasible.clone(),
        );
        cfg.record_iterates = IterateStorage::Never;
        let trace = mirror_descent(&problem.objective, &problem.start, &cfg).unwrap();
        assert!(trace.iterates.is_none());
        let params = BoundParams::new(200.0, 1.0, 0.0, trace.completed()).unwrap();
        let outcome = audit_trace(&trace, &problem, &params).unwrap();
        assert!(outcome.certificates.is_none());
        assert_eq!(outcome.report.satisfied, Some(true));
    }

    #[test]
    fn power_sum_descending_matches_naive() {
        for (n, p) in [(1000usize, -0.5), (977, 1.0), (10, 0.0)] {
            let naive: f64 = (1..=n).map(|k| (k as f64).powf(p)).sum();
            let got = power_sum(n, p);
            assert!(rel(got, naive) < 1e-13);
        }
    }
}
