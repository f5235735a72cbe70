//! Minimal library walkthrough: run the Lipschitz-free rule on a problem
//! whose subgradients are unbounded over the feasible set, then audit the
//! run against its convergence bound.

use mirror_descent::analysis::{audit_trace, BoundParams};
use mirror_descent::problems::{floored_simplex_r, non_lipschitz_sqrt_simplex};
use mirror_descent::schedule::{StepSizeRule, WeightScheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let floor = 1e-8;
    let problem = non_lipschitz_sqrt_simplex(8, floor)?;
    // the entropy divergence to any simplex point is at most ln(1/floor)
    // over the floored simplex, so this R satisfies the bound's premise
    let r = floored_simplex_r(floor)?;

    let rule = StepSizeRule::lipschitz_free(0.0, r, problem.map.sigma())?;
    let trace = problem.run(rule, WeightScheme::uniform(), 5000)?;

    let params = BoundParams::new(r, problem.map.sigma(), 0.0, trace.completed())?;
    let outcome = audit_trace(&trace, &problem, &params)?;
    let report = outcome.report;

    println!("problem:            {}", problem.name);
    println!("iterations:         {}", trace.completed());
    println!("max dual grad norm: {:.6e}", report.max_grad_dual);
    println!("gap at average:     {:.6e}", report.observed_gap);
    println!("theorem bound:      {:.6e}", report.theorem_rhs.unwrap());
    println!("bound satisfied:    {}", report.satisfied.unwrap());
    if let Some(certs) = outcome.certificates {
        println!(
            "certificates:       {} iterations, worst slack {:.3e}",
            certs.checked, certs.worst_slack
        );
    }
    Ok(())
}
