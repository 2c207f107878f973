//! Recover a start density from a target start-averaged exit probability.
//!
//! A single number cannot pin down two shape parameters, so the solver also
//! returns samples along the curve of equally good `(α, β)` pairs and picks
//! the one closest to the uniform density.
//!
//! ```text
//! cargo run --release --example inverse_problem
//! ```

use fpp::inverse::{forward_q, solve_inverse, Family, InverseProblem, Provider};
use fpp::model::{build_example, DensitySpec, ExampleParams};
use fpp::pide;
use fpp::FppError;

fn main() -> fpp::Result<()> {
    let p = ExampleParams::default();

    // Example 1 on (0, 1): q = 1 - E[X], so q = 0.5 is hit by every symmetric Beta.
    let problem = InverseProblem::new(0.5, Family::Beta, Provider::closed_form(1, &p)?)?;
    let sol = solve_inverse(&problem)?;
    report(&sol);

    // Example 2 with gamma = 2: q = 1 - E[X^2], target taken from Beta(2, 5)
    let provider = Provider::closed_form(2, &p)?;
    let target = forward_q(&DensitySpec::Beta { alpha: 2.0, beta: 5.0 }, &provider)?;
    let sol = solve_inverse(&InverseProblem::new(target, Family::Beta, provider)?)?;
    report(&sol);

    // The same problem against a numerical field instead of the closed form
    let field = pide::solve(&build_example(2, &p)?, 511)?;
    let sol = solve_inverse(&InverseProblem::new(target, Family::Beta, Provider::Pide(field))?)?;
    report(&sol);

    // A target outside the reachable range is an error carrying the nearest q
    let far = InverseProblem::new(0.999999, Family::Beta, Provider::closed_form(2, &p)?)?;
    match solve_inverse(&far) {
        Err(FppError::Unreachable { best_q, q_min, q_max, .. }) => {
            println!("0.999999 is unreachable: best q {best_q:.6}, range ({q_min:.6}, {q_max:.6})")
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}

fn report(sol: &fpp::inverse::InverseSolution) {
    println!("{} / {} family, target q = {:.6}", sol.provider, sol.family.name(), sol.target_q);
    match sol.params {
        Some((a, b)) => println!("  alpha {a:.6}  beta {b:.6}  q {:.10}  psi {:.2e}", sol.achieved_q, sol.psi),
        None => println!("  no parameters  q {:.10}", sol.achieved_q),
    }
    println!("  reachable q in ({:.6}, {:.6})", sol.q_range.0, sol.q_range.1);
    for c in sol.curve_samples.iter().step_by(4) {
        println!("    on curve: alpha {:8.4}  beta {:8.4}  q {:.10}", c.alpha, c.beta, c.q);
    }
    for n in &sol.notes {
        println!("  note: {n}");
    }
    println!();
}
