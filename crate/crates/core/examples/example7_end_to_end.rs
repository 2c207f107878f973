//! Example 7 from every angle: closed form, generator residual, grid solve,
//! simulation and the start-averaged value.
//!
//! The process is a standard Brownian motion plus unit-rate jumps of size ε,
//! observed until it leaves `(0, 2ε)`. Its exit probability is built from two
//! exponential pieces glued with matching value, slope and curvature at `x = ε`.
//!
//! ```text
//! cargo run --release --example example7_end_to_end -- 0.5
//! ```

use fpp::closed_forms::{example7_constants, ClosedFormPia};
use fpp::generator::{residual_profile, ExtensionPolicy};
use fpp::mc::{estimate_pia, SimConfig, Start};
use fpp::model::{build_example, ExampleParams};
use fpp::pide;
use fpp::verify::{verify_example, VerifyConfig};

fn main() -> fpp::Result<()> {
    let epsilon = std::env::args()
        .nth(1)
        .map(|s| s.parse::<f64>().expect("epsilon must be a number"))
        .unwrap_or(0.5);
    let p = ExampleParams {
        epsilon,
        ..ExampleParams::default()
    };
    let spec = build_example(7, &p)?;
    let k = example7_constants(epsilon)?;
    let closed = ClosedFormPia::Example7(k);

    println!("epsilon = {epsilon}");
    println!("seam mismatch (value, slope, curvature) max = {:.2e}", k.c2_mismatch());
    let printed = fpp::closed_forms::Example7Constants::as_printed(epsilon)?;
    println!("same with the printed sign of b          = {:.2e}", printed.c2_mismatch());

    let res = residual_profile(&spec, &closed, ExtensionPolicy::OuterConditions, 101)?;
    println!("generator residual under outer conditions = {:.2e}", res.max_abs());

    let field = pide::solve(&spec, 1023)?;
    let gap = field
        .grid
        .interior()
        .iter()
        .zip(&field.values)
        .map(|(&x, &v)| (v - closed.value(x)).abs())
        .fold(0.0, f64::max);
    println!("grid solve (n = 1023) vs closed form      = {gap:.2e}");

    let cfg = SimConfig::new(1e-4, 50_000, 3)?;
    let x0 = epsilon;
    let est = estimate_pia(&spec, &Start::Fixed(x0), &cfg)?.checked()?;
    println!(
        "simulation from x = eps: {:.4} +- {:.4}, closed {:.4}",
        est.p_hat,
        est.std_error,
        closed.value(x0)
    );

    println!("q under the uniform start: quadrature {:.10}", k.q_quadrature()?);
    println!("                          closed expression {:.10}", k.q_transcribed());

    let report = verify_example(7, &p, &VerifyConfig::default())?;
    for c in &report.checks {
        println!("[{:?}] {} : {}", c.kind, c.name, if c.passed { "ok" } else { "fails" });
    }
    std::process::exit(report.exit_code());
}
