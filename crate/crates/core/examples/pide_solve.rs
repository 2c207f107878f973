//! Solve the exit problem numerically on a grid, for a catalogued process and
//! for a process assembled by hand.
//!
//! ```text
//! cargo run --release --example pide_solve
//! ```

use fpp::closed_forms::ClosedFormPia;
use fpp::model::{build_example, CoefficientField, ExampleParams, Interval, JumpKernel, JumpStream, ProcessSpec};
use fpp::pide;

fn main() -> fpp::Result<()> {
    let p = ExampleParams::default();

    // Example 2 has state-proportional uniform jumps in both directions.
    let spec = build_example(2, &p)?;
    let field = pide::solve(&spec, 511)?;
    let exact = ClosedFormPia::for_example(2, &p)?;
    let diag = field.diagnostics.as_ref().expect("solver fills diagnostics");
    println!("example 2, n = 511");
    println!("  relative residual  {:.2e}", diag.relative_residual);
    println!("  monotone           {}", diag.monotone());
    println!("  upwind rows        {}", diag.upwind_rows);
    for x in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!("  x = {x:.2}  pide {:.6}  closed {:.6}", field.value_at(x), exact.value(x));
    }

    // An Ornstein-Uhlenbeck-like drift towards 0.3 with occasional fixed jumps
    // of either sign. No closed form is known for this one.
    let custom = ProcessSpec::new(
        CoefficientField::linear(-2.0, 0.6),
        CoefficientField::constant(0.5),
        JumpStream::new(0.8, JumpKernel::FixedUp { eps_bar: 0.15 })?,
        JumpStream::new(0.4, JumpKernel::FixedDown { delta_bar: 0.25 })?,
        Interval::new(-0.5, 1.0)?,
    )?;
    let field = pide::solve(&custom, 255)?;
    println!("\ncustom process on (-0.5, 1)");
    for x in [-0.4, -0.1, 0.3, 0.6, 0.9] {
        println!("  x = {x:+.2}  pi_a {:.6}", field.value_at(x));
    }

    let path = std::env::temp_dir().join("custom_pia.csv");
    field.write_csv(std::fs::File::create(&path)?)?;
    println!("field written to {}", path.display());
    Ok(())
}
