//! Grid refinement study against exact solutions.
//!
//! Pure Brownian motion is solved exactly by the scheme at every grid size, so
//! its errors sit at the rounding floor. The jump-free CIR and Wright-Fisher
//! problems show second-order convergence of the interpolated field.
//!
//! ```text
//! cargo run --release --example convergence
//! ```

use fpp::closed_forms::ClosedFormPia;
use fpp::model::{build_example, ExampleParams, Interval, ProcessSpec};
use fpp::pide::{convergence_study, ConvergenceRow};

fn print_table(label: &str, rows: &[ConvergenceRow]) {
    println!("{label}");
    println!("{:>6} {:>12} {:>8} {:>12} {:>8}", "n", "field err", "order", "nodal err", "order");
    for r in rows {
        let fmt = |o: Option<f64>| o.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:>6} {:>12.3e} {:>8} {:>12.3e} {:>8}",
            r.n,
            r.max_error,
            fmt(r.observed_order),
            r.nodal_error,
            fmt(r.nodal_order)
        );
    }
    println!();
}

fn main() -> fpp::Result<()> {
    let n_list = [31, 63, 127, 255, 511];

    let bm = ProcessSpec::brownian(Interval::unit());
    print_table("brownian motion, pi_a = 1 - x", &convergence_study(&bm, |x| 1.0 - x, &n_list)?);

    // dX = -dt/2 + sqrt(X) dB, degenerate at the left end
    print_table(
        "CIR without jumps",
        &convergence_study(&ProcessSpec::jump_free_cir(), |x| 1.0 - x * x, &n_list)?,
    );
    print_table(
        "Wright-Fisher without jumps",
        &convergence_study(&ProcessSpec::jump_free_wright_fisher(), |x| 1.0 - x * x, &n_list)?,
    );

    // unit-rate jumps of size ε on (0, 2ε); the closed form is piecewise with a seam at ε
    let p = ExampleParams::default();
    let exact = ClosedFormPia::for_example(7, &p)?;
    let spec = build_example(7, &p)?;
    print_table("example 7", &convergence_study(&spec, |x| exact.value(x), &n_list)?);
    Ok(())
}
