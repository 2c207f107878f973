//! Closed-form exit probabilities and start-averaged values for the seven
//! catalogued processes.
//!
//! ```text
//! cargo run --release --example closed_forms
//! ```

use fpp::closed_forms::{beta_moment, pia_closed, q_closed};
use fpp::model::{catalog_entry, DensitySpec, ExampleParams, EXAMPLE_IDS};

fn main() -> fpp::Result<()> {
    let p = ExampleParams::default();

    for id in EXAMPLE_IDS {
        let entry = catalog_entry(id)?;
        println!("Example {id}: {}", entry.title);
        println!("  interval   {}", entry.interval);
        println!("  pi_a(x)    {}", entry.exit_probability);

        // sample the closed form on five interior points of the example's own interval
        let pia = fpp::closed_forms::ClosedFormPia::for_example(id, &p)?;
        let iv = pia.interval();
        let row: Vec<String> = iv
            .interior_nodes(5)
            .into_iter()
            .map(|x| format!("{x:.3}->{:.6}", pia_closed(id, &p, x).unwrap()))
            .collect();
        println!("  samples    {}", row.join("  "));

        // Examples 6 and 7 are only stated for a uniform start
        let g = if id >= 6 {
            DensitySpec::uniform(iv.a(), iv.b())
        } else {
            DensitySpec::ModifiedBeta {
                alpha: 2.0,
                beta: 3.0,
                a: iv.a(),
                b: iv.b(),
            }
        };
        println!("  q = {:.10}  ({})", q_closed(id, &p, &g)?, describe(&g));
        println!();
    }

    // Examples 2 and 3 reduce to a Beta moment: q = 1 - E[X^gamma].
    for gamma in [0.5, 1.0, 2.0, 3.5] {
        let m = beta_moment(2.0, 3.0, gamma)?;
        println!("E[X^{gamma}] under Beta(2,3) = {m:.12}");
    }
    Ok(())
}

fn describe(g: &DensitySpec) -> String {
    match g {
        DensitySpec::Uniform { .. } => "uniform start".into(),
        DensitySpec::ModifiedBeta { alpha, beta, .. } => format!("Beta({alpha}, {beta}) start"),
        other => format!("{other:?}"),
    }
}
