//! The `fpp` command line: catalog, forward values, verification, residual
//! profiles and inversion. Every command echoes its configuration in JSON
//! output so runs can be reproduced.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::closed_forms::ClosedFormPia;
use crate::error::{invalid, FppError, Result};
use crate::generator::{residual_profile, ExtensionPolicy};
use crate::inverse::{solve_inverse, Family, InverseProblem, Provider};
use crate::mc::{estimate_pia, simulate_samples, write_samples_csv, SimConfig, Start};
use crate::model::{
    build_example, catalog_entry, CoefficientField, Example4Variant, ExampleParams, ProcessSpec, EXAMPLE_IDS,
};
use crate::pide;
use crate::verify::{combined_exit_code, verify_example, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "fpp", version, about = "Exit-side probabilities of jump-diffusions and the inverse first-passage-place problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the worked examples with their coefficients and closed forms.
    Catalog {
        #[arg(long)]
        example: Option<u8>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate π_a at points, from a closed form, the PIDE or simulation.
    Pia {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "closed")]
        method: Method,
        /// Evaluation point; may be repeated.
        #[arg(long = "x")]
        x: Vec<f64>,
        /// Evaluate at this many equispaced interior points.
        #[arg(long)]
        sweep: Option<usize>,
        #[command(flatten)]
        num: NumericArgs,
        /// Also dump every simulated path to this CSV (single --x only).
        #[arg(long)]
        samples_csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the check suite of one example, or of all of them.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, conflicts_with = "example")]
        all: bool,
        /// Start density shape parameters.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        num: NumericArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Residual of a closed form under the generator, as CSV `x,residual,overshoot_flag`.
    Residual {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "outer")]
        policy: Policy,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Find density parameters with ∫ g π_a = q.
    Invert {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: f64,
        #[arg(long, value_enum, default_value = "modbeta")]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "closed")]
        provider: Method,
        /// Lower and upper bound for both shape parameters.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bounds: Option<Vec<f64>>,
        #[command(flatten)]
        num: NumericArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Pide,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Outer,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Beta,
    Modbeta,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    TwoSided,
    UpOnly,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Example selection and its parameters.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub example: Option<u8>,
    /// Process specification as JSON, instead of an example.
    #[arg(long, conflicts_with = "example")]
    pub spec_file: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub eps_bar: Option<f64>,
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Constant diffusion coefficient of Examples 1 and 4.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
}

impl ModelArgs {
    pub fn params(&self) -> ExampleParams {
        let mut p = ExampleParams::default();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.a, self.a);
        set(&mut p.b, self.b);
        set(&mut p.gamma, self.gamma);
        set(&mut p.lambda1, self.lambda1);
        set(&mut p.lambda2, self.lambda2);
        set(&mut p.alpha1, self.alpha1);
        set(&mut p.alpha2, self.alpha2);
        set(&mut p.eps_bar, self.eps_bar);
        set(&mut p.delta_bar, self.delta_bar);
        set(&mut p.epsilon, self.eps);
        if let Some(s) = self.sigma {
            p.diffusion = CoefficientField::constant(s);
        }
        if let Some(v) = self.variant {
            p.variant = match v {
                VariantArg::TwoSided => Example4Variant::TwoSided,
                VariantArg::UpOnly => Example4Variant::UpOnly,
            };
        }
        p
    }

    fn example(&self) -> Result<u8> {
        self.example.ok_or_else(|| invalid("--example is required"))
    }

    pub fn spec(&self) -> Result<ProcessSpec> {
        match (&self.spec_file, self.example) {
            (Some(path), _) => Ok(serde_json::from_reader(File::open(path)?)?),
            (None, Some(id)) => build_example(id, &self.params()),
            (None, None) => Err(invalid("either --example or --spec-file is required")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    #[arg(long, default_value_t = 511)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

impl NumericArgs {
    fn sim(&self) -> Result<SimConfig> {
        SimConfig::new(self.dt, self.paths, self.seed)
    }
}

fn open_output<'w>(out: &OutputArgs, stdout: &'w mut dyn Write) -> Result<Box<dyn Write + 'w>> {
    Ok(match &out.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(stdout),
    })
}

#[derive(Debug, Serialize)]
struct PiaRow {
    x: f64,
    pi_a: f64,
    std_error: Option<f64>,
    provenance: String,
}

#[derive(Debug, Serialize)]
struct PiaReport<'a> {
    example: Option<u8>,
    params: Option<ExampleParams>,
    method: &'static str,
    grid_n: Option<usize>,
    sim: Option<SimConfig>,
    rows: &'a [PiaRow],
}

fn cmd_catalog(example: Option<u8>, format: Format, w: &mut dyn Write) -> Result<()> {
    let ids: Vec<u8> = match example {
        Some(id) => vec![id],
        None => EXAMPLE_IDS.to_vec(),
    };
    let entries = ids.into_iter().map(catalog_entry).collect::<Result<Vec<_>>>()?;
    match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&entries)?)?,
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            for e in &entries {
                c.serialize(e)?;
            }
            c.flush()?;
        }
        Format::Text => {
            for e in &entries {
                writeln!(w, "Example {}: {}", e.id, e.title)?;
                writeln!(w, "  interval          {}", e.interval)?;
                writeln!(w, "  drift             {}", e.drift)?;
                writeln!(w, "  diffusion         {}", e.diffusion)?;
                writeln!(w, "  jumps             {}", e.jumps)?;
                writeln!(w, "  exit probability  {}", e.exit_probability)?;
                writeln!(w, "  density           {}", e.density)?;
                writeln!(w, "  {}", e.q)?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pia(
    model: &ModelArgs,
    method: Method,
    xs: &[f64],
    sweep: Option<usize>,
    num: &NumericArgs,
    samples_csv: Option<&PathBuf>,
    format: Format,
    w: &mut dyn Write,
) -> Result<()> {
    let spec = model.spec()?;
    let points = match (xs.is_empty(), sweep) {
        (false, None) => xs.to_vec(),
        (true, Some(n)) if n >= 1 => spec.interval.interior_nodes(n),
        (false, Some(_)) => return Err(invalid("use either --x or --sweep, not both")),
        _ => return Err(invalid("give at least one --x or a --sweep count")),
    };
    let mut rows = Vec::with_capacity(points.len());
    match method {
        Method::Closed => {
            if model.spec_file.is_some() {
                return Err(invalid("closed forms exist only for the catalog examples"));
            }
            let id = model.example()?;
            let pia = ClosedFormPia::for_example(id, &model.params())?;
            for &x in &points {
                rows.push(PiaRow {
                    x,
                    pi_a: pia.value(x),
                    std_error: None,
                    provenance: format!("closed:{id}"),
                });
            }
        }
        Method::Pide => {
            let field = pide::solve(&spec, num.grid_n)?;
            for &x in &points {
                rows.push(PiaRow {
                    x,
                    pi_a: field.value_at(x),
                    std_error: None,
                    provenance: format!("pide:n={}", num.grid_n),
                });
            }
        }
        Method::Mc => {
            let cfg = num.sim()?;
            if let Some(path) = samples_csv {
                if points.len() != 1 {
                    return Err(invalid("--samples-csv needs exactly one --x"));
                }
                let samples = simulate_samples(&spec, &Start::Fixed(points[0]), &cfg)?;
                write_samples_csv(&samples, File::create(path)?)?;
            }
            for &x in &points {
                let e = estimate_pia(&spec, &Start::Fixed(x), &cfg)?.checked()?;
                rows.push(PiaRow {
                    x,
                    pi_a: e.p_hat,
                    std_error: Some(e.std_error),
                    provenance: format!("mc:paths={},dt={},seed={}", cfg.n_paths, cfg.dt, cfg.seed),
                });
            }
        }
    }
    match format {
        Format::Json => {
            let report = PiaReport {
                example: model.example,
                params: model.example.map(|_| model.params()),
                method: match method {
                    Method::Closed => "closed",
                    Method::Pide => "pide",
                    Method::Mc => "mc",
                },
                grid_n: (method == Method::Pide).then_some(num.grid_n),
                sim: (method == Method::Mc).then(|| num.sim()).transpose()?,
                rows: &rows,
            };
            writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Format::Csv | Format::Text => {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["x", "pi_a", "std_error", "provenance"])?;
            for r in &rows {
                c.write_record([
                    r.x.to_string(),
                    r.pi_a.to_string(),
                    r.std_error.map(|s| s.to_string()).unwrap_or_default(),
                    r.provenance.clone(),
                ])?;
            }
            c.flush()?;
        }
    }
    Ok(())
}

fn cmd_verify(model: &ModelArgs, all: bool, alpha: f64, beta: f64, num: &NumericArgs, w: &mut dyn Write) -> Result<i32> {
    let ids: Vec<u8> = if all {
        EXAMPLE_IDS.to_vec()
    } else {
        vec![model.example()?]
    };
    let cfg = VerifyConfig {
        alpha,
        beta,
        grid_n: num.grid_n,
        mc: num.sim()?,
        ..VerifyConfig::default()
    };
    let p = model.params();
    let reports = ids
        .into_iter()
        .map(|id| verify_example(id, &p, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let code = combined_exit_code(&reports);
    if all {
        writeln!(w, "{}", serde_json::to_string_pretty(&reports)?)?;
    } else {
        writeln!(w, "{}", serde_json::to_string_pretty(&reports[0])?)?;
    }
    for r in &reports {
        for c in &r.checks {
            let tag = match (c.passed, c.kind) {
                (true, _) => "PASS",
                (false, crate::verify::CheckKind::Info) => "INFO",
                (false, crate::verify::CheckKind::Soft) => "SOFT",
                (false, crate::verify::CheckKind::Hard) => "FAIL",
            };
            eprintln!("example {} {tag} {}: {:e}", r.example, c.name, c.value);
        }
    }
    Ok(code)
}

fn cmd_residual(model: &ModelArgs, policy: Policy, points: usize, w: &mut dyn Write) -> Result<()> {
    let id = model.example()?;
    let p = model.params();
    let spec = build_example(id, &p)?;
    let pia = ClosedFormPia::for_example(id, &p)?;
    let policy = match policy {
        Policy::Outer => ExtensionPolicy::OuterConditions,
        Policy::Analytic => ExtensionPolicy::AnalyticContinuation,
    };
    residual_profile(&spec, &pia, policy, points)?.write_csv(w)
}

fn cmd_invert(
    model: &ModelArgs,
    q: f64,
    family: FamilyArg,
    method: Method,
    bounds: Option<&[f64]>,
    num: &NumericArgs,
    w: &mut dyn Write,
) -> Result<()> {
    let provider = match method {
        Method::Closed => {
            if model.spec_file.is_some() {
                return Err(invalid("the closed-form provider needs --example"));
            }
            Provider::closed_form(model.example()?, &model.params())?
        }
        Method::Pide => Provider::Pide(pide::solve(&model.spec()?, num.grid_n)?),
        Method::Mc => Provider::MonteCarlo {
            spec: model.spec()?,
            cfg: num.sim()?,
        },
    };
    let iv = provider.interval();
    let family = match family {
        FamilyArg::Beta => Family::Beta,
        FamilyArg::Modbeta => Family::ModifiedBeta { a: iv.a(), b: iv.b() },
        FamilyArg::Uniform => Family::Uniform { a: iv.a(), b: iv.b() },
    };
    let mut problem = InverseProblem::new(q, family, provider)?;
    if let Some(b) = bounds {
        problem.bounds = (b[0], b[1]);
        problem.validate()?;
    }
    let solution = solve_inverse(&problem)?;
    writeln!(w, "{}", solution.to_json()?)?;
    Ok(())
}

/// Runs a parsed command, writing results to `stdout` unless `--output` is
/// given. Returns the process exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Catalog { example, format, out } => {
            cmd_catalog(*example, *format, &mut open_output(out, stdout)?)?;
            Ok(0)
        }
        Command::Pia {
            model,
            method,
            x,
            sweep,
            num,
            samples_csv,
            format,
            out,
        } => {
            let mut w = open_output(out, stdout)?;
            cmd_pia(model, *method, x, *sweep, num, samples_csv.as_ref(), *format, &mut w)?;
            Ok(0)
        }
        Command::Verify {
            model,
            all,
            alpha,
            beta,
            num,
            out,
        } => cmd_verify(model, *all, *alpha, *beta, num, &mut open_output(out, stdout)?),
        Command::Residual {
            model,
            policy,
            points,
            out,
        } => {
            cmd_residual(model, *policy, *points, &mut open_output(out, stdout)?)?;
            Ok(0)
        }
        Command::Invert {
            model,
            q,
            family,
            provider,
            bounds,
            num,
            out,
        } => {
            let mut w = open_output(out, stdout)?;
            cmd_invert(model, *q, *family, *provider, bounds.as_deref(), num, &mut w)?;
            Ok(0)
        }
    }
}

/// Parses `args` and runs; errors go to stderr with exit code 1.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        // a closed pipe (`fpp catalog | head`) is not a failure
        Err(FppError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("fpp").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = execute(cli, &mut buf).unwrap();
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn catalog_lists_seven() {
        let (_, out) = exec(&["catalog", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 7);
    }

    #[test]
    fn pia_closed_cosine_at_zero() {
        let (_, out) = exec(&["pia", "--example", "6", "--method", "closed", "--x", "0"]);
        let row = out.lines().nth(1).unwrap();
        assert!(row.starts_with("0,1,"), "{row}");
    }

    #[test]
    fn unknown_flags_and_combos_are_rejected() {
        assert!(Cli::try_parse_from(["fpp", "catalog", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["fpp", "verify", "--all", "--example", "1"]).is_err());
        let cli = Cli::try_parse_from(["fpp", "pia", "--example", "1", "--x", "0.5", "--sweep", "3"]).unwrap();
        assert!(execute(cli, &mut Vec::new()).is_err());
    }

    #[test]
    fn params_pick_up_flags() {
        let cli = Cli::try_parse_from(["fpp", "residual", "--example", "7", "--eps", "0.25", "--sigma", "2"]).unwrap();
        let Command::Residual { model, .. } = cli.command else {
            unreachable!()
        };
        let p = model.params();
        assert_eq!(p.epsilon, 0.25);
        assert_eq!(p.diffusion.value(0.3), 2.0);
    }
}
