//! Command-line front end. Every output embeds the resolved configuration; nothing in it
//! depends on the clock, so equal configurations give byte-identical output.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::berezin::{berezin_at, default_tol, BoundaryData, QuadratureSpec, Route};
use crate::douglas::{
    boundary_criterion, decide_invertibility, fredholm_equiv_check, iterated_berezin_criterion, subnormalized_note, Mode,
};
use crate::error::{Error, Result};
use crate::exact::format_float as f;
use crate::geometry::{
    luecking_density, parabolic_margin, thm_sufficient_check, DiskGrid, ParabolicMode, DEFAULT_ANGLES,
    DEFAULT_BOUNDARY_GAP, DEFAULT_RINGS, DEFAULT_SEED,
};
use crate::repro::reproduce;
use crate::schema::{parse_symbol, symbol_to_value};
use crate::symbols::{Complex, Interpolation, SampledSymbol, Symbol, TrigPolynomial};
use crate::toeplitz::{matrix_closed, matrix_quadrature, neumann_certificate, neumann_certificate_at, ToeplitzTruncation};

/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 64;
/// Exit status for unmet hypotheses, domain errors and malformed input.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "bergtol", version, about = "Toeplitz operators on the Bergman space of the disc")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Symbol description: a JSON file, or inline JSON starting with '{'.
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Evaluation point `RE+IMi`; repeat for several points.
    #[arg(long = "z", global = true, allow_hyphen_values = true)]
    z: Vec<String>,
    /// Truncation size.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_RINGS)]
    rings: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_ANGLES)]
    angles: usize,
    #[arg(long = "boundary-gap", global = true, default_value_t = DEFAULT_BOUNDARY_GAP)]
    boundary_gap: f64,
    /// Absolute tolerance (defaults to $BERGTOL_DEFAULT_TOL or 1e-10; 1e-9 for float decisions).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Variant {
    Quadratic,
    Linear,
}

impl From<Variant> for ParabolicMode {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Quadratic => ParabolicMode::Quadratic,
            Variant::Linear => ParabolicMode::Linear,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RouteArg {
    Auto,
    Quad,
    Series,
    Matrix,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MatrixRoute {
    Closed,
    Quad,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DecideMode {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Criterion {
    /// Angle system for normalized harmonic polynomials.
    Angle,
    /// Zero search for the boundary values.
    Boundary,
    /// Parabolic hypothesis plus boundary zero search.
    Fredholm,
    /// Grid check of the iterated Berezin transform.
    Iterated,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Evaluate the symbol at the given points.
    Eval,
    /// Parabolic margin, optionally the sufficient conditions at level rho and a density estimate.
    CheckGeometric {
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Variant::Quadratic)]
        variant: Variant,
        #[arg(long)]
        rho: Option<f64>,
        /// Pseudohyperbolic radius for a density estimate of {|phi| > level}.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Level for the density set (defaults to rho, then 1/2).
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Berezin transform at the given points, as CSV rows z_re,z_im,value_re,value_im,est_error.
    Berezin {
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
    },
    /// N x N section of the Toeplitz operator.
    Matrix {
        #[arg(long, value_enum, default_value_t = MatrixRoute::Closed)]
        route: MatrixRoute,
    },
    /// Extreme singular values of sections for a sweep of sizes.
    Svd {
        /// `start:stop:step`, inclusive of stop.
        #[arg(long = "n-sweep")]
        n_sweep: String,
        #[arg(long, value_enum, default_value_t = MatrixRoute::Closed)]
        route: MatrixRoute,
    },
    /// Invertibility decision.
    Decide {
        #[arg(long, value_enum, default_value_t = DecideMode::Exact)]
        mode: DecideMode,
        #[arg(long, value_enum, default_value_t = Criterion::Angle)]
        criterion: Criterion,
        /// Iterate count for the iterated criterion.
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        /// Parabolic constant for the iterated criterion.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Neumann-series certificate for the inverse norm.
    Certify {
        /// Scaling constant; derived from the sup-norm bracket when absent.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Recompute the worked examples and report one row per check.
    ReproducePaper,
}

/// Parses `RE+IMi`, `RE-IMi`, `RE`, or `IMi`.
pub fn parse_complex(text: &str) -> Result<Complex> {
    let bad = || Error::Argument(format!("cannot read \"{text}\" as RE+IMi"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return match s.parse::<f64>() {
            Ok(re) if re.is_finite() => Ok(Complex::new(re, 0.0)),
            _ => Err(bad()),
        };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex::new(re, im))
}

fn load_symbol(arg: Option<&str>) -> Result<(Symbol, String)> {
    let arg = arg.ok_or_else(|| Error::Argument("--symbol is required".into()))?;
    if arg.trim_start().starts_with('{') {
        return Ok((parse_symbol(arg)?, "inline".into()));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Argument(format!("cannot read {arg}: {e}")))?;
    Ok((parse_symbol(&text)?, arg.to_string()))
}

struct Context {
    global: GlobalArgs,
    tol: f64,
}

impl Context {
    fn grid(&self) -> Result<DiskGrid> {
        DiskGrid::chebyshev(self.global.rings, self.global.angles, Some(self.global.boundary_gap))
    }

    fn points(&self) -> Result<Vec<Complex>> {
        if self.global.z.is_empty() {
            return Err(Error::Argument("at least one --z is required".into()));
        }
        self.global.z.iter().map(|s| parse_complex(s)).collect()
    }

    fn n(&self, default: usize) -> usize {
        self.global.n.unwrap_or(default)
    }

    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec::with_tol(self.tol)
    }

    fn format(&self, default: Format) -> Format {
        self.global.format.unwrap_or(default)
    }
}

/// Resolved configuration echoed in every output.
fn config_echo(cli: &Cli, ctx: &Context, symbol_source: Option<&str>, symbol: Option<&Symbol>, format: Format) -> Value {
    json!({
        "command": cli.command,
        "symbol_source": symbol_source,
        "symbol": symbol.map(symbol_to_value),
        "z": ctx.global.z,
        "n": ctx.global.n,
        "grid": {
            "rings": ctx.global.rings,
            "angles": ctx.global.angles,
            "boundary_gap": ctx.global.boundary_gap,
        },
        "tol": ctx.tol,
        "format": format,
        "seed": ctx.global.seed,
    })
}

fn json_line(out: &mut dyn Write, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_header(out: &mut dyn Write, config: &Value, header: &str) -> Result<()> {
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(out, "{header}")?;
    Ok(())
}

fn emit(out: &mut dyn Write, config: Value, result: impl Serialize) -> Result<()> {
    json_line(out, &json!({"config": config, "result": serde_json::to_value(result)?}))
}

fn build_matrix(symbol: &Symbol, n: usize, route: MatrixRoute, spec: &QuadratureSpec) -> Result<ToeplitzTruncation> {
    match route {
        MatrixRoute::Closed => matrix_closed(symbol, n),
        MatrixRoute::Quad => matrix_quadrature(symbol, n, spec),
    }
}

fn parse_sweep(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Argument(format!("--n-sweep expects start:stop:step, got \"{text}\""));
    let parts: Vec<usize> = text.split(':').map(|p| p.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (start, stop, step) = match parts.as_slice() {
        [a, b] => (*a, *b, 1),
        [a, b, c] => (*a, *b, *c),
        _ => return Err(bad()),
    };
    if start == 0 || step == 0 || stop < start {
        return Err(bad());
    }
    Ok((start..=stop).step_by(step).collect())
}

fn boundary_of(symbol: &Symbol) -> Result<BoundaryData> {
    Ok(match symbol {
        Symbol::Harmonic(p) => BoundaryData::Trig(p.boundary_trig()),
        Symbol::Radial(g) => BoundaryData::Trig(TrigPolynomial::new(vec![(0, Complex::new(g.eval(1.0)?, 0.0))])),
        Symbol::Sampled(s) => {
            let ring = s.grid().radii().len() - 1;
            let start = s.grid().ring_offset(ring);
            let count = s.grid().angular_counts()[ring];
            BoundaryData::Samples(s.values()[start..start + count].to_vec())
        }
    })
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let float_decision = matches!(cli.command, Command::Decide { mode: DecideMode::Float, .. });
    let tol = match cli.global.tol {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::Argument(format!("--tol must be positive, got {t}"))),
        None if float_decision => 1e-9,
        None => default_tol(),
    };
    let ctx = Context { global: cli.global.clone(), tol };

    if let Command::ReproducePaper = cli.command {
        let format = ctx.format(Format::Json);
        let report = reproduce()?;
        let config = config_echo(cli, &ctx, None, None, format);
        match format {
            Format::Json => emit(out, config, &report)?,
            Format::Csv => {
                csv_header(out, &config, "id,pass,expected,computed,tolerance")?;
                for c in &report.checks {
                    let tol = c.tolerance.map(f).unwrap_or_default();
                    writeln!(out, "{},{},\"{}\",\"{}\",{}", c.id, c.pass, c.expected, c.computed, tol)?;
                }
            }
        }
        if !report.pass {
            return Err(Error::Numerical("some reproduction checks failed".into()));
        }
        return Ok(());
    }

    let (symbol, source) = load_symbol(ctx.global.symbol.as_deref())?;
    match &cli.command {
        Command::Eval => {
            let format = ctx.format(Format::Json);
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), format);
            let points = ctx.points()?;
            let values = points.iter().map(|&z| symbol.eval(z)).collect::<Result<Vec<_>>>()?;
            match format {
                Format::Json => {
                    let rows: Vec<Value> = points
                        .iter()
                        .zip(&values)
                        .map(|(z, v)| json!({"z": [z.re, z.im], "value": [v.re, v.im]}))
                        .collect();
                    emit(out, config, rows)?;
                }
                Format::Csv => {
                    csv_header(out, &config, "z_re,z_im,value_re,value_im")?;
                    for (z, v) in points.iter().zip(&values) {
                        writeln!(out, "{},{},{},{}", f(z.re), f(z.im), f(v.re), f(v.im))?;
                    }
                }
            }
        }
        Command::CheckGeometric { delta, variant, rho, epsilon, level, samples } => {
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), Format::Json);
            let grid = ctx.grid()?;
            let mode = ParabolicMode::from(*variant);
            let margin = parabolic_margin(&symbol, *delta, &grid, mode)?;
            let sufficiency = rho.map(|r| thm_sufficient_check(&symbol, r, &grid, mode)).transpose()?;
            let density = match epsilon {
                Some(eps) => {
                    let level = level.or(*rho).unwrap_or(0.5);
                    let probes = DiskGrid::chebyshev(16, 32, None)?;
                    let member = |z: Complex| symbol.eval_unchecked(z).norm() > level;
                    Some(json!({
                        "level": level,
                        "report": luecking_density(member, *eps, &probes, *samples, Some(ctx.global.seed))?,
                    }))
                }
                None => None,
            };
            emit(out, config, json!({"margin": margin, "sufficiency": sufficiency, "density": density}))?;
        }
        Command::Berezin { route } => {
            let format = ctx.format(Format::Csv);
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), format);
            let route = match route {
                RouteArg::Auto => Route::Auto,
                RouteArg::Quad => Route::Quad,
                RouteArg::Series => Route::Series,
                RouteArg::Matrix => Route::Matrix,
            };
            let spec = ctx.spec();
            let points = ctx.points()?;
            let values = points
                .iter()
                .map(|&z| berezin_at(&symbol, z, route, &spec, ctx.n(64)))
                .collect::<Result<Vec<_>>>()?;
            match format {
                Format::Csv => {
                    csv_header(out, &config, "z_re,z_im,value_re,value_im,est_error")?;
                    for (z, v) in points.iter().zip(&values) {
                        writeln!(out, "{},{},{},{},{}", f(z.re), f(z.im), f(v.value.re), f(v.value.im), f(v.est_error))?;
                    }
                }
                Format::Json => {
                    let rows: Vec<Value> = points
                        .iter()
                        .zip(&values)
                        .map(|(z, v)| json!({"z": [z.re, z.im], "value": [v.value.re, v.value.im], "est_error": v.est_error, "route": v.route}))
                        .collect();
                    emit(out, config, rows)?;
                }
            }
        }
        Command::Matrix { route } => {
            let format = ctx.format(Format::Json);
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), format);
            let n = ctx.n(16);
            let t = build_matrix(&symbol, n, *route, &ctx.spec())?;
            match format {
                Format::Json => {
                    let rows: Vec<Vec<[f64; 2]>> = (0..n)
                        .map(|i| (0..n).map(|j| [t.entries()[(i, j)].re, t.entries()[(i, j)].im]).collect())
                        .collect();
                    emit(
                        out,
                        config,
                        json!({"dim": n, "provenance": t.provenance(), "operator_norm_bound": t.operator_norm_bound(), "entries": rows}),
                    )?;
                }
                Format::Csv => {
                    csv_header(out, &config, "i,j,re,im")?;
                    for i in 0..n {
                        for j in 0..n {
                            let v = t.entries()[(i, j)];
                            writeln!(out, "{i},{j},{},{}", f(v.re), f(v.im))?;
                        }
                    }
                }
            }
        }
        Command::Svd { n_sweep, route } => {
            let format = ctx.format(Format::Csv);
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), format);
            let sizes = parse_sweep(n_sweep)?;
            let spec = ctx.spec();
            let rows = sizes
                .iter()
                .map(|&n| build_matrix(&symbol, n, *route, &spec)?.singular_extremes().map(|e| (n, e)))
                .collect::<Result<Vec<_>>>()?;
            match format {
                Format::Csv => {
                    csv_header(out, &config, "n,sigma_min,sigma_max")?;
                    for (n, (lo, hi)) in rows {
                        writeln!(out, "{n},{},{}", f(lo), f(hi))?;
                    }
                }
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .into_iter()
                        .map(|(n, (lo, hi))| json!({"n": n, "sigma_min": lo, "sigma_max": hi}))
                        .collect();
                    emit(out, config, rows)?;
                }
            }
        }
        Command::Decide { mode, criterion, iterations, delta } => {
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), Format::Json);
            let verdict = match criterion {
                Criterion::Angle => {
                    let Symbol::Harmonic(p) = &symbol else {
                        return Err(Error::Argument("the angle criterion needs a harmonic polynomial".into()));
                    };
                    let mode = match mode {
                        DecideMode::Exact => Mode::Exact,
                        DecideMode::Float => Mode::Float { tol: ctx.tol },
                    };
                    match decide_invertibility(p, mode) {
                        Err(Error::NotNormalized(msg)) => {
                            let msg = match subnormalized_note(p) {
                                Some(note) => format!("{msg} (note: {note})"),
                                None => msg,
                            };
                            return Err(Error::NotNormalized(msg));
                        }
                        other => other?,
                    }
                }
                Criterion::Boundary => boundary_criterion(&boundary_of(&symbol)?)?,
                Criterion::Fredholm => fredholm_equiv_check(&symbol, &ctx.grid()?)?,
                Criterion::Iterated => {
                    let sampled = match &symbol {
                        Symbol::Sampled(s) => s.clone(),
                        other => {
                            let grid = DiskGrid::chebyshev(ctx.global.rings.min(64), ctx.global.angles.min(128), Some(ctx.global.boundary_gap))?;
                            SampledSymbol::from_fn(grid, Interpolation::Bilinear, |z| other.eval_unchecked(z))?
                        }
                    };
                    iterated_berezin_criterion(&sampled, *iterations, *delta, &ctx.spec())?
                }
            };
            emit(out, config, verdict)?;
        }
        Command::Certify { scale } => {
            let config = config_echo(cli, &ctx, Some(&source), Some(&symbol), Format::Json);
            let grid = ctx.grid()?;
            let outcome = match scale {
                Some(s) => neumann_certificate_at(&symbol, *s, &grid)?,
                None => neumann_certificate(&symbol, &grid)?,
            };
            emit(out, config, outcome)?;
        }
        Command::ReproducePaper => unreachable!("handled above"),
    }
    Ok(())
}

/// Runs the command line `argv` (program name first), writing results to `out` and
/// diagnostics to stderr. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_facing() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}
