use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tropbn_core::chain::ensure_generic;
use tropbn_core::oracle::common_scale;
use tropbn_core::{
    abel_jacobi, canonicalize, check_genericity, compute_dj, cross_check, dj_residual,
    enumerate_cells_limited, intersect_cells_with_translates, intersect_translates,
    jacobi_invert, lambda_count, lingering_path, lingering_steps, local_theta_equations, rank, rho,
    sample_vertex_avoiding, theta_facets, ChainOfLoops, CrossCheckReport, Divisor, Error,
    Genericity, JacobianPoint, NeighborhoodSpec, OracleLimits, PicPoint, ReducedDivisor, Sampler,
    ThetaTranslate, TorusCell,
};

/// Redraws of random shifts before a degenerate configuration is reported.
const REDRAWS: usize = 16;

#[derive(Parser)]
#[command(name = "tropbn", version, about = "Special divisors on a generic chain of loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    /// Genus of the default chain (ignored when the input carries a chain).
    #[arg(long, global = true, default_value_t = 3)]
    g: usize,
    #[arg(long, global = true, default_value_t = 1)]
    r: usize,
    #[arg(long, global = true)]
    d: Option<i64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Lattice resolution `1/scale` for randomly drawn chips.
    #[arg(long, global = true, default_value_t = 1)]
    scale: u64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Cap on the number of cells enumerated.
    #[arg(long, global = true, default_value_t = 100_000)]
    limit: usize,
    /// Use bridges of length 0 in the default chain.
    #[arg(long, global = true)]
    no_bridges: bool,
    /// JSON input file, `-` for stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Emit the default chain.
    Gen,
    /// Test the chain for genericity.
    Check,
    /// Canonicalize a divisor.
    Reduce,
    /// Rank of a divisor.
    Rank,
    /// Lingering lattice path of a divisor in Z^r.
    Path,
    /// Abel–Jacobi image of a divisor.
    Aj,
    /// Reduced divisor of a Picard class.
    Invert,
    /// Maximal cells of W^r_d.
    Cells,
    /// Brill–Noether number, expected count and cell count.
    Count,
    /// Facets of a theta translate.
    ThetaFacets,
    /// Intersection of g theta translates.
    Intersect,
    /// Intersection of W^r_d with rho theta translates.
    BnIntersect,
    /// Local theta equations around a vertex avoiding class.
    LocalEqns,
    /// Representatives D_j containing E_j.
    Dj,
    /// Cross-check random divisors against the chip-firing oracle.
    Verify,
}

/// Any subset of these keys; a bare chain, reduced divisor, point or divisor
/// list is also accepted.
#[derive(Debug, Default, Deserialize)]
struct Document {
    chain: Option<ChainOfLoops>,
    divisor: Option<Divisor>,
    reduced: Option<ReducedDivisor>,
    point: Option<PointInput>,
    shifts: Option<Vec<PicPoint>>,
}

#[derive(Debug, Deserialize)]
struct PointInput {
    degree: Option<i64>,
    #[serde(flatten)]
    point: JacobianPoint,
}

fn parse_document(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text).context("input is not valid JSON")?;
    let has = |k: &str| value.as_object().is_some_and(|o| o.contains_key(k));
    let doc = if has("ell") {
        Document {
            chain: Some(serde_json::from_value(value)?),
            ..Document::default()
        }
    } else if has("d0") {
        Document {
            reduced: Some(serde_json::from_value(value)?),
            ..Document::default()
        }
    } else if has("coords") {
        Document {
            point: Some(serde_json::from_value(value)?),
            ..Document::default()
        }
    } else if value.is_array() {
        Document {
            divisor: Some(serde_json::from_value(value)?),
            ..Document::default()
        }
    } else {
        serde_json::from_value(value)?
    };
    Ok(doc)
}

fn read_input(path: &Option<PathBuf>) -> Result<Document> {
    let Some(path) = path else {
        return Ok(Document::default());
    };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_document(&text)
}

fn missing(what: &str) -> anyhow::Error {
    Error::Precondition(what.to_string()).into()
}

struct Ctx {
    opts: Opts,
    doc: Document,
    chain: ChainOfLoops,
}

impl Ctx {
    fn g(&self) -> usize {
        self.chain.genus()
    }

    fn d(&self) -> Result<i64> {
        self.opts.d.ok_or_else(|| missing("--d is required"))
    }

    fn sampler(&self) -> Sampler {
        Sampler::new(self.opts.seed)
    }

    /// Supplied divisor or reduced divisor, else a random lattice divisor of
    /// degree `--d` (default `g`).
    fn divisor(&self) -> Result<(Option<Divisor>, ReducedDivisor)> {
        if let Some(rd) = &self.doc.reduced {
            rd.validate(&self.chain)?;
            return Ok((None, rd.clone()));
        }
        let divisor = match &self.doc.divisor {
            Some(d) => d.clone(),
            None => {
                let needed = common_scale(&self.chain, &Divisor::default())?;
                if self.opts.scale == 0 || !self.opts.scale.is_multiple_of(needed) {
                    return Err(missing(&format!(
                        "no divisor supplied and chain lengths are not multiples of 1/{}",
                        self.opts.scale
                    )));
                }
                let degree = self.opts.d.unwrap_or(self.g() as i64);
                let mut s = self.sampler();
                let chips = s.below(self.g() + 2);
                s.lattice_divisor(&self.chain, self.opts.scale, degree, chips)
            }
        };
        let reduced = canonicalize(&self.chain, &divisor)?;
        Ok((Some(divisor), reduced))
    }

    fn cells(&self, r: usize, d: i64) -> Result<Vec<TorusCell>> {
        Ok(enumerate_cells_limited(&self.chain, r, d, self.opts.limit)?)
    }

    /// Supplied divisor, else a random vertex avoiding class of rank `--r`
    /// and degree `--d`.
    fn vertex_avoiding(&self) -> Result<ReducedDivisor> {
        if self.doc.reduced.is_some() || self.doc.divisor.is_some() {
            return Ok(self.divisor()?.1);
        }
        let (r, d) = (self.opts.r, self.d()?);
        let cells = self.cells(r, d)?;
        Ok(sample_vertex_avoiding(&self.chain, &cells, r, &mut self.sampler())?)
    }
}

#[derive(Serialize)]
struct VerifyEntry {
    divisor: Divisor,
    #[serde(flatten)]
    report: CrossCheckReport,
}

/// Retries `attempt` while it reports a degenerate configuration, unless the
/// shifts were supplied by the caller.
fn with_redraws<T>(
    supplied: bool,
    mut attempt: impl FnMut() -> tropbn_core::Result<T>,
) -> tropbn_core::Result<T> {
    let tries = if supplied { 1 } else { REDRAWS };
    let mut last = None;
    for _ in 0..tries {
        match attempt() {
            Err(e @ Error::Degenerate(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

fn run(cmd: Command, ctx: &Ctx) -> Result<(Value, bool)> {
    let chain = &ctx.chain;
    let g = ctx.g();
    let r = ctx.opts.r;
    let out = match cmd {
        Command::Gen => serde_json::to_value(chain)?,
        Command::Check => {
            let generic = check_genericity(chain);
            let witness = match &generic {
                Genericity::Generic => Value::Null,
                Genericity::Witness { loop_index, a, b } => {
                    json!({ "loop": loop_index, "ratio": format!("{a}/{b}") })
                }
            };
            let value = json!({ "chain": chain, "generic": generic.is_generic(), "witness": witness });
            return Ok((value, generic.is_generic()));
        }
        Command::Reduce => {
            let (divisor, reduced) = ctx.divisor()?;
            json!({ "chain": chain, "divisor": divisor, "reduced": reduced })
        }
        Command::Rank => {
            ensure_generic(chain)?;
            let (_, reduced) = ctx.divisor()?;
            let rank = rank(chain, &reduced)?;
            json!({ "chain": chain, "reduced": reduced, "rank": rank })
        }
        Command::Path => {
            ensure_generic(chain)?;
            let (_, reduced) = ctx.divisor()?;
            let path = lingering_path(chain, &reduced, r)?;
            json!({
                "chain": chain,
                "reduced": reduced,
                "path": path,
                "lingering": lingering_steps(&path),
                "in_chamber": path.stays_in_chamber(),
            })
        }
        Command::Aj => {
            let (_, reduced) = ctx.divisor()?;
            let image = abel_jacobi(chain, &reduced);
            json!({ "chain": chain, "reduced": reduced, "point": image })
        }
        Command::Invert => {
            let input = ctx.doc.point.as_ref().ok_or_else(|| missing("no point in input"))?;
            let degree = match (input.degree, ctx.opts.d) {
                (Some(d), _) | (None, Some(d)) => d,
                (None, None) => return Err(missing("point has no degree and --d is absent")),
            };
            let point = JacobianPoint::new(chain, input.point.coords.clone())?;
            let reduced = jacobi_invert(chain, &point, degree);
            json!({ "chain": chain, "point": PicPoint::new(degree, point), "reduced": reduced })
        }
        Command::Cells => {
            ensure_generic(chain)?;
            let d = ctx.d()?;
            let cells = ctx.cells(r, d)?;
            json!({ "chain": chain, "r": r, "d": d, "rho": rho(g, r, d), "cells": cells })
        }
        Command::Count => {
            ensure_generic(chain)?;
            let d = ctx.d()?;
            let rho = rho(g, r, d);
            let lambda = if rho == 0 {
                let n = lambda_count(g, r, d)?;
                i64::try_from(&n).map_or_else(|_| json!(n.to_string()), |n| json!(n))
            } else {
                Value::Null
            };
            let cells = ctx.cells(r, d)?.len();
            json!({ "rho": rho, "lambda": lambda, "cells": cells })
        }
        Command::ThetaFacets => {
            ensure_generic(chain)?;
            let shift = match ctx.doc.shifts.as_deref() {
                Some([s, ..]) => s.clone(),
                _ => PicPoint::new(0, JacobianPoint::zero(g)),
            };
            let translate = ThetaTranslate::from_shift(shift.clone());
            let facets = theta_facets(chain, &translate)?;
            json!({ "chain": chain, "shift": shift, "facets": facets.facets })
        }
        Command::Intersect => {
            ensure_generic(chain)?;
            let supplied = ctx.doc.shifts.clone();
            if let Some(s) = &supplied {
                if s.len() != g {
                    return Err(missing(&format!("expected {g} shifts, found {}", s.len())));
                }
            }
            let mut sampler = ctx.sampler();
            let mut shifts = Vec::new();
            let points = with_redraws(supplied.is_some(), || {
                shifts = supplied.clone().unwrap_or_else(|| sampler.generic_shifts(chain, g, 0));
                let translates: Vec<_> = shifts.iter().cloned().map(ThetaTranslate::from_shift).collect();
                intersect_translates(chain, &translates)
            })?;
            json!({ "chain": chain, "shifts": shifts, "points": points })
        }
        Command::BnIntersect => {
            ensure_generic(chain)?;
            let d = ctx.d()?;
            let rho = rho(g, r, d);
            if rho < 0 {
                return Err(missing(&format!("rho = {rho} is negative")));
            }
            let cells = ctx.cells(r, d)?;
            let supplied = ctx.doc.shifts.clone();
            let mut sampler = ctx.sampler();
            let mut shifts = Vec::new();
            let points = with_redraws(supplied.is_some(), || {
                shifts = supplied
                    .clone()
                    .unwrap_or_else(|| sampler.generic_shifts(chain, rho as usize, d - g as i64 + 1));
                let translates: Vec<_> = shifts.iter().cloned().map(ThetaTranslate::from_shift).collect();
                intersect_cells_with_translates(chain, &cells, &translates)
            })?;
            json!({ "chain": chain, "r": r, "d": d, "rho": rho, "shifts": shifts, "points": points })
        }
        Command::LocalEqns => {
            ensure_generic(chain)?;
            let reduced = ctx.vertex_avoiding()?;
            let spec = NeighborhoodSpec::for_divisor(chain, &reduced, r)?;
            let equations = local_theta_equations(chain, &reduced, r, &spec)?;
            let shifts = equations
                .iter()
                .map(|e| Ok(e.translate(chain)?.shift))
                .collect::<Result<Vec<_>>>()?;
            let equations: Vec<Value> = equations
                .iter()
                .zip(shifts)
                .map(|(e, shift)| {
                    json!({
                        "direction": e.direction,
                        "step": e.step,
                        "e": e.e,
                        "e_prime": e.e_prime,
                        "shift": shift,
                    })
                })
                .collect();
            json!({
                "chain": chain,
                "reduced": reduced,
                "r": r,
                "neighborhood": spec,
                "equations": equations,
            })
        }
        Command::Dj => {
            ensure_generic(chain)?;
            let reduced = ctx.vertex_avoiding()?;
            let reps = (0..=r)
                .map(|j| {
                    Ok(json!({
                        "j": j,
                        "divisor": compute_dj(chain, &reduced, r, j)?,
                        "residual": dj_residual(chain, &reduced, r, j)?,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "chain": chain, "reduced": reduced, "r": r, "representatives": reps })
        }
        Command::Verify => {
            let limits = OracleLimits::default();
            let mut sampler = ctx.sampler();
            let mut entries = Vec::with_capacity(ctx.opts.trials);
            for _ in 0..ctx.opts.trials {
                let degree = sampler.int_in(-1, 2 * g as i64);
                let chips = sampler.below(g + 2);
                let divisor = sampler.lattice_divisor(chain, ctx.opts.scale, degree, chips);
                let report = cross_check(chain, &divisor, &limits)?;
                entries.push(VerifyEntry { divisor, report });
            }
            let agreements = entries.iter().filter(|e| e.report.agrees()).count();
            let ok = agreements == entries.len();
            let value = json!({
                "chain": chain,
                "seed": ctx.opts.seed,
                "trials": entries.len(),
                "agreements": agreements,
                "reports": entries,
            });
            return Ok((value, ok));
        }
    };
    Ok((out, true))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return if e.is_input_error() { 2 } else { 1 };
    }
    if err.is::<serde_json::Error>() || err.is::<std::io::Error>() {
        return 2;
    }
    1
}

fn execute(cli: Cli) -> Result<(Value, bool)> {
    let doc = read_input(&cli.opts.input)?;
    if cli.opts.g == 0 && doc.chain.is_none() {
        return Err(missing("--g must be positive"));
    }
    let chain = match &doc.chain {
        Some(c) => c.clone(),
        None => ChainOfLoops::standard(cli.opts.g, if cli.opts.no_bridges { 0 } else { 1 }),
    };
    let ctx = Ctx {
        opts: cli.opts,
        doc,
        chain,
    };
    run(cli.command, &ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command;
    match execute(cli) {
        Ok((value, ok)) => {
            let mut stdout = std::io::stdout().lock();
            let written = serde_json::to_writer_pretty(&mut stdout, &value)
                .map_err(anyhow::Error::from)
                .and_then(|_| Ok(writeln!(stdout)?));
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            match (ok, command) {
                (true, _) => ExitCode::SUCCESS,
                (false, Command::Check) => {
                    eprintln!("chain is not generic");
                    ExitCode::from(2)
                }
                (false, _) => {
                    eprintln!("oracle disagreement");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
