//! `transversal-lab`: generate near-ball families, search for transversals
//! and independent subfamilies, check the cone estimates, and verify or draw
//! the resulting certificates.
//!
//! Exit codes: 0 success, 1 invalid input, 2 undecided, 3 internal assertion.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use transversal_core::constructions::random::{random_family, RandomFamilySpec};
use transversal_core::constructions::{
    counterexample_discs, counterexample_discs_closed, inner_tangent_wedge,
    segments_family_with_resolution, sharpness_family2, ConstructionError, CHAIN_RESOLUTION,
};
use transversal_core::geometry::{Cone, GeometryError};
use transversal_core::independence::{
    central_project_family, greedy_independent_subsequence, is_k_independent,
    orthogonal_project_family, verify_claim_cone, verify_claim_ktok, verify_claim_wide_cone,
    ClaimReport, ConeClaimParams, Independence, IndependenceError, IndependenceOptions, KtoKParams,
    WideConeParams,
};
use transversal_core::io::{
    render_svg, verify_certificate, CertificateDocument, FamilyDocument, FlatDoc,
    IndependencePayload, IoError, Payload, ReportPayload, SolverProvenance, SvgOptions,
    TransversalPayload,
};
use transversal_core::nearball::{
    check_weak_condition_r, nearball_constant, Family, NearBallError,
};
use transversal_core::solver::{pierce_with_m_flats, PierceOutcome, SolveError, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Caps the worker pool when set.
pub const THREADS_ENV: &str = "TRANSVERSAL_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "transversal-lab",
    version,
    about = "Transversals and independence for families of near-balls"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 16)]
    restarts: usize,
    /// Feasibility tolerance.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Write the document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a family document.
    #[command(subcommand)]
    Gen(Gen),
    /// Report the near-ball constant and, optionally, the weak-condition table.
    CheckNearball {
        input: Option<PathBuf>,
        /// Grid of inscribed radii for the weak-condition table.
        #[arg(long, value_delimiter = ',')]
        r_grid: Vec<f64>,
    },
    /// Pierce the family with at most `m` k-flats.
    Pierce {
        input: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Certify k-independence, or grow a greedy independent subsequence.
    Independent {
        input: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 1e-4)]
        tol_indep: f64,
    },
    /// Either `budget` k-flats pierce the family or an independent
    /// subfamily of size `target` exists; UNDECIDED when neither is found.
    Dichotomy {
        input: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        budget: usize,
        /// Defaults to `(k + 1) * budget + 1`, which rules the budget out.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 1e-4)]
        tol_indep: f64,
    },
    /// Monte-Carlo checks of the cone estimates.
    #[command(subcommand)]
    VerifyClaims(Claim),
    /// Project a family one dimension down.
    #[command(subcommand)]
    Project(Projection),
    /// Re-check a certificate against a family without solving.
    Verify { family: PathBuf, cert: PathBuf },
    /// Draw a planar family as SVG.
    Render {
        input: Option<PathBuf>,
        /// Transversal certificate whose flats are drawn.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Inner tangent wedge of members `i,j`; repeatable.
        #[arg(long = "wedge", value_parser = parse_pair)]
        wedges: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Discs tangent to the x-axis shrinking towards infinity.
    Discs {
        #[arg(long)]
        n: usize,
        /// Closed discs instead of open ones.
        #[arg(long)]
        closed: bool,
    },
    /// Ball chains along random chords.
    Segments {
        #[arg(long)]
        n: usize,
        /// Chain ball radius relative to segment length.
        #[arg(long, default_value_t = CHAIN_RESOLUTION)]
        resolution: f64,
    },
    /// Growing cores with an attached chord chain.
    Family2 {
        #[arg(long)]
        n: usize,
    },
    /// Random near-balls with bounded constant.
    Random {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        members: usize,
        #[arg(long, default_value_t = 2)]
        max_extra: usize,
        #[arg(long = "K", default_value_t = 3.0)]
        k_bound: f64,
        #[arg(long, default_value_t = 5.0)]
        spread: f64,
        #[arg(long, default_value_t = 0.1)]
        r_min: f64,
        #[arg(long, default_value_t = 1.0)]
        r_max: f64,
        #[arg(long)]
        open: bool,
    },
}

#[derive(Subcommand, Debug)]
enum Claim {
    /// Inflated near-balls stay in the shrunken cone.
    Cone {
        #[arg(long = "K")]
        k_const: f64,
        #[arg(long = "D")]
        d_inflate: f64,
        #[arg(long)]
        eps1: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Values above 1 break the premise (negative control).
        #[arg(long, default_value_t = 1.0)]
        premise_scale: f64,
    },
    /// Escribed balls of near-balls in a narrow cone stay in the π/4 cone.
    WideCone {
        #[arg(long = "K")]
        k_const: f64,
        /// Defaults to 0.9·(π/4)/(1+πK/2).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Central projection inflates the constant by at most √2.
    Ktok {
        #[arg(long = "K")]
        k_const: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Projection {
    /// Drop the last coordinate.
    Orthogonal { input: Option<PathBuf> },
    /// Project through the origin onto the tangent hyperplane at `axis`.
    Central {
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        axis: Vec<f64>,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        aperture: f64,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected i,j")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Internal(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<NearBallError> for Failure {
    fn from(e: NearBallError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::InvariantViolated(_) => Failure::Internal(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<IndependenceError> for Failure {
    fn from(e: IndependenceError) -> Self {
        match e {
            IndependenceError::Assertion(_) | IndependenceError::CounterexampleFound(_) => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

struct Ctx<'a> {
    common: Common,
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn read(&mut self, path: Option<&Path>) -> Result<String, Failure> {
        match path {
            Some(p) if p != Path::new("-") => Ok(fs::read_to_string(p)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?),
            _ => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s)?;
                Ok(s)
            }
        }
    }

    fn family(&mut self, path: Option<&Path>) -> Result<Family<f64>, Failure> {
        let text = self.read(path)?;
        Ok(FamilyDocument::from_json(&text)?.to_family()?)
    }

    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        match &self.common.out {
            Some(p) => fs::write(p, text)?,
            None => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        let opts = SolveOptions {
            restarts: self.common.restarts,
            tol_feas: self.common.tol,
            seed: self.common.seed,
            ..SolveOptions::default()
        };
        opts.validate()?;
        Ok(opts)
    }

    fn independence_options(&self, tol_indep: f64) -> Result<IndependenceOptions, Failure> {
        let opts = IndependenceOptions {
            solver: self.solve_options()?,
            tol_indep,
        };
        opts.validate()?;
        Ok(opts)
    }

    fn emit_family(&mut self, f: &Family<f64>, metadata: Value) -> Result<i32, Failure> {
        let meta: BTreeMap<String, Value> = match metadata {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        let doc = FamilyDocument::from_family(f, meta);
        self.emit(&doc.to_json())?;
        Ok(EXIT_OK)
    }

    fn emit_report(
        &mut self,
        name: &str,
        outcome: &str,
        data: Value,
        prov: SolverProvenance,
    ) -> Result<(), Failure> {
        let doc = CertificateDocument::new(
            Payload::Report(ReportPayload {
                name: name.into(),
                outcome: outcome.into(),
                data,
            }),
            prov,
        );
        self.emit(&doc.to_json())
    }
}

/// Parses `argv` (program name first) and runs one subcommand.
pub fn run<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_INVALID;
    }
    let mut ctx = Ctx {
        common: cli.common,
        stdin,
        stdout,
    };
    let result = catch_unwind(AssertUnwindSafe(|| dispatch(&mut ctx, cli.cmd)));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Invalid(msg))) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID
        }
        Ok(Err(Failure::Internal(msg))) => {
            let _ = writeln!(stderr, "internal assertion: {msg}");
            EXIT_INTERNAL
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            let _ = writeln!(stderr, "internal assertion: {}", msg.unwrap_or_default());
            EXIT_INTERNAL
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
    // Only the first call in a process can size the global pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(ctx: &mut Ctx<'_>, cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Gen(g) => generate(ctx, g),
        Command::CheckNearball { input, r_grid } => check_nearball(ctx, input.as_deref(), &r_grid),
        Command::Pierce { input, k, m } => pierce(ctx, input.as_deref(), k, m),
        Command::Independent {
            input,
            k,
            target,
            tol_indep,
        } => independent(ctx, input.as_deref(), k, target, tol_indep),
        Command::Dichotomy {
            input,
            k,
            budget,
            target,
            tol_indep,
        } => dichotomy(ctx, input.as_deref(), k, budget, target, tol_indep),
        Command::VerifyClaims(c) => claims(ctx, c),
        Command::Project(p) => project(ctx, p),
        Command::Verify { family, cert } => verify(ctx, &family, &cert),
        Command::Render {
            input,
            cert,
            wedges,
            size,
        } => render(ctx, input.as_deref(), cert.as_deref(), &wedges, size),
    }
}

fn generate(ctx: &mut Ctx<'_>, g: Gen) -> Result<i32, Failure> {
    let seed = ctx.common.seed;
    let (f, meta) = match g {
        Gen::Discs { n, closed } => {
            let f = if closed {
                counterexample_discs_closed(n)?
            } else {
                counterexample_discs(n)?
            };
            (f, json!({ "generator": "discs", "n": n, "closed": closed }))
        }
        Gen::Segments { n, resolution } => (
            segments_family_with_resolution(n, seed, resolution)?,
            json!({ "generator": "segments", "n": n, "resolution": resolution, "seed": seed }),
        ),
        Gen::Family2 { n } => (
            sharpness_family2(n, seed)?,
            json!({ "generator": "family2", "n": n, "seed": seed }),
        ),
        Gen::Random {
            dim,
            members,
            max_extra,
            k_bound,
            spread,
            r_min,
            r_max,
            open,
        } => {
            if !(r_min > 0.0 && r_max >= r_min) {
                return Err(Failure::Invalid("need 0 < r-min <= r-max".into()));
            }
            let spec = RandomFamilySpec {
                dim,
                members,
                max_extra,
                k_bound,
                spread,
                r_range: (r_min, r_max),
                open,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                random_family(&spec, &mut rng)?,
                json!({ "generator": "random", "dim": dim, "members": members, "K": k_bound, "seed": seed }),
            )
        }
    };
    ctx.emit_family(&f, meta)
}

fn check_nearball(ctx: &mut Ctx<'_>, input: Option<&Path>, r_grid: &[f64]) -> Result<i32, Failure> {
    let f = ctx.family(input)?;
    let c = nearball_constant(&f);
    let members: Vec<Value> = c
        .per_member
        .iter()
        .map(|m| json!({ "ratio": m.ratio, "additive": m.additive, "least_k": m.least_k() }))
        .collect();
    let table: Vec<Value> = check_weak_condition_r(&f, r_grid)
        .into_iter()
        .map(|(r, s)| json!({ "r": r, "sup_r_esc": s }))
        .collect();
    let data = json!({ "K": c.k, "members": members, "weak_condition": table });
    let prov = SolverProvenance::of(&ctx.solve_options()?, None, true);
    ctx.emit_report("check-nearball", "OK", data, prov)?;
    Ok(EXIT_OK)
}

fn pierce(ctx: &mut Ctx<'_>, input: Option<&Path>, k: usize, m: usize) -> Result<i32, Failure> {
    let f = ctx.family(input)?;
    let opts = ctx.solve_options()?;
    match pierce_with_m_flats(&f, k, m, &opts)? {
        PierceOutcome::Certificate { certificate, .. } => {
            let doc = CertificateDocument::new(
                Payload::Transversal(TransversalPayload::of(k, &certificate)),
                SolverProvenance::of(&opts, None, true),
            );
            ctx.emit(&doc.to_json())?;
            Ok(EXIT_OK)
        }
        PierceOutcome::Fail {
            best,
            certified,
            exhaustive,
        } => {
            let outcome = if certified { "FAIL" } else { "UNDECIDED" };
            let data = json!({ "k": k, "m": m, "best_value": best, "exhaustive": exhaustive });
            ctx.emit_report(
                "pierce",
                outcome,
                data,
                SolverProvenance::of(&opts, None, certified),
            )?;
            Ok(if certified { EXIT_OK } else { EXIT_UNDECIDED })
        }
    }
}

fn witness_doc(
    w: &transversal_core::independence::IndependenceWitness,
    opts: &IndependenceOptions,
) -> CertificateDocument {
    CertificateDocument::new(
        Payload::Independence(IndependencePayload::of(w)),
        SolverProvenance::of(&opts.solver, Some(opts.tol_indep), w.certified()),
    )
}

fn independent(
    ctx: &mut Ctx<'_>,
    input: Option<&Path>,
    k: usize,
    target: Option<usize>,
    tol_indep: f64,
) -> Result<i32, Failure> {
    let f = ctx.family(input)?;
    let opts = ctx.independence_options(tol_indep)?;
    let prov = SolverProvenance::of(&opts.solver, Some(tol_indep), false);
    if let Some(target) = target {
        return match greedy_independent_subsequence(&f, k, target, &opts) {
            Ok(w) => {
                ctx.emit(&witness_doc(&w, &opts).to_json())?;
                Ok(EXIT_OK)
            }
            Err(IndependenceError::SequenceExhausted { accepted, witness }) => {
                let data = json!({
                    "k": k,
                    "target": target,
                    "length": accepted.len(),
                    "accepted": accepted,
                    "witness": serde_json::to_value(IndependencePayload::of(&witness)).expect("serializable"),
                });
                ctx.emit_report("independent", "SEQUENCE_EXHAUSTED", data, prov)?;
                Ok(EXIT_OK)
            }
            Err(e) => Err(e.into()),
        };
    }
    match is_k_independent(&f, k, &opts)? {
        Independence::Witness(w) => {
            ctx.emit(&witness_doc(&w, &opts).to_json())?;
            Ok(EXIT_OK)
        }
        Independence::Violation { subset, flat } => {
            let data = json!({ "k": k, "subset": subset, "flat": serde_json::to_value(FlatDoc::of(&flat)).expect("serializable") });
            ctx.emit_report("independent", "VIOLATION", data, prov)?;
            Ok(EXIT_OK)
        }
        Independence::Inconclusive { subset, best_value } => {
            ctx.emit_report(
                "independent",
                "UNDECIDED",
                json!({ "k": k, "subset": subset, "best_value": best_value }),
                prov,
            )?;
            Ok(EXIT_UNDECIDED)
        }
    }
}

fn dichotomy(
    ctx: &mut Ctx<'_>,
    input: Option<&Path>,
    k: usize,
    budget: usize,
    target: Option<usize>,
    tol_indep: f64,
) -> Result<i32, Failure> {
    if budget == 0 {
        return Err(Failure::Invalid("budget must be positive".into()));
    }
    let f = ctx.family(input)?;
    let opts = ctx.independence_options(tol_indep)?;
    let pierced = pierce_with_m_flats(&f, k, budget, &opts.solver)?;
    if let Some(cert) = pierced.certificate() {
        let doc = CertificateDocument::new(
            Payload::Transversal(TransversalPayload::of(k, cert)),
            SolverProvenance::of(&opts.solver, None, true),
        );
        ctx.emit(&doc.to_json())?;
        return Ok(EXIT_OK);
    }
    let target = target.unwrap_or((k + 1) * budget + 1);
    match greedy_independent_subsequence(&f, k, target, &opts) {
        Ok(w) => {
            ctx.emit(&witness_doc(&w, &opts).to_json())?;
            Ok(EXIT_OK)
        }
        Err(IndependenceError::SequenceExhausted { accepted, .. }) => {
            let (best, certified) = match pierced {
                PierceOutcome::Fail {
                    best, certified, ..
                } => (best, certified),
                PierceOutcome::Certificate { .. } => unreachable!(),
            };
            let data = json!({
                "k": k,
                "budget": budget,
                "target": target,
                "pierce_best_value": best,
                "pierce_fail_certified": certified,
                "independent_length": accepted.len(),
                "accepted": accepted,
            });
            ctx.emit_report(
                "dichotomy",
                "UNDECIDED",
                data,
                SolverProvenance::of(&opts.solver, Some(tol_indep), false),
            )?;
            Ok(EXIT_UNDECIDED)
        }
        Err(e) => Err(e.into()),
    }
}

fn claim_report(
    ctx: &mut Ctx<'_>,
    name: &str,
    params: Value,
    r: Result<ClaimReport, IndependenceError>,
) -> Result<i32, Failure> {
    let r = r?;
    let outcome = if r.violations == 0 {
        "PASS"
    } else {
        "VIOLATIONS"
    };
    let data =
        json!({ "params": params, "report": serde_json::to_value(&r).expect("serializable") });
    let prov = SolverProvenance::of(&ctx.solve_options()?, None, false);
    ctx.emit_report(name, outcome, data, prov)?;
    Ok(EXIT_OK)
}

fn claims(ctx: &mut Ctx<'_>, c: Claim) -> Result<i32, Failure> {
    let seed = ctx.common.seed;
    match c {
        Claim::Cone {
            k_const,
            d_inflate,
            eps1,
            trials,
            premise_scale,
        } => {
            let p = ConeClaimParams {
                premise_scale,
                ..ConeClaimParams::new(k_const, d_inflate, eps1, trials, seed)
            };
            let params = json!({ "K": k_const, "D": d_inflate, "eps1": eps1, "eps_prime": p.eps_prime(), "trials": trials, "seed": seed, "premise_scale": premise_scale });
            claim_report(ctx, "claim-cone", params, verify_claim_cone(&p))
        }
        Claim::WideCone {
            k_const,
            alpha,
            trials,
        } => {
            let alpha = alpha.unwrap_or(
                0.9 * std::f64::consts::FRAC_PI_4 / (1.0 + std::f64::consts::FRAC_PI_2 * k_const),
            );
            let p = WideConeParams::new(k_const, alpha, trials, seed);
            let params = json!({ "K": k_const, "alpha": alpha, "aperture_bound": p.aperture_bound(), "trials": trials, "seed": seed });
            claim_report(ctx, "claim-wide-cone", params, verify_claim_wide_cone(&p))
        }
        Claim::Ktok { k_const, trials } => {
            let p = KtoKParams::new(k_const, trials, seed);
            let params = json!({ "K": k_const, "trials": trials, "seed": seed });
            claim_report(ctx, "claim-ktok", params, verify_claim_ktok(&p))
        }
    }
}

fn project(ctx: &mut Ctx<'_>, p: Projection) -> Result<i32, Failure> {
    match p {
        Projection::Orthogonal { input } => {
            let f = ctx.family(input.as_deref())?;
            let g = orthogonal_project_family(&f)?;
            ctx.emit_family(
                &g,
                json!({ "projection": "orthogonal", "source_dim": f.dim() }),
            )
        }
        Projection::Central {
            input,
            axis,
            aperture,
        } => {
            let f = ctx.family(input.as_deref())?;
            if axis.len() != f.dim() {
                return Err(Failure::Invalid(format!(
                    "axis has {} coordinates, family lives in dimension {}",
                    axis.len(),
                    f.dim()
                )));
            }
            let cone = Cone::new(axis.clone(), aperture)?;
            let g = central_project_family(&f, &cone)?;
            ctx.emit_family(
                &g,
                json!({ "projection": "central", "axis": axis, "aperture": aperture }),
            )
        }
    }
}

fn verify(ctx: &mut Ctx<'_>, family: &Path, cert: &Path) -> Result<i32, Failure> {
    let fam = FamilyDocument::from_json(&ctx.read(Some(family))?)?;
    let c = CertificateDocument::from_json(&ctx.read(Some(cert))?)?;
    let valid = verify_certificate(&fam, &c)?;
    let data = json!({ "kind": c.kind(), "valid": valid });
    ctx.emit(&(serde_json::to_string_pretty(&data).expect("serializable") + "\n"))?;
    Ok(if valid { EXIT_OK } else { EXIT_INVALID })
}

fn render(
    ctx: &mut Ctx<'_>,
    input: Option<&Path>,
    cert: Option<&Path>,
    pairs: &[(usize, usize)],
    size: f64,
) -> Result<i32, Failure> {
    let doc = FamilyDocument::from_json(&ctx.read(input)?)?;
    let f = doc.to_family()?;
    let cert = match cert {
        Some(p) => Some(CertificateDocument::from_json(&ctx.read(Some(p))?)?),
        None => None,
    };
    let mut wedges = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        if i >= f.len() || j >= f.len() || i == j {
            return Err(Failure::Invalid(format!("no wedge for members {i},{j}")));
        }
        wedges.push(inner_tangent_wedge(
            f.members()[i].core(),
            f.members()[j].core(),
        )?);
    }
    if !(size > 0.0) {
        return Err(Failure::Invalid("size must be positive".into()));
    }
    let svg = render_svg(
        &doc,
        cert.as_ref(),
        &wedges,
        &SvgOptions {
            size,
            ..SvgOptions::default()
        },
    )?;
    ctx.emit(&svg)?;
    Ok(EXIT_OK)
}
