mod cache;
mod jobs;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use selorder::building::{chamber_vertices, type_distance_detail, ApartmentFrame, LatticeClass};
use selorder::classgroup::{PrimeOfK, QuadForm};
use selorder::genus::{
    choose_generators, genus_group, parametrization, rho, standard_frames, DeviationData,
    GenusElement, GenusGroup, DEFAULT_GENERATOR_BOUND,
};
use selorder::relext::{disc_poly, splitting_shape, OkElement, SplitShape};
use selorder::selectivity::{
    admits_order, selectivity_verdict, AlgebraSpec, Containment, Decision, Outcome, Sample,
    SamplingOptions, SelectivityVerdict, DEFAULT_SAMPLE_BOUND, DEFAULT_STABILIZATION,
};
use selorder::{Error, LocalMatrix};

use cache::ClassGroups;
use jobs::int;

#[derive(Debug, Parser)]
#[command(
    name = "selorder",
    version,
    about = "Exact computations with maximal orders and selective orders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Number of rational primes to sample (overrides the job file).
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Consecutive unchanged samples required to accept class field containment.
    #[arg(long, global = true)]
    stabilization: Option<usize>,
    /// Compute class groups from scratch without reading or writing the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Include the full sampling trace.
    #[arg(long, global = true)]
    certificates: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type distance between two lattice classes.
    Td { input: PathBuf },
    /// Vertices of the chamber of an apartment frame.
    Chamber { input: PathBuf },
    /// Class group of an imaginary quadratic field.
    Classgroup { input: PathBuf },
    /// Splitting shape of a prime of K in L.
    Split { input: PathBuf },
    /// Distance between two maximal orders given by local deviations.
    Rho { input: PathBuf },
    /// Selectivity verdict for a commutative order.
    Verdict { input: PathBuf },
    /// The p^m maximal orders D^γ of the genus.
    Parametrize { input: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Math(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Math(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

struct Report {
    outcome: Value,
    certificates: Value,
    indeterminate: bool,
}

impl Report {
    fn done(outcome: Value) -> Self {
        Report {
            outcome,
            certificates: Value::Array(Vec::new()),
            indeterminate: false,
        }
    }
}

struct Ctx {
    groups: ClassGroups,
    bound: Option<usize>,
    stabilization: Option<usize>,
    trace: bool,
}

fn read_input(path: &PathBuf) -> Result<Value, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed JSON: {e}")))
}

fn parse<T: DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("invalid job: {e}")))
}

fn matrix_json(m: &LocalMatrix) -> Value {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect()
}

fn form_json(f: &QuadForm) -> Value {
    json!([f.a.to_string(), f.b.to_string(), f.c.to_string()])
}

fn ok_json(x: &OkElement) -> Value {
    json!([x.u.to_string(), x.v.to_string()])
}

fn prime_json(nu: &PrimeOfK) -> Value {
    json!({
        "ell": nu.ell().to_string(),
        "which": nu.which(),
        "kind": nu.kind().to_string(),
        "class": nu.class().map(form_json),
    })
}

fn shape_json(s: &SplitShape) -> Value {
    json!({ "degrees": s.degrees, "repeated": s.repeated })
}

fn element_json(g: &GenusElement) -> Value {
    json!({ "coords": g.coords, "rep": form_json(&g.rep) })
}

fn sample_json(s: &Sample) -> Value {
    json!({
        "prime": prime_json(&s.prime),
        "shape": shape_json(&s.shape),
        "class": s.class.as_ref().map(element_json),
    })
}

fn decision_json(d: &Decision) -> Value {
    match d {
        Decision::Yes => json!("yes"),
        Decision::No => json!("no"),
        Decision::Indeterminate(r) => json!({ "indeterminate": r }),
    }
}

fn genus_json(g: &GenusGroup) -> Value {
    json!({
        "d": g.discriminant().to_string(),
        "p": g.p().to_string(),
        "ram": g.ram().iter().map(prime_json).collect::<Vec<_>>(),
        "order": g.order().to_string(),
        "rank": g.rank(),
    })
}

fn deviation_json(dev: &DeviationData) -> Value {
    dev.iter()
        .map(|(nu, l)| json!({ "prime": prime_json(nu), "lattice": matrix_json(l.canonical()) }))
        .collect()
}

fn run_td(job: &Value) -> Result<Report, CliError> {
    let job: jobs::TdJob = parse(job)?;
    let p: u64 = int(&job.prime, "prime")?;
    let l1 = LatticeClass::new(jobs::matrix(&job.l1, p, "l1")?)?;
    let l2 = LatticeClass::new(jobs::matrix(&job.l2, p, "l2")?)?;
    let (td, inv) = type_distance_detail(&l1, &l2)?;
    Ok(Report::done(json!({
        "td": td,
        "invariants": inv,
        "l1": matrix_json(l1.canonical()),
        "l2": matrix_json(l2.canonical()),
    })))
}

fn run_chamber(job: &Value) -> Result<Report, CliError> {
    let job: jobs::ChamberJob = parse(job)?;
    let p: u64 = int(&job.prime, "prime")?;
    let frame = ApartmentFrame::new(jobs::matrix(&job.frame, p, "frame")?)?;
    let vertices = chamber_vertices(&frame)?;
    let mut td = Vec::new();
    for a in &vertices {
        let row = vertices
            .iter()
            .map(|b| selorder::building::type_distance(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        td.push(row);
    }
    let vs: Vec<Value> = vertices
        .iter()
        .enumerate()
        .map(|(k, v)| json!({ "k": k, "lattice": matrix_json(v.canonical()), "type": v.type_label() }))
        .collect();
    Ok(Report::done(json!({ "vertices": vs, "td": td })))
}

fn run_classgroup(job: &Value, ctx: &mut Ctx) -> Result<Report, CliError> {
    let job: jobs::ClassGroupJob = parse(job)?;
    let d: i64 = int(&job.d, "d")?;
    let g = ctx.groups.get(d)?;
    Ok(Report::done(json!({
        "d": d.to_string(),
        "h": g.order().to_string(),
        "invariants": g.invariants().iter().map(u64::to_string).collect::<Vec<_>>(),
        "generators": g.generators().iter().map(form_json).collect::<Vec<_>>(),
        "forms": g.elements().iter().map(form_json).collect::<Vec<_>>(),
    })))
}

fn run_split(job: &Value) -> Result<Report, CliError> {
    let job: jobs::SplitJob = parse(job)?;
    let d: i64 = int(&job.d, "d")?;
    let e = jobs::extension(d, None, &job.g)?;
    let nu = jobs::prime(&job.prime, d)?;
    let shape = splitting_shape(&nu, &e)?;
    let p = e.degree() as u32;
    let status = if !shape.is_determinate() {
        "indeterminate"
    } else if shape.splits_completely(p) {
        "split"
    } else if shape.is_inert(p) {
        "inert"
    } else {
        "mixed"
    };
    Ok(Report {
        outcome: json!({
            "prime": prime_json(&nu),
            "shape": shape_json(&shape),
            "status": status,
            "disc_g": ok_json(&disc_poly(&e)),
        }),
        certificates: Value::Array(Vec::new()),
        indeterminate: !shape.is_determinate(),
    })
}

fn deviations(devs: &[jobs::Deviation], d: i64, dim: usize) -> Result<DeviationData, CliError> {
    let mut out = DeviationData::empty(dim);
    for dev in devs {
        let nu = jobs::prime(&dev.prime, d)?;
        let l = jobs::deviation_lattice(dev, &nu, dim)?;
        out.insert(nu, l)?;
    }
    Ok(out)
}

fn genus_for(
    ctx: &mut Ctx,
    d: &str,
    p: &str,
    ram: &[jobs::PrimeRef],
) -> Result<(AlgebraSpec, GenusGroup), CliError> {
    let d: i64 = int(d, "d")?;
    let p: u64 = int(p, "p")?;
    let ram = jobs::primes(ram, d)?;
    let a = AlgebraSpec::new(d, p, ram)?;
    let cg = ctx.groups.get(d)?;
    let g = genus_group(&cg, p, a.ram())?;
    Ok((a, g))
}

fn run_rho(job: &Value, ctx: &mut Ctx) -> Result<Report, CliError> {
    let job: jobs::RhoJob = parse(job)?;
    let (a, g) = genus_for(ctx, &job.d, &job.p, &job.ram)?;
    let dim = a.p() as usize;
    let d1 = deviations(&job.dev1, a.discriminant(), dim)?;
    let d2 = deviations(&job.dev2, a.discriminant(), dim)?;
    let r = rho(&d1, &d2, &g)?;
    Ok(Report::done(json!({
        "genus": genus_json(&g),
        "rho": element_json(&r),
        "identity": r.is_identity(),
    })))
}

fn sampling(
    ctx: &Ctx,
    bound: &Option<String>,
    stab: &Option<String>,
) -> Result<SamplingOptions, CliError> {
    let bound = match (ctx.bound, bound) {
        (Some(b), _) => b,
        (None, Some(s)) => int(s, "bound")?,
        (None, None) => DEFAULT_SAMPLE_BOUND,
    };
    let stabilization = match (ctx.stabilization, stab) {
        (Some(s), _) => s,
        (None, Some(s)) => int(s, "stabilization")?,
        (None, None) => DEFAULT_STABILIZATION,
    };
    Ok(SamplingOptions {
        bound,
        stabilization,
    })
}

fn verdict_json(v: &SelectivityVerdict) -> Value {
    let cond1 = v.cond1.as_ref().map(|c| match c {
        Containment::Contained { h_l, stable_for } => json!({
            "status": "contained",
            "basis": "accepted-by-stabilization",
            "h_l": h_l.phi,
            "stable_for": stable_for,
        }),
        Containment::NotContained(why) => json!({
            "status": "not-contained",
            "certificate": why.to_string(),
        }),
        Containment::Indeterminate(r) => json!({ "status": "indeterminate", "reason": r }),
    });
    json!({
        "outcome": match &v.outcome {
            Outcome::Indeterminate(_) => "indeterminate".to_string(),
            o => o.to_string(),
        },
        "reason": match &v.outcome { Outcome::Indeterminate(r) => Some(r.clone()), _ => None },
        "selective": v.selective(),
        "fraction": v.fraction().map(|f| f.to_string()),
        "irreducible": decision_json(&v.irreducible),
        "embeds": decision_json(&v.embeds),
        "cond1": cond1,
        "cond2": v.cond2.as_ref().map(decision_json),
        "conductor": v.conductor.iter().map(prime_json).collect::<Vec<_>>(),
        "genus": genus_json(&v.genus),
    })
}

fn certificates(v: &SelectivityVerdict, full: bool) -> Value {
    if full {
        v.certificates.iter().map(sample_json).collect()
    } else {
        json!({ "samples": v.certificates.len() })
    }
}

fn run_verdict(job: &Value, ctx: &mut Ctx) -> Result<Report, CliError> {
    let job: jobs::VerdictJob = parse(job)?;
    let (a, g) = genus_for(ctx, &job.d, &job.p, &job.ram)?;
    let e = jobs::extension(a.discriminant(), Some(a.p()), &job.g)?;
    let spec = jobs::order(&job.order, a.discriminant())?;
    let opts = sampling(ctx, &job.bound, &job.stabilization)?;
    let v = selectivity_verdict(&a, &spec, &e, &g, &opts)?;
    Ok(Report {
        outcome: verdict_json(&v),
        certificates: certificates(&v, ctx.trace),
        indeterminate: matches!(v.outcome, Outcome::Indeterminate(_)),
    })
}

fn run_parametrize(job: &Value, ctx: &mut Ctx) -> Result<Report, CliError> {
    let job: jobs::ParametrizeJob = parse(job)?;
    let (a, g) = genus_for(ctx, &job.d, &job.p, &job.ram)?;
    let verdict = match (&job.g, &job.order) {
        (Some(poly), Some(order)) => {
            let e = jobs::extension(a.discriminant(), Some(a.p()), poly)?;
            let spec = jobs::order(order, a.discriminant())?;
            let opts = sampling(ctx, &job.bound, &job.stabilization)?;
            Some((selectivity_verdict(&a, &spec, &e, &g, &opts)?, e))
        }
        (None, None) => None,
        _ => return Err(CliError::Input("g and order must be given together".into())),
    };
    if let Some((v, _)) = &verdict {
        if let Outcome::Indeterminate(r) = &v.outcome {
            return Ok(Report {
                outcome: json!({ "verdict": verdict_json(v), "reason": r }),
                certificates: certificates(v, ctx.trace),
                indeterminate: true,
            });
        }
    }
    let (ext, h_l) = match &verdict {
        Some((v, e)) => (Some(e), v.h_l()),
        None => (None, None),
    };
    let gens = choose_generators(
        &g,
        ext,
        h_l,
        &[],
        ctx.bound.unwrap_or(DEFAULT_GENERATOR_BOUND),
    )?;
    let frames = standard_frames(&g, &gens);
    let p = g.p();
    let m = g.rank();
    let reference = DeviationData::empty(p as usize);
    let mut classes = Vec::new();
    let mut admissible_count = 0u64;
    for idx in 0..g.order() {
        let mut gamma = vec![0u64; m];
        let mut rest = idx;
        for slot in gamma.iter_mut().rev() {
            *slot = rest % p;
            rest /= p;
        }
        let dev = parametrization(&g, &gens, &frames, &gamma)?;
        let r = rho(&reference, &dev, &g)?;
        let admissible = match &verdict {
            Some((v, _)) => {
                let ok = admits_order(v, &dev)?;
                admissible_count += u64::from(ok);
                Some(ok)
            }
            None => None,
        };
        classes.push(json!({
            "gamma": gamma,
            "deviation": deviation_json(&dev),
            "rho": element_json(&r),
            "admissible": admissible,
        }));
    }
    Ok(Report {
        outcome: json!({
            "genus": genus_json(&g),
            "generators": gens.iter().map(prime_json).collect::<Vec<_>>(),
            "classes": classes,
            "verdict": verdict.as_ref().map(|(v, _)| verdict_json(v)),
            "admissible_count": verdict.as_ref().map(|_| admissible_count.to_string()),
        }),
        certificates: verdict.as_ref().map_or(Value::Array(Vec::new()), |(v, _)| {
            certificates(v, ctx.trace)
        }),
        indeterminate: false,
    })
}

fn error_kind(e: &CliError) -> (&'static str, String, bool) {
    match e {
        CliError::Input(m) => ("input", m.clone(), false),
        CliError::Io(e) => ("io", e.to_string(), false),
        CliError::Math(err @ (Error::Indeterminate(_) | Error::SearchBoundExceeded { .. })) => {
            ("indeterminate", err.to_string(), true)
        }
        CliError::Math(err) => ("input", err.to_string(), false),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; usage errors are input errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    let mut ctx = Ctx {
        groups: ClassGroups::new(!cli.no_cache),
        bound: cli.bound,
        stabilization: cli.stabilization,
        trace: cli.certificates,
    };
    let (name, path) = match &cli.command {
        Command::Td { input } => ("td", input),
        Command::Chamber { input } => ("chamber", input),
        Command::Classgroup { input } => ("classgroup", input),
        Command::Split { input } => ("split", input),
        Command::Rho { input } => ("rho", input),
        Command::Verdict { input } => ("verdict", input),
        Command::Parametrize { input } => ("parametrize", input),
    };
    let version = env!("CARGO_PKG_VERSION");
    let result = read_input(path).and_then(|job| {
        let report = match &cli.command {
            Command::Td { .. } => run_td(&job),
            Command::Chamber { .. } => run_chamber(&job),
            Command::Classgroup { .. } => run_classgroup(&job, &mut ctx),
            Command::Split { .. } => run_split(&job),
            Command::Rho { .. } => run_rho(&job, &mut ctx),
            Command::Verdict { .. } => run_verdict(&job, &mut ctx),
            Command::Parametrize { .. } => run_parametrize(&job, &mut ctx),
        };
        report.map(|r| (job, r))
    });
    let timing = json!({
        "elapsed_ms": start.elapsed().as_millis() as u64,
        "cache_hits": ctx.groups.hits,
        "cache_misses": ctx.groups.misses,
    });
    let (doc, code) = match result {
        Ok((job, report)) => {
            let code = if report.indeterminate { 2 } else { 0 };
            let doc = json!({
                "version": version,
                "command": name,
                "job": job,
                "outcome": report.outcome,
                "certificates": report.certificates,
                "timing": timing,
            });
            (doc, code)
        }
        Err(e) => {
            let (kind, message, indeterminate) = error_kind(&e);
            let doc = json!({
                "version": version,
                "command": name,
                "error": { "kind": kind, "message": message },
                "timing": timing,
            });
            (doc, if indeterminate { 2 } else { 1 })
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("document serializes")
    );
    ExitCode::from(code)
}
