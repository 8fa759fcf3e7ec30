//! Command-line front end: one subcommand per pipeline stage plus the full
//! realization. Artifacts go to the output directory; exit code 0 on success,
//! 1 when a stage fails (a failure report is written), 2 on usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use braidlink::braid::{closure_structure, is_syntactic_square, parse_braid_word};
use braidlink::braidfamily::psi0;
use braidlink::coeff::{parse_q, Q};
use braidlink::mixedpoly::{radial_type, rescale_min_k, rescale_to_mixed, MixedPolynomial};
use braidlink::newton::{is_convenient, newton_boundary, write_support_csv};
use braidlink::nondeg::q_is_nondegenerate;
use braidlink::realize::{prepare, realize, sample_link, FailureReport, RealizeInput, RealizeOptions, Stage};
use braidlink::tolerances::DEFAULT_GRID;
use braidlink::trigcurve::StrandParametrization;

#[derive(Parser)]
#[command(name = "braidlink", version, about = "Real algebraic links from products of mixed polynomials")]
struct Cli {
    /// Output directory for artifacts.
    #[arg(long, global = true, env = "BRAIDLINK_OUT", default_value = "braidlink-out")]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a braid word and report its closure.
    Braid(BraidArgs),
    /// Fit trigonometric strand curves to a braid word.
    Fit(PipelineArgs),
    /// Build the semiholomorphic family g_a, psi0 and the argument profile.
    Family(PipelineArgs),
    /// Rescale g_a to the mixed polynomial p_{a,k}.
    Rescale {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// k (default: the smallest k the rescaling allows).
        #[arg(long)]
        k: Option<u32>,
    },
    /// Newton boundary and faces of a mixed polynomial.
    Newton {
        /// Mixed polynomial JSON.
        #[arg(long)]
        poly: PathBuf,
    },
    /// Check a holomorphic q for Newton non-degeneracy.
    CheckQ {
        #[arg(long)]
        q: PathBuf,
        /// Milnor number of q, for the mu = nu consistency check.
        #[arg(long)]
        mu: Option<i64>,
    },
    /// Certify f = p_{a,k} q without sampling.
    Certify(ProductArgs),
    /// Full pipeline: certificate, artifacts and optionally the sampled link.
    Realize {
        #[command(flatten)]
        product: ProductArgs,
        /// Sample the link of f.
        #[arg(long)]
        sample: bool,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// Sample the link of a semiholomorphic mixed polynomial.
    SampleLink {
        #[arg(long)]
        poly: PathBuf,
        #[command(flatten)]
        sampling: SampleArgs,
    },
}

#[derive(Args)]
struct BraidArgs {
    /// Word in sI, sI^-1, sI^K tokens.
    #[arg(long)]
    braid: String,
    /// Number of strands.
    #[arg(long)]
    strands: usize,
}

#[derive(Args)]
struct PipelineArgs {
    /// Braid word (with --strands) to fit.
    #[arg(long, conflicts_with = "param", requires = "strands")]
    braid: Option<String>,
    /// Number of strands.
    #[arg(long)]
    strands: Option<usize>,
    /// Strand parametrization JSON instead of a braid word.
    #[arg(long, required_unless_present = "braid")]
    param: Option<PathBuf>,
    /// Root scale a, as p/q.
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    a: Q,
    /// Argument profile grid.
    #[arg(long, default_value_t = DEFAULT_GRID, value_parser = positive)]
    grid: usize,
    /// Skip the origin-avoiding shift.
    #[arg(long)]
    no_shift: bool,
    /// Fix the crossing offset of the fit instead of scanning.
    #[arg(long)]
    crossing_offset: Option<f64>,
    /// Fix the (negative,positive) dwell of the fit, e.g. 1,4.
    #[arg(long, value_parser = parse_dwell)]
    dwell: Option<[usize; 2]>,
}

#[derive(Args)]
struct ProductArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Holomorphic q JSON.
    #[arg(long)]
    q: PathBuf,
    /// k (default: the smallest certified k).
    #[arg(long)]
    k: Option<u32>,
    /// Milnor number of q.
    #[arg(long)]
    mu: Option<i64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Sampling radius (default: scan 2^-j).
    #[arg(long)]
    r0: Option<f64>,
    /// Columns around the circle.
    #[arg(long, default_value_t = braidlink::realize::DEFAULT_SAMPLE_GRID, value_parser = positive)]
    sample_grid: usize,
}

fn parse_rational(s: &str) -> Result<Q, String> {
    parse_q(s).filter(|x| *x > Q::from_integer(0.into())).ok_or_else(|| format!("expected a positive rational p/q, got {s:?}"))
}

fn positive(s: &str) -> Result<usize, String> {
    s.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| format!("expected a positive integer, got {s:?}"))
}

fn parse_dwell(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<_> = s.split(',').map(positive).collect::<Result<_, _>>()?;
    <[usize; 2]>::try_from(parts).map_err(|_| "dwell must be two integers, e.g. 1,4".to_string())
}

enum Failure {
    Usage(anyhow::Error),
    Stage(Box<FailureReport>),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<Box<FailureReport>> for Failure {
    fn from(e: Box<FailureReport>) -> Self {
        Failure::Stage(e)
    }
}

type CmdResult = Result<(), Failure>;

struct Out {
    dir: PathBuf,
}

impl Out {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn json(&self, name: &str, v: &Value) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        fs::write(self.path(name), text).with_context(|| format!("writing {name}"))
    }

    fn csv(&self, name: &str, write: impl FnOnce(fs::File) -> csv::Result<()>) -> anyhow::Result<()> {
        let file = fs::File::create(self.path(name)).with_context(|| format!("creating {name}"))?;
        write(file).with_context(|| format!("writing {name}"))
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_poly(path: &Path) -> anyhow::Result<MixedPolynomial> {
    MixedPolynomial::from_json(&read_json(path)?).with_context(|| format!("in {}", path.display()))
}

fn pipeline_input(p: &PipelineArgs) -> anyhow::Result<RealizeInput> {
    match (&p.braid, &p.param) {
        (Some(word), _) => {
            let strands = p.strands.context("--braid needs --strands")?;
            Ok(RealizeInput::Braid(parse_braid_word(word, strands)?))
        }
        (None, Some(path)) => {
            let sp = StrandParametrization::from_json(&read_json(path)?).map_err(anyhow::Error::msg)?;
            Ok(RealizeInput::Parametrization(sp))
        }
        (None, None) => anyhow::bail!("give --braid or --param"),
    }
}

fn pipeline_options(p: &PipelineArgs) -> anyhow::Result<RealizeOptions> {
    if let Some(o) = p.crossing_offset {
        anyhow::ensure!(o > 0.0 && o.is_finite(), "--crossing-offset must be positive");
    }
    Ok(RealizeOptions {
        a: p.a.clone(),
        grid_size: p.grid,
        shift: !p.no_shift,
        crossing_offset: p.crossing_offset,
        dwell: p.dwell,
        ..Default::default()
    })
}

fn sample_r0(s: &SampleArgs) -> anyhow::Result<Option<f64>> {
    if let Some(r) = s.r0 {
        anyhow::ensure!(r > 0.0 && r.is_finite(), "--r0 must be positive");
    }
    Ok(s.r0)
}

fn print(v: &Value) {
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).unwrap());
}

fn cmd_braid(a: &BraidArgs, out: &Out) -> CmdResult {
    let b = parse_braid_word(&a.braid, a.strands).map_err(anyhow::Error::from)?;
    let v = json!({
        "word": b.to_text(),
        "strands": b.strands,
        "length": b.letters.len(),
        "closure": closure_structure(&b),
        "syntactic_square": is_syntactic_square(&b),
    });
    out.json("braid.json", &v)?;
    print(&v);
    Ok(())
}

fn cmd_fit(p: &PipelineArgs, out: &Out) -> CmdResult {
    if p.braid.is_none() {
        return Err(anyhow::anyhow!("fit needs --braid").into());
    }
    let prep = prepare(&pipeline_input(p)?, &pipeline_options(p)?)?;
    out.json("parametrization.json", &prep.parametrization.to_json())?;
    let v = json!({
        "fit": prep.fit,
        "fit_scan": prep.fit_scan,
        "shift": prep.shift,
        "n_prime": prep.bound.n_prime,
        "warnings": prep.warnings,
    });
    out.json("fit.json", &v)?;
    print(&v);
    Ok(())
}

fn cmd_family(p: &PipelineArgs, out: &Out) -> CmdResult {
    let prep = prepare(&pipeline_input(p)?, &pipeline_options(p)?)?;
    let mut fam = prep.family.to_json();
    fam["psi0"] = psi0(&prep.family).to_json();
    out.json("family.json", &fam)?;
    out.json("profile.json", &json!({"profile": prep.profile, "bound": prep.bound}))?;
    out.csv("profile.csv", |f| prep.profile.write_csv(f))?;
    print(&json!({"s": prep.family.s, "bound": prep.bound, "validity": prep.profile.validity}));
    Ok(())
}

fn cmd_rescale(p: &PipelineArgs, k: Option<u32>, out: &Out) -> CmdResult {
    let prep = prepare(&pipeline_input(p)?, &pipeline_options(p)?)?;
    let min_k = rescale_min_k(&prep.family);
    let k = k.unwrap_or(min_k);
    let f = rescale_to_mixed(&prep.family, k)
        .map_err(|e| prep.fail(Stage::Rescale, &e, json!({"k": k, "min_k": min_k})))?;
    out.json("p.json", &f.to_json())?;
    print(&json!({"k": k, "min_k": min_k, "terms": f.terms.len(), "radial_type": radial_type(&f)}));
    Ok(())
}

fn cmd_newton(poly: &Path, out: &Out) -> CmdResult {
    let f = read_poly(poly)?;
    let boundary = newton_boundary(&f);
    let v = json!({
        "boundary": boundary.to_json(),
        "convenient": is_convenient(&f),
        "radial_type": radial_type(&f),
    });
    out.json("boundary.json", &v)?;
    out.csv("support.csv", |w| write_support_csv(&f, w))?;
    print(&v);
    Ok(())
}

fn cmd_check_q(q: &Path, mu: Option<i64>, out: &Out) -> CmdResult {
    let qp = read_poly(q)?;
    let fail = |message: String, detail: Value| {
        Box::new(FailureReport {
            status: "failure",
            stage: Stage::CheckQ,
            message,
            detail,
            partial: json!({"q": qp.to_json()}),
        })
    };
    let check = q_is_nondegenerate(&qp, mu).map_err(|e| fail(e.to_string(), Value::Null))?;
    let v = serde_json::to_value(&check).unwrap();
    out.json("q_check.json", &v)?;
    if !check.nondegenerate {
        return Err(fail("q is degenerate".into(), v).into());
    }
    print(&v);
    Ok(())
}

fn product_options(a: &ProductArgs) -> anyhow::Result<RealizeOptions> {
    Ok(RealizeOptions { k: a.k, mu: a.mu, ..pipeline_options(&a.pipeline)? })
}

fn cmd_certify(a: &ProductArgs, out: &Out) -> CmdResult {
    let input = pipeline_input(&a.pipeline)?;
    let q = read_poly(&a.q)?;
    let r = realize(&input, &q, &product_options(a)?)?;
    out.json("certificate.json", &serde_json::to_value(&r.report.certificate).unwrap())?;
    out.json("f.json", &r.f.to_json())?;
    print(&json!({
        "overall": r.report.certificate.overall,
        "k": r.report.k,
        "n_m": r.report.n_m,
        "n_prime": r.report.n_prime,
    }));
    Ok(())
}

fn cmd_realize(a: &ProductArgs, sample: bool, s: &SampleArgs, out: &Out) -> CmdResult {
    let input = pipeline_input(&a.pipeline)?;
    let q = read_poly(&a.q)?;
    let opts = RealizeOptions { sample, r0: sample_r0(s)?, sample_grid: s.sample_grid, ..product_options(a)? };
    let r = realize(&input, &q, &opts)?;
    out.json("report.json", &serde_json::to_value(&r.report).unwrap())?;
    out.json("f.json", &r.f.to_json())?;
    out.json("parametrization.json", &r.parametrization.to_json())?;
    out.json("family.json", &r.family.to_json())?;
    out.csv("profile.csv", |w| r.report.profile.write_csv(w))?;
    out.csv("support.csv", |w| write_support_csv(&r.f, w))?;
    if let Some(link) = &r.report.sample {
        out.csv("link.csv", |w| link.write_csv(w))?;
    }
    print(&json!({
        "overall": r.report.certificate.overall,
        "k": r.report.k,
        "n_m": r.report.n_m,
        "n_prime": r.report.n_prime,
        "braid": r.report.sample.as_ref().map(|l| l.braid.clone()),
        "out": out.dir,
    }));
    Ok(())
}

fn cmd_sample_link(poly: &Path, s: &SampleArgs, out: &Out) -> CmdResult {
    let f = read_poly(poly)?;
    let link = sample_link(&f, sample_r0(s)?, s.sample_grid).map_err(|e| {
        Box::new(FailureReport {
            status: "failure",
            stage: Stage::Sample,
            message: e.to_string(),
            detail: Value::Null,
            partial: json!({"f": f.to_json()}),
        })
    })?;
    let v = serde_json::to_value(&link).unwrap();
    out.json("link.json", &v)?;
    out.csv("link.csv", |w| link.write_csv(w))?;
    print(&v);
    Ok(())
}

fn run(cli: &Cli, out: &Out) -> CmdResult {
    match &cli.command {
        Command::Braid(a) => cmd_braid(a, out),
        Command::Fit(p) => cmd_fit(p, out),
        Command::Family(p) => cmd_family(p, out),
        Command::Rescale { pipeline, k } => cmd_rescale(pipeline, *k, out),
        Command::Newton { poly } => cmd_newton(poly, out),
        Command::CheckQ { q, mu } => cmd_check_q(q, *mu, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::Realize { product, sample, sampling } => cmd_realize(product, *sample, sampling, out),
        Command::SampleLink { poly, sampling } => cmd_sample_link(poly, sampling, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: --threads must be a positive integer");
            return ExitCode::from(2);
        }
    }
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let out = Out { dir: cli.out.clone() };
    match run(&cli, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(report)) => {
            eprintln!("error: {report}");
            let v = serde_json::to_value(&report).unwrap();
            if let Err(e) = out.json("failure.json", &v) {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
