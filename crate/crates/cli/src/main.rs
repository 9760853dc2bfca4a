use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use rpcheck::config::ModelSpec;
use rpcheck::couplings::{build_adapted_basis, extract_couplings, reconstruct, CouplingMatrix};
use rpcheck::functionals::boltzmann;
use rpcheck::linalg::{CMatrix, PSD_TOL};
use rpcheck::models::Model;
use rpcheck::rp::{gram_matrix, os_hilbert_space, verify_rp, RPVerdict, Status};
use rpcheck::Error;

const EXIT_NOT_RP: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
/// Entries below this fraction of the largest coupling are omitted from text output.
const TEXT_CUTOFF: f64 = 1e-12;
const DEFAULT_BETAS: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];

#[derive(Parser)]
#[command(name = "rpcheck", version, about = "Reflection positivity checks for lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gram-matrix test and coupling criterion; exit 0 = RP, 2 = not RP, 3 = inconclusive scan.
    Verify(RunArgs),
    /// Matrix of coupling constants with degree labels and the J⁰ spectrum.
    Couplings(RunArgs),
    /// Rebuilds H from a couplings JSON file and compares it with the model.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// Couplings JSON written by `rpcheck couplings`.
        #[arg(long)]
        couplings: PathBuf,
    },
    /// Per-degree dimensions of the OS Hilbert space; exit 2 when a Gram block is not PSD.
    Hilbert(RunArgs),
    /// Randomized property battery; exit 2 on any failure.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Replace the exchange phase by its negative; the battery must then fail.
        #[arg(long)]
        corrupt_phase: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Model specification (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,
    /// Relative eigenvalue tolerance.
    #[arg(long, default_value_t = PSD_TOL)]
    tol: f64,
    /// Twist root override as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<String>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn parse_zeta(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("invalid --zeta `{s}`: expected \"re,im\"");
    }
    let re = parts[0].parse().with_context(|| format!("invalid --zeta real part `{}`", parts[0]))?;
    let im = parts[1].parse().with_context(|| format!("invalid --zeta imaginary part `{}`", parts[1]))?;
    Ok([re, im])
}

struct Loaded {
    spec: ModelSpec,
    model: Model,
    betas: Vec<f64>,
}

fn load(run: &RunArgs) -> Result<Loaded> {
    let text = fs::read_to_string(&run.model).with_context(|| format!("cannot read {}", run.model.display()))?;
    let mut spec = ModelSpec::from_json(&text).with_context(|| format!("invalid model file {}", run.model.display()))?;
    if let Some(z) = &run.zeta {
        spec.zeta = Some(parse_zeta(z)?);
    }
    if !(run.tol.is_finite() && run.tol > 0.0) {
        bail!("invalid --tol {}: must be positive", run.tol);
    }
    let betas = match &run.beta {
        Some(b) => b.clone(),
        None => spec.validated_betas()?.unwrap_or_else(|| DEFAULT_BETAS.to_vec()),
    };
    if let Some(bad) = betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
        bail!("invalid --beta value {bad}: beta must be finite and nonnegative");
    }
    if betas.is_empty() {
        bail!("invalid --beta: at least one value is required");
    }
    let model = spec.build()?;
    Ok(Loaded { spec, model, betas })
}

fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes `name` into the output directory or prints it.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BlockReport {
    degree: usize,
    min_eig: f64,
    psd: bool,
}

#[derive(Serialize)]
struct BetaReport {
    beta: f64,
    blocks: Vec<BlockReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    model: String,
    family: String,
    zeta: C64,
    tol: f64,
    status: Status,
    rp: bool,
    betas: Vec<BetaReport>,
    coupling_psd: Option<bool>,
    j0_min_eig: Option<f64>,
    agreement: Option<bool>,
    hamiltonian_reflection_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<rpcheck::rp::Witness>,
}

fn verify_report(name: &str, v: RPVerdict) -> VerifyReport {
    VerifyReport {
        model: name.to_string(),
        family: v.family,
        zeta: v.zeta,
        tol: v.tol,
        status: v.status,
        rp: v.rp,
        betas: v
            .betas
            .into_iter()
            .map(|b| BetaReport {
                beta: b.beta,
                blocks: b
                    .blocks
                    .into_iter()
                    .map(|k| BlockReport { degree: k.degree, min_eig: k.min_eig, psd: k.psd })
                    .collect(),
                error: b.error,
            })
            .collect(),
        coupling_psd: v.coupling_psd,
        j0_min_eig: v.j0_min_eig,
        agreement: v.agreement,
        hamiltonian_reflection_defect: v.hamiltonian_reflection_defect,
        witness: v.witness,
    }
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut s = String::from("beta,degree,min_eig,psd\n");
    for b in &r.betas {
        for k in &b.blocks {
            s.push_str(&format!("{},{},{:e},{}\n", b.beta, k.degree, k.min_eig, k.psd));
        }
    }
    s
}

fn verify_text(r: &VerifyReport) -> String {
    let mut s = format!("model {} ({}), zeta = {}\n", r.model, r.family, r.zeta);
    for b in &r.betas {
        match &b.error {
            Some(e) => s.push_str(&format!("beta {}: error: {e}\n", b.beta)),
            None => {
                let min = b.blocks.iter().map(|k| k.min_eig).fold(f64::INFINITY, f64::min);
                let psd = b.blocks.iter().all(|k| k.psd);
                s.push_str(&format!("beta {}: min eigenvalue {min:e}, {}\n", b.beta, if psd { "PSD" } else { "not PSD" }));
            }
        }
    }
    if let Some(c) = r.coupling_psd {
        s.push_str(&format!("J0 PSD: {c} (min eigenvalue {:e})\n", r.j0_min_eig.unwrap_or(f64::NAN)));
    }
    if let Some(w) = &r.witness {
        s.push_str(&format!("witness at beta {}: <A,A> = {:e}\n", w.beta, w.value));
    }
    s.push_str(&format!("status: {}\n", serde_json::to_value(r.status).unwrap_or(Value::Null).as_str().unwrap_or("")));
    s
}

fn cmd_verify(run: &RunArgs) -> Result<u8> {
    let l = load(run)?;
    let basis = build_adapted_basis(&l.model.double)?;
    let v = verify_rp(&l.model.double, &basis, &l.model.hamiltonian, &l.betas, run.tol)?;
    let report = verify_report(l.spec.family(), v);
    let (name, body) = match run.format {
        Format::Json => ("verdict.json", to_json_string(&report)?),
        Format::Csv => ("verdict.csv", verify_csv(&report)),
        Format::Text => ("verdict.txt", verify_text(&report)),
    };
    emit(run.out.as_deref(), name, &body)?;
    Ok(match report.status {
        Status::Rp => 0,
        Status::NotRp => EXIT_NOT_RP,
        Status::InconclusiveScan => EXIT_INCONCLUSIVE,
    })
}

fn couplings_text(j: &CouplingMatrix) -> Result<String> {
    let mut s = String::new();
    let scale = j.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..j.len() {
        for k in 0..j.len() {
            let z = j.matrix[(i, k)];
            if z.norm() > TEXT_CUTOFF * scale {
                s.push_str(&format!("J[{} ; {}] = {:.6e} {:+.6e}i\n", j.labels[i], j.labels[k], z.re, z.im));
            }
        }
    }
    let spectrum: Vec<String> = j.j0_spectrum()?.iter().map(|x| format!("{x:.6e}")).collect();
    s.push_str(&format!("J0 spectrum: [{}]\n", spectrum.join(", ")));
    Ok(s)
}

fn cmd_couplings(run: &RunArgs) -> Result<u8> {
    let l = load(run)?;
    let basis = build_adapted_basis(&l.model.double)?;
    let j = extract_couplings(&l.model.double, &basis, &l.model.hamiltonian)?;
    let mut body = j.to_json()?;
    body["model"] = json!(l.spec.family());
    match (run.out.as_deref(), run.format) {
        (Some(dir), _) => {
            emit(Some(dir), "couplings.json", &to_json_string(&body)?)?;
            fs::create_dir_all(dir)?;
            j.save_csv(&dir.join("couplings.csv"))?;
        }
        (None, Format::Json) => emit(None, "", &to_json_string(&body)?)?,
        (None, Format::Csv) => {
            let mut buf = Vec::new();
            j.write_csv(&mut buf)?;
            emit(None, "", &String::from_utf8(buf)?)?;
        }
        (None, Format::Text) => emit(None, "", &couplings_text(&j)?)?,
    }
    Ok(0)
}

fn read_couplings(path: &Path, expect: &CouplingMatrix) -> Result<CouplingMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("invalid couplings file {}", path.display()))?;
    let grid = |key: &str| -> Result<Vec<Vec<f64>>> {
        serde_json::from_value(v.get(key).cloned().ok_or_else(|| anyhow!("couplings file lacks `{key}`"))?)
            .with_context(|| format!("couplings field `{key}` must be a matrix of numbers"))
    };
    let (re, im) = (grid("real")?, grid("imag")?);
    let n = expect.len();
    if re.len() != n || im.len() != n || re.iter().chain(&im).any(|r| r.len() != n) {
        bail!("couplings matrix must be {n}x{n} for this model");
    }
    Ok(CouplingMatrix {
        matrix: CMatrix::from_fn(n, n, |i, k| C64::new(re[i][k], im[i][k])),
        ..expect.clone()
    })
}

fn cmd_reconstruct(run: &RunArgs, couplings: &Path) -> Result<u8> {
    let l = load(run)?;
    let alg = &l.model.double.algebra;
    let basis = build_adapted_basis(&l.model.double)?;
    let template = extract_couplings(&l.model.double, &basis, &alg.zero())?;
    let j = read_couplings(couplings, &template)?;
    let h = reconstruct(&l.model.double, &basis, &j)?;
    let residual = h.max_abs_diff(&l.model.hamiltonian)?;
    let terms: Vec<Value> = h
        .terms()
        .map(|(m, c)| json!({ "monomial": alg.monomial_label(m), "re": c.re, "im": c.im }))
        .collect();
    let body = json!({ "model": l.spec.family(), "terms": terms, "residual_vs_model": residual });
    let text = match run.format {
        Format::Text => format!("{} terms, max |H - H_model| = {residual:e}\n", h.len()),
        Format::Csv => {
            let mut s = String::from("monomial,re,im\n");
            for (m, c) in h.terms() {
                s.push_str(&format!("\"{}\",{:e},{:e}\n", alg.monomial_label(m), c.re, c.im));
            }
            s
        }
        Format::Json => to_json_string(&body)?,
    };
    let name = match run.format {
        Format::Json => "hamiltonian.json",
        Format::Csv => "hamiltonian.csv",
        Format::Text => "hamiltonian.txt",
    };
    emit(run.out.as_deref(), name, &text)?;
    Ok(0)
}

fn cmd_hilbert(run: &RunArgs) -> Result<u8> {
    let l = load(run)?;
    let basis = build_adapted_basis(&l.model.double)?;
    let mut reports = Vec::new();
    for &beta in &l.betas {
        let f = boltzmann(&l.model.double.background, &l.model.double.algebra, &l.model.hamiltonian, beta)?;
        let g = gram_matrix(&l.model.double, &f, &basis)?;
        match os_hilbert_space(&g, run.tol) {
            Ok(space) => reports.push(json!({ "beta": beta, "space": space })),
            Err(e @ Error::NotReflectionPositive { .. }) => {
                eprintln!("beta {beta}: {e}");
                return Ok(EXIT_NOT_RP);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let body = json!({ "model": l.spec.family(), "results": reports });
    let text = match run.format {
        Format::Json => to_json_string(&body)?,
        Format::Csv => {
            let mut s = String::from("beta,degree,dim,null_dim\n");
            for r in &reports {
                for b in r["space"]["blocks"].as_array().into_iter().flatten() {
                    s.push_str(&format!("{},{},{},{}\n", r["beta"], b["degree"], b["dim"], b["null_dim"]));
                }
            }
            s
        }
        Format::Text => reports
            .iter()
            .map(|r| {
                format!(
                    "beta {}: dim H = {}, null = {}, dim A+ = {}\n",
                    r["beta"], r["space"]["total_dim"], r["space"]["null_dim"], r["space"]["plus_dim"]
                )
            })
            .collect(),
    };
    let name = match run.format {
        Format::Json => "hilbert.json",
        Format::Csv => "hilbert.csv",
        Format::Text => "hilbert.txt",
    };
    emit(run.out.as_deref(), name, &text)?;
    Ok(0)
}

fn cmd_props(seed: u64, trials: usize, corrupt: bool, out: Option<&Path>, format: Format) -> Result<u8> {
    if trials == 0 {
        bail!("invalid --trials: must be at least 1");
    }
    let summary = rpcheck::props::run_props(seed, trials, corrupt)?;
    let text = match format {
        Format::Json => to_json_string(&summary)?,
        Format::Csv => {
            let mut s = String::from("property,family,trials,failures,max_deviation,passed\n");
            for c in &summary.checks {
                s.push_str(&format!(
                    "{},{},{},{},{:e},{}\n",
                    c.property, c.family, c.trials, c.failures, c.max_deviation, c.passed
                ));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in &summary.checks {
                s.push_str(&format!(
                    "{:<5} {:<18} {:<12} trials {:>4}  failures {:>3}  max deviation {:e}\n",
                    if c.passed { "ok" } else { "FAIL" },
                    c.property,
                    c.family,
                    c.trials,
                    c.failures,
                    c.max_deviation
                ));
            }
            s
        }
    };
    let name = match format {
        Format::Json => "props.json",
        Format::Csv => "props.csv",
        Format::Text => "props.txt",
    };
    emit(out, name, &text)?;
    Ok(if summary.passed { 0 } else { EXIT_NOT_RP })
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RPCHECK_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("invalid RPCHECK_THREADS `{v}`: expected a positive integer"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Verify(r) => cmd_verify(&r),
        Command::Couplings(r) => cmd_couplings(&r),
        Command::Reconstruct { run, couplings } => cmd_reconstruct(&run, &couplings),
        Command::Hilbert(r) => cmd_hilbert(&r),
        Command::Props { seed, trials, corrupt_phase, out, format } => {
            cmd_props(seed, trials, corrupt_phase, out.as_deref(), format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
