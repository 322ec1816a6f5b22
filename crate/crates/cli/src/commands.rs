use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, ValueEnum};
use rankguard_core::formats::{parse_index_list, to_one_based};
use rankguard_core::leakage::build_extractor_with_seed;
use rankguard_core::leakage::DEFAULT_AUDIT_SEED;
use rankguard_core::{
    adversary_observe, brute_force_min_leakage, leaked_equation_report, run_experiment,
    score_greedy, sweep_report, verify_certificate, BruteForceOptions, CertificateFile,
    ChannelAssignment, CodeDescriptor, Delta, ExperimentConfig, ExperimentSettings,
    LeakageCertificate, Method, PolarCode, SelectionResult,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{emit, emit_json, Command, RunManifest};

/// Human-readable lines go to stdout when the artifact is written to a
/// file, and to stderr when the artifact itself is on stdout.
struct Summary {
    to_stdout: bool,
}

impl Summary {
    fn new(out: Option<&Path>) -> Self {
        Self {
            to_stdout: out.is_some(),
        }
    }

    fn line(&self, s: impl AsRef<str>) {
        if self.to_stdout {
            println!("{}", s.as_ref());
        } else {
            eprintln!("{}", s.as_ref());
        }
    }
}

fn fmt_set(idx: &[usize]) -> String {
    let items: Vec<String> = to_one_based(idx).iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn parse_delta(spec: &str, manifest: &mut RunManifest) -> CliResult<Delta> {
    if let Some(path) = spec.strip_prefix('@') {
        return manifest.read_json(Path::new(path));
    }
    let d: f64 = spec
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--delta expects a number or @file, got {spec:?}")))?;
    Ok(Delta::Uniform(d))
}

fn load_code(manifest: &mut RunManifest, path: &Path) -> CliResult<PolarCode> {
    let desc: CodeDescriptor = manifest.read_json(path)?;
    Ok(desc.to_code()?)
}

fn load_certificate(manifest: &mut RunManifest, path: &Path) -> CliResult<LeakageCertificate> {
    let file: CertificateFile = manifest.read_json(path)?;
    Ok(file.to_certificate()?)
}

/// Re-audits `cert`; any failed check, or a shape too broken to check, is a
/// verification failure.
fn audit(cert: &LeakageCertificate, code: &PolarCode) -> CliResult<usize> {
    let report = match verify_certificate(cert, code) {
        Ok(r) => r,
        Err(e @ rankguard_core::Error::DimensionMismatch(_)) => {
            let mut msg = format!("\n  malformed certificate: {e}");
            if cert.code_id != code.fingerprint() {
                msg.push_str("\n  failed check \"code id\": certificate was issued for a different code");
            }
            return Err(CliError::Verification(msg));
        }
        Err(e) => return Err(e.into()),
    };
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("\n  failed check {:?}: {}", c.name, c.detail))
        .collect();
    if failures.is_empty() {
        Ok(report.checks.len())
    } else {
        Err(CliError::Verification(failures.concat()))
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("design").required(true).args(["rate", "zeta"])))]
pub struct ConstructArgs {
    /// log2 of the blocklength.
    #[arg(long)]
    pub n: u32,
    /// Keep the floor(N * rate) most reliable coordinates.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Keep every coordinate whose erasure probability is at most zeta.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Design erasure probability: a number, or @file holding a JSON number
    /// or array of N numbers.
    #[arg(long)]
    pub delta: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn construct(args: &ConstructArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Construct);
    let delta = parse_delta(&args.delta, &mut manifest)?;
    let code = match (args.rate, args.zeta) {
        (Some(r), None) => PolarCode::from_rate(args.n, delta, r)?,
        (None, Some(z)) => PolarCode::from_threshold(args.n, delta, z)?,
        _ => unreachable!("clap enforces exactly one of --rate/--zeta"),
    };
    let out = args.out.as_deref();
    emit_json(&mut manifest, out, &CodeDescriptor::from_code(&code))?;
    let summary = Summary::new(out);
    summary.line(format!("N = {}, |A| = {}", code.blocklength(), code.info_set().len()));
    summary.line(format!("A = {}", fmt_set(code.info_set())));
    Ok(())
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Code descriptor JSON.
    #[arg(long)]
    pub code: PathBuf,
    /// Published coordinates, 1-based and comma-separated; "" for none.
    #[arg(long, allow_hyphen_values = true)]
    pub public: String,
    /// Seed of the frame-replay audit.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn certify(args: &CertifyArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Certify);
    let code = load_code(&mut manifest, &args.code)?;
    let p = parse_index_list(&args.public)?;
    let seed = args.seed.unwrap_or(DEFAULT_AUDIT_SEED);
    manifest.seed = Some(seed);
    let cert = build_extractor_with_seed(&code, &p, seed)?;
    if !cert.verified {
        return Err(CliError::Verification("freshly built certificate failed its audit".into()));
    }
    let out = args.out.as_deref();
    emit_json(&mut manifest, out, &CertificateFile::from_certificate(&cert))?;

    let summary = Summary::new(out);
    summary.line(format!("L = {}", cert.leakage));
    summary.line(format!(
        "rank(G_P) = {}, rank(G_FP) = {}, P = {}",
        cert.rank_gp,
        cert.rank_gfp,
        fmt_set(&cert.public_set)
    ));
    for eq in leaked_equation_report(&cert, &code) {
        summary.line(format!("  {eq}"));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
    /// Full codeword as a string of N '0'/'1' characters, x_1 first.
    #[arg(long)]
    pub codeword: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Extraction {
    #[serde(rename = "P")]
    public_set: Vec<usize>,
    equations: Vec<String>,
    recovered: String,
}

pub fn extract(args: &ExtractArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Extract);
    let code = load_code(&mut manifest, &args.code)?;
    let mut cert = load_certificate(&mut manifest, &args.cert)?;
    audit(&cert, &code)?;
    cert.verified = true;

    let x: Vec<bool> = args
        .codeword
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!("--codeword: unexpected character {c:?}"))),
        })
        .collect::<CliResult<_>>()?;
    if x.len() != code.blocklength() {
        return Err(CliError::Usage(format!(
            "--codeword has {} bits, the code has N = {}",
            x.len(),
            code.blocklength()
        )));
    }
    let bits = adversary_observe(&x, &cert)?;
    let equations = leaked_equation_report(&cert, &code);
    let result = Extraction {
        public_set: to_one_based(&cert.public_set),
        recovered: bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        equations: equations.clone(),
    };
    let out = args.out.as_deref();
    emit_json(&mut manifest, out, &result)?;
    let summary = Summary::new(out);
    summary.line(format!("L = {}", cert.leakage));
    for (eq, b) in equations.iter().zip(&bits) {
        summary.line(format!("  {eq} = {}", u8::from(*b)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectMethod {
    Greedy,
    Brute,
    Both,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(long)]
    pub code: PathBuf,
    /// Number of coordinates to publish.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "greedy")]
    pub method: SelectMethod,
    /// Refuse brute force beyond this many candidate subsets.
    #[arg(long, default_value_t = rankguard_core::selection::DEFAULT_BRUTE_FORCE_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SelectionOut {
    method: Method,
    #[serde(rename = "P")]
    public_set: Vec<usize>,
    #[serde(rename = "L")]
    leakage: usize,
    bound: usize,
    work: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

impl From<&SelectionResult> for SelectionOut {
    fn from(r: &SelectionResult) -> Self {
        Self {
            method: r.method,
            public_set: to_one_based(&r.public_set),
            leakage: r.leakage,
            bound: r.bound,
            work: r.work.to_string(),
            warning: r.warning.clone(),
        }
    }
}

#[derive(Serialize)]
struct Selections {
    #[serde(skip_serializing_if = "Option::is_none")]
    greedy: Option<SelectionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force: Option<SelectionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<usize>,
}

pub fn select(args: &SelectArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Select);
    let code = load_code(&mut manifest, &args.code)?;
    let greedy = match args.method {
        SelectMethod::Greedy | SelectMethod::Both => Some(score_greedy(&code, args.k)?),
        SelectMethod::Brute => None,
    };
    let brute = match args.method {
        SelectMethod::Brute | SelectMethod::Both => {
            let opts = BruteForceOptions {
                cap: args.cap,
                ..Default::default()
            };
            Some(brute_force_min_leakage(&code, args.k, &opts)?)
        }
        SelectMethod::Greedy => None,
    };
    let gap = match (&greedy, &brute) {
        (Some(g), Some(b)) => Some(g.leakage - b.leakage),
        _ => None,
    };
    let body = Selections {
        greedy: greedy.as_ref().map(Into::into),
        brute_force: brute.as_ref().map(Into::into),
        gap,
    };
    let out = args.out.as_deref();
    emit_json(&mut manifest, out, &body)?;

    let summary = Summary::new(out);
    for (name, r) in [("greedy", &greedy), ("brute force", &brute)] {
        if let Some(r) = r {
            summary.line(format!(
                "{name}: P = {}, L = {}, bound = {}",
                fmt_set(&r.public_set),
                r.leakage,
                r.bound
            ));
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
        }
    }
    if let Some(g) = gap {
        summary.line(format!("gap = {g}"));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub code: PathBuf,
    /// Largest budget in the table; rows cover k = 1..=K.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = rankguard_core::selection::DEFAULT_BRUTE_FORCE_CAP)]
    pub cap: u128,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Sweep);
    let code = load_code(&mut manifest, &args.code)?;
    let opts = BruteForceOptions {
        cap: args.cap,
        ..Default::default()
    };
    let rows = sweep_report(&code, args.k, &opts)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("CSV output: {e}")))?;
    let text = String::from_utf8(bytes).expect("CSV output is UTF-8");
    let out = args.out.as_deref();
    if let Some(path) = out {
        manifest.outputs.push(path.display().to_string());
    }
    emit(&mut manifest, out, &text)?;
    let worst = rows.iter().map(|r| r.gap).max().unwrap_or(0);
    Summary::new(out).line(format!("{} rows, largest gap {worst}", rows.len()));
    Ok(())
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Experiment config JSON; its `code` path is relative to this file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's trial count.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Simulate);
    let config: ExperimentConfig = manifest.read_json(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new(""));
    let code = load_code(&mut manifest, &base.join(&config.code))?;
    let p = rankguard_core::formats::to_zero_based(&config.public_set)?;
    let settings = ExperimentSettings {
        trials: args.trials.unwrap_or(config.trials),
        seed: args.seed.unwrap_or(config.seed),
        reuse_mask: config.reuse_mask,
    };
    manifest.seed = Some(settings.seed);
    if settings.reuse_mask {
        eprintln!("warning: reuse_mask is set; every frame shares one frozen-bit mask, which voids the secrecy guarantee (negative demonstration only)");
    }
    let cert = build_extractor_with_seed(&code, &p, settings.seed)?;
    let assign = ChannelAssignment::new(cert.public_set.clone(), config.delta_pub, config.delta_priv)?;
    let report = run_experiment(&code, &assign, Some(&cert), settings)?;
    let out = args.out.as_deref();
    emit_json(&mut manifest, out, &report)?;
    let summary = Summary::new(out);
    summary.line(format!(
        "trials = {}, frame errors = {}, FER = {}, BER = {}",
        report.trials, report.frame_errors, report.fer, report.ber
    ));
    summary.line(format!(
        "L = {}, adversary checks passed = {}/{}",
        cert.leakage, report.adversary_checks_passed, report.trials
    ));
    Ok(())
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new(Command::Verify);
    let code = load_code(&mut manifest, &args.code)?;
    let cert = load_certificate(&mut manifest, &args.cert)?;
    let checks = audit(&cert, &code)?;
    println!("ok: {checks} checks passed, L = {}", cert.leakage);
    Ok(())
}
