//! Command-line front end: entropy of a network file, simplex tables,
//! kappa cache management, verification suites, and isomorphism checks.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error,
//! 3 numerical failure, 4 size bound exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use netgeo_core::{
    entropy, estimate_volume, monotonicity_from_rows, run_all_checks, simplex_table_with_kappa,
    CheckConfig, CheckStatus, GraphError, GraphFormat, KappaCache, KappaRecord, LogBase, McConfig,
    Network, SamplerKind, VolumeEstimate,
};
use std::path::PathBuf;
use std::process::ExitCode;

const DEFAULT_CACHE_FILE: &str = "netgeo-kappa.cache";
const CACHE_ENV_VAR: &str = "NETGEO_KAPPA_CACHE";

#[derive(Parser)]
#[command(
    name = "netgeo",
    about = "Information-geometric complexity entropy of networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct CommonOpts {
    /// Monte Carlo proposal count.
    #[arg(long, global = true, default_value_t = 20_000_000)]
    samples: usize,

    /// Master seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Proposal sampler.
    #[arg(long, global = true, value_enum, default_value_t = SamplerArg::Mc)]
    sampler: SamplerArg,

    /// Logarithm base for the entropy.
    #[arg(long = "log-base", global = true, value_enum, default_value_t = LogBaseArg::Two)]
    log_base: LogBaseArg,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Plain)]
    format: FormatArg,

    /// Kappa cache file; NETGEO_KAPPA_CACHE overrides the default, this
    /// flag overrides both.
    #[arg(long = "kappa-cache", global = true)]
    kappa_cache: Option<PathBuf>,

    /// Ignore any cached kappa record and recalibrate.
    #[arg(long, global = true)]
    recalibrate: bool,

    /// Cap on worker threads; results are identical for any cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    /// pseudo-random (seeded counter streams)
    Mc,
    /// scrambled low-discrepancy sequence
    Qmc,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormatArg {
    /// first token is the vertex count, then one "i j" edge per line
    EdgeList,
    /// vertex count, then an explicit 0/1 matrix
    Adjacency,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the complexity entropy of a network read from a file.
    Entropy {
        /// Network file.
        input: PathBuf,
        /// Input text format.
        #[arg(long = "input-format", value_enum, default_value_t = InputFormatArg::EdgeList)]
        input_format: InputFormatArg,
    },
    /// Volumes and entropies of the k-simplex networks for k = 0..n-1.
    Table {
        #[arg(long)]
        n: usize,
    },
    /// Calibrate (or fetch from cache) the normalization constant kappa(n).
    Kappa {
        #[arg(long)]
        n: usize,
    },
    /// Run the numerical verification suites.
    Verify,
    /// Brute-force isomorphism search between two network files, with an
    /// entropy agreement report when they match.
    IsoCheck {
        input_a: PathBuf,
        input_b: PathBuf,
        #[arg(long = "input-format", value_enum, default_value_t = InputFormatArg::EdgeList)]
        input_format: InputFormatArg,
    },
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
    fn numeric(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
    fn bound(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.opts.threads {
        // ignore re-init errors in case a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Entropy { input, input_format } => cmd_entropy(opts, input, *input_format),
        Command::Table { n } => cmd_table(opts, *n),
        Command::Kappa { n } => cmd_kappa(opts, *n),
        Command::Verify => cmd_verify(opts),
        Command::IsoCheck { input_a, input_b, input_format } => {
            cmd_iso_check(opts, input_a, input_b, *input_format)
        }
    }
}

fn mc_config(opts: &CommonOpts) -> McConfig {
    McConfig::new(opts.samples, opts.seed).with_sampler(match opts.sampler {
        SamplerArg::Mc => SamplerKind::PseudoRandom,
        SamplerArg::Qmc => SamplerKind::LowDiscrepancy,
    })
}

fn log_base(opts: &CommonOpts) -> LogBase {
    match opts.log_base {
        LogBaseArg::Two => LogBase::Base2,
        LogBaseArg::E => LogBase::Natural,
    }
}

fn cache(opts: &CommonOpts) -> KappaCache {
    let path = opts
        .kappa_cache
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_FILE));
    KappaCache::at(path)
}

fn load_network(path: &PathBuf, format: InputFormatArg) -> Result<Network, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let format = match format {
        InputFormatArg::EdgeList => GraphFormat::EdgeList,
        InputFormatArg::Adjacency => GraphFormat::AdjacencyMatrix,
    };
    Network::parse(&text, format).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn calibrated_kappa(opts: &CommonOpts, n: usize) -> Result<KappaRecord, Failure> {
    let (record, _) = cache(opts)
        .get_or_calibrate(n, &mc_config(opts), opts.recalibrate)
        .map_err(|e| Failure::numeric(e.to_string()))?;
    Ok(record)
}

/// One estimate in the common output schema.
struct Report {
    network: String,
    n: usize,
    kappa: f64,
    volume: f64,
    volume_stderr: f64,
    entropy: f64,
    entropy_stderr: f64,
    log_base: &'static str,
    samples: usize,
    accepted_fraction: f64,
    seed: u64,
}

impl Report {
    fn build(
        network: String,
        est: &VolumeEstimate,
        base: LogBase,
        opts: &CommonOpts,
    ) -> Result<Report, Failure> {
        let ent = entropy(est, base).map_err(|e| Failure::numeric(e.to_string()))?;
        Ok(Report {
            network,
            n: 0,
            kappa: est.kappa_used,
            volume: est.value,
            volume_stderr: est.stderr,
            entropy: ent.entropy,
            entropy_stderr: ent.entropy_stderr,
            log_base: base.label(),
            samples: est.samples_total,
            accepted_fraction: est.accepted_fraction,
            seed: opts.seed,
        })
    }
}

// JSON numbers carry 17 significant digits, CSV carries 6.
fn jf(x: f64) -> String {
    format!("{x:.16e}")
}

fn cf(x: f64) -> String {
    format!("{x:.5e}")
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn report_json(r: &Report) -> String {
    format!(
        "{{\"network\":\"{}\",\"n\":{},\"kappa\":{},\"volume\":{},\"volume_stderr\":{},\"entropy\":{},\"entropy_stderr\":{},\"log_base\":\"{}\",\"samples\":{},\"accepted_fraction\":{},\"seed\":{}}}",
        json_escape(&r.network),
        r.n,
        jf(r.kappa),
        jf(r.volume),
        jf(r.volume_stderr),
        jf(r.entropy),
        jf(r.entropy_stderr),
        r.log_base,
        r.samples,
        jf(r.accepted_fraction),
        r.seed
    )
}

const CSV_HEADER: &str =
    "network,n,kappa,volume,volume_stderr,entropy,entropy_stderr,log_base,samples,accepted_fraction,seed";

fn report_csv_row(r: &Report) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        csv_escape(&r.network),
        r.n,
        cf(r.kappa),
        cf(r.volume),
        cf(r.volume_stderr),
        cf(r.entropy),
        cf(r.entropy_stderr),
        r.log_base,
        r.samples,
        cf(r.accepted_fraction),
        r.seed
    )
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn report_plain(r: &Report) -> String {
    format!(
        "network:            {}\nn:                  {}\nkappa:              {:.6}\nvolume:             {:.6} +- {:.2e}\nentropy (log {}):    {:.6} +- {:.2e}\nsamples:            {}\naccepted fraction:  {:.4}\nseed:               {}",
        r.network,
        r.n,
        r.kappa,
        r.volume,
        r.volume_stderr,
        r.log_base,
        r.entropy,
        r.entropy_stderr,
        r.samples,
        r.accepted_fraction,
        r.seed
    )
}

fn cmd_entropy(opts: &CommonOpts, input: &PathBuf, fmt: InputFormatArg) -> Result<ExitCode, Failure> {
    let net = load_network(input, fmt)?;
    let n = net.n();
    let kr = calibrated_kappa(opts, n)?;
    let est = estimate_volume(&net, kr.kappa, &mc_config(opts))
        .map_err(|e| Failure::numeric(e.to_string()))?;
    let mut report = Report::build(input.display().to_string(), &est, log_base(opts), opts)?;
    report.n = n;
    match opts.format {
        FormatArg::Json => println!("{}", report_json(&report)),
        FormatArg::Csv => println!("{CSV_HEADER}\n{}", report_csv_row(&report)),
        FormatArg::Plain => println!("{}", report_plain(&report)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(opts: &CommonOpts, n: usize) -> Result<ExitCode, Failure> {
    if n == 0 {
        return Err(Failure::parse("--n must be at least 1"));
    }
    let kr = calibrated_kappa(opts, n)?;
    let base = log_base(opts);
    let rows = simplex_table_with_kappa(n, &kr, &mc_config(opts), base)
        .map_err(|e| Failure::numeric(e.to_string()))?;

    let reports: Vec<Report> = rows
        .iter()
        .map(|row| {
            let mut r = Report::build(
                format!("clique({n},{})", row.k + 1),
                &row.volume,
                base,
                opts,
            )?;
            r.n = n;
            Ok(r)
        })
        .collect::<Result<_, Failure>>()?;

    match opts.format {
        FormatArg::Json => {
            let items: Vec<String> = rows
                .iter()
                .zip(&reports)
                .map(|(row, r)| format!("{{\"k\":{},{}", row.k, &report_json(r)[1..]))
                .collect();
            println!("[{}]", items.join(","));
        }
        FormatArg::Csv => {
            println!("k,{CSV_HEADER}");
            for (row, r) in rows.iter().zip(&reports) {
                println!("{},{}", row.k, report_csv_row(r));
            }
        }
        FormatArg::Plain => {
            println!("kappa({n}) = {:.6} +- {:.2e}   (samples {}, seed {})", kr.kappa, kr.kappa_stderr, kr.samples, kr.seed);
            println!("{:>2}  {:>10}  {:>9}  {:>10}  {:>9}  {:>8}", "k", "volume", "stderr", "entropy", "stderr", "accept");
            for row in &rows {
                println!(
                    "{:>2}  {:>10.4}  {:>9.1e}  {:>10.4}  {:>9.1e}  {:>8.4}",
                    row.k,
                    row.volume.value,
                    row.volume.stderr,
                    row.entropy.entropy,
                    row.entropy.entropy_stderr,
                    row.volume.accepted_fraction,
                );
            }
            let mono = monotonicity_from_rows(&rows);
            if !mono.is_empty() {
                let weakest = mono.iter().map(|m| m.sigmas).fold(f64::INFINITY, f64::min);
                println!("# consecutive margins all positive: {}; weakest {:.1} sigma",
                    mono.iter().all(|m| m.margin > 0.0), weakest);
            }
            // two-column block: k vs entropy, ready for a plotter
            println!("\n# k entropy");
            for row in &rows {
                println!("{} {:.6}", row.k, row.entropy.entropy);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_kappa(opts: &CommonOpts, n: usize) -> Result<ExitCode, Failure> {
    if n == 0 {
        return Err(Failure::parse("--n must be at least 1"));
    }
    let kr = calibrated_kappa(opts, n)?;
    match opts.format {
        FormatArg::Json => println!(
            "{{\"n\":{},\"kappa\":{},\"kappa_stderr\":{},\"samples\":{},\"seed\":{}}}",
            kr.n,
            jf(kr.kappa),
            jf(kr.kappa_stderr),
            kr.samples,
            kr.seed
        ),
        FormatArg::Csv => println!(
            "n,kappa,kappa_stderr,samples,seed\n{},{},{},{},{}",
            kr.n,
            cf(kr.kappa),
            cf(kr.kappa_stderr),
            kr.samples,
            kr.seed
        ),
        FormatArg::Plain => println!(
            "kappa({}) = {:.6} +- {:.2e}   (samples {}, seed {}, cache {})",
            kr.n,
            kr.kappa,
            kr.kappa_stderr,
            kr.samples,
            kr.seed,
            cache(opts).path().map(|p| p.display().to_string()).unwrap_or_default()
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(opts: &CommonOpts) -> Result<ExitCode, Failure> {
    let cfg = CheckConfig {
        samples: opts.samples,
        seed: opts.seed,
        kappa_cache: cache(opts),
    };
    let outcomes = run_all_checks(&cfg);
    let mut failed = 0usize;
    let mut wide = 0usize;
    for o in &outcomes {
        println!("{} {:<36} {}", o.status, o.name, o.detail);
        match o.status {
            CheckStatus::Fail => failed += 1,
            CheckStatus::Wide => wide += 1,
            CheckStatus::Pass => {}
        }
    }
    println!(
        "{} checks: {} passed, {} inconclusive, {} failed",
        outcomes.len(),
        outcomes.len() - failed - wide,
        wide,
        failed
    );
    if failed > 0 {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_iso_check(
    opts: &CommonOpts,
    path_a: &PathBuf,
    path_b: &PathBuf,
    fmt: InputFormatArg,
) -> Result<ExitCode, Failure> {
    let a = load_network(path_a, fmt)?;
    let b = load_network(path_b, fmt)?;
    if a.n() != b.n() {
        println!("not isomorphic (vertex counts {} and {})", a.n(), b.n());
        return Ok(ExitCode::SUCCESS);
    }
    let perm = match Network::find_isomorphism_bruteforce(&a, &b) {
        Ok(p) => p,
        Err(GraphError::SearchBound { n }) => {
            return Err(Failure::bound(format!(
                "isomorphism search is limited to n <= 8, got n = {n}"
            )))
        }
        Err(e) => return Err(Failure::parse(e.to_string())),
    };
    let Some(perm) = perm else {
        println!("not isomorphic");
        return Ok(ExitCode::SUCCESS);
    };

    let mapping: Vec<String> = perm.mapping().iter().map(|&v| (v + 1).to_string()).collect();
    println!("isomorphic via vertex mapping [{}]", mapping.join(" "));

    let n = a.n();
    let kr = calibrated_kappa(opts, n)?;
    let base = log_base(opts);
    let cfg_a = mc_config(opts);
    let mut cfg_b = cfg_a.clone();
    cfg_b.seed = cfg_a.seed.wrapping_add(1);
    let est_a = estimate_volume(&a, kr.kappa, &cfg_a).map_err(|e| Failure::numeric(e.to_string()))?;
    let est_b = estimate_volume(&b, kr.kappa, &cfg_b).map_err(|e| Failure::numeric(e.to_string()))?;
    let ent_a = entropy(&est_a, base).map_err(|e| Failure::numeric(e.to_string()))?;
    let ent_b = entropy(&est_b, base).map_err(|e| Failure::numeric(e.to_string()))?;
    let combined = (ent_a.entropy_stderr.powi(2) + ent_b.entropy_stderr.powi(2)).sqrt();
    let sigmas = (ent_a.entropy - ent_b.entropy).abs() / combined.max(1e-300);
    println!(
        "entropy {}: {:.6} +- {:.2e}   (seed {})",
        path_a.display(),
        ent_a.entropy,
        ent_a.entropy_stderr,
        cfg_a.seed
    );
    println!(
        "entropy {}: {:.6} +- {:.2e}   (seed {})",
        path_b.display(),
        ent_b.entropy,
        ent_b.entropy_stderr,
        cfg_b.seed
    );
    println!("agreement: {sigmas:.2} sigma");
    Ok(ExitCode::SUCCESS)
}
