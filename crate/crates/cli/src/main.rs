//! Command-line interface: risk evaluation, bound reports, exact information
//! measures, Gibbs posteriors, and the Monte Carlo experiment commands.
//!
//! Exit codes: 0 on success; 1 on domain errors (tilt sign, absolute
//! continuity, enumeration cap, invalid values); 2 on usage and config
//! errors (unknown keys, missing assumptions, malformed files).

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tilted_risk::bounds::{
    info_bounded, info_unbounded, mcdiarmid_bounds, shift_bounds, supplementary_bounds,
    tilted_gibbs_bound, uniform_bounded, uniform_unbounded, BoundQuery, BoundReport,
    DirectionKind, InfoBoundedKind, ShiftKind, SupplementaryKind, TiltedGibbsKind, UniformKind,
    Zeta,
};
use tilted_risk::fmt::g12;
use tilted_risk::gibbs::{check_iskl_identity, tilted_gibbs_posterior, GibbsConfig};
use tilted_risk::harness::{
    coverage_csv, gibbs_csv, rate_csv, robustness_csv, run_coverage, run_gibbs, run_rate,
    run_robustness, ExperimentConfig, TiltSchedule,
};
use tilted_risk::info::{mutual_information_exact, LearningKernel};
use tilted_risk::risk::{ter, MomentBounds, Tilt};
use tilted_risk::spaces::{builtin_instances, resolve_instance};
use tilted_risk::{Dataset, DiscreteDistribution, Result, RiskError};

#[derive(Parser)]
#[command(name = "tilted-risk", version, about = "Tilted empirical risk, bound evaluators, and experiment harness", disable_help_subcommand = true)]
struct Cli {
    /// Base seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (affects speed only, never output).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the tilted empirical risk of a loss vector.
    Ter(TerArgs),
    /// Evaluate a closed-form bound and print its term breakdown.
    Bound(Box<BoundArgs>),
    /// Exact mutual information of a learning kernel on an instance.
    Info(InfoArgs),
    /// Tilted Gibbs posteriors, the symmetrized-KL identity, or the Gibbs
    /// experiment (with a config).
    Gibbs(GibbsArgs),
    /// Coverage experiment: empirical violation rate of a family's bound.
    Coverage(ExperimentArgs),
    /// Convergence-rate experiment: log-log slope of the realized error.
    Rate(ExperimentArgs),
    /// Robustness sweep over contamination levels.
    Robustness(ExperimentArgs),
    /// List the builtin instances.
    Catalog,
}

#[derive(Args)]
struct TerArgs {
    /// Comma-separated loss values.
    #[arg(long, allow_hyphen_values = true)]
    losses: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
}

#[derive(ValueEnum, Clone, Copy)]
enum FamilyArg {
    UniformBounded,
    UniformUnbounded,
    InfoBounded,
    InfoUnbounded,
    Shift,
    Mcdiarmid,
    Supplementary,
    TiltedGibbs,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Kind within the family, e.g. abs, upper, lower, excess, population,
    /// rademacher, stability, pac-bayes, gibbs-linear.
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Uniform loss bound M.
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long = "cardH")]
    card_h: Option<usize>,
    #[arg(long)]
    kappa_u: Option<f64>,
    #[arg(long)]
    kappa_s: Option<f64>,
    #[arg(long)]
    kappa_t: Option<f64>,
    /// "auto" or a value in (0, 1).
    #[arg(long, default_value = "auto")]
    zeta: String,
    /// Mutual information I(H;S) in nats.
    #[arg(long)]
    mi: Option<f64>,
    /// Comma-separated per-sample I(H;Z_i), enables the individual-sample mode.
    #[arg(long)]
    individual_mi: Option<String>,
    #[arg(long)]
    variance_exp: Option<f64>,
    #[arg(long)]
    variance_loss: Option<f64>,
    #[arg(long)]
    stability_beta: Option<f64>,
    #[arg(long)]
    pac_eta: Option<f64>,
    #[arg(long)]
    pac_kl: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    massart_b: Option<f64>,
    /// Unhalved total variation distance (range [0, 2]) for the shift family.
    #[arg(long)]
    tv: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy)]
enum KernelArg {
    TiltedGibbs,
    PlainGibbs,
    ArgminTer,
    Independent,
}

#[derive(Args)]
struct InfoArgs {
    /// Builtin instance name or path to an instance file.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::TiltedGibbs)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Fixed posterior for the independent kernel (comma-separated).
    #[arg(long)]
    posterior: Option<String>,
}

#[derive(Args)]
struct GibbsArgs {
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Dataset symbols (comma-separated) for a posterior evaluation.
    #[arg(long)]
    dataset: Option<String>,
    /// Check the symmetrized-KL identity at this n.
    #[arg(long)]
    identity: bool,
    #[arg(long)]
    n: Option<usize>,
    /// Experiment config file (switches to the experiment mode).
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// key=value overrides for the experiment mode.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective experiment config instead of running.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// key=value overrides applied on top of the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective config instead of running.
    #[arg(long)]
    dump_config: bool,
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| RiskError::config(format!("cannot parse {what} entry '{s}': {e}")))
        })
        .collect()
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| RiskError::config(format!("cannot parse {what} entry '{s}': {e}")))
        })
        .collect()
}

fn parse_zeta(text: &str) -> Result<Zeta> {
    if text.eq_ignore_ascii_case("auto") {
        Ok(Zeta::Auto)
    } else {
        text.parse::<f64>()
            .map(Zeta::Fixed)
            .map_err(|e| RiskError::config(format!("cannot parse zeta '{text}': {e}")))
    }
}

fn render_report(report: &BoundReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("family      {}\n", report.family));
    out.push_str(&format!("kind        {}\n", report.kind));
    out.push_str(&format!("value       {}\n", g12(report.value)));
    for (label, value) in &report.terms {
        out.push_str(&format!("term        {label} = {}\n", g12(*value)));
    }
    out.push_str(&format!("valid       {}\n", report.valid));
    for violation in &report.violations {
        out.push_str(&format!("violation   {violation}\n"));
    }
    out
}

fn eval_bound(args: &BoundArgs) -> Result<BoundReport> {
    let tilt = Tilt::new(args.gamma)?;
    let mut query = BoundQuery::new(args.delta, args.n, tilt);
    query.upper_bound_m = args.m;
    query.card_h = args.card_h;
    query.zeta = parse_zeta(&args.zeta)?;
    query.mutual_information = args.mi;
    query.variance_exp = args.variance_exp;
    query.variance_loss = args.variance_loss;
    query.stability_beta = args.stability_beta;
    query.pac_eta = args.pac_eta;
    query.pac_kl = args.pac_kl;
    query.lipschitz_loss = args.lipschitz;
    query.massart_b = args.massart_b;
    query.alpha = args.alpha;
    if args.kappa_u.is_some() || args.kappa_s.is_some() || args.kappa_t.is_some() {
        let kappa_u = args.kappa_u.unwrap_or(0.0);
        query.moments = Some(MomentBounds {
            kappa_u,
            kappa_s: args.kappa_s.unwrap_or(0.0),
            kappa_t: args.kappa_t.unwrap_or(kappa_u),
        });
    }
    let kind = args.kind.as_str();
    let unknown_kind =
        || RiskError::config(format!("unknown kind '{kind}' for the selected family"));
    match args.family {
        FamilyArg::UniformBounded | FamilyArg::UniformUnbounded => {
            let k = match kind {
                "upper" => UniformKind::Upper,
                "lower" => UniformKind::Lower,
                "abs" => UniformKind::Abs,
                "excess" => UniformKind::Excess,
                _ => return Err(unknown_kind()),
            };
            match args.family {
                FamilyArg::UniformBounded => uniform_bounded(&query, k),
                _ => uniform_unbounded(&query, k),
            }
        }
        FamilyArg::InfoBounded => {
            let k = match kind {
                "upper" => InfoBoundedKind::Upper,
                "lower" => InfoBoundedKind::Lower,
                "abs" => InfoBoundedKind::Abs,
                _ => return Err(unknown_kind()),
            };
            let list = args
                .individual_mi
                .as_deref()
                .map(|s| parse_f64_list(s, "individual_mi"))
                .transpose()?;
            info_bounded(&query, k, list.as_deref())
        }
        FamilyArg::InfoUnbounded => {
            let k = match kind {
                "upper" => DirectionKind::Upper,
                "lower" => DirectionKind::Lower,
                _ => return Err(unknown_kind()),
            };
            info_unbounded(&query, k)
        }
        FamilyArg::Shift => {
            let k = match kind {
                "population" => ShiftKind::Population,
                "upper" => ShiftKind::Upper,
                "lower" => ShiftKind::Lower,
                "abs" => ShiftKind::Abs,
                _ => return Err(unknown_kind()),
            };
            let tv = args.tv.ok_or(RiskError::MissingField { family: "shift", field: "tv" })?;
            shift_bounds(&query, tv, k)
        }
        FamilyArg::Mcdiarmid => {
            let k = match kind {
                "upper" => DirectionKind::Upper,
                "lower" => DirectionKind::Lower,
                _ => return Err(unknown_kind()),
            };
            mcdiarmid_bounds(&query, k)
        }
        FamilyArg::Supplementary => {
            let k = match kind {
                "rademacher" => SupplementaryKind::Rademacher,
                "stability" => SupplementaryKind::Stability,
                "pac-bayes" => SupplementaryKind::PacBayes,
                "gibbs-linear" => SupplementaryKind::GibbsLinear,
                _ => return Err(unknown_kind()),
            };
            supplementary_bounds(&query, k)
        }
        FamilyArg::TiltedGibbs => {
            let k = match kind {
                "upper" => TiltedGibbsKind::Upper,
                "abs" => TiltedGibbsKind::Abs,
                _ => return Err(unknown_kind()),
            };
            let alpha = args
                .alpha
                .ok_or(RiskError::MissingField { family: "tilted-gibbs", field: "alpha" })?;
            tilted_gibbs_bound(&query, alpha, k)
        }
    }
}

fn run_info(args: &InfoArgs) -> Result<String> {
    let instance = resolve_instance(&args.instance)?;
    let card_h = instance.loss.card_h();
    let prior = DiscreteDistribution::uniform(card_h)?;
    let kernel = match args.kernel {
        KernelArg::TiltedGibbs => LearningKernel::TiltedGibbs {
            alpha: args.alpha,
            tilt: Tilt::new(args.gamma)?,
            prior,
        },
        KernelArg::PlainGibbs => LearningKernel::PlainGibbs { alpha: args.alpha, prior },
        KernelArg::ArgminTer => LearningKernel::ArgminTer { tilt: Tilt::new(args.gamma)? },
        KernelArg::Independent => {
            let posterior = match &args.posterior {
                Some(text) => DiscreteDistribution::new(parse_f64_list(text, "posterior")?)?,
                None => prior,
            };
            LearningKernel::Independent { posterior }
        }
    };
    let report = mutual_information_exact(&kernel, &instance, args.n)?;
    let mut out = String::new();
    out.push_str(&format!("mutual_information          {}\n", g12(report.mutual_information)));
    out.push_str(&format!(
        "symmetrized_kl_information  {}\n",
        g12(report.symmetrized_kl_information)
    ));
    out.push_str(&format!("enumerated_datasets         {}\n", report.enumerated_datasets));
    for (h, &p) in report.marginal_posterior.weights().iter().enumerate() {
        out.push_str(&format!("marginal[{h}]                 {}\n", g12(p)));
    }
    Ok(out)
}

fn effective_config(
    path: Option<&std::path::Path>,
    overrides: &[String],
    seed_flag: u64,
) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig {
            instance: "bernoulli-2h".to_string(),
            family: "uniform-bounded".to_string(),
            n_grid: vec![64, 256, 1024],
            trials: 100,
            delta: 0.05,
            tilt_schedule: TiltSchedule::Constant { gamma: -0.1 },
            epsilon_grid: vec![],
            alpha: 1.0,
            seed: 0,
        },
    };
    if seed_flag != 0 {
        config.seed = seed_flag;
    }
    // schedule-kind switches first so later field overrides land on the
    // right variant
    for pass in 0..2 {
        for pair in overrides {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                RiskError::config(format!("override '{pair}' is not of the form key=value"))
            })?;
            let is_kind = key == "tilt_schedule.kind";
            if (pass == 0) != is_kind {
                continue;
            }
            apply_override(&mut config, key, value)?;
        }
    }
    Ok(config)
}

fn apply_override(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value
            .parse::<T>()
            .map_err(|e| RiskError::config(format!("override {key}={value}: {e}")))
    }
    match key {
        "instance" => config.instance = value.to_string(),
        "family" => config.family = value.to_string(),
        "trials" => config.trials = parsed(key, value)?,
        "delta" => config.delta = parsed(key, value)?,
        "alpha" => config.alpha = parsed(key, value)?,
        "seed" => config.seed = parsed(key, value)?,
        "n_grid" => config.n_grid = parse_usize_list(value, "n_grid")?,
        "epsilon_grid" => config.epsilon_grid = parse_f64_list(value, "epsilon_grid")?,
        "tilt_schedule.kind" => {
            config.tilt_schedule = match value {
                "constant" => TiltSchedule::Constant { gamma: -0.1 },
                "power" => TiltSchedule::Power { c: 1.0, beta: 0.5, positive: false },
                other => {
                    return Err(RiskError::config(format!(
                        "unknown tilt_schedule.kind '{other}' (constant or power)"
                    )))
                }
            }
        }
        "tilt_schedule.gamma" => match &mut config.tilt_schedule {
            TiltSchedule::Constant { gamma } => *gamma = parsed(key, value)?,
            _ => {
                return Err(RiskError::config(
                    "tilt_schedule.gamma applies to the constant schedule; set tilt_schedule.kind=constant first",
                ))
            }
        },
        "tilt_schedule.c" | "tilt_schedule.beta" | "tilt_schedule.positive" => {
            match &mut config.tilt_schedule {
                TiltSchedule::Power { c, beta, positive } => match key {
                    "tilt_schedule.c" => *c = parsed(key, value)?,
                    "tilt_schedule.beta" => *beta = parsed(key, value)?,
                    _ => *positive = parsed(key, value)?,
                },
                _ => {
                    return Err(RiskError::config(format!(
                        "{key} applies to the power schedule; set tilt_schedule.kind=power first"
                    )))
                }
            }
        }
        other => {
            return Err(RiskError::config(format!(
                "unknown config key '{other}' (known: instance, family, trials, delta, alpha, seed, n_grid, epsilon_grid, tilt_schedule.*)"
            )))
        }
    }
    Ok(())
}

fn run_gibbs_command(args: &GibbsArgs, seed: u64) -> Result<String> {
    if let Some(dataset_text) = &args.dataset {
        let name = args
            .instance
            .as_deref()
            .ok_or_else(|| RiskError::config("gibbs posterior mode needs --instance"))?;
        let instance = resolve_instance(name)?;
        let symbols = parse_usize_list(dataset_text, "dataset")?;
        let dataset = Dataset::new(symbols, instance.loss.alphabet_len())?;
        let config = GibbsConfig::with_uniform_prior(
            args.alpha,
            Tilt::new(args.gamma)?,
            instance.loss.card_h(),
        )?;
        let posterior = tilted_gibbs_posterior(&dataset, &instance.loss, &config)?;
        let mut out = String::new();
        for (h, &p) in posterior.weights().iter().enumerate() {
            out.push_str(&format!("posterior[{h}]  {}\n", g12(p)));
        }
        return Ok(out);
    }
    if args.identity {
        let name = args
            .instance
            .as_deref()
            .ok_or_else(|| RiskError::config("gibbs identity mode needs --instance"))?;
        let n = args.n.ok_or_else(|| RiskError::config("gibbs identity mode needs --n"))?;
        let instance = resolve_instance(name)?;
        let config = GibbsConfig::with_uniform_prior(
            args.alpha,
            Tilt::new(args.gamma)?,
            instance.loss.card_h(),
        )?;
        let id = check_iskl_identity(&instance, &config, n)?;
        return Ok(format!("lhs  {}\nrhs  {}\ngap  {}\n", g12(id.lhs), g12(id.rhs), g12(id.gap)));
    }
    let config = effective_config(args.config.as_deref(), &args.overrides, seed)?;
    if args.dump_config {
        return Ok(config.to_toml_string());
    }
    Ok(gibbs_csv(&run_gibbs(&config)?))
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Ter(args) => {
            let losses = parse_f64_list(&args.losses, "losses")?;
            let value = ter(&losses, Tilt::new(args.gamma)?)?;
            Ok(format!("{}\n", g12(value)))
        }
        Command::Bound(args) => Ok(render_report(&eval_bound(args)?)),
        Command::Info(args) => run_info(args),
        Command::Gibbs(args) => run_gibbs_command(args, cli.seed),
        Command::Coverage(args) => {
            let config = effective_config(args.config.as_deref(), &args.overrides, cli.seed)?;
            if args.dump_config {
                return Ok(config.to_toml_string());
            }
            let result = run_coverage(&config)?;
            let mut out = coverage_csv(&result.records);
            for (n, rate) in &result.summary {
                out.push_str(&format!("# violation_rate n={n}: {}\n", g12(*rate)));
            }
            Ok(out)
        }
        Command::Rate(args) => {
            let config = effective_config(args.config.as_deref(), &args.overrides, cli.seed)?;
            if args.dump_config {
                return Ok(config.to_toml_string());
            }
            let result = run_rate(&config)?;
            let mut out = rate_csv(&result);
            out.push_str(&format!("# slope_realized: {}\n", g12(result.slope_realized)));
            out.push_str(&format!("# slope_bound: {}\n", g12(result.slope_bound)));
            out.push_str(&format!("# status: {}\n", result.status));
            Ok(out)
        }
        Command::Robustness(args) => {
            let config = effective_config(args.config.as_deref(), &args.overrides, cli.seed)?;
            if args.dump_config {
                return Ok(config.to_toml_string());
            }
            Ok(robustness_csv(&run_robustness(&config)?))
        }
        Command::Catalog => {
            let mut out = String::from("name,card_H,alphabet,M,mu_tilde\n");
            for instance in builtin_instances() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    instance.name,
                    instance.loss.card_h(),
                    instance.loss.alphabet_len(),
                    instance.loss.upper_bound_m().map_or("-".to_string(), g12),
                    if instance.mu_tilde.is_some() { "yes" } else { "no" }
                ));
            }
            Ok(out)
        }
    }
}

fn exit_code_for(err: &RiskError) -> u8 {
    match err {
        RiskError::TiltSign(_)
        | RiskError::AbsoluteContinuity { .. }
        | RiskError::EnumerationTooLarge { .. }
        | RiskError::InvalidInput(_) => 1,
        RiskError::MissingField { .. } | RiskError::Config(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || dispatch(&cli);
    let result = match cli.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(RiskError::config(format!("cannot build thread pool: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{output}");
                let _ = std::io::stdout().flush();
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
