//! Seeded Monte Carlo experiments: bound coverage, convergence-rate slope
//! fitting, robustness sweeps over contamination levels, and exact Gibbs
//! checks. Every experiment is deterministic given its config: trials draw
//! from per-trial ChaCha streams keyed by `(seed, n_index·trials + trial)`,
//! results are aggregated in `(n, trial)` order, and the emitted CSV is
//! byte-identical at any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    shift_bounds, tilted_gibbs_bound, uniform_bounded, uniform_unbounded, BoundQuery, BoundReport,
    ShiftKind, TiltedGibbsKind, UniformKind,
};
use crate::error::{Result, RiskError};
use crate::fmt::g12;
use crate::gibbs::{check_iskl_identity, tilted_gibbs_posterior, GibbsConfig};
use crate::info::tv;
use crate::risk::{
    compute_moment_bounds, empirical_tilted_risk, population_risk, tilted_population_risk,
    Dataset, DiscreteDistribution, Tilt,
};
use crate::spaces::{contaminate, resolve_instance, sample_dataset, Instance, Seed};

/// Tilt schedule over the sample-size grid: a constant γ, or the power law
/// `γ = ±c·n^{−β}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TiltSchedule {
    Constant {
        gamma: f64,
    },
    Power {
        c: f64,
        beta: f64,
        /// Sign of the schedule; the default is the negative tilt used by
        /// the robustness-oriented families.
        #[serde(default)]
        positive: bool,
    },
}

impl TiltSchedule {
    pub fn gamma_at(&self, n: usize) -> f64 {
        match *self {
            TiltSchedule::Constant { gamma } => gamma,
            TiltSchedule::Power { c, beta, positive } => {
                let magnitude = c * (n as f64).powf(-beta);
                if positive {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }
}

fn default_trials() -> usize {
    1
}

fn default_delta() -> f64 {
    0.05
}

fn default_alpha() -> f64 {
    1.0
}

/// Configuration of one harness experiment. Field names are the config-file
/// schema; CLI overrides address them by the same names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin instance name or path to an instance file.
    pub instance: String,
    /// Bound family: `uniform-bounded`, `uniform-unbounded`, or `shift` for
    /// coverage/rate; `shift` for robustness; `tilted-gibbs` for gibbs runs.
    pub family: String,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub tilt_schedule: TiltSchedule,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RiskError::config(format!("config file: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RiskError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(RiskError::config("n_grid must be nonempty"));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(RiskError::config("n_grid must be strictly increasing"));
        }
        if self.n_grid[0] == 0 {
            return Err(RiskError::config("n_grid entries must be at least 1"));
        }
        if self.trials == 0 {
            return Err(RiskError::config("trials must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.delta) || self.delta <= 0.0 {
            return Err(RiskError::config(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(RiskError::config(format!("alpha = {} must be positive", self.alpha)));
        }
        for &e in &self.epsilon_grid {
            if !(0.0..=1.0).contains(&e) {
                return Err(RiskError::config(format!("epsilon = {e} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Instance> {
        self.validate()?;
        resolve_instance(&self.instance)
    }
}

/// One coverage trial: the realized sup over hypotheses of |gen_γ| against
/// the family's absolute bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub gamma: f64,
    pub realized_sup_gen: f64,
    pub bound: f64,
    pub valid: bool,
    pub violated: bool,
    pub seed_stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub records: Vec<TrialRecord>,
    /// Per-n violation rate (violations are only counted when the bound's
    /// validity flag is set).
    pub summary: Vec<(usize, f64)>,
}

fn family_abs_bound(
    family: &str,
    instance: &Instance,
    n: usize,
    gamma: f64,
    delta: f64,
) -> Result<BoundReport> {
    let tilt = Tilt::new(gamma)?;
    let mut query = BoundQuery::new(delta, n, tilt);
    query.card_h = Some(instance.loss.card_h());
    match family {
        "uniform-bounded" => {
            query.upper_bound_m = Some(instance.loss.upper_bound_m().ok_or_else(|| {
                RiskError::config(format!(
                    "instance '{}' lacks the uniform loss bound M required by the uniform-bounded family",
                    instance.name
                ))
            })?);
            uniform_bounded(&query, UniformKind::Abs)
        }
        "uniform-unbounded" => {
            if gamma >= 0.0 {
                return Err(RiskError::config(
                    "the uniform-unbounded family requires a negative tilt schedule".to_string(),
                ));
            }
            query.moments = Some(compute_moment_bounds(&instance.loss, &instance.mu, None, None)?);
            uniform_unbounded(&query, UniformKind::Abs)
        }
        "shift" => {
            if gamma >= 0.0 {
                return Err(RiskError::config(
                    "the shift family requires a negative tilt schedule".to_string(),
                ));
            }
            let mu_tilde = instance.mu_tilde.as_ref().ok_or_else(|| {
                RiskError::config(format!(
                    "instance '{}' lacks mu_tilde required by the shift family",
                    instance.name
                ))
            })?;
            query.moments =
                Some(compute_moment_bounds(&instance.loss, &instance.mu, Some(mu_tilde), None)?);
            let tv_value = tv(&instance.mu, mu_tilde)?;
            shift_bounds(&query, tv_value, ShiftKind::Abs)
        }
        other => Err(RiskError::config(format!(
            "family '{other}' is not a coverage family (use uniform-bounded, uniform-unbounded, or shift)"
        ))),
    }
}

/// Exact `sup_h |R(h, μ) − TER(h, S)|`; population risks are supplied
/// precomputed.
fn realized_sup_gen(
    instance: &Instance,
    pop_risks: &[f64],
    dataset: &Dataset,
    tilt: Tilt,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for (h, &r) in pop_risks.iter().enumerate() {
        let ter = empirical_tilted_risk(&instance.loss, h, dataset, tilt)?;
        sup = sup.max((r - ter).abs());
    }
    Ok(sup)
}

/// Coverage experiment: per (n, trial), sample a dataset, compute the exact
/// realized `sup_h |gen_γ|`, and compare against the family's absolute
/// bound. The sampling distribution is μ, except for the `shift` family
/// which samples from μ̃ while the generalization error stays measured
/// against the clean μ.
pub fn run_coverage(config: &ExperimentConfig) -> Result<CoverageResult> {
    let instance = config.resolve()?;
    let sampling = match config.family.as_str() {
        "shift" => instance
            .mu_tilde
            .clone()
            .ok_or_else(|| RiskError::config("shift coverage needs an instance with mu_tilde"))?,
        _ => instance.mu.clone(),
    };
    let pop_risks: Vec<f64> = (0..instance.loss.card_h())
        .map(|h| population_risk(h, &instance.loss, &instance.mu))
        .collect::<Result<_>>()?;

    // one bound evaluation per n; trials only vary the sample
    let bounds: Vec<(f64, BoundReport)> = config
        .n_grid
        .iter()
        .map(|&n| {
            let gamma = config.tilt_schedule.gamma_at(n);
            family_abs_bound(&config.family, &instance, n, gamma, config.delta)
                .map(|b| (gamma, b))
        })
        .collect::<Result<_>>()?;

    let trials = config.trials;
    let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|ni| (0..trials).map(move |t| (ni, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(ni, trial)| {
            let n = config.n_grid[ni];
            let (gamma, report) = &bounds[ni];
            let stream = (ni * trials + trial) as u64;
            let dataset = sample_dataset(&sampling, n, Seed::new(config.seed, stream))?;
            let tilt = Tilt::new(*gamma)?;
            let realized = realized_sup_gen(&instance, &pop_risks, &dataset, tilt)?;
            let violated = report.valid && realized > report.value;
            Ok(TrialRecord {
                n,
                trial,
                gamma: *gamma,
                realized_sup_gen: realized,
                bound: report.value,
                valid: report.valid,
                violated,
                seed_stream: stream,
            })
        })
        .collect::<Result<_>>()?;

    let summary = config
        .n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let violations = records[ni * trials..(ni + 1) * trials]
                .iter()
                .filter(|r| r.violated)
                .count();
            (n, violations as f64 / trials as f64)
        })
        .collect();
    Ok(CoverageResult { records, summary })
}

/// Per-n summary of a rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub mean_realized: f64,
    pub std_err: f64,
    pub bound_value: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub per_n: Vec<RatePoint>,
    /// Least-squares slope of log(mean realized sup|gen|) against log n;
    /// NaN when undefined (zero means).
    pub slope_realized: f64,
    /// Same fit applied to the analytic bound values.
    pub slope_bound: f64,
    pub status: String,
}

/// Unweighted least-squares slope of `log y` against `log n`. `None` when
/// fewer than two points or any `y ≤ 0`.
pub fn fit_loglog_slope(ns: &[usize], ys: &[f64]) -> Option<f64> {
    if ns.len() != ys.len() || ns.len() < 2 || ys.iter().any(|&y| y <= 0.0 || !y.is_finite()) {
        return None;
    }
    let k = ns.len() as f64;
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ls.iter().sum::<f64>() / k;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ls) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Convergence-rate experiment: mean realized `sup_h |gen_γ|` per n with its
/// standard error, the family bound per n, and log-log slopes of both.
pub fn run_rate(config: &ExperimentConfig) -> Result<RateResult> {
    let instance = config.resolve()?;
    if config.n_grid.len() < 4 {
        return Err(RiskError::config("rate experiments need an n_grid with at least 4 points"));
    }
    let ratio = *config.n_grid.last().unwrap() as f64 / config.n_grid[0] as f64;
    if ratio < 100.0 {
        return Err(RiskError::config(format!(
            "rate experiments need an n_grid spanning at least two decades, got ratio {ratio}"
        )));
    }
    let pop_risks: Vec<f64> = (0..instance.loss.card_h())
        .map(|h| population_risk(h, &instance.loss, &instance.mu))
        .collect::<Result<_>>()?;
    let trials = config.trials;

    let mut per_n = Vec::with_capacity(config.n_grid.len());
    for (ni, &n) in config.n_grid.iter().enumerate() {
        let gamma = config.tilt_schedule.gamma_at(n);
        let bound = family_abs_bound(&config.family, &instance, n, gamma, config.delta)?;
        let tilt = Tilt::new(gamma)?;
        let realized: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let stream = (ni * trials + trial) as u64;
                let dataset = sample_dataset(&instance.mu, n, Seed::new(config.seed, stream))?;
                realized_sup_gen(&instance, &pop_risks, &dataset, tilt)
            })
            .collect::<Result<_>>()?;
        let mean = realized.iter().sum::<f64>() / trials as f64;
        let std_err = if trials > 1 {
            let var = realized.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / (trials as f64 - 1.0);
            (var / trials as f64).sqrt()
        } else {
            0.0
        };
        per_n.push(RatePoint { n, mean_realized: mean, std_err, bound_value: bound.value, gamma });
    }

    let means: Vec<f64> = per_n.iter().map(|p| p.mean_realized).collect();
    let bound_vals: Vec<f64> = per_n.iter().map(|p| p.bound_value).collect();
    let slope_realized = fit_loglog_slope(&config.n_grid, &means);
    let slope_bound = fit_loglog_slope(&config.n_grid, &bound_vals);
    let status = if slope_realized.is_none() {
        "slope undefined: nonpositive mean realized generalization error in the grid".to_string()
    } else {
        "ok".to_string()
    };
    Ok(RateResult {
        per_n,
        slope_realized: slope_realized.unwrap_or(f64::NAN),
        slope_bound: slope_bound.unwrap_or(f64::NAN),
        status,
    })
}

/// One contamination level of a robustness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRecord {
    pub epsilon: f64,
    /// Unhalved total variation between μ and the ε-mixture.
    pub tv: f64,
    /// Worst realized `sup_h |gen_γ|` over the trials, with samples drawn
    /// from the mixture and risks measured against the clean μ.
    pub realized_sup_gen: f64,
    /// Shift-family absolute bound at this ε.
    pub bound: f64,
    /// The population-shift term `(tv/γ²)·D(κ_s, κ_u)` alone.
    pub population_term: f64,
    /// Exact `max_h |R_γ(h, μ) − R_γ(h, μ̃_ε)|`, for the population check.
    pub population_realized_max: f64,
    /// Whether the exact population check holds at this ε.
    pub population_ok: bool,
}

/// Robustness sweep over `epsilon_grid`: contaminate μ toward the instance's
/// μ̃, sample from the mixture, and evaluate the shift bounds with the exact
/// total variation. Runs at the largest n of the grid.
pub fn run_robustness(config: &ExperimentConfig) -> Result<Vec<RobustnessRecord>> {
    let instance = config.resolve()?;
    let outlier = instance
        .mu_tilde
        .as_ref()
        .ok_or_else(|| RiskError::config("robustness sweeps need an instance with mu_tilde"))?;
    if config.epsilon_grid.is_empty() {
        return Err(RiskError::config("robustness sweeps need a nonempty epsilon_grid"));
    }
    let n = *config.n_grid.last().unwrap();
    let gamma = config.tilt_schedule.gamma_at(n);
    if gamma >= 0.0 {
        return Err(RiskError::TiltSign(format!(
            "robustness sweeps require a negative tilt, got gamma = {gamma}"
        )));
    }
    let tilt = Tilt::new(gamma)?;
    let pop_risks: Vec<f64> = (0..instance.loss.card_h())
        .map(|h| population_risk(h, &instance.loss, &instance.mu))
        .collect::<Result<_>>()?;
    let trials = config.trials;

    let mut records = Vec::with_capacity(config.epsilon_grid.len());
    for (ei, &eps) in config.epsilon_grid.iter().enumerate() {
        let mixture = contaminate(&instance.mu, outlier, eps)?;
        let tv_value = tv(&instance.mu, &mixture)?;
        let moments = compute_moment_bounds(&instance.loss, &instance.mu, Some(&mixture), None)?;
        let mut query = BoundQuery::new(config.delta, n, tilt);
        query.card_h = Some(instance.loss.card_h());
        query.moments = Some(moments);
        let bound = shift_bounds(&query, tv_value, ShiftKind::Abs)?;
        let population_term = shift_bounds(&query, tv_value, ShiftKind::Population)?.value;

        let realized: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let stream = (ei * trials + trial) as u64;
                let dataset = sample_dataset(&mixture, n, Seed::new(config.seed, stream))?;
                realized_sup_gen(&instance, &pop_risks, &dataset, tilt)
            })
            .collect::<Result<_>>()?;
        let worst = realized.iter().cloned().fold(0.0f64, f64::max);

        let mut pop_max = 0.0f64;
        for h in 0..instance.loss.card_h() {
            let clean = tilted_population_risk(h, &instance.loss, &instance.mu, tilt)?;
            let shifted = tilted_population_risk(h, &instance.loss, &mixture, tilt)?;
            pop_max = pop_max.max((clean - shifted).abs());
        }
        let population_ok = pop_max <= population_term + 1e-12 * (1.0 + population_term);

        records.push(RobustnessRecord {
            epsilon: eps,
            tv: tv_value,
            realized_sup_gen: worst,
            bound: bound.value,
            population_term,
            population_realized_max: pop_max,
            population_ok,
        });
    }
    Ok(records)
}

/// One n of a Gibbs experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsRecord {
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    /// Expected tilted generalization error of the tilted Gibbs kernel,
    /// computed exactly by dataset enumeration (no sampling).
    pub expected_gen_exact: f64,
    /// Absolute bound on the expected tilted generalization error.
    pub bound: f64,
    /// Gap of the symmetrized-KL identity at this n.
    pub iskl_gap: f64,
}

/// Exact `E_{P_{H,S}}[R(H, μ) − TER(H, S)]` for the tilted Gibbs kernel.
fn expected_gen_exact(instance: &Instance, cfg: &GibbsConfig, n: usize) -> Result<f64> {
    let states = crate::info::checked_state_count(instance.mu.len(), n)?;
    let card_h = instance.loss.card_h();
    let pop_risks: Vec<f64> = (0..card_h)
        .map(|h| population_risk(h, &instance.loss, &instance.mu))
        .collect::<Result<_>>()?;
    let mut acc = 0.0f64;
    let mut symbols = vec![0usize; n];
    for idx in 0..states {
        crate::info::decode_dataset(idx, instance.mu.len(), &mut symbols);
        let w: f64 = symbols.iter().map(|&z| instance.mu.get(z)).product();
        if w == 0.0 {
            continue;
        }
        let ds = Dataset::new_unchecked(symbols.clone());
        let posterior = tilted_gibbs_posterior(&ds, &instance.loss, cfg)?;
        for (h, &pop) in pop_risks.iter().enumerate() {
            let ter = empirical_tilted_risk(&instance.loss, h, &ds, cfg.tilt)?;
            acc += w * posterior.get(h) * (pop - ter);
        }
    }
    Ok(acc)
}

/// Gibbs experiment: for each n, the exact expected tilted generalization
/// error of the tilted Gibbs kernel, the closed-form absolute bound, and the
/// symmetrized-KL identity gap. Requires the instance to carry M.
pub fn run_gibbs(config: &ExperimentConfig) -> Result<Vec<GibbsRecord>> {
    let instance = config.resolve()?;
    let m = instance.loss.upper_bound_m().ok_or_else(|| {
        RiskError::config(format!(
            "instance '{}' lacks the uniform loss bound M required by the tilted-gibbs bound",
            instance.name
        ))
    })?;
    let prior = DiscreteDistribution::uniform(instance.loss.card_h())?;
    let mut records = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let gamma = config.tilt_schedule.gamma_at(n);
        let tilt = Tilt::new(gamma)?;
        let gibbs_cfg = GibbsConfig::new(config.alpha, tilt, prior.clone())?;
        let expected = expected_gen_exact(&instance, &gibbs_cfg, n)?;
        let mut query = BoundQuery::new(config.delta, n, tilt);
        query.upper_bound_m = Some(m);
        let bound = tilted_gibbs_bound(&query, config.alpha, TiltedGibbsKind::Abs)?;
        let identity = check_iskl_identity(&instance, &gibbs_cfg, n)?;
        records.push(GibbsRecord {
            n,
            gamma,
            alpha: config.alpha,
            expected_gen_exact: expected,
            bound: bound.value,
            iskl_gap: identity.gap,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// CSV emission (exact headers; 12-significant-digit floats)
// ---------------------------------------------------------------------------

pub fn coverage_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("n,trial,gamma,realized_sup_gen,bound,valid,violated,seed_stream\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.trial,
            g12(r.gamma),
            g12(r.realized_sup_gen),
            g12(r.bound),
            r.valid,
            r.violated,
            r.seed_stream
        ));
    }
    out
}

pub fn rate_csv(result: &RateResult) -> String {
    let mut out = String::from("n,mean_realized,std_err,bound_value,gamma\n");
    for p in &result.per_n {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.n,
            g12(p.mean_realized),
            g12(p.std_err),
            g12(p.bound_value),
            g12(p.gamma)
        ));
    }
    out
}

pub fn robustness_csv(records: &[RobustnessRecord]) -> String {
    let mut out = String::from("epsilon,tv,realized_sup_gen,bound,population_term\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g12(r.epsilon),
            g12(r.tv),
            g12(r.realized_sup_gen),
            g12(r.bound),
            g12(r.population_term)
        ));
    }
    out
}

pub fn gibbs_csv(records: &[GibbsRecord]) -> String {
    let mut out = String::from("n,gamma,alpha,expected_gen_exact,bound,iskl_gap\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            g12(r.gamma),
            g12(r.alpha),
            g12(r.expected_gen_exact),
            g12(r.bound),
            g12(r.iskl_gap)
        ));
    }
    out
}
