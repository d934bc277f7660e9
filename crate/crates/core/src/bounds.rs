//! Closed-form bound evaluators, one per bound family.
//!
//! Every evaluator returns a [`BoundReport`] carrying the bound value, each
//! additive term under a stable label, and validity flags for all stated
//! preconditions. Failed parameter-range preconditions (e.g. the Bernstein
//! sample-size threshold) produce `valid = false` with a named violation
//! instead of an error, so parameter sweeps can record invalid regions;
//! sign and shape errors still fail hard.
//!
//! Families for strictly negative tilt (`uniform-unbounded`, `shift`,
//! `info-unbounded`) evaluate their formulas at the exact γ supplied, even
//! inside the zero-limit band, because no γ → 0 limit form exists for them;
//! the remaining families switch to their documented γ → 0 limit when
//! `|γ| < 1e-7`.
//!
//! A convention note for the `shift` family: its concentration terms use the
//! shifted-moment bound κ_s while the `−γκ_u²/2` term keeps the clean-moment
//! bound κ_u. The asymmetry is intentional and matches the closed forms this
//! module implements.
//!
//! The `info-bounded` family uses the expected-TER decomposition; an
//! alternative decomposition through the tilted population risk yields the
//! same leading concentration term and is intentionally not duplicated
//! here. Likewise, the Rademacher evaluator bounds the empirical Rademacher
//! complexity through the Massart constant rather than by enumerating sign
//! vectors.

use crate::error::{Result, RiskError};
use crate::fmt::g12;
use crate::risk::{MomentBounds, Tilt};

/// Free parameter ζ ∈ (0, 1) of the Bernstein-based lower bounds: either
/// user-fixed or grid-minimized.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Zeta {
    /// Pick the grid value in {0.1, …, 0.9} that minimizes the bound among
    /// those satisfying the sample-size threshold.
    #[default]
    Auto,
    Fixed(f64),
}

/// Inputs shared by the bound evaluators. Optional fields are only required
/// by the families that state them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    /// Confidence level δ ∈ (0, 1).
    pub delta: f64,
    /// Sample count n ≥ 1.
    pub n: usize,
    pub tilt: Tilt,
    pub card_h: Option<usize>,
    /// Uniform loss bound M.
    pub upper_bound_m: Option<f64>,
    pub moments: Option<MomentBounds>,
    pub zeta: Zeta,
    /// `I(H; S)` in nats.
    pub mutual_information: Option<f64>,
    pub stability_beta: Option<f64>,
    pub pac_eta: Option<f64>,
    pub pac_kl: Option<f64>,
    /// Lipschitz constant of the loss in the Rademacher bound.
    pub lipschitz_loss: Option<f64>,
    /// Massart constant `B = sqrt(max_h Σᵢ h²(zᵢ))`.
    pub massart_b: Option<f64>,
    /// `Var_μ(exp(γ·ℓ))`.
    pub variance_exp: Option<f64>,
    /// `E_{P_H}[Var_μ(ℓ)]`.
    pub variance_loss: Option<f64>,
    /// Inverse temperature α for the Gibbs-flavoured bounds.
    pub alpha: Option<f64>,
}

impl Default for BoundQuery {
    fn default() -> Self {
        BoundQuery {
            delta: 0.05,
            n: 1,
            tilt: Tilt::default(),
            card_h: None,
            upper_bound_m: None,
            moments: None,
            zeta: Zeta::Auto,
            mutual_information: None,
            stability_beta: None,
            pac_eta: None,
            pac_kl: None,
            lipschitz_loss: None,
            massart_b: None,
            variance_exp: None,
            variance_loss: None,
            alpha: None,
        }
    }
}

impl BoundQuery {
    pub fn new(delta: f64, n: usize, tilt: Tilt) -> Self {
        BoundQuery { delta, n, tilt, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta <= 0.0 || self.delta >= 1.0 {
            return Err(RiskError::invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.n == 0 {
            return Err(RiskError::invalid("n must be at least 1"));
        }
        let nonneg = |name: &str, v: Option<f64>| -> Result<()> {
            if let Some(x) = v {
                if !x.is_finite() || x < 0.0 {
                    return Err(RiskError::invalid(format!("{name} = {x} must be finite and >= 0")));
                }
            }
            Ok(())
        };
        nonneg("M", self.upper_bound_m)?;
        nonneg("mutual_information", self.mutual_information)?;
        nonneg("stability_beta", self.stability_beta)?;
        nonneg("pac_kl", self.pac_kl)?;
        nonneg("lipschitz_loss", self.lipschitz_loss)?;
        nonneg("massart_b", self.massart_b)?;
        nonneg("variance_exp", self.variance_exp)?;
        nonneg("variance_loss", self.variance_loss)?;
        if let Some(e) = self.pac_eta {
            if !e.is_finite() || e <= 0.0 {
                return Err(RiskError::invalid(format!("pac_eta = {e} must be positive")));
            }
        }
        if let Some(a) = self.alpha {
            if !a.is_finite() || a <= 0.0 {
                return Err(RiskError::invalid(format!("alpha = {a} must be positive")));
            }
        }
        if let Some(c) = self.card_h {
            if c == 0 {
                return Err(RiskError::invalid("card_h must be at least 1"));
            }
        }
        if let Some(mb) = self.moments {
            nonneg("kappa_u", Some(mb.kappa_u))?;
            nonneg("kappa_s", Some(mb.kappa_s))?;
            nonneg("kappa_t", Some(mb.kappa_t))?;
        }
        if let Zeta::Fixed(z) = self.zeta {
            if !z.is_finite() || z <= 0.0 || z >= 1.0 {
                return Err(RiskError::invalid(format!("zeta = {z} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// A bound value with its per-term breakdown and precondition report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub family: &'static str,
    pub kind: &'static str,
    /// Sum of `terms` (may be ±∞, never NaN).
    pub value: f64,
    pub terms: Vec<(String, f64)>,
    /// True iff `violations` is empty.
    pub valid: bool,
    pub violations: Vec<String>,
    /// Echo of the inputs the bound was evaluated at.
    pub query: BoundQuery,
}

impl BoundReport {
    fn assemble(
        family: &'static str,
        kind: &'static str,
        terms: Vec<(String, f64)>,
        violations: Vec<String>,
        query: &BoundQuery,
    ) -> Self {
        let value = terms.iter().map(|&(_, v)| v).sum();
        BoundReport {
            family,
            kind,
            value,
            valid: violations.is_empty(),
            terms,
            violations,
            query: query.clone(),
        }
    }
}

fn require<T: Copy>(field: Option<T>, family: &'static str, name: &'static str) -> Result<T> {
    field.ok_or(RiskError::MissingField { family, field: name })
}

fn require_negative_tilt(tilt: Tilt, family: &str) -> Result<f64> {
    let g = tilt.gamma();
    if g < 0.0 {
        Ok(g)
    } else {
        Err(RiskError::TiltSign(format!(
            "{family} bounds are stated only for gamma < 0, got gamma = {g}"
        )))
    }
}

/// `(exp(|γ|M) − 1)/|γ|`, with the limit value M in the zero-limit regime.
fn tilt_coefficient(tilt: Tilt, m: f64) -> f64 {
    if tilt.is_zero_limit() {
        m
    } else {
        (tilt.gamma().abs() * m).exp_m1() / tilt.gamma().abs()
    }
}

/// `A(γ) = (1 − exp(γM))²`.
fn a_gamma(gamma: f64, m: f64) -> f64 {
    let e = (gamma * m).exp_m1();
    e * e
}

/// `max(1, exp(−2γM))`, evaluated by sign branch.
fn max_one_exp(gamma: f64, m: f64) -> f64 {
    if gamma < 0.0 {
        (-2.0 * gamma * m).exp()
    } else {
        1.0
    }
}

/// `B(δ) = log card(H) + log(2/δ)`.
fn b_delta(card_h: usize, delta: f64) -> f64 {
    (card_h as f64).ln() + (2.0 / delta).ln()
}

/// Divided difference `D(κ_s, κ_u) = (e^{|γ|κ_u} − e^{|γ|κ_s})/(κ_u − κ_s)`,
/// replaced by its limit `|γ|·e^{|γ|κ_u}` when the moments coincide.
fn shift_divided_difference(gamma: f64, kappa_u: f64, kappa_s: f64) -> f64 {
    let ag = gamma.abs();
    if (kappa_u - kappa_s).abs() < 1e-12 {
        ag * (ag * kappa_u).exp()
    } else {
        ((ag * kappa_u).exp() - (ag * kappa_s).exp()) / (kappa_u - kappa_s)
    }
}

const ZETA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Resolves ζ against a feasibility predicate and a bound-value objective.
/// `Auto` picks the feasible grid point with the smallest bound value; when
/// no grid point is feasible it still picks the value-minimizing point but
/// reports the violation.
fn resolve_zeta(
    zeta: Zeta,
    n: usize,
    feasible: impl Fn(f64) -> (bool, String),
    value: impl Fn(f64) -> f64,
) -> (f64, Option<String>) {
    match zeta {
        Zeta::Fixed(z) => {
            let (ok, msg) = feasible(z);
            (z, if ok { None } else { Some(msg) })
        }
        Zeta::Auto => {
            let mut best_feasible: Option<(f64, f64)> = None;
            let mut best_any: Option<(f64, f64)> = None;
            for &z in &ZETA_GRID {
                let v = value(z);
                if best_any.is_none_or(|(bv, _)| v < bv) {
                    best_any = Some((v, z));
                }
                if feasible(z).0 && best_feasible.is_none_or(|(bv, _)| v < bv) {
                    best_feasible = Some((v, z));
                }
            }
            match best_feasible {
                Some((_, z)) => (z, None),
                None => {
                    let (_, z) = best_any.expect("zeta grid nonempty");
                    let (_, msg) = feasible(z);
                    (z, Some(format!("{msg}; no grid zeta satisfies the threshold at n={n}")))
                }
            }
        }
    }
}

fn bernstein_threshold(gamma: f64, kappa: f64, delta: f64, zeta: f64) -> f64 {
    (4.0 * gamma * gamma * kappa * kappa + 8.0 * zeta / 3.0) * (2.0 / delta).ln()
        / (zeta * zeta * (2.0 * gamma * kappa).exp())
}

fn threshold_violation(n: usize, thr: f64, zeta: f64) -> (bool, String) {
    let ok = (n as f64) >= thr;
    (
        ok,
        format!("n below Bernstein threshold: n={n} < {} (zeta={})", g12(thr), g12(zeta)),
    )
}

// ---------------------------------------------------------------------------
// bounded-loss uniform family
// ---------------------------------------------------------------------------

/// Kinds for the uniform families: signed upper/lower bounds on the tilted
/// generalization error, the sup-absolute bound, and the excess-risk bound
/// (term-by-term twice the absolute bound).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformKind {
    Upper,
    Lower,
    Abs,
    Excess,
}

impl UniformKind {
    fn name(self) -> &'static str {
        match self {
            UniformKind::Upper => "upper",
            UniformKind::Lower => "lower",
            UniformKind::Abs => "abs",
            UniformKind::Excess => "excess",
        }
    }
}

/// Exact sandwich between the population risk and the tilted population
/// risk: returns `(lower, upper)` for `R − R_γ` given `Var(exp(γℓ))`.
/// Both ends are zero in the zero-limit regime.
pub fn sandwich_true_vs_tilted(query: &BoundQuery, variance_exp: f64) -> Result<(f64, f64)> {
    query.validate()?;
    let m = require(query.upper_bound_m, "uniform-bounded", "M")?;
    if !variance_exp.is_finite() || variance_exp < 0.0 {
        return Err(RiskError::invalid(format!(
            "variance_exp = {variance_exp} must be finite and >= 0"
        )));
    }
    if query.tilt.is_zero_limit() {
        return Ok((0.0, 0.0));
    }
    let g = query.tilt.gamma();
    let lower = -variance_exp / (2.0 * g);
    let upper = -(-2.0 * g * m).exp() / (2.0 * g) * variance_exp;
    Ok((lower, upper))
}

/// Variance input with the worst-case cap `A(γ)/4` substituted when absent.
fn variance_or_worst_case(query: &BoundQuery, m: f64) -> (f64, &'static str) {
    match query.variance_exp {
        Some(v) => (v, "variance_term"),
        None => (a_gamma(query.tilt.gamma(), m) / 4.0, "variance_term[worst-case]"),
    }
}

/// High-probability bounds on the tilted generalization error under a
/// uniform loss bound M (Hoeffding concentration plus the sandwich term).
pub fn uniform_bounded(query: &BoundQuery, kind: UniformKind) -> Result<BoundReport> {
    query.validate()?;
    let m = require(query.upper_bound_m, "uniform-bounded", "M")?;
    let t = query.tilt;
    let g = t.gamma();
    let n = query.n as f64;
    let coef = tilt_coefficient(t, m);
    let ln2d = (2.0 / query.delta).ln();

    let terms = match kind {
        UniformKind::Upper => {
            let (v, label) = variance_or_worst_case(query, m);
            let var_term = if t.is_zero_limit() { 0.0 } else { -(-2.0 * g * m).exp() / (2.0 * g) * v };
            vec![
                (label.to_string(), var_term),
                ("concentration".to_string(), coef * (ln2d / (2.0 * n)).sqrt()),
            ]
        }
        UniformKind::Lower => {
            let (v, label) = variance_or_worst_case(query, m);
            let var_term = if t.is_zero_limit() { 0.0 } else { -v / (2.0 * g) };
            vec![
                (label.to_string(), var_term),
                ("concentration".to_string(), -coef * (ln2d / (2.0 * n)).sqrt()),
            ]
        }
        UniformKind::Abs | UniformKind::Excess => {
            let card_h = require(query.card_h, "uniform-bounded", "card_h")?;
            let conc = coef * (b_delta(card_h, query.delta) / (2.0 * n)).sqrt();
            let penalty = if t.is_zero_limit() {
                0.0
            } else {
                max_one_exp(g, m) * a_gamma(g, m) / (8.0 * g.abs())
            };
            let scale = if kind == UniformKind::Excess { 2.0 } else { 1.0 };
            vec![
                ("concentration".to_string(), scale * conc),
                ("tilt_penalty".to_string(), scale * penalty),
            ]
        }
    };
    Ok(BoundReport::assemble("uniform-bounded", kind.name(), terms, Vec::new(), query))
}

// ---------------------------------------------------------------------------
// unbounded-loss uniform family (γ < 0)
// ---------------------------------------------------------------------------

/// Bernstein-based bounds under a uniform second-moment bound κ_u, for
/// strictly negative tilt.
pub fn uniform_unbounded(query: &BoundQuery, kind: UniformKind) -> Result<BoundReport> {
    query.validate()?;
    let g = require_negative_tilt(query.tilt, "uniform-unbounded")?;
    let moments = require(query.moments, "uniform-unbounded", "moments")?;
    let ku = moments.kappa_u;
    let n = query.n as f64;
    let ln2d = (2.0 / query.delta).ln();
    let eku = (-g * ku).exp();
    let feasible = |z: f64| threshold_violation(query.n, bernstein_threshold(g, ku, query.delta, z), z);

    match kind {
        UniformKind::Upper => {
            let terms = vec![
                ("bernstein_sqrt".to_string(), 2.0 * ku * eku * (ln2d / n).sqrt()),
                ("bernstein_linear".to_string(), -4.0 * eku * ln2d / (3.0 * n * g)),
                ("moment_term".to_string(), -g / 2.0 * ku * ku),
            ];
            Ok(BoundReport::assemble("uniform-unbounded", kind.name(), terms, Vec::new(), query))
        }
        UniformKind::Lower => {
            let value = |z: f64| {
                -2.0 * ku * eku / (1.0 - z) * (ln2d / n).sqrt() + 4.0 * eku * ln2d / (3.0 * n * g * (1.0 - z))
            };
            let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, value);
            let zl = format!("[zeta={}]", g12(z));
            let terms = vec![
                (format!("bernstein_sqrt{zl}"), -2.0 * ku * eku / (1.0 - z) * (ln2d / n).sqrt()),
                (format!("bernstein_linear{zl}"), 4.0 * eku * ln2d / (3.0 * n * g * (1.0 - z))),
            ];
            Ok(BoundReport::assemble(
                "uniform-unbounded",
                kind.name(),
                terms,
                violation.into_iter().collect(),
                query,
            ))
        }
        UniformKind::Abs | UniformKind::Excess => {
            let card_h = require(query.card_h, "uniform-unbounded", "card_h")?;
            let b = b_delta(card_h, query.delta);
            let scale = if kind == UniformKind::Excess { 2.0 } else { 1.0 };
            let value = |z: f64| {
                2.0 * ku * eku / (1.0 - z) * (b / n).sqrt() - 4.0 * eku * b / (3.0 * n * g * (1.0 - z))
                    - g / 2.0 * ku * ku
            };
            let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, value);
            let zl = format!("[zeta={}]", g12(z));
            let terms = vec![
                (format!("bernstein_sqrt{zl}"), scale * 2.0 * ku * eku / (1.0 - z) * (b / n).sqrt()),
                (format!("bernstein_linear{zl}"), scale * -4.0 * eku * b / (3.0 * n * g * (1.0 - z))),
                ("moment_term".to_string(), scale * -g / 2.0 * ku * ku),
            ];
            Ok(BoundReport::assemble(
                "uniform-unbounded",
                kind.name(),
                terms,
                violation.into_iter().collect(),
                query,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// information-theoretic family, bounded loss
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoBoundedKind {
    Upper,
    Lower,
    Abs,
}

impl InfoBoundedKind {
    fn name(self) -> &'static str {
        match self {
            InfoBoundedKind::Upper => "upper",
            InfoBoundedKind::Lower => "lower",
            InfoBoundedKind::Abs => "abs",
        }
    }
}

/// Mutual-information bounds on the expected tilted generalization error
/// under a uniform loss bound. `individual_mi` switches the concentration
/// factor from `sqrt(I(H;S)/(2n))` to `(1/n)·Σᵢ sqrt(I(H;Zᵢ)/2)`.
pub fn info_bounded(
    query: &BoundQuery,
    kind: InfoBoundedKind,
    individual_mi: Option<&[f64]>,
) -> Result<BoundReport> {
    query.validate()?;
    let m = require(query.upper_bound_m, "info-bounded", "M")?;
    let t = query.tilt;
    let g = t.gamma();
    let n = query.n as f64;
    let coef = tilt_coefficient(t, m);

    let (mi_factor, mi_label) = match individual_mi {
        Some(list) => {
            if list.len() != query.n {
                return Err(RiskError::invalid(format!(
                    "individual_mi has {} entries, expected n = {}",
                    list.len(),
                    query.n
                )));
            }
            if let Some(bad) = list.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(RiskError::invalid(format!("individual_mi entry {bad} must be >= 0")));
            }
            let f = list.iter().map(|&i| (i / 2.0).sqrt()).sum::<f64>() / n;
            (f, "mi_term[individual-sample]")
        }
        None => {
            let i = require(query.mutual_information, "info-bounded", "mutual_information")?;
            ((i / (2.0 * n)).sqrt(), "mi_term")
        }
    };

    let variance_or_worst = || match query.variance_loss {
        Some(v) => (v, "variance_term"),
        None => (m * m / 4.0, "variance_term[worst-case]"),
    };

    let one_less = 1.0 - 1.0 / n;
    let terms = match kind {
        InfoBoundedKind::Upper => {
            let (v, label) = variance_or_worst();
            let var_term = if t.is_zero_limit() { 0.0 } else { -g * (-g * m).exp() / 2.0 * one_less * v };
            vec![(mi_label.to_string(), coef * mi_factor), (label.to_string(), var_term)]
        }
        InfoBoundedKind::Lower => {
            let (v, label) = variance_or_worst();
            let var_term = if t.is_zero_limit() { 0.0 } else { -g * (g * m).exp() / 2.0 * one_less * v };
            vec![(mi_label.to_string(), -coef * mi_factor), (label.to_string(), var_term)]
        }
        InfoBoundedKind::Abs => {
            let penalty = if t.is_zero_limit() {
                0.0
            } else {
                g.abs() * m * m * (g.abs() * m).exp() / 8.0 * one_less
            };
            vec![
                (mi_label.to_string(), coef * mi_factor),
                ("tilt_penalty".to_string(), penalty),
            ]
        }
    };
    Ok(BoundReport::assemble("info-bounded", kind.name(), terms, Vec::new(), query))
}

// ---------------------------------------------------------------------------
// information-theoretic family, unbounded loss (γ < 0)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    Upper,
    Lower,
}

impl DirectionKind {
    fn name(self) -> &'static str {
        match self {
            DirectionKind::Upper => "upper",
            DirectionKind::Lower => "lower",
        }
    }
}

/// Mutual-information bounds under the expected second-moment bound κ_t for
/// strictly negative tilt. The evaluator branches on the regime test
/// `I/n ≤ γ²κ_t²/2`; at exact equality both branch values are computed and
/// the branch-one value is reported, with the other noted in the term label.
pub fn info_unbounded(query: &BoundQuery, kind: DirectionKind) -> Result<BoundReport> {
    query.validate()?;
    let g = require_negative_tilt(query.tilt, "info-unbounded")?;
    let moments = require(query.moments, "info-unbounded", "moments")?;
    let i = require(query.mutual_information, "info-unbounded", "mutual_information")?;
    let kt = moments.kappa_t;
    let n = query.n as f64;
    let ekt = (-g * kt).exp();
    let rate = i / n;
    let half_g2k2 = g * g * kt * kt / 2.0;
    let low_branch = rate <= half_g2k2;
    let boundary = rate == half_g2k2 && i > 0.0;

    let low_value = ekt * kt * (i / n).sqrt();
    let high_value = -ekt / g * (rate + half_g2k2);
    let branch_label = |base: &str| {
        let mut label = format!(
            "{base}[branch={}]",
            if low_branch { "low-mi" } else { "high-mi" }
        );
        if boundary {
            label.push_str(&format!(
                "[boundary: other branch value {}]",
                g12(if low_branch { high_value } else { low_value })
            ));
        }
        label
    };

    match kind {
        DirectionKind::Upper => {
            let mi_term = if low_branch { low_value } else { high_value };
            let terms = vec![
                (branch_label("mi_term"), mi_term),
                ("moment_term".to_string(), -g / 2.0 * kt * kt),
            ];
            Ok(BoundReport::assemble("info-unbounded", kind.name(), terms, Vec::new(), query))
        }
        DirectionKind::Lower => {
            let mut violations = Vec::new();
            let (mi_term, zeta_suffix) = if low_branch {
                // feasibility: n ≥ γ²κ_t²·I / (ζ²·exp(2γκ_t))
                let feasible = |z: f64| {
                    let thr = g * g * kt * kt * i / (z * z * (2.0 * g * kt).exp());
                    threshold_violation(query.n, thr, z)
                };
                let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, |_| -low_value);
                violations.extend(violation);
                (-low_value, format!("[zeta={}]", g12(z)))
            } else {
                // feasibility: n < 4·(4ζ⁻² − 1)·I / (γ²κ_t²)
                let feasible = |z: f64| {
                    let ceil = 4.0 * (4.0 / (z * z) - 1.0) * i / (g * g * kt * kt);
                    let ok = n < ceil;
                    (
                        ok,
                        format!(
                            "n above high-MI validity ceiling: n={} >= {} (zeta={})",
                            query.n,
                            g12(ceil),
                            g12(z)
                        ),
                    )
                };
                let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, |_| -high_value);
                violations.extend(violation);
                (ekt / g * (rate + half_g2k2), format!("[zeta={}]", g12(z)))
            };
            let terms = vec![
                (format!("{}{zeta_suffix}", branch_label("mi_term")), mi_term),
                ("moment_term".to_string(), g / 2.0 * kt * kt),
            ];
            Ok(BoundReport::assemble("info-unbounded", kind.name(), terms, violations, query))
        }
    }
}

// ---------------------------------------------------------------------------
// distributional-shift family (γ < 0)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    /// Bound on `|R_γ(h, μ) − R_γ(h, μ̃)|` alone.
    Population,
    Upper,
    Lower,
    Abs,
}

impl ShiftKind {
    fn name(self) -> &'static str {
        match self {
            ShiftKind::Population => "population",
            ShiftKind::Upper => "upper",
            ShiftKind::Lower => "lower",
            ShiftKind::Abs => "abs",
        }
    }
}

/// Bounds under distributional shift. `tv_value` is the *unhalved* total
/// variation distance between μ and μ̃ (range [0, 2]).
pub fn shift_bounds(query: &BoundQuery, tv_value: f64, kind: ShiftKind) -> Result<BoundReport> {
    query.validate()?;
    let g = require_negative_tilt(query.tilt, "shift")?;
    let moments = require(query.moments, "shift", "moments")?;
    if !tv_value.is_finite() || !(0.0..=2.0).contains(&tv_value) {
        return Err(RiskError::invalid(format!(
            "tv = {tv_value} outside [0, 2] (unhalved total variation)"
        )));
    }
    let (ku, ks) = (moments.kappa_u, moments.kappa_s);
    let n = query.n as f64;
    let ln2d = (2.0 / query.delta).ln();
    let eks = (-g * ks).exp();
    let shift_term = tv_value / (g * g) * shift_divided_difference(g, ku, ks);
    let feasible = |z: f64| threshold_violation(query.n, bernstein_threshold(g, ku, query.delta, z), z);

    match kind {
        ShiftKind::Population => {
            let terms = vec![("population_shift".to_string(), shift_term)];
            Ok(BoundReport::assemble("shift", kind.name(), terms, Vec::new(), query))
        }
        ShiftKind::Upper => {
            let terms = vec![
                ("bernstein_sqrt".to_string(), 2.0 * ks * eks * (ln2d / n).sqrt()),
                ("bernstein_linear".to_string(), -4.0 * eks * ln2d / (3.0 * n * g)),
                ("moment_term".to_string(), -g / 2.0 * ku * ku),
                ("population_shift".to_string(), shift_term),
            ];
            Ok(BoundReport::assemble("shift", kind.name(), terms, Vec::new(), query))
        }
        ShiftKind::Lower => {
            let value = |z: f64| {
                -2.0 * ks * eks / (1.0 - z) * (ln2d / n).sqrt()
                    + 4.0 * eks * ln2d / (3.0 * n * g * (1.0 - z))
                    - shift_term
            };
            let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, value);
            let zl = format!("[zeta={}]", g12(z));
            let terms = vec![
                (format!("bernstein_sqrt{zl}"), -2.0 * ks * eks / (1.0 - z) * (ln2d / n).sqrt()),
                (format!("bernstein_linear{zl}"), 4.0 * eks * ln2d / (3.0 * n * g * (1.0 - z))),
                ("population_shift".to_string(), -shift_term),
            ];
            Ok(BoundReport::assemble(
                "shift",
                kind.name(),
                terms,
                violation.into_iter().collect(),
                query,
            ))
        }
        ShiftKind::Abs => {
            let card_h = require(query.card_h, "shift", "card_h")?;
            let b = b_delta(card_h, query.delta);
            let value = |z: f64| {
                2.0 * ks * eks / (1.0 - z) * (b / n).sqrt() - 4.0 * eks * b / (3.0 * n * g * (1.0 - z))
                    - g * ku * ku / 2.0
                    + shift_term
            };
            let (z, violation) = resolve_zeta(query.zeta, query.n, feasible, value);
            let zl = format!("[zeta={}]", g12(z));
            let terms = vec![
                (format!("bernstein_sqrt{zl}"), 2.0 * ks * eks / (1.0 - z) * (b / n).sqrt()),
                (format!("bernstein_linear{zl}"), -4.0 * eks * b / (3.0 * n * g * (1.0 - z))),
                ("moment_term".to_string(), -g * ku * ku / 2.0),
                ("population_shift".to_string(), shift_term),
            ];
            Ok(BoundReport::assemble(
                "shift",
                kind.name(),
                terms,
                violation.into_iter().collect(),
                query,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// McDiarmid family (bounded loss, alternative route)
// ---------------------------------------------------------------------------

/// Bounded-difference bounds with the replace-one constant
/// `c(γ) = |(1/γ)·log(1 + (1 − e^{|γ|M})/n)|`, valid for
/// `|γ| < log(n+1)/M`; outside that range the constant is infinite and the
/// report is flagged invalid.
pub fn mcdiarmid_bounds(query: &BoundQuery, kind: DirectionKind) -> Result<BoundReport> {
    query.validate()?;
    let m = require(query.upper_bound_m, "mcdiarmid", "M")?;
    let t = query.tilt;
    let g = t.gamma();
    let n = query.n as f64;
    let limit = ((n + 1.0).ln()) / m;
    let mut violations = Vec::new();
    if g.abs() >= limit {
        violations.push(format!(
            "tilt magnitude exceeds log(n+1)/M: |gamma|={} >= {}",
            g12(g.abs()),
            g12(limit)
        ));
    }
    let c = if t.is_zero_limit() {
        m / n
    } else {
        // log(1 + (1 − e^{|γ|M})/n)/γ via ln_1p, so small tilts keep full
        // relative precision
        let delta_arg = (-(g.abs() * m).exp_m1()) / n;
        if delta_arg <= -1.0 {
            f64::INFINITY
        } else {
            (delta_arg.ln_1p() / g).abs()
        }
    };
    let mcd = c * (n * (1.0 / query.delta).ln() / 2.0).sqrt();

    let terms = match kind {
        DirectionKind::Upper => {
            let window = if t.is_zero_limit() {
                0.0
            } else {
                (a_gamma(g, m) / (8.0 * g) * (1.0 / n - (-2.0 * g * m).exp())).abs()
            };
            vec![
                ("variance_window".to_string(), window),
                ("mcdiarmid".to_string(), mcd),
            ]
        }
        DirectionKind::Lower => {
            let (v, label) = variance_or_worst_case(query, m);
            let window = if t.is_zero_limit() {
                0.0
            } else {
                v / (2.0 * g) * ((-2.0 * g * m).exp() / n - 1.0)
            };
            vec![(label.to_string(), window), ("mcdiarmid".to_string(), -mcd)]
        }
    };
    Ok(BoundReport::assemble("mcdiarmid", kind.name(), terms, violations, query))
}

// ---------------------------------------------------------------------------
// supplementary bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupplementaryKind {
    Rademacher,
    Stability,
    PacBayes,
    GibbsLinear,
}

impl SupplementaryKind {
    fn name(self) -> &'static str {
        match self {
            SupplementaryKind::Rademacher => "rademacher",
            SupplementaryKind::Stability => "stability",
            SupplementaryKind::PacBayes => "pac-bayes",
            SupplementaryKind::GibbsLinear => "gibbs-linear",
        }
    }
}

/// Rademacher-complexity, uniform-stability, PAC-Bayes and linear-Gibbs
/// bounds. The Rademacher complexity itself is bounded through the Massart
/// constant `B·sqrt(2·log card(H))/n`.
///
/// The PAC-Bayes form uses the log-Lipschitz factor `L = max(1, e^{−γM})`
/// and the tilted range constant `A = (e^{|γ|M} − 1)/|γ|`, both of which
/// reduce to the classical constants (1 and M) as γ → 0.
pub fn supplementary_bounds(query: &BoundQuery, kind: SupplementaryKind) -> Result<BoundReport> {
    query.validate()?;
    let m = require(query.upper_bound_m, "supplementary", "M")?;
    let t = query.tilt;
    let g = t.gamma();
    let n = query.n as f64;
    let zl = t.is_zero_limit();

    let terms = match kind {
        SupplementaryKind::Rademacher => {
            let lip = require(query.lipschitz_loss, "supplementary", "lipschitz_loss")?;
            let b = require(query.massart_b, "supplementary", "massart_b")?;
            let card_h = require(query.card_h, "supplementary", "card_h")?;
            let penalty = if zl { 0.0 } else { max_one_exp(g, m) * a_gamma(g, m) / (8.0 * g.abs()) };
            let exp_gm = if zl { 1.0 } else { (g.abs() * m).exp() };
            let rad = 2.0 * exp_gm * lip * b * (2.0 * (card_h as f64).ln()).sqrt() / n;
            let conc = 3.0 * tilt_coefficient(t, m) * ((1.0 / query.delta).ln() / (2.0 * n)).sqrt();
            vec![
                ("tilt_penalty".to_string(), penalty),
                ("rademacher".to_string(), rad),
                ("concentration".to_string(), conc),
            ]
        }
        SupplementaryKind::Stability => {
            let beta = require(query.stability_beta, "supplementary", "stability_beta")?;
            let window = if zl {
                0.0
            } else {
                a_gamma(g, m) * (1.0 + (-2.0 * g * m).exp()) / (8.0 * g.abs())
            };
            let stab = if zl { beta } else { (g.abs() * m).exp() * beta };
            vec![
                ("variance_window".to_string(), window),
                ("stability".to_string(), stab),
            ]
        }
        SupplementaryKind::PacBayes => {
            let eta = require(query.pac_eta, "supplementary", "pac_eta")?;
            let kl = require(query.pac_kl, "supplementary", "pac_kl")?;
            let penalty = if zl { 0.0 } else { max_one_exp(g, m) * a_gamma(g, m) / (8.0 * g.abs()) };
            let lip = if zl || g > 0.0 { 1.0 } else { (-g * m).exp() };
            let a = tilt_coefficient(t, m);
            vec![
                ("tilt_penalty".to_string(), penalty),
                ("catoni_range".to_string(), lip * eta * a * a / (8.0 * n)),
                ("catoni_kl".to_string(), lip * (kl + (1.0 / query.delta).ln()) / eta),
            ]
        }
        SupplementaryKind::GibbsLinear => {
            let alpha = require(query.alpha, "supplementary", "alpha")?;
            let penalty = if zl { 0.0 } else { max_one_exp(g, m) * a_gamma(g, m) / (8.0 * g.abs()) };
            vec![
                ("gibbs_term".to_string(), alpha * m * m / (2.0 * n)),
                ("tilt_penalty".to_string(), penalty),
            ]
        }
    };
    Ok(BoundReport::assemble("supplementary", kind.name(), terms, Vec::new(), query))
}

// ---------------------------------------------------------------------------
// tilted Gibbs posterior bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiltedGibbsKind {
    Upper,
    Abs,
}

impl TiltedGibbsKind {
    fn name(self) -> &'static str {
        match self {
            TiltedGibbsKind::Upper => "upper",
            TiltedGibbsKind::Abs => "abs",
        }
    }
}

/// Bound on the expected tilted generalization error of the tilted Gibbs
/// posterior with inverse temperature α; the leading term decays like
/// `α·M²/(2n)` as γ → 0.
pub fn tilted_gibbs_bound(query: &BoundQuery, alpha: f64, kind: TiltedGibbsKind) -> Result<BoundReport> {
    query.validate()?;
    let m = require(query.upper_bound_m, "tilted-gibbs", "M")?;
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(RiskError::invalid(format!("alpha = {alpha} must be positive")));
    }
    let t = query.tilt;
    let g = t.gamma();
    let n = query.n as f64;
    let zl = t.is_zero_limit();
    let first = if zl {
        alpha * m * m / (2.0 * n)
    } else {
        let e = (g.abs() * m).exp_m1();
        alpha * e * e / (2.0 * g * g * n)
    };
    let one_less = 1.0 - 1.0 / n;
    let terms = match kind {
        TiltedGibbsKind::Upper => {
            let (v, label) = match query.variance_loss {
                Some(v) => (v, "variance_term"),
                None => (m * m / 4.0, "variance_term[worst-case]"),
            };
            let second = if zl { 0.0 } else { -g * (-g * m).exp() / 2.0 * one_less * v };
            vec![("gibbs_term".to_string(), first), (label.to_string(), second)]
        }
        TiltedGibbsKind::Abs => {
            let second = if zl { 0.0 } else { g.abs() * m * m * (g.abs() * m).exp() / 8.0 * one_less };
            vec![
                ("gibbs_term".to_string(), first),
                ("tilt_penalty".to_string(), second),
            ]
        }
    };
    Ok(BoundReport::assemble("tilted-gibbs", kind.name(), terms, Vec::new(), query))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tilt(g: f64) -> Tilt {
        Tilt::new(g).unwrap()
    }

    fn q(delta: f64, n: usize, g: f64) -> BoundQuery {
        BoundQuery::new(delta, n, tilt(g))
    }

    fn term(report: &BoundReport, prefix: &str) -> f64 {
        report
            .terms
            .iter()
            .find(|(l, _)| l.starts_with(prefix))
            .unwrap_or_else(|| panic!("no term starting with {prefix}: {:?}", report.terms))
            .1
    }

    #[test]
    fn sandwich_examples() {
        let mut query = q(0.05, 10, -1.0);
        query.upper_bound_m = Some(1.0);
        assert_eq!(sandwich_true_vs_tilted(&query, 0.0).unwrap(), (0.0, 0.0));

        let (lo, hi) = sandwich_true_vs_tilted(&query, 0.04).unwrap();
        assert!((lo - 0.02).abs() < 1e-15);
        assert!((hi - 0.147_781_121_978_613).abs() < 1e-14);

        let mut zl = q(0.05, 10, 1e-9);
        zl.upper_bound_m = Some(1.0);
        assert_eq!(sandwich_true_vs_tilted(&zl, 0.3).unwrap(), (0.0, 0.0));

        let missing = q(0.05, 10, -1.0);
        assert!(matches!(
            sandwich_true_vs_tilted(&missing, 0.1),
            Err(RiskError::MissingField { field: "M", .. })
        ));
    }

    #[test]
    fn uniform_bounded_zero_limit_matches_linear_form() {
        let mut query = q(0.05, 100, 1e-9);
        query.upper_bound_m = Some(1.0);
        query.card_h = Some(10);
        let report = uniform_bounded(&query, UniformKind::Abs).unwrap();
        assert!((report.value - 0.17308183826022853).abs() < 1e-14);
        assert_eq!(term(&report, "tilt_penalty"), 0.0);
        assert!(report.valid);
    }

    #[test]
    fn uniform_bounded_upper_zero_variance() {
        let mut query = q(0.05, 50, -0.5);
        query.upper_bound_m = Some(1.0);
        query.variance_exp = Some(0.0);
        let report = uniform_bounded(&query, UniformKind::Upper).unwrap();
        assert_eq!(term(&report, "variance_term"), 0.0);
    }

    #[test]
    fn uniform_bounded_abs_frozen_value() {
        let mut query = q(0.05, 64, -0.1);
        query.upper_bound_m = Some(1.0);
        query.card_h = Some(2);
        let report = uniform_bounded(&query, UniformKind::Abs).unwrap();
        assert!((report.value - 0.20841958854933956).abs() < 1e-13, "value={}", report.value);
    }

    #[test]
    fn excess_is_twice_abs_term_by_term() {
        let mut query = q(0.1, 200, -0.7);
        query.upper_bound_m = Some(2.0);
        query.card_h = Some(6);
        let abs = uniform_bounded(&query, UniformKind::Abs).unwrap();
        let excess = uniform_bounded(&query, UniformKind::Excess).unwrap();
        for ((la, va), (le, ve)) in abs.terms.iter().zip(&excess.terms) {
            assert_eq!(la, le);
            assert!((ve - 2.0 * va).abs() < 1e-15);
        }

        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
        let abs = uniform_unbounded(&query, UniformKind::Abs).unwrap();
        let excess = uniform_unbounded(&query, UniformKind::Excess).unwrap();
        for ((la, va), (le, ve)) in abs.terms.iter().zip(&excess.terms) {
            assert_eq!(la, le);
            assert!((ve - 2.0 * va).abs() < 1e-15);
        }
    }

    #[test]
    fn limit_agreement_just_outside_band() {
        // continuity across the zero-limit seam: the exact evaluator at
        // |γ| = 1e-7 stays within 1e-4 relative of the limit form (the
        // vanishing penalty terms still contribute ~|γ|·M²/8 there)
        for (m, card_h, n) in [(1.0, 10usize, 100usize), (2.5, 4, 2000), (0.3, 50, 10)] {
            let mut limit_q = q(0.05, n, 1e-9);
            limit_q.upper_bound_m = Some(m);
            limit_q.card_h = Some(card_h);
            let mut exact_q = limit_q.clone();
            exact_q.tilt = tilt(1e-7);
            let limit = uniform_bounded(&limit_q, UniformKind::Abs).unwrap().value;
            let exact = uniform_bounded(&exact_q, UniformKind::Abs).unwrap().value;
            assert!((exact - limit).abs() <= 1e-4 * limit, "m={m} exact={exact} limit={limit}");

            let limit = mcdiarmid_bounds(&limit_q, DirectionKind::Upper).unwrap().value;
            let exact = mcdiarmid_bounds(&exact_q, DirectionKind::Upper).unwrap().value;
            assert!((exact - limit).abs() <= 1e-4 * limit);

            let limit = tilted_gibbs_bound(&limit_q, 2.0, TiltedGibbsKind::Abs).unwrap().value;
            let exact = tilted_gibbs_bound(&exact_q, 2.0, TiltedGibbsKind::Abs).unwrap().value;
            assert!((exact - limit).abs() <= 1e-4 * limit);
        }
    }

    #[test]
    fn unbounded_rejects_nonnegative_tilt() {
        let mut query = q(0.05, 100, 0.5);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
        assert!(matches!(
            uniform_unbounded(&query, UniformKind::Upper),
            Err(RiskError::TiltSign(_))
        ));
    }

    #[test]
    fn unbounded_lower_threshold_violation() {
        let mut query = q(0.05, 1, -0.5);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
        query.zeta = Zeta::Fixed(0.5);
        let report = uniform_unbounded(&query, UniformKind::Lower).unwrap();
        assert!(!report.valid);
        assert!(report.violations[0].contains("Bernstein threshold"));
        // threshold at zeta = 0.5 is ≈ 93.59
        assert!(report.violations[0].contains("93.589"));
    }

    #[test]
    fn unbounded_abs_decreases_with_n() {
        // γ = −n^{−1/2} schedule; value frozen from direct evaluation
        let eval = |n: usize| {
            let mut query = q(0.05, n, -1.0 / (n as f64).sqrt());
            query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
            query.card_h = Some(8);
            uniform_unbounded(&query, UniformKind::Abs).unwrap()
        };
        let coarse = eval(4096);
        let fine = eval(16384);
        assert!(coarse.valid && fine.valid);
        assert!((coarse.value - 0.228_147_937_307_783_7).abs() < 1e-13);
        assert!((fine.value - 0.11321663666559914).abs() < 1e-13);
        assert!(fine.value < coarse.value);
    }

    #[test]
    fn info_bounded_examples() {
        // zero mutual information: only the variance penalty remains
        let mut query = q(0.05, 100, -0.1);
        query.upper_bound_m = Some(1.0);
        query.mutual_information = Some(0.0);
        let report = info_bounded(&query, InfoBoundedKind::Abs, None).unwrap();
        assert_eq!(term(&report, "mi_term"), 0.0);
        assert!(term(&report, "tilt_penalty") > 0.0);

        // n = 1 kills the variance penalty (factor 1 − 1/n)
        let mut one = q(0.05, 1, -0.7);
        one.upper_bound_m = Some(1.0);
        one.mutual_information = Some(0.3);
        let report = info_bounded(&one, InfoBoundedKind::Abs, None).unwrap();
        assert_eq!(term(&report, "tilt_penalty"), 0.0);

        // frozen arithmetic value
        query.mutual_information = Some(0.2);
        let report = info_bounded(&query, InfoBoundedKind::Abs, None).unwrap();
        assert!((report.value - 0.046934454584188068).abs() < 1e-14);
    }

    #[test]
    fn info_bounded_individual_sample_mode() {
        let mut query = q(0.05, 100, -0.1);
        query.upper_bound_m = Some(1.0);
        query.mutual_information = Some(2.0);
        let aggregated = info_bounded(&query, InfoBoundedKind::Abs, None).unwrap();
        // I(H;Zᵢ) = 0.02 each gives the same concentration factor as I = 2
        let per_sample = vec![0.02; 100];
        let individual = info_bounded(&query, InfoBoundedKind::Abs, Some(&per_sample)).unwrap();
        assert!((term(&aggregated, "mi_term") - term(&individual, "mi_term")).abs() < 1e-13);

        let short = vec![0.02; 7];
        assert!(info_bounded(&query, InfoBoundedKind::Abs, Some(&short)).is_err());
    }

    #[test]
    fn info_unbounded_examples() {
        // I = 0 collapses to the moment term alone
        let mut query = q(0.05, 100, -0.4);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
        query.mutual_information = Some(0.0);
        let report = info_unbounded(&query, DirectionKind::Upper).unwrap();
        assert!((report.value - 0.2 * 1.0).abs() < 1e-15);
        assert!(term(&report, "mi_term[branch=low-mi]").abs() < 1e-15);

        // frozen branch-one value
        let mut query = q(0.05, 1000, -0.2);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: 1.0 });
        query.mutual_information = Some(0.01);
        let report = info_unbounded(&query, DirectionKind::Upper).unwrap();
        assert!((report.value - 0.10386241465619795).abs() < 1e-14, "value={}", report.value);

        // exact regime boundary: both branches evaluated, branch one reported
        let g: f64 = -0.2;
        let kt: f64 = 1.0;
        let n = 1000usize;
        let boundary_i = n as f64 * (g * g * kt * kt / 2.0);
        let mut query = q(0.05, n, g);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 0.0, kappa_t: kt });
        query.mutual_information = Some(boundary_i);
        let report = info_unbounded(&query, DirectionKind::Upper).unwrap();
        let label = &report.terms[0].0;
        assert!(label.contains("branch=low-mi"), "label={label}");
        assert!(label.contains("boundary"), "label={label}");
        let ekt = (-g * kt).exp();
        let expected_low = ekt * kt * (boundary_i / n as f64).sqrt();
        assert!((report.terms[0].1 - expected_low).abs() < 1e-14);

        assert!(matches!(
            info_unbounded(&q(0.05, 10, 0.3), DirectionKind::Upper),
            Err(RiskError::TiltSign(_))
        ));
    }

    #[test]
    fn shift_examples() {
        let mut query = q(0.05, 100, -1.0);
        query.moments = Some(MomentBounds { kappa_u: 1.0, kappa_s: 1.0, kappa_t: 1.0 });
        // tv = 0 gives a zero population term
        let report = shift_bounds(&query, 0.0, ShiftKind::Population).unwrap();
        assert_eq!(report.value, 0.0);
        // identical moments engage the divided-difference limit |γ|e^{|γ|κ}
        let report = shift_bounds(&query, 0.5, ShiftKind::Population).unwrap();
        assert!((report.value - 1.3591409142295226).abs() < 1e-13);
        // distinct moments use the divided difference directly
        query.moments = Some(MomentBounds { kappa_u: 2.0, kappa_s: 1.0, kappa_t: 2.0 });
        let report = shift_bounds(&query, 0.4, ShiftKind::Population).unwrap();
        assert!((report.value - 1.868_309_708_188_642).abs() < 1e-13);

        assert!(matches!(
            shift_bounds(&q(0.05, 10, 0.5), 0.1, ShiftKind::Population),
            Err(RiskError::TiltSign(_))
        ));
        assert!(shift_bounds(&query, 2.5, ShiftKind::Population).is_err());
    }

    #[test]
    fn mcdiarmid_examples() {
        // constraint violation flags the report and the constant is infinite
        let mut query = q(0.05, 3, -2.0);
        query.upper_bound_m = Some(1.0);
        let report = mcdiarmid_bounds(&query, DirectionKind::Upper).unwrap();
        assert!(!report.valid);
        assert!(report.violations[0].contains("log(n+1)/M"));
        assert_eq!(report.value, f64::INFINITY);

        // zero-limit: c = M/n exactly
        let mut query = q(0.05, 100, 1e-9);
        query.upper_bound_m = Some(1.0);
        let report = mcdiarmid_bounds(&query, DirectionKind::Upper).unwrap();
        let expected = (1.0 / 100.0) * (100.0f64 * 20.0f64.ln() / 2.0).sqrt();
        assert!((report.value - expected).abs() < 1e-15);

        // frozen arithmetic value
        let mut query = q(0.05, 100, -0.05);
        query.upper_bound_m = Some(1.0);
        let report = mcdiarmid_bounds(&query, DirectionKind::Upper).unwrap();
        assert!((report.value - 0.132_043_196_014_424_5).abs() < 1e-13, "value={}", report.value);
    }

    #[test]
    fn supplementary_examples() {
        // stability with β = 0 leaves the variance window alone
        let mut query = q(0.05, 100, -0.5);
        query.upper_bound_m = Some(1.0);
        query.stability_beta = Some(0.0);
        let report = supplementary_bounds(&query, SupplementaryKind::Stability).unwrap();
        assert!((report.value - 0.143_914_352_201_241_1).abs() < 1e-14);

        // PAC-Bayes with KL = 0, η = sqrt(n): finite, frozen value
        let mut query = q(0.05, 100, -0.1);
        query.upper_bound_m = Some(1.0);
        query.pac_eta = Some(10.0);
        query.pac_kl = Some(0.0);
        let report = supplementary_bounds(&query, SupplementaryKind::PacBayes).unwrap();
        assert!(report.value.is_finite());
        assert!((report.value - 0.360_186_032_882_483_2).abs() < 1e-13, "value={}", report.value);

        // Rademacher with B = sqrt(n) in the zero-limit regime
        let mut query = q(0.05, 100, 1e-9);
        query.upper_bound_m = Some(1.0);
        query.lipschitz_loss = Some(1.0);
        query.massart_b = Some(10.0);
        query.card_h = Some(10);
        let report = supplementary_bounds(&query, SupplementaryKind::Rademacher).unwrap();
        assert!((report.value - 0.796_355_229_859_992).abs() < 1e-13);
        assert_eq!(term(&report, "tilt_penalty"), 0.0);

        // linear-Gibbs in the zero-limit regime collapses to αM²/(2n)
        let mut query = q(0.05, 50, 1e-9);
        query.upper_bound_m = Some(2.0);
        query.alpha = Some(3.0);
        let report = supplementary_bounds(&query, SupplementaryKind::GibbsLinear).unwrap();
        assert!((report.value - 3.0 * 4.0 / 100.0).abs() < 1e-15);
    }

    #[test]
    fn tilted_gibbs_examples() {
        // n = 1 kills the second term
        let mut query = q(0.05, 1, -0.8);
        query.upper_bound_m = Some(1.0);
        let report = tilted_gibbs_bound(&query, 2.0, TiltedGibbsKind::Abs).unwrap();
        assert_eq!(term(&report, "tilt_penalty"), 0.0);

        // zero-limit first term is αM²/(2n)
        let mut query = q(0.05, 100, 1e-9);
        query.upper_bound_m = Some(1.0);
        let report = tilted_gibbs_bound(&query, 2.0, TiltedGibbsKind::Abs).unwrap();
        assert!((report.value - 2.0 / 200.0).abs() < 1e-15);

        // frozen value at γ = −1/n
        let mut query = q(0.05, 100, -0.01);
        query.upper_bound_m = Some(1.0);
        let report = tilted_gibbs_bound(&query, 2.0, TiltedGibbsKind::Abs).unwrap();
        assert!((report.value - 0.011350522923736166).abs() < 1e-14);

        // halving |γ| at fixed n changes only the leading term... both terms
        // move, but the tilt penalty scales by exactly the γ-ratio structure
        let mut half = query.clone();
        half.tilt = tilt(-0.005);
        let hreport = tilted_gibbs_bound(&half, 2.0, TiltedGibbsKind::Abs).unwrap();
        assert!((term(&hreport, "gibbs_term") - 0.010_050_146_146_372_31).abs() < 1e-14);
        assert!((term(&hreport, "tilt_penalty") - 0.000_621_851_497_281_754_4).abs() < 1e-14);
    }

    #[test]
    fn zeta_auto_never_beaten_by_feasible_grid_point() {
        let mut query = q(0.05, 512, -0.3);
        query.moments = Some(MomentBounds { kappa_u: 1.2, kappa_s: 0.0, kappa_t: 1.2 });
        query.card_h = Some(4);
        let auto = uniform_unbounded(&query, UniformKind::Abs).unwrap();
        assert!(auto.valid);
        for &z in &ZETA_GRID {
            let mut fixed = query.clone();
            fixed.zeta = Zeta::Fixed(z);
            let report = uniform_unbounded(&fixed, UniformKind::Abs).unwrap();
            if report.valid {
                assert!(auto.value <= report.value + 1e-12);
            }
        }
    }

    #[test]
    fn reports_sum_and_flag_consistently() {
        let mut query = q(0.05, 64, -0.25);
        query.upper_bound_m = Some(1.5);
        query.card_h = Some(7);
        query.moments = Some(MomentBounds { kappa_u: 0.9, kappa_s: 1.1, kappa_t: 0.9 });
        query.mutual_information = Some(0.4);
        query.variance_exp = Some(0.02);
        query.variance_loss = Some(0.1);
        query.stability_beta = Some(0.01);
        query.pac_eta = Some(8.0);
        query.pac_kl = Some(0.3);
        query.lipschitz_loss = Some(1.0);
        query.massart_b = Some(8.0);
        query.alpha = Some(2.0);

        let reports = vec![
            uniform_bounded(&query, UniformKind::Upper).unwrap(),
            uniform_bounded(&query, UniformKind::Lower).unwrap(),
            uniform_bounded(&query, UniformKind::Abs).unwrap(),
            uniform_bounded(&query, UniformKind::Excess).unwrap(),
            uniform_unbounded(&query, UniformKind::Upper).unwrap(),
            uniform_unbounded(&query, UniformKind::Lower).unwrap(),
            uniform_unbounded(&query, UniformKind::Abs).unwrap(),
            uniform_unbounded(&query, UniformKind::Excess).unwrap(),
            info_bounded(&query, InfoBoundedKind::Upper, None).unwrap(),
            info_bounded(&query, InfoBoundedKind::Lower, None).unwrap(),
            info_bounded(&query, InfoBoundedKind::Abs, None).unwrap(),
            info_unbounded(&query, DirectionKind::Upper).unwrap(),
            info_unbounded(&query, DirectionKind::Lower).unwrap(),
            shift_bounds(&query, 0.6, ShiftKind::Population).unwrap(),
            shift_bounds(&query, 0.6, ShiftKind::Upper).unwrap(),
            shift_bounds(&query, 0.6, ShiftKind::Lower).unwrap(),
            shift_bounds(&query, 0.6, ShiftKind::Abs).unwrap(),
            mcdiarmid_bounds(&query, DirectionKind::Upper).unwrap(),
            mcdiarmid_bounds(&query, DirectionKind::Lower).unwrap(),
            supplementary_bounds(&query, SupplementaryKind::Rademacher).unwrap(),
            supplementary_bounds(&query, SupplementaryKind::Stability).unwrap(),
            supplementary_bounds(&query, SupplementaryKind::PacBayes).unwrap(),
            supplementary_bounds(&query, SupplementaryKind::GibbsLinear).unwrap(),
            tilted_gibbs_bound(&query, 2.0, TiltedGibbsKind::Upper).unwrap(),
            tilted_gibbs_bound(&query, 2.0, TiltedGibbsKind::Abs).unwrap(),
        ];
        for report in reports {
            let sum: f64 = report.terms.iter().map(|&(_, v)| v).sum();
            if report.value.is_finite() {
                let tol = 1e-12 * (1.0 + report.value.abs());
                assert!((report.value - sum).abs() <= tol, "{}/{}", report.family, report.kind);
            }
            assert_eq!(report.valid, report.violations.is_empty());
        }
    }

    proptest! {
        #[test]
        fn sandwich_is_ordered(
            g in proptest::sample::select(vec![-3.0f64, -1.0, -0.2, 0.2, 1.0, 3.0]),
            m in 0.1..4.0f64,
            v in 0.0..2.0f64,
        ) {
            let mut query = q(0.05, 10, g);
            query.upper_bound_m = Some(m);
            let cap = a_gamma(g, m) / 4.0;
            let (lo, hi) = sandwich_true_vs_tilted(&query, v.min(cap)).unwrap();
            prop_assert!(lo <= hi + 1e-15);
        }

        #[test]
        fn uniform_bounded_abs_positive(
            g in -3.0..3.0f64,
            m in 0.1..3.0f64,
            n in 1usize..5000,
            card in 1usize..64,
        ) {
            let mut query = q(0.05, n, g);
            query.upper_bound_m = Some(m);
            query.card_h = Some(card);
            let report = uniform_bounded(&query, UniformKind::Abs).unwrap();
            prop_assert!(report.value >= 0.0);
            let sum: f64 = report.terms.iter().map(|&(_, v)| v).sum();
            prop_assert!((report.value - sum).abs() <= 1e-12 * (1.0 + report.value.abs()));
        }
    }
}
