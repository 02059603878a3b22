//! Inequality check harness.
//!
//! Every estimate this library exposes — direct and inverse approximation
//! bounds, modulus properties, embedding inequalities between norm indices,
//! operator-norm envelopes — is packaged here as a *check*: a recipe that
//! measures the left- and right-hand sides over a parameter sweep, reports
//! the ratios row by row, and condenses them into a verdict.
//!
//! Verdict semantics:
//! - an inequality with an explicit envelope constant must satisfy
//!   `max ratio <= constant (1 + margin)` — a hard assertion, since the
//!   envelopes are never tight (`bounded-by-constant` / `violated`);
//! - an inequality with an unspecified constant cannot be falsified at one
//!   point, so the desk-scale surrogate is: all ratios finite and the
//!   log-log trend of ratio against the sweep variable not growing
//!   (`bounded` / `inconclusive`).  Decaying ratios simply mean the bound is
//!   not sharp for that family and still count as bounded.
//! - two-sided equivalences additionally carry a hard lower bound for the
//!   ratio and use the two-sided trend band `|slope| <= tol`.
//!
//! Rows are deterministic: sweep points are computed concurrently but
//! reported in sweep order, and all randomness is seeded through the spec.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::best_approx::{best_approx, best_error_profile};
use crate::constants::explicit_constants;
use crate::error::{ApxError, Result};
use crate::fourier::TrigPoly;
use crate::norms::norm_poly;
use crate::operators::OperatorTag;
use crate::smoothness::{k_functional_upper, modulus, realization};
use crate::testfn::{default_family, operator_norm_family, random_polys, TestFunction};
use crate::weights::{classify_weight, Weight};

/// Number of terms kept when a transcendental member is replaced by its mode
/// expansion.  Tail sizes: the corner families decay like `k^{-1.5}` or
/// faster in L2, so the truncation error is below `1e-5` relative at this
/// degree — far under every tolerance used by the checks.
const WORKING_DEGREE: usize = 2048;
/// Largest index solved exactly when building error sequences away from
/// `p = 2` (each index is one IRLS/minimax solve).
const EXACT_ERROR_CAP: usize = 128;
/// Largest index entering truncated sums/integrals over error sequences;
/// indices past [`EXACT_ERROR_CAP`] use the fitted power law.
const SERIES_CAP: usize = 1024;
/// Geometric refinement levels for integrals over a vanishing step
/// (`t = t_max * 2^{-j}`, midpoint rule in `log t`).
const LOG_LEVELS: usize = 21;
/// Points used by the power-law tail fits.
const TAIL_FIT_POINTS: usize = 4;

// ---------------------------------------------------------------------------
// Check identifiers
// ---------------------------------------------------------------------------

/// Identifier of one check recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// `||U_n||_p <= C n^{1/q - 1/p} ||U_n||_q` for polynomials, `q <= p`.
    Nikolskii,
    /// Direct estimate `E_n(f) <= C Omega_r(f, 1/n)`.
    Jackson,
    /// Derivative-based direct estimate
    /// `E_n(f) <= C n^{-r} Omega_k(f^{(r)}, 1/n)`.
    JacksonDerivative,
    /// `||U_n^{(r)}|| <= 2^r C_12^r n^r ||U_n||` with the explicit constant.
    Bernstein,
    /// Inverse estimate
    /// `Omega_k(f, 1/n) <= C n^{-k} sum_{nu=0}^n (nu+1)^{k-1} E_nu(f)`.
    StechkinInverse,
    /// `Omega_k(f, t) <= C t^k int_t^1 Omega_{k+1}(f, u) u^{-k-1} du`.
    Marchaud,
    /// Modulus-to-modulus embedding across norm indices
    /// (`Omega_k` at `q` against the integral of `t^{-theta} Omega_k` at `p`).
    UlyanovModulus,
    /// The five series/integral embeddings across norm indices built from
    /// best-approximation sequences and moduli.
    UlyanovBestApprox,
    /// Equivalence of the modulus with the realization functional
    /// `||f - U|| + n^{-r} ||U^{(r)}||` at `v = 1/n`.
    RealizationEquiv,
    /// Equivalence of the modulus with the two-term K-functional surrogate.
    KfunctionalEquiv,
    /// Uniform operator-norm envelopes (`T_v`, the window average, the
    /// kernel mean `D_n`, the de la Vallee-Poussin mean).
    OperatorUniform,
    /// Structural modulus properties: vanishing, order reduction, step
    /// scaling, quasi-monotonicity.
    ModulusProps,
    /// Reverse estimate `l ||f'|| <= 2 C_2 ||(T_l - I) f||` (order 1).
    UpsilonNikste,
    /// Kernel-mean approximation `||f - D_n f|| <= C Omega_1(f, 1/n)` with
    /// the explicit chain constant.
    JacksonOperator,
}

impl CheckId {
    /// Stable kebab/snake identifier used in configs, CSV names and reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::Nikolskii => "nikolskii",
            CheckId::Jackson => "jackson",
            CheckId::JacksonDerivative => "jackson_derivative",
            CheckId::Bernstein => "bernstein",
            CheckId::StechkinInverse => "stechkin_inverse",
            CheckId::Marchaud => "marchaud",
            CheckId::UlyanovModulus => "ulyanov_modulus",
            CheckId::UlyanovBestApprox => "ulyanov_best_approx",
            CheckId::RealizationEquiv => "realization_equiv",
            CheckId::KfunctionalEquiv => "kfunctional_equiv",
            CheckId::OperatorUniform => "operator_uniform",
            CheckId::ModulusProps => "modulus_props",
            CheckId::UpsilonNikste => "upsilon_nikste",
            CheckId::JacksonOperator => "jackson_operator",
        }
    }

    /// All checks, in report order.
    pub fn all() -> [CheckId; 14] {
        [
            CheckId::Nikolskii,
            CheckId::Jackson,
            CheckId::JacksonDerivative,
            CheckId::Bernstein,
            CheckId::StechkinInverse,
            CheckId::Marchaud,
            CheckId::UlyanovModulus,
            CheckId::UlyanovBestApprox,
            CheckId::RealizationEquiv,
            CheckId::KfunctionalEquiv,
            CheckId::OperatorUniform,
            CheckId::ModulusProps,
            CheckId::UpsilonNikste,
            CheckId::JacksonOperator,
        ]
    }

    /// One-line description for `list-checks`.
    pub fn description(&self) -> &'static str {
        match self {
            CheckId::Nikolskii => {
                "polynomial norm comparison across norm indices with rate n^(1/q-1/p)"
            }
            CheckId::Jackson => "best error bounded by the modulus at step 1/n",
            CheckId::JacksonDerivative => {
                "best error bounded through the derivative's modulus, rate n^(-r)"
            }
            CheckId::Bernstein => "derivative norm of a polynomial vs (2 C_12 n)^r, hard envelope",
            CheckId::StechkinInverse => {
                "modulus at 1/n bounded by the weighted partial sums of best errors"
            }
            CheckId::Marchaud => {
                "modulus of order k bounded through the integral of the order-(k+1) modulus"
            }
            CheckId::UlyanovModulus => {
                "modulus at the larger index bounded by the integrated modulus at the smaller"
            }
            CheckId::UlyanovBestApprox => {
                "five series/integral embeddings between norm indices (best errors and moduli)"
            }
            CheckId::RealizationEquiv => {
                "modulus equivalent to ||f-U|| + n^(-r)||U^(r)|| at v = 1/n"
            }
            CheckId::KfunctionalEquiv => {
                "modulus equivalent to the two-term K-functional surrogate"
            }
            CheckId::OperatorUniform => {
                "averaging/summation operator norms stay under their explicit envelopes"
            }
            CheckId::ModulusProps => {
                "modulus vanishes, drops order, scales in the step, and is quasi-monotone"
            }
            CheckId::UpsilonNikste => {
                "derivative norm recovered from a single averaged difference, constant 2 C_2"
            }
            CheckId::JacksonOperator => {
                "kernel-mean approximation error vs the first-order modulus, explicit chain"
            }
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CheckId {
    type Err = ApxError;
    fn from_str(s: &str) -> Result<Self> {
        CheckId::all()
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                ApxError::InvalidParameter(format!(
                    "unknown check `{s}`; valid checks: {}",
                    CheckId::all().map(|id| id.as_str()).join(", ")
                ))
            })
    }
}

// ---------------------------------------------------------------------------
// Spec types
// ---------------------------------------------------------------------------

/// A norm index in `[1, infinity]`, serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIndex(pub f64);

impl Serialize for NormIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for NormIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(NormIndex(x)),
            Raw::Text(t) if t == "inf" => Ok(NormIndex(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "norm index must be a number or \"inf\", got `{t}`"
            ))),
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}

/// Thresholds applied when turning aggregates into verdicts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancePolicy {
    /// Maximal admissible log-log trend slope (one-sided for one-sided
    /// estimates, two-sided band for equivalences).
    pub slope_tol: f64,
    /// Relative slack granted on explicit constants and hard lower bounds,
    /// absorbing quadrature-level roundoff.
    pub constant_margin: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            slope_tol: 0.05,
            constant_margin: 1e-9,
        }
    }
}

/// Full description of one check run.  Empty lists mean "use the defaults
/// for this check" (see [`CheckSpec::default_for`] and
/// [`CheckSpec::normalized`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check_id: CheckId,
    /// Names from the built-in family (e.g. `abs_sin_pow_1`, `exp_sin`,
    /// `mode_cos_03`).  Ignored by the checks that draw their own seeded
    /// polynomial families (nikolskii, bernstein, operator_uniform).
    #[serde(default)]
    pub functions: Vec<String>,
    /// Weight descriptor, e.g. `const(1)`, `power(0,0.5)`.
    #[serde(default = "default_weight")]
    pub weight: String,
    /// Primary norm index.
    #[serde(default = "default_p")]
    pub p: NormIndex,
    /// Secondary norm index for the two-index checks.
    #[serde(default)]
    pub q: Option<NormIndex>,
    /// Degree sweep.
    #[serde(default)]
    pub n_list: Vec<u32>,
    /// Step sweep (steps, window scales, or starting steps, per check).
    #[serde(default)]
    pub v_list: Vec<f64>,
    /// Difference order.
    #[serde(default = "default_order")]
    pub k: u32,
    /// Derivative order.
    #[serde(default = "default_order")]
    pub r: u32,
    /// Seed for every random object the check draws.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Operator selector for `operator_uniform`:
    /// `steklov_T`, `window_S`, `jackson_D`, or `vallee_poussin`.
    #[serde(default)]
    pub operator: Option<String>,
    /// Size of seeded random polynomial families.
    #[serde(default = "default_poly_count")]
    pub poly_count: usize,
    #[serde(default)]
    pub tolerance: TolerancePolicy,
}

fn default_weight() -> String {
    "const(1)".into()
}
fn default_p() -> NormIndex {
    NormIndex(2.0)
}
fn default_order() -> u32 {
    1
}
fn default_seed() -> u64 {
    42
}
fn default_poly_count() -> usize {
    20
}

impl CheckSpec {
    /// The default run for a check: the sweeps and families under which its
    /// verdict is expected to be `bounded`/`bounded-by-constant`.
    pub fn default_for(id: CheckId) -> CheckSpec {
        let mut spec = CheckSpec {
            check_id: id,
            functions: Vec::new(),
            weight: default_weight(),
            p: default_p(),
            q: None,
            n_list: Vec::new(),
            v_list: Vec::new(),
            k: 1,
            r: 1,
            seed: default_seed(),
            operator: None,
            poly_count: default_poly_count(),
            tolerance: TolerancePolicy::default(),
        };
        let corner = || vec!["abs_sin_pow_1".to_string(), "abs_sin_pow_2.5".to_string()];
        let pow2 = |lo: u32, hi: u32| -> Vec<u32> {
            let mut v = Vec::new();
            let mut n = lo;
            while n <= hi {
                v.push(n);
                n *= 2;
            }
            v
        };
        match id {
            CheckId::Nikolskii => {
                spec.weight = "power(0,0.5)".into();
                spec.p = NormIndex(2.0);
                spec.q = Some(NormIndex(1.0));
                spec.n_list = pow2(4, 256);
            }
            CheckId::Jackson => {
                spec.functions = corner();
                spec.n_list = pow2(4, 128);
            }
            CheckId::JacksonDerivative => {
                spec.functions = vec!["exp_sin".into()];
                spec.n_list = pow2(4, 64);
            }
            CheckId::Bernstein => {
                spec.n_list = pow2(4, 128);
                spec.poly_count = 50;
            }
            CheckId::StechkinInverse => {
                spec.functions = corner();
                spec.n_list = pow2(4, 128);
            }
            CheckId::Marchaud => {
                spec.functions = vec!["abs_sin_pow_1".into()];
                spec.v_list = vec![0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];
            }
            CheckId::UlyanovModulus => {
                spec.functions = vec!["abs_sin_pow_1".into()];
                spec.p = NormIndex(1.0);
                spec.q = Some(NormIndex(2.0));
                spec.v_list = (2..=7).map(|j| 0.5_f64.powi(j)).collect();
            }
            CheckId::UlyanovBestApprox => {
                spec.functions = vec!["abs_sin_pow_1".into()];
                spec.p = NormIndex(1.0);
                spec.q = Some(NormIndex(2.0));
                spec.n_list = pow2(4, 64);
            }
            CheckId::RealizationEquiv | CheckId::KfunctionalEquiv => {
                spec.functions = vec!["abs_sin_pow_1".into()];
                spec.n_list = pow2(4, 128);
            }
            CheckId::OperatorUniform => {
                spec.operator = Some("steklov_T".into());
                spec.v_list = vec![1.0, 0.5, 0.25, 0.1, 0.05, 0.01];
                spec.n_list = pow2(4, 64);
            }
            CheckId::ModulusProps => {
                spec.functions = vec!["abs_sin_pow_1".into(), "exp_sin".into()];
                spec.v_list = vec![0.5, 0.25, 0.125, 0.0625, 0.03125];
            }
            CheckId::UpsilonNikste => {
                spec.functions = vec!["exp_sin".into()];
                spec.v_list = vec![1.0, 0.5, 0.25, 0.1, 0.05, 0.025];
            }
            CheckId::JacksonOperator => {
                spec.functions = vec!["abs_sin_pow_1".into(), "exp_sin".into()];
                spec.n_list = pow2(4, 64);
            }
        }
        spec
    }

    /// Fill empty sweep lists and function lists from the defaults for the
    /// check, leaving everything explicitly set untouched.
    pub fn normalized(&self) -> CheckSpec {
        let d = CheckSpec::default_for(self.check_id);
        let mut out = self.clone();
        if out.functions.is_empty() {
            out.functions = d.functions;
        }
        if out.n_list.is_empty() {
            out.n_list = d.n_list;
        }
        if out.v_list.is_empty() {
            out.v_list = d.v_list;
        }
        if out.q.is_none() {
            out.q = d.q;
        }
        if out.operator.is_none() {
            out.operator = d.operator;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    /// Human-readable sweep coordinates (`f=abs_sin_pow_1 n=32`, ...).
    pub params: String,
    /// Trend abscissa: the degree `n`, the reciprocal step `1/v`, or 0 for
    /// one-off rows excluded from trend fitting.
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, with `0/anything = 0` and `positive/0 = inf`.
    pub ratio: f64,
    /// For integral/series bounds: the bound with the tail integral
    /// truncated at the resolution floor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_truncated: Option<f64>,
    /// The same bound with the fitted power-law tail added.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_extrapolated: Option<f64>,
}

impl CheckRow {
    fn new(params: String, x: f64, lhs: f64, rhs: f64) -> CheckRow {
        CheckRow {
            params,
            x,
            lhs,
            rhs,
            ratio: safe_ratio(lhs, rhs),
            integral_truncated: None,
            integral_extrapolated: None,
        }
    }
}

/// `lhs / rhs` with the conventions for degenerate sides: a zero left side
/// satisfies any bound (ratio 0), a zero bound under a positive left side is
/// an unbounded ratio.
fn safe_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Summary statistics over the rows.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Least-squares slope of `log ratio` against `log x` over rows with
    /// positive finite ratio and positive abscissa; 0 when fewer than three
    /// such rows exist.
    pub slope: f64,
    pub n_rows: usize,
}

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// All ratios finite with a non-growing trend (implicit-constant bound).
    Bounded,
    /// The explicit envelope constant holds at every row.
    BoundedByConstant,
    /// An explicit constant or hard lower bound failed beyond the margin.
    Violated,
    /// Ratios finite but the trend grew, or too little data: not falsified,
    /// not confirmed.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::BoundedByConstant => "bounded-by-constant",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Verdicts that count as success for exit-code purposes.
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Bounded | Verdict::BoundedByConstant)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full result of [`run_check`].
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub rows: Vec<CheckRow>,
    pub aggregate: Aggregate,
    /// The explicit envelope constant the ratios are compared against, when
    /// the estimate carries one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit_constant: Option<f64>,
    /// Hard lower bound for the ratio (two-sided equivalences only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hard_lower_bound: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

// ---------------------------------------------------------------------------
// Fitting helpers
// ---------------------------------------------------------------------------

/// Least-squares line through `(ln x, ln y)`: returns `(slope, intercept,
/// rms residual)`.  `None` if fewer than two usable points.
fn log_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && x.is_finite() && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let (sx, sy) = logs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (x - mx), b + (x - mx) * (y - my))
    });
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = logs
        .iter()
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Some((slope, intercept, (rss / n).sqrt()))
}

/// Result of [`estimate_decay_exponent`].
#[derive(Debug, Clone, Serialize)]
pub struct DecayEstimate {
    /// Fitted exponent `beta` in `value ~ n^{-beta}`.
    pub beta_hat: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Fit `value = C n^{-beta}` through at least six positive points by least
/// squares on the logs.
pub fn estimate_decay_exponent(series: &[(f64, f64)]) -> Result<DecayEstimate> {
    if series.len() < 6 {
        return Err(ApxError::InvalidParameter(format!(
            "decay fit needs at least 6 points, got {}",
            series.len()
        )));
    }
    for &(n, v) in series {
        if !(n > 0.0) || !n.is_finite() || !(v > 0.0) || !v.is_finite() {
            return Err(ApxError::InvalidParameter(format!(
                "decay fit needs positive finite points, got ({n}, {v})"
            )));
        }
    }
    let (slope, _, residual) =
        log_fit(series).expect("positivity was checked, fit cannot degenerate");
    Ok(DecayEstimate {
        beta_hat: -slope,
        residual,
    })
}

fn aggregate_rows(rows: &[CheckRow]) -> Aggregate {
    if rows.is_empty() {
        return Aggregate {
            max_ratio: 0.0,
            min_ratio: 0.0,
            slope: 0.0,
            n_rows: 0,
        };
    }
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for row in rows {
        max_ratio = max_ratio.max(row.ratio);
        min_ratio = min_ratio.min(row.ratio);
    }
    let trend: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.x > 0.0 && r.ratio > 0.0 && r.ratio.is_finite())
        .map(|r| (r.x, r.ratio))
        .collect();
    let slope = if trend.len() < 3 {
        0.0
    } else {
        log_fit(&trend).map_or(0.0, |(s, _, _)| s)
    };
    Aggregate {
        max_ratio,
        min_ratio,
        slope,
        n_rows: rows.len(),
    }
}

fn decide_verdict(
    agg: &Aggregate,
    explicit_constant: Option<f64>,
    hard_lower_bound: Option<f64>,
    two_sided_slope: bool,
    tol: &TolerancePolicy,
) -> Verdict {
    if agg.n_rows == 0 {
        return Verdict::Inconclusive;
    }
    if let Some(lb) = hard_lower_bound {
        if !(agg.min_ratio >= lb * (1.0 - tol.constant_margin)) {
            return Verdict::Violated;
        }
    }
    if let Some(c) = explicit_constant {
        return if agg.max_ratio <= c * (1.0 + tol.constant_margin) {
            Verdict::BoundedByConstant
        } else {
            Verdict::Violated
        };
    }
    let slope_ok = if two_sided_slope {
        agg.slope.abs() <= tol.slope_tol
    } else {
        agg.slope <= tol.slope_tol
    };
    if agg.max_ratio.is_finite() && slope_ok {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Spec preparation
// ---------------------------------------------------------------------------

struct SpecContext {
    weight: Weight,
    /// False for the unit weight, letting the norm engine take the faster
    /// unweighted paths.
    weighted: bool,
    p: f64,
    q: Option<f64>,
    functions: Vec<TestFunction>,
}

impl SpecContext {
    fn w(&self) -> Option<&Weight> {
        if self.weighted {
            Some(&self.weight)
        } else {
            None
        }
    }
}

fn check_norm_index(label: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 1.0 {
        return Err(ApxError::InvalidParameter(format!(
            "norm index {label} must lie in [1, inf], got {v}"
        )));
    }
    Ok(())
}

/// Validate the spec against the hypotheses of the estimate it runs, parse
/// the weight, and resolve function names.
fn prepare(spec: &CheckSpec) -> Result<SpecContext> {
    let p = spec.p.0;
    check_norm_index("p", p)?;
    let q = spec.q.map(|q| q.0);
    if let Some(qv) = q {
        check_norm_index("q", qv)?;
    }
    if spec.k == 0 || spec.r == 0 {
        return Err(ApxError::InvalidParameter(
            "difference/derivative orders k, r must be >= 1".into(),
        ));
    }
    let weight = Weight::parse(&spec.weight)?;
    let weighted = weight.as_constant() != Some(1.0);

    let needs_q = matches!(
        spec.check_id,
        CheckId::Nikolskii | CheckId::UlyanovModulus | CheckId::UlyanovBestApprox
    );
    if needs_q && q.is_none() {
        return Err(ApxError::InvalidParameter(format!(
            "check {} needs the second norm index q",
            spec.check_id
        )));
    }
    match spec.check_id {
        CheckId::Nikolskii => {
            // The comparison runs from the smaller index up: q <= p.  The
            // weight only needs finite mass, which its constructor enforces.
            let qv = q.unwrap();
            if !(qv <= p) {
                return Err(ApxError::InvalidParameter(format!(
                    "nikolskii needs q <= p, got q={qv}, p={p}"
                )));
            }
        }
        CheckId::UlyanovModulus | CheckId::UlyanovBestApprox => {
            let qv = q.unwrap();
            if !(p < qv) {
                return Err(ApxError::InvalidParameter(format!(
                    "{} needs p < q, got p={p}, q={qv}",
                    spec.check_id
                )));
            }
            require_class(&weight, p)?;
        }
        CheckId::Marchaud => {
            for &t in &spec.v_list {
                if !(t > 0.0 && t < 0.5) {
                    return Err(ApxError::InvalidParameter(format!(
                        "marchaud steps must lie in (0, 1/2), got {t}"
                    )));
                }
            }
            require_class(&weight, p)?;
        }
        CheckId::UpsilonNikste => {
            if spec.r != 1 {
                return Err(ApxError::InvalidParameter(
                    "the averaged-difference derivative bound is implemented for order r = 1 \
                     only (higher orders have no splitting of the iterated average)"
                        .into(),
                ));
            }
            require_class(&weight, p)?;
        }
        _ => {
            require_class(&weight, p)?;
        }
    }

    let functions = resolve_functions(spec)?;
    Ok(SpecContext {
        weight,
        weighted,
        p,
        q,
        functions,
    })
}

fn require_class(w: &Weight, p: f64) -> Result<()> {
    let report = classify_weight(w, p)?;
    if !report.in_class {
        return Err(ApxError::NotInClass {
            p,
            reason: report.reason.clone(),
        });
    }
    Ok(())
}

fn resolve_functions(spec: &CheckSpec) -> Result<Vec<TestFunction>> {
    // The checks that draw their own polynomial families resolve nothing.
    if matches!(
        spec.check_id,
        CheckId::Nikolskii | CheckId::Bernstein | CheckId::OperatorUniform
    ) {
        return Ok(Vec::new());
    }
    let catalog = default_family(spec.seed);
    let mut out = Vec::with_capacity(spec.functions.len());
    for name in &spec.functions {
        match catalog.iter().find(|f| &f.name == name) {
            Some(f) => out.push(f.clone()),
            None => {
                let mut names: Vec<&str> = catalog.iter().map(|f| f.name.as_str()).collect();
                names.sort_unstable();
                return Err(ApxError::InvalidParameter(format!(
                    "unknown function `{name}`; available: {}",
                    names.join(", ")
                )));
            }
        }
    }
    if out.is_empty() {
        return Err(ApxError::InvalidParameter(format!(
            "check {} needs at least one function",
            spec.check_id
        )));
    }
    Ok(out)
}

/// Mode expansion every check computes with.  Exact for polynomial members;
/// degree-capped for the transcendental ones.
fn working_poly(f: &TestFunction) -> TrigPoly {
    match f.kind {
        "exp_sin" => f.to_poly(64),
        _ => match f.as_poly() {
            Some(p) => p.clone(),
            None => f.to_poly(WORKING_DEGREE),
        },
    }
}

/// Attach the failing sweep point to solver failures so suite logs point at
/// the exact row.
fn at_point(e: ApxError, params: &str) -> ApxError {
    match e {
        ApxError::SolverFailure(msg) => {
            ApxError::SolverFailure(format!("{msg} (at sweep point {params})"))
        }
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Error sequences
// ---------------------------------------------------------------------------

/// Best errors `E_0..E_n_max` of a polynomial.  At `p = 2` every index comes
/// from one factorization.  Elsewhere each solve is iterative, so indices
/// are sampled densely below 8 and geometrically up to
/// [`EXACT_ERROR_CAP`], then bridged by log-log interpolation (the sequences
/// are monotone and power-law for the built-in families) and extended past
/// the cap by the fitted power law.
fn error_sequence(fp: &TrigPoly, n_max: usize, p: f64, w: Option<&Weight>) -> Result<Vec<f64>> {
    if p == 2.0 {
        return best_error_profile(fp, n_max, w);
    }
    let mut idx: Vec<usize> = (0..=n_max.min(8)).collect();
    let mut g = 8usize;
    let solve_cap = n_max.min(EXACT_ERROR_CAP);
    loop {
        g = (g * 3 + 1) / 2;
        if g >= solve_cap {
            break;
        }
        idx.push(g);
    }
    if solve_cap > 8 && !idx.contains(&solve_cap) {
        idx.push(solve_cap);
    }
    let solved: Vec<f64> = idx
        .par_iter()
        .map(|&nu| {
            best_approx(fp, nu, p, w)
                .map(|r| r.error)
                .map_err(|e| at_point(e, &format!("E_{nu} at p={p}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut errors = vec![0.0_f64; n_max + 1];
    for (pos, &nu) in idx.iter().enumerate() {
        errors[nu] = solved[pos];
    }
    // Bridge between sampled indices on log-log axes.
    for win in idx.windows(2) {
        let (i0, i1) = (win[0], win[1]);
        let (e0, e1) = (errors[i0], errors[i1]);
        for nu in (i0 + 1)..i1 {
            errors[nu] = if e0 > 0.0 && e1 > 0.0 {
                let t = ((nu as f64).ln() - (i0 as f64).ln())
                    / ((i1 as f64).ln() - (i0 as f64).ln());
                (e0.ln() + t * (e1.ln() - e0.ln())).exp()
            } else {
                // A zero sample means the polynomial is captured exactly.
                if e0 == 0.0 {
                    0.0
                } else {
                    e0.min(e1)
                }
            };
        }
    }
    // Beyond the exact cap: fitted power law from the last sampled points.
    if n_max > solve_cap {
        let fit_pts: Vec<(f64, f64)> = idx
            .iter()
            .rev()
            .take(TAIL_FIT_POINTS)
            .filter(|&&nu| nu > 0 && errors[nu] > 0.0)
            .map(|&nu| (nu as f64, errors[nu]))
            .collect();
        match log_fit(&fit_pts) {
            Some((slope, intercept, _)) => {
                for (nu, err) in errors.iter_mut().enumerate().skip(solve_cap + 1) {
                    *err = (intercept + slope * (nu as f64).ln()).exp();
                }
            }
            None => {
                // Exactly captured tail (polynomial input): stays zero.
            }
        }
    }
    Ok(errors)
}

/// Power-law tail model `value = exp(intercept) * x^{slope}` fitted on the
/// last points of a sampled sequence; used to close truncated sums and
/// integrals.
struct TailFit {
    slope: f64,
    intercept: f64,
}

fn tail_fit(points: &[(f64, f64)]) -> Option<TailFit> {
    log_fit(points).map(|(slope, intercept, _)| TailFit { slope, intercept })
}

impl TailFit {
    fn eval(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }

    /// `int_{lo}^{inf} value(x) / x dx` under the fitted law; `None` when the
    /// fit does not decay.
    fn log_integral_above(&self, lo: f64) -> Option<f64> {
        if self.slope >= -1e-9 {
            return None;
        }
        // int A x^{s-1} dx from lo to inf = A lo^s / (-s).
        Some(self.eval(lo) / (-self.slope))
    }

    /// `int_{0}^{hi} value(x) / x dx` under the fitted law; `None` when the
    /// integrand does not vanish at 0.
    fn log_integral_below(&self, hi: f64) -> Option<f64> {
        if self.slope <= 1e-9 {
            return None;
        }
        Some(self.eval(hi) / self.slope)
    }
}

// ---------------------------------------------------------------------------
// Runner plumbing
// ---------------------------------------------------------------------------

struct RunnerOutput {
    rows: Vec<CheckRow>,
    explicit_constant: Option<f64>,
    hard_lower_bound: Option<f64>,
    two_sided_slope: bool,
    notes: Vec<String>,
    verdict_override: Option<Verdict>,
}

impl RunnerOutput {
    fn scale_free(rows: Vec<CheckRow>, notes: Vec<String>) -> RunnerOutput {
        RunnerOutput {
            rows,
            explicit_constant: None,
            hard_lower_bound: None,
            two_sided_slope: false,
            notes,
            verdict_override: None,
        }
    }

    fn enveloped(rows: Vec<CheckRow>, constant: f64, notes: Vec<String>) -> RunnerOutput {
        RunnerOutput {
            rows,
            explicit_constant: Some(constant),
            hard_lower_bound: None,
            two_sided_slope: false,
            notes,
            verdict_override: None,
        }
    }
}

/// Run one check end to end.
pub fn run_check(spec: &CheckSpec) -> Result<CheckReport> {
    let spec = spec.normalized();
    let ctx = prepare(&spec)?;
    let out = match spec.check_id {
        CheckId::Nikolskii => run_nikolskii(&spec, &ctx)?,
        CheckId::Jackson => run_jackson(&spec, &ctx)?,
        CheckId::JacksonDerivative => run_jackson_derivative(&spec, &ctx)?,
        CheckId::Bernstein => run_bernstein(&spec, &ctx)?,
        CheckId::StechkinInverse => run_stechkin(&spec, &ctx)?,
        CheckId::Marchaud => run_marchaud(&spec, &ctx)?,
        CheckId::UlyanovModulus => run_ulyanov_modulus(&spec, &ctx)?,
        CheckId::UlyanovBestApprox => run_ulyanov_best_approx(&spec, &ctx)?,
        CheckId::RealizationEquiv => run_equivalence(&spec, &ctx, EquivKind::Realization)?,
        CheckId::KfunctionalEquiv => run_equivalence(&spec, &ctx, EquivKind::KFunctional)?,
        CheckId::OperatorUniform => run_operator_uniform(&spec, &ctx)?,
        CheckId::ModulusProps => run_modulus_props(&spec, &ctx)?,
        CheckId::UpsilonNikste => run_upsilon_nikste(&spec, &ctx)?,
        CheckId::JacksonOperator => run_jackson_operator(&spec, &ctx)?,
    };
    let aggregate = aggregate_rows(&out.rows);
    let verdict = out.verdict_override.unwrap_or_else(|| {
        decide_verdict(
            &aggregate,
            out.explicit_constant,
            out.hard_lower_bound,
            out.two_sided_slope,
            &spec.tolerance,
        )
    });
    Ok(CheckReport {
        check_id: spec.check_id,
        rows: out.rows,
        aggregate,
        explicit_constant: out.explicit_constant,
        hard_lower_bound: out.hard_lower_bound,
        verdict,
        notes: out.notes,
    })
}

/// Map sweep inputs to row groups concurrently, preserving input order.
fn par_rows<T, F>(inputs: &[T], f: F) -> Result<Vec<CheckRow>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<CheckRow>> + Sync + Send,
{
    let nested: Vec<Vec<CheckRow>> = inputs.par_iter().map(f).collect::<Result<_>>()?;
    Ok(nested.into_concat())
}

trait Concat {
    fn into_concat(self) -> Vec<CheckRow>;
}

impl Concat for Vec<Vec<CheckRow>> {
    fn into_concat(self) -> Vec<CheckRow> {
        self.into_iter().flatten().collect()
    }
}

/// Seeded degree-`n` polynomials with zero mean: the two-index comparisons
/// are stated for polynomials without a constant term.
fn seeded_polys(seed: u64, count: usize, n: u32) -> Vec<TrigPoly> {
    let mut polys = random_polys(seed.wrapping_add(n as u64), count, n as usize);
    for p in &mut polys {
        p.a0 = 0.0;
    }
    polys
}

// ---------------------------------------------------------------------------
// Individual runners
// ---------------------------------------------------------------------------

fn run_nikolskii(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let q = ctx.q.expect("validated");
    let exponent = 1.0 / q - 1.0 / ctx.p;
    let rows = par_rows(&spec.n_list, |&n| {
        let polys = seeded_polys(spec.seed, spec.poly_count, n);
        let mut worst: Option<CheckRow> = None;
        for (i, u) in polys.iter().enumerate() {
            let params = format!("n={n} poly={i}");
            let lhs = norm_poly(u, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let qn = norm_poly(u, q, ctx.w()).map_err(|e| at_point(e, &params))?;
            let rhs = (n as f64).powf(exponent) * qn;
            let row = CheckRow::new(params, n as f64, lhs, rhs);
            if worst.as_ref().map_or(true, |w| row.ratio > w.ratio) {
                worst = Some(row);
            }
        }
        Ok(worst.into_iter().collect())
    })?;
    Ok(RunnerOutput::scale_free(
        rows,
        vec![format!(
            "rows show the worst of {} seeded zero-mean polynomials per degree",
            spec.poly_count
        )],
    ))
}

fn run_jackson(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let n_max = *spec.n_list.iter().max().unwrap() as usize;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let errors = if ctx.p == 2.0 {
            Some(best_error_profile(&fp, n_max, ctx.w())?)
        } else {
            None
        };
        let f_rows = par_rows(&spec.n_list, |&n| {
            let params = format!("f={} n={n}", f.name);
            let en = match &errors {
                Some(prof) => prof[n as usize],
                None => best_approx(&fp, n as usize, ctx.p, ctx.w())
                    .map_err(|e| at_point(e, &params))?
                    .error,
            };
            let om = modulus(&fp, spec.r, 1.0 / n as f64, ctx.p, ctx.w())
                .map_err(|e| at_point(e, &params))?;
            Ok(vec![CheckRow::new(params, n as f64, en, om)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::scale_free(rows, Vec::new()))
}

fn run_jackson_derivative(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let n_max = *spec.n_list.iter().max().unwrap() as usize;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let fr = fp.derivative(spec.r);
        let errors = if ctx.p == 2.0 {
            Some(best_error_profile(&fp, n_max, ctx.w())?)
        } else {
            None
        };
        let f_rows = par_rows(&spec.n_list, |&n| {
            let params = format!("f={} n={n}", f.name);
            let en = match &errors {
                Some(prof) => prof[n as usize],
                None => best_approx(&fp, n as usize, ctx.p, ctx.w())
                    .map_err(|e| at_point(e, &params))?
                    .error,
            };
            let nf = n as f64;
            let om = modulus(&fr, spec.k, 1.0 / nf, ctx.p, ctx.w())
                .map_err(|e| at_point(e, &params))?;
            let rhs = nf.powi(-(spec.r as i32)) * om;
            Ok(vec![CheckRow::new(params, nf, en, rhs)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::scale_free(
        rows,
        vec![format!(
            "derivative order r={}, difference order k={}",
            spec.r, spec.k
        )],
    ))
}

fn run_bernstein(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    let cap = (2.0 * table.c12.value).powi(spec.r as i32);
    let rows = par_rows(&spec.n_list, |&n| {
        let polys = seeded_polys(spec.seed, spec.poly_count, n);
        let mut worst: Option<CheckRow> = None;
        for (i, u) in polys.iter().enumerate() {
            let params = format!("n={n} poly={i}");
            let lhs =
                norm_poly(&u.derivative(spec.r), ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let base = norm_poly(u, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let rhs = (n as f64).powi(spec.r as i32) * base;
            let row = CheckRow::new(params, n as f64, lhs, rhs);
            if worst.as_ref().map_or(true, |w| row.ratio > w.ratio) {
                worst = Some(row);
            }
        }
        Ok(worst.into_iter().collect())
    })?;
    Ok(RunnerOutput::enveloped(
        rows,
        cap,
        vec![format!(
            "envelope (2 C_12)^r with C_12 = {:.6e}; worst of {} seeded polynomials per degree",
            table.c12.value, spec.poly_count
        )],
    ))
}

fn run_stechkin(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let n_max = *spec.n_list.iter().max().unwrap() as usize;
    let k = spec.k;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let errors = error_sequence(&fp, n_max, ctx.p, ctx.w())?;
        // prefix[n] = sum_{nu=0}^{n} (nu+1)^{k-1} E_nu
        let mut prefix = Vec::with_capacity(n_max + 1);
        let mut acc = 0.0;
        for (nu, e) in errors.iter().enumerate() {
            acc += ((nu + 1) as f64).powi(k as i32 - 1) * e;
            prefix.push(acc);
        }
        let f_rows = par_rows(&spec.n_list, |&n| {
            let params = format!("f={} n={n}", f.name);
            let nf = n as f64;
            let lhs =
                modulus(&fp, k, 1.0 / nf, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let rhs = nf.powi(-(k as i32)) * prefix[n as usize];
            Ok(vec![CheckRow::new(params, nf, lhs, rhs)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::scale_free(rows, Vec::new()))
}

fn run_marchaud(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let k = spec.k;
    let panels = 40usize;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let f_rows = par_rows(&spec.v_list, |&t| {
            let params = format!("f={} t={t}", f.name);
            let lhs = modulus(&fp, k, t, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            // int_t^1 Omega_{k+1}(u) u^{-k-1} du by midpoint rule in log u:
            // du = u d(log u), so each panel contributes Omega * u^{-k} * dlog.
            let dlog = -t.ln() / panels as f64;
            let mut integral = 0.0;
            for j in 0..panels {
                let u = (t.ln() + (j as f64 + 0.5) * dlog).exp();
                let om =
                    modulus(&fp, k + 1, u, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
                integral += om * u.powi(-(k as i32)) * dlog;
            }
            let rhs = t.powi(k as i32) * integral;
            Ok(vec![CheckRow::new(params, 1.0 / t, lhs, rhs)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::scale_free(
        rows,
        vec![format!("{panels} log-midpoint panels per integral")],
    ))
}

/// Exponent placed on the modulus inside integral bounds: the secondary
/// index when finite, 1 at `q = inf` (the integrand is then used linearly).
fn q_star_modulus(q: f64) -> f64 {
    if q.is_finite() {
        q
    } else {
        1.0
    }
}

/// Exponent used by the series bounds: collapses to 1 whenever the sup norm
/// or the integral-mean norm ends an embedding (`q = inf` or `p = 1`).
fn q_star_series(p: f64, q: f64) -> f64 {
    if q.is_infinite() || p == 1.0 {
        1.0
    } else {
        q
    }
}

/// Truncated + extrapolated value of
/// `int_0^delta (t^{-theta} Omega_k(f,t,p))^{qs} dt/t`
/// over the geometric midpoint grid `t = delta 2^{-(j+1/2)}`.
fn modulus_log_integral(
    fp: &TrigPoly,
    k: u32,
    delta: f64,
    theta: f64,
    qs: f64,
    p: f64,
    w: Option<&Weight>,
    params: &str,
) -> Result<(f64, f64)> {
    let ln2 = std::f64::consts::LN_2;
    let mids: Vec<f64> = (0..LOG_LEVELS)
        .map(|j| delta * 0.5_f64.powf(j as f64 + 0.5))
        .collect();
    let values: Vec<f64> = mids
        .par_iter()
        .map(|&t| {
            let om = modulus(fp, k, t, p, w).map_err(|e| at_point(e, params))?;
            Ok((t.powf(-theta) * om).powf(qs))
        })
        .collect::<Result<_>>()?;
    let truncated: f64 = values.iter().sum::<f64>() * ln2;
    let fit_pts: Vec<(f64, f64)> = mids
        .iter()
        .zip(&values)
        .rev()
        .take(TAIL_FIT_POINTS)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v))
        .collect();
    let tail = tail_fit(&fit_pts)
        .and_then(|fit| fit.log_integral_below(delta * 0.5_f64.powi(LOG_LEVELS as i32)))
        .unwrap_or(0.0);
    Ok((truncated, truncated + tail))
}

fn run_ulyanov_modulus(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let q = ctx.q.expect("validated");
    let theta = 1.0 / ctx.p - 1.0 / q;
    let qs = q_star_modulus(q);
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let f_rows = par_rows(&spec.v_list, |&delta| {
            let params = format!("f={} delta={delta}", f.name);
            let lhs = modulus(&fp, spec.k, delta, q, ctx.w()).map_err(|e| at_point(e, &params))?;
            let (trunc_raw, extr_raw) = modulus_log_integral(
                &fp, spec.k, delta, theta, qs, ctx.p, ctx.w(), &params,
            )?;
            let trunc = trunc_raw.powf(1.0 / qs);
            let extr = extr_raw.powf(1.0 / qs);
            let mut row = CheckRow::new(params, 1.0 / delta, lhs, extr);
            row.integral_truncated = Some(trunc);
            row.integral_extrapolated = Some(extr);
            Ok(vec![row])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::scale_free(
        rows,
        vec![format!(
            "integral exponent q* = {qs} (modulus route); series route would use {}",
            q_star_series(ctx.p, q)
        )],
    ))
}

/// Shared state for the five series/integral embeddings.
struct SeriesData {
    /// `E_0..E_SERIES_CAP` at the primary index.
    errors: Vec<f64>,
    /// Closed-form tail of `sum_{k > SERIES_CAP} k^{qs theta - 1} E_k^{qs}`
    /// under the fitted power law, when it decays.
    tail: Option<TailFit>,
}

fn series_data(fp: &TrigPoly, p: f64, w: Option<&Weight>) -> Result<SeriesData> {
    let errors = error_sequence(fp, SERIES_CAP, p, w)?;
    let fit_pts: Vec<(f64, f64)> = [
        SERIES_CAP / 2,
        SERIES_CAP * 5 / 8,
        SERIES_CAP * 3 / 4,
        SERIES_CAP,
    ]
    .iter()
    .filter(|&&k| errors[k] > 0.0)
    .map(|&k| (k as f64, errors[k]))
    .collect();
    Ok(SeriesData {
        errors,
        tail: tail_fit(&fit_pts),
    })
}

impl SeriesData {
    /// `sum_{k=lo}^{SERIES_CAP} k^{qs theta - 1} E_k^{qs}` plus the fitted
    /// tail beyond the cap: returns (truncated, extrapolated).
    fn weighted_sum(&self, lo: usize, theta: f64, qs: f64) -> (f64, f64) {
        let mut head = 0.0;
        for k in lo.max(1)..=SERIES_CAP {
            let e = self.errors[k];
            if e > 0.0 {
                head += (k as f64).powf(qs * theta - 1.0) * e.powf(qs);
            }
        }
        let tail = match &self.tail {
            Some(fit) => {
                // terms ~ k^{qs theta - 1} (A k^{s})^{qs}: integral of
                // x^{qs(theta + s)} dx/x above the cap boundary.
                let combined = TailFit {
                    slope: qs * (theta + fit.slope),
                    intercept: qs * fit.intercept,
                };
                combined
                    .log_integral_above(SERIES_CAP as f64 + 0.5)
                    .unwrap_or(0.0)
            }
            None => 0.0,
        };
        (head, head + tail)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_ulyanov_best_approx(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let q = ctx.q.expect("validated");
    let theta = 1.0 / ctx.p - 1.0 / q;
    let qs = q_star_series(ctx.p, q);
    let j = spec.k;
    let mut rows = Vec::new();
    let mut notes = vec![format!(
        "series exponent q* = {qs}; modulus-route exponent would be {}",
        q_star_modulus(q)
    )];
    for f in &ctx.functions {
        let fp = working_poly(f);
        let data = series_data(&fp, ctx.p, ctx.w())?;
        if let Some(fit) = &data.tail {
            notes.push(format!(
                "f={}: fitted error decay exponent {:.3} beyond index {}",
                f.name, -fit.slope, SERIES_CAP
            ));
        }
        let norm_p = norm_poly(&fp, ctx.p, ctx.w())?;
        let norm_q = norm_poly(&fp, q, ctx.w())?;

        // Route 1: E_n at the larger index against the tail sum from n/2.
        let eq_profile = if q == 2.0 {
            Some(best_error_profile(
                &fp,
                *spec.n_list.iter().max().unwrap() as usize,
                ctx.w(),
            )?)
        } else {
            None
        };
        let f_rows = par_rows(&spec.n_list, |&n| {
            let params = format!("f={} route=tail_sum n={n}", f.name);
            let lhs = match &eq_profile {
                Some(prof) => prof[n as usize],
                None => best_approx(&fp, n as usize, q, ctx.w())
                    .map_err(|e| at_point(e, &params))?
                    .error,
            };
            let (head, total) = data.weighted_sum(n as usize / 2 + 1, theta, qs);
            let mut row =
                CheckRow::new(params, n as f64, lhs, total.powf(1.0 / qs));
            row.integral_truncated = Some(head.powf(1.0 / qs));
            row.integral_extrapolated = Some(total.powf(1.0 / qs));
            Ok(vec![row])
        })?;
        rows.extend(f_rows);

        // Route 2: the full norm at the larger index against the complete
        // sum plus the norm at the smaller index.
        {
            let params = format!("f={} route=full_sum", f.name);
            let (head, total) = data.weighted_sum(1, theta, qs);
            let mut row = CheckRow::new(
                params,
                0.0,
                norm_q,
                total.powf(1.0 / qs) + norm_p,
            );
            row.integral_truncated = Some(head.powf(1.0 / qs) + norm_p);
            row.integral_extrapolated = Some(total.powf(1.0 / qs) + norm_p);
            rows.push(row);
        }

        // Route 3: the same bound with the sum replaced by its integral
        // form, evaluated by midpoint panels in log v over the fitted
        // continuous error function.
        {
            let params = format!("f={} route=integral", f.name);
            let panels = 64usize;
            let hi = SERIES_CAP as f64 + 0.5;
            let dlog = hi.ln() / panels as f64;
            let mut head = 0.0;
            for i in 0..panels {
                let v = ((i as f64 + 0.5) * dlog).exp();
                let e = interp_error(&data.errors, v);
                if e > 0.0 {
                    head += v.powf(qs * theta) * e.powf(qs) * dlog;
                }
            }
            let tail = data
                .tail
                .as_ref()
                .and_then(|fit| {
                    TailFit {
                        slope: qs * (theta + fit.slope),
                        intercept: qs * fit.intercept,
                    }
                    .log_integral_above(hi)
                })
                .unwrap_or(0.0);
            let mut row = CheckRow::new(
                params,
                0.0,
                norm_q,
                (head + tail).powf(1.0 / qs) + norm_p,
            );
            row.integral_truncated = Some(head.powf(1.0 / qs) + norm_p);
            row.integral_extrapolated = Some((head + tail).powf(1.0 / qs) + norm_p);
            rows.push(row);
        }

        // Route 4: the modulus-integral form of the same embedding.
        {
            let params = format!("f={} route=modulus_integral", f.name);
            let (trunc_raw, extr_raw) = modulus_log_integral(
                &fp, j, 1.0, theta, qs, ctx.p, ctx.w(), &params,
            )?;
            let mut row = CheckRow::new(
                params,
                0.0,
                norm_q,
                extr_raw.powf(1.0 / qs) + norm_p,
            );
            row.integral_truncated = Some(trunc_raw.powf(1.0 / qs) + norm_p);
            row.integral_extrapolated = Some(extr_raw.powf(1.0 / qs) + norm_p);
            rows.push(row);
        }

        // Route 5: the modulus-series form over integer reciprocal steps.
        {
            let params = format!("f={} route=modulus_sum", f.name);
            let moduli: Vec<f64> = (1..=EXACT_ERROR_CAP)
                .into_par_iter()
                .map(|kk| {
                    modulus(&fp, j, 1.0 / kk as f64, ctx.p, ctx.w())
                        .map_err(|e| at_point(e, &params))
                })
                .collect::<Result<_>>()?;
            let mut head = 0.0;
            for (kk, om) in moduli.iter().enumerate().map(|(i, m)| (i + 1, m)) {
                if *om > 0.0 {
                    head += (kk as f64).powf(qs * theta - 1.0) * om.powf(qs);
                }
            }
            let fit_pts: Vec<(f64, f64)> = (EXACT_ERROR_CAP / 2..=EXACT_ERROR_CAP)
                .rev()
                .step_by(EXACT_ERROR_CAP / 8)
                .filter(|&kk| moduli[kk - 1] > 0.0)
                .map(|kk| (kk as f64, moduli[kk - 1]))
                .collect();
            let tail = tail_fit(&fit_pts)
                .and_then(|fit| {
                    TailFit {
                        slope: qs * (theta + fit.slope),
                        intercept: qs * fit.intercept,
                    }
                    .log_integral_above(EXACT_ERROR_CAP as f64 + 0.5)
                })
                .unwrap_or(0.0);
            let mut row = CheckRow::new(
                params,
                0.0,
                norm_q,
                (head + tail).powf(1.0 / qs) + norm_p,
            );
            row.integral_truncated = Some(head.powf(1.0 / qs) + norm_p);
            row.integral_extrapolated = Some((head + tail).powf(1.0 / qs) + norm_p);
            rows.push(row);
        }
    }
    Ok(RunnerOutput {
        rows,
        explicit_constant: None,
        hard_lower_bound: None,
        two_sided_slope: false,
        notes,
        verdict_override: None,
    })
}

/// Log-log interpolation of an error sequence at a real index `v >= 1`.
fn interp_error(errors: &[f64], v: f64) -> f64 {
    let hi_idx = errors.len() - 1;
    if v <= 1.0 {
        return errors[1.min(hi_idx)];
    }
    if v >= hi_idx as f64 {
        return errors[hi_idx];
    }
    let lo = v.floor() as usize;
    let (e0, e1) = (errors[lo], errors[lo + 1]);
    if e0 > 0.0 && e1 > 0.0 {
        let t = (v.ln() - (lo as f64).ln()) / (((lo + 1) as f64).ln() - (lo as f64).ln());
        (e0.ln() + t * (e1.ln() - e0.ln())).exp()
    } else {
        e0.min(e1)
    }
}

enum EquivKind {
    Realization,
    KFunctional,
}

fn run_equivalence(spec: &CheckSpec, ctx: &SpecContext, kind: EquivKind) -> Result<RunnerOutput> {
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    let lower = (1.0 + table.c1.value).powi(-(spec.r as i32));
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let f_rows = par_rows(&spec.n_list, |&n| {
            let nf = n as f64;
            let v = 1.0 / nf;
            let (label, params);
            let om = modulus(&fp, spec.r, v, ctx.p, ctx.w());
            let numerator = match kind {
                EquivKind::Realization => {
                    label = "realization";
                    params = format!("f={} kind={label} n={n}", f.name);
                    let u = best_approx(&fp, n as usize, ctx.p, ctx.w())
                        .map_err(|e| at_point(e, &params))?
                        .poly;
                    realization(&fp, &u, spec.r, n, ctx.p, ctx.w())
                        .map_err(|e| at_point(e, &params))?
                }
                EquivKind::KFunctional => {
                    label = "k_functional";
                    params = format!("f={} kind={label} n={n}", f.name);
                    k_functional_upper(&fp, spec.r, v, ctx.p, ctx.w())
                        .map_err(|e| at_point(e, &params))?
                        .value
                }
            };
            let om = om.map_err(|e| at_point(e, &params))?;
            Ok(vec![CheckRow::new(params, nf, numerator, om)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput {
        rows,
        explicit_constant: None,
        hard_lower_bound: Some(lower),
        two_sided_slope: true,
        notes: vec![format!(
            "hard lower bound (1 + C_1)^(-r) = {lower:.6e} with C_1 = {:.6e}",
            table.c1.value
        )],
        verdict_override: None,
    })
}

fn run_operator_uniform(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let name = spec.operator.as_deref().unwrap_or("steklov_T");
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    // (tag, trend abscissa, sweep label)
    let sweep: Vec<(OperatorTag, f64, String)> = match name {
        "steklov_T" => spec
            .v_list
            .iter()
            .map(|&v| (OperatorTag::Steklov { v }, 1.0 / v, format!("v={v}")))
            .collect(),
        "window_S" => spec
            .v_list
            .iter()
            .flat_map(|&v| {
                let lambda = 1.0 / v;
                let tau = std::f64::consts::PI / lambda;
                [
                    (
                        OperatorTag::Window { lambda, tau: 0.0 },
                        lambda,
                        format!("lambda={lambda} tau=0"),
                    ),
                    (
                        OperatorTag::Window { lambda, tau },
                        lambda,
                        format!("lambda={lambda} tau=pi/lambda"),
                    ),
                ]
            })
            .collect(),
        "jackson_D" => spec
            .n_list
            .iter()
            .map(|&n| (OperatorTag::Jackson { n }, n as f64, format!("n={n}")))
            .collect(),
        "vallee_poussin" => spec
            .n_list
            .iter()
            .map(|&n| (OperatorTag::ValleePoussin { n }, n as f64, format!("n={n}")))
            .collect(),
        other => {
            return Err(ApxError::InvalidParameter(format!(
                "unknown operator `{other}`; valid: steklov_T, window_S, jackson_D, \
                 vallee_poussin"
            )))
        }
    };
    let cap = match name {
        "steklov_T" => table.c1.value,
        "window_S" => table.c2.value,
        "jackson_D" => table.c10.value,
        "vallee_poussin" => 3.0 * table.c12.value,
        _ => unreachable!(),
    };
    let family: Vec<(String, TrigPoly)> = operator_norm_family(spec.seed)
        .iter()
        .map(|f| (f.name.clone(), working_poly(f)))
        .collect();
    let rows = par_rows(&sweep, |(tag, x, label)| {
        let mut worst: Option<CheckRow> = None;
        for (fname, fp) in &family {
            let params = format!("op={name} {label} f={fname}");
            let g = tag.apply(fp).map_err(|e| at_point(e, &params))?;
            let lhs = norm_poly(&g, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let rhs = norm_poly(fp, ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let row = CheckRow::new(params, *x, lhs, rhs);
            if worst.as_ref().map_or(true, |w| row.ratio > w.ratio) {
                worst = Some(row);
            }
        }
        Ok(worst.into_iter().collect())
    })?;
    Ok(RunnerOutput::enveloped(
        rows,
        cap,
        vec![format!(
            "operator {name}, envelope {cap:.6e}; rows show the worst member of the \
             {}-function family",
            family.len()
        )],
    ))
}

fn run_modulus_props(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    let order_cap = (1.0 + table.c1.value).powi(spec.r as i32);
    let margin = 1.0 + spec.tolerance.constant_margin;
    let k = spec.k;
    let mut v_sorted = spec.v_list.clone();
    v_sorted.sort_by(|a, b| b.partial_cmp(a).expect("steps are finite"));
    let v_max = v_sorted[0];
    let v_min = *v_sorted.last().expect("nonempty");
    let scale_lambdas: [f64; 4] = [1.5, 2.0, 3.7, 5.0];
    let scale_vs: [f64; 3] = [0.05, 0.1, 0.2];

    let mut rows = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut vanish_final: Vec<(String, f64)> = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let om = |kk: u32, v: f64| -> Result<f64> { modulus(&fp, kk, v, ctx.p, ctx.w()) };
        let base = om(k, v_max)?;
        // Vanishing: the modulus at the smallest step is compared to the
        // largest; only the final ratio is asserted (< 0.1).
        for &v in &v_sorted {
            let row = CheckRow::new(
                format!("f={} prop=vanish v={v}", f.name),
                1.0 / v,
                om(k, v)?,
                base,
            );
            if v == v_min {
                vanish_final.push((f.name.clone(), row.ratio));
                if !(row.ratio < 0.1) {
                    violations.push(format!(
                        "vanish: f={} ratio {:.3e} at v={v} not under 0.1",
                        f.name, row.ratio
                    ));
                }
            }
            rows.push(row);
        }
        // Order reduction: Omega_{k+r} <= (1 + C_1)^r Omega_k, hard.
        for &v in &v_sorted {
            let row = CheckRow::new(
                format!("f={} prop=order v={v}", f.name),
                1.0 / v,
                om(k + spec.r, v)?,
                om(k, v)?,
            );
            if row.ratio > order_cap * margin {
                violations.push(format!(
                    "order: f={} ratio {:.3e} exceeds (1+C_1)^r = {order_cap:.3e} at v={v}",
                    f.name, row.ratio
                ));
            }
            rows.push(row);
        }
        // Step scaling: Omega(lambda v) <= (1 + floor(lambda))^k Omega(v).
        for &lambda in &scale_lambdas {
            for &v in &scale_vs {
                if lambda * v > 1.0 {
                    continue;
                }
                let envelope = (1.0 + lambda.floor()).powi(k as i32);
                let row = CheckRow::new(
                    format!("f={} prop=scaling lambda={lambda} v={v}", f.name),
                    0.0,
                    om(k, lambda * v)?,
                    envelope * om(k, v)?,
                );
                if row.ratio > margin {
                    violations.push(format!(
                        "scaling: f={} ratio {:.3e} at lambda={lambda} v={v}",
                        f.name, row.ratio
                    ));
                }
                rows.push(row);
            }
        }
        // Quasi-monotonicity of v -> Omega(v)/v^k over consecutive steps,
        // with the envelope ((1 + floor(rho))/rho)^k implied by scaling.
        for win in v_sorted.windows(2) {
            let (v, d) = (win[0], win[1]);
            let rho = v / d;
            let envelope = ((1.0 + rho.floor()) / rho).powi(k as i32);
            let row = CheckRow::new(
                format!("f={} prop=quasi_monotone v={v} delta={d}", f.name),
                0.0,
                om(k, v)? * v.powi(-(k as i32)),
                envelope * om(k, d)? * d.powi(-(k as i32)),
            );
            if row.ratio > margin {
                violations.push(format!(
                    "quasi-monotone: f={} ratio {:.3e} at v={v} delta={d}",
                    f.name, row.ratio
                ));
            }
            rows.push(row);
        }
    }
    let mut notes = vec![format!(
        "order-reduction envelope (1+C_1)^r = {order_cap:.6e}; scaling/quasi-monotone rows \
         carry their envelopes in the bound side; vanish asserted only at v={v_min}"
    )];
    for (name, ratio) in &vanish_final {
        notes.push(format!("vanish: f={name} final ratio {ratio:.3e}"));
    }
    let verdict = if rows.iter().any(|r| !r.ratio.is_finite()) {
        Verdict::Inconclusive
    } else if violations.is_empty() {
        Verdict::BoundedByConstant
    } else {
        Verdict::Violated
    };
    notes.extend(violations);
    Ok(RunnerOutput {
        rows,
        explicit_constant: Some(order_cap),
        hard_lower_bound: None,
        two_sided_slope: false,
        notes,
        verdict_override: Some(verdict),
    })
}

fn run_upsilon_nikste(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    let cap = 2.0 * table.c2.value;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let dnorm = norm_poly(&fp.derivative(1), ctx.p, ctx.w())?;
        let f_rows = par_rows(&spec.v_list, |&l| {
            let params = format!("f={} l={l}", f.name);
            let averaged = OperatorTag::Steklov { v: l }
                .apply(&fp)
                .map_err(|e| at_point(e, &params))?;
            let rhs =
                norm_poly(&averaged.sub(&fp), ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            Ok(vec![CheckRow::new(params, 1.0 / l, l * dnorm, rhs)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::enveloped(
        rows,
        cap,
        vec![format!("envelope 2 C_2 = {cap:.6e}")],
    ))
}

fn run_jackson_operator(spec: &CheckSpec, ctx: &SpecContext) -> Result<RunnerOutput> {
    let table = explicit_constants(&ctx.weight, ctx.p, spec.r)?;
    // Chain constant assembled from the envelope table: the window bound on
    // the far field, the commutation bound, and the kernel-mean envelope.
    let cap = 72.0 * table.c2.value
        + table.c19.value * table.c1.value
        + 72.0 * table.c10.value * table.c2.value;
    let mut rows = Vec::new();
    for f in &ctx.functions {
        let fp = working_poly(f);
        let f_rows = par_rows(&spec.n_list, |&n| {
            let params = format!("f={} n={n}", f.name);
            let dn = OperatorTag::Jackson { n }
                .apply(&fp)
                .map_err(|e| at_point(e, &params))?;
            let lhs =
                norm_poly(&fp.sub(&dn), ctx.p, ctx.w()).map_err(|e| at_point(e, &params))?;
            let rhs = modulus(&fp, 1, 1.0 / n as f64, ctx.p, ctx.w())
                .map_err(|e| at_point(e, &params))?;
            Ok(vec![CheckRow::new(params, n as f64, lhs, rhs)])
        })?;
        rows.extend(f_rows);
    }
    Ok(RunnerOutput::enveloped(
        rows,
        cap,
        vec![format!("chain envelope {cap:.6e}")],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::abs_sin_series;

    fn base_spec(id: CheckId) -> CheckSpec {
        CheckSpec::default_for(id)
    }

    #[test]
    fn decay_fit_is_exact_on_power_data() {
        let series: Vec<(f64, f64)> = (4..=20)
            .map(|n| (n as f64, (n as f64).powf(-1.5)))
            .collect();
        let est = estimate_decay_exponent(&series).unwrap();
        assert!((est.beta_hat - 1.5).abs() < 1e-10, "{}", est.beta_hat);
        assert!(est.residual < 1e-12);
    }

    #[test]
    fn decay_fit_rejects_bad_series() {
        let short: Vec<(f64, f64)> = (1..=5).map(|n| (n as f64, 1.0)).collect();
        assert!(estimate_decay_exponent(&short).is_err());
        let nonpos: Vec<(f64, f64)> = (1..=6).map(|n| (n as f64, -1.0)).collect();
        assert!(estimate_decay_exponent(&nonpos).is_err());
    }

    #[test]
    fn best_error_decay_of_the_corner_function_is_three_halves() {
        let fp = abs_sin_series(2048);
        let prof = best_error_profile(&fp, 64, None).unwrap();
        let series: Vec<(f64, f64)> = (4..=64)
            .filter(|n| n % 4 == 0)
            .map(|n| (n as f64, prof[n]))
            .collect();
        let est = estimate_decay_exponent(&series).unwrap();
        assert!(
            (est.beta_hat - 1.5).abs() < 0.1,
            "beta_hat = {}",
            est.beta_hat
        );
    }

    #[test]
    fn second_modulus_decay_matches_the_error_decay() {
        let fp = abs_sin_series(2048);
        let series: Vec<(f64, f64)> = (2..=7)
            .map(|j| {
                let n = (1u32 << j) as f64;
                (n, modulus(&fp, 2, 1.0 / n, 2.0, None).unwrap())
            })
            .collect();
        let est = estimate_decay_exponent(&series).unwrap();
        assert!(
            (est.beta_hat - 1.5).abs() < 0.1,
            "beta_hat = {}",
            est.beta_hat
        );
    }

    #[test]
    fn equal_indices_make_the_norm_comparison_trivial() {
        let mut spec = base_spec(CheckId::Nikolskii);
        spec.weight = "const(1)".into();
        spec.p = NormIndex(2.0);
        spec.q = Some(NormIndex(2.0));
        spec.n_list = vec![4, 8, 16];
        spec.poly_count = 3;
        let report = run_check(&spec).unwrap();
        for row in &report.rows {
            assert!((row.ratio - 1.0).abs() < 1e-12, "ratio = {}", row.ratio);
        }
        assert_eq!(report.verdict, Verdict::Bounded);
    }

    #[test]
    fn polynomial_inputs_zero_out_the_direct_estimate() {
        let mut spec = base_spec(CheckId::Jackson);
        spec.functions = vec!["mode_cos_03".into()];
        spec.n_list = vec![4, 8, 16];
        let report = run_check(&spec).unwrap();
        for row in &report.rows {
            assert_eq!(row.ratio, 0.0, "row {}", row.params);
        }
        assert_eq!(report.verdict, Verdict::Bounded);
    }

    #[test]
    fn direct_estimate_is_bounded_on_corner_functions() {
        let mut spec = base_spec(CheckId::Jackson);
        spec.n_list = vec![4, 8, 16, 32, 64];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
        assert!(report.aggregate.max_ratio.is_finite());
    }

    #[test]
    fn inverse_estimate_is_bounded_on_corner_functions() {
        let mut spec = base_spec(CheckId::StechkinInverse);
        spec.n_list = vec![4, 8, 16, 32, 64];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
    }

    #[test]
    fn marchaud_is_bounded_on_the_corner_function() {
        let report = run_check(&base_spec(CheckId::Marchaud)).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
    }

    #[test]
    fn modulus_embedding_is_bounded_and_tails_agree() {
        let report = run_check(&base_spec(CheckId::UlyanovModulus)).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
        for row in &report.rows {
            let (t, e) = (
                row.integral_truncated.unwrap(),
                row.integral_extrapolated.unwrap(),
            );
            assert!(
                (e - t) / e < 0.05,
                "tail disagreement at {}: {t} vs {e}",
                row.params
            );
        }
    }

    #[test]
    fn series_embeddings_are_bounded_and_tails_agree() {
        let mut spec = base_spec(CheckId::UlyanovBestApprox);
        spec.n_list = vec![4, 8, 16, 32];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
        assert_eq!(report.rows.len(), 4 + 4);
        for row in &report.rows {
            let (t, e) = (
                row.integral_truncated.unwrap(),
                row.integral_extrapolated.unwrap(),
            );
            assert!(
                (e - t) / e < 0.05,
                "tail disagreement at {}: {t} vs {e}",
                row.params
            );
        }
    }

    #[test]
    fn derivative_envelope_holds_with_the_explicit_constant() {
        let mut spec = base_spec(CheckId::Bernstein);
        spec.n_list = vec![4, 8, 16, 32];
        spec.poly_count = 10;
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::BoundedByConstant);
        assert!(report.explicit_constant.unwrap() > 1.0);
    }

    #[test]
    fn realizations_stay_in_the_equivalence_band() {
        let mut spec = base_spec(CheckId::RealizationEquiv);
        spec.n_list = vec![4, 8, 16, 32, 64];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
        let lb = report.hard_lower_bound.unwrap();
        assert!(report.aggregate.min_ratio >= lb);
    }

    #[test]
    fn k_functional_stays_in_the_equivalence_band() {
        let mut spec = base_spec(CheckId::KfunctionalEquiv);
        spec.n_list = vec![4, 8, 16, 32, 64];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
    }

    #[test]
    fn averaging_operators_respect_their_envelopes() {
        let mut spec = base_spec(CheckId::OperatorUniform);
        spec.v_list = vec![1.0, 0.25, 0.05];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::BoundedByConstant);
        assert!(run_check(&CheckSpec {
            operator: Some("bogus".into()),
            ..base_spec(CheckId::OperatorUniform)
        })
        .is_err());
    }

    #[test]
    fn modulus_structure_properties_hold() {
        let report = run_check(&base_spec(CheckId::ModulusProps)).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::BoundedByConstant,
            "notes: {:?}",
            report.notes
        );
    }

    #[test]
    fn derivative_recovery_respects_the_envelope() {
        let report = run_check(&base_spec(CheckId::UpsilonNikste)).unwrap();
        assert_eq!(report.verdict, Verdict::BoundedByConstant);
        // As the step shrinks the averaged difference approaches (l/2) f',
        // so ratios concentrate near 2, far under the envelope.
        assert!(report.aggregate.max_ratio < 4.0);
    }

    #[test]
    fn kernel_mean_error_respects_the_chain_envelope() {
        let mut spec = base_spec(CheckId::JacksonOperator);
        spec.n_list = vec![4, 8, 16, 32];
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::BoundedByConstant);
    }

    #[test]
    fn hypothesis_violations_are_rejected() {
        // The embedding checks need p < q.
        let mut spec = base_spec(CheckId::UlyanovModulus);
        spec.p = NormIndex(2.0);
        spec.q = Some(NormIndex(2.0));
        assert!(run_check(&spec).is_err());
        // p = 1 with a weight growing from zero mass at the origin is
        // outside the integral-mean class.
        let mut spec = base_spec(CheckId::Jackson);
        spec.p = NormIndex(1.0);
        spec.weight = "power(0,0.5)".into();
        assert!(run_check(&spec).is_err());
        // Only order 1 is implemented for the derivative recovery.
        let mut spec = base_spec(CheckId::UpsilonNikste);
        spec.r = 2;
        assert!(run_check(&spec).is_err());
        // Marchaud starting steps must stay under 1/2.
        let mut spec = base_spec(CheckId::Marchaud);
        spec.v_list = vec![0.75];
        assert!(run_check(&spec).is_err());
        // Unknown function names are listed back.
        let mut spec = base_spec(CheckId::Jackson);
        spec.functions = vec!["no_such_function".into()];
        let err = run_check(&spec).unwrap_err().to_string();
        assert!(err.contains("abs_sin_pow_1"), "{err}");
    }

    #[test]
    fn spec_round_trips_through_json_with_inf_index() {
        let json = r#"{
            "check_id": "nikolskii",
            "p": "inf",
            "q": 2,
            "n_list": [4, 8],
            "weight": "power(0,0.5)"
        }"#;
        let spec: CheckSpec = serde_json::from_str(json).unwrap();
        assert!(spec.p.0.is_infinite());
        assert_eq!(spec.q, Some(NormIndex(2.0)));
        assert_eq!(spec.seed, 42);
        let back = serde_json::to_string(&spec).unwrap();
        assert!(back.contains("\"inf\""), "{back}");
        let report = run_check(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::Bounded, "{:?}", report.aggregate);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut spec = base_spec(CheckId::Nikolskii);
        spec.n_list = vec![4, 8, 16];
        spec.poly_count = 5;
        let a = run_check(&spec).unwrap();
        let b = run_check(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
        let mut spec = base_spec(CheckId::UlyanovModulus);
        spec.v_list = vec![0.25, 0.125];
        let a = run_check(&spec).unwrap();
        let b = run_check(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
    }
}
