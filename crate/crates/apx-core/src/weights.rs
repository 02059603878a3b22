//! Periodic weights and their class constants.
//!
//! A weight is a.e.-positive and 2*pi-periodic. Supported families: constant,
//! single power |x - x0|^alpha, products of up to four powers, and tabulated
//! samples. The module estimates the Muckenhoupt constant, the bounded-average
//! and essential-lower-bound pair used at p = 1, the doubling constant, and a
//! fitted (C7, p0) growth pair, all over a dyadic interval family evaluated
//! with prefix sums so refinement is structurally monotone.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{ApxError, Result};
use crate::fourier::{analyze, synthesize, trapezoid, PeriodicGrid, SampledFunction, TrigPoly};
use crate::quadrature::{integrate_periodic, IntegrateOpts, SingularPoint};

/// Dyadic depth of the estimation family: cells of width 2*pi*2^{-14}.
const LEVEL: usize = 14;
const CELLS: usize = 1 << LEVEL;

/// Wrap x into [-pi, pi).
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y -= 2.0 * PI;
    }
    y
}

#[derive(Debug, Clone)]
pub enum WeightFamily {
    Constant(f64),
    Power { x0: f64, alpha: f64 },
    /// Product of |x - x_i|^{beta_i} factors (at most four).
    Product(Vec<(f64, f64)>),
    /// Samples on the 2^14-point uniform grid.
    Tabulated(Arc<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct Weight {
    family: WeightFamily,
}

impl Weight {
    pub fn one() -> Self {
        Self {
            family: WeightFamily::Constant(1.0),
        }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(ApxError::InvalidWeight(format!(
                "constant weight must be positive and finite, got {c}"
            )));
        }
        Ok(Self {
            family: WeightFamily::Constant(c),
        })
    }

    pub fn power(x0: f64, alpha: f64) -> Result<Self> {
        if alpha <= -1.0 {
            return Err(ApxError::InvalidWeight(format!(
                "power exponent must exceed -1 for integrability, got {alpha}"
            )));
        }
        if !alpha.is_finite() || !x0.is_finite() {
            return Err(ApxError::InvalidWeight("non-finite power parameters".into()));
        }
        if alpha == 0.0 {
            // |x - x0|^0 is identically 1; canonicalize so the constant
            // fast paths (exact interval averages, unit class constants)
            // apply.
            return Ok(Self {
                family: WeightFamily::Constant(1.0),
            });
        }
        Ok(Self {
            family: WeightFamily::Power {
                x0: wrap_angle(x0),
                alpha,
            },
        })
    }

    pub fn product(factors: &[(f64, f64)]) -> Result<Self> {
        if factors.is_empty() || factors.len() > 4 {
            return Err(ApxError::InvalidWeight(format!(
                "product weight takes 1..=4 factors, got {}",
                factors.len()
            )));
        }
        let mut cleaned = Vec::with_capacity(factors.len());
        for &(x0, beta) in factors {
            if beta <= -1.0 {
                return Err(ApxError::InvalidWeight(format!(
                    "factor exponent must exceed -1 for integrability, got {beta}"
                )));
            }
            let loc = wrap_angle(x0);
            if cleaned.iter().any(|&(l, _): &(f64, f64)| (l - loc).abs() < 1e-12) {
                return Err(ApxError::InvalidWeight(
                    "product factor locations must be distinct".into(),
                ));
            }
            cleaned.push((loc, beta));
        }
        Ok(Self {
            family: WeightFamily::Product(cleaned),
        })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.len() != CELLS {
            return Err(ApxError::InvalidWeight(format!(
                "tabulated weight needs {} samples, got {}",
                CELLS,
                values.len()
            )));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(ApxError::InvalidWeight(
                "tabulated weight values must be nonnegative and finite".into(),
            ));
        }
        Ok(Self {
            family: WeightFamily::Tabulated(Arc::new(values)),
        })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// The constant value when the family is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.family {
            WeightFamily::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Power-type points (location, exponent) with a nonzero exponent.
    pub fn singular_points(&self) -> Vec<SingularPoint> {
        match &self.family {
            WeightFamily::Constant(_) | WeightFamily::Tabulated(_) => Vec::new(),
            WeightFamily::Power { x0, alpha } => {
                if alpha.abs() > 0.0 {
                    vec![SingularPoint {
                        location: *x0,
                        exponent: *alpha,
                    }]
                } else {
                    Vec::new()
                }
            }
            WeightFamily::Product(f) => f
                .iter()
                .filter(|(_, b)| b.abs() > 0.0)
                .map(|&(location, exponent)| SingularPoint { location, exponent })
                .collect(),
        }
    }

    /// Antipodes of the power centers: the periodization |x - x0|^alpha has a
    /// derivative kink opposite each center.
    pub fn kink_points(&self) -> Vec<f64> {
        self.singular_points()
            .iter()
            .map(|s| wrap_angle(s.location + PI))
            .collect()
    }

    /// Locations where the weight is declared to vanish (positive exponents,
    /// or exact zeros of a tabulated weight).
    pub fn declared_zeros(&self) -> Vec<f64> {
        match &self.family {
            WeightFamily::Tabulated(values) => values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == 0.0)
                .map(|(j, _)| -PI + 2.0 * PI * j as f64 / CELLS as f64)
                .collect(),
            _ => self
                .singular_points()
                .iter()
                .filter(|s| s.exponent > 0.0)
                .map(|s| s.location)
                .collect(),
        }
    }

    /// Pointwise evaluation with periodic extension; a pole (negative
    /// exponent) hit exactly is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = wrap_angle(x);
        match &self.family {
            WeightFamily::Constant(c) => Ok(*c),
            WeightFamily::Power { x0, alpha } => {
                let d = wrap_angle(x - x0).abs();
                if d == 0.0 && *alpha < 0.0 {
                    return Err(ApxError::WeightPole(x));
                }
                Ok(d.powf(*alpha))
            }
            WeightFamily::Product(factors) => {
                let mut acc = 1.0;
                for &(x0, beta) in factors {
                    let d = wrap_angle(x - x0).abs();
                    if d == 0.0 && beta < 0.0 {
                        return Err(ApxError::WeightPole(x));
                    }
                    acc *= d.powf(beta);
                }
                Ok(acc)
            }
            WeightFamily::Tabulated(values) => {
                // Nearest-sample lookup; the table is the weight's definition.
                let t = (x + PI) / (2.0 * PI) * CELLS as f64;
                let j = (t.round() as usize) % CELLS;
                Ok(values[j])
            }
        }
    }

    /// Inverse of [`Weight::descriptor`] for the closed-form families:
    /// `const(1)`, `const(2.5)`, `power(x0,alpha)`, `product[(x0,a),(x1,b)]`,
    /// plus the aliases `1` and `one`.  Tabulated weights round-trip through
    /// their values, not through a descriptor, and are rejected here.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let s = descriptor.trim();
        let bad = |msg: &str| -> ApxError {
            ApxError::InvalidWeight(format!("cannot parse descriptor `{s}`: {msg}"))
        };
        let number = |txt: &str| -> Result<f64> {
            txt.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{}` is not a number", txt.trim())))
        };
        if s == "1" || s.eq_ignore_ascii_case("one") || s == "const(1)" {
            return Ok(Weight::one());
        }
        if let Some(inner) = s.strip_prefix("const(").and_then(|t| t.strip_suffix(')')) {
            return Weight::constant(number(inner)?);
        }
        if let Some(inner) = s.strip_prefix("power(").and_then(|t| t.strip_suffix(')')) {
            let mut parts = inner.splitn(2, ',');
            let x0 = number(parts.next().ok_or_else(|| bad("missing x0"))?)?;
            let alpha = number(parts.next().ok_or_else(|| bad("missing exponent"))?)?;
            return Weight::power(x0, alpha);
        }
        if let Some(inner) = s.strip_prefix("product[").and_then(|t| t.strip_suffix(']')) {
            let mut factors = Vec::new();
            let mut rest = inner.trim();
            while !rest.is_empty() {
                let open = rest
                    .strip_prefix('(')
                    .ok_or_else(|| bad("expected `(` in factor list"))?;
                let close = open
                    .find(')')
                    .ok_or_else(|| bad("unbalanced parenthesis in factor list"))?;
                let body = &open[..close];
                let mut parts = body.splitn(2, ',');
                let x0 = number(parts.next().ok_or_else(|| bad("missing factor x0"))?)?;
                let b = number(parts.next().ok_or_else(|| bad("missing factor exponent"))?)?;
                factors.push((x0, b));
                rest = open[close + 1..].trim().trim_start_matches(',').trim();
            }
            if factors.is_empty() {
                return Err(bad("empty factor list"));
            }
            return Weight::product(&factors);
        }
        Err(bad(
            "expected one of `const(c)`, `power(x0,alpha)`, `product[(x0,a),...]`, `one`",
        ))
    }

    /// A short human-readable descriptor used in reports.
    pub fn descriptor(&self) -> String {
        match &self.family {
            WeightFamily::Constant(c) => {
                if (*c - 1.0).abs() < 1e-15 {
                    "const(1)".to_string()
                } else {
                    format!("const({c})")
                }
            }
            WeightFamily::Power { x0, alpha } => format!("power({x0},{alpha})"),
            WeightFamily::Product(f) => {
                let parts: Vec<String> =
                    f.iter().map(|(x0, b)| format!("({x0},{b})")).collect();
                format!("product[{}]", parts.join(","))
            }
            WeightFamily::Tabulated(_) => "tabulated".to_string(),
        }
    }

    /// Stable cache key derived from the family's bit patterns.
    pub fn cache_key(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        match &self.family {
            WeightFamily::Constant(c) => {
                0u8.hash(&mut h);
                c.to_bits().hash(&mut h);
            }
            WeightFamily::Power { x0, alpha } => {
                1u8.hash(&mut h);
                x0.to_bits().hash(&mut h);
                alpha.to_bits().hash(&mut h);
            }
            WeightFamily::Product(f) => {
                2u8.hash(&mut h);
                for (x0, b) in f {
                    x0.to_bits().hash(&mut h);
                    b.to_bits().hash(&mut h);
                }
            }
            WeightFamily::Tabulated(v) => {
                3u8.hash(&mut h);
                for x in v.iter() {
                    x.to_bits().hash(&mut h);
                }
            }
        }
        h.finish()
    }

    /// Integral of the weight over the period.
    pub fn l1_norm(&self) -> f64 {
        match &self.family {
            WeightFamily::Constant(c) => 2.0 * PI * c,
            WeightFamily::Power { alpha, .. } => 2.0 * PI.powf(alpha + 1.0) / (alpha + 1.0),
            _ => {
                let cells = cell_integrals(self, 1.0).expect("weight family is integrable");
                cells.iter().sum()
            }
        }
    }

    /// Exponential Fourier coefficients c_k = (1/2pi) int gamma e^{-ikx} dx
    /// for k = 0..=max_k, cached per weight.
    pub fn fourier_coeffs(&self, max_k: usize) -> Arc<Vec<Complex64>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Complex64>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = self.cache_key();
        {
            let guard = cache.lock().expect("weight coeff cache poisoned");
            if let Some(existing) = guard.get(&key) {
                if existing.len() > max_k {
                    return existing.clone();
                }
            }
        }
        let computed = Arc::new(self.compute_fourier_coeffs(max_k));
        let mut guard = cache.lock().expect("weight coeff cache poisoned");
        let entry = guard.entry(key).or_insert_with(|| computed.clone());
        if entry.len() < computed.len() {
            *entry = computed.clone();
        }
        entry.clone()
    }

    fn compute_fourier_coeffs(&self, max_k: usize) -> Vec<Complex64> {
        match &self.family {
            WeightFamily::Constant(c) => {
                let mut out = vec![Complex64::new(0.0, 0.0); max_k + 1];
                out[0] = Complex64::new(*c, 0.0);
                out
            }
            WeightFamily::Power { x0, alpha } => {
                let h = power_cos_moments(*alpha, max_k);
                (0..=max_k)
                    .map(|k| {
                        let phase = Complex64::from_polar(1.0, -(k as f64) * x0);
                        phase * (h[k] / PI)
                    })
                    .collect()
            }
            WeightFamily::Product(_) => {
                // Direct oscillatory integrals per mode; accurate but O(k)
                // work per coefficient, so large requests are slow. The
                // built-in experiment suites only use constant and single
                // power weights on this path.
                (0..=max_k)
                    .map(|k| {
                        let kf = k as f64;
                        let re = integrate_periodic(
                            &|x| self.eval(x).unwrap_or(0.0) * (kf * x).cos(),
                            &self.singular_points(),
                            &self.kink_points(),
                            &IntegrateOpts::with_freq(kf + 8.0),
                        )
                        .expect("product weight is integrable");
                        let im = integrate_periodic(
                            &|x| -self.eval(x).unwrap_or(0.0) * (kf * x).sin(),
                            &self.singular_points(),
                            &self.kink_points(),
                            &IntegrateOpts::with_freq(kf + 8.0),
                        )
                        .expect("product weight is integrable");
                        Complex64::new(re, im) / (2.0 * PI)
                    })
                    .collect()
            }
            WeightFamily::Tabulated(values) => {
                let grid = PeriodicGrid::new(CELLS).expect("fixed grid size");
                let sf = SampledFunction::new(grid, values.as_ref().clone())
                    .expect("lengths match by construction");
                let p = analyze(&sf);
                (0..=max_k).map(|k| p.c_coeff(k)).collect()
            }
        }
    }

    /// Quadrature weights `omega` on `grid` such that `sum omega_j g(x_j)`
    /// equals `int g gamma dx` exactly for every trigonometric polynomial g
    /// of degree < N/2 (up to the accuracy of the weight's Fourier
    /// coefficients). Cached per (weight, grid).
    pub fn band_limited_rule(&self, grid: &PeriodicGrid) -> Arc<Vec<f64>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<Vec<f64>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (self.cache_key(), grid.n_points());
        {
            let guard = cache.lock().expect("rule cache poisoned");
            if let Some(r) = guard.get(&key) {
                return r.clone();
            }
        }
        let n = grid.n_points();
        let deg = n / 2 - 1;
        let coeffs = self.fourier_coeffs(deg);
        // omega_j = (2pi/N) * S_gamma(x_j) where S_gamma is the degree-(N/2-1)
        // Fourier partial sum of the weight.
        let partial = TrigPoly {
            a0: coeffs[0].re,
            a: (1..=deg).map(|k| 2.0 * coeffs[k].re).collect(),
            b: (1..=deg).map(|k| -2.0 * coeffs[k].im).collect(),
        };
        let samples = synthesize(&partial, grid).expect("degree fits by construction");
        let scale = 2.0 * PI / n as f64;
        let rule = Arc::new(samples.values.iter().map(|v| scale * v).collect::<Vec<_>>());
        let mut guard = cache.lock().expect("rule cache poisoned");
        guard.entry(key).or_insert_with(|| rule.clone()).clone()
    }
}

/// Cosine moments I_k = int_0^pi u^alpha cos(ku) du for k = 0..=max_k.
///
/// Uses the rescaling I_k = k^{-(alpha+1)} C(k pi) with C(T) = int_0^T
/// t^alpha cos t dt, and builds C(k pi) cumulatively with two Gauss panels
/// per half-period, so the whole table costs O(max_k) work.
fn power_cos_moments(alpha: f64, max_k: usize) -> Vec<f64> {
    debug_assert!(alpha > -1.0);
    let mut out = Vec::with_capacity(max_k + 1);
    out.push(PI.powf(alpha + 1.0) / (alpha + 1.0));
    if max_k == 0 {
        return out;
    }
    // C(pi): singular (for alpha < 0) at t = 0; reuse the graded machinery by
    // integrating u^alpha cos u over one period of the half-line variable.
    let first = integrate_periodic(
        &|x| {
            // Map [-pi, pi) onto [0, pi) twice; only the magnitude matters.
            let t = x.abs();
            t.powf(alpha) * t.cos() * 0.5
        },
        &[SingularPoint {
            location: 0.0,
            exponent: alpha,
        }],
        &[],
        &IntegrateOpts::default(),
    )
    .expect("alpha > -1 is integrable");
    let rule = crate::quadrature::gauss_legendre(8);
    let mut c_values = Vec::with_capacity(max_k);
    let mut acc = first;
    c_values.push(acc);
    for j in 1..max_k {
        // Increment over [j pi, (j+1) pi] with two 8-node panels.
        let lo = j as f64 * PI;
        for half_panel in 0..2 {
            let a = lo + 0.5 * PI * half_panel as f64;
            let half = 0.25 * PI;
            let mid = a + half;
            let mut s = 0.0;
            for (t, w) in rule.nodes.iter().zip(rule.weights.iter()) {
                let u = mid + half * t;
                s += w * u.powf(alpha) * u.cos();
            }
            acc += half * s;
        }
        c_values.push(acc);
    }
    for k in 1..=max_k {
        let kf = k as f64;
        out.push(kf.powf(-(alpha + 1.0)) * c_values[k - 1]);
    }
    out
}

// ---------------------------------------------------------------------------
// Dyadic cell integrals and prefix sums
// ---------------------------------------------------------------------------

/// Integral of gamma^s over each of the 2^14 dyadic cells.
///
/// Errors when gamma^s is non-integrable (scaled exponent <= -1 at some
/// power point).
fn cell_integrals(w: &Weight, s: f64) -> Result<Vec<f64>> {
    if let WeightFamily::Tabulated(values) = w.family() {
        let h = 2.0 * PI / CELLS as f64;
        return Ok(values.iter().map(|v| v.powf(s) * h).collect());
    }
    let scaled: Vec<SingularPoint> = w
        .singular_points()
        .iter()
        .map(|p| SingularPoint {
            location: p.location,
            exponent: p.exponent * s,
        })
        .collect();
    for p in &scaled {
        if p.exponent <= -1.0 {
            return Err(ApxError::DivergentIntegral(format!(
                "gamma^{} has exponent {} at x = {}",
                s, p.exponent, p.location
            )));
        }
    }
    let h = 2.0 * PI / CELLS as f64;
    let rule = crate::quadrature::gauss_legendre(8);
    let f = |x: f64| w.eval(x).map(|v| v.powf(s)).unwrap_or(f64::INFINITY);
    let opts = IntegrateOpts::default();
    let mut out = Vec::with_capacity(CELLS);
    for j in 0..CELLS {
        let lo = -PI + h * j as f64;
        let hi = lo + h;
        // Does a power point or kink touch this cell (interior or boundary)?
        let mut split: Option<(f64, f64)> = None; // (location, exponent)
        for p in &scaled {
            for loc in [p.location, p.location + 2.0 * PI, p.location - 2.0 * PI] {
                if loc >= lo - 1e-13 && loc <= hi + 1e-13 {
                    split = Some((loc.clamp(lo, hi), p.exponent));
                }
            }
        }
        let v = match split {
            None => {
                let half = 0.5 * h;
                let mid = lo + half;
                let mut acc = 0.0;
                for (t, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
                    acc += wt * f(mid + half * t);
                }
                half * acc
            }
            Some((loc, expo)) => {
                let mut acc = 0.0;
                if loc - lo > 1e-15 {
                    acc += right_graded(&f, lo, loc, expo, &opts);
                }
                if hi - loc > 1e-15 {
                    acc += left_graded(&f, loc, hi, expo, &opts);
                }
                acc
            }
        };
        out.push(v);
    }
    Ok(out)
}

pub(crate) fn left_graded(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    alpha: f64,
    _opts: &IntegrateOpts,
) -> f64 {
    // Small-interval grading toward a left-endpoint power point: geometric
    // shells with a Gauss–Jacobi closure, mirroring the quadrature module's
    // scheme at cell scale.
    let rule = crate::quadrature::gauss_legendre(8);
    let jrule = crate::quadrature::gauss_jacobi_left(8, alpha);
    let d = b - a;
    let mut total = 0.0;
    let mut hi = d;
    for _ in 0..24 {
        let lo = hi / 2.0;
        let half = 0.5 * (hi - lo);
        let mid = a + lo + half;
        let mut acc = 0.0;
        for (t, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
            acc += wt * f(mid + half * t);
        }
        total += half * acc;
        hi = lo;
        if hi < 1e-9 * d.max(1.0) {
            break;
        }
    }
    let half = 0.5 * hi;
    let scale = half.powf(alpha + 1.0);
    let mut acc = 0.0;
    for (t, wt) in jrule.nodes.iter().zip(jrule.weights.iter()) {
        let x = a + half * (1.0 + t);
        acc += wt * f(x) / (x - a).powf(alpha);
    }
    total + scale * acc
}

pub(crate) fn right_graded(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    alpha: f64,
    opts: &IntegrateOpts,
) -> f64 {
    let g = |x: f64| f(a + b - x);
    left_graded(&g, a, b, alpha, opts)
}

fn prefix_sums(cells: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for c in cells {
        acc += c;
        out.push(acc);
    }
    out
}

/// Sum over the wrapped cell range [start, start + len) (indices mod CELLS).
fn range_sum(prefix: &[f64], start: usize, len: usize) -> f64 {
    let n = prefix.len() - 1;
    debug_assert!(len <= n);
    let end = start + len;
    if end <= n {
        prefix[end] - prefix[start]
    } else {
        (prefix[n] - prefix[start]) + prefix[end - n]
    }
}

/// An interval-family supremum together with its refinement diagnostics.
#[derive(Debug, Clone)]
pub struct RefinedEstimate {
    /// Supremum over the whole dyadic family.
    pub value: f64,
    /// Ratio of the cumulative suprema at the two finest width levels;
    /// values near 1 indicate stabilization, large values divergence.
    pub refinement_trend: f64,
    /// Cumulative supremum after each width level 0..=14.
    pub cumulative_by_level: Vec<f64>,
}

impl RefinedEstimate {
    pub fn stabilized(&self) -> bool {
        self.refinement_trend <= 1.05
    }
}

fn family_supremum(per_interval: impl Fn(usize, usize) -> f64) -> RefinedEstimate {
    // Widths 2^(14-l) cells for l = 0..=14; starts at every finest-level cell
    // (a superset of any dyadic-center reading), wrapping around the circle.
    let mut cumulative = Vec::with_capacity(LEVEL + 1);
    let mut best = f64::NEG_INFINITY;
    for l in 0..=LEVEL {
        let len = CELLS >> l;
        let mut level_best = f64::NEG_INFINITY;
        for start in 0..CELLS {
            let v = per_interval(start, len);
            if v > level_best {
                level_best = v;
            }
        }
        best = best.max(level_best);
        cumulative.push(best);
    }
    RefinedEstimate {
        value: best,
        refinement_trend: cumulative[LEVEL] / cumulative[LEVEL - 1],
        cumulative_by_level: cumulative,
    }
}

/// Estimate of the Muckenhoupt constant for 1 < p < infinity.
pub fn muckenhoupt_constant(w: &Weight, p: f64) -> Result<RefinedEstimate> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ApxError::InvalidParameter(format!(
            "Muckenhoupt constant needs p in (1, inf), got {p}"
        )));
    }
    if let Some(_c) = w.as_constant() {
        // Every interval average is exact: the functional is identically 1.
        return Ok(RefinedEstimate {
            value: 1.0,
            refinement_trend: 1.0,
            cumulative_by_level: vec![1.0; LEVEL + 1],
        });
    }
    let dual_s = -1.0 / (p - 1.0);
    let cells_g = cell_integrals(w, 1.0)?;
    let cells_d = cell_integrals(w, dual_s).map_err(|_| ApxError::NotInClass {
        p,
        reason: format!(
            "inner integral divergent: gamma^(-1/(p-1)) has a non-integrable exponent (p = {p})"
        ),
    })?;
    let pg = prefix_sums(&cells_g);
    let pd = prefix_sums(&cells_d);
    let h = 2.0 * PI / CELLS as f64;
    Ok(family_supremum(|start, len| {
        let mes = h * len as f64;
        let avg_g = range_sum(&pg, start, len) / mes;
        let avg_d = range_sum(&pd, start, len) / mes;
        avg_g * avg_d.powf(p - 1.0)
    }))
}

/// Bounded-average constant (plain interval averages of the weight).
pub fn bounded_average_constant(w: &Weight) -> RefinedEstimate {
    if let Some(c) = w.as_constant() {
        // Every interval average of a constant weight is the constant itself.
        return RefinedEstimate {
            value: c,
            refinement_trend: 1.0,
            cumulative_by_level: vec![c; LEVEL + 1],
        };
    }
    let cells_g = cell_integrals(w, 1.0).expect("weight is integrable by construction");
    let pg = prefix_sums(&cells_g);
    let h = 2.0 * PI / CELLS as f64;
    family_supremum(|start, len| {
        let mes = h * len as f64;
        range_sum(&pg, start, len) / mes
    })
}

/// Essential lower bound: grid minimum excluding 1e-6-balls around declared
/// zeros.
pub fn essential_lower_bound(w: &Weight) -> f64 {
    let zeros = w.declared_zeros();
    let eps = 1e-6;
    let mut min = f64::INFINITY;
    for j in 0..CELLS {
        let x = -PI + 2.0 * PI * j as f64 / CELLS as f64;
        if zeros.iter().any(|&z| wrap_angle(x - z).abs() < eps) {
            continue;
        }
        let v = w.eval(x).unwrap_or(f64::INFINITY);
        if v < min {
            min = v;
        }
    }
    min
}

/// Constants of the p = 1 class: bounded averages plus essential lower bound.
#[derive(Debug, Clone)]
pub struct S1Report {
    pub gamma_1: RefinedEstimate,
    pub c8: f64,
    pub has_declared_zero: bool,
    pub in_class: bool,
}

pub fn s1_constants(w: &Weight) -> S1Report {
    let gamma_1 = bounded_average_constant(w);
    let c8 = essential_lower_bound(w);
    let has_declared_zero = !w.declared_zeros().is_empty();
    S1Report {
        gamma_1,
        c8,
        has_declared_zero,
        in_class: !has_declared_zero && c8 > 0.0,
    }
}

/// Doubling constant: sup over dyadic intervals of gamma(2J)/gamma(J).
pub fn doubling_constant(w: &Weight) -> f64 {
    let cells = cell_integrals(w, 1.0).expect("weight is integrable by construction");
    let prefix = prefix_sums(&cells);
    let mut best: f64 = 1.0;
    for l in 1..LEVEL {
        let len = CELLS >> l;
        let half = len / 2;
        for start in (0..CELLS).step_by(len) {
            let inner = range_sum(&prefix, start, len);
            let outer_start = (start + CELLS - half) % CELLS;
            let outer = range_sum(&prefix, outer_start, 2 * len);
            if inner > 0.0 {
                best = best.max(outer / inner);
            }
        }
    }
    best
}

/// Fitted growth pair for the measure-ratio condition, in the printed
/// orientation (enlargements E of I) and the conventional one (subsets).
#[derive(Debug, Clone)]
pub struct GrowthFit {
    pub c7: f64,
    pub p0: f64,
    /// Same fit with E taken as dyadic subsets of I instead of enlargements.
    pub c7_subset: f64,
    pub p0_subset: f64,
}

pub fn growth_fit(w: &Weight) -> GrowthFit {
    let cells = cell_integrals(w, 1.0).expect("weight is integrable by construction");
    let prefix = prefix_sums(&cells);
    let fit = |pairs: &[(f64, f64)]| -> (f64, f64) {
        // Least squares of y = c + p0 x, then envelope for the constant.
        let n = pairs.len() as f64;
        let sx: f64 = pairs.iter().map(|p| p.0).sum();
        let sy: f64 = pairs.iter().map(|p| p.1).sum();
        let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        let slope = if denom.abs() > 1e-12 {
            (n * sxy - sx * sy) / denom
        } else {
            1.0
        };
        let envelope = pairs
            .iter()
            .map(|(x, y)| y - slope * x)
            .fold(f64::NEG_INFINITY, f64::max);
        (envelope.exp(), slope)
    };

    let mut up_pairs = Vec::new();
    let mut down_pairs = Vec::new();
    for l in 4..=10usize {
        let len = CELLS >> l;
        for start in (0..CELLS).step_by(len) {
            let gi = range_sum(&prefix, start, len);
            if gi <= 0.0 {
                continue;
            }
            // Enlargements: dyadic ancestors 1..=4 levels up.
            for j in 1..=4usize {
                if l < j {
                    break;
                }
                let big = len << j;
                let anchor = (start / big) * big;
                let ge = range_sum(&prefix, anchor, big);
                up_pairs.push(((j as f64) * 2f64.ln(), (ge / gi).ln()));
            }
            // Subsets: dyadic descendants 1..=4 levels down.
            for j in 1..=4usize {
                let small = len >> j;
                if small == 0 {
                    break;
                }
                for sub in 0..(1usize << j) {
                    let gs = range_sum(&prefix, start + sub * small, small);
                    if gs > 0.0 {
                        down_pairs.push((-(j as f64) * 2f64.ln(), (gs / gi).ln()));
                    }
                }
            }
        }
    }
    let (c7, p0) = fit(&up_pairs);
    let (c7s, p0s) = fit(&down_pairs);
    GrowthFit {
        c7,
        p0,
        c7_subset: c7s,
        p0_subset: p0s,
    }
}

/// Full classification at a given p, with estimated constants.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub p: f64,
    pub in_class: bool,
    pub reason: String,
    pub muckenhoupt: Option<RefinedEstimate>,
    pub s1: Option<S1Report>,
    pub growth: GrowthFit,
    pub doubling_c6: f64,
}

/// Classify the weight for the norm index p (p = 1, finite p > 1, or
/// infinity), estimating and caching the class constants.
pub fn classify_weight(w: &Weight, p: f64) -> Result<Arc<ClassReport>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Arc<ClassReport>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (w.cache_key(), p.to_bits());
    {
        let guard = cache.lock().expect("class cache poisoned");
        if let Some(r) = guard.get(&key) {
            return Ok(r.clone());
        }
    }
    if !(p >= 1.0) {
        return Err(ApxError::InvalidParameter(format!(
            "norm index must satisfy p >= 1, got {p}"
        )));
    }
    let growth = growth_fit(w);
    let doubling_c6 = doubling_constant(w);
    let report = if p == 1.0 {
        let s1 = s1_constants(w);
        ClassReport {
            p,
            in_class: s1.in_class,
            reason: if s1.in_class {
                "essential lower bound is positive and no zeros are declared".into()
            } else if s1.has_declared_zero {
                "weight has a declared zero (essential lower bound fails)".into()
            } else {
                "essential lower bound is zero".into()
            },
            muckenhoupt: None,
            s1: Some(s1),
            growth,
            doubling_c6,
        }
    } else if p.is_infinite() {
        let constant = w.as_constant().is_some();
        ClassReport {
            p,
            in_class: constant,
            reason: if constant {
                "constant weight (the sup-norm ignores the weight)".into()
            } else {
                "p = infinity requires a constant weight".into()
            },
            muckenhoupt: None,
            s1: None,
            growth,
            doubling_c6,
        }
    } else {
        match muckenhoupt_constant(w, p) {
            Ok(est) => {
                let stable = est.stabilized();
                ClassReport {
                    p,
                    in_class: stable,
                    reason: if stable {
                        "Muckenhoupt functional stabilized under refinement".into()
                    } else {
                        format!(
                            "Muckenhoupt functional still growing at the finest level \
                             (trend {:.3})",
                            est.refinement_trend
                        )
                    },
                    muckenhoupt: Some(est),
                    s1: None,
                    growth,
                    doubling_c6,
                }
            }
            Err(ApxError::NotInClass { reason, .. }) => ClassReport {
                p,
                in_class: false,
                reason,
                muckenhoupt: None,
                s1: None,
                growth,
                doubling_c6,
            },
            Err(e) => return Err(e),
        }
    };
    let arc = Arc::new(report);
    let mut guard = cache.lock().expect("class cache poisoned");
    Ok(guard.entry(key).or_insert_with(|| arc.clone()).clone())
}

// ---------------------------------------------------------------------------
// Weighted quadrature entry point
// ---------------------------------------------------------------------------

/// Input to [`quadrature`]: sampled data, a polynomial, or a closure with
/// declared kinks and an oscillation hint.
pub enum QuadInput<'a> {
    Sampled(&'a SampledFunction),
    Poly(&'a TrigPoly),
    Closure {
        f: &'a dyn Fn(f64) -> f64,
        kinks: &'a [f64],
        freq_hint: f64,
    },
}

/// Integral of `f * gamma` (or plain `f`) over the period.
pub fn quadrature(input: QuadInput<'_>, w: Option<&Weight>) -> Result<f64> {
    match (input, w) {
        (QuadInput::Poly(p), None) => Ok(2.0 * PI * p.a0),
        (QuadInput::Poly(p), Some(w)) => {
            if let Some(c) = w.as_constant() {
                return Ok(2.0 * PI * p.a0 * c);
            }
            let coeffs = w.fourier_coeffs(p.degree());
            let mut acc = p.a0 * coeffs[0].re;
            for k in 1..=p.degree() {
                acc += 2.0 * (p.c_coeff(k) * coeffs[k].conj()).re;
            }
            Ok(2.0 * PI * acc)
        }
        (QuadInput::Sampled(s), None) => Ok(trapezoid(s)),
        (QuadInput::Sampled(s), Some(w)) => {
            if let Some(c) = w.as_constant() {
                return Ok(c * trapezoid(s));
            }
            let rule = w.band_limited_rule(&s.grid);
            Ok(rule
                .iter()
                .zip(s.values.iter())
                .map(|(o, v)| o * v)
                .sum())
        }
        (
            QuadInput::Closure {
                f,
                kinks,
                freq_hint,
            },
            w,
        ) => {
            let opts = IntegrateOpts::with_freq(freq_hint);
            match w {
                None => integrate_periodic(f, &[], kinks, &opts),
                Some(w) => {
                    let sing = w.singular_points();
                    let mut all_kinks = w.kink_points();
                    all_kinks.extend_from_slice(kinks);
                    let g = |x: f64| f(x) * w.eval(x).unwrap_or(f64::INFINITY);
                    integrate_periodic(&g, &sing, &all_kinks, &opts)
                }
            }
        }
    }
}
