//! One-dimensional quadrature: cached Gauss–Legendre and Gauss–Jacobi rules
//! (Golub–Welsch), composite panel integration with frequency-aware panel
//! sizing, and geometric grading into endpoint power singularities.

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{ApxError, Result};

/// Nodes/weights of an n-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Rule {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
    }
    for i in 0..n - 1 {
        m[(i, i + 1)] = offdiag[i];
        m[(i + 1, i)] = offdiag[i];
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)];
            (node, w)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point Gauss–Legendre rule on [-1, 1], cached per n.
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let diag = vec![0.0; n];
            let offdiag: Vec<f64> = (1..n)
                .map(|k| {
                    let k = k as f64;
                    (k * k / (4.0 * k * k - 1.0)).sqrt()
                })
                .collect();
            golub_welsch(&diag, &offdiag, 2.0)
        })
        .clone()
}

/// n-point Gauss–Jacobi rule on [-1, 1] for the weight `(1 + t)^beta`
/// (singular or vanishing factor at the left endpoint), beta > -1.
pub fn gauss_jacobi_left(n: usize, beta: f64) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss-jacobi cache poisoned");
    guard
        .entry((n, beta.to_bits()))
        .or_insert_with(|| {
            // Jacobi(alpha=0, beta) three-term recurrence.
            let mut diag = Vec::with_capacity(n);
            diag.push(beta / (beta + 2.0));
            for k in 1..n {
                let k = k as f64;
                diag.push(beta * beta / ((2.0 * k + beta) * (2.0 * k + beta + 2.0)));
            }
            let offdiag: Vec<f64> = (1..n)
                .map(|k| {
                    let k = k as f64;
                    let num = 2.0 * k * (k + beta) / (2.0 * k + beta);
                    (num * num / ((2.0 * k + beta + 1.0) * (2.0 * k + beta - 1.0))).sqrt()
                })
                .collect();
            let mu0 = 2f64.powf(beta + 1.0) / (beta + 1.0);
            golub_welsch(&diag, &offdiag, mu0)
        })
        .clone()
}

/// Composite n-panel, 8-node Gauss–Legendre integral of `f` over [a, b].
pub fn integrate_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(8);
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + w * p as f64;
        let half = 0.5 * w;
        let mid = lo + half;
        let mut acc = 0.0;
        for (t, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
            acc += wt * f(mid + half * t);
        }
        total += half * acc;
    }
    total
}

/// Options controlling the panel integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOpts {
    /// Largest angular frequency expected in the integrand; panel widths are
    /// chosen so each panel spans at most ~4 radians of the fastest phase.
    pub freq_hint: f64,
    /// Geometric grading levels toward each singular endpoint.
    pub levels: usize,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self {
            freq_hint: 128.0,
            levels: 40,
        }
    }
}

impl IntegrateOpts {
    pub fn with_freq(freq_hint: f64) -> Self {
        Self {
            freq_hint: freq_hint.max(1.0),
            ..Self::default()
        }
    }

    fn target_width(&self) -> f64 {
        (4.0 / self.freq_hint).min(2.0 * PI / 256.0)
    }

    fn panels_for(&self, len: f64) -> usize {
        (len / self.target_width()).ceil().max(1.0) as usize
    }
}

/// A point where the integrand behaves like `|x - location|^exponent` times a
/// smooth function.
#[derive(Debug, Clone, Copy)]
pub struct SingularPoint {
    pub location: f64,
    pub exponent: f64,
}

/// Integrate `f` over [a, b] where `f(x) ~ (x-a)^alpha * smooth` near `a` and
/// is smooth elsewhere in the segment: geometric panels shrink toward `a` and
/// the innermost sliver is closed with a Gauss–Jacobi rule that carries the
/// power factor exactly.
fn integrate_left_singular(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    alpha: f64,
    opts: &IntegrateOpts,
) -> f64 {
    debug_assert!(alpha > -1.0);
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    let d = len;
    let mut total = 0.0;
    // Graded shells [a + d*2^{-(l+1)}, a + d*2^{-l}], l = 0..levels-1. Stop
    // once the shell width falls a factor 16 below the smooth-resolution
    // width: beyond that the Gauss–Jacobi sliver is already exact for the
    // smooth factor, while ever-deeper shells evaluate f at points whose
    // distance to the endpoint is dominated by coordinate rounding.
    let w_stop = opts.target_width() / 16.0;
    let mut hi = d;
    for _ in 0..opts.levels {
        if hi <= w_stop {
            break;
        }
        let lo = hi / 2.0;
        // At least two panels per shell: the shells are self-similar, so a
        // fixed per-shell relative error would not decay with the grading.
        total += integrate_panels(f, a + lo, a + hi, opts.panels_for(hi - lo).max(2));
        hi = lo;
    }
    // Closing sliver [a, a + hi] via Gauss–Jacobi with weight (x - a)^alpha.
    let rule = gauss_jacobi_left(8, alpha);
    let half = 0.5 * hi;
    let scale = half.powf(alpha + 1.0);
    let mut acc = 0.0;
    for (t, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
        let x = a + half * (1.0 + t);
        let phi = f(x) / (x - a).powf(alpha);
        acc += wt * phi;
    }
    total + scale * acc
}

fn integrate_right_singular(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    alpha: f64,
    opts: &IntegrateOpts,
) -> f64 {
    // Mirror through x -> a + b - x, turning the right singularity into a left one.
    let g = |x: f64| f(a + b - x);
    integrate_left_singular(&g, a, b, alpha, opts)
}

/// Integrate `f` over the period [-pi, pi]. `singularities` lists power-type
/// points (the integrand behaves like |x-s|^alpha * smooth near each), `kinks`
/// lists additional panel breakpoints where the integrand loses smoothness
/// without a power factor. Exponents <= -1 are rejected as divergent.
pub fn integrate_periodic(
    f: &dyn Fn(f64) -> f64,
    singularities: &[SingularPoint],
    kinks: &[f64],
    opts: &IntegrateOpts,
) -> Result<f64> {
    for s in singularities {
        if s.exponent <= -1.0 {
            return Err(ApxError::DivergentIntegral(format!(
                "integrand exponent {} at x = {} is not integrable",
                s.exponent, s.location
            )));
        }
    }
    let wrap = |x: f64| {
        let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
        if y >= PI {
            y -= 2.0 * PI;
        }
        y
    };
    // Collect breakpoints in [-pi, pi); a singular point at -pi also acts at +pi.
    let mut marks: Vec<(f64, f64)> = Vec::new(); // (location, exponent); exponent 0 = plain kink
    for s in singularities {
        if s.exponent.abs() > 1e-15 {
            marks.push((wrap(s.location), s.exponent));
        }
    }
    for &k in kinks {
        let k = wrap(k);
        if !marks.iter().any(|(m, _)| (m - k).abs() < 1e-14) {
            marks.push((k, 0.0));
        }
    }
    marks.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    if marks.is_empty() {
        return Ok(integrate_panels(f, -PI, PI, opts.panels_for(2.0 * PI)));
    }

    // Work on the circle starting at the first mark: segments between
    // consecutive marks (wrapping once past +pi back to the first mark).
    let mut total = 0.0;
    let n = marks.len();
    for i in 0..n {
        let (lo, alo) = marks[i];
        let (hi_raw, ahi) = if i + 1 < n {
            marks[i + 1]
        } else {
            (marks[0].0 + 2.0 * PI, marks[0].1)
        };
        let hi = hi_raw;
        if hi - lo < 1e-13 {
            continue;
        }
        // f is periodic; evaluate through the wrap transparently.
        let fp = |x: f64| f(wrap(x));
        let left_sing = alo.abs() > 1e-15;
        let right_sing = ahi.abs() > 1e-15;
        total += match (left_sing, right_sing) {
            (false, false) => integrate_panels(&fp, lo, hi, opts.panels_for(hi - lo)),
            (true, false) => integrate_left_singular(&fp, lo, hi, alo, opts),
            (false, true) => integrate_right_singular(&fp, lo, hi, ahi, opts),
            (true, true) => {
                let mid = 0.5 * (lo + hi);
                integrate_left_singular(&fp, lo, mid, alo, opts)
                    + integrate_right_singular(&fp, mid, hi, ahi, opts)
            }
        };
    }
    Ok(total)
}
