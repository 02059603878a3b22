//! Best and near-best trigonometric approximation in weighted `L^p`, and
//! simultaneous approximation of derivatives.
//!
//! `p = 2` is solved exactly through the weighted normal equations in the
//! `2n + 1` trigonometric basis (Gram matrix and right-hand side assembled
//! with band-limited-exact weighted rules).  Other finite `p` use damped
//! iteratively-reweighted least squares on a collocation grid; `p = infinity`
//! is approached by a homotopy through growing even exponents.  Every result
//! reports the solver path and re-evaluates the residual norm through the
//! norm engine (a finer grid than the collocation one), so the discretization
//! gap is visible.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{ApxError, Result};
use crate::fourier::{analyze, synthesize, PeriodicGrid, SampledFunction, TrigPoly};
use crate::norms::norm_poly;
use crate::operators::OperatorTag;
use crate::quadrature::gauss_legendre;
use crate::smoothness::modulus;
use crate::weights::Weight;
use std::f64::consts::PI;

/// Which algorithm produced an [`ApproxResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    ExactL2,
    Irls,
    MinimaxHomotopy,
    NearBestVp,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::ExactL2 => "exact-L2",
            SolverPath::Irls => "IRLS",
            SolverPath::MinimaxHomotopy => "minimax-homotopy",
            SolverPath::NearBestVp => "near-best-VP",
        }
    }
}

/// Diagnostics of the solve.
#[derive(Debug, Clone)]
pub struct SolverInfo {
    /// Iterations spent (1 for the direct paths).
    pub iterations: u32,
    /// Final relative coefficient step of the iterative paths (0 for direct).
    pub final_step: f64,
    /// Algorithm that produced the polynomial.
    pub path: SolverPath,
    /// The collocation-grid objective at termination, when an iterative path
    /// ran; comparing it with `error` (norm-engine re-evaluation on a finer
    /// grid) exposes the discretization gap.
    pub discrete_objective: Option<f64>,
}

/// A degree-`n` approximant with its certified error.
#[derive(Debug, Clone)]
pub struct ApproxResult {
    /// The approximant, degree at most `n` (at most `2n - 1` for the
    /// near-best smoothing path).
    pub poly: TrigPoly,
    /// Weighted norm of `f - poly`, re-evaluated by the norm engine; an upper
    /// bound of the true best-approximation error.
    pub error: f64,
    pub solver_info: SolverInfo,
}

// ---------------------------------------------------------------------------
// Shared assembly helpers
// ---------------------------------------------------------------------------

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(ApxError::InvalidParameter(format!(
            "norm index must satisfy p >= 1 (or infinity), got {p}"
        )));
    }
    Ok(())
}

/// Basis values `[1, cos x, sin x, ..., cos nx, sin nx]` at one point,
/// appended to `row` (cleared first).
fn basis_row(x: f64, n: usize, row: &mut Vec<f64>) {
    row.clear();
    row.push(1.0);
    // Incremental rotation: cos/sin of kx by complex multiplication.
    let (s1, c1) = x.sin_cos();
    let (mut ck, mut sk) = (c1, s1);
    for _ in 1..=n {
        row.push(ck);
        row.push(sk);
        let c_next = ck * c1 - sk * s1;
        let s_next = sk * c1 + ck * s1;
        ck = c_next;
        sk = s_next;
    }
}

/// Exact weighted integration rule on a grid: `sum f(x_j) rule_j` equals
/// `int f * gamma` for band-limited `f` up to the grid's capacity.
fn exact_rule(w: Option<&Weight>, grid: &PeriodicGrid) -> Vec<f64> {
    let h = grid.h();
    match w {
        None => vec![h; grid.n_points()],
        Some(w) => match w.as_constant() {
            Some(c) => vec![h * c; grid.n_points()],
            None => w.band_limited_rule(grid).to_vec(),
        },
    }
}

/// Values of `f` on the grid, through an exact synthesis on a grid at least
/// large enough for the degree, down-sampled onto nested points.
fn values_on_grid(f: &TrigPoly, grid: &PeriodicGrid) -> Result<Vec<f64>> {
    let need = (2 * f.degree() + 2).max(grid.n_points());
    let n_s = need.next_power_of_two();
    if n_s == grid.n_points() {
        return Ok(synthesize(f, grid)?.values);
    }
    let fine = PeriodicGrid::new(n_s)?;
    let samples = synthesize(f, &fine)?;
    let stride = n_s / grid.n_points();
    Ok(samples.values.iter().step_by(stride).copied().collect())
}

/// Build the coefficient vector of the weighted normal equations solution:
/// Gram matrix on a small exact grid, right-hand side on a grid large enough
/// for `f`'s degree, Cholesky solve.
fn l2_projection(f: &TrigPoly, n: usize, w: Option<&Weight>) -> Result<DVector<f64>> {
    let dim = 2 * n + 1;
    // Gram: products of basis elements have degree <= 2n.
    let n_g = (4 * n + 4).next_power_of_two().max(16);
    let grid_g = PeriodicGrid::new(n_g)?;
    let rule_g = exact_rule(w, &grid_g);
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut row = Vec::with_capacity(dim);
    for (m, x) in grid_g.points().enumerate() {
        basis_row(x, n, &mut row);
        let q = rule_g[m];
        for j in 0..dim {
            let rj = q * row[j];
            for k in j..dim {
                gram[(j, k)] += rj * row[k];
            }
        }
    }
    for j in 0..dim {
        for k in 0..j {
            gram[(j, k)] = gram[(k, j)];
        }
    }
    // Right-hand side: products f * e_j have degree <= deg f + n.
    let n_f = (2 * (f.degree() + n) + 4).next_power_of_two().max(n_g);
    let grid_f = PeriodicGrid::new(n_f)?;
    let rule_f = exact_rule(w, &grid_f);
    let fv = values_on_grid(f, &grid_f)?;
    let mut rhs = DVector::<f64>::zeros(dim);
    for (m, x) in grid_f.points().enumerate() {
        basis_row(x, n, &mut row);
        let qf = rule_f[m] * fv[m];
        for j in 0..dim {
            rhs[j] += qf * row[j];
        }
    }
    let chol = Cholesky::new(gram.clone()).or_else(|| {
        // Tiny diagonal lift against roundoff loss of definiteness.
        let tau = 1e-14 * gram.trace() / dim as f64;
        let mut lifted = gram;
        for j in 0..dim {
            lifted[(j, j)] += tau;
        }
        Cholesky::new(lifted)
    });
    match chol {
        Some(c) => Ok(c.solve(&rhs)),
        None => Err(ApxError::SolverFailure(
            "weighted Gram matrix is not positive definite".into(),
        )),
    }
}

fn poly_from_coeffs(c: &DVector<f64>, n: usize) -> TrigPoly {
    let mut p = TrigPoly::zero().with_degree(n);
    p.a0 = c[0];
    for k in 1..=n {
        p.a[k - 1] = c[2 * k - 1];
        p.b[k - 1] = c[2 * k];
    }
    p
}

// ---------------------------------------------------------------------------
// Collocation masses for the IRLS objective
// ---------------------------------------------------------------------------

/// Positive per-node masses `q_m ~ int_{cell_m} gamma`: plain `h * gamma(x)`
/// on regular cells, graded panel integration on the (few) cells containing a
/// declared singular location, so poles contribute their finite cell mass.
fn collocation_masses(w: Option<&Weight>, grid: &PeriodicGrid) -> Result<Vec<f64>> {
    let h = grid.h();
    let w = match w {
        None => return Ok(vec![h; grid.n_points()]),
        Some(w) => match w.as_constant() {
            Some(c) => return Ok(vec![h * c; grid.n_points()]),
            None => w,
        },
    };
    let singular = w.singular_points();
    let rule = gauss_legendre(4);
    let mut masses = Vec::with_capacity(grid.n_points());
    for x in grid.points() {
        let a = x - 0.5 * h;
        let b = x + 0.5 * h;
        let inside = singular.iter().find(|s| {
            let d = crate::weights::wrap_angle(s.location - x);
            d.abs() <= 0.5 * h * (1.0 + 1e-12)
        });
        let mass = match inside {
            None => {
                // One 4-point panel: the weight is smooth across this cell.
                let mut acc = 0.0;
                for (node, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let t = 0.5 * (a + b) + 0.5 * h * node;
                    acc += wt * w.eval(t)?;
                }
                0.5 * h * acc
            }
            Some(s) => {
                // Split at the singular point and grade geometrically
                // toward it from both sides.
                let x0 = x + crate::weights::wrap_angle(s.location - x);
                let mut acc = 0.0;
                for (lo, hi) in [(a, x0), (x0, b)] {
                    let len = hi - lo;
                    if len <= 0.0 {
                        continue;
                    }
                    // Panels shrink by halves toward the singular end.
                    let toward_right = (hi - x0).abs() < (lo - x0).abs();
                    let mut width = 0.5 * len;
                    let mut far = if toward_right { lo } else { hi };
                    for level in 0..40 {
                        let (pa, pb) = if toward_right {
                            (far, far + width)
                        } else {
                            (far - width, far)
                        };
                        if level == 39 || width < 1e-13 {
                            // Closed-form finish on the sliver at the
                            // singularity: gamma ~ s(x0) |x - x0|^alpha.
                            let alpha = s.exponent;
                            let edge = if toward_right { pb } else { pa };
                            let dist = (edge - x0).abs();
                            let probe = x0 + if toward_right { dist } else { -dist } * 0.5;
                            let smooth =
                                w.eval(probe)? / (probe - x0).abs().powf(alpha);
                            acc += smooth * dist.powf(alpha + 1.0) / (alpha + 1.0);
                            break;
                        }
                        let mut panel = 0.0;
                        for (node, wt) in rule.nodes.iter().zip(&rule.weights) {
                            let t = 0.5 * (pa + pb) + 0.5 * width * node;
                            panel += wt * w.eval(t)?;
                        }
                        acc += 0.5 * width * panel;
                        far = if toward_right { pb } else { pa };
                        width *= 0.5;
                    }
                }
                acc
            }
        };
        masses.push(mass);
    }
    Ok(masses)
}

// ---------------------------------------------------------------------------
// IRLS
// ---------------------------------------------------------------------------

const IRLS_MAX_ITER: u32 = 500;
const IRLS_TOL: f64 = 1e-8;
const IRLS_DAMPING: f64 = 0.5;
const IRLS_WEIGHT_FLOOR: f64 = 1e-12;
const IRLS_SMOOTHING: f64 = 1e-10;

struct IrlsOutcome {
    coeffs: DVector<f64>,
    iterations: u32,
    final_step: f64,
    objective: f64,
}

/// Exact discrete sums `S_c(t) = sum_m v_m cos(t x_m)` and
/// `S_s(t) = sum_m v_m sin(t x_m)` for lags `t <= max_lag`, from one FFT of
/// the value vector.  These are plain DFT identities (`S_c(0) = N a_0`,
/// `S_c(t) = (N/2) a_t`, `S_s(t) = (N/2) b_t` for `t <= N/2 - 1`), so no
/// band-limit assumption on the values is needed.
fn value_spectrum(
    grid: &PeriodicGrid,
    vals: &[f64],
    max_lag: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_nodes = grid.n_points();
    debug_assert!(max_lag <= n_nodes / 2 - 1);
    let t = analyze(&SampledFunction::new(*grid, vals.to_vec())?);
    let half = n_nodes as f64 / 2.0;
    let mut sc = vec![0.0; max_lag + 1];
    let mut ss = vec![0.0; max_lag + 1];
    sc[0] = n_nodes as f64 * t.a0;
    for k in 1..=max_lag {
        sc[k] = half * t.a[k - 1];
        ss[k] = half * t.b[k - 1];
    }
    Ok((sc, ss))
}

/// Discrete Fourier sums `sum_m W_m e_j(x_m) e_k(x_m)` (and the matching
/// right-hand-side sums) assembled from one FFT of `W`: the products of two
/// basis elements reduce to single modes, so each Gram entry is a combination
/// of two spectral sums.  Bit-for-bit deterministic and O(N log N + dim^2)
/// instead of O(N dim^2).
fn weighted_normal_equations(
    grid: &PeriodicGrid,
    node_weights: &[f64],
    node_rhs: &[f64],
    n: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (wc, ws) = value_spectrum(grid, node_weights, 2 * n)?;
    let (rc, rs) = value_spectrum(grid, node_rhs, 2 * n)?;
    let dim = 2 * n + 1;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    // Signed sine lookup: S_s(-t) = -S_s(t).
    let ssgn = |t: i64| -> f64 {
        if t >= 0 {
            ws[t as usize]
        } else {
            -ws[(-t) as usize]
        }
    };
    gram[(0, 0)] = wc[0];
    rhs[0] = rc[0];
    for l in 1..=n {
        gram[(0, 2 * l - 1)] = wc[l];
        gram[(2 * l - 1, 0)] = wc[l];
        gram[(0, 2 * l)] = ws[l];
        gram[(2 * l, 0)] = ws[l];
        rhs[2 * l - 1] = rc[l];
        rhs[2 * l] = rs[l];
    }
    for j in 1..=n {
        for l in 1..=n {
            let diff = wc[j.abs_diff(l)];
            let sum = wc[j + l];
            gram[(2 * j - 1, 2 * l - 1)] = 0.5 * (diff + sum);
            gram[(2 * j, 2 * l)] = 0.5 * (diff - sum);
            // cos(jx) sin(lx) = [sin((l+j)x) + sin((l-j)x)] / 2
            let cross = 0.5 * (ws[j + l] + ssgn(l as i64 - j as i64));
            gram[(2 * j - 1, 2 * l)] = cross;
            gram[(2 * l, 2 * j - 1)] = cross;
        }
    }
    Ok((gram, rhs))
}

/// Damped IRLS for the discrete weighted `L^p` objective on the collocation
/// grid, warm-started from `start`.
fn irls_solve(
    grid: &PeriodicGrid,
    basis: &DMatrix<f64>,
    fv: &[f64],
    masses: &[f64],
    p: f64,
    damping: f64,
    start: DVector<f64>,
) -> Result<IrlsOutcome> {
    let n_nodes = basis.nrows();
    let dim = basis.ncols();
    let n = (dim - 1) / 2;
    let eps2 = if p < 2.0 { IRLS_SMOOTHING * IRLS_SMOOTHING } else { 0.0 };
    let residual = |c: &DVector<f64>| -> Vec<f64> {
        let fitted = basis * c;
        (0..n_nodes).map(|m| fv[m] - fitted[m]).collect()
    };
    // Everything below works with residuals normalized by the largest one:
    // at high exponents the raw powers |r|^p underflow, while the normalized
    // ratios stay in range (and the normal equations are invariant under a
    // common scaling of the reweighting factors).
    let peak = |r: &[f64]| -> f64 {
        r.iter().fold(0.0_f64, |m, v| m.max(v * v)) + eps2
    };
    let objective = |r: &[f64]| -> f64 {
        let r2max = peak(r);
        if r2max == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for m in 0..n_nodes {
            acc += masses[m] * ((r[m] * r[m] + eps2) / r2max).powf(0.5 * p);
        }
        r2max.sqrt() * acc.powf(1.0 / p)
    };
    // Scale reference so the relative-step test also terminates when the
    // true solution is the zero polynomial.
    let f_scale = fv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut c = start;
    let mut prev_obj = objective(&residual(&c));
    let mut rising = 0_u32;
    let mut final_step = f64::INFINITY;
    let mut iterations = 0_u32;
    let mut node_weights = vec![0.0; n_nodes];
    let mut node_rhs = vec![0.0; n_nodes];
    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let r = residual(&c);
        let r2max = peak(&r);
        if r2max == 0.0 {
            // The fit is exact on every node; nothing to reweight.
            final_step = 0.0;
            prev_obj = 0.0;
            break;
        }
        for m in 0..n_nodes {
            // Floor relative to the largest factor: the scale of the
            // reweighting is immaterial, only its spread matters.
            let omega = (((r[m] * r[m] + eps2) / r2max).powf(0.5 * (p - 2.0)))
                .max(IRLS_WEIGHT_FLOOR);
            node_weights[m] = masses[m] * omega;
            node_rhs[m] = node_weights[m] * fv[m];
        }
        let (gram, rhs) = weighted_normal_equations(grid, &node_weights, &node_rhs, n)?;
        let solved = match Cholesky::new(gram) {
            Some(ch) => ch.solve(&rhs),
            None => {
                return Err(ApxError::SolverFailure(format!(
                    "IRLS normal equations lost definiteness at iteration {it} (p = {p})"
                )))
            }
        };
        let c_next = &c + (solved - &c) * damping;
        let denom = c_next.norm().max(1e-8 * f_scale).max(1e-300);
        let step = (&c_next - &c).norm() / denom;
        c = c_next;
        final_step = step;
        let obj = objective(&residual(&c));
        // Material increases only: accumulation roundoff on the collocation
        // sums sits well below this threshold, real divergence well above.
        if obj > prev_obj * (1.0 + 1e-10) {
            rising += 1;
            if rising >= 10 {
                return Err(ApxError::SolverFailure(format!(
                    "IRLS diverged: objective rose for 10 consecutive damped steps \
                     (p = {p}, iteration {it}, objective {obj:.6e})"
                )));
            }
        } else {
            rising = 0;
        }
        prev_obj = obj;
        if step < IRLS_TOL {
            break;
        }
    }
    Ok(IrlsOutcome {
        objective: prev_obj,
        coeffs: c,
        iterations,
        final_step,
    })
}

/// Collocation data shared by the IRLS paths.
fn collocation(
    f: &TrigPoly,
    n: usize,
    w: Option<&Weight>,
) -> Result<(PeriodicGrid, DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    // Grid size per the discretization decision, rounded up to the grid
    // type's power-of-two constraint (and large enough that the normal
    // equations' spectral assembly stays alias-free).
    let n_c = (16 * (n + 1)).max(4096).next_power_of_two();
    let grid = PeriodicGrid::new(n_c)?;
    let masses = collocation_masses(w, &grid)?;
    let fv = values_on_grid(f, &grid)?;
    let dim = 2 * n + 1;
    let mut basis = DMatrix::<f64>::zeros(n_c, dim);
    let mut row = Vec::with_capacity(dim);
    for (m, x) in grid.points().enumerate() {
        basis_row(x, n, &mut row);
        for j in 0..dim {
            basis[(m, j)] = row[j];
        }
    }
    Ok((grid, basis, fv, masses))
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Best approximation by trigonometric polynomials of degree at most `n` in
/// the weighted `L^p` norm.  Exact (to quadrature accuracy) for `p = 2`;
/// a certified upper bound of the true infimum otherwise.
pub fn best_approx(f: &TrigPoly, n: usize, p: f64, w: Option<&Weight>) -> Result<ApproxResult> {
    validate_p(p)?;
    if p == 2.0 {
        let c = l2_projection(f, n, w)?;
        let poly = poly_from_coeffs(&c, n);
        let error = norm_poly(&f.sub(&poly), p, w)?;
        return Ok(ApproxResult {
            poly,
            error,
            solver_info: SolverInfo {
                iterations: 1,
                final_step: 0.0,
                path: SolverPath::ExactL2,
                discrete_objective: None,
            },
        });
    }
    if p.is_infinite() {
        return minimax_homotopy(f, n, w);
    }
    best_approx_via_irls(f, n, p, w)
}

/// The IRLS path for finite `p`, exposed separately so `p = 2` can be
/// cross-validated against the exact projection.
pub fn best_approx_via_irls(
    f: &TrigPoly,
    n: usize,
    p: f64,
    w: Option<&Weight>,
) -> Result<ApproxResult> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(ApxError::InvalidParameter(
            "the IRLS path needs finite p; use the minimax homotopy".into(),
        ));
    }
    let (grid, basis, fv, masses) = collocation(f, n, w)?;
    let start = l2_projection(f, n, w)?;
    let out = irls_solve(&grid, &basis, &fv, &masses, p, IRLS_DAMPING, start)?;
    let poly = poly_from_coeffs(&out.coeffs, n);
    let error = norm_poly(&f.sub(&poly), p, w)?;
    Ok(ApproxResult {
        poly,
        error,
        solver_info: SolverInfo {
            iterations: out.iterations,
            final_step: out.final_step,
            path: SolverPath::Irls,
            discrete_objective: Some(out.objective),
        },
    })
}

/// All best L2 errors `E_0(f), ..., E_nmax(f)` from a single factorization:
/// with the Gram matrix `G = L L^T` of the degree-`nmax` basis and
/// `y = L^{-1} b`, the squared projection error onto the degree-`nu`
/// subspace is `||f||^2 - sum of the first (2 nu + 1) entries of y^2`,
/// because leading blocks of `L` factor the leading blocks of `G`.
pub fn best_error_profile(f: &TrigPoly, n_max: usize, w: Option<&Weight>) -> Result<Vec<f64>> {
    if w.is_none() {
        // Orthogonal basis: the squared projection error onto degree nu is
        // exactly the coefficient tail `pi * sum_{k>nu} (a_k^2 + b_k^2)`.
        let deg = f.degree();
        let mut suffix = vec![0.0_f64; deg + 1];
        for k in (1..=deg).rev() {
            let m2 = PI * (f.a[k - 1] * f.a[k - 1] + f.b[k - 1] * f.b[k - 1]);
            suffix[k - 1] = suffix[k] + m2;
        }
        return Ok((0..=n_max)
            .map(|nu| if nu >= deg { 0.0 } else { suffix[nu].sqrt() })
            .collect());
    }
    let dim = 2 * n_max + 1;
    let n_g = (4 * n_max + 4).next_power_of_two().max(16);
    let grid_g = PeriodicGrid::new(n_g)?;
    let rule_g = exact_rule(w, &grid_g);
    let n_f = (2 * (f.degree() + n_max) + 4).next_power_of_two().max(n_g);
    let grid_f = PeriodicGrid::new(n_f)?;
    let rule_f = exact_rule(w, &grid_f);
    let fv = values_on_grid(f, &grid_f)?;
    let (wc, ws) = value_spectrum(&grid_g, &rule_g, 2 * n_max)?;
    let prod: Vec<f64> = rule_f.iter().zip(&fv).map(|(q, v)| q * v).collect();
    let (rc, rs) = value_spectrum(&grid_f, &prod, n_max)?;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let ssgn = |t: i64| -> f64 {
        if t >= 0 {
            ws[t as usize]
        } else {
            -ws[(-t) as usize]
        }
    };
    gram[(0, 0)] = wc[0];
    rhs[0] = rc[0];
    for l in 1..=n_max {
        gram[(0, 2 * l - 1)] = wc[l];
        gram[(2 * l - 1, 0)] = wc[l];
        gram[(0, 2 * l)] = ws[l];
        gram[(2 * l, 0)] = ws[l];
        rhs[2 * l - 1] = rc[l];
        rhs[2 * l] = rs[l];
    }
    for j in 1..=n_max {
        for l in 1..=n_max {
            let diff = wc[j.abs_diff(l)];
            let sum = wc[j + l];
            gram[(2 * j - 1, 2 * l - 1)] = 0.5 * (diff + sum);
            gram[(2 * j, 2 * l)] = 0.5 * (diff - sum);
            let cross = 0.5 * (ws[j + l] + ssgn(l as i64 - j as i64));
            gram[(2 * j - 1, 2 * l)] = cross;
            gram[(2 * l, 2 * j - 1)] = cross;
        }
    }
    let chol = Cholesky::new(gram).ok_or_else(|| {
        ApxError::SolverFailure("weighted Gram matrix is not positive definite".into())
    })?;
    let y = chol
        .l()
        .solve_lower_triangular(&rhs)
        .ok_or_else(|| ApxError::SolverFailure("singular Cholesky factor".into()))?;
    let nf2 = {
        let nf = norm_poly(f, 2.0, w)?;
        nf * nf
    };
    let mut profile = Vec::with_capacity(n_max + 1);
    let mut captured = y[0] * y[0];
    profile.push((nf2 - captured).max(0.0).sqrt());
    for nu in 1..=n_max {
        captured += y[2 * nu - 1] * y[2 * nu - 1] + y[2 * nu] * y[2 * nu];
        profile.push((nf2 - captured).max(0.0).sqrt());
    }
    Ok(profile)
}

/// Minimax surrogate: homotopy through even exponents 4, 8, ..., 256, each
/// IRLS warm-started from the previous solution; the reported error is the
/// sup norm of the final residual.
fn minimax_homotopy(f: &TrigPoly, n: usize, w: Option<&Weight>) -> Result<ApproxResult> {
    let (grid, basis, fv, masses) = collocation(f, n, w)?;
    let mut coeffs = l2_projection(f, n, w)?;
    let mut total_iter = 1_u32;
    let mut final_step = 0.0;
    let mut last_obj = None;
    let mut q = 4.0;
    while q <= 256.0 {
        // High exponents need stronger under-relaxation than the fixed
        // finite-p damping: the reweighting map's slope grows like q - 2,
        // and relaxation 1/(q - 1) is the classical globally-safe choice.
        let damping = IRLS_DAMPING.min(1.0 / (q - 1.0));
        let out = irls_solve(&grid, &basis, &fv, &masses, q, damping, coeffs)?;
        coeffs = out.coeffs;
        total_iter += out.iterations;
        final_step = out.final_step;
        last_obj = Some(out.objective);
        q *= 2.0;
    }
    let poly = poly_from_coeffs(&coeffs, n);
    let error = norm_poly(&f.sub(&poly), f64::INFINITY, None)?;
    Ok(ApproxResult {
        poly,
        error,
        solver_info: SolverInfo {
            iterations: total_iter,
            final_step,
            path: SolverPath::MinimaxHomotopy,
            discrete_objective: last_obj,
        },
    })
}

/// Near-best approximation by the de la Vallee-Poussin mean: degree at most
/// `2n - 1`, error within the factor `1 + 3 C_12` of the best error.
pub fn near_best_vp(f: &TrigPoly, n: u32, p: f64, w: Option<&Weight>) -> Result<ApproxResult> {
    validate_p(p)?;
    let poly = OperatorTag::ValleePoussin { n }.apply(f)?;
    let error = norm_poly(&f.sub(&poly), p, w)?;
    Ok(ApproxResult {
        poly,
        error,
        solver_info: SolverInfo {
            iterations: 1,
            final_step: 0.0,
            path: SolverPath::NearBestVp,
            discrete_objective: None,
        },
    })
}

/// One row of the simultaneous-approximation table: how well the `k`-th
/// derivative of the best approximant (and of the smoothed projection)
/// tracks `f^(k)`, against the two reference bounds.
#[derive(Debug, Clone)]
pub struct SimultaneousRow {
    pub k: u32,
    /// `||f^(k) - (u*)^(k)||` for the best approximant `u*` of `f`.
    pub best_err: f64,
    /// `||f^(k) - (V_n f)^(k)||` for the smoothed projection.
    pub vp_err: f64,
    /// Reference scale `n^(k-r) * E_n(f^(r))`.
    pub en_bound: f64,
    /// Reference scale `n^(k-r) * Omega_1(f^(r), 1/n)`.
    pub omega_bound: f64,
}

/// Simultaneous approximation of derivatives: for `k = 0..r`, the derivative
/// errors of the best approximant and of the de la Vallee-Poussin mean,
/// against the derivative-tail reference scales.
pub fn simultaneous_errors(
    f: &TrigPoly,
    n: u32,
    r: u32,
    p: f64,
    w: Option<&Weight>,
) -> Result<Vec<SimultaneousRow>> {
    validate_p(p)?;
    if r == 0 {
        return Err(ApxError::InvalidParameter(
            "simultaneous table needs derivative order r >= 1".into(),
        ));
    }
    if n == 0 {
        return Err(ApxError::InvalidParameter(
            "simultaneous table needs degree n >= 1".into(),
        ));
    }
    let best = best_approx(f, n as usize, p, w)?;
    let vp = OperatorTag::ValleePoussin { n }.apply(f)?;
    let fr = f.derivative(r);
    let en_r = best_approx(&fr, n as usize, p, w)?.error;
    let step = (1.0 / n as f64).min(1.0);
    let om_r = modulus(&fr, 1, step, p, w)?;
    let mut rows = Vec::with_capacity(r as usize + 1);
    for k in 0..=r {
        let fk = f.derivative(k);
        let scale = (n as f64).powi(k as i32 - r as i32);
        rows.push(SimultaneousRow {
            k,
            best_err: norm_poly(&fk.sub(&best.poly.derivative(k)), p, w)?,
            vp_err: norm_poly(&fk.sub(&vp.derivative(k)), p, w)?,
            en_bound: scale * en_r,
            omega_bound: scale * om_r,
        });
    }
    Ok(rows)
}
