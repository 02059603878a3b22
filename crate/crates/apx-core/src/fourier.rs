//! Trigonometric polynomials on the torus, sampled functions on uniform
//! grids, and the FFT bridges between them.
//!
//! Conventions used throughout the crate:
//! * grids are uniform with a power-of-two point count, `x_j = -pi + 2*pi*j/N`;
//! * a polynomial is stored as `f(x) = a0 + sum_k (a[k] cos kx + b[k] sin kx)`,
//!   i.e. `a0` is the actual constant value of the constant part;
//! * complex exponential coefficients are `c_k = (a_k - i b_k)/2` for `k >= 1`,
//!   `c_0 = a0`, and `c_{-k} = conj(c_k)` for real data.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{ApxError, Result};

/// Uniform periodic grid `x_j = -pi + 2*pi*j/N` with `N` a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    n_points: usize,
}

impl PeriodicGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(ApxError::BadGridSize(n_points));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * (j as f64) / (self.n_points as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Spacing between adjacent grid points.
    pub fn h(&self) -> f64 {
        2.0 * PI / (self.n_points as f64)
    }
}

/// Marker recorded on sampled data whose grid sums are trusted as integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactRule {
    /// The samples come from a trigonometric polynomial of degree < N/2, so
    /// the trapezoid sum over the grid equals the exact integral.
    BandLimited,
}

/// Real samples of a function on a [`PeriodicGrid`].
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
    pub exact_rule: Option<ExactRule>,
}

impl SampledFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(ApxError::InvalidParameter(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid,
            values,
            exact_rule: None,
        })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Self {
            grid,
            values,
            exact_rule: None,
        }
    }
}

/// Real trigonometric polynomial `a0 + sum_{k=1}^{n} (a[k-1] cos kx + b[k-1] sin kx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub a0: f64,
    /// Cosine coefficients for k = 1..=degree.
    pub a: Vec<f64>,
    /// Sine coefficients for k = 1..=degree.
    pub b: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            a0: c,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Polynomial with a single cosine mode `cos(kx)`, k >= 1.
    pub fn cos_mode(k: usize) -> Self {
        let mut a = vec![0.0; k];
        a[k - 1] = 1.0;
        Self {
            a0: 0.0,
            a,
            b: vec![0.0; k],
        }
    }

    /// Polynomial with a single sine mode `sin(kx)`, k >= 1.
    pub fn sin_mode(k: usize) -> Self {
        let mut b = vec![0.0; k];
        b[k - 1] = 1.0;
        Self {
            a0: 0.0,
            a: vec![0.0; k],
            b,
        }
    }

    pub fn degree(&self) -> usize {
        debug_assert_eq!(self.a.len(), self.b.len());
        self.a.len()
    }

    /// Evaluate at a single point by an angle-addition recurrence,
    /// re-synchronized from the libm routines every 64 terms to keep the
    /// rounding error flat in the degree.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.a0;
        if self.a.is_empty() {
            return acc;
        }
        let (s1, c1) = x.sin_cos();
        let (mut sk, mut ck) = (s1, c1);
        for k in 1..=self.a.len() {
            if k > 1 {
                if k % 64 == 0 {
                    let (s, c) = ((k as f64) * x).sin_cos();
                    sk = s;
                    ck = c;
                } else {
                    let (s, c) = (sk * c1 + ck * s1, ck * c1 - sk * s1);
                    sk = s;
                    ck = c;
                }
            }
            acc += self.a[k - 1] * ck + self.b[k - 1] * sk;
        }
        acc
    }

    /// Exact complex exponential coefficient `c_k` for `k >= 0`.
    pub fn c_coeff(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::new(self.a0, 0.0)
        } else if k <= self.degree() {
            Complex64::new(self.a[k - 1] / 2.0, -self.b[k - 1] / 2.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Term-wise derivative of order `r` (degree preserved).
    pub fn derivative(&self, r: u32) -> TrigPoly {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        let mut a0 = self.a0;
        for _ in 0..r {
            a0 = 0.0;
            for k in 1..=a.len() {
                let (ak, bk) = (a[k - 1], b[k - 1]);
                a[k - 1] = (k as f64) * bk;
                b[k - 1] = -(k as f64) * ak;
            }
        }
        TrigPoly { a0, a, b }
    }

    /// Pad or truncate the coefficient arrays to exactly `degree` terms.
    pub fn with_degree(&self, degree: usize) -> TrigPoly {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.resize(degree, 0.0);
        b.resize(degree, 0.0);
        TrigPoly { a0: self.a0, a, b }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let deg = self.degree().max(other.degree());
        let mut out = self.with_degree(deg);
        out.a0 += other.a0;
        for k in 0..other.degree() {
            out.a[k] += other.a[k];
            out.b[k] += other.b[k];
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        TrigPoly {
            a0: c * self.a0,
            a: self.a.iter().map(|v| c * v).collect(),
            b: self.b.iter().map(|v| c * v).collect(),
        }
    }

    /// Drop trailing (numerically zero) coefficients.
    pub fn trimmed(&self, tol: f64) -> TrigPoly {
        let mut deg = self.degree();
        while deg > 0 && self.a[deg - 1].abs() <= tol && self.b[deg - 1].abs() <= tol {
            deg -= 1;
        }
        self.with_degree(deg)
    }
}

/// Fourier multiplier: the operator acting as `e^{ikx} -> coeffs[k] e^{ikx}`
/// for `k >= 0` and by conjugate symmetry for `k < 0` (so real functions map
/// to real functions). `coeffs[0]` must be real. Modes beyond the stored
/// length are annihilated.
#[derive(Debug, Clone)]
pub struct Multiplier {
    pub coeffs: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(ApxError::Empty("multiplier must define m_0".into()));
        }
        if coeffs[0].im.abs() > 1e-14 * (1.0 + coeffs[0].re.abs()) {
            return Err(ApxError::InvalidParameter(format!(
                "m_0 must be real, got {}",
                coeffs[0]
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn from_fn(max_k: usize, f: impl Fn(usize) -> Complex64) -> Result<Self> {
        Self::new((0..=max_k).map(f).collect())
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }
}

fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, matches!(direction, FftDirection::Forward));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(key)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            match direction {
                FftDirection::Forward => planner.plan_fft_forward(n),
                FftDirection::Inverse => planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

/// Interpolatory analysis: recover the trigonometric polynomial of degree
/// `N/2 - 1` from `N` samples. Exact (to rounding) when the samples come from
/// a polynomial of degree at most `N/2 - 1`.
pub fn analyze(f: &SampledFunction) -> TrigPoly {
    let n = f.grid.n_points();
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_plan(n, FftDirection::Forward).process(&mut buf);
    let scale = 1.0 / (n as f64);
    let a0 = buf[0].re * scale;
    let deg = n / 2 - 1;
    let mut a = Vec::with_capacity(deg);
    let mut b = Vec::with_capacity(deg);
    for k in 1..=deg {
        // Grid origin at -pi shifts the DFT by a factor (-1)^k per mode.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = buf[k] * (scale * sign);
        a.push(2.0 * c.re);
        b.push(-2.0 * c.im);
    }
    TrigPoly { a0, a, b }
}

/// Evaluate `p` on every grid point of `g` by inverse FFT.
///
/// Requires `g.n_points() >= 2*degree + 2` so the polynomial is representable
/// exactly; the round trip `analyze(synthesize(p)) == p` then holds to
/// rounding.
pub fn synthesize(p: &TrigPoly, g: &PeriodicGrid) -> Result<SampledFunction> {
    let n = g.n_points();
    let deg = p.degree();
    if n < 2 * deg + 2 {
        return Err(ApxError::GridTooCoarse {
            degree: deg,
            n_points: n,
            needed: 2 * deg + 2,
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(p.a0, 0.0);
    for k in 1..=deg {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = Complex64::new(p.a[k - 1] / 2.0, -p.b[k - 1] / 2.0) * sign;
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    fft_plan(n, FftDirection::Inverse).process(&mut buf);
    let values = buf.iter().map(|c| c.re).collect();
    Ok(SampledFunction {
        grid: *g,
        values,
        exact_rule: Some(ExactRule::BandLimited),
    })
}

/// Apply a Fourier multiplier mode-wise: `c_k -> m_k c_k` for `k >= 0`,
/// extended by conjugate symmetry to negative modes.
pub fn apply_multiplier(p: &TrigPoly, m: &Multiplier) -> TrigPoly {
    let deg = p.degree();
    let a0 = m.coeffs[0].re * p.a0;
    let mut a = Vec::with_capacity(deg);
    let mut b = Vec::with_capacity(deg);
    for k in 1..=deg {
        let c = Complex64::new(p.a[k - 1] / 2.0, -p.b[k - 1] / 2.0) * m.get(k);
        a.push(2.0 * c.re);
        b.push(-2.0 * c.im);
    }
    TrigPoly { a0, a, b }
}

/// Trapezoid sum `(2*pi/N) * sum(values)`; the exact integral for band-limited
/// samples and spectrally accurate for smooth periodic data.
pub fn trapezoid(f: &SampledFunction) -> f64 {
    f.grid.h() * f.values.iter().sum::<f64>()
}

/// Discrete Parseval identity on the stored coefficients:
/// `int p^2 = 2*pi*a0^2 + pi*sum(a_k^2 + b_k^2)`.
pub fn parseval_l2_squared(p: &TrigPoly) -> f64 {
    let tail: f64 = p
        .a
        .iter()
        .zip(p.b.iter())
        .map(|(a, b)| a * a + b * b)
        .sum();
    2.0 * PI * p.a0 * p.a0 + PI * tail
}
