//! The fixed test-function corpus used by the operator-norm estimates, the
//! inequality sweeps, and the acceptance checks.
//!
//! The operator-norm family has 48 members spanning the smoothness classes
//! the checks need: 16 pure cosine modes (spectral), 20 seeded random
//! degree-32 polynomials, 4 powers of `|sin x|` (Hoelder exponents 0.5..2.5),
//! and 8 mollified sawtooth partial sums (rough but band-limited).  A
//! spectrally-smooth transcendental member, `exp(sin x)`, is provided3
//! separately for decay-rate checks.
//!
//! Every member carries a pointwise-exact closure, a declared shape for the
//! norm engine (kinks, power-type zeros, oscillation hint), and a truncated
//! mode expansion for the operator routes.  Expansions are exact for the
//! polynomial members; for the non-polynomial members they come from a
//! 131072-point analysis cached per member, with coefficients accurate to the
//! aliasing level of the member's own decay.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::Result;
use crate::fourier::{analyze, PeriodicGrid, SampledFunction, TrigPoly};
use crate::norms::FnShape;
use crate::quadrature::SingularPoint;

/// Degree-32 random polynomial family: coefficients uniform in (-1, 1) with a
/// mild 1/(k+1) decay so the members have comparable norms.
pub const RANDOM_DEGREE: usize = 32;
/// Number of random members in the operator-norm family.
pub const RANDOM_COUNT: usize = 20;

/// One member of the corpus.
#[derive(Clone)]
pub struct TestFunction {
    /// Stable identifier used in reports and CSV rows.
    pub name: String,
    /// Family label: one of `mode`, `random_poly`, `abs_sin_pow`,
    /// `sawtooth_vp`, `exp_sin`.
    pub kind: &'static str,
    /// Declared analytic structure for the norm engine.
    pub shape: FnShape,
    body: Body,
}

#[derive(Clone)]
enum Body {
    /// The member is exactly a polynomial.
    Poly(TrigPoly),
    /// `|sin x|^s`.
    AbsSinPow(f64),
    /// `exp(sin x)`.
    ExpSin,
}

impl TestFunction {
    /// Pointwise-exact evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.body {
            Body::Poly(p) => p.eval(x),
            Body::AbsSinPow(s) => x.sin().abs().powf(*s),
            Body::ExpSin => x.sin().exp(),
        }
    }

    /// The exact polynomial behind the member, when it is one.
    pub fn as_poly(&self) -> Option<&TrigPoly> {
        match &self.body {
            Body::Poly(p) => Some(p),
            _ => None,
        }
    }

    /// Mode expansion truncated to the given degree.  Exact (up to the
    /// requested degree) for polynomial members; analysis-based for the
    /// transcendental ones.
    pub fn to_poly(&self, degree: usize) -> TrigPoly {
        match &self.body {
            Body::Poly(p) => {
                if p.degree() <= degree {
                    p.clone()
                } else {
                    p.with_degree(degree)
                }
            }
            Body::AbsSinPow(s) if *s == 1.0 => abs_sin_series(degree),
            Body::AbsSinPow(s) => analyzed_series(self.cache_key(), degree, &|x: f64| {
                x.sin().abs().powf(*s)
            }),
            Body::ExpSin => analyzed_series(self.cache_key(), degree, &|x: f64| x.sin().exp()),
        }
    }

    /// Samples on a power-of-two grid (exact closure evaluation).
    pub fn sample(&self, n_points: usize) -> Result<SampledFunction> {
        let grid = PeriodicGrid::new(n_points)?;
        Ok(SampledFunction::from_fn(grid, |x| self.eval(x)))
    }

    fn cache_key(&self) -> u64 {
        match &self.body {
            Body::Poly(_) => 0,
            Body::AbsSinPow(s) => 1 ^ s.to_bits(),
            Body::ExpSin => 2,
        }
    }
}

/// Closed-form mode expansion of `|sin x|`: mean `2/pi`, even cosine modes
/// `-4 / (pi (4m^2 - 1))`.
pub fn abs_sin_series(degree: usize) -> TrigPoly {
    let mut p = TrigPoly::zero().with_degree(degree);
    p.a0 = 2.0 / PI;
    for m in 1..=(degree / 2) {
        p.a[2 * m - 1] = -4.0 / (PI * ((4 * m * m) as f64 - 1.0));
    }
    p
}

/// Analysis of a transcendental member on a fine fixed grid, cached once per
/// member, then truncated per request.
fn analyzed_series(key: u64, degree: usize, f: &dyn Fn(f64) -> f64) -> TrigPoly {
    const N: usize = 131_072;
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<TrigPoly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let full = {
        let mut guard = cache.lock().expect("series cache poisoned");
        guard
            .entry(key)
            .or_insert_with(|| {
                let grid = PeriodicGrid::new(N).expect("power-of-two grid");
                let samples = SampledFunction::from_fn(grid, f);
                Arc::new(analyze(&samples))
            })
            .clone()
    };
    full.with_degree(degree.min(N / 2 - 1))
}

/// The canonical random polynomial stream: one generator seeded from the
/// master seed produces the members in order, so the family is a pure
/// function of the seed.
pub fn random_polys(seed: u64, count: usize, degree: usize) -> Vec<TrigPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p = TrigPoly::zero().with_degree(degree);
            p.a0 = rng.gen_range(-1.0..1.0);
            for k in 0..degree {
                p.a[k] = rng.gen_range(-1.0..1.0) / (k + 1) as f64;
                p.b[k] = rng.gen_range(-1.0..1.0) / (k + 1) as f64;
            }
            p
        })
        .collect()
}

fn shape_smooth(max_freq: f64) -> FnShape {
    FnShape {
        kinks: Vec::new(),
        power_points: Vec::new(),
        max_freq,
    }
}

/// Shape of `|sin x|^s`: power-type zeros at 0 and -pi (the zeros of sin,
/// wrapped to [-pi, pi)), plus plain kinks there when the power is an odd
/// integer.
fn shape_abs_sin_pow(s: f64) -> FnShape {
    let power_points = vec![
        SingularPoint {
            location: 0.0,
            exponent: s,
        },
        SingularPoint {
            location: -PI,
            exponent: s,
        },
    ];
    FnShape {
        kinks: if s == 1.0 { vec![0.0, -PI] } else { Vec::new() },
        power_points,
        max_freq: 64.0,
    }
}

/// Mollified sawtooth: the smoothed partial expansion `V_n` of the sawtooth
/// wave `x` on `(-pi, pi)` (sine modes `2 (-1)^{k+1} / k`), exact polynomial
/// of degree `2n - 1`.
pub fn sawtooth_vp(n: u32) -> TrigPoly {
    // Raw sawtooth modes up to the mollifier's reach.
    let deg = 2 * n as usize;
    let mut p = TrigPoly::zero().with_degree(deg);
    for k in 1..=deg {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let coeff = 2.0 * sign / k as f64;
        let kf = k as f64;
        let nf = n as f64;
        let taper = if k as u32 <= n {
            1.0
        } else if (k as u32) < 2 * n {
            2.0 - kf / nf
        } else {
            0.0
        };
        p.b[k - 1] = coeff * taper;
    }
    p.trimmed(0.0)
}

/// The 48-member operator-norm family: 16 cosine modes, 20 seeded random
/// degree-32 polynomials, 4 powers of |sin|, 8 mollified sawtooth sums.
pub fn operator_norm_family(seed: u64) -> Vec<TestFunction> {
    let mut family = Vec::with_capacity(48);
    for m in 1..=16_usize {
        family.push(TestFunction {
            name: format!("mode_cos_{m:02}"),
            kind: "mode",
            shape: shape_smooth(m as f64),
            body: Body::Poly(TrigPoly::cos_mode(m)),
        });
    }
    for (i, p) in random_polys(seed, RANDOM_COUNT, RANDOM_DEGREE)
        .into_iter()
        .enumerate()
    {
        family.push(TestFunction {
            name: format!("random_poly_{i:02}"),
            kind: "random_poly",
            shape: shape_smooth(RANDOM_DEGREE as f64),
            body: Body::Poly(p),
        });
    }
    for s in [0.5, 1.0, 1.5, 2.5] {
        family.push(TestFunction {
            name: format!("abs_sin_pow_{s}"),
            kind: "abs_sin_pow",
            shape: shape_abs_sin_pow(s),
            body: Body::AbsSinPow(s),
        });
    }
    for e in 1..=8_u32 {
        let n = 1 << e; // 2, 4, ..., 256
        family.push(TestFunction {
            name: format!("sawtooth_vp_{n:03}"),
            kind: "sawtooth_vp",
            shape: shape_smooth((2 * n - 1) as f64),
            body: Body::Poly(sawtooth_vp(n)),
        });
    }
    family
}

/// The spectrally-smooth transcendental member for decay-rate checks.
pub fn exp_sin() -> TestFunction {
    TestFunction {
        name: "exp_sin".into(),
        kind: "exp_sin",
        shape: shape_smooth(32.0),
        body: Body::ExpSin,
    }
}

/// The default sweep family: the operator-norm family plus `exp(sin x)`.
pub fn default_family(seed: u64) -> Vec<TestFunction> {
    let mut family = operator_norm_family(seed);
    family.push(exp_sin());
    family
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{norm_fn, norm_poly};

    #[test]
    fn family_has_the_documented_members() {
        let fam = operator_norm_family(2024);
        assert_eq!(fam.len(), 48);
        let count = |k: &str| fam.iter().filter(|f| f.kind == k).count();
        assert_eq!(count("mode"), 16);
        assert_eq!(count("random_poly"), 20);
        assert_eq!(count("abs_sin_pow"), 4);
        assert_eq!(count("sawtooth_vp"), 8);
        let names: Vec<&str> = fam.iter().map(|f| f.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 48, "names are unique");
        assert_eq!(default_family(2024).len(), 49);
    }

    #[test]
    fn family_is_deterministic_in_the_seed() {
        let a = operator_norm_family(7);
        let b = operator_norm_family(7);
        let c = operator_norm_family(8);
        for (x, y) in a.iter().zip(&b) {
            if let (Some(p), Some(q)) = (x.as_poly(), y.as_poly()) {
                assert_eq!(p.a0.to_bits(), q.a0.to_bits());
                for k in 0..p.degree() {
                    assert_eq!(p.a[k].to_bits(), q.a[k].to_bits());
                }
            }
        }
        // A different seed changes at least the random members.
        let pa = a[20].as_poly().unwrap();
        let pc = c[20].as_poly().unwrap();
        assert!(pa.a0 != pc.a0 || pa.a != pc.a);
        // ... and leaves the deterministic members untouched.
        assert_eq!(a[0].name, c[0].name);
        assert_eq!(
            a[0].as_poly().unwrap().a,
            c[0].as_poly().unwrap().a
        );
    }

    #[test]
    fn closed_form_abs_sin_series_matches_closure() {
        // Coefficients decay like m^-2, so the uniform truncation error of a
        // degree-4096 partial sum is of order 1e-4 (worst at the kinks).
        let p = abs_sin_series(4096);
        for x in [-2.5, -0.3, 0.0, 0.7, 1.4, 3.0] {
            let err = (p.eval(x) - x.sin().abs()).abs();
            assert!(err < 2e-4, "x={x}: err {err}");
        }
        // Mean value 2/pi is the stored constant.
        assert!((p.a0 - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn analyzed_series_matches_closures_for_smooth_members() {
        let f = exp_sin();
        let p = f.to_poly(40);
        for x in [-3.0, -1.1, 0.0, 0.4, 2.2] {
            let err = (p.eval(x) - x.sin().exp()).abs();
            assert!(err < 1e-13, "x={x}: err {err}");
        }
    }

    #[test]
    fn abs_sin_powers_series_converge_at_their_own_rate() {
        // Coefficient decay ~ k^-(s+1): the truncation error at degree 512
        // is far below the percent level used by the sweeps.
        for s in [0.5, 1.5, 2.5] {
            let f = TestFunction {
                name: "t".into(),
                kind: "abs_sin_pow",
                shape: shape_abs_sin_pow(s),
                body: Body::AbsSinPow(s),
            };
            let p = f.to_poly(512);
            let mut worst = 0.0_f64;
            for j in 0..64 {
                let x = -PI + 2.0 * PI * (j as f64 + 0.37) / 64.0;
                worst = worst.max((p.eval(x) - f.eval(x)).abs());
            }
            assert!(worst < 2e-3, "s={s}: worst {worst}");
            // The expansion is even: no sine modes.
            assert!(p.b.iter().all(|&b| b.abs() < 1e-11), "s={s}");
        }
    }

    #[test]
    fn sawtooth_vp_reproduces_low_modes_and_tapers() {
        let n = 8;
        let p = sawtooth_vp(n);
        assert_eq!(p.degree(), 2 * n as usize - 1);
        // Low modes carry the raw sawtooth coefficients.
        for k in 1..=n as usize {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            assert!((p.b[k - 1] - 2.0 * sign / k as f64).abs() < 1e-15);
        }
        // Tapered band decays linearly to zero.
        let k = (2 * n - 1) as usize;
        let expect = 2.0 / k as f64 * (2.0 - k as f64 / n as f64);
        assert!((p.b[k - 1].abs() - expect).abs() < 1e-15);
    }

    #[test]
    fn shapes_feed_the_norm_engine() {
        // The declared shapes are good enough for the engine to integrate the
        // rough members: compare |sin|^s norms against quadrature oracles.
        let fam = operator_norm_family(1);
        let abs_sin = fam.iter().find(|f| f.name == "abs_sin_pow_1").unwrap();
        // ||sin||_2^2 = pi over the unweighted circle.
        let n2 = norm_fn(&|x| abs_sin.eval(x), &abs_sin.shape, 2.0, None).unwrap();
        assert!((n2 - PI.sqrt()).abs() < 1e-9, "{n2}");
        // L1 norm of |sin| is 4.
        let n1 = norm_fn(&|x| abs_sin.eval(x), &abs_sin.shape, 1.0, None).unwrap();
        assert!((n1 - 4.0).abs() < 1e-9, "{n1}");
        // Truncated expansion agrees with the closure norm at its own decay.
        let p = abs_sin.to_poly(1024);
        let pn = norm_poly(&p, 2.0, None).unwrap();
        assert!((pn - n2).abs() < 1e-6);
    }

    #[test]
    fn truncation_degree_is_respected() {
        let fam = operator_norm_family(3);
        for f in &fam {
            let p = f.to_poly(16);
            assert!(p.degree() <= 16, "{}", f.name);
        }
        // Polynomial members of lower degree are returned whole.
        let mode3 = &fam[2];
        assert_eq!(mode3.to_poly(64).degree(), 3);
    }

    #[test]
    fn samples_round_trip_for_polynomial_members() {
        let fam = operator_norm_family(5);
        let member = &fam[20];
        let p = member.as_poly().unwrap();
        let samples = member.sample(128).unwrap();
        let back = analyze(&samples);
        for k in 0..RANDOM_DEGREE {
            assert!((p.a[k] - back.a[k]).abs() < 1e-12);
            assert!((p.b[k] - back.b[k]).abs() < 1e-12);
        }
    }
}
