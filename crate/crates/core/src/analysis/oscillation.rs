//! Weak convergence of rapidly oscillating periodic functions and of
//! row-wise stress/gradient products.
//!
//! The domain is the cell itself, described in reference coordinates
//! `x̂ ∈ [0,1]³`. Scaling by `1/n` tiles it with `n³` copies of the cell, so
//! `∫ f(n·x) φ(x) dx` reduces to the quadrature samples of `f` weighted by the
//! copy average of `φ`. Test functions are products of one-dimensional
//! profiles with closed-form integrals; the copy average then factorizes and
//! costs `O(n)` per direction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cell::{Cell, LPField, SymField};
use crate::donati::{relative_divergence, HILL_MANDEL_DIV_TOL};
use crate::error::{Error, Result};

/// One-dimensional factor of a separable test function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    Constant(f64),
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    /// `amplitude·sin(2π·frequency·t + phase)`.
    Sine { amplitude: f64, frequency: f64, phase: f64 },
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Polynomial(coef) => coef.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Profile::Sine { amplitude, frequency, phase } => {
                amplitude * (2.0 * PI * frequency * t + phase).sin()
            }
        }
    }

    /// `∫₀¹ φ(t) dt`.
    pub fn integral(&self) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Polynomial(coef) => coef
                .iter()
                .enumerate()
                .map(|(p, c)| c / (p + 1) as f64)
                .sum(),
            Profile::Sine { amplitude, frequency, phase } => {
                if *frequency == 0.0 {
                    return amplitude * phase.sin();
                }
                let w = 2.0 * PI * frequency;
                amplitude * (phase.cos() - (w + phase).cos()) / w
            }
        }
    }

    /// `(1/n) Σ_{c<n} φ((t + c)/n)`.
    fn copy_average(&self, t: f64, n: usize) -> f64 {
        if let Profile::Constant(c) = self {
            return *c;
        }
        let nf = n as f64;
        (0..n).map(|c| self.eval((t + c as f64) / nf)).sum::<f64>() / nf
    }

    fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant(_))
    }
}

/// `φ(x) = φ₁(x̂₁)·φ₂(x̂₂)·φ₃(x̂₃)` in reference coordinates of the cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub factors: [Profile; 3],
}

impl TestFunction {
    pub fn new(factors: [Profile; 3]) -> Self {
        Self { factors }
    }

    pub fn constant(c: f64) -> Self {
        Self::new([Profile::Constant(c), Profile::Constant(1.0), Profile::Constant(1.0)])
    }

    /// `φ(x) = x̂_d`.
    pub fn coordinate(d: usize) -> Self {
        let mut f = [Profile::Constant(1.0), Profile::Constant(1.0), Profile::Constant(1.0)];
        f[d] = Profile::Polynomial(vec![0.0, 1.0]);
        Self::new(f)
    }

    pub fn is_constant(&self) -> bool {
        self.factors.iter().all(Profile::is_constant)
    }

    pub fn eval_reference(&self, r: [f64; 3]) -> f64 {
        (0..3).map(|d| self.factors[d].eval(r[d])).product()
    }

    /// `∫_Ω φ` over the cell.
    pub fn integral(&self, cell: &Cell) -> f64 {
        cell.volume() * self.factors.iter().map(Profile::integral).product::<f64>()
    }

    fn constant_value(&self) -> f64 {
        self.factors.iter().map(Profile::integral).product()
    }
}

/// Scalar samples at the quadrature points of a cell, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSamples {
    pub cell: Cell,
    pub values: Vec<f64>,
}

impl ScalarSamples {
    pub fn from_fn(cell: Cell, f: impl Fn(&nalgebra::Vector3<f64>) -> f64) -> Self {
        let values = (0..cell.grid.element_count())
            .flat_map(|e| (0..8).map(move |g| (e, g)))
            .map(|(e, g)| f(&cell.quadrature_point(e, g)))
            .collect();
        Self { cell, values }
    }

    /// `∫_Y f` by quadrature.
    pub fn total(&self) -> f64 {
        self.cell.quadrature_weight() * self.values.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationRecord {
    pub n: usize,
    pub integral: f64,
    pub target: f64,
    pub error: f64,
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!(
            "oscillation schedule must be positive and increasing, got {schedule:?}"
        )));
    }
    Ok(())
}

/// `∫_Ω f(n·x) φ(x) dx` for sampled periodic `f`.
pub fn oscillating_integral(f: &ScalarSamples, n: usize, phi: &TestFunction) -> f64 {
    let cell = &f.cell;
    if phi.is_constant() {
        return f.total() * phi.constant_value();
    }
    let w = cell.quadrature_weight();
    (0..cell.grid.element_count())
        .flat_map(|e| (0..8).map(move |g| (e, g)))
        .zip(&f.values)
        .map(|((e, g), fq)| {
            let r = cell.quadrature_reference(e, g);
            let avg: f64 = (0..3).map(|d| phi.factors[d].copy_average(r[d], n)).product();
            w * fq * avg
        })
        .sum()
}

/// Records of `∫ f(n·x) φ(x) dx` against the weak limit `(⨍_Y f)·∫_Ω φ`.
pub fn oscillation_demo(
    f: &ScalarSamples,
    schedule: &[usize],
    phi: &TestFunction,
) -> Result<Vec<OscillationRecord>> {
    check_schedule(schedule)?;
    let target = f.total() * phi.constant_value();
    Ok(schedule
        .iter()
        .map(|&n| {
            let integral = oscillating_integral(f, n, phi);
            OscillationRecord {
                n,
                integral,
                target,
                error: integral - target,
            }
        })
        .collect())
}

/// Oscillating products `aₙ·bₙ` with `aₙ` row `row` of `σ(n·x)` and `bₙ`
/// row `row` of `∇v(n·x)`, against `⟨⨍a, ⨍b⟩·∫_Ω φ`.
pub fn div_curl_demo(
    sigma: &SymField,
    v: &LPField,
    row: usize,
    schedule: &[usize],
    phi: &TestFunction,
) -> Result<Vec<OscillationRecord>> {
    if row > 2 {
        return Err(Error::Parameter(format!("row must be 0, 1 or 2, got {row}")));
    }
    check_schedule(schedule)?;
    let cell = sigma.cell;
    cell.check_same(v.cell(), "div-curl demo")?;
    let divergence = relative_divergence(sigma)?;
    if divergence > HILL_MANDEL_DIV_TOL {
        return Err(Error::Precondition(format!(
            "stress is not divergence-free: relative ‖div_w σ‖ = {divergence:e}"
        )));
    }
    let affine = v.affine.to_matrix();
    let grads = v.phi.gradient_at_quadrature();
    let w = cell.quadrature_weight();
    let mut avg_a = [0.0; 3];
    let mut avg_b = [0.0; 3];
    let products: Vec<f64> = sigma
        .values
        .iter()
        .zip(&grads)
        .map(|(s, g)| {
            let s = s.to_matrix();
            let grad = g + affine;
            let mut p = 0.0;
            for j in 0..3 {
                avg_a[j] += w * s[(row, j)];
                avg_b[j] += w * grad[(row, j)];
                p += s[(row, j)] * grad[(row, j)];
            }
            p
        })
        .collect();
    let volume = cell.volume();
    let limit: f64 = (0..3).map(|j| avg_a[j] * avg_b[j]).sum::<f64>() / (volume * volume);
    let target = limit * phi.integral(&cell);
    let samples = ScalarSamples { cell, values: products };
    Ok(schedule
        .iter()
        .map(|&n| {
            let integral = oscillating_integral(&samples, n, phi);
            OscillationRecord {
                n,
                integral,
                target,
                error: integral - target,
            }
        })
        .collect())
}

/// Least-squares slope of `log|error|` against `log n`. `None` when fewer than
/// two records carry a nonzero error.
pub fn decay_exponent(records: &[OscillationRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error != 0.0)
        .map(|r| ((r.n as f64).ln(), r.error.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// The doubling schedule `1, 2, 4, …, max`.
pub fn doubling_schedule(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |n| Some(n * 2))
        .take_while(|&n| n <= max)
        .collect()
}
