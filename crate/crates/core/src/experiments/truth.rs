//! Ground-truth functions with a prescribed Hölder exponent.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_TERMS: usize = 12;

/// Statistical setting a truth is used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Density,
    Regression,
    Classification,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Density => "density",
            Setting::Regression => "regression",
            Setting::Classification => "classification",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthFormula {
    /// `Σ_{j=1}^{J} 2^{-jα} cos(2^j π t)` for `α ∈ (0, 1]`.
    WeierstrassType { alpha: f64, terms: usize },
    /// The Weierstrass-type sum with exponent `α − m` integrated `m` times,
    /// `m` the largest integer strictly below `α`.
    PolySmooth { alpha: f64, terms: usize },
    /// `sin(2π f t)`.
    TrigSmooth { frequency: f64 },
    Constant { value: f64 },
}

/// A truth on [0, 1] together with the extension to ℝ used by the
/// convolution constructions.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothTruth {
    /// Hölder exponent of the truth. Exponents up to 1 are extended to ℝ by
    /// reflection, larger ones by their own formula.
    pub alpha: f64,
    pub formula: TruthFormula,
    pub amplitude: f64,
    scale: f64,
}

fn trig_antiderivative(m: usize, x: f64) -> f64 {
    match m % 4 {
        0 => x.cos(),
        1 => x.sin(),
        2 => -x.cos(),
        _ => -x.sin(),
    }
}

fn smallest_integer_below(alpha: f64) -> usize {
    (alpha.ceil() - 1.0).max(0.0) as usize
}

fn raw_value(formula: &TruthFormula, t: f64) -> f64 {
    match *formula {
        TruthFormula::WeierstrassType { alpha, terms } => (1..=terms)
            .map(|j| 2f64.powf(-(j as f64) * alpha) * (2f64.powi(j as i32) * PI * t).cos())
            .sum(),
        TruthFormula::PolySmooth { alpha, terms } => {
            // m-fold antiderivative of 2^{-j(α-m)} cos(2^j π t) is
            // 2^{-jα} π^{-m} trig_m(2^j π t)
            let m = smallest_integer_below(alpha);
            let pm = PI.powi(m as i32);
            (1..=terms)
                .map(|j| {
                    2f64.powf(-(j as f64) * alpha) / pm
                        * trig_antiderivative(m, 2f64.powi(j as i32) * PI * t)
                })
                .sum()
        }
        TruthFormula::TrigSmooth { frequency } => (2.0 * PI * frequency * t).sin(),
        TruthFormula::Constant { value } => value,
    }
}

const NORMALISATION_POINTS: usize = 16_385;

fn sup_on_unit_interval(formula: &TruthFormula) -> f64 {
    (0..NORMALISATION_POINTS)
        .map(|i| raw_value(formula, i as f64 / (NORMALISATION_POINTS - 1) as f64).abs())
        .fold(0.0, f64::max)
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, infinitely differentiable.
fn smooth_step(x: f64) -> f64 {
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let x = x.clamp(0.0, 1.0);
    let (a, b) = (f(x), f(1.0 - x));
    a / (a + b)
}

/// Equal to 1 on [−1/2, 3/2], 0 outside (−1, 2).
pub fn extension_cutoff(t: f64) -> f64 {
    if t <= -1.0 || t >= 2.0 {
        0.0
    } else if t < 0.0 {
        smooth_step((t + 1.0) / 0.5)
    } else {
        smooth_step((2.0 - t) / 0.5)
    }
}

/// Fold `t ∈ [−1, 2]` into [0, 1] by reflection at 0 and at 1.
fn reflect(t: f64) -> f64 {
    let u = t.abs();
    if u > 1.0 {
        2.0 - u
    } else {
        u
    }
}

impl SmoothTruth {
    pub fn new(alpha: f64, formula: TruthFormula) -> Self {
        let scale = match formula {
            TruthFormula::Constant { .. } => 1.0,
            _ => sup_on_unit_interval(&formula),
        };
        SmoothTruth {
            alpha,
            formula,
            amplitude: 1.0,
            scale,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(f64::INFINITY, TruthFormula::Constant { value })
    }

    /// `sin(2π t)`; with the reflected extension its exponent is 1.
    pub fn sine() -> Self {
        Self::new(1.0, TruthFormula::TrigSmooth { frequency: 1.0 })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Highest angular frequency present in the formula.
    pub fn max_frequency(&self) -> f64 {
        match self.formula {
            TruthFormula::WeierstrassType { terms, .. } | TruthFormula::PolySmooth { terms, .. } => {
                2f64.powi(terms as i32) * PI
            }
            TruthFormula::TrigSmooth { frequency } => 2.0 * PI * frequency.abs(),
            TruthFormula::Constant { .. } => 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * raw_value(&self.formula, t) / self.scale
    }

    pub fn values(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&t| self.value(t)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || self.formula == TruthFormula::Constant { value: 0.0 }
    }

    /// Compactly supported extension to ℝ (support in [−1, 2]).
    pub fn extended(&self, t: f64) -> f64 {
        let cut = extension_cutoff(t);
        if cut == 0.0 {
            return 0.0;
        }
        let base = if self.alpha <= 1.0 {
            self.value(reflect(t))
        } else {
            self.value(t)
        };
        base * cut
    }
}

/// Truth with Hölder exponent `alpha`, normalised to sup-norm 1 on [0, 1].
///
/// The same function serves as `w₀` (regression), `log p₀` up to
/// normalisation (density) and the logit of `f₀` (classification).
pub fn make_truth(_setting: Setting, alpha: f64) -> SmoothTruth {
    assert!(alpha > 0.0, "alpha must be positive");
    let formula = if alpha <= 1.0 {
        TruthFormula::WeierstrassType {
            alpha,
            terms: DEFAULT_TERMS,
        }
    } else {
        TruthFormula::PolySmooth {
            alpha,
            terms: DEFAULT_TERMS,
        }
    };
    SmoothTruth::new(alpha, formula)
}

/// `max |w(s) − w(t)| / |s − t|^exponent` over all pairs of grid points.
pub fn holder_quotient(grid: &[f64], values: &[f64], exponent: f64) -> f64 {
    let n = grid.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let q = (values[j] - values[i]).abs() / (grid[j] - grid[i]).powf(exponent);
            best = best.max(q);
        }
    }
    best
}
