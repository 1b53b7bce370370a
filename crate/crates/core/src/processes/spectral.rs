//! Spectral measures and the stationary covariance functions they generate.

use crate::quad;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// The two built-in spectral families.
///
/// `Gaussian` has density `exp(-λ²/4) / (2√π)` and covariance `exp(-t²)`;
/// `Laplace` has density `exp(-|λ|) / 2` and covariance `1 / (1 + t²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFamily {
    Gaussian,
    Laplace,
}

impl SpectralFamily {
    pub fn name(self) -> &'static str {
        match self {
            SpectralFamily::Gaussian => "squared_exponential",
            SpectralFamily::Laplace => "laplace_spectral",
        }
    }
}

/// Symmetric spectral measure with a Lebesgue density and an exponential
/// moment `∫ e^{δ|λ|} dμ < ∞` for the stored `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralMeasure {
    pub family: SpectralFamily,
    pub delta: f64,
}

const MAX_MOMENT_ORDER: usize = 64;

impl SpectralMeasure {
    pub fn new(family: SpectralFamily) -> Self {
        let delta = match family {
            SpectralFamily::Gaussian => 1.0,
            // exponential moment exists only for δ < 1
            SpectralFamily::Laplace => 0.5,
        };
        SpectralMeasure { family, delta }
    }

    pub fn density(&self, lambda: f64) -> f64 {
        spectral_density(self, lambda)
    }

    /// Smallest `U` with `μ(|λ| > U) ≤ tol`.
    pub fn tail_radius(&self, tol: f64) -> f64 {
        match self.family {
            SpectralFamily::Laplace => (1.0 / tol).ln().max(0.0),
            SpectralFamily::Gaussian => {
                // μ(|λ| > U) = erfc(U / 2)
                let (mut lo, mut hi) = (0.0, 80.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if erfc(mid / 2.0) > tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// Absolute moment `α_m = ∫ |λ|^m dμ(λ)` by adaptive quadrature
    /// (relative tolerance 1e-10); cached per family for even `m ≤ 128`.
    pub fn abs_moment(&self, m: usize) -> f64 {
        if m.is_multiple_of(2) && m / 2 <= MAX_MOMENT_ORDER {
            return even_moments(self.family)[m / 2];
        }
        moment_by_quadrature(self.family, m)
    }

    /// Closed-form absolute moments, used to cross-check the quadrature.
    pub fn abs_moment_closed_form(&self, m: usize) -> f64 {
        match self.family {
            // N(0, 2): E|λ|^m = 2^m Γ((m+1)/2) / √π
            SpectralFamily::Gaussian => {
                let mf = m as f64;
                (mf * 2f64.ln() + statrs::function::gamma::ln_gamma((mf + 1.0) / 2.0)
                    - 0.5 * PI.ln())
                .exp()
            }
            SpectralFamily::Laplace => statrs::function::gamma::gamma(m as f64 + 1.0),
        }
    }
}

fn moment_by_quadrature(family: SpectralFamily, m: usize) -> f64 {
    let measure = SpectralMeasure::new(family);
    let mf = m as f64;
    let (peak, width) = match family {
        SpectralFamily::Gaussian => ((2.0 * mf).sqrt(), 2.0),
        SpectralFamily::Laplace => (mf, mf.sqrt().max(1.0)),
    };
    let upper = peak + 40.0 * width + 60.0;
    // split at the peak so the adaptive rule sees both flanks
    let f = |l: f64| {
        if l == 0.0 {
            if m == 0 {
                measure.density(0.0)
            } else {
                0.0
            }
        } else {
            (mf * l.ln() + measure.density(l).ln()).exp()
        }
    };
    let left = quad::adaptive(f, 0.0, peak.max(1.0), 0.0, 1e-12).unwrap_or(f64::NAN);
    let right = quad::adaptive(f, peak.max(1.0), upper, 0.0, 1e-12).unwrap_or(f64::NAN);
    2.0 * (left + right)
}

fn even_moments(family: SpectralFamily) -> &'static [f64] {
    static GAUSS: OnceLock<Vec<f64>> = OnceLock::new();
    static LAPLACE: OnceLock<Vec<f64>> = OnceLock::new();
    let cell = match family {
        SpectralFamily::Gaussian => &GAUSS,
        SpectralFamily::Laplace => &LAPLACE,
    };
    cell.get_or_init(|| {
        (0..=MAX_MOMENT_ORDER)
            .map(|j| moment_by_quadrature(family, 2 * j))
            .collect()
    })
}

/// Lebesgue density of μ at λ.
pub fn spectral_density(measure: &SpectralMeasure, lambda: f64) -> f64 {
    match measure.family {
        SpectralFamily::Gaussian => (-lambda * lambda / 4.0).exp() / (2.0 * PI.sqrt()),
        SpectralFamily::Laplace => 0.5 * (-lambda.abs()).exp(),
    }
}

/// Stationary covariance `E W_s W_t = φ(s − t)` generated by a spectral measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryKernel {
    pub spectral: SpectralMeasure,
}

impl StationaryKernel {
    pub fn new(family: SpectralFamily) -> Self {
        StationaryKernel {
            spectral: SpectralMeasure::new(family),
        }
    }

    pub fn squared_exponential() -> Self {
        Self::new(SpectralFamily::Gaussian)
    }

    pub fn laplace_spectral() -> Self {
        Self::new(SpectralFamily::Laplace)
    }

    pub fn family(&self) -> SpectralFamily {
        self.spectral.family
    }

    pub fn phi(&self, t: f64) -> f64 {
        match self.spectral.family {
            SpectralFamily::Gaussian => (-t * t).exp(),
            SpectralFamily::Laplace => 1.0 / (1.0 + t * t),
        }
    }

    /// `j`-th derivative of φ at `x`.
    pub fn phi_derivative(&self, j: usize, x: f64) -> f64 {
        match self.spectral.family {
            SpectralFamily::Gaussian => {
                // φ^{(j)}(x) = (-1)^j H_j(x) e^{-x²}, physicists' Hermite H_j
                let (mut h0, mut h1) = (1.0, 2.0 * x);
                let hj = match j {
                    0 => h0,
                    1 => h1,
                    _ => {
                        for n in 1..j {
                            let h2 = 2.0 * x * h1 - 2.0 * n as f64 * h0;
                            h0 = h1;
                            h1 = h2;
                        }
                        h1
                    }
                };
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * hj * (-x * x).exp()
            }
            SpectralFamily::Laplace => {
                // φ^{(j)}(x) = (-1)^j j! Im((x - i)^{-(j+1)})
                let z = Complex64::new(x, -1.0).powi(-(j as i32 + 1));
                let fact = statrs::function::factorial::factorial(j as u64);
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * fact * z.im
            }
        }
    }

    /// `∫ e^{-itλ} dμ(λ)` by Gauss–Legendre quadrature over the effective
    /// support of μ; used to check the Fourier pairing of the two families.
    pub fn phi_by_quadrature(&self, t: f64) -> f64 {
        let u = self.spectral.tail_radius(1e-14);
        let panels = (8.0 + u * (1.0 + t.abs()) / 4.0).ceil() as usize;
        let m = self.spectral;
        // even integrand; integrating over [0, u] keeps the kink at 0 on a panel edge
        2.0 * quad::gl_panels(|l| (t * l).cos() * m.density(l), 0.0, u, panels)
    }
}

/// `φ((s − t)/c)`.
pub fn stationary_covariance(kernel: &StationaryKernel, c: f64, s: f64, t: f64) -> f64 {
    kernel.phi((s - t) / c)
}
