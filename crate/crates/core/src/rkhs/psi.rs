//! Band-limited smoothing kernel with a flat Fourier transform near zero.

use crate::quad;
use std::f64::consts::PI;

/// 1 on |λ| ≤ 1, 0 on |λ| ≥ 2, `exp(1 − 1/(1 − (|λ|−1)²))` in between.
pub fn bump(lambda: f64) -> f64 {
    let l = lambda.abs();
    if l <= 1.0 {
        1.0
    } else if l >= 2.0 {
        0.0
    } else {
        let x = l - 1.0;
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// `ψ` with `ψ̂ = bump / (2π)`. Because `ψ̂` is constant near 0, `∫ψ = 1`
/// and every moment of positive order vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingKernelPsi {
    pub fourier_plateau_radius: f64,
    pub fourier_support_radius: f64,
}

impl Default for SmoothingKernelPsi {
    fn default() -> Self {
        SmoothingKernelPsi {
            fourier_plateau_radius: 1.0,
            fourier_support_radius: 2.0,
        }
    }
}

impl SmoothingKernelPsi {
    /// `2π ψ̂(λ)`: the bump stretched to the configured radii.
    pub fn shape(&self, lambda: f64) -> f64 {
        let p = self.fourier_plateau_radius;
        let s = self.fourier_support_radius;
        bump(1.0 + (lambda.abs() - p).max(0.0) / (s - p))
    }

    pub fn psi_hat(&self, lambda: f64) -> f64 {
        self.shape(lambda) / (2.0 * PI)
    }

    /// `ψ(t) = ∫ e^{−itλ} ψ̂(λ) dλ`.
    pub fn psi(&self, t: f64) -> f64 {
        let p = self.fourier_plateau_radius;
        let s = self.fourier_support_radius;
        let plateau = if t == 0.0 { p } else { (p * t).sin() / t };
        let panels = 16 + ((s - p) * t.abs() / 2.0).ceil() as usize;
        let taper = quad::gl_panels(|l| (t * l).cos() * self.shape(l), p, s, panels);
        (plateau + taper) / PI
    }
}
