//! Fourier-multiplier smoothing of an extended truth.
//!
//! With `ŵ(λ) = (2π)⁻¹ ∫ e^{itλ} w(t) dt`, the smoothed function
//! `b⁻¹ (ψ_b * w)` has transform `ŵ(λ) bump(bλ)`, so it and its derivatives
//! are finite sums over a uniform frequency lattice on `|λ| < 2/b`.

use super::psi::bump;
use crate::error::{Error, Result};
use crate::experiments::truth::SmoothTruth;
use crate::processes::StationaryKernel;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

pub(crate) struct SmoothedTruth {
    bandwidth: f64,
    dl: f64,
    /// `λ_m = m dl` for `m = 0, 1, ...` inside the support of `bump(b·)`.
    lambdas: Vec<f64>,
    /// `ŵ(λ_m)`.
    w_hat: Vec<Complex64>,
}

/// `ŵ` on the lattice `m · 2π/P`, by the trapezoid rule on a uniform grid
/// over the support [−1, 2] of the extension.
pub(crate) fn smooth_truth(truth: &SmoothTruth, bandwidth: f64) -> SmoothedTruth {
    assert!(bandwidth > 0.0);
    let lmax = 2.0 / bandwidth;
    // the lattice spacing periodises the result with period P; ψ_b has decayed
    // far below 1e-9 once the period exceeds the support by 200 b
    let period = 8.0 + 200.0 * bandwidth;
    let dl = 2.0 * PI / period;
    let m_max = (lmax / dl).floor() as usize;
    let lambdas: Vec<f64> = (0..=m_max).map(|m| m as f64 * dl).collect();
    if truth.is_zero() {
        return SmoothedTruth {
            bandwidth,
            dl,
            w_hat: vec![Complex64::new(0.0, 0.0); lambdas.len()],
            lambdas,
        };
    }

    let needed = 2.0 * (truth.max_frequency() + lmax) / PI;
    let per_unit = (needed.max(8192.0)).log2().ceil().exp2() as usize;
    let h = 1.0 / per_unit as f64;
    let nodes = 3 * per_unit;
    let samples: Vec<f64> = (0..=nodes)
        .map(|k| truth.extended(-1.0 + k as f64 * h))
        .collect();
    let w_hat = lambdas
        .par_iter()
        .map(|&l| {
            let step = Complex64::from_polar(1.0, l * h);
            let mut phase = Complex64::from_polar(1.0, -l);
            let mut acc = Complex64::new(0.0, 0.0);
            for &s in &samples {
                acc += phase * s;
                phase *= step;
            }
            acc * h / (2.0 * PI)
        })
        .collect();
    SmoothedTruth {
        bandwidth,
        dl,
        lambdas,
        w_hat,
    }
}

impl SmoothedTruth {
    fn weight(&self, m: usize) -> f64 {
        let w = bump(self.bandwidth * self.lambdas[m]) * self.dl;
        if m == 0 {
            w
        } else {
            2.0 * w
        }
    }

    /// `j`-th derivative of the smoothed function at `t`.
    pub fn derivative(&self, j: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for (m, (&l, &wh)) in self.lambdas.iter().zip(&self.w_hat).enumerate() {
            let factor = Complex64::new(0.0, -l).powu(j as u32);
            acc += self.weight(m) * (factor * Complex64::from_polar(1.0, -t * l) * wh).re;
        }
        acc
    }

    pub fn values(&self, j: usize, grid: &[f64]) -> Vec<f64> {
        grid.par_iter().map(|&t| self.derivative(j, t)).collect()
    }

    /// `∫ |ŵ(λ)|² bump(bλ)² / (c φ̂(cλ)) dλ`: the squared norm in the RKHS of
    /// the stationary process rescaled by `c`.
    pub fn stationary_norm_sq(&self, kernel: &StationaryKernel, c: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (m, (&l, wh)) in self.lambdas.iter().zip(&self.w_hat).enumerate() {
            let b = bump(self.bandwidth * l);
            if b == 0.0 {
                continue;
            }
            let dens = c * kernel.spectral.density(c * l);
            if !(dens > 1e-300) {
                return Err(Error::SpectralUnderflow(l));
            }
            let mult = if m == 0 { 1.0 } else { 2.0 };
            acc += mult * self.dl * wh.norm_sqr() * b * b / dens;
        }
        Ok(acc)
    }
}
