use super::element::GridFunction;
use super::fourier::smooth_truth;
use crate::error::{Error, Result};
use crate::experiments::truth::SmoothTruth;
use crate::processes::{Grid, StationaryKernel};
use crate::quad;
use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct HolderApprox {
    pub c: f64,
    pub approx: GridFunction,
    pub sup_error: f64,
    pub rkhs_norm_sq: f64,
}

/// `c⁻¹ (ψ_c * w)` as an element of the RKHS of the stationary process
/// rescaled by `c`, its sup-distance to `w0` on the default grid and its
/// squared RKHS norm `c⁻¹ ∫ |ŵ(λ)|² bump(cλ)² / φ̂(cλ) dλ`.
pub fn holder_approx(
    w0: &SmoothTruth,
    beta: f64,
    c: f64,
    kernel: &StationaryKernel,
) -> Result<HolderApprox> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!("c must lie in (0, 1], got {c}")));
    }
    smoothed_in_stationary_rkhs(w0, c, c, kernel, &Grid::default())
}

/// Smooth `w0` at bandwidth `b` and price the result in the RKHS of the
/// stationary process rescaled by `c`.
pub(crate) fn smoothed_in_stationary_rkhs(
    w0: &SmoothTruth,
    bandwidth: f64,
    c: f64,
    kernel: &StationaryKernel,
    grid: &Grid,
) -> Result<HolderApprox> {
    let s = smooth_truth(w0, bandwidth);
    let pts = grid.points().to_vec();
    let values = s.values(0, &pts);
    let truth = w0.values(&pts);
    let rkhs_norm_sq = s.stationary_norm_sq(kernel, c)?;
    let mut approx = GridFunction::new(pts, values)?;
    approx.norm_bound = Some(rkhs_norm_sq.sqrt());
    let sup_error = approx.sup_distance(&truth);
    Ok(HolderApprox {
        c,
        approx,
        sup_error,
        rkhs_norm_sq,
    })
}

/// `sqrt(c^{2k+1} ‖h^{(k+1)}‖₂² + a Σ_{i≤k} h^{(i)}(0)²)` with the integral by
/// the trapezoid rule over the grid of `h`, which must start at 0.
pub fn sobolev_rkhs_norm(k: u32, c: f64, a: f64, h: &GridFunction) -> Result<f64> {
    let k = k as usize;
    let available = h.derivatives.len();
    if available < k + 1 {
        return Err(Error::MissingDerivatives {
            needed: k + 1,
            got: available,
        });
    }
    if h.grid.first() != Some(&0.0) {
        return Err(Error::InvalidGrid("Sobolev norm needs a grid starting at 0".into()));
    }
    let top = h.derivative(k + 1).expect("checked above");
    let sq: Vec<f64> = top.iter().map(|v| v * v).collect();
    let integral = quad::trapezoid(&h.grid, &sq);
    let boundary: f64 = (0..=k)
        .map(|i| h.derivative(i).expect("checked above")[0].powi(2))
        .sum();
    let polynomial = if a.is_infinite() { 0.0 } else { a * boundary };
    Ok((c.powi(2 * k as i32 + 1) * integral + polynomial).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IbmApprox {
    pub sigma: f64,
    pub approx: GridFunction,
    pub sup_error: f64,
    pub rkhs_norm_sq: f64,
    /// `c^{2k+1} ‖h^{(k+1)}‖₂²`.
    pub derivative_term: f64,
    /// `a Σ h^{(i)}(0)²`.
    pub boundary_term: f64,
}

/// `w0 * φ_σ` with `σ = ε^{1/β}` and its squared Sobolev RKHS norm for the
/// modified `k`-fold integrated Brownian motion with parameters `(c, a)`.
///
/// The smoothing kernel is `ψ`, whose moments of every positive order vanish.
pub fn ibm_approx(
    w0: &SmoothTruth,
    beta: f64,
    k: u32,
    c: f64,
    a: f64,
    epsilon: f64,
) -> Result<IbmApprox> {
    if !(beta > 0.0) || beta > k as f64 + 1.0 {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside (0, k + 1] for k = {k}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    ibm_smoothed(w0, epsilon.powf(1.0 / beta), k, c, a)
}

pub(crate) fn ibm_smoothed(w0: &SmoothTruth, sigma: f64, k: u32, c: f64, a: f64) -> Result<IbmApprox> {
    let s = smooth_truth(w0, sigma);
    // resolve the highest frequency 2/σ with a few dozen points per period
    let n = ((64.0 / sigma).ceil() as usize).max(2049);
    let pts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let values = s.values(0, &pts);
    let derivatives: Vec<Vec<f64>> = (1..=k as usize + 1).map(|j| s.values(j, &pts)).collect();
    let truth = w0.values(&pts);
    let mut approx = GridFunction::new(pts, values)?.with_derivatives(derivatives)?;
    let sup_error = approx.sup_distance(&truth);

    let top = approx.derivative(k as usize + 1).expect("computed above");
    let sq: Vec<f64> = top.iter().map(|v| v * v).collect();
    let derivative_term = c.powi(2 * k as i32 + 1) * quad::trapezoid(&approx.grid, &sq);
    let boundary: f64 = (0..=k as usize)
        .map(|i| approx.derivative(i).expect("computed above")[0].powi(2))
        .sum();
    let boundary_term = if a.is_infinite() { 0.0 } else { a * boundary };
    let rkhs_norm_sq = derivative_term + boundary_term;
    approx.norm_bound = Some(rkhs_norm_sq.sqrt());
    Ok(IbmApprox {
        sigma,
        approx,
        sup_error,
        rkhs_norm_sq,
        derivative_term,
        boundary_term,
    })
}

/// CSV with columns `c,sup_error,rkhs_norm_sq`.
pub fn write_approx_csv<W: Write>(out: W, rows: &[HolderApprox]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["c", "sup_error", "rkhs_norm_sq"])?;
    for r in rows {
        w.write_record([r.c.to_string(), r.sup_error.to_string(), r.rkhs_norm_sq.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
