//! Constructive upper estimate of the concentration function.

use super::approx::{ibm_smoothed, smoothed_in_stationary_rkhs};
use crate::error::{Error, Result};
use crate::experiments::truth::SmoothTruth;
use crate::processes::{GaussianPrior, Grid};
use crate::smallball::SmallBallEstimate;
use std::io::Write;

/// Bandwidths tried are `2^{−m/4}` for `m = 0..=MAX_LADDER`.
pub const MAX_LADDER: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationEstimate {
    pub epsilon: f64,
    /// Bandwidth of the witness, `None` when `w0 ≡ 0`.
    pub bandwidth: Option<f64>,
    /// Squared RKHS norm of the witness.
    pub approx_term: f64,
    pub smallball_term: f64,
    pub total: f64,
}

/// `‖h‖²_H − log Pr(‖W‖ ≤ ε)` for the smoothed witness `h` of `w0` with the
/// largest bandwidth on the ladder whose sup-distance to `w0` is at most `ε`.
/// This bounds the concentration function from above.
pub fn concentration_estimate(
    prior: &GaussianPrior,
    w0: &SmoothTruth,
    epsilon: f64,
    smallball: &SmallBallEstimate,
) -> Result<ConcentrationEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if smallball.epsilon != epsilon || &smallball.prior != prior {
        return Err(Error::InvalidParameter(
            "small-ball estimate belongs to a different prior or radius".into(),
        ));
    }
    let (bandwidth, approx_term) = if w0.is_zero() {
        (None, 0.0)
    } else {
        let (b, norm) = witness(prior, w0, epsilon)?;
        (Some(b), norm)
    };
    Ok(ConcentrationEstimate {
        epsilon,
        bandwidth,
        approx_term,
        smallball_term: smallball.neg_log_prob,
        total: approx_term + smallball.neg_log_prob,
    })
}

fn witness(prior: &GaussianPrior, w0: &SmoothTruth, epsilon: f64) -> Result<(f64, f64)> {
    let grid = Grid::default();
    for m in 0..=MAX_LADDER {
        let b = 2f64.powf(-(m as f64) / 4.0);
        let (err, norm) = match prior {
            GaussianPrior::RescaledStationary { kernel, c } => {
                match smoothed_in_stationary_rkhs(w0, b, *c, kernel, &grid) {
                    Ok(h) => (h.sup_error, h.rkhs_norm_sq),
                    Err(Error::SpectralUnderflow(_)) => break,
                    Err(e) => return Err(e),
                }
            }
            GaussianPrior::ModifiedIbm { k, c, a } => {
                let h = ibm_smoothed(w0, b, *k, *c, *a)?;
                (h.sup_error, h.rkhs_norm_sq)
            }
        };
        if err <= epsilon {
            return Ok((b, norm));
        }
    }
    Err(Error::Infeasible(epsilon))
}

/// CSV with columns `epsilon,bandwidth,approx_term,smallball_term,total`;
/// the bandwidth is empty for the zero truth.
pub fn write_concentration_csv<W: Write>(out: W, rows: &[ConcentrationEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "bandwidth", "approx_term", "smallball_term", "total"])?;
    for r in rows {
        w.write_record([
            r.epsilon.to_string(),
            r.bandwidth.map(|b| b.to_string()).unwrap_or_default(),
            r.approx_term.to_string(),
            r.smallball_term.to_string(),
            r.total.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
