//! Piecewise-polynomial ε-net over the RKHS unit ball of a rescaled
//! stationary process.

use super::element::RkhsElement;
use crate::error::{Error, Result};
use crate::processes::{GaussianPrior, Grid, SpectralMeasure};
use std::io::Write;

pub const MAX_NET_ORDER: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyNet {
    pub c: f64,
    pub epsilon: f64,
    /// Piece width.
    pub d: f64,
    /// Number of Taylor coefficients per piece.
    pub k_order: usize,
    pub pieces: usize,
    /// Lattice spacing `η_j` of the `j`-th coefficient.
    pub eta: Vec<f64>,
    /// Half-width `sqrt(α_{2j}) / c^j` of the `j`-th coefficient range.
    pub ranges: Vec<f64>,
    /// Lattice points per coefficient: `2⌊range/η⌋ + 1`.
    pub levels: Vec<u64>,
    /// Exact `log #H`.
    pub log_cardinality: f64,
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// Build the net for the unit ball of the RKHS of `prior` at resolution `ε`.
///
/// `d = δc/4`, `k` is the smallest order with `sqrt(α_{2k}) (d/c)^k / k! ≤ ε`
/// and `η_j = ε j! / (d^j k)`.
pub fn entropy_net(prior: &GaussianPrior, epsilon: f64) -> Result<EntropyNet> {
    let (spectral, c): (SpectralMeasure, f64) = match prior {
        GaussianPrior::RescaledStationary { kernel, c } => (kernel.spectral, *c),
        _ => {
            return Err(Error::InvalidParameter(
                "entropy nets are built for stationary priors".into(),
            ))
        }
    };
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let d = spectral.delta * c / 4.0;
    let ratio = d / c;
    let remainder = |k: usize| spectral.abs_moment(2 * k).sqrt() * ratio.powi(k as i32) / factorial(k);
    let k = (1..=MAX_NET_ORDER)
        .find(|&k| remainder(k) <= epsilon)
        .ok_or(Error::Infeasible(epsilon))?;
    let pieces = (1.0 / d).ceil() as usize;
    let mut eta = Vec::with_capacity(k);
    let mut ranges = Vec::with_capacity(k);
    let mut levels = Vec::with_capacity(k);
    for j in 0..k {
        let e = epsilon * factorial(j) / (d.powi(j as i32) * k as f64);
        let r = spectral.abs_moment(2 * j).sqrt() / c.powi(j as i32);
        eta.push(e);
        ranges.push(r);
        levels.push(2 * (r / e).floor() as u64 + 1);
    }
    let log_cardinality = pieces as f64 * levels.iter().map(|&n| (n as f64).ln()).sum::<f64>();
    Ok(EntropyNet {
        c,
        epsilon,
        d,
        k_order: k,
        pieces,
        eta,
        ranges,
        levels,
        log_cardinality,
    })
}

impl EntropyNet {
    /// Piece containing `t`: `((i−1)d, id]`, with `t = 0` in the first piece.
    fn piece_of(&self, t: f64) -> usize {
        ((t / self.d).ceil() as usize).clamp(1, self.pieces)
    }

    fn lattice_index(&self, j: usize, value: f64) -> i64 {
        let half = ((self.levels[j] - 1) / 2) as i64;
        ((value / self.eta[j]).round() as i64).clamp(-half, half)
    }

    fn piece_poly(&self, i: usize, idx: &[i64], t: f64) -> f64 {
        let x = t - i as f64 * self.d;
        let mut acc = 0.0;
        let mut term = 1.0;
        for (j, &n) in idx.iter().enumerate() {
            if j > 0 {
                term *= x / j as f64;
            }
            acc += n as f64 * self.eta[j] * term;
        }
        acc
    }
}

/// Whether some member of the net is within `2ε` of `element` in sup-norm
/// over the default grid.
///
/// On each piece the search starts from the member whose coefficients are the
/// element's Taylor coefficients at the right end point rounded to the
/// lattice, then tries every combination of neighbouring lattice points.
pub fn net_covers(net: &EntropyNet, element: &RkhsElement) -> Result<bool> {
    let grid = Grid::default();
    let pts = grid.points();
    let target: Vec<f64> = pts.iter().map(|&t| element.eval(t)).collect();
    let mut by_piece: Vec<Vec<usize>> = vec![Vec::new(); net.pieces + 1];
    for (n, &t) in pts.iter().enumerate() {
        by_piece[net.piece_of(t)].push(n);
    }
    let tol = 2.0 * net.epsilon;
    for i in 1..=net.pieces {
        if by_piece[i].is_empty() {
            continue;
        }
        let anchor = i as f64 * net.d;
        let mut base = Vec::with_capacity(net.k_order);
        for j in 0..net.k_order {
            let dj = element.derivative(j, anchor).ok_or(Error::MissingDerivatives {
                needed: net.k_order,
                got: j,
            })?;
            base.push(net.lattice_index(j, dj));
        }
        let error = |idx: &[i64]| {
            by_piece[i]
                .iter()
                .map(|&n| (net.piece_poly(i, idx, pts[n]) - target[n]).abs())
                .fold(0.0, f64::max)
        };
        if error(&base) <= tol {
            continue;
        }
        let mut found = false;
        let combos = 3usize.pow(net.k_order.min(10) as u32);
        let mut idx = base.clone();
        for code in 0..combos {
            let mut rest = code;
            for (j, slot) in idx.iter_mut().enumerate().take(net.k_order.min(10)) {
                let shift = (rest % 3) as i64 - 1;
                rest /= 3;
                let half = ((net.levels[j] - 1) / 2) as i64;
                *slot = (base[j] + shift).clamp(-half, half);
            }
            if error(&idx) <= tol {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// CSV with columns `c,epsilon,d,k_order,log_cardinality`.
pub fn write_nets_csv<W: Write>(out: W, nets: &[EntropyNet]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["c", "epsilon", "d", "k_order", "log_cardinality"])?;
    for n in nets {
        w.write_record([
            n.c.to_string(),
            n.epsilon.to_string(),
            n.d.to_string(),
            n.k_order.to_string(),
            n.log_cardinality.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
