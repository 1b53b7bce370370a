//! Dense factorizations used by the samplers and conjugate posteriors.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Relative jitter ladder: 1e-12, 1e-11, ..., 1e-6 times the largest diagonal.
pub const JITTER_START: f64 = 1e-12;
pub const JITTER_MAX: f64 = 1e-6;

/// Lower Cholesky factor of a covariance matrix, with the diagonal jitter
/// that was needed to obtain it.
#[derive(Clone, Debug)]
pub struct JitteredCholesky {
    pub lower: DMatrix<f64>,
    pub jitter: f64,
}

/// Cholesky with escalating diagonal jitter. Fails when even the largest
/// jitter leaves the matrix indefinite.
pub fn jittered_cholesky(cov: &DMatrix<f64>) -> Result<JitteredCholesky> {
    let n = cov.nrows();
    let max_diag = (0..n).map(|i| cov[(i, i)]).fold(0.0f64, f64::max);
    let scale = if max_diag > 0.0 { max_diag } else { 1.0 };
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * scale;
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok(JitteredCholesky {
                lower: ch.unpack(),
                jitter,
            });
        }
        rel *= 10.0;
        if rel > JITTER_MAX * 1.0001 {
            return Err(Error::CholeskyFailed { jitter });
        }
    }
}

/// Greedy pivoted Cholesky: `K ≈ L Lᵀ` with `L` of shape `n × rank`, rows in
/// the original order. Stops once every residual diagonal is at most
/// `rel_tol * max_diag`, so the discarded part is no larger than the jitter
/// the full factorization would add.
pub fn pivoted_cholesky<F>(diag: &[f64], mut entry: F, rel_tol: f64) -> DMatrix<f64>
where
    F: FnMut(usize, usize) -> f64,
{
    let n = diag.len();
    let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
    let tol = rel_tol * max_diag.max(f64::MIN_POSITIVE);
    let mut resid = diag.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    while cols.len() < n {
        let (piv, &best) = resid
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("unused pivot remains");
        if best <= tol {
            break;
        }
        used[piv] = true;
        let root = best.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if used[i] && i != piv {
                continue;
            }
            let mut v = entry(i, piv);
            for c in &cols {
                v -= c[i] * c[piv];
            }
            col[i] = v / root;
        }
        col[piv] = root;
        for i in 0..n {
            if !used[i] {
                resid[i] -= col[i] * col[i];
            }
        }
        resid[piv] = 0.0;
        cols.push(col);
    }
    let rank = cols.len();
    DMatrix::from_fn(n, rank, |i, j| cols[j][i])
}

/// Solve `L x = b` for lower-triangular `L` in place.
pub fn forward_substitute(lower: &DMatrix<f64>, b: &mut [f64]) {
    let n = lower.nrows();
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= lower[(i, j)] * b[j];
        }
        b[i] = s / lower[(i, i)];
    }
}

/// `y = L z` for lower-triangular `L`.
pub fn lower_mul(lower: &DMatrix<f64>, z: &[f64], out: &mut [f64]) {
    let n = lower.nrows();
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..=i {
            s += lower[(i, j)] * z[j];
        }
        out[i] = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(n: usize, c: f64) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            let d = (i as f64 - j as f64) / (n as f64 - 1.0) / c;
            (-d * d).exp()
        })
    }

    #[test]
    fn jitter_escalates_for_ill_conditioned_kernels() {
        let k = se(128, 1.0);
        let ch = jittered_cholesky(&k).unwrap();
        assert!(ch.jitter <= 1e-6 * 1.0001);
        let rebuilt = &ch.lower * ch.lower.transpose();
        assert!((rebuilt - &k).abs().max() < 1e-5);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            jittered_cholesky(&k),
            Err(Error::CholeskyFailed { .. })
        ));
    }

    #[test]
    fn pivoted_factor_reproduces_low_rank_kernel() {
        let k = se(200, 0.5);
        let diag: Vec<f64> = (0..200).map(|i| k[(i, i)]).collect();
        let l = pivoted_cholesky(&diag, |i, j| k[(i, j)], 1e-12);
        assert!(l.ncols() < 60, "rank {}", l.ncols());
        let err = (&l * l.transpose() - &k).abs().max();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn pivoted_factor_is_exact_for_full_rank() {
        let k = DMatrix::from_fn(5, 5, |i, j| ((i.min(j) + 1) as f64) / 5.0);
        let diag: Vec<f64> = (0..5).map(|i| k[(i, i)]).collect();
        let l = pivoted_cholesky(&diag, |i, j| k[(i, j)], 1e-14);
        assert_eq!(l.ncols(), 5);
        assert!((&l * l.transpose() - &k).abs().max() < 1e-14);
    }

    #[test]
    fn triangular_helpers_roundtrip() {
        let l = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 1.0, 3.0, 0.0, -1.0, 0.5, 1.5]);
        let z = [0.3, -1.2, 2.0];
        let mut y = [0.0; 3];
        lower_mul(&l, &z, &mut y);
        forward_substitute(&l, &mut y);
        for (a, b) in y.iter().zip(z) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
