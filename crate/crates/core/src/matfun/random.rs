//! Seeded random matrices for tests, oracles and witness searches.

use nalgebra::DMatrix;
use rand::Rng;

use super::SymMatrix;
use crate::sampling;

/// Orthogonal matrix from the QR factorization of a Gaussian matrix, with
/// column signs fixed so the distribution is Haar.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| sampling::normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Symmetric matrix with independent standard normal upper entries.
pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| sampling::normal(rng))
}

/// `Q diag(spectrum) Q^T` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> SymMatrix {
    let q = orthogonal(rng, spectrum.len());
    SymMatrix::diag(spectrum).congruence(&q.transpose())
}

/// Log-uniform spectrum in `[lo, hi]` whose sorted neighbours differ by at
/// least `gap`, drawn by rejection.
pub fn spectrum_with_gap<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut s = sampling::log_uniform_point(rng, n, lo, hi);
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] >= gap) {
            return s;
        }
    }
}

/// Positive definite matrix with spectrum in `[0.1, 10]` and eigen-gaps at
/// least `gap`.
pub fn spd_with_gap<R: Rng + ?Sized>(rng: &mut R, n: usize, gap: f64) -> SymMatrix {
    let s = spectrum_with_gap(rng, n, 0.1, 10.0, gap);
    with_spectrum(rng, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonality() {
        let mut rng = sampling::stream(5, 0);
        let q = orthogonal(&mut rng, 5);
        let e = &q.transpose() * &q - DMatrix::identity(5, 5);
        assert!(e.norm() < 1e-13);
    }

    #[test]
    fn gaps_respected() {
        let mut rng = sampling::stream(5, 1);
        let s = spectrum_with_gap(&mut rng, 5, 0.1, 10.0, 1e-3);
        assert!(s.windows(2).all(|w| w[1] - w[0] >= 1e-3));
    }
}
