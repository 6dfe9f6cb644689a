//! Radix-2 discrete Fourier transform on periodic grids.
//!
//! Forward transform is unnormalized, `X_k = sum_j x_j e^{-2 pi i jk/n}`;
//! the inverse carries the `1/n` factor. Lengths are restricted to powers of
//! two; experiments choose their grids accordingly.

use crate::error::{Error, Result};
use num_complex::Complex64;

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// In-place iterative Cooley-Tukey butterfly. `inverse` flips the twiddle
/// sign and applies the 1/n normalization.
pub fn fft_in_place(data: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = data.len();
    check_pow2(n)?;
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[i + k];
                let v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
    if inverse {
        let inv_n = 1.0 / n as f64;
        for d in data.iter_mut() {
            *d *= inv_n;
        }
    }
    Ok(())
}

/// Forward transform of a real vector.
pub fn dft(values: &[f64]) -> Result<Vec<Complex64>> {
    check_pow2(values.len())?;
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut data, false)?;
    Ok(data)
}

/// Inverse transform.
pub fn idft(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut data = coeffs.to_vec();
    fft_in_place(&mut data, true)?;
    Ok(data)
}

/// Inverse transform of a spectrum known to be conjugate-symmetric; the
/// imaginary residue is checked against `tol` times the result scale and
/// dropped.
pub fn idft_real(coeffs: &[Complex64], tol: f64) -> Result<Vec<f64>> {
    let data = idft(coeffs)?;
    let scale = data.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let max_imag = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if max_imag > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter(format!(
            "inverse transform is not real: imaginary residue {max_imag:.3e}"
        )));
    }
    Ok(data.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_has_flat_spectrum() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let spec = dft(&v).unwrap();
        for c in spec {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_hits_two_modes() {
        let n = 8;
        let v: Vec<f64> = (0..n)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let spec = dft(&v).unwrap();
        for (k, c) in spec.iter().enumerate() {
            let expected = if k == 1 || k == n - 1 { n as f64 / 2.0 } else { 0.0 };
            assert!(
                (c - Complex64::new(expected, 0.0)).norm() < 1e-12,
                "mode {k}: {c}"
            );
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(dft(&[0.0; 12]).is_err());
        assert!(dft(&[]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_and_parseval(exp in 2u32..9, seed in 0u64..200) {
            use rand::prelude::*;
            let n = 1usize << exp;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let spec = dft(&v).unwrap();
            let back = idft(&spec).unwrap();
            let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (a, b) in v.iter().zip(&back) {
                prop_assert!((a - b.re).abs() <= 1e-12 * scale);
                prop_assert!(b.im.abs() <= 1e-12 * scale);
            }
            // Parseval: sum |x|^2 = (1/n) sum |X|^2.
            let time: f64 = v.iter().map(|x| x * x).sum();
            let freq: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
            prop_assert!((time - freq).abs() <= 1e-10 * time.max(1.0));
        }
    }
}
