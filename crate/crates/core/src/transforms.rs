//! Unitary discrete Fourier transforms.
//!
//! The forward transform uses the `+2 pi i / n` exponent,
//! `(F v)_s = n^{-1/2} sum_i v_i w^{i s}` with `w = exp(2 pi i / n)`, and the
//! inverse conjugates it. Both directions carry the `1/sqrt(n)` factor.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{ComplexVec, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

impl TransformDirection {
    pub fn sign(self) -> i32 {
        match self {
            TransformDirection::Forward => 1,
            TransformDirection::Inverse => -1,
        }
    }
}

fn root_table<T: Real>(n: usize) -> Vec<Complex<T>> {
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / n as f64;
            Complex::new(T::of(theta.cos()), T::of(theta.sin()))
        })
        .collect()
}

/// Naive `O(n^2)` transform of any order. Exact reference for the FFT and for `F_N`.
pub fn dft<T: Real>(v: &ComplexVec<T>, dir: TransformDirection) -> ComplexVec<T> {
    let n = v.dim();
    let roots = root_table::<T>(n);
    let scale = T::one() / T::of(n as f64).sqrt();
    let input = v.as_slice();
    let out = (0..n)
        .map(|s| {
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut idx = 0usize;
            for x in input {
                let w = roots[idx];
                acc = acc
                    + x * match dir {
                        TransformDirection::Forward => w,
                        TransformDirection::Inverse => w.conj(),
                    };
                idx += s;
                if idx >= n {
                    idx -= n;
                }
            }
            acc * scale
        })
        .collect();
    ComplexVec::new(out).expect("dimension preserved")
}

/// Precomputed tables for an in-place iterative radix-2 transform of one size.
///
/// A plan is immutable once built and can be shared across threads.
#[derive(Debug, Clone)]
pub struct Radix2Plan<T> {
    len: usize,
    log_len: u32,
    twiddles: Vec<Complex<T>>,
}

impl<T: Real> Radix2Plan<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let mut twiddles = root_table::<T>(len);
        twiddles.truncate((len / 2).max(1));
        Ok(Self {
            len,
            log_len: len.trailing_zeros(),
            twiddles,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms `data` in place, including the `1/sqrt(len)` normalization.
    pub fn process(&self, data: &mut [Complex<T>], dir: TransformDirection) -> Result<()> {
        let n = self.len;
        if data.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: data.len(),
            });
        }
        if n == 1 {
            return Ok(());
        }
        let shift = usize::BITS - self.log_len;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if i < j {
                data.swap(i, j);
            }
        }
        let inverse = dir == TransformDirection::Inverse;
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for block in data.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[j * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = *b * w;
                    *b = *a - t;
                    *a = *a + t;
                }
            }
            len <<= 1;
        }
        let scale = T::one() / T::of(n as f64).sqrt();
        for z in data.iter_mut() {
            *z = *z * scale;
        }
        Ok(())
    }
}

/// Radix-2 FFT; same convention and normalization as [`dft`].
pub fn fft_pow2<T: Real>(v: &ComplexVec<T>, dir: TransformDirection) -> Result<ComplexVec<T>> {
    let plan = Radix2Plan::new(v.dim())?;
    let mut out = v.clone();
    plan.process(out.as_mut_slice(), dir)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_unit_state, Seed};

    fn max_diff(a: &ComplexVec<f64>, b: &ComplexVec<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dft_of_basis_zero_is_uniform() {
        let e0 = ComplexVec::<f64>::basis(3, 0).unwrap();
        let out = dft(&e0, TransformDirection::Forward);
        assert!(max_diff(&out, &ComplexVec::uniform(3).unwrap()) < 1e-15);
    }

    #[test]
    fn dft_of_uniform_is_basis_zero() {
        for n in [1, 2, 5, 13, 64] {
            let out = dft(&ComplexVec::<f64>::uniform(n).unwrap(), TransformDirection::Forward);
            assert!(max_diff(&out, &ComplexVec::basis(n, 0).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn dft_round_trip_dim_13() {
        let v: ComplexVec<f64> = random_unit_state(13, Seed(11)).unwrap();
        let back = dft(&dft(&v, TransformDirection::Forward), TransformDirection::Inverse);
        assert!(max_diff(&v, &back) < 1e-10);
    }

    #[test]
    fn fft_hadamard_case() {
        let e0 = ComplexVec::<f64>::basis(2, 0).unwrap();
        let out = fft_pow2(&e0, TransformDirection::Forward).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - Complex::new(h, 0.0)).norm() < 1e-15);
        assert!((out[1] - Complex::new(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fft_of_basis_zero_is_uniform() {
        for e in 0..12 {
            let n = 1 << e;
            let out = fft_pow2(&ComplexVec::<f64>::basis(n, 0).unwrap(), TransformDirection::Forward).unwrap();
            assert!(max_diff(&out, &ComplexVec::uniform(n).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn fft_matches_dft_dim_1024() {
        let v: ComplexVec<f64> = random_unit_state(1024, Seed(5)).unwrap();
        for dir in [TransformDirection::Forward, TransformDirection::Inverse] {
            let fast = fft_pow2(&v, dir).unwrap();
            let slow = dft(&v, dir);
            assert!(max_diff(&fast, &slow) < 1e-10);
        }
    }

    #[test]
    fn fft_rejects_non_power_of_two() {
        let v = ComplexVec::<f64>::uniform(12).unwrap();
        assert_eq!(fft_pow2(&v, TransformDirection::Forward), Err(Error::NotPowerOfTwo(12)));
    }

    #[test]
    fn delta_transforms_to_phase_ramp() {
        let n = 64usize;
        for a in [1usize, 7, 33] {
            let v = ComplexVec::<f64>::basis(n, a).unwrap();
            let out = fft_pow2(&v, TransformDirection::Forward).unwrap();
            for s in 0..n {
                let expected = crate::numerics::root_power_int::<f64>(n as u128, (a * s) as i128) / (n as f64).sqrt();
                assert!((out[s] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn f32_fft_tracks_f64() {
        let v: ComplexVec<f64> = random_unit_state(256, Seed(2)).unwrap();
        let lo = fft_pow2(&v.cast::<f32>(), TransformDirection::Forward).unwrap();
        let hi = fft_pow2(&v, TransformDirection::Forward).unwrap();
        assert!(max_diff(&lo.cast::<f64>(), &hi) < 1e-5);
    }
}
