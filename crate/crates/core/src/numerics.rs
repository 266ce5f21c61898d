//! Scalar and vector primitives shared by every other module.
//!
//! All rounding is "ties toward +infinity" (`floor(x + 1/2)`), including for
//! negative arguments. Integer-valued quantities that the algorithm compares
//! exactly (nearest indices, the division map, membership in interval sets)
//! go through the exact rational helpers [`round_ratio`] and
//! [`sawtooth_int`] rather than through floating point.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Index;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floating point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion used for integer indices and constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every supported scalar")
    }

    fn of_u128(x: u128) -> Self {
        Self::from_u128(x).expect("u128 converts to every supported scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("supported scalars convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Nearest integer with ties rounding up: `floor(x + 1/2)`.
pub fn round_half_up<T: Real>(x: T) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x.as_f64()));
    }
    let r = (x + T::of(0.5)).floor();
    r.to_i64().ok_or(Error::NonFinite(x.as_f64()))
}

/// Exact `round_half_up(num / den)` for integers, `den > 0`.
pub fn round_ratio(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    (2 * num + den).div_euclid(2 * den)
}

/// Exact `ceil(num / den)` for integers, `den > 0`.
pub fn ceil_ratio(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    -(-num).div_euclid(den)
}

/// Real remainder in `[0, m)`.
pub fn real_mod<T: Real>(x: T, m: T) -> T {
    let y = x - m * (x / m).floor();
    // floor can round such that y lands exactly on m
    if y >= m {
        y - m
    } else if y < T::zero() {
        T::zero()
    } else {
        y
    }
}

/// The sawtooth distance `|x|_M`: distance from `x` to the nearest multiple of `m`.
pub fn sawtooth_abs<T: Real>(x: T, m: u64) -> T {
    let modulus = T::of(m as f64);
    let y = real_mod(x, modulus);
    if y <= modulus / T::of(2.0) {
        y
    } else {
        real_mod(-x, modulus)
    }
}

/// Integer sawtooth distance, exact.
pub fn sawtooth_int(x: i128, m: i128) -> i128 {
    let y = x.rem_euclid(m);
    if 2 * y <= m {
        y
    } else {
        m - y
    }
}

/// `exp(2 pi i e / n)`.
pub fn root_power<T: Real>(n: u64, e: T) -> Complex<T> {
    let modulus = T::of(n as f64);
    let reduced = real_mod(e, modulus);
    Complex::from_polar(T::one(), T::TAU() * reduced / modulus)
}

/// `exp(2 pi i e / n)` for an integer exponent, reduced exactly before the
/// angle is formed.
pub fn root_power_int<T: Real>(n: u128, e: i128) -> Complex<T> {
    let reduced = e.rem_euclid(n as i128) as u128;
    Complex::from_polar(T::one(), T::TAU() * T::of_u128(reduced) / T::of_u128(n))
}

/// Seed for the deterministic random state generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// Per-item seed, independent of the order items are processed in.
    pub fn derive(self, index: u64) -> Seed {
        Seed(self.0 ^ splitmix64(index))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A dense complex vector. When used as a quantum state it is kept at unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexVec<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![Complex::new(T::zero(), T::zero()); dim])
    }

    /// The standard basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index: index as u64,
                bound: dim as u64,
            });
        }
        let mut v = Self::zeros(dim)?;
        v.entries[index] = Complex::new(T::one(), T::zero());
        Ok(v)
    }

    /// Vector with every entry equal to `1/sqrt(dim)`.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let a = T::one() / T::of(dim as f64).sqrt();
        Self::new(vec![Complex::new(a, T::zero()); dim])
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.entries
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.entries.iter()
    }

    pub fn norm_sqr(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_unit(&self, tol: T) -> bool {
        (self.norm() - T::one()).abs() <= tol
    }

    pub fn scale(&mut self, factor: T) {
        for z in &mut self.entries {
            *z = *z * factor;
        }
    }

    /// Unit vector in the same direction.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let mut out = self.clone();
        out.scale(T::one() / n);
        Ok(out)
    }

    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    /// Lossy conversion between scalar types.
    pub fn cast<U: Real>(&self) -> ComplexVec<U> {
        ComplexVec {
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(U::of(z.re.as_f64()), U::of(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T> Index<usize> for ComplexVec<T> {
    type Output = Complex<T>;

    fn index(&self, index: usize) -> &Complex<T> {
        &self.entries[index]
    }
}

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Euclidean norm of `a - b`.
pub fn l2_distance<T: Real>(a: &ComplexVec<T>, b: &ComplexVec<T>) -> Result<T> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<T>().sqrt())
}

/// Uniformly random point on the complex unit sphere of dimension `dim`.
///
/// Real and imaginary parts are standard normal draws from a ChaCha8 stream
/// keyed by `seed`; the result is then normalized.
pub fn random_unit_state<T: Real>(dim: usize, seed: Seed) -> Result<ComplexVec<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = seed.rng();
    loop {
        let entries: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        let v = ComplexVec { entries };
        // an all-zero draw has probability zero but would not normalize
        if let Ok(unit) = v.normalized() {
            return Ok(unit);
        }
    }
}

/// Random real unit vector (standard normal components, normalized).
pub fn random_real_unit<T: Real>(dim: usize, seed: Seed) -> Result<Vec<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = seed.rng();
    loop {
        let xs: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return Ok(xs.into_iter().map(|x| T::of(x / n)).collect());
        }
    }
}

pub fn is_power_of_two(n: u64) -> bool {
    n != 0 && n & (n - 1) == 0
}
