//! Index combinatorics: interval sets, the division map and its remainder
//! sets, and the `A`/`B`/`T`/`S` vector family.
//!
//! Integer quantities are computed with exact rational arithmetic. Only the
//! amplitudes themselves are floating point.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{ceil_ratio, is_power_of_two, round_ratio, sawtooth_int, ComplexVec, Real};

/// Largest `M` accepted for simulation; keeps every exact product inside `u128`.
pub const MAX_SIMULATED_M: u64 = 1 << 40;

/// `(N, L, M)` with `N` odd and at least 3, `L >= 2` and `M >= L N` powers of two.
///
/// `M` a power of two and `N` odd give `gcd(M, N) = 1`, which the closed-form
/// amplitudes and the shift identity rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupParams {
    n: u64,
    l: u64,
    m: u64,
}

impl GroupParams {
    pub fn new(n: u64, l: u64, m: u64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("N = {n} must be odd and at least 3")));
        }
        if l < 2 || !is_power_of_two(l) {
            return Err(Error::InvalidParams(format!("L = {l} must be a power of two, at least 2")));
        }
        if !is_power_of_two(m) {
            return Err(Error::InvalidParams(format!("M = {m} must be a power of two")));
        }
        if m > MAX_SIMULATED_M {
            return Err(Error::InvalidParams(format!("M = {m} exceeds 2^40")));
        }
        if (m as u128) < (l as u128) * (n as u128) {
            return Err(Error::InvalidParams(format!("M = {m} must be at least L N = {}", l * n)));
        }
        Ok(Self { n, l, m })
    }

    /// Builds from exponents, `L = 2^l_exp`, `M = 2^m_exp`.
    pub fn from_exponents(n: u64, m_exp: u32, l_exp: u32) -> Result<Self> {
        if m_exp >= 63 || l_exp >= 63 {
            return Err(Error::InvalidParams(format!("exponents m = {m_exp}, l = {l_exp} too large")));
        }
        Self::new(n, 1 << l_exp, 1 << m_exp)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn m_exponent(&self) -> u32 {
        self.m.trailing_zeros()
    }

    pub fn l_exponent(&self) -> u32 {
        self.l.trailing_zeros()
    }
}

fn check_mn(m: u64, n: u64) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("N = {n} must be odd and at least 3")));
    }
    if !is_power_of_two(m) || m > MAX_SIMULATED_M {
        return Err(Error::InvalidParams(format!("M = {m} must be a power of two up to 2^40")));
    }
    if m < 2 * n {
        return Err(Error::InvalidParams(format!("M = {m} must be at least 2N = {}", 2 * n)));
    }
    Ok(())
}

fn check_index(index: u64, bound: u64) -> Result<()> {
    if index >= bound {
        return Err(Error::IndexOutOfRange { index, bound });
    }
    Ok(())
}

/// `i' = round(M i / N)` and `delta_i = i' - M i / N`.
pub fn nearest_index<T: Real>(i: u64, m: u64, n: u64) -> Result<(u64, T)> {
    check_index(i, n)?;
    let (mi, ni) = (m as i128, n as i128);
    let i_prime = round_ratio(mi * i as i128, ni);
    let delta_num = i_prime * ni - mi * i as i128;
    Ok((i_prime as u64, T::of(delta_num as f64) / T::of(n as f64)))
}

/// Half width `h` of every interval set: the integers `d` with
/// `|d| < M/2N - 1/2`, i.e. `2N|d| < M - N`.
pub fn interval_half_width(m: u64, n: u64) -> u64 {
    let gap = m as i128 - n as i128;
    if gap <= 0 {
        return 0;
    }
    (ceil_ratio(gap, 2 * n as i128) - 1).max(0) as u64
}

/// The residues mod `M` of the integers strictly inside
/// `(i' - M/2N + 1/2, i' + M/2N - 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalSet {
    center: u64,
    half_width: u64,
    modulus: u64,
}

impl IntervalSet {
    pub fn center(&self) -> u64 {
        self.center
    }

    pub fn half_width(&self) -> u64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: u64) -> bool {
        let d = k as i128 - self.center as i128;
        sawtooth_int(d, self.modulus as i128) <= self.half_width as i128
    }

    /// Residues in window order, from `i' - h` up to `i' + h` (mod `M`).
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let h = self.half_width as i128;
        let (c, m) = (self.center as i128, self.modulus as i128);
        (-h..=h).map(move |d| (c + d).rem_euclid(m) as u64)
    }

    /// Pairs `(offset, residue)` where `residue = i' + offset mod M`.
    pub fn offsets(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let h = self.half_width as i64;
        let (c, m) = (self.center as i64, self.modulus as i64);
        (-h..=h).map(move |d| (d, (c + d).rem_euclid(m) as u64))
    }

    pub fn to_sorted_vec(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.iter().collect();
        v.sort_unstable();
        v
    }
}

pub fn interval_set(i: u64, m: u64, n: u64) -> Result<IntervalSet> {
    check_index(i, n)?;
    if m < 2 * n {
        return Err(Error::InvalidParams(format!("M = {m} must be at least 2N")));
    }
    let (center, _) = nearest_index::<f64>(i, m, n)?;
    Ok(IntervalSet {
        center,
        half_width: interval_half_width(m, n),
        modulus: m,
    })
}

/// The division map `k -> (s, t)`: `k' = round(k N / M)`,
/// `t = k - round(k' M / N)`, `s = k' mod N`.
pub fn delta_map(k: u64, m: u64, n: u64) -> Result<(u64, i64)> {
    check_index(k, m)?;
    Ok(delta_unchecked(k, m, n))
}

fn delta_unchecked(k: u64, m: u64, n: u64) -> (u64, i64) {
    let (mi, ni, ki) = (m as i128, n as i128, k as i128);
    let k_prime = round_ratio(ki * ni, mi);
    let t = ki - round_ratio(k_prime * mi, ni);
    ((k_prime % ni) as u64, t as i64)
}

/// Outer half width `alpha = floor(M/2N + 1/2)`.
pub fn alpha(m: u64, n: u64) -> i64 {
    (m as i128 + n as i128).div_euclid(2 * n as i128) as i64
}

/// Guaranteed inner half width `beta = ceil(M/2N - 3/2)`.
pub fn beta(m: u64, n: u64) -> i64 {
    ceil_ratio(m as i128 - 3 * n as i128, 2 * n as i128) as i64
}

/// The closed integer interval `[-floor(M/2N - 1/2), floor(M/2N - 1/2)]`.
pub fn lambda_set(m: u64, n: u64) -> Vec<i64> {
    let r = (m as i128 - n as i128).div_euclid(2 * n as i128) as i64;
    (-r..=r).collect()
}

/// The division map tabulated for one `(M, N)`, with its remainder sets.
#[derive(Debug, Clone)]
pub struct DeltaDecomposition {
    m: u64,
    n: u64,
    alpha: i64,
    beta: i64,
    forward: Vec<(u32, i32)>,
    c_sets: Vec<Vec<i64>>,
    lambda: Vec<i64>,
}

impl DeltaDecomposition {
    pub fn build(m: u64, n: u64) -> Result<Self> {
        check_mn(m, n)?;
        if m > u32::MAX as u64 {
            return Err(Error::InvalidParams(format!("M = {m} too large to tabulate")));
        }
        let mut forward = Vec::with_capacity(m as usize);
        let mut c_sets = vec![Vec::new(); n as usize];
        for k in 0..m {
            let (s, t) = delta_unchecked(k, m, n);
            forward.push((s as u32, t as i32));
            c_sets[s as usize].push(t);
        }
        for c in &mut c_sets {
            c.sort_unstable();
        }
        Ok(Self {
            m,
            n,
            alpha: alpha(m, n),
            beta: beta(m, n),
            forward,
            c_sets,
            lambda: lambda_set(m, n),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    pub fn beta(&self) -> i64 {
        self.beta
    }

    /// Number of second-register values, `2 alpha + 1`.
    pub fn width(&self) -> usize {
        (2 * self.alpha + 1) as usize
    }

    pub fn forward(&self, k: u64) -> (u64, i64) {
        let (s, t) = self.forward[k as usize];
        (s as u64, t as i64)
    }

    /// Row-major cell `s * width + (t + alpha)` that `|k>` is sent to.
    pub fn cell(&self, k: u64) -> usize {
        let (s, t) = self.forward[k as usize];
        s as usize * self.width() + (t as i64 + self.alpha) as usize
    }

    pub fn c_set(&self, s: u64) -> &[i64] {
        &self.c_sets[s as usize]
    }

    pub fn c_sets(&self) -> &[Vec<i64>] {
        &self.c_sets
    }

    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    pub fn image_size(&self) -> usize {
        self.c_sets.iter().map(Vec::len).sum()
    }
}

/// `A^i_k` via the geometric series closed form.
///
/// With `x = k - M i / N`, `A^i_k = (LMN)^{-1/2} sum_{a < LN} w_M^{a x}`. The
/// sum is evaluated as `exp(i (LN-1) theta/2) sin(LN theta/2) / sin(theta/2)`
/// with `theta = 2 pi x / M` reduced exactly; when `w_M^x = 1` (only
/// `i = k = 0` under `gcd(M, N) = 1`) the value is `sqrt(LN / M)`.
pub fn a_coefficient<T: Real>(i: u64, k: u64, params: &GroupParams) -> Result<Complex<T>> {
    check_index(i, params.n)?;
    check_index(k, params.m)?;
    Ok(a_unchecked(i, k, params))
}

pub(crate) fn a_unchecked<T: Real>(i: u64, k: u64, params: &GroupParams) -> Complex<T> {
    let (n, l, m) = (params.n as u128, params.l as u128, params.m as u128);
    let nm = n * m;
    let ln = l * n;
    let norm = T::one() / T::of_u128(ln * m).sqrt();
    // r / (N M) = x / M mod 1
    let r = ((k as u128 * n) + nm - (m * i as u128) % nm) % nm;
    if r == 0 {
        return Complex::new(T::of_u128(ln) * norm, T::zero());
    }
    let pi = T::PI();
    let phase_num = ((ln - 1) * r) % (2 * nm);
    let phase = pi * T::of_u128(phase_num) / T::of_u128(nm);
    let top = pi * T::of_u128((l * r) % (2 * m)) / T::of_u128(m);
    let bottom = pi * T::of_u128(r) / T::of_u128(nm);
    let magnitude = top.sin() / bottom.sin() * norm;
    Complex::from_polar(magnitude, phase)
}

/// The dense vector `|A^i> = F_M F_{LN}^{-1} |L i>`.
pub fn a_vector<T: Real>(i: u64, params: &GroupParams) -> Result<ComplexVec<T>> {
    check_index(i, params.n)?;
    ComplexVec::new((0..params.m).map(|k| a_unchecked(i, k, params)).collect())
}

/// `A^i` together with its bump `B^i`, tail `T^i` and the shifted bump `S^i`.
#[derive(Debug, Clone)]
pub struct VectorFamily<T> {
    pub index: u64,
    pub interval: IntervalSet,
    pub a: ComplexVec<T>,
    pub b: ComplexVec<T>,
    pub t: ComplexVec<T>,
    pub s: ComplexVec<T>,
}

pub fn vector_family<T: Real>(i: u64, params: &GroupParams) -> Result<VectorFamily<T>> {
    let interval = interval_set(i, params.m, params.n)?;
    let a = a_vector::<T>(i, params)?;
    let dim = params.m as usize;
    let zero = Complex::new(T::zero(), T::zero());
    let mut b = vec![zero; dim];
    let mut t = a.clone().into_inner();
    for k in interval.iter() {
        b[k as usize] = a[k as usize];
        t[k as usize] = zero;
    }
    let mut s = vec![zero; dim];
    let h = interval.half_width() as i64;
    let m = params.m as i64;
    for d in -h..=h {
        let source = d.rem_euclid(m) as u64;
        let target = (interval.center() as i64 + d).rem_euclid(m) as usize;
        s[target] = a_unchecked(0, source, params);
    }
    Ok(VectorFamily {
        index: i,
        interval,
        a,
        b: ComplexVec::new(b)?,
        t: ComplexVec::new(t)?,
        s: ComplexVec::new(s)?,
    })
}
