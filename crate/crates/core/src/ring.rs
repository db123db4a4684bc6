//! Arithmetic in Z_q[X]/(X^256 + 1) with q = 64513.
//!
//! Mod-q values are kept in `[0, q)`. Centered representatives are only
//! produced inside norm computations. Since 512 divides q - 1 the ring splits
//! completely, so the forward NTT maps products to pointwise products.

use bytemuck::{Pod, Zeroable};

use crate::params::{N, Q};

const QI: i32 = Q;
const QU: u64 = Q as u64;

const fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    b %= QU;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % QU;
        }
        b = b * b % QU;
        e >>= 1;
    }
    r
}

const fn generator() -> u64 {
    // q - 1 = 2^10 * 3^2 * 7
    let mut g = 2;
    loop {
        if pow_mod(g, (QU - 1) / 2) != 1 && pow_mod(g, (QU - 1) / 3) != 1 && pow_mod(g, (QU - 1) / 7) != 1 {
            return g;
        }
        g += 1;
    }
}

/// Primitive 512th root of unity.
pub const PSI: u64 = pow_mod(generator(), (QU - 1) / (2 * N as u64));

const _: () = assert!(pow_mod(PSI, N as u64) == QU - 1);
const _: () = assert!(pow_mod(PSI, 2 * N as u64) == 1);

const fn bitrev8(x: usize) -> usize {
    let mut r = 0;
    let mut i = 0;
    while i < 8 {
        r |= ((x >> i) & 1) << (7 - i);
        i += 1;
    }
    r
}

/// Powers of [`PSI`] in bit-reversed order.
pub const ZETAS: [u32; N] = {
    let mut z = [0u32; N];
    let mut i = 0;
    while i < N {
        z[i] = pow_mod(PSI, bitrev8(i) as u64) as u32;
        i += 1;
    }
    z
};

const N_INV: u64 = pow_mod(N as u64, QU - 2);

#[inline]
pub fn mulq(a: i32, b: i32) -> i32 {
    ((a as u64 * b as u64) % QU) as i32
}

/// Reduces any signed value into `[0, q)`.
#[inline]
pub fn reduce(x: i64) -> i32 {
    x.rem_euclid(Q as i64) as i32
}

/// Centered representative of `x mod m` in `(-m/2, m/2]`.
#[inline]
pub fn center(x: i64, m: i64) -> i64 {
    let r = x.rem_euclid(m);
    if r > m / 2 {
        r - m
    } else {
        r
    }
}

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Pod, Zeroable)]
pub struct Poly {
    pub coeffs: [i32; N],
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Poly{:?}", &self.coeffs[..8])?;
        f.write_str("..")
    }
}

impl Poly {
    pub const fn zero() -> Self {
        Poly { coeffs: [0; N] }
    }

    /// The unit polynomial.
    pub fn one() -> Self {
        let mut p = Poly::zero();
        p.coeffs[0] = 1;
        p
    }

    pub fn from_fn(f: impl FnMut(usize) -> i32) -> Self {
        Poly { coeffs: std::array::from_fn(f) }
    }

    /// Reduces every coefficient into `[0, q)`.
    pub fn reduce(&mut self) {
        for c in self.coeffs.iter_mut() {
            *c = c.rem_euclid(QI);
        }
    }

    pub fn reduced(mut self) -> Self {
        self.reduce();
        self
    }

    pub fn add_assign_q(&mut self, other: &Poly) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = (*a + b) % QI;
        }
    }

    pub fn sub_assign_q(&mut self, other: &Poly) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = (*a - b).rem_euclid(QI);
        }
    }

    pub fn scale_q(&mut self, k: i32) {
        let k = k.rem_euclid(QI);
        for c in self.coeffs.iter_mut() {
            *c = mulq(*c, k);
        }
    }
}

/// Ordered vector of polynomials, used by the buffered paths.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PolyVec(pub Vec<Poly>);

impl PolyVec {
    pub fn zero(len: usize) -> Self {
        PolyVec(vec![Poly::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Poly> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for PolyVec {
    type Output = Poly;
    fn index(&self, i: usize) -> &Poly {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for PolyVec {
    fn index_mut(&mut self, i: usize) -> &mut Poly {
        &mut self.0[i]
    }
}

/// Forward NTT in place. Input in `[0, q)`, output in `[0, q)` in bit-reversed order.
pub fn ntt(p: &mut Poly) {
    let a = &mut p.coeffs;
    let mut k = 0;
    let mut len = N / 2;
    while len >= 1 {
        let mut start = 0;
        while start < N {
            k += 1;
            let z = ZETAS[k] as i32;
            for j in start..start + len {
                let t = mulq(z, a[j + len]);
                a[j + len] = (a[j] - t).rem_euclid(QI);
                a[j] = (a[j] + t) % QI;
            }
            start += 2 * len;
        }
        len >>= 1;
    }
}

/// Inverse NTT in place, including the 1/n scaling.
pub fn inv_ntt(p: &mut Poly) {
    let a = &mut p.coeffs;
    let mut k = N;
    let mut len = 1;
    while len < N {
        let mut start = 0;
        while start < N {
            k -= 1;
            let z = QI - ZETAS[k] as i32;
            for j in start..start + len {
                let t = a[j];
                a[j] = (t + a[j + len]) % QI;
                a[j + len] = mulq(z, (t - a[j + len]).rem_euclid(QI));
            }
            start += 2 * len;
        }
        len <<= 1;
    }
    for c in a.iter_mut() {
        *c = mulq(*c, N_INV as i32);
    }
}

/// `acc += a_hat ∘ b_hat` in the NTT domain.
pub fn pointwise_mul_acc(acc: &mut Poly, a_hat: &Poly, b_hat: &Poly) {
    for i in 0..N {
        acc.coeffs[i] = (acc.coeffs[i] + mulq(a_hat.coeffs[i], b_hat.coeffs[i])) % QI;
    }
}

/// `a ∘= b_hat` in the NTT domain.
pub fn pointwise_mul_assign(a: &mut Poly, b_hat: &Poly) {
    for i in 0..N {
        a.coeffs[i] = mulq(a.coeffs[i], b_hat.coeffs[i]);
    }
}

/// O(n^2) negacyclic product, reduced into `[0, q)`. Accepts any signed inputs.
pub fn schoolbook_negacyclic(a: &Poly, b: &Poly) -> Poly {
    let mut acc = [0i64; N];
    for i in 0..N {
        let ai = a.coeffs[i].rem_euclid(QI) as i64;
        for j in 0..N {
            let prod = ai * b.coeffs[j].rem_euclid(QI) as i64;
            if i + j < N {
                acc[i + j] += prod;
            } else {
                acc[i + j - N] -= prod;
            }
        }
        if i % 64 == 63 {
            for v in acc.iter_mut() {
                *v = v.rem_euclid(Q as i64);
            }
        }
    }
    Poly::from_fn(|i| reduce(acc[i]))
}

/// Lifts `t mod q` to the unique value in `[0, 2q)` with the given parity bits.
pub fn from_crt(t: &Poly, parity: &[u8; N / 8]) -> Poly {
    Poly::from_fn(|i| from_crt_coeff(t.coeffs[i], (parity[i / 8] >> (i % 8)) & 1))
}

#[inline]
pub fn from_crt_coeff(t: i32, bit: u8) -> i32 {
    if (t & 1) as u8 == bit {
        t
    } else {
        t + QI
    }
}

/// How coefficients are mapped before squaring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// Values are already signed integers.
    Signed,
    /// Centered mod q.
    ModQ,
    /// Centered mod 2q.
    Mod2Q,
}

/// `acc + Σ c_i²` over representatives chosen by `centering`.
pub fn l2_norm_sq_acc(acc: u64, p: &Poly, centering: Centering) -> u64 {
    let mut sum = acc;
    for &c in &p.coeffs {
        let v = match centering {
            Centering::Signed => c as i64,
            Centering::ModQ => center(c as i64, Q as i64),
            Centering::Mod2Q => center(c as i64, 2 * Q as i64),
        };
        let sq = (v * v) as u64;
        debug_assert!(sum.checked_add(sq).is_some(), "norm accumulator overflow");
        sum = sum.wrapping_add(sq);
    }
    sum
}
