//! Limited-independence hash families with a few-word seed.
//!
//! Every random entry of a sketching matrix is regenerated on demand from a
//! single 64-bit master seed, so the matrices are never stored:
//!
//! - [`SketchSeed::sign4`]: a 4-wise independent `{-1,+1}` family, realised
//!   as a degree-3 polynomial over the Mersenne prime field `2^61 - 1` whose
//!   low result bit picks the sign. Any four distinct indices evaluate to an
//!   exactly uniform 4-tuple of field elements, so the signs inherit 4-wise
//!   independence (up to the unavoidable `1/p` parity bias of an odd field).
//! - [`SketchSeed::bucket2`]: a pairwise independent multiply-shift bucket
//!   hash `(a*i + b) >> (64 - log2 k)` with odd `a`, for power-of-two `k`.
//!
//! Both coefficient sets are expanded deterministically from the master via
//! a splitmix-style generator, so a seed serialises as just 8 bytes.

use core::fmt;

/// Mersenne prime `2^61 - 1`, the field for the 4-wise polynomial family.
pub const MERSENNE_P: u64 = (1u64 << 61) - 1;

/// Errors from hash evaluation contract violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashError {
    /// Index is not a valid field element (`index >= 2^61 - 1`).
    IndexOutOfRange { index: u64 },
    /// Bucket count must be a power of two and at least one.
    BucketCountNotPowerOfTwo { k: u64 },
}

impl fmt::Display for HashError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HashError::IndexOutOfRange { index } => {
                write!(f, "hash index {index} is outside the field [0, 2^61 - 1)")
            }
            HashError::BucketCountNotPowerOfTwo { k } => {
                write!(f, "bucket count {k} is not a power of two")
            }
        }
    }
}

impl core::error::Error for HashError {}

/// Compact random state from which all sketching-matrix entries are
/// regenerated on demand.
///
/// Equal masters expand to equal coefficient sets, so two seeds with the
/// same master define byte-identical sketching matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchSeed {
    master: u64,
    /// Degree-3 polynomial coefficients over `F_{2^61-1}`, constant term first.
    poly: [u64; 4],
    /// Multiply-shift coefficient, forced odd.
    pair_a: u64,
    /// Multiply-shift offset.
    pair_b: u64,
}

impl SketchSeed {
    /// Expands the full coefficient set from a 64-bit master.
    pub fn from_master(master: u64) -> Self {
        let mut state = master;
        let mut poly = [0u64; 4];
        for c in poly.iter_mut() {
            *c = field_element(&mut state);
        }
        let pair_a = splitmix64(&mut state) | 1;
        let pair_b = splitmix64(&mut state);
        SketchSeed { master, poly, pair_a, pair_b }
    }

    /// The master word this seed was expanded from.
    pub fn master(&self) -> u64 {
        self.master
    }

    /// Little-endian serialisation of the master; the single byte of method
    /// tag that accompanies it in sketch files lives with the file format.
    pub fn to_bytes(&self) -> [u8; 8] {
        self.master.to_le_bytes()
    }

    /// Inverse of [`SketchSeed::to_bytes`].
    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        SketchSeed::from_master(u64::from_le_bytes(bytes))
    }

    /// 4-wise independent sign in `{-1, +1}` for `index`.
    ///
    /// Deterministic in `(seed, index)`. Over a random seed the family is
    /// 4-wise independent with `P(+1) = P(-1) = 1/2` up to a `2^-61` parity
    /// bias inherent to the odd field size.
    #[inline]
    pub fn sign4(&self, index: u64) -> Result<i8, HashError> {
        if index >= MERSENNE_P {
            return Err(HashError::IndexOutOfRange { index });
        }
        Ok(self.sign4_unchecked(index))
    }

    /// `sign4` without the range check; callers must have validated
    /// `index < 2^61 - 1`.
    #[inline]
    pub(crate) fn sign4_unchecked(&self, index: u64) -> i8 {
        // Horner over F_{2^61-1}: ((c3*x + c2)*x + c1)*x + c0.
        let x = index;
        let mut acc = self.poly[3];
        acc = add_mod61(mul_mod61(acc, x), self.poly[2]);
        acc = add_mod61(mul_mod61(acc, x), self.poly[1]);
        acc = add_mod61(mul_mod61(acc, x), self.poly[0]);
        if acc & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// Iterator-style evaluation of `sign4` over the consecutive run
    /// `start, start + 1, ...` via forward differences of the cubic: three
    /// modular additions per sign instead of three multiplications. The
    /// caller guarantees the run stays inside the field.
    pub(crate) fn sign_run(&self, start: u64) -> SignRun {
        let f = |x: u64| -> u64 {
            let mut acc = self.poly[3];
            acc = add_mod61(mul_mod61(acc, x), self.poly[2]);
            acc = add_mod61(mul_mod61(acc, x), self.poly[1]);
            add_mod61(mul_mod61(acc, x), self.poly[0])
        };
        // Degree-3 forward differences from four consecutive evaluations;
        // start + 3 may exceed the run's end, but polynomial identities mod
        // p hold for any in-field arguments, and x is reduced first.
        let x0 = start % MERSENNE_P;
        let x1 = (x0 + 1) % MERSENNE_P;
        let x2 = (x0 + 2) % MERSENNE_P;
        let x3 = (x0 + 3) % MERSENNE_P;
        let (f0, f1, f2, f3) = (f(x0), f(x1), f(x2), f(x3));
        let d1 = sub_mod61(f1, f0);
        let d2 = sub_mod61(add_mod61(f2, f0), add_mod61(f1, f1));
        let d3 = sub_mod61(
            add_mod61(f3, add_mod61(f1, add_mod61(f1, f1))),
            add_mod61(f0, add_mod61(f2, add_mod61(f2, f2))),
        );
        SignRun { value: f0, d1, d2, d3 }
    }

    /// Pairwise independent bucket in `[0, k)` for power-of-two `k`.
    #[inline]
    pub fn bucket2(&self, index: u64, k: u64) -> Result<u64, HashError> {
        if k == 0 || !k.is_power_of_two() {
            return Err(HashError::BucketCountNotPowerOfTwo { k });
        }
        Ok(self.bucket2_unchecked(index, k))
    }

    /// `bucket2` without the power-of-two check.
    #[inline]
    pub(crate) fn bucket2_unchecked(&self, index: u64, k: u64) -> u64 {
        let bits = k.trailing_zeros();
        if bits == 0 {
            return 0;
        }
        self.pair_a
            .wrapping_mul(index)
            .wrapping_add(self.pair_b)
            >> (64 - bits)
    }
}

/// Streaming signs over consecutive indices; see [`SketchSeed::sign_run`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct SignRun {
    value: u64,
    d1: u64,
    d2: u64,
    d3: u64,
}

impl SignRun {
    /// Sign at the current index, then advance.
    #[inline]
    pub(crate) fn next_sign(&mut self) -> f64 {
        let s = if self.value & 1 == 0 { 1.0 } else { -1.0 };
        self.value = add_mod61(self.value, self.d1);
        self.d1 = add_mod61(self.d1, self.d2);
        self.d2 = add_mod61(self.d2, self.d3);
        s
    }
}

/// Splitmix64 step: the standard 64-bit mixer used to fan a master word out
/// into independent-looking coefficient words.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform field element of `F_{2^61-1}` by rejection on the top value.
fn field_element(state: &mut u64) -> u64 {
    loop {
        let v = splitmix64(state) & MERSENNE_P;
        if v != MERSENNE_P {
            return v;
        }
    }
}

/// `a * b mod 2^61-1` via one 128-bit product and Mersenne folding.
#[inline]
fn mul_mod61(a: u64, b: u64) -> u64 {
    let prod = (a as u128) * (b as u128);
    let lo = (prod as u64) & MERSENNE_P;
    let hi = (prod >> 61) as u64;
    let mut s = lo + hi;
    if s >= MERSENNE_P {
        s -= MERSENNE_P;
    }
    if s >= MERSENNE_P {
        s -= MERSENNE_P;
    }
    s
}

#[inline]
fn add_mod61(a: u64, b: u64) -> u64 {
    let mut s = a + b;
    if s >= MERSENNE_P {
        s -= MERSENNE_P;
    }
    s
}

#[inline]
fn sub_mod61(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MERSENNE_P - b
    }
}
