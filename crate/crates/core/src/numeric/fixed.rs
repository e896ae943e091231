//! Fixed-point reals with 64 integer bits and 128 fractional bits.
//!
//! Floor values `[n*alpha]` and fractional parts `{n*alpha}` at n ~ 10^8
//! exceed what f64 can resolve, so irrational generator constants are kept
//! as exact binary fixed-point numbers parsed from long decimal literals.
//! The truncation error of a 50-digit literal is below 2^-128, which keeps
//! every floor computation exact for the badly-approximable constants used
//! here: a floor could only flip if the true fractional part were within
//! n * 2^-128 < 2^-94 of an integer, while e.g. {n*sqrt(2)} stays farther
//! than 1/(3n) > 2^-30 from integers for all n <= 10^8.

use crate::error::{Error, Result};

const FRAC_BITS: u32 = 128;

/// Nonnegative real, value = `int + frac / 2^128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed128 {
    int: u64,
    frac: u128,
}

/// Signed wrapper for offsets such as the Beatty intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedFixed {
    pub negative: bool,
    pub magnitude: Fixed128,
}

impl Fixed128 {
    pub const ZERO: Fixed128 = Fixed128 { int: 0, frac: 0 };
    pub const ONE: Fixed128 = Fixed128 { int: 1, frac: 0 };

    pub fn from_int(int: u64) -> Self {
        Fixed128 { int, frac: 0 }
    }

    pub fn from_parts(int: u64, frac: u128) -> Self {
        Fixed128 { int, frac }
    }

    pub fn int_part(&self) -> u64 {
        self.int
    }

    pub fn frac_bits(&self) -> u128 {
        self.frac
    }

    pub fn is_zero(&self) -> bool {
        self.int == 0 && self.frac == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.int as f64 + frac_to_f64(self.frac)
    }

    /// Parse a plain decimal literal like `"1.41421356..."` or a named
    /// constant (`sqrt2`, `sqrt3`, `sqrt5`, `pi`, `e`, `phi`).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(c) = named_constant(t) {
            return Ok(c);
        }
        parse_decimal(t)
    }

    /// `n * self` as `(integer part, fractional bits)`.
    ///
    /// The integer part is exact in u128; the fractional bits are the
    /// exact product bits truncated to 128.
    pub fn mul_u64(&self, n: u64) -> (u128, u128) {
        let (carry, frac) = frac_mul_u64(self.frac, n);
        let int = (self.int as u128) * (n as u128) + carry as u128;
        (int, frac)
    }

    /// `floor(n * self)` with a 64-bit range check.
    pub fn floor_mul(&self, n: u64) -> Result<u64> {
        let (int, _) = self.mul_u64(n);
        u64::try_from(int)
            .map_err(|_| Error::overflow(format!("floor({n} * {}) exceeds u64", self.to_f64())))
    }

    /// Fractional bits of `n * self`.
    pub fn frac_mul(&self, n: u64) -> u128 {
        self.mul_u64(n).1
    }
}

impl std::ops::Add for Fixed128 {
    type Output = Fixed128;
    fn add(self, rhs: Fixed128) -> Fixed128 {
        let (frac, carry) = self.frac.overflowing_add(rhs.frac);
        Fixed128 { int: self.int + rhs.int + carry as u64, frac }
    }
}

impl std::fmt::Display for Fixed128 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.15}", self.to_f64())
    }
}

impl SignedFixed {
    pub const ZERO: SignedFixed = SignedFixed { negative: false, magnitude: Fixed128::ZERO };

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix('-') {
            Ok(SignedFixed { negative: true, magnitude: Fixed128::parse(rest)? })
        } else {
            Ok(SignedFixed { negative: false, magnitude: Fixed128::parse(t)? })
        }
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.magnitude.to_f64();
        if self.negative {
            -m
        } else {
            m
        }
    }
}

/// Fractional bits of a u128 fraction as f64 in [0, 1).
pub fn frac_to_f64(frac: u128) -> f64 {
    frac as f64 * 2f64.powi(-(FRAC_BITS as i32))
}

/// `n * frac` where `frac` is a Q0.128 fraction: returns
/// `(integer carry, fractional bits)` exactly.
pub fn frac_mul_u64(frac: u128, n: u64) -> (u64, u128) {
    let mask = (1u128 << 64) - 1;
    let hi = frac >> 64;
    let lo = frac & mask;
    let a = (n as u128) * hi; // < 2^128 - 2^65, room for the carry below
    let b = (n as u128) * lo;
    let c = a + (b >> 64);
    let carry = (c >> 64) as u64;
    let new_frac = ((c & mask) << 64) | (b & mask);
    (carry, new_frac)
}

/// Fractional part of `k * frac` for signed k.
pub fn frac_mul_signed(frac: u128, k: i64) -> u128 {
    let (_, f) = frac_mul_u64(frac, k.unsigned_abs());
    if k < 0 && f != 0 {
        f.wrapping_neg()
    } else {
        f
    }
}

/// Distance of a Q0.128 fraction to the nearest integer, in [0, 1/2].
pub fn frac_dist_to_int(frac: u128) -> f64 {
    let half = 1u128 << 127;
    if frac <= half {
        frac_to_f64(frac)
    } else {
        frac_to_f64(frac.wrapping_neg())
    }
}

fn parse_decimal(t: &str) -> Result<Fixed128> {
    if t.is_empty() {
        return Err(Error::parse("empty numeric literal"));
    }
    let (int_str, frac_str) = match t.split_once('.') {
        Some((a, b)) => (a, b),
        None => (t, ""),
    };
    if !int_str.chars().all(|c| c.is_ascii_digit()) || !frac_str.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::parse(format!("invalid numeric literal `{t}`")));
    }
    let int: u64 = if int_str.is_empty() {
        0
    } else {
        int_str
            .parse()
            .map_err(|_| Error::parse(format!("integer part of `{t}` exceeds u64")))?
    };
    // Binary expansion of the decimal fraction: double the digit vector
    // 128 times, shifting each overflow carry in as the next bit.
    let mut digits: Vec<u8> = frac_str.bytes().map(|b| b - b'0').collect();
    let mut frac = 0u128;
    for _ in 0..FRAC_BITS {
        let mut carry = 0u8;
        for d in digits.iter_mut().rev() {
            let v = *d * 2 + carry;
            *d = v % 10;
            carry = v / 10;
        }
        frac = (frac << 1) | carry as u128;
    }
    Ok(Fixed128 { int, frac })
}

fn named_constant(name: &str) -> Option<Fixed128> {
    let digits = match name {
        "sqrt2" => "1.41421356237309504880168872420969807856967187537694",
        "sqrt3" => "1.73205080756887729352744634150587236694280525381038",
        "sqrt5" => "2.23606797749978969640917366873127623544061835961152",
        "pi" => "3.14159265358979323846264338327950288419716939937510",
        "e" => "2.71828182845904523536028747135266249775724709369995",
        "phi" | "golden" => "1.61803398874989484820458683436563811772030917980576",
        _ => return None,
    };
    Some(parse_decimal(digits).expect("builtin constant literal"))
}
