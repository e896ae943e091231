//! Numeric building blocks: deterministic compensated summation and
//! extended-precision fixed-point constants.

pub mod fixed;
pub mod kahan;

use num_complex::Complex64;

pub use fixed::{frac_dist_to_int, frac_mul_signed, frac_mul_u64, frac_to_f64, Fixed128, SignedFixed};
pub use kahan::{block_sum, harmonic, weighted_trace, Kahan, BLOCK_LEN};

/// `e(t) = exp(2 pi i t)` for a fractional phase given as Q0.128 bits.
pub fn unit_phase(frac: u128) -> Complex64 {
    let angle = std::f64::consts::TAU * frac_to_f64(frac);
    Complex64::new(angle.cos(), angle.sin())
}

/// `e(num/den)`, with exact values on the axes and at the sixth/eighth
/// roots so that rational character tables stay exactly real where they
/// should be.
pub fn root_of_unity(num: i64, den: u64) -> Complex64 {
    assert!(den > 0);
    let d = den as i64;
    let r = num.rem_euclid(d) as u64;
    let g = gcd(r.max(1), den);
    let (r, den) = if r == 0 { (0, 1) } else { (r / g, den / g) };
    if 24 % den == 0 {
        let idx = (r * (24 / den)) as usize;
        const C: [(f64, f64); 24] = {
            const H: f64 = 0.5;
            const R3: f64 = 0.8660254037844386; // sqrt(3)/2
            const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;
            const S15: f64 = 0.25881904510252074; // sin(pi/12)
            const C15: f64 = 0.9659258262890683; // cos(pi/12)
            [
                (1.0, 0.0),
                (C15, S15),
                (R3, H),
                (R2, R2),
                (H, R3),
                (S15, C15),
                (0.0, 1.0),
                (-S15, C15),
                (-H, R3),
                (-R2, R2),
                (-R3, H),
                (-C15, S15),
                (-1.0, 0.0),
                (-C15, -S15),
                (-R3, -H),
                (-R2, -R2),
                (-H, -R3),
                (-S15, -C15),
                (0.0, -1.0),
                (S15, -C15),
                (H, -R3),
                (R2, -R2),
                (R3, -H),
                (C15, -S15),
            ]
        };
        let (re, im) = C[idx];
        return Complex64::new(re, im);
    }
    let angle = std::f64::consts::TAU * (r as f64 / den as f64);
    Complex64::new(angle.cos(), angle.sin())
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
