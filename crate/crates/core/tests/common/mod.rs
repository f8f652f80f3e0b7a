//! Extended-precision reference values for the Riccati-Bessel functions.
//!
//! ψ_n(z) = z^{n+1} Σ_k (−z²/2)^k / (k! (2n+2k+1)!!), summed in binary fixed
//! point with enough guard bits to absorb the e^{|z|} cancellation of the
//! alternating series. The argument is an exact decimal p/q + i r/q.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug)]
pub struct ExactArg {
    pub re: i64,
    pub im: i64,
    pub den: i64,
}

impl ExactArg {
    pub const fn new(re: i64, im: i64, den: i64) -> Self {
        Self { re, im, den }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(
            self.re as f64 / self.den as f64,
            self.im as f64 / self.den as f64,
        )
    }

    fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

#[derive(Clone, Debug)]
struct BigComplex {
    re: BigInt,
    im: BigInt,
}

impl BigComplex {
    fn mul(&self, o: &BigComplex) -> BigComplex {
        BigComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div_int(&self, d: &BigInt) -> BigComplex {
        BigComplex {
            re: &self.re / d,
            im: &self.im / d,
        }
    }

    fn is_negligible(&self, bits: u64) -> bool {
        self.re.bits() < bits && self.im.bits() < bits
    }
}

fn to_f64(v: &BigInt, frac_bits: u64) -> f64 {
    // Keep ~120 significant bits before converting.
    let keep = 120i64;
    let excess = v.bits() as i64 - keep;
    if excess > 0 {
        let shifted: BigInt = v >> excess as usize;
        shifted.to_f64().unwrap() * 2f64.powi((excess - frac_bits as i64) as i32)
    } else {
        v.to_f64().unwrap() * 2f64.powi(-(frac_bits as i32))
    }
}

/// ψ_n(z) to full double precision.
pub fn psi(n: usize, z: ExactArg) -> Complex64 {
    let magnitude_bits = (z.modulus() * std::f64::consts::LOG2_E) as u64 + 64;
    let frac: u64 = magnitude_bits + 256;
    let den = BigInt::from(z.den);
    let zc = BigComplex {
        re: BigInt::from(z.re),
        im: BigInt::from(z.im),
    };

    // t_0 = z^{n+1} / (2n+1)!! · 2^frac
    let mut num = BigComplex {
        re: BigInt::one(),
        im: BigInt::zero(),
    };
    for _ in 0..=n {
        num = num.mul(&zc);
    }
    let mut dfact = BigInt::one();
    for j in (1..=2 * n + 1).step_by(2) {
        dfact *= j;
    }
    let scale = den.pow((n + 1) as u32) * &dfact;
    let shifted = BigComplex {
        re: num.re << frac as usize,
        im: num.im << frac as usize,
    };
    let mut term = shifted.div_int(&scale);

    // t_{k+1} = t_k · (−z²) / (2 (k+1) (2n+2k+3)), with z² = zz/den².
    let zz = zc.mul(&zc);
    let minus_zz = BigComplex {
        re: -zz.re,
        im: -zz.im,
    };
    let den2 = &den * &den;
    let mut sum = term.clone();
    let mut k = 0usize;
    loop {
        let d = BigInt::from(2 * (k + 1) * (2 * n + 2 * k + 3)) * &den2;
        term = term.mul(&minus_zz).div_int(&d);
        sum.re += &term.re;
        sum.im += &term.im;
        k += 1;
        if term.is_negligible(8) && (k as f64) > z.modulus() {
            break;
        }
        assert!(k < 100_000, "series failed to converge");
    }
    Complex64::new(to_f64(&sum.re, frac), to_f64(&sum.im, frac))
}

/// D_n(z) = ψ_{n−1}/ψ_n − n/z.
pub fn log_derivative(n: usize, z: ExactArg) -> Complex64 {
    psi(n - 1, z) / psi(n, z) - n as f64 / z.value()
}
