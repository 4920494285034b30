//! Arbitrary-precision real and complex arithmetic helpers.
//!
//! Thin wrapper over `astro-float` that carries the working precision inside
//! each value, so that formula-heavy code can use ordinary operators. The
//! precision of a binary operation is the maximum of the operand precisions.
//!
//! Soundness-critical call sites (the bound ledger) use [`Real::nudge_up`] /
//! [`Real::nudge_down`] to round outward after computing with guard bits.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as IntSign};
use num_traits::Zero;

const RM: RoundingMode = RoundingMode::None;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Convert a decimal-digit count into a comfortable bit precision.
pub fn digits_to_bits(digits: usize) -> usize {
    // log2(10) = 3.3219...; round up to a word boundary with slack.
    ((digits * 3322) / 1000 + 64 + 63) / 64 * 64
}

#[derive(Clone, Debug)]
pub struct Real {
    x: BigFloat,
    prec: usize,
}

impl Real {
    pub fn zero(prec: usize) -> Self {
        Real { x: BigFloat::from_i8(0, prec), prec }
    }

    pub fn one(prec: usize) -> Self {
        Real { x: BigFloat::from_i8(1, prec), prec }
    }

    pub fn from_i64(v: i64, prec: usize) -> Self {
        Real { x: BigFloat::from_i64(v, prec), prec }
    }

    pub fn from_f64(v: f64, prec: usize) -> Self {
        Real { x: BigFloat::from_f64(v, prec), prec }
    }

    pub fn from_bigint(v: &BigInt, prec: usize) -> Self {
        let (sign, words) = to_words(v);
        if words.is_empty() {
            return Real::zero(prec);
        }
        let nbits = words.len() * 64;
        let x = BigFloat::from_words(&words, sign, nbits as i32);
        let mut r = Real { x, prec: nbits.max(prec) };
        r.set_prec(prec.max(64));
        r
    }

    /// Exact rational num/den rendered at the requested precision.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: usize) -> Self {
        let guard = prec + 64;
        let n = Real::from_bigint(num, guard);
        let d = Real::from_bigint(den, guard);
        let mut q = &n / &d;
        q.set_prec(prec);
        q
    }

    /// Parse a decimal literal such as `"2.79532"` or `"1e-6"`.
    pub fn parse(s: &str, prec: usize) -> Self {
        let x = CONSTS.with(|c| BigFloat::parse(s, Radix::Dec, prec, RM, &mut c.borrow_mut()));
        Real { x, prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn set_prec(&mut self, prec: usize) {
        self.x.set_precision(prec, RM).expect("set precision");
        self.prec = prec;
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        let mut r = self.clone();
        r.set_prec(prec);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.x.is_negative() && !self.x.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.x.is_positive() && !self.x.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real { x: self.x.abs(), prec: self.prec }
    }

    pub fn sqrt(&self) -> Self {
        Real { x: self.x.sqrt(self.prec, RM), prec: self.prec }
    }

    pub fn ln(&self) -> Self {
        let x = CONSTS.with(|c| self.x.ln(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn exp(&self) -> Self {
        let x = CONSTS.with(|c| self.x.exp(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn atan(&self) -> Self {
        let x = CONSTS.with(|c| self.x.atan(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn tan(&self) -> Self {
        let x = CONSTS.with(|c| self.x.tan(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn sin(&self) -> Self {
        let x = CONSTS.with(|c| self.x.sin(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn cos(&self) -> Self {
        let x = CONSTS.with(|c| self.x.cos(self.prec, RM, &mut c.borrow_mut()));
        Real { x, prec: self.prec }
    }

    pub fn pi(prec: usize) -> Self {
        let x = CONSTS.with(|c| c.borrow_mut().pi(prec, RM));
        Real { x, prec }
    }

    pub fn recip(&self) -> Self {
        &Real::one(self.prec) / self
    }

    /// Integer power by binary exponentiation.
    pub fn powi(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Real::one(self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// x^(num/den) for positive x via exp(ln).
    pub fn pow_ratio(&self, num: i64, den: u64) -> Self {
        assert!(self.is_positive(), "pow_ratio needs a positive base");
        let e = &(&self.ln() * &Real::from_i64(num, self.prec)) / &Real::from_i64(den as i64, self.prec);
        e.exp()
    }

    pub fn max(&self, other: &Real) -> Self {
        if self >= other { self.clone() } else { other.clone() }
    }

    pub fn min(&self, other: &Real) -> Self {
        if self <= other { self.clone() } else { other.clone() }
    }

    /// Relative bump toward +inf by `k` units in the last ~few places.
    pub fn nudge_up(&self, k: u32) -> Self {
        let eps = ulp_scale(self, k);
        self + &eps
    }

    /// Relative bump toward -inf.
    pub fn nudge_down(&self, k: u32) -> Self {
        let eps = ulp_scale(self, k);
        self - &eps
    }

    pub fn floor_bigint(&self) -> BigInt {
        bigfloat_to_bigint_floor(&self.x)
    }

    pub fn ceil_bigint(&self) -> BigInt {
        -bigfloat_to_bigint_floor(&self.x.clone().neg())
    }

    pub fn round_bigint(&self) -> BigInt {
        let half = Real::from_ratio(&BigInt::from(1), &BigInt::from(2), self.prec.max(64));
        (self + &half).floor_bigint()
    }

    pub fn to_f64(&self) -> f64 {
        match self.x.as_raw_parts() {
            None => f64::NAN,
            Some((words, n, sign, exp, _)) => {
                if words.iter().all(|&w| w == 0) {
                    return 0.0;
                }
                // value = 0.mantissa * 2^exp; take top 64 bits
                let top = *words.last().unwrap();
                let mut v = top as f64 / 2f64.powi(64) * 2f64.powi(exp);
                let _ = n;
                if sign == Sign::Neg {
                    v = -v;
                }
                v
            }
        }
    }

    pub fn raw(&self) -> &BigFloat {
        &self.x
    }
}

fn ulp_scale(r: &Real, k: u32) -> Real {
    let prec = r.prec;
    let mag = if r.is_zero() { Real::one(prec) } else { r.abs() };
    let two = Real::from_i64(2, prec);
    // 2^(k + 3 - prec) relative
    let shift = prec as i64 - k as i64 - 3;
    let scale = if shift >= 0 {
        two.powi(shift as u64).recip()
    } else {
        two.powi((-shift) as u64)
    };
    &mag * &scale
}

fn to_words(v: &BigInt) -> (Sign, Vec<u64>) {
    let (s, mag) = v.clone().into_parts();
    let sign = match s {
        IntSign::Minus => Sign::Neg,
        _ => Sign::Pos,
    };
    (sign, mag.to_u64_digits())
}

fn bigfloat_to_bigint_floor(x: &BigFloat) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let (words, n, sign, exp, _) = x.as_raw_parts().expect("finite value");
    // value = sign * (m / 2^n) * 2^exp with m the little-endian mantissa.
    let m = BigInt::from_bytes_le(
        num_bigint::Sign::Plus,
        &words.iter().flat_map(|w| w.to_le_bytes()).collect::<Vec<_>>(),
    );
    let shift = exp as i64 - n as i64;
    let mag = if shift >= 0 { &m << (shift as usize) } else { &m >> ((-shift) as usize) };
    let exact = shift >= 0 || {
        let back = &mag << ((-shift) as usize);
        back == m
    };
    match sign {
        Sign::Pos => mag,
        Sign::Neg => {
            if exact {
                -mag
            } else {
                -mag - 1
            }
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.x.cmp(&other.x) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.x.cmp(&other.x).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.x)
    }
}

macro_rules! real_binop {
    ($trait:ident, $meth:ident) => {
        impl $trait for &Real {
            type Output = Real;
            fn $meth(self, rhs: &Real) -> Real {
                let prec = self.prec.max(rhs.prec);
                Real { x: self.x.$meth(&rhs.x, prec, RM), prec }
            }
        }
        impl $trait for Real {
            type Output = Real;
            fn $meth(self, rhs: Real) -> Real {
                (&self).$meth(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $meth(self, rhs: &Real) -> Real {
                (&self).$meth(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $meth(self, rhs: Real) -> Real {
                self.$meth(&rhs)
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { x: self.x.clone().neg(), prec: self.prec }
    }
}

/// Complex number with [`Real`] components.
#[derive(Clone, Debug)]
pub struct Cx {
    pub re: Real,
    pub im: Real,
}

impl Cx {
    pub fn new(re: Real, im: Real) -> Self {
        Cx { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        let prec = re.prec();
        Cx { re, im: Real::zero(prec) }
    }

    pub fn zero(prec: usize) -> Self {
        Cx { re: Real::zero(prec), im: Real::zero(prec) }
    }

    pub fn prec(&self) -> usize {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, o: &Cx) -> Cx {
        Cx { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Cx) -> Cx {
        Cx { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        Cx {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn div(&self, o: &Cx) -> Cx {
        let d = o.abs2();
        let n = self.mul(&o.conj());
        Cx { re: &n.re / &d, im: &n.im / &d }
    }

    pub fn conj(&self) -> Cx {
        Cx { re: self.re.clone(), im: -&self.im }
    }

    pub fn neg(&self) -> Cx {
        Cx { re: -&self.re, im: -&self.im }
    }

    pub fn scale(&self, s: &Real) -> Cx {
        Cx { re: &self.re * s, im: &self.im * s }
    }

    pub fn abs2(&self) -> Real {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> Real {
        self.abs2().sqrt()
    }

    /// Principal square root (Re >= 0; on the branch cut Im >= 0).
    pub fn sqrt(&self) -> Cx {
        let prec = self.prec();
        if self.im.is_zero() {
            if !self.re.is_negative() {
                return Cx { re: self.re.sqrt(), im: Real::zero(prec) };
            }
            return Cx { re: Real::zero(prec), im: self.re.abs().sqrt() };
        }
        let r = self.abs();
        let two = Real::from_i64(2, prec);
        let re = (&(&r + &self.re) / &two).sqrt();
        let mut im = (&(&r - &self.re) / &two).sqrt();
        if self.im.is_negative() {
            im = -&im;
        }
        Cx { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
