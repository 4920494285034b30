//! Naive and canonical (Néron-Tate) heights, the regulator matrix with its
//! least eigenvalue, and the height-difference constant.
//!
//! The canonical height is computed from the dynamical Green's functions of
//! the x-coordinate duplication pair
//!   Phi(A, B) = A^4 - 2a A^2 B^2 - 8b A B^3 + a^2 B^4,
//!   Psi(A, B) = 4B (A^3 + a A B^2 + b B^3),
//! summing one archimedean series in floating point and one q-adic series
//! per prime dividing 2 * (4a^3 + 27b^2).  This decomposition needs no
//! minimal model, so heights stay correct on models that are non-minimal at
//! small primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::curve::{factorize, point_order_at_most, Curve, RationalPoint};
use crate::error::{Error, Result};
use crate::real::Real;

/// Cached per-curve data for height computations.
pub struct HeightContext {
    pub curve: Curve,
    /// Primes dividing 2 * delta0; only these can contribute finite Green terms.
    pub bad_primes: Vec<BigInt>,
    pub prec: usize,
}

impl HeightContext {
    pub fn new(curve: &Curve, prec: usize) -> Self {
        let mut bad_primes = vec![BigInt::from(2)];
        for (p, _) in factorize(&curve.delta0) {
            if !bad_primes.contains(&p) {
                bad_primes.push(p);
            }
        }
        HeightContext { curve: curve.clone(), bad_primes, prec }
    }
}

/// Naive (Weil) height h(P) = log max{|xi|, zeta^2}.
///
/// This is the normalization with hhat(P) = lim h(2^n P)/4^n and without the
/// extra factor 1/2; the regulator and lambda below follow the same choice.
pub fn naive_height(p: &RationalPoint, prec: usize) -> Real {
    match p {
        RationalPoint::Identity => Real::zero(prec),
        RationalPoint::Affine { xi, zeta, .. } => {
            let m = xi.abs().max(zeta * zeta);
            if m.is_one() {
                return Real::zero(prec);
            }
            Real::from_bigint(&m, prec).ln()
        }
    }
}

fn duplication_pair_int(a: &BigInt, b: &BigInt, x: &BigInt, z: &BigInt) -> (BigInt, BigInt) {
    let x2 = x * x;
    let z2 = z * z;
    let phi = &x2 * &x2 - BigInt::from(2) * a * &x2 * &z2 - BigInt::from(8) * b * x * (&z2 * z)
        + a * a * &z2 * &z2;
    let psi = BigInt::from(4) * z * (&x2 * x + a * x * &z2 + b * &z2 * z);
    (phi, psi)
}

/// Archimedean Green series: iterate the normalized duplication on the unit
/// box and sum the scale defects with weight 4^-(n+1).
fn green_infinity(curve: &Curve, x0: &BigInt, z0: &BigInt, prec: usize) -> Real {
    let a = Real::from_bigint(&curve.a, prec);
    let b = Real::from_bigint(&curve.b, prec);
    let two = Real::from_i64(2, prec);
    let four = Real::from_i64(4, prec);
    let eight = Real::from_i64(8, prec);

    let mut x = Real::from_bigint(x0, prec);
    let mut z = Real::from_bigint(z0, prec);
    let m0 = x.abs().max(&z.abs());
    x = &x / &m0;
    z = &z / &m0;

    let steps = prec / 2 + 8;
    let mut acc = Real::zero(prec);
    let mut weight = Real::from_ratio(&BigInt::one(), &BigInt::from(4), prec);
    let quarter = weight.clone();
    for _ in 0..steps {
        let x2 = &x * &x;
        let z2 = &z * &z;
        let phi = &(&x2 * &x2) - &(&(&(&two * &a) * &x2) * &z2)
            - &(&(&(&eight * &b) * &x) * &(&z2 * &z))
            + &(&(&a * &a) * &(&z2 * &z2));
        let psi = &(&four * &z) * &(&(&(&x2 * &x) + &(&(&a * &x) * &z2)) + &(&b * &(&z2 * &z)));
        let m = phi.abs().max(&psi.abs());
        acc = &acc + &(&weight * &m.ln());
        weight = &weight * &quarter;
        x = &phi / &m;
        z = &psi / &m;
    }
    acc
}

/// q-adic Green series for one prime p | 2*delta0: the summed valuations of
/// gcd(Phi, Psi) along the duplication orbit, tracked modulo p^K.
fn green_p(curve: &Curve, x0: &BigInt, z0: &BigInt, p: &BigInt, prec: usize) -> Result<Real> {
    let steps = prec.max(64) / 3 + 10;
    // generous working modulus; per-step loss is bounded by v_p of the
    // resultant of the duplication pair
    let mut cap_per_step = 8u32 + 2 * int_val(&curve.delta0, p) as u32;
    loop {
        let k = steps as u32 * cap_per_step + 64;
        match green_p_at_precision(curve, x0, z0, p, steps, k, prec) {
            Ok(v) => return Ok(v),
            Err(Error::PrecisionExhausted(_)) if cap_per_step < 1 << 16 => {
                cap_per_step *= 4;
            }
            Err(e) => return Err(e),
        }
    }
}

fn int_val(n: &BigInt, p: &BigInt) -> i64 {
    crate::curve::int_valuation(n, p)
}

fn green_p_at_precision(
    curve: &Curve,
    x0: &BigInt,
    z0: &BigInt,
    p: &BigInt,
    steps: usize,
    k: u32,
    prec: usize,
) -> Result<Real> {
    let modulus = p.pow(k);
    let mut x = x0.mod_floor(&modulus);
    let mut z = z0.mod_floor(&modulus);
    let mut budget = k as i64; // remaining trustworthy p-adic digits
    // numerator of sum_{n<steps} v_n 4^{steps-1-n}; denominator 4^steps
    let mut num = BigInt::zero();
    for _ in 0..steps {
        num *= 4;
        let (phi, psi) = duplication_pair_int(&curve.a, &curve.b, &x, &z);
        let phi = phi.mod_floor(&modulus);
        let psi = psi.mod_floor(&modulus);
        let vphi = if phi.is_zero() { budget } else { int_val(&phi, p) };
        let vpsi = if psi.is_zero() { budget } else { int_val(&psi, p) };
        let v = vphi.min(vpsi);
        budget -= v;
        if budget < 8 {
            return Err(Error::PrecisionExhausted(format!(
                "q-adic Green series at p = {p} ran out of digits"
            )));
        }
        num += v;
        let pv = p.pow(v as u32);
        x = (&phi / &pv).mod_floor(&modulus);
        z = (&psi / &pv).mod_floor(&modulus);
    }
    let den = BigInt::from(4).pow(steps as u32);
    let lnp = Real::from_bigint(p, prec).ln();
    Ok(Real::from_ratio(&num, &den, prec) * lnp)
}

/// Canonical height via the Green-function decomposition.
pub fn canonical_height(ctx: &HeightContext, p: &RationalPoint) -> Result<Real> {
    let prec = ctx.prec;
    match p {
        RationalPoint::Identity => Ok(Real::zero(prec)),
        RationalPoint::Affine { xi, zeta, .. } => {
            if !ctx.curve.contains(p) {
                return Err(Error::PointNotOnCurve);
            }
            if point_order_at_most(p, &ctx.curve, 12).is_some() {
                return Ok(Real::zero(prec));
            }
            let x0 = xi.clone();
            let z0 = zeta * zeta; // coprime to xi by reduced form
            let h0 = {
                let m = x0.abs().max(z0.abs());
                Real::from_bigint(&m, prec).ln()
            };
            let mut total = h0 + green_infinity(&ctx.curve, &x0, &z0, prec);
            for q in &ctx.bad_primes {
                total = &total - &green_p(&ctx.curve, &x0, &z0, q, prec)?;
            }
            Ok(total)
        }
    }
}

/// Bilinear height pairing <P, Q> = (h(P+Q) - h(P) - h(Q)) / 2.
pub fn height_pairing(ctx: &HeightContext, p: &RationalPoint, q: &RationalPoint) -> Result<Real> {
    let sum = crate::curve::add(p, q, &ctx.curve);
    let hs = canonical_height(ctx, &sum)?;
    let hp = canonical_height(ctx, p)?;
    let hq = canonical_height(ctx, q)?;
    let half = Real::from_ratio(&BigInt::one(), &BigInt::from(2), ctx.prec);
    Ok((&(&hs - &hp) - &hq) * half)
}

/// The r x r regulator (Gram) matrix of the basis under the height pairing.
pub fn gram_matrix(ctx: &HeightContext, basis: &[RationalPoint]) -> Result<Vec<Vec<Real>>> {
    let r = basis.len();
    let mut m = vec![vec![Real::zero(ctx.prec); r]; r];
    for i in 0..r {
        m[i][i] = canonical_height(ctx, &basis[i])?;
        for j in 0..i {
            let v = height_pairing(ctx, &basis[i], &basis[j])?;
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// Pivots of the LDL^T decomposition, or None when a pivot is not positive.
fn ldl_pivots(m: &[Vec<Real>], shift: &Real, prec: usize) -> Option<Vec<Real>> {
    let r = m.len();
    let mut a: Vec<Vec<Real>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| if i == j { v - shift } else { v.clone() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::with_capacity(r);
    for k in 0..r {
        let d = a[k][k].clone();
        if d.to_f64() <= 0.0 {
            return None;
        }
        for i in (k + 1)..r {
            let f = &a[i][k] / &d;
            for j in (k + 1)..r {
                let upd = &a[i][j] - &(&f * &a[k][j]);
                a[i][j] = upd;
            }
        }
        pivots.push(d);
    }
    let _ = prec;
    Some(pivots)
}

/// Regulator R = det(Gram) and a certified-down least eigenvalue lambda.
///
/// lambda is located by bisection on t using the Sylvester criterion:
/// Gram - tI is positive definite iff all LDL^T pivots are positive.
pub fn regulator_and_lambda(gram: &[Vec<Real>], prec: usize) -> Result<(Real, Real)> {
    let r = gram.len();
    if r == 0 {
        return Err(Error::NotIndependent);
    }
    let pivots = ldl_pivots(gram, &Real::zero(prec), prec).ok_or(Error::NotIndependent)?;
    let mut reg = Real::one(prec);
    for d in &pivots {
        reg = &reg * d;
    }
    // lambda_min <= min diagonal entry
    let mut hi = gram[0][0].clone();
    for i in 1..r {
        hi = hi.min(&gram[i][i]);
    }
    let mut lo = Real::zero(prec);
    let iterations = (prec / 2).max(64);
    let half = Real::from_ratio(&BigInt::one(), &BigInt::from(2), prec);
    for _ in 0..iterations {
        let mid = (&lo + &hi) * half.clone();
        if ldl_pivots(gram, &mid, prec).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo.to_f64() <= 0.0 {
        return Err(Error::NotIndependent);
    }
    Ok((reg, lo))
}

/// Height-difference constant c2 with h(P) >= hhat(P) - c2 on E(Q):
/// c2 = (1/2)(log 2 + mu_infinity), mu_infinity = log max{(2|a|)^(1/2), (4|b|)^(1/3)}
/// (Silverman-style bound for the short Weierstrass model).
pub fn height_difference_c2(curve: &Curve, prec: usize) -> Real {
    let two_a = Real::from_bigint(&(BigInt::from(2) * curve.a.abs()), prec);
    let four_b = Real::from_bigint(&(BigInt::from(4) * curve.b.abs()), prec);
    let half = Real::from_ratio(&BigInt::one(), &BigInt::from(2), prec);
    let third = Real::from_ratio(&BigInt::one(), &BigInt::from(3), prec);
    let t1 = if two_a.to_f64() > 1.0 { two_a.ln() * half.clone() } else { Real::zero(prec) };
    let t2 = if four_b.to_f64() > 1.0 { four_b.ln() * third } else { Real::zero(prec) };
    let mu = t1.max(&t2);
    (Real::from_i64(2, prec).ln() + mu) * half
}
