//! The explicit constants of the height-bound theorem and the derived
//! initial coefficient bounds N0 (and the alternative N0', N1 for s = 1),
//! plus the thresholds steering the final direct search.
//!
//! All upper bounds are rounded outward (up) after evaluation with guard
//! precision, and lower bounds down, so the stored ledger values remain
//! sound under recomputation at higher precision.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::curve::{Curve, PlaceSet};
use crate::ellog::cubic_roots;
use crate::real::Real;

/// Guard bits used before the outward rounding of each stored constant.
const GUARD: u32 = 16;

/// Every named constant of the run, with the derived bounds.
#[derive(Clone, Debug)]
pub struct BoundLedger {
    pub c1: Real,
    pub c1_prime: Option<Real>,
    pub c2: Real,
    pub c3: Real,
    pub c4: Real,
    pub c5_real: Real,
    pub c8: Real,
    pub c9: Real,
    pub lambda: Real,
    pub n0: Real,
    pub n0_prime: Option<Real>,
    pub x0: Real,
    pub m_shift: Real,
    pub mu_inf_exp: Real,
    pub cutoff: Real,
    pub alpha_bounds: Vec<(u64, u32)>,
}

fn real_pow(base: &Real, exp: &Real) -> Real {
    (&base.ln() * exp).exp()
}

fn ratio(num: i64, den: i64, prec: usize) -> Real {
    Real::from_ratio(&BigInt::from(num), &BigInt::from(den), prec)
}

/// c3 = 32/3 sqrt|D0| (8 + 1/2 log|D0|)^4 and
/// c4 = 10^4 max{16 a^2, 256 sqrt|D0|^3}, for the discriminant input D0.
pub fn hh_c3_c4(delta0: &BigInt, a: &BigInt, prec: usize) -> (Real, Real) {
    let wp = prec + 64;
    let d = Real::from_bigint(&delta0.abs(), wp);
    let sqrt_d = d.sqrt();
    let eight = Real::from_i64(8, wp);
    let half = ratio(1, 2, wp);
    let base = &eight + &(&half * &d.ln());
    let c3 = &(&ratio(32, 3, wp) * &sqrt_d) * &base.powi(4);
    let a2 = Real::from_bigint(&(a * a), wp);
    let term1 = &Real::from_i64(16, wp) * &a2;
    let term2 = &Real::from_i64(256, wp) * &(&d * &sqrt_d);
    let c4 = &Real::from_i64(10_000, wp) * &term1.max(&term2);
    (c3.with_prec(prec).nudge_up(GUARD), c4.with_prec(prec).nudge_up(GUARD))
}

/// The full Baker-type height bound
/// c1 = 7*10^(38s+49) s^(20s+15) Q^24 (log* Q)^(4s-2)
///      c3 (log c3)^2 (c3 + 20(s-1) c3 + log(e c4)),
/// with log* Q = max{log Q, 1} and Q the largest finite place (1 when S is
/// archimedean only), together with the s = 1 alternative
/// c1' = 5*10^64 c3 log c3 (c3 + log c4).
pub fn hajdu_herendi_constants(
    delta0: &BigInt,
    a: &BigInt,
    places: &PlaceSet,
    prec: usize,
) -> (Real, Real, Real, Real) {
    let wp = prec + 64;
    let (c3, c4) = hh_c3_c4(delta0, a, wp);
    let s = places.s as i64;
    let q = places.q_max.unwrap_or(1);
    let ten = Real::from_i64(10, wp);
    let mut c1 = &Real::from_i64(7, wp) * &ten.powi((38 * s + 49) as u64);
    c1 = &c1 * &Real::from_i64(s, wp).powi((20 * s + 15) as u64);
    let qr = Real::from_i64(q as i64, wp);
    c1 = &c1 * &qr.powi(24);
    let log_star_q = qr.ln().max(&Real::one(wp));
    c1 = &c1 * &log_star_q.powi((4 * s - 2) as u64);
    let log_c3 = c3.ln();
    c1 = &c1 * &(&c3 * &(&log_c3 * &log_c3));
    let log_ec4 = &Real::one(wp) + &c4.ln();
    let last = &(&c3 + &(&Real::from_i64(20 * (s - 1), wp) * &c3)) + &log_ec4;
    c1 = &c1 * &last;
    let c1_prime = {
        let base = &Real::from_i64(5, wp) * &ten.powi(64);
        let factor = &c3 + &c4.ln();
        &(&(&base * &c3) * &log_c3) * &factor
    };
    (
        c3.with_prec(prec).nudge_up(GUARD),
        c4.with_prec(prec).nudge_up(GUARD),
        c1.with_prec(prec).nudge_up(GUARD),
        c1_prime.with_prec(prec).nudge_up(GUARD),
    )
}

/// N0 = sqrt((c1/2 + c2)/lambda), rounded up.
pub fn bound_n0(c1: &Real, c2: &Real, lambda: &Real) -> Real {
    let half = ratio(1, 2, c1.prec());
    let num = &(&half * c1) + c2;
    (&num / lambda).sqrt().nudge_up(GUARD)
}

/// Inputs of the alternative David-type bound N1 (s = 1 only).
#[derive(Clone, Debug)]
pub struct DavidBoundInputs {
    pub r: usize,
    pub c6: Real,
    pub c7: Real,
    pub c_david: Real,
    pub h_j: Real,
    pub log_v: Vec<Real>,
}

/// Assemble c6, c7, C and h from the curve data.  The logV_i are only
/// constrained from below, so they are taken with equality at
/// max{hhat(P_i), h, 3 pi |u'_i|^2 / Im tau} (and logV_0 without the
/// height term), which minimizes N1.
pub fn david_bound_inputs(
    curve: &Curve,
    lambda: &Real,
    omega: &Real,
    g_torsion: u64,
    hhat: &[Real],
    u_prime: &[Real],
    tau_im: &Real,
    prec: usize,
) -> DavidBoundInputs {
    let wp = prec + 64;
    let r = hhat.len();
    assert_eq!(u_prime.len(), r);
    let one = Real::one(wp);
    // c6 = max{ log(2 sqrt2 (4g/omega)^(1/3)) / lambda, 1 }
    let two = Real::from_i64(2, wp);
    let inner = &(&two * &two.sqrt())
        * &(&Real::from_i64(4 * g_torsion as i64, wp) / omega).pow_ratio(1, 3);
    let c6 = (&inner.ln() / lambda).max(&one).nudge_up(GUARD);
    // C = 2.9 * 10^(6(r+2)) * 4^(2(r+1)^2) * (r+2)^(2r^2 + 13r + 23.3)
    let ri = r as i64;
    let ten = Real::from_i64(10, wp);
    let mut c_david = &ratio(29, 10, wp) * &ten.powi((6 * (ri + 2)) as u64);
    c_david = &c_david * &Real::from_i64(4, wp).powi((2 * (ri + 1) * (ri + 1)) as u64);
    let exp_r = &Real::from_i64(2 * ri * ri + 13 * ri, wp) + &ratio(233, 10, wp);
    c_david = &c_david * &real_pow(&Real::from_i64(ri + 2, wp), &exp_r);
    // h = log max{4|a j2|, 4|b j2|, |j1|}
    let (j1, j2) = &curve.j;
    let cand = |v: BigInt| Real::from_bigint(&v.abs(), wp);
    let h_j = cand(BigInt::from(4) * (&curve.a * j2))
        .max(&cand(BigInt::from(4) * (&curve.b * j2)))
        .max(&cand(j1.clone()))
        .ln()
        .nudge_up(GUARD);
    // logV_i with equality at the printed lower bounds
    let three_pi = &Real::from_i64(3, wp) * &Real::pi(wp);
    let mut log_v = Vec::with_capacity(r + 1);
    log_v.push(h_j.max(&(&three_pi / tau_im)).nudge_up(GUARD));
    for i in 0..r {
        let arch = &(&three_pi * &(&u_prime[i] * &u_prime[i])) / tau_im;
        log_v.push(hhat[i].max(&h_j).max(&arch).nudge_up(GUARD));
    }
    // c7 = max{C/lambda, 10^9} (h/2)^(r+2) prod logV_i
    let mut c7 = (&c_david / lambda).max(&ten.powi(9));
    c7 = &c7 * &(&h_j / &two).powi((ri + 2) as u64);
    for v in &log_v {
        c7 = &c7 * v;
    }
    DavidBoundInputs {
        r,
        c6,
        c7: c7.with_prec(prec).nudge_up(GUARD),
        c_david: c_david.with_prec(prec).nudge_up(GUARD),
        h_j,
        log_v,
    }
}

/// N1 = 2^(r+3) sqrt(c6 c7) log^((r+3)/2)(c7 (r+3)^(r+3)), rounded up.
pub fn bound_n1(inputs: &DavidBoundInputs) -> Real {
    let wp = inputs.c7.prec();
    let r = inputs.r as i64;
    let lead = Real::from_i64(2, wp).powi((r + 3) as u64);
    let root = (&inputs.c6 * &inputs.c7).sqrt();
    let arg = &inputs.c7 * &Real::from_i64(r + 3, wp).powi((r + 3) as u64);
    let logpow = arg.ln().pow_ratio(r + 3, 2);
    (&(&lead * &root) * &logpow).nudge_up(GUARD)
}

/// exp(mu_inf) = max{(2|a|)^(1/2), (4|b|)^(1/3)}.
pub fn exp_mu_inf(curve: &Curve, prec: usize) -> Real {
    let wp = prec + 32;
    let root = |v: BigInt, den: u64| {
        let r = Real::from_bigint(&v, wp);
        if r.is_zero() {
            r
        } else {
            r.pow_ratio(1, den)
        }
    };
    let t1 = root(BigInt::from(2) * curve.a.abs(), 2);
    let t2 = root(BigInt::from(4) * curve.b.abs(), 3);
    t1.max(&t2).with_prec(prec).nudge_up(GUARD)
}

/// x0 = max{alpha + beta, 2 gamma} + M for the roots alpha <= beta <= gamma
/// of t^3 + a t + b (alpha, beta a conjugate pair when only one root is
/// real), with M = 0 if gamma >= 0 and exp(mu_inf)/(2^(1/3) - 1) otherwise.
/// Returns (x0, M, exp(mu_inf)); the search cutoff is max{x0, exp(mu_inf)}.
pub fn threshold_x0(curve: &Curve, prec: usize) -> (Real, Real, Real) {
    let wp = prec + 32;
    let roots = cubic_roots(curve, wp);
    let (gamma, alpha_plus_beta) = if roots.real.len() == 3 {
        (roots.real[0].clone(), &roots.real[1] + &roots.real[2])
    } else {
        let (c, _) = roots.complex_pair.as_ref().unwrap();
        (roots.real[0].clone(), &Real::from_i64(2, wp) * c)
    };
    let emu = exp_mu_inf(curve, wp);
    let m = if gamma.is_negative() {
        let denom = &Real::from_i64(2, wp).pow_ratio(1, 3) - &Real::one(wp);
        (&emu / &denom).nudge_up(GUARD)
    } else {
        Real::zero(wp)
    };
    let two_gamma = &Real::from_i64(2, wp) * &gamma;
    let x0 = (&alpha_plus_beta.max(&two_gamma) + &m).with_prec(prec).nudge_up(GUARD);
    (x0, m.with_prec(prec), emu.with_prec(prec).nudge_up(GUARD))
}

/// Largest even alpha_i with alpha_i <= log(cutoff)/log(q_i) per finite place.
pub fn extra_search_exponents(places: &PlaceSet, cutoff: &Real) -> Vec<(u64, u32)> {
    let log_cut = cutoff.ln();
    places
        .finite_primes
        .iter()
        .map(|&q| {
            let bound = (&log_cut / &Real::from_i64(q as i64, cutoff.prec()).ln()).to_f64();
            let cap = if bound.is_finite() && bound >= 2.0 {
                let mut k = bound.floor() as u32;
                if k % 2 == 1 {
                    k -= 1;
                }
                k
            } else {
                0
            };
            (q, cap)
        })
        .collect()
}

/// c5 at the real place: sqrt(8) g / omega.
pub fn c5_real(g_torsion: u64, omega: &Real) -> Real {
    let wp = omega.prec();
    (&(&Real::from_i64(8, wp).sqrt() * &Real::from_i64(g_torsion as i64, wp)) / omega)
        .nudge_up(GUARD)
}

/// c8 = exp(c2/s), rounded up.
pub fn c8_constant(c2: &Real, s: usize) -> Real {
    (&(c2 / &Real::from_i64(s as i64, c2.prec()))).exp().nudge_up(GUARD)
}

/// c9 = lambda/s, rounded down (it multiplies -N^2 in the decay bound).
pub fn c9_constant(lambda: &Real, s: usize) -> Real {
    (lambda / &Real::from_i64(s as i64, lambda.prec())).nudge_down(GUARD)
}

///// Decay constant of the archimedean linear form, lambda/2: with
/// h(P) = (1/2) log H(P) and H(P) = |x|_inf * zeta^2 in the archimedean
/// case of the place dichotomy, |u| <= sqrt(8)/|x|_inf^(1/2) decays like
/// exp(-(lambda/2) N^2) (the classical integral-point rate of de Weger and
/// Stroeker-Tzanakis).
pub fn c9_real_constant(lambda: &Real) -> Real {
    (lambda / &Real::from_i64(2, lambda.prec())).nudge_down(GUARD)
}
