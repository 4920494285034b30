//! Final enumeration under the reduced bound, the quick linear-form
//! filter, S-integrality testing, and the residual bounded search over the
//! region where the threshold inequality on x fails.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::curve::{add, scalar_mul, Curve, PlaceSet, RationalPoint};
use crate::error::{Error, Result};
use crate::padic::PadicNumber;
use crate::real::Real;

/// One S-integral point: x = xi/zeta^2, y = eta/zeta^3 in lowest terms
/// with eta >= 0 as the stored representative (the mirror point -P is
/// reported via the +- convention, not stored).  The coefficient vector
/// and torsion index reconstruct the point exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub xi: BigInt,
    pub eta: BigInt,
    pub zeta: BigInt,
    /// Factorization of zeta over the finite places of S.
    pub zeta_factorization: Vec<(u64, u32)>,
    pub coefficients: Vec<i64>,
    /// Index into the torsion point list supplied to the search.
    pub torsion_index: usize,
}

/// true iff every prime factor of zeta lies in S.
pub fn s_integrality_test(p: &RationalPoint, places: &PlaceSet) -> bool {
    match p {
        RationalPoint::Identity => true,
        RationalPoint::Affine { zeta, .. } => {
            let mut z = zeta.abs();
            for q in &places.finite_primes {
                let qb = BigInt::from(*q);
                while (&z % &qb).is_zero() {
                    z /= &qb;
                }
            }
            z == BigInt::from(1)
        }
    }
}

/// zeta = prod q^e over the S primes; assumes s_integrality_test passed.
pub fn factor_zeta(zeta: &BigInt, places: &PlaceSet) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut z = zeta.abs();
    for q in &places.finite_primes {
        let qb = BigInt::from(*q);
        let mut e = 0u32;
        while (&z % &qb).is_zero() {
            z /= &qb;
            e += 1;
        }
        if e > 0 {
            out.push((*q, e));
        }
    }
    out
}

const REAL_SCALE_BITS: u32 = 90;

/// Low-precision data for the quick per-place test of the linear-form
/// inequality.  The test errs outward (slack factor 10 on every
/// threshold), so it can only over-accept, never reject a vector that a
/// genuine S-integral point produces.
pub struct QuickFilter {
    /// round(u'_i * 2^90) for the archimedean normalized logs.
    real_coeffs: Vec<i128>,
    /// round((u(T)/Omega mod 1) * 2^90) per torsion point.
    torsion_phase: Vec<i128>,
    /// ln(c5 c8) + ln 10 slack, as f64 rounded up.
    real_ln_threshold: f64,
    /// Conservative decay constant (lambda/(2s) is always sound).
    c9: f64,
    /// Per finite place q: (q, digit count k, value of each log mod q^k,
    /// ln q, c2/s + ln 10 slack).
    padic: Vec<PadicFilterPlace>,
}

struct PadicFilterPlace {
    q: u64,
    k: u32,
    q_to_k: u128,
    coeffs: Vec<u128>,
    ln_q: f64,
    ln_threshold: f64,
}

fn real_to_scaled(u: &Real) -> i128 {
    let two_k = Real::from_i64(2, u.prec()).powi(REAL_SCALE_BITS as u64);
    (&two_k * u).round_bigint().to_i128().expect("scaled log fits i128")
}

impl QuickFilter {
    /// Build the filter.  `u_prime` are the archimedean normalized logs,
    /// `torsion_u_prime` the torsion phases u(T)/Omega (empty slice when
    /// the torsion is trivial beyond the identity), `padic_logs` the
    /// psi_q(m_q P_i) per finite place; `ln_c5c8` and `c2_over_s` are the
    /// decay offsets of the two inequality shapes and `c9` the decay
    /// constant (the caller passes the sound lambda/(2s)).
    pub fn new(
        u_prime: &[Real],
        torsion_u_prime: &[Real],
        padic_logs: &[(u64, Vec<PadicNumber>)],
        ln_c5c8: f64,
        c2_over_s: f64,
        c9: f64,
    ) -> QuickFilter {
        let real_coeffs = u_prime.iter().map(real_to_scaled).collect();
        let torsion_phase = torsion_u_prime.iter().map(real_to_scaled).collect();
        let mut padic = Vec::new();
        for (q, logs) in padic_logs {
            // largest k with q^k < 2^120
            let k = (120.0 / (*q as f64).log2()).floor() as u32;
            let k = logs
                .iter()
                .map(|l| l.abs_prec().max(1) as u32)
                .min()
                .unwrap_or(k)
                .min(k);
            let q_to_k = (*q as u128).pow(k);
            let modulus = BigInt::from(q_to_k);
            let coeffs = logs
                .iter()
                .map(|l| {
                    if l.is_zero() || l.val >= k as i64 {
                        0u128
                    } else {
                        (&l.unit * BigInt::from(*q).pow(l.val as u32))
                            .mod_floor(&modulus)
                            .to_u128()
                            .unwrap()
                    }
                })
                .collect();
            padic.push(PadicFilterPlace {
                q: *q,
                k,
                q_to_k,
                coeffs,
                ln_q: (*q as f64).ln(),
                ln_threshold: c2_over_s + 10f64.ln(),
            });
        }
        QuickFilter {
            real_coeffs,
            torsion_phase,
            real_ln_threshold: ln_c5c8 + 10f64.ln(),
            c9,
            padic,
        }
    }

    /// true iff the decay inequality could hold at some place for this
    /// coefficient vector (with torsion phase index `t`).
    pub fn passes(&self, n: &[i64], t: usize, n_max: i64) -> bool {
        let n_sq = (n_max * n_max) as f64;
        // archimedean: distance of sum n_i u'_i (+ phase) to the nearest
        // half-integer (half to stay outward on the bounded component)
        let mut acc: i128 = 0;
        for (c, ni) in self.real_coeffs.iter().zip(n) {
            acc += c * (*ni as i128);
        }
        if t > 0 && !self.torsion_phase.is_empty() {
            acc += self.torsion_phase[t - 1];
        }
        let half = 1i128 << (REAL_SCALE_BITS - 1);
        let m = acc.rem_euclid(half);
        let dist = m.min(half - m) as f64 / (1i128 << REAL_SCALE_BITS) as f64;
        if dist.ln() <= self.real_ln_threshold - self.c9 * n_sq {
            return true;
        }
        for place in &self.padic {
            let mut acc: u128 = 0;
            for (c, ni) in place.coeffs.iter().zip(n) {
                let term = mulmod_u128(*c, (*ni as i128).rem_euclid(place.q_to_k as i128) as u128, place.q_to_k);
                acc = addmod_u128(acc, term, place.q_to_k);
            }
            // |form|_q = q^(-v); v >= k means indistinguishable from 0: pass
            let v = if acc == 0 {
                place.k
            } else {
                let mut v = 0u32;
                let mut a = acc;
                while a % place.q as u128 == 0 {
                    a /= place.q as u128;
                    v += 1;
                }
                v
            };
            if -(v as f64) * place.ln_q <= place.ln_threshold - self.c9 * n_sq {
                return true;
            }
        }
        false
    }
}

fn addmod_u128(a: u128, b: u128, m: u128) -> u128 {
    let s = a.checked_add(b).expect("modulus below 2^127 keeps sums in range");
    if s >= m { s - m } else { s }
}

fn mulmod_u128(a: u128, b: u128, m: u128) -> u128 {
    // schoolbook double-and-add; m < 2^120 so additions cannot overflow
    let mut acc = 0u128;
    let mut a = a % m;
    let mut b = b % m;
    while b > 0 {
        if b & 1 == 1 {
            acc = addmod_u128(acc, a, m);
        }
        a = addmod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

/// Everything the final enumeration needs.
pub struct SearchContext<'a> {
    pub curve: &'a Curve,
    pub basis: &'a [RationalPoint],
    /// Non-identity torsion points; index t in records is 1-based into
    /// this list, 0 meaning no torsion part.
    pub torsion: &'a [RationalPoint],
    pub places: &'a PlaceSet,
    pub filter: &'a QuickFilter,
}

/// All S-integral points sum n_i P_i + T with max |n_i| <= n_final, up to
/// the sign symmetry P <-> -P; records store the eta >= 0 representative.
/// Complete: every vector passes through the outward-slack quick filter
/// before the exact check, so no S-integral point in range is dropped.
pub fn enumerate_candidates(
    ctx: &SearchContext,
    n_final: i64,
    threads: usize,
) -> Result<Vec<SolutionRecord>> {
    let r = ctx.basis.len();
    let threads = threads.max(1);
    let collected: Mutex<Vec<SolutionRecord>> = Mutex::new(Vec::new());
    let next_chunk = AtomicUsize::new(0);
    // chunk c = 0: vectors with n_1 = 0 (lex-positive recursion on the
    // suffix); chunk c >= 1: n_1 = c, suffix coordinates free
    let chunk_count = (n_final as usize) + 1;
    let errored: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(chunk_count.max(1)) {
            scope.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let c = next_chunk.fetch_add(1, Ordering::Relaxed);
                    if c >= chunk_count {
                        break;
                    }
                    let res = if c == 0 {
                        enumerate_zero_prefix(ctx, n_final, &mut local)
                    } else {
                        enumerate_fixed_head(ctx, c as i64, n_final, &mut local)
                    };
                    if let Err(e) = res {
                        *errored.lock().unwrap() = Some(e);
                        break;
                    }
                }
                collected.lock().unwrap().extend(local);
            });
        }
    });
    if let Some(e) = errored.into_inner().unwrap() {
        return Err(e);
    }
    let mut records = collected.into_inner().unwrap();
    // torsion-only candidates (zero vector)
    for (ti, t) in ctx.torsion.iter().enumerate() {
        if let Some(rec) = record_from_point(ctx, t, &vec![0; r], ti + 1)? {
            records.push(rec);
        }
    }
    dedupe_and_sort(&mut records);
    Ok(records)
}

/// Vectors with n_1 = head fixed (head >= 1), suffix free in [-N, N].
fn enumerate_fixed_head(
    ctx: &SearchContext,
    head: i64,
    n: i64,
    out: &mut Vec<SolutionRecord>,
) -> Result<()> {
    let r = ctx.basis.len();
    let mut v = vec![-n; r];
    v[0] = head;
    loop {
        try_vector(ctx, &v, n, out)?;
        // odometer over v[1..]
        let mut i = r;
        loop {
            if i == 1 {
                return Ok(());
            }
            i -= 1;
            if v[i] < n {
                v[i] += 1;
                break;
            }
            v[i] = -n;
        }
    }
}

/// Lex-positive vectors whose first coordinate is zero: recurse into the
/// suffix with the same rule (first nonzero coordinate positive).
fn enumerate_zero_prefix(ctx: &SearchContext, n: i64, out: &mut Vec<SolutionRecord>) -> Result<()> {
    let r = ctx.basis.len();
    for lead in 1..r {
        // coordinates 0..lead are zero, v[lead] in 1..=n, rest free
        for head in 1..=n {
            let mut v = vec![0i64; r];
            v[lead] = head;
            if lead + 1 == r {
                try_vector(ctx, &v, n, out)?;
                continue;
            }
            for i in lead + 1..r {
                v[i] = -n;
            }
            loop {
                try_vector(ctx, &v, n, out)?;
                let mut i = r;
                let mut done = false;
                loop {
                    if i == lead + 1 {
                        done = true;
                        break;
                    }
                    i -= 1;
                    if v[i] < n {
                        v[i] += 1;
                        break;
                    }
                    v[i] = -n;
                }
                if done {
                    break;
                }
            }
        }
    }
    Ok(())
}

fn try_vector(ctx: &SearchContext, v: &[i64], n_final: i64, out: &mut Vec<SolutionRecord>) -> Result<()> {
    let n_max = v.iter().map(|x| x.abs()).max().unwrap_or(0);
    let torsion_slots = ctx.torsion.len() + 1;
    for t in 0..torsion_slots {
        if !ctx.filter.passes(v, t, n_max.max(1).min(n_final)) {
            continue;
        }
        let mut p = RationalPoint::Identity;
        for (ni, b) in v.iter().zip(ctx.basis) {
            if *ni != 0 {
                p = add(&p, &scalar_mul(&BigInt::from(*ni), b, ctx.curve), ctx.curve);
            }
        }
        if t > 0 {
            p = add(&p, &ctx.torsion[t - 1], ctx.curve);
        }
        if let Some(rec) = record_from_point(ctx, &p, v, t)? {
            out.push(rec);
        }
    }
    Ok(())
}

/// Exact S-integrality check and canonicalization to the eta >= 0
/// representative (negating the coefficient vector and torsion index as
/// needed so the record still reproduces the stored point).
fn record_from_point(
    ctx: &SearchContext,
    p: &RationalPoint,
    v: &[i64],
    t: usize,
) -> Result<Option<SolutionRecord>> {
    let RationalPoint::Affine { xi, eta, zeta } = p else {
        return Ok(None);
    };
    if !s_integrality_test(p, ctx.places) {
        return Ok(None);
    }
    let (xi, eta, zeta, coeffs, t_idx) = if eta.is_negative() {
        let neg_t = if t == 0 {
            0
        } else {
            let nt = ctx.torsion[t - 1].neg();
            1 + ctx
                .torsion
                .iter()
                .position(|x| *x == nt)
                .ok_or_else(|| Error::InvalidSpec("torsion list not closed under negation".into()))?
        };
        (xi.clone(), -eta, zeta.clone(), v.iter().map(|x| -x).collect(), neg_t)
    } else {
        (xi.clone(), eta.clone(), zeta.clone(), v.to_vec(), t)
    };
    Ok(Some(SolutionRecord {
        zeta_factorization: factor_zeta(&zeta, ctx.places),
        xi,
        eta,
        zeta,
        coefficients: coeffs,
        torsion_index: t_idx,
    }))
}

fn dedupe_and_sort(records: &mut Vec<SolutionRecord>) {
    records.sort_by(|a, b| {
        (&a.zeta, &a.xi, &a.eta).cmp(&(&b.zeta, &b.xi, &b.eta))
    });
    records.dedup_by(|a, b| a.xi == b.xi && a.eta == b.eta && a.zeta == b.zeta);
}

/// The residual search: S-integral points whose x fails the threshold
/// inequality have |x| <= cutoff and even denominator exponents within
/// alpha_bounds; enumerate them directly.  Returns (xi, eta, zeta) with
/// eta >= 0; the numerator is coprime to every prime actually dividing
/// the denominator.
pub fn extra_search(
    curve: &Curve,
    places: &PlaceSet,
    cutoff: f64,
    alpha_bounds: &[(u64, u32)],
) -> Vec<(BigInt, BigInt, BigInt)> {
    let mut zetas = vec![BigInt::from(1)];
    for (q, cap) in alpha_bounds {
        let mut next = Vec::new();
        for z in &zetas {
            let mut alpha = 0u32;
            loop {
                // zeta gains q^(alpha/2) for even alpha <= cap
                next.push(z * BigInt::from(*q).pow(alpha / 2));
                alpha += 2;
                if alpha > *cap {
                    break;
                }
            }
        }
        zetas = next;
    }
    zetas.sort();
    zetas.dedup();
    let mut found = Vec::new();
    for zeta in &zetas {
        let z2 = zeta * zeta;
        let z4 = &z2 * &z2;
        let z6 = &z4 * &z2;
        let ximax_f = cutoff * z2.to_f64().unwrap_or(f64::MAX);
        let ximax = BigInt::from(ximax_f.ceil().max(1.0) as i128);
        let mut xi = -ximax.clone();
        while xi <= ximax {
            if zeta.is_one() || xi.gcd(zeta).is_one() {
                // eta^2 = xi^3 + a xi zeta^4 + b zeta^6
                let rhs = &xi * &xi * &xi + &curve.a * &xi * &z4 + &curve.b * &z6;
                if !rhs.is_negative() {
                    let root = rhs.sqrt();
                    if &root * &root == rhs {
                        let p = RationalPoint::Affine {
                            xi: xi.clone(),
                            eta: root.clone(),
                            zeta: zeta.clone(),
                        };
                        if s_integrality_test(&p, places) && curve.contains(&p) {
                            found.push((xi.clone(), root, zeta.clone()));
                        }
                    }
                }
            }
            xi += 1;
        }
    }
    found.sort();
    found.dedup();
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::validate_curve;
    use num_traits::One;

    fn wiman() -> Curve {
        validate_curve(BigInt::from(-172), BigInt::from(505)).unwrap()
    }

    #[test]
    fn s_integrality_examples() {
        let places = PlaceSet::new(vec![3, 5, 7]).unwrap();
        let p1 = RationalPoint::from_integers(12, 13);
        assert!(s_integrality_test(&p1, &places));
        // zeta = 45 = 3^2 * 5
        let p45 = RationalPoint::Affine {
            xi: BigInt::from(7),
            eta: BigInt::from(11),
            zeta: BigInt::from(45),
        };
        assert!(s_integrality_test(&p45, &places));
        assert_eq!(factor_zeta(&BigInt::from(45), &places), vec![(3, 2), (5, 1)]);
        let p11 = RationalPoint::Affine {
            xi: BigInt::from(7),
            eta: BigInt::from(11),
            zeta: BigInt::from(11),
        };
        assert!(!s_integrality_test(&p11, &places));
    }

    #[test]
    fn extra_search_wiman_region() {
        // on the Wiman curve every residual-region point is an honest
        // S-integral point with small coordinates
        let c = wiman();
        let places = PlaceSet::new(vec![3, 5, 7]).unwrap();
        let pts = extra_search(&c, &places, 31.86, &[(3, 2), (5, 2), (7, 0)]);
        assert!(!pts.is_empty());
        for (xi, eta, zeta) in &pts {
            let p = RationalPoint::Affine { xi: xi.clone(), eta: eta.clone(), zeta: zeta.clone() };
            assert!(c.contains(&p));
            assert!(s_integrality_test(&p, &places));
        }
        // the classical integral points with small |x| appear
        assert!(pts.iter().any(|(xi, _, z)| z.is_one() && *xi == BigInt::from(12)));
        assert!(pts.iter().any(|(xi, _, z)| z.is_one() && *xi == BigInt::from(-14)));
    }

    #[test]
    fn extra_search_brute_force_equivalence() {
        // independent oracle: scan all x = xi / (3^a 5^b 7^c)^?  with small
        // numerator and denominator; every S-integral point with |x| below
        // the cutoff must be produced by extra_search
        let c = wiman();
        let places = PlaceSet::new(vec![3, 5, 7]).unwrap();
        let cutoff = 31.86;
        let pts = extra_search(&c, &places, cutoff, &[(3, 2), (5, 2), (7, 0)]);
        for zeta_u in [1u32, 3, 5, 15] {
            let zeta = BigInt::from(zeta_u);
            let z2 = &zeta * &zeta;
            for xin in -2000i64..=2000 {
                let xi = BigInt::from(xin);
                if !xi.gcd(&zeta).is_one() && !zeta.is_one() {
                    continue;
                }
                let x_abs = xin.abs() as f64 / (zeta_u * zeta_u) as f64;
                if x_abs > cutoff {
                    continue;
                }
                let z4 = &z2 * &z2;
                let z6 = &z4 * &z2;
                let rhs = &xi * &xi * &xi + &c.a * &xi * &z4 + &c.b * &z6;
                if rhs.is_negative() {
                    continue;
                }
                let root = rhs.sqrt();
                if &root * &root != rhs {
                    continue;
                }
                assert!(
                    pts.iter().any(|(a, b, z)| *a == xi && *b == root && *z == zeta),
                    "missed ({xin}, ., {zeta_u})"
                );
            }
        }
    }
}
