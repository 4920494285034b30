//! Exact integral LLL and the de Weger reduction steps at the archimedean
//! and q-adic places, iterated until the coefficient bound stops shrinking.
//!
//! The LLL routine follows the all-integer formulation in Cohen, "A Course
//! in Computational Algebraic Number Theory", Algorithm 2.6.7; the lattice
//! criteria are the standard de Weger bounds as used for elliptic
//! logarithm linear forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::PadicNumber;
use crate::real::Real;

/// A lattice given by independent basis rows of arbitrary-precision
/// integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLattice {
    pub rows: Vec<Vec<BigInt>>,
}

impl IntegerLattice {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact integral LLL reduction with parameter delta = dp/dq in (1/4, 1).
/// The returned rows span the same lattice (the transform is unimodular)
/// and satisfy the size-reduction and Lovasz conditions.
pub fn lll_reduce(lattice: &IntegerLattice, dp: u64, dq: u64) -> IntegerLattice {
    assert!(4 * dp > dq && dp < dq, "delta must lie in (1/4, 1)");
    let n = lattice.rows.len();
    if n <= 1 {
        return lattice.clone();
    }
    let mut b = lattice.rows.clone();
    // d[i] = Gram determinant of the first i vectors (d[0] = 1);
    // lam[i][j] = d[j+1] * mu_{i,j} stays integral throughout
    let mut d = vec![BigInt::one(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    let init = |b: &Vec<Vec<BigInt>>, d: &mut Vec<BigInt>, lam: &mut Vec<Vec<BigInt>>, upto: usize| {
        for i in 0..upto {
            for j in 0..=i {
                let mut u = dot(&b[i], &b[j]);
                for k in 0..j {
                    u = (&d[k + 1] * &u - &lam[i][k] * &lam[j][k]) / &d[k];
                }
                if j < i {
                    lam[i][j] = u;
                } else {
                    d[i + 1] = u;
                }
            }
        }
    };
    init(&b, &mut d, &mut lam, n);

    let redi = |b: &mut Vec<Vec<BigInt>>,
                lam: &mut Vec<Vec<BigInt>>,
                d: &Vec<BigInt>,
                k: usize,
                l: usize| {
        let two_lam = BigInt::from(2) * lam[k][l].abs();
        if two_lam > d[l + 1] {
            // nearest integer to lam[k][l]/d[l+1]
            let q = nearest_quotient(&lam[k][l], &d[l + 1]);
            for t in 0..b[k].len() {
                let adj = &q * &b[l][t];
                b[k][t] -= adj;
            }
            let dl = &q * &d[l + 1];
            lam[k][l] -= dl;
            for i in 0..l {
                let adj = &q * &lam[l][i];
                lam[k][i] -= adj;
            }
        }
    };

    let mut k = 1usize;
    while k < n {
        redi(&mut b, &mut lam, &d, k, k - 1);
        // Lovasz test: dq*(d[k+1]*d[k-1] + lam^2) < dp*d[k]^2  => swap
        let lam_k = lam[k][k - 1].clone();
        let lhs = BigInt::from(dq) * (&d[k + 1] * &d[k - 1] + &lam_k * &lam_k);
        let rhs = BigInt::from(dp) * (&d[k] * &d[k]);
        if lhs < rhs {
            b.swap(k, k - 1);
            for j in 0..k.saturating_sub(1) {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let big_b = (&d[k - 1] * &d[k + 1] + &lam_k * &lam_k) / &d[k];
            for i in k + 1..n {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &lam_k * &t) / &d[k];
                lam[i][k - 1] = (&big_b * &t + &lam_k * &lam[i][k]) / &d[k + 1];
            }
            d[k] = big_b;
            k = k.saturating_sub(1).max(1);
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                redi(&mut b, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
    IntegerLattice { rows: b }
}

/// Nearest integer to a/b for b > 0, ties toward +infinity.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (two_a_plus_b, two_b) = (BigInt::from(2) * a + b, BigInt::from(2) * b);
    two_a_plus_b.div_floor(&two_b)
}

/// Outcome of one de Weger step: a new bound, or a request for more
/// scaling (larger C or more q-adic digits).
#[derive(Clone, Debug)]
pub enum ReductionOutcome {
    Reduced(BigInt),
    NeedLargerScale,
}

fn bigint_to_real(v: &BigInt, prec: usize) -> Real {
    Real::from_bigint(v, prec)
}

/// One archimedean de Weger step.  The linear form is
/// sum n_i u'_i + n_{r+1} with integer n_{r+1}; when a basis point lies
/// on the bounded real component the whole form is doubled (u'_i -> 2u'_i
/// and the unit coefficient too) so that half-integer translations become
/// integers, and the decay constant c5 c8 is doubled to match.
///
/// ln_c5c8 must already include that doubling when egg_present is set.
pub fn reduce_real_place(
    u_prime: &[Real],
    egg_present: bool,
    n_current: &BigInt,
    c_scale: &BigInt,
    ln_c5c8: &Real,
    c9: &Real,
) -> Result<ReductionOutcome> {
    let r = u_prime.len();
    if r == 0 {
        return Ok(ReductionOutcome::Reduced(BigInt::zero()));
    }
    let prec = u_prime[0].prec();
    let needed_bits = c_scale.bits() as usize + 30;
    if prec < needed_bits {
        return Err(Error::InsufficientPrecision(format!(
            "logs carry {prec} bits but C needs {needed_bits}"
        )));
    }
    let d = r + 1;
    let c_real = bigint_to_real(c_scale, prec);
    let two = Real::from_i64(2, prec);
    // bottom row entries round(C * u'_i) (doubled on the egg)
    let mut rows = Vec::with_capacity(d);
    for i in 0..r {
        let mut row = vec![BigInt::zero(); d];
        row[i] = BigInt::one();
        let mut scaled = &c_real * &u_prime[i];
        if egg_present {
            scaled = &scaled * &two;
        }
        row[d - 1] = scaled.round_bigint();
        rows.push(row);
    }
    let mut last = vec![BigInt::zero(); d];
    last[d - 1] = c_scale.clone();
    rows.push(last);
    let reduced = lll_reduce(&IntegerLattice { rows }, 3, 4);
    let b1_sq = dot(&reduced.rows[0], &reduced.rows[0]);
    // sigma^2 = |b1|^2 / 2^(d-1) bounds the squared shortest vector from
    // below; require sigma^2 > r N^2
    let rn_sq = BigInt::from(r as u64) * (n_current * n_current);
    let sigma_floor = &b1_sq >> (d - 1);
    if sigma_floor <= rn_sq {
        return Ok(ReductionOutcome::NeedLargerScale);
    }
    // Lambda_min = (sqrt(sigma^2 - r N^2) - r N / 2) / C
    let sigma_sq = &bigint_to_real(&b1_sq, prec)
        / &Real::from_i64(2, prec).powi((d - 1) as u64);
    let gap = (&sigma_sq - &bigint_to_real(&rn_sq, prec)).sqrt();
    let half_rn = &bigint_to_real(&(BigInt::from(r as u64) * n_current), prec) / &two;
    let numer = &gap - &half_rn;
    if !numer.is_positive() {
        return Ok(ReductionOutcome::NeedLargerScale);
    }
    let lambda_min = &numer / &c_real;
    let bound_sq = &(ln_c5c8 - &lambda_min.ln()) / c9;
    if bound_sq.is_negative() {
        return Ok(ReductionOutcome::Reduced(BigInt::zero()));
    }
    Ok(ReductionOutcome::Reduced(bound_sq.sqrt().floor_bigint()))
}

/// One q-adic de Weger step on the logs psi_q(m P_i), using mu q-adic
/// digits.  The congruence lattice is r-dimensional: after dividing by a
/// log of minimal valuation v0, a solution of (4) forces
/// n_{i0} + sum n_i theta_i = 0 mod q^mu, and absence of short vectors in
/// that lattice yields M_q = floor(sqrt((c2/s + (mu+v0-1) ln q)/c9)).
pub fn reduce_padic_place(
    logs: &[PadicNumber],
    q: u64,
    mu: i64,
    n_current: &BigInt,
    c2_over_s: &Real,
    c9: &Real,
) -> Result<ReductionOutcome> {
    let r = logs.len();
    if r == 0 {
        return Ok(ReductionOutcome::Reduced(BigInt::zero()));
    }
    if logs.iter().all(|l| l.is_zero()) {
        return Err(Error::AllLogsVanish { q });
    }
    let i0 = (0..r)
        .filter(|&i| !logs[i].is_zero())
        .min_by_key(|&i| logs[i].val)
        .unwrap();
    let v0 = logs[i0].val;
    for l in logs {
        if l.abs_prec() < mu + v0 + 5 {
            return Err(Error::InsufficientPrecision(format!(
                "{q}-adic log precision {} below mu + v0 + guard = {}",
                l.abs_prec(),
                mu + v0 + 5
            )));
        }
    }
    let q_mu = BigInt::from(q).pow(mu as u32);
    // theta_i = u'_i / u'_{i0} reduced to an integer representative mod q^mu
    let mut theta = vec![BigInt::zero(); r];
    for i in 0..r {
        if i == i0 || logs[i].is_zero() {
            continue;
        }
        let t = logs[i].div(&logs[i0])?;
        debug_assert!(t.val >= 0);
        if t.val < mu {
            theta[i] = (&t.unit * BigInt::from(q).pow(t.val as u32)).mod_floor(&q_mu);
        }
    }
    // basis rows e_i - theta_i e_{i0} (i != i0) and q^mu e_{i0}
    let mut rows = Vec::with_capacity(r);
    for i in 0..r {
        if i == i0 {
            continue;
        }
        let mut row = vec![BigInt::zero(); r];
        row[i] = BigInt::one();
        row[i0] = -&theta[i];
        rows.push(row);
    }
    let mut last = vec![BigInt::zero(); r];
    last[i0] = q_mu;
    rows.push(last);
    let reduced = lll_reduce(&IntegerLattice { rows }, 3, 4);
    let b1_sq = dot(&reduced.rows[0], &reduced.rows[0]);
    let rn_sq = BigInt::from(r as u64) * (n_current * n_current);
    let sigma_floor = if r > 1 { &b1_sq >> (r - 1) } else { b1_sq.clone() };
    if sigma_floor <= rn_sq {
        return Ok(ReductionOutcome::NeedLargerScale);
    }
    let prec = c9.prec();
    let ln_q = Real::from_i64(q as i64, prec).ln();
    let digits = Real::from_i64(mu + v0 - 1, prec);
    let bound_sq = &(c2_over_s + &(&digits * &ln_q)) / c9;
    Ok(ReductionOutcome::Reduced(bound_sq.sqrt().floor_bigint()))
}

/// One line of the reduction ledger: which place was reduced at which
/// scaling, and the bound it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// None for the archimedean place.
    pub place: Option<u64>,
    /// log10 of C at infinity, or the digit count mu at a finite place.
    pub scale: i64,
    pub bound: BigInt,
}

/// Everything the iterated reduction needs; the logs must be precise
/// enough for the scalings derived from the INITIAL bound (later rounds
/// only shrink them).
pub struct ReductionInput<'a> {
    pub real_logs: &'a [Real],
    pub egg_present: bool,
    /// (q, psi_q(m_q P_i) for each basis point)
    pub padic_logs: &'a [(u64, Vec<PadicNumber>)],
    pub ln_c5c8: Real,
    pub c2_over_s: Real,
    /// Decay constant of the archimedean linear form, lambda / 2.  With the
    /// height h(P) = (1/2) log H(P), an S-integral point subject to the
    /// archimedean case of the place dichotomy has H(P) = |x|_inf * zeta^2,
    /// so |u| <= sqrt(8)/sqrt(|x|_inf) <= sqrt(8) zeta exp(c2 - (lambda/2) N^2):
    /// the classical integral-point decay (de Weger, "Algorithms in
    /// Diophantine Approximation", ch. 3; Stroeker & Tzanakis).
    pub c9_real: Real,
    /// Decay constant of the q-adic linear forms, lambda / s, from
    /// |psi_q(mP)|_q <= |x|_q^(-1/2) <= exp(c2/s - (lambda/s) N^2).
    pub c9_padic: Real,
}

/// log10 of a positive BigInt bound, rounded up.
fn log10_ceil(n: &BigInt) -> i64 {
    n.to_string().trim_start_matches('-').len() as i64
}

fn log_q_ceil(n: &BigInt, q: u64) -> i64 {
    // ceil(log_q n) via bit length: log_q n = bits * ln2 / ln q
    let bits = n.bits() as f64;
    (bits * std::f64::consts::LN_2 / (q as f64).ln()).ceil() as i64 + 1
}

/// Iterate de Weger reduction over all places until no place improves the
/// bound, recording a full trace.  Scalings follow the defaults
/// C = 10^(ceil((r+1) log10 N) + 20) and mu = ceil(r log_q N) + 15, each
/// retried with more room on criterion failure.
pub fn reduction_driver(
    input: &ReductionInput,
    n0: &BigInt,
    max_iterations: usize,
) -> Result<(BigInt, Vec<TraceEntry>)> {
    let r = input.real_logs.len();
    let mut current = n0.clone();
    let mut trace = Vec::new();
    for iteration in 0..max_iterations {
        let mut best: Option<BigInt> = None;
        // archimedean place
        let mut c_digits = (r as i64 + 1) * log10_ceil(&current) + 20;
        let m_inf = loop {
            let c_scale = BigInt::from(10u64).pow(c_digits as u32);
            match reduce_real_place(
                input.real_logs,
                input.egg_present,
                &current,
                &c_scale,
                &input.ln_c5c8,
                &input.c9_real,
            )? {
                ReductionOutcome::Reduced(b) => break b,
                ReductionOutcome::NeedLargerScale => {
                    // reduce_real_place re-checks the log precision against
                    // the enlarged C and errors out if it cannot keep up
                    c_digits += 10;
                }
            }
        };
        trace.push(TraceEntry {
            iteration,
            place: None,
            scale: c_digits,
            bound: m_inf.clone(),
        });
        best = Some(best.map_or(m_inf.clone(), |b: BigInt| b.max(m_inf.clone())));
        // finite places
        for (q, logs) in input.padic_logs {
            let mut mu = (r as i64) * log_q_ceil(&current, *q) + 15;
            let m_q = loop {
                match reduce_padic_place(
                    logs,
                    *q,
                    mu,
                    &current,
                    &input.c2_over_s,
                    &input.c9_padic,
                )? {
                    ReductionOutcome::Reduced(b) => break b,
                    ReductionOutcome::NeedLargerScale => {
                        mu += 25;
                    }
                }
            };
            trace.push(TraceEntry {
                iteration,
                place: Some(*q),
                scale: mu,
                bound: m_q.clone(),
            });
            best = Some(best.map_or(m_q.clone(), |b: BigInt| b.max(m_q.clone())));
        }
        let new_bound = best.unwrap();
        if new_bound >= current {
            return Ok((current, trace));
        }
        current = new_bound;
        // a bound this small cannot shrink in a useful way any further
        if current <= BigInt::from(1u64) {
            return Ok((current, trace));
        }
    }
    Err(Error::NonConvergence(format!(
        "reduction did not stabilize within {max_iterations} iterations"
    )))
}
