//! Exact elliptic-curve arithmetic over Q for curves in short Weierstrass
//! form `y^2 = x^3 + ax + b`, together with reduction modulo primes,
//! torsion computation, and the kernel-of-reduction multiplier `m_q`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Tate's quantities cached for a short-form curve (a1 = a2 = a3 = 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TateQuantities {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
}

/// A nonsingular curve `y^2 = x^3 + ax + b` with cached invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub a: BigInt,
    pub b: BigInt,
    /// delta0 = 4a^3 + 27b^2 (the discriminant of the cubic, up to sign).
    pub delta0: BigInt,
    pub tate: TateQuantities,
    /// Absolute invariant j = j1/j2 in lowest terms.
    pub j: (BigInt, BigInt),
}

impl Curve {
    /// Full curve discriminant Delta = -16 * delta0.
    pub fn discriminant(&self) -> BigInt {
        BigInt::from(-16) * &self.delta0
    }

    /// Right-hand side x^3 + ax + b as an exact rational.
    pub fn rhs(&self, x: &BigRational) -> BigRational {
        x * x * x + BigRational::from(self.a.clone()) * x + BigRational::from(self.b.clone())
    }

    pub fn rhs_int(&self, x: &BigInt) -> BigInt {
        x * x * x + &self.a * x + &self.b
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Identity => true,
            RationalPoint::Affine { xi, eta, zeta } => {
                let z2 = zeta * zeta;
                let z4 = &z2 * &z2;
                let z6 = &z4 * &z2;
                eta * eta == xi * xi * xi + &self.a * xi * z4 + &self.b * z6
            }
        }
    }
}

/// Construct and validate a short-form curve.
pub fn validate_curve(a: BigInt, b: BigInt) -> Result<Curve> {
    let delta0 = BigInt::from(4) * &a * &a * &a + BigInt::from(27) * &b * &b;
    if delta0.is_zero() {
        return Err(Error::DegenerateCurve);
    }
    let tate = TateQuantities {
        b2: BigInt::zero(),
        b4: BigInt::from(2) * &a,
        b6: BigInt::from(4) * &b,
        b8: -(&a * &a),
        c4: BigInt::from(-48) * &a,
        c6: BigInt::from(-864) * &b,
    };
    // j = c4^3 / Delta, Delta = -16 delta0
    let delta = BigInt::from(-16) * &delta0;
    let c4cubed = &tate.c4 * &tate.c4 * &tate.c4;
    let g = c4cubed.gcd(&delta);
    let (mut j1, mut j2) = if g.is_zero() {
        (BigInt::zero(), BigInt::one())
    } else {
        (&c4cubed / &g, &delta / &g)
    };
    if j2.is_negative() {
        j1 = -j1;
        j2 = -j2;
    }
    Ok(Curve { a, b, delta0, tate, j: (j1, j2) })
}

/// A point of E(Q) stored in reduced (xi, eta, zeta) form:
/// x = xi/zeta^2, y = eta/zeta^3 with zeta >= 1 and gcd(xi, zeta) = gcd(eta, zeta) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Identity,
    Affine { xi: BigInt, eta: BigInt, zeta: BigInt },
}

impl RationalPoint {
    pub fn identity() -> Self {
        RationalPoint::Identity
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, RationalPoint::Identity)
    }

    /// Build from affine rational coordinates, checking the on-curve identity.
    pub fn from_xy(x: BigRational, y: BigRational, curve: &Curve) -> Result<Self> {
        if curve.rhs(&x) != &y * &y {
            return Err(Error::PointNotOnCurve);
        }
        Ok(Self::from_xy_unchecked(x, y))
    }

    pub fn from_xy_unchecked(x: BigRational, y: BigRational) -> Self {
        // denominators of curve points are a square resp. cube of the same zeta
        let dx = x.denom().clone();
        let zeta = dx.sqrt();
        debug_assert_eq!(&zeta * &zeta, dx, "x-denominator must be a perfect square");
        debug_assert_eq!(y.denom(), &(&zeta * &zeta * &zeta), "y-denominator must be zeta^3");
        RationalPoint::Affine { xi: x.numer().clone(), eta: y.numer().clone(), zeta }
    }

    pub fn from_integers(x: i64, y: i64) -> Self {
        RationalPoint::Affine { xi: BigInt::from(x), eta: BigInt::from(y), zeta: BigInt::one() }
    }

    pub fn x(&self) -> Option<BigRational> {
        match self {
            RationalPoint::Identity => None,
            RationalPoint::Affine { xi, zeta, .. } => {
                Some(BigRational::new(xi.clone(), zeta * zeta))
            }
        }
    }

    pub fn y(&self) -> Option<BigRational> {
        match self {
            RationalPoint::Identity => None,
            RationalPoint::Affine { eta, zeta, .. } => {
                Some(BigRational::new(eta.clone(), zeta * zeta * zeta))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            RationalPoint::Identity => RationalPoint::Identity,
            RationalPoint::Affine { xi, eta, zeta } => {
                RationalPoint::Affine { xi: xi.clone(), eta: -eta, zeta: zeta.clone() }
            }
        }
    }
}

/// exact chord-tangent group law.
pub fn add(p: &RationalPoint, q: &RationalPoint, curve: &Curve) -> RationalPoint {
    match (p, q) {
        (RationalPoint::Identity, _) => q.clone(),
        (_, RationalPoint::Identity) => p.clone(),
        _ => {
            let (x1, y1) = (p.x().unwrap(), p.y().unwrap());
            let (x2, y2) = (q.x().unwrap(), q.y().unwrap());
            let slope = if x1 == x2 {
                if (&y1 + &y2).is_zero() {
                    return RationalPoint::Identity;
                }
                // tangent
                let three = BigRational::from(BigInt::from(3));
                let two = BigRational::from(BigInt::from(2));
                (three * &x1 * &x1 + BigRational::from(curve.a.clone())) / (two * &y1)
            } else {
                (&y2 - &y1) / (&x2 - &x1)
            };
            let x3 = &slope * &slope - &x1 - &x2;
            let y3 = &slope * (&x1 - &x3) - &y1;
            RationalPoint::from_xy_unchecked(x3, y3)
        }
    }
}

pub fn sub(p: &RationalPoint, q: &RationalPoint, curve: &Curve) -> RationalPoint {
    add(p, &q.neg(), curve)
}

/// n*P by double-and-add.
pub fn scalar_mul(n: &BigInt, p: &RationalPoint, curve: &Curve) -> RationalPoint {
    if n.is_zero() || p.is_identity() {
        return RationalPoint::Identity;
    }
    let (base, mag) = if n.is_negative() { (p.neg(), -n) } else { (p.clone(), n.clone()) };
    let mut acc = RationalPoint::Identity;
    let bits = mag.bits();
    for i in (0..bits).rev() {
        acc = add(&acc, &acc, curve);
        if mag.bit(i) {
            acc = add(&acc, &base, curve);
        }
    }
    acc
}

pub fn scalar_mul_i64(n: i64, p: &RationalPoint, curve: &Curve) -> RationalPoint {
    scalar_mul(&BigInt::from(n), p, curve)
}

/// The finite places q_1 < ... < q_{s-1} plus infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceSet {
    pub finite_primes: Vec<u64>,
    pub s: usize,
    /// Largest finite prime; absent when s = 1.
    pub q_max: Option<u64>,
}

impl PlaceSet {
    pub fn new(mut finite_primes: Vec<u64>) -> Result<Self> {
        finite_primes.sort_unstable();
        finite_primes.dedup();
        for &q in &finite_primes {
            if q == 2 {
                return Err(Error::EvenCharacteristic);
            }
            if !is_prime_u64(q) {
                return Err(Error::InvalidSpec(format!("{q} is not prime")));
            }
            if q > (1 << 31) {
                return Err(Error::Unsupported(format!("finite place {q} too large")));
            }
        }
        let s = finite_primes.len() + 1;
        let q_max = finite_primes.last().copied();
        Ok(PlaceSet { finite_primes, s, q_max })
    }

    pub fn infinity_only() -> Self {
        PlaceSet { finite_primes: Vec::new(), s: 1, q_max: None }
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = 37u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Torsion subgroup data: order g and the explicit point list (identity included).
#[derive(Clone, Debug)]
pub struct TorsionData {
    pub g: u64,
    pub torsion_points: Vec<RationalPoint>,
}

/// naive count of the reduced curve over F_q,
/// including the point at infinity.
pub fn count_points_mod_q(curve: &Curve, q: u64) -> Result<u64> {
    if q == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if (&curve.discriminant() % BigInt::from(q)).is_zero() {
        return Err(Error::BadReduction { q });
    }
    let a = mod_u64(&curve.a, q);
    let b = mod_u64(&curve.b, q);
    // quadratic residue table
    let mut is_square = vec![false; q as usize];
    let mut y = 0u64;
    while y < q {
        is_square[((y as u128 * y as u128) % q as u128) as usize] = true;
        y += 1;
    }
    let mut count = 1u64; // infinity
    for x in 0..q {
        let x = x as u128;
        let fx = ((x * x % q as u128 * x + a as u128 * x + b as u128) % q as u128) as u64;
        if fx == 0 {
            count += 1;
        } else if is_square[fx as usize] {
            count += 2;
        }
    }
    Ok(count)
}

pub fn mod_u64(v: &BigInt, q: u64) -> u64 {
    let m = v.mod_floor(&BigInt::from(q));
    let (_, digits) = m.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

/// Reduction of a rational point modulo a prime of good reduction.
/// Returns None for the point at infinity of the reduced curve.
pub fn reduce_mod_q(p: &RationalPoint, q: u64) -> Option<(u64, u64)> {
    match p {
        RationalPoint::Identity => None,
        RationalPoint::Affine { xi, eta, zeta } => {
            let z = mod_u64(zeta, q);
            if z == 0 {
                return None;
            }
            let zinv = mod_inverse(z, q);
            let z2 = mulmod(zinv, zinv, q);
            let z3 = mulmod(z2, zinv, q);
            Some((mulmod(mod_u64(xi, q), z2, q), mulmod(mod_u64(eta, q), z3, q)))
        }
    }
}

pub fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn mod_inverse(a: u64, q: u64) -> u64 {
    // extended Euclid; q prime, a != 0 mod q
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (q as i128, (a % q) as i128);
    while newr != 0 {
        let quot = r / newr;
        (t, newt) = (newt, t - quot * newt);
        (r, newr) = (newr, r - quot * newr);
    }
    debug_assert_eq!(r, 1);
    (((t % q as i128) + q as i128) % q as i128) as u64
}

/// Group law on the reduced curve over F_q (good reduction, q odd).
pub fn add_mod_q(
    p: Option<(u64, u64)>,
    r: Option<(u64, u64)>,
    a: u64,
    q: u64,
) -> Option<(u64, u64)> {
    match (p, r) {
        (None, v) => v,
        (v, None) => v,
        (Some((x1, y1)), Some((x2, y2))) => {
            let slope = if x1 == x2 {
                if (y1 + y2) % q == 0 {
                    return None;
                }
                let num = (3 * mulmod(x1, x1, q) % q + a) % q;
                mulmod(num, mod_inverse(2 * y1 % q, q), q)
            } else {
                let num = (y2 + q - y1) % q;
                mulmod(num, mod_inverse((x2 + q - x1) % q, q), q)
            };
            let x3 = (mulmod(slope, slope, q) + 2 * q - x1 - x2) % q;
            let y3 = (mulmod(slope, (x1 + q - x3) % q, q) + q - y1 % q) % q;
            Some((x3, y3))
        }
    }
}

/// Torsion subgroup via Lutz-Nagell on the short form.
///
/// Candidates are integral points with eta = 0 or eta^2 | Delta; a candidate
/// is torsion iff k*P = O for some k <= 12 (Mazur).
pub fn torsion_subgroup(curve: &Curve) -> TorsionData {
    let delta = curve.discriminant().abs();
    let mut etas = vec![BigInt::zero()];
    // all eta > 0 with eta^2 | Delta
    for d in square_divisor_roots(&delta) {
        if !d.is_zero() {
            etas.push(d);
        }
    }
    let mut points = vec![RationalPoint::Identity];
    for eta in &etas {
        // integer roots of x^3 + a x + (b - eta^2)
        let c = &curve.b - eta * eta;
        for x in integer_cubic_roots(&curve.a, &c) {
            let cand = RationalPoint::Affine { xi: x.clone(), eta: eta.clone(), zeta: BigInt::one() };
            if !curve.contains(&cand) {
                continue;
            }
            if point_order_at_most(&cand, curve, 12).is_some() {
                if !points.contains(&cand) {
                    points.push(cand.clone());
                }
                let n = cand.neg();
                if !points.contains(&n) {
                    points.push(n);
                }
            }
        }
    }
    TorsionData { g: points.len() as u64, torsion_points: points }
}

/// Order of P if it is at most `cap`, else None.
pub fn point_order_at_most(p: &RationalPoint, curve: &Curve, cap: u64) -> Option<u64> {
    let mut acc = p.clone();
    for k in 1..=cap {
        if acc.is_identity() {
            return Some(k - 1).filter(|&o| o > 0);
        }
        acc = add(&acc, p, curve);
    }
    if acc.is_identity() {
        Some(cap)
    } else {
        None
    }
}

/// Miller-Rabin primality test; deterministic for inputs below 3.3 * 10^24.
pub fn is_probable_prime(n: &BigInt) -> bool {
    use num_bigint::Sign;
    if n < &BigInt::from(2) {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let pb = BigInt::from(p);
        if n == &pb {
            return true;
        }
        if (n % pb).is_zero() {
            return false;
        }
    }
    let n_minus_1: BigInt = n - 1;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from_slice(Sign::Plus, &[2]), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of |n| by trial division plus Pollard rho (Brent).
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut m = n.abs();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    if m <= BigInt::one() {
        return factors;
    }
    for p in [2u32, 3, 5] {
        let pb = BigInt::from(p);
        let mut e = 0u32;
        while (&m % &pb).is_zero() {
            m = &m / &pb;
            e += 1;
        }
        if e > 0 {
            factors.push((pb, e));
        }
    }
    let mut d = BigInt::from(7);
    let step = [4u32, 2, 4, 2, 4, 6, 2, 6]; // wheel mod 30
    let mut i = 0usize;
    while (&d * &d) <= m && d < BigInt::from(1u64 << 20) {
        if (&m % &d).is_zero() {
            let mut e = 0u32;
            while (&m % &d).is_zero() {
                m = &m / &d;
                e += 1;
            }
            factors.push((d.clone(), e));
        }
        d += step[i];
        i = (i + 1) % 8;
    }
    // split the remaining cofactor with Pollard rho
    let mut stack = Vec::new();
    if m > BigInt::one() {
        stack.push(m);
    }
    let mut found: Vec<BigInt> = Vec::new();
    while let Some(c) = stack.pop() {
        if is_probable_prime(&c) {
            found.push(c);
            continue;
        }
        let r = c.sqrt();
        if &r * &r == c {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let f = pollard_rho(&c);
        stack.push(&c / &f);
        stack.push(f);
    }
    found.sort();
    let mut k = 0;
    while k < found.len() {
        let p = found[k].clone();
        let mut e = 0u32;
        while k < found.len() && found[k] == p {
            e += 1;
            k += 1;
        }
        factors.push((p, e));
    }
    factors.sort();
    factors
}

fn pollard_rho(n: &BigInt) -> BigInt {
    // Brent's cycle variant; n is odd, composite, not a perfect square
    let mut c = BigInt::one();
    loop {
        let mut x = BigInt::from(2);
        let mut y = x.clone();
        let mut d = BigInt::one();
        let mut count = 0u64;
        while d.is_one() {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = (&x - &y).abs();
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
            count += 1;
            if count > 1 << 26 {
                break;
            }
        }
        if d > BigInt::one() && &d < n {
            return d;
        }
        c += 1;
    }
}

/// All positive integers d with d^2 | n (n != 0), i.e. the square divisors' roots.
fn square_divisor_roots(n: &BigInt) -> Vec<BigInt> {
    let factors = factorize(n);
    let mut roots = vec![BigInt::one()];
    for (p, e) in factors {
        let half = e / 2;
        if half == 0 {
            continue;
        }
        let mut next = Vec::new();
        for r in &roots {
            let mut pw = BigInt::one();
            for _ in 0..=half {
                next.push(r * &pw);
                pw = &pw * &p;
            }
        }
        next.sort();
        next.dedup();
        roots = next;
    }
    roots
}

/// Integer roots of the monic cubic x^3 + a x + c, by exact bisection on
/// the (at most three) monotone segments.
pub fn integer_cubic_roots(a: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let g = |x: &BigInt| -> BigInt { x * x * x + a * x + c };
    // Cauchy-style root bound: |x| <= 1 + max(|a|, |c|)
    let bound = BigInt::one() + a.abs().max(c.abs());
    // critical points at +-sqrt(-a/3) when a < 0
    let mut cuts = vec![-&bound, bound.clone()];
    if a.is_negative() {
        // bracket each critical point +-sqrt(-a/3) between consecutive integers
        let r = (-a / BigInt::from(3)).sqrt();
        let r1 = &r + 1;
        cuts.push(-&r1);
        cuts.push(-&r);
        cuts.push(r);
        cuts.push(r1);
    }
    cuts.sort();
    cuts.dedup();
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0].clone(), w[1].clone());
        let (glo, ghi) = (g(&lo), g(&hi));
        if glo.is_zero() && !roots.contains(&lo) {
            roots.push(lo.clone());
        }
        if ghi.is_zero() && !roots.contains(&hi) {
            roots.push(hi.clone());
        }
        if glo.sign() == ghi.sign() || glo.is_zero() || ghi.is_zero() {
            continue;
        }
        let increasing = glo.is_negative();
        while &hi - &lo > BigInt::one() {
            let mid = (&lo + &hi) / 2;
            let gm = g(&mid);
            if gm.is_zero() {
                if !roots.contains(&mid) {
                    roots.push(mid);
                }
                break;
            }
            let go_right = gm.is_negative() == increasing;
            if go_right {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    roots.sort();
    roots
}

/// m_q = lcm(g, N_q), valid at primes of good reduction.
pub fn multiplier_m(curve: &Curve, q: u64, g: u64) -> Result<u64> {
    let nq = count_points_mod_q(curve, q)?;
    Ok(lcm_u64(g, nq))
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd_u64(b, a % b) }
}

/// q-adic valuation of the x-coordinate; None for the identity.
pub fn x_valuation(p: &RationalPoint, q: u64) -> Option<i64> {
    match p {
        RationalPoint::Identity => None,
        RationalPoint::Affine { xi, zeta, .. } => {
            let qb = BigInt::from(q);
            Some(int_valuation(xi, &qb) - 2 * int_valuation(zeta, &qb))
        }
    }
}

pub fn int_valuation(n: &BigInt, q: &BigInt) -> i64 {
    if n.is_zero() {
        return i64::MAX / 4;
    }
    let mut v = 0i64;
    let mut m = n.clone();
    loop {
        let (quo, rem) = m.div_rem(q);
        if rem.is_zero() {
            v += 1;
            m = quo;
        } else {
            return v;
        }
    }
}

/// Smallest multiplier m such that m*P lies in E_1(Q_q) for every basis point
/// and m kills the torsion subgroup.
///
/// At primes of good reduction this starts from lcm(g, N_q); otherwise the
/// entry order of each point into E_1 is found by direct search, which keeps
/// curves usable whose given model is non-minimal at q (the curve itself may
/// still have good reduction there).
pub fn multiplier_for_basis(
    curve: &Curve,
    q: u64,
    g: u64,
    basis: &[RationalPoint],
) -> Result<u64> {
    let good = !(&curve.discriminant() % BigInt::from(q)).is_zero();
    let mut m = if good { multiplier_m(curve, q, g)? } else { g };
    if !good {
        // entry order of P into E_1 = order of the image of P in E(Q_q)/E_1
        for p in basis {
            let mut k = 1u64;
            let mut acc = p.clone();
            let entry;
            loop {
                if acc.is_identity() || x_valuation(&acc, q).unwrap() <= -2 {
                    entry = k;
                    break;
                }
                k += 1;
                if k > 4000 {
                    return Err(Error::BadReduction { q });
                }
                acc = add(&acc, p, curve);
            }
            m = lcm_u64(m, entry);
        }
    }
    // a-posteriori guarantee, also catches non-minimal models at good q|model quirks
    let mut factor = 1u64;
    'outer: loop {
        let mm = m * factor;
        for p in basis {
            let mp = scalar_mul(&BigInt::from(mm), p, curve);
            if !mp.is_identity() && x_valuation(&mp, q).unwrap() > -2 {
                factor *= q;
                if factor > q.pow(6) {
                    return Err(Error::BadReduction { q });
                }
                continue 'outer;
            }
        }
        return Ok(mm);
    }
}

#[derive(Clone, Debug)]
pub struct CoordMap {
    pub a1: BigInt,
    pub a3: BigInt,
    pub b2: BigInt,
    pub identity_map: bool,
}

impl CoordMap {
    /// (x, y) on the long curve -> (X, Y) on the short curve.
    pub fn forward(&self, x: &BigRational, y: &BigRational) -> (BigRational, BigRational) {
        if self.identity_map {
            return (x.clone(), y.clone());
        }
        let xx = BigRational::from(BigInt::from(36)) * x + BigRational::from(BigInt::from(3) * &self.b2);
        let yy = BigRational::from(BigInt::from(216)) * y
            + BigRational::from(BigInt::from(108))
                * (BigRational::from(self.a1.clone()) * x + BigRational::from(self.a3.clone()));
        (xx, yy)
    }

    /// (X, Y) on the short curve -> (x, y) on the long curve.
    pub fn backward(&self, xx: &BigRational, yy: &BigRational) -> (BigRational, BigRational) {
        if self.identity_map {
            return (xx.clone(), yy.clone());
        }
        let x = (xx - BigRational::from(BigInt::from(3) * &self.b2))
            / BigRational::from(BigInt::from(36));
        let y = (yy / BigRational::from(BigInt::from(216)))
            - (BigRational::from(self.a1.clone()) * &x + BigRational::from(self.a3.clone()))
                / BigRational::from(BigInt::from(2));
        (x, y)
    }
}

/// complete the square and cube with the u = 6 scaling
/// X = 36x + 3b2, Y = 216y + 108(a1 x + a3), giving Y^2 = X^3 - 27c4 X - 54c6.
pub fn long_to_short(coeffs: &[BigInt; 5]) -> Result<(Curve, CoordMap)> {
    let [a1, a2, a3, a4, a6] = coeffs.clone();
    if a1.is_zero() && a2.is_zero() && a3.is_zero() {
        let curve = validate_curve(a4, a6)?;
        return Ok((curve, CoordMap { a1, a3, b2: BigInt::zero(), identity_map: true }));
    }
    let b2 = &a1 * &a1 + BigInt::from(4) * &a2;
    let b4 = BigInt::from(2) * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + BigInt::from(4) * &a6;
    let c4 = &b2 * &b2 - BigInt::from(24) * &b4;
    let c6 = -(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - BigInt::from(216) * &b6;
    let curve = validate_curve(BigInt::from(-27) * &c4, BigInt::from(-54) * &c6)?;
    Ok((curve, CoordMap { a1, a3, b2, identity_map: false }))
}
