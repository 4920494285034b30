//! Orchestration: problem parsing, bound assembly, logarithms, iterated
//! reduction, final enumeration and the residual search, plus the output
//! document in text and JSON form.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_n0, bound_n1, c5_real, c8_constant, c9_constant, c9_real_constant, david_bound_inputs,
    extra_search_exponents, hajdu_herendi_constants, threshold_x0,
};
use crate::curve::{
    add, long_to_short, multiplier_for_basis, scalar_mul, torsion_subgroup, validate_curve,
    CoordMap, Curve, PlaceSet, RationalPoint,
};
use crate::ellog::{compute_periods, normalized_logs};
use crate::error::{Error, Result};
use crate::heights::{canonical_height, gram_matrix, height_difference_c2, regulator_and_lambda, HeightContext};
use crate::padic::{build_formal_series, padic_elliptic_log};
use crate::real::Real;
use crate::reduction::{reduction_driver, ReductionInput, TraceEntry};
use crate::search::{
    enumerate_candidates, extra_search, factor_zeta, QuickFilter, SearchContext, SolutionRecord,
};

/// Which initial bound feeds the reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialBound {
    /// min(N0', N1) when s = 1, N0 otherwise.
    Auto,
    N0,
    N0Prime,
    N1,
}

/// Tunable knobs with documented ranges.
#[derive(Clone, Debug)]
pub struct Config {
    /// Truncation order t of the formal q-adic integral (50..=400).
    pub t: usize,
    /// Degree of the formal series expansion (>= t + 10).
    pub series_degree: usize,
    /// Reduction iteration cap (4..=200).
    pub iteration_cap: usize,
    pub initial_bound: InitialBound,
    /// Working precision in bits for heights and constants (128..=4096).
    pub height_prec: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            t: 200,
            series_degree: 210,
            iteration_cap: 60,
            initial_bound: InitialBound::Auto,
            height_prec: 256,
        }
    }
}

impl Config {
    fn validate(&self) -> Result<()> {
        if !(50..=400).contains(&self.t) {
            return Err(Error::InvalidSpec("config t out of range 50..=400".into()));
        }
        if self.series_degree < self.t + 10 {
            return Err(Error::InvalidSpec("series_degree must be >= t + 10".into()));
        }
        if !(4..=200).contains(&self.iteration_cap) {
            return Err(Error::InvalidSpec("iteration_cap out of range 4..=200".into()));
        }
        if !(128..=4096).contains(&self.height_prec) {
            return Err(Error::InvalidSpec("height_prec out of range 128..=4096".into()));
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str| Error::InvalidSpec(format!("bad config value for {k}"));
        match key {
            "t" => self.t = value.parse().map_err(|_| bad(key))?,
            "series_degree" => self.series_degree = value.parse().map_err(|_| bad(key))?,
            "iteration_cap" => self.iteration_cap = value.parse().map_err(|_| bad(key))?,
            "height_prec" => self.height_prec = value.parse().map_err(|_| bad(key))?,
            "initial_bound" => {
                self.initial_bound = match value {
                    "auto" => InitialBound::Auto,
                    "n0" => InitialBound::N0,
                    "n0prime" => InitialBound::N0Prime,
                    "n1" => InitialBound::N1,
                    _ => return Err(bad(key)),
                }
            }
            _ => return Err(Error::InvalidSpec(format!("unknown config key {key}"))),
        }
        Ok(())
    }
}

/// A fully validated problem: short-form curve, places, basis.
pub struct ProblemSpec {
    pub curve: Curve,
    /// Present when the input was a long Weierstrass model; records map to
    /// the short model this run actually solves.
    pub coord_map: Option<CoordMap>,
    pub places: PlaceSet,
    pub basis: Vec<RationalPoint>,
    pub torsion_override: Option<Vec<RationalPoint>>,
    pub config: Config,
}

// ---------------------------------------------------------------------------
// JSON input format (big integers as decimal strings)

#[derive(Deserialize)]
struct RawProblem {
    curve: RawCurve,
    #[serde(default)]
    s_primes: Vec<u64>,
    basis: Vec<RawPoint>,
    #[serde(default)]
    torsion: Option<Vec<RawPoint>>,
    #[serde(default)]
    config: Option<RawConfig>,
}

#[derive(Deserialize)]
struct RawCurve {
    a: Option<String>,
    b: Option<String>,
    a1: Option<String>,
    a2: Option<String>,
    a3: Option<String>,
    a4: Option<String>,
    a6: Option<String>,
}

#[derive(Deserialize)]
struct RawPoint {
    x: String,
    y: String,
}

#[derive(Deserialize, Default)]
struct RawConfig {
    t: Option<usize>,
    series_degree: Option<usize>,
    iteration_cap: Option<usize>,
    height_prec: Option<usize>,
    initial_bound: Option<String>,
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("not a decimal integer: {s:?}")))
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num = parse_bigint(n)?;
        let den = parse_bigint(d)?;
        if den.is_zero() {
            return Err(Error::InvalidSpec("zero denominator".into()));
        }
        Ok(BigRational::new(num, den))
    } else {
        Ok(BigRational::from(parse_bigint(s)?))
    }
}

use num_traits::Zero;

/// Parse and validate a JSON problem document.
pub fn parse_problem(json: &str) -> Result<ProblemSpec> {
    let raw: RawProblem = serde_json::from_str(json)
        .map_err(|e| Error::InvalidSpec(format!("JSON parse error: {e}")))?;
    let (curve, coord_map) = match (&raw.curve.a, &raw.curve.b) {
        (Some(a), Some(b)) => (validate_curve(parse_bigint(a)?, parse_bigint(b)?)?, None),
        _ => {
            let get = |v: &Option<String>| -> Result<BigInt> {
                v.as_deref().map(parse_bigint).unwrap_or(Ok(BigInt::zero()))
            };
            let coeffs = [
                get(&raw.curve.a1)?,
                get(&raw.curve.a2)?,
                get(&raw.curve.a3)?,
                get(&raw.curve.a4)?,
                get(&raw.curve.a6)?,
            ];
            let (c, m) = long_to_short(&coeffs)?;
            (c, Some(m))
        }
    };
    let places = if raw.s_primes.is_empty() {
        PlaceSet::infinity_only()
    } else {
        PlaceSet::new(raw.s_primes)?
    };
    let mut basis = Vec::new();
    for p in &raw.basis {
        let (mut x, mut y) = (parse_rational(&p.x)?, parse_rational(&p.y)?);
        if let Some(m) = &coord_map {
            let (xx, yy) = m.forward(&x, &y);
            x = xx;
            y = yy;
        }
        basis.push(RationalPoint::from_xy(x, y, &curve)?);
    }
    let torsion_override = match &raw.torsion {
        None => None,
        Some(list) => {
            let mut pts = Vec::new();
            for p in list {
                let (mut x, mut y) = (parse_rational(&p.x)?, parse_rational(&p.y)?);
                if let Some(m) = &coord_map {
                    let (xx, yy) = m.forward(&x, &y);
                    x = xx;
                    y = yy;
                }
                pts.push(RationalPoint::from_xy(x, y, &curve)?);
            }
            Some(pts)
        }
    };
    let mut config = Config::default();
    if let Some(rc) = raw.config {
        if let Some(v) = rc.t {
            config.t = v;
        }
        if let Some(v) = rc.series_degree {
            config.series_degree = v;
        }
        if let Some(v) = rc.iteration_cap {
            config.iteration_cap = v;
        }
        if let Some(v) = rc.height_prec {
            config.height_prec = v;
        }
        if let Some(v) = rc.initial_bound {
            config.set("initial_bound", &v)?;
        }
    }
    config.validate()?;
    Ok(ProblemSpec { curve, coord_map, places, basis, torsion_override, config })
}

// ---------------------------------------------------------------------------
// Output document

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LedgerEntry {
    pub name: String,
    /// Decimal scientific notation.
    pub value: String,
    /// "up" | "down" | "exact": the direction the stored value was rounded,
    /// so that it stays a valid bound.
    pub rounding: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TraceOut {
    pub iteration: usize,
    /// "inf" or the prime.
    pub place: String,
    /// log10 C at infinity, mu at a finite place.
    pub scale: i64,
    pub bound: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RecordOut {
    pub index: usize,
    pub xi: String,
    pub eta: String,
    pub zeta: String,
    pub zeta_factorization: Vec<(u64, u32)>,
    pub coefficients: Vec<i64>,
    pub torsion_index: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Counts {
    /// Stored records (eta >= 0 representatives).
    pub stored: usize,
    /// Points counted with both signs (eta = 0 counted once).
    pub with_signs: usize,
    /// Integral (zeta = 1) points with both signs.
    pub integral_with_signs: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunResult {
    pub curve_a: String,
    pub curve_b: String,
    pub s_primes: Vec<u64>,
    pub rank: usize,
    pub torsion_order: u64,
    pub n_initial: String,
    /// Empty in bound-only mode.
    pub n_final: String,
    pub ledger: Vec<LedgerEntry>,
    pub trace: Vec<TraceOut>,
    pub records: Vec<RecordOut>,
    pub counts: Counts,
}

/// Deterministic scientific-notation rendering of a positive constant.
fn real_sci(v: &Real, digits: usize) -> String {
    if v.is_zero() {
        return "0".into();
    }
    let neg = v.is_negative();
    let a = v.abs();
    let log10 = (&a.ln() / &Real::from_i64(10, a.prec()).ln()).to_f64();
    let e = log10.floor();
    let mantissa = 10f64.powf(log10 - e);
    // guard against 9.99999... rounding over
    let (mantissa, e) = if mantissa >= 10.0 - 0.5 * 10f64.powi(-(digits as i32)) {
        (1.0, e + 1.0)
    } else {
        (mantissa, e)
    };
    format!("{}{:.*}e{}", if neg { "-" } else { "" }, digits, mantissa, e as i64)
}

// ---------------------------------------------------------------------------
// The pipeline

pub struct RunOptions {
    pub threads: usize,
    pub bound_only: bool,
    /// Include the reduction trace in the document.
    pub trace: bool,
    /// Stage-tagged progress lines on stderr.
    pub verbose: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { threads: 1, bound_only: false, trace: true, verbose: false }
    }
}

fn stage(opts: &RunOptions, tag: &str, msg: &str) {
    if opts.verbose {
        eprintln!("[{tag}] {msg}");
    }
}

/// Bits of precision the archimedean logs need to support the lattice
/// scalings derived from an initial bound with `d10` decimal digits.
fn real_log_bits(r: usize, d10: i64) -> usize {
    let digits = (r as i64 + 1) * d10 + 80;
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 96
}

/// q-adic digits needed for the scalings mu = r log_q N + retries.
fn padic_digits(r: usize, n: &BigInt, q: u64) -> i64 {
    let bits = n.bits() as f64;
    let logq = bits * std::f64::consts::LN_2 / (q as f64).ln();
    (r as f64 * logq).ceil() as i64 + 140
}

pub fn run_pipeline(spec: &ProblemSpec, opts: &RunOptions) -> Result<RunResult> {
    let t_start = Instant::now();
    let curve = &spec.curve;
    let places = &spec.places;
    let config = &spec.config;
    config.validate()?;
    let r = spec.basis.len();
    let prec = config.height_prec;
    let s = places.s;

    // -- torsion
    let torsion_nonid: Vec<RationalPoint> = match &spec.torsion_override {
        Some(list) => {
            let mut pts = list.clone();
            pts.retain(|p| !p.is_identity());
            pts
        }
        None => {
            let t = torsion_subgroup(curve);
            t.torsion_points.into_iter().filter(|p| !p.is_identity()).collect()
        }
    };
    let g = torsion_nonid.len() as u64 + 1;
    stage(opts, "torsion", &format!("order g = {g}"));

    // -- heights and the Mordell-Weil data
    let ctx = HeightContext::new(curve, prec);
    let gram = gram_matrix(&ctx, &spec.basis)?;
    let (regulator, lambda) = regulator_and_lambda(&gram, prec)?;
    let c2 = height_difference_c2(curve, prec);
    stage(
        opts,
        "heights",
        &format!(
            "R = {:.7}, lambda = {:.7}, c2 = {:.4} [{:.1?}]",
            regulator.to_f64(),
            lambda.to_f64(),
            c2.to_f64(),
            t_start.elapsed()
        ),
    );

    // -- explicit height bounds
    let (c3, c4, c1, c1_prime) = hajdu_herendi_constants(&curve.delta0, &curve.a, places, prec);
    let n0 = bound_n0(&c1, &c2, &lambda);
    let n0_prime = bound_n0(&c1_prime, &c2, &lambda);
    stage(
        opts,
        "bounds",
        &format!("N0 = {}, N0' = {}", real_sci(&n0, 4), real_sci(&n0_prime, 4)),
    );

    // -- periods and archimedean logs (constants precision first)
    let periods_lo = compute_periods(curve, prec.max(320))?;
    let omega = periods_lo.omega.with_prec(prec);
    let c5 = c5_real(g, &omega);
    let c8 = c8_constant(&c2, s);
    let c9_padic = c9_constant(&lambda, s);
    let c9_real = c9_real_constant(&lambda);
    let c2_over_s = &c2 / &Real::from_i64(s as i64, prec);

    // N1 (David-type alternative; the comparison needs the basis heights)
    let mut hhat = Vec::with_capacity(r);
    for p in &spec.basis {
        hhat.push(canonical_height(&ctx, p)?);
    }
    let logs_lo = normalized_logs(&spec.basis, g, curve, &periods_lo, prec.max(320))?;
    let u_lo: Vec<Real> = logs_lo.iter().map(|l| l.u_prime.with_prec(prec)).collect();
    let tau_im = periods_lo.tau.im.with_prec(prec);
    let david = david_bound_inputs(curve, &lambda, &omega, g, &hhat, &u_lo, &tau_im, prec);
    let n1 = bound_n1(&david);
    stage(opts, "bounds", &format!("N1 = {}", real_sci(&n1, 4)));

    // -- initial bound selection
    let pick = |which: InitialBound| -> Real {
        match which {
            InitialBound::N0 => n0.clone(),
            InitialBound::N0Prime => n0_prime.clone(),
            InitialBound::N1 => n1.clone(),
            InitialBound::Auto => {
                if s == 1 {
                    n0_prime.min(&n1)
                } else {
                    n0.clone()
                }
            }
        }
    };
    let n_init_real = pick(config.initial_bound);
    let n_init = n_init_real.ceil_bigint();
    stage(opts, "bounds", &format!("initial bound {}", real_sci(&n_init_real, 4)));

    // -- residual-region data
    let (x0, m_shift, mu_exp) = threshold_x0(curve, prec);
    let cutoff = x0.max(&mu_exp);
    let alpha_bounds = extra_search_exponents(places, &cutoff);

    // -- ledger
    let mut ledger = vec![
        entry("c1", &c1, "up"),
        entry("c1_prime", &c1_prime, "up"),
        entry("c2", &c2, "up"),
        entry("c3", &c3, "up"),
        entry("c4", &c4, "up"),
        entry("c5_real", &c5, "up"),
        entry("c8", &c8, "up"),
        entry("c9_real", &c9_real, "down"),
        entry("c9_padic", &c9_padic, "down"),
        entry("lambda", &lambda, "down"),
        entry("regulator", &regulator, "down"),
        entry("omega", &omega, "down"),
        entry("N0", &n0, "up"),
        entry("N0_prime", &n0_prime, "up"),
        entry("N1", &n1, "up"),
        entry("x0", &x0, "up"),
        entry("M_shift", &m_shift, "up"),
        entry("exp_mu_inf", &mu_exp, "up"),
        entry("cutoff", &cutoff, "up"),
    ];
    for (q, cap) in &alpha_bounds {
        ledger.push(LedgerEntry {
            name: format!("alpha_cap_{q}"),
            value: cap.to_string(),
            rounding: "exact".into(),
        });
    }

    let base = RunResult {
        curve_a: curve.a.to_string(),
        curve_b: curve.b.to_string(),
        s_primes: places.finite_primes.clone(),
        rank: r,
        torsion_order: g,
        n_initial: n_init.to_string(),
        n_final: String::new(),
        ledger,
        trace: Vec::new(),
        records: Vec::new(),
        counts: Counts { stored: 0, with_signs: 0, integral_with_signs: 0 },
    };
    if opts.bound_only {
        return Ok(base);
    }
    let mut result = base;

    // -- high-precision logs
    let d10 = n_init.to_string().len() as i64;
    let (n_final, trace) = if r == 0 {
        (BigInt::zero(), Vec::new())
    } else {
        let bits = real_log_bits(r, d10);
        let periods = compute_periods(curve, bits)?;
        let logs = normalized_logs(&spec.basis, g, curve, &periods, bits)?;
        let egg = logs.iter().any(|l| l.on_egg);
        let u_hi: Vec<Real> = logs.iter().map(|l| l.u_prime.clone()).collect();
        stage(
            opts,
            "ell_log",
            &format!("archimedean logs at {bits} bits, egg = {egg} [{:.1?}]", t_start.elapsed()),
        );

        let series = build_formal_series(
            &[
                BigInt::zero(),
                BigInt::zero(),
                BigInt::zero(),
                curve.a.clone(),
                curve.b.clone(),
            ],
            config.series_degree,
            config.t,
        );
        let mut padic_logs = Vec::new();
        for q in &places.finite_primes {
            let m = multiplier_for_basis(curve, *q, g, &spec.basis)?;
            let digits = padic_digits(r, &n_init, *q);
            let mut v = Vec::new();
            for p in &spec.basis {
                let mp = scalar_mul(&BigInt::from(m), p, curve);
                v.push(padic_elliptic_log(&mp, curve, *q, digits, &series)?);
            }
            stage(
                opts,
                "ell_log",
                &format!("q = {q}: m_q = {m}, {digits} digits [{:.1?}]", t_start.elapsed()),
            );
            result.ledger.push(LedgerEntry {
                name: format!("m_{q}"),
                value: m.to_string(),
                rounding: "exact".into(),
            });
            padic_logs.push((*q, v));
        }

        // -- iterated reduction
        let mut ln_c5c8 = &c5.ln() + &c2_over_s;
        if egg {
            ln_c5c8 = &ln_c5c8 + &Real::from_i64(2, prec).ln();
        }
        let input = ReductionInput {
            real_logs: &u_hi,
            egg_present: egg,
            padic_logs: &padic_logs,
            ln_c5c8: ln_c5c8.clone(),
            c2_over_s: c2_over_s.clone(),
            c9_real: c9_real.clone(),
            c9_padic: c9_padic.clone(),
        };
        let (n_final, trace) = reduction_driver(&input, &n_init, config.iteration_cap)?;
        stage(
            opts,
            "reduction",
            &format!("final bound {n_final} after {} steps [{:.1?}]", trace.len(), t_start.elapsed()),
        );

        // -- enumeration
        let n_cap = n_final
            .to_i64()
            .ok_or_else(|| Error::NonConvergence(format!("reduced bound {n_final} too large to enumerate")))?;
        // sound filter decay lambda/(2s): never sharper than any inequality
        // a true point satisfies
        let c9_filter = lambda.to_f64() / (2.0 * s as f64) * 0.999;
        let filter = QuickFilter::new(
            &u_hi.iter().map(|u| u.with_prec(160)).collect::<Vec<_>>(),
            &[],
            &padic_logs,
            ln_c5c8.to_f64() + 0.01,
            c2_over_s.to_f64() + 0.01,
            c9_filter,
        );
        let sctx = SearchContext {
            curve,
            basis: &spec.basis,
            torsion: &torsion_nonid,
            places,
            filter: &filter,
        };
        let mut records = enumerate_candidates(&sctx, n_cap, opts.threads)?;
        stage(
            opts,
            "search",
            &format!("{} records from enumeration [{:.1?}]", records.len(), t_start.elapsed()),
        );

        // -- residual search
        let cutoff_f = cutoff.to_f64();
        let extra = extra_search(curve, places, cutoff_f, &alpha_bounds);
        let mut missing = Vec::new();
        for (xi, eta, zeta) in &extra {
            if !records.iter().any(|rec| &rec.xi == xi && &rec.eta == eta && &rec.zeta == zeta) {
                missing.push((xi.clone(), eta.clone(), zeta.clone()));
            }
        }
        if !missing.is_empty() {
            // any residual-region point has a provably tiny coefficient
            // vector: lambda N^2 - c2 <= h(P) <= s log(cutoff) + log zeta^2
            let h_cap = s as f64 * cutoff_f.max(2.0).ln() + c2.to_f64() + 1.0;
            let cap = (h_cap / lambda.to_f64()).sqrt().ceil() as i64 + 1;
            let extra_records =
                resolve_extra(&sctx, &missing, cap.max(1))?;
            records.extend(extra_records);
            records.sort_by(|a, b| (&a.zeta, &a.xi, &a.eta).cmp(&(&b.zeta, &b.xi, &b.eta)));
            records.dedup_by(|a, b| a.xi == b.xi && a.eta == b.eta && a.zeta == b.zeta);
        }
        stage(
            opts,
            "search",
            &format!("{} records after residual search [{:.1?}]", records.len(), t_start.elapsed()),
        );

        // -- map back to the input model when the problem came in long form;
        // the forward map preserves S-integrality but its inverse divides by
        // 6^2, so some short-model records must be discarded here
        if let Some(map) = &spec.coord_map {
            if !map.identity_map {
                let mut mapped = Vec::with_capacity(records.len());
                for rec in records {
                    let z2 = &rec.zeta * &rec.zeta;
                    let x = BigRational::new(rec.xi.clone(), z2.clone());
                    let y = BigRational::new(rec.eta.clone(), &z2 * &rec.zeta);
                    let (x0, y0) = map.backward(&x, &y);
                    let dz = x0.denom().sqrt();
                    debug_assert_eq!(&dz * &dz, x0.denom().clone());
                    let mut core = dz.clone();
                    for q in &places.finite_primes {
                        let qb = BigInt::from(*q);
                        while (&core % &qb).is_zero() {
                            core /= &qb;
                        }
                    }
                    if core != BigInt::from(1) {
                        continue;
                    }
                    let eta0 = (&y0 * BigRational::from(&dz * &dz * &dz)).to_integer();
                    mapped.push(SolutionRecord {
                        xi: x0.numer().clone(),
                        eta: eta0,
                        zeta_factorization: factor_zeta(&dz, places),
                        zeta: dz,
                        coefficients: rec.coefficients,
                        torsion_index: rec.torsion_index,
                    });
                }
                mapped.sort_by(|a, b| (&a.zeta, &a.xi, &a.eta).cmp(&(&b.zeta, &b.xi, &b.eta)));
                records = mapped;
                stage(
                    opts,
                    "search",
                    &format!("{} records after mapping to the input model", records.len()),
                );
            }
        }

        // -- counts and output records
        let mut with_signs = 0usize;
        let mut integral = 0usize;
        // a point equals its own negative iff 2 eta + a1 xi zeta + a3 zeta^3
        // vanishes (a1 = a3 = 0 on a short model)
        let (a1c, a3c) = spec
            .coord_map
            .as_ref()
            .filter(|m| !m.identity_map)
            .map_or((BigInt::zero(), BigInt::zero()), |m| (m.a1.clone(), m.a3.clone()));
        for rec in &records {
            let sym = BigInt::from(2) * &rec.eta
                + &a1c * &rec.xi * &rec.zeta
                + &a3c * &rec.zeta * &rec.zeta * &rec.zeta;
            let both = if sym.is_zero() { 1 } else { 2 };
            with_signs += both;
            if rec.zeta == BigInt::from(1) {
                integral += both;
            }
        }
        result.records = records
            .iter()
            .enumerate()
            .map(|(i, rec)| RecordOut {
                index: i + 1,
                xi: rec.xi.to_string(),
                eta: rec.eta.to_string(),
                zeta: rec.zeta.to_string(),
                zeta_factorization: rec.zeta_factorization.clone(),
                coefficients: rec.coefficients.clone(),
                torsion_index: rec.torsion_index,
            })
            .collect();
        result.counts = Counts { stored: records.len(), with_signs, integral_with_signs: integral };
        (n_final, trace)
    };

    result.n_final = n_final.to_string();
    if opts.trace {
        result.trace = trace
            .iter()
            .map(|e: &TraceEntry| TraceOut {
                iteration: e.iteration,
                place: e.place.map_or("inf".into(), |q| q.to_string()),
                scale: e.scale,
                bound: e.bound.to_string(),
            })
            .collect();
    }
    stage(opts, "done", &format!("total {:.1?}", t_start.elapsed()));
    Ok(result)
}

fn entry(name: &str, v: &Real, rounding: &str) -> LedgerEntry {
    LedgerEntry { name: name.into(), value: real_sci(v, 12), rounding: rounding.into() }
}

/// Brute-force coefficient resolution for residual-region points that the
/// main enumeration did not produce (possible only below a tiny provable
/// cap on max |n_i|).
fn resolve_extra(
    ctx: &SearchContext,
    targets: &[(BigInt, BigInt, BigInt)],
    cap: i64,
) -> Result<Vec<SolutionRecord>> {
    let r = ctx.basis.len();
    let mut out = Vec::new();
    let mut remaining: Vec<_> = targets.to_vec();
    let mut v = vec![-cap; r];
    'outer: loop {
        let torsion_slots = ctx.torsion.len() + 1;
        for t in 0..torsion_slots {
            if remaining.is_empty() {
                break 'outer;
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
            if let RationalPoint::Affine { xi, eta, zeta } = &p {
                let eta_abs = eta.abs();
                if let Some(pos) = remaining
                    .iter()
                    .position(|(a, b, z)| a == xi && b == &eta_abs && z == zeta)
                {
                    let (xi, eta, zeta) = remaining.remove(pos);
                    let coeffs: Vec<i64> =
                        if eta_abs == eta { v.clone() } else { v.iter().map(|x| -x).collect() };
                    // torsion index must match the stored sign convention
                    let t_idx = if eta_abs == eta || t == 0 {
                        t
                    } else {
                        let nt = ctx.torsion[t - 1].neg();
                        1 + ctx
                            .torsion
                            .iter()
                            .position(|x| *x == nt)
                            .ok_or_else(|| Error::InvalidSpec("torsion list not closed under negation".into()))?
                    };
                    out.push(SolutionRecord {
                        zeta_factorization: factor_zeta(&zeta, ctx.places),
                        xi,
                        eta,
                        zeta,
                        coefficients: coeffs,
                        torsion_index: t_idx,
                    });
                }
            }
        }
        // odometer
        let mut i = r;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if v[i] < cap {
                v[i] += 1;
                break;
            }
            v[i] = -cap;
        }
    }
    if !remaining.is_empty() {
        return Err(Error::NonConvergence(format!(
            "residual-region point {:?} has no coefficient vector with max|n_i| <= {cap}",
            remaining[0]
        )));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Output formatting

/// Text table in the classical layout: #, xi, eta, zeta, the factorization
/// of zeta over S, and the coefficient vector.
pub fn format_text(res: &RunResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "curve: y^2 = x^3 + ({})x + ({})\n",
        res.curve_a, res.curve_b
    ));
    out.push_str(&format!(
        "S = {{{}, inf}}   rank = {}   torsion order = {}\n",
        res.s_primes.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", "),
        res.rank,
        res.torsion_order
    ));
    out.push_str(&format!("initial bound: {}\n", res.n_initial));
    if !res.n_final.is_empty() {
        out.push_str(&format!("reduced bound: {}\n", res.n_final));
    }
    out.push('\n');
    out.push_str("bound ledger:\n");
    for e in &res.ledger {
        out.push_str(&format!("  {:<12} = {:<22} ({})\n", e.name, e.value, e.rounding));
    }
    if !res.trace.is_empty() {
        out.push('\n');
        out.push_str("reduction trace (iteration, place, scale, bound):\n");
        for t in &res.trace {
            out.push_str(&format!(
                "  {:>2}  {:>4}  {:>6}  {}\n",
                t.iteration, t.place, t.scale, t.bound
            ));
        }
    }
    if res.n_final.is_empty() {
        return out;
    }
    out.push('\n');
    out.push_str(&format!(
        "{} points up to sign ({} with both signs, {} integral):\n",
        res.counts.stored, res.counts.with_signs, res.counts.integral_with_signs
    ));
    out.push_str(&format!(
        "{:>4}  {:>22} {:>22} {:>8}  {:<12} {}\n",
        "#", "xi", "eta", "zeta", "zeta factors", "coefficients"
    ));
    for r in &res.records {
        let zf = if r.zeta_factorization.is_empty() {
            "1".to_string()
        } else {
            r.zeta_factorization
                .iter()
                .map(|(q, e)| if *e == 1 { q.to_string() } else { format!("{q}^{e}") })
                .collect::<Vec<_>>()
                .join("x")
        };
        let coeffs = format!(
            "({})",
            r.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        let coeffs = if r.torsion_index > 0 {
            format!("{coeffs}+T{}", r.torsion_index)
        } else {
            coeffs
        };
        out.push_str(&format!(
            "{:>4}  {:>22} {:>22} {:>8}  {:<12} {}\n",
            r.index, r.xi, r.eta, r.zeta, zf, coeffs
        ));
    }
    out
}

pub fn to_json(res: &RunResult) -> String {
    serde_json::to_string_pretty(res).expect("result serialization cannot fail")
}

pub fn from_json(s: &str) -> Result<RunResult> {
    serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("result parse error: {e}")))
}
