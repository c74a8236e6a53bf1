//! Analytic bound calculators: rate estimates, one-stage recursions, staged
//! theorem traces, the list-ball bound and the BSC-to-BMS transfer.

use crate::channels::binary_entropy;
use crate::codes::{rm_rate_exact, RmParams};
use crate::error::{param, Error, Result};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::{E, LN_2, PI};
use std::fmt;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Standard Gaussian CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard Gaussian CDF on (0,1).
pub fn phi_inv(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return param(format!("Φ⁻¹ needs an argument in (0,1), got {u}"));
    }
    Ok(std_normal().inverse_cdf(u))
}

pub fn odds(x: f64) -> f64 {
    x / (1.0 - x)
}

pub fn from_odds(o: f64) -> f64 {
    if o.is_infinite() {
        1.0
    } else {
        o / (1.0 + o)
    }
}

/// c(p) = 1/(8 ln(1/λ)) with λ = min(p, 1-p).
pub fn level_k_constant(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return param(format!("p = {p} must lie in (0,1)"));
    }
    let lambda = p.min(1.0 - p);
    Ok(1.0 / (8.0 * (1.0 / lambda).ln()))
}

/// Exact rate of RM(r,m) against its Gaussian approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct RateBound {
    pub r: usize,
    pub m: usize,
    pub rate: Ratio<u128>,
    pub phi: f64,
    pub gap: f64,
    /// 1/√(2πm).
    pub gap_bound: f64,
    pub holds: bool,
}

/// |R(RM(r,m)) - Φ((2r-m)/√m)| against 1/√(2πm), for 0 <= r <= m, 1 <= m <= 64.
pub fn rate_phi_bound(r: usize, m: usize) -> Result<RateBound> {
    if m == 0 {
        return param("the Gaussian rate estimate needs m >= 1");
    }
    let params = RmParams::new(r, m)?;
    let rate = rm_rate_exact(params);
    let rate_f = ratio_to_f64(&rate);
    let phi = phi((2.0 * r as f64 - m as f64) / (m as f64).sqrt());
    let gap = (rate_f - phi).abs();
    let gap_bound = 1.0 / (2.0 * PI * m as f64).sqrt();
    Ok(RateBound {
        r,
        m,
        rate,
        phi,
        gap,
        gap_bound,
        holds: gap <= gap_bound,
    })
}

pub fn ratio_to_f64(x: &Ratio<u128>) -> f64 {
    // Both parts fit in 2^64 + 1 here, so the float quotient is accurate.
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

/// r = ⌊m/2 + √m Φ⁻¹(R)/2⌋ before any range check.
pub fn raw_order_for_rate(target_rate: f64, m: usize) -> Result<i64> {
    let z = phi_inv(target_rate)?;
    Ok((m as f64 / 2.0 + (m as f64).sqrt() * z / 2.0).floor() as i64)
}

/// The floor choice of r, clamped to 0..=m.
pub fn order_for_rate(target_rate: f64, m: usize) -> Result<usize> {
    Ok(raw_order_for_rate(target_rate, m)?.clamp(0, m as i64) as usize)
}

/// The floor choice of r for a target rate R and the window
/// R - 3/√(2πm) <= R(RM(r,m)) <= R + 1/√(2πm).
#[derive(Clone, Debug, PartialEq)]
pub struct FloorRateCheck {
    pub target_rate: f64,
    pub m: usize,
    pub r: usize,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    /// False when the floor formula leaves 0..=m; r is then clamped and the
    /// window is not claimed.
    pub in_range: bool,
    pub holds: bool,
}

pub fn floor_rate_check(target_rate: f64, m: usize) -> Result<FloorRateCheck> {
    if m == 0 {
        return param("m must be positive");
    }
    let raw = raw_order_for_rate(target_rate, m)?;
    let in_range = (0..=m as i64).contains(&raw);
    let r = raw.clamp(0, m as i64) as usize;
    let rate = ratio_to_f64(&rm_rate_exact(RmParams::new(r, m)?));
    let w = 1.0 / (2.0 * PI * m as f64).sqrt();
    let (lower, upper) = (target_rate - 3.0 * w, target_rate + w);
    Ok(FloorRateCheck {
        target_rate,
        m,
        r,
        rate,
        lower,
        upper,
        in_range,
        holds: lower <= rate && rate <= upper,
    })
}

/// R(RM(r,m)) - R(RM(r,m+k)) <= k/(2√m), returned as (drop, allowance).
pub fn rate_drop_check(r: usize, m: usize, k: usize) -> Result<(f64, f64, bool)> {
    if m == 0 {
        return param("m must be positive");
    }
    let r0 = ratio_to_f64(&rm_rate_exact(RmParams::new(r, m)?));
    let rk = ratio_to_f64(&rm_rate_exact(RmParams::new(r, m + k)?));
    let drop = r0 - rk;
    let allowance = k as f64 / (2.0 * (m as f64).sqrt());
    Ok((drop, allowance, drop <= allowance + 1e-15))
}

/// One stage of a recursive bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecursionKind {
    /// pe' = (1-ρ) pe² + ρ pe.
    BecTwoLook { rho: f64 },
    /// odds(pe') = odds(pe)/(2-ρ).
    BecOdds { rho: f64 },
    /// odds(M') = ((1+ρ)/2) odds(M).
    MmseOdds { rho: f64 },
    /// pb' = 3ρ pb + 3(1-ρ) pb².
    BscThreeLook { rho: f64 },
    /// pe' = pe (pe + 2^{-ℓ} pe^{1/6} + (c ln(1/pe))^{-ℓ}).
    LevelK { ell: u32, p: f64 },
    /// pe' = pe (2/(c ln(1/pe)))^ℓ for ℓ ∈ {1, 2}.
    LevelKClosed { ell: u32, p: f64 },
    /// pb' = 3 pb (pb + 2^{-ℓ} pb^{1/6} + (c ln(1/pb))^{-ℓ}).
    LevelKBsc { ell: u32, p: f64 },
}

impl fmt::Display for RecursionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecursionKind::BecTwoLook { .. } => f.write_str("bec_two_look"),
            RecursionKind::BecOdds { .. } => f.write_str("bec_odds"),
            RecursionKind::MmseOdds { .. } => f.write_str("mmse_odds"),
            RecursionKind::BscThreeLook { .. } => f.write_str("bsc_three_look"),
            RecursionKind::LevelK { ell, .. } => write!(f, "level_k_l{ell}"),
            RecursionKind::LevelKClosed { ell, .. } => write!(f, "level_k_closed_l{ell}"),
            RecursionKind::LevelKBsc { ell, .. } => write!(f, "level_k_bsc_l{ell}"),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return param(format!("ρ = {rho} must lie in [0,1)"));
    }
    Ok(())
}

fn level_k_gamma(x: f64, ell: u32, c: f64) -> f64 {
    x + 2f64.powi(-(ell as i32)) * x.powf(1.0 / 6.0) + (c * (1.0 / x).ln()).powi(-(ell as i32))
}

/// Applies one stage to `value` in (0,1]; the result may exceed 1.
pub fn recursion_step(kind: RecursionKind, value: f64) -> Result<f64> {
    if !(value > 0.0 && value <= 1.0) {
        return param(format!("recursion input {value} outside (0,1]"));
    }
    match kind {
        RecursionKind::BecTwoLook { rho } => {
            check_rho(rho)?;
            Ok((1.0 - rho) * value * value + rho * value)
        }
        RecursionKind::BecOdds { rho } => {
            check_rho(rho)?;
            Ok(from_odds(odds(value) / (2.0 - rho)))
        }
        RecursionKind::MmseOdds { rho } => {
            check_rho(rho)?;
            Ok(from_odds(odds(value) * (1.0 + rho) / 2.0))
        }
        RecursionKind::BscThreeLook { rho } => {
            check_rho(rho)?;
            Ok(3.0 * rho * value + 3.0 * (1.0 - rho) * value * value)
        }
        RecursionKind::LevelK { ell, p } => {
            check_ell(ell)?;
            Ok(value * level_k_gamma(value, ell, level_k_constant(p)?))
        }
        RecursionKind::LevelKClosed { ell, p } => {
            if ell != 1 && ell != 2 {
                return param("closed level-k forms exist for ℓ = 1 and ℓ = 2 only");
            }
            let c = level_k_constant(p)?;
            Ok(value * (2.0 / (c * (1.0 / value).ln())).powi(ell as i32))
        }
        RecursionKind::LevelKBsc { ell, p } => {
            check_ell(ell)?;
            Ok(3.0 * value * level_k_gamma(value, ell, level_k_constant(p)?))
        }
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 || ell > 64 {
        return param("ℓ must lie in 1..=64");
    }
    Ok(())
}

/// Per-stage odds multiplier of the two odds recursions.
pub fn odds_factor(kind: RecursionKind) -> Option<f64> {
    match kind {
        RecursionKind::BecOdds { rho } => Some(1.0 / (2.0 - rho)),
        RecursionKind::MmseOdds { rho } => Some((1.0 + rho) / 2.0),
        _ => None,
    }
}

/// α + ½α^{1/6} + 1/(c ln(1/α)) against 2/(c ln(1/α)).
pub fn alpha_relation(alpha: f64, p: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param("α must lie in (0,1)");
    }
    let c = level_k_constant(p)?;
    let inv = 1.0 / (c * (1.0 / alpha).ln());
    Ok((alpha + 0.5 * alpha.powf(1.0 / 6.0) + inv, 2.0 * inv))
}

/// 3γ for ℓ = 2 against (2/(c ln(1/α)))², the step behind the ℓ = 2 closed form.
pub fn alpha_relation_bsc(alpha: f64, p: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param("α must lie in (0,1)");
    }
    let c = level_k_constant(p)?;
    let gamma = level_k_gamma(alpha, 2, c);
    Ok((3.0 * gamma, (2.0 / (c * (1.0 / alpha).ln())).powi(2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    Bec,
    Bms,
    FastBec,
    FastBsc,
    CorollaryBsc,
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bec" => Ok(Theorem::Bec),
            "bms" => Ok(Theorem::Bms),
            "fast_bec" | "fast-bec" => Ok(Theorem::FastBec),
            "fast_bsc" | "fast-bsc" => Ok(Theorem::FastBsc),
            "corollary_bsc" | "corollary-bsc" => Ok(Theorem::CorollaryBsc),
            other => param(format!(
                "unknown theorem {other:?}; expected bec, bms, fast_bec, fast_bsc, corollary_bsc"
            )),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Bec => "bec",
            Theorem::Bms => "bms",
            Theorem::FastBec => "fast_bec",
            Theorem::FastBsc => "fast_bsc",
            Theorem::CorollaryBsc => "corollary_bsc",
        })
    }
}

/// Inputs of a theorem trace. Fields a theorem does not use are ignored.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TraceParams {
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    /// Channel parameter; sets c(p) for level-k stages.
    pub p: Option<f64>,
    /// Channel capacity; used to pick r in the (s, t) theorems.
    pub capacity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStage {
    /// Code index k: the stage bounds RM(r, m + k).
    pub k: usize,
    pub r: Option<usize>,
    pub code_m: usize,
    pub value: f64,
    pub rule: String,
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundTrace {
    pub theorem: Theorem,
    pub stages: Vec<TraceStage>,
    pub initial_delta: f64,
    pub rho: f64,
    pub final_bound: f64,
    pub closed_form: f64,
    /// Named preconditions of the theorem and whether they hold here.
    pub preconditions: Vec<(String, bool)>,
}

impl BoundTrace {
    pub fn is_vacuous(&self) -> bool {
        self.final_bound >= 1.0
    }
}

fn need<T>(v: Option<T>, name: &str, theorem: Theorem) -> Result<T> {
    v.ok_or_else(|| Error::Parameter(format!("theorem {theorem} needs parameter {name}")))
}

struct TraceBuilder {
    stages: Vec<TraceStage>,
    r: Option<usize>,
    m: usize,
}

impl TraceBuilder {
    fn push(&mut self, k: usize, value: f64, rule: String) {
        self.stages.push(TraceStage {
            k,
            r: self.r,
            code_m: self.m + k,
            value,
            rule,
            vacuous: value >= 1.0,
        });
    }
}

/// Stage-by-stage bound of one of the main theorems, with its closed form.
///
/// Odds stages are tracked in the odds domain (the quantity the theorems
/// bound). Level-k stages start from the current value; once a value reaches
/// 1 the stage has no content and the vacuous value is carried forward.
pub fn theorem_trace(theorem: Theorem, params: &TraceParams) -> Result<BoundTrace> {
    let rho = 0.5;
    match theorem {
        Theorem::Bec | Theorem::Bms | Theorem::FastBec | Theorem::CorollaryBsc => {
            let s = need(params.s, "s", theorem)?;
            let t = need(params.t, "t", theorem)?;
            if s == 0 || t == 0 {
                return param("s and t must be positive");
            }
            let m = (s * t) * (s * t);
            let k = 2 * t;
            let delta = 1.0 / (2.0 * PI * m as f64).sqrt();
            let capacity = match theorem {
                Theorem::FastBec => params.p.map(|p| 1.0 - p).or(params.capacity),
                Theorem::CorollaryBsc => params
                    .p
                    .map(|p| 1.0 - binary_entropy(p))
                    .or(params.capacity),
                _ => params.capacity,
            };
            let r = match capacity {
                Some(c) => {
                    let target = c - 2.0 / (2.0 * PI * m as f64).sqrt();
                    if target > 0.0 && target < 1.0 {
                        Some(order_for_rate(target, m)?)
                    } else {
                        None
                    }
                }
                None => None,
            };
            let mut b = TraceBuilder {
                stages: Vec::new(),
                r,
                m,
            };
            let o0 = odds(1.0 - delta);
            b.push(0, o0, "init".into());
            let sqrt_m = (m as f64).sqrt();
            let mut pre = vec![("m = (st)^2, k = 2t".to_string(), true)];
            let (final_bound, closed_form) = match theorem {
                Theorem::Bec | Theorem::Bms => {
                    let kind = if theorem == Theorem::Bec {
                        RecursionKind::BecOdds { rho }
                    } else {
                        RecursionKind::MmseOdds { rho }
                    };
                    let f = odds_factor(kind).unwrap();
                    let mut o = o0;
                    for j in 1..=k {
                        o *= f;
                        b.push(j, o, kind.to_string());
                    }
                    (o, f.powi(k as i32) * (2.0 * PI * m as f64).sqrt())
                }
                Theorem::FastBec => {
                    let p = need(params.p, "p", theorem)?;
                    let c = level_k_constant(p)?;
                    let f = 1.0 / (2.0 - rho);
                    let mut v = o0;
                    for j in 1..=t {
                        v *= f;
                        b.push(j, v, RecursionKind::BecOdds { rho }.to_string());
                    }
                    pre.push((
                        "-ln P(t) >= t/3".into(),
                        v < 1.0 && -(v.ln()) >= t as f64 / 3.0,
                    ));
                    pre.push((
                        "t >= s^2 (6/c)^3".into(),
                        t as f64 >= (s * s) as f64 * (6.0 / c).powi(3),
                    ));
                    let kind = RecursionKind::LevelKClosed { ell: 1, p };
                    for j in t + 1..=k {
                        if v < 1.0 {
                            v = recursion_step(kind, v)?;
                        }
                        b.push(j, v, kind.to_string());
                    }
                    (
                        v,
                        (-(1.0 / (3.0 * s as f64)) * sqrt_m * (E * m as f64).ln()).exp(),
                    )
                }
                Theorem::CorollaryBsc => {
                    let p = need(params.p, "p", theorem)?;
                    pre.push(("t divisible by 4".into(), t % 4 == 0));
                    let eta = 1.0 / s as f64;
                    let v = fast_bsc_stages(&mut b, k, o0, p, eta, rho, &mut pre)?;
                    (
                        v,
                        (-(1.0 / (8.0 * s as f64)) * sqrt_m * (E * m as f64).ln()).exp(),
                    )
                }
                _ => unreachable!(),
            };
            Ok(BoundTrace {
                theorem,
                stages: b.stages,
                initial_delta: delta,
                rho,
                final_bound,
                closed_form,
                preconditions: pre,
            })
        }
        Theorem::FastBsc => {
            let r = need(params.r, "r", theorem)?;
            let m = need(params.m, "m", theorem)?;
            let k = need(params.k, "k", theorem)?;
            let delta = need(params.delta, "delta", theorem)?;
            let eta = need(params.eta, "eta", theorem)?;
            let p = need(params.p, "p", theorem)?;
            RmParams::new(r, m)?;
            if !(delta > 0.0 && delta <= 1.0) || !(eta > 0.0 && eta <= 1.0) {
                return param("δ and η must lie in (0,1]");
            }
            if k == 0 {
                return param("k must be positive");
            }
            let mut b = TraceBuilder {
                stages: Vec::new(),
                r: Some(r),
                m,
            };
            let o0 = odds(1.0 - delta);
            b.push(0, o0, "init".into());
            let mut pre = vec![("k divisible by 8".to_string(), k % 8 == 0)];
            let v = fast_bsc_stages(&mut b, k, o0, p, eta, rho, &mut pre)?;
            let kf = k as f64;
            let closed = (-(kf / 8.0) * (E * kf / (2.0 * eta)).ln()).exp();
            Ok(BoundTrace {
                theorem,
                stages: b.stages,
                initial_delta: delta,
                rho,
                final_bound: v,
                closed_form: closed,
                preconditions: pre,
            })
        }
    }
}

/// k/2 MMSE odds stages, then k/8 level-2 stages of four code levels each.
fn fast_bsc_stages(
    b: &mut TraceBuilder,
    k: usize,
    o0: f64,
    p: f64,
    eta: f64,
    rho: f64,
    pre: &mut Vec<(String, bool)>,
) -> Result<f64> {
    let c = level_k_constant(p)?;
    let f = (1.0 + rho) / 2.0;
    let half = k / 2;
    let mut v = o0;
    for j in 1..=half {
        v *= f;
        b.push(j, v, RecursionKind::MmseOdds { rho }.to_string());
    }
    pre.push((
        "ln(1/P(k/2)) >= k/8".into(),
        v < 1.0 && -(v.ln()) >= k as f64 / 8.0,
    ));
    pre.push((
        "k >= (16/c)^2/(2η)".into(),
        k as f64 >= (16.0 / c).powi(2) / (2.0 * eta),
    ));
    let kind = RecursionKind::LevelKClosed { ell: 2, p };
    for j in 1..=k / 8 {
        if v < 1.0 {
            v = recursion_step(kind, v)?;
        }
        b.push(half + 4 * j, v, kind.to_string());
    }
    Ok(v)
}

/// (radius, probability bound) = (√Q, √Q) for Pr(Δ >= √Q) <= √Q.
pub fn list_ball_bound(q: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&q) {
        return param(format!("Q = {q} outside [0,1]"));
    }
    let s = q.sqrt();
    Ok((s, s))
}

/// Block length, minimum distance, BSC parameter and transition midpoint of
/// one code, with d = κ² ln N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferParams {
    pub n: f64,
    pub d: f64,
    pub p: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl TransferParams {
    pub fn new(n: f64, d: f64, p: f64, theta: f64) -> Result<Self> {
        if n.is_nan() || d.is_nan() || n <= 1.0 || d <= 0.0 {
            return param("N must exceed 1 and d must be positive");
        }
        for (name, v) in [("p", p), ("θ", theta)] {
            if !(v > 0.0 && v <= 0.5) {
                return param(format!("{name} = {v} must lie in (0, 1/2]"));
            }
        }
        Ok(TransferParams {
            n,
            d,
            p,
            theta,
            kappa: (d / n.ln()).sqrt(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferReport {
    /// α(p) = √d (√(-ln(1-θ)) - √(-ln(1-p))).
    pub alpha: f64,
    /// Upper bound 1 - Φ(α) on the block error for p < θ (lower bound above θ).
    pub block_tail: f64,
    /// 4√(2 ln 2) √(ln(1/δ)/d).
    pub width: f64,
    /// p - 8√(ln 2)/κ.
    pub p_low: f64,
    /// 1 - h(p_low), or 1 when p_low <= 0.
    pub bms_capacity_threshold: f64,
    /// 1/N + h(1/N²).
    pub bms_block_bound: f64,
    /// The simplified 1/N form.
    pub bms_block_bound_simplified: f64,
    /// 2/N² as stated for BMS channels.
    pub stated_block_bound: f64,
}

pub fn transfer_alpha(d: f64, theta: f64, p: f64) -> f64 {
    d.sqrt() * ((-(1.0 - theta).ln()).sqrt() - (-(1.0 - p).ln()).sqrt())
}

pub fn bsc_to_bms_transfer(params: &TransferParams, delta: f64) -> Result<TransferReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return param(format!("δ = {delta} must lie in (0,1)"));
    }
    let TransferParams {
        n,
        d,
        p,
        theta,
        kappa,
    } = *params;
    let alpha = transfer_alpha(d, theta, p);
    let width = 4.0 * (2.0 * LN_2).sqrt() * ((1.0 / delta).ln() / d).sqrt();
    let p_low = p - 8.0 * LN_2.sqrt() / kappa;
    let bms_capacity_threshold = if p_low <= 0.0 {
        1.0
    } else {
        1.0 - binary_entropy(p_low)
    };
    Ok(TransferReport {
        alpha,
        block_tail: 1.0 - phi(alpha),
        width,
        p_low,
        bms_capacity_threshold,
        bms_block_bound: 1.0 / n + binary_entropy(1.0 / (n * n)),
        bms_block_bound_simplified: 1.0 / n,
        stated_block_bound: 2.0 / (n * n),
    })
}
