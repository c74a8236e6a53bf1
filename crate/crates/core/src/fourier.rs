//! Fourier analysis on {0,1}^n under the product measure with bias p.
//!
//! The basis is u_S(x) = Π_{i∈S} r(x_i) with r(0) = √(p/(1-p)) and
//! r(1) = -√((1-p)/p). Subsets are n-bit masks.

use crate::codes::CoordPermutation;
use crate::error::{infeasible, param, Error, Result};
use crate::mc::Z99;
use crate::subspaces::{enumerate_gl, sample_gl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const MAX_FOURIER_ARITY: usize = 24;

fn check_bias(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return param(format!("bias p = {p} must lie strictly inside (0,1)"));
    }
    Ok(())
}

/// A real function on {0,1}^n with its bias; `values[x]` is f at the point
/// whose coordinate i is bit i of x.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFn {
    n: usize,
    values: Vec<f64>,
    bias: f64,
}

impl BooleanFn {
    pub fn new(n: usize, values: Vec<f64>, bias: f64) -> Result<Self> {
        if n > MAX_FOURIER_ARITY {
            return infeasible(format!("arity {n} exceeds {MAX_FOURIER_ARITY}"));
        }
        if values.len() != 1 << n {
            return param(format!(
                "truth table has {} entries, expected 2^{n}",
                values.len()
            ));
        }
        check_bias(bias)?;
        Ok(BooleanFn { n, values, bias })
    }

    pub fn from_fn(n: usize, bias: f64, f: impl Fn(u64) -> f64) -> Result<Self> {
        if n > MAX_FOURIER_ARITY {
            return infeasible(format!("arity {n} exceeds {MAX_FOURIER_ARITY}"));
        }
        Self::new(n, (0..1u64 << n).map(f).collect(), bias)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: u64) -> f64 {
        self.values[x as usize]
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// μ(x) = p^{|x|} (1-p)^{n-|x|}.
    pub fn measure(&self, x: u64) -> f64 {
        let w = x.count_ones() as i32;
        self.bias.powi(w) * (1.0 - self.bias).powi(self.n as i32 - w)
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|v| v * v)
    }

    fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(x, &v)| self.measure(x as u64) * g(v))
            .sum()
    }

    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// f_A(x) = E[f(X') | X'_A = x_A].
    pub fn restrict(&self, a: u64) -> BooleanFn {
        let n = self.n;
        let full = (1u64 << n) - 1;
        let free = full & !a;
        let mut out = vec![0.0; 1 << n];
        for x in 0..1u64 << n {
            let base = x & a;
            // Iterate sub-masks of the free coordinates.
            let mut acc = 0.0;
            let mut sub = free;
            loop {
                let w = sub.count_ones() as i32;
                let weight =
                    self.bias.powi(w) * (1.0 - self.bias).powi(free.count_ones() as i32 - w);
                acc += weight * self.values[(base | sub) as usize];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
            out[x as usize] = acc;
        }
        BooleanFn {
            n,
            values: out,
            bias: self.bias,
        }
    }

    /// x ↦ f(π⁻¹ x), i.e. the function g with g(πx) = f(x).
    pub fn permuted(&self, perm: &CoordPermutation) -> Result<BooleanFn> {
        if perm.len() != self.n {
            return param("permutation size does not match arity");
        }
        let inv = perm.inverse();
        let values = (0..1u64 << self.n)
            .map(|x| self.values[apply_mask(&inv, x) as usize])
            .collect();
        Ok(BooleanFn {
            n: self.n,
            values,
            bias: self.bias,
        })
    }
}

/// Image of a subset mask: bit i moves to bit π(i).
pub fn apply_mask(perm: &CoordPermutation, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out |= 1 << perm.image(i);
        m &= m - 1;
    }
    out
}

/// Coefficients f̂(S) = ⟨f, u_S⟩_μ indexed by subset mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<f64>,
    bias: f64,
}

impl Spectrum {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, s: u64) -> f64 {
        self.coeffs[s as usize]
    }

    pub fn sum_squares(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Zeroes every coefficient whose set is not contained in `a`.
    pub fn restricted(&self, a: u64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, &c)| if s as u64 & !a == 0 { c } else { 0.0 })
            .collect();
        Spectrum {
            n: self.n,
            coeffs,
            bias: self.bias,
        }
    }

    /// Rebuilds the truth table f = Σ f̂(S) u_S.
    pub fn inverse(&self) -> BooleanFn {
        let p = self.bias;
        let r0 = (p / (1.0 - p)).sqrt();
        let r1 = -((1.0 - p) / p).sqrt();
        let mut v = self.coeffs.clone();
        for i in 0..self.n {
            let h = 1usize << i;
            for base in (0..v.len()).step_by(2 * h) {
                for j in base..base + h {
                    let (c0, c1) = (v[j], v[j + h]);
                    v[j] = c0 + c1 * r0;
                    v[j + h] = c0 + c1 * r1;
                }
            }
        }
        BooleanFn {
            n: self.n,
            values: v,
            bias: p,
        }
    }
}

/// Tensor butterfly: per coordinate, (a, b) ↦ ((1-p)a + pb, √(p(1-p))(a - b)).
pub fn biased_transform(f: &BooleanFn) -> Result<Spectrum> {
    if f.n > MAX_FOURIER_ARITY {
        return infeasible(format!("arity {} exceeds {MAX_FOURIER_ARITY}", f.n));
    }
    let p = f.bias;
    let s = (p * (1.0 - p)).sqrt();
    let mut v = f.values.clone();
    for i in 0..f.n {
        let h = 1usize << i;
        for base in (0..v.len()).step_by(2 * h) {
            for j in base..base + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = (1.0 - p) * a + p * b;
                v[j + h] = s * (a - b);
            }
        }
    }
    Ok(Spectrum {
        n: f.n,
        coeffs: v,
        bias: p,
    })
}

/// u_S(x) for the bias p.
pub fn basis_value(p: f64, s: u64, x: u64) -> f64 {
    let r0 = (p / (1.0 - p)).sqrt();
    let r1 = -((1.0 - p) / p).sqrt();
    let ones = (s & x).count_ones() as i32;
    let zeros = (s & !x).count_ones() as i32;
    r0.powi(zeros) * r1.powi(ones)
}

/// Spectrum of f_A: the transform with every S ⊄ A zeroed.
pub fn restrict_spectrum(f: &BooleanFn, a: u64) -> Result<Spectrum> {
    if a >> f.n != 0 {
        return param("restriction set exceeds the arity");
    }
    Ok(biased_transform(f)?.restricted(a))
}

/// Level masses and derived sums of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelProfile {
    /// Σ_{|S| = k} f̂(S)² for k = 0..=n.
    pub level_mass: Vec<f64>,
    pub variance: f64,
}

impl LevelProfile {
    /// Σ_S f̂(S)² ρ^{|S|}.
    pub fn noise_mass(&self, rho: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return param(format!("noise parameter {rho} outside [0,1]"));
        }
        Ok(self
            .level_mass
            .iter()
            .enumerate()
            .map(|(k, m)| m * rho.powi(k as i32))
            .sum())
    }

    /// Σ_{|S| <= k} f̂(S)².
    pub fn mass_up_to(&self, k: usize) -> f64 {
        self.level_mass.iter().take(k + 1).sum()
    }
}

pub fn level_profile(s: &Spectrum) -> LevelProfile {
    let mut level_mass = vec![0.0; s.n + 1];
    for (mask, c) in s.coeffs.iter().enumerate() {
        level_mass[mask.count_ones() as usize] += c * c;
    }
    let variance = level_mass.iter().skip(1).sum();
    LevelProfile {
        level_mass,
        variance,
    }
}

type PermDraw = dyn Fn(&mut ChaCha8Rng) -> CoordPermutation + Send + Sync;

/// A distribution over coordinate permutations.
#[derive(Clone)]
pub enum GroupSampler {
    /// Uniform over an explicit list.
    Exhaustive {
        n: usize,
        perms: Vec<CoordPermutation>,
    },
    /// Independent draws from a generator.
    Sampled { n: usize, draw: Arc<PermDraw> },
}

impl std::fmt::Debug for GroupSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupSampler::Exhaustive { n, perms } => {
                write!(f, "Exhaustive {{ n: {n}, size: {} }}", perms.len())
            }
            GroupSampler::Sampled { n, .. } => write!(f, "Sampled {{ n: {n} }}"),
        }
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

impl GroupSampler {
    pub fn from_perms(perms: Vec<CoordPermutation>) -> Result<Self> {
        let n = perms
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::Parameter("empty permutation list".into()))?;
        if perms.iter().any(|p| p.len() != n) {
            return param("permutations act on different domains");
        }
        Ok(GroupSampler::Exhaustive { n, perms })
    }

    pub fn identity(n: usize) -> Self {
        GroupSampler::Exhaustive {
            n,
            perms: vec![CoordPermutation::identity(n)],
        }
    }

    /// The full symmetric group S_n, n <= 8.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 8 {
            return infeasible("exhaustive symmetric group limited to 1 <= n <= 8");
        }
        let perms = all_permutations(n)
            .into_iter()
            .map(|p| CoordPermutation::new(p).unwrap())
            .collect();
        Ok(GroupSampler::Exhaustive { n, perms })
    }

    /// Cyclic shifts of n coordinates.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return param("empty domain");
        }
        let perms = (0..n)
            .map(|k| CoordPermutation::new((0..n).map(|i| (i + k) % n).collect()).unwrap())
            .collect();
        Ok(GroupSampler::Exhaustive { n, perms })
    }

    /// GL(m,2) acting on the 2^m - 1 nonzero vectors (coordinate i is the
    /// vector with index i + 1), every element listed; m <= 4.
    pub fn gl_exhaustive(m: usize) -> Result<Self> {
        let perms = enumerate_gl(m)?.iter().map(|g| g.shifted_perm()).collect();
        Ok(GroupSampler::Exhaustive {
            n: (1 << m) - 1,
            perms,
        })
    }

    /// Uniform GL(m,2) elements on the nonzero vectors, drawn on demand.
    pub fn gl_sampled(m: usize) -> Result<Self> {
        if m == 0 || m > 16 {
            return param("sampled GL(m,2) supports 1 <= m <= 16");
        }
        let draw = move |rng: &mut ChaCha8Rng| sample_gl(m, rng).expect("valid m").shifted_perm();
        Ok(GroupSampler::Sampled {
            n: (1 << m) - 1,
            draw: Arc::new(draw),
        })
    }

    pub fn domain(&self) -> usize {
        match self {
            GroupSampler::Exhaustive { n, .. } | GroupSampler::Sampled { n, .. } => *n,
        }
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, GroupSampler::Exhaustive { .. })
    }

    /// Applies `f` to every listed permutation, or to `samples` draws.
    fn for_each(&self, samples: u64, seed: u64, mut f: impl FnMut(&CoordPermutation)) {
        match self {
            GroupSampler::Exhaustive { perms, .. } => perms.iter().for_each(f),
            GroupSampler::Sampled { draw, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    f(&draw(&mut rng));
                }
            }
        }
    }
}

/// A probability, exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbEstimate {
    pub value: f64,
    /// Standard error for estimates; `None` when exact.
    pub std_error: Option<f64>,
}

impl ProbEstimate {
    pub fn half_width_99(&self) -> f64 {
        self.std_error.map_or(0.0, |s| Z99 * s)
    }
}

/// How many draws a sampled group uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

/// Pr(Π(S) ⊆ A) for Π drawn from the sampler.
pub fn orbit_restriction_prob(
    g: &GroupSampler,
    s: &[usize],
    a: &[usize],
    sampling: Sampling,
) -> Result<ProbEstimate> {
    if s.is_empty() {
        return param("S must be nonempty");
    }
    let n = g.domain();
    if s.iter().chain(a).any(|&i| i >= n) {
        return param("index outside the group domain");
    }
    if !g.is_exhaustive() && sampling.samples == 0 {
        return param("sampled groups need a positive sample count");
    }
    let mut in_a = vec![false; n];
    for &i in a {
        in_a[i] = true;
    }
    let (mut hits, mut total) = (0u64, 0u64);
    g.for_each(sampling.samples, sampling.seed, |perm| {
        total += 1;
        if s.iter().all(|&i| in_a[perm.image(i)]) {
            hits += 1;
        }
    });
    let value = hits as f64 / total as f64;
    let std_error = (!g.is_exhaustive()).then(|| (value * (1.0 - value) / total as f64).sqrt());
    Ok(ProbEstimate { value, std_error })
}

fn check_symmetry(f: &BooleanFn, g: &GroupSampler, sampling: Sampling) -> Result<()> {
    let n = f.n;
    if g.domain() != n {
        return param("group domain does not match the function arity");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed ^ 0x5eed);
    let exhaustive_points = n <= 12;
    let mut bad = None;
    g.for_each(sampling.samples.min(200), sampling.seed, |perm| {
        if bad.is_some() {
            return;
        }
        let mut test = |x: u64| {
            if f.values[apply_mask(perm, x) as usize] != f.values[x as usize] {
                bad = Some(x);
            }
        };
        if exhaustive_points {
            (0..1u64 << n).for_each(&mut test);
        } else {
            for _ in 0..100 {
                test(rng.gen::<u64>() & ((1u64 << n) - 1));
            }
        }
    });
    match bad {
        Some(x) => Err(Error::Structure(format!(
            "a group element does not preserve f at input {x:#x}"
        ))),
        None => Ok(()),
    }
}

/// Both sides of Σ_{|S|=k} f̂_A(S)² = Σ_{|S|=k} f̂(S)² Pr(Π(S) ⊆ A), or of
/// the variance form when `level` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub level: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of the right side when the group is sampled.
    pub rhs_std_error: Option<f64>,
    pub pass: bool,
}

pub const IDENTITY_TOL: f64 = 1e-9;

/// Evaluates the restriction-variance identity for one level (or all levels
/// k >= 1). Exhaustive groups must match to 1e-9; sampled groups must agree
/// within three standard errors.
pub fn restriction_identity_check(
    f: &BooleanFn,
    g: &GroupSampler,
    a: u64,
    level: Option<usize>,
    sampling: Sampling,
) -> Result<IdentityReport> {
    check_symmetry(f, g, sampling)?;
    if a >> f.n != 0 {
        return param("restriction set exceeds the arity");
    }
    let spec = biased_transform(f)?;
    let selected: Vec<(u64, f64)> = spec
        .coeffs
        .iter()
        .enumerate()
        .filter(|(s, _)| {
            let w = s.count_ones() as usize;
            match level {
                Some(k) => w == k,
                None => w >= 1,
            }
        })
        .map(|(s, &c)| (s as u64, c * c))
        .collect();
    let lhs: f64 = selected
        .iter()
        .filter(|(s, _)| s & !a == 0)
        .map(|(_, m)| m)
        .sum();
    let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0u64);
    g.for_each(sampling.samples, sampling.seed, |perm| {
        let x: f64 = selected
            .iter()
            .filter(|(s, _)| apply_mask(perm, *s) & !a == 0)
            .map(|(_, m)| m)
            .sum();
        sum += x;
        sum_sq += x * x;
        count += 1;
    });
    if count == 0 {
        return param("sampled groups need a positive sample count");
    }
    let rhs = sum / count as f64;
    if g.is_exhaustive() {
        let pass = (lhs - rhs).abs() <= IDENTITY_TOL;
        return Ok(IdentityReport {
            level,
            lhs,
            rhs,
            rhs_std_error: None,
            pass,
        });
    }
    let var = (sum_sq / count as f64 - rhs * rhs).max(0.0);
    let se = (var / count as f64).sqrt();
    let pass = (lhs - rhs).abs() <= 3.0 * se + 1e-12;
    Ok(IdentityReport {
        level,
        lhs,
        rhs,
        rhs_std_error: Some(se),
        pass,
    })
}

/// One instance of the biased level-k inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelKTerm {
    pub eps: f64,
    /// (1-ε) ln α / ln λ.
    pub threshold: f64,
    pub mass: f64,
    /// α^{2ε/(1+λ)}.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelKReport {
    pub alpha: f64,
    pub lambda: f64,
    /// α ∈ {0, 1}: the mass is α² and the bound holds trivially.
    pub degenerate: bool,
    /// Threshold (1/8) ln α / ln λ, mass up to it and the bound α^{7/6}.
    pub threshold: f64,
    pub mass: f64,
    pub bound: f64,
    pub pass: bool,
    /// The general-ε form for ε = 0.1, 0.2, …, 0.9.
    pub eps_terms: Vec<LevelKTerm>,
}

fn indicator_alpha(f: &BooleanFn) -> Result<f64> {
    if !f.is_indicator() {
        return param("function is not a 0/1 indicator");
    }
    Ok(f.mean())
}

const DEGENERATE_TOL: f64 = 1e-15;

/// Checks Σ_{|S| <= (1/8) ln α/ln λ} f̂(S)² <= α^{7/6} with λ = min(p, 1-p).
pub fn level_k_check(f: &BooleanFn) -> Result<LevelKReport> {
    let alpha = indicator_alpha(f)?;
    let lambda = f.bias.min(1.0 - f.bias);
    let profile = level_profile(&biased_transform(f)?);
    let degenerate = alpha <= DEGENERATE_TOL || alpha >= 1.0 - DEGENERATE_TOL;
    let term = |eps: f64| {
        if degenerate {
            let mass = alpha * alpha;
            return LevelKTerm {
                eps,
                threshold: 0.0,
                mass,
                bound: alpha.powf(2.0 * eps / (1.0 + lambda)),
                pass: true,
            };
        }
        let threshold = (1.0 - eps) * alpha.ln() / lambda.ln();
        let mass = profile.mass_up_to(threshold.floor() as usize);
        let bound = alpha.powf(2.0 * eps / (1.0 + lambda));
        LevelKTerm {
            eps,
            threshold,
            mass,
            bound,
            pass: mass <= bound * (1.0 + 1e-12),
        }
    };
    let main = if degenerate {
        LevelKTerm {
            eps: 7.0 / 8.0,
            threshold: 0.0,
            mass: alpha * alpha,
            bound: alpha.powf(7.0 / 6.0),
            pass: true,
        }
    } else {
        let threshold = 0.125 * alpha.ln() / lambda.ln();
        let mass = profile.mass_up_to(threshold.floor() as usize);
        let bound = alpha.powf(7.0 / 6.0);
        LevelKTerm {
            eps: 7.0 / 8.0,
            threshold,
            mass,
            bound,
            pass: mass <= bound * (1.0 + 1e-12),
        }
    };
    let eps_terms: Vec<LevelKTerm> = (1..=9).map(|i| term(i as f64 / 10.0)).collect();
    Ok(LevelKReport {
        alpha,
        lambda,
        degenerate,
        threshold: main.threshold,
        mass: main.mass,
        bound: main.bound,
        pass: main.pass && eps_terms.iter().all(|t| t.pass),
        eps_terms,
    })
}

/// Σ_S f̂(S)² ρ^{|S|} <= α^{2-2/q} at q = 1 + 1/λ, ρ = λ^{1-2/q}/(q-1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseBoundReport {
    pub alpha: f64,
    pub q: f64,
    pub rho: f64,
    pub noise_mass: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn hypercontractive_check(f: &BooleanFn) -> Result<NoiseBoundReport> {
    let alpha = indicator_alpha(f)?;
    let lambda = f.bias.min(1.0 - f.bias);
    let q = 1.0 + 1.0 / lambda;
    let rho = lambda.powf(1.0 - 2.0 / q) / (q - 1.0);
    let noise_mass = level_profile(&biased_transform(f)?).noise_mass(rho)?;
    let bound = alpha.powf(2.0 - 2.0 / q);
    Ok(NoiseBoundReport {
        alpha,
        q,
        rho,
        noise_mass,
        bound,
        pass: noise_mass <= bound * (1.0 + 1e-12) + 1e-15,
    })
}

/// The restriction bound for GL(m,2)-symmetric indicators on n = 2^m - 1
/// coordinates with A = {0, …, 2^{m-ℓ} - 2}:
/// Σ_S f̂_A(S)² <= α² + 2^{-ℓ} α^{7/6} + α (c ln(1/α))^{-ℓ}, c = 1/(8 ln(1/λ)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlBoundReport {
    pub ell: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub c: f64,
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn gl_restriction_bound_check(f: &BooleanFn, m: usize, ell: usize) -> Result<GlBoundReport> {
    if f.n != (1 << m) - 1 {
        return param(format!("arity {} is not 2^{m} - 1", f.n));
    }
    if ell == 0 || ell > m {
        return param("ℓ must lie in 1..=m");
    }
    let alpha = indicator_alpha(f)?;
    let lambda = f.bias.min(1.0 - f.bias);
    let c = 1.0 / (8.0 * (1.0 / lambda).ln());
    let a = (1u64 << ((1 << (m - ell)) - 1)) - 1;
    let lhs = restrict_spectrum(f, a)?.sum_squares();
    let tail = if alpha > 0.0 && alpha < 1.0 {
        alpha * (c * (1.0 / alpha).ln()).powi(-(ell as i32))
    } else {
        f64::INFINITY
    };
    let bound = alpha * alpha
        + 2f64.powi(-(ell as i32)) * alpha.powf(7.0 / 6.0)
        + if alpha == 0.0 { 0.0 } else { tail };
    Ok(GlBoundReport {
        ell,
        alpha,
        lambda,
        c,
        lhs,
        bound,
        pass: lhs <= bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_dictator() {
        let one = BooleanFn::new(3, vec![1.0; 8], 0.3).unwrap();
        let s = biased_transform(&one).unwrap();
        assert!((s.coeff(0) - 1.0).abs() < 1e-15);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
        let dict = BooleanFn::new(1, vec![0.0, 1.0], 0.5).unwrap();
        let s = biased_transform(&dict).unwrap();
        assert!((s.coeff(0) - 0.5).abs() < 1e-15);
        assert!((s.coeff(1) + 0.5).abs() < 1e-15);
        assert!((level_profile(&s).variance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = BooleanFn::from_fn(5, 0.2, |x| (x as f64).sin()).unwrap();
        let back = biased_transform(&f).unwrap().inverse();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn restriction_extremes() {
        let f = BooleanFn::from_fn(4, 0.3, |x| (x * x % 7) as f64).unwrap();
        let full = biased_transform(&f).unwrap();
        assert_eq!(restrict_spectrum(&f, 0xf).unwrap(), full);
        let empty = restrict_spectrum(&f, 0).unwrap();
        assert_eq!(empty.coeff(0), full.coeff(0));
        assert!(empty.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn noise_mass_endpoints() {
        let f = BooleanFn::from_fn(4, 0.3, |x| (x % 3) as f64).unwrap();
        let s = biased_transform(&f).unwrap();
        let prof = level_profile(&s);
        assert!((prof.noise_mass(1.0).unwrap() - f.second_moment()).abs() < 1e-12);
        assert!((prof.noise_mass(0.0).unwrap() - s.coeff(0).powi(2)).abs() < 1e-15);
        assert!(prof.noise_mass(1.5).is_err());
    }

    #[test]
    fn level_k_degenerate() {
        let one = BooleanFn::new(4, vec![1.0; 16], 0.3).unwrap();
        let r = level_k_check(&one).unwrap();
        assert!(r.degenerate && r.pass && (r.mass - 1.0).abs() < 1e-12);
        let zero = BooleanFn::new(4, vec![0.0; 16], 0.3).unwrap();
        assert!(level_k_check(&zero).unwrap().pass);
        let not_ind = BooleanFn::new(1, vec![0.5, 1.0], 0.3).unwrap();
        assert!(level_k_check(&not_ind).is_err());
    }

    #[test]
    fn orbit_probability_examples() {
        let g = GroupSampler::cyclic(6).unwrap();
        let p = orbit_restriction_prob(
            &g,
            &[2],
            &[0, 1],
            Sampling {
                samples: 0,
                seed: 0,
            },
        )
        .unwrap();
        assert!((p.value - 2.0 / 6.0).abs() < 1e-15);
        assert!(orbit_restriction_prob(
            &g,
            &[],
            &[0],
            Sampling {
                samples: 0,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn majority_identity() {
        let maj = BooleanFn::from_fn(3, 0.3, |x| (x.count_ones() >= 2) as u8 as f64).unwrap();
        let g = GroupSampler::symmetric(3).unwrap();
        let r = restriction_identity_check(
            &maj,
            &g,
            0b001,
            Some(1),
            Sampling {
                samples: 0,
                seed: 0,
            },
        )
        .unwrap();
        assert!(r.pass);
        let s = biased_transform(&maj).unwrap();
        let level1 = s.coeff(1).powi(2) + s.coeff(2).powi(2) + s.coeff(4).powi(2);
        assert!((r.lhs - level1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_group_is_rejected() {
        let f = BooleanFn::from_fn(3, 0.5, |x| (x & 1) as f64).unwrap();
        let g = GroupSampler::symmetric(3).unwrap();
        let err = restriction_identity_check(
            &f,
            &g,
            1,
            Some(1),
            Sampling {
                samples: 0,
                seed: 0,
            },
        );
        assert!(matches!(err, Err(Error::Structure(_))));
    }
}
