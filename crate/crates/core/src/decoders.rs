//! Extrinsic decoders and exact or sampled decoding metrics.
//!
//! All decoders estimate one target coordinate from the other coordinates
//! only. Metrics are evaluated with the all-zero codeword transmitted, which
//! is exact for every decoder here because each error indicator depends on
//! the noise alone.

use crate::bits::{BitVec, XorBasis};
use crate::channels::{binary_entropy, ChannelKind, ChannelModel};
use crate::codes::{binomial, codes_equal, project, puncture, BinaryCode, MAX_ENUM_DIM};
use crate::error::{infeasible, param, Error, Result};
use crate::mc;
use crate::subspaces::LookFamily;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Outcome budget for exact enumeration.
pub const MAX_EXACT_OUTCOMES: u64 = 1 << 24;
/// Largest redundancy N - dim for a syndrome table.
pub const MAX_SYNDROME_BITS: usize = 24;
/// Search-node budget for the exact erasure profile.
pub const MAX_BEC_NODES: u64 = 1 << 34;

/// Relative gap below which two posterior likelihood sums count as equal.
pub const TIE_REL: f64 = 1e-12;

/// Erasure indicator over the code coordinates (1 = erased).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasurePattern(pub BitVec);

fn check_target(code: &BinaryCode, target: usize) -> Result<()> {
    if target >= code.length() {
        return param(format!(
            "target {target} out of range for length {}",
            code.length()
        ));
    }
    if code.length() < 2 {
        return param("extrinsic decoding needs length >= 2");
    }
    Ok(())
}

fn check_packed(code: &BinaryCode) -> Result<()> {
    if code.length() > 64 {
        return infeasible("packed decoders support lengths up to 64");
    }
    Ok(())
}

/// Drops bit `t` from a packed word, shifting higher bits down.
#[inline]
fn compress(v: u64, t: usize) -> u64 {
    let low = v & ((1u64 << t) - 1);
    let high = if t + 1 >= 64 { 0 } else { (v >> (t + 1)) << t };
    low | high
}

#[inline]
fn parity(v: u64) -> u8 {
    (v.count_ones() & 1) as u8
}

/// True iff the target symbol is determined by the unerased other symbols.
pub fn bec_recoverable(code: &BinaryCode, pattern: &ErasurePattern, target: usize) -> Result<bool> {
    check_target(code, target)?;
    if pattern.0.len() != code.length() {
        return param("erasure pattern length does not match the code");
    }
    let target_col = code.column(target);
    let mut rows: Vec<(BitVec, usize)> = Vec::new();
    let reduce = |rows: &[(BitVec, usize)], mut v: BitVec| {
        for (r, p) in rows {
            if v.get(*p) {
                v.xor_assign(r);
            }
        }
        v
    };
    for j in (0..code.length()).filter(|&j| j != target && !pattern.0.get(j)) {
        let v = reduce(&rows, code.column(j));
        if let Some(p) = v.first_one() {
            rows.push((v, p));
        }
    }
    Ok(reduce(&rows, target_col).is_zero())
}

/// Generator and parity-check columns packed into words (length <= 64).
#[derive(Clone, Debug)]
struct PackedColumns {
    g: Vec<u64>,
    h: Vec<u64>,
}

impl PackedColumns {
    fn new(code: &BinaryCode) -> Result<Self> {
        check_packed(code)?;
        let n = code.length();
        let mut g = vec![0u64; n];
        for (i, row) in code.generators().iter().enumerate() {
            for j in row.ones_iter() {
                g[j] |= 1 << i;
            }
        }
        let mut h = vec![0u64; n];
        for (i, row) in code.parity_check().iter().enumerate() {
            for j in row.ones_iter() {
                h[j] |= 1 << i;
            }
        }
        Ok(PackedColumns { g, h })
    }

    fn recoverable(&self, erased: u64, target: usize) -> bool {
        let mut basis = XorBasis::default();
        for (j, &col) in self.g.iter().enumerate() {
            if j != target && (erased >> j) & 1 == 0 {
                basis.insert(col);
            }
        }
        basis.contains(self.g[target])
    }
}

/// Number of erasure patterns on the non-target coordinates, by erased count
/// `w`, for which the target is not recoverable.
///
/// The target is recoverable iff its generator column lies in the span W of
/// the unerased columns, and unrecoverable iff its parity-check column lies in
/// the span of the erased columns. Coordinates are assigned one at a time and
/// the search stops as soon as either span settles the outcome. Below depth
/// d only W ∩ T_d matters, where T_d is spanned by the target column and the
/// columns still unassigned, so subtrees are shared on that key.
pub fn bec_unrecoverable_counts(code: &BinaryCode, target: usize) -> Result<Vec<u64>> {
    check_target(code, target)?;
    let cols = PackedColumns::new(code)?;
    let n = code.length();
    let others: Vec<usize> = (0..n).filter(|&j| j != target).collect();

    // Basis adapted to the chain T_{n-1} ⊆ … ⊆ T_0: T_d is spanned by the
    // first chain_dim[d] basis vectors.
    let mut chain: Vec<(u64, u64)> = Vec::new(); // (echelon vector, combination)
    let mut chain_dim = vec![0usize; others.len() + 1];
    let add = |v: u64, chain: &mut Vec<(u64, u64)>| {
        let mut r = v;
        let mut combo = 0u64;
        for &(e, c) in chain.iter() {
            if r & (1u64 << (63 - e.leading_zeros())) != 0 {
                r ^= e;
                combo ^= c;
            }
        }
        if r != 0 {
            let idx = chain.len();
            chain.push((r, combo ^ (1u64 << idx)));
        }
    };
    add(cols.g[target], &mut chain);
    chain_dim[others.len()] = chain.len();
    for d in (0..others.len()).rev() {
        add(cols.g[others[d]], &mut chain);
        chain_dim[d] = chain.len();
    }
    // Coordinates of a column in the adapted basis: the combination mask of
    // its reduction expresses it through the chain vectors.
    let coords = |v: u64| {
        let mut r = v;
        let mut combo = 0u64;
        for &(e, c) in &chain {
            if r & (1u64 << (63 - e.leading_zeros())) != 0 {
                r ^= e;
                combo ^= c;
            }
        }
        debug_assert_eq!(r, 0);
        combo
    };
    let g: Vec<u64> = cols.g.iter().map(|&v| coords(v)).collect();

    let mut search = ErasureSearch {
        g,
        h: cols.h,
        target,
        others: &others,
        chain_dim,
        gb: XorBasis::default(),
        hb: XorBasis::default(),
        memo: std::collections::HashMap::new(),
        nodes: 0,
    };
    search.visit(0)
}

struct ErasureSearch<'a> {
    g: Vec<u64>,
    h: Vec<u64>,
    target: usize,
    others: &'a [usize],
    chain_dim: Vec<usize>,
    gb: XorBasis,
    hb: XorBasis,
    memo: std::collections::HashMap<(usize, Vec<u64>), Vec<u64>>,
    nodes: u64,
}

impl ErasureSearch<'_> {
    /// Unrecoverable completions of the current prefix, by erasures among the
    /// remaining coordinates.
    fn visit(&mut self, depth: usize) -> Result<Vec<u64>> {
        self.nodes += 1;
        if self.nodes > MAX_BEC_NODES {
            return infeasible("exact erasure profile exceeds the search budget");
        }
        let rem = self.others.len() - depth;
        if self.gb.contains(self.g[self.target]) {
            return Ok(vec![0; rem + 1]);
        }
        if self.hb.contains(self.h[self.target]) {
            return Ok((0..=rem)
                .map(|j| binomial(rem as u64, j as u64) as u64)
                .collect());
        }
        debug_assert!(rem > 0, "leaf must be decided by one of the two spans");
        let key = (depth, self.gb.canonical_below(self.chain_dim[depth]));
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let j = self.others[depth];
        let slot = self.gb.insert_slot(self.g[j]);
        let kept = self.visit(depth + 1)?;
        if let Some(s) = slot {
            self.gb.remove_slot(s);
        }
        let slot = self.hb.insert_slot(self.h[j]);
        let erased = self.visit(depth + 1)?;
        if let Some(s) = slot {
            self.hb.remove_slot(s);
        }
        let mut out = vec![0u64; rem + 1];
        for (w, v) in kept.into_iter().enumerate() {
            out[w] += v;
        }
        for (w, v) in erased.into_iter().enumerate() {
            out[w + 1] += v;
        }
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// P_e(p) = Σ_w A_w p^w (1-p)^{n-1-w}.
pub fn bec_pe_from_counts(counts: &[u64], p: f64) -> f64 {
    let others = counts.len() - 1;
    counts
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(w, &a)| a as f64 * p.powi(w as i32) * (1.0 - p).powi((others - w) as i32))
        .sum()
}

/// Exact P_e at a rational erasure probability.
pub fn bec_pe_rational(counts: &[u64], p: &BigRational) -> BigRational {
    let others = counts.len() - 1;
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for (w, &a) in counts.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let term = num_traits::pow(p.clone(), w) * num_traits::pow(q.clone(), others - w);
        total += term * BigRational::from_integer(BigInt::from(a));
    }
    total
}

/// Coset leaders of a code of length <= 64 with at most 24 check bits.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    n: usize,
    checks: Vec<u64>,
    leaders: Vec<u64>,
}

impl SyndromeTable {
    pub fn length(&self) -> usize {
        self.n
    }

    pub fn num_cosets(&self) -> usize {
        self.leaders.len()
    }

    pub fn parity_check(&self) -> Vec<BitVec> {
        self.checks
            .iter()
            .map(|&h| BitVec::from_u64(h, self.n))
            .collect()
    }

    #[inline]
    pub fn syndrome(&self, v: u64) -> u32 {
        self.checks
            .iter()
            .enumerate()
            .fold(0, |s, (j, &h)| s | ((parity(h & v) as u32) << j))
    }

    #[inline]
    pub fn leader(&self, syndrome: u32) -> u64 {
        self.leaders[syndrome as usize]
    }

    pub fn leader_bits(&self, syndrome: u32) -> BitVec {
        BitVec::from_u64(self.leader(syndrome), self.n)
    }

    /// Block-MAP estimate of the transmitted codeword on a BSC with p < 1/2.
    pub fn decode_block(&self, received: u64) -> u64 {
        received ^ self.leader(self.syndrome(received))
    }
}

/// Builds the table whose leader for each coset is its minimum-weight member,
/// ties going to the member that is smallest as the string b_0 b_1 … b_{N-1}.
pub fn build_syndrome_table(code: &BinaryCode) -> Result<SyndromeTable> {
    check_packed(code)?;
    let n = code.length();
    let r = n - code.dim();
    if r > MAX_SYNDROME_BITS {
        return infeasible(format!(
            "syndrome table needs 2^{r} entries, budget is 2^{MAX_SYNDROME_BITS}"
        ));
    }
    let checks: Vec<u64> = code.parity_check().iter().map(BitVec::to_u64).collect();
    let mut table = SyndromeTable {
        n,
        checks,
        leaders: vec![u64::MAX; 1usize << r],
    };
    let mut filled = 0usize;
    let total = 1usize << r;
    'outer: for w in 0..=n {
        // Strings ordered by b_0 as most significant bit: walk w-subsets of an
        // n-bit integer in increasing order and reverse the bit order.
        let limit: u128 = 1u128 << n;
        let mut x: u128 = (1u128 << w) - 1;
        while x < limit {
            let pattern = if n == 0 {
                0
            } else {
                ((x as u64).reverse_bits()) >> (64 - n)
            };
            let s = table.syndrome(pattern) as usize;
            if table.leaders[s] == u64::MAX {
                table.leaders[s] = pattern;
                filled += 1;
                if filled == total {
                    break 'outer;
                }
            }
            if w == 0 {
                break;
            }
            let c = x & x.wrapping_neg();
            let rr = x + c;
            x = (((rr ^ x) >> 2) / c) | rr;
        }
    }
    debug_assert_eq!(filled, total);
    Ok(table)
}

/// Posterior P(X_t = 1 | y) by splitting the codeword likelihoods on the
/// target bit, together with a tie flag (equal distance profiles).
fn split_posterior(codewords: &[u64], target: usize, observed: u64, p: f64) -> (f64, bool) {
    let n_bits = 65;
    let mut prof = [[0u64; 65]; 2];
    let mask = !(1u64 << target);
    for &c in codewords {
        let d = ((c ^ observed) & mask).count_ones() as usize;
        prof[((c >> target) & 1) as usize][d] += 1;
    }
    let ratio = if p >= 1.0 {
        f64::INFINITY
    } else {
        p / (1.0 - p)
    };
    let mut s = [0.0f64; 2];
    for (b, row) in prof.iter().enumerate() {
        for (d, &cnt) in row.iter().enumerate().take(n_bits) {
            if cnt > 0 {
                s[b] += cnt as f64 * ratio.powi(d as i32);
            }
        }
    }
    let tie = prof[0] == prof[1];
    let total = s[0] + s[1];
    if tie || total == 0.0 {
        return (0.5, true);
    }
    (s[1] / total, false)
}

/// Likelihood-split bit-MAP estimate of the target on a BSC. The target bit of
/// `received` is ignored. Ties decide 0.
pub fn bsc_bitmap_direct(
    code: &BinaryCode,
    p: f64,
    received: &BitVec,
    target: usize,
) -> Result<(u8, f64)> {
    check_target(code, target)?;
    check_packed(code)?;
    let words = code.codewords_u64()?;
    let (p1, tie) = split_posterior(&words, target, received.to_u64(), p);
    Ok(((!tie && p1 > 0.5) as u8, p1))
}

/// Extrinsic bit-MAP decoder for one target coordinate on a BSC(p), p < 1/2.
///
/// The received word is reduced to its coset of the punctured code; the leader
/// carries a fixed decision and the codeword offset shifts it. Whether the
/// output is wrong therefore depends only on the noise pattern.
#[derive(Clone, Debug)]
pub struct ExtrinsicBscDecoder {
    n: usize,
    target: usize,
    p: f64,
    codewords: Vec<u64>,
    /// Dual vector (target bit excluded, compressed) giving c_t from the rest.
    link: Option<u64>,
    table: Option<SyndromeTable>,
    coset_p1: Vec<f64>,
    coset_bit: Vec<u8>,
}

impl ExtrinsicBscDecoder {
    pub fn new(code: &BinaryCode, target: usize, p: f64) -> Result<Self> {
        check_target(code, target)?;
        check_packed(code)?;
        if !(0.0..0.5).contains(&p) {
            return param(format!("BSC decoding needs 0 <= p < 1/2, got {p}"));
        }
        if code.dim() > MAX_ENUM_DIM {
            return infeasible("extrinsic BSC decoding enumerates 2^dim codewords");
        }
        let n = code.length();
        let codewords = code.codewords_u64()?;
        let link = code
            .parity_check()
            .iter()
            .find(|h| h.get(target))
            .map(|h| compress(h.to_u64(), target));
        let punct = puncture(code, target)?;
        let table = if punct.length() - punct.dim() <= MAX_SYNDROME_BITS {
            Some(build_syndrome_table(&punct)?)
        } else {
            None
        };
        let (coset_p1, coset_bit) = match &table {
            Some(t) => {
                let per: Vec<(f64, u8)> = (0..t.num_cosets() as u32)
                    .into_par_iter()
                    .map(|s| {
                        let e = expand(t.leader(s), target);
                        let (p1, tie) = split_posterior(&codewords, target, e, p);
                        (p1, (!tie && p1 > 0.5) as u8)
                    })
                    .collect();
                per.into_iter().unzip()
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(ExtrinsicBscDecoder {
            n,
            target,
            p,
            codewords,
            link,
            table,
            coset_p1,
            coset_bit,
        })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn crossover(&self) -> f64 {
        self.p
    }

    /// The syndrome table of the punctured code, when it fits the budget.
    pub fn table(&self) -> Option<&SyndromeTable> {
        self.table.as_ref()
    }

    /// True when no other coordinate carries information about the target.
    pub fn target_is_free(&self) -> bool {
        self.link.is_none()
    }

    /// (decision, P(X_t = 1 | y)) for a packed received word.
    pub fn decode_packed(&self, received: u64) -> (u8, f64) {
        match &self.table {
            Some(t) => {
                let z = compress(received, self.target);
                let s = t.syndrome(z);
                let offset = z ^ t.leader(s);
                let ct = self.link.map_or(0, |l| parity(l & offset));
                let p1 = self.coset_p1[s as usize];
                (
                    self.coset_bit[s as usize] ^ ct,
                    if ct == 1 { 1.0 - p1 } else { p1 },
                )
            }
            None => {
                let (p1, tie) = split_posterior(&self.codewords, self.target, received, self.p);
                ((!tie && p1 > 0.5) as u8, p1)
            }
        }
    }

    pub fn decode(&self, received: &BitVec) -> Result<u8> {
        if received.len() != self.n {
            return param("received word length does not match the code");
        }
        Ok(self.decode_packed(received.to_u64()).0)
    }
}

/// Re-inserts a zero at bit `t`.
#[inline]
fn expand(v: u64, t: usize) -> u64 {
    let low = v & ((1u64 << t) - 1);
    let high = if t + 1 >= 64 { 0 } else { (v >> t) << (t + 1) };
    low | high
}

/// Spec-level entry point: decode `received` with a prepared decoder.
pub fn bsc_extrinsic_bitmap(decoder: &ExtrinsicBscDecoder, received: &BitVec) -> Result<u8> {
    decoder.decode(received)
}

/// Exact extrinsic posterior of the target over a discrete BMS channel.
#[derive(Clone, Debug)]
pub struct BmsPosterior {
    n: usize,
    target: usize,
    codewords: Vec<u64>,
    ch: ChannelModel,
}

impl BmsPosterior {
    pub fn new(code: &BinaryCode, ch: &ChannelModel, target: usize) -> Result<Self> {
        check_target(code, target)?;
        check_packed(code)?;
        Ok(BmsPosterior {
            n: code.length(),
            target,
            codewords: code.codewords_u64()?,
            ch: ch.clone(),
        })
    }

    /// P(X_t = 1 | y) from symbol indices over all coordinates; the target
    /// entry is ignored. `None` when the observation has zero likelihood.
    pub fn p1(&self, obs: &[usize]) -> Option<f64> {
        let mut s = [0.0f64; 2];
        for &c in &self.codewords {
            let mut like = 1.0;
            for (i, &y) in obs.iter().enumerate() {
                if i == self.target {
                    continue;
                }
                let sym = if (c >> i) & 1 == 1 {
                    self.ch.negation(y)
                } else {
                    y
                };
                like *= self.ch.prob(sym);
                if like == 0.0 {
                    break;
                }
            }
            s[((c >> self.target) & 1) as usize] += like;
        }
        let total = s[0] + s[1];
        if total <= 0.0 {
            return None;
        }
        // Sums that agree up to rounding are exact ties.
        if (s[1] - s[0]).abs() <= TIE_REL * total {
            return Some(0.5);
        }
        Some(s[1] / total)
    }

    /// E[X_t | y] with x = (-1)^bit, from observed values at the non-target
    /// coordinates in increasing order.
    pub fn conditional_mean(&self, observation: &[f64]) -> Result<f64> {
        if observation.len() != self.n - 1 {
            return param(format!(
                "expected {} observed symbols, got {}",
                self.n - 1,
                observation.len()
            ));
        }
        let mut obs = vec![0usize; self.n];
        let mut it = observation.iter();
        for (i, slot) in obs.iter_mut().enumerate() {
            if i == self.target {
                continue;
            }
            let v = *it.next().unwrap();
            *slot = self.ch.index_of(v).ok_or_else(|| {
                Error::Parameter(format!("symbol {v} is not in the channel alphabet"))
            })?;
        }
        let p1 = self
            .p1(&obs)
            .ok_or_else(|| Error::Parameter("observation has zero likelihood".into()))?;
        Ok(1.0 - 2.0 * p1)
    }
}

/// E[X_t | Y_{~t} = observation] by summing likelihoods over all codewords.
pub fn bms_conditional_mean(
    code: &BinaryCode,
    ch: &ChannelModel,
    observation: &[f64],
    target: usize,
) -> Result<f64> {
    BmsPosterior::new(code, ch, target)?.conditional_mean(observation)
}

/// How a metric request is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo {
        samples: u64,
        seed: u64,
        workers: usize,
    },
}

/// 99% half-widths of Monte Carlo metric estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfWidths {
    pub pe: Option<f64>,
    pub pb: f64,
    pub mmse: f64,
    pub ber: f64,
    pub cond_entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricSource {
    Exact,
    MonteCarlo {
        samples: u64,
        half_width: HalfWidths,
    },
}

/// Extrinsic metrics of one target coordinate.
///
/// `pb` is the error probability of the hard decision; where the posterior is
/// exactly balanced outside the syndrome decoder it counts as half an error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrinsicMetrics {
    pub pe: Option<f64>,
    pub pb: f64,
    pub mmse: f64,
    pub ber: f64,
    pub cond_entropy: f64,
    /// E[g(Z)], which equals E[g(Z)^2] = 1 - mmse.
    pub mean_g: f64,
    pub source: MetricSource,
}

/// Per-outcome statistics: (P(X_t = 1 | y), decision error indicator).
pub type Outcome = (f64, f64);

/// A per-sample posterior source for one code, channel and target.
#[derive(Clone, Debug)]
pub enum PosteriorEngine {
    Bec {
        cols: PackedColumnsPublic,
        code: BinaryCode,
        target: usize,
        p: f64,
    },
    Bsc(ExtrinsicBscDecoder),
    Bms(BmsPosterior),
}

/// Opaque wrapper so the engine enum can stay public.
#[derive(Clone, Debug)]
pub struct PackedColumnsPublic(PackedColumns);

impl PosteriorEngine {
    pub fn new(code: &BinaryCode, ch: &ChannelModel, target: usize) -> Result<Self> {
        check_target(code, target)?;
        Ok(match ch.kind() {
            ChannelKind::Bec(p) => PosteriorEngine::Bec {
                cols: PackedColumnsPublic(PackedColumns::new(code)?),
                code: code.clone(),
                target,
                p,
            },
            ChannelKind::Bsc(p) => PosteriorEngine::Bsc(ExtrinsicBscDecoder::new(code, target, p)?),
            ChannelKind::DiscreteBms => PosteriorEngine::Bms(BmsPosterior::new(code, ch, target)?),
        })
    }

    fn n(&self) -> usize {
        match self {
            PosteriorEngine::Bec { cols, .. } => cols.0.g.len(),
            PosteriorEngine::Bsc(d) => d.n,
            PosteriorEngine::Bms(b) => b.n,
        }
    }

    /// One noisy observation under all-zero transmission.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Outcome {
        match self {
            PosteriorEngine::Bec {
                cols, target, p, ..
            } => {
                let mut erased = 0u64;
                for j in 0..self.n() {
                    if j != *target && rng.gen::<f64>() < *p {
                        erased |= 1 << j;
                    }
                }
                if cols.0.recoverable(erased, *target) {
                    (0.0, 0.0)
                } else {
                    (0.5, 0.5)
                }
            }
            PosteriorEngine::Bsc(d) => {
                let mut z = 0u64;
                for j in 0..d.n {
                    if j != d.target && rng.gen::<f64>() < d.p {
                        z |= 1 << j;
                    }
                }
                bsc_outcome(d, z)
            }
            PosteriorEngine::Bms(b) => {
                let obs: Vec<usize> = (0..b.n).map(|_| b.ch.sample_index(rng)).collect();
                bms_outcome(b.p1(&obs).unwrap_or(0.5))
            }
        }
    }

    /// Number of outcomes an exact evaluation enumerates.
    pub fn exact_outcomes(&self) -> u64 {
        match self {
            PosteriorEngine::Bec { .. } => 2,
            PosteriorEngine::Bsc(d) => 1u64.checked_shl((d.n - 1) as u32).unwrap_or(u64::MAX),
            PosteriorEngine::Bms(b) => {
                let a = b.ch.symbols().iter().filter(|s| s.1 > 0.0).count() as u64;
                (0..b.n - 1)
                    .try_fold(1u64, |acc, _| acc.checked_mul(a))
                    .unwrap_or(u64::MAX)
            }
        }
    }

    /// Probability-weighted sums of `k` statistics over every outcome.
    pub fn exact_fold<F>(&self, k: usize, stat: F) -> Result<Vec<f64>>
    where
        F: Fn(Outcome, &mut [f64]) + Sync,
    {
        let outcomes = self.exact_outcomes();
        if outcomes > MAX_EXACT_OUTCOMES {
            return infeasible(format!(
                "exact evaluation needs {outcomes} outcomes, budget is {MAX_EXACT_OUTCOMES}; use Monte Carlo"
            ));
        }
        let weighted = |pairs: &[(f64, Outcome)]| {
            let mut acc = vec![0.0; k];
            let mut buf = vec![0.0; k];
            for &(w, o) in pairs {
                stat(o, &mut buf);
                for i in 0..k {
                    acc[i] += w * buf[i];
                }
            }
            acc
        };
        match self {
            PosteriorEngine::Bec {
                code, target, p, ..
            } => {
                let counts = bec_unrecoverable_counts(code, *target)?;
                let pe = bec_pe_from_counts(&counts, *p);
                Ok(weighted(&[(1.0 - pe, (0.0, 0.0)), (pe, (0.5, 0.5))]))
            }
            PosteriorEngine::Bsc(d) => {
                let m = d.n - 1;
                let pw: Vec<f64> = (0..=m)
                    .map(|w| d.p.powi(w as i32) * (1.0 - d.p).powi((m - w) as i32))
                    .collect();
                let chunk = 1u64 << 12.min(m);
                let parts: Vec<Vec<f64>> = (0..(1u64 << m) / chunk)
                    .into_par_iter()
                    .map(|c| {
                        let mut acc = vec![0.0; k];
                        let mut buf = vec![0.0; k];
                        for zc in c * chunk..(c + 1) * chunk {
                            let w = pw[zc.count_ones() as usize];
                            if w == 0.0 {
                                continue;
                            }
                            stat(bsc_outcome(d, expand(zc, d.target)), &mut buf);
                            for i in 0..k {
                                acc[i] += w * buf[i];
                            }
                        }
                        acc
                    })
                    .collect();
                Ok(sum_parts(parts, k))
            }
            PosteriorEngine::Bms(b) => {
                let alphabet: Vec<usize> = (0..b.ch.alphabet_size())
                    .filter(|&i| b.ch.prob(i) > 0.0)
                    .collect();
                let a = alphabet.len() as u64;
                let m = b.n - 1;
                let chunk = 4096u64.min(outcomes);
                let blocks = outcomes.div_ceil(chunk);
                let parts: Vec<Vec<f64>> = (0..blocks)
                    .into_par_iter()
                    .map(|c| {
                        let mut acc = vec![0.0; k];
                        let mut buf = vec![0.0; k];
                        let mut obs = vec![0usize; b.n];
                        for idx in c * chunk..((c + 1) * chunk).min(outcomes) {
                            let mut rest = idx;
                            let mut w = 1.0;
                            let mut pos = 0;
                            for (i, slot) in obs.iter_mut().enumerate() {
                                if i == b.target {
                                    continue;
                                }
                                let sym = alphabet[(rest % a) as usize];
                                rest /= a;
                                *slot = sym;
                                w *= b.ch.prob(sym);
                                pos += 1;
                            }
                            debug_assert_eq!(pos, m);
                            let Some(p1) = b.p1(&obs) else { continue };
                            stat(bms_outcome(p1), &mut buf);
                            for i in 0..k {
                                acc[i] += w * buf[i];
                            }
                        }
                        acc
                    })
                    .collect();
                Ok(sum_parts(parts, k))
            }
        }
    }
}

fn sum_parts(parts: Vec<Vec<f64>>, k: usize) -> Vec<f64> {
    let mut total = vec![0.0; k];
    for part in parts {
        for i in 0..k {
            total[i] += part[i];
        }
    }
    total
}

fn bsc_outcome(d: &ExtrinsicBscDecoder, z: u64) -> Outcome {
    let (bit, p1) = d.decode_packed(z);
    let err = if d.target_is_free() { 0.5 } else { bit as f64 };
    (p1, err)
}

fn bms_outcome(p1: f64) -> Outcome {
    let err = if p1 == 0.5 {
        0.5
    } else {
        (p1 > 0.5) as u8 as f64
    };
    (p1, err)
}

/// Statistics recorded per outcome: pb, mmse, ber, H, g, erased.
fn metric_stats((p1, err): Outcome, out: &mut [f64]) {
    let g = 1.0 - 2.0 * p1;
    out[0] = err;
    out[1] = 4.0 * p1 * (1.0 - p1);
    out[2] = p1.min(1.0 - p1);
    out[3] = binary_entropy(p1);
    out[4] = g;
    out[5] = (p1 == 0.5) as u8 as f64;
}

/// Extrinsic metrics of `target`, exactly or by sampling.
pub fn extrinsic_metrics(
    code: &BinaryCode,
    ch: &ChannelModel,
    target: usize,
    mode: EvalMode,
) -> Result<ExtrinsicMetrics> {
    let engine = PosteriorEngine::new(code, ch, target)?;
    let is_bec = matches!(ch.kind(), ChannelKind::Bec(_));
    match mode {
        EvalMode::Exact => {
            let s = engine.exact_fold(6, metric_stats)?;
            Ok(ExtrinsicMetrics {
                pe: is_bec.then_some(s[5]),
                pb: s[0],
                mmse: s[1],
                ber: s[2],
                cond_entropy: s[3],
                mean_g: s[4],
                source: MetricSource::Exact,
            })
        }
        EvalMode::MonteCarlo {
            samples,
            seed,
            workers,
        } => {
            let mom = mc::run(samples, seed, workers, 6, |rng, out| {
                metric_stats(engine.sample(rng), out);
                Ok(())
            })?;
            Ok(ExtrinsicMetrics {
                pe: is_bec.then(|| mom.mean(5)),
                pb: mom.mean(0),
                mmse: mom.mean(1),
                ber: mom.mean(2),
                cond_entropy: mom.mean(3),
                mean_g: mom.mean(4),
                source: MetricSource::MonteCarlo {
                    samples,
                    half_width: HalfWidths {
                        pe: is_bec.then(|| mom.half_width(5)),
                        pb: mom.half_width(0),
                        mmse: mom.half_width(1),
                        ber: mom.half_width(2),
                        cond_entropy: mom.half_width(3),
                    },
                },
            })
        }
    }
}

pub fn majority3(a: u8, b: u8, c: u8) -> u8 {
    ((a & 1) + (b & 1) + (c & 1) >= 2) as u8
}

/// Majority(a,b,c) and the pointwise union bound ab + ac + bc.
pub fn majority_union(a: u8, b: u8, c: u8) -> (u8, u8) {
    let (a, b, c) = (a & 1, b & 1, c & 1);
    (majority3(a, b, c), a * b + a * c + b * c)
}

#[derive(Clone, Debug)]
enum LookKind {
    Bsc(ExtrinsicBscDecoder),
    Bms(BmsPosterior),
}

#[derive(Clone, Debug)]
struct LookDecoder {
    coords: Vec<usize>,
    kind: LookKind,
}

/// Majority vote over three extrinsic look decoders.
#[derive(Clone, Debug)]
pub struct MultiLookDecoder {
    n: usize,
    target: usize,
    looks: Vec<LookDecoder>,
}

impl MultiLookDecoder {
    /// `looks` are coordinate sets of the long code; the target is adjoined
    /// to each when missing. All three projected codes must be equal.
    pub fn new(
        code: &BinaryCode,
        looks: &[Vec<usize>],
        ch: &ChannelModel,
        target: usize,
    ) -> Result<Self> {
        check_target(code, target)?;
        if looks.len() != 3 {
            return param(format!(
                "majority decoding needs exactly 3 looks, got {}",
                looks.len()
            ));
        }
        let mut decoders = Vec::with_capacity(3);
        let mut first: Option<BinaryCode> = None;
        for look in looks {
            let mut coords = look.clone();
            if !coords.contains(&target) {
                coords.push(target);
            }
            coords.sort_unstable();
            coords.dedup();
            let projected = project(code, &coords)?;
            match &first {
                None => first = Some(projected.clone()),
                Some(f) => {
                    if f.length() != projected.length() || !codes_equal(f, &projected)? {
                        return Err(Error::Structure(
                            "look projections are not equal codes".into(),
                        ));
                    }
                }
            }
            let local = coords.iter().position(|&c| c == target).unwrap();
            let kind = match ch.kind() {
                ChannelKind::Bsc(p) => {
                    LookKind::Bsc(ExtrinsicBscDecoder::new(&projected, local, p)?)
                }
                _ => LookKind::Bms(BmsPosterior::new(&projected, ch, local)?),
            };
            decoders.push(LookDecoder { coords, kind });
        }
        Ok(MultiLookDecoder {
            n: code.length(),
            target,
            looks: decoders,
        })
    }

    pub fn from_family(
        code: &BinaryCode,
        family: &LookFamily,
        ch: &ChannelModel,
        target: usize,
    ) -> Result<Self> {
        Self::new(code, &family.looks, ch, target)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn look_coords(&self, i: usize) -> &[usize] {
        &self.looks[i].coords
    }

    /// The three per-look decisions for a received word (BSC looks).
    pub fn look_bits(&self, received: &BitVec) -> Result<[u8; 3]> {
        if received.len() != self.n {
            return param("received word length does not match the code");
        }
        let mut out = [0u8; 3];
        for (o, look) in out.iter_mut().zip(&self.looks) {
            let local = received.select(&look.coords).to_u64();
            *o = match &look.kind {
                LookKind::Bsc(d) => d.decode_packed(local).0,
                LookKind::Bms(_) => return param("look decoders expect symbol observations"),
            };
        }
        Ok(out)
    }

    pub fn decode_bits(&self, received: &BitVec) -> Result<u8> {
        let [a, b, c] = self.look_bits(received)?;
        Ok(majority3(a, b, c))
    }

    /// Hard decisions of the per-look conditional means from observed values
    /// at every coordinate of the long code (target entry ignored).
    pub fn look_bits_symbols(&self, observation: &[f64]) -> Result<[u8; 3]> {
        if observation.len() != self.n {
            return param("observation length does not match the code");
        }
        let mut out = [0u8; 3];
        for (o, look) in out.iter_mut().zip(&self.looks) {
            *o = match &look.kind {
                LookKind::Bms(b) => {
                    let local: Vec<f64> = look
                        .coords
                        .iter()
                        .filter(|&&c| c != self.target)
                        .map(|&c| observation[c])
                        .collect();
                    (b.conditional_mean(&local)? < 0.0) as u8
                }
                LookKind::Bsc(d) => {
                    let mut word = 0u64;
                    for (j, &c) in look.coords.iter().enumerate() {
                        if c != self.target && observation[c] < 0.0 {
                            word |= 1 << j;
                        }
                    }
                    d.decode_packed(word).0
                }
            };
        }
        Ok(out)
    }

    pub fn decode_symbols(&self, observation: &[f64]) -> Result<u8> {
        let [a, b, c] = self.look_bits_symbols(observation)?;
        Ok(majority3(a, b, c))
    }
}

/// One-shot majority decoding over three looks.
pub fn multi_look_decode(
    code: &BinaryCode,
    looks: &LookFamily,
    ch: &ChannelModel,
    observation: &[f64],
    target: usize,
) -> Result<u8> {
    MultiLookDecoder::from_family(code, looks, ch, target)?.decode_symbols(observation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{repetition, rm_generator, single_parity_check, RmParams};

    fn erase(n: usize, bits: &[usize]) -> ErasurePattern {
        let mut v = BitVec::zeros(n);
        for &b in bits {
            v.set(b, true);
        }
        ErasurePattern(v)
    }

    #[test]
    fn recoverability_examples() {
        let rep = repetition(3).unwrap();
        assert!(!bec_recoverable(&rep, &erase(3, &[1, 2]), 0).unwrap());
        assert!(bec_recoverable(&rep, &erase(3, &[1]), 0).unwrap());
        let spc = single_parity_check(3).unwrap();
        assert!(bec_recoverable(&spc, &erase(3, &[]), 0).unwrap());
        assert!(bec_recoverable(&spc, &erase(3, &[0]), 0).unwrap());
        assert!(!bec_recoverable(&spc, &erase(3, &[2]), 0).unwrap());
        assert!(bec_recoverable(&spc, &erase(3, &[]), 3).is_err());
    }

    #[test]
    fn erasure_counts_match_brute_force() {
        for (r, m) in [(0, 3), (1, 3), (2, 3), (1, 4), (2, 4)] {
            let code = rm_generator(RmParams::new(r, m).unwrap()).unwrap();
            let n = code.length();
            let counts = bec_unrecoverable_counts(&code, 0).unwrap();
            let mut brute = vec![0u64; n];
            for mask in 0u64..1 << (n - 1) {
                let erased = mask << 1;
                let pat = ErasurePattern(BitVec::from_u64(erased, n));
                if !bec_recoverable(&code, &pat, 0).unwrap() {
                    brute[mask.count_ones() as usize] += 1;
                }
            }
            assert_eq!(counts, brute, "RM({r},{m})");
        }
    }

    #[test]
    fn syndrome_table_examples() {
        let t = build_syndrome_table(&crate::codes::full_space(4).unwrap()).unwrap();
        assert_eq!(t.num_cosets(), 1);
        assert_eq!(t.leader(0), 0);

        let t = build_syndrome_table(&repetition(3).unwrap()).unwrap();
        let mut leaders: Vec<String> = (0..4).map(|s| t.leader_bits(s).to_string()).collect();
        leaders.sort();
        assert_eq!(leaders, vec!["000", "001", "010", "100"]);
        let s = t.syndrome(0b110); // string "011"
        assert_eq!(t.leader_bits(s).to_string(), "100");

        let t = build_syndrome_table(&single_parity_check(3).unwrap()).unwrap();
        let mut leaders: Vec<String> = (0..2).map(|s| t.leader_bits(s).to_string()).collect();
        leaders.sort();
        assert_eq!(leaders, vec!["000", "001"]);
    }

    #[test]
    fn bsc_decoder_examples() {
        let rep = repetition(3).unwrap();
        let d = ExtrinsicBscDecoder::new(&rep, 0, 0.1).unwrap();
        assert_eq!(d.decode(&BitVec::from_u64(0b110, 3)).unwrap(), 1);
        let tie = d.decode(&BitVec::from_u64(0b100, 3)).unwrap();
        for _ in 0..5 {
            assert_eq!(d.decode(&BitVec::from_u64(0b100, 3)).unwrap(), tie);
        }
        assert!(ExtrinsicBscDecoder::new(&rep, 0, 0.5).is_err());

        for n in 2..=6 {
            let spc = single_parity_check(n).unwrap();
            for p in [0.05, 0.2, 0.4] {
                let d = ExtrinsicBscDecoder::new(&spc, 0, p).unwrap();
                for y in 0u64..1 << n {
                    let xor = parity(y >> 1);
                    assert_eq!(d.decode_packed(y).0, xor);
                    assert_eq!(
                        bsc_bitmap_direct(&spc, p, &BitVec::from_u64(y, n), 0)
                            .unwrap()
                            .0,
                        xor
                    );
                }
            }
        }
    }

    #[test]
    fn conditional_mean_examples() {
        let rep = repetition(3).unwrap();
        let ch = ChannelModel::bsc(0.1).unwrap();
        let g = bms_conditional_mean(&rep, &ch, &[1.0, 1.0], 0).unwrap();
        assert!((g - 0.8 / 0.82).abs() < 1e-12);
        assert_eq!(
            bms_conditional_mean(&rep, &ch, &[1.0, -1.0], 0).unwrap(),
            0.0
        );
        let bec = ChannelModel::bec(0.3).unwrap();
        let code = rm_generator(RmParams::new(1, 3).unwrap()).unwrap();
        assert_eq!(
            bms_conditional_mean(&code, &bec, &[0.0; 7], 0).unwrap(),
            0.0
        );
        assert!(bms_conditional_mean(&rep, &ch, &[1.0], 0).is_err());
        assert!(bms_conditional_mean(&rep, &ch, &[1.0, 0.5], 0).is_err());
    }

    #[test]
    fn metric_examples() {
        for n in 2..=5 {
            let p = 0.3;
            let ch = ChannelModel::bec(p).unwrap();
            let m = extrinsic_metrics(&repetition(n).unwrap(), &ch, 0, EvalMode::Exact).unwrap();
            assert!((m.pe.unwrap() - p.powi(n as i32 - 1)).abs() < 1e-14);
            let m = extrinsic_metrics(&single_parity_check(n).unwrap(), &ch, 0, EvalMode::Exact)
                .unwrap();
            assert!((m.pe.unwrap() - (1.0 - (1.0 - p).powi(n as i32 - 1))).abs() < 1e-14);
        }
        let p: f64 = 0.1;
        let ch = ChannelModel::bsc(p).unwrap();
        let m = extrinsic_metrics(&repetition(3).unwrap(), &ch, 0, EvalMode::Exact).unwrap();
        let want = 1.0 - (1.0 - 2.0 * p).powi(2) / (1.0 - 2.0 * p + 2.0 * p * p);
        assert!((m.mmse - want).abs() < 1e-12, "{} vs {want}", m.mmse);
        assert!((want - 0.21951).abs() < 1e-5);
        assert_eq!(m.pe, None);
    }

    #[test]
    fn majority_table() {
        assert_eq!(majority3(1, 1, 0), 1);
        assert_eq!(majority3(0, 0, 0), 0);
        for x in 0..8u8 {
            let (maj, bound) = majority_union(x & 1, (x >> 1) & 1, (x >> 2) & 1);
            assert!(maj <= bound);
        }
    }

    #[test]
    fn compress_expand_inverse() {
        for t in [0, 3, 63] {
            for v in [0u64, 1, 0xdead_beef, u64::MAX >> 1] {
                let c = compress(v, t);
                assert_eq!(compress(expand(c, t), t), c);
            }
        }
    }
}
