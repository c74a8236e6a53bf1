//! Binary linear codes and Reed–Muller constructions.
//!
//! Codes are held in reduced row echelon form so that two codes with the same
//! row space have identical generator lists.

use crate::bits::BitVec;
use crate::error::{infeasible, param, Error, Result};
use num_rational::Ratio;

/// Largest `m` for which RM generator matrices are materialized.
pub const MAX_RM_M: usize = 24;
/// Largest dimension for which codewords are enumerated.
pub const MAX_ENUM_DIM: usize = 24;
/// Cap on the number of generator bits held by a single code.
const MAX_GENERATOR_BITS: u64 = 1 << 31;

/// Order and number of variables of a Reed–Muller code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RmParams {
    r: usize,
    m: usize,
}

impl RmParams {
    /// `r <= m <= 64`. Generator construction further requires `m <= 24`.
    pub fn new(r: usize, m: usize) -> Result<Self> {
        if r > m {
            return param(format!("RM order r={r} exceeds m={m}"));
        }
        if m > 64 {
            return param(format!("m={m} exceeds 64"));
        }
        Ok(RmParams { r, m })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Σ_{i≤r} C(m,i).
    pub fn dim(&self) -> u128 {
        (0..=self.r)
            .map(|i| binomial(self.m as u64, i as u64))
            .sum()
    }
}

/// Exact binomial coefficient for arguments up to 64.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// A bijection on `[N]`; `images[i]` is where coordinate `i` is sent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordPermutation {
    images: Vec<usize>,
}

impl CoordPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return param("images do not form a permutation");
            }
            seen[i] = true;
        }
        Ok(CoordPermutation { images })
    }

    pub fn identity(n: usize) -> Self {
        CoordPermutation {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        CoordPermutation { images: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        CoordPermutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    /// Moves the symbol at coordinate `i` to coordinate `π(i)`.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(v.len());
        for i in v.ones_iter() {
            out.set(self.images[i], true);
        }
        out
    }
}

/// A binary linear code held in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    length: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl BinaryCode {
    /// Builds the row space of `generators`; they need not be independent.
    pub fn from_generators(length: usize, generators: &[BitVec]) -> Result<Self> {
        if length == 0 {
            return param("code length must be positive");
        }
        if generators.iter().any(|g| g.len() != length) {
            return param("generator length mismatch");
        }
        let mut rows: Vec<BitVec> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for g in generators {
            let mut v = g.clone();
            for (row, &p) in rows.iter().zip(&pivots) {
                if v.get(p) {
                    v.xor_assign(row);
                }
            }
            let Some(p) = v.first_one() else { continue };
            for row in rows.iter_mut() {
                if row.get(p) {
                    row.xor_assign(&v);
                }
            }
            rows.push(v);
            pivots.push(p);
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| pivots[i]);
        let rows = order.iter().map(|&i| rows[i].clone()).collect();
        let pivots = order.iter().map(|&i| pivots[i]).collect();
        Ok(BinaryCode {
            length,
            rows,
            pivots,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.dim() as u64, self.length as u64)
    }

    pub fn rate_f64(&self) -> f64 {
        self.dim() as f64 / self.length as f64
    }

    /// Canonical (RREF) generator rows.
    pub fn generators(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        if v.len() != self.length {
            return false;
        }
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v.is_zero()
    }

    /// Codeword for the message whose bit `i` selects generator `i`.
    pub fn encode(&self, message: u64) -> BitVec {
        let mut c = BitVec::zeros(self.length);
        for (i, row) in self.rows.iter().enumerate() {
            if (message >> i) & 1 == 1 {
                c.xor_assign(row);
            }
        }
        c
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.dim() > MAX_ENUM_DIM {
            return infeasible(format!(
                "enumerating 2^{} codewords exceeds the 2^{MAX_ENUM_DIM} budget",
                self.dim()
            ));
        }
        Ok(())
    }

    /// Visits every codeword in Gray-code order, starting from zero.
    pub fn for_each_codeword(&self, mut f: impl FnMut(&BitVec)) -> Result<()> {
        self.check_enumerable()?;
        let mut c = BitVec::zeros(self.length);
        f(&c);
        for i in 1u64..(1u64 << self.dim()) {
            c.xor_assign(&self.rows[i.trailing_zeros() as usize]);
            f(&c);
        }
        Ok(())
    }

    /// All codewords packed into words (requires `N <= 64`), Gray-code order.
    pub fn codewords_u64(&self) -> Result<Vec<u64>> {
        if self.length > 64 {
            return infeasible("packed codeword list requires length <= 64");
        }
        self.check_enumerable()?;
        let rows: Vec<u64> = self.rows.iter().map(|r| r.to_u64()).collect();
        let mut out = Vec::with_capacity(1usize << self.dim());
        let mut c = 0u64;
        out.push(c);
        for i in 1u64..(1u64 << self.dim()) {
            c ^= rows[i.trailing_zeros() as usize];
            out.push(c);
        }
        Ok(out)
    }

    /// A basis of the dual code, one row per non-pivot column.
    pub fn parity_check(&self) -> Vec<BitVec> {
        let mut is_pivot = vec![false; self.length];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.length)
            .filter(|&j| !is_pivot[j])
            .map(|j| {
                let mut h = BitVec::zeros(self.length);
                h.set(j, true);
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    if row.get(j) {
                        h.set(p, true);
                    }
                }
                h
            })
            .collect()
    }

    /// Column `j` of the generator matrix as a vector of length `dim`.
    pub fn column(&self, j: usize) -> BitVec {
        let mut col = BitVec::zeros(self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            if row.get(j) {
                col.set(i, true);
            }
        }
        col
    }

    /// Text form: `N dim`, then one line of '0'/'1' per generator.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.length, self.dim());
        for row in &self.rows {
            s.push_str(&row.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty code file".into(),
        })?;
        let nums: Vec<&str> = header.split_whitespace().collect();
        let parse_num = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: hl,
                msg: format!("expected integer, found {s:?}"),
            })
        };
        if nums.len() != 2 {
            return Err(Error::Parse {
                line: hl,
                msg: "header must be `N dim`".into(),
            });
        }
        let (n, k) = (parse_num(nums[0])?, parse_num(nums[1])?);
        let mut gens = Vec::with_capacity(k);
        for (ln, line) in lines {
            if line.len() != n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {n} bits, found {}", line.len()),
                });
            }
            let mut v = BitVec::zeros(n);
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => v.set(j, true),
                    _ => {
                        return Err(Error::Parse {
                            line: ln,
                            msg: format!("invalid character {ch:?}"),
                        })
                    }
                }
            }
            gens.push(v);
        }
        if gens.len() != k {
            return Err(Error::Parse {
                line: hl,
                msg: format!("header announces {k} generators, found {}", gens.len()),
            });
        }
        BinaryCode::from_generators(n, &gens)
    }
}

/// Binary expansion of `index`, least-significant bit first.
pub fn theta_map(m: usize, index: u64) -> Result<Vec<u8>> {
    if m > 64 || (m < 64 && index >> m != 0) {
        return param(format!("index {index} out of range for m={m}"));
    }
    Ok((0..m).map(|i| ((index >> i) & 1) as u8).collect())
}

/// Inverse of [`theta_map`].
pub fn theta_inverse(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as u64 & 1) << i))
}

/// Reed–Muller code RM(r, m): evaluations of all polynomials of degree at most
/// `r` at the points `theta_map(m, ℓ)`, `ℓ = 0..2^m`.
pub fn rm_generator(params: RmParams) -> Result<BinaryCode> {
    let (r, m) = (params.r, params.m);
    if m > MAX_RM_M {
        return param(format!(
            "m={m} exceeds the generator budget m <= {MAX_RM_M}"
        ));
    }
    let n = 1usize << m;
    if params.dim() as u64 * n as u64 > MAX_GENERATOR_BITS {
        return infeasible(format!("RM({r},{m}) generator matrix too large"));
    }
    let full = (n - 1) as u64;
    let mut gens = Vec::with_capacity(params.dim() as usize);
    for s in 0..(n as u64) {
        if s.count_ones() as usize > r {
            continue;
        }
        // Monomial Π_{i∈S} x_i is one exactly at the supersets of S.
        let mut row = BitVec::zeros(n);
        let comp = full & !s;
        let mut sub = comp;
        loop {
            row.set((s | sub) as usize, true);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & comp;
        }
        gens.push(row);
    }
    BinaryCode::from_generators(n, &gens)
}

/// Exact rate (Σ_{i≤r} C(m,i)) / 2^m.
pub fn rm_rate_exact(params: RmParams) -> Ratio<u128> {
    Ratio::new(params.dim(), 1u128 << params.m)
}

pub fn repetition(n: usize) -> Result<BinaryCode> {
    BinaryCode::from_generators(n, &[BitVec::ones(n)])
}

/// Even-weight code of length `n`.
pub fn single_parity_check(n: usize) -> Result<BinaryCode> {
    if n < 2 {
        return param("single-parity-check code needs length >= 2");
    }
    let gens: Vec<BitVec> = (1..n)
        .map(|i| {
            let mut v = BitVec::zeros(n);
            v.set(0, true);
            v.set(i, true);
            v
        })
        .collect();
    BinaryCode::from_generators(n, &gens)
}

pub fn full_space(n: usize) -> Result<BinaryCode> {
    let gens: Vec<BitVec> = (0..n)
        .map(|i| {
            let mut v = BitVec::zeros(n);
            v.set(i, true);
            v
        })
        .collect();
    BinaryCode::from_generators(n, &gens)
}

/// The code `{c_A : c ∈ code}` for strictly increasing `coords`.
pub fn project(code: &BinaryCode, coords: &[usize]) -> Result<BinaryCode> {
    if coords.is_empty() {
        return param("projection onto an empty coordinate set");
    }
    if coords.windows(2).any(|w| w[0] >= w[1]) {
        return param("projection coordinates must be strictly increasing");
    }
    if *coords.last().unwrap() >= code.length {
        return param("projection coordinate out of range");
    }
    let gens: Vec<BitVec> = code.rows.iter().map(|r| r.select(coords)).collect();
    BinaryCode::from_generators(coords.len(), &gens)
}

/// Removes one coordinate.
pub fn puncture(code: &BinaryCode, coord: usize) -> Result<BinaryCode> {
    if coord >= code.length {
        return param("puncture coordinate out of range");
    }
    if code.length == 1 {
        return param("cannot puncture a length-1 code");
    }
    let coords: Vec<usize> = (0..code.length).filter(|&j| j != coord).collect();
    project(code, &coords)
}

pub fn codes_equal(a: &BinaryCode, b: &BinaryCode) -> Result<bool> {
    if a.length != b.length {
        return param(format!("length mismatch: {} vs {}", a.length, b.length));
    }
    Ok(a.rows == b.rows)
}

/// Image of a code under a coordinate permutation.
pub fn permute_code(code: &BinaryCode, perm: &CoordPermutation) -> Result<BinaryCode> {
    if perm.len() != code.length {
        return param("permutation length does not match code length");
    }
    let gens: Vec<BitVec> = code.rows.iter().map(|r| perm.apply(r)).collect();
    BinaryCode::from_generators(code.length, &gens)
}

pub fn min_distance(code: &BinaryCode) -> Result<usize> {
    if code.dim() == 0 {
        return Err(Error::UndefinedDistance);
    }
    code.check_enumerable()?;
    if code.length <= 64 {
        let words = code.codewords_u64()?;
        return Ok(words[1..]
            .iter()
            .map(|w| w.count_ones() as usize)
            .min()
            .unwrap());
    }
    let mut best = usize::MAX;
    code.for_each_codeword(|c| {
        let w = c.weight();
        if w > 0 && w < best {
            best = w;
        }
    })?;
    Ok(best)
}

pub fn is_automorphism(code: &BinaryCode, perm: &CoordPermutation) -> Result<bool> {
    if perm.len() != code.length {
        return param("permutation length does not match code length");
    }
    Ok(code.rows.iter().all(|r| code.contains(&perm.apply(r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(r: usize, m: usize) -> BinaryCode {
        rm_generator(RmParams::new(r, m).unwrap()).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_map(5, 19).unwrap(), vec![1, 1, 0, 0, 1]);
        assert_eq!(theta_map(3, 0).unwrap(), vec![0, 0, 0]);
        assert_eq!(theta_map(3, 5).unwrap(), vec![1, 0, 1]);
        assert!(theta_map(3, 8).is_err());
        assert_eq!(theta_inverse(&[1, 1, 0, 0, 1]), 19);
    }

    #[test]
    fn rm_small_examples() {
        let c = rm(0, 2);
        assert_eq!(c.dim(), 1);
        assert_eq!(c.generators()[0].to_string(), "1111");
        assert_eq!(rm(3, 3).dim(), 8);
        let c = rm(1, 3);
        assert_eq!((c.length(), c.dim()), (8, 4));
        assert_eq!(min_distance(&c).unwrap(), 4);
        assert!(RmParams::new(4, 3).is_err());
    }

    #[test]
    fn rates() {
        let r = rm_rate_exact(RmParams::new(1, 3).unwrap());
        assert_eq!(r, Ratio::new(1, 2));
        assert_eq!(
            rm_rate_exact(RmParams::new(2, 4).unwrap()),
            Ratio::new(11, 16)
        );
        assert_eq!(
            rm_rate_exact(RmParams::new(64, 64).unwrap()),
            Ratio::from_integer(1)
        );
        assert_eq!(
            rm_rate_exact(RmParams::new(5, 5).unwrap()),
            Ratio::from_integer(1)
        );
    }

    #[test]
    fn projection_examples() {
        let c = rm(1, 3);
        let all: Vec<usize> = (0..8).collect();
        assert!(codes_equal(&project(&c, &all).unwrap(), &c).unwrap());
        assert!(codes_equal(&project(&c, &[0, 1, 2, 3]).unwrap(), &rm(1, 2)).unwrap());
        let rep = repetition(4).unwrap();
        assert!(codes_equal(&project(&rep, &[0, 1]).unwrap(), &repetition(2).unwrap()).unwrap());
        assert!(project(&c, &[1, 1]).is_err());
        assert!(project(&c, &[8]).is_err());
        assert!(project(&c, &[2, 1]).is_err());
    }

    #[test]
    fn equality_examples() {
        assert!(codes_equal(&rm(1, 2), &single_parity_check(4).unwrap()).unwrap());
        assert!(!codes_equal(&rm(1, 3), &rm(0, 3)).unwrap());
        assert!(codes_equal(&rm(1, 3), &rm(1, 2)).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(min_distance(&repetition(4).unwrap()).unwrap(), 4);
        assert_eq!(min_distance(&rm(4, 4)).unwrap(), 1);
        let zero = BinaryCode::from_generators(4, &[]).unwrap();
        assert_eq!(min_distance(&zero), Err(Error::UndefinedDistance));
    }

    #[test]
    fn automorphisms() {
        let c = rm(1, 3);
        assert!(is_automorphism(&c, &CoordPermutation::identity(8)).unwrap());
        let rep = repetition(5).unwrap();
        let p = CoordPermutation::new(vec![4, 0, 3, 1, 2]).unwrap();
        assert!(is_automorphism(&rep, &p).unwrap());
        // x -> Mx with M = [[1,1,0],[0,1,0],[0,0,1]] acting on theta images.
        let img: Vec<usize> = (0..8u64)
            .map(|l| {
                let b = theta_map(3, l).unwrap();
                theta_inverse(&[b[0] ^ b[1], b[1], b[2]]) as usize
            })
            .collect();
        assert!(is_automorphism(&c, &CoordPermutation::new(img).unwrap()).unwrap());
        // A transposition of two points is not an automorphism of RM(1,3).
        let p = CoordPermutation::new(vec![1, 0, 2, 3, 4, 5, 6, 7]).unwrap();
        assert!(!is_automorphism(&c, &p).unwrap());
    }

    #[test]
    fn text_roundtrip() {
        let c = rm(1, 3);
        let t = c.to_text();
        assert!(t.starts_with("8 4\n"));
        assert_eq!(BinaryCode::from_text(&t).unwrap(), c);
        let err = BinaryCode::from_text("4 1\n10x1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn parity_check_is_orthogonal() {
        let c = rm(1, 4);
        let h = c.parity_check();
        assert_eq!(h.len(), 16 - 5);
        for g in c.generators() {
            for row in &h {
                assert!(!g.dot(row));
            }
        }
    }

    #[test]
    fn codeword_enumeration_is_complete() {
        let c = rm(1, 3);
        let mut words = c.codewords_u64().unwrap();
        words.sort();
        words.dedup();
        assert_eq!(words.len(), 16);
        let mut count = 0;
        c.for_each_codeword(|w| {
            assert!(c.contains(w));
            count += 1;
        })
        .unwrap();
        assert_eq!(count, 16);
    }
}
