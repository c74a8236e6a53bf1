//! Packed bit vectors over GF(2).

use std::fmt;

/// A fixed-length bit vector stored in 64-bit words, bit `i` in word `i / 64`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from the low `len` bits of `word` (`len <= 64`).
    pub fn from_u64(word: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word;
            v.clear_tail();
        }
        v
    }

    /// Low 64 bits as a word. Only meaningful when `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    /// The sub-vector at the given positions, in the order given.
    pub fn select(&self, coords: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(coords.len());
        for (j, &c) in coords.iter().enumerate() {
            if self.get(c) {
                out.set(j, true);
            }
        }
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len & 63;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Rank of a set of words over GF(2), vectors packed into `u64`.
pub fn rank_u64(vectors: &[u64]) -> usize {
    let mut basis = XorBasis::default();
    vectors.iter().filter(|&&v| basis.insert(v)).count()
}

/// Incremental XOR basis of `u64` vectors indexed by leading bit.
#[derive(Clone, Debug)]
pub struct XorBasis {
    slots: [u64; 64],
    rank: usize,
}

impl Default for XorBasis {
    fn default() -> Self {
        XorBasis {
            slots: [0; 64],
            rank: 0,
        }
    }
}

impl XorBasis {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Reduces `v` against the basis.
    #[inline]
    pub fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let hb = 63 - v.leading_zeros() as usize;
            let s = self.slots[hb];
            if s == 0 {
                return v;
            }
            v ^= s;
        }
        0
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    /// Inserts `v`; returns true if the span grew.
    #[inline]
    pub fn insert(&mut self, v: u64) -> bool {
        self.insert_slot(v).is_some()
    }

    /// Inserts `v` and returns the slot that was filled, for undo.
    #[inline]
    pub fn insert_slot(&mut self, v: u64) -> Option<usize> {
        let r = self.reduce(v);
        if r == 0 {
            return None;
        }
        let hb = 63 - r.leading_zeros() as usize;
        self.slots[hb] = r;
        self.rank += 1;
        Some(hb)
    }

    #[inline]
    pub fn remove_slot(&mut self, slot: usize) {
        self.slots[slot] = 0;
        self.rank -= 1;
    }

    /// Reduced echelon basis of the span's intersection with the vectors
    /// supported on bits `0..bits`.
    pub fn canonical_below(&self, bits: usize) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for i in 0..bits.min(64) {
            let mut v = self.slots[i];
            if v == 0 {
                continue;
            }
            for &w in out.iter().rev() {
                let lead = 63 - w.leading_zeros();
                if v >> lead & 1 == 1 {
                    v ^= w;
                }
            }
            out.push(v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_weight() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.weight(), 3);
        assert_eq!(v.ones_iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(v.first_one(), Some(0));
        v.flip(0);
        assert_eq!(v.first_one(), Some(64));
    }

    #[test]
    fn ones_has_clean_tail() {
        let v = BitVec::ones(70);
        assert_eq!(v.weight(), 70);
    }

    #[test]
    fn rank_of_words() {
        assert_eq!(rank_u64(&[]), 0);
        assert_eq!(rank_u64(&[0b011, 0b101, 0b110]), 2);
        assert_eq!(rank_u64(&[1, 2, 4, 8]), 4);
    }

    #[test]
    fn display_roundtrip() {
        let v = BitVec::from_u64(0b1101, 5);
        assert_eq!(v.to_string(), "10110");
    }
}
