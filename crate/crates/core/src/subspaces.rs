//! Subspace families over F_2^m: multi-look families, spreads, Gaussian
//! binomials and the general linear group acting on coordinate indices.

use crate::bits::{rank_u64, XorBasis};
use crate::codes::CoordPermutation;
use crate::error::{infeasible, param, Error, Result};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use rand::Rng;

/// Largest ambient dimension for which look index sets are listed.
pub const MAX_LOOK_M: usize = 24;
/// Largest extension degree supported by the spread construction.
pub const MAX_FIELD_DEGREE: usize = 16;

/// Coordinate sets of the subspaces U_0..U_{s-1} of F_2^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookFamily {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    /// Ascending index sets, one per look.
    pub looks: Vec<Vec<usize>>,
    /// Unit-vector basis of each look's subspace, as bit masks over F_2^m.
    pub subspace_bases: Vec<Vec<u64>>,
    pub pairwise_overlap: Ratio<u64>,
}

impl LookFamily {
    pub fn look_size(&self) -> usize {
        self.looks.first().map_or(0, Vec::len)
    }

    /// Indices shared by every look.
    pub fn common_intersection(&self) -> Vec<usize> {
        let mut common = self.looks[0].clone();
        for look in &self.looks[1..] {
            common.retain(|i| look.binary_search(i).is_ok());
        }
        common
    }

    /// Dimension of each look's subspace, `m - (s-1)t`.
    pub fn look_dim(&self) -> usize {
        self.m - (self.s - 1) * self.t
    }
}

/// U_i = F_2^{m-st} × {0}^{ti} × F_2^t × {0}^{t(s-1-i)} for i < s.
pub fn multi_look_family(m: usize, s: usize, t: usize) -> Result<LookFamily> {
    if s == 0 || t == 0 {
        return param("s and t must be positive");
    }
    if s * t > m {
        return param(format!("s·t = {} exceeds m = {m}", s * t));
    }
    if m > MAX_LOOK_M {
        return infeasible(format!("m = {m} exceeds the look budget {MAX_LOOK_M}"));
    }
    let free = m - s * t;
    let low = (1u64 << free) - 1;
    let mut looks = Vec::with_capacity(s);
    let mut bases = Vec::with_capacity(s);
    for i in 0..s {
        let block = ((1u64 << t) - 1) << (free + t * i);
        let mask = low | block;
        looks.push(
            (0..1u64 << m)
                .filter(|l| l & !mask == 0)
                .map(|l| l as usize)
                .collect(),
        );
        bases.push(
            (0..m)
                .filter(|&b| (mask >> b) & 1 == 1)
                .map(|b| 1u64 << b)
                .collect(),
        );
    }
    Ok(LookFamily {
        m,
        s,
        t,
        looks,
        subspace_bases: bases,
        pairwise_overlap: Ratio::new(1, 1u64 << t),
    })
}

/// Conway polynomials over F_2 for degrees 1..=16, bit i holding the
/// coefficient of x^i.
const CONWAY: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x5B, 0x83, 0x11D, 0x211, 0x46F, 0x805, 0x10EB, 0x201B, 0x40A9,
    0x8035, 0x1002D,
];

/// GF(2^n) in polynomial basis, n <= 16.
#[derive(Clone, Debug)]
pub struct BinaryField {
    degree: usize,
    modulus: u32,
}

impl BinaryField {
    /// The field defined by the tabulated Conway polynomial, falling back to
    /// the next primitive polynomial if the table entry fails the order check.
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_FIELD_DEGREE {
            return infeasible(format!(
                "field degree {degree} outside 1..={MAX_FIELD_DEGREE}"
            ));
        }
        let first = CONWAY[degree - 1];
        let top = 1u32 << degree;
        let candidates =
            std::iter::once(first).chain((top..top << 1).filter(|&c| c & 1 == 1 && c != first));
        for modulus in candidates {
            let f = BinaryField { degree, modulus };
            if f.generator_is_primitive() {
                return Ok(f);
            }
        }
        Err(Error::Construction(format!(
            "no primitive polynomial of degree {degree}"
        )))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        (1u64 << self.degree) - 1
    }

    /// The class of x, taken as the primitive element.
    pub fn alpha(&self) -> u32 {
        self.reduce(2)
    }

    fn reduce(&self, mut a: u32) -> u32 {
        for b in (self.degree..32).rev() {
            if (a >> b) & 1 == 1 {
                a ^= self.modulus << (b - self.degree);
            }
        }
        a
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        let top = 1u32 << self.degree;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn generator_is_primitive(&self) -> bool {
        let n = self.order();
        let a = self.alpha();
        if self.pow(a, n) != 1 {
            return false;
        }
        prime_factors(n)
            .into_iter()
            .all(|q| self.pow(a, n / q) != 1)
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A cyclic orbit spread: M pairwise trivially intersecting s-dimensional
/// subspaces of F_2^{st} covering every nonzero vector.
#[derive(Clone, Debug)]
pub struct SpreadFamily {
    pub s: usize,
    pub t: usize,
    pub field_degree: usize,
    /// Basis vectors of V_i in polynomial-basis coordinates, orbit order.
    pub subspaces: Vec<Vec<u32>>,
    pub count: usize,
}

impl SpreadFamily {
    /// All 2^s elements of V_i, ascending.
    pub fn elements(&self, i: usize) -> Vec<u32> {
        span(&self.subspaces[i])
    }
}

/// Every element of the span of `basis`, ascending.
pub fn span(basis: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32];
    for &b in basis {
        let ext: Vec<u32> = out.iter().map(|&x| x ^ b).collect();
        out.extend(ext);
    }
    out.sort_unstable();
    out
}

/// V_i = {0, α^i, α^i β, …, α^i β^{2^s-2}} with β = α^M, for i < M.
pub fn spread_family(s: usize, t: usize) -> Result<SpreadFamily> {
    if s == 0 || t == 0 {
        return param("s and t must be positive");
    }
    let n = s * t;
    if n > MAX_FIELD_DEGREE {
        return infeasible(format!(
            "s·t = {n} exceeds the field budget {MAX_FIELD_DEGREE}"
        ));
    }
    let field = BinaryField::new(n)?;
    let order = field.order();
    let count = order / ((1u64 << s) - 1);
    let alpha = field.alpha();
    let beta = field.pow(alpha, count);
    let mut subspaces = Vec::with_capacity(count as usize);
    for i in 0..count {
        let mut x = field.pow(alpha, i);
        let mut basis = XorBasis::default();
        let mut vecs = Vec::new();
        for _ in 0..(1u64 << s) - 1 {
            if basis.insert(x as u64) {
                vecs.push(x);
            }
            x = field.mul(x, beta);
        }
        if vecs.len() != s {
            return Err(Error::Construction(format!(
                "orbit {i} spans dimension {} instead of {s}",
                vecs.len()
            )));
        }
        subspaces.push(vecs);
    }
    Ok(SpreadFamily {
        s,
        t,
        field_degree: n,
        subspaces,
        count: count as usize,
    })
}

/// Number of d-dimensional subspaces of F_2^m; zero when d > m.
pub fn gaussian_binomial(m: usize, d: usize) -> Result<BigUint> {
    if m > 64 {
        return param(format!("m = {m} exceeds 64"));
    }
    if d > m {
        return Ok(BigUint::from(0u32));
    }
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        num *= (&one << (m - i)) - &one;
        den *= (&one << (d - i)) - &one;
    }
    Ok(num / den)
}

/// [m-ℓ, d]_2 / [m, d]_2 as a float.
pub fn gaussian_binomial_ratio(m: usize, ell: usize, d: usize) -> Result<f64> {
    if ell > m {
        return param("ℓ exceeds m");
    }
    let num = gaussian_binomial(m - ell, d)?;
    let den = gaussian_binomial(m, d)?;
    Ok(ratio_f64(&num, &den))
}

/// Quotient of two big integers as a float, robust to values beyond f64 range.
fn ratio_f64(n: &BigUint, d: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    let shift = d.bits().max(n.bits()).saturating_sub(1000);
    (n >> shift).to_f64().unwrap() / (d >> shift).to_f64().unwrap()
}

/// Dimension of the span of a set of vectors of F_2^m (m <= 64).
pub fn set_dim(vectors: &[u64]) -> usize {
    rank_u64(vectors)
}

/// An element of GL(m,2) acting on indices through `theta_map`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvertibleMap {
    m: usize,
    /// Row i as a bit mask over input coordinates.
    rows: Vec<u32>,
}

impl InvertibleMap {
    pub fn new(rows: Vec<u32>) -> Result<Self> {
        let m = rows.len();
        if m == 0 || m > 24 {
            return param("matrix size must be in 1..=24");
        }
        if rows.iter().any(|&r| (r as u64) >> m != 0) {
            return param("matrix row has bits beyond column m");
        }
        let words: Vec<u64> = rows.iter().map(|&r| r as u64).collect();
        if rank_u64(&words) != m {
            return param("matrix is singular");
        }
        Ok(InvertibleMap { m, rows })
    }

    pub fn identity(m: usize) -> Self {
        InvertibleMap {
            m,
            rows: (0..m).map(|i| 1u32 << i).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Matrix-vector product on a vector packed LSB-first.
    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &r)| acc | (((r & v).count_ones() & 1) << i))
    }

    /// σ on [2^m]: index ℓ goes to the index of M·θ(ℓ). Fixes 0.
    pub fn induced_perm(&self) -> CoordPermutation {
        let images = (0..1u32 << self.m)
            .map(|l| self.apply(l) as usize)
            .collect();
        CoordPermutation::new(images).expect("invertible map induces a bijection")
    }

    /// π on [2^m - 1] with π(i) = σ(i+1) - 1.
    pub fn shifted_perm(&self) -> CoordPermutation {
        let images = (1..1u32 << self.m)
            .map(|l| self.apply(l) as usize - 1)
            .collect();
        CoordPermutation::new(images).expect("invertible map induces a bijection")
    }
}

/// Uniform element of GL(m,2) by rejection sampling.
pub fn sample_gl<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<InvertibleMap> {
    if m == 0 || m > 24 {
        return param("m must be in 1..=24");
    }
    let mask = ((1u64 << m) - 1) as u32;
    loop {
        let rows: Vec<u32> = (0..m).map(|_| rng.gen::<u32>() & mask).collect();
        let words: Vec<u64> = rows.iter().map(|&r| r as u64).collect();
        if rank_u64(&words) == m {
            return Ok(InvertibleMap { m, rows });
        }
    }
}

/// Every element of GL(m,2), for m <= 4.
pub fn enumerate_gl(m: usize) -> Result<Vec<InvertibleMap>> {
    if m == 0 || m > 4 {
        return infeasible("exhaustive GL(m,2) enumeration is limited to 1 <= m <= 4");
    }
    let mut out = Vec::new();
    for code in 0u64..1u64 << (m * m) {
        let rows: Vec<u32> = (0..m)
            .map(|i| ((code >> (i * m)) & ((1 << m) - 1)) as u32)
            .collect();
        let words: Vec<u64> = rows.iter().map(|&r| r as u64).collect();
        if rank_u64(&words) == m {
            out.push(InvertibleMap { m, rows });
        }
    }
    Ok(out)
}

/// |GL(m,2)| = Π_{i<m} (2^m - 2^i).
pub fn gl_order(m: usize) -> BigUint {
    let one = BigUint::one();
    (0..m).fold(BigUint::one(), |acc, i| acc * ((&one << m) - (&one << i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn look_examples() {
        let f = multi_look_family(2, 2, 1).unwrap();
        assert_eq!(f.looks, vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(f.pairwise_overlap, Ratio::new(1, 2));

        let f = multi_look_family(6, 3, 2).unwrap();
        assert_eq!(f.looks.len(), 3);
        assert!(f.looks.iter().all(|l| l.len() == 4));
        assert_eq!(f.common_intersection(), vec![0]);
        assert_eq!(f.pairwise_overlap, Ratio::new(1, 4));

        let f = multi_look_family(4, 1, 2).unwrap();
        assert_eq!(f.looks[0], (0..16).collect::<Vec<_>>());
        assert!(multi_look_family(3, 2, 2).is_err());
    }

    #[test]
    fn conway_table_entries_are_primitive() {
        for n in 1..=16 {
            let f = BinaryField::new(n).unwrap();
            assert_eq!(f.modulus(), CONWAY[n - 1], "degree {n}");
        }
    }

    #[test]
    fn spread_examples() {
        let sp = spread_family(3, 1).unwrap();
        assert_eq!(sp.count, 1);
        assert_eq!(sp.elements(0).len(), 8);

        let sp = spread_family(2, 2).unwrap();
        assert_eq!(sp.count, 5);
        let mut all: Vec<u32> = (0..5)
            .flat_map(|i| sp.elements(i).into_iter().skip(1))
            .collect();
        all.sort_unstable();
        assert_eq!(all, (1..16).collect::<Vec<_>>());

        let sp = spread_family(1, 3).unwrap();
        assert_eq!(sp.count, 7);
        assert!(spread_family(4, 5).is_err());
    }

    #[test]
    fn gaussian_binomial_examples() {
        assert_eq!(gaussian_binomial(5, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(gaussian_binomial(3, 1).unwrap(), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(4, 2).unwrap(), BigUint::from(35u32));
        assert_eq!(gaussian_binomial(2, 3).unwrap(), BigUint::from(0u32));
        assert!(gaussian_binomial(64, 32).unwrap() > BigUint::one() << 1000);
    }

    #[test]
    fn set_dim_examples() {
        assert_eq!(set_dim(&[]), 0);
        assert_eq!(set_dim(&[0b010]), 1);
        assert_eq!(set_dim(&[0b011, 0b101]), 2);
    }

    #[test]
    fn gl_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            assert_eq!(sample_gl(1, &mut rng).unwrap(), InvertibleMap::identity(1));
        }
        assert_eq!(
            InvertibleMap::identity(3).induced_perm(),
            CoordPermutation::identity(8)
        );
        assert_eq!(enumerate_gl(2).unwrap().len(), 6);
        assert_eq!(enumerate_gl(3).unwrap().len(), 168);
        assert_eq!(gl_order(4), BigUint::from(20160u32));
        let g = sample_gl(5, &mut rng).unwrap();
        assert_eq!(g.induced_perm().image(0), 0);
        assert_eq!(g.shifted_perm().len(), 31);
    }
}
