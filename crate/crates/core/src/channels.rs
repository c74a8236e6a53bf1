//! Binary memoryless symmetric channels in multiplicative-noise form Y = X·Z.

use crate::error::{param, Error, Result};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

const PROB_TOL: f64 = 1e-12;

/// Binary entropy in bits; h(0) = h(1) = 0.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    Bec(f64),
    Bsc(f64),
    DiscreteBms,
}

/// A channel described by the law of its noise symbol Z.
///
/// Symbol value 0 is an erasure. For BEC the law is {+1: 1-p, 0: p, -1: 0}; for BSC
/// it is {+1: 1-p, -1: p}.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    kind: ChannelKind,
    symbols: Vec<(f64, f64)>,
    neg: Vec<usize>,
    capacity: f64,
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return param(format!("{what} = {p} is not a probability"));
    }
    Ok(())
}

impl ChannelModel {
    pub fn bec(p: f64) -> Result<Self> {
        check_prob(p, "erasure probability")?;
        let symbols = vec![(1.0, 1.0 - p), (0.0, p), (-1.0, 0.0)];
        Ok(ChannelModel {
            kind: ChannelKind::Bec(p),
            neg: vec![2, 1, 0],
            symbols,
            capacity: 1.0 - p,
        })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        check_prob(p, "crossover probability")?;
        let symbols = vec![(1.0, 1.0 - p), (-1.0, p)];
        Ok(ChannelModel {
            kind: ChannelKind::Bsc(p),
            neg: vec![1, 0],
            symbols,
            capacity: 1.0 - binary_entropy(p),
        })
    }

    /// A general law for Z; duplicate values are merged and the list must be
    /// closed under negation (a value may carry probability zero).
    pub fn discrete_bms(symbols: &[(f64, f64)]) -> Result<Self> {
        if symbols.is_empty() {
            return param("empty symbol list");
        }
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for &(z, q) in symbols {
            if !z.is_finite() {
                return param(format!("symbol value {z} is not finite"));
            }
            check_prob(q, "symbol probability")?;
            let z = if z == 0.0 { 0.0 } else { z };
            match merged.iter_mut().find(|(v, _)| *v == z) {
                Some(e) => e.1 += q,
                None => merged.push((z, q)),
            }
        }
        let total: f64 = merged.iter().map(|s| s.1).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return param(format!("symbol probabilities sum to {total}, not 1"));
        }
        merged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut neg = Vec::with_capacity(merged.len());
        for &(z, _) in &merged {
            match merged.iter().position(|(v, _)| *v == -z) {
                Some(j) => neg.push(j),
                None => return Err(Error::Symmetry(format!("symbol {z} has no partner {}", -z))),
            }
        }
        let capacity = mutual_information(&merged, &neg);
        Ok(ChannelModel {
            kind: ChannelKind::DiscreteBms,
            symbols: merged,
            neg,
            capacity,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// (value, probability) pairs of the law of Z.
    pub fn symbols(&self) -> &[(f64, f64)] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.symbols.len()
    }

    /// Index of the symbol whose value is the negation of symbol `i`.
    pub fn negation(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.symbols[i].1
    }

    pub fn value(&self, i: usize) -> f64 {
        self.symbols[i].0
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.symbols.iter().position(|(v, _)| *v == value)
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// The same law with the kind forgotten.
    pub fn as_discrete(&self) -> ChannelModel {
        ChannelModel {
            kind: ChannelKind::DiscreteBms,
            ..self.clone()
        }
    }

    /// Draws the index of one noise symbol.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &(_, q)) in self.symbols.iter().enumerate() {
            acc += q;
            if u < acc {
                return i;
            }
        }
        // Rounding left a sliver of mass past the last partial sum.
        self.symbols.iter().rposition(|s| s.1 > 0.0).unwrap_or(0)
    }
}

fn mutual_information(symbols: &[(f64, f64)], neg: &[usize]) -> f64 {
    let mut c = 0.0;
    for (i, &(z, q)) in symbols.iter().enumerate() {
        if z == 0.0 || q == 0.0 {
            continue;
        }
        let py = 0.5 * (q + symbols[neg[i]].1);
        c += q * (q / py).log2();
    }
    c.clamp(0.0, 1.0)
}

pub fn make_channel(spec: &str) -> Result<ChannelModel> {
    spec.parse()
}

/// W followed by an erasure channel with erasure probability `t`.
pub fn erasure_cascade(ch: &ChannelModel, t: f64) -> Result<ChannelModel> {
    if !(0.0..=1.0).contains(&t) {
        return param(format!("cascade erasure probability t = {t} outside [0,1]"));
    }
    if let ChannelKind::Bec(p) = ch.kind {
        return ChannelModel::bec(p + t - p * t);
    }
    let mut symbols: Vec<(f64, f64)> = ch
        .symbols
        .iter()
        .filter(|s| s.0 != 0.0)
        .map(|&(z, q)| (z, q * (1.0 - t)))
        .collect();
    let erased = ch.index_of(0.0).map_or(0.0, |i| ch.prob(i)) * (1.0 - t) + t;
    symbols.push((0.0, erased));
    ChannelModel::discrete_bms(&symbols)
}

/// One draw of Z.
pub fn sample_noise<R: Rng + ?Sized>(ch: &ChannelModel, rng: &mut R) -> f64 {
    ch.value(ch.sample_index(rng))
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec.split_once(char::is_whitespace).unwrap_or((spec, ""));
        let rest = rest.trim();
        let number = |s: &str, field: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::Parameter(format!("channel {field}: cannot parse {s:?} as a number"))
            })
        };
        match kind.to_ascii_lowercase().as_str() {
            "bec" => ChannelModel::bec(number(rest, "erasure probability")?),
            "bsc" => ChannelModel::bsc(number(rest, "crossover probability")?),
            "bms" => {
                let mut symbols = Vec::new();
                for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (z, q) = item.split_once(':').ok_or_else(|| {
                        Error::Parameter(format!("channel symbol {item:?} is not value:prob"))
                    })?;
                    symbols.push((
                        number(z.trim(), "symbol value")?,
                        number(q.trim(), "symbol probability")?,
                    ));
                }
                ChannelModel::discrete_bms(&symbols)
            }
            other => param(format!(
                "channel kind {other:?} is not one of bec, bsc, bms"
            )),
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ChannelKind::Bec(p) => write!(f, "bec {p}"),
            ChannelKind::Bsc(p) => write!(f, "bsc {p}"),
            ChannelKind::DiscreteBms => {
                f.write_str("bms ")?;
                for (i, (z, q)) in self.symbols.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{z}:{q}")?;
                }
                Ok(())
            }
        }
    }
}
