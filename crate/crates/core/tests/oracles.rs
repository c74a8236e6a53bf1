use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmnest_core::bits::BitVec;
use rmnest_core::channels::{binary_entropy, erasure_cascade, ChannelModel};
use rmnest_core::codes::{repetition, rm_generator, single_parity_check, BinaryCode, RmParams};
use rmnest_core::decoders::{extrinsic_metrics, EvalMode, ExtrinsicMetrics, MetricSource};
use rmnest_core::fourier::{basis_value, biased_transform, restrict_spectrum, BooleanFn};
use rmnest_core::mc::Z99;
use rmnest_core::subspaces::{gaussian_binomial, gl_order, sample_gl, span};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::{HashMap, HashSet};

/// Direct O(4^n) sum f̂(S) = Σ_x μ(x) f(x) u_S(x).
fn naive_transform(f: &BooleanFn) -> Vec<f64> {
    let n = f.arity();
    (0..1u64 << n)
        .map(|s| {
            (0..1u64 << n)
                .map(|x| f.measure(x) * f.value(x) * basis_value(f.bias(), s, x))
                .sum()
        })
        .collect()
}

fn random_fn(n: usize, p: f64, seed: u64) -> BooleanFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BooleanFn::new(
        n,
        (0..1 << n)
            .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
            .collect(),
        p,
    )
    .unwrap()
}

#[test]
fn butterfly_matches_direct_sum() {
    let f = random_fn(10, 0.3, 11);
    let fast = biased_transform(&f).unwrap();
    for (s, c) in naive_transform(&f).iter().enumerate() {
        assert!((fast.coeff(s as u64) - c).abs() < 1e-10, "S = {s}");
    }
}

#[test]
fn restriction_matches_brute_force_average() {
    let f = random_fn(6, 0.35, 12);
    let a = 0b101u64;
    let p = f.bias();
    // f_A(x) averages over the 2^{n-|A|} completions of x_A.
    let averaged = BooleanFn::from_fn(6, p, |x| {
        let mut acc = 0.0;
        for y in 0..64u64 {
            if y & a == x & a {
                let free = (y & !a).count_ones() as i32;
                acc += p.powi(free) * (1.0 - p).powi(4 - free) * f.value(y);
            }
        }
        acc
    })
    .unwrap();
    let want = naive_transform(&averaged);
    let got = restrict_spectrum(&f, a).unwrap();
    for (s, c) in want.iter().enumerate() {
        assert!((got.coeff(s as u64) - c).abs() < 1e-10, "S = {s}");
    }
}

struct Brute {
    pb: f64,
    mmse: f64,
    ber: f64,
    cond_entropy: f64,
    erased: f64,
}

/// Extrinsic metrics by direct likelihood sums, averaged over every
/// transmitted codeword and every noise pattern.
fn brute_force(code: &BinaryCode, ch: &ChannelModel, target: usize) -> Brute {
    let n = code.length();
    let words = code.codewords_u64().unwrap();
    let law: HashMap<u64, f64> = ch
        .symbols()
        .iter()
        .map(|&(z, q)| (z.to_bits(), q))
        .collect();
    let prob_of = |v: f64| {
        law.get(&(if v == 0.0 { 0.0f64 } else { v }).to_bits())
            .copied()
            .unwrap_or(0.0)
    };
    let a = ch.alphabet_size();
    let others: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    let mut acc = Brute {
        pb: 0.0,
        mmse: 0.0,
        ber: 0.0,
        cond_entropy: 0.0,
        erased: 0.0,
    };
    for &x in &words {
        let weight_x = 1.0 / words.len() as f64;
        let mut idx = vec![0usize; others.len()];
        loop {
            let pz: f64 = idx.iter().map(|&i| ch.prob(i)).product();
            if pz > 0.0 {
                let mut y = vec![0.0; n];
                for (k, &i) in others.iter().enumerate() {
                    let sign = if (x >> i) & 1 == 1 { -1.0 } else { 1.0 };
                    y[i] = sign * ch.value(idx[k]);
                }
                let mut split = [0.0; 2];
                for &c in &words {
                    let like: f64 = others
                        .iter()
                        .map(|&i| prob_of(if (c >> i) & 1 == 1 { -y[i] } else { y[i] }))
                        .product();
                    split[((c >> target) & 1) as usize] += like;
                }
                let total = split[0] + split[1];
                let p1 = if (split[1] - split[0]).abs() <= 1e-12 * total {
                    0.5
                } else {
                    split[1] / total
                };
                let truth = (x >> target) & 1;
                let err = if p1 == 0.5 {
                    0.5
                } else if (p1 > 0.5) as u64 != truth {
                    1.0
                } else {
                    0.0
                };
                let w = weight_x * pz;
                acc.pb += w * err;
                acc.mmse += w * 4.0 * p1 * (1.0 - p1);
                acc.ber += w * p1.min(1.0 - p1);
                acc.cond_entropy += w * binary_entropy(p1);
                acc.erased += w * (p1 == 0.5) as u8 as f64;
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < a {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    acc
}

fn small_codes() -> Vec<(&'static str, BinaryCode)> {
    let g = |rows: &[u64], n| {
        BinaryCode::from_generators(
            n,
            &rows
                .iter()
                .map(|&w| BitVec::from_u64(w, n))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    };
    vec![
        ("rep 3", repetition(3).unwrap()),
        ("rep 4", repetition(4).unwrap()),
        ("spc 4", single_parity_check(4).unwrap()),
        (
            "rm 1 2",
            rm_generator(RmParams::new(1, 2).unwrap()).unwrap(),
        ),
        ("hamming-like", g(&[0b100011, 0b010101, 0b001110], 6)),
        ("free target", g(&[0b00001, 0b11110], 5)),
    ]
}

#[test]
fn exact_metrics_match_brute_force_posterior() {
    let channels = [
        ChannelModel::bec(0.3).unwrap(),
        ChannelModel::bsc(0.15).unwrap(),
        ChannelModel::discrete_bms(&[
            (1.5, 0.55),
            (0.5, 0.2),
            (0.0, 0.1),
            (-0.5, 0.1),
            (-1.5, 0.05),
        ])
        .unwrap(),
    ];
    for (name, code) in small_codes() {
        for ch in &channels {
            for target in [0, code.length() - 1] {
                let got = extrinsic_metrics(&code, ch, target, EvalMode::Exact).unwrap();
                let want = brute_force(&code, ch, target);
                let tag = format!("{name} / {ch} / target {target}");
                assert!(
                    (got.mmse - want.mmse).abs() < 1e-12,
                    "{tag}: mmse {} vs {}",
                    got.mmse,
                    want.mmse
                );
                assert!((got.ber - want.ber).abs() < 1e-12, "{tag}: ber");
                assert!(
                    (got.cond_entropy - want.cond_entropy).abs() < 1e-12,
                    "{tag}: H"
                );
                if matches!(ch.kind(), rmnest_core::channels::ChannelKind::Bsc(_)) {
                    // The syndrome decoder decides by block ML, never better than bit MAP.
                    assert!(
                        got.pb >= want.pb - 1e-12,
                        "{tag}: pb {} < {}",
                        got.pb,
                        want.pb
                    );
                } else {
                    assert!(
                        (got.pb - want.pb).abs() < 1e-12,
                        "{tag}: pb {} vs {}",
                        got.pb,
                        want.pb
                    );
                }
                if let Some(pe) = got.pe {
                    assert!(
                        (pe - want.erased).abs() < 1e-12,
                        "{tag}: pe {pe} vs {}",
                        want.erased
                    );
                }
            }
        }
    }
}

#[test]
fn native_and_general_channel_forms_agree() {
    let code = rm_generator(RmParams::new(1, 3).unwrap()).unwrap();
    for ch in [
        ChannelModel::bsc(0.12).unwrap(),
        ChannelModel::bec(0.4).unwrap(),
    ] {
        let general = ch.as_discrete();
        assert_eq!(general.capacity(), ch.capacity());
        let a = extrinsic_metrics(&code, &ch, 0, EvalMode::Exact).unwrap();
        let b = extrinsic_metrics(&code, &general, 0, EvalMode::Exact).unwrap();
        assert!((a.mmse - b.mmse).abs() < 1e-12, "{ch}");
        assert!((a.ber - b.ber).abs() < 1e-12, "{ch}");
        assert!((a.cond_entropy - b.cond_entropy).abs() < 1e-12, "{ch}");
    }
}

#[test]
fn cascade_capacity_is_nonincreasing() {
    let channels = [
        ChannelModel::bsc(0.07).unwrap(),
        ChannelModel::bec(0.2).unwrap(),
        ChannelModel::discrete_bms(&[
            (2.0, 0.6),
            (1.0, 0.2),
            (0.0, 0.1),
            (-1.0, 0.06),
            (-2.0, 0.04),
        ])
        .unwrap(),
    ];
    for ch in &channels {
        let caps: Vec<f64> = (0..=100)
            .map(|i| erasure_cascade(ch, i as f64 / 100.0).unwrap().capacity())
            .collect();
        assert!(caps.iter().all(|c| (0.0..=1.0).contains(c)));
        assert!(caps.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{ch}");
    }
}

fn sigma(m: &ExtrinsicMetrics) -> (f64, f64) {
    match m.source {
        MetricSource::MonteCarlo { half_width, .. } => (half_width.pb / Z99, half_width.mmse / Z99),
        MetricSource::Exact => panic!("expected a Monte Carlo estimate"),
    }
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let rm13 = rm_generator(RmParams::new(1, 3).unwrap()).unwrap();
    let rm14 = rm_generator(RmParams::new(1, 4).unwrap()).unwrap();
    let bms = ChannelModel::discrete_bms(&[(1.0, 0.7), (0.0, 0.15), (-1.0, 0.15)]).unwrap();
    let cases: Vec<(&str, BinaryCode, ChannelModel)> = vec![
        (
            "rep 3",
            repetition(3).unwrap(),
            ChannelModel::bec(0.5).unwrap(),
        ),
        (
            "rep 3",
            repetition(3).unwrap(),
            ChannelModel::bsc(0.2).unwrap(),
        ),
        (
            "rep 5",
            repetition(5).unwrap(),
            ChannelModel::bec(0.6).unwrap(),
        ),
        (
            "rep 5",
            repetition(5).unwrap(),
            ChannelModel::bsc(0.3).unwrap(),
        ),
        ("rep 5", repetition(5).unwrap(), bms.clone()),
        (
            "spc 4",
            single_parity_check(4).unwrap(),
            ChannelModel::bec(0.3).unwrap(),
        ),
        (
            "spc 4",
            single_parity_check(4).unwrap(),
            ChannelModel::bsc(0.1).unwrap(),
        ),
        (
            "spc 6",
            single_parity_check(6).unwrap(),
            ChannelModel::bsc(0.05).unwrap(),
        ),
        ("spc 6", single_parity_check(6).unwrap(), bms.clone()),
        ("rm 1 3", rm13.clone(), ChannelModel::bec(0.4).unwrap()),
        ("rm 1 3", rm13.clone(), ChannelModel::bec(0.6).unwrap()),
        ("rm 1 3", rm13.clone(), ChannelModel::bsc(0.1).unwrap()),
        ("rm 1 3", rm13.clone(), ChannelModel::bsc(0.25).unwrap()),
        ("rm 1 3", rm13.clone(), bms.clone()),
        ("rm 1 4", rm14.clone(), ChannelModel::bsc(0.05).unwrap()),
        ("rm 1 4", rm14.clone(), ChannelModel::bsc(0.15).unwrap()),
        ("rm 1 4", rm14.clone(), ChannelModel::bec(0.5).unwrap()),
        ("rm 1 4", rm14.clone(), ChannelModel::bec(0.7).unwrap()),
        (
            "rm 2 4",
            rm_generator(RmParams::new(2, 4).unwrap()).unwrap(),
            ChannelModel::bsc(0.1).unwrap(),
        ),
        (
            "rm 2 4",
            rm_generator(RmParams::new(2, 4).unwrap()).unwrap(),
            ChannelModel::bec(0.3).unwrap(),
        ),
    ];
    let mode = EvalMode::MonteCarlo {
        samples: 50_000,
        seed: 20240601,
        workers: 1,
    };
    let mut failures = Vec::new();
    for (name, code, ch) in &cases {
        let exact = extrinsic_metrics(code, ch, 0, EvalMode::Exact).unwrap();
        let mc = extrinsic_metrics(code, ch, 0, mode).unwrap();
        let (s_pb, s_mmse) = sigma(&mc);
        // A degenerate statistic has zero spread; only summation rounding remains.
        let within = |a: f64, b: f64, s: f64| (a - b).abs() <= 3.0 * s + 1e-12;
        if !within(mc.pb, exact.pb, s_pb) || !within(mc.mmse, exact.mmse, s_mmse) {
            failures.push(format!(
                "{name} / {ch}: pb {} vs {}, mmse {} vs {}",
                mc.pb, exact.pb, mc.mmse, exact.mmse
            ));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn repetition_erasure_rate_by_sampling() {
    let mode = EvalMode::MonteCarlo {
        samples: 1_000_000,
        seed: 5,
        workers: 1,
    };
    let m = extrinsic_metrics(
        &repetition(3).unwrap(),
        &ChannelModel::bec(0.5).unwrap(),
        0,
        mode,
    )
    .unwrap();
    let pe = m.pe.unwrap();
    let MetricSource::MonteCarlo { half_width, .. } = m.source else {
        panic!()
    };
    assert!(
        (pe - 0.25).abs() <= 3.0 * half_width.pe.unwrap() / Z99,
        "{pe}"
    );
}

/// Every subspace of F_2^m as a membership mask over the 2^m vectors.
fn all_subspaces(m: usize) -> Vec<HashSet<u64>> {
    let mut levels: Vec<HashSet<u64>> = vec![HashSet::from([1u64])];
    for d in 1..=m {
        let mut next = HashSet::new();
        for &space in &levels[d - 1] {
            let members: Vec<u32> = (0..1u32 << m).filter(|&v| space >> v & 1 == 1).collect();
            for v in 0..1u32 << m {
                if space >> v & 1 == 0 {
                    let mut basis = members.clone();
                    basis.push(v);
                    next.insert(span(&basis).iter().fold(0u64, |acc, &w| acc | 1 << w));
                }
            }
        }
        levels.push(next);
    }
    levels
}

#[test]
fn gaussian_binomials_count_subspaces() {
    for m in 0..=5 {
        for (d, level) in all_subspaces(m).iter().enumerate() {
            assert_eq!(
                gaussian_binomial(m, d).unwrap(),
                level.len().into(),
                "m={m} d={d}"
            );
        }
    }
}

#[test]
fn sampled_linear_maps_are_uniform() {
    for m in 1..=3usize {
        let order: usize = gl_order(m).try_into().unwrap();
        let draws = 200 * order;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts
                .entry(sample_gl(m, &mut rng).unwrap().rows().to_vec())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), order, "m={m}");
        let expect = draws as f64 / order as f64;
        let stat: f64 = counts
            .values()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        if order > 1 {
            let cutoff = ChiSquared::new((order - 1) as f64)
                .unwrap()
                .inverse_cdf(0.999);
            assert!(stat < cutoff, "m={m}: chi-square {stat} >= {cutoff}");
        }
    }
}
