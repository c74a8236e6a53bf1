use proptest::prelude::*;
use rmnest_core::bits::BitVec;
use rmnest_core::bounds::{from_odds, odds, recursion_step, RecursionKind};
use rmnest_core::channels::ChannelModel;
use rmnest_core::codes::{
    codes_equal, rm_generator, rm_rate_exact, BinaryCode, CoordPermutation, RmParams,
};
use rmnest_core::decoders::{
    bec_recoverable, bms_conditional_mean, extrinsic_metrics, ErasurePattern, EvalMode,
    ExtrinsicBscDecoder,
};
use rmnest_core::fourier::{
    apply_mask, basis_value, biased_transform, orbit_restriction_prob, restrict_spectrum,
    BooleanFn, GroupSampler, Sampling,
};

fn code_strategy() -> impl Strategy<Value = BinaryCode> {
    (3usize..=8).prop_flat_map(|n| {
        prop::collection::vec(1u64..(1u64 << n), 1..=4).prop_map(move |words| {
            let gens: Vec<BitVec> = words.iter().map(|&w| BitVec::from_u64(w, n)).collect();
            BinaryCode::from_generators(n, &gens).unwrap()
        })
    })
}

fn function_strategy(max_n: usize) -> impl Strategy<Value = BooleanFn> {
    (1usize..=max_n, 0.05f64..0.95).prop_flat_map(|(n, p)| {
        prop::collection::vec(-2.0f64..2.0, 1 << n)
            .prop_map(move |v| BooleanFn::new(n, v, p).unwrap())
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codeword_addition_preserves_decisions(code in code_strategy(), noise in any::<u64>(), erase in any::<u64>()) {
        let n = code.length();
        let mask = (1u64 << n) - 1;
        let z = noise & mask;
        let pattern = ErasurePattern(BitVec::from_u64(erase & mask, n));
        let dec = ExtrinsicBscDecoder::new(&code, 0, 0.1).unwrap();
        // A free target has no extrinsic information; its decision is a fixed guess.
        let free = dec.target_is_free();
        let base_bit = dec.decode(&BitVec::from_u64(z, n)).unwrap();
        let base_rec = bec_recoverable(&code, &pattern, 0).unwrap();
        for c in code.codewords_u64().unwrap() {
            let bit = dec.decode(&BitVec::from_u64(c ^ z, n)).unwrap();
            if !free {
                prop_assert_eq!(bit ^ (c & 1) as u8, base_bit);
            }
            prop_assert_eq!(bec_recoverable(&code, &pattern, 0).unwrap(), base_rec);
        }
    }

    #[test]
    fn sign_modulation(code in code_strategy(), draws in prop::collection::vec(0usize..5, 8)) {
        let ch = ChannelModel::discrete_bms(&[(2.0, 0.5), (1.0, 0.2), (0.0, 0.15), (-1.0, 0.1), (-2.0, 0.05)]).unwrap();
        let n = code.length();
        let z: Vec<f64> = draws.iter().take(n).skip(1).map(|&i| ch.value(i)).collect();
        let base = bms_conditional_mean(&code, &ch, &z, 0).unwrap();
        for c in code.codewords_u64().unwrap() {
            let y: Vec<f64> = (1..n).map(|i| if (c >> i) & 1 == 1 { -z[i - 1] } else { z[i - 1] }).collect();
            let x0 = if c & 1 == 1 { -1.0 } else { 1.0 };
            let got = bms_conditional_mean(&code, &ch, &y, 0).unwrap();
            prop_assert!((got - x0 * base).abs() <= 1e-12, "{} vs {}", got, x0 * base);
        }
    }

    #[test]
    fn metric_chain_and_mean_square_identity(code in code_strategy(), p in 0.01f64..0.49, bec in any::<bool>()) {
        let ch = if bec { ChannelModel::bec(p) } else { ChannelModel::bsc(p) }.unwrap();
        let mx = extrinsic_metrics(&code, &ch, 0, EvalMode::Exact).unwrap();
        prop_assert!(2.0 * mx.ber <= mx.mmse + 1e-12);
        prop_assert!(mx.mmse <= mx.cond_entropy + 1e-12);
        prop_assert!((1.0 - mx.mmse - mx.mean_g).abs() <= 1e-12);
    }

    #[test]
    fn parseval(f in function_strategy(10)) {
        let s = biased_transform(&f).unwrap();
        prop_assert!(close(s.sum_squares(), f.second_moment(), 1e-9));
        prop_assert!(close(s.coeff(0), f.mean(), 1e-12));
        let back = s.inverse();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn restriction_is_a_projection(f in function_strategy(7), a in any::<u64>()) {
        let n = f.arity();
        let a = a & ((1u64 << n) - 1);
        let once = restrict_spectrum(&f, a).unwrap();
        let direct = biased_transform(&f.restrict(a)).unwrap();
        let twice = biased_transform(&f.restrict(a).restrict(a)).unwrap();
        let full = biased_transform(&f).unwrap();
        for s in 0..1u64 << n {
            let expect = if s & !a == 0 { full.coeff(s) } else { 0.0 };
            prop_assert_eq!(once.coeff(s), expect);
            prop_assert!((direct.coeff(s) - expect).abs() <= 1e-10);
            prop_assert!((twice.coeff(s) - direct.coeff(s)).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetric_functions_have_invariant_spectra(n in 2usize..=7, p in 0.05f64..0.95, weights in prop::collection::vec(0.0f64..1.0, 8)) {
        // Functions of the Hamming weight are invariant under every coordinate permutation.
        let f = BooleanFn::from_fn(n, p, |x| weights[x.count_ones() as usize]).unwrap();
        let s = biased_transform(&f).unwrap();
        let shift = CoordPermutation::new((0..n).map(|i| (i + 1) % n).collect()).unwrap();
        let swap = CoordPermutation::new((0..n).map(|i| if i < 2 { 1 - i } else { i }).collect()).unwrap();
        for perm in [shift, swap] {
            let g = biased_transform(&f.permuted(&perm).unwrap()).unwrap();
            for mask in 0..1u64 << n {
                prop_assert!((g.coeff(apply_mask(&perm, mask)) - s.coeff(mask)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn recursions_are_monotone(rho in 0.0f64..0.99, a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let kinds = [
            RecursionKind::BecTwoLook { rho },
            RecursionKind::BecOdds { rho },
            RecursionKind::MmseOdds { rho },
            RecursionKind::BscThreeLook { rho },
        ];
        for kind in kinds {
            let (x, y) = (recursion_step(kind, lo).unwrap(), recursion_step(kind, hi).unwrap());
            prop_assert!(x <= y + 1e-15, "{} {} {}", kind, x, y);
        }
    }

    #[test]
    fn odds_form_dominates_two_look(rho in 0.0f64..0.99, pe in 0.0001f64..0.9999) {
        let two = recursion_step(RecursionKind::BecTwoLook { rho }, pe).unwrap();
        let via_odds = recursion_step(RecursionKind::BecOdds { rho }, pe).unwrap();
        prop_assert!(odds(two) <= odds(via_odds) * (1.0 + 1e-12));
        prop_assert!((from_odds(odds(pe)) - pe).abs() <= 1e-12);
    }

    #[test]
    fn codes_equal_is_an_equivalence(a in code_strategy(), b in code_strategy()) {
        prop_assume!(a.length() == b.length());
        prop_assert!(codes_equal(&a, &a).unwrap());
        prop_assert_eq!(codes_equal(&a, &b).unwrap(), codes_equal(&b, &a).unwrap());
        let gens: Vec<BitVec> = a.generators().iter().rev().cloned().collect();
        let c = BinaryCode::from_generators(a.length(), &gens).unwrap();
        prop_assert!(codes_equal(&a, &c).unwrap());
        prop_assert_eq!(codes_equal(&c, &b).unwrap(), codes_equal(&a, &b).unwrap());
    }
}

#[test]
fn basis_is_orthonormal() {
    for n in 1..=6usize {
        for &p in &[0.1f64, 0.3, 0.5, 0.8] {
            let measure = |x: u64| {
                let w = x.count_ones() as i32;
                p.powi(w) * (1.0 - p).powi(n as i32 - w)
            };
            for s in 0..1u64 << n {
                for t in 0..1u64 << n {
                    let ip: f64 = (0..1u64 << n)
                        .map(|x| measure(x) * basis_value(p, s, x) * basis_value(p, t, x))
                        .sum();
                    let expect = if s == t { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-10, "n={n} p={p} S={s} T={t}: {ip}");
                }
            }
        }
    }
}

#[test]
fn rm_dimension_and_rate_tables() {
    for m in 0..=12 {
        for r in 0..=m {
            let params = RmParams::new(r, m).unwrap();
            let code = rm_generator(params).unwrap();
            let expect: u128 = (0..=r as u64)
                .map(|i| rmnest_core::codes::binomial(m as u64, i))
                .sum();
            assert_eq!(code.dim() as u128, expect, "RM({r},{m})");
            let rate = rm_rate_exact(params);
            assert_eq!(
                *rate.numer() * (1u128 << m),
                *rate.denom() * code.dim() as u128
            );
        }
    }
}

#[test]
fn transitive_groups_respect_the_orbit_bound() {
    let sampling = Sampling {
        samples: 0,
        seed: 0,
    };
    for n in 2..=6usize {
        for g in [
            GroupSampler::cyclic(n).unwrap(),
            GroupSampler::symmetric(n).unwrap(),
        ] {
            for s_mask in 1u64..1 << n {
                let s: Vec<usize> = (0..n).filter(|i| s_mask >> i & 1 == 1).collect();
                for a_mask in 0u64..1 << n {
                    let a: Vec<usize> = (0..n).filter(|i| a_mask >> i & 1 == 1).collect();
                    let prob = orbit_restriction_prob(&g, &s, &a, sampling).unwrap().value;
                    let bound = a.len() as f64 / n as f64;
                    assert!(
                        prob <= bound + 1e-12,
                        "n={n} S={s:?} A={a:?}: {prob} > {bound}"
                    );
                    if s.len() == 1 {
                        assert!((prob - bound).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
