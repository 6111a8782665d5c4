//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p houghton --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use houghton::autom::{EventuallyRigidAut, GeneratorKind, DEFAULT_CEILING};
use houghton::folding;
use houghton::presentation::{self, FamilySelection, VerifyOptions};
use houghton::rewrite::{self, GroupLetter, GroupWord, SignedLetter};
use houghton::words::{GeneratorIndex, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(n: u32, what: &str, started: Instant) {
    println!(
        "criterion {n:2} PASS ({:6.2}s): {what}",
        started.elapsed().as_secs_f64()
    );
}

fn opts(r: u32) -> VerifyOptions {
    VerifyOptions {
        r,
        ..Default::default()
    }
}

#[test]
fn criterion_01_presentation_soundness() {
    let started = Instant::now();
    for r in [3, 4, 5] {
        let report = presentation::verify_all(FamilySelection::P, &opts(r)).unwrap();
        let failing: Vec<_> = report
            .results
            .iter()
            .filter(|res| !res.holds)
            .map(|res| format!("{} [{}]", res.instance.family, res.instance.params))
            .collect();
        assert!(report.all_hold, "r={r}: {failing:?}");
    }
    pass(1, "relators r1..r18 hold for r in {3,4,5}", started);
}

#[test]
fn criterion_02_afv_soundness() {
    let started = Instant::now();
    for n in [4, 5, 6] {
        let report = presentation::verify_all(
            FamilySelection::Afv,
            &VerifyOptions {
                r: 3,
                afv_n: n,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.all_hold, "window n={n}");
        assert!(
            report.results.len() > 100,
            "window n={n} must be fully enumerated"
        );
        for family in [
            "AFV.1a",
            "AFV.1b",
            "AFV.1c-adj",
            "AFV.1c-corner",
            "AFV.1c-zero",
            "AFV.1d",
            "AFV.1e",
            "AFV.1f",
            "AFV.2a",
            "AFV.2b",
            "AFV.2c-ray1",
            "AFV.2c-rayi",
            "AFV.2d-comm",
            "AFV.2d-conj",
            "AFV.2e",
            "AFV.2f",
            "AFV.2g",
            "AFV.2h",
        ] {
            assert!(
                report
                    .results
                    .iter()
                    .any(|res| res.instance.family == family),
                "family {family} missing at window n={n}"
            );
        }
    }
    pass(
        2,
        "window relations (1a)-(2h) hold for r=3, n in {4,5,6}",
        started,
    );
}

#[test]
fn criterion_03_conjugation_relations() {
    let started = Instant::now();
    for r in [3, 4] {
        let report = presentation::verify_all(
            FamilySelection::Qprime,
            &VerifyOptions {
                r,
                n_max: 6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.all_hold, "r={r}");
        for family in [
            "QPRIME.eta-neg",
            "QPRIME.eta-pos",
            "QPRIME.tau-neg",
            "QPRIME.tau-pos",
            "QPRIME.sigma-neg",
            "QPRIME.sigma-pos",
        ] {
            assert!(
                report
                    .results
                    .iter()
                    .any(|res| res.instance.family == family),
                "family {family} missing for r={r}"
            );
        }
    }
    pass(
        3,
        "shift conjugation families hold for r in {3,4}, n <= 6",
        started,
    );
}

#[test]
fn criterion_04_auxiliary_ladders() {
    let started = Instant::now();
    for r in [3, 4] {
        let report = presentation::verify_all(
            FamilySelection::Aux,
            &VerifyOptions {
                r,
                k_max: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.all_hold, "r={r}");
        for family in [
            "AUX.q1",
            "AUX.r9k",
            "AUX.r9k-neg",
            "AUX.r9k-eq",
            "AUX.q2k",
            "AUX.q1k",
            "AUX.q3",
            "AUX.q4",
        ] {
            assert!(
                report
                    .results
                    .iter()
                    .any(|res| res.instance.family == family),
                "family {family} missing for r={r}"
            );
        }
    }
    pass(4, "auxiliary ladders hold for r in {3,4}, k <= 5", started);
}

#[test]
fn criterion_05_commutator_example() {
    let started = Instant::now();
    let comm = GroupWord::parse("[h2,h3]", 3).unwrap().evaluate().unwrap();
    let sigma = EventuallyRigidAut::make_generator(GeneratorKind::Sigma, 3).unwrap();
    assert!(comm.equal(&sigma).unwrap());
    pass(5, "the shift commutator [h2,h3] is the loop swap", started);
}

#[test]
fn criterion_06_flux_cross_check() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for r in [3u32, 4] {
        for _ in 0..100 {
            let len = rng.gen_range(0..=8);
            let word = rewrite::random_word(r, len, &mut rng);
            let elem = word.evaluate().unwrap();
            let flux = elem.flux_offsets().unwrap();
            let bound = elem.exception_bound();
            let t_max = elem
                .offsets()
                .iter()
                .map(|v| v.unsigned_abs() as u32)
                .max()
                .unwrap_or(0);
            let n1 = bound + 1;
            let m1 = n1 + t_max + 1;
            let w1 = m1 + t_max;
            let n2 = n1 + 2;
            let m2 = n2 + t_max + 2;
            let w2 = m2 + t_max + 3;
            for i in 2..=r {
                for (n, m, window) in [(n1, m1, w1), (n2, m2, w2)] {
                    let via_corank = folding::flux_via_corank(&elem, i, n, m, window)
                        .unwrap_or_else(|e| panic!("word {word}, i={i}: {e}"));
                    assert_eq!(
                        via_corank,
                        flux[(i - 2) as usize],
                        "word {word}, i={i}, window ({n},{m},{window})"
                    );
                }
            }
        }
    }
    pass(
        6,
        "corank-formula flux agrees with offsets on 200 random elements",
        started,
    );
}

/// Enumerates all words over the signed pure alphabet up to the given
/// length, maintaining the incrementally composed element as the
/// direct-evaluation oracle.
fn walk_words<F: FnMut(&GroupWord, &EventuallyRigidAut)>(r: u32, max_len: usize, f: &mut F) {
    let alphabet: Vec<SignedLetter> = {
        let mut letters = vec![GroupLetter::Sigma, GroupLetter::Tau, GroupLetter::Eta];
        for i in 2..=r {
            letters.push(GroupLetter::Shift(i));
        }
        letters
            .into_iter()
            .flat_map(|l| {
                [
                    SignedLetter {
                        letter: l,
                        inverse: false,
                    },
                    SignedLetter {
                        letter: l,
                        inverse: true,
                    },
                ]
            })
            .collect()
    };
    fn rec<F: FnMut(&GroupWord, &EventuallyRigidAut)>(
        r: u32,
        prefix: &mut Vec<SignedLetter>,
        elem: &EventuallyRigidAut,
        alphabet: &[SignedLetter],
        remaining: usize,
        f: &mut F,
    ) {
        let word = GroupWord::from_letters(r, prefix.clone()).unwrap();
        f(&word, elem);
        if remaining == 0 {
            return;
        }
        for &l in alphabet {
            let next = elem
                .compose_with_ceiling(&rewrite::letter_element(l, r).unwrap(), DEFAULT_CEILING)
                .unwrap();
            prefix.push(l);
            rec(r, prefix, &next, alphabet, remaining - 1, f);
            prefix.pop();
        }
    }
    let id = EventuallyRigidAut::identity(r).unwrap();
    rec(r, &mut Vec::new(), &id, &alphabet, max_len, f);
}

#[test]
fn criterion_07_word_problem_oracle_equivalence() {
    let started = Instant::now();
    let mut checked = 0usize;
    walk_words(3, 5, &mut |word, elem| {
        let decided = rewrite::is_trivial(word).unwrap();
        assert_eq!(decided, elem.is_identity(), "word {word}");
        checked += 1;
    });
    assert_eq!(checked, 111_111);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=20);
        let word = rewrite::random_word(3, len, &mut rng);
        let direct = word.evaluate().unwrap().is_identity();
        assert_eq!(rewrite::is_trivial(&word).unwrap(), direct, "word {word}");
    }
    pass(
        7,
        "pipeline matches direct evaluation on 111111 exhaustive + 1000 random words",
        started,
    );
}

#[test]
fn criterion_08_rewriting_contracts() {
    let started = Instant::now();
    let mut check = |word: &GroupWord, elem: &EventuallyRigidAut| {
        if word.syntactic_flux().unwrap().iter().any(|&v| v != 0) {
            return;
        }
        let (fact, stats) = rewrite::rewrite_to_compact(word).unwrap();
        let x = word.len();
        assert!(stats.area <= x * x, "area bound fails on {word}");
        let product = fact.evaluate_with_ceiling(DEFAULT_CEILING).unwrap();
        assert!(
            product.equal(elem).unwrap(),
            "factor product differs on {word}"
        );
        for factor in &fact.factors {
            let felem = factor.as_group_word().evaluate().unwrap();
            let flux = felem.flux_offsets().unwrap();
            assert!(
                flux.iter().all(|&v| v == 0),
                "factor not compactly supported on {word}"
            );
        }
    };
    walk_words(3, 5, &mut check);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=20);
        let word = rewrite::random_word(3, len, &mut rng);
        let elem = word.evaluate().unwrap();
        check(&word, &elem);
    }
    pass(
        8,
        "factor products, compact supports and the area bound hold on all flux-zero inputs",
        started,
    );
}

#[test]
fn criterion_09_houghton_embedding() {
    let started = Instant::now();
    // Exhaustive over shift words at r = 3.
    let alphabet: Vec<SignedLetter> = [2u32, 3]
        .into_iter()
        .flat_map(|i| {
            [
                SignedLetter {
                    letter: GroupLetter::Shift(i),
                    inverse: false,
                },
                SignedLetter {
                    letter: GroupLetter::Shift(i),
                    inverse: true,
                },
            ]
        })
        .collect();
    fn rec(
        elem: &EventuallyRigidAut,
        alphabet: &[SignedLetter],
        remaining: usize,
        count: &mut usize,
    ) {
        assert!(elem.is_permutational());
        *count += 1;
        if remaining == 0 {
            return;
        }
        for &l in alphabet {
            let next = elem
                .compose_with_ceiling(&rewrite::letter_element(l, 3).unwrap(), DEFAULT_CEILING)
                .unwrap();
            rec(&next, alphabet, remaining - 1, count);
        }
    }
    let mut count = 0;
    rec(
        &EventuallyRigidAut::identity(3).unwrap(),
        &alphabet,
        8,
        &mut count,
    );
    assert_eq!(count, (4usize.pow(9) - 1) / 3);

    // Random sampling at r = 4.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let mut elem = EventuallyRigidAut::identity(4).unwrap();
        for _ in 0..rng.gen_range(0..=8) {
            let i = rng.gen_range(2..=4);
            let h = EventuallyRigidAut::make_generator(GeneratorKind::Shift(i), 4).unwrap();
            let h = if rng.gen_bool(0.5) { h.invert() } else { h };
            elem = elem.compose(&h).unwrap();
        }
        assert!(elem.is_permutational());
    }
    pass(
        9,
        "all shift products act by permuting the unsigned basis",
        started,
    );
}

#[test]
fn criterion_10_folding_against_nielsen_oracle() {
    let started = Instant::now();
    // Ambient rank 8: two rays with four positions each.
    let ambient: Vec<GeneratorIndex> = (1..=2u32)
        .flat_map(|ray| (1..=4u32).map(move |position| GeneratorIndex { ray, position }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n_gens = rng.gen_range(0..=4);
        let generators: Vec<Word> = (0..n_gens)
            .map(|_| {
                let len = rng.gen_range(0..=6);
                Word::free_reduce((0..len).map(|_| {
                    let index = ambient[rng.gen_range(0..ambient.len())];
                    if rng.gen_bool(0.5) {
                        houghton::words::Letter::positive(index)
                    } else {
                        houghton::words::Letter::negative(index)
                    }
                }))
            })
            .collect();
        let folded = folding::subgroup_rank(&generators);
        let oracle = common::nielsen_rank(&generators);
        assert_eq!(folded, oracle, "generators {generators:?}");
    }

    // Images of basis subsets under random automorphisms keep their size.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let word = rewrite::random_word(3, rng.gen_range(0..=6), &mut rng);
        let elem = word.evaluate().unwrap();
        let mut subset = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=5) {
            subset.insert(GeneratorIndex {
                ray: rng.gen_range(1..=3),
                position: rng.gen_range(1..=4),
            });
        }
        let images: Vec<Word> = subset.iter().map(|&x| elem.image_of(x).unwrap()).collect();
        assert_eq!(folding::subgroup_rank(&images), subset.len(), "word {word}");
    }
    pass(
        10,
        "folded rank matches Nielsen reduction and respects automorphism images",
        started,
    );
}

#[test]
fn criterion_11_group_law_property_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..500 {
        let r = if round % 2 == 0 { 3 } else { 4 };
        let sample = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=6);
            common::random_full_word(r, len, rng).evaluate().unwrap()
        };
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let c = sample(&mut rng);

        let assoc_l = a.compose(&b).unwrap().compose(&c).unwrap();
        let assoc_r = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert!(assoc_l.equal(&assoc_r).unwrap());

        assert!(a.compose(&a.invert()).unwrap().is_identity());
        assert!(a.invert().compose(&a).unwrap().is_identity());

        // (a^b)^c = a^{cb}
        let conj = |x: &EventuallyRigidAut, by: &EventuallyRigidAut| {
            by.compose(x).unwrap().compose(&by.invert()).unwrap()
        };
        let lhs = conj(&conj(&a, &b), &c);
        let rhs = conj(&a, &c.compose(&b).unwrap());
        assert!(lhs.equal(&rhs).unwrap());

        // [a,b]^c = [a^c, b^c]
        let comm = |x: &EventuallyRigidAut, y: &EventuallyRigidAut| {
            x.invert()
                .compose(&y.invert())
                .unwrap()
                .compose(x)
                .unwrap()
                .compose(y)
                .unwrap()
        };
        let lhs = conj(&comm(&a, &b), &c);
        let rhs = comm(&conj(&a, &c), &conj(&b, &c));
        assert!(lhs.equal(&rhs).unwrap());
    }
    pass(
        11,
        "group laws and conjugation identities hold on 500 random triples",
        started,
    );
}
