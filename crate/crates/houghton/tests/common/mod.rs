//! Shared helpers for the integration suites: a Nielsen-reduction rank
//! oracle independent of the folding implementation, and seeded samplers.

use houghton::rewrite::{GroupLetter, GroupWord, SignedLetter};
use houghton::words::Word;
use rand::Rng;

/// Cancellation length in the product `u . v`.
fn cancellation(u: &Word, v: &Word) -> usize {
    (u.len() + v.len() - u.concat(v).len()) / 2
}

/// Rank of the subgroup generated by the given words, by Nielsen reduction.
///
/// Applies length-reducing two-factor replacements to a fixpoint, resolves
/// exact-half swallowing with length-preserving moves, and certifies the
/// final set is Nielsen-reduced (no empty words; `|uv| >= max(|u|, |v|)`;
/// every middle factor keeps a letter in triples). A Nielsen-reduced set is
/// a basis of the subgroup it generates, so its size is the rank.
pub fn nielsen_rank(generators: &[Word]) -> usize {
    let mut set: Vec<Word> = generators
        .iter()
        .filter(|w| !w.is_empty())
        .cloned()
        .collect();
    let mut fuel = 100_000usize;
    'outer: loop {
        assert!(fuel > 0, "nielsen reduction did not terminate");
        fuel -= 1;
        set.retain(|w| !w.is_empty());
        // Length-reducing pass.
        for a in 0..set.len() {
            for b in 0..set.len() {
                if a == b {
                    continue;
                }
                let u = set[a].clone();
                for cand in [
                    u.concat(&set[b]),
                    u.inverse().concat(&set[b]),
                    set[b].concat(&u),
                    set[b].concat(&u.inverse()),
                ] {
                    if cand.len() < set[b].len() {
                        set[b] = cand;
                        continue 'outer;
                    }
                }
            }
        }
        // Exact-half swallowing: some middle factor vanishes in a triple.
        if let Some((a, sa, b, sb)) = find_swallowing(&set) {
            let u = signed(&set, a, sa);
            let v = signed(&set, b, sb);
            let uv = u.concat(&v);
            set[a] = if sa { uv.inverse() } else { uv };
            continue 'outer;
        }
        break;
    }
    assert_nielsen_reduced(&set);
    set.len()
}

fn signed(set: &[Word], idx: usize, inverse: bool) -> Word {
    if inverse {
        set[idx].inverse()
    } else {
        set[idx].clone()
    }
}

/// Finds `(u, v)` from distinct indices where the product `u v` cancels
/// exactly half of `v`, and some `(v, w)` cancels the other half.
fn find_swallowing(set: &[Word]) -> Option<(usize, bool, usize, bool)> {
    for b in 0..set.len() {
        let v_len = set[b].len();
        if !v_len.is_multiple_of(2) {
            continue;
        }
        for sb in [false, true] {
            let v = signed(set, b, sb);
            let mut head_eaten = None;
            let mut tail_eaten = false;
            for a in 0..set.len() {
                if a == b {
                    continue;
                }
                for sa in [false, true] {
                    let u = signed(set, a, sa);
                    if cancellation(&u, &v) * 2 == v_len {
                        head_eaten = Some((a, sa));
                    }
                    if cancellation(&v, &u) * 2 == v_len {
                        tail_eaten = true;
                    }
                }
            }
            if let (Some((a, sa)), true) = (head_eaten, tail_eaten) {
                return Some((a, sa, b, sb));
            }
        }
    }
    None
}

fn assert_nielsen_reduced(set: &[Word]) {
    for w in set {
        assert!(!w.is_empty());
    }
    for a in 0..set.len() {
        for b in 0..set.len() {
            if a == b {
                continue;
            }
            for sa in [false, true] {
                for sb in [false, true] {
                    let u = signed(set, a, sa);
                    let v = signed(set, b, sb);
                    let uv = u.concat(&v);
                    assert!(
                        uv.len() >= u.len().max(v.len()),
                        "two-factor condition fails"
                    );
                }
            }
        }
    }
    // Triple condition: the middle word keeps at least one letter.
    for b in 0..set.len() {
        for sb in [false, true] {
            let v = signed(set, b, sb);
            let mut max_head = 0;
            let mut max_tail = 0;
            for a in 0..set.len() {
                if a == b {
                    continue;
                }
                for sa in [false, true] {
                    let u = signed(set, a, sa);
                    max_head = max_head.max(cancellation(&u, &v));
                    max_tail = max_tail.max(cancellation(&v, &u));
                }
            }
            assert!(
                max_head + max_tail < v.len().max(1),
                "triple condition fails"
            );
        }
    }
}

/// Random word over the full generator alphabet, including indexed swaps,
/// flips and end exchanges.
#[allow(dead_code)]
pub fn random_full_word<R: Rng>(r: u32, len: usize, rng: &mut R) -> GroupWord {
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let letter = match rng.gen_range(0..8) {
            0 => GroupLetter::Shift(rng.gen_range(2..=r)),
            1 => GroupLetter::Sigma,
            2 => GroupLetter::Tau,
            3 => GroupLetter::Eta,
            4 => {
                let ray = rng.gen_range(1..=r);
                let index = if ray == 1 {
                    rng.gen_range(1..=4)
                } else {
                    rng.gen_range(0..=4)
                };
                GroupLetter::SAt { ray, index }
            }
            5 => GroupLetter::TauAt {
                ray: rng.gen_range(1..=r),
                position: rng.gen_range(1..=4),
            },
            6 => {
                let i = rng.gen_range(1..=r);
                let j = (i % r) + 1;
                GroupLetter::Rho(i, j)
            }
            _ => GroupLetter::Shift(rng.gen_range(2..=r)),
        };
        letters.push(SignedLetter {
            letter,
            inverse: rng.gen_bool(0.5),
        });
    }
    GroupWord::from_letters(r, letters).expect("letters in range")
}
