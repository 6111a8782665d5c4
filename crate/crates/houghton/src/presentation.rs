//! Parameterized catalogs of the relation families satisfied by the concrete
//! group, and a verification engine that evaluates each instance and checks
//! it is the identity.
//!
//! Families:
//! - `P`: the finite presentation relators r1..r18 of the pure group, r >= 3;
//! - `AFV`: relations (1a)-(1f), (2a)-(2h) among the flip/swap/eta generators
//!   of the finite-window automorphism groups, n >= 4;
//! - `QPRIME`: conjugation of eta, tau and sigma by the shifts;
//! - `AUX`: the auxiliary commutation and conjugation ladders used to reduce
//!   the infinite families to the finite ones;
//! - `R`: the shift-conjugated rewrites of the AFV and conjugation relations.
//!
//! Equations `A = B` are normalized to relators `A B'` so a single identity
//! check covers both forms.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::autom::{EventuallyRigidAut, DEFAULT_CEILING};
use crate::rewrite::{GroupLetter, GroupWord, GroupWordError};
use crate::words::{GeneratorIndex, Word};

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("catalog parameters out of range: {reason}")]
    BadParams { reason: String },
    #[error(transparent)]
    Word(#[from] GroupWordError),
}

/// Concrete parameter values of one relator instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Params {
    pub i: Option<i64>,
    pub j: Option<i64>,
    pub k: Option<i64>,
    pub n: Option<i64>,
}

impl Params {
    fn i(v: i64) -> Self {
        Params {
            i: Some(v),
            ..Default::default()
        }
    }

    fn ij(i: i64, j: i64) -> Self {
        Params {
            i: Some(i),
            j: Some(j),
            ..Default::default()
        }
    }

    fn with_k(mut self, k: i64) -> Self {
        self.k = Some(k);
        self
    }

    fn with_n(mut self, n: i64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "i": self.i, "j": self.j, "k": self.k, "n": self.n })
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, v) in [("i", self.i), ("j", self.j), ("k", self.k), ("n", self.n)] {
            if let Some(v) = v {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{name}={v}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// A relator family with parameter ranges and a word builder. The builder may
/// reject a grid point (for index constraints like `i != j`), and every word
/// it produces is a valid `GroupWord` by construction.
pub struct RelatorTemplate {
    pub family: &'static str,
    /// Named inclusive ranges walked in order; `i`/`j`/`k`/`n` slots.
    pub ranges: Vec<(char, i64, i64)>,
    builder: Box<dyn Fn(Params) -> Option<GroupWord>>,
}

impl RelatorTemplate {
    pub fn instances(&self) -> Vec<RelatorInstance> {
        let mut grid = vec![Params::default()];
        for &(name, lo, hi) in &self.ranges {
            let mut next = Vec::new();
            for p in &grid {
                for v in lo..=hi {
                    let mut q = *p;
                    match name {
                        'i' => q.i = Some(v),
                        'j' => q.j = Some(v),
                        'k' => q.k = Some(v),
                        'n' => q.n = Some(v),
                        _ => unreachable!("unknown parameter name"),
                    }
                    next.push(q);
                }
            }
            grid = next;
        }
        grid.into_iter()
            .filter_map(|params| {
                (self.builder)(params).map(|word| RelatorInstance {
                    family: self.family,
                    params,
                    word,
                })
            })
            .collect()
    }
}

/// One instantiated relator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorInstance {
    pub family: &'static str,
    pub params: Params,
    pub word: GroupWord,
}

/// Outcome of evaluating one relator in the concrete group.
#[derive(Debug, Clone)]
pub struct VerificationResult {
    pub instance: RelatorInstance,
    pub holds: bool,
    /// Least moved generator and its image, when the relator fails.
    pub witness: Option<(GeneratorIndex, Word)>,
}

impl VerificationResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "family": self.instance.family,
            "params": self.instance.params.to_json(),
            "word": self.instance.word.to_string(),
            "holds": self.holds,
            "witness": self.witness.as_ref().map(|(g, w)| json!({
                "gen": g.to_string(),
                "image": w.to_string(),
            })),
        })
    }
}

// ---------------------------------------------------------------------------
// Word-building helpers
// ---------------------------------------------------------------------------

fn lw(r: u32, letter: GroupLetter) -> GroupWord {
    GroupWord::single(r, letter).expect("catalog letter in range")
}

fn h(r: u32, i: i64) -> GroupWord {
    lw(r, GroupLetter::Shift(i as u32))
}

fn hpow(r: u32, i: i64, k: i64) -> GroupWord {
    h(r, i).pow(k)
}

fn sigma(r: u32) -> GroupWord {
    lw(r, GroupLetter::Sigma)
}

fn tau(r: u32) -> GroupWord {
    lw(r, GroupLetter::Tau)
}

fn eta(r: u32) -> GroupWord {
    lw(r, GroupLetter::Eta)
}

fn s_at(r: u32, ray: i64, index: i64) -> GroupWord {
    lw(
        r,
        GroupLetter::SAt {
            ray: ray as u32,
            index: index as u32,
        },
    )
}

/// `A = B` as the relator `A B'`.
fn eq(a: GroupWord, b: GroupWord) -> GroupWord {
    a.concat(&b.inverse())
}

fn comm(a: &GroupWord, b: &GroupWord) -> GroupWord {
    GroupWord::commutator(a, b)
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

/// The presentation relators r1..r18, instantiated over `2 <= i < j <= r`
/// (pair families) and `2 <= i <= r` (single-index families).
pub fn catalog_p(r: u32) -> Result<Vec<RelatorInstance>, PresentationError> {
    if r < 3 {
        return Err(PresentationError::BadParams {
            reason: format!("the presentation is stated for r >= 3, got {r}"),
        });
    }
    let ri = 2..=(r as i64);
    let once = |family, word: GroupWord| RelatorTemplate {
        family,
        ranges: vec![],
        builder: Box::new(move |_| Some(word.clone())),
    };
    let per_i = |family, f: Box<dyn Fn(i64) -> GroupWord>| RelatorTemplate {
        family,
        ranges: vec![('i', *ri.start(), *ri.end())],
        builder: Box::new(move |p: Params| Some(f(p.i.unwrap()))),
    };
    let per_pair = |family, f: Box<dyn Fn(i64, i64) -> GroupWord>| RelatorTemplate {
        family,
        ranges: vec![('i', *ri.start(), *ri.end()), ('j', *ri.start(), *ri.end())],
        builder: Box::new(move |p: Params| {
            let (i, j) = (p.i.unwrap(), p.j.unwrap());
            (i < j).then(|| f(i, j))
        }),
    };

    let s = sigma(r);
    let t = tau(r);
    let e = eta(r);
    let templates = vec![
        once("P.r1", s.pow(2)),
        per_i(
            "P.r2",
            Box::new(move |i| comm(&sigma(r), &sigma(r).conjugate(&hpow(r, i, -2)))),
        ),
        per_i(
            "P.r3",
            Box::new(move |i| sigma(r).concat(&sigma(r).conjugate(&hpow(r, i, -1))).pow(3)),
        ),
        per_pair(
            "P.r4",
            Box::new(move |i, j| eq(sigma(r), comm(&h(r, i), &h(r, j)))),
        ),
        per_pair(
            "P.r5",
            Box::new(move |i, j| {
                eq(
                    sigma(r).conjugate(&hpow(r, i, -1)),
                    sigma(r).conjugate(&hpow(r, j, -1)),
                )
            }),
        ),
        once("P.r6", t.pow(2)),
        once("P.r7", comm(&tau(r), &sigma(r)).pow(2)),
        per_i(
            "P.r8",
            Box::new(move |i| comm(&tau(r), &sigma(r).conjugate(&hpow(r, i, -1)))),
        ),
        per_i(
            "P.r9",
            Box::new(move |i| {
                eq(
                    tau(r).conjugate(&hpow(r, i, -1)),
                    tau(r).conjugate(&sigma(r)),
                )
            }),
        ),
        once("P.r10", e.pow(2)),
        once("P.r11", sigma(r).concat(&eta(r)).pow(3)),
        // The eta analog of r8: the nearest ray-1 swap disjoint from eta's
        // support. Pairs with r13 as the two base cases of the eta/swap
        // commutation family.
        per_i(
            "P.r12",
            Box::new(move |i| comm(&eta(r), &sigma(r).conjugate(&hpow(r, i, -2)))),
        ),
        per_i(
            "P.r13",
            Box::new(move |i| comm(&eta(r), &sigma(r).conjugate(&hpow(r, i, 2)))),
        ),
        per_i(
            "P.r14",
            Box::new(move |i| {
                let conj = sigma(r).concat(&sigma(r).conjugate(&h(r, i)));
                eq(eta(r).conjugate(&h(r, i)), eta(r).conjugate(&conj))
            }),
        ),
        per_i(
            "P.r15",
            Box::new(move |i| comm(&eta(r), &eta(r).conjugate(&hpow(r, i, -2)))),
        ),
        per_i(
            "P.r16",
            Box::new(move |i| comm(&eta(r), &tau(r).conjugate(&h(r, i)))),
        ),
        once("P.r17", {
            let et = eta(r).concat(&tau(r));
            et.pow(2).concat(&tau(r).conjugate(&sigma(r))).pow(2)
        }),
        per_i(
            "P.r18",
            Box::new(move |i| {
                let s_hbar = sigma(r).conjugate(&hpow(r, i, -1));
                let s_s_hbar = sigma(r).conjugate(&s_hbar);
                let t_s = tau(r).conjugate(&sigma(r));
                let head = sigma(r)
                    .concat(&eta(r))
                    .concat(&s_s_hbar)
                    .concat(&t_s)
                    .concat(&eta(r))
                    .concat(&sigma(r));
                let tail = s_hbar
                    .concat(&eta(r))
                    .concat(&s_s_hbar)
                    .concat(&t_s)
                    .concat(&eta(r));
                head.concat(&tail.pow(2))
            }),
        ),
    ];
    Ok(templates.iter().flat_map(|t| t.instances()).collect())
}

/// Index set of the window generators: `(i, j)` with `1 <= i <= r`,
/// `0 <= j <= n-1`, excluding `(1, 0)`.
fn window_index_set(r: u32, n: u32) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for i in 1..=(r as i64) {
        for j in 0..=(n as i64 - 1) {
            if (i, j) != (1, 0) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Relations (1a)-(1f) and (2a)-(2h) over the window index set.
pub fn catalog_afv(r: u32, n: u32) -> Result<Vec<RelatorInstance>, PresentationError> {
    if n < 4 {
        return Err(PresentationError::BadParams {
            reason: format!("the window presentation needs n >= 4, got {n}"),
        });
    }
    if r < 2 {
        return Err(PresentationError::BadParams {
            reason: format!("need r >= 2, got {r}"),
        });
    }
    let index_set = window_index_set(r, n);
    let in_set = |i: i64, j: i64| index_set.contains(&(i, j));
    let mut out = Vec::new();
    let mut push = |family: &'static str, params: Params, word: GroupWord| {
        out.push(RelatorInstance {
            family,
            params,
            word,
        });
    };

    for &(i, j) in &index_set {
        push("AFV.1a", Params::ij(i, j), s_at(r, i, j).pow(2));
    }
    for &(i, j) in &index_set {
        for &(k, l) in &index_set {
            let far = (j - l).abs() >= 2;
            let near = i != k && (j - l).abs() <= 1 && j >= 1 && l >= 1;
            if far || near {
                push(
                    "AFV.1b",
                    Params::ij(i, j).with_k(k).with_n(l),
                    comm(&s_at(r, i, j), &s_at(r, k, l)),
                );
            }
        }
    }
    for &(i, j) in &index_set {
        for l in [j - 1, j + 1] {
            if in_set(i, l) {
                push(
                    "AFV.1c-adj",
                    Params::ij(i, j).with_n(l),
                    s_at(r, i, j).concat(&s_at(r, i, l)).pow(3),
                );
            }
        }
    }
    for i in 2..=(r as i64) {
        push(
            "AFV.1c-corner",
            Params::i(i),
            s_at(r, i, 0).concat(&s_at(r, 1, 1)).pow(3),
        );
    }
    for i in 2..=(r as i64) {
        for j in 2..=(r as i64) {
            if i != j {
                push(
                    "AFV.1c-zero",
                    Params::ij(i, j),
                    s_at(r, i, 0).concat(&s_at(r, j, 0)).pow(3),
                );
            }
        }
    }
    push("AFV.1d", Params::default(), tau(r).pow(2));
    push(
        "AFV.1e",
        Params::ij(1, 1),
        comm(&tau(r), &s_at(r, 1, 1)).pow(2),
    );
    for i in 2..=(r as i64) {
        push(
            "AFV.1e",
            Params::ij(i, 0),
            comm(&tau(r), &s_at(r, i, 0)).pow(2),
        );
    }
    for &(i, j) in &index_set {
        let exceptional = (i, j) == (1, 1) || j == 0;
        if !exceptional {
            push("AFV.1f", Params::ij(i, j), comm(&tau(r), &s_at(r, i, j)));
        }
    }

    push("AFV.2a", Params::default(), eta(r).pow(2));
    push(
        "AFV.2b",
        Params::default(),
        eta(r).concat(&s_at(r, 1, 1)).pow(3),
    );
    for j in 2..=(n as i64 - 1) {
        // Conjugator s^1_j ... s^1_1, descending.
        let mut conj = GroupWord::empty(r);
        for l in (1..=j).rev() {
            conj = conj.concat(&s_at(r, 1, l));
        }
        push(
            "AFV.2c-ray1",
            Params::ij(1, j),
            comm(&eta(r), &tau(r).conjugate(&conj)),
        );
    }
    for i in 2..=(r as i64) {
        for j in 0..=(n as i64 - 1) {
            let mut conj = GroupWord::empty(r);
            for l in (0..=j).rev() {
                conj = conj.concat(&s_at(r, i, l));
            }
            push(
                "AFV.2c-rayi",
                Params::ij(i, j),
                comm(&eta(r), &tau(r).conjugate(&conj)),
            );
        }
    }
    for &(i, j) in &index_set {
        if j != 0 && (i, j) != (1, 1) && (i, j) != (1, 2) {
            push(
                "AFV.2d-comm",
                Params::ij(i, j),
                comm(&eta(r), &s_at(r, i, j)),
            );
        }
    }
    for i in 2..=(r as i64) {
        let conj = s_at(r, i, 0).concat(&s_at(r, 1, 1));
        push(
            "AFV.2d-conj",
            Params::i(i),
            comm(&eta(r), &s_at(r, 1, 2).conjugate(&conj)),
        );
    }
    push("AFV.2e", Params::default(), {
        let et = eta(r).concat(&tau(r));
        et.pow(2).concat(&tau(r).conjugate(&s_at(r, 1, 1))).pow(2)
    });
    let core_2f = eta(r)
        .concat(&s_at(r, 1, 1).conjugate(&s_at(r, 1, 2)))
        .concat(&tau(r).conjugate(&s_at(r, 1, 1)))
        .concat(&eta(r))
        .concat(&s_at(r, 1, 1));
    push("AFV.2f", Params::default(), core_2f.pow(4));
    push("AFV.2g", Params::default(), {
        let head = s_at(r, 1, 1)
            .concat(&eta(r))
            .concat(&s_at(r, 1, 1).conjugate(&s_at(r, 1, 2)))
            .concat(&tau(r).conjugate(&s_at(r, 1, 1)))
            .concat(&eta(r))
            .concat(&s_at(r, 1, 1));
        let tail = s_at(r, 1, 2)
            .concat(&eta(r))
            .concat(&s_at(r, 1, 1).conjugate(&s_at(r, 1, 2)))
            .concat(&tau(r).conjugate(&s_at(r, 1, 1)))
            .concat(&eta(r));
        head.concat(&tail.pow(2))
    });
    push("AFV.2h", Params::default(), {
        let tower = s_at(r, 1, 1).conjugate(&s_at(r, 1, 2).conjugate(&s_at(r, 1, 3)));
        tower.concat(&s_at(r, 1, 2)).concat(&eta(r)).pow(4)
    });

    Ok(out)
}

/// The six conjugation-by-shift families. `n` ranges over `0..=n_max` for
/// conjugation by inverse shifts and `1..=n_max` for positive shifts.
pub fn catalog_qprime(r: u32, n_max: i64) -> Result<Vec<RelatorInstance>, PresentationError> {
    if r < 2 || n_max < 1 {
        return Err(PresentationError::BadParams {
            reason: format!("need r >= 2 and n_max >= 1, got r={r}, n_max={n_max}"),
        });
    }
    let mut out = Vec::new();
    for i in 2..=(r as i64) {
        out.push(RelatorInstance {
            family: "QPRIME.eta-neg",
            params: Params::i(i),
            word: eq(
                eta(r).conjugate(&hpow(r, i, -1)),
                eta(r).conjugate(&s_at(r, 1, 1).concat(&s_at(r, 1, 2))),
            ),
        });
        out.push(RelatorInstance {
            family: "QPRIME.eta-pos",
            params: Params::i(i),
            word: eq(
                eta(r).conjugate(&h(r, i)),
                eta(r).conjugate(&s_at(r, 1, 1).concat(&s_at(r, i, 0))),
            ),
        });
        out.push(RelatorInstance {
            family: "QPRIME.tau-neg",
            params: Params::i(i),
            word: eq(
                tau(r).conjugate(&hpow(r, i, -1)),
                tau(r).conjugate(&s_at(r, 1, 1)),
            ),
        });
        out.push(RelatorInstance {
            family: "QPRIME.tau-pos",
            params: Params::i(i),
            word: eq(tau(r).conjugate(&h(r, i)), tau(r).conjugate(&s_at(r, i, 0))),
        });
        for n in 0..=n_max {
            out.push(RelatorInstance {
                family: "QPRIME.sigma-neg",
                params: Params::i(i).with_n(n),
                word: eq(s_at(r, 1, 1).conjugate(&hpow(r, i, -n)), s_at(r, 1, n + 1)),
            });
        }
        for n in 1..=n_max {
            out.push(RelatorInstance {
                family: "QPRIME.sigma-pos",
                params: Params::i(i).with_n(n),
                word: eq(s_at(r, 1, 1).conjugate(&hpow(r, i, n)), s_at(r, i, n - 1)),
            });
        }
    }
    Ok(out)
}

/// Conjugator chain `sigma^{hbar_i^{k-1}} ... sigma^{hbar_i} sigma`.
fn tau_chain_neg(r: u32, i: i64, k: i64) -> GroupWord {
    let mut out = GroupWord::empty(r);
    for e in (0..k).rev() {
        out = out.concat(&sigma(r).conjugate(&hpow(r, i, -e)));
    }
    out
}

/// Conjugator chain `sigma^{h_i^k} ... sigma^{h_i}`.
fn tau_chain_pos(r: u32, i: i64, k: i64) -> GroupWord {
    let mut out = GroupWord::empty(r);
    for e in (1..=k).rev() {
        out = out.concat(&sigma(r).conjugate(&hpow(r, i, e)));
    }
    out
}

/// Auxiliary commutation and conjugation ladders, `1 <= k <= k_max`
/// (`q2k` starts at 2).
pub fn catalog_aux(r: u32, k_max: i64) -> Result<Vec<RelatorInstance>, PresentationError> {
    if r < 3 || k_max < 2 {
        return Err(PresentationError::BadParams {
            reason: format!("need r >= 3 and k_max >= 2, got r={r}, k_max={k_max}"),
        });
    }
    let mut out = Vec::new();
    let rays = 2..=(r as i64);
    for i in rays.clone() {
        for j in rays.clone() {
            if i == j {
                continue;
            }
            out.push(RelatorInstance {
                family: "AUX.q1",
                params: Params::ij(i, j),
                word: comm(&tau(r).conjugate(&h(r, i)), &h(r, j)),
            });
            out.push(RelatorInstance {
                family: "AUX.q3",
                params: Params::ij(i, j),
                word: comm(&eta(r).conjugate(&hpow(r, i, 2)), &h(r, j)),
            });
            if i < j {
                out.push(RelatorInstance {
                    family: "AUX.q4",
                    params: Params::ij(i, j),
                    word: eq(
                        eta(r).conjugate(&hpow(r, i, -1)),
                        eta(r).conjugate(&hpow(r, j, -1)),
                    ),
                });
            }
            for k in 1..=k_max {
                out.push(RelatorInstance {
                    family: "AUX.q1k",
                    params: Params::ij(i, j).with_k(k),
                    word: comm(&tau(r).conjugate(&hpow(r, i, k)), &h(r, j)),
                });
                if i < j {
                    out.push(RelatorInstance {
                        family: "AUX.r9k-eq",
                        params: Params::ij(i, j).with_k(k),
                        word: eq(
                            tau(r).conjugate(&hpow(r, i, -k)),
                            tau(r).conjugate(&hpow(r, j, -k)),
                        ),
                    });
                }
            }
            for k in 2..=k_max {
                out.push(RelatorInstance {
                    family: "AUX.q2k",
                    params: Params::ij(i, j).with_k(k),
                    word: comm(&sigma(r).conjugate(&hpow(r, i, k)), &h(r, j)),
                });
            }
        }
    }
    for i in rays.clone() {
        for k in 1..=k_max {
            out.push(RelatorInstance {
                family: "AUX.r9k",
                params: Params::i(i).with_k(k),
                word: eq(
                    tau(r).conjugate(&hpow(r, i, -k)),
                    tau(r).conjugate(&tau_chain_neg(r, i, k)),
                ),
            });
            out.push(RelatorInstance {
                family: "AUX.r9k-neg",
                params: Params::i(i).with_k(k),
                word: eq(
                    tau(r).conjugate(&hpow(r, i, k)),
                    tau(r).conjugate(&tau_chain_pos(r, i, k)),
                ),
            });
        }
    }
    Ok(out)
}

/// The shift-conjugated reduction families obtained by eliminating the
/// indexed transpositions: infinite families sampled up to `n_max`.
///
/// The near case of the mixed commutators excludes exponent pair (1, 1),
/// whose participants share the loop `a^1_1` and genuinely do not commute.
pub fn catalog_reductions(r: u32, n_max: i64) -> Result<Vec<RelatorInstance>, PresentationError> {
    if r < 3 || n_max < 2 {
        return Err(PresentationError::BadParams {
            reason: format!("need r >= 3 and n_max >= 2, got r={r}, n_max={n_max}"),
        });
    }
    let mut out = Vec::new();
    let mut push = |family: &'static str, params: Params, word: GroupWord| {
        out.push(RelatorInstance {
            family,
            params,
            word,
        });
    };
    let rays = 2..=(r as i64);
    let s_pow = |i: i64, n: i64| sigma(r).conjugate(&hpow(r, i, n));

    push("R.1a", Params::default(), sigma(r).pow(2));
    push("R.1d", Params::default(), tau(r).pow(2));
    push(
        "R.1e-sigma",
        Params::default(),
        comm(&tau(r), &sigma(r)).pow(2),
    );
    push("R.2a", Params::default(), eta(r).pow(2));
    push("R.2b", Params::default(), eta(r).concat(&sigma(r)).pow(3));
    push("R.2e", Params::default(), {
        let et = eta(r).concat(&tau(r));
        et.pow(2).concat(&tau(r).conjugate(&sigma(r))).pow(2)
    });

    for i in rays.clone() {
        for m in -n_max..=n_max {
            for n in -n_max..=n_max {
                if (m - n).abs() != 1 {
                    push(
                        "R.1b-same",
                        Params::i(i).with_k(m).with_n(n),
                        comm(&s_pow(i, m), &s_pow(i, n)),
                    );
                }
            }
        }
        push(
            "R.1c-adj",
            Params::i(i),
            sigma(r).concat(&s_pow(i, 1)).pow(3),
        );
        push(
            "R.1e-conj",
            Params::i(i),
            comm(&tau(r), &s_pow(i, 1)).pow(2),
        );
        for n in -n_max..=n_max {
            if n != 0 && n != 1 {
                push("R.1f", Params::i(i).with_n(n), comm(&tau(r), &s_pow(i, n)));
            }
            if n.abs() >= 2 {
                push(
                    "R.2d-far",
                    Params::i(i).with_n(n),
                    comm(&eta(r), &s_pow(i, n)),
                );
            }
        }
        for n in 1..=n_max {
            push(
                "R.2c-neg",
                Params::i(i).with_n(n),
                comm(&eta(r), &tau(r).conjugate(&tau_chain_neg(r, i, n + 1))),
            );
            push(
                "R.2c-pos",
                Params::i(i).with_n(n),
                comm(&eta(r), &tau(r).conjugate(&tau_chain_pos(r, i, n))),
            );
        }
        let s_hbar = sigma(r).conjugate(&hpow(r, i, -1));
        push("R.2f", Params::i(i), {
            eta(r)
                .concat(&sigma(r).conjugate(&s_hbar))
                .concat(&tau(r).conjugate(&sigma(r)))
                .concat(&eta(r))
                .concat(&sigma(r))
                .pow(4)
        });
        push("R.2g", Params::i(i), {
            let s_s_hbar = sigma(r).conjugate(&s_hbar);
            let t_s = tau(r).conjugate(&sigma(r));
            let head = sigma(r)
                .concat(&eta(r))
                .concat(&s_s_hbar)
                .concat(&t_s)
                .concat(&eta(r))
                .concat(&sigma(r));
            let tail = s_hbar
                .concat(&eta(r))
                .concat(&s_s_hbar)
                .concat(&t_s)
                .concat(&eta(r));
            head.concat(&tail.pow(2))
        });
        push("R.2h", Params::i(i), {
            let inner = s_hbar.conjugate(&sigma(r).conjugate(&hpow(r, i, -2)));
            sigma(r)
                .conjugate(&inner)
                .concat(&s_hbar)
                .concat(&eta(r))
                .pow(4)
        });
        push("R.prime-eta-neg", Params::i(i), {
            eq(
                eta(r).conjugate(&hpow(r, i, -1)),
                eta(r).conjugate(&sigma(r).concat(&s_hbar)),
            )
        });
        push("R.prime-eta-pos", Params::i(i), {
            eq(
                eta(r).conjugate(&h(r, i)),
                eta(r).conjugate(&sigma(r).concat(&s_pow(i, 1))),
            )
        });
        push(
            "R.prime-tau-neg",
            Params::i(i),
            eq(
                tau(r).conjugate(&hpow(r, i, -1)),
                tau(r).conjugate(&sigma(r)),
            ),
        );
        push(
            "R.prime-tau-pos",
            Params::i(i),
            eq(tau(r).conjugate(&h(r, i)), tau(r).conjugate(&s_pow(i, 1))),
        );
    }

    for i in rays.clone() {
        for j in rays.clone() {
            if i == j {
                continue;
            }
            for m in -n_max..=n_max {
                for n in -n_max..=n_max {
                    let high = m >= 2 || n >= 2;
                    let low = m <= 1 && n <= 1 && (m - n).abs() != 1 && (m, n) != (1, 1);
                    if high || low {
                        let family = if high { "R.1b-far" } else { "R.1b-near" };
                        push(
                            family,
                            Params::ij(i, j).with_k(m).with_n(n),
                            comm(&s_pow(i, m), &s_pow(j, n)),
                        );
                    }
                }
            }
            push(
                "R.1c-pair",
                Params::ij(i, j),
                s_pow(i, 1).concat(&s_pow(j, 1)).pow(3),
            );
            push("R.2d-skew", Params::ij(i, j), {
                let conj = sigma(r).conjugate(&h(r, j)).concat(&sigma(r));
                comm(
                    &eta(r),
                    &sigma(r).conjugate(&hpow(r, i, -1)).conjugate(&conj),
                )
            });
            for n in 0..=n_max {
                push(
                    "R.prime-sigma",
                    Params::ij(i, j).with_n(n),
                    eq(
                        sigma(r).conjugate(&hpow(r, i, -n)),
                        sigma(r).conjugate(&hpow(r, j, -n)),
                    ),
                );
            }
            push(
                "R.sigma-comm",
                Params::ij(i, j),
                sigma(r).concat(&comm(&h(r, i), &h(r, j))),
            );
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Evaluates one relator instance and checks it against the identity.
pub fn verify(instance: &RelatorInstance) -> Result<VerificationResult, PresentationError> {
    verify_with_ceiling(instance, DEFAULT_CEILING)
}

pub fn verify_with_ceiling(
    instance: &RelatorInstance,
    ceiling: u32,
) -> Result<VerificationResult, PresentationError> {
    let elem = instance.word.evaluate_with_ceiling(ceiling)?;
    let holds = elem.is_identity();
    let witness = if holds {
        None
    } else {
        Some(least_moved(&elem))
    };
    Ok(VerificationResult {
        instance: instance.clone(),
        holds,
        witness,
    })
}

/// Least (ray, position) generator moved by a non-identity element, with its
/// image.
fn least_moved(elem: &EventuallyRigidAut) -> (GeneratorIndex, Word) {
    let mut candidates: Vec<GeneratorIndex> = Vec::new();
    for (&x, w) in elem.exception_table() {
        if w != &Word::generator(x) {
            candidates.push(x);
        }
    }
    for ray in 1..=elem.r() {
        let moved_rigidly =
            elem.ray_perm()[(ray - 1) as usize] != ray || elem.offsets()[(ray - 1) as usize] != 0;
        if moved_rigidly {
            let mut p = 1;
            while elem
                .exception_table()
                .contains_key(&GeneratorIndex { ray, position: p })
            {
                p += 1;
            }
            candidates.push(GeneratorIndex { ray, position: p });
        }
    }
    let x = candidates
        .into_iter()
        .min()
        .expect("non-identity element moves some generator");
    let image = elem.image_of(x).expect("canonical element is total");
    (x, image)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySelection {
    P,
    Afv,
    Qprime,
    Aux,
    Reductions,
    All,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub r: u32,
    /// Window size for the AFV catalog.
    pub afv_n: u32,
    /// Sampling bound for the infinite conjugation families.
    pub n_max: i64,
    /// Sampling bound for the auxiliary ladders.
    pub k_max: i64,
    pub ceiling: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            r: 3,
            afv_n: 4,
            n_max: 6,
            k_max: 5,
            ceiling: DEFAULT_CEILING,
        }
    }
}

/// Aggregated verification results in deterministic (family, params) order.
#[derive(Debug)]
pub struct Report {
    pub results: Vec<VerificationResult>,
    pub all_hold: bool,
}

impl Report {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "all_hold": self.all_hold,
            "checked": self.results.len(),
            "results": self.results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Builds the selected catalogs and verifies every instance.
pub fn verify_all(
    selection: FamilySelection,
    opts: &VerifyOptions,
) -> Result<Report, PresentationError> {
    let mut instances = Vec::new();
    let want = |f: FamilySelection| selection == f || selection == FamilySelection::All;
    if want(FamilySelection::P) {
        instances.extend(catalog_p(opts.r)?);
    }
    if want(FamilySelection::Afv) {
        instances.extend(catalog_afv(opts.r, opts.afv_n)?);
    }
    if want(FamilySelection::Qprime) {
        instances.extend(catalog_qprime(opts.r, opts.n_max)?);
    }
    if want(FamilySelection::Aux) {
        instances.extend(catalog_aux(opts.r, opts.k_max)?);
    }
    if want(FamilySelection::Reductions) {
        instances.extend(catalog_reductions(opts.r, opts.n_max)?);
    }
    instances.sort_by(|a, b| (a.family, a.params).cmp(&(b.family, b.params)));
    let mut results = Vec::with_capacity(instances.len());
    let mut all_hold = true;
    for inst in &instances {
        let res = verify_with_ceiling(inst, opts.ceiling)?;
        all_hold &= res.holds;
        results.push(res);
    }
    Ok(Report { results, all_hold })
}
