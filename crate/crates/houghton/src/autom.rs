//! Eventually rigid automorphisms of the free group on the loops `a^i_j`.
//!
//! An element acts on all but finitely many basis letters as a ray-permuted
//! translation: `a^i_j` goes to `a^{perm(i)}_{j + offset_i}`. The finitely many
//! exceptions live in the `fwd` table, with the exceptions of the inverse map
//! kept alongside in `inv` so inversion never has to solve for an inverse
//! automorphism. This is the concrete model of the groups `B_r` and `PB_r`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::words::{GeneratorIndex, Word};

/// Position bound guarding against runaway exception-table growth.
pub const DEFAULT_CEILING: u32 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutError {
    #[error("ambient rank must be at least 2, got {r}")]
    RankTooSmall { r: u32 },
    #[error("mismatched ambient ranks {left} and {right}")]
    MismatchedRank { left: u32, right: u32 },
    #[error("generator parameter out of range: {reason}")]
    BadGenerator { reason: String },
    #[error("letter {letter} outside ambient rank {r}")]
    LetterOutOfRange { letter: GeneratorIndex, r: u32 },
    #[error("image position of {letter} underflows (offset {offset}); element is not canonical")]
    PositionUnderflow { letter: GeneratorIndex, offset: i64 },
    #[error("position {position} exceeds ceiling {ceiling}")]
    CeilingExceeded { position: u32, ceiling: u32 },
    #[error("element is not pure (nontrivial ray permutation)")]
    NotPure,
    #[error("element has nonzero flux {0:?}")]
    NonzeroFlux(Vec<i64>),
    #[error("invalid element data: {reason}")]
    Invalid { reason: String },
}

/// The named generators of `B_r`, plus the derived swap/flip families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Loop shift `h_i` translating loops from ray 1 to ray `i`, `2 <= i <= r`.
    Shift(u32),
    /// The swap of `a^1_1` and `a^1_2`; equals `Transposition { ray: 1, index: 1 }`.
    Sigma,
    /// The flip of `a^1_1`; equals `Flip { ray: 1, position: 1 }`.
    Tau,
    /// `a^1_1 -> (a^1_2)^-1 a^1_1`, `a^1_2 -> (a^1_2)^-1`.
    Eta,
    /// Adjacent transposition `s^i_j`: for `j >= 1` swaps `a^i_j` and
    /// `a^i_{j+1}`; for `j = 0` (and `i >= 2`) swaps `a^1_1` and `a^i_1`.
    Transposition { ray: u32, index: u32 },
    /// Loop flip `tau^i_j` of `a^i_j`.
    Flip { ray: u32, position: u32 },
    /// General loop swap of two basis letters.
    LoopSwap(GeneratorIndex, GeneratorIndex),
    /// End exchange `rho_{ij}` permuting rays `i` and `j` rigidly.
    RayExchange(u32, u32),
}

/// An eventually rigid automorphism. Immutable; all operations build new values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventuallyRigidAut {
    r: u32,
    /// `perm[i-1]` is the image ray of ray `i`.
    perm: Vec<u32>,
    /// `offsets[i-1]` is the eventual translation amount on ray `i`; sums to 0.
    offsets: Vec<i64>,
    fwd: BTreeMap<GeneratorIndex, Word>,
    inv: BTreeMap<GeneratorIndex, Word>,
}

fn identity_perm(r: u32) -> Vec<u32> {
    (1..=r).collect()
}

fn invert_perm(perm: &[u32]) -> Vec<u32> {
    let mut out = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[(p - 1) as usize] = (i + 1) as u32;
    }
    out
}

impl EventuallyRigidAut {
    /// The identity automorphism on `r` rays.
    pub fn identity(r: u32) -> Result<Self, AutError> {
        if r < 2 {
            return Err(AutError::RankTooSmall { r });
        }
        Ok(EventuallyRigidAut {
            r,
            perm: identity_perm(r),
            offsets: vec![0; r as usize],
            fwd: BTreeMap::new(),
            inv: BTreeMap::new(),
        })
    }

    /// Builds an element from raw parts, canonicalizing both tables and
    /// checking the group-element invariants.
    pub fn new(
        r: u32,
        perm: Vec<u32>,
        offsets: Vec<i64>,
        fwd: BTreeMap<GeneratorIndex, Word>,
        inv: BTreeMap<GeneratorIndex, Word>,
    ) -> Result<Self, AutError> {
        if r < 2 {
            return Err(AutError::RankTooSmall { r });
        }
        if perm.len() != r as usize || offsets.len() != r as usize {
            return Err(AutError::Invalid {
                reason: "perm/offsets length must equal r".into(),
            });
        }
        let mut seen = vec![false; r as usize];
        for &p in &perm {
            if p < 1 || p > r || seen[(p - 1) as usize] {
                return Err(AutError::Invalid {
                    reason: format!("not a permutation of 1..={r}"),
                });
            }
            seen[(p - 1) as usize] = true;
        }
        if offsets.iter().sum::<i64>() != 0 {
            return Err(AutError::Invalid {
                reason: "offsets must sum to zero".into(),
            });
        }
        let inv_perm = invert_perm(&perm);
        let mut inv_offsets = vec![0; r as usize];
        for i in 0..r as usize {
            inv_offsets[(perm[i] - 1) as usize] = -offsets[i];
        }
        let fwd = canonical_table(&perm, &offsets, r, fwd)?;
        let inv = canonical_table(&inv_perm, &inv_offsets, r, inv)?;
        let elem = EventuallyRigidAut {
            r,
            perm,
            offsets,
            fwd,
            inv,
        };
        elem.check_inverse_tables()?;
        Ok(elem)
    }

    /// Builds a named generator as a concrete element.
    pub fn make_generator(kind: GeneratorKind, r: u32) -> Result<Self, AutError> {
        if r < 2 {
            return Err(AutError::RankTooSmall { r });
        }
        let bad = |reason: String| AutError::BadGenerator { reason };
        let gen = |ray, position| GeneratorIndex { ray, position };
        let swap_tables = |a: GeneratorIndex, b: GeneratorIndex| {
            let mut t = BTreeMap::new();
            if a != b {
                t.insert(a, Word::generator(b));
                t.insert(b, Word::generator(a));
            }
            t
        };
        match kind {
            GeneratorKind::Shift(i) => {
                if i < 2 || i > r {
                    return Err(bad(format!("shift index {i} not in 2..={r}")));
                }
                let mut offsets = vec![0; r as usize];
                offsets[0] = -1;
                offsets[(i - 1) as usize] = 1;
                let mut fwd = BTreeMap::new();
                fwd.insert(gen(1, 1), Word::generator(gen(i, 1)));
                let mut inv = BTreeMap::new();
                inv.insert(gen(i, 1), Word::generator(gen(1, 1)));
                Self::new(r, identity_perm(r), offsets, fwd, inv)
            }
            GeneratorKind::Sigma => {
                Self::make_generator(GeneratorKind::Transposition { ray: 1, index: 1 }, r)
            }
            GeneratorKind::Tau => Self::make_generator(
                GeneratorKind::Flip {
                    ray: 1,
                    position: 1,
                },
                r,
            ),
            GeneratorKind::Eta => {
                let a11 = Word::generator(gen(1, 1));
                let a12 = Word::generator(gen(1, 2));
                let mut table = BTreeMap::new();
                table.insert(gen(1, 1), a12.inverse().concat(&a11));
                table.insert(gen(1, 2), a12.inverse());
                Self::new(
                    r,
                    identity_perm(r),
                    vec![0; r as usize],
                    table.clone(),
                    table,
                )
            }
            GeneratorKind::Transposition { ray, index } => {
                if ray < 1 || ray > r {
                    return Err(bad(format!("transposition ray {ray} not in 1..={r}")));
                }
                let (a, b) = if index == 0 {
                    if ray < 2 {
                        return Err(bad("transposition s^1_0 is not defined".into()));
                    }
                    (gen(1, 1), gen(ray, 1))
                } else {
                    (gen(ray, index), gen(ray, index + 1))
                };
                let table = swap_tables(a, b);
                Self::new(
                    r,
                    identity_perm(r),
                    vec![0; r as usize],
                    table.clone(),
                    table,
                )
            }
            GeneratorKind::Flip { ray, position } => {
                if ray < 1 || ray > r || position < 1 {
                    return Err(bad(format!("flip a^{ray}_{position} out of range")));
                }
                let x = gen(ray, position);
                let mut table = BTreeMap::new();
                table.insert(x, Word::generator(x).inverse());
                Self::new(
                    r,
                    identity_perm(r),
                    vec![0; r as usize],
                    table.clone(),
                    table,
                )
            }
            GeneratorKind::LoopSwap(a, b) => {
                for x in [a, b] {
                    if x.ray < 1 || x.ray > r || x.position < 1 {
                        return Err(bad(format!("loop {x} out of range")));
                    }
                }
                let table = swap_tables(a, b);
                Self::new(
                    r,
                    identity_perm(r),
                    vec![0; r as usize],
                    table.clone(),
                    table,
                )
            }
            GeneratorKind::RayExchange(i, j) => {
                if i < 1 || i > r || j < 1 || j > r || i == j {
                    return Err(bad(format!("ray exchange ({i},{j}) out of range")));
                }
                let mut perm = identity_perm(r);
                perm.swap((i - 1) as usize, (j - 1) as usize);
                Self::new(
                    r,
                    perm,
                    vec![0; r as usize],
                    BTreeMap::new(),
                    BTreeMap::new(),
                )
            }
        }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn ray_perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn exception_table(&self) -> &BTreeMap<GeneratorIndex, Word> {
        &self.fwd
    }

    /// Largest position touched by either exception table (domains and images);
    /// 0 for rigid elements.
    pub fn exception_bound(&self) -> u32 {
        let table_bound = |t: &BTreeMap<GeneratorIndex, Word>| {
            t.iter()
                .map(|(k, w)| k.position.max(w.max_position()))
                .max()
                .unwrap_or(0)
        };
        table_bound(&self.fwd).max(table_bound(&self.inv))
    }

    /// Image of the single positive letter `a^x`.
    pub fn image_of(&self, x: GeneratorIndex) -> Result<Word, AutError> {
        image_in(&self.fwd, &self.perm, &self.offsets, self.r, x)
    }

    /// Letterwise image of a word, freely reduced.
    pub fn apply(&self, w: &Word) -> Result<Word, AutError> {
        let mut out = Word::identity();
        for letter in w.letters() {
            let image = self.image_of(letter.index)?;
            let image = if letter.inverse {
                image.inverse()
            } else {
                image
            };
            out = out.concat(&image);
        }
        Ok(out)
    }

    fn apply_inverse(&self, w: &Word) -> Result<Word, AutError> {
        let inv_perm = invert_perm(&self.perm);
        let mut inv_offsets = vec![0; self.r as usize];
        for i in 0..self.r as usize {
            inv_offsets[(self.perm[i] - 1) as usize] = -self.offsets[i];
        }
        let mut out = Word::identity();
        for letter in w.letters() {
            let image = image_in(&self.inv, &inv_perm, &inv_offsets, self.r, letter.index)?;
            let image = if letter.inverse {
                image.inverse()
            } else {
                image
            };
            out = out.concat(&image);
        }
        Ok(out)
    }

    /// `self` after `other`: the composite applies `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self, AutError> {
        self.compose_with_ceiling(other, DEFAULT_CEILING)
    }

    pub fn compose_with_ceiling(&self, other: &Self, ceiling: u32) -> Result<Self, AutError> {
        if self.r != other.r {
            return Err(AutError::MismatchedRank {
                left: self.r,
                right: other.r,
            });
        }
        let r = self.r;
        let perm: Vec<u32> = (0..r as usize)
            .map(|i| self.perm[(other.perm[i] - 1) as usize])
            .collect();
        let offsets: Vec<i64> = (0..r as usize)
            .map(|i| other.offsets[i] + self.offsets[(other.perm[i] - 1) as usize])
            .collect();
        let fwd = composed_table(self, other, &perm, &offsets, ceiling, false)?;
        let inv_perm = invert_perm(&perm);
        let mut inv_offsets = vec![0; r as usize];
        for i in 0..r as usize {
            inv_offsets[(perm[i] - 1) as usize] = -offsets[i];
        }
        // (fg)^-1 = g^-1 f^-1: inner map is self^-1, outer is other^-1.
        let inv = composed_table(other, self, &inv_perm, &inv_offsets, ceiling, true)?;
        let out = EventuallyRigidAut {
            r,
            perm,
            offsets,
            fwd,
            inv,
        };
        debug_assert!(
            out.check_inverse_tables().is_ok(),
            "composite tables inconsistent"
        );
        Ok(out)
    }

    /// Constant-time inversion: swap tables, invert the ray permutation,
    /// negate offsets along it.
    pub fn invert(&self) -> Self {
        let perm = invert_perm(&self.perm);
        let mut offsets = vec![0; self.r as usize];
        for i in 0..self.r as usize {
            offsets[(self.perm[i] - 1) as usize] = -self.offsets[i];
        }
        EventuallyRigidAut {
            r: self.r,
            perm,
            offsets,
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    /// Canonical-form equality; errors on mismatched ambient rank.
    pub fn equal(&self, other: &Self) -> Result<bool, AutError> {
        if self.r != other.r {
            return Err(AutError::MismatchedRank {
                left: self.r,
                right: other.r,
            });
        }
        Ok(self == other)
    }

    pub fn is_identity(&self) -> bool {
        self.perm == identity_perm(self.r)
            && self.offsets.iter().all(|&t| t == 0)
            && self.fwd.is_empty()
    }

    /// True iff the element fixes every end, i.e. the ray permutation is trivial.
    pub fn is_pure(&self) -> bool {
        self.perm == identity_perm(self.r)
    }

    /// The flux vector `(t_2, ..., t_r)` of a pure element.
    pub fn flux_offsets(&self) -> Result<Vec<i64>, AutError> {
        if !self.is_pure() {
            return Err(AutError::NotPure);
        }
        Ok(self.offsets[1..].to_vec())
    }

    /// Moved basis letters of a compactly supported element.
    pub fn support(&self) -> Result<BTreeSet<GeneratorIndex>, AutError> {
        let flux = self.flux_offsets()?;
        if flux.iter().any(|&t| t != 0) {
            return Err(AutError::NonzeroFlux(flux));
        }
        // Canonical form: with trivial permutation and offsets the rigid rule
        // is the identity, so the table domain is exactly the moved set.
        Ok(self.fwd.keys().copied().collect())
    }

    /// True iff every exception image is a single positive letter, so the
    /// element permutes the unsigned basis.
    pub fn is_permutational(&self) -> bool {
        self.fwd.values().all(|w| w.as_single_positive().is_some())
    }

    /// Canonical JSON form with the table sorted by (ray, position).
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "r": self.r,
            "perm": self.perm,
            "offsets": self.offsets,
            "table": self
                .fwd
                .iter()
                .map(|(k, w)| json!({ "gen": k.to_string(), "image": w.to_string() }))
                .collect::<Vec<_>>(),
        })
    }

    fn check_inverse_tables(&self) -> Result<(), AutError> {
        let mut closure: BTreeSet<GeneratorIndex> = BTreeSet::new();
        for (k, w) in self.fwd.iter().chain(self.inv.iter()) {
            closure.insert(*k);
            closure.extend(w.letters().iter().map(|l| l.index));
        }
        for ray in 1..=self.r {
            let beyond = closure
                .iter()
                .filter(|g| g.ray == ray)
                .map(|g| g.position)
                .max()
                .unwrap_or(0)
                + 1
                + self
                    .offsets
                    .iter()
                    .map(|t| t.unsigned_abs() as u32)
                    .max()
                    .unwrap_or(0);
            closure.insert(GeneratorIndex {
                ray,
                position: beyond,
            });
        }
        for &x in &closure {
            let there = self.image_of(x)?;
            let back = self.apply_inverse(&there)?;
            if back.as_single_positive() != Some(x) {
                return Err(AutError::Invalid {
                    reason: format!("inverse table does not undo the element at {x}"),
                });
            }
        }
        Ok(())
    }
}

fn image_in(
    table: &BTreeMap<GeneratorIndex, Word>,
    perm: &[u32],
    offsets: &[i64],
    r: u32,
    x: GeneratorIndex,
) -> Result<Word, AutError> {
    if x.ray < 1 || x.ray > r {
        return Err(AutError::LetterOutOfRange { letter: x, r });
    }
    if let Some(w) = table.get(&x) {
        return Ok(w.clone());
    }
    match rigid_image(perm, offsets, x) {
        Some(y) => Ok(Word::generator(y)),
        None => Err(AutError::PositionUnderflow {
            letter: x,
            offset: offsets[(x.ray - 1) as usize],
        }),
    }
}

fn rigid_image(perm: &[u32], offsets: &[i64], x: GeneratorIndex) -> Option<GeneratorIndex> {
    let pos = x.position as i64 + offsets[(x.ray - 1) as usize];
    if pos >= 1 {
        Some(GeneratorIndex {
            ray: perm[(x.ray - 1) as usize],
            position: pos as u32,
        })
    } else {
        None
    }
}

fn canonical_table(
    perm: &[u32],
    offsets: &[i64],
    r: u32,
    table: BTreeMap<GeneratorIndex, Word>,
) -> Result<BTreeMap<GeneratorIndex, Word>, AutError> {
    let mut out = BTreeMap::new();
    for (x, w) in table {
        if x.ray < 1 || x.ray > r {
            return Err(AutError::LetterOutOfRange { letter: x, r });
        }
        for l in w.letters() {
            if l.index.ray < 1 || l.index.ray > r {
                return Err(AutError::LetterOutOfRange { letter: l.index, r });
            }
        }
        if rigid_image(perm, offsets, x) != w.as_single_positive()
            || w.as_single_positive().is_none()
        {
            out.insert(x, w);
        }
    }
    Ok(out)
}

/// Exception table of `outer . inner` (inner applied first), canonical with
/// respect to the composite's rigid rule.
fn composed_table(
    outer: &EventuallyRigidAut,
    inner: &EventuallyRigidAut,
    perm: &[u32],
    offsets: &[i64],
    ceiling: u32,
    inverse_side: bool,
) -> Result<BTreeMap<GeneratorIndex, Word>, AutError> {
    let (inner_table, inner_perm, inner_offsets, outer_table) = if inverse_side {
        // inner = outer_arg^-1, outer = inner_arg^-1 relative to the caller.
        (
            &inner.inv,
            invert_perm(&inner.perm),
            negated_offsets(inner),
            &outer.inv,
        )
    } else {
        (
            &inner.fwd,
            inner.perm.clone(),
            inner.offsets.clone(),
            &outer.fwd,
        )
    };
    let mut candidates: BTreeSet<GeneratorIndex> = inner_table.keys().copied().collect();
    let inner_inv_perm = invert_perm(&inner_perm);
    for &y in outer_table.keys() {
        let ray = inner_inv_perm[(y.ray - 1) as usize];
        let pos = y.position as i64 - inner_offsets[(ray - 1) as usize];
        if pos >= 1 {
            candidates.insert(GeneratorIndex {
                ray,
                position: pos as u32,
            });
        }
    }
    let r = inner.r;
    let outer_inv_perm = invert_perm(&outer.perm);
    let (o_table, o_perm, o_offsets): (_, &[u32], Vec<i64>) = if inverse_side {
        (&outer.inv, &outer_inv_perm, negated_offsets(outer))
    } else {
        (&outer.fwd, &outer.perm, outer.offsets.clone())
    };
    let mut table = BTreeMap::new();
    for x in candidates {
        let step = image_in(inner_table, &inner_perm, &inner_offsets, r, x)?;
        let mut image = Word::identity();
        for l in step.letters() {
            let li = image_in(o_table, o_perm, &o_offsets, r, l.index)?;
            let li = if l.inverse { li.inverse() } else { li };
            image = image.concat(&li);
        }
        if image.max_position() > ceiling {
            return Err(AutError::CeilingExceeded {
                position: image.max_position(),
                ceiling,
            });
        }
        if rigid_image(perm, offsets, x) != image.as_single_positive()
            || image.as_single_positive().is_none()
        {
            table.insert(x, image);
        }
    }
    Ok(table)
}

fn negated_offsets(a: &EventuallyRigidAut) -> Vec<i64> {
    let mut out = vec![0; a.r as usize];
    for i in 0..a.r as usize {
        out[(a.perm[i] - 1) as usize] = -a.offsets[i];
    }
    out
}

impl fmt::Display for EventuallyRigidAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "perm {:?} offsets {:?} table {{",
            self.perm, self.offsets
        )?;
        for (i, (k, w)) in self.fwd.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} -> {w}")?;
        }
        write!(f, "}}")
    }
}
