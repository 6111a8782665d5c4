//! Stallings foldings of subgroup graphs, subgroup rank and corank, and the
//! corank route to the flux map.
//!
//! A finitely generated subgroup of the free group on the loop basis is
//! represented by its folded core graph: directed edges labeled by basis
//! letters, no vertex with two equal-label edges in the same direction, and
//! no degree-1 vertices away from the basepoint. The first Betti number
//! `E - V + 1` of that graph is the subgroup rank.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::autom::{AutError, EventuallyRigidAut};
use crate::words::{GeneratorIndex, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoldError {
    #[error("generator letter {letter} is outside the ambient basis")]
    LetterOutsideAmbient { letter: GeneratorIndex },
    #[error("computed rank {rank} exceeds the ambient basis size {ambient}")]
    RankExceedsAmbient { rank: usize, ambient: usize },
    #[error("flux window parameters invalid: {reason}")]
    BadWindow { reason: String },
    #[error("image of {of} leaves the window at letter {letter}")]
    ImageOutsideWindow {
        of: GeneratorIndex,
        letter: GeneratorIndex,
    },
    #[error(transparent)]
    Aut(#[from] AutError),
}

/// A folded core graph with basepoint 0 and vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    vertex_count: usize,
    basepoint: usize,
    /// Directed edges `(from, to, label)`, meaning `from --a^label--> to`.
    edges: BTreeSet<(usize, usize, GeneratorIndex)>,
}

impl SubgroupGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize, GeneratorIndex)> {
        &self.edges
    }

    /// First Betti number `E - V + 1`; the rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// BFS-canonical edge list; equal for label-isomorphic based graphs.
    ///
    /// Foldedness makes the traversal deterministic: each vertex has at most
    /// one outgoing and one incoming edge per label.
    pub fn canonical_edges(&self) -> Vec<(usize, usize, GeneratorIndex)> {
        let mut by_vertex: BTreeMap<usize, Vec<(bool, GeneratorIndex, usize)>> = BTreeMap::new();
        for &(u, v, l) in &self.edges {
            by_vertex.entry(u).or_default().push((false, l, v));
            by_vertex.entry(v).or_default().push((true, l, u));
        }
        for adj in by_vertex.values_mut() {
            adj.sort();
        }
        let mut number: HashMap<usize, usize> = HashMap::new();
        number.insert(self.basepoint, 0);
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for &(_, _, w) in by_vertex.get(&v).into_iter().flatten() {
                if !number.contains_key(&w) {
                    number.insert(w, number.len());
                    queue.push_back(w);
                }
            }
        }
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v, l)| (number[&u], number[&v], l))
            .collect();
        out.sort();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertex_count,
            "basepoint": self.basepoint,
            "edges": self
                .edges
                .iter()
                .map(|(u, v, l)| serde_json::json!({ "from": u, "to": v, "label": l.to_string() }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Folded core graph of the subgroup generated by the given words.
pub fn fold(generators: &[Word]) -> SubgroupGraph {
    // Bouquet of loops at the basepoint, one per nonempty generator.
    let mut vertex_count = 1usize;
    let mut edges: Vec<(usize, usize, GeneratorIndex)> = Vec::new();
    for w in generators {
        let k = w.len();
        let mut prev = 0usize;
        for (pos, letter) in w.letters().iter().enumerate() {
            let next = if pos + 1 == k {
                0
            } else {
                vertex_count += 1;
                vertex_count - 1
            };
            if letter.inverse {
                edges.push((next, prev, letter.index));
            } else {
                edges.push((prev, next, letter.index));
            }
            prev = next;
        }
    }

    // Fold: repeatedly identify the endpoints of equal-label edge pairs
    // sharing a source (or sharing a target).
    let mut parent: Vec<usize> = (0..vertex_count).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let edge_set = loop {
        let set: BTreeSet<(usize, usize, GeneratorIndex)> = edges
            .iter()
            .map(|&(u, v, l)| (find(&mut parent, u), find(&mut parent, v), l))
            .collect();
        let mut out_seen: HashMap<(usize, GeneratorIndex), usize> = HashMap::new();
        let mut in_seen: HashMap<(usize, GeneratorIndex), usize> = HashMap::new();
        let mut merge = None;
        for &(u, v, l) in &set {
            if let Some(&v2) = out_seen.get(&(u, l)) {
                merge = Some((v, v2));
                break;
            }
            out_seen.insert((u, l), v);
            if let Some(&u2) = in_seen.get(&(v, l)) {
                merge = Some((u, u2));
                break;
            }
            in_seen.insert((v, l), u);
        }
        match merge {
            Some((a, b)) => {
                let (a, b) = (find(&mut parent, a), find(&mut parent, b));
                parent[a.max(b)] = a.min(b);
                edges = set.into_iter().collect();
            }
            None => break set,
        }
    };

    // Core: drop degree-<=1 vertices away from the basepoint.
    let base = find(&mut parent, 0);
    let mut edges = edge_set;
    loop {
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for &(u, v, _) in &edges {
            *degree.entry(u).or_default() += 1;
            *degree.entry(v).or_default() += 1;
        }
        let prune: Vec<_> = degree
            .iter()
            .filter(|&(&v, &d)| v != base && d <= 1)
            .map(|(&v, _)| v)
            .collect();
        if prune.is_empty() {
            break;
        }
        edges.retain(|&(u, v, _)| !prune.contains(&u) && !prune.contains(&v));
    }

    // Relabel to a compact vertex range with the basepoint at 0.
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    relabel.insert(base, 0);
    for &(u, v, _) in &edges {
        let next = relabel.len();
        relabel.entry(u).or_insert(next);
        let next = relabel.len();
        relabel.entry(v).or_insert(next);
    }
    SubgroupGraph {
        vertex_count: relabel.len(),
        basepoint: 0,
        edges: edges
            .into_iter()
            .map(|(u, v, l)| (relabel[&u], relabel[&v], l))
            .collect(),
    }
}

/// Rank of the folded core graph of the given generators.
pub fn subgroup_rank(generators: &[Word]) -> usize {
    fold(generators).rank()
}

/// Corank of the subgroup generated by `generators` inside the free group on
/// `ambient_basis`, assuming the subgroup is a free factor.
pub fn corank(
    ambient_basis: &BTreeSet<GeneratorIndex>,
    generators: &[Word],
) -> Result<usize, FoldError> {
    for w in generators {
        for l in w.letters() {
            if !ambient_basis.contains(&l.index) {
                return Err(FoldError::LetterOutsideAmbient { letter: l.index });
            }
        }
    }
    let rank = subgroup_rank(generators);
    if rank > ambient_basis.len() {
        return Err(FoldError::RankExceedsAmbient {
            rank,
            ambient: ambient_basis.len(),
        });
    }
    Ok(ambient_basis.len() - rank)
}

/// The flux coordinate of a pure element computed through the corank formula
/// on a finite window, cross-checking the offset bookkeeping.
///
/// The window basis keeps ray `i` up to `n` on the subgroup side and up to
/// `m` on the ambient side; every other ray `u` is capped at
/// `window + max(-t_u, 0)` on the subgroup side and `window + max(t_u, 0)` on
/// the ambient side, so that the rigid boundary contributes equally to both
/// corank terms and the truncation is invisible.
pub fn flux_via_corank(
    f: &EventuallyRigidAut,
    i: u32,
    n: u32,
    m: u32,
    window: u32,
) -> Result<i64, FoldError> {
    if !f.is_pure() {
        return Err(FoldError::Aut(AutError::NotPure));
    }
    let r = f.r();
    if i < 2 || i > r {
        return Err(FoldError::BadWindow {
            reason: format!("ray index {i} not in 2..={r}"),
        });
    }
    if !(n < m && m <= window) {
        return Err(FoldError::BadWindow {
            reason: format!("need n < m <= window, got ({n}, {m}, {window})"),
        });
    }
    let bound = f.exception_bound();
    let offsets = f.offsets();
    let t_max = offsets.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    if u64::from(n) <= u64::from(bound) {
        return Err(FoldError::BadWindow {
            reason: format!("n = {n} does not clear the exception region (bound {bound})"),
        });
    }
    if u64::from(window) <= u64::from(bound) + t_max {
        return Err(FoldError::BadWindow {
            reason: format!("window = {window} too small for exception bound {bound} and offsets"),
        });
    }
    if i64::from(n) + offsets[(i - 1) as usize] > i64::from(m) {
        return Err(FoldError::BadWindow {
            reason: format!("ray-{i} images exceed m = {m}"),
        });
    }

    let mut ambient: BTreeSet<GeneratorIndex> = BTreeSet::new();
    let mut sources: Vec<GeneratorIndex> = Vec::new();
    for u in 1..=r {
        let t_u = offsets[(u - 1) as usize];
        let (sub_cap, amb_cap) = if u == i {
            (i64::from(n), i64::from(m))
        } else {
            (
                i64::from(window) + (-t_u).max(0),
                i64::from(window) + t_u.max(0),
            )
        };
        for p in 1..=amb_cap {
            ambient.insert(GeneratorIndex::new(u, p as u32));
        }
        for p in 1..=sub_cap {
            sources.push(GeneratorIndex::new(u, p as u32));
        }
    }
    let mut images = Vec::with_capacity(sources.len());
    for x in sources {
        let w = f.image_of(x)?;
        for l in w.letters() {
            if !ambient.contains(&l.index) {
                return Err(FoldError::ImageOutsideWindow {
                    of: x,
                    letter: l.index,
                });
            }
        }
        images.push(w);
    }
    let c = corank(&ambient, &images)?;
    Ok(i64::from(m) - i64::from(n) - c as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autom::GeneratorKind;
    use crate::words::Letter;

    fn gen(ray: u32, position: u32) -> GeneratorIndex {
        GeneratorIndex { ray, position }
    }

    fn basis(names: &[(u32, u32)]) -> BTreeSet<GeneratorIndex> {
        names.iter().map(|&(r, p)| gen(r, p)).collect()
    }

    #[test]
    fn fold_basis_subset_is_wedge() {
        let g = fold(&[Word::generator(gen(1, 1)), Word::generator(gen(1, 2))]);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.rank(), 2);
    }

    #[test]
    fn fold_conjugate_powers_collapse() {
        // x y x^-1 and x y^2 x^-1 generate x<y>x^-1; Nielsen reduction of the
        // pair gives the single generator x y x^-1, so the rank is 1.
        let x = gen(1, 1);
        let y = gen(1, 2);
        let w1 = Word::free_reduce([
            Letter::positive(x),
            Letter::positive(y),
            Letter::negative(x),
        ]);
        let w2 = Word::free_reduce([
            Letter::positive(x),
            Letter::positive(y),
            Letter::positive(y),
            Letter::negative(x),
        ]);
        let g = fold(&[w1, w2]);
        assert_eq!(g.rank(), 1);
    }

    #[test]
    fn fold_empty_is_single_vertex() {
        let g = fold(&[]);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().len(), 0);
        assert_eq!(g.rank(), 0);
        assert_eq!(fold(&[Word::identity()]).rank(), 0);
    }

    #[test]
    fn corank_examples() {
        let ambient = basis(&[(1, 1), (1, 2), (1, 3)]);
        let a = Word::generator(gen(1, 1));
        let b = Word::generator(gen(1, 2));
        let c = Word::generator(gen(1, 3));
        assert_eq!(corank(&ambient, &[a.clone(), b.clone()]).unwrap(), 1);
        assert_eq!(
            corank(&ambient, &[a.clone(), b.clone(), c.clone()]).unwrap(),
            0
        );
        // c b c^-1 folds to rank 1.
        let cbc = c.concat(&b).concat(&c.inverse());
        assert_eq!(corank(&ambient, &[cbc]).unwrap(), 2);
        assert!(matches!(
            corank(&basis(&[(1, 1)]), &[b]),
            Err(FoldError::LetterOutsideAmbient { .. })
        ));
    }

    #[test]
    fn corank_rejects_rank_overflow() {
        // Inside the ambient free group on {x, y} the conjugates y^{x^k}
        // are independent, so three of them exceed the ambient rank and the
        // free-factor precondition cannot hold.
        let ambient = basis(&[(1, 1), (1, 2)]);
        let x = Word::generator(gen(1, 1));
        let y = Word::generator(gen(1, 2));
        let conj = |k: usize| {
            let mut p = Word::identity();
            for _ in 0..k {
                p = p.concat(&x);
            }
            p.concat(&y).concat(&p.inverse())
        };
        let gens = [conj(0), conj(1), conj(2)];
        assert!(matches!(
            corank(&ambient, &gens),
            Err(FoldError::RankExceedsAmbient {
                rank: 3,
                ambient: 2
            })
        ));
    }

    #[test]
    fn fold_is_order_and_nielsen_invariant() {
        let x = gen(2, 1);
        let y = gen(1, 3);
        let u = Word::free_reduce([Letter::positive(x), Letter::positive(y)]);
        let v = Word::free_reduce([Letter::negative(y), Letter::positive(x)]);
        let base = fold(&[u.clone(), v.clone()]);
        let swapped = fold(&[v.clone(), u.clone()]);
        assert_eq!(base.canonical_edges(), swapped.canonical_edges());
        // Nielsen moves: replace v by u v, invert u.
        let nielsen = fold(&[u.inverse(), u.concat(&v)]);
        assert_eq!(base.canonical_edges(), nielsen.canonical_edges());
    }

    fn shift(i: u32, r: u32) -> EventuallyRigidAut {
        EventuallyRigidAut::make_generator(GeneratorKind::Shift(i), r).unwrap()
    }

    #[test]
    fn flux_via_corank_of_shift() {
        let h2 = shift(2, 3);
        assert_eq!(flux_via_corank(&h2, 2, 3, 6, 10).unwrap(), 1);
        assert_eq!(flux_via_corank(&h2, 3, 3, 6, 10).unwrap(), 0);
    }

    #[test]
    fn flux_via_corank_of_sigma() {
        let sigma = EventuallyRigidAut::make_generator(GeneratorKind::Sigma, 3).unwrap();
        assert_eq!(flux_via_corank(&sigma, 2, 3, 6, 10).unwrap(), 0);
    }

    #[test]
    fn flux_via_corank_of_shift_square() {
        let h2 = shift(2, 3);
        let sq = h2.compose(&h2).unwrap();
        assert_eq!(flux_via_corank(&sq, 2, 4, 8, 12).unwrap(), 2);
        // Oracle: the offset route.
        assert_eq!(sq.flux_offsets().unwrap()[0], 2);
    }

    #[test]
    fn flux_via_corank_negative_and_mixed() {
        let h2 = shift(2, 3);
        let h3 = shift(3, 3);
        let w = h2
            .compose(&h2)
            .unwrap()
            .compose(&h2)
            .unwrap()
            .compose(&h3.invert())
            .unwrap();
        assert_eq!(flux_via_corank(&w, 2, 6, 12, 20).unwrap(), 3);
        assert_eq!(flux_via_corank(&w, 3, 6, 12, 20).unwrap(), -1);
        assert_eq!(flux_via_corank(&h2.invert(), 2, 3, 6, 10).unwrap(), -1);
    }

    #[test]
    fn flux_via_corank_window_validation() {
        let h2 = shift(2, 3);
        assert!(matches!(
            flux_via_corank(&h2, 2, 6, 3, 10),
            Err(FoldError::BadWindow { .. })
        ));
        assert!(matches!(
            flux_via_corank(&h2, 2, 0, 6, 10),
            Err(FoldError::BadWindow { .. })
        ));
        let rho = EventuallyRigidAut::make_generator(GeneratorKind::RayExchange(1, 2), 3).unwrap();
        assert!(matches!(
            flux_via_corank(&rho, 2, 3, 6, 10),
            Err(FoldError::Aut(AutError::NotPure))
        ));
    }

    #[test]
    fn flux_via_corank_on_larger_random_elements() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let len = rng.gen_range(0..=12);
            let word = crate::rewrite::random_word(5, len, &mut rng);
            let elem = word.evaluate().unwrap();
            let flux = elem.flux_offsets().unwrap();
            let bound = elem.exception_bound();
            let t_max = elem
                .offsets()
                .iter()
                .map(|v| v.unsigned_abs() as u32)
                .max()
                .unwrap_or(0);
            let n = bound + 1;
            let m = n + t_max + 1;
            let window = m + t_max;
            for i in 2..=5 {
                assert_eq!(
                    flux_via_corank(&elem, i, n, m, window).unwrap(),
                    flux[(i - 2) as usize],
                    "word {word}, i={i}"
                );
            }
        }
    }

    #[test]
    fn flux_via_corank_of_identity() {
        let id = EventuallyRigidAut::identity(3).unwrap();
        assert_eq!(flux_via_corank(&id, 2, 1, 2, 2).unwrap(), 0);
    }

    #[test]
    fn rank_preserved_under_automorphism_images() {
        let h2 = shift(2, 3);
        let eta = EventuallyRigidAut::make_generator(GeneratorKind::Eta, 3).unwrap();
        let f = h2.compose(&eta).unwrap().compose(&h2.invert()).unwrap();
        let subset = [gen(1, 1), gen(1, 2), gen(2, 1), gen(3, 2)];
        let images: Vec<Word> = subset.iter().map(|&x| f.image_of(x).unwrap()).collect();
        assert_eq!(subgroup_rank(&images), subset.len());
    }
}
