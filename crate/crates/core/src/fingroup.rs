//! Finite groups as concrete multiplication tables.
//!
//! A [`FiniteGroup`] is an indexed element set with a full multiplication
//! table; element 0 is always the identity. Groups are built either by
//! closing a set of permutation generators or from an explicit table.
//! [`GroupMap`] is a homomorphism validated by the full pairwise check.
//!
//! The payoff is [`FiniteGroup::twisted_classes`]: the partition of the
//! group into orbits of `x -> psi(g) * x * phi(g)^-1`. It is deliberately
//! brute force; every cleverer computation in this crate is checked
//! against it.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum GroupError {
    #[error("generator {index} is not a permutation of the point set")]
    InvalidPermutation { index: usize },

    #[error("closure exceeded the cap of {cap} elements")]
    ClosureExceeded { cap: usize },

    #[error("map is not a homomorphism: fails on pair ({x}, {y})")]
    NotHomomorphism { x: usize, y: usize },

    #[error("image table has length {got}, expected the domain order {expected}")]
    ImageLengthMismatch { got: usize, expected: usize },

    #[error("image entry {value} at index {index} exceeds the codomain order {order}")]
    ImageOutOfRange {
        index: usize,
        value: usize,
        order: usize,
    },

    #[error("multiplication table is invalid: {0}")]
    InvalidTable(String),

    #[error("table is not associative on the triple ({x}, {y}, {z})")]
    NotAssociative { x: usize, y: usize, z: usize },

    #[error("map is not an automorphism (not bijective)")]
    NotBijective,
}

/// How an element was first reached during generator closure:
/// `element = parent * generator`. Used to extend maps defined on
/// generator images to the whole group.
#[derive(Clone, Copy, Debug)]
enum Derivation {
    Identity,
    Step { parent: u32, gen: u32 },
}

/// A finite group with elements `0..order`, element 0 the identity.
#[derive(Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    gen_labels: Vec<(String, usize)>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("gen_labels", &self.gen_labels)
            .finish_non_exhaustive()
    }
}

impl FiniteGroup {
    /// The group generated by the given permutations (as image vectors of a
    /// common point set), closed under composition. BFS order from the
    /// identity makes element indexing deterministic.
    pub fn from_permutations(generators: &[Vec<usize>], cap: usize) -> Result<Self, GroupError> {
        let points = generators.first().map_or(0, |g| g.len());
        for (index, g) in generators.iter().enumerate() {
            let mut seen = vec![false; points];
            if g.len() != points {
                return Err(GroupError::InvalidPermutation { index });
            }
            for &img in g {
                if img >= points || seen[img] {
                    return Err(GroupError::InvalidPermutation { index });
                }
                seen[img] = true;
            }
        }

        let identity: Vec<u32> = (0..points as u32).collect();
        let gens: Vec<Vec<u32>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| x as u32).collect())
            .collect();

        let mut elements: Vec<Vec<u32>> = vec![identity.clone()];
        let mut index_of: HashMap<Vec<u32>, u32> = HashMap::new();
        index_of.insert(identity, 0);
        let mut cursor = 0;
        while cursor < elements.len() {
            for g in &gens {
                let product = compose(&elements[cursor], g);
                if !index_of.contains_key(&product) {
                    if elements.len() >= cap {
                        return Err(GroupError::ClosureExceeded { cap });
                    }
                    index_of.insert(product.clone(), elements.len() as u32);
                    elements.push(product);
                }
            }
            cursor += 1;
        }

        let order = elements.len();
        let mut mul = vec![0u32; order * order];
        for x in 0..order {
            for y in 0..order {
                let product = compose(&elements[x], &elements[y]);
                mul[x * order + y] = index_of[&product];
            }
        }
        let gen_labels = gens
            .iter()
            .enumerate()
            .map(|(i, g)| (gen_label(i), index_of[g] as usize))
            .collect();

        let mut group = FiniteGroup {
            order,
            mul,
            inv: Vec::new(),
            gen_labels,
        };
        group.inv = group.compute_inverses()?;
        group.check_latin_square()?;
        Ok(group)
    }

    /// Build from an explicit multiplication table. Runs the full integrity
    /// check including associativity on all triples, so this is meant for
    /// externally supplied tables of modest order.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self, GroupError> {
        let group = Self::from_table_trusted(table)?;
        for x in 0..group.order {
            for y in 0..group.order {
                let xy = group.mul(x, y);
                for z in 0..group.order {
                    if group.mul(xy, z) != group.mul(x, group.mul(y, z)) {
                        return Err(GroupError::NotAssociative { x, y, z });
                    }
                }
            }
        }
        Ok(group)
    }

    /// Like [`from_table_trusted`](Self::from_table_trusted) but takes the
    /// flat row-major table directly, avoiding an intermediate copy for
    /// larger quotient groups.
    pub(crate) fn from_flat_trusted(order: usize, mul: Vec<u32>) -> Result<Self, GroupError> {
        if order == 0 || mul.len() != order * order {
            return Err(GroupError::InvalidTable("bad table dimensions".into()));
        }
        if mul.iter().any(|&v| v as usize >= order) {
            return Err(GroupError::InvalidTable("entry out of range".into()));
        }
        for x in 0..order {
            if mul[x] as usize != x || mul[x * order] as usize != x {
                return Err(GroupError::InvalidTable(
                    "element 0 is not a two-sided identity".into(),
                ));
            }
        }
        let mut group = FiniteGroup {
            order,
            mul,
            inv: Vec::new(),
            gen_labels: Vec::new(),
        };
        group.inv = group.compute_inverses()?;
        group.check_latin_square()?;
        Ok(group)
    }

    /// Table constructor for callers that guarantee associativity by
    /// construction (product group laws, quotient projections). Still checks
    /// the Latin-square property, the identity row/column, and inverses.
    pub(crate) fn from_table_trusted(table: &[Vec<usize>]) -> Result<Self, GroupError> {
        let order = table.len();
        if order == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        let mut mul = vec![0u32; order * order];
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::InvalidTable(format!(
                    "row {i} has length {}, expected {order}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::InvalidTable(format!(
                        "entry ({i}, {j}) = {v} out of range"
                    )));
                }
                mul[i * order + j] = v as u32;
            }
        }
        for x in 0..order {
            if mul[x] as usize != x || mul[x * order] as usize != x {
                return Err(GroupError::InvalidTable(
                    "element 0 is not a two-sided identity".into(),
                ));
            }
        }
        let mut group = FiniteGroup {
            order,
            mul,
            inv: Vec::new(),
            gen_labels: Vec::new(),
        };
        group.inv = group.compute_inverses()?;
        group.check_latin_square()?;
        Ok(group)
    }

    fn compute_inverses(&self) -> Result<Vec<u32>, GroupError> {
        let mut inv = vec![u32::MAX; self.order];
        for x in 0..self.order {
            match (0..self.order).find(|&y| self.mul(x, y) == 0) {
                Some(y) if self.mul(y, x) == 0 => inv[x] = y as u32,
                _ => {
                    return Err(GroupError::InvalidTable(format!(
                        "element {x} has no two-sided inverse"
                    )))
                }
            }
        }
        Ok(inv)
    }

    fn check_latin_square(&self) -> Result<(), GroupError> {
        let n = self.order;
        let mut seen = vec![false; n];
        for x in 0..n {
            seen.fill(false);
            for y in 0..n {
                let v = self.mul(x, y);
                if seen[v] {
                    return Err(GroupError::InvalidTable(format!("row {x} repeats {v}")));
                }
                seen[v] = true;
            }
            seen.fill(false);
            for y in 0..n {
                let v = self.mul(y, x);
                if seen[v] {
                    return Err(GroupError::InvalidTable(format!("column {x} repeats {v}")));
                }
                seen[v] = true;
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.order + y] as usize
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inv[x] as usize
    }

    pub fn gen_labels(&self) -> &[(String, usize)] {
        &self.gen_labels
    }

    /// `x^k` for any integer `k`.
    pub fn pow(&self, x: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(x) } else { x };
        let mut e = k.unsigned_abs();
        let mut acc = 0;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            e >>= 1;
            sq = self.mul(sq, sq);
        }
        acc
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|x| (x..self.order).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// Partition of the group under `x ~ psi(g) * x * phi(g)^-1`.
    ///
    /// The relation is transitive across twisters, so a single sweep over
    /// all `g` from each unvisited seed yields the full class. Seeds are
    /// taken in increasing index order, which makes the class list (and the
    /// minimal-index representatives) deterministic.
    pub fn twisted_classes(&self, phi: &GroupMap, psi: &GroupMap) -> TwistedPartition {
        assert!(phi.is_endo_of(self) && psi.is_endo_of(self), "maps must be endomorphisms of this group");
        let n = self.order;
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut reps = Vec::new();
        for seed in 0..n {
            if class_of[seed] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = Vec::new();
            for g in 0..n {
                let y = self.mul(self.mul(psi.apply(g), seed), self.inv(phi.apply(g)));
                if class_of[y] == usize::MAX {
                    class_of[y] = id;
                    members.push(y);
                }
            }
            members.sort_unstable();
            debug_assert_eq!(members[0], seed);
            reps.push(seed);
            classes.push(members);
        }
        TwistedPartition {
            classes,
            reps,
            class_of,
        }
    }

    /// Number of `(phi, psi)`-twisted conjugacy classes.
    pub fn reidemeister_number(&self, phi: &GroupMap, psi: &GroupMap) -> usize {
        self.twisted_classes(phi, psi).classes.len()
    }

    /// Least `g` with `y = psi(g) * x * phi(g)^-1`, if any.
    pub fn is_twisted_conjugate(
        &self,
        phi: &GroupMap,
        psi: &GroupMap,
        x: usize,
        y: usize,
    ) -> Option<usize> {
        (0..self.order)
            .find(|&g| self.mul(self.mul(psi.apply(g), x), self.inv(phi.apply(g))) == y)
    }

    /// BFS closure of `gens` inside this group. Returns the visit order and
    /// a derivation per element, or the partial closure if `gens` do not
    /// generate the whole group.
    fn closure(&self, gens: &[usize]) -> (Vec<u32>, Vec<Option<Derivation>>) {
        let mut deriv: Vec<Option<Derivation>> = vec![None; self.order];
        deriv[0] = Some(Derivation::Identity);
        let mut visit: Vec<u32> = vec![0];
        let mut cursor = 0;
        while cursor < visit.len() {
            let x = visit[cursor] as usize;
            for (gi, &g) in gens.iter().enumerate() {
                let y = self.mul(x, g);
                if deriv[y].is_none() {
                    deriv[y] = Some(Derivation::Step {
                        parent: x as u32,
                        gen: gi as u32,
                    });
                    visit.push(y as u32);
                }
            }
            cursor += 1;
        }
        (visit, deriv)
    }

    /// A small deterministic generating set: greedily add the least element
    /// not yet in the closure.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens: Vec<usize> = Vec::new();
        loop {
            let (visit, _) = self.closure(&gens);
            if visit.len() == self.order {
                return gens;
            }
            let mut reached = vec![false; self.order];
            for &v in &visit {
                reached[v as usize] = true;
            }
            let next = (0..self.order).find(|&x| !reached[x]).unwrap();
            gens.push(next);
        }
    }

    /// All endomorphisms, enumerated by generator images. Exponential in the
    /// generating set size; intended for small groups.
    pub fn endomorphisms(&self) -> Vec<GroupMap> {
        let gens = self.generating_set();
        let (visit, deriv) = self.closure(&gens);
        assert_eq!(visit.len(), self.order);
        let mut out = Vec::new();
        let mut images = vec![0usize; gens.len()];
        loop {
            if let Some(map) = self.try_extend(&visit, &deriv, &images) {
                out.push(map);
            }
            // odometer over image tuples
            let mut k = 0;
            loop {
                if k == images.len() {
                    return out;
                }
                images[k] += 1;
                if images[k] < self.order {
                    break;
                }
                images[k] = 0;
                k += 1;
            }
        }
    }

    pub fn automorphisms(&self) -> Vec<GroupMap> {
        self.endomorphisms()
            .into_iter()
            .filter(|m| m.is_bijective())
            .collect()
    }

    /// Extend generator images along the BFS derivations and keep the result
    /// only if the full homomorphism check passes.
    fn try_extend(
        &self,
        visit: &[u32],
        deriv: &[Option<Derivation>],
        gen_images: &[usize],
    ) -> Option<GroupMap> {
        let mut image = vec![0usize; self.order];
        for &v in visit {
            match deriv[v as usize].unwrap() {
                Derivation::Identity => image[v as usize] = 0,
                Derivation::Step { parent, gen } => {
                    image[v as usize] = self.mul(image[parent as usize], gen_images[gen as usize]);
                }
            }
        }
        GroupMap::validate(self, self, image).ok()
    }

    // --- named small groups used across the test and verification suites ---

    /// Cyclic group of order `n` from a single `n`-cycle.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return FiniteGroup::from_table(&[vec![0]]).unwrap();
        }
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        FiniteGroup::from_permutations(&[cycle], n + 1).unwrap()
    }

    /// Symmetric group on 3 letters (order 6).
    pub fn symmetric_3() -> Self {
        FiniteGroup::from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]], 10).unwrap()
    }

    /// Dihedral group of order `2n`: symmetries of the regular `n`-gon.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 3);
        let rotation: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let reflection: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        FiniteGroup::from_permutations(&[rotation, reflection], 2 * n + 1).unwrap()
    }

    /// Alternating group on 4 letters (order 12).
    pub fn alternating_4() -> Self {
        FiniteGroup::from_permutations(&[vec![1, 2, 0, 3], vec![0, 2, 3, 1]], 20).unwrap()
    }

    /// Quaternion group of order 8, from its symbolic multiplication rules.
    pub fn quaternion_8() -> Self {
        // elements: index = axis + 4*sign, axes 1,i,j,k, sign 0 => +, 1 => -
        let axis_mul = |a: usize, b: usize| -> (usize, usize) {
            // returns (axis, sign flip) for the product of unit axes
            match (a, b) {
                (0, b) => (b, 0),
                (a, 0) => (a, 0),
                (1, 1) | (2, 2) | (3, 3) => (0, 1),
                (1, 2) => (3, 0),
                (2, 1) => (3, 1),
                (2, 3) => (1, 0),
                (3, 2) => (1, 1),
                (3, 1) => (2, 0),
                (1, 3) => (2, 1),
                _ => unreachable!(),
            }
        };
        let mut table = vec![vec![0usize; 8]; 8];
        for x in 0..8 {
            for y in 0..8 {
                let (axis, flip) = axis_mul(x % 4, y % 4);
                let sign = (x / 4 + y / 4 + flip) % 2;
                table[x][y] = axis + 4 * sign;
            }
        }
        FiniteGroup::from_table(&table).unwrap()
    }

    /// Klein four-group as a permutation group.
    pub fn klein_four() -> Self {
        FiniteGroup::from_permutations(&[vec![1, 0, 2, 3], vec![0, 1, 3, 2]], 8).unwrap()
    }
}

fn compose(p: &[u32], q: &[u32]) -> Vec<u32> {
    // (p * q)(x) = p(q(x))
    q.iter().map(|&x| p[x as usize]).collect()
}

fn gen_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("g{i}")
    }
}

/// A validated homomorphism between two finite groups, stored as a full
/// image table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMap {
    domain: usize,
    codomain: usize,
    image: Vec<u32>,
    bijective: bool,
}

impl GroupMap {
    /// Check the homomorphism law on all pairs and record bijectivity.
    pub fn validate(
        g: &FiniteGroup,
        h: &FiniteGroup,
        image: Vec<usize>,
    ) -> Result<Self, GroupError> {
        if image.len() != g.order() {
            return Err(GroupError::ImageLengthMismatch {
                got: image.len(),
                expected: g.order(),
            });
        }
        for (index, &value) in image.iter().enumerate() {
            if value >= h.order() {
                return Err(GroupError::ImageOutOfRange {
                    index,
                    value,
                    order: h.order(),
                });
            }
        }
        for x in 0..g.order() {
            for y in 0..g.order() {
                if image[g.mul(x, y)] != h.mul(image[x], image[y]) {
                    return Err(GroupError::NotHomomorphism { x, y });
                }
            }
        }
        let mut seen = vec![false; h.order()];
        let mut bijective = g.order() == h.order();
        for &v in &image {
            if seen[v] {
                bijective = false;
            }
            seen[v] = true;
        }
        Ok(GroupMap {
            domain: g.order(),
            codomain: h.order(),
            image: image.into_iter().map(|x| x as u32).collect(),
            bijective,
        })
    }

    pub fn identity(g: &FiniteGroup) -> Self {
        GroupMap {
            domain: g.order(),
            codomain: g.order(),
            image: (0..g.order() as u32).collect(),
            bijective: true,
        }
    }

    /// The endomorphism sending every element to the identity.
    pub fn trivial(g: &FiniteGroup) -> Self {
        GroupMap {
            domain: g.order(),
            codomain: g.order(),
            image: vec![0; g.order()],
            bijective: g.order() == 1,
        }
    }

    /// Conjugation by `a`: `x -> a * x * a^-1`.
    pub fn inner(g: &FiniteGroup, a: usize) -> Self {
        let image = (0..g.order())
            .map(|x| g.mul(g.mul(a, x), g.inv(a)) as u32)
            .collect();
        GroupMap {
            domain: g.order(),
            codomain: g.order(),
            image,
            bijective: true,
        }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x] as usize
    }

    pub fn image_table(&self) -> Vec<usize> {
        self.image.iter().map(|&x| x as usize).collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.bijective
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain
            && self.image.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn is_endo_of(&self, g: &FiniteGroup) -> bool {
        self.domain == g.order() && self.codomain == g.order()
    }

    /// `self` after `other` (both endomorphisms of the same group).
    pub fn compose(&self, other: &GroupMap) -> GroupMap {
        assert_eq!(other.codomain, self.domain);
        GroupMap {
            domain: other.domain,
            codomain: self.codomain,
            image: other.image.iter().map(|&x| self.image[x as usize]).collect(),
            bijective: self.bijective && other.bijective,
        }
    }
}

/// Disjoint twisted conjugacy classes covering the whole group. Classes are
/// ordered by their minimal element, which is also the representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedPartition {
    pub classes: Vec<Vec<usize>>,
    pub reps: Vec<usize>,
    pub class_of: Vec<usize>,
}

impl TwistedPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn same_class(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_of_transposition_and_cycle_is_s3() {
        let g = FiniteGroup::from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]], 100).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn empty_generating_set_gives_trivial_group() {
        let g = FiniteGroup::from_permutations(&[], 10).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.mul(0, 0), 0);
    }

    #[test]
    fn single_four_cycle_gives_c4() {
        let g = FiniteGroup::from_permutations(&[vec![1, 2, 3, 0]], 10).unwrap();
        assert_eq!(g.order(), 4);
        assert!(g.is_abelian());
    }

    #[test]
    fn closure_cap_is_enforced() {
        let err = FiniteGroup::from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]], 4).unwrap_err();
        assert_eq!(err, GroupError::ClosureExceeded { cap: 4 });
    }

    #[test]
    fn invalid_permutation_rejected() {
        let err = FiniteGroup::from_permutations(&[vec![0, 0, 1]], 10).unwrap_err();
        assert_eq!(err, GroupError::InvalidPermutation { index: 0 });
        let err = FiniteGroup::from_permutations(&[vec![1, 0], vec![0, 1, 2]], 10).unwrap_err();
        assert_eq!(err, GroupError::InvalidPermutation { index: 1 });
    }

    #[test]
    fn named_groups_have_expected_orders() {
        assert_eq!(FiniteGroup::cyclic(12).order(), 12);
        assert_eq!(FiniteGroup::symmetric_3().order(), 6);
        assert_eq!(FiniteGroup::dihedral(4).order(), 8);
        assert_eq!(FiniteGroup::dihedral(6).order(), 12);
        assert_eq!(FiniteGroup::alternating_4().order(), 12);
        assert_eq!(FiniteGroup::quaternion_8().order(), 8);
        assert_eq!(FiniteGroup::klein_four().order(), 4);
        assert!(!FiniteGroup::quaternion_8().is_abelian());
    }

    #[test]
    fn identity_map_is_valid_automorphism() {
        let g = FiniteGroup::symmetric_3();
        let m = GroupMap::validate(&g, &g, (0..6).collect()).unwrap();
        assert!(m.is_bijective());
        assert!(m.is_identity());
    }

    #[test]
    fn trivial_map_is_valid_endomorphism() {
        let g = FiniteGroup::symmetric_3();
        let m = GroupMap::validate(&g, &g, vec![0; 6]).unwrap();
        assert!(!m.is_bijective());
        assert_eq!(m, GroupMap::trivial(&g));
    }

    #[test]
    fn doubling_is_endo_of_c4_but_shift_is_not() {
        let g = FiniteGroup::cyclic(4);
        // element k is the k-th power of the 4-cycle, so x -> 2x doubles indices
        let doubling: Vec<usize> = (0..4).map(|x| (2 * x) % 4).collect();
        let m = GroupMap::validate(&g, &g, doubling).unwrap();
        assert!(!m.is_bijective());

        let shift: Vec<usize> = (0..4).map(|x| (x + 1) % 4).collect();
        let err = GroupMap::validate(&g, &g, shift).unwrap_err();
        assert!(matches!(err, GroupError::NotHomomorphism { .. }));
    }

    #[test]
    fn ordinary_conjugacy_classes_of_s3() {
        let g = FiniteGroup::symmetric_3();
        let id = GroupMap::identity(&g);
        let part = g.twisted_classes(&id, &id);
        assert_eq!(part.len(), 3);
        let sizes: Vec<usize> = part.classes.iter().map(Vec::len).collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3]);
        assert_eq!(g.reidemeister_number(&id, &id), 3);
    }

    #[test]
    fn trivial_twists_make_singletons() {
        let g = FiniteGroup::symmetric_3();
        let t = GroupMap::trivial(&g);
        let part = g.twisted_classes(&t, &t);
        assert_eq!(part.len(), g.order());
        assert!(part.classes.iter().all(|c| c.len() == 1));
        assert_eq!(g.reidemeister_number(&t, &t), 6);
    }

    #[test]
    fn mult_by_five_on_c12_gives_four_classes() {
        let g = FiniteGroup::cyclic(12);
        let phi = GroupMap::validate(&g, &g, (0..12).map(|x| (5 * x) % 12).collect()).unwrap();
        let id = GroupMap::identity(&g);
        // independent oracle: x ~ x + (1-5)g = x - 4g, so classes are cosets of 4Z/12Z
        let expected: Vec<Vec<usize>> = vec![
            vec![0, 4, 8],
            vec![1, 5, 9],
            vec![2, 6, 10],
            vec![3, 7, 11],
        ];
        let part = g.twisted_classes(&phi, &id);
        assert_eq!(part.classes, expected);
        assert_eq!(g.reidemeister_number(&phi, &id), 4);
    }

    #[test]
    fn witness_search_matches_partition() {
        let g = FiniteGroup::symmetric_3();
        let id = GroupMap::identity(&g);
        let t = GroupMap::trivial(&g);

        // reflexivity with identity witness
        for x in 0..g.order() {
            assert_eq!(g.is_twisted_conjugate(&id, &id, x, x), Some(0));
        }
        // trivial twists relate nothing distinct
        assert_eq!(g.is_twisted_conjugate(&t, &t, 1, 2), None);
        // a conjugate pair has the standard conjugator as least witness
        let part = g.twisted_classes(&id, &id);
        for x in 0..g.order() {
            for y in 0..g.order() {
                let witness = g.is_twisted_conjugate(&id, &id, x, y);
                assert_eq!(witness.is_some(), part.same_class(x, y));
                if let Some(w) = witness {
                    assert_eq!(g.mul(g.mul(w, x), g.inv(w)), y);
                }
            }
        }
    }

    #[test]
    fn inner_twist_preserves_class_count() {
        for g in [
            FiniteGroup::symmetric_3(),
            FiniteGroup::dihedral(4),
            FiniteGroup::quaternion_8(),
        ] {
            let id = GroupMap::identity(&g);
            let base = g.reidemeister_number(&id, &id);
            for a in 0..g.order() {
                let phi = GroupMap::inner(&g, a);
                assert_eq!(g.reidemeister_number(&phi, &id), base);
            }
        }
    }

    #[test]
    fn partition_law_over_all_endomorphism_pairs() {
        for g in [FiniteGroup::symmetric_3(), FiniteGroup::cyclic(6)] {
            let endos = g.endomorphisms();
            for phi in &endos {
                for psi in &endos {
                    let part = g.twisted_classes(phi, psi);
                    let mut covered = vec![false; g.order()];
                    for class in &part.classes {
                        for &x in class {
                            assert!(!covered[x], "classes overlap");
                            covered[x] = true;
                        }
                    }
                    assert!(covered.iter().all(|&c| c));
                    // membership agrees with direct witness search
                    for x in 0..g.order() {
                        for y in 0..g.order() {
                            assert_eq!(
                                g.is_twisted_conjugate(phi, psi, x, y).is_some(),
                                part.same_class(x, y)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partition_law_near_order_100() {
        use crate::abelian::{random_hom, FgAbelianGroup};
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(0x100);
        for shape in [vec![96u64], vec![2, 50], vec![10, 10]] {
            let group = FgAbelianGroup::from_u64(&shape, 0).unwrap();
            let realized = group.realize(200).unwrap();
            for _ in 0..20 {
                let phi = realized.realize_hom(&random_hom(&group, &mut rng, 5));
                let psi = realized.realize_hom(&random_hom(&group, &mut rng, 5));
                let part = realized.group.twisted_classes(&phi, &psi);
                let mut covered = vec![false; realized.group.order()];
                for class in &part.classes {
                    for &x in class {
                        assert!(!covered[x]);
                        covered[x] = true;
                    }
                }
                assert!(covered.iter().all(|&c| c));
                // symmetry and transitivity through witness agreement on samples
                for _ in 0..50 {
                    let x = rng.below(realized.group.order() as u64) as usize;
                    let y = rng.below(realized.group.order() as u64) as usize;
                    let forward = realized.group.is_twisted_conjugate(&phi, &psi, x, y);
                    let backward = realized.group.is_twisted_conjugate(&phi, &psi, y, x);
                    assert_eq!(forward.is_some(), backward.is_some());
                    assert_eq!(forward.is_some(), part.same_class(x, y));
                }
            }
        }
    }

    #[test]
    fn automorphism_group_sizes() {
        assert_eq!(FiniteGroup::symmetric_3().automorphisms().len(), 6);
        assert_eq!(FiniteGroup::cyclic(12).automorphisms().len(), 4);
        assert_eq!(FiniteGroup::dihedral(4).automorphisms().len(), 8);
        assert_eq!(FiniteGroup::quaternion_8().automorphisms().len(), 24);
        assert_eq!(FiniteGroup::alternating_4().automorphisms().len(), 24);
        assert_eq!(FiniteGroup::dihedral(6).automorphisms().len(), 12);
        assert_eq!(FiniteGroup::klein_four().automorphisms().len(), 6);
    }

    #[test]
    fn from_table_rejects_broken_tables() {
        // non-associative Latin square with identity: order-5 loop
        let table = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = FiniteGroup::from_table(&table).unwrap_err();
        assert!(matches!(
            err,
            GroupError::NotAssociative { .. } | GroupError::InvalidTable(_)
        ));

        let bad = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::from_table(&bad).is_err());
    }
}
