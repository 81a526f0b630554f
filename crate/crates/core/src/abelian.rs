//! Finitely generated abelian groups and their twisted conjugacy data.
//!
//! A group is presented by invariant factors `d_1 | d_2 | ... | d_k` plus a
//! free rank `r`; endomorphisms are square integer matrices acting on
//! column vectors. For abelian groups the twisted class of 0 is the
//! subgroup `H = Im(psi - phi)` and every class is a coset of it, so the
//! Reidemeister number is the index `[G : H]`, computed exactly as a
//! lattice index via Smith normal form. The dual group provides a second,
//! independent count: the coincidences of the induced maps on characters.
//! Both are cross-checked against brute-force orbit enumeration on the
//! realized finite group.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

use crate::fingroup::{FiniteGroup, GroupMap};
use crate::matrix::IntMat;
use crate::rng::SplitMix64;
use crate::snf::smith_normal_form;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum AbelianError {
    #[error("invalid invariant factors: {0}")]
    InvalidInvariants(String),

    #[error("matrix entry ({row}, {col}) does not define a homomorphism on the torsion part")]
    NotWellDefined { row: usize, col: usize },

    #[error("matrix is {got_rows}x{got_cols}, expected square of size {expected}")]
    DimensionMismatch {
        got_rows: usize,
        got_cols: usize,
        expected: usize,
    },

    #[error("the dual of a group of positive rank is not discrete")]
    InfiniteDual,

    #[error("group is infinite; operation requires a finite group")]
    NotFinite,

    #[error("group order {order} exceeds the realization cap {cap}")]
    RealizeTooLarge { order: BigInt, cap: usize },
}

/// `Z_{d_1} + ... + Z_{d_k} + Z^r` with `d_1 | d_2 | ... | d_k`, all
/// `d_i >= 2` after construction (factors equal to 1 are stripped).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgAbelianGroup {
    torsion: Vec<BigInt>,
    rank: usize,
}

impl FgAbelianGroup {
    pub fn new(torsion: Vec<BigInt>, rank: usize) -> Result<Self, AbelianError> {
        let torsion: Vec<BigInt> = torsion.into_iter().filter(|d| !d.is_one()).collect();
        for d in &torsion {
            if *d < BigInt::from(2) {
                return Err(AbelianError::InvalidInvariants(format!(
                    "factor {d} is not a positive integer >= 2"
                )));
            }
        }
        for w in torsion.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Err(AbelianError::InvalidInvariants(format!(
                    "{} does not divide {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(FgAbelianGroup { torsion, rank })
    }

    pub fn from_u64(torsion: &[u64], rank: usize) -> Result<Self, AbelianError> {
        Self::new(torsion.iter().map(|&d| BigInt::from(d)).collect(), rank)
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_u64(&[n], 0).unwrap()
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianGroup {
            torsion: Vec::new(),
            rank,
        }
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Total coordinate count `k + r`.
    pub fn dim(&self) -> usize {
        self.torsion.len() + self.rank
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.torsion.iter().product::<BigInt>().max(BigInt::one()))
    }

    /// Reduce a coordinate vector: torsion coordinates into `[0, d_i)`.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim());
        v.iter()
            .enumerate()
            .map(|(i, x)| match self.torsion.get(i) {
                Some(d) => x.mod_floor(d),
                None => x.clone(),
            })
            .collect()
    }

    /// The diagonal relation matrix `diag(d_1..d_k, 0..0)`, size `dim x dim`.
    pub fn relation_matrix(&self) -> IntMat {
        let n = self.dim();
        let mut m = IntMat::zero(n, n);
        for (i, d) in self.torsion.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    /// Realize a finite group as a concrete multiplication table; element
    /// indices are mixed-radix encodings of coordinate vectors, identity 0.
    pub fn realize(&self, cap: usize) -> Result<RealizedAbelian, AbelianError> {
        if !self.is_finite() {
            return Err(AbelianError::NotFinite);
        }
        let order_big = self.order().unwrap();
        let order = order_big
            .to_usize()
            .filter(|&n| n <= cap)
            .ok_or(AbelianError::RealizeTooLarge {
                order: order_big,
                cap,
            })?;
        let radices: Vec<usize> = self
            .torsion
            .iter()
            .map(|d| d.to_usize().expect("factor fits after order check"))
            .collect();
        let k = radices.len();
        let decode = |mut idx: usize| -> Vec<usize> {
            let mut v = vec![0usize; k];
            for (i, &d) in radices.iter().enumerate() {
                v[i] = idx % d;
                idx /= d;
            }
            v
        };
        let encode = |v: &[usize]| -> usize {
            let mut idx = 0;
            for i in (0..k).rev() {
                idx = idx * radices[i] + v[i];
            }
            idx
        };
        let mut table = vec![vec![0usize; order]; order];
        for x in 0..order {
            let xv = decode(x);
            for y in 0..order {
                let yv = decode(y);
                let sum: Vec<usize> = (0..k).map(|i| (xv[i] + yv[i]) % radices[i]).collect();
                table[x][y] = encode(&sum);
            }
        }
        let group = FiniteGroup::from_table_trusted(&table).expect("componentwise sum table");
        Ok(RealizedAbelian {
            shape: self.clone(),
            radices,
            group,
        })
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "abelian invariants=[")?;
        for (i, d) in self.torsion.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "] rank={}", self.rank)
    }
}

/// A finite abelian group realized as a [`FiniteGroup`] table.
pub struct RealizedAbelian {
    shape: FgAbelianGroup,
    radices: Vec<usize>,
    pub group: FiniteGroup,
}

impl RealizedAbelian {
    pub fn encode(&self, v: &[usize]) -> usize {
        let mut idx = 0;
        for i in (0..self.radices.len()).rev() {
            idx = idx * self.radices[i] + v[i] % self.radices[i];
        }
        idx
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut v = vec![0usize; self.radices.len()];
        for (i, &d) in self.radices.iter().enumerate() {
            v[i] = idx % d;
            idx /= d;
        }
        v
    }

    /// Realize an endomorphism as a validated index map.
    pub fn realize_hom(&self, hom: &AbelianHom) -> GroupMap {
        assert_eq!(hom.group, self.shape, "endomorphism of a different group");
        let k = self.radices.len();
        // reduce the matrix mod the row modulus once, then work in u128
        let reduced: Vec<Vec<u128>> = (0..k)
            .map(|i| {
                let d = BigInt::from(self.radices[i]);
                (0..k)
                    .map(|j| hom.matrix[(i, j)].mod_floor(&d).to_u128().unwrap())
                    .collect()
            })
            .collect();
        let image: Vec<usize> = (0..self.group.order())
            .map(|idx| {
                let x = self.decode(idx);
                let y: Vec<usize> = (0..k)
                    .map(|i| {
                        let mut acc: u128 = 0;
                        for j in 0..k {
                            acc += reduced[i][j] * x[j] as u128;
                        }
                        (acc % self.radices[i] as u128) as usize
                    })
                    .collect();
                self.encode(&y)
            })
            .collect();
        GroupMap::validate(&self.group, &self.group, image).expect("well-defined hom realizes")
    }
}

/// An endomorphism of an [`FgAbelianGroup`], as a `dim x dim` integer matrix
/// acting on column vectors. Well-definedness on the torsion part is checked
/// on construction: `d_i | d_j * M[i][j]` for torsion rows and columns, and
/// torsion columns must be zero in free rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianHom {
    pub group: FgAbelianGroup,
    pub matrix: IntMat,
}

impl AbelianHom {
    pub fn new(group: FgAbelianGroup, matrix: IntMat) -> Result<Self, AbelianError> {
        let n = group.dim();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(AbelianError::DimensionMismatch {
                got_rows: matrix.rows(),
                got_cols: matrix.cols(),
                expected: n,
            });
        }
        let k = group.torsion.len();
        for j in 0..k {
            let dj = &group.torsion[j];
            for i in 0..k {
                let di = &group.torsion[i];
                if !(dj * &matrix[(i, j)] % di).is_zero() {
                    return Err(AbelianError::NotWellDefined { row: i, col: j });
                }
            }
            for i in k..n {
                if !matrix[(i, j)].is_zero() {
                    return Err(AbelianError::NotWellDefined { row: i, col: j });
                }
            }
        }
        Ok(AbelianHom { group, matrix })
    }

    pub fn identity(group: &FgAbelianGroup) -> Self {
        AbelianHom {
            group: group.clone(),
            matrix: IntMat::identity(group.dim()),
        }
    }

    pub fn zero(group: &FgAbelianGroup) -> Self {
        AbelianHom {
            group: group.clone(),
            matrix: IntMat::zero(group.dim(), group.dim()),
        }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.group.reduce(&self.matrix.apply(v))
    }
}

/// Generators of the twisted class of 0: the columns of `psi - phi`.
/// Every other class is a coset of the subgroup they generate.
pub fn twisted_class_subgroup(phi: &AbelianHom, psi: &AbelianHom) -> Vec<Vec<BigInt>> {
    assert_eq!(phi.group, psi.group);
    let diff = &psi.matrix - &phi.matrix;
    (0..diff.cols()).map(|j| diff.column(j)).collect()
}

/// A Reidemeister number: finite count or certified infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReidemeisterCount {
    Finite(BigInt),
    Infinite,
}

impl fmt::Display for ReidemeisterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReidemeisterCount::Finite(n) => write!(f, "{n}"),
            ReidemeisterCount::Infinite => write!(f, "INFINITE"),
        }
    }
}

/// `R(phi, psi) = [G : Im(psi - phi)]`, computed as the index of the lattice
/// spanned by the columns of `psi - phi` together with the relation columns
/// `diag(d_1..d_k, 0..0)`. The index is the product of the nonzero Smith
/// diagonal entries when the diagonal has full rank, otherwise infinite.
pub fn reidemeister_abelian(phi: &AbelianHom, psi: &AbelianHom) -> ReidemeisterCount {
    assert_eq!(phi.group, psi.group);
    let diff = &psi.matrix - &phi.matrix;
    let stacked = diff.hstack(&phi.group.relation_matrix());
    let snf = smith_normal_form(&stacked);
    if snf.rank() == phi.group.dim() {
        ReidemeisterCount::Finite(snf.nonzero_diag_product())
    } else {
        ReidemeisterCount::Infinite
    }
}

/// The dual of a finite abelian group has the same invariant factors.
pub fn dual_group(group: &FgAbelianGroup) -> Result<FgAbelianGroup, AbelianError> {
    if !group.is_finite() {
        return Err(AbelianError::InfiniteDual);
    }
    Ok(group.clone())
}

/// A character of a finite `G`: the vector `y` represents
/// `x -> exp(2 pi i * sum_i x_i y_i / d_i)`, coordinates reduced mod `d_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCharacter {
    pub y: Vec<BigInt>,
}

/// All characters of a finite group, in mixed-radix order of their vectors.
pub fn dual_characters(group: &FgAbelianGroup) -> Result<Vec<DualCharacter>, AbelianError> {
    if !group.is_finite() {
        return Err(AbelianError::InfiniteDual);
    }
    let mut out = vec![Vec::new()];
    for d in &group.torsion {
        let d = d.to_u64().ok_or(AbelianError::RealizeTooLarge {
            order: d.clone(),
            cap: usize::MAX,
        })?;
        let mut next = Vec::with_capacity(out.len() * d as usize);
        for prefix in &out {
            for value in 0..d {
                let mut y: Vec<BigInt> = prefix.clone();
                y.push(BigInt::from(value));
                next.push(y);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(|y| DualCharacter { y }).collect())
}

/// The exact phase `sum_i x_i y_i / d_i mod 1` as a reduced fraction
/// `(num, den)` with `0 <= num < den`. Characters are equal iff their phases
/// agree on all arguments, so no floating point is ever needed.
pub fn character_phase(group: &FgAbelianGroup, y: &[BigInt], x: &[BigInt]) -> (BigInt, BigInt) {
    assert!(group.is_finite());
    let k = group.torsion.len();
    assert_eq!(y.len(), k);
    assert_eq!(x.len(), k);
    let den = group
        .torsion
        .iter()
        .fold(BigInt::one(), |acc, d| acc.lcm(d));
    let mut num = BigInt::zero();
    for i in 0..k {
        num += &x[i] * &y[i] * (&den / &group.torsion[i]);
    }
    num = num.mod_floor(&den);
    let g = num.gcd(&den);
    (&num / &g, &den / &g)
}

/// The induced map on the dual: the weighted transpose
/// `(phi^ y)_j = sum_i M[i][j] * (d_j / d_i) * y_i`, which satisfies
/// `chi_{phi^ y}(x) = chi_y(phi x)` exactly. Requires a finite group.
pub fn induced_dual_map(phi: &AbelianHom) -> Result<AbelianHom, AbelianError> {
    let group = &phi.group;
    if !group.is_finite() {
        return Err(AbelianError::InfiniteDual);
    }
    let k = group.torsion.len();
    let mut m = IntMat::zero(k, k);
    for j in 0..k {
        for i in 0..k {
            // integral because d_i | d_j * M[i][j]
            let scaled = &phi.matrix[(i, j)] * &group.torsion[j] / &group.torsion[i];
            m[(j, i)] = scaled;
        }
    }
    AbelianHom::new(dual_group(group)?, m)
}

/// `#Coin(phi^, psi^)`: the number of characters on which the induced dual
/// maps agree, i.e. the kernel order of `phi^ - psi^` on the dual. Equals
/// the index of the lattice spanned by the difference matrix and the
/// relation columns.
pub fn dual_coincidence_count(phi: &AbelianHom, psi: &AbelianHom) -> Result<BigInt, AbelianError> {
    assert_eq!(phi.group, psi.group);
    let phi_hat = induced_dual_map(phi)?;
    let psi_hat = induced_dual_map(psi)?;
    let diff = &phi_hat.matrix - &psi_hat.matrix;
    let stacked = diff.hstack(&phi_hat.group.relation_matrix());
    let snf = smith_normal_form(&stacked);
    debug_assert_eq!(snf.rank(), phi_hat.group.dim());
    Ok(snf.nonzero_diag_product())
}

/// Three independent computations of `R(phi, psi)` on a finite abelian group
/// and whether they agree. A mismatch is a report outcome, not an error.
#[derive(Clone, Debug)]
pub struct BfAbelianReport {
    pub group: String,
    pub orbit_count: BigInt,
    pub snf_index: ReidemeisterCount,
    pub dual_count: BigInt,
    pub pass: bool,
}

impl fmt::Display for BfAbelianReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "verify-bf [{}]: orbit={} snf-index={} dual-coincidences={} -> {}",
            self.group,
            self.orbit_count,
            self.snf_index,
            self.dual_count,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Check `R(phi, psi) = #Coin(phi^, psi^)` three ways on a finite group:
/// brute-force orbit count on the realized table, lattice index, and dual
/// kernel count.
pub fn verify_bitwisted_bf(
    phi: &AbelianHom,
    psi: &AbelianHom,
    cap: usize,
) -> Result<BfAbelianReport, AbelianError> {
    assert_eq!(phi.group, psi.group);
    let realized = phi.group.realize(cap)?;
    let phi_map = realized.realize_hom(phi);
    let psi_map = realized.realize_hom(psi);
    let orbit_count = BigInt::from(realized.group.reidemeister_number(&phi_map, &psi_map));
    let snf_index = reidemeister_abelian(phi, psi);
    let dual_count = dual_coincidence_count(phi, psi)?;
    let pass = snf_index == ReidemeisterCount::Finite(orbit_count.clone()) && orbit_count == dual_count;
    Ok(BfAbelianReport {
        group: phi.group.to_string(),
        orbit_count,
        snf_index,
        dual_count,
        pass,
    })
}

/// All invariant-factor shapes `d_1 | d_2 | ... | d_k` (each `>= 2`) with
/// product exactly `n`. The trivial group is the empty shape of order 1.
pub fn invariant_factor_shapes(n: u64) -> Vec<Vec<u64>> {
    fn descend(m: u64, cap: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if m == 1 {
            let mut shape = acc.clone();
            shape.reverse();
            out.push(shape);
            return;
        }
        // choose the largest remaining factor d: it must divide both the
        // remaining product and the factor chosen above it
        for d in 2..=m.min(cap) {
            if m.is_multiple_of(d) && cap.is_multiple_of(d) {
                acc.push(d);
                descend(m / d, d, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(Vec::new());
        return out;
    }
    // top call: no divisibility constraint above, encode as cap = m
    let mut acc = Vec::new();
    fn descend_top(m: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        for d in 2..=m {
            if m.is_multiple_of(d) {
                acc.push(d);
                descend(m / d, d, acc, out);
                acc.pop();
            }
        }
    }
    descend_top(n, &mut acc, &mut out);
    out
}

/// A random well-defined endomorphism with entries of modest size, for
/// randomized sweeps. Entry `(i, j)` in the torsion block is a multiple of
/// `d_i / gcd(d_i, d_j)`, which is exactly the well-definedness condition.
pub fn random_hom(group: &FgAbelianGroup, rng: &mut SplitMix64, amplitude: i64) -> AbelianHom {
    let n = group.dim();
    let k = group.torsion.len();
    let mut m = IntMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let r = BigInt::from(rng.int_in(-amplitude, amplitude));
            m[(i, j)] = if i < k && j < k {
                let di = &group.torsion[i];
                let dj = &group.torsion[j];
                let step = di / di.gcd(dj);
                step * r
            } else if i >= k && j < k {
                BigInt::zero()
            } else {
                r
            };
        }
    }
    AbelianHom::new(group.clone(), m).expect("constructed entries are well-defined")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn z(n: u64) -> FgAbelianGroup {
        FgAbelianGroup::cyclic(n)
    }

    fn hom(g: &FgAbelianGroup, rows: &[Vec<i64>]) -> AbelianHom {
        AbelianHom::new(g.clone(), IntMat::from_rows(rows)).unwrap()
    }

    #[test]
    fn construction_normalizes_and_validates() {
        let g = FgAbelianGroup::new(vec![BigInt::one(), BigInt::from(2), BigInt::from(4)], 1)
            .unwrap();
        assert_eq!(g.torsion(), &[BigInt::from(2), BigInt::from(4)]);
        assert_eq!(g.rank(), 1);
        assert!(FgAbelianGroup::from_u64(&[2, 3], 0).is_err());
        assert!(FgAbelianGroup::from_u64(&[0], 0).is_err());
        assert_eq!(z(12).order(), Some(BigInt::from(12)));
        assert_eq!(FgAbelianGroup::free(2).order(), None);
    }

    #[test]
    fn hom_well_definedness() {
        let g = FgAbelianGroup::from_u64(&[2, 4], 0).unwrap();
        // (i=0, j=1): need 2 | 4 * m, always true; (i=1, j=0): need 4 | 2 * m, so m even
        assert!(AbelianHom::new(g.clone(), IntMat::from_rows(&[vec![0, 1], vec![1, 0]])).is_err());
        assert!(AbelianHom::new(g.clone(), IntMat::from_rows(&[vec![0, 1], vec![2, 0]])).is_ok());
        // torsion cannot map into the free part
        let h = FgAbelianGroup::from_u64(&[2], 1).unwrap();
        assert!(AbelianHom::new(h.clone(), IntMat::from_rows(&[vec![1, 0], vec![1, 0]])).is_err());
        assert!(AbelianHom::new(h, IntMat::from_rows(&[vec![1, 0], vec![0, 1]])).is_ok());
    }

    #[test]
    fn class_subgroup_of_z12() {
        let g = z(12);
        let phi = hom(&g, &[vec![5]]);
        let psi = AbelianHom::identity(&g);
        let gens = twisted_class_subgroup(&phi, &psi);
        assert_eq!(gens, vec![vec![BigInt::from(-4)]]);
        // the subgroup generated by -4 in Z_12 is {0, 4, 8}
        let mut subgroup: Vec<BigInt> = Vec::new();
        let mut x = BigInt::zero();
        loop {
            x = g.reduce(&[x + &gens[0][0]])[0].clone();
            if subgroup.contains(&x) {
                break;
            }
            subgroup.push(x.clone());
        }
        subgroup.sort();
        assert_eq!(subgroup, vec![BigInt::from(0), BigInt::from(4), BigInt::from(8)]);
    }

    #[test]
    fn class_subgroup_edge_cases() {
        let g = z(12);
        let phi = hom(&g, &[vec![5]]);
        assert_eq!(twisted_class_subgroup(&phi, &phi), vec![vec![BigInt::zero()]]);

        let free = FgAbelianGroup::free(2);
        let swap = hom(&free, &[vec![0, 1], vec![1, 0]]);
        let id = AbelianHom::identity(&free);
        let gens = twisted_class_subgroup(&swap, &id);
        assert_eq!(
            gens,
            vec![
                vec![BigInt::from(1), BigInt::from(-1)],
                vec![BigInt::from(-1), BigInt::from(1)]
            ]
        );
    }

    #[test]
    fn reidemeister_examples() {
        let g = z(12);
        assert_eq!(
            reidemeister_abelian(&hom(&g, &[vec![5]]), &AbelianHom::identity(&g)),
            ReidemeisterCount::Finite(BigInt::from(4))
        );

        let g5 = z(5);
        assert_eq!(
            reidemeister_abelian(&hom(&g5, &[vec![2]]), &hom(&g5, &[vec![3]])),
            ReidemeisterCount::Finite(BigInt::one())
        );

        let free = FgAbelianGroup::free(2);
        let hyperbolic = hom(&free, &[vec![2, 1], vec![1, 1]]);
        assert_eq!(
            reidemeister_abelian(&hyperbolic, &AbelianHom::identity(&free)),
            ReidemeisterCount::Finite(BigInt::one())
        );
        // swap - id has rank 1, so the count is infinite
        let swap = hom(&free, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(
            reidemeister_abelian(&swap, &AbelianHom::identity(&free)),
            ReidemeisterCount::Infinite
        );

        let v4 = FgAbelianGroup::from_u64(&[2, 2], 0).unwrap();
        let swap2 = hom(&v4, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(
            reidemeister_abelian(&swap2, &AbelianHom::identity(&v4)),
            ReidemeisterCount::Finite(BigInt::from(2))
        );
    }

    #[test]
    fn free_rank_count_matches_determinant() {
        // on Z^r the index of Im(psi - phi) is |det(psi - phi)| when
        // nonzero, an independent route to the same number
        let mut rng = SplitMix64::new(0xdead);
        for rank in 1..=3usize {
            let free = FgAbelianGroup::free(rank);
            for _ in 0..50 {
                let phi = random_hom(&free, &mut rng, 5);
                let psi = random_hom(&free, &mut rng, 5);
                let det = (&psi.matrix - &phi.matrix).det();
                let expected = if det.is_zero() {
                    ReidemeisterCount::Infinite
                } else {
                    ReidemeisterCount::Finite(det.abs())
                };
                assert_eq!(reidemeister_abelian(&phi, &psi), expected);
            }
        }
    }

    #[test]
    fn dual_group_shapes() {
        assert_eq!(dual_group(&z(12)).unwrap(), z(12));
        let v4 = FgAbelianGroup::from_u64(&[2, 2], 0).unwrap();
        assert_eq!(dual_group(&v4).unwrap(), v4);
        let g = FgAbelianGroup::from_u64(&[2, 4], 0).unwrap();
        assert_eq!(dual_group(&g).unwrap(), g);
        assert_eq!(
            dual_group(&FgAbelianGroup::free(1)).unwrap_err(),
            AbelianError::InfiniteDual
        );
    }

    #[test]
    fn induced_dual_map_examples() {
        let g = z(12);
        let id = AbelianHom::identity(&g);
        assert_eq!(induced_dual_map(&id).unwrap().matrix, IntMat::identity(1));
        let phi = hom(&g, &[vec![5]]);
        assert_eq!(
            induced_dual_map(&phi).unwrap().matrix,
            IntMat::from_rows(&[vec![5]])
        );
        let v4 = FgAbelianGroup::from_u64(&[2, 2], 0).unwrap();
        let swap = hom(&v4, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(
            induced_dual_map(&swap).unwrap().matrix,
            IntMat::from_rows(&[vec![0, 1], vec![1, 0]])
        );
    }

    #[test]
    fn duality_law_exact() {
        // chi_{phi^ y}(x) = chi_y(phi x) for all x, y, as exact fractions
        for group in [
            z(12),
            FgAbelianGroup::from_u64(&[2, 4], 0).unwrap(),
            FgAbelianGroup::from_u64(&[2, 2], 0).unwrap(),
            FgAbelianGroup::from_u64(&[3, 6], 0).unwrap(),
        ] {
            let mut rng = SplitMix64::new(0xd0a1);
            for _ in 0..5 {
                let phi = random_hom(&group, &mut rng, 4);
                let phi_hat = induced_dual_map(&phi).unwrap();
                let elements = enumerate(&group);
                for character in dual_characters(&group).unwrap() {
                    let fy = phi_hat.apply(&character.y);
                    for x in &elements {
                        let fx = phi.apply(x);
                        assert_eq!(
                            character_phase(&group, &fy, x),
                            character_phase(&group, &character.y, &fx),
                            "duality law failed"
                        );
                    }
                }
            }
        }
    }

    fn enumerate(g: &FgAbelianGroup) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![]];
        for d in g.torsion() {
            let d = d.to_u64().unwrap();
            let mut next = Vec::new();
            for prefix in &out {
                for x in 0..d {
                    let mut v = prefix.clone();
                    v.push(BigInt::from(x));
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn dual_coincidence_examples() {
        let g = z(12);
        let phi = hom(&g, &[vec![5]]);
        let id = AbelianHom::identity(&g);
        // kernel of multiplication by 4 on Z_12 is {0, 3, 6, 9}
        assert_eq!(dual_coincidence_count(&phi, &id).unwrap(), BigInt::from(4));
        assert_eq!(dual_coincidence_count(&phi, &phi).unwrap(), BigInt::from(12));
        let v4 = FgAbelianGroup::from_u64(&[2, 2], 0).unwrap();
        let swap = hom(&v4, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(
            dual_coincidence_count(&swap, &AbelianHom::identity(&v4)).unwrap(),
            BigInt::from(2)
        );
    }

    #[test]
    fn dual_kernel_matches_enumeration() {
        // independent oracle: count kernel elements of phi^ - psi^ directly
        let group = FgAbelianGroup::from_u64(&[2, 4], 0).unwrap();
        let mut rng = SplitMix64::new(0xeeee);
        for _ in 0..20 {
            let phi = random_hom(&group, &mut rng, 5);
            let psi = random_hom(&group, &mut rng, 5);
            let phi_hat = induced_dual_map(&phi).unwrap();
            let psi_hat = induced_dual_map(&psi).unwrap();
            let count = enumerate(&group)
                .iter()
                .filter(|y| phi_hat.apply(y) == psi_hat.apply(y))
                .count();
            assert_eq!(
                dual_coincidence_count(&phi, &psi).unwrap(),
                BigInt::from(count)
            );
        }
    }

    #[test]
    fn verify_bf_z12() {
        let g = z(12);
        let phi = hom(&g, &[vec![5]]);
        let psi = AbelianHom::identity(&g);
        let report = verify_bitwisted_bf(&phi, &psi, 20000).unwrap();
        assert!(report.pass, "{report}");
        assert_eq!(report.orbit_count, BigInt::from(4));
    }

    #[test]
    fn verify_bf_equal_maps_gives_order() {
        for shape in [vec![12], vec![2, 4], vec![3, 3]] {
            let g = FgAbelianGroup::from_u64(&shape, 0).unwrap();
            let mut rng = SplitMix64::new(0xabcd);
            let phi = random_hom(&g, &mut rng, 3);
            let report = verify_bitwisted_bf(&phi, &phi, 20000).unwrap();
            assert!(report.pass, "{report}");
            assert_eq!(Some(report.orbit_count), g.order());
        }
    }

    #[test]
    fn coset_structure_on_small_groups() {
        // every twisted class equals rep + H elementwise
        let g = FgAbelianGroup::from_u64(&[2, 4], 0).unwrap();
        let mut rng = SplitMix64::new(0x10c0);
        for _ in 0..10 {
            let phi = random_hom(&g, &mut rng, 4);
            let psi = random_hom(&g, &mut rng, 4);
            let realized = g.realize(1000).unwrap();
            let part = realized
                .group
                .twisted_classes(&realized.realize_hom(&phi), &realized.realize_hom(&psi));
            // the class of 0 as a set of vectors
            let h_class: Vec<Vec<usize>> =
                part.classes[0].iter().map(|&i| realized.decode(i)).collect();
            for class in &part.classes {
                let rep = realized.decode(class[0]);
                let mut shifted: Vec<usize> = h_class
                    .iter()
                    .map(|h| {
                        let sum: Vec<usize> = rep
                            .iter()
                            .zip(h)
                            .zip(realized.radices.iter())
                            .map(|((a, b), &d)| (a + b) % d)
                            .collect();
                        realized.encode(&sum)
                    })
                    .collect();
                shifted.sort_unstable();
                assert_eq!(&shifted, class);
            }
        }
    }

    #[test]
    fn shape_enumeration() {
        assert_eq!(invariant_factor_shapes(1), vec![Vec::<u64>::new()]);
        assert_eq!(invariant_factor_shapes(12), vec![vec![2, 6], vec![12]]);
        let shapes8 = invariant_factor_shapes(8);
        assert_eq!(shapes8, vec![vec![2, 2, 2], vec![2, 4], vec![8]]);
        // p(6) = 11 shapes for 64 = 2^6
        assert_eq!(invariant_factor_shapes(64).len(), 11);
        for shape in invariant_factor_shapes(36) {
            assert_eq!(shape.iter().product::<u64>(), 36);
            assert!(FgAbelianGroup::from_u64(&shape, 0).is_ok());
        }
    }

    #[test]
    fn trivial_group_counts() {
        let g = FgAbelianGroup::from_u64(&[], 0).unwrap();
        let phi = AbelianHom::identity(&g);
        assert_eq!(
            reidemeister_abelian(&phi, &phi),
            ReidemeisterCount::Finite(BigInt::one())
        );
        let report = verify_bitwisted_bf(&phi, &phi, 10).unwrap();
        assert!(report.pass);
        assert_eq!(report.orbit_count, BigInt::one());
    }
}
