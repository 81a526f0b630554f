//! Smith normal form of integer matrices.
//!
//! For any integer matrix `A` there are unimodular `U`, `V` with
//! `U * A * V = D`, `D` diagonal with nonnegative entries and
//! `D[i] | D[i+1]`. The nonzero diagonal entries are the invariant factors;
//! their product is the index of the column lattice of `A` when `A` has
//! full row rank. All arithmetic is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::matrix::IntMat;

/// Decomposition `U * A * V = D` with `U`, `V` unimodular and `D` diagonal
/// satisfying the divisibility chain.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMat,
    pub v: IntMat,
    /// Diagonal entries, length `min(rows, cols)`, nonnegative,
    /// each dividing the next, zeros trailing.
    pub diag: Vec<BigInt>,
    rows: usize,
    cols: usize,
}

impl SmithForm {
    /// `D` as a full `rows x cols` matrix.
    pub fn diagonal_matrix(&self) -> IntMat {
        let mut d = IntMat::zero(self.rows, self.cols);
        for (i, x) in self.diag.iter().enumerate() {
            d[(i, i)] = x.clone();
        }
        d
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|x| !x.is_zero()).count()
    }

    /// Product of the nonzero diagonal entries (1 for the zero matrix).
    pub fn nonzero_diag_product(&self) -> BigInt {
        self.diag
            .iter()
            .filter(|x| !x.is_zero())
            .product::<BigInt>()
            .max(BigInt::from(1))
    }
}

/// Compute the Smith normal form of `a`.
pub fn smith_normal_form(a: &IntMat) -> SmithForm {
    let (m, n) = (a.rows(), a.cols());
    let mut work = a.clone();
    let mut u = IntMat::identity(m);
    let mut v = IntMat::identity(n);

    let steps = m.min(n);
    for t in 0..steps {
        if !place_pivot(&mut work, &mut u, &mut v, t) {
            break; // remaining block is zero
        }
        loop {
            clear_cross(&mut work, &mut u, &mut v, t);
            // the pivot must divide every entry of the trailing block,
            // otherwise d_t | d_{t+1} can fail later
            match first_nondivisible(&work, t) {
                Some(bad_row) => {
                    add_row(&mut work, &mut u, t, bad_row);
                }
                None => break,
            }
        }
        if work[(t, t)].is_negative() {
            negate_row(&mut work, &mut u, t);
        }
    }

    let diag = (0..steps).map(|i| work[(i, i)].clone()).collect();
    SmithForm {
        u,
        v,
        diag,
        rows: m,
        cols: n,
    }
}

/// Move a nonzero entry of minimal absolute value from the trailing block
/// to position `(t, t)`. Returns false if the block is all zero.
fn place_pivot(a: &mut IntMat, u: &mut IntMat, v: &mut IntMat, t: usize) -> bool {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = a[(i, j)].abs();
            if x.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _, _)| x < *b) {
                best = Some((x, i, j));
            }
        }
    }
    match best {
        None => false,
        Some((_, i, j)) => {
            if i != t {
                swap_rows(a, u, t, i);
            }
            if j != t {
                swap_cols(a, v, t, j);
            }
            true
        }
    }
}

/// Reduce row `t` and column `t` to zero outside the pivot.
///
/// Entries the pivot divides are cleared by an exact row or column
/// subtraction; the rest are absorbed with a unimodular 2x2 transform that
/// puts `gcd(pivot, entry)` on the pivot in one step. A gcd transform on
/// columns re-dirties column `t` below the pivot, but each such round
/// strictly shrinks the pivot to a proper divisor, so the loop terminates
/// quickly and entry growth stays tame.
fn clear_cross(a: &mut IntMat, u: &mut IntMat, v: &mut IntMat, t: usize) {
    loop {
        for i in t + 1..a.rows() {
            if a[(i, t)].is_zero() {
                continue;
            }
            if (&a[(i, t)] % &a[(t, t)]).is_zero() {
                let q = &a[(i, t)] / &a[(t, t)];
                row_sub(a, u, i, t, &q);
            } else {
                left_gcd_transform(a, u, t, i);
            }
        }
        for j in t + 1..a.cols() {
            if a[(t, j)].is_zero() {
                continue;
            }
            if (&a[(t, j)] % &a[(t, t)]).is_zero() {
                let q = &a[(t, j)] / &a[(t, t)];
                col_sub(a, v, j, t, &q);
            } else {
                right_gcd_transform(a, v, t, j);
            }
        }
        let col_clean = (t + 1..a.rows()).all(|i| a[(i, t)].is_zero());
        let row_clean = (t + 1..a.cols()).all(|j| a[(t, j)].is_zero());
        if col_clean && row_clean {
            return;
        }
    }
}

/// Bezout data for a unimodular 2x2 block: `g = s*p + w*x`, `alpha = p/g`,
/// `beta = x/g`, so `[s, w; -beta, alpha]` has determinant 1 and sends
/// `(p, x)` to `(g, 0)`.
fn bezout(p: &BigInt, x: &BigInt) -> (BigInt, BigInt, BigInt, BigInt, BigInt) {
    let ext = p.extended_gcd(x);
    let (mut g, mut s, mut w) = (ext.gcd, ext.x, ext.y);
    if g.is_negative() {
        g = -g;
        s = -s;
        w = -w;
    }
    let alpha = p / &g;
    let beta = x / &g;
    (g, s, w, alpha, beta)
}

/// Rows `(t, i)`: `row_t <- s*row_t + w*row_i`, `row_i <- -beta*row_t_old +
/// alpha*row_i`, landing `gcd` at `(t, t)` and zero at `(i, t)`.
fn left_gcd_transform(a: &mut IntMat, u: &mut IntMat, t: usize, i: usize) {
    let (_, s, w, alpha, beta) = bezout(&a[(t, t)].clone(), &a[(i, t)].clone());
    for m in [&mut *a, &mut *u] {
        for j in 0..m.cols() {
            let top = m[(t, j)].clone();
            let bot = m[(i, j)].clone();
            m[(t, j)] = &s * &top + &w * &bot;
            m[(i, j)] = &alpha * &bot - &beta * &top;
        }
    }
}

/// Columns `(t, j)`: the right-hand analogue of [`left_gcd_transform`].
fn right_gcd_transform(a: &mut IntMat, v: &mut IntMat, t: usize, j: usize) {
    let (_, s, w, alpha, beta) = bezout(&a[(t, t)].clone(), &a[(t, j)].clone());
    for m in [&mut *a, &mut *v] {
        for i in 0..m.rows() {
            let left = m[(i, t)].clone();
            let right = m[(i, j)].clone();
            m[(i, t)] = &s * &left + &w * &right;
            m[(i, j)] = &alpha * &right - &beta * &left;
        }
    }
}

/// First row in the trailing block containing an entry the pivot does not divide.
fn first_nondivisible(a: &IntMat, t: usize) -> Option<usize> {
    let p = a[(t, t)].clone();
    for i in t + 1..a.rows() {
        for j in t + 1..a.cols() {
            if !(&a[(i, j)] % &p).is_zero() {
                return Some(i);
            }
        }
    }
    None
}

fn swap_rows(a: &mut IntMat, u: &mut IntMat, r1: usize, r2: usize) {
    for j in 0..a.cols() {
        let tmp = a[(r1, j)].clone();
        a[(r1, j)] = a[(r2, j)].clone();
        a[(r2, j)] = tmp;
    }
    for j in 0..u.cols() {
        let tmp = u[(r1, j)].clone();
        u[(r1, j)] = u[(r2, j)].clone();
        u[(r2, j)] = tmp;
    }
}

fn swap_cols(a: &mut IntMat, v: &mut IntMat, c1: usize, c2: usize) {
    for i in 0..a.rows() {
        let tmp = a[(i, c1)].clone();
        a[(i, c1)] = a[(i, c2)].clone();
        a[(i, c2)] = tmp;
    }
    for i in 0..v.rows() {
        let tmp = v[(i, c1)].clone();
        v[(i, c1)] = v[(i, c2)].clone();
        v[(i, c2)] = tmp;
    }
}

/// `row r -= q * row s` on `a` and `u`.
fn row_sub(a: &mut IntMat, u: &mut IntMat, r: usize, s: usize, q: &BigInt) {
    for j in 0..a.cols() {
        let d = q * &a[(s, j)];
        a[(r, j)] -= d;
    }
    for j in 0..u.cols() {
        let d = q * &u[(s, j)];
        u[(r, j)] -= d;
    }
}

/// `col c -= q * col s` on `a` and `v`.
fn col_sub(a: &mut IntMat, v: &mut IntMat, c: usize, s: usize, q: &BigInt) {
    for i in 0..a.rows() {
        let d = q * &a[(i, s)];
        a[(i, c)] -= d;
    }
    for i in 0..v.rows() {
        let d = q * &v[(i, s)];
        v[(i, c)] -= d;
    }
}

/// `row t += row s` on `a` and `u`.
fn add_row(a: &mut IntMat, u: &mut IntMat, t: usize, s: usize) {
    for j in 0..a.cols() {
        let d = a[(s, j)].clone();
        a[(t, j)] += d;
    }
    for j in 0..u.cols() {
        let d = u[(s, j)].clone();
        u[(t, j)] += d;
    }
}

fn negate_row(a: &mut IntMat, u: &mut IntMat, t: usize) {
    for j in 0..a.cols() {
        let x = -a[(t, j)].clone();
        a[(t, j)] = x;
    }
    for j in 0..u.cols() {
        let x = -u[(t, j)].clone();
        u[(t, j)] = x;
    }
}

/// Panics unless `U * A * V = D`, `U`, `V` unimodular, and the diagonal is a
/// nonnegative divisibility chain. Exposed so integration suites can assert
/// the full contract on random inputs.
pub fn assert_smith_invariants(a: &IntMat, snf: &SmithForm) {
    assert!(snf.u.is_unimodular(), "U not unimodular");
    assert!(snf.v.is_unimodular(), "V not unimodular");
    let product = &(&snf.u * a) * &snf.v;
    assert_eq!(product, snf.diagonal_matrix(), "U*A*V != D");
    let mut seen_zero = false;
    for w in snf.diag.windows(2) {
        assert!(!w[0].is_negative() && !w[1].is_negative(), "negative diagonal");
        if w[0].is_zero() {
            seen_zero = true;
        }
        if seen_zero {
            assert!(w[1].is_zero(), "zero before nonzero on diagonal");
        } else if !w[1].is_zero() {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn diag_i64(snf: &SmithForm) -> Vec<i64> {
        snf.diag.iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn two_by_two() {
        let a = IntMat::from_rows(&[vec![2, 4], vec![6, 8]]);
        let snf = smith_normal_form(&a);
        assert_smith_invariants(&a, &snf);
        assert_eq!(diag_i64(&snf), vec![2, 4]);
    }

    #[test]
    fn identity_and_zero() {
        let id = IntMat::identity(3);
        let snf = smith_normal_form(&id);
        assert_smith_invariants(&id, &snf);
        assert_eq!(diag_i64(&snf), vec![1, 1, 1]);

        let z = IntMat::zero(2, 3);
        let snf = smith_normal_form(&z);
        assert_smith_invariants(&z, &snf);
        assert_eq!(diag_i64(&snf), vec![0, 0]);
        assert_eq!(snf.rank(), 0);
        assert_eq!(snf.nonzero_diag_product(), BigInt::from(1));
    }

    #[test]
    fn empty_matrices() {
        for (r, c) in [(0, 0), (0, 3), (3, 0)] {
            let a = IntMat::zero(r, c);
            let snf = smith_normal_form(&a);
            assert_smith_invariants(&a, &snf);
            assert!(snf.diag.is_empty());
        }
    }

    #[test]
    fn rectangular_and_rank_deficient() {
        let a = IntMat::from_rows(&[vec![2, 4, 6], vec![4, 8, 12]]);
        let snf = smith_normal_form(&a);
        assert_smith_invariants(&a, &snf);
        assert_eq!(snf.rank(), 1);
        assert_eq!(snf.diag[0], BigInt::from(2));
    }

    #[test]
    fn known_invariant_factors() {
        // diag(2,6,12) has invariant factors 2, 6, 12 already
        let a = IntMat::from_rows(&[vec![2, 0, 0], vec![0, 6, 0], vec![0, 0, 12]]);
        let snf = smith_normal_form(&a);
        assert_eq!(diag_i64(&snf), vec![2, 6, 12]);
        // permuted diagonal must renormalize
        let a = IntMat::from_rows(&[vec![12, 0, 0], vec![0, 2, 0], vec![0, 0, 6]]);
        let snf = smith_normal_form(&a);
        assert_smith_invariants(&a, &snf);
        assert_eq!(diag_i64(&snf), vec![2, 6, 12]);
    }

    #[test]
    fn random_matrices_full_contract() {
        let mut rng = SplitMix64::new(0x5eed_5eed);
        for _ in 0..200 {
            let m = 1 + rng.below(6) as usize;
            let n = 1 + rng.below(6) as usize;
            let rows: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.int_in(-50, 50)).collect())
                .collect();
            let a = IntMat::from_rows(&rows);
            let snf = smith_normal_form(&a);
            assert_smith_invariants(&a, &snf);
        }
    }
}
