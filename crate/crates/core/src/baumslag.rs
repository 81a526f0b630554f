//! Exact arithmetic in `B(1,n) = <a, b | a^-1 b a = b^n>`, `n >= 2`.
//!
//! The group embeds in `Z[1/n] x| Z` via `a -> (0, 1)`, `b -> (1, 0)`,
//! where the generator of `Z` acts by division by `n`. Multiplication is
//! `(x, r) * (y, s) = (x + y / n^r, r + s)`, all arithmetic exact on
//! `n`-adic fractions. The `t`-component of an element equals the
//! `a`-exponent sum of any word representing it, which is the invariant
//! behind the infinitude certificates: endomorphism pairs whose induced
//! degree on the quotient `Z` is 1 on both sides preserve it under every
//! twisted move, and the elements `a^m` then witness infinitely many
//! classes.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum BsError {
    #[error("elements have different bases: {0} vs {1}")]
    BaseMismatch(u64, u64),

    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),

    #[error("the defining relation is not preserved: phi(a)^-1 phi(b) phi(a) = {got}, expected {expected}")]
    RelationViolated { got: String, expected: String },

    #[error("image of b has nonzero a-exponent {0}, so it is not in the kernel")]
    ImageOfBNotInKernel(BigInt),

    #[error("{side} endomorphism sends b to the identity (d = 0); the degree-1 invariant does not apply")]
    NotInjectiveAdmissible { side: &'static str },

    #[error("denominator {0} is not a power of the base {1}")]
    NotAPowerOfBase(BigInt, u64),
}

/// An element of `Z[1/n]`: `num / n^exp`, normalized so that either
/// `exp = 0` or `n` does not divide `num` (and `0` has `exp = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZOneOverN {
    base: u64,
    num: BigInt,
    exp: u64,
}

impl ZOneOverN {
    pub fn new(base: u64, num: BigInt, exp: u64) -> Self {
        assert!(base >= 2, "base must be at least 2");
        let mut value = ZOneOverN { base, num, exp };
        value.normalize();
        value
    }

    pub fn zero(base: u64) -> Self {
        ZOneOverN::new(base, BigInt::zero(), 0)
    }

    pub fn integer(base: u64, value: impl Into<BigInt>) -> Self {
        ZOneOverN::new(base, value.into(), 0)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let n = BigInt::from(self.base);
        while self.exp > 0 && (&self.num % &n).is_zero() {
            self.num /= &n;
            self.exp -= 1;
        }
    }

    fn base_pow(&self, e: u64) -> BigInt {
        BigInt::from(self.base).pow(e as u32)
    }

    pub fn add(&self, other: &ZOneOverN) -> ZOneOverN {
        assert_eq!(self.base, other.base, "base mismatch");
        let e = self.exp.max(other.exp);
        let num = &self.num * self.base_pow(e - self.exp) + &other.num * self.base_pow(e - other.exp);
        ZOneOverN::new(self.base, num, e)
    }

    pub fn neg(&self) -> ZOneOverN {
        ZOneOverN {
            base: self.base,
            num: -&self.num,
            exp: self.exp,
        }
    }

    pub fn sub(&self, other: &ZOneOverN) -> ZOneOverN {
        self.add(&other.neg())
    }

    /// Multiply by `n^k` (negative `k` divides).
    pub fn scale(&self, k: i64) -> ZOneOverN {
        if self.num.is_zero() {
            return self.clone();
        }
        let shifted = self.exp as i64 - k;
        if shifted >= 0 {
            ZOneOverN::new(self.base, self.num.clone(), shifted as u64)
        } else {
            let num = &self.num * self.base_pow((-shifted) as u64);
            ZOneOverN::new(self.base, num, 0)
        }
    }

    /// Multiply by an integer.
    pub fn mul_int(&self, k: &BigInt) -> ZOneOverN {
        ZOneOverN::new(self.base, &self.num * k, self.exp)
    }
}

impl fmt::Display for ZOneOverN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.base_pow(self.exp))
        }
    }
}

/// A group element `(x, t)` of `Z[1/n] x| Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BsElement {
    pub x: ZOneOverN,
    pub t: BigInt,
}

impl BsElement {
    pub fn new(x: ZOneOverN, t: impl Into<BigInt>) -> Self {
        BsElement { x, t: t.into() }
    }

    pub fn identity(base: u64) -> Self {
        BsElement::new(ZOneOverN::zero(base), 0)
    }

    /// `a = (0, 1)`.
    pub fn gen_a(base: u64) -> Self {
        BsElement::new(ZOneOverN::zero(base), 1)
    }

    /// `b = (1, 0)`.
    pub fn gen_b(base: u64) -> Self {
        BsElement::new(ZOneOverN::integer(base, 1), 0)
    }

    pub fn base(&self) -> u64 {
        self.x.base()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.t.is_zero()
    }

    /// `(x, r) * (y, s) = (x + y / n^r, r + s)`. The `t`-component `r` must
    /// fit a machine integer since it scales the exponent.
    pub fn mul(&self, other: &BsElement) -> BsElement {
        self.try_mul(other).expect("base mismatch")
    }

    pub fn try_mul(&self, other: &BsElement) -> Result<BsElement, BsError> {
        if self.base() != other.base() {
            return Err(BsError::BaseMismatch(self.base(), other.base()));
        }
        let r = i64::try_from(&self.t).expect("t-component fits i64");
        Ok(BsElement {
            x: self.x.add(&other.x.scale(-r)),
            t: &self.t + &other.t,
        })
    }

    /// `(x, r)^-1 = (-x * n^r, -r)`.
    pub fn inverse(&self) -> BsElement {
        let r = i64::try_from(&self.t).expect("t-component fits i64");
        BsElement {
            x: self.x.neg().scale(r),
            t: -&self.t,
        }
    }

    pub fn pow(&self, k: i64) -> BsElement {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = BsElement::identity(self.base());
        let mut sq = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }
}

impl fmt::Display for BsElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsLetter {
    A,
    B,
}

/// A word in the generators `a`, `b`, normalized: adjacent letters distinct,
/// exponents nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BsWord {
    syllables: Vec<(BsLetter, BigInt)>,
}

impl BsWord {
    pub fn new(syllables: Vec<(BsLetter, BigInt)>) -> Self {
        let mut normalized: Vec<(BsLetter, BigInt)> = Vec::with_capacity(syllables.len());
        for (letter, exp) in syllables {
            if exp.is_zero() {
                continue;
            }
            match normalized.last_mut() {
                Some((last, acc)) if *last == letter => {
                    *acc += exp;
                    if acc.is_zero() {
                        normalized.pop();
                    }
                }
                _ => normalized.push((letter, exp)),
            }
        }
        BsWord {
            syllables: normalized,
        }
    }

    pub fn from_i64(syllables: &[(BsLetter, i64)]) -> Self {
        BsWord::new(
            syllables
                .iter()
                .map(|&(l, e)| (l, BigInt::from(e)))
                .collect(),
        )
    }

    pub fn syllables(&self) -> &[(BsLetter, BigInt)] {
        &self.syllables
    }

    /// The defining relator `a^-1 b a b^-n`.
    pub fn relator(n: u64) -> Self {
        BsWord::new(vec![
            (BsLetter::A, BigInt::from(-1)),
            (BsLetter::B, BigInt::from(1)),
            (BsLetter::A, BigInt::from(1)),
            (BsLetter::B, -BigInt::from(n)),
        ])
    }

    /// Sum of the `a`-exponents: the homomorphism onto `Z`.
    pub fn a_exponent(&self) -> BigInt {
        self.syllables
            .iter()
            .filter(|(l, _)| *l == BsLetter::A)
            .map(|(_, e)| e)
            .sum()
    }

    /// Evaluate in the semidirect model: `a -> (0,1)`, `b -> (1,0)`.
    pub fn embed(&self, base: u64) -> BsElement {
        let mut acc = BsElement::identity(base);
        for (letter, exp) in &self.syllables {
            let factor = match letter {
                // a^e = (0, e) and b^e = (e, 0), both exact for any size e
                BsLetter::A => BsElement::new(ZOneOverN::zero(base), exp.clone()),
                BsLetter::B => BsElement::new(
                    ZOneOverN::new(base, exp.clone(), 0),
                    0,
                ),
            };
            acc = acc.mul(&factor);
        }
        acc
    }

    pub fn concat(&self, other: &BsWord) -> BsWord {
        let mut syllables = self.syllables.clone();
        syllables.extend(other.syllables.iter().cloned());
        BsWord::new(syllables)
    }
}

impl fmt::Display for BsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, (letter, exp)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = match letter {
                BsLetter::A => "a",
                BsLetter::B => "b",
            };
            if exp == &BigInt::from(1) {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{exp}")?;
            }
        }
        Ok(())
    }
}

/// Candidate endomorphism data: images of the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsEndoSpec {
    pub base: u64,
    pub image_a: BsElement,
    pub image_b: BsElement,
}

impl BsEndoSpec {
    pub fn new(base: u64, image_a: BsElement, image_b: BsElement) -> Result<Self, BsError> {
        if base < 2 {
            return Err(BsError::InvalidBase(base));
        }
        if image_a.base() != base {
            return Err(BsError::BaseMismatch(base, image_a.base()));
        }
        if image_b.base() != base {
            return Err(BsError::BaseMismatch(base, image_b.base()));
        }
        Ok(BsEndoSpec {
            base,
            image_a,
            image_b,
        })
    }

    /// Convenience constructor: generator images given as words, embedded
    /// into the semidirect model.
    pub fn from_words(base: u64, image_a: &BsWord, image_b: &BsWord) -> Result<Self, BsError> {
        if base < 2 {
            return Err(BsError::InvalidBase(base));
        }
        Ok(BsEndoSpec {
            base,
            image_a: image_a.embed(base),
            image_b: image_b.embed(base),
        })
    }

    pub fn identity(base: u64) -> Self {
        BsEndoSpec {
            base,
            image_a: BsElement::gen_a(base),
            image_b: BsElement::gen_b(base),
        }
    }

    pub fn trivial(base: u64) -> Self {
        BsEndoSpec {
            base,
            image_a: BsElement::identity(base),
            image_b: BsElement::identity(base),
        }
    }
}

/// A validated endomorphism of `B(1,n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsEndo {
    spec: BsEndoSpec,
}

/// Check that the candidate really defines an endomorphism: `b` must land
/// in the kernel of the `a`-exponent map (`t`-component zero), and the
/// defining relation must be preserved exactly in the semidirect model.
pub fn validate_bs_endo(spec: BsEndoSpec) -> Result<BsEndo, BsError> {
    if !spec.image_b.t.is_zero() {
        return Err(BsError::ImageOfBNotInKernel(spec.image_b.t.clone()));
    }
    let lhs = spec
        .image_a
        .inverse()
        .mul(&spec.image_b)
        .mul(&spec.image_a);
    // b^n for b = (d, 0) is (n*d, 0)
    let rhs = BsElement::new(spec.image_b.x.mul_int(&BigInt::from(spec.base)), 0);
    if lhs != rhs {
        return Err(BsError::RelationViolated {
            got: lhs.to_string(),
            expected: rhs.to_string(),
        });
    }
    Ok(BsEndo { spec })
}

impl BsEndo {
    pub fn base(&self) -> u64 {
        self.spec.base
    }

    pub fn image_a(&self) -> &BsElement {
        &self.spec.image_a
    }

    pub fn image_b(&self) -> &BsElement {
        &self.spec.image_b
    }

    pub fn spec(&self) -> &BsEndoSpec {
        &self.spec
    }

    /// The degree of the induced endomorphism of the quotient `Z`:
    /// the `t`-component of the image of `a`.
    pub fn induced_degree(&self) -> BigInt {
        self.spec.image_a.t.clone()
    }

    /// Apply to an arbitrary element via `(x, t) = a^e b^p a^(t-e)` where
    /// `x = p / n^e` in normalized form.
    pub fn apply(&self, g: &BsElement) -> BsElement {
        assert_eq!(g.base(), self.spec.base, "base mismatch");
        let e = g.x.exponent() as i64;
        let p = g.x.numerator().clone();
        let tail = i64::try_from(&(&g.t - BigInt::from(e))).expect("t-component fits i64");
        let image_b_pow = BsElement::new(self.spec.image_b.x.mul_int(&p), 0);
        self.spec
            .image_a
            .pow(e)
            .mul(&image_b_pow)
            .mul(&self.spec.image_a.pow(tail))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DegreeConstraint {
    Consistent,
    Violated,
}

/// The constraint forced by applying a candidate endomorphism to the
/// defining relation: with `d` the numerator data of the image of `b` and
/// `k` the induced degree, `n * d = d * n^k` must hold, i.e. `d = 0` or
/// `k = 1` (the base exceeds 1, so `n^k = n` only at `k = 1`).
pub fn degree_constraint_check(spec: &BsEndoSpec) -> DegreeConstraint {
    let d_is_zero = spec.image_b.x.is_zero();
    let k_is_one = spec.image_a.t == BigInt::from(1);
    if d_is_zero || k_is_one {
        DegreeConstraint::Consistent
    } else {
        DegreeConstraint::Violated
    }
}

/// Certificate that `R(phi, psi)` is infinite for an injective-admissible
/// endomorphism pair: both induced degrees are 1, so the `a`-exponent
/// (`t`-component) is constant on every twisted class, and the elements
/// `a^m` are pairwise non-conjugate.
#[derive(Clone, Debug, Serialize)]
pub struct InfinitudeCertificate {
    pub base: u64,
    pub degree_phi: i64,
    pub degree_psi: i64,
    pub invariant: String,
    pub witness_family: String,
    pub seed: u64,
    pub samples: u32,
    pub samples_passed: u32,
    pub pass: bool,
}

impl fmt::Display for InfinitudeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "certificate: R(phi, psi) is infinite for B(1,{})",
            self.base
        )?;
        writeln!(f, "  induced degrees: k_phi={} k_psi={}", self.degree_phi, self.degree_psi)?;
        writeln!(f, "  invariant: {}", self.invariant)?;
        writeln!(f, "  witness family: {}", self.witness_family)?;
        write!(
            f,
            "  randomized check: {}/{} passed (seed {}) -> {}",
            self.samples_passed,
            self.samples,
            self.seed,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Produce the infinitude certificate for a validated pair, re-checking the
/// class invariant on `samples` random twisted moves.
pub fn infinitude_certificate(
    phi: &BsEndo,
    psi: &BsEndo,
    seed: u64,
    samples: u32,
) -> Result<InfinitudeCertificate, BsError> {
    assert_eq!(phi.base(), psi.base(), "base mismatch");
    if phi.image_b().x.is_zero() {
        return Err(BsError::NotInjectiveAdmissible { side: "first" });
    }
    if psi.image_b().x.is_zero() {
        return Err(BsError::NotInjectiveAdmissible { side: "second" });
    }
    // validation plus d != 0 forces degree 1 on both sides
    let degree_phi = i64::try_from(&phi.induced_degree()).unwrap();
    let degree_psi = i64::try_from(&psi.induced_degree()).unwrap();
    debug_assert_eq!((degree_phi, degree_psi), (1, 1));

    let base = phi.base();
    let mut rng = SplitMix64::new(seed);
    let mut passed = 0;
    for _ in 0..samples {
        let x = random_element(base, &mut rng);
        let gamma = random_element(base, &mut rng);
        let moved = psi.apply(&gamma).mul(&x).mul(&phi.apply(&gamma).inverse());
        if moved.t == x.t {
            passed += 1;
        }
    }
    let pass = passed == samples;
    Ok(InfinitudeCertificate {
        base,
        degree_phi,
        degree_psi,
        invariant: "|x'|_a = |x|_a + (k_psi - k_phi)|gamma|_a = |x|_a for every twisted move \
                    x' = psi(gamma) x phi(gamma)^-1, since k_phi = k_psi = 1"
            .to_string(),
        witness_family: "a^m = (0, m), m in Z: distinct t-components, hence pairwise \
                         non-conjugate under any twisted move"
            .to_string(),
        seed,
        samples,
        samples_passed: passed,
        pass,
    })
}

fn random_element(base: u64, rng: &mut SplitMix64) -> BsElement {
    let num = BigInt::from(rng.int_in(-10_000, 10_000));
    let exp = rng.below(7);
    let t = rng.int_in(-6, 6);
    BsElement::new(ZOneOverN::new(base, num, exp), t)
}
