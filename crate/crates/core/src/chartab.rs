//! Character tables of finite groups and the induced action on the dual.
//!
//! The table is computed by the classical class-sum method: the structure
//! constants `a[i][j][k]` of the class algebra give commuting integer
//! matrices whose common eigenvectors are, up to normalization, the rows of
//! the character table. A random real combination of those matrices
//! (fixed seed, bounded retries on degeneracy) has simple eigenvalues, so a
//! single eigendecomposition recovers all irreducible characters at once.
//!
//! Characters are floating point with tight integrity checks: row
//! orthogonality to 1e-8 and exact integer degree recovery. Downstream row
//! matching uses tolerance 1e-6.

use num_complex::Complex64;
use std::fmt::Write as _;
use thiserror::Error;

use crate::fingroup::{FiniteGroup, GroupMap};
use crate::rng::SplitMix64;

const ROW_MATCH_TOL: f64 = 1e-6;
const ORTHOGONALITY_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: u32 = 16;
const BASE_SEED: u64 = 0xc4a2_7ab1;

#[derive(Error, Debug, PartialEq)]
pub enum ChartabError {
    #[error("class multiplication count is not constant on class {class}")]
    InconsistentClassAlgebra { class: usize },

    #[error("no class-sum combination with simple spectrum after {attempts} attempts")]
    DegenerateCombination { attempts: u32 },

    #[error("character table residual {residual:e} exceeds tolerance after refinement")]
    ToleranceExceeded { residual: f64 },

    #[error("dual action requires an automorphism")]
    NotAutomorphism,

    #[error("no unique row matches character {row} composed with the automorphism")]
    NoMatchingRow { row: usize },
}

/// Conjugacy class data of a finite group: the ordinary classes ordered by
/// minimal representative, with sizes and an element-to-class lookup.
#[derive(Clone, Debug)]
pub struct ClassData {
    pub classes: Vec<Vec<usize>>,
    pub sizes: Vec<usize>,
    pub reps: Vec<usize>,
    pub class_of: Vec<usize>,
}

impl ClassData {
    pub fn new(group: &FiniteGroup) -> Self {
        let id = GroupMap::identity(group);
        let part = group.twisted_classes(&id, &id);
        ClassData {
            sizes: part.classes.iter().map(Vec::len).collect(),
            reps: part.reps,
            class_of: part.class_of,
            classes: part.classes,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Structure constants of the class algebra:
/// `a[i][j][k] = #{(x, y) in C_i x C_j : x * y = z}` for a fixed `z in C_k`.
/// The count is verified to be independent of the chosen `z`.
pub fn class_mult_coefficients(
    group: &FiniteGroup,
    classes: &ClassData,
) -> Result<Vec<Vec<Vec<u64>>>, ChartabError> {
    let k = classes.len();
    let n = group.order();
    let mut a = vec![vec![vec![0u64; k]; k]; k];
    let mut counts = vec![0u64; n];
    for i in 0..k {
        for j in 0..k {
            counts.fill(0);
            for &x in &classes.classes[i] {
                for &y in &classes.classes[j] {
                    counts[group.mul(x, y)] += 1;
                }
            }
            for c in 0..k {
                let expected = counts[classes.reps[c]];
                for &z in &classes.classes[c] {
                    if counts[z] != expected {
                        return Err(ChartabError::InconsistentClassAlgebra { class: c });
                    }
                }
                a[i][j][c] = expected;
            }
        }
    }
    Ok(a)
}

/// The irreducible complex characters of a finite group, one row per
/// character, one column per conjugacy class (column 0 is the identity
/// class, so it carries the degrees).
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub values: Vec<Vec<Complex64>>,
    pub degrees: Vec<u64>,
    pub classes: ClassData,
    pub group_order: usize,
}

impl CharacterTable {
    pub fn irreducible_count(&self) -> usize {
        self.values.len()
    }

    /// Maximum deviation from the row orthogonality relations.
    pub fn orthogonality_residual(&self) -> f64 {
        let k = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for l in 0..k {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..k {
                    s += self.classes.sizes[j] as f64 * self.values[i][j] * self.values[l][j].conj();
                }
                let target = if i == l { self.group_order as f64 } else { 0.0 };
                worst = worst.max((s - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Maximum deviation from the column orthogonality relations:
    /// `sum_i chi_i(C_j) conj(chi_i(C_l)) = delta_jl |G| / |C_j|`.
    pub fn column_orthogonality_residual(&self) -> f64 {
        let k = self.values.len();
        let mut worst: f64 = 0.0;
        for j in 0..k {
            for l in 0..k {
                let mut s = Complex64::new(0.0, 0.0);
                for row in &self.values {
                    s += row[j] * row[l].conj();
                }
                let target = if j == l {
                    self.group_order as f64 / self.classes.sizes[j] as f64
                } else {
                    0.0
                };
                worst = worst.max((s - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn character_table(group: &FiniteGroup) -> Result<CharacterTable, ChartabError> {
    let classes = ClassData::new(group);
    let a = class_mult_coefficients(group, &classes)?;
    let order = group.order();

    let mut last_err = ChartabError::DegenerateCombination {
        attempts: MAX_ATTEMPTS,
    };
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = SplitMix64::new(BASE_SEED.wrapping_add(attempt as u64));
        match table_attempt(&classes, &a, order, &mut rng) {
            Ok(values) => {
                let degrees = values
                    .iter()
                    .map(|row| row[0].re.round() as u64)
                    .collect();
                let table = CharacterTable {
                    values,
                    degrees,
                    classes: classes.clone(),
                    group_order: order,
                };
                let residual = table
                    .orthogonality_residual()
                    .max(table.column_orthogonality_residual());
                if residual > ORTHOGONALITY_TOL {
                    last_err = ChartabError::ToleranceExceeded { residual };
                    continue;
                }
                debug_assert_eq!(
                    table.degrees.iter().map(|d| d * d).sum::<u64>(),
                    order as u64
                );
                return Ok(table);
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// One attempt with a fresh random combination: returns unsorted character
/// rows or a retryable error.
fn table_attempt(
    classes: &ClassData,
    a: &[Vec<Vec<u64>>],
    order: usize,
    rng: &mut SplitMix64,
) -> Result<Vec<Vec<Complex64>>, ChartabError> {
    let k = classes.len();
    // (B_i)[j][l] = a[i][j][l]; the common eigenvectors are w[j] = omega(j),
    // the class-sum eigenvalue vectors of the irreducible characters.
    let mut t = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        let c = rng.unit_f64();
        for j in 0..k {
            for l in 0..k {
                t[j][l] += c * a[i][j][l] as f64;
            }
        }
    }

    let scale = 1.0
        + t.iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let eigenvalues = durand_kerner(&t, scale).ok_or(ChartabError::DegenerateCombination {
        attempts: MAX_ATTEMPTS,
    })?;
    // simple spectrum required, otherwise eigenvectors are not determined
    for i in 0..k {
        for j in i + 1..k {
            if (eigenvalues[i] - eigenvalues[j]).norm() < 1e-7 * scale {
                return Err(ChartabError::DegenerateCombination {
                    attempts: MAX_ATTEMPTS,
                });
            }
        }
    }

    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut worst_residual: f64 = 0.0;
    for &lambda in &eigenvalues {
        let w = eigenvector(&t, lambda, scale, rng)
            .ok_or(ChartabError::ToleranceExceeded { residual: f64::NAN })?;
        // w is the omega vector up to scale; omega(identity class) = 1
        if w[0].norm() < 1e-10 {
            return Err(ChartabError::ToleranceExceeded { residual: w[0].norm() });
        }
        let w: Vec<Complex64> = w.iter().map(|x| x / w[0]).collect();
        // sum_j |w_j|^2 / |C_j| = |G| / degree^2
        let s: f64 = (0..k)
            .map(|j| w[j].norm_sqr() / classes.sizes[j] as f64)
            .sum();
        let degree_f = (order as f64 / s).sqrt();
        let degree = degree_f.round();
        worst_residual = worst_residual.max((degree_f - degree).abs());
        if (degree_f - degree).abs() > 1e-6 || degree < 1.0 {
            return Err(ChartabError::ToleranceExceeded {
                residual: (degree_f - degree).abs(),
            });
        }
        let row: Vec<Complex64> = (0..k)
            .map(|j| w[j] * degree / classes.sizes[j] as f64)
            .collect();
        rows.push(row);
    }

    let total: u64 = rows.iter().map(|r| {
        let d = r[0].re.round() as u64;
        d * d
    }).sum();
    if total != order as u64 {
        return Err(ChartabError::ToleranceExceeded {
            residual: worst_residual,
        });
    }

    // canonical order: by degree, then by class values, largest first
    rows.sort_by(|x, y| {
        let dx = x[0].re.round() as u64;
        let dy = y[0].re.round() as u64;
        dx.cmp(&dy).then_with(|| {
            for j in 0..k {
                let key = |v: Complex64| {
                    ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64)
                };
                match key(y[j]).cmp(&key(x[j])) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    Ok(rows)
}

// --- dense complex helpers, adequate for the handful-of-classes scale ---

/// `det(zI - T)` via complex LU with partial pivoting.
fn charpoly_at(t: &[Vec<f64>], z: Complex64) -> Complex64 {
    let k = t.len();
    let mut m: Vec<Vec<Complex64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
                    diag - Complex64::new(t[i][j], 0.0)
                })
                .collect()
        })
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        if m[pivot_row][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..k {
            let factor = m[row][col] / m[col][col];
            for j in col..k {
                let sub = factor * m[col][j];
                m[row][j] -= sub;
            }
        }
    }
    det
}

/// All roots of `det(zI - T)` by Durand-Kerner iteration. Returns `None` if
/// the iteration fails to settle (e.g. clustered roots).
fn durand_kerner(t: &[Vec<f64>], scale: f64) -> Option<Vec<Complex64>> {
    let k = t.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k == 1 {
        return Some(vec![Complex64::new(t[0][0], 0.0)]);
    }
    let mut zs: Vec<Complex64> = (0..k)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / k as f64 + 0.4;
            scale * Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let tol = 1e-13 * scale;
    let mut settled = 0;
    for _ in 0..800 {
        let mut max_step = 0.0f64;
        for j in 0..k {
            let p = charpoly_at(t, zs[j]);
            if !p.is_finite() {
                return None;
            }
            let mut den = Complex64::new(1.0, 0.0);
            for l in 0..k {
                if l != j {
                    den *= zs[j] - zs[l];
                }
            }
            if den.norm() < 1e-300 {
                zs[j] += Complex64::new(1e-6 * scale, 1e-6 * scale);
                max_step = f64::MAX;
                continue;
            }
            let step = p / den;
            zs[j] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < tol {
            settled += 1;
            if settled >= 2 {
                return Some(zs);
            }
        } else {
            settled = 0;
        }
    }
    None
}

/// Eigenvector of `T` for the (simple) eigenvalue `lambda`, by shifted
/// inverse iteration with a Rayleigh refinement pass.
fn eigenvector(
    t: &[Vec<f64>],
    lambda: Complex64,
    scale: f64,
    rng: &mut SplitMix64,
) -> Option<Vec<Complex64>> {
    let k = t.len();
    let shift = lambda + Complex64::new(1e-11 * scale, 1e-11 * scale);
    let mut v: Vec<Complex64> = (0..k)
        .map(|_| Complex64::new(rng.unit_f64() - 0.5, rng.unit_f64() - 0.5))
        .collect();
    normalize(&mut v)?;
    let mut mu = shift;
    for pass in 0..6 {
        let x = solve_shifted(t, mu, &v)?;
        v = x;
        normalize(&mut v)?;
        if pass >= 2 {
            // Rayleigh quotient sharpens the shift once the direction settles
            let mut tv = vec![Complex64::new(0.0, 0.0); k];
            for i in 0..k {
                for j in 0..k {
                    tv[i] += Complex64::new(t[i][j], 0.0) * v[j];
                }
            }
            let rq: Complex64 = v.iter().zip(&tv).map(|(a, b)| a.conj() * b).sum();
            mu = rq + Complex64::new(1e-12 * scale, 1e-12 * scale);
        }
    }
    Some(v)
}

fn normalize(v: &mut [Complex64]) -> Option<()> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(())
}

/// Solve `(T - mu I) x = b` by complex LU with partial pivoting.
fn solve_shifted(t: &[Vec<f64>], mu: Complex64, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let k = t.len();
    let mut m: Vec<Vec<Complex64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let diag = if i == j { mu } else { Complex64::new(0.0, 0.0) };
                    Complex64::new(t[i][j], 0.0) - diag
                })
                .collect()
        })
        .collect();
    let mut rhs = b.to_vec();
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        if m[pivot_row][col].norm() < 1e-300 {
            return None;
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            rhs.swap(pivot_row, col);
        }
        for row in col + 1..k {
            let factor = m[row][col] / m[col][col];
            for j in col..k {
                let sub = factor * m[col][j];
                m[row][j] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[row] -= sub;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for row in (0..k).rev() {
        let mut acc = rhs[row];
        for j in row + 1..k {
            acc -= m[row][j] * x[j];
        }
        x[row] = acc / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

// --- the induced action on the dual ---

/// The permutation of irreducible characters induced by an automorphism:
/// `alpha^(chi) = chi o alpha`. Returns `perm` with `chi_i o alpha =
/// chi_{perm[i]}`, found by exact row matching within tolerance.
pub fn dual_action(
    table: &CharacterTable,
    group: &FiniteGroup,
    alpha: &GroupMap,
) -> Result<Vec<usize>, ChartabError> {
    if !alpha.is_bijective() || !alpha.is_endo_of(group) {
        return Err(ChartabError::NotAutomorphism);
    }
    let k = table.classes.len();
    let class_perm: Vec<usize> = (0..k)
        .map(|j| table.classes.class_of[alpha.apply(table.classes.reps[j])])
        .collect();
    let mut perm = Vec::with_capacity(table.values.len());
    for (row, values) in table.values.iter().enumerate() {
        let composed: Vec<Complex64> = (0..k).map(|j| values[class_perm[j]]).collect();
        let mut matches = table.values.iter().enumerate().filter(|(_, cand)| {
            (0..k).all(|j| (cand[j] - composed[j]).norm() < ROW_MATCH_TOL)
        });
        let found = matches.next().map(|(i, _)| i);
        if found.is_none() || matches.next().is_some() {
            return Err(ChartabError::NoMatchingRow { row });
        }
        perm.push(found.unwrap());
    }
    Ok(perm)
}

/// `#{chi irreducible : chi o phi = chi o psi}` for two automorphisms.
pub fn coincidence_count_dual(
    table: &CharacterTable,
    group: &FiniteGroup,
    phi: &GroupMap,
    psi: &GroupMap,
) -> Result<usize, ChartabError> {
    let p = dual_action(table, group, phi)?;
    let q = dual_action(table, group, psi)?;
    Ok(p.iter().zip(&q).filter(|(a, b)| a == b).count())
}

/// Both fixed-point counts of the Brauer permutation lemma: fixed
/// irreducible characters and fixed conjugacy classes of `alpha`. The two
/// numbers must agree for every automorphism; this is used as a test oracle
/// for the table machinery.
pub fn brauer_counts(
    table: &CharacterTable,
    group: &FiniteGroup,
    alpha: &GroupMap,
) -> Result<(usize, usize), ChartabError> {
    let perm = dual_action(table, group, alpha)?;
    let fixed_chars = perm.iter().enumerate().filter(|(i, p)| i == *p).count();
    let fixed_classes = (0..table.classes.len())
        .filter(|&j| table.classes.class_of[alpha.apply(table.classes.reps[j])] == j)
        .count();
    Ok((fixed_chars, fixed_classes))
}

/// Reidemeister number versus dual coincidence count for an automorphism
/// pair on a finite group. A mismatch is a report outcome.
#[derive(Clone, Debug)]
pub struct BfFiniteReport {
    pub group_order: usize,
    pub reidemeister: usize,
    pub dual_coincidences: usize,
    pub pass: bool,
}

impl std::fmt::Display for BfFiniteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "verify-bf finite (order {}): R={} coincidences={} -> {}",
            self.group_order,
            self.reidemeister,
            self.dual_coincidences,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

pub fn verify_compact_bf(
    group: &FiniteGroup,
    table: &CharacterTable,
    phi: &GroupMap,
    psi: &GroupMap,
) -> Result<BfFiniteReport, ChartabError> {
    let reidemeister = group.reidemeister_number(phi, psi);
    let dual_coincidences = coincidence_count_dual(table, group, phi, psi)?;
    Ok(BfFiniteReport {
        group_order: group.order(),
        reidemeister,
        dual_coincidences,
        pass: reidemeister == dual_coincidences,
    })
}

/// With both endomorphisms trivial, every element is its own class, so
/// `R = |G|`, while every representation composes to the same map and the
/// coincidence set is all of the dual: `#Coin = #classes`. The two numbers
/// differ exactly when the group is nonabelian.
#[derive(Clone, Debug)]
pub struct CounterexampleReport {
    pub group_order: usize,
    pub reidemeister: usize,
    pub dual_size: usize,
    pub abelian: bool,
    pub strict_inequality: bool,
}

impl std::fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "trivial endomorphism pair: R={} #Coin=#dual={} ({}abelian) -> {}",
            self.reidemeister,
            self.dual_size,
            if self.abelian { "" } else { "non" },
            if self.strict_inequality {
                "INEQUALITY"
            } else {
                "EQUALITY"
            }
        )
    }
}

pub fn counterexample_report(group: &FiniteGroup) -> Result<CounterexampleReport, ChartabError> {
    let trivial = GroupMap::trivial(group);
    let reidemeister = group.reidemeister_number(&trivial, &trivial);
    let table = character_table(group)?;
    let dual_size = table.irreducible_count();
    Ok(CounterexampleReport {
        group_order: group.order(),
        reidemeister,
        dual_size,
        abelian: group.is_abelian(),
        strict_inequality: reidemeister != dual_size,
    })
}

/// Aligned text rendering of a character table.
pub fn format_table(table: &CharacterTable) -> String {
    let k = table.classes.len();
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["chi \\ class".to_string()];
    for j in 0..k {
        header.push(format!(
            "C{} (rep {}, size {})",
            j, table.classes.reps[j], table.classes.sizes[j]
        ));
    }
    cells.push(header);
    for (i, row) in table.values.iter().enumerate() {
        let mut line = vec![format!("chi_{i}")];
        for value in row {
            line.push(format_complex(*value));
        }
        cells.push(line);
    }
    let widths: Vec<usize> = (0..=k)
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:>width$}", width = widths[c]);
        }
        out.push('\n');
    }
    out
}

pub fn format_complex(value: Complex64) -> String {
    let snap = |x: f64| {
        let r = x.round();
        if (x - r).abs() < 1e-9 {
            r
        } else {
            x
        }
    };
    let re = snap(value.re);
    let im = snap(value.im);
    let fmt_part = |x: f64| {
        if x == x.trunc() && x.abs() < 1e15 {
            format!("{}", x as i64)
        } else {
            format!("{x:.4}")
        }
    };
    if im == 0.0 {
        fmt_part(re)
    } else if re == 0.0 {
        format!("{}i", fmt_part(im))
    } else if im < 0.0 {
        format!("{}-{}i", fmt_part(re), fmt_part(-im))
    } else {
        format!("{}+{}i", fmt_part(re), fmt_part(im))
    }
}
