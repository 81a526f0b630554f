//! Command-line interface: group spec parsing, subcommand dispatch, and
//! deterministic text/JSON output.
//!
//! Exit code contract: 0 on success, 1 when a verification subcommand
//! produces a FAIL report, 2 on any input error (syntax or validation).
//! `--json` switches every subcommand to a machine-readable document with a
//! versioned top-level `"schema"` field.

pub mod parse;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::json;
use std::fmt;

use crate::abelian::{
    self, AbelianHom, FgAbelianGroup, ReidemeisterCount,
};
use crate::baumslag::{
    degree_constraint_check, infinitude_certificate, validate_bs_endo, BsElement, BsEndoSpec,
    BsLetter, BsWord, ZOneOverN,
};
use crate::chartab;
use crate::fingroup::{FiniteGroup, GroupMap};
use crate::matrix::IntMat;
use crate::polycyclic::{
    self, decide_twisted_conjugacy, quotient_class_lower_bound, validate_poly_auto, BoundOutcome,
    DecideBudget, DecideEvent, Decision, PolyAuto, PolyElement, PolyGroup,
};
use crate::snf::smith_normal_form;
use parse::{parse_pair, parse_vector_pair, parse_word, Cursor, ParseError, WordError};

/// Default element cap when building closures and realizations.
pub const DEFAULT_CAP: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{0}")]
    Word(#[from] WordError),

    #[error("{0}")]
    Validation(String),
}

fn invalid(e: impl fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// A parsed group specification, one of the five supported kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    FinitePerm { gens: Vec<Vec<usize>> },
    FiniteTable { table: Vec<Vec<usize>> },
    Abelian { invariants: Vec<u64>, rank: usize },
    Bs { n: u64 },
    Poly { dim: usize, action: Vec<Vec<i64>> },
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rows<T: fmt::Display>(rows: &[Vec<T>]) -> String {
            let body: Vec<String> = rows
                .iter()
                .map(|r| {
                    let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            format!("[{}]", body.join(","))
        }
        match self {
            GroupSpec::FinitePerm { gens } => write!(f, "group finite-perm gens={}", rows(gens)),
            GroupSpec::FiniteTable { table } => {
                write!(f, "group finite-table table={}", rows(table))
            }
            GroupSpec::Abelian { invariants, rank } => {
                let list: Vec<String> = invariants.iter().map(|x| x.to_string()).collect();
                write!(f, "group abelian invariants=[{}] rank={rank}", list.join(","))
            }
            GroupSpec::Bs { n } => write!(f, "group bs n={n}"),
            GroupSpec::Poly { dim, action } => {
                write!(f, "group poly d={dim} A={}", rows(action))
            }
        }
    }
}

/// Parse a group spec; the leading `group` keyword is optional so flag
/// values can omit it.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec, CliError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    let mut kind = cursor.ident()?;
    if kind == "group" {
        kind = cursor.ident()?;
    }
    let mut fields: Vec<(String, FieldValue)> = Vec::new();
    while !cursor.at_end() {
        let key = cursor.ident()?;
        cursor.skip_ws();
        cursor.expect('=')?;
        cursor.skip_ws();
        let value = if cursor.peeks_nested_list() {
            FieldValue::Matrix(cursor.int_matrix()?)
        } else if cursor.peek() == Some('[') {
            FieldValue::List(cursor.int_list()?)
        } else {
            FieldValue::Int(cursor.integer()?)
        };
        fields.push((key, value));
    }
    build_spec(&kind, fields, &cursor)
}

enum FieldValue {
    Int(BigInt),
    List(Vec<BigInt>),
    Matrix(Vec<Vec<BigInt>>),
}

fn build_spec(
    kind: &str,
    fields: Vec<(String, FieldValue)>,
    cursor: &Cursor,
) -> Result<GroupSpec, CliError> {
    let find = |name: &str| fields.iter().find(|(k, _)| k == name).map(|(_, v)| v);
    let to_usize = |x: &BigInt, what: &str| {
        x.to_usize()
            .ok_or_else(|| CliError::Validation(format!("{what} must be a nonnegative machine integer, got {x}")))
    };
    match kind {
        "finite-perm" => {
            let gens = match find("gens") {
                Some(FieldValue::Matrix(rows)) => rows
                    .iter()
                    .map(|r| r.iter().map(|x| to_usize(x, "permutation image")).collect())
                    .collect::<Result<Vec<Vec<usize>>, _>>()?,
                Some(_) => {
                    return Err(CliError::Validation(
                        "gens must be a list of permutations, e.g. gens=[[1,0,2],[1,2,0]]".into(),
                    ))
                }
                None => return Err(missing(cursor, "gens")),
            };
            Ok(GroupSpec::FinitePerm { gens })
        }
        "finite-table" => {
            let table = match find("table") {
                Some(FieldValue::Matrix(rows)) => rows
                    .iter()
                    .map(|r| r.iter().map(|x| to_usize(x, "table entry")).collect())
                    .collect::<Result<Vec<Vec<usize>>, _>>()?,
                Some(_) => {
                    return Err(CliError::Validation(
                        "table must be a square matrix of element indices".into(),
                    ))
                }
                None => return Err(missing(cursor, "table")),
            };
            Ok(GroupSpec::FiniteTable { table })
        }
        "abelian" => {
            let invariants = match find("invariants") {
                Some(FieldValue::List(xs)) => xs
                    .iter()
                    .map(|x| {
                        x.to_u64().ok_or_else(|| {
                            CliError::Validation(format!("invariant factor {x} out of range"))
                        })
                    })
                    .collect::<Result<Vec<u64>, _>>()?,
                // "[]" scans as an empty nested list
                Some(FieldValue::Matrix(rows)) if rows.is_empty() => Vec::new(),
                Some(_) => {
                    return Err(CliError::Validation(
                        "invariants must be a list, e.g. invariants=[2,4]".into(),
                    ))
                }
                None => return Err(missing(cursor, "invariants")),
            };
            let rank = match find("rank") {
                Some(FieldValue::Int(x)) => to_usize(x, "rank")?,
                Some(_) => return Err(CliError::Validation("rank must be an integer".into())),
                None => 0,
            };
            // constructor validates the divisibility chain
            FgAbelianGroup::from_u64(&invariants, rank).map_err(invalid)?;
            Ok(GroupSpec::Abelian { invariants, rank })
        }
        "bs" => {
            let n = match find("n") {
                Some(FieldValue::Int(x)) => x
                    .to_u64()
                    .filter(|&n| n >= 2)
                    .ok_or_else(|| CliError::Validation(format!("base n must be >= 2, got {x}")))?,
                Some(_) => return Err(CliError::Validation("n must be an integer".into())),
                None => return Err(missing(cursor, "n")),
            };
            Ok(GroupSpec::Bs { n })
        }
        "poly" => {
            let action = match find("A") {
                Some(FieldValue::Matrix(rows)) => rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|x| {
                                x.to_i64().ok_or_else(|| {
                                    CliError::Validation(format!("matrix entry {x} out of range"))
                                })
                            })
                            .collect()
                    })
                    .collect::<Result<Vec<Vec<i64>>, _>>()?,
                Some(_) => {
                    return Err(CliError::Validation(
                        "A must be a square integer matrix".into(),
                    ))
                }
                None => return Err(missing(cursor, "A")),
            };
            let dim = match find("d") {
                Some(FieldValue::Int(x)) => to_usize(x, "d")?,
                Some(_) => return Err(CliError::Validation("d must be an integer".into())),
                None => action.len(),
            };
            if action.len() != dim || action.iter().any(|r| r.len() != dim) {
                return Err(CliError::Validation(format!(
                    "A must be {dim}x{dim} to match d={dim}"
                )));
            }
            // constructor validates unimodularity
            PolyGroup::new(IntMat::from_rows(&action)).map_err(invalid)?;
            Ok(GroupSpec::Poly { dim, action })
        }
        other => Err(CliError::Validation(format!(
            "unknown group kind '{other}': expected finite-perm, finite-table, abelian, bs, or poly"
        ))),
    }
}

fn missing(cursor: &Cursor, key: &str) -> CliError {
    let mut err = cursor.error(format!("field {key}="));
    err.found = "end of spec".into();
    CliError::Parse(err)
}

impl GroupSpec {
    /// Realize a finite multiplication table (finite kinds only).
    pub fn build_finite(&self) -> Result<FiniteGroup, CliError> {
        match self {
            GroupSpec::FinitePerm { gens } => {
                FiniteGroup::from_permutations(gens, DEFAULT_CAP).map_err(invalid)
            }
            GroupSpec::FiniteTable { table } => FiniteGroup::from_table(table).map_err(invalid),
            GroupSpec::Abelian { .. } => {
                let g = self.build_abelian()?;
                Ok(g.realize(DEFAULT_CAP).map_err(invalid)?.group)
            }
            _ => Err(CliError::Validation(
                "this subcommand requires a finite group (finite-perm, finite-table, or abelian with rank 0)"
                    .into(),
            )),
        }
    }

    pub fn build_abelian(&self) -> Result<FgAbelianGroup, CliError> {
        match self {
            GroupSpec::Abelian { invariants, rank } => {
                FgAbelianGroup::from_u64(invariants, *rank).map_err(invalid)
            }
            _ => Err(CliError::Validation("expected an abelian group spec".into())),
        }
    }

    pub fn build_poly(&self) -> Result<PolyGroup, CliError> {
        match self {
            GroupSpec::Poly { action, .. } => {
                PolyGroup::new(IntMat::from_rows(action)).map_err(invalid)
            }
            _ => Err(CliError::Validation("expected a poly group spec".into())),
        }
    }
}

// --- endomorphism argument parsing ---

fn parse_finite_map(text: &str, group: &FiniteGroup) -> Result<GroupMap, CliError> {
    match text.trim() {
        "id" => Ok(GroupMap::identity(group)),
        "trivial" => Ok(GroupMap::trivial(group)),
        other => {
            let mut cursor = Cursor::new(other);
            let list = cursor.int_list()?;
            let image = list
                .iter()
                .map(|x| {
                    x.to_usize().ok_or_else(|| {
                        CliError::Validation(format!("image index {x} out of range"))
                    })
                })
                .collect::<Result<Vec<usize>, _>>()?;
            GroupMap::validate(group, group, image).map_err(invalid)
        }
    }
}

fn parse_abelian_hom(text: &str, group: &FgAbelianGroup) -> Result<AbelianHom, CliError> {
    let trimmed = text.trim();
    match trimmed {
        "id" => Ok(AbelianHom::identity(group)),
        "trivial" => Ok(AbelianHom::zero(group)),
        _ => {
            let mut cursor = Cursor::new(trimmed);
            let matrix = if cursor.peeks_nested_list() {
                IntMat::from_bigint_rows(cursor.int_matrix()?)
            } else {
                // a flat list is a diagonal matrix
                let diag = cursor.int_list()?;
                let n = diag.len();
                let mut m = IntMat::zero(n, n);
                for (i, x) in diag.into_iter().enumerate() {
                    m[(i, i)] = x;
                }
                m
            };
            AbelianHom::new(group.clone(), matrix).map_err(invalid)
        }
    }
}

fn parse_poly_auto(text: &str, group: &PolyGroup) -> Result<PolyAuto, CliError> {
    let trimmed = text.trim();
    if trimmed == "id" {
        return Ok(PolyAuto::identity(group));
    }
    let mut cursor = Cursor::new(trimmed);
    let mut matrix: Option<IntMat> = None;
    let mut eps: Option<i8> = None;
    let mut u: Option<Vec<BigInt>> = None;
    while !cursor.at_end() {
        let key = cursor.ident()?;
        cursor.skip_ws();
        cursor.expect('=')?;
        cursor.skip_ws();
        match key.as_str() {
            "M" => matrix = Some(IntMat::from_bigint_rows(cursor.int_matrix()?)),
            "eps" => {
                let value = cursor.integer()?;
                eps = match value.to_i8() {
                    Some(1) => Some(1),
                    Some(-1) => Some(-1),
                    _ => {
                        return Err(CliError::Validation(format!(
                            "eps must be 1 or -1, got {value}"
                        )))
                    }
                };
            }
            "u" => u = Some(cursor.int_list()?),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown automorphism field '{other}': expected M, eps, u"
                )))
            }
        }
    }
    let matrix = matrix.ok_or_else(|| CliError::Validation("automorphism needs M=...".into()))?;
    let eps = eps.ok_or_else(|| CliError::Validation("automorphism needs eps=1 or eps=-1".into()))?;
    let u = u.unwrap_or_else(|| vec![BigInt::zero(); group.dim()]);
    validate_poly_auto(group, matrix, eps, u).map_err(invalid)
}

fn parse_bs_element(text: &str, n: u64) -> Result<BsElement, CliError> {
    let ((p, q), t) = parse_pair(text)?;
    if q.is_negative() || q.is_zero() {
        return Err(CliError::Validation(format!(
            "denominator must be positive, got {q}"
        )));
    }
    // q must be a power of the base
    let base = BigInt::from(n);
    let mut exp = 0u64;
    let mut rest = q.clone();
    while rest > BigInt::from(1) {
        if (&rest % &base).is_zero() {
            rest /= &base;
            exp += 1;
        } else {
            return Err(CliError::Validation(format!(
                "denominator {q} is not a power of the base {n}"
            )));
        }
    }
    let t = i64::try_from(&t)
        .map_err(|_| CliError::Validation(format!("t-component {t} out of range")))?;
    Ok(BsElement::new(ZOneOverN::new(n, p, exp), t))
}

fn parse_poly_element(text: &str, group: &PolyGroup) -> Result<PolyElement, CliError> {
    let (v, t) = parse_vector_pair(text)?;
    if v.len() != group.dim() {
        return Err(CliError::Validation(format!(
            "element has {} fiber coordinates, group has dimension {}",
            v.len(),
            group.dim()
        )));
    }
    let t = i64::try_from(&t)
        .map_err(|_| CliError::Validation(format!("t-component {t} out of range")))?;
    Ok(PolyElement::new(v, t))
}

fn word_to_bs(word: &parse::WordExpr) -> BsWord {
    BsWord::new(
        word.terms
            .iter()
            .map(|(label, exp)| {
                let letter = if label == "a" { BsLetter::A } else { BsLetter::B };
                (letter, exp.clone())
            })
            .collect(),
    )
}

// --- command definitions ---

#[derive(Parser, Debug)]
#[command(
    name = "bitwist",
    about = "Exact twisted/bitwisted conjugacy computations on concrete groups",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GroupMaps {
    /// Group spec, e.g. "abelian invariants=[12]" or "poly d=2 A=[[2,1],[1,1]]"
    #[arg(long)]
    group: String,
    /// First endomorphism (kind-specific: matrix, image table, M=.. eps=.. u=.., id, trivial)
    #[arg(long)]
    phi: String,
    /// Second endomorphism, same format as --phi
    #[arg(long)]
    psi: String,
    /// Emit machine-readable JSON
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the (phi, psi)-twisted conjugacy classes of a finite group
    Classes(GroupMaps),
    /// Compute the Reidemeister coincidence number R(phi, psi)
    Reidemeister(GroupMaps),
    /// Verify R(phi, psi) against the dual-side coincidence count
    VerifyBf {
        #[command(flatten)]
        maps: GroupMaps,
        /// Force the finite-group character-table route
        #[arg(long)]
        finite: bool,
    },
    /// Print the character table of a finite group
    Chartab {
        #[arg(long)]
        group: String,
        #[arg(long)]
        json: bool,
    },
    /// Smith normal form of an integer matrix
    Snf {
        /// Matrix literal, e.g. "[[2,4],[6,8]]"
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        json: bool,
    },
    /// Baumslag-Solitar B(1,n) tools
    Bs {
        #[command(subcommand)]
        sub: BsCommand,
    },
    /// Decide twisted conjugacy of two elements of Z^d x| Z
    Decide {
        #[arg(long)]
        group: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        /// Left element, e.g. "([0,0],0)"
        #[arg(long)]
        lhs: String,
        /// Right element
        #[arg(long)]
        rhs: String,
        /// Number of twister shells to search (radii 0..shells)
        #[arg(long, default_value_t = 5)]
        shells: u32,
        /// Largest congruence modulus to try
        #[arg(long, default_value_t = 12)]
        max_modulus: u64,
        #[arg(long)]
        json: bool,
    },
    /// Twisted class counts of congruence quotients (lower bounds for R)
    QuotientBound {
        #[arg(long)]
        group: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        /// Moduli to try: "2..16" or "2,3,5"
        #[arg(long, default_value = "2..16")]
        moduli: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BsCommand {
    /// Evaluate a word in the semidirect model, e.g. `bs eval -n 2 "a^2 b a^-2"`
    Eval {
        #[arg(short)]
        n: u64,
        word: String,
        #[arg(long)]
        json: bool,
    },
    /// Validate candidate generator images as an endomorphism
    EndoCheck {
        #[arg(short)]
        n: u64,
        /// Image of a as a pair "(x, t)"; x may be a fraction p/q with q a power of n
        #[arg(long)]
        image_a: String,
        /// Image of b, same format
        #[arg(long)]
        image_b: String,
        #[arg(long)]
        json: bool,
    },
    /// Certify that R(phi, psi) is infinite for an injective-admissible pair
    Certify {
        #[arg(short)]
        n: u64,
        #[arg(long)]
        phi_a: String,
        #[arg(long)]
        phi_b: String,
        #[arg(long)]
        psi_a: String,
        #[arg(long)]
        psi_b: String,
        #[arg(long, default_value_t = 0xb17)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u32,
        #[arg(long)]
        json: bool,
    },
}

/// Outcome of one CLI invocation.
#[derive(Debug)]
pub struct CommandOutcome {
    pub code: i32,
    pub output: String,
}

/// Run one command line (without the binary name).
pub fn run_command<I, S>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut argv: Vec<String> = vec!["bitwist".to_string()];
    argv.extend(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return CommandOutcome {
                code,
                output: e.to_string(),
            };
        }
    };
    match execute(cli.command) {
        Ok((output, code)) => CommandOutcome { code, output },
        Err(e) => CommandOutcome {
            code: 2,
            output: format!("error: {e}\n"),
        },
    }
}

fn execute(command: Command) -> Result<(String, i32), CliError> {
    match command {
        Command::Classes(maps) => cmd_classes(&maps),
        Command::Reidemeister(maps) => cmd_reidemeister(&maps),
        Command::VerifyBf { maps, finite } => cmd_verify_bf(&maps, finite),
        Command::Chartab { group, json } => cmd_chartab(&group, json),
        Command::Snf { matrix, json } => cmd_snf(&matrix, json),
        Command::Bs { sub } => cmd_bs(sub),
        Command::Decide {
            group,
            phi,
            psi,
            lhs,
            rhs,
            shells,
            max_modulus,
            json,
        } => cmd_decide(&group, &phi, &psi, &lhs, &rhs, shells, max_modulus, json),
        Command::QuotientBound {
            group,
            phi,
            psi,
            moduli,
            json,
        } => cmd_quotient_bound(&group, &phi, &psi, &moduli, json),
    }
}

/// Build a finite group plus maps from flag values, handling both the
/// structural finite kinds and realized abelian groups.
fn finite_group_and_maps(
    maps: &GroupMaps,
) -> Result<(FiniteGroup, GroupMap, GroupMap), CliError> {
    let spec = parse_group_spec(&maps.group)?;
    match &spec {
        GroupSpec::Abelian { .. } => {
            let shape = spec.build_abelian()?;
            let realized = shape.realize(DEFAULT_CAP).map_err(invalid)?;
            let phi = realized.realize_hom(&parse_abelian_hom(&maps.phi, &shape)?);
            let psi = realized.realize_hom(&parse_abelian_hom(&maps.psi, &shape)?);
            Ok((realized.group, phi, psi))
        }
        _ => {
            let group = spec.build_finite()?;
            let phi = parse_finite_map(&maps.phi, &group)?;
            let psi = parse_finite_map(&maps.psi, &group)?;
            Ok((group, phi, psi))
        }
    }
}

fn cmd_classes(maps: &GroupMaps) -> Result<(String, i32), CliError> {
    let (group, phi, psi) = finite_group_and_maps(maps)?;
    let part = group.twisted_classes(&phi, &psi);
    if maps.json {
        let classes: Vec<_> = part
            .classes
            .iter()
            .zip(&part.reps)
            .map(|(members, rep)| json!({ "rep": rep, "size": members.len(), "members": members }))
            .collect();
        let doc = json!({
            "schema": "bitwist.classes/1",
            "group_order": group.order(),
            "count": part.classes.len(),
            "classes": classes,
        });
        return Ok((pretty(&doc), 0));
    }
    let mut out = format!("classes: {}\n", part.classes.len());
    for (i, members) in part.classes.iter().enumerate() {
        let items: Vec<String> = members.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!(
            "class {i} (rep {}, size {}): {}\n",
            part.reps[i],
            members.len(),
            items.join(" ")
        ));
    }
    Ok((out, 0))
}

fn cmd_reidemeister(maps: &GroupMaps) -> Result<(String, i32), CliError> {
    let spec = parse_group_spec(&maps.group)?;
    let value: ReidemeisterCount = match &spec {
        GroupSpec::Abelian { .. } => {
            let shape = spec.build_abelian()?;
            let phi = parse_abelian_hom(&maps.phi, &shape)?;
            let psi = parse_abelian_hom(&maps.psi, &shape)?;
            abelian::reidemeister_abelian(&phi, &psi)
        }
        GroupSpec::FinitePerm { .. } | GroupSpec::FiniteTable { .. } => {
            let group = spec.build_finite()?;
            let phi = parse_finite_map(&maps.phi, &group)?;
            let psi = parse_finite_map(&maps.psi, &group)?;
            ReidemeisterCount::Finite(BigInt::from(group.reidemeister_number(&phi, &psi)))
        }
        GroupSpec::Bs { .. } => {
            return Err(CliError::Validation(
                "R(phi, psi) on B(1,n) is certified infinite for injective pairs; use `bs certify`"
                    .into(),
            ))
        }
        GroupSpec::Poly { .. } => {
            return Err(CliError::Validation(
                "exact R is not computed for infinite polycyclic groups; use `quotient-bound`"
                    .into(),
            ))
        }
    };
    if maps.json {
        let doc = json!({
            "schema": "bitwist.reidemeister/1",
            "value": value.to_string(),
        });
        Ok((pretty(&doc), 0))
    } else {
        Ok((format!("{value}\n"), 0))
    }
}

fn cmd_verify_bf(maps: &GroupMaps, finite: bool) -> Result<(String, i32), CliError> {
    let spec = parse_group_spec(&maps.group)?;
    let abelian_mode = matches!(spec, GroupSpec::Abelian { .. }) && !finite;
    if abelian_mode {
        let shape = spec.build_abelian()?;
        if !shape.is_finite() {
            return Err(CliError::Validation(
                "verify-bf needs a finite group; positive-rank duals are not computed".into(),
            ));
        }
        let phi = parse_abelian_hom(&maps.phi, &shape)?;
        let psi = parse_abelian_hom(&maps.psi, &shape)?;
        let report = abelian::verify_bitwisted_bf(&phi, &psi, DEFAULT_CAP).map_err(invalid)?;
        let code = i32::from(!report.pass);
        if maps.json {
            let doc = json!({
                "schema": "bitwist.verify-bf/1",
                "mode": "abelian",
                "group": report.group,
                "orbit_count": report.orbit_count.to_string(),
                "snf_index": report.snf_index.to_string(),
                "dual_count": report.dual_count.to_string(),
                "pass": report.pass,
            });
            return Ok((pretty(&doc), code));
        }
        return Ok((format!("{report}\n"), code));
    }

    let (group, phi, psi) = finite_group_and_maps(maps)?;
    if !phi.is_bijective() || !psi.is_bijective() {
        return Err(CliError::Validation(
            "the finite-mode verification requires automorphisms".into(),
        ));
    }
    let table = chartab::character_table(&group).map_err(invalid)?;
    let report = chartab::verify_compact_bf(&group, &table, &phi, &psi).map_err(invalid)?;
    let code = i32::from(!report.pass);
    if maps.json {
        let doc = json!({
            "schema": "bitwist.verify-bf/1",
            "mode": "finite",
            "group_order": report.group_order,
            "reidemeister": report.reidemeister,
            "dual_coincidences": report.dual_coincidences,
            "pass": report.pass,
        });
        Ok((pretty(&doc), code))
    } else {
        Ok((format!("{report}\n"), code))
    }
}

fn cmd_chartab(group: &str, json: bool) -> Result<(String, i32), CliError> {
    let spec = parse_group_spec(group)?;
    let group = spec.build_finite()?;
    let table = chartab::character_table(&group).map_err(invalid)?;
    if json {
        let rows: Vec<_> = table
            .values
            .iter()
            .zip(&table.degrees)
            .map(|(row, degree)| {
                let values: Vec<_> = row
                    .iter()
                    .map(|v| json!([round10(v.re), round10(v.im)]))
                    .collect();
                json!({ "degree": degree, "values": values })
            })
            .collect();
        let classes: Vec<_> = table
            .classes
            .reps
            .iter()
            .zip(&table.classes.sizes)
            .map(|(rep, size)| json!({ "rep": rep, "size": size }))
            .collect();
        let doc = json!({
            "schema": "bitwist.chartab/1",
            "group_order": table.group_order,
            "classes": classes,
            "characters": rows,
        });
        Ok((pretty(&doc), 0))
    } else {
        Ok((chartab::format_table(&table), 0))
    }
}

fn cmd_snf(matrix: &str, json: bool) -> Result<(String, i32), CliError> {
    let mut cursor = Cursor::new(matrix);
    let rows = cursor.int_matrix()?;
    if !cursor.at_end() {
        return Err(CliError::Parse(cursor.error("end of matrix")));
    }
    let a = IntMat::from_bigint_rows(rows);
    let snf = smith_normal_form(&a);
    if json {
        let doc = json!({
            "schema": "bitwist.snf/1",
            "diag": snf.diag.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "d": mat_json(&snf.diagonal_matrix()),
            "u": mat_json(&snf.u),
            "v": mat_json(&snf.v),
        });
        Ok((pretty(&doc), 0))
    } else {
        Ok((
            format!("D={}\nU={}\nV={}\n", snf.diagonal_matrix(), snf.u, snf.v),
            0,
        ))
    }
}

fn cmd_bs(sub: BsCommand) -> Result<(String, i32), CliError> {
    match sub {
        BsCommand::Eval { n, word, json } => {
            if n < 2 {
                return Err(CliError::Validation(format!("base n must be >= 2, got {n}")));
            }
            let expr = parse_word(&word, &["a", "b"])?;
            let value = word_to_bs(&expr).embed(n);
            if json {
                let doc = json!({
                    "schema": "bitwist.bs-eval/1",
                    "base": n,
                    "word": expr.to_string(),
                    "x": value.x.to_string(),
                    "t": value.t.to_string(),
                });
                Ok((pretty(&doc), 0))
            } else {
                Ok((format!("{value}\n"), 0))
            }
        }
        BsCommand::EndoCheck {
            n,
            image_a,
            image_b,
            json,
        } => {
            if n < 2 {
                return Err(CliError::Validation(format!("base n must be >= 2, got {n}")));
            }
            let spec = BsEndoSpec::new(
                n,
                parse_bs_element(&image_a, n)?,
                parse_bs_element(&image_b, n)?,
            )
            .map_err(invalid)?;
            let constraint = degree_constraint_check(&spec);
            let outcome = validate_bs_endo(spec.clone());
            let (valid, detail) = match &outcome {
                Ok(endo) => (true, format!("induced degree k={}", endo.induced_degree())),
                Err(e) => (false, e.to_string()),
            };
            let code = i32::from(!valid);
            if json {
                let doc = json!({
                    "schema": "bitwist.bs-endo-check/1",
                    "base": n,
                    "image_a": spec.image_a.to_string(),
                    "image_b": spec.image_b.to_string(),
                    "valid": valid,
                    "detail": detail,
                    "degree_constraint": format!("{constraint:?}"),
                });
                Ok((pretty(&doc), code))
            } else {
                Ok((
                    format!(
                        "endo-check B(1,{n}): a -> {}, b -> {}\n  {}\n  degree constraint: {constraint:?}\n",
                        spec.image_a,
                        spec.image_b,
                        if valid {
                            format!("valid endomorphism; {detail}")
                        } else {
                            format!("INVALID: {detail}")
                        }
                    ),
                    code,
                ))
            }
        }
        BsCommand::Certify {
            n,
            phi_a,
            phi_b,
            psi_a,
            psi_b,
            seed,
            samples,
            json,
        } => {
            if n < 2 {
                return Err(CliError::Validation(format!("base n must be >= 2, got {n}")));
            }
            let phi = validate_bs_endo(
                BsEndoSpec::new(n, parse_bs_element(&phi_a, n)?, parse_bs_element(&phi_b, n)?)
                    .map_err(invalid)?,
            )
            .map_err(invalid)?;
            let psi = validate_bs_endo(
                BsEndoSpec::new(n, parse_bs_element(&psi_a, n)?, parse_bs_element(&psi_b, n)?)
                    .map_err(invalid)?,
            )
            .map_err(invalid)?;
            let cert = infinitude_certificate(&phi, &psi, seed, samples).map_err(invalid)?;
            let code = i32::from(!cert.pass);
            if json {
                let mut doc = serde_json::to_value(&cert).expect("certificate serializes");
                doc["schema"] = json!("bitwist.certify/1");
                Ok((pretty(&doc), code))
            } else {
                Ok((format!("{cert}\n"), code))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_decide(
    group: &str,
    phi: &str,
    psi: &str,
    lhs: &str,
    rhs: &str,
    shells: u32,
    max_modulus: u64,
    json: bool,
) -> Result<(String, i32), CliError> {
    let spec = parse_group_spec(group)?;
    let poly = spec.build_poly()?;
    let phi = parse_poly_auto(phi, &poly)?;
    let psi = parse_poly_auto(psi, &poly)?;
    let lhs = parse_poly_element(lhs, &poly)?;
    let rhs = parse_poly_element(rhs, &poly)?;
    let report = decide_twisted_conjugacy(
        &poly,
        &phi,
        &psi,
        &lhs,
        &rhs,
        DecideBudget {
            shells,
            max_modulus,
        },
    );
    let events_json: Vec<_> = report
        .events
        .iter()
        .map(|e| serde_json::to_value(e).expect("event serializes"))
        .collect();
    let (outcome, detail) = match &report.decision {
        Decision::Yes { witness, shell } => (
            "yes",
            json!({ "witness": witness.to_string(), "shell": shell }),
        ),
        Decision::No { modulus } => ("no", json!({ "separating_modulus": modulus })),
        Decision::Exhausted => ("exhausted", json!(null)),
    };
    if json {
        let doc = json!({
            "schema": "bitwist.decide/1",
            "outcome": outcome,
            "detail": detail,
            "budget": { "shells": shells, "max_modulus": max_modulus },
            "transcript": events_json,
        });
        return Ok((pretty(&doc), 0));
    }
    let mut out = match &report.decision {
        Decision::Yes { witness, shell } => {
            format!("YES witness={witness} (shell {shell})\n")
        }
        Decision::No { modulus } => format!("NO separating modulus m={modulus}\n"),
        Decision::Exhausted => format!(
            "EXHAUSTED (shells {} searched, moduli up to {} tried)\n",
            shells, max_modulus
        ),
    };
    out.push_str("transcript:\n");
    for event in &report.events {
        match event {
            DecideEvent::ShellSearched { radius, candidates } => {
                out.push_str(&format!("  shell {radius}: {candidates} candidates\n"))
            }
            DecideEvent::QuotientAgreed { modulus, order } => out.push_str(&format!(
                "  modulus {modulus}: quotient order {order}, projections in one class\n"
            )),
            DecideEvent::QuotientSeparated {
                modulus,
                order,
                lhs_class_rep,
                rhs_class_rep,
            } => out.push_str(&format!(
                "  modulus {modulus}: quotient order {order}, classes split (reps {lhs_class_rep} vs {rhs_class_rep})\n"
            )),
            DecideEvent::QuotientSkipped { modulus, reason } => {
                out.push_str(&format!("  modulus {modulus}: skipped ({reason})\n"))
            }
        }
    }
    Ok((out, 0))
}

fn parse_moduli(text: &str) -> Result<Vec<u64>, CliError> {
    let trimmed = text.trim();
    if let Some((lo, hi)) = trimmed.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad modulus range '{trimmed}'")))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad modulus range '{trimmed}'")))?;
        if lo < 2 || hi < lo {
            return Err(CliError::Validation(format!(
                "modulus range must satisfy 2 <= lo <= hi, got '{trimmed}'"
            )));
        }
        Ok((lo..=hi).collect())
    } else {
        trimmed
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u64>()
                    .ok()
                    .filter(|&m| m >= 2)
                    .ok_or_else(|| {
                        CliError::Validation(format!("bad modulus '{}' in list", part.trim()))
                    })
            })
            .collect()
    }
}

fn cmd_quotient_bound(
    group: &str,
    phi: &str,
    psi: &str,
    moduli: &str,
    json: bool,
) -> Result<(String, i32), CliError> {
    let spec = parse_group_spec(group)?;
    let poly = spec.build_poly()?;
    let phi = parse_poly_auto(phi, &poly)?;
    let psi = parse_poly_auto(psi, &poly)?;
    let moduli = parse_moduli(moduli)?;
    let report = quotient_class_lower_bound(&poly, &phi, &psi, &moduli, polycyclic::QUOTIENT_CAP);
    if json {
        let rows: Vec<_> = report
            .rows
            .iter()
            .map(|row| serde_json::to_value(row).expect("row serializes"))
            .collect();
        let doc = json!({
            "schema": "bitwist.quotient-bound/1",
            "rows": rows,
            "best": report.best.map(|(m, c)| json!({ "modulus": m, "classes": c })),
        });
        return Ok((pretty(&doc), 0));
    }
    let mut out = String::new();
    for row in &report.rows {
        match &row.outcome {
            BoundOutcome::Counted {
                quotient_order,
                classes,
            } => out.push_str(&format!(
                "m={}: quotient order {}, twisted classes {}\n",
                row.modulus, quotient_order, classes
            )),
            BoundOutcome::Skipped { reason } => {
                out.push_str(&format!("m={}: skipped ({reason})\n", row.modulus))
            }
        }
    }
    match report.best {
        Some((modulus, classes)) => out.push_str(&format!(
            "lower bound for R: {classes} (attained at m={modulus})\n"
        )),
        None => out.push_str("lower bound for R: none (no respecting modulus)\n"),
    }
    Ok((out, 0))
}

fn mat_json(m: &IntMat) -> serde_json::Value {
    let rows: Vec<Vec<String>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)].to_string()).collect())
        .collect();
    json!(rows)
}

fn round10(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

fn pretty(doc: &serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("json serializes");
    out.push('\n');
    out
}
