//! The built-in catalog of reflective-form families and their claimed
//! congruences.
//!
//! Each entry names an even lattice of signature (n, 2) of the shape
//! 2U + R, where U is the hyperbolic plane (possibly rescaled, written
//! U(m)) and R is a rescaled or dual-scaled root lattice such as A1(2)
//! or D8'(2).  Rescaling changes the quadratic form but not the rank, so
//! the signature is always
//!
//! ```text
//! n = 2 * (number of U summands) + rank(R) - 2.
//! ```
//!
//! An entry lists its distinguished reflective forms by weight, the
//! congruence claims made about them, and how the claims were obtained:
//!
//! * `Pairwise` entries derive claims from the vanishing or modularity of
//!   brackets among sub-products of the listed forms;
//! * `Identity` entries derive claims from an explicit bracket identity
//!   [F, G] = c F G' with a known constant c.
//!
//! Every claim carries a strength tag: `Strict` claims follow from the
//! plain divisibility conditions (and are expected from the predictor in
//! both modes), while `Valuation { exponent }` claims need the comparison
//! of prime valuations and are expected only from the valuation-mode
//! predictor, modulo the stated power of p.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::LazyLock;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{rat, rat_int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("empty lattice label")]
    EmptyLabel,
    #[error("malformed lattice summand `{0}`")]
    BadSummand(String),
    #[error("unsupported root system `{0}{1}`")]
    BadRootSystem(char, u32),
    #[error("catalog file: {0}")]
    BadFile(String),
}

// ---------------------------------------------------------------------------
// root systems
// ---------------------------------------------------------------------------

/// An irreducible simply-laced root system A_k, D_k or E_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootSystem {
    pub family: char,
    pub rank: u32,
}

impl RootSystem {
    pub fn new(family: char, rank: u32) -> Result<Self, CatalogError> {
        let ok = match family {
            'A' => rank >= 1,
            'D' => rank >= 4,
            'E' => (6..=8).contains(&rank),
            _ => false,
        };
        if ok {
            Ok(RootSystem { family, rank })
        } else {
            Err(CatalogError::BadRootSystem(family, rank))
        }
    }

    /// The Coxeter number h.
    pub fn coxeter(&self) -> i64 {
        let k = self.rank as i64;
        match self.family {
            'A' => k + 1,
            'D' => 2 * k - 2,
            'E' => match self.rank {
                6 => 12,
                7 => 18,
                _ => 30,
            },
            _ => unreachable!("validated on construction"),
        }
    }

    /// The norm Q(rho) = h (h + 1) d / 24 of the Weyl vector, where d is
    /// the rank.
    pub fn weyl_vector_norm(&self) -> Rat {
        let h = self.coxeter();
        rat(h * (h + 1) * self.rank as i64, 24)
    }
}

impl std::fmt::Display for RootSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

// ---------------------------------------------------------------------------
// lattice labels
// ---------------------------------------------------------------------------

/// A parsed lattice label such as `2U+2A3` or `2U(2)+A2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeLabel {
    /// Number of hyperbolic-plane summands (counting multiplicity).
    pub planes: u32,
    /// Root summands with multiplicities; rescalings are recorded but do
    /// not affect the rank.
    pub roots: Vec<(u32, RootSystem)>,
}

impl LatticeLabel {
    /// The n in signature (n, 2): total rank minus 2.
    pub fn signature_n(&self) -> i64 {
        let rank: i64 = 2 * self.planes as i64
            + self
                .roots
                .iter()
                .map(|(mult, r)| *mult as i64 * r.rank as i64)
                .sum::<i64>();
        rank - 2
    }
}

/// Parse a label like `2U+A1(2)`, `2U(2)+A2`, `2U+E6'(3)` or `2U+2A3`.
/// Apostrophes (dual scaling) and parenthesized rescalings are accepted
/// and ignored for rank purposes.
pub fn parse_label(label: &str) -> Result<LatticeLabel, CatalogError> {
    let trimmed = label.trim();
    if trimmed.is_empty() {
        return Err(CatalogError::EmptyLabel);
    }
    let mut planes = 0u32;
    let mut roots = Vec::new();
    for part in trimmed.split('+') {
        let summand = part.trim();
        let bad = || CatalogError::BadSummand(summand.to_string());
        if summand.is_empty() {
            return Err(bad());
        }
        let mut chars = summand.chars().peekable();
        let mut mult = 0u32;
        while let Some(c) = chars.peek().copied() {
            if let Some(d) = c.to_digit(10) {
                mult = mult * 10 + d;
                chars.next();
            } else {
                break;
            }
        }
        let mult = if mult == 0 { 1 } else { mult };
        let head = chars.next().ok_or_else(bad)?;
        if head == 'U' {
            planes += mult;
        } else {
            let mut rank = 0u32;
            while let Some(c) = chars.peek().copied() {
                if let Some(d) = c.to_digit(10) {
                    rank = rank * 10 + d;
                    chars.next();
                } else {
                    break;
                }
            }
            roots.push((mult, RootSystem::new(head, rank)?));
        }
        // optional dual marker
        if chars.peek() == Some(&'\'') {
            chars.next();
        }
        // optional rescaling (m)
        if chars.peek() == Some(&'(') {
            chars.next();
            let mut scale = 0u32;
            while let Some(c) = chars.peek().copied() {
                if let Some(d) = c.to_digit(10) {
                    scale = scale * 10 + d;
                    chars.next();
                } else {
                    break;
                }
            }
            if scale == 0 || chars.next() != Some(')') {
                return Err(bad());
            }
        }
        if chars.next().is_some() {
            return Err(bad());
        }
    }
    Ok(LatticeLabel { planes, roots })
}

/// The n of signature (n, 2) for a lattice label.
pub fn signature_n(label: &str) -> Result<i64, CatalogError> {
    Ok(parse_label(label)?.signature_n())
}

// ---------------------------------------------------------------------------
// catalog entries
// ---------------------------------------------------------------------------

/// A named form of known weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogForm {
    pub name: String,
    pub weight: i64,
}

/// How strongly a claim is expected to be recovered by the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    /// Follows from the plain divisibility conditions; expected in both
    /// predictor modes.
    Strict,
    /// Needs the valuation comparison; expected in valuation mode only,
    /// with at least the stated exponent.
    Valuation { exponent: u32 },
}

/// One congruence claim: the product of the target forms is singular
/// modulo prime (to the power recorded in the strength tag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub targets: Vec<String>,
    pub prime: u64,
    pub strength: Strength,
}

impl Claim {
    pub fn target_set(&self) -> BTreeSet<&str> {
        self.targets.iter().map(|s| s.as_str()).collect()
    }
}

/// How an entry's claims are derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryKind {
    /// Brackets among disjoint sub-products of the listed forms.
    Pairwise,
    /// An explicit identity [F, G] = c F G' between the forms at the two
    /// indices into `forms`.
    Identity {
        f_index: usize,
        g_index: usize,
        constant: Rat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub label: String,
    /// Distinguishes multiple entries on the same lattice.
    pub variant: Option<String>,
    pub n: i64,
    pub forms: Vec<CatalogForm>,
    pub kind: EntryKind,
    pub claims: Vec<Claim>,
    /// Whether the valuation-mode predictor is expected to recover the
    /// claim set exactly, with no extra predictions.
    pub exact_in_valuation: bool,
    pub notes: Vec<String>,
}

impl CatalogEntry {
    pub fn display_label(&self) -> String {
        match &self.variant {
            Some(v) => format!("{} [{}]", self.label, v),
            None => self.label.clone(),
        }
    }
}

/// Map an ASCII form name to its display spelling (Psi -> Ψ, Phi -> Φ,
/// Chi -> χ).
pub fn pretty_name(name: &str) -> String {
    for (prefix, symbol) in [("Psi", "Ψ"), ("Phi", "Φ"), ("Chi", "χ")] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return format!("{symbol}{rest}");
        }
    }
    name.to_string()
}

/// Display a target list like ["Psi5", "Phi30"] as `Ψ5Φ30`.
pub fn pretty_product(targets: &[String]) -> String {
    targets.iter().map(|t| pretty_name(t)).collect()
}

// ---------------------------------------------------------------------------
// the built-in table
// ---------------------------------------------------------------------------

const STRICT: Strength = Strength::Strict;

fn val(exponent: u32) -> Strength {
    Strength::Valuation { exponent }
}

fn forms(list: &[(&str, i64)]) -> Vec<CatalogForm> {
    list.iter()
        .map(|(name, weight)| CatalogForm {
            name: (*name).to_string(),
            weight: *weight,
        })
        .collect()
}

fn claims(list: &[(&[&str], u64, Strength)]) -> Vec<Claim> {
    list.iter()
        .map(|(targets, prime, strength)| Claim {
            targets: targets.iter().map(|t| (*t).to_string()).collect(),
            prime: *prime,
            strength: *strength,
        })
        .collect()
}

struct EntrySpec<'a> {
    label: &'a str,
    variant: Option<&'a str>,
    forms: &'a [(&'a str, i64)],
    kind: EntryKind,
    claims: &'a [(&'a [&'a str], u64, Strength)],
    exact: bool,
    notes: &'a [&'a str],
}

fn build(spec: EntrySpec<'_>) -> CatalogEntry {
    let n = signature_n(spec.label).expect("catalog labels parse");
    CatalogEntry {
        label: spec.label.to_string(),
        variant: spec.variant.map(str::to_string),
        n,
        forms: forms(spec.forms),
        kind: spec.kind,
        claims: claims(spec.claims),
        exact_in_valuation: spec.exact,
        notes: spec.notes.iter().map(|s| (*s).to_string()).collect(),
    }
}

/// The constant c = l (d/2 - l) [h(h+1) - Q(rho)] of the bracket identity
/// [F, G_l] = c F G_(l+2) against the weight-l Eisenstein series on a
/// lattice 2U + R with R of rank d and Coxeter number h.
pub fn eisenstein_bracket_constant(root: &RootSystem, l: i64) -> Rat {
    let h = root.coxeter();
    let d = root.rank as i64;
    let factor = rat_int(l) * (rat(d, 2) - rat_int(l));
    factor * (rat_int(h * (h + 1)) - root.weyl_vector_norm())
}

static CATALOG: LazyLock<Vec<CatalogEntry>> = LazyLock::new(|| {
    let e6 = RootSystem::new('E', 6).unwrap();
    let e7 = RootSystem::new('E', 7).unwrap();
    let e8 = RootSystem::new('E', 8).unwrap();
    let identity = |f_index, g_index, constant| EntryKind::Identity {
        f_index,
        g_index,
        constant,
    };

    vec![
        build(EntrySpec {
            label: "2U+A1",
            variant: None,
            forms: &[("Psi5", 5), ("Phi30", 30)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi5"], 3, val(1)),
                (&["Phi30"], 59, STRICT),
                (&["Psi5", "Phi30"], 23, STRICT),
            ],
            exact: false,
            notes: &["the three forms Psi5, Phi30 and their product Phi35 are realized as explicit Fourier series elsewhere in this crate"],
        }),
        build(EntrySpec {
            label: "2U+A1(2)",
            variant: None,
            forms: &[("Psi2", 2), ("Psi9", 9), ("Phi12", 12)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi9"], 17, STRICT),
                (&["Phi12"], 23, STRICT),
                (&["Psi2", "Psi9"], 7, STRICT),
                (&["Psi2", "Phi12"], 3, val(2)),
                (&["Psi9", "Phi12"], 41, STRICT),
                (&["Psi2", "Psi9", "Phi12"], 5, STRICT),
            ],
            exact: false,
            notes: &["Psi2 carries a character of order 4; no congruence is claimed for it alone"],
        }),
        build(EntrySpec {
            label: "2U+A1(3)",
            variant: None,
            forms: &[("Psi1", 1), ("Psi6", 6), ("Phi12", 12)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi6"], 11, STRICT),
                (&["Phi12"], 23, STRICT),
                (&["Psi1", "Psi6"], 13, STRICT),
                (&["Psi1", "Phi12"], 5, STRICT),
                (&["Psi6", "Phi12"], 5, STRICT),
                (&["Psi6", "Phi12"], 7, STRICT),
                (&["Psi1", "Psi6", "Phi12"], 37, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+A2",
            variant: None,
            forms: &[("Psi9", 9), ("Phi45", 45)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi9"], 2, val(1)),
                (&["Phi45"], 11, STRICT),
                (&["Psi9", "Phi45"], 53, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U(2)+A2",
            variant: None,
            forms: &[("Psi3", 3), ("Psi12", 12), ("Phi15", 15)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi12"], 11, STRICT),
                (&["Phi15"], 7, STRICT),
                (&["Psi3", "Psi12"], 7, STRICT),
                (&["Psi3", "Phi15"], 17, STRICT),
                (&["Psi12", "Phi15"], 13, STRICT),
                (&["Psi3", "Psi12", "Phi15"], 29, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+2A1",
            variant: None,
            forms: &[("Psi4", 4), ("Psi10", 10), ("Phi30", 30)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi10"], 3, val(1)),
                (&["Phi30"], 29, STRICT),
                (&["Psi4", "Psi10"], 13, STRICT),
                (&["Psi4", "Phi30"], 11, STRICT),
                (&["Psi10", "Phi30"], 13, STRICT),
                (&["Psi4", "Psi10", "Phi30"], 43, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+A3",
            variant: None,
            forms: &[("Psi9", 9), ("Phi54", 54)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi54"], 7, STRICT),
                (&["Psi9", "Phi54"], 41, STRICT),
            ],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+D4",
            variant: None,
            forms: &[("Psi24", 24), ("Phi72", 72)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi72"], 5, STRICT),
                (&["Phi72"], 7, STRICT),
                (&["Psi24", "Phi72"], 47, STRICT),
            ],
            exact: false,
            notes: &["the divisibility conditions also fire at (Psi24, 11); only the cataloged congruences are asserted"],
        }),
        build(EntrySpec {
            label: "2U+D4",
            variant: Some("Psi8"),
            forms: &[("Psi8", 8), ("Phi72", 72)],
            kind: EntryKind::Pairwise,
            claims: &[(&["Psi8", "Phi72"], 13, STRICT)],
            exact: false,
            notes: &["assumes the relevant group is generated by the reflections in the divisor of Psi8 Phi72"],
        }),
        build(EntrySpec {
            label: "2U+2A2",
            variant: None,
            forms: &[("Psi6", 6), ("Phi42", 42)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi42"], 2, val(1)),
                (&["Phi42"], 5, STRICT),
                (&["Psi6", "Phi42"], 23, STRICT),
            ],
            exact: false,
            notes: &["the lattice has rank 8, signature (6, 2); the congruence arithmetic only works out for n = 6"],
        }),
        build(EntrySpec {
            label: "2U+D5",
            variant: None,
            forms: &[("Psi7", 7), ("Phi88", 88)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi88"], 19, STRICT),
                (&["Psi7", "Phi88"], 5, STRICT),
                (&["Psi7", "Phi88"], 37, STRICT),
            ],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+D6",
            variant: None,
            forms: &[("Psi6", 6), ("Phi102", 102)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi102"], 3, val(1)),
                (&["Phi102"], 11, STRICT),
                (&["Psi6", "Phi102"], 5, STRICT),
                (&["Psi6", "Phi102"], 7, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+E6'(3)",
            variant: None,
            forms: &[("Psi12", 12), ("Phi12", 12)],
            kind: EntryKind::Pairwise,
            claims: &[(&["Psi12", "Phi12"], 7, STRICT)],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+2A3",
            variant: None,
            forms: &[("Psi6", 6), ("Phi48", 48)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi48"], 3, val(1)),
                (&["Phi48"], 5, STRICT),
                (&["Psi6", "Phi48"], 17, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+D7",
            variant: None,
            forms: &[("Psi5", 5), ("Phi114", 114)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Phi114"], 13, STRICT),
                (&["Phi114"], 17, STRICT),
                (&["Psi5", "Phi114"], 7, STRICT),
                (&["Psi5", "Phi114"], 11, STRICT),
            ],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+E8(2)",
            variant: None,
            forms: &[("Psi60", 60), ("Phi12", 12)],
            kind: EntryKind::Pairwise,
            claims: &[
                (&["Psi60"], 7, STRICT),
                (&["Psi60", "Phi12"], 17, STRICT),
            ],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+D8'(2)",
            variant: None,
            forms: &[("Psi28", 28), ("Phi28", 28)],
            kind: EntryKind::Pairwise,
            claims: &[(&["Psi28", "Phi28"], 13, STRICT)],
            exact: true,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+E6",
            variant: None,
            forms: &[("Phi120", 120), ("G4", 4)],
            kind: identity(0, 1, eisenstein_bracket_constant(&e6, 4)),
            claims: &[(&["Phi120"], 13, STRICT)],
            exact: false,
            notes: &["the identity constant is c = 4 (3 - 4) [156 - 39] = -468"],
        }),
        build(EntrySpec {
            label: "2U+E7",
            variant: None,
            forms: &[("Phi165", 165), ("G4", 4)],
            kind: identity(0, 1, eisenstein_bracket_constant(&e7, 4)),
            claims: &[
                (&["Phi165"], 17, STRICT),
                (&["Phi165"], 19, STRICT),
            ],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+E8",
            variant: None,
            forms: &[("Phi252", 252), ("G8", 8)],
            kind: identity(0, 1, eisenstein_bracket_constant(&e8, 8)),
            claims: &[(&["Phi252"], 31, STRICT)],
            exact: false,
            notes: &[],
        }),
        build(EntrySpec {
            label: "2U+E6",
            variant: Some("M7"),
            forms: &[("Phi120", 120), ("M7", 7)],
            kind: EntryKind::Pairwise,
            claims: &[(&["Phi120", "M7"], 31, STRICT)],
            exact: false,
            notes: &["assumes there is no nonzero form of weight 9 for this group, so the bracket of Phi120 and M7 vanishes"],
        }),
        build(EntrySpec {
            label: "2U+D11",
            variant: None,
            forms: &[("Psi1", 1), ("Phi142", 142)],
            kind: identity(1, 0, rat_int(1950)),
            claims: &[
                (&["Phi142"], 13, STRICT),
                (&["Psi1", "Phi142"], 5, STRICT),
            ],
            exact: false,
            notes: &["the partner here is the reflective form Psi1 rather than an Eisenstein series; the identity reads [Phi142, Psi1] = 1950 Phi142 Psi1^3"],
        }),
    ]
});

/// The full built-in catalog.
pub fn builtin_catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------
//
// The on-disk shape is an array of entries
//
//     { "lattice": "2U+A1", "n": 3,
//       "forms": [{"name": "Psi5", "weight": 5}, ...],
//       "claims": [{"product": ["Psi5"], "prime": 3,
//                   "source": "valuation", "exponent": 1}, ...],
//       "assumptions": ["..."] }
//
// plus optional fields: "variant" to distinguish entries on one lattice,
// "exact" when the valuation predictor is expected to reproduce the claim
// set with nothing extra, and "identity" {f, g, constant} when the claims
// come from a closed bracket identity (those claims carry source
// "identity").  Unknown extra fields are rejected to keep damaged files
// loud.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDto {
    name: String,
    weight: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimDto {
    product: Vec<String>,
    prime: u64,
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentityDto {
    f: String,
    g: String,
    constant: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDto {
    lattice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    n: i64,
    forms: Vec<FormDto>,
    claims: Vec<ClaimDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    identity: Option<IdentityDto>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    exact: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    assumptions: Vec<String>,
}

/// Serialize entries to the interchange JSON (pretty-printed).
pub fn catalog_to_json(entries: &[CatalogEntry]) -> String {
    let dtos: Vec<EntryDto> = entries
        .iter()
        .map(|entry| {
            let identity = match &entry.kind {
                EntryKind::Pairwise => None,
                EntryKind::Identity {
                    f_index,
                    g_index,
                    constant,
                } => Some(IdentityDto {
                    f: entry.forms[*f_index].name.clone(),
                    g: entry.forms[*g_index].name.clone(),
                    constant: constant.to_string(),
                }),
            };
            let claims = entry
                .claims
                .iter()
                .map(|claim| {
                    let (source, exponent) = match (&entry.kind, claim.strength) {
                        (EntryKind::Identity { .. }, Strength::Strict) => ("identity", None),
                        (EntryKind::Identity { .. }, Strength::Valuation { exponent }) => {
                            ("identity", Some(exponent))
                        }
                        (_, Strength::Strict) => ("strict", None),
                        (_, Strength::Valuation { exponent }) => ("valuation", Some(exponent)),
                    };
                    ClaimDto {
                        product: claim.targets.clone(),
                        prime: claim.prime,
                        source: source.to_string(),
                        exponent,
                    }
                })
                .collect();
            EntryDto {
                lattice: entry.label.clone(),
                variant: entry.variant.clone(),
                n: entry.n,
                forms: entry
                    .forms
                    .iter()
                    .map(|f| FormDto {
                        name: f.name.clone(),
                        weight: f.weight,
                    })
                    .collect(),
                claims,
                identity,
                exact: entry.exact_in_valuation,
                assumptions: entry.notes.clone(),
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&dtos).expect("catalog serializes");
    text.push('\n');
    text
}

/// Parse the interchange JSON back into catalog entries, validating the
/// same structural invariants the built-in table satisfies.
pub fn catalog_from_json(text: &str) -> Result<Vec<CatalogEntry>, CatalogError> {
    let bad = |msg: String| CatalogError::BadFile(msg);
    let dtos: Vec<EntryDto> =
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let mut entries = Vec::with_capacity(dtos.len());
    for dto in dtos {
        let context = match &dto.variant {
            Some(v) => format!("{} [{}]", dto.lattice, v),
            None => dto.lattice.clone(),
        };
        // When the label is in the recognized grammar its signature must
        // agree with the stated n; labels outside the grammar keep their
        // stated n so exotic lattices stay usable.
        if let Ok(n) = signature_n(&dto.lattice) {
            if n != dto.n {
                return Err(bad(format!(
                    "{context}: lattice has signature ({n}, 2) but the entry says n = {}",
                    dto.n
                )));
            }
        }
        let names: BTreeSet<&str> = dto.forms.iter().map(|f| f.name.as_str()).collect();
        if names.len() != dto.forms.len() {
            return Err(bad(format!("{context}: duplicate form names")));
        }
        let kind = match &dto.identity {
            None => EntryKind::Pairwise,
            Some(id) => {
                let index_of = |name: &str| {
                    dto.forms.iter().position(|f| f.name == name).ok_or_else(|| {
                        bad(format!(
                            "{context}: identity partner `{name}` is not a listed form"
                        ))
                    })
                };
                let f_index = index_of(&id.f)?;
                let g_index = index_of(&id.g)?;
                if f_index == g_index {
                    return Err(bad(format!(
                        "{context}: identity needs two distinct forms"
                    )));
                }
                let constant = Rat::from_str(&id.constant).map_err(|_| {
                    bad(format!(
                        "{context}: bad identity constant `{}`",
                        id.constant
                    ))
                })?;
                if constant.is_zero() {
                    return Err(bad(format!(
                        "{context}: identity constant must be nonzero"
                    )));
                }
                EntryKind::Identity {
                    f_index,
                    g_index,
                    constant,
                }
            }
        };
        let mut claims = Vec::with_capacity(dto.claims.len());
        for claim in &dto.claims {
            if claim.product.is_empty() {
                return Err(bad(format!("{context}: claim with empty product")));
            }
            for target in &claim.product {
                if !names.contains(target.as_str()) {
                    return Err(bad(format!(
                        "{context}: claim target `{target}` is not a listed form"
                    )));
                }
            }
            if claim.prime < 2 {
                return Err(bad(format!(
                    "{context}: claim modulus {} is not a prime",
                    claim.prime
                )));
            }
            let strength = match claim.source.as_str() {
                "strict" => Strength::Strict,
                "valuation" => Strength::Valuation {
                    exponent: claim.exponent.unwrap_or(1),
                },
                "identity" => {
                    if dto.identity.is_none() {
                        return Err(bad(format!(
                            "{context}: claim sourced from an identity, but the entry has none"
                        )));
                    }
                    match claim.exponent {
                        Some(e) if e > 1 => Strength::Valuation { exponent: e },
                        _ => Strength::Strict,
                    }
                }
                other => {
                    return Err(bad(format!(
                        "{context}: unknown claim source `{other}`"
                    )));
                }
            };
            claims.push(Claim {
                targets: claim.product.clone(),
                prime: claim.prime,
                strength,
            });
        }
        entries.push(CatalogEntry {
            label: dto.lattice,
            variant: dto.variant,
            n: dto.n,
            forms: dto
                .forms
                .into_iter()
                .map(|f| CatalogForm {
                    name: f.name,
                    weight: f.weight,
                })
                .collect(),
            kind,
            claims,
            exact_in_valuation: dto.exact,
            notes: dto.assumptions,
        });
    }
    Ok(entries)
}

/// Find entries by label (several entries may share a lattice).
pub fn entries_for_label(label: &str) -> Vec<&'static CatalogEntry> {
    builtin_catalog()
        .iter()
        .filter(|e| e.label.eq_ignore_ascii_case(label))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_of_all_catalog_labels() {
        for (label, n) in [
            ("2U+A1", 3),
            ("2U+A1(2)", 3),
            ("2U+A1(3)", 3),
            ("2U+A2", 4),
            ("2U(2)+A2", 4),
            ("2U+2A1", 4),
            ("2U+A3", 5),
            ("2U+D4", 6),
            ("2U+2A2", 6),
            ("2U+D5", 7),
            ("2U+D6", 8),
            ("2U+E6'(3)", 8),
            ("2U+2A3", 8),
            ("2U+D7", 9),
            ("2U+E8(2)", 10),
            ("2U+D8'(2)", 10),
            ("2U+E6", 8),
            ("2U+E7", 9),
            ("2U+E8", 10),
            ("2U+D11", 13),
        ] {
            assert_eq!(signature_n(label).unwrap(), n, "label {label}");
        }
    }

    #[test]
    fn bad_labels_are_rejected() {
        for label in ["", "2V+A1", "2U+", "2U+A0", "2U+E9", "2U+A1(0)", "2U+A1(2"] {
            assert!(signature_n(label).is_err(), "label {label:?}");
        }
    }

    #[test]
    fn coxeter_numbers() {
        for (family, rank, h) in [
            ('A', 1, 2),
            ('A', 2, 3),
            ('A', 3, 4),
            ('D', 4, 6),
            ('D', 11, 20),
            ('E', 6, 12),
            ('E', 7, 18),
            ('E', 8, 30),
        ] {
            assert_eq!(RootSystem::new(family, rank).unwrap().coxeter(), h);
        }
    }

    #[test]
    fn weyl_vector_norms() {
        // Q(rho) = h (h + 1) d / 24
        let e6 = RootSystem::new('E', 6).unwrap();
        assert_eq!(e6.weyl_vector_norm(), rat_int(39));
        let e8 = RootSystem::new('E', 8).unwrap();
        assert_eq!(e8.weyl_vector_norm(), rat_int(310));
        let d11 = RootSystem::new('D', 11).unwrap();
        assert_eq!(d11.weyl_vector_norm(), rat(385, 2));
    }

    #[test]
    fn eisenstein_constants_for_the_identity_entries() {
        let e6 = RootSystem::new('E', 6).unwrap();
        assert_eq!(eisenstein_bracket_constant(&e6, 4), rat_int(-468));
        let e7 = RootSystem::new('E', 7).unwrap();
        assert_eq!(eisenstein_bracket_constant(&e7, 4), rat(-969, 2));
        let e8 = RootSystem::new('E', 8).unwrap();
        assert_eq!(eisenstein_bracket_constant(&e8, 8), rat_int(-19840));
    }

    #[test]
    fn catalog_is_structurally_sound() {
        let catalog = builtin_catalog();
        assert_eq!(catalog.len(), 22);
        let total: usize = catalog.iter().map(|e| e.claims.len()).sum();
        assert_eq!(total, 65);
        let mut labels = BTreeSet::new();
        for entry in catalog {
            assert_eq!(signature_n(&entry.label).unwrap(), entry.n);
            assert!(
                labels.insert((entry.label.clone(), entry.variant.clone())),
                "duplicate entry {}",
                entry.display_label()
            );
            let names: BTreeSet<&str> =
                entry.forms.iter().map(|f| f.name.as_str()).collect();
            assert_eq!(names.len(), entry.forms.len(), "{}", entry.display_label());
            for claim in &entry.claims {
                assert!(!claim.targets.is_empty());
                assert!(claim.prime >= 2);
                for target in &claim.targets {
                    assert!(
                        names.contains(target.as_str()),
                        "claim target {} missing in {}",
                        target,
                        entry.display_label()
                    );
                }
            }
            if let EntryKind::Identity { f_index, g_index, .. } = &entry.kind {
                assert!(*f_index < entry.forms.len());
                assert!(*g_index < entry.forms.len());
                assert_ne!(f_index, g_index);
            }
        }
    }

    #[test]
    fn valuation_claims_are_the_expected_seven() {
        let mut found = Vec::new();
        for entry in builtin_catalog() {
            for claim in &entry.claims {
                if let Strength::Valuation { exponent } = claim.strength {
                    found.push((
                        entry.display_label(),
                        claim.targets.join(""),
                        claim.prime,
                        exponent,
                    ));
                }
            }
        }
        let expected = [
            ("2U+A1", "Psi5", 3, 1),
            ("2U+A1(2)", "Psi2Phi12", 3, 2),
            ("2U+A2", "Psi9", 2, 1),
            ("2U+2A1", "Psi10", 3, 1),
            ("2U+2A2", "Phi42", 2, 1),
            ("2U+D6", "Phi102", 3, 1),
            ("2U+2A3", "Phi48", 3, 1),
        ];
        assert_eq!(found.len(), expected.len());
        for ((label, product, prime, exp), (elabel, eproduct, eprime, eexp)) in
            found.iter().zip(expected.iter())
        {
            assert_eq!(label, elabel);
            assert_eq!(product, eproduct);
            assert_eq!(*prime, *eprime as u64);
            assert_eq!(*exp, *eexp as u32);
        }
    }

    #[test]
    fn json_round_trips_the_builtin_catalog() {
        let text = catalog_to_json(builtin_catalog());
        let back = catalog_from_json(&text).unwrap();
        assert_eq!(back, builtin_catalog());
    }

    #[test]
    fn json_export_shape() {
        let text = catalog_to_json(builtin_catalog());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let first = &value[0];
        assert_eq!(first["lattice"], "2U+A1");
        assert_eq!(first["n"], 3);
        assert_eq!(first["forms"][0]["name"], "Psi5");
        assert_eq!(first["forms"][0]["weight"], 5);
        assert_eq!(first["claims"][0]["product"][0], "Psi5");
        assert_eq!(first["claims"][0]["prime"], 3);
        assert_eq!(first["claims"][0]["source"], "valuation");
        assert_eq!(first["claims"][0]["exponent"], 1);
        assert_eq!(first["claims"][1]["source"], "strict");
        assert!(first["claims"][1].get("exponent").is_none());
        let d11 = value
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["lattice"] == "2U+D11")
            .unwrap();
        assert_eq!(d11["identity"]["f"], "Phi142");
        assert_eq!(d11["identity"]["g"], "Psi1");
        assert_eq!(d11["identity"]["constant"], "1950");
        assert_eq!(d11["claims"][0]["source"], "identity");
        let e7 = value
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["lattice"] == "2U+E7")
            .unwrap();
        assert_eq!(e7["identity"]["constant"], "-969/2");
    }

    #[test]
    fn json_import_rejects_damaged_files() {
        let ok = r#"[{"lattice": "2U+A1", "n": 3,
            "forms": [{"name": "F", "weight": 5}],
            "claims": [{"product": ["F"], "prime": 3, "source": "strict"}]}]"#;
        assert_eq!(catalog_from_json(ok).unwrap().len(), 1);
        for (label, text) in [
            ("wrong n", r#"[{"lattice": "2U+A1", "n": 7, "forms": [], "claims": []}]"#),
            (
                "unknown source",
                r#"[{"lattice": "2U+A1", "n": 3,
                    "forms": [{"name": "F", "weight": 5}],
                    "claims": [{"product": ["F"], "prime": 3, "source": "hope"}]}]"#,
            ),
            (
                "identity claim without identity",
                r#"[{"lattice": "2U+A1", "n": 3,
                    "forms": [{"name": "F", "weight": 5}],
                    "claims": [{"product": ["F"], "prime": 3, "source": "identity"}]}]"#,
            ),
            (
                "unlisted claim target",
                r#"[{"lattice": "2U+A1", "n": 3,
                    "forms": [{"name": "F", "weight": 5}],
                    "claims": [{"product": ["G"], "prime": 3, "source": "strict"}]}]"#,
            ),
            (
                "zero identity constant",
                r#"[{"lattice": "2U+A1", "n": 3,
                    "forms": [{"name": "F", "weight": 5}, {"name": "G", "weight": 4}],
                    "identity": {"f": "F", "g": "G", "constant": "0"},
                    "claims": []}]"#,
            ),
            (
                "unknown field",
                r#"[{"lattice": "2U+A1", "n": 3, "forms": [], "claims": [], "surprise": 1}]"#,
            ),
        ] {
            assert!(
                matches!(catalog_from_json(text), Err(CatalogError::BadFile(_))),
                "case `{label}` should be rejected"
            );
        }
    }

    #[test]
    fn json_import_accepts_unrecognized_lattice_grammar() {
        // Labels outside the label grammar keep their stated n.
        let text = r#"[{"lattice": "2U+K12", "n": 12,
            "forms": [{"name": "F", "weight": 10}],
            "claims": [{"product": ["F"], "prime": 5, "source": "valuation"}]}]"#;
        let entries = catalog_from_json(text).unwrap();
        assert_eq!(entries[0].n, 12);
        assert_eq!(
            entries[0].claims[0].strength,
            Strength::Valuation { exponent: 1 }
        );
    }

    #[test]
    fn pretty_names() {
        assert_eq!(pretty_name("Psi5"), "Ψ5");
        assert_eq!(pretty_name("Phi30"), "Φ30");
        assert_eq!(pretty_name("Chi10"), "χ10");
        assert_eq!(pretty_name("G4"), "G4");
        assert_eq!(
            pretty_product(&["Psi5".to_string(), "Phi30".to_string()]),
            "Ψ5Φ30"
        );
    }
}
