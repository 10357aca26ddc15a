//! Mod-p singularity certification and prime prediction.
//!
//! A form with integer Fourier coefficients is *singular modulo p* when
//! every coefficient off the mod-p quadric vanishes: a(lambda) ≡ 0 (mod p)
//! whenever D(lambda) ≢ 0 (mod p).  The Fourier half of this module checks
//! that property on concrete series: [`check_singular`] certifies one prime
//! up to a precision bound and [`scan_primes`] sweeps every admissible
//! prime below a limit.
//!
//! The symbolic half predicts candidate primes without any Fourier data,
//! from the bracket prefactors A = n/2-1-k, B = n/2-1-l, C = n/2-1-k-l
//! alone:
//!
//! * **strict** mode uses plain divisibility of the numerators (p divides
//!   num(A) but neither the partner weight nor num(B), and so on);
//! * **valuation** mode compares p-adic valuations and can report
//!   congruence exponents s >= 2 (congruences modulo p^s);
//! * **identity** mode strengthens the estimate when a closed bracket
//!   evaluation [F, G] = c * F * G' with a nonzero rational constant c is
//!   known.
//!
//! [`run_catalog`] replays a whole claim table through the predictor and
//! reports matched claims, misses, and surplus predictions.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bracket::{bracket_coefficients, BracketCoefficients};
use crate::catalog::{pretty_product, CatalogEntry, EntryKind, RootSystem, Strength};
use crate::exact::{factor_int, is_prime, primes_up_to, valuation, ExactError, Int, Rat};
use crate::series::ortho::{IndexKey, OrthoSeries, Parity};

#[derive(Debug, Error)]
pub enum CongruenceError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("prime {prime} divides the index denominator D_F = {d_f}")]
    PrimeDividesDf { prime: u64, d_f: u64 },
    #[error("coefficient at index {index:?} is not an integer")]
    NotIntegral { index: (i64, i64, i64) },
    #[error("series has empty support")]
    EmptySupport,
    #[error("requested precision {requested} exceeds the series bound {available}")]
    PrecisionTooLow { requested: i64, available: i64 },
    #[error("identity right-hand constant must be nonzero")]
    IdentityConstantZero,
    #[error("unknown predictor mode `{0}` (expected `strict` or `valuation`)")]
    BadMode(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

// ---------------------------------------------------------------------------
// Fourier-side certification
// ---------------------------------------------------------------------------

/// The denominator bound of the quadratic form on the support: the smallest
/// positive D such that D * D(lambda) / 16 is an integer for every index in
/// the support.  Odd-parity series give 16, even-parity series divide 4.
pub fn compute_df(form: &OrthoSeries) -> Result<u64, CongruenceError> {
    let mut g: u64 = 0;
    let mut any = false;
    for (key, coeff) in form.terms() {
        if coeff.is_zero() {
            continue;
        }
        any = true;
        g = g.gcd(&key.disc().unsigned_abs());
    }
    if !any {
        return Err(CongruenceError::EmptySupport);
    }
    Ok(16 / g.gcd(&16))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    /// No violations and at least one constrained index was verified.
    Pass,
    /// At least one coefficient off the quadric is nonzero mod p.
    Fail,
    /// No violations, but no index was constrained either.
    Vacuous,
}

/// One counterexample: a support index off the mod-p quadric whose
/// coefficient does not vanish mod p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// The doubled index (N, R, M).
    pub index: (i64, i64, i64),
    pub coeff_mod_p: u64,
    pub disc_mod_p: u64,
}

/// Machine-checkable record of one mod-p singularity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub form: String,
    pub prime: u64,
    pub prec: i64,
    pub d_f: u64,
    pub status: CertStatus,
    /// Support indices examined (within the precision bound).
    pub checked_count: u64,
    /// Indices with D(lambda) nonzero mod p whose coefficient vanished.
    pub witnesses_nonvacuous: u64,
    pub violations: Vec<Violation>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.status == CertStatus::Pass
    }
}

fn residue(value: &Int, p: u64) -> u64 {
    value
        .mod_floor(&Int::from(p))
        .to_u64()
        .expect("residue fits in a word")
}

/// All positive-semidefinite indices of one parity class with
/// N + M <= 2 * prec: N, M >= 0 and R^2 <= 4NM.  Within the precision
/// box the sparse store is exact, so every index listed here has a
/// definite coefficient (zero when absent) and is a genuine test of the
/// congruence.
fn semidefinite_box(parity: Parity, prec: i64) -> Vec<IndexKey> {
    let start = match parity {
        Parity::Integral => 0,
        Parity::HalfIntegral => 1,
    };
    let mut keys = Vec::new();
    let mut n = start;
    while n <= 2 * prec {
        let mut m = start;
        while n + m <= 2 * prec {
            let r_max = (4 * n * m).sqrt();
            let r = if r_max % 2 == start % 2 { r_max } else { r_max - 1 };
            if r < 0 {
                // The odd class has no R = 0; skip (N, M) pairs whose
                // cone slice misses every odd R.
                m += 2;
                continue;
            }
            let mut rs = -r;
            while rs <= r {
                keys.push(IndexKey::new(n, rs, m));
                rs += 2;
            }
            m += 2;
        }
        n += 2;
    }
    keys
}

/// Certify that `form` is singular modulo `prime` on all layers with
/// N + M <= 2 * prec.  Every positive-semidefinite index in the box is
/// tested (coefficients absent from the sparse store are exactly zero
/// there), plus any stored index outside the cone.  Composite moduli,
/// primes dividing D_F, and non-integer coefficients are contract
/// violations, reported as errors rather than failed certificates.
pub fn check_singular(
    name: &str,
    form: &OrthoSeries,
    prime: u64,
    prec: i64,
) -> Result<Certificate, CongruenceError> {
    if !is_prime(prime) {
        return Err(CongruenceError::NotPrime(prime));
    }
    if prec > form.prec() {
        return Err(CongruenceError::PrecisionTooLow {
            requested: prec,
            available: form.prec(),
        });
    }
    let d_f = compute_df(form)?;
    if d_f % prime == 0 {
        return Err(CongruenceError::PrimeDividesDf { prime, d_f });
    }
    for (key, coeff) in form.terms() {
        if key.total() <= 2 * prec && !coeff.is_zero() && !coeff.denom().is_one() {
            return Err(CongruenceError::NotIntegral {
                index: (key.n, key.r, key.m),
            });
        }
    }

    let mut tested = semidefinite_box(form.parity(), prec);
    tested.extend(form.terms().filter_map(|(key, coeff)| {
        let outside_cone = key.disc() < 0 || key.n < 0 || key.m < 0;
        (key.total() <= 2 * prec && !coeff.is_zero() && outside_cone).then_some(*key)
    }));

    let mut checked_count = 0u64;
    let mut witnesses_nonvacuous = 0u64;
    let mut violations = Vec::new();
    for key in tested {
        checked_count += 1;
        let disc_mod_p = key.disc().rem_euclid(prime as i64) as u64;
        if disc_mod_p == 0 {
            continue;
        }
        let coeff = form.coeff(&key);
        let coeff_mod_p = residue(coeff.numer(), prime);
        if coeff_mod_p == 0 {
            witnesses_nonvacuous += 1;
        } else {
            violations.push(Violation {
                index: (key.n, key.r, key.m),
                coeff_mod_p,
                disc_mod_p,
            });
        }
    }

    let status = if !violations.is_empty() {
        CertStatus::Fail
    } else if witnesses_nonvacuous > 0 {
        CertStatus::Pass
    } else {
        CertStatus::Vacuous
    };
    Ok(Certificate {
        form: name.to_string(),
        prime,
        prec,
        d_f,
        status,
        checked_count,
        witnesses_nonvacuous,
        violations,
    })
}

/// Run [`check_singular`] for every prime up to `max_prime`, skipping the
/// primes that divide D_F.  The result is ordered by prime.
pub fn scan_primes(
    name: &str,
    form: &OrthoSeries,
    prec: i64,
    max_prime: u64,
) -> Result<Vec<Certificate>, CongruenceError> {
    let d_f = compute_df(form)?;
    let primes: Vec<u64> = primes_up_to(max_prime)
        .into_iter()
        .filter(|p| d_f % p != 0)
        .collect();
    primes
        .par_iter()
        .map(|&p| check_singular(name, form, p, prec))
        .collect()
}

// ---------------------------------------------------------------------------
// symbolic prediction
// ---------------------------------------------------------------------------

/// How candidate primes are justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Plain divisibility of the prefactor numerators; every result has
    /// exponent 1.
    Strict,
    /// p-adic valuation comparison; can yield exponents s >= 2 and strictly
    /// contains the strict results.
    Valuation,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Valuation => "valuation",
        }
    }
}

impl FromStr for Mode {
    type Err = CongruenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(Mode::Strict),
            "valuation" => Ok(Mode::Valuation),
            other => Err(CongruenceError::BadMode(other.to_string())),
        }
    }
}

/// Geometric hypotheses under which the predicted congruences hold.  They
/// are attached verbatim to every report and never validated here.
pub const PAIRWISE_ASSUMPTIONS: [&str; 4] = [
    "reflective, simple disjoint zeros",
    "partner form not ≡ 0 mod p",
    "p ∤ D_F",
    "no weight-2 forms",
];

/// One predicted congruence: the sub-product of the input forms indexed by
/// `target_indices` is singular modulo `prime^exponent`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// Positions into the weight list of the report (disambiguates families
    /// with repeated weights).  Not serialized; `target` carries the
    /// weights.
    #[serde(skip)]
    pub target_indices: Vec<usize>,
    #[serde(rename = "target")]
    pub target_weights: Vec<i64>,
    pub prime: u64,
    /// Congruence exponent s: singular modulo p^s, s >= 1.
    pub exponent: u32,
    /// The bracket pairing that witnessed the best exponent.
    pub pairing: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub n: i64,
    pub weights: Vec<i64>,
    pub mode: String,
    pub results: Vec<Prediction>,
    pub assumptions: Vec<String>,
}

/// Which series of the bracket identity a prediction concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    F,
    G,
    Fg,
}

/// v_p of a rational, `None` standing for +infinity (the zero value).
fn vp(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(valuation(x, p).expect("candidate primes are prime"))
    }
}

// A vanishing prefactor kills the corresponding bracket term entirely, so
// it never helps: the positive condition "p | num(X)" fails on 0 (no
// leverage), and the negative condition "p does not divide num(Y)" also
// fails on 0 (every prime divides 0).  This keeps the strict results a
// subset of the valuation results at the degenerate weights.

fn num_divisible(x: &Rat, p: u64) -> bool {
    !x.is_zero() && (x.numer() % Int::from(p)).is_zero()
}

fn num_coprime(x: &Rat, p: u64) -> bool {
    !x.is_zero() && !(x.numer() % Int::from(p)).is_zero()
}

fn candidate_primes(values: &[&Rat]) -> BTreeSet<u64> {
    let mut primes = BTreeSet::new();
    for value in values {
        if value.is_zero() {
            continue;
        }
        if let Ok(f) = factor_int(value.numer()) {
            primes.extend(f.primes());
        }
    }
    primes
}

/// The core of both pairwise modes for a single (k, l) pairing.
fn pair_slot_predictions(
    co: &BracketCoefficients,
    k: i64,
    l: i64,
    mode: Mode,
) -> Vec<(Slot, u64, u32)> {
    let mut out = Vec::new();
    for &p in &candidate_primes(&[&co.a, &co.b, &co.c]) {
        let q = p as i64;
        match mode {
            Mode::Strict => {
                // (F, p): p | num(A), p does not divide l or num(B).
                if num_divisible(&co.a, p) && l % q != 0 && num_coprime(&co.b, p) {
                    out.push((Slot::F, p, 1));
                }
                // (G, p): p | num(B), p does not divide k or num(A).
                if num_divisible(&co.b, p) && k % q != 0 && num_coprime(&co.a, p) {
                    out.push((Slot::G, p, 1));
                }
                // (FG, p): p | num(C), p divides neither weight.
                if num_divisible(&co.c, p) && k % q != 0 && l % q != 0 {
                    out.push((Slot::Fg, p, 1));
                }
            }
            Mode::Valuation => {
                let va = vp(&co.a, p);
                let vb = vp(&co.b, p);
                let vc = vp(&co.c, p);
                // max with +infinity (a zero prefactor) is +infinity: the
                // slot cannot be isolated, so it is skipped.
                let finite_max = |x: Option<i64>, y: Option<i64>| match (x, y) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
                let table = [
                    (Slot::F, va, finite_max(vb, vc)),
                    (Slot::G, vb, finite_max(va, vc)),
                    (Slot::Fg, vc, finite_max(va, vb)),
                ];
                for (slot, num, sub) in table {
                    if let (Some(nv), Some(dv)) = (num, sub) {
                        let s = nv - dv;
                        if s >= 1 {
                            out.push((slot, p, s as u32));
                        }
                    }
                }
            }
        }
    }
    out
}

fn mask_indices(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).collect()
}

fn mask_weight(weights: &[i64], mask: usize) -> i64 {
    mask_indices(mask).iter().map(|&i| weights[i]).sum()
}

fn mask_desc(weights: &[i64], mask: usize) -> String {
    mask_indices(mask)
        .iter()
        .map(|&i| weights[i].to_string())
        .collect::<Vec<_>>()
        .join("*")
}

/// Predict singular primes for every sub-product of a family of forms of
/// the given weights on a domain of signature (n, 2), by running the
/// two-slot calculus over all disjoint pairs of sub-products.  When several
/// pairings yield the same (target, prime), the best exponent wins.
pub fn predict_family(n: i64, weights: &[i64], mode: Mode) -> PredictionReport {
    assert!(
        weights.len() < usize::BITS as usize,
        "family too large to enumerate"
    );
    let full = 1usize << weights.len();
    let mut best: BTreeMap<(Vec<usize>, u64), (u32, String)> = BTreeMap::new();
    for s in 1..full {
        for t in (s + 1)..full {
            if s & t != 0 {
                continue;
            }
            let (ks, kt) = (mask_weight(weights, s), mask_weight(weights, t));
            let co = bracket_coefficients(n, ks, kt);
            let found = pair_slot_predictions(&co, ks, kt, mode);
            if found.is_empty() {
                continue;
            }
            let pairing = format!("{} | {}", mask_desc(weights, s), mask_desc(weights, t));
            for (slot, prime, exponent) in found {
                let mask = match slot {
                    Slot::F => s,
                    Slot::G => t,
                    Slot::Fg => s | t,
                };
                let entry = best
                    .entry((mask_indices(mask), prime))
                    .or_insert((0, String::new()));
                if exponent > entry.0 {
                    *entry = (exponent, pairing.clone());
                }
            }
        }
    }
    let results = best
        .into_iter()
        .map(|((indices, prime), (exponent, pairing))| Prediction {
            target_weights: indices.iter().map(|&i| weights[i]).collect(),
            target_indices: indices,
            prime,
            exponent,
            pairing,
        })
        .collect();
    PredictionReport {
        n,
        weights: weights.to_vec(),
        mode: mode.as_str().to_string(),
        results,
        assumptions: PAIRWISE_ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
    }
}

/// The two-form special case of [`predict_family`].
pub fn predict_pair(n: i64, k: i64, l: i64, mode: Mode) -> PredictionReport {
    predict_family(n, &[k, l], mode)
}

/// Add with +infinity absorbing (`None` = infinite).
fn add_vp(x: Option<i64>, y: Option<i64>) -> Option<i64> {
    Some(x? + y?)
}

/// Min over valuations where `None` means +infinity; `None` comes back only
/// when every entry is infinite.
fn min_vp(values: [Option<i64>; 3]) -> Option<i64> {
    values.into_iter().flatten().min()
}

/// Exponents from a closed identity [F, G] = rhs * F * G'.  `rhs = None`
/// is the degenerate sentinel v_p(rhs) = +infinity, under which the F and
/// G slots reduce to the plain valuation formulas.
fn identity_slot_predictions(
    co: &BracketCoefficients,
    rhs: Option<&Rat>,
    p: u64,
) -> Vec<(Slot, u32)> {
    let va = vp(&co.a, p);
    let vb = vp(&co.b, p);
    let vc = vp(&co.c, p);
    let vr = rhs.and_then(|c| vp(c, p));
    let vab = add_vp(va, vb);
    let vac = add_vp(va, vc);
    let vbc = add_vp(vb, vc);
    let table = [
        (Slot::F, min_vp([vab, vac, vr]), vbc),
        (Slot::G, min_vp([vab, vbc, vr]), vac),
        (Slot::Fg, min_vp([vbc, vac, vr]), vab),
    ];
    let mut out = Vec::new();
    for (slot, num, sub) in table {
        if let (Some(nv), Some(dv)) = (num, sub) {
            let s = nv - dv;
            if s >= 1 {
                out.push((slot, s as u32));
            }
        }
    }
    out
}

/// Predict singular primes for F (weight k), G (weight l) and FG given the
/// closed bracket evaluation [F, G] = rhs_constant * F * G'.  Errors when
/// the constant is zero, since the identity then gives no leverage.
pub fn predict_identity(
    n: i64,
    k: i64,
    l: i64,
    rhs_constant: &Rat,
) -> Result<PredictionReport, CongruenceError> {
    if rhs_constant.is_zero() {
        return Err(CongruenceError::IdentityConstantZero);
    }
    let co = bracket_coefficients(n, k, l);
    let mut best: BTreeMap<(Vec<usize>, u64), u32> = BTreeMap::new();
    for &p in &candidate_primes(&[&co.a, &co.b, &co.c, rhs_constant]) {
        for (slot, exponent) in identity_slot_predictions(&co, Some(rhs_constant), p) {
            let indices = match slot {
                Slot::F => vec![0],
                Slot::G => vec![1],
                Slot::Fg => vec![0, 1],
            };
            let entry = best.entry((indices, p)).or_insert(0);
            if exponent > *entry {
                *entry = exponent;
            }
        }
    }
    let weights = [k, l];
    let pairing = format!("{k} | {l} (identity)");
    let results = best
        .into_iter()
        .map(|((indices, prime), exponent)| Prediction {
            target_weights: indices.iter().map(|&i| weights[i]).collect(),
            target_indices: indices,
            prime,
            exponent,
            pairing: pairing.clone(),
        })
        .collect();
    let mut assumptions: Vec<String> =
        PAIRWISE_ASSUMPTIONS.iter().map(|s| s.to_string()).collect();
    assumptions.push(format!("bracket identity with constant c = {rhs_constant}"));
    Ok(PredictionReport {
        n,
        weights: weights.to_vec(),
        mode: "identity".to_string(),
        results,
        assumptions,
    })
}

/// The constant of the Eisenstein bracket evaluation [F, E_l] = c F E_l'
/// for a root system: c = l (d/2 - l) (h(h+1) - Q(rho)).  The weight `k`
/// of the partner form is part of the interface but the constant does not
/// depend on it.
pub fn eisenstein_constant(root: &RootSystem, _k: i64, l: i64) -> Rat {
    crate::catalog::eisenstein_bracket_constant(root, l)
}

// ---------------------------------------------------------------------------
// catalog regression
// ---------------------------------------------------------------------------

/// One claim of the table matched against the predictor output.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimOutcome {
    pub targets: Vec<String>,
    pub prime: u64,
    /// "strict" claims must be found in both modes with s >= 1;
    /// "valuation" claims only in valuation mode, with at least the stated
    /// exponent.
    pub strength: &'static str,
    pub required_exponent: u32,
    pub found_exponent: Option<u32>,
    pub pairing: Option<String>,
}

impl ClaimOutcome {
    pub fn matched(&self) -> bool {
        self.found_exponent
            .is_some_and(|e| e >= self.required_exponent)
    }
}

/// A predicted congruence the table does not claim.  Harmless unless the
/// entry is flagged mode-exact.
#[derive(Debug, Clone, Serialize)]
pub struct SurplusPrediction {
    pub targets: Vec<String>,
    pub prime: u64,
    pub exponent: u32,
    pub pairing: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryOutcome {
    pub label: String,
    pub n: i64,
    pub claims: Vec<ClaimOutcome>,
    pub extras: Vec<SurplusPrediction>,
    /// Whether the entry promises that the valuation predictions are
    /// exactly the claims, with nothing extra.
    pub mode_exact: bool,
    /// `Some` only for mode-exact entries: no misses and no extras.
    pub exact_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub mode: String,
    pub entries: Vec<EntryOutcome>,
    pub total_claims: usize,
    pub matched: usize,
    /// Human-readable descriptions of unmatched claims; must be empty.
    pub missed: Vec<String>,
    pub pass: bool,
}

/// Replay a claim table against the predictor.  Every claim must be
/// recovered with at least its stated exponent (strict claims in both
/// modes, valuation claims in valuation mode); entries flagged exact must
/// produce nothing beyond their claims.
pub fn run_catalog(entries: &[CatalogEntry], mode: Mode) -> CatalogReport {
    let mut outcomes = Vec::new();
    let mut total_claims = 0;
    let mut matched = 0;
    let mut missed = Vec::new();

    for entry in entries {
        let weights: Vec<i64> = entry.forms.iter().map(|f| f.weight).collect();
        let predictions: Vec<Prediction> = match &entry.kind {
            EntryKind::Pairwise => predict_family(entry.n, &weights, mode).results,
            EntryKind::Identity {
                f_index,
                g_index,
                constant,
            } => {
                let report = predict_identity(entry.n, weights[*f_index], weights[*g_index], constant)
                    .expect("catalog identity constants are nonzero");
                // The identity report indexes its two forms 0 and 1; remap
                // into the entry's form list.
                let map = [*f_index, *g_index];
                report
                    .results
                    .into_iter()
                    .map(|mut p| {
                        let mut indices: Vec<usize> =
                            p.target_indices.iter().map(|&i| map[i]).collect();
                        indices.sort_unstable();
                        p.target_weights = indices.iter().map(|&i| weights[i]).collect();
                        p.target_indices = indices;
                        p
                    })
                    .collect()
            }
        };
        let named = |indices: &[usize]| -> Vec<String> {
            indices
                .iter()
                .map(|&i| entry.forms[i].name.clone())
                .collect()
        };

        let mut claims_out = Vec::new();
        for claim in &entry.claims {
            let (strength, required_exponent, expected_here) = match claim.strength {
                Strength::Strict => ("strict", 1, true),
                Strength::Valuation { exponent } => {
                    ("valuation", exponent, mode == Mode::Valuation)
                }
            };
            if !expected_here {
                continue;
            }
            total_claims += 1;
            let claim_set = claim.target_set();
            let found = predictions.iter().find(|p| {
                p.prime == claim.prime
                    && named(&p.target_indices)
                        .iter()
                        .map(|s| s.as_str())
                        .collect::<BTreeSet<_>>()
                        == claim_set
            });
            let outcome = ClaimOutcome {
                targets: claim.targets.clone(),
                prime: claim.prime,
                strength,
                required_exponent,
                found_exponent: found.map(|p| p.exponent),
                pairing: found.map(|p| p.pairing.clone()),
            };
            if outcome.matched() {
                matched += 1;
            } else {
                missed.push(format!(
                    "{}: {} mod {}^{} ({})",
                    entry.display_label(),
                    pretty_product(&claim.targets),
                    claim.prime,
                    required_exponent,
                    strength,
                ));
            }
            claims_out.push(outcome);
        }

        let extras: Vec<SurplusPrediction> = predictions
            .iter()
            .filter(|p| {
                let names: BTreeSet<String> = named(&p.target_indices).into_iter().collect();
                !entry.claims.iter().any(|c| {
                    c.prime == p.prime
                        && c.targets.iter().cloned().collect::<BTreeSet<_>>() == names
                })
            })
            .map(|p| SurplusPrediction {
                targets: named(&p.target_indices),
                prime: p.prime,
                exponent: p.exponent,
                pairing: p.pairing.clone(),
            })
            .collect();

        let exact_ok = entry.exact_in_valuation.then(|| {
            extras.is_empty() && claims_out.iter().all(|c| c.matched())
        });
        outcomes.push(EntryOutcome {
            label: entry.display_label(),
            n: entry.n,
            claims: claims_out,
            extras,
            mode_exact: entry.exact_in_valuation,
            exact_ok,
        });
    }

    let pass = missed.is_empty()
        && outcomes
            .iter()
            .all(|e| e.exact_ok.unwrap_or(true));
    CatalogReport {
        mode: mode.as_str().to_string(),
        entries: outcomes,
        total_claims,
        matched,
        missed,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;
    use crate::exact::{rat, rat_int};
    use crate::igusa::test_support::TOWER;
    use crate::series::ortho::IndexKey;
    use num_traits::One;

    fn monomial(n: i64, r: i64, m: i64) -> OrthoSeries {
        OrthoSeries::monomial(IndexKey { n, r, m }, Rat::one(), 8).unwrap()
    }

    fn find<'a>(report: &'a PredictionReport, indices: &[usize], prime: u64) -> Option<&'a Prediction> {
        report
            .results
            .iter()
            .find(|p| p.target_indices == indices && p.prime == prime)
    }

    // --- D_F -------------------------------------------------------------

    #[test]
    fn df_of_odd_parity_monomial_is_sixteen() {
        // [TRIVIAL] disc(1,1,1) = 3, coprime to 16.
        assert_eq!(compute_df(&monomial(1, 1, 1)).unwrap(), 16);
    }

    #[test]
    fn df_examples_on_the_tower() {
        // [DERIVED] odd-R doubled indices leave a factor 4; Psi5's odd
        // parity class leaves the full 16.
        assert_eq!(compute_df(&TOWER.phi35.series).unwrap(), 4);
        assert_eq!(compute_df(&TOWER.psi5.series).unwrap(), 16);
        assert_eq!(compute_df(&monomial(2, 0, 2)).unwrap(), 1);
    }

    #[test]
    fn df_rejects_empty_support() {
        let zero = OrthoSeries::zero(crate::series::ortho::Parity::Integral, 4);
        assert!(matches!(
            compute_df(&zero),
            Err(CongruenceError::EmptySupport)
        ));
    }

    // --- certificates ----------------------------------------------------

    #[test]
    fn tower_certificates_pass() {
        // [PAPER] the three headline congruences of the realized tower.
        for (form, p) in [(&TOWER.psi5, 3u64), (&TOWER.phi30, 59), (&TOWER.phi35, 23)] {
            let cert = check_singular(form.name, &form.series, p, 6).unwrap();
            assert_eq!(cert.status, CertStatus::Pass, "{} mod {}", form.name, p);
            assert!(cert.witnesses_nonvacuous > 0);
            assert!(cert.violations.is_empty());
        }
    }

    #[test]
    fn wrong_prime_fails_with_witnesses() {
        // [DERIVED] Phi35 leads with coefficient 1 at (4,2,6), disc 92 ≡ 2
        // (mod 5), an immediate violation.
        let cert = check_singular("Phi35", &TOWER.phi35.series, 5, 6).unwrap();
        assert_eq!(cert.status, CertStatus::Fail);
        assert!(!cert.violations.is_empty());
    }

    #[test]
    fn prime_dividing_df_is_refused() {
        let err = check_singular("Psi5", &TOWER.psi5.series, 2, 6).unwrap_err();
        assert!(matches!(
            err,
            CongruenceError::PrimeDividesDf { prime: 2, d_f: 16 }
        ));
    }

    #[test]
    fn composite_modulus_is_refused() {
        assert!(matches!(
            check_singular("Psi5", &TOWER.psi5.series, 9, 6),
            Err(CongruenceError::NotPrime(9))
        ));
    }

    #[test]
    fn excessive_precision_is_refused() {
        assert!(matches!(
            check_singular("Psi5", &TOWER.psi5.series, 3, 7),
            Err(CongruenceError::PrecisionTooLow { requested: 7, available: 6 })
        ));
    }

    #[test]
    fn box_entirely_on_quadric_is_vacuous() {
        // At precision 1 the odd box is {(1,1,1), (1,-1,1)}, both with
        // disc 3 ≡ 0 mod 3: nothing is constrained.
        let probe =
            OrthoSeries::monomial(IndexKey { n: 1, r: 1, m: 1 }, Rat::one(), 1).unwrap();
        let cert = check_singular("probe", &probe, 3, 1).unwrap();
        assert_eq!(cert.status, CertStatus::Vacuous);
        assert_eq!(cert.checked_count, 2);
        assert_eq!(cert.witnesses_nonvacuous, 0);
    }

    #[test]
    fn quadric_supported_monomial_passes_in_a_larger_box() {
        // In a larger box the off-quadric indices all carry coefficient
        // zero, so the singularity claim is true (and non-vacuous).
        let cert = check_singular("probe", &monomial(1, 1, 1), 3, 8).unwrap();
        assert_eq!(cert.status, CertStatus::Pass);
        assert!(cert.witnesses_nonvacuous > 0);
        assert!(cert.checked_count > cert.witnesses_nonvacuous);
    }

    #[test]
    fn passing_certificates_restrict_to_lower_precision() {
        // Consistency: a pass at precision 6 implies a pass at 4.
        let cert = check_singular("Psi5", &TOWER.psi5.series, 3, 4).unwrap();
        assert_eq!(cert.status, CertStatus::Pass);
    }

    #[test]
    fn certificate_json_shape() {
        let cert = check_singular("Phi35", &TOWER.phi35.series, 5, 6).unwrap();
        let value = serde_json::to_value(&cert).unwrap();
        assert_eq!(value["form"], "Phi35");
        assert_eq!(value["prime"], 5);
        assert_eq!(value["prec"], 6);
        assert_eq!(value["d_f"], 4);
        assert_eq!(value["status"], "fail");
        let first = &value["violations"][0];
        assert!(first["index"].is_array());
        assert_eq!(first["index"].as_array().unwrap().len(), 3);
        assert!(first["coeff_mod_p"].is_u64());
        assert!(first["disc_mod_p"].is_u64());
    }

    #[test]
    fn scan_skips_df_primes_and_finds_the_claimed_one() {
        let certs = scan_primes("Psi5", &TOWER.psi5.series, 6, 30).unwrap();
        assert!(certs.iter().all(|c| c.prime != 2));
        let by_prime =
            |p: u64| certs.iter().find(|c| c.prime == p).map(|c| c.status);
        assert_eq!(by_prime(3), Some(CertStatus::Pass));
        assert_eq!(by_prime(7), Some(CertStatus::Fail));
    }

    // --- pairwise prediction --------------------------------------------

    #[test]
    fn pair_strict_example_weights_5_30() {
        // [DERIVED] strict mode misses the p = 3 congruence (3 | 30) and
        // keeps the other two.
        let report = predict_pair(3, 5, 30, Mode::Strict);
        assert_eq!(report.results.len(), 2);
        assert_eq!(find(&report, &[1], 59).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0, 1], 23).unwrap().exponent, 1);
        assert!(find(&report, &[0], 3).is_none());
    }

    #[test]
    fn pair_valuation_example_weights_5_30() {
        // [PAPER] all three congruences of the first lattice family.
        let report = predict_pair(3, 5, 30, Mode::Valuation);
        assert_eq!(report.results.len(), 3);
        assert_eq!(find(&report, &[0], 3).unwrap().exponent, 1);
        assert_eq!(find(&report, &[1], 59).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0, 1], 23).unwrap().exponent, 1);
    }

    #[test]
    fn pair_valuation_example_weights_9_45() {
        // [PAPER] the n = 4 pair; p = 2 needs the true valuation
        // comparison v2(-8) - v2(-44) = 3 - 2 = 1.
        let report = predict_pair(4, 9, 45, Mode::Valuation);
        assert_eq!(report.results.len(), 3);
        assert_eq!(find(&report, &[0], 2).unwrap().exponent, 1);
        assert_eq!(find(&report, &[1], 11).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0, 1], 53).unwrap().exponent, 1);
    }

    #[test]
    fn pair_strict_example_weights_120_7() {
        // [PAPER] the weight-7 partner pair at n = 8, plus the engine's
        // additional p = 3 finding (3 | 117 with 3 coprime to 7 and 4).
        let report = predict_pair(8, 120, 7, Mode::Strict);
        assert_eq!(report.results.len(), 3);
        assert!(find(&report, &[0], 13).is_some());
        assert!(find(&report, &[0, 1], 31).is_some());
        assert!(find(&report, &[0], 3).is_some());
    }

    #[test]
    fn strict_results_embed_into_valuation_results() {
        for (n, k, l) in [(3, 5, 30), (4, 9, 45), (8, 120, 7), (5, 9, 54), (10, 28, 28)] {
            let strict = predict_pair(n, k, l, Mode::Strict);
            let val = predict_pair(n, k, l, Mode::Valuation);
            for p in &strict.results {
                let found = find(&val, &p.target_indices, p.prime);
                assert!(
                    found.is_some_and(|q| q.exponent >= 1),
                    "({n},{k},{l}): {:?} mod {} lost in valuation mode",
                    p.target_indices,
                    p.prime
                );
            }
        }
    }

    #[test]
    fn family_valuation_recovers_the_three_form_tables() {
        // [PAPER] the six claims of the (2, 9, 12) family; the p = 3
        // product congruence holds with exponent 2.
        let report = predict_family(3, &[2, 9, 12], Mode::Valuation);
        assert!(find(&report, &[1], 17).is_some());
        assert!(find(&report, &[2], 23).is_some());
        assert!(find(&report, &[0, 1], 7).is_some());
        assert!(find(&report, &[0, 2], 3).is_some_and(|p| p.exponent == 2));
        assert!(find(&report, &[1, 2], 41).is_some());
        assert!(find(&report, &[0, 1, 2], 5).is_some());

        // [PAPER] the seven claims of the (1, 6, 12) family.
        let report = predict_family(3, &[1, 6, 12], Mode::Valuation);
        assert!(find(&report, &[1], 11).is_some());
        assert!(find(&report, &[2], 23).is_some());
        assert!(find(&report, &[0, 1], 13).is_some());
        assert!(find(&report, &[0, 2], 5).is_some());
        assert!(find(&report, &[1, 2], 5).is_some());
        assert!(find(&report, &[1, 2], 7).is_some());
        assert!(find(&report, &[0, 1, 2], 37).is_some());
    }

    #[test]
    fn family_strict_finds_the_unclaimed_prime() {
        // [DERIVED] the (24, 72) family at n = 6: the strict conditions
        // fire at p = 11 for the weight-24 form even though the claim
        // table does not list it.
        let report = predict_family(6, &[24, 72], Mode::Strict);
        assert_eq!(report.results.len(), 4);
        assert!(find(&report, &[0], 11).is_some());
        assert!(find(&report, &[1], 5).is_some());
        assert!(find(&report, &[1], 7).is_some());
        assert!(find(&report, &[0, 1], 47).is_some());
    }

    #[test]
    fn pairing_strings_name_the_witnessing_split() {
        let report = predict_family(3, &[2, 9, 12], Mode::Valuation);
        let p = find(&report, &[0, 2], 3).unwrap();
        assert_eq!(p.pairing, "2 | 12");
    }

    // --- identity prediction --------------------------------------------

    #[test]
    fn identity_example_n13() {
        // [PAPER] the rank-13 identity with constant 1950: the weight-142
        // form mod 13, and the product mod 5 with the derived exponent 2.
        let report = predict_identity(13, 142, 1, &rat_int(1950)).unwrap();
        assert_eq!(report.results.len(), 2);
        assert_eq!(find(&report, &[0], 13).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0, 1], 5).unwrap().exponent, 2);
        assert_eq!(report.mode, "identity");
    }

    #[test]
    fn identity_example_e6() {
        // [PAPER] weight-120 form mod 13 via c = -468; the engine also
        // sees p = 3 with exponent 2 (3^2 | 117 and 3^2 | 468).
        let report = predict_identity(8, 120, 4, &rat_int(-468)).unwrap();
        assert_eq!(report.results.len(), 2);
        assert_eq!(find(&report, &[0], 13).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0], 3).unwrap().exponent, 2);
    }

    #[test]
    fn identity_example_e7() {
        // [PAPER] both claimed primes of the weight-165 form.
        let report = predict_identity(9, 165, 4, &rat(-969, 2)).unwrap();
        assert!(find(&report, &[0], 17).is_some());
        assert!(find(&report, &[0], 19).is_some());
    }

    #[test]
    fn identity_example_e8() {
        // [PAPER] weight-252 form mod 31; the mod-4 product congruence is
        // a derived strengthening from the same identity.
        let report = predict_identity(10, 252, 8, &rat_int(-19840)).unwrap();
        assert_eq!(find(&report, &[0], 31).unwrap().exponent, 1);
        assert_eq!(find(&report, &[0, 1], 2).unwrap().exponent, 2);
    }

    #[test]
    fn identity_rejects_zero_constant() {
        assert!(matches!(
            predict_identity(8, 120, 4, &Rat::zero()),
            Err(CongruenceError::IdentityConstantZero)
        ));
    }

    #[test]
    fn identity_without_rhs_degenerates_to_valuation_mode() {
        // The +infinity sentinel for v_p(c) turns the F and G slot
        // formulas into the plain valuation comparison.
        for (n, k, l) in [(3, 5, 30), (4, 9, 45), (8, 120, 7), (13, 142, 1)] {
            let co = bracket_coefficients(n, k, l);
            let candidates = candidate_primes(&[&co.a, &co.b, &co.c]);
            for &p in &candidates {
                let sentinel = identity_slot_predictions(&co, None, p);
                let pairwise = pair_slot_predictions(&co, k, l, Mode::Valuation);
                for slot in [Slot::F, Slot::G] {
                    let lhs = sentinel
                        .iter()
                        .find(|(s, _)| *s == slot)
                        .map(|(_, e)| *e);
                    let rhs = pairwise
                        .iter()
                        .find(|(s, q, _)| *s == slot && *q == p)
                        .map(|(_, _, e)| *e);
                    assert_eq!(lhs, rhs, "({n},{k},{l}) slot {slot:?} at p = {p}");
                }
            }
        }
    }

    #[test]
    fn eisenstein_constants() {
        // [PAPER] the three root-system constants.
        let e6 = RootSystem::new('E', 6).unwrap();
        let e7 = RootSystem::new('E', 7).unwrap();
        let e8 = RootSystem::new('E', 8).unwrap();
        assert_eq!(eisenstein_constant(&e6, 120, 4), rat_int(-468));
        assert_eq!(eisenstein_constant(&e7, 165, 4), rat(-969, 2));
        assert_eq!(eisenstein_constant(&e8, 252, 8), rat_int(-19840));
    }

    // --- catalog regression ---------------------------------------------

    #[test]
    fn catalog_strict_run_recovers_every_strict_claim() {
        let report = run_catalog(builtin_catalog(), Mode::Strict);
        assert!(report.pass, "missed: {:?}", report.missed);
        assert_eq!(report.total_claims, 58);
        assert_eq!(report.matched, 58);
    }

    #[test]
    fn catalog_valuation_run_recovers_every_claim() {
        let report = run_catalog(builtin_catalog(), Mode::Valuation);
        assert!(report.pass, "missed: {:?}", report.missed);
        assert_eq!(report.total_claims, 65);
        assert_eq!(report.matched, 65);
        let exact: Vec<&EntryOutcome> =
            report.entries.iter().filter(|e| e.mode_exact).collect();
        assert_eq!(exact.len(), 6);
        assert!(exact.iter().all(|e| e.exact_ok == Some(true)));
    }

    #[test]
    fn catalog_valuation_run_reports_known_surpluses() {
        let report = run_catalog(builtin_catalog(), Mode::Valuation);
        let entry = |label: &str| {
            report
                .entries
                .iter()
                .find(|e| e.label == label)
                .unwrap_or_else(|| panic!("entry {label}"))
        };
        // The first D4 entry: the strict conditions also fire at p = 11
        // for the weight-24 form, which the table does not claim.
        assert!(entry("2U+D4")
            .extras
            .iter()
            .any(|x| x.targets == ["Psi24"] && x.prime == 11));
        // The triple-product family picks up p = 3 via the (11, 12)
        // pairing.
        assert!(entry("2U+A1(2)")
            .extras
            .iter()
            .any(|x| x.prime == 3 && x.targets.len() == 3));
    }

    #[test]
    fn catalog_report_serializes() {
        let report = run_catalog(builtin_catalog(), Mode::Valuation);
        let value = serde_json::to_value(&report).unwrap();
        assert_eq!(value["mode"], "valuation");
        assert!(value["entries"].as_array().unwrap().len() >= 20);
    }

    #[test]
    fn prediction_report_json_shape() {
        let report = predict_pair(3, 5, 30, Mode::Valuation);
        let value = serde_json::to_value(&report).unwrap();
        assert_eq!(value["n"], 3);
        assert_eq!(value["weights"], serde_json::json!([5, 30]));
        assert_eq!(value["mode"], "valuation");
        let results = value["results"].as_array().unwrap();
        assert_eq!(results.len(), 3);
        assert!(results.iter().all(|r| r["target"].is_array()
            && r["prime"].is_u64()
            && r["exponent"].is_u64()
            && r["pairing"].is_string()));
        assert_eq!(value["assumptions"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn mode_parses_from_strings() {
        assert_eq!("strict".parse::<Mode>().unwrap(), Mode::Strict);
        assert_eq!("VALUATION".parse::<Mode>().unwrap(), Mode::Valuation);
        assert!("sloppy".parse::<Mode>().is_err());
    }
}
