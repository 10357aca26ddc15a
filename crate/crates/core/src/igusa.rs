//! The tower of Siegel paramodular forms of degree two attached to the
//! lattice 2U + A1: arithmetic Gritsenko (Maass) lifts of the index-1
//! Jacobi forms, and the derived odd-weight forms.
//!
//! The lift of a Jacobi form phi of weight k and index 1 has Fourier
//! coefficients
//!
//! ```text
//! a(n, r, m) = sum_(d | gcd(n, r, m)) d^(k-1) c(n m / d^2, r / d),
//! a(0, 0, 0) = -B_k / (2k) * c(0, 0),
//! ```
//!
//! indexed here by doubled integers (N, R, M) = (2n, 2r, 2m).  The tower
//! consists of
//!
//! ```text
//! E4    = 240 * lift(E_(4,1)),        weight 4,
//! E6    = -504 * lift(E_(6,1)),       weight 6,
//! chi10 = lift(phi_(10,1)),           weight 10,
//! chi12 = lift(phi_(12,1)),           weight 12,
//! psi5  = sqrt(chi10),                weight 5, half-integral indices,
//! phi35 = the normalized Jacobian determinant of (E4, E6, chi10, chi12),
//! phi30 = phi35 / psi5,               weight 30.
//! ```
//!
//! The Jacobian rows are (k_i F_i, D_tau F_i, D_z F_i, D_omega F_i); its
//! determinant is the unique cusp form of weight 35 up to scale, and is
//! normalized here to integer coprime coefficients with leading
//! coefficient +1 in the index order (total, N, -R).  That leading index
//! is (N, R, M) = (4, 2, 6): every determinant term uses all four columns,
//! the E4 and E6 columns cannot both sit in the weight row, and the best
//! assignment pairs totals 0 + 2 + 4 + 4.  Its discriminant is
//! 4 N M - R^2 = 92 = 4 * 23, the smallest discriminant supporting the
//! form, which is what makes the mod-23 congruence visible from the very
//! first coefficient.
//!
//! Every construction is verified internally before the tower is
//! published: psi5^2 = chi10, phi30 psi5 = phi35, the reflection
//! symmetry a(N, R, M) = (-1)^k a(N, -R, M), the transposition symmetry
//! a(M, R, N) = eps a(N, R, M) with the per-form sign eps (which is
//! (-1)^k for the four lifts and phi35, but +1 for psi5 and hence -1
//! for phi30 = phi35 / psi5), and integrality of phi30 and phi35.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::classical::{jacobi_index1, ClassicalError, JacobiForm};
use crate::exact::{bernoulli, rat_int, ExactError, Int, Rat};
use crate::series::ortho::{Axis, IndexKey, OrthoSeries, Parity};
use crate::series::SeriesError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IgusaError {
    #[error("series arithmetic failed: {0}")]
    Series(#[from] SeriesError),
    #[error("Jacobi form construction failed: {0}")]
    Classical(#[from] ClassicalError),
    #[error("exact arithmetic failed: {0}")]
    Exact(#[from] ExactError),
    #[error("the lift of a weight-{0} Jacobi form needs q-precision {1}, only {2} is available")]
    LiftPrecision(i64, i64, i64),
    #[error("internal invariant `{0}` failed: {1}")]
    Invariant(&'static str, String),
}

/// A named form in the tower together with its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiegelForm {
    pub name: &'static str,
    pub weight: i64,
    pub series: OrthoSeries,
}

impl SiegelForm {
    fn new(name: &'static str, weight: i64, series: OrthoSeries) -> Self {
        SiegelForm {
            name,
            weight,
            series,
        }
    }
}

/// The arithmetic lift of an index-1 Jacobi form of weight k, exact for
/// all indices with n + m <= prec.  The input must be exact through
/// q^floor(prec^2 / 4).
pub fn maass_lift(phi: &JacobiForm, prec: i64) -> Result<OrthoSeries, IgusaError> {
    let k = phi.weight();
    assert!(k >= 2, "arithmetic lifts need weight at least 2");
    let needed = (prec * prec) / 4;
    if phi.prec() < needed {
        return Err(IgusaError::LiftPrecision(k, needed, phi.prec()));
    }

    // group the Jacobi coefficients by discriminant layer nu = n
    let mut layers: BTreeMap<i64, Vec<(i64, Rat)>> = BTreeMap::new();
    for ((n, r), c) in phi.series().terms() {
        layers.entry(n).or_default().push((r, c.clone()));
    }

    let mut terms: BTreeMap<IndexKey, Rat> = BTreeMap::new();
    let constant = -bernoulli(k as u32)? / rat_int(2 * k) * phi.c(0, 0);
    if !constant.is_zero() {
        terms.insert(IndexKey { n: 0, r: 0, m: 0 }, constant);
    }
    for n in 0..=prec {
        for m in 0..=(prec - n) {
            if n == 0 && m == 0 {
                continue;
            }
            let g = n.gcd(&m).max(1);
            for d in 1..=g {
                if g % d != 0 {
                    continue;
                }
                let weight_factor = Rat::from_integer(Int::from(d).pow(k as u32 - 1));
                let Some(layer) = layers.get(&(n * m / (d * d))) else {
                    continue;
                };
                for (rho, c) in layer {
                    let key = IndexKey {
                        n: 2 * n,
                        r: 2 * d * rho,
                        m: 2 * m,
                    };
                    let entry = terms.entry(key).or_insert_with(Rat::zero);
                    *entry += &weight_factor * c;
                }
            }
        }
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(OrthoSeries::from_terms(Parity::Integral, prec, terms)?)
}

/// The 4x4 Jacobian determinant with rows (k_i F_i, D_tau F_i, D_z F_i,
/// D_omega F_i), expanded along the first two rows.
fn jacobian(forms: &[(&OrthoSeries, i64); 4]) -> OrthoSeries {
    let rows: Vec<Vec<OrthoSeries>> = vec![
        forms
            .iter()
            .map(|(f, k)| f.scaled_by(&rat_int(*k)))
            .collect(),
        forms.iter().map(|(f, _)| f.derivative(Axis::Tau)).collect(),
        forms.iter().map(|(f, _)| f.derivative(Axis::Z)).collect(),
        forms
            .iter()
            .map(|(f, _)| f.derivative(Axis::Omega))
            .collect(),
    ];
    // Laplace expansion along rows 1-2: pairs of columns with their
    // complements and signs (-1)^(i+j+1) for 1-based column labels.
    let blocks: [((usize, usize), (usize, usize), i64); 6] = [
        ((0, 1), (2, 3), 1),
        ((0, 2), (1, 3), -1),
        ((0, 3), (1, 2), 1),
        ((1, 2), (0, 3), 1),
        ((1, 3), (0, 2), -1),
        ((2, 3), (0, 1), 1),
    ];
    let minor = |ra: &[OrthoSeries], rb: &[OrthoSeries], i: usize, j: usize| {
        ra[i].multiply(&rb[j]).sub(&ra[j].multiply(&rb[i])).unwrap()
    };
    let mut det: Option<OrthoSeries> = None;
    for ((i, j), (k, l), sign) in blocks {
        let top = minor(&rows[0], &rows[1], i, j);
        let bottom = minor(&rows[2], &rows[3], k, l);
        let mut block = top.multiply(&bottom);
        if sign < 0 {
            block = block.neg();
        }
        det = Some(match det {
            None => block,
            Some(d) => d.add(&block).unwrap(),
        });
    }
    det.expect("six blocks")
}

/// The tower of forms built to a common precision: coefficients a(N, R, M)
/// are exact whenever N + M <= 2 * prec.
#[derive(Debug, Clone)]
pub struct IgusaTower {
    pub prec: i64,
    pub e4: SiegelForm,
    pub e6: SiegelForm,
    pub chi10: SiegelForm,
    pub chi12: SiegelForm,
    pub psi5: SiegelForm,
    pub phi30: SiegelForm,
    pub phi35: SiegelForm,
    /// The content removed from the raw Jacobian determinant when
    /// normalizing phi35.
    pub jacobian_content: Rat,
}

/// Extra q-precision used internally so that roots and quotients of the
/// generators stay exact through the published precision.
const INTERNAL_MARGIN: i64 = 2;

impl IgusaTower {
    pub fn build(prec: i64) -> Result<IgusaTower, IgusaError> {
        // phi35 first appears at total N + M = 10, so anything below
        // precision 5 would publish it (and phi30) with empty support
        assert!(prec >= 5, "the tower needs precision at least 5");
        let internal = prec + INTERNAL_MARGIN;
        let jprec = (internal * internal) / 4 + 1;

        let e41 = jacobi_index1(4, jprec)?;
        let e61 = jacobi_index1(6, jprec)?;
        let p101 = jacobi_index1(10, jprec)?;
        let p121 = jacobi_index1(12, jprec)?;

        let e4 = maass_lift(&e41, internal)?.scaled_by(&rat_int(240));
        let e6 = maass_lift(&e61, internal)?.scaled_by(&rat_int(-504));
        let chi10 = maass_lift(&p101, internal)?;
        let chi12 = maass_lift(&p121, internal)?;

        let psi5 = chi10.sqrt()?;
        let raw = jacobian(&[(&e4, 4), (&e6, 6), (&chi10, 10), (&chi12, 12)]);
        let (phi35, content) = raw.content_normalize()?;
        let phi30 = phi35.divide_exact(&psi5)?;

        let tower = IgusaTower {
            prec,
            e4: SiegelForm::new("E4", 4, e4.truncated(prec)),
            e6: SiegelForm::new("E6", 6, e6.truncated(prec)),
            chi10: SiegelForm::new("Chi10", 10, chi10.truncated(prec)),
            chi12: SiegelForm::new("Chi12", 12, chi12.truncated(prec)),
            psi5: SiegelForm::new("Psi5", 5, psi5.truncated(prec)),
            phi30: SiegelForm::new("Phi30", 30, phi30.truncated(prec)),
            phi35: SiegelForm::new("Phi35", 35, phi35.truncated(prec)),
            jacobian_content: content,
        };
        tower.verify()?;
        Ok(tower)
    }

    pub fn forms(&self) -> [&SiegelForm; 7] {
        [
            &self.e4,
            &self.e6,
            &self.chi10,
            &self.chi12,
            &self.psi5,
            &self.phi30,
            &self.phi35,
        ]
    }

    pub fn form(&self, name: &str) -> Option<&SiegelForm> {
        self.forms()
            .into_iter()
            .find(|f| f.name.eq_ignore_ascii_case(name))
    }

    fn verify(&self) -> Result<(), IgusaError> {
        let fail = |name: &'static str, detail: String| Err(IgusaError::Invariant(name, detail));

        // leading coefficients in the order (total, N, -R)
        for (form, index, value) in [
            (&self.e4, (0, 0, 0), 1),
            (&self.e6, (0, 0, 0), 1),
            (&self.chi10, (2, 2, 2), 1),
            (&self.chi12, (2, 2, 2), 1),
            (&self.psi5, (1, 1, 1), 1),
            (&self.phi30, (3, 1, 5), 1),
            (&self.phi35, (4, 2, 6), 1),
        ] {
            let lead = match form.series.leading_index() {
                Some(k) => k,
                None => return fail("leading-term", format!("{} is empty", form.name)),
            };
            let expect = IndexKey {
                n: index.0,
                r: index.1,
                m: index.2,
            };
            if lead != expect || form.series.coeff(&lead) != rat_int(value) {
                return fail(
                    "leading-term",
                    format!(
                        "{} leads with {:?} -> {}, expected {:?} -> {}",
                        form.name,
                        lead,
                        form.series.coeff(&lead),
                        expect,
                        value
                    ),
                );
            }
        }

        // multiplicative relations
        let square = self.psi5.series.multiply(&self.psi5.series);
        if !square.eq_within(&self.chi10.series, square.prec().min(self.prec)) {
            return fail("psi5-square", "psi5^2 differs from chi10".into());
        }
        let product = self.phi30.series.multiply(&self.psi5.series);
        if !product.eq_within(&self.phi35.series, product.prec().min(self.prec)) {
            return fail("phi30-psi5", "phi30 * psi5 differs from phi35".into());
        }

        // reflection symmetry with sign (-1)^weight, transposition symmetry
        // with the per-form sign (psi5 is fixed by transposition at its
        // nonzero leading term, so its sign is +1 despite the odd weight,
        // and phi30 inherits the quotient sign -1)
        for form in self.forms() {
            let reflection = if form.weight % 2 == 0 { 1 } else { -1 };
            let transpose = match form.name {
                "Psi5" => 1,
                "Phi30" => -1,
                _ => reflection,
            };
            let swapped = form.series.swap_tau_omega().scaled_by(&rat_int(transpose));
            if !swapped.eq_within(&form.series, self.prec) {
                return fail(
                    "transpose-symmetry",
                    format!(
                        "{} is not {:+} symmetric under (N, M) exchange",
                        form.name, transpose
                    ),
                );
            }
            for (key, coeff) in form.series.terms() {
                let mirrored = IndexKey {
                    n: key.n,
                    r: -key.r,
                    m: key.m,
                };
                if form.series.coeff(&mirrored) != coeff * rat_int(reflection) {
                    return fail(
                        "reflection-symmetry",
                        format!("{} is not (-1)^k symmetric in R at {:?}", form.name, key),
                    );
                }
            }
        }

        // the odd-weight forms are cuspidal and integral with content 1
        for form in [&self.phi30, &self.phi35] {
            if !form.series.is_integral() {
                return fail("integrality", format!("{} has a denominator", form.name));
            }
            let mut content = Int::zero();
            for (_, coeff) in form.series.terms() {
                content = content.gcd(&coeff.numer().abs());
            }
            if !content.is_one() {
                return fail(
                    "content",
                    format!("{} has coefficient content {}", form.name, content),
                );
            }
        }

        // chi10, psi5 and phi35 vanish on the diagonal z = 0
        for form in [&self.chi10, &self.psi5, &self.phi35] {
            let diagonal = form.series.restrict_diagonal();
            if diagonal.values().any(|c| !c.is_zero()) {
                return fail(
                    "diagonal-vanishing",
                    format!("{} does not vanish at z = 0", form.name),
                );
            }
        }

        Ok(())
    }
}

/// A single tower shared by the unit tests of several modules, so the lift
/// runs once per test binary.
#[cfg(test)]
pub(crate) mod test_support {
    use super::IgusaTower;
    use std::sync::LazyLock;

    pub(crate) static TOWER: LazyLock<IgusaTower> =
        LazyLock::new(|| IgusaTower::build(6).expect("tower at precision 6"));
}
