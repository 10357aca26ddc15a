//! Classical q-series and index-1 Jacobi forms.
//!
//! Everything here is elementary and exact:
//!
//! * eta = q^(1/24) prod (1 - q^n), expanded by Euler's pentagonal number
//!   theorem and raised to powers as needed;
//! * the Jacobi theta functions
//!     theta_odd(z) = sum_j (-1)^j q^((2j+1)^2/8) z^((2j+1)/2),
//!     theta_2(z)   = sum_j q^((2j+1)^2/8) z^((2j+1)/2),
//!     theta_3(z)   = sum_j q^(j^2/2) z^j,
//!     theta_4(z)   = sum_j (-1)^j q^(j^2/2) z^j,
//!   together with their constants at z = 0 (theta_odd vanishes there);
//! * the Eisenstein series E_k = 1 - (2k/B_k) sum sigma_(k-1)(n) q^n;
//! * the weak Jacobi forms of index 1:
//!     phi_(-2,1) = theta_odd^2 / eta^6      (weight -2),
//!     phi_(0,1)  = 4 [ (theta_2(z)/theta_2)^2 + (theta_3(z)/theta_3)^2
//!                      + (theta_4(z)/theta_4)^2 ]   (weight 0),
//!   which generate the ring of weak Jacobi forms of index 1 over the
//!   level-1 modular forms.  The holomorphic generators of weights
//!   4, 6, 10, 12 are assembled from them: the Eisenstein combinations
//!   are solved from the two linear conditions c(0,0) = 1, c(0,1) = 0,
//!   and the cusp forms are Delta times the weak generators.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::{bernoulli, divisor_power_sum, rat_int, Rat};
use crate::series::jacobi::JacobiSeries;
use crate::series::qseries::QSeries;
use crate::series::SeriesError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassicalError {
    #[error("series arithmetic failed: {0}")]
    Series(#[from] SeriesError),
    #[error("a Jacobi form of index 1 must have integer exponents, got scales ({0}, {1})")]
    FractionalExponents(i64, i64),
    #[error("coefficient at (n, r) = ({0}, {1}) breaks the symmetry c(n, r) = c(n, -r)")]
    Asymmetric(i64, i64),
    #[error("coefficient at (n, r) = ({0}, {1}) lies below the weak bound 4n - r^2 >= -1")]
    BelowWeakBound(i64, i64),
    #[error("only weights 4, 6, 10 and 12 are available, not {0}")]
    UnknownWeight(i64),
}

/// The precision margin (in integer q-powers) used while assembling
/// quotients of theta and eta series, before truncating to the target.
const MARGIN: i64 = 2;

// ---------------------------------------------------------------------------
// one-variable building blocks
// ---------------------------------------------------------------------------

/// eta^k for k >= 1, exact through q^prec, on the 1/24 exponent grid.
pub fn eta_power(k: u32, prec: i64) -> QSeries {
    assert!(k >= 1, "eta_power needs a positive exponent");
    let scaled = 24 * (prec + MARGIN);
    let mut terms = Vec::new();
    // q^(1/24) * sum_j (-1)^j q^(j(3j-1)/2) has scaled exponents (6j-1)^2
    let mut j = 0i64;
    loop {
        let done: Vec<i64> = if j == 0 { vec![0] } else { vec![j, -j] };
        let mut any = false;
        for jj in done {
            let e = (6 * jj - 1) * (6 * jj - 1);
            if e <= scaled {
                let sign = if jj.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((e, rat_int(sign)));
                any = true;
            }
        }
        if !any {
            break;
        }
        j += 1;
    }
    QSeries::from_terms(24, scaled, terms)
        .pow(k)
        .truncated(24 * prec)
}

/// The discriminant Delta = eta^24 = q - 24 q^2 + ..., on integer exponents.
pub fn delta_q(prec: i64) -> QSeries {
    eta_power(24, prec).reduced()
}

/// The normalized Eisenstein series E_k = 1 - (2k/B_k) sum sigma_(k-1)(n) q^n.
pub fn eisenstein_q(k: u32, prec: i64) -> QSeries {
    assert!(k >= 2 && k % 2 == 0, "Eisenstein weight must be even and >= 2");
    let factor = -rat_int(2 * k as i64) / bernoulli(k).expect("even weight");
    let mut terms = vec![(0, Rat::one())];
    for n in 1..=prec.max(0) {
        terms.push((
            n,
            &factor * Rat::from_integer(divisor_power_sum(k - 1, n as u64)),
        ));
    }
    QSeries::from_terms(1, prec, terms)
}

fn theta_like(prec: i64, odd_exponents: bool, signs: bool) -> JacobiSeries {
    let scaled = 8 * (prec + MARGIN);
    let mut terms = Vec::new();
    let mut j = 0i64;
    loop {
        let js: Vec<i64> = if j == 0 { vec![0] } else { vec![j, -j] };
        let mut any = false;
        for jj in js {
            let (e, z, sign) = if odd_exponents {
                // q^((2j+1)^2 / 8) z^((2j+1)/2)
                let o = 2 * jj + 1;
                (o * o, o, if signs { jj.rem_euclid(2) } else { 0 })
            } else {
                // q^(j^2 / 2) z^j
                (4 * jj * jj, 2 * jj, if signs { jj.rem_euclid(2) } else { 0 })
            };
            if e <= scaled {
                terms.push(((e, z), rat_int(if sign == 0 { 1 } else { -1 })));
                any = true;
            }
        }
        if !any {
            break;
        }
        j += 1;
    }
    JacobiSeries::from_terms(8, 2, scaled, terms)
}

/// theta_odd(z) = sum (-1)^j q^((2j+1)^2/8) z^((2j+1)/2); vanishes at z = 0.
pub fn theta_odd(prec: i64) -> JacobiSeries {
    theta_like(prec, true, true)
}

pub fn theta_2(prec: i64) -> JacobiSeries {
    theta_like(prec, true, false)
}

pub fn theta_3(prec: i64) -> JacobiSeries {
    theta_like(prec, false, false)
}

pub fn theta_4(prec: i64) -> JacobiSeries {
    theta_like(prec, false, true)
}

/// The theta constant obtained by setting z = 1 (summing each q-layer).
fn z_to_one(theta: &JacobiSeries) -> QSeries {
    let mut terms = std::collections::BTreeMap::new();
    for ((n, _), c) in theta.terms() {
        *terms.entry(n).or_insert_with(Rat::zero) += c;
    }
    QSeries::from_terms(theta.qscale(), theta.prec(), terms)
}

// ---------------------------------------------------------------------------
// index-1 Jacobi forms
// ---------------------------------------------------------------------------

/// A weak Jacobi form of index 1: integer Fourier exponents, coefficients
/// c(n, r) symmetric in r and supported on 4n - r^2 >= -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiForm {
    weight: i64,
    series: JacobiSeries,
}

impl JacobiForm {
    pub fn new(weight: i64, series: JacobiSeries) -> Result<Self, ClassicalError> {
        let series = series.reduced();
        if series.qscale() != 1 || series.zscale() != 1 {
            return Err(ClassicalError::FractionalExponents(
                series.qscale(),
                series.zscale(),
            ));
        }
        for ((n, r), c) in series.terms() {
            if series.coeff(n, -r) != *c {
                return Err(ClassicalError::Asymmetric(n, r));
            }
            if 4 * n - r * r < -1 {
                return Err(ClassicalError::BelowWeakBound(n, r));
            }
        }
        Ok(JacobiForm { weight, series })
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn series(&self) -> &JacobiSeries {
        &self.series
    }

    /// Precision bound in integer q-powers.
    pub fn prec(&self) -> i64 {
        self.series.prec()
    }

    /// The Fourier coefficient c(n, r).
    pub fn c(&self, n: i64, r: i64) -> Rat {
        self.series.coeff(n, r)
    }
}

/// The weight -2 weak Jacobi form phi_(-2,1) = theta_odd^2 / eta^6,
/// normalized so that its q^0 layer is z - 2 + z^(-1).
pub fn phi_minus_2_1(prec: i64) -> Result<JacobiForm, ClassicalError> {
    let theta = theta_odd(prec + MARGIN);
    let num = theta.mul(&theta);
    let quotient = num.div_q(&eta_power(6, prec + MARGIN))?;
    JacobiForm::new(-2, quotient.truncated(prec * quotient.qscale()))
}

/// The weight 0 weak Jacobi form
/// phi_(0,1) = 4 [ (theta_2(z)/theta_2)^2 + (theta_3(z)/theta_3)^2
///                 + (theta_4(z)/theta_4)^2 ],
/// normalized so that its q^0 layer is z + 10 + z^(-1).
pub fn phi_0_1(prec: i64) -> Result<JacobiForm, ClassicalError> {
    let mut total: Option<JacobiSeries> = None;
    for builder in [theta_2, theta_3, theta_4] {
        let theta = builder(prec + MARGIN);
        let constant = z_to_one(&theta);
        let ratio = theta.mul(&theta).div_q(&constant.mul(&constant))?;
        total = Some(match total {
            None => ratio,
            Some(t) => t.add(&ratio),
        });
    }
    let sum = total.expect("three summands");
    let four = rat_int(4);
    JacobiForm::new(0, sum.scaled_by(&four).truncated(prec * sum.qscale()))
}

/// The holomorphic index-1 Jacobi form of weight 4, 6, 10 or 12, exact
/// through q^prec.  The Eisenstein forms E_(4,1) and E_(6,1) are the
/// unique combinations  a E_w phi_(0,1) + b X phi_(-2,1)  (with X the
/// weight w+2 Eisenstein form) satisfying c(0,0) = 1 and c(0,1) = 0; the
/// cusp forms phi_(10,1), phi_(12,1) are Delta times the weak generators.
pub fn jacobi_index1(weight: i64, prec: i64) -> Result<JacobiForm, ClassicalError> {
    match weight {
        4 | 6 => {
            let phi0 = phi_0_1(prec)?;
            let phim2 = phi_minus_2_1(prec)?;
            let ew = eisenstein_q(weight as u32, prec);
            let x = if weight == 4 {
                eisenstein_q(6, prec)
            } else {
                let e4 = eisenstein_q(4, prec);
                e4.mul(&e4)
            };
            let left = phi0.series().mul_q(&ew);
            let right = phim2.series().mul_q(&x);
            // solve  a * left + b * right  for c(0,0) = 1, c(0,1) = 0
            let (l00, l01) = (left.coeff_int(0, 0), left.coeff_int(0, 1));
            let (r00, r01) = (right.coeff_int(0, 0), right.coeff_int(0, 1));
            let det = &l00 * &r01 - &l01 * &r00;
            assert!(!det.is_zero(), "constant layers are independent");
            let a = &r01 / &det;
            let b = -&l01 / &det;
            JacobiForm::new(weight, left.scaled_by(&a).add(&right.scaled_by(&b)))
        }
        10 | 12 => {
            let weak = if weight == 10 {
                phi_minus_2_1(prec + 1)?
            } else {
                phi_0_1(prec + 1)?
            };
            let product = weak.series().mul_q(&delta_q(prec + 1));
            JacobiForm::new(weight, product.truncated(prec * product.qscale()))
        }
        other => Err(ClassicalError::UnknownWeight(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    #[test]
    fn eta_powers_begin_correctly() {
        let d = delta_q(6);
        assert_eq!(d.scale(), 1);
        assert_eq!(d.coeff_q(1), rat_int(1));
        assert_eq!(d.coeff_q(2), rat_int(-24));
        assert_eq!(d.coeff_q(3), rat_int(252));
        assert_eq!(d.coeff_q(4), rat_int(-1472));
        assert_eq!(d.coeff_q(0), rat_int(0));
    }

    #[test]
    fn eisenstein_values() {
        let e4 = eisenstein_q(4, 4);
        assert_eq!(e4.coeff_q(0), rat_int(1));
        assert_eq!(e4.coeff_q(1), rat_int(240));
        assert_eq!(e4.coeff_q(2), rat_int(2160));
        let e6 = eisenstein_q(6, 3);
        assert_eq!(e6.coeff_q(1), rat_int(-504));
        assert_eq!(e6.coeff_q(2), rat_int(-16632));
    }

    #[test]
    fn theta_constants_match_jacobi_identity() {
        // theta_3^4 = theta_2^4 + theta_4^4
        let p = 10;
        let t2 = z_to_one(&theta_2(p));
        let t3 = z_to_one(&theta_3(p));
        let t4 = z_to_one(&theta_4(p));
        let lhs = t3.pow(4);
        let rhs = t2.pow(4).add(&t4.pow(4));
        let bound = lhs.prec().min(rhs.prec());
        assert_eq!(lhs.truncated(bound), rhs.truncated(bound));
    }

    #[test]
    fn weak_generators_have_the_expected_layers() {
        let w = phi_minus_2_1(3).unwrap();
        assert_eq!(w.c(0, 0), rat_int(-2));
        assert_eq!(w.c(0, 1), rat_int(1));
        assert_eq!(w.c(0, -1), rat_int(1));
        assert_eq!(w.c(1, 2), rat_int(-2));
        assert_eq!(w.c(1, 1), rat_int(8));
        assert_eq!(w.c(1, 0), rat_int(-12));
        let v = phi_0_1(3).unwrap();
        assert_eq!(v.c(0, 0), rat_int(10));
        assert_eq!(v.c(0, 1), rat_int(1));
        assert_eq!(v.c(1, 2), rat_int(10));
        assert_eq!(v.c(1, 1), rat_int(-64));
        assert_eq!(v.c(1, 0), rat_int(108));
    }

    #[test]
    fn eisenstein_jacobi_forms_are_holomorphic() {
        let e41 = jacobi_index1(4, 4).unwrap();
        assert_eq!(e41.c(0, 0), rat_int(1));
        assert_eq!(e41.c(0, 1), rat_int(0));
        // classical values of E_(4,1): c(1, 0) = 126, c(1, 1) = 56, c(1, 2) = 1
        assert_eq!(e41.c(1, 0), rat_int(126));
        assert_eq!(e41.c(1, 1), rat_int(56));
        assert_eq!(e41.c(1, 2), rat_int(1));
        let e61 = jacobi_index1(6, 4).unwrap();
        assert_eq!(e61.c(0, 0), rat_int(1));
        assert_eq!(e61.c(0, 1), rat_int(0));
        // classical values of E_(6,1): c(1, 0) = -330, c(1, 1) = -88, c(1, 2) = 1
        assert_eq!(e61.c(1, 0), rat_int(-330));
        assert_eq!(e61.c(1, 1), rat_int(-88));
        assert_eq!(e61.c(1, 2), rat_int(1));
    }

    #[test]
    fn cusp_jacobi_forms_start_at_q() {
        let p10 = jacobi_index1(10, 4).unwrap();
        assert_eq!(p10.c(0, 0), rat_int(0));
        assert_eq!(p10.c(1, 1), rat_int(1));
        assert_eq!(p10.c(1, 0), rat_int(-2));
        let p12 = jacobi_index1(12, 4).unwrap();
        assert_eq!(p12.c(1, 1), rat_int(1));
        assert_eq!(p12.c(1, 0), rat_int(10));
    }

    #[test]
    fn unknown_weights_are_rejected()  {
        assert!(matches!(
            jacobi_index1(8, 3),
            Err(ClassicalError::UnknownWeight(8))
        ));
    }
}
