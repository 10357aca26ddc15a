//! The holomorphic Laplace operator and the bilinear bracket on
//! orthogonal modular forms.
//!
//! On a Fourier series indexed by doubled integers (N, R, M) the Laplace
//! operator acts diagonally, multiplying the coefficient at (N, R, M) by
//!
//! ```text
//! R^2 - 4 N M  =  -(4 N M - R^2),
//! ```
//!
//! the negated doubled discriminant.  This is 16 times the analytic
//! normalization -Q(lambda); the fixed integer scale is immaterial both
//! for vanishing statements and for congruences modulo odd primes.
//!
//! For forms F, G of weights k, l on a group of signature (n, 2), write
//!
//! ```text
//! A = n/2 - 1 - k,   B = n/2 - 1 - l,   C = n/2 - 1 - k - l.
//! ```
//!
//! The bracket
//!
//! ```text
//! [F, G] = A B Laplace(F G) - B C Laplace(F) G - A C F Laplace(G)
//! ```
//!
//! is again modular, of weight k + l + 2.  An N-ary variant is also
//! provided:
//!
//! ```text
//! [F_1, ..., F_N] = (prod_i A_i) Laplace(prod_i F_i)
//!     - (n/2 - 1 - sum_i k_i) sum_j F_j (prod_{i != j} A_i)
//!                               Laplace(prod_{i != j} F_i),
//! ```
//!
//! with A_i = n/2 - 1 - k_i.  At N = 2 the two definitions differ by
//! C (A - B) [Laplace(F) G - F Laplace(G)], which vanishes only when the
//! weights agree or C = 0; `binary_nary_discrepancy` computes that
//! correction term so the mismatch stays visible.

use crate::exact::{rat, rat_int, Rat};
use crate::series::ortho::OrthoSeries;
use crate::series::SeriesError;

/// The scalars attached to a weight pair (k, l) in signature (n, 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketCoefficients {
    pub n: i64,
    pub k: i64,
    pub l: i64,
    /// n/2 - 1 - k
    pub a: Rat,
    /// n/2 - 1 - l
    pub b: Rat,
    /// n/2 - 1 - k - l
    pub c: Rat,
}

pub fn bracket_coefficients(n: i64, k: i64, l: i64) -> BracketCoefficients {
    BracketCoefficients {
        n,
        k,
        l,
        a: rat(n - 2 - 2 * k, 2),
        b: rat(n - 2 - 2 * l, 2),
        c: rat(n - 2 - 2 * (k + l), 2),
    }
}

/// Apply the (scaled) Laplace operator: each coefficient is multiplied
/// by R^2 - 4 N M.
pub fn laplace(f: &OrthoSeries) -> OrthoSeries {
    let terms = f
        .terms()
        .map(|(key, coeff)| (*key, coeff * rat_int(-key.disc())))
        .collect::<Vec<_>>();
    OrthoSeries::from_terms(f.parity(), f.prec(), terms)
        .expect("index set is unchanged")
}

/// The bracket [F, G] for F of weight k and G of weight l in signature
/// (n, 2).
pub fn bracket(
    f: &OrthoSeries,
    k: i64,
    g: &OrthoSeries,
    l: i64,
    n: i64,
) -> Result<OrthoSeries, SeriesError> {
    let co = bracket_coefficients(n, k, l);
    let fg = f.multiply(g);
    let ab = laplace(&fg).scaled_by(&(&co.a * &co.b));
    let bc = laplace(f).multiply(g).scaled_by(&(&co.b * &co.c));
    let ac = f.multiply(&laplace(g)).scaled_by(&(&co.a * &co.c));
    ab.sub(&bc)?.sub(&ac)
}

/// The N-ary bracket [F_1, ..., F_N] of forms with integer weights.
pub fn nary_bracket(
    items: &[(&OrthoSeries, i64)],
    n: i64,
) -> Result<OrthoSeries, SeriesError> {
    assert!(items.len() >= 2, "the bracket needs at least two forms");
    let scalars: Vec<Rat> = items.iter().map(|(_, k)| rat(n - 2 - 2 * k, 2)).collect();
    let total_weight: i64 = items.iter().map(|(_, k)| k).sum();
    let c_total = rat(n - 2 - 2 * total_weight, 2);

    let product = |skip: Option<usize>| -> OrthoSeries {
        let mut acc: Option<OrthoSeries> = None;
        for (i, (f, _)) in items.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            acc = Some(match acc {
                None => (*f).clone(),
                Some(p) => p.multiply(f),
            });
        }
        acc.expect("at least one factor")
    };

    let full_scalar: Rat = scalars.iter().product();
    let mut result = laplace(&product(None)).scaled_by(&full_scalar);
    for j in 0..items.len() {
        let partial_scalar: Rat = scalars
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, a)| a)
            .product();
        let term = items[j]
            .0
            .multiply(&laplace(&product(Some(j))))
            .scaled_by(&(&c_total * &partial_scalar));
        result = result.sub(&term)?;
    }
    Ok(result)
}

/// The difference binary-minus-nary at N = 2, namely
/// C (A - B) [Laplace(F) G - F Laplace(G)].
pub fn binary_nary_discrepancy(
    f: &OrthoSeries,
    k: i64,
    g: &OrthoSeries,
    l: i64,
    n: i64,
) -> Result<OrthoSeries, SeriesError> {
    let co = bracket_coefficients(n, k, l);
    let factor = &co.c * (&co.a - &co.b);
    let inner = laplace(f).multiply(g).sub(&f.multiply(&laplace(g)))?;
    Ok(inner.scaled_by(&factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::igusa::test_support::TOWER;
    use crate::series::ortho::IndexKey;
    use num_traits::Zero;

    fn is_zero(series: &OrthoSeries) -> bool {
        series.terms().all(|(_, c)| c.is_zero())
    }

    #[test]
    fn coefficients_for_the_rank_three_pair() {
        let co = bracket_coefficients(3, 5, 30);
        assert_eq!(co.a, rat(-9, 2));
        assert_eq!(co.b, rat(-59, 2));
        assert_eq!(co.c, rat(-69, 2));
    }

    #[test]
    fn laplace_is_diagonal_in_the_discriminant() {
        let key = IndexKey { n: 2, r: 2, m: 4 };
        let f = OrthoSeries::monomial(key, rat(1, 3), 6).unwrap();
        let lf = laplace(&f);
        // R^2 - 4NM = 4 - 32 = -28
        assert_eq!(lf.coeff(&key), rat(-28, 3));
    }

    #[test]
    fn bracket_is_symmetric_in_its_arguments() {
        let t = &TOWER;
        let lhs = bracket(&t.e4.series, 4, &t.e6.series, 6, 3).unwrap();
        let rhs = bracket(&t.e6.series, 6, &t.e4.series, 4, 3).unwrap();
        let prec = lhs.prec().min(rhs.prec());
        assert!(lhs.eq_within(&rhs, prec));
        assert!(!is_zero(&lhs));
    }

    #[test]
    fn weight_five_and_thirty_bracket_to_zero() {
        // in signature (3, 2) there is no nonzero form of the bracket's
        // weight, so the bracket of psi5 and phi30 vanishes identically
        let t = &TOWER;
        let br = bracket(&t.psi5.series, 5, &t.phi30.series, 30, 3).unwrap();
        assert!(br.prec() >= 5);
        assert!(is_zero(&br));
    }

    #[test]
    fn nary_matches_binary_up_to_the_documented_correction() {
        let t = &TOWER;
        let f = (&t.e4.series, 4);
        let g = (&t.e6.series, 6);
        let binary = bracket(f.0, f.1, g.0, g.1, 3).unwrap();
        let nary = nary_bracket(&[f, g], 3).unwrap();
        let correction = binary_nary_discrepancy(f.0, f.1, g.0, g.1, 3).unwrap();
        let prec = binary.prec().min(nary.prec()).min(correction.prec());
        let diff = binary.sub(&nary).unwrap();
        assert!(diff.eq_within(&correction, prec));
        // the two conventions genuinely differ here: C(A - B) = -19
        assert!(!is_zero(&diff.truncated(prec)));
    }

    #[test]
    fn nary_bracket_of_three_forms_has_the_right_weight_count() {
        let t = &TOWER;
        let br = nary_bracket(
            &[
                (&t.e4.series, 4),
                (&t.e4.series, 4),
                (&t.e6.series, 6),
            ],
            3,
        )
        .unwrap();
        assert!(!is_zero(&br));
    }
}
