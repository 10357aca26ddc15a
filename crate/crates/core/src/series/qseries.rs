//! Sparse one-variable q-expansions with fractional exponents.
//!
//! A [`QSeries`] stores terms c * q^(e / scale) as a sorted map from the
//! scaled exponent e to the rational coefficient c.  The scale divides 24,
//! which covers eta (exponents in 1/24 Z) and the theta constants
//! (exponents in 1/8 Z).  Precision is tracked in scaled units: the series
//! is exact for all scaled exponents <= prec, and every operation shrinks
//! the bound to whatever its inputs can certify.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use super::SeriesError;
use crate::exact::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    scale: i64,
    prec: i64,
    terms: BTreeMap<i64, Rat>,
}

impl QSeries {
    /// The zero series at the given scale, exact through q^(prec/scale).
    pub fn zero(scale: i64, prec: i64) -> Self {
        assert!(scale >= 1 && 24 % scale == 0, "scale must divide 24");
        QSeries {
            scale,
            prec,
            terms: BTreeMap::new(),
        }
    }

    /// The constant series 1 at integer scale.
    pub fn one(prec: i64) -> Self {
        Self::monomial(1, 0, Rat::from_integer(1.into()), prec)
    }

    /// The single term c * q^(e/scale).
    pub fn monomial(scale: i64, e: i64, c: Rat, prec: i64) -> Self {
        let mut s = Self::zero(scale, prec);
        if !c.is_zero() && e <= prec {
            s.terms.insert(e, c);
        }
        s
    }

    /// Builds a series from (scaled exponent, coefficient) pairs, dropping
    /// zeros and anything beyond the precision bound.
    pub fn from_terms<I>(scale: i64, prec: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rat)>,
    {
        let mut s = Self::zero(scale, prec);
        for (e, c) in terms {
            if c.is_zero() || e > prec {
                continue;
            }
            let slot = s.terms.entry(e).or_insert_with(Rat::zero);
            *slot += c;
            if slot.is_zero() {
                s.terms.remove(&e);
            }
        }
        s
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Precision bound in scaled units.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> + '_ {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of q^(e/scale), zero when absent.
    pub fn coeff(&self, e: i64) -> Rat {
        self.terms.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the integer power q^n.
    pub fn coeff_q(&self, n: i64) -> Rat {
        self.coeff(n * self.scale)
    }

    /// Least scaled exponent with a nonzero coefficient.
    pub fn min_order(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    fn min_order_or_horizon(&self) -> i64 {
        self.min_order().unwrap_or(self.prec + 1)
    }

    /// Reinterprets the series at a coarser grid refinement; the new scale
    /// must be a multiple of the old one.
    pub fn rescaled(&self, scale: i64) -> Self {
        assert!(scale >= 1 && 24 % scale == 0, "scale must divide 24");
        assert!(
            scale % self.scale == 0,
            "cannot rescale {} into {}",
            self.scale,
            scale
        );
        let f = scale / self.scale;
        QSeries {
            scale,
            prec: self.prec * f,
            terms: self.terms.iter().map(|(&e, c)| (e * f, c.clone())).collect(),
        }
    }

    /// Puts two series on a common scale.
    pub fn unified(&self, other: &Self) -> (Self, Self) {
        let l = self.scale.lcm(&other.scale);
        (self.rescaled(l), other.rescaled(l))
    }

    /// Drops denominators from the scale that no stored exponent and no
    /// precision-relevant information actually uses.
    pub fn reduced(&self) -> Self {
        let mut g = self.scale;
        for &e in self.terms.keys() {
            g = g.gcd(&e);
            if g == 1 {
                return self.clone();
            }
        }
        if g == self.scale && self.scale == 1 {
            return self.clone();
        }
        let g = g.gcd(&self.scale);
        QSeries {
            scale: self.scale / g,
            prec: self.prec.div_euclid(g),
            terms: self.terms.iter().map(|(&e, c)| (e / g, c.clone())).collect(),
        }
    }

    pub fn truncated(&self, prec: i64) -> Self {
        assert!(prec <= self.prec, "cannot extend a precision bound");
        QSeries {
            scale: self.scale,
            prec,
            terms: self
                .terms
                .iter()
                .filter(|(&e, _)| e <= prec)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
        }
    }

    /// Multiplies by q^(e/scale).
    pub fn shifted(&self, e: i64) -> Self {
        QSeries {
            scale: self.scale,
            prec: self.prec + e,
            terms: self.terms.iter().map(|(&k, c)| (k + e, c.clone())).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        QSeries {
            scale: self.scale,
            prec: self.prec,
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn scaled_by(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.scale, self.prec);
        }
        QSeries {
            scale: self.scale,
            prec: self.prec,
            terms: self.terms.iter().map(|(&e, x)| (e, x * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.unified(other);
        let prec = a.prec.min(b.prec);
        let mut terms = BTreeMap::new();
        for (e, c) in a.terms.iter().chain(b.terms.iter()) {
            if *e > prec {
                continue;
            }
            let slot = terms.entry(*e).or_insert_with(Rat::zero);
            *slot += c;
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        QSeries {
            scale: a.scale,
            prec,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Truncated product.  The certified bound is
    /// min(prec_a + ord_b, prec_b + ord_a): unknown terms of one factor
    /// first matter when multiplied by the other factor's lowest term.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.unified(other);
        let prec = (a.prec + b.min_order_or_horizon()).min(b.prec + a.min_order_or_horizon());
        let mut terms: BTreeMap<i64, Rat> = BTreeMap::new();
        for (&ea, ca) in &a.terms {
            for (&eb, cb) in &b.terms {
                let e = ea + eb;
                if e > prec {
                    break;
                }
                let slot = terms.entry(e).or_insert_with(Rat::zero);
                *slot += ca * cb;
            }
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        QSeries {
            scale: a.scale,
            prec,
            terms,
        }
    }

    /// Integer power by iterated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        // The constant 1 is exact everywhere; give it a horizon far beyond
        // any realistic truncation so the product rule picks the other bound.
        let mut acc = Self::one(1 << 40).rescaled(self.scale);
        let mut base = self.clone();
        let mut k = k;
        loop {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k == 0 {
                return acc;
            }
            base = base.mul(&base);
        }
    }

    /// Multiplicative inverse of a series with invertible leading term.
    /// Writing the input as c q^(v/scale) (1 + u), the inverse is exact
    /// through scaled exponent prec - 2v.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let v = self
            .min_order()
            .ok_or(SeriesError::EmptySupport("inversion"))?;
        let lead = self.coeff(v);
        let target = self.prec - 2 * v;
        // Coefficients h_e of the inverse of the unit part 1 + u, with
        // u_e = coeff(v + e)/lead: h_0 = 1, h_e = -sum_{0<j<=e} u_j h_{e-j}.
        let mut unit: BTreeMap<i64, Rat> = BTreeMap::new();
        for (&e, c) in self.terms.range(v + 1..) {
            unit.insert(e - v, c / &lead);
        }
        let mut inv: BTreeMap<i64, Rat> = BTreeMap::new();
        inv.insert(0, Rat::from_integer(1.into()));
        // the unit-part coefficients are needed through target + v, since
        // the final exponents are shifted down by v
        for e in 1..=(target + v).max(0) {
            let mut acc = Rat::zero();
            for (&j, uj) in unit.range(1..=e) {
                if let Some(h) = inv.get(&(e - j)) {
                    acc += uj * h;
                }
            }
            if !acc.is_zero() {
                inv.insert(e, -acc);
            }
        }
        let mut terms = BTreeMap::new();
        for (e, c) in inv {
            if e - v <= target {
                terms.insert(e - v, c / &lead);
            }
        }
        Ok(QSeries {
            scale: self.scale,
            prec: target,
            terms,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        let (a, b) = self.unified(other);
        Ok(a.mul(&b.inverse()?))
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(q^({}/{}))", self.prec + 1, self.scale);
        }
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if self.scale == 1 {
                write!(f, "({c})q^{e}")?;
            } else {
                write!(f, "({c})q^({e}/{})", self.scale)?;
            }
        }
        write!(f, " + O(q^({}/{}))", self.prec + 1, self.scale)
    }
}
