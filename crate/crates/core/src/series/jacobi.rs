//! Sparse two-variable expansions in q and a Laurent variable z.
//!
//! A [`JacobiSeries`] stores terms c * q^(n / qscale) z^(r / zscale) keyed
//! by the scaled exponent pair (n, r).  The q-scale divides 24 as in
//! [`super::qseries`]; the z-scale is 1 or 2, enough for the half-integer
//! powers carried by the odd Jacobi theta function.  Precision applies to
//! the q-direction only: every z-layer of a scaled q-exponent <= prec is
//! complete, which is the right notion for Jacobi forms because each
//! q-layer is a finite Laurent polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use super::qseries::QSeries;
use super::SeriesError;
use crate::exact::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiSeries {
    qscale: i64,
    zscale: i64,
    prec: i64,
    terms: BTreeMap<(i64, i64), Rat>,
}

impl JacobiSeries {
    pub fn zero(qscale: i64, zscale: i64, prec: i64) -> Self {
        assert!(qscale >= 1 && 24 % qscale == 0, "q-scale must divide 24");
        assert!(zscale == 1 || zscale == 2, "z-scale must be 1 or 2");
        JacobiSeries {
            qscale,
            zscale,
            prec,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(qscale: i64, zscale: i64, prec: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = ((i64, i64), Rat)>,
    {
        let mut s = Self::zero(qscale, zscale, prec);
        for ((n, r), c) in terms {
            if c.is_zero() || n > prec {
                continue;
            }
            let slot = s.terms.entry((n, r)).or_insert_with(Rat::zero);
            *slot += c;
            if slot.is_zero() {
                s.terms.remove(&(n, r));
            }
        }
        s
    }

    pub fn qscale(&self) -> i64 {
        self.qscale
    }

    pub fn zscale(&self) -> i64 {
        self.zscale
    }

    /// Precision bound on scaled q-exponents.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), &Rat)> + '_ {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of q^(n/qscale) z^(r/zscale), zero when absent.
    pub fn coeff(&self, n: i64, r: i64) -> Rat {
        self.terms.get(&(n, r)).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the integer-exponent term q^n z^r.
    pub fn coeff_int(&self, n: i64, r: i64) -> Rat {
        self.coeff(n * self.qscale, r * self.zscale)
    }

    pub fn min_qorder(&self) -> Option<i64> {
        self.terms.keys().map(|&(n, _)| n).min()
    }

    fn min_qorder_or_horizon(&self) -> i64 {
        self.min_qorder().unwrap_or(self.prec + 1)
    }

    /// Moves the series onto finer grids; both targets must be multiples
    /// of the current scales.
    pub fn rescaled(&self, qscale: i64, zscale: i64) -> Self {
        assert!(qscale % self.qscale == 0 && zscale % self.zscale == 0);
        let fq = qscale / self.qscale;
        let fz = zscale / self.zscale;
        let mut s = Self::zero(qscale, zscale, self.prec * fq);
        for (&(n, r), c) in &self.terms {
            s.terms.insert((n * fq, r * fz), c.clone());
        }
        s
    }

    pub fn unified(&self, other: &Self) -> (Self, Self) {
        let q = self.qscale.lcm(&other.qscale);
        let z = self.zscale.lcm(&other.zscale);
        (self.rescaled(q, z), other.rescaled(q, z))
    }

    /// Shrinks both scales as far as the stored exponents allow.
    pub fn reduced(&self) -> Self {
        let mut gq = self.qscale;
        let mut gz = self.zscale;
        for &(n, r) in self.terms.keys() {
            gq = gq.gcd(&n);
            gz = gz.gcd(&r);
        }
        if gq == 1 && gz == 1 {
            return self.clone();
        }
        let mut s = Self::zero(self.qscale / gq, self.zscale / gz, self.prec.div_euclid(gq));
        for (&(n, r), c) in &self.terms {
            s.terms.insert((n / gq, r / gz), c.clone());
        }
        s
    }

    pub fn truncated(&self, prec: i64) -> Self {
        assert!(prec <= self.prec, "cannot extend a precision bound");
        JacobiSeries {
            qscale: self.qscale,
            zscale: self.zscale,
            prec,
            terms: self
                .terms
                .iter()
                .filter(|(&(n, _), _)| n <= prec)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        JacobiSeries {
            qscale: self.qscale,
            zscale: self.zscale,
            prec: self.prec,
            terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect(),
        }
    }

    pub fn scaled_by(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.qscale, self.zscale, self.prec);
        }
        JacobiSeries {
            qscale: self.qscale,
            zscale: self.zscale,
            prec: self.prec,
            terms: self.terms.iter().map(|(&k, x)| (k, x * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.unified(other);
        let prec = a.prec.min(b.prec);
        let mut terms: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for (k, c) in a.terms.iter().chain(b.terms.iter()) {
            if k.0 > prec {
                continue;
            }
            let slot = terms.entry(*k).or_insert_with(Rat::zero);
            *slot += c;
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        JacobiSeries {
            qscale: a.qscale,
            zscale: a.zscale,
            prec,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Truncated product with the same q-precision rule as for plain
    /// q-series; z-layers are never truncated.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.unified(other);
        let prec = (a.prec + b.min_qorder_or_horizon()).min(b.prec + a.min_qorder_or_horizon());
        let mut terms: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for (&(na, ra), ca) in &a.terms {
            for (&(nb, rb), cb) in &b.terms {
                let n = na + nb;
                if n > prec {
                    continue;
                }
                let slot = terms.entry((n, ra + rb)).or_insert_with(Rat::zero);
                *slot += ca * cb;
            }
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        JacobiSeries {
            qscale: a.qscale,
            zscale: a.zscale,
            prec,
            terms,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::from_terms(self.qscale, self.zscale, (1 << 40) * self.qscale, [((0, 0), Rat::from_integer(1.into()))]);
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

    /// Multiplies by a one-variable q-series.
    pub fn mul_q(&self, other: &QSeries) -> Self {
        self.mul(&Self::from_q(other, self.zscale))
    }

    /// Divides by a one-variable q-series with invertible leading term.
    pub fn div_q(&self, other: &QSeries) -> Result<Self, SeriesError> {
        Ok(self.mul_q(&other.inverse()?))
    }

    /// Embeds a q-series as a Jacobi series constant in z.
    pub fn from_q(q: &QSeries, zscale: i64) -> Self {
        let mut s = Self::zero(q.scale(), zscale, q.prec());
        for (e, c) in q.terms() {
            s.terms.insert((e, 0), c.clone());
        }
        s
    }

    /// True when every stored layer is symmetric under z -> 1/z.
    pub fn is_z_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(&(n, r), c)| self.coeff(n, -r) == *c)
    }
}

impl fmt::Display for JacobiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(q^({}/{}))", self.prec + 1, self.qscale);
        }
        for (i, (&(n, r), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})q^({n}/{})z^({r}/{})", self.qscale, self.zscale)?;
        }
        write!(f, " + O(q^({}/{}))", self.prec + 1, self.qscale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    #[test]
    fn mul_combines_layers() {
        // (z + z^-1) * (z - z^-1) = z^2 - z^-2
        let a = JacobiSeries::from_terms(1, 1, 5, [((0, 1), rat_int(1)), ((0, -1), rat_int(1))]);
        let b = JacobiSeries::from_terms(1, 1, 5, [((0, 1), rat_int(1)), ((0, -1), rat_int(-1))]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(0, 2), rat_int(1));
        assert_eq!(p.coeff(0, -2), rat_int(-1));
        assert_eq!(p.coeff(0, 0), rat_int(0));
        assert!(!p.is_z_symmetric());
    }

    #[test]
    fn half_integer_z_powers_square_to_integers() {
        // (z^(1/2) - z^(-1/2))^2 = z - 2 + z^-1
        let s = JacobiSeries::from_terms(1, 2, 8, [((0, 1), rat_int(1)), ((0, -1), rat_int(-1))]);
        let sq = s.mul(&s).reduced();
        assert_eq!(sq.zscale(), 1);
        assert_eq!(sq.coeff_int(0, 1), rat_int(1));
        assert_eq!(sq.coeff_int(0, 0), rat_int(-2));
        assert_eq!(sq.coeff_int(0, -1), rat_int(1));
        assert!(sq.is_z_symmetric());
    }

    #[test]
    fn q_precision_respects_min_orders() {
        let a = JacobiSeries::from_terms(1, 1, 6, [((2, 1), rat_int(1))]);
        let b = JacobiSeries::from_terms(1, 1, 4, [((1, -1), rat_int(5))]);
        let p = a.mul(&b);
        // min(6 + 1, 4 + 2) = 6
        assert_eq!(p.prec(), 6);
        assert_eq!(p.coeff(3, 0), rat_int(5));
    }

    #[test]
    fn div_q_round_trip() {
        let num = JacobiSeries::from_terms(
            1,
            1,
            10,
            [((1, 1), rat_int(2)), ((1, -1), rat_int(2)), ((2, 0), rat_int(-6))],
        );
        let den = QSeries::from_terms(1, 10, [(0, rat_int(2)), (1, rat_int(4))]);
        let q = num.div_q(&den).unwrap();
        let back = q.mul_q(&den).truncated(q.prec().min(num.prec()));
        assert_eq!(back, num.truncated(back.prec()));
    }
}
