//! Sparse three-variable Fourier expansions on the degree-two tube domain.
//!
//! A term c * q^n zeta^r xi^m is stored at the doubled index
//! (N, R, M) = (2n, 2r, 2m), so that every index is an integer triple even
//! when the exponents are half-integers.  Valid triples have all three
//! entries of the same parity: the even class carries integral Fourier
//! indices, the odd class carries the half-integral ones produced by
//! square roots such as the weight-5 root of the first Igusa cusp form.
//!
//! The total weight of an index is t = N + M, always even.  A series with
//! precision P is exact on every layer t <= 2P; all arithmetic tracks the
//! largest bound it can certify:
//!
//! * products are exact through min(2P_F + t0(G), 2P_G + t0(F)), where t0
//!   is the least total in the support;
//! * a square root of a series with t0 = 2u0 is exact through 2P - u0;
//! * a quotient F/G is exact through min(2P_F - t0(G), 2P_G + t0(F) - 2 t0(G)).
//!
//! Square roots and exact quotients run layer by layer: the layer of total
//! t is a Laurent polynomial in zeta weighted by powers of q, and the
//! recurrences only ever divide by the leading layer, which reduces to
//! exact bivariate polynomial division.  Signs of square roots and
//! contents are fixed by the first index in the layer order
//! (t, N, -R): the earliest term of the result is made positive.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::SeriesError;
use crate::exact::Rat;

/// A doubled Fourier index (N, R, M) = (2n, 2r, 2m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexKey {
    pub n: i64,
    pub r: i64,
    pub m: i64,
}

impl IndexKey {
    pub fn new(n: i64, r: i64, m: i64) -> Self {
        IndexKey { n, r, m }
    }

    /// Total weight t = N + M; even for every valid index.
    pub fn total(&self) -> i64 {
        self.n + self.m
    }

    /// The scaled discriminant D = 4NM - R^2 = 16 Q(lambda).
    pub fn disc(&self) -> i64 {
        4 * self.n * self.m - self.r * self.r
    }

    /// The parity class, or an error when the entries are mixed.
    pub fn class(&self) -> Result<Parity, SeriesError> {
        let (a, b, c) = (self.n & 1, self.r & 1, self.m & 1);
        if a == b && b == c {
            Ok(if a == 0 { Parity::Integral } else { Parity::HalfIntegral })
        } else {
            Err(SeriesError::MixedIndex(self.n, self.r, self.m))
        }
    }

    /// Exchanges the roles of q and xi.
    pub fn swapped(&self) -> Self {
        IndexKey {
            n: self.m,
            r: self.r,
            m: self.n,
        }
    }

    fn add(&self, other: &Self) -> Self {
        IndexKey {
            n: self.n + other.n,
            r: self.r + other.r,
            m: self.m + other.m,
        }
    }

    /// The order used to anchor sign conventions: layers first, then N
    /// ascending, then R descending, so the positive-R representative of
    /// a pair comes first.
    fn sign_order(&self, other: &Self) -> Ordering {
        (self.total(), self.n, -self.r).cmp(&(other.total(), other.n, -other.r))
    }
}

impl fmt::Display for IndexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.r, self.m)
    }
}

/// Whether the doubled indices of a series are all even or all odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Integral,
    HalfIntegral,
}

impl Parity {
    /// Parity of a product (or quotient) of series of the two classes.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Integral
        } else {
            Parity::HalfIntegral
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Integral => write!(f, "integral"),
            Parity::HalfIntegral => write!(f, "half-integral"),
        }
    }
}

/// Direction of the three scaled partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    Z,
    Omega,
}

/// A zeta-Laurent polynomial weighted by powers of q: the shape of one
/// layer of fixed total weight, keyed by (N, R).
type Layer = BTreeMap<(i64, i64), Rat>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoSeries {
    parity: Parity,
    prec: i64,
    terms: BTreeMap<IndexKey, Rat>,
}

impl OrthoSeries {
    pub fn zero(parity: Parity, prec: i64) -> Self {
        OrthoSeries {
            parity,
            prec,
            terms: BTreeMap::new(),
        }
    }

    /// A single term; the parity class is read off the index.
    pub fn monomial(key: IndexKey, coeff: Rat, prec: i64) -> Result<Self, SeriesError> {
        let parity = key.class()?;
        let mut s = Self::zero(parity, prec);
        if !coeff.is_zero() && key.total() <= 2 * prec {
            s.terms.insert(key, coeff);
        }
        Ok(s)
    }

    /// Builds a series from index/coefficient pairs, validating that all
    /// indices live in the stated parity class and dropping zeros and
    /// terms beyond the precision bound.
    pub fn from_terms<I>(parity: Parity, prec: i64, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (IndexKey, Rat)>,
    {
        let mut s = Self::zero(parity, prec);
        for (key, coeff) in terms {
            if key.class()? != parity {
                return Err(SeriesError::ParityMismatch);
            }
            if coeff.is_zero() || key.total() > 2 * prec {
                continue;
            }
            let slot = s.terms.entry(key).or_insert_with(Rat::zero);
            *slot += coeff;
            if slot.is_zero() {
                s.terms.remove(&key);
            }
        }
        Ok(s)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// The precision bound P: layers with N + M <= 2P are exact.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexKey, &Rat)> + '_ {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &IndexKey) -> Rat {
        self.terms.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Least total weight in the support.
    pub fn min_order(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.total()).min()
    }

    fn min_order_or_horizon(&self) -> i64 {
        self.min_order().unwrap_or(2 * self.prec + 2)
    }

    /// The earliest index in the sign-anchoring order (t, N, -R).
    pub fn leading_index(&self) -> Option<IndexKey> {
        self.terms
            .keys()
            .copied()
            .min_by(|a, b| a.sign_order(b))
    }

    /// True when every stored coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one())
    }

    pub fn truncated(&self, prec: i64) -> Self {
        assert!(prec <= self.prec, "cannot extend a precision bound");
        OrthoSeries {
            parity: self.parity,
            prec,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.total() <= 2 * prec)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// Truncated structural equality: both series restricted to layers
    /// t <= 2 prec agree term by term.
    pub fn eq_within(&self, other: &Self, prec: i64) -> bool {
        assert!(prec <= self.prec && prec <= other.prec);
        self.parity == other.parity
            && self.truncated(prec).terms == other.truncated(prec).terms
    }

    pub fn neg(&self) -> Self {
        OrthoSeries {
            parity: self.parity,
            prec: self.prec,
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }

    pub fn scaled_by(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.parity, self.prec);
        }
        OrthoSeries {
            parity: self.parity,
            prec: self.prec,
            terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.parity != other.parity {
            return Err(SeriesError::ParityMismatch);
        }
        let prec = self.prec.min(other.prec);
        let mut terms: BTreeMap<IndexKey, Rat> = BTreeMap::new();
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            if k.total() > 2 * prec {
                continue;
            }
            let slot = terms.entry(*k).or_insert_with(Rat::zero);
            *slot += c;
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        Ok(OrthoSeries {
            parity: self.parity,
            prec,
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    /// Groups the support into layers of fixed total weight.
    fn layers(&self) -> BTreeMap<i64, Layer> {
        let mut out: BTreeMap<i64, Layer> = BTreeMap::new();
        for (k, c) in &self.terms {
            out.entry(k.total())
                .or_default()
                .insert((k.n, k.r), c.clone());
        }
        out
    }

    fn from_layers(
        parity: Parity,
        prec: i64,
        layers: BTreeMap<i64, Layer>,
    ) -> Result<Self, SeriesError> {
        Self::from_terms(
            parity,
            prec,
            layers.into_iter().flat_map(|(t, layer)| {
                layer
                    .into_iter()
                    .map(move |((n, r), c)| (IndexKey::new(n, r, t - n), c))
            }),
        )
    }

    /// Truncated product.  Work is split over output layers, which keeps
    /// the result bit-identical regardless of thread count because each
    /// output layer is accumulated independently in a fixed order.
    pub fn multiply(&self, other: &Self) -> Self {
        let parity = self.parity.combine(other.parity);
        let cap = (2 * self.prec + other.min_order_or_horizon())
            .min(2 * other.prec + self.min_order_or_horizon());
        let a: Vec<(i64, Vec<(IndexKey, Rat)>)> = self
            .layers()
            .into_iter()
            .map(|(t, l)| {
                (
                    t,
                    l.into_iter()
                        .map(|((n, r), c)| (IndexKey::new(n, r, t - n), c))
                        .collect(),
                )
            })
            .collect();
        let b: Vec<(i64, Vec<(IndexKey, Rat)>)> = other
            .layers()
            .into_iter()
            .map(|(t, l)| {
                (
                    t,
                    l.into_iter()
                        .map(|((n, r), c)| (IndexKey::new(n, r, t - n), c))
                        .collect(),
                )
            })
            .collect();
        let mut groups: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
        for (ia, (ta, _)) in a.iter().enumerate() {
            for (ib, (tb, _)) in b.iter().enumerate() {
                if ta + tb <= cap {
                    groups.entry(ta + tb).or_default().push((ia, ib));
                }
            }
        }
        let groups: Vec<(i64, Vec<(usize, usize)>)> = groups.into_iter().collect();
        let chunks: Vec<Vec<(IndexKey, Rat)>> = groups
            .par_iter()
            .map(|(_, pairs)| {
                let mut acc: BTreeMap<IndexKey, Rat> = BTreeMap::new();
                for &(ia, ib) in pairs {
                    for (ka, ca) in &a[ia].1 {
                        for (kb, cb) in &b[ib].1 {
                            let slot = acc.entry(ka.add(kb)).or_insert_with(Rat::zero);
                            *slot += ca * cb;
                        }
                    }
                }
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
            })
            .collect();
        let mut terms: BTreeMap<IndexKey, Rat> = BTreeMap::new();
        for chunk in chunks {
            terms.extend(chunk);
        }
        OrthoSeries {
            parity,
            prec: cap / 2,
            terms,
        }
    }

    /// Square root with the sign fixed by making the earliest term of the
    /// result positive in the (t, N, -R) order.  The input must have a
    /// perfect-square leading layer; the root of a series exact through
    /// 2P with minimal total 2 u0 is exact through 2P - u0.
    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        let t0 = self
            .min_order()
            .ok_or(SeriesError::EmptySupport("square root"))?;
        if t0 % 4 != 0 {
            return Err(SeriesError::NotASquare(format!(
                "minimal total weight {t0} is not twice an even number"
            )));
        }
        let u0 = t0 / 2;
        let cap = 2 * self.prec - u0;
        let f = self.layers();
        let mut base = layer_sqrt(&f[&t0])?;
        let lead_negative = base
            .iter()
            .min_by_key(|(&(n, r), _)| (n, -r))
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false);
        if lead_negative {
            for v in base.values_mut() {
                *v = -v.clone();
            }
        }
        let twice_base: Layer = base.iter().map(|(&k, c)| (k, c + c)).collect();
        let mut s: BTreeMap<i64, Layer> = BTreeMap::new();
        s.insert(u0, base);
        let mut u = u0 + 2;
        while u <= cap {
            let mut rhs = f.get(&(u0 + u)).cloned().unwrap_or_default();
            let mut i = u0 + 2;
            while i <= (u0 + u) / 2 {
                let j = u0 + u - i;
                if j >= u {
                    i += 2;
                    continue;
                }
                if let (Some(si), Some(sj)) = (s.get(&i), s.get(&j)) {
                    let mut prod = layer_mul(si, sj);
                    if i != j {
                        for c in prod.values_mut() {
                            *c = &*c + &*c;
                        }
                    }
                    layer_sub_assign(&mut rhs, &prod);
                }
                i += 2;
            }
            let su = layer_div(&rhs, &twice_base)
                .map_err(|e| SeriesError::NotASquare(format!("layer t = {}: {e}", u0 + u)))?;
            if !su.is_empty() {
                s.insert(u, su);
            }
            u += 2;
        }
        let parity = parity_of_layers(&s)?;
        Self::from_layers(parity, cap / 2, s)
    }

    /// Exact quotient F / G.  Fails when the division leaves the ring of
    /// series with uniform parity, as detected layer by layer.
    pub fn divide_exact(&self, g: &Self) -> Result<Self, SeriesError> {
        let t0g = g
            .min_order()
            .ok_or(SeriesError::EmptySupport("division"))?;
        let parity = self.parity.combine(g.parity);
        if self.is_zero() {
            return Ok(Self::zero(parity, (2 * self.prec - t0g) / 2));
        }
        let t0f = self.min_order().expect("nonzero series has a least layer");
        let t0q = t0f - t0g;
        let cap = (2 * self.prec - t0g).min(2 * g.prec + t0q - t0g);
        let f = self.layers();
        let gl = g.layers();
        let base = &gl[&t0g];
        let mut q: BTreeMap<i64, Layer> = BTreeMap::new();
        let mut u = t0q;
        while u <= cap {
            let mut rhs = f.get(&(u + t0g)).cloned().unwrap_or_default();
            for (v, qv) in &q {
                if let Some(gv) = gl.get(&(u + t0g - v)) {
                    layer_sub_assign(&mut rhs, &layer_mul(qv, gv));
                }
            }
            let qu = layer_div(&rhs, base)
                .map_err(|e| SeriesError::InexactDivision(format!("layer t = {u}: {e}")))?;
            if !qu.is_empty() {
                q.insert(u, qu);
            }
            u += 2;
        }
        for (t, layer) in &q {
            for &(n, r) in layer.keys() {
                if IndexKey::new(n, r, t - n).class() != Ok(parity) {
                    return Err(SeriesError::InexactDivision(format!(
                        "quotient term ({n}, {r}, {}) leaves the {parity} class",
                        t - n
                    )));
                }
            }
        }
        Self::from_layers(parity, cap / 2, q)
    }

    /// Scaled partial derivative: multiplies each term by the exponent
    /// n, r or m (that is, half the stored doubled entry).
    pub fn derivative(&self, axis: Axis) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(k, c)| {
                let e = match axis {
                    Axis::Tau => k.n,
                    Axis::Z => k.r,
                    Axis::Omega => k.m,
                };
                if e == 0 {
                    None
                } else {
                    Some((*k, c * Rat::new(BigInt::from(e), BigInt::from(2))))
                }
            })
            .collect();
        OrthoSeries {
            parity: self.parity,
            prec: self.prec,
            terms,
        }
    }

    /// Exchanges q and xi; an involution on every layer.
    pub fn swap_tau_omega(&self) -> Self {
        OrthoSeries {
            parity: self.parity,
            prec: self.prec,
            terms: self.terms.iter().map(|(k, c)| (k.swapped(), c.clone())).collect(),
        }
    }

    /// Sums out the zeta direction: entry (N, M) = sum over R of the
    /// stored coefficients.  Entries that telescope to zero are kept, so
    /// vanishing along the diagonal stays visible.
    pub fn restrict_diagonal(&self) -> BTreeMap<(i64, i64), Rat> {
        let mut out: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for (k, c) in &self.terms {
            *out.entry((k.n, k.m)).or_insert_with(Rat::zero) += c;
        }
        out
    }

    /// Splits off the rational content: returns (F / c, c) where c is the
    /// gcd of the numerators over the lcm of the denominators, signed so
    /// that the earliest term of F / c in the (t, N, -R) order is
    /// positive.
    pub fn content_normalize(&self) -> Result<(Self, Rat), SeriesError> {
        if self.terms.is_empty() {
            return Err(SeriesError::ZeroContent);
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = (&den_lcm / den_lcm.gcd(c.denom())) * c.denom();
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        let lead = self
            .leading_index()
            .expect("nonzero series has a leading index");
        if self.terms[&lead].is_negative() {
            content = -content;
        }
        let inv = Rat::one() / &content;
        Ok((self.scaled_by(&inv), content))
    }
}

impl fmt::Display for OrthoSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(t > {})", 2 * self.prec);
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}){k}")?;
        }
        write!(f, " + O(t > {})", 2 * self.prec)
    }
}

fn parity_of_layers(layers: &BTreeMap<i64, Layer>) -> Result<Parity, SeriesError> {
    for (t, layer) in layers {
        if let Some(&(n, r)) = layer.keys().next() {
            return IndexKey::new(n, r, t - n).class();
        }
    }
    Ok(Parity::Integral)
}

// ---------------------------------------------------------------------------
// layer arithmetic: bivariate polynomials in q and zeta at fixed total
// ---------------------------------------------------------------------------

fn layer_mul(a: &Layer, b: &Layer) -> Layer {
    let mut out = Layer::new();
    for (&(na, ra), ca) in a {
        for (&(nb, rb), cb) in b {
            let slot = out.entry((na + nb, ra + rb)).or_insert_with(Rat::zero);
            *slot += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn layer_sub_assign(a: &mut Layer, b: &Layer) {
    for (k, c) in b {
        let slot = a.entry(*k).or_insert_with(Rat::zero);
        *slot -= c;
        if slot.is_zero() {
            a.remove(k);
        }
    }
}

/// One-variable Laurent polynomial in zeta, keyed by the R exponent.
type ZPoly = BTreeMap<i64, Rat>;

/// Splits a layer into rows of fixed q-exponent N.
fn layer_rows(layer: &Layer) -> BTreeMap<i64, ZPoly> {
    let mut rows: BTreeMap<i64, ZPoly> = BTreeMap::new();
    for (&(n, r), c) in layer {
        rows.entry(n).or_default().insert(r, c.clone());
    }
    rows
}

fn rows_to_layer(rows: BTreeMap<i64, ZPoly>) -> Layer {
    rows.into_iter()
        .flat_map(|(n, row)| row.into_iter().map(move |(r, c)| ((n, r), c)))
        .collect()
}

/// Exact division of Laurent polynomials in zeta; errors when the
/// division leaves a remainder.
fn zpoly_div(num: &ZPoly, den: &ZPoly) -> Result<ZPoly, SeriesError> {
    let (&dtop, dlead) = den
        .last_key_value()
        .expect("division base has a nonzero row");
    let dbot = *den.keys().next().expect("nonempty");
    let floor = match num.keys().next() {
        Some(&nbot) => nbot - dbot,
        None => return Ok(ZPoly::new()),
    };
    let mut rem = num.clone();
    let mut quot = ZPoly::new();
    while let Some((&ntop, nlead)) = rem.last_key_value() {
        let e = ntop - dtop;
        if e < floor {
            return Err(SeriesError::InexactDivision(format!(
                "zeta exponent {ntop} is not reachable from the divisor"
            )));
        }
        let c = nlead / dlead;
        for (&k, v) in den {
            let slot = rem.entry(e + k).or_insert_with(Rat::zero);
            *slot -= &c * v;
            if slot.is_zero() {
                rem.remove(&(e + k));
            }
        }
        quot.insert(e, c);
    }
    Ok(quot)
}

/// Square root of a Laurent polynomial in zeta, up to sign.
fn zpoly_sqrt(p: &ZPoly) -> Result<ZPoly, SeriesError> {
    let (&vmin, cmin) = p
        .first_key_value()
        .expect("square root of an empty polynomial");
    if vmin % 2 != 0 {
        return Err(SeriesError::NotASquare(format!(
            "lowest zeta exponent {vmin} is odd"
        )));
    }
    let lead = rat_sqrt(cmin).ok_or_else(|| {
        SeriesError::NotASquare(format!("coefficient {cmin} is not a rational square"))
    })?;
    let vmax = *p.last_key_value().expect("nonempty").0;
    let half = vmin / 2;
    let top = vmax - vmin;
    // root coefficients s_j at exponent half + j, 0 <= j <= top / 2
    let mut s = ZPoly::new();
    s.insert(half, lead.clone());
    let twice_lead = &lead + &lead;
    for j in 1..=(top / 2).max(0) {
        let mut acc = p.get(&(vmin + j)).cloned().unwrap_or_else(Rat::zero);
        for i in 1..j {
            if let (Some(si), Some(sj)) = (s.get(&(half + i)), s.get(&(half + j - i))) {
                acc -= si * sj;
            }
        }
        let c = acc / &twice_lead;
        if !c.is_zero() {
            s.insert(half + j, c);
        }
    }
    // verify: affirms both squareness and the exponent cap
    let mut square = ZPoly::new();
    for (&i, a) in &s {
        for (&j, b) in &s {
            let slot = square.entry(i + j).or_insert_with(Rat::zero);
            *slot += a * b;
        }
    }
    square.retain(|_, c| !c.is_zero());
    if &square != p {
        return Err(SeriesError::NotASquare(
            "zeta polynomial is not a perfect square".into(),
        ));
    }
    Ok(s)
}

fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let sn = x.numer().sqrt();
    let sd = x.denom().sqrt();
    if &(&sn * &sn) == x.numer() && &(&sd * &sd) == x.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Exact division of one layer by another, by eliminating q-rows from the
/// bottom and dividing each row by the divisor's lowest row.
fn layer_div(num: &Layer, den: &Layer) -> Result<Layer, SeriesError> {
    if num.is_empty() {
        return Ok(Layer::new());
    }
    let den_rows = layer_rows(den);
    let (&a, base_row) = den_rows
        .first_key_value()
        .expect("division base is nonzero");
    let mut rem_rows = layer_rows(num);
    let cap = *rem_rows.last_key_value().expect("nonempty").0 - a;
    let mut quot_rows: BTreeMap<i64, ZPoly> = BTreeMap::new();
    loop {
        let Some((&bottom, _)) = rem_rows.first_key_value() else {
            break;
        };
        let j = bottom - a;
        if j > cap {
            return Err(SeriesError::InexactDivision(format!(
                "q-row {bottom} cannot be matched by the divisor"
            )));
        }
        let row = rem_rows.remove(&bottom).expect("present");
        let qj = zpoly_div(&row, base_row)?;
        // subtract q_j * den from the remaining rows
        for (&i, drow) in den_rows.iter().skip(1) {
            let target = rem_rows.entry(j + i).or_default();
            for (&rq, cq) in &qj {
                for (&rd, cd) in drow {
                    let slot = target.entry(rq + rd).or_insert_with(Rat::zero);
                    *slot -= cq * cd;
                    if slot.is_zero() {
                        target.remove(&(rq + rd));
                    }
                }
            }
            if target.is_empty() {
                rem_rows.remove(&(j + i));
            }
        }
        if !qj.is_empty() {
            quot_rows.insert(j, qj);
        }
    }
    Ok(rows_to_layer(quot_rows))
}

/// Square root of a layer, up to an overall sign chosen by the caller.
fn layer_sqrt(layer: &Layer) -> Result<Layer, SeriesError> {
    let rows = layer_rows(layer);
    let (&a, bottom) = rows.first_key_value().expect("square root of empty layer");
    if a % 2 != 0 {
        return Err(SeriesError::NotASquare(format!(
            "lowest q-row {a} is odd"
        )));
    }
    let top = *rows.last_key_value().expect("nonempty").0;
    let half = a / 2;
    let base = zpoly_sqrt(bottom)?;
    let twice_base: ZPoly = base.iter().map(|(&k, c)| (k, c + c)).collect();
    let mut s_rows: BTreeMap<i64, ZPoly> = BTreeMap::new();
    s_rows.insert(half, base);
    for j in 1..=(top - a).max(0) {
        let mut acc = rows.get(&(a + j)).cloned().unwrap_or_default();
        for i in 1..j {
            if let (Some(si), Some(sj)) = (s_rows.get(&(half + i)), s_rows.get(&(half + j - i))) {
                for (&ri, ci) in si {
                    for (&rj, cj) in sj {
                        let slot = acc.entry(ri + rj).or_insert_with(Rat::zero);
                        *slot -= ci * cj;
                        if slot.is_zero() {
                            acc.remove(&(ri + rj));
                        }
                    }
                }
            }
        }
        if acc.is_empty() {
            continue;
        }
        let sj = zpoly_div(&acc, &twice_base)
            .map_err(|_| SeriesError::NotASquare("q-row recurrence leaves a remainder".into()))?;
        if !sj.is_empty() {
            s_rows.insert(half + j, sj);
        }
    }
    let s = rows_to_layer(s_rows);
    let mut check = layer_mul(&s, &s);
    layer_sub_assign(&mut check, layer);
    if !check.is_empty() {
        return Err(SeriesError::NotASquare(
            "layer is not a perfect square".into(),
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};

    fn key(n: i64, r: i64, m: i64) -> IndexKey {
        IndexKey::new(n, r, m)
    }

    fn series(parity: Parity, prec: i64, terms: &[(i64, i64, i64, i64)]) -> OrthoSeries {
        OrthoSeries::from_terms(
            parity,
            prec,
            terms
                .iter()
                .map(|&(n, r, m, c)| (key(n, r, m), rat_int(c))),
        )
        .unwrap()
    }

    #[test]
    fn index_classes() {
        assert_eq!(key(2, 0, 4).class(), Ok(Parity::Integral));
        assert_eq!(key(1, -1, 3).class(), Ok(Parity::HalfIntegral));
        assert!(key(1, 0, 1).class().is_err());
        assert_eq!(key(2, 2, 4).disc(), 28);
        assert_eq!(key(1, 1, 1).disc(), 3);
    }

    #[test]
    fn multiply_of_monomials_adds_indices() {
        let a = series(Parity::HalfIntegral, 6, &[(1, 1, 1, 1), (1, -1, 1, -1)]);
        let sq = a.multiply(&a);
        assert_eq!(sq.parity(), Parity::Integral);
        // (qz^(1/2)x - qz^(-1/2)x)^2 in doubled coordinates
        assert_eq!(sq.coeff(&key(2, 2, 2)), rat_int(1));
        assert_eq!(sq.coeff(&key(2, 0, 2)), rat_int(-2));
        assert_eq!(sq.coeff(&key(2, -2, 2)), rat_int(1));
        // both factors have min order 2 and prec 6: cap = min(12 + 2, 12 + 2)
        assert_eq!(sq.prec(), 7);
    }

    #[test]
    fn sqrt_recovers_the_root_with_canonical_sign() {
        let root = series(
            Parity::HalfIntegral,
            6,
            &[(1, 1, 1, 1), (1, -1, 1, -1), (3, 1, 1, 2), (1, 3, 3, -5)],
        );
        let sq = root.multiply(&root);
        let back = sq.sqrt().unwrap();
        assert_eq!(back.prec(), sq.prec() - 1);
        assert!(back.eq_within(&root, back.prec().min(root.prec())));
        // flipping the sign of the square leaves the canonical root fixed
        let back2 = sq.sqrt().unwrap();
        assert_eq!(back, back2);
    }

    #[test]
    fn sqrt_canonical_sign_picks_positive_leading_term() {
        let root = series(Parity::HalfIntegral, 6, &[(1, 1, 1, -3), (1, -1, 1, 2)]);
        let sq = root.multiply(&root);
        let s = sq.sqrt().unwrap();
        // the earliest index under (t, N, -R) is (1, 1, 1); its sign flips
        assert_eq!(s.coeff(&key(1, 1, 1)), rat_int(3));
        assert_eq!(s.coeff(&key(1, -1, 1)), rat_int(-2));
    }

    #[test]
    fn sqrt_rejects_non_squares() {
        let f = series(Parity::Integral, 4, &[(2, 0, 2, 2)]);
        assert!(matches!(f.sqrt(), Err(SeriesError::NotASquare(_))));
        let g = series(Parity::Integral, 4, &[(2, 0, 0, 1), (0, 0, 2, 1)]);
        assert!(matches!(g.sqrt(), Err(SeriesError::NotASquare(_))));
    }

    #[test]
    fn divide_exact_round_trip() {
        let f = series(
            Parity::Integral,
            8,
            &[(0, 0, 0, 1), (2, 2, 2, -3), (2, 0, 4, 7)],
        );
        let g = series(Parity::HalfIntegral, 8, &[(1, 1, 1, 2), (1, -1, 3, 4)]);
        let prod = f.multiply(&g);
        let back = prod.divide_exact(&f).unwrap();
        assert_eq!(back.parity(), Parity::HalfIntegral);
        assert!(back.eq_within(&g, back.prec().min(g.prec())));
    }

    #[test]
    fn divide_detects_inexactness() {
        // q^2 z x^2 is not a multiple of q z^(1/2) x - q z^(-1/2) x
        let f = series(Parity::Integral, 5, &[(2, 2, 2, 1)]);
        let g = series(Parity::HalfIntegral, 5, &[(1, 1, 1, 1), (1, -1, 1, -1)]);
        let err = f.divide_exact(&g);
        assert!(matches!(err, Err(SeriesError::InexactDivision(_))));
    }

    #[test]
    fn division_by_zero_and_empty_numerator() {
        let zero = OrthoSeries::zero(Parity::Integral, 5);
        let g = series(Parity::Integral, 5, &[(2, 0, 2, 3)]);
        assert_eq!(
            zero.divide_exact(&zero),
            Err(SeriesError::EmptySupport("division"))
        );
        let q = zero.divide_exact(&g).unwrap();
        assert!(q.is_zero());
        assert_eq!(q.prec(), (10 - 4) / 2);
    }

    #[test]
    fn derivative_scales_by_half_indices() {
        let f = series(Parity::HalfIntegral, 4, &[(1, -1, 3, 4)]);
        assert_eq!(f.derivative(Axis::Tau).coeff(&key(1, -1, 3)), rat(4, 2));
        assert_eq!(f.derivative(Axis::Z).coeff(&key(1, -1, 3)), rat(-4, 2));
        assert_eq!(f.derivative(Axis::Omega).coeff(&key(1, -1, 3)), rat(12, 2));
    }

    #[test]
    fn swap_is_an_involution() {
        let f = series(Parity::Integral, 4, &[(2, 2, 4, 5), (0, 0, 2, -1)]);
        let g = f.swap_tau_omega();
        assert_eq!(g.coeff(&key(4, 2, 2)), rat_int(5));
        assert_eq!(g.swap_tau_omega(), f);
    }

    #[test]
    fn restrict_diagonal_keeps_telescoped_zeros() {
        // q zeta xi + q zeta^-1 xi - 2 q xi, in doubled coordinates
        let f = series(
            Parity::Integral,
            4,
            &[(2, 2, 2, 1), (2, -2, 2, 1), (2, 0, 2, -2)],
        );
        let d = f.restrict_diagonal();
        assert_eq!(d.get(&(2, 2)), Some(&rat_int(0)));
    }

    #[test]
    fn content_normalization_follows_the_sign_order() {
        // 6 q zeta xi - 4 q xi
        let f = series(Parity::Integral, 4, &[(2, 2, 2, 6), (2, 0, 2, -4)]);
        let (g, c) = f.content_normalize().unwrap();
        assert_eq!(c, rat_int(2));
        assert_eq!(g.coeff(&key(2, 2, 2)), rat_int(3));
        assert_eq!(g.coeff(&key(2, 0, 2)), rat_int(-2));
        // flipped input: the earliest term is negative, so the content is too
        let (h, ch) = f.neg().content_normalize().unwrap();
        assert_eq!(ch, rat_int(-2));
        assert_eq!(h.coeff(&key(2, 2, 2)), rat_int(3));
    }

    #[test]
    fn content_with_denominators() {
        let f = OrthoSeries::from_terms(
            Parity::Integral,
            4,
            [
                (key(2, 0, 2), rat(3, 2)),
                (key(2, 2, 2), rat(9, 4)),
            ],
        )
        .unwrap();
        let (g, c) = f.content_normalize().unwrap();
        assert_eq!(c, rat(3, 4));
        assert_eq!(g.coeff(&key(2, 0, 2)), rat_int(2));
        assert_eq!(g.coeff(&key(2, 2, 2)), rat_int(3));
    }

    #[test]
    fn precision_rules_for_products() {
        let f = series(Parity::Integral, 5, &[(2, 0, 2, 1)]);
        let g = series(Parity::Integral, 7, &[(2, 2, 4, 1)]);
        let p = f.multiply(&g);
        // min(2*5 + 6, 2*7 + 4) = 16
        assert_eq!(p.prec(), 8);
        let zero = OrthoSeries::zero(Parity::Integral, 3);
        let pz = f.multiply(&zero);
        assert!(pz.is_zero());
        // min(2*5 + (2*3 + 2), 2*3 + 4) = 10
        assert_eq!(pz.prec(), 5);
    }

    #[test]
    fn mixed_parity_addition_is_rejected() {
        let f = series(Parity::Integral, 4, &[(2, 0, 2, 1)]);
        let g = series(Parity::HalfIntegral, 4, &[(1, 1, 1, 1)]);
        assert_eq!(f.add(&g), Err(SeriesError::ParityMismatch));
    }
}
