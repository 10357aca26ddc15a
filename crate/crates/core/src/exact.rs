//! Exact integer and rational utilities.
//!
//! Everything downstream works over arbitrary-precision rationals, so the
//! helpers here are the only place where number-theoretic bookkeeping
//! happens: p-adic valuations, integer factoring by trial division,
//! Bernoulli numbers via the defining recurrence
//!
//!   sum_{j=0}^{m} binom(m+1, j) B_j = 0        (m >= 1),
//!
//! and the divisor power sums sigma_k(n) = sum_{d | n} d^k that feed
//! Eisenstein series and Maass lifts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

/// Shorthand for an integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Shorthand for the exact fraction `num / den`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("valuation base {0} is not prime")]
    CompositeBase(u64),
    #[error("cannot factor zero")]
    FactorZero,
    #[error("Bernoulli number B_{0} vanishes for odd index > 1")]
    OddBernoulli(u32),
}

// ---------------------------------------------------------------------------
// primality and factoring
// ---------------------------------------------------------------------------

/// Deterministic primality test by trial division; fine for the word-sized
/// inputs that occur as bracket numerators and scan bounds.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d.checked_mul(d).is_some_and(|sq| sq <= n) {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// All primes `<= bound`, by the sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

/// The multiset of prime factors of a nonzero integer, as prime -> exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactorization {
    negative: bool,
    factors: BTreeMap<u64, u32>,
}

impl PrimeFactorization {
    /// Prime divisors in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }

    /// (prime, exponent) pairs in increasing prime order.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().map(|(&p, &e)| (p, e))
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> Int {
        let mut v = Int::one();
        for (&p, &e) in &self.factors {
            v *= Int::from(p).pow(e);
        }
        if self.negative {
            -v
        } else {
            v
        }
    }
}

/// Trial-division factorization of a nonzero word-sized integer.
pub fn factor(n: i64) -> Result<PrimeFactorization, ExactError> {
    if n == 0 {
        return Err(ExactError::FactorZero);
    }
    let negative = n < 0;
    let mut m = n.unsigned_abs();
    let mut factors = BTreeMap::new();
    let mut p = 2u64;
    while p.checked_mul(p).is_some_and(|sq| sq <= m) {
        while m % p == 0 {
            *factors.entry(p).or_insert(0) += 1;
            m /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        *factors.entry(m).or_insert(0) += 1;
    }
    Ok(PrimeFactorization { negative, factors })
}

/// Factors a big integer that is known to fit in a word; bracket numerators
/// always do.
pub fn factor_int(n: &Int) -> Result<PrimeFactorization, ExactError> {
    let small = i64::try_from(n).expect("factoring is only supported for word-sized integers");
    factor(small)
}

// ---------------------------------------------------------------------------
// valuations
// ---------------------------------------------------------------------------

/// p-adic valuation of a nonzero big integer.
pub fn int_valuation(n: &Int, p: u64) -> Result<i64, ExactError> {
    if n.is_zero() {
        return Err(ExactError::ZeroValuation);
    }
    if !is_prime(p) {
        return Err(ExactError::CompositeBase(p));
    }
    let p = Int::from(p);
    let mut m = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if !r.is_zero() {
            return Ok(v);
        }
        m = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational: v_p(num) - v_p(den).
pub fn valuation(x: &Rat, p: u64) -> Result<i64, ExactError> {
    if x.is_zero() {
        return Err(ExactError::ZeroValuation);
    }
    Ok(int_valuation(x.numer(), p)? - int_valuation(x.denom(), p)?)
}

// ---------------------------------------------------------------------------
// Bernoulli numbers and divisor sums
// ---------------------------------------------------------------------------

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> Int {
    if k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for j in 0..k {
        acc = acc * Int::from(n - j) / Int::from(j + 1);
    }
    acc
}

/// The Bernoulli number B_k (with B_1 = -1/2), computed by the defining
/// recurrence.  Odd indices above 1 are rejected rather than silently
/// returning zero, since requesting one is invariably a weight bug.
pub fn bernoulli(k: u32) -> Result<Rat, ExactError> {
    if k % 2 == 1 && k > 1 {
        return Err(ExactError::OddBernoulli(k));
    }
    let mut table: Vec<Rat> = Vec::with_capacity(k as usize + 1);
    table.push(Rat::one());
    for m in 1..=k as u64 {
        // B_m = -1/(m+1) * sum_{j<m} binom(m+1, j) B_j
        let mut sum = Rat::zero();
        for (j, bj) in table.iter().enumerate() {
            sum += Rat::from_integer(binomial(m + 1, j as u64)) * bj;
        }
        table.push(-sum / rat_int(m as i64 + 1));
    }
    Ok(table.pop().expect("table is nonempty"))
}

/// sigma_k(n) = sum over positive divisors d of n of d^k.
pub fn divisor_power_sum(k: u32, n: u64) -> Int {
    assert!(n >= 1, "divisor sums need a positive argument");
    let mut total = Int::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += Int::from(d).pow(k);
            let e = n / d;
            if e != d {
                total += Int::from(e).pow(k);
            }
        }
        d += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_of_small_rationals() {
        let x = rat(-9, 2);
        assert_eq!(valuation(&x, 3), Ok(2));
        assert_eq!(valuation(&x, 2), Ok(-1));
        assert_eq!(valuation(&rat(-69, 2), 23), Ok(1));
        assert_eq!(valuation(&rat(1, 1), 5), Ok(0));
        assert_eq!(valuation(&Rat::zero(), 3), Err(ExactError::ZeroValuation));
        assert_eq!(valuation(&x, 6), Err(ExactError::CompositeBase(6)));
    }

    #[test]
    fn factor_small_integers() {
        let f = factor(1950).unwrap();
        assert_eq!(
            f.pairs().collect::<Vec<_>>(),
            vec![(2, 1), (3, 1), (5, 2), (13, 1)]
        );
        assert_eq!(f.value(), Int::from(1950));
        let g = factor(-468).unwrap();
        assert!(g.is_negative());
        assert_eq!(g.pairs().collect::<Vec<_>>(), vec![(2, 2), (3, 2), (13, 1)]);
        assert_eq!(g.value(), Int::from(-468));
        assert_eq!(factor(0), Err(ExactError::FactorZero));
        assert_eq!(factor(1).unwrap().pairs().count(), 0);
    }

    #[test]
    fn primality_and_sieve_agree() {
        let sieved = primes_up_to(500);
        let tested: Vec<u64> = (0..=500).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, tested);
        assert!(is_prime(2));
        assert!(is_prime(7919));
        assert!(!is_prime(7917));
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0).unwrap(), rat_int(1));
        assert_eq!(bernoulli(1).unwrap(), rat(-1, 2));
        assert_eq!(bernoulli(2).unwrap(), rat(1, 6));
        assert_eq!(bernoulli(4).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli(6).unwrap(), rat(1, 42));
        assert_eq!(bernoulli(12).unwrap(), rat(-691, 2730));
        assert_eq!(bernoulli(3), Err(ExactError::OddBernoulli(3)));
        // Eisenstein normalizations -2k/B_k for k = 4 and k = 6.
        assert_eq!(rat_int(-8) / bernoulli(4).unwrap(), rat_int(240));
        assert_eq!(rat_int(-12) / bernoulli(6).unwrap(), rat_int(-504));
    }

    #[test]
    fn divisor_sums() {
        assert_eq!(divisor_power_sum(1, 6), Int::from(12));
        assert_eq!(divisor_power_sum(3, 4), Int::from(73));
        assert_eq!(divisor_power_sum(9, 2), Int::from(513));
        assert_eq!(divisor_power_sum(11, 1), Int::from(1));
    }

    #[test]
    fn binomial_row() {
        let row: Vec<Int> = (0..=6).map(|k| binomial(6, k)).collect();
        let expected: Vec<Int> = [1, 6, 15, 20, 15, 6, 1].iter().map(|&x| Int::from(x)).collect();
        assert_eq!(row, expected);
        assert_eq!(binomial(5, 9), Int::zero());
    }
}
