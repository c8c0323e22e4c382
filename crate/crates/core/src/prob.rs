//! Combinatorial probability kernels: binomial coefficients and tails, the
//! selection-count family `f(lambda, j, q)`, and Poisson-binomial tails for
//! heterogeneous selection probabilities.
//!
//! Everything here is exact rational arithmetic. The Poisson-binomial tail
//! runs an O(n^2) dynamic program over success counts; callers that need an
//! "exclude player i" variant simply recompute without that player instead
//! of deconvolving.

use crate::error::Error;
use crate::numeric::Rational;
use num::bigint::BigUint;
use num::{One, Zero};

/// Binomial coefficient C(n, j). Out-of-range `j` returns 0 so that empty
/// sums in the equilibrium constraints evaluate to 0 silently.
pub fn binom_coeff(n: u64, j: i64) -> BigUint {
    if j < 0 || j as u64 > n {
        return BigUint::zero();
    }
    let j = (j as u64).min(n - j as u64);
    let mut acc = BigUint::one();
    for i in 0..j {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn check_probability(q: &Rational) -> Result<(), Error> {
    if q.is_negative() || q > &Rational::one() {
        return Err(Error::ProbabilityRange { value: q.to_string() });
    }
    Ok(())
}

/// P(at least `t` successes among `m` independent Bernoulli(`q`) trials).
///
/// Returns 1 for `t <= 0` and 0 for `t > m`.
pub fn binomial_tail(m: u64, t: i64, q: &Rational) -> Result<Rational, Error> {
    check_probability(q)?;
    if t <= 0 {
        return Ok(Rational::one());
    }
    let t = t as u64;
    if t > m {
        return Ok(Rational::zero());
    }
    if q.is_zero() {
        return Ok(Rational::zero());
    }
    if q == &Rational::one() {
        return Ok(Rational::one());
    }
    // Term recurrence upward from j = t: next = term * (m-j)/(j+1) * q/(1-q).
    let comp = Rational::one() - q;
    let ratio = q / &comp;
    let mut term = Rational::from_big(num::BigRational::new(
        binom_coeff(m, t as i64).into(),
        num::bigint::BigInt::one(),
    )) * q.pow(t as u32)
        * comp.pow((m - t) as u32);
    let mut sum = term.clone();
    for j in t..m {
        term = term * Rational::ratio((m - j) as i64, (j + 1) as i64) * &ratio;
        sum = sum + &term;
    }
    Ok(sum)
}

/// Probability of exactly `j` successes among `m` Bernoulli(`q`) trials.
pub fn binomial_pmf(m: u64, j: i64, q: &Rational) -> Result<Rational, Error> {
    check_probability(q)?;
    if j < 0 || j as u64 > m {
        return Ok(Rational::zero());
    }
    let j = j as u64;
    let coeff = Rational::from_big(num::BigRational::new(
        binom_coeff(m, j as i64).into(),
        num::bigint::BigInt::one(),
    ));
    Ok(coeff * q.pow(j as u32) * (Rational::one() - q).pow((m - j) as u32))
}

/// `f(lambda, j, q) = C(lambda-1, j-1) q^(j-1) (1-q)^(lambda-j)`: the
/// probability that exactly `j-1` of `lambda-1` independent Bernoulli(`q`)
/// users are selected.
pub fn f_term(lambda: u64, j: u64, q: &Rational) -> Result<Rational, Error> {
    if lambda < 1 || j < 1 || j > lambda {
        return Err(Error::FDomain { lambda, j });
    }
    check_probability(q)?;
    binomial_pmf(lambda - 1, j as i64 - 1, q)
}

/// `f(lambda, j, q)` extended by 0 outside its domain; scan code uses this
/// so vacuous window endpoints read as impossible rather than erroring.
pub(crate) fn f_or_zero(lambda: u64, j: u64, q: &Rational) -> Rational {
    if lambda < 1 || j < 1 || j > lambda {
        Rational::zero()
    } else {
        f_term(lambda, j, q).expect("probability already validated")
    }
}

/// Full success-count distribution for independent heterogeneous Bernoulli
/// trials; entry `j` is P(exactly j successes).
pub fn poisson_binomial_pmf(probs: &[Rational]) -> Result<Vec<Rational>, Error> {
    for q in probs {
        check_probability(q)?;
    }
    let mut dist = vec![Rational::one()];
    for q in probs {
        let comp = Rational::one() - q;
        let mut next = vec![Rational::zero(); dist.len() + 1];
        for (j, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            next[j] = &next[j] + mass * &comp;
            next[j + 1] = &next[j + 1] + mass * q;
        }
        dist = next;
    }
    Ok(dist)
}

/// P(at least `t` successes) for independent heterogeneous Bernoulli trials.
///
/// Equals [`binomial_tail`] when all probabilities coincide; returns 1 for
/// `t <= 0`.
pub fn poisson_binomial_tail(probs: &[Rational], t: i64) -> Result<Rational, Error> {
    if t <= 0 {
        for q in probs {
            check_probability(q)?;
        }
        return Ok(Rational::one());
    }
    if t as usize > probs.len() {
        for q in probs {
            check_probability(q)?;
        }
        return Ok(Rational::zero());
    }
    let dist = poisson_binomial_pmf(probs)?;
    Ok(dist.into_iter().skip(t as usize).sum())
}

/// Checks the tail identity
/// `tail(lambda, k-1, q) = tail(lambda-1, k-1, q) + C(lambda-1, k-2) q^(k-1) (1-q)^(lambda-k+1)`
/// exactly. This is the step that rules out interior equilibria in the
/// symmetric game.
pub fn verify_binomial_identity(lambda: u64, k: u64, q: &Rational) -> Result<bool, Error> {
    check_probability(q)?;
    if lambda < 1 || k < 1 || k > lambda {
        return Err(Error::FDomain { lambda, j: k });
    }
    let lhs = binomial_tail(lambda, k as i64 - 1, q)?;
    // C(lambda-1, k-2) q^(k-1) (1-q)^(lambda-k+1); vanishes for k = 1.
    let correction = binomial_pmf(lambda - 1, k as i64 - 2, q)? * q;
    let rhs = binomial_tail(lambda - 1, k as i64 - 1, q)? + correction;
    Ok(lhs == rhs)
}
