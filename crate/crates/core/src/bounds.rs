//! Exact-rational evaluation of the closed-form constants and bounds on the
//! extremal flat-intersection fractions, plus a per-(d,s) summary report.
//!
//! Everything is exact. The only irrational constant involved anywhere is e,
//! which enters one lower bound as a divisor; it is replaced by the rational
//! 2.718281829 > e, so the reported bound is still valid (a hair weaker).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Practical cap on the flat dimension in bound formulas; matches the
/// ambient cap so every reported bound is comparable against a profile.
const MAX_D: usize = 30;

fn check_d(d: usize) -> Result<()> {
    if d == 0 || d > MAX_D {
        return Err(Error::invalid(format!("d={d} out of range 1..={MAX_D}")));
    }
    Ok(())
}

fn pow2(exp: usize) -> BigInt {
    BigInt::one() << exp
}

fn pow2m1(exp: usize) -> BigInt {
    pow2(exp) - BigInt::one()
}

fn rat(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn rat_u(num: u64, den: u64) -> BigRational {
    rat(num.into(), den.into())
}

/// Rational strictly above e; dividing by it keeps lower bounds valid.
fn e_upper() -> BigRational {
    rat_u(2_718_281_829, 1_000_000_000)
}

/// Tighter rational strictly above e, for "< e" sanity assertions.
#[cfg(test)]
pub(crate) fn e_check() -> BigRational {
    rat_u(27_182_818_285, 10_000_000_000)
}

/// ν_2(s): exponent of the largest power of two dividing s.
pub fn nu2(s: u64) -> Result<u32> {
    if s == 0 {
        return Err(Error::invalid("nu2 requires s >= 1".to_string()));
    }
    Ok(s.trailing_zeros())
}

/// Probability that a d×d matrix with independent uniform *nonzero* columns
/// is nonsingular: ∏_{i=1}^{d−1} (1 − (2^i−1)/(2^d−1)). Tends to 0.2887...
/// This is the classical subcube-side constant, kept for comparison; it does
/// not enter the flat-side summary.
pub fn c_d(d: usize) -> Result<BigRational> {
    check_d(d)?;
    let den = pow2m1(d);
    let mut out = BigRational::one();
    for i in 1..d {
        out *= rat(&den - pow2m1(i), den.clone());
    }
    Ok(out)
}

/// c(d,k) = ∏_{i=0}^{d−k−1} (1 − 2^{i−d}): the n→∞ density limit of the
/// preimage construction, and the general lower bound for λ*(d, j·2^k).
pub fn c_dk(d: usize, k: usize) -> Result<BigRational> {
    check_d(d)?;
    if k > d {
        return Err(Error::DimensionOutOfRange { d: k, n: d });
    }
    let den = pow2(d);
    let mut out = BigRational::one();
    for i in 0..d - k {
        out *= rat(&den - pow2(i), den.clone());
    }
    Ok(out)
}

/// c_n(d,k) = 2^{(d−k)(n−d)}·binom(n−d+k,k)_2 / binom(n,d)_2: the exact
/// probability that a uniform U ∈ Gr(n,d) meets the kernel of a fixed
/// surjective map F_2^n → F_2^{d−k} in dimension k.
pub fn c_n_dk(n: usize, d: usize, k: usize) -> Result<BigRational> {
    if d > n || k > d {
        return Err(Error::DimensionOutOfRange { d: k.max(d), n });
    }
    check_d(d.max(1))?;
    crate::gf2::check_ambient(n)?;
    let num = BigInt::from(crate::gf2::q_binomial(n - d + k, k)?) << ((d - k) * (n - d));
    let den = BigInt::from(crate::gf2::q_binomial(n, d)?);
    Ok(rat(num, den))
}

/// Even-s upper bound from blocking sets: λ*(n,d,s,·) ≤
/// 1 − (2^{d−k}−1)/(2^{d+1}−1) for s = j·2^k, valid for every n ≥ d+1.
pub fn upper_flat_even(d: usize, k: usize) -> Result<BigRational> {
    check_d(d)?;
    if k >= d {
        return Err(Error::DimensionOutOfRange { d: k, n: d });
    }
    let den = pow2m1(d + 1);
    Ok(rat(&den - pow2m1(d - k), den))
}

/// Truncated self-improving series bound with a rigorous tail certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BootstrapBound {
    /// (1/2)·Σ_{m<M} ∏_{i<m} c_i, a lower approximation of the series.
    pub partial: BigRational,
    /// partial + 2^{−M}: a valid upper bound for λ*(d, j·2^k), since every
    /// factor satisfies 0 < c_i < 1/2 and the tail is geometrically dominated.
    pub certified: BigRational,
}

/// Series bound λ*(d,s) ≤ (1/2)·Σ_{m≥0} ∏_{i<m} (1/2 − (2^{d−k}−1)/(2^{d+i+1}−1)),
/// truncated after M terms.
pub fn bootstrap_upper(d: usize, k: usize, m_terms: u32) -> Result<BootstrapBound> {
    check_d(d)?;
    if k >= d {
        return Err(Error::DimensionOutOfRange { d: k, n: d });
    }
    if m_terms == 0 {
        return Err(Error::invalid("bootstrap needs M >= 1".to_string()));
    }
    let half = rat_u(1, 2);
    let mut sum = BigRational::zero();
    let mut product = BigRational::one();
    for m in 0..m_terms {
        sum += &product;
        if m + 1 < m_terms {
            let i = m as usize;
            let c_i = &half - rat(pow2m1(d - k), pow2m1(d + i + 1));
            debug_assert!(c_i.is_positive() && c_i < half);
            product *= c_i;
        }
    }
    let partial = half * sum;
    let tail = rat(BigInt::one(), pow2(m_terms as usize));
    Ok(BootstrapBound {
        certified: &partial + tail,
        partial,
    })
}

/// Half-level upper bound λ*(n,d,2^{d−1},·) ≤ 1 − binom(n−1,d)_2/binom(n,d)_2,
/// attained by affine hyperplanes. Tends to 1 − 2^{−d}.
pub fn upper_half_level(n: usize, d: usize) -> Result<BigRational> {
    if d <= 1 || d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    crate::gf2::check_ambient(n)?;
    // n = d: no d-subspace fits in a hyperplane, the bound degenerates to 1.
    let num = if d <= n - 1 {
        BigInt::from(crate::gf2::q_binomial(n - 1, d)?)
    } else {
        BigInt::zero()
    };
    let den = BigInt::from(crate::gf2::q_binomial(n, d)?);
    Ok(BigRational::one() - rat(num, den))
}

/// Odd-intersection upper bound 1/2 + 1/(2·(2^{n−d+1}−1)), for d < n.
pub fn odd_upper(n: usize, d: usize) -> Result<BigRational> {
    if d == 0 || d >= n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    crate::gf2::check_ambient(n)?;
    Ok(rat_u(1, 2) + rat(BigInt::one(), pow2m1(n - d + 1) * 2))
}

/// Neighbor-ratio constants: λ*(d,s)/λ*(d,s−1) ≤ `down` and
/// λ*(d,s)/λ*(d,s+1) ≤ `up`; both are < e.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnePointRatios {
    /// (s/(s−1))^{s−1}, defined for 2 ≤ s ≤ 2^d.
    pub down: Option<BigRational>,
    /// ((2^d−s)/(2^d−s−1))^{2^d−s−1}, defined for s ≤ 2^d − 2.
    pub up: Option<BigRational>,
}

/// Exponent ceiling for the ratio constants; beyond this the exact rational
/// has megabit numerators for no informational gain over e.
const RATIO_EXP_CAP: u64 = 1 << 20;

fn ratio_power(hi: u64, lo: u64) -> Result<BigRational> {
    debug_assert_eq!(hi, lo + 1);
    if lo > RATIO_EXP_CAP {
        return Err(Error::CapExceeded(format!(
            "ratio exponent {lo} above {RATIO_EXP_CAP}"
        )));
    }
    if lo == 0 {
        // x/0 never occurs: callers only pass lo >= 1.
        return Err(Error::invalid("ratio with zero denominator".to_string()));
    }
    let base = rat_u(hi, lo);
    let mut out = BigRational::one();
    for _ in 0..lo {
        out *= &base;
    }
    Ok(out)
}

pub fn one_point_ratios(d: usize, s: u64) -> Result<OnePointRatios> {
    check_d(d)?;
    let size = 1u64 << d;
    if s > size {
        return Err(Error::invalid(format!("s={s} out of range 0..=2^{d}")));
    }
    let down = if s >= 2 {
        Some(ratio_power(s, s - 1)?)
    } else {
        None
    };
    let up = if s + 2 <= size {
        Some(ratio_power(size - s, size - s - 1)?)
    } else {
        None
    };
    if down.is_none() && up.is_none() {
        return Err(Error::invalid(format!(
            "no one-point ratio defined at d={d}, s={s}"
        )));
    }
    Ok(OnePointRatios { down, up })
}

/// One-point transfer lower bound for an odd level next to an even one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorollaryLower {
    /// ν_2 of the even neighbor used.
    pub k: u32,
    /// (1 − 2^{−k}) / e, with e replaced by a rational upper bound.
    pub value: BigRational,
}

/// λ*(d, s_neighbor) ≥ (1 − 2^{−k})/e when s_neighbor sits next to an
/// interior even level j·2^k with k ≥ 1; uses the best such neighbor.
pub fn corollary_lower(d: usize, s_neighbor: u64) -> Result<CorollaryLower> {
    check_d(d)?;
    let size = 1u64 << d;
    if s_neighbor > size {
        return Err(Error::invalid(format!(
            "s={s_neighbor} out of range 0..=2^{d}"
        )));
    }
    let mut best: Option<u32> = None;
    for s0 in [s_neighbor.wrapping_sub(1), s_neighbor + 1] {
        if (2..=size - 2).contains(&s0) {
            let k = s0.trailing_zeros();
            if k >= 1 && best.is_none_or(|b| k > b) {
                best = Some(k);
            }
        }
    }
    let Some(k) = best else {
        return Err(Error::invalid(format!(
            "s={s_neighbor} has no interior even neighbor with k >= 1 at d={d}"
        )));
    };
    let one_minus = BigRational::one() - rat(BigInt::one(), pow2(k as usize));
    Ok(CorollaryLower {
        k,
        value: one_minus / e_upper(),
    })
}

/// Minimum size of a set of projective points meeting every projective
/// k-subspace of PG(n_proj, 2): 2^{n_proj−k+1} − 1.
pub fn bose_burton_min(n_proj: usize, k: usize) -> Result<BigUint> {
    if k > n_proj {
        return Err(Error::DimensionOutOfRange { d: k, n: n_proj });
    }
    Ok((BigUint::one() << (n_proj - k + 1)) - BigUint::one())
}

/// One named bound value with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundEntry {
    /// Stable identifier, usable as a machine key.
    pub name: &'static str,
    /// What result the value comes from, for auditing.
    pub source: &'static str,
    pub value: BigRational,
}

fn entry(name: &'static str, source: &'static str, value: BigRational) -> BoundEntry {
    BoundEntry {
        name,
        source,
        value,
    }
}

/// Everything known about λ*(d,s) (or λ*(n,d,s) when n is given).
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub d: usize,
    pub s: u64,
    /// ν_2(s); zero for s = 0.
    pub k: u32,
    /// Odd part of s; zero for s = 0.
    pub j: u64,
    pub n: Option<usize>,
    pub lower: Vec<BoundEntry>,
    pub upper: Vec<BoundEntry>,
    pub best_lower: BigRational,
    pub best_upper: BigRational,
}

/// Default truncation for the series bound inside summaries.
pub const SUMMARY_BOOTSTRAP_TERMS: u32 = 64;

/// Collects every applicable bound for λ*(d,s). With n present the report
/// describes λ*(n,d,s): limit lower bounds stay valid (the sequence is
/// non-increasing in n), limit-only upper bounds are replaced by their
/// finite-n forms.
pub fn summary(d: usize, s: u64, n: Option<usize>) -> Result<BoundReport> {
    check_d(d)?;
    if let Some(n) = n {
        crate::gf2::check_ambient(n)?;
        if d > n {
            return Err(Error::DimensionOutOfRange { d, n });
        }
    }
    let size = 1u64 << d;
    if s > size {
        return Err(Error::invalid(format!("s={s} out of range 0..=2^{d}")));
    }

    let mut lower = Vec::new();
    let mut upper = Vec::new();

    if s == 0 || s == size {
        // The empty and full sets give every flat intersection 0 and 2^d.
        let one = BigRational::one();
        lower.push(entry(
            "trivial_exact",
            "attained by the empty or full set",
            one.clone(),
        ));
        upper.push(entry("trivial_exact", "every fraction is at most 1", one));
        let k = if s == 0 { 0 } else { d as u32 };
        return finish_report(d, s, k, s >> k, n, lower, upper);
    }

    let k = nu2(s)? as usize;
    let j = s >> k;
    debug_assert!(k < d, "interior s has k < d");

    lower.push(entry(
        "preimage_density",
        "limit density of the preimage construction",
        c_dk(d, k)?,
    ));
    if let Some(n) = n {
        lower.push(entry(
            "preimage_density_at_n",
            "preimage construction density at this n",
            c_n_dk(n, d, k)?,
        ));
    }
    if s % 2 == 1 {
        if let Ok(c) = corollary_lower(d, s) {
            lower.push(entry(
                "one_point_corollary",
                "one-point transfer from the best even neighbor",
                c.value,
            ));
        }
    }

    // The blocking-set argument needs a flat missing the set, so at finite n
    // it only applies once n > d. In the limit it always does.
    if n.map_or(true, |n| n >= d + 1) {
        upper.push(entry(
            "blocking_even_upper",
            "blocking-set bound for intersection counts divisible by 2^k",
            upper_flat_even(d, k)?,
        ));
    }

    match n {
        None => {
            upper.push(entry(
                "bootstrap_certified",
                "self-improving series bound with certified tail",
                bootstrap_upper(d, k, SUMMARY_BOOTSTRAP_TERMS)?.certified,
            ));
            if s % 2 == 1 {
                upper.push(entry(
                    "odd_upper_limit",
                    "odd-intersection bound in the large-n limit",
                    rat_u(1, 2),
                ));
            }
            if s == size / 2 {
                let exact = BigRational::one() - rat(BigInt::one(), pow2(d));
                lower.push(entry(
                    "half_level_exact",
                    "half-level value attained by affine hyperplanes",
                    exact.clone(),
                ));
                upper.push(entry(
                    "half_level_exact",
                    "half-level value attained by affine hyperplanes",
                    exact,
                ));
            }
        }
        Some(n) => {
            if s % 2 == 1 && d < n {
                upper.push(entry(
                    "odd_upper_at_n",
                    "odd-intersection bound at this n",
                    odd_upper(n, d)?,
                ));
            }
            if s == size / 2 && d > 1 {
                let exact = upper_half_level(n, d)?;
                lower.push(entry(
                    "half_level_at_n",
                    "half-level value attained by affine hyperplanes at this n",
                    exact.clone(),
                ));
                upper.push(entry(
                    "half_level_at_n",
                    "half-level value attained by affine hyperplanes at this n",
                    exact,
                ));
                lower.push(entry(
                    "half_level_limit",
                    "half-level limit value, a floor for every n",
                    BigRational::one() - rat(BigInt::one(), pow2(d)),
                ));
            }
        }
    }

    finish_report(d, s, k as u32, j, n, lower, upper)
}

fn finish_report(
    d: usize,
    s: u64,
    k: u32,
    j: u64,
    n: Option<usize>,
    lower: Vec<BoundEntry>,
    upper: Vec<BoundEntry>,
) -> Result<BoundReport> {
    let best_lower = lower
        .iter()
        .map(|e| e.value.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    let best_upper = upper
        .iter()
        .map(|e| e.value.clone())
        .min()
        .unwrap_or_else(BigRational::one);
    if best_lower > best_upper {
        return Err(Error::invalid(format!(
            "inconsistent bounds at d={d}, s={s}: {best_lower} > {best_upper}"
        )));
    }
    Ok(BoundReport {
        d,
        s,
        k,
        j,
        n,
        lower,
        upper,
        best_lower,
        best_upper,
    })
}

/// Tightest upper bound on λ*(n,d,s) valid at this exact n; 1 when nothing
/// applies. Limit-type bounds are excluded: the finite-n value may exceed
/// them.
pub fn finite_n_upper(n: usize, d: usize, s: u64) -> Result<BigRational> {
    crate::gf2::check_ambient(n)?;
    check_d(d)?;
    if d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    let size = 1u64 << d;
    if s > size {
        return Err(Error::invalid(format!("s={s} out of range 0..=2^{d}")));
    }
    let mut best = BigRational::one();
    if s != 0 && s != size {
        if n >= d + 1 {
            best = best.min(upper_flat_even(d, nu2(s)? as usize)?);
        }
        if s % 2 == 1 && d < n {
            best = best.min(odd_upper(n, d)?);
        }
        if s == size / 2 && d > 1 {
            best = best.min(upper_half_level(n, d)?);
        }
    }
    Ok(best)
}
