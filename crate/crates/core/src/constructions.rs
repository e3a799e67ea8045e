//! The explicit point sets behind the lower bounds: linear preimages,
//! parity hyperplanes, symmetric-polynomial level sets, and random
//! perturbations of any of these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix};
use crate::stats::PointSet;

/// Generator identity recorded next to seeds in report provenance.
pub const RNG_NAME: &str = "chacha12";

/// Preimage {x : Bx ∈ S} of a j-point target under a surjective linear map
/// onto F_2^{d−k}.
///
/// Defaults: B projects onto the d−k lowest coordinates, S = {0, .., j−1}.
/// j must be odd so that a d-flat whose direction space surjects under B
/// meets the set in exactly j·2^k points, a count with 2-adic valuation k.
pub fn preimage_set(
    n: usize,
    d: usize,
    k: usize,
    j: usize,
    b: Option<&BitMatrix>,
    s: Option<&[u32]>,
) -> Result<PointSet> {
    gf2::check_ambient(n)?;
    if d < 1 || d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    if k >= d {
        return Err(Error::invalid(format!("k = {k} must be smaller than d = {d}")));
    }
    let m = d - k;
    if j % 2 == 0 || j > 1usize << m {
        return Err(Error::invalid(format!(
            "target size {j} must be odd and at most 2^{m}"
        )));
    }

    let in_target: Box<dyn Fn(u32) -> bool> = match s {
        None => Box::new(move |v| (v as usize) < j),
        Some(points) => {
            if points.len() != j {
                return Err(Error::invalid(format!(
                    "target has {} points, expected {j}",
                    points.len()
                )));
            }
            let mut sorted = points.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != j {
                return Err(Error::invalid("target points must be distinct"));
            }
            if *sorted.last().unwrap() >= 1u32 << m {
                return Err(Error::invalid(format!(
                    "target points must lie in F_2^{m}"
                )));
            }
            Box::new(move |v| sorted.binary_search(&v).is_ok())
        }
    };

    let mut set = PointSet::empty(n)?;
    match b {
        None => {
            let mask = (1u32 << m) - 1;
            for x in 0..1u32 << n {
                if in_target(x & mask) {
                    set.insert(x);
                }
            }
        }
        Some(matrix) => {
            if matrix.rows() != m || matrix.cols() != n {
                return Err(Error::invalid(format!(
                    "map must be {m}x{n}, got {}x{}",
                    matrix.rows(),
                    matrix.cols()
                )));
            }
            if gf2::rref(matrix).rank != m {
                return Err(Error::invalid("map must be surjective"));
            }
            let rows = matrix.row_words().to_vec();
            for x in 0..1u32 << n {
                let mut image = 0u32;
                for (i, row) in rows.iter().enumerate() {
                    image |= ((row & x).count_ones() & 1) << i;
                }
                if in_target(image) {
                    set.insert(x);
                }
            }
        }
    }
    Ok(set)
}

/// Points whose coordinate sum equals the given parity bit. Size 2^{n−1}.
pub fn hyperplane_set(n: usize, parity: u8) -> Result<PointSet> {
    gf2::check_ambient(n)?;
    if parity > 1 {
        return Err(Error::invalid("parity must be 0 or 1"));
    }
    let mut set = PointSet::empty(n)?;
    for x in 0..1u32 << n {
        if x.count_ones() & 1 == parity as u32 {
            set.insert(x);
        }
    }
    Ok(set)
}

/// Level set {x : e_d(x) = 1} of the degree-d elementary symmetric polynomial.
///
/// By Lucas, C(weight(x), d) is odd exactly when d is a submask of weight(x),
/// which makes every axis-aligned d-subcube meet the set an odd number of
/// times.
pub fn symmetric_polynomial_set(n: usize, d: usize) -> Result<PointSet> {
    gf2::check_ambient(n)?;
    if d < 1 || d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    let d_bits = d as u32;
    let mut set = PointSet::empty(n)?;
    for x in 0..1u32 << n {
        if x.count_ones() & d_bits == d_bits {
            set.insert(x);
        }
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    Delete,
    Add,
}

/// Deletes each point of the set (or adds each point of the complement)
/// independently with the given probability.
///
/// Candidates are scanned in increasing point order with one draw each, so
/// the output depends only on (input, mode, prob, seed).
pub fn perturb(
    a: &PointSet,
    mode: PerturbMode,
    prob: &BigRational,
    seed: u64,
) -> Result<PointSet> {
    if *prob < BigRational::zero() || *prob > BigRational::one() {
        return Err(Error::invalid("probability must lie in [0, 1]"));
    }
    let num = prob
        .numer()
        .to_u64()
        .ok_or_else(|| Error::invalid("probability numerator exceeds u64"))?;
    let den = prob
        .denom()
        .to_u64()
        .ok_or_else(|| Error::invalid("probability denominator exceeds u64"))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = a.clone();
    for x in 0..1u32 << a.dim() {
        let candidate = match mode {
            PerturbMode::Delete => a.contains(x),
            PerturbMode::Add => !a.contains(x),
        };
        if !candidate {
            continue;
        }
        if rng.gen_range(0..den) < num {
            match mode {
                PerturbMode::Delete => out.remove(x),
                PerturbMode::Add => out.insert(x),
            }
        }
    }
    Ok(out)
}

/// Serializable recipe for each named set family. Perturbed recipes nest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionSpec {
    Preimage { n: usize, d: usize, k: usize, j: usize },
    Hyperplane { n: usize, parity: u8 },
    #[serde(alias = "sympoly")]
    SymmetricPoly { n: usize, d: usize },
    Perturbed {
        base: Box<ConstructionSpec>,
        mode: PerturbMode,
        prob_num: u64,
        prob_den: u64,
        seed: u64,
    },
}

impl ConstructionSpec {
    pub fn build(&self) -> Result<PointSet> {
        match self {
            ConstructionSpec::Preimage { n, d, k, j } => preimage_set(*n, *d, *k, *j, None, None),
            ConstructionSpec::Hyperplane { n, parity } => hyperplane_set(*n, *parity),
            ConstructionSpec::SymmetricPoly { n, d } => symmetric_polynomial_set(*n, *d),
            ConstructionSpec::Perturbed {
                base,
                mode,
                prob_num,
                prob_den,
                seed,
            } => {
                if *prob_den == 0 {
                    return Err(Error::invalid("probability denominator must be nonzero"));
                }
                let prob = BigRational::new(BigInt::from(*prob_num), BigInt::from(*prob_den));
                perturb(&base.build()?, *mode, &prob, *seed)
            }
        }
    }
}
