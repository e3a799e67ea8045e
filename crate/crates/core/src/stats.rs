//! Exact intersection profiles of a point set against every affine d-flat
//! (and every axis-aligned d-subcube), plus the derived fractions.
//!
//! Fast path per subspace U: copy the 0/1 indicator table of A, sum-fold it
//! along U's d basis directions, and read the fold output at the 2^{n-d}
//! canonical coset representatives; entry x then holds |A ∩ (x + U)|. Cost
//! is |Gr(n,d)| · 2^n · d word operations, practical up to about 10^10.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::{check_ambient, check_subdim, q_binomial, BitVector};
use crate::grassmann::{enumerate_flats, next_combination, SubspaceIter};
use crate::transform::{sum_fold_words, ValueTable};

/// Default flat-count ceiling for the brute-force oracle.
pub const BRUTEFORCE_CAP: u64 = 2_000_000;

/// Combination-count ceiling for subcube enumeration.
const SUBCUBE_COMBO_CAP: u64 = 1_000_000;

/// A subset of F_2^n as a 2^n-bit mask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    if n >= 6 {
        1usize << (n - 6)
    } else {
        1
    }
}

impl PointSet {
    pub fn empty(n: usize) -> Result<Self> {
        check_ambient(n)?;
        Ok(PointSet {
            n,
            words: vec![0; word_count(n)],
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.mask_top_word();
        Ok(s)
    }

    pub fn from_points(n: usize, points: &[u32]) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for &p in points {
            if p as u64 >= 1u64 << n {
                return Err(Error::invalid(format!("point {p} outside F_2^{n}")));
            }
            s.insert(p);
        }
        Ok(s)
    }

    pub fn from_words(n: usize, words: Vec<u64>) -> Result<Self> {
        check_ambient(n)?;
        if words.len() != word_count(n) {
            return Err(Error::invalid(format!(
                "mask has {} words, expected {}",
                words.len(),
                word_count(n)
            )));
        }
        let mut s = PointSet { n, words };
        if n < 6 && s.words[0] >> (1 << n) != 0 {
            return Err(Error::invalid(
                "mask has bits beyond 2^n".to_string(),
            ));
        }
        s.mask_top_word();
        Ok(s)
    }

    /// Parses a hex mask, most-significant hex digit first (covering the
    /// highest point encodings). Shorter strings get implicit leading zeros.
    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        check_ambient(n)?;
        let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        let max_digits = hex_digit_count(n);
        if digits.is_empty() || digits.len() > max_digits {
            return Err(Error::Parse(format!(
                "mask needs 1..={max_digits} hex digits for n={n}, got {}",
                digits.len()
            )));
        }
        let mut s = Self::empty(n)?;
        for (i, ch) in digits.chars().rev().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))? as u64;
            s.words[i / 16] |= v << (4 * (i % 16));
        }
        if n == 1 && s.words[0] >> 2 != 0 {
            return Err(Error::Parse("mask has bits beyond 2^1".to_string()));
        }
        Ok(s)
    }

    /// Fixed-width lowercase hex rendering; round-trips with `from_hex`.
    pub fn to_hex(&self) -> String {
        let digits = hex_digit_count(self.n);
        let mut out = String::with_capacity(digits);
        for i in (0..digits).rev() {
            let v = self.words[i / 16] >> (4 * (i % 16)) & 0xf;
            out.push(char::from_digit(v as u32, 16).unwrap());
        }
        out
    }

    fn mask_top_word(&mut self) {
        if self.n < 6 {
            self.words[0] &= (1u64 << (1 << self.n)) - 1;
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn contains(&self, p: u32) -> bool {
        debug_assert!((p as u64) < 1u64 << self.n);
        self.words[(p >> 6) as usize] >> (p & 63) & 1 == 1
    }

    pub fn insert(&mut self, p: u32) {
        self.words[(p >> 6) as usize] |= 1 << (p & 63);
    }

    pub fn remove(&mut self, p: u32) {
        self.words[(p >> 6) as usize] &= !(1 << (p & 63));
    }

    pub fn toggle(&mut self, p: u32) {
        self.words[(p >> 6) as usize] ^= 1 << (p & 63);
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Backing bitmask, one bit per point, 64 points per word.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> PointSet {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.mask_top_word();
        out
    }

    /// Set points in increasing encoding order.
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some((i as u32) << 6 | b)
            })
        })
    }

    pub fn point_vectors(&self) -> Vec<BitVector> {
        self.points()
            .map(|p| BitVector::new(self.n, p).expect("point within 2^n"))
            .collect()
    }

    /// 0/1 table indexed by point encoding, the fold engine's input.
    pub fn indicator_u32(&self) -> Vec<u32> {
        let mut t = vec![0u32; 1 << self.n];
        for p in self.points() {
            t[p as usize] = 1;
        }
        t
    }

    /// Indicator as an exact integer table.
    pub fn value_table(&self) -> ValueTable {
        ValueTable::from_fn(self.n, |x| {
            if self.contains(x) {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
        .expect("ambient already validated")
    }

    /// The ±1 lift h = 1 − 2·1_A.
    pub fn pm_one_table(&self) -> ValueTable {
        ValueTable::from_fn(self.n, |x| {
            if self.contains(x) {
                BigInt::from(-1)
            } else {
                BigInt::one()
            }
        })
        .expect("ambient already validated")
    }

    /// Uniformly random subset: each point kept with probability 1/2.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for w in &mut s.words {
            *w = rng.gen();
        }
        s.mask_top_word();
        Ok(s)
    }
}

fn hex_digit_count(n: usize) -> usize {
    if n >= 2 {
        1usize << (n - 2)
    } else {
        1
    }
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PointSet(n={}, 0x{})", self.n, self.to_hex())
    }
}

/// Which family of d-dimensional sets a profile ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    Flats,
    Subcubes,
}

/// Histogram of |Q ∩ A| over all d-flats (or d-subcubes) Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionProfile {
    n: usize,
    d: usize,
    family: ProfileFamily,
    counts: Vec<BigUint>,
    total: BigUint,
}

impl IntersectionProfile {
    fn from_u64_counts(
        n: usize,
        d: usize,
        family: ProfileFamily,
        counts: Vec<u64>,
    ) -> Self {
        let counts: Vec<BigUint> = counts.into_iter().map(BigUint::from).collect();
        let total = counts.iter().sum();
        IntersectionProfile {
            n,
            d,
            family,
            counts,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> ProfileFamily {
        self.family
    }

    /// counts[s] = number of family members meeting A in exactly s points.
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// counts[s]/total in lowest terms.
    pub fn fraction(&self, s: usize) -> Result<BigRational> {
        if s >= self.counts.len() {
            return Err(Error::invalid(format!(
                "s={s} out of range 0..=2^{}",
                self.d
            )));
        }
        Ok(BigRational::new(
            self.counts[s].clone().into(),
            self.total.clone().into(),
        ))
    }

    pub fn fractions(&self) -> Vec<BigRational> {
        (0..self.counts.len())
            .map(|s| self.fraction(s).expect("index in range"))
            .collect()
    }

    /// Fraction of members with odd intersection.
    pub fn odd_fraction(&self) -> BigRational {
        let odd: BigUint = self
            .counts
            .iter()
            .skip(1)
            .step_by(2)
            .cloned()
            .sum();
        BigRational::new(odd.into(), self.total.clone().into())
    }

    /// Σ_s s·counts[s]; for flats this equals |A|·q_binomial(n,d).
    pub fn mass(&self) -> BigUint {
        self.counts
            .iter()
            .enumerate()
            .map(|(s, c)| c * BigUint::from(s))
            .sum()
    }
}

/// Splits [0, total) into at most `parts` contiguous ranges.
pub(crate) fn chunk_ranges(total: u64, parts: u64) -> Vec<(u64, u64)> {
    if total == 0 {
        return Vec::new();
    }
    let parts = parts.clamp(1, total);
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut lo = 0;
    for i in 0..parts {
        let len = base + u64::from(i < extra);
        out.push((lo, lo + len));
        lo += len;
    }
    out
}

/// One subspace worth of work: fold, then histogram the coset values.
#[inline]
fn fold_and_histogram(
    scratch: &mut [u32],
    base: &[u32],
    dirs: &[u32],
    free_mask: u32,
    hist: &mut [u64],
) {
    scratch.copy_from_slice(base);
    for &b in dirs {
        sum_fold_words(scratch, b);
    }
    let mut rep = 0u32;
    loop {
        hist[scratch[rep as usize] as usize] += 1;
        rep = rep.wrapping_sub(free_mask) & free_mask;
        if rep == 0 {
            break;
        }
    }
}

fn merge_hists(hists: Vec<Vec<u64>>, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for h in hists {
        for (o, v) in out.iter_mut().zip(h) {
            *o = o.checked_add(v).expect("histogram total fits u64");
        }
    }
    out
}

fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Exact |Q∩A| histogram over all affine d-flats Q.
pub fn flat_profile(a: &PointSet, d: usize) -> Result<IntersectionProfile> {
    let n = a.dim();
    check_subdim(n, d)?;
    if d == 0 {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    let total_subspaces: u64 = u64::try_from(&q_binomial(n, d)?).map_err(|_| {
        Error::CapExceeded(format!("Gr({n},{d}) too large to enumerate"))
    })?;
    let base = a.indicator_u32();
    let hist_len = (1usize << d) + 1;
    let chunks = chunk_ranges(
        total_subspaces,
        (rayon::current_num_threads().max(1) * 4) as u64,
    );
    let partials: Result<Vec<Vec<u64>>> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut scratch = vec![0u32; base.len()];
            let mut hist = vec![0u64; hist_len];
            for u in SubspaceIter::range(n, d, lo, hi)? {
                let free_mask = !u.pivot_mask() & low_mask(n);
                fold_and_histogram(&mut scratch, &base, u.basis_words(), free_mask, &mut hist);
            }
            Ok(hist)
        })
        .collect();
    let counts = merge_hists(partials?, hist_len);
    Ok(IntersectionProfile::from_u64_counts(
        n,
        d,
        ProfileFamily::Flats,
        counts,
    ))
}

/// Independent oracle: walks every flat and popcounts its point list.
pub fn flat_profile_bruteforce(a: &PointSet, d: usize) -> Result<IntersectionProfile> {
    flat_profile_bruteforce_with_cap(a, d, BRUTEFORCE_CAP)
}

pub fn flat_profile_bruteforce_with_cap(
    a: &PointSet,
    d: usize,
    cap: u64,
) -> Result<IntersectionProfile> {
    let n = a.dim();
    check_subdim(n, d)?;
    if d == 0 {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    let total: u64 = u64::try_from(&crate::gf2::flat_count(n, d)?)
        .map_err(|_| Error::CapExceeded("flat count exceeds u64".to_string()))?;
    if total > cap {
        return Err(Error::CapExceeded(format!(
            "{total} flats exceed the brute-force cap {cap}; use flat_profile"
        )));
    }
    let mut counts = vec![0u64; (1usize << d) + 1];
    for f in enumerate_flats(n, d)? {
        let mut s = 0usize;
        for p in f.subspace().points_words()? {
            if a.contains(p ^ f.rep_word()) {
                s += 1;
            }
        }
        counts[s] += 1;
    }
    Ok(IntersectionProfile::from_u64_counts(
        n,
        d,
        ProfileFamily::Flats,
        counts,
    ))
}

/// λ*(n,d,s,A) = fraction of d-flats meeting A in exactly s points.
pub fn lambda_star(a: &PointSet, d: usize, s: usize) -> Result<BigRational> {
    if s > 1usize << d {
        return Err(Error::invalid(format!("s={s} out of range 0..=2^{d}")));
    }
    flat_profile(a, d)?.fraction(s)
}

/// Exact |Q∩A| histogram over all axis-aligned d-subcubes: choose d free
/// coordinates, fix every other coordinate.
pub fn cube_profile(a: &PointSet, d: usize) -> Result<IntersectionProfile> {
    let n = a.dim();
    check_subdim(n, d)?;
    if d == 0 {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    let mut combos: Vec<Vec<usize>> = Vec::new();
    let mut combo: Vec<usize> = (0..d).collect();
    loop {
        combos.push(combo.clone());
        if combos.len() as u64 > SUBCUBE_COMBO_CAP {
            return Err(Error::CapExceeded(format!(
                "more than {SUBCUBE_COMBO_CAP} coordinate subsets"
            )));
        }
        if !next_combination(&mut combo, n) {
            break;
        }
    }
    let base = a.indicator_u32();
    let hist_len = (1usize << d) + 1;
    let partials: Vec<Vec<u64>> = combos
        .par_chunks(combos.len().div_ceil(rayon::current_num_threads().max(1) * 4))
        .map(|chunk| {
            let mut scratch = vec![0u32; base.len()];
            let mut hist = vec![0u64; hist_len];
            for free_coords in chunk {
                let dirs: Vec<u32> = free_coords.iter().map(|&i| 1u32 << i).collect();
                let cube_mask: u32 = dirs.iter().fold(0, |m, &b| m | b);
                let anchor_mask = !cube_mask & low_mask(n);
                fold_and_histogram(&mut scratch, &base, &dirs, anchor_mask, &mut hist);
            }
            hist
        })
        .collect();
    let counts = merge_hists(partials, hist_len);
    Ok(IntersectionProfile::from_u64_counts(
        n,
        d,
        ProfileFamily::Subcubes,
        counts,
    ))
}

/// Fraction of d-flats with odd |Q∩A|. Defined for d < n.
pub fn odd_fraction(a: &PointSet, d: usize) -> Result<BigRational> {
    if d >= a.dim() {
        return Err(Error::DimensionOutOfRange { d, n: a.dim() });
    }
    Ok(flat_profile(a, d)?.odd_fraction())
}
