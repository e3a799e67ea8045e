//! Canonical enumeration of linear subspaces Gr(n,d), affine flats Aff(n,d),
//! and projective subspaces of PG(n,2).
//!
//! Every subspace is held in its unique reduced-row-echelon basis, so
//! equality is equality of basis words. Enumeration walks pivot-column sets
//! in lexicographic order and fills the free entries as a binary counter,
//! which makes the stream deterministic and addressable by index: worker k
//! can enumerate exactly the index range [lo, hi) with no coordination.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::gf2::{check_subdim, flat_count, q_binomial, rref, BitMatrix, BitVector};

/// A linear subspace of F_2^n in canonical RREF form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearSubspace {
    n: usize,
    basis: Vec<u32>,
    pivots: Vec<usize>,
}

impl LinearSubspace {
    /// Canonicalizes the span of `vectors` (need not be independent).
    pub fn from_vectors(n: usize, vectors: &[BitVector]) -> Result<Self> {
        let m = BitMatrix::from_rows(n, vectors)?;
        let reduced = rref(&m);
        Ok(LinearSubspace {
            n,
            basis: reduced.matrix.row_words().to_vec(),
            pivots: reduced.pivots,
        })
    }

    pub fn from_words(n: usize, words: &[u32]) -> Result<Self> {
        let m = BitMatrix::from_row_words(n, words.to_vec())?;
        let reduced = rref(&m);
        Ok(LinearSubspace {
            n,
            basis: reduced.matrix.row_words().to_vec(),
            pivots: reduced.pivots,
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        crate::gf2::check_ambient(n)?;
        Ok(LinearSubspace {
            n,
            basis: Vec::new(),
            pivots: Vec::new(),
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        crate::gf2::check_ambient(n)?;
        Ok(LinearSubspace {
            n,
            basis: (0..n).map(|i| 1u32 << i).collect(),
            pivots: (0..n).collect(),
        })
    }

    /// Basis rows and pivots must already be in RREF; enumeration uses this
    /// to skip re-reduction.
    fn from_rref_parts(n: usize, basis: Vec<u32>, pivots: Vec<usize>) -> Self {
        debug_assert!(pivots.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(basis
            .iter()
            .zip(&pivots)
            .all(|(&row, &p)| row >> p & 1 == 1 && row & ((1 << p) - 1) == 0));
        LinearSubspace { n, basis, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_words(&self) -> &[u32] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<BitVector> {
        self.basis
            .iter()
            .map(|&w| BitVector::new(self.n, w).expect("basis respects ambient"))
            .collect()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn pivot_mask(&self) -> u32 {
        self.pivots.iter().fold(0u32, |m, &p| m | 1 << p)
    }

    /// Reduces x modulo the subspace: the unique coset member with zeros in
    /// every pivot position.
    pub fn reduce_word(&self, x: u32) -> u32 {
        let mut r = x;
        for (&row, &p) in self.basis.iter().zip(&self.pivots) {
            if r >> p & 1 == 1 {
                r ^= row;
            }
        }
        r
    }

    pub fn contains_word(&self, x: u32) -> bool {
        self.reduce_word(x) == 0
    }

    pub fn contains(&self, x: &BitVector) -> bool {
        x.dim() == self.n && self.contains_word(x.bits())
    }

    /// All 2^d span elements, sorted by integer encoding. Refuses d > 25 to
    /// keep the materialized list desk-sized.
    pub fn points_words(&self) -> Result<Vec<u32>> {
        let d = self.dim();
        if d > 25 {
            return Err(Error::CapExceeded(format!(
                "materializing 2^{d} span points"
            )));
        }
        let mut pts = Vec::with_capacity(1usize << d);
        let mut cur = 0u32;
        pts.push(cur);
        for i in 1u32..1 << d {
            cur ^= self.basis[i.trailing_zeros() as usize];
            pts.push(cur);
        }
        pts.sort_unstable();
        Ok(pts)
    }

    pub fn points(&self) -> Result<Vec<BitVector>> {
        Ok(self
            .points_words()?
            .into_iter()
            .map(|w| BitVector::new(self.n, w).expect("span respects ambient"))
            .collect())
    }

    /// U^⊥ = {x : ⟨x,u⟩ = 0 for all u ∈ U}, canonical.
    pub fn orthogonal_complement(&self) -> LinearSubspace {
        let m = BitMatrix::from_row_words(self.n, self.basis.clone())
            .expect("basis respects ambient");
        let kernel = crate::gf2::kernel_basis(&m);
        LinearSubspace::from_vectors(self.n, &kernel).expect("kernel respects ambient")
    }
}

/// An affine flat rep + U with its canonical coset representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Flat {
    subspace: LinearSubspace,
    rep: u32,
}

impl Flat {
    pub fn new(subspace: LinearSubspace, anchor: &BitVector) -> Result<Self> {
        if anchor.dim() != subspace.ambient() {
            return Err(Error::DimensionMismatch {
                left: subspace.ambient(),
                right: anchor.dim(),
            });
        }
        let rep = subspace.reduce_word(anchor.bits());
        Ok(Flat { subspace, rep })
    }

    pub fn subspace(&self) -> &LinearSubspace {
        &self.subspace
    }

    pub fn rep(&self) -> BitVector {
        BitVector::new(self.subspace.n, self.rep).expect("rep respects ambient")
    }

    pub fn rep_word(&self) -> u32 {
        self.rep
    }

    pub fn ambient(&self) -> usize {
        self.subspace.ambient()
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn contains_word(&self, x: u32) -> bool {
        self.subspace.reduce_word(x) == self.rep
    }

    pub fn contains(&self, x: &BitVector) -> bool {
        x.dim() == self.ambient() && self.contains_word(x.bits())
    }

    /// The 2^d points of the flat, sorted by integer encoding.
    pub fn points(&self) -> Result<Vec<BitVector>> {
        let mut pts = self.subspace.points_words()?;
        for p in &mut pts {
            *p ^= self.rep;
        }
        pts.sort_unstable();
        pts.into_iter()
            .map(|w| BitVector::new(self.ambient(), w))
            .collect()
    }
}

/// Canonical coset representative of x + U.
pub fn canonical_rep(u: &LinearSubspace, x: &BitVector) -> Result<BitVector> {
    if x.dim() != u.ambient() {
        return Err(Error::DimensionMismatch {
            left: u.ambient(),
            right: x.dim(),
        });
    }
    BitVector::new(u.ambient(), u.reduce_word(x.bits()))
}

/// Sorted point list of a flat.
pub fn flat_points(f: &Flat) -> Result<Vec<BitVector>> {
    f.points()
}

/// Lexicographic successor of a d-subset of {0, ..., n-1}, in place.
pub(crate) fn next_combination(combo: &mut Vec<usize>, n: usize) -> bool {
    let d = combo.len();
    for i in (0..d).rev() {
        if combo[i] < n - d + i {
            combo[i] += 1;
            for j in i + 1..d {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Free cells (row, column) of the RREF shape with the given pivot set, in
/// row-major order. Counter bit k drives cells[k].
fn free_cells(pivots: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for (row, &p) in pivots.iter().enumerate() {
        for col in p + 1..n {
            if !pivots.contains(&col) {
                cells.push((row, col));
            }
        }
    }
    cells
}

/// Streaming enumeration of Gr(n,d) in canonical order.
pub struct SubspaceIter {
    n: usize,
    d: usize,
    pivots: Vec<usize>,
    cells: Vec<(usize, usize)>,
    counter: u64,
    block: u64,
    remaining: Option<u64>,
    done: bool,
}

impl SubspaceIter {
    fn start(n: usize, d: usize) -> Result<Self> {
        check_subdim(n, d)?;
        let pivots: Vec<usize> = (0..d).collect();
        let cells = free_cells(&pivots, n);
        let block = 1u64 << cells.len();
        Ok(SubspaceIter {
            n,
            d,
            pivots,
            cells,
            counter: 0,
            block,
            remaining: None,
            done: false,
        })
    }

    /// Enumerates exactly the canonical index range [lo, hi).
    pub fn range(n: usize, d: usize, lo: u64, hi: u64) -> Result<Self> {
        let total = q_binomial(n, d)?;
        let total_u64 = u64::try_from(&total).map_err(|_| {
            Error::CapExceeded(format!("Gr({n},{d}) has {total} elements; range addressing needs a u64 count"))
        })?;
        if lo > hi || hi > total_u64 {
            return Err(Error::invalid(format!(
                "range [{lo}, {hi}) out of bounds for {total_u64} subspaces"
            )));
        }
        let mut it = Self::start(n, d)?;
        it.remaining = Some(hi - lo);
        if lo == hi {
            it.done = true;
            return Ok(it);
        }
        // Skip whole pivot blocks, then land mid-block.
        let mut acc = 0u64;
        loop {
            if acc + it.block > lo {
                it.counter = lo - acc;
                break;
            }
            acc += it.block;
            if !it.advance_pivots() {
                unreachable!("range checked against total");
            }
        }
        Ok(it)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn advance_pivots(&mut self) -> bool {
        if !next_combination(&mut self.pivots, self.n) {
            self.done = true;
            return false;
        }
        self.cells = free_cells(&self.pivots, self.n);
        self.block = 1u64 << self.cells.len();
        self.counter = 0;
        true
    }

    fn build_current(&self) -> LinearSubspace {
        let mut basis: Vec<u32> = self.pivots.iter().map(|&p| 1u32 << p).collect();
        for (k, &(row, col)) in self.cells.iter().enumerate() {
            if self.counter >> k & 1 == 1 {
                basis[row] |= 1 << col;
            }
        }
        LinearSubspace::from_rref_parts(self.n, basis, self.pivots.clone())
    }
}

impl Iterator for SubspaceIter {
    type Item = LinearSubspace;

    fn next(&mut self) -> Option<LinearSubspace> {
        if self.done || self.remaining == Some(0) {
            return None;
        }
        let item = self.build_current();
        if let Some(r) = &mut self.remaining {
            *r -= 1;
        }
        self.counter += 1;
        if self.counter == self.block {
            self.advance_pivots();
        }
        Some(item)
    }
}

/// All d-dimensional linear subspaces of F_2^n, each exactly once. Full
/// enumeration is intended for q_binomial(n,d) up to about 10^8.
pub fn enumerate_subspaces(n: usize, d: usize) -> Result<SubspaceIter> {
    SubspaceIter::start(n, d)
}

/// Streaming enumeration of Aff(n,d): subspace-major, cosets as a binary
/// counter over the non-pivot coordinates.
pub struct FlatIter {
    inner: SubspaceIter,
    current: Option<LinearSubspace>,
    free_mask: u32,
    coset: u32,
    coset_done: bool,
    remaining: Option<u64>,
}

impl FlatIter {
    fn start(n: usize, d: usize) -> Result<Self> {
        let mut inner = SubspaceIter::start(n, d)?;
        let current = inner.next();
        let free_mask = current
            .as_ref()
            .map(|u| !u.pivot_mask() & low_mask(n))
            .unwrap_or(0);
        Ok(FlatIter {
            inner,
            current,
            free_mask,
            coset: 0,
            coset_done: false,
            remaining: None,
        })
    }

    /// Enumerates flat indices [lo, hi); flat index = subspace index ·
    /// 2^{n-d} + coset counter.
    pub fn range(n: usize, d: usize, lo: u64, hi: u64) -> Result<Self> {
        let total = flat_count(n, d)?;
        let total_u64 = u64::try_from(&total).map_err(|_| {
            Error::CapExceeded(format!("Aff({n},{d}) has {total} elements; range addressing needs a u64 count"))
        })?;
        if lo > hi || hi > total_u64 {
            return Err(Error::invalid(format!(
                "range [{lo}, {hi}) out of bounds for {total_u64} flats"
            )));
        }
        let cosets_per = 1u64 << (n - d);
        let mut inner = SubspaceIter::range(n, d, lo / cosets_per, q_binomial(n, d)?.try_into().unwrap())?;
        let current = inner.next();
        let free_mask = current
            .as_ref()
            .map(|u| !u.pivot_mask() & low_mask(n))
            .unwrap_or(0);
        let mut it = FlatIter {
            inner,
            current,
            free_mask,
            coset: 0,
            coset_done: false,
            remaining: Some(hi - lo),
        };
        // Land mid-subspace: the coset counter enumerates submasks of
        // free_mask in increasing order, so replay lo % cosets_per steps.
        for _ in 0..lo % cosets_per {
            it.step_coset();
        }
        Ok(it)
    }

    fn step_coset(&mut self) {
        self.coset = self.coset.wrapping_sub(self.free_mask) & self.free_mask;
        if self.coset == 0 {
            self.coset_done = true;
        }
    }
}

fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

impl Iterator for FlatIter {
    type Item = Flat;

    fn next(&mut self) -> Option<Flat> {
        if self.remaining == Some(0) {
            return None;
        }
        if self.coset_done {
            self.current = self.inner.next();
            self.free_mask = self
                .current
                .as_ref()
                .map(|u| !u.pivot_mask() & low_mask(self.inner.n))
                .unwrap_or(0);
            self.coset = 0;
            self.coset_done = false;
        }
        let subspace = self.current.as_ref()?.clone();
        let rep = self.coset;
        if let Some(r) = &mut self.remaining {
            *r -= 1;
        }
        self.step_coset();
        Some(Flat { subspace, rep })
    }
}

/// All affine d-flats of F_2^n, each exactly once with canonical rep.
pub fn enumerate_flats(n: usize, d: usize) -> Result<FlatIter> {
    FlatIter::start(n, d)
}

/// Projective k-subspaces of PG(n_proj, 2), via the identification with
/// (k+1)-dimensional linear subspaces of F_2^{n_proj+1}.
pub fn enumerate_projective_subspaces(n_proj: usize, k: usize) -> Result<SubspaceIter> {
    if k > n_proj {
        return Err(Error::DimensionOutOfRange {
            d: k,
            n: n_proj,
        });
    }
    enumerate_subspaces(n_proj + 1, k + 1)
}

/// Exact number of subspaces the iterator will emit.
pub fn subspace_total(n: usize, d: usize) -> Result<BigUint> {
    check_subdim(n, d)?;
    q_binomial(n, d)
}

/// Exact number of flats the iterator will emit.
pub fn flat_total(n: usize, d: usize) -> Result<BigUint> {
    check_subdim(n, d)?;
    flat_count(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bv(s: &str) -> BitVector {
        BitVector::from_coord_string(s).unwrap()
    }

    #[test]
    fn counts_match_closed_forms_up_to_n8() {
        for n in 1..=8usize {
            for d in 0..=n {
                let got = enumerate_subspaces(n, d).unwrap().count();
                assert_eq!(
                    BigUint::from(got),
                    q_binomial(n, d).unwrap(),
                    "Gr({n},{d})"
                );
            }
        }
        for n in 1..=6usize {
            for d in 0..=n {
                let got = enumerate_flats(n, d).unwrap().count();
                assert_eq!(
                    BigUint::from(got),
                    flat_count(n, d).unwrap(),
                    "Aff({n},{d})"
                );
            }
        }
    }

    #[test]
    fn no_duplicate_canonical_forms() {
        for n in 1..=8usize {
            for d in 0..=n {
                let mut seen = HashSet::new();
                for u in enumerate_subspaces(n, d).unwrap() {
                    assert_eq!(u.dim(), d);
                    assert_eq!(u.ambient(), n);
                    assert!(seen.insert(u.basis_words().to_vec()), "dup in Gr({n},{d})");
                }
            }
        }
        for n in 1..=5usize {
            for d in 0..=n {
                let mut seen = HashSet::new();
                for f in enumerate_flats(n, d).unwrap() {
                    assert!(
                        seen.insert((f.subspace().basis_words().to_vec(), f.rep_word())),
                        "dup flat in Aff({n},{d})"
                    );
                }
            }
        }
    }

    #[test]
    fn dim1_subspaces_are_nonzero_vectors() {
        let got: Vec<u32> = enumerate_subspaces(3, 1)
            .unwrap()
            .map(|u| u.basis_words()[0])
            .collect();
        // Pivot set {0} first (free bits counting up), then {1}, then {2}.
        assert_eq!(got, vec![0b001, 0b011, 0b101, 0b111, 0b010, 0b110, 0b100]);
    }

    #[test]
    fn full_space_is_unique_top_subspace() {
        let all: Vec<_> = enumerate_subspaces(4, 4).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0], LinearSubspace::full(4).unwrap());
    }

    #[test]
    fn flats_of_dim1_in_f2_3_are_point_pairs() {
        let flats: Vec<_> = enumerate_flats(3, 1).unwrap().collect();
        assert_eq!(flats.len(), 28);
        let mut pairs = HashSet::new();
        for f in &flats {
            let pts = f.points().unwrap();
            assert_eq!(pts.len(), 2);
            assert!(pairs.insert((pts[0].bits(), pts[1].bits())));
        }
        // 28 = C(8,2): every unordered pair of distinct points is one flat.
        assert_eq!(pairs.len(), 28);
    }

    #[test]
    fn singleton_flats() {
        let flats: Vec<_> = enumerate_flats(3, 0).unwrap().collect();
        assert_eq!(flats.len(), 8);
        let reps: HashSet<u32> = flats.iter().map(|f| f.rep_word()).collect();
        assert_eq!(reps.len(), 8);
        for f in &flats {
            assert_eq!(f.points().unwrap().len(), 1);
        }
    }

    #[test]
    fn canonical_rep_examples() {
        let u = LinearSubspace::from_vectors(3, &[bv("100")]).unwrap();
        assert_eq!(canonical_rep(&u, &bv("101")).unwrap(), bv("001"));
        for x in 0..8 {
            let x = BitVector::new(3, x).unwrap();
            let r = canonical_rep(&u, &x).unwrap();
            assert_eq!(canonical_rep(&u, &r).unwrap(), r);
            assert!(u.contains(&(x ^ r)));
        }
        let full = LinearSubspace::full(3).unwrap();
        assert!(canonical_rep(&full, &bv("110")).unwrap().is_zero());
    }

    #[test]
    fn flat_points_examples() {
        let u = LinearSubspace::from_vectors(3, &[bv("001"), bv("010")]).unwrap();
        let f = Flat::new(u, &bv("000")).unwrap();
        let pts: Vec<u32> = f.points().unwrap().iter().map(|p| p.bits()).collect();
        assert_eq!(pts, vec![0, 1, 2, 3]);

        let u = LinearSubspace::from_vectors(3, &[bv("001")]).unwrap();
        let f = Flat::new(u, &bv("100")).unwrap();
        let pts: Vec<u32> = f.points().unwrap().iter().map(|p| p.bits()).collect();
        assert_eq!(pts, vec![0b100, 0b101]);
    }

    #[test]
    fn membership_consistency() {
        for f in enumerate_flats(4, 2).unwrap() {
            for p in f.points().unwrap() {
                assert_eq!(canonical_rep(f.subspace(), &p).unwrap(), f.rep());
                assert!(f.contains(&p));
            }
            assert_eq!(
                (0..16).filter(|&x| f.contains_word(x)).count(),
                4,
                "flat must contain exactly 2^d points"
            );
        }
    }

    #[test]
    fn incidence_count_per_point() {
        for n in 1..=6usize {
            for d in 0..=n {
                let mut per_point = vec![0u64; 1 << n];
                for f in enumerate_flats(n, d).unwrap() {
                    for p in f.points().unwrap() {
                        per_point[p.index()] += 1;
                    }
                }
                let expect = q_binomial(n, d).unwrap();
                for (x, &c) in per_point.iter().enumerate() {
                    assert_eq!(BigUint::from(c), expect, "point {x} in ({n},{d})");
                }
            }
        }
    }

    #[test]
    fn orthogonal_complement_examples() {
        let u = LinearSubspace::from_vectors(3, &[bv("111")]).unwrap();
        let c = u.orthogonal_complement();
        assert_eq!(c.dim(), 2);
        let pts: HashSet<u32> = c.points_words().unwrap().into_iter().collect();
        assert_eq!(pts, HashSet::from([0b000, 0b110, 0b011, 0b101]));

        let full = LinearSubspace::full(5).unwrap();
        assert_eq!(full.orthogonal_complement().dim(), 0);
    }

    #[test]
    fn double_complement_is_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12usize);
            let k = rng.gen_range(0..=3usize);
            let words: Vec<u32> = (0..k).map(|_| rng.gen_range(0..1u32 << n)).collect();
            let u = LinearSubspace::from_words(n, &words).unwrap();
            let back = u.orthogonal_complement().orthogonal_complement();
            assert_eq!(back, u);
            for b in u.basis() {
                for c in u.orthogonal_complement().basis() {
                    assert_eq!(b.dot(&c).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn projective_enumeration_counts() {
        assert_eq!(enumerate_projective_subspaces(2, 1).unwrap().count(), 7);
        assert_eq!(enumerate_projective_subspaces(2, 0).unwrap().count(), 7);
        assert_eq!(enumerate_projective_subspaces(3, 3).unwrap().count(), 1);
        assert!(enumerate_projective_subspaces(2, 3).is_err());
    }

    #[test]
    fn subspace_ranges_tile_the_stream() {
        let full: Vec<_> = enumerate_subspaces(5, 2).unwrap().collect();
        assert_eq!(full.len(), 155);
        let mut tiled = Vec::new();
        let mut lo = 0u64;
        while lo < 155 {
            let hi = (lo + 37).min(155);
            tiled.extend(SubspaceIter::range(5, 2, lo, hi).unwrap());
            lo = hi;
        }
        assert_eq!(full, tiled);
        assert!(SubspaceIter::range(5, 2, 100, 200).is_err());
        assert_eq!(SubspaceIter::range(5, 2, 42, 42).unwrap().count(), 0);
    }

    #[test]
    fn flat_ranges_tile_the_stream() {
        let full: Vec<_> = enumerate_flats(4, 2).unwrap().collect();
        assert_eq!(full.len(), 140);
        for chunk in [1u64, 3, 8, 139] {
            let mut tiled = Vec::new();
            let mut lo = 0u64;
            while lo < 140 {
                let hi = (lo + chunk).min(140);
                tiled.extend(FlatIter::range(4, 2, lo, hi).unwrap());
                lo = hi;
            }
            assert_eq!(full, tiled, "chunk {chunk}");
        }
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(enumerate_subspaces(3, 4).is_err());
        assert!(enumerate_subspaces(0, 0).is_err());
        assert!(enumerate_subspaces(31, 2).is_err());
        assert!(enumerate_flats(2, 5).is_err());
    }
}
