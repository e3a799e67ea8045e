//! Finite-geometry checks: blocking sets in PG(n,2), the nonzero Fourier
//! support of a set seen as its unbalanced hyperplane directions, and the
//! equal-coset-count consequence of a vanishing spectrum.

use crate::error::{Error, Result};
use crate::gf2::{self, BitVector};
use crate::grassmann::{enumerate_projective_subspaces, LinearSubspace};
use crate::stats::PointSet;
use crate::transform::{spectrum_support, wht};

/// Set of points of PG(n_proj, 2), stored as the nonzero vectors of
/// F_2^{n_proj+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePointSet {
    n_proj: usize,
    points: PointSet,
}

impl ProjectivePointSet {
    pub fn new(n_proj: usize, points: &[u32]) -> Result<Self> {
        let n_lin = n_proj + 1;
        gf2::check_ambient(n_lin)?;
        if points.contains(&0) {
            return Err(Error::invalid("projective points must be nonzero"));
        }
        Ok(ProjectivePointSet {
            n_proj,
            points: PointSet::from_points(n_lin, points)?,
        })
    }

    /// Reinterprets a point set of F_2^{n} as a subset of PG(n−1, 2).
    pub fn from_point_set(points: PointSet) -> Result<Self> {
        if points.contains(0) {
            return Err(Error::invalid("projective points must be nonzero"));
        }
        Ok(ProjectivePointSet {
            n_proj: points.dim() - 1,
            points,
        })
    }

    /// The nonzero vectors of a linear subspace, as a projective set.
    pub fn from_linear_subspace(u: &LinearSubspace) -> Result<Self> {
        let words = u.points_words()?;
        Self::new(u.ambient() - 1, &words[1..])
    }

    /// Every point of PG(n_proj, 2).
    pub fn all(n_proj: usize) -> Result<Self> {
        let mut points = PointSet::full(n_proj + 1)?;
        points.remove(0);
        Ok(ProjectivePointSet { n_proj, points })
    }

    pub fn n_proj(&self) -> usize {
        self.n_proj
    }

    pub fn linear_dim(&self) -> usize {
        self.n_proj + 1
    }

    pub fn len(&self) -> u64 {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: u32) -> bool {
        p != 0 && self.points.contains(p)
    }

    pub fn points(&self) -> impl Iterator<Item = BitVector> + '_ {
        let n_lin = self.linear_dim();
        self.points
            .points()
            .map(move |w| BitVector::new(n_lin, w).expect("stored points respect ambient"))
    }

    pub fn as_point_set(&self) -> &PointSet {
        &self.points
    }
}

/// Does every projective k-subspace meet B? On failure the witness is the
/// first missed subspace in canonical enumeration order.
pub fn is_blocking_set(
    b: &ProjectivePointSet,
    k: usize,
) -> Result<(bool, Option<LinearSubspace>)> {
    if k > b.n_proj {
        return Err(Error::invalid(format!(
            "projective dimension {k} exceeds the space dimension {}",
            b.n_proj
        )));
    }
    for u in enumerate_projective_subspaces(b.n_proj, k)? {
        let hit = u
            .points_words()?
            .iter()
            .skip(1)
            .any(|&p| b.points.contains(p));
        if !hit {
            return Ok((false, Some(u)));
        }
    }
    Ok((true, None))
}

fn check_balanced(set: &PointSet, s: u64) -> Result<()> {
    if set.len() != 2 * s {
        return Err(Error::invalid(format!(
            "set has {} points but 2s = {}; this check covers balanced sets only, \
             handle the unbalanced case through the one-point transfer bounds",
            set.len(),
            2 * s
        )));
    }
    Ok(())
}

/// Directions ξ ≠ 0 whose zero hyperplane {x : ⟨x,ξ⟩ = 0} does not carry
/// exactly s points of the set. For |S| = 2s this is the nonzero Fourier
/// support of the indicator, which is how it is computed here.
pub fn bad_directions(set: &PointSet, s: u64) -> Result<ProjectivePointSet> {
    check_balanced(set, s)?;
    let support = spectrum_support(&set.value_table());
    let nonzero: Vec<u32> = support
        .iter()
        .map(|v| v.bits())
        .filter(|&w| w != 0)
        .collect();
    let result = ProjectivePointSet::new(set.dim() - 1, &nonzero)?;
    debug_assert_eq!(
        result,
        bad_directions_by_counts(set, s)?,
        "spectrum support must match the hyperplane-count definition"
    );
    Ok(result)
}

/// Counting route to the same set, kept as an independent oracle: a
/// direction is bad exactly when ⟨x,ξ⟩ = 0 holds for a number of set points
/// other than s.
pub fn bad_directions_by_counts(set: &PointSet, s: u64) -> Result<ProjectivePointSet> {
    check_balanced(set, s)?;
    let n = set.dim();
    let mut bad = Vec::new();
    for xi in 1..1u32 << n {
        let zero_side = set
            .points()
            .filter(|&x| (x & xi).count_ones() & 1 == 0)
            .count() as u64;
        if zero_side != s {
            bad.push(xi);
        }
    }
    ProjectivePointSet::new(n - 1, &bad)
}

/// Outcome of the vanishing-spectrum coset check for one subspace L.
///
/// When the spectrum vanishes on L∖{0}, every coset of L^⊥ carries the same
/// number of set points, so 2^{dim L} divides |S|; the counts are recorded
/// either way, in canonical coset-representative order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityReport {
    pub subspace_dim: usize,
    pub first_nonvanishing: Option<BitVector>,
    pub coset_reps: Vec<u32>,
    pub coset_counts: Vec<u64>,
}

impl DivisibilityReport {
    pub fn spectrum_vanishes(&self) -> bool {
        self.first_nonvanishing.is_none()
    }

    pub fn equal_split(&self) -> bool {
        self.coset_counts.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn check_divisibility(set: &PointSet, l: &LinearSubspace) -> Result<DivisibilityReport> {
    let n = set.dim();
    if l.ambient() != n {
        return Err(Error::DimensionMismatch {
            left: l.ambient(),
            right: n,
        });
    }
    let t = l.dim();
    if t >= n {
        return Err(Error::DimensionOutOfRange { d: t, n });
    }

    let hat = wht(&set.value_table());
    let first_nonvanishing = l
        .points_words()?
        .into_iter()
        .skip(1)
        .find(|&xi| !num_traits::Zero::is_zero(hat.value(xi)))
        .map(|xi| BitVector::new(n, xi).expect("subspace point respects ambient"));

    let perp = l.orthogonal_complement();
    let perp_points = perp.points_words()?;
    let free_mask = !perp.pivot_mask() & ((1u32 << n) - 1) as u32;
    let mut coset_reps = Vec::with_capacity(1 << t);
    let mut coset_counts = Vec::with_capacity(1 << t);
    let mut rep = 0u32;
    loop {
        let count = perp_points.iter().filter(|&&p| set.contains(p ^ rep)).count() as u64;
        coset_reps.push(rep);
        coset_counts.push(count);
        rep = rep.wrapping_sub(free_mask) & free_mask;
        if rep == 0 {
            break;
        }
    }

    let report = DivisibilityReport {
        subspace_dim: t,
        first_nonvanishing,
        coset_reps,
        coset_counts,
    };
    if report.spectrum_vanishes() {
        let expected = set.len() >> t;
        assert!(
            report.coset_counts.iter().all(|&c| c == expected),
            "a vanishing spectrum forces {expected} points in every coset"
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bose_burton_min, nu2};
    use crate::grassmann::{canonical_rep, enumerate_subspaces};
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashMap;

    fn assert_blocks(b: &ProjectivePointSet, k: usize) {
        let (ok, witness) = is_blocking_set(b, k).unwrap();
        assert!(ok, "expected a blocking set at k={k}");
        assert!(witness.is_none());
        let min = bose_burton_min(b.n_proj(), k).unwrap().to_u64().unwrap();
        assert!(b.len() >= min, "blocking set smaller than the subspace bound");
    }

    #[test]
    fn fano_line_blocks_all_lines() {
        let line = LinearSubspace::from_words(3, &[0b001, 0b010]).unwrap();
        let b = ProjectivePointSet::from_linear_subspace(&line).unwrap();
        assert_eq!(b.len(), 3);
        assert_blocks(&b, 1);
    }

    #[test]
    fn two_points_miss_a_line() {
        let b = ProjectivePointSet::new(2, &[1, 2]).unwrap();
        let (ok, witness) = is_blocking_set(&b, 1).unwrap();
        assert!(!ok);
        let w = witness.unwrap();
        let misses = |u: &LinearSubspace| {
            u.points_words()
                .unwrap()
                .iter()
                .skip(1)
                .all(|&p| !b.contains(p))
        };
        assert!(misses(&w));
        let first = enumerate_projective_subspaces(2, 1)
            .unwrap()
            .find(misses)
            .unwrap();
        assert_eq!(w, first);
    }

    #[test]
    fn all_points_block_every_dimension() {
        for n_proj in 0..=3 {
            let b = ProjectivePointSet::all(n_proj).unwrap();
            assert_eq!(b.len(), (1u64 << (n_proj + 1)) - 1);
            for k in 0..=n_proj {
                assert_blocks(&b, k);
            }
        }
        assert!(is_blocking_set(&ProjectivePointSet::all(2).unwrap(), 3).is_err());
    }

    #[test]
    fn complementary_subspaces_attain_the_minimum() {
        for n_proj in 0..=4usize {
            for k in 0..=n_proj {
                let min = bose_burton_min(n_proj, k).unwrap().to_u64().unwrap();
                assert_eq!(min, (1 << (n_proj - k + 1)) - 1);
                for u in enumerate_projective_subspaces(n_proj, n_proj - k).unwrap() {
                    let b = ProjectivePointSet::from_linear_subspace(&u).unwrap();
                    assert_eq!(b.len(), min);
                    assert_blocks(&b, k);
                }
            }
        }
    }

    #[test]
    fn fano_plane_minimum_is_three() {
        let min = bose_burton_min(2, 1).unwrap().to_u64().unwrap();
        assert_eq!(min, 3);
        let mut smallest_blocking = u64::MAX;
        for mask in 0u32..1 << 7 {
            let pts: Vec<u32> = (1..=7).filter(|&p| mask >> (p - 1) & 1 == 1).collect();
            let b = ProjectivePointSet::new(2, &pts).unwrap();
            let (ok, _) = is_blocking_set(&b, 1).unwrap();
            if ok {
                assert!(b.len() >= min);
                smallest_blocking = smallest_blocking.min(b.len());
            }
        }
        assert_eq!(smallest_blocking, min);
    }

    #[test]
    fn sampling_finds_no_small_blocking_set_in_pg3() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xB10C);
        for k in [1usize, 2] {
            let min = bose_burton_min(3, k).unwrap().to_u64().unwrap() as usize;
            for _ in 0..250 {
                let mut pool: Vec<u32> = (1..16).collect();
                for i in 0..min - 1 {
                    let j = rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
                let b = ProjectivePointSet::new(3, &pool[..min - 1]).unwrap();
                let (ok, witness) = is_blocking_set(&b, k).unwrap();
                assert!(!ok);
                assert!(witness.is_some());
            }
        }
    }

    #[test]
    fn subspace_directions_are_the_dual_point() {
        for d in 2..=4usize {
            let n = d + 1;
            for u in enumerate_subspaces(n, d).unwrap().take(5) {
                let s_set = PointSet::from_points(n, &u.points_words().unwrap()).unwrap();
                let bd = bad_directions(&s_set, 1 << (d - 1)).unwrap();
                let dual = u.orthogonal_complement();
                assert_eq!(dual.dim(), 1);
                assert_eq!(bd.len(), 1);
                assert!(bd.contains(dual.basis_words()[0]));
            }
        }
    }

    #[test]
    fn bad_directions_rejects_unbalanced_sets() {
        let s_set = PointSet::from_points(3, &[0, 1, 2]).unwrap();
        assert!(bad_directions(&s_set, 1).is_err());
        assert!(bad_directions_by_counts(&s_set, 1).is_err());
    }

    // |S| = 2s with s = j·2^k leaves the directions no room to avoid a
    // (k+1)-dim projective subspace: a missed one would force 2^{k+2}
    // to divide |S|. Blocking then puts at least 2^{d−k}−1 points in it.
    fn assert_direction_bound(s_set: &PointSet) {
        let d = s_set.dim() - 1;
        let s = s_set.len() / 2;
        if s == 0 {
            return;
        }
        let k = nu2(s).unwrap() as usize;
        let bd = bad_directions(s_set, s).unwrap();
        assert!(
            bd.len() >= (1u64 << (d - k.min(d))) - 1,
            "direction count below the blocking minimum for |S|={}",
            s_set.len()
        );
        if k + 1 <= d {
            assert_blocks(&bd, k + 1);
        }
    }

    #[test]
    fn direction_bound_exhaustive_small() {
        for n in 2..=4usize {
            for mask in 0u64..1 << (1 << n) {
                if mask.count_ones() % 2 != 0 {
                    continue;
                }
                let s_set = PointSet::from_words(n, vec![mask]).unwrap();
                assert_direction_bound(&s_set);
            }
        }
    }

    #[test]
    fn direction_bound_sampled_dim5() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x5EED);
        for _ in 0..500 {
            let mut s_set = PointSet::random(5, &mut rng).unwrap();
            if s_set.len() % 2 == 1 {
                s_set.toggle(0);
            }
            assert_direction_bound(&s_set);
        }
    }

    #[test]
    fn both_direction_routes_agree_on_random_sets() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xD0A1);
        for n in 2..=6usize {
            for _ in 0..100 {
                let mut s_set = PointSet::random(n, &mut rng).unwrap();
                if s_set.len() % 2 == 1 {
                    s_set.toggle(rng.gen_range(0..1u32 << n));
                }
                let s = s_set.len() / 2;
                let by_spectrum = bad_directions(&s_set, s).unwrap();
                let by_counts = bad_directions_by_counts(&s_set, s).unwrap();
                assert_eq!(by_spectrum, by_counts);
                let support: Vec<BitVector> = spectrum_support(&s_set.value_table())
                    .into_iter()
                    .filter(|v| !v.is_zero())
                    .collect();
                assert_eq!(by_spectrum.points().collect::<Vec<_>>(), support);
            }
        }
    }

    #[test]
    fn full_set_splits_every_coset_evenly() {
        let full = PointSet::full(4).unwrap();
        for t in 0..=3usize {
            for l in enumerate_subspaces(4, t).unwrap().take(10) {
                let report = check_divisibility(&full, &l).unwrap();
                assert!(report.spectrum_vanishes());
                assert_eq!(report.coset_counts, vec![1u64 << (4 - t); 1 << t]);
            }
        }
    }

    #[test]
    fn parity_set_splits_along_vanishing_directions() {
        let s_set = crate::constructions::hyperplane_set(4, 0).unwrap();
        let quiet = LinearSubspace::from_words(4, &[0b0011]).unwrap();
        let report = check_divisibility(&s_set, &quiet).unwrap();
        assert!(report.spectrum_vanishes());
        assert_eq!(report.coset_counts, vec![4, 4]);

        let loud = LinearSubspace::from_words(4, &[0b1111]).unwrap();
        let report = check_divisibility(&s_set, &loud).unwrap();
        assert_eq!(
            report.first_nonvanishing,
            Some(BitVector::new(4, 0b1111).unwrap())
        );
    }

    #[test]
    fn coset_counts_match_direct_tally() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xC05E);
        let mut vanishing_seen = 0u32;
        for trial in 0..1000 {
            let n = 2 + (trial % 4) as usize;
            let s_set = PointSet::random(n, &mut rng).unwrap();
            let t_max = n - 1;
            let words: Vec<u32> = (0..rng.gen_range(0..=t_max))
                .map(|_| rng.gen_range(1..1u32 << n))
                .collect();
            let l = LinearSubspace::from_words(n, &words).unwrap();
            if l.dim() >= n {
                continue;
            }
            let report = check_divisibility(&s_set, &l).unwrap();

            let perp = l.orthogonal_complement();
            let mut tally: HashMap<u32, u64> = HashMap::new();
            for x in s_set.points() {
                let rep = canonical_rep(&perp, &BitVector::new(n, x).unwrap()).unwrap();
                *tally.entry(rep.bits()).or_insert(0) += 1;
            }
            for (rep, count) in report.coset_reps.iter().zip(&report.coset_counts) {
                assert_eq!(tally.get(rep).copied().unwrap_or(0), *count);
            }
            assert_eq!(report.coset_counts.iter().sum::<u64>(), s_set.len());

            if let Some(xi) = &report.first_nonvanishing {
                assert!(!xi.is_zero() && l.contains(xi));
            } else {
                vanishing_seen += 1;
                assert!(report.equal_split());
            }
        }
        assert!(vanishing_seen > 0, "trials never exercised the vanishing branch");
    }
}
