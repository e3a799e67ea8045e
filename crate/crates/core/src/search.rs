//! Extremal-set search: exact exhaustion over all subsets at tiny n,
//! simulated annealing above that, and the theorem-verification battery.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{c_n_dk, finite_n_upper, nu2, odd_upper, upper_flat_even, upper_half_level};
use crate::constructions::{preimage_set, symmetric_polynomial_set, ConstructionSpec};
use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix};
use crate::grassmann::enumerate_subspaces;
use crate::stats::{chunk_ranges, cube_profile, flat_profile, lambda_star, PointSet};

/// Hard cap on witnesses materialized in a result; the exact count is
/// reported separately.
pub const WITNESS_CAP: usize = 4096;

const TALLY_ENTRY_CAP: u64 = 1 << 24;

/// Point-to-class maps for a family of partitions of F_2^n into 2^{n-d}
/// classes each: one partition per subspace (cosets = flats) or per
/// coordinate d-set (anchors = subcubes). Shared tally engine for the
/// exhaustive scans and the incremental anneal objective.
struct PartitionTally {
    size: usize,
    classes: usize,
    parts: usize,
    maps: Vec<u32>,
}

impl PartitionTally {
    fn flats(n: usize, d: usize) -> Result<Self> {
        gf2::check_ambient(n)?;
        if d < 1 || d > n {
            return Err(Error::DimensionOutOfRange { d, n });
        }
        let parts_big = crate::grassmann::subspace_total(n, d)?;
        Self::check_entries(&parts_big, n)?;
        let parts = parts_big.to_usize().expect("cap bounds the count");
        let size = 1usize << n;
        let classes = 1usize << (n - d);
        let mut maps = vec![0u32; parts * size];
        for (idx, u) in enumerate_subspaces(n, d)?.enumerate() {
            let free: Vec<usize> = (0..n).filter(|i| u.pivot_mask() >> i & 1 == 0).collect();
            let base = idx * size;
            for x in 0..size {
                let rep = u.reduce_word(x as u32);
                let mut slot = 0u32;
                for (j, pos) in free.iter().enumerate() {
                    slot |= (rep >> pos & 1) << j;
                }
                maps[base + x] = slot;
            }
        }
        Ok(PartitionTally {
            size,
            classes,
            parts,
            maps,
        })
    }

    fn cubes(n: usize, d: usize) -> Result<Self> {
        gf2::check_ambient(n)?;
        if d < 1 || d > n {
            return Err(Error::DimensionOutOfRange { d, n });
        }
        let parts_u64 = num_integer::binomial(n as u64, d as u64);
        Self::check_entries(&num_bigint::BigUint::from(parts_u64), n)?;
        let parts = parts_u64 as usize;
        let size = 1usize << n;
        let classes = 1usize << (n - d);
        let mut maps = vec![0u32; parts * size];
        let mut idx = 0usize;
        for combo in 0..1u32 << n {
            if combo.count_ones() as usize != d {
                continue;
            }
            let fixed: Vec<usize> = (0..n).filter(|i| combo >> i & 1 == 0).collect();
            let base = idx * size;
            for x in 0..size {
                let mut slot = 0u32;
                for (j, pos) in fixed.iter().enumerate() {
                    slot |= (x as u32 >> pos & 1) << j;
                }
                maps[base + x] = slot;
            }
            idx += 1;
        }
        debug_assert_eq!(idx, parts);
        Ok(PartitionTally {
            size,
            classes,
            parts,
            maps,
        })
    }

    fn check_entries(parts: &num_bigint::BigUint, n: usize) -> Result<()> {
        let entries = parts * num_bigint::BigUint::from(1u64 << n);
        if entries > num_bigint::BigUint::from(TALLY_ENTRY_CAP) {
            return Err(Error::CapExceeded(format!(
                "tally table needs {entries} entries, cap is {TALLY_ENTRY_CAP}"
            )));
        }
        Ok(())
    }

    fn total(&self) -> u64 {
        self.parts as u64 * self.classes as u64
    }

    fn scratch(&self) -> TallyScratch {
        TallyScratch {
            counts: vec![0u32; self.classes],
            touched: Vec::with_capacity(self.size),
        }
    }

    /// Histogram over all classes of all partitions: hist[c] = number of
    /// classes holding exactly c of the given points. hist must have length
    /// at least max class size + 1 and is cleared here.
    fn histogram(&self, points: &[u32], scratch: &mut TallyScratch, hist: &mut [u64]) {
        hist.fill(0);
        for part in 0..self.parts {
            let base = part * self.size;
            for &p in points {
                let slot = self.maps[base + p as usize] as usize;
                if scratch.counts[slot] == 0 {
                    scratch.touched.push(slot as u32);
                }
                scratch.counts[slot] += 1;
            }
            hist[0] += (self.classes - scratch.touched.len()) as u64;
            for &slot in &scratch.touched {
                hist[scratch.counts[slot as usize] as usize] += 1;
                scratch.counts[slot as usize] = 0;
            }
            scratch.touched.clear();
        }
    }

    /// Number of classes holding exactly s points.
    fn matches(&self, points: &[u32], s: usize, scratch: &mut TallyScratch) -> u64 {
        let mut matches = 0u64;
        for part in 0..self.parts {
            let base = part * self.size;
            for &p in points {
                let slot = self.maps[base + p as usize] as usize;
                if scratch.counts[slot] == 0 {
                    scratch.touched.push(slot as u32);
                }
                scratch.counts[slot] += 1;
            }
            if s == 0 {
                matches += (self.classes - scratch.touched.len()) as u64;
            }
            for &slot in &scratch.touched {
                if scratch.counts[slot as usize] as usize == s {
                    matches += 1;
                }
                scratch.counts[slot as usize] = 0;
            }
            scratch.touched.clear();
        }
        matches
    }

    fn init_state(&self, set: &PointSet, s: usize) -> AnnealState {
        let mut counts = vec![0u32; self.parts * self.classes];
        for part in 0..self.parts {
            let map_base = part * self.size;
            let count_base = part * self.classes;
            for p in set.points() {
                counts[count_base + self.maps[map_base + p as usize] as usize] += 1;
            }
        }
        let matches = counts.iter().filter(|&&c| c as usize == s).count() as u64;
        AnnealState { counts, matches }
    }

    /// Applies one membership flip and returns the updated match count.
    fn flip(&self, state: &mut AnnealState, point: u32, now_present: bool, s: usize) -> u64 {
        for part in 0..self.parts {
            let slot = self.maps[part * self.size + point as usize] as usize;
            let entry = &mut state.counts[part * self.classes + slot];
            let old = *entry as usize;
            let new = if now_present { old + 1 } else { old - 1 };
            *entry = new as u32;
            if old == s {
                state.matches -= 1;
            }
            if new == s {
                state.matches += 1;
            }
        }
        state.matches
    }
}

struct TallyScratch {
    counts: Vec<u32>,
    touched: Vec<u32>,
}

struct AnnealState {
    counts: Vec<u32>,
    matches: u64,
}

fn points_of_mask(mask: u64, buf: &mut Vec<u32>) {
    buf.clear();
    let mut m = mask;
    while m != 0 {
        buf.push(m.trailing_zeros());
        m &= m - 1;
    }
}

fn mask_hex(n: usize, mask: u64) -> String {
    let digits = ((1usize << n) + 3) / 4;
    format!("0x{mask:0digits$x}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Anneal,
}

fn default_iterations() -> u64 {
    10_000
}

fn default_restarts() -> u64 {
    4
}

fn default_temp_start() -> f64 {
    2.0
}

fn default_temp_ratio() -> f64 {
    0.999
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub mode: SearchMode,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_restarts")]
    pub restarts: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial: Option<ConstructionSpec>,
    #[serde(default = "default_temp_start")]
    pub temp_start: f64,
    #[serde(default = "default_temp_ratio")]
    pub temp_ratio: f64,
    #[serde(default)]
    pub allow_long: bool,
}

impl SearchConfig {
    pub fn exhaustive(n: usize, d: usize, s: usize) -> Self {
        SearchConfig {
            n,
            d,
            s,
            mode: SearchMode::Exhaustive,
            iterations: 0,
            restarts: 0,
            seed: 0,
            initial: None,
            temp_start: default_temp_start(),
            temp_ratio: default_temp_ratio(),
            allow_long: false,
        }
    }

    pub fn run(&self) -> Result<SearchResult> {
        match self.mode {
            SearchMode::Exhaustive => {
                if self.n <= 4 {
                    exhaustive_max(self.n, self.d, self.s)
                } else if self.n == 5 && self.allow_long {
                    exhaustive_max_symmetric(self.n, self.d, self.s)
                } else {
                    Err(Error::invalid(format!(
                        "exhaustive search covers n <= 4 (n = 5 behind the long-run flag); \
                         use anneal mode for n = {}",
                        self.n
                    )))
                }
            }
            SearchMode::Anneal => anneal_max(self),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub config: SearchConfig,
    pub value: BigRational,
    pub witnesses: Vec<PointSet>,
    pub witness_count: u64,
    pub visited: u64,
    pub trace: Vec<(u64, BigRational)>,
    pub symmetry_reduced: bool,
}

/// Partial outcome of scanning set masks in [lo, hi); chunks merge
/// associatively and serve as checkpoint units for long runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanChunk {
    pub lo: u64,
    pub hi: u64,
    pub best_count: Option<u64>,
    pub witness_masks: Vec<u64>,
    pub witness_count: u64,
    pub visited: u64,
    pub trace: Vec<(u64, u64)>,
}

fn scan_range_with(
    tally: &PartitionTally,
    n: usize,
    d: usize,
    s: usize,
    lo: u64,
    hi: u64,
    symmetric: bool,
) -> ScanChunk {
    let full_mask = if 1usize << n == 64 {
        u64::MAX
    } else {
        (1u64 << (1usize << n)) - 1
    };
    let comp_s = (1usize << d) - s;
    let mut scratch = tally.scratch();
    let mut buf = Vec::with_capacity(1 << n);
    let mut chunk = ScanChunk {
        lo,
        hi,
        best_count: None,
        witness_masks: Vec::new(),
        witness_count: 0,
        visited: 0,
        trace: Vec::new(),
    };
    let consider = |chunk: &mut ScanChunk, scanned: u64, count: u64, witness: u64| {
        if chunk.best_count.map_or(true, |b| count > b) {
            chunk.best_count = Some(count);
            chunk.witness_masks.clear();
            chunk.witness_masks.push(witness);
            chunk.witness_count = 1;
            chunk.trace.push((scanned, count));
        } else if chunk.best_count == Some(count) {
            chunk.witness_count += 1;
            if chunk.witness_masks.len() < WITNESS_CAP {
                chunk.witness_masks.push(witness);
            }
        }
    };
    for mask in lo..hi {
        if symmetric && mask & 1 == 0 {
            continue;
        }
        points_of_mask(mask, &mut buf);
        chunk.visited += 1;
        let direct = tally.matches(&buf, s, &mut scratch);
        consider(&mut chunk, mask, direct, mask);
        if symmetric {
            // The complement of a scanned set stands in for every set not
            // containing the origin: its value at s is this set's at 2^d - s.
            let via_complement = if comp_s == s {
                direct
            } else {
                tally.matches(&buf, comp_s, &mut scratch)
            };
            consider(&mut chunk, mask, via_complement, full_mask ^ mask);
        }
    }
    chunk
}

fn merge_chunks(
    n: usize,
    d: usize,
    s: usize,
    symmetric: bool,
    config: SearchConfig,
    chunks: &[ScanChunk],
) -> Result<SearchResult> {
    let total_masks = 1u64 << (1usize << n);
    let mut expected_lo = 0u64;
    for ch in chunks {
        if ch.lo != expected_lo {
            return Err(Error::invalid(format!(
                "scan chunks must tile the mask space: expected lo {expected_lo}, got {}",
                ch.lo
            )));
        }
        expected_lo = ch.hi;
    }
    if expected_lo != total_masks {
        return Err(Error::invalid(format!(
            "scan chunks end at {expected_lo}, expected {total_masks}"
        )));
    }

    let best = chunks
        .iter()
        .filter_map(|c| c.best_count)
        .max()
        .ok_or_else(|| Error::invalid("scan visited no sets"))?;
    let mut witness_masks = Vec::new();
    let mut witness_count = 0u64;
    let mut visited = 0u64;
    let mut trace_counts: Vec<(u64, u64)> = Vec::new();
    let mut running: Option<u64> = None;
    for ch in chunks {
        visited += ch.visited;
        for &(idx, cnt) in &ch.trace {
            if running.map_or(true, |r| cnt > r) {
                running = Some(cnt);
                trace_counts.push((idx, cnt));
            }
        }
        if ch.best_count == Some(best) {
            witness_count += ch.witness_count;
            witness_masks.extend_from_slice(&ch.witness_masks);
        }
    }
    witness_masks.sort_unstable();
    witness_masks.dedup();
    witness_masks.truncate(WITNESS_CAP);

    let total_flats = crate::grassmann::flat_total(n, d)?
        .to_u64()
        .expect("desk-scale flat count");
    let value = BigRational::new(BigInt::from(best), BigInt::from(total_flats));
    let witnesses: Vec<PointSet> = witness_masks
        .iter()
        .map(|&m| PointSet::from_words(n, vec![m]))
        .collect::<Result<_>>()?;
    let recomputed = lambda_star(&witnesses[0], d, s)?;
    assert_eq!(
        recomputed, value,
        "witness must reproduce the reported value"
    );
    let trace = trace_counts
        .into_iter()
        .map(|(idx, cnt)| {
            (
                idx,
                BigRational::new(BigInt::from(cnt), BigInt::from(total_flats)),
            )
        })
        .collect();
    Ok(SearchResult {
        config,
        value,
        witnesses,
        witness_count,
        visited,
        trace,
        symmetry_reduced: symmetric,
    })
}

fn degenerate_result(
    n: usize,
    d: usize,
    s: usize,
    symmetric: bool,
    config: SearchConfig,
) -> Result<SearchResult> {
    // s = 0 is attained only by the empty set, s = 2^d only by the full one.
    let witness = if s == 0 {
        PointSet::empty(n)?
    } else {
        PointSet::full(n)?
    };
    let value = lambda_star(&witness, d, s)?;
    assert!(value.is_one());
    let mask = witness.words()[0];
    Ok(SearchResult {
        config,
        value: value.clone(),
        witnesses: vec![witness],
        witness_count: 1,
        visited: 1,
        trace: vec![(mask, value)],
        symmetry_reduced: symmetric,
    })
}

fn check_search_dims(n: usize, d: usize, s: usize) -> Result<()> {
    gf2::check_ambient(n)?;
    if d < 1 || d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    if s > 1 << d {
        return Err(Error::invalid(format!(
            "intersection size {s} exceeds the 2^{d} points of a flat"
        )));
    }
    Ok(())
}

/// Exact max over every subset of F_2^n of the fraction of d-flats meeting
/// it in exactly s points. Plain scan of all 2^{2^n} masks, n <= 4.
pub fn exhaustive_max(n: usize, d: usize, s: usize) -> Result<SearchResult> {
    check_search_dims(n, d, s)?;
    if n > 4 {
        return Err(Error::invalid(format!(
            "exhaustive search covers n <= 4 (n = 5 behind the long-run flag); \
             use anneal mode for n = {n}"
        )));
    }
    let config = SearchConfig::exhaustive(n, d, s);
    if s == 0 || s == 1 << d {
        return degenerate_result(n, d, s, false, config);
    }
    let tally = PartitionTally::flats(n, d)?;
    let total_masks = 1u64 << (1usize << n);
    let parts = rayon::current_num_threads() as u64 * 4;
    let chunks: Vec<ScanChunk> = chunk_ranges(total_masks, parts)
        .into_par_iter()
        .map(|(lo, hi)| scan_range_with(&tally, n, d, s, lo, hi, false))
        .collect();
    merge_chunks(n, d, s, false, config, &chunks)
}

/// Same maximum at n <= 5 using translation canonicalization (scan sets
/// containing the origin) and the complement symmetry s <-> 2^d - s.
/// Witnesses are recorded up to those symmetries.
pub fn exhaustive_max_symmetric(n: usize, d: usize, s: usize) -> Result<SearchResult> {
    check_search_dims(n, d, s)?;
    if n > 5 {
        return Err(Error::invalid(
            "the symmetric exhaustive scan is capped at n = 5; use anneal mode",
        ));
    }
    let mut config = SearchConfig::exhaustive(n, d, s);
    config.allow_long = true;
    if s == 0 || s == 1 << d {
        return degenerate_result(n, d, s, true, config);
    }
    let tally = PartitionTally::flats(n, d)?;
    let total_masks = 1u64 << (1usize << n);
    let parts = rayon::current_num_threads() as u64 * 4;
    let chunks: Vec<ScanChunk> = chunk_ranges(total_masks, parts)
        .into_par_iter()
        .map(|(lo, hi)| scan_range_with(&tally, n, d, s, lo, hi, true))
        .collect();
    merge_chunks(n, d, s, true, config, &chunks)
}

/// One checkpointable unit of the exhaustive scan over masks [lo, hi).
pub fn exhaustive_chunk(
    n: usize,
    d: usize,
    s: usize,
    lo: u64,
    hi: u64,
    symmetric: bool,
) -> Result<ScanChunk> {
    check_search_dims(n, d, s)?;
    if n > 5 || (!symmetric && n > 4) {
        return Err(Error::invalid("chunked exhaustion is capped at n = 5"));
    }
    let total_masks = 1u64 << (1usize << n);
    if lo > hi || hi > total_masks {
        return Err(Error::invalid(format!(
            "chunk [{lo}, {hi}) out of the {total_masks}-mask space"
        )));
    }
    let tally = PartitionTally::flats(n, d)?;
    Ok(scan_range_with(&tally, n, d, s, lo, hi, symmetric))
}

/// Merges a complete tiling of scan chunks into a final result.
pub fn exhaustive_finish(
    n: usize,
    d: usize,
    s: usize,
    symmetric: bool,
    chunks: &[ScanChunk],
) -> Result<SearchResult> {
    check_search_dims(n, d, s)?;
    if n > 5 {
        return Err(Error::invalid("chunked exhaustion is capped at n = 5"));
    }
    let mut config = SearchConfig::exhaustive(n, d, s);
    config.allow_long = symmetric;
    merge_chunks(n, d, s, symmetric, config, chunks)
}

fn mask_words_lt(a: &[u64], b: &[u64]) -> bool {
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            return x < y;
        }
    }
    false
}

struct RestartOutcome {
    best_matches: u64,
    best_set: PointSet,
    trace: Vec<(u64, u64)>,
    visited: u64,
}

/// Simulated annealing on the exact flat count at s: single-point flips,
/// geometric temperature, deterministic per seed; restarts run in parallel
/// on derived seeds and merge by value then smallest witness mask.
pub fn anneal_max(cfg: &SearchConfig) -> Result<SearchResult> {
    check_search_dims(cfg.n, cfg.d, cfg.s)?;
    if cfg.restarts == 0 {
        return Err(Error::invalid("anneal needs at least one restart"));
    }
    if !(cfg.temp_start > 0.0) || !(cfg.temp_ratio > 0.0 && cfg.temp_ratio <= 1.0) {
        return Err(Error::invalid(
            "temperature schedule needs temp_start > 0 and 0 < temp_ratio <= 1",
        ));
    }
    let (n, d, s) = (cfg.n, cfg.d, cfg.s);
    let tally = PartitionTally::flats(n, d)?;
    let initial = cfg
        .initial
        .as_ref()
        .map(|spec| {
            let set = spec.build()?;
            if set.dim() != n {
                return Err(Error::DimensionMismatch {
                    left: set.dim(),
                    right: n,
                });
            }
            Ok(set)
        })
        .transpose()?;

    let span = cfg.iterations + 1;
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let derived = cfg.seed ^ (r + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha12Rng::seed_from_u64(derived);
            let mut current = match &initial {
                Some(set) => set.clone(),
                None => PointSet::random(n, &mut rng).expect("n validated"),
            };
            let mut state = tally.init_state(&current, s);
            let mut best_matches = state.matches;
            let mut best_set = current.clone();
            let mut trace = vec![(r * span, best_matches)];
            let mut temp = cfg.temp_start;
            for step in 1..=cfg.iterations {
                let p = rng.gen_range(0..1u32 << n);
                let was_present = current.contains(p);
                let before = state.matches;
                let after = tally.flip(&mut state, p, !was_present, s);
                let diff = after as i64 - before as i64;
                let accept = diff >= 0 || rng.gen::<f64>() < (diff as f64 / temp).exp();
                if accept {
                    current.toggle(p);
                    if after > best_matches
                        || (after == best_matches
                            && mask_words_lt(current.words(), best_set.words()))
                    {
                        if after > best_matches {
                            trace.push((r * span + step, after));
                        }
                        best_matches = after;
                        best_set = current.clone();
                    }
                } else {
                    tally.flip(&mut state, p, was_present, s);
                }
                temp *= cfg.temp_ratio;
            }
            RestartOutcome {
                best_matches,
                best_set,
                trace,
                visited: cfg.iterations + 1,
            }
        })
        .collect();

    let best = outcomes
        .iter()
        .map(|o| o.best_matches)
        .max()
        .expect("at least one restart");
    let mut witnesses: Vec<PointSet> = outcomes
        .iter()
        .filter(|o| o.best_matches == best)
        .map(|o| o.best_set.clone())
        .collect();
    witnesses.sort_by(|a, b| {
        if mask_words_lt(a.words(), b.words()) {
            std::cmp::Ordering::Less
        } else if a == b {
            std::cmp::Ordering::Equal
        } else {
            std::cmp::Ordering::Greater
        }
    });
    witnesses.dedup();
    witnesses.truncate(WITNESS_CAP);
    let witness_count = witnesses.len() as u64;
    let visited = outcomes.iter().map(|o| o.visited).sum();
    let mut trace = Vec::new();
    let mut running: Option<u64> = None;
    for o in &outcomes {
        for &(idx, cnt) in &o.trace {
            if running.map_or(true, |r| cnt > r) {
                running = Some(cnt);
                trace.push((idx, cnt));
            }
        }
    }

    let value = BigRational::new(BigInt::from(best), BigInt::from(tally.total()));
    let cap = finite_n_upper(n, d, s as u64)?;
    assert!(
        value <= cap,
        "search value {value} exceeds the proven bound {cap}; this contradicts the theory"
    );
    let recomputed = lambda_star(&witnesses[0], d, s)?;
    assert_eq!(
        recomputed, value,
        "witness must reproduce the reported value"
    );
    let total = tally.total();
    Ok(SearchResult {
        config: cfg.clone(),
        value,
        witnesses,
        witness_count,
        visited,
        trace: trace
            .into_iter()
            .map(|(idx, cnt)| (idx, BigRational::new(BigInt::from(cnt), BigInt::from(total))))
            .collect(),
        symmetry_reduced: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Verified,
    Violated,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub id: String,
    pub params: String,
    pub status: ClaimStatus,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub d: usize,
    pub claims: Vec<ClaimOutcome>,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.claims
            .iter()
            .all(|c| c.status != ClaimStatus::Violated)
    }

    pub fn violated(&self) -> Vec<&ClaimOutcome> {
        self.claims
            .iter()
            .filter(|c| c.status == ClaimStatus::Violated)
            .collect()
    }
}

pub const CLAIM_IDS: [&str; 10] = [
    "half_level_bound",
    "even_level_bound",
    "odd_bound",
    "construction_equality",
    "complement_symmetry",
    "affine_invariance",
    "cube_dominates_flat",
    "all_odd_subcubes",
    "monotone_in_n",
    "deletion_ratio",
];

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub claims: Option<Vec<String>>,
    pub corrupt_self_test: bool,
}

/// Per-s extremal counts over every subset of F_2^n, for flats and cubes,
/// plus the mirror check between each set's profile and its complement's.
struct ScanStats {
    flat_max: Vec<u64>,
    flat_arg: Vec<u64>,
    cube_max: Vec<u64>,
    odd_max: u64,
    flat_total: u64,
    cube_total: u64,
    mirror_violation: Option<(u64, usize)>,
    visited: u64,
}

fn scan_all_sets(n: usize, d: usize, corrupt_mask: Option<u64>) -> Result<ScanStats> {
    check_search_dims(n, d, 0)?;
    if n > 4 {
        return Err(Error::CapExceeded(
            "full-subset scans are capped at n = 4".into(),
        ));
    }
    let flats = PartitionTally::flats(n, d)?;
    let cubes = PartitionTally::cubes(n, d)?;
    let full_mask = (1u64 << (1usize << n)) - 1;
    let total_masks = full_mask + 1;
    let levels = (1usize << d) + 1;
    let parts = rayon::current_num_threads() as u64 * 4;

    let stats: Vec<ScanStats> = chunk_ranges(total_masks, parts)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut st = ScanStats {
                flat_max: vec![0; levels],
                flat_arg: vec![0; levels],
                cube_max: vec![0; levels],
                odd_max: 0,
                flat_total: flats.total(),
                cube_total: cubes.total(),
                mirror_violation: None,
                visited: 0,
            };
            let mut scratch_f = flats.scratch();
            let mut scratch_c = cubes.scratch();
            let mut buf = Vec::with_capacity(1 << n);
            let mut hist_a = vec![0u64; levels];
            let mut hist_b = vec![0u64; levels];
            let mut hist_c = vec![0u64; levels];
            for mask in lo..hi {
                let comp = full_mask ^ mask;
                if mask >= comp {
                    continue;
                }
                for (member, hist) in [(mask, &mut hist_a), (comp, &mut hist_b)] {
                    points_of_mask(member, &mut buf);
                    flats.histogram(&buf, &mut scratch_f, hist);
                    st.visited += 1;
                    let mut odd = 0u64;
                    for s in 0..levels {
                        if hist[s] > st.flat_max[s] {
                            st.flat_max[s] = hist[s];
                            st.flat_arg[s] = member;
                        }
                        if s % 2 == 1 {
                            odd += hist[s];
                        }
                    }
                    st.odd_max = st.odd_max.max(odd);
                    cubes.histogram(&buf, &mut scratch_c, &mut hist_c);
                    for s in 0..levels {
                        st.cube_max[s] = st.cube_max[s].max(hist_c[s]);
                    }
                }
                let corrupt_here = corrupt_mask == Some(mask);
                let mirrored = (0..levels).all(|s| {
                    let lhs = hist_a[s] + u64::from(corrupt_here && s == 0);
                    lhs == hist_b[levels - 1 - s]
                });
                if !mirrored && st.mirror_violation.is_none() {
                    let s = (0..levels)
                        .find(|&s| {
                            hist_a[s] + u64::from(corrupt_here && s == 0)
                                != hist_b[levels - 1 - s]
                        })
                        .expect("a mismatch index exists");
                    st.mirror_violation = Some((mask, s));
                }
            }
            st
        })
        .collect();

    let mut merged = ScanStats {
        flat_max: vec![0; levels],
        flat_arg: vec![0; levels],
        cube_max: vec![0; levels],
        odd_max: 0,
        flat_total: flats.total(),
        cube_total: cubes.total(),
        mirror_violation: None,
        visited: 0,
    };
    for st in stats {
        for s in 0..levels {
            if st.flat_max[s] > merged.flat_max[s] {
                merged.flat_max[s] = st.flat_max[s];
                merged.flat_arg[s] = st.flat_arg[s];
            }
            merged.cube_max[s] = merged.cube_max[s].max(st.cube_max[s]);
        }
        merged.odd_max = merged.odd_max.max(st.odd_max);
        merged.visited += st.visited;
        if merged.mirror_violation.is_none() {
            merged.mirror_violation = st.mirror_violation;
        }
    }
    Ok(merged)
}

fn frac(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow_frac(num: u64, den: u64, exp: u32) -> BigRational {
    BigRational::new(BigInt::from(num).pow(exp), BigInt::from(den).pow(exp))
}

pub fn verify_all(n: usize, d: usize) -> Result<VerificationReport> {
    verify_with(n, d, &VerifyOptions::default())
}

pub fn verify_with(n: usize, d: usize, opts: &VerifyOptions) -> Result<VerificationReport> {
    check_search_dims(n, d, 0)?;
    if let Some(filter) = &opts.claims {
        for id in filter {
            if !CLAIM_IDS.contains(&id.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown claim id {id:?}; known ids: {}",
                    CLAIM_IDS.join(", ")
                )));
            }
        }
    }
    let requested =
        |id: &str| opts.claims.as_ref().map_or(true, |f| f.iter().any(|c| c == id));
    if opts.corrupt_self_test && !requested("complement_symmetry") {
        return Err(Error::invalid(
            "self-test corruption needs the complement_symmetry claim to be requested",
        ));
    }

    let needs_scan = ["half_level_bound", "even_level_bound", "odd_bound",
        "complement_symmetry", "cube_dominates_flat", "monotone_in_n", "deletion_ratio"]
        .iter()
        .any(|id| requested(id));
    let scan = if needs_scan && n <= 4 {
        let corrupt = opts.corrupt_self_test.then_some(1u64);
        Some(scan_all_sets(n, d, corrupt)?)
    } else {
        None
    };
    let params = format!("n={n} d={d}");
    let skip_large = |id: &str, claims: &mut Vec<ClaimOutcome>| {
        claims.push(ClaimOutcome {
            id: id.into(),
            params: params.clone(),
            status: ClaimStatus::Skipped,
            details: format!("exhaustive evidence is capped at n = 4, n = {n} given"),
        });
    };

    let mut claims = Vec::new();

    if requested("half_level_bound") {
        match (&scan, d >= 2) {
            (Some(st), true) => {
                let s = 1usize << (d - 1);
                let bound = upper_half_level(n, d)?;
                let got = frac(st.flat_max[s], st.flat_total);
                let ok = got <= bound;
                claims.push(ClaimOutcome {
                    id: "half_level_bound".into(),
                    params: format!("{params} s={s}"),
                    status: if ok { ClaimStatus::Verified } else { ClaimStatus::Violated },
                    details: if ok {
                        format!("max fraction {got} <= {bound} over {} sets", st.visited)
                    } else {
                        format!(
                            "fraction {got} > {bound}, witness mask {}",
                            mask_hex(n, st.flat_arg[s])
                        )
                    },
                });
            }
            (None, _) => skip_large("half_level_bound", &mut claims),
            (_, false) => claims.push(ClaimOutcome {
                id: "half_level_bound".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "needs d >= 2".into(),
            }),
        }
    }

    if requested("even_level_bound") {
        match (&scan, n >= d + 1) {
            (Some(st), true) => {
                let mut worst: Option<(usize, BigRational, BigRational)> = None;
                let mut violated = None;
                for s in (2..1usize << d).step_by(2) {
                    let k = nu2(s as u64)? as usize;
                    let bound = upper_flat_even(d, k)?;
                    let got = frac(st.flat_max[s], st.flat_total);
                    if got > bound {
                        violated = Some((s, got, bound, st.flat_arg[s]));
                        break;
                    }
                    let margin_new = &bound - &got;
                    if worst
                        .as_ref()
                        .map_or(true, |(_, g, b)| margin_new < b - g)
                    {
                        worst = Some((s, got, bound));
                    }
                }
                claims.push(match violated {
                    Some((s, got, bound, arg)) => ClaimOutcome {
                        id: "even_level_bound".into(),
                        params: format!("{params} s={s}"),
                        status: ClaimStatus::Violated,
                        details: format!(
                            "fraction {got} > {bound}, witness mask {}",
                            mask_hex(n, arg)
                        ),
                    },
                    None => match worst {
                        Some((s, got, bound)) => ClaimOutcome {
                            id: "even_level_bound".into(),
                            params: params.clone(),
                            status: ClaimStatus::Verified,
                            details: format!(
                                "all even levels hold; tightest at s={s}: {got} <= {bound}"
                            ),
                        },
                        None => ClaimOutcome {
                            id: "even_level_bound".into(),
                            params: params.clone(),
                            status: ClaimStatus::Skipped,
                            details: "no even level with k < d at this d".into(),
                        },
                    },
                });
            }
            (None, _) => skip_large("even_level_bound", &mut claims),
            (_, false) => claims.push(ClaimOutcome {
                id: "even_level_bound".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "the even-level bound needs n >= d + 1".into(),
            }),
        }
    }

    if requested("odd_bound") {
        match (&scan, d < n) {
            (Some(st), true) => {
                let bound = odd_upper(n, d)?;
                let got = frac(st.odd_max, st.flat_total);
                let ok = got <= bound;
                claims.push(ClaimOutcome {
                    id: "odd_bound".into(),
                    params: params.clone(),
                    status: if ok { ClaimStatus::Verified } else { ClaimStatus::Violated },
                    details: if ok {
                        format!("max odd-intersection fraction {got} <= {bound}")
                    } else {
                        format!("odd fraction {got} > {bound}")
                    },
                });
            }
            (None, _) => skip_large("odd_bound", &mut claims),
            (_, false) => claims.push(ClaimOutcome {
                id: "odd_bound".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "needs d < n".into(),
            }),
        }
    }

    if requested("construction_equality") {
        if d >= 2 && n <= 8 {
            let mut checked = 0usize;
            let mut failure = None;
            'outer: for k in 1..d {
                for j in [1usize, 3] {
                    if j > 1 << (d - k) {
                        continue;
                    }
                    let set = preimage_set(n, d, k, j, None, None)?;
                    let got = lambda_star(&set, d, j << k)?;
                    let want = c_n_dk(n, d, k)?;
                    checked += 1;
                    if got != want {
                        failure = Some((k, j, got, want));
                        break 'outer;
                    }
                }
            }
            claims.push(match failure {
                Some((k, j, got, want)) => ClaimOutcome {
                    id: "construction_equality".into(),
                    params: format!("{params} k={k} j={j}"),
                    status: ClaimStatus::Violated,
                    details: format!("preimage construction gives {got}, census says {want}"),
                },
                None => ClaimOutcome {
                    id: "construction_equality".into(),
                    params: params.clone(),
                    status: ClaimStatus::Verified,
                    details: format!("{checked} (k, j) cases equal the rank census exactly"),
                },
            });
        } else {
            claims.push(ClaimOutcome {
                id: "construction_equality".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: if d < 2 {
                    "needs d >= 2 for a nontrivial k".into()
                } else {
                    "construction census capped at n = 8".into()
                },
            });
        }
    }

    if requested("complement_symmetry") {
        match &scan {
            Some(st) => {
                let note = if opts.corrupt_self_test {
                    " (self-test corruption active)"
                } else {
                    ""
                };
                claims.push(match st.mirror_violation {
                    None => ClaimOutcome {
                        id: "complement_symmetry".into(),
                        params: params.clone(),
                        status: ClaimStatus::Verified,
                        details: format!(
                            "profiles mirror their complements on all {} sets{note}",
                            st.visited
                        ),
                    },
                    Some((mask, s)) => ClaimOutcome {
                        id: "complement_symmetry".into(),
                        params: format!("{params} s={s}"),
                        status: ClaimStatus::Violated,
                        details: format!(
                            "profile of mask {} does not mirror its complement at s={s}{note}",
                            mask_hex(n, mask)
                        ),
                    },
                });
            }
            None => skip_large("complement_symmetry", &mut claims),
        }
    }

    if requested("affine_invariance") {
        if n <= 8 {
            let mut rng = ChaCha12Rng::seed_from_u64(0xAFF1);
            let mut failure = None;
            for _ in 0..100 {
                let set = PointSet::random(n, &mut rng)?;
                let rows: Vec<u32> = loop {
                    let cand: Vec<u32> =
                        (0..n).map(|_| rng.gen_range(1..1u32 << n)).collect();
                    let m = BitMatrix::from_row_words(n, cand.clone())?;
                    if gf2::rref(&m).rank == n {
                        break cand;
                    }
                };
                let shift = rng.gen_range(0..1u32 << n);
                let image: Vec<u32> = set
                    .points()
                    .map(|x| {
                        let mut y = 0u32;
                        for (i, row) in rows.iter().enumerate() {
                            y |= ((row & x).count_ones() & 1) << i;
                        }
                        y ^ shift
                    })
                    .collect();
                let mapped = PointSet::from_points(n, &image)?;
                let before = flat_profile(&set, d)?;
                let after = flat_profile(&mapped, d)?;
                if before.counts() != after.counts() {
                    failure = Some(set.to_hex());
                    break;
                }
            }
            claims.push(match failure {
                None => ClaimOutcome {
                    id: "affine_invariance".into(),
                    params: params.clone(),
                    status: ClaimStatus::Verified,
                    details: "100 random invertible affine images leave the profile unchanged"
                        .into(),
                },
                Some(hex) => ClaimOutcome {
                    id: "affine_invariance".into(),
                    params: params.clone(),
                    status: ClaimStatus::Violated,
                    details: format!("profile changed under an affine image of mask 0x{hex}"),
                },
            });
        } else {
            claims.push(ClaimOutcome {
                id: "affine_invariance".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "profile comparisons capped at n = 8".into(),
            });
        }
    }

    if requested("cube_dominates_flat") {
        match &scan {
            Some(st) => {
                let mut failure = None;
                for s in 0..st.flat_max.len() {
                    let lhs = st.flat_max[s] as u128 * st.cube_total as u128;
                    let rhs = st.cube_max[s] as u128 * st.flat_total as u128;
                    if lhs > rhs {
                        failure = Some(s);
                        break;
                    }
                }
                claims.push(match failure {
                    None => ClaimOutcome {
                        id: "cube_dominates_flat".into(),
                        params: params.clone(),
                        status: ClaimStatus::Verified,
                        details: "per-level extremal cube fractions dominate the flat ones"
                            .into(),
                    },
                    Some(s) => ClaimOutcome {
                        id: "cube_dominates_flat".into(),
                        params: format!("{params} s={s}"),
                        status: ClaimStatus::Violated,
                        details: format!(
                            "flat maximum beats the cube maximum at s={s}, witness mask {}",
                            mask_hex(n, st.flat_arg[s])
                        ),
                    },
                });
            }
            None => skip_large("cube_dominates_flat", &mut claims),
        }
    }

    if requested("all_odd_subcubes") {
        if n <= 8 {
            let set = symmetric_polynomial_set(n, d)?;
            let profile = cube_profile(&set, d)?;
            let bad = profile
                .counts()
                .iter()
                .enumerate()
                .find(|(s, c)| s % 2 == 0 && !num_traits::Zero::is_zero(*c));
            claims.push(match bad {
                None => ClaimOutcome {
                    id: "all_odd_subcubes".into(),
                    params: params.clone(),
                    status: ClaimStatus::Verified,
                    details: "the symmetric-polynomial set meets every subcube oddly".into(),
                },
                Some((s, c)) => ClaimOutcome {
                    id: "all_odd_subcubes".into(),
                    params: format!("{params} s={s}"),
                    status: ClaimStatus::Violated,
                    details: format!("{c} subcubes meet the set in an even count {s}"),
                },
            });
        } else {
            claims.push(ClaimOutcome {
                id: "all_odd_subcubes".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "cube profiles capped at n = 8".into(),
            });
        }
    }

    if requested("monotone_in_n") {
        match (&scan, n >= 2 && n - 1 >= d) {
            (Some(st), true) => {
                let prev = scan_all_sets(n - 1, d, None)?;
                let mut failure = None;
                for s in 0..st.flat_max.len() {
                    let lhs = st.flat_max[s] as u128 * prev.flat_total as u128;
                    let rhs = prev.flat_max[s] as u128 * st.flat_total as u128;
                    if lhs > rhs {
                        failure = Some(s);
                        break;
                    }
                }
                claims.push(match failure {
                    None => ClaimOutcome {
                        id: "monotone_in_n".into(),
                        params: format!("n={}->{n} d={d}", n - 1),
                        status: ClaimStatus::Verified,
                        details: "per-level maxima do not increase with n".into(),
                    },
                    Some(s) => ClaimOutcome {
                        id: "monotone_in_n".into(),
                        params: format!("n={}->{n} d={d} s={s}", n - 1),
                        status: ClaimStatus::Violated,
                        details: format!(
                            "maximum grew with n at s={s}, witness mask {}",
                            mask_hex(n, st.flat_arg[s])
                        ),
                    },
                });
            }
            (None, _) => skip_large("monotone_in_n", &mut claims),
            (_, false) => claims.push(ClaimOutcome {
                id: "monotone_in_n".into(),
                params: params.clone(),
                status: ClaimStatus::Skipped,
                details: "needs n - 1 >= d for the smaller ambient".into(),
            }),
        }
    }

    if requested("deletion_ratio") {
        match &scan {
            Some(st) => {
                let size = 1usize << d;
                let mut failure = None;
                for s in 2..=size {
                    // deleting each point independently at rate 1/s turns an
                    // s-flat into an (s-1)-flat with chance (1-1/s)^{s-1}
                    let lhs = frac(st.flat_max[s - 1], st.flat_total);
                    let rhs = frac(st.flat_max[s], st.flat_total)
                        * pow_frac((s - 1) as u64, s as u64, (s - 1) as u32);
                    if lhs < rhs {
                        failure = Some(("delete", s));
                        break;
                    }
                }
                if failure.is_none() {
                    for s in 0..=size - 2 {
                        let gap = (size - s) as u64;
                        let lhs = frac(st.flat_max[s + 1], st.flat_total);
                        let rhs = frac(st.flat_max[s], st.flat_total)
                            * pow_frac(gap - 1, gap, (gap - 1) as u32);
                        if lhs < rhs {
                            failure = Some(("add", s));
                            break;
                        }
                    }
                }
                claims.push(match failure {
                    None => ClaimOutcome {
                        id: "deletion_ratio".into(),
                        params: params.clone(),
                        status: ClaimStatus::Verified,
                        details: "neighbor-level maxima respect the random delete/add ratios"
                            .into(),
                    },
                    Some((dir, s)) => ClaimOutcome {
                        id: "deletion_ratio".into(),
                        params: format!("{params} s={s}"),
                        status: ClaimStatus::Violated,
                        details: format!("{dir} transfer ratio fails at s={s}"),
                    },
                });
            }
            None => skip_large("deletion_ratio", &mut claims),
        }
    }

    Ok(VerificationReport { n, d, claims })
}
