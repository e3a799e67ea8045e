use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use flatstats::constructions::ConstructionSpec;
use flatstats::search::{
    exhaustive_chunk, exhaustive_finish, ScanChunk, SearchConfig, SearchMode, SearchResult,
    VerifyOptions,
};
use flatstats::stats::{cube_profile, flat_profile, IntersectionProfile, PointSet};

use crate::report::{Rat, Report};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct CmdOutput {
    /// Canonical output bytes, printed to stdout once.
    pub text: String,
    pub exit: i32,
}

fn ok(text: String) -> CmdOutput {
    CmdOutput { text, exit: 0 }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Parses one point written x_n…x_1 (most-significant coordinate first),
/// e.g. for n = 3 the string "110" is the point with x_3=1, x_2=1, x_1=0,
/// which is the integer 6.
fn parse_point_binary(word: &str, n: usize) -> anyhow::Result<u32> {
    if word.len() != n {
        bail!("point {word:?} needs exactly {n} binary digits (written x_{n}..x_1)");
    }
    let mut v = 0u32;
    for ch in word.chars() {
        v = match ch {
            '0' => v << 1,
            '1' => v << 1 | 1,
            _ => bail!("point {word:?} has a non-binary digit {ch:?}"),
        };
    }
    Ok(v)
}

fn point_binary(p: u32, n: usize) -> String {
    (0..n).rev().map(|i| if p >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn load_set(
    n: usize,
    mask: Option<&str>,
    points: Option<&str>,
    construct: Option<&str>,
) -> anyhow::Result<PointSet> {
    let given = mask.is_some() as u8 + points.is_some() as u8 + construct.is_some() as u8;
    if given != 1 {
        bail!("give the set as exactly one of --mask, --points, --construct");
    }
    if let Some(hex) = mask {
        return Ok(PointSet::from_hex(n, hex)?);
    }
    if let Some(list) = points {
        let pts = list
            .split(',')
            .map(|w| parse_point_binary(w.trim(), n))
            .collect::<anyhow::Result<Vec<u32>>>()?;
        return Ok(PointSet::from_points(n, &pts)?);
    }
    let spec: ConstructionSpec =
        serde_json::from_str(construct.expect("one source is set")).context("parsing --construct JSON")?;
    let set = spec.build()?;
    if set.dim() != n {
        bail!("--construct builds a set over n = {}, command says n = {n}", set.dim());
    }
    Ok(set)
}

#[derive(Serialize)]
struct ProfileParams {
    version: &'static str,
    n: usize,
    d: usize,
    family: &'static str,
    mask: Option<String>,
    points: Option<String>,
    construct: Option<String>,
}

#[derive(Serialize)]
struct ProfileResults {
    n: usize,
    d: usize,
    family: &'static str,
    set_size: u64,
    set_hex: String,
    total: String,
    counts: Vec<String>,
    fractions: Vec<Rat>,
    odd_fraction: Rat,
    mass: String,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_profile(
    n: usize,
    d: usize,
    family: &str,
    mask: Option<String>,
    points: Option<String>,
    construct: Option<String>,
    csv: Option<PathBuf>,
    out: Option<PathBuf>,
) -> anyhow::Result<CmdOutput> {
    let set = load_set(n, mask.as_deref(), points.as_deref(), construct.as_deref())?;
    let (profile, theorem): (IntersectionProfile, &str) = match family {
        "flat" => (
            flat_profile(&set, d)?,
            "intersection profile of a set against all affine d-flats",
        ),
        "cube" => (
            cube_profile(&set, d)?,
            "intersection profile of a set against all axis-aligned d-subcubes",
        ),
        other => bail!("family must be flat or cube, got {other:?}"),
    };
    let family_name = if family == "flat" { "flat" } else { "cube" };
    let fractions: Vec<Rat> = profile.fractions().iter().map(Rat::from_rational).collect();
    let results = ProfileResults {
        n,
        d,
        family: family_name,
        set_size: set.len(),
        set_hex: set.to_hex(),
        total: profile.total().to_string(),
        counts: profile.counts().iter().map(|c| c.to_string()).collect(),
        fractions,
        odd_fraction: Rat::from_rational(&profile.odd_fraction()),
        mass: profile.mass().to_string(),
    };
    if let Some(path) = csv {
        let mut text = String::from("s,count,num,den,decimal\n");
        for (s, count) in results.counts.iter().enumerate() {
            let f = &results.fractions[s];
            text.push_str(&format!("{s},{count},{},{},{}\n", f.num, f.den, f.decimal));
        }
        write_file(&path, &text)?;
    }
    let params = ProfileParams {
        version: VERSION,
        n,
        d,
        family: family_name,
        mask,
        points,
        construct,
    };
    let report = Report::new("profile", params, results, vec![theorem.to_string()]);
    let text = report.render()?;
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    Ok(ok(text))
}

#[derive(Serialize)]
struct BoundsParams {
    version: &'static str,
    d: usize,
    s: u64,
    n: Option<usize>,
    terms: Option<u32>,
}

#[derive(Serialize)]
struct EntryJson {
    name: &'static str,
    source: &'static str,
    value: Rat,
}

#[derive(Serialize)]
struct BootstrapJson {
    terms: u32,
    partial: Rat,
    certified: Rat,
}

#[derive(Serialize)]
struct BoundsResults {
    d: usize,
    s: u64,
    k: u32,
    j: u64,
    n: Option<usize>,
    best_lower: Rat,
    best_upper: Rat,
    lower: Vec<EntryJson>,
    upper: Vec<EntryJson>,
    bootstrap: Option<BootstrapJson>,
}

pub fn cmd_bounds(
    d: usize,
    s: u64,
    n: Option<usize>,
    terms: Option<u32>,
    out: Option<PathBuf>,
) -> anyhow::Result<CmdOutput> {
    let report = flatstats::bounds::summary(d, s, n)?;
    let bootstrap = match terms {
        None => None,
        Some(m) => {
            if s == 0 || s % 2 == 1 || s >= 1 << d {
                bail!("--terms refines the series bound, which needs an interior even s");
            }
            let b = flatstats::bounds::bootstrap_upper(d, report.k as usize, m)?;
            Some(BootstrapJson {
                terms: m,
                partial: Rat::from_rational(&b.partial),
                certified: Rat::from_rational(&b.certified),
            })
        }
    };
    let to_json = |e: &flatstats::bounds::BoundEntry| EntryJson {
        name: e.name,
        source: e.source,
        value: Rat::from_rational(&e.value),
    };
    let mut theorems: Vec<String> = Vec::new();
    for e in report.lower.iter().chain(&report.upper) {
        if !theorems.iter().any(|t| t == e.source) {
            theorems.push(e.source.to_string());
        }
    }
    let results = BoundsResults {
        d: report.d,
        s: report.s,
        k: report.k,
        j: report.j,
        n: report.n,
        best_lower: Rat::from_rational(&report.best_lower),
        best_upper: Rat::from_rational(&report.best_upper),
        lower: report.lower.iter().map(to_json).collect(),
        upper: report.upper.iter().map(to_json).collect(),
        bootstrap,
    };
    let params = BoundsParams {
        version: VERSION,
        d,
        s,
        n,
        terms,
    };
    let report = Report::new("bounds", params, results, theorems);
    let text = report.render()?;
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    Ok(ok(text))
}

fn claim_description(id: &str) -> &'static str {
    match id {
        "half_level_bound" => "half-level upper bound from hyperplane counting",
        "even_level_bound" => "blocking-set bound for intersection counts divisible by 2^k",
        "odd_bound" => "odd-intersection fraction cap just above one half",
        "construction_equality" => "preimage construction achieves the rank-census density",
        "complement_symmetry" => "profile of the complement mirrors the profile",
        "affine_invariance" => "profiles are invariant under invertible affine maps",
        "cube_dominates_flat" => "extremal subcube fractions dominate extremal flat fractions",
        "all_odd_subcubes" => "symmetric polynomial sets meet every subcube oddly",
        "monotone_in_n" => "extremal fractions are non-increasing in the ambient dimension",
        "deletion_ratio" => "random deletion and addition transfer between neighbor levels",
        _ => "unknown claim",
    }
}

#[derive(Serialize)]
struct VerifyParams {
    version: &'static str,
    n: usize,
    d: usize,
    claims: Option<Vec<String>>,
    self_test_corrupt: bool,
}

#[derive(Serialize)]
struct VerifyResults {
    n: usize,
    d: usize,
    all_ok: bool,
    claims: Vec<flatstats::search::ClaimOutcome>,
}

pub fn cmd_verify(
    n: usize,
    d: usize,
    claims: Option<Vec<String>>,
    self_test_corrupt: bool,
    report_path: PathBuf,
    out: Option<PathBuf>,
) -> anyhow::Result<CmdOutput> {
    let opts = VerifyOptions {
        claims: claims.clone(),
        corrupt_self_test: self_test_corrupt,
    };
    let verification = flatstats::search::verify_with(n, d, &opts)?;
    let all_ok = verification.all_ok();
    let theorems = verification
        .claims
        .iter()
        .map(|c| claim_description(&c.id).to_string())
        .collect();
    let failures: Vec<String> = verification
        .violated()
        .iter()
        .map(|c| format!("violated {} ({}): {}", c.id, c.params, c.details))
        .collect();
    let results = VerifyResults {
        n: verification.n,
        d: verification.d,
        all_ok,
        claims: verification.claims,
    };
    let params = VerifyParams {
        version: VERSION,
        n,
        d,
        claims,
        self_test_corrupt,
    };
    let report = Report::new("verify", params, results, theorems);
    let text = report.render()?;
    write_file(&report_path, &text)?;
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    for line in &failures {
        eprintln!("{line}");
    }
    Ok(CmdOutput {
        text,
        exit: if all_ok { 0 } else { 2 },
    })
}

#[derive(Serialize)]
struct SearchParams {
    version: &'static str,
    mode: &'static str,
    n: usize,
    d: usize,
    s: usize,
    iterations: u64,
    restarts: u64,
    seed: u64,
    initial: Option<String>,
    allow_long: bool,
    witness_limit: usize,
}

#[derive(Serialize)]
struct TracePoint {
    at: u64,
    value: Rat,
}

#[derive(Serialize)]
struct SearchResults {
    value: Rat,
    witness_count: u64,
    visited: u64,
    symmetry_reduced: bool,
    witnesses_shown: usize,
    witnesses: Vec<String>,
    trace: Vec<TracePoint>,
}

/// Durable state of a chunked exhaustive run. `next` is the first mask index
/// not yet scanned; a rerun with the same parameters resumes there.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    token: String,
    version: u32,
    n: usize,
    d: usize,
    s: usize,
    symmetric: bool,
    next: u64,
    chunks: Vec<ScanChunk>,
}

const CHECKPOINT_TOKEN: &str = "flatstats-exhaustive-scan";
const CHECKPOINT_VERSION: u32 = 1;

fn load_checkpoint(
    path: &Path,
    n: usize,
    d: usize,
    s: usize,
    symmetric: bool,
) -> anyhow::Result<Checkpoint> {
    if !path.exists() {
        return Ok(Checkpoint {
            token: CHECKPOINT_TOKEN.to_string(),
            version: CHECKPOINT_VERSION,
            n,
            d,
            s,
            symmetric,
            next: 0,
            chunks: Vec::new(),
        });
    }
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cp: Checkpoint = serde_json::from_str(&raw).context("parsing checkpoint file")?;
    if cp.token != CHECKPOINT_TOKEN || cp.version != CHECKPOINT_VERSION {
        bail!("checkpoint file {} is not a version-{CHECKPOINT_VERSION} scan token", path.display());
    }
    if (cp.n, cp.d, cp.s, cp.symmetric) != (n, d, s, symmetric) {
        bail!(
            "checkpoint was taken for n={} d={} s={} symmetric={}, run asks n={n} d={d} s={s} symmetric={symmetric}",
            cp.n, cp.d, cp.s, cp.symmetric
        );
    }
    Ok(cp)
}

fn store_checkpoint(path: &Path, cp: &Checkpoint) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string(cp)?)
        .with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_search(
    mode: &str,
    n: usize,
    d: usize,
    s: usize,
    iterations: u64,
    restarts: u64,
    seed: u64,
    initial: Option<String>,
    allow_long: bool,
    checkpoint: Option<PathBuf>,
    chunk_size: u64,
    witness_limit: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<CmdOutput> {
    let initial_spec: Option<ConstructionSpec> = initial
        .as_deref()
        .map(|raw| serde_json::from_str(raw).context("parsing --initial JSON"))
        .transpose()?;
    let (mode_name, search_mode) = match mode {
        "exhaustive" => ("exhaustive", SearchMode::Exhaustive),
        "anneal" => ("anneal", SearchMode::Anneal),
        other => bail!("mode must be exhaustive or anneal, got {other:?}"),
    };
    let cfg = SearchConfig {
        n,
        d,
        s,
        mode: search_mode,
        iterations,
        restarts,
        seed,
        initial: initial_spec,
        temp_start: 2.0,
        temp_ratio: 0.999,
        allow_long,
    };

    let result: SearchResult = match (&checkpoint, search_mode) {
        (Some(path), SearchMode::Exhaustive) => {
            if chunk_size == 0 {
                bail!("--chunk-size must be at least 1");
            }
            let symmetric = n == 5;
            if n == 5 && !allow_long {
                bail!("exhaustion at n = 5 is long-running; pass --allow-long");
            }
            let mut cp = load_checkpoint(path, n, d, s, symmetric)?;
            let total = 1u64 << (1usize << n);
            while cp.next < total {
                let hi = cp.next.saturating_add(chunk_size).min(total);
                let chunk = exhaustive_chunk(n, d, s, cp.next, hi, symmetric)?;
                cp.next = hi;
                cp.chunks.push(chunk);
                store_checkpoint(path, &cp)?;
            }
            exhaustive_finish(n, d, s, symmetric, &cp.chunks)?
        }
        (Some(_), SearchMode::Anneal) => {
            bail!("--checkpoint applies to exhaustive mode only")
        }
        (None, _) => cfg.run()?,
    };

    let shown = result.witnesses.len().min(witness_limit);
    let results = SearchResults {
        value: Rat::from_rational(&result.value),
        witness_count: result.witness_count,
        visited: result.visited,
        symmetry_reduced: result.symmetry_reduced,
        witnesses_shown: shown,
        witnesses: result.witnesses[..shown].iter().map(|w| w.to_hex()).collect(),
        trace: result
            .trace
            .iter()
            .map(|(at, v)| TracePoint {
                at: *at,
                value: Rat::from_rational(v),
            })
            .collect(),
    };
    let theorem = match search_mode {
        SearchMode::Exhaustive => {
            "exact extremal fraction over every subset, by full mask enumeration"
        }
        SearchMode::Anneal => "simulated annealing on the exact flat-count objective",
    };
    let params = SearchParams {
        version: VERSION,
        mode: mode_name,
        n,
        d,
        s,
        iterations,
        restarts,
        seed,
        initial,
        allow_long,
        witness_limit,
    };
    let report = Report::new("search", params, results, vec![theorem.to_string()]);
    let text = report.render()?;
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    Ok(ok(text))
}

#[derive(Serialize)]
struct ConstructParams {
    version: &'static str,
    kind: Option<String>,
    n: Option<usize>,
    d: Option<usize>,
    k: Option<usize>,
    j: Option<usize>,
    parity: Option<u8>,
    spec: Option<String>,
}

#[derive(Serialize)]
struct AllOddCheck {
    d: usize,
    verified: bool,
}

#[derive(Serialize)]
struct ConstructResults {
    spec: ConstructionSpec,
    n: usize,
    size: u64,
    hex: String,
    points: Vec<String>,
    all_odd: Option<AllOddCheck>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_construct(
    kind: Option<String>,
    n: Option<usize>,
    d: Option<usize>,
    k: Option<usize>,
    j: Option<usize>,
    parity: Option<u8>,
    spec_raw: Option<String>,
    out: Option<PathBuf>,
) -> anyhow::Result<CmdOutput> {
    let need = |v: Option<usize>, name: &str, kind: &str| {
        v.ok_or_else(|| anyhow::anyhow!("--kind {kind} needs --{name}"))
    };
    let spec: ConstructionSpec = match (&kind, &spec_raw) {
        (Some(_), Some(_)) | (None, None) => {
            bail!("give exactly one of --kind or --spec")
        }
        (None, Some(raw)) => serde_json::from_str(raw).context("parsing --spec JSON")?,
        (Some(kind), None) => match kind.as_str() {
            "preimage" => ConstructionSpec::Preimage {
                n: need(n, "n", kind)?,
                d: need(d, "d", kind)?,
                k: need(k, "k", kind)?,
                j: need(j, "j", kind)?,
            },
            "hyperplane" => ConstructionSpec::Hyperplane {
                n: need(n, "n", kind)?,
                parity: parity.unwrap_or(0),
            },
            "sympoly" => ConstructionSpec::SymmetricPoly {
                n: need(n, "n", kind)?,
                d: need(d, "d", kind)?,
            },
            other => bail!("kind must be preimage, hyperplane, or sympoly, got {other:?} (arbitrary specs go through --spec)"),
        },
    };
    let set = spec.build()?;
    let set_n = set.dim();
    let (all_odd, theorem) = match &spec {
        ConstructionSpec::SymmetricPoly { d, .. } => {
            let profile = cube_profile(&set, *d)?;
            let verified = profile
                .counts()
                .iter()
                .enumerate()
                .all(|(s, c)| s % 2 == 1 || num_traits::Zero::is_zero(c));
            (
                Some(AllOddCheck { d: *d, verified }),
                "symmetric polynomial sets meet every subcube oddly",
            )
        }
        ConstructionSpec::Preimage { .. } => (
            None,
            "preimage construction meeting flats in multiples of 2^k",
        ),
        ConstructionSpec::Hyperplane { .. } => {
            (None, "parity hyperplane set attaining the half-level bound")
        }
        ConstructionSpec::Perturbed { .. } => {
            (None, "seeded random perturbation of a base construction")
        }
    };
    let violated = all_odd.as_ref().is_some_and(|c| !c.verified);
    let results = ConstructResults {
        spec,
        n: set_n,
        size: set.len(),
        hex: set.to_hex(),
        points: set.points().map(|p| point_binary(p, set_n)).collect(),
        all_odd,
    };
    let params = ConstructParams {
        version: VERSION,
        kind,
        n,
        d,
        k,
        j,
        parity,
        spec: spec_raw,
    };
    let report = Report::new("construct", params, results, vec![theorem.to_string()]);
    let text = report.render()?;
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    Ok(CmdOutput {
        text,
        exit: if violated { 2 } else { 0 },
    })
}

/// CSV grid of the best bounds for one d: a row per s in 1..2^d.
pub fn cmd_table(d: usize, n: Option<usize>, out: Option<PathBuf>) -> anyhow::Result<CmdOutput> {
    if d > 20 {
        bail!("table is meant for plotting; d = {d} would have 2^{d} rows");
    }
    let mut text = String::from("d,s,k,best_lower,best_upper\n");
    for s in 1..1u64 << d {
        let report = flatstats::bounds::summary(d, s, n)?;
        // Decimal cells: the series bounds are exact rationals with
        // hundred-digit denominators, unreadable in a plotting grid.
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            report.d,
            report.s,
            report.k,
            crate::report::decimal_fixed(&report.best_lower),
            crate::report::decimal_fixed(&report.best_upper),
        ));
    }
    if let Some(path) = out {
        write_file(&path, &text)?;
    }
    Ok(ok(text))
}
