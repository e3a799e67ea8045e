mod commands;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::CmdOutput;

#[derive(Parser)]
#[command(
    name = "flatstats",
    version,
    about = "Exact intersection statistics of affine flats and subcubes over the binary hypercube",
    after_help = "Exit codes: 0 ok, 1 usage or input error, 2 verification violation, 3 work cap exceeded.\n\
                  All JSON output is byte-deterministic for a fixed command line; wall time goes to stderr."
)]
struct Cli {
    /// Worker threads (default: all cores). Results never depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Also write the command's output to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Intersection profile of a set against every d-flat or d-subcube
    Profile {
        /// Ambient dimension of F_2^n
        #[arg(long)]
        n: usize,
        /// Flat (or subcube) dimension
        #[arg(long)]
        d: usize,
        /// Family to profile against: flat or cube
        #[arg(long, default_value = "flat")]
        family: String,
        /// Set as a hex bitmask over point indices, little-endian: bit i
        /// is point i, so 0x03 is {0, 1} and 0x9669 the even-parity set at n=4
        #[arg(long)]
        mask: Option<String>,
        /// Set as comma-separated points written x_n..x_1 (most-significant
        /// coordinate first). Worked example at n=3: "110" has x_3=1, x_2=1,
        /// x_1=0 and is the point 6 = 1*4 + 1*2 + 0*1; "001" is the point 1.
        #[arg(long)]
        points: Option<String>,
        /// Set as a construction spec, e.g. {"kind":"hyperplane","n":3,"parity":0}
        #[arg(long)]
        construct: Option<String>,
        /// Also write the per-level counts as CSV to this file
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Every applicable lower and upper bound for the extremal fraction at (d, s)
    Bounds {
        /// Flat dimension
        #[arg(long)]
        d: usize,
        /// Intersection size, 0..=2^d
        #[arg(long)]
        s: u64,
        /// Finite ambient dimension (default: the n->infinity limit)
        #[arg(long)]
        n: Option<usize>,
        /// Also refine the series upper bound to this many terms (even s only)
        #[arg(long)]
        terms: Option<u32>,
    },
    /// Run the theorem-verification battery; exit 2 if any claim is violated
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Comma-separated claim ids to run (default: all)
        #[arg(long, value_delimiter = ',')]
        claims: Option<Vec<String>>,
        /// Corrupt one profile on purpose to prove violations are caught
        #[arg(long)]
        self_test_corrupt: bool,
        /// Report file, written even on success
        #[arg(long, default_value = "verify-report.json")]
        report: PathBuf,
    },
    /// Maximize the fraction of d-flats meeting a set in exactly s points
    Search {
        /// exhaustive (n <= 4, or n = 5 with --allow-long) or anneal
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        /// Anneal steps per restart
        #[arg(long, default_value_t = 10_000)]
        iterations: u64,
        /// Anneal restarts (independent derived seeds)
        #[arg(long, default_value_t = 4)]
        restarts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Construction spec JSON to anneal from (default: a random set)
        #[arg(long)]
        initial: Option<String>,
        /// Permit the symmetric n = 5 exhaustion (2^31 sets after reduction)
        #[arg(long)]
        allow_long: bool,
        /// Checkpoint file for resumable exhaustive runs
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Masks scanned between checkpoint writes
        #[arg(long, default_value_t = 65_536)]
        chunk_size: u64,
        /// Witness sets listed in the report (the count is always exact)
        #[arg(long, default_value_t = 16)]
        witness_limit: usize,
    },
    /// Build a named point set and report it
    Construct {
        /// preimage, hyperplane, or sympoly (arbitrary specs go through --spec)
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Divisibility exponent for the preimage construction
        #[arg(long)]
        k: Option<usize>,
        /// Odd multiplier for the preimage construction
        #[arg(long)]
        j: Option<usize>,
        /// Hyperplane side: 0 keeps even-parity points, 1 odd
        #[arg(long)]
        parity: Option<u8>,
        /// Full construction spec as JSON (covers perturbed variants)
        #[arg(long)]
        spec: Option<String>,
    },
    /// CSV grid of best bounds: one row per s for a fixed d
    Table {
        #[arg(long)]
        d: usize,
        /// Finite ambient dimension (default: the n->infinity limit)
        #[arg(long)]
        n: Option<usize>,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<CmdOutput> {
    let out = cli.out;
    match cli.cmd {
        Cmd::Profile {
            n,
            d,
            family,
            mask,
            points,
            construct,
            csv,
        } => commands::cmd_profile(n, d, &family, mask, points, construct, csv, out),
        Cmd::Bounds { d, s, n, terms } => commands::cmd_bounds(d, s, n, terms, out),
        Cmd::Verify {
            n,
            d,
            claims,
            self_test_corrupt,
            report,
        } => commands::cmd_verify(n, d, claims, self_test_corrupt, report, out),
        Cmd::Search {
            mode,
            n,
            d,
            s,
            iterations,
            restarts,
            seed,
            initial,
            allow_long,
            checkpoint,
            chunk_size,
            witness_limit,
        } => commands::cmd_search(
            &mode,
            n,
            d,
            s,
            iterations,
            restarts,
            seed,
            initial,
            allow_long,
            checkpoint,
            chunk_size,
            witness_limit,
            out,
        ),
        Cmd::Construct {
            kind,
            n,
            d,
            k,
            j,
            parity,
            spec,
        } => commands::cmd_construct(kind, n, d, k, j, parity, spec, out),
        Cmd::Table { d, n } => commands::cmd_table(d, n, out),
    }
}

fn classify(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<flatstats::Error>() {
        Some(flatstats::Error::CapExceeded(_)) => 3,
        _ => 1,
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already set up; --threads ignored");
        }
    }
    let start = Instant::now();
    let outcome = dispatch(cli);
    let code = match outcome {
        Ok(output) => {
            print!("{}", output.text);
            output.exit
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            classify(&err)
        }
    };
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    code
}

fn main() {
    std::process::exit(run());
}
