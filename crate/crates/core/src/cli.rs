//! Command-line pipelines: `refmine mine` and `refmine eval`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::corpus::{read_posts, read_seeds, read_stoplist, Corpus, InputFormat, Tokenizer};
use crate::error::{Error, Result};
use crate::extract::{evaluate, read_gold, EvalReport};
use crate::forest::EntityForest;
use crate::miner::{ila_mine, mine_seeded, mine_unseeded, IlaConfig, MinerConfig, SeedSet, DEFAULT_BATCH_STEP};
use crate::refset::{column_homogeneity, Homogeneity, ReferenceSet};
use crate::subsumption::{SubsumptionConfig, DEFAULT_MIN_COOCCUR, DEFAULT_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Trees rooted on seed values only.
    #[default]
    Seed,
    /// Trees rooted on any qualifying term.
    #[value(name = "noseed")]
    Noseed,
    /// Batch-wise unseeded mining with level locking.
    Lock,
}

/// Effective settings of a `mine` run. This is what `config.json` holds;
/// the output directory and thread count are not part of it because they
/// never change results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub posts: PathBuf,
    pub format: InputFormat,
    pub seeds: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub column_names: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub gold_refset: Option<PathBuf>,
    pub threshold: f64,
    pub min_cooccur: usize,
    pub two_sided_union: bool,
    pub general_tokens: bool,
    pub batch_start: usize,
    pub batch_step: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Seed,
            posts: PathBuf::new(),
            format: InputFormat::Auto,
            seeds: None,
            stoplist: None,
            column_names: None,
            gold: None,
            gold_refset: None,
            threshold: DEFAULT_THRESHOLD,
            min_cooccur: DEFAULT_MIN_COOCCUR,
            two_sided_union: true,
            general_tokens: true,
            batch_start: DEFAULT_BATCH_STEP,
            batch_step: DEFAULT_BATCH_STEP,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            threads: None,
        }
    }
}

const DEFAULT_OUT_DIR: &str = "refmine-out";

impl RunConfig {
    pub fn miner(&self) -> MinerConfig {
        MinerConfig {
            subsumption: SubsumptionConfig {
                threshold: self.threshold,
                min_cooccur: self.min_cooccur,
                two_sided_union: self.two_sided_union,
            },
            general_tokens: self.general_tokens,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.posts.as_os_str().is_empty() {
            return Err(Error::InvalidConfig("--posts is required".into()));
        }
        match self.mode {
            Mode::Seed if self.seeds.is_none() => {
                return Err(Error::InvalidConfig("seed mode requires --seeds".into()));
            }
            Mode::Noseed | Mode::Lock if self.seeds.is_some() => {
                return Err(Error::InvalidConfig("--seeds is only used in seed mode".into()));
            }
            _ => {}
        }
        if self.batch_start < 1 || self.batch_step < 1 {
            return Err(Error::InvalidConfig(
                "--batch-start and --batch-step must be at least 1".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        self.miner().subsumption.validate()
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MineSummary {
    pub mode: Mode,
    pub posts: usize,
    pub posts_consumed: usize,
    pub tuples: usize,
    pub columns: usize,
    /// Always true outside lock mode.
    pub converged: bool,
    pub warnings: Vec<String>,
    pub report: Option<EvalReport>,
    pub homogeneity: Option<Homogeneity>,
}

impl MineSummary {
    pub fn render(&self) -> String {
        let mut s = format!(
            "mode: {}\nposts: {}\nposts consumed: {}\ntuples: {}\ncolumns: {}\n",
            match self.mode {
                Mode::Seed => "seed",
                Mode::Noseed => "noseed",
                Mode::Lock => "lock",
            },
            self.posts,
            self.posts_consumed,
            self.tuples,
            self.columns
        );
        if self.mode == Mode::Lock {
            s.push_str(&format!("converged: {}\n", self.converged));
        }
        if let Some(h) = &self.homogeneity {
            s.push_str(&format!("misplaced: {:.4}\n", h.fraction()));
        }
        if let Some(r) = &self.report {
            s.push('\n');
            s.push_str(&r.summary());
        }
        s
    }
}

fn write_file(dir: &Path, name: &str, content: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Error::io(path, e))
}

fn read_list(path: &Path) -> Result<Vec<String>> {
    read_seeds(path)
}

fn homogeneity_csv(h: &Homogeneity) -> String {
    format!(
        "matched,misplaced,fraction\n{},{},{:.4}\n",
        h.matched,
        h.misplaced,
        h.fraction()
    )
}

/// Writes the reports for `refset` against the optional gold files.
fn write_evaluation(
    refset: &ReferenceSet,
    gold: Option<&Path>,
    gold_refset: Option<&Path>,
    out_dir: &Path,
) -> Result<(Option<EvalReport>, Option<Homogeneity>)> {
    let report = match gold {
        Some(path) => {
            let gold = read_gold(path)?;
            let report = evaluate(&gold, refset)?;
            write_file(out_dir, "eval.csv", report.to_csv_string())?;
            write_file(out_dir, "eval.txt", report.summary())?;
            Some(report)
        }
        None => None,
    };
    let homogeneity = match gold_refset {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let trusted = ReferenceSet::read_csv(file)?;
            let h = column_homogeneity(refset, &trusted)?;
            write_file(out_dir, "homogeneity.csv", homogeneity_csv(&h))?;
            Some(h)
        }
        None => None,
    };
    Ok((report, homogeneity))
}

fn write_refset(refset: &ReferenceSet, forest: &EntityForest, out_dir: &Path) -> Result<()> {
    write_file(out_dir, "refset.csv", refset.to_csv_string())?;
    write_file(out_dir, "refset.jsonl", refset.to_jsonl_string())?;
    write_file(out_dir, "forest.txt", forest.render())
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(job),
    }
}

/// Runs one mining pipeline and writes its files into `cfg.out_dir`.
pub fn run_mine(cfg: &RunConfig) -> Result<MineSummary> {
    cfg.validate()?;
    with_threads(cfg.threads, || mine_inner(cfg))
}

fn mine_inner(cfg: &RunConfig) -> Result<MineSummary> {
    let tokenizer = match &cfg.stoplist {
        Some(p) => Tokenizer::with_stopwords(read_stoplist(p)?),
        None => Tokenizer::new(),
    };
    let corpus: Corpus = read_posts(&cfg.posts, cfg.format, &tokenizer)?;
    let seeds = match (&cfg.mode, &cfg.seeds) {
        (Mode::Seed, Some(p)) => Some(SeedSet::new(read_seeds(p)?)?),
        _ => None,
    };
    let column_names = match &cfg.column_names {
        Some(p) => read_list(p)?,
        None => Vec::new(),
    };
    if corpus.is_empty() && cfg.mode != Mode::Lock {
        return Err(Error::EmptyCorpus(cfg.posts.clone()));
    }
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let miner = cfg.miner();
    let (mut refset, forest, consumed, converged, warnings) = match cfg.mode {
        Mode::Seed => {
            let out = mine_seeded(&corpus, seeds.as_ref().expect("validated"), &miner)?;
            (out.reference_set, out.forest, corpus.len(), true, out.warnings)
        }
        Mode::Noseed => {
            let out = mine_unseeded(&corpus, &miner)?;
            (out.reference_set, out.forest, corpus.len(), true, out.warnings)
        }
        Mode::Lock => {
            let ila = IlaConfig {
                batch_start: cfg.batch_start,
                batch_step: cfg.batch_step,
                miner,
            };
            let out = ila_mine(&corpus, &ila)?;
            write_file(&cfg.out_dir, "lock_trace.jsonl", out.trace_jsonl())?;
            (
                out.reference_set,
                out.forest,
                out.posts_consumed,
                out.converged,
                Vec::new(),
            )
        }
    };
    refset.relabel(&column_names);

    write_refset(&refset, &forest, &cfg.out_dir)?;
    write_file(&cfg.out_dir, "config.json", cfg.to_json())?;
    let (report, homogeneity) =
        write_evaluation(&refset, cfg.gold.as_deref(), cfg.gold_refset.as_deref(), &cfg.out_dir)?;

    Ok(MineSummary {
        mode: cfg.mode,
        posts: corpus.len(),
        posts_consumed: consumed,
        tuples: refset.len(),
        columns: refset.width(),
        converged,
        warnings,
        report,
        homogeneity,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub gold: PathBuf,
    pub refset: PathBuf,
    pub gold_refset: Option<PathBuf>,
    pub column_names: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

/// Scores an existing reference-set CSV and writes the reports.
pub fn run_eval(cfg: &EvalConfig) -> Result<(EvalReport, Option<Homogeneity>)> {
    with_threads(cfg.threads, || {
        let file = fs::File::open(&cfg.refset).map_err(|e| Error::io(&cfg.refset, e))?;
        let mut refset = ReferenceSet::read_csv(file)?;
        if let Some(p) = &cfg.column_names {
            refset.relabel(&read_list(p)?);
        }
        fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
        let (report, h) = write_evaluation(&refset, Some(&cfg.gold), cfg.gold_refset.as_deref(), &cfg.out_dir)?;
        Ok((report.expect("gold given"), h))
    })
}

#[derive(Debug, Parser)]
#[command(name = "refmine", version, about = "Mine reference sets from short text posts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a reference set from a post file.
    Mine(MineArgs),
    /// Score a reference set with the baseline extractor.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Start from a saved config.json; other flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Posts, one per line, or JSON Lines with a "text" field.
    #[arg(long)]
    posts: Option<PathBuf>,
    /// auto, text or jsonl.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Seed values, one per line.
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Tokens to drop before mining, one per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Output column names, one per line.
    #[arg(long)]
    column_names: Option<PathBuf>,
    /// Gold JSON Lines to evaluate the mined set against.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Trusted reference-set CSV for the column homogeneity check.
    #[arg(long)]
    gold_refset: Option<PathBuf>,
    /// Subsumption threshold [default: 0.75].
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum posts shared by a pair [default: 1].
    #[arg(long)]
    min_cooccur: Option<usize>,
    /// Posts in the first batch in lock mode [default: 200].
    #[arg(long)]
    batch_start: Option<usize>,
    /// Posts added per lock-mode iteration [default: 200].
    #[arg(long)]
    batch_step: Option<usize>,
    /// Skip the general-token rounds.
    #[arg(long)]
    single_pass: bool,
    #[arg(long, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Reference-set CSV to score.
    #[arg(long)]
    refset: PathBuf,
    #[arg(long)]
    gold_refset: Option<PathBuf>,
    #[arg(long)]
    column_names: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

impl MineArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    cfg.$field = self.$field;
                }
            )*};
        }
        set!(mode, posts, format, threshold, min_cooccur, batch_start, batch_step);
        set_opt!(seeds, stoplist, column_names, gold, gold_refset);
        if self.single_pass {
            cfg.general_tokens = false;
        }
        cfg.out_dir = self.out_dir;
        cfg.threads = self.threads;
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mine(args) => {
            let cfg = args.into_config()?;
            let summary = run_mine(&cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", summary.render());
            Ok(if summary.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Eval(args) => {
            let cfg = EvalConfig {
                gold: args.gold,
                refset: args.refset,
                gold_refset: args.gold_refset,
                column_names: args.column_names,
                out_dir: args.out_dir,
                threads: args.threads,
            };
            let (report, h) = run_eval(&cfg)?;
            if let Some(h) = h {
                println!("misplaced: {:.4}", h.fraction());
            }
            print!("{}", report.summary());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
/// Errors are reported on stderr as one line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!(
                "{}",
                if first.starts_with("error:") {
                    first.to_owned()
                } else {
                    format!("error: {first}")
                }
            );
            return EXIT_ERROR;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            EXIT_ERROR
        }
    }
}
