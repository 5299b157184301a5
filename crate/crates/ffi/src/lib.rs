//! C interface to refmine.
//!
//! Corpora and reference sets are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! `RefmineStatus`; on failure `refmine_last_error` describes the problem
//! for the calling thread. Strings returned by the library are released
//! with `refmine_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use refmine::corpus::{read_posts, InputFormat, Tokenizer};
use refmine::miner::{ila_mine, mine_seeded, mine_unseeded, IlaConfig, MinerConfig, SeedSet};
use refmine::refset::column_homogeneity;
use refmine::{Corpus, Error, Post, ReferenceSet, SubsumptionConfig};

/// Result of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefmineStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    EmptySeedSet = 4,
    OutOfRange = 5,
    Io = 6,
    Parse = 7,
    Internal = 8,
}

/// Mining settings. Start from `refmine_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RefmineConfig {
    pub threshold: f64,
    pub min_cooccur: usize,
    pub two_sided_union: bool,
    pub general_tokens: bool,
    pub batch_start: usize,
    pub batch_step: usize,
}

impl From<&RefmineConfig> for MinerConfig {
    fn from(c: &RefmineConfig) -> Self {
        MinerConfig {
            subsumption: SubsumptionConfig {
                threshold: c.threshold,
                min_cooccur: c.min_cooccur,
                two_sided_union: c.two_sided_union,
            },
            general_tokens: c.general_tokens,
        }
    }
}

/// Ordered post collection.
pub struct RefmineCorpus {
    inner: Corpus,
}

/// Mined or loaded reference set.
pub struct RefmineRefset {
    inner: ReferenceSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> RefmineStatus {
    match err {
        Error::EmptySeedSet => RefmineStatus::EmptySeedSet,
        Error::Io { .. } => RefmineStatus::Io,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) | Error::MalformedGold { .. } => RefmineStatus::Parse,
        _ => RefmineStatus::InvalidArgument,
    }
}

struct Failure(RefmineStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: RefmineStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `body`, records any error or panic, and returns its status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RefmineStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            RefmineStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RefmineStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(RefmineStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(RefmineStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(RefmineStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RefmineStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c_string(s: &str) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(RefmineStatus::Internal, "string contains NUL".to_owned()))
}

unsafe fn config_or_default(cfg: *const RefmineConfig) -> RefmineConfig {
    cfg.as_ref().copied().unwrap_or_else(|| refmine_config_default())
}

fn new_refset(out: &mut *mut RefmineRefset, inner: ReferenceSet) {
    *out = Box::into_raw(Box::new(RefmineRefset { inner }));
}

/// Default settings: threshold 0.75, one shared post, two-sided union
/// check, general tokens on, batches of 200.
#[no_mangle]
pub extern "C" fn refmine_config_default() -> RefmineConfig {
    let m = MinerConfig::default();
    let i = IlaConfig::default();
    RefmineConfig {
        threshold: m.subsumption.threshold,
        min_cooccur: m.subsumption.min_cooccur,
        two_sided_union: m.subsumption.two_sided_union,
        general_tokens: m.general_tokens,
        batch_start: i.batch_start,
        batch_step: i.batch_step,
    }
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn refmine_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn refmine_corpus_new() -> *mut RefmineCorpus {
    Box::into_raw(Box::new(RefmineCorpus {
        inner: Corpus::default(),
    }))
}

/// Appends a post. Its id is its 1-based position.
///
/// # Safety
/// `corpus` must come from this library; `text` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn refmine_corpus_add_post(corpus: *mut RefmineCorpus, text: *const c_char) -> RefmineStatus {
    guard(|| {
        let corpus = out_ptr(corpus, "corpus")?;
        let text = c_str(text, "text")?;
        let id = (corpus.inner.len() + 1).to_string();
        corpus.inner.push(Post::new(id, text));
        Ok(())
    })
}

/// Loads posts from a text file (one per line) or a `.jsonl` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn refmine_corpus_from_file(path: *const c_char, out: *mut *mut RefmineCorpus) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let path = c_str(path, "path")?;
        let inner = read_posts(Path::new(path), InputFormat::Auto, &Tokenizer::new())?;
        *out = Box::into_raw(Box::new(RefmineCorpus { inner }));
        Ok(())
    })
}

/// Number of posts; 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn refmine_corpus_len(corpus: *const RefmineCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `corpus` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn refmine_corpus_free(corpus: *mut RefmineCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Mines trees rooted on `seeds` (`n_seeds` strings). A null `cfg` uses defaults.
///
/// # Safety
/// Pointers must be valid; `seeds` must hold `n_seeds` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn refmine_mine_seeded(
    corpus: *const RefmineCorpus,
    seeds: *const *const c_char,
    n_seeds: usize,
    cfg: *const RefmineConfig,
    out: *mut *mut RefmineRefset,
) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let corpus = borrow(corpus, "corpus")?;
        if n_seeds > 0 && seeds.is_null() {
            return fail(RefmineStatus::NullPointer, "seeds is null");
        }
        let raw: Vec<&str> = (0..n_seeds)
            .map(|i| c_str(*seeds.add(i), "seed"))
            .collect::<Result<_, _>>()?;
        let seeds = SeedSet::new(raw)?;
        let cfg = config_or_default(cfg);
        let mined = mine_seeded(&corpus.inner, &seeds, &MinerConfig::from(&cfg))?;
        new_refset(out, mined.reference_set);
        Ok(())
    })
}

/// Mines trees rooted on any qualifying term.
///
/// # Safety
/// `corpus` and `out` must be valid; `cfg` may be null.
#[no_mangle]
pub unsafe extern "C" fn refmine_mine_unseeded(
    corpus: *const RefmineCorpus,
    cfg: *const RefmineConfig,
    out: *mut *mut RefmineRefset,
) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let corpus = borrow(corpus, "corpus")?;
        let cfg = config_or_default(cfg);
        let mined = mine_unseeded(&corpus.inner, &MinerConfig::from(&cfg))?;
        new_refset(out, mined.reference_set);
        Ok(())
    })
}

/// Batch-wise mining with level locking over the corpus in order.
/// `converged` (may be null) reports whether every level locked.
///
/// # Safety
/// `corpus` and `out` must be valid; `cfg` and `converged` may be null.
#[no_mangle]
pub unsafe extern "C" fn refmine_mine_locked(
    corpus: *const RefmineCorpus,
    cfg: *const RefmineConfig,
    out: *mut *mut RefmineRefset,
    converged: *mut bool,
) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let corpus = borrow(corpus, "corpus")?;
        let cfg = config_or_default(cfg);
        let ila = IlaConfig {
            batch_start: cfg.batch_start,
            batch_step: cfg.batch_step,
            miner: MinerConfig::from(&cfg),
        };
        let mined = ila_mine(&corpus.inner, &ila)?;
        if let Some(c) = converged.as_mut() {
            *c = mined.converged;
        }
        new_refset(out, mined.reference_set);
        Ok(())
    })
}

/// Parses a reference-set CSV with a header row.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_from_csv(csv: *const c_char, out: *mut *mut RefmineRefset) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = c_str(csv, "csv")?;
        new_refset(out, ReferenceSet::read_csv(text.as_bytes())?);
        Ok(())
    })
}

/// Number of tuples; 0 for a null handle.
///
/// # Safety
/// `refset` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_len(refset: *const RefmineRefset) -> usize {
    refset.as_ref().map_or(0, |r| r.inner.len())
}

/// Number of columns; 0 for a null handle.
///
/// # Safety
/// `refset` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_width(refset: *const RefmineRefset) -> usize {
    refset.as_ref().map_or(0, |r| r.inner.width())
}

/// Value at `row`, `column`. A missing value sets `*out` to NULL.
///
/// # Safety
/// `refset` and `out` must be valid. Free the result with `refmine_string_free`.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_value(
    refset: *const RefmineRefset,
    row: usize,
    column: usize,
    out: *mut *mut c_char,
) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let rs = &borrow(refset, "refset")?.inner;
        let tuple = rs
            .tuples()
            .get(row)
            .ok_or_else(|| Failure(RefmineStatus::OutOfRange, format!("row {row} of {}", rs.len())))?;
        let value = tuple
            .get(column)
            .ok_or_else(|| Failure(RefmineStatus::OutOfRange, format!("column {column} of {}", rs.width())))?;
        if let Some(v) = value {
            *out = to_c_string(v.as_str())?;
        }
        Ok(())
    })
}

/// Serializes to CSV with an `attributeN` header.
///
/// # Safety
/// `refset` and `out` must be valid. Free the result with `refmine_string_free`.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_to_csv(refset: *const RefmineRefset, out: *mut *mut c_char) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let rs = borrow(refset, "refset")?;
        *out = to_c_string(&rs.inner.to_csv_string())?;
        Ok(())
    })
}

/// Fraction of mined values placed in a different column than in `gold`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn refmine_column_homogeneity(
    mined: *const RefmineRefset,
    gold: *const RefmineRefset,
    out_fraction: *mut f64,
) -> RefmineStatus {
    guard(|| {
        let out = out_ptr(out_fraction, "out_fraction")?;
        let h = column_homogeneity(&borrow(mined, "mined")?.inner, &borrow(gold, "gold")?.inner)?;
        *out = h.fraction();
        Ok(())
    })
}

/// # Safety
/// `refset` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn refmine_refset_free(refset: *mut RefmineRefset) {
    if !refset.is_null() {
        drop(Box::from_raw(refset));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn refmine_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
