//! C interface.
//!
//! Queries, instances and indexes are opaque handles released with their
//! `_free` function. Every fallible call returns a [`CqdaStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`cqda_last_error`]. Strings returned through `out` parameters are owned
//! by the caller and released with [`cqda_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cqda::{analyze, parse_order, parse_query, select_lex, select_sum, DirectIndex, Error, Instance, OrderKind, Query};
use libc::c_char;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqdaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Query or order text is malformed or inconsistent.
    InvalidQuery = 3,
    /// Reading or validating the data failed.
    DataError = 4,
    /// The query/order pair is not handled by the requested algorithm.
    NotRouted = 5,
    OutOfRange = 6,
    CountOverflow = 7,
    Internal = 8,
    Panic = 9,
}

pub struct CqdaQuery(Query);

pub struct CqdaInstance(Instance);

pub struct CqdaIndex(DirectIndex);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CqdaStatus {
    match e {
        Error::Syntax { .. }
        | Error::UnboundHeadVariable(_)
        | Error::DuplicateHeadVariable(_)
        | Error::UnknownVariable(_)
        | Error::NonFreeVariable(_)
        | Error::DuplicateVariable(_)
        | Error::TooManyVariables { .. } => CqdaStatus::InvalidQuery,
        Error::Io { .. }
        | Error::Csv { .. }
        | Error::RaggedRow { .. }
        | Error::EmptyHeader(_)
        | Error::MissingRelation(_)
        | Error::ArityMismatch { .. }
        | Error::NonNumericWeightColumn { .. }
        | Error::Config(_) => CqdaStatus::DataError,
        Error::NotRouted(_) | Error::NotApplicable(_) => CqdaStatus::NotRouted,
        Error::OutOfRange { .. } | Error::KOutOfRange { .. } => CqdaStatus::OutOfRange,
        Error::CountOverflow | Error::ResultTooLarge { .. } => CqdaStatus::CountOverflow,
        Error::MultiplePositionsWithOffsetDialect | Error::Internal(_) => CqdaStatus::Internal,
    }
}

enum Failure {
    Status(CqdaStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CqdaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CqdaStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside cqda".into());
            CqdaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Status(CqdaStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(CqdaStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::Status(CqdaStatus::NullArgument, format!("{name} is null")))
}

fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Status(CqdaStatus::NullArgument, "out is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure::Status(CqdaStatus::Internal, "interior NUL".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn out_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Status(CqdaStatus::NullArgument, "out is null".into()));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn cqda_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cqda_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `Q(A,B) :- R(A,B), ...`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_query_parse(text: *const c_char, out: *mut *mut CqdaQuery) -> CqdaStatus {
    guard(|| {
        let q = parse_query(str_arg(text, "text")?)?;
        out_handle(out, CqdaQuery(q))
    })
}

/// # Safety
/// `q` must come from [`cqda_query_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cqda_query_free(q: *mut CqdaQuery) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Loads `<dir>/<Relation>.csv` for every relation of `q`.
///
/// # Safety
/// `q` must be a live query handle, `dir` a NUL-terminated path, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_instance_load(
    q: *const CqdaQuery,
    dir: *const c_char,
    out: *mut *mut CqdaInstance,
) -> CqdaStatus {
    guard(|| {
        let q = ref_arg(q, "query")?;
        let db = Instance::load_for_query(Path::new(str_arg(dir, "dir")?), &q.0)?;
        out_handle(out, CqdaInstance(db))
    })
}

/// # Safety
/// `db` must come from [`cqda_instance_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cqda_instance_free(db: *mut CqdaInstance) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Tractability report for `order` (`lex: A,B` or `sum: A`) as JSON.
///
/// # Safety
/// `q` must be a live query handle, `order` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_analyze_json(
    q: *const CqdaQuery,
    order: *const c_char,
    out: *mut *mut c_char,
) -> CqdaStatus {
    guard(|| {
        let q = &ref_arg(q, "query")?.0;
        let o = parse_order(str_arg(order, "order")?, q)?;
        let json =
            serde_json::to_string(&analyze(q, &o)).map_err(|e| Failure::Status(CqdaStatus::Internal, e.to_string()))?;
        out_string(out, json)
    })
}

/// Preprocesses a direct-access index.
///
/// # Safety
/// `q` and `db` must be live handles, `order` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_index_build(
    q: *const CqdaQuery,
    db: *const CqdaInstance,
    order: *const c_char,
    out: *mut *mut CqdaIndex,
) -> CqdaStatus {
    guard(|| {
        let q = &ref_arg(q, "query")?.0;
        let db = &ref_arg(db, "instance")?.0;
        let o = parse_order(str_arg(order, "order")?, q)?;
        out_handle(out, CqdaIndex(DirectIndex::build(q, db, &o)?))
    })
}

/// # Safety
/// `ix` must come from [`cqda_index_build`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cqda_index_free(ix: *mut CqdaIndex) {
    if !ix.is_null() {
        drop(Box::from_raw(ix));
    }
}

/// Number of answers. `CountOverflow` when it does not fit 64 bits.
///
/// # Safety
/// `ix` must be a live index handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_index_count(ix: *const CqdaIndex, out: *mut u64) -> CqdaStatus {
    guard(|| {
        let n = ref_arg(ix, "index")?.0.count();
        let n = u64::try_from(n)
            .map_err(|_| Failure::Status(CqdaStatus::CountOverflow, format!("count {n} exceeds 64 bits")))?;
        if out.is_null() {
            return Err(Failure::Status(CqdaStatus::NullArgument, "out is null".into()));
        }
        *out = n;
        Ok(())
    })
}

/// Answer at zero-based position `k` as a JSON object keyed by head variable.
///
/// # Safety
/// `ix` must be a live index handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_index_access_json(ix: *const CqdaIndex, k: u64, out: *mut *mut c_char) -> CqdaStatus {
    guard(|| {
        let answer = ref_arg(ix, "index")?.0.access(u128::from(k))?;
        let json = serde_json::to_string(&answer).map_err(|e| Failure::Status(CqdaStatus::Internal, e.to_string()))?;
        out_string(out, json)
    })
}

/// Answer at position `k` by single access (no index), as JSON.
///
/// # Safety
/// `q` and `db` must be live handles, `order` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cqda_select_json(
    q: *const CqdaQuery,
    db: *const CqdaInstance,
    order: *const c_char,
    k: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> CqdaStatus {
    guard(|| {
        let q = &ref_arg(q, "query")?.0;
        let db = &ref_arg(db, "instance")?.0;
        let o = parse_order(str_arg(order, "order")?, q)?;
        let answer = match o.kind {
            OrderKind::Lex => select_lex(q, db, &o, u128::from(k), seed)?,
            OrderKind::Sum => select_sum(q, db, &o, u128::from(k), seed)?,
        };
        let json = serde_json::to_string(&answer).map_err(|e| Failure::Status(CqdaStatus::Internal, e.to_string()))?;
        out_string(out, json)
    })
}
