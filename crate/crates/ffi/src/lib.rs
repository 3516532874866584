//! C interface to `qrac-core`.
//!
//! Every function returns a [`QracStatus`]; results come back through out
//! pointers. On failure the message is available from
//! [`qrac_last_error_message`] on the same thread. Handles are opaque and must
//! be released with their `_free` function; strings returned by the library
//! are released with [`qrac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qrac_core::bounds::{asym_closed_form_n2, asym_optimize, symmetric_bound, werner_fidelity, AsymSpec, CloningParams};
use qrac_core::codes::{builtin_table, generate_single_distance, EncodingTable};
use qrac_core::qcore::Rational;
use qrac_core::qracse::{run_protocol, trivial_strategy, ProtocolReport, QracTask, Variant};
use qrac_core::teleport::{
    composite_nsqrac_via_qracse, constrained_teleport_fidelity, nsqrac_favored_strategy, nsqrac_split_strategy,
};
use qrac_core::QracError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QracStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    InvalidArgument = 3,
    OutOfRange = 4,
    Shape = 5,
    Encoding = 6,
    NotAvailable = 7,
    Infeasible = 8,
    Io = 9,
    Internal = 10,
}

/// Task variant selector for [`qrac_protocol_run`] and [`qrac_trivial_strategy`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QracVariant {
    TwoStrings = 0,
    FourDitsPairs = 1,
    FourDitsSingle = 2,
}

/// Opaque encoding table.
pub struct QracTable(EncodingTable);

/// Opaque protocol report.
pub struct QracReport(ProtocolReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &QracError) -> QracStatus {
    match e {
        QracError::InvalidDimension(_) => QracStatus::InvalidDimension,
        QracError::Shape(_) => QracStatus::Shape,
        QracError::InvalidState(_) | QracError::InvalidArgument(_) => QracStatus::InvalidArgument,
        QracError::Encoding(_) => QracStatus::Encoding,
        QracError::NotAvailable(_) => QracStatus::NotAvailable,
        QracError::OutOfRange(_) => QracStatus::OutOfRange,
        QracError::Infeasible(_) => QracStatus::Infeasible,
        QracError::Io(_) | QracError::Json(_) | QracError::Csv(_) => QracStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(QracError),
}

impl From<QracError> for Failure {
    fn from(e: QracError) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QracStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QracStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed for `{name}`"));
            QracStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QracStatus::Internal
        }
    }
}

fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a pointer to writable storage for T
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

fn input<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a live handle created by this library
    unsafe { p.as_ref() }.ok_or(Failure::Null(name))
}

fn write_rational(r: Rational, num: *mut i64, den: *mut i64) -> Result<(), Failure> {
    let too_big = || Failure::Core(QracError::OutOfRange("rational does not fit in 64 bits".into()));
    *out(num, "numerator")? = i64::try_from(*r.numer()).map_err(|_| too_big())?;
    *out(den, "denominator")? = i64::try_from(*r.denom()).map_err(|_| too_big())?;
    Ok(())
}

fn variant_of(v: QracVariant) -> Variant {
    match v {
        QracVariant::TwoStrings => Variant::TwoStrings,
        QracVariant::FourDitsPairs => Variant::FourDitsPairs,
        QracVariant::FourDitsSingle => Variant::FourDitsSingle,
    }
}

/// Why the last call on this thread failed, or null if it succeeded. Valid until the next call.
#[no_mangle]
pub extern "C" fn qrac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qrac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qrac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Published table for `d` in 2..=4.
#[no_mangle]
pub extern "C" fn qrac_table_builtin(d: usize, table: *mut *mut QracTable) -> QracStatus {
    guard(|| {
        let slot = out(table, "table")?;
        *slot = Box::into_raw(Box::new(QracTable(builtin_table(d)?)));
        Ok(())
    })
}

/// Run-structured single-distance table for any `d ≥ 2`.
#[no_mangle]
pub extern "C" fn qrac_table_generate(d: usize, table: *mut *mut QracTable) -> QracStatus {
    guard(|| {
        let slot = out(table, "table")?;
        *slot = Box::into_raw(Box::new(QracTable(generate_single_distance(d)?)));
        Ok(())
    })
}

/// Builds a table from `2·len` digits `first0, second0, first1, …`.
///
/// # Safety
/// `digits` must point to `2 * len` readable values.
#[no_mangle]
pub unsafe extern "C" fn qrac_table_new(d: usize, digits: *const usize, len: usize, table: *mut *mut QracTable) -> QracStatus {
    guard(|| {
        let slot = out(table, "table")?;
        if digits.is_null() {
            return Err(Failure::Null("digits"));
        }
        let flat = std::slice::from_raw_parts(digits, 2 * len);
        let pairs = flat.chunks(2).map(|c| [c[0], c[1]]).collect();
        *slot = Box::into_raw(Box::new(QracTable(EncodingTable::new(d, pairs)?)));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qrac_table_free(table: *mut QracTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

#[no_mangle]
pub extern "C" fn qrac_table_len(table: *const QracTable, len: *mut usize) -> QracStatus {
    guard(|| {
        *out(len, "len")? = input(table, "table")?.0.pairs().len();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_table_get(table: *const QracTable, index: usize, first: *mut usize, second: *mut usize) -> QracStatus {
    guard(|| {
        let t = &input(table, "table")?.0;
        let pair = *t
            .pairs()
            .get(index)
            .ok_or_else(|| QracError::OutOfRange(format!("index {index} outside table of {}", t.pairs().len())))?;
        *out(first, "first")? = pair[0];
        *out(second, "second")? = pair[1];
        Ok(())
    })
}

/// Whether the table is a bijection with single-distance cyclic steps.
#[no_mangle]
pub extern "C" fn qrac_table_is_valid(table: *const QracTable, valid: *mut bool) -> QracStatus {
    guard(|| {
        *out(valid, "valid")? = input(table, "table")?.0.validate().is_valid();
        Ok(())
    })
}

/// Runs the protocol; a null `table` selects the standard table for `d`.
#[no_mangle]
pub extern "C" fn qrac_protocol_run(
    d: usize,
    table: *const QracTable,
    variant: QracVariant,
    report: *mut *mut QracReport,
) -> QracStatus {
    guard(|| {
        let slot = out(report, "report")?;
        let v = variant_of(variant);
        let task = if table.is_null() { QracTask::standard(d, v)? } else { QracTask::new(d, input(table, "table")?.0.clone(), v)? };
        *slot = Box::into_raw(Box::new(QracReport(run_protocol(&task)?)));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_trivial_strategy(d: usize, variant: QracVariant, report: *mut *mut QracReport) -> QracStatus {
    guard(|| {
        let slot = out(report, "report")?;
        *slot = Box::into_raw(Box::new(QracReport(trivial_strategy(d, variant_of(variant))?)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qrac_report_free(report: *mut QracReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub extern "C" fn qrac_report_p_avg(report: *const QracReport, value: *mut f64) -> QracStatus {
    guard(|| {
        *out(value, "value")? = input(report, "report")?.0.p_avg;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_report_p_min(report: *const QracReport, value: *mut f64) -> QracStatus {
    guard(|| {
        *out(value, "value")? = input(report, "report")?.0.p_min;
        Ok(())
    })
}

/// Average success for one choice key such as `"c=0"` or `"a0a2"`.
///
/// # Safety
/// `choice` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qrac_report_per_choice(report: *const QracReport, choice: *const c_char, value: *mut f64) -> QracStatus {
    guard(|| {
        let r = &input(report, "report")?.0;
        if choice.is_null() {
            return Err(Failure::Null("choice"));
        }
        let key = CStr::from_ptr(choice)
            .to_str()
            .map_err(|_| QracError::InvalidArgument("choice is not UTF-8".into()))?;
        let p = r
            .per_choice
            .get(key)
            .ok_or_else(|| QracError::InvalidArgument(format!("no choice `{key}` in report")))?;
        *out(value, "value")? = *p;
        Ok(())
    })
}

/// Report as JSON; release with [`qrac_string_free`].
#[no_mangle]
pub extern "C" fn qrac_report_to_json(report: *const QracReport, json: *mut *mut c_char) -> QracStatus {
    guard(|| {
        let slot = out(json, "json")?;
        let text = input(report, "report")?.0.to_json()?;
        *slot = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Simulated entanglement fidelity of teleportation with `k` outcomes.
#[no_mangle]
pub extern "C" fn qrac_teleport_fidelity(d: usize, k: usize, fidelity: *mut f64) -> QracStatus {
    guard(|| {
        let slot = out(fidelity, "fidelity")?;
        *slot = constrained_teleport_fidelity(d, k)?.entanglement_fidelity_f.unwrap_or(f64::NAN);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_split_strategy(d: usize, k_prime: usize, probability: *mut f64) -> QracStatus {
    guard(|| {
        let slot = out(probability, "probability")?;
        *slot = nsqrac_split_strategy(d, k_prime)?.success_probability;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_favored_strategy(d: usize, probability: *mut f64) -> QracStatus {
    guard(|| {
        let slot = out(probability, "probability")?;
        *slot = nsqrac_favored_strategy(d)?.success_probability;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_composite_fidelity(d: usize, fidelity: *mut f64) -> QracStatus {
    guard(|| {
        let slot = out(fidelity, "fidelity")?;
        *slot = composite_nsqrac_via_qracse(d)?.entanglement_fidelity_f.unwrap_or(f64::NAN);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qrac_symmetric_bound(d: usize, n: usize, numerator: *mut i64, denominator: *mut i64) -> QracStatus {
    guard(|| write_rational(symmetric_bound(d, n)?, numerator, denominator))
}

#[no_mangle]
pub extern "C" fn qrac_werner_fidelity(n1: usize, n2: usize, d: usize, numerator: *mut i64, denominator: *mut i64) -> QracStatus {
    guard(|| write_rational(werner_fidelity(CloningParams::new(n1, n2, d)?), numerator, denominator))
}

#[no_mangle]
pub extern "C" fn qrac_asym_closed_form(p: f64, d: usize, value: *mut f64) -> QracStatus {
    guard(|| {
        *out(value, "value")? = asym_closed_form_n2(p, d)?;
        Ok(())
    })
}

/// Maximizes over `n` receivers; `point` may be null, otherwise it receives `n` values.
///
/// # Safety
/// `probabilities` must point to `n` readable values and `point`, when not
/// null, to `n` writable ones.
#[no_mangle]
pub unsafe extern "C" fn qrac_asym_optimize(
    d: usize,
    probabilities: *const f64,
    n: usize,
    restarts: usize,
    seed: u64,
    value: *mut f64,
    point: *mut f64,
) -> QracStatus {
    guard(|| {
        if probabilities.is_null() {
            return Err(Failure::Null("probabilities"));
        }
        let slot = out(value, "value")?;
        let p = std::slice::from_raw_parts(probabilities, n).to_vec();
        let opt = asym_optimize(&AsymSpec::new(d, p)?, restarts, seed)?;
        *slot = opt.value;
        if !point.is_null() {
            std::slice::from_raw_parts_mut(point, n).copy_from_slice(&opt.point);
        }
        Ok(())
    })
}
