//! C ABI over `quant-core`: the quantifiable stack and queue (with `uint64_t`
//! payloads), their tickets, and history loading and verification.
//!
//! Every function returns a [`QuantStatus`] or a handle that is null on
//! failure. After a failure, [`quant_last_error`] describes it. Stack and
//! queue handles may be shared between threads; tickets and histories may not
//! be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quant_core::history::History;
use quant_core::qqueue::{QQueue, QQueueConfig};
use quant_core::qstack::{QStack, QStackConfig};
use quant_core::verifier;
use quant_core::{Ticket, TicketState};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantStatus {
    Ok = 0,
    /// The ticket has no value yet.
    Pending = 1,
    /// The ticket was cancelled and will never receive a value.
    Cancelled = 2,
    /// The ticket's value was already taken.
    Taken = 3,
    /// Cancellation came too late: a value was delivered.
    Fulfilled = 4,
    NullArgument = -1,
    InvalidArgument = -2,
    Io = -3,
    Parse = -4,
    /// The history contains a call that cannot be verified.
    Malformed = -5,
    /// A Rust panic was caught at the boundary.
    Panic = -6,
}

/// Opaque quantifiable stack of `uint64_t`.
pub struct QuantQStack(QStack<u64>);

/// Opaque quantifiable queue of `uint64_t`.
pub struct QuantQQueue(QQueue<u64>);

/// Opaque result of a pop or dequeue.
pub struct QuantTicket(Ticket<u64>);

/// Opaque recorded history.
pub struct QuantHistory(History);

/// Summary of a verification.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuantVerdict {
    pub quantifiable: bool,
    pub calls: usize,
    pub pending: usize,
    pub configurations: usize,
    pub violations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: QuantStatus, msg: impl Into<String>) -> QuantStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into `QuantStatus::Panic`.
fn guarded(f: impl FnOnce() -> QuantStatus) -> QuantStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        fail(QuantStatus::Panic, msg)
    })
}

fn guarded_ptr<T>(f: impl FnOnce() -> *mut T) -> *mut T {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("panic");
        ptr::null_mut()
    })
}

/// Message for the last failure on this thread, or null if there was none.
/// The string stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn quant_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// New stack with `width` tail slots (at least 1). Returns null on error.
#[no_mangle]
pub extern "C" fn quant_qstack_new(width: usize, fail_threshold: usize) -> *mut QuantQStack {
    if width == 0 {
        set_error("width must be at least 1");
        return ptr::null_mut();
    }
    guarded_ptr(|| {
        let config = QStackConfig {
            width,
            fail_threshold,
        };
        Box::into_raw(Box::new(QuantQStack(QStack::with_config(config))))
    })
}

/// # Safety
/// `stack` is null or came from [`quant_qstack_new`] and is not used afterwards.
/// Values still in the stack are discarded.
#[no_mangle]
pub unsafe extern "C" fn quant_qstack_free(stack: *mut QuantQStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// # Safety
/// `stack` came from [`quant_qstack_new`] and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn quant_qstack_push(stack: *const QuantQStack, value: u64) -> QuantStatus {
    let Some(s) = stack.as_ref() else {
        return fail(QuantStatus::NullArgument, "stack is null");
    };
    guarded(|| {
        s.0.push(value);
        QuantStatus::Ok
    })
}

/// Pops into a new ticket stored in `*out`; free it with [`quant_ticket_free`].
///
/// # Safety
/// `stack` came from [`quant_qstack_new`] and has not been freed; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn quant_qstack_pop(
    stack: *const QuantQStack,
    out: *mut *mut QuantTicket,
) -> QuantStatus {
    let (Some(s), false) = (stack.as_ref(), out.is_null()) else {
        return fail(QuantStatus::NullArgument, "stack or out is null");
    };
    guarded(|| {
        *out = Box::into_raw(Box::new(QuantTicket(s.0.pop())));
        QuantStatus::Ok
    })
}

/// New queue with `width` sublists (at least 1). Returns null on error.
#[no_mangle]
pub extern "C" fn quant_qqueue_new(width: usize) -> *mut QuantQQueue {
    if width == 0 {
        set_error("width must be at least 1");
        return ptr::null_mut();
    }
    guarded_ptr(|| {
        Box::into_raw(Box::new(QuantQQueue(QQueue::with_config(QQueueConfig {
            width,
        }))))
    })
}

/// # Safety
/// `queue` is null or came from [`quant_qqueue_new`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn quant_qqueue_free(queue: *mut QuantQQueue) {
    if !queue.is_null() {
        drop(Box::from_raw(queue));
    }
}

/// # Safety
/// `queue` came from [`quant_qqueue_new`] and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn quant_qqueue_enqueue(
    queue: *const QuantQQueue,
    value: u64,
) -> QuantStatus {
    let Some(q) = queue.as_ref() else {
        return fail(QuantStatus::NullArgument, "queue is null");
    };
    guarded(|| {
        q.0.enqueue(value);
        QuantStatus::Ok
    })
}

/// Dequeues into a new ticket stored in `*out`.
///
/// # Safety
/// `queue` came from [`quant_qqueue_new`] and has not been freed; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn quant_qqueue_dequeue(
    queue: *const QuantQQueue,
    out: *mut *mut QuantTicket,
) -> QuantStatus {
    let (Some(q), false) = (queue.as_ref(), out.is_null()) else {
        return fail(QuantStatus::NullArgument, "queue or out is null");
    };
    guarded(|| {
        *out = Box::into_raw(Box::new(QuantTicket(q.0.dequeue())));
        QuantStatus::Ok
    })
}

/// Takes the ticket's value into `*value` if it has arrived. Returns
/// `Ok`, `Pending`, `Cancelled` or `Taken`.
///
/// # Safety
/// `ticket` is a live ticket handle; `value` is writable.
#[no_mangle]
pub unsafe extern "C" fn quant_ticket_poll(
    ticket: *mut QuantTicket,
    value: *mut u64,
) -> QuantStatus {
    let (Some(t), false) = (ticket.as_mut(), value.is_null()) else {
        return fail(QuantStatus::NullArgument, "ticket or value is null");
    };
    guarded(|| match t.0.try_take() {
        Some(v) => {
            *value = v;
            QuantStatus::Ok
        }
        None => match t.0.state() {
            TicketState::Pending => QuantStatus::Pending,
            TicketState::Cancelled => QuantStatus::Cancelled,
            // The value may have landed since `try_take` looked.
            TicketState::Fulfilled => match t.0.try_take() {
                Some(v) => {
                    *value = v;
                    QuantStatus::Ok
                }
                None => QuantStatus::Taken,
            },
        },
    })
}

/// Spins, yielding the thread, until the ticket is resolved. Returns what
/// [`quant_ticket_poll`] returns, except never `Pending`.
///
/// # Safety
/// As for [`quant_ticket_poll`].
#[no_mangle]
pub unsafe extern "C" fn quant_ticket_wait(
    ticket: *mut QuantTicket,
    value: *mut u64,
) -> QuantStatus {
    loop {
        match quant_ticket_poll(ticket, value) {
            QuantStatus::Pending => std::thread::yield_now(),
            status => return status,
        }
    }
}

/// Cancels a pending ticket. Returns `Ok` if this call cancelled it,
/// `Cancelled` if it already was, and `Fulfilled` if a value has been
/// delivered (poll to collect it, unless it was already taken).
///
/// # Safety
/// `ticket` is a live ticket handle.
#[no_mangle]
pub unsafe extern "C" fn quant_ticket_cancel(ticket: *mut QuantTicket) -> QuantStatus {
    let Some(t) = ticket.as_ref() else {
        return fail(QuantStatus::NullArgument, "ticket is null");
    };
    guarded(|| {
        if t.0.cancel() {
            QuantStatus::Ok
        } else if t.0.state() == TicketState::Cancelled {
            QuantStatus::Cancelled
        } else {
            QuantStatus::Fulfilled
        }
    })
}

/// Frees a ticket, cancelling it if still pending.
///
/// # Safety
/// `ticket` is null or a live ticket handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn quant_ticket_free(ticket: *mut QuantTicket) {
    if !ticket.is_null() {
        drop(Box::from_raw(ticket));
    }
}

/// Loads a history file into `*out`.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quant_history_load(
    path: *const c_char,
    out: *mut *mut QuantHistory,
) -> QuantStatus {
    if path.is_null() || out.is_null() {
        return fail(QuantStatus::NullArgument, "path or out is null");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return fail(QuantStatus::InvalidArgument, "path is not UTF-8");
    };
    guarded(|| match History::load(path) {
        Ok(h) => {
            *out = Box::into_raw(Box::new(QuantHistory(h)));
            QuantStatus::Ok
        }
        Err(e @ quant_core::history::HistoryError::Io(_)) => {
            fail(QuantStatus::Io, format!("{path}: {e}"))
        }
        Err(e) => fail(QuantStatus::Parse, format!("{path}: {e}")),
    })
}

/// Parses history text (the same format as files) into `*out`.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quant_history_parse(
    text: *const c_char,
    out: *mut *mut QuantHistory,
) -> QuantStatus {
    if text.is_null() || out.is_null() {
        return fail(QuantStatus::NullArgument, "text or out is null");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(QuantStatus::Parse, "history text is not UTF-8");
    };
    guarded(|| match History::parse(text) {
        Ok(h) => {
            *out = Box::into_raw(Box::new(QuantHistory(h)));
            QuantStatus::Ok
        }
        Err(e) => fail(QuantStatus::Parse, e.to_string()),
    })
}

/// Number of calls in the history, or 0 for null.
///
/// # Safety
/// `history` is null or a live history handle.
#[no_mangle]
pub unsafe extern "C" fn quant_history_len(history: *const QuantHistory) -> usize {
    history.as_ref().map_or(0, |h| h.0.len())
}

/// # Safety
/// `history` is null or a live history handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn quant_history_free(history: *mut QuantHistory) {
    if !history.is_null() {
        drop(Box::from_raw(history));
    }
}

/// Verifies the history and writes a summary to `*out`.
///
/// # Safety
/// `history` is a live history handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quant_history_verify(
    history: *const QuantHistory,
    out: *mut QuantVerdict,
) -> QuantStatus {
    let (Some(h), false) = (history.as_ref(), out.is_null()) else {
        return fail(QuantStatus::NullArgument, "history or out is null");
    };
    guarded(|| match verifier::verify(&h.0) {
        Ok(v) => {
            *out = QuantVerdict {
                quantifiable: v.quantifiable,
                calls: v.calls,
                pending: v.pending,
                configurations: v.h_floor.len(),
                violations: v.violations.len(),
            };
            QuantStatus::Ok
        }
        Err(e) => fail(QuantStatus::Malformed, e.to_string()),
    })
}
