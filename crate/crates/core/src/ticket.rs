//! Write-once result cells handed out by consumers that may have to wait.

use std::cell::UnsafeCell;
use std::fmt;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use crossbeam_utils::Backoff;

const PENDING: u8 = 0;
const WRITING: u8 = 1;
const FULFILLED: u8 = 2;
const TAKEN: u8 = 3;
const CANCELLED: u8 = 4;

/// Shared cell between a waiting consumer and the producer that satisfies it.
pub(crate) struct Slot<T> {
    state: AtomicU8,
    value: UnsafeCell<MaybeUninit<T>>,
}

unsafe impl<T: Send> Send for Slot<T> {}
unsafe impl<T: Send> Sync for Slot<T> {}

impl<T> Slot<T> {
    pub(crate) fn pending() -> Arc<Self> {
        Arc::new(Slot {
            state: AtomicU8::new(PENDING),
            value: UnsafeCell::new(MaybeUninit::uninit()),
        })
    }

    fn ready(value: T) -> Arc<Self> {
        Arc::new(Slot {
            state: AtomicU8::new(FULFILLED),
            value: UnsafeCell::new(MaybeUninit::new(value)),
        })
    }

    /// Delivers `value`, or hands it back if the slot was cancelled.
    pub(crate) fn fulfill(&self, value: T) -> Result<(), T> {
        if self
            .state
            .compare_exchange(PENDING, WRITING, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return Err(value);
        }
        unsafe { (*self.value.get()).write(value) };
        self.state.store(FULFILLED, Ordering::Release);
        Ok(())
    }

    pub(crate) fn cancel(&self) -> bool {
        self.state
            .compare_exchange(PENDING, CANCELLED, Ordering::AcqRel, Ordering::Acquire)
            .is_ok()
    }

    /// Still waiting for a value (a fulfilment in progress does not count).
    pub(crate) fn is_pending(&self) -> bool {
        self.state.load(Ordering::Acquire) == PENDING
    }

    fn try_take(&self) -> Option<T> {
        self.state
            .compare_exchange(FULFILLED, TAKEN, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| unsafe { (*self.value.get()).assume_init_read() })
    }

    fn state(&self) -> TicketState {
        match self.state.load(Ordering::Acquire) {
            PENDING | WRITING => TicketState::Pending,
            FULFILLED | TAKEN => TicketState::Fulfilled,
            _ => TicketState::Cancelled,
        }
    }
}

impl<T> Drop for Slot<T> {
    fn drop(&mut self) {
        if *self.state.get_mut() == FULFILLED {
            unsafe { self.value.get_mut().assume_init_drop() };
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TicketState {
    Pending,
    Fulfilled,
    Cancelled,
}

/// The result of a `pop` or `dequeue` on a quantifiable structure.
///
/// A pending ticket is fulfilled later by a producer. Dropping a pending
/// ticket cancels it, so no value is ever delivered to a ticket nobody holds.
pub struct Ticket<T> {
    slot: Arc<Slot<T>>,
}

impl<T> Ticket<T> {
    pub(crate) fn from_slot(slot: Arc<Slot<T>>) -> Self {
        Ticket { slot }
    }

    pub(crate) fn ready(value: T) -> Self {
        Ticket {
            slot: Slot::ready(value),
        }
    }

    pub fn state(&self) -> TicketState {
        self.slot.state()
    }

    pub fn is_pending(&self) -> bool {
        self.state() == TicketState::Pending
    }

    pub fn is_fulfilled(&self) -> bool {
        self.state() == TicketState::Fulfilled
    }

    /// Takes the delivered value. Returns `None` while pending, when cancelled,
    /// and after the value has already been taken.
    pub fn try_take(&mut self) -> Option<T> {
        self.slot.try_take()
    }

    /// Moves a pending ticket to cancelled. Returns `false` if it was already
    /// fulfilled or cancelled.
    pub fn cancel(&self) -> bool {
        self.slot.cancel()
    }

    /// Spins (with backoff) until the value arrives. Returns `None` if the
    /// ticket is cancelled or its value was already taken.
    pub fn wait(mut self) -> Option<T> {
        let backoff = Backoff::new();
        loop {
            match self.slot.state.load(Ordering::Acquire) {
                PENDING | WRITING => backoff.snooze(),
                FULFILLED => return self.try_take(),
                _ => return None,
            }
            if backoff.is_completed() {
                std::thread::yield_now();
            }
        }
    }
}

impl<T> Drop for Ticket<T> {
    fn drop(&mut self) {
        self.slot.cancel();
    }
}

impl<T> fmt::Debug for Ticket<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ticket")
            .field("state", &self.state())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fulfill_then_take() {
        let slot = Slot::pending();
        let mut t = Ticket::from_slot(slot.clone());
        assert!(t.is_pending());
        assert_eq!(t.try_take(), None);
        assert_eq!(slot.fulfill(9), Ok(()));
        assert_eq!(slot.fulfill(10), Err(10));
        assert!(t.is_fulfilled());
        assert_eq!(t.try_take(), Some(9));
        assert_eq!(t.try_take(), None);
        assert!(!t.cancel());
    }

    #[test]
    fn cancel_is_single_shot() {
        let slot = Slot::<u64>::pending();
        let t = Ticket::from_slot(slot.clone());
        assert!(t.cancel());
        assert!(!t.cancel());
        assert_eq!(t.state(), TicketState::Cancelled);
        assert_eq!(slot.fulfill(3), Err(3));
        assert_eq!(t.wait(), None);
    }

    #[test]
    fn dropping_a_pending_ticket_cancels() {
        let slot = Slot::<u64>::pending();
        drop(Ticket::from_slot(slot.clone()));
        assert_eq!(slot.state(), TicketState::Cancelled);
    }

    #[test]
    fn wait_across_threads() {
        let slot = Slot::pending();
        let t = Ticket::from_slot(slot.clone());
        let h = std::thread::spawn(move || t.wait());
        slot.fulfill(String::from("x")).unwrap();
        assert_eq!(h.join().unwrap().as_deref(), Some("x"));
    }

    #[test]
    fn undelivered_value_is_dropped_with_slot() {
        let v = Arc::new(());
        let slot = Slot::pending();
        slot.fulfill(v.clone()).unwrap();
        drop(slot);
        assert_eq!(Arc::strong_count(&v), 1);
    }
}
