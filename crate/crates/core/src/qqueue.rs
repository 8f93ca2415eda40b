//! Quantifiable lock-free queue.
//!
//! The queue is an array of independent sublists, each a classic linked list
//! with a dummy head, a lagging tail and two-step append. A sublist never holds
//! live enqueue and live dequeue nodes at the same time.
//!
//! A dequeue takes the oldest live enqueue node at the front of some sublist.
//! If there is none it appends a dequeue node holding a pending [`Ticket`],
//! which a later enqueue fulfills instead of appending. Either kind of
//! operation rescans after appending so two opposite nodes cannot both stay
//! waiting in different sublists. Dead nodes (claimed values, fulfilled or
//! cancelled tickets) are unlinked as the front of their sublist advances.

use std::cell::UnsafeCell;
use std::fmt;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crossbeam_epoch::{self as epoch, Atomic, Guard, Owned, Shared};
use crossbeam_utils::CachePadded;

use crate::rng::random_index;
use crate::ticket::{Slot, Ticket};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum QOp {
    Enq,
    Deq,
    Dummy,
}

struct QNode<T> {
    op: QOp,
    value: UnsafeCell<MaybeUninit<T>>,
    /// Set by whoever takes the value of an enqueue node.
    claimed: AtomicBool,
    ticket: Option<Arc<Slot<T>>>,
    next: Atomic<QNode<T>>,
}

impl<T> QNode<T> {
    fn dummy() -> Self {
        QNode {
            op: QOp::Dummy,
            value: UnsafeCell::new(MaybeUninit::uninit()),
            claimed: AtomicBool::new(true),
            ticket: None,
            next: Atomic::null(),
        }
    }

    fn enq(value: T) -> Self {
        QNode {
            op: QOp::Enq,
            value: UnsafeCell::new(MaybeUninit::new(value)),
            claimed: AtomicBool::new(false),
            ..Self::dummy()
        }
    }

    fn deq(slot: Arc<Slot<T>>) -> Self {
        QNode {
            op: QOp::Deq,
            ticket: Some(slot),
            ..Self::dummy()
        }
    }

    fn is_live(&self) -> bool {
        match self.op {
            QOp::Enq => !self.claimed.load(Ordering::Acquire),
            QOp::Deq => self.ticket.as_ref().is_some_and(|s| s.is_pending()),
            QOp::Dummy => false,
        }
    }

    /// Takes the value of a live enqueue node; `None` if someone else got it.
    fn claim(&self) -> Option<T> {
        self.claimed
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| unsafe { (*self.value.get()).assume_init_read() })
    }
}

struct Sublist<T> {
    head: CachePadded<Atomic<QNode<T>>>,
    tail: CachePadded<Atomic<QNode<T>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QQueueConfig {
    pub width: usize,
}

impl Default for QQueueConfig {
    fn default() -> Self {
        QQueueConfig {
            width: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

pub struct QQueue<T> {
    lists: Box<[Sublist<T>]>,
}

unsafe impl<T: Send> Send for QQueue<T> {}
unsafe impl<T: Send> Sync for QQueue<T> {}

impl<T> fmt::Debug for QQueue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QQueue")
            .field("width", &self.lists.len())
            .finish_non_exhaustive()
    }
}

impl<T> Default for QQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-sublist contents at quiescence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueueCensus {
    pub values: usize,
    pub pending_dequeues: usize,
    /// Dead nodes still linked behind the front.
    pub dead: usize,
    pub per_sublist: Vec<(usize, usize)>,
}

impl<T> QQueue<T> {
    pub fn new() -> Self {
        Self::with_config(QQueueConfig::default())
    }

    /// # Panics
    ///
    /// If `width` is zero.
    pub fn with_config(config: QQueueConfig) -> Self {
        assert!(config.width >= 1, "width must be at least 1");
        let lists = (0..config.width)
            .map(|_| {
                let dummy = Owned::new(QNode::dummy()).into_shared(unsafe { epoch::unprotected() });
                Sublist {
                    head: CachePadded::new(Atomic::from(dummy)),
                    tail: CachePadded::new(Atomic::from(dummy)),
                }
            })
            .collect();
        QQueue { lists }
    }

    pub fn width(&self) -> usize {
        self.lists.len()
    }

    /// First live node of sublist `i`, unlinking dead nodes in front of it.
    fn first_live<'g>(&self, i: usize, guard: &'g Guard) -> Option<Shared<'g, QNode<T>>> {
        let list = &self.lists[i];
        loop {
            let head = list.head.load(Ordering::Acquire, guard);
            let next = unsafe { head.deref() }.next.load(Ordering::Acquire, guard);
            let next_ref = unsafe { next.as_ref() }?;
            if next_ref.is_live() {
                return Some(next);
            }
            let tail = list.tail.load(Ordering::Acquire, guard);
            if tail == head {
                let _ = list.tail.compare_exchange(
                    tail,
                    next,
                    Ordering::Release,
                    Ordering::Relaxed,
                    guard,
                );
            }
            if list
                .head
                .compare_exchange(head, next, Ordering::Release, Ordering::Relaxed, guard)
                .is_ok()
            {
                unsafe { guard.defer_destroy(head) };
            }
        }
    }

    /// A live node of kind `op` at the front of some sublist, scanning from a
    /// random start.
    fn find_live<'g>(&self, op: QOp, guard: &'g Guard) -> Option<Shared<'g, QNode<T>>> {
        let w = self.lists.len();
        let start = if w == 1 { 0 } else { random_index(w) };
        (0..w).find_map(|k| {
            self.first_live((start + k) % w, guard)
                .filter(|n| unsafe { n.deref() }.op == op)
        })
    }

    /// Appends `node` to sublist `i` unless that would put it behind live
    /// nodes of the opposite kind.
    fn try_append(&self, i: usize, node: Shared<'_, QNode<T>>, guard: &Guard) -> bool {
        let list = &self.lists[i];
        let op = unsafe { node.deref() }.op;
        loop {
            let tail = list.tail.load(Ordering::Acquire, guard);
            let t = unsafe { tail.deref() };
            let next = t.next.load(Ordering::Acquire, guard);
            if !next.is_null() {
                let _ = list.tail.compare_exchange(
                    tail,
                    next,
                    Ordering::Release,
                    Ordering::Relaxed,
                    guard,
                );
                continue;
            }
            // Live nodes share the tail's kind; a different kind may only go in
            // once everything resident is dead.
            if t.op != op && self.first_live(i, guard).is_some() {
                return false;
            }
            if t.next
                .compare_exchange(
                    Shared::null(),
                    node,
                    Ordering::Release,
                    Ordering::Relaxed,
                    guard,
                )
                .is_ok()
            {
                let _ = list.tail.compare_exchange(
                    tail,
                    node,
                    Ordering::Release,
                    Ordering::Relaxed,
                    guard,
                );
                return true;
            }
        }
    }

    pub fn enqueue(&self, value: T) {
        let guard = &epoch::pin();
        let mut value = value;
        'outer: loop {
            if let Some(d) = self.find_live(QOp::Deq, guard) {
                let slot = unsafe { d.deref() }.ticket.as_ref().expect("dequeue node");
                match slot.fulfill(value) {
                    Ok(()) => return,
                    Err(v) => {
                        value = v;
                        continue;
                    }
                }
            }
            let node = Owned::new(QNode::enq(value)).into_shared(guard);
            let n = unsafe { node.deref() };
            if !self.try_append(random_index(self.lists.len()), node, guard) {
                // Never published, so it can be reclaimed directly.
                let owned = unsafe { node.into_owned() };
                value = unsafe { (*owned.value.get()).assume_init_read() };
                continue;
            }
            // A dequeue may have parked elsewhere meanwhile; take our value
            // back and hand it over rather than strand both.
            if let Some(d) = self.find_live(QOp::Deq, guard) {
                let Some(v) = n.claim() else {
                    return;
                };
                let slot = unsafe { d.deref() }.ticket.as_ref().expect("dequeue node");
                if let Err(v) = slot.fulfill(v) {
                    value = v;
                    continue 'outer;
                }
            }
            return;
        }
    }

    /// Takes the oldest value at the front of some sublist, or leaves a
    /// pending request that a later enqueue fulfills.
    pub fn dequeue(&self) -> Ticket<T> {
        let guard = &epoch::pin();
        let slot = Slot::pending();
        loop {
            if let Some(e) = self.find_live(QOp::Enq, guard) {
                if let Some(v) = unsafe { e.deref() }.claim() {
                    return Ticket::ready(v);
                }
                continue;
            }
            let node = Owned::new(QNode::deq(slot.clone())).into_shared(guard);
            if !self.try_append(random_index(self.lists.len()), node, guard) {
                drop(unsafe { node.into_owned() });
                continue;
            }
            loop {
                if !slot.is_pending() {
                    return Ticket::from_slot(slot);
                }
                let Some(e) = self.find_live(QOp::Enq, guard) else {
                    return Ticket::from_slot(slot);
                };
                if let Some(v) = unsafe { e.deref() }.claim() {
                    if let Err(v) = slot.fulfill(v) {
                        // An enqueue reached our node first; put the extra back.
                        self.enqueue(v);
                    }
                    return Ticket::from_slot(slot);
                }
            }
        }
    }

    /// Counts resident values and waiting dequeues; needs exclusive access.
    pub fn census(&mut self) -> QueueCensus {
        let guard = unsafe { epoch::unprotected() };
        let mut c = QueueCensus::default();
        for list in self.lists.iter() {
            let (mut values, mut pending) = (0, 0);
            let head = list.head.load(Ordering::Acquire, guard);
            let mut n = unsafe { head.deref() }.next.load(Ordering::Acquire, guard);
            while let Some(r) = unsafe { n.as_ref() } {
                match (r.op, r.is_live()) {
                    (QOp::Enq, true) => values += 1,
                    (QOp::Deq, true) => pending += 1,
                    _ => c.dead += 1,
                }
                n = r.next.load(Ordering::Acquire, guard);
            }
            c.values += values;
            c.pending_dequeues += pending;
            c.per_sublist.push((values, pending));
        }
        c
    }
}

impl<T> Drop for QQueue<T> {
    fn drop(&mut self) {
        unsafe {
            let guard = epoch::unprotected();
            for list in self.lists.iter() {
                let mut n = list.head.load(Ordering::Relaxed, guard);
                let mut first = true;
                while !n.is_null() {
                    let node = n.into_owned();
                    if !first && node.op == QOp::Enq && !*node.claimed.as_ptr() {
                        (*node.value.get()).assume_init_drop();
                    }
                    first = false;
                    n = node.next.load(Ordering::Relaxed, guard);
                }
            }
        }
    }
}
