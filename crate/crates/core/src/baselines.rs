//! Reference structures with conditional consumers: a Treiber stack and a
//! Michael-Scott queue. Popping or dequeuing an empty structure returns `None`.

use std::mem::ManuallyDrop;
use std::ptr;
use std::sync::atomic::Ordering::{Acquire, Relaxed, Release};

use crossbeam_epoch::{self as epoch, Atomic, Owned, Shared};
use crossbeam_utils::CachePadded;

struct TreiberNode<T> {
    value: ManuallyDrop<T>,
    next: Atomic<TreiberNode<T>>,
}

#[derive(Debug)]
pub struct TreiberStack<T> {
    head: Atomic<TreiberNode<T>>,
}

impl<T> Default for TreiberStack<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> TreiberStack<T> {
    pub fn new() -> Self {
        TreiberStack {
            head: Atomic::null(),
        }
    }

    pub fn push(&self, value: T) {
        let mut n = Owned::new(TreiberNode {
            value: ManuallyDrop::new(value),
            next: Atomic::null(),
        });
        let guard = epoch::pin();
        loop {
            let head = self.head.load(Relaxed, &guard);
            n.next.store(head, Relaxed);
            match self
                .head
                .compare_exchange(head, n, Release, Relaxed, &guard)
            {
                Ok(_) => break,
                Err(e) => n = e.new,
            }
        }
    }

    pub fn pop(&self) -> Option<T> {
        let guard = epoch::pin();
        loop {
            let head = self.head.load(Acquire, &guard);
            let h = unsafe { head.as_ref() }?;
            let next = h.next.load(Relaxed, &guard);
            if self
                .head
                .compare_exchange(head, next, Relaxed, Relaxed, &guard)
                .is_ok()
            {
                unsafe {
                    guard.defer_destroy(head);
                    return Some(ManuallyDrop::into_inner(ptr::read(&h.value)));
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        let guard = epoch::pin();
        self.head.load(Acquire, &guard).is_null()
    }
}

impl<T> Drop for TreiberStack<T> {
    fn drop(&mut self) {
        while self.pop().is_some() {}
    }
}

struct MsNode<T> {
    /// Uninitialized in the dummy node.
    value: std::mem::MaybeUninit<T>,
    next: Atomic<MsNode<T>>,
}

#[derive(Debug)]
pub struct MsQueue<T> {
    head: CachePadded<Atomic<MsNode<T>>>,
    tail: CachePadded<Atomic<MsNode<T>>>,
}

impl<T> Default for MsQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> MsQueue<T> {
    pub fn new() -> Self {
        let q = MsQueue {
            head: CachePadded::new(Atomic::null()),
            tail: CachePadded::new(Atomic::null()),
        };
        let dummy = Owned::new(MsNode {
            value: std::mem::MaybeUninit::uninit(),
            next: Atomic::null(),
        });
        unsafe {
            let guard = epoch::unprotected();
            let dummy = dummy.into_shared(guard);
            q.head.store(dummy, Relaxed);
            q.tail.store(dummy, Relaxed);
        }
        q
    }

    pub fn enqueue(&self, value: T) {
        let guard = &epoch::pin();
        let new = Owned::new(MsNode {
            value: std::mem::MaybeUninit::new(value),
            next: Atomic::null(),
        })
        .into_shared(guard);
        loop {
            let tail = self.tail.load(Acquire, guard);
            let t = unsafe { tail.deref() };
            let next = t.next.load(Acquire, guard);
            if !next.is_null() {
                let _ = self
                    .tail
                    .compare_exchange(tail, next, Release, Relaxed, guard);
                continue;
            }
            if t.next
                .compare_exchange(Shared::null(), new, Release, Relaxed, guard)
                .is_ok()
            {
                let _ = self
                    .tail
                    .compare_exchange(tail, new, Release, Relaxed, guard);
                return;
            }
        }
    }

    pub fn dequeue(&self) -> Option<T> {
        let guard = &epoch::pin();
        loop {
            let head = self.head.load(Acquire, guard);
            let h = unsafe { head.deref() };
            let next = h.next.load(Acquire, guard);
            let n = unsafe { next.as_ref() }?;
            let tail = self.tail.load(Relaxed, guard);
            if tail == head {
                let _ = self
                    .tail
                    .compare_exchange(tail, next, Release, Relaxed, guard);
            }
            if self
                .head
                .compare_exchange(head, next, Release, Relaxed, guard)
                .is_ok()
            {
                unsafe {
                    guard.defer_destroy(head);
                    return Some(n.value.assume_init_read());
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        let guard = &epoch::pin();
        let head = self.head.load(Acquire, guard);
        unsafe { head.deref() }.next.load(Acquire, guard).is_null()
    }
}

impl<T> Drop for MsQueue<T> {
    fn drop(&mut self) {
        while self.dequeue().is_some() {}
        unsafe {
            let guard = epoch::unprotected();
            drop(self.head.load(Relaxed, guard).into_owned());
        }
    }
}
