//! Quantifiable lock-free stack.
//!
//! The stack is a tree of nodes linked from leaf to root. A fixed array of
//! tail slots points at leaves; each operation picks a random tail and works
//! at that leaf, so concurrent operations spread across branches instead of
//! fighting over a single top pointer.
//!
//! All live nodes hold the same kind of operation. When the tree holds pushes,
//! a pop removes a push leaf and returns its value. When it holds pops (or is
//! empty), a pop inserts a pop node and returns a pending [`Ticket`] that a
//! later push fulfills by removing that node. Pops therefore never fail.
//!
//! An operation takes ownership of a node by swapping in a fresh active
//! descriptor over an inactive one, makes its change, and deactivates the
//! descriptor; deactivation is the point where the effect becomes visible.
//! After `fail_threshold` failed attempts a push or pop publishes its node as
//! a fork request, and the next successful insert of the same kind attaches it
//! as a sibling in a free tail slot.

use std::cell::UnsafeCell;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use crossbeam_epoch::{self as epoch, Atomic, Guard, Owned, Shared};
use crossbeam_utils::{Backoff, CachePadded};

use crate::rng::random_index;
use crate::ticket::{Slot, Ticket};

/// How many snoozes a published fork request waits before being withdrawn.
const FORK_WAIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Push,
    Pop,
    Sentinel,
}

struct Descriptor {
    active: AtomicBool,
}

struct Node<T> {
    op: Op,
    value: UnsafeCell<MaybeUninit<T>>,
    ticket: Option<Arc<Slot<T>>>,
    prev: Atomic<Node<T>>,
    children: AtomicUsize,
    desc: Atomic<Descriptor>,
    linked: AtomicBool,
}

impl<T> Node<T> {
    fn new(op: Op, ticket: Option<Arc<Slot<T>>>) -> Self {
        Node {
            op,
            value: UnsafeCell::new(MaybeUninit::uninit()),
            ticket,
            prev: Atomic::null(),
            children: AtomicUsize::new(0),
            desc: Atomic::new(Descriptor {
                active: AtomicBool::new(false),
            }),
            linked: AtomicBool::new(false),
        }
    }
}

impl<T> Drop for Node<T> {
    fn drop(&mut self) {
        // The value is owned by whoever removes the node; only the descriptor
        // belongs to the node itself.
        unsafe {
            let d = self.desc.load(Ordering::Relaxed, epoch::unprotected());
            if !d.is_null() {
                drop(d.into_owned());
            }
        }
    }
}

/// What a successful removal hands back.
enum Content<T> {
    Value(T),
    Ticket(Arc<Slot<T>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QStackConfig {
    pub width: usize,
    pub fail_threshold: usize,
}

impl Default for QStackConfig {
    fn default() -> Self {
        QStackConfig {
            width: std::thread::available_parallelism().map_or(1, |n| n.get()),
            fail_threshold: 8,
        }
    }
}

pub struct QStack<T> {
    tails: Box<[CachePadded<Atomic<Node<T>>>]>,
    fork_request: CachePadded<Atomic<Node<T>>>,
    fail_threshold: usize,
}

unsafe impl<T: Send> Send for QStack<T> {}
unsafe impl<T: Send> Sync for QStack<T> {}

impl<T> fmt::Debug for QStack<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QStack")
            .field("width", &self.tails.len())
            .field("fail_threshold", &self.fail_threshold)
            .finish_non_exhaustive()
    }
}

impl<T> Default for QStack<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn release(d: Shared<'_, Descriptor>) {
    unsafe { d.deref() }.active.store(false, Ordering::Release);
}

impl<T> QStack<T> {
    pub fn new() -> Self {
        Self::with_config(QStackConfig::default())
    }

    /// # Panics
    ///
    /// If `width` or `fail_threshold` is zero.
    pub fn with_config(config: QStackConfig) -> Self {
        assert!(config.width >= 1, "width must be at least 1");
        assert!(
            config.fail_threshold >= 1,
            "fail_threshold must be at least 1"
        );
        let tails: Box<[_]> = (0..config.width)
            .map(|_| CachePadded::new(Atomic::null()))
            .collect();
        tails[0].store(Owned::new(Node::new(Op::Sentinel, None)), Ordering::Relaxed);
        QStack {
            tails,
            fork_request: CachePadded::new(Atomic::null()),
            fail_threshold: config.fail_threshold,
        }
    }

    pub fn width(&self) -> usize {
        self.tails.len()
    }

    /// Picks a uniformly random starting slot and returns the first non-null
    /// tail at or after it.
    fn random_tail<'g>(&self, guard: &'g Guard) -> (usize, Shared<'g, Node<T>>) {
        let w = self.tails.len();
        loop {
            let start = if w == 1 { 0 } else { random_index(w) };
            for k in 0..w {
                let idx = (start + k) % w;
                let cur = self.tails[idx].load(Ordering::Acquire, guard);
                if !cur.is_null() {
                    return (idx, cur);
                }
            }
            // Every slot looked empty mid-prune; the tree always keeps a tail.
            std::hint::spin_loop();
        }
    }

    /// Installs a fresh active descriptor on `node` if its current one is inactive.
    fn acquire<'g>(&self, node: &Node<T>, guard: &'g Guard) -> Option<Shared<'g, Descriptor>> {
        let current = node.desc.load(Ordering::Acquire, guard);
        if unsafe { current.deref() }.active.load(Ordering::Acquire) {
            return None;
        }
        let fresh = Owned::new(Descriptor {
            active: AtomicBool::new(true),
        });
        match node
            .desc
            .compare_exchange(current, fresh, Ordering::AcqRel, Ordering::Acquire, guard)
        {
            Ok(installed) => {
                unsafe { guard.defer_destroy(current) };
                Some(installed)
            }
            Err(_) => None,
        }
    }

    fn tail_refs(&self, node: Shared<'_, Node<T>>, guard: &Guard) -> usize {
        self.tails
            .iter()
            .filter(|t| t.load(Ordering::Acquire, guard) == node)
            .count()
    }

    /// A leaf has no children and exactly one tail pointing at it.
    /// Only meaningful while `node` is owned.
    fn is_leaf(&self, node: Shared<'_, Node<T>>, guard: &Guard) -> bool {
        let n = unsafe { node.deref() };
        n.children.load(Ordering::Relaxed) == 0 && self.tail_refs(node, guard) == 1
    }

    /// Clears slot `idx` if it points at an owned node that is not a leaf.
    fn prune(&self, idx: usize, cur: Shared<'_, Node<T>>, guard: &Guard) {
        let _ = self.tails[idx].compare_exchange(
            cur,
            Shared::null(),
            Ordering::AcqRel,
            Ordering::Relaxed,
            guard,
        );
    }

    /// Attaches `elem` below the leaf `cur` read from `tails[idx]`.
    fn insert(
        &self,
        idx: usize,
        cur: Shared<'_, Node<T>>,
        elem: Shared<'_, Node<T>>,
        guard: &Guard,
    ) -> bool {
        let cur_ref = unsafe { cur.deref() };
        let Some(desc) = self.acquire(cur_ref, guard) else {
            return false;
        };
        let ok = self.insert_owned(idx, cur, elem, guard);
        release(desc);
        ok
    }

    fn insert_owned(
        &self,
        idx: usize,
        cur: Shared<'_, Node<T>>,
        elem: Shared<'_, Node<T>>,
        guard: &Guard,
    ) -> bool {
        if self.tails[idx].load(Ordering::Acquire, guard) != cur {
            return false;
        }
        if !self.is_leaf(cur, guard) {
            self.prune(idx, cur, guard);
            return false;
        }
        let cur_ref = unsafe { cur.deref() };
        let elem_ref = unsafe { elem.deref() };
        elem_ref.prev.store(cur, Ordering::Relaxed);
        cur_ref.children.fetch_add(1, Ordering::Relaxed);

        let mut top = elem;
        let mut helped = None;
        let helper = self.fork_request.load(Ordering::Acquire, guard);
        if !helper.is_null() && helper != elem {
            let h = unsafe { helper.deref() };
            if h.op == elem_ref.op
                && self
                    .fork_request
                    .compare_exchange(
                        helper,
                        Shared::null(),
                        Ordering::AcqRel,
                        Ordering::Relaxed,
                        guard,
                    )
                    .is_ok()
            {
                h.prev.store(cur, Ordering::Relaxed);
                cur_ref.children.fetch_add(1, Ordering::Relaxed);
                if !self.claim_free_slot(helper, guard) {
                    // No room for a new branch: stack the helper on top of elem.
                    cur_ref.children.fetch_sub(1, Ordering::Relaxed);
                    h.prev.store(elem, Ordering::Relaxed);
                    elem_ref.children.fetch_add(1, Ordering::Relaxed);
                    top = helper;
                }
                helped = Some(h);
            }
        }
        self.tails[idx].store(top, Ordering::Release);
        if let Some(h) = helped {
            h.linked.store(true, Ordering::Release);
        }
        true
    }

    fn claim_free_slot(&self, node: Shared<'_, Node<T>>, guard: &Guard) -> bool {
        self.tails.iter().any(|t| {
            t.load(Ordering::Acquire, guard).is_null()
                && t.compare_exchange(
                    Shared::null(),
                    node,
                    Ordering::AcqRel,
                    Ordering::Relaxed,
                    guard,
                )
                .is_ok()
        })
    }

    /// Detaches the leaf `cur` read from `tails[idx]` and returns its payload.
    fn remove(&self, idx: usize, cur: Shared<'_, Node<T>>, guard: &Guard) -> Option<Content<T>> {
        let cur_ref = unsafe { cur.deref() };
        if cur_ref.op == Op::Sentinel {
            return None;
        }
        let desc = self.acquire(cur_ref, guard)?;
        if self.tails[idx].load(Ordering::Acquire, guard) != cur {
            release(desc);
            return None;
        }
        if !self.is_leaf(cur, guard) {
            self.prune(idx, cur, guard);
            release(desc);
            return None;
        }
        let prev = cur_ref.prev.load(Ordering::Relaxed, guard);
        let prev_ref = unsafe { prev.deref() };
        let Some(prev_desc) = self.acquire(prev_ref, guard) else {
            release(desc);
            return None;
        };
        self.tails[idx].store(prev, Ordering::Release);
        prev_ref.children.fetch_sub(1, Ordering::Relaxed);
        let content = match &cur_ref.ticket {
            Some(slot) => Content::Ticket(slot.clone()),
            None => Content::Value(unsafe { (*cur_ref.value.get()).assume_init_read() }),
        };
        release(prev_desc);
        release(desc);
        unsafe { guard.defer_destroy(cur) };
        Some(content)
    }

    /// Publishes `elem` as a fork request and waits for it to be linked.
    /// Returns `false` if the request was withdrawn unlinked.
    fn request_fork(&self, elem: Shared<'_, Node<T>>, guard: &Guard) -> bool {
        if self
            .fork_request
            .compare_exchange(
                Shared::null(),
                elem,
                Ordering::AcqRel,
                Ordering::Relaxed,
                guard,
            )
            .is_err()
        {
            return false;
        }
        let linked = || unsafe { elem.deref() }.linked.load(Ordering::Acquire);
        let backoff = Backoff::new();
        for _ in 0..FORK_WAIT {
            if linked() {
                return true;
            }
            backoff.snooze();
        }
        if self
            .fork_request
            .compare_exchange(
                elem,
                Shared::null(),
                Ordering::AcqRel,
                Ordering::Relaxed,
                guard,
            )
            .is_ok()
        {
            return false;
        }
        // Claimed by an inserter that is finishing the link right now.
        while !linked() {
            std::thread::yield_now();
        }
        true
    }

    pub fn push(&self, value: T) {
        // An unused elem may have sat in fork_request, so it is retired
        // through the epoch rather than freed directly.
        let guard = &epoch::pin();
        let elem = Owned::new(Node::new(Op::Push, None)).into_shared(guard);
        let elem_ref = unsafe { elem.deref() };
        let mut value = value;
        let mut loops = 0;
        loop {
            let (idx, cur) = self.random_tail(guard);
            if unsafe { cur.deref() }.op == Op::Pop {
                if let Some(Content::Ticket(slot)) = self.remove(idx, cur, guard) {
                    match slot.fulfill(value) {
                        Ok(()) => {
                            unsafe { guard.defer_destroy(elem) };
                            return;
                        }
                        // The waiting pop was cancelled; its node is now gone.
                        Err(v) => {
                            value = v;
                            continue;
                        }
                    }
                }
            } else {
                // elem is private until insert succeeds.
                unsafe { (*elem_ref.value.get()).write(value) };
                if self.insert(idx, cur, elem, guard) {
                    return;
                }
                value = unsafe { (*elem_ref.value.get()).assume_init_read() };
            }
            loops += 1;
            if loops > self.fail_threshold {
                loops = 0;
                unsafe { (*elem_ref.value.get()).write(value) };
                if self.request_fork(elem, guard) {
                    return;
                }
                value = unsafe { (*elem_ref.value.get()).assume_init_read() };
            }
        }
    }

    /// Removes a value if one is present, otherwise leaves a pending request
    /// that the next push fulfills.
    pub fn pop(&self) -> Ticket<T> {
        let guard = &epoch::pin();
        let slot = Slot::pending();
        let elem = Owned::new(Node::new(Op::Pop, Some(slot.clone()))).into_shared(guard);
        let mut loops = 0;
        loop {
            let (idx, cur) = self.random_tail(guard);
            if unsafe { cur.deref() }.op == Op::Push {
                if let Some(Content::Value(v)) = self.remove(idx, cur, guard) {
                    unsafe { guard.defer_destroy(elem) };
                    return Ticket::ready(v);
                }
            } else if self.insert(idx, cur, elem, guard) {
                return Ticket::from_slot(slot);
            }
            loops += 1;
            if loops > self.fail_threshold {
                loops = 0;
                if self.request_fork(elem, guard) {
                    return Ticket::from_slot(slot);
                }
            }
        }
    }

    /// Structural snapshot; requires exclusive access so the tree is quiescent.
    pub fn shape(&mut self) -> Result<TreeShape, ShapeError> {
        let guard = unsafe { epoch::unprotected() };
        let mut seen: HashSet<*const Node<T>> = HashSet::new();
        let mut child_count: HashMap<*const Node<T>, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut tail_refs: HashMap<*const Node<T>, usize> = HashMap::new();
        let mut tails_in_use = 0;
        for t in self.tails.iter() {
            let mut n = t.load(Ordering::Acquire, guard);
            if n.is_null() {
                continue;
            }
            tails_in_use += 1;
            *tail_refs.entry(n.as_raw()).or_default() += 1;
            while !n.is_null() && seen.insert(n.as_raw()) {
                nodes.push(n);
                let prev = unsafe { n.deref() }.prev.load(Ordering::Acquire, guard);
                if !prev.is_null() {
                    *child_count.entry(prev.as_raw()).or_default() += 1;
                }
                n = prev;
            }
        }
        if tails_in_use == 0 {
            return Err(ShapeError::NoTails);
        }
        let mut kind = None;
        let mut sentinels = 0;
        let mut leaves = 0;
        let mut pending_pops = 0;
        for &n in &nodes {
            let r = unsafe { n.deref() };
            let recorded = r.children.load(Ordering::Relaxed);
            let actual = child_count.get(&n.as_raw()).copied().unwrap_or(0);
            if recorded != actual {
                return Err(ShapeError::ChildCount { recorded, actual });
            }
            if unsafe { r.desc.load(Ordering::Acquire, guard).deref() }
                .active
                .load(Ordering::Acquire)
            {
                return Err(ShapeError::ActiveDescriptor);
            }
            if actual == 0 {
                leaves += 1;
                if !tail_refs.contains_key(&n.as_raw()) {
                    return Err(ShapeError::UntrackedLeaf);
                }
            }
            match r.op {
                Op::Sentinel => sentinels += 1,
                op => {
                    if kind.is_some_and(|k| k != op) {
                        return Err(ShapeError::MixedKinds);
                    }
                    kind = Some(op);
                    if op == Op::Pop {
                        pending_pops += 1;
                    }
                }
            }
        }
        if sentinels != 1 {
            return Err(ShapeError::Sentinels(sentinels));
        }
        Ok(TreeShape {
            nodes: nodes.len() - 1,
            leaves,
            tails_in_use,
            kind,
            pending_pops,
        })
    }
}

/// Result of [`QStack::shape`]. Node counts exclude the sentinel root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeShape {
    pub nodes: usize,
    pub leaves: usize,
    pub tails_in_use: usize,
    pub kind: Option<Op>,
    /// Live pop nodes, cancelled ones included.
    pub pending_pops: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeError {
    NoTails,
    ChildCount { recorded: usize, actual: usize },
    ActiveDescriptor,
    UntrackedLeaf,
    MixedKinds,
    Sentinels(usize),
}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeError::NoTails => f.write_str("no tail slot is in use"),
            ShapeError::ChildCount { recorded, actual } => {
                write!(
                    f,
                    "child count {recorded} but {actual} children link to the node"
                )
            }
            ShapeError::ActiveDescriptor => f.write_str("descriptor still active at quiescence"),
            ShapeError::UntrackedLeaf => f.write_str("leaf without a tail"),
            ShapeError::MixedKinds => f.write_str("push and pop nodes are both live"),
            ShapeError::Sentinels(n) => write!(f, "{n} sentinel nodes reachable"),
        }
    }
}

impl std::error::Error for ShapeError {}

impl<T> Drop for QStack<T> {
    fn drop(&mut self) {
        unsafe {
            let guard = epoch::unprotected();
            let mut all = HashSet::new();
            for t in self.tails.iter() {
                let mut n = t.load(Ordering::Relaxed, guard);
                while !n.is_null() && all.insert(n.as_raw()) {
                    n = n.deref().prev.load(Ordering::Relaxed, guard);
                }
            }
            for raw in all {
                let node = Shared::from(raw).into_owned();
                if node.op == Op::Push {
                    (*node.value.get()).assume_init_drop();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ticket::TicketState;

    fn narrow() -> QStack<u64> {
        QStack::with_config(QStackConfig {
            width: 1,
            fail_threshold: 8,
        })
    }

    #[test]
    fn sequential_lifo() {
        let mut s = narrow();
        for v in 1..=3 {
            s.push(v);
        }
        assert_eq!(s.shape().unwrap().nodes, 3);
        let got: Vec<u64> = (0..3).map(|_| s.pop().wait().unwrap()).collect();
        assert_eq!(got, vec![3, 2, 1]);
        assert_eq!(s.shape().unwrap().nodes, 0);
    }

    #[test]
    fn pop_on_empty_is_pending_then_fulfilled() {
        let mut s = narrow();
        let mut t = s.pop();
        assert_eq!(t.state(), TicketState::Pending);
        assert_eq!(s.shape().unwrap().pending_pops, 1);
        s.push(9);
        assert_eq!(t.try_take(), Some(9));
        assert_eq!(s.shape().unwrap().nodes, 0);
    }

    #[test]
    fn two_pending_pops_get_both_values() {
        let s = narrow();
        let a = s.pop();
        let b = s.pop();
        s.push(4);
        s.push(5);
        let mut got = vec![a.wait().unwrap(), b.wait().unwrap()];
        got.sort();
        assert_eq!(got, vec![4, 5]);
    }

    #[test]
    fn cancelled_pop_is_skipped() {
        let mut s = narrow();
        let t = s.pop();
        assert!(t.cancel());
        assert!(!t.cancel());
        s.push(1);
        assert_eq!(t.state(), TicketState::Cancelled);
        let shape = s.shape().unwrap();
        assert_eq!((shape.nodes, shape.kind), (1, Some(Op::Push)));
        assert_eq!(s.pop().wait(), Some(1));
    }

    #[test]
    fn cancel_after_fulfilment_fails() {
        let s = narrow();
        s.push(7);
        let t = s.pop();
        assert!(t.is_fulfilled());
        assert!(!t.cancel());
    }

    #[test]
    fn insert_over_active_descriptor_fails() {
        let mut s = narrow();
        s.push(1);
        {
            let guard = &epoch::pin();
            let cur = s.tails[0].load(Ordering::Acquire, guard);
            let d = s.acquire(unsafe { cur.deref() }, guard).unwrap();
            let elem = Owned::new(Node::new(Op::Push, None)).into_shared(guard);
            unsafe { (*elem.deref().value.get()).write(2) };
            assert!(!s.insert(0, cur, elem, guard));
            assert!(s.remove(0, cur, guard).is_none());
            release(d);
            drop(unsafe { elem.into_owned() });
        }
        assert_eq!(s.shape().unwrap().nodes, 1);
    }

    #[test]
    fn fork_request_creates_a_branch_and_pruning_frees_it() {
        let mut s = QStack::with_config(QStackConfig {
            width: 2,
            fail_threshold: 1,
        });
        s.push(1);
        {
            let guard = &epoch::pin();
            let helper = Owned::new(Node::new(Op::Push, None)).into_shared(guard);
            unsafe { (*helper.deref().value.get()).write(2) };
            s.fork_request.store(helper, Ordering::Release);
            s.push(3);
            assert!(unsafe { helper.deref() }.linked.load(Ordering::Acquire));
        }
        let shape = s.shape().unwrap();
        assert_eq!((shape.nodes, shape.leaves, shape.tails_in_use), (3, 2, 2));

        let mut got: Vec<u64> = (0..3).map(|_| s.pop().wait().unwrap()).collect();
        got.sort();
        assert_eq!(got, vec![1, 2, 3]);
        let shape = s.shape().unwrap();
        assert_eq!((shape.nodes, shape.tails_in_use), (0, 1));
        s.push(4);
        s.push(5);
        let shape = s.shape().unwrap();
        assert_eq!(shape.nodes, 2);
    }

    #[test]
    fn fork_without_free_slot_stacks_on_elem() {
        let mut s = narrow();
        s.push(1);
        {
            let guard = &epoch::pin();
            let helper = Owned::new(Node::new(Op::Push, None)).into_shared(guard);
            unsafe { (*helper.deref().value.get()).write(2) };
            s.fork_request.store(helper, Ordering::Release);
            s.push(3);
        }
        let shape = s.shape().unwrap();
        assert_eq!((shape.nodes, shape.tails_in_use), (3, 1));
        assert_eq!(s.pop().wait(), Some(2));
    }

    #[test]
    fn drop_releases_values() {
        let marker = Arc::new(());
        let s = QStack::with_config(QStackConfig {
            width: 4,
            fail_threshold: 2,
        });
        for _ in 0..10 {
            s.push(marker.clone());
        }
        drop(s.pop());
        drop(s);
        assert_eq!(Arc::strong_count(&marker), 1);
    }

    #[test]
    fn concurrent_push_pop_conserves() {
        let threads = 4;
        let per = 2_000u64;
        let mut s = QStack::with_config(QStackConfig {
            width: 4,
            fail_threshold: 2,
        });
        let popped: Vec<Vec<u64>> = std::thread::scope(|sc| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let s = &s;
                    sc.spawn(move || {
                        crate::rng::seed_current_thread(1, t);
                        let mut tickets = Vec::new();
                        for i in 0..per {
                            s.push((t << 32) | i);
                            tickets.push(s.pop());
                        }
                        tickets.into_iter().map(|t| t.wait().unwrap()).collect()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut all: Vec<u64> = popped.into_iter().flatten().collect();
        all.sort();
        let mut expected: Vec<u64> = (0..threads)
            .flat_map(|t| (0..per).map(move |i| (t << 32) | i))
            .collect();
        expected.sort();
        assert_eq!(all, expected);
        assert_eq!(s.shape().unwrap().nodes, 0);
    }
}
