//! Dense tensor view of a history.
//!
//! A history becomes a vector indexed by (item, object, process, method) with
//! the item index varying fastest. Folding it gives an order-4 tensor whose
//! mode-1 fibers are consecutive length-`I` segments. Summing out the process
//! and method modes leaves the item × object matrix; the history (without
//! readers) is quantifiable exactly when every entry of that matrix is
//! non-negative.
//!
//! In 1-based terms, entry `(i1, i2, i3, i4)` sits at
//! `j = i1 + (i2-1)·I + (i3-1)·I·O + (i4-1)·I·O·P`. The API here is 0-based,
//! so `(a, b, c, d)` sits at `a + b·I + c·I·O + d·I·O·P`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::history::{Config, History, Item, MethodKind, ObjectId, ThreadId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("vector has length {found} but the shape needs {expected}")]
    Shape { expected: usize, found: usize },
    #[error("dimension sizes must be positive")]
    ZeroDim,
    #[error("can only sum over a nonempty subset of the process and method modes")]
    InvalidModes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Item,
    Object,
    Process,
    Method,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Item => "I",
            Mode::Object => "O",
            Mode::Process => "P",
            Mode::Method => "M",
        })
    }
}

/// Sizes of the item, object, process and method modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorShape {
    pub items: usize,
    pub objects: usize,
    pub processes: usize,
    pub methods: usize,
}

impl TensorShape {
    pub fn new(items: usize, objects: usize, processes: usize, methods: usize) -> Self {
        TensorShape {
            items,
            objects,
            processes,
            methods,
        }
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.items, self.objects, self.processes, self.methods]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.items, self.objects, self.processes, self.methods
        )
    }
}

/// Dense tensor in first-index-fastest layout with named modes.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryTensor {
    modes: Vec<Mode>,
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl HistoryTensor {
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry at 0-based multi-index `idx` (one coordinate per mode).
    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.dims.len(), "index order mismatch");
        let mut j = 0;
        let mut stride = 1;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            assert!(i < d, "index out of bounds");
            j += i * stride;
            stride *= d;
        }
        self.data[j]
    }

    /// Mode-1 fibers: consecutive segments of length equal to the first dimension.
    pub fn fibers(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dims[0].max(1))
    }

    /// The underlying vector.
    pub fn unfold(&self) -> Vec<f64> {
        self.data.clone()
    }

    fn sum_mode(&self, mode: Mode, abs: bool) -> HistoryTensor {
        let Some(axis) = self.modes.iter().position(|&m| m == mode) else {
            return self.clone();
        };
        let inner: usize = self.dims[..axis].iter().product();
        let n = self.dims[axis];
        let outer: usize = self.dims[axis + 1..].iter().product();
        let mut data = vec![0.0; inner * outer];
        for o in 0..outer {
            for k in 0..n {
                let src = &self.data[(o * n + k) * inner..(o * n + k + 1) * inner];
                let dst = &mut data[o * inner..(o + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += if abs { s.abs() } else { s };
                }
            }
        }
        let mut modes = self.modes.clone();
        let mut dims = self.dims.clone();
        modes.remove(axis);
        dims.remove(axis);
        HistoryTensor { modes, dims, data }
    }
}

/// Folds `vector` into an order-4 tensor of the given shape.
pub fn fold(vector: &[f64], shape: TensorShape) -> Result<HistoryTensor, TensorError> {
    if shape.dims().contains(&0) {
        return Err(TensorError::ZeroDim);
    }
    if vector.len() != shape.len() {
        return Err(TensorError::Shape {
            expected: shape.len(),
            found: vector.len(),
        });
    }
    Ok(HistoryTensor {
        modes: vec![Mode::Item, Mode::Object, Mode::Process, Mode::Method],
        dims: shape.dims().to_vec(),
        data: vector.to_vec(),
    })
}

/// Sums out the named modes, which must be a nonempty subset of process and method.
pub fn sum_over(tensor: &HistoryTensor, modes: &[Mode]) -> Result<HistoryTensor, TensorError> {
    if modes.is_empty()
        || modes
            .iter()
            .any(|m| !matches!(m, Mode::Process | Mode::Method))
    {
        return Err(TensorError::InvalidModes);
    }
    let set: BTreeSet<Mode> = modes.iter().copied().collect();
    let mut t = tensor.clone();
    for m in set {
        t = t.sum_mode(m, false);
    }
    Ok(t)
}

/// Sums of absolute values over the process and method modes.
pub fn heatmap(tensor: &HistoryTensor) -> HistoryTensor {
    tensor
        .sum_mode(Mode::Method, true)
        .sum_mode(Mode::Process, true)
}

/// True when every entry of the reduced matrix is non-negative.
pub fn is_quantifiable_matrix(matrix: &HistoryTensor) -> bool {
    matrix.data.iter().all(|&v| v >= 0.0)
}

/// A history laid out as a vector, with the labels of each mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Vectorized {
    pub vector: Vec<f64>,
    pub shape: TensorShape,
    pub items: Vec<Option<Item>>,
    pub objects: Vec<ObjectId>,
    pub threads: Vec<ThreadId>,
    pub kinds: Vec<MethodKind>,
}

impl Vectorized {
    pub fn tensor(&self) -> HistoryTensor {
        fold(&self.vector, self.shape).expect("vectorize produces a consistent shape")
    }
}

fn pos<T: PartialEq>(v: &[T], x: T) -> usize {
    v.iter()
        .position(|y| *y == x)
        .expect("label collected above")
}

/// Lays out the completed calls of `history` over sorted items, objects and
/// threads and the method kinds present (producer, consumer, reader, writer).
///
/// Producers add 1 and consumers subtract 1 at their own cell. A writer adds 1
/// at its new value and subtracts 1 at its previous value (nothing if they are
/// equal). The `t`-th reader of a configuration adds `-(1/2)^t`.
pub fn vectorize(history: &History) -> Vectorized {
    let completed: Vec<_> = history.calls().iter().filter(|c| !c.is_pending()).collect();
    let mut items = BTreeSet::new();
    let mut objects = BTreeSet::new();
    let mut threads = BTreeSet::new();
    let mut kinds = BTreeSet::new();
    for c in &completed {
        objects.insert(c.object);
        threads.insert(c.thread);
        kinds.insert(c.kind);
        match c.kind {
            MethodKind::Producer => {
                items.insert(c.item_in);
            }
            MethodKind::Consumer | MethodKind::Reader => {
                items.insert(c.item_out);
            }
            MethodKind::Writer => {
                items.insert(c.item_in);
                items.insert(c.prev);
            }
        }
    }
    let items: Vec<_> = items.into_iter().collect();
    let objects: Vec<_> = objects.into_iter().collect();
    let threads: Vec<_> = threads.into_iter().collect();
    let kinds: Vec<_> = kinds.into_iter().collect();
    let item_ix: HashMap<Option<Item>, usize> =
        items.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let shape = TensorShape::new(
        items.len().max(1),
        objects.len().max(1),
        threads.len().max(1),
        kinds.len().max(1),
    );
    let mut vector = vec![0.0; shape.len()];
    let mut reads: BTreeMap<Config, i32> = BTreeMap::new();
    for c in &completed {
        let o = pos(&objects, c.object);
        let p = pos(&threads, c.thread);
        let m = pos(&kinds, c.kind);
        let at = |item: Option<Item>| {
            item_ix[&item] + shape.items * (o + shape.objects * (p + shape.processes * m))
        };
        match c.kind {
            MethodKind::Producer => vector[at(c.item_in)] += 1.0,
            MethodKind::Consumer => vector[at(c.item_out)] -= 1.0,
            MethodKind::Reader => {
                let t = reads.entry(Config::new(c.object, c.item_out)).or_default();
                *t += 1;
                vector[at(c.item_out)] -= 0.5f64.powi(*t);
            }
            MethodKind::Writer => {
                if c.item_in != c.prev {
                    vector[at(c.item_in)] += 1.0;
                    vector[at(c.prev)] -= 1.0;
                }
            }
        }
    }
    Vectorized {
        vector,
        shape,
        items,
        objects,
        threads,
        kinds,
    }
}
