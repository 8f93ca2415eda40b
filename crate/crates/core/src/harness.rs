//! Workloads, throughput measurement and the inversion-entropy pipeline.
//!
//! Benchmark histories are stamped with a shared logical clock (see
//! [`Recorder::logical`]): every invocation and response takes the next value
//! of a global counter. A producer's response stamp is therefore its arrival
//! rank, and single-threaded runs are reproducible bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Barrier;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{MsQueue, TreiberStack};
use crate::history::{
    History, HistoryError, Item, MethodCall, MethodKind, Recorder, ThreadId, ThreadRecorder,
};
use crate::qqueue::{QQueue, QQueueConfig};
use crate::qstack::{QStack, QStackConfig};
use crate::rng::seed_current_thread;
use crate::ticket::Ticket;

/// All structures are benchmarked as object 0.
pub const OBJECT: u64 = 0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid workload: {0}")]
    InvalidSpec(String),
    #[error("entropy of an empty count sequence is undefined")]
    EmptyCounts,
    #[error("item {0} is produced more than once; ranks need distinct payloads")]
    DuplicateItem(Item),
    #[error("item {0} is consumed but never produced")]
    UnrankedItem(Item),
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    QStack,
    QQueue,
    Treiber,
    BaseQueue,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::QStack => "qstack",
            Structure::QQueue => "qqueue",
            Structure::Treiber => "treiber",
            Structure::BaseQueue => "baseq",
        }
    }

    pub fn discipline(self) -> Discipline {
        match self {
            Structure::QStack | Structure::Treiber => Discipline::Lifo,
            Structure::QQueue | Structure::BaseQueue => Discipline::Fifo,
        }
    }

    pub fn is_quantifiable(self) -> bool {
        matches!(self, Structure::QStack | Structure::QQueue)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qstack" => Ok(Structure::QStack),
            "qqueue" => Ok(Structure::QQueue),
            "treiber" => Ok(Structure::Treiber),
            "baseq" => Ok(Structure::BaseQueue),
            _ => Err(format!(
                "unknown structure `{s}` (expected qstack, qqueue, treiber or baseq)"
            )),
        }
    }
}

/// Share of producer calls in a workload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mix {
    /// Each call is a producer with this percentage (25, 50 or 75).
    Random(u8),
    /// Each thread alternates producer, consumer, producer, ...
    Pairwise,
}

impl Mix {
    pub const ALL: [Mix; 4] = [
        Mix::Random(25),
        Mix::Random(50),
        Mix::Random(75),
        Mix::Pairwise,
    ];
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mix::Random(p) => write!(f, "{p}"),
            Mix::Pairwise => f.write_str("pairwise"),
        }
    }
}

impl FromStr for Mix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "25" => Ok(Mix::Random(25)),
            "50" => Ok(Mix::Random(50)),
            "75" => Ok(Mix::Random(75)),
            "pairwise" | "50pw" | "pw" => Ok(Mix::Pairwise),
            _ => Err(format!(
                "unknown mix `{s}` (expected 25, 50, 75 or pairwise)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub structure: Structure,
    pub threads: usize,
    pub ops_per_thread: usize,
    pub mix: Mix,
    pub seed: u64,
    pub prefill: usize,
    pub width: usize,
    pub fail_threshold: usize,
}

impl WorkloadSpec {
    pub fn new(structure: Structure, threads: usize, ops_per_thread: usize) -> Self {
        WorkloadSpec {
            structure,
            threads,
            ops_per_thread,
            mix: Mix::Random(50),
            seed: 0,
            prefill: 0,
            width: threads.max(1),
            fail_threshold: 8,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.threads == 0 {
            return Err(HarnessError::InvalidSpec(
                "threads must be at least 1".into(),
            ));
        }
        if let Mix::Random(p) = self.mix {
            if ![25, 50, 75].contains(&p) {
                return Err(HarnessError::InvalidSpec(format!(
                    "producer percentage {p} is not 25, 50 or 75"
                )));
            }
        }
        if self.width == 0 || self.fail_threshold == 0 {
            return Err(HarnessError::InvalidSpec(
                "width and fail_threshold must be at least 1".into(),
            ));
        }
        if self.threads >= u32::MAX as usize || self.ops_per_thread >= u32::MAX as usize {
            return Err(HarnessError::InvalidSpec(
                "threads or ops out of range".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub spec: WorkloadSpec,
    /// Wall time of the concurrent phase (prefill and drain excluded).
    pub wall_ns: u64,
    /// Calls that returned during the concurrent phase.
    pub completed_calls: u64,
    /// `completed_calls` per microsecond of `wall_ns`.
    pub throughput_ops_per_us: f64,
    pub per_thread_ops: Vec<u64>,
    /// Producer and consumer calls before the drain, prefill included.
    pub producers: u64,
    pub consumers: u64,
    /// Baseline consumers that returned nothing.
    pub failed_consumers: u64,
    /// Unfulfilled consumer tickets once the workers had finished.
    pub pending_at_quiescence: u64,
    /// Producer calls issued by the drain.
    pub drained: u64,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str =
        "structure,threads,ops_per_thread,mix,seed,width,throughput_ops_per_us,wall_ns";

    pub fn csv_row(&self) -> String {
        let s = &self.spec;
        format!(
            "{},{},{},{},{},{},{:.6},{}",
            s.structure,
            s.threads,
            s.ops_per_thread,
            s.mix,
            s.seed,
            s.width,
            self.throughput_ops_per_us,
            self.wall_ns
        )
    }
}

enum Consumed {
    Value(u64),
    Empty,
    Pending(Ticket<u64>),
}

/// Uniform view of the four structures for the workers.
enum Target {
    QStack(QStack<u64>),
    QQueue(QQueue<u64>),
    Treiber(TreiberStack<u64>),
    BaseQueue(MsQueue<u64>),
}

impl Target {
    fn new(spec: &WorkloadSpec) -> Self {
        match spec.structure {
            Structure::QStack => Target::QStack(QStack::with_config(QStackConfig {
                width: spec.width,
                fail_threshold: spec.fail_threshold,
            })),
            Structure::QQueue => {
                Target::QQueue(QQueue::with_config(QQueueConfig { width: spec.width }))
            }
            Structure::Treiber => Target::Treiber(TreiberStack::new()),
            Structure::BaseQueue => Target::BaseQueue(MsQueue::new()),
        }
    }

    fn produce(&self, v: u64) {
        match self {
            Target::QStack(s) => s.push(v),
            Target::QQueue(q) => q.enqueue(v),
            Target::Treiber(s) => s.push(v),
            Target::BaseQueue(q) => q.enqueue(v),
        }
    }

    fn consume(&self) -> Consumed {
        let ticket = match self {
            Target::QStack(s) => s.pop(),
            Target::QQueue(q) => q.dequeue(),
            Target::Treiber(s) => return s.pop().map_or(Consumed::Empty, Consumed::Value),
            Target::BaseQueue(q) => return q.dequeue().map_or(Consumed::Empty, Consumed::Value),
        };
        let mut ticket = ticket;
        match ticket.try_take() {
            Some(v) => Consumed::Value(v),
            None => Consumed::Pending(ticket),
        }
    }
}

/// Payload `counter` of thread `thread`; distinct across the whole run.
fn payload(thread: usize, counter: u64) -> u64 {
    ((thread as u64 + 1) << 32) | counter
}

struct Worker<'r> {
    rec: ThreadRecorder<'r>,
    index: usize,
    counter: u64,
    pending: Vec<(usize, Ticket<u64>)>,
    producers: u64,
    consumers: u64,
    failed: u64,
    completed: u64,
}

impl<'r> Worker<'r> {
    fn new(recorder: &'r Recorder, index: usize) -> Self {
        Worker {
            rec: recorder.thread(index as ThreadId),
            index,
            counter: 0,
            pending: Vec::new(),
            producers: 0,
            consumers: 0,
            failed: 0,
            completed: 0,
        }
    }

    fn produce(&mut self, target: &Target) {
        let v = payload(self.index, self.counter);
        self.counter += 1;
        let invoke = self.rec.now_ns();
        target.produce(v);
        let response = self.rec.now_ns();
        self.rec
            .record(MethodCall::producer(0, OBJECT, v as Item).at(invoke, response));
        self.producers += 1;
        self.completed += 1;
    }

    fn consume(&mut self, target: &Target) {
        let invoke = self.rec.now_ns();
        let got = target.consume();
        let response = self.rec.now_ns();
        self.consumers += 1;
        match got {
            Consumed::Value(v) => {
                self.rec
                    .record(MethodCall::consumer(0, OBJECT, v as Item).at(invoke, response));
                self.completed += 1;
            }
            Consumed::Empty => {
                self.rec
                    .record(MethodCall::failed_consumer(0, OBJECT).at(invoke, response));
                self.failed += 1;
                self.completed += 1;
            }
            Consumed::Pending(ticket) => {
                let mut call = MethodCall::pending_consumer(0, OBJECT);
                call.invoke_ns = invoke;
                let idx = self.rec.record(call);
                self.pending.push((idx, ticket));
            }
        }
    }

    /// Marks pending consumers whose tickets have meanwhile been fulfilled.
    fn settle(&mut self) {
        let rec = &mut self.rec;
        self.pending
            .retain_mut(|(idx, ticket)| match ticket.try_take() {
                Some(v) => {
                    let now = rec.now_ns();
                    rec.complete(*idx, Some(v as Item), now);
                    false
                }
                None => true,
            });
    }
}

struct Totals {
    wall_ns: u64,
    completed: u64,
    per_thread: Vec<u64>,
    producers: u64,
    consumers: u64,
    failed: u64,
}

/// Spawns one worker per thread, runs `body` in each behind a start barrier,
/// then drains pending consumers from the driver thread. `body` receives a
/// barrier shared by the workers only, for phased workloads.
fn run_workers<F>(spec: &WorkloadSpec, body: F) -> Result<(BenchReport, History), HarnessError>
where
    F: Fn(&mut Worker<'_>, &Target, &mut ChaCha8Rng, &Barrier) + Sync,
{
    spec.validate()?;
    let recorder = Recorder::logical();
    let target = Target::new(spec);
    let driver_id = spec.threads;
    seed_current_thread(spec.seed, driver_id as u64);
    let mut driver = Worker::new(&recorder, driver_id);
    for _ in 0..spec.prefill {
        driver.produce(&target);
    }
    let prefill_producers = driver.producers;

    let barrier = Barrier::new(spec.threads + 1);
    let phase = Barrier::new(spec.threads);
    let (mut workers, wall_ns) = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..spec.threads)
            .map(|t| {
                let (recorder, target, barrier, phase, body) =
                    (&recorder, &target, &barrier, &phase, &body);
                scope.spawn(move || {
                    seed_current_thread(spec.seed, t as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream(t as u64);
                    let mut w = Worker::new(recorder, t);
                    barrier.wait();
                    body(&mut w, target, &mut rng, phase);
                    w
                })
            })
            .collect();
        barrier.wait();
        let start = Instant::now();
        let workers: Vec<Worker<'_>> = handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect();
        (workers, start.elapsed().as_nanos() as u64)
    });

    let totals = Totals {
        wall_ns,
        completed: workers.iter().map(|w| w.completed).sum(),
        per_thread: workers.iter().map(|w| w.producers + w.consumers).collect(),
        producers: prefill_producers + workers.iter().map(|w| w.producers).sum::<u64>(),
        consumers: workers.iter().map(|w| w.consumers).sum(),
        failed: workers.iter().map(|w| w.failed).sum(),
    };

    for w in workers.iter_mut() {
        w.settle();
    }
    let pending: u64 = workers.iter().map(|w| w.pending.len() as u64).sum();
    for _ in 0..pending {
        driver.produce(&target);
    }
    for w in workers.iter_mut() {
        for (idx, ticket) in std::mem::take(&mut w.pending) {
            let v = ticket.wait().expect("drain fulfils every pending ticket");
            let now = w.rec.now_ns();
            w.rec.complete(idx, Some(v as Item), now);
        }
    }
    let drained = driver.producers - prefill_producers;
    drop(workers);
    drop(driver);
    let history = recorder.merge()?;

    let throughput = if totals.wall_ns == 0 {
        0.0
    } else {
        totals.completed as f64 / (totals.wall_ns as f64 / 1_000.0)
    };
    let report = BenchReport {
        spec: *spec,
        wall_ns: totals.wall_ns,
        completed_calls: totals.completed,
        throughput_ops_per_us: throughput,
        per_thread_ops: totals.per_thread,
        producers: totals.producers,
        consumers: totals.consumers,
        failed_consumers: totals.failed,
        pending_at_quiescence: pending,
        drained,
    };
    Ok((report, history))
}

/// Random (or pairwise) mix of producers and consumers on every thread,
/// followed by a drain that fulfills every pending consumer.
pub fn run_bench(spec: &WorkloadSpec) -> Result<(BenchReport, History), HarnessError> {
    let mix = spec.mix;
    let ops = spec.ops_per_thread;
    run_workers(spec, |w, target, rng, _| {
        for i in 0..ops {
            let produce = match mix {
                Mix::Pairwise => i % 2 == 0,
                Mix::Random(p) => rng.random_range(0..100u8) < p,
            };
            if produce {
                w.produce(target);
            } else {
                w.consume(target);
            }
        }
    })
}

/// Every thread produces `ops_per_thread` items; after all threads finish,
/// every thread consumes `ops_per_thread` items. `mix` is ignored.
pub fn run_fill_drain(spec: &WorkloadSpec) -> Result<(BenchReport, History), HarnessError> {
    let ops = spec.ops_per_thread;
    run_workers(spec, |w, target, _, barrier| {
        for _ in 0..ops {
            w.produce(target);
        }
        barrier.wait();
        for _ in 0..ops {
            w.consume(target);
        }
    })
    .map(|(mut report, history)| {
        report.spec.mix = Mix::Pairwise;
        (report, history)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discipline {
    Lifo,
    Fifo,
}

impl FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lifo" => Ok(Discipline::Lifo),
            "fifo" => Ok(Discipline::Fifo),
            _ => Err(format!("unknown discipline `{s}` (expected lifo or fifo)")),
        }
    }
}

/// `x(j) = #{i < j : a_i > a_j} + #{i > j : a_i < a_j}` for distinct values,
/// by a merge sort that credits both elements of every inverted pair.
pub fn inversions(ranks: &[i64]) -> Vec<u64> {
    let n = ranks.len();
    let mut counts = vec![0u64; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut buf = vec![0usize; n];
    let mut width = 1;
    while width < n {
        for lo in (0..n).step_by(2 * width) {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid || j < hi {
                if j >= hi || (i < mid && ranks[order[i]] < ranks[order[j]]) {
                    // Right-half elements already placed are smaller and later.
                    counts[order[i]] += (j - mid) as u64;
                    buf[k] = order[i];
                    i += 1;
                } else {
                    // Left-half elements still waiting are larger and earlier.
                    counts[order[j]] += (mid - i) as u64;
                    buf[k] = order[j];
                    j += 1;
                }
                k += 1;
            }
        }
        std::mem::swap(&mut order, &mut buf);
        width *= 2;
    }
    counts
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionStats {
    pub counts: Vec<u64>,
    /// `(inversion count, frequency, probability)` in ascending count order.
    pub distribution: Vec<(u64, u64, f64)>,
    pub entropy_bits: f64,
}

impl InversionStats {
    pub fn max_inversion(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("inversion_count,frequency,probability\n");
        for (x, k, p) in &self.distribution {
            out.push_str(&format!("{x},{k},{p}\n"));
        }
        out.push_str(&format!("# entropy_bits={}\n", self.entropy_bits));
        out
    }
}

/// Distribution of the inversion counts and its Shannon entropy in bits.
pub fn entropy(counts: &[u64]) -> Result<InversionStats, HarnessError> {
    if counts.is_empty() {
        return Err(HarnessError::EmptyCounts);
    }
    let mut freq: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in counts {
        *freq.entry(x).or_default() += 1;
    }
    let n = counts.len() as f64;
    let distribution: Vec<(u64, u64, f64)> = freq
        .into_iter()
        .map(|(x, k)| (x, k, k as f64 / n))
        .collect();
    let h: f64 = distribution.iter().map(|&(_, _, p)| -p * p.log2()).sum();
    // A point mass sums to -0.0; report it as 0.
    let entropy_bits = if distribution.len() == 1 {
        0.0
    } else {
        h.max(0.0)
    };
    Ok(InversionStats {
        counts: counts.to_vec(),
        distribution,
        entropy_bits,
    })
}

/// Ranks produced items by producer completion order, then lists those ranks
/// in consumer completion order. LIFO ranks are negated so that an exact
/// reversal (fill then drain) has no inversions.
pub fn rank_and_order(history: &History, discipline: Discipline) -> Result<Vec<i64>, HarnessError> {
    let completed = |kind| {
        let mut calls: Vec<&MethodCall> = history
            .calls()
            .iter()
            .filter(|c| c.kind == kind && !c.is_pending())
            .collect();
        calls.sort_by_key(|c| (c.response_ns, c.seq));
        calls
    };
    let mut rank: HashMap<Item, i64> = HashMap::new();
    for (r, c) in completed(MethodKind::Producer).into_iter().enumerate() {
        let item = c.item_in.expect("producer carries item_in");
        if rank.insert(item, r as i64).is_some() {
            return Err(HarnessError::DuplicateItem(item));
        }
    }
    completed(MethodKind::Consumer)
        .into_iter()
        .filter_map(|c| c.item_out)
        .map(|item| {
            let r = *rank.get(&item).ok_or(HarnessError::UnrankedItem(item))?;
            Ok(match discipline {
                Discipline::Fifo => r,
                Discipline::Lifo => -r,
            })
        })
        .collect()
}

/// Inversion statistics of a recorded history under the given discipline.
pub fn history_entropy(
    history: &History,
    discipline: Discipline,
) -> Result<InversionStats, HarnessError> {
    entropy(&inversions(&rank_and_order(history, discipline)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_inversions;
    use crate::verifier::verify;

    #[test]
    fn inversion_examples() {
        assert_eq!(inversions(&[1, 2, 3]), vec![0, 0, 0]);
        assert_eq!(inversions(&[2, 1, 3]), vec![1, 1, 0]);
        assert_eq!(inversions(&[3, 2, 1]), vec![2, 2, 2]);
        assert!(inversions(&[]).is_empty());
        let seq = [5, -1, 9, 3, 0, 7, 2];
        assert_eq!(inversions(&seq), brute_inversions(&seq));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0, 0, 0]).unwrap().entropy_bits, 0.0);
        assert!(entropy(&[2, 2, 2]).unwrap().entropy_bits.is_sign_positive());
        let s = entropy(&[1, 1, 0]).unwrap();
        assert!((s.entropy_bits - 0.9183).abs() < 1e-4);
        assert_eq!(s.distribution[0], (0, 1, 1.0 / 3.0));
        assert!(matches!(entropy(&[]), Err(HarnessError::EmptyCounts)));
    }

    #[test]
    fn stats_csv() {
        let csv = entropy(&[1, 1, 0]).unwrap().to_csv();
        assert!(csv.starts_with("inversion_count,frequency,probability\n0,1,"));
        assert!(csv.contains("# entropy_bits=0.918"));
    }

    #[test]
    fn zero_ops_gives_empty_history() {
        let (report, history) = run_bench(&WorkloadSpec::new(Structure::QStack, 1, 0)).unwrap();
        assert!(history.is_empty());
        assert_eq!(report.throughput_ops_per_us, 0.0);
        assert_eq!(report.completed_calls, 0);
    }

    #[test]
    fn single_thread_is_reproducible_and_quantifiable() {
        for structure in [Structure::QStack, Structure::QQueue] {
            let mut spec = WorkloadSpec::new(structure, 1, 1000);
            spec.seed = 7;
            spec.width = 1;
            let (r1, h1) = run_bench(&spec).unwrap();
            let (r2, h2) = run_bench(&spec).unwrap();
            assert_eq!(h1, h2);
            assert_eq!(r1.per_thread_ops, r2.per_thread_ops);
            assert_eq!(h1.len() as u64, 1000 + r1.drained);
            assert!(verify(&h1).unwrap().quantifiable);
            assert_eq!(
                r1.pending_at_quiescence,
                r1.consumers.saturating_sub(r1.producers)
            );
        }
    }

    #[test]
    fn baseline_failed_pops_break_quantifiability() {
        let mut spec = WorkloadSpec::new(Structure::Treiber, 1, 1000);
        spec.mix = Mix::Random(25);
        let (report, history) = run_bench(&spec).unwrap();
        assert!(report.failed_consumers > 0);
        assert!(!verify(&history).unwrap().quantifiable);
        assert!(
            verify(&history.without_failed_consumers())
                .unwrap()
                .quantifiable
        );
    }

    #[test]
    fn fill_drain_sequential_has_zero_entropy() {
        for structure in [
            Structure::QStack,
            Structure::Treiber,
            Structure::QQueue,
            Structure::BaseQueue,
        ] {
            let mut spec = WorkloadSpec::new(structure, 1, 500);
            spec.width = 1;
            let (_, h) = run_fill_drain(&spec).unwrap();
            let stats = history_entropy(&h, structure.discipline()).unwrap();
            assert_eq!(stats.entropy_bits, 0.0, "{structure}");
            assert_eq!(stats.max_inversion(), 0);
        }
    }

    #[test]
    fn rank_errors() {
        let dup = History::new(vec![
            MethodCall::producer(0, 0, 1),
            MethodCall::producer(0, 0, 1),
        ]);
        assert!(matches!(
            rank_and_order(&dup, Discipline::Fifo),
            Err(HarnessError::DuplicateItem(1))
        ));
        let orphan = History::new(vec![MethodCall::consumer(0, 0, 4)]);
        assert!(matches!(
            rank_and_order(&orphan, Discipline::Lifo),
            Err(HarnessError::UnrankedItem(4))
        ));
    }

    #[test]
    fn spec_validation() {
        let mut spec = WorkloadSpec::new(Structure::QQueue, 0, 10);
        assert!(run_bench(&spec).is_err());
        spec.threads = 1;
        spec.mix = Mix::Random(30);
        assert!(run_bench(&spec).is_err());
        assert_eq!("PAIRWISE".parse::<Mix>(), Ok(Mix::Pairwise));
        assert!("qstak".parse::<Structure>().is_err());
    }
}
