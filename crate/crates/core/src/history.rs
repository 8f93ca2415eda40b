//! Method calls, histories, configuration indexing, per-thread recording and
//! the line-oriented history file format.
//!
//! A history file is UTF-8 with LF line endings. The first line is exactly
//!
//! ```text
//! seq,thread,kind,object,item_in,item_out,prev,invoke_ns,response_ns
//! ```
//!
//! followed by one call per line. `kind` is one of `PROD`, `CONS`, `READ`,
//! `WRIT`; absent payloads and the response of a pending call are empty
//! fields. All numbers are plain decimal integers without quoting.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use thiserror::Error;

/// Item payload carried by producers, consumers, readers and writers.
pub type Item = i64;
/// Identifier of a concurrent object.
pub type ObjectId = u64;
/// Identifier of a process (worker thread).
pub type ThreadId = u32;

pub const HEADER: &str = "seq,thread,kind,object,item_in,item_out,prev,invoke_ns,response_ns";

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("recorder still has {0} active thread buffer(s)")]
    RecorderBusy(usize),
}

/// Classification of a method by its effect on the object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    Producer,
    Consumer,
    Reader,
    Writer,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::Producer,
        MethodKind::Consumer,
        MethodKind::Reader,
        MethodKind::Writer,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MethodKind::Producer => "PROD",
            MethodKind::Consumer => "CONS",
            MethodKind::Reader => "READ",
            MethodKind::Writer => "WRIT",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "PROD" => Some(MethodKind::Producer),
            "CONS" => Some(MethodKind::Consumer),
            "READ" => Some(MethodKind::Reader),
            "WRIT" => Some(MethodKind::Writer),
            _ => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One invocation/response pair.
///
/// A consumer that completed without an item (`item_out == None` with a
/// response) is a failed conditional consumer, as produced by the baseline
/// structures. A call without `response_ns` is pending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodCall {
    pub seq: u64,
    pub thread: ThreadId,
    pub kind: MethodKind,
    pub object: ObjectId,
    pub item_in: Option<Item>,
    pub item_out: Option<Item>,
    pub prev: Option<Item>,
    pub invoke_ns: u64,
    pub response_ns: Option<u64>,
}

impl MethodCall {
    fn bare(thread: ThreadId, kind: MethodKind, object: ObjectId) -> Self {
        MethodCall {
            seq: 0,
            thread,
            kind,
            object,
            item_in: None,
            item_out: None,
            prev: None,
            invoke_ns: 0,
            response_ns: Some(0),
        }
    }

    pub fn producer(thread: ThreadId, object: ObjectId, item: Item) -> Self {
        MethodCall {
            item_in: Some(item),
            ..Self::bare(thread, MethodKind::Producer, object)
        }
    }

    pub fn consumer(thread: ThreadId, object: ObjectId, item: Item) -> Self {
        MethodCall {
            item_out: Some(item),
            ..Self::bare(thread, MethodKind::Consumer, object)
        }
    }

    /// A conditional consumer that returned no item.
    pub fn failed_consumer(thread: ThreadId, object: ObjectId) -> Self {
        Self::bare(thread, MethodKind::Consumer, object)
    }

    /// A consumer invocation with no response yet.
    pub fn pending_consumer(thread: ThreadId, object: ObjectId) -> Self {
        MethodCall {
            response_ns: None,
            ..Self::bare(thread, MethodKind::Consumer, object)
        }
    }

    pub fn reader(thread: ThreadId, object: ObjectId, item: Item) -> Self {
        MethodCall {
            item_out: Some(item),
            ..Self::bare(thread, MethodKind::Reader, object)
        }
    }

    pub fn writer(thread: ThreadId, object: ObjectId, new: Item, prev: Item) -> Self {
        MethodCall {
            item_in: Some(new),
            prev: Some(prev),
            ..Self::bare(thread, MethodKind::Writer, object)
        }
    }

    pub fn with_seq(mut self, seq: u64) -> Self {
        self.seq = seq;
        self
    }

    pub fn at(mut self, invoke_ns: u64, response_ns: u64) -> Self {
        self.invoke_ns = invoke_ns;
        self.response_ns = Some(response_ns);
        self
    }

    pub fn is_pending(&self) -> bool {
        self.response_ns.is_none()
    }

    /// Checks the per-kind payload shape and timestamp order.
    pub fn validate(&self) -> Result<(), &'static str> {
        use MethodKind::*;
        let pending = self.is_pending();
        match self.kind {
            Producer => {
                if self.item_in.is_none() {
                    return Err("producer without item_in");
                }
                if self.item_out.is_some() || self.prev.is_some() {
                    return Err("producer carries item_out or prev");
                }
            }
            Consumer | Reader => {
                if self.item_in.is_some() || self.prev.is_some() {
                    return Err("consumer/reader carries item_in or prev");
                }
                if pending && self.item_out.is_some() {
                    return Err("pending call carries item_out");
                }
                if self.kind == Reader && !pending && self.item_out.is_none() {
                    return Err("completed reader without item_out");
                }
            }
            Writer => {
                if self.item_in.is_none() {
                    return Err("writer without item_in");
                }
                if self.prev.is_none() {
                    return Err("writer without prev");
                }
                if self.item_out.is_some() {
                    return Err("writer carries item_out");
                }
            }
        }
        if let Some(resp) = self.response_ns {
            if resp < self.invoke_ns {
                return Err("response precedes invocation");
            }
        }
        Ok(())
    }

    /// Configurations this call touches, in a fixed order.
    fn configs(&self) -> impl Iterator<Item = Config> {
        let object = self.object;
        let (first, second) = match self.kind {
            MethodKind::Producer => (self.item_in.map(Config::item(object)), None),
            MethodKind::Consumer => {
                if self.is_pending() {
                    (None, None)
                } else {
                    (Some(Config::new(object, self.item_out)), None)
                }
            }
            MethodKind::Reader => (self.item_out.map(Config::item(object)), None),
            MethodKind::Writer => (
                self.item_in.map(Config::item(object)),
                self.prev.map(Config::item(object)),
            ),
        };
        first.into_iter().chain(second)
    }
}

/// An (object, item) combination. `item == None` stands for the absent result
/// of a failed conditional consumer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub object: ObjectId,
    pub item: Option<Item>,
}

impl Config {
    pub fn new(object: ObjectId, item: Option<Item>) -> Self {
        Config { object, item }
    }

    fn item(object: ObjectId) -> impl Fn(Item) -> Config {
        move |item| Config::new(object, Some(item))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.item {
            Some(item) => write!(f, "({},{})", self.object, item),
            None => write!(f, "({},null)", self.object),
        }
    }
}

/// Dense indexing of the configurations observed in a history.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    map: HashMap<Config, usize>,
    reverse: Vec<Config>,
}

impl Basis {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `(object, item)`, allocating the next free index on first sight.
    pub fn params_to_index(&mut self, object: ObjectId, item: Item) -> usize {
        self.index_of(Config::new(object, Some(item)))
    }

    pub fn index_of(&mut self, config: Config) -> usize {
        if let Some(&i) = self.map.get(&config) {
            return i;
        }
        let i = self.reverse.len();
        self.map.insert(config, i);
        self.reverse.push(config);
        i
    }

    pub fn get(&self, config: &Config) -> Option<usize> {
        self.map.get(config).copied()
    }

    pub fn config(&self, index: usize) -> Config {
        self.reverse[index]
    }

    pub fn configs(&self) -> &[Config] {
        &self.reverse
    }

    /// Number of distinct configurations `c`.
    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }
}

/// A multiset of method calls together with the basis over their configurations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    calls: Vec<MethodCall>,
    basis: Basis,
}

impl History {
    /// Builds a history, indexing configurations in order of first appearance.
    pub fn new(calls: Vec<MethodCall>) -> Self {
        let mut basis = Basis::new();
        for call in &calls {
            for cfg in call.configs() {
                basis.index_of(cfg);
            }
        }
        History { calls, basis }
    }

    pub fn calls(&self) -> &[MethodCall] {
        &self.calls
    }

    pub fn into_calls(self) -> Vec<MethodCall> {
        self.calls
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }

    pub fn pending_count(&self) -> usize {
        self.calls.iter().filter(|c| c.is_pending()).count()
    }

    pub fn objects(&self) -> BTreeSet<ObjectId> {
        self.calls.iter().map(|c| c.object).collect()
    }

    /// The subhistory `H|object`.
    pub fn project(&self, object: ObjectId) -> History {
        History::new(
            self.calls
                .iter()
                .filter(|c| c.object == object)
                .cloned()
                .collect(),
        )
    }

    /// Drops completed consumers that returned no item.
    pub fn without_failed_consumers(&self) -> History {
        History::new(
            self.calls
                .iter()
                .filter(|c| {
                    !(c.kind == MethodKind::Consumer && !c.is_pending() && c.item_out.is_none())
                })
                .cloned()
                .collect(),
        )
    }

    /// Same calls with the given one appended.
    pub fn with_call(&self, call: MethodCall) -> History {
        let mut calls = self.calls.clone();
        calls.push(call);
        History::new(calls)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        writeln!(out, "{HEADER}")?;
        for c in &self.calls {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.seq,
                c.thread,
                c.kind.code(),
                c.object,
                opt(c.item_in),
                opt(c.item_out),
                opt(c.prev),
                c.invoke_ns,
                opt(c.response_ns)
            )?;
        }
        Ok(())
    }

    pub fn to_file_string(&self) -> String {
        let mut buf = Vec::with_capacity(64 * (self.calls.len() + 1));
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("history text is ASCII")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HistoryError> {
        let file = fs::File::create(path)?;
        let mut out = io::BufWriter::new(file);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<History, HistoryError> {
        let bytes = fs::read(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| {
            let prefix = &bytes[..e.valid_up_to()];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
            HistoryError::Parse {
                line,
                column,
                message: "invalid UTF-8".into(),
            }
        })?;
        Self::parse(text)
    }

    /// Parses the history file format.
    pub fn parse(text: &str) -> Result<History, HistoryError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n').enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        check_no_cr(header, 1)?;
        if header != HEADER {
            return Err(HistoryError::Parse {
                line: 1,
                column: 1,
                message: format!("expected header `{HEADER}`"),
            });
        }
        let mut calls = Vec::new();
        for (i, line) in lines {
            calls.push(parse_line(line, i + 1)?);
        }
        Ok(History::new(calls))
    }
}

fn check_no_cr(line: &str, line_no: usize) -> Result<(), HistoryError> {
    if let Some(pos) = line.find('\r') {
        return Err(HistoryError::Parse {
            line: line_no,
            column: pos + 1,
            message: "carriage return found; history files use LF line endings".into(),
        });
    }
    Ok(())
}

const FIELDS: [&str; 9] = [
    "seq",
    "thread",
    "kind",
    "object",
    "item_in",
    "item_out",
    "prev",
    "invoke_ns",
    "response_ns",
];

fn parse_line(line: &str, line_no: usize) -> Result<MethodCall, HistoryError> {
    check_no_cr(line, line_no)?;
    let mut fields: Vec<(usize, &str)> = Vec::with_capacity(9);
    let mut start = 0;
    for part in line.split(',') {
        fields.push((start + 1, part));
        start += part.len() + 1;
    }
    let err = |column: usize, message: String| HistoryError::Parse {
        line: line_no,
        column,
        message,
    };
    if fields.len() != FIELDS.len() {
        return Err(err(
            1,
            format!("expected {} fields, found {}", FIELDS.len(), fields.len()),
        ));
    }

    let unsigned = |idx: usize| -> Result<u64, HistoryError> {
        let (col, s) = fields[idx];
        parse_decimal(s, false)
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(|| {
                err(
                    col,
                    format!("{}: expected unsigned decimal integer", FIELDS[idx]),
                )
            })
    };
    let opt_unsigned = |idx: usize| -> Result<Option<u64>, HistoryError> {
        if fields[idx].1.is_empty() {
            Ok(None)
        } else {
            unsigned(idx).map(Some)
        }
    };
    let opt_item = |idx: usize| -> Result<Option<Item>, HistoryError> {
        let (col, s) = fields[idx];
        if s.is_empty() {
            return Ok(None);
        }
        if s.starts_with('"') {
            return Err(err(
                col,
                format!("{}: string payloads are not supported", FIELDS[idx]),
            ));
        }
        parse_decimal(s, true)
            .and_then(|v| Item::try_from(v).ok())
            .map(Some)
            .ok_or_else(|| err(col, format!("{}: expected decimal integer", FIELDS[idx])))
    };

    let seq = unsigned(0)?;
    let thread = ThreadId::try_from(unsigned(1)?)
        .map_err(|_| err(fields[1].0, "thread: out of range".into()))?;
    let kind = MethodKind::from_code(fields[2].1).ok_or_else(|| {
        err(
            fields[2].0,
            format!(
                "kind: expected PROD, CONS, READ or WRIT, found `{}`",
                fields[2].1
            ),
        )
    })?;
    let object = unsigned(3)?;
    let item_in = opt_item(4)?;
    let item_out = opt_item(5)?;
    let prev = opt_item(6)?;
    let invoke_ns = unsigned(7)?;
    let response_ns = opt_unsigned(8)?;
    Ok(MethodCall {
        seq,
        thread,
        kind,
        object,
        item_in,
        item_out,
        prev,
        invoke_ns,
        response_ns,
    })
}

/// Strict decimal: optional leading `-` (when allowed) followed by ASCII digits.
fn parse_decimal(s: &str, allow_negative: bool) -> Option<i128> {
    let digits = match s.strip_prefix('-') {
        Some(rest) if allow_negative => rest,
        Some(_) => return None,
        None => s,
    };
    if digits.is_empty() || digits.len() > 20 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Collects method calls from many threads without sharing during recording.
///
/// Each worker obtains a [`ThreadRecorder`] and appends to its private buffer;
/// buffers are handed back when the thread recorder is finished or dropped.
/// [`Recorder::merge`] refuses to run while any thread recorder is live.
#[derive(Debug)]
pub struct Recorder {
    clock: Clock,
    active: AtomicUsize,
    finished: Mutex<Vec<Vec<MethodCall>>>,
}

/// Source of the `invoke_ns` / `response_ns` stamps.
#[derive(Debug)]
enum Clock {
    /// Nanoseconds since the recorder was created.
    Monotonic(Instant),
    /// A shared counter bumped on every reading: stamps are unique, strictly
    /// increasing across all threads, and reproducible for a single thread.
    Logical(AtomicU64),
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

impl Recorder {
    pub fn new() -> Self {
        Self::with_clock(Clock::Monotonic(Instant::now()))
    }

    /// A recorder whose timestamps are logical ticks rather than nanoseconds.
    pub fn logical() -> Self {
        Self::with_clock(Clock::Logical(AtomicU64::new(0)))
    }

    fn with_clock(clock: Clock) -> Self {
        Recorder {
            clock,
            active: AtomicUsize::new(0),
            finished: Mutex::new(Vec::new()),
        }
    }

    pub fn now_ns(&self) -> u64 {
        match &self.clock {
            Clock::Monotonic(start) => start.elapsed().as_nanos() as u64,
            Clock::Logical(ticks) => ticks.fetch_add(1, Ordering::AcqRel),
        }
    }

    pub fn thread(&self, thread: ThreadId) -> ThreadRecorder<'_> {
        self.active.fetch_add(1, Ordering::AcqRel);
        ThreadRecorder {
            recorder: self,
            thread,
            buf: Vec::new(),
            done: false,
        }
    }

    /// Merges all finished buffers into one history sorted by invocation time,
    /// with ties broken by thread and per-thread sequence, and `seq` re-densified.
    pub fn merge(&self) -> Result<History, HistoryError> {
        let active = self.active.load(Ordering::Acquire);
        if active > 0 {
            return Err(HistoryError::RecorderBusy(active));
        }
        let buffers = std::mem::take(&mut *self.finished.lock().unwrap());
        let mut calls: Vec<MethodCall> = buffers.into_iter().flatten().collect();
        calls.sort_by_key(|c| (c.invoke_ns, c.thread, c.seq));
        for (i, c) in calls.iter_mut().enumerate() {
            c.seq = i as u64;
        }
        Ok(History::new(calls))
    }
}

/// A single thread's private append-only call buffer.
#[derive(Debug)]
pub struct ThreadRecorder<'r> {
    recorder: &'r Recorder,
    thread: ThreadId,
    buf: Vec<MethodCall>,
    done: bool,
}

impl ThreadRecorder<'_> {
    pub fn thread_id(&self) -> ThreadId {
        self.thread
    }

    pub fn now_ns(&self) -> u64 {
        self.recorder.now_ns()
    }

    /// Appends a call, stamping it with this thread's id and local sequence
    /// number. Returns the call's position in the buffer.
    pub fn record(&mut self, mut call: MethodCall) -> usize {
        let idx = self.buf.len();
        call.thread = self.thread;
        call.seq = idx as u64;
        self.buf.push(call);
        idx
    }

    /// Completes a previously recorded pending call.
    pub fn complete(&mut self, idx: usize, item_out: Option<Item>, response_ns: u64) {
        let call = &mut self.buf[idx];
        call.item_out = item_out;
        call.response_ns = Some(response_ns.max(call.invoke_ns));
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(mut self) {
        self.hand_back();
    }

    fn hand_back(&mut self) {
        if self.done {
            return;
        }
        self.done = true;
        let buf = std::mem::take(&mut self.buf);
        self.recorder.finished.lock().unwrap().push(buf);
        self.recorder.active.fetch_sub(1, Ordering::AcqRel);
    }
}

impl Drop for ThreadRecorder<'_> {
    fn drop(&mut self) {
        self.hand_back();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> History {
        History::new(vec![
            MethodCall::producer(0, 0, 7).at(10, 20),
            MethodCall::producer(1, 0, 8).at(25, 35),
            MethodCall::consumer(0, 0, 7).at(40, 50),
        ])
    }

    #[test]
    fn params_to_index_is_stable_and_dense() {
        let mut b = Basis::new();
        assert_eq!(b.params_to_index(0, 7), 0);
        assert_eq!(b.params_to_index(0, 8), 1);
        assert_eq!(b.params_to_index(0, 7), 0);
        assert_eq!(b.len(), 2);
        assert_eq!(b.config(1), Config::new(0, Some(8)));
    }

    #[test]
    fn h1_basis_has_two_configurations() {
        let h = h1();
        assert_eq!(h.basis().len(), 2);
        assert_eq!(
            h.basis().configs(),
            &[Config::new(0, Some(7)), Config::new(0, Some(8))]
        );
    }

    #[test]
    fn record_and_merge_counts() {
        let rec = Recorder::new();
        assert!(rec.merge().unwrap().is_empty());

        let mut t = rec.thread(0);
        for i in 0..3 {
            t.record(MethodCall::producer(0, 0, i).at(i as u64, i as u64 + 1));
        }
        t.finish();
        assert_eq!(rec.merge().unwrap().len(), 3);
    }

    #[test]
    fn merge_sorts_by_invocation_and_shares_configs() {
        let rec = Recorder::new();
        let mut a = rec.thread(0);
        let mut b = rec.thread(1);
        a.record(MethodCall::producer(0, 0, 5).at(10, 11));
        b.record(MethodCall::producer(1, 0, 5).at(5, 6));
        a.record(MethodCall::consumer(0, 0, 5).at(30, 31));
        b.record(MethodCall::consumer(1, 0, 5).at(20, 21));
        assert!(matches!(rec.merge(), Err(HistoryError::RecorderBusy(2))));
        a.finish();
        drop(b);
        let h = rec.merge().unwrap();
        let times: Vec<u64> = h.calls().iter().map(|c| c.invoke_ns).collect();
        assert_eq!(times, vec![5, 10, 20, 30]);
        let seqs: Vec<u64> = h.calls().iter().map(|c| c.seq).collect();
        assert_eq!(seqs, vec![0, 1, 2, 3]);
        assert_eq!(h.basis().len(), 1);
    }

    #[test]
    fn logical_clock_is_strictly_increasing() {
        let rec = Recorder::logical();
        let t = rec.thread(0);
        let a = t.now_ns();
        let b = t.now_ns();
        assert_eq!((a, b), (0, 1));
    }

    #[test]
    fn file_round_trip_including_pending_and_failed() {
        let h = History::new(vec![
            MethodCall::producer(0, 3, -7).with_seq(0).at(1, 2),
            MethodCall::writer(1, 3, 9, -7).with_seq(1).at(2, 3),
            MethodCall::reader(2, 3, 9).with_seq(2).at(4, 4),
            MethodCall::failed_consumer(0, 3).with_seq(3).at(5, 9),
            MethodCall::pending_consumer(1, 3).with_seq(4),
        ]);
        let text = h.to_file_string();
        assert!(text.starts_with(HEADER));
        assert!(text.contains("\n1,1,WRIT,3,9,,-7,2,3\n"));
        assert!(text.ends_with("4,1,CONS,3,,,,0,\n"));
        assert_eq!(History::parse(&text).unwrap(), h);
    }

    #[test]
    fn missing_header_is_rejected() {
        let err = History::parse("0,0,PROD,0,7,,,1,2\n").unwrap_err();
        assert!(matches!(err, HistoryError::Parse { line: 1, .. }));
        assert!(History::parse("").is_err());
    }

    #[test]
    fn crlf_is_rejected() {
        let text = format!("{HEADER}\r\n0,0,PROD,0,7,,,1,2\r\n");
        let err = History::parse(&text).unwrap_err();
        match err {
            HistoryError::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, HEADER.len() + 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_field_reports_line_and_column() {
        let text = format!("{HEADER}\n0,0,PROD,0,7,,,1,2\n1,0,POP,0,,7,,3,4\n");
        match History::parse(&text).unwrap_err() {
            HistoryError::Parse { line, column, .. } => {
                assert_eq!((line, column), (3, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{HEADER}\n0,0,PROD,0,+7,,,1,2\n");
        match History::parse(&text).unwrap_err() {
            HistoryError::Parse { line, column, .. } => assert_eq!((line, column), (2, 12)),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{HEADER}\n0,0,PROD,0,\"a\",,,1,2\n");
        assert!(History::parse(&text).is_err());
        let text = format!("{HEADER}\n0,0,PROD,0,7,,1,2\n");
        assert!(History::parse(&text).is_err());
    }

    #[test]
    fn validate_catches_shape_errors() {
        assert!(MethodCall::producer(0, 0, 1).validate().is_ok());
        let mut w = MethodCall::writer(0, 0, 1, 2);
        w.prev = None;
        assert_eq!(w.validate(), Err("writer without prev"));
        let mut c = MethodCall::consumer(0, 0, 1).at(5, 4);
        assert_eq!(c.validate(), Err("response precedes invocation"));
        c.response_ns = None;
        assert_eq!(c.validate(), Err("pending call carries item_out"));
    }

    #[test]
    fn projection_keeps_only_one_object() {
        let h = History::new(vec![
            MethodCall::producer(0, 0, 1),
            MethodCall::producer(0, 1, 1),
            MethodCall::consumer(1, 1, 1),
        ]);
        let y = h.project(1);
        assert_eq!(y.len(), 2);
        assert_eq!(y.basis().len(), 1);
        assert!(h.project(9).is_empty());
    }
}
