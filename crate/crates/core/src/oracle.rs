//! Brute-force reference implementations for cross-checking.
//!
//! Nothing here shares code with [`crate::verifier`] or the inversion counter
//! in [`crate::harness`]; the point is to have a second, obviously-correct
//! route to the same answers on small inputs.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::history::{Config, History, MethodCall, MethodKind};

/// Largest history accepted by [`exists_conservative_ordering`].
pub const MAX_ORDERING_CALLS: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("history has {calls} calls; the ordering search is limited to {limit}")]
    TooLarge { calls: usize, limit: usize },
}

/// What one call does to the simulated object state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Step {
    Produce(Config),
    Consume(Config),
    Read(Config),
    Write { new: Config, prev: Config },
}

impl Step {
    fn of(call: &MethodCall) -> Step {
        let cfg = |item| Config::new(call.object, item);
        match call.kind {
            MethodKind::Producer => Step::Produce(cfg(call.item_in)),
            MethodKind::Consumer => Step::Consume(cfg(call.item_out)),
            MethodKind::Reader => Step::Read(cfg(call.item_out)),
            MethodKind::Writer => Step::Write {
                new: cfg(call.item_in),
                prev: cfg(call.prev),
            },
        }
    }
}

/// Simulated object contents during a replay.
#[derive(Clone, Debug, Default)]
pub struct SimState {
    pub stock: BTreeMap<Config, i64>,
    pub produced_ever: HashSet<Config>,
}

impl SimState {
    fn apply(&mut self, step: Step) -> bool {
        match step {
            Step::Produce(c) => {
                *self.stock.entry(c).or_default() += 1;
                self.produced_ever.insert(c);
            }
            Step::Consume(c) => {
                let n = self.stock.entry(c).or_default();
                if *n < 1 {
                    return false;
                }
                *n -= 1;
            }
            Step::Read(c) => return self.produced_ever.contains(&c),
            Step::Write { new, prev } => {
                let n = self.stock.entry(prev).or_default();
                if *n < 1 {
                    return false;
                }
                *n -= 1;
                *self.stock.entry(new).or_default() += 1;
                self.produced_ever.insert(new);
            }
        }
        true
    }
}

/// Whether the completed calls of `history` can be replayed in some order so
/// that nothing is consumed, overwritten or read before it exists.
pub fn exists_conservative_ordering(history: &History) -> Result<bool, OracleError> {
    if history.len() > MAX_ORDERING_CALLS {
        return Err(OracleError::TooLarge {
            calls: history.len(),
            limit: MAX_ORDERING_CALLS,
        });
    }
    // Group identical steps; the search state is the vector of remaining counts.
    let mut kinds: Vec<Step> = Vec::new();
    let mut counts: Vec<u8> = Vec::new();
    for call in history.calls().iter().filter(|c| !c.is_pending()) {
        let step = Step::of(call);
        match kinds.iter().position(|&k| k == step) {
            Some(i) => counts[i] += 1,
            None => {
                kinds.push(step);
                counts.push(1);
            }
        }
    }
    let mut dead = HashSet::new();
    Ok(search(&kinds, &mut counts, &SimState::default(), &mut dead))
}

fn search(
    kinds: &[Step],
    remaining: &mut Vec<u8>,
    state: &SimState,
    dead: &mut HashSet<Vec<u8>>,
) -> bool {
    if remaining.iter().all(|&n| n == 0) {
        return true;
    }
    // The state is a function of which calls have already run, so the
    // remaining multiset alone identifies a search node.
    if dead.contains(remaining) {
        return false;
    }
    for i in 0..kinds.len() {
        if remaining[i] == 0 {
            continue;
        }
        let mut next = state.clone();
        if !next.apply(kinds[i]) {
            continue;
        }
        remaining[i] -= 1;
        let ok = search(kinds, remaining, &next, dead);
        remaining[i] += 1;
        if ok {
            return true;
        }
    }
    dead.insert(remaining.clone());
    false
}

/// Non-negative dyadic rational `int + 0.b1 b2 b3 ...` held exactly.
#[derive(Clone, Debug, Default)]
struct Dyadic {
    int: i64,
    bits: Vec<bool>,
    ones: usize,
}

impl Dyadic {
    /// Adds `2^-t` for `t >= 1`.
    fn add_pow2_neg(&mut self, t: usize) {
        if self.bits.len() < t {
            self.bits.resize(t, false);
        }
        let mut pos = t;
        while pos > 0 && self.bits[pos - 1] {
            self.bits[pos - 1] = false;
            self.ones -= 1;
            pos -= 1;
        }
        if pos == 0 {
            self.int += 1;
        } else {
            self.bits[pos - 1] = true;
            self.ones += 1;
        }
    }

    fn has_fraction(&self) -> bool {
        self.ones > 0
    }
}

fn floor_half(x: i64) -> i64 {
    x.div_euclid(2)
}

fn ceil_half(x: i64) -> i64 {
    -(-x).div_euclid(2)
}

/// Literal evaluation of the quantifiability condition: dense writer vectors
/// split by explicit floor/ceil, reader terms summed as exact dyadic rationals.
pub fn naive_definition2(history: &History) -> bool {
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut slot = |c: Config| {
        let n = index.len();
        *index.entry(c).or_insert(n)
    };
    let completed: Vec<(Step, [usize; 2])> = history
        .calls()
        .iter()
        .filter(|c| !c.is_pending())
        .map(|c| {
            let step = Step::of(c);
            let ix = match step {
                Step::Produce(a) | Step::Consume(a) | Step::Read(a) => [slot(a), usize::MAX],
                Step::Write { new, prev } => [slot(new), slot(prev)],
            };
            (step, ix)
        })
        .collect();
    let c = index.len();

    let mut producers = vec![0i64; c];
    let mut consumers = vec![0i64; c];
    let mut w_prod = vec![0i64; c];
    let mut w_cons = vec![0i64; c];
    let mut reads = vec![0usize; c];
    let mut reader_mag = vec![Dyadic::default(); c];
    for (step, [a, b]) in completed {
        match step {
            Step::Produce(_) => producers[a] += 1,
            Step::Consume(_) => consumers[a] -= 1,
            Step::Read(_) => {
                reads[a] += 1;
                reader_mag[a].add_pow2_neg(reads[a]);
            }
            Step::Write { .. } => {
                let mut v = vec![0i64; c];
                v[a] += 1;
                v[b] -= 1;
                for i in 0..c {
                    w_prod[i] += floor_half(v[i] + 1);
                    w_cons[i] += ceil_half(v[i] - 1);
                }
            }
        }
    }

    (0..c).all(|i| {
        let supply = producers[i] + w_prod[i];
        let rest = w_cons[i] + consumers[i];
        let m = &reader_mag[i];
        if supply >= 1 {
            // ceil(supply - m)
            let floor = supply - m.int - i64::from(m.has_fraction());
            let ceil = floor + i64::from(m.has_fraction());
            ceil + rest >= 0
        } else {
            // supply + rest - m >= 0
            let t = supply + rest;
            t > m.int || (t == m.int && !m.has_fraction())
        }
    })
}

/// `x(j) = #{i < j : a_i > a_j} + #{i > j : a_i < a_j}` by direct double loop.
pub fn brute_inversions(seq: &[i64]) -> Vec<u64> {
    (0..seq.len())
        .map(|j| {
            let before = seq[..j].iter().filter(|&&a| a > seq[j]).count();
            let after = seq[j + 1..].iter().filter(|&&a| a < seq[j]).count();
            (before + after) as u64
        })
        .collect()
}
