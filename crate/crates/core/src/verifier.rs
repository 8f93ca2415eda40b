//! Quantifiability checking.
//!
//! Every completed call contributes to the configuration(s) it touches:
//! producers add one, consumers subtract one, a writer moves one unit from its
//! previous value to its new value, and readers accumulate a read count `k`
//! whose contribution is `-(1 - 2^-k)`. A history is quantifiable when, for
//! every configuration, the total is non-negative, where the reader term is
//! absorbed by a ceiling whenever producers (including writers' producer half)
//! are present.
//!
//! Reader terms are never materialized: `-(1 - 2^-k)` lies in `(-1, 0]`, so
//! with producers present the ceiling removes it, and without producers any
//! positive `k` makes the total strictly negative. The check is therefore
//! exact integer arithmetic in `O(n + c)`.

use std::fmt;

use thiserror::Error;

use crate::history::{Config, History, MethodKind, ObjectId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("malformed call seq {seq}: {reason}")]
    MalformedCall { seq: u64, reason: &'static str },
    #[error("writer vector entry {value} at index {index} is outside {{-1, 0, 1}}")]
    Domain { index: usize, value: i64 },
}

/// Per-kind accumulators over the history's configuration basis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KindSums {
    pub p: Vec<i64>,
    pub w_prod: Vec<i64>,
    pub w_cons: Vec<i64>,
    pub c_sum: Vec<i64>,
    pub read_count: Vec<u64>,
}

impl KindSums {
    fn zeros(c: usize) -> Self {
        KindSums {
            p: vec![0; c],
            w_prod: vec![0; c],
            w_cons: vec![0; c],
            c_sum: vec![0; c],
            read_count: vec![0; c],
        }
    }

    /// Number of configurations.
    pub fn c(&self) -> usize {
        self.p.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationReason {
    OverConsume,
    OverWrite,
    ReadUnproduced,
}

impl ViolationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationReason::OverConsume => "over-consume",
            ViolationReason::OverWrite => "over-write",
            ViolationReason::ReadUnproduced => "read-unproduced",
        }
    }
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub config: Config,
    pub index: usize,
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub quantifiable: bool,
    /// Integer part (floor) of each configuration's total.
    pub h_floor: Vec<i64>,
    pub violations: Vec<Violation>,
    /// Number of calls in the history, pending ones included.
    pub calls: usize,
    /// Pending calls; these are excluded from the sums.
    pub pending: usize,
}

/// Accumulates per-kind sums over the completed calls of `history`.
pub fn assign_values(history: &History) -> Result<KindSums, VerifyError> {
    let basis = history.basis();
    let mut sums = KindSums::zeros(basis.len());
    let index = |object: ObjectId, item| {
        basis
            .get(&Config::new(object, item))
            .expect("history basis covers every call")
    };
    for call in history.calls() {
        call.validate()
            .map_err(|reason| VerifyError::MalformedCall {
                seq: call.seq,
                reason,
            })?;
        if call.is_pending() {
            continue;
        }
        match call.kind {
            MethodKind::Producer => sums.p[index(call.object, call.item_in)] += 1,
            MethodKind::Consumer => sums.c_sum[index(call.object, call.item_out)] -= 1,
            MethodKind::Reader => sums.read_count[index(call.object, call.item_out)] += 1,
            MethodKind::Writer => {
                let j = index(call.object, call.item_in);
                let k = index(call.object, call.prev);
                if j != k {
                    sums.w_prod[j] += 1;
                    sums.w_cons[k] -= 1;
                }
            }
        }
    }
    Ok(sums)
}

/// Splits a single writer's vector into its producer and consumer halves:
/// `floor((v + 1) / 2)` and `ceil((v - 1) / 2)` elementwise.
pub fn split_writer(v: &[i64]) -> Result<(Vec<i64>, Vec<i64>), VerifyError> {
    let mut prod = Vec::with_capacity(v.len());
    let mut cons = Vec::with_capacity(v.len());
    for (index, &value) in v.iter().enumerate() {
        if !(-1..=1).contains(&value) {
            return Err(VerifyError::Domain { index, value });
        }
        prod.push((value + 1).div_euclid(2));
        cons.push(-((1 - value).div_euclid(2)));
    }
    Ok((prod, cons))
}

pub fn verify(history: &History) -> Result<Verdict, VerifyError> {
    let sums = assign_values(history)?;
    let basis = history.basis();
    let c = sums.c();
    let mut h_floor = Vec::with_capacity(c);
    let mut violations = Vec::new();
    for i in 0..c {
        let supply = sums.p[i] + sums.w_prod[i];
        let total = supply + sums.w_cons[i] + sums.c_sum[i];
        let h = if supply >= 1 || sums.read_count[i] == 0 {
            total
        } else {
            // total - (1 - 2^-k) with k > 0 has floor total - 1.
            total - 1
        };
        h_floor.push(h);
        if h < 0 {
            let reason = if sums.c_sum[i] < 0 {
                ViolationReason::OverConsume
            } else if sums.w_cons[i] < 0 {
                ViolationReason::OverWrite
            } else {
                ViolationReason::ReadUnproduced
            };
            violations.push(Violation {
                config: basis.config(i),
                index: i,
                reason,
            });
        }
    }
    Ok(Verdict {
        quantifiable: violations.is_empty(),
        h_floor,
        violations,
        calls: history.len(),
        pending: history.pending_count(),
    })
}

/// Verdict for the subhistory of calls on `object`.
pub fn verify_projection(history: &History, object: ObjectId) -> Result<Verdict, VerifyError> {
    verify(&history.project(object))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::MethodCall;

    const X: u64 = 0;

    fn h1() -> History {
        History::new(vec![
            MethodCall::producer(0, X, 7),
            MethodCall::producer(1, X, 8),
            MethodCall::consumer(0, X, 7),
        ])
    }

    #[test]
    fn h1_sums_and_verdict() {
        let h = h1();
        let s = assign_values(&h).unwrap();
        assert_eq!(s.p, vec![1, 1]);
        assert_eq!(s.c_sum, vec![-1, 0]);
        let v = verify(&h).unwrap();
        assert!(v.quantifiable);
        assert_eq!(v.h_floor, vec![0, 1]);
    }

    #[test]
    fn h2_over_consumes() {
        let h = History::new(vec![
            MethodCall::producer(0, X, 7),
            MethodCall::producer(1, X, 8),
            MethodCall::consumer(0, X, 3),
        ]);
        let v = verify(&h).unwrap();
        assert!(!v.quantifiable);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].config, Config::new(X, Some(3)));
        assert_eq!(v.violations[0].reason, ViolationReason::OverConsume);
    }

    #[test]
    fn writer_sums() {
        let same = History::new(vec![MethodCall::writer(0, X, 7, 7)]);
        let s = assign_values(&same).unwrap();
        assert!(s.w_prod.iter().chain(&s.w_cons).all(|&v| v == 0));

        let moved = History::new(vec![MethodCall::writer(0, X, 8, 7)]);
        let s = assign_values(&moved).unwrap();
        let b = moved.basis();
        assert_eq!(s.w_prod[b.get(&Config::new(X, Some(8))).unwrap()], 1);
        assert_eq!(s.w_cons[b.get(&Config::new(X, Some(7))).unwrap()], -1);
        let v = verify(&moved).unwrap();
        assert_eq!(v.violations[0].reason, ViolationReason::OverWrite);
    }

    #[test]
    fn writer_without_prev_is_malformed() {
        let mut w = MethodCall::writer(0, X, 8, 7).with_seq(4);
        w.prev = None;
        let h = History::new(vec![w]);
        assert_eq!(
            assign_values(&h),
            Err(VerifyError::MalformedCall {
                seq: 4,
                reason: "writer without prev"
            })
        );
    }

    #[test]
    fn split_writer_examples() {
        assert_eq!(
            split_writer(&[1, -1, 0]).unwrap(),
            (vec![1, 0, 0], vec![0, -1, 0])
        );
        assert_eq!(split_writer(&[0, 0]).unwrap(), (vec![0, 0], vec![0, 0]));
        assert_eq!(
            split_writer(&[0, 2]),
            Err(VerifyError::Domain { index: 1, value: 2 })
        );
    }

    #[test]
    fn readers() {
        let ok = History::new(vec![
            MethodCall::producer(0, X, 7),
            MethodCall::reader(1, X, 7),
            MethodCall::reader(2, X, 7),
        ]);
        assert!(verify(&ok).unwrap().quantifiable);

        let bad = History::new(vec![MethodCall::reader(0, X, 9)]);
        let v = verify(&bad).unwrap();
        assert!(!v.quantifiable);
        assert_eq!(v.h_floor, vec![-1]);
        assert_eq!(v.violations[0].reason, ViolationReason::ReadUnproduced);
    }

    #[test]
    fn empty_history() {
        let v = verify(&History::default()).unwrap();
        assert!(v.quantifiable);
        assert!(v.h_floor.is_empty());
    }

    #[test]
    fn pending_calls_are_counted_not_summed() {
        let h = History::new(vec![
            MethodCall::producer(0, X, 1),
            MethodCall::pending_consumer(1, X),
            MethodCall::pending_consumer(2, X),
        ]);
        let v = verify(&h).unwrap();
        assert!(v.quantifiable);
        assert_eq!((v.calls, v.pending), (3, 2));
    }

    #[test]
    fn failed_consumer_is_a_null_configuration() {
        let h = History::new(vec![MethodCall::failed_consumer(0, X)]);
        let v = verify(&h).unwrap();
        assert!(!v.quantifiable);
        assert_eq!(v.violations[0].config.to_string(), "(0,null)");
    }

    #[test]
    fn tie_order_prefers_over_consume() {
        let h = History::new(vec![
            MethodCall::consumer(0, X, 5),
            MethodCall::writer(1, X, 6, 5),
            MethodCall::reader(2, X, 5),
        ]);
        let v = verify(&h).unwrap();
        let five = v
            .violations
            .iter()
            .find(|v| v.config == Config::new(X, Some(5)))
            .unwrap();
        assert_eq!(five.reason, ViolationReason::OverConsume);
    }

    #[test]
    fn projection_of_absent_object_is_quantifiable() {
        assert!(verify_projection(&h1(), 42).unwrap().quantifiable);
    }
}
