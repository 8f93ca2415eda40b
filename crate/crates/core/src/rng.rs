//! Per-thread generator used to pick tails and sublists.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_xorshift::XorShiftRng;

thread_local! {
    static INDEX_RNG: RefCell<XorShiftRng> = RefCell::new(XorShiftRng::seed_from_u64(default_seed()));
}

fn default_seed() -> u64 {
    use std::hash::{BuildHasher, RandomState};
    RandomState::new().hash_one(std::thread::current().id())
}

/// Reseeds the calling thread's index generator from a run seed and the
/// thread's ordinal, making structure-internal choices reproducible.
pub fn seed_current_thread(seed: u64, ordinal: u64) {
    let mixed = seed ^ ordinal.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    INDEX_RNG.with(|r| *r.borrow_mut() = XorShiftRng::seed_from_u64(mixed));
}

/// Uniform index in `0..n`.
pub(crate) fn random_index(n: usize) -> usize {
    INDEX_RNG.with(|r| r.borrow_mut().random_range(0..n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeding_is_reproducible() {
        seed_current_thread(42, 3);
        let a: Vec<usize> = (0..16).map(|_| random_index(1000)).collect();
        seed_current_thread(42, 3);
        let b: Vec<usize> = (0..16).map(|_| random_index(1000)).collect();
        assert_eq!(a, b);
        seed_current_thread(42, 4);
        let c: Vec<usize> = (0..16).map(|_| random_index(1000)).collect();
        assert_ne!(a, c);
    }
}
