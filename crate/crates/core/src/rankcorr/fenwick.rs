//! Fenwick (binary indexed) tree over an additive accumulator: exact pair
//! counts use `u64`, the weighted sweep uses the floating scalar.

use std::ops::AddAssign;

use num_traits::Zero;

pub(crate) struct Fenwick<T> {
    tree: Vec<T>,
}

impl<T: Copy + AddAssign + Zero> Fenwick<T> {
    pub fn new(len: usize) -> Self {
        Fenwick {
            tree: vec![T::zero(); len + 1],
        }
    }

    /// Add `v` at position `i` (0-based).
    pub fn add(&mut self, i: usize, v: T) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `< i` (exclusive prefix), matching the strict
    /// inequality in the rank objective.
    pub fn prefix(&self, i: usize) -> T {
        let mut i = i; // positions 0..i map to tree nodes 1..=i
        let mut s = T::zero();
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusive_prefix_sums() {
        let mut f = Fenwick::<u64>::new(5);
        f.add(0, 2);
        f.add(3, 1);
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(1), 2);
        assert_eq!(f.prefix(3), 2);
        assert_eq!(f.prefix(4), 3);
        assert_eq!(f.prefix(5), 3);
    }

    #[test]
    fn float_accumulation() {
        let mut f = Fenwick::<f64>::new(4);
        f.add(1, 0.5);
        f.add(2, 1.25);
        assert_eq!(f.prefix(2), 0.5);
        assert_eq!(f.prefix(4), 1.75);
    }
}
