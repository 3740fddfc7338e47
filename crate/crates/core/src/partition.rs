//! Set partitions as restricted growth strings.
//!
//! A restricted growth string `a[0..m]` has `a[0] = 0` and
//! `a[i] ≤ 1 + max(a[0..i])`; each one names a distinct partition of `m`
//! labelled items, so iterating them visits every partition exactly once.

/// Iterates all restricted growth strings of length `m` in lexicographic order.
#[derive(Clone, Debug)]
pub struct RestrictedGrowth {
    current: Vec<u32>,
    /// `prefix_max[i] = max(current[0..=i])`.
    prefix_max: Vec<u32>,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(m: usize) -> Self {
        Self {
            current: vec![0; m],
            prefix_max: vec![0; m],
            started: false,
            done: false,
        }
    }

    /// Advances to the next string; returns `false` once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let m = self.current.len();
        // Find the rightmost position that can still grow.
        let mut i = m;
        while i > 1 {
            i -= 1;
            if self.current[i] <= self.prefix_max[i - 1] {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..m {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    pub fn current(&self) -> &[u32] {
        &self.current
    }

    pub fn block_count(&self) -> usize {
        self.prefix_max.last().map_or(0, |&b| b as usize + 1)
    }
}

/// Bell number `B(m)` via the Bell triangle. `None` on `u128` overflow.
pub fn bell_number(m: usize) -> Option<u128> {
    let mut row: Vec<u128> = vec![1];
    for _ in 0..m {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last()?);
        for &x in &row {
            let last = *next.last()?;
            next.push(last.checked_add(x)?);
        }
        row = next;
    }
    row.first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let expected = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
        for (m, &b) in expected.iter().enumerate() {
            assert_eq!(bell_number(m), Some(b));
        }
    }

    #[test]
    fn enumeration_counts_match_bell() {
        for m in 0..=9 {
            let mut it = RestrictedGrowth::new(m);
            let mut count = 0u128;
            while it.advance() {
                count += 1;
            }
            assert_eq!(Some(count), bell_number(m), "m = {m}");
        }
    }

    #[test]
    fn strings_are_valid_distinct_and_lexicographic() {
        let mut it = RestrictedGrowth::new(5);
        let mut seen: Vec<Vec<u32>> = Vec::new();
        while it.advance() {
            let s = it.current().to_vec();
            let mut max = 0;
            for (i, &a) in s.iter().enumerate() {
                if i == 0 {
                    assert_eq!(a, 0);
                } else {
                    assert!(a <= max + 1);
                }
                max = max.max(a);
            }
            assert_eq!(it.block_count(), max as usize + 1);
            if let Some(prev) = seen.last() {
                assert!(prev < &s);
            }
            seen.push(s);
        }
        assert_eq!(seen.len(), 52);
        assert_eq!(seen[0], vec![0; 5]);
        assert_eq!(seen[51], vec![0, 1, 2, 3, 4]);
    }
}
