//! Fixed-width bitsets used for adjacency rows and clique candidate sets.

/// A fixed-capacity set of small integers backed by `u64` words.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    /// An empty set able to hold `0..capacity`.
    pub fn new(capacity: usize) -> Self {
        Self {
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    pub fn from_iter_with_capacity(capacity: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(capacity);
        for i in items {
            set.insert(i);
        }
        set
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1u64 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1u64 << (i & 63));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i >> 6)
            .is_some_and(|w| (w >> (i & 63)) & 1 == 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn intersection_len(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Removes every element `<= i`.
    pub fn clear_up_to(&mut self, i: usize) {
        let word = i >> 6;
        let upto = word.min(self.words.len());
        for w in self.words.iter_mut().take(upto) {
            *w = 0;
        }
        if let Some(w) = self.words.get_mut(word) {
            let bit = i & 63;
            if bit == 63 {
                *w = 0;
            } else {
                *w &= !((1u64 << (bit + 1)) - 1);
            }
        }
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    /// Smallest element strictly greater than `i`.
    pub fn next_after(&self, i: usize) -> Option<usize> {
        let start = i + 1;
        let mut k = start >> 6;
        if k >= self.words.len() {
            return None;
        }
        let mut w = self.words[k] & (u64::MAX << (start & 63));
        loop {
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
            k += 1;
            if k >= self.words.len() {
                return None;
            }
            w = self.words[k];
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut s = BitSet::new(130);
        for i in [0, 5, 63, 64, 65, 129] {
            s.insert(i);
        }
        assert_eq!(s.len(), 6);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 63, 64, 65, 129]);
        assert_eq!(s.next_after(5), Some(63));
        assert_eq!(s.next_after(65), Some(129));
        assert_eq!(s.next_after(129), None);
        s.clear_up_to(63);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![64, 65, 129]);
        s.clear_up_to(64);
        assert_eq!(s.first(), Some(65));
        assert!(!s.contains(1000));
    }
}
