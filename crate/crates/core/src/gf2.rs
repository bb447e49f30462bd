//! Small GF(2) linear-algebra kit over rows packed into `u64`.

/// Incrementally maintained echelon basis, used to test linear independence.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    pivots: [u64; 64],
    rank: usize,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon {
            pivots: [0; 64],
            rank: 0,
        }
    }

    #[cfg(test)]
    pub fn rank(&self) -> usize {
        self.rank
    }

    fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            let p = self.pivots[top];
            if p == 0 {
                break;
            }
            v ^= p;
        }
        v
    }

    /// Adds `v` to the span; returns false when it was already in it.
    pub fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.pivots[63 - r.leading_zeros() as usize] = r;
        self.rank += 1;
        true
    }

    #[cfg(test)]
    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }
}

pub(crate) fn rank(rows: &[u64]) -> usize {
    let mut e = Echelon::new();
    rows.iter().filter(|&&r| e.insert(r)).count()
}

/// Basis of `{x : popcount(x & row) even for every row}` over the low `n` bits.
pub(crate) fn null_space(rows: &[u64], n: u32) -> Vec<u64> {
    // reduced row echelon form, pivot = highest set bit
    let mut m: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &p in &m {
            let pb = 63 - p.leading_zeros();
            if v >> pb & 1 == 1 {
                v ^= p;
            }
        }
        if v == 0 {
            continue;
        }
        let vb = 63 - v.leading_zeros();
        for p in m.iter_mut() {
            if *p >> vb & 1 == 1 {
                *p ^= v;
            }
        }
        m.push(v);
    }
    let pivot_mask = m
        .iter()
        .fold(0u64, |acc, p| acc | 1u64 << (63 - p.leading_zeros()));
    (0..n)
        .rev()
        .filter(|f| pivot_mask >> f & 1 == 0)
        .map(|f| {
            let mut x = 1u64 << f;
            for p in &m {
                if p >> f & 1 == 1 {
                    x |= 1u64 << (63 - p.leading_zeros());
                }
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_independence() {
        assert_eq!(rank(&[0b110, 0b011, 0b101]), 2);
        assert_eq!(rank(&[0b100, 0b010, 0b001]), 3);
        assert_eq!(rank(&[0, 0]), 0);
        let mut e = Echelon::new();
        assert!(e.insert(0b1100));
        assert!(e.insert(0b0110));
        assert!(e.contains(0b1010));
        assert!(!e.insert(0b1010));
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn null_space_is_orthogonal_and_full() {
        let rows = [0b1101_0010u64, 0b0110_1001, 0b0000_1111];
        let ns = null_space(&rows, 8);
        assert_eq!(ns.len(), 8 - rank(&rows));
        assert_eq!(rank(&ns), ns.len());
        for x in &ns {
            for r in &rows {
                assert_eq!((x & r).count_ones() % 2, 0);
            }
        }
    }
}
