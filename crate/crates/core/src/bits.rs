//! Packed GF(2) bit-vectors and the small amount of linear algebra the rest of
//! the crate needs: rank, null spaces, and span membership with combination
//! tracking.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Index 0 is the
//! leftmost character of the text form, matching the qubit-0-first Pauli
//! strings.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit character {character:?} at position {position}")]
pub struct BitParseError {
    pub position: usize,
    pub character: char,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(WORD)] }
    }

    /// Vector of length `len` with ones exactly at `indices`.
    ///
    /// Panics if an index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    /// Low `len` bits of `value`, bit `i` of the integer becoming index `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len >= WORD { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = value & mask;
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self, BitParseError> {
        let mut v = Self::zeros(s.chars().count());
        for (position, character) in s.chars().enumerate() {
            match character {
                '0' => {}
                '1' => v.set(position, true),
                _ => return Err(BitParseError { position, character }),
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "bit-vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "bit-vector length mismatch");
        BitVec { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    /// Number of positions set in both vectors.
    pub fn overlap(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "bit-vector length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        self.overlap(other) % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// First set index, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    /// The bits as a `u64` (index `i` becomes bit `i`); `None` past 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        BitVec::from_indices(len, self.ones().filter(|&i| i >= start && i < start + len).map(|i| i - start))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Incremental row echelon form that remembers how each stored row was built
/// from the inserted vectors.
///
/// Each stored row has a pivot column that is cleared from every row stored
/// after it, so reducing a vector against the rows in insertion order leaves
/// zero exactly when the vector is in the span.
#[derive(Clone, Debug)]
pub struct Echelon {
    width: usize,
    capacity: usize,
    inserted: usize,
    rows: Vec<(usize, BitVec, BitVec)>,
}

impl Echelon {
    /// `width` is the vector length; `capacity` bounds how many vectors may be
    /// inserted (it sizes the combination vectors).
    pub fn new(width: usize, capacity: usize) -> Self {
        Self { width, capacity, inserted: 0, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v`, returning the residual and the combination of inserted
    /// vectors that was subtracted. The residual is zero iff `v` is in the span,
    /// in which case `v` equals the sum of the combination.
    pub fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let mut residual = v.clone();
        let mut combo = BitVec::zeros(self.capacity);
        for (pivot, row, row_combo) in &self.rows {
            if residual.get(*pivot) {
                residual.xor_assign(row);
                combo.xor_assign(row_combo);
            }
        }
        (residual, combo)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Inserts `v` and reports whether it was independent of the previous
    /// vectors. Dependent vectors still consume an index.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert!(self.inserted < self.capacity, "echelon capacity exceeded");
        let (residual, mut combo) = self.reduce(v);
        combo.flip(self.inserted);
        self.inserted += 1;
        match residual.first_one() {
            Some(pivot) => {
                self.rows.push((pivot, residual, combo));
                true
            }
            None => false,
        }
    }
}

/// Rank over GF(2).
pub fn rank(rows: &[BitVec]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut e = Echelon::new(first.len(), rows.len());
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of `{v : r·v = 0 for every row r}` in `width` columns.
///
/// The basis is returned in reduced form: one vector per free column, in
/// ascending free-column order.
pub fn null_space(rows: &[BitVec], width: usize) -> Vec<BitVec> {
    let reduced = rref(rows, width);
    let pivots: Vec<usize> = reduced.iter().map(|r| r.first_one().unwrap()).collect();
    let mut basis = Vec::new();
    for free in (0..width).filter(|c| !pivots.contains(c)) {
        let mut v = BitVec::zeros(width);
        v.set(free, true);
        for (row, &p) in reduced.iter().zip(&pivots) {
            if row.get(free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Reduced row echelon form; zero rows are dropped and rows are sorted by
/// pivot column.
pub fn rref(rows: &[BitVec], width: usize) -> Vec<BitVec> {
    let mut m: Vec<BitVec> = rows.to_vec();
    for r in &m {
        assert_eq!(r.len(), width, "row width mismatch");
    }
    let mut out_rows = 0;
    for col in 0..width {
        let Some(p) = (out_rows..m.len()).find(|&i| m[i].get(col)) else {
            continue;
        };
        m.swap(out_rows, p);
        let pivot = m[out_rows].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != out_rows && r.get(col) {
                r.xor_assign(&pivot);
            }
        }
        out_rows += 1;
    }
    m.truncate(out_rows);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display_round_trip() {
        let v = BitVec::parse("0110100").unwrap();
        assert_eq!(v.to_string(), "0110100");
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(BitVec::parse("01a").unwrap_err(), BitParseError { position: 2, character: 'a' });
    }

    #[test]
    fn long_vectors_cross_word_boundaries() {
        let v = BitVec::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(v.count_ones(), 4);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.concat(&v).count_ones(), 8);
        assert_eq!(v.slice(60, 10).ones().collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn null_space_of_hamming_matrix() {
        let h: Vec<BitVec> = ["1001110", "0101011", "0010111"].iter().map(|s| BitVec::parse(s).unwrap()).collect();
        let ns = null_space(&h, 7);
        assert_eq!(ns.len(), 4);
        for v in &ns {
            for r in &h {
                assert!(!r.dot(v));
            }
        }
        assert_eq!(rank(&ns), 4);
    }

    fn vecs(width: usize, count: usize) -> impl Strategy<Value = Vec<BitVec>> {
        prop::collection::vec(prop::collection::vec(any::<bool>(), width), count).prop_map(move |rows| {
            rows.into_iter()
                .map(|bits| {
                    BitVec::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i))
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in vecs(9, 6)) {
            let r = rank(&rows);
            let ns = null_space(&rows, 9);
            prop_assert_eq!(r + ns.len(), 9);
            for v in &ns {
                for row in &rows {
                    prop_assert!(!row.dot(v));
                }
            }
        }

        #[test]
        fn echelon_combination_reproduces_vector(rows in vecs(8, 6), target in vecs(8, 1)) {
            let mut e = Echelon::new(8, rows.len());
            for r in &rows {
                e.insert(r);
            }
            let (residual, combo) = e.reduce(&target[0]);
            let mut rebuilt = residual.clone();
            for i in combo.ones() {
                rebuilt.xor_assign(&rows[i]);
            }
            prop_assert_eq!(rebuilt, target[0].clone());
        }
    }
}
