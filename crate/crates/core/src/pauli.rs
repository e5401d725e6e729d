//! Pauli operators in the binary symplectic representation.
//!
//! An operator on `n` qubits is stored as two bit-vectors and a phase
//! exponent: it equals `i^phase` times the tensor product of the letters
//! selected by `(x_j, z_j)`, where `(1,0)=X`, `(0,1)=Z` and `(1,1)=Y`. With
//! `Y = iXZ` this keeps Hermitian operators at even phase, so the sign of a
//! stabilizer is simply `(-1)^(phase/2)`.

use std::fmt;
use std::str::FromStr;

use crate::bits::{BitVec, Echelon};

/// Default cap on the number of generators a group may be enumerated over.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PauliError {
    #[error("invalid Pauli character {character:?} at position {position}")]
    Parse { position: usize, character: char },
    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("generator {index} is not Hermitian (phase must be 0 or 2)")]
    NonHermitian { index: usize },
    #[error("generators {first} and {second} anticommute")]
    NonCommuting { first: usize, second: usize },
    #[error("generators are dependent: GF(2) rank {rank} < {count}")]
    Dependent { rank: usize, count: usize },
    #[error("group over {count} generators exceeds the enumeration cap of {cap}")]
    EnumerationCap { count: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self { x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    /// Builds `i^phase · ⊗σ(x_j, z_j)`.
    pub fn from_parts(x: BitVec, z: BitVec, phase: u8) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::LengthMismatch { left: x.len(), right: z.len() });
        }
        Ok(Self { x, z, phase: phase % 4 })
    }

    /// `±` times the tensor product of `letters`.
    pub fn from_letters(letters: &str, negative: bool) -> Result<Self, PauliError> {
        let n = letters.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (position, character) in letters.chars().enumerate() {
            let letter = Letter::from_char(character).ok_or(PauliError::Parse { position, character })?;
            let (xb, zb) = letter.bits();
            x.set(position, xb);
            z.set(position, zb);
        }
        Ok(Self { x, z, phase: if negative { 2 } else { 0 } })
    }

    /// Operator with `letter` on `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    /// X on every qubit of `support`.
    pub fn x_type(support: &BitVec) -> Self {
        Self { x: support.clone(), z: BitVec::zeros(support.len()), phase: 0 }
    }

    /// Z on every qubit of `support`.
    pub fn z_type(support: &BitVec) -> Self {
        Self { x: BitVec::zeros(support.len()), z: support.clone(), phase: 0 }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        Letter::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n()).map(|j| self.letter(j))
    }

    /// Letter string without the phase prefix.
    pub fn letter_string(&self) -> String {
        self.letters().map(Letter::as_char).collect()
    }

    fn set_letter(&mut self, qubit: usize, letter: Letter) {
        let (xb, zb) = letter.bits();
        self.x.set(qubit, xb);
        self.z.set(qubit, zb);
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1` or `-1` for Hermitian operators.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self { phase: phase % 4, ..self.clone() }
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones()
    }

    /// Qubits where the operator is not the identity.
    pub fn support(&self) -> BitVec {
        let mut s = self.x.clone();
        for j in self.z.ones() {
            s.set(j, true);
        }
        s
    }

    /// Symplectic vector `x ‖ z`.
    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> usize {
        self.x.overlap(&self.z)
    }

    fn check_len(&self, other: &Self) -> Result<(), PauliError> {
        if self.n() != other.n() {
            return Err(PauliError::LengthMismatch { left: self.n(), right: other.n() });
        }
        Ok(())
    }

    /// Operator product `self · other` with exact phase tracking.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_len(other)?;
        // In the X^x Z^z convention the phase exponent gains one per Y letter,
        // and moving Z^{z1} past X^{x2} costs (-1)^{z1·x2}.
        let e1 = self.phase as usize + self.y_count();
        let e2 = other.phase as usize + other.y_count();
        let swap = 2 * self.z.overlap(&other.x);
        let x = self.x.xor(&other.x);
        let z = self.z.xor(&other.z);
        let y = x.overlap(&z);
        let phase = ((e1 + e2 + swap + 4 * y - y) % 4) as u8;
        Ok(Self { x, z, phase })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_len(other)?;
        Ok((self.x.overlap(&other.z) + self.z.overlap(&other.x)).is_multiple_of(2))
    }

    /// Conjugation by Hadamards on `qubits`: X and Z swap, Y picks up a sign.
    pub fn hadamard_conjugate(&self, qubits: &BitVec) -> Self {
        let mut out = self.clone();
        let mut flips = 0;
        for j in qubits.ones() {
            match self.letter(j) {
                Letter::X => out.set_letter(j, Letter::Z),
                Letter::Z => out.set_letter(j, Letter::X),
                Letter::Y => flips += 2,
                Letter::I => {}
            }
        }
        out.phase = ((out.phase as usize + flips) % 4) as u8;
        out
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letter_string())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    /// Accepts an optional `+`, `-`, `+i` or `-i` prefix followed by letters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, offset) = if s.starts_with("+i") {
            (1, 2)
        } else if s.starts_with("-i") {
            (3, 2)
        } else if s.starts_with('+') {
            (0, 1)
        } else if s.starts_with('-') {
            (2, 1)
        } else {
            (0, 0)
        };
        let mut p = Self::from_letters(&s[offset..], false).map_err(|e| match e {
            PauliError::Parse { position, character } => PauliError::Parse { position: position + offset, character },
            other => other,
        })?;
        p.phase = phase;
        Ok(p)
    }
}

/// Ordered list of commuting, independent, Hermitian Pauli operators.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratorSet {
    n: usize,
    generators: Vec<PauliOperator>,
}

/// How a Pauli operator decomposes over a generator set: `P = i^phase · S^b`
/// where `S^b` is the ascending-index product of the selected generators.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Expression {
    pub exponents: BitVec,
    pub phase: u8,
}

impl Expression {
    /// `+1` when `P = S^b`, `-1` when `P = -S^b`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

impl GeneratorSet {
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self, PauliError> {
        for g in &generators {
            if g.n() != n {
                return Err(PauliError::LengthMismatch { left: n, right: g.n() });
            }
        }
        for (index, g) in generators.iter().enumerate() {
            if !g.is_hermitian() {
                return Err(PauliError::NonHermitian { index });
            }
        }
        for first in 0..generators.len() {
            for second in first + 1..generators.len() {
                if !generators[first].commutes(&generators[second])? {
                    return Err(PauliError::NonCommuting { first, second });
                }
            }
        }
        let rows: Vec<BitVec> = generators.iter().map(PauliOperator::symplectic).collect();
        let rank = crate::bits::rank(&rows);
        if rank < generators.len() {
            return Err(PauliError::Dependent { rank, count: generators.len() });
        }
        Ok(Self { n, generators })
    }

    /// Parses Pauli strings; all must have the same length.
    pub fn parse<S: AsRef<str>>(strings: &[S]) -> Result<Self, PauliError> {
        let ops = strings.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<PauliOperator>, _>>()?;
        let n = ops.first().map_or(0, PauliOperator::n);
        Self::new(n, ops)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PauliOperator> {
        self.generators.iter()
    }

    /// `S^b`, the product of the generators selected by `b`.
    pub fn product(&self, b: &BitVec) -> PauliOperator {
        assert_eq!(b.len(), self.len(), "exponent length mismatch");
        b.ones().fold(PauliOperator::identity(self.n), |acc, i| {
            acc.multiply(&self.generators[i]).expect("lengths checked at construction")
        })
    }

    /// Iterates over all `2^m` group elements in Gray-code order, identity
    /// first.
    pub fn enumerate_group(&self, cap: usize) -> Result<GroupIter<'_>, PauliError> {
        let m = self.len();
        if m > cap || m >= 64 {
            return Err(PauliError::EnumerationCap { count: m, cap });
        }
        Ok(GroupIter {
            set: self,
            step: 0,
            total: 1u64 << m,
            b: BitVec::zeros(m),
            current: PauliOperator::identity(self.n),
        })
    }

    /// Extends the set to `n` generators, keeping the current generators as a
    /// prefix.
    ///
    /// Each step adds the lexicographically smallest symplectic vector (read
    /// with index 0 most significant) that commutes with everything chosen so
    /// far and lies outside their span, with sign `+`.
    pub fn complete_generators(&self) -> GeneratorSet {
        let n = self.n;
        let mut chosen = self.generators.clone();
        let mut span = Echelon::new(2 * n, n);
        for g in &chosen {
            span.insert(&g.symplectic());
        }
        while chosen.len() < n {
            // v = (vx, vz) commutes with (x, z) iff z·vx + x·vz = 0.
            let constraints: Vec<BitVec> = chosen.iter().map(|g| g.z_bits().concat(g.x_bits())).collect();
            let basis = crate::bits::null_space(&constraints, 2 * n);
            let mut reduced = crate::bits::rref(&basis, 2 * n);
            // Reduced rows sorted by ascending pivot: the smallest vector
            // outside the span is the last row that is not already in it.
            reduced.reverse();
            let pick = reduced
                .into_iter()
                .find(|v| !span.contains(v))
                .expect("an isotropic subspace of dimension < n has a proper commutant");
            span.insert(&pick);
            let op =
                PauliOperator::from_parts(pick.slice(0, n), pick.slice(n, n), 0).expect("halves have equal length");
            chosen.push(op);
        }
        GeneratorSet { n, generators: chosen }
    }

    /// Precomputes an elimination so many operators can be expressed cheaply.
    pub fn expresser(&self) -> Expresser<'_> {
        let mut echelon = Echelon::new(2 * self.n, self.len());
        for g in &self.generators {
            echelon.insert(&g.symplectic());
        }
        Expresser { set: self, echelon }
    }

    /// `b` and the phase relating `P` to `S^b`, or `None` if `P` is outside
    /// the span of the generators (up to phase).
    pub fn express_in_generators(&self, p: &PauliOperator) -> Result<Option<Expression>, PauliError> {
        self.expresser().express(p)
    }
}

pub struct Expresser<'a> {
    set: &'a GeneratorSet,
    echelon: Echelon,
}

impl Expresser<'_> {
    pub fn express(&self, p: &PauliOperator) -> Result<Option<Expression>, PauliError> {
        if p.n() != self.set.n {
            return Err(PauliError::LengthMismatch { left: self.set.n, right: p.n() });
        }
        let (residual, exponents) = self.echelon.reduce(&p.symplectic());
        if !residual.is_zero() {
            return Ok(None);
        }
        let s = self.set.product(&exponents);
        let phase = (4 + p.phase() - s.phase()) % 4;
        Ok(Some(Expression { exponents, phase }))
    }
}

pub struct GroupIter<'a> {
    set: &'a GeneratorSet,
    step: u64,
    total: u64,
    b: BitVec,
    current: PauliOperator,
}

impl Iterator for GroupIter<'_> {
    type Item = (BitVec, PauliOperator);

    fn next(&mut self) -> Option<Self::Item> {
        if self.step >= self.total {
            return None;
        }
        if self.step > 0 {
            // Gray code: step t toggles generator trailing_zeros(t).
            let i = self.step.trailing_zeros() as usize;
            self.b.flip(i);
            self.current = self.current.multiply(&self.set.generators[i]).expect("lengths checked at construction");
        }
        self.step += 1;
        Some((self.b.clone(), self.current.clone()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.step) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GroupIter<'_> {}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;

    // Independent oracle: Kronecker products of the 2x2 matrices.
    fn letter_matrix(l: Letter) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match l {
            Letter::I => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
            Letter::X => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
            Letter::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Letter::Z => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        }
    }

    fn kron_dense(p: &PauliOperator) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for l in p.letters() {
            m = m.kronecker(&letter_matrix(l));
        }
        m * Complex64::i().powu(p.phase() as u32)
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn pauli(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(letters, phase)| {
            let s: String = letters.iter().map(|&l| ['I', 'X', 'Y', 'Z'][l as usize]).collect();
            PauliOperator::from_letters(&s, false).unwrap().with_phase(phase)
        })
    }

    fn arb_pair() -> impl Strategy<Value = (PauliOperator, PauliOperator)> {
        (1usize..=6).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
    }

    #[test]
    fn parses_letters_and_signs() {
        let p = PauliOperator::from_letters("XXZX", false).unwrap();
        assert_eq!(p.x_bits().to_string(), "1101");
        assert_eq!(p.z_bits().to_string(), "0010");
        assert_eq!(p.phase(), 0);
        assert_eq!(pauli("IIII"), PauliOperator::identity(4));
        assert_eq!(pauli("-iXY").phase(), 3);
        assert_eq!(pauli("+iZ").phase(), 1);
        assert_eq!(pauli("-XZ").to_string(), "-XZ");
        assert_eq!(pauli("+XZ").to_string(), "XZ");
        assert_eq!("XQ".parse::<PauliOperator>().unwrap_err(), PauliError::Parse { position: 1, character: 'Q' });
        assert_eq!("-iXa".parse::<PauliOperator>().unwrap_err(), PauliError::Parse { position: 3, character: 'a' });
    }

    #[test]
    fn y_matches_the_standard_matrix() {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let expected = DMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
        assert!(max_diff(&kron_dense(&pauli("Y")), &expected) < 1e-15);
        assert!(max_diff(&crate::dense::pauli_matrix(&pauli("Y")), &expected) < 1e-15);
    }

    #[test]
    fn single_qubit_relations() {
        assert_eq!(pauli("X").multiply(&pauli("Z")).unwrap(), pauli("-iY"));
        assert_eq!(pauli("Z").multiply(&pauli("X")).unwrap(), pauli("+iY"));
        assert_eq!(pauli("X").multiply(&pauli("Y")).unwrap(), pauli("+iZ"));
        assert_eq!(pauli("-Y").multiply(&pauli("-Y")).unwrap(), pauli("I"));
        assert!(pauli("XI").commutes(&pauli("IZ")).unwrap());
        assert!(!pauli("X").commutes(&pauli("Z")).unwrap());
        assert_eq!(pauli("X").multiply(&pauli("XX")).unwrap_err(), PauliError::LengthMismatch { left: 1, right: 2 });
    }

    #[test]
    fn five_qubit_graph_generators_multiply_like_matrices() {
        let s1s2 = pauli("YYZIZ");
        let s2s3 = pauli("ZYYZI");
        let product = s1s2.multiply(&s2s3).unwrap();
        let dense = kron_dense(&s1s2) * kron_dense(&s2s3);
        assert!(max_diff(&kron_dense(&product), &dense) < 1e-12);
    }

    #[test]
    fn steane_generators_commute_densely() {
        let gens = ["XIIXXXI", "IXIXIXX", "IIXIXXX", "ZIIZZZI", "IZIZIZZ", "IIZIZZZ"];
        for a in gens {
            for b in gens {
                let (pa, pb) = (pauli(a), pauli(b));
                let (ma, mb) = (kron_dense(&pa), kron_dense(&pb));
                let comm = &ma * &mb - &mb * &ma;
                assert!(comm.iter().all(|c| c.norm() < 1e-12));
                assert!(pa.commutes(&pb).unwrap());
            }
        }
    }

    #[test]
    fn generator_set_rejects_bad_input() {
        assert_eq!(GeneratorSet::parse(&["XI", "ZI"]).unwrap_err(), PauliError::NonCommuting { first: 0, second: 1 });
        assert_eq!(GeneratorSet::parse(&["ZZ", "-ZZ"]).unwrap_err(), PauliError::Dependent { rank: 1, count: 2 });
        assert_eq!(GeneratorSet::parse(&["+iZ"]).unwrap_err(), PauliError::NonHermitian { index: 0 });
    }

    #[test]
    fn enumeration_sizes_and_cap() {
        let empty = GeneratorSet::new(3, vec![]).unwrap();
        let all: Vec<_> = empty.enumerate_group(20).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].1, PauliOperator::identity(3));

        let five = GeneratorSet::parse(&["YYZIZ", "ZYYZI", "IZYYZ", "ZIZYY"]).unwrap();
        let elems: Vec<_> = five.enumerate_group(20).unwrap().map(|(_, p)| p).collect();
        assert_eq!(elems.len(), 16);
        let distinct: std::collections::BTreeSet<_> = elems.iter().cloned().collect();
        assert_eq!(distinct.len(), 16);
        for a in &elems {
            assert_eq!(a.multiply(a).unwrap(), PauliOperator::identity(5));
            for b in &elems {
                assert!(a.commutes(b).unwrap());
            }
        }
        assert_eq!(five.enumerate_group(3).err().unwrap(), PauliError::EnumerationCap { count: 4, cap: 3 });
    }

    #[test]
    fn enumeration_matches_product() {
        let five = GeneratorSet::parse(&["YYZIZ", "ZYYZI", "IZYYZ", "ZIZYY"]).unwrap();
        for (b, p) in five.enumerate_group(20).unwrap() {
            assert_eq!(five.product(&b), p);
        }
    }

    #[test]
    fn completion_examples() {
        let steane = GeneratorSet::parse(&["XIIXXXI", "IXIXIXX", "IIXIXXX", "ZIIZZZI", "IZIZIZZ", "IIZIZZZ"]).unwrap();
        let full = steane.complete_generators();
        assert_eq!(full.len(), 7);
        assert_eq!(&full.generators()[..6], steane.generators());
        GeneratorSet::new(7, full.generators().to_vec()).unwrap();

        let five = GeneratorSet::parse(&["YYZIZ", "ZYYZI", "IZYYZ", "ZIZYY"]).unwrap();
        let full = five.complete_generators();
        assert_eq!(full.len(), 5);
        GeneratorSet::new(5, full.generators().to_vec()).unwrap();

        let already = full.complete_generators();
        assert_eq!(already, full);
    }

    #[test]
    fn completion_is_lexicographically_smallest() {
        // Brute force over all 4^n letter strings for a small set.
        let g = GeneratorSet::parse(&["XXX", "ZZI"]).unwrap();
        let full = g.complete_generators();
        let picked = full.generators()[2].symplectic();
        let span = [g.generators()[0].symplectic(), g.generators()[1].symplectic()];
        let key = |v: &BitVec| v.to_string();
        let mut best: Option<BitVec> = None;
        for bits in 1u64..64 {
            let v = BitVec::from_indices(6, (0..6).filter(|i| bits >> i & 1 == 1));
            let op = PauliOperator::from_parts(v.slice(0, 3), v.slice(3, 3), 0).unwrap();
            let commutes = g.iter().all(|h| h.commutes(&op).unwrap());
            let in_span = crate::bits::rank(&[span[0].clone(), span[1].clone(), v.clone()]) < 3;
            if commutes && !in_span && best.as_ref().is_none_or(|b| key(&v) < key(b)) {
                best = Some(v);
            }
        }
        assert_eq!(Some(picked), best);
    }

    #[test]
    fn express_examples() {
        let steane = GeneratorSet::parse(&["XIIXXXI", "IXIXIXX", "IIXIXXX", "ZIIZZZI", "IZIZIZZ", "IIZIZZZ"]).unwrap();
        let e = steane.express_in_generators(&pauli("IXIXIXX")).unwrap().unwrap();
        assert_eq!(e.exponents.to_string(), "010000");
        assert_eq!(e.sign(), Some(1));
        let g1g2 = steane.generators()[0].multiply(&steane.generators()[1]).unwrap();
        let e = steane.express_in_generators(&g1g2.negated()).unwrap().unwrap();
        assert_eq!(e.exponents.to_string(), "110000");
        assert_eq!(e.sign(), Some(-1));
        assert!(steane.express_in_generators(&pauli("XXXXXXX")).unwrap().is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn multiply_matches_dense((p, q) in arb_pair()) {
            let product = p.multiply(&q).unwrap();
            let dense = kron_dense(&p) * kron_dense(&q);
            prop_assert!(max_diff(&kron_dense(&product), &dense) < 1e-12);
        }

        #[test]
        fn commutes_matches_dense((p, q) in arb_pair()) {
            let (mp, mq) = (kron_dense(&p), kron_dense(&q));
            let comm = &mp * &mq - &mq * &mp;
            let zero = comm.iter().all(|c| c.norm() < 1e-12);
            prop_assert_eq!(p.commutes(&q).unwrap(), zero);
        }

        #[test]
        fn text_round_trip(p in (1usize..8).prop_flat_map(arb_pauli)) {
            prop_assert_eq!(p.to_string().parse::<PauliOperator>().unwrap(), p);
        }

        #[test]
        fn hermitian_squares_to_identity(p in (1usize..8).prop_flat_map(arb_pauli)) {
            let h = p.with_phase(p.phase() & 2);
            prop_assert_eq!(h.multiply(&h).unwrap(), PauliOperator::identity(h.n()));
        }
    }
}
