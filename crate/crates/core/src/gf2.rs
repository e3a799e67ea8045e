//! Bit-packed linear algebra over F_2.
//!
//! A point of F_2^n is identified with the integer sum x_i 2^{i-1}: coordinate
//! x_1 lives in the least-significant bit. Rendered strings list coordinates
//! as x_n ... x_1, so the string "110" over n = 3 has x_3 = 1, x_2 = 1, x_1 = 0
//! and encodes the integer 6.

use std::fmt;
use std::ops::BitXor;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest supported ambient dimension. A 2^n-bit point mask at n = 30 is
/// 128 MiB, the ceiling for a single in-memory table.
pub const MAX_AMBIENT: usize = 30;

pub(crate) fn check_ambient(n: usize) -> Result<()> {
    if n == 0 || n > MAX_AMBIENT {
        return Err(Error::AmbientOutOfRange {
            n,
            min: 1,
            max: MAX_AMBIENT,
        });
    }
    Ok(())
}

pub(crate) fn check_subdim(n: usize, d: usize) -> Result<()> {
    check_ambient(n)?;
    if d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    Ok(())
}

/// A vector of F_2^n, packed into the low n bits of a word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    n: usize,
    bits: u32,
}

impl BitVector {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        check_ambient(n)?;
        if n < 32 && bits >> n != 0 {
            return Err(Error::invalid(format!(
                "bits {bits:#x} exceed dimension {n}"
            )));
        }
        Ok(BitVector { n, bits })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// i-th standard basis vector; bit i carries coordinate x_{i+1}.
    pub fn unit(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::invalid(format!("coordinate {i} out of range for n={n}")));
        }
        Self::new(n, 1u32 << i)
    }

    /// Parses "x_n ... x_1" (most-significant coordinate first).
    pub fn from_coord_string(s: &str) -> Result<Self> {
        let n = s.len();
        check_ambient(n)?;
        let mut bits = 0u32;
        for (pos, ch) in s.chars().enumerate() {
            let bit = match ch {
                '0' => 0u32,
                '1' => 1u32,
                _ => return Err(Error::Parse(format!("bad character {ch:?} in {s:?}"))),
            };
            bits |= bit << (n - 1 - pos);
        }
        Ok(BitVector { n, bits })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Integer encoding, usable directly as a table index.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Coordinate x_{i+1}, i.e. bit position i.
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.bits >> i & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// ⟨x,y⟩ = sum x_i y_i mod 2, as 0 or 1.
    pub fn dot(&self, other: &BitVector) -> Result<u8> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(dot_words(self.bits, other.bits))
    }

    /// Renders coordinates as x_n ... x_1.
    pub fn to_coord_string(&self) -> String {
        (0..self.n)
            .rev()
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl BitXor for BitVector {
    type Output = BitVector;

    /// Vector addition over F_2. Panics on dimension mismatch; use only on
    /// vectors known to share an ambient space.
    fn bitxor(self, rhs: BitVector) -> BitVector {
        assert_eq!(self.n, rhs.n, "xor of vectors from different spaces");
        BitVector {
            n: self.n,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_coord_string())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_coord_string())
    }
}

pub(crate) fn dot_words(a: u32, b: u32) -> u8 {
    ((a & b).count_ones() & 1) as u8
}

/// A matrix over F_2 with rows packed as words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<u32>,
}

impl BitMatrix {
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        check_ambient(cols)?;
        let mut words = Vec::with_capacity(rows.len());
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch {
                    left: cols,
                    right: r.dim(),
                });
            }
            words.push(r.bits());
        }
        Ok(BitMatrix { cols, rows: words })
    }

    pub fn from_row_words(cols: usize, rows: Vec<u32>) -> Result<Self> {
        check_ambient(cols)?;
        for &w in &rows {
            if cols < 32 && w >> cols != 0 {
                return Err(Error::invalid(format!(
                    "row word {w:#x} exceeds {cols} columns"
                )));
            }
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Self::from_row_words(cols, vec![0; rows])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_row_words(n, (0..n).map(|i| 1u32 << i).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector {
            n: self.cols,
            bits: self.rows[i],
        }
    }

    pub fn row_words(&self) -> &[u32] {
        &self.rows
    }

    /// M·v, an element of F_2^rows. Errors when rows = 0 since F_2^0 has no
    /// BitVector representation.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: v.dim(),
            });
        }
        check_ambient(self.rows.len())?;
        let mut bits = 0u32;
        for (i, &row) in self.rows.iter().enumerate() {
            bits |= u32::from(dot_words(row, v.bits())) << i;
        }
        BitVector::new(self.rows.len(), bits)
    }

    pub fn transpose(&self) -> Result<BitMatrix> {
        check_ambient(self.rows.len().max(1))?;
        let mut out = vec![0u32; self.cols];
        for (i, &row) in self.rows.iter().enumerate() {
            for (j, word) in out.iter_mut().enumerate() {
                *word |= (row >> j & 1) << i;
            }
        }
        BitMatrix::from_row_words(self.rows.len().max(1), out)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix[{}x{}](", self.rows.len(), self.cols)?;
        for (i, _) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&self.row(i).to_coord_string())?;
        }
        f.write_str(")")
    }
}

/// Reduced row-echelon form with zero rows removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefForm {
    pub matrix: BitMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Gaussian elimination preferring the lowest-index column as pivot.
pub fn rref(m: &BitMatrix) -> RrefForm {
    let mut rows: Vec<u32> = m.rows.iter().copied().filter(|&w| w != 0).collect();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..m.cols {
        let Some(hit) = (r..rows.len()).find(|&i| rows[i] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(r, hit);
        let pivot_row = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row >> col & 1 == 1 {
                *row ^= pivot_row;
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    rows.retain(|&w| w != 0);
    debug_assert_eq!(rows.len(), pivots.len());
    RrefForm {
        matrix: BitMatrix {
            cols: m.cols,
            rows,
        },
        rank: pivots.len(),
        pivots,
    }
}

/// Basis of {v : M·v = 0}; the count is cols − rank(M).
pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    let reduced = rref(m);
    let mut basis = Vec::with_capacity(m.cols - reduced.rank);
    for free in 0..m.cols {
        if reduced.pivots.contains(&free) {
            continue;
        }
        let mut bits = 1u32 << free;
        for (row_idx, &p) in reduced.pivots.iter().enumerate() {
            if reduced.matrix.rows[row_idx] >> free & 1 == 1 {
                bits |= 1 << p;
            }
        }
        debug_assert!(m.rows.iter().all(|&row| dot_words(row, bits) == 0));
        basis.push(BitVector {
            n: m.cols,
            bits,
        });
    }
    basis
}

fn check_qbinom_args(n: usize, d: usize) -> Result<()> {
    if d > n {
        return Err(Error::DimensionOutOfRange { d, n });
    }
    Ok(())
}

/// Gaussian binomial coefficient at q = 2: the number of d-dimensional
/// linear subspaces of F_2^n,
/// prod_{i=0}^{d-1} (2^{n-i} - 1) / (2^{d-i} - 1).
pub fn q_binomial(n: usize, d: usize) -> Result<BigUint> {
    check_qbinom_args(n, d)?;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        num *= (BigUint::one() << (n - i)) - BigUint::one();
        den *= (BigUint::one() << (d - i)) - BigUint::one();
    }
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Number of affine d-flats of F_2^n: 2^{n-d} cosets per subspace.
pub fn flat_count(n: usize, d: usize) -> Result<BigUint> {
    check_qbinom_args(n, d)?;
    Ok(q_binomial(n, d)? << (n - d))
}
