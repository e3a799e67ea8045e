//! Unnormalized Walsh–Hadamard transform, convolution, and spectrum support
//! over F_2^n. Everything is exact integer arithmetic.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gf2::{check_ambient, BitVector};

/// A function F_2^n → Z, tabulated at all 2^n points (index = encoding).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueTable {
    n: usize,
    values: Vec<BigInt>,
}

impl ValueTable {
    pub fn new(n: usize, values: Vec<BigInt>) -> Result<Self> {
        check_ambient(n)?;
        if values.len() != 1 << n {
            return Err(Error::invalid(format!(
                "table length {} != 2^{n}",
                values.len()
            )));
        }
        Ok(ValueTable { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_ambient(n)?;
        Ok(ValueTable {
            n,
            values: vec![BigInt::zero(); 1 << n],
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> BigInt) -> Result<Self> {
        check_ambient(n)?;
        Ok(ValueTable {
            n,
            values: (0..1u32 << n).map(|x| f(x)).collect(),
        })
    }

    /// Dirac delta at a point: the convolution identity.
    pub fn delta(n: usize, point: u32) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        if point as usize >= t.values.len() {
            return Err(Error::invalid(format!("point {point} outside F_2^{n}")));
        }
        t.values[point as usize] = BigInt::from(1);
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn value(&self, x: u32) -> &BigInt {
        &self.values[x as usize]
    }

    pub fn into_values(self) -> Vec<BigInt> {
        self.values
    }
}

/// f̂(ξ) = Σ_x f(x)(−1)^{⟨ξ,x⟩}, computed by the in-place butterfly: one
/// (a,b) → (a+b, a−b) pass per coordinate, (2^n)·n integer additions.
/// Applying it twice yields 2^n·f.
pub fn wht(f: &ValueTable) -> ValueTable {
    let mut t = f.values.clone();
    for i in 0..f.n {
        let stride = 1usize << i;
        let mut base = 0usize;
        while base < t.len() {
            for lo in base..base + stride {
                let a = std::mem::take(&mut t[lo]);
                let b = std::mem::take(&mut t[lo + stride]);
                t[lo] = &a + &b;
                t[lo + stride] = a - b;
            }
            base += stride << 1;
        }
    }
    ValueTable {
        n: f.n,
        values: t,
    }
}

/// (f∗g)(x) = Σ_y f(y)·g(x−y), by direct summation. Quadratic in table
/// size; kept definitional so the convolution theorem test is a genuine
/// cross-check of `wht`, not a tautology.
pub fn convolve(f: &ValueTable, g: &ValueTable) -> Result<ValueTable> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch {
            left: f.n,
            right: g.n,
        });
    }
    let size = f.values.len();
    let mut out = vec![BigInt::zero(); size];
    for (y, fy) in f.values.iter().enumerate() {
        if fy.is_zero() {
            continue;
        }
        for (z, gz) in g.values.iter().enumerate() {
            if !gz.is_zero() {
                out[y ^ z] += fy * gz;
            }
        }
    }
    Ok(ValueTable {
        n: f.n,
        values: out,
    })
}

/// {ξ : f̂(ξ) ≠ 0}, sorted by encoding.
pub fn spectrum_support(f: &ValueTable) -> Vec<BitVector> {
    let hat = wht(f);
    hat.values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(xi, _)| BitVector::new(f.n, xi as u32).expect("index within 2^n"))
        .collect()
}

/// In-place sum-fold of a word table along one direction: both of t[x] and
/// t[x ^ dir] become their sum. After folding along a subspace basis, entry
/// x holds Σ_{u ∈ U} t₀[x+u]. Shared kernel for the statistics fast path.
/// Counts must be small enough that 2^d · max(t) fits the word; callers fold
/// 0/1 indicators with d ≤ n ≤ 30, so u32 suffices.
pub(crate) fn sum_fold_words(t: &mut [u32], dir: u32) {
    debug_assert!(dir != 0 && (dir as usize) < t.len());
    let h = 31 - dir.leading_zeros();
    let lo_size = 1usize << h;
    let mut base = 0usize;
    while base < t.len() {
        for lo in base..base + lo_size {
            let j = lo ^ dir as usize;
            let s = t[lo] + t[j];
            t[lo] = s;
            t[j] = s;
        }
        base += lo_size << 1;
    }
}
