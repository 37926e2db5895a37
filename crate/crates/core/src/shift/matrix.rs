use std::fmt;

use num_traits::{CheckedAdd, CheckedMul, One, Zero};
use rayon::prelude::*;

/// Square boolean matrix with packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{}, {} ones)", self.n, self.n, self.count_ones())
    }
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Option<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return None;
            }
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        Some(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn row_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.row(i))
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.row_sum(i)).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        self.transpose().row_sums()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in self.row_ones(i) {
                t.set(j, i, true);
            }
        }
        t
    }

    pub fn union(&self, other: &Self) -> Self {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        BitMatrix { n: self.n, words: self.words, bits }
    }

    /// `(i, j)` for every one, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.row_ones(i).map(move |j| (i, j)))
    }

    /// Exact integer product `self · other`, row-major.
    pub fn product(&self, other: &Self) -> ProductMatrix {
        let t = other.transpose();
        let t = &t;
        let n = self.n;
        let entries = (0..n)
            .into_par_iter()
            .flat_map_iter(move |i| {
                let r = self.row(i);
                (0..n).map(move |k| and_count(r, t.row(k)))
            })
            .collect();
        ProductMatrix { n, entries }
    }

    /// Vertices reachable from `start` along ones.
    pub fn reachable(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for v in self.row_ones(u) {
                if !std::mem::replace(&mut seen[v], true) {
                    stack.push(v);
                }
            }
        }
        seen
    }
}

pub(crate) fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(k, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(64 * k + b)
        })
    })
}

pub(crate) fn and_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Integer product of two boolean matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductMatrix {
    n: usize,
    entries: Vec<u32>,
}

impl ProductMatrix {
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n + j]
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&e| u64::from(e)).sum()
    }

    /// `(i, j, value)` row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.entries.iter().enumerate().map(move |(k, &e)| (k / self.n, k % self.n, e))
    }
}

/// Dense square matrix over a counting semiring. Overflow is reported as `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix<S> {
    n: usize,
    entries: Vec<S>,
}

impl<S> CountMatrix<S>
where
    S: Clone + Zero + One + CheckedAdd + CheckedMul,
{
    pub fn from_bits(m: &BitMatrix) -> Self {
        let n = m.size();
        let entries = (0..n * n).map(|k| if m.get(k / n, k % n) { S::one() } else { S::zero() }).collect();
        CountMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n).map(|k| if k / n == k % n { S::one() } else { S::zero() }).collect();
        CountMatrix { n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.n + j]
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let mut acc = S::zero();
                for j in 0..n {
                    let a = &self.entries[i * n + j];
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.checked_add(&a.checked_mul(&other.entries[j * n + k])?)?;
                }
                entries.push(acc);
            }
        }
        Some(CountMatrix { n, entries })
    }

    /// `self^e` by repeated squaring.
    pub fn checked_pow(&self, mut e: u32) -> Option<Self> {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Some(result)
    }

    pub fn checked_total(&self) -> Option<S> {
        self.entries.iter().try_fold(S::zero(), |acc, e| acc.checked_add(e))
    }
}
