//! Square sparse matrices with exact entries, stored by column.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg};

use num_traits::{One, Zero};

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + PartialEq + Debug + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// Columns hold `(row, value)` pairs sorted by row, with no stored zeros, so
/// structural equality is matrix equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix<T> {
    dim: usize,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            cols: (0..dim).map(|j| vec![(j, T::one())]).collect(),
        }
    }

    /// Column `j` has a single 1 in row `map[j]`, or is zero.
    pub fn from_partial_map(map: &[Option<usize>]) -> Self {
        Self {
            dim: map.len(),
            cols: map
                .iter()
                .map(|r| r.map(|i| vec![(i, T::one())]).unwrap_or_default())
                .collect(),
        }
    }

    /// Sums repeated `(row, col, value)` entries.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Self {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); dim];
        for (i, j, x) in triplets {
            let entry = acc[j].entry(i).or_insert_with(T::zero);
            *entry = entry.clone() + x;
        }
        Self {
            dim,
            cols: acc
                .into_iter()
                .map(|col| col.into_iter().filter(|(_, x)| !x.is_zero()).collect())
                .collect(),
        }
    }

    pub fn diagonal(entries: impl IntoIterator<Item = (usize, T)>, dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for (i, x) in entries {
            if !x.is_zero() {
                m.cols[i] = vec![(i, x)];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cols[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map(|(_, x)| x.clone())
            .unwrap_or_else(T::zero)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    /// Iterator over `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, x)| (*i, j, x)))
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.dim];
        for (i, j, x) in self.entries() {
            cols[i].push((j, x.clone()));
        }
        // entries() visits columns in order, so each new column is sorted
        Self {
            dim: self.dim,
            cols,
        }
    }

    /// `self · v`
    pub fn apply(&self, v: &[(usize, T)]) -> Vec<(usize, T)> {
        if let [(j, x)] = v {
            return self.cols[*j]
                .iter()
                .map(|(i, y)| (*i, y.clone() * x.clone()))
                .filter(|(_, z)| !z.is_zero())
                .collect();
        }
        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
        for (j, x) in v {
            for (i, y) in &self.cols[*j] {
                let entry = acc.entry(*i).or_insert_with(T::zero);
                *entry = entry.clone() + y.clone() * x.clone();
            }
        }
        acc.into_iter().filter(|(_, z)| !z.is_zero()).collect()
    }

    /// `self · other`
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            cols: other.cols.iter().map(|col| self.apply(col)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .zip(&other.cols)
                .map(|(a, b)| {
                    let mut acc: BTreeMap<usize, T> = a.iter().cloned().collect();
                    for (i, y) in b {
                        let entry = acc.entry(*i).or_insert_with(T::zero);
                        *entry = entry.clone() + y.clone();
                    }
                    acc.into_iter().filter(|(_, z)| !z.is_zero()).collect()
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zeros(self.dim);
        }
        Self {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|(i, x)| (*i, x.clone() * c.clone()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|(i, x)| (*i, f(x)))
                        .filter(|(_, y)| !y.is_zero())
                        .collect()
                })
                .collect(),
        }
    }

    /// `A Aᵀ A = A`. Over the reals the transpose is the adjoint.
    pub fn is_partial_isometry(&self) -> bool {
        self.mul(&self.transpose()).mul(self) == *self
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    /// Every entry is 1 and every column has at most one entry.
    pub fn is_partial_permutation_pattern(&self) -> bool {
        self.cols
            .iter()
            .all(|col| col.len() <= 1 && col.iter().all(|(_, x)| x.is_one()))
    }
}
