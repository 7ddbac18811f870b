//! Matrix containers used by the structural model and both Petri nets.
//!
//! [`BoolMatrix`] is a coordinate-list boolean matrix. Knowledge bases grow
//! as `processes x resources` but stay very sparse, so only the ones are
//! stored. [`DenseMatrix`] backs the (small) incidence matrices.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    Mismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// Sparse boolean matrix stored as the set of coordinates holding a one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    ones: BTreeSet<(usize, usize)>,
}

impl BoolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BoolMatrix {
            rows,
            cols,
            ones: BTreeSet::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.ones.insert((i, i));
        }
        m
    }

    pub fn from_coords<I>(rows: usize, cols: usize, coords: I) -> Result<Self, ShapeError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::zeros(rows, cols);
        for (r, c) in coords {
            m.set(r, c, true)?;
        }
        Ok(m)
    }

    /// Builds a matrix from dense rows; handy in tests.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    m.ones.insert((i, j));
                }
            }
        }
        m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.ones.contains(&(row, col))
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) -> Result<(), ShapeError> {
        if row >= self.rows || col >= self.cols {
            return Err(ShapeError::OutOfBounds {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        if value {
            self.ones.insert((row, col));
        } else {
            self.ones.remove(&(row, col));
        }
        Ok(())
    }

    pub fn count_ones(&self) -> usize {
        self.ones.len()
    }

    /// Ones in row-major order.
    pub fn iter_ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ones.iter().copied()
    }

    pub fn row_ones(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.ones.range((row, 0)..(row + 1, 0)).map(|&(_, c)| c)
    }

    pub fn col_ones(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.ones.iter().filter(move |&&(_, c)| c == col).map(|&(r, _)| r)
    }

    pub fn transpose(&self) -> BoolMatrix {
        BoolMatrix {
            rows: self.cols,
            cols: self.rows,
            ones: self.ones.iter().map(|&(r, c)| (c, r)).collect(),
        }
    }

    /// Column-stacking position of `(row, col)`.
    pub fn vec_position(&self, row: usize, col: usize) -> usize {
        col * self.rows + row
    }

    /// Inverse of [`BoolMatrix::vec_position`].
    pub fn vec_coords(&self, position: usize) -> (usize, usize) {
        (position % self.rows, position / self.rows)
    }

    /// `vec()` of the matrix: positions of the ones after stacking columns,
    /// in ascending order.
    pub fn vectorize(&self) -> Vec<usize> {
        let mut positions: Vec<usize> = self.ones.iter().map(|&(r, c)| self.vec_position(r, c)).collect();
        positions.sort_unstable();
        positions
    }

    /// Element-wise `self AND NOT other`.
    pub fn boolean_subtract(&self, other: &BoolMatrix) -> Result<BoolMatrix, ShapeError> {
        if self.shape() != other.shape() {
            return Err(ShapeError::Mismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(BoolMatrix {
            rows: self.rows,
            cols: self.cols,
            ones: self.ones.difference(&other.ones).copied().collect(),
        })
    }

    pub fn to_dense<T: From<u8> + Copy>(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::filled(self.rows, self.cols, T::from(0));
        for &(r, c) in &self.ones {
            d[(r, c)] = T::from(1);
        }
        d
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> DenseMatrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.rows).map(move |r| self.data[r * self.cols + col])
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<T> DenseMatrix<T>
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::default(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = DenseMatrix::filled(self.rows, rhs.cols, T::default());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn column_sum(&self, col: usize) -> T {
        self.column(col).fold(T::default(), |acc, x| acc + x)
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.data[r * self.cols + c]
    }
}
