//! Row-compressed sparse matrices keyed by `(row, column)` node pairs.

use alloc::vec::Vec;

use crate::cascade::NodeId;

/// Largest dimension for which [`SparseMatrix::to_dense`] will allocate.
pub const DENSE_LIMIT: usize = 10_000;

/// Compressed sparse row matrix over `dimension × dimension` node pairs.
///
/// Columns inside a row are strictly ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    dimension: usize,
    row_ptr: Vec<usize>,
    cols: Vec<NodeId>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            row_ptr: alloc::vec![0; dimension + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets sorted by `(row, col)` with no
    /// repeated pair.
    pub(crate) fn from_sorted_triplets(
        dimension: usize,
        triplets: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Self {
        let mut row_ptr = alloc::vec![0usize; dimension + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (r, c, v) in triplets {
            debug_assert!(r.index() < dimension && c.index() < dimension);
            row_ptr[r.index() + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..dimension {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dimension,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Builds from per-row `(col, value)` lists, each sorted by column.
    pub(crate) fn from_rows(dimension: usize, rows: Vec<Vec<(NodeId, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), dimension);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dimension + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dimension,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: NodeId) -> (&[NodeId], &[f64]) {
        if r.index() >= self.dimension {
            return (&[], &[]);
        }
        let span = self.row_ptr[r.index()]..self.row_ptr[r.index() + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    pub fn get(&self, r: NodeId, c: NodeId) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |i| vals[i])
    }

    pub fn row_sum(&self, r: NodeId) -> f64 {
        self.row(r).1.iter().sum()
    }

    /// All stored `(row, col, value)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.dimension).flat_map(move |r| {
            let r = NodeId(r as u32);
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Dense row-major copy, refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Option<Vec<f64>> {
        if self.dimension > DENSE_LIMIT {
            return None;
        }
        let mut out = alloc::vec![0.0; self.dimension * self.dimension];
        for (r, c, v) in self.iter() {
            out[r.index() * self.dimension + c.index()] = v;
        }
        Some(out)
    }
}
