//! Partitioning `A^T B` into block tasks and assembling the results.
//!
//! The product of `A` (`s x k`) and `B` (`s x b`) is tiled by a grid of
//! block products: column-groups of `A` against column-groups of `B`.
//! Blocks are indexed 1-based in row-major order over the grid — block 1
//! is the top-left tile — matching the `v_1..v_4` numbering used by the
//! array-code examples:
//!
//! ```text
//!   A^T B = [ v1 v2 ]     v_i = (A column-group)^T (B column-group)
//!           [ v3 v4 ]
//! ```
//!
//! Two named splits are provided. `SquareGrid { m }` forms an `m x m`
//! grid (requires `m | k`, `m | b`). `TallTiles { m }` forms a
//! `(b/m) x m` grid of `(mk/b) x (b/m)` blocks (requires `m | b`,
//! `b | k`), i.e. exactly `b` tasks that tile the product disjointly.
//! `Grid { rows, cols }` is the general form used by the coded
//! pipelines, where the grid must match a code's `k x b` cell layout.

use crate::error::Error;
use crate::matrix::{matmul_oracle, DenseMatrix};
use crate::Result;

// ---------- Plan types ----------

/// How to split the operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionScheme {
    /// `m x m` grid: `A` and `B` each split into `m` column-groups.
    SquareGrid { m: usize },
    /// `b` tasks: `A` split into `b/m` column-groups of `mk/b` columns,
    /// `B` into `m` column-groups of `b/m` columns.
    TallTiles { m: usize },
    /// Explicit grid; `rows | k` and `cols | b` must hold.
    Grid { rows: usize, cols: usize },
}

/// A fully determined split: grid shape, per-block dimensions, ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub scheme: PartitionScheme,
    /// Grid of block products laid over the `k x b` output.
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Each `A^T` block is `block_aadims.0 x s` (a column-group of `A`).
    pub block_a: (usize, usize),
    /// Each `B` block is `s x block_b.1`.
    pub block_b: (usize, usize),
    pub k: usize,
    pub b: usize,
    pub s: usize,
    pub ring: crate::ring::Ring,
}

impl PartitionPlan {
    pub fn task_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }
}

/// One block task: which columns of `A` and of `B` it multiplies.
/// `index` is the 1-based row-major position in the plan's grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDescriptor {
    pub index: usize,
    pub a_cols: (usize, usize),
    pub b_cols: (usize, usize),
}

/// One computed block of the product, tagged with its grid index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceBlock {
    pub index: usize,
    pub value: DenseMatrix,
}

// ---------- Planning ----------

fn require_divides(d: usize, n: usize, constraint: &str) -> Result<()> {
    if d == 0 || n % d != 0 {
        return Err(Error::Divisibility {
            constraint: format!("{constraint} (got {d} ∤ {n})"),
        });
    }
    Ok(())
}

/// Split `A` and `B` per the chosen scheme.
///
/// Returns the plan and its task descriptors; descriptors cover disjoint
/// column ranges whose block products tile `A^T B` exactly.
pub fn partition(a: &DenseMatrix, b: &DenseMatrix, scheme: PartitionScheme) -> Result<(PartitionPlan, Vec<TaskDescriptor>)> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "partition needs a shared inner dimension s",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let (k, bb, s) = (a.cols(), b.cols(), a.rows());
    let (grid_rows, grid_cols) = match scheme {
        PartitionScheme::SquareGrid { m } => {
            require_divides(m, k, "square grid requires m | k")?;
            require_divides(m, bb, "square grid requires m | b")?;
            (m, m)
        }
        PartitionScheme::TallTiles { m } => {
            require_divides(m, bb, "tall tiling requires m | b")?;
            require_divides(bb, k, "tall tiling requires b | k")?;
            // b tasks: (b/m) row-groups of mk/b rows, m column-groups of b/m columns.
            (bb / m, m)
        }
        PartitionScheme::Grid { rows, cols } => {
            require_divides(rows, k, "grid rows must divide k")?;
            require_divides(cols, bb, "grid cols must divide b")?;
            (rows, cols)
        }
    };
    let br = k / grid_rows;
    let bc = bb / grid_cols;
    let plan = PartitionPlan {
        scheme,
        grid_rows,
        grid_cols,
        block_a: (br, s),
        block_b: (s, bc),
        k,
        b: bb,
        s,
        ring: a.ring(),
    };
    let mut tasks = Vec::with_capacity(plan.task_count());
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            tasks.push(TaskDescriptor {
                index: gr * grid_cols + gc + 1,
                a_cols: (gr * br, (gr + 1) * br),
                b_cols: (gc * bc, (gc + 1) * bc),
            });
        }
    }
    Ok((plan, tasks))
}

/// Convenience wrapper for the general grid split.
pub fn grid_plan(a: &DenseMatrix, b: &DenseMatrix, rows: usize, cols: usize) -> Result<(PartitionPlan, Vec<TaskDescriptor>)> {
    partition(a, b, PartitionScheme::Grid { rows, cols })
}

/// Compute every block product named by the descriptors.
pub fn compute_blocks(a: &DenseMatrix, b: &DenseMatrix, tasks: &[TaskDescriptor]) -> Result<Vec<SourceBlock>> {
    tasks
        .iter()
        .map(|t| {
            let ab = a.col_slice(t.a_cols.0, t.a_cols.1);
            let bb = b.col_slice(t.b_cols.0, t.b_cols.1);
            Ok(SourceBlock {
                index: t.index,
                value: matmul_oracle(&ab, &bb)?,
            })
        })
        .collect()
}

// ---------- Assembly ----------

/// Stitch source blocks back into the full `k x b` product.
///
/// Every grid index `1..=task_count` must be present exactly once and
/// each block must have the plan's block shape.
pub fn assemble(blocks: &[SourceBlock], plan: &PartitionPlan) -> Result<DenseMatrix> {
    let count = plan.task_count();
    let mut seen = vec![false; count];
    let mut out = DenseMatrix::zeros(plan.k, plan.b, plan.ring);
    let (br, bc) = (plan.block_a.0, plan.block_b.1);
    for blk in blocks {
        if blk.index == 0 || blk.index > count {
            return Err(Error::BlockIndexOutOfRange {
                index: blk.index,
                max: count,
            });
        }
        if seen[blk.index - 1] {
            return Err(Error::DuplicateBlock(blk.index));
        }
        seen[blk.index - 1] = true;
        if blk.value.rows() != br || blk.value.cols() != bc {
            return Err(Error::DimensionMismatch {
                context: "block shape does not match plan",
                left_rows: br,
                left_cols: bc,
                right_rows: blk.value.rows(),
                right_cols: blk.value.cols(),
            });
        }
        if blk.value.ring() != plan.ring {
            return Err(Error::RingMismatch);
        }
        let gr = (blk.index - 1) / plan.grid_cols;
        let gc = (blk.index - 1) % plan.grid_cols;
        for r in 0..br {
            for c in 0..bc {
                out.set(gr * br + r, gc * bc + c, blk.value.get(r, c));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::MissingBlock(missing + 1));
    }
    Ok(out)
}
