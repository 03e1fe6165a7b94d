//! Baseline coded-computation schemes: polynomial codes, MatDot codes,
//! and plain uncoded distribution.
//!
//! Polynomial codes group the columns of each operand and hand worker
//! `j` the evaluations `a_j = sum_i A_i j^i` and `b_j = sum_l B_l j^{m l}`;
//! the worker's block product is then the degree-`(m^2 - 1)` polynomial
//! `sum_{i,l} A_i^T B_l j^{i + m l}` evaluated at `j`, so any `m^2`
//! distinct evaluations recover every output block by interpolation.
//!
//! MatDot codes split the inner dimension instead: `p_A(x) = sum A_i x^i`
//! and `p_B(x) = sum B_i x^{m-1-i}` make the coefficient of `x^{m-1}` in
//! `p_A^T p_B` equal to the whole product `A^T B`, recoverable from any
//! `2m - 1` evaluations — fewer workers needed, but every worker returns
//! a full `k x b` matrix instead of one block.
//!
//! Decoding here is an exact Vandermonde solve over the ring; the
//! asymptotically-efficient interpolation charged by the latency model
//! is an accounting convention, not something this module implements.

use crate::error::Error;
use crate::matrix::{matmul_oracle, DenseMatrix};
use crate::partition::{grid_plan, PartitionPlan, SourceBlock, TaskDescriptor};
use crate::ring::Ring;
use crate::Result;

// ---------- Polynomial codes ----------

/// Parameters of a polynomial code: operand columns split `m` ways,
/// `workers` evaluation points (the scalars `1..=workers`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyCode {
    pub m: usize,
    pub workers: usize,
    pub points: Vec<i128>,
    pub ring: Ring,
}

impl PolyCode {
    pub fn new(m: usize, workers: usize, ring: Ring) -> Result<PolyCode> {
        if m == 0 || workers < m * m {
            return Err(Error::DegreeCondition {
                detail: format!("need m^2 = {} <= workers = {workers}", m * m),
            });
        }
        let points = distinct_points(workers, ring)?;
        Ok(PolyCode {
            m,
            workers,
            points,
            ring,
        })
    }

    /// Minimum number of worker results that decode: `m^2`.
    pub fn threshold(&self) -> usize {
        self.m * self.m
    }
}

/// One polynomial-code worker task: compute `a_part^T b_part`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyTask {
    pub point: i128,
    pub a_part: DenseMatrix,
    pub b_part: DenseMatrix,
}

impl PolyTask {
    /// Run the worker: one block product tagged with its point.
    pub fn execute(&self) -> Result<(i128, DenseMatrix)> {
        Ok((self.point, matmul_oracle(&self.a_part, &self.b_part)?))
    }
}

/// Encoder-side work in block-addition equivalents: each of the
/// `workers - 1` non-trivial points costs `m - 1` additions per operand.
pub fn poly_encode_work(m: usize, workers: usize) -> usize {
    2 * (m - 1) * (workers.saturating_sub(1))
}

fn column_groups(mat: &DenseMatrix, m: usize, name: &'static str) -> Result<Vec<DenseMatrix>> {
    if m == 0 || mat.cols() % m != 0 {
        return Err(Error::Divisibility {
            constraint: format!("{name}: m = {m} must divide the column count {}", mat.cols()),
        });
    }
    let w = mat.cols() / m;
    (0..m).map(|g| Ok(mat.col_slice(g * w, (g + 1) * w))).collect()
}

fn row_groups(mat: &DenseMatrix, m: usize, name: &'static str) -> Result<Vec<DenseMatrix>> {
    if m == 0 || mat.rows() % m != 0 {
        return Err(Error::Divisibility {
            constraint: format!("{name}: m = {m} must divide the row count {}", mat.rows()),
        });
    }
    let h = mat.rows() / m;
    (0..m).map(|g| Ok(mat.row_slice(g * h, (g + 1) * h))).collect()
}

/// Evaluate `sum_i parts[i] * x^(i * stride)` at `x = point`.
fn eval_groups(parts: &[DenseMatrix], point: i128, stride: usize, ring: Ring) -> Result<DenseMatrix> {
    let step = ring.pow(point, stride as u64)?;
    let mut acc = parts[0].clone();
    let mut power = step;
    for part in &parts[1..] {
        acc = acc.add(&part.scale(power)?)?;
        power = ring.mul(power, step)?;
    }
    Ok(acc)
}

/// Encode both operands for every worker. Worker `j` later computes the
/// single block product `a_j^T b_j`.
pub fn poly_encode(a: &DenseMatrix, b: &DenseMatrix, code: &PolyCode) -> Result<Vec<PolyTask>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "operands must share the inner dimension s",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let a_groups = column_groups(a, code.m, "A")?;
    let b_groups = column_groups(b, code.m, "B")?;
    code.points
        .iter()
        .map(|&point| {
            Ok(PolyTask {
                point,
                a_part: eval_groups(&a_groups, point, 1, code.ring)?,
                b_part: eval_groups(&b_groups, point, code.m, code.ring)?,
            })
        })
        .collect()
}

/// Interpolate all `m^2` output blocks from any `m^2` distinct-point
/// worker results. Blocks come back as 1-based row-major sources for
/// the matching `m x m` partition plan.
pub fn poly_decode(results: &[(i128, DenseMatrix)], m: usize, ring: Ring) -> Result<Vec<SourceBlock>> {
    let t = m * m;
    let coeffs = interpolate_coefficients(results, t, ring)?;
    // Coefficient of x^(i + m l) is (row group i, column group l).
    Ok((0..t)
        .map(|d| {
            let (i, l) = (d % m, d / m);
            SourceBlock {
                index: i * m + l + 1,
                value: coeffs[d].clone(),
            }
        })
        .collect())
}

// ---------- MatDot codes ----------

/// Parameters of a MatDot code: inner dimension split `m` ways,
/// `workers` evaluation points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatDotCode {
    pub m: usize,
    pub workers: usize,
    pub points: Vec<i128>,
    pub ring: Ring,
}

impl MatDotCode {
    pub fn new(m: usize, workers: usize, ring: Ring) -> Result<MatDotCode> {
        if m == 0 || workers < 2 * m - 1 {
            return Err(Error::DegreeCondition {
                detail: format!("need 2m - 1 = {} <= workers = {workers}", 2 * m - 1),
            });
        }
        let points = distinct_points(workers, ring)?;
        Ok(MatDotCode {
            m,
            workers,
            points,
            ring,
        })
    }

    /// Minimum number of worker results that decode: `2m - 1`.
    pub fn threshold(&self) -> usize {
        2 * self.m - 1
    }
}

/// One MatDot worker task: compute the full `k x b` product
/// `a_part^T b_part`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatDotTask {
    pub point: i128,
    pub a_part: DenseMatrix,
    pub b_part: DenseMatrix,
}

impl MatDotTask {
    pub fn execute(&self) -> Result<(i128, DenseMatrix)> {
        Ok((self.point, matmul_oracle(&self.a_part, &self.b_part)?))
    }
}

/// Encode both operands for every worker: `p_A(x) = sum_i A_i x^i` and
/// `p_B(x) = sum_i B_i x^{m-1-i}` over row slices of the inner
/// dimension.
pub fn matdot_encode(a: &DenseMatrix, b: &DenseMatrix, code: &MatDotCode) -> Result<Vec<MatDotTask>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "operands must share the inner dimension s",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let a_groups = row_groups(a, code.m, "A")?;
    let mut b_groups = row_groups(b, code.m, "B")?;
    b_groups.reverse(); // x^{m-1-i} ordering
    code.points
        .iter()
        .map(|&point| {
            Ok(MatDotTask {
                point,
                a_part: eval_groups(&a_groups, point, 1, code.ring)?,
                b_part: eval_groups(&b_groups, point, 1, code.ring)?,
            })
        })
        .collect()
}

/// Extract the coefficient of `x^{m-1}` — the full product `A^T B` —
/// from any `2m - 1` distinct-point worker results.
pub fn matdot_decode(results: &[(i128, DenseMatrix)], m: usize, ring: Ring) -> Result<DenseMatrix> {
    let t = 2 * m - 1;
    let mut coeffs = interpolate_coefficients(results, t, ring)?;
    Ok(coeffs.swap_remove(m - 1))
}

// ---------- Uncoded ----------

/// The redundancy-free plan: `k * b` single dot-product tasks, one per
/// output entry, all of which must finish.
pub fn uncoded_plan(a: &DenseMatrix, b: &DenseMatrix) -> Result<(PartitionPlan, Vec<TaskDescriptor>)> {
    grid_plan(a, b, a.cols(), b.cols())
}

// ---------- Interpolation machinery ----------

fn distinct_points(workers: usize, ring: Ring) -> Result<Vec<i128>> {
    if let Ring::PrimeField(q) = ring {
        if (workers as i128) >= q {
            return Err(Error::DegreeCondition {
                detail: format!("field of size {q} cannot provide {workers} distinct nonzero points"),
            });
        }
    }
    Ok((1..=workers as i128).collect())
}

/// Invert the `t x t` Vandermonde system for the first `t` results and
/// recombine: `coeff_d = sum_j inv[d][j] y_j`. Exact over the ring;
/// needs division, so integer-ring inputs report the unsupported
/// division rather than returning approximations.
fn interpolate_coefficients(results: &[(i128, DenseMatrix)], t: usize, ring: Ring) -> Result<Vec<DenseMatrix>> {
    if results.len() < t {
        return Err(Error::InsufficientResults {
            needed: t,
            got: results.len(),
        });
    }
    let used = &results[..t];
    let points: Vec<i128> = used.iter().map(|(x, _)| ring.canon(*x)).collect();
    for (i, &x) in points.iter().enumerate() {
        if points[..i].contains(&x) {
            return Err(Error::RepeatedPoint(x));
        }
    }
    let inv = vandermonde_inverse(&points, ring)?;
    (0..t)
        .map(|d| {
            let mut acc: Option<DenseMatrix> = None;
            for (j, (_, y)) in used.iter().enumerate() {
                let term = y.scale(inv[d][j])?;
                acc = Some(match acc {
                    None => term,
                    Some(sum) => sum.add(&term)?,
                });
            }
            Ok(acc.expect("t >= 1"))
        })
        .collect()
}

/// Gauss–Jordan inverse of the Vandermonde matrix `V[j][d] = x_j^d`,
/// returned transposed so row `d` gives the weights of coefficient `d`.
// The elimination loop reads row `col` while writing row `r`, so an
// iterator over `aug[r]` would conflict with the `aug[col][c]` borrow.
#[allow(clippy::needless_range_loop)]
pub fn vandermonde_inverse(points: &[i128], ring: Ring) -> Result<Vec<Vec<i128>>> {
    let t = points.len();
    let mut aug: Vec<Vec<i128>> = (0..t)
        .map(|j| {
            let mut row: Vec<i128> = (0..t as u64).map(|d| ring.pow(points[j], d)).collect::<Result<_>>()?;
            row.extend((0..t).map(|c| i128::from(c == j)));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    for col in 0..t {
        let pivot = (col..t).find(|&r| aug[r][col] != 0).ok_or(Error::NotInvertible(0))?;
        aug.swap(col, pivot);
        let inv = ring.inv(aug[col][col])?;
        for x in aug[col].iter_mut() {
            *x = ring.mul(*x, inv)?;
        }
        for r in 0..t {
            if r != col && aug[r][col] != 0 {
                let factor = aug[r][col];
                for c in 0..2 * t {
                    let delta = ring.mul(factor, aug[col][c])?;
                    aug[r][c] = ring.sub(aug[r][c], delta)?;
                }
            }
        }
    }
    // aug right half is V^{-1} with rows indexed like V's rows; transpose
    // so that entry [d][j] weights result j in coefficient d.
    Ok((0..t).map(|d| (0..t).map(|j| aug[d][t + j]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul_oracle;
    use crate::partition::{assemble, partition, PartitionScheme};
    use itertools::Itertools;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field() -> Ring {
        Ring::default_field()
    }

    fn random_operands(s: usize, k: usize, b: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            DenseMatrix::random(&mut rng, s, k, field()),
            DenseMatrix::random(&mut rng, s, b, field()),
        )
    }

    #[test]
    fn point_one_sums_the_groups() {
        let (a, b) = random_operands(3, 2, 2, 1);
        let code = PolyCode::new(2, 10, field()).unwrap();
        let tasks = poly_encode(&a, &b, &code).unwrap();
        let a0 = a.col_slice(0, 1);
        let a1 = a.col_slice(1, 2);
        assert_eq!(tasks[0].a_part, a0.add(&a1).unwrap(), "at j = 1 every power is 1");
        let b0 = b.col_slice(0, 1);
        let b1 = b.col_slice(1, 2);
        assert_eq!(tasks[0].b_part, b0.add(&b1).unwrap());
    }

    #[test]
    fn m_equals_one_replicates_the_operands() {
        let (a, b) = random_operands(3, 2, 2, 2);
        let code = PolyCode::new(1, 4, field()).unwrap();
        let tasks = poly_encode(&a, &b, &code).unwrap();
        assert!(tasks.iter().all(|t| t.a_part == a && t.b_part == b));
        // A single result is already the product.
        let (x, y) = tasks[2].execute().unwrap();
        let blocks = poly_decode(&[(x, y)], 1, field()).unwrap();
        assert_eq!(blocks[0].value, matmul_oracle(&a, &b).unwrap());
    }

    #[test]
    fn encode_work_counter_matches_the_convention() {
        assert_eq!(poly_encode_work(2, 10), 18);
        assert_eq!(poly_encode_work(1, 10), 0);
    }

    #[test]
    fn every_four_subset_of_ten_workers_decodes() {
        let (a, b) = random_operands(3, 2, 2, 3);
        let oracle = matmul_oracle(&a, &b).unwrap();
        let (plan, _) = partition(&a, &b, PartitionScheme::SquareGrid { m: 2 }).unwrap();
        let code = PolyCode::new(2, 10, field()).unwrap();
        let results: Vec<(i128, DenseMatrix)> = poly_encode(&a, &b, &code)
            .unwrap()
            .iter()
            .map(|t| t.execute().unwrap())
            .collect();
        for subset in (0..10).combinations(4) {
            let chosen: Vec<(i128, DenseMatrix)> = subset.iter().map(|&j| results[j].clone()).collect();
            let blocks = poly_decode(&chosen, 2, field()).unwrap();
            assert_eq!(assemble(&blocks, &plan).unwrap(), oracle, "subset {subset:?}");
        }
    }

    #[test]
    fn three_results_are_insufficient_for_m_two() {
        let (a, b) = random_operands(3, 2, 2, 4);
        let code = PolyCode::new(2, 10, field()).unwrap();
        let results: Vec<(i128, DenseMatrix)> = poly_encode(&a, &b, &code)
            .unwrap()
            .iter()
            .map(|t| t.execute().unwrap())
            .collect();
        assert!(matches!(
            poly_decode(&results[..3], 2, field()),
            Err(Error::InsufficientResults { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn repeated_points_are_rejected() {
        let (a, b) = random_operands(3, 2, 2, 5);
        let code = PolyCode::new(2, 10, field()).unwrap();
        let results: Vec<(i128, DenseMatrix)> = poly_encode(&a, &b, &code)
            .unwrap()
            .iter()
            .map(|t| t.execute().unwrap())
            .collect();
        let doubled = vec![results[0].clone(), results[1].clone(), results[2].clone(), results[0].clone()];
        assert!(matches!(poly_decode(&doubled, 2, field()), Err(Error::RepeatedPoint(1))));
    }

    #[test]
    fn matdot_middle_coefficient_is_the_product() {
        let (a, b) = random_operands(4, 3, 2, 6);
        let oracle = matmul_oracle(&a, &b).unwrap();
        let code = MatDotCode::new(2, 5, field()).unwrap();
        let tasks = matdot_encode(&a, &b, &code).unwrap();
        assert!(tasks.iter().all(|t| {
            let (_, y) = t.execute().unwrap();
            (y.rows(), y.cols()) == (3, 2)
        }));
        let results: Vec<(i128, DenseMatrix)> = tasks.iter().map(|t| t.execute().unwrap()).collect();
        for subset in (0..5).combinations(3) {
            let chosen: Vec<(i128, DenseMatrix)> = subset.iter().map(|&j| results[j].clone()).collect();
            assert_eq!(matdot_decode(&chosen, 2, field()).unwrap(), oracle, "subset {subset:?}");
        }
        for subset in (0..5).combinations(2) {
            let chosen: Vec<(i128, DenseMatrix)> = subset.iter().map(|&j| results[j].clone()).collect();
            assert!(matdot_decode(&chosen, 2, field()).is_err(), "2 results are underdetermined");
        }
    }

    #[test]
    fn matdot_m_one_is_direct_computation() {
        let (a, b) = random_operands(4, 2, 2, 7);
        let code = MatDotCode::new(1, 1, field()).unwrap();
        let results: Vec<(i128, DenseMatrix)> = matdot_encode(&a, &b, &code)
            .unwrap()
            .iter()
            .map(|t| t.execute().unwrap())
            .collect();
        assert_eq!(matdot_decode(&results, 1, field()).unwrap(), matmul_oracle(&a, &b).unwrap());
    }

    #[test]
    fn uncoded_plan_is_one_task_per_output_entry() {
        let (a, b) = random_operands(3, 2, 2, 8);
        let (_, tasks) = uncoded_plan(&a, &b).unwrap();
        assert_eq!(tasks.len(), 4);
        let (a1, b1) = random_operands(3, 1, 1, 9);
        assert_eq!(uncoded_plan(&a1, &b1).unwrap().1.len(), 1);
    }

    #[test]
    fn division_free_rings_cannot_decode() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = DenseMatrix::random(&mut rng, 3, 2, Ring::Integers);
        let b = DenseMatrix::random(&mut rng, 3, 2, Ring::Integers);
        let code = PolyCode::new(2, 10, Ring::Integers).unwrap();
        let results: Vec<(i128, DenseMatrix)> = poly_encode(&a, &b, &code)
            .unwrap()
            .iter()
            .map(|t| t.execute().unwrap())
            .collect();
        assert!(matches!(
            poly_decode(&results[..4], 2, Ring::Integers),
            Err(Error::DivisionUnsupported)
        ));
    }

    #[test]
    fn specs_enforce_their_thresholds() {
        assert!(PolyCode::new(3, 8, field()).is_err(), "9 > 8 workers");
        assert!(MatDotCode::new(3, 4, field()).is_err(), "5 > 4 workers");
        assert_eq!(PolyCode::new(2, 10, field()).unwrap().threshold(), 4);
        assert_eq!(MatDotCode::new(2, 5, field()).unwrap().threshold(), 3);
    }
}
