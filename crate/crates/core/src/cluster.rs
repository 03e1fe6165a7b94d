//! Distribution of block dot-product tasks over the cluster grid.
//!
//! Encoding is performed by the cluster itself, not the master: the
//! master ships raw operand blocks, and processor unit `(i, j)` computes
//! the dot products named by its cell equation and ring-sums them. The
//! master's only compute is the peeling decode afterwards.

use std::collections::BTreeSet;

use crate::arraycode::ArrayCode;
use crate::asymcode::AsymArrayCode;
use crate::error::Error;
use crate::matrix::DenseMatrix;
use crate::partition::{SourceBlock, TaskDescriptor};
use crate::Result;

/// Work assignment for every processor unit: `sources(i, j)` lists the
/// 1-based source-block indices whose dot products unit `j` of node `i`
/// computes and sums. Column sizes may differ per node (asymmetric
/// codes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPlan {
    kb: usize,
    assignments: Vec<Vec<Vec<usize>>>,
}

impl ClusterPlan {
    pub fn nodes(&self) -> usize {
        self.assignments.len()
    }

    pub fn processors(&self, node: usize) -> usize {
        self.assignments[node].len()
    }

    pub fn sources(&self, node: usize, proc: usize) -> &[usize] {
        &self.assignments[node][proc]
    }

    /// Per-unit task counts `sigma_ij`.
    pub fn degrees(&self) -> Vec<Vec<usize>> {
        self.assignments
            .iter()
            .map(|node| node.iter().map(Vec::len).collect())
            .collect()
    }

    pub fn node_task_count(&self, node: usize) -> usize {
        self.assignments[node].iter().map(Vec::len).sum()
    }

    /// Total dot products scheduled across the cluster.
    pub fn total_dot_products(&self) -> usize {
        (0..self.nodes()).map(|i| self.node_task_count(i)).sum()
    }

    /// Compute every unit's output from the raw block products: the
    /// ring-sum of the blocks its cell equation names.
    pub fn evaluate(&self, blocks: &[SourceBlock]) -> Result<Vec<Vec<DenseMatrix>>> {
        let mut by_index: Vec<Option<&DenseMatrix>> = vec![None; self.kb + 1];
        for block in blocks {
            if block.index == 0 || block.index > self.kb {
                return Err(Error::BlockIndexOutOfRange {
                    index: block.index,
                    max: self.kb,
                });
            }
            if by_index[block.index].replace(&block.value).is_some() {
                return Err(Error::DuplicateBlock(block.index));
            }
        }
        self.assignments
            .iter()
            .map(|node| {
                node.iter()
                    .map(|sources| {
                        let mut sum: Option<DenseMatrix> = None;
                        for &s in sources {
                            let block = by_index[s].ok_or(Error::MissingBlock(s))?;
                            sum = Some(match sum {
                                None => block.clone(),
                                Some(acc) => acc.add(block)?,
                            });
                        }
                        sum.ok_or(Error::DegreeCondition {
                            detail: "empty cell assignment".into(),
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Pair the surviving nodes' cell equations with their computed
    /// outputs, ready for the peeling decoder.
    pub fn survivor_equations(&self, survivors: &[usize], outputs: &[Vec<DenseMatrix>]) -> Vec<(BTreeSet<usize>, DenseMatrix)> {
        survivors
            .iter()
            .flat_map(|&i| {
                self.assignments[i]
                    .iter()
                    .zip(&outputs[i])
                    .map(|(sources, value)| (sources.iter().copied().collect(), value.clone()))
            })
            .collect()
    }
}

fn check_task_coverage(kb: usize, tasks: &[TaskDescriptor]) -> Result<()> {
    let mut seen = vec![false; kb + 1];
    for task in tasks {
        if task.index == 0 || task.index > kb {
            return Err(Error::BlockIndexOutOfRange {
                index: task.index,
                max: kb,
            });
        }
        if std::mem::replace(&mut seen[task.index], true) {
            return Err(Error::DuplicateBlock(task.index));
        }
    }
    let missing: Vec<usize> = (1..=kb).filter(|&i| !seen[i]).collect();
    if !missing.is_empty() {
        return Err(Error::CoverageGap { missing });
    }
    Ok(())
}

fn plan_from_columns(kb: usize, columns: &[Vec<crate::arraycode::CellEquation>]) -> ClusterPlan {
    ClusterPlan {
        kb,
        assignments: columns
            .iter()
            .map(|col| col.iter().map(|cell| cell.sources.iter().copied().collect()).collect())
            .collect(),
    }
}

/// Assign the partition's `kb` block tasks to the cluster per the code
/// grid. The task set must cover block indices `1..=kb` exactly.
pub fn encode_tasks(code: &ArrayCode, tasks: &[TaskDescriptor]) -> Result<ClusterPlan> {
    check_task_coverage(code.kb(), tasks)?;
    Ok(plan_from_columns(code.kb(), code.grid()))
}

/// [`encode_tasks`] for asymmetric codes (per-node column sizes).
pub fn encode_tasks_asym(code: &AsymArrayCode, tasks: &[TaskDescriptor]) -> Result<ClusterPlan> {
    check_task_coverage(code.kb(), tasks)?;
    Ok(plan_from_columns(code.kb(), code.columns()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraycode::builtin_5222;
    use crate::matrix::matmul_oracle;
    use crate::partition::{assemble, compute_blocks, partition, PartitionScheme};
    use crate::peel::{peel_decode, PeelOutcome};
    use crate::ring::Ring;

    fn operands() -> (DenseMatrix, DenseMatrix) {
        let a = DenseMatrix::from_rows(&[vec![1, 2], vec![3, 4], vec![5, 6]], Ring::Integers).unwrap();
        let b = DenseMatrix::from_rows(&[vec![7, 8], vec![9, 10], vec![11, 12]], Ring::Integers).unwrap();
        (a, b)
    }

    #[test]
    fn builtin_assignment_matches_the_grid() {
        let (a, b) = operands();
        let (_, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        let plan = encode_tasks(&builtin_5222(), &tasks).unwrap();
        assert_eq!(plan.sources(0, 1), &[2, 3], "node1 proc2 sums v2 + v3");
        assert_eq!(plan.total_dot_products(), 16);
        assert!(
            (0..5).all(|i| plan.node_task_count(i) <= 2 * 2),
            "per-node work capped by b * sigma"
        );
    }

    #[test]
    fn node1_proc2_output_is_the_cross_block_sum() {
        let (a, b) = operands();
        let (_, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        let blocks = compute_blocks(&a, &b, &tasks).unwrap();
        let plan = encode_tasks(&builtin_5222(), &tasks).unwrap();
        let outputs = plan.evaluate(&blocks).unwrap();
        // v2 = a_1 . b_2, v3 = a_2 . b_1
        let v2 = blocks.iter().find(|bl| bl.index == 2).unwrap();
        let v3 = blocks.iter().find(|bl| bl.index == 3).unwrap();
        assert_eq!(outputs[0][1], v2.value.add(&v3.value).unwrap());
    }

    #[test]
    fn any_two_nodes_decode_back_to_the_oracle() {
        let (a, b) = operands();
        let oracle = matmul_oracle(&a, &b).unwrap();
        let (pplan, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        let blocks = compute_blocks(&a, &b, &tasks).unwrap();
        let plan = encode_tasks(&builtin_5222(), &tasks).unwrap();
        let outputs = plan.evaluate(&blocks).unwrap();
        for s1 in 0..5 {
            for s2 in (s1 + 1)..5 {
                let eqs = plan.survivor_equations(&[s1, s2], &outputs);
                match peel_decode(&eqs, 4).unwrap() {
                    PeelOutcome::Complete { values, .. } => {
                        let sources: Vec<SourceBlock> = values
                            .into_iter()
                            .enumerate()
                            .map(|(i, value)| SourceBlock { index: i + 1, value })
                            .collect();
                        assert_eq!(assemble(&sources, &pplan).unwrap(), oracle, "survivors ({s1}, {s2})");
                    }
                    PeelOutcome::Stuck { .. } => panic!("survivors ({s1}, {s2}) must decode"),
                }
            }
        }
    }

    #[test]
    fn asym_view_produces_the_same_plan() {
        let (a, b) = operands();
        let (_, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        let plan = encode_tasks(&builtin_5222(), &tasks).unwrap();
        let asym = AsymArrayCode::from_array(&builtin_5222());
        assert_eq!(encode_tasks_asym(&asym, &tasks).unwrap(), plan);
    }

    #[test]
    fn task_coverage_is_enforced() {
        let (a, b) = operands();
        let (_, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        assert!(matches!(
            encode_tasks(&builtin_5222(), &tasks[..3]),
            Err(Error::CoverageGap { .. })
        ));
        let mut dup = tasks.clone();
        dup[1].index = 1;
        assert!(matches!(encode_tasks(&builtin_5222(), &dup), Err(Error::DuplicateBlock(1))));
    }

    #[test]
    fn evaluate_requires_all_referenced_blocks() {
        let (a, b) = operands();
        let (_, tasks) = partition(&a, &b, PartitionScheme::Grid { rows: 2, cols: 2 }).unwrap();
        let blocks = compute_blocks(&a, &b, &tasks).unwrap();
        let plan = encode_tasks(&builtin_5222(), &tasks).unwrap();
        assert!(matches!(plan.evaluate(&blocks[..2]), Err(Error::MissingBlock(_))));
    }
}
