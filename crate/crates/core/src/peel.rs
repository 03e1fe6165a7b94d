//! Belief-propagation (peeling) decoding of XOR-style cell equations.
//!
//! Each equation says "this cell value is the ring-sum of these source
//! blocks". Peeling repeatedly takes an equation with exactly one
//! unresolved source, subtracts the already-resolved sources from the
//! cell value, and thereby resolves one more source. Over a
//! characteristic-2 ring the subtraction is literally XOR; over other
//! exact rings it is ordinary subtraction.
//!
//! Two entry points: [`peel_solvable`]/[`peel_remaining`] run the same
//! schedule on source sets alone (no values) — that is what code
//! validation enumerates — and [`peel_decode`] carries block values and
//! counts the block additions performed, which feeds the latency
//! accounting.

use std::borrow::Borrow;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::error::Error;
use crate::matrix::DenseMatrix;
use crate::Result;

/// Result of a valued peeling run.
#[derive(Debug, Clone)]
pub enum PeelOutcome {
    /// All `kb` sources resolved. `values[i]` is source `i+1`;
    /// `additions` counts block add/subtract operations performed;
    /// `trace` lists (equation index, resolved source) in solve order.
    Complete {
        values: Vec<DenseMatrix>,
        additions: usize,
        trace: Vec<(usize, usize)>,
    },
    /// No degree-1 equation left before finishing.
    Stuck {
        resolved: BTreeMap<usize, DenseMatrix>,
        missing: BTreeSet<usize>,
        additions: usize,
    },
}

impl PeelOutcome {
    pub fn is_complete(&self) -> bool {
        matches!(self, PeelOutcome::Complete { .. })
    }
}

// ---------- Symbolic peeling ----------

/// Number of sources (out of `1..=kb`) left unresolved after peeling
/// the given source sets. `0` means the set of equations decodes.
pub fn peel_remaining<S: Borrow<BTreeSet<usize>>>(equations: &[S], kb: usize) -> usize {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); kb + 1];
    let mut degree: Vec<usize> = Vec::with_capacity(equations.len());
    for (i, eq) in equations.iter().enumerate() {
        let eq = eq.borrow();
        for &s in eq {
            if s == 0 || s > kb {
                return kb; // malformed index: nothing decodable to report
            }
            owners[s].push(i);
        }
        degree.push(eq.len());
    }
    let mut resolved = vec![false; kb + 1];
    let mut resolved_count = 0usize;
    let mut queue: Vec<usize> = (0..equations.len()).filter(|&i| degree[i] == 1).collect();
    while let Some(i) = queue.pop() {
        if degree[i] != 1 {
            continue;
        }
        let eq = equations[i].borrow();
        let &s = eq.iter().find(|&&s| !resolved[s]).expect("degree tracked as 1");
        resolved[s] = true;
        resolved_count += 1;
        for &j in &owners[s] {
            degree[j] -= 1;
            if degree[j] == 1 {
                queue.push(j);
            }
        }
        if resolved_count == kb {
            return 0;
        }
    }
    kb - resolved_count
}

/// True iff peeling the source sets resolves every source in `1..=kb`.
pub fn peel_solvable<S: Borrow<BTreeSet<usize>>>(equations: &[S], kb: usize) -> bool {
    peel_remaining(equations, kb) == 0
}

// ---------- Valued peeling ----------

/// Peel cell values back into source blocks.
///
/// `equations[i]` pairs a cell's source set with its observed value.
/// Among the degree-1 equations available at each step the lowest
/// equation index is taken first, so traces are reproducible; the
/// resolved values themselves do not depend on that order. Redundant
/// equations (all sources resolved while unused) are verified against
/// the resolved values and an [`Error::InconsistentPeel`] is raised on
/// mismatch.
pub fn peel_decode(equations: &[(BTreeSet<usize>, DenseMatrix)], kb: usize) -> Result<PeelOutcome> {
    // Upfront shape homogeneity and index checks.
    let mut shape: Option<(usize, usize, crate::ring::Ring)> = None;
    for (sources, value) in equations {
        if sources.is_empty() {
            return Err(Error::DegreeCondition {
                detail: "equation with empty source set".into(),
            });
        }
        for &s in sources {
            if s == 0 || s > kb {
                return Err(Error::SourceOutOfRange { index: s, max: kb });
            }
        }
        match shape {
            None => shape = Some((value.rows(), value.cols(), value.ring())),
            Some((r, c, ring)) => {
                if value.rows() != r || value.cols() != c {
                    return Err(Error::DimensionMismatch {
                        context: "cell values must share block dimensions",
                        left_rows: r,
                        left_cols: c,
                        right_rows: value.rows(),
                        right_cols: value.cols(),
                    });
                }
                if value.ring() != ring {
                    return Err(Error::RingMismatch);
                }
            }
        }
    }

    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); kb + 1];
    let mut degree: Vec<usize> = Vec::with_capacity(equations.len());
    for (i, (sources, _)) in equations.iter().enumerate() {
        for &s in sources {
            owners[s].push(i);
        }
        degree.push(sources.len());
    }

    let mut resolved: Vec<Option<DenseMatrix>> = vec![None; kb + 1];
    let mut resolved_count = 0usize;
    let mut additions = 0usize;
    let mut trace: Vec<(usize, usize)> = Vec::new();
    let mut checked: Vec<bool> = vec![false; equations.len()];
    let mut heap: BinaryHeap<Reverse<usize>> = (0..equations.len()).filter(|&i| degree[i] == 1).map(Reverse).collect();

    while let Some(Reverse(i)) = heap.pop() {
        let (sources, value) = &equations[i];
        if degree[i] == 0 {
            // Redundant equation: verify it against resolved sources.
            if checked[i] {
                continue;
            }
            checked[i] = true;
            let mut acc = value.clone();
            for &s in sources {
                acc = acc.sub(resolved[s].as_ref().expect("degree 0 means all resolved"))?;
                additions += 1;
            }
            if acc != DenseMatrix::zeros(acc.rows(), acc.cols(), acc.ring()) {
                return Err(Error::InconsistentPeel {
                    index: *sources.iter().next().expect("non-empty"),
                });
            }
            continue;
        }
        debug_assert_eq!(degree[i], 1);
        let &target = sources.iter().find(|&&s| resolved[s].is_none()).expect("degree tracked as 1");
        let mut acc = value.clone();
        for &s in sources {
            if s != target {
                acc = acc.sub(resolved[s].as_ref().expect("other sources resolved"))?;
                additions += 1;
            }
        }
        resolved[target] = Some(acc);
        resolved_count += 1;
        trace.push((i, target));
        checked[i] = true;
        for &j in &owners[target] {
            degree[j] -= 1;
            if degree[j] <= 1 {
                heap.push(Reverse(j));
            }
        }
    }

    if resolved_count == kb {
        let values = resolved.into_iter().skip(1).map(|v| v.expect("all resolved")).collect();
        Ok(PeelOutcome::Complete {
            values,
            additions,
            trace,
        })
    } else {
        let mut map = BTreeMap::new();
        let mut missing = BTreeSet::new();
        for (s, v) in resolved.into_iter().enumerate().skip(1) {
            match v {
                Some(v) => {
                    map.insert(s, v);
                }
                None => {
                    missing.insert(s);
                }
            }
        }
        Ok(PeelOutcome::Stuck {
            resolved: map,
            missing,
            additions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    fn scalar(v: i128) -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![v]], Ring::Integers).unwrap()
    }

    fn eqn(sources: &[usize], v: i128) -> (BTreeSet<usize>, DenseMatrix) {
        (sources.iter().copied().collect(), scalar(v))
    }

    #[test]
    fn systematic_cells_need_zero_subtractions() {
        let eqs = vec![eqn(&[1], 10), eqn(&[2], 20), eqn(&[3], 30)];
        match peel_decode(&eqs, 3).unwrap() {
            PeelOutcome::Complete { values, additions, .. } => {
                assert_eq!(additions, 0);
                assert_eq!(values, vec![scalar(10), scalar(20), scalar(30)]);
            }
            other => panic!("expected completion, got {other:?}"),
        }
    }

    #[test]
    fn chain_of_coded_cells_peels_in_order() {
        // v1=5; v1+v2=12; v2+v3=14  =>  v2=7, v3=7.
        let eqs = vec![eqn(&[1], 5), eqn(&[1, 2], 12), eqn(&[2, 3], 14)];
        match peel_decode(&eqs, 3).unwrap() {
            PeelOutcome::Complete {
                values,
                additions,
                trace,
            } => {
                assert_eq!(values, vec![scalar(5), scalar(7), scalar(7)]);
                assert_eq!(additions, 2);
                assert_eq!(trace, vec![(0, 1), (1, 2), (2, 3)]);
            }
            other => panic!("expected completion, got {other:?}"),
        }
    }

    #[test]
    fn all_degree_two_cells_stick_with_everything_missing() {
        // {v1+v2, v3+v4, v2+v4}: no degree-1 equation anywhere.
        let eqs = vec![eqn(&[1, 2], 0), eqn(&[3, 4], 0), eqn(&[2, 4], 0)];
        match peel_decode(&eqs, 4).unwrap() {
            PeelOutcome::Stuck {
                resolved,
                missing,
                additions,
            } => {
                assert!(resolved.is_empty());
                assert_eq!(missing, (1..=4).collect());
                assert_eq!(additions, 0);
            }
            other => panic!("expected stuck, got {other:?}"),
        }
        assert_eq!(
            peel_remaining(&[BTreeSet::from([1, 2]), BTreeSet::from([3, 4]), BTreeSet::from([2, 4])], 4),
            4
        );
    }

    #[test]
    fn redundant_equations_are_verified() {
        let consistent = vec![eqn(&[1], 5), eqn(&[2], 7), eqn(&[1, 2], 12)];
        assert!(peel_decode(&consistent, 2).unwrap().is_complete());
        let inconsistent = vec![eqn(&[1], 5), eqn(&[2], 7), eqn(&[1, 2], 99)];
        assert!(matches!(peel_decode(&inconsistent, 2), Err(Error::InconsistentPeel { .. })));
    }

    #[test]
    fn bad_source_indices_are_rejected() {
        let eqs = vec![eqn(&[1, 5], 0)];
        assert!(matches!(
            peel_decode(&eqs, 4),
            Err(Error::SourceOutOfRange { index: 5, max: 4 })
        ));
        let empty = vec![(BTreeSet::new(), scalar(0))];
        assert!(peel_decode(&empty, 4).is_err());
    }

    #[test]
    fn values_do_not_depend_on_equation_order() {
        // Same system, equations permuted: resolved values must agree.
        let base = vec![eqn(&[1], 5), eqn(&[1, 2], 12), eqn(&[2, 3], 14), eqn(&[3, 4], 21)];
        let extract = |outcome: PeelOutcome| match outcome {
            PeelOutcome::Complete { values, .. } => values,
            other => panic!("expected completion, got {other:?}"),
        };
        let want = extract(peel_decode(&base, 4).unwrap());
        let perms: [Vec<usize>; 3] = [vec![3, 2, 1, 0], vec![1, 3, 0, 2], vec![2, 0, 3, 1]];
        for perm in perms {
            let shuffled: Vec<_> = perm.iter().map(|&i| base[i].clone()).collect();
            assert_eq!(extract(peel_decode(&shuffled, 4).unwrap()), want, "perm {perm:?}");
        }
    }
}
