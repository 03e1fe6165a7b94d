//! MDS array BP-XOR codes.
//!
//! An `[n, k, b, sigma]` array code is an `n x b` grid of cells, one
//! column per cluster node, one row per processor unit. Every cell is a
//! sum of at most `sigma` of the `k*b` source blocks, and the code is
//! MDS-by-peeling when the `k*b` cells of ANY `k` columns peel to
//! completion. The built-in `[5,2,2,2]` instance:
//!
//! ```text
//!           node1   node2   node3   node4   node5
//! proc 1    v1      v2      v3      v4      v1+v2
//! proc 2    v2+v3   v1+v4   v2+v4   v1+v3   v3+v4
//! ```
//!
//! Any two of the five columns recover `v1..v4`; the grid's recovery
//! threshold over arbitrary cell subsets is 7.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::peel::peel_solvable;
use crate::Result;

// ---------- Types ----------

/// One grid cell: the set of source-block indices (1-based) it sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellEquation {
    pub sources: BTreeSet<usize>,
}

impl CellEquation {
    pub fn new<I: IntoIterator<Item = usize>>(sources: I) -> CellEquation {
        CellEquation {
            sources: sources.into_iter().collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.sources.len()
    }
}

/// An `[n, k, b, sigma]` array BP-XOR code.
///
/// Construction checks the structural invariants (grid shape, index
/// ranges, degree cap, full source coverage). The MDS property is
/// checked, not assumed: run [`validate_mds`] — the shipped
/// constructors ([`builtin_5222`], [`search_code`]) only return grids
/// that pass it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayCode {
    n: usize,
    k: usize,
    b: usize,
    sigma: usize,
    grid: Vec<Vec<CellEquation>>,
}

impl ArrayCode {
    pub fn new(n: usize, k: usize, b: usize, sigma: usize, grid: Vec<Vec<CellEquation>>) -> Result<ArrayCode> {
        if grid.len() != n || grid.iter().any(|col| col.len() != b) {
            return Err(Error::DimensionMismatch {
                context: "grid must be n columns of b cells",
                left_rows: n,
                left_cols: b,
                right_rows: grid.len(),
                right_cols: grid.first().map_or(0, Vec::len),
            });
        }
        let kb = k * b;
        let mut covered = vec![false; kb + 1];
        for col in &grid {
            for cell in col {
                if cell.degree() == 0 || cell.degree() > sigma {
                    return Err(Error::DegreeExceeded {
                        degree: cell.degree(),
                        cap: sigma,
                    });
                }
                for &s in &cell.sources {
                    if s == 0 || s > kb {
                        return Err(Error::SourceOutOfRange { index: s, max: kb });
                    }
                    covered[s] = true;
                }
            }
        }
        let missing: Vec<usize> = (1..=kb).filter(|&s| !covered[s]).collect();
        if !missing.is_empty() {
            return Err(Error::CoverageGap { missing });
        }
        Ok(ArrayCode { n, k, b, sigma, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Number of source blocks, `k*b`.
    pub fn kb(&self) -> usize {
        self.k * self.b
    }

    pub fn cell(&self, node: usize, proc: usize) -> &CellEquation {
        &self.grid[node][proc]
    }

    pub fn column(&self, node: usize) -> &[CellEquation] {
        &self.grid[node]
    }

    pub fn grid(&self) -> &[Vec<CellEquation>] {
        &self.grid
    }
}

// ---------- Built-in instance ----------

/// The `[5,2,2,2]` array BP-XOR code over sources `v1..v4`.
pub fn builtin_5222() -> ArrayCode {
    let col = |a: &[usize], b: &[usize]| vec![CellEquation::new(a.iter().copied()), CellEquation::new(b.iter().copied())];
    let grid = vec![
        col(&[1], &[2, 3]),
        col(&[2], &[1, 4]),
        col(&[3], &[2, 4]),
        col(&[4], &[1, 3]),
        col(&[1, 2], &[3, 4]),
    ];
    ArrayCode::new(5, 2, 2, 2, grid).expect("built-in code is structurally valid")
}

// ---------- Blocklength bounds ----------

/// Largest blocklength `n` an `[n,k,b,sigma]` MDS array BP-XOR code can
/// have: `k + sigma - 1 + floor(sigma(sigma-1)(b-1) / ((k-sigma)b + sigma - 1))`.
///
/// Requires `sigma < k + (k-1)/(b-1)`, which is exactly positivity of
/// the denominator; evaluated in integers so no floating error.
pub fn max_blocklength(k: usize, b: usize, sigma: usize) -> Result<usize> {
    if k == 0 || b == 0 || sigma == 0 {
        return Err(Error::DegreeCondition {
            detail: format!("k={k}, b={b}, sigma={sigma} must all be >= 1"),
        });
    }
    let (k_, b_, s_) = (k as i128, b as i128, sigma as i128);
    // (k - sigma) b + sigma - 1  ==  kb - sigma (b-1) - 1
    let denom = k_ * b_ - s_ * (b_ - 1) - 1;
    if denom <= 0 {
        return Err(Error::DegreeCondition {
            detail: format!("sigma={sigma} too large for (k={k}, b={b}): need sigma < k + (k-1)/(b-1)"),
        });
    }
    let extra = s_ * (s_ - 1) * (b_ - 1) / denom;
    Ok((k_ + s_ - 1 + extra) as usize)
}

// ---------- Validation ----------

/// Check the MDS-by-peeling property exhaustively: every `k`-subset of
/// columns must peel all `k*b` sources. Returns `(true, None)` or
/// `(false, Some(failing column subset))`.
pub fn validate_mds(code: &ArrayCode) -> (bool, Option<Vec<usize>>) {
    let kb = code.kb();
    for subset in (0..code.n).combinations(code.k) {
        let cells: Vec<&BTreeSet<usize>> = subset
            .iter()
            .flat_map(|&ncol| code.grid[ncol].iter().map(|c| &c.sources))
            .collect();
        if !peel_solvable(&cells, kb) {
            return (false, Some(subset));
        }
    }
    (true, None)
}

/// Number of `r`-subsets that would be examined by an exhaustive
/// threshold sweep; used to guard against runaway enumeration.
fn subset_work(nb: usize, kb: usize) -> u128 {
    let mut total: u128 = 0;
    for r in kb..=nb {
        let mut c: u128 = 1;
        for i in 0..r {
            c = c.saturating_mul((nb - i) as u128) / (i as u128 + 1);
        }
        total = total.saturating_add(c);
    }
    total
}

const THRESHOLD_ENUMERATION_LIMIT: u64 = 20_000_000;

/// Smallest `r` such that EVERY `r`-subset of the `n*b` cells peels to
/// completion. Exhaustive; errors out above a fixed enumeration budget
/// (use sampled validation for codes that large).
pub fn recovery_threshold(code: &ArrayCode) -> Result<usize> {
    let nb = code.n * code.b;
    let kb = code.kb();
    if subset_work(nb, kb) > THRESHOLD_ENUMERATION_LIMIT as u128 {
        return Err(Error::ExhaustionLimit {
            limit: THRESHOLD_ENUMERATION_LIMIT,
        });
    }
    let cells: Vec<&BTreeSet<usize>> = code.grid.iter().flatten().map(|c| &c.sources).collect();
    'sizes: for r in kb..=nb {
        for subset in (0..nb).combinations(r) {
            let chosen: Vec<&BTreeSet<usize>> = subset.iter().map(|&i| cells[i]).collect();
            if !peel_solvable(&chosen, kb) {
                continue 'sizes;
            }
        }
        return Ok(r);
    }
    // All cells together must decode for a structurally valid MDS code;
    // reaching here means even the full grid is stuck.
    Err(Error::CoverageGap { missing: vec![] })
}

// ---------- Search ----------

const SEARCH_BUDGET: usize = 40_000;

fn systematic_grid(k: usize, b: usize) -> Vec<Vec<CellEquation>> {
    (0..k)
        .map(|i| (0..b).map(|j| CellEquation::new([i * b + j + 1])).collect())
        .collect()
}

fn random_column<R: Rng>(rng: &mut R, kb: usize, sigma: usize, b: usize) -> Vec<CellEquation> {
    (0..b)
        .map(|_| {
            let d = rng.random_range(1..=sigma.min(kb));
            CellEquation {
                sources: rand::seq::index::sample(rng, kb, d).into_iter().map(|i| i + 1).collect(),
            }
        })
        .collect()
}

fn grid_witness(grid: &[Vec<CellEquation>], n: usize, k: usize, kb: usize) -> Option<Vec<usize>> {
    for subset in (0..n).combinations(k) {
        let cells: Vec<&BTreeSet<usize>> = subset
            .iter()
            .flat_map(|&c| grid[c].iter().map(|cell| &cell.sources))
            .collect();
        if !peel_solvable(&cells, kb) {
            return Some(subset);
        }
    }
    None
}

/// Randomized stochastic-repair search for an `[n,k,b,sigma]` MDS array
/// BP-XOR code: draw every column at random and, while some `k`-subset
/// of columns fails to peel, re-draw one implicated column until that
/// subset peels, then revalidate globally.
///
/// No column is pinned systematic: a column compatible with two
/// all-degree-1 columns must itself be all coded, and two such columns
/// can never start peeling — valid codes mix degrees everywhere, as the
/// built-in `[5,2,2,2]` instance does. Deterministic for a given seed;
/// gives up (`SearchExhausted`) after a fixed redraw budget — which is
/// not proof no code exists.
pub fn search_code(n: usize, k: usize, b: usize, sigma: usize, seed: u64) -> Result<ArrayCode> {
    let max = max_blocklength(k, b, sigma)?;
    if n > max {
        return Err(Error::BlocklengthExceeded { n, max });
    }
    if n < k {
        return Err(Error::DegreeCondition {
            detail: format!("n={n} must be at least k={k}"),
        });
    }
    let kb = k * b;
    if n == k {
        return ArrayCode::new(n, k, b, sigma, systematic_grid(k, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid: Vec<Vec<CellEquation>> = (0..n).map(|_| random_column(&mut rng, kb, sigma, b)).collect();
    let mut tried = 0usize;
    while let Some(witness) = grid_witness(&grid, n, k, kb) {
        loop {
            tried += 1;
            if tried >= SEARCH_BUDGET {
                return Err(Error::SearchExhausted { tried });
            }
            let pick = witness[rng.random_range(0..witness.len())];
            grid[pick] = random_column(&mut rng, kb, sigma, b);
            let cells: Vec<&BTreeSet<usize>> = witness
                .iter()
                .flat_map(|&c| grid[c].iter().map(|cell| &cell.sources))
                .collect();
            if peel_solvable(&cells, kb) {
                break;
            }
        }
    }
    ArrayCode::new(n, k, b, sigma, grid)
}
