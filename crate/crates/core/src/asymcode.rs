//! Asymptotically-MDS array codes with per-node column sizes.
//!
//! Where an [`ArrayCode`] gives every node exactly `b` cells, an
//! [`AsymArrayCode`] lets node `i` carry `b_i >= 1` cells, paying a mean
//! coding overhead `epsilon = b'/b - 1` with `b' = mean(b_i)`. The MDS
//! property is relaxed to hold empirically over sampled `k`-subsets of
//! columns, which is what "asymptotically MDS" buys: a longer usable
//! blocklength (see [`max_blocklength_asym`]) in exchange for overhead.
//!
//! Each column is equivalently a binary generator matrix `G_i` of shape
//! `kb x b_i` (cell `c` of column `i` sums source `r+1` iff
//! `G_i[r][c] = 1`); the full code generator is the column concatenation
//! `[G_1 | G_2 | ... | G_n]`.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arraycode::{ArrayCode, CellEquation};
use crate::error::Error;
use crate::peel::peel_solvable;
use crate::Result;

/// Array code with per-column cell counts `b_i` (node `i` runs `b_i`
/// processor units). `b` is the nominal per-node count the overhead is
/// measured against; `sigma` is the maximum observed cell degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymArrayCode {
    n: usize,
    k: usize,
    b: usize,
    sigma: usize,
    columns: Vec<Vec<CellEquation>>,
}

impl AsymArrayCode {
    /// Structural checks: `n` non-empty columns, all source indices in
    /// `1..=kb`, every source covered somewhere, and mean column size at
    /// least `b` (overhead cannot be negative). `sigma` is derived as
    /// the maximum observed degree.
    pub fn new(n: usize, k: usize, b: usize, columns: Vec<Vec<CellEquation>>) -> Result<AsymArrayCode> {
        if columns.len() != n || columns.iter().any(Vec::is_empty) {
            return Err(Error::DimensionMismatch {
                context: "need n non-empty columns",
                left_rows: n,
                left_cols: 1,
                right_rows: columns.len(),
                right_cols: columns.iter().map(Vec::len).min().unwrap_or(0),
            });
        }
        let kb = k * b;
        let mut covered = vec![false; kb + 1];
        let mut sigma = 0;
        for col in &columns {
            for cell in col {
                if cell.degree() == 0 {
                    return Err(Error::DegreeCondition {
                        detail: "empty cell equation".into(),
                    });
                }
                sigma = sigma.max(cell.degree());
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
        let total: usize = columns.iter().map(Vec::len).sum();
        if total < n * b {
            return Err(Error::DegreeCondition {
                detail: format!(
                    "mean column size {:.3} below nominal b = {b}; overhead must be >= 0",
                    total as f64 / n as f64
                ),
            });
        }
        Ok(AsymArrayCode { n, k, b, sigma, columns })
    }

    /// View a uniform `[n,k,b]` code as an asymmetric one with zero
    /// overhead.
    pub fn from_array(code: &ArrayCode) -> AsymArrayCode {
        AsymArrayCode {
            n: code.n(),
            k: code.k(),
            b: code.b(),
            sigma: code.sigma(),
            columns: code.grid().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Nominal per-node processor count (overhead baseline).
    pub fn b(&self) -> usize {
        self.b
    }

    /// Maximum observed cell degree.
    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn kb(&self) -> usize {
        self.k * self.b
    }

    pub fn column(&self, i: usize) -> &[CellEquation] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<CellEquation>] {
        &self.columns
    }

    pub fn column_sizes(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// Per-column maximum degree (`sigma_i`), used by the latency model
    /// for non-uniform node profiles.
    pub fn column_max_degrees(&self) -> Vec<usize> {
        self.columns
            .iter()
            .map(|col| col.iter().map(CellEquation::degree).max().unwrap_or(0))
            .collect()
    }

    /// Mean column size `b' = (1/n) sum b_i`.
    pub fn b_prime(&self) -> f64 {
        let total: usize = self.columns.iter().map(Vec::len).sum();
        total as f64 / self.n as f64
    }

    /// Coding overhead `epsilon = b'/b - 1`.
    pub fn epsilon(&self) -> f64 {
        self.b_prime() / self.b as f64 - 1.0
    }

    /// Binary generator matrix `G_i` of column `i`, shape `kb x b_i`.
    pub fn generator(&self, i: usize) -> Vec<Vec<u8>> {
        let kb = self.kb();
        let col = &self.columns[i];
        (0..kb)
            .map(|r| col.iter().map(|cell| u8::from(cell.sources.contains(&(r + 1)))).collect())
            .collect()
    }

    /// Full generator `[G_1 | G_2 | ... | G_n]`, shape `kb x sum(b_i)`.
    pub fn full_generator(&self) -> Vec<Vec<u8>> {
        let kb = self.kb();
        let mut rows: Vec<Vec<u8>> = vec![Vec::new(); kb];
        for i in 0..self.n {
            for (r, mut part) in self.generator(i).into_iter().enumerate() {
                rows[r].append(&mut part);
            }
        }
        rows
    }

    /// Reinterpret as a uniform [`ArrayCode`]; only possible when every
    /// column has exactly `b` cells.
    pub fn to_array_code(&self) -> Result<ArrayCode> {
        if self.columns.iter().any(|col| col.len() != self.b) {
            return Err(Error::DegreeCondition {
                detail: format!("column sizes {:?} are not uniformly b = {}", self.column_sizes(), self.b),
            });
        }
        ArrayCode::new(self.n, self.k, self.b, self.sigma, self.columns.clone())
    }
}

/// Coding overhead `epsilon = b'/b - 1` of an asymmetric code.
pub fn coding_overhead(code: &AsymArrayCode) -> f64 {
    code.epsilon()
}

/// Blocklength bound for asymptotically-MDS codes with coding overhead
/// `epsilon` (so `b' = (1+eps) b` and max degree `sigma' = sigma (1+eps)`):
/// `k + sigma - 1 + floor((b(k(sigma'-sigma) + (sigma-1) sigma') - (sigma-1)(3 sigma/2 - 1)) / (b(k-sigma') + sigma - 1))`.
pub fn max_blocklength_asym(k: usize, b: usize, sigma: usize, epsilon: f64) -> Result<usize> {
    if k == 0 || b == 0 {
        return Err(Error::DegreeCondition {
            detail: format!("k={k}, b={b} must be >= 1"),
        });
    }
    if !(epsilon >= 0.0) {
        return Err(Error::DegreeCondition {
            detail: format!("epsilon={epsilon} must be >= 0"),
        });
    }
    let (kf, bf, sf) = (k as f64, b as f64, sigma as f64);
    let b_prime = (1.0 + epsilon) * bf;
    let sigma_prime = sf * (1.0 + epsilon);
    if sigma <= 2 {
        return Err(Error::DegreeCondition {
            detail: format!("sigma={sigma} must exceed 2"),
        });
    }
    if b_prime > 1.0 && sf >= (bf * kf - 1.0) / (b_prime - 1.0) {
        return Err(Error::DegreeCondition {
            detail: format!(
                "sigma={sigma} must stay below (bk-1)/(b'-1) = {:.3}",
                (bf * kf - 1.0) / (b_prime - 1.0)
            ),
        });
    }
    if sigma_prime >= kf {
        return Err(Error::DegreeCondition {
            detail: format!("sigma(1+eps) = {sigma_prime} must stay below k = {k} for a positive denominator"),
        });
    }
    let numer = bf * (kf * (sigma_prime - sf) + (sf - 1.0) * sigma_prime) - (sf - 1.0) * (1.5 * sf - 1.0);
    let denom = bf * (kf - sigma_prime) + sf - 1.0;
    let extra = (numer / denom).floor();
    Ok((kf + sf - 1.0 + extra) as usize)
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k.min(n) {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

fn subset_peels(code: &AsymArrayCode, subset: &[usize]) -> bool {
    let cells: Vec<&BTreeSet<usize>> = subset
        .iter()
        .flat_map(|&i| code.columns[i].iter().map(|c| &c.sources))
        .collect();
    peel_solvable(&cells, code.kb())
}

/// Sampled check of the MDS-by-peeling property: draw `samples` random
/// `k`-subsets of columns (or enumerate all of them when there are
/// fewer) and peel each. Returns the failure count and a first failing
/// subset. A stuck subset is a counted failure, not an error.
pub fn sample_validate(code: &AsymArrayCode, samples: usize, seed: u64) -> (usize, Option<Vec<usize>>) {
    let mut failures = 0;
    let mut witness = None;
    let mut record = |ok: bool, subset: Vec<usize>| {
        if !ok {
            failures += 1;
            witness.get_or_insert(subset);
        }
    };
    if binomial_saturating(code.n, code.k) <= samples as u128 {
        for subset in (0..code.n).combinations(code.k) {
            let ok = subset_peels(code, &subset);
            record(ok, subset);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut subset: Vec<usize> = rand::seq::index::sample(&mut rng, code.n, code.k).into_iter().collect();
            subset.sort_unstable();
            let ok = subset_peels(code, &subset);
            record(ok, subset);
        }
    }
    (failures, witness)
}

const BUILD_REPAIR_BUDGET: usize = 40_000;
const BUILD_VALIDATION_SAMPLES: usize = 1_000;

fn random_cells<R: Rng>(rng: &mut R, count: usize, kb: usize, cap: usize) -> Vec<CellEquation> {
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=cap.min(kb));
            CellEquation {
                sources: rand::seq::index::sample(rng, kb, d).into_iter().map(|i| i + 1).collect(),
            }
        })
        .collect()
}

/// Randomized construction of an `[n,k,b]` asymmetric code steered
/// toward coding overhead `epsilon_target`, with cell degrees capped at
/// `ceil(sigma (1+eps))`.
///
/// Column sizes are fixed up front so the mean is `(1+eps) b` up to
/// rounding; the first `k` columns keep a degree-1 copy of their source
/// slice (so coverage always holds), every other cell is drawn at
/// random, and failing sampled `k`-subsets trigger a re-draw of one
/// implicated random column until validation is clean or the repair
/// budget runs out. Deterministic for a fixed seed.
pub fn build_asym_code(n: usize, k: usize, b: usize, sigma: usize, epsilon_target: f64, seed: u64) -> Result<AsymArrayCode> {
    if n == 0 || k == 0 || b == 0 || sigma == 0 {
        return Err(Error::DegreeCondition {
            detail: format!("n={n}, k={k}, b={b}, sigma={sigma} must all be >= 1"),
        });
    }
    if n < k {
        return Err(Error::DegreeCondition {
            detail: format!("n={n} must be at least k={k}"),
        });
    }
    if !(epsilon_target >= 0.0) {
        return Err(Error::DegreeCondition {
            detail: format!("epsilon_target={epsilon_target} must be >= 0"),
        });
    }
    let kb = k * b;
    let cap = ((sigma as f64) * (1.0 + epsilon_target)).ceil().max(1.0) as usize;
    let total = ((n * b) as f64 * (1.0 + epsilon_target)).round().max((n * b) as f64) as usize;
    let (base, rem) = (total / n, total % n);
    let sizes: Vec<usize> = (0..n).map(|i| base + usize::from(i < rem)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_column = |rng: &mut ChaCha8Rng, i: usize| -> Vec<CellEquation> {
        if i < k {
            // Systematic slice first (base >= b because total >= n*b),
            // surplus cells random.
            let mut col: Vec<CellEquation> = (0..b).map(|j| CellEquation::new([i * b + j + 1])).collect();
            col.extend(random_cells(rng, sizes[i] - b, kb, cap));
            col
        } else {
            random_cells(rng, sizes[i], kb, cap)
        }
    };
    let mut columns: Vec<Vec<CellEquation>> = (0..n).map(|i| draw_column(&mut rng, i)).collect();
    let mut failures = 0;
    let mut redraws = 0usize;
    loop {
        let candidate = AsymArrayCode::new(n, k, b, columns.clone())?;
        let validation_seed = rng.random::<u64>();
        match sample_validate(&candidate, BUILD_VALIDATION_SAMPLES, validation_seed) {
            (0, _) => return Ok(candidate),
            (f, Some(witness)) => {
                failures += f;
                // A subset of purely systematic columns always peels, so
                // the witness names at least one redrawable column
                // (coded, or systematic with surplus cells) unless the
                // systematic columns are the whole code.
                let repairable: Vec<usize> = witness.iter().copied().filter(|&c| c >= k || sizes[c] > b).collect();
                if repairable.is_empty() {
                    return Err(Error::ConstructionExhausted {
                        attempts: redraws,
                        failures,
                    });
                }
                // Redraw an implicated column until the witnessed subset
                // itself peels, then revalidate with fresh samples.
                loop {
                    redraws += 1;
                    if redraws >= BUILD_REPAIR_BUDGET {
                        return Err(Error::ConstructionExhausted {
                            attempts: redraws,
                            failures,
                        });
                    }
                    let pick = repairable[rng.random_range(0..repairable.len())];
                    columns[pick] = draw_column(&mut rng, pick);
                    let cells: Vec<&BTreeSet<usize>> = witness
                        .iter()
                        .flat_map(|&c| columns[c].iter().map(|cell| &cell.sources))
                        .collect();
                    if peel_solvable(&cells, kb) {
                        break;
                    }
                }
            }
            (_, None) => unreachable!("nonzero failures always carry a witness"),
        }
    }
}
