//! Communication-cost accounting for the five schemes.
//!
//! Counts are in field symbols for one multiplication of an `s x k`
//! by an `s x b`-block-column problem (so the uncoded baseline ships
//! `2skb` symbols down and `kb` dot products back). Master-to-cluster
//! traffic grows linearly in `s`; cluster-to-master traffic is a
//! per-result constant — [`SymbolCount`] keeps the two coefficients
//! separate so costs stay exact for any `s`.
//!
//! Overheads are normalized per link against the uncoded baseline
//! (`ratio - 1`) and summed across the two links, which is what the
//! scheme-comparison tables report.

use crate::error::Error;
use crate::latency::{LatencyParams, SchemeKind};
use crate::Result;

/// A symbol count of the form `per_s * s + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCount {
    pub per_s: f64,
    pub constant: f64,
}

impl SymbolCount {
    pub fn eval(&self, s: usize) -> f64 {
        self.per_s * s as f64 + self.constant
    }
}

/// Link-level symbol counts for one scheme, with overheads normalized
/// against the uncoded baseline at the same `(k, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommCost {
    pub master_slave: SymbolCount,
    pub slave_master: SymbolCount,
    /// Master-to-cluster symbols over the uncoded count, minus one.
    pub normalized_overhead_ms: f64,
    /// Cluster-to-master symbols over the uncoded count, minus one.
    pub normalized_overhead_sm: f64,
    /// Sum of the two per-link overheads.
    pub total_overhead: f64,
}

fn counts(scheme: SchemeKind, params: &LatencyParams) -> (SymbolCount, SymbolCount) {
    let (k, n, b) = (params.k as f64, params.n as f64, params.b as f64);
    let sigma = params.sigma as f64;
    let kb = k * b;
    match scheme {
        // Every input column pair once, every dot product back once.
        SchemeKind::Uncoded => (
            SymbolCount {
                per_s: 2.0 * kb,
                constant: 0.0,
            },
            SymbolCount {
                per_s: 0.0,
                constant: kb,
            },
        ),
        // One coded column pair per processor; decoding needs exactly
        // the kb fastest results.
        SchemeKind::Poly => (
            SymbolCount {
                per_s: 2.0 * n * b,
                constant: 0.0,
            },
            SymbolCount {
                per_s: 0.0,
                constant: kb,
            },
        ),
        // Same downlink as poly, but every returned result is a full
        // k x b product block.
        SchemeKind::MatDot => (
            SymbolCount {
                per_s: 2.0 * n * b,
                constant: 0.0,
            },
            SymbolCount {
                per_s: 0.0,
                constant: kb * (k + b - 1.0),
            },
        ),
        // Each processor receives the inputs of up to sigma tasks.
        SchemeKind::Amds => (
            SymbolCount {
                per_s: 2.0 * sigma * n * b,
                constant: 0.0,
            },
            SymbolCount {
                per_s: 0.0,
                constant: kb,
            },
        ),
        // As amds with the widened mean column size b'.
        SchemeKind::Asym => {
            let b_prime = params.b_prime();
            (
                SymbolCount {
                    per_s: 2.0 * sigma * n * b_prime,
                    constant: 0.0,
                },
                SymbolCount {
                    per_s: 0.0,
                    constant: k * b_prime,
                },
            )
        }
    }
}

/// Symbol counts and normalized overheads for `scheme` at matrix
/// height `s`.
pub fn comm_symbols(scheme: SchemeKind, params: &LatencyParams, s: usize) -> Result<CommCost> {
    if params.k == 0 || params.b == 0 || params.n == 0 {
        return Err(Error::LatencyPrecondition {
            detail: "k, b and n must be at least 1".into(),
        });
    }
    if s == 0 {
        return Err(Error::LatencyPrecondition {
            detail: "matrix height s must be at least 1".into(),
        });
    }
    let (master_slave, slave_master) = counts(scheme, params);
    let (base_ms, base_sm) = counts(SchemeKind::Uncoded, params);
    let normalized_overhead_ms = master_slave.eval(s) / base_ms.eval(s) - 1.0;
    let normalized_overhead_sm = slave_master.eval(s) / base_sm.eval(s) - 1.0;
    Ok(CommCost {
        master_slave,
        slave_master,
        normalized_overhead_ms,
        normalized_overhead_sm,
        total_overhead: normalized_overhead_ms + normalized_overhead_sm,
    })
}

/// The asymmetric scheme's downlink overhead in its two algebraic
/// forms: the redundancy-ratio form `n/k + (n/k + 1) eps - 1` and the
/// degree form `sigma n (1 + eps) / k - 1`. The two agree only when
/// `sigma = (n + (n + k) eps) / (n (1 + eps))`; both are returned so
/// callers can report either convention.
pub fn normalized_overhead_asym(n: usize, k: usize, sigma: usize, epsilon: f64) -> (f64, f64) {
    let ratio = n as f64 / k as f64;
    let ratio_form = ratio + (ratio + 1.0) * epsilon - 1.0;
    let degree_form = sigma as f64 * n as f64 * (1.0 + epsilon) / k as f64 - 1.0;
    (ratio_form, degree_form)
}

/// Extra symbols the asymmetric scheme moves over a same-`n` classical
/// array code: `(downlink, uplink) = (2 sigma s n b eps, k b eps)`.
pub fn extra_symbols_asym(n: usize, k: usize, b: usize, sigma: usize, s: usize, epsilon: f64) -> (f64, f64) {
    let down = 2.0 * sigma as f64 * (s * n * b) as f64 * epsilon;
    let up = (k * b) as f64 * epsilon;
    (down, up)
}
