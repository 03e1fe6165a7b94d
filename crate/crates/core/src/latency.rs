//! Closed-form latency predictors for the master/cluster model.
//!
//! Every task time is exponential: a unit dot product completes at rate
//! `mu` on a cluster processor and `c*mu` on each of the master's `p`
//! processors. End-to-end latency is `T = T_encode + T_parallel +
//! T_decode`; master phases spread their work evenly over `p`
//! processors and wait for the slowest, inflating the mean by a factor
//! that is `H_p` exactly and `log p` asymptotically.
//!
//! Two conventions are exposed for every formula ([`LogMode`]): an
//! asymptotic natural-log form, and an exact harmonic-number form
//! (`log x -> H_x`) that the Monte Carlo model in [`crate::sim`]
//! matches term for term.
//!
//! The array-code dispersion term additionally comes in two variants
//! ([`DispersionVariant`]): `PowerLaw` scales with `b^(sigma-1)`,
//! which overshoots by orders of magnitude at realistic parameters;
//! `SigmaScaled` scales with `sigma`, the form consistent with the
//! sigma-scaled task-time density and with the latency values frozen
//! in this workspace's tests. `SigmaScaled` is the default everywhere;
//! both remain available.

use crate::error::Error;
use crate::Result;

/// Euler–Mascheroni constant.
const GAMMA: f64 = 0.577_215_664_901_532_9;

// ---------- Basic order-statistic math ----------

/// Exact harmonic number `H_n = sum_{j=1..n} 1/j` (`H_0 = 0`). Summed
/// smallest-terms-first for accuracy.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|j| 1.0 / j as f64).sum()
}

/// Harmonic number extended to real arguments (`H_x = gamma + psi(x+1)`),
/// exact at integers. Used when a mean column size `b'` is fractional.
pub fn harmonic_real(x: f64) -> f64 {
    assert!(x >= 0.0, "harmonic_real needs x >= 0, got {x}");
    if x.fract().abs() < 1e-12 && x <= 1e6 {
        return harmonic(x.round() as usize);
    }
    // Shift upward until the asymptotic expansion is accurate, then walk
    // back down with H(x) = H(x+1) - 1/(x+1).
    let mut shift = 0.0;
    let mut y = x;
    while y < 20.0 {
        y += 1.0;
        shift += 1.0 / y;
    }
    y.ln() + GAMMA + 1.0 / (2.0 * y) - 1.0 / (12.0 * y * y) + 1.0 / (120.0 * y.powi(4)) - shift
}

/// Mean of the `l`-th order statistic of `b` iid exponentials with rate
/// `mu`, each stretched by `sigma_scale`:
/// `sigma_scale * (H_b - H_{b-l}) / mu`.
pub fn exp_order_stat_mean(l: usize, b: usize, mu: f64, sigma_scale: f64) -> f64 {
    assert!(l >= 1 && l <= b, "order statistic index {l} outside 1..={b}");
    assert!(mu > 0.0, "rate must be positive");
    sigma_scale * (harmonic(b) - harmonic(b - l)) / mu
}

/// Tail-regime approximation of the standard normal inverse CDF:
/// `sqrt(2 log(1/(1-y)))`.
///
/// Only asymptotically tight: measured relative error against an exact
/// inverse is about 30% at y = 0.99, 20% at y = 0.999 and 13% at
/// y = 0.99999 (see the unit test pinning these), so treat it as a
/// shape, not a number, unless y is extremely close to 1.
pub fn phi_inv_approx(y: f64) -> f64 {
    assert!(y > 0.0 && y < 1.0, "phi_inv_approx needs 0 < y < 1, got {y}");
    (2.0 * (1.0 / (1.0 - y)).ln()).sqrt()
}

// ---------- Parameter plumbing ----------

/// Log convention for the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogMode {
    /// Asymptotic form: every count-log is a natural log; the master
    /// inflation factor is `max(1, ln p)` (the factor models the mean
    /// of a max over `p` parallel shares, so it cannot drop below 1).
    Natural,
    /// Exact form: every count-log is the matching harmonic number and
    /// straggler terms use exact harmonic differences. This is the
    /// accounting the Monte Carlo simulator reproduces in expectation.
    HNumber,
}

/// Which expression scales the array-code straggler dispersion term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionVariant {
    /// `b^(sigma-1) / mu` — power-law in the column width; inconsistent
    /// with the scaled task-time density and wildly large for realistic
    /// `b`, kept for comparison.
    PowerLaw,
    /// `sigma / mu` — from the sigma-scaled density; the default.
    SigmaScaled,
}

/// The five task-distribution schemes the model covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Uncoded,
    Poly,
    MatDot,
    Amds,
    Asym,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Uncoded,
        SchemeKind::Poly,
        SchemeKind::MatDot,
        SchemeKind::Amds,
        SchemeKind::Asym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Uncoded => "uncoded",
            SchemeKind::Poly => "poly",
            SchemeKind::MatDot => "matdot",
            SchemeKind::Amds => "amds",
            SchemeKind::Asym => "asym",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SchemeKind> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Per-node cluster profile for asymmetric codes: node `i` runs
/// `sizes[i]` processor units with cell degrees up to `degrees[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeProfile {
    pub sizes: Vec<usize>,
    pub degrees: Vec<usize>,
}

/// Model parameters shared by the closed forms and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyParams {
    /// Nodes that must finish.
    pub k: usize,
    /// Cluster nodes (coded blocklength).
    pub n: usize,
    /// Processor units per node (nominal, for asymmetric codes).
    pub b: usize,
    /// Maximum tasks per processor unit in the array-code schemes.
    pub sigma: usize,
    /// Unit dot-product completion rate on a cluster processor.
    pub mu: f64,
    /// Master speed factor: master processors run at rate `c * mu`.
    pub c: f64,
    /// Master processor count.
    pub p: usize,
    /// Coding overhead for the asymmetric scheme (`b' = (1+epsilon) b`).
    pub epsilon: f64,
    /// Redundancy ratio for the asymmetric scheme (`n = (1+delta) k`);
    /// derived as `(n-k)/k` when absent.
    pub delta: Option<f64>,
    /// Optional non-uniform per-node profile for the asymmetric scheme.
    pub profile: Option<NodeProfile>,
}

impl LatencyParams {
    /// Parameters at the standard simulation defaults
    /// (`b = 20, sigma = 7, mu = 1, c = p = 50`).
    pub fn new(k: usize, n: usize) -> LatencyParams {
        LatencyParams {
            k,
            n,
            b: 20,
            sigma: 7,
            mu: 1.0,
            c: 50.0,
            p: 50,
            epsilon: 0.0,
            delta: None,
            profile: None,
        }
    }

    fn check_common(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::LatencyPrecondition {
                detail: format!("mu = {} must be positive", self.mu),
            });
        }
        if !(self.c >= 1.0) {
            return Err(Error::LatencyPrecondition {
                detail: format!("c = {} must be at least 1 (master at least as fast)", self.c),
            });
        }
        if self.p == 0 {
            return Err(Error::LatencyPrecondition {
                detail: "p must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn check_redundancy(&self) -> Result<()> {
        if self.n <= self.k {
            return Err(Error::LatencyPrecondition {
                detail: format!(
                    "n = {} must exceed k = {}; straggler terms are undefined otherwise",
                    self.n, self.k
                ),
            });
        }
        Ok(())
    }

    /// Mean column size for the asymmetric scheme.
    pub fn b_prime(&self) -> f64 {
        match &self.profile {
            Some(profile) => profile.sizes.iter().sum::<usize>() as f64 / profile.sizes.len() as f64,
            None => (1.0 + self.epsilon) * self.b as f64,
        }
    }

    /// Redundancy ratio `delta` with the `(n-k)/k` fallback.
    pub fn delta_value(&self) -> f64 {
        self.delta.unwrap_or((self.n as f64 - self.k as f64) / self.k as f64)
    }
}

/// One end-to-end latency split by phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBreakdown {
    pub encode: f64,
    pub parallel: f64,
    pub decode: f64,
}

impl PhaseBreakdown {
    pub fn total(&self) -> f64 {
        self.encode + self.parallel + self.decode
    }
}

// ---------- Mode helpers ----------

/// Master-phase inflation for spreading work over `p` processors.
pub(crate) fn master_factor(p: usize, mode: LogMode) -> f64 {
    match mode {
        LogMode::Natural => (p as f64).ln().max(1.0),
        LogMode::HNumber => harmonic(p),
    }
}

fn count_log(x: usize, mode: LogMode) -> f64 {
    match mode {
        LogMode::Natural => (x as f64).ln(),
        LogMode::HNumber => harmonic(x),
    }
}

fn count_log_real(x: f64, mode: LogMode) -> f64 {
    match mode {
        LogMode::Natural => x.ln(),
        LogMode::HNumber => harmonic_real(x),
    }
}

/// Master-side work (encode, decode) in dot-product equivalents. The
/// interpolation decodes are charged at their best-known complexity —
/// an accounting convention — with the count-log taken per `mode`; the
/// array-code schemes encode on the cluster, so their master cost is
/// the peeling decode alone.
pub(crate) fn master_work(scheme: SchemeKind, params: &LatencyParams, mode: LogMode) -> (f64, f64) {
    let (k, n, b) = (params.k as f64, params.n as f64, params.b as f64);
    let kb = params.k * params.b;
    match scheme {
        SchemeKind::Uncoded => (0.0, 0.0),
        SchemeKind::Poly => (2.0 * n * b * b, kb as f64 * count_log(kb, mode).powi(2)),
        SchemeKind::MatDot => (2.0 * n * b * b, k * k * b * count_log(params.k, mode).powi(2)),
        SchemeKind::Amds => (0.0, params.sigma as f64 * kb as f64),
        SchemeKind::Asym => (0.0, asym_sigma(params) * k * params.b_prime()),
    }
}

fn asym_sigma(params: &LatencyParams) -> f64 {
    match &params.profile {
        Some(profile) => profile.degrees.iter().copied().max().unwrap_or(params.sigma) as f64,
        None => params.sigma as f64,
    }
}

/// Mean and dispersion of the per-node completion times for the
/// asymmetric scheme (`x_i = sigma_i log b_i`): returns
/// `(mu_b, sigma_bar)`, the two moments behind its straggler term.
/// Exposed so the simulator and tests can cross-check the Gaussian
/// approximation.
pub fn asym_dispersion(params: &LatencyParams, variant: DispersionVariant) -> Result<(f64, f64)> {
    let mu = params.mu;
    match &params.profile {
        None => {
            let sigma = params.sigma as f64;
            let b_prime = params.b_prime();
            let mu_b = sigma * b_prime.ln() / mu;
            let sigma_bar = match variant {
                DispersionVariant::SigmaScaled => sigma / mu,
                DispersionVariant::PowerLaw => b_prime.powf(sigma - 1.0) / mu,
            };
            Ok((mu_b, sigma_bar))
        }
        Some(profile) => {
            let n = profile.sizes.len();
            if n == 0 || profile.degrees.len() != n {
                return Err(Error::LatencyPrecondition {
                    detail: "profile needs matching non-empty size and degree lists".into(),
                });
            }
            if profile.sizes.contains(&0) || profile.degrees.contains(&0) {
                return Err(Error::LatencyPrecondition {
                    detail: "profile entries must be >= 1".into(),
                });
            }
            let x: Vec<f64> = profile
                .sizes
                .iter()
                .zip(&profile.degrees)
                .map(|(&b, &d)| d as f64 * (b as f64).ln())
                .collect();
            let mean_x = x.iter().sum::<f64>() / n as f64;
            let mu_b = mean_x / mu;
            let sigma_bar = match variant {
                DispersionVariant::SigmaScaled => {
                    let mean_sq = x
                        .iter()
                        .zip(&profile.degrees)
                        .map(|(&xi, &d)| (d as f64).powi(2) + (xi - mean_x).powi(2))
                        .sum::<f64>()
                        / n as f64;
                    mean_sq.sqrt() / mu
                }
                DispersionVariant::PowerLaw => {
                    let (min_x, max_x) = x
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                    let mean_pow = profile
                        .sizes
                        .iter()
                        .zip(&profile.degrees)
                        .map(|(&b, &d)| (b as f64).powf(2.0 * (d as f64 - 1.0)))
                        .sum::<f64>()
                        / n as f64;
                    (n as f64 * (max_x - min_x).powi(2) / 4.0 + mean_pow).sqrt() / mu
                }
            };
            Ok((mu_b, sigma_bar))
        }
    }
}

// ---------- Closed forms ----------

/// Expected end-to-end latency of `scheme`, split by phase.
pub fn closed_form(
    scheme: SchemeKind,
    params: &LatencyParams,
    mode: LogMode,
    variant: DispersionVariant,
) -> Result<PhaseBreakdown> {
    params.check_common()?;
    let mu = params.mu;
    let master_rate = params.c * params.p as f64 * mu;
    let factor = master_factor(params.p, mode);
    let (encode_work, decode_work) = master_work(scheme, params, mode);
    let encode = encode_work / master_rate * factor;
    let decode = decode_work / master_rate * factor;

    let parallel = match scheme {
        SchemeKind::Uncoded => {
            let kb = params.k * params.b;
            if kb == 0 {
                return Err(Error::LatencyPrecondition {
                    detail: "kb must be at least 1".into(),
                });
            }
            count_log(kb, mode) / mu
        }
        SchemeKind::Poly => {
            params.check_redundancy()?;
            let (nb, kb) = (params.n * params.b, params.k * params.b);
            match mode {
                LogMode::Natural => (params.n as f64 / (params.n - params.k) as f64).ln() / mu,
                LogMode::HNumber => (harmonic(nb) - harmonic(nb - kb)) / mu,
            }
        }
        SchemeKind::MatDot => {
            let (nb, need) = (params.n * params.b, params.k + params.b - 1);
            if nb <= need {
                return Err(Error::LatencyPrecondition {
                    detail: format!("need nb = {nb} > k + b - 1 = {need} worker outputs available"),
                });
            }
            match mode {
                LogMode::Natural => {
                    // n / (n - k/b) == nb / (nb - k)
                    (nb as f64 / (nb - params.k) as f64).ln() / mu
                }
                LogMode::HNumber => (harmonic(nb) - harmonic(nb - need)) / mu,
            }
        }
        SchemeKind::Amds => {
            params.check_redundancy()?;
            let sigma = params.sigma as f64;
            let dispersion = match variant {
                DispersionVariant::SigmaScaled => sigma / mu,
                DispersionVariant::PowerLaw => (params.b as f64).powf(sigma - 1.0) / mu,
            };
            let tail = (2.0 * (params.n as f64 / (params.n - params.k) as f64).ln()).sqrt();
            sigma / mu * count_log(params.b, mode) + dispersion * tail
        }
        SchemeKind::Asym => {
            params.check_redundancy()?;
            let delta = params.delta_value();
            if !(delta > 0.0) {
                return Err(Error::LatencyPrecondition {
                    detail: format!("delta = {delta} must be positive"),
                });
            }
            let (_, sigma_bar) = asym_dispersion(params, variant)?;
            let tail = (2.0 * ((1.0 + delta) / delta).ln()).sqrt();
            asym_sigma(params) / mu * count_log_real(params.b_prime(), mode) + sigma_bar * tail
        }
    };
    Ok(PhaseBreakdown {
        encode,
        parallel,
        decode,
    })
}

/// Smallest coding overhead `epsilon` whose asymmetric blocklength
/// bound admits `n_target` nodes for the given `(k, b, sigma)`; zero if
/// the bound already allows it without overhead.
pub fn epsilon_for_stragglers(k: usize, b: usize, sigma: usize, n_target: usize) -> Result<f64> {
    use crate::asymcode::max_blocklength_asym;
    let fits = |eps: f64| {
        max_blocklength_asym(k, b, sigma, eps)
            .map(|max| max >= n_target)
            .unwrap_or(false)
    };
    if fits(0.0) {
        return Ok(0.0);
    }
    // sigma (1 + eps) < k caps the searchable range.
    let eps_max = (k as f64 / sigma as f64 - 1.0) * (1.0 - 1e-9);
    if eps_max <= 0.0 || !fits(eps_max) {
        return Err(Error::LatencyPrecondition {
            detail: format!("no overhead lets an (k={k}, b={b}, sigma={sigma}) code reach n = {n_target}"),
        });
    }
    let (mut lo, mut hi) = (0.0_f64, eps_max);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn reference_params(k: usize, n: usize, b: usize) -> LatencyParams {
        LatencyParams {
            b,
            ..LatencyParams::new(k, n)
        }
    }

    #[test]
    fn harmonic_numbers_are_exact_sums() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-12);
        for b in [10usize, 100, 10_000] {
            let gap = (harmonic(b) - (b as f64).ln() - GAMMA).abs();
            assert!(gap < 1.0 / (2.0 * b as f64), "b = {b}: gap {gap}");
        }
    }

    #[test]
    fn real_harmonic_agrees_at_integers_and_interpolates() {
        for n in [1usize, 2, 7, 50, 400] {
            assert_eq!(harmonic_real(n as f64), harmonic(n));
        }
        let h = harmonic_real(2.5);
        assert!(harmonic(2) < h && h < harmonic(3));
        // psi-based spot value: H_{1/2} = 2 - 2 ln 2.
        assert!((harmonic_real(0.5) - (2.0 - 2.0 * 2.0_f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn order_stat_mean_matches_the_harmonic_difference() {
        assert_eq!(exp_order_stat_mean(1, 1, 1.0, 1.0), 1.0);
        assert!((exp_order_stat_mean(5, 5, 2.0, 1.0) - harmonic(5) / 2.0).abs() < 1e-12);
        assert!((exp_order_stat_mean(3, 5, 1.0, 4.0) - 4.0 * (harmonic(5) - harmonic(2))).abs() < 1e-12);
    }

    #[test]
    fn phi_inv_approx_identity_point_and_measured_error() {
        assert!((phi_inv_approx(1.0 - (-2.0_f64).exp()) - 2.0).abs() < 1e-12);
        let exact = Normal::new(0.0, 1.0).unwrap();
        let rel = |y: f64| (phi_inv_approx(y) - exact.inverse_cdf(y)) / exact.inverse_cdf(y);
        // The approximation is crude at moderate tail mass and tightens
        // slowly; pin the measured errors so the docs stay honest.
        assert!((rel(0.99) - 0.305).abs() < 0.005, "measured {}", rel(0.99));
        assert!((rel(0.999) - 0.203).abs() < 0.005, "measured {}", rel(0.999));
        assert!((rel(0.99999) - 0.125).abs() < 0.005, "measured {}", rel(0.99999));
        // It also stays within 2% of the straggler-ratio log form it
        // replaces at the reference operating point.
        let y = (1000.0 - 0.375) / (1006.0 - 2.0 * 0.375 + 1.0);
        let direct = (2.0 * (1006.0_f64 / 6.0).ln()).sqrt();
        assert!((phi_inv_approx(y) / direct - 1.0).abs() < 0.02);
    }

    #[test]
    fn master_factor_floors_at_one() {
        assert_eq!(master_factor(1, LogMode::Natural), 1.0);
        assert_eq!(master_factor(1, LogMode::HNumber), 1.0);
        assert_eq!(master_factor(2, LogMode::Natural), 1.0, "ln 2 < 1 floors to the plain mean");
        assert_eq!(master_factor(50, LogMode::HNumber), harmonic(50));
    }

    #[test]
    fn uncoded_form_is_the_max_order_statistic() {
        let params = LatencyParams::new(1000, 1006);
        let got = closed_form(SchemeKind::Uncoded, &params, LogMode::HNumber, DispersionVariant::SigmaScaled).unwrap();
        assert_eq!(got.encode, 0.0);
        assert_eq!(got.decode, 0.0);
        assert!((got.parallel - harmonic(20_000)).abs() < 1e-9);
        assert!((got.total() - 10.478).abs() < 0.01, "known H_20000 value");
    }

    #[test]
    fn reference_row_poly_hnumber() {
        let params = reference_params(100, 137, 100);
        let got = closed_form(SchemeKind::Poly, &params, LogMode::HNumber, DispersionVariant::SigmaScaled).unwrap();
        assert!((got.total() - 6656.5).abs() < 1.0, "got {}", got.total());
    }

    #[test]
    fn reference_row_amds_natural() {
        let params = reference_params(100, 106, 100);
        let got = closed_form(SchemeKind::Amds, &params, LogMode::Natural, DispersionVariant::SigmaScaled).unwrap();
        assert!((got.total() - 158.55).abs() < 0.05, "got {}", got.total());
    }

    #[test]
    fn reference_row_asym_hnumber() {
        let params = LatencyParams {
            epsilon: 3.0,
            ..reference_params(100, 137, 100)
        };
        let got = closed_form(SchemeKind::Asym, &params, LogMode::HNumber, DispersionVariant::SigmaScaled).unwrap();
        assert!((got.total() - 561.23).abs() < 0.1, "got {}", got.total());
    }

    #[test]
    fn power_law_dispersion_is_orders_of_magnitude_larger() {
        let params = reference_params(100, 106, 100);
        let scaled = closed_form(SchemeKind::Amds, &params, LogMode::Natural, DispersionVariant::SigmaScaled).unwrap();
        let power = closed_form(SchemeKind::Amds, &params, LogMode::Natural, DispersionVariant::PowerLaw).unwrap();
        assert!(power.parallel > 1e9 * scaled.parallel, "b^(sigma-1) = 1e12 dwarfs sigma = 7");
    }

    #[test]
    fn uniform_asym_collapses_to_amds_with_wider_nodes() {
        // epsilon = 0 and delta = (n-k)/k make the two forms identical.
        let params = LatencyParams::new(100, 106);
        for mode in [LogMode::Natural, LogMode::HNumber] {
            let amds = closed_form(SchemeKind::Amds, &params, mode, DispersionVariant::SigmaScaled).unwrap();
            let asym = closed_form(SchemeKind::Asym, &params, mode, DispersionVariant::SigmaScaled).unwrap();
            assert!((amds.parallel - asym.parallel).abs() < 1e-12);
            assert!((amds.decode - asym.decode).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_amds_keeps_only_the_tail_term() {
        let params = LatencyParams {
            b: 1,
            sigma: 1,
            c: 1.0,
            p: 1,
            ..LatencyParams::new(4, 8)
        };
        let got = closed_form(SchemeKind::Amds, &params, LogMode::Natural, DispersionVariant::SigmaScaled).unwrap();
        let tail = (2.0 * (8.0_f64 / 4.0).ln()).sqrt();
        assert!(
            (got.parallel - tail).abs() < 1e-12,
            "sigma = b = 1: only the dispersion term remains"
        );
    }

    #[test]
    fn profile_dispersion_collapses_and_bounds_hold() {
        let uniform = LatencyParams {
            profile: Some(NodeProfile {
                sizes: vec![80; 106],
                degrees: vec![7; 106],
            }),
            ..LatencyParams::new(100, 106)
        };
        let (mu_b, sigma_bar) = asym_dispersion(&uniform, DispersionVariant::SigmaScaled).unwrap();
        assert!((mu_b - 7.0 * 80.0_f64.ln()).abs() < 1e-9);
        assert!((sigma_bar - 7.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = 30;
            let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(10..=100)).collect();
            let degrees: Vec<usize> = (0..n).map(|_| rng.random_range(3..=8)).collect();
            let params = LatencyParams {
                profile: Some(NodeProfile {
                    sizes: sizes.clone(),
                    degrees: degrees.clone(),
                }),
                ..LatencyParams::new(20, 30)
            };
            let (mu_b, _) = asym_dispersion(&params, DispersionVariant::SigmaScaled).unwrap();
            let b_prime = sizes.iter().sum::<usize>() as f64 / n as f64;
            let max_d = *degrees.iter().max().unwrap() as f64;
            let min_d = *degrees.iter().min().unwrap() as f64;
            let mean_log = sizes.iter().map(|&b| (b as f64).ln()).sum::<f64>() / n as f64;
            assert!(max_d * b_prime.ln() >= mu_b - 1e-9, "upper envelope");
            assert!(mu_b >= min_d * mean_log - 1e-9, "lower envelope");
        }
    }

    #[test]
    fn preconditions_are_guarded() {
        let equal = LatencyParams::new(100, 100);
        for scheme in [SchemeKind::Poly, SchemeKind::Amds, SchemeKind::Asym] {
            assert!(
                closed_form(scheme, &equal, LogMode::Natural, DispersionVariant::SigmaScaled).is_err(),
                "{scheme:?} needs n > k"
            );
        }
        let tight = LatencyParams {
            b: 1,
            ..LatencyParams::new(5, 5)
        };
        assert!(closed_form(SchemeKind::MatDot, &tight, LogMode::Natural, DispersionVariant::SigmaScaled).is_err());
        let bad_mu = LatencyParams {
            mu: 0.0,
            ..LatencyParams::new(2, 4)
        };
        assert!(closed_form(SchemeKind::Uncoded, &bad_mu, LogMode::Natural, DispersionVariant::SigmaScaled).is_err());
    }

    #[test]
    fn overhead_search_brackets_the_bound_jump() {
        let eps = epsilon_for_stragglers(100, 100, 7, 137).unwrap();
        assert!(crate::asymcode::max_blocklength_asym(100, 100, 7, eps).unwrap() >= 137);
        assert!(crate::asymcode::max_blocklength_asym(100, 100, 7, (eps - 0.01).max(0.0)).unwrap() < 137);
        assert_eq!(
            epsilon_for_stragglers(100, 100, 7, 106).unwrap(),
            0.0,
            "classical bound already suffices"
        );
        assert!(
            epsilon_for_stragglers(10, 4, 3, 10_000).is_err(),
            "unreachable target reports the failure"
        );
    }

    #[test]
    fn master_terms_scale_down_with_more_master_power() {
        let base = reference_params(100, 137, 100);
        let total = |c: f64, p: usize| {
            let params = LatencyParams { c, p, ..base.clone() };
            closed_form(SchemeKind::Poly, &params, LogMode::HNumber, DispersionVariant::SigmaScaled)
                .unwrap()
                .total()
        };
        assert!(total(50.0, 50) < total(10.0, 50));
        assert!(total(50.0, 50) < total(50.0, 5));
        assert!(total(100.0, 100) < total(50.0, 50));
    }
}
