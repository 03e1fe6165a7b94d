//! Monte Carlo model of the master/cluster latency process.
//!
//! Each trial draws the three phases of one end-to-end run:
//!
//! * master phases (encode, decode): the phase's work `W` is spread
//!   evenly over `p` processors running at rate `c * mu`, and the phase
//!   ends when the slowest finishes — `(W / p) * max(p exponentials)`,
//!   so the phase mean is exactly `W * H_p / (p c mu)`, the same
//!   accounting as [`closed_form`] in [`LogMode::HNumber`];
//! * the cluster phase: the scheme-specific order statistic of the
//!   worker completion times.
//!
//! All order statistics are sampled in O(1) through quantile
//! transforms rather than by sorting explicit samples: the maximum of
//! `m` iid exponentials inverts `u^(1/m)`, the `l`-th smallest of `m`
//! maps a `Beta(l, m - l + 1)` draw through the exponential quantile,
//! and an array-code node (the max of `b` sigma-scaled exponentials)
//! composes its own quantile with the Beta draw for "k-th fastest of n
//! nodes". Only the non-uniform asymmetric profile samples per node.
//!
//! Trials use independent ChaCha substreams of one seed, so results
//! are reproducible and two parameter sets share their randomness
//! (common random numbers) when run with the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::error::Error;
use crate::latency::{closed_form, master_work, DispersionVariant, LatencyParams, LogMode, PhaseBreakdown, SchemeKind};
use crate::Result;

/// Summary statistics of one simulation run, with the matching closed
/// forms attached for side-by-side reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub trials: usize,
    pub seed: u64,
    pub mean_encode: f64,
    pub mean_parallel: f64,
    pub mean_decode: f64,
    pub mean_total: f64,
    /// Sample variance of the per-trial totals.
    pub var_total: f64,
    pub closed_form_natural: PhaseBreakdown,
    pub closed_form_hnumber: PhaseBreakdown,
}

/// Keep quantile inputs strictly inside (0, 1) so the transforms stay
/// finite; the clipped mass is far below sampling resolution.
fn clamp_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, 1.0 - 1e-16)
}

/// Maximum of `m` iid exponentials with the given rate, via one
/// uniform draw: quantile of `u` is `-ln(1 - u^(1/m)) / rate`.
fn max_exp<R: Rng>(rng: &mut R, m: usize, rate: f64) -> f64 {
    debug_assert!(m >= 1 && rate > 0.0);
    let u = clamp_unit(rng.random::<f64>());
    -(-f64::exp_m1(u.ln() / m as f64)).ln() / rate
}

/// `l`-th smallest of `m` iid exponentials with the given rate, via a
/// Beta draw through the exponential quantile.
fn order_stat_exp<R: Rng>(rng: &mut R, l: usize, m: usize, rate: f64) -> f64 {
    debug_assert!(l >= 1 && l <= m && rate > 0.0);
    let u = clamp_unit(Beta::new(l as f64, (m - l + 1) as f64).expect("valid Beta shape").sample(rng));
    -(1.0 - u).ln() / rate
}

/// Quantile of one array-code node's completion time: the max of `b`
/// exponentials at rate `mu`, each stretched by `sigma`. Accepts a
/// fractional `b` as the continuous extension used for mean column
/// sizes.
fn node_time_quantile(u: f64, b: f64, sigma: f64, mu: f64) -> f64 {
    -(sigma / mu) * (-f64::exp_m1(clamp_unit(u).ln() / b)).ln()
}

/// `k`-th fastest of `n` array-code nodes, each the max of `b`
/// sigma-scaled exponentials, via Beta-then-quantile composition.
fn kth_node_time<R: Rng>(rng: &mut R, k: usize, n: usize, b: f64, sigma: f64, mu: f64) -> f64 {
    let u = Beta::new(k as f64, (n - k + 1) as f64).expect("valid Beta shape").sample(rng);
    node_time_quantile(u, b, sigma, mu)
}

/// Master phase duration for `work` dot-product equivalents spread
/// over `p` processors at rate `c * mu`.
fn master_phase<R: Rng>(rng: &mut R, work: f64, params: &LatencyParams) -> f64 {
    if work == 0.0 {
        return 0.0;
    }
    let rate = params.c * params.mu;
    work / params.p as f64 * max_exp(rng, params.p, rate)
}

fn parallel_phase<R: Rng>(rng: &mut R, scheme: SchemeKind, params: &LatencyParams) -> f64 {
    let (k, n, b, mu) = (params.k, params.n, params.b, params.mu);
    match scheme {
        SchemeKind::Uncoded => max_exp(rng, k * b, mu),
        SchemeKind::Poly => order_stat_exp(rng, k * b, n * b, mu),
        SchemeKind::MatDot => order_stat_exp(rng, k + b - 1, n * b, mu),
        SchemeKind::Amds => kth_node_time(rng, k, n, b as f64, params.sigma as f64, mu),
        SchemeKind::Asym => match &params.profile {
            None => kth_node_time(rng, k, n, (1.0 + params.epsilon) * b as f64, params.sigma as f64, mu),
            Some(profile) => {
                let mut times: Vec<f64> = profile
                    .sizes
                    .iter()
                    .zip(&profile.degrees)
                    .map(|(&b_i, &d_i)| node_time_quantile(rng.random::<f64>(), b_i as f64, d_i as f64, mu))
                    .collect();
                let (_, kth, _) = times.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
                *kth
            }
        },
    }
}

/// Simulate `trials` end-to-end runs of `scheme` and report phase
/// means, total-latency mean and variance, and both closed forms
/// (sigma-scaled dispersion variant) for the same parameters.
pub fn mc_simulate(scheme: SchemeKind, params: &LatencyParams, trials: usize, seed: u64) -> Result<SimOutcome> {
    if trials == 0 {
        return Err(Error::LatencyPrecondition {
            detail: "trials must be at least 1".into(),
        });
    }
    // The closed forms run every precondition check the simulation
    // relies on (n > k, positive rates, profile shape).
    let closed_form_natural = closed_form(scheme, params, LogMode::Natural, DispersionVariant::SigmaScaled)?;
    let closed_form_hnumber = closed_form(scheme, params, LogMode::HNumber, DispersionVariant::SigmaScaled)?;
    if let (SchemeKind::Asym, Some(profile)) = (scheme, &params.profile) {
        if profile.sizes.len() != params.n {
            return Err(Error::LatencyPrecondition {
                detail: format!("profile lists {} nodes but n = {}", profile.sizes.len(), params.n),
            });
        }
    }
    let (encode_work, decode_work) = master_work(scheme, params, LogMode::HNumber);

    let (mut sum_encode, mut sum_parallel, mut sum_decode) = (0.0, 0.0, 0.0);
    let (mut mean, mut m2) = (0.0, 0.0);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);

        let encode = master_phase(&mut rng, encode_work, params);
        let parallel = parallel_phase(&mut rng, scheme, params);
        let decode = master_phase(&mut rng, decode_work, params);
        sum_encode += encode;
        sum_parallel += parallel;
        sum_decode += decode;

        let total = encode + parallel + decode;
        let delta = total - mean;
        mean += delta / (trial + 1) as f64;
        m2 += delta * (total - mean);
    }
    let var_total = if trials > 1 { m2 / (trials - 1) as f64 } else { 0.0 };
    Ok(SimOutcome {
        trials,
        seed,
        mean_encode: sum_encode / trials as f64,
        mean_parallel: sum_parallel / trials as f64,
        mean_decode: sum_decode / trials as f64,
        mean_total: mean,
        var_total,
        closed_form_natural,
        closed_form_hnumber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::{harmonic, NodeProfile};

    fn small_poly_params() -> LatencyParams {
        LatencyParams {
            b: 5,
            c: 10.0,
            p: 10,
            ..LatencyParams::new(20, 27)
        }
    }

    #[test]
    fn same_seed_reproduces_bit_for_bit() {
        let params = small_poly_params();
        let a = mc_simulate(SchemeKind::Poly, &params, 500, 9).unwrap();
        let b = mc_simulate(SchemeKind::Poly, &params, 500, 9).unwrap();
        assert_eq!(a, b);
        let c = mc_simulate(SchemeKind::Poly, &params, 500, 10).unwrap();
        assert_ne!(a.mean_total, c.mean_total);
    }

    #[test]
    fn single_task_mean_is_one_over_mu() {
        let params = LatencyParams {
            k: 1,
            b: 1,
            mu: 2.0,
            ..LatencyParams::new(1, 2)
        };
        let got = mc_simulate(SchemeKind::Uncoded, &params, 50_000, 3).unwrap();
        assert!((got.mean_total - 0.5).abs() < 0.01, "got {}", got.mean_total);
        assert_eq!(got.mean_encode, 0.0);
        assert_eq!(got.mean_decode, 0.0);
    }

    #[test]
    fn max_order_statistic_matches_harmonic_means() {
        for kb in [2usize, 5, 20] {
            let params = LatencyParams {
                k: kb,
                b: 1,
                ..LatencyParams::new(kb, kb + 1)
            };
            let got = mc_simulate(SchemeKind::Uncoded, &params, 100_000, 17).unwrap();
            let want = harmonic(kb);
            assert!(
                (got.mean_parallel / want - 1.0).abs() < 0.01,
                "kb = {kb}: {} vs {want}",
                got.mean_parallel
            );
        }
    }

    #[test]
    fn interpolation_schemes_match_their_exact_closed_form() {
        let params = small_poly_params();
        for scheme in [SchemeKind::Poly, SchemeKind::MatDot, SchemeKind::Uncoded] {
            let got = mc_simulate(scheme, &params, 20_000, 5).unwrap();
            let want = got.closed_form_hnumber.total();
            let rel = (got.mean_total / want - 1.0).abs();
            assert!(
                rel < 0.03,
                "{scheme:?}: simulated {} vs exact {want} ({rel:.4})",
                got.mean_total
            );
        }
    }

    #[test]
    fn array_schemes_land_near_their_approximate_closed_form() {
        // The array-code closed forms use a Gaussian tail approximation,
        // so agreement is loose where the interpolation schemes' is exact.
        let params = LatencyParams {
            b: 20,
            sigma: 7,
            ..LatencyParams::new(100, 106)
        };
        let amds = mc_simulate(SchemeKind::Amds, &params, 20_000, 5).unwrap();
        let rel = amds.mean_total / amds.closed_form_hnumber.total() - 1.0;
        assert!(rel.abs() < 0.10, "amds off by {rel:.4}");

        let asym = LatencyParams {
            epsilon: 3.0,
            delta: Some(0.06),
            ..params
        };
        let got = mc_simulate(SchemeKind::Asym, &asym, 20_000, 5).unwrap();
        let rel = got.mean_total / got.closed_form_hnumber.total() - 1.0;
        assert!(rel.abs() < 0.10, "asym off by {rel:.4}");
    }

    #[test]
    fn profile_runs_are_deterministic_and_respect_k() {
        let profile = NodeProfile {
            sizes: (0..12).map(|i| 10 + 7 * (i % 4)).collect(),
            degrees: (0..12).map(|i| 3 + (i % 3)).collect(),
        };
        let base = LatencyParams {
            b: 10,
            sigma: 5,
            profile: Some(profile),
            ..LatencyParams::new(8, 12)
        };
        let a = mc_simulate(SchemeKind::Asym, &base, 4_000, 21).unwrap();
        let b = mc_simulate(SchemeKind::Asym, &base, 4_000, 21).unwrap();
        assert_eq!(a, b);

        let easier = LatencyParams { k: 4, ..base.clone() };
        let faster = mc_simulate(SchemeKind::Asym, &easier, 4_000, 21).unwrap();
        assert!(
            faster.mean_parallel < a.mean_parallel,
            "waiting for 4 of 12 nodes beats waiting for 8: {} vs {}",
            faster.mean_parallel,
            a.mean_parallel
        );
    }

    #[test]
    fn means_fall_as_master_power_grows() {
        let base = small_poly_params();
        let total = |c: f64, p: usize| {
            let params = LatencyParams { c, p, ..base.clone() };
            mc_simulate(SchemeKind::Poly, &params, 5_000, 77).unwrap().mean_total
        };
        assert!(total(50.0, 10) < total(10.0, 10));
        assert!(total(10.0, 50) < total(10.0, 5));
    }

    #[test]
    fn preconditions_propagate_from_the_closed_forms() {
        let equal = LatencyParams::new(10, 10);
        assert!(mc_simulate(SchemeKind::Poly, &equal, 10, 1).is_err());
        let params = small_poly_params();
        assert!(mc_simulate(SchemeKind::Poly, &params, 0, 1).is_err(), "zero trials");
        let short_profile = LatencyParams {
            profile: Some(NodeProfile {
                sizes: vec![5; 3],
                degrees: vec![2; 3],
            }),
            ..LatencyParams::new(4, 8)
        };
        assert!(
            mc_simulate(SchemeKind::Asym, &short_profile, 10, 1).is_err(),
            "profile shorter than n"
        );
    }

    #[test]
    fn variance_is_positive_and_single_trial_reports_zero() {
        let params = small_poly_params();
        let got = mc_simulate(SchemeKind::Poly, &params, 1_000, 2).unwrap();
        assert!(got.var_total > 0.0 && got.var_total.is_finite());
        let one = mc_simulate(SchemeKind::Poly, &params, 1, 2).unwrap();
        assert_eq!(one.var_total, 0.0);
    }
}
