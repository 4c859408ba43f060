//! Rate-maximising group size.
//!
//! Brute force evaluates the closed-form bound at every feasible `B`. The
//! closed form approximates `z ~ kappa sqrt(B)`, drops the `O(1)` terms of
//! the high-SNR bound and solves the first-order condition with the
//! principal Lambert W branch:
//!
//! ```text
//! B* = floor( K / (T_c - 1) * W(zeta gamma (T_c - 1) K) + 1/2 ),  zeta = e kappa^2 beta_l
//! ```
//!
//! Because `W(x)/x = e^{-W(x)}`, the same value can be written as
//! `floor(zeta gamma K^2 e^{-W(zeta gamma K (T_c - 1))} + 1/2)`.

use crate::error::{Error, Result};
use crate::linkbudget::SystemParams;
use crate::rate::{mc_achievable_rate, rate_upper_bound, z_ratio};

pub use crate::special::lambert_w0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BruteForce,
    ClosedForm,
    ClosedFormAlt,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BruteForce => "brute-force",
            Method::ClosedForm => "closed-form",
            Method::ClosedFormAlt => "closed-form-alt",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSizeResult {
    pub b_star: usize,
    pub k_prime: usize,
    /// Upper bound on the rate at `b_star`, bits/s/Hz.
    pub rate_bound: f64,
    pub method: Method,
}

impl GroupSizeResult {
    fn at(params: &SystemParams, b: usize, method: Method) -> Result<Self> {
        let at_b = params.with_group_size(b)?;
        Ok(GroupSizeResult {
            b_star: b,
            k_prime: at_b.k_prime(),
            rate_bound: rate_upper_bound(&at_b)?,
            method,
        })
    }
}

/// `z(B) ~ kappa B^eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub kappa: f64,
    pub eta: f64,
    /// RMS residual of the fit in the log domain.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentMode {
    /// Fit both `kappa` and `eta`.
    Free,
    /// Hold `eta` fixed and fit `kappa` only.
    Fixed(f64),
}

/// Least squares on `ln y = ln kappa + eta ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], mode: ExponentMode) -> Result<PowerFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            what: "fit samples",
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid("samples", "power-law fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mean_x = lx.iter().sum::<f64>() / n;
    let mean_y = ly.iter().sum::<f64>() / n;
    let (eta, ln_kappa) = match mode {
        ExponentMode::Fixed(eta) => {
            if lx.is_empty() {
                return Err(Error::invalid("samples", "need at least one point"));
            }
            (eta, mean_y - eta * mean_x)
        }
        ExponentMode::Free => {
            let sxx: f64 = lx.iter().map(|x| (x - mean_x).powi(2)).sum();
            if lx.len() < 2 || sxx == 0.0 {
                return Err(Error::invalid("samples", "need two distinct abscissae to fit an exponent"));
            }
            let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
            let eta = sxy / sxx;
            (eta, mean_y - eta * mean_x)
        }
    };
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - ln_kappa - eta * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerFit {
        kappa: ln_kappa.exp(),
        eta,
        residual,
    })
}

/// Fits `z(B)` over `B = 1..=b_max`.
pub fn fit_z_power(b_max: usize, mode: ExponentMode) -> Result<PowerFit> {
    if b_max < 8 {
        return Err(Error::invalid("b_max", format!("fit range must reach at least 8, got {b_max}")));
    }
    let xs: Vec<f64> = (1..=b_max).map(|b| b as f64).collect();
    let ys = (1..=b_max).map(z_ratio).collect::<Result<Vec<_>>>()?;
    fit_power_law(&xs, &ys, mode)
}

/// Scale factors of the closed form, both multiplying `beta_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingConstants {
    /// `zeta / beta_l`
    pub zeta: f64,
    /// `c / beta_l = kappa^2`
    pub c: f64,
}

impl GroupingConstants {
    /// The published constants: `c = 0.7671`, `zeta = 2.08`.
    pub const PUBLISHED: GroupingConstants = GroupingConstants { zeta: 2.08, c: 0.7671 };

    /// Derives `c = kappa^2` and `zeta = e c` from a square-root fit of `z`.
    pub fn from_fit(fit: &PowerFit) -> Self {
        let c = fit.kappa * fit.kappa;
        GroupingConstants {
            zeta: std::f64::consts::E * c,
            c,
        }
    }

    /// Fits `z ~ kappa sqrt(B)` over `1..=b_max` and derives the constants.
    pub fn fitted(b_max: usize) -> Result<Self> {
        Ok(Self::from_fit(&fit_z_power(b_max, ExponentMode::Fixed(0.5))?))
    }
}

impl Default for GroupingConstants {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

fn lambert_argument(params: &SystemParams, consts: &GroupingConstants) -> Result<f64> {
    if params.tc() < 2 {
        return Err(Error::invalid("T_c", "closed form needs T_c > 1"));
    }
    if !(consts.zeta.is_finite() && consts.zeta > 0.0) {
        return Err(Error::invalid("zeta", format!("must be positive, got {}", consts.zeta)));
    }
    let zeta = consts.zeta * params.beta_l();
    Ok(zeta * params.gamma() * (params.tc() - 1) as f64 * params.k() as f64)
}

fn round_and_clamp(value: f64, k: usize) -> usize {
    let b = (value + 0.5).floor();
    if b.is_nan() || b < 1.0 {
        1
    } else if b >= k as f64 {
        k
    } else {
        b as usize
    }
}

pub fn optimal_group_closed_form(
    params: &SystemParams,
    consts: &GroupingConstants,
) -> Result<GroupSizeResult> {
    let x = lambert_argument(params, consts)?;
    let k = params.k() as f64;
    let b = k / (params.tc() - 1) as f64 * lambert_w0(x)?;
    GroupSizeResult::at(params, round_and_clamp(b, params.k()), Method::ClosedForm)
}

pub fn optimal_group_alt_form(
    params: &SystemParams,
    consts: &GroupingConstants,
) -> Result<GroupSizeResult> {
    let x = lambert_argument(params, consts)?;
    let k = params.k() as f64;
    let zeta = consts.zeta * params.beta_l();
    let b = zeta * params.gamma() * k * k * (-lambert_w0(x)?).exp();
    GroupSizeResult::at(params, round_and_clamp(b, params.k()), Method::ClosedFormAlt)
}

/// Feasible group sizes: those leaving a positive rate prefactor.
pub fn feasible_group_sizes(params: &SystemParams) -> impl Iterator<Item = usize> + '_ {
    (1..=params.k()).filter(move |&b| {
        params
            .with_group_size(b)
            .map(|p| p.prefactor() > 0.0)
            .unwrap_or(false)
    })
}

/// Exhaustive argmax of the bound; ties go to the smaller group size.
pub fn optimal_group_brute_force(params: &SystemParams) -> Result<GroupSizeResult> {
    let mut best: Option<(usize, f64)> = None;
    for b in feasible_group_sizes(params) {
        let value = rate_upper_bound(&params.with_group_size(b)?)?;
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((b, value));
        }
    }
    let (b, _) = best.ok_or(Error::EmptyFeasibleSet {
        k: params.k(),
        tc: params.tc(),
    })?;
    GroupSizeResult::at(params, b, Method::BruteForce)
}

/// Argmax of the simulated rate over `candidates`, sharing one master seed
/// so every candidate sees the same channel draws. Ties go to the smaller
/// group size. `rate_bound` still reports the bound at the winner.
pub fn optimal_group_monte_carlo(
    params: &SystemParams,
    candidates: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<GroupSizeResult> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(usize, f64)> = None;
    for b in sorted {
        let at_b = params.with_group_size(b)?;
        if at_b.prefactor() <= 0.0 {
            continue;
        }
        let rate = mc_achievable_rate(&at_b, trials, master_seed)?.rate;
        if best.is_none_or(|(_, v)| rate > v) {
            best = Some((b, rate));
        }
    }
    let (b, _) = best.ok_or(Error::EmptyFeasibleSet {
        k: params.k(),
        tc: params.tc(),
    })?;
    GroupSizeResult::at(params, b, Method::MonteCarlo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::Scenario;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn at_tc(tc: usize) -> SystemParams {
        Scenario { tc, ..Scenario::default() }.params(1).unwrap()
    }

    #[test]
    fn design_point_tc_500() {
        let p = at_tc(500);
        let closed = optimal_group_closed_form(&p, &GroupingConstants::PUBLISHED).unwrap();
        assert_eq!((closed.b_star, closed.k_prime), (8, 45));
        assert_eq!(closed.method, Method::ClosedForm);
        let alt = optimal_group_alt_form(&p, &GroupingConstants::PUBLISHED).unwrap();
        assert_eq!(alt.b_star, 8);
    }

    /// Solves w e^w = x by bisection on [0, ln(1+x)+1].
    fn lambert_by_bisection(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, x.ln_1p() + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn design_point_tc_900() {
        let p = at_tc(900);
        // zeta gamma (T_c - 1) K with zeta = 2.08 beta_l
        let x = 2.08 * p.beta_l() * 1e8 * 899.0 * 360.0;
        let w = lambert_by_bisection(x);
        let b = (360.0 / 899.0 * w + 0.5).floor() as usize;
        assert_eq!(b, 5);
        let closed = optimal_group_closed_form(&p, &GroupingConstants::PUBLISHED).unwrap();
        assert_eq!(closed.b_star, 5);
    }

    #[test]
    fn tiny_argument_clamps_to_one() {
        let p = Scenario {
            p_dbm: -200.0,
            ..Scenario::default()
        }
        .params(1)
        .unwrap();
        let closed = optimal_group_closed_form(&p, &GroupingConstants::PUBLISHED).unwrap();
        assert_eq!(closed.b_star, 1);
        assert!(optimal_group_closed_form(&at_tc(1), &GroupingConstants::PUBLISHED).is_err());
    }

    #[test]
    fn closed_and_alt_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let s = Scenario {
                k: rng.random_range(16..2048),
                tc: rng.random_range(3000..20_000),
                p_dbm: rng.random_range(-20.0..30.0),
                ..Scenario::default()
            };
            let p = s.params(1).unwrap();
            let a = optimal_group_closed_form(&p, &GroupingConstants::PUBLISHED).unwrap();
            let b = optimal_group_alt_form(&p, &GroupingConstants::PUBLISHED).unwrap();
            assert_eq!(a.b_star, b.b_star, "{s:?}");
        }
    }

    #[test]
    fn closed_form_solves_first_order_condition() {
        // tau - K ln B = B (T_c - 1) with tau = K ln(e gamma c K^2), solved
        // for continuous B by bisection, against K W(c e gamma (T_c-1) K)/(T_c-1).
        for (tc, p_dbm) in [(300usize, 0.0), (500, 0.0), (900, -10.0), (2000, 20.0)] {
            let p = Scenario { tc, p_dbm, ..Scenario::default() }.params(1).unwrap();
            let c = 0.7671 * p.beta_l();
            let k = p.k() as f64;
            let tau = k * (E * p.gamma() * c * k * k).ln();
            let f = |b: f64| tau - k * b.ln() - b * (tc - 1) as f64;
            let (mut lo, mut hi) = (1e-9_f64, k * 10.0);
            for _ in 0..300 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let w = lambert_w0(c * E * p.gamma() * (tc - 1) as f64 * k).unwrap();
            let closed = k / (tc - 1) as f64 * w;
            assert!(((root - closed) / closed).abs() < 1e-9, "T_c={tc}: {root} vs {closed}");
        }
    }

    #[test]
    fn closed_form_nonincreasing_along_growing_tc() {
        let mut last = usize::MAX;
        for tc in (200..=20_000).step_by(50) {
            let b = optimal_group_alt_form(&at_tc(tc), &GroupingConstants::PUBLISHED).unwrap().b_star;
            assert!(b <= last, "T_c={tc}");
            last = b;
        }
    }

    #[test]
    fn brute_force_small_exhaustive() {
        let s = Scenario {
            k: 4,
            tc: 100,
            ..Scenario::default()
        };
        let p = s.params(1).unwrap();
        let values: Vec<f64> = (1..=4)
            .map(|b| rate_upper_bound(&p.with_group_size(b).unwrap()).unwrap())
            .collect();
        let mut want = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[want] {
                want = i;
            }
        }
        let got = optimal_group_brute_force(&p).unwrap();
        assert_eq!(got.b_star, want + 1);
        assert_eq!(got.rate_bound, values[want]);
        assert_eq!(got.k_prime, 4 / got.b_star);
    }

    #[test]
    fn brute_force_close_to_closed_form_at_defaults() {
        let p = at_tc(900);
        let brute = optimal_group_brute_force(&p).unwrap();
        let closed = optimal_group_closed_form(&p, &GroupingConstants::PUBLISHED).unwrap();
        assert!(brute.b_star.abs_diff(closed.b_star) <= 1);
        assert!(closed.rate_bound / brute.rate_bound >= 0.99);
        for b in feasible_group_sizes(&p) {
            let v = rate_upper_bound(&p.with_group_size(b).unwrap()).unwrap();
            assert!(brute.rate_bound >= v);
        }
    }

    #[test]
    fn brute_force_at_vanishing_snr() {
        let p = Scenario {
            p_dbm: -250.0,
            ..Scenario::default()
        }
        .params(1)
        .unwrap();
        let brute = optimal_group_brute_force(&p).unwrap();
        // In the linear regime the bound is ~ prefactor * gamma * E|a|^2 / ln 2
        // and E|a|^2 ~ kappa^2 beta_l K K', so the product peaks at K' ~ T_c/2,
        // beyond K = 360: no grouping wins.
        let score = |b: usize| {
            let q = p.with_group_size(b).unwrap();
            rate_upper_bound(&q).unwrap()
        };
        let best = (1..=360).max_by(|a, b| score(*a).total_cmp(&score(*b))).unwrap();
        assert_eq!(brute.b_star, best);
        assert_eq!(brute.b_star, 1);
    }

    #[test]
    fn brute_force_rejects_empty_feasible_set() {
        let p = Scenario { tc: 2, ..Scenario::default() }.params(1).unwrap();
        assert!(matches!(
            optimal_group_brute_force(&p),
            Err(Error::EmptyFeasibleSet { .. })
        ));
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let xs: Vec<f64> = (1..=40).map(|x| x as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.731 * x.powf(0.427)).collect();
        let fit = fit_power_law(&xs, &ys, ExponentMode::Free).unwrap();
        assert!((fit.kappa - 0.731).abs() < 1e-10);
        assert!((fit.eta - 0.427).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        assert!(fit_power_law(&xs, &ys[..3], ExponentMode::Free).is_err());
        assert!(fit_power_law(&[2.0], &[1.0], ExponentMode::Free).is_err());
    }

    #[test]
    fn z_fit_over_sixty_four() {
        let free = fit_z_power(64, ExponentMode::Free).unwrap();
        assert!(free.eta > 0.0 && free.eta < 1.0);
        assert!((free.eta - 0.5).abs() <= 0.02);
        let sqrt = fit_z_power(64, ExponentMode::Fixed(0.5)).unwrap();
        assert_eq!(sqrt.eta, 0.5);
        assert!((sqrt.kappa - 0.8759).abs() <= 0.01);
        assert!(fit_z_power(7, ExponentMode::Free).is_err());
    }

    #[test]
    fn z_fit_range_sensitivity() {
        // kappa creeps toward sqrt(pi)/2 as the range grows. With eta pinned
        // the log-domain fit reduces to a geometric mean of z / sqrt(B).
        let oracle = |b_max: usize| {
            let n = b_max as f64;
            let s: f64 = (1..=b_max)
                .map(|b| z_ratio(b).unwrap().ln() - 0.5 * (b as f64).ln())
                .sum();
            (s / n).exp()
        };
        let k8 = fit_z_power(8, ExponentMode::Fixed(0.5)).unwrap().kappa;
        let k512 = fit_z_power(512, ExponentMode::Fixed(0.5)).unwrap().kappa;
        assert!((k8 - oracle(8)).abs() < 1e-12);
        assert!((k512 - oracle(512)).abs() < 1e-12);
        let drift = k512 - k8;
        assert!((drift - 0.034_832).abs() < 1e-5, "drift {drift}");
    }

    #[test]
    fn fitted_constants_are_close_to_published() {
        let fitted = GroupingConstants::fitted(64).unwrap();
        assert!((fitted.zeta - 2.08).abs() <= 0.02);
        assert!((0.8759_f64.powi(2) - 0.7671).abs() <= 5e-4);
        assert!((E * 0.7671 - 2.08).abs() <= 0.01);
        let p = at_tc(500);
        let b = optimal_group_closed_form(&p, &fitted).unwrap().b_star;
        assert!(b.abs_diff(8) <= 1);
    }

    #[test]
    fn monte_carlo_search_runs_on_candidates() {
        let p = at_tc(900);
        let r = optimal_group_monte_carlo(&p, &[4, 5, 6, 5], 300, 7).unwrap();
        assert!([4, 5, 6].contains(&r.b_star));
        assert_eq!(r.method, Method::MonteCarlo);
        assert!(optimal_group_monte_carlo(&at_tc(2), &[1], 10, 1).is_err());
    }
}
