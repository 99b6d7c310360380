//! Composite measurements built from the engines: minima, sweeps and stroboscopic samples.

use crate::echo::{check_times, uniform_times, DeterminantEcho, EchoSeries};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, CouplingSpec, PeriodicConvention};
use crate::perturbation::{fit_alpha, fit_log_divergence_excluding, AlphaEstimate};
use crate::scalar::Real;

/// Default short-time grid for rate fits: 41 points on `[0, 0.1]`.
pub fn short_time_grid<T: Real>() -> Vec<T> {
    uniform_times(T::lit(0.1), 41)
}

/// Fitted Gaussian rate of the determinant echo on `times`.
pub fn fitted_alpha<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>, times: &[T]) -> Result<AlphaEstimate<T>> {
    let series = crate::echo::echo_determinant(chain, coupling, times)?;
    fit_alpha(&series)
}

/// Global minimum of the determinant echo on `[t_lo, t_hi]`.
///
/// Scans with step `coarse`, then narrows the best bracket by golden-section search.
pub fn echo_minimum<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    t_lo: T,
    t_hi: T,
    coarse: T,
) -> Result<(T, T)> {
    if !(t_hi > t_lo) || !(coarse > T::zero()) {
        return Err(Error::InvalidArgument("need t_hi > t_lo and a positive step".into()));
    }
    let engine = DeterminantEcho::new(chain, coupling, PeriodicConvention::CCyclic)?;
    let steps = ((t_hi - t_lo) / coarse).ceil().to_usize().unwrap_or(1).max(1);
    let dt = (t_hi - t_lo) / T::from_count(steps);
    let mut best = (t_lo, engine.value(t_lo));
    for k in 1..=steps {
        let t = t_lo + dt * T::from_count(k);
        let v = engine.value(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = ((best.0 - dt).max(t_lo), (best.0 + dt).min(t_hi));
    let ratio = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = engine.value(x1);
    let mut f2 = engine.value(x2);
    for _ in 0..60 {
        if b - a < T::lit(1e-9) * (T::one() + best.0.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = engine.value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = engine.value(x2);
        }
    }
    let (t, v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    Ok(if v < best.1 { (t, v) } else { best })
}

/// Interior local maximum of a series restricted to `[lo, hi]`, if any.
pub fn local_maximum<T: Real>(series: &EchoSeries<T>, lo: T, hi: T) -> Option<(T, T)> {
    let idx: Vec<usize> = (0..series.len()).filter(|&i| series.times[i] >= lo && series.times[i] <= hi).collect();
    let mut best: Option<(T, T)> = None;
    for w in idx.windows(3) {
        let (p, c, n) = (series.values[w[0]], series.values[w[1]], series.values[w[2]]);
        if c > p && c > n && best.is_none_or(|b| c > b.1) {
            best = Some((series.times[w[1]], c));
        }
    }
    best
}

/// Times `n pi / eps` for `n = 0..=lobes`, where `|cos(eps t)| = 1`.
pub fn stroboscopic_times<T: Real>(epsilon: T, lobes: usize) -> Vec<T> {
    (0..=lobes).map(|n| T::from_count(n) * T::pi() / epsilon.abs()).collect()
}

/// One coupling strength of a log-divergence study.
#[derive(Debug, Clone)]
pub struct DivergenceRun<T> {
    pub epsilon: T,
    pub alphas: Vec<(T, T)>,
    pub c1: T,
    pub c2: T,
}

/// Fitted rates over a `lambda` grid and the log-divergence fit of their derivative.
pub fn log_divergence_run<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    lambdas: &[T],
    lambda_c: T,
    exclusion: T,
    times: &[T],
) -> Result<DivergenceRun<T>> {
    check_times(times)?;
    let mut alphas = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let a = fitted_alpha(&chain.with_lambda(l), coupling, times)?;
        alphas.push((l, a.alpha));
    }
    let (c1, c2) = fit_log_divergence_excluding(&alphas, lambda_c, coupling.epsilon, exclusion)?;
    Ok(DivergenceRun { epsilon: coupling.epsilon, alphas, c1, c2 })
}

/// Uniform grid `lo, lo + step, ..., hi` minus points within `step/2` of `skip`.
pub fn grid_excluding<T: Real>(lo: T, hi: T, step: T, skip: Option<T>) -> Vec<T> {
    let count = ((hi - lo) / step).round().to_usize().unwrap_or(0);
    (0..=count)
        .map(|k| lo + step * T::from_count(k))
        .filter(|l| skip.is_none_or(|s| (*l - s).abs() > step * T::lit(0.5)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::Method;
    use crate::model::Boundary;

    #[test]
    fn grid_skips_center() {
        let g = grid_excluding(0.9f64, 1.1, 5e-3, Some(1.0));
        assert_eq!(g.len(), 40);
        assert!(g.iter().all(|l| (l - 1.0).abs() > 1e-3));
    }

    #[test]
    fn local_max_found() {
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let values = times.iter().map(|t| 0.5 + 0.1 * (-(t - 60.0) * (t - 60.0) / 50.0).exp()).collect();
        let s = EchoSeries {
            times,
            values,
            method: Method::Determinant,
            chain: ChainSpec::ising(10, 0.5, Boundary::Periodic).unwrap(),
            coupling: CouplingSpec::single(0.1),
        };
        assert_eq!(local_maximum(&s, 40.0, 80.0).unwrap().0, 60.0);
        assert!(local_maximum(&s, 0.0, 30.0).is_none());
    }
}
