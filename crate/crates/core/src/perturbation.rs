//! Second-order estimates of the echo and fits of echo series to the standard shapes.

use serde::{Deserialize, Serialize};

use crate::echo::EchoSeries;
use crate::error::{Error, Result};
use crate::freefermion::{diagonalize, BogoliubovBasis};
use crate::model::{build_quadratic_form, ChainSpec, CouplingSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    Perturbative,
    Fit,
}

/// Gaussian short-time rate in `L(t) ~ exp(-alpha t^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate<T> {
    pub alpha: T,
    pub source: AlphaSource,
    #[serde(rename = "window")]
    pub fit_window: Option<(T, T)>,
    /// Relative RMS misfit of the fit; zero for closed-form estimates.
    pub residual: T,
    /// Set when the residual exceeds [`ALPHA_RESIDUAL_FLAG`].
    pub flagged: bool,
}

pub const ALPHA_RESIDUAL_FLAG: f64 = 1e-3;

/// Lower and upper bounds on `1 - L` for the short-time fit.
pub const ALPHA_WINDOW: (f64, f64) = (1e-6, 0.05);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauEstimate<T> {
    pub value: T,
    pub window: (T, T),
    pub std: T,
}

/// Width of the Gaussian envelope in `|cos(eps t)|^{N/2} exp(-S2 t^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit<T> {
    #[serde(rename = "S2")]
    pub s2: T,
    pub epsilon_used: T,
    /// Relative RMS misfit of the Gaussian over the fitted points.
    pub quality: T,
    pub points: usize,
}

/// Closed-form short-time rate for a single link at `site` (1-based):
/// `4 eps^2 sum_{i != j} [(g_i h_j)^2 - g_i g_j h_i h_j]` over the site's column.
pub fn alpha_perturbative<T: Real>(basis_g: &BogoliubovBasis<T>, epsilon: T, site: usize) -> Result<AlphaEstimate<T>> {
    let n = basis_g.size();
    if site < 1 || site > n {
        return Err(Error::InvalidSites(format!("site {site} outside [1, {n}]")));
    }
    let g = basis_g.g.column(site - 1);
    let h = basis_g.h.column(site - 1);
    let gg = g.dot(&g);
    let hh = h.dot(&h);
    let gh = g.dot(&h);
    // the i = j terms cancel, so the double sum collapses to a Gram determinant
    let alpha = T::lit(4.0) * epsilon * epsilon * (gg * hh - gh * gh);
    Ok(AlphaEstimate {
        alpha: alpha.max(T::zero()),
        source: AlphaSource::Perturbative,
        fit_window: None,
        residual: T::zero(),
        flagged: false,
    })
}

/// [`alpha_perturbative`] for a chain and a single-link coupling.
pub fn alpha_perturbative_for<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>) -> Result<AlphaEstimate<T>> {
    let sites = coupling.resolve_sites(chain)?;
    if sites.len() != 1 {
        return Err(Error::UnsupportedEstimate(format!(
            "closed-form rate needs a single link, got m = {}",
            sites.len()
        )));
    }
    let basis = diagonalize(&build_quadratic_form(chain, None)?)?;
    alpha_perturbative(&basis, coupling.epsilon, sites[0])
}

/// Least squares of `-ln L` against `t^2` through the origin.
///
/// Uses the leading stretch of the series, up to the first point with `1 - L > 0.05`,
/// and keeps points with `1 - L >= 1e-6`.
pub fn fit_alpha<T: Real>(series: &EchoSeries<T>) -> Result<AlphaEstimate<T>> {
    if series.is_empty() || series.times[0] != T::zero() || (series.values[0] - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidArgument("series must start at t = 0 with L = 1".into()));
    }
    let (lo, hi) = (T::lit(ALPHA_WINDOW.0), T::lit(ALPHA_WINDOW.1));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut window: Option<(T, T)> = None;
    for (&t, &v) in series.times.iter().zip(&series.values) {
        let drop = T::one() - v;
        if drop > hi {
            break;
        }
        if drop >= lo && t > T::zero() {
            xs.push(t * t);
            ys.push(-v.ln());
            window = Some(match window {
                None => (t, t),
                Some((a, _)) => (a, t),
            });
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points with 1 - L in [{:e}, {}]; need 3",
            xs.len(),
            ALPHA_WINDOW.0,
            ALPHA_WINDOW.1
        )));
    }
    let sxy = xs.iter().zip(&ys).fold(T::zero(), |acc, (x, y)| acc + *x * *y);
    let sxx = xs.iter().fold(T::zero(), |acc, x| acc + *x * *x);
    let alpha = sxy / sxx;
    let res = xs.iter().zip(&ys).fold(T::zero(), |acc, (x, y)| acc + (*y - alpha * *x).powi(2));
    let norm = ys.iter().fold(T::zero(), |acc, y| acc + *y * *y);
    let residual = (res / norm).sqrt();
    Ok(AlphaEstimate {
        alpha,
        source: AlphaSource::Fit,
        fit_window: window,
        residual,
        flagged: residual > T::lit(ALPHA_RESIDUAL_FLAG),
    })
}

/// Regresses `d(alpha/eps^2)/d lambda` against `ln|lambda - lambda_c|`; returns `(slope, intercept)`.
pub fn fit_log_divergence<T: Real>(alphas: &[(T, T)], lambda_c: T, epsilon: T) -> Result<(T, T)> {
    fit_log_divergence_excluding(alphas, lambda_c, epsilon, T::zero())
}

/// As [`fit_log_divergence`], dropping derivative points with `|lambda - lambda_c| <= exclusion`.
///
/// Derivatives are central differences over consecutive, equally spaced samples that lie
/// on the same side of `lambda_c`.
pub fn fit_log_divergence_excluding<T: Real>(
    alphas: &[(T, T)],
    lambda_c: T,
    epsilon: T,
    exclusion: T,
) -> Result<(T, T)> {
    if epsilon == T::zero() {
        return Err(Error::InvalidArgument("epsilon must be non-zero".into()));
    }
    let mut pts: Vec<(T, T)> = alphas.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let eps2 = epsilon * epsilon;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in pts.windows(3) {
        let (l0, l1, l2) = (w[0].0, w[1].0, w[2].0);
        let (left, right) = (l1 - l0, l2 - l1);
        if (left - right).abs() > T::lit(1e-9) * left.abs().max(right.abs()) {
            continue;
        }
        let side = |l: T| (l - lambda_c).signum();
        if l0 == lambda_c || l1 == lambda_c || l2 == lambda_c || side(l0) != side(l2) {
            continue;
        }
        let dist = (l1 - lambda_c).abs();
        if dist <= exclusion {
            continue;
        }
        xs.push(dist.ln());
        ys.push((w[2].1 - w[0].1) / (l2 - l0) / eps2);
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!("{} derivative points, need 4", xs.len())));
    }
    linear_fit(&xs, &ys)
}

/// Ordinary least squares `y = a x + b`; returns `(a, b)`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<(T, T)> {
    let n = T::from_count(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, x| a + *x) / n;
    let my = ys.iter().fold(T::zero(), |a, y| a + *y) / n;
    let sxx = xs.iter().fold(T::zero(), |a, x| a + (*x - mx) * (*x - mx));
    let sxy = xs.iter().zip(ys).fold(T::zero(), |a, (x, y)| a + (*x - mx) * (*y - my));
    if sxx == T::zero() {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Coefficient of determination of `y = a x + b`.
pub fn r_squared<T: Real>(xs: &[T], ys: &[T], slope: T, intercept: T) -> T {
    let n = T::from_count(ys.len());
    let my = ys.iter().fold(T::zero(), |a, y| a + *y) / n;
    let ss_tot = ys.iter().fold(T::zero(), |a, y| a + (*y - my) * (*y - my));
    let ss_res = xs.iter().zip(ys).fold(T::zero(), |a, (x, y)| a + (*y - slope * *x - intercept).powi(2));
    T::one() - ss_res / ss_tot
}

/// `[1 - 2 eps^2 sum_{i != j} (g_i h_j / (E_i + E_j))^2]^4` over the linked site's column.
pub fn plateau_perturbative<T: Real>(basis_g: &BogoliubovBasis<T>, epsilon: T, site: usize) -> Result<PlateauEstimate<T>> {
    let n = basis_g.size();
    if site < 1 || site > n {
        return Err(Error::InvalidSites(format!("site {site} outside [1, {n}]")));
    }
    let g = basis_g.g.column(site - 1);
    let h = basis_g.h.column(site - 1);
    let e = &basis_g.energies;
    let tiny = T::lit(1e-10);
    let mut sum = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let den = e[i] + e[j];
            if den < tiny {
                return Err(Error::DegenerateEstimate(format!(
                    "pair energy E_{i} + E_{j} = {den} below 1e-10; shift lambda slightly"
                )));
            }
            let x = g[i] * h[j] / den;
            sum += x * x;
        }
    }
    let value = (T::one() - T::lit(2.0) * epsilon * epsilon * sum).powi(4);
    Ok(PlateauEstimate { value, window: (T::zero(), T::zero()), std: T::zero() })
}

/// Mean and spread of `L` over `[t_max/2, 0.8 t_rev]`, with `t_rev = N/2`.
pub fn fit_plateau<T: Real>(series: &EchoSeries<T>) -> Result<PlateauEstimate<T>> {
    let t_max = series
        .times
        .last()
        .copied()
        .ok_or_else(|| Error::InsufficientData("empty series".into()))?;
    let lo = t_max * T::lit(0.5);
    let hi = T::lit(0.8) * T::from_count(series.chain.n) * T::lit(0.5);
    let vals: Vec<T> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return Err(Error::InsufficientData(format!("no samples in plateau window [{lo}, {hi}]")));
    }
    let n = T::from_count(vals.len());
    let mean = vals.iter().fold(T::zero(), |a, v| a + *v) / n;
    let var = vals.iter().fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean)) / n;
    Ok(PlateauEstimate { value: mean, window: (lo, hi), std: var.sqrt() })
}

/// Fits `L_min(N) = L0 / (1 + beta ln N)`; returns `(L0, beta)`.
pub fn fit_critical_scaling<T: Real>(minima: &[(usize, T)]) -> Result<(T, T)> {
    if minima.len() < 4 {
        return Err(Error::InsufficientData(format!("{} sizes, need 4", minima.len())));
    }
    let mut pts = minima.to_vec();
    pts.sort_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[1].1 >= w[0].1) {
        log::warn!("minima are not strictly decreasing in N; fitting anyway");
    }
    let xs: Vec<T> = pts.iter().map(|p| T::from_count(p.0).ln()).collect();
    let ys: Vec<T> = pts.iter().map(|p| p.1).collect();
    // 1/L is linear in ln N: start from that fit, then refine the true residuals
    let inv: Vec<T> = ys.iter().map(|y| T::one() / *y).collect();
    let (slope, icpt) = linear_fit(&xs, &inv)?;
    let mut l0 = T::one() / icpt;
    let mut beta = slope * l0;
    for _ in 0..50 {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for (x, y) in xs.iter().zip(&ys) {
            let den = T::one() + beta * *x;
            let model = l0 / den;
            let r = *y - model;
            let d_l0 = T::one() / den;
            let d_beta = -l0 * *x / (den * den);
            a11 += d_l0 * d_l0;
            a12 += d_l0 * d_beta;
            a22 += d_beta * d_beta;
            b1 += d_l0 * r;
            b2 += d_beta * r;
        }
        let det = a11 * a22 - a12 * a12;
        if det == T::zero() {
            break;
        }
        let dl0 = (a22 * b1 - a12 * b2) / det;
        let db = (a11 * b2 - a12 * b1) / det;
        l0 += dl0;
        beta += db;
        if dl0.abs() < T::lit(1e-15) * l0.abs() && db.abs() < T::lit(1e-15) * beta.abs().max(T::lit(1e-12)) {
            break;
        }
    }
    if !l0.is_finite() || !beta.is_finite() {
        return Err(Error::NumericalFailure("critical-scaling fit diverged".into()));
    }
    Ok((l0, beta))
}

/// Divides out `|cos(eps t)|^{exponent_n/2}` and fits `exp(-S2 t^2)` to the residue.
///
/// One sample per oscillation lobe is used: the point with the largest `|cos(eps t)|`,
/// among points where it exceeds 0.5. The Gaussian is fitted through the origin over lobes
/// whose residue stays above `1/e`; when even the first lobe has decayed further, that
/// lobe alone fixes the width.
pub fn fit_envelope<T: Real>(series: &EchoSeries<T>, epsilon: T, exponent_n: usize) -> Result<EnvelopeFit<T>> {
    if epsilon == T::zero() {
        return Err(Error::InvalidArgument("epsilon must be non-zero".into()));
    }
    let half_power = T::from_count(exponent_n) * T::lit(0.5);
    let mut lobes: Vec<(i64, T, T, T)> = Vec::new();
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t <= T::zero() {
            continue;
        }
        let c = (epsilon * t).cos().abs();
        if c <= T::lit(0.5) {
            continue;
        }
        let lobe = (epsilon * t / T::pi()).round().to_i64().unwrap_or(i64::MAX);
        match lobes.last_mut() {
            Some(last) if last.0 == lobe => {
                if c > last.2 {
                    *last = (lobe, t, c, v);
                }
            }
            _ => lobes.push((lobe, t, c, v)),
        }
    }
    let samples: Vec<(T, T)> = lobes
        .iter()
        .filter(|l| l.3 > T::zero())
        .map(|&(_, t, c, v)| (t, v / c.powf(half_power)))
        .collect();
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples with |cos(eps t)| > 0.5".into()));
    }
    let cutoff = (-T::one()).exp();
    let mut used: Vec<(T, T)> = samples.iter().copied().take_while(|s| s.1 >= cutoff).collect();
    if used.is_empty() {
        used.push(samples[0]);
    }
    let xs: Vec<T> = used.iter().map(|s| s.0 * s.0).collect();
    let ys: Vec<T> = used.iter().map(|s| -s.1.min(T::one()).ln()).collect();
    let sxx = xs.iter().fold(T::zero(), |a, x| a + *x * *x);
    let sxy = xs.iter().zip(&ys).fold(T::zero(), |a, (x, y)| a + *x * *y);
    let s2 = (sxy / sxx).max(T::zero());
    let res = xs.iter().zip(&ys).fold(T::zero(), |a, (x, y)| a + (*y - s2 * *x).powi(2));
    let norm = ys.iter().fold(T::zero(), |a, y| a + *y * *y);
    let quality = if norm > T::zero() { (res / norm).sqrt() } else { T::zero() };
    Ok(EnvelopeFit { s2, epsilon_used: epsilon, quality, points: used.len() })
}
