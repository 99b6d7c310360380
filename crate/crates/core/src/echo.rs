//! Loschmidt echo time series: determinant formula and the central-spin product.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freefermion::{correlation_matrix, diagonalize, nambu_from_basis, CorrelationMatrix, NambuMatrix};
use crate::linalg::log_abs_det;
use crate::model::{build_quadratic_form_with, Boundary, ChainSpec, CouplingSpec, PeriodicConvention};
use crate::scalar::{Cplx, Real};

/// Power applied to `|det(1 - r + r exp(-iCt))|`.
///
/// Fixed by comparison with exact diagonalization: the modulus itself is the echo.
pub const DETERMINANT_EXPONENT: u32 = 1;

/// Engine that produced an [`EchoSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Determinant,
    CentralSpin,
    #[serde(rename = "ed")]
    EdExact,
    #[serde(rename = "trotter")]
    EdTrotter,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Determinant => "determinant",
            Method::CentralSpin => "central_spin",
            Method::EdExact => "ed",
            Method::EdTrotter => "trotter",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EchoSeries<T: Real> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub method: Method,
    pub chain: ChainSpec<T>,
    pub coupling: CouplingSpec<T>,
}

impl<T: Real> EchoSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest value and the time it occurs at.
    pub fn minimum(&self) -> Option<(T, T)> {
        self.times
            .iter()
            .zip(&self.values)
            .fold(None, |acc: Option<(T, T)>, (&t, &v)| match acc {
                Some((_, best)) if best <= v => acc,
                _ => Some((t, v)),
            })
    }
}

/// `n` uniform points on `[0, t_max]` (endpoints included).
pub fn uniform_times<T: Real>(t_max: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![T::zero(); n];
    }
    let step = t_max / T::from_count(n - 1);
    (0..n).map(|i| step * T::from_count(i)).collect()
}

pub(crate) fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    Ok(())
}

/// Precomputed determinant-formula evaluator for one (bath, coupling) pair.
///
/// With `W = U_e [h_g^T; g_g^T]`, Sylvester's identity reduces the `2N`-dimensional
/// determinant to `det(W^T exp(-iDt) W)`, an `N x N` problem per time point.
#[derive(Debug, Clone)]
pub struct DeterminantEcho<T: Real> {
    w: DMatrix<T>,
    wt: DMatrix<T>,
    d: DVector<T>,
}

impl<T: Real> DeterminantEcho<T> {
    pub fn new(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>, convention: PeriodicConvention) -> Result<Self> {
        let form_g = build_quadratic_form_with(chain, None, convention)?;
        let form_e = build_quadratic_form_with(chain, Some(coupling), convention)?;
        let basis_g = diagonalize(&form_g)?;
        let basis_e = diagonalize(&form_e)?;
        let w = basis_e.nambu_rotation() * basis_g.occupied_frame();
        let n = chain.n;
        let mut d = DVector::zeros(2 * n);
        for k in 0..n {
            d[k] = basis_e.energies[k];
            d[n + k] = -basis_e.energies[k];
        }
        Ok(Self { wt: w.transpose(), w, d })
    }

    /// `ln |det(1 - r + r exp(-iCt))|`.
    pub fn log_abs_det(&self, t: T) -> T {
        let (n2, n) = self.w.shape();
        let mut wc = self.w.clone();
        let mut ws = self.w.clone();
        for i in 0..n2 {
            let phase = self.d[i] * t;
            let (c, s) = (phase.cos(), -phase.sin());
            for j in 0..n {
                wc[(i, j)] *= c;
                ws[(i, j)] *= s;
            }
        }
        let re = &self.wt * wc;
        let im = &self.wt * ws;
        let mut m: Vec<Cplx<T>> = re.iter().zip(im.iter()).map(|(&a, &b)| Cplx::new(a, b)).collect();
        log_abs_det(&mut m, n)
    }

    /// Echo at a single time; any finite `t`, including negative.
    pub fn value(&self, t: T) -> T {
        (self.log_abs_det(t) * T::from_count(DETERMINANT_EXPONENT as usize)).exp()
    }
}

pub fn echo_determinant<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>, times: &[T]) -> Result<EchoSeries<T>> {
    echo_determinant_with(chain, coupling, times, PeriodicConvention::CCyclic)
}

pub fn echo_determinant_with<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    times: &[T],
    convention: PeriodicConvention,
) -> Result<EchoSeries<T>> {
    check_times(times)?;
    let engine = DeterminantEcho::new(chain, coupling, convention)?;
    let values: Vec<T> = times.iter().map(|&t| engine.value(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite determinant".into()));
    }
    Ok(EchoSeries { times: times.to_vec(), values, method: Method::Determinant, chain: *chain, coupling: coupling.clone() })
}

/// The `2N`-dimensional expression `|det(1 - r + r exp(-iCt))|^p` evaluated literally.
pub fn literal_determinant<T: Real>(r: &CorrelationMatrix<T>, c: &NambuMatrix<T>, t: T) -> T {
    let n2 = r.r.nrows();
    let rc = r.r.map(|x| Cplx::new(x, T::zero()));
    let m = DMatrix::<Cplx<T>>::identity(n2, n2) - &rc + &rc * c.propagator(t);
    let mut data = m.as_slice().to_vec();
    (log_abs_det(&mut data, n2) * T::from_count(DETERMINANT_EXPONENT as usize)).exp()
}

/// Builds `r` (unperturbed) and `C` (perturbed) for [`literal_determinant`].
pub fn literal_ingredients<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    convention: PeriodicConvention,
) -> Result<(CorrelationMatrix<T>, NambuMatrix<T>)> {
    let form_g = build_quadratic_form_with(chain, None, convention)?;
    let form_e = build_quadratic_form_with(chain, Some(coupling), convention)?;
    let r = correlation_matrix(&diagonalize(&form_g)?);
    let c = nambu_from_basis(&form_e, &diagonalize(&form_e)?);
    Ok((r, c))
}

/// Momentum-resolved data of a uniformly coupled periodic bath, `k = 1..N/2`.
#[derive(Debug, Clone)]
pub struct CentralSpinModes<T: Real> {
    pub theta0: Vec<T>,
    pub theta_eps: Vec<T>,
    pub alpha: Vec<T>,
    pub energies: Vec<T>,
}

pub fn central_spin_modes<T: Real>(chain: &ChainSpec<T>, epsilon: T) -> Result<CentralSpinModes<T>> {
    chain.validate()?;
    if chain.boundary != Boundary::Periodic {
        return Err(Error::UnsupportedModel("central-spin formula needs a periodic chain".into()));
    }
    if !chain.n.is_multiple_of(2) {
        return Err(Error::UnsupportedModel("central-spin formula pairs k with -k and needs even N".into()));
    }
    if !chain.is_free_fermion() {
        return Err(Error::UnsupportedModel("central-spin formula requires delta = 0".into()));
    }
    let field = |eps: T| chain.lambda + eps / chain.j;
    let angle = |q: T, h: T| (-chain.gamma * q.sin()).atan2(q.cos() - h);
    let two = T::lit(2.0);
    let half = chain.n / 2;
    let mut modes = CentralSpinModes {
        theta0: Vec::with_capacity(half),
        theta_eps: Vec::with_capacity(half),
        alpha: Vec::with_capacity(half),
        energies: Vec::with_capacity(half),
    };
    for k in 1..=half {
        let q = T::two_pi() * T::from_count(k) / T::from_count(chain.n);
        let t0 = angle(q, field(T::zero()));
        let te = angle(q, field(epsilon));
        let h = field(epsilon);
        let x = q.cos() - h;
        let y = chain.gamma * q.sin();
        modes.theta0.push(t0);
        modes.theta_eps.push(te);
        modes.alpha.push((t0 - te) / two);
        modes.energies.push(two * chain.j * (x * x + y * y).sqrt());
    }
    Ok(modes)
}

pub fn echo_central_spin<T: Real>(chain: &ChainSpec<T>, epsilon: T, times: &[T]) -> Result<EchoSeries<T>> {
    check_times(times)?;
    let modes = central_spin_modes(chain, epsilon)?;
    let two = T::lit(2.0);
    let weights: Vec<T> = modes.alpha.iter().map(|a| (two * *a).sin().powi(2)).collect();
    let values = times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .zip(&modes.energies)
                .fold(T::one(), |acc, (w, e)| acc * (T::one() - *w * (*e * t).sin().powi(2)))
        })
        .collect();
    Ok(EchoSeries {
        times: times.to_vec(),
        values,
        method: Method::CentralSpin,
        chain: *chain,
        coupling: CouplingSpec::central(epsilon, chain.n),
    })
}
