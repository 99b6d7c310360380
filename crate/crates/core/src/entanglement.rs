//! Two-qubit concurrence and nearest-neighbor scans of bath ground states.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::echo::echo_determinant;
use crate::ed::{echo_ed, ground_state, dense_hamiltonian, reduced_density_matrix, SectorRule};
use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, CouplingSpec};
use crate::perturbation::fit_alpha;
use crate::scalar::{Cplx, Real};

/// Concurrence of a two-qubit density matrix in the basis `{uu, ud, du, dd}`.
pub fn concurrence<T: Real>(rho: &Matrix4<Cplx<T>>) -> Result<T> {
    let tol = T::lit(1e-8);
    let herm = (rho - rho.adjoint()).iter().fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()));
    if herm > tol {
        return Err(Error::InvalidState(format!("density matrix not Hermitian (defect {herm})")));
    }
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {} + {}i differs from 1", trace.re, trace.im)));
    }
    let eig = SymmetricEigen::new(*rho);
    if let Some(bad) = eig.eigenvalues.iter().find(|e| **e < -tol) {
        return Err(Error::InvalidState(format!("negative eigenvalue {bad}")));
    }
    // The square roots of the eigenvalues of rho rho~ are the singular values of
    // tau = W^T F W with rho = W W^dagger, F = sigma_y x sigma_y. Going through tau keeps
    // rank-deficient inputs accurate, since noise in null eigenvalues enters only at second order.
    let w = Matrix4::from_fn(|r, c| eig.eigenvectors[(r, c)] * Cplx::new(eig.eigenvalues[c].max(T::zero()).sqrt(), T::zero()));
    let flip = Matrix4::<Cplx<T>>::from_fn(|r, c| {
        if r + c == 3 {
            let sign = if r == 0 || r == 3 { -T::one() } else { T::one() };
            Cplx::new(sign, T::zero())
        } else {
            Cplx::new(T::zero(), T::zero())
        }
    });
    let tau = w.transpose() * flip * w;
    let mut lams: Vec<T> = tau.singular_values().iter().copied().collect();
    lams.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let c = lams[0] - lams[1] - lams[2] - lams[3];
    Ok(c.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcurrenceProfile<T> {
    pub pairs: Vec<(usize, usize)>,
    pub values: Vec<T>,
    pub spec: ChainSpec<T>,
}

impl<T: Real> ConcurrenceProfile<T> {
    /// Concurrence of the central bond, least affected by open ends.
    pub fn central(&self) -> T {
        let n = self.spec.n;
        let target = (n / 2, n / 2 + 1);
        self.pairs
            .iter()
            .position(|p| *p == target)
            .map(|i| self.values[i])
            .unwrap_or(self.values[0])
    }
}

/// Nearest-neighbor concurrence of the exact ground state, bond by bond.
pub fn nn_concurrence_scan<T: Real>(chain: &ChainSpec<T>, rule: SectorRule) -> Result<ConcurrenceProfile<T>> {
    let h = dense_hamiltonian(chain, None)?;
    let g = ground_state(&h, rule);
    let mut pairs: Vec<(usize, usize)> = (1..chain.n).map(|j| (j, j + 1)).collect();
    if chain.boundary == Boundary::Periodic {
        pairs.push((chain.n, 1));
    }
    let values = pairs
        .iter()
        .map(|&(i, j)| concurrence(&reduced_density_matrix(&g, i, j)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcurrenceProfile { pairs, values, spec: *chain })
}

/// Swept chain parameter labelling a row of [`alpha_vs_concurrence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainParam {
    Lambda,
    Delta,
    Gamma,
}

impl ChainParam {
    pub fn of<T: Real>(&self, chain: &ChainSpec<T>) -> T {
        match self {
            ChainParam::Lambda => chain.lambda,
            ChainParam::Delta => chain.delta,
            ChainParam::Gamma => chain.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaConcurrenceRow<T> {
    pub param: T,
    #[serde(rename = "C1")]
    pub c1: T,
    pub alpha: T,
}

/// Joins the central-bond concurrence with the fitted short-time rate, chain by chain.
///
/// Rates come from the exact overlap on `times` (any `delta`); concurrences from the
/// exact ground state selected by `rule`.
pub fn alpha_vs_concurrence<T: Real>(
    chains: &[ChainSpec<T>],
    coupling: &CouplingSpec<T>,
    param: ChainParam,
    times: &[T],
    rule: SectorRule,
) -> Result<Vec<AlphaConcurrenceRow<T>>> {
    chains
        .iter()
        .map(|chain| {
            let profile = nn_concurrence_scan(chain, rule)?;
            let series = if chain.n <= crate::ed::DENSE_CAP {
                echo_ed(chain, coupling, times, rule)?
            } else {
                echo_determinant(chain, coupling, times)?
            };
            let alpha = fit_alpha(&series)?.alpha;
            Ok(AlphaConcurrenceRow { param: param.of(chain), c1: profile.central(), alpha })
        })
        .collect()
}
