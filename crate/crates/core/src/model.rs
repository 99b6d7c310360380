//! Bath and coupling parameters, link-site layouts and the quadratic fermionic form.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Boundary condition of the bath chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// How the fermionic boundary bond of a periodic chain is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicConvention {
    /// Plain corner couplings, ignoring the parity-dependent string.
    #[default]
    CCyclic,
    /// Antiperiodic fermion boundary, exact in the even-parity sector.
    ExactParity,
}

/// XYZ chain in a transverse field:
/// `H = -J/2 sum_j [(1+g) XX + (1-g) YY + d ZZ + 2 l Z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec<T> {
    /// Number of bath spins.
    #[serde(rename = "N")]
    pub n: usize,
    /// Nearest-neighbor exchange; sets the energy unit.
    #[serde(rename = "J")]
    pub j: T,
    /// xy anisotropy in [0, 1].
    pub gamma: T,
    /// z anisotropy.
    pub delta: T,
    /// Transverse field.
    pub lambda: T,
    pub boundary: Boundary,
}

impl<T: Real> ChainSpec<T> {
    pub fn new(n: usize, j: T, gamma: T, delta: T, lambda: T, boundary: Boundary) -> Result<Self> {
        let spec = Self { n, j, gamma, delta, lambda, boundary };
        spec.validate()?;
        Ok(spec)
    }

    /// Transverse-field Ising chain with `J = 1`.
    pub fn ising(n: usize, lambda: T, boundary: Boundary) -> Result<Self> {
        Self::new(n, T::one(), T::one(), T::zero(), lambda, boundary)
    }

    /// Anisotropic XY chain with `J = 1`.
    pub fn xy(n: usize, gamma: T, lambda: T, boundary: Boundary) -> Result<Self> {
        Self::new(n, T::one(), gamma, T::zero(), lambda, boundary)
    }

    /// XXZ chain (`gamma = 0`) with `J = 1`.
    pub fn xxz(n: usize, delta: T, lambda: T, boundary: Boundary) -> Result<Self> {
        Self::new(n, T::one(), T::zero(), delta, lambda, boundary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidChain(format!("N must be at least 2, got {}", self.n)));
        }
        if !(self.j > T::zero()) {
            return Err(Error::InvalidChain(format!("J must be positive, got {}", self.j)));
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return Err(Error::InvalidChain(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !self.delta.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidChain("delta and lambda must be finite".into()));
        }
        Ok(())
    }

    /// True when the chain maps onto free fermions.
    pub fn is_free_fermion(&self) -> bool {
        self.delta == T::zero()
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Nearest-neighbor bonds `(j, j+1)` as 1-based pairs, including `(N, 1)` when periodic.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (1..self.n).map(|j| (j, j + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((self.n, 1));
        }
        bonds
    }
}

/// Placement of the linked bath sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    /// Equally spaced links.
    #[serde(rename = "A")]
    StarA,
    /// Contiguous block of links.
    #[serde(rename = "B")]
    ContiguousB,
    /// Caller-supplied site list.
    #[serde(rename = "explicit")]
    Explicit,
}

/// Qubit-bath dephasing coupling `-eps sum_{linked} Z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct CouplingSpec<T> {
    pub epsilon: T,
    /// Number of linked bath spins.
    pub m: usize,
    pub geometry: Geometry,
    /// 1-based linked sites; used only with [`Geometry::Explicit`].
    #[serde(default)]
    pub sites: Vec<usize>,
    /// Qubit splitting, used only by the gate compiler.
    #[serde(default = "zero")]
    pub omega_e: T,
}

fn zero<T: num_traits::Zero>() -> T {
    T::zero()
}

impl<T: Real> CouplingSpec<T> {
    /// Single link at site 1.
    pub fn single(epsilon: T) -> Self {
        Self::explicit(epsilon, vec![1])
    }

    pub fn star(epsilon: T, m: usize) -> Self {
        Self { epsilon, m, geometry: Geometry::StarA, sites: Vec::new(), omega_e: T::zero() }
    }

    pub fn contiguous(epsilon: T, m: usize) -> Self {
        Self { epsilon, m, geometry: Geometry::ContiguousB, sites: Vec::new(), omega_e: T::zero() }
    }

    pub fn explicit(epsilon: T, sites: Vec<usize>) -> Self {
        Self { epsilon, m: sites.len(), geometry: Geometry::Explicit, sites, omega_e: T::zero() }
    }

    /// Every bath site linked (central-spin layout).
    pub fn central(epsilon: T, n: usize) -> Self {
        Self::explicit(epsilon, (1..=n).collect())
    }

    pub fn with_omega_e(mut self, omega_e: T) -> Self {
        self.omega_e = omega_e;
        self
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Resolves the linked sites for `chain`, validating the layout.
    pub fn resolve_sites(&self, chain: &ChainSpec<T>) -> Result<Vec<usize>> {
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidCoupling("epsilon must be finite".into()));
        }
        match self.geometry {
            Geometry::Explicit => {
                if self.sites.len() != self.m {
                    return Err(Error::InvalidCoupling(format!(
                        "m = {} but {} sites given",
                        self.m,
                        self.sites.len()
                    )));
                }
                if self.m == 0 {
                    return Err(Error::InvalidCoupling("at least one linked site required".into()));
                }
                if self.sites.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidCoupling("sites must be strictly increasing".into()));
                }
                if self.sites[0] < 1 || *self.sites.last().unwrap() > chain.n {
                    return Err(Error::InvalidCoupling(format!("sites must lie in [1, {}]", chain.n)));
                }
                Ok(self.sites.clone())
            }
            g => link_sites(chain.n, self.m, g, chain.boundary),
        }
    }
}

/// Linked sites (1-based, sorted) for the derived geometries.
pub fn link_sites(n: usize, m: usize, geometry: Geometry, boundary: Boundary) -> Result<Vec<usize>> {
    if m < 1 || m > n {
        return Err(Error::InvalidCoupling(format!("link number m = {m} must lie in [1, {n}]")));
    }
    match geometry {
        Geometry::StarA => {
            let mut sites = Vec::with_capacity(m);
            let mut taken = vec![false; n + 1];
            for k in 0..m {
                // round-half-up of k*N/m in exact integer arithmetic
                let mut j = 1 + (2 * k * n + m) / (2 * m);
                while j <= n && taken[j] {
                    j += 1;
                }
                if j > n {
                    return Err(Error::InvalidCoupling("no free site left for star layout".into()));
                }
                taken[j] = true;
                sites.push(j);
            }
            sites.sort_unstable();
            Ok(sites)
        }
        Geometry::ContiguousB => {
            let start = match boundary {
                Boundary::Open => 1,
                Boundary::Periodic => n.div_ceil(2) - (m - 1) / 2,
            };
            Ok((start..start + m).collect())
        }
        Geometry::Explicit => Err(Error::InvalidCoupling(
            "explicit geometry carries its own site list".into(),
        )),
    }
}

/// Quadratic fermionic form `sum_jk [c+_j A_jk c_k + (c+_j B_jk c+_k + h.c.)/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
}

impl<T: Real> QuadraticForm<T> {
    /// Validates symmetry of `a` and antisymmetry of `b` to a relative tolerance of 1e-12.
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || b.ncols() != n || n == 0 {
            return Err(Error::InvalidForm("A and B must be square and of equal size".into()));
        }
        let scale = a.amax().max(b.amax()).max(T::one());
        let tol = T::lit(1e-12) * scale;
        for i in 0..n {
            for j in 0..n {
                if !(a[(i, j)] - a[(j, i)]).abs().le(&tol) {
                    return Err(Error::InvalidForm(format!("A not symmetric at ({i}, {j})")));
                }
                if !(b[(i, j)] + b[(j, i)]).abs().le(&tol) {
                    return Err(Error::InvalidForm(format!("B not antisymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }
}

/// Builds the form of the bath, optionally with the qubit field on the linked sites.
///
/// Periodic chains use [`PeriodicConvention::CCyclic`].
pub fn build_quadratic_form<T: Real>(
    chain: &ChainSpec<T>,
    perturbation: Option<&CouplingSpec<T>>,
) -> Result<QuadraticForm<T>> {
    build_quadratic_form_with(chain, perturbation, PeriodicConvention::CCyclic)
}

pub fn build_quadratic_form_with<T: Real>(
    chain: &ChainSpec<T>,
    perturbation: Option<&CouplingSpec<T>>,
    convention: PeriodicConvention,
) -> Result<QuadraticForm<T>> {
    chain.validate()?;
    if !chain.is_free_fermion() {
        return Err(Error::UnsupportedModel(format!(
            "delta = {} is not free-fermion solvable; use the exact-diagonalization method",
            chain.delta
        )));
    }
    let n = chain.n;
    let j = chain.j;
    let two = T::lit(2.0);
    let mut field = vec![T::zero(); n];
    if let Some(c) = perturbation {
        for s in c.resolve_sites(chain)? {
            field[s - 1] = c.epsilon;
        }
    }
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (i, eps) in field.iter().enumerate() {
        a[(i, i)] = -two * (j * chain.lambda + *eps);
    }
    let hop = -j;
    let pair = -chain.gamma * j;
    for (p, q) in chain.bonds() {
        let (p, q) = (p - 1, q - 1);
        let sign = if q < p && convention == PeriodicConvention::ExactParity {
            -T::one()
        } else {
            T::one()
        };
        a[(p, q)] += sign * hop;
        a[(q, p)] += sign * hop;
        b[(p, q)] += sign * pair;
        b[(q, p)] -= sign * pair;
    }
    Ok(QuadraticForm { a, b })
}
