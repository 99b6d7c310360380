//! Bogoliubov diagonalization, ground-state correlations and the Nambu matrix.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::model::QuadraticForm;
use crate::scalar::{cis, Cplx, Real};

/// Normal modes `eta_k = sum_j g_kj c_j + h_kj c+_j` with energies `E_k`.
///
/// Row `k` of `g` and `h` belongs to mode `k`; column `j` to lattice site `j`.
#[derive(Debug, Clone)]
pub struct BogoliubovBasis<T: Real> {
    pub g: DMatrix<T>,
    pub h: DMatrix<T>,
    /// Ascending, non-negative.
    pub energies: DVector<T>,
}

impl<T: Real> BogoliubovBasis<T> {
    pub fn size(&self) -> usize {
        self.energies.len()
    }

    /// Energy of the quasiparticle vacuum, `-1/2 sum_k E_k` (trace of `A` excluded).
    pub fn ground_energy(&self) -> T {
        -self.energies.sum() * T::lit(0.5)
    }

    /// Largest entry of `g g^T + h h^T - 1` and of `g h^T + h g^T`.
    pub fn constraint_residuals(&self) -> (T, T) {
        let n = self.size();
        let gg = &self.g * self.g.transpose() + &self.h * self.h.transpose() - DMatrix::identity(n, n);
        let gh = &self.g * self.h.transpose() + &self.h * self.g.transpose();
        (gg.amax(), gh.amax())
    }

    /// Stacks `[h^T; g^T]`, the `2N x N` isometry whose range is the occupied Nambu subspace.
    pub fn occupied_frame(&self) -> DMatrix<T> {
        let n = self.size();
        let mut w = DMatrix::zeros(2 * n, n);
        w.view_mut((0, 0), (n, n)).copy_from(&self.h.transpose());
        w.view_mut((n, 0), (n, n)).copy_from(&self.g.transpose());
        w
    }

    /// The orthogonal Nambu rotation `[[g, h], [h, g]]`.
    pub fn nambu_rotation(&self) -> DMatrix<T> {
        let n = self.size();
        let mut u = DMatrix::zeros(2 * n, 2 * n);
        u.view_mut((0, 0), (n, n)).copy_from(&self.g);
        u.view_mut((n, n), (n, n)).copy_from(&self.g);
        u.view_mut((0, n), (n, n)).copy_from(&self.h);
        u.view_mut((n, 0), (n, n)).copy_from(&self.h);
        u
    }
}

/// Solves `phi_k (A - B) = E_k psi_k`, `psi_k (A + B) = E_k phi_k` through the SVD of `A - B`.
///
/// The singular vectors pair `phi` with `psi` directly, so zero modes need no division by `E_k`.
/// Each mode is signed so that the first non-negligible entry of `psi_k` is positive.
pub fn diagonalize<T: Real>(form: &QuadraticForm<T>) -> Result<BogoliubovBasis<T>> {
    let n = form.size();
    let m = form.a() - form.b();
    let svd = SVD::try_new(m, true, true, T::default_epsilon(), 0)
        .ok_or_else(|| Error::NumericalFailure("SVD of A - B did not converge".into()))?;
    let u = svd.u.ok_or_else(|| Error::NumericalFailure("SVD returned no left vectors".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::NumericalFailure("SVD returned no right vectors".into()))?;
    let s = svd.singular_values;
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular values".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap().then(i.cmp(&j)));
    let e_max = s.max();
    let zero_tol = T::lit(1e-12) * e_max.max(T::one());

    let mut g = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    let mut energies = DVector::zeros(n);
    let half = T::lit(0.5);
    let lead_tol = T::lit(1e-10);
    for (k, &src) in order.iter().enumerate() {
        let psi = vt.row(src);
        let phi = u.column(src);
        let lead = psi.iter().copied().find(|x| x.abs() > lead_tol).unwrap_or(T::one());
        let sign = if lead < T::zero() { -T::one() } else { T::one() };
        for j in 0..n {
            let (p, q) = (sign * phi[j], sign * psi[j]);
            g[(k, j)] = (p + q) * half;
            h[(k, j)] = (p - q) * half;
        }
        energies[k] = if s[src] < zero_tol { T::zero() } else { s[src] };
    }
    Ok(BogoliubovBasis { g, h, energies })
}

/// Two-point correlations of the quasiparticle vacuum,
/// `r = [[h^T h, h^T g], [g^T h, g^T g]]`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix<T: Real> {
    pub r: DMatrix<T>,
}

impl<T: Real> CorrelationMatrix<T> {
    /// Fermion density `<c+_j c_j>` at a 1-based site.
    pub fn density(&self, site: usize) -> T {
        self.r[(site - 1, site - 1)]
    }
}

pub fn correlation_matrix<T: Real>(basis_g: &BogoliubovBasis<T>) -> CorrelationMatrix<T> {
    let w = basis_g.occupied_frame();
    CorrelationMatrix { r: &w * w.transpose() }
}

/// `C = [[A, B], [-B, -A]] = U^T diag(D) U` with `D = (E, -E)`.
#[derive(Debug, Clone)]
pub struct NambuMatrix<T: Real> {
    pub c: DMatrix<T>,
    pub u: DMatrix<T>,
    pub d: DVector<T>,
}

impl<T: Real> NambuMatrix<T> {
    /// `exp(-i C t) = U^T diag(exp(-i D t)) U`.
    pub fn propagator(&self, t: T) -> DMatrix<Cplx<T>> {
        let n2 = self.d.len();
        let mut scaled = DMatrix::<Cplx<T>>::zeros(n2, n2);
        for i in 0..n2 {
            let ph = cis(-self.d[i] * t);
            for j in 0..n2 {
                scaled[(i, j)] = ph * self.u[(i, j)];
            }
        }
        self.u.transpose().map(|x| Cplx::new(x, T::zero())) * scaled
    }
}

pub fn nambu<T: Real>(form: &QuadraticForm<T>) -> Result<NambuMatrix<T>> {
    let basis = diagonalize(form)?;
    Ok(nambu_from_basis(form, &basis))
}

pub fn nambu_from_basis<T: Real>(form: &QuadraticForm<T>, basis: &BogoliubovBasis<T>) -> NambuMatrix<T> {
    let n = form.size();
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    c.view_mut((0, 0), (n, n)).copy_from(form.a());
    c.view_mut((0, n), (n, n)).copy_from(form.b());
    c.view_mut((n, 0), (n, n)).copy_from(&(-form.b()));
    c.view_mut((n, n), (n, n)).copy_from(&(-form.a()));
    let mut d = DVector::zeros(2 * n);
    for k in 0..n {
        d[k] = basis.energies[k];
        d[n + k] = -basis.energies[k];
    }
    NambuMatrix { c, u: basis.nambu_rotation(), d }
}
