//! Exact diagonalization of small spin chains.
//!
//! Basis index bit `j - 1` is set when site `j` points up (`Z = +1`).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::echo::{check_times, EchoSeries, Method};
use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, CouplingSpec};
use crate::scalar::{cis, Cplx, Real};

/// Largest chain handled by the dense engine.
pub const DENSE_CAP: usize = 12;

/// Tie-break among degenerate ground states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorRule {
    /// Largest total magnetization inside the ground space.
    MaxSz,
    /// Lowest state with an even number of up spins (the fermionic vacuum sector).
    EvenParity,
    /// First ground state in sector order.
    Lowest,
}

/// Two-site term `xx XX + yy YY + zz ZZ` on 1-based sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoupling<T> {
    pub i: usize,
    pub j: usize,
    pub xx: T,
    pub yy: T,
    pub zz: T,
}

#[derive(Debug, Clone)]
pub struct DenseState<T: Real> {
    pub amplitudes: DVector<Cplx<T>>,
    pub n: usize,
}

impl<T: Real> DenseState<T> {
    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &DenseState<T>) -> Cplx<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `<Z_site>` for a 1-based site.
    pub fn sz(&self, site: usize) -> T {
        let mask = 1usize << (site - 1);
        self.amplitudes.iter().enumerate().fold(T::zero(), |acc, (b, a)| {
            let w = a.norm_sqr();
            if b & mask != 0 { acc + w } else { acc - w }
        })
    }

    /// Product state with the given up/down pattern.
    pub fn product(n: usize, up: &[bool]) -> Self {
        let index = up.iter().enumerate().fold(0usize, |acc, (k, &u)| if u { acc | (1 << k) } else { acc });
        let mut amplitudes = DVector::zeros(1 << n);
        amplitudes[index] = Cplx::new(T::one(), T::zero());
        Self { amplitudes, n }
    }
}

#[derive(Debug, Clone)]
struct Sector<T: Real> {
    states: Vec<usize>,
    energies: DVector<T>,
    vectors: DMatrix<T>,
    up_count_parity: Option<usize>,
    up_count: Option<usize>,
}

/// Real symmetric spin Hamiltonian `sum fields_j Z_j + sum bonds`, applied matrix-free.
#[derive(Debug)]
pub struct DenseHamiltonian<T: Real> {
    n: usize,
    diag: Vec<T>,
    flips: Vec<(usize, usize, T, T)>,
    conserves_sz: bool,
    spectrum: OnceLock<Vec<Sector<T>>>,
}

impl<T: Real> DenseHamiltonian<T> {
    pub fn new(n: usize, fields: &[T], bonds: &[BondCoupling<T>]) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::SizeLimit { n, cap: DENSE_CAP });
        }
        if n == 0 || fields.len() != n {
            return Err(Error::InvalidArgument("one field per site required".into()));
        }
        for b in bonds {
            if b.i == b.j || b.i < 1 || b.j < 1 || b.i > n || b.j > n {
                return Err(Error::InvalidSites(format!("bond ({}, {})", b.i, b.j)));
            }
        }
        let dim = 1usize << n;
        let mut diag = vec![T::zero(); dim];
        for (b, d) in diag.iter_mut().enumerate() {
            let s = |site: usize| if b >> (site - 1) & 1 == 1 { T::one() } else { -T::one() };
            for (k, f) in fields.iter().enumerate() {
                *d += *f * s(k + 1);
            }
            for bond in bonds {
                *d += bond.zz * s(bond.i) * s(bond.j);
            }
        }
        let flips: Vec<_> = bonds
            .iter()
            .filter(|b| b.xx != T::zero() || b.yy != T::zero())
            .map(|b| (b.i - 1, b.j - 1, b.xx, b.yy))
            .collect();
        let conserves_sz = flips.iter().all(|f| f.2 == f.3);
        Ok(Self { n, diag, flips, conserves_sz, spectrum: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn flip_element(b: usize, i: usize, j: usize, xx: T, yy: T) -> T {
        let parallel = (b >> i & 1) == (b >> j & 1);
        if parallel { xx - yy } else { xx + yy }
    }

    /// `H v`.
    pub fn apply(&self, v: &DVector<Cplx<T>>) -> DVector<Cplx<T>> {
        let mut out = DVector::zeros(self.dim());
        for b in 0..self.dim() {
            out[b] += v[b] * self.diag[b];
            for &(i, j, xx, yy) in &self.flips {
                let target = b ^ (1 << i) ^ (1 << j);
                out[target] += v[b] * Self::flip_element(b, i, j, xx, yy);
            }
        }
        out
    }

    pub fn expectation(&self, state: &DenseState<T>) -> T {
        state.amplitudes.dotc(&self.apply(&state.amplitudes)).re
    }

    /// Largest `|H_ab - H_ba|` over a sample of basis pairs.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        let step = (self.dim() / 64).max(1);
        for b in (0..self.dim()).step_by(step) {
            for &(i, j, xx, yy) in &self.flips {
                let target = b ^ (1 << i) ^ (1 << j);
                let fwd = Self::flip_element(b, i, j, xx, yy);
                let back = Self::flip_element(target, i, j, xx, yy);
                worst = worst.max((fwd - back).abs());
            }
        }
        worst
    }

    fn sectors(&self) -> &[Sector<T>] {
        self.spectrum.get_or_init(|| self.diagonalize_sectors())
    }

    fn diagonalize_sectors(&self) -> Vec<Sector<T>> {
        let keys: Vec<usize> = (0..self.dim())
            .map(|b| {
                let c = b.count_ones() as usize;
                if self.conserves_sz { c } else { c & 1 }
            })
            .collect();
        let n_keys = if self.conserves_sz { self.n + 1 } else { 2 };
        let mut position = vec![0usize; self.dim()];
        let mut sectors = Vec::with_capacity(n_keys);
        for key in 0..n_keys {
            let states: Vec<usize> = (0..self.dim()).filter(|&b| keys[b] == key).collect();
            if states.is_empty() {
                continue;
            }
            for (p, &b) in states.iter().enumerate() {
                position[b] = p;
            }
            let m = states.len();
            let mut block = DMatrix::<T>::zeros(m, m);
            for (p, &b) in states.iter().enumerate() {
                block[(p, p)] += self.diag[b];
                for &(i, j, xx, yy) in &self.flips {
                    let v = Self::flip_element(b, i, j, xx, yy);
                    if v != T::zero() {
                        block[(position[b ^ (1 << i) ^ (1 << j)], p)] += v;
                    }
                }
            }
            let eig = SymmetricEigen::new(block);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
            let energies = DVector::from_iterator(m, order.iter().map(|&k| eig.eigenvalues[k]));
            let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
            sectors.push(Sector {
                states,
                energies,
                vectors,
                up_count_parity: Some(key & 1),
                up_count: if self.conserves_sz { Some(key) } else { None },
            });
        }
        sectors
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut all: Vec<T> = self.sectors().iter().flat_map(|s| s.energies.iter().copied()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }

    pub fn ground_energy(&self) -> T {
        self.eigenvalues()[0]
    }

    fn embed(&self, sector: &Sector<T>, coeffs: &DVector<T>) -> DVector<Cplx<T>> {
        let mut v = DVector::zeros(self.dim());
        for (p, &b) in sector.states.iter().enumerate() {
            v[b] = Cplx::new(coeffs[p], T::zero());
        }
        v
    }
}

/// Spin Hamiltonian of the bath, with `-eps Z_j` on the linked sites when given.
pub fn dense_hamiltonian<T: Real>(
    chain: &ChainSpec<T>,
    perturbation: Option<&CouplingSpec<T>>,
) -> Result<DenseHamiltonian<T>> {
    chain.validate()?;
    if chain.n > DENSE_CAP {
        return Err(Error::SizeLimit { n: chain.n, cap: DENSE_CAP });
    }
    let (fields, bonds) = spin_terms(chain, perturbation)?;
    DenseHamiltonian::new(chain.n, &fields, &bonds)
}

fn spin_terms<T: Real>(
    chain: &ChainSpec<T>,
    perturbation: Option<&CouplingSpec<T>>,
) -> Result<(Vec<T>, Vec<BondCoupling<T>>)> {
    let mut fields = vec![-chain.j * chain.lambda; chain.n];
    if let Some(c) = perturbation {
        for s in c.resolve_sites(chain)? {
            fields[s - 1] -= c.epsilon;
        }
    }
    let half = T::lit(0.5);
    let bonds = chain
        .bonds()
        .into_iter()
        .map(|(i, j)| BondCoupling {
            i,
            j,
            xx: -chain.j * half * (T::one() + chain.gamma),
            yy: -chain.j * half * (T::one() - chain.gamma),
            zz: -chain.j * half * chain.delta,
        })
        .collect();
    Ok((fields, bonds))
}

fn fix_phase<T: Real>(v: &mut DVector<Cplx<T>>) {
    let norm = v.norm();
    if norm > T::zero() {
        *v /= Cplx::new(norm, T::zero());
    }
    let tol = T::lit(1e-9);
    let max = v.iter().fold(T::zero(), |m, a| m.max(a.norm_sqr().sqrt()));
    if let Some(lead) = v.iter().copied().find(|a| a.norm_sqr().sqrt() > max - tol) {
        let phase = lead / Cplx::new(lead.norm_sqr().sqrt(), T::zero());
        *v /= phase;
    }
}

pub fn ground_state<T: Real>(h: &DenseHamiltonian<T>, rule: SectorRule) -> DenseState<T> {
    let sectors = h.sectors();
    let mut amplitudes = match rule {
        SectorRule::EvenParity => {
            let (s, _) = sectors
                .iter()
                .enumerate()
                .filter(|(_, s)| s.up_count_parity == Some(0))
                .min_by(|a, b| a.1.energies[0].partial_cmp(&b.1.energies[0]).unwrap())
                .expect("even sector always exists");
            h.embed(&sectors[s], &sectors[s].vectors.column(0).into_owned())
        }
        SectorRule::Lowest | SectorRule::MaxSz => {
            let e0 = h.ground_energy();
            let tol = T::lit(1e-9) * e0.abs().max(T::one());
            let ground: Vec<(usize, usize)> = sectors
                .iter()
                .enumerate()
                .flat_map(|(si, s)| {
                    s.energies.iter().enumerate().filter(|(_, e)| **e < e0 + tol).map(move |(k, _)| (si, k))
                })
                .collect();
            if rule == SectorRule::Lowest || ground.len() == 1 {
                let (si, k) = ground[0];
                h.embed(&sectors[si], &sectors[si].vectors.column(k).into_owned())
            } else {
                max_sz_combination(h, sectors, &ground)
            }
        }
    };
    fix_phase(&mut amplitudes);
    DenseState { amplitudes, n: h.n }
}

fn max_sz_combination<T: Real>(
    h: &DenseHamiltonian<T>,
    sectors: &[Sector<T>],
    ground: &[(usize, usize)],
) -> DVector<Cplx<T>> {
    let vecs: Vec<DVector<Cplx<T>>> = ground
        .iter()
        .map(|&(si, k)| h.embed(&sectors[si], &sectors[si].vectors.column(k).into_owned()))
        .collect();
    if ground.iter().all(|&(si, _)| sectors[si].up_count.is_some()) {
        let best = ground
            .iter()
            .enumerate()
            .max_by_key(|(idx, &(si, _))| (sectors[si].up_count.unwrap(), std::cmp::Reverse(*idx)))
            .map(|(idx, _)| idx)
            .unwrap();
        return vecs[best].clone();
    }
    let total_sz = |b: usize| T::from_count(2 * b.count_ones() as usize) - T::from_count(h.n);
    let g = vecs.len();
    let mut m = DMatrix::<T>::zeros(g, g);
    for a in 0..g {
        for c in 0..g {
            m[(a, c)] = (0..h.dim()).fold(T::zero(), |acc, b| acc + (vecs[a][b].conj() * vecs[c][b]).re * total_sz(b));
        }
    }
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.imax();
    let mut out = DVector::zeros(h.dim());
    for (a, v) in vecs.iter().enumerate() {
        out += v * Cplx::new(eig.eigenvectors[(a, top)], T::zero());
    }
    out
}

/// `exp(-i H t) |state>` through the sector eigendecompositions.
pub fn evolve_exact<T: Real>(state: &DenseState<T>, h: &DenseHamiltonian<T>, t: T) -> DenseState<T> {
    let mut out = DVector::zeros(h.dim());
    for s in h.sectors() {
        let m = s.states.len();
        let re = DVector::from_iterator(m, s.states.iter().map(|&b| state.amplitudes[b].re));
        let im = DVector::from_iterator(m, s.states.iter().map(|&b| state.amplitudes[b].im));
        let cr = s.vectors.tr_mul(&re);
        let ci = s.vectors.tr_mul(&im);
        let mut nr = DVector::zeros(m);
        let mut ni = DVector::zeros(m);
        for k in 0..m {
            let c = Cplx::new(cr[k], ci[k]) * cis(-s.energies[k] * t);
            nr[k] = c.re;
            ni[k] = c.im;
        }
        let vr = &s.vectors * nr;
        let vi = &s.vectors * ni;
        for (p, &b) in s.states.iter().enumerate() {
            out[b] = Cplx::new(vr[p], vi[p]);
        }
    }
    DenseState { amplitudes: out, n: state.n }
}

/// `|<G| exp(-i H_e t) |G>|^2` with `G` the ground state of the unperturbed bath.
pub fn echo_ed<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    times: &[T],
    rule: SectorRule,
) -> Result<EchoSeries<T>> {
    check_times(times)?;
    let hg = dense_hamiltonian(chain, None)?;
    let he = dense_hamiltonian(chain, Some(coupling))?;
    let g = ground_state(&hg, rule);
    let mut weights = Vec::new();
    for s in he.sectors() {
        let m = s.states.len();
        let re = DVector::from_iterator(m, s.states.iter().map(|&b| g.amplitudes[b].re));
        let im = DVector::from_iterator(m, s.states.iter().map(|&b| g.amplitudes[b].im));
        let cr = s.vectors.tr_mul(&re);
        let ci = s.vectors.tr_mul(&im);
        for k in 0..m {
            let w = cr[k] * cr[k] + ci[k] * ci[k];
            if w > T::zero() {
                weights.push((w, s.energies[k]));
            }
        }
    }
    let values = times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .fold(Cplx::new(T::zero(), T::zero()), |acc, &(w, e)| acc + cis(-e * t) * w)
                .norm_sqr()
        })
        .collect();
    Ok(EchoSeries { times: times.to_vec(), values, method: Method::EdExact, chain: *chain, coupling: coupling.clone() })
}

type Gate4<T> = Matrix4<Cplx<T>>;

fn local_exp<T: Real>(h: &Matrix4<T>, dt: T) -> Gate4<T> {
    let eig = SymmetricEigen::new(*h);
    let v = eig.eigenvectors.map(|x| Cplx::new(x, T::zero()));
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|e| cis(-e * dt)));
    v * d * v.transpose()
}

/// Local 4x4 block in the ordering `(bit_p << 1) | bit_q`.
fn bond_block<T: Real>(b: &BondCoupling<T>, fp: T, fq: T) -> Matrix4<T> {
    let mut m = Matrix4::zeros();
    for l in 0..4usize {
        let sp = if l >> 1 == 1 { T::one() } else { -T::one() };
        let sq = if l & 1 == 1 { T::one() } else { -T::one() };
        m[(l, l)] = b.zz * sp * sq + fp * sp + fq * sq;
        let parallel = (l >> 1) == (l & 1);
        m[(l ^ 3, l)] = if parallel { b.xx - b.yy } else { b.xx + b.yy };
    }
    m
}

fn apply_gate4<T: Real>(amps: &mut DVector<Cplx<T>>, p: usize, q: usize, u: &Gate4<T>) {
    let (mp, mq) = (1usize << (p - 1), 1usize << (q - 1));
    for b in 0..amps.len() {
        if b & (mp | mq) != 0 {
            continue;
        }
        let idx = [b, b | mq, b | mp, b | mp | mq];
        let x = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            amps[idx[r]] = (0..4).fold(Cplx::new(T::zero(), T::zero()), |acc, c| acc + u[(r, c)] * x[c]);
        }
    }
}

fn apply_field<T: Real>(amps: &mut DVector<Cplx<T>>, site: usize, f: T, dt: T) {
    let mask = 1usize << (site - 1);
    let (up, down) = (cis(-f * dt), cis(f * dt));
    for (b, a) in amps.iter_mut().enumerate() {
        *a *= if b & mask != 0 { up } else { down };
    }
}

/// Echo with the perturbed branch propagated by [`evolve_trotter`] at step size at most `dt`.
///
/// The unperturbed branch only acquires a phase, so the overlap is taken against `G` itself.
/// Times must be non-decreasing; the state is carried forward between them.
pub fn echo_trotter<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    times: &[T],
    rule: SectorRule,
    dt: T,
) -> Result<EchoSeries<T>> {
    check_times(times)?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("Trotter step must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("Trotter echo needs non-decreasing times".into()));
    }
    let g = ground_state(&dense_hamiltonian(chain, None)?, rule);
    let mut psi = g.clone();
    let mut now = T::zero();
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > T::zero() {
            let steps = (span / dt).ceil().to_usize().unwrap_or(1).max(1);
            psi = evolve_trotter(&psi, chain, Some(coupling), span, steps)?;
            now = t;
        }
        values.push(g.overlap(&psi).norm_sqr());
    }
    Ok(EchoSeries { times: times.to_vec(), values, method: Method::EdTrotter, chain: *chain, coupling: coupling.clone() })
}

/// Second-order split `exp(-iF dt/2) exp(-iG dt) exp(-iF dt/2)` repeated `steps` times.
///
/// `F` holds the fields and bonds `(j, j+1)` with even `j`; `G` the bonds with odd `j`.
pub fn evolve_trotter<T: Real>(
    state: &DenseState<T>,
    chain: &ChainSpec<T>,
    coupling: Option<&CouplingSpec<T>>,
    t: T,
    steps: usize,
) -> Result<DenseState<T>> {
    if steps < 1 {
        return Err(Error::InvalidArgument("at least one Trotter step required".into()));
    }
    chain.validate()?;
    if chain.n > DENSE_CAP {
        return Err(Error::SizeLimit { n: chain.n, cap: DENSE_CAP });
    }
    if chain.boundary == Boundary::Periodic && chain.n % 2 == 1 {
        return Err(Error::UnsupportedModel("even/odd bond split needs even N on a ring".into()));
    }
    let (fields, bonds) = spin_terms(chain, coupling)?;
    let dt = t / T::from_count(steps);
    let half = dt * T::lit(0.5);
    let mut covered = vec![false; chain.n + 1];
    let mut f_gates = Vec::new();
    let mut g_gates = Vec::new();
    for b in &bonds {
        if b.i % 2 == 0 {
            covered[b.i] = true;
            covered[b.j] = true;
            let block = bond_block(b, fields[b.i - 1], fields[b.j - 1]);
            f_gates.push((b.i, b.j, local_exp(&block, half)));
        } else {
            let block = bond_block(b, T::zero(), T::zero());
            g_gates.push((b.i, b.j, local_exp(&block, dt)));
        }
    }
    let lone: Vec<usize> = (1..=chain.n).filter(|&s| !covered[s]).collect();
    let mut amps = state.amplitudes.clone();
    let half_f = |amps: &mut DVector<Cplx<T>>| {
        for &s in &lone {
            apply_field(amps, s, fields[s - 1], half);
        }
        for (p, q, u) in &f_gates {
            apply_gate4(amps, *p, *q, u);
        }
    };
    for _ in 0..steps {
        half_f(&mut amps);
        for (p, q, u) in &g_gates {
            apply_gate4(&mut amps, *p, *q, u);
        }
        half_f(&mut amps);
    }
    Ok(DenseState { amplitudes: amps, n: state.n })
}

/// Two-site reduced density matrix in the basis `{uu, ud, du, dd}` with site `i` leading.
pub fn reduced_density_matrix<T: Real>(state: &DenseState<T>, i: usize, j: usize) -> Result<Matrix4<Cplx<T>>> {
    if i == j || i < 1 || j < 1 || i > state.n || j > state.n {
        return Err(Error::InvalidSites(format!("need two distinct sites in [1, {}], got ({i}, {j})", state.n)));
    }
    let (mi, mj) = (1usize << (i - 1), 1usize << (j - 1));
    let local = |b: usize| 2 * usize::from(b & mi == 0) + usize::from(b & mj == 0);
    let mut rho = Matrix4::zeros();
    for b in 0..state.amplitudes.len() {
        if b & (mi | mj) != 0 {
            continue;
        }
        let idx = [b | mi | mj, b | mi, b | mj, b];
        for &r in &idx {
            for &c in &idx {
                rho[(local(r), local(c))] += state.amplitudes[r] * state.amplitudes[c].conj();
            }
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_ising_spectrum() {
        let chain = ChainSpec::<f64>::ising(2, 0.0, Boundary::Open).unwrap();
        let e = dense_hamiltonian(&chain, None).unwrap().eigenvalues();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in e.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn single_spin_field() {
        let h = DenseHamiltonian::new(1, &[-0.7f64], &[]).unwrap();
        let e = h.eigenvalues();
        assert!((e[0] + 0.7).abs() < 1e-15 && (e[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn size_cap() {
        let chain = ChainSpec::<f64>::ising(13, 0.5, Boundary::Open).unwrap();
        assert!(matches!(dense_hamiltonian(&chain, None), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn heisenberg_pair_singlet() {
        // antiferromagnetic Heisenberg pair: J > 0 with gamma = 0 and delta = -1 gives XX + YY + ZZ up to a sign
        let bonds = [BondCoupling { i: 1, j: 2, xx: 1.0f64, yy: 1.0, zz: 1.0 }];
        let h = DenseHamiltonian::new(2, &[0.0, 0.0], &bonds).unwrap();
        let g = ground_state(&h, SectorRule::Lowest);
        let s = 0.5f64.sqrt();
        // index 1 = site 1 up, index 2 = site 2 up
        assert!((g.amplitudes[1].re.abs() - s).abs() < 1e-12);
        assert!((g.amplitudes[1] + g.amplitudes[2]).norm() < 1e-12);
    }

    #[test]
    fn rdm_ghz() {
        let mut amplitudes = DVector::zeros(8);
        let s = 0.5f64.sqrt();
        amplitudes[0] = Cplx::new(s, 0.0);
        amplitudes[7] = Cplx::new(s, 0.0);
        let st = DenseState { amplitudes, n: 3 };
        let rho = reduced_density_matrix(&st, 1, 3).unwrap();
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, 0.0, 0.0, 0.5));
        assert!((rho.map(|c| c.re) - expect).amax() < 1e-14);
        assert!(reduced_density_matrix(&st, 2, 2).is_err());
    }

    #[test]
    fn rdm_basis_order() {
        // site 1 up, site 2 down
        let st = DenseState::<f64>::product(2, &[true, false]);
        let rho = reduced_density_matrix(&st, 1, 2).unwrap();
        assert!((rho[(1, 1)].re - 1.0).abs() < 1e-15);
        let rho = reduced_density_matrix(&st, 2, 1).unwrap();
        assert!((rho[(2, 2)].re - 1.0).abs() < 1e-15);
    }
}
