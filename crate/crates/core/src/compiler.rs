//! Stroboscopic gate schedules for a qubit at site 0 coupled to the first spin of an open chain.
//!
//! A step is built from global rotations, global nearest-neighbor interactions on all
//! bonds `(0,1), ..., (N-1,N)`, and Pauli flips of the qubit that cancel the `(0,1)` bond
//! where it must not act. Three levels are available: `Step` (interaction blocks),
//! `Gate` (x and y interactions rewritten through `zz` by basis changes) and `Pulse`
//! (laser pulses plus state-selective lattice displacements).
//!
//! Sequences are stored in time order: `gates[0]` acts first.
//!
//! Conventions. Local basis `(up, down)` with `up` the `+1` eigenvector of `sigma^z`.
//! `Laser { area: a, phi }` is `exp(-i a (cos(phi) sigma^x - sin(phi) sigma^y))`.
//! `Displacement { phi }` multiplies every `|down_j up_{j+1}>` component by `exp(-i phi)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, CouplingSpec};
use crate::perturbation::linear_fit;
use crate::scalar::{cis, Cplx, Real};

/// Largest bath size accepted by [`contract`] (qubit excluded).
pub const CONTRACT_CAP: usize = 10;
/// Version tag written into text and JSON schedules.
pub const SCHEDULE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    Step,
    Gate,
    Pulse,
}

/// One operation of a schedule. Angles follow `U(theta) = exp(i theta P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate<T> {
    Uz { site: usize, theta: T },
    Uxx { bond: (usize, usize), theta: T },
    Uyy { bond: (usize, usize), theta: T },
    Uzz { bond: (usize, usize), theta: T },
    /// `Uz` on every bath site `1..=N`.
    GlobalUz { theta: T },
    /// Interaction on every bond `(0,1), ..., (N-1,N)`.
    GlobalUxx { theta: T },
    GlobalUyy { theta: T },
    GlobalUzz { theta: T },
    PauliX { site: usize },
    PauliZ { site: usize },
    /// `(1 - i sigma^axis)/sqrt(2)` on each listed site, or its adjoint.
    V { axis: Axis, sites: Vec<usize>, adjoint: bool },
    /// Resonant pulse; `area` is duration times Rabi frequency.
    Laser { sites: Vec<usize>, area: T, phi: T },
    /// State-selective shift acting on all bonds at once.
    Displacement { phi: T },
}

impl<T: Real> Gate<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Uz { .. } => "uz",
            Gate::Uxx { .. } => "uxx",
            Gate::Uyy { .. } => "uyy",
            Gate::Uzz { .. } => "uzz",
            Gate::GlobalUz { .. } => "global_uz",
            Gate::GlobalUxx { .. } => "global_uxx",
            Gate::GlobalUyy { .. } => "global_uyy",
            Gate::GlobalUzz { .. } => "global_uzz",
            Gate::PauliX { .. } => "x",
            Gate::PauliZ { .. } => "z",
            Gate::V { axis: Axis::X, adjoint: false, .. } => "vx",
            Gate::V { axis: Axis::X, adjoint: true, .. } => "vx_dag",
            Gate::V { axis: Axis::Y, adjoint: false, .. } => "vy",
            Gate::V { axis: Axis::Y, adjoint: true, .. } => "vy_dag",
            Gate::Laser { .. } => "laser",
            Gate::Displacement { .. } => "displacement",
        }
    }

    /// Rewrites x and y interactions through `zz` and basis changes.
    pub fn to_gate_level(&self, n_bath: usize) -> Vec<Gate<T>> {
        let all: Vec<usize> = (0..=n_bath).collect();
        // V^y maps sigma^z to sigma^x under conjugation, V^x maps it to sigma^y
        let conj = |axis: Axis, sites: Vec<usize>, core: Gate<T>| {
            vec![
                Gate::V { axis, sites: sites.clone(), adjoint: true },
                core,
                Gate::V { axis, sites, adjoint: false },
            ]
        };
        match *self {
            Gate::GlobalUxx { theta } => conj(Axis::Y, all, Gate::GlobalUzz { theta }),
            Gate::GlobalUyy { theta } => conj(Axis::X, all, Gate::GlobalUzz { theta }),
            Gate::Uxx { bond, theta } => conj(Axis::Y, vec![bond.0, bond.1], Gate::Uzz { bond, theta }),
            Gate::Uyy { bond, theta } => conj(Axis::X, vec![bond.0, bond.1], Gate::Uzz { bond, theta }),
            _ => vec![self.clone()],
        }
    }

    /// Lowers to laser pulses and displacements. Global phases are not tracked.
    pub fn to_pulse_level(&self, n_bath: usize) -> Result<Vec<Gate<T>>> {
        let half = T::frac_pi_2();
        let rz = |sites: Vec<usize>, theta: T| {
            vec![
                Gate::Laser { sites: sites.clone(), area: half, phi: T::zero() },
                Gate::Laser { sites, area: half, phi: T::pi() + theta },
            ]
        };
        let all: Vec<usize> = (0..=n_bath).collect();
        let mut out = Vec::new();
        for g in self.to_gate_level(n_bath) {
            match g {
                Gate::Uz { site, theta } => out.extend(rz(vec![site], theta)),
                Gate::GlobalUz { theta } => out.extend(rz((1..=n_bath).collect(), theta)),
                Gate::PauliX { site } => out.push(Gate::Laser { sites: vec![site], area: half, phi: T::zero() }),
                Gate::PauliZ { site } => out.extend(rz(vec![site], -half)),
                Gate::V { axis, sites, adjoint } => {
                    let phi = match (axis, adjoint) {
                        (Axis::X, false) => T::zero(),
                        (Axis::X, true) => T::pi(),
                        (Axis::Y, false) => -half,
                        (Axis::Y, true) => half,
                    };
                    out.push(Gate::Laser { sites, area: T::frac_pi_4(), phi });
                }
                Gate::GlobalUzz { theta } => {
                    let flip = Gate::Laser { sites: all.clone(), area: half, phi: T::zero() };
                    let shift = Gate::Displacement { phi: theta + theta };
                    out.extend([flip.clone(), shift.clone(), flip, shift]);
                }
                Gate::Uzz { bond, .. } => {
                    return Err(Error::UnsupportedLayout(format!(
                        "displacements act on every bond; bond ({}, {}) cannot be addressed alone",
                        bond.0, bond.1
                    )))
                }
                other => out.push(other),
            }
        }
        Ok(out)
    }
}

/// Physical problem a schedule approximates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct Target<T> {
    pub chain: ChainSpec<T>,
    pub coupling: CouplingSpec<T>,
    pub t: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct GateSequence<T> {
    pub schema_version: u32,
    pub level: Level,
    pub gates: Vec<Gate<T>>,
    pub n_steps: usize,
    pub tau: T,
    pub target: Target<T>,
}

impl<T: Real> GateSequence<T> {
    pub fn gates_per_step(&self) -> usize {
        self.gates.len() / self.n_steps.max(1)
    }

    /// Line-oriented schedule, one gate per line:
    /// `STEP k | GATE kind | SITES list | ANGLE theta [| PHASE phi]`.
    ///
    /// `SITES *` marks gates acting on every bond; `ANGLE` is omitted for Paulis and
    /// basis changes and holds the pulse area for lasers.
    pub fn to_text(&self) -> String {
        let per = self.gates_per_step().max(1);
        let mut out = format!(
            "# spinbath schedule v{} level={:?} n_steps={} tau={} N={}\n",
            self.schema_version,
            self.level,
            self.n_steps,
            self.tau,
            self.target.chain.n
        )
        .to_lowercase();
        let list = |s: &[usize]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let bath = list(&(1..=self.target.chain.n).collect::<Vec<_>>());
        for (k, g) in self.gates.iter().enumerate() {
            let (sites, angle, phase) = match g {
                Gate::Uz { site, theta } => (site.to_string(), Some(*theta), None),
                Gate::Uxx { bond, theta } | Gate::Uyy { bond, theta } | Gate::Uzz { bond, theta } => {
                    (format!("{},{}", bond.0, bond.1), Some(*theta), None)
                }
                Gate::GlobalUz { theta } => (bath.clone(), Some(*theta), None),
                Gate::GlobalUxx { theta } | Gate::GlobalUyy { theta } | Gate::GlobalUzz { theta } => {
                    ("*".to_string(), Some(*theta), None)
                }
                Gate::PauliX { site } | Gate::PauliZ { site } => (site.to_string(), None, None),
                Gate::V { sites, .. } => (list(sites), None, None),
                Gate::Laser { sites, area, phi } => (list(sites), Some(*area), Some(*phi)),
                Gate::Displacement { phi } => ("*".to_string(), Some(*phi), None),
            };
            out.push_str(&format!("STEP {} | GATE {} | SITES {}", k / per + 1, g.name(), sites));
            if let Some(a) = angle {
                out.push_str(&format!(" | ANGLE {a}"));
            }
            if let Some(p) = phase {
                out.push_str(&format!(" | PHASE {p}"));
            }
            out.push('\n');
        }
        out
    }
}

fn check_layout<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>) -> Result<()> {
    chain.validate()?;
    if chain.boundary != Boundary::Open {
        return Err(Error::UnsupportedLayout("schedules target open chains only".into()));
    }
    let sites = coupling.resolve_sites(chain)?;
    if sites != [1] {
        return Err(Error::UnsupportedLayout(format!(
            "the qubit must couple to site 1 alone, got {sites:?}"
        )));
    }
    Ok(())
}

/// Gates of one step at `Step` level, zero-angle blocks removed.
pub fn step_gates<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>, tau: T) -> Vec<Gate<T>> {
    let (j, eps, quarter) = (chain.j, coupling.epsilon, T::lit(0.25));
    let field = j * chain.lambda * tau * T::lit(0.5);
    let theta_yy = j * (chain.gamma - T::one()) * tau * quarter;
    let theta_xx = -j * (chain.gamma + T::one()) * tau * quarter;
    let theta_zz = (eps - j * chain.delta * T::lit(0.5)) * tau * T::lit(0.5);
    let mut out = Vec::new();
    if field != T::zero() {
        out.push(Gate::GlobalUz { theta: field });
    }
    if coupling.omega_e != T::zero() {
        out.push(Gate::Uz { site: 0, theta: coupling.omega_e * tau });
    }
    if eps != T::zero() {
        out.push(Gate::GlobalUzz { theta: -eps * tau });
    }
    let mut block = |core: Gate<T>, flip: Gate<T>| out.extend([core.clone(), flip.clone(), core, flip]);
    if theta_yy != T::zero() {
        block(Gate::GlobalUyy { theta: theta_yy }, Gate::PauliZ { site: 0 });
    }
    if theta_xx != T::zero() {
        block(Gate::GlobalUxx { theta: theta_xx }, Gate::PauliZ { site: 0 });
    }
    if theta_zz != T::zero() {
        block(Gate::GlobalUzz { theta: theta_zz }, Gate::PauliX { site: 0 });
    }
    out
}

/// Schedule of `n_steps` identical steps of length `t / n_steps`.
pub fn compile<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    t: T,
    n_steps: usize,
    level: Level,
) -> Result<GateSequence<T>> {
    check_layout(chain, coupling)?;
    if n_steps < 1 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let tau = t / T::from_count(n_steps);
    let step = step_gates(chain, coupling, tau);
    let step: Vec<Gate<T>> = match level {
        Level::Step => step,
        Level::Gate => step.iter().flat_map(|g| g.to_gate_level(chain.n)).collect(),
        Level::Pulse => step
            .iter()
            .map(|g| g.to_pulse_level(chain.n))
            .collect::<Result<Vec<_>>>()?
            .concat(),
    };
    let gates = (0..n_steps).flat_map(|_| step.iter().cloned()).collect();
    Ok(GateSequence {
        schema_version: SCHEDULE_VERSION,
        level,
        gates,
        n_steps,
        tau,
        target: Target { chain: *chain, coupling: coupling.clone(), t },
    })
}

fn zero<T: Real>() -> Cplx<T> {
    Cplx::new(T::zero(), T::zero())
}

fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Cplx::new(re, im)
}

/// 2x2 matrix in the `(up, down)` basis, row-major.
type Local<T> = [[Cplx<T>; 2]; 2];

fn laser<T: Real>(area: T, phi: T) -> Local<T> {
    let (s, co) = (area.sin(), area.cos());
    // -i s (cos phi X - sin phi Y): off-diagonals -i s e^{i phi} and -i s e^{-i phi}
    let upper = cis(phi) * c(T::zero(), -s);
    let lower = cis(-phi) * c(T::zero(), -s);
    [[c(co, T::zero()), upper], [lower, c(co, T::zero())]]
}

fn local_of<T: Real>(g: &Gate<T>) -> Option<Local<T>> {
    let (o, l) = (T::zero(), T::one());
    let r = T::lit(0.5).sqrt();
    Some(match g {
        Gate::PauliX { .. } => [[c(o, o), c(l, o)], [c(l, o), c(o, o)]],
        Gate::PauliZ { .. } => [[c(l, o), c(o, o)], [c(o, o), c(-l, o)]],
        Gate::V { axis, adjoint, .. } => {
            let s = if *adjoint { r } else { -r };
            match axis {
                Axis::X => [[c(r, o), c(o, s)], [c(o, s), c(r, o)]],
                // (1 -/+ i Y)/sqrt2 with Y = [[0,-i],[i,0]]
                Axis::Y => [[c(r, o), c(s, o)], [c(-s, o), c(r, o)]],
            }
        }
        Gate::Laser { area, phi, .. } => laser(*area, *phi),
        _ => return None,
    })
}

fn up(idx: usize, site: usize) -> bool {
    idx >> site & 1 == 1
}

fn sz<T: Real>(idx: usize, site: usize) -> T {
    if up(idx, site) {
        T::one()
    } else {
        -T::one()
    }
}

struct Register<T: Real> {
    n_sites: usize,
    u: DMatrix<Cplx<T>>,
}

impl<T: Real> Register<T> {
    fn local(&mut self, site: usize, m: &Local<T>) {
        let bit = 1usize << site;
        let dim = self.u.nrows();
        for col in 0..dim {
            for i in (0..dim).filter(|i| i & bit != 0) {
                let j = i ^ bit;
                let (a, b) = (self.u[(i, col)], self.u[(j, col)]);
                self.u[(i, col)] = m[0][0] * a + m[0][1] * b;
                self.u[(j, col)] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn diagonal(&mut self, phase: impl Fn(usize) -> T) {
        for i in 0..self.u.nrows() {
            let p = cis(phase(i));
            self.u.row_mut(i).iter_mut().for_each(|z| *z *= p);
        }
    }

    /// `exp(i theta sigma^a_j sigma^a_k)` for `a` in {x, y}.
    fn flip(&mut self, (j, k): (usize, usize), theta: T, yy: bool) {
        let mask = (1usize << j) | (1usize << k);
        let (co, si) = (theta.cos(), theta.sin());
        let dim = self.u.nrows();
        for i in 0..dim {
            let partner = i ^ mask;
            if partner < i {
                continue;
            }
            let aligned = up(i, j) == up(i, k);
            let sign = if yy && aligned { -T::one() } else { T::one() };
            let off = c(T::zero(), si * sign);
            for col in 0..dim {
                let (a, b) = (self.u[(i, col)], self.u[(partner, col)]);
                self.u[(i, col)] = a * co + off * b;
                self.u[(partner, col)] = b * co + off * a;
            }
        }
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        (0..self.n_sites - 1).map(|j| (j, j + 1)).collect()
    }

    fn apply(&mut self, g: &Gate<T>) {
        if let Some(m) = local_of(g) {
            let sites = match g {
                Gate::PauliX { site } | Gate::PauliZ { site } => vec![*site],
                Gate::V { sites, .. } | Gate::Laser { sites, .. } => sites.clone(),
                _ => unreachable!(),
            };
            sites.iter().for_each(|&s| self.local(s, &m));
            return;
        }
        let bonds = self.bonds();
        match *g {
            Gate::Uz { site, theta } => self.diagonal(|i| theta * sz(i, site)),
            Gate::GlobalUz { theta } => {
                let n = self.n_sites;
                self.diagonal(|i| (1..n).fold(T::zero(), |a, s| a + theta * sz(i, s)))
            }
            Gate::Uzz { bond, theta } => self.diagonal(|i| theta * sz(i, bond.0) * sz(i, bond.1)),
            Gate::GlobalUzz { theta } => self.diagonal(|i| {
                bonds.iter().fold(T::zero(), |a, &(j, k)| a + theta * sz(i, j) * sz(i, k))
            }),
            Gate::Displacement { phi } => self.diagonal(|i| {
                let hits = bonds.iter().filter(|&&(j, k)| !up(i, j) && up(i, k)).count();
                -phi * T::from_count(hits)
            }),
            Gate::Uxx { bond, theta } => self.flip(bond, theta, false),
            Gate::Uyy { bond, theta } => self.flip(bond, theta, true),
            Gate::GlobalUxx { theta } => bonds.iter().for_each(|&b| self.flip(b, theta, false)),
            Gate::GlobalUyy { theta } => bonds.iter().for_each(|&b| self.flip(b, theta, true)),
            _ => unreachable!(),
        }
    }
}

fn check_gate<T: Real>(g: &Gate<T>, n_bath: usize) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidSites(msg));
    let site_ok = |s: usize| s <= n_bath;
    let finite = |x: T| x.is_finite();
    match g {
        Gate::Uz { site, theta } if !site_ok(*site) || !finite(*theta) => bad(format!("uz on site {site}")),
        Gate::Uxx { bond, theta } | Gate::Uyy { bond, theta } | Gate::Uzz { bond, theta }
            if bond.1 != bond.0 + 1 || !site_ok(bond.1) || !finite(*theta) =>
        {
            bad(format!("bond ({}, {}) is not a valid nearest-neighbor pair", bond.0, bond.1))
        }
        Gate::PauliX { site } | Gate::PauliZ { site } if !site_ok(*site) => bad(format!("site {site}")),
        Gate::V { sites, .. } | Gate::Laser { sites, .. } if sites.iter().any(|s| !site_ok(*s)) => {
            bad(format!("sites {sites:?} exceed {n_bath}"))
        }
        _ => Ok(()),
    }
}

/// Ordered product of `gates` on the qubit plus `n_bath` spins.
pub fn contract_gates<T: Real>(gates: &[Gate<T>], n_bath: usize) -> Result<DMatrix<Cplx<T>>> {
    if n_bath > CONTRACT_CAP {
        return Err(Error::SizeLimit { n: n_bath, cap: CONTRACT_CAP });
    }
    gates.iter().try_for_each(|g| check_gate(g, n_bath))?;
    let dim = 1usize << (n_bath + 1);
    let mut reg = Register { n_sites: n_bath + 1, u: DMatrix::identity(dim, dim) };
    gates.iter().for_each(|g| reg.apply(g));
    Ok(reg.u)
}

/// Unitary of a compiled sequence on `2^(N+1)` dimensions.
pub fn contract<T: Real>(sequence: &GateSequence<T>) -> Result<DMatrix<Cplx<T>>> {
    contract_gates(&sequence.gates, sequence.target.chain.n)
}

/// Hamiltonian generated by one step in the small-`tau` limit, qubit at site 0.
pub fn step_hamiltonian<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>) -> Result<DMatrix<Cplx<T>>> {
    check_layout(chain, coupling)?;
    let n = chain.n;
    if n > CONTRACT_CAP {
        return Err(Error::SizeLimit { n, cap: CONTRACT_CAP });
    }
    let half = T::lit(0.5);
    let cx = chain.j * (T::one() + chain.gamma) * half;
    let cy = chain.j * (T::one() - chain.gamma) * half;
    let cz = chain.j * chain.delta * half;
    let field = chain.j * chain.lambda * half;
    let dim = 1usize << (n + 1);
    let mut h = DMatrix::from_element(dim, dim, zero::<T>());
    for i in 0..dim {
        let mut d = coupling.epsilon * sz::<T>(i, 0) * sz(i, 1) - coupling.omega_e * sz(i, 0);
        for s in 1..=n {
            d -= field * sz(i, s);
        }
        for b in 1..n {
            d += cz * sz(i, b) * sz(i, b + 1);
            let partner = i ^ (0b11 << b);
            let aligned = up(i, b) == up(i, b + 1);
            let yy = if aligned { -cy } else { cy };
            h[(partner, i)] += c(cx + yy, T::zero());
        }
        h[(i, i)] += c(d, T::zero());
    }
    Ok(h)
}

/// `exp(-i H t)` of [`step_hamiltonian`].
pub fn exact_propagator<T: Real>(chain: &ChainSpec<T>, coupling: &CouplingSpec<T>, t: T) -> Result<DMatrix<Cplx<T>>> {
    let h = step_hamiltonian(chain, coupling)?;
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| cis(-e * t)));
    Ok(v * phases * v.adjoint())
}

/// `min over phi of ||a - e^{i phi} b||` in operator norm, with `phi` the phase of `tr(b^dagger a)`.
pub fn phase_aligned_distance<T: Real>(a: &DMatrix<Cplx<T>>, b: &DMatrix<Cplx<T>>) -> T {
    let tr = (b.adjoint() * a).trace();
    let modulus = tr.norm_sqr().sqrt();
    let phase = if modulus > T::zero() { tr / modulus } else { c(T::one(), T::zero()) };
    let diff = a - b * phase;
    diff.singular_values().iter().fold(T::zero(), |m, s| m.max(*s))
}

/// Largest entry of `|u^dagger u - 1|`.
pub fn unitarity_defect<T: Real>(u: &DMatrix<Cplx<T>>) -> T {
    let p = u.adjoint() * u;
    let mut worst = T::zero();
    for ((r, col), z) in p.iter().enumerate().map(|(k, z)| ((k % p.nrows(), k / p.nrows()), z)) {
        let target = if r == col { T::one() } else { T::zero() };
        worst = worst.max((*z - c(target, T::zero())).norm_sqr().sqrt());
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub level: Level,
    pub n_steps: Vec<usize>,
    pub distances: Vec<T>,
    /// Negative log-log slope of distance against step count.
    pub order: Option<T>,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn monotone(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Phase-aligned distance between compiled schedules and the exact propagator.
pub fn verify<T: Real>(
    chain: &ChainSpec<T>,
    coupling: &CouplingSpec<T>,
    t: T,
    n_list: &[usize],
    level: Level,
) -> Result<ConvergenceReport<T>> {
    let exact = exact_propagator(chain, coupling, t)?;
    let mut distances = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let u = contract(&compile(chain, coupling, t, n, level)?)?;
        distances.push(phase_aligned_distance(&u, &exact));
    }
    let usable: Vec<(T, T)> = n_list
        .iter()
        .zip(&distances)
        .filter(|(_, d)| **d > T::zero())
        .map(|(n, d)| (T::from_count(*n).ln(), d.ln()))
        .collect();
    let order = if usable.len() >= 2 {
        let (xs, ys): (Vec<T>, Vec<T>) = usable.into_iter().unzip();
        linear_fit(&xs, &ys).ok().map(|(slope, _)| -slope)
    } else {
        None
    };
    Ok(ConvergenceReport { level, n_steps: n_list.to_vec(), distances, order })
}
