//! Gate identities and convergence of compiled schedules against dense propagators.

use nalgebra::DMatrix;
use spinbath::compiler::{
    compile, contract, contract_gates, exact_propagator, phase_aligned_distance, unitarity_defect, verify, Axis, Gate,
    Level,
};
use spinbath::model::Boundary;
use spinbath::{Chain, Coupling, Cplx};

type Op = DMatrix<Cplx<f64>>;

fn max_abs(a: &Op, b: &Op) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Single-site operator on site 0 of a one-qubit register, `(up, down)` basis.
fn one_site(m: [[Cplx<f64>; 2]; 2]) -> Op {
    // register index 1 is up, 0 is down
    DMatrix::from_fn(2, 2, |r, c| m[1 - r][1 - c])
}

fn cx(re: f64, im: f64) -> Cplx<f64> {
    Cplx::new(re, im)
}

fn sigma_x() -> Op {
    one_site([[cx(0.0, 0.0), cx(1.0, 0.0)], [cx(1.0, 0.0), cx(0.0, 0.0)]])
}

fn sigma_z() -> Op {
    one_site([[cx(1.0, 0.0), cx(0.0, 0.0)], [cx(0.0, 0.0), cx(-1.0, 0.0)]])
}

fn exp_i_theta_pp(theta: f64, p: &Op) -> Op {
    let id = Op::identity(p.nrows(), p.ncols());
    id * cx(theta.cos(), 0.0) + p * cx(0.0, theta.sin())
}

#[test]
fn uz_minus_half_pi_is_i_sigma_z() {
    let u = contract_gates(&[Gate::Uz { site: 0, theta: -std::f64::consts::FRAC_PI_2 }], 0).unwrap();
    // exp(-i pi/2 sigma^z) = -i sigma^z, equal to i sigma^z up to a global sign
    assert!(max_abs(&u, &(sigma_z() * cx(0.0, -1.0))) < 1e-12);
    assert!(phase_aligned_distance(&u, &(sigma_z() * cx(0.0, 1.0))) < 1e-12);
}

#[test]
fn half_pi_pulse_is_i_sigma_x() {
    let u = contract_gates(&[Gate::Laser { sites: vec![0], area: std::f64::consts::FRAC_PI_2, phi: 0.0 }], 0).unwrap();
    assert!(max_abs(&u, &(sigma_x() * cx(0.0, -1.0))) < 1e-12);
    assert!(phase_aligned_distance(&u, &(sigma_x() * cx(0.0, 1.0))) < 1e-12);
}

#[test]
fn pulse_compositions() {
    for theta in [-1.3, -std::f64::consts::FRAC_PI_2, 0.0, 0.4, 2.9] {
        let direct = contract_gates(&[Gate::Uz { site: 0, theta }], 0).unwrap();
        let pulses = Gate::Uz { site: 0, theta }.to_pulse_level(0).unwrap();
        assert_eq!(pulses.len(), 2);
        assert!(max_abs(&contract_gates(&pulses, 0).unwrap(), &direct) < 1e-12, "theta={theta}");
    }
    for axis in [Axis::X, Axis::Y] {
        for adjoint in [false, true] {
            let v = Gate::V { axis, sites: vec![0], adjoint };
            let direct = contract_gates(std::slice::from_ref(&v), 0).unwrap();
            let pulses = contract_gates(&v.to_pulse_level(0).unwrap(), 0).unwrap();
            assert!(max_abs(&pulses, &direct) < 1e-12, "{axis:?} {adjoint}");
        }
    }
}

#[test]
fn displacement_builds_zz() {
    // e^{i theta} [G(2 theta) X X]^2 on one bond
    for theta in [0.3f64, -0.8, 1.7] {
        let direct = contract_gates(&[Gate::GlobalUzz { theta }], 1).unwrap();
        let pulses = contract_gates(&Gate::GlobalUzz { theta }.to_pulse_level(1).unwrap(), 1).unwrap();
        // two pi/2 pulses per site give (-i)^4 = 1 on two sites
        let with_phase = pulses * cx(theta.cos(), theta.sin());
        assert!(max_abs(&with_phase, &direct) < 1e-12, "theta={theta}");
    }
}

#[test]
fn gate_level_xx_matches_direct_exponential() {
    let xx = sigma_x().kronecker(&sigma_x());
    for theta in [0.21, -1.1] {
        let direct = exp_i_theta_pp(theta, &xx);
        let u = contract_gates(&Gate::Uxx { bond: (0, 1), theta }.to_gate_level(1), 1).unwrap();
        assert!(max_abs(&u, &direct) < 1e-12);
        let bare = contract_gates(&[Gate::Uxx { bond: (0, 1), theta }], 1).unwrap();
        assert!(max_abs(&bare, &direct) < 1e-12);
    }
}

#[test]
fn gate_level_yy_matches_direct_exponential() {
    let y = one_site([[cx(0.0, 0.0), cx(0.0, -1.0)], [cx(0.0, 1.0), cx(0.0, 0.0)]]);
    let yy = y.kronecker(&y);
    let theta = 0.63;
    let direct = exp_i_theta_pp(theta, &yy);
    let u = contract_gates(&Gate::Uyy { bond: (0, 1), theta }.to_gate_level(1), 1).unwrap();
    assert!(max_abs(&u, &direct) < 1e-12);
}

#[test]
fn cancellation_squares() {
    let theta = 0.77;
    let id = Op::identity(4, 4);
    for (core, flip) in [
        (Gate::Uxx { bond: (0, 1), theta }, Gate::PauliZ { site: 0 }),
        (Gate::Uyy { bond: (0, 1), theta }, Gate::PauliZ { site: 0 }),
        (Gate::Uzz { bond: (0, 1), theta }, Gate::PauliX { site: 0 }),
    ] {
        let u = contract_gates(&[core.clone(), flip.clone(), core, flip], 1).unwrap();
        assert!(max_abs(&u, &id) < 1e-12);
    }
}

#[test]
fn commuting_case_is_exact() {
    let chain = Chain::new(2, 1.0, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
    let coupling = Coupling::single(0.0);
    let report = verify(&chain, &coupling, 1.3, &[1], Level::Step).unwrap();
    assert!(report.distances[0] < 1e-12, "{:?}", report.distances);
}

#[test]
fn levels_agree_and_stay_unitary() {
    let chain = Chain::new(3, 1.0, 0.6, 0.4, 0.7, Boundary::Open).unwrap();
    let coupling = Coupling::single(0.3).with_omega_e(0.9);
    let step = contract(&compile(&chain, &coupling, 0.8, 5, Level::Step).unwrap()).unwrap();
    for level in [Level::Gate, Level::Pulse] {
        let u = contract(&compile(&chain, &coupling, 0.8, 5, level).unwrap()).unwrap();
        assert!(unitarity_defect(&u) < 1e-10);
        assert!(phase_aligned_distance(&u, &step) < 1e-10, "{level:?}");
    }
    assert!(unitarity_defect(&step) < 1e-10);
}

#[test]
fn full_model_converges_at_first_order() {
    let chain = Chain::ising(4, 0.5, Boundary::Open).unwrap();
    let coupling = Coupling::single(0.25).with_omega_e(1.0);
    let report = verify(&chain, &coupling, 1.0, &[10, 20, 40, 80], Level::Step).unwrap();
    assert!(report.monotone(), "{:?}", report.distances);
    let order = report.order.unwrap();
    assert!((0.8..=1.2).contains(&order), "order {order}");
    let exact = exact_propagator(&chain, &coupling, 1.0).unwrap();
    assert!(unitarity_defect(&exact) < 1e-10);
}
