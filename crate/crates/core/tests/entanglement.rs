//! Nearest-neighbor concurrence of bath ground states and its relation to the decay rate.

use spinbath::ed::SectorRule;
use spinbath::entanglement::{alpha_vs_concurrence, nn_concurrence_scan, AlphaConcurrenceRow, ChainParam};
use spinbath::model::Boundary;
use spinbath::studies::short_time_grid;
use spinbath::{Chain, Coupling};

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Ising rows for an open N=10 chain, qubit on the central site.
fn ising_rows(lambdas: &[f64]) -> Vec<AlphaConcurrenceRow<f64>> {
    let chains: Vec<Chain> = lambdas.iter().map(|&l| Chain::ising(10, l, Boundary::Open).unwrap()).collect();
    let coupling = Coupling::explicit(0.1, vec![5]);
    alpha_vs_concurrence(&chains, &coupling, ChainParam::Lambda, &short_time_grid(), SectorRule::EvenParity).unwrap()
}

#[test]
fn ferromagnetic_xxz_is_unentangled() {
    let chain = Chain::xxz(10, 1.5, 0.0, Boundary::Open).unwrap();
    let p = nn_concurrence_scan(&chain, SectorRule::MaxSz).unwrap();
    assert!(p.values.iter().all(|c| *c < 1e-12));
}

#[test]
fn deep_antiferromagnet_loses_concurrence() {
    let c = |delta: f64| {
        nn_concurrence_scan(&Chain::xxz(10, delta, 0.0, Boundary::Open).unwrap(), SectorRule::MaxSz)
            .unwrap()
            .central()
    };
    assert!(c(-8.0) < c(-1.0));
}

#[test]
fn ring_values_are_translation_invariant() {
    let chain = Chain::xxz(10, -0.6, 0.0, Boundary::Periodic).unwrap();
    let p = nn_concurrence_scan(&chain, SectorRule::MaxSz).unwrap();
    assert_eq!(p.pairs.len(), 10);
    let spread = p.values.iter().fold(0.0f64, |m, c| m.max((c - p.values[0]).abs()));
    assert!(spread < 1e-8);
    assert!(p.values.iter().all(|c| (0.0..=1.0).contains(c)));
}

#[test]
fn ising_concurrence_has_interior_maximum() {
    let lambdas: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    let values: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            nn_concurrence_scan(&Chain::ising(10, l, Boundary::Open).unwrap(), SectorRule::EvenParity)
                .unwrap()
                .central()
        })
        .collect();
    let peak = values.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0;
    assert!(peak > 0 && peak < values.len() - 1, "peak at lambda = {}", lambdas[peak]);
}

#[test]
fn correlated_branch_above_the_maximum() {
    let lambdas: Vec<f64> = (0..=8).map(|k| 1.2 + 0.1 * k as f64).collect();
    let rows = ising_rows(&lambdas);
    let alpha: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let c1: Vec<f64> = rows.iter().map(|r| r.c1).collect();
    assert!(decreasing(&alpha), "{alpha:?}");
    assert!(decreasing(&c1), "{c1:?}");
}

#[test]
fn anticorrelated_branch_below_the_maximum() {
    let lambdas: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let rows = ising_rows(&lambdas);
    let alpha: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let c1: Vec<f64> = rows.iter().map(|r| r.c1).collect();
    assert!(decreasing(&alpha), "{alpha:?}");
    assert!(increasing(&c1), "{c1:?}");
}

#[test]
fn xxz_rate_is_flat_in_the_critical_region() {
    let chains: Vec<Chain> =
        [-0.9, -0.5, 0.0, 0.5, 0.9].iter().map(|&d| Chain::xxz(10, d, 0.0, Boundary::Open).unwrap()).collect();
    let rows = alpha_vs_concurrence(&chains, &Coupling::single(0.1), ChainParam::Delta, &short_time_grid(), SectorRule::MaxSz)
        .unwrap();
    let (lo, hi) = rows.iter().fold((f64::MAX, f64::MIN), |(lo, hi), r| (lo.min(r.alpha), hi.max(r.alpha)));
    assert!((hi - lo) / hi < 0.15);
    assert_eq!(rows[0].param, -0.9);
}
