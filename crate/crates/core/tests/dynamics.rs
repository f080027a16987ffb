//! Evolution, pairing and Fock-space behaviour of evolved modes.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use dirac_fock::cli::run_scenario;
use dirac_fock::config::{ScenarioConfig, BUNDLED};
use dirac_fock::dirac_dynamics::{dirac_residual, evolve, EvolveOptions, PlaneWave};
use dirac_fock::fock::{antisymmetrize, basis_pairing, product_inner_with, FockSpace, Ladder, OccupationState};
use dirac_fock::geometry::{build_background, Background, MetricChart};
use dirac_fock::pairing::{gram_matrix, identity_residual, orthonormalize, Slice};
use dirac_fock::{canonical_gamma_set, Grid, PhysicalConstants, SpinorField};

fn flat(n: usize, length: f64) -> (Grid, Background) {
    let grid = Grid::periodic_box([n, 1, 1], [length, 1.0, 1.0], 0.0).unwrap();
    let bg = build_background(&MetricChart::minkowski(grid.clone()).unwrap(), &canonical_gamma_set()).unwrap();
    (grid, bg)
}

fn gaussian(x: f64, center: f64, width: f64, length: f64) -> f64 {
    let mut d = x - center;
    d -= length * (d / length).round();
    (-d * d / (2.0 * width * width)).exp()
}

#[test]
fn massless_chiral_packet_moves_at_light_speed() {
    let (length, t_end) = (20.0, 5.0);
    let (grid, bg) = flat(1024, length);
    let k = PhysicalConstants::natural(0.0).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let profile = |x: [f64; 4], shift: f64| {
        let g = gaussian(x[1] - shift, 5.0, 1.0, length);
        [C64::new(r * g, 0.0), C64::new(r * g, 0.0), C64::default(), C64::default()]
    };
    let psi0 = SpinorField::from_fn(grid, |x| profile(x, 0.0));
    let opts = EvolveOptions {
        dt: 0.02,
        steps: 250,
        snapshot_every: 50,
        ..EvolveOptions::default()
    };
    let traj = evolve(&psi0, &bg, &k, &opts).unwrap();
    let last = traj.time_slice(5);
    let exact = SpinorField::from_fn(last.grid().clone(), |x| profile(x, t_end));
    assert!(last.max_abs_diff(&exact) < 1e-6, "shape error {}", last.max_abs_diff(&exact));

    let centroid = |f: &SpinorField| {
        let (mut m, mut mx) = (0.0, 0.0);
        for (idx, s) in f.data().iter().enumerate() {
            let d: f64 = s.iter().map(|z| z.norm_sqr()).sum();
            m += d;
            mx += d * f.grid().point(idx)[1];
        }
        mx / m
    };
    let moved = centroid(&last) - centroid(&psi0);
    assert!((moved - t_end).abs() < 1e-6, "centroid moved {moved}");
}

#[test]
fn antisymmetrized_function_solves_dirac_in_each_slot() {
    let k = PhysicalConstants::natural(1.0).unwrap();
    let (space, bg) = flat(512, 4.0 * PI);
    let waves = [
        PlaneWave::new([0.5, 0.0, 0.0], &k, 0, true).unwrap(),
        PlaneWave::new([-1.0, 0.0, 0.0], &k, 1, true).unwrap(),
    ];
    let pair = antisymmetrize(&[0, 1]).unwrap().product;
    let grid = space.with_time_axis(9, 0.0, 0.0025).unwrap();
    let other = [0.3, 1.7, 0.0, 0.0];
    for slot in 0..2 {
        for b_other in 0..4 {
            let field = SpinorField::from_fn(grid.clone(), |x| {
                std::array::from_fn(|b| {
                    let (points, comps) = if slot == 0 { ([x, other], [b, b_other]) } else { ([other, x], [b_other, b]) };
                    pair.evaluate(&points, &comps, |m, p| waves[m].value(*p))
                })
            });
            let r = dirac_residual(&field, &bg, &k).unwrap().max_abs();
            assert!(r < 1e-8, "slot {slot}, component {b_other}: residual {r:e}");
        }
    }
}

fn packet(grid: &Grid, center: f64, k1: f64, spinor: [C64; 4]) -> SpinorField {
    let length = grid.n[1] as f64 * grid.step[1];
    SpinorField::from_fn(grid.clone(), |x| {
        let e = C64::from_polar(gaussian(x[1], center, 1.0, length), k1 * x[1]);
        spinor.map(|s| s * e)
    })
}

fn raw_modes(grid: &Grid) -> Vec<SpinorField> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::default();
    vec![
        packet(grid, 10.0, 0.0, [one, zero, one, zero]),
        packet(grid, 9.0, 0.5, [zero, one, zero, one]),
        packet(grid, 11.0, -0.5, [one, C64::new(0.0, 0.5), zero, one]),
        packet(grid, 10.5, 0.25, [zero, one, one, C64::new(0.2, -0.1)]),
    ]
}

#[test]
fn determinant_equals_product_pairing() {
    let k = PhysicalConstants::natural(1.0).unwrap();
    let (grid, bg) = flat(256, 20.0);
    let gram = gram_matrix(&raw_modes(&grid), &Slice::at_time(0.0), &bg, &k).unwrap();
    assert!(identity_residual(&gram) > 0.1, "modes should not be orthonormal");
    for a in 1u64..16 {
        for b in 1u64..16 {
            let (s, t) = (OccupationState::from_bits(a), OccupationState::from_bits(b));
            if s.count() != t.count() {
                continue;
            }
            let det = basis_pairing(&gram, s, t);
            let prod = product_inner_with(
                &gram,
                &antisymmetrize(&s.indices()).unwrap().product,
                &antisymmetrize(&t.indices()).unwrap().product,
            );
            assert!((det - prod).norm() <= 1e-12 * det.norm().max(1.0), "{s} {t}: {det} vs {prod}");
        }
    }
}

#[test]
fn ladder_operators_are_constant_in_time() {
    let k = PhysicalConstants::natural(1.0).unwrap();
    let (grid, bg) = flat(512, 20.0);
    let opts = EvolveOptions {
        dt: 0.02,
        steps: 200,
        snapshot_every: 10,
        ..EvolveOptions::default()
    };
    let evolved: Vec<SpinorField> = raw_modes(&grid).iter().map(|m| evolve(m, &bg, &k, &opts).unwrap()).collect();
    let basis = orthonormalize(evolved, &Slice::at_time(0.0), &bg, &k).unwrap();
    let g_end = basis.gram_on(&Slice::at_time(4.0), &bg, &k).unwrap();
    assert!(identity_residual(&g_end) < 1e-8);
    let space = FockSpace::new(4).unwrap();
    for i in 0..4 {
        for op in [Ladder::Create, Ladder::Annihilate] {
            let m0 = space.operator_matrix(op, i, basis.gram()).unwrap();
            let m1 = space.operator_matrix(op, i, &g_end).unwrap();
            let diff = m0.iter().flatten().zip(m1.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-8, "{op:?} {i}: {diff:e}");
        }
    }
}

#[test]
fn bundled_scenarios_meet_their_checks() {
    for s in BUNDLED {
        let cfg = ScenarioConfig::from_toml(s.text).unwrap();
        let report = run_scenario(&cfg, None, None);
        let want = if s.name == "cfl_violation" { 3 } else { 0 };
        assert_eq!(report.exit_code(), want, "{}\n{}", s.name, report.to_text());
    }
}
