//! Invariants of the inverse solver.

use fpp::inverse::{forward_q, psi, root_in_beta, solve_inverse, Family, InverseProblem, Provider};
use fpp::mc::SimConfig;
use fpp::model::{build_example, DensitySpec, ExampleParams, Interval, ProcessSpec};
use fpp::pide;

fn closed(id: u8) -> Provider {
    Provider::closed_form(id, &ExampleParams::default()).unwrap()
}

#[test]
fn example2_two_thirds_satisfies_rational_identity() {
    let s = solve_inverse(&InverseProblem::new(2.0 / 3.0, Family::Beta, closed(2)).unwrap()).unwrap();
    let (a, b) = s.params.unwrap();
    let rational = b * (b + 2.0 * a + 1.0) / ((a + b) * (a + b + 1.0));
    assert!((rational - 2.0 / 3.0).abs() <= 1e-10);
    assert!(s.psi <= 1e-16);
}

#[test]
fn solutions_and_curve_samples_hit_the_target() {
    for (id, q) in [(1u8, 0.3), (2, 0.8), (3, 0.45), (5, 0.6), (6, 0.5), (7, 0.35)] {
        let s = solve_inverse(&InverseProblem::new(q, Family::Beta, closed(id)).unwrap()).unwrap();
        assert!((s.achieved_q - q).abs() <= 1e-8, "example {id}");
        assert!(s.psi <= 1e-16);
        assert!(s.curve_samples.len() >= 16, "example {id}: {}", s.curve_samples.len());
        for c in &s.curve_samples {
            let g = DensitySpec::Beta { alpha: c.alpha, beta: c.beta };
            let qc = forward_q(&g, &closed(id)).unwrap();
            assert!((qc - q).abs() <= 1e-8, "example {id} at ({}, {})", c.alpha, c.beta);
        }
    }
}

#[test]
fn monotone_shortcut_agrees_with_optimizer() {
    let p = InverseProblem::new(0.3, Family::ModifiedBeta { a: 0.0, b: 1.0 }, closed(1)).unwrap();
    let s = solve_inverse(&p).unwrap();
    let (a, _) = s.params.unwrap();
    let b = root_in_beta(&p, a).unwrap().unwrap();
    let q = forward_q(&p.family.density(a, b), &p.provider).unwrap();
    assert!((q - s.achieved_q).abs() <= 1e-10);
    // Example 1 constraint curve is β = (3/7)α
    assert!((b - 3.0 / 7.0 * a).abs() < 1e-9 * a);
}

#[test]
fn tie_break_is_deterministic() {
    let p = InverseProblem::new(0.62, Family::Beta, closed(5)).unwrap();
    let s1 = solve_inverse(&p).unwrap();
    let s2 = solve_inverse(&p).unwrap();
    assert_eq!(s1.params, s2.params);
    assert_eq!(s1.to_json().unwrap(), s2.to_json().unwrap());
}

#[test]
fn brownian_uniform_half_has_zero_defect() {
    let spec = ProcessSpec::brownian(Interval::unit());
    let field = pide::solve(&spec, 63).unwrap();
    let v = psi(&DensitySpec::uniform(0.0, 1.0), &Provider::Pide(field), 0.5).unwrap();
    assert!(v < 1e-24);
}

#[test]
fn example1_target_half_gives_uniform() {
    let s = solve_inverse(&InverseProblem::new(0.5, Family::ModifiedBeta { a: 0.0, b: 1.0 }, closed(1)).unwrap()).unwrap();
    let (a, b) = s.params.unwrap();
    assert!((a - 1.0).abs() < 1e-6 && (b - 1.0).abs() < 1e-6);
}

#[test]
fn pide_provider_tracks_closed_form() {
    let spec = build_example(7, &ExampleParams::default()).unwrap();
    let field = pide::solve(&spec, 511).unwrap();
    let g = DensitySpec::Beta { alpha: 2.0, beta: 3.0 };
    let qp = forward_q(&g, &Provider::Pide(field)).unwrap();
    let qc = forward_q(&g, &closed(7)).unwrap();
    assert!((qp - qc).abs() < 1e-6);
}

#[test]
fn monte_carlo_provider_estimates_q() {
    let spec = build_example(7, &ExampleParams::default()).unwrap();
    let cfg = SimConfig::new(1e-4, 20_000, 3).unwrap();
    let g = DensitySpec::uniform(0.0, 1.0);
    let q_mc = forward_q(&g, &Provider::MonteCarlo { spec, cfg }).unwrap();
    let q = forward_q(&g, &closed(7)).unwrap();
    let se = (q * (1.0 - q) / 20_000.0).sqrt();
    assert!((q_mc - q).abs() < 4.0 * se, "{q_mc} vs {q}");
}

#[test]
fn bad_targets_are_rejected() {
    assert!(InverseProblem::new(0.0, Family::Beta, closed(2)).is_err());
    assert!(InverseProblem::new(1.2, Family::Beta, closed(2)).is_err());
}
