use std::sync::Arc;

use strichartz_core::admissibility::Estimate;
use strichartz_core::ons::{
    band_slots, density_field, density_mixed_norm, gram_deviation, sweep, GridChoice,
    IntervalChoice, LambdaSequence, OnsConfig, SweepAxis,
};
use strichartz_core::{
    generate_ons, lambda_family, mixed_norm, propagate, Geometry, GeometryKind, GeometrySpec,
    LambdaKind, OnsKind, TimeGrid,
};

fn torus(g: usize) -> Arc<Geometry> {
    GeometrySpec::torus(vec![g]).build().unwrap()
}

#[test]
fn gram_matrix_is_preserved_by_the_flow() {
    let geom = torus(64);
    let fam = generate_ons(OnsKind::RandomBand, 6, 8, &geom, 3).unwrap();
    for t in [0.0, 0.1, -0.77, 3.5] {
        let moved: Vec<_> = fam.fields().iter().map(|f| propagate(f, t, 3.0).unwrap()).collect();
        assert!(gram_deviation(&moved) < 1e-12, "t = {t}");
    }
}

#[test]
fn density_mass_is_the_lambda_sum_at_every_time() {
    let geom = torus(64);
    let fam = generate_ons(OnsKind::RandomBand, 5, 8, &geom, 9).unwrap();
    let lambda = LambdaSequence::new(vec![0.9, 0.5, 0.5, 0.2, 0.0], 2.0).unwrap();
    let grid = TimeGrid::new(-0.5, 0.5, 11).unwrap();
    let rho = density_field(&fam, &lambda, 2.5, 8, grid).unwrap();
    let total: f64 = lambda.values.iter().sum();
    for fr in rho.frames() {
        assert!(fr.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0));
        let mass: f64 = fr.values().iter().map(|v| v.re).sum::<f64>() * geom.cell_volume();
        assert!((mass - total).abs() < 1e-12);
    }
    let streamed = density_mixed_norm(&fam, &lambda, 2.5, 8, grid, 3.0, 2.0).unwrap();
    assert!((streamed - mixed_norm(&rho, 3.0, 2.0)).abs() < 1e-12 * streamed);
}

#[test]
fn flat_lambda_scales_as_m_to_the_minus_one_over_alpha() {
    let geom = torus(64);
    let fam = generate_ons(OnsKind::RandomBand, 7, 8, &geom, 1).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 33).unwrap();
    let ones = LambdaSequence::new(vec![1.0; 7], 1.0).unwrap();
    let base = density_mixed_norm(&fam, &ones, 3.0, 8, grid, 6.0, 2.0).unwrap();
    let mut last = 0.0;
    for alpha in [1.0, 4.0 / 3.0, 2.0, 4.0] {
        let lambda = lambda_family(LambdaKind::Flat, 7, alpha).unwrap();
        assert!((lambda.norm - 1.0).abs() < 1e-14);
        let lhs = density_mixed_norm(&fam, &lambda, 3.0, 8, grid, 6.0, 2.0).unwrap();
        assert!((lhs - base * 7f64.powf(-1.0 / alpha)).abs() < 1e-12 * base);
        // larger α' admits more mass for the same ℓ^{α'} budget
        assert!(lhs > last);
        last = lhs;
    }
}

#[test]
fn alpha_one_obeys_the_triangle_inequality() {
    let geom = torus(64);
    let fam = generate_ons(OnsKind::RandomBand, 4, 8, &geom, 2).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 33).unwrap();
    let lambda = lambda_family(LambdaKind::Power { beta: 1.0 }, 4, 1.0).unwrap();
    let lhs = density_mixed_norm(&fam, &lambda, 3.0, 8, grid, 6.0, 2.0).unwrap();
    let rhs: f64 = (0..4)
        .map(|j| {
            let single = strichartz_core::ons::OrthonormalFamily {
                members: vec![fam.members[j].clone()],
                ..fam.clone()
            };
            let one = LambdaSequence::new(vec![lambda.values[j]], 1.0).unwrap();
            density_mixed_norm(&single, &one, 3.0, 8, grid, 6.0, 2.0).unwrap()
        })
        .sum();
    assert!(lhs <= rhs * (1.0 + 1e-12));
}

#[test]
fn too_many_members_for_the_band_is_an_error() {
    let geom = torus(64);
    let band = band_slots(&geom, 8).len();
    assert_eq!(band, 17);
    assert!(generate_ons(OnsKind::FourierModes, band, 8, &geom, 0).is_ok());
    assert!(generate_ons(OnsKind::FourierModes, band + 1, 8, &geom, 0).is_err());
    assert!(generate_ons(OnsKind::RandomBand, band + 1, 8, &geom, 0).is_err());
}

fn theta_line_config(alpha_dual: f64) -> OnsConfig {
    OnsConfig {
        geometry: GeometryKind::Torus { d: 1 },
        trunc_length: 1.0,
        grid: GridChoice::Auto { oversample: 4 },
        theta: 3.0,
        p: 6.0,
        q: 2.0,
        n: 8,
        m: None,
        alpha_dual,
        family: OnsKind::FourierModes,
        lambda: LambdaKind::Flat,
        extra_random: 0,
        interval: IntervalChoice::Unit,
        time_points: 9,
        estimate: Estimate::ThetaAdmissibleOns,
        seed: 0,
    }
}

#[test]
fn full_band_plane_waves_scale_as_one_minus_one_over_alpha() {
    // |e^{2πikx}|² = 1, so ρ ≡ M^{1-1/α'} for flat unit-norm λ
    for (alpha, slope) in [(4.0 / 3.0, 0.25), (2.0, 0.5)] {
        let out = sweep(&theta_line_config(alpha), &SweepAxis::N(vec![8, 16, 32]), 5, false).unwrap();
        let fit = out.fit.unwrap();
        let m_slope = ((65.0f64 / 17.0).ln() / (32.0f64 / 8.0).ln()) * slope;
        assert!((fit.slope - m_slope).abs() < 1e-6, "α' = {alpha}: {}", fit.slope);
        for r in &out.records {
            let expect = ((2 * r.n + 1) as f64).powf(1.0 - 1.0 / alpha);
            assert!((r.ratio.unwrap() - expect).abs() < 1e-10 * expect);
            assert!(r.predicted.prediction().is_some());
        }
    }
}
