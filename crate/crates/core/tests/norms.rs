use std::sync::Arc;

use strichartz_core::{
    mixed_norm, project_leq, propagate, Complex64, Field, Geometry, GeometrySpec, SpaceTimeField,
    TimeGrid,
};

fn torus(g: usize) -> Arc<Geometry> {
    GeometrySpec::torus(vec![g]).build().unwrap()
}

fn smooth_field(geom: &Arc<Geometry>) -> Field {
    let f = Field::from_fn(geom.clone(), |x| {
        let c = (std::f64::consts::TAU * x[0]).cos();
        Complex64::new((1.5 * c).exp(), (3.0 * x[0] * (1.0 - x[0])).sin())
    })
    .unwrap();
    project_leq(&f, 6).unwrap()
}

fn flow(f: &Field, grid: TimeGrid) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, |t| propagate(f, t, 2.0)).unwrap()
}

const EXPONENTS: [f64; 4] = [2.0, 4.0, 8.0, f64::INFINITY];

#[test]
fn constant_one_has_unit_norm_for_every_pair() {
    let geom = torus(32);
    let grid = TimeGrid::new(0.0, 1.0, 17).unwrap();
    let one = SpaceTimeField::from_fn(grid, |_| Field::from_fn(geom.clone(), |_| Complex64::new(1.0, 0.0))).unwrap();
    for p in EXPONENTS {
        for q in EXPONENTS {
            assert!((mixed_norm(&one, p, q) - 1.0).abs() < 1e-14, "({p}, {q})");
        }
    }
}

#[test]
fn two_two_is_the_full_space_time_sum() {
    let geom = torus(64);
    let grid = TimeGrid::new(0.0, 0.5, 21).unwrap();
    let st = flow(&smooth_field(&geom), grid);
    let w = grid.weights();
    let direct: f64 = st
        .frames()
        .iter()
        .zip(&w)
        .map(|(fr, wt)| wt * fr.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * geom.cell_volume())
        .sum::<f64>()
        .sqrt();
    assert!((mixed_norm(&st, 2.0, 2.0) - direct).abs() < 1e-13 * direct);
}

#[test]
fn time_refinement_changes_smooth_norms_by_under_a_percent() {
    let geom = torus(64);
    let f = smooth_field(&geom);
    let coarse = flow(&f, TimeGrid::new(0.0, 1.0, 401).unwrap());
    let fine = flow(&f, TimeGrid::new(0.0, 1.0, 801).unwrap());
    for p in EXPONENTS {
        for q in EXPONENTS {
            let a = mixed_norm(&coarse, p, q);
            let b = mixed_norm(&fine, p, q);
            assert!((a - b).abs() < 0.01 * b, "({p}, {q}): {a} vs {b}");
        }
    }
}

#[test]
fn spatial_norms_are_log_convex() {
    // ‖u‖_q ≤ ‖u‖_a^{1-τ} ‖u‖_b^τ with 1/q = (1-τ)/a + τ/b
    let geom = torus(64);
    let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
    let st = flow(&smooth_field(&geom), grid);
    for (a, b, q) in [(2.0, 8.0, 4.0), (2.0, f64::INFINITY, 4.0), (4.0, f64::INFINITY, 8.0)] {
        let tau = (1.0 / a - 1.0 / q) / (1.0 / a - 1.0 / b);
        let (na, nb, nq) = (mixed_norm(&st, 2.0, a), mixed_norm(&st, 2.0, b), mixed_norm(&st, 2.0, q));
        // the time exponent is 2 on a constant-in-time norm, so Hölder in t is exact
        assert!(nq <= na.powf(1.0 - tau) * nb.powf(tau) * (1.0 + 1e-12), "({a}, {b}, {q})");
    }
}
