//! Singular values, Schatten and Sobolev–Schatten norms, the discrete Fourier
//! extension operator and the Schatten duality check.
//!
//! Operators between weighted `L²` spaces are stored with the square roots
//! of the quadrature weights folded into rows and columns, so plain singular
//! values of the stored matrix are the singular values of the operator.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeField, TimeGrid};
use crate::geometry::Geometry;
use crate::ons::{lambda_family, LambdaKind};
use crate::seed::derive_cell_seed;
use crate::spectral::{
    apply_real_multiplier, band_fits, cutoff_weight, fractional_symbol, symbol_at,
};
use crate::util::{cis_turns, product_turns};

pub type CMatrix = DMatrix<Complex64>;

/// Default bound on stored matrix entries (4096 × 4096).
pub const DEFAULT_CAPACITY: usize = 4096 * 4096;

/// What the rows or columns of a [`DiscreteOperator`] index.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    /// Spatial grid points with `√cell` folded in.
    Spatial(Arc<Geometry>),
    /// Time-major space-time samples with `√(w_t · cell)` folded in.
    SpaceTime(Arc<Geometry>, TimeGrid),
    /// Lattice points of a frequency band with `√dual` folded in.
    Coefficients(usize),
    /// Plain `C^n`.
    Plain(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub matrix: CMatrix,
    pub row_space: Space,
    pub col_space: Space,
}

impl DiscreteOperator {
    pub fn plain(matrix: CMatrix) -> Self {
        let (r, c) = matrix.shape();
        DiscreteOperator {
            matrix,
            row_space: Space::Plain(r),
            col_space: Space::Plain(c),
        }
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        singular_values(&self.matrix)
    }

    pub fn schatten_norm(&self, alpha: f64) -> Result<f64> {
        schatten_norm(&self.matrix, alpha)
    }
}

/// Nonincreasing singular values, `min(rows, cols)` of them.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let svd = a
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::numeric("singular value decomposition did not converge"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues nonincreasing, by cyclic
/// complex Jacobi rotations.
///
/// nalgebra's `SymmetricEigen` loses absolute accuracy (errors near `1e-8`)
/// on the clustered, nearly singular spectra produced by low-rank
/// compression; Jacobi is accurate to roundoff in `‖H‖` there.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::invalid("Hermitian eigenproblem needs a square matrix"));
    }
    if h.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let mut a = (h + h.adjoint()).scale(0.5);
    let mut v = CMatrix::identity(n, n);
    let scale = a.norm();
    let tiny = f64::EPSILON * 1e-3 * scale;
    let mut converged = scale == 0.0;
    for _ in 0..100 {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let beta = b.norm();
                if beta <= tiny {
                    continue;
                }
                rotated = true;
                let e = b / beta;
                let ec = e.conj();
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * beta);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * c - y * ec * s;
                    a[(k, q)] = x * s + y * ec * c;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * c - y * ec * s;
                    v[(k, q)] = x * s + y * ec * c;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = x * c - y * e * s;
                    a[(q, k)] = x * s + y * e * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::numeric("Jacobi eigensolver did not converge"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.column_mut(c).copy_from(&v.column(i));
    }
    Ok((vectors, order.iter().map(|&i| a[(i, i)].re).collect()))
}

/// `(Σ s_i^α)^{1/α}`, or `s₁` for `α = ∞`, from nonincreasing `s`.
pub fn schatten_from_singular(s: &[f64], alpha: f64) -> f64 {
    let s1 = s.first().copied().unwrap_or(0.0);
    if alpha.is_infinite() || s1 == 0.0 {
        return s1;
    }
    s1 * s.iter().map(|x| (x / s1).powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

pub fn schatten_norm(a: &CMatrix, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::invalid(format!("Schatten exponent {alpha} must be >= 1")));
    }
    Ok(schatten_from_singular(&singular_values(a)?, alpha))
}

/// `⟨D⟩^s A ⟨D⟩^s` for `A` acting on grid values of `geom`.
pub fn bessel_conjugate(a: &CMatrix, s: f64, geom: &Arc<Geometry>) -> Result<CMatrix> {
    let n = geom.len();
    if a.shape() != (n, n) {
        return Err(Error::invalid(format!(
            "operator is {}x{}, grid has {n} points",
            a.nrows(),
            a.ncols()
        )));
    }
    if s == 0.0 {
        return Ok(a.clone());
    }
    let weights = bessel_weights(geom, s);
    let apply_columns = |m: &CMatrix| -> CMatrix {
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = Field::from_parts(geom.clone(), m.column(j).iter().copied().collect());
            let v = apply_real_multiplier(&col, &weights);
            out.column_mut(j).copy_from_slice(v.values());
        }
        out
    };
    // ⟨D⟩^s is Hermitian, so right multiplication is (⟨D⟩^s (·)*)*
    let left = apply_columns(a);
    Ok(apply_columns(&left.adjoint()).adjoint())
}

/// `(1 + |ξ|²)^{s/2}` on the lattice of `geom`.
pub fn bessel_weights(geom: &Geometry, s: f64) -> Vec<f64> {
    (0..geom.len())
        .map(|k| {
            let xi = geom.frequency(k);
            let r2: f64 = xi[..geom.dim()].iter().map(|x| x * x).sum();
            (1.0 + r2).powf(s / 2.0)
        })
        .collect()
}

pub fn sobolev_schatten_norm(a: &CMatrix, alpha: f64, s: f64, geom: &Arc<Geometry>) -> Result<f64> {
    schatten_norm(&bessel_conjugate(a, s, geom)?, alpha)
}

/// Matrix of `𝓔_N a(t, x) = ∫ a(ξ) e^{2πi(x·ξ + tφ(ξ))} η(ξ/N) dξ` from
/// coefficients on the band to time-major space-time samples.
#[derive(Debug, Clone)]
pub struct ExtensionMatrix {
    pub operator: DiscreteOperator,
    pub geometry: Arc<Geometry>,
    pub grid: TimeGrid,
    pub n: usize,
    pub theta: f64,
    /// Spectrum slot of every column.
    pub slots: Vec<usize>,
    /// Cutoff `η(ξ/N)` of every column.
    pub cutoffs: Vec<f64>,
    /// `√(w_t · cell)` of every row.
    pub row_weights: Vec<f64>,
}

impl ExtensionMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.operator.matrix
    }

    pub fn rows(&self) -> usize {
        self.operator.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.operator.matrix.ncols()
    }
}

pub fn build_extension_matrix(
    geom: &Arc<Geometry>,
    n: usize,
    grid: TimeGrid,
    theta: f64,
    capacity: usize,
) -> Result<ExtensionMatrix> {
    if n == 0 {
        return Err(Error::invalid("band N must be >= 1"));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid("θ must be positive"));
    }
    band_fits(geom, n)?;
    let (slots, cutoffs): (Vec<usize>, Vec<f64>) = (0..geom.len())
        .map(|k| (k, cutoff_weight(geom, k, n as f64)))
        .filter(|&(_, w)| w > 0.0)
        .unzip();
    let rows = grid.len() * geom.len();
    let cols = slots.len();
    if rows.saturating_mul(cols) > capacity {
        return Err(Error::Capacity(format!(
            "extension matrix {rows}x{cols} exceeds {capacity} entries"
        )));
    }
    let cell = geom.cell_volume();
    let sqrt_dual = geom.dual_cell_volume().sqrt();
    let row_weights: Vec<f64> = grid
        .weights()
        .iter()
        .flat_map(|w| std::iter::repeat_n((w * cell).sqrt(), geom.len()))
        .collect();
    let kind = geom.kind();
    let freqs: Vec<[f64; 3]> = slots.iter().map(|&k| geom.frequency(k)).collect();
    let symbols: Vec<f64> = freqs.iter().map(|xi| symbol_at(kind, xi, theta)).collect();
    let positions: Vec<[f64; 3]> = (0..geom.len()).map(|k| geom.position(k)).collect();
    let times = grid.times();
    let d = geom.dim();
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        let scale = cutoffs[c] * sqrt_dual;
        let mut col = m.column_mut(c);
        for (it, &t) in times.iter().enumerate() {
            let tp = product_turns(t, symbols[c]);
            for (ix, x) in positions.iter().enumerate() {
                let r = it * geom.len() + ix;
                let sp: f64 = (0..d).map(|a| product_turns(x[a], freqs[c][a])).sum();
                col[r] = cis_turns(sp + tp) * (scale * row_weights[r]);
            }
        }
    }
    Ok(ExtensionMatrix {
        operator: DiscreteOperator {
            matrix: m,
            row_space: Space::SpaceTime(geom.clone(), grid),
            col_space: Space::Coefficients(cols),
        },
        geometry: geom.clone(),
        grid,
        n,
        theta,
        slots,
        cutoffs,
        row_weights,
    })
}

/// Symbol values on the columns of an extension matrix.
pub fn column_symbols(ext: &ExtensionMatrix) -> Vec<f64> {
    let all = fractional_symbol(&ext.geometry.lattice(), ext.theta);
    ext.slots.iter().map(|&k| all[k]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    /// `‖W₁ 𝓔_N 𝓔_N* W₂‖_{𝔖^α}`.
    pub lhs_op: f64,
    /// Largest sampled `|∫∫ W₁ W₂ Σ λ_j |𝓔_N f_j|²| / ‖λ‖_{ℓ^{α'}}`.
    pub sampled_max: f64,
    /// `sampled_max / lhs_op` (0 when both vanish).
    pub ratio: f64,
    pub samples: usize,
    pub argmax_sample: Option<usize>,
    /// True when `W₂ = conj(W₁)`, where Schatten–Hölder forces dominance.
    pub dominance_applies: bool,
    /// `sampled_max <= lhs_op·(1 + 1e-8)` when dominance applies.
    pub consistent: Option<bool>,
    pub rows: usize,
    pub cols: usize,
}

/// Numeric check of the duality between the Schatten bound on `W𝓔𝓔*W̄` and
/// the density bound `‖Σ λ_j |𝓔 f_j|²‖ ≲ ‖λ‖_{ℓ^{α'}}`.
#[allow(clippy::too_many_arguments)]
pub fn duality_check(
    w1: &SpaceTimeField,
    w2: &SpaceTimeField,
    n: usize,
    alpha: f64,
    theta: f64,
    sample_count: usize,
    seed: u64,
    capacity: usize,
) -> Result<DualityReport> {
    if w1.grid() != w2.grid() || w1.geometry() != w2.geometry() {
        return Err(Error::invalid("weights are sampled on different grids"));
    }
    if !(alpha >= 1.0) {
        return Err(Error::invalid(format!("Schatten exponent {alpha} must be >= 1")));
    }
    let ext = build_extension_matrix(w1.geometry(), n, *w1.grid(), theta, capacity)?;
    let flat = |w: &SpaceTimeField| -> Vec<Complex64> {
        w.frames().iter().flat_map(|f| f.values().iter().copied()).collect()
    };
    let v1 = flat(w1);
    let v2 = flat(w2);
    let e = ext.matrix();
    let (rows, cols) = e.shape();
    let mut a = e.clone();
    let mut b = e.clone();
    for r in 0..rows {
        for c in 0..cols {
            a[(r, c)] *= v1[r];
            b[(r, c)] *= v2[r].conj();
        }
    }
    // W₁ 𝓔 𝓔* W₂ = A B*; its nonzero singular values are those of R_A R_B*
    let product = if cols < rows {
        let ra = a.clone().qr().r();
        let rb = b.clone().qr().r();
        &ra * rb.adjoint()
    } else {
        &a * b.adjoint()
    };
    let lhs_op = schatten_norm(&product, alpha)?;

    let alpha_dual = if alpha.is_infinite() {
        1.0
    } else if alpha == 1.0 {
        f64::INFINITY
    } else {
        alpha / (alpha - 1.0)
    };
    let pairing: Vec<Complex64> = v1.iter().zip(&v2).map(|(x, y)| x * y).collect();
    let sampled: Vec<f64> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_cell_seed(seed, i as u64));
            let m = rng.gen_range(1..=cols);
            let frame = random_orthonormal_columns(&mut rng, cols, m);
            let kind = match i % 3 {
                0 => LambdaKind::Flat,
                1 => LambdaKind::Power { beta: 1.0 },
                _ => LambdaKind::OneHot,
            };
            let lambda = lambda_family(kind, m, alpha_dual).expect("M >= 1");
            let u = e * &frame;
            let mut acc = Complex64::default();
            for r in 0..rows {
                let rho: f64 = (0..m)
                    .map(|j| lambda.values[j] * u[(r, j)].norm_sqr())
                    .sum();
                acc += pairing[r] * rho;
            }
            acc.norm() / lambda.norm
        })
        .collect();
    let (argmax, sampled_max) = sampled
        .iter()
        .enumerate()
        .fold((None, 0.0), |(ai, am), (i, &v)| if v > am { (Some(i), v) } else { (ai, am) });
    let dominance_applies = v1
        .iter()
        .zip(&v2)
        .all(|(x, y)| (x - y.conj()).norm() <= 1e-14 * (1.0 + x.norm()));
    let ratio = if lhs_op > 0.0 { sampled_max / lhs_op } else { 0.0 };
    Ok(DualityReport {
        lhs_op,
        sampled_max,
        ratio,
        samples: sample_count,
        argmax_sample: argmax,
        dominance_applies,
        consistent: dominance_applies.then_some(sampled_max <= lhs_op * (1.0 + 1e-8)),
        rows,
        cols,
    })
}

/// `m` orthonormal columns in `C^n` from a complex Gaussian frame.
pub fn random_orthonormal_columns(rng: &mut impl Rng, n: usize, m: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, m, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    #[test]
    fn identity_and_rank_one() {
        let id = CMatrix::identity(4, 4);
        assert_eq!(singular_values(&id).unwrap(), vec![1.0; 4]);
        assert!((schatten_norm(&id, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let u = nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)]);
        let v = nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
        ]);
        let a = &u * v.adjoint();
        let s = singular_values(&a).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0] - u.norm() * v.norm()).abs() < 1e-12);
        assert!(s[1] < 1e-12);
    }

    #[test]
    fn hermitian_eigen_reconstructs_clustered_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 18;
        let z = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let q = z.qr().q();
        let d: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => 0.25,
                1 => 0.125,
                2 | 3 => -1e-8 * i as f64,
                4 => 0.125,
                _ => 1e-21 * i as f64,
            })
            .collect();
        let dm = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            d.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let h = &q * dm * q.adjoint();
        let (v, e) = hermitian_eigen(&h).unwrap();
        let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            e.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        assert!((&v * lam * v.adjoint() - &h).camax() < 1e-15);
        assert!((v.adjoint() * &v - CMatrix::identity(n, n)).camax() < 1e-13);
        assert!(e.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn norm_ordering_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CMatrix::from_fn(5, 4, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let mut prev = f64::INFINITY;
        for &al in &[1.0, 1.5, 2.0, 4.0, 10.0, f64::INFINITY] {
            let v = schatten_norm(&a, al).unwrap();
            assert!(v <= prev * (1.0 + 1e-14));
            prev = v;
        }
        assert!(schatten_norm(&a, 0.5).is_err());
    }

    #[test]
    fn bessel_conjugation_of_a_mode_projector() {
        let g = GeometrySpec::torus(vec![16]).build().unwrap();
        let e = Field::plane_wave(g.clone(), &[3]).unwrap();
        let cell = g.cell_volume();
        let a = CMatrix::from_fn(16, 16, |i, j| e.values()[i] * e.values()[j].conj() * cell);
        for &al in &[1.0, 2.0, f64::INFINITY] {
            let v = sobolev_schatten_norm(&a, al, 0.7, &g).unwrap();
            assert!((v - 10f64.powf(0.7)).abs() < 1e-11);
            let plain = sobolev_schatten_norm(&a, al, 0.0, &g).unwrap();
            assert!((plain - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_columns() {
        let g = GeometrySpec::torus(vec![16]).build().unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 9).unwrap();
        let ext = build_extension_matrix(&g, 2, grid, 2.5, DEFAULT_CAPACITY).unwrap();
        assert_eq!(ext.cols(), 5);
        for (c, &slot) in ext.slots.iter().enumerate() {
            let n = g.frequency(slot)[0];
            for (it, t) in grid.times().into_iter().enumerate() {
                for ix in 0..16 {
                    let r = it * 16 + ix;
                    let expect = cis_turns(n * ix as f64 / 16.0 + t * n.abs().powf(2.5));
                    assert!((ext.matrix()[(r, c)] / ext.row_weights[r] - expect).norm() < 1e-12);
                }
            }
        }
        assert!(build_extension_matrix(&g, 2, grid, 2.5, 100).is_err());
    }
}
