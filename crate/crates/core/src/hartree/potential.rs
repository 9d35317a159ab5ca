//! Interaction potentials, specified by their Fourier transforms `ŵ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::Geometry;
use crate::norms::besov_sup_norm;
use crate::spectral::{forward_transform, inverse_transform};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum PotentialKind {
    /// `ŵ(ξ) = (1 + |ξ|²)^{-a}`, `a > 0`.
    Yukawa { a: f64 },
    /// `ŵ(ξ) = exp(-2π²σ²|ξ|²)`; `σ = 0` is the identity multiplier.
    Gaussian { sigma: f64 },
    /// `w(x) = cos(2π k₀ x₁)`: `ŵ = 1/2` at `ξ = ±k₀ e₁` (lattice units).
    Cosine { k0: i64 },
    /// `ŵ ≡ 0`.
    Zero,
    /// `ŵ(0) = c`, zero elsewhere.
    Constant { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Besov regularity `s` reported alongside runs.
    pub besov_s: f64,
    /// Besov integrability `q'` reported alongside runs.
    pub besov_q_dual: f64,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        match kind {
            PotentialKind::Yukawa { a } if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::invalid(format!("Yukawa exponent a = {a} must be positive")))
            }
            PotentialKind::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                return Err(Error::invalid("Gaussian width must be nonnegative"))
            }
            PotentialKind::Constant { c } if !c.is_finite() => {
                return Err(Error::invalid("constant must be finite"))
            }
            _ => {}
        }
        Ok(PotentialSpec {
            kind,
            besov_s: 0.0,
            besov_q_dual: 2.0,
        })
    }

    pub fn with_besov(mut self, s: f64, q_dual: f64) -> Self {
        self.besov_s = s;
        self.besov_q_dual = q_dual;
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
            || matches!(self.kind, PotentialKind::Constant { c } if c == 0.0)
    }

    /// `ŵ` on the lattice of `geom`, in spectrum order.
    pub fn multiplier(&self, geom: &Geometry) -> Vec<f64> {
        let d = geom.dim();
        (0..geom.len())
            .map(|k| {
                let xi = geom.frequency(k);
                let r2: f64 = xi[..d].iter().map(|x| x * x).sum();
                match self.kind {
                    PotentialKind::Yukawa { a } => (1.0 + r2).powf(-a),
                    PotentialKind::Gaussian { sigma } => {
                        (-2.0 * std::f64::consts::PI.powi(2) * sigma * sigma * r2).exp()
                    }
                    PotentialKind::Cosine { k0 } => {
                        let idx = geom.multi_index(k);
                        let on_axis = (1..d).all(|a| idx[a] == 0);
                        let j = geom.lattice_int(0, idx[0]);
                        if on_axis && k0 != 0 && j.abs() == k0.abs() {
                            0.5
                        } else if on_axis && k0 == 0 && j == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    PotentialKind::Zero => 0.0,
                    PotentialKind::Constant { c } => {
                        if r2 == 0.0 {
                            c
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect()
    }

    /// `w` sampled on the grid (for Besov reporting).
    pub fn sample(&self, geom: &std::sync::Arc<Geometry>) -> Field {
        let m = self.multiplier(geom);
        let s = crate::field::SpectrumField::from_parts(
            geom.clone(),
            m.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        );
        inverse_transform(&s)
    }

    /// `‖w‖_{B^s_{q',∞}}` with the stored `(s, q')`.
    pub fn besov_norm(&self, geom: &std::sync::Arc<Geometry>) -> f64 {
        besov_sup_norm(&self.sample(geom), self.besov_s, self.besov_q_dual)
    }
}

/// `w * ρ` for a real density `ρ`; the result is real.
pub fn convolve_potential(w: &PotentialSpec, rho: &Field) -> Result<Field> {
    if rho.values().iter().any(|v| v.im.abs() > 1e-10) {
        return Err(Error::invalid("density must be real-valued"));
    }
    let geom = rho.geometry();
    let real = Field::from_parts(
        geom.clone(),
        rho.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
    );
    Ok(Field::from_parts(
        geom.clone(),
        convolve_real(w, geom, &real.values().iter().map(|v| v.re).collect::<Vec<_>>())
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    ))
}

/// `w * ρ` on raw real grid values.
pub(crate) fn convolve_real(w: &PotentialSpec, geom: &std::sync::Arc<Geometry>, rho: &[f64]) -> Vec<f64> {
    if w.is_zero() {
        return vec![0.0; rho.len()];
    }
    let f = Field::from_parts(geom.clone(), rho.iter().map(|&r| Complex64::new(r, 0.0)).collect());
    let mut s = forward_transform(&f);
    for (c, m) in s.coefficients_mut().iter_mut().zip(w.multiplier(geom)) {
        *c *= m;
    }
    inverse_transform(&s).values().iter().map(|v| v.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    #[test]
    fn yukawa_halves_the_first_mode() {
        let g = GeometrySpec::torus(vec![32]).build().unwrap();
        let rho = Field::from_fn(g, |x| Complex64::new((std::f64::consts::TAU * x[0]).cos(), 0.0)).unwrap();
        let w = PotentialSpec::new(PotentialKind::Yukawa { a: 1.0 }).unwrap();
        let out = convolve_potential(&w, &rho).unwrap();
        assert!(out.max_abs_diff(&rho.scale(Complex64::new(0.5, 0.0))) < 1e-14);
    }

    #[test]
    fn identity_and_constant_kernels() {
        let g = GeometrySpec::torus(vec![16]).build().unwrap();
        let rho = Field::from_fn(g, |x| Complex64::new(1.0 + x[0] * x[0], 0.0)).unwrap();
        let id = PotentialSpec::new(PotentialKind::Gaussian { sigma: 0.0 }).unwrap();
        assert!(convolve_potential(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-14);
        let c = PotentialSpec::new(PotentialKind::Constant { c: 3.0 }).unwrap();
        let mass: f64 = rho.values().iter().map(|v| v.re).sum::<f64>() / 16.0;
        let out = convolve_potential(&c, &rho).unwrap();
        assert!(out.values().iter().all(|v| (v.re - 3.0 * mass).abs() < 1e-13));
        assert!(PotentialSpec::new(PotentialKind::Yukawa { a: 0.0 }).is_err());
    }

    #[test]
    fn rejects_complex_density() {
        let g = GeometrySpec::torus(vec![16]).build().unwrap();
        let f = Field::plane_wave(g, &[1]).unwrap();
        let w = PotentialSpec::new(PotentialKind::Zero).unwrap();
        assert!(convolve_potential(&w, &f).is_err());
    }
}
