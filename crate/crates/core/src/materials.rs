//! Piecewise conductivity and permeability laws.
//!
//! Air has zero conductivity and vacuum permeability, the coil has constant
//! values, and the workpiece values depend on the austenite fraction through
//! an affine law. Coefficients are frozen per triangle using the vertex mean
//! of `z`.

use crate::assumptions::{finite_positive, Clause, Violation};
use crate::error::{Error, Result};
use crate::fem::CoefficientField;
use crate::mesh::{Mesh, Region};

pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Affine law `v(z) = at0 + (at1 − at0)·z` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZLinearLaw {
    pub at0: f64,
    pub at1: f64,
}

impl ZLinearLaw {
    pub fn constant(v: f64) -> Self {
        ZLinearLaw { at0: v, at1: v }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.at0 + (self.at1 - self.at0) * z
    }

    pub fn derivative(&self) -> f64 {
        self.at1 - self.at0
    }

    pub fn min(&self) -> f64 {
        self.at0.min(self.at1)
    }

    pub fn max(&self) -> f64 {
        self.at0.max(self.at1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub sigma_coil: f64,
    pub sigma_workpiece: ZLinearLaw,
    pub mu_vacuum: f64,
    pub mu_coil: f64,
    pub mu_workpiece: ZLinearLaw,
    /// Declared `[σ̲, σ̄]` for the conductors.
    pub sigma_bounds: (f64, f64),
    /// Declared `[μ̲, μ̄]` for every region.
    pub mu_bounds: (f64, f64),
}

impl Default for MaterialModel {
    /// Engineering placeholders for a plain carbon steel part and a copper coil,
    /// averaged over the heating range.
    fn default() -> Self {
        MaterialModel::with_tight_bounds(
            5.8e7,
            ZLinearLaw { at0: 5.0e6, at1: 1.0e6 },
            MU_0,
            MU_0,
            ZLinearLaw { at0: 20.0 * MU_0, at1: MU_0 },
        )
    }
}

impl MaterialModel {
    /// Model whose declared bounds are the tightest ones the laws admit.
    pub fn with_tight_bounds(
        sigma_coil: f64,
        sigma_workpiece: ZLinearLaw,
        mu_vacuum: f64,
        mu_coil: f64,
        mu_workpiece: ZLinearLaw,
    ) -> Self {
        let sigma_bounds = (sigma_coil.min(sigma_workpiece.min()), sigma_coil.max(sigma_workpiece.max()));
        let mu_bounds = (
            mu_vacuum.min(mu_coil).min(mu_workpiece.min()),
            mu_vacuum.max(mu_coil).max(mu_workpiece.max()),
        );
        MaterialModel { sigma_coil, sigma_workpiece, mu_vacuum, mu_coil, mu_workpiece, sigma_bounds, mu_bounds }
    }

    /// Checks clauses (i) and (ii). Affine laws are smooth with bounded
    /// derivative by construction, so only the bounds need checking.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (slo, shi) = self.sigma_bounds;
        if !(finite_positive(slo) && shi.is_finite() && slo <= shi) {
            out.push(Violation::new("sigma_min", Clause::I, format!("need 0 < sigma_min <= sigma_max, got [{slo}, {shi}]")));
        }
        let within_s = |v: f64| v.is_finite() && v >= slo && v <= shi && v > 0.0;
        for (key, v) in [
            ("sigma_coil", self.sigma_coil),
            ("sigma_workpiece_z0", self.sigma_workpiece.at0),
            ("sigma_workpiece_z1", self.sigma_workpiece.at1),
        ] {
            if !within_s(v) {
                out.push(Violation::new(key, Clause::I, format!("{v} is outside the positive bounds [{slo}, {shi}]")));
            }
        }
        let (mlo, mhi) = self.mu_bounds;
        if !(finite_positive(mlo) && mhi.is_finite() && mlo <= mhi) {
            out.push(Violation::new("mu_r_min", Clause::II, format!("need 0 < mu_min <= mu_max, got [{mlo}, {mhi}] H/m")));
        }
        let within_m = |v: f64| v.is_finite() && v >= mlo && v <= mhi && v > 0.0;
        for (key, v) in [
            ("mu_vacuum", self.mu_vacuum),
            ("mu_r_coil", self.mu_coil),
            ("mu_r_workpiece_z0", self.mu_workpiece.at0),
            ("mu_r_workpiece_z1", self.mu_workpiece.at1),
        ] {
            if !within_m(v) {
                out.push(Violation::new(key, Clause::II, format!("{v} is outside the positive bounds [{mlo}, {mhi}]")));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::Coefficient(v.to_string())),
        }
    }

    /// Lipschitz constant of `σ_w` in `z`.
    pub fn sigma_lipschitz(&self) -> f64 {
        self.sigma_workpiece.derivative().abs()
    }

    pub fn sigma_field(&self, mesh: &Mesh, z: &[f64]) -> Result<CoefficientField> {
        self.per_triangle(mesh, z, |r, zt| match r {
            Region::Air => 0.0,
            Region::Coil => self.sigma_coil,
            Region::Workpiece => self.sigma_workpiece.eval(zt),
        })
    }

    pub fn inv_mu_field(&self, mesh: &Mesh, z: &[f64]) -> Result<CoefficientField> {
        self.per_triangle(mesh, z, |r, zt| match r {
            Region::Air => 1.0 / self.mu_vacuum,
            Region::Coil => 1.0 / self.mu_coil,
            Region::Workpiece => 1.0 / self.mu_workpiece.eval(zt),
        })
    }

    fn per_triangle(&self, mesh: &Mesh, z: &[f64], f: impl Fn(Region, f64) -> f64) -> Result<CoefficientField> {
        if z.len() != mesh.num_vertices() {
            return Err(Error::LengthMismatch { expected: mesh.num_vertices(), got: z.len() });
        }
        if let Some(i) = z.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!("austenite fraction {} at node {i} is outside [0, 1]", z[i])));
        }
        Ok(CoefficientField::PerTriangle(
            mesh.triangles
                .iter()
                .zip(&mesh.regions)
                .map(|(tri, &r)| f(r, (z[tri[0]] + z[tri[1]] + z[tri[2]]) / 3.0))
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed_mesh() -> Mesh {
        let mut m = Mesh::rectangle(0.0, 0.0, 3.0, 1.0, 3, 1, Region::Air).unwrap();
        for t in 0..m.num_triangles() {
            let x = m.centroid(t)[0];
            m.regions[t] = if x < 1.0 { Region::Coil } else if x < 2.0 { Region::Air } else { Region::Workpiece };
        }
        m
    }

    #[test]
    fn region_values_at_zero_fraction() {
        let m = mixed_mesh();
        let model = MaterialModel::default();
        let z = vec![0.0; m.num_vertices()];
        let s = model.sigma_field(&m, &z).unwrap();
        let nu = model.inv_mu_field(&m, &z).unwrap();
        for t in 0..m.num_triangles() {
            let (es, enu) = match m.regions[t] {
                Region::Air => (0.0, 1.0 / model.mu_vacuum),
                Region::Coil => (model.sigma_coil, 1.0 / model.mu_coil),
                Region::Workpiece => (model.sigma_workpiece.at0, 1.0 / model.mu_workpiece.at0),
            };
            assert_eq!(s.value(t), es);
            assert_eq!(nu.value(t), enu);
        }
    }

    #[test]
    fn affine_interpolation() {
        let m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1, Region::Workpiece).unwrap();
        let model = MaterialModel::with_tight_bounds(
            1e6,
            ZLinearLaw { at0: 1e6, at1: 5e5 },
            MU_0,
            MU_0,
            ZLinearLaw { at0: 2.0 * MU_0, at1: MU_0 },
        );
        // Triangles are [0, 1, 3] and [0, 3, 2].
        let s = model.sigma_field(&m, &[0.0, 0.75, 0.0, 0.0]).unwrap();
        assert_eq!(s.value(0), 8.75e5);
        let nu = model.inv_mu_field(&m, &[0.0, 0.0, 1.0, 0.5]).unwrap();
        assert!((nu.value(1) - 1.0 / (1.5 * MU_0)).abs() < 1e-9 / MU_0);
    }

    #[test]
    fn fraction_out_of_range_errors() {
        let m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1, Region::Workpiece).unwrap();
        let model = MaterialModel::default();
        assert!(model.sigma_field(&m, &[0.0, 1.2, 0.0, 0.0]).is_err());
        assert!(model.sigma_field(&m, &[0.0; 3]).is_err());
    }

    #[test]
    fn negative_conductivity_cites_clause_one() {
        let mut model = MaterialModel::default();
        model.sigma_workpiece.at0 = -1.0;
        let v = model.violations();
        assert_eq!(v[0].key, "sigma_workpiece_z0");
        assert_eq!(v[0].clause, Some(Clause::I));
        assert!(model.validate().unwrap_err().to_string().contains("assumption (i)"));
    }
}
