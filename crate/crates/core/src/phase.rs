//! Austenite kinetics `z_t = (z_eq(θ) − z)⁺ / τ(θ)` and the latent-heat coefficient.

use crate::assumptions::{finite_positive, Clause, Violation};
use crate::error::{Error, Result};

/// Largest double below one; the exact integrator can round up to 1 after many time constants.
pub const Z_CEILING: f64 = 1.0 - f64::EPSILON / 2.0;

/// Quintic smoothstep `6x⁵ − 15x⁴ + 10x³` on `[0, 1]`, clamped outside, with two derivatives.
fn smoothstep(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let x2 = x * x;
        let x3 = x2 * x;
        (
            x3 * (10.0 + x * (-15.0 + 6.0 * x)),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
        )
    }
}

/// Relaxation time model, bounded between its two extreme values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauModel {
    Constant(f64),
    /// Smoothstep blend from `cold` (θ ≤ `theta_lo`) to `hot` (θ ≥ `theta_hi`).
    Ramp { cold: f64, hot: f64, theta_lo: f64, theta_hi: f64 },
}

impl TauModel {
    /// τ and its first two θ-derivatives.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        match *self {
            TauModel::Constant(t) => (t, 0.0, 0.0),
            TauModel::Ramp { cold, hot, theta_lo, theta_hi } => {
                let w = theta_hi - theta_lo;
                let (s, ds, dds) = smoothstep((theta - theta_lo) / w);
                ((cold * (1.0 - s) + hot * s).clamp(cold.min(hot), cold.max(hot)), (hot - cold) * ds / w, (hot - cold) * dds / (w * w))
            }
        }
    }

    /// `(τ_*, τ^*)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            TauModel::Constant(t) => (t, t),
            TauModel::Ramp { cold, hot, .. } => (cold.min(hot), cold.max(hot)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseKinetics {
    /// Austenitization start temperature (K).
    pub a_s: f64,
    /// Austenitization finish temperature (K).
    pub a_f: f64,
    pub tau: TauModel,
    /// Latent heat scale (J/m³).
    pub latent: f64,
}

impl Default for PhaseKinetics {
    /// Engineering placeholders in the range of a hypoeutectoid steel under fast heating.
    fn default() -> Self {
        PhaseKinetics { a_s: 1000.0, a_f: 1100.0, tau: TauModel::Constant(0.02), latent: 1.0e7 }
    }
}

impl PhaseKinetics {
    /// `z_eq`, `z_eq′`, `z_eq″` at θ.
    pub fn z_eq_all(&self, theta: f64) -> (f64, f64, f64) {
        let w = self.a_f - self.a_s;
        let (s, ds, dds) = smoothstep((theta - self.a_s) / w);
        (s, ds / w, dds / (w * w))
    }

    pub fn z_eq(&self, theta: f64) -> f64 {
        self.z_eq_all(theta).0
    }

    pub fn z_eq_prime(&self, theta: f64) -> f64 {
        self.z_eq_all(theta).1
    }

    pub fn tau_at(&self, theta: f64) -> f64 {
        self.tau.eval(theta).0
    }

    /// `(z_eq(θ) − z)⁺ / τ(θ)`.
    pub fn phase_rate(&self, z: f64, theta: f64) -> f64 {
        (self.z_eq(theta) - z).max(0.0) / self.tau_at(theta)
    }

    /// Exact step of the rate law with θ frozen over `dt`.
    pub fn step_node(&self, z: f64, theta: f64, dt: f64) -> f64 {
        let gap = self.z_eq(theta) - z;
        if gap <= 0.0 {
            return z;
        }
        let next = z + gap * -(-dt / self.tau_at(theta)).exp_m1();
        next.clamp(z, Z_CEILING)
    }

    /// Applies [`Self::step_node`] at every node.
    pub fn step_phase(&self, z: &[f64], theta: &[f64], dt: f64) -> Result<Vec<f64>> {
        if z.len() != theta.len() {
            return Err(Error::LengthMismatch { expected: z.len(), got: theta.len() });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("phase step needs dt > 0, got {dt}")));
        }
        Ok(z.iter().zip(theta).map(|(&zi, &ti)| self.step_node(zi, ti, dt)).collect())
    }

    /// Latent-heat coefficient `f(θ, z) = −L (z_eq(θ) − z − θ z_eq′(θ))`.
    pub fn latent_coeff(&self, theta: f64, z: f64) -> f64 {
        let (ze, dze, _) = self.z_eq_all(theta);
        -self.latent * (ze - z - theta * dze)
    }

    /// Heaviside form `F(θ, z) = −L (z_eq − z)⁺ + L θ z_eq′ H(z_eq − z)`.
    pub fn latent_coeff_heaviside(&self, theta: f64, z: f64) -> f64 {
        let (ze, dze, _) = self.z_eq_all(theta);
        let gap = ze - z;
        let h = if gap > 0.0 { 1.0 } else { 0.0 };
        -self.latent * gap.max(0.0) + self.latent * theta * dze * h
    }

    /// Phase dissipation `L (z_eq − z)⁺ z_t`.
    pub fn phase_dissipation(&self, theta: f64, z: f64, z_t: f64) -> f64 {
        self.latent * (self.z_eq(theta) - z).max(0.0) * z_t
    }

    /// Sampled C² bound `M` over θ in `[0, theta_max]`, including the
    /// combinations `|θ z_eq′ − z_eq|` and `|θ z_eq″|`.
    pub fn c2_bound(&self, theta_max: f64) -> f64 {
        let n = 20_000;
        let mut m: f64 = 0.0;
        for k in 0..=n {
            let th = theta_max * k as f64 / n as f64;
            let (ze, d1, d2) = self.z_eq_all(th);
            let (t0, t1, t2) = self.tau.eval(th);
            for v in [ze, d1, d2, t0, t1, t2, th * d1 - ze, th * d2] {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Sampled bound `C_f ≥ |f(θ, z)|` over θ in `[0, theta_max]`, z in `[0, 1]`.
    pub fn latent_bound(&self, theta_max: f64) -> f64 {
        let n = 20_000;
        (0..=n)
            .map(|k| {
                let th = theta_max * k as f64 / n as f64;
                self.latent_coeff(th, 0.0).abs().max(self.latent_coeff(th, 1.0).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Clause (iv) checks.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.a_s.is_finite() && self.a_f.is_finite() && self.a_s >= 0.0 && self.a_f > self.a_s) {
            out.push(Violation::new("A_f", Clause::IV, format!("need 0 <= A_s < A_f, got A_s = {}, A_f = {}", self.a_s, self.a_f)));
        }
        let (lo, hi) = self.tau.bounds();
        if !(finite_positive(lo) && hi.is_finite()) {
            out.push(Violation::new("tau0", Clause::IV, format!("relaxation time must be positive and bounded, got [{lo}, {hi}]")));
        }
        if let TauModel::Ramp { theta_lo, theta_hi, .. } = self.tau {
            if !(theta_hi > theta_lo) {
                out.push(Violation::new("tau_theta_hi", Clause::IV, "tau ramp needs tau_theta_lo < tau_theta_hi"));
            }
        }
        if !(self.latent.is_finite() && self.latent >= 0.0) {
            out.push(Violation::new("latent_L", Clause::IV, format!("latent heat scale must be finite and nonnegative, got {}", self.latent)));
        }
        if out.is_empty() {
            let top = 2.0 * self.a_f;
            for k in 0..=1000 {
                let ze = self.z_eq(top * k as f64 / 1000.0);
                if !(0.0..=1.0).contains(&ze) {
                    out.push(Violation::new("A_s", Clause::IV, format!("equilibrium fraction {ze} leaves [0, 1]")));
                    break;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kin(tau: f64) -> PhaseKinetics {
        PhaseKinetics { a_s: 1000.0, a_f: 1100.0, tau: TauModel::Constant(tau), latent: 2.0 }
    }

    #[test]
    fn rate_cases() {
        let k = kin(0.5);
        assert_eq!(k.phase_rate(k.z_eq(1050.0), 1050.0), 0.0);
        assert_eq!(k.phase_rate(0.9, 1050.0), 0.0);
        assert_eq!(k.phase_rate(0.0, 1200.0), 2.0);
    }

    #[test]
    fn closed_form_half_life() {
        let k = kin(1.0);
        let z1 = k.step_node(0.0, 1200.0, std::f64::consts::LN_2);
        assert!((z1 - 0.5).abs() < 1e-15);
        assert_eq!(k.step_node(0.8, 1050.0, 1.0), 0.8);
    }

    #[test]
    fn never_reaches_one() {
        let k = kin(1e-3);
        let mut z = 0.0;
        for _ in 0..100 {
            z = k.step_node(z, 1500.0, 1.0);
            assert!(z < 1.0);
        }
        assert_eq!(z, Z_CEILING);
    }

    #[test]
    fn latent_coefficient_cases() {
        let mut k = kin(1.0);
        assert_eq!(k.latent_coeff(900.0, 0.0), 0.0);
        assert_eq!(k.latent_coeff(1200.0, 1.0), 0.0);
        k.latent = 0.0;
        assert_eq!(k.latent_coeff(1050.0, 0.3), 0.0);
    }

    #[test]
    fn smoothstep_midpoint_slope_matches_finite_difference() {
        let k = kin(1.0);
        let th = 1050.0;
        let h = 1e-3;
        let fd = (k.z_eq(th + h) - k.z_eq(th - h)) / (2.0 * h);
        assert!((k.z_eq_prime(th) - fd).abs() < 1e-6);
        let expect = -k.latent * (k.z_eq(th) - th * fd);
        assert!((k.latent_coeff(th, 0.0) - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn tau_ramp_is_bounded() {
        let t = TauModel::Ramp { cold: 0.1, hot: 0.01, theta_lo: 900.0, theta_hi: 1100.0 };
        for th in [0.0, 900.0, 1000.0, 1100.0, 2000.0] {
            let v = t.eval(th).0;
            assert!((0.01..=0.1).contains(&v));
        }
        assert_eq!(t.bounds(), (0.01, 0.1));
    }

    #[test]
    fn invalid_kinetics_cite_clause_four() {
        let mut k = kin(1.0);
        k.tau = TauModel::Constant(0.0);
        let v = k.violations();
        assert_eq!(v[0].clause, Some(Clause::IV));
        assert_eq!(v[0].key, "tau0");
    }
}
