//! Thermodynamic closure, wall law, exact background state, and the
//! Bernoulli maps between potential data and `(rho, u)`.

use crate::error::{Error, Result};

/// Strict upper end of the adiabatic-exponent range the solver accepts.
pub const GAMMA_MAX: f64 = 5.0 / 3.0;
/// Exponent range for which the sharp theory applies; accepted values
/// outside it (up to [`GAMMA_MAX`]) are flagged, not rejected.
pub const GAMMA_STRICT_MAX: f64 = 4.0 / 3.0;

/// Isentropic gas law `P = A rho^gamma` together with the derived
/// thermodynamic maps (sound speed, enthalpy and its inverse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
    a: f64,
}

impl GasModel {
    /// Gas with pressure constant `A = 1`.
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_pressure_constant(gamma, 1.0)
    }

    pub fn with_pressure_constant(gamma: f64, a: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma < GAMMA_MAX) {
            return Err(Error::param(
                "gamma",
                format!("must lie in (1, 5/3), got {gamma}"),
            ));
        }
        if !(a > 0.0) {
            return Err(Error::param("A", format!("must be positive, got {a}")));
        }
        Ok(GasModel { gamma, a })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure_constant(&self) -> f64 {
        self.a
    }

    /// True when `gamma` sits inside the range the sharp estimates cover.
    pub fn in_strict_range(&self) -> bool {
        self.gamma < GAMMA_STRICT_MAX
    }

    /// Bernoulli constant `B0 = gamma / (gamma - 1)`, the enthalpy of the
    /// unit-density rest state.
    pub fn bernoulli_constant(&self) -> f64 {
        self.gamma / (self.gamma - 1.0)
    }

    /// `P(rho) = A rho^gamma`.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::domain("pressure", format!("rho = {rho} < 0")));
        }
        Ok(self.a * rho.powf(self.gamma))
    }

    /// Squared sound speed `c^2(rho) = P'(rho) = gamma A rho^(gamma-1)`.
    pub fn sound_speed2(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::domain(
                "sound_speed2",
                format!("rho = {rho} <= 0 (vacuum has no sound speed)"),
            ));
        }
        Ok(self.gamma * self.a * rho.powf(self.gamma - 1.0))
    }

    /// Specific enthalpy `h(rho) = c^2(rho) / (gamma - 1)`.
    pub fn enthalpy(&self, rho: f64) -> Result<f64> {
        Ok(self.sound_speed2(rho)? / (self.gamma - 1.0))
    }

    /// Inverse of the enthalpy: `rho = ((gamma-1) h / (gamma A))^(1/(gamma-1))`.
    ///
    /// A nonpositive `h` means the state would sit at or beyond vacuum; the
    /// caller decides whether that is fatal.
    pub fn enthalpy_inv(&self, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::VacuumReached { t: f64::NAN, index: 0, arg: h });
        }
        let z = (self.gamma - 1.0) * h / (self.gamma * self.a);
        Ok(z.powf(1.0 / (self.gamma - 1.0)))
    }

    /// Density recovery `H(grad Phi) = h^{-1}(B0 - dt_phi - grad_phi2 / 2)`.
    pub fn density_from_potential(&self, dt_phi: f64, grad_phi2: f64) -> Result<f64> {
        self.enthalpy_inv(self.bernoulli_constant() - dt_phi - 0.5 * grad_phi2)
    }
}

/// Displacement blend carrying the ramped wall from rest onto the line
/// `1 + L t`: `g(0) = g'(0) = g''(0) = 0`, `g(1) = g'(1) = 1`, `g''(1) = 0`,
/// and `g' >= 0` throughout.
fn ramp_blend(s: f64) -> f64 {
    s * s * s * (3.0 * s * s - 8.0 * s + 6.0)
}

fn ramp_blend_rate(s: f64) -> f64 {
    s * s * (15.0 * s * s - 32.0 * s + 18.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `R(t) = 1 + L t` for all `t >= 0`.
    Linear,
    /// Wall at rest with zero acceleration at `t = 0`, blending C^2 onto
    /// `1 + L t` at the end of the ramp.
    Ramped,
}

/// Wall law `R(t)` of the expanding ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionProfile {
    l: f64,
    kind: ProfileKind,
    ramp_duration: f64,
}

impl ExpansionProfile {
    /// Linear wall law. `l = 0` freezes the domain, which degenerates the
    /// solver to a fixed reflecting-wall problem; useful for checks.
    pub fn linear(l: f64) -> Result<Self> {
        if !(l >= 0.0) {
            return Err(Error::param("L", format!("must be nonnegative, got {l}")));
        }
        Ok(ExpansionProfile { l, kind: ProfileKind::Linear, ramp_duration: 0.0 })
    }

    /// Ramped profile joining `1 + L t` at `t = ramp_duration`.
    ///
    /// The junction must not exceed `t = 1` so that `R(t) = 1 + L t` holds
    /// exactly for `t >= 1`.
    pub fn ramped(l: f64, ramp_duration: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::param("L", format!("must be positive, got {l}")));
        }
        if !(ramp_duration > 0.0 && ramp_duration <= 1.0) {
            return Err(Error::param(
                "ramp_duration",
                format!("must lie in (0, 1], got {ramp_duration}"),
            ));
        }
        Ok(ExpansionProfile { l, kind: ProfileKind::Ramped, ramp_duration })
    }

    /// Asymptotic wall speed `L`.
    pub fn wall_speed(&self) -> f64 {
        self.l
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Ball radius `R(t)`.
    pub fn radius(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.kind {
            ProfileKind::Linear => 1.0 + self.l * t,
            ProfileKind::Ramped => {
                if t >= self.ramp_duration {
                    1.0 + self.l * t
                } else {
                    1.0 + self.l * self.ramp_duration * ramp_blend(t / self.ramp_duration)
                }
            }
        })
    }

    /// Wall speed `R'(t)`.
    pub fn radius_rate(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match self.kind {
            ProfileKind::Linear => self.l,
            ProfileKind::Ramped => {
                if t >= self.ramp_duration {
                    self.l
                } else {
                    self.l * ramp_blend_rate(t / self.ramp_duration)
                }
            }
        })
    }

    /// First time at which `R(t) = r_target` (with `r_target > 1`).
    pub fn time_at_radius(&self, r_target: f64) -> Result<f64> {
        if !(r_target > 1.0) {
            return Err(Error::param(
                "r_target",
                format!("must exceed the initial radius 1, got {r_target}"),
            ));
        }
        if self.l == 0.0 {
            return Err(Error::param("r_target", "a frozen wall never reaches it".to_string()));
        }
        let t_linear = (r_target - 1.0) / self.l;
        match self.kind {
            ProfileKind::Linear => Ok(t_linear),
            ProfileKind::Ramped => {
                if t_linear >= self.ramp_duration {
                    return Ok(t_linear);
                }
                // Bisection on the monotone ramp section.
                let (mut lo, mut hi) = (0.0, self.ramp_duration);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.radius(mid)? < r_target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::domain("radius", format!("t = {t} < 0")));
        }
        Ok(())
    }
}

/// The exact expanding state at one instant: `rho_hat = 1 / R^3(t)` and
/// `u_hat(r) = u_hat_coeff * r` with `u_hat_coeff = L / R(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundSlice {
    pub t: f64,
    pub rho_hat: f64,
    pub u_hat_coeff: f64,
}

impl BackgroundSlice {
    pub fn u_hat(&self, r: f64) -> f64 {
        self.u_hat_coeff * r
    }
}

/// Background state at time `t` for the given wall law.
pub fn background(p: &ExpansionProfile, t: f64) -> Result<BackgroundSlice> {
    let radius = p.radius(t)?;
    Ok(BackgroundSlice {
        t,
        rho_hat: 1.0 / (radius * radius * radius),
        u_hat_coeff: p.wall_speed() / radius,
    })
}

fn require_closed_form(g: &GasModel, p: &ExpansionProfile) -> Result<(f64, f64)> {
    if p.kind() != ProfileKind::Linear {
        return Err(Error::Unsupported(
            "background potential is only available for the linear wall law".into(),
        ));
    }
    let four_minus_3g = 4.0 - 3.0 * g.gamma();
    if four_minus_3g.abs() < 1e-12 {
        return Err(Error::Unsupported(
            "background potential degenerates at gamma = 4/3".into(),
        ));
    }
    Ok((four_minus_3g, g.gamma() / ((g.gamma() - 1.0) * four_minus_3g * p.wall_speed())))
}

/// Velocity potential of the background flow,
/// `Phi_hat = c0 + B0 t + L r^2 / (2 R) - c0 R^(4 - 3 gamma)`.
pub fn background_potential(g: &GasModel, p: &ExpansionProfile, t: f64, r: f64) -> Result<f64> {
    let (four_minus_3g, c0) = require_closed_form(g, p)?;
    let radius = p.radius(t)?;
    let b0 = g.bernoulli_constant();
    Ok(c0 + b0 * t + p.wall_speed() * r * r / (2.0 * radius) - c0 * radius.powf(four_minus_3g))
}

/// `dPhi_hat/dt = B0 - L^2 r^2 / (2 R^2) - B0 R^(-3 (gamma - 1))`.
pub fn background_potential_dt(g: &GasModel, p: &ExpansionProfile, t: f64, r: f64) -> Result<f64> {
    let (_, _) = require_closed_form(g, p)?;
    let radius = p.radius(t)?;
    let b0 = g.bernoulli_constant();
    let l = p.wall_speed();
    Ok(b0 - l * l * r * r / (2.0 * radius * radius)
        - b0 * radius.powf(-3.0 * (g.gamma() - 1.0)))
}

/// `dPhi_hat/dr = L r / R`.
pub fn background_potential_dr(g: &GasModel, p: &ExpansionProfile, t: f64, r: f64) -> Result<f64> {
    let (_, _) = require_closed_form(g, p)?;
    Ok(p.wall_speed() * r / p.radius(t)?)
}

/// Residual of the mass equation `r^2 d_t rho_hat + d_r(r^2 rho_hat u_hat)`
/// on the background state, with every derivative taken in closed form.
pub fn background_mass_residual(p: &ExpansionProfile, t: f64, r: f64) -> Result<f64> {
    let radius = p.radius(t)?;
    let rate = p.radius_rate(t)?;
    let l = p.wall_speed();
    let r4 = radius.powi(4);
    let d_t_rho = -3.0 * rate / r4;
    let d_r_flux = 3.0 * l * r * r / r4;
    Ok(r * r * d_t_rho + d_r_flux)
}

/// Residual of the momentum equation
/// `d_t(r^2 rho_hat u_hat) + d_r(r^2 rho_hat u_hat^2) + r^2 d_r P(rho_hat)`
/// on the background state, derivatives in closed form. The pressure term
/// vanishes identically because `rho_hat` carries no `r` dependence.
pub fn background_momentum_residual(p: &ExpansionProfile, t: f64, r: f64) -> Result<f64> {
    let radius = p.radius(t)?;
    let rate = p.radius_rate(t)?;
    let l = p.wall_speed();
    let r3 = r * r * r;
    let d_t_mom = -4.0 * l * r3 * rate / radius.powi(5);
    let d_r_conv = 4.0 * l * l * r3 / radius.powi(5);
    let pressure_term = 0.0;
    Ok(d_t_mom + d_r_conv + pressure_term)
}

/// Residual of the Bernoulli law
/// `d_t Phi_hat + (d_r Phi_hat)^2 / 2 + h(rho_hat) - B0` on the background.
pub fn bernoulli_background_residual(
    g: &GasModel,
    p: &ExpansionProfile,
    t: f64,
    r: f64,
) -> Result<f64> {
    let dt = background_potential_dt(g, p, t, r)?;
    let dr = background_potential_dr(g, p, t, r)?;
    let h = g.enthalpy(background(p, t)?.rho_hat)?;
    Ok(dt + 0.5 * dr * dr + h - g.bernoulli_constant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas(gamma: f64) -> GasModel {
        GasModel::new(gamma).unwrap()
    }

    #[test]
    fn pressure_basics() {
        let g = gas(1.2);
        assert_eq!(g.pressure(1.0).unwrap(), 1.0);
        assert_eq!(g.pressure(0.0).unwrap(), 0.0);
        let g43ish = gas(4.0 / 3.0 - 1e-9);
        assert_relative_eq!(g43ish.pressure(8.0).unwrap(), 16.0, max_relative = 1e-7);
        assert!(g.pressure(-1.0).is_err());
    }

    #[test]
    fn gamma_range_is_validated() {
        assert!(GasModel::new(1.0).is_err());
        assert!(GasModel::new(5.0 / 3.0).is_err());
        assert!(GasModel::new(1.5).unwrap().in_strict_range() == false);
        assert!(gas(1.2).in_strict_range());
        assert!(GasModel::with_pressure_constant(1.2, 0.0).is_err());
    }

    #[test]
    fn sound_speed_matches_background_decay() {
        let g = gas(1.2);
        assert_relative_eq!(g.sound_speed2(1.0).unwrap(), 1.2, max_relative = 1e-15);
        assert!(g.sound_speed2(0.0).is_err());

        // On the background, c^2 = gamma * R^(-3 (gamma - 1)).
        let p = ExpansionProfile::linear(1.0).unwrap();
        for &t in &[0.0, 0.5, 1.0, 3.0, 10.0, 77.0] {
            let slice = background(&p, t).unwrap();
            let radius = p.radius(t).unwrap();
            let expected = g.gamma() * radius.powf(-3.0 * (g.gamma() - 1.0));
            assert_relative_eq!(
                g.sound_speed2(slice.rho_hat).unwrap(),
                expected,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sound_speed_is_gamma_pressure_over_rho() {
        let g = gas(1.4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let rho = rng.gen_range(1e-3..10.0);
            let lhs = g.sound_speed2(rho).unwrap();
            let rhs = g.gamma() * g.pressure(rho).unwrap() / rho;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn enthalpy_values_and_derivative() {
        let g = gas(1.2);
        assert_relative_eq!(g.enthalpy(1.0).unwrap(), 6.0, max_relative = 1e-14);

        // Background at t = 0 has unit density, so h = B0.
        let p = ExpansionProfile::linear(0.3).unwrap();
        let slice = background(&p, 0.0).unwrap();
        assert_relative_eq!(
            g.enthalpy(slice.rho_hat).unwrap(),
            g.bernoulli_constant(),
            max_relative = 1e-14
        );

        // h'(rho) = c^2(rho) / rho, checked by central differences.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let rho: f64 = rng.gen_range(0.1..5.0);
            let d = 1e-6 * rho;
            let fd = (g.enthalpy(rho + d).unwrap() - g.enthalpy(rho - d).unwrap()) / (2.0 * d);
            let exact = g.sound_speed2(rho).unwrap() / rho;
            assert_relative_eq!(fd, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn enthalpy_inverse_round_trip() {
        for &gamma in &[1.1, 1.2, 4.0 / 3.0 - 1e-3, 1.5, 1.6] {
            let g = gas(gamma);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..100 {
                let rho = rng.gen_range(1e-6..100.0);
                let back = g.enthalpy_inv(g.enthalpy(rho).unwrap()).unwrap();
                assert_relative_eq!(back, rho, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn enthalpy_inverse_values() {
        assert_relative_eq!(gas(1.2).enthalpy_inv(6.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gas(1.5).enthalpy_inv(3.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(matches!(
            gas(1.2).enthalpy_inv(0.0),
            Err(Error::VacuumReached { .. })
        ));
    }

    #[test]
    fn monotone_in_density() {
        let g = gas(1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rhos: Vec<f64> = (0..200).map(|_| rng.gen_range(1e-4..50.0)).collect();
        rhos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in rhos.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            assert!(g.pressure(w[0]).unwrap() < g.pressure(w[1]).unwrap());
            assert!(g.sound_speed2(w[0]).unwrap() < g.sound_speed2(w[1]).unwrap());
            assert!(g.enthalpy(w[0]).unwrap() < g.enthalpy(w[1]).unwrap());
        }
    }

    #[test]
    fn radius_linear_and_ramped() {
        let p = ExpansionProfile::linear(1.0).unwrap();
        assert_eq!(p.radius(1.0).unwrap(), 2.0);
        assert_eq!(p.radius_rate(1.0).unwrap(), 1.0);
        assert_eq!(p.radius(0.0).unwrap(), 1.0);
        assert!(p.radius(-0.1).is_err());

        let q = ExpansionProfile::ramped(0.5, 1.0).unwrap();
        assert_eq!(q.radius(0.0).unwrap(), 1.0);
        // R'(0) = 0 by finite differences.
        let d = 1e-4;
        let fd0 = (q.radius(d).unwrap() - q.radius(0.0).unwrap()) / d;
        assert_abs_diff_eq!(fd0, 0.0, epsilon = 1e-6);
        assert_eq!(q.radius_rate(0.0).unwrap(), 0.0);
        // Exactly on the line after the junction.
        for &t in &[1.0, 1.5, 2.0, 10.0] {
            assert_eq!(q.radius(t).unwrap(), 1.0 + 0.5 * t);
            assert_eq!(q.radius_rate(t).unwrap(), 0.5);
        }
        // C^2 at the junction: value, slope, curvature from the left.
        let t = 1.0 - 1e-5;
        assert_abs_diff_eq!(q.radius(t).unwrap(), 1.0 + 0.5 * t, epsilon = 1e-9);
        assert_abs_diff_eq!(q.radius_rate(t).unwrap(), 0.5, epsilon = 1e-8);
        let dd = 1e-4;
        let curv = (q.radius_rate(1.0 - dd).unwrap() - q.radius_rate(1.0 - 2.0 * dd).unwrap()) / dd;
        assert_abs_diff_eq!(curv, 0.0, epsilon = 1e-2);
        // Nondecreasing.
        let mut prev = 1.0;
        for k in 1..=100 {
            let r = q.radius(k as f64 * 0.03).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn time_at_radius_inverts_radius() {
        let p = ExpansionProfile::linear(0.1).unwrap();
        assert_relative_eq!(p.time_at_radius(10.0).unwrap(), 90.0, max_relative = 1e-14);
        let q = ExpansionProfile::ramped(0.5, 1.0).unwrap();
        for &target in &[1.05, 1.2, 1.5, 3.0] {
            let t = q.time_at_radius(target).unwrap();
            assert_abs_diff_eq!(q.radius(t).unwrap(), target, epsilon = 1e-10);
        }
    }

    #[test]
    fn background_slice_values() {
        let p = ExpansionProfile::linear(1.0).unwrap();
        let s = background(&p, 1.0).unwrap();
        assert_eq!(s.rho_hat, 1.0 / 8.0);
        let s0 = background(&p, 0.0).unwrap();
        assert_eq!(s0.rho_hat, 1.0);
        assert_eq!(s0.u_hat(0.7), 0.7);
        // Wall compatibility: u_hat(R(t)) = R'(t) for the linear law.
        for &t in &[0.0, 0.4, 2.0, 9.0] {
            let s = background(&p, t).unwrap();
            let radius = p.radius(t).unwrap();
            assert_relative_eq!(s.u_hat(radius), p.radius_rate(t).unwrap(), max_relative = 1e-15);
        }
    }

    #[test]
    fn background_solves_euler_exactly() {
        let p = ExpansionProfile::linear(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..100.0);
            let r = rng.gen_range(0.0..p.radius(t).unwrap());
            assert_abs_diff_eq!(background_mass_residual(&p, t, r).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                background_momentum_residual(&p, t, r).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn background_potential_closed_form() {
        let g = gas(1.2);
        let p = ExpansionProfile::linear(0.1).unwrap();
        // Phi_hat(0, r) = L r^2 / 2.
        for k in 0..=10 {
            let r = k as f64 * 0.1;
            assert_abs_diff_eq!(
                background_potential(&g, &p, 0.0, r).unwrap(),
                0.05 * r * r,
                epsilon = 1e-12
            );
        }
        // d_r Phi_hat = L r / R.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let t = rng.gen_range(0.0..50.0);
            let radius = p.radius(t).unwrap();
            let r = rng.gen_range(0.0..radius);
            assert_abs_diff_eq!(
                background_potential_dr(&g, &p, t, r).unwrap(),
                0.1 * r / radius,
                epsilon = 1e-12
            );
            // Bernoulli: d_t Phi_hat + (d_r Phi_hat)^2 / 2 + h(rho_hat) = B0.
            assert_abs_diff_eq!(
                bernoulli_background_residual(&g, &p, t, r).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
        // d_t Phi_hat agrees with a time difference of Phi_hat.
        for &(t, r) in &[(0.5, 0.3), (3.0, 1.0), (20.0, 2.5)] {
            let d = 1e-6;
            let fd = (background_potential(&g, &p, t + d, r).unwrap()
                - background_potential(&g, &p, t - d, r).unwrap())
                / (2.0 * d);
            assert_relative_eq!(
                fd,
                background_potential_dt(&g, &p, t, r).unwrap(),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn background_potential_rejects_unsupported() {
        let p = ExpansionProfile::linear(0.1).unwrap();
        let g43 = gas(4.0 / 3.0 - 1e-14);
        assert!(matches!(
            background_potential(&g43, &p, 0.0, 0.5),
            Err(Error::Unsupported(_))
        ));
        let ramped = ExpansionProfile::ramped(0.1, 1.0).unwrap();
        assert!(matches!(
            background_potential(&gas(1.2), &ramped, 0.0, 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn density_recovery() {
        let g = gas(1.2);
        let p = ExpansionProfile::linear(0.1).unwrap();
        // Background inputs reproduce rho_hat at any (t, r).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = rng.gen_range(0.0..40.0);
            let r = rng.gen_range(0.0..p.radius(t).unwrap());
            let dt_phi = background_potential_dt(&g, &p, t, r).unwrap();
            let dr_phi = background_potential_dr(&g, &p, t, r).unwrap();
            let rho = g.density_from_potential(dt_phi, dr_phi * dr_phi).unwrap();
            assert_relative_eq!(rho, background(&p, t).unwrap().rho_hat, max_relative = 1e-12);
        }
        assert_relative_eq!(g.density_from_potential(0.0, 0.0).unwrap(), 1.0, max_relative = 1e-12);
        let dt_phi = g.bernoulli_constant() - g.enthalpy(2.0).unwrap();
        assert_relative_eq!(g.density_from_potential(dt_phi, 0.0).unwrap(), 2.0, max_relative = 1e-12);
        assert!(g.density_from_potential(g.bernoulli_constant() + 1.0, 0.0).is_err());
    }
}
