//! Theorem-facing functionals evaluated on solver states: total mass, the
//! density ratio band `rho R^3`, the velocity deviation from the expanding
//! background and its gradient, the weighted first-order energy with its
//! running space-time integral, the sound-speed floor, and log-log decay
//! fits over a series of records.

use crate::error::{Error, Result};
use crate::euler1d::FlowState;
use crate::model::{ExpansionProfile, GasModel};

/// Weight exponents and fit-window geometry for the decay diagnostics.
///
/// `mu = 6 gamma - 9` is pinned by the energy multiplier; `delta` defaults
/// to its largest admissible value `3 (gamma - 1) / 5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    pub mu: f64,
    pub delta: f64,
    /// Fraction of the run, in `log R`, used by the fit window (taken from
    /// the end). The default half skips the transient.
    pub fit_window_fraction: f64,
}

impl DecayConfig {
    pub fn for_gas(g: &GasModel) -> Self {
        DecayConfig {
            mu: 6.0 * g.gamma() - 9.0,
            delta: 3.0 * (g.gamma() - 1.0) / 5.0,
            fit_window_fraction: 0.5,
        }
    }

    pub fn with_delta(g: &GasModel, delta: f64) -> Result<Self> {
        let max_delta = 3.0 * (g.gamma() - 1.0) / 5.0;
        if !(delta > 0.0 && delta <= max_delta) {
            return Err(Error::param(
                "delta",
                format!("must lie in (0, {max_delta}], got {delta}"),
            ));
        }
        Ok(DecayConfig { delta, ..Self::for_gas(g) })
    }
}

/// One time slice of every monitored functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub radius: f64,
    pub mass: f64,
    pub rho_ratio_min: f64,
    pub rho_ratio_max: f64,
    pub dev_u_sup: f64,
    pub dev_grad_sup: f64,
    pub dtphi_sup: f64,
    pub energy_e: f64,
    pub cum_spacetime: f64,
    pub c2_floor_ratio: f64,
}

/// CSV column order; the header line is part of the output contract.
pub const CSV_HEADER: &str =
    "t,R,mass,rho_ratio_min,rho_ratio_max,dev_u_sup,dev_grad_sup,dtphi_sup,energy_E,cum_spacetime,c2_floor_ratio";

impl DiagnosticRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.radius,
            self.mass,
            self.rho_ratio_min,
            self.rho_ratio_max,
            self.dev_u_sup,
            self.dev_grad_sup,
            self.dtphi_sup,
            self.energy_e,
            self.cum_spacetime,
            self.c2_floor_ratio,
        )
    }
}

/// Fields of a record that decay fits and plots can address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordField {
    Mass,
    RhoRatioMin,
    RhoRatioMax,
    DevUSup,
    DevGradSup,
    DtphiSup,
    EnergyE,
    CumSpacetime,
    C2FloorRatio,
}

impl RecordField {
    pub fn get(&self, r: &DiagnosticRecord) -> f64 {
        match self {
            RecordField::Mass => r.mass,
            RecordField::RhoRatioMin => r.rho_ratio_min,
            RecordField::RhoRatioMax => r.rho_ratio_max,
            RecordField::DevUSup => r.dev_u_sup,
            RecordField::DevGradSup => r.dev_grad_sup,
            RecordField::DtphiSup => r.dtphi_sup,
            RecordField::EnergyE => r.energy_e,
            RecordField::CumSpacetime => r.cum_spacetime,
            RecordField::C2FloorRatio => r.c2_floor_ratio,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RecordField::Mass => "mass",
            RecordField::RhoRatioMin => "rho_ratio_min",
            RecordField::RhoRatioMax => "rho_ratio_max",
            RecordField::DevUSup => "dev_u_sup",
            RecordField::DevGradSup => "dev_grad_sup",
            RecordField::DtphiSup => "dtphi_sup",
            RecordField::EnergyE => "energy_E",
            RecordField::CumSpacetime => "cum_spacetime",
            RecordField::C2FloorRatio => "c2_floor_ratio",
        }
    }
}

/// Evaluate every functional on a state. `prev_cum` and `dt_elapsed` chain
/// the running space-time integral from the previous record (pass zero for
/// the first record of a run).
///
/// Quadrature is the shell rule `dS = 4 pi (r^2 + dr^2/12) dr` at cell
/// centers — the exact shell volume, so the mass column telescopes with
/// the solver's conservative update to rounding error.
pub fn record(
    state: &FlowState,
    g: &GasModel,
    p: &ExpansionProfile,
    cfg: &DecayConfig,
    prev_cum: f64,
    dt_elapsed: f64,
) -> Result<DiagnosticRecord> {
    let n = state.n_cells();
    let grid = state.grid();
    let radius = p.radius(state.t)?;
    let l = p.wall_speed();
    let gamma = g.gamma();
    let r3 = radius * radius * radius;
    let rho_hat = 1.0 / r3;
    let h_hat = g.enthalpy(rho_hat)?;
    let dr = grid.dxi() * radius;

    // Pointwise deviation fields.
    let mut dev = Vec::with_capacity(n);
    for i in 0..n {
        dev.push(state.u[i] - l * grid.cell_center(i));
    }

    let mut mass = 0.0;
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    let mut dev_u_sup = 0.0f64;
    let mut dev_grad_sup = 0.0f64;
    let mut dtphi_sup = 0.0f64;
    let mut c2_floor = f64::INFINITY;
    let mut energy_dt = 0.0;
    let mut energy_grad = 0.0;
    let mut cum_increment = 0.0;

    let r_pow = |e: f64| radius.powf(e);
    let four_pi = 4.0 * std::f64::consts::PI;
    for i in 0..n {
        let r = grid.cell_center(i) * radius;
        let shell = four_pi * (r * r + dr * dr / 12.0) * dr;
        let rho = state.rho[i];
        mass += rho * shell;
        let ratio = rho * r3;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);

        // Closed-form material derivative of the deviation potential.
        let dtphi = h_hat - g.enthalpy(rho)? - 0.5 * dev[i] * dev[i];
        dtphi_sup = dtphi_sup.max(dtphi.abs());
        dev_u_sup = dev_u_sup.max(dev[i].abs());

        // Radial derivative by centered differences, one-sided at the ends,
        // plus the tangential piece |dev| / r; both scaled by R.
        let ddev = if i == 0 {
            (dev[1] - dev[0]) / dr
        } else if i == n - 1 {
            (dev[n - 1] - dev[n - 2]) / dr
        } else {
            (dev[i + 1] - dev[i - 1]) / (2.0 * dr)
        };
        dev_grad_sup = dev_grad_sup.max(radius * (ddev.abs() + dev[i].abs() / r));

        let c2 = g.sound_speed2(rho)?;
        c2_floor = c2_floor.min(c2 * r_pow(3.0 * (gamma - 1.0)) / gamma);

        energy_dt += dtphi * dtphi * shell;
        energy_grad += dev[i] * dev[i] * shell;
        cum_increment += (r_pow(cfg.mu - 1.0 - cfg.delta) * dtphi * dtphi
            + r_pow(cfg.mu - 1.0 - 3.0 * (gamma - 1.0)) * dev[i] * dev[i])
            * shell;
    }

    let a_weight = 1.0 + r_pow(-cfg.delta);
    let energy_e =
        r_pow(cfg.mu) * a_weight * energy_dt + r_pow(cfg.mu - 3.0 * (gamma - 1.0)) * energy_grad;

    Ok(DiagnosticRecord {
        t: state.t,
        radius,
        mass,
        rho_ratio_min: ratio_min,
        rho_ratio_max: ratio_max,
        dev_u_sup,
        dev_grad_sup,
        dtphi_sup,
        energy_e,
        cum_spacetime: prev_cum + dt_elapsed * cum_increment,
        c2_floor_ratio: c2_floor,
    })
}

/// Verdict of the density sandwich: every record with `t >= 1` must keep
/// `rho R^3` inside `[1/2, 3/2]`. Margins report the worst distance to
/// each bound (negative when breached).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichVerdict {
    pub pass: bool,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub records_checked: usize,
}

pub fn density_sandwich(series: &[DiagnosticRecord]) -> Result<SandwichVerdict> {
    let late: Vec<&DiagnosticRecord> = series.iter().filter(|r| r.t >= 1.0).collect();
    if late.is_empty() {
        return Err(Error::InsufficientSpan("no records with t >= 1".into()));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for r in &late {
        lower = lower.min(r.rho_ratio_min - 0.5);
        upper = upper.min(1.5 - r.rho_ratio_max);
    }
    Ok(SandwichVerdict {
        pass: lower >= 0.0 && upper >= 0.0,
        lower_margin: lower,
        upper_margin: upper,
        records_checked: late.len(),
    })
}

/// Verdict of the velocity-convergence check: the deviation functional
/// `dev_u_sup + dev_grad_sup` at the final record must fall to one tenth
/// of its maximum over the transient window `t in [1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityVerdict {
    pub pass: bool,
    pub final_value: f64,
    pub transient_max: f64,
    pub ratio: f64,
}

pub fn velocity_convergence(series: &[DiagnosticRecord]) -> Result<VelocityVerdict> {
    let first = series.first().ok_or_else(|| Error::InsufficientSpan("empty series".into()))?;
    let last = series.last().unwrap();
    if last.radius < 10.0 * first.radius * (1.0 - 1e-12) {
        return Err(Error::InsufficientSpan(format!(
            "series spans R {} to {}, less than a decade",
            first.radius, last.radius
        )));
    }
    let transient_max = series
        .iter()
        .filter(|r| r.t >= 1.0 && r.t <= 2.0)
        .map(|r| r.dev_u_sup + r.dev_grad_sup)
        .fold(f64::NAN, f64::max);
    if !transient_max.is_finite() {
        return Err(Error::InsufficientSpan("no records with t in [1, 2]".into()));
    }
    let final_value = last.dev_u_sup + last.dev_grad_sup;
    let ratio = final_value / transient_max;
    Ok(VelocityVerdict { pass: ratio <= 0.1, final_value, transient_max, ratio })
}

/// Least-squares fit of `log(field)` against `log R` over the configured
/// tail window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub std_error: f64,
    pub n_points: usize,
    pub window_r_min: f64,
}

pub fn decay_fit(
    series: &[DiagnosticRecord],
    field: RecordField,
    cfg: &DecayConfig,
) -> Result<DecayFit> {
    let first = series.first().ok_or_else(|| Error::FitUndefined("empty series".into()))?;
    let last = series.last().unwrap();
    if !(last.radius > first.radius) {
        return Err(Error::FitUndefined("series does not span any radius growth".into()));
    }
    let log_lo = first.radius.ln();
    let log_hi = last.radius.ln();
    let threshold =
        (log_lo + (1.0 - cfg.fit_window_fraction) * (log_hi - log_lo)).exp();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in series.iter().filter(|r| r.radius >= threshold) {
        let v = field.get(r);
        if !(v > 0.0) {
            return Err(Error::FitUndefined(format!(
                "{} is nonpositive ({v}) inside the fit window",
                field.name()
            )));
        }
        xs.push(r.radius.ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < 20 {
        return Err(Error::FitUndefined(format!(
            "only {n} records in the fit window, need at least 20"
        )));
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let std_error = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(DecayFit { exponent: slope, std_error, n_points: n, window_r_min: threshold })
}

/// Verdict of the sound-speed floor: `c^2 R^(3 (gamma - 1)) / gamma` must
/// stay in `[1/2, 2]` at every record (no vacuum in finite time, density
/// decaying at exactly the background rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorVerdict {
    pub pass: bool,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn vacuum_floor(series: &[DiagnosticRecord]) -> Result<FloorVerdict> {
    if series.is_empty() {
        return Err(Error::InsufficientSpan("empty series".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in series {
        lo = lo.min(r.c2_floor_ratio);
        hi = hi.max(r.c2_floor_ratio);
    }
    Ok(FloorVerdict { pass: lo >= 0.5 && hi <= 2.0, min_ratio: lo, max_ratio: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler1d::{init, Grid, InitialData};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gas() -> GasModel {
        GasModel::new(1.2).unwrap()
    }

    fn profile() -> ExpansionProfile {
        ExpansionProfile::linear(0.1).unwrap()
    }

    #[test]
    fn background_record_is_null() {
        let g = gas();
        let p = profile();
        let grid = Grid::new(128).unwrap();
        let s = init(&g, &p, &grid, &InitialData::background()).unwrap();
        let cfg = DecayConfig::for_gas(&g);
        let r = record(&s, &g, &p, &cfg, 0.0, 0.0).unwrap();
        assert_eq!(r.dev_u_sup, 0.0);
        assert_eq!(r.dtphi_sup, 0.0);
        assert_eq!(r.energy_e, 0.0);
        assert_eq!(r.rho_ratio_min, 1.0);
        assert_eq!(r.rho_ratio_max, 1.0);
        assert_relative_eq!(r.c2_floor_ratio, 1.0, max_relative = 1e-13);
        // Mass of the unit-density unit ball.
        assert_relative_eq!(
            r.mass,
            4.0 / 3.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn material_derivative_sign_tracks_rarefaction() {
        // rho below background with u on the background raises the closed
        // form above zero (h is monotone).
        let g = gas();
        let p = profile();
        let grid = Grid::new(64).unwrap();
        let mut s = init(&g, &p, &grid, &InitialData::background()).unwrap();
        for rho in s.rho.iter_mut() {
            *rho = 0.9;
        }
        let cfg = DecayConfig::for_gas(&g);
        let r = record(&s, &g, &p, &cfg, 0.0, 0.0).unwrap();
        let h_hat = g.enthalpy(1.0).unwrap();
        let expected = h_hat - g.enthalpy(0.9).unwrap();
        assert!(expected > 0.0);
        assert_relative_eq!(r.dtphi_sup, expected, max_relative = 1e-12);
    }

    #[test]
    fn energy_quadrature_refines_at_second_order() {
        // Smooth analytic deviation fields sampled on three grids; the
        // shell-rule energy must converge at order >= 1.8.
        let g = gas();
        let p = profile();
        let cfg = DecayConfig::for_gas(&g);
        let energy_for = |n: usize| -> f64 {
            let grid = Grid::new(n).unwrap();
            let mut s = init(&g, &p, &grid, &InitialData::background()).unwrap();
            for i in 0..n {
                let xi = grid.cell_center(i);
                s.rho[i] = 1.0 + 0.01 * (std::f64::consts::PI * xi).sin();
                s.u[i] = 0.1 * xi + 0.01 * (2.0 * std::f64::consts::PI * xi).sin();
            }
            record(&s, &g, &p, &cfg, 0.0, 0.0).unwrap().energy_e
        };
        let e100 = energy_for(100);
        let e200 = energy_for(200);
        let e400 = energy_for(400);
        let order = ((e100 - e400).abs() / (e200 - e400).abs()).log2();
        assert!(order >= 1.8, "quadrature order {order}");
    }

    #[test]
    fn cumulative_integral_is_nondecreasing() {
        let g = gas();
        let p = profile();
        let grid = Grid::new(64).unwrap();
        let mut s = init(&g, &p, &grid, &InitialData::background()).unwrap();
        s.rho[10] = 1.05;
        let cfg = DecayConfig::for_gas(&g);
        let r0 = record(&s, &g, &p, &cfg, 0.0, 0.0).unwrap();
        let r1 = record(&s, &g, &p, &cfg, r0.cum_spacetime, 0.1).unwrap();
        let r2 = record(&s, &g, &p, &cfg, r1.cum_spacetime, 0.1).unwrap();
        assert!(r1.cum_spacetime >= r0.cum_spacetime);
        assert!(r2.cum_spacetime >= r1.cum_spacetime);
    }

    fn synthetic_series(power: f64) -> Vec<DiagnosticRecord> {
        let p = profile();
        (0..200)
            .map(|k| {
                let t = k as f64 * 0.5;
                let radius = p.radius(t).unwrap();
                let v = radius.powf(power);
                DiagnosticRecord {
                    t,
                    radius,
                    mass: 1.0,
                    rho_ratio_min: 1.0,
                    rho_ratio_max: 1.0,
                    dev_u_sup: v,
                    dev_grad_sup: v,
                    dtphi_sup: v,
                    energy_e: v,
                    cum_spacetime: 1.0 - 1.0 / radius,
                    c2_floor_ratio: 1.0,
                }
            })
            .collect()
    }

    #[test]
    fn decay_fit_recovers_exact_power_laws() {
        let g = gas();
        let cfg = DecayConfig::for_gas(&g);
        let series = synthetic_series(-2.0);
        let fit = decay_fit(&series, RecordField::DevUSup, &cfg).unwrap();
        assert_abs_diff_eq!(fit.exponent, -2.0, epsilon = 1e-9);
        assert!(fit.std_error < 1e-9);
        assert!(fit.n_points >= 20);
    }

    #[test]
    fn decay_fit_rejects_bad_windows() {
        let g = gas();
        let cfg = DecayConfig::for_gas(&g);
        let mut series = synthetic_series(-1.0);
        series.truncate(30); // leaves < 20 records in the tail half
        assert!(matches!(
            decay_fit(&series, RecordField::DevUSup, &cfg),
            Err(Error::FitUndefined(_))
        ));
        let mut flat = synthetic_series(-1.0);
        for r in flat.iter_mut() {
            r.dtphi_sup = 0.0;
        }
        assert!(matches!(
            decay_fit(&flat, RecordField::DtphiSup, &cfg),
            Err(Error::FitUndefined(_))
        ));
    }

    #[test]
    fn sandwich_and_floor_verdicts() {
        let series = synthetic_series(-0.5);
        let s = density_sandwich(&series).unwrap();
        assert!(s.pass);
        assert_abs_diff_eq!(s.lower_margin, 0.5, epsilon = 1e-14);

        let mut bad = synthetic_series(-0.5);
        for r in bad.iter_mut() {
            r.rho_ratio_max = 1.6;
        }
        assert!(!density_sandwich(&bad).unwrap().pass);

        // Sandwich needs records past t = 1.
        let early: Vec<DiagnosticRecord> =
            synthetic_series(-0.5).into_iter().filter(|r| r.t < 1.0).collect();
        assert!(density_sandwich(&early).is_err());

        assert!(vacuum_floor(&series).unwrap().pass);
        let mut sunk = synthetic_series(-0.5);
        sunk[7].c2_floor_ratio = 0.4;
        assert!(!vacuum_floor(&sunk).unwrap().pass);
    }

    #[test]
    fn velocity_verdict_needs_a_decade() {
        let series = synthetic_series(-2.0);
        let v = velocity_convergence(&series).unwrap();
        assert!(v.pass, "ratio {}", v.ratio);

        let short: Vec<DiagnosticRecord> =
            synthetic_series(-2.0).into_iter().take(40).collect();
        assert!(matches!(
            velocity_convergence(&short),
            Err(Error::InsufficientSpan(_))
        ));

        let slow = synthetic_series(-0.1);
        assert!(!velocity_convergence(&slow).unwrap().pass);
    }

    #[test]
    fn csv_row_matches_header_arity() {
        let series = synthetic_series(-1.0);
        let row = series[3].to_csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        // Lossless: fields round-trip through the printed form.
        let t: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(t, series[3].t);
    }
}
