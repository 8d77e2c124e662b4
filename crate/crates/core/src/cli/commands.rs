use rayon::prelude::*;

use super::config::{self, RawConfig, Resolver};
use super::units::{format_number, Kind, Spacing};
use super::CliError;
use crate::constants::{erg_per_s_to_watts, thermal_frequency};
use crate::dynamics::{self, BodyProperties, EvolveOptions, HeatCapacity};
use crate::equilibrium::{self, CurveMode, TABLE_N, TABLE_T2, TABULATED_I0_SIO2_50NM};
use crate::kernels::{self, PlateOptics, DEFAULT_REL_TOL};
use crate::material::{validity_check, Material, ThermalState};
use crate::rates::{retardation_parameter, ClosedForm, SystemConfig, RETARDATION_WARNING};

/// CSV text: header comment, column line and rows.
struct Table {
    columns: &'static str,
    rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    format_number(v)
}

fn document(command: &str, resolver: &Resolver, table: Table) -> String {
    let mut out = format!("# spinrad {command}\n");
    for (k, v) in resolver.header() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(table.columns);
    out.push('\n');
    for row in table.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Runs `command` on a merged configuration and returns the CSV document.
pub fn render(command: &str, raw: RawConfig) -> Result<String, CliError> {
    let mut r = Resolver::new(raw);
    let table = match command {
        "psi" => psi(&mut r)?,
        "rates" => rates(&mut r)?,
        "equilibrium" => equilibrium_cmd(&mut r)?,
        "curve" => curve(&mut r)?,
        "table" => table(&mut r)?,
        "dynamics" => dynamics_cmd(&mut r)?,
        "sweep" => sweep(&mut r)?,
        other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
    };
    r.check_unused_flags(command)?;
    Ok(document(command, &r, table))
}

fn rel_tol(r: &mut Resolver) -> Result<f64, CliError> {
    r.quantity("rel_tol", Kind::Plain, DEFAULT_REL_TOL, config::tolerance)
}

fn material(r: &mut Resolver) -> Result<Material, CliError> {
    material_with(r, true)
}

/// Reads the material; the radius is left at 1 cm when it is swept.
fn material_with(r: &mut Resolver, read_radius: bool) -> Result<Material, CliError> {
    let name = r.text("material", "SiO2");
    if name.is_empty() || name.contains(['#', ',', '=']) {
        return Err(r.field_error("material", format!("invalid material name '{name}'")));
    }
    let radius = if read_radius {
        r.quantity("radius", Kind::Length, 5e-6, config::positive)?
    } else {
        1.0
    };
    let slope_e = r.optional("slope_e", Kind::Time, config::positive)?;
    let sigma = r.optional("sigma", Kind::Frequency, config::positive)?;
    let slope_m = r.optional("slope_m", Kind::Time, config::positive)?;
    let base = match (slope_e, sigma) {
        (Some(_), Some(_)) => return Err(r.field_error("sigma", "give either slope_e or sigma, not both")),
        (Some(a), None) => Material::new(name.clone(), radius, a)?,
        (None, Some(s)) => Material::from_conductivity(name.clone(), radius, s)?,
        (None, None) => Material::preset(&name, radius).map_err(|_| {
            r.field_error(
                "material",
                format!("unknown preset '{name}'; set slope_e or sigma for a custom material"),
            )
        })?,
    };
    r.record("material", base.name().to_string());
    Ok(match slope_m {
        Some(a) => base.with_magnetic_slope(a)?,
        None => base,
    })
}

fn plate(r: &mut Resolver) -> Result<PlateOptics, CliError> {
    Ok(PlateOptics::new(r.quantity("n", Kind::Plain, 3.0, config::refractive_index)?)?)
}

fn temperature(r: &mut Resolver, key: &str, default: f64) -> Result<f64, CliError> {
    r.quantity(key, Kind::Temperature, default, config::non_negative)
}

/// Rates configuration; `skip` leaves one value to be swept.
struct Scenario {
    material: Material,
    n: f64,
    z0: f64,
    omega: f64,
    t1: f64,
    t2: f64,
}

impl Scenario {
    fn resolve(r: &mut Resolver, skip: Option<&str>) -> Result<Self, CliError> {
        let read = |r: &mut Resolver, key: &str, f: &dyn Fn(&mut Resolver) -> Result<f64, CliError>| {
            if skip == Some(key) {
                Ok(f64::NAN)
            } else {
                f(r)
            }
        };
        let material = material_with(r, skip != Some("radius"))?;
        let n = read(r, "n", &|r| r.quantity("n", Kind::Plain, 3.0, config::refractive_index))?;
        let z0 = read(r, "z0", &|r| r.quantity("z0", Kind::Length, 1e-4, config::positive))?;
        let omega = read(r, "omega", &|r| r.quantity("omega", Kind::Frequency, 0.0, config::non_negative))?;
        let t1 = read(r, "t1", &|r| temperature(r, "t1", 0.0))?;
        let t2 = read(r, "t2", &|r| temperature(r, "t2", 0.0))?;
        Ok(Scenario {
            material,
            n,
            z0,
            omega,
            t1,
            t2,
        })
    }

    fn system(&self) -> Result<SystemConfig, CliError> {
        Ok(SystemConfig::new(
            self.material.clone(),
            PlateOptics::new(self.n)?,
            self.z0,
            self.omega,
            ThermalState::new(self.t1, self.t2)?,
        )?)
    }
}

fn warn_validity(config: &SystemConfig) {
    let v = validity_check(&config.material, config.z0, config.omega_rot, config.thermal);
    for (what, c) in [
        ("R/z0", v.size_vs_distance),
        ("ΩR/c", v.rim_speed),
        ("R over thermal wavelength", v.thermal_wavelength),
    ] {
        if !c.passed {
            log::warn!("{what} = {:.3e} is not small; the point-dipole model is outside its range", c.ratio);
        }
    }
    let ret = retardation_parameter(config);
    if ret > RETARDATION_WARNING {
        log::warn!("n·z0·max(Ω, θ1, θ2)/c = {ret:.3e}; the small-distance rates are outside their range");
    }
}

fn rate_row(config: &SystemConfig, rel_tol: f64) -> Result<Vec<String>, CliError> {
    warn_validity(config);
    let cf = ClosedForm::new(&config.material, &config.plate, rel_tol)?;
    let rep = cf.report(config.theta1(), config.theta2(), config.omega_rot);
    Ok(vec![
        num(rep.intensity_watts()),
        num(rep.torque),
        num(rep.heating_watts()),
        num(rep.balance_residual),
    ])
}

fn psi(r: &mut Resolver) -> Result<Table, CliError> {
    let n_grid = r.grid("n", Kind::Plain, "3", config::refractive_index)?;
    let x_grid = r.grid("x", Kind::Plain, "0", config::non_negative)?;
    let spacing = r.spacing(Spacing::Linear)?;
    let tol = rel_tol(r)?;
    let ns = n_grid.values(spacing).map_err(|m| r.field_error("n", m))?;
    let xs = x_grid.values(spacing).map_err(|m| r.field_error("x", m))?;
    let cells: Vec<(f64, f64)> = ns.iter().flat_map(|&n| xs.iter().map(move |&x| (n, x))).collect();
    let rows = cells
        .par_iter()
        .map(|&(n, x)| {
            let e = kernels::psi_e(n, x, tol)?;
            let m = kernels::psi_m(n, x, tol)?;
            Ok(vec![
                num(n),
                num(x),
                num(e.value),
                num(m.value),
                num(e.abs_error_estimate),
                num(m.abs_error_estimate),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table {
        columns: "n,x,psi_e,psi_m,err_e,err_m",
        rows,
    })
}

fn rates(r: &mut Resolver) -> Result<Table, CliError> {
    let scenario = Scenario::resolve(r, None)?;
    let tol = rel_tol(r)?;
    Ok(Table {
        columns: "I_W,Mz_erg,dQdt_W,residual",
        rows: vec![rate_row(&scenario.system()?, tol)?],
    })
}

fn equilibrium_cmd(r: &mut Resolver) -> Result<Table, CliError> {
    let material = material(r)?;
    let plate = plate(r)?;
    let omega = r.quantity("omega", Kind::Frequency, 0.0, config::non_negative)?;
    let t2 = temperature(r, "t2", 0.0)?;
    let tol = rel_tol(r)?;
    let cf = ClosedForm::new(&material, &plate, tol)?;
    let theta2 = thermal_frequency(t2)?;
    let e = equilibrium::equilibrium_state(&cf, theta2, omega)?;
    let ratio = if omega > 0.0 { num(e.theta1_star / omega) } else { String::new() };
    Ok(Table {
        columns: "theta1_star,T1_K,theta1_over_omega,I_W,Mz_erg,iterations,residual",
        rows: vec![vec![
            num(e.theta1_star),
            num(e.t1_star),
            ratio,
            num(erg_per_s_to_watts(e.intensity_eq)),
            num(cf.torque(e.theta1_star, theta2, omega)),
            e.iterations.to_string(),
            num(e.residual),
        ]],
    })
}

fn curve(r: &mut Resolver) -> Result<Table, CliError> {
    let material = material(r)?;
    let n = r.quantity("n", Kind::Plain, 3.0, |v| {
        if v > 1.0 {
            Ok(())
        } else {
            Err(format!("refractive index must exceed 1 for a normalized curve, got {}", num(v)))
        }
    })?;
    let t2 = r.quantity("t2", Kind::Temperature, 1.0, config::positive)?;
    let mode = r.choice(
        "mode",
        "equilibrium",
        |s| match s.trim() {
            "equilibrium" => Ok(CurveMode::Equilibrium),
            "fixed" => Ok(CurveMode::FixedT1EqualsT2),
            other => Err(format!("unknown mode '{other}' (equilibrium or fixed)")),
        },
        |m| match m {
            CurveMode::Equilibrium => "equilibrium".into(),
            CurveMode::FixedT1EqualsT2 => "fixed".into(),
        },
    )?;
    let points = r.count("points", 200, 2, 100_000)?;
    let lo = r.quantity("ratio_min", Kind::Plain, 1e-2, config::positive)?;
    let hi = r.quantity("ratio_max", Kind::Plain, 1e2, config::positive)?;
    if hi <= lo {
        return Err(r.field_error("ratio_max", "must exceed ratio_min"));
    }
    let tol = rel_tol(r)?;
    let grid = equilibrium::log_grid(lo, hi, points);
    let curve = equilibrium::normalized_curve(n, &material, t2, &grid, mode, tol)?;
    Ok(Table {
        columns: "omega_over_theta2,i_over_i0,t1_over_t2",
        rows: curve
            .iter()
            .map(|p| vec![num(p.omega_over_theta2), num(p.intensity_over_i0), num(p.t1_over_t2)])
            .collect(),
    })
}

fn published_value(material: &Material, n: f64, t2: f64) -> Option<f64> {
    let reference = material.name() == "SiO2"
        && material.radius() == 5e-6
        && material.slope_e() == 3.6e-15
        && material.slope_m().is_none();
    if !reference {
        return None;
    }
    let col = TABLE_N.iter().position(|&v| v == n)?;
    let row = TABLE_T2.iter().position(|&v| v == t2)?;
    Some(TABULATED_I0_SIO2_50NM[row][col])
}

fn table(r: &mut Resolver) -> Result<Table, CliError> {
    let material = material(r)?;
    let n_list = r.list("n_list", Kind::Plain, &TABLE_N, |v| {
        if v > 1.0 {
            Ok(())
        } else {
            Err(format!("refractive index must exceed 1, got {}", num(v)))
        }
    })?;
    let t2_list = r.list("t2_list", Kind::Temperature, &TABLE_T2, config::positive)?;
    let tol = rel_tol(r)?;
    let grid = equilibrium::table_repro(&material, &n_list, &t2_list, tol)?;
    let mut rows = Vec::new();
    for (i, &t2) in t2_list.iter().enumerate() {
        for (j, &n) in n_list.iter().enumerate() {
            let i0 = grid[i][j];
            let (published, dev) = match published_value(&material, n, t2) {
                Some(p) => (num(p), num(i0 / p - 1.0)),
                None => (String::new(), String::new()),
            };
            rows.push(vec![num(t2), num(n), num(i0), published, dev]);
        }
    }
    Ok(Table {
        columns: "t2_K,n,I0_W,published_W,rel_dev",
        rows,
    })
}

/// Default trajectory length in units of the thermal relaxation time.
const DEFAULT_THERMAL_TIMES: f64 = 20.0;
/// Default number of output intervals.
const DEFAULT_SAMPLES: f64 = 200.0;

fn dynamics_cmd(r: &mut Resolver) -> Result<Table, CliError> {
    let scenario = Scenario::resolve(r, None)?;
    let config = scenario.system()?;
    let preset = BodyProperties::for_material(&config.material).ok();
    let moment = r.optional("moment_of_inertia", Kind::Plain, config::positive)?;
    let moment = match (moment, &preset) {
        (Some(v), _) => v,
        (None, Some(b)) => b.moment_of_inertia,
        (None, None) => {
            return Err(r.field_error("moment_of_inertia", "required for a material without a preset composition"));
        }
    };
    r.record_number("moment_of_inertia", moment, Kind::Plain);
    let capacity = r.optional("heat_capacity", Kind::Plain, config::positive)?;
    let capacity = match (capacity, &preset) {
        (Some(v), _) => v,
        (None, Some(b)) => b.heat_capacity.at(0.0),
        (None, None) => {
            return Err(r.field_error("heat_capacity", "required for a material without a preset composition"));
        }
    };
    r.record_number("heat_capacity", capacity, Kind::Plain);
    let body = BodyProperties::new(moment, HeatCapacity::Constant(capacity))?;

    let t_end = match r.optional("t_end", Kind::Time, config::positive)? {
        Some(v) => v,
        None => {
            let v = if config.omega_rot > 0.0 {
                DEFAULT_THERMAL_TIMES * dynamics::timescales(&config, &body)?.thermal
            } else if scenario.t1 == scenario.t2 {
                1.0
            } else {
                return Err(r.field_error("t_end", "required when omega = 0"));
            };
            r.record_number("t_end", v, Kind::Time);
            v
        }
    };
    let stride = match r.optional("stride", Kind::Time, config::positive)? {
        Some(v) => v,
        None => {
            let v = t_end / DEFAULT_SAMPLES;
            r.record_number("stride", v, Kind::Time);
            v
        }
    };
    let step_tol = r.quantity("step_tol", Kind::Plain, dynamics::DEFAULT_STEP_REL_TOL, |v| {
        if v > 0.0 && v <= 1e-3 {
            Ok(())
        } else {
            Err(format!("must lie in (0, 1e-3], got {}", num(v)))
        }
    })?;
    let experimental = r.boolean("experimental_large_x", false)?;
    if experimental {
        log::warn!("experimental large-x mode: trajectory uses the small-distance rates outside their range");
    } else {
        warn_validity(&config);
    }
    let traj = dynamics::evolve_with(
        &config,
        &body,
        t_end,
        stride,
        EvolveOptions {
            rel_tol: step_tol,
            experimental_large_x: experimental,
        },
    )?;
    Ok(Table {
        columns: "t_s,omega,T1_K,I_W,E_kin_erg",
        rows: traj
            .iter()
            .map(|p| {
                vec![
                    num(p.time),
                    num(p.omega),
                    num(p.t_particle),
                    num(erg_per_s_to_watts(p.intensity)),
                    num(p.kinetic_energy),
                ]
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Axis {
    Radius,
    N,
    Z0,
    Omega,
    T1,
    T2,
}

impl Axis {
    fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "radius" => Ok(Axis::Radius),
            "n" => Ok(Axis::N),
            "z0" => Ok(Axis::Z0),
            "omega" => Ok(Axis::Omega),
            "t1" => Ok(Axis::T1),
            "t2" => Ok(Axis::T2),
            other => Err(format!("cannot sweep '{other}' (radius, n, z0, omega, t1 or t2)")),
        }
    }

    fn key(self) -> &'static str {
        match self {
            Axis::Radius => "radius",
            Axis::N => "n",
            Axis::Z0 => "z0",
            Axis::Omega => "omega",
            Axis::T1 => "t1",
            Axis::T2 => "t2",
        }
    }

    fn kind(self) -> Kind {
        match self {
            Axis::Radius | Axis::Z0 => Kind::Length,
            Axis::N => Kind::Plain,
            Axis::Omega => Kind::Frequency,
            Axis::T1 | Axis::T2 => Kind::Temperature,
        }
    }

    fn columns(self) -> &'static str {
        match self {
            Axis::Radius => "radius_cm,I_W,Mz_erg,dQdt_W,residual",
            Axis::N => "n,I_W,Mz_erg,dQdt_W,residual",
            Axis::Z0 => "z0_cm,I_W,Mz_erg,dQdt_W,residual",
            Axis::Omega => "omega,I_W,Mz_erg,dQdt_W,residual",
            Axis::T1 => "t1_K,I_W,Mz_erg,dQdt_W,residual",
            Axis::T2 => "t2_K,I_W,Mz_erg,dQdt_W,residual",
        }
    }

    fn check(self, v: f64) -> Result<(), String> {
        match self {
            Axis::Radius | Axis::Z0 => config::positive(v),
            Axis::N => config::refractive_index(v),
            Axis::Omega | Axis::T1 | Axis::T2 => config::non_negative(v),
        }
    }
}

fn sweep(r: &mut Resolver) -> Result<Table, CliError> {
    let axis = r.choice(
        "axis",
        "",
        |s| {
            if s.is_empty() {
                Err("an axis is required (radius, n, z0, omega, t1 or t2)".into())
            } else {
                Axis::parse(s)
            }
        },
        |a| a.key().to_string(),
    )?;
    if r.is_set(axis.key()) {
        return Err(r.field_error(axis.key(), "is the swept axis; give its range in 'values'"));
    }
    let scenario = Scenario::resolve(r, Some(axis.key()))?;
    if !r.is_set("values") {
        return Err(r.field_error("values", "a sweep grid start:stop:count is required"));
    }
    let grid = r.grid("values", axis.kind(), "", |v| axis.check(v))?;
    let spacing = r.spacing(Spacing::Linear)?;
    let tol = rel_tol(r)?;
    let values = grid.values(spacing).map_err(|m| r.field_error("values", m))?;
    let rows = values
        .par_iter()
        .map(|&v| {
            let mut s = Scenario {
                material: scenario.material.clone(),
                ..scenario
            };
            match axis {
                Axis::Radius => s.material = s.material.with_radius(v)?,
                Axis::N => s.n = v,
                Axis::Z0 => s.z0 = v,
                Axis::Omega => s.omega = v,
                Axis::T1 => s.t1 = v,
                Axis::T2 => s.t2 = v,
            }
            let mut row = vec![num(v)];
            row.extend(rate_row(&s.system()?, tol)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table {
        columns: axis.columns(),
        rows,
    })
}
