//! Acceptance criteria 1–10. Each criterion prints one PASS or FAIL line;
//! the process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spinrad::cli::config::RawConfig;
use spinrad::cli::render;
use spinrad::constants::{thermal_frequency, C_LIGHT, HBAR};
use spinrad::dynamics::{default_scenario, evolve, timescales};
use spinrad::equilibrium::{
    equilibrium_state, equilibrium_theta, i0_factor, normalized_curve, log_grid, table_repro, CurveMode,
    TABLE_N, TABLE_T2,
};
use spinrad::kernels::{psi_e, psi_m};
use spinrad::rates::{intensity_zero_t, spectral_rate_rotational, spectral_torque_rotational, torque_zero_t, ClosedForm};
use spinrad::{Material, PlateOptics, SystemConfig, ThermalState};

type Outcome = Result<String, String>;

fn sio2() -> Material {
    Material::sio2(5e-6).unwrap()
}

fn config(n: f64, z0: f64, omega: f64, t1: f64, t2: f64) -> SystemConfig {
    SystemConfig::new(
        sio2(),
        PlateOptics::new(n).unwrap(),
        z0,
        omega,
        ThermalState::new(t1, t2).unwrap(),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let csv = render("table", RawConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = (0.0f64, String::new());
    let mut cells = 0;
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let dev: f64 = f[4].parse().map_err(|_| format!("cell without reference: {line}"))?;
        cells += 1;
        if dev.abs() > worst.0 {
            worst = (dev.abs(), format!("n = {}, T2 = {} K", f[1], f[0]));
        }
    }
    verdict(
        cells == 16 && worst.0 <= 0.05 && elapsed < 10.0,
        format!(
            "{cells} cells, max |rel dev| = {:.3} at {}; runtime {elapsed:.2} s",
            worst.0, worst.1
        ),
    )
}

fn equilibrium_constant() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for omega in [1e3, 1e6, 1e9, 1e12] {
        let r = equilibrium_theta(0.0, omega).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.max((r.theta1_star / omega - 2.22).abs());
    }
    let mut worst_i = 0.0f64;
    for n in [3.0, 10.0, 30.0] {
        let m = sio2();
        let cf = ClosedForm::new(&m, &PlateOptics::new(n).unwrap(), 1e-10).map_err(|e| e.to_string())?;
        let psi = psi_e(n, 0.0, 1e-10).map_err(|e| e.to_string())?.value;
        let omega = 1e9;
        let e = equilibrium_state(&cf, 0.0, omega).map_err(|e| e.to_string())?;
        let expected = 0.683 * HBAR * m.slope_e() * m.radius().powi(3) * omega.powi(6) * psi.abs() / C_LIGHT.powi(3);
        worst_i = worst_i.max(rel(e.intensity_eq, expected));
    }
    verdict(
        worst_ratio <= 0.01 && worst_i <= 0.005,
        format!("max |θ1*/Ω − 2.22| = {worst_ratio:.2e}; max intensity deviation from 0.683 law = {worst_i:.2e}"),
    )
}

fn energy_balance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    let draw = |rng: &mut StdRng| {
        if rng.gen_bool(0.1) {
            0.0
        } else {
            10f64.powf(rng.gen_range(6.0..14.0))
        }
    };
    for _ in 0..10_000 {
        let p = -10f64.powf(rng.gen_range(-100.0..-80.0));
        let (t1, t2, w) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let r = ClosedForm::from_prefactor(p).report(t1, t2, w);
        worst = worst.max(r.balance_residual);
    }
    verdict(worst <= 1e-12, format!("10^4 samples, max relative residual {worst:.2e}"))
}

fn zero_temperature_moments() -> Outcome {
    let mut worst = 0.0f64;
    let mut inequality = true;
    let mut samples = 0;
    for n in [1.5, 3.0, 10.0, 30.0, 50.0] {
        for omega in [1e6, 1e9, 1e12] {
            let c = config(n, 1e-12 * C_LIGHT / omega, omega, 0.0, 0.0);
            let cf = ClosedForm::new(&c.material, &c.plate, 1e-12).map_err(|e| e.to_string())?;
            let p = cf.prefactor();
            let i = intensity_zero_t(&c, 1e-10).map_err(|e| e.to_string())?;
            let m = torque_zero_t(&c, 1e-10).map_err(|e| e.to_string())?;
            worst = worst
                .max(rel(i, -p * omega.powi(6) / 15.0))
                .max(rel(m, p * omega.powi(5) / 5.0));
            inequality &= -m * omega > i;
            samples += 1;
        }
    }
    verdict(
        worst <= 1e-8 && inequality,
        format!("{samples} samples, max deviation {worst:.2e}; −MΩ > I on all: {inequality}"),
    )
}

fn spectral_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.gen_range(1.5..50.0);
        let omega = 10f64.powf(rng.gen_range(8.0..12.0));
        let theta = omega * 10f64.powf(rng.gen_range(-1.3..1.3));
        let t = spinrad::constants::temperature_from_frequency(theta);
        let z0 = 1e-10 * C_LIGHT / (n * 40.0 * theta.max(omega));
        let c = config(n, z0, omega, t, t);
        let th = c.theta1();
        let cf = ClosedForm::new(&c.material, &c.plate, 1e-12).map_err(|e| e.to_string())?;
        let i = spectral_rate_rotational(&c, 1e-9).map_err(|e| e.to_string())?;
        let m = spectral_torque_rotational(&c, 1e-9).map_err(|e| e.to_string())?;
        worst = worst
            .max(rel(i, cf.intensity(th, th, omega)))
            .max(rel(m, cf.torque(th, th, omega)));
    }
    verdict(worst <= 1e-6, format!("10 random sets, max deviation {worst:.2e}"))
}

fn kernel_structure() -> Outcome {
    let tol = 1e-10;
    let ev = |f: fn(f64, f64, f64) -> spinrad::Result<spinrad::KernelValue>, n, x| f(n, x, tol).map(|k| k.value);
    let mut problems = Vec::new();

    for x in [0.0, 0.3, 1.0, 5.0, 10.0] {
        let (e, m) = (ev(psi_e, 1.0, x).unwrap(), ev(psi_m, 1.0, x).unwrap());
        if e.abs() >= 1e-12 || m.abs() >= 1e-12 {
            problems.push(format!("ψ(1, {x}) = ({e:e}, {m:e})"));
        }
    }
    let ns: Vec<f64> = [1.0001, 1.001, 1.01, 1.1, 1.5, 2.0, 2.5]
        .into_iter()
        .chain((3..=50).map(f64::from))
        .collect();
    for &n in &ns {
        let (e, m) = (ev(psi_e, n, 0.0).unwrap(), ev(psi_m, n, 0.0).unwrap());
        if !(e < 0.0 && m < 0.0) {
            problems.push(format!("ψ({n}, 0) not negative: ({e:e}, {m:e})"));
        }
        if n >= 3.0 && m.abs() <= e.abs() {
            problems.push(format!("|ψ_m| <= |ψ_e| at n = {n}"));
        }
    }
    let col: Vec<f64> = TABLE_N.iter().map(|&n| ev(psi_e, n, 0.0).unwrap().abs()).collect();
    if !col.windows(2).all(|w| w[1] > w[0]) {
        problems.push("|ψ_e(n, 0)| not increasing over the table columns".into());
    }
    let published = [1.3, 5.9, 19.0, 64.0];
    let mut ratios = Vec::new();
    for j in 1..4 {
        let dev = rel(col[j] / col[0], published[j] / published[0]);
        ratios.push(format!("n = {}: {dev:.3}", TABLE_N[j]));
        if dev > 0.05 {
            problems.push(format!("column ratio at n = {} off by {dev:.3}", TABLE_N[j]));
        }
    }
    let detail = format!("column ratio deviations [{}]", ratios.join(", "));
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn oscillation() -> Outcome {
    let mut counts = Vec::new();
    for n in [3.0, 10.0] {
        let values: Vec<f64> = (0..=200)
            .map(|i| psi_e(n, 10.0 * i as f64 / 200.0, 1e-9).unwrap().value)
            .collect();
        let changes = values.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        counts.push((n, changes));
    }
    verdict(
        counts.iter().all(|c| c.1 >= 1),
        format!("sign changes on x ∈ [0, 10]: {counts:?}"),
    )
}

fn scaling_laws() -> Outcome {
    let m = sio2();
    let grid = table_repro(&m, &TABLE_N, &TABLE_T2, 1e-8).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..TABLE_T2.len() {
        for k in 0..TABLE_T2.len() {
            let expected = (TABLE_T2[i] / TABLE_T2[k]).powi(6);
            for (a, b) in grid[i].iter().zip(&grid[k]) {
                worst = worst.max(rel(a / b, expected));
            }
        }
    }
    let g = i0_factor(&Material::graphite(5e-6).unwrap(), 3.0, 1.0, 1e-8).map_err(|e| e.to_string())?;
    let s = i0_factor(&m, 3.0, 1.0, 1e-8).map_err(|e| e.to_string())?;
    let ratio = g / s;
    verdict(
        worst < 1e-12 && (ratio - 0.319).abs() <= 0.001,
        format!("max T2^6 deviation {worst:.2e}; graphite/SiO2 = {ratio:.4}"),
    )
}

fn curve_properties() -> Outcome {
    let grid = log_grid(1e-2, 1e2, 200);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for material in [sio2(), Material::graphite(5e-6).unwrap()] {
        for n in [1.5, 3.0, 10.0, 50.0] {
            for t2 in [0.1, 1.0, 100.0] {
                let curve = normalized_curve(n, &material, t2, &grid, CurveMode::Equilibrium, 1e-8)
                    .map_err(|e| e.to_string())?;
                monotone &= curve[0].t1_over_t2 >= 1.0;
                monotone &= curve.windows(2).all(|w| w[1].t1_over_t2 > w[0].t1_over_t2);
                let cf = ClosedForm::new(&material, &PlateOptics::new(n).unwrap(), 1e-8).map_err(|e| e.to_string())?;
                let th2 = thermal_frequency(t2).unwrap();
                for p in &curve {
                    let omega = p.omega_over_theta2 * th2;
                    let th1 = p.t1_over_t2 * th2;
                    let work = -cf.torque(th1, th2, omega) * omega;
                    worst = worst.max(rel(cf.intensity(th1, th2, omega), work));
                }
            }
        }
    }
    verdict(
        monotone && worst <= 1e-10,
        format!("T1*/T2 >= 1 and increasing: {monotone}; max |I/(−MΩ) − 1| = {worst:.2e}"),
    )
}

fn dynamics_audit() -> Outcome {
    let (config, body) = default_scenario();
    let ts = timescales(&config, &body).map_err(|e| e.to_string())?;
    let ratio = ts.thermal / ts.spin_down;
    let h = ts.thermal / 100.0;
    let traj = evolve(&config, &body, 20.0 * ts.thermal, h).map_err(|e| e.to_string())?;
    let cf = ClosedForm::for_config(&config).map_err(|e| e.to_string())?;
    let th2 = config.theta2();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for i in 2..traj.len() - 2 {
        let t: Vec<f64> = (i - 2..=i + 2).map(|k| traj[k].time).collect();
        let step = t[3] - t[2];
        if t.windows(2).any(|w| ((w[1] - w[0]) / step - 1.0).abs() > 1e-9) {
            continue;
        }
        let e: Vec<f64> = (i - 2..=i + 2).map(|k| traj[k].kinetic_energy).collect();
        let de_dt = (e[0] - 8.0 * e[1] + 8.0 * e[3] - e[4]) / (12.0 * step);
        let p = &traj[i];
        let th1 = thermal_frequency(p.t_particle).unwrap();
        let loss = cf.intensity(th1, th2, p.omega) + cf.heating(th1, th2, p.omega);
        worst = worst.max((de_dt + loss).abs() / loss.abs());
        checked += 1;
    }
    let tol = 10.0 * spinrad::dynamics::DEFAULT_STEP_REL_TOL;
    verdict(
        worst <= tol && ratio < 1e-2 && checked > 1000,
        format!("{checked} points, max audit deviation {worst:.2e} (limit {tol:.0e}); τ_T/τ_Ω = {ratio:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("table reproduction", table_reproduction),
        ("equilibrium constant", equilibrium_constant),
        ("energy balance", energy_balance),
        ("zero-temperature moments", zero_temperature_moments),
        ("spectral oracle", spectral_oracle),
        ("kernel sign and structure", kernel_structure),
        ("oscillation in x", oscillation),
        ("scaling laws", scaling_laws),
        ("curve properties", curve_properties),
        ("dynamics audit", dynamics_audit),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
