use std::path::Path;

use wavetrack::calibration::{amplification, calibrate as measure, stability_ratio};
use wavetrack::control::{synthesize, time_threshold, ControlProblem};
use wavetrack::engine::{data_functional, run, RunSpec};
use wavetrack::export::{report, write_step};
use wavetrack::functionals::{check_monotone, entropy_residual, glimm_setup, test_family, weak_residual, FunctionalSeries, GlimmWeights};
use wavetrack::hypsys::{check_assumptions, speed_bounds, SPEED_SAMPLES};
use wavetrack::splitting::{he_convergence_study, StudyData};
use wavetrack::zerowave::{audit, make_rightward, swap_view};
use wavetrack::{FrontSolution, Mode, Orientation};

use crate::config::{Config, Resolved};
use crate::output::{create, run_dir, write_record, write_text};
use crate::CliError;

/// Ball points sampled by `check-system`.
const ASSUMPTION_SAMPLES: usize = 2000;

/// Entropy residuals above `-ENTROPY_ROUNDOFF` count as quadrature noise.
const ENTROPY_ROUNDOFF: f64 = 1e-9;

fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Config::parse(&text)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn finish(dir: &Path, lines: &[(&str, String)]) -> Result<(), CliError> {
    let text = report(lines);
    write_text(dir, "report.txt", &text)?;
    print!("{text}");
    println!("output = {}", dir.display());
    Ok(())
}

fn require_forward(cfg: &Config, command: &str) -> Result<(), CliError> {
    if cfg.run.orientation != crate::config::OrientationName::Forward {
        return Err(CliError::Config(format!("{command} needs run.orientation = \"forward\"")));
    }
    Ok(())
}

fn spec_for(cfg: &Config, r: &Resolved, mode: Mode) -> Result<RunSpec, CliError> {
    let length = r.ubar.b - r.ubar.a;
    let mut spec = RunSpec::new(r.params.clone(), mode, length, cfg.run.horizon, r.ubar.clone(), r.g1.clone(), r.g2.clone());
    spec.orientation = cfg.run.orientation.into();
    let c = cfg.run.glimm_constant.unwrap_or(1.0);
    spec.glimm = Some(glimm_setup(&r.sys, length, GlimmWeights::from_constant(c))?);
    Ok(spec)
}

fn record_lines(sol: &FrontSolution) -> Vec<(&'static str, String)> {
    vec![
        ("events", sol.events.len().to_string()),
        ("segments", sol.segments.len().to_string()),
        ("np_max", num(sol.np_max)),
        ("final_tv", num(sol.final_slice.tv())),
        ("final_l1", num(sol.final_slice.l1_norm())),
    ]
}

pub fn simulate(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let r = cfg.resolve()?;
    let mode: Mode = cfg.run.mode.into();
    let spec = spec_for(&cfg, &r, mode)?;
    let setup = spec.glimm.clone().expect("spec_for sets a setup");
    let lambda = data_functional(&r.sys, &r.ubar, &r.g1, &r.g2);
    let sol = run(&r.sys, spec)?;
    let dir = run_dir(path, out, "simulate")?;
    write_record(&dir, &sol, &cfg.slice_times())?;
    let mono = check_monotone(&FunctionalSeries::from_solution(&sol, &setup), None);
    let family = test_family(sol.horizon, sol.length);
    let mut lines = vec![
        ("system", r.sys.name.clone()),
        ("orientation", Orientation::from(cfg.run.orientation).label().to_string()),
        ("mode", mode.label().to_string()),
        ("eps", num(r.params.eps)),
        ("h", num(r.params.h)),
        ("horizon", num(sol.horizon)),
        ("length", num(sol.length)),
        ("lambda", num(lambda)),
    ];
    lines.extend(record_lines(&sol));
    lines.extend([
        ("glimm_events_checked", mono.events_checked.to_string()),
        ("glimm_violations", mono.violations.len().to_string()),
        ("glimm_law_margin", num(mono.law_margin)),
        ("split_growth_constant", num(mono.growth_constant)),
        ("weak_residual", num(weak_residual(&r.sys, &sol, &family))),
    ]);
    if let Ok(e) = entropy_residual(&r.sys, &sol, &family) {
        lines.push(("entropy_residual", num(e)));
    }
    finish(&dir, &lines)
}

pub fn swap_check(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    require_forward(&cfg, "swap-check")?;
    let r = cfg.resolve()?;
    let fwd = run(&r.sys, spec_for(&cfg, &r, Mode::Splitting)?)?;
    let view = swap_view(&fwd)?;
    let rw = make_rightward(&r.sys)?;
    let rep = audit(&rw.sys, &view)?;
    let dir = run_dir(path, out, "swap-check")?;
    write_record(&dir, &view, &[])?;
    let fdir = dir.join("forward");
    std::fs::create_dir_all(&fdir)?;
    write_record(&fdir, &fwd, &cfg.slice_times())?;
    let lines = vec![
        ("system", rw.sys.name.clone()),
        ("segments", rep.segments.to_string()),
        ("zero_segments", rep.zero_segments.to_string()),
        ("bad_states", rep.bad_states.to_string()),
        ("max_gap", num(rep.max_gap)),
        ("max_zero_residual", num(rep.max_zero_residual)),
        ("misplaced_zero", rep.misplaced_zero.to_string()),
        ("uncovered_lines", rep.uncovered_lines.to_string()),
        ("max_wave_excess", num(rep.max_wave_excess)),
        ("max_speed_excess", num(rep.max_speed_excess)),
        ("max_rarefaction_ratio", num(rep.max_rarefaction_ratio)),
        ("np_speeds", rep.np_speeds.len().to_string()),
        ("np_max", num(rep.np_max)),
        ("c_a", num(rep.c_a)),
        ("passed", rep.passed().to_string()),
    ];
    finish(&dir, &lines)?;
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::Check("swapped record fails the audit".into()))
    }
}

pub fn stability(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let r = cfg.resolve()?;
    if r.ubar.breaks.is_empty() {
        return Err(CliError::Config("stability needs initial data with at least one jump".into()));
    }
    let mode: Mode = cfg.run.mode.into();
    // Shift the largest jump so the data differ by `perturbation` in L¹.
    let jumps: Vec<f64> = r.ubar.states.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    let i = (0..jumps.len()).max_by(|&a, &b| jumps[a].total_cmp(&jumps[b])).expect("at least one jump");
    let shift = cfg.run.perturbation / jumps[i];
    let lower = if i == 0 { r.ubar.a } else { r.ubar.breaks[i - 1] };
    let upper = r.ubar.breaks.get(i + 1).copied().unwrap_or(r.ubar.b);
    let x = r.ubar.breaks[i];
    let moved = if x + shift < upper {
        x + shift
    } else if x - shift > lower {
        x - shift
    } else {
        return Err(CliError::Config("run.perturbation too large for the data".into()));
    };
    let mut rb = r.clone();
    rb.ubar.breaks[i] = moved;
    let a = run(&r.sys, spec_for(&cfg, &r, mode)?)?;
    let b = run(&r.sys, spec_for(&cfg, &rb, mode)?)?;
    let dir = run_dir(path, out, "stability")?;
    {
        let mut w = csv::Writer::from_writer(create(&dir, "stability.csv")?);
        w.write_record(["t", "l1"]).map_err(|e| CliError::Io(e.to_string()))?;
        let samples = 128;
        for k in 0..=samples {
            let t = a.horizon * k as f64 / samples as f64;
            w.write_record([num(t), num(a.slice(t).l1_dist(&b.slice(t)))]).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    for (name, sol) in [("a", &a), ("b", &b)] {
        let sub = dir.join(name);
        std::fs::create_dir_all(&sub)?;
        write_record(&sub, sol, &cfg.slice_times())?;
    }
    let lines = vec![
        ("system", r.sys.name.clone()),
        ("mode", mode.label().to_string()),
        ("eps", num(r.params.eps)),
        ("h", num(r.params.h)),
        ("initial_l1", num(a.initial.l1_dist(&b.initial))),
        ("final_l1", num(a.final_slice.l1_dist(&b.final_slice))),
        ("stability_ratio", num(stability_ratio(&a, &b))),
        ("amplification", num(amplification(&a, &b))),
    ];
    finish(&dir, &lines)
}

pub fn control(path: &Path, out: Option<&Path>, strict: bool) -> Result<(), CliError> {
    let cfg = load(path)?;
    require_forward(&cfg, "control")?;
    let r = cfg.resolve()?;
    let cp = ControlProblem { sys: r.sys.clone(), ubar: r.ubar.clone(), horizon: cfg.run.horizon, params: r.params.clone() };
    let res = synthesize(&cp)?;
    let dir = run_dir(path, out, "control")?;
    write_step(create(&dir, "g2.csv")?, &res.g2)?;
    let vs = &res.verify.solution;
    write_record(&dir, vs, &cfg.slice_times())?;
    for (name, sol) in [("forward", &res.forward_sol), ("rightward", &res.rightward_sol)] {
        let sub = dir.join(name);
        std::fs::create_dir_all(&sub)?;
        write_record(&sub, sol, &[])?;
    }
    let tol = cfg.run.tolerance.unwrap_or(r.params.eps + r.params.h);
    let entropy = entropy_residual(&r.sys, vs, &test_family(vs.horizon, vs.length)).ok();
    let ok = res.final_l1() <= tol && res.verify.null_triangle_l1 <= tol;
    let mut lines = vec![
        ("system", r.sys.name.clone()),
        ("eps", num(r.params.eps)),
        ("h", num(r.params.h)),
        ("horizon", num(cp.horizon)),
        ("threshold", num(res.threshold.threshold)),
        ("T1", num(res.threshold.t1)),
        ("final_l1", num(res.final_l1())),
        ("null_triangle_l1", num(res.verify.null_triangle_l1)),
        ("initial_l1_err", num(res.initial_l1_err)),
        ("tv_g2", num(res.tv_g2())),
        ("tolerance", num(tol)),
        ("within_tolerance", ok.to_string()),
    ];
    if let Some(e) = entropy {
        lines.push(("entropy_residual", num(e)));
        // Negative values beyond round-off are flagged, not treated as failures.
        lines.push(("entropy_flag", (e < -ENTROPY_ROUNDOFF).to_string()));
    }
    finish(&dir, &lines)?;
    if strict && !ok {
        return Err(CliError::Check(format!("final_l1 {} or null triangle {} above {tol}", res.final_l1(), res.verify.null_triangle_l1)));
    }
    Ok(())
}

pub fn converge(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    if cfg.run.levels.len() < 2 {
        return Err(CliError::Config("converge needs at least two run.levels".into()));
    }
    let levels: Vec<(f64, f64)> = cfg.run.levels.iter().map(|l| (l[0], l[1])).collect();
    for &(eps, h) in &levels {
        cfg.resolve_at(eps, h)?;
    }
    let r = cfg.resolve_at(levels[0].0, levels[0].1)?;
    let data = StudyData { ubar: r.ubar.clone(), g1: r.g1.clone(), g2: r.g2.clone(), horizon: cfg.run.horizon, mode: cfg.run.mode.into() };
    let rows = he_convergence_study(&r.sys, &data, &levels, None)?;
    let dir = run_dir(path, out, "converge")?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    {
        let mut w = csv::Writer::from_writer(create(&dir, "converge.csv")?);
        w.write_record(["eps", "h", "events", "segments", "l1_to_next", "cauchy_order"]).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &rows {
            w.write_record([
                num(row.eps),
                num(row.h),
                row.events.to_string(),
                row.segments.to_string(),
                opt(row.l1_to_next),
                opt(row.cauchy_order),
            ])
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    let orders: Vec<String> = rows.iter().filter_map(|r| r.cauchy_order).map(num).collect();
    let dists: Vec<String> = rows.iter().filter_map(|r| r.l1_to_next).map(num).collect();
    let lines = vec![
        ("system", r.sys.name.clone()),
        ("mode", data.mode.label().to_string()),
        ("levels", levels.len().to_string()),
        ("cauchy_distances", dists.join(" ")),
        ("cauchy_orders", orders.join(" ")),
    ];
    finish(&dir, &lines)
}

pub fn calibrate(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let sys = cfg.system()?;
    let fixture = measure(&sys)?;
    let dir = run_dir(path, out, "calibrate")?;
    let name = format!("{}.toml", sys.name.to_ascii_lowercase());
    let text = format!("# Frozen calibration constants; regenerate with `wavetrack calibrate`.\n{}", fixture.to_text());
    write_text(&dir, &name, &text)?;
    print!("{text}");
    println!("output = {}", dir.join(name).display());
    Ok(())
}

pub fn check_system(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let sys = cfg.system()?;
    let rep = check_assumptions(&sys, ASSUMPTION_SAMPLES);
    let speeds = speed_bounds(&sys, SPEED_SAMPLES)?;
    let thr = time_threshold(&sys, cfg.data.length)?;
    let dir = run_dir(path, out, "check-system")?;
    let fmt = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
    let mut lines = vec![
        ("system", sys.name.clone()),
        ("samples", rep.samples.to_string()),
        ("min_eigen_gap", num(rep.min_gap)),
        ("speed_margin", num(rep.h2_margin)),
        ("ld_defect", num(rep.ld_defect)),
        ("gn_min", num(rep.gn_min)),
        ("boundary_min_det", num(rep.h5_min_det)),
        ("gamma_sampled", num(rep.gamma_sampled)),
        ("speed_min", fmt(&speeds.min)),
        ("speed_max", fmt(&speeds.max)),
        ("control_threshold", num(thr.threshold)),
        ("T1", num(thr.t1)),
        ("passed", rep.passed().to_string()),
    ];
    for f in &rep.failures {
        lines.push(("failure", f.clone()));
    }
    finish(&dir, &lines)?;
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::Check(rep.failures.join("; ")))
    }
}
