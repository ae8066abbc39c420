//! One runner per subcommand; each writes its artifacts into `out`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use omega_core::analysis::{aggregate_run, ctrb_report, mode_output_matrix};
use omega_core::dynamics::{check_embedding, dwell_bound, DwellGrid, LipschitzSource};
use omega_core::{
    angle, approx_error, build_lattice, canonicalize, embed_common, intersection_basis, obs_rank,
    project, reachability_chain, reduce_model, simulate, v_dist, v_norm, CdVector, ErrorSeries,
    LatticeClosure,
};

use crate::build::{self, matrix, rows_of};
use crate::config::*;
use crate::{CliError, Command};

/// Fixed float format for CSV cells.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn write_rows(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn run(command: Command, cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match command {
        Command::Simulate => run_simulate(cfg, out),
        Command::Embed => run_embed(cfg, out),
        Command::Dwell => run_dwell(cfg, out),
        Command::Ctrb => run_ctrb(cfg, out),
        Command::Obs => run_obs(cfg, out),
        Command::Chain => run_chain(cfg, out),
        Command::Reduce => run_reduce(cfg, out, true),
        Command::Approx => run_reduce(cfg, out, false),
        Command::Aggregate => run_aggregate(cfg, out),
        Command::ReduceVec => run_vectors(cfg, out),
        Command::Lattice => run_lattice(cfg, out),
    }
}

fn run_simulate(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "simulate")?;
    let signal = build::signal(cfg, "simulate")?;
    let x0 = build::initial_state(cfg, "simulate")?;
    let traj = simulate(&sys, &signal, &x0, &build::sim_options(cfg))?;

    let width = traj.max_dim();
    let mut header: Vec<String> = ["t", "mode", "dim", "v_norm"].map(String::from).to_vec();
    header.extend((0..width).map(|i| format!("x_{i}")));
    let rows = traj
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![
                fmt_f(s.t),
                s.mode.to_string(),
                s.dim.to_string(),
                fmt_f(s.v_norm),
            ];
            r.extend((0..width).map(|i| s.state.get(i).map(|&v| fmt_f(v)).unwrap_or_default()));
            r
        })
        .collect();
    let traj_path = out.join("trajectory.csv");
    write_rows(&traj_path, header, rows)?;

    let events_path = out.join("events.csv");
    let header = ["t", "pre_dim", "post_dim", "gap", "amplitude"]
        .map(String::from)
        .to_vec();
    let rows = traj
        .events
        .iter()
        .map(|e| {
            vec![
                fmt_f(e.time),
                e.pre_dim().to_string(),
                e.post_dim().to_string(),
                fmt_f(e.gap),
                fmt_f(e.impulse_amplitude),
            ]
        })
        .collect();
    write_rows(&events_path, header, rows)?;
    let mut written = vec![traj_path, events_path];

    if sys.output().is_some() {
        let p = traj
            .samples
            .iter()
            .find_map(|s| s.output.as_ref().map(Vec::len))
            .unwrap_or(0);
        let mut header: Vec<String> = vec!["t".into(), "mode".into()];
        header.extend((0..p).map(|i| format!("y_{i}")));
        let rows = traj
            .samples
            .iter()
            .map(|s| {
                let mut r = vec![fmt_f(s.t), s.mode.to_string()];
                r.extend(s.output.iter().flatten().map(|&v| fmt_f(v)));
                r
            })
            .collect();
        let path = out.join("outputs.csv");
        write_rows(&path, header, rows)?;
        written.push(path);
    }
    Ok(written)
}

fn run_embed(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "embed")?;
    let emb = embed_common(&sys)?;
    let modes: Vec<Value> = sys
        .modes()
        .iter()
        .zip(emb.system.modes())
        .map(|(orig, lifted)| {
            json!({
                "label": orig.label(),
                "source_dim": orig.dim(),
                "a": lifted.drift_matrix().map(rows_of),
            })
        })
        .collect();
    let k = sys.modes().len();
    let mut resets = Vec::new();
    for p in 0..k {
        for q in (0..k).filter(|&q| q != p) {
            if let Ok(w) = emb.system.transition(p, q) {
                resets.push(json!({"from": p, "to": q, "matrix": rows_of(w.matrix())}));
            }
        }
    }
    let equivalence = if cfg.signal.is_some() && cfg.x0.is_some() && cfg.horizon.is_some() {
        let signal = build::signal(cfg, "embed")?;
        let x0 = build::initial_state(cfg, "embed")?;
        let r = check_embedding(&sys, &signal, &x0, &build::sim_options(cfg))?;
        json!({
            "max_distance": r.max_distance,
            "tolerance": r.tolerance,
            "samples_compared": r.samples_compared,
            "passed": r.passed(),
        })
    } else {
        Value::Null
    };
    let path = out.join("embed.json");
    write_json(
        &path,
        &json!({"dim": emb.dim, "modes": modes, "resets": resets, "equivalence": equivalence}),
    )?;
    Ok(vec![path])
}

fn run_dwell(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "dwell")?;
    let d = cfg
        .dwell
        .as_ref()
        .ok_or_else(|| CliError::Config(ConfigError::single("dwell", "required by `dwell`")))?;
    let source = d
        .lipschitz
        .map_or(LipschitzSource::Transitions, LipschitzSource::Fixed);
    let r = dwell_bound(&sys, source, d.gamma, &DwellGrid::default())?;
    let path = out.join("dwell.json");
    write_json(
        &path,
        &json!({
            "gamma": d.gamma,
            "lipschitz": r.lipschitz,
            "lipschitz_from_transitions": d.lipschitz.is_none(),
            "dwell": r.dwell,
            "contraction": r.contraction,
            "diagnostic": r.diagnostic,
        }),
    )?;
    Ok(vec![path])
}

fn run_ctrb(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "ctrb")?;
    let dims = sys.dims();
    let mut modes = Vec::new();
    for i in 0..dims.len() {
        let r = ctrb_report(&sys, i, None)?;
        let mut pairs = Vec::new();
        for j in (0..dims.len()).filter(|&j| j != i) {
            let s = intersection_basis(dims[i], dims[j])?;
            let pr = ctrb_report(&sys, i, Some(&s))?;
            pairs.push(json!({
                "other": j,
                "common_dim": s.ncols(),
                "partially_controllable": pr.partially_controllable,
            }));
        }
        modes.push(json!({
            "label": r.label,
            "dim": r.dim,
            "kalman_rank": r.kalman_rank,
            "controllable": r.fully_controllable,
            "partial": pairs,
        }));
    }
    let path = out.join("ctrb.json");
    write_json(&path, &json!({ "modes": modes }))?;
    Ok(vec![path])
}

fn run_obs(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "obs")?;
    let h = match &cfg.output {
        Some(OutputConfig::Linear { h }) => matrix(h),
        _ => {
            return Err(CliError::Config(ConfigError::single(
                "output",
                "`obs` needs a linear output `h`",
            )))
        }
    };
    let mut modes = Vec::new();
    for m in sys.modes() {
        let a = m.drift_matrix().ok_or_else(|| {
            CliError::Config(ConfigError::single(
                "modes",
                format!("mode {} has nonlinear drift", m.label()),
            ))
        })?;
        let c = mode_output_matrix(&h, m.dim());
        let rank = obs_rank(a, &c)?;
        modes.push(json!({
            "label": m.label(),
            "dim": m.dim(),
            "output_matrix": rows_of(&c),
            "rank": rank,
            "observable": rank == m.dim(),
        }));
    }
    let path = out.join("obs.json");
    write_json(&path, &json!({ "modes": modes }))?;
    Ok(vec![path])
}

fn run_chain(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sys = build::system(cfg, "chain")?;
    let c = cfg
        .chain
        .as_ref()
        .ok_or_else(|| CliError::Config(ConfigError::single("chain", "required by `chain`")))?;
    let chain = reachability_chain(&sys, c.start, c.target)?;
    let labels = chain.as_ref().map(|ch| {
        ch.iter()
            .map(|&i| sys.modes()[i].label().to_string())
            .collect::<Vec<_>>()
    });
    let path = out.join("chain.json");
    write_json(
        &path,
        &json!({"start": c.start, "target": c.target, "chain": chain, "labels": labels}),
    )?;
    Ok(vec![path])
}

fn reduction(cfg: &ScenarioConfig, command: &str) -> Result<ReductionConfig, CliError> {
    cfg.reduction.clone().ok_or_else(|| {
        CliError::Config(ConfigError::single(
            "reduction",
            format!("required by `{command}`"),
        ))
    })
}

fn error_rows(series: &[ErrorSeries]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in series {
        for (t, e) in s.times.iter().zip(&s.values) {
            rows.push(vec![
                fmt_f(*t),
                s.target_dim.to_string(),
                e.map(fmt_f).unwrap_or_default(),
            ]);
        }
    }
    rows
}

fn run_reduce(cfg: &ScenarioConfig, out: &Path, models: bool) -> Result<Vec<PathBuf>, CliError> {
    let name = if models { "reduce" } else { "approx" };
    let r = reduction(cfg, name)?;
    let (a, x0) = build::reduction_problem(&r);
    let times = build::sample_times(&r);
    let series = r
        .targets
        .iter()
        .map(|&m| approx_error(&a, &x0, m, &times))
        .collect::<Result<Vec<_>, _>>()?;
    let table = out.join("error_table.csv");
    write_rows(
        &table,
        ["t", "m", "E"].map(String::from).to_vec(),
        error_rows(&series),
    )?;
    let mut written = vec![table];
    if models {
        let (b, c) = (r.b.as_ref().map(matrix), r.c.as_ref().map(matrix));
        let mut reduced = Vec::new();
        for (&m, s) in r.targets.iter().zip(&series) {
            let red = reduce_model(&a, b.as_ref(), c.as_ref(), m)?;
            reduced.push(json!({
                "target_dim": m,
                "a": rows_of(&red.a),
                "b": red.b.as_ref().map(rows_of),
                "c": red.c.as_ref().map(rows_of),
                "max_error": s.max(),
            }));
        }
        let path = out.join("reduced.json");
        write_json(&path, &json!({"source_dim": a.nrows(), "models": reduced}))?;
        written.push(path);
    }
    Ok(written)
}

fn run_aggregate(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = reduction(cfg, "aggregate")?;
    let (a, x0) = build::reduction_problem(&r);
    let times = build::sample_times(&r);
    let mut rows = Vec::new();
    for &m in &r.targets {
        let nominal = reduce_model(&a, None, None, m)?;
        let run = aggregate_run(&nominal.a, &a, &x0, &times)?;
        for (i, t) in run.times.iter().enumerate() {
            let norm = |x: &[f64]| v_norm(&CdVector::from_slice(x).expect("non-empty"));
            rows.push(vec![
                fmt_f(*t),
                m.to_string(),
                run.error.values[i].map(fmt_f).unwrap_or_default(),
                fmt_f(norm(&run.nominal[i])),
                fmt_f(norm(&run.member[i])),
            ]);
        }
    }
    let path = out.join("aggregate.csv");
    let header = ["t", "m", "E", "nominal_norm", "member_norm"]
        .map(String::from)
        .to_vec();
    write_rows(&path, header, rows)?;
    Ok(vec![path])
}

fn run_vectors(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let v = cfg.vectors.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError::single("vectors", "required by `reduce-vec`"))
    })?;
    let pts = v
        .points
        .iter()
        .map(|p| CdVector::from_slice(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::new();
    for x in &pts {
        let canon = canonicalize(x.entries(), omega_core::cdspace::DEFAULT_REDUCTION_TOL)?;
        let projections: Vec<Value> = v
            .project_to
            .iter()
            .map(|&m| {
                let p = project(x, m);
                json!({"dim": m, "vector": p.entries(), "residual": v_dist(x, &p)})
            })
            .collect();
        points.push(json!({
            "dim": x.dim(),
            "canonical": canon.entries(),
            "v_norm": v_norm(x),
            "projections": projections,
        }));
    }
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let ang = angle(&pts[i], &pts[j]).ok();
            pairs.push(json!({
                "i": i,
                "j": j,
                "distance": v_dist(&pts[i], &pts[j]),
                "angle_deg": ang.map(f64::to_degrees),
            }));
        }
    }
    let path = out.join("vectors.json");
    write_json(&path, &json!({"points": points, "pairs": pairs}))?;
    Ok(vec![path])
}

fn run_lattice(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let l = cfg
        .lattice
        .as_ref()
        .ok_or_else(|| CliError::Config(ConfigError::single("lattice", "required by `lattice`")))?;
    let closure = match l.closure {
        ClosureName::Full => LatticeClosure::Full,
        ClosureName::Join => LatticeClosure::Join,
    };
    let lat = build_lattice(&l.dims, closure)?;
    let path = out.join("lattice.json");
    write_json(
        &path,
        &json!({"nodes": lat.nodes(), "edges": lat.edges(), "top": lat.top()}),
    )?;
    Ok(vec![path])
}
