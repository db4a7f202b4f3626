//! One run: a command applied to a parsed spec, producing a JSON report and
//! artifact files. Nothing here touches the filesystem.

use hopfseg::desingularize::{critical_zeros, excess_index, reduce_to_simple, split_zero};
use hopfseg::diffusion::{
    boundary_from_state_with, interface_distance, solve_with, DiffusionConfig, SolveOptions, DEFAULT_MAX_SWEEPS,
    DEFAULT_SWEEP_TOL,
};
use hopfseg::nodal::{trace, verify_index, NodalGraph};
use hopfseg::segregation::{admissibility, dirichlet_energy, energy_from_hopf, find_base_point, reconstruct, SegregatedState};
use hopfseg::{Func, HopfError, C64};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::spec::{emit_spec, spec_value, FunctionSpec, SchemaError};
use crate::svg::render_svg;

/// Relative gap allowed between grid energy and `2∫|f|`.
pub const ENERGY_TOLERANCE: f64 = 0.02;
/// Interface distance allowed after a diffusion run, in cells.
pub const INTERFACE_TOLERANCE_CELLS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Reconstruct,
    Trace,
    Index,
    Desingularize,
    Simulate,
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Reconstruct => "reconstruct",
            Self::Trace => "trace",
            Self::Index => "index",
            Self::Desingularize => "desingularize",
            Self::Simulate => "simulate",
            Self::Render => "render",
        }
    }
}

/// Numeric settings; every report echoes them in full.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub resolution: usize,
    /// Admissibility tolerance, relative to the boundary scale of `F`.
    pub tol: f64,
    pub mu: f64,
    /// Closeness target of a split, or the total budget with `reduce`.
    pub eps: f64,
    pub branch: u32,
    pub samples: usize,
    /// Desingularize every multiple critical zero instead of one.
    pub reduce: bool,
    pub energy_tolerance: f64,
    pub interface_tolerance_cells: f64,
    pub sweep_tol: f64,
    pub max_sweeps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            resolution: 256,
            tol: 1e-8,
            mu: 1e4,
            eps: 0.01,
            branch: 0,
            samples: 1024,
            reduce: false,
            energy_tolerance: ENERGY_TOLERANCE,
            interface_tolerance_cells: INTERFACE_TOLERANCE_CELLS,
            sweep_tol: DEFAULT_SWEEP_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Report plus the files to write next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub ok: bool,
    pub report: Value,
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    /// Exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.ok {
            0
        } else {
            1
        }
    }

    pub fn report_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn error_kind(e: &HopfError) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn base_report(command: Command, settings: &Settings) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command.name()));
    m.insert("settings".into(), serde_json::to_value(settings).expect("settings serialize"));
    m
}

/// Report for input that failed to parse.
pub fn schema_failure(command: Command, settings: &Settings, err: &SchemaError) -> Outcome {
    let mut m = base_report(command, settings);
    m.insert("ok".into(), json!(false));
    m.insert(
        "error".into(),
        json!({"kind": "SchemaError", "message": err.to_string(), "pointer": err.pointer()}),
    );
    Outcome {
        ok: false,
        report: Value::Object(m),
        artifacts: Vec::new(),
    }
}

struct Partial {
    checks: Map<String, Value>,
    results: Map<String, Value>,
    artifacts: Vec<(String, String)>,
}

impl Partial {
    fn new() -> Self {
        Self {
            checks: Map::new(),
            results: Map::new(),
            artifacts: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.into(), json!(ok));
    }

    fn result(&mut self, name: &str, v: Value) {
        self.results.insert(name.into(), v);
    }
}

fn resolve_base(spec: &FunctionSpec) -> Result<C64, HopfError> {
    match spec.base {
        Some(b) => Ok(b),
        None => find_base_point(&spec.f).ok_or(HopfError::NotAdmissible {
            max_residual: f64::NAN,
        }),
    }
}

pub fn graph_value(graph: &NodalGraph) -> Value {
    let vertices: Vec<Value> = graph
        .vertices
        .iter()
        .map(|v| json!({"id": v.id, "x": v.location.re, "y": v.location.im, "kind": v.kind.as_str(), "index": v.index}))
        .collect();
    let arcs: Vec<Value> = graph
        .arcs
        .iter()
        .map(|a| json!({"from": a.from, "to": a.to, "points": a.points.iter().map(|p| json!([p.re, p.im])).collect::<Vec<_>>()}))
        .collect();
    json!({"vertices": vertices, "arcs": arcs, "M": graph.m, "N": graph.n, "T": graph.t})
}

fn config_value(cfg: &DiffusionConfig) -> Value {
    json!({"species": cfg.species(), "samples": cfg.samples(), "mu": cfg.mu, "resolution": cfg.resolution, "g": cfg.g})
}

fn criticals_value(state: &SegregatedState) -> Value {
    Value::Array(
        state
            .criticals()
            .iter()
            .map(|c| json!({"z": pair(c.location), "order": c.order, "multiplicity": c.multiplicity, "residual": c.residual}))
            .collect(),
    )
}

fn traced(p: &mut Partial, state: &SegregatedState) -> Result<NodalGraph, HopfError> {
    let graph = trace(state)?;
    p.check("trace_clean", graph.issues.is_empty());
    p.result("trace_issues", json!(graph.issues));
    p.result("counts", json!({"M": graph.m, "N": graph.n, "T": graph.t}));
    Ok(graph)
}

fn index_checks(p: &mut Partial, graph: &NodalGraph) {
    let r = verify_index(graph);
    p.check("formula", r.formula_check);
    p.check("euler", r.euler_check);
    p.check("degree", r.degree_check);
    p.result("index", json!({"M": r.m, "N": r.n, "T": r.t, "index_sum": r.index_sum}));
}

fn check(p: &mut Partial, f: &Func, base: C64, s: &Settings) -> Result<(), HopfError> {
    let rep = admissibility(f, base, s.tol)?;
    p.check("admissible", rep.admissible);
    p.result("odd_admissible", json!(rep.admissible || rep.odd_admissible));
    p.result("tolerance", json!(rep.tolerance));
    p.result("scale", json!(rep.scale));
    let residuals: Vec<Value> = rep
        .residuals
        .iter()
        .map(|(z, r)| json!({"z": pair(*z), "order": f.order_at(*z), "residual": r}))
        .collect();
    p.result("residuals", Value::Array(residuals));
    Ok(())
}

fn reconstruct_cmd(p: &mut Partial, f: &Func, base: C64, s: &Settings) -> Result<(), HopfError> {
    let state = reconstruct(f, base, s.resolution)?;
    let grid = dirichlet_energy(&state);
    let hopf = energy_from_hopf(f);
    let gap = (grid - hopf).abs() / hopf.max(f64::MIN_POSITIVE);
    p.check("energy_identity", gap <= s.energy_tolerance);
    p.result("species", json!(state.species_count()));
    p.result("dropped_islands", json!(state.dropped_islands()));
    p.result("criticals", criticals_value(&state));
    p.result("energy", json!({"grid": grid, "hopf": hopf, "relative_gap": gap}));
    p.artifacts.push(("state.csv".into(), state.to_csv()));
    Ok(())
}

fn trace_cmd(p: &mut Partial, f: &Func, base: C64, s: &Settings, svg_only: bool) -> Result<(), HopfError> {
    let state = reconstruct(f, base, s.resolution)?;
    let graph = traced(p, &state)?;
    if !svg_only {
        let mut text = serde_json::to_string_pretty(&graph_value(&graph)).expect("graph serializes");
        text.push('\n');
        p.artifacts.push(("graph.json".into(), text));
    }
    p.artifacts.push(("graph.svg".into(), render_svg(&graph)));
    Ok(())
}

fn index_cmd(p: &mut Partial, f: &Func, base: C64, s: &Settings) -> Result<(), HopfError> {
    let state = reconstruct(f, base, s.resolution)?;
    let graph = traced(p, &state)?;
    p.result("species", json!(state.species_count()));
    index_checks(p, &graph);
    Ok(())
}

fn new_state_checks(p: &mut Partial, f_new: &Func, base: C64, s: &Settings) -> Result<(), HopfError> {
    let state = reconstruct(f_new, base, s.resolution)?;
    let graph = traced(p, &state)?;
    index_checks(p, &graph);
    p.artifacts.push(("f_new.json".into(), emit_spec(f_new, Some(base))));
    p.artifacts.push(("f_new.svg".into(), render_svg(&graph)));
    Ok(())
}

fn desingularize_cmd(p: &mut Partial, f: &Func, s: &Settings) -> Result<(), HopfError> {
    if s.reduce {
        let red = reduce_to_simple(f, s.eps)?;
        let (_, crit) = critical_zeros(&red.f)?;
        p.check("all_simple", excess_index(&crit) == 0);
        let steps: Vec<Value> = red
            .steps
            .iter()
            .map(|st| {
                json!({"z0": pair(st.z0), "order": st.order, "alpha_before": st.alpha_before, "alpha_after": st.alpha_after,
                       "general_position_alpha": pair(st.general_position_alpha), "basis": format!("{:?}", st.basis),
                       "epsilon": st.epsilon, "theta": st.theta, "sup_dist": st.sup_dist})
            })
            .collect();
        p.result("steps", Value::Array(steps));
        p.result("accumulated_distance", json!(red.accumulated));
        p.result("condition", json!(red.condition));
        p.result("f_new", spec_value(&red.f, Some(red.base)));
        return new_state_checks(p, &red.f, red.base, s);
    }
    let (_, crit) = critical_zeros(f)?;
    let &(z0, order) = crit
        .iter()
        .filter(|c| c.1 >= 2)
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.norm().total_cmp(&a.0.norm())))
        .ok_or_else(|| HopfError::InvalidInput("no multiple critical zero to split".into()))?;
    let res = split_zero(f, z0, s.eps, s.branch)?;
    let w0 = res.new_zero();
    p.check("orders", res.f_new.order_at(z0) == order - 1 && res.f_new.order_at(w0) == 1);
    p.check("admissible", res.admissibility.admissible);
    p.check("closeness", res.sup_dist + res.h1_dist <= s.eps);
    p.result("z0", pair(z0));
    p.result("order", json!(order));
    p.result("omega0", pair(res.omega0));
    p.result("basis", json!(format!("{:?}", res.basis)));
    p.result("R", json!(res.r));
    p.result("W", Value::Array(res.weights.iter().map(|w| pair(*w)).collect()));
    p.result("theta", json!(res.theta));
    p.result("epsilon", json!(res.epsilon));
    p.result("k_residual", json!(res.k_residual));
    p.result("newton_iterations", json!(res.newton_iterations));
    p.result("backtracks", json!(res.backtracks));
    p.result("diag_det", json!(res.diag_det));
    p.result("hadamard_det", json!(res.hadamard_det));
    p.result("residuals", Value::Array(res.admissibility.residuals.iter().map(|(z, r)| json!({"z": pair(*z), "residual": r})).collect()));
    p.result("distances", json!({"sup": res.sup_dist, "w12": res.h1_dist, "hopf_l1": res.hopf_l1_dist}));
    p.result("f_new", spec_value(&res.f_new, Some(z0)));
    new_state_checks(p, &res.f_new, z0, s)
}

fn simulate_cmd(p: &mut Partial, f: &Func, base: C64, s: &Settings) -> Result<(), HopfError> {
    let state = reconstruct(f, base, s.resolution)?;
    let graph = traced(p, &state)?;
    let cfg = boundary_from_state_with(&state, s.samples, s.mu, s.resolution)?;
    let opts = SolveOptions {
        tol: s.sweep_tol,
        max_sweeps: s.max_sweeps,
        ..SolveOptions::default()
    };
    let field = solve_with(&cfg, opts)?;
    let dist = interface_distance(&field, &state, &graph)?;
    let violation = (0..field.species()).map(|j| field.superharmonic_violation(j)).fold(0.0, f64::max);
    p.check("interface", dist <= s.interface_tolerance_cells);
    p.check("non_negative", field.min_value() >= 0.0);
    p.result("species", json!(field.species()));
    p.result("sweeps", json!(field.sweeps));
    p.result("residual", json!(field.residual));
    p.result("segregation_defect", json!(field.segregation_defect));
    p.result("interface_distance_cells", json!(dist));
    p.result("superharmonic_violation", json!(violation));
    let mut cfg_text = serde_json::to_string(&config_value(&cfg)).expect("config serializes");
    cfg_text.push('\n');
    p.artifacts.push(("diffusion_config.json".into(), cfg_text));
    p.artifacts.push(("field.csv".into(), field.to_csv()));
    Ok(())
}

/// Runs `command` on a parsed spec.
pub fn execute(command: Command, spec: &FunctionSpec, settings: &Settings) -> Outcome {
    let mut m = base_report(command, settings);
    m.insert("function".into(), spec_value(&spec.f, spec.base));
    m.insert("warnings".into(), json!(spec.warnings));
    let run = || -> Result<Partial, HopfError> {
        let mut p = Partial::new();
        let f = &spec.f;
        if command == Command::Desingularize {
            desingularize_cmd(&mut p, f, settings)?;
            return Ok(p);
        }
        let base = resolve_base(spec)?;
        p.result("base", pair(base));
        match command {
            Command::Check => check(&mut p, f, base, settings)?,
            Command::Reconstruct => reconstruct_cmd(&mut p, f, base, settings)?,
            Command::Trace => trace_cmd(&mut p, f, base, settings, false)?,
            Command::Render => trace_cmd(&mut p, f, base, settings, true)?,
            Command::Index => index_cmd(&mut p, f, base, settings)?,
            Command::Simulate => simulate_cmd(&mut p, f, base, settings)?,
            Command::Desingularize => unreachable!("handled above"),
        }
        Ok(p)
    };
    let (p, error) = match run() {
        Ok(done) => (done, Value::Null),
        Err(e) => (Partial::new(), json!({"kind": error_kind(&e), "message": e.to_string()})),
    };
    let ok = error.is_null() && p.checks.values().all(|v| v == &Value::Bool(true));
    m.insert("ok".into(), json!(ok));
    m.insert("checks".into(), Value::Object(p.checks));
    m.insert("results".into(), Value::Object(p.results));
    let names: Vec<&str> = p.artifacts.iter().map(|a| a.0.as_str()).collect();
    m.insert("artifacts".into(), json!(names));
    m.insert("error".into(), error);
    Outcome {
        ok,
        report: Value::Object(m),
        artifacts: p.artifacts,
    }
}
