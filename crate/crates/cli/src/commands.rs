//! The four subcommands: geometry, solve, sweep, formulas.

use std::fs;
use std::path::{Path, PathBuf};

use caplab_core::closed_forms::{self, PLaplaceParams};
use caplab_core::diagnostics::{self, DiagnosticsReport, run_diagnostics};
use caplab_core::geometry::{self, DomainSpec, RadialProfile, StarDomain};
use caplab_core::solver::{
    solve_conformal_exterior, solve_exterior_capacitary, solve_interior_punctured, solve_torsion,
    SolveResult, SolverConfig,
};

use crate::manifest::{OutputNames, RunManifest, Scenario, MANIFEST_SCHEMA_VERSION};
use crate::output;
use crate::{CliError, CliResult};

/// Boundary sample count for the printed Minkowski residual.
const GEOMETRY_MINKOWSKI_N: usize = 1024;
/// Boundary sample count for the printed star-support minimum.
const GEOMETRY_SUPPORT_N: usize = 2048;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn load_domain(path: &Path, dim_override: Option<usize>) -> Result<DomainSpec, CliError> {
    let text = read_text(path)?;
    let mut spec: DomainSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed domain config {}: {e}", path.display())))?;
    if let Some(dim) = dim_override {
        spec.dimension = dim;
        spec.center.resize(dim, 0.0);
    }
    Ok(spec)
}

/// Output directory resolution: flag, then the CAPLAB_OUT environment
/// variable, then ./caplab_out.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("CAPLAB_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("caplab_out")
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

pub struct GeometryArgs {
    pub domain: PathBuf,
    pub dim: Option<usize>,
}

pub fn cmd_geometry(args: &GeometryArgs) -> CliResult {
    let spec = load_domain(&args.domain, args.dim)?;
    let d = spec.to_domain()?;
    let kind = match d.profile() {
        RadialProfile::Trig { .. } => "trig",
        RadialProfile::Ellipse { .. } => "ellipse",
    };
    let mut s = String::new();
    s.push_str(&output::text_line("dimension", &d.dim().to_string()));
    s.push_str(&output::text_line("profile", kind));
    s.push_str(&output::num_line("volume", geometry::volume(&d)));
    s.push_str(&output::num_line("surface", geometry::surface_measure(&d)));
    s.push_str(&output::num_line("h0", geometry::h0(&d)));
    s.push_str(&output::num_line(
        "isoperimetric_deficit",
        geometry::isoperimetric_deficit(&d),
    ));
    s.push_str(&output::num_line(
        "minkowski_residual",
        geometry::minkowski_residual(&d, GEOMETRY_MINKOWSKI_N)?,
    ));
    s.push_str(&output::num_line(
        "star_support_min",
        geometry::star_support_min(&d, GEOMETRY_SUPPORT_N)?,
    ));
    print!("{s}");
    Ok(0)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

pub struct SolveArgs {
    pub manifest: Option<PathBuf>,
    pub scenario: Option<Scenario>,
    pub domain: Option<PathBuf>,
    pub p: Option<f64>,
    pub dim: Option<usize>,
    pub out: Option<PathBuf>,
    pub resolution: Option<(usize, usize)>,
    pub rout_factor: Option<f64>,
    pub deterministic: bool,
    pub force_diagnostics: bool,
}

fn effective_p(scenario: Scenario, p: Option<f64>) -> Result<f64, CliError> {
    match scenario {
        Scenario::Exterior | Scenario::Interior => p.ok_or_else(|| {
            CliError::Config(format!(
                "--p is required for the {} scenario",
                scenario.name()
            ))
        }),
        Scenario::Conformal | Scenario::Torsion => match p {
            None | Some(2.0) => Ok(2.0),
            Some(v) => Err(CliError::Config(format!(
                "the {} scenario solves p = 2, got --p {v}",
                scenario.name()
            ))),
        },
    }
}

fn build_manifest(args: &SolveArgs) -> Result<RunManifest, CliError> {
    if let Some(path) = &args.manifest {
        if args.scenario.is_some()
            || args.domain.is_some()
            || args.p.is_some()
            || args.dim.is_some()
            || args.resolution.is_some()
            || args.rout_factor.is_some()
        {
            return Err(CliError::Config(
                "--manifest replays a recorded run; combine it only with --out".to_string(),
            ));
        }
        let text = read_text(path)?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("malformed manifest {}: {e}", path.display()))
        })?;
        manifest.validate().map_err(CliError::Config)?;
        Ok(manifest)
    } else {
        let scenario = args.scenario.ok_or_else(|| {
            CliError::Config("--scenario is required (or replay with --manifest)".to_string())
        })?;
        let domain_path = args.domain.as_ref().ok_or_else(|| {
            CliError::Config("--domain is required (or replay with --manifest)".to_string())
        })?;
        let spec = load_domain(domain_path, args.dim)?;
        let p = effective_p(scenario, args.p)?;
        let mut solver = SolverConfig::default();
        if let Some((n_r, n_a)) = args.resolution {
            solver.n_r = n_r;
            solver.n_a = n_a;
        }
        if let Some(f) = args.rout_factor {
            solver.r_out_factor = f;
        }
        Ok(RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            scenario,
            dimension: spec.dimension,
            domain: spec,
            p,
            solver,
            deterministic: args.deterministic,
            outputs: OutputNames::default(),
        })
    }
}

fn run_scenario(m: &RunManifest, d: &StarDomain) -> Result<SolveResult, CliError> {
    let res = match m.scenario {
        Scenario::Exterior => solve_exterior_capacitary(d, m.p, &m.solver)?,
        Scenario::Conformal => solve_conformal_exterior(d, &m.solver)?,
        Scenario::Interior => solve_interior_punctured(d, m.p, &m.solver)?,
        Scenario::Torsion => solve_torsion(d, &m.solver)?,
    };
    Ok(res)
}

fn solve_summary(m: &RunManifest, res: &SolveResult, report: Option<&DiagnosticsReport>) -> String {
    let mut s = String::new();
    s.push_str(&output::text_line("scenario", m.scenario.name()));
    s.push_str(&output::text_line("dimension", &m.dimension.to_string()));
    s.push_str(&output::num_line("p", m.p));
    s.push_str(&output::text_line(
        "resolution",
        &format!("{} x {}", m.solver.n_r, m.solver.n_a),
    ));
    s.push_str(&output::text_line(
        "converged",
        if res.converged { "true" } else { "false" },
    ));
    s.push_str(&output::text_line(
        "outer_iterations",
        &res.outer_iterations.to_string(),
    ));
    if let Some(energy) = res.energy_history.last() {
        s.push_str(&output::num_line("energy", *energy));
    }
    s.push_str(&output::num_line("gamma_flux", res.gamma_flux()));
    if let Some(rep) = report {
        if let Some(cap) = &rep.capacity {
            s.push_str(&output::num_line("capacity_flux", cap.flux));
            s.push_str(&output::num_line("capacity_volume", cap.volume_integral));
        }
        if let Some(o) = &rep.overdetermination {
            s.push_str(&output::num_line("overdet_mean", o.mean));
            s.push_str(&output::num_line("overdet_rel_spread", o.rel_spread));
        }
        if let Some(poho) = rep.pohozaev_relative_residual {
            s.push_str(&output::num_line("pohozaev_rel", poho));
        }
        if let Some(v) = &rep.verdict {
            s.push_str(&output::text_line("verdict", &v.verdict.to_string()));
        }
    }
    s
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult {
    let manifest = build_manifest(args)?;
    let out_dir = resolve_out_dir(args.out.as_deref());
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let d = manifest.domain.to_domain()?;
    let res = run_scenario(&manifest, &d)?;

    let names = manifest.outputs.clone();
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization failed: {e}")))?;
    write_text(&out_dir.join(&names.manifest), &format!("{manifest_json}\n"))?;
    write_text(&out_dir.join(&names.boundary_csv), &output::boundary_csv(&res))?;
    write_text(&out_dir.join(&names.field_csv), &output::field_csv(&res))?;

    let thresholds = if res.converged {
        match diagnostics::calibrate_null_thresholds(
            manifest.scenario.problem_kind(),
            &d,
            manifest.p,
            &manifest.solver,
        ) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("note: null calibration failed ({e}); verdict omitted");
                None
            }
        }
    } else {
        None
    };

    match run_diagnostics(&res, args.force_diagnostics, thresholds.as_ref()) {
        Ok(report) => {
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Config(format!("report serialization failed: {e}")))?;
            write_text(&out_dir.join(&names.report_json), &format!("{json}\n"))?;
            let value = serde_json::to_value(&report)
                .map_err(|e| CliError::Config(format!("report serialization failed: {e}")))?;
            write_text(&out_dir.join(&names.report_txt), &output::flatten_report(&value))?;
            print!("{}", solve_summary(&manifest, &res, Some(&report)));
            println!("out                                            {}", out_dir.display());
            Ok(if res.converged { 0 } else { 3 })
        }
        Err(caplab_core::Error::UnconvergedInput) => {
            eprintln!(
                "solve did not converge after {} outer iterations \
                 (final relative energy change {:.3e}); diagnostics skipped — \
                 rerun with --force-diagnostics to emit them anyway",
                res.outer_iterations, res.final_energy_change
            );
            print!("{}", solve_summary(&manifest, &res, None));
            println!("out                                            {}", out_dir.display());
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub struct SweepArgs {
    pub scenario: Scenario,
    pub domain: PathBuf,
    pub p: Option<f64>,
    pub dim: Option<usize>,
    pub p_list: Option<String>,
    pub resolution_list: Option<String>,
    pub resolution: Option<(usize, usize)>,
    pub rout_factor: Option<f64>,
    pub out: Option<PathBuf>,
}

enum SweepAxis {
    P(Vec<f64>),
    Resolution(Vec<usize>),
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("empty {what} list")));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Config(format!("bad {what} entry {s:?}: {e}")))
        })
        .collect()
}

fn sweep_axis(args: &SweepArgs) -> Result<SweepAxis, CliError> {
    match (&args.p_list, &args.resolution_list) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either --p-list or --resolution-list, not both".to_string(),
        )),
        (Some(p), None) => Ok(SweepAxis::P(parse_list(p, "--p-list")?)),
        (None, Some(r)) => Ok(SweepAxis::Resolution(parse_list(r, "--resolution-list")?)),
        (None, None) => Err(CliError::Config(
            "a sweep needs --p-list or --resolution-list".to_string(),
        )),
    }
}

const SWEEP_HEADER: &str = "param,value,n_r,n_a,p,converged,outer_iterations,linear_iterations,\
energy,gamma_flux,capacity_flux,capacity_volume,pair_rel_gap,overdet_mean,overdet_rel_spread,\
pohozaev_rel,p_interior_excess_rel,far_ring_vs_limit_rel,soap_deficit,iso_deficit_rel";

fn opt_cell(v: Option<f64>) -> String {
    v.map(output::full).unwrap_or_default()
}

fn sweep_row(
    param: &str,
    value: String,
    m: &RunManifest,
    res: &SolveResult,
    rep: &DiagnosticsReport,
) -> String {
    let cap = rep.capacity.as_ref();
    let over = rep.overdetermination.as_ref();
    let pf = rep.p_function.as_ref();
    let soap = rep.soap_bubble.as_ref();
    format!(
        "{param},{value},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        m.solver.n_r,
        m.solver.n_a,
        output::full(m.p),
        res.converged,
        res.outer_iterations,
        res.linear_iterations,
        opt_cell(res.energy_history.last().copied()),
        output::full(res.gamma_flux()),
        opt_cell(cap.map(|c| c.flux)),
        opt_cell(cap.map(|c| c.volume_integral)),
        opt_cell(cap.map(|c| c.pair_rel_gap)),
        opt_cell(over.map(|o| o.mean)),
        opt_cell(over.map(|o| o.rel_spread)),
        opt_cell(rep.pohozaev_relative_residual),
        opt_cell(pf.map(|p| p.interior_excess_rel)),
        opt_cell(pf.map(|p| p.far_ring_vs_limit_rel)),
        opt_cell(soap.map(|s| s.deficit)),
        output::full(rep.geometry.isoperimetric_deficit_rel),
    )
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult {
    let axis = sweep_axis(args)?;
    let spec = load_domain(&args.domain, args.dim)?;
    let out_dir = resolve_out_dir(args.out.as_deref());
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut base = SolverConfig::default();
    if let Some((n_r, n_a)) = args.resolution {
        base.n_r = n_r;
        base.n_a = n_a;
    }
    if let Some(f) = args.rout_factor {
        base.r_out_factor = f;
    }

    let runs: Vec<(String, String, f64, SolverConfig)> = match &axis {
        SweepAxis::P(ps) => ps
            .iter()
            .map(|&p| -> Result<_, CliError> {
                let p = effective_p(args.scenario, Some(p))?;
                Ok(("p".to_string(), output::full(p), p, base.clone()))
            })
            .collect::<Result<_, _>>()?,
        SweepAxis::Resolution(ns) => {
            let p = effective_p(args.scenario, args.p)?;
            ns.iter()
                .map(|&n| {
                    let mut cfg = base.clone();
                    cfg.n_r = n;
                    ("n_r".to_string(), n.to_string(), p, cfg)
                })
                .collect()
        }
    };

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut all_converged = true;
    for (param, value, p, cfg) in runs {
        let manifest = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            scenario: args.scenario,
            dimension: spec.dimension,
            domain: spec.clone(),
            p,
            solver: cfg,
            deterministic: true,
            outputs: OutputNames::default(),
        };
        let d = manifest.domain.to_domain()?;
        let res = run_scenario(&manifest, &d)?;
        all_converged &= res.converged;
        // Rows always carry the available diagnostics; the converged column
        // records trustworthiness.
        let report = run_diagnostics(&res, true, None)?;
        csv.push_str(&sweep_row(&param, value, &manifest, &res, &report));
        csv.push('\n');
    }

    write_text(&out_dir.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(if all_converged { 0 } else { 3 })
}

// ---------------------------------------------------------------------------
// formulas
// ---------------------------------------------------------------------------

pub struct FormulasArgs {
    pub name: String,
    pub args: Vec<String>,
}

/// name -> usage string, for the error listing and arity messages.
const FORMULA_USAGE: &[(&str, &str)] = &[
    ("ball_capacity", "<dim> <p> <radius>"),
    ("ball_exterior_potential", "<dim> <p> <radius> <r>"),
    ("capacity_from_geometry", "<dim> <p> <surface> <volume>"),
    ("capacity_isoperimetric_bound", "<dim> <p> <volume>"),
    ("conformal_identity_residual", "<dim> <c> <surface> <gamma>"),
    ("conformal_isoperimetric_residual", "<dim> <surface> <volume>"),
    ("conformal_log_potential", "<dim> <c> <surface> <r>"),
    ("decay_exponent", "<dim> <p>"),
    ("fundamental_solution", "<dim> <p> <r>"),
    ("gamma_from_capacity", "<dim> <p> <capacity>"),
    ("interior_constant", "<dim> <p> <surface> <volume>"),
    ("interior_singular_potential", "<dim> <p> <surface> <r>"),
    ("p_function_boundary", "<dim> <p> <surface> <volume>"),
    ("p_function_limit", "<dim> <p> <surface> <volume>"),
    ("p_function_value", "<dim> <p> <u> <grad_norm>"),
    ("serrin_constant", "<dim> <p> <h0>"),
];

struct FormulaInput {
    name: String,
    values: Vec<f64>,
}

impl FormulaInput {
    fn dim(&self) -> Result<usize, CliError> {
        let d = self.values[0];
        if d == 2.0 || d == 3.0 {
            Ok(d as usize)
        } else {
            Err(CliError::Config(format!(
                "{}: dimension must be 2 or 3, got {d}",
                self.name
            )))
        }
    }

    fn params(&self) -> Result<PLaplaceParams, CliError> {
        Ok(PLaplaceParams::new(self.values[1], self.dim()?)?)
    }

    /// Parameters of an intrinsically conformal formula: p = N.
    fn conformal_params(&self) -> Result<PLaplaceParams, CliError> {
        let dim = self.dim()?;
        Ok(PLaplaceParams::new(dim as f64, dim)?)
    }

    fn arg(&self, i: usize) -> f64 {
        self.values[i]
    }
}

fn parse_formula_input(args: &FormulasArgs) -> Result<FormulaInput, CliError> {
    let usage = FORMULA_USAGE
        .iter()
        .find(|(name, _)| *name == args.name)
        .map(|(_, usage)| *usage)
        .ok_or_else(|| {
            let known: Vec<&str> = FORMULA_USAGE.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!(
                "unknown formula {:?}; known formulas: {}",
                args.name,
                known.join(", ")
            ))
        })?;
    let expected = usage.split_whitespace().count();
    if args.args.len() != expected {
        return Err(CliError::Config(format!(
            "{} takes {expected} arguments: {} {usage}",
            args.name, args.name
        )));
    }
    let values = args
        .args
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad numeric argument {s:?}: {e}")))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    Ok(FormulaInput {
        name: args.name.clone(),
        values,
    })
}

pub fn cmd_formulas(args: &FormulasArgs) -> CliResult {
    let input = parse_formula_input(args)?;
    let v = match input.name.as_str() {
        "ball_capacity" => closed_forms::ball_capacity(&input.params()?, input.arg(2))?,
        "ball_exterior_potential" => {
            closed_forms::ball_exterior_potential(&input.params()?, input.arg(2), input.arg(3))?
        }
        "capacity_from_geometry" => {
            closed_forms::capacity_from_geometry(&input.params()?, input.arg(2), input.arg(3))?
        }
        "capacity_isoperimetric_bound" => {
            closed_forms::capacity_isoperimetric_bound(&input.params()?, input.arg(2))?
        }
        "conformal_identity_residual" => closed_forms::conformal_identity_residual(
            &input.conformal_params()?,
            input.arg(1),
            input.arg(2),
            input.arg(3),
        )?,
        "conformal_isoperimetric_residual" => closed_forms::conformal_isoperimetric_residual(
            input.dim()?,
            input.arg(1),
            input.arg(2),
        )?,
        "conformal_log_potential" => closed_forms::conformal_log_potential(
            &input.conformal_params()?,
            input.arg(1),
            input.arg(2),
            input.arg(3),
        )?,
        "decay_exponent" => input.params()?.decay_exponent()?,
        "fundamental_solution" => {
            closed_forms::fundamental_solution(&input.params()?, input.arg(2))?
        }
        "gamma_from_capacity" => {
            closed_forms::gamma_from_capacity(&input.params()?, input.arg(2))?
        }
        "interior_constant" => {
            closed_forms::interior_constant(&input.params()?, input.arg(2), input.arg(3))?
        }
        "interior_singular_potential" => {
            closed_forms::interior_singular_potential(&input.params()?, input.arg(2), input.arg(3))?
        }
        "p_function_boundary" => {
            closed_forms::p_function_boundary(&input.params()?, input.arg(2), input.arg(3))?
        }
        "p_function_limit" => {
            closed_forms::p_function_limit(&input.params()?, input.arg(2), input.arg(3))?
        }
        "p_function_value" => {
            closed_forms::p_function_value(&input.params()?, input.arg(2), input.arg(3))?
        }
        "serrin_constant" => closed_forms::serrin_constant(&input.params()?, input.arg(2))?,
        _ => unreachable!("names were validated against FORMULA_USAGE"),
    };
    println!("{} {}", output::full(v), output::rounded(v));
    Ok(0)
}
