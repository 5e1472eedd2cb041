//! Command implementations. Each builds a [`Document`] and writes it.

use std::io::Write;
use std::path::{Path, PathBuf};

use chiralcav::carving::{plan_protocol_with, run_plan, ProtocolPlan, ProtocolRun, Target};
use chiralcav::spectrum::figures::{figure_data_by_name, CurveData, FigureCurve, FigureData};
use chiralcav::spectrum::{linspace, sweep_2d, sweep_delta, Map2D, Spectrum};
use chiralcav::{Error, SystemParams};

use crate::config::{resolve_output_path, Format, OutputSpec, RunConfig, OUTPUT_DIR_ENV};
use crate::output::{format_number, to_csv, to_json, Cell, Document, Section};
use crate::CliError;

const UNITS: &str = "rates and detunings in units of gamma, phases in radians";

fn render(doc: &Document, spec: &OutputSpec) -> String {
    match spec.format {
        Format::Csv => to_csv(doc, spec.precision),
        Format::Json => to_json(doc, spec.precision),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent.to_path_buf(), e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path.to_path_buf(), e))
}

fn emit(doc: &Document, spec: &OutputSpec, out: &mut dyn Write) -> Result<(), CliError> {
    let text = render(doc, spec);
    match &spec.path {
        Some(path) => write_file(&resolve_output_path(path), &text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(PathBuf::from("<stdout>"), e)),
    }
}

fn param_metadata(doc: &mut Document, p: &SystemParams, digits: usize) {
    let num = |x: f64| format_number(x, digits);
    doc.meta("n_atoms", p.n_atoms());
    doc.meta("gamma_l", num(p.gamma_l()));
    doc.meta("gamma_r", num(p.gamma_r()));
    doc.meta("g", num(p.g()));
    doc.meta("kappa_wg", num(p.kappa_wg()));
    doc.meta("kappa_sc", num(p.kappa_sc()));
    doc.meta("xi", num(p.xi()));
    if let Ok(c) = p.cooperativity() {
        doc.meta("cooperativity", num(c));
    }
    if let Some(mhz) = p.gamma_mhz() {
        doc.meta("gamma_mhz", num(mhz));
    }
    doc.meta("units", UNITS);
}

fn spectrum_sections(spec: &Spectrum) -> Vec<Section> {
    let mut data = Section::new("data", &["delta_over_gamma", "R"]);
    data.rows = spec
        .deltas
        .iter()
        .zip(&spec.values)
        .map(|(&d, &r)| vec![Cell::Num(d), Cell::Num(r)])
        .collect();
    let mut features = Section::new("features", &["kind", "delta", "value", "width"]);
    features.rows = spec
        .features
        .iter()
        .map(|f| {
            vec![
                Cell::Text(f.kind.as_str().into()),
                Cell::Num(f.delta),
                Cell::Num(f.value),
                Cell::Num(f.width),
            ]
        })
        .collect();
    vec![data, features]
}

fn map_section(map: &Map2D) -> Section {
    let mut data = Section::new("data", &["xi", "gamma_L", "R"]);
    for (i, &xi) in map.xi_grid.iter().enumerate() {
        for (j, &gl) in map.gamma_l_grid.iter().enumerate() {
            data.rows.push(vec![Cell::Num(xi), Cell::Num(gl), Cell::Num(map.values[i][j])]);
        }
    }
    data
}

fn grid_metadata(doc: &mut Document, deltas: &[f64], digits: usize) {
    if let (Some(first), Some(last)) = (deltas.first(), deltas.last()) {
        doc.meta("delta_min", format_number(*first, digits));
        doc.meta("delta_max", format_number(*last, digits));
    }
    doc.meta("points", deltas.len());
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sw = &cfg.sweep;
    let spectrum = sweep_delta(&cfg.system, sw.delta_min, sw.delta_max, sw.points)?.with_features(sw.prominence)?;
    let digits = cfg.output.precision;
    let mut doc = Document::default();
    doc.meta("command", "spectrum");
    param_metadata(&mut doc, &cfg.system, digits);
    grid_metadata(&mut doc, &spectrum.deltas, digits);
    doc.meta("prominence", format_number(sw.prominence, digits));
    doc.sections = spectrum_sections(&spectrum);
    emit(&doc, &cfg.output, out)
}

pub fn cmd_map(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sw = &cfg.sweep;
    for (name, v) in [("gamma_l_min", sw.gamma_l_min), ("gamma_l_max", sw.gamma_l_max)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Usage(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    if sw.xi_points == 0 || sw.gamma_l_points == 0 {
        return Err(CliError::Usage("map grids need at least one point".into()));
    }
    let map = sweep_2d(
        &cfg.system,
        &linspace(sw.xi_min, sw.xi_max, sw.xi_points),
        &linspace(sw.gamma_l_min, sw.gamma_l_max, sw.gamma_l_points),
    )?;
    let digits = cfg.output.precision;
    let mut doc = Document::default();
    doc.meta("command", "map");
    param_metadata(&mut doc, &cfg.system, digits);
    doc.meta("delta", 0);
    doc.meta("xi_points", sw.xi_points);
    doc.meta("gamma_l_points", sw.gamma_l_points);
    let (xi, gl, r) = map.argmax();
    doc.meta(
        "max",
        format!(
            "R={} at xi={}, gamma_l={}",
            format_number(r, digits),
            format_number(xi, digits),
            format_number(gl, digits)
        ),
    );
    doc.sections = vec![map_section(&map)];
    emit(&doc, &cfg.output, out)
}

fn target_name(target: Target) -> String {
    match target {
        Target::Bell => "bell (|01>+|10>)/sqrt(2)".into(),
        Target::W(m) => format!("w{m} (single-excitation, equal weights)"),
    }
}

fn carve_document(run: &ProtocolRun, cfg: &RunConfig) -> Document {
    let digits = cfg.output.precision;
    let num = |x: f64| format_number(x, digits);
    let mut doc = Document::default();
    doc.meta("command", "carve");
    param_metadata(&mut doc, &cfg.system, digits);
    // the register size replaces the template's atom count
    doc.metadata.retain(|(k, _)| k != "n_atoms");
    doc.meta("m", run.plan.m);
    doc.meta("target", target_name(run.plan.target));
    doc.meta(
        "plan",
        run.plan.steps.iter().map(|&d| num(d)).collect::<Vec<_>>().join(" "),
    );
    doc.meta("repetitions_per_step", cfg.protocol.reps);
    doc.meta("cumulative_herald_probability", num(run.cumulative_herald_probability));
    if let Some(last) = run.trace.last() {
        doc.meta("final_fidelity", num(last.fidelity));
    }

    let mut trace = Section::new(
        "data",
        &["step", "repetition", "delta", "herald_prob", "cumulative_prob", "fidelity"],
    );
    trace.rows = run
        .trace
        .iter()
        .map(|s| {
            vec![
                Cell::Int(s.step as i64),
                Cell::Int(s.repetition as i64),
                Cell::Num(s.delta),
                Cell::Num(s.herald_probability),
                Cell::Num(s.cumulative_probability),
                Cell::Num(s.fidelity),
            ]
        })
        .collect();

    let m = run.plan.m;
    let mut state = Section::new("final_state", &["basis", "re", "im"]);
    state.rows = run
        .final_state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| {
            vec![
                Cell::Text(format!("|{:0m$b}>", i)),
                Cell::Num(a.re),
                Cell::Num(a.im),
            ]
        })
        .collect();
    doc.sections = vec![trace, state];
    doc
}

pub fn cmd_carve(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let p = &cfg.protocol;
    let plan = match &p.plan {
        Some(steps) => {
            if p.m < 2 {
                return Err(Error::InvalidRegister(format!("carving needs M ≥ 2, got {}", p.m)).into());
            }
            if steps.is_empty() {
                return Err(CliError::Usage("plan override needs at least one detuning".into()));
            }
            ProtocolPlan {
                m: p.m,
                target: Target::for_register(p.m),
                steps: steps.clone(),
            }
        }
        None => plan_protocol_with(p.m, &cfg.system, p.dip_side)?,
    };
    let run = run_plan(&plan, &cfg.system, p.reps)?;
    emit(&carve_document(&run, cfg), &cfg.output, out)
}

/// `$CHIRALCAV_OUTPUT_DIR` when set, else `repro` in the working directory.
pub fn default_repro_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("repro"), PathBuf::from)
}

pub fn curve_document(fig: &FigureData, curve: &FigureCurve, digits: usize) -> Document {
    let mut doc = Document::default();
    doc.meta("figure", fig.id);
    doc.meta("description", fig.description);
    doc.meta("curve", &curve.name);
    doc.meta("label", &curve.label);
    param_metadata(&mut doc, &curve.params, digits);
    for note in &curve.notes {
        doc.meta("note", note);
    }
    match &curve.data {
        CurveData::Spectrum(spec) => {
            grid_metadata(&mut doc, &spec.deltas, digits);
            doc.sections = spectrum_sections(spec);
        }
        CurveData::Map(map) => {
            doc.meta("delta", 0);
            doc.meta("xi_points", map.xi_grid.len());
            doc.meta("gamma_l_points", map.gamma_l_grid.len());
            doc.sections = vec![map_section(map)];
        }
    }
    doc
}

pub fn cmd_repro(figure: &str, dir: &Path, spec: &OutputSpec, out: &mut dyn Write) -> Result<(), CliError> {
    let fig = figure_data_by_name(figure)?;
    for curve in &fig.curves {
        let path = dir.join(format!("{}.{}", curve.name, spec.format.extension()));
        write_file(&path, &render(&curve_document(&fig, curve, spec.precision), spec))?;
        writeln!(out, "{}", path.display()).map_err(|e| CliError::io(PathBuf::from("<stdout>"), e))?;
    }
    Ok(())
}

pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let report = cfg.system.validate();
    let io = |e| CliError::io(PathBuf::from("<stdout>"), e);
    writeln!(out, "{}", cfg.system).map_err(io)?;
    if let Ok(c) = cfg.system.cooperativity() {
        writeln!(out, "cooperativity: {}", format_number(c, cfg.output.precision)).map_err(io)?;
    }
    writeln!(out, "kappa: {}", format_number(cfg.system.kappa(), cfg.output.precision)).map_err(io)?;
    if report.is_ok() {
        writeln!(out, "status: ok").map_err(io)?;
        Ok(())
    } else {
        Err(Error::InvalidParams(report).into())
    }
}
