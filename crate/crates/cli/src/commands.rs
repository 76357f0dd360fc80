//! Report assembly. Every quantity has one section builder, so `analyze`
//! and the single-quantity commands emit identical numbers.

use perfpriv_core::correlation::{
    bsc_analysis, inverse_rho_sq, slope_lower_bound, spectral_report, v_star, SearchOptions,
    StartKind, StartTrace, DEFAULT_SEED,
};
use perfpriv_core::numerics::{null_space, DEFAULT_RANK_TOL};
use perfpriv_core::polytope::{build_polytope, Rejection, DEFAULT_COL_TOL, DEFAULT_MAX_Y};
use perfpriv_core::privacy::{
    classify_dx_bound, default_y_values, feasible_general, g0, g0_general,
    min_error_perfect_privacy, mmse_perfect_privacy, non_private_information, Mechanism, PrivacyLp,
    PrivacyOptions,
};
use perfpriv_core::probability::conditional_channel;
use perfpriv_core::{Channel, Error as CoreError, JointPmf, JointPmf3, ProbVector};
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::grid;
use crate::input::{InputDocument, Table};
use crate::report::{ext, indices, matrix, num, nums, object, opt_num, strings, vectors};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Analyze,
    G0,
    Mmse,
    Minerr,
    Dx,
    Maxcorr,
    Vstar,
    Slope,
    Feasible,
    Bsc { px: f64, alpha: f64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::G0 => "g0",
            Command::Mmse => "mmse",
            Command::Minerr => "minerr",
            Command::Dx => "dx",
            Command::Maxcorr => "maxcorr",
            Command::Vstar => "vstar",
            Command::Slope => "slope",
            Command::Feasible => "feasible",
            Command::Bsc { .. } => "bsc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub normalize: bool,
    pub emit_plot_data: bool,
    pub max_y: usize,
    pub rank_tol: f64,
    pub col_tol: f64,
    pub grid_step: Option<f64>,
    pub search: SearchOptions,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            normalize: false,
            emit_plot_data: false,
            max_y: DEFAULT_MAX_Y,
            rank_tol: DEFAULT_RANK_TOL,
            col_tol: DEFAULT_COL_TOL,
            grid_step: None,
            search: SearchOptions::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(CliError::Invalid(format!(
                "--rank-tol {} must lie in (0, 1)",
                self.rank_tol
            )));
        }
        if !(self.col_tol >= 0.0 && self.col_tol.is_finite()) {
            return Err(CliError::Invalid(format!(
                "--col-tol {} must be a nonnegative number",
                self.col_tol
            )));
        }
        if let Some(s) = self.grid_step {
            if !(s > 0.0 && s <= 0.5) {
                return Err(CliError::Invalid(format!(
                    "--grid-step {s} must lie in (0, 0.5]"
                )));
            }
        }
        Ok(())
    }

    fn privacy(&self) -> PrivacyOptions {
        PrivacyOptions {
            rank_tol: self.rank_tol,
            col_tol: self.col_tol,
            max_y: self.max_y,
        }
    }

    fn to_value(&self) -> Value {
        object([
            ("col_tol", num(self.col_tol)),
            ("emit_plot_data", Value::from(self.emit_plot_data)),
            ("grid_step", opt_num(self.grid_step)),
            ("interior_starts", Value::from(self.search.interior_starts)),
            ("max_iters", Value::from(self.search.max_iters)),
            ("max_y", Value::from(self.max_y)),
            ("normalize", Value::from(self.normalize)),
            ("rank_tol", num(self.rank_tol)),
            ("seed", Value::from(self.search.seed)),
        ])
    }
}

/// Collects result sections, diagnostics and warnings for one report.
struct Builder<'a> {
    settings: &'a Settings,
    results: Map<String, Value>,
    diagnostics: Map<String, Value>,
    warnings: Vec<String>,
}

impl Builder<'_> {
    fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    fn diagnostic(&mut self, key: &str, v: Value) {
        self.diagnostics.insert(key.to_string(), v);
    }
}

/// Runs `cmd` and returns the full report. `warnings` are prepended (for
/// example the seed override notice).
pub fn run(
    cmd: Command,
    input: Option<&InputDocument>,
    settings: &Settings,
    warnings: Vec<String>,
) -> Result<Value, CliError> {
    settings.validate()?;
    let mut b = Builder {
        settings,
        results: Map::new(),
        diagnostics: Map::new(),
        warnings,
    };
    if settings.max_y > DEFAULT_MAX_Y {
        b.warnings.push(format!(
            "enumeration cap raised to |Y| <= {}; vertex enumeration visits C(|Y|, rank) bases",
            settings.max_y
        ));
    }
    if settings.search.seed != DEFAULT_SEED {
        b.warnings.push(format!(
            "optimizer seed {:#x} differs from the default; reports are not comparable with default runs",
            settings.search.seed
        ));
    }
    let mut plot = None;

    let input_value = match (cmd, input) {
        (Command::Bsc { px, alpha }, _) => {
            bsc_section(&mut b, px, alpha)?;
            Value::Null
        }
        (_, None) => {
            return Err(CliError::Invalid(format!(
                "{} needs an input file",
                cmd.name()
            )))
        }
        (_, Some(doc)) => {
            if let Some(total) = doc.rescaled_from {
                b.warnings.push(format!(
                    "table summed to {total:e}; rescaled to 1 (--normalize)"
                ));
            }
            match &doc.table {
                Table::Pair(j) => {
                    pair_command(&mut b, cmd, doc, j)?;
                    if settings.emit_plot_data {
                        plot = Some(plot_data(&conditional_channel(j), j.p_y(), settings)?);
                    }
                }
                Table::Triple(j3) => {
                    triple_command(&mut b, cmd, j3)?;
                    if settings.emit_plot_data {
                        plot = Some(plot_data(&j3.channel_x_given_w(), j3.p_w(), settings)?);
                    }
                }
            }
            input_value(doc)
        }
    };

    let mut root = Map::new();
    root.insert("command".into(), Value::from(cmd.name()));
    root.insert("diagnostics".into(), Value::Object(b.diagnostics));
    root.insert("input".into(), input_value);
    if let Some(p) = plot {
        root.insert("plot_data".into(), p);
    }
    root.insert("results".into(), Value::Object(b.results));
    root.insert("settings".into(), settings.to_value());
    root.insert(
        "tool".into(),
        object([
            ("name", Value::from(env!("CARGO_PKG_NAME"))),
            ("version", Value::from(env!("CARGO_PKG_VERSION"))),
        ]),
    );
    root.insert("warnings".into(), strings(&b.warnings));
    Ok(Value::Object(root))
}

fn input_value(doc: &InputDocument) -> Value {
    let mut pairs = vec![
        ("digest", Value::from(doc.digest())),
        ("dims", indices(&doc.dims())),
        ("format", Value::from(doc.format.as_str())),
        ("rescaled_from", opt_num(doc.rescaled_from)),
        ("x_labels", strings(&doc.x_labels)),
        ("y_labels", strings(&doc.y_labels)),
    ];
    if !doc.w_labels.is_empty() {
        pairs.push(("w_labels", strings(&doc.w_labels)));
    }
    object(pairs)
}

/// Numeric Y labels when every label parses, else `1..|Y|` with a warning.
fn y_values(b: &mut Builder, doc: &InputDocument) -> Vec<f64> {
    let parsed: Option<Vec<f64>> = doc
        .y_labels
        .iter()
        .map(|l| l.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    parsed.unwrap_or_else(|| {
        b.warnings
            .push("Y labels are not all numeric; MMSE uses the values 1..|Y|".into());
        default_y_values(doc.y_labels.len())
    })
}

fn pair_command(
    b: &mut Builder,
    cmd: Command,
    doc: &InputDocument,
    j: &JointPmf,
) -> Result<(), CliError> {
    match cmd {
        Command::Analyze => {
            feasibility_section(b, j)?;
            let g = g0_section(b, j)?;
            dx_sections(b, j)?;
            let y = y_values(b, doc);
            mmse_section(b, j, &y)?;
            minerr_section(b, j, doc)?;
            maxcorr_section(b, j)?;
            if g > 0.0 {
                match slope_section(b, j) {
                    Err(CliError::Invalid(msg)) => {
                        b.result("slope", Value::Null);
                        b.warnings.push(format!("slope skipped: {msg}"));
                    }
                    other => other?,
                }
            } else {
                vstar_section(b, j)?;
            }
            grid_section(b, j, &y, true, g <= 0.0)?;
        }
        Command::G0 => {
            g0_section(b, j)?;
            grid_section(b, j, &default_y_values(j.y_len()), true, false)?;
        }
        Command::Mmse => {
            let y = y_values(b, doc);
            mmse_section(b, j, &y)?;
            grid_section(b, j, &y, true, false)?;
        }
        Command::Minerr => {
            minerr_section(b, j, doc)?;
            grid_section(b, j, &default_y_values(j.y_len()), true, false)?;
        }
        Command::Dx => dx_sections(b, j)?,
        Command::Maxcorr => maxcorr_section(b, j)?,
        Command::Vstar => {
            vstar_section(b, j)?;
            grid_section(b, j, &[], false, true)?;
        }
        Command::Slope => slope_section(b, j)?,
        Command::Feasible => feasibility_section(b, j)?,
        Command::Bsc { .. } => unreachable!("bsc takes no table"),
    }
    Ok(())
}

fn triple_command(b: &mut Builder, cmd: Command, j3: &JointPmf3) -> Result<(), CliError> {
    match cmd {
        Command::Analyze | Command::G0 | Command::Feasible => {
            let feasible = feasible_general(
                &j3.channel_x_given_w(),
                &j3.channel_y_given_w(),
                b.settings.rank_tol,
            )?;
            b.result("feasibility", object([("feasible", Value::from(feasible))]));
            if cmd != Command::Feasible {
                let r = g0_general(j3, &b.settings.privacy())?;
                let m = &r.solution.mechanism;
                let ch = j3.channel_x_given_w();
                let x_marg = ch.apply(j3.p_w());
                b.result(
                    "g0",
                    object([
                        ("feasible", Value::from(r.feasible)),
                        ("g0_bits", num(r.value)),
                        ("h_y_bits", num(r.h_y)),
                        ("lp", lp_value(&r.solution)),
                        ("mechanism", mechanism_value(m, &ch, &x_marg, j3.p_w())),
                        ("y_conditionals", vectors(&r.y_conditionals)),
                    ]),
                );
            }
            Ok(())
        }
        _ => Err(CliError::Invalid(format!(
            "{} needs a two-way pxy table; three-way tables support analyze, g0 and feasible",
            cmd.name()
        ))),
    }
}

fn feasibility_section(b: &mut Builder, j: &JointPmf) -> Result<(), CliError> {
    let null_dim = null_space(conditional_channel(j).matrix(), b.settings.rank_tol)?.cols();
    b.result(
        "feasibility",
        object([
            ("feasible", Value::from(null_dim > 0)),
            ("null_dim", Value::from(null_dim)),
            ("rank", Value::from(j.y_len() - null_dim)),
        ]),
    );
    Ok(())
}

fn mechanism_value(m: &Mechanism, channel: &Channel, p_x: &[f64], center: &[f64]) -> Value {
    object([
        ("channel_u_given_y", matrix(&m.channel_u_given_y)),
        ("conditionals", vectors(&m.conditionals)),
        (
            "independence_residual",
            num(m.independence_residual(channel, p_x)),
        ),
        ("marginal_error", num(m.marginal_error(center))),
        ("p_u", nums(&m.p_u)),
        (
            "realizations",
            m.realizations.as_deref().map_or(Value::Null, nums),
        ),
        ("support_size", Value::from(m.support_size())),
        ("vertex_index", indices(&m.vertex_index)),
    ])
}

fn lp_value(s: &PrivacyLp) -> Value {
    object([
        ("basis", indices(&s.lp.basis)),
        ("costs", nums(&s.costs)),
        ("dual", nums(&s.lp.dual)),
        ("null_dim", Value::from(s.polytope.null_dim)),
        ("objective", num(s.lp.objective)),
        ("pivots", Value::from(s.lp.pivots)),
        ("rank", Value::from(s.polytope.rank)),
        ("rejected_bases", Value::from(s.polytope.rejected.len())),
        ("vertex_count", Value::from(s.polytope.extreme_points.len())),
        ("weights", nums(&s.lp.weights)),
    ])
}

fn pair_mechanism(m: &Mechanism, j: &JointPmf) -> Value {
    mechanism_value(m, &conditional_channel(j), j.p_x(), j.p_y())
}

/// Adds the g0 section and returns g0 in bits.
fn g0_section(b: &mut Builder, j: &JointPmf) -> Result<f64, CliError> {
    let r = g0(j, &b.settings.privacy())?;
    b.result(
        "g0",
        object([
            ("g0_bits", num(r.value)),
            ("h_y_bits", num(r.h_y)),
            ("lp", lp_value(&r.solution)),
            ("mechanism", pair_mechanism(r.mechanism(), j)),
            ("min_cond_entropy_bits", num(r.min_cond_entropy)),
        ]),
    );
    Ok(r.value)
}

fn mmse_section(b: &mut Builder, j: &JointPmf, y: &[f64]) -> Result<(), CliError> {
    let r = mmse_perfect_privacy(j, y, &b.settings.privacy())?;
    b.result(
        "mmse",
        object([
            ("lp", lp_value(&r.solution)),
            ("mechanism", pair_mechanism(r.mechanism(), j)),
            ("mmse", num(r.mmse)),
            (
                "realizations",
                r.mechanism()
                    .realizations
                    .as_deref()
                    .map_or(Value::Null, nums),
            ),
            ("variance_y", num(r.variance_y)),
            ("y_values", nums(y)),
        ]),
    );
    Ok(())
}

fn minerr_section(b: &mut Builder, j: &JointPmf, doc: &InputDocument) -> Result<(), CliError> {
    let r = min_error_perfect_privacy(j, &b.settings.privacy())?;
    let labels: Vec<&str> = r
        .guesses
        .iter()
        .map(|&g| doc.y_labels[g].as_str())
        .collect();
    b.result(
        "min_error",
        object([
            ("guess_labels", strings(&labels)),
            ("guesses", indices(&r.guesses)),
            ("lp", lp_value(&r.solution)),
            ("mechanism", pair_mechanism(r.mechanism(), j)),
            ("p_err", num(r.p_err)),
            (
                "realizations",
                r.mechanism()
                    .realizations
                    .as_deref()
                    .map_or(Value::Null, nums),
            ),
        ]),
    );
    Ok(())
}

fn dx_sections(b: &mut Builder, j: &JointPmf) -> Result<(), CliError> {
    let np = non_private_information(j, b.settings.col_tol);
    let groups: Vec<Value> = np.groups.groups.iter().map(|g| indices(g)).collect();
    b.result(
        "non_private",
        object([
            ("c_x_bits", num(np.c_x)),
            ("d_x_bits", num(np.d_x)),
            ("groups", Value::Array(groups)),
            ("singletons", indices(&np.groups.singletons)),
            ("t_pmf", nums(&np.t_pmf)),
        ]),
    );
    let c = classify_dx_bound(j, &b.settings.privacy())?;
    b.result(
        "classification",
        object([
            ("class", Value::from(c.class.as_str())),
            ("null_dim", Value::from(c.null_dim)),
            ("reduced_null_dim", Value::from(c.reduced_null_dim)),
        ]),
    );
    Ok(())
}

fn maxcorr_section(b: &mut Builder, j: &JointPmf) -> Result<(), CliError> {
    let s = spectral_report(j)?;
    b.result(
        "maxcorr",
        object([
            ("directions", vectors(&s.directions)),
            ("inverse_rho_m_sq", ext(inverse_rho_sq(s.rho_m))),
            ("rho_m", num(s.rho_m)),
            ("rho_m_sq", num(s.rho_m * s.rho_m)),
            ("singular_values", nums(&s.singular_values)),
            ("stationary_values", nums(&s.stationary_values)),
        ]),
    );
    Ok(())
}

fn trace_value(trace: &[StartTrace]) -> Value {
    Value::Array(
        trace
            .iter()
            .map(|t| {
                let start = match t.kind {
                    StartKind::Corner(i) => format!("corner {i}"),
                    StartKind::Midpoint(i, k) => format!("midpoint {i} {k}"),
                    StartKind::Interior(i) => format!("interior {i}"),
                };
                object([
                    ("iterations", Value::from(t.iterations)),
                    ("start", Value::from(start)),
                    ("value", t.value.map_or(Value::Null, ext)),
                ])
            })
            .collect(),
    )
}

fn vstar_section(b: &mut Builder, j: &JointPmf) -> Result<(), CliError> {
    let r = v_star(j, &b.settings.search, b.settings.rank_tol)?;
    b.result(
        "vstar",
        object([
            ("argmax", r.argmax.as_deref().map_or(Value::Null, nums)),
            ("center_limit", opt_num(r.center_limit)),
            ("feasible", Value::from(r.feasible)),
            ("v_star", ext(r.value)),
        ]),
    );
    b.diagnostic("vstar_trace", trace_value(&r.trace));
    Ok(())
}

fn slope_section(b: &mut Builder, j: &JointPmf) -> Result<(), CliError> {
    let r =
        slope_lower_bound(j, &b.settings.privacy(), &b.settings.search).map_err(|e| match e {
            CoreError::IndependentPair => CliError::Invalid(e.to_string()),
            other => other.into(),
        })?;
    let psi: Vec<Value> = r
        .psi_values
        .iter()
        .map(|p| {
            object([
                ("argmax", nums(&p.result.argmax)),
                ("atom", Value::from(p.atom)),
                ("center_limit", opt_num(p.result.center_limit)),
                ("conditional", nums(&p.conditional)),
                ("psi", num(p.result.value)),
            ])
        })
        .collect();
    b.result(
        "slope",
        object([
            ("entropy_term", num(r.entropy_term)),
            ("g0_bits", num(r.g0)),
            ("h_y_bits", num(r.h_y)),
            ("l_value", opt_num(r.l_value)),
            ("lower_bound", ext(r.lower_bound)),
            ("mutual_information_bits", num(r.mutual_information)),
            ("psi", Value::Array(psi)),
            ("v_star", ext(r.v_star)),
        ]),
    );
    b.diagnostic("slope_trace", trace_value(&r.optimizer_trace));
    let psi_traces: Vec<Value> = r
        .psi_values
        .iter()
        .map(|p| trace_value(&p.result.trace))
        .collect();
    b.diagnostic("psi_traces", Value::Array(psi_traces));
    Ok(())
}

fn bsc_section(b: &mut Builder, px: f64, alpha: f64) -> Result<(), CliError> {
    let r = bsc_analysis(px, alpha)?;
    b.result(
        "bsc",
        object([
            ("alpha", num(r.alpha)),
            ("bound_violated", Value::from(r.bound_violated)),
            ("inverse_rho_m_sq", ext(inverse_rho_sq(r.rho_m_sq.sqrt()))),
            ("p_x", num(r.p_x)),
            ("p_x_input", num(px)),
            ("p_y", num(r.p_y)),
            ("rho_m_sq", num(r.rho_m_sq)),
            ("rho_m_sq_spectral", num(r.rho_m_sq_spectral)),
            ("slope_actual", ext(r.slope_actual)),
            ("slope_upper", num(r.slope_upper)),
        ]),
    );
    Ok(())
}

/// Grid diagnostics when `--grid-step` is set.
fn grid_section(
    b: &mut Builder,
    j: &JointPmf,
    y: &[f64],
    lp: bool,
    vstar: bool,
) -> Result<(), CliError> {
    let Some(step) = b.settings.grid_step else {
        return Ok(());
    };
    let mut pairs = vec![("step", num(step))];
    if lp {
        match grid::segment_check(j, y, b.settings.rank_tol, step)? {
            Some(c) => {
                pairs.push(("g0_bits", num(c.g0_bits)));
                if !y.is_empty() {
                    pairs.push(("mmse", num(c.mmse)));
                }
                pairs.push(("p_err", num(c.p_err)));
                pairs.push(("segment_points", indices(&[c.points.0, c.points.1])));
            }
            None => b.warnings.push(
                "grid check skipped for the LPs: it needs a one-dimensional null space".into(),
            ),
        }
    }
    if vstar {
        match grid::vstar_check(j, step) {
            Some(v) => pairs.push(("v_star", num(v))),
            None => b
                .warnings
                .push("grid check skipped for V*: it needs |Y| = 2".into()),
        }
    }
    b.diagnostic("grid", object(pairs));
    Ok(())
}

/// Vertices of `S` and, on a 3-symbol alphabet, their planar coordinates in
/// the triangle with corners (0, 0), (1, 0), (1/2, √3/2).
fn plot_data(channel: &Channel, center: &ProbVector, s: &Settings) -> Result<Value, CliError> {
    let poly = build_polytope(channel, center, s.rank_tol, s.max_y)?;
    let points = poly.points();
    let bases: Vec<Value> = poly
        .extreme_points
        .iter()
        .map(|e| indices(&e.basis))
        .collect();
    let rejected: Vec<Value> = poly
        .rejected
        .iter()
        .map(|r| {
            let (reason, min_entry) = match r.reason {
                Rejection::Singular => ("singular", Value::Null),
                Rejection::Negative { min_entry } => ("negative", num(min_entry)),
            };
            object([
                ("basis", indices(&r.basis)),
                ("min_entry", min_entry),
                ("reason", Value::from(reason)),
            ])
        })
        .collect();
    let mut pairs = vec![
        ("bases", Value::Array(bases)),
        ("center", nums(center)),
        ("extreme_points", vectors(&points)),
        ("rejected", Value::Array(rejected)),
    ];
    if center.len() == 3 {
        let planar = |q: &[f64]| vec![q[1] + 0.5 * q[2], q[2] * 3f64.sqrt() / 2.0];
        let coords: Vec<Vec<f64>> = points.iter().map(|p| planar(p)).collect();
        pairs.push((
            "simplex_2d",
            object([
                ("center", nums(&planar(center))),
                (
                    "corners",
                    vectors(&[
                        planar(&[1.0, 0.0, 0.0]),
                        planar(&[0.0, 1.0, 0.0]),
                        planar(&[0.0, 0.0, 1.0]),
                    ]),
                ),
                ("extreme_points", vectors(&coords)),
            ]),
        ));
    }
    Ok(object(pairs))
}
