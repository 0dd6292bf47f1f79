use std::fmt::Write;
use std::path::Path;

use gdbound_core::bounds::{
    rstar_kernel, rstar_linear, spectrum_from_gram, spectrum_from_weights, BoundParams, CutGrid, SpectrumProfile,
    SpectrumSource,
};
use serde_json::json;

use super::{exec, read_matrix, seed, Context, Leaf, Outcome, EXEC, SEED};
use crate::config::{key, parse_reals, Settings};
use crate::error::CliError;
use crate::output::sig6;

const PARAM_KEYS: [crate::config::Key; 5] = [
    key("m", "comma-separated per-task sample counts"),
    key("chi", "comma-separated per-task fractional chromatic numbers"),
    key("tau", "comma-separated imbalance factors (Macro-AUC form instead of m, chi)"),
    key("n", "training sample count ñ (with tau)"),
    key("weight-norm", "M̃"),
];

pub const KERNEL: Leaf = Leaf {
    path: &["rstar", "kernel"],
    about: "Upper bound on r* for kernel classes from per-task spectra",
    keys: &[
        key("gram", "comma-separated Gram matrix files, one per task"),
        key("spectrum", "per-task eigenvalue lists, tasks separated by ';'"),
        PARAM_KEYS[0],
        PARAM_KEYS[1],
        PARAM_KEYS[2],
        PARAM_KEYS[3],
        PARAM_KEYS[4],
        SEED,
        EXEC,
    ],
    run: run_kernel,
};

pub const LINEAR: Leaf = Leaf {
    path: &["rstar", "linear"],
    about: "Upper bound on r* for norm-bounded linear classes from the weight spectrum",
    keys: &[
        key("weights", "K×D weight matrix file"),
        key("spectrum", "squared singular values, comma-separated"),
        key("feature-norm", "M̄"),
        key("max-d", "largest cut searched (default: spectrum length)"),
        PARAM_KEYS[0],
        PARAM_KEYS[1],
        PARAM_KEYS[2],
        PARAM_KEYS[3],
        PARAM_KEYS[4],
        SEED,
    ],
    run: run_linear,
};

fn params(s: &mut Settings, feature_norm: f64) -> Result<BoundParams, CliError> {
    let weight_norm = s.real_req("weight-norm")?;
    if s.has("tau") {
        if s.has("m") || s.has("chi") {
            return Err(CliError::Usage("give either tau and n, or m and chi".into()));
        }
        s.require_all(&["tau", "n"])?;
        BoundParams::macro_auc(s.reals_req("tau")?, s.real_req("n")?, weight_norm, feature_norm, 0.0)
    } else {
        s.require_all(&["m", "chi"])?;
        BoundParams::new(s.reals_req("m")?, s.reals_req("chi")?, weight_norm, feature_norm, 0.0)
    }
    .map_err(CliError::usage)
}

fn spectrum_list(source: SpectrumSource, text: &str) -> Result<SpectrumProfile, CliError> {
    SpectrumProfile::new(parse_reals("spectrum", text)?, source, None).map_err(CliError::usage)
}

fn run_kernel(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let exec = exec(s)?;
    let spectra: Vec<SpectrumProfile> = match (s.raw("gram"), s.raw("spectrum")) {
        (Some(g), None) => g
            .split(',')
            .map(|p| spectrum_from_gram(&read_matrix(Path::new(p.trim()))?).map_err(CliError::usage))
            .collect::<Result<_, _>>()?,
        (None, Some(sp)) => {
            sp.split(';').map(|t| spectrum_list(SpectrumSource::KernelGram, t)).collect::<Result<_, _>>()?
        }
        _ => return Err(CliError::Usage("give exactly one of gram or spectrum".into())),
    };
    let p = params(s, 1.0)?;
    let r = rstar_kernel(&spectra, &p, exec).map_err(CliError::usage)?;
    let mut text = format!("r* ≤ {}\n", sig6(r.value));
    let _ = writeln!(text, "cuts d_k = {:?}", r.cuts);
    Ok(Outcome::new(text, Some(seed), json!({ "r_star": r.value, "cuts": r.cuts, "spectra": spectra })))
}

fn run_linear(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let spectrum = match (s.raw("weights"), s.raw("spectrum")) {
        (Some(w), None) => spectrum_from_weights(&read_matrix(Path::new(&w))?).map_err(CliError::usage)?,
        (None, Some(sp)) => spectrum_list(SpectrumSource::WeightSvd, &sp)?,
        _ => return Err(CliError::Usage("give exactly one of weights or spectrum".into())),
    };
    let feature_norm = s.real_req("feature-norm")?;
    let grid = match s.parse_opt::<usize>("max-d")? {
        Some(d) => CutGrid::UpTo(d),
        None => CutGrid::Full,
    };
    let p = params(s, feature_norm)?;
    let r = rstar_linear(&spectrum, &p, grid).map_err(CliError::usage)?;
    let text = format!("r* ≤ {} at d = {}\n", sig6(r.value), r.cuts[0]);
    Ok(Outcome::new(text, Some(seed), json!({ "r_star": r.value, "d": r.cuts[0], "spectrum": spectrum })))
}
