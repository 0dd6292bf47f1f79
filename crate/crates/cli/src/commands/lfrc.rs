use std::path::Path;

use gdbound_core::lfrc::{estimate_lfrc, fixed_point, LfrcTask, LinearClassSpec, SubRootHandle};
use gdbound_core::macroauc::{all_tasks, load_dataset};
use gdbound_core::Execution;
use nalgebra::DMatrix;
use serde_json::json;

use super::{exec, seed, Context, Leaf, Outcome, EXEC, SEED};
use crate::config::{key, Settings};
use crate::error::CliError;
use crate::output::sig6;

pub const ESTIMATE: Leaf = Leaf {
    path: &["lfrc", "estimate"],
    about: "Estimate the empirical LFRC of the linear class on the pair tasks of a dataset",
    keys: &[
        key("data", "multi-label dataset (mlsvm); each label becomes a pair task"),
        key("norm", "M̃, bound on each task's weight norm"),
        key("radius", "variance radius r (omit for the unlocalized class)"),
        key("draws", "Rademacher draws (default 200)"),
        SEED,
        EXEC,
    ],
    run: run_estimate,
};

pub const FIXED_POINT: Leaf = Leaf {
    path: &["lfrc", "fixed-point"],
    about: "Solve r = Φ(r) for Φ(r) = a√r + b, or Φ(r) = scale·LFRC(r) + b on a dataset",
    keys: &[
        key("a", "coefficient a of a√r + b"),
        key("b", "offset b (default 0)"),
        key("data", "dataset for the LFRC form of Φ"),
        key("norm", "M̃ for the LFRC form"),
        key("scale", "multiplier of the LFRC (default 1)"),
        key("draws", "Rademacher draws for the LFRC form (default 200)"),
        key("r-hi", "upper end of the search interval"),
        key("tol", "relative tolerance (default 1e-10)"),
        SEED,
        EXEC,
    ],
    run: run_fixed_point,
};

struct PairData {
    tasks: Vec<LfrcTask>,
    excluded: Vec<usize>,
}

fn pair_tasks(path: &Path) -> Result<PairData, CliError> {
    let data = load_dataset(path).map_err(CliError::dataset)?;
    let (tasks, excluded) = all_tasks(&data);
    if tasks.is_empty() {
        return Err(CliError::Usage("every label of the dataset is degenerate".into()));
    }
    let rows = |idx: &[usize]| {
        DMatrix::from_row_iterator(idx.len(), data.n_features(), idx.iter().flat_map(|&i| data.row(i).iter().copied()))
    };
    let tasks = tasks
        .iter()
        .map(|t| LfrcTask::Pairs { positives: rows(&t.positives), negatives: rows(&t.negatives) })
        .collect();
    Ok(PairData { tasks, excluded })
}

fn run_estimate(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    s.require_all(&["data", "norm"])?;
    let path = s.require("data")?;
    let norm = s.real_req("norm")?;
    let radius = s.real_opt("radius")?;
    let draws: usize = s.parse("draws", "200")?;
    let seed = seed(s)?;
    let exec = exec(s)?;
    let data = pair_tasks(Path::new(&path))?;
    let spec = LinearClassSpec::from_tasks(&data.tasks, norm, radius).map_err(CliError::usage)?;
    let est = estimate_lfrc(&data.tasks, &spec, draws, seed, exec).map_err(CliError::usage)?;
    let text = format!(
        "LFRC = {} ± {} ({} draws, {} tasks, {} excluded labels)\n",
        sig6(est.estimate),
        sig6(est.stderr),
        est.n_draws,
        data.tasks.len(),
        data.excluded.len()
    );
    let result = json!({ "estimate": est, "n_tasks": data.tasks.len(), "excluded_labels": data.excluded });
    Ok(Outcome::new(text, Some(seed), result))
}

fn lfrc_phi(
    s: &mut Settings,
    b: f64,
    seed: u64,
    exec: Execution,
) -> Result<(Box<dyn Fn(f64) -> f64 + Send + Sync>, f64), CliError> {
    s.require_all(&["data", "norm"])?;
    let path = s.require("data")?;
    let norm = s.real_req("norm")?;
    let scale = s.real("scale", "1")?;
    let draws: usize = s.parse("draws", "200")?;
    if !(scale > 0.0) {
        return Err(CliError::Usage("scale must be positive".into()));
    }
    let data = pair_tasks(Path::new(&path))?;
    let spec = LinearClassSpec::from_tasks(&data.tasks, norm, None).map_err(CliError::usage)?;
    // The unlocalized value caps Φ, so it is a valid upper end for the search.
    let cap = scale * estimate_lfrc(&data.tasks, &spec, draws, seed, exec).map_err(CliError::usage)?.estimate + b;
    let tasks = data.tasks;
    let phi = move |r: f64| {
        let Ok(local) = spec.with_bounds(norm, Some(r)) else { return f64::NAN };
        match estimate_lfrc(&tasks, &local, draws, seed, exec) {
            Ok(e) => scale * e.estimate + b,
            Err(_) => f64::NAN,
        }
    };
    Ok((Box::new(phi), cap.max(f64::MIN_POSITIVE)))
}

fn run_fixed_point(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let exec = exec(s)?;
    let b = s.real("b", "0")?;
    let tol = s.real("tol", "1e-10")?;
    if !(b >= 0.0) || !(tol > 0.0) {
        return Err(CliError::Usage("b must be nonnegative and tol positive".into()));
    }
    let (handle, form) = if s.has("data") {
        if s.has("a") {
            return Err(CliError::Usage("give either a or data, not both".into()));
        }
        let (phi, cap) = lfrc_phi(s, b, seed, exec)?;
        let r_hi = s.real_opt("r-hi")?.unwrap_or(cap);
        (SubRootHandle::new(phi, r_hi), "lfrc")
    } else {
        s.only(&["a", "b", "r-hi", "tol", "seed", "exec"])?;
        let a = s.real_req("a")?;
        if !(a >= 0.0) {
            return Err(CliError::Usage("a must be nonnegative".into()));
        }
        // √r* ≤ a + √b, so this interval always contains the fixed point.
        let default_hi = 4.0 * (a + b.sqrt()).powi(2) + 1.0;
        let r_hi = s.real_opt("r-hi")?.unwrap_or(default_hi);
        (SubRootHandle::affine_sqrt(a, b, r_hi), "affine_sqrt")
    };
    let r = fixed_point(&handle, tol).map_err(CliError::usage)?;
    let residual = handle.eval(r) - r;
    let text = format!("r* = {} (Φ(r*) − r* = {})\n", sig6(r), sig6(residual));
    let result = json!({ "form": form, "r_star": r, "residual": residual, "r_hi": handle.r_hi });
    Ok(Outcome::new(text, Some(seed), result))
}
