use std::fmt::Write;
use std::path::Path;

use gdbound_core::macroauc::{
    load_dataset, run_experiment, synthetic_dataset, ExperimentConfig, MeanStd, MultiLabelDataset, SyntheticConfig,
};
use serde_json::json;

use super::{exec, seed, to_value, Context, Leaf, Outcome, EXEC, SEED};
use crate::config::{key, Settings};
use crate::error::CliError;
use crate::output::sig6;

pub const LEAF: Leaf = Leaf {
    path: &["experiment"],
    about: "Split, cross-validate, train and compare both Macro-AUC risk bounds per dataset",
    keys: &[
        key("data", "comma-separated mlsvm dataset files"),
        key("synthetic", "comma-separated synthetic presets: few-labels | many-labels"),
        key("repeats", "number of seeded repeats (default 5)"),
        key("folds", "cross-validation folds (default 3)"),
        key("grid", "weight-decay grid (default 1e-4,1e-3,1e-2,1e-1)"),
        key("lr", "SGD learning rate (default 0.05)"),
        key("epochs", "SGD epochs (default 300)"),
        key("t", "confidence parameter (default ln100)"),
        key("rate", "cut grid d ≤ min(D, K)·rate (default 1)"),
        SEED,
        EXEC,
    ],
    run,
};

fn datasets(s: &mut Settings, seed: u64) -> Result<Vec<(String, MultiLabelDataset)>, CliError> {
    let mut out = Vec::new();
    if let Some(paths) = s.raw("data") {
        for p in paths.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let path = Path::new(p);
            let name = path.file_stem().map_or_else(|| p.to_string(), |n| n.to_string_lossy().into_owned());
            out.push((name, load_dataset(path).map_err(CliError::dataset)?));
        }
    }
    if let Some(presets) = s.raw("synthetic") {
        for p in presets.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let cfg = match p {
                "few-labels" => SyntheticConfig::few_labels(seed),
                "many-labels" => SyntheticConfig::many_labels(seed),
                other => return Err(CliError::Usage(format!("unknown synthetic preset {other:?}"))),
            };
            out.push((format!("synthetic-{p}"), synthetic_dataset(&cfg).map_err(CliError::usage)?));
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("give data and/or synthetic".into()));
    }
    Ok(out)
}

fn ms(x: MeanStd) -> String {
    format!("{} ± {}", sig6(x.mean), sig6(x.std))
}

fn run(s: &mut Settings, ctx: &Context) -> Result<Outcome, CliError> {
    let seed = seed(s)?;
    let exec = exec(s)?;
    let cfg = ExperimentConfig {
        seed,
        repeats: s.parse("repeats", "5")?,
        grid: s.reals("grid", "1e-4,1e-3,1e-2,1e-1")?,
        folds: s.parse("folds", "3")?,
        lr: s.real("lr", "0.05")?,
        epochs: s.parse("epochs", "300")?,
        t: s.real("t", "ln100")?,
        rate: s.real("rate", "1")?,
        ..ExperimentConfig::default()
    };
    let sets = datasets(s, seed)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<28} {:>24} {:>24} {:>24} {:>6} {:>5} {:>6}",
        "dataset", "ours", "prior", "r*", "n", "K", "D"
    );
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for (name, data) in &sets {
        let report = run_experiment(data, &cfg, exec).map_err(CliError::usage)?;
        let sm = &report.summary;
        let (mo, mp) = if sm.ours_smaller { ("*", " ") } else { (" ", "*") };
        let _ = writeln!(
            text,
            "{:<28} {:>23}{mo} {:>23}{mp} {:>24} {:>6} {:>5} {:>6}",
            name,
            ms(sm.bound_ours),
            ms(sm.bound_prior),
            ms(sm.r_star),
            data.n_samples(),
            data.n_labels(),
            data.n_features()
        );
        for run in &report.runs {
            for w in &run.warnings {
                let _ = writeln!(text, "  warning ({name}, seed {}): {w}", run.seed);
            }
        }
        rows.push(json!({ "dataset": name, "summary": report.summary }));
        extra.push((format!("{name}.json"), to_value(&report)?));
    }
    let _ = writeln!(text, "* marks the smaller bound");
    let mut out = Outcome::new(text, Some(seed), json!({ "datasets": rows, "config": cfg }));
    if ctx.output.is_some() {
        out.extra = extra;
    }
    Ok(out)
}
