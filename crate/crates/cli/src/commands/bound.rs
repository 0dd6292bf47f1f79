use std::fmt::Write;

use gdbound_core::bounds::{
    bound_kernel_macroauc, bound_ours_macroauc, bound_prior_macroauc, excess_bound_general, BoundParams,
};
use gdbound_core::concentration::{
    bennett_lower_tail, bennett_tail_general, bennett_tail_refined, bernstein_deviation, refined_deviation,
    talagrand_certificate, talagrand_v, two_sided, TailBoundInput,
};
use serde_json::json;

use super::{seed, Context, Leaf, Outcome, SEED};
use crate::config::{key, Settings};
use crate::error::CliError;
use crate::output::sig6;

pub const FORMULAS: &[&str] = &[
    "bernstein",
    "refined-deviation",
    "bennett-general",
    "bennett-refined",
    "lower-tail",
    "talagrand",
    "excess-general",
    "ours-macroauc",
    "prior-macroauc",
    "kernel-macroauc",
];

pub const LEAF: Leaf = Leaf {
    path: &["bound"],
    about: "Evaluate one bound formula on explicit parameters",
    keys: &[
        key("c", "deviation constant c"),
        key("v", "variance proxy v"),
        key("t", "confidence or threshold parameter (accepts ln100)"),
        key("b", "bound on the centred summands"),
        key("ez", "E[Z]"),
        key("sigma2", "aggregate variance Σσ²"),
        key("chi", "comma-separated per-task fractional chromatic numbers"),
        key("refined", "true to use the unit-weight form (talagrand)"),
        key("r", "localization radius r"),
        key("rstar", "fixed point r*"),
        key("m", "comma-separated per-task sample counts"),
        key("K", "number of labels (checked against tau)"),
        key("tau", "comma-separated per-label imbalance factors"),
        key("n", "number of training samples ñ"),
        key("mu", "Lipschitz constant of the loss (default 1)"),
        key("B", "loss constant B (default 1)"),
        key("feature-norm", "M̄, bound on ‖x‖"),
        key("weight-norm", "M̃, bound on ‖w_k‖"),
        SEED,
    ],
    run,
};

fn tail_input(s: &mut Settings) -> Result<TailBoundInput, CliError> {
    s.require_all(&["b", "ez", "sigma2", "chi", "t"])?;
    let input =
        TailBoundInput::aggregate(s.real_req("b")?, s.real_req("ez")?, s.real_req("sigma2")?, s.reals_req("chi")?);
    input.validate().map_err(CliError::usage)?;
    Ok(input)
}

fn macro_params(s: &mut Settings, weight_norm: f64, feature_norm: f64) -> Result<BoundParams, CliError> {
    let tau = s.reals_req("tau")?;
    if let Some(k) = s.parse_opt::<usize>("K")? {
        if k != tau.len() {
            return Err(CliError::Usage(format!("K = {k} but tau has {} entries", tau.len())));
        }
    }
    let n = s.real_req("n")?;
    let t = s.real_req("t")?;
    BoundParams::macro_auc(tau, n, weight_norm, feature_norm, t).map_err(CliError::usage)
}

fn run(s: &mut Settings, ctx: &Context) -> Result<Outcome, CliError> {
    let formula = ctx.formula.ok_or_else(|| CliError::Usage("missing formula".into()))?;
    let seed = seed(s)?;
    let with_seed = |keys: &[&'static str]| -> Vec<&'static str> { keys.iter().copied().chain(["seed"]).collect() };
    let (value, extra) = match formula {
        "bernstein" | "refined-deviation" => {
            s.only(&with_seed(&["c", "v", "t"]))?;
            s.require_all(&["c", "v", "t"])?;
            let (c, v, t) = (s.real_req("c")?, s.real_req("v")?, s.real_req("t")?);
            let f = if formula == "bernstein" { bernstein_deviation } else { refined_deviation };
            (f(c, v, t).map_err(CliError::usage)?, json!({}))
        }
        "bennett-general" => {
            s.only(&with_seed(&["b", "ez", "sigma2", "chi", "t"]))?;
            let input = tail_input(s)?;
            let g = bennett_tail_general(&input, s.real_req("t")?).map_err(CliError::usage)?;
            (g.p_tight, json!({ "p_simple": g.p_simple, "two_sided": two_sided(g.p_tight) }))
        }
        "bennett-refined" | "lower-tail" => {
            s.only(&with_seed(&["b", "ez", "sigma2", "chi", "t"]))?;
            let input = tail_input(s)?;
            let t = s.real_req("t")?;
            let p =
                if formula == "lower-tail" { bennett_lower_tail(&input, t) } else { bennett_tail_refined(&input, t) }
                    .map_err(CliError::usage)?;
            (p, json!({ "two_sided": two_sided(p) }))
        }
        "talagrand" => {
            s.only(&with_seed(&["sigma2", "ez", "chi", "t", "refined"]))?;
            s.require_all(&["sigma2", "ez", "chi", "t"])?;
            let v = talagrand_v(&[(1.0, s.real_req("sigma2")?)], s.real_req("ez")?).map_err(CliError::usage)?;
            let chi = s.reals_req("chi")?;
            let refined: bool = s.parse("refined", "false")?;
            let cert = talagrand_certificate(v, &chi, s.real_req("t")?, refined).map_err(CliError::usage)?;
            (cert.deviation, json!({ "v": v, "form": cert.form }))
        }
        "excess-general" => {
            s.only(&with_seed(&["r", "m", "chi", "t", "B"]))?;
            s.require_all(&["r", "m", "chi", "t"])?;
            let b = s.real("B", "1")?;
            let p = BoundParams::new(s.reals_req("m")?, s.reals_req("chi")?, 1.0, 1.0, s.real_req("t")?)
                .and_then(|p| p.with_b(b))
                .map_err(CliError::usage)?;
            (excess_bound_general(s.real_req("r")?, &p).map_err(CliError::usage)?, json!({}))
        }
        "ours-macroauc" => {
            s.only(&with_seed(&["rstar", "K", "tau", "n", "t", "mu"]))?;
            s.require_all(&["rstar", "tau", "n", "t"])?;
            let p = macro_params(s, 1.0, 1.0)?.with_mu(s.real("mu", "1")?).map_err(CliError::usage)?;
            (bound_ours_macroauc(s.real_req("rstar")?, &p).map_err(CliError::usage)?, json!({}))
        }
        "prior-macroauc" => {
            s.only(&with_seed(&["K", "tau", "n", "t", "mu", "feature-norm", "weight-norm"]))?;
            s.require_all(&["tau", "n", "t", "feature-norm", "weight-norm"])?;
            let (wn, fnorm) = (s.real_req("weight-norm")?, s.real_req("feature-norm")?);
            let p = macro_params(s, wn, fnorm)?.with_mu(s.real("mu", "1")?).map_err(CliError::usage)?;
            (bound_prior_macroauc(&p).map_err(CliError::usage)?, json!({}))
        }
        "kernel-macroauc" => {
            s.only(&with_seed(&["rstar", "K", "tau", "n", "t", "B"]))?;
            s.require_all(&["rstar", "tau", "n", "t"])?;
            let p = macro_params(s, 1.0, 1.0)?.with_b(s.real("B", "1")?).map_err(CliError::usage)?;
            (bound_kernel_macroauc(s.real_req("rstar")?, &p).map_err(CliError::usage)?, json!({}))
        }
        other => return Err(CliError::Usage(format!("unknown formula {other:?}; one of {}", FORMULAS.join(", ")))),
    };
    let mut text = format!("{formula} = {}\n", sig6(value));
    if let Some(obj) = extra.as_object() {
        for (k, v) in obj {
            if let Some(x) = v.as_f64() {
                let _ = writeln!(text, "  {k} = {}", sig6(x));
            } else {
                let _ = writeln!(text, "  {k} = {}", v.as_str().unwrap_or(&v.to_string()));
            }
        }
    }
    Ok(Outcome::new(text, Some(seed), json!({ "formula": formula, "value": value, "details": extra })))
}
