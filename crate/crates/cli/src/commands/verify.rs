use std::fmt::Write;

use gdbound_core::mcverify::{verify_inequality, BaseDist, DependentSampler, Inequality, PairKernel, Structure};

use super::{exec, seed, to_value, Context, Leaf, Outcome, EXEC, SEED};
use crate::config::{key, Settings};
use crate::error::CliError;
use crate::output::sig6;

pub const LEAF: Leaf = Leaf {
    path: &["verify"],
    about: "Monte Carlo check of a tail inequality on a seeded dependent generator",
    keys: &[
        key("structure", "iid:M | bipartite:NPOS,NNEG"),
        key("ineq", "bennett_general | bennett_refined | lower_tail | talagrand"),
        key("base", "uniform | bernoulli:P | point:C | twopoint:LOW,HIGH,P (default uniform)"),
        key("kernel", "pair kernel for bipartite structures: product | mean | positive | negative"),
        key("tasks", "number of tasks K (default 1)"),
        key("trials", "Monte Carlo trials (default 100000)"),
        key("t", "comma-separated t grid (default 0.25,0.5,1,2,4)"),
        SEED,
        EXEC,
    ],
    run,
};

fn run(s: &mut Settings, _: &Context) -> Result<Outcome, CliError> {
    s.require_all(&["structure", "ineq"])?;
    let structure: Structure = s.require("structure")?.parse().map_err(CliError::usage)?;
    let ineq: Inequality = s.require("ineq")?.parse().map_err(CliError::usage)?;
    let base: BaseDist = s.parse::<String>("base", "uniform")?.parse().map_err(CliError::usage)?;
    let kernel: PairKernel = s.parse::<String>("kernel", "product")?.parse().map_err(CliError::usage)?;
    let tasks: usize = s.parse("tasks", "1")?;
    let trials: usize = s.parse("trials", "100000")?;
    let grid = s.reals("t", "0.25,0.5,1,2,4")?;
    let seed = seed(s)?;
    let exec = exec(s)?;
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    if tasks == 0 {
        return Err(CliError::Usage("tasks must be at least 1".into()));
    }
    let sampler = DependentSampler { structure, base, kernel, tasks, seed };
    let report = verify_inequality(&sampler, ineq, &grid, trials, exec).map_err(CliError::usage)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{ineq} on {structure} x{tasks}, {trials} trials: E[Z] = {}, v = {}, W = {}, U = {}",
        sig6(report.mean_z),
        sig6(report.v),
        sig6(report.w),
        sig6(report.u)
    );
    let _ =
        writeln!(text, "{:>10} {:>12} {:>12} {:>12} {:>12}  flag", "t", "deviation", "empirical", "stderr", "bound");
    for r in &report.rows {
        let _ = writeln!(
            text,
            "{:>10} {:>12} {:>12} {:>12} {:>12}  {}",
            sig6(r.t),
            sig6(r.deviation),
            sig6(r.empirical_freq),
            sig6(r.stderr),
            sig6(r.bound),
            if r.violated { "VIOLATED" } else { "ok" }
        );
    }
    let mut out = Outcome::new(text, Some(seed), to_value(&report)?);
    if !report.passed() {
        out.failure = Some(format!("{} of {} thresholds violated", report.violations.len(), report.rows.len()));
    }
    Ok(out)
}
