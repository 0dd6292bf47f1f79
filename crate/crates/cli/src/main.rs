//! `gdbound`: tail-bound verification, LFRC and r* bounds, and the Macro-AUC
//! bound experiment from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use commands::{leaves, Context, Leaf, Outcome};
use config::{Settings, SEED_ENV};
use error::CliError;
use output::{report_json, write_file};

fn leaf_command(leaf: &Leaf) -> Command {
    let name = *leaf.path.last().expect("leaf path is nonempty");
    let mut cmd = Command::new(name).about(leaf.about);
    if leaf.path == ["bound"] {
        cmd = cmd.arg(
            Arg::new("formula")
                .required(true)
                .value_parser(clap::builder::PossibleValuesParser::new(commands::bound::FORMULAS)),
        );
    }
    for k in leaf.keys {
        cmd = cmd.arg(Arg::new(k.name).long(k.name).value_name("VALUE").help(k.help));
    }
    cmd
}

fn group_about(group: &str) -> &'static str {
    match group {
        "graph" => "Fractional covers and fractional chromatic numbers",
        "lfrc" => "Local fractional Rademacher complexity and sub-root fixed points",
        "rstar" => "Closed-form upper bounds on r*",
        _ => "",
    }
}

fn cli(leaves: &[Leaf]) -> Command {
    let mut root = Command::new("gdbound")
        .about("Generalization-bound toolkit for multi-task learning on graph-dependent data")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("flat `key = value` file or an earlier JSON report"),
        )
        .arg(
            Arg::new("output")
                .long("output")
                .short('o')
                .global(true)
                .value_name("PATH")
                .help("write the full-precision JSON report here (a directory for experiment)"),
        )
        .arg(
            Arg::new("quiet")
                .long("quiet")
                .short('q')
                .global(true)
                .action(ArgAction::SetTrue)
                .help("do not print the summary"),
        );
    let mut groups: BTreeMap<&str, Command> = BTreeMap::new();
    for leaf in leaves {
        match leaf.path {
            [_] => root = root.subcommand(leaf_command(leaf)),
            [group, _] => {
                let g = groups
                    .remove(group)
                    .unwrap_or_else(|| Command::new(*group).about(group_about(group)).subcommand_required(true));
                groups.insert(group, g.subcommand(leaf_command(leaf)));
            }
            _ => unreachable!("leaf paths have one or two parts"),
        }
    }
    for (_, g) in groups {
        root = root.subcommand(g);
    }
    root
}

fn find_leaf<'a>(leaves: &'a [Leaf], m: &'a ArgMatches) -> Option<(&'a Leaf, &'a ArgMatches)> {
    let (name, sub) = m.subcommand()?;
    for leaf in leaves {
        match leaf.path {
            [one] if *one == name => return Some((leaf, sub)),
            [group, child] if *group == name => {
                if let Some((c, cm)) = sub.subcommand() {
                    if c == *child {
                        return Some((leaf, cm));
                    }
                }
            }
            _ => {}
        }
    }
    None
}

fn emit(
    outcome: &Outcome,
    command: &str,
    settings: &Settings,
    output: Option<&Path>,
    quiet: bool,
) -> Result<(), CliError> {
    if !quiet {
        print!("{}", outcome.text);
    }
    let Some(out) = output else { return Ok(()) };
    let main = report_json(command, outcome.seed, settings.resolved(), &outcome.result)?;
    if outcome.extra.is_empty() {
        return write_file(out, &main);
    }
    write_file(&out.join("summary.json"), &main)?;
    for (name, value) in &outcome.extra {
        write_file(&out.join(name), &report_json(command, outcome.seed, settings.resolved(), value)?)?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let leaves = leaves();
    let matches = match cli(&leaves).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            // Help and version go to stdout and are not errors.
            return if e.use_stderr() { Err(CliError::Usage(String::new())) } else { Ok(()) };
        }
    };
    let (leaf, sub) = find_leaf(&leaves, &matches).ok_or_else(|| CliError::Usage("unknown command".into()))?;

    let mut flags = BTreeMap::new();
    for k in leaf.keys {
        if let Some(v) = sub.get_one::<String>(k.name) {
            flags.insert(k.name.to_string(), v.clone());
        }
    }
    let formula = sub.try_get_one::<String>("formula").ok().flatten().map(String::as_str);
    let mut command = leaf.path.join(" ");
    if let Some(f) = formula {
        command = format!("{command} {f}");
    }
    let config_path = sub.get_one::<String>("config").map(PathBuf::from);
    let output = sub.get_one::<String>("output").map(PathBuf::from);
    let quiet = sub.get_flag("quiet");
    let env_seed = std::env::var(SEED_ENV).ok().filter(|v| !v.trim().is_empty());

    let mut settings = Settings::load(&command, leaf.keys, config_path.as_deref(), env_seed, flags)?;
    let ctx = Context { formula, output: output.as_deref() };
    let outcome = (leaf.run)(&mut settings, &ctx)?;
    emit(&outcome, settings.command(), &settings, output.as_deref(), quiet)?;
    match outcome.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("gdbound: {msg}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
