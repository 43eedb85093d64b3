use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use mdl_cli::config::{parse_file, ConfigError, ExperimentConfig, Need, RawConfig, SPECS};
use mdl_cli::experiments::run;

fn cli() -> Command {
    let mut cmd = Command::new("mdl")
        .about("Exact experiments for fibred multiplicative Diophantine approximation")
        .arg(Arg::new("precision-bits").long("precision-bits").global(true).value_name("BITS").help("precision cap for rigorous comparisons"))
        .arg(Arg::new("seed").long("seed").global(true).value_name("SEED"))
        .arg(Arg::new("threads").long("threads").global(true).value_name("N"))
        .arg(Arg::new("format").long("format").global(true).value_name("csv|json"))
        .arg(
            Arg::new("allow-literal")
                .long("allow-literal")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("accept decimal literals where irrational input is required"),
        )
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("key=value file; flags override it"));
    for spec in SPECS {
        let mut sub = Command::new(spec.name).about(spec.about);
        for (key, need) in spec.keys {
            let help = match need {
                Need::Required => "required".to_string(),
                Need::Optional => "optional".to_string(),
                Need::Default(v) => format!("default {v}"),
            };
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").action(ArgAction::Set).help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn collect(m: &ArgMatches) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(format!("cannot read {path}: {e}")))?;
            parse_file(&text)?
        }
        None => RawConfig::new(),
    };
    let mut set = |k: &str, v: &str| {
        raw.insert(k.to_string(), (v.to_string(), None));
    };
    if let Some((name, sub)) = m.subcommand() {
        set("experiment", name);
        for id in sub.ids() {
            let k = id.as_str();
            if ["precision-bits", "seed", "threads", "format", "config", "allow-literal"].contains(&k) {
                continue;
            }
            if let Some(v) = sub.get_one::<String>(k) {
                set(k, v);
            }
        }
    }
    let sub = m.subcommand().map(|(_, s)| s);
    for k in ["precision-bits", "seed", "threads", "format"] {
        if let Some(v) = sub.and_then(|s| s.get_one::<String>(k)).or_else(|| m.get_one::<String>(k)) {
            set(k, v);
        }
    }
    if m.get_flag("allow-literal") || sub.is_some_and(|s| s.get_flag("allow-literal")) {
        set("allow-literal", "true");
    }
    ExperimentConfig::from_raw(&raw)
}

fn main() -> ExitCode {
    let m = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match collect(&m) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("cannot start {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = mdl_cli::emit(&cfg, &out, BufWriter::new(io::stdout().lock())) {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(1);
    }
    if out.undecided_dominated() {
        eprintln!("{} of {} decisions undecided at the precision cap", out.undecided, out.tests);
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
