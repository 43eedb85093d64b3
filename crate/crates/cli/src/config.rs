//! Experiment configuration: the subcommand table and flat key=value files.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Need {
    Required,
    Optional,
    Default(&'static str),
}

pub struct Spec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [(&'static str, Need)],
    /// whether the seed is part of the record provenance
    pub seeded: bool,
}

use Need::*;

macro_rules! keys {
    ($($k:literal => $n:expr),* $(,)?) => { &[$(($k, $n)),*] };
}

pub const SPECS: &[Spec] = &[
    Spec { name: "cf", about: "continued fraction quotients and convergents", keys: keys!["alpha" => Required, "terms" => Default("10")], seeded: false },
    Spec { name: "sigma", about: "height-truncated exponent of one real", keys: keys!["gamma" => Required, "N" => Required], seeded: false },
    Spec {
        name: "sigma-pair",
        about: "height-truncated exponent of a pair",
        keys: keys!["gamma" => Required, "beta" => Required, "N" => Required],
        seeded: false,
    },
    Spec { name: "omega", about: "the ω(q) schedule", keys: keys!["omega" => Default("main:1"), "Q" => Required], seeded: false },
    Spec { name: "divisors", about: "divisor table and F(q)", keys: keys!["q" => Required], seeded: false },
    Spec { name: "f-avg", about: "average of F(q) up to Q", keys: keys!["Q" => Required], seeded: false },
    Spec { name: "aq", about: "the arc set A_q and its measure", keys: keys!["psi" => Required, "gamma" => Required, "q" => Required], seeded: false },
    Spec { name: "pairs", about: "sum of pairwise intersection measures", keys: keys!["psi" => Required, "gamma" => Required, "Q" => Required], seeded: false },
    Spec {
        name: "master-sweep",
        about: "intersection bound over all pairs up to Q",
        keys: keys!["psi" => Required, "gamma" => Required, "Q" => Required, "H" => Default("3"), "C0" => Default("2")],
        seeded: false,
    },
    Spec {
        name: "box-count",
        about: "orbit points in a half-open box",
        keys: keys!["params" => Required, "Q" => Required, "box" => Required],
        seeded: false,
    },
    Spec {
        name: "disc",
        about: "exact 1D or grid 2D discrepancy",
        keys: keys!["alpha" => Required, "beta" => Optional, "Q" => Required, "m" => Default("64")],
        seeded: false,
    },
    Spec {
        name: "etk",
        about: "Erdős–Turán–Koksma bound for every H' ≤ H",
        keys: keys!["alpha" => Required, "beta" => Optional, "N" => Required, "H" => Required],
        seeded: false,
    },
    Spec {
        name: "etk-auto",
        about: "ETK bound at the automatically chosen H",
        keys: keys!["gamma" => Required, "beta" => Required, "N" => Required, "sigma" => Required],
        seeded: false,
    },
    Spec {
        name: "psi-prime",
        about: "the truncated ψ′ values",
        keys: keys!["psi" => Required, "beta" => Required, "gammap" => Default("rat:0"), "omega" => Default("1"), "Q" => Required],
        seeded: false,
    },
    Spec {
        name: "div-sum",
        about: "partial divergence sum of ψ′",
        keys: keys!["psi" => Required, "beta" => Required, "gammap" => Default("rat:0"), "omega" => Default("1"), "Q" => Required],
        seeded: false,
    },
    Spec {
        name: "gl-census",
        about: "dyadic rotation cells G^l",
        keys: keys!["beta" => Required, "gammap" => Default("rat:0"), "omega" => Default("1"), "Q" => Required],
        seeded: false,
    },
    Spec {
        name: "sklr",
        about: "the counting sum S_{k,l,r}(q)",
        keys: keys![
            "psi" => Required, "beta" => Required, "gammap" => Default("rat:0"), "omega" => Default("1"),
            "gamma" => Required, "q" => Required, "k" => Required, "l" => Required, "r" => Required,
        ],
        seeded: false,
    },
    Spec {
        name: "f-moments",
        about: "F(q)^K summed over a census cell",
        keys: keys![
            "beta" => Required, "gammap" => Default("rat:0"), "omega" => Default("1"),
            "Q" => Required, "l" => Required, "K" => Default("1"),
        ],
        seeded: false,
    },
    Spec {
        name: "bc-ratio",
        about: "Borel–Cantelli ratio series",
        keys: keys!["psi" => Required, "gamma" => Required, "Q" => Required, "beta" => Optional, "gammap" => Default("rat:0"), "omega" => Default("1")],
        seeded: false,
    },
    Spec {
        name: "union",
        about: "measure of the truncated union of A_q",
        keys: keys![
            "psi" => Required, "gamma" => Required, "Q0" => Default("1"), "Q" => Required,
            "beta" => Optional, "gammap" => Default("rat:0"), "omega" => Default("1"),
        ],
        seeded: false,
    },
    Spec {
        name: "hits",
        about: "multiplicative hit count at one x",
        keys: keys![
            "x" => Required, "psi" => Required, "gamma" => Required, "Q" => Required,
            "beta" => Optional, "gammap" => Default("rat:0"), "omega" => Default("1"),
        ],
        seeded: false,
    },
    Spec {
        name: "mc-survey",
        about: "Monte-Carlo hit counts against the expectation",
        keys: keys![
            "psi" => Required, "gamma" => Required, "Q" => Required, "samples" => Default("200"),
            "beta" => Optional, "gammap" => Default("rat:0"), "omega" => Default("1"),
        ],
        seeded: true,
    },
    Spec {
        name: "doubly-metric",
        about: "sampled failure fraction of the pair inequality",
        keys: keys!["gamma" => Required, "Hp" => Default("3"), "N" => Required, "samples" => Default("1000")],
        seeded: true,
    },
];

pub fn spec(name: &str) -> Option<&'static Spec> {
    SPECS.iter().find(|s| s.name == name)
}

/// Global keys accepted in a config file next to the experiment keys.
pub const GLOBAL_KEYS: &[&str] = &["experiment", "seed", "precision-bits", "threads", "format", "allow-literal"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ConfigError::new(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { line: None, key: None, message: message.into() }
    }

    pub fn key(key: &str, message: impl Into<String>) -> Self {
        ConfigError { line: None, key: Some(key.to_string()), message: message.into() }
    }

    fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let Some(l) = self.line {
            write!(f, " at line {l}")?;
        }
        if let Some(k) = &self.key {
            write!(f, " (key {k})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// experiment keys with defaults filled in
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub precision_bits: u32,
    /// decimal literals accepted where irrational input is required
    pub allow_literal: bool,
    pub threads: Option<usize>,
    pub format: Format,
}

pub const DEFAULT_PRECISION_BITS: u32 = 4096;

/// Raw key=value pairs with the line each came from.
pub type RawConfig = BTreeMap<String, (String, Option<usize>)>;

/// Parse flat key=value text. Blank lines and `#` comments are skipped.
pub fn parse_file(text: &str) -> Result<RawConfig, ConfigError> {
    let mut out = RawConfig::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::new(format!("expected key=value, got {line:?}")).at_line(n));
        };
        let (k, v) = (k.trim(), v.trim());
        if out.insert(k.to_string(), (v.to_string(), Some(n))).is_some() {
            return Err(ConfigError::key(k, "duplicate key").at_line(n));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Validate raw pairs: the experiment must be known, every key must belong
    /// to it or to the global set, and required keys must be present.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let located = |k: &str, e: ConfigError| match raw.get(k).and_then(|(_, l)| *l) {
            Some(l) => e.at_line(l),
            None => e,
        };
        let (name, _) = raw.get("experiment").ok_or_else(|| ConfigError::key("experiment", "no experiment given"))?;
        let spec = spec(name).ok_or_else(|| located("experiment", ConfigError::key("experiment", format!("unknown experiment {name:?}"))))?;
        let mut params = BTreeMap::new();
        for (k, (v, _)) in raw {
            if GLOBAL_KEYS.contains(&k.as_str()) {
                continue;
            }
            if !spec.keys.iter().any(|(key, _)| key == k) {
                return Err(located(k, ConfigError::key(k, format!("unknown key for {}", spec.name))));
            }
            params.insert(k.clone(), v.clone());
        }
        // the fibre keys only mean something once β is given
        let fibred = spec.keys.iter().any(|(k, n)| *k == "beta" && *n == Optional);
        if fibred && !params.contains_key("beta") {
            for k in ["gammap", "omega"] {
                if params.contains_key(k) {
                    return Err(located(k, ConfigError::key(k, "only valid together with beta")));
                }
            }
        }
        for (k, need) in spec.keys {
            if fibred && !params.contains_key("beta") && (*k == "gammap" || *k == "omega") {
                continue;
            }
            match need {
                Required if !params.contains_key(*k) => return Err(ConfigError::key(k, "missing required key")),
                Default(d) => {
                    params.entry(k.to_string()).or_insert_with(|| d.to_string());
                }
                _ => {}
            }
        }
        let parse_num = |k: &str| -> Result<Option<u64>, ConfigError> {
            raw.get(k)
                .map(|(v, _)| v.parse::<u64>().map_err(|_| located(k, ConfigError::key(k, format!("expected a non-negative integer, got {v:?}")))))
                .transpose()
        };
        let seed = parse_num("seed")?.unwrap_or(0);
        let precision_bits = parse_num("precision-bits")?.unwrap_or(DEFAULT_PRECISION_BITS as u64);
        if !(64..=1 << 20).contains(&precision_bits) {
            return Err(located("precision-bits", ConfigError::key("precision-bits", "must lie in [64, 2^20]")));
        }
        let threads = parse_num("threads")?.map(|t| t as usize);
        if threads == Some(0) {
            return Err(located("threads", ConfigError::key("threads", "must be positive")));
        }
        let allow_literal = match raw.get("allow-literal").map(|(v, _)| v.as_str()) {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => return Err(located("allow-literal", ConfigError::key("allow-literal", format!("expected true or false, got {v:?}")))),
        };
        let format = raw.get("format").map(|(v, _)| v.parse::<Format>().map_err(|e| located("format", e))).transpose()?.unwrap_or_default();
        Ok(ExperimentConfig { experiment: spec.name.to_string(), params, seed, precision_bits: precision_bits as u32, allow_literal, threads, format })
    }

    pub fn spec(&self) -> &'static Spec {
        spec(&self.experiment).expect("validated experiment")
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// The config as key=value text; parsing it back gives the same config.
    pub fn to_file(&self) -> String {
        let mut s = format!("experiment={}\nseed={}\nprecision-bits={}\nformat={}\n", self.experiment, self.seed, self.precision_bits, self.format);
        if self.allow_literal {
            s += "allow-literal=true\n";
        }
        if let Some(t) = self.threads {
            s += &format!("threads={t}\n");
        }
        for (k, v) in &self.params {
            s += &format!("{k}={v}\n");
        }
        s
    }

    /// Canonical provenance string written into every record.
    pub fn provenance(&self) -> String {
        let mut pairs: Vec<(String, String)> = self.params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        if self.spec().seeded {
            pairs.push(("seed".into(), self.seed.to_string()));
        }
        mdl_core::record::canonical_params(pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        pairs.iter().map(|(k, v)| (k.to_string(), (v.to_string(), None))).collect()
    }

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::from_raw(&raw(&[("experiment", "mc-survey"), ("psi", "inv:1/4"), ("gamma", "sqrt:3"), ("Q", "100")])).unwrap();
        assert_eq!(c.get("samples"), Some("200"));
        assert_eq!(c.get("beta"), None);
        assert_eq!(c.provenance(), "Q=100;gamma=sqrt:3;psi=inv:1/4;samples=200;seed=0");
        assert_eq!(c.get("omega"), None);
        let back = ExperimentConfig::from_raw(&parse_file(&c.to_file()).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_carry_location() {
        let e = parse_file("experiment=cf\nalpha=sqrt:2\nbogus=1\n").and_then(|r| ExperimentConfig::from_raw(&r)).unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(3), Some("bogus")));
        let e = parse_file("experiment=cf\nnot a pair\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = ExperimentConfig::from_raw(&raw(&[("experiment", "sigma"), ("gamma", "sqrt:2")])).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("N"));
        assert!(ExperimentConfig::from_raw(&raw(&[("experiment", "nope")])).is_err());
        let e = ExperimentConfig::from_raw(&raw(&[("experiment", "hits"), ("x", "rat:0"), ("psi", "const:1/10"), ("gamma", "rat:0"), ("Q", "3"), ("omega", "2")]));
        assert_eq!(e.unwrap_err().key.as_deref(), Some("omega"));
        assert!(ExperimentConfig::from_raw(&raw(&[("experiment", "cf"), ("alpha", "sqrt:2"), ("format", "xml")])).is_err());
    }

    #[test]
    fn every_spec_is_unique() {
        for (i, a) in SPECS.iter().enumerate() {
            assert!(SPECS[i + 1..].iter().all(|b| b.name != a.name));
        }
        assert_eq!(SPECS.len(), 23);
    }
}
