//! Plain `key=value` run configuration.
//!
//! A run is `weakmeas <command> [config=FILE] [key=value ...]`. The file holds
//! one `key=value` per line (`#` comments allowed); command-line pairs
//! override it. Unknown keys are rejected, defaults are filled in, and the
//! resolved set is what gets written into the output header.

use crate::error::{config_err, CliError};

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    /// `None` with `required = false` means the key is simply absent.
    pub default: Option<&'static str>,
    pub required: bool,
}

const fn req(name: &'static str) -> KeySpec {
    KeySpec { name, default: None, required: true }
}

const fn opt(name: &'static str) -> KeySpec {
    KeySpec { name, default: None, required: false }
}

const fn def(name: &'static str, default: &'static str) -> KeySpec {
    KeySpec { name, default: Some(default), required: false }
}

/// Accepted by every command; never written to headers.
const COMMON: &[KeySpec] = &[def("seed", "0"), def("workers", "0"), def("out", "-")];
const UNRECORDED: &[&str] = &["workers", "out"];

const MI_SWEEP: &[KeySpec] = &[
    req("model"), req("x"), opt("phi"), opt("a"), def("eta", "1"), def("prior", "z"),
    opt("T"), opt("Tmax"), def("points", "20"), def("eps", "0.02"), def("delta", "0.01"), opt("M"),
];
const PLATEAU: &[KeySpec] = &[
    req("model"), req("eta"), def("alpha", "10"), def("x", "0.1"), def("x2T", "10"), def("prior", "z"),
    def("eps", "0.02"), def("delta", "0.01"), opt("M"),
];
// The ±y prior is where weak records can beat strong ones.
const NONMONOTONE: &[KeySpec] = &[
    req("phi"), req("x"), req("T"), def("eta", "1"), def("prior", "y"),
    def("eps", "0.02"), def("delta", "0.01"), opt("M"),
];
const XI: &[KeySpec] = &[req("model"), req("x"), opt("phi"), opt("a")];
const SME: &[KeySpec] = &[
    req("model"), def("tau", "1"), def("omega", "1"), def("eta", "1"), opt("dt"), def("t", "1"),
    def("paths", "10000"), def("samples", "10"), def("state", "up"), def("projection", "physical"), def("control", "false"),
];
const OVERFIT: &[KeySpec] = &[
    req("model"), req("x"), opt("phi"), opt("a"), def("eta", "1"), req("T"), def("n", "10000"),
    opt("n_train"), opt("n_test"), def("iterations", "500"), def("lr", "0.1"), def("l2", "0"), def("delta", "0.01"),
];
const ACCURACY: &[KeySpec] = &[
    req("model"), req("x"), opt("phi"), opt("a"), def("eta", "1"), def("prior", "z"), req("T"),
    def("eps", "0.02"), def("delta", "0.01"), opt("M"),
];
const RECORDS: &[KeySpec] = &[
    req("model"), req("x"), opt("phi"), opt("a"), def("eta", "1"), def("prior", "z"), req("T"), def("n", "10"),
];
const SNR: &[KeySpec] = &[req("model"), opt("alpha"), def("tau", "1"), def("eta", "1"), req("t")];
const REPLAY: &[KeySpec] = &[req("file")];

pub const COMMANDS: &[&str] = &[
    "mi-sweep", "plateau-compare", "nonmonotone-scan", "xi", "sme-ensemble", "overfit", "accuracy", "snr", "records",
    "replay",
];

pub fn schema(command: &str) -> Option<&'static [KeySpec]> {
    Some(match command {
        "mi-sweep" => MI_SWEEP,
        "plateau-compare" => PLATEAU,
        "nonmonotone-scan" => NONMONOTONE,
        "xi" => XI,
        "sme-ensemble" => SME,
        "overfit" => OVERFIT,
        "accuracy" => ACCURACY,
        "snr" => SNR,
        "records" => RECORDS,
        "replay" => REPLAY,
        _ => return None,
    })
}

/// Resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    values: Vec<(String, String)>,
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key=value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// `args` excludes the program name: command first, then pairs.
    pub fn from_args<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let (command, rest) = args.split_first().ok_or_else(|| config_err("missing command"))?;
        let mut file_pairs = Vec::new();
        let mut flag_pairs = Vec::new();
        for a in rest {
            let (k, v) = a
                .as_ref()
                .split_once('=')
                .ok_or_else(|| config_err(format!("expected key=value, got `{}`", a.as_ref())))?;
            if k == "config" {
                let text = std::fs::read_to_string(v).map_err(|e| config_err(format!("reading {v}: {e}")))?;
                file_pairs.extend(parse_pairs(&text)?);
            } else {
                flag_pairs.push((k.to_string(), v.to_string()));
            }
        }
        file_pairs.extend(flag_pairs);
        Self::from_pairs(command.as_ref(), file_pairs)
    }

    /// Later pairs override earlier ones.
    pub fn from_pairs(command: &str, pairs: Vec<(String, String)>) -> Result<Self> {
        let specific = schema(command).ok_or_else(|| config_err(format!("unknown command `{command}`")))?;
        let specs: Vec<&KeySpec> = specific.iter().chain(COMMON).collect();
        let mut given: Vec<(String, String)> = Vec::new();
        for (k, v) in pairs {
            if !specs.iter().any(|s| s.name == k) {
                return Err(config_err(format!("unknown key `{k}` for {command}")));
            }
            match given.iter_mut().find(|(g, _)| *g == k) {
                Some(slot) => slot.1 = v,
                None => given.push((k, v)),
            }
        }
        let mut values = Vec::new();
        for s in specs {
            let v = given.iter().find(|(k, _)| k == s.name).map(|(_, v)| v.clone());
            match (v, s.default) {
                (Some(v), _) => values.push((s.name.to_string(), v)),
                (None, Some(d)) => values.push((s.name.to_string(), d.to_string())),
                (None, None) if s.required => return Err(config_err(format!("missing required key `{}`", s.name))),
                (None, None) => {}
            }
        }
        Ok(Self { command: command.to_string(), values })
    }

    /// `command=` followed by every resolved key that affects results.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![("command".to_string(), self.command.clone())];
        h.extend(self.values.iter().filter(|(k, _)| !UNRECORDED.contains(&k.as_str())).cloned());
        h
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| config_err(format!("missing key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.str(key)?)
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.str(key)?;
        v.parse().map_err(|_| config_err(format!("`{key}`: expected a nonnegative integer, got `{v}`")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    /// Comma-separated reals; `start:stop:count` expands to an inclusive
    /// linear grid.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.str(key)?;
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = item.split(':').collect();
            match parts.as_slice() {
                [one] => out.push(parse_f64(key, one)?),
                [a, b, n] => {
                    let (a, b) = (parse_f64(key, a)?, parse_f64(key, b)?);
                    let n: usize = n.parse().map_err(|_| config_err(format!("`{key}`: bad grid count `{n}`")))?;
                    if n < 2 {
                        return Err(config_err(format!("`{key}`: grid needs at least two points")));
                    }
                    out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
                }
                _ => return Err(config_err(format!("`{key}`: expected value or start:stop:count, got `{item}`"))),
            }
        }
        if out.is_empty() {
            return Err(config_err(format!("`{key}` is empty")));
        }
        Ok(out)
    }

    /// Comma-separated integers; `start:stop[:step]` expands to an inclusive range.
    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.str(key)?;
        let int = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| config_err(format!("`{key}`: expected integers, got `{s}`")))
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = item.split(':').collect();
            match parts.as_slice() {
                [one] => out.push(int(one)?),
                [a, b] | [a, b, _] => {
                    let (a, b) = (int(a)?, int(b)?);
                    let step = if parts.len() == 3 { int(parts[2])? } else { 1 };
                    if step == 0 {
                        return Err(config_err(format!("`{key}`: step must be positive")));
                    }
                    out.extend((a..=b).step_by(step));
                }
                _ => return Err(config_err(format!("`{key}`: bad range `{item}`"))),
            }
        }
        if out.is_empty() {
            return Err(config_err(format!("`{key}` is empty")));
        }
        Ok(out)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(config_err(format!("`{key}`: expected true or false, got `{v}`"))),
        }
    }

    pub fn strs(&self, key: &str) -> Result<Vec<String>> {
        let out: Vec<String> = self.str(key)?.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if out.is_empty() {
            return Err(config_err(format!("`{key}` is empty")));
        }
        Ok(out)
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let lower = v.trim().to_ascii_lowercase();
    let parsed = match lower.as_str() {
        "pi" => Some(std::f64::consts::PI),
        _ => match lower.strip_prefix("pi/") {
            Some(d) => d.parse::<f64>().ok().map(|d| std::f64::consts::PI / d),
            None => lower.parse().ok(),
        },
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(config_err(format!("`{key}`: expected a finite real, got `{v}`"))),
    }
}
