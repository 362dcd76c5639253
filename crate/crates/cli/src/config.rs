//! Run configuration.
//!
//! A [`RunConfig`] is resolved from three layers in increasing precedence:
//! built-in defaults, an optional flat TOML file, and command-line flags. The
//! resolved config is embedded in every output file so a run can be repeated
//! from the file alone.
//!
//! ```toml
//! cross_section = "2x1"
//! a_tilde = 0.05
//! schedule = "2:1e5:400"
//! grid = "41x21"
//! seeds = ["1.0,0.2", "-0.5,-0.5"]
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use zelf::continuation::log_schedule;
use zelf::{CrossSection, ModelParams};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Field,
    Simulate,
    Equilibria,
    Limits,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Log,
    Lin,
}

/// Bend-radius schedule `lo:hi:n[:log|lin]`, always run from `hi` down to `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub low: f64,
    pub high: f64,
    pub n: usize,
    pub spacing: Spacing,
}

pub const MAX_SCHEDULE_POINTS: usize = 100_000;

impl Schedule {
    /// Descending bend radii with exact endpoints.
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_schedule(self.high, self.low, self.n),
            Spacing::Lin => (0..self.n)
                .map(|i| match i {
                    0 => self.high,
                    _ if i == self.n - 1 => self.low,
                    _ => self.high - (self.high - self.low) * i as f64 / (self.n - 1) as f64,
                })
                .collect(),
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, ConfigError> {
    let v: f64 = s.trim().parse().map_err(|_| ConfigError::Parse(format!("{what}: `{s}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Parse(format!("{what}: `{s}` is not finite")))
    }
}

impl FromStr for Schedule {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(parts.len() == 3 || parts.len() == 4) {
            return Err(ConfigError::Parse(format!("schedule `{s}`: expected lo:hi:n or lo:hi:n:lin")));
        }
        let low = parse_f64(parts[0], "schedule low end")?;
        let high = parse_f64(parts[1], "schedule high end")?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| ConfigError::Parse(format!("schedule `{s}`: `{}` is not a point count", parts[2])))?;
        let spacing = match parts.get(3).map(|p| p.trim()) {
            None | Some("log") => Spacing::Log,
            Some("lin") => Spacing::Lin,
            Some(other) => return Err(ConfigError::Parse(format!("schedule spacing `{other}`: expected log or lin"))),
        };
        if !(low > 0.0 && high > low) {
            return Err(ConfigError::Parse(format!("schedule `{s}`: need 0 < lo < hi")));
        }
        if !(2..=MAX_SCHEDULE_POINTS).contains(&n) {
            return Err(ConfigError::Parse(format!("schedule `{s}`: n must be in 2..={MAX_SCHEDULE_POINTS}")));
        }
        Ok(Schedule { low, high, n, spacing })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.low, self.high, self.n)?;
        if self.spacing == Spacing::Lin {
            f.write_str(":lin")?;
        }
        Ok(())
    }
}

/// Grid resolution `NxM`: `N` points along `r`, `M` along `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nr: usize,
    pub nz: usize,
}

pub const MAX_GRID_POINTS: usize = 10_000;

impl FromStr for Grid {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (a, b) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| ConfigError::Parse(format!("grid `{s}`: expected NxM")))?;
        let num = |t: &str| -> Result<usize, ConfigError> {
            let n: usize = t.trim().parse().map_err(|_| ConfigError::Parse(format!("grid `{s}`: `{t}` is not a count")))?;
            if (2..=MAX_GRID_POINTS).contains(&n) {
                Ok(n)
            } else {
                Err(ConfigError::Parse(format!("grid `{s}`: counts must be in 2..={MAX_GRID_POINTS}")))
            }
        };
        Ok(Grid { nr: num(a)?, nz: num(b)? })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nr, self.nz)
    }
}

/// Starting point `r,z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub r: f64,
    pub z: f64,
}

impl FromStr for Seed {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (a, b) = s.split_once(',').ok_or_else(|| ConfigError::Parse(format!("seed `{s}`: expected r,z")))?;
        Ok(Seed { r: parse_f64(a, "seed r")?, z: parse_f64(b, "seed z")? })
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.r, self.z)
    }
}

macro_rules! serde_via_str {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

serde_via_str!(Schedule, Grid, Seed);

mod cross_section_text {
    use super::*;

    pub fn serialize<S: Serializer>(cs: &CrossSection, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(cs)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CrossSection, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(cs: &Option<CrossSection>, s: S) -> Result<S::Ok, S::Error> {
            match cs {
                Some(cs) => s.collect_str(cs),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CrossSection>, D::Error> {
            Option::<String>::deserialize(d)?.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
        }
    }
}

/// One layer of settings; unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, with = "cross_section_text::option", skip_serializing_if = "Option::is_none")]
    pub cross_section: Option<CrossSection>,
    pub a_tilde: Option<f64>,
    pub r_tilde: Option<f64>,
    pub schedule: Option<Schedule>,
    pub lift_only: Option<bool>,
    pub drag_only: Option<bool>,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<Seed>>,
    pub random_seeds: Option<usize>,
    pub rng_seed: Option<u64>,
    pub t_end: Option<f64>,
    pub contours: Option<bool>,
    pub limit_cycles: Option<bool>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(format!("config file: {}", e.message())))
    }

    /// `self` over `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            cross_section: self.cross_section.or(lower.cross_section),
            a_tilde: self.a_tilde.or(lower.a_tilde),
            r_tilde: self.r_tilde.or(lower.r_tilde),
            schedule: self.schedule.or(lower.schedule),
            lift_only: self.lift_only.or(lower.lift_only),
            drag_only: self.drag_only.or(lower.drag_only),
            grid: self.grid.or(lower.grid),
            tol: self.tol.or(lower.tol),
            format: self.format.or(lower.format),
            out: self.out.or(lower.out),
            seeds: self.seeds.or(lower.seeds),
            random_seeds: self.random_seeds.or(lower.random_seeds),
            rng_seed: self.rng_seed.or(lower.rng_seed),
            t_end: self.t_end.or(lower.t_end),
            contours: self.contours.or(lower.contours),
            limit_cycles: self.limit_cycles.or(lower.limit_cycles),
        }
    }

    /// Names of the set fields that `command` does not use.
    fn unused_by(&self, command: Command) -> Vec<&'static str> {
        use Command::*;
        let uses = |cmds: &[Command]| cmds.contains(&command);
        let mut out = Vec::new();
        let mut flag = |set: bool, name, cmds: &[Command]| {
            if set && !uses(cmds) {
                out.push(name);
            }
        };
        flag(self.a_tilde.is_some(), "a_tilde", &[Simulate, Equilibria, Limits, Sweep]);
        flag(self.r_tilde.is_some(), "r_tilde", &[Simulate, Equilibria, Limits]);
        flag(self.schedule.is_some(), "schedule", &[Sweep]);
        flag(self.lift_only.is_some(), "lift_only", &[Simulate, Equilibria, Limits]);
        flag(self.drag_only.is_some(), "drag_only", &[Simulate, Equilibria, Limits]);
        flag(self.grid.is_some(), "grid", &[Field, Equilibria, Sweep]);
        flag(self.tol.is_some(), "tol", &[Simulate, Equilibria, Sweep]);
        flag(self.format.is_some(), "format", &[Field, Equilibria, Limits]);
        flag(self.seeds.is_some(), "seeds", &[Simulate]);
        flag(self.random_seeds.is_some(), "random_seeds", &[Simulate]);
        flag(self.rng_seed.is_some(), "rng_seed", &[Simulate]);
        flag(self.t_end.is_some(), "t_end", &[Simulate]);
        flag(self.contours.is_some(), "contours", &[Field]);
        flag(self.limit_cycles.is_some(), "limit_cycles", &[Equilibria]);
        out
    }
}

/// A fully resolved run.
///
/// `out` is where results go, not what they are, so it is left out of the
/// embedded copy; two runs differing only in `out` write identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(with = "cross_section_text")]
    pub cross_section: CrossSection,
    pub a_tilde: f64,
    pub r_tilde: Option<f64>,
    pub schedule: Option<Schedule>,
    pub lift_only: bool,
    pub drag_only: bool,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seeds: Vec<Seed>,
    pub random_seeds: usize,
    pub rng_seed: u64,
    pub t_end: Option<f64>,
    pub contours: bool,
    pub limit_cycles: bool,
}

pub const DEFAULT_A_TILDE: f64 = 0.05;
/// Bend radius for drag-only limit reports when none is given.
pub const DEFAULT_DRAG_LIMIT_R_TILDE: f64 = 100.0;
pub const DEFAULT_T_END: f64 = 1e9;
pub const MAX_RANDOM_SEEDS: usize = 100_000;

impl RunConfig {
    /// Layers `flags` over `file` over the defaults. Flags a command does not
    /// use are errors; such keys in the file are dropped.
    pub fn resolve(command: Command, file: Settings, flags: Settings) -> Result<Self, ConfigError> {
        let unused = flags.unused_by(command);
        if !unused.is_empty() {
            return invalid(format!("`{command:?}` does not take: {}", unused.join(", ")).to_lowercase());
        }
        let s = flags.over(file);
        let unused = s.unused_by(command);
        let keep = |name: &str| !unused.contains(&name);
        let cfg = RunConfig {
            command,
            cross_section: s.cross_section.unwrap_or(CrossSection::Rect2x1),
            a_tilde: s.a_tilde.filter(|_| keep("a_tilde")).unwrap_or(DEFAULT_A_TILDE),
            r_tilde: s.r_tilde.filter(|_| keep("r_tilde")),
            schedule: s.schedule.filter(|_| keep("schedule")),
            lift_only: s.lift_only.filter(|_| keep("lift_only")).unwrap_or(false),
            drag_only: s.drag_only.filter(|_| keep("drag_only")).unwrap_or(false),
            grid: s.grid.filter(|_| keep("grid")),
            tol: s.tol.filter(|_| keep("tol")),
            format: s.format.filter(|_| keep("format")).unwrap_or_default(),
            out: s.out,
            seeds: s.seeds.filter(|_| keep("seeds")).unwrap_or_default(),
            random_seeds: s.random_seeds.filter(|_| keep("random_seeds")).unwrap_or(0),
            rng_seed: s.rng_seed.filter(|_| keep("rng_seed")).unwrap_or(0),
            t_end: s.t_end.filter(|_| keep("t_end")),
            contours: s.contours.filter(|_| keep("contours")).unwrap_or(false),
            limit_cycles: s.limit_cycles.filter(|_| keep("limit_cycles")).unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let cs = self.cross_section;
        if !(self.a_tilde.is_finite() && self.a_tilde > 0.0) {
            return invalid(format!("a_tilde must be positive, got {}", self.a_tilde));
        }
        if let Some(r) = self.r_tilde {
            if !(r.is_finite() && r > 0.0) {
                return invalid(format!("r_tilde must be positive and finite, got {r}"));
            }
        }
        if self.lift_only && self.drag_only {
            return invalid("lift_only and drag_only are mutually exclusive");
        }
        if self.lift_only && self.r_tilde.is_some() {
            return invalid("lift_only takes no r_tilde (the bend radius is infinite)");
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0 && t < 1.0) {
                return invalid(format!("tol must be in (0, 1), got {t}"));
            }
        }
        if let Some(t) = self.t_end {
            if !(t.is_finite() && t > 0.0) {
                return invalid(format!("t_end must be positive and finite, got {t}"));
            }
        }
        if self.random_seeds > MAX_RANDOM_SEEDS {
            return invalid(format!("random_seeds is limited to {MAX_RANDOM_SEEDS}"));
        }
        if let Some(s) = self.seeds.iter().find(|s| !cs.contains(s.r, s.z)) {
            return invalid(format!("seed ({}, {}) lies outside the {cs} cross-section", s.r, s.z));
        }
        if let Some(sch) = self.schedule {
            if sch.low < cs.min_bend_radius() {
                return invalid(format!(
                    "schedule low end {} is below the minimum bend radius {} for {cs}",
                    sch.low,
                    cs.min_bend_radius()
                ));
            }
            if sch.high > zelf::continuation::MAX_BEND_RADIUS {
                return invalid(format!("schedule high end {} is too large", sch.high));
            }
        }
        if matches!(self.command, Command::Simulate | Command::Equilibria) && !self.lift_only && self.r_tilde.is_none() {
            return invalid("r_tilde is required unless lift_only is set");
        }
        if self.command == Command::Simulate && self.seeds.is_empty() && self.random_seeds == 0 {
            return invalid("simulate needs at least one seed (seeds or random_seeds)");
        }
        if self.command != Command::Limits {
            self.model_params()?;
        }
        Ok(())
    }

    /// Model parameters for the single-radius commands.
    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let cs = self.cross_section;
        let mp = if self.drag_only {
            match self.r_tilde {
                Some(r) => ModelParams::drag_only(cs, r),
                None => return invalid("drag_only needs r_tilde"),
            }
        } else if self.lift_only || self.r_tilde.is_none() {
            ModelParams::lift_only(cs, self.a_tilde)
        } else {
            ModelParams::full(cs, self.a_tilde, self.r_tilde.unwrap_or(f64::INFINITY))
        };
        mp.map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The schedule for a sweep, descending.
    pub fn schedule_values(&self) -> Vec<f64> {
        match self.schedule {
            Some(s) => s.values(),
            None => zelf::continuation::default_schedule(self.cross_section),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("RunConfig serializes")
    }

    /// `# config: {...}` header line, without trailing newline.
    pub fn header(&self) -> String {
        format!("# config: {}", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_round_trip() {
        let s: Schedule = "2:1e5:400".parse().unwrap();
        assert_eq!(s, Schedule { low: 2.0, high: 1e5, n: 400, spacing: Spacing::Log });
        assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
        let v = s.values();
        assert_eq!((v[0], v[399], v.len()), (1e5, 2.0, 400));
        let lin: Schedule = "10:20:3:lin".parse().unwrap();
        assert_eq!(lin.values(), vec![20.0, 15.0, 10.0]);
        for bad in ["", "1:2", "2:1:10", "0:1:10", "1:2:1", "1:2:10:cubic", "1:nan:4", "a:b:c"] {
            assert!(bad.parse::<Schedule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_and_seed_parse() {
        assert_eq!("41x21".parse::<Grid>().unwrap(), Grid { nr: 41, nz: 21 });
        assert!("1x5".parse::<Grid>().is_err());
        assert!("41".parse::<Grid>().is_err());
        assert_eq!("0.5,-0.25".parse::<Seed>().unwrap(), Seed { r: 0.5, z: -0.25 });
        assert!("0.5".parse::<Seed>().is_err());
        assert!("inf,0".parse::<Seed>().is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = Settings::from_toml("cross_section = \"1x2\"\na_tilde = 0.04\nr_tilde = 500.0\n").unwrap();
        let flags = Settings { r_tilde: Some(800.0), ..Settings::default() };
        let cfg = RunConfig::resolve(Command::Equilibria, file, flags).unwrap();
        assert_eq!(cfg.cross_section, CrossSection::Rect1x2);
        assert_eq!(cfg.a_tilde, 0.04);
        assert_eq!(cfg.r_tilde, Some(800.0));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn unknown_keys_and_misplaced_flags_are_rejected() {
        assert!(Settings::from_toml("bend = 3").is_err());
        let flags = Settings { schedule: Some("2:10:5".parse().unwrap()), ..Settings::default() };
        assert!(RunConfig::resolve(Command::Limits, Settings::default(), flags).is_err());
        // the same key in a shared file is just ignored
        let file = Settings { schedule: Some("2:10:5".parse().unwrap()), ..Settings::default() };
        let cfg = RunConfig::resolve(Command::Limits, file, Settings::default()).unwrap();
        assert_eq!(cfg.schedule, None);
    }

    #[test]
    fn config_json_round_trips() {
        let flags = Settings {
            schedule: Some("2:1e5:40".parse().unwrap()),
            grid: Some(Grid { nr: 21, nz: 11 }),
            ..Settings::default()
        };
        let cfg = RunConfig::resolve(Command::Sweep, Settings::default(), flags).unwrap();
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
