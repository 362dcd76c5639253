//! Time-sampled particle paths and their CSV form.
//!
//! A trajectory file is a `#`-prefixed metadata block followed by a `t,r,z`
//! table:
//!
//! ```text
//! # trajectory: {"params":{...},"terminal_reason":"ConvergedToPoint",...}
//! # config: {...}
//! t,r,z
//! 0,1,-0.8
//! ...
//! ```
//!
//! Only the `trajectory:` line is required when reading; other comment lines
//! are passed through untouched.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalReason {
    TimeExhausted,
    ConvergedToPoint,
    HitBoundary,
    ClosedOrbitDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal_reason: TerminalReason,
    /// Samples are in elapsed time of the time-reversed flow.
    pub reverse_time: bool,
    /// Time at which the explicit pair gave way to the implicit fallback.
    pub fallback_at: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory always holds its start sample")
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.samples[0].t
    }

    /// Largest relative deviation of `f` along the path from its starting value.
    pub fn max_relative_drift(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let f0 = f(self.samples[0].r, self.samples[0].z);
        let scale = f0.abs().max(f64::MIN_POSITIVE);
        self.samples.iter().map(|s| (f(s.r, s.z) - f0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, params: &ModelParams, extra_header: &[String], mut w: W) -> Result<()> {
        let meta = Header {
            params: *params,
            terminal_reason: self.terminal_reason,
            reverse_time: self.reverse_time,
            fallback_at: self.fallback_at,
        };
        writeln!(w, "# trajectory: {}", serde_json::to_string(&meta)?)?;
        for line in extra_header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "t,r,z")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.t, s.r, s.z)?;
        }
        Ok(())
    }

    /// Parses the CSV produced by [`Trajectory::write_csv`], checking the sample invariants.
    pub fn read_csv(text: &str) -> Result<TrajectoryFile> {
        let mut header: Option<Header> = None;
        let mut comments = Vec::new();
        let mut saw_columns = false;
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(json) = comment.strip_prefix("trajectory:") {
                    if header.is_some() {
                        return Err(bad("duplicate trajectory header"));
                    }
                    header = Some(serde_json::from_str(json.trim()).map_err(|e| bad(&e.to_string()))?);
                } else {
                    comments.push(comment.to_string());
                }
                continue;
            }
            if !saw_columns {
                if line != "t,r,z" {
                    return Err(bad("expected column header `t,r,z`"));
                }
                saw_columns = true;
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |name: &str| -> Result<f64> {
                let f = fields.next().ok_or_else(|| bad(&format!("missing column {name}")))?;
                let v: f64 = f.trim().parse().map_err(|_| bad(&format!("column {name} is not a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(bad(&format!("column {name} is not finite")))
                }
            };
            let s = Sample { t: next("t")?, r: next("r")?, z: next("z")? };
            if fields.next().is_some() {
                return Err(bad("too many columns"));
            }
            samples.push(s);
        }
        let header = header.ok_or_else(|| Error::Parse("missing `# trajectory:` header".into()))?;
        if samples.is_empty() {
            return Err(Error::Parse("trajectory has no samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Parse("sample times must be strictly increasing".into()));
        }
        if let Some(s) = samples.iter().find(|s| !header.params.cs.contains(s.r, s.z)) {
            return Err(Error::Parse(format!("sample ({}, {}) lies outside the duct", s.r, s.z)));
        }
        Ok(TrajectoryFile {
            params: header.params,
            comments,
            trajectory: Trajectory {
                samples,
                terminal_reason: header.terminal_reason,
                reverse_time: header.reverse_time,
                fallback_at: header.fallback_at,
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    params: ModelParams,
    terminal_reason: TerminalReason,
    reverse_time: bool,
    fallback_at: Option<f64>,
}

/// A trajectory read back from disk together with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub params: ModelParams,
    pub comments: Vec<String>,
    pub trajectory: Trajectory,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::CrossSection;

    fn sample_traj() -> Trajectory {
        Trajectory {
            samples: vec![
                Sample { t: 0.0, r: 1.0, z: -0.8 },
                Sample { t: 0.1, r: 1.000_000_1, z: -0.799_999_9 },
            ],
            terminal_reason: TerminalReason::TimeExhausted,
            reverse_time: false,
            fallback_at: None,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mp = ModelParams::lift_only(CrossSection::Rect2x1, 0.05).unwrap();
        let mut buf = Vec::new();
        sample_traj().write_csv(&mp, &["config: {}".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# trajectory: "));
        let back = Trajectory::read_csv(&text).unwrap();
        assert_eq!(back.params, mp);
        assert_eq!(back.trajectory, sample_traj());
        assert_eq!(back.comments, vec!["config: {}".to_string()]);
    }

    #[test]
    fn csv_rejects_bad_input() {
        let mp = ModelParams::full(CrossSection::Rect2x1, 0.05, 100.0).unwrap();
        let mut buf = Vec::new();
        sample_traj().write_csv(&mp, &[], &mut buf).unwrap();
        let good = String::from_utf8(buf).unwrap();
        assert!(Trajectory::read_csv("t,r,z\n0,0,0\n").is_err());
        assert!(Trajectory::read_csv(&good.replace("0.1,", "0,")).is_err());
        assert!(Trajectory::read_csv(&format!("{good}0.2,3.0,0\n")).is_err());
        assert!(Trajectory::read_csv(&format!("{good}0.2,1,0,9\n")).is_err());
        assert!(Trajectory::read_csv(&format!("{good}0.2,NaN,0\n")).is_err());
    }
}
