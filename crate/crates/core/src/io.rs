//! Stable file contracts: CSV payloads and JSON manifests.
//!
//! CSV columns are fixed — profiles `(r,value)`, solutions `(t,r,u)`,
//! trajectories `(t,moment)` — and floats are written with `{:.17e}`, so a
//! given config always produces byte-identical data files. Manifests carry
//! the config echo, versions, and timing separately from the data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::parabolic::RadialSolution;
use crate::profiles::Profile;
use crate::trace::MomentTrajectory;

/// Schema tags written into every manifest.
pub const PROFILE_SCHEMA: &str = "heatlab.profile/1";
pub const RUN_SCHEMA: &str = "heatlab.run/1";
pub const REPORT_SCHEMA: &str = "heatlab.report/1";

fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = PathBuf::from(path);
    let file_name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    tmp.set_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn profile_csv(profile: &Profile) -> String {
    let mut out = String::from("r,value\n");
    for (r, v) in profile.nodes.iter().zip(&profile.values) {
        let _ = writeln!(out, "{},{}", fmt_f64(*r), fmt_f64(*v));
    }
    out
}

pub fn solution_csv(solution: &RadialSolution) -> String {
    let mut out = String::from("t,r,u\n");
    for (t, snap) in solution.times.iter().zip(&solution.snapshots) {
        for (i, u) in snap.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(*t),
                fmt_f64(solution.grid.node(i)),
                fmt_f64(*u)
            );
        }
    }
    out
}

pub fn trajectory_csv(traj: &MomentTrajectory) -> String {
    let mut out = String::from("t,moment\n");
    for (t, m) in &traj.samples {
        let _ = writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*m));
    }
    out
}

/// Serialize any report/config to pretty JSON (stable field order via serde
/// struct definitions; no maps with nondeterministic iteration are used).
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub schema: &'a str,
    pub crate_version: &'a str,
    pub config: &'a C,
    /// Wall time lives here, never in the data files.
    pub wall_time_ms: u128,
}

pub fn manifest_json<C: Serialize>(schema: &str, config: &C, wall_time_ms: u128) -> Result<String> {
    to_json(&Manifest { schema, crate_version: env!("CARGO_PKG_VERSION"), config, wall_time_ms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let traj = MomentTrajectory {
            center: 0.0,
            ball_radius: 1.0,
            samples: vec![(0.5, 1.0 / 3.0), (0.25, 2.0 / 7.0)],
        };
        let a = trajectory_csv(&traj);
        let b = trajectory_csv(&traj);
        assert_eq!(a, b);
        assert!(a.starts_with("t,moment\n"));
    }

    #[test]
    fn atomic_write_roundtrip() {
        let dir = std::env::temp_dir().join("heatlab-io-test");
        let path = dir.join("x.csv");
        write_atomic(&path, "a,b\n1,2\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2\n");
        let _ = std::fs::remove_dir_all(&dir);
    }
}
