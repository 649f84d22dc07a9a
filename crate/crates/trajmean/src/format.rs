//! JSON trajectory-set files.
//!
//! ```json
//! {"window": 3, "sets": [{"id": "a", "trajectories": [
//!     {"id": "t1", "domain": [1, 2], "states": [[0.0, 1.0], [0.5, 1.5]]}]}]}
//! ```
//!
//! Instants in files are 1-based; the in-memory types are 0-based.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trajmean_core::{MultiObjectTrajectory, Trajectory};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub id: String,
    pub domain: Vec<usize>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySet {
    pub id: String,
    pub trajectories: Vec<TrajectoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySetFile {
    pub window: usize,
    pub sets: Vec<TrajectorySet>,
}

impl TrajectorySetFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let out = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(out);
        serde_json::to_writer_pretty(&mut out, self)?;
        std::io::Write::write_all(&mut out, b"\n").map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Checks the structural invariants: parallel arrays, instants inside
    /// `[1, window]` without repeats, one state dimension across the file.
    pub fn validate(&self) -> Result<(), Error> {
        if self.window == 0 {
            return Err(Error::Invalid("window must be at least 1".into()));
        }
        let mut dim = None;
        for set in &self.sets {
            for t in &set.trajectories {
                let at = || format!("set {:?}, trajectory {:?}", set.id, t.id);
                if t.domain.len() != t.states.len() {
                    return Err(Error::Invalid(format!(
                        "{}: {} instants but {} states",
                        at(),
                        t.domain.len(),
                        t.states.len()
                    )));
                }
                let mut seen = vec![false; self.window];
                for &k in &t.domain {
                    if k == 0 || k > self.window {
                        return Err(Error::Invalid(format!(
                            "{}: instant {k} outside [1, {}]",
                            at(),
                            self.window
                        )));
                    }
                    if std::mem::replace(&mut seen[k - 1], true) {
                        return Err(Error::Invalid(format!(
                            "{}: instant {k} listed twice",
                            at()
                        )));
                    }
                }
                for s in &t.states {
                    if s.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Invalid(format!("{}: non-finite state", at())));
                    }
                    match dim {
                        None => dim = Some(s.len()),
                        Some(d) if d != s.len() => {
                            return Err(Error::Invalid(format!(
                                "{}: state dimension {} differs from {d}",
                                at(),
                                s.len()
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Common state dimension; 0 if the file has no states at all.
    pub fn dim(&self) -> usize {
        self.sets
            .iter()
            .flat_map(|s| &s.trajectories)
            .flat_map(|t| &t.states)
            .map(Vec::len)
            .next()
            .unwrap_or(0)
    }

    pub fn set(&self, id: &str) -> Option<&TrajectorySet> {
        self.sets.iter().find(|s| s.id == id)
    }

    /// Looks a trajectory up by `set/trajectory` or by a trajectory id that
    /// is unique across the file.
    pub fn trajectory(&self, id: &str) -> Result<Trajectory, Error> {
        let hits: Vec<&TrajectoryRecord> = match id.split_once('/') {
            Some((set, traj)) => self
                .set(set)
                .into_iter()
                .flat_map(|s| &s.trajectories)
                .filter(|t| t.id == traj)
                .collect(),
            None => self
                .sets
                .iter()
                .flat_map(|s| &s.trajectories)
                .filter(|t| t.id == id)
                .collect(),
        };
        match hits.as_slice() {
            [one] => record_to_trajectory(one, self.window, self.dim()),
            [] => Err(Error::Invalid(format!("unknown trajectory id {id:?}"))),
            _ => Err(Error::Invalid(format!(
                "trajectory id {id:?} is ambiguous; use set/trajectory"
            ))),
        }
    }

    pub fn to_mots(&self) -> Result<Vec<MultiObjectTrajectory>, Error> {
        let dim = self.dim();
        self.sets
            .iter()
            .map(|s| {
                let elements = s
                    .trajectories
                    .iter()
                    .map(|t| record_to_trajectory(t, self.window, dim))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(MultiObjectTrajectory::new(self.window, elements)?)
            })
            .collect()
    }

    /// File holding `mots` as sets named by `ids`.
    pub fn from_mots<'a>(
        window: usize,
        sets: impl IntoIterator<Item = (&'a str, &'a MultiObjectTrajectory)>,
    ) -> Self {
        Self {
            window,
            sets: sets
                .into_iter()
                .map(|(id, mot)| TrajectorySet {
                    id: id.to_owned(),
                    trajectories: mot
                        .elements()
                        .iter()
                        .enumerate()
                        .map(|(i, t)| trajectory_to_record(&format!("{}", i + 1), t))
                        .collect(),
                })
                .collect(),
        }
    }
}

fn record_to_trajectory(
    t: &TrajectoryRecord,
    window: usize,
    dim: usize,
) -> Result<Trajectory, Error> {
    let domain: Vec<usize> = t.domain.iter().map(|k| k - 1).collect();
    Ok(Trajectory::from_parts(window, dim, &domain, &t.states)?)
}

pub fn trajectory_to_record(id: &str, t: &Trajectory) -> TrajectoryRecord {
    let (domain, states) = t.iter().map(|(k, s)| (k + 1, s.to_vec())).unzip();
    TrajectoryRecord {
        id: id.to_owned(),
        domain,
        states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"window": 4, "sets": [
        {"id": "a", "trajectories": [
            {"id": "u", "domain": [1, 2, 3], "states": [[0.0], [1.0], [2.0]]},
            {"id": "v", "domain": [4], "states": [[7.5]]}]},
        {"id": "b", "trajectories": [
            {"id": "u", "domain": [2], "states": [[1.0]]}]}]}"#;

    #[test]
    fn converts_to_zero_based_scans() {
        let file = TrajectorySetFile::parse(SAMPLE).unwrap();
        let mots = file.to_mots().unwrap();
        assert_eq!(mots.len(), 2);
        let v = &mots[0].elements()[1];
        assert_eq!(v.domain().collect::<Vec<_>>(), vec![3]);
        assert_eq!(v.state(3), Some(&[7.5][..]));
    }

    #[test]
    fn resolves_ids() {
        let file = TrajectorySetFile::parse(SAMPLE).unwrap();
        assert_eq!(file.trajectory("v").unwrap().len(), 1);
        assert_eq!(file.trajectory("b/u").unwrap().len(), 1);
        assert!(matches!(file.trajectory("u"), Err(Error::Invalid(_))));
        assert!(matches!(file.trajectory("w"), Err(Error::Invalid(_))));
    }

    #[test]
    fn rejects_bad_structure() {
        let cases = [
            r#"{"window": 2, "sets": [{"id": "a", "trajectories": [{"id": "u", "domain": [3], "states": [[0.0]]}]}]}"#,
            r#"{"window": 2, "sets": [{"id": "a", "trajectories": [{"id": "u", "domain": [0], "states": [[0.0]]}]}]}"#,
            r#"{"window": 2, "sets": [{"id": "a", "trajectories": [{"id": "u", "domain": [1, 1], "states": [[0.0], [1.0]]}]}]}"#,
            r#"{"window": 2, "sets": [{"id": "a", "trajectories": [{"id": "u", "domain": [1, 2], "states": [[0.0]]}]}]}"#,
            r#"{"window": 2, "sets": [{"id": "a", "trajectories": [{"id": "u", "domain": [1, 2], "states": [[0.0], [1.0, 2.0]]}]}]}"#,
        ];
        for text in cases {
            assert!(
                matches!(TrajectorySetFile::parse(text), Err(Error::Invalid(_))),
                "{text}"
            );
        }
        assert!(matches!(TrajectorySetFile::parse("{"), Err(Error::Json(_))));
    }

    #[test]
    fn mots_round_trip() {
        let file = TrajectorySetFile::parse(SAMPLE).unwrap();
        let mots = file.to_mots().unwrap();
        let back = TrajectorySetFile::from_mots(4, [("a", &mots[0]), ("b", &mots[1])]);
        assert_eq!(back.to_mots().unwrap(), mots);
        assert_eq!(TrajectorySetFile::parse(&back.to_json()).unwrap(), back);
    }
}
