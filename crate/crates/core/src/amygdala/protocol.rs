use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AmygdalaModel, Percept};
use crate::{Error, Result};

/// One interaction: who ordered, where, when, and what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Situation {
    pub face: Vec<f64>,
    /// Normalized map coordinates.
    pub place: [f64; 2],
    /// Hour of day, 0–24.
    pub hour: f64,
    pub object: usize,
}

impl Situation {
    pub fn percept(&self) -> Percept {
        Percept::new(self.face.clone(), self.place, self.hour)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub objects: Vec<String>,
    pub steps: Vec<Situation>,
}

impl Schedule {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schedule: Schedule = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.objects.len() < 2 {
            return Err(Error::InvalidParam("schedule needs at least two objects".into()));
        }
        let Some(first) = self.steps.first() else {
            return Err(Error::InvalidParam("schedule has no steps".into()));
        };
        for (k, s) in self.steps.iter().enumerate() {
            if s.object >= self.objects.len() {
                return Err(Error::InvalidParam(format!("step {}: object {} out of range", k + 1, s.object)));
            }
            if s.face.len() != first.face.len() || s.face.is_empty() {
                return Err(Error::InvalidParam(format!("step {}: face dimension differs", k + 1)));
            }
        }
        Ok(())
    }

    pub fn face_dim(&self) -> usize {
        self.steps.first().map_or(0, |s| s.face.len())
    }
}

/// The two-situation conditioning run: five orders of object A by face A at
/// place A / time A, then five orders of object B by the same face at place B
/// / time B. Faces are one-hot embeddings of length `face_dim`.
pub fn two_situation_schedule(face_dim: usize) -> Schedule {
    let mut face_a = vec![0.0; face_dim.max(1)];
    face_a[0] = 1.0;
    let a = Situation {
        face: face_a.clone(),
        place: [0.2, 0.3],
        hour: 9.0,
        object: 0,
    };
    let b = Situation {
        face: face_a,
        place: [0.8, 0.7],
        hour: 19.0,
        object: 1,
    };
    Schedule {
        objects: vec!["object A".into(), "object B".into()],
        steps: std::iter::repeat_n(a, 5).chain(std::iter::repeat_n(b, 5)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Estimate for step k's situation, taken before step k's interaction.
    pub before: Vec<Vec<f64>>,
    /// Estimate for the last situation after the whole schedule.
    pub final_estimate: Vec<f64>,
}

impl Trajectory {
    /// `step,P(obj0),P(obj1),...` with 1-based steps.
    pub fn to_csv(&self) -> String {
        let n = self.before.first().map_or(0, Vec::len);
        let mut out = String::from("step");
        for o in 0..n {
            let _ = write!(out, ",P(obj{o})");
        }
        out.push('\n');
        for (k, row) in self.before.iter().enumerate() {
            let _ = write!(out, "{}", k + 1);
            for p in row {
                let _ = write!(out, ",{p:.9}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_protocol(model: &mut AmygdalaModel, schedule: &[Situation]) -> Result<Trajectory> {
    let Some(last) = schedule.last() else {
        return Err(Error::InvalidParam("empty schedule".into()));
    };
    let mut before = Vec::with_capacity(schedule.len());
    for s in schedule {
        let p = s.percept();
        before.push(model.estimate(&p)?);
        model.interact(&p, s.object)?;
    }
    Ok(Trajectory {
        before,
        final_estimate: model.estimate(&last.percept())?,
    })
}
