use std::f64::consts::TAU;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SomGrid, SomParams};
use crate::seed::mix64;
use crate::{Error, Result};

/// `(sin, cos)` of the hour on the 24 h circle, continuous across midnight.
pub fn time_features(hour: f64) -> [f64; 2] {
    let a = TAU * hour / 24.0;
    [a.sin(), a.cos()]
}

/// What the robot perceives when an order is placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    /// Identity embedding.
    pub face: Vec<f64>,
    /// Map coordinates normalized to [0, 1].
    pub place: Vec<f64>,
    /// See [`time_features`].
    pub time: Vec<f64>,
}

impl Percept {
    pub fn new(face: Vec<f64>, place: [f64; 2], hour: f64) -> Self {
        Self {
            face,
            place: place.to_vec(),
            time: time_features(hour).to_vec(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.face.iter().chain(&self.place).chain(&self.time).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParam("percept components must be finite".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmygdalaConfig {
    pub rows: usize,
    pub cols: usize,
    pub som: SomParams,
    /// Perceptron learning rate.
    pub lr: f64,
    pub face_dim: usize,
    pub seed: u64,
}

impl Default for AmygdalaConfig {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            som: SomParams::default(),
            lr: 0.5,
            face_dim: 8,
            seed: 0,
        }
    }
}

/// Face, place and time SOMs feeding one softmax layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmygdalaModel {
    som_face: SomGrid,
    som_place: SomGrid,
    som_time: SomGrid,
    /// `n_objects × total_units`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
    lr: f64,
    object_names: Vec<String>,
    config: AmygdalaConfig,
}

impl AmygdalaModel {
    /// SOM weights start uniform over each input's range (face components in
    /// [0, 1], place in [0, 1]², time in [−1, 1]²); perceptron weights start at 0.
    pub fn new(config: AmygdalaConfig, object_names: Vec<String>) -> Result<Self> {
        if object_names.len() < 2 {
            return Err(Error::InvalidParam("the model needs at least two objects".into()));
        }
        if !(config.lr >= 0.0 && config.lr.is_finite()) {
            return Err(Error::InvalidParam(format!("learning rate must be ≥ 0, got {}", config.lr)));
        }
        if config.face_dim == 0 {
            return Err(Error::InvalidParam("face_dim must be ≥ 1".into()));
        }
        let mut rngs = (0..3u64).map(|k| ChaCha8Rng::seed_from_u64(mix64(config.seed ^ mix64(k))));
        let (rows, cols) = (config.rows, config.cols);
        let som_face = SomGrid::random(rows, cols, &vec![(0.0, 1.0); config.face_dim], config.som, &mut rngs.next().unwrap())?;
        let som_place = SomGrid::random(rows, cols, &[(0.0, 1.0); 2], config.som, &mut rngs.next().unwrap())?;
        let som_time = SomGrid::random(rows, cols, &[(-1.0, 1.0); 2], config.som, &mut rngs.next().unwrap())?;
        let units = som_face.units() + som_place.units() + som_time.units();
        let n = object_names.len();
        Ok(Self {
            som_face,
            som_place,
            som_time,
            weights: vec![0.0; n * units],
            bias: vec![0.0; n],
            lr: config.lr,
            object_names,
            config,
        })
    }

    pub fn n_objects(&self) -> usize {
        self.object_names.len()
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn code_len(&self) -> usize {
        self.som_face.units() + self.som_place.units() + self.som_time.units()
    }

    pub fn soms(&self) -> [&SomGrid; 3] {
        [&self.som_face, &self.som_place, &self.som_time]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn config(&self) -> &AmygdalaConfig {
        &self.config
    }

    /// Indices of the three active units in the concatenated code.
    fn active_units(&self, p: &Percept) -> Result<[usize; 3]> {
        p.check_finite()?;
        let mut offset = 0;
        let mut out = [0; 3];
        for (slot, (som, x)) in out
            .iter_mut()
            .zip([(&self.som_face, &p.face), (&self.som_place, &p.place), (&self.som_time, &p.time)])
        {
            let (r, c) = som.bmu(x)?;
            *slot = offset + r * som.cols() + c;
            offset += som.units();
        }
        Ok(out)
    }

    /// Concatenated one-hot BMU codes: exactly three ones.
    pub fn encode(&self, p: &Percept) -> Result<Vec<f64>> {
        let mut code = vec![0.0; self.code_len()];
        for u in self.active_units(p)? {
            code[u] = 1.0;
        }
        Ok(code)
    }

    fn probabilities(&self, active: &[usize; 3]) -> Vec<f64> {
        let units = self.code_len();
        let logits: Vec<f64> = (0..self.n_objects())
            .map(|o| self.bias[o] + active.iter().map(|&u| self.weights[o * units + u]).sum::<f64>())
            .collect();
        softmax(&logits)
    }

    /// Distribution over objects; pure read.
    pub fn estimate(&self, p: &Percept) -> Result<Vec<f64>> {
        Ok(self.probabilities(&self.active_units(p)?))
    }

    /// One SOM step per channel, then one cross-entropy gradient step of the
    /// softmax layer on the code produced by the updated maps.
    pub fn interact(&mut self, p: &Percept, ordered_object: usize) -> Result<()> {
        if ordered_object >= self.n_objects() {
            return Err(Error::InvalidParam(format!(
                "object id {ordered_object} out of range (n_objects = {})",
                self.n_objects()
            )));
        }
        p.check_finite()?;
        // validate all dimensions before mutating anything
        self.active_units(p)?;
        self.som_face.train_step(&p.face)?;
        self.som_place.train_step(&p.place)?;
        self.som_time.train_step(&p.time)?;

        let active = self.active_units(p)?;
        let probs = self.probabilities(&active);
        let units = self.code_len();
        for (o, prob) in probs.iter().enumerate() {
            let target = if o == ordered_object { 1.0 } else { 0.0 };
            let g = self.lr * (target - prob);
            for &u in &active {
                self.weights[o * units + u] += g;
            }
            self.bias[o] += g;
        }
        Ok(())
    }

    /// Cross-entropy of `object` under the current estimate.
    pub fn loss(&self, p: &Percept, object: usize) -> Result<f64> {
        Ok(-self.estimate(p)?[object].ln())
    }

    /// Same model with object `i` moved to position `perm[i]`.
    pub fn permute_objects(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_objects();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::InvalidParam("not a permutation of the object ids".into()));
        }
        let units = self.code_len();
        let mut out = self.clone();
        for (i, &j) in perm.iter().enumerate() {
            out.weights[j * units..(j + 1) * units].copy_from_slice(&self.weights[i * units..(i + 1) * units]);
            out.bias[j] = self.bias[i];
            out.object_names[j] = self.object_names[i].clone();
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("obj{i}")).collect()
    }

    fn face(i: usize) -> Vec<f64> {
        let mut f = vec![0.0; 8];
        f[i] = 1.0;
        f
    }

    #[test]
    fn time_is_circular() {
        let [s, c] = time_features(0.0);
        assert!((s - 0.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        let a = time_features(23.999);
        let b = time_features(0.001);
        assert!((a[0] - b[0]).abs() < 1e-3 && (a[1] - b[1]).abs() < 1e-3);
    }

    #[test]
    fn zero_weights_give_uniform() {
        let m = AmygdalaModel::new(AmygdalaConfig::default(), names(3)).unwrap();
        let p = m.estimate(&Percept::new(face(0), [0.2, 0.3], 9.0)).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn code_has_three_ones() {
        let cfg = AmygdalaConfig {
            rows: 2,
            cols: 2,
            som: SomParams { sigma0: 1.0, ..SomParams::default() },
            ..AmygdalaConfig::default()
        };
        let m = AmygdalaModel::new(cfg, names(2)).unwrap();
        let code = m.encode(&Percept::new(face(1), [0.5, 0.5], 12.0)).unwrap();
        assert_eq!(code.len(), 12);
        assert_eq!(code.iter().filter(|&&v| v == 1.0).count(), 3);
        assert_eq!(code.iter().filter(|&&v| v != 0.0).count(), 3);
    }

    #[test]
    fn one_interaction_raises_target() {
        let mut m = AmygdalaModel::new(AmygdalaConfig::default(), names(3)).unwrap();
        let p = Percept::new(face(0), [0.2, 0.3], 9.0);
        let prior = m.estimate(&p).unwrap()[1];
        m.interact(&p, 1).unwrap();
        assert!(m.estimate(&p).unwrap()[1] > prior);
    }

    #[test]
    fn zero_lr_only_moves_soms() {
        let cfg = AmygdalaConfig { lr: 0.0, ..AmygdalaConfig::default() };
        let mut m = AmygdalaModel::new(cfg, names(2)).unwrap();
        let before = m.clone();
        m.interact(&Percept::new(face(0), [0.2, 0.3], 9.0), 0).unwrap();
        assert_eq!(m.weights(), before.weights());
        assert_eq!(m.bias(), before.bias());
        assert!(m.soms().iter().all(|s| s.steps() == 1));
    }

    #[test]
    fn five_interactions_reach_ninety_percent() {
        let mut m = AmygdalaModel::new(AmygdalaConfig::default(), names(2)).unwrap();
        let p = Percept::new(face(0), [0.2, 0.3], 9.0);
        for _ in 0..5 {
            m.interact(&p, 0).unwrap();
        }
        assert!(m.estimate(&p).unwrap()[0] >= 0.9);
    }

    #[test]
    fn errors() {
        assert!(AmygdalaModel::new(AmygdalaConfig::default(), names(1)).is_err());
        let mut m = AmygdalaModel::new(AmygdalaConfig::default(), names(2)).unwrap();
        let p = Percept::new(face(0), [0.2, 0.3], 9.0);
        assert!(m.interact(&p, 2).is_err());
        let bad = Percept::new(vec![1.0; 3], [0.2, 0.3], 9.0);
        assert!(m.estimate(&bad).is_err());
        assert!(m.interact(&bad, 0).is_err());
        assert!(m.soms().iter().all(|s| s.steps() == 0), "failed interact must not train");
        assert!(m.permute_objects(&[0, 0]).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = AmygdalaModel::new(AmygdalaConfig::default(), names(2)).unwrap();
        m.interact(&Percept::new(face(0), [0.2, 0.3], 9.0), 1).unwrap();
        let path = dir.path().join("model.json");
        m.save(&path).unwrap();
        assert_eq!(AmygdalaModel::load(&path).unwrap(), m);
    }
}
