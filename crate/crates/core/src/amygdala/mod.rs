//! Preference learning from a few interactions: three self-organizing maps
//! discretize face, place and time, and a softmax perceptron maps the
//! concatenated one-hot winner codes to a distribution over objects.

mod model;
mod protocol;
mod som;

pub use model::{time_features, AmygdalaConfig, AmygdalaModel, Percept};
pub use protocol::{two_situation_schedule, run_protocol, Schedule, Situation, Trajectory};
pub use som::{SomGrid, SomParams};
