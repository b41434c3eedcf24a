use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use slosh_core::dynamics::project_data;
use slosh_core::{ChebSeries, ModalData, ModalState, ModeSet, SloshError};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModalFile {
    cos_amp: Vec<f64>,
    sin_amp: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesFile {
    phi0: ChebSeries,
    phi1: ChebSeries,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DataFile {
    Modal(ModalFile),
    Series(SeriesFile),
}

/// Initial data: modal amplitudes `{cos_amp, sin_amp}` (shorter lists are
/// padded with zeros) or a Chebyshev pair `{phi0, phi1}` projected onto the modes.
pub fn load(path: &Path, modes: &ModeSet) -> Result<ModalData, SloshError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SloshError::Input(format!("cannot read data file {}: {e}", path.display())))?;
    let parsed: DataFile = serde_json::from_str(&text).map_err(|e| {
        SloshError::Input(format!(
            "data file {} is neither {{cos_amp, sin_amp}} nor {{phi0, phi1}}: {e}",
            path.display()
        ))
    })?;
    match parsed {
        DataFile::Modal(m) => {
            if m.cos_amp.len() > modes.len() || m.sin_amp.len() > modes.len() {
                return Err(SloshError::Input(format!(
                    "data has more amplitudes than the {} computed modes",
                    modes.len()
                )));
            }
            let pad = |mut v: Vec<f64>| {
                v.resize(modes.len(), 0.0);
                v
            };
            ModalData::new(pad(m.cos_amp), pad(m.sin_amp))
        }
        DataFile::Series(s) => project_data(&s.phi0, &s.phi1, modes),
    }
}

/// Seeded random amplitudes decaying like `1/n`.
pub fn random(seed: u64, n: usize) -> ModalData {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| r.gen_range(-1.0..1.0) / (k + 1) as f64;
    let cos_amp: Vec<f64> = (0..n).map(&mut draw).collect();
    let sin_amp: Vec<f64> = (0..n).map(&mut draw).collect();
    ModalData { cos_amp, sin_amp }
}

pub fn initial_state(data: &ModalData, modes: &ModeSet) -> ModalState {
    ModalState {
        c: data.cos_amp.clone(),
        c_dot: data.sin_amp.iter().zip(&modes.thetas).map(|(b, th)| b * th).collect(),
        t: 0.0,
    }
}
