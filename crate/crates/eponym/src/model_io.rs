//! Versioned binary persistence for trained models. Floats are stored as
//! their IEEE 754 bit patterns, so save → load → save is byte-identical.

use std::io::{self, Read, Write};
use std::path::Path;

use eponym_core::features::{OccupationVocabulary, FEATURE_DIM, OCCUPATION_SLOTS};
use eponym_core::ids::EntityId;
use eponym_core::model::{Hyperparameters, Model};

use crate::error::Error;
use crate::fsio;

pub const MODEL_MAGIC: &[u8; 4] = b"STPM";
pub const MODEL_VERSION: u32 = 1;

pub fn save_model(stage: &'static str, path: &Path, model: &Model) -> Result<(), Error> {
    fsio::write_atomic(path, |w| write_model(w, model)).map_err(|e| Error::io(stage, path, e))
}

pub fn load_model(stage: &'static str, path: &Path) -> Result<Model, Error> {
    let mut reader = fsio::open_reader(path).map_err(|e| Error::io(stage, path, e))?;
    read_model(&mut reader).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof => Error::Format {
            stage,
            path: path.to_path_buf(),
            message: format!(
                "corrupt or incompatible model file (expected format version {MODEL_VERSION}): {e}"
            ),
        },
        _ => Error::io(stage, path, e),
    })
}

fn write_model(w: &mut dyn Write, model: &Model) -> io::Result<()> {
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    for value in model.weights() {
        w.write_all(&value.to_bits().to_le_bytes())?;
    }
    w.write_all(&model.bias().to_bits().to_le_bytes())?;
    for value in model.feature_means() {
        w.write_all(&value.to_bits().to_le_bytes())?;
    }
    for value in model.feature_stds() {
        w.write_all(&value.to_bits().to_le_bytes())?;
    }
    w.write_all(&(model.vocab().ids().len() as u32).to_le_bytes())?;
    for id in model.vocab().ids() {
        let bytes = id.as_str().as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
    }
    w.write_all(&model.threshold().to_bits().to_le_bytes())?;
    let hyper = model.hyper();
    w.write_all(&hyper.learning_rate.to_bits().to_le_bytes())?;
    w.write_all(&hyper.l2.to_bits().to_le_bytes())?;
    w.write_all(&hyper.epochs.to_le_bytes())?;
    w.write_all(&hyper.seed.to_le_bytes())?;
    Ok(())
}

fn read_model(r: &mut dyn Read) -> io::Result<Model> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(invalid("bad magic, not a model file"));
    }
    let version = read_u32(r)?;
    if version != MODEL_VERSION {
        return Err(invalid(format!("unsupported format version {version}")));
    }

    let mut weights = [0.0; FEATURE_DIM];
    read_f64s(r, &mut weights)?;
    let bias = read_f64(r)?;
    let mut means = [0.0; FEATURE_DIM];
    read_f64s(r, &mut means)?;
    let mut stds = [0.0; FEATURE_DIM];
    read_f64s(r, &mut stds)?;

    let vocab_len = read_u32(r)?;
    if vocab_len as usize != OCCUPATION_SLOTS {
        return Err(invalid(format!("vocabulary of size {vocab_len}")));
    }
    let mut ids = Vec::with_capacity(OCCUPATION_SLOTS);
    for _ in 0..vocab_len {
        let len = read_u32(r)?;
        if len > 1024 {
            return Err(invalid("oversized vocabulary id"));
        }
        let mut buf = vec![0u8; len as usize];
        r.read_exact(&mut buf)?;
        let id = String::from_utf8(buf).map_err(|_| invalid("vocabulary id is not UTF-8"))?;
        ids.push(EntityId::new(id));
    }
    let vocab =
        OccupationVocabulary::new(ids).map_err(|e| invalid(format!("vocabulary: {e}")))?;

    let threshold = read_f64(r)?;
    let hyper = Hyperparameters {
        learning_rate: read_f64(r)?,
        l2: read_f64(r)?,
        epochs: read_u32(r)?,
        seed: read_u64(r)?,
    };

    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(invalid("trailing bytes after model payload"));
    }
    Ok(Model::from_parts(weights, bias, means, stds, vocab, threshold, hyper))
}

fn invalid(message: impl ToString) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message.to_string())
}

fn read_u32(r: &mut dyn Read) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut dyn Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut dyn Read) -> io::Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_f64s(r: &mut dyn Read, out: &mut [f64]) -> io::Result<()> {
    for slot in out {
        *slot = read_f64(r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use eponym_core::features::FeatureVector;
    use eponym_core::model::{train, LabeledPair};

    fn toy_model() -> Model {
        let mut pairs = Vec::new();
        for i in 0..10 {
            pairs.push(LabeledPair {
                street_id: format!("s{i}"),
                person: EntityId::from("Qp"),
                features: FeatureVector {
                    spatial_born: 1.0,
                    link_count: i as f64,
                    ..FeatureVector::default()
                },
                label: true,
            });
            pairs.push(LabeledPair {
                street_id: format!("s{i}"),
                person: EntityId::from("Qn"),
                features: FeatureVector {
                    link_count: (i * 100) as f64,
                    ..FeatureVector::default()
                },
                label: false,
            });
        }
        let vocab = OccupationVocabulary::new(
            (0..OCCUPATION_SLOTS)
                .map(OccupationVocabulary::padding_id)
                .collect(),
        )
        .unwrap();
        train(&pairs, Hyperparameters::default(), vocab, 0.5).unwrap()
    }

    #[test]
    fn round_trip_preserves_probabilities_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.stpm");
        let model = toy_model();
        save_model("test", &path, &model).unwrap();
        let loaded = load_model("test", &path).unwrap();
        assert_eq!(loaded, model);

        for i in 0..100 {
            let fv = FeatureVector {
                link_count: (i * 31 % 17) as f64,
                spatial_born: (i % 5) as f64 / 4.0,
                name_last: i % 2 == 0,
                ..FeatureVector::default()
            };
            assert_eq!(
                loaded.probability(&fv).to_bits(),
                model.probability(&fv).to_bits(),
                "probability differs at case {i}"
            );
        }
    }

    #[test]
    fn saves_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.stpm");
        let b = dir.path().join("b.stpm");
        let model = toy_model();
        save_model("test", &a, &model).unwrap();
        save_model("test", &b, &model).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn corrupt_and_missing_files_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.stpm");
        let model = toy_model();
        save_model("test", &path, &model).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.stpm");
        std::fs::write(&cut, &bytes[..bytes.len() - 7]).unwrap();
        assert!(load_model("test", &cut).is_err());

        assert!(load_model("test", &dir.path().join("nope.stpm")).is_err());
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.stpm");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MODEL_MAGIC);
        bytes.extend_from_slice(&9u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let err = load_model("test", &path).unwrap_err().to_string();
        assert!(err.contains("expected format version 1"), "{err}");
    }
}
