//! Model files: a versioned JSON document holding dims, both vocabularies,
//! every parameter matrix, and the full training configuration with its
//! digest. Floats are written in shortest round-trip form, so a reload
//! reproduces every score bit for bit.

use std::{collections::BTreeSet, path::Path};

use serde::{Deserialize, Serialize};
use sesa_core::{
    model::{Dims, Gate, GateKind},
    text::UNK_TOKEN,
    DenseMatrix, DenseVector, ModelParams, SkillVocab, TrainConfig, WordVocab,
};

use crate::{
    config::{digest_of, sha256_hex},
    error::{Error, Result},
};

pub const FORMAT_VERSION: u32 = 1;

/// A trained model together with everything needed to apply it to text.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub params: ModelParams,
    pub words: WordVocab,
    pub skills: SkillVocab,
    pub config: TrainConfig,
}

impl ModelFile {
    pub fn dims(&self) -> Dims {
        self.params.dims
    }

    pub fn config_digest(&self) -> String {
        digest_of(&self.config)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(&Repr::from(self)).expect("model serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::field(path, "format_version", "missing or not an integer"))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::Version {
                path: path.into(),
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let repr: Repr = serde_json::from_value(value).map_err(|e| Error::field(path, "document", e.to_string()))?;
        repr.into_model(path)
    }

    /// Writes the file and returns the digest of its bytes.
    pub fn save(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes();
        std::fs::write(path, &bytes).map_err(Error::io(path))?;
        Ok(sha256_hex(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(Error::io(path))?;
        Self::from_bytes(&bytes, path)
    }
}

/// Digest of a model file's bytes, as recorded in evaluation reports.
pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(Error::io(path))?))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRepr {
    w: MatrixRepr,
    u: MatrixRepr,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GatesRepr {
    input: GateRepr,
    forget: GateRepr,
    output: GateRepr,
    cell: GateRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    embeddings: MatrixRepr,
    gates: GatesRepr,
    projection: MatrixRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkillEntry {
    name: String,
    count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr {
    format_version: u32,
    dims: Dims,
    seed: u64,
    config_digest: String,
    config: TrainConfig,
    /// Word vocabulary in id order, starting at id 1 (id 0 is UNK).
    words: Vec<String>,
    /// Skill vocabulary in dimension order.
    skills: Vec<SkillEntry>,
    params: ParamsRepr,
}

fn matrix_repr(m: &DenseMatrix) -> MatrixRepr {
    MatrixRepr {
        rows: m.rows(),
        cols: m.cols(),
        data: m.as_slice().to_vec(),
    }
}

fn gate_repr(g: &Gate) -> GateRepr {
    GateRepr {
        w: matrix_repr(&g.w),
        u: matrix_repr(&g.u),
        b: g.b.as_slice().to_vec(),
    }
}

impl From<&ModelFile> for Repr {
    fn from(m: &ModelFile) -> Self {
        let p = &m.params;
        let gate = |k: GateKind| gate_repr(&p.gates[k as usize]);
        Repr {
            format_version: FORMAT_VERSION,
            dims: p.dims,
            seed: m.config.seed,
            config_digest: m.config_digest(),
            config: m.config.clone(),
            words: m.words.tokens().to_vec(),
            skills: m
                .skills
                .names()
                .iter()
                .zip(m.skills.counts())
                .map(|(name, &count)| SkillEntry {
                    name: name.clone(),
                    count,
                })
                .collect(),
            params: ParamsRepr {
                embeddings: matrix_repr(&p.embeddings),
                gates: GatesRepr {
                    input: gate(GateKind::Input),
                    forget: gate(GateKind::Forget),
                    output: gate(GateKind::Output),
                    cell: gate(GateKind::Cell),
                },
                projection: matrix_repr(&p.projection),
            },
        }
    }
}

fn matrix(repr: MatrixRepr, rows: usize, cols: usize, field: &str, path: &Path) -> Result<DenseMatrix> {
    if (repr.rows, repr.cols) != (rows, cols) {
        return Err(Error::field(
            path,
            field,
            format!("shape {}x{} does not match dims ({rows}x{cols})", repr.rows, repr.cols),
        ));
    }
    DenseMatrix::new(rows, cols, repr.data).map_err(|e| Error::field(path, field, e.to_string()))
}

fn vector(data: Vec<f64>, len: usize, field: &str, path: &Path) -> Result<DenseVector> {
    if data.len() != len {
        return Err(Error::field(
            path,
            field,
            format!("length {} does not match dims ({len})", data.len()),
        ));
    }
    DenseVector::new(data).map_err(|e| Error::field(path, field, e.to_string()))
}

impl Repr {
    fn into_model(self, path: &Path) -> Result<ModelFile> {
        let dims = self.dims;
        dims.validate().map_err(|e| Error::field(path, "dims", e.to_string()))?;
        if self.seed != self.config.seed {
            return Err(Error::field(path, "seed", "differs from config.seed"));
        }
        if self.config_digest != digest_of(&self.config) {
            return Err(Error::field(path, "config_digest", "does not match config"));
        }
        if (self.config.d_emb, self.config.hidden) != (dims.d_emb, dims.hidden) {
            return Err(Error::field(path, "config", "d_emb/hidden disagree with dims"));
        }
        if self.words.len() + 1 != dims.vocab {
            return Err(Error::field(
                path,
                "words",
                format!("{} words + UNK does not match dims.vocab = {}", self.words.len(), dims.vocab),
            ));
        }
        let mut seen = BTreeSet::new();
        for w in &self.words {
            if w == UNK_TOKEN || !seen.insert(w.as_str()) {
                return Err(Error::field(path, "words", format!("duplicate or reserved word `{w}`")));
            }
        }
        if self.skills.len() != dims.n_skills {
            return Err(Error::field(
                path,
                "skills",
                format!("{} skills do not match dims.n_skills = {}", self.skills.len(), dims.n_skills),
            ));
        }
        let skills = SkillVocab::from_entries(self.skills.into_iter().map(|s| (s.name, s.count)).collect())
            .map_err(|e| Error::field(path, "skills", e.to_string()))?;

        let (h, d) = (dims.hidden, dims.d_emb);
        let p = self.params;
        let gate = |g: GateRepr, name: &str| -> Result<Gate> {
            Ok(Gate {
                w: matrix(g.w, h, d, &format!("params.gates.{name}.w"), path)?,
                u: matrix(g.u, h, h, &format!("params.gates.{name}.u"), path)?,
                b: vector(g.b, h, &format!("params.gates.{name}.b"), path)?,
            })
        };
        let gates = p.gates;
        let params = ModelParams {
            dims,
            embeddings: matrix(p.embeddings, dims.vocab, d, "params.embeddings", path)?,
            gates: [
                gate(gates.input, "input")?,
                gate(gates.forget, "forget")?,
                gate(gates.output, "output")?,
                gate(gates.cell, "cell")?,
            ],
            projection: matrix(p.projection, dims.n_skills, h, "params.projection", path)?,
        };
        params.validate().map_err(|e| Error::field(path, "params", e.to_string()))?;
        Ok(ModelFile {
            params,
            words: WordVocab::from_tokens(self.words),
            skills,
            config: self.config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sesa_core::{model::init_params, SeededRng};

    fn sample() -> ModelFile {
        let dims = Dims {
            vocab: 4,
            d_emb: 3,
            hidden: 2,
            n_skills: 2,
        };
        let config = TrainConfig {
            d_emb: 3,
            hidden: 2,
            seed: 9,
            ..TrainConfig::default()
        };
        ModelFile {
            params: init_params(dims, &mut SeededRng::new(9), None).unwrap(),
            words: WordVocab::from_tokens(["a", "b", "c"].map(String::from)),
            skills: SkillVocab::from_entries(vec![("rust".into(), 2), ("go".into(), 1)]).unwrap(),
            config,
        }
    }

    fn field_of(err: Error) -> String {
        match err {
            Error::Field { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let back = ModelFile::from_bytes(&m.to_bytes(), Path::new("m.json")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes(), m.to_bytes());
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let bytes = sample().to_bytes();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(
            ModelFile::from_bytes(cut, Path::new("m.json")),
            Err(Error::Parse { .. })
        ));
    }

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> Result<ModelFile> {
        let mut v: serde_json::Value = serde_json::from_slice(&sample().to_bytes()).unwrap();
        f(&mut v);
        ModelFile::from_bytes(&serde_json::to_vec(&v).unwrap(), Path::new("m.json"))
    }

    #[test]
    fn version_mismatch_is_detected() {
        let err = edit(|v| v["format_version"] = 2.into()).unwrap_err();
        assert!(matches!(err, Error::Version { found: 2, expected: 1, .. }));
    }

    #[test]
    fn inconsistent_dims_name_the_field() {
        let err = edit(|v| v["dims"]["hidden"] = 3.into()).unwrap_err();
        assert_eq!(field_of(err), "config");
        let err = edit(|v| v["dims"]["n_skills"] = 3.into()).unwrap_err();
        assert_eq!(field_of(err), "skills");
        let err = edit(|v| {
            v["params"]["gates"]["forget"]["u"]["cols"] = 3.into();
        })
        .unwrap_err();
        assert_eq!(field_of(err), "params.gates.forget.u");
        let err = edit(|v| {
            v["params"]["projection"]["data"].as_array_mut().unwrap().pop();
        })
        .unwrap_err();
        assert_eq!(field_of(err), "params.projection");
        let err = edit(|v| v["config"]["learning_rate"] = 0.5.into()).unwrap_err();
        assert_eq!(field_of(err), "config_digest");
        let err = edit(|v| v["words"][1] = "a".into()).unwrap_err();
        assert_eq!(field_of(err), "words");
    }
}
