//! Writes a generated corpus to a directory:
//!
//! | file | content |
//! |---|---|
//! | `train.jsonl`, `valid.jsonl`, `test.jsonl` | dataset records |
//! | `ground_truth.jsonl` | `split`, `id`, `true_skills`, `pre_noise_label` per record |
//! | `lexicon.json` | skills, their keyword pools, filler words |
//! | `config.json` | the generator configuration (seed included) |
//! | `embeddings.txt` | aligned word embeddings, when a dimension is requested |

use std::path::Path;

use serde::Serialize;
use sesa_core::{
    synth::{gen_aligned_embeddings, GenConfig, SynthDataset, SynthRecord},
    SeededRng,
};

use crate::{
    dataset::{write_jsonl, Record},
    embeddings::save_embeddings,
    error::{Error, Result},
    report::write_json,
};

/// Seed offset separating the embedding stream from the corpus stream.
pub const EMBEDDING_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Serialize)]
struct TruthRow<'a> {
    split: &'static str,
    id: usize,
    true_skills: &'a [String],
    pre_noise_label: bool,
}

#[derive(Serialize)]
struct GenManifest<'a> {
    gen: &'a GenConfig,
    embedding_dim: Option<usize>,
    embedding_seed: Option<u64>,
}

pub fn record_of(r: &SynthRecord) -> Record {
    Record {
        job_text: r.job_text.clone(),
        profile_skills: r.profile_skills.clone(),
        label: r.label,
    }
}

pub fn embedding_rng(config: &GenConfig) -> SeededRng {
    SeededRng::new(config.seed ^ EMBEDDING_STREAM)
}

pub fn write_dataset(data: &SynthDataset, out_dir: &Path, embedding_dim: Option<usize>) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(Error::io(out_dir))?;
    let splits = [("train", &data.train), ("valid", &data.valid), ("test", &data.test)];
    let mut truth = Vec::new();
    for (name, records) in splits {
        let rows: Vec<Record> = records.iter().map(record_of).collect();
        write_jsonl(&out_dir.join(format!("{name}.jsonl")), &rows)?;
        truth.extend(records.iter().map(|r| TruthRow {
            split: name,
            id: r.id,
            true_skills: &r.truth.true_skills,
            pre_noise_label: r.truth.pre_noise_label,
        }));
    }
    write_jsonl(&out_dir.join("ground_truth.jsonl"), &truth)?;
    write_json(&out_dir.join("lexicon.json"), &data.lexicon)?;
    let manifest = GenManifest {
        gen: &data.config,
        embedding_dim,
        embedding_seed: embedding_dim.map(|_| data.config.seed ^ EMBEDDING_STREAM),
    };
    write_json(&out_dir.join("config.json"), &manifest)?;
    if let Some(dim) = embedding_dim {
        let rows = gen_aligned_embeddings(&data.lexicon, dim, &mut embedding_rng(&data.config))?;
        save_embeddings(
            &out_dir.join("embeddings.txt"),
            dim,
            rows.iter().map(|(w, v)| (w.as_str(), v.as_slice())),
        )?;
    }
    Ok(())
}
