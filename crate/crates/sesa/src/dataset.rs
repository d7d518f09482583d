//! Labeled job–profile pairs as JSON lines, and the skill-vocabulary TSV.
//!
//! A dataset line is `{"job_text": "...", "profile_skills": ["..."], "label": 0|1}`;
//! other keys are ignored. The skill vocabulary has one `<skill>\t<count>`
//! line per explicit dimension, in dimension order.

use std::{
    fs::File,
    io::{BufRead, BufReader, BufWriter, Write},
    path::Path,
};

use serde::{Deserialize, Serialize};
use sesa_core::{
    model::{Example, ProfileSkillVec},
    text::{normalize_skill, tokenize},
    SkillVocab, WordVocab,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub job_text: String,
    pub profile_skills: Vec<String>,
    #[serde(serialize_with = "label_as_int")]
    pub label: bool,
}

fn label_as_int<S: serde::Serializer>(label: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*label))
}

#[derive(Deserialize)]
struct RawRecord {
    job_text: String,
    profile_skills: Vec<String>,
    label: serde_json::Value,
}

fn parse_label(value: &serde_json::Value) -> Option<bool> {
    match value.as_u64() {
        Some(0) => Some(false),
        Some(1) => Some(true),
        _ => None,
    }
}

pub fn parse_records(reader: impl BufRead, path: &Path) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::parse(path, n, e.to_string()))?;
        let label = parse_label(&raw.label)
            .ok_or_else(|| Error::parse(path, n, format!("label must be 0 or 1, found {}", raw.label)))?;
        records.push(Record {
            job_text: raw.job_text,
            profile_skills: raw.profile_skills,
            label,
        });
    }
    Ok(records)
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse_records(BufReader::new(file), path)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut out, row).map_err(|e| Error::io(path)(e.into()))?;
        out.write_all(b"\n").map_err(Error::io(path))?;
    }
    out.flush().map_err(Error::io(path))
}

/// Examples ready for the model, plus how many skill mentions were dropped
/// because the skill vocabulary does not contain them.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub examples: Vec<Example>,
    pub dropped_skills: usize,
}

pub fn encode_records(records: &[Record], words: &WordVocab, skills: &SkillVocab, max_len: usize) -> Encoded {
    let mut dropped_skills = 0;
    let examples = records
        .iter()
        .map(|r| {
            let mut ids = Vec::with_capacity(r.profile_skills.len());
            for name in &r.profile_skills {
                match skills.id(&normalize_skill(name)) {
                    Some(id) => ids.push(id),
                    None => dropped_skills += 1,
                }
            }
            Example {
                token_ids: words.encode(&tokenize(&r.job_text), max_len),
                skills: ProfileSkillVec::new(ids),
                label: r.label,
            }
        })
        .collect();
    Encoded {
        examples,
        dropped_skills,
    }
}

/// Reads and encodes a dataset file against a model's vocabularies.
pub fn read_dataset(path: &Path, words: &WordVocab, skills: &SkillVocab, max_len: usize) -> Result<Encoded> {
    Ok(encode_records(&read_records(path)?, words, skills, max_len))
}

pub fn write_skill_vocab(path: &Path, skills: &SkillVocab) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    for (name, count) in skills.names().iter().zip(skills.counts()) {
        writeln!(out, "{name}\t{count}").map_err(Error::io(path))?;
    }
    out.flush().map_err(Error::io(path))
}

pub fn read_skill_vocab(path: &Path) -> Result<SkillVocab> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(Error::io(path))?;
        if line.is_empty() {
            continue;
        }
        let (name, count) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, n, "expected `<skill>\\t<count>`"))?;
        let count = count
            .parse::<usize>()
            .map_err(|_| Error::parse(path, n, format!("`{count}` is not a count")))?;
        entries.push((name.to_string(), count));
    }
    SkillVocab::from_entries(entries).map_err(|e| Error::parse(path, 0, e.to_string()))
}
