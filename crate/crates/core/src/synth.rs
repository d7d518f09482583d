//! Seeded synthetic job–profile corpus with planted skill structure.
//!
//! Every skill owns a disjoint pool of keyword tokens. A job is generated
//! from a few "true" skills: each token is one of their keywords with
//! probability `keyword_fraction`, otherwise filler. A pair is positive when
//! the profile holds at least `overlap_threshold` of the job's true skills,
//! and the observed label is flipped with probability `label_noise`.

use alloc::{collections::BTreeSet, format, string::String, vec::Vec};

use crate::{
    error::{Result, SesaError},
    rng::SeededRng,
};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GenConfig {
    pub seed: u64,
    pub n_skills: usize,
    pub kw_per_skill: usize,
    pub noise_vocab_size: usize,
    pub skills_per_job: usize,
    pub skills_per_profile: usize,
    pub tokens_per_job: usize,
    pub keyword_fraction: f64,
    pub pos_rate: f64,
    pub overlap_threshold: usize,
    pub label_noise: f64,
    pub n_examples: usize,
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_skills: 50,
            kw_per_skill: 8,
            noise_vocab_size: 500,
            skills_per_job: 3,
            skills_per_profile: 6,
            tokens_per_job: 60,
            keyword_fraction: 0.4,
            pos_rate: 0.10,
            overlap_threshold: 2,
            label_noise: 0.05,
            n_examples: 10_000,
            train_fraction: 0.65,
            valid_fraction: 0.05,
            test_fraction: 0.30,
        }
    }
}

impl GenConfig {
    /// Positive rate below 1%, as in large-scale application logs.
    pub fn imbalanced() -> Self {
        Self {
            pos_rate: 0.0075,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_skills", self.n_skills),
            ("kw_per_skill", self.kw_per_skill),
            ("noise_vocab_size", self.noise_vocab_size),
            ("skills_per_job", self.skills_per_job),
            ("skills_per_profile", self.skills_per_profile),
            ("tokens_per_job", self.tokens_per_job),
            ("overlap_threshold", self.overlap_threshold),
            ("n_examples", self.n_examples),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(SesaError::Config(format!("{name} must be positive")));
        }
        for (name, p) in [
            ("keyword_fraction", self.keyword_fraction),
            ("pos_rate", self.pos_rate),
            ("label_noise", self.label_noise),
            ("train_fraction", self.train_fraction),
            ("valid_fraction", self.valid_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SesaError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        let sum = self.train_fraction + self.valid_fraction + self.test_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SesaError::Config(format!("split fractions sum to {sum}, not 1")));
        }
        if self.skills_per_job > self.n_skills || self.skills_per_profile > self.n_skills {
            return Err(SesaError::Config("skills per job/profile exceed n_skills".into()));
        }
        let (lo, hi) = self.overlap_range();
        if self.pos_rate > 0.0 && self.overlap_threshold > hi {
            return Err(SesaError::Config("overlap_threshold is unreachable; no positives possible".into()));
        }
        if self.pos_rate < 1.0 && lo >= self.overlap_threshold {
            return Err(SesaError::Config("every profile reaches overlap_threshold; no negatives possible".into()));
        }
        Ok(())
    }

    /// Feasible `|profile ∩ true skills|` values.
    fn overlap_range(&self) -> (usize, usize) {
        let others = self.n_skills - self.skills_per_job;
        let lo = self.skills_per_profile.saturating_sub(others);
        let hi = self.skills_per_job.min(self.skills_per_profile);
        (lo, hi)
    }

    /// `(train, valid, test)` sizes; train and valid are rounded, test takes the rest.
    pub fn split_sizes(&self) -> (usize, usize, usize) {
        let n = self.n_examples as f64;
        let train = libm::round(n * self.train_fraction) as usize;
        let valid = (libm::round(n * self.valid_fraction) as usize).min(self.n_examples - train);
        (train, valid, self.n_examples - train - valid)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkillLexicon {
    pub skills: Vec<String>,
    pub keywords: Vec<Vec<String>>,
    pub noise_vocab: Vec<String>,
}

impl SkillLexicon {
    pub fn index_of(&self, skill: &str) -> Option<usize> {
        self.skills.iter().position(|s| s == skill)
    }

    /// Skill owning `token`, if it is a keyword.
    pub fn owner_of(&self, token: &str) -> Option<usize> {
        self.keywords.iter().position(|kws| kws.iter().any(|k| k == token))
    }
}

fn syllable_token(rng: &mut SeededRng, syllables: usize) -> String {
    let mut s = String::with_capacity(2 * syllables);
    for _ in 0..syllables {
        s.push(CONSONANTS[rng.below(CONSONANTS.len())] as char);
        s.push(VOWELS[rng.below(VOWELS.len())] as char);
    }
    s
}

/// Keyword pools and filler vocabulary, globally unique. Skill `i` is named
/// `skill_{i:03}_{head}` where `head` is its first keyword.
pub fn gen_lexicon(rng: &mut SeededRng, config: &GenConfig) -> Result<SkillLexicon> {
    config.validate()?;
    let mut seen = BTreeSet::new();
    let mut fresh = |rng: &mut SeededRng| loop {
        let t = syllable_token(rng, 3);
        if seen.insert(t.clone()) {
            return t;
        }
    };
    let keywords: Vec<Vec<String>> = (0..config.n_skills)
        .map(|_| (0..config.kw_per_skill).map(|_| fresh(rng)).collect())
        .collect();
    let noise_vocab = (0..config.noise_vocab_size).map(|_| fresh(rng)).collect();
    let skills = keywords
        .iter()
        .enumerate()
        .map(|(i, kws)| format!("skill_{i:03}_{}", kws[0]))
        .collect();
    Ok(SkillLexicon {
        skills,
        keywords,
        noise_vocab,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    pub true_skills: Vec<String>,
    pub pre_noise_label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecord {
    /// Generation index, stable across splits.
    pub id: usize,
    pub job_text: String,
    pub profile_skills: Vec<String>,
    pub label: bool,
    pub truth: GroundTruth,
}

fn ln_choose(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Draws the overlap size from the hypergeometric law of a uniformly random
/// profile, conditioned on the requested class. Equivalent to rejection
/// sampling uniform profiles until the class matches.
fn sample_overlap(rng: &mut SeededRng, config: &GenConfig, positive: bool) -> usize {
    let (lo, hi) = config.overlap_range();
    let (n, sj, sp) = (config.n_skills, config.skills_per_job, config.skills_per_profile);
    let support: Vec<usize> = (lo..=hi)
        .filter(|&k| (k >= config.overlap_threshold) == positive)
        .collect();
    let weights: Vec<f64> = support
        .iter()
        .map(|&k| libm::exp(ln_choose(sj, k) + ln_choose(n - sj, sp - k) - ln_choose(n, sp)))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.next_f64() * total;
    for (k, w) in support.iter().zip(&weights) {
        if u < *w {
            return *k;
        }
        u -= w;
    }
    *support.last().expect("class feasibility is validated")
}

/// One pair plus its ground truth.
pub fn gen_example(rng: &mut SeededRng, lexicon: &SkillLexicon, config: &GenConfig, id: usize) -> SynthRecord {
    let n = lexicon.skills.len();
    let mut true_ids = rng.sample_distinct(n, config.skills_per_job);
    true_ids.sort_unstable();

    let pool: Vec<&String> = true_ids.iter().flat_map(|&s| &lexicon.keywords[s]).collect();
    let mut words = Vec::with_capacity(config.tokens_per_job);
    for _ in 0..config.tokens_per_job {
        let w = if rng.bernoulli(config.keyword_fraction) {
            pool[rng.below(pool.len())]
        } else {
            &lexicon.noise_vocab[rng.below(lexicon.noise_vocab.len())]
        };
        words.push(w.as_str());
    }

    let positive = rng.bernoulli(config.pos_rate);
    let k = sample_overlap(rng, config, positive);
    let others: Vec<usize> = (0..n).filter(|s| !true_ids.contains(s)).collect();
    let mut profile: Vec<usize> = rng
        .sample_distinct(true_ids.len(), k)
        .into_iter()
        .map(|i| true_ids[i])
        .chain(
            rng.sample_distinct(others.len(), config.skills_per_profile - k)
                .into_iter()
                .map(|i| others[i]),
        )
        .collect();
    profile.sort_unstable();

    let pre_noise_label = k >= config.overlap_threshold;
    let label = pre_noise_label ^ rng.bernoulli(config.label_noise);
    let name = |&s: &usize| lexicon.skills[s].clone();
    SynthRecord {
        id,
        job_text: words.join(" "),
        profile_skills: profile.iter().map(name).collect(),
        label,
        truth: GroundTruth {
            true_skills: true_ids.iter().map(name).collect(),
            pre_noise_label,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub config: GenConfig,
    pub lexicon: SkillLexicon,
    pub train: Vec<SynthRecord>,
    pub valid: Vec<SynthRecord>,
    pub test: Vec<SynthRecord>,
}

/// Lexicon, `n_examples` pairs, then a seeded shuffle into the three splits.
pub fn gen_dataset(config: &GenConfig) -> Result<SynthDataset> {
    config.validate()?;
    if config.n_examples < 100 {
        return Err(SesaError::Config("n_examples must be at least 100".into()));
    }
    let mut rng = SeededRng::new(config.seed);
    let lexicon = gen_lexicon(&mut rng, config)?;
    let mut records: Vec<SynthRecord> = (0..config.n_examples)
        .map(|id| gen_example(&mut rng, &lexicon, config, id))
        .collect();
    rng.shuffle(&mut records);
    let (n_train, n_valid, _) = config.split_sizes();
    let test = records.split_off(n_train + n_valid);
    let valid = records.split_off(n_train);
    Ok(SynthDataset {
        config: config.clone(),
        lexicon,
        train: records,
        valid,
        test,
    })
}

/// Standard deviation of the total keyword noise relative to a unit anchor.
pub const ALIGNED_NOISE: f64 = 0.1;

fn random_unit(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [f64]) {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Embeddings where a skill's keywords cluster around a random unit anchor
/// (isotropic noise of total scale [`ALIGNED_NOISE`], then rescaled to unit
/// length) and filler words are independent random unit vectors.
pub fn gen_aligned_embeddings(lexicon: &SkillLexicon, d_emb: usize, rng: &mut SeededRng) -> Result<Vec<(String, Vec<f64>)>> {
    if d_emb < 8 {
        return Err(SesaError::Config("aligned embeddings need d_emb ≥ 8".into()));
    }
    let sigma = ALIGNED_NOISE / libm::sqrt(d_emb as f64);
    let mut out = Vec::new();
    for kws in &lexicon.keywords {
        let anchor = random_unit(rng, d_emb);
        for k in kws {
            let mut v: Vec<f64> = anchor.iter().map(|a| a + sigma * rng.gaussian()).collect();
            normalize(&mut v);
            out.push((k.clone(), v));
        }
    }
    for w in &lexicon.noise_vocab {
        out.push((w.clone(), random_unit(rng, d_emb)));
    }
    Ok(out)
}
