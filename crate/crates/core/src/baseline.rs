//! Similarity-feature baseline: TF-IDF cosine and Jaccard features between
//! job text and profile skills, fed to an L2-regularized logistic regression.

use alloc::{
    collections::{BTreeMap, BTreeSet},
    string::String,
    vec,
    vec::Vec,
};

use crate::{
    error::{Result, SesaError},
    model::logistic,
    text::{tokenize, TokenSeq},
};

pub const DEFAULT_LOGREG_ITERS: usize = 100;
pub const DEFAULT_LOGREG_LAMBDA: f64 = 0.1;

/// Document frequencies over a reference corpus (the training jobs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub df: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a TokenSeq>) -> Self {
        let mut stats = Self::default();
        for doc in docs {
            stats.n_docs += 1;
            let unique: BTreeSet<&String> = doc.tokens.iter().collect();
            for t in unique {
                *stats.df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        stats
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        match self.df.get(term) {
            Some(&df) if df > 0 => Some(libm::log(self.n_docs as f64 / df as f64)),
            _ => None,
        }
    }
}

pub type SparseVector = BTreeMap<String, f64>;

/// Raw term count times `ln(N / df)`; terms unseen in the corpus are skipped.
pub fn tfidf_vector(doc: &TokenSeq, stats: &CorpusStats) -> SparseVector {
    let mut tf: BTreeMap<&String, usize> = BTreeMap::new();
    for t in &doc.tokens {
        *tf.entry(t).or_insert(0) += 1;
    }
    tf.into_iter()
        .filter_map(|(t, n)| stats.idf(t).map(|idf| (t.clone(), n as f64 * idf)))
        .collect()
}

/// Cosine of two sparse vectors; 0 when either is zero.
pub fn sparse_cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let norm = |v: &SparseVector| libm::sqrt(v.values().map(|x| x * x).sum::<f64>());
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// `|a ∩ b| / |a ∪ b|`, 0 when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairFeatures {
    pub tfidf_cosine: f64,
    /// Jaccard over the token sets of the job text and the profile's skill names.
    pub jaccard_skills: f64,
    /// Profile skills with at least one name token present in the job text.
    pub skill_overlap_count: usize,
    pub job_len: usize,
    pub profile_skill_count: usize,
}

impl PairFeatures {
    pub const COUNT: usize = 5;

    pub fn to_vec(&self) -> [f64; Self::COUNT] {
        [
            self.tfidf_cosine,
            self.jaccard_skills,
            self.skill_overlap_count as f64,
            self.job_len as f64,
            self.profile_skill_count as f64,
        ]
    }
}

/// Features of one pair; the profile side is the skill names joined into a
/// pseudo-document.
pub fn pair_features<S: AsRef<str>>(job: &TokenSeq, profile_skills: &[S], stats: &CorpusStats) -> PairFeatures {
    let mut profile_doc = TokenSeq::default();
    let job_tokens: BTreeSet<&String> = job.tokens.iter().collect();
    let mut overlap = 0;
    for skill in profile_skills {
        let toks = tokenize(skill.as_ref());
        if toks.tokens.iter().any(|t| job_tokens.contains(t)) {
            overlap += 1;
        }
        profile_doc.source_len += toks.source_len;
        profile_doc.tokens.extend(toks.tokens);
    }
    let profile_tokens: BTreeSet<&String> = profile_doc.tokens.iter().collect();
    PairFeatures {
        tfidf_cosine: sparse_cosine(&tfidf_vector(job, stats), &tfidf_vector(&profile_doc, stats)),
        jaccard_skills: jaccard(&job_tokens, &profile_tokens),
        skill_overlap_count: overlap,
        job_len: job.len(),
        profile_skill_count: profile_skills.len(),
    }
}

/// Per-feature mean and standard deviation from the training split.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| SesaError::Precondition("no feature rows".into()))?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            if r.len() != d {
                return Err(SesaError::Dimension { expected: d, actual: r.len() });
            }
            mean.iter_mut().zip(r).for_each(|(m, x)| *m += x / n);
        }
        let mut var = vec![0.0; d];
        for r in rows {
            var.iter_mut()
                .zip(r.iter().zip(&mean))
                .for_each(|(v, (x, m))| *v += (x - m) * (x - m) / n);
        }
        // constant columns are centered but not scaled
        let std = var
            .into_iter()
            .map(|v| if v > 0.0 { libm::sqrt(v) } else { 1.0 })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub lambda: f64,
    pub standardizer: Standardizer,
}

impl LogRegModel {
    /// Probability of the positive class for a raw (unstandardized) row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        logistic(self.bias + z.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }
}

/// Full-batch gradient descent on `mean log-loss + (λ/2)·‖w‖²` (bias not
/// penalized) for exactly `iters` iterations, after standardizing features.
///
/// The step is `1 / (¼(d + 1) + λ)`, the reciprocal of a Lipschitz bound on
/// the objective's gradient for standardized inputs, so descent is monotone
/// for any `λ`.
pub fn train_logreg(features: &[Vec<f64>], labels: &[bool], iters: usize, lambda: f64) -> Result<LogRegModel> {
    if features.len() != labels.len() {
        return Err(SesaError::Dimension {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(SesaError::Precondition("logistic regression needs both classes".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(SesaError::Config("lambda must be non-negative and finite".into()));
    }
    let standardizer = Standardizer::fit(features)?;
    let rows: Vec<Vec<f64>> = features.iter().map(|r| standardizer.apply(r)).collect();
    let d = standardizer.mean.len();
    let n = rows.len() as f64;
    let step = 1.0 / (0.25 * (d as f64 + 1.0) + lambda);

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut gw = vec![0.0; d];
    for _ in 0..iters {
        gw.fill(0.0);
        let mut gb = 0.0;
        for (x, &y) in rows.iter().zip(labels) {
            let p = logistic(b + x.iter().zip(&w).map(|(xi, wi)| xi * wi).sum::<f64>());
            let r = p - if y { 1.0 } else { 0.0 };
            gb += r / n;
            gw.iter_mut().zip(x).for_each(|(g, xi)| *g += r * xi / n);
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= step * (gi + lambda * *wi);
        }
        b -= step * gb;
    }
    Ok(LogRegModel {
        weights: w,
        bias: b,
        iterations: iters,
        lambda,
        standardizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn jaccard_cases() {
        assert!((jaccard(&set(&["a", "b"]), &set(&["b", "c"])) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 0.0);
    }

    // toy corpus: d1 = "a a b", d2 = "b c", d3 = "b d d d"
    fn toy() -> CorpusStats {
        CorpusStats::build(&[tokenize("a a b"), tokenize("b c"), tokenize("b d d d")])
    }

    #[test]
    fn tfidf_by_hand() {
        let stats = toy();
        let v = tfidf_vector(&tokenize("a a b d z"), &stats);
        let ln3 = 3.0f64.ln();
        assert_eq!(v.len(), 3);
        assert!((v["a"] - 2.0 * ln3).abs() < 1e-15);
        assert_eq!(v["b"], 0.0);
        assert!((v["d"] - ln3).abs() < 1e-15);
        assert!(!v.contains_key("z"));
        assert!(tfidf_vector(&TokenSeq::default(), &stats).is_empty());
    }

    #[test]
    fn pair_features_cases() {
        let stats = toy();
        let f = pair_features(&tokenize("a c d"), &["a", "c d"], &stats);
        assert!((f.tfidf_cosine - 1.0).abs() < 1e-12);
        assert_eq!(f.jaccard_skills, 1.0);
        assert_eq!(f.skill_overlap_count, 2);

        let f = pair_features(&tokenize("a a b"), &["zzz", "qqq"], &stats);
        assert_eq!(f.skill_overlap_count, 0);
        assert_eq!(f.tfidf_cosine, 0.0);

        let f = pair_features(&tokenize("a a b c"), &["a", "d"], &stats);
        let ln3 = 3.0f64.ln();
        // job: a = 2 ln3, b = 0, c = ln3; profile: a = ln3, d = ln3
        let expected = (2.0 * ln3 * ln3) / ((5.0f64).sqrt() * ln3 * (2.0f64).sqrt() * ln3);
        assert!((f.tfidf_cosine - expected).abs() < 1e-12);
        assert!((f.jaccard_skills - 1.0 / 4.0).abs() < 1e-15);
        assert_eq!(f.skill_overlap_count, 1);
        assert_eq!((f.job_len, f.profile_skill_count), (4, 2));
    }

    #[test]
    fn logreg_separable_and_shrinkage() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..40 {
            let t = i as f64 / 40.0;
            xs.push(vec![1.0 + t, 0.5 * t]);
            ys.push(true);
            xs.push(vec![-1.0 - t, 0.3 * t]);
            ys.push(false);
        }
        let m = train_logreg(&xs, &ys, 100, 0.1).unwrap();
        let acc = xs.iter().zip(&ys).filter(|(x, &y)| (m.predict(x) > 0.5) == y).count();
        assert_eq!(acc, xs.len());
        assert_eq!(m, train_logreg(&xs, &ys, 100, 0.1).unwrap());

        let m = train_logreg(&xs, &ys, 100, 1e6).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-3));
        assert!(train_logreg(&xs, &[true; 80], 100, 0.1).is_err());
    }
}
