//! Read-outs of a trained model: skill embeddings (rows of the projection)
//! and the job-to-skill tagger (the explicit representation itself).

use alloc::{string::String, vec::Vec};
use core::cmp::Ordering;

use crate::{
    error::{Result, SesaError},
    linalg::{self, DenseVector},
    model::{self, ModelParams},
    text::{tokenize, SkillVocab, WordVocab},
};

#[derive(Debug, Clone, PartialEq)]
pub struct SkillEmbedding {
    pub skill_id: usize,
    pub name: String,
    pub vector: DenseVector,
}

/// Row `skill_id` of the projection, copied.
pub fn skill_embedding(params: &ModelParams, skills: &SkillVocab, skill_id: usize) -> Result<SkillEmbedding> {
    let n = params.dims.n_skills;
    if skill_id >= n {
        return Err(SesaError::Index { index: skill_id, len: n });
    }
    Ok(SkillEmbedding {
        skill_id,
        name: skills.name(skill_id).unwrap_or_default().into(),
        vector: DenseVector::from_raw(params.projection.row(skill_id).to_vec()),
    })
}

/// Descending by score, ties to the lower index.
fn by_score_desc(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `k` skills whose projection rows have the highest cosine with
/// `skill_id`'s row (itself excluded). Zero rows score 0.
pub fn nearest_skills(params: &ModelParams, skill_id: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    let p = &params.projection;
    let n = p.rows();
    if skill_id >= n {
        return Err(SesaError::Index { index: skill_id, len: n });
    }
    if k >= n {
        return Err(SesaError::Precondition(alloc::format!("k = {k} must be below n_skills = {n}")));
    }
    let query = p.row(skill_id);
    let qn = libm::sqrt(linalg::dot_slices(query, query));
    if qn == 0.0 {
        return Err(SesaError::Degenerate("query skill has a zero embedding"));
    }
    let mut ranked: Vec<(usize, f64)> = (0..n)
        .filter(|&j| j != skill_id)
        .map(|j| {
            let row = p.row(j);
            let rn = libm::sqrt(linalg::dot_slices(row, row));
            let c = if rn == 0.0 {
                0.0
            } else {
                linalg::dot_slices(query, row) / (qn * rn)
            };
            (j, c)
        })
        .collect();
    ranked.sort_by(by_score_desc);
    ranked.truncate(k);
    Ok(ranked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagResult {
    /// Highest components, descending.
    pub positive: Vec<(String, f64)>,
    /// Lowest components, ascending.
    pub negative: Vec<(String, f64)>,
}

/// Top-`k` and bottom-`k` components of an explicit representation.
/// Ties go to the lower skill index in both lists.
pub fn rank_components(explicit: &[f64], k: usize) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let mut idx: Vec<(usize, f64)> = explicit.iter().copied().enumerate().collect();
    idx.sort_by(by_score_desc);
    let positive = idx.iter().take(k).copied().collect();
    idx.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let negative = idx.iter().take(k).copied().collect();
    (positive, negative)
}

/// Tags `text` with skills through the full forward path.
pub fn job2skill(
    params: &ModelParams,
    vocab: &WordVocab,
    skills: &SkillVocab,
    text: &str,
    k: usize,
    max_len: usize,
) -> Result<TagResult> {
    if vocab.len() != params.dims.vocab || skills.len() != params.dims.n_skills {
        return Err(SesaError::Consistency("vocabularies do not match the model"));
    }
    let ids = vocab.encode(&tokenize(text), max_len);
    let (explicit, _) = model::encode_job(params, &ids)?;
    let (pos, neg) = rank_components(explicit.as_slice(), k);
    let named = |v: Vec<(usize, f64)>| {
        v.into_iter()
            .map(|(i, s)| (String::from(skills.name(i).unwrap_or_default()), s))
            .collect()
    };
    Ok(TagResult {
        positive: named(pos),
        negative: named(neg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        linalg::DenseMatrix,
        model::{init_params, Dims},
        rng::SeededRng,
    };
    use alloc::{string::ToString, vec};

    fn vocab(n: usize) -> SkillVocab {
        SkillVocab::from_entries((0..n).map(|i| (alloc::format!("s{i}"), 1)).collect()).unwrap()
    }

    fn params_with_projection(p: DenseMatrix) -> ModelParams {
        let mut m = ModelParams::zeros(Dims {
            vocab: 3,
            d_emb: 2,
            hidden: p.cols(),
            n_skills: p.rows(),
        });
        m.projection = p;
        m
    }

    #[test]
    fn identity_embeddings_are_basis() {
        let p = params_with_projection(DenseMatrix::identity(4));
        let e = skill_embedding(&p, &vocab(4), 2).unwrap();
        assert_eq!(e.vector, DenseVector::basis(4, 2));
        assert_eq!(e.name, "s2");
        assert!(skill_embedding(&p, &vocab(4), 4).is_err());
    }

    #[test]
    fn embedding_is_a_copy() {
        let p = params_with_projection(DenseMatrix::identity(3));
        let mut e = skill_embedding(&p, &vocab(3), 0).unwrap();
        e.vector.as_mut_slice()[0] = 9.0;
        assert_eq!(p.projection.get(0, 0), 1.0);
    }

    #[test]
    fn duplicate_and_orthogonal_rows() {
        let mut m = DenseMatrix::identity(4);
        m.row_mut(3).copy_from_slice(&[0.0, 2.0, 0.0, 0.0]);
        let p = params_with_projection(m);
        let nn = nearest_skills(&p, 1, 2).unwrap();
        assert_eq!(nn[0].0, 3);
        assert!((nn[0].1 - 1.0).abs() < 1e-15);

        let p = params_with_projection(DenseMatrix::identity(4));
        let nn = nearest_skills(&p, 2, 3).unwrap();
        assert_eq!(nn, vec![(0, 0.0), (1, 0.0), (3, 0.0)]);
        assert!(nearest_skills(&p, 0, 4).is_err());
    }

    #[test]
    fn zero_query_is_degenerate() {
        let p = params_with_projection(DenseMatrix::zeros(3, 2));
        assert!(matches!(nearest_skills(&p, 0, 1), Err(SesaError::Degenerate(_))));
    }

    #[test]
    fn zero_params_tag_by_index() {
        let dims = Dims {
            vocab: 3,
            d_emb: 2,
            hidden: 2,
            n_skills: 5,
        };
        let p = ModelParams::zeros(dims);
        let wv = WordVocab::from_tokens(["a".to_string(), "b".to_string()]);
        let r = job2skill(&p, &wv, &vocab(5), "a b c", 2, 16).unwrap();
        assert_eq!(r.positive, vec![("s0".to_string(), 0.0), ("s1".to_string(), 0.0)]);
        assert_eq!(r.negative, vec![("s0".to_string(), 0.0), ("s1".to_string(), 0.0)]);
    }

    #[test]
    fn tag_scores_are_explicit_components() {
        let dims = Dims {
            vocab: 3,
            d_emb: 4,
            hidden: 3,
            n_skills: 6,
        };
        let p = init_params(dims, &mut SeededRng::new(2), None).unwrap();
        let wv = WordVocab::from_tokens(["a".to_string(), "b".to_string()]);
        let sv = vocab(6);
        let r = job2skill(&p, &wv, &sv, "b a a", 3, 16).unwrap();
        let (explicit, _) = model::encode_job(&p, &[2, 1, 1]).unwrap();
        for (name, s) in r.positive.iter().chain(&r.negative) {
            assert_eq!(*s, explicit[sv.id(name).unwrap()]);
        }
        assert!(r.positive.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(r.negative.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
