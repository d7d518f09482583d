use sesa_core::{
    byproducts::{job2skill, nearest_skills, rank_components, skill_embedding},
    linalg::dot,
    model::{init_params, project},
    text::{tokenize, SkillVocab, WordVocab},
    DenseMatrix, DenseVector, Dims, ModelParams, SeededRng,
};

fn random_projection(seed: u64, rows: usize, cols: usize) -> ModelParams {
    let dims = Dims {
        vocab: 4,
        d_emb: 3,
        hidden: cols,
        n_skills: rows,
    };
    let mut params = ModelParams::zeros(dims);
    let mut rng = SeededRng::new(seed);
    rng.fill_uniform(params.projection.as_mut_slice(), 1.0);
    params
}

fn brute_force_nearest(p: &DenseMatrix, q: usize, k: usize) -> Vec<(usize, f64)> {
    let row = |i: usize| (0..p.cols()).map(|c| p.get(i, c)).collect::<Vec<_>>();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let qv = row(q);
    let mut all = Vec::new();
    for j in 0..p.rows() {
        if j == q {
            continue;
        }
        let rv = row(j);
        let d: f64 = qv.iter().zip(&rv).map(|(a, b)| a * b).sum();
        all.push((j, d / (norm(&qv) * norm(&rv))));
    }
    // selection sort: repeatedly take the best remaining, lower index on ties
    let mut out = Vec::new();
    for _ in 0..k {
        let mut best = 0;
        for i in 1..all.len() {
            if all[i].1 > all[best].1 || (all[i].1 == all[best].1 && all[i].0 < all[best].0) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

#[test]
fn nearest_skills_matches_brute_force_on_random_projections() {
    for seed in 0..20 {
        let params = random_projection(seed, 12, 8);
        for q in 0..12 {
            let got = nearest_skills(&params, q, 5).unwrap();
            let want = brute_force_nearest(&params.projection, q, 5);
            assert_eq!(got.iter().map(|x| x.0).collect::<Vec<_>>(), want.iter().map(|x| x.0).collect::<Vec<_>>());
            for (g, w) in got.iter().zip(&want) {
                assert!((g.1 - w.1).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn duplicate_rows_are_each_others_nearest() {
    let mut params = random_projection(3, 6, 4);
    let row = params.projection.row(1).to_vec();
    params.projection.row_mut(4).copy_from_slice(&row);
    let nn = nearest_skills(&params, 1, 1).unwrap();
    assert_eq!(nn[0].0, 4);
    assert!((nn[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn orthogonal_rows_fall_back_to_index_order() {
    let mut params = random_projection(0, 5, 5);
    params.projection = DenseMatrix::identity(5);
    let nn = nearest_skills(&params, 2, 3).unwrap();
    assert_eq!(nn, vec![(0, 0.0), (1, 0.0), (3, 0.0)]);
}

#[test]
fn skill_embedding_probes_the_projection() {
    let params = random_projection(9, 7, 4);
    let names: Vec<(String, usize)> = (0..7).map(|i| (format!("s{i}"), 7 - i)).collect();
    let skills = SkillVocab::from_entries(names).unwrap();
    let mut rng = SeededRng::new(1);
    for _ in 0..20 {
        let latent: Vec<f64> = (0..4).map(|_| rng.uniform(-2.0, 2.0).unwrap()).collect();
        let latent = DenseVector::new(latent).unwrap();
        let explicit = project(&params, &latent).unwrap();
        for j in 0..7 {
            let e = skill_embedding(&params, &skills, j).unwrap();
            assert_eq!(e.name, format!("s{j}"));
            assert!((explicit[j] - dot(&e.vector, &latent).unwrap()).abs() < 1e-12);
        }
    }
    assert!(skill_embedding(&params, &skills, 7).is_err());
}

#[test]
fn tag_lists_bracket_every_unlisted_component() {
    let dims = Dims {
        vocab: 6,
        d_emb: 4,
        hidden: 5,
        n_skills: 10,
    };
    let params = init_params(dims, &mut SeededRng::new(2), None).unwrap();
    let words = WordVocab::build(&[tokenize("alpha beta gamma delta epsilon")], 1).unwrap();
    let skills = SkillVocab::from_entries((0..10).map(|i| (format!("k{i}"), 1)).collect()).unwrap();
    let tag = job2skill(&params, &words, &skills, "beta gamma zeta alpha", 3, 64).unwrap();
    assert_eq!(tag.positive.len(), 3);
    assert_eq!(tag.negative.len(), 3);
    assert!(tag.positive.windows(2).all(|w| w[0].1 >= w[1].1));
    assert!(tag.negative.windows(2).all(|w| w[0].1 <= w[1].1));

    let (explicit, _) = sesa_core::model::encode_job(&params, &words.encode(&tokenize("beta gamma zeta alpha"), 64)).unwrap();
    let (pos, neg) = rank_components(explicit.as_slice(), 3);
    let listed: Vec<usize> = pos.iter().chain(&neg).map(|x| x.0).collect();
    let floor = pos.last().unwrap().1;
    let ceiling = neg.last().unwrap().1;
    for j in (0..10).filter(|j| !listed.contains(j)) {
        assert!(explicit[j] <= floor && explicit[j] >= ceiling);
    }
}
