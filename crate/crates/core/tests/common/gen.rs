//! Seeded synthetic corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refmine::{Corpus, EntityForest, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small make/model/trim listings with shared trims, noise words, the odd
/// reordered post and one two-token model that always appears whole.
pub struct Listings {
    pub corpus: Corpus,
    pub makes: Vec<String>,
}

pub fn listings(seed: u64, max_posts: usize) -> Listings {
    let mut r = rng(seed);
    let n_makes = r.gen_range(2..=4);
    let makes: Vec<String> = (0..n_makes).map(|i| format!("mk{i}")).collect();
    let models: Vec<Vec<String>> = (0..n_makes)
        .map(|i| {
            let n = r.gen_range(2..=4);
            (0..n)
                .map(|j| {
                    if i == 0 && j == 0 {
                        "cv crown".to_owned()
                    } else {
                        format!("md{i}x{j}")
                    }
                })
                .collect()
        })
        .collect();
    let trims: Vec<String> = (0..r.gen_range(1..=3)).map(|i| format!("tr{i}")).collect();
    let noise = ["for", "sale", "cheap", "nice", "mint"];

    let n_posts = r.gen_range(10..=max_posts);
    let mut texts = Vec::with_capacity(n_posts);
    for _ in 0..n_posts {
        let m = r.gen_range(0..n_makes);
        let mut words: Vec<String> = Vec::new();
        if r.gen_bool(0.85) {
            words.push(makes[m].clone());
        }
        if r.gen_bool(0.9) {
            words.push(models[m].choose(&mut r).unwrap().clone());
        }
        if r.gen_bool(0.4) {
            words.push(trims.choose(&mut r).unwrap().clone());
        }
        if r.gen_bool(0.3) {
            let pos = r.gen_range(0..=words.len());
            words.insert(pos, noise.choose(&mut r).unwrap().to_string());
        }
        if r.gen_bool(0.1) {
            words.shuffle(&mut r);
        }
        if words.is_empty() {
            words.push(noise.choose(&mut r).unwrap().to_string());
        }
        texts.push(words.join(" "));
    }
    Listings {
        corpus: Corpus::from_texts(&texts),
        makes,
    }
}

/// Random seed set: some makes, maybe a noise word, maybe an absent value.
pub fn seeds_for(l: &Listings, seed: u64) -> Vec<String> {
    let mut r = rng(seed ^ 0x5eed);
    let mut seeds: Vec<String> = l.makes.iter().filter(|_| r.gen_bool(0.7)).cloned().collect();
    if r.gen_bool(0.3) {
        seeds.push("cheap".into());
    }
    if r.gen_bool(0.3) {
        seeds.push("absent".into());
    }
    if seeds.is_empty() {
        seeds.push(l.makes[0].clone());
    }
    seeds
}

/// Listing stream whose make mix and model vocabulary drift over time.
pub fn drifting_stream(seed: u64, posts: usize) -> Corpus {
    let mut r = rng(seed);
    let n_makes = r.gen_range(3..=5);
    let mut texts = Vec::with_capacity(posts);
    for i in 0..posts {
        let phase = i * 3 / posts;
        let m = if phase == 0 {
            r.gen_range(0..2)
        } else {
            r.gen_range(0..n_makes)
        };
        let pool = 2 + i / r.gen_range(5..15);
        let model = r.gen_range(0..pool);
        let mut post = format!("mk{m} md{m}x{model}");
        if r.gen_bool(0.3) {
            post.push_str(&format!(" tr{}", r.gen_range(0..3)));
        }
        texts.push(post);
    }
    Corpus::from_texts(&texts)
}

/// Random forest over a small alphabet, built through the public API.
pub fn random_forest(seed: u64) -> EntityForest {
    let mut r = rng(seed);
    let alphabet: Vec<Term> = (0..12).map(|i| Term::unigram(format!("v{i}"))).collect();
    let mut f = EntityForest::new();
    let mut nodes = Vec::new();
    for _ in 0..r.gen_range(0..4) {
        nodes.push(f.add_root(alphabet.choose(&mut r).unwrap().clone()));
    }
    if nodes.is_empty() {
        return f;
    }
    for _ in 0..r.gen_range(0..25) {
        let parent = *nodes.choose(&mut r).unwrap();
        let term = alphabet.choose(&mut r).unwrap().clone();
        if let Ok(id) = f.attach_child(parent, term) {
            nodes.push(id);
        }
    }
    f
}
