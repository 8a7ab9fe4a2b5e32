//! Synthetic corpus for exercising the missing-path setting.
//!
//! Nouns belong to domains and play one of three roles: category, part or
//! member. Within a domain, member-category pairs are hypernyms,
//! member-part pairs meronyms and member-member pairs co-hyponyms, each
//! expressed by five sentence templates. Cross-domain pairs co-occur only
//! through generic templates and form the random class. Word vectors are
//! role vector + domain vector + noise, so the relation of a pair is
//! recoverable from its words only by comparing their domains.
//!
//! Random pairs are cross-domain, with the role pattern of a uniformly
//! drawn related class.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, ParsedSentence, ParsedToken, Vocabulary, UNK};
use crate::error::{Error, Result};
use crate::eval::dataset::{Instance, LabelSet, RelationDataset, Split};
use crate::neural::{seeded, RunRng, Tensor};
use crate::paths::{extract_path, mirror_str};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Category,
    Part,
    Member,
}

/// Class indices follow the `khn` label set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Hypernym,
    Meronym,
    CoHyponym,
    Random,
}

impl Relation {
    pub const ALL: [Relation; 4] = [
        Relation::Hypernym,
        Relation::Meronym,
        Relation::CoHyponym,
        Relation::Random,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Random pairs take the roles of a uniformly chosen related class, so
    /// roles alone never identify the class.
    fn roles(self, rng: &mut RunRng) -> (Role, Role) {
        match self {
            Relation::Hypernym => (Role::Member, Role::Category),
            Relation::Meronym => (Role::Member, Role::Part),
            Relation::CoHyponym => (Role::Member, Role::Member),
            Relation::Random => Relation::ALL[rng.gen_range(0..3)].roles(rng),
        }
    }
}

/// Rejection-sampling budget for one fresh pair.
const MAX_PAIR_DRAWS: usize = 10_000;

type TemplateToken = (&'static str, &'static str, usize, &'static str);

const HYPERNYM: [&[TemplateToken]; 5] = [
    &[("$1", "NOUN", 2, "nsubj"), ("be", "VERB", 0, "ROOT"), ("a", "DET", 4, "det"), ("$2", "NOUN", 2, "attr")],
    &[("$1", "NOUN", 2, "nsubj"), ("be", "VERB", 0, "ROOT"), ("type", "ADJ", 2, "attr"), ("of", "ADP", 3, "prep"), ("$2", "NOUN", 4, "pobj")],
    &[("$2", "NOUN", 0, "ROOT"), ("such", "ADJ", 3, "amod"), ("as", "ADP", 1, "prep"), ("$1", "NOUN", 3, "pobj")],
    &[("$1", "NOUN", 2, "nsubjpass"), ("classify", "VERB", 0, "ROOT"), ("as", "ADP", 2, "prep"), ("$2", "NOUN", 3, "pobj")],
    &[("$1", "NOUN", 2, "nsubj"), ("belong", "VERB", 0, "ROOT"), ("to", "ADP", 2, "prep"), ("$2", "NOUN", 3, "pobj")],
];

const MERONYM: [&[TemplateToken]; 5] = [
    &[("$1", "NOUN", 2, "nsubj"), ("have", "VERB", 0, "ROOT"), ("a", "DET", 4, "det"), ("$2", "NOUN", 2, "dobj")],
    &[("$2", "NOUN", 0, "ROOT"), ("of", "ADP", 1, "prep"), ("the", "DET", 4, "det"), ("$1", "NOUN", 2, "pobj")],
    &[("$1", "NOUN", 3, "poss"), ("'s", "PART", 1, "case"), ("$2", "NOUN", 0, "ROOT")],
    &[("$1", "NOUN", 2, "nsubj"), ("contain", "VERB", 0, "ROOT"), ("$2", "NOUN", 2, "dobj")],
    &[("$2", "NOUN", 2, "nsubj"), ("be", "VERB", 0, "ROOT"), ("part", "ADJ", 2, "attr"), ("of", "ADP", 3, "prep"), ("$1", "NOUN", 4, "pobj")],
];

const CO_HYPONYM: [&[TemplateToken]; 5] = [
    &[("$1", "NOUN", 0, "ROOT"), ("and", "CCONJ", 3, "cc"), ("$2", "NOUN", 1, "conj")],
    &[("$1", "NOUN", 2, "nsubj"), ("resemble", "VERB", 0, "ROOT"), ("$2", "NOUN", 2, "dobj")],
    &[("$1", "NOUN", 2, "nsubj"), ("rival", "VERB", 0, "ROOT"), ("$2", "NOUN", 2, "dobj")],
    &[("$1", "NOUN", 0, "ROOT"), ("like", "ADP", 1, "prep"), ("$2", "NOUN", 2, "pobj")],
    &[("$1", "NOUN", 3, "nsubjpass"), ("be", "AUX", 3, "auxpass"), ("compare", "VERB", 0, "ROOT"), ("with", "ADP", 3, "prep"), ("$2", "NOUN", 4, "pobj")],
];

const GENERIC: [&[TemplateToken]; 5] = [
    &[("$1", "NOUN", 0, "ROOT"), ("near", "ADP", 1, "prep"), ("$2", "NOUN", 2, "pobj")],
    &[("$1", "NOUN", 2, "nsubj"), ("see", "VERB", 0, "ROOT"), ("$2", "NOUN", 2, "dobj")],
    &[("$1", "NOUN", 2, "nsubj"), ("mention", "VERB", 0, "ROOT"), ("$2", "NOUN", 2, "dobj")],
    &[("$1", "NOUN", 0, "ROOT"), ("beside", "ADP", 1, "prep"), ("$2", "NOUN", 2, "pobj")],
    &[("$1", "NOUN", 0, "ROOT"), ("with", "ADP", 1, "prep"), ("$2", "NOUN", 2, "pobj")],
];

fn templates(r: Relation) -> &'static [&'static [TemplateToken]; 5] {
    match r {
        Relation::Hypernym => &HYPERNYM,
        Relation::Meronym => &MERONYM,
        Relation::CoHyponym => &CO_HYPONYM,
        Relation::Random => &GENERIC,
    }
}

/// Renders a template with `w1` in slot 1 and `w2` in slot 2.
fn render(template: &[TemplateToken], w1: &str, w2: &str) -> ParsedSentence {
    let tokens = template
        .iter()
        .enumerate()
        .map(|(i, &(lemma, upos, head, deprel))| ParsedToken {
            index: i + 1,
            lemma: match lemma {
                "$1" => w1.to_string(),
                "$2" => w2.to_string(),
                l => l.to_string(),
            },
            upos: upos.to_string(),
            head,
            deprel: deprel.to_string(),
        })
        .collect();
    ParsedSentence::new(tokens).expect("templates are well-formed trees")
}

fn slot_positions(template: &[TemplateToken]) -> (usize, usize) {
    let pos = |s: &str| template.iter().position(|t| t.0 == s).unwrap() + 1;
    (pos("$1"), pos("$2"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub domains: usize,
    pub categories: usize,
    pub parts: usize,
    pub members: usize,
    pub dim: usize,
    pub role_norm: f64,
    pub domain_norm: f64,
    pub noise_norm: f64,
    /// Dataset pairs per split, split 20/20/20/40 over hypernym, meronym,
    /// co-hyponym and random.
    pub train_pairs: usize,
    pub val_pairs: usize,
    pub test_pairs: usize,
    /// Share of each split's pairs, per class, whose sentences are withheld.
    pub withheld_fraction: f64,
    /// Extra same-domain pairs with relation sentences.
    pub background_related: usize,
    /// Extra cross-domain pairs with generic sentences.
    pub background_random: usize,
    pub max_sentences_per_pair: usize,
    /// Probability that a related pair's sentence uses a generic template.
    pub generic_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            domains: 10,
            categories: 5,
            parts: 15,
            members: 30,
            dim: 50,
            role_norm: 1.0,
            domain_norm: 1.0,
            noise_norm: 0.3,
            train_pairs: 600,
            val_pairs: 150,
            test_pairs: 250,
            withheld_fraction: 0.5,
            background_related: 3000,
            background_random: 3000,
            max_sentences_per_pair: 3,
            generic_noise: 0.05,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Noun {
    pub lemma: String,
    pub domain: usize,
    pub role: Role,
}

#[derive(Clone, Debug)]
pub struct SyntheticWorld {
    pub nouns: Vec<Noun>,
    pub embeddings: EmbeddingTable,
    pub corpus: Vec<ParsedSentence>,
    pub dataset: RelationDataset,
    /// Dataset pairs with no sentence in the corpus, by split.
    pub withheld: Vec<(Split, Instance)>,
}

impl SyntheticWorld {
    /// Rendered paths of the relation's templates, in both orientations.
    pub fn characteristic_paths(relation: Relation) -> HashSet<String> {
        let mut out = HashSet::new();
        for t in templates(relation) {
            let s = render(t, "x", "y");
            let (i, j) = slot_positions(t);
            let p = extract_path(&s, i, j, usize::MAX)
                .expect("slots are distinct tokens")
                .expect("no length cap")
                .to_string();
            out.insert(mirror_str(&p).expect("rendered paths are valid"));
            out.insert(p);
        }
        out
    }

    pub fn relation_of(&self, inst: &Instance) -> Relation {
        Relation::ALL[inst.label]
    }
}

struct Lexicon {
    by_role: Vec<[Vec<usize>; 3]>,
}

impl Lexicon {
    fn pick(&self, domain: usize, role: Role, rng: &mut RunRng) -> usize {
        *self.by_role[domain][role as usize].choose(rng).unwrap()
    }
}

fn unit_gaussian(dim: usize, norm: f64, rng: &mut RunRng) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x * norm / n).collect()
}

fn sample_pair(rel: Relation, lex: &Lexicon, domains: usize, rng: &mut RunRng) -> (usize, usize) {
    let (r1, r2) = rel.roles(rng);
    let d1 = rng.gen_range(0..domains);
    let d2 = if rel == Relation::Random {
        (d1 + rng.gen_range(1..domains)) % domains
    } else {
        d1
    };
    (lex.pick(d1, r1, rng), lex.pick(d2, r2, rng))
}

/// Builds nouns, word vectors, a dataset and a corpus with the dataset's
/// withheld pairs removed. Everything is a function of `cfg`.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticWorld> {
    if cfg.domains < 2 || cfg.categories == 0 || cfg.parts == 0 || cfg.members < 2 {
        return Err(Error::InvalidArgument(
            "need two domains and at least one noun of each role".into(),
        ));
    }
    let mut rng = seeded(cfg.seed);
    let mut nouns = Vec::new();
    let mut lex = Lexicon { by_role: Vec::new() };
    for d in 0..cfg.domains {
        let mut slots: [Vec<usize>; 3] = Default::default();
        for (role, count, tag) in [
            (Role::Category, cfg.categories, "c"),
            (Role::Part, cfg.parts, "p"),
            (Role::Member, cfg.members, "m"),
        ] {
            for i in 0..count {
                slots[role as usize].push(nouns.len());
                nouns.push(Noun {
                    lemma: format!("d{d}{tag}{i}"),
                    domain: d,
                    role,
                });
            }
        }
        lex.by_role.push(slots);
    }

    let role_vecs: Vec<Vec<f64>> = (0..3).map(|_| unit_gaussian(cfg.dim, cfg.role_norm, &mut rng)).collect();
    let domain_vecs: Vec<Vec<f64>> = (0..cfg.domains)
        .map(|_| unit_gaussian(cfg.dim, cfg.domain_norm, &mut rng))
        .collect();
    let mut vocab = Vocabulary::new(UNK);
    let mut rows = vec![vec![0.0; cfg.dim]];
    for n in &nouns {
        let noise = unit_gaussian(cfg.dim, cfg.noise_norm, &mut rng);
        let v = (0..cfg.dim)
            .map(|k| role_vecs[n.role as usize][k] + domain_vecs[n.domain][k] + noise[k])
            .collect();
        vocab.insert(&n.lemma);
        rows.push(v);
    }
    let mut function_words: Vec<&str> = Relation::ALL
        .iter()
        .flat_map(|&r| templates(r).iter().flat_map(|t| t.iter().map(|tok| tok.0)))
        .filter(|l| !l.starts_with('$'))
        .collect();
    function_words.sort_unstable();
    function_words.dedup();
    for w in function_words {
        vocab.insert(w);
        rows.push(unit_gaussian(cfg.dim, 1.0, &mut rng));
    }
    let n_rows = rows.len() as f64;
    rows[0] = (0..cfg.dim)
        .map(|k| rows[1..].iter().map(|r| r[k]).sum::<f64>() / (n_rows - 1.0))
        .collect();
    let embeddings = EmbeddingTable::new(vocab, Tensor::from_rows(&rows)?, false)?;

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let unordered = |a: usize, b: usize| (a.min(b), a.max(b));
    let draw = |rel: Relation, rng: &mut RunRng, used: &mut HashSet<(usize, usize)>| {
        for _ in 0..MAX_PAIR_DRAWS {
            let (a, b) = sample_pair(rel, &lex, cfg.domains, rng);
            if a != b && used.insert(unordered(a, b)) {
                return Ok((a, b));
            }
        }
        Err(Error::InvalidArgument(format!(
            "too few distinct {rel:?} pairs for the requested counts"
        )))
    };
    let proportions = [0.2, 0.2, 0.2, 0.4];
    let labels = LabelSet::preset("khn").expect("preset exists");
    let mut dataset = RelationDataset {
        name: "synthetic".into(),
        labels,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    let mut withheld = Vec::new();
    let mut corpus_pairs: Vec<(usize, usize, Relation)> = Vec::new();
    for (split, size) in [
        (Split::Train, cfg.train_pairs),
        (Split::Val, cfg.val_pairs),
        (Split::Test, cfg.test_pairs),
    ] {
        let mut instances = Vec::new();
        for (rel, share) in Relation::ALL.iter().zip(proportions) {
            let n = (size as f64 * share).round() as usize;
            let hidden = (n as f64 * cfg.withheld_fraction).round() as usize;
            for i in 0..n {
                let (a, b) = draw(*rel, &mut rng, &mut used)?;
                let inst = Instance {
                    w1: nouns[a].lemma.clone(),
                    w2: nouns[b].lemma.clone(),
                    label: rel.index(),
                };
                if i < hidden {
                    withheld.push((split, inst.clone()));
                } else {
                    corpus_pairs.push((a, b, *rel));
                }
                instances.push(inst);
            }
        }
        instances.shuffle(&mut rng);
        *dataset.split_mut(split) = instances;
    }
    for i in 0..cfg.background_related + cfg.background_random {
        let rel = if i < cfg.background_related {
            Relation::ALL[i % 3]
        } else {
            Relation::Random
        };
        let (a, b) = draw(rel, &mut rng, &mut used)?;
        corpus_pairs.push((a, b, rel));
    }

    let mut corpus = Vec::new();
    for &(a, b, rel) in &corpus_pairs {
        for _ in 0..rng.gen_range(1..=cfg.max_sentences_per_pair.max(1)) {
            let family = if rel != Relation::Random && rng.gen_bool(cfg.generic_noise) {
                Relation::Random
            } else {
                rel
            };
            let t = templates(family).choose(&mut rng).unwrap();
            corpus.push(render(t, &nouns[a].lemma, &nouns[b].lemma));
        }
    }
    corpus.shuffle(&mut rng);
    Ok(SyntheticWorld {
        nouns,
        embeddings,
        corpus,
        dataset,
        withheld,
    })
}
