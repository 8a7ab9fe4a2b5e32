use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::conllu::ParsedSentence;

pub const UNK: &str = "<unk>";

/// Dense string <-> id map with id 0 reserved for the unknown token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(unk: &str) -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(unk);
        v
    }

    /// Builds a vocabulary with `tokens` assigned ids `1..` in order.
    /// Repeated tokens keep their first id.
    pub fn from_tokens<I, S>(unk: &str, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Vocabulary::new(unk);
        for t in tokens {
            v.insert(t.as_ref());
        }
        v
    }

    /// Returns the id of `token`, inserting it if needed.
    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Id of `token`, or 0 when absent.
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(0)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn unk(&self) -> &str {
        &self.tokens[0]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// True when only the unknown token is present.
    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 1
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (id, t) in self.tokens.iter().enumerate() {
            writeln!(w, "{t}\t{id}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R, source: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (tok, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(source, n + 1, "expected token<TAB>id"))?;
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(source, n + 1, format!("bad id {id:?}")))?;
            if id != tokens.len() {
                return Err(Error::parse(source, n + 1, "ids must be dense and ordered"));
            }
            tokens.push(tok.to_string());
        }
        if tokens.is_empty() {
            return Err(Error::Data(format!("{source}: empty vocabulary")));
        }
        let unk = tokens[0].clone();
        Ok(Vocabulary::from_tokens(&unk, tokens.into_iter().skip(1)))
    }
}

/// Which tokens count as nouns when building vocabularies and pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct NounTags {
    pub include_propn: bool,
}

impl NounTags {
    pub fn is_noun(&self, upos: &str) -> bool {
        upos == "NOUN" || (self.include_propn && upos == "PROPN")
    }
}

/// Lemmas with frequency `>= min_count`, most frequent first (ties by lemma).
pub fn build_vocab(
    sentences: &[ParsedSentence],
    min_count: usize,
    noun_only: bool,
    nouns: NounTags,
) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in sentences {
        for t in &s.tokens {
            if !noun_only || nouns.is_noun(&t.upos) {
                *counts.entry(t.lemma.as_str()).or_default() += 1;
            }
        }
    }
    let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Ok(Vocabulary::from_tokens(UNK, kept.into_iter().map(|(t, _)| t)))
}
