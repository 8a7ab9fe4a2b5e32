use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.tsv", self.as_str())
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!("unknown split {s:?}"))),
        }
    }
}

/// Ordered relation labels of a dataset; the position is the class index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub name: String,
    pub labels: Vec<String>,
}

impl LabelSet {
    pub fn new(name: &str, labels: &[&str]) -> Result<Self> {
        let mut seen = HashSet::new();
        if labels.is_empty() || !labels.iter().all(|l| seen.insert(*l)) {
            return Err(Error::InvalidArgument(format!(
                "label set {name:?} must be nonempty and duplicate-free"
            )));
        }
        Ok(LabelSet {
            name: name.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
        })
    }

    /// Relation inventories of the standard benchmark datasets.
    pub fn preset(name: &str) -> Option<Self> {
        let labels: &[&str] = match name.to_ascii_lowercase().as_str() {
            "khn" | "k&h+n" => &["hypernym", "meronym", "co-hyponym", "random"],
            "bless" => &["hypernym", "meronym", "co-hyponym", "random"],
            "root09" => &["hypernym", "co-hyponym", "random"],
            // Entails and MemberOf are dropped
            "evalution" => &[
                "hypernym",
                "meronym",
                "attribute",
                "synonym",
                "antonym",
                "holonym",
                "substance meronym",
            ],
            _ => return None,
        };
        Some(LabelSet::new(name, labels).unwrap())
    }

    /// A preset name or a comma-separated list of labels.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some(set) = LabelSet::preset(spec) {
            return Ok(set);
        }
        let labels: Vec<&str> = spec.split(',').map(str::trim).collect();
        LabelSet::new("custom", &labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub w1: String,
    pub w2: String,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationDataset {
    pub name: String,
    pub labels: LabelSet,
    pub train: Vec<Instance>,
    pub val: Vec<Instance>,
    pub test: Vec<Instance>,
}

impl RelationDataset {
    pub fn split(&self, split: Split) -> &[Instance] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn split_mut(&mut self, split: Split) -> &mut Vec<Instance> {
        match split {
            Split::Train => &mut self.train,
            Split::Val => &mut self.val,
            Split::Test => &mut self.test,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Instance> {
        self.train.iter().chain(&self.val).chain(&self.test)
    }

    /// Writes `train.tsv`, `val.tsv` and `test.tsv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for split in Split::ALL {
            let mut f = fs::File::create(dir.join(split.file_name()))?;
            write_split(&mut f, self.split(split), &self.labels)?;
        }
        Ok(())
    }
}

pub fn write_split<W: Write>(mut w: W, instances: &[Instance], labels: &LabelSet) -> Result<()> {
    for i in instances {
        writeln!(w, "{}\t{}\t{}", i.w1, i.w2, labels.label(i.label))?;
    }
    Ok(())
}

/// Reads `w1<TAB>w2<TAB>relation` lines. Words are lowercased; blank lines
/// are skipped.
pub fn read_split<R: BufRead>(reader: R, labels: &LabelSet, source: &str) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(source, lineno, format!("expected 3 fields, found {}", fields.len())));
        }
        let label = labels.index(fields[2].trim()).ok_or_else(|| {
            Error::parse(
                source,
                lineno,
                format!("unknown relation {:?} for label set {}", fields[2], labels.name),
            )
        })?;
        let w1 = fields[0].trim().to_lowercase();
        let w2 = fields[1].trim().to_lowercase();
        if w1.is_empty() || w2.is_empty() {
            return Err(Error::parse(source, lineno, "empty word"));
        }
        if !seen.insert((w1.clone(), w2.clone())) {
            return Err(Error::parse(source, lineno, format!("duplicate pair ({w1}, {w2})")));
        }
        out.push(Instance { w1, w2, label });
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{source}: no instances")));
    }
    Ok(out)
}

pub fn load_split(path: &Path, labels: &LabelSet) -> Result<Vec<Instance>> {
    let file = fs::File::open(path).map_err(|_| Error::MissingInput(path.to_path_buf()))?;
    read_split(BufReader::new(file), labels, &path.display().to_string())
}

/// Loads `train.tsv`, `val.tsv` and `test.tsv` from `dir`.
pub fn load_dataset(dir: &Path, labels: &LabelSet) -> Result<RelationDataset> {
    let load = |s: Split| load_split(&dir.join(s.file_name()), labels);
    Ok(RelationDataset {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| labels.name.clone()),
        labels: labels.clone(),
        train: load(Split::Train)?,
        val: load(Split::Val)?,
        test: load(Split::Test)?,
    })
}
