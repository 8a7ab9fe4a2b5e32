use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Canonical string of the empty path used for pairs without corpus paths.
pub const EMPTY_PATH: &str = "UNK-lemma/UNK-POS/UNK-dep/UNK-dir";

pub const X_SLOT: &str = "X";
pub const Y_SLOT: &str = "Y";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `>`: on the X side, pointing up to the head.
    Up,
    /// `-`: the node where both sides meet.
    Root,
    /// `<`: on the Y side, pointing down from the head.
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => ">",
            Direction::Root => "-",
            Direction::Down => "<",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Root => Direction::Root,
            Direction::Down => Direction::Up,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            ">" => Ok(Direction::Up),
            "-" => Ok(Direction::Root),
            "<" => Ok(Direction::Down),
            _ => Err(Error::Data(format!("bad path direction {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathEdge {
    pub lemma: String,
    pub pos: String,
    pub deprel: String,
    pub direction: Direction,
}

impl fmt::Display for PathEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.lemma,
            self.pos,
            self.deprel,
            self.direction.as_str()
        )
    }
}

impl FromStr for PathEdge {
    type Err = Error;

    /// Splits from the right so that lemmas may contain `/`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.rsplitn(4, '/').collect();
        if parts.len() != 4 {
            return Err(Error::Data(format!("bad path edge {s:?}")));
        }
        Ok(PathEdge {
            lemma: parts[3].to_string(),
            pos: parts[2].to_string(),
            deprel: parts[1].to_string(),
            direction: parts[0].parse()?,
        })
    }
}

/// A dependency path from slot X to slot Y.
///
/// Directions always read `>* - <*`, the first lemma is `X` and the last is
/// `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DepPath {
    edges: Vec<PathEdge>,
}

impl DepPath {
    pub fn new(edges: Vec<PathEdge>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Data("a path needs at least two nodes".into()));
        }
        if edges[0].lemma != X_SLOT || edges[edges.len() - 1].lemma != Y_SLOT {
            return Err(Error::Data("path must run from X to Y".into()));
        }
        let roots = edges.iter().filter(|e| e.direction == Direction::Root).count();
        if roots != 1 {
            return Err(Error::Data(format!("path has {roots} root edges")));
        }
        // Up < Root < Down, and there is exactly one Root.
        if !edges.windows(2).all(|w| w[0].direction <= w[1].direction) {
            return Err(Error::Data("path directions must read >* - <*".into()));
        }
        Ok(DepPath { edges })
    }

    pub fn edges(&self) -> &[PathEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The same path read from the other endpoint, relabelled to start at X.
    pub fn mirror(&self) -> DepPath {
        let edges = self
            .edges
            .iter()
            .rev()
            .map(|e| PathEdge {
                lemma: match e.lemma.as_str() {
                    X_SLOT => Y_SLOT.to_string(),
                    Y_SLOT => X_SLOT.to_string(),
                    other => other.to_string(),
                },
                pos: e.pos.clone(),
                deprel: e.deprel.clone(),
                direction: e.direction.flipped(),
            })
            .collect();
        DepPath { edges }
    }
}

impl fmt::Display for DepPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for DepPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let edges = s
            .split(' ')
            .map(str::parse)
            .collect::<Result<Vec<PathEdge>>>()?;
        DepPath::new(edges)
    }
}

/// Mirror on canonical strings; the empty path maps to itself.
pub fn mirror_str(path: &str) -> Result<String> {
    if path == EMPTY_PATH {
        return Ok(path.to_string());
    }
    Ok(path.parse::<DepPath>()?.mirror().to_string())
}
