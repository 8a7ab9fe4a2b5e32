//! CoNLL-U reading and writing.
//!
//! Only ID, LEMMA, UPOS, HEAD and DEPREL are kept. Multiword-token ranges
//! (`3-4`) and empty nodes (`5.1`) are skipped. Sentences that do not form a
//! single rooted tree are dropped and counted.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub lemma: String,
    pub upos: String,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParsedSentence {
    pub tokens: Vec<ParsedToken>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeError {
    Empty,
    NonConsecutiveIds,
    SelfHead(usize),
    HeadOutOfRange(usize),
    NoRoot,
    MultipleRoots,
    Cycle(usize),
}

impl ParsedSentence {
    pub fn new(tokens: Vec<ParsedToken>) -> std::result::Result<Self, TreeError> {
        let s = ParsedSentence { tokens };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &ParsedToken {
        &self.tokens[index - 1]
    }

    pub fn root(&self) -> usize {
        self.tokens.iter().find(|t| t.head == 0).map(|t| t.index).unwrap()
    }

    /// Checks that head links form one tree over all tokens.
    pub fn validate(&self) -> std::result::Result<(), TreeError> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut roots = 0;
        for (pos, t) in self.tokens.iter().enumerate() {
            if t.index != pos + 1 {
                return Err(TreeError::NonConsecutiveIds);
            }
            if t.head == t.index {
                return Err(TreeError::SelfHead(t.index));
            }
            if t.head > n {
                return Err(TreeError::HeadOutOfRange(t.index));
            }
            if t.head == 0 {
                roots += 1;
            }
        }
        match roots {
            0 => return Err(TreeError::NoRoot),
            1 => {}
            _ => return Err(TreeError::MultipleRoots),
        }
        // With a single root, the graph is a tree iff every node reaches it.
        for t in &self.tokens {
            let mut cur = t.index;
            let mut steps = 0;
            while cur != 0 {
                cur = self.tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(TreeError::Cycle(t.index));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub sentences: usize,
    pub malformed: usize,
}

/// Streaming CoNLL-U reader. Yields valid sentences; I/O errors are fatal.
pub struct ConlluReader<R> {
    reader: R,
    line_no: usize,
    stats: ParseStats,
    done: bool,
}

pub fn parse_conllu<R: BufRead>(reader: R) -> ConlluReader<R> {
    ConlluReader {
        reader,
        line_no: 0,
        stats: ParseStats::default(),
        done: false,
    }
}

enum LineResult {
    Token(ParsedToken),
    Skip,
    Bad,
}

fn parse_line(line: &str) -> LineResult {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return LineResult::Bad;
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return LineResult::Skip;
    }
    let (Ok(index), Ok(head)) = (id.parse::<usize>(), cols[6].parse::<usize>()) else {
        return LineResult::Bad;
    };
    let lemma = if cols[2] == "_" && cols[1] != "_" {
        cols[1]
    } else {
        cols[2]
    };
    LineResult::Token(ParsedToken {
        index,
        lemma: lemma.to_lowercase(),
        upos: cols[3].to_string(),
        head,
        deprel: cols[7].to_string(),
    })
}

impl<R: BufRead> ConlluReader<R> {
    pub fn stats(&self) -> ParseStats {
        self.stats
    }

    fn next_block(&mut self) -> io::Result<Option<(Vec<ParsedToken>, bool)>> {
        let mut tokens = Vec::new();
        let mut bad = false;
        let mut saw_content = false;
        let mut buf = String::new();
        loop {
            buf.clear();
            if self.reader.read_line(&mut buf)? == 0 {
                return Ok(saw_content.then_some((tokens, bad)));
            }
            self.line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if saw_content {
                    return Ok(Some((tokens, bad)));
                }
                continue;
            }
            saw_content = true;
            if line.starts_with('#') {
                continue;
            }
            match parse_line(line) {
                LineResult::Token(t) => tokens.push(t),
                LineResult::Skip => {}
                LineResult::Bad => bad = true,
            }
        }
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = io::Result<ParsedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            match self.next_block() {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(None) => self.done = true,
                Ok(Some((tokens, bad))) => {
                    if tokens.is_empty() && !bad {
                        // comment-only block
                        continue;
                    }
                    let sentence = ParsedSentence { tokens };
                    if bad || sentence.validate().is_err() {
                        self.stats.malformed += 1;
                        continue;
                    }
                    self.stats.sentences += 1;
                    return Some(Ok(sentence));
                }
            }
        }
        None
    }
}

pub fn write_conllu<W: Write>(mut w: W, sentences: &[ParsedSentence]) -> io::Result<()> {
    for s in sentences {
        for t in &s.tokens {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index, t.lemma, t.lemma, t.upos, t.head, t.deprel
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads every sentence of one file.
pub fn read_conllu_file(path: &Path) -> Result<(Vec<ParsedSentence>, ParseStats)> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut reader = parse_conllu(BufReader::new(file));
    let sentences = reader.by_ref().collect::<io::Result<Vec<_>>>()?;
    Ok((sentences, reader.stats()))
}

/// Files ending in `.conllu` under `dir`, sorted by name.
pub fn conllu_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingInput(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "conllu"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads all `.conllu` files of a directory in name order.
pub fn read_conllu_dir(dir: &Path) -> Result<(Vec<ParsedSentence>, ParseStats)> {
    let mut all = Vec::new();
    let mut stats = ParseStats::default();
    for f in conllu_files(dir)? {
        let (s, st) = read_conllu_file(&f)?;
        all.extend(s);
        stats.sentences += st.sentences;
        stats.malformed += st.malformed;
    }
    Ok((all, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const DOG_MAMMAL: &str = "\
# text = A dog is a mammal
1\tA\ta\tDET\tDT\t_\t2\tdet\t_\t_
2\tdog\tdog\tNOUN\tNN\t_\t3\tnsubj\t_\t_
3\tis\tbe\tVERB\tVBZ\t_\t0\tROOT\t_\t_
4\ta\ta\tDET\tDT\t_\t5\tdet\t_\t_
5\tmammal\tmammal\tNOUN\tNN\t_\t3\tattr\t_\t_

";

    fn read_all(text: &str) -> (Vec<ParsedSentence>, ParseStats) {
        let mut r = parse_conllu(text.as_bytes());
        let s = r.by_ref().collect::<io::Result<Vec<_>>>().unwrap();
        (s, r.stats())
    }

    #[test]
    fn dog_is_a_mammal() {
        let (s, stats) = read_all(DOG_MAMMAL);
        assert_eq!(s.len(), 1);
        assert_eq!(stats.malformed, 0);
        let root = s[0].token(s[0].root());
        assert_eq!(root.lemma, "be");
        assert_eq!(s[0].token(2).head, 3);
        assert_eq!(s[0].token(5).deprel, "attr");
    }

    #[test]
    fn empty_input() {
        let (s, stats) = read_all("");
        assert!(s.is_empty());
        assert_eq!(stats, ParseStats::default());
    }

    #[test]
    fn two_roots_are_skipped() {
        let text = "1\ta\ta\tNOUN\t_\t_\t0\tROOT\t_\t_\n2\tb\tb\tNOUN\t_\t_\t0\tROOT\t_\t_\n\n";
        let (s, stats) = read_all(&format!("{text}{DOG_MAMMAL}"));
        assert_eq!(s.len(), 1);
        assert_eq!(stats.malformed, 1);
    }

    #[test]
    fn non_integer_head_is_skipped() {
        let text = "1\ta\ta\tNOUN\t_\t_\tX\tROOT\t_\t_\n\n";
        let (s, stats) = read_all(text);
        assert!(s.is_empty());
        assert_eq!(stats.malformed, 1);
    }

    #[test]
    fn cycle_is_skipped() {
        let text = "1\ta\ta\tNOUN\t_\t_\t0\tROOT\t_\t_\n2\tb\tb\tNOUN\t_\t_\t3\tx\t_\t_\n3\tc\tc\tNOUN\t_\t_\t2\tx\t_\t_\n\n";
        let (s, stats) = read_all(text);
        assert!(s.is_empty());
        assert_eq!(stats.malformed, 1);
    }

    #[test]
    fn multiword_and_empty_nodes_ignored() {
        let text = "1-2\tdoesn't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tDogs\tDog\tNOUN\t_\t_\t2\tnsubj\t_\t_\n2\tbark\tbark\tVERB\t_\t_\t0\tROOT\t_\t_\n2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\n";
        let (s, stats) = read_all(text);
        assert_eq!(stats.malformed, 0);
        assert_eq!(s[0].len(), 2);
        assert_eq!(s[0].token(1).lemma, "dog");
    }

    #[test]
    fn round_trip_through_writer() {
        let (s, _) = read_all(DOG_MAMMAL);
        let mut out = Vec::new();
        write_conllu(&mut out, &s).unwrap();
        let (again, _) = read_all(std::str::from_utf8(&out).unwrap());
        assert_eq!(s, again);
    }
}
