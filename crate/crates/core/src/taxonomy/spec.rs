use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::TaxonomyError;

/// Textual tree shape: `(left | right)` with label atoms at the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSpec {
    Leaf(String),
    Node(Box<TreeSpec>, Box<TreeSpec>),
}

pub const GENERALIZED_SPEC: &str = "((fear | (anger | (happy | surprise))) | (neutral | (sad | disgust)))";

impl TreeSpec {
    pub fn node(left: TreeSpec, right: TreeSpec) -> Self {
        TreeSpec::Node(Box::new(left), Box::new(right))
    }

    /// Leaf labels, left to right.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<String>) {
        match self {
            TreeSpec::Leaf(l) => out.push(l.clone()),
            TreeSpec::Node(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeSpec::Leaf(_) => 1,
            TreeSpec::Node(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    /// Drops leaves outside `keep`; a node left with one child is replaced
    /// by that child. Orientation of surviving nodes is unchanged.
    pub fn retain(&self, keep: &BTreeSet<&str>) -> Option<TreeSpec> {
        match self {
            TreeSpec::Leaf(l) => keep.contains(l.as_str()).then(|| self.clone()),
            TreeSpec::Node(a, b) => match (a.retain(keep), b.retain(keep)) {
                (Some(a), Some(b)) => Some(TreeSpec::node(a, b)),
                (one, None) | (None, one) => one,
            },
        }
    }
}

impl fmt::Display for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeSpec::Leaf(l) => f.write_str(l),
            TreeSpec::Node(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> TaxonomyError {
        TaxonomyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TaxonomyError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&alloc::format!("expected '{c}'")))
        }
    }

    fn tree(&mut self) -> Result<TreeSpec, TaxonomyError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with('(') {
            self.pos += 1;
            let left = self.tree()?;
            self.expect('|')?;
            let right = self.tree()?;
            self.expect(')')?;
            return Ok(TreeSpec::node(left, right));
        }
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a label or '('"));
        }
        self.pos += len;
        Ok(TreeSpec::Leaf(rest[..len].to_string()))
    }
}

impl FromStr for TreeSpec {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let tree = p.tree()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(tree)
    }
}
