//! The text vector format: a `<count> <dim>` header, then one
//! `<term> <v1> ... <vdim>` line per term. Terms may contain spaces; the
//! last `dim` fields of a line are always the vector.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::TermRecord;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    entries: Vec<(String, Vec<f64>)>,
    index: BTreeMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, term: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let term = term.into();
        if vector.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                item: term,
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::invalid("embedding", format!("`{term}` has a non-finite value")));
        }
        match self.index.get(&term) {
            Some(&i) => self.entries[i].1 = vector,
            None => {
                self.index.insert(term.clone(), self.entries.len());
                self.entries.push((term, vector));
            }
        }
        Ok(())
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.index.get(term).map(|&i| self.entries[i].1.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(t, v)| (t.as_str(), v.as_slice()))
    }

    /// Sets `vector` on every record whose term has an entry and returns the
    /// terms left without one.
    pub fn attach(&self, records: &mut [TermRecord]) -> Vec<String> {
        let mut missing = Vec::new();
        for r in records {
            match self.get(&r.term) {
                Some(v) => r.vector = Some(v.to_vec()),
                None => missing.push(r.term.clone()),
            }
        }
        missing
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let fail = |line: usize, reason: String| CoreError::Format {
            path: source.to_string(),
            line,
            reason,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| fail(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [count, dim] = fields[..] else {
            return Err(fail(1, format!("header must be `<count> <dim>`, got `{header}`")));
        };
        let count: usize = count.parse().map_err(|_| fail(1, format!("bad count `{count}`")))?;
        let dim: usize = dim.parse().map_err(|_| fail(1, format!("bad dimension `{dim}`")))?;
        if dim == 0 {
            return Err(fail(1, "dimension must be at least 1".into()));
        }
        let mut table = Self::new(dim);
        for (i, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < dim + 1 {
                return Err(fail(i + 1, format!("expected a term and {dim} values")));
            }
            let split = fields.len() - dim;
            let term = fields[..split].join(" ");
            let vector = fields[split..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| fail(i + 1, format!("bad value `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            table.insert(term, vector).map_err(|e| fail(i + 1, e.to_string()))?;
        }
        if table.len() != count {
            return Err(fail(1, format!("header declares {count} terms, found {}", table.len())));
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (term, v) in &self.entries {
            out.push_str(term);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    EmbeddingTable::parse(&text, &path.display().to_string())
}

pub fn write_embeddings(path: &Path, table: &EmbeddingTable) -> Result<()> {
    std::fs::write(path, table.to_text()).map_err(|e| CoreError::io(path, e))
}
