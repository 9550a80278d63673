//! Entity-linking datasets: the canonical TSV format, statistics, and
//! document-level train/test splitting.
//!
//! A dataset is a list of mention instances. Each instance carries the
//! document it came from, the mention surface, up to
//! [`MAX_CONTEXT_TOKENS`] context tokens on each side, a nonempty
//! candidate set with prior probabilities, and an optional gold entity.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NelError, Result};

/// Maximum number of context tokens retained on each side of a mention.
pub const MAX_CONTEXT_TOKENS: usize = 100;

/// Field value marking an unannotated gold column in the TSV format.
const GOLD_ABSENT: &str = "-";

/// One entity candidate for a mention, with its prior probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entity_id: String,
    pub prior: f64,
    pub display_name: Option<String>,
}

impl Candidate {
    pub fn new(entity_id: impl Into<String>, prior: f64) -> Result<Self> {
        let cand = Candidate {
            entity_id: entity_id.into(),
            prior,
            display_name: None,
        };
        cand.validate()?;
        Ok(cand)
    }

    pub fn validate(&self) -> Result<()> {
        validate_entity_id(&self.entity_id)?;
        if !self.prior.is_finite() || !(0.0..=1.0).contains(&self.prior) {
            return Err(NelError::InvalidData(format!(
                "prior {} for candidate '{}' is outside [0,1]",
                self.prior, self.entity_id
            )));
        }
        Ok(())
    }
}

/// Checks the character restrictions shared by candidate and gold entity ids.
pub fn validate_entity_id(entity_id: &str) -> Result<()> {
    if entity_id.is_empty() {
        return Err(NelError::InvalidData("empty entity id".into()));
    }
    if entity_id == GOLD_ABSENT {
        return Err(NelError::InvalidData(format!(
            "entity id '{GOLD_ABSENT}' is reserved for unannotated gold columns"
        )));
    }
    if entity_id.contains(['\t', ',', '|', '\n', '\r']) {
        return Err(NelError::InvalidData(format!(
            "entity id '{entity_id}' contains a forbidden character (tab, comma, pipe or newline)"
        )));
    }
    Ok(())
}

/// One linking example: a mention in a document, its context windows,
/// its candidate set, and the annotated entity when known.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionInstance {
    pub doc_id: String,
    pub mention: String,
    pub left_context: Vec<String>,
    pub right_context: Vec<String>,
    pub candidates: Vec<Candidate>,
    pub gold: Option<String>,
}

impl MentionInstance {
    pub fn validate(&self) -> Result<()> {
        if self.doc_id.is_empty() {
            return Err(NelError::InvalidData("empty doc_id".into()));
        }
        if self.left_context.len() > MAX_CONTEXT_TOKENS
            || self.right_context.len() > MAX_CONTEXT_TOKENS
        {
            return Err(NelError::InvalidData(format!(
                "context window exceeds {MAX_CONTEXT_TOKENS} tokens ({} left / {} right)",
                self.left_context.len(),
                self.right_context.len()
            )));
        }
        if self.candidates.is_empty() {
            return Err(NelError::InvalidData(format!(
                "mention '{}' in {} has no candidates",
                self.mention, self.doc_id
            )));
        }
        let mut seen = HashSet::new();
        for cand in &self.candidates {
            cand.validate()?;
            if !seen.insert(cand.entity_id.as_str()) {
                return Err(NelError::InvalidData(format!(
                    "duplicate candidate '{}' for mention '{}'",
                    cand.entity_id, self.mention
                )));
            }
        }
        if let Some(gold) = &self.gold {
            validate_entity_id(gold)?;
        }
        Ok(())
    }

    /// True when the candidate set contains the gold entity.
    pub fn gold_in_candidates(&self) -> bool {
        match &self.gold {
            Some(gold) => self.candidates.iter().any(|c| &c.entity_id == gold),
            None => false,
        }
    }

    /// Left and right context concatenated, in reading order.
    pub fn context_tokens(&self) -> Vec<String> {
        let mut tokens = self.left_context.clone();
        tokens.extend(self.right_context.iter().cloned());
        tokens
    }
}

/// A named collection of mention instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<MentionInstance>,
}

impl Dataset {
    pub fn new(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            instances: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Distinct doc_ids in first-appearance order.
    pub fn doc_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut ids = Vec::new();
        for inst in &self.instances {
            if seen.insert(inst.doc_id.as_str()) {
                ids.push(inst.doc_id.as_str());
            }
        }
        ids
    }

    pub fn document_count(&self) -> usize {
        self.instances
            .iter()
            .map(|i| i.doc_id.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Distinct candidate entity ids in first-appearance order.
    pub fn candidate_entities(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut ids = Vec::new();
        for inst in &self.instances {
            for cand in &inst.candidates {
                if seen.insert(cand.entity_id.as_str()) {
                    ids.push(cand.entity_id.as_str());
                }
            }
        }
        ids
    }
}

/// Mention/document counts plus gold recall, as in the dataset table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub mentions: usize,
    pub documents: usize,
    pub gold_recall: f64,
}

/// Pairwise entity-overlap percentages between datasets. `None` cells are
/// unmeasured (rendered as `-`).
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

/// Parses a dataset file in the canonical TSV format.
///
/// Leading lines starting with `#` are comments. Every other line must have
/// exactly six tab-separated fields:
/// `doc_id, mention, left_context, right_context, candidates, gold`.
pub fn parse_dataset(path: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| NelError::io(path, e))?;
    parse_dataset_str(&content, path, name)
}

fn parse_dataset_str(content: &str, path: &Path, name: &str) -> Result<Dataset> {
    let mut ds = Dataset::new(name);
    let mut in_header = true;
    for (idx, raw_line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if in_header {
                continue;
            }
            return Err(NelError::parse(
                path,
                line_no,
                "comment lines are only allowed before the first data line",
            ));
        }
        in_header = false;
        let inst = parse_instance_line(line).map_err(|e| match e {
            NelError::InvalidData(msg) => NelError::parse(path, line_no, msg),
            other => other,
        })?;
        ds.instances.push(inst);
    }
    Ok(ds)
}

fn parse_instance_line(line: &str) -> Result<MentionInstance> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 6 {
        return Err(NelError::InvalidData(format!(
            "expected 6 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let candidates = parse_candidates(fields[4])?;
    let gold = match fields[5] {
        GOLD_ABSENT => None,
        id => {
            validate_entity_id(id)?;
            Some(id.to_string())
        }
    };
    let inst = MentionInstance {
        doc_id: fields[0].to_string(),
        mention: fields[1].to_string(),
        left_context: tokenize(fields[2]),
        right_context: tokenize(fields[3]),
        candidates,
        gold,
    };
    inst.validate()?;
    Ok(inst)
}

fn parse_candidates(field: &str) -> Result<Vec<Candidate>> {
    if field.is_empty() {
        return Err(NelError::InvalidData("empty candidate list".into()));
    }
    field
        .split('|')
        .map(|entry| {
            let (id, prior_str) = entry.split_once(',').ok_or_else(|| {
                NelError::InvalidData(format!("candidate entry '{entry}' is not 'entity_id,prior'"))
            })?;
            let prior: f64 = prior_str.parse().map_err(|_| {
                NelError::InvalidData(format!("bad prior '{prior_str}' for candidate '{id}'"))
            })?;
            Candidate::new(id, prior)
        })
        .collect()
}

/// Whitespace tokenization, with tabs and newlines already mapped to spaces
/// by the writer. Collapses runs of whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Writes a dataset in the canonical TSV format: one header comment line,
/// one data line per instance, LF endings.
pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let rendered = render_dataset(ds)?;
    fs::write(path, rendered).map_err(|e| NelError::io(path, e))
}

/// Renders the canonical TSV bytes without touching the filesystem.
pub fn render_dataset(ds: &Dataset) -> Result<String> {
    let mut out = String::new();
    out.push_str("# doc_id\tmention\tleft_context\tright_context\tcandidates\tgold\n");
    for inst in &ds.instances {
        inst.validate()?;
        let candidates = inst
            .candidates
            .iter()
            .map(|c| format!("{},{}", c.entity_id, c.prior))
            .collect::<Vec<_>>()
            .join("|");
        let gold = inst.gold.as_deref().unwrap_or(GOLD_ABSENT);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            normalize_field(&inst.doc_id),
            normalize_field(&inst.mention),
            normalize_field(&inst.left_context.join(" ")),
            normalize_field(&inst.right_context.join(" ")),
            candidates,
            gold,
        ));
    }
    Ok(out)
}

/// Replaces each tab, newline or carriage return with a single space.
fn normalize_field(text: &str) -> String {
    if text.contains(['\t', '\n', '\r']) {
        text.replace(['\t', '\n', '\r'], " ")
    } else {
        text.to_string()
    }
}

/// Fraction of instances whose candidate set contains the gold entity.
pub fn gold_recall(ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(NelError::InvalidData(format!(
            "gold recall is undefined on empty dataset '{}'",
            ds.name
        )));
    }
    let mut hits = 0usize;
    for (idx, inst) in ds.instances.iter().enumerate() {
        if inst.gold.is_none() {
            return Err(NelError::InvalidData(format!(
                "instance {} ('{}' in {}) has no gold annotation",
                idx, inst.mention, inst.doc_id
            )));
        }
        if inst.gold_in_candidates() {
            hits += 1;
        }
    }
    Ok(hits as f64 / ds.len() as f64)
}

/// Percentage of `a`'s distinct gold entities that also occur as gold
/// entities of `b`.
pub fn entity_overlap(a: &Dataset, b: &Dataset) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(NelError::InvalidData(format!(
            "entity overlap needs nonempty datasets ('{}' and '{}')",
            a.name, b.name
        )));
    }
    let golds_a: HashSet<&str> = a
        .instances
        .iter()
        .filter_map(|i| i.gold.as_deref())
        .collect();
    if golds_a.is_empty() {
        return Err(NelError::InvalidData(format!(
            "dataset '{}' has no gold entities",
            a.name
        )));
    }
    let golds_b: HashSet<&str> = b
        .instances
        .iter()
        .filter_map(|i| i.gold.as_deref())
        .collect();
    let shared = golds_a.intersection(&golds_b).count();
    Ok(100.0 * shared as f64 / golds_a.len() as f64)
}

/// Mention count, document count and gold recall in one pass.
pub fn dataset_stats(ds: &Dataset) -> Result<DatasetStats> {
    Ok(DatasetStats {
        mentions: ds.len(),
        documents: ds.document_count(),
        gold_recall: gold_recall(ds)?,
    })
}

/// Splits a dataset into train and test halves by document, so no document
/// contributes context to both. Deterministic for a fixed seed.
pub fn split_train_test(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(NelError::InvalidData(format!(
            "test fraction {test_fraction} is outside (0,1)"
        )));
    }
    let mut docs: Vec<&str> = ds.doc_ids();
    if docs.len() < 2 {
        return Err(NelError::InvalidData(format!(
            "dataset '{}' has {} document(s); need at least 2 to split",
            ds.name,
            docs.len()
        )));
    }
    let test_count = (docs.len() as f64 * test_fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    docs.shuffle(&mut rng);
    let test_docs: HashSet<&str> = docs[..test_count].iter().copied().collect();

    let mut train = Dataset::new(format!("{}-train", ds.name));
    let mut test = Dataset::new(format!("{}-test", ds.name));
    for inst in &ds.instances {
        if test_docs.contains(inst.doc_id.as_str()) {
            test.instances.push(inst.clone());
        } else {
            train.instances.push(inst.clone());
        }
    }
    Ok((train, test))
}

/// Builds the full overlap matrix over a list of datasets. Rows measure the
/// row dataset's gold entities against each column dataset.
pub fn overlap_matrix(datasets: &[Dataset]) -> Result<OverlapMatrix> {
    let names: Vec<String> = datasets.iter().map(|d| d.name.clone()).collect();
    let mut cells = Vec::with_capacity(datasets.len());
    for a in datasets {
        let mut row = Vec::with_capacity(datasets.len());
        for b in datasets {
            row.push(Some(entity_overlap(a, b)?));
        }
        cells.push(row);
    }
    Ok(OverlapMatrix {
        row_names: names.clone(),
        col_names: names,
        cells,
    })
}

/// Used by the tests below and by generators: builds an instance without
/// going through a file.
pub fn instance(
    doc_id: &str,
    mention: &str,
    left: &[&str],
    right: &[&str],
    candidates: &[(&str, f64)],
    gold: Option<&str>,
) -> MentionInstance {
    MentionInstance {
        doc_id: doc_id.to_string(),
        mention: mention.to_string(),
        left_context: left.iter().map(|s| s.to_string()).collect(),
        right_context: right.iter().map(|s| s.to_string()).collect(),
        candidates: candidates
            .iter()
            .map(|(id, p)| Candidate {
                entity_id: id.to_string(),
                prior: *p,
                display_name: None,
            })
            .collect(),
        gold: gold.map(str::to_string),
    }
}
