//! JSON and CSV documents written by the commands.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use vuza_core::{
    CMReport, CsaOptions, CutBatch, EquivalenceMode, Existence, GroupOrderClass, Limits, Rhythm, SearchStats, Status,
    TilingEnumeration,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes to stdout, or to `path` through a temporary file renamed into place.
pub fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOptionsDoc {
    pub aperiodicity: bool,
    pub cardinality: bool,
    pub replace_first_family: bool,
    pub cut_batch: CutBatch,
    pub max_solutions: Option<usize>,
    pub max_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub representative: Vec<usize>,
    pub orbit_size: usize,
    pub translation_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowsDoc {
    pub initial: usize,
    pub cuts_per_iteration: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDoc {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

impl From<&SearchStats> for SearchDoc {
    fn from(s: &SearchStats) -> Self {
        SearchDoc { decisions: s.decisions, propagations: s.propagations, conflicts: s.conflicts }
    }
}

/// Output of `enumerate`. `iteration_times` is the only wall-clock field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationDoc {
    pub schema_version: u32,
    pub n: usize,
    pub inner: Vec<usize>,
    pub n_b: usize,
    pub mode: EquivalenceMode,
    pub options: ModelOptionsDoc,
    pub status: Status,
    pub class_count: usize,
    pub translation_count: usize,
    pub classes: Vec<ClassDoc>,
    pub solutions: Vec<Vec<usize>>,
    pub rows: RowsDoc,
    pub search: SearchDoc,
    /// Seconds per solve, the last (infeasible or interrupted) one included.
    pub iteration_times: Vec<f64>,
}

impl EnumerationDoc {
    pub fn new(e: &TilingEnumeration, opts: &CsaOptions, limits: &Limits) -> Self {
        let n = e.inner.period();
        EnumerationDoc {
            schema_version: SCHEMA_VERSION,
            n,
            inner: e.inner.elements().to_vec(),
            n_b: n / e.inner.len(),
            mode: e.mode,
            options: ModelOptionsDoc {
                aperiodicity: opts.build.aperiodicity,
                cardinality: opts.build.include_cardinality,
                replace_first_family: opts.build.replace_first_family,
                cut_batch: opts.batch,
                max_solutions: limits.max_solutions,
                max_time_seconds: limits.max_time.map(|d| d.as_secs_f64()),
            },
            status: e.status,
            class_count: e.classes.len(),
            translation_count: e.translation_count(),
            classes: e
                .classes
                .iter()
                .map(|c| ClassDoc {
                    representative: c.representative.elements().to_vec(),
                    orbit_size: c.orbit_size,
                    translation_classes: c.translation_classes,
                })
                .collect(),
            solutions: e.solutions.iter().map(|b| b.elements().to_vec()).collect(),
            rows: RowsDoc { initial: e.initial_rows, cuts_per_iteration: e.cuts_per_iteration.clone() },
            search: SearchDoc::from(&e.stats),
            iteration_times: e.iteration_times.iter().map(|d| d.as_secs_f64()).collect(),
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: EnumerationDoc =
            serde_json::from_str(&text).with_context(|| format!("parsing enumeration state {}", path.display()))?;
        if doc.schema_version != SCHEMA_VERSION {
            anyhow::bail!("unsupported schema_version {} in {}", doc.schema_version, path.display());
        }
        Ok(doc)
    }

    pub fn inner_rhythm(&self) -> anyhow::Result<Rhythm> {
        Ok(Rhythm::new(self.n, self.inner.iter().map(|&x| x as i64))?)
    }

    pub fn solution_rhythms(&self) -> anyhow::Result<Vec<Rhythm>> {
        self.solutions.iter().map(|b| Ok(Rhythm::new(self.n, b.iter().map(|&x| x as i64))?)).collect()
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    /// `iteration,seconds`, iterations counted from 1.
    pub fn times_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iteration", "seconds"])?;
        for (i, t) in self.iteration_times.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{t:.9}")])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistsDoc {
    pub schema_version: u32,
    pub n: usize,
    pub inner: Vec<usize>,
    pub answer: String,
    pub witness: Option<Vec<usize>>,
    pub search: SearchDoc,
    pub elapsed_seconds: f64,
}

impl ExistsDoc {
    pub fn new(a: &Rhythm, answer: &Existence, stats: &SearchStats) -> Self {
        let (word, witness) = match answer {
            Existence::Yes(b) => ("yes", Some(b.elements().to_vec())),
            Existence::No => ("no", None),
            Existence::Unknown => ("unknown", None),
        };
        ExistsDoc {
            schema_version: SCHEMA_VERSION,
            n: a.period(),
            inner: a.elements().to_vec(),
            answer: word.to_string(),
            witness,
            search: SearchDoc::from(stats),
            elapsed_seconds: stats.elapsed.as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhythm: Option<Vec<usize>>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub report: Option<CMReport>,
    pub order_class: GroupOrderClass,
}

impl CheckDoc {
    pub fn order_only(order_class: GroupOrderClass) -> Self {
        CheckDoc { schema_version: SCHEMA_VERSION, n: None, rhythm: None, report: None, order_class }
    }

    pub fn rhythm(r: &Rhythm, report: CMReport, order_class: GroupOrderClass) -> Self {
        CheckDoc {
            schema_version: SCHEMA_VERSION,
            n: Some(r.period()),
            rhythm: Some(r.elements().to_vec()),
            report: Some(report),
            order_class,
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }
}
