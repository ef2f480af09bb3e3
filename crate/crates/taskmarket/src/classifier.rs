//! Two-stage occupational classification of job titles: a strict parser for
//! an external classifier's numeric-code responses, batched dispatch, and a
//! deterministic keyword fallback, plus an accuracy evaluator.
//!
//! The external stage is behind the [`ExternalClassifier`] trait; the only
//! shipped implementation replays a script of canned responses, keyed by
//! batch index so results do not depend on dispatch order.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::ClassifierError;
use crate::model::OccupationKind;

/// The five functional job categories and their numeric codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalCategory {
    Management,
    Professional,
    Technical,
    Auxiliary,
    Physical,
}

impl FunctionalCategory {
    pub const ALL: [FunctionalCategory; 5] = [
        FunctionalCategory::Management,
        FunctionalCategory::Professional,
        FunctionalCategory::Technical,
        FunctionalCategory::Auxiliary,
        FunctionalCategory::Physical,
    ];

    pub fn code(self) -> u8 {
        match self {
            FunctionalCategory::Management => 1,
            FunctionalCategory::Professional => 2,
            FunctionalCategory::Technical => 3,
            FunctionalCategory::Auxiliary => 4,
            FunctionalCategory::Physical => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionalCategory::Management => "management",
            FunctionalCategory::Professional => "professional",
            FunctionalCategory::Technical => "technical",
            FunctionalCategory::Auxiliary => "auxiliary",
            FunctionalCategory::Physical => "physical",
        }
    }

    /// The model occupation this category corresponds to.
    pub fn kind(self) -> OccupationKind {
        match self {
            FunctionalCategory::Management => OccupationKind::Mgmt,
            FunctionalCategory::Professional => OccupationKind::Prof,
            FunctionalCategory::Technical => OccupationKind::Tech,
            FunctionalCategory::Auxiliary => OccupationKind::Aux,
            FunctionalCategory::Physical => OccupationKind::Phys,
        }
    }

    pub fn from_kind(kind: OccupationKind) -> Self {
        match kind {
            OccupationKind::Mgmt => FunctionalCategory::Management,
            OccupationKind::Prof => FunctionalCategory::Professional,
            OccupationKind::Tech => FunctionalCategory::Technical,
            OccupationKind::Aux => FunctionalCategory::Auxiliary,
            OccupationKind::Phys => FunctionalCategory::Physical,
        }
    }
}

/// Lowercase keyword phrases per category, matched as substrings of the
/// normalized title.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub phrases: BTreeMap<FunctionalCategory, Vec<String>>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let entries: [(FunctionalCategory, &[&str]); 5] = [
            (
                FunctionalCategory::Management,
                &[
                    "manager",
                    "director",
                    "ceo",
                    "corporate manager",
                    "project manager",
                    "hr director",
                ],
            ),
            (
                FunctionalCategory::Professional,
                &[
                    "doctor",
                    "lawyer",
                    "accountant",
                    "engineer",
                    "lecturer",
                    "software engineer",
                    "university lecturer",
                ],
            ),
            (
                FunctionalCategory::Technical,
                &[
                    "programmer",
                    "technician",
                    "developer",
                    "web designer",
                    "lab technician",
                    "legal assistant",
                ],
            ),
            (
                FunctionalCategory::Auxiliary,
                &[
                    "assistant",
                    "clerk",
                    "secretary",
                    "receptionist",
                    "administrative assistant",
                    "data entry clerk",
                ],
            ),
            (
                FunctionalCategory::Physical,
                &[
                    "cleaner",
                    "laborer",
                    "driver",
                    "electrician",
                    "truck driver",
                    "warehouse worker",
                ],
            ),
        ];
        Self {
            phrases: entries
                .into_iter()
                .map(|(category, list)| {
                    (category, list.iter().map(|s| s.to_string()).collect())
                })
                .collect(),
        }
    }
}

impl Lexicon {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        for category in FunctionalCategory::ALL {
            match self.phrases.get(&category) {
                Some(list) if !list.is_empty() => {}
                _ => {
                    return Err(ClassifierError::EmptyLexiconCategory(
                        category.name().to_string(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Trim, collapse internal whitespace, and casefold. CJK text passes
/// through unchanged apart from whitespace handling; matching is plain
/// substring search with no word-boundary logic.
pub fn normalize_title(title: &str) -> String {
    title
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Parses a response that must consist of exactly `expected` whitespace
/// separated tokens, each a digit 1-5. Any deviation invalidates the whole
/// batch: a partially aligned response is worse than none, because silently
/// shifted labels would poison every title after the slip.
pub fn parse_external_response(raw: &str, expected: usize) -> Vec<Option<FunctionalCategory>> {
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    if tokens.len() != expected {
        return vec![None; expected];
    }
    let mut parsed = Vec::with_capacity(expected);
    for token in tokens {
        let category = match token.as_bytes() {
            [digit @ b'1'..=b'5'] => FunctionalCategory::from_code(digit - b'0'),
            _ => None,
        };
        match category {
            Some(category) => parsed.push(Some(category)),
            None => return vec![None; expected],
        }
    }
    parsed
}

/// Keyword fallback: the category whose phrases match the normalized title
/// most often wins; ties break to the longest single matched phrase, then
/// the lowest category code. No match at all is `None`.
pub fn classify_keyword(title: &str, lexicon: &Lexicon) -> Option<FunctionalCategory> {
    let normalized = normalize_title(title);
    let mut best: Option<(usize, usize, FunctionalCategory)> = None;
    for category in FunctionalCategory::ALL {
        let Some(phrases) = lexicon.phrases.get(&category) else {
            continue;
        };
        let matched: Vec<&String> = phrases
            .iter()
            .filter(|p| !p.is_empty() && normalized.contains(p.as_str()))
            .collect();
        if matched.is_empty() {
            continue;
        }
        let longest = matched.iter().map(|p| p.chars().count()).max().unwrap_or(0);
        let candidate = (matched.len(), longest, category);
        best = match best {
            None => Some(candidate),
            Some(current) => {
                // More matches wins, then the longer phrase; category order
                // already runs lowest-code-first, so ties keep the incumbent.
                if (candidate.0, candidate.1) > (current.0, current.1) {
                    Some(candidate)
                } else {
                    Some(current)
                }
            }
        };
    }
    best.map(|(_, _, category)| category)
}

/// How a title ended up classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    External,
    Keyword,
    Unresolved,
}

/// Classification outcome for one title. `category` is `None` exactly when
/// `method` is `Unresolved`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub title: String,
    pub category: Option<FunctionalCategory>,
    pub method: Method,
}

/// Batch size and dispatch concurrency for the external stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub max_concurrency: usize,
}

impl Default for BatchPlan {
    fn default() -> Self {
        Self {
            batch_size: 30,
            max_concurrency: 4,
        }
    }
}

/// Transport-level failure of the external stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportFailure(pub String);

/// An external batch classifier. `batch_index` identifies the batch within
/// one classification run so implementations can reply deterministically
/// under concurrent dispatch. Implementations must tolerate concurrent
/// invocation.
pub trait ExternalClassifier: Send + Sync {
    fn classify(&self, batch_index: usize, titles: &[String]) -> Result<String, TransportFailure>;
}

/// Replays scripted response lines: batch `k` receives line `k`. Batches
/// beyond the script fail with a transport error, which downgrades them to
/// the keyword fallback.
#[derive(Debug, Clone, Default)]
pub struct ScriptedClassifier {
    lines: Vec<String>,
}

impl ScriptedClassifier {
    pub fn new(lines: Vec<String>) -> Self {
        Self { lines }
    }

    /// One response line per batch, in order.
    pub fn from_script(script: &str) -> Self {
        Self::new(script.lines().map(|l| l.to_string()).collect())
    }

    /// A classifier with no script: every batch fails over to keywords.
    pub fn empty() -> Self {
        Self::default()
    }
}

impl ExternalClassifier for ScriptedClassifier {
    fn classify(&self, batch_index: usize, _titles: &[String]) -> Result<String, TransportFailure> {
        self.lines
            .get(batch_index)
            .cloned()
            .ok_or_else(|| TransportFailure(format!("no scripted response for batch {batch_index}")))
    }
}

fn classify_one_batch(
    batch: &[String],
    batch_index: usize,
    external: &dyn ExternalClassifier,
    lexicon: &Lexicon,
) -> Vec<ClassificationResult> {
    let parsed = match external.classify(batch_index, batch) {
        Ok(raw) => parse_external_response(&raw, batch.len()),
        Err(_) => vec![None; batch.len()],
    };
    batch
        .iter()
        .zip(parsed)
        .map(|(title, category)| match category {
            Some(category) => ClassificationResult {
                title: title.clone(),
                category: Some(category),
                method: Method::External,
            },
            None => match classify_keyword(title, lexicon) {
                Some(category) => ClassificationResult {
                    title: title.clone(),
                    category: Some(category),
                    method: Method::Keyword,
                },
                None => ClassificationResult {
                    title: title.clone(),
                    category: None,
                    method: Method::Unresolved,
                },
            },
        })
        .collect()
}

/// Classifies titles in consecutive batches of `plan.batch_size`. Valid
/// external responses label the whole batch; invalid or failed batches fall
/// back to the keyword stage title by title. Output order always equals
/// input order, whatever the dispatch concurrency.
pub fn classify_batch(
    titles: &[String],
    external: &dyn ExternalClassifier,
    lexicon: &Lexicon,
    plan: &BatchPlan,
) -> Vec<ClassificationResult> {
    let batch_size = plan.batch_size.max(1);
    let batches: Vec<&[String]> = titles.chunks(batch_size).collect();
    let workers = plan.max_concurrency.max(1).min(batches.len().max(1));

    if workers <= 1 || batches.len() <= 1 {
        return batches
            .iter()
            .enumerate()
            .flat_map(|(i, batch)| classify_one_batch(batch, i, external, lexicon))
            .collect();
    }

    let mut per_batch: Vec<Option<Vec<ClassificationResult>>> = vec![None; batches.len()];
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for _ in 0..workers {
            let next = &next;
            let batches = &batches;
            handles.push(scope.spawn(move || {
                let mut finished = Vec::new();
                loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= batches.len() {
                        break;
                    }
                    finished.push((index, classify_one_batch(batches[index], index, external, lexicon)));
                }
                finished
            }));
        }
        for handle in handles {
            for (index, results) in handle.join().expect("classifier worker panicked") {
                per_batch[index] = Some(results);
            }
        }
    });
    per_batch
        .into_iter()
        .flat_map(|slot| slot.expect("every batch is classified exactly once"))
        .collect()
}

/// Accuracy of one classification method on a labeled sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodAccuracy {
    pub sample_size: usize,
    pub correct: usize,
    /// `None` when the method saw no titles (reported as a dash).
    pub accuracy: Option<f64>,
}

impl MethodAccuracy {
    fn tally(pairs: impl Iterator<Item = bool>) -> Self {
        let mut sample_size = 0;
        let mut correct = 0;
        for hit in pairs {
            sample_size += 1;
            correct += hit as usize;
        }
        Self {
            sample_size,
            correct,
            accuracy: (sample_size > 0).then(|| correct as f64 / sample_size as f64),
        }
    }
}

/// Per-method and overall accuracy on a labeled sample; unresolved titles
/// are counted separately and score as incorrect overall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub external: MethodAccuracy,
    pub keyword: MethodAccuracy,
    pub overall: MethodAccuracy,
    pub unresolved: usize,
}

/// Scores results against a labeled sample, which must align with the
/// results one to one.
pub fn evaluate_accuracy(
    labeled: &[(String, FunctionalCategory)],
    results: &[ClassificationResult],
) -> Result<AccuracyReport, ClassifierError> {
    if labeled.len() != results.len() {
        return Err(ClassifierError::LengthMismatch {
            labeled: labeled.len(),
            results: results.len(),
        });
    }
    for (index, ((title, _), result)) in labeled.iter().zip(results).enumerate() {
        if title != &result.title {
            return Err(ClassifierError::TitleMismatch {
                index,
                labeled: title.clone(),
                result: result.title.clone(),
            });
        }
    }

    let hits = |method: Method| {
        labeled
            .iter()
            .zip(results)
            .filter(move |(_, r)| r.method == method)
            .map(|((_, truth), r)| r.category == Some(*truth))
    };
    Ok(AccuracyReport {
        external: MethodAccuracy::tally(hits(Method::External)),
        keyword: MethodAccuracy::tally(hits(Method::Keyword)),
        overall: MethodAccuracy::tally(
            labeled
                .iter()
                .zip(results)
                .map(|((_, truth), r)| r.category == Some(*truth)),
        ),
        unresolved: results
            .iter()
            .filter(|r| r.method == Method::Unresolved)
            .count(),
    })
}
