//! `taskmarket classify`: job-title classification through the scripted
//! external stage with keyword fallback.

use std::path::Path;

use taskmarket::classifier::{
    classify_batch, BatchPlan, Lexicon, Method, ScriptedClassifier,
};

use crate::output::write_atomic;
use crate::CliError;

/// Environment variables reserved for a live external classifier. They are
/// read so deployments can set them ahead of time, but the scripted
/// implementation ignores them and they are never printed.
struct EndpointEnv {
    _endpoint: Option<String>,
    _credential: Option<String>,
}

impl EndpointEnv {
    fn from_env() -> Self {
        Self {
            _endpoint: std::env::var("TASKMARKET_CLASSIFIER_ENDPOINT").ok(),
            _credential: std::env::var("TASKMARKET_CLASSIFIER_TOKEN").ok(),
        }
    }
}

fn read_titles(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read input {}: {e}", path.display())))?;
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| CliError::usage(format!("bad csv header: {e}")))?;
        let title_idx = headers
            .iter()
            .position(|h| h == "title")
            .ok_or_else(|| CliError::usage("csv input has no `title` column"))?;
        let mut titles = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::usage(format!("bad csv row: {e}")))?;
            titles.push(record.get(title_idx).unwrap_or("").to_string());
        }
        Ok(titles)
    } else {
        Ok(text
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect())
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, CliError> {
    match path {
        None => Ok(Lexicon::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read lexicon {}: {e}", path.display()))
            })?;
            let lexicon: Lexicon = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("lexicon {}: {e}", path.display())))?;
            lexicon
                .validate()
                .map_err(|e| CliError::usage(format!("lexicon {}: {e}", path.display())))?;
            Ok(lexicon)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    stub: Option<&Path>,
    lexicon_path: Option<&Path>,
    out: Option<&Path>,
    batch_size: Option<usize>,
    concurrency: Option<usize>,
    config_path: Option<&Path>,
) -> Result<(), CliError> {
    let _reserved = EndpointEnv::from_env();

    let section = match config_path {
        Some(path) => crate::config::load_config(path)?.classifier,
        None => None,
    };
    let plan = BatchPlan {
        batch_size: batch_size
            .or(section.as_ref().map(|s| s.batch_size))
            .unwrap_or(30)
            .max(1),
        max_concurrency: concurrency
            .or(section.as_ref().map(|s| s.max_concurrency))
            .unwrap_or(4)
            .max(1),
    };
    let stub_path = stub
        .map(|p| p.to_path_buf())
        .or_else(|| section.as_ref().and_then(|s| s.stub_path.clone()));
    let lexicon_file = lexicon_path
        .map(|p| p.to_path_buf())
        .or_else(|| section.as_ref().and_then(|s| s.lexicon_path.clone()));

    let titles = read_titles(input)?;
    let lexicon = load_lexicon(lexicon_file.as_deref())?;
    // A missing or unreadable stub degrades every batch to the fallback.
    let external = match stub_path.as_deref().map(std::fs::read_to_string) {
        Some(Ok(script)) => ScriptedClassifier::from_script(&script),
        _ => ScriptedClassifier::empty(),
    };

    let results = classify_batch(&titles, &external, &lexicon, &plan);

    let mut lines = vec!["title,category_code,category_name,method".to_string()];
    let mut counts = (0usize, 0usize, 0usize);
    for result in &results {
        let (code, name) = match result.category {
            Some(category) => (category.code().to_string(), category.name().to_string()),
            None => (String::new(), String::new()),
        };
        let method = match result.method {
            Method::External => {
                counts.0 += 1;
                "external"
            }
            Method::Keyword => {
                counts.1 += 1;
                "keyword"
            }
            Method::Unresolved => {
                counts.2 += 1;
                "unresolved"
            }
        };
        let title = if result.title.contains(',') || result.title.contains('"') {
            format!("\"{}\"", result.title.replace('"', "\"\""))
        } else {
            result.title.clone()
        };
        lines.push(format!("{title},{code},{name},{method}"));
    }
    let body = lines.join("\n") + "\n";

    match out {
        Some(path) => write_atomic(path, body.as_bytes())?,
        None => print!("{body}"),
    }
    eprintln!(
        "classified {} titles: {} external, {} keyword, {} unresolved",
        results.len(),
        counts.0,
        counts.1,
        counts.2
    );
    Ok(())
}
