use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, Post, Tokenizer};
use crate::error::{Error, Result};

/// Post file layout.
///
/// * `Text`: one post per line. Blank lines are skipped; the id of a post is
///   its 1-based line number.
/// * `JsonLines`: one object per line, `{"id": <string|number>, "text": <string>}`.
///   `id` is optional and defaults to the line number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Auto,
    Text,
    #[serde(rename = "jsonl")]
    JsonLines,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "text" | "txt" => Ok(InputFormat::Text),
            "jsonl" | "json" => Ok(InputFormat::JsonLines),
            other => Err(Error::InvalidConfig(format!("unknown input format {other:?}"))),
        }
    }
}

impl InputFormat {
    fn resolve(self, path: &Path) -> InputFormat {
        match self {
            InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some("jsonl") | Some("ndjson") => InputFormat::JsonLines,
                _ => InputFormat::Text,
            },
            other => other,
        }
    }
}

#[derive(Deserialize)]
struct JsonPost {
    #[serde(default)]
    id: Option<serde_json::Value>,
    text: String,
}

pub fn read_posts(path: &Path, format: InputFormat, tokenizer: &Tokenizer) -> Result<Corpus> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_posts(&content, format.resolve(path), tokenizer, path)
}

pub(crate) fn parse_posts(content: &str, format: InputFormat, tokenizer: &Tokenizer, path: &Path) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let post = match format {
            InputFormat::JsonLines => {
                let rec: JsonPost = serde_json::from_str(line).map_err(|e| Error::Parse {
                    path: path.to_owned(),
                    line: lineno,
                    reason: e.to_string(),
                })?;
                let id = match rec.id {
                    None | Some(serde_json::Value::Null) => lineno.to_string(),
                    Some(serde_json::Value::String(s)) => s,
                    Some(serde_json::Value::Number(n)) => n.to_string(),
                    Some(other) => {
                        return Err(Error::Parse {
                            path: path.to_owned(),
                            line: lineno,
                            reason: format!("id must be a string or number, got {other}"),
                        })
                    }
                };
                Post::with_tokenizer(id, rec.text, tokenizer)
            }
            _ => Post::with_tokenizer(lineno.to_string(), line, tokenizer),
        };
        corpus.push(post);
    }
    Ok(corpus)
}

/// One entry per non-blank line; lines starting with `#` are comments.
fn read_list(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

pub fn read_seeds(path: &Path) -> Result<Vec<String>> {
    read_list(path)
}

pub fn read_stoplist(path: &Path) -> Result<Vec<String>> {
    read_list(path)
}
