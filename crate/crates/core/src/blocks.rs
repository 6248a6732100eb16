//! Plain-text numeric blocks: a section name on its own line followed by
//! whitespace-separated rows. `#` starts a comment; an optional leading
//! `schema N` line versions the file.

use std::fmt::Write;

/// Version written by [`write_blocks`] and accepted by [`parse_blocks`].
pub const BLOCK_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct BlockError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> BlockError {
    BlockError {
        line,
        message: message.into(),
    }
}

/// Named sections in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Blocks {
    pub sections: Vec<(String, Vec<Vec<f64>>)>,
}

impl Blocks {
    pub fn get(&self, name: &str) -> Option<&[Vec<f64>]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows.as_slice())
    }
}

/// Parse `text`, accepting only the listed section names. NaN is rejected;
/// `inf` and `-inf` are allowed.
pub fn parse_blocks(text: &str, allowed: &[&str]) -> Result<Blocks, BlockError> {
    let mut blocks = Blocks::default();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let first = tokens.next().expect("non-empty line");
        if first == "schema" {
            if seen_content {
                return Err(err(line, "`schema` must come first"));
            }
            let version: u32 = tokens
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(line, "expected `schema <version>`"))?;
            if version != BLOCK_SCHEMA {
                return Err(err(line, format!("unsupported schema {version}")));
            }
            seen_content = true;
            continue;
        }
        seen_content = true;
        if first.parse::<f64>().is_err() {
            if !allowed.contains(&first) {
                return Err(err(
                    line,
                    format!("unknown section `{first}`, expected one of {}", allowed.join(", ")),
                ));
            }
            if tokens.next().is_some() {
                return Err(err(line, "section header takes no values"));
            }
            if blocks.get(first).is_some() {
                return Err(err(line, format!("duplicate section `{first}`")));
            }
            blocks.sections.push((first.to_string(), Vec::new()));
            continue;
        }
        let Some((_, rows)) = blocks.sections.last_mut() else {
            return Err(err(line, "numbers before any section header"));
        };
        let row = body
            .split_whitespace()
            .map(|t| match t.parse::<f64>() {
                Ok(v) if !v.is_nan() => Ok(v),
                _ => Err(err(line, format!("not a number: `{t}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(blocks)
}

/// Render sections with a `schema` header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_blocks<'a>(sections: impl IntoIterator<Item = (&'a str, &'a [Vec<f64>])>) -> String {
    let mut out = format!("schema {BLOCK_SCHEMA}\n");
    for (name, rows) in sections {
        out.push_str(name);
        out.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(" ")).expect("writing to a String");
        }
    }
    out
}
