//! Text format for update streams.
//!
//! ```text
//! # comment
//! N 4
//! + 0 1
//! - 0 1
//! +V 2
//! -V 3
//! ```
//!
//! The first non-comment line declares the vertex count; ids are 0-based.

use std::fmt::Write as _;

use crate::engine::Update;
use crate::error::StreamError;
use crate::graph::VertexId;
use crate::workload::Stream;

pub fn parse_stream(text: &str) -> Result<Stream, StreamError> {
    let mut n: Option<usize> = None;
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| StreamError::Malformed {
            line: line_no,
            message,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = n else {
            match toks.as_slice() {
                ["N", count] => {
                    n = Some(
                        count
                            .parse()
                            .map_err(|_| bad(format!("bad vertex count `{count}`")))?,
                    );
                    continue;
                }
                _ => return Err(bad("expected `N <n>` header".into())),
            }
        };
        let id = |s: &str| -> Result<VertexId, StreamError> {
            let v: u32 = s
                .parse()
                .map_err(|_| bad(format!("bad vertex id `{s}`")))?;
            if v as usize >= n {
                return Err(bad(format!("vertex {v} out of range for n = {n}")));
            }
            Ok(VertexId(v))
        };
        let ev = match toks.as_slice() {
            ["+", a, b] => Update::InsertEdge(id(a)?, id(b)?),
            ["-", a, b] => Update::DeleteEdge(id(a)?, id(b)?),
            ["+V", a] => Update::InsertVertex(id(a)?),
            ["-V", a] => Update::DeleteVertex(id(a)?),
            _ => return Err(bad(format!("unrecognized event `{line}`"))),
        };
        if let Update::InsertEdge(a, b) | Update::DeleteEdge(a, b) = ev {
            if a == b {
                return Err(bad(format!("self-loop on {a}")));
            }
        }
        events.push(ev);
    }
    match n {
        Some(n) => Ok(Stream { n, events }),
        None => Err(StreamError::MissingHeader),
    }
}

pub fn render_stream(s: &Stream) -> String {
    let mut out = String::with_capacity(8 + s.events.len() * 10);
    let _ = writeln!(out, "N {}", s.n);
    for e in &s.events {
        let _ = writeln!(out, "{e}");
    }
    out
}
