//! Small helpers for the line-oriented `keyword key=value …` formats.

use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) type Fields<'a> = Vec<(&'a str, &'a str)>;

/// Splits `keyword k1=v1 k2=v2` after checking the keyword.
pub(crate) fn fields<'a>(line: &'a str, keyword: &str) -> Result<Fields<'a>> {
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some(k) if k == keyword => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "expected `{keyword}` line, found `{}`",
                other.unwrap_or("")
            )))
        }
    }
    tokens
        .map(|t| {
            t.split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, found `{t}`")))
        })
        .collect()
}

pub(crate) fn get<'a>(fields: &Fields<'a>, key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidArgument(format!("missing field `{key}`")))
}

pub(crate) fn get_parsed<T: FromStr>(fields: &Fields<'_>, key: &str) -> Result<T> {
    let raw = get(fields, key)?;
    raw.parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value `{raw}` for `{key}`")))
}

pub(crate) fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad integer `{t}`")))
        })
        .collect()
}

pub(crate) fn join_u32(items: impl IntoIterator<Item = u32>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
