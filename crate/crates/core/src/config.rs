//! Plain `key=value` configuration files.

use crate::error::{LabError, Result};

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(LabError::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(LabError::Parse {
                line: idx + 1,
                msg: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let kv = parse_kv("# c\nm = 5\n\nseed=3 # trailing\n").unwrap();
        assert_eq!(
            kv,
            vec![("m".into(), "5".into()), ("seed".into(), "3".into())]
        );
        assert!(parse_kv("oops\n").is_err());
        assert!(parse_kv("=3\n").is_err());
    }
}
