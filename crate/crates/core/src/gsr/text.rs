//! Plain-text profile files:
//!
//! ```text
//! # comment
//! alternatives: a,b,c
//! a>b>c
//! b>c>a
//! ```

use super::{Alternatives, GsrError, Profile};

pub fn parse_profile(text: &str) -> Result<Profile, GsrError> {
    let mut alts: Option<Alternatives> = None;
    let mut votes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alternatives:") {
            if alts.is_some() {
                return Err(GsrError::Parse {
                    line: line_no,
                    msg: "duplicate alternatives header".into(),
                });
            }
            let labels: Vec<&str> = rest.split(',').map(str::trim).collect();
            alts = Some(Alternatives::from_labels(&labels).map_err(|e| GsrError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?);
            continue;
        }
        let a = alts.as_ref().ok_or_else(|| GsrError::Parse {
            line: line_no,
            msg: "vote before `alternatives:` header".into(),
        })?;
        let order = a.parse_order(line).map_err(|e| GsrError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        votes.push(order);
    }
    let alts = alts.ok_or(GsrError::Parse {
        line: 0,
        msg: "missing `alternatives:` header".into(),
    })?;
    Profile::new(alts, votes)
}

pub fn write_profile(profile: &Profile) -> String {
    let alts = profile.alternatives();
    let mut out = format!("alternatives: {}\n", alts.labels().join(","));
    for v in profile.votes() {
        out.push_str(&alts.format_order(v));
        out.push('\n');
    }
    out
}
