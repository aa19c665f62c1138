//! Potential files: `key: value` lines (`n`, `avoid`, `theta`), `#` comments.
//! A file with no keys is a single expression.

use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::expr::{parse, Expr};

pub const BUILTIN: [(&str, &str); 5] = [
    ("sparling-tod", include_str!("../../data/sparling-tod.txt")),
    ("sparling-tod-n2", include_str!("../../data/sparling-tod-n2.txt")),
    ("joyce-sinh", include_str!("../../data/joyce-sinh.txt")),
    ("flat", include_str!("../../data/flat.txt")),
    ("cubic-sd", include_str!("../../data/cubic-sd.txt")),
];

#[derive(Clone, Debug, Serialize)]
pub struct Potential {
    pub source: String,
    pub n: Option<usize>,
    pub theta: String,
    #[serde(skip)]
    pub expr: Expr,
    /// Singular loci `(expr, margin)` kept away from when sampling.
    pub avoid: Vec<(String, f64)>,
}

impl Potential {
    pub fn avoid_exprs(&self) -> Result<Vec<(Expr, f64)>, CliError> {
        self.avoid.iter().map(|(e, m)| Ok((parse_expr(e)?, *m))).collect()
    }
}

fn parse_expr(s: &str) -> Result<Expr, CliError> {
    parse(s).map_err(|e| CliError::Usage(format!("cannot parse `{s}`: {e}")))
}

pub fn builtin(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".txt").unwrap_or(name).replace('_', "-");
    BUILTIN.iter().find(|(n, _)| *n == stem).map(|(_, text)| *text)
}

pub fn parse_potential(source: &str, text: &str) -> Result<Potential, CliError> {
    let lines: Vec<&str> =
        text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let keyed = |l: &&str| {
        l.split_once(':').is_some_and(|(k, _)| matches!(k.trim(), "n" | "avoid" | "theta"))
    };
    if !lines.iter().any(keyed) {
        let theta = lines.join(" ");
        let expr = parse_expr(&theta)?;
        return Ok(Potential { source: source.into(), n: None, theta, expr, avoid: Vec::new() });
    }
    let mut n = None;
    let mut theta = None;
    let mut avoid = Vec::new();
    for l in lines {
        let Some((k, v)) = l.split_once(':') else {
            return Err(CliError::Usage(format!("{source}: expected `key: value`, got `{l}`")));
        };
        let v = v.trim();
        match k.trim() {
            "n" => {
                n = Some(v.parse().map_err(|_| CliError::Usage(format!("{source}: bad n `{v}`")))?)
            }
            "theta" => theta = Some(v.to_string()),
            "avoid" => {
                let (e, m) = v
                    .rsplit_once(',')
                    .ok_or_else(|| CliError::Usage(format!("{source}: avoid needs `expr, margin`")))?;
                let m: f64 =
                    m.trim().parse().map_err(|_| CliError::Usage(format!("{source}: bad margin `{m}`")))?;
                parse_expr(e.trim())?;
                avoid.push((e.trim().to_string(), m));
            }
            other => return Err(CliError::Usage(format!("{source}: unknown key `{other}`"))),
        }
    }
    let theta = theta.ok_or_else(|| CliError::Usage(format!("{source}: missing theta")))?;
    let expr = parse_expr(&theta)?;
    Ok(Potential { source: source.into(), n, theta, expr, avoid })
}

/// An existing file, then a built-in name, then an inline expression.
pub fn load(arg: &str) -> Result<Potential, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let name = path.file_name().map_or(arg.to_string(), |s| s.to_string_lossy().into_owned());
        return parse_potential(&name, &text);
    }
    if let Some(text) = builtin(arg) {
        return parse_potential(arg, text);
    }
    parse_potential("inline", arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for (name, text) in BUILTIN {
            let p = parse_potential(name, text).unwrap();
            assert!(p.n.is_some(), "{name}");
        }
    }

    #[test]
    fn lookup_accepts_file_style_names() {
        assert!(builtin("sparling_tod.txt").is_some());
        assert!(builtin("joyce-sinh").is_some());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn inline_expression() {
        let p = load("y1^4").unwrap();
        assert_eq!(p.n, None);
        assert!(p.avoid.is_empty());
        assert!(matches!(load("y1^^4"), Err(CliError::Usage(_))));
    }

    #[test]
    fn keyed_file() {
        let p = parse_potential("f", "# c\nn: 2\navoid: x1, 0.25\ntheta: x1*y1\n").unwrap();
        assert_eq!(p.n, Some(2));
        assert_eq!(p.avoid, vec![("x1".to_string(), 0.25)]);
        assert!(parse_potential("f", "n: 1\n").is_err());
        assert!(parse_potential("f", "n: 1\nfoo: 2\ntheta: 0").is_err());
    }
}
