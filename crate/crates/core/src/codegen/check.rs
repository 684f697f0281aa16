//! Orphan-identifier check over an emitted file set: every identifier used
//! in a generated file must be defined somewhere in the set, be a keyword or
//! primitive, or be listed on an `extern:` header line.
//!
//! This is a lexical approximation, not a Rust front end. Members reached
//! through `.` or `::`, macro names, attributes and lifetimes are skipped.

use std::collections::BTreeSet;

use super::emit::EmittedFileSet;
use super::names::RESERVED;

const PRIMITIVES: &[&str] = &[
    "i8", "i16", "i32", "i64", "i128", "isize", "u8", "u16", "u32", "u64", "u128", "usize", "f32",
    "f64", "bool", "char", "str",
];

const DEFINERS: &[&str] = &[
    "struct", "trait", "fn", "static", "const", "type", "mod", "enum", "let",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Orphan {
    pub file: String,
    pub line: usize,
    pub ident: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(&'static str),
    Other,
}

fn externs(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .filter_map(|l| {
            let l = l
                .trim()
                .trim_start_matches("//")
                .trim_start_matches("/*")
                .trim_end_matches("*/")
                .trim();
            l.strip_prefix("extern:")
        })
        .flat_map(|rest| {
            rest.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
        })
}

/// Tokens with their line numbers; comments and `#[...]` lines removed.
fn tokenize(text: &str) -> Vec<(usize, Tok)> {
    let mut out = Vec::new();
    let mut in_block = false;
    for (i, raw) in text.lines().enumerate() {
        let mut line = raw.to_string();
        if in_block {
            match line.find("*/") {
                Some(p) => {
                    line = line[p + 2..].to_string();
                    in_block = false;
                }
                None => continue,
            }
        }
        while let Some(p) = line.find("/*") {
            match line[p..].find("*/") {
                Some(q) => line.replace_range(p..p + q + 2, " "),
                None => {
                    line.truncate(p);
                    in_block = true;
                }
            }
        }
        if let Some(p) = line.find("//") {
            line.truncate(p);
        }
        if line.trim_start().starts_with("#[") {
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut j = 0;
        while j < chars.len() {
            let c = chars[j];
            if c.is_ascii_alphabetic() || c == '_' {
                let start = j;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push((i + 1, Tok::Ident(chars[start..j].iter().collect())));
                continue;
            }
            if c.is_ascii_digit() {
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '.')
                {
                    j += 1;
                }
                out.push((i + 1, Tok::Other));
                continue;
            }
            let tok = match c {
                ':' if chars.get(j + 1) == Some(&':') => {
                    j += 1;
                    Tok::Punct("::")
                }
                ':' => Tok::Punct(":"),
                '.' => Tok::Punct("."),
                '!' => Tok::Punct("!"),
                '\'' => Tok::Punct("'"),
                '(' => Tok::Punct("("),
                ')' => Tok::Punct(")"),
                c if c.is_whitespace() => {
                    j += 1;
                    continue;
                }
                _ => Tok::Other,
            };
            out.push((i + 1, tok));
            j += 1;
        }
    }
    out
}

fn definitions(toks: &[(usize, Tok)]) -> BTreeSet<String> {
    let mut defs = BTreeSet::new();
    let ident = |k: usize| match toks.get(k) {
        Some((_, Tok::Ident(s))) => Some(s.as_str()),
        _ => None,
    };
    let punct = |k: usize| match toks.get(k) {
        Some((_, Tok::Punct(p))) => Some(*p),
        _ => None,
    };
    for k in 0..toks.len() {
        let Some(word) = ident(k) else { continue };
        let lifetime = k > 0 && punct(k - 1) == Some("'");
        if DEFINERS.contains(&word) && !lifetime {
            if word == "let" && punct(k + 1) == Some("(") {
                let mut m = k + 2;
                while m < toks.len() && punct(m) != Some(")") {
                    if let Some(n) = ident(m) {
                        defs.insert(n.to_string());
                    }
                    m += 1;
                }
            } else if let Some(n) = ident(k + 1).filter(|n| *n != "mut") {
                defs.insert(n.to_string());
            } else if let Some(n) = ident(k + 2) {
                defs.insert(n.to_string());
            }
        } else if punct(k + 1) == Some(":") {
            defs.insert(word.to_string());
        } else if word.starts_with("CRE_") && punct(k + 1) == Some("(") {
            if let Some(n) = ident(k + 2) {
                defs.insert(n.to_string());
            }
        }
    }
    defs
}

/// All identifiers used but never defined, sorted by file and line.
pub fn orphan_identifiers(files: &EmittedFileSet) -> Vec<Orphan> {
    let mut known: BTreeSet<String> = RESERVED
        .iter()
        .chain(PRIMITIVES)
        .map(|s| s.to_string())
        .collect();
    let mut tokenized = Vec::new();
    for (path, file) in &files.files {
        let stem = path.rsplit('/').next().unwrap_or(path);
        known.insert(stem.split('.').next().unwrap_or(stem).to_string());
        known.extend(externs(&file.text));
        let toks = tokenize(&file.text);
        known.extend(definitions(&toks));
        tokenized.push((path, toks));
    }
    let mut out = Vec::new();
    for (path, toks) in tokenized {
        for (k, (line, tok)) in toks.iter().enumerate() {
            let Tok::Ident(name) = tok else { continue };
            let prev = k.checked_sub(1).map(|p| &toks[p].1);
            let member = matches!(
                prev,
                Some(Tok::Punct(".")) | Some(Tok::Punct("::")) | Some(Tok::Punct("'"))
            );
            let mac = matches!(toks.get(k + 1), Some((_, Tok::Punct("!"))));
            if member || mac || name.starts_with("CRE_") || known.contains(name) {
                continue;
            }
            out.push(Orphan {
                file: path.clone(),
                line: *line,
                ident: name.clone(),
            });
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::emit::FileKind;

    fn set(files: &[(&str, &str)]) -> EmittedFileSet {
        let mut s = EmittedFileSet::default();
        for (p, t) in files {
            s.insert(*p, FileKind::Scaffolding, t.to_string());
        }
        s
    }

    #[test]
    fn finds_undefined_type() {
        let s = set(&[("gen/a.rs", "pub struct A { pub b: &'static Missing, }\n")]);
        let o = orphan_identifiers(&s);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].ident, "Missing");
    }

    #[test]
    fn externs_comments_members_and_cross_file_defs() {
        let s = set(&[
            ("gen/a.rs", "// extern: Ext\n/* Ghost */\n#[inline]\nfn f(x: i32) { let (a, b) = g(); a.zap(); Ext::new(); todo!() }\n"),
            ("gen/b.rs", "pub fn g() {}\n"),
            ("gen/c.cfg", "CRE_SEM(SEM_X, { 1 });\nuse_it(SEM_X);\n"),
        ]);
        let o: Vec<_> = orphan_identifiers(&s)
            .into_iter()
            .map(|o| o.ident)
            .collect();
        assert_eq!(o, vec!["use_it"]);
    }
}
