//! Line counts per category, for comparing the two passes.

use std::collections::BTreeSet;
use std::fmt;

use super::emit::{EmittedFileSet, FileKind};

/// Non-blank lines; comments count.
pub fn count_lines(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PassCounts {
    pub cdl: usize,
    /// Scaffolding plus RTOS configuration.
    pub auto_generated: usize,
    pub user_written: usize,
}

impl PassCounts {
    pub fn of(cdl: &str, files: &EmittedFileSet) -> Self {
        let sum = |kinds: &[FileKind]| {
            files
                .files
                .values()
                .filter(|f| kinds.contains(&f.kind))
                .map(|f| count_lines(&f.text))
                .sum()
        };
        PassCounts {
            cdl: count_lines(cdl),
            auto_generated: sum(&[FileKind::Scaffolding, FileKind::RtosConfig]),
            user_written: sum(&[FileKind::UserStub]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineReport {
    pub pass1: PassCounts,
    pub pass2: Option<PassCounts>,
    /// Lines added plus lines removed across user files between the passes.
    pub user_lines_changed: Option<usize>,
}

/// `pass2` is `None` when only the first pass ran.
pub fn line_report(
    cdl: &str,
    pass1: &EmittedFileSet,
    pass2: Option<&EmittedFileSet>,
) -> LineReport {
    LineReport {
        pass1: PassCounts::of(cdl, pass1),
        pass2: pass2.map(|p| PassCounts::of(cdl, p)),
        user_lines_changed: pass2.map(|p| user_diff(pass1, p)),
    }
}

fn user_diff(a: &EmittedFileSet, b: &EmittedFileSet) -> usize {
    let paths: BTreeSet<&str> = a
        .of_kind(FileKind::UserStub)
        .chain(b.of_kind(FileKind::UserStub))
        .map(|(p, _)| p)
        .collect();
    paths
        .into_iter()
        .map(|p| {
            let lines = |s: &EmittedFileSet| -> Vec<String> {
                s.get(p)
                    .map(|t| {
                        t.lines()
                            .filter(|l| !l.trim().is_empty())
                            .map(str::to_string)
                            .collect()
                    })
                    .unwrap_or_default()
            };
            let (x, y) = (lines(a), lines(b));
            x.len() + y.len() - 2 * lcs(&x, &y)
        })
        .sum()
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

impl fmt::Display for LineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |n| n.to_string());
        writeln!(f, "category\tpass1\tpass2")?;
        let p2 = self.pass2;
        writeln!(f, "cdl\t{}\t{}", self.pass1.cdl, col(p2.map(|p| p.cdl)))?;
        writeln!(
            f,
            "auto_generated\t{}\t{}",
            self.pass1.auto_generated,
            col(p2.map(|p| p.auto_generated))
        )?;
        writeln!(
            f,
            "user_written\t{}\t{}",
            self.pass1.user_written,
            col(p2.map(|p| p.user_written))
        )?;
        writeln!(f, "user_lines_changed\t0\t{}", col(self.user_lines_changed))
    }
}
