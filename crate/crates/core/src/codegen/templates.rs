//! Template set: the four output templates plus the name table mapping CDL
//! types and lock representations to emitted type names.
//!
//! The built-in set is compiled into the binary. A directory given to
//! [`TemplateSet::load`] (the CLI reads `TECSOE_TEMPLATES`) overrides any
//! file it contains, by file name.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use tinytemplate::TinyTemplate;

use crate::cdl::ScalarType;

pub const CELLTYPE: &str = "celltype.rs.tpl";
pub const SYSTEM: &str = "system.rs.tpl";
pub const CONFIG: &str = "system.cfg.tpl";
pub const USER_STUB: &str = "user_stub.rs.tpl";
pub const NAMES: &str = "names.txt";

const BUILTIN: [(&str, &str); 5] = [
    (CELLTYPE, include_str!("../../templates/celltype.rs.tpl")),
    (SYSTEM, include_str!("../../templates/system.rs.tpl")),
    (CONFIG, include_str!("../../templates/system.cfg.tpl")),
    (USER_STUB, include_str!("../../templates/user_stub.rs.tpl")),
    (NAMES, include_str!("../../templates/names.txt")),
];

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {template}: {message}")]
    Render { template: String, message: String },
    #[error("reading template {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed name table entry")]
    BadNameEntry { file: String, line: usize },
    #[error("name table has no entry for `{0}`")]
    UnknownName(String),
}

#[derive(Debug, Clone)]
pub struct TemplateSet {
    sources: BTreeMap<&'static str, String>,
    names: BTreeMap<String, String>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let sources: BTreeMap<_, _> = BUILTIN.iter().map(|(k, v)| (*k, v.to_string())).collect();
        let names = parse_names(NAMES, &sources[NAMES]).expect("built-in name table parses");
        TemplateSet { sources, names }
    }

    /// Built-in set with files from `dir` taking precedence.
    pub fn load(dir: Option<&Path>) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        let Some(dir) = dir else { return Ok(set) };
        for (name, _) in BUILTIN {
            let path = dir.join(name);
            if !path.is_file() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                path: path.display().to_string(),
                source,
            })?;
            set.sources.insert(name, text);
        }
        set.names = parse_names(NAMES, &set.sources[NAMES])?;
        Ok(set)
    }

    pub fn name(&self, key: &str) -> Result<&str, TemplateError> {
        self.names
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| TemplateError::UnknownName(key.to_string()))
    }

    pub fn scalar(&self, ty: ScalarType) -> Result<&str, TemplateError> {
        self.name(ty.cdl_name())
    }

    pub fn render<C: Serialize>(
        &self,
        template: &'static str,
        ctx: &C,
    ) -> Result<String, TemplateError> {
        let err = |e: tinytemplate::error::Error| TemplateError::Render {
            template: template.to_string(),
            message: e.to_string(),
        };
        let mut tt = TinyTemplate::new();
        tt.set_default_formatter(&tinytemplate::format_unescaped);
        tt.add_template(template, &self.sources[template])
            .map_err(err)?;
        let mut text = tt.render(template, ctx).map_err(err)?;
        // one trailing newline regardless of how the template ends
        text.truncate(text.trim_end().len());
        text.push('\n');
        Ok(text)
    }
}

fn parse_names(file: &str, text: &str) -> Result<BTreeMap<String, String>, TemplateError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(TemplateError::BadNameEntry {
            file: file.to_string(),
            line: i + 1,
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
