//! Identifier derivation for emitted code.

use std::collections::HashSet;

/// Words that cannot be used as emitted identifiers.
pub const RESERVED: &[&str] = &[
    "as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum", "extern",
    "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod", "move", "mut", "pub",
    "ref", "return", "self", "Self", "static", "struct", "super", "trait", "true", "type",
    "unsafe", "use", "where", "while", "abstract", "become", "box", "do", "final", "macro",
    "override", "priv", "typeof", "unsized", "virtual", "yield", "try", "union",
];

/// `tSensor` -> `TSensor`.
pub fn camel(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

/// `tSensor` -> `t_sensor`, `Sensor1` -> `sensor1`.
pub fn snake(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    let mut prev: Option<char> = None;
    for c in name.chars() {
        if c.is_ascii_uppercase() {
            if prev.is_some_and(|p| p.is_ascii_lowercase() || p.is_ascii_digit()) {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
        prev = Some(c);
    }
    out
}

/// `eSensor` -> `E_SENSOR`.
pub fn upper(name: &str) -> String {
    snake(name).to_ascii_uppercase()
}

/// Hands out identifiers unique within one namespace, suffixing `_2`, `_3`,
/// ... on collision. Requests are deterministic given the same call order.
#[derive(Debug, Default)]
pub struct Namer {
    taken: HashSet<String>,
}

impl Namer {
    pub fn new() -> Self {
        let mut n = Namer::default();
        n.taken.extend(RESERVED.iter().map(|s| s.to_string()));
        n
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn claim(&mut self, wanted: String) -> String {
        if self.taken.insert(wanted.clone()) {
            return wanted;
        }
        (2..)
            .map(|i| format!("{wanted}_{i}"))
            .find(|c| self.taken.insert(c.clone()))
            .unwrap()
    }
}
