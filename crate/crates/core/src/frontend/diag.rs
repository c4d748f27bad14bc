use std::fmt;

use serde::Serialize;

/// 1-based line and column in the input text.
///
/// Locations never participate in structural equality: two syntax trees
/// that differ only in where they came from compare equal.
#[derive(Clone, Copy, Debug, Default, Eq, PartialOrd, Ord, Serialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Loc {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }

    /// Position-wise comparison (the `PartialEq` impl ignores positions).
    pub fn same_position(&self, other: &Loc) -> bool {
        self.line == other.line && self.col == other.col
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Machine-readable tag such as `indirect-call` or `switch`.
    pub code: String,
    pub loc: Loc,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: impl Into<String>, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code: code.into(), loc, message: message.into() }
    }

    pub fn warning(code: impl Into<String>, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code: code.into(), loc, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity[code]: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}[{}]: {}", self.loc.line, self.loc.col, self.severity, self.code, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}[{}]: {}", self.loc, self.severity, self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_format() {
        let d = Diagnostic::error("switch", Loc::new(3, 5), "switch statements are not supported");
        assert_eq!(d.render("bad.c"), "bad.c:3:5: error[switch]: switch statements are not supported");
    }
}
