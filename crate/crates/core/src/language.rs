use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Language of the mined source code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubjectLanguage {
    #[serde(rename = "go", alias = "Go")]
    Go,
    #[serde(rename = "cpp", alias = "Cpp")]
    Cpp,
}

impl SubjectLanguage {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubjectLanguage::Go => "go",
            SubjectLanguage::Cpp => "cpp",
        }
    }

    pub fn extensions(&self) -> &'static [&'static str] {
        match self {
            SubjectLanguage::Go => &["go"],
            SubjectLanguage::Cpp => &["cpp", "cc", "cxx", "h", "hpp"],
        }
    }

    pub fn matches_extension(&self, path: &std::path::Path) -> bool {
        path.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| self.extensions().contains(&e))
    }

    pub(crate) fn grammar(&self) -> tree_sitter::Language {
        match self {
            SubjectLanguage::Go => tree_sitter_go::LANGUAGE.into(),
            SubjectLanguage::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }

    /// Separator used between path segments of a qualified identifier in source.
    pub(crate) fn scope_separator(&self) -> &'static str {
        match self {
            SubjectLanguage::Go => ".",
            SubjectLanguage::Cpp => "::",
        }
    }

    pub(crate) fn default_indent(&self) -> &'static str {
        match self {
            SubjectLanguage::Go => "\t",
            SubjectLanguage::Cpp => "    ",
        }
    }
}

impl fmt::Display for SubjectLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubjectLanguage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "go" | "golang" => Ok(SubjectLanguage::Go),
            "cpp" | "c++" | "cxx" => Ok(SubjectLanguage::Cpp),
            other => Err(format!("unknown subject language `{other}`")),
        }
    }
}
