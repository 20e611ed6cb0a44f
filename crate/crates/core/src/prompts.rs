//! Knowledge-enhanced prompt templates.
//!
//! | kind               | template                                                    |
//! |--------------------|-------------------------------------------------------------|
//! | `signature`        | `Complete this function: {sig}`                             |
//! | `library_import`   | `Complete this function using {library}: {sig}`             |
//! | `api`              | `Complete this function using {apis}: {sig}`                |
//! | `docstring`        | `{doc lines}\nComplete this function: {sig}`                |
//! | `api_then_docstring` | `Complete this function using {apis}.\n{doc lines} {sig}` |
//! | `docstring_then_api` | `{doc lines}\nComplete this function using {apis}: {sig}` |
//!
//! Several APIs are joined with `", "`. Each API contributes one docstring line of the
//! form `{api} {description}.`; several lines are joined with `\n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::knowledge::{lowercase_first, KnowledgeBase};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Signature,
    LibraryImport,
    Api,
    Docstring,
    ApiThenDocstring,
    DocstringThenApi,
}

impl PromptKind {
    pub const ALL: [PromptKind; 6] = [
        PromptKind::Signature,
        PromptKind::LibraryImport,
        PromptKind::Api,
        PromptKind::Docstring,
        PromptKind::ApiThenDocstring,
        PromptKind::DocstringThenApi,
    ];

    fn as_str(&self) -> &'static str {
        match self {
            PromptKind::Signature => "signature",
            PromptKind::LibraryImport => "library_import",
            PromptKind::Api => "api",
            PromptKind::Docstring => "docstring",
            PromptKind::ApiThenDocstring => "api_then_docstring",
            PromptKind::DocstringThenApi => "docstring_then_api",
        }
    }

    fn needs_apis(&self) -> bool {
        matches!(
            self,
            PromptKind::Api | PromptKind::ApiThenDocstring | PromptKind::DocstringThenApi
        )
    }

    fn needs_docstrings(&self) -> bool {
        matches!(
            self,
            PromptKind::Docstring | PromptKind::ApiThenDocstring | PromptKind::DocstringThenApi
        )
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        let alias = match norm.as_str() {
            "docstring+api" => Some(PromptKind::DocstringThenApi),
            "api+docstring" => Some(PromptKind::ApiThenDocstring),
            _ => None,
        };
        alias
            .or_else(|| PromptKind::ALL.into_iter().find(|k| k.as_str() == norm))
            .ok_or_else(|| Error::PromptSpec(format!("unknown prompt kind `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct PromptSpec<'a> {
    pub kind: PromptKind,
    pub signature: &'a str,
    pub library: Option<&'a str>,
    pub apis: Vec<String>,
    pub kb: Option<&'a KnowledgeBase>,
}

impl<'a> PromptSpec<'a> {
    pub fn new(kind: PromptKind, signature: &'a str) -> Self {
        Self {
            kind,
            signature,
            library: None,
            apis: Vec::new(),
            kb: None,
        }
    }

    pub fn library(mut self, library: &'a str) -> Self {
        self.library = Some(library);
        self
    }

    pub fn apis(mut self, apis: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.apis = apis.into_iter().map(Into::into).collect();
        self
    }

    pub fn kb(mut self, kb: &'a KnowledgeBase) -> Self {
        self.kb = Some(kb);
        self
    }
}

const HEAD: &str = "Complete this function";

/// `{api} {description}.` for every API; fails listing every API without an entry.
pub fn docstring_lines(apis: &[String], kb: Option<&KnowledgeBase>) -> Result<Vec<String>> {
    let mut lines = Vec::with_capacity(apis.len());
    let mut missing = Vec::new();
    for api in apis {
        match kb.and_then(|kb| kb.lookup(api)) {
            Some(entry) => lines.push(format!("{api} {}.", lowercase_first(&entry.summary()))),
            None => missing.push(api.clone()),
        }
    }
    if missing.is_empty() {
        Ok(lines)
    } else {
        Err(Error::MissingDocstrings(missing))
    }
}

pub fn render_prompt(spec: &PromptSpec<'_>) -> Result<String> {
    let sig = spec.signature.trim();
    if spec.kind.needs_apis() && spec.apis.is_empty() {
        return Err(Error::PromptSpec(format!(
            "`{}` prompts need at least one API",
            spec.kind
        )));
    }
    let apis = spec.apis.join(", ");
    let docs = if spec.kind.needs_docstrings() {
        let apis: &[String] = &spec.apis;
        if apis.is_empty() {
            return Err(Error::PromptSpec(
                "`docstring` prompts need at least one API".into(),
            ));
        }
        docstring_lines(apis, spec.kb)?.join("\n")
    } else {
        String::new()
    };
    Ok(match spec.kind {
        PromptKind::Signature => format!("{HEAD}: {sig}"),
        PromptKind::LibraryImport => {
            let lib = spec.library.ok_or_else(|| {
                Error::PromptSpec("`library_import` prompts need a library".into())
            })?;
            format!("{HEAD} using {lib}: {sig}")
        }
        PromptKind::Api => format!("{HEAD} using {apis}: {sig}"),
        PromptKind::Docstring => format!("{docs}\n{HEAD}: {sig}"),
        PromptKind::ApiThenDocstring => format!("{HEAD} using {apis}.\n{docs} {sig}"),
        PromptKind::DocstringThenApi => format!("{docs}\n{HEAD} using {apis}: {sig}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::KnowledgeEntry;
    use chrono::{DateTime, Utc};

    const SIG: &str = "func Routes(r *gin.Engine)";

    fn table_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new("gin", DateTime::<Utc>::UNIX_EPOCH);
        kb.insert(KnowledgeEntry::new(
            "gin.RouterGroup.Use",
            "Use adds middleware to the group, see example code in GitHub.",
        ));
        kb.insert(KnowledgeEntry::new(
            "gin.Context.JSON",
            "JSON serializes the given struct as JSON.",
        ));
        kb
    }

    #[test]
    fn multi_api_join() {
        let kb = table_kb();
        let spec = PromptSpec::new(PromptKind::Docstring, SIG)
            .apis(["gin.RouterGroup.Use", "gin.Context.JSON"])
            .kb(&kb);
        assert_eq!(
            render_prompt(&spec).unwrap(),
            "gin.RouterGroup.Use adds middleware to the group.\n\
             gin.Context.JSON serializes the given struct as JSON.\n\
             Complete this function: func Routes(r *gin.Engine)"
        );
        let spec = PromptSpec::new(PromptKind::Api, SIG).apis(["gin.A", "gin.B"]);
        assert_eq!(
            render_prompt(&spec).unwrap(),
            "Complete this function using gin.A, gin.B: func Routes(r *gin.Engine)"
        );
    }

    #[test]
    fn missing_docstrings_are_listed() {
        let kb = table_kb();
        let spec = PromptSpec::new(PromptKind::DocstringThenApi, SIG)
            .apis(["gin.RouterGroup.Use", "gin.Nope", "gin.Other"])
            .kb(&kb);
        match render_prompt(&spec) {
            Err(Error::MissingDocstrings(m)) => assert_eq!(m, vec!["gin.Nope", "gin.Other"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invariants_enforced() {
        assert!(render_prompt(&PromptSpec::new(PromptKind::Api, SIG)).is_err());
        assert!(render_prompt(&PromptSpec::new(PromptKind::LibraryImport, SIG)).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in PromptKind::ALL {
            assert_eq!(k.to_string().parse::<PromptKind>().unwrap(), k);
        }
        assert_eq!(
            "docstring+api".parse::<PromptKind>().unwrap(),
            PromptKind::DocstringThenApi
        );
        assert!("nope".parse::<PromptKind>().is_err());
    }

    #[test]
    fn signature_appears_once() {
        let kb = table_kb();
        for kind in PromptKind::ALL {
            let spec = PromptSpec::new(kind, SIG)
                .library("gin")
                .apis(["gin.RouterGroup.Use"])
                .kb(&kb);
            let out = render_prompt(&spec).unwrap();
            assert_eq!(out.matches(SIG).count(), 1, "{kind}");
            assert!(!out.ends_with('\n'));
            assert_eq!(render_prompt(&spec).unwrap(), out);
        }
    }
}
