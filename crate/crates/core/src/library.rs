//! Target library descriptions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SubjectLanguage};

/// Describes one third-party library whose API usage is mined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibrarySpec {
    pub name: String,
    /// Substrings matched against import paths (Go) or include paths (C++).
    pub import_patterns: Vec<String>,
    /// Package or namespace identifiers that qualify library calls in source.
    pub qualifier_prefixes: Vec<String>,
    pub subject_language: SubjectLanguage,
    /// Factory/constructor API (qualified name) to its return types, in source syntax.
    /// Used to type `:=` and `auto` declarations and chained calls.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub type_map: BTreeMap<String, Vec<String>>,
    /// Library classes commonly used without their namespace (`USING_NS_CC`, Unreal's
    /// global classes). They are qualified with the first qualifier prefix.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_types: Vec<String>,
}

impl LibrarySpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Library("library name is empty".into()));
        }
        if self.import_patterns.iter().all(|p| p.is_empty()) {
            return Err(Error::Library(format!(
                "`{}` needs at least one import pattern",
                self.name
            )));
        }
        if self.qualifier_prefixes.iter().all(|p| p.is_empty()) {
            return Err(Error::Library(format!(
                "`{}` needs at least one qualifier prefix",
                self.name
            )));
        }
        Ok(())
    }

    pub fn primary_prefix(&self) -> &str {
        &self.qualifier_prefixes[0]
    }

    /// Strips pointer/reference sigils, `const` and template arguments from a type.
    pub fn type_base(type_text: &str) -> String {
        let mut t = type_text.trim();
        loop {
            let before = t;
            t = t.trim_start_matches(['*', '&']).trim();
            t = t.trim_end_matches(['*', '&']).trim();
            t = t.strip_prefix("const ").unwrap_or(t).trim();
            t = t.strip_suffix(" const").unwrap_or(t).trim();
            if t == before {
                break;
            }
        }
        let t = match t.find('<') {
            Some(i) => &t[..i],
            None => t,
        };
        t.trim().to_string()
    }

    /// Qualified API-name prefix for a declared variable type when the type belongs to
    /// this library, e.g. `*gin.Context` → `gin.Context`, `cocos2d::Sprite*` →
    /// `cocos2d.Sprite`.
    pub fn qualify_type(&self, type_text: &str) -> Option<String> {
        let base = Self::type_base(type_text);
        if base.is_empty() {
            return None;
        }
        let sep = self.subject_language.scope_separator();
        let segments: Vec<&str> = base.split(sep).map(str::trim).collect();
        if segments.iter().any(|s| s.is_empty()) {
            return None;
        }
        if segments.len() >= 2 && self.is_prefix(segments[0]) {
            return Some(segments.join("."));
        }
        if self.known_types.iter().any(|k| k == segments[0]) {
            return Some(format!("{}.{}", self.primary_prefix(), segments.join(".")));
        }
        None
    }

    /// Qualified name for a path-style callee (`gin.Default`, `cocos2d::Sprite::create`).
    pub fn qualify_path(&self, segments: &[&str]) -> Option<String> {
        if segments.len() < 2 || segments.iter().any(|s| s.is_empty()) {
            return None;
        }
        if self.is_prefix(segments[0]) {
            return Some(segments.join("."));
        }
        if self.known_types.iter().any(|k| k == segments[0]) {
            return Some(format!("{}.{}", self.primary_prefix(), segments.join(".")));
        }
        None
    }

    pub fn is_prefix(&self, ident: &str) -> bool {
        self.qualifier_prefixes.iter().any(|p| p == ident)
    }

    /// Whether `name` is a well-formed API name for this library: dot-separated
    /// identifiers starting with a qualifier prefix or the library name.
    pub fn is_api_name(&self, name: &str) -> bool {
        let mut parts = name.split('.');
        let Some(head) = parts.next() else {
            return false;
        };
        let rest: Vec<&str> = parts.collect();
        if rest.is_empty() || rest.iter().any(|p| !is_identifier_like(p)) {
            return false;
        }
        self.is_prefix(head) || head == self.name
    }

    /// Return types recorded for a factory API.
    pub fn return_types(&self, api: &str) -> Option<&[String]> {
        self.type_map.get(api).map(Vec::as_slice)
    }

    pub fn builtin(name: &str) -> Option<LibrarySpec> {
        builtin_libraries().into_iter().find(|l| l.name == name)
    }
}

fn is_identifier_like(part: &str) -> bool {
    !part.is_empty()
        && part
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '~' || "+-*/=<>!&|[]()^%,".contains(c))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn type_map(entries: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), strings(v)))
        .collect()
}

/// The six libraries of the original study, as ready-made specs.
pub fn builtin_libraries() -> Vec<LibrarySpec> {
    vec![
        LibrarySpec {
            name: "gin".into(),
            import_patterns: strings(&["github.com/gin-gonic/gin"]),
            qualifier_prefixes: strings(&["gin"]),
            subject_language: SubjectLanguage::Go,
            type_map: type_map(&[
                ("gin.Default", &["*gin.Engine"]),
                ("gin.New", &["*gin.Engine"]),
                ("gin.CreateTestContext", &["*gin.Context", "*gin.Engine"]),
                ("gin.Engine.Group", &["*gin.RouterGroup"]),
                ("gin.RouterGroup.Group", &["*gin.RouterGroup"]),
                ("gin.Context.Copy", &["*gin.Context"]),
            ]),
            known_types: vec![],
        },
        LibrarySpec {
            name: "grpc-go".into(),
            import_patterns: strings(&["google.golang.org/grpc"]),
            qualifier_prefixes: strings(&["grpc", "codes", "status", "metadata", "credentials"]),
            subject_language: SubjectLanguage::Go,
            type_map: type_map(&[
                ("grpc.NewServer", &["*grpc.Server"]),
                ("grpc.Dial", &["*grpc.ClientConn", "error"]),
                ("grpc.DialContext", &["*grpc.ClientConn", "error"]),
                ("grpc.NewClient", &["*grpc.ClientConn", "error"]),
            ]),
            known_types: vec![],
        },
        LibrarySpec {
            name: "prometheus".into(),
            import_patterns: strings(&["github.com/prometheus/client_golang"]),
            qualifier_prefixes: strings(&["prometheus", "promhttp", "promauto"]),
            subject_language: SubjectLanguage::Go,
            type_map: type_map(&[
                ("prometheus.NewCounter", &["prometheus.Counter"]),
                ("prometheus.NewCounterVec", &["*prometheus.CounterVec"]),
                ("prometheus.NewGauge", &["prometheus.Gauge"]),
                ("prometheus.NewGaugeVec", &["*prometheus.GaugeVec"]),
                ("prometheus.NewHistogram", &["prometheus.Histogram"]),
                ("prometheus.NewHistogramVec", &["*prometheus.HistogramVec"]),
                ("prometheus.NewRegistry", &["*prometheus.Registry"]),
                ("promauto.NewCounter", &["prometheus.Counter"]),
                ("promauto.NewGauge", &["prometheus.Gauge"]),
            ]),
            known_types: vec![],
        },
        LibrarySpec {
            name: "unreal".into(),
            import_patterns: strings(&["CoreMinimal.h", "Engine/", "GameFramework/", "Kismet/"]),
            qualifier_prefixes: strings(&["UE"]),
            subject_language: SubjectLanguage::Cpp,
            type_map: type_map(&[
                (
                    "UE.UGameplayStatics.GetPlayerController",
                    &["APlayerController*"],
                ),
                ("UE.AActor.GetWorld", &["UWorld*"]),
            ]),
            known_types: strings(&[
                "AActor",
                "APawn",
                "ACharacter",
                "APlayerController",
                "UWorld",
                "UObject",
                "UGameplayStatics",
                "UKismetMathLibrary",
                "UStaticMeshComponent",
                "USceneComponent",
                "FVector",
                "FRotator",
                "FString",
                "FName",
            ]),
        },
        LibrarySpec {
            name: "cocos2d-x".into(),
            import_patterns: strings(&["cocos2d.h", "cocos/"]),
            qualifier_prefixes: strings(&["cocos2d"]),
            subject_language: SubjectLanguage::Cpp,
            type_map: type_map(&[
                ("cocos2d.Director.getInstance", &["cocos2d::Director*"]),
                ("cocos2d.Sprite.create", &["cocos2d::Sprite*"]),
                ("cocos2d.Label.createWithTTF", &["cocos2d::Label*"]),
                ("cocos2d.Scene.create", &["cocos2d::Scene*"]),
                ("cocos2d.Director.getWinSize", &["cocos2d::Size"]),
            ]),
            known_types: strings(&[
                "Director",
                "Sprite",
                "Scene",
                "Layer",
                "Node",
                "Label",
                "Menu",
                "MenuItemImage",
                "Vec2",
                "Size",
                "Rect",
                "Action",
                "MoveTo",
                "Sequence",
                "EventListenerTouchOneByOne",
            ]),
        },
        LibrarySpec {
            name: "bgfx".into(),
            import_patterns: strings(&["bgfx/"]),
            qualifier_prefixes: strings(&["bgfx", "bx"]),
            subject_language: SubjectLanguage::Cpp,
            type_map: BTreeMap::new(),
            known_types: vec![],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for lib in builtin_libraries() {
            lib.validate().unwrap();
        }
        assert_eq!(builtin_libraries().len(), 6);
    }

    #[test]
    fn type_base_strips_sigils() {
        assert_eq!(LibrarySpec::type_base("*gin.Context"), "gin.Context");
        assert_eq!(
            LibrarySpec::type_base("cocos2d::Sprite*"),
            "cocos2d::Sprite"
        );
        assert_eq!(
            LibrarySpec::type_base("const cocos2d::Vec2&"),
            "cocos2d::Vec2"
        );
        assert_eq!(LibrarySpec::type_base("std::vector<int>"), "std::vector");
    }

    #[test]
    fn qualify_types() {
        let gin = LibrarySpec::builtin("gin").unwrap();
        assert_eq!(
            gin.qualify_type("*gin.Context").as_deref(),
            Some("gin.Context")
        );
        assert_eq!(gin.qualify_type("*http.Request"), None);
        assert_eq!(gin.qualify_type("int"), None);

        let cc = LibrarySpec::builtin("cocos2d-x").unwrap();
        assert_eq!(
            cc.qualify_type("cocos2d::Sprite*").as_deref(),
            Some("cocos2d.Sprite")
        );
        assert_eq!(
            cc.qualify_type("Sprite*").as_deref(),
            Some("cocos2d.Sprite")
        );
        assert_eq!(
            cc.qualify_type("cocos2d::ui::Button*").as_deref(),
            Some("cocos2d.ui.Button")
        );
        assert_eq!(cc.qualify_type("std::string"), None);
    }

    #[test]
    fn api_name_grammar() {
        let gin = LibrarySpec::builtin("gin").unwrap();
        assert!(gin.is_api_name("gin.Context.Abort"));
        assert!(gin.is_api_name("gin.Default"));
        assert!(!gin.is_api_name("gin"));
        assert!(!gin.is_api_name("http.Get"));
        assert!(!gin.is_api_name("gin..Foo"));
    }

    #[test]
    fn rejects_empty_patterns() {
        let mut lib = LibrarySpec::builtin("gin").unwrap();
        lib.qualifier_prefixes.clear();
        assert!(lib.validate().is_err());
    }
}
