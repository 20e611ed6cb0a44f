use tree_sitter::Node;

use super::functions::{cpp_split_name, cpp_unwrap_declarator};
use super::{named_children, SyntaxTree};
use crate::{LibrarySpec, SubjectLanguage};

/// An exported library function or method together with its doc comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentedApi {
    pub api_name: String,
    /// Comment text with comment markers stripped; `None` when the API is undocumented.
    pub docstring: Option<String>,
}

/// Exported functions and methods declared or defined in a library source file.
pub fn documented_apis(tree: &SyntaxTree, lib: &LibrarySpec) -> Vec<DocumentedApi> {
    let mut out = Vec::new();
    match tree.language() {
        SubjectLanguage::Go => go_apis(tree, lib, &mut out),
        SubjectLanguage::Cpp => cpp_apis(tree, lib, tree.root(), &mut Vec::new(), &mut out),
    }
    out
}

fn go_package_prefix(tree: &SyntaxTree, lib: &LibrarySpec) -> String {
    let package = named_children(tree.root())
        .into_iter()
        .find(|n| n.kind() == "package_clause")
        .and_then(|p| named_children(p).into_iter().next())
        .map(|n| tree.text(n).to_string());
    match package {
        Some(p) if lib.is_prefix(&p) => p,
        _ => lib.primary_prefix().to_string(),
    }
}

fn go_apis(tree: &SyntaxTree, lib: &LibrarySpec, out: &mut Vec<DocumentedApi>) {
    let root = tree.root();
    let prefix = go_package_prefix(tree, lib);
    for node in named_children(root) {
        if !matches!(node.kind(), "function_declaration" | "method_declaration") {
            continue;
        }
        let Some(name) = node.child_by_field_name("name").map(|n| tree.text(n)) else {
            continue;
        };
        if !name.starts_with(|c: char| c.is_uppercase()) {
            continue;
        }
        let owner = node.child_by_field_name("receiver").and_then(|r| {
            named_children(r)
                .into_iter()
                .next()
                .and_then(|d| d.child_by_field_name("type"))
                .map(|t| LibrarySpec::type_base(tree.text(t)))
        });
        if owner
            .as_deref()
            .is_some_and(|o| !o.starts_with(|c: char| c.is_uppercase()))
        {
            continue;
        }
        let api_name = match owner {
            Some(o) => format!("{prefix}.{o}.{name}"),
            None => format!("{prefix}.{name}"),
        };
        out.push(DocumentedApi {
            api_name,
            docstring: leading_doc_comment(tree, node),
        });
    }
}

fn cpp_apis<'t>(
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    node: Node<'t>,
    scope: &mut Vec<String>,
    out: &mut Vec<DocumentedApi>,
) {
    for child in named_children(node) {
        match child.kind() {
            "function_definition" | "declaration" | "field_declaration" => {
                if let Some(api) = cpp_api(tree, lib, child, child, scope) {
                    out.push(api);
                }
            }
            "template_declaration" => {
                let inner = named_children(child).into_iter().find(|n| {
                    matches!(
                        n.kind(),
                        "function_definition" | "declaration" | "field_declaration"
                    )
                });
                if let Some(api) = inner.and_then(|n| cpp_api(tree, lib, n, child, scope)) {
                    out.push(api);
                } else {
                    cpp_apis(tree, lib, child, scope, out);
                }
            }
            "linkage_specification"
            | "preproc_ifdef"
            | "preproc_if"
            | "preproc_else"
            | "preproc_elif"
            | "declaration_list" => cpp_apis(tree, lib, child, scope, out),
            "namespace_definition" => {
                let name = child
                    .child_by_field_name("name")
                    .map(|n| tree.text(n).to_string());
                if let Some(body) = child.child_by_field_name("body") {
                    let pushed = name.map(|n| {
                        scope.extend(n.split("::").map(str::to_string));
                        n.split("::").count()
                    });
                    cpp_apis(tree, lib, body, scope, out);
                    for _ in 0..pushed.unwrap_or(0) {
                        scope.pop();
                    }
                }
            }
            "class_specifier" | "struct_specifier" => {
                let (Some(name), Some(body)) = (
                    child.child_by_field_name("name"),
                    child.child_by_field_name("body"),
                ) else {
                    continue;
                };
                scope.push(tree.text(name).to_string());
                cpp_apis(tree, lib, body, scope, out);
                scope.pop();
            }
            _ => {}
        }
    }
}

fn cpp_api(
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    decl_node: Node<'_>,
    doc_anchor: Node<'_>,
    scope: &[String],
) -> Option<DocumentedApi> {
    let (decl, _) = cpp_unwrap_declarator(decl_node.child_by_field_name("declarator")?);
    if decl.kind() != "function_declarator" {
        return None;
    }
    let (qualifier, name) = cpp_split_name(tree, decl.child_by_field_name("declarator")?);
    if name.is_empty() || name.starts_with('_') || name.starts_with("operator") {
        return None;
    }
    let mut segments: Vec<String> = scope.to_vec();
    if let Some(q) = qualifier {
        segments.extend(q.split("::").map(str::to_string));
    }
    segments.push(name);
    if !lib.is_prefix(&segments[0]) {
        segments.insert(0, lib.primary_prefix().to_string());
    }
    Some(DocumentedApi {
        api_name: segments.join("."),
        docstring: leading_doc_comment(tree, doc_anchor),
    })
}

/// `(outer, inner)` pairs of qualified type names where `outer` embeds (Go) or
/// publicly derives from (C++) `inner`, so `inner`'s methods are callable on `outer`.
pub fn embedded_types(tree: &SyntaxTree, lib: &LibrarySpec) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match tree.language() {
        SubjectLanguage::Go => {
            let root = tree.root();
            let prefix = go_package_prefix(tree, lib);
            let qualify = |t: &str| {
                let base = LibrarySpec::type_base(t);
                if base.contains('.') {
                    base
                } else {
                    format!("{prefix}.{base}")
                }
            };
            for decl in named_children(root)
                .into_iter()
                .filter(|n| n.kind() == "type_declaration")
            {
                for spec in named_children(decl)
                    .into_iter()
                    .filter(|n| n.kind() == "type_spec")
                {
                    let (Some(name), Some(ty)) = (
                        spec.child_by_field_name("name"),
                        spec.child_by_field_name("type"),
                    ) else {
                        continue;
                    };
                    if ty.kind() != "struct_type" {
                        continue;
                    }
                    let outer = qualify(tree.text(name));
                    let fields = named_children(ty)
                        .into_iter()
                        .filter(|n| n.kind() == "field_declaration_list");
                    for field in fields.flat_map(named_children) {
                        if field.kind() == "field_declaration"
                            && field.child_by_field_name("name").is_none()
                        {
                            if let Some(t) = field.child_by_field_name("type") {
                                out.push((outer.clone(), qualify(tree.text(t))));
                            }
                        }
                    }
                }
            }
        }
        SubjectLanguage::Cpp => cpp_bases(tree, lib, tree.root(), &mut Vec::new(), &mut out),
    }
    out
}

fn cpp_bases(
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    node: Node<'_>,
    scope: &mut Vec<String>,
    out: &mut Vec<(String, String)>,
) {
    let qualify = |segments: Vec<String>| {
        let mut segments = segments;
        if !segments.first().is_some_and(|s| lib.is_prefix(s)) {
            segments.insert(0, lib.primary_prefix().to_string());
        }
        segments.join(".")
    };
    for child in named_children(node) {
        match child.kind() {
            "namespace_definition" => {
                let Some(body) = child.child_by_field_name("body") else {
                    continue;
                };
                let name = child
                    .child_by_field_name("name")
                    .map(|n| tree.text(n).to_string());
                let added: Vec<String> = name
                    .iter()
                    .flat_map(|n| n.split("::").map(str::to_string))
                    .collect();
                let n = added.len();
                scope.extend(added);
                cpp_bases(tree, lib, body, scope, out);
                scope.truncate(scope.len() - n);
            }
            "linkage_specification"
            | "declaration_list"
            | "preproc_ifdef"
            | "preproc_if"
            | "preproc_else"
            | "template_declaration"
            | "declaration" => cpp_bases(tree, lib, child, scope, out),
            "class_specifier" | "struct_specifier" => {
                let Some(name) = child.child_by_field_name("name") else {
                    continue;
                };
                let mut outer = scope.clone();
                outer.push(tree.text(name).to_string());
                for clause in named_children(child)
                    .into_iter()
                    .filter(|n| n.kind() == "base_class_clause")
                {
                    // class bases default to private, struct bases to public
                    let mut private = child.kind() == "class_specifier";
                    for base in super::children(clause) {
                        match base.kind() {
                            "access_specifier" => private = tree.text(base) != "public",
                            "type_identifier" | "qualified_identifier" | "template_type"
                                if !private =>
                            {
                                let text = LibrarySpec::type_base(tree.text(base));
                                let mut inner: Vec<String> =
                                    text.split("::").map(str::to_string).collect();
                                if inner.len() == 1 {
                                    inner = scope.iter().cloned().chain(inner).collect();
                                }
                                out.push((qualify(outer.clone()), qualify(inner)));
                            }
                            _ => {}
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// Contiguous comment block ending on the line directly above `node`.
fn leading_doc_comment(tree: &SyntaxTree, node: Node<'_>) -> Option<String> {
    let mut comments = Vec::new();
    let mut expected_row = node.start_position().row;
    let mut cur = node.prev_named_sibling();
    while let Some(c) = cur {
        if c.kind() != "comment" || c.end_position().row + 1 != expected_row {
            break;
        }
        // a trailing comment on a code line belongs to that code
        if let Some(prev) = c.prev_sibling() {
            if prev.end_position().row == c.start_position().row {
                break;
            }
        }
        comments.push(tree.text(c));
        expected_row = c.start_position().row;
        cur = c.prev_named_sibling();
    }
    comments.reverse();
    let text = comments
        .iter()
        .map(|c| strip_comment_markers(c))
        .collect::<Vec<_>>()
        .join("\n");
    let text = text.trim().to_string();
    (!text.is_empty()).then_some(text)
}

pub(crate) fn strip_comment_markers(comment: &str) -> String {
    let c = comment.trim();
    let lines: Vec<String> = if let Some(block) = c.strip_prefix("/*") {
        let block = block.strip_suffix("*/").unwrap_or(block);
        let block = block.strip_prefix(['*', '!']).unwrap_or(block);
        block
            .lines()
            .map(|l| {
                let l = l.trim();
                let l = l.strip_prefix('*').unwrap_or(l);
                l.strip_prefix(' ').unwrap_or(l).trim_end().to_string()
            })
            .collect()
    } else {
        c.lines()
            .map(|l| {
                let l = l.trim();
                let l = l
                    .strip_prefix("///")
                    .or_else(|| l.strip_prefix("//!"))
                    .or_else(|| l.strip_prefix("//"))
                    .unwrap_or(l);
                l.strip_prefix(' ').unwrap_or(l).trim_end().to_string()
            })
            .collect()
    };
    let mut lines: Vec<String> = lines;
    while lines.first().is_some_and(|l| l.is_empty()) {
        lines.remove(0);
    }
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}
