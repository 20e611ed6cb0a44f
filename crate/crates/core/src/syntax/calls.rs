use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::{named_children, walk_preorder, FunctionSpan, SyntaxTree, TypedVar};
use crate::{ByteSpan, LibrarySpec, SubjectLanguage};

/// A call to a target-library API inside a function body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiCall {
    /// `<prefix>.<Type>.<Func>` or `<prefix>.<Func>`; C++ `::` paths use `.` separators.
    pub qualified_name: String,
    pub call_byte_span: ByteSpan,
    /// The innermost statement enclosing the call. Calls of one chain share it.
    pub stmt_byte_span: ByteSpan,
    /// Variable the method was invoked on, when the call was matched through its type.
    #[serde(skip)]
    pub receiver_var: Option<String>,
}

impl ApiCall {
    /// Re-bases both spans onto a new origin (e.g. the start of the function).
    pub fn rebased(&self, origin: usize) -> ApiCall {
        ApiCall {
            qualified_name: self.qualified_name.clone(),
            call_byte_span: self.call_byte_span.relative_to(origin),
            stmt_byte_span: self.stmt_byte_span.relative_to(origin),
            receiver_var: self.receiver_var.clone(),
        }
    }
}

/// Maps call expressions to qualified API names.
pub(crate) struct Resolver<'a> {
    tree: &'a SyntaxTree,
    lib: &'a LibrarySpec,
    vars: &'a [TypedVar],
}

impl<'a> Resolver<'a> {
    pub(crate) fn new(tree: &'a SyntaxTree, lib: &'a LibrarySpec, vars: &'a [TypedVar]) -> Self {
        Self { tree, lib, vars }
    }

    /// Latest declaration of `name` visible at `pos`.
    fn var_at(&self, name: &str, pos: usize) -> Option<&TypedVar> {
        self.vars
            .iter()
            .filter(|v| v.name == name && v.declared_at <= pos)
            .max_by_key(|v| v.declared_at)
    }

    /// Qualified API name (and receiver variable) of a call expression, if it targets
    /// the library.
    pub(crate) fn qualify_call(&self, call: Node<'_>) -> Option<(String, Option<String>)> {
        let callee = call.child_by_field_name("function")?;
        match (self.tree.language(), callee.kind()) {
            (SubjectLanguage::Go, "selector_expression") => {
                let operand = callee.child_by_field_name("operand")?;
                let field = self.tree.text(callee.child_by_field_name("field")?);
                self.qualify_member(operand, field, call.start_byte())
            }
            (SubjectLanguage::Cpp, "field_expression") => {
                let operand = callee.child_by_field_name("argument")?;
                let field = callee.child_by_field_name("field")?;
                if field.kind() != "field_identifier" {
                    return None;
                }
                self.qualify_member(operand, self.tree.text(field), call.start_byte())
            }
            (SubjectLanguage::Cpp, "qualified_identifier") => {
                let text = self.tree.text(callee);
                let segments: Vec<&str> = text.split("::").map(str::trim).collect();
                if segments.iter().any(|s| s.contains('<')) {
                    return None;
                }
                self.lib.qualify_path(&segments).map(|q| (q, None))
            }
            _ => None,
        }
    }

    fn qualify_member(
        &self,
        operand: Node<'_>,
        member: &str,
        pos: usize,
    ) -> Option<(String, Option<String>)> {
        match operand.kind() {
            "identifier" => {
                let ident = self.tree.text(operand);
                if let Some(var) = self.var_at(ident, pos) {
                    // a declared variable shadows any package of the same name
                    let owner = self.lib.qualify_type(&var.type_text)?;
                    return Some((format!("{owner}.{member}"), Some(ident.to_string())));
                }
                if self.tree.language() == SubjectLanguage::Go && self.lib.is_prefix(ident) {
                    return Some((format!("{ident}.{member}"), None));
                }
                None
            }
            "call_expression" => {
                let (inner, _) = self.qualify_call(operand)?;
                let ret = self.lib.return_types(&inner)?.first()?;
                let owner = self.lib.qualify_type(ret)?;
                Some((format!("{owner}.{member}"), None))
            }
            "parenthesized_expression" => {
                let inner = named_children(operand).into_iter().next()?;
                self.qualify_member(inner, member, pos)
            }
            _ => None,
        }
    }
}

fn is_statement(lang: SubjectLanguage, kind: &str) -> bool {
    match lang {
        SubjectLanguage::Go => {
            (kind.ends_with("_statement") && kind != "block")
                || matches!(
                    kind,
                    "short_var_declaration"
                        | "var_declaration"
                        | "const_declaration"
                        | "type_declaration"
                )
        }
        SubjectLanguage::Cpp => {
            (kind.ends_with("_statement") && kind != "compound_statement")
                || matches!(kind, "declaration" | "for_range_loop")
        }
    }
}

fn enclosing_statement(lang: SubjectLanguage, node: Node<'_>, body: ByteSpan) -> ByteSpan {
    let mut cur = node;
    while let Some(parent) = cur.parent() {
        if parent.start_byte() < body.start || parent.end_byte() > body.end {
            break;
        }
        if is_statement(lang, parent.kind()) {
            return ByteSpan::new(parent.start_byte(), parent.end_byte());
        }
        cur = parent;
    }
    ByteSpan::new(node.start_byte(), node.end_byte())
}

/// Library API calls in a function body, ordered by call position (inner calls of a
/// chain before the outer ones).
///
/// A call is a target API when its callee is qualified by one of the library's
/// prefixes or when it is invoked on a variable whose declared type belongs to the
/// library.
pub fn extract_api_calls(
    func: &FunctionSpan,
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    typed_vars: &[TypedVar],
) -> Vec<ApiCall> {
    let Some(body) = tree
        .root()
        .descendant_for_byte_range(func.body_span.start, func.body_span.end)
    else {
        return Vec::new();
    };
    let resolver = Resolver::new(tree, lib, typed_vars);
    let mut calls = Vec::new();
    walk_preorder(body, &mut |node| {
        if node.kind() == "call_expression" {
            if let Some((name, receiver)) = resolver.qualify_call(node) {
                calls.push(ApiCall {
                    qualified_name: name,
                    call_byte_span: ByteSpan::new(node.start_byte(), node.end_byte()),
                    stmt_byte_span: enclosing_statement(tree.language(), node, func.body_span),
                    receiver_var: receiver,
                });
            }
        }
        true
    });
    calls.sort_by_key(|c| (c.call_byte_span.start, c.call_byte_span.end));
    calls
}

/// Whether the file imports (Go) or includes (C++) the library. Only import
/// declarations are inspected, never strings or comments elsewhere.
pub fn uses_library(tree: &SyntaxTree, lib: &LibrarySpec) -> bool {
    let mut found = false;
    let matches = |path: &str| {
        lib.import_patterns
            .iter()
            .any(|p| !p.is_empty() && path.contains(p.as_str()))
    };
    walk_preorder(tree.root(), &mut |node| {
        if found {
            return false;
        }
        match (tree.language(), node.kind()) {
            (_, "function_declaration" | "method_declaration" | "function_definition") => false,
            (SubjectLanguage::Go, "import_spec") => {
                if let Some(path) = node.child_by_field_name("path") {
                    found = matches(tree.text(path));
                }
                false
            }
            (SubjectLanguage::Cpp, "preproc_include") => {
                if let Some(path) = node.child_by_field_name("path") {
                    found = matches(tree.text(path));
                }
                false
            }
            _ => true,
        }
    });
    found
}
