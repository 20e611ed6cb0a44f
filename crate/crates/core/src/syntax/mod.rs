//! Grammar-based parsing of Go and C++ sources.
//!
//! Parsing is backed by tree-sitter. Trees tolerate syntax errors: regions the
//! grammar cannot recover are reported as error nodes and the functions inside
//! them are skipped by [`extract_functions`].

mod calls;
mod docs;
mod functions;

use tree_sitter::{Node, Parser, Tree};

use crate::{Result, SubjectLanguage};

pub use calls::{extract_api_calls, uses_library, ApiCall};
pub use docs::{documented_apis, embedded_types, DocumentedApi};
pub(crate) use functions::cpp_unwrap_declarator;
pub use functions::{
    collect_typed_variables, extract_functions, extract_functions_detailed, FunctionExtraction,
    FunctionSpan, TypedVar,
};

/// A parsed source file. Owns its text so spans can always be resolved.
pub struct SyntaxTree {
    tree: Tree,
    source: String,
    language: SubjectLanguage,
}

impl std::fmt::Debug for SyntaxTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SyntaxTree")
            .field("language", &self.language)
            .field("len", &self.source.len())
            .field("has_error", &self.has_error())
            .finish()
    }
}

impl SyntaxTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn language(&self) -> SubjectLanguage {
        self.language
    }

    pub fn has_error(&self) -> bool {
        self.tree.root_node().has_error()
    }

    pub(crate) fn root(&self) -> Node<'_> {
        self.tree.root_node()
    }

    pub(crate) fn text(&self, node: Node<'_>) -> &str {
        &self.source[node.byte_range()]
    }

    /// Tree-sitter S-expression of the whole tree, mostly for debugging.
    pub fn to_sexp(&self) -> String {
        self.tree.root_node().to_sexp()
    }
}

/// Parses `text` as `language`. Syntax errors never fail the parse.
pub fn parse_source(text: &str, language: SubjectLanguage) -> SyntaxTree {
    let mut parser = Parser::new();
    parser
        .set_language(&language.grammar())
        .expect("bundled grammar is ABI compatible");
    let tree = parser
        .parse(text, None)
        .expect("parser has a language and no cancellation");
    SyntaxTree {
        tree,
        source: text.to_string(),
        language,
    }
}

/// Like [`parse_source`] but validates the encoding first.
pub fn parse_bytes(bytes: &[u8], language: SubjectLanguage) -> Result<SyntaxTree> {
    let text = std::str::from_utf8(bytes)?;
    Ok(parse_source(text, language))
}

pub(crate) fn named_children<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

pub(crate) fn children<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.children(&mut cursor).collect()
}

pub(crate) fn children_by_field<'t>(node: Node<'t>, field: &str) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.children_by_field_name(field, &mut cursor).collect()
}

/// Pre-order walk over every node below (and including) `node`.
pub(crate) fn walk_preorder<'t>(node: Node<'t>, visit: &mut impl FnMut(Node<'t>) -> bool) {
    if !visit(node) {
        return;
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        walk_preorder(child, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_go_function() {
        let tree = parse_source("package p\nfunc f() {}\n", SubjectLanguage::Go);
        assert!(!tree.has_error());
        assert_eq!(extract_functions(&tree).len(), 1);
    }

    #[test]
    fn empty_source_has_no_functions() {
        let tree = parse_source("", SubjectLanguage::Go);
        assert!(extract_functions(&tree).is_empty());
        let tree = parse_source("", SubjectLanguage::Cpp);
        assert!(extract_functions(&tree).is_empty());
    }

    #[test]
    fn bare_go_function_without_package() {
        let tree = parse_source("func f() {}", SubjectLanguage::Go);
        let fns = extract_functions(&tree);
        assert_eq!(fns.len(), 1);
        assert_eq!(fns[0].name, "f");
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        assert!(parse_bytes(&[0x66, 0xff, 0xfe], SubjectLanguage::Go).is_err());
    }

    #[test]
    fn reparse_is_stable() {
        let src = "package p\nfunc a() { x := 1\n_ = x }\nfunc b() {}\n";
        let a = parse_source(src, SubjectLanguage::Go);
        let b = parse_source(src, SubjectLanguage::Go);
        assert_eq!(a.to_sexp(), b.to_sexp());
        assert_eq!(extract_functions(&a), extract_functions(&b));
    }
}
