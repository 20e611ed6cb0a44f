use crate::syntax::{parse_source, SyntaxTree};
use crate::{ByteSpan, SubjectLanguage};

/// A code fragment parsed inside whatever scaffolding made it parse best.
/// `scope` is the byte range of the original text within the parsed source.
pub(crate) struct Fragment {
    pub tree: SyntaxTree,
    pub scope: ByteSpan,
}

/// Parses a function, a bare body (`{ ... }`) or a run of statements.
pub(crate) fn parse_fragment(text: &str, lang: SubjectLanguage) -> Fragment {
    let starts_block = text.trim_start().starts_with('{');
    let wrappers: &[(&str, &str)] = match (lang, starts_block) {
        (SubjectLanguage::Go, true) => &[("package p\nfunc _() ", "\n"), ("package p\n", "\n")],
        (SubjectLanguage::Go, false) => {
            &[("package p\n", "\n"), ("package p\nfunc _() {\n", "\n}\n")]
        }
        (SubjectLanguage::Cpp, true) => &[("void _() ", "\n"), ("", "\n")],
        (SubjectLanguage::Cpp, false) => &[("", "\n"), ("void _() {\n", "\n}\n")],
    };
    let mut first = None;
    for (head, tail) in wrappers {
        let tree = parse_source(&format!("{head}{text}{tail}"), lang);
        let frag = Fragment {
            scope: ByteSpan::new(head.len(), head.len() + text.len()),
            tree,
        };
        if !frag.tree.has_error() {
            return frag;
        }
        first.get_or_insert(frag);
    }
    first.expect("at least one wrapper")
}
