use std::collections::HashSet;

use tree_sitter::Node;

use super::fragment::parse_fragment;
use crate::syntax::named_children;
use crate::SubjectLanguage;

/// Fraction of the reference's AST subtrees (named nodes with at least one named
/// child, serialized by node kind only) that also occur in the candidate.
/// Subtrees containing parse errors are skipped on both sides.
pub fn syntax_match(candidate: &str, reference: &str, lang: SubjectLanguage) -> f64 {
    if candidate.trim().is_empty() {
        return 0.0;
    }
    let cand: HashSet<String> = subtrees(candidate, lang).into_iter().collect();
    let refs = subtrees(reference, lang);
    if refs.is_empty() {
        return 1.0;
    }
    let hit = refs.iter().filter(|s| cand.contains(*s)).count();
    hit as f64 / refs.len() as f64
}

pub(crate) fn subtrees(text: &str, lang: SubjectLanguage) -> Vec<String> {
    let frag = parse_fragment(text, lang);
    let mut out = Vec::new();
    let mut stack = vec![frag.tree.root()];
    while let Some(node) = stack.pop() {
        if node.is_error() || node.is_missing() {
            continue;
        }
        let kids = named_children(node);
        let inside = node.start_byte() >= frag.scope.start && node.end_byte() <= frag.scope.end;
        if inside && !kids.is_empty() && !node.has_error() {
            out.push(serialize(node));
        }
        stack.extend(kids.into_iter().rev());
    }
    out
}

fn serialize(node: Node<'_>) -> String {
    let kids = named_children(node);
    if kids.is_empty() {
        return node.kind().to_string();
    }
    let inner: Vec<String> = kids.into_iter().map(serialize).collect();
    format!("({} {})", node.kind(), inner.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GO_REF: &str = "{\n\tr := gin.Default()\n\tr.GET(\"/\", h)\n\treturn r\n}";

    #[test]
    fn identical_is_one() {
        assert_eq!(syntax_match(GO_REF, GO_REF, SubjectLanguage::Go), 1.0);
        let cpp = "void f(int a) {\n    auto s = cocos2d::Sprite::create(\"a.png\");\n    s->setPosition(a, 1);\n}";
        assert_eq!(syntax_match(cpp, cpp, SubjectLanguage::Cpp), 1.0);
    }

    #[test]
    fn empty_candidate_is_zero() {
        assert_eq!(syntax_match("", GO_REF, SubjectLanguage::Go), 0.0);
    }

    #[test]
    fn renaming_is_invisible() {
        let renamed = "{\n\tengine := gin.New()\n\tengine.POST(\"/x\", other)\n\treturn engine\n}";
        assert_eq!(syntax_match(renamed, GO_REF, SubjectLanguage::Go), 1.0);
    }

    #[test]
    fn partial_overlap_in_range() {
        let cand = "{\n\tr := gin.Default()\n}";
        let v = syntax_match(cand, GO_REF, SubjectLanguage::Go);
        assert!(v > 0.0 && v < 1.0, "{v}");
    }

    #[test]
    fn broken_candidate_still_scores() {
        let cand = "{\n\tr := gin.Default()\n\tr.GET(\"/\", \n}";
        let v = syntax_match(cand, GO_REF, SubjectLanguage::Go);
        assert!((0.0..1.0).contains(&v));
    }
}
