use std::collections::HashMap;

use tree_sitter::Node;

use super::fragment::parse_fragment;
use crate::syntax::{
    children_by_field, cpp_unwrap_declarator, named_children, walk_preorder, SyntaxTree,
};
use crate::SubjectLanguage;

/// One dataflow fact over normalized variable slots (numbered by first definition).
///
/// Every definition is an edge into its target from the variables its value was
/// computed from (none for constants and parameters); every other read of a known
/// variable is a use edge from its current definition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowEdge {
    Def { target: usize, sources: Vec<usize> },
    Use { slot: usize },
}

/// |matched edges| / |reference edges| with multiset matching; `None` when the
/// reference defines no variables.
pub fn dataflow_match(candidate: &str, reference: &str, lang: SubjectLanguage) -> Option<f64> {
    let refs = dataflow_edges(reference, lang);
    if refs.is_empty() {
        return None;
    }
    let mut pool: HashMap<FlowEdge, usize> = HashMap::new();
    if !candidate.trim().is_empty() {
        for e in dataflow_edges(candidate, lang) {
            *pool.entry(e).or_insert(0) += 1;
        }
    }
    let mut hit = 0;
    for e in &refs {
        if let Some(n) = pool.get_mut(e).filter(|n| **n > 0) {
            *n -= 1;
            hit += 1;
        }
    }
    Some(hit as f64 / refs.len() as f64)
}

pub fn dataflow_edges(text: &str, lang: SubjectLanguage) -> Vec<FlowEdge> {
    let frag = parse_fragment(text, lang);
    let mut walker = Walker {
        tree: &frag.tree,
        lang,
        slots: HashMap::new(),
        edges: Vec::new(),
    };
    walker.visit(frag.tree.root());
    walker.edges
}

struct Walker<'a> {
    tree: &'a SyntaxTree,
    lang: SubjectLanguage,
    slots: HashMap<String, usize>,
    edges: Vec<FlowEdge>,
}

/// Definitions found at one node: (targets, value expressions) groups, plus child
/// nodes that are not part of any binding and still need an ordinary visit.
#[derive(Default)]
struct Defs<'a> {
    bindings: Vec<(Vec<Node<'a>>, Vec<Node<'a>>)>,
    rest: Vec<Node<'a>>,
}

impl<'a> Defs<'a> {
    fn single(targets: Vec<Node<'a>>, values: Vec<Node<'a>>) -> Self {
        Defs {
            bindings: vec![(targets, values)],
            rest: Vec::new(),
        }
    }
}

impl<'a> Walker<'a> {
    fn visit(&mut self, root: Node<'a>) {
        walk_preorder(root, &mut |node| {
            if node.is_error() {
                return false;
            }
            let defs = match self.lang {
                SubjectLanguage::Go => self.go_defs(node),
                SubjectLanguage::Cpp => self.cpp_defs(node),
            };
            match defs {
                Some(defs) => {
                    for (targets, values) in &defs.bindings {
                        self.define(targets, values);
                    }
                    for n in defs.rest {
                        self.visit(n);
                    }
                    false
                }
                None => {
                    if node.kind() == "identifier" {
                        if let Some(&slot) = self.slots.get(self.tree.text(node)) {
                            self.edges.push(FlowEdge::Use { slot });
                        }
                    }
                    true
                }
            }
        });
    }

    fn define(&mut self, targets: &[Node<'a>], values: &[Node<'a>]) {
        let mut sources: Vec<usize> = Vec::new();
        for v in values {
            walk_preorder(*v, &mut |n| {
                if n.kind() == "identifier" {
                    if let Some(&slot) = self.slots.get(self.tree.text(n)) {
                        sources.push(slot);
                    }
                }
                true
            });
        }
        sources.sort_unstable();
        sources.dedup();
        for t in targets {
            let name = self.tree.text(*t);
            if name == "_" {
                continue;
            }
            let next = self.slots.len();
            let target = *self.slots.entry(name.to_string()).or_insert(next);
            self.edges.push(FlowEdge::Def {
                target,
                sources: sources.clone(),
            });
        }
    }

    /// Pairs targets with values one-to-one when the counts agree (`a, b := x, y`);
    /// otherwise every target depends on every value (`a, b := f(x)`). Targets that
    /// are not plain identifiers (`a.b`, `a[i]`) are visited for ordinary uses.
    fn bind(targets: Vec<Node<'a>>, values: Vec<Node<'a>>, compound: bool) -> Defs<'a> {
        let (plain, rest): (Vec<Node<'a>>, Vec<Node<'a>>) =
            targets.iter().partition(|n| n.kind() == "identifier");
        let mut defs = Defs {
            rest,
            ..Defs::default()
        };
        let values_of = |vs: Vec<Node<'a>>, t: Node<'a>| {
            let mut vs = vs;
            if compound {
                vs.push(t);
            }
            vs
        };
        if targets.len() == values.len() {
            for (t, v) in targets.into_iter().zip(values) {
                if t.kind() == "identifier" {
                    defs.bindings.push((vec![t], values_of(vec![v], t)));
                } else {
                    defs.rest.push(v);
                }
            }
        } else if !plain.is_empty() {
            let mut vs = values;
            if compound {
                vs.extend(plain.iter().copied());
            }
            defs.bindings.push((plain, vs));
        } else {
            defs.rest.extend(values);
        }
        defs
    }

    fn go_defs(&self, node: Node<'a>) -> Option<Defs<'a>> {
        let list = |field: &str| -> Vec<Node<'a>> {
            children_by_field(node, field)
                .into_iter()
                .flat_map(|n| {
                    if n.kind() == "expression_list" {
                        named_children(n)
                    } else {
                        vec![n]
                    }
                })
                .collect()
        };
        match node.kind() {
            "short_var_declaration" => Some(Self::bind(list("left"), list("right"), false)),
            "range_clause" => {
                let right = list("right");
                Some(Self::bind(list("left"), right, false).spread())
            }
            "assignment_statement" => {
                let compound = node
                    .child_by_field_name("operator")
                    .is_some_and(|op| self.tree.text(op) != "=");
                Some(Self::bind(list("left"), list("right"), compound))
            }
            "var_spec" | "const_spec" => {
                let names = list("name");
                let values = list("value");
                if values.is_empty() {
                    Some(Defs::single(names, Vec::new()))
                } else {
                    Some(Self::bind(names, values, false))
                }
            }
            "parameter_declaration" | "variadic_parameter_declaration" => {
                Some(Defs::single(list("name"), Vec::new()))
            }
            "inc_statement" | "dec_statement" => {
                Some(Self::bind(named_children(node), Vec::new(), true))
            }
            _ => None,
        }
    }

    fn cpp_defs(&self, node: Node<'a>) -> Option<Defs<'a>> {
        let ident = |n: Node<'a>| {
            let (inner, _) = cpp_unwrap_declarator(n);
            (inner.kind() == "identifier").then_some(inner)
        };
        match node.kind() {
            "declaration" | "field_declaration" => {
                let mut defs = Defs::default();
                for d in children_by_field(node, "declarator") {
                    if d.kind() == "init_declarator" {
                        let value: Vec<Node<'a>> =
                            d.child_by_field_name("value").into_iter().collect();
                        match d.child_by_field_name("declarator").and_then(ident) {
                            Some(t) => defs.bindings.push((vec![t], value)),
                            None => defs.rest.extend(value),
                        }
                    } else if let Some(t) = ident(d) {
                        defs.bindings.push((vec![t], Vec::new()));
                    }
                }
                (!defs.bindings.is_empty() || !defs.rest.is_empty()).then_some(defs)
            }
            "assignment_expression" => {
                let left = node.child_by_field_name("left")?;
                let right: Vec<Node<'a>> = node.child_by_field_name("right").into_iter().collect();
                let compound = node
                    .child_by_field_name("operator")
                    .is_some_and(|op| self.tree.text(op) != "=");
                Some(Self::bind(vec![left], right, compound))
            }
            "update_expression" => {
                let arg = node.child_by_field_name("argument")?;
                Some(Self::bind(vec![arg], Vec::new(), true).spread())
            }
            "parameter_declaration" | "optional_parameter_declaration" => {
                let t: Vec<Node<'a>> = node
                    .child_by_field_name("declarator")
                    .and_then(ident)
                    .into_iter()
                    .collect();
                let value = node
                    .child_by_field_name("default_value")
                    .into_iter()
                    .collect();
                Some(Defs::single(t, value))
            }
            "for_range_loop" => {
                let t: Vec<Node<'a>> = node
                    .child_by_field_name("declarator")
                    .and_then(ident)
                    .into_iter()
                    .collect();
                let right = node.child_by_field_name("right").into_iter().collect();
                let mut defs = Defs::single(t, right);
                defs.rest.extend(node.child_by_field_name("body"));
                Some(defs)
            }
            _ => None,
        }
    }
}

impl<'a> Defs<'a> {
    /// Collapses the bindings so every target depends on every value
    /// (`for k, v := range m`, `x++`).
    fn spread(mut self) -> Self {
        let mut targets = Vec::new();
        let mut values = Vec::new();
        for (t, v) in self.bindings.drain(..) {
            targets.extend(t);
            values.extend(v);
        }
        if !targets.is_empty() {
            self.bindings.push((targets, values));
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(c: &str, r: &str) -> Option<f64> {
        dataflow_match(c, r, SubjectLanguage::Go)
    }

    #[test]
    fn hand_drawn_example() {
        // reference: x <- const, y <- x; candidate: x <- const, y <- const
        assert_eq!(
            go("{\n\tx := 1\n\ty := 2\n}", "{\n\tx := 1\n\ty := x\n}"),
            Some(0.5)
        );
    }

    #[test]
    fn edges_of_small_function() {
        let edges = dataflow_edges("{\n\tx := 1\n\ty := x\n\treturn y\n}", SubjectLanguage::Go);
        assert_eq!(
            edges,
            vec![
                FlowEdge::Def {
                    target: 0,
                    sources: vec![]
                },
                FlowEdge::Def {
                    target: 1,
                    sources: vec![0]
                },
                FlowEdge::Use { slot: 1 },
            ]
        );
    }

    #[test]
    fn identity_and_renaming() {
        let r = "func f(c *gin.Context) {\n\tid := c.Param(\"id\")\n\tn := len(id)\n\tn += 1\n\tc.JSON(200, n)\n}";
        let renamed = "func g(ctx *gin.Context) {\n\tkey := ctx.Param(\"id\")\n\tm := len(key)\n\tm += 1\n\tctx.JSON(200, m)\n}";
        assert_eq!(go(r, r), Some(1.0));
        assert_eq!(go(renamed, r), Some(1.0));
    }

    #[test]
    fn no_variables_is_excluded() {
        assert_eq!(go("{\n\tfoo()\n}", "{\n\tbar()\n}"), None);
    }

    #[test]
    fn empty_candidate_is_zero() {
        assert_eq!(go("", "{\n\tx := 1\n}"), Some(0.0));
    }

    #[test]
    fn cpp_flow() {
        let r = "void f(int a) {\n    int b = a * 2, c;\n    c = b;\n    for (auto s : items) { use(s, c); }\n}";
        let edges = dataflow_edges(r, SubjectLanguage::Cpp);
        assert_eq!(
            edges,
            vec![
                FlowEdge::Def {
                    target: 0,
                    sources: vec![]
                },
                FlowEdge::Def {
                    target: 1,
                    sources: vec![0]
                },
                FlowEdge::Def {
                    target: 2,
                    sources: vec![]
                },
                FlowEdge::Def {
                    target: 2,
                    sources: vec![1]
                },
                FlowEdge::Def {
                    target: 3,
                    sources: vec![]
                },
                FlowEdge::Use { slot: 3 },
                FlowEdge::Use { slot: 2 },
            ]
        );
        assert_eq!(dataflow_match(r, r, SubjectLanguage::Cpp), Some(1.0));
    }
}
