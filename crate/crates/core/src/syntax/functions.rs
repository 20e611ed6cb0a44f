use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::calls::Resolver;
use super::{children_by_field, named_children, walk_preorder, SyntaxTree};
use crate::{ByteSpan, LibrarySpec, SubjectLanguage};

/// A `<variable name, variable type>` pair found in a function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedVar {
    pub name: String,
    /// Literal type text from source, with declarator sigils folded in (`cocos2d::Sprite*`).
    pub type_text: String,
    /// Byte offset (in the file) where the variable comes into scope.
    pub declared_at: usize,
}

impl TypedVar {
    fn new(name: &str, type_text: impl Into<String>, declared_at: usize) -> Self {
        Self {
            name: name.to_string(),
            type_text: type_text.into(),
            declared_at,
        }
    }
}

/// One top-level function or method definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpan {
    pub name: String,
    /// Enclosing type for methods (Go receiver base type, C++ class or `Class::` qualifier).
    pub owner: Option<String>,
    /// Whole definition, from the first token of the signature to the closing brace.
    pub span: ByteSpan,
    /// From the start of the definition up to (excluding) the body's opening brace.
    pub signature_span: ByteSpan,
    pub body_span: ByteSpan,
    pub params: Vec<TypedVar>,
    pub full_text: String,
}

impl FunctionSpan {
    /// Signature text including any whitespace separating it from the body.
    pub fn signature<'a>(&self, source: &'a str) -> &'a str {
        self.signature_span.slice(source)
    }

    pub fn body<'a>(&self, source: &'a str) -> &'a str {
        self.body_span.slice(source)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionExtraction {
    pub functions: Vec<FunctionSpan>,
    /// Function definitions (or unrecoverable regions) skipped because of parse errors.
    pub dropped: usize,
}

/// Every top-level function and method in source order. Closures and lambdas are not
/// extracted on their own.
pub fn extract_functions(tree: &SyntaxTree) -> Vec<FunctionSpan> {
    extract_functions_detailed(tree).functions
}

pub fn extract_functions_detailed(tree: &SyntaxTree) -> FunctionExtraction {
    let mut out = FunctionExtraction::default();
    let root = tree.root();
    match tree.language() {
        SubjectLanguage::Go => {
            for node in named_children(root) {
                match node.kind() {
                    "function_declaration" | "method_declaration" => {
                        if node.has_error() {
                            out.dropped += 1;
                        } else if let Some(f) = go_function(tree, node) {
                            out.functions.push(f);
                        }
                    }
                    "ERROR" => out.dropped += 1,
                    _ => {}
                }
            }
        }
        SubjectLanguage::Cpp => cpp_collect(tree, root, None, &mut out),
    }
    out
}

fn split_definition(
    node: Node<'_>,
    body: Node<'_>,
    tree: &SyntaxTree,
) -> (ByteSpan, ByteSpan, ByteSpan, String) {
    let span = ByteSpan::new(node.start_byte(), body.end_byte());
    let signature = ByteSpan::new(node.start_byte(), body.start_byte());
    let body_span = ByteSpan::new(body.start_byte(), body.end_byte());
    let full_text = span.slice(tree.source()).to_string();
    (span, signature, body_span, full_text)
}

fn go_function(tree: &SyntaxTree, node: Node<'_>) -> Option<FunctionSpan> {
    let name = tree.text(node.child_by_field_name("name")?).to_string();
    let body = node.child_by_field_name("body")?;
    let mut params = Vec::new();
    let mut owner = None;
    if let Some(receiver) = node.child_by_field_name("receiver") {
        let recv = go_parameters(tree, receiver, node.start_byte());
        owner = recv
            .first()
            .map(|p| LibrarySpec::type_base(&p.type_text))
            .or_else(|| {
                // receiver without a name: `func (*T) M()`
                named_children(receiver)
                    .first()
                    .and_then(|d| d.child_by_field_name("type"))
                    .map(|t| LibrarySpec::type_base(tree.text(t)))
            });
        params.extend(recv);
    }
    if let Some(list) = node.child_by_field_name("parameters") {
        params.extend(go_parameters(tree, list, node.start_byte()));
    }
    let (span, signature_span, body_span, full_text) = split_definition(node, body, tree);
    Some(FunctionSpan {
        name,
        owner,
        span,
        signature_span,
        body_span,
        params,
        full_text,
    })
}

fn go_parameters(tree: &SyntaxTree, list: Node<'_>, at: usize) -> Vec<TypedVar> {
    let mut out = Vec::new();
    for decl in named_children(list) {
        let Some(ty) = decl.child_by_field_name("type") else {
            continue;
        };
        let mut type_text = tree.text(ty).to_string();
        if decl.kind() == "variadic_parameter_declaration" {
            type_text = format!("...{type_text}");
        }
        for name in children_by_field(decl, "name") {
            out.push(TypedVar::new(tree.text(name), type_text.clone(), at));
        }
    }
    out
}

fn cpp_collect(
    tree: &SyntaxTree,
    node: Node<'_>,
    class: Option<&str>,
    out: &mut FunctionExtraction,
) {
    for child in named_children(node) {
        match child.kind() {
            "function_definition" => {
                if child.has_error() {
                    out.dropped += 1;
                } else if let Some(f) = cpp_function(tree, child, class) {
                    out.functions.push(f);
                }
            }
            "template_declaration"
            | "linkage_specification"
            | "preproc_ifdef"
            | "preproc_if"
            | "preproc_else"
            | "preproc_elif"
            | "declaration_list" => cpp_collect(tree, child, class, out),
            "namespace_definition" => {
                if let Some(body) = child.child_by_field_name("body") {
                    cpp_collect(tree, body, class, out);
                }
            }
            "class_specifier" | "struct_specifier" => {
                let name = child.child_by_field_name("name").map(|n| tree.text(n));
                if let Some(body) = child.child_by_field_name("body") {
                    cpp_collect(tree, body, name.or(class), out);
                }
            }
            "ERROR" => out.dropped += 1,
            _ => {}
        }
    }
}

/// Peels pointer/reference declarators, collecting their sigils.
pub(crate) fn cpp_unwrap_declarator<'t>(mut node: Node<'t>) -> (Node<'t>, String) {
    let mut sigils = String::new();
    loop {
        match node.kind() {
            "pointer_declarator" => sigils.push('*'),
            "reference_declarator" => {
                let is_rvalue = super::children(node).iter().any(|c| c.kind() == "&&");
                sigils.push_str(if is_rvalue { "&&" } else { "&" });
            }
            "init_declarator" | "parenthesized_declarator" | "attributed_declarator" => {}
            _ => return (node, sigils),
        }
        let next = node
            .child_by_field_name("declarator")
            .or_else(|| named_children(node).into_iter().last());
        match next {
            Some(n) => node = n,
            None => return (node, sigils),
        }
    }
}

/// Splits a C++ declarator name into scope and simple name (`A::B::f` → (`A::B`, `f`)).
pub(crate) fn cpp_split_name(tree: &SyntaxTree, mut name: Node<'_>) -> (Option<String>, String) {
    let mut scope: Vec<String> = Vec::new();
    while name.kind() == "qualified_identifier" {
        if let Some(s) = name.child_by_field_name("scope") {
            scope.push(tree.text(s).to_string());
        }
        match name.child_by_field_name("name") {
            Some(n) => name = n,
            None => break,
        }
    }
    let scope = if scope.is_empty() {
        None
    } else {
        Some(scope.join("::"))
    };
    (scope, tree.text(name).to_string())
}

fn cpp_function(tree: &SyntaxTree, node: Node<'_>, class: Option<&str>) -> Option<FunctionSpan> {
    let body = node.child_by_field_name("body")?;
    if body.kind() != "compound_statement" {
        return None;
    }
    let (decl, _) = cpp_unwrap_declarator(node.child_by_field_name("declarator")?);
    if decl.kind() != "function_declarator" {
        return None;
    }
    let (scope, name) = cpp_split_name(tree, decl.child_by_field_name("declarator")?);
    if name.is_empty() {
        return None;
    }
    let owner = scope.or_else(|| class.map(str::to_string));
    let params = decl
        .child_by_field_name("parameters")
        .map(|p| cpp_parameters(tree, p, node.start_byte()))
        .unwrap_or_default();
    let (span, signature_span, body_span, full_text) = split_definition(node, body, tree);
    Some(FunctionSpan {
        name,
        owner,
        span,
        signature_span,
        body_span,
        params,
        full_text,
    })
}

pub(crate) fn cpp_parameters(tree: &SyntaxTree, list: Node<'_>, at: usize) -> Vec<TypedVar> {
    let mut out = Vec::new();
    for p in named_children(list) {
        if !matches!(
            p.kind(),
            "parameter_declaration" | "optional_parameter_declaration"
        ) {
            continue;
        }
        let (Some(ty), Some(d)) = (
            p.child_by_field_name("type"),
            p.child_by_field_name("declarator"),
        ) else {
            continue;
        };
        let (ident, sigils) = cpp_unwrap_declarator(d);
        if ident.kind() != "identifier" {
            continue;
        }
        out.push(TypedVar::new(
            tree.text(ident),
            format!("{}{}", tree.text(ty), sigils),
            at,
        ));
    }
    out
}

/// `<variable name, variable type>` pairs from parameters and local declarations.
///
/// Declarations without an explicit type (`:=`, `auto`) are typed only when the
/// initializer is a call to an API listed in the library's `type_map`, a composite
/// literal, or a `new` expression. Everything else is omitted.
pub fn collect_typed_variables(
    func: &FunctionSpan,
    tree: &SyntaxTree,
    lib: &LibrarySpec,
) -> Vec<TypedVar> {
    let mut vars = func.params.clone();
    let Some(body) = tree
        .root()
        .descendant_for_byte_range(func.body_span.start, func.body_span.end)
    else {
        return vars;
    };
    walk_preorder(body, &mut |node| {
        match (tree.language(), node.kind()) {
            (SubjectLanguage::Go, "var_spec") => go_var_spec(tree, lib, node, &mut vars),
            (SubjectLanguage::Go, "short_var_declaration") => {
                go_short_var(tree, lib, node, &mut vars)
            }
            (SubjectLanguage::Go, "func_literal") => {
                if let Some(params) = node.child_by_field_name("parameters") {
                    vars.extend(go_parameters(tree, params, node.start_byte()));
                }
            }
            (SubjectLanguage::Cpp, "declaration") => cpp_declaration(tree, lib, node, &mut vars),
            (SubjectLanguage::Cpp, "for_range_loop") => cpp_declaration(tree, lib, node, &mut vars),
            (SubjectLanguage::Cpp, "lambda_expression") => {
                if let Some(params) = node
                    .child_by_field_name("declarator")
                    .and_then(|d| d.child_by_field_name("parameters"))
                {
                    vars.extend(cpp_parameters(tree, params, node.start_byte()));
                }
            }
            _ => {}
        }
        true
    });
    vars
}

fn go_var_spec(tree: &SyntaxTree, lib: &LibrarySpec, node: Node<'_>, vars: &mut Vec<TypedVar>) {
    let names = children_by_field(node, "name");
    if let Some(ty) = node.child_by_field_name("type") {
        let type_text = tree.text(ty).to_string();
        for n in names {
            vars.push(TypedVar::new(
                tree.text(n),
                type_text.clone(),
                node.start_byte(),
            ));
        }
        return;
    }
    let values = node
        .child_by_field_name("value")
        .map(named_children)
        .unwrap_or_default();
    bind_inferred(tree, lib, node, &names, &values, vars);
}

fn go_short_var(tree: &SyntaxTree, lib: &LibrarySpec, node: Node<'_>, vars: &mut Vec<TypedVar>) {
    let names = node
        .child_by_field_name("left")
        .map(named_children)
        .unwrap_or_default();
    let values = node
        .child_by_field_name("right")
        .map(named_children)
        .unwrap_or_default();
    bind_inferred(tree, lib, node, &names, &values, vars);
}

fn bind_inferred(
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    decl: Node<'_>,
    names: &[Node<'_>],
    values: &[Node<'_>],
    vars: &mut Vec<TypedVar>,
) {
    let at = decl.end_byte();
    if names.len() == values.len() {
        for (n, v) in names.iter().zip(values) {
            if n.kind() != "identifier" || tree.text(*n) == "_" {
                continue;
            }
            if let Some(t) = infer_type(tree, lib, *v, vars, 0) {
                vars.push(TypedVar::new(tree.text(*n), t, at));
            }
        }
    } else if values.len() == 1 {
        for (i, n) in names.iter().enumerate() {
            if n.kind() != "identifier" || tree.text(*n) == "_" {
                continue;
            }
            if let Some(t) = infer_type(tree, lib, values[0], vars, i) {
                vars.push(TypedVar::new(tree.text(*n), t, at));
            }
        }
    }
}

fn infer_type(
    tree: &SyntaxTree,
    lib: &LibrarySpec,
    value: Node<'_>,
    vars: &[TypedVar],
    index: usize,
) -> Option<String> {
    match value.kind() {
        "call_expression" => {
            let resolver = Resolver::new(tree, lib, vars);
            let api = resolver.qualify_call(value)?.0;
            lib.return_types(&api)?.get(index).cloned()
        }
        "composite_literal" if index == 0 => value
            .child_by_field_name("type")
            .map(|t| tree.text(t).to_string()),
        "unary_expression" if index == 0 => {
            let operand = value.child_by_field_name("operand")?;
            let op = value.child_by_field_name("operator").map(|o| tree.text(o));
            if op == Some("&") && operand.kind() == "composite_literal" {
                let t = operand.child_by_field_name("type")?;
                Some(format!("*{}", tree.text(t)))
            } else {
                None
            }
        }
        "new_expression" if index == 0 => value
            .child_by_field_name("type")
            .map(|t| format!("{}*", tree.text(t))),
        _ => None,
    }
}

fn cpp_declaration(tree: &SyntaxTree, lib: &LibrarySpec, node: Node<'_>, vars: &mut Vec<TypedVar>) {
    let Some(ty) = node.child_by_field_name("type") else {
        return;
    };
    let is_auto = ty.kind() == "placeholder_type_specifier";
    let type_text = tree.text(ty);
    for d in children_by_field(node, "declarator") {
        let (ident, sigils) = cpp_unwrap_declarator(d);
        if ident.kind() != "identifier" {
            continue;
        }
        let name = tree.text(ident);
        if is_auto {
            let value = if d.kind() == "init_declarator" {
                d.child_by_field_name("value")
            } else {
                None
            };
            if let Some(t) = value.and_then(|v| infer_type(tree, lib, v, vars, 0)) {
                vars.push(TypedVar::new(name, t, node.end_byte()));
            }
        } else {
            vars.push(TypedVar::new(
                name,
                format!("{type_text}{sigils}"),
                node.start_byte(),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;

    fn pairs(vars: &[TypedVar]) -> Vec<(&str, &str)> {
        vars.iter()
            .map(|v| (v.name.as_str(), v.type_text.as_str()))
            .collect()
    }

    #[test]
    fn go_func_and_method() {
        let src = "package p\n\ntype S struct{}\n\nfunc F(a int) {\n\treturn\n}\n\nfunc (s *S) M() { s.x() }\n";
        let tree = parse_source(src, SubjectLanguage::Go);
        let fns = extract_functions(&tree);
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].name, "F");
        assert_eq!(fns[0].signature(src), "func F(a int) ");
        assert_eq!(fns[0].body(src), "{\n\treturn\n}");
        assert_eq!(fns[1].name, "M");
        assert_eq!(fns[1].owner.as_deref(), Some("S"));
        for f in &fns {
            assert!(f.signature_span.end <= f.body_span.start);
            assert_eq!(format!("{}{}", f.signature(src), f.body(src)), f.full_text);
        }
    }

    #[test]
    fn closure_is_not_extracted() {
        let src = "package p\nfunc F() {\n\tg := func() { println(1) }\n\tg()\n}\n";
        let tree = parse_source(src, SubjectLanguage::Go);
        let fns = extract_functions(&tree);
        assert_eq!(fns.len(), 1);
        assert_eq!(fns[0].name, "F");
    }

    #[test]
    fn cpp_free_function_and_out_of_line_method() {
        let src = "#include \"cocos2d.h\"\nint add(int a, int b) { return a + b; }\n\nbool HelloWorld::init()\n{\n    return true;\n}\n";
        let tree = parse_source(src, SubjectLanguage::Cpp);
        let fns = extract_functions(&tree);
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].name, "add");
        assert_eq!(fns[1].name, "init");
        assert_eq!(fns[1].owner.as_deref(), Some("HelloWorld"));
        assert_eq!(fns[1].signature(src), "bool HelloWorld::init()\n");
        assert!(fns[1].body(src).starts_with('{'));
    }

    #[test]
    fn cpp_functions_inside_namespace_and_guard() {
        let src = "#ifndef X_H\n#define X_H\nnamespace app {\nclass A {\n  void m() { n(); }\n};\nvoid f() {}\n}\n#endif\n";
        let tree = parse_source(src, SubjectLanguage::Cpp);
        let names: Vec<_> = extract_functions(&tree)
            .into_iter()
            .map(|f| (f.name, f.owner))
            .collect();
        assert_eq!(
            names,
            vec![
                ("m".to_string(), Some("A".to_string())),
                ("f".to_string(), None)
            ]
        );
    }

    #[test]
    fn go_parameter_types() {
        let src = "package p\nfunc Routes(r *gin.Engine) {}\n";
        let tree = parse_source(src, SubjectLanguage::Go);
        let f = &extract_functions(&tree)[0];
        let lib = LibrarySpec::builtin("gin").unwrap();
        let vars = collect_typed_variables(f, &tree, &lib);
        assert_eq!(pairs(&vars), vec![("r", "*gin.Engine")]);
    }

    #[test]
    fn go_short_var_uses_type_map() {
        let src = "package p\nfunc T(w int) {\n\tc, _ := gin.CreateTestContext(w)\n\tx := 5\n\tvar e *gin.Engine\n\th := gin.H{}\n\tu, _ := other.Make()\n}\n";
        let tree = parse_source(src, SubjectLanguage::Go);
        let f = &extract_functions(&tree)[0];
        let lib = LibrarySpec::builtin("gin").unwrap();
        let vars = collect_typed_variables(f, &tree, &lib);
        assert_eq!(
            pairs(&vars),
            vec![
                ("w", "int"),
                ("c", "*gin.Context"),
                ("e", "*gin.Engine"),
                ("h", "gin.H")
            ]
        );

        let mut no_map = lib.clone();
        no_map.type_map.clear();
        let vars = collect_typed_variables(f, &tree, &no_map);
        assert!(vars.iter().all(|v| v.name != "c"));
    }

    #[test]
    fn cpp_local_declarations() {
        let src = "void f(const std::string& name) {\n    cocos2d::Sprite* s = make();\n    auto d = cocos2d::Director::getInstance();\n    auto n = 3;\n    int a = 1, *b;\n}\n";
        let tree = parse_source(src, SubjectLanguage::Cpp);
        let f = &extract_functions(&tree)[0];
        let lib = LibrarySpec::builtin("cocos2d-x").unwrap();
        let vars = collect_typed_variables(f, &tree, &lib);
        assert_eq!(
            pairs(&vars),
            vec![
                ("name", "std::string&"),
                ("s", "cocos2d::Sprite*"),
                ("d", "cocos2d::Director*"),
                ("a", "int"),
                ("b", "int*"),
            ]
        );
    }

    #[test]
    fn syntax_error_keeps_later_functions() {
        let src = "package p\n\nfunc A() {\n\tx := 1\n\t_ = x\n}\n\nfunc B() {\n\tx := = 2\n}\n\nfunc C() {\n\tprintln(2)\n}\n";
        let tree = parse_source(src, SubjectLanguage::Go);
        let ex = extract_functions_detailed(&tree);
        let names: Vec<_> = ex.functions.iter().map(|f| f.name.as_str()).collect();
        assert!(names.contains(&"A"));
        assert!(names.contains(&"C"));
        assert!(!names.contains(&"B"));
        assert!(ex.dropped >= 1);
    }
}
