use alloc::string::String;

use super::*;

fn sexp(ast: &NormalizedAst) -> String {
    fn go(ast: &NormalizedAst, id: usize, out: &mut String) {
        let n = ast.node(id);
        if n.is_leaf() {
            out.push_str(&n.kind);
            return;
        }
        out.push('(');
        out.push_str(&n.kind);
        for &c in &n.children {
            out.push(' ');
            go(ast, c, out);
        }
        out.push(')');
    }
    let mut out = String::new();
    go(ast, ast.root, &mut out);
    out
}

fn py(src: &str) -> NormalizedAst {
    let ast = parse_source("t", Language::Python, src).unwrap();
    ast.validate(src).unwrap();
    ast
}

fn java(src: &str) -> NormalizedAst {
    let ast = parse_source("t", Language::Java, src).unwrap();
    ast.validate(src).unwrap();
    ast
}

#[test]
fn python_assignment_and_call() {
    let ast = py("num = 5\nprint(\"hello\", num)\n");
    assert_eq!(
        sexp(&ast),
        "(module (expression_statement (assignment identifier = integer)) \
         (expression_statement (call identifier (argument_list ( string , identifier )))))"
    );
    assert_eq!(ast.nodes.len(), 15);
    assert_eq!(ast.leaves().count(), 9);
}

#[test]
fn python_function_with_control_flow() {
    let src = "def f(a, b=2):\n    if a > b:\n        return a\n    elif a == b:\n        pass\n    else:\n        return b\n";
    let ast = py(src);
    let s = sexp(&ast);
    assert!(s.starts_with("(module (function_definition def identifier (parameters ( identifier , (default_parameter identifier = integer) ))"));
    assert!(s.contains("(elif_clause elif (comparison_operator identifier == identifier)"));
    assert!(s.contains("(else_clause else :"));
}

#[test]
fn python_comparison_merges_two_word_operators() {
    let ast = py("x = a not in b\ny = a is not None\n");
    let ops: Vec<&str> = ast
        .leaves()
        .filter_map(|n| n.token_text.as_deref())
        .filter(|t| t.contains(' '))
        .collect();
    assert_eq!(ops, ["not in", "is not"]);
}

#[test]
fn python_comments_and_blank_lines_are_invisible() {
    let a = py("x = 1\ny = x + 2\n");
    let b = py("# header\nx = 1  # one\n\n\ny = x + 2\n");
    assert_eq!(sexp(&a), sexp(&b));
}

#[test]
fn python_loops_comprehensions_and_lambdas() {
    let ast = py("for i, v in enumerate(xs):\n    total += v\nsq = [x * x for x in xs if x]\nf = lambda y: y + 1\n");
    let s = sexp(&ast);
    assert!(s.contains("(for_statement for (pattern_list identifier , identifier) in"));
    assert!(s.contains("(list_comprehension [ (binary_operator identifier * identifier) (for_in_clause for identifier in identifier) (if_clause if identifier) ])"));
    assert!(s.contains("(lambda lambda (lambda_parameters identifier) : (binary_operator identifier + integer))"));
}

#[test]
fn python_class_try_with() {
    let src = "class A(B):\n    def m(self):\n        try:\n            with open(p) as fh:\n                return fh.read()\n        except IOError as e:\n            raise\n        finally:\n            pass\n";
    let s = sexp(&py(src));
    assert!(s.contains("(class_definition class identifier (argument_list ( identifier ))"));
    assert!(s.contains("(with_statement with (with_clause (with_item"));
    assert!(s.contains("(except_clause except"));
    assert!(s.contains("(finally_clause finally"));
}

#[test]
fn python_syntax_errors_carry_offsets() {
    let err = parse_source("t", Language::Python, "x = (1 +\n").unwrap_err();
    assert!(err.offset().is_some());
    let err = parse_source("t", Language::Python, "def f(:):\n    pass\n").unwrap_err();
    assert!(matches!(err, ParseError::Syntax { offset: 6, .. }), "{err:?}");
    assert_eq!(parse_source("t", Language::Python, "  \n\n").unwrap_err(), ParseError::EmptySource);
    assert_eq!(parse_source("t", Language::Python, "# only a comment\n").unwrap_err(), ParseError::EmptySource);
}

#[test]
fn invalid_utf8_is_rejected_at_first_bad_byte() {
    let err = parse_bytes("t", Language::Python, b"x = 1\n\xff\n").unwrap_err();
    assert_eq!(err, ParseError::InvalidUtf8 { offset: 6 });
}

#[test]
fn java_method_with_qualified_call() {
    let src = "public static void hello(String name) {\n    System.out.println(\"hello, \" + name);\n}\n";
    let s = sexp(&java(src));
    assert_eq!(
        s,
        "(program (method_declaration (modifiers public static) void_type identifier \
         (formal_parameters ( (formal_parameter type_identifier identifier) )) \
         (block { (expression_statement (method_invocation (field_access (field_access identifier . identifier) . identifier) \
         (argument_list ( (binary_expression string_literal + identifier) ))) ;) })))"
    );
}

#[test]
fn java_declarations_loops_and_updates() {
    let src = "int sum(int[] xs) {\n  int total = 0;\n  for (int i = 0; i < xs.length; i++) { total += xs[i]; }\n  for (int x : xs) total = total + x;\n  return total;\n}\n";
    let s = sexp(&java(src));
    assert!(s.contains("(local_variable_declaration integral_type (variable_declarator identifier = decimal_integer_literal) ;)"));
    assert!(s.contains("(update_expression identifier ++)"));
    assert!(s.contains("(augmented_assignment identifier += (array_access identifier [ identifier ]))"));
    assert!(s.contains("(enhanced_for_statement for ( integral_type identifier : identifier )"));
}

#[test]
fn java_generics_casts_and_shifts() {
    let src = "void f(Map<String, List<Integer>> m) {\n  int a = (int) x >> 2;\n  long b = y >>> 3;\n  a >>= 1;\n  boolean c = a >= b;\n  List<String> l = new ArrayList<>();\n}\n";
    let ast = java(src);
    let s = sexp(&ast);
    assert!(s.contains("(binary_expression (cast_expression ( integral_type ) identifier) >> decimal_integer_literal)"));
    assert!(s.contains("(binary_expression identifier >>> decimal_integer_literal)"));
    assert!(s.contains("(augmented_assignment identifier >>= decimal_integer_literal)"));
    assert!(s.contains("(binary_expression identifier >= identifier)"));
    assert!(s.contains("(object_creation_expression new identifier (type_arguments < >) (argument_list ( )))"));
}

#[test]
fn java_parenthesized_expression_is_not_a_cast() {
    let s = sexp(&java("int f() { return (a) + b; }"));
    assert!(s.contains("(binary_expression (parenthesized_expression ( identifier )) + identifier)"), "{s}");
}

#[test]
fn java_class_try_catch_and_switch() {
    let src = "class A extends B implements C {\n  private int n;\n  A(int n) { this.n = n; }\n  int g() {\n    try { return h(); } catch (IOException | RuntimeException e) { return -1; } finally { n++; }\n  }\n  int k(int x) { switch (x) { case 1: return 2; default: return 0; } }\n}\n";
    let s = sexp(&java(src));
    assert!(s.contains("(class_declaration class identifier (superclass extends type_identifier) (super_interfaces implements type_identifier)"));
    assert!(s.contains("(constructor_declaration identifier (formal_parameters"));
    assert!(s.contains("(assignment_expression (field_access this . identifier) = identifier)"));
    assert!(s.contains("(catch_clause catch ( (catch_formal_parameter (catch_type type_identifier | type_identifier) identifier) )"));
    assert!(s.contains("(switch_statement switch"));
}

#[test]
fn java_compilation_unit_with_imports() {
    let src = "package a.b;\nimport java.util.*;\nimport java.io.File;\npublic class X { public static void main(String[] args) { System.out.println(1); } }\n";
    let s = sexp(&java(src));
    assert!(s.starts_with("(program (package_declaration package (scoped_identifier identifier . identifier) ;) (import_declaration import"));
}

#[test]
fn java_loose_statements_parse_as_program() {
    let s = sexp(&java("int x = 1;\nx = x * 2;\nfoo(x);\n"));
    assert_eq!(
        s,
        "(program (local_variable_declaration integral_type (variable_declarator identifier = decimal_integer_literal) ;) \
         (expression_statement (assignment_expression identifier = (binary_expression identifier * decimal_integer_literal)) ;) \
         (expression_statement (method_invocation identifier (argument_list ( identifier ))) ;))"
    );
}

#[test]
fn java_comments_are_invisible() {
    let a = java("int f() { return 1; }");
    let b = java("/** doc */ int f() { // one\n return /* inline */ 1; }");
    assert_eq!(sexp(&a), sexp(&b));
}

#[test]
fn java_errors() {
    assert!(matches!(
        parse_source("t", Language::Java, "int f() { return 1 }").unwrap_err(),
        ParseError::Syntax { .. }
    ));
    assert!(parse_source("t", Language::Java, "void f() { int x = ; }").is_err());
    assert!(parse_source("t", Language::Java, "void f() { \"unterminated }").is_err());
    assert_eq!(parse_source("t", Language::Java, "// nothing\n").unwrap_err(), ParseError::EmptySource);
}

#[test]
fn language_round_trips() {
    for lang in [Language::Java, Language::Python] {
        assert_eq!(lang.as_str().parse::<Language>().unwrap(), lang);
        assert_eq!(Language::from_extension(lang.extension()), Some(lang));
    }
    assert!(matches!("cobol".parse::<Language>(), Err(ParseError::UnsupportedLanguage(_))));
}

#[test]
fn static_metrics_count_lines_and_bytes() {
    let unit = SourceUnit::new("u", Language::Python, "a = 1\nb = 2\n", "c");
    assert_eq!(static_metrics(&unit), StaticMetrics { lines: 2, chars: 12 });
}
