//! Tokenizer, grammar, parser and pretty-printer for the Java method subset.

mod parser;
mod token;
mod tree;

pub use parser::{parse, ParseError, MODIFIERS, PRIMITIVES};
pub use token::{is_keyword, tokenize, tokenize_lenient, LexError, Span, Token, TokenKind, KEYWORDS};
pub use tree::{Deletability, ParseNode, Rule};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn space_between(prev: &str, next: &str) -> bool {
    !matches!(next, ";" | "," | ")" | "]") && !matches!(prev, "(" | "[" | ".")
}

/// Joins token texts with the canonical whitespace policy: one space between
/// tokens, except none before `;` `,` `)` `]` and none after `(` `[` `.`.
pub fn join_tokens<'a, I>(texts: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for text in texts {
        if let Some(p) = prev {
            if space_between(p, text) {
                out.push(' ');
            }
        }
        out.push_str(text);
        prev = Some(text);
    }
    out
}

/// Renders a (possibly pruned) tree back to source text.
pub fn render(node: &ParseNode) -> String {
    join_tokens(node.frontier().into_iter().map(|t| t.text.as_str()))
}

/// True iff `source` lexes and parses as one method.
pub fn is_valid(source: &str) -> bool {
    tokenize(source).is_ok_and(|toks| parse(&toks).is_ok())
}

pub fn count_loc(source: &str) -> usize {
    source.lines().filter(|l| !l.trim().is_empty()).count()
}

/// Source text with its tokens and, when it parses, its tree.
///
/// Construction never fails: text that does not lex keeps a lenient token
/// stream (so sizes of mangled character-level candidates stay measurable)
/// along with the lexical error.
#[derive(Debug, Clone)]
pub struct Program {
    source: String,
    tokens: Vec<Token>,
    tree: Option<ParseNode>,
    loc: usize,
    error: Option<LangError>,
}

impl Program {
    pub fn new(source: impl Into<String>) -> Self {
        let source = source.into();
        let loc = count_loc(&source);
        match tokenize(&source) {
            Ok(tokens) => {
                let (tree, error) = match parse(&tokens) {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(e.into())),
                };
                Program {
                    source,
                    tokens,
                    tree,
                    loc,
                    error,
                }
            }
            Err(e) => Program {
                tokens: tokenize_lenient(&source),
                source,
                tree: None,
                loc,
                error: Some(e.into()),
            },
        }
    }

    /// Like [`Program::new`] but rejects anything that does not parse.
    pub fn parse(source: impl Into<String>) -> Result<Self, LangError> {
        let p = Program::new(source);
        match p.error {
            Some(e) => Err(e),
            None => Ok(p),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn tree(&self) -> Option<&ParseNode> {
        self.tree.as_ref()
    }

    pub fn loc(&self) -> usize {
        self.loc
    }

    pub fn error(&self) -> Option<&LangError> {
        self.error.as_ref()
    }

    pub fn lexes(&self) -> bool {
        !matches!(self.error, Some(LangError::Lex(_)))
    }

    pub fn is_valid(&self) -> bool {
        self.tree.is_some()
    }

    /// Index of the method-name token, when the program parses.
    pub fn method_name_index(&self) -> Option<usize> {
        let root = self.tree.as_ref()?;
        root.children
            .iter()
            .find(|c| c.is_leaf() && c.token.as_ref().is_some_and(Token::is_identifier))
            .map(|c| c.tokens.start)
    }

    pub fn method_name(&self) -> Option<&str> {
        self.method_name_index().map(|i| self.tokens[i].text.as_str())
    }

    /// Replaces the method-name token, keeping the rest of the text intact.
    pub fn with_method_name(&self, name: &str) -> Option<Program> {
        let span = self.tokens[self.method_name_index()?].span;
        let mut src = self.source.clone();
        src.replace_range(span.offset..span.end(), name);
        Some(Program::new(src))
    }

    /// Canonically formatted text of the token stream.
    pub fn rendered(&self) -> String {
        join_tokens(self.tokens.iter().map(|t| t.text.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = "void f(int a, int b){int temp=a; a=b; b=temp;}";
    const MAIN: &str = "public static void f(String[] args) {\n    System.setProperty(\n        Constants.DUBBO_PROPERTIES_KEY, \n        \"conf/dubbo.properties\");\n    Main.main(args);\n}";

    fn tree(src: &str) -> ParseNode {
        parse(&tokenize(src).unwrap()).unwrap()
    }

    fn child(n: &ParseNode, rule: Rule) -> &ParseNode {
        n.children.iter().find(|c| c.rule == rule).unwrap()
    }

    fn list_elements(n: &ParseNode) -> Vec<&ParseNode> {
        n.children
            .iter()
            .filter(|c| c.deletability == Deletability::ListElement)
            .collect()
    }

    #[test]
    fn smallest_method() {
        let t = tree("void f(){}");
        assert_eq!(t.rule, Rule::MethodDecl);
        assert!(child(&t, Rule::ParamList).children.is_empty());
        let block = child(&t, Rule::Block);
        assert_eq!(block.children.len(), 2); // just the braces
    }

    #[test]
    fn swap_tree_shape() {
        let t = tree(SWAP);
        let block = child(&t, Rule::Block);
        let stmts = list_elements(block);
        assert_eq!(stmts.len(), 3);
        assert_eq!(stmts[0].rule, Rule::LocalVarDecl);
        assert_eq!(stmts[1].rule, Rule::ExprStmt);
        let params = list_elements(child(&t, Rule::ParamList));
        assert_eq!(params.len(), 2);
        assert!(params.iter().all(|p| p.rule == Rule::Param));
    }

    #[test]
    fn unbalanced_brace_fails_at_end() {
        let toks = tokenize("void f(){").unwrap();
        let err = parse(&toks).unwrap_err();
        assert_eq!(err.index, toks.len());
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid("void f(String[] args){ }"));
        assert!(!is_valid("void f(String[]args){(\"\");(args);}"));
        assert!(!is_valid(""));
        assert!(is_valid(MAIN));
        // The character-level output is mangled but still well-formed.
        assert!(is_valid("d f(Sg[]r){y(C,\"\");Main(ar);}"));
    }

    #[test]
    fn render_policy() {
        assert_eq!(render(&tree("void f(){}")), "void f () { }");
        assert_eq!(
            render(&tree(SWAP)),
            "void f (int a, int b) { int temp = a; a = b; b = temp; }"
        );
        assert_eq!(
            render(&tree(MAIN)),
            "public static void f (String [] args) { System .setProperty (Constants .DUBBO_PROPERTIES_KEY, \"conf/dubbo.properties\"); Main .main (args); }"
        );
    }

    #[test]
    fn render_after_list_deletions() {
        let t = tree(SWAP);
        let block_idx = t.children.iter().position(|c| c.rule == Rule::Block).unwrap();
        let mut pruned = t.clone();
        for _ in 0..3 {
            pruned = pruned.without(&[block_idx, 1]);
        }
        let text = render(&pruned);
        assert_eq!(text, "void f (int a, int b) { }");
        assert!(is_valid(&text));

        let params_idx = t.children.iter().position(|c| c.rule == Rule::ParamList).unwrap();
        let no_params = t.without(&[params_idx, 0]).without(&[params_idx, 0]);
        let text = render(&no_params);
        assert_eq!(text, "void f () { int temp = a; a = b; b = temp; }");
        assert!(is_valid(&text));
    }

    #[test]
    fn deletability_map() {
        let t = tree("@Override public final int[] f(int x[]) throws A, B { int y = 1; if (x) g(); else h(1, 2); try { } catch (E e) { } finally { } }");
        let mut seen = Vec::new();
        t.walk(&mut |_, n| {
            if n.deletability.is_deletable() {
                seen.push((n.rule, n.deletability, n.leaf_text().map(str::to_string)));
            }
        });
        use Deletability::*;
        let expect = [
            (Rule::Annotation, ListElement, None),
            (Rule::Token, ListElement, Some("public".to_string())),
            (Rule::Token, ListElement, Some("final".to_string())),
            (Rule::Dims, Optional, None),
            (Rule::Param, ListElement, None),
            (Rule::Dims, Optional, None),
            (Rule::ThrowsClause, Optional, None),
            (Rule::Type, ListElement, None),
            (Rule::LocalVarDecl, ListElement, None),
            (Rule::Initializer, Optional, None),
            (Rule::IfStmt, ListElement, None),
            (Rule::ElseClause, Optional, None),
            (Rule::Literal, ListElement, None),
            (Rule::Literal, ListElement, None),
            (Rule::TryStmt, ListElement, None),
            (Rule::CatchClause, ListElement, None),
            (Rule::FinallyClause, Optional, None),
        ];
        assert_eq!(seen, expect);
    }

    #[test]
    fn try_head_is_required_without_finally() {
        let t = tree("void f(){ try { } catch (A a) { } catch (B b) { } }");
        let mut catches = Vec::new();
        t.walk(&mut |_, n| {
            if n.rule == Rule::CatchClause {
                catches.push(n.deletability);
            }
        });
        assert_eq!(catches, [Deletability::Required, Deletability::ListElement]);
        assert!(!is_valid("void f(){ try { } }"));
    }

    #[test]
    fn statement_expressions_only() {
        assert!(is_valid("void f(){ a = b; i++; --i; g(); new A(); super(x); super.g(); }"));
        assert!(!is_valid("void f(){ a + b; }"));
        assert!(!is_valid("void f(){ (a); }"));
        assert!(!is_valid("void f(){ 1 = a; }"));
    }

    #[test]
    fn broader_constructs() {
        let srcs = [
            "public boolean f(Object o) { if (this == o) return true; if (!(o instanceof Stock)) { return false; } Stock other = (Stock) o; return x == other.x && name.equals(other.name); }",
            "int f() { final int prime = 31; int result = 1; result = prime * result + ((name == null) ? 0 : name.hashCode()); return result; }",
            "void f(String[] a) { for (int i = 0, j = 1; i < a.length; i++, j--) { x[i] = a[i]; } for (String s : a) continue; while (true) break; do { n -= 1; } while (n > 0); }",
            "T f(Object key) throws java.io.IOException { if (key == null) throw new IllegalArgumentException(\"key\"); return (T) map.get(key); }",
            "@Test(expected = Foo.class) void f() { int[] xs = new int[10][]; long y = 0xFFL >>> 2; char c = '\\n'; }",
            "void f() { try { run(); } catch (A | B e) { log.warn(e.getMessage()); } finally { close(); } }",
        ];
        for s in srcs {
            let toks = tokenize(s).unwrap();
            if let Err(e) = parse(&toks) {
                panic!("{s}: {e}");
            }
        }
    }

    #[test]
    fn frontier_and_ranges() {
        let toks = tokenize(MAIN).unwrap();
        let t = parse(&toks).unwrap();
        let frontier: Vec<_> = t.frontier().into_iter().cloned().collect();
        assert_eq!(frontier, toks);
        t.walk(&mut |_, n| {
            if n.is_leaf() {
                assert_eq!(n.token_len(), 1);
            } else if !n.children.is_empty() {
                assert_eq!(n.tokens.start, n.children[0].tokens.start);
                assert_eq!(n.tokens.end, n.children.last().unwrap().tokens.end);
                for w in n.children.windows(2) {
                    assert_eq!(w[0].tokens.end, w[1].tokens.start);
                }
            }
            if n.deletability == Deletability::ListElement {
                // checked at the parent below
            }
            for c in &n.children {
                if c.deletability == Deletability::ListElement {
                    assert!(n.rule.is_list(), "{} under {}", c.rule, n.rule);
                }
            }
        });
    }

    #[test]
    fn method_name_normalization() {
        let p = Program::parse("public boolean equals(Object o) { return o == this; }").unwrap();
        assert_eq!(p.method_name(), Some("equals"));
        let n = p.with_method_name("f").unwrap();
        assert_eq!(n.source(), "public boolean f(Object o) { return o == this; }");
    }

    #[test]
    fn program_of_mangled_text() {
        let p = Program::new("d f(Sg[]r){y(C,\"\")Main(ar);}");
        assert!(p.lexes());
        assert!(!p.is_valid());
        let q = Program::new("a \"open");
        assert!(!q.lexes());
        assert_eq!(q.token_count(), 2);
        assert_eq!(Program::new("void f() {\n\n  x();\n}").loc(), 3);
    }

    #[test]
    fn json_dump_has_rule_and_tokens() {
        let v = tree("void f(){}").to_json();
        assert_eq!(v["rule"], "MethodDecl");
        assert_eq!(v["children"][0]["token"], "void");
        assert_eq!(v["children"][2]["deletability"], "required");
    }
}
