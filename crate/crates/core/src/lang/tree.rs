use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::token::Token;

/// Grammar rule names. These double as node-type features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Token,
    MethodDecl,
    AnnotationList,
    Annotation,
    ModifierList,
    Type,
    Dims,
    ParamList,
    Param,
    VarName,
    ThrowsClause,
    Block,
    LocalVarDecl,
    VarDeclarator,
    Initializer,
    ExprStmt,
    ReturnStmt,
    ThrowStmt,
    IfStmt,
    ElseClause,
    ForStmt,
    ForInit,
    ForUpdate,
    ForEachStmt,
    WhileStmt,
    DoStmt,
    TryStmt,
    CatchList,
    CatchClause,
    CatchType,
    FinallyClause,
    BreakStmt,
    ContinueStmt,
    EmptyStmt,
    AssignExpr,
    ConditionalExpr,
    BinaryExpr,
    InstanceOfExpr,
    UnaryExpr,
    PostfixExpr,
    CastExpr,
    ParenExpr,
    Literal,
    NameExpr,
    ThisExpr,
    SuperExpr,
    FieldAccess,
    MethodCall,
    SuperCall,
    ArrayAccess,
    ObjectCreation,
    ArrayCreation,
    DimExpr,
    ArgList,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Token => "Token",
            Rule::MethodDecl => "MethodDecl",
            Rule::AnnotationList => "AnnotationList",
            Rule::Annotation => "Annotation",
            Rule::ModifierList => "ModifierList",
            Rule::Type => "Type",
            Rule::Dims => "Dims",
            Rule::ParamList => "ParamList",
            Rule::Param => "Param",
            Rule::VarName => "VarName",
            Rule::ThrowsClause => "ThrowsClause",
            Rule::Block => "Block",
            Rule::LocalVarDecl => "LocalVarDecl",
            Rule::VarDeclarator => "VarDeclarator",
            Rule::Initializer => "Initializer",
            Rule::ExprStmt => "ExprStmt",
            Rule::ReturnStmt => "ReturnStmt",
            Rule::ThrowStmt => "ThrowStmt",
            Rule::IfStmt => "IfStmt",
            Rule::ElseClause => "ElseClause",
            Rule::ForStmt => "ForStmt",
            Rule::ForInit => "ForInit",
            Rule::ForUpdate => "ForUpdate",
            Rule::ForEachStmt => "ForEachStmt",
            Rule::WhileStmt => "WhileStmt",
            Rule::DoStmt => "DoStmt",
            Rule::TryStmt => "TryStmt",
            Rule::CatchList => "CatchList",
            Rule::CatchClause => "CatchClause",
            Rule::CatchType => "CatchType",
            Rule::FinallyClause => "FinallyClause",
            Rule::BreakStmt => "BreakStmt",
            Rule::ContinueStmt => "ContinueStmt",
            Rule::EmptyStmt => "EmptyStmt",
            Rule::AssignExpr => "AssignExpr",
            Rule::ConditionalExpr => "ConditionalExpr",
            Rule::BinaryExpr => "BinaryExpr",
            Rule::InstanceOfExpr => "InstanceOfExpr",
            Rule::UnaryExpr => "UnaryExpr",
            Rule::PostfixExpr => "PostfixExpr",
            Rule::CastExpr => "CastExpr",
            Rule::ParenExpr => "ParenExpr",
            Rule::Literal => "Literal",
            Rule::NameExpr => "NameExpr",
            Rule::ThisExpr => "ThisExpr",
            Rule::SuperExpr => "SuperExpr",
            Rule::FieldAccess => "FieldAccess",
            Rule::MethodCall => "MethodCall",
            Rule::SuperCall => "SuperCall",
            Rule::ArrayAccess => "ArrayAccess",
            Rule::ObjectCreation => "ObjectCreation",
            Rule::ArrayCreation => "ArrayCreation",
            Rule::DimExpr => "DimExpr",
            Rule::ArgList => "ArgList",
        }
    }

    /// Star/plus-quantified list rules; only their children may be `ListElement`.
    pub fn is_list(self) -> bool {
        matches!(
            self,
            Rule::AnnotationList
                | Rule::ModifierList
                | Rule::ParamList
                | Rule::ThrowsClause
                | Rule::Block
                | Rule::CatchList
                | Rule::ArgList
        )
    }

    /// Lists whose elements are separated by `,` leaves.
    pub fn is_comma_separated(self) -> bool {
        matches!(self, Rule::ParamList | Rule::ThrowsClause | Rule::ArgList)
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deletability {
    Required,
    Optional,
    ListElement,
}

impl Deletability {
    pub fn is_deletable(self) -> bool {
        !matches!(self, Deletability::Required)
    }
}

/// A node of the reduction-oriented parse tree.
///
/// Leaves (`Rule::Token`) carry exactly one token; inner nodes cover the
/// contiguous token range spanned by their children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub rule: Rule,
    pub deletability: Deletability,
    pub tokens: Range<usize>,
    pub children: Vec<ParseNode>,
    pub token: Option<Token>,
}

impl ParseNode {
    pub fn leaf(index: usize, token: Token) -> Self {
        ParseNode {
            rule: Rule::Token,
            deletability: Deletability::Required,
            tokens: index..index + 1,
            children: Vec::new(),
            token: Some(token),
        }
    }

    pub fn inner(rule: Rule, tokens: Range<usize>, children: Vec<ParseNode>) -> Self {
        ParseNode {
            rule,
            deletability: Deletability::Required,
            tokens,
            children,
            token: None,
        }
    }

    pub fn with(mut self, deletability: Deletability) -> Self {
        self.deletability = deletability;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    pub fn token_len(&self) -> usize {
        self.tokens.len()
    }

    pub fn leaf_text(&self) -> Option<&str> {
        self.token.as_ref().map(|t| t.text.as_str())
    }

    /// In-order leaf tokens.
    pub fn frontier(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_frontier(&mut out);
        out
    }

    fn collect_frontier<'a>(&'a self, out: &mut Vec<&'a Token>) {
        match &self.token {
            Some(t) => out.push(t),
            None => self.children.iter().for_each(|c| c.collect_frontier(out)),
        }
    }

    pub fn get(&self, path: &[usize]) -> Option<&ParseNode> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children.get(i)?.get(rest),
        }
    }

    /// Pre-order walk with the child-index path of every node.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&[usize], &'a ParseNode)) {
        let mut path = Vec::new();
        self.walk_inner(&mut path, visit);
    }

    fn walk_inner<'a>(&'a self, path: &mut Vec<usize>, visit: &mut impl FnMut(&[usize], &'a ParseNode)) {
        visit(path, self);
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.walk_inner(path, visit);
            path.pop();
        }
    }

    /// Copy of the tree with the node at `path` pruned. In comma-separated
    /// lists the adjacent separator goes with it (the following one if any,
    /// else the preceding one). Token ranges of the copy are not recomputed;
    /// render and re-parse to get a fresh tree.
    pub fn without(&self, path: &[usize]) -> ParseNode {
        let mut copy = self.clone();
        copy.remove_in_place(path);
        copy
    }

    fn remove_in_place(&mut self, path: &[usize]) {
        let (&idx, rest) = path.split_first().expect("cannot remove the root");
        if !rest.is_empty() {
            self.children[idx].remove_in_place(rest);
            return;
        }
        let is_comma = |n: &ParseNode| n.leaf_text() == Some(",");
        if self.rule.is_comma_separated() {
            if self.children.get(idx + 1).is_some_and(is_comma) {
                self.children.remove(idx + 1);
            } else if idx > 0 && is_comma(&self.children[idx - 1]) {
                self.children.remove(idx);
                self.children.remove(idx - 1);
                return;
            }
        }
        self.children.remove(idx);
    }

    /// Structural equality: rules, deletability, token ranges and leaf
    /// kinds/texts. Byte spans are ignored since rendering reformats.
    pub fn same_shape(&self, other: &ParseNode) -> bool {
        self.rule == other.rule
            && self.deletability == other.deletability
            && self.tokens == other.tokens
            && match (&self.token, &other.token) {
                (Some(a), Some(b)) => a.kind == b.kind && a.text == b.text,
                (None, None) => true,
                _ => false,
            }
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }

    /// Debug dump: rule, deletability, children, token texts.
    pub fn to_json(&self) -> Value {
        match &self.token {
            Some(t) => json!({
                "rule": self.rule.name(),
                "deletability": self.deletability,
                "token": t.text,
            }),
            None => json!({
                "rule": self.rule.name(),
                "deletability": self.deletability,
                "tokens": [self.tokens.start, self.tokens.end],
                "children": self.children.iter().map(ParseNode::to_json).collect::<Vec<_>>(),
            }),
        }
    }
}
