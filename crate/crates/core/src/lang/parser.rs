//! Recursive-descent parser for one Java method.
//!
//! Deletability is assigned here, by the parent that knows the grammar
//! context: star-list children get `ListElement`, grammar-optional pieces get
//! `Optional`. Mandatory plus-lists are modeled as a required head followed by
//! a deletable tail so that any single deletion still parses.

use thiserror::Error;

use super::token::{Token, TokenKind};
use super::tree::{Deletability, ParseNode, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at token {index}: expected {expected}, found {found}")]
pub struct ParseError {
    /// Index of the first offending token; equals the token count at end of input.
    pub index: usize,
    pub expected: String,
    pub found: String,
}

type PResult = Result<ParseNode, ParseError>;

pub const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "transient",
    "volatile",
];

pub const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
];

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["|"],
    &["^"],
    &["&"],
    &["==", "!="],
    &["<", ">", "<=", ">=", "instanceof"],
    &["<<", ">>", ">>>"],
    &["+", "-"],
    &["*", "/", "%"],
];

const PREFIX_OPS: &[&str] = &["+", "-", "++", "--", "!", "~"];

/// Parses a token stream holding exactly one method declaration.
pub fn parse(tokens: &[Token]) -> Result<ParseNode, ParseError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let root = p.method_decl()?;
    if p.pos != tokens.len() {
        return Err(p.error("end of input"));
    }
    Ok(root)
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn text_at(&self, n: usize) -> Option<&'t str> {
        self.peek_at(n).map(|t| t.text.as_str())
    }

    fn at(&self, text: &str) -> bool {
        self.text_at(0) == Some(text)
    }

    fn at_any(&self, texts: &[&str]) -> bool {
        self.text_at(0).is_some_and(|t| texts.contains(&t))
    }

    fn ident_at(&self, n: usize) -> bool {
        self.peek_at(n).is_some_and(Token::is_identifier)
    }

    fn at_empty_dims(&self) -> bool {
        self.at("[") && self.text_at(1) == Some("]")
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            index: self.pos,
            expected: expected.to_string(),
            found: match self.peek_at(0) {
                Some(t) => format!("`{}`", t.text),
                None => "end of input".to_string(),
            },
        }
    }

    fn bump(&mut self) -> ParseNode {
        let leaf = ParseNode::leaf(self.pos, self.toks[self.pos].clone());
        self.pos += 1;
        leaf
    }

    fn expect(&mut self, text: &str) -> PResult {
        if self.at(text) {
            Ok(self.bump())
        } else {
            Err(self.error(&format!("`{text}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult {
        if self.ident_at(0) {
            Ok(self.bump())
        } else {
            Err(self.error("identifier"))
        }
    }

    fn finish(&self, rule: Rule, start: usize, children: Vec<ParseNode>) -> ParseNode {
        ParseNode::inner(rule, start..self.pos, children)
    }

    fn method_decl(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        if self.at("@") {
            ch.push(self.annotation_list()?);
        }
        if self.at_any(MODIFIERS) {
            ch.push(self.modifier_list());
        }
        if self.at("void") {
            ch.push(self.bump());
        } else {
            ch.push(self.type_()?);
        }
        ch.push(self.expect_ident()?);
        ch.push(self.expect("(")?);
        ch.push(self.param_list()?);
        ch.push(self.expect(")")?);
        if self.at("throws") {
            ch.push(self.throws_clause()?.with(Deletability::Optional));
        }
        ch.push(self.block()?);
        Ok(self.finish(Rule::MethodDecl, start, ch))
    }

    fn annotation_list(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        while self.at("@") {
            ch.push(self.annotation()?.with(Deletability::ListElement));
        }
        Ok(self.finish(Rule::AnnotationList, start, ch))
    }

    fn annotation(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("@")?, self.expect_ident()?];
        while self.at(".") && self.ident_at(1) {
            ch.push(self.bump());
            ch.push(self.bump());
        }
        if self.at("(") {
            ch.push(self.bump());
            ch.push(self.arg_list()?);
            ch.push(self.expect(")")?);
        }
        Ok(self.finish(Rule::Annotation, start, ch))
    }

    fn modifier_list(&mut self) -> ParseNode {
        let start = self.pos;
        let mut ch = Vec::new();
        while self.at_any(MODIFIERS) {
            ch.push(self.bump().with(Deletability::ListElement));
        }
        self.finish(Rule::ModifierList, start, ch)
    }

    fn final_modifiers(&mut self) -> Option<ParseNode> {
        if !self.at("final") {
            return None;
        }
        let start = self.pos;
        let mut ch = Vec::new();
        while self.at("final") {
            ch.push(self.bump().with(Deletability::ListElement));
        }
        Some(self.finish(Rule::ModifierList, start, ch))
    }

    /// Primitive or (qualified) class name, without array brackets.
    fn type_name_parts(&mut self, ch: &mut Vec<ParseNode>) -> Result<(), ParseError> {
        if self.at_any(PRIMITIVES) {
            ch.push(self.bump());
            return Ok(());
        }
        ch.push(self.expect_ident().map_err(|_| self.error("type"))?);
        while self.at(".") && self.ident_at(1) {
            ch.push(self.bump());
            ch.push(self.bump());
        }
        Ok(())
    }

    fn type_(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        self.type_name_parts(&mut ch)?;
        if self.at_empty_dims() {
            ch.push(self.dims().with(Deletability::Optional));
        }
        Ok(self.finish(Rule::Type, start, ch))
    }

    fn dims(&mut self) -> ParseNode {
        let start = self.pos;
        let mut ch = Vec::new();
        while self.at_empty_dims() {
            ch.push(self.bump());
            ch.push(self.bump());
        }
        self.finish(Rule::Dims, start, ch)
    }

    fn var_name(&mut self) -> PResult {
        let start = self.pos;
        let id = self.expect_ident()?;
        Ok(self.finish(Rule::VarName, start, vec![id]))
    }

    fn param_list(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        if !self.at(")") {
            loop {
                ch.push(self.param()?.with(Deletability::ListElement));
                if self.at(",") {
                    ch.push(self.bump());
                } else {
                    break;
                }
            }
        }
        Ok(self.finish(Rule::ParamList, start, ch))
    }

    fn param(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        ch.extend(self.final_modifiers());
        ch.push(self.type_()?);
        ch.push(self.var_name()?);
        if self.at_empty_dims() {
            ch.push(self.dims().with(Deletability::Optional));
        }
        Ok(self.finish(Rule::Param, start, ch))
    }

    fn throws_clause(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("throws")?, self.type_()?];
        while self.at(",") {
            ch.push(self.bump());
            ch.push(self.type_()?.with(Deletability::ListElement));
        }
        Ok(self.finish(Rule::ThrowsClause, start, ch))
    }

    fn block(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("{")?];
        while !self.at("}") && self.peek_at(0).is_some() {
            ch.push(self.block_statement()?.with(Deletability::ListElement));
        }
        ch.push(self.expect("}")?);
        Ok(self.finish(Rule::Block, start, ch))
    }

    /// Speculatively checks for `Type Identifier`, the start of a declaration.
    fn looks_like_declaration(&mut self) -> bool {
        let save = self.pos;
        let ok = self.type_().is_ok() && self.ident_at(0);
        self.pos = save;
        ok
    }

    fn block_statement(&mut self) -> PResult {
        if self.at("final") || self.looks_like_declaration() {
            self.local_var_decl(true)
        } else {
            self.statement()
        }
    }

    fn local_var_decl(&mut self, with_semicolon: bool) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        ch.extend(self.final_modifiers());
        ch.push(self.type_()?);
        ch.push(self.declarator()?);
        while self.at(",") {
            ch.push(self.bump());
            ch.push(self.declarator()?);
        }
        if with_semicolon {
            ch.push(self.expect(";")?);
        }
        Ok(self.finish(Rule::LocalVarDecl, start, ch))
    }

    fn declarator(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.var_name()?];
        if self.at_empty_dims() {
            ch.push(self.dims().with(Deletability::Optional));
        }
        if self.at("=") {
            let init_start = self.pos;
            let eq = self.bump();
            let value = self.expr()?;
            ch.push(
                self.finish(Rule::Initializer, init_start, vec![eq, value])
                    .with(Deletability::Optional),
            );
        }
        Ok(self.finish(Rule::VarDeclarator, start, ch))
    }

    fn statement(&mut self) -> PResult {
        match self.text_at(0) {
            Some("{") => self.block(),
            Some("if") => self.if_stmt(),
            Some("for") => self.for_stmt(),
            Some("while") => {
                let start = self.pos;
                let ch = vec![
                    self.bump(),
                    self.expect("(")?,
                    self.expr()?,
                    self.expect(")")?,
                    self.statement()?,
                ];
                Ok(self.finish(Rule::WhileStmt, start, ch))
            }
            Some("do") => {
                let start = self.pos;
                let ch = vec![
                    self.bump(),
                    self.statement()?,
                    self.expect("while")?,
                    self.expect("(")?,
                    self.expr()?,
                    self.expect(")")?,
                    self.expect(";")?,
                ];
                Ok(self.finish(Rule::DoStmt, start, ch))
            }
            Some("try") => self.try_stmt(),
            Some("return") => {
                let start = self.pos;
                let mut ch = vec![self.bump()];
                if !self.at(";") {
                    ch.push(self.expr()?);
                }
                ch.push(self.expect(";")?);
                Ok(self.finish(Rule::ReturnStmt, start, ch))
            }
            Some("throw") => {
                let start = self.pos;
                let ch = vec![self.bump(), self.expr()?, self.expect(";")?];
                Ok(self.finish(Rule::ThrowStmt, start, ch))
            }
            Some(kw @ ("break" | "continue")) => {
                let rule = if kw == "break" {
                    Rule::BreakStmt
                } else {
                    Rule::ContinueStmt
                };
                let start = self.pos;
                let mut ch = vec![self.bump()];
                if self.ident_at(0) {
                    ch.push(self.bump());
                }
                ch.push(self.expect(";")?);
                Ok(self.finish(rule, start, ch))
            }
            Some(";") => {
                let start = self.pos;
                let ch = vec![self.bump()];
                Ok(self.finish(Rule::EmptyStmt, start, ch))
            }
            _ => {
                let start = self.pos;
                let e = self.statement_expr()?;
                let semi = self.expect(";")?;
                Ok(self.finish(Rule::ExprStmt, start, vec![e, semi]))
            }
        }
    }

    /// Expressions allowed in statement position: assignments, increments,
    /// calls and instance creation.
    fn statement_expr(&mut self) -> PResult {
        let start = self.pos;
        let e = self.expr()?;
        let ok = match e.rule {
            Rule::AssignExpr
            | Rule::MethodCall
            | Rule::SuperCall
            | Rule::ObjectCreation
            | Rule::PostfixExpr => true,
            Rule::UnaryExpr => matches!(e.children[0].leaf_text(), Some("++" | "--")),
            _ => false,
        };
        if ok {
            Ok(e)
        } else {
            Err(ParseError {
                index: start,
                expected: "statement expression".to_string(),
                found: e.rule.name().to_string(),
            })
        }
    }

    fn if_stmt(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![
            self.expect("if")?,
            self.expect("(")?,
            self.expr()?,
            self.expect(")")?,
            self.statement()?,
        ];
        if self.at("else") {
            let else_start = self.pos;
            let kw = self.bump();
            let body = self.statement()?;
            ch.push(
                self.finish(Rule::ElseClause, else_start, vec![kw, body])
                    .with(Deletability::Optional),
            );
        }
        Ok(self.finish(Rule::IfStmt, start, ch))
    }

    fn is_foreach_header(&mut self) -> bool {
        let save = self.pos;
        self.final_modifiers();
        let ok = self.type_().is_ok() && self.ident_at(0) && self.text_at(1) == Some(":");
        self.pos = save;
        ok
    }

    fn for_stmt(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("for")?, self.expect("(")?];
        if self.is_foreach_header() {
            ch.extend(self.final_modifiers());
            ch.push(self.type_()?);
            ch.push(self.var_name()?);
            ch.push(self.expect(":")?);
            ch.push(self.expr()?);
            ch.push(self.expect(")")?);
            ch.push(self.statement()?);
            return Ok(self.finish(Rule::ForEachStmt, start, ch));
        }
        if !self.at(";") {
            let init_start = self.pos;
            let init = if self.at("final") || self.looks_like_declaration() {
                vec![self.local_var_decl(false)?]
            } else {
                self.statement_expr_list()?
            };
            ch.push(self.finish(Rule::ForInit, init_start, init));
        }
        ch.push(self.expect(";")?);
        if !self.at(";") {
            ch.push(self.expr()?);
        }
        ch.push(self.expect(";")?);
        if !self.at(")") {
            let update_start = self.pos;
            let update = self.statement_expr_list()?;
            ch.push(self.finish(Rule::ForUpdate, update_start, update));
        }
        ch.push(self.expect(")")?);
        ch.push(self.statement()?);
        Ok(self.finish(Rule::ForStmt, start, ch))
    }

    fn statement_expr_list(&mut self) -> Result<Vec<ParseNode>, ParseError> {
        let mut out = vec![self.statement_expr()?];
        while self.at(",") {
            out.push(self.bump());
            out.push(self.statement_expr()?);
        }
        Ok(out)
    }

    fn try_stmt(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("try")?, self.block()?];
        let catches_start = self.pos;
        let mut catches = Vec::new();
        while self.at("catch") {
            catches.push(self.catch_clause()?);
        }
        let finally = if self.at("finally") {
            let f_start = self.pos;
            let kw = self.bump();
            let body = self.block()?;
            Some(self.finish(Rule::FinallyClause, f_start, vec![kw, body]))
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() {
            return Err(self.error("`catch` or `finally`"));
        }
        let has_finally = finally.is_some();
        let has_catches = !catches.is_empty();
        for (i, c) in catches.iter_mut().enumerate() {
            // Without a finally block the first catch is the mandatory head.
            if has_finally || i > 0 {
                c.deletability = Deletability::ListElement;
            }
        }
        let catch_end = catches.last().map_or(catches_start, |c| c.tokens.end);
        ch.push(ParseNode::inner(
            Rule::CatchList,
            catches_start..catch_end,
            catches,
        ));
        if let Some(mut f) = finally {
            if has_catches {
                f.deletability = Deletability::Optional;
            }
            ch.push(f);
        }
        Ok(self.finish(Rule::TryStmt, start, ch))
    }

    fn catch_clause(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = vec![self.expect("catch")?, self.expect("(")?];
        ch.extend(self.final_modifiers());
        let ty_start = self.pos;
        let first = self.type_()?;
        if self.at("|") {
            let mut alts = vec![first];
            while self.at("|") {
                alts.push(self.bump());
                alts.push(self.type_()?);
            }
            ch.push(self.finish(Rule::CatchType, ty_start, alts));
        } else {
            ch.push(first);
        }
        ch.push(self.var_name()?);
        ch.push(self.expect(")")?);
        ch.push(self.block()?);
        Ok(self.finish(Rule::CatchClause, start, ch))
    }

    fn arg_list(&mut self) -> PResult {
        let start = self.pos;
        let mut ch = Vec::new();
        if !self.at(")") {
            loop {
                ch.push(self.expr()?.with(Deletability::ListElement));
                if self.at(",") {
                    ch.push(self.bump());
                } else {
                    break;
                }
            }
        }
        Ok(self.finish(Rule::ArgList, start, ch))
    }

    fn expr(&mut self) -> PResult {
        let start = self.pos;
        let lhs = self.conditional()?;
        if !self.at_any(ASSIGN_OPS) {
            return Ok(lhs);
        }
        if !matches!(
            lhs.rule,
            Rule::NameExpr | Rule::FieldAccess | Rule::ArrayAccess
        ) {
            return Err(self.error("assignable expression before assignment"));
        }
        let op = self.bump();
        let rhs = self.expr()?;
        Ok(self.finish(Rule::AssignExpr, start, vec![lhs, op, rhs]))
    }

    fn conditional(&mut self) -> PResult {
        let start = self.pos;
        let cond = self.binary(0)?;
        if !self.at("?") {
            return Ok(cond);
        }
        let ch = vec![
            cond,
            self.bump(),
            self.expr()?,
            self.expect(":")?,
            self.conditional()?,
        ];
        Ok(self.finish(Rule::ConditionalExpr, start, ch))
    }

    fn binary(&mut self, level: usize) -> PResult {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let start = self.pos;
        let mut left = self.binary(level + 1)?;
        while self.at_any(BINARY_LEVELS[level]) {
            let op = self.bump();
            if op.leaf_text() == Some("instanceof") {
                let ty = self.type_()?;
                left = self.finish(Rule::InstanceOfExpr, start, vec![left, op, ty]);
            } else {
                let right = self.binary(level + 1)?;
                left = self.finish(Rule::BinaryExpr, start, vec![left, op, right]);
            }
        }
        Ok(left)
    }

    fn starts_cast_operand(&self) -> bool {
        match self.peek_at(0) {
            Some(t) => match t.kind {
                TokenKind::Identifier | TokenKind::Literal => true,
                TokenKind::Keyword => matches!(t.text.as_str(), "this" | "super" | "new"),
                _ => matches!(t.text.as_str(), "(" | "!" | "~"),
            },
            None => false,
        }
    }

    fn try_cast(&mut self) -> Option<PResult> {
        let start = self.pos;
        let primitive = self.text_at(1).is_some_and(|t| PRIMITIVES.contains(&t));
        if !primitive && !self.ident_at(1) {
            return None;
        }
        let open = self.bump();
        let ty = match self.type_() {
            Ok(ty) => ty,
            Err(_) => {
                self.pos = start;
                return None;
            }
        };
        if !self.at(")") {
            self.pos = start;
            return None;
        }
        let close = self.bump();
        if !primitive && !self.starts_cast_operand() {
            self.pos = start;
            return None;
        }
        Some(
            self.unary()
                .map(|operand| self.finish(Rule::CastExpr, start, vec![open, ty, close, operand])),
        )
    }

    fn unary(&mut self) -> PResult {
        let start = self.pos;
        if self.at_any(PREFIX_OPS) {
            let op = self.bump();
            let operand = self.unary()?;
            return Ok(self.finish(Rule::UnaryExpr, start, vec![op, operand]));
        }
        if self.at("(") {
            if let Some(cast) = self.try_cast() {
                return cast;
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult {
        let start = self.pos;
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                let name_ok = self.ident_at(1) || self.text_at(1) == Some("class");
                if !name_ok {
                    self.pos += 1;
                    return Err(self.error("member name"));
                }
                let dot = self.bump();
                let name = self.bump();
                if self.at("(") {
                    let open = self.bump();
                    let args = self.arg_list()?;
                    let close = self.expect(")")?;
                    e = self.finish(Rule::MethodCall, start, vec![e, dot, name, open, args, close]);
                } else {
                    e = self.finish(Rule::FieldAccess, start, vec![e, dot, name]);
                }
            } else if self.at("[") {
                let ch = vec![e, self.bump(), self.expr()?, self.expect("]")?];
                e = self.finish(Rule::ArrayAccess, start, ch);
            } else {
                break;
            }
        }
        if e.rule == Rule::SuperExpr {
            return Err(self.error("`.` after `super`"));
        }
        if self.at_any(&["++", "--"]) {
            let op = self.bump();
            e = self.finish(Rule::PostfixExpr, start, vec![e, op]);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult {
        let start = self.pos;
        let Some(tok) = self.peek_at(0) else {
            return Err(self.error("expression"));
        };
        match (tok.kind, tok.text.as_str()) {
            (TokenKind::Literal, _) => {
                let leaf = self.bump();
                Ok(self.finish(Rule::Literal, start, vec![leaf]))
            }
            (_, "this") => {
                let leaf = self.bump();
                Ok(self.finish(Rule::ThisExpr, start, vec![leaf]))
            }
            (_, "super") => {
                let kw = self.bump();
                if self.at("(") {
                    let ch = vec![kw, self.bump(), self.arg_list()?, self.expect(")")?];
                    Ok(self.finish(Rule::SuperCall, start, ch))
                } else if self.at(".") {
                    Ok(self.finish(Rule::SuperExpr, start, vec![kw]))
                } else {
                    Err(self.error("`(` or `.` after `super`"))
                }
            }
            (TokenKind::Identifier, _) => {
                let id = self.bump();
                if self.at("(") {
                    let ch = vec![id, self.bump(), self.arg_list()?, self.expect(")")?];
                    Ok(self.finish(Rule::MethodCall, start, ch))
                } else {
                    Ok(self.finish(Rule::NameExpr, start, vec![id]))
                }
            }
            (_, "(") => {
                let ch = vec![self.bump(), self.expr()?, self.expect(")")?];
                Ok(self.finish(Rule::ParenExpr, start, ch))
            }
            (_, "new") => self.creator(),
            _ => Err(self.error("expression")),
        }
    }

    fn creator(&mut self) -> PResult {
        let start = self.pos;
        let kw = self.expect("new")?;
        let ty_start = self.pos;
        let mut parts = Vec::new();
        self.type_name_parts(&mut parts)?;
        let ty = self.finish(Rule::Type, ty_start, parts);
        if self.at("(") {
            let ch = vec![kw, ty, self.bump(), self.arg_list()?, self.expect(")")?];
            return Ok(self.finish(Rule::ObjectCreation, start, ch));
        }
        if !self.at("[") || self.text_at(1) == Some("]") {
            return Err(self.error("`(` or dimension expression after `new`"));
        }
        let mut ch = vec![kw, ty];
        while self.at("[") && self.text_at(1) != Some("]") {
            let d_start = self.pos;
            let d = vec![self.bump(), self.expr()?, self.expect("]")?];
            ch.push(self.finish(Rule::DimExpr, d_start, d));
        }
        if self.at_empty_dims() {
            ch.push(self.dims());
        }
        Ok(self.finish(Rule::ArrayCreation, start, ch))
    }
}
