use thiserror::Error;

use super::ast::*;
use crate::metamodel::Primitive;
use crate::source::{tokenize, Cursor, Pos, Span, Tok};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl From<(Pos, String)> for ParseError {
    fn from((pos, message): (Pos, String)) -> Self {
        ParseError { pos, message }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses a complete `.mtl` transformation module.
pub fn parse_transformation(source: &str) -> PResult<Transformation> {
    let mut p = Parser::new(source)?;
    let t = p.transformation()?;
    Ok(t)
}

/// Parses a standalone expression.
pub fn parse_expr(text: &str) -> PResult<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `feature <- expr`.
pub fn parse_binding(text: &str) -> PResult<Binding> {
    let mut p = Parser::new(text)?;
    let b = p.binding()?;
    p.finish()?;
    Ok(b)
}

/// Parses `Metamodel!Class`.
pub fn parse_qualified(text: &str) -> PResult<QualifiedName> {
    let mut p = Parser::new(text)?;
    let q = p.qualified()?;
    p.finish()?;
    Ok(q)
}

/// Parses a helper type: a primitive, a qualified class or `Sequence(T)`.
pub fn parse_type_expr(text: &str) -> PResult<TypeExpr> {
    let mut p = Parser::new(text)?;
    let t = p.type_expr()?;
    p.finish()?;
    Ok(t)
}

/// Parses a bare identifier that is not a keyword.
pub fn parse_identifier(text: &str) -> PResult<String> {
    let mut p = Parser::new(text)?;
    let (name, _) = p.ident("identifier")?;
    p.finish()?;
    Ok(name)
}

struct Parser {
    cur: Cursor,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            cur: Cursor::new(tokenize(src, "--")?),
        })
    }

    fn finish(&mut self) -> PResult<()> {
        if self.cur.at_eof() {
            Ok(())
        } else {
            Err(self.cur.unexpected("end of input").into())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        if let Tok::Ident(s) = self.cur.peek() {
            if KEYWORDS.contains(&s.as_str()) {
                return Err(self.cur.unexpected(what).into());
            }
        }
        Ok(self.cur.expect_ident(what)?)
    }

    fn transformation(&mut self) -> PResult<Transformation> {
        self.cur.expect_keyword("module")?;
        let (name, _) = self.ident("module name")?;
        self.cur.expect_punct(";")?;
        self.cur.expect_keyword("create")?;
        let (out_alias, _) = self.ident("target model alias")?;
        self.cur.expect_punct(":")?;
        let (out_mm, _) = self.ident("target metamodel name")?;
        self.cur.expect_keyword("from")?;
        let (in_alias, _) = self.ident("source model alias")?;
        self.cur.expect_punct(":")?;
        let (in_mm, _) = self.ident("source metamodel name")?;
        self.cur.expect_punct(";")?;

        let mut helpers: Vec<Helper> = Vec::new();
        let mut rules: Vec<Rule> = Vec::new();
        loop {
            if self.cur.is_keyword("helper") {
                let start = self.cur.span().start;
                let h = self.helper()?;
                if helpers.iter().any(|o| o.name == h.name && o.context == h.context) {
                    return Err(ParseError {
                        pos: start,
                        message: format!("duplicate helper `{}` for context `{}`", h.name, h.context),
                    });
                }
                helpers.push(h);
            } else if self.cur.is_keyword("rule") {
                let start = self.cur.span().start;
                let r = self.rule()?;
                if rules.iter().any(|o| o.name == r.name) {
                    return Err(ParseError {
                        pos: start,
                        message: format!("duplicate rule `{}`", r.name),
                    });
                }
                rules.push(r);
            } else if self.cur.at_eof() {
                break;
            } else {
                return Err(self.cur.unexpected("`helper`, `rule` or end of input").into());
            }
        }
        let mut t = Transformation {
            name,
            target: ModelDecl {
                alias: out_alias,
                metamodel: out_mm,
            },
            source: ModelDecl {
                alias: in_alias,
                metamodel: in_mm,
            },
            helpers,
            rules,
        };
        t.normalize_helper_calls();
        Ok(t)
    }

    fn qualified(&mut self) -> PResult<QualifiedName> {
        let (metamodel, s) = self.ident("metamodel name")?;
        self.cur.expect_punct("!")?;
        let (class, e) = self.ident("class name")?;
        Ok(QualifiedName {
            metamodel,
            class,
            span: s.join(e),
        })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        if self.cur.eat_keyword("Sequence") {
            self.cur.expect_punct("(")?;
            let inner = self.type_expr()?;
            self.cur.expect_punct(")")?;
            return Ok(TypeExpr::Sequence(Box::new(inner)));
        }
        if let Tok::Ident(name) = self.cur.peek() {
            if let Some(p) = Primitive::from_name(name) {
                if !matches!(self.cur.peek_at(1), Tok::Punct("!")) {
                    self.cur.next();
                    return Ok(TypeExpr::Primitive(p));
                }
            }
        }
        Ok(TypeExpr::Class(self.qualified()?))
    }

    fn helper(&mut self) -> PResult<Helper> {
        let start = self.cur.expect_keyword("helper")?;
        self.cur.expect_keyword("context")?;
        let context = self.qualified()?;
        self.cur.expect_keyword("def")?;
        self.cur.expect_punct(":")?;
        let (name, _) = self.ident("helper name")?;
        self.cur.expect_punct(":")?;
        let ty = self.type_expr()?;
        self.cur.expect_punct("=")?;
        let body = self.expr()?;
        let end = self.cur.expect_punct(";")?;
        Ok(Helper {
            context,
            name,
            ty,
            body,
            span: start.join(end),
        })
    }

    fn rule(&mut self) -> PResult<Rule> {
        let start = self.cur.expect_keyword("rule")?;
        let (name, _) = self.ident("rule name")?;
        self.cur.expect_punct("{")?;
        let from = self.cur.expect_keyword("from")?;
        let (var, _) = self.ident("input variable")?;
        self.cur.expect_punct(":")?;
        let class = self.qualified()?;
        let mut in_end = class.span;
        let guard = if self.cur.eat_punct("(") {
            let g = self.expr()?;
            in_end = self.cur.expect_punct(")")?;
            Some(g)
        } else {
            None
        };
        let input = InPattern {
            var,
            class,
            guard,
            span: from.join(in_end),
        };
        let to = self.cur.expect_keyword("to")?;
        let mut outputs = vec![self.out_pattern(Some(to))?];
        while self.cur.eat_punct(",") {
            outputs.push(self.out_pattern(None)?);
        }
        let end = self.cur.expect_punct("}")?;
        Ok(Rule {
            name,
            input,
            outputs,
            span: start.join(end),
        })
    }

    fn out_pattern(&mut self, lead: Option<Span>) -> PResult<OutPattern> {
        let (var, vspan) = self.ident("output variable")?;
        self.cur.expect_punct(":")?;
        let class = self.qualified()?;
        let mut span = lead.unwrap_or(vspan).join(class.span);
        let mut bindings = Vec::new();
        if self.cur.eat_punct("(") {
            if !self.cur.is_punct(")") {
                loop {
                    bindings.push(self.binding()?);
                    if !self.cur.eat_punct(",") {
                        break;
                    }
                }
            }
            span = span.join(self.cur.expect_punct(")")?);
        }
        Ok(OutPattern {
            var,
            class,
            bindings,
            span,
        })
    }

    fn binding(&mut self) -> PResult<Binding> {
        let (feature, s) = self.ident("feature name")?;
        self.cur.expect_punct("<-")?;
        let value = self.expr()?;
        let span = s.join(value.span);
        Ok(Binding { feature, value, span })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.cur.eat_punct(".") {
                let (name, _) = self.ident("feature or operation name")?;
                if !self.cur.eat_punct("(") {
                    let span = e.span.join(self.cur.prev_span());
                    e = Expr {
                        kind: ExprKind::Nav {
                            recv: Box::new(e),
                            feature: name,
                        },
                        span,
                    };
                    continue;
                }
                if let Some(test) = TypeTestKind::from_keyword(&name) {
                    let ty = self.qualified()?;
                    let end = self.cur.expect_punct(")")?;
                    let span = e.span.join(end);
                    e = Expr {
                        kind: ExprKind::TypeTest {
                            recv: Box::new(e),
                            test,
                            ty,
                        },
                        span,
                    };
                } else {
                    let (args, end) = self.args()?;
                    let span = e.span.join(end);
                    e = Expr {
                        kind: ExprKind::OpCall {
                            recv: Box::new(e),
                            op: name,
                            args,
                        },
                        span,
                    };
                }
            } else if self.cur.eat_punct("->") {
                let (op, _) = self.ident("collection operation name")?;
                self.cur.expect_punct("(")?;
                let is_iterator = matches!(self.cur.peek(), Tok::Ident(_)) && matches!(self.cur.peek_at(1), Tok::Punct("|"));
                if is_iterator {
                    let (var, _) = self.ident("iterator variable")?;
                    self.cur.expect_punct("|")?;
                    let body = self.expr()?;
                    let end = self.cur.expect_punct(")")?;
                    let span = e.span.join(end);
                    e = Expr {
                        kind: ExprKind::Iterate {
                            recv: Box::new(e),
                            op,
                            var,
                            body: Box::new(body),
                        },
                        span,
                    };
                } else {
                    let (args, end) = self.args()?;
                    let span = e.span.join(end);
                    e = Expr {
                        kind: ExprKind::CollectionOp {
                            recv: Box::new(e),
                            op,
                            args,
                        },
                        span,
                    };
                }
            } else {
                return Ok(e);
            }
        }
    }

    // after the opening parenthesis
    fn args(&mut self) -> PResult<(Vec<Expr>, Span)> {
        let mut args = Vec::new();
        if !self.cur.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.cur.eat_punct(",") {
                    break;
                }
            }
        }
        let end = self.cur.expect_punct(")")?;
        Ok((args, end))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.cur.span();
        match self.cur.peek().clone() {
            Tok::Str(s) => {
                self.cur.next();
                Ok(Expr {
                    kind: ExprKind::Literal(Literal::String(s)),
                    span,
                })
            }
            Tok::Int(i) => {
                self.cur.next();
                Ok(Expr {
                    kind: ExprKind::Literal(Literal::Integer(i)),
                    span,
                })
            }
            Tok::Punct("(") => {
                self.cur.next();
                let e = self.expr()?;
                self.cur.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.cur.next();
                Ok(Expr {
                    kind: ExprKind::Literal(Literal::Boolean(s == "true")),
                    span,
                })
            }
            Tok::Ident(s) if s == "Sequence" => {
                self.cur.next();
                self.cur.expect_punct("{")?;
                let mut elems = Vec::new();
                if !self.cur.is_punct("}") {
                    loop {
                        elems.push(self.expr()?);
                        if !self.cur.eat_punct(",") {
                            break;
                        }
                    }
                }
                let end = self.cur.expect_punct("}")?;
                Ok(Expr {
                    kind: ExprKind::Sequence(elems),
                    span: span.join(end),
                })
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident("expression")?;
                Ok(Expr {
                    kind: ExprKind::Var(name),
                    span,
                })
            }
            _ => Err(self.cur.unexpected("expression").into()),
        }
    }
}
