use std::fmt::{self, Write};

use super::ast::*;

/// Renders a transformation in the canonical layout.
///
/// Re-parsing the output yields a structurally equal AST. The layout puts
/// the header on lines 1-2, gives each helper three lines and each rule one
/// line per pattern and binding, with a blank line between items.
pub fn pretty_print(t: &Transformation) -> String {
    let mut out = String::new();
    writeln!(out, "module {};", t.name).unwrap();
    writeln!(
        out,
        "create {} : {} from {} : {};",
        t.target.alias, t.target.metamodel, t.source.alias, t.source.metamodel
    )
    .unwrap();
    let mut first = true;
    for h in &t.helpers {
        if !first {
            out.push('\n');
        }
        first = false;
        writeln!(out, "helper context {} def : {}", h.context, h.name).unwrap();
        writeln!(out, "    : {} =", h.ty).unwrap();
        writeln!(out, "    {};", h.body).unwrap();
    }
    for r in &t.rules {
        if !first {
            out.push('\n');
        }
        first = false;
        print_rule(&mut out, r);
    }
    out
}

fn print_rule(out: &mut String, r: &Rule) {
    writeln!(out, "rule {} {{", r.name).unwrap();
    write!(out, "  from {} : {}", r.input.var, r.input.class).unwrap();
    if let Some(g) = &r.input.guard {
        write!(out, " ({g})").unwrap();
    }
    out.push('\n');
    let last = r.outputs.len().saturating_sub(1);
    for (i, o) in r.outputs.iter().enumerate() {
        let lead = if i == 0 { "  to " } else { "    " };
        write!(out, "{lead}{} : {}", o.var, o.class).unwrap();
        let close = if i == last { "}" } else { "," };
        if o.bindings.is_empty() {
            if i == last {
                out.push_str("\n  }\n");
            } else {
                out.push_str(",\n");
            }
            continue;
        }
        out.push_str(" (\n");
        for (j, b) in o.bindings.iter().enumerate() {
            let sep = if j + 1 < o.bindings.len() { "," } else { "" };
            writeln!(out, "      {b}{sep}").unwrap();
        }
        writeln!(out, "    ){close}").unwrap();
    }
}

fn comma_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => write!(f, "'{s}'"),
            Literal::Integer(i) => write!(f, "{i}"),
            Literal::Boolean(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Var(v) => f.write_str(v),
            ExprKind::Nav { recv, feature } => write!(f, "{recv}.{feature}"),
            ExprKind::HelperCall { recv, helper } => write!(f, "{recv}.{helper}"),
            ExprKind::OpCall { recv, op, args } => {
                write!(f, "{recv}.{op}(")?;
                comma_list(f, args)?;
                f.write_str(")")
            }
            ExprKind::CollectionOp { recv, op, args } => {
                write!(f, "{recv}->{op}(")?;
                comma_list(f, args)?;
                f.write_str(")")
            }
            ExprKind::Iterate { recv, op, var, body } => write!(f, "{recv}->{op}({var} | {body})"),
            ExprKind::TypeTest { recv, test, ty } => write!(f, "{recv}.{}({ty})", test.keyword()),
            ExprKind::Literal(l) => write!(f, "{l}"),
            ExprKind::Sequence(elems) => {
                f.write_str("Sequence{")?;
                comma_list(f, elems)?;
                f.write_str("}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mtl::parse_transformation;

    #[test]
    fn round_trips_fixtures() {
        for src in [
            fixtures::UML2BPMN_EXCERPT,
            fixtures::UML2BPMN,
            fixtures::CLASS2TABLE,
            fixtures::PNML2PN,
        ] {
            let t = parse_transformation(src).unwrap();
            let printed = pretty_print(&t);
            let again = parse_transformation(&printed).unwrap();
            assert_eq!(t, again, "{printed}");
            assert_eq!(printed, pretty_print(&again));
        }
    }

    #[test]
    fn layout_keeps_listing_lines() {
        let printed = pretty_print(&fixtures::excerpt());
        let lines: Vec<&str> = printed.lines().collect();
        assert_eq!(lines[9].trim(), "artifacts <- a.name,");
        assert_eq!(lines[10].trim(), "pools <- a.allPartitions");
        assert_eq!(lines[14].trim(), "from a : UML!Comment");
    }

    #[test]
    fn element_without_bindings() {
        let src = "module m; create OUT : T from IN : S;\nrule r { from a : S!A to b : T!B, c : T!C }";
        let t = parse_transformation(src).unwrap();
        let printed = pretty_print(&t);
        assert!(printed.contains("  to b : T!B,\n    c : T!C\n  }\n"), "{printed}");
        assert_eq!(parse_transformation(&printed).unwrap(), t);
    }

    #[test]
    fn expression_display() {
        let src = "x->select(y | y.oclIsKindOf(M!C))->first().oclAsType(M!D).f.toString()";
        assert_eq!(crate::mtl::parse_expr(src).unwrap().to_string(), src);
        let src = "Sequence{'a', 1, false}->includes(2)";
        assert_eq!(crate::mtl::parse_expr(src).unwrap().to_string(), src);
    }
}
