//! Abstract syntax for terms, term bodies, g-terms, predicates, and formulas,
//! plus the structural queries over them (leftmost symbol, subterm and
//! subvariable listings) and a precedence-correct printer.
//!
//! Symbol namespaces (variables, domain symbols, predicate symbols) are
//! disjoint by declaration: the frontend resolves which kind a name denotes
//! before any `Term` is built, so the AST never has to guess from spelling.

use std::fmt;

/// A basic variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicVar(pub String);

/// A basic domain symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DomainSym(pub String);

/// A basic predicate symbol with its arity (always at least 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredSym {
    pub name: String,
    pub arity: usize,
}

impl PredSym {
    pub fn new(name: impl Into<String>, arity: usize) -> Result<Self, SyntaxError> {
        let name = name.into();
        if arity == 0 {
            return Err(SyntaxError::ZeroArity { name });
        }
        Ok(PredSym { name, arity })
    }
}

/// Errors raised by the checked constructors in this module.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("predicate {name} declared with arity 0; arity must be at least 1")]
    ZeroArity { name: String },
    #[error("term body must contain at least one term")]
    EmptyTermBody,
    #[error("{pred} has arity {arity} but was applied to {got} argument(s)")]
    ArityMismatch {
        pred: String,
        arity: usize,
        got: usize,
    },
    #[error("collective predicate needs at least 2 parts, got {got}")]
    CollectiveTooFew { got: usize },
    #[error("collective parts must share one arity; part {part} has arity {got}, expected {expected}")]
    CollectiveArityMismatch {
        part: String,
        expected: usize,
        got: usize,
    },
    #[error("quantifier binder must be a variable, got a domain-symbol-headed term")]
    BinderNotVariable,
}

/// A term: a basic symbol, or `head <. body` attribution. The `<.`
/// association is explicit in the tree (`w<.z<.y<.x` nests to the left).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(BasicVar),
    Dom(DomainSym),
    Attr(Box<Term>, TermBody),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(BasicVar(name.into()))
    }

    pub fn dom(name: impl Into<String>) -> Term {
        Term::Dom(DomainSym(name.into()))
    }

    pub fn attr(head: Term, body: TermBody) -> Term {
        Term::Attr(Box::new(head), body)
    }

    /// `head <. t` with a one-term body, the common case.
    pub fn attr1(head: Term, body: Term) -> Term {
        Term::Attr(Box::new(head), TermBody::single(body))
    }
}

/// A nonempty sequence of terms `t1.t2. ... .tn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermBody(Vec<Term>);

impl TermBody {
    pub fn new(items: Vec<Term>) -> Result<Self, SyntaxError> {
        if items.is_empty() {
            return Err(SyntaxError::EmptyTermBody);
        }
        Ok(TermBody(items))
    }

    pub fn single(t: Term) -> Self {
        TermBody(vec![t])
    }

    pub fn items(&self) -> &[Term] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The sole term of a one-term body, if it is one.
    pub fn as_single(&self) -> Option<&Term> {
        match self.0.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }
}

impl From<Term> for TermBody {
    fn from(t: Term) -> Self {
        TermBody::single(t)
    }
}

/// A term or a connector `^t`. Connectors may only appear as arguments of
/// basic predicates; the formula constructors enforce this by taking
/// [`GTerm`] arguments only there.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GTerm {
    Plain(Term),
    Connector(Term),
}

impl GTerm {
    pub fn term(&self) -> &Term {
        match self {
            GTerm::Plain(t) | GTerm::Connector(t) => t,
        }
    }

    pub fn is_connector(&self) -> bool {
        matches!(self, GTerm::Connector(_))
    }
}

/// A predicate: basic, a collective `[p1(..) & p2(..)]` of basic parts that
/// share one arity, or an attributed predicate `P :> F`.
///
/// Collective parts are restricted to basic predicates; richer parts are
/// rejected with a diagnostic in the frontend.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Basic(PredSym),
    Collective(Vec<CollectivePart>),
    Attributed(Box<Predicate>, Box<Formula>),
}

/// One `p_i(t^i_1, ..., t^i_n)` constituent of a collective predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollectivePart {
    pub pred: PredSym,
    pub args: Vec<Term>,
}

impl Predicate {
    pub fn collective(parts: Vec<CollectivePart>) -> Result<Predicate, SyntaxError> {
        if parts.len() < 2 {
            return Err(SyntaxError::CollectiveTooFew { got: parts.len() });
        }
        let arity = parts[0].pred.arity;
        for part in &parts {
            if part.pred.arity != arity {
                return Err(SyntaxError::CollectiveArityMismatch {
                    part: part.pred.name.clone(),
                    expected: arity,
                    got: part.pred.arity,
                });
            }
            if part.args.len() != part.pred.arity {
                return Err(SyntaxError::ArityMismatch {
                    pred: part.pred.name.clone(),
                    arity: part.pred.arity,
                    got: part.args.len(),
                });
            }
        }
        Ok(Predicate::Collective(parts))
    }

    pub fn attributed(base: Predicate, attribute: Formula) -> Predicate {
        Predicate::Attributed(Box::new(base), Box::new(attribute))
    }

    pub fn arity(&self) -> usize {
        match self {
            Predicate::Basic(p) => p.arity,
            Predicate::Collective(parts) => parts[0].pred.arity,
            Predicate::Attributed(base, _) => base.arity(),
        }
    }
}

/// A formula of the logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// `p(gt1, ..., gtn)` for a basic predicate; arguments are g-terms.
    Atom { pred: PredSym, args: Vec<GTerm> },
    /// `~p(gt1, ..., gtn)`, the fused negated-atom form.
    NegAtom { pred: PredSym, args: Vec<GTerm> },
    Top,
    Bot,
    Eq(Term, Term),
    SurfEq(Term, Term),
    /// `P(t1, ..., tn)` for a collective or attributed predicate; arguments
    /// are plain terms.
    Apply { pred: Predicate, args: Vec<Term> },
    Neg(Box<Formula>),
    Forall(Term, Box<Formula>),
    Exists(Term, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: PredSym, args: Vec<GTerm>) -> Result<Formula, SyntaxError> {
        if args.len() != pred.arity {
            return Err(SyntaxError::ArityMismatch {
                pred: pred.name,
                arity: pred.arity,
                got: args.len(),
            });
        }
        Ok(Formula::Atom { pred, args })
    }

    pub fn neg_atom(pred: PredSym, args: Vec<GTerm>) -> Result<Formula, SyntaxError> {
        if args.len() != pred.arity {
            return Err(SyntaxError::ArityMismatch {
                pred: pred.name,
                arity: pred.arity,
                got: args.len(),
            });
        }
        Ok(Formula::NegAtom { pred, args })
    }

    pub fn apply(pred: Predicate, args: Vec<Term>) -> Result<Formula, SyntaxError> {
        if args.len() != pred.arity() {
            return Err(SyntaxError::ArityMismatch {
                pred: render_predicate_head(&pred),
                arity: pred.arity(),
                got: args.len(),
            });
        }
        Ok(Formula::Apply { pred, args })
    }

    pub fn forall(binder: Term, body: Formula) -> Result<Formula, SyntaxError> {
        if !is_variable(&binder) {
            return Err(SyntaxError::BinderNotVariable);
        }
        Ok(Formula::Forall(binder, Box::new(body)))
    }

    pub fn exists(binder: Term, body: Formula) -> Result<Formula, SyntaxError> {
        if !is_variable(&binder) {
            return Err(SyntaxError::BinderNotVariable);
        }
        Ok(Formula::Exists(binder, Box::new(body)))
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
}

/// The basic symbol at the leftmost position of a term's attribution chain.
pub fn leftmost(t: &Term) -> &Term {
    match t {
        Term::Var(_) | Term::Dom(_) => t,
        Term::Attr(head, _) => leftmost(head),
    }
}

/// Whether `t` is a variable, i.e. its leftmost symbol is a basic variable.
pub fn is_variable(t: &Term) -> bool {
    matches!(leftmost(t), Term::Var(_))
}

/// The ordered sub-term listing of a term body.
///
/// A basic one-term body lists itself. For `t1 <. ts2`, the sub-terms of
/// `ts2` come first, then every sub-term `t3` of `t1` contributes
/// `t3 <. ts2`, source order preserved within each group. For a sequence,
/// the per-item listings are concatenated in sequence order; the sequence
/// itself is not a sub-term.
pub fn subterm(ts: &TermBody) -> Vec<Term> {
    match ts.as_single() {
        Some(t) => subterm_of_term(t),
        None => {
            let mut out = Vec::new();
            for item in ts.items() {
                out.extend(subterm_of_term(item));
            }
            out
        }
    }
}

fn subterm_of_term(t: &Term) -> Vec<Term> {
    match t {
        Term::Var(_) | Term::Dom(_) => vec![t.clone()],
        Term::Attr(head, body) => {
            let mut out = subterm(body);
            for sub_of_head in subterm_of_term(head) {
                out.push(Term::Attr(Box::new(sub_of_head), body.clone()));
            }
            out
        }
    }
}

/// The subsequence of [`subterm`] whose elements are variables,
/// order preserved.
pub fn subvariable(ts: &TermBody) -> Vec<Term> {
    subterm(ts).into_iter().filter(is_variable).collect()
}

// ---------------------------------------------------------------------------
// Rendering. The printer emits the frontend's concrete grammar; for every
// parser-produced formula, parsing the rendering yields the same tree.
// ---------------------------------------------------------------------------

/// Formula precedence levels, loosest first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Arrow,
    Quant,
    AndOr,
    Neg,
}

/// Render a formula in concrete syntax with no redundant parentheses.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    render_formula(f, Prec::Arrow, &mut out);
    out
}

fn render_formula(f: &Formula, min: Prec, out: &mut String) {
    let prec = formula_prec(f);
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match f {
        Formula::Atom { pred, args } => {
            out.push_str(&pred.name);
            render_gterm_args(args, out);
        }
        Formula::NegAtom { pred, args } => {
            out.push('~');
            out.push_str(&pred.name);
            render_gterm_args(args, out);
        }
        Formula::Top => out.push_str("top"),
        Formula::Bot => out.push_str("bot"),
        Formula::Eq(a, b) => {
            render_term(a, out);
            out.push_str(" = ");
            render_term(b, out);
        }
        Formula::SurfEq(a, b) => {
            render_term(a, out);
            out.push_str(" ~= ");
            render_term(b, out);
        }
        Formula::Apply { pred, args } => {
            render_predicate(pred, out);
            out.push('(');
            for (i, t) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                render_term(t, out);
            }
            out.push(')');
        }
        Formula::Neg(inner) => {
            out.push('~');
            render_formula(inner, Prec::Neg, out);
        }
        Formula::Forall(v, body) => {
            out.push_str("forall ");
            render_term(v, out);
            out.push_str(". ");
            render_formula(body, Prec::Quant, out);
        }
        Formula::Exists(v, body) => {
            out.push_str("exists ");
            render_term(v, out);
            out.push_str(". ");
            render_formula(body, Prec::Quant, out);
        }
        Formula::And(a, b) => {
            render_binary(a, " & ", b, BinKind::And, out);
        }
        Formula::Or(a, b) => {
            render_binary(a, " | ", b, BinKind::Or, out);
        }
        Formula::Implies(a, b) => {
            render_formula(a, Prec::Quant, out);
            out.push_str(" -> ");
            render_formula(b, Prec::Arrow, out);
        }
    }
    if parens {
        out.push(')');
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BinKind {
    And,
    Or,
}

fn render_binary(a: &Formula, op: &str, b: &Formula, kind: BinKind, out: &mut String) {
    // Chains of one operator stay flat on the left; the other operator at
    // the same level, and right-nested chains, are parenthesized so that
    // left-associative parsing rebuilds the same tree.
    let left_flat = matches!(
        (a, kind),
        (Formula::And(_, _), BinKind::And) | (Formula::Or(_, _), BinKind::Or)
    );
    if left_flat {
        render_formula(a, Prec::AndOr, out);
    } else {
        render_formula(a, Prec::Neg, out);
    }
    out.push_str(op);
    render_formula(b, Prec::Neg, out);
}

fn formula_prec(f: &Formula) -> Prec {
    match f {
        Formula::Implies(_, _) => Prec::Arrow,
        Formula::Forall(_, _) | Formula::Exists(_, _) => Prec::Quant,
        Formula::And(_, _) | Formula::Or(_, _) => Prec::AndOr,
        _ => Prec::Neg,
    }
}

fn render_gterm_args(args: &[GTerm], out: &mut String) {
    out.push('(');
    for (i, gt) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if gt.is_connector() {
            out.push('^');
        }
        render_term(gt.term(), out);
    }
    out.push(')');
}

fn render_predicate(p: &Predicate, out: &mut String) {
    out.push('[');
    render_predicate_inner(p, out);
    out.push(']');
}

fn render_predicate_inner(p: &Predicate, out: &mut String) {
    match p {
        Predicate::Basic(sym) => out.push_str(&sym.name),
        Predicate::Collective(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                out.push_str(&part.pred.name);
                out.push('(');
                for (j, t) in part.args.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    render_term(t, out);
                }
                out.push(')');
            }
        }
        Predicate::Attributed(base, attr) => {
            match base.as_ref() {
                Predicate::Basic(sym) => out.push_str(&sym.name),
                Predicate::Collective(_) => render_predicate_inner(base, out),
                Predicate::Attributed(_, _) => render_predicate(base, out),
            }
            out.push_str(" :> ");
            render_formula(attr, Prec::Arrow, out);
        }
    }
}

fn render_predicate_head(p: &Predicate) -> String {
    match p {
        Predicate::Basic(sym) => sym.name.clone(),
        Predicate::Collective(parts) => format!("[{} & ...]", parts[0].pred.name),
        Predicate::Attributed(base, _) => format!("[{} :> ...]", render_predicate_head(base)),
    }
}

/// Render a term in concrete syntax.
pub fn render_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(BasicVar(n)) | Term::Dom(DomainSym(n)) => out.push_str(n),
        Term::Attr(head, body) => {
            render_term(head, out);
            out.push_str("<.");
            render_term_body(body, out);
        }
    }
}

fn render_term_body(body: &TermBody, out: &mut String) {
    match body.as_single() {
        Some(t @ (Term::Var(_) | Term::Dom(_))) => render_term(t, out),
        _ => {
            out.push('(');
            for (i, t) in body.items().iter().enumerate() {
                if i > 0 {
                    out.push('.');
                }
                render_term(t, out);
            }
            out.push(')');
        }
    }
}

/// Display a term on its own.
pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    render_term(t, &mut s);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn d(n: &str) -> Term {
        Term::dom(n)
    }

    #[test]
    fn leftmost_basic() {
        assert_eq!(leftmost(&v("x")), &v("x"));
        assert_eq!(leftmost(&d("a")), &d("a"));
        assert_eq!(leftmost(&Term::attr1(v("y"), v("x"))), &v("y"));
    }

    #[test]
    fn leftmost_deep_chain() {
        // ((u <. z) <. y) <. x
        let t = Term::attr1(Term::attr1(Term::attr1(v("u"), v("z")), v("y")), v("x"));
        assert_eq!(leftmost(&t), &v("u"));
    }

    #[test]
    fn leftmost_of_attr_equals_leftmost_of_head() {
        let head = Term::attr1(v("y"), d("a"));
        let t = Term::attr(head.clone(), TermBody::new(vec![v("p"), d("q")]).unwrap());
        assert_eq!(leftmost(&t), leftmost(&head));
    }

    #[test]
    fn subterm_basic() {
        assert_eq!(subterm(&v("x").into()), vec![v("x")]);
    }

    #[test]
    fn subterm_attributed() {
        // subterm(y <. x) = [x, y <. x]
        let t = Term::attr1(v("y"), v("x"));
        assert_eq!(subterm(&t.clone().into()), vec![v("x"), t]);
    }

    #[test]
    fn subterm_sequence_order() {
        let ts = TermBody::new(vec![v("x1"), v("x2")]).unwrap();
        assert_eq!(subterm(&ts), vec![v("x1"), v("x2")]);
    }

    #[test]
    fn subterm_deep_chain() {
        // ((u <. z) <. y) <. x lists [x, y<.x, (z<.y)<.x, ((u<.z)<.y)<.x]
        let t = Term::attr1(Term::attr1(Term::attr1(v("u"), v("z")), v("y")), v("x"));
        let subs = subterm(&t.clone().into());
        assert_eq!(subs.len(), 4);
        assert_eq!(subs[0], v("x"));
        assert_eq!(subs[1], Term::attr1(v("y"), v("x")));
        assert_eq!(subs[2], Term::attr1(Term::attr1(v("z"), v("y")), v("x")));
        assert_eq!(subs[3], t);
    }

    #[test]
    fn subvariable_respects_kinds() {
        // subvariable(y <. x) = both entries; subvariable(y <. a) = only y <. a
        let yx = Term::attr1(v("y"), v("x"));
        assert_eq!(subvariable(&yx.clone().into()), vec![v("x"), yx]);
        let ya = Term::attr1(v("y"), d("a"));
        assert_eq!(subvariable(&ya.clone().into()), vec![ya]);
        let doms = TermBody::new(vec![d("a1"), d("a2")]).unwrap();
        assert_eq!(subvariable(&doms), Vec::<Term>::new());
    }

    #[test]
    fn subvariable_is_subsequence_of_subterm() {
        let t = Term::attr(
            Term::attr1(v("y"), d("a")),
            TermBody::new(vec![v("x"), d("b")]).unwrap(),
        );
        let subs = subterm(&t.clone().into());
        let vars = subvariable(&t.into());
        let mut idx = 0;
        for s in &subs {
            if idx < vars.len() && *s == vars[idx] {
                idx += 1;
            }
        }
        assert_eq!(idx, vars.len(), "subvariable must embed into subterm in order");
    }

    #[test]
    fn is_variable_cases() {
        assert!(is_variable(&v("x")));
        assert!(!is_variable(&d("a")));
        assert!(is_variable(&Term::attr1(v("y"), d("a"))));
        assert!(!is_variable(&Term::attr1(d("a"), v("y"))));
    }

    #[test]
    fn arity_checked_constructions() {
        let p = PredSym::new("p", 1).unwrap();
        assert!(Formula::atom(p.clone(), vec![]).is_err());
        assert!(Formula::atom(p.clone(), vec![GTerm::Plain(v("x"))]).is_ok());
        assert!(PredSym::new("q", 0).is_err());

        let part = |name: &str| CollectivePart {
            pred: PredSym::new(name, 1).unwrap(),
            args: vec![v("x")],
        };
        assert!(Predicate::collective(vec![part("p1")]).is_err());
        assert!(Predicate::collective(vec![part("p1"), part("p2")]).is_ok());

        let two = CollectivePart {
            pred: PredSym::new("r", 2).unwrap(),
            args: vec![v("x"), v("y")],
        };
        assert!(Predicate::collective(vec![part("p1"), two]).is_err());
    }

    #[test]
    fn binder_must_be_variable() {
        assert!(Formula::forall(d("a"), Formula::Top).is_err());
        assert!(Formula::forall(Term::attr1(v("y"), v("x")), Formula::Top).is_ok());
    }

    #[test]
    fn render_simple() {
        let p = PredSym::new("p", 1).unwrap();
        let f = Formula::neg(Formula::atom(p.clone(), vec![GTerm::Plain(v("x"))]).unwrap());
        assert_eq!(render(&f), "~p(x)");
        assert_eq!(render(&Formula::implies(Formula::Top, Formula::Bot)), "top -> bot");
    }

    #[test]
    fn render_term_chains() {
        let t = Term::attr1(Term::attr1(Term::attr1(v("w"), v("z")), v("y")), v("x"));
        assert_eq!(term_to_string(&t), "w<.z<.y<.x");
        let nested_body = Term::attr1(v("y"), Term::attr1(v("u"), v("x")));
        assert_eq!(term_to_string(&nested_body), "y<.(u<.x)");
        let seq = Term::attr(v("y"), TermBody::new(vec![v("a"), v("b")]).unwrap());
        assert_eq!(term_to_string(&seq), "y<.(a.b)");
    }
}
