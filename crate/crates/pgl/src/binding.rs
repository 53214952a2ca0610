//! Marked term bodies and the free/bound-variable calculus.
//!
//! A marked term body is a context list with a dagger cursor on its first
//! segment; `oplus` prepends a segment, `tau_l`/`tau_r` split the cursor off,
//! and `delta` erases the mark, rebuilding the left-nested `<.` chain. On top
//! of these sit the occurrence predicate and the `free`/`bound` functions
//! that make a closed formula checkable.

use std::collections::BTreeSet;

use crate::syntax::{
    is_variable, leftmost, subvariable, BasicVar, Formula, GTerm, Predicate, Term, TermBody,
};

/// A context list of term-body segments; the dagger marks segment 0. The
/// empty list encodes the empty marked body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MarkedTermBody {
    segs: Vec<TermBody>,
}

/// Usage errors for the marked-body extractors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BindingError {
    #[error("tau_l and tau_r are undefined on the empty marked term body")]
    EmptyMarkedBody,
}

impl MarkedTermBody {
    /// The empty marked body.
    pub fn empty() -> Self {
        MarkedTermBody { segs: Vec::new() }
    }

    pub fn from_segments(segs: Vec<TermBody>) -> Self {
        MarkedTermBody { segs }
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn segments(&self) -> &[TermBody] {
        &self.segs
    }
}

/// Prepend `ts` as the new daggered segment of `m`.
pub fn oplus(ts: TermBody, m: &MarkedTermBody) -> MarkedTermBody {
    let mut segs = Vec::with_capacity(m.segs.len() + 1);
    segs.push(ts);
    segs.extend(m.segs.iter().cloned());
    MarkedTermBody { segs }
}

/// The daggered segment.
pub fn tau_l(m: &MarkedTermBody) -> Result<&TermBody, BindingError> {
    m.segs.first().ok_or(BindingError::EmptyMarkedBody)
}

/// Drop the daggered segment, re-marking the next.
pub fn tau_r(m: &MarkedTermBody) -> Result<MarkedTermBody, BindingError> {
    if m.segs.is_empty() {
        return Err(BindingError::EmptyMarkedBody);
    }
    Ok(MarkedTermBody {
        segs: m.segs[1..].to_vec(),
    })
}

/// The mark-erased image of a marked body: a left-nested chain of segments,
/// or nothing for the empty marked body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermChain(Vec<TermBody>);

impl TermChain {
    pub fn segments(&self) -> &[TermBody] {
        &self.0
    }

    /// Fold the chain into a single term when the innermost segment is a
    /// single term: `[t, s1, s2]` becomes `t <. s1 <. s2`.
    pub fn into_term(self) -> Option<Term> {
        let mut iter = self.0.into_iter();
        let head = iter.next()?;
        let mut acc = head.as_single()?.clone();
        for seg in iter {
            acc = Term::Attr(Box::new(acc), seg);
        }
        Some(acc)
    }
}

/// Erase the dagger. Returns `None` for the empty marked body.
pub fn delta(m: &MarkedTermBody) -> Option<TermChain> {
    if m.segs.is_empty() {
        None
    } else {
        Some(TermChain(m.segs.clone()))
    }
}

/// The attribution spine of a term, innermost first: `((w<.z)<.y)<.x` yields
/// segments `[w]`, `[z]`, `[y]`, `[x]`.
pub fn spine(t: &Term) -> Vec<TermBody> {
    match t {
        Term::Var(_) | Term::Dom(_) => vec![TermBody::single(t.clone())],
        Term::Attr(head, body) => {
            let mut segs = spine(head);
            segs.push(body.clone());
            segs
        }
    }
}

/// The nonempty tail iterates of a variable: marking its leftmost symbol and
/// repeatedly dropping the daggered segment until nothing is left.
///
/// `tails(x)` is empty; `tails(y<.x)` is the single marked body `[x]`.
pub fn tails(v: &Term) -> Vec<MarkedTermBody> {
    debug_assert!(is_variable(v));
    let segs = spine(v);
    (1..segs.len())
        .map(|k| MarkedTermBody {
            segs: segs[k..].to_vec(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Occurrence of a variable.
// ---------------------------------------------------------------------------

/// Whether variable `v` occurs in the term `t`.
pub fn occurs_in_term(v: &Term, t: &Term) -> bool {
    match_term(v, t)
}

/// Whether variable `v` occurs in the term body `ts`.
pub fn occurs_in_body(v: &Term, ts: &TermBody) -> bool {
    ts.items().iter().any(|item| match_term(v, item))
}

/// Whether variable `v` occurs in the formula `f`.
pub fn occurs_in_formula(v: &Term, f: &Formula) -> bool {
    match_formula(v, f)
}

fn match_term(v: &Term, t: &Term) -> bool {
    match (v, t) {
        (Term::Var(x1), Term::Var(x2)) => x1 == x2,
        (Term::Var(_), Term::Attr(_, body)) => {
            body.items().iter().any(|item| match_term(v, item))
        }
        (Term::Attr(vh, vb), Term::Attr(th, tb)) => {
            let in_body = tb.items().iter().any(|item| match_term(v, item));
            let aligned = vb.len() == tb.len()
                && vb
                    .items()
                    .iter()
                    .zip(tb.items())
                    .all(|(a, b)| match_term(a, b))
                && match_term(vh, th);
            in_body || aligned
        }
        // No clause covers the remaining shapes (domain symbols never match,
        // an attributed pattern never matches a basic symbol).
        _ => false,
    }
}

fn match_gterm(v: &Term, gt: &GTerm) -> bool {
    match gt {
        GTerm::Plain(t) => match_term(v, t),
        // Connectors host no occurrences; they are resolved against the
        // enclosing node's arguments instead.
        GTerm::Connector(_) => false,
    }
}

/// The application of a predicate to terms, viewed as a formula; used where
/// occurrence and scoping clauses recurse on a predicate position.
fn base_apply(pred: &Predicate, args: &[Term]) -> Formula {
    match pred {
        Predicate::Basic(sym) => Formula::Atom {
            pred: sym.clone(),
            args: args.iter().cloned().map(GTerm::Plain).collect(),
        },
        _ => Formula::Apply {
            pred: pred.clone(),
            args: args.to_vec(),
        },
    }
}

fn match_formula(v: &Term, f: &Formula) -> bool {
    match f {
        Formula::Atom { args, .. } | Formula::NegAtom { args, .. } => {
            args.iter().any(|gt| match_gterm(v, gt))
        }
        Formula::Top | Formula::Bot => false,
        Formula::Eq(t1, t2) | Formula::SurfEq(t1, t2) => match_term(v, t1) || match_term(v, t2),
        Formula::Apply { pred, args } => match pred {
            Predicate::Basic(_) => args.iter().any(|t| match_term(v, t)),
            Predicate::Collective(parts) => {
                let in_outer = args.iter().any(|t| match_term(v, t));
                let in_parts = parts
                    .iter()
                    .any(|part| part.args.iter().any(|t| match_term(v, t)));
                let in_part_formulas = match v {
                    Term::Attr(_, _) => parts.iter().any(|part| {
                        match_formula(
                            v,
                            &base_apply(&Predicate::Basic(part.pred.clone()), &part.args),
                        )
                    }),
                    _ => false,
                };
                in_outer || in_parts || in_part_formulas
            }
            Predicate::Attributed(base, attr) => {
                let in_args = args.iter().any(|t| match_term(v, t));
                let in_base = match_formula(v, &base_apply(base, args));
                let aligned = match v {
                    Term::Attr(vh, vb) => {
                        vb.len() == args.len()
                            && vb
                                .items()
                                .iter()
                                .zip(args.iter())
                                .all(|(a, b)| match_term(a, b))
                            && match_formula(vh, attr)
                    }
                    _ => false,
                };
                in_args || in_base || aligned
            }
        },
        Formula::Neg(inner) => match_formula(v, inner),
        Formula::Forall(binder, body) | Formula::Exists(binder, body) => {
            let binder_subvars = subvariable(&TermBody::single(binder.clone()));
            let in_binder = binder_subvars
                .iter()
                .filter(|vx| *vx != binder)
                .any(|vx| match_term(v, vx));
            in_binder || match_formula(v, body)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            match_formula(v, a) || match_formula(v, b)
        }
    }
}

// ---------------------------------------------------------------------------
// Free and bound variables.
// ---------------------------------------------------------------------------

/// Prefix a variable with the context and fold it back into a term.
fn contextualize(v: &Term, m: &MarkedTermBody) -> Term {
    let marked = oplus(TermBody::single(v.clone()), m);
    delta(&marked)
        .expect("nonempty by construction")
        .into_term()
        .expect("head segment is a single term")
}

/// Candidate variables that might occur in a term: its subvariables.
fn candidates(t: &Term) -> Vec<Term> {
    subvariable(&TermBody::single(t.clone()))
}

/// Replace the leftmost symbol of `v` with the basic leaf `lm`.
fn graft_leftmost(v: &Term, lm: &Term) -> Term {
    match v {
        Term::Var(_) | Term::Dom(_) => lm.clone(),
        Term::Attr(head, body) => Term::Attr(Box::new(graft_leftmost(head, lm)), body.clone()),
    }
}

/// The free variables of `f` under context `m`.
pub fn free(m: &MarkedTermBody, f: &Formula) -> BTreeSet<Term> {
    free_bound(m, f).0
}

/// The bound variables of `f` under context `m`.
pub fn bound(m: &MarkedTermBody, f: &Formula) -> BTreeSet<Term> {
    free_bound(m, f).1
}

/// Free and bound variable sets in one traversal. The two recursions extend
/// contexts identically at every node, so computing them together keeps
/// corpus checking linear in the formula size.
pub fn free_bound(m: &MarkedTermBody, f: &Formula) -> (BTreeSet<Term>, BTreeSet<Term>) {
    match f {
        Formula::Top | Formula::Bot => (BTreeSet::new(), BTreeSet::new()),
        Formula::Eq(t1, t2) | Formula::SurfEq(t1, t2) => {
            let mut fr = BTreeSet::new();
            for v in candidates(t1).into_iter().chain(candidates(t2)) {
                if occurs_in_term(&v, t1) || occurs_in_term(&v, t2) {
                    fr.insert(contextualize(&v, m));
                }
            }
            (fr, BTreeSet::new())
        }
        Formula::Atom { args, .. } | Formula::NegAtom { args, .. } => {
            let mut fr = BTreeSet::new();
            for gt in args {
                if let GTerm::Plain(t) = gt {
                    for v in candidates(t) {
                        if args.iter().any(|g| match_gterm(&v, g)) {
                            fr.insert(contextualize(&v, m));
                        }
                    }
                }
            }
            (fr, BTreeSet::new())
        }
        Formula::Apply { pred, args } => match pred {
            Predicate::Basic(sym) => {
                let atom = base_apply(&Predicate::Basic(sym.clone()), args);
                free_bound(m, &atom)
            }
            Predicate::Collective(parts) => {
                let mut fr = BTreeSet::new();
                for t in args {
                    for v in candidates(t) {
                        if args.iter().any(|u| match_term(&v, u)) {
                            fr.insert(contextualize(&v, m));
                        }
                    }
                }
                let extended = oplus(
                    TermBody::new(args.to_vec()).expect("apply has at least one argument"),
                    m,
                );
                let mut bd = BTreeSet::new();
                for part in parts {
                    let part_atom =
                        base_apply(&Predicate::Basic(part.pred.clone()), &part.args);
                    let (pf, pb) = free_bound(&extended, &part_atom);
                    fr.extend(pf);
                    bd.extend(pb);
                }
                (fr, bd)
            }
            Predicate::Attributed(base, attr) => {
                let (mut fr, mut bd) = free_bound(m, &base_apply(base, args));
                let extended = oplus(
                    TermBody::new(args.to_vec()).expect("apply has at least one argument"),
                    m,
                );
                let (af, ab) = free_bound(&extended, attr);
                fr.extend(af);
                bd.extend(ab);
                (fr, bd)
            }
        },
        Formula::Neg(inner) => free_bound(m, inner),
        Formula::Forall(binder, body) | Formula::Exists(binder, body) => {
            let (mut fr, mut bd) = free_bound(m, body);
            let lm = leftmost(binder).clone();
            let binder_subvars = subvariable(&TermBody::single(binder.clone()));
            let mut newly_bound = BTreeSet::new();
            for vx in &binder_subvars {
                if leftmost(vx) != &lm {
                    fr.insert(contextualize(vx, m));
                }
                newly_bound.insert(contextualize(&graft_leftmost(vx, &lm), m));
            }
            fr = fr.difference(&newly_bound).cloned().collect();
            bd.extend(newly_bound);
            (fr, bd)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let (mut fa, mut ba) = free_bound(m, a);
            let (fb, bb) = free_bound(m, b);
            fa.extend(fb);
            ba.extend(bb);
            (fa, ba)
        }
    }
}

/// Whether a formula is closed: no free variables under the empty context.
pub fn is_closed(f: &Formula) -> bool {
    free(&MarkedTermBody::empty(), f).is_empty()
}
