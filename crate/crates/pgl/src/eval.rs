//! The three-valued evaluator: Bochvar connective tables and the forcing
//! relation over finite structures, with the alphabetical override rules
//! that yield the undecided value on empty, unavailable, or improper
//! material, plus coherence and satisfaction.

use std::fmt;
use std::ops;

use crate::binding::is_closed;
use crate::model::{Ctx, InterpError, ObjBody, Structure};
use crate::syntax::{Formula, GTerm, Predicate, Term};

/// A Bochvar three-value: true, false, or undecided. The undecided value is
/// infectious under conjunction, disjunction, and negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum TruthValue {
    True,
    False,
    Undecided,
}

pub use TruthValue::{False as TV_FALSE, True as TV_TRUE, Undecided as TV_UNDECIDED};

impl TruthValue {
    pub fn from_bool(b: bool) -> TruthValue {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    pub fn is_classical(self) -> bool {
        self != TruthValue::Undecided
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TruthValue::True => "T",
            TruthValue::False => "F",
            TruthValue::Undecided => "U",
        };
        f.write_str(s)
    }
}

pub fn tv_and(a: TruthValue, b: TruthValue) -> TruthValue {
    use TruthValue::*;
    match (a, b) {
        (Undecided, _) | (_, Undecided) => Undecided,
        (True, True) => True,
        _ => False,
    }
}

pub fn tv_or(a: TruthValue, b: TruthValue) -> TruthValue {
    use TruthValue::*;
    match (a, b) {
        (Undecided, _) | (_, Undecided) => Undecided,
        (False, False) => False,
        _ => True,
    }
}

pub fn tv_not(a: TruthValue) -> TruthValue {
    use TruthValue::*;
    match a {
        True => False,
        False => True,
        Undecided => Undecided,
    }
}

impl ops::BitAnd for TruthValue {
    type Output = TruthValue;
    fn bitand(self, rhs: TruthValue) -> TruthValue {
        tv_and(self, rhs)
    }
}

impl ops::BitOr for TruthValue {
    type Output = TruthValue;
    fn bitor(self, rhs: TruthValue) -> TruthValue {
        tv_or(self, rhs)
    }
}

impl ops::Not for TruthValue {
    type Output = TruthValue;
    fn not(self) -> TruthValue {
        tv_not(self)
    }
}

/// Which domain a quantified variable ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantifierMode {
    /// The domain of the context designated by the variable's attribute
    /// chain: a basic variable ranges over the current context's domain, an
    /// attributed one over the attribute space its interpreted tail names.
    #[default]
    AttributeChain,
    /// The written rule: the attribute space of the variable's current
    /// value. Kept selectable for auditing; it needs a pre-seeded
    /// assignment to get off the ground.
    Strict,
}

/// Evaluation options.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub quantifier: QuantifierMode,
}

/// Rule identifiers for evaluation traces: the override rules A-E and the
/// numbered forcing rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleId {
    A,
    B,
    C,
    D,
    E,
    Atom,
    Collective,
    AttributedPred,
    Truth,
    Falsity,
    Negation,
    Forall,
    Exists,
    Conjunction,
    Disjunction,
    Implication,
    Equality,
    SurfaceEquality,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::A => "A",
            RuleId::B => "B",
            RuleId::C => "C",
            RuleId::D => "D",
            RuleId::E => "E",
            RuleId::Atom => "1",
            RuleId::Collective => "2",
            RuleId::AttributedPred => "3",
            RuleId::Truth => "4",
            RuleId::Falsity => "5",
            RuleId::Negation => "6",
            RuleId::Forall => "7",
            RuleId::Exists => "8",
            RuleId::Conjunction => "9",
            RuleId::Disjunction => "10",
            RuleId::Implication => "12",
            RuleId::Equality => "13",
            RuleId::SurfaceEquality => "14",
        };
        f.write_str(s)
    }
}

/// One trace record: the rule applied at a node, the context, and the value.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub depth: usize,
    pub rule: RuleId,
    pub ctx: String,
    pub node: String,
    pub value: TruthValue,
}

/// A sink collecting trace records during evaluation.
#[derive(Debug, Default)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:indent$}[{}] {} @ {} = {}\n",
                "",
                e.rule,
                e.node,
                e.ctx,
                e.value,
                indent = e.depth * 2
            ));
        }
        out
    }
}

/// Evaluation failures. These are diagnosed errors, never silent values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("formula is not closed; evaluation requires a well-formed input")]
    OpenFormula,
    #[error(transparent)]
    Interp(#[from] InterpError),
}

struct Evaluator<'a> {
    st: &'a Structure,
    opts: EvalOptions,
    trace: Option<&'a mut Trace>,
}

/// Evaluate a closed formula at a context. The caller is expected to have
/// checked well-formedness and structure validity; closedness is re-checked
/// here because an open formula would otherwise surface as a confusing
/// missing-assignment error.
pub fn evaluate(
    st: &Structure,
    ctx: &Ctx,
    f: &Formula,
    opts: EvalOptions,
) -> Result<TruthValue, EvalError> {
    if ctx.is_empty() && !is_closed(f) {
        return Err(EvalError::OpenFormula);
    }
    let mut ev = Evaluator {
        st,
        opts,
        trace: None,
    };
    ev.eval(st, ctx, f, 0)
}

/// Evaluate while recording the rule applied at every node.
pub fn evaluate_traced(
    st: &Structure,
    ctx: &Ctx,
    f: &Formula,
    opts: EvalOptions,
    trace: &mut Trace,
) -> Result<TruthValue, EvalError> {
    if ctx.is_empty() && !is_closed(f) {
        return Err(EvalError::OpenFormula);
    }
    let mut ev = Evaluator {
        st,
        opts,
        trace: Some(trace),
    };
    ev.eval(st, ctx, f, 0)
}

/// Whether the structure coheres to the formula: top-level evaluation is
/// classical (true or false).
pub fn coheres(st: &Structure, f: &Formula, opts: EvalOptions) -> Result<bool, EvalError> {
    Ok(evaluate(st, &Ctx::empty(), f, opts)?.is_classical())
}

/// Whether the structure satisfies the formula: it coheres and evaluates
/// to true.
pub fn satisfies(st: &Structure, f: &Formula, opts: EvalOptions) -> Result<bool, EvalError> {
    Ok(evaluate(st, &Ctx::empty(), f, opts)? == TruthValue::True)
}

impl<'a> Evaluator<'a> {
    fn record(&mut self, depth: usize, rule: RuleId, ctx: &Ctx, f: &Formula, value: TruthValue) {
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.entries.push(TraceEntry {
                depth,
                rule,
                ctx: ctx.to_string(),
                node: f.to_string(),
                value,
            });
        }
    }

    fn eval(
        &mut self,
        st: &Structure,
        ctx: &Ctx,
        f: &Formula,
        depth: usize,
    ) -> Result<TruthValue, EvalError> {
        match f {
            Formula::Atom { pred, args } => {
                let (rule, value) = self.eval_atom(st, ctx, pred, args)?;
                self.record(depth, rule, ctx, f, value);
                Ok(value)
            }
            Formula::NegAtom { pred, args } => {
                let (_, inner) = self.eval_atom(st, ctx, pred, args)?;
                let value = tv_not(inner);
                self.record(depth, RuleId::Negation, ctx, f, value);
                Ok(value)
            }
            Formula::Top => {
                self.record(depth, RuleId::Truth, ctx, f, TruthValue::True);
                Ok(TruthValue::True)
            }
            Formula::Bot => {
                self.record(depth, RuleId::Falsity, ctx, f, TruthValue::False);
                Ok(TruthValue::False)
            }
            Formula::Eq(t1, t2) => {
                let proper =
                    st.proper_term(ctx, t1)? && st.proper_term(ctx, t2)?;
                if !proper {
                    self.record(depth, RuleId::B, ctx, f, TruthValue::Undecided);
                    return Ok(TruthValue::Undecided);
                }
                let a = st.interp_term(ctx, t1)?;
                let b = st.interp_term(ctx, t2)?;
                let value = TruthValue::from_bool(a == b);
                self.record(depth, RuleId::Equality, ctx, f, value);
                Ok(value)
            }
            Formula::SurfEq(t1, t2) => {
                let proper =
                    st.proper_term(ctx, t1)? && st.proper_term(ctx, t2)?;
                if !proper {
                    self.record(depth, RuleId::C, ctx, f, TruthValue::Undecided);
                    return Ok(TruthValue::Undecided);
                }
                let a = st.interp_term(ctx, t1)?;
                let b = st.interp_term(ctx, t2)?;
                let value = TruthValue::from_bool(Structure::surface_eq(&a, &b));
                self.record(depth, RuleId::SurfaceEquality, ctx, f, value);
                Ok(value)
            }
            Formula::Apply { pred, args } => self.eval_apply(st, ctx, f, pred, args, depth),
            Formula::Neg(inner) => {
                let value = tv_not(self.eval(st, ctx, inner, depth + 1)?);
                self.record(depth, RuleId::Negation, ctx, f, value);
                Ok(value)
            }
            Formula::Forall(v, body) => {
                let value = self.eval_quantifier(st, ctx, v, body, true, depth)?;
                self.record(depth, RuleId::Forall, ctx, f, value);
                Ok(value)
            }
            Formula::Exists(v, body) => {
                let value = self.eval_quantifier(st, ctx, v, body, false, depth)?;
                self.record(depth, RuleId::Exists, ctx, f, value);
                Ok(value)
            }
            Formula::And(a, b) => {
                let va = self.eval(st, ctx, a, depth + 1)?;
                let vb = self.eval(st, ctx, b, depth + 1)?;
                let value = tv_and(va, vb);
                self.record(depth, RuleId::Conjunction, ctx, f, value);
                Ok(value)
            }
            Formula::Or(a, b) => {
                let va = self.eval(st, ctx, a, depth + 1)?;
                let vb = self.eval(st, ctx, b, depth + 1)?;
                let value = tv_or(va, vb);
                self.record(depth, RuleId::Disjunction, ctx, f, value);
                Ok(value)
            }
            Formula::Implies(a, b) => {
                let va = self.eval(st, ctx, a, depth + 1)?;
                let vb = self.eval(st, ctx, b, depth + 1)?;
                let value = tv_or(tv_not(va), vb);
                self.record(depth, RuleId::Implication, ctx, f, value);
                Ok(value)
            }
        }
    }

    /// A basic-predicate atom: the override rule first (empty or improper
    /// table, unavailable predicate, improper arguments), then tuple-table
    /// membership under the context's inclusion relation.
    fn eval_atom(
        &mut self,
        st: &Structure,
        ctx: &Ctx,
        pred: &crate::syntax::PredSym,
        args: &[GTerm],
    ) -> Result<(RuleId, TruthValue), EvalError> {
        let table = st.table(ctx, &pred.name);
        let empty = table.map_or(true, |t| t.tuples.is_empty());
        let improper_table = table.map_or(true, |t| {
            !st.proper_objects(ctx, &t.tuples.iter().cloned().collect::<Vec<_>>())
        });
        let unavailable = !st.available(ctx, &pred.name);
        let mut improper_arg = false;
        for gt in args {
            if !st.proper_gterm(ctx, gt)? {
                improper_arg = true;
                break;
            }
        }
        if empty || improper_table || unavailable || improper_arg {
            return Ok((RuleId::A, TruthValue::Undecided));
        }
        let table = table.expect("nonempty table");
        let mut tuple = Vec::with_capacity(args.len());
        for gt in args {
            tuple.push(st.interp_gterm(ctx, gt)?);
        }
        let tuple = ObjBody(tuple);
        let value = TruthValue::from_bool(st.tuple_in_table(ctx, &tuple, table));
        Ok((RuleId::Atom, value))
    }

    fn eval_apply(
        &mut self,
        st: &Structure,
        ctx: &Ctx,
        f: &Formula,
        pred: &Predicate,
        args: &[Term],
        depth: usize,
    ) -> Result<TruthValue, EvalError> {
        match pred {
            Predicate::Basic(sym) => {
                let gargs: Vec<GTerm> = args.iter().cloned().map(GTerm::Plain).collect();
                let (rule, value) = self.eval_atom(st, ctx, sym, &gargs)?;
                self.record(depth, rule, ctx, f, value);
                Ok(value)
            }
            Predicate::Collective(parts) => {
                // Override rule: any improper part term or argument term.
                let mut improper = false;
                for t in args.iter().chain(parts.iter().flat_map(|p| p.args.iter())) {
                    if !st.proper_term(ctx, t)? {
                        improper = true;
                        break;
                    }
                }
                if improper {
                    self.record(depth, RuleId::D, ctx, f, TruthValue::Undecided);
                    return Ok(TruthValue::Undecided);
                }
                let whole = self.interp_tuple(st, ctx, args)?;
                let mut value = TruthValue::True;
                for part in parts {
                    let gargs: Vec<GTerm> =
                        part.args.iter().cloned().map(GTerm::Plain).collect();
                    let (_, part_value) = self.eval_atom(st, ctx, &part.pred, &gargs)?;
                    let part_tuple = self.interp_tuple(st, ctx, &part.args)?;
                    let membership =
                        TruthValue::from_bool(st.included(ctx, &part_tuple, &whole));
                    value = tv_and(value, tv_and(part_value, membership));
                }
                self.record(depth, RuleId::Collective, ctx, f, value);
                Ok(value)
            }
            Predicate::Attributed(base, attr) => {
                // Override rule: improper argument terms, or an attribute
                // that does not hold in the argument-extended context.
                let mut improper = false;
                for t in args {
                    if !st.proper_term(ctx, t)? {
                        improper = true;
                        break;
                    }
                }
                if improper {
                    self.record(depth, RuleId::E, ctx, f, TruthValue::Undecided);
                    return Ok(TruthValue::Undecided);
                }
                let extended = ctx.prepended(self.interp_tuple(st, ctx, args)?);
                let attr_value = self.eval(st, &extended, attr, depth + 1)?;
                if attr_value != TruthValue::True {
                    self.record(depth, RuleId::E, ctx, f, TruthValue::Undecided);
                    return Ok(TruthValue::Undecided);
                }
                let base_formula = Formula::Apply {
                    pred: (**base).clone(),
                    args: args.to_vec(),
                };
                let base_value = self.eval(st, ctx, &base_formula, depth + 1)?;
                self.record(depth, RuleId::AttributedPred, ctx, f, base_value);
                Ok(base_value)
            }
        }
    }

    fn interp_tuple(
        &self,
        st: &Structure,
        ctx: &Ctx,
        args: &[Term],
    ) -> Result<ObjBody, EvalError> {
        let mut out = Vec::with_capacity(args.len());
        for t in args {
            out.push(st.interp_term(ctx, t)?);
        }
        Ok(ObjBody(out))
    }

    /// Quantifiers iterate over the domain the variable's attribute chain
    /// designates, conjoining or disjoining the instance values; an empty
    /// range is undecided.
    fn eval_quantifier(
        &mut self,
        st: &Structure,
        ctx: &Ctx,
        v: &Term,
        body: &Formula,
        universal: bool,
        depth: usize,
    ) -> Result<TruthValue, EvalError> {
        let range_ctx = match self.opts.quantifier {
            QuantifierMode::AttributeChain => st.quantifier_range_ctx(ctx, v)?,
            QuantifierMode::Strict => {
                let value = st.interp_term(ctx, v)?;
                ctx.prepended(ObjBody::single(value))
            }
        };
        let range = st.domain(&range_ctx);
        if range.is_empty() {
            return Ok(TruthValue::Undecided);
        }
        let mut acc: Option<TruthValue> = None;
        for d in &range {
            let updated = st.update(ctx, v, d)?;
            let inst = self.eval(&updated, ctx, body, depth + 1)?;
            acc = Some(match acc {
                None => inst,
                Some(prev) => {
                    if universal {
                        tv_and(prev, inst)
                    } else {
                        tv_or(prev, inst)
                    }
                }
            });
        }
        Ok(acc.expect("nonempty range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Obj, ObjSym, PredTable, StructureCore};
    use crate::syntax::{PredSym, Term};
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn bochvar_tables() {
        use TruthValue::*;
        assert_eq!(tv_and(Undecided, True), Undecided);
        assert_eq!(tv_and(Undecided, False), Undecided);
        assert_eq!(tv_or(Undecided, True), Undecided);
        assert_eq!(tv_or(Undecided, False), Undecided);
        assert_eq!(tv_not(Undecided), Undecided);
        assert_eq!(tv_or(False, True), True);
        assert_eq!(tv_and(True, True), True);
        assert_eq!(tv_and(True, False), False);
        assert_eq!(tv_not(True), False);
        // associativity and commutativity over all values
        let all = [True, False, Undecided];
        for &a in &all {
            for &b in &all {
                assert_eq!(tv_and(a, b), tv_and(b, a));
                assert_eq!(tv_or(a, b), tv_or(b, a));
                for &c in &all {
                    assert_eq!(tv_and(tv_and(a, b), c), tv_and(a, tv_and(b, c)));
                    assert_eq!(tv_or(tv_or(a, b), c), tv_or(a, tv_or(b, c)));
                }
            }
        }
    }

    fn flat_structure(tuples: &[(&str, Vec<Vec<&str>>)]) -> Structure {
        let mut core = StructureCore::default();
        let mut universe = BTreeSet::new();
        let mut tables = BTreeMap::new();
        for (name, tups) in tuples {
            let arity = tups.first().map_or(1, |t| t.len());
            let mut set = BTreeSet::new();
            for tup in tups {
                let body = ObjBody(
                    tup.iter()
                        .map(|b| ObjSym::Basic(Obj::new(*b, 1)))
                        .collect(),
                );
                for sym in &body.0 {
                    universe.insert(sym.leftmost().clone());
                }
                set.insert(body);
            }
            tables.insert(name.to_string(), PredTable { arity, tuples: set });
        }
        core.tables.insert(Ctx::empty(), tables);
        core.universe = universe;
        core
            .universe
            .extend([Obj::new("d1", 1), Obj::new("d2", 1)]);
        Structure::new(core)
    }

    fn atom(name: &str, args: Vec<Term>) -> Formula {
        Formula::atom(
            PredSym::new(name, args.len()).unwrap(),
            args.into_iter().map(GTerm::Plain).collect(),
        )
        .unwrap()
    }

    #[test]
    fn top_bot_and_empty_table() {
        let st = flat_structure(&[("p", vec![vec!["d1"]]), ("q", vec![])]);
        let opts = EvalOptions::default();
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &Formula::Top, opts).unwrap(),
            TruthValue::True
        );
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &Formula::Bot, opts).unwrap(),
            TruthValue::False
        );
        // an atom over the empty table is undecided, and infects the whole
        let f = Formula::exists(Term::var("x"), atom("q", vec![Term::var("x")])).unwrap();
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &f, opts).unwrap(),
            TruthValue::Undecided
        );
    }

    #[test]
    fn quantifiers_aggregate() {
        let st = flat_structure(&[("p", vec![vec!["d1"]])]);
        let opts = EvalOptions::default();
        let all = Formula::forall(Term::var("x"), atom("p", vec![Term::var("x")])).unwrap();
        let some = Formula::exists(Term::var("x"), atom("p", vec![Term::var("x")])).unwrap();
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &all, opts).unwrap(),
            TruthValue::False
        );
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &some, opts).unwrap(),
            TruthValue::True
        );
    }

    #[test]
    fn implication_is_not_vacuous_over_undecided() {
        // p empty makes p(x) -> q(x) undecided, not true
        let st = flat_structure(&[("p", vec![]), ("q", vec![vec!["d1"]])]);
        let opts = EvalOptions::default();
        let f = Formula::forall(
            Term::var("x"),
            Formula::implies(atom("p", vec![Term::var("x")]), atom("q", vec![Term::var("x")])),
        )
        .unwrap();
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &f, opts).unwrap(),
            TruthValue::Undecided
        );
    }

    #[test]
    fn open_formula_rejected() {
        let st = flat_structure(&[("p", vec![vec!["d1"]])]);
        let f = atom("p", vec![Term::var("x")]);
        assert_eq!(
            evaluate(&st, &Ctx::empty(), &f, EvalOptions::default()),
            Err(EvalError::OpenFormula)
        );
    }

    #[test]
    fn negation_duality() {
        let st = flat_structure(&[("p", vec![vec!["d1"]]), ("q", vec![])]);
        let opts = EvalOptions::default();
        let candidates = [
            Formula::Top,
            Formula::Bot,
            Formula::forall(Term::var("x"), atom("p", vec![Term::var("x")])).unwrap(),
            Formula::exists(Term::var("x"), atom("q", vec![Term::var("x")])).unwrap(),
        ];
        for f in candidates {
            let direct = evaluate(&st, &Ctx::empty(), &Formula::neg(f.clone()), opts).unwrap();
            let dual = tv_not(evaluate(&st, &Ctx::empty(), &f, opts).unwrap());
            assert_eq!(direct, dual);
        }
    }

    #[test]
    fn trace_names_rules() {
        let st = flat_structure(&[("p", vec![vec!["d1"]])]);
        let f = Formula::exists(Term::var("x"), atom("p", vec![Term::var("x")])).unwrap();
        let mut trace = Trace::default();
        evaluate_traced(&st, &Ctx::empty(), &f, EvalOptions::default(), &mut trace).unwrap();
        assert!(trace.entries.iter().any(|e| e.rule == RuleId::Exists));
        assert!(trace.entries.iter().any(|e| e.rule == RuleId::Atom));
        let rendered = trace.render();
        assert!(rendered.contains("[8]"));
        assert!(rendered.contains("[1]"));
    }
}
