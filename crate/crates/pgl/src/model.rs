//! Finite semantic structures: nested domains, context-indexed predicate
//! tables and assignments, the nesting order on object bodies, indexed
//! inclusions, surface equality over objects, properness checks, and
//! functional assignment update.
//!
//! Contexts are chains of object-body segments, innermost first; the chain
//! for the empty context is empty. A chain headed by a single attributed
//! object symbol denotes the same context as its flattened spine, so chains
//! are kept canonical (no leading one-element attributed segment).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::binding::{spine, tails};
use crate::syntax::{is_variable, leftmost, GTerm, PredSym, Term, TermBody};

/// A basic object: a base name from the underlying set paired with a copy
/// index. Copies of one base are indistinguishable inside the domain that
/// holds them but distinct outside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obj {
    pub base: String,
    pub copy: u32,
}

impl Obj {
    pub fn new(base: impl Into<String>, copy: u32) -> Self {
        Obj {
            base: base.into(),
            copy,
        }
    }

    /// Projection to the base name, forgetting the copy index.
    pub fn rho(&self) -> &str {
        &self.base
    }
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.base, self.copy)
    }
}

/// An object symbol: a basic object or an attributed chain, mirroring terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjSym {
    Basic(Obj),
    Attr(Box<ObjSym>, ObjBody),
}

impl ObjSym {
    pub fn basic(o: Obj) -> Self {
        ObjSym::Basic(o)
    }

    pub fn attr1(head: ObjSym, body: ObjSym) -> Self {
        ObjSym::Attr(Box::new(head), ObjBody(vec![body]))
    }

    /// The basic object at the leftmost position of the chain.
    pub fn leftmost(&self) -> &Obj {
        match self {
            ObjSym::Basic(o) => o,
            ObjSym::Attr(head, _) => head.leftmost(),
        }
    }

    /// The attribution spine, innermost first, mirroring term spines.
    pub fn spine(&self) -> Vec<ObjBody> {
        match self {
            ObjSym::Basic(_) => vec![ObjBody(vec![self.clone()])],
            ObjSym::Attr(head, body) => {
                let mut segs = head.spine();
                segs.push(body.clone());
                segs
            }
        }
    }

    /// The ordered sub-object listing, mirroring the sub-term listing.
    pub fn subobjects(&self) -> Vec<ObjSym> {
        match self {
            ObjSym::Basic(_) => vec![self.clone()],
            ObjSym::Attr(head, body) => {
                let mut out = body.subobjects();
                for sub in head.subobjects() {
                    out.push(ObjSym::Attr(Box::new(sub), body.clone()));
                }
                out
            }
        }
    }
}

impl fmt::Display for ObjSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjSym::Basic(o) => write!(f, "{o}"),
            ObjSym::Attr(head, body) => write!(f, "{head} < {body}"),
        }
    }
}

/// A nonempty sequence of object symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjBody(pub Vec<ObjSym>);

impl ObjBody {
    pub fn single(o: ObjSym) -> Self {
        ObjBody(vec![o])
    }

    pub fn items(&self) -> &[ObjSym] {
        &self.0
    }

    pub fn as_single(&self) -> Option<&ObjSym> {
        match self.0.as_slice() {
            [o] => Some(o),
            _ => None,
        }
    }

    fn subobjects(&self) -> Vec<ObjSym> {
        match self.as_single() {
            Some(o) => o.subobjects(),
            None => {
                let mut out = Vec::new();
                for o in &self.0 {
                    out.extend(o.subobjects());
                }
                out
            }
        }
    }
}

impl fmt::Display for ObjBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// A context: a chain of object-body segments, innermost first. The empty
/// chain is the empty context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Ctx(Vec<ObjBody>);

impl Ctx {
    pub fn empty() -> Self {
        Ctx(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn segments(&self) -> &[ObjBody] {
        &self.0
    }

    /// Build a canonical chain from segments, flattening any leading
    /// one-element attributed segment into its spine.
    pub fn from_segments(segs: Vec<ObjBody>) -> Self {
        let mut ctx = Ctx::empty();
        for seg in segs.into_iter().rev() {
            ctx = ctx.prepended(seg);
        }
        ctx
    }

    /// Prepend one segment, canonicalizing.
    pub fn prepended(&self, seg: ObjBody) -> Ctx {
        let mut segs = Vec::new();
        push_flattened(&mut segs, seg);
        segs.extend(self.0.iter().cloned());
        Ctx(segs)
    }

    /// Prepend a whole chain (an interpreted tail), innermost first.
    pub fn prepended_chain(&self, chain: &[ObjBody]) -> Ctx {
        let mut out = self.clone();
        for seg in chain.iter().rev() {
            out = out.prepended(seg.clone());
        }
        out
    }

    /// Drop the innermost segment; `None` on the empty context.
    pub fn outer(&self) -> Option<Ctx> {
        if self.0.is_empty() {
            None
        } else {
            Some(Ctx(self.0[1..].to_vec()))
        }
    }
}

fn push_flattened(out: &mut Vec<ObjBody>, seg: ObjBody) {
    match seg.as_single() {
        Some(ObjSym::Attr(head, body)) => {
            let (head, body) = (head.clone(), body.clone());
            push_flattened(out, ObjBody::single(*head));
            out.push(body);
        }
        _ => out.push(seg),
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("\"\"");
        }
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

/// A predicate table: the arity and the tuple set interpreting a predicate
/// at one context. Declaring an empty table keeps the predicate available
/// there while denoting nothing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredTable {
    pub arity: usize,
    pub tuples: BTreeSet<ObjBody>,
}

/// The immutable part of a structure, shared between assignment updates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructureCore {
    /// All basic objects.
    pub universe: BTreeSet<Obj>,
    /// Domains per context. The empty context implicitly maps to the whole
    /// universe; other contexts default to the empty domain.
    pub domains: BTreeMap<Ctx, BTreeSet<Obj>>,
    /// Predicate tables per context.
    pub tables: BTreeMap<Ctx, BTreeMap<String, PredTable>>,
    /// Interpretation of basic domain symbols per context.
    pub dom_interp: BTreeMap<(Ctx, String), Obj>,
    /// Collections: an object comprising other objects, per context.
    pub collections: BTreeMap<(Ctx, Obj), BTreeSet<Obj>>,
    /// Declared indexed inclusions between object bodies, per context.
    pub inclusions: BTreeMap<Ctx, BTreeSet<(ObjBody, ObjBody)>>,
    /// Extra base pairs for the nesting order, beyond its laws.
    pub order_pairs: BTreeSet<(Obj, Obj)>,
}

/// A finite semantic structure. Assignment updates return a new value that
/// shares the core tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub core: Arc<StructureCore>,
    /// The variable assignment, keyed by context and basic-variable name.
    pub assignment: BTreeMap<(Ctx, String), Obj>,
}

/// Interpretation failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("domain symbol {name} has no interpretation at context {ctx}")]
    UndeclaredSymbol { name: String, ctx: String },
    #[error("variable {name} has no assignment at context {ctx}")]
    MissingAssignment { name: String, ctx: String },
    #[error("connector used at the empty context")]
    ConnectorAtTop,
}

/// One violation found while validating a structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureViolation {
    pub rule: StructureRule,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureRule {
    Top,
    Monotonicity,
    Antisymmetry,
    DistinctBases,
    Reference,
}

impl fmt::Display for StructureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StructureRule::Top => "Top",
            StructureRule::Monotonicity => "Monotonicity",
            StructureRule::Antisymmetry => "Antisymmetry",
            StructureRule::DistinctBases => "DistinctBases",
            StructureRule::Reference => "Reference",
        };
        f.write_str(s)
    }
}

/// The outcome of validating a structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Structure {
    pub fn new(core: StructureCore) -> Self {
        Structure {
            core: Arc::new(core),
            assignment: BTreeMap::new(),
        }
    }

    /// The domain at a context: the universe at the empty context, the
    /// declared set elsewhere, empty when undeclared.
    pub fn domain(&self, ctx: &Ctx) -> BTreeSet<Obj> {
        if ctx.is_empty() {
            self.core.universe.clone()
        } else {
            self.core.domains.get(ctx).cloned().unwrap_or_default()
        }
    }

    /// The predicate table at a context, if declared there.
    pub fn table(&self, ctx: &Ctx, pred: &str) -> Option<&PredTable> {
        self.core.tables.get(ctx).and_then(|m| m.get(pred))
    }

    /// Whether a predicate is available at a context. Availability is the
    /// declared tables closed upward along the nesting order; everything
    /// declared anywhere is available at the empty context.
    pub fn available(&self, ctx: &Ctx, pred: &str) -> bool {
        if ctx.is_empty() {
            return self
                .core
                .tables
                .values()
                .any(|m| m.contains_key(pred));
        }
        self.core.tables.iter().any(|(c, m)| {
            m.contains_key(pred) && (c == ctx || (!c.is_empty() && self.ctx_le(c, ctx)))
        })
    }

    // -- nesting order ------------------------------------------------------

    /// The nesting order on contexts (nonempty object-body chains).
    pub fn ctx_le(&self, a: &Ctx, b: &Ctx) -> bool {
        if a.is_empty() || b.is_empty() {
            return a.is_empty() && b.is_empty();
        }
        self.chain_le(a.segments(), b.segments())
    }

    /// The nesting order on object bodies.
    pub fn body_le(&self, a: &ObjBody, b: &ObjBody) -> bool {
        self.chain_le(
            Ctx::from_segments(vec![a.clone()]).segments(),
            Ctx::from_segments(vec![b.clone()]).segments(),
        )
    }

    /// Chains compare by aligning their outermost segments: a left-nested
    /// chain is below another exactly when it is at least as long and the
    /// aligned suffix segments are below pointwise; a strict prefix of
    /// attribution heads may be dropped.
    fn chain_le(&self, a: &[ObjBody], b: &[ObjBody]) -> bool {
        if a.len() < b.len() {
            return false;
        }
        let offset = a.len() - b.len();
        a[offset..]
            .iter()
            .zip(b.iter())
            .all(|(sa, sb)| self.seg_le(sa, sb))
    }

    /// Segments of equal length compare pointwise; unequal lengths never
    /// compare.
    fn seg_le(&self, a: &ObjBody, b: &ObjBody) -> bool {
        a.0.len() == b.0.len()
            && a.0
                .iter()
                .zip(b.0.iter())
                .all(|(x, y)| self.sym_le(x, y))
    }

    fn sym_le(&self, a: &ObjSym, b: &ObjSym) -> bool {
        match (a, b) {
            (ObjSym::Basic(x), ObjSym::Basic(y)) => x == y || self.base_pair_le(x, y),
            _ => {
                let ca = Ctx::from_segments(vec![ObjBody::single(a.clone())]);
                let cb = Ctx::from_segments(vec![ObjBody::single(b.clone())]);
                self.chain_le(ca.segments(), cb.segments())
            }
        }
    }

    fn base_pair_le(&self, a: &Obj, b: &Obj) -> bool {
        // Transitive closure over the declared extra pairs.
        if self.core.order_pairs.is_empty() {
            return false;
        }
        let mut reach = BTreeSet::from([a.clone()]);
        loop {
            let mut grew = false;
            for (x, y) in &self.core.order_pairs {
                if reach.contains(x) && reach.insert(y.clone()) {
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        reach.contains(b)
    }

    // -- interpretation -----------------------------------------------------

    pub fn interp_term(&self, ctx: &Ctx, t: &Term) -> Result<ObjSym, InterpError> {
        match t {
            Term::Var(v) => {
                let key = (ctx.clone(), v.0.clone());
                self.assignment
                    .get(&key)
                    .cloned()
                    .map(ObjSym::Basic)
                    .ok_or_else(|| InterpError::MissingAssignment {
                        name: v.0.clone(),
                        ctx: ctx.to_string(),
                    })
            }
            Term::Dom(d) => {
                let key = (ctx.clone(), d.0.clone());
                self.core
                    .dom_interp
                    .get(&key)
                    .cloned()
                    .map(ObjSym::Basic)
                    .ok_or_else(|| InterpError::UndeclaredSymbol {
                        name: d.0.clone(),
                        ctx: ctx.to_string(),
                    })
            }
            Term::Attr(head, body) => {
                let body_obj = self.interp_body(ctx, body)?;
                let extended = ctx.prepended(body_obj.clone());
                let head_obj = self.interp_term(&extended, head)?;
                Ok(ObjSym::Attr(Box::new(head_obj), body_obj))
            }
        }
    }

    pub fn interp_body(&self, ctx: &Ctx, ts: &TermBody) -> Result<ObjBody, InterpError> {
        let mut out = Vec::with_capacity(ts.len());
        for t in ts.items() {
            out.push(self.interp_term(ctx, t)?);
        }
        Ok(ObjBody(out))
    }

    pub fn interp_gterm(&self, ctx: &Ctx, gt: &GTerm) -> Result<ObjSym, InterpError> {
        match gt {
            GTerm::Plain(t) => self.interp_term(ctx, t),
            GTerm::Connector(t) => {
                let parent = ctx.outer().ok_or(InterpError::ConnectorAtTop)?;
                self.interp_term(&parent, t)
            }
        }
    }

    /// Interpret a chain of term-body segments (a tail of a variable),
    /// producing object-body segments innermost first. Each segment is
    /// interpreted in the context extended by its own outer segments.
    pub fn interp_tail_chain(
        &self,
        ctx: &Ctx,
        segs: &[TermBody],
    ) -> Result<Vec<ObjBody>, InterpError> {
        let mut out = vec![ObjBody(Vec::new()); segs.len()];
        // Outermost segment first: it is interpreted at `ctx`, and each
        // inner segment at the context extended by the already-interpreted
        // outer part.
        let mut extended = ctx.clone();
        for i in (0..segs.len()).rev() {
            let obj = self.interp_body(&extended, &segs[i])?;
            extended = extended.prepended(obj.clone());
            out[i] = obj;
        }
        Ok(out)
    }

    // -- properness ---------------------------------------------------------

    /// Whether every object symbol of the body list inhabits the domains the
    /// context prescribes.
    pub fn proper_objects(&self, ctx: &Ctx, bodies: &[ObjBody]) -> bool {
        bodies.iter().all(|b| self.proper_body(ctx, b))
    }

    fn proper_body(&self, ctx: &Ctx, body: &ObjBody) -> bool {
        body.0.iter().all(|o| self.proper_sym(ctx, o))
    }

    fn proper_sym(&self, ctx: &Ctx, o: &ObjSym) -> bool {
        match o {
            ObjSym::Basic(d) => self.domain(ctx).contains(d),
            ObjSym::Attr(head, body) => {
                let extended = ctx.prepended(body.clone());
                self.proper_sym(&extended, head) && self.proper_body(ctx, body)
            }
        }
    }

    /// Whether a g-term denotes inside the domains along its interpretation
    /// path. A missing assignment is reported as an error, never silently
    /// treated as improper.
    pub fn proper_gterm(&self, ctx: &Ctx, gt: &GTerm) -> Result<bool, InterpError> {
        match gt {
            GTerm::Plain(t) => self.proper_term(ctx, t),
            GTerm::Connector(t) => {
                let parent = ctx.outer().ok_or(InterpError::ConnectorAtTop)?;
                self.proper_term(&parent, t)
            }
        }
    }

    pub fn proper_term(&self, ctx: &Ctx, t: &Term) -> Result<bool, InterpError> {
        match t {
            Term::Var(_) | Term::Dom(_) => {
                let obj = self.interp_term(ctx, t)?;
                match obj {
                    ObjSym::Basic(d) => Ok(self.domain(ctx).contains(&d)),
                    ObjSym::Attr(_, _) => unreachable!("basic symbols denote basic objects"),
                }
            }
            Term::Attr(head, body) => {
                if !self.proper_term_body(ctx, body)? {
                    return Ok(false);
                }
                let body_obj = self.interp_body(ctx, body)?;
                let extended = ctx.prepended(body_obj);
                self.proper_term(&extended, head)
            }
        }
    }

    pub fn proper_term_body(&self, ctx: &Ctx, ts: &TermBody) -> Result<bool, InterpError> {
        for t in ts.items() {
            if !self.proper_term(ctx, t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    // -- indexed inclusions --------------------------------------------------

    /// Whether `a` is included in `b` under the context's inclusion
    /// relation: declared pairs plus collection memberships, closed
    /// transitively.
    pub fn included(&self, ctx: &Ctx, a: &ObjBody, b: &ObjBody) -> bool {
        let mut reach: BTreeSet<ObjBody> = BTreeSet::from([a.clone()]);
        loop {
            let mut grew = false;
            if let Some(pairs) = self.core.inclusions.get(ctx) {
                for (x, y) in pairs {
                    if reach.contains(x) && !reach.contains(y) {
                        reach.insert(y.clone());
                        grew = true;
                    }
                }
            }
            for ((cctx, coll), members) in &self.core.collections {
                if cctx != ctx {
                    continue;
                }
                for m in members {
                    let member_body = ObjBody::single(ObjSym::Basic(m.clone()));
                    if reach.contains(&member_body) {
                        let coll_body = ObjBody::single(ObjSym::Basic(coll.clone()));
                        if !reach.contains(&coll_body) {
                            reach.insert(coll_body);
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                return reach.contains(b);
            }
        }
    }

    /// Tuple membership in a predicate table under the context's inclusion
    /// relation: the tuple is in the table, or included in some table entry.
    pub fn tuple_in_table(&self, ctx: &Ctx, tuple: &ObjBody, table: &PredTable) -> bool {
        table.tuples.contains(tuple)
            || table
                .tuples
                .iter()
                .any(|entry| self.included(ctx, tuple, entry))
    }

    // -- surface equality ----------------------------------------------------

    /// Indistinguishability of two object symbols with respect to their
    /// salient parts: equal sub-object listings except that the full symbols
    /// only need matching base names.
    pub fn surface_eq(a: &ObjSym, b: &ObjSym) -> bool {
        let sa = a.subobjects();
        let sb = b.subobjects();
        if sa.len() != sb.len() {
            return false;
        }
        let last_a = sa.last().expect("subobjects is never empty");
        let last_b = sb.last().expect("subobjects is never empty");
        if last_a.leftmost().rho() != last_b.leftmost().rho() {
            return false;
        }
        sa[..sa.len() - 1] == sb[..sb.len() - 1]
    }

    // -- assignment update ----------------------------------------------------

    /// Set variable `v` to `d` at context `ctx`, and at every context that a
    /// tail of `v` designates from `ctx`. Returns a new structure sharing
    /// the core tables.
    pub fn update(&self, ctx: &Ctx, v: &Term, d: &Obj) -> Result<Structure, InterpError> {
        debug_assert!(is_variable(v));
        let name = match leftmost(v) {
            Term::Var(x) => x.0.clone(),
            Term::Dom(_) => unreachable!("binder is a variable"),
        };
        let mut next = self.clone();
        next.assignment
            .insert((ctx.clone(), name.clone()), d.clone());
        for tail in tails(v) {
            let chain = self.interp_tail_chain(ctx, tail.segments())?;
            let key_ctx = ctx.prepended_chain(&chain);
            next.assignment.insert((key_ctx, name.clone()), d.clone());
        }
        Ok(next)
    }

    /// The spine of segment interpretations for a variable's tail, used to
    /// locate the domain a quantified variable ranges over.
    pub fn quantifier_range_ctx(&self, ctx: &Ctx, v: &Term) -> Result<Ctx, InterpError> {
        let segs = spine(v);
        if segs.len() == 1 {
            return Ok(ctx.clone());
        }
        let chain = self.interp_tail_chain(ctx, &segs[1..])?;
        Ok(ctx.prepended_chain(&chain))
    }

    // -- validation -----------------------------------------------------------

    /// Check the structure's global laws, reporting each violation.
    pub fn validate(&self) -> StructureReport {
        let mut violations = Vec::new();
        let core = &*self.core;

        // Referential checks: declared sets stay inside the universe.
        for (ctx, dom) in &core.domains {
            for o in dom {
                if !core.universe.contains(o) {
                    violations.push(StructureViolation {
                        rule: StructureRule::Reference,
                        message: format!("domain at {ctx} lists {o} outside the universe"),
                    });
                }
            }
            if ctx.is_empty() && dom != &core.universe {
                violations.push(StructureViolation {
                    rule: StructureRule::Top,
                    message: "domain declared at the empty context differs from the universe"
                        .to_string(),
                });
            }
        }
        for ((ctx, coll), members) in &core.collections {
            if !core.universe.contains(coll) {
                violations.push(StructureViolation {
                    rule: StructureRule::Reference,
                    message: format!("collection {coll} at {ctx} is outside the universe"),
                });
            }
            let mut bases = BTreeSet::new();
            for m in members {
                if !core.universe.contains(m) {
                    violations.push(StructureViolation {
                        rule: StructureRule::Reference,
                        message: format!("collection member {m} at {ctx} is outside the universe"),
                    });
                }
                if !bases.insert(m.base.clone()) {
                    violations.push(StructureViolation {
                        rule: StructureRule::DistinctBases,
                        message: format!(
                            "collection {coll} at {ctx} comprises two copies of base {}",
                            m.base
                        ),
                    });
                }
            }
        }
        for (ctx, preds) in &core.tables {
            for (name, table) in preds {
                for tuple in &table.tuples {
                    if tuple.0.len() != table.arity {
                        violations.push(StructureViolation {
                            rule: StructureRule::Reference,
                            message: format!(
                                "table {name} at {ctx} holds a tuple of width {} (arity {})",
                                tuple.0.len(),
                                table.arity
                            ),
                        });
                    }
                    for sym in &tuple.0 {
                        if !core.universe.contains(sym.leftmost()) {
                            violations.push(StructureViolation {
                                rule: StructureRule::Reference,
                                message: format!(
                                    "table {name} at {ctx} mentions {} outside the universe",
                                    sym.leftmost()
                                ),
                            });
                        }
                    }
                }
            }
        }

        // Monotonicity of the domains over declared context pairs, plus each
        // declared key against its suffix parent (which may be undeclared
        // and therefore empty).
        let keys: Vec<&Ctx> = core.domains.keys().filter(|c| !c.is_empty()).collect();
        let mut check_pair = |a: &Ctx, b: &Ctx, violations: &mut Vec<StructureViolation>| {
            let da = core.domains.get(a).cloned().unwrap_or_default();
            let db = self.domain(b);
            if !da.is_subset(&db) {
                let missing: Vec<String> = da.difference(&db).map(|o| o.to_string()).collect();
                violations.push(StructureViolation {
                    rule: StructureRule::Monotonicity,
                    message: format!(
                        "domain at {a} is not contained in domain at {b} (missing {})",
                        missing.join(", ")
                    ),
                });
            }
        };
        for a in &keys {
            for b in &keys {
                if a != b && self.ctx_le(a, b) {
                    check_pair(a, b, &mut violations);
                }
            }
            if let Some(parent) = a.outer() {
                if !parent.is_empty() && !core.domains.contains_key(&parent) {
                    check_pair(a, &parent, &mut violations);
                }
            }
        }

        // Antisymmetry of the nesting order over declared keys.
        for a in &keys {
            for b in &keys {
                if a != b && self.ctx_le(a, b) && self.ctx_le(b, a) {
                    violations.push(StructureViolation {
                        rule: StructureRule::Antisymmetry,
                        message: format!("distinct contexts {a} and {b} are mutually nested"),
                    });
                }
            }
        }

        StructureReport { violations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(base: &str) -> Obj {
        Obj::new(base, 1)
    }

    fn sym(base: &str) -> ObjSym {
        ObjSym::Basic(o(base))
    }

    fn seg(base: &str) -> ObjBody {
        ObjBody::single(sym(base))
    }

    fn ctx(bases: &[&str]) -> Ctx {
        Ctx::from_segments(bases.iter().map(|b| seg(b)).collect())
    }

    fn small_core() -> StructureCore {
        let mut core = StructureCore::default();
        core.universe = BTreeSet::from([o("s"), o("p"), o("l"), o("m")]);
        core.domains.insert(ctx(&["s"]), BTreeSet::from([o("p"), o("l"), o("m")]));
        core.domains
            .insert(ctx(&["p", "s"]), BTreeSet::from([o("l"), o("m")]));
        core.domains
            .insert(ctx(&["l", "p", "s"]), BTreeSet::from([o("m")]));
        core
    }

    #[test]
    fn canonical_chain_flattening() {
        // A chain headed by the single symbol (l < p) < s equals the spine
        // chain l, p, s.
        let attr = ObjSym::Attr(
            Box::new(ObjSym::Attr(Box::new(sym("l")), seg("p"))),
            seg("s"),
        );
        let c = Ctx::from_segments(vec![ObjBody::single(attr)]);
        assert_eq!(c, ctx(&["l", "p", "s"]));
    }

    #[test]
    fn nesting_order_suffix_alignment() {
        let st = Structure::new(small_core());
        assert!(st.ctx_le(&ctx(&["p", "s"]), &ctx(&["s"])));
        assert!(st.ctx_le(&ctx(&["l", "p", "s"]), &ctx(&["p", "s"])));
        assert!(st.ctx_le(&ctx(&["l", "p", "s"]), &ctx(&["s"])));
        assert!(!st.ctx_le(&ctx(&["s"]), &ctx(&["p", "s"])));
        assert!(!st.ctx_le(&ctx(&["p", "s"]), &ctx(&["l", "s"])));
        // reflexivity
        assert!(st.ctx_le(&ctx(&["p", "s"]), &ctx(&["p", "s"])));
    }

    #[test]
    fn nesting_order_sequences_need_equal_length() {
        let st = Structure::new(small_core());
        let two = Ctx::from_segments(vec![ObjBody(vec![sym("p"), sym("l")])]);
        let one = ctx(&["p"]);
        assert!(!st.ctx_le(&two, &one));
        assert!(!st.ctx_le(&one, &two));
        assert!(st.ctx_le(&two, &two));
    }

    #[test]
    fn validate_accepts_monotone_domains() {
        let st = Structure::new(small_core());
        let report = st.validate();
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn validate_flags_monotonicity_breach() {
        let mut core = small_core();
        core.domains.insert(ctx(&["s"]), BTreeSet::from([o("p")]));
        let st = Structure::new(core);
        let report = st.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == StructureRule::Monotonicity));
    }

    #[test]
    fn validate_flags_top_breach() {
        let mut core = small_core();
        core.domains.insert(Ctx::empty(), BTreeSet::from([o("s")]));
        let st = Structure::new(core);
        assert!(st
            .validate()
            .violations
            .iter()
            .any(|v| v.rule == StructureRule::Top));
    }

    #[test]
    fn validate_flags_duplicate_collection_bases() {
        let mut core = small_core();
        core.universe.insert(Obj::new("m", 2));
        core.collections.insert(
            (Ctx::empty(), o("s")),
            BTreeSet::from([o("m"), Obj::new("m", 2)]),
        );
        let st = Structure::new(core);
        assert!(st
            .validate()
            .violations
            .iter()
            .any(|v| v.rule == StructureRule::DistinctBases));
    }

    #[test]
    fn surface_eq_copies_and_chains() {
        // same base, different copies
        assert!(Structure::surface_eq(
            &ObjSym::Basic(Obj::new("d", 1)),
            &ObjSym::Basic(Obj::new("d", 2))
        ));
        assert!(!Structure::surface_eq(&sym("d"), &sym("e")));
        // (y < x) vs (u < x) with equal bases of the heads
        let yx = ObjSym::attr1(ObjSym::Basic(Obj::new("k", 1)), sym("f"));
        let ux = ObjSym::attr1(ObjSym::Basic(Obj::new("k", 2)), sym("f"));
        assert!(Structure::surface_eq(&yx, &ux));
        let wx = ObjSym::attr1(sym("j"), sym("f"));
        assert!(!Structure::surface_eq(&yx, &wx));
        // differing earlier elements are distinguished
        let y_other = ObjSym::attr1(ObjSym::Basic(Obj::new("k", 1)), sym("g"));
        assert!(!Structure::surface_eq(&yx, &y_other));
    }

    #[test]
    fn surface_eq_reflexive_symmetric() {
        let items = [
            sym("a"),
            ObjSym::attr1(sym("a"), sym("b")),
            ObjSym::Attr(Box::new(sym("a")), ObjBody(vec![sym("b"), sym("c")])),
        ];
        for x in &items {
            assert!(Structure::surface_eq(x, x));
            for y in &items {
                assert_eq!(Structure::surface_eq(x, y), Structure::surface_eq(y, x));
            }
        }
    }

    #[test]
    fn proper_objects_nested() {
        let st = Structure::new(small_core());
        // m inhabits the deep context, not the top one by itself... it does
        // inhabit the empty context (universe).
        assert!(st.proper_objects(&Ctx::empty(), &[seg("m")]));
        assert!(st.proper_objects(&ctx(&["l", "p", "s"]), &[seg("m")]));
        assert!(!st.proper_objects(&ctx(&["l", "p", "s"]), &[seg("s")]));
        // an attributed object: head checked in the extended context
        let attr = ObjBody::single(ObjSym::attr1(sym("l"), sym("p")));
        // context (p): body p must inhabit (ctx), head l must inhabit (p < ctx)
        let c = ctx(&["s"]);
        // p is in D(s); l must be in D(p < s)
        assert!(st.proper_objects(&c, &[attr]));
    }

    #[test]
    fn update_writes_tail_contexts() {
        let mut core = small_core();
        core.domains.insert(ctx(&["s"]), BTreeSet::from([o("p"), o("l"), o("m")]));
        let st = Structure::new(core);
        // assign x := s at the empty context, then y<.x := p
        let x = Term::var("x");
        let st = st.update(&Ctx::empty(), &x, &o("s")).unwrap();
        let yx = Term::attr1(Term::var("y"), Term::var("x"));
        let st = st.update(&Ctx::empty(), &yx, &o("p")).unwrap();
        assert_eq!(st.assignment.get(&(Ctx::empty(), "y".into())), Some(&o("p")));
        assert_eq!(st.assignment.get(&(ctx(&["s"]), "y".into())), Some(&o("p")));
        // interpreting y<.x now yields p < s
        let got = st.interp_term(&Ctx::empty(), &yx).unwrap();
        assert_eq!(got, ObjSym::attr1(sym("p"), sym("s")));
    }

    #[test]
    fn update_is_last_write_wins_and_nondestructive() {
        let st = Structure::new(small_core());
        let x = Term::var("x");
        let st1 = st.update(&Ctx::empty(), &x, &o("s")).unwrap();
        let st2a = st1.update(&Ctx::empty(), &x, &o("p")).unwrap();
        let st2b = st.update(&Ctx::empty(), &x, &o("p")).unwrap();
        assert_eq!(st2a.assignment, st2b.assignment);
        // the original is unchanged
        assert!(st.assignment.is_empty());
        assert_eq!(st1.assignment.get(&(Ctx::empty(), "x".into())), Some(&o("s")));
    }

    #[test]
    fn quantifier_range_ctx_follows_tail_chain() {
        let st = Structure::new(small_core());
        let st = st.update(&Ctx::empty(), &Term::var("x"), &o("s")).unwrap();
        let yx = Term::attr1(Term::var("y"), Term::var("x"));
        let range = st.quantifier_range_ctx(&Ctx::empty(), &yx).unwrap();
        assert_eq!(range, ctx(&["s"]));
        // basic variables range at the current context
        let plain = st.quantifier_range_ctx(&Ctx::empty(), &Term::var("u")).unwrap();
        assert_eq!(plain, Ctx::empty());
        // deep chains follow interpreted tails
        let st = st.update(&Ctx::empty(), &yx, &o("p")).unwrap();
        let zyx = Term::attr1(Term::var("z"), yx.clone());
        let range = st.quantifier_range_ctx(&Ctx::empty(), &zyx).unwrap();
        assert_eq!(range, ctx(&["p", "s"]));
    }

    #[test]
    fn inclusion_closure_is_transitive() {
        let mut core = small_core();
        core.inclusions.insert(
            Ctx::empty(),
            BTreeSet::from([
                (seg("m"), seg("l")),
                (seg("l"), seg("p")),
            ]),
        );
        let st = Structure::new(core);
        assert!(st.included(&Ctx::empty(), &seg("m"), &seg("p")));
        assert!(!st.included(&Ctx::empty(), &seg("p"), &seg("m")));
        // indexed by context: nothing declared elsewhere
        assert!(!st.included(&ctx(&["s"]), &seg("m"), &seg("p")));
    }

    #[test]
    fn collections_induce_memberships() {
        let mut core = small_core();
        core.collections
            .insert((Ctx::empty(), o("s")), BTreeSet::from([o("p"), o("l")]));
        let st = Structure::new(core);
        assert!(st.included(&Ctx::empty(), &seg("p"), &seg("s")));
        assert!(!st.included(&Ctx::empty(), &seg("m"), &seg("s")));
    }

    #[test]
    fn connector_interprets_at_parent() {
        let st = Structure::new(small_core());
        let st = st.update(&Ctx::empty(), &Term::var("x"), &o("s")).unwrap();
        let gt = GTerm::Connector(Term::var("x"));
        let got = st.interp_gterm(&ctx(&["s"]), &gt).unwrap();
        assert_eq!(got, sym("s"));
        assert_eq!(
            st.interp_gterm(&Ctx::empty(), &gt),
            Err(InterpError::ConnectorAtTop)
        );
    }
}
