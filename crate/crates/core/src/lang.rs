//! The Kyrtos relation language: a formal encoding of curve structure.
//!
//! A chart serializes as one `GR` expression: one bracketed clause per curve,
//! listing its segment connections, followed by a single bracketed relation
//! clause mixing parallelism and intersection terms, all joined by the `@`
//! (and) operator:
//!
//! ```text
//! [(SL11 ~ SL12 : VAL_CON(34.5))] @ [(SL12 >< SL21 : VAL_INT(111,126))]
//! ```
//!
//! Operators: `~` connection (same curve), `=` parallelism, `><` intersection
//! (both cross-curve), `@` and, `!` or over alternative relation groups (used
//! for multi-interpretation charts; accepted by the parser, never produced by
//! this pipeline). `[]`/`()` scope clauses and terms, `: VAL_XXX(...)`
//! attaches a value to a term.
//!
//! Identifiers pack a one-digit curve id and a 1-based segment index:
//! `SL213` is curve 2, segment 13 (internal 0-based index 12). A curve with a
//! single segment renders as a bare `(SL11)` term so the relation clause can
//! still reference it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{LineSegment, SegId};
use crate::segment::{Relation, RelationKind, RelationValue};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct KyrtosAst {
    pub curves: Vec<CurveClause>,
    pub relations: RelationClause,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveClause {
    pub curve: u32,
    pub terms: Vec<CurveTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveTerm {
    Connection {
        a: SegId,
        b: SegId,
        payload: Option<Payload>,
    },
    /// Degenerate clause for a single-segment curve.
    Single { seg: SegId },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelationClause {
    /// `!`-joined alternative groups; an empty clause has no groups and
    /// analysis output always has at most one.
    pub alternatives: Vec<Vec<RelTerm>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelTerm {
    Parallel {
        a: SegId,
        b: SegId,
        payload: Option<Payload>,
    },
    Intersect {
        a: SegId,
        b: SegId,
        payload: Option<Payload>,
    },
}

/// Term value: connection degrees, common slope, or intersection pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Con(f64),
    Par(f64),
    Int(i64, i64),
}

impl KyrtosAst {
    /// Segments defined by the curve clauses.
    pub fn defined_segments(&self) -> BTreeSet<SegId> {
        let mut set = BTreeSet::new();
        for c in &self.curves {
            for t in &c.terms {
                match t {
                    CurveTerm::Connection { a, b, .. } => {
                        set.insert(*a);
                        set.insert(*b);
                    }
                    CurveTerm::Single { seg } => {
                        set.insert(*seg);
                    }
                }
            }
        }
        set
    }

    /// Canonical form: curves ordered by id, relation terms ordered by their
    /// segment pair. Serialization emits this order, so canonicalizing before
    /// comparison makes round-trips order-insensitive.
    pub fn canonicalize(&mut self) {
        self.curves.sort_by_key(|c| c.curve);
        for alt in &mut self.relations.alternatives {
            alt.sort_by_key(|t| match t {
                RelTerm::Parallel { a, b, .. } | RelTerm::Intersect { a, b, .. } => (*a, *b),
            });
        }
    }

    /// Build the canonical AST of an analysis stage: per-curve chains with
    /// connection angles, plus cross-curve parallelism/intersection relations.
    pub fn from_analysis(
        curves: &[Vec<LineSegment>],
        connections: &[Relation],
        cross_relations: &[Relation],
    ) -> Result<Self> {
        let mut clauses = Vec::new();
        let mut defined = BTreeSet::new();
        for segs in curves {
            let Some(first) = segs.first() else { continue };
            let curve = first.id.curve;
            if curve == 0 || curve > 9 {
                return Err(Error::CurveIdOutOfRange { id: curve });
            }
            for s in segs {
                defined.insert(s.id);
            }
            let terms = if segs.len() == 1 {
                vec![CurveTerm::Single { seg: first.id }]
            } else {
                segs.windows(2)
                    .map(|w| {
                        let angle = connections.iter().find_map(|r| {
                            match (r.kind, r.a == w[0].id && r.b == w[1].id, r.value) {
                                (RelationKind::Connection, true, RelationValue::AngleDeg(d)) => {
                                    Some(d)
                                }
                                _ => None,
                            }
                        });
                        CurveTerm::Connection {
                            a: w[0].id,
                            b: w[1].id,
                            payload: angle.map(Payload::Con),
                        }
                    })
                    .collect()
            };
            clauses.push(CurveClause { curve, terms });
        }

        let mut terms = Vec::new();
        for rel in cross_relations {
            if !defined.contains(&rel.a) || !defined.contains(&rel.b) {
                return Err(Error::UnknownSegment {
                    id: format!("{}", if defined.contains(&rel.a) { rel.b } else { rel.a }),
                });
            }
            let term = match (rel.kind, rel.value) {
                (RelationKind::Parallelism, RelationValue::CommonSlope(s)) => RelTerm::Parallel {
                    a: rel.a,
                    b: rel.b,
                    payload: Some(Payload::Par(s)),
                },
                (RelationKind::Intersection, RelationValue::Point(p)) => RelTerm::Intersect {
                    a: rel.a,
                    b: rel.b,
                    payload: Some(Payload::Int(
                        crate::fmath::round(p.x) as i64,
                        crate::fmath::round(p.y) as i64,
                    )),
                },
                _ => continue, // connections live in the curve clauses
            };
            terms.push(term);
        }
        let relations = RelationClause {
            alternatives: if terms.is_empty() { Vec::new() } else { vec![terms] },
        };

        let mut ast = KyrtosAst {
            curves: clauses,
            relations,
        };
        ast.canonicalize();
        Ok(ast)
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn seg_ident(id: SegId) -> String {
    format!("SL{}{}", id.curve, id.index + 1)
}

fn payload_text(p: &Payload) -> String {
    match p {
        // {:?} keeps a trailing .0 on integral floats and round-trips exactly.
        Payload::Con(v) => format!("VAL_CON({v:?})"),
        Payload::Par(v) => format!("VAL_PAR({v:?})"),
        Payload::Int(x, y) => format!("VAL_INT({x},{y})"),
    }
}

/// Render an AST as a `GR` expression. Curve ids above 9 are not
/// representable in the identifier syntax.
pub fn serialize(ast: &KyrtosAst) -> Result<String> {
    let mut clauses = Vec::new();
    for c in &ast.curves {
        if c.curve == 0 || c.curve > 9 {
            return Err(Error::CurveIdOutOfRange { id: c.curve });
        }
        let terms: Vec<String> = c
            .terms
            .iter()
            .map(|t| match t {
                CurveTerm::Connection { a, b, payload } => match payload {
                    Some(p) => format!("({} ~ {} : {})", seg_ident(*a), seg_ident(*b), payload_text(p)),
                    None => format!("({} ~ {})", seg_ident(*a), seg_ident(*b)),
                },
                CurveTerm::Single { seg } => format!("({})", seg_ident(*seg)),
            })
            .collect();
        clauses.push(format!("[{}]", terms.join(" @ ")));
    }

    let rel_term = |t: &RelTerm| -> String {
        let (a, b, op, payload) = match t {
            RelTerm::Parallel { a, b, payload } => (a, b, "=", payload),
            RelTerm::Intersect { a, b, payload } => (a, b, "><", payload),
        };
        match payload {
            Some(p) => format!("({} {} {} : {})", seg_ident(*a), op, seg_ident(*b), payload_text(p)),
            None => format!("({} {} {})", seg_ident(*a), op, seg_ident(*b)),
        }
    };
    let groups: Vec<String> = ast
        .relations
        .alternatives
        .iter()
        .map(|alt| alt.iter().map(rel_term).collect::<Vec<_>>().join(" @ "))
        .collect();
    clauses.push(format!("[{}]", groups.join(" ! ")));

    Ok(clauses.join(" @ "))
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    LBracket,
    RBracket,
    LParen,
    RParen,
    And,
    Or,
    Connect,
    Parallel,
    Intersect,
    Colon,
    Ident,
    Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

/// Longest-match lexer; whitespace is insignificant. `><` is one token and a
/// `VAL_*(...)` payload is one `Value` token.
pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = |kind: TokenKind| Token {
            kind,
            lexeme: c.to_string(),
            position: i,
        };
        match c {
            '[' => tokens.push(single(TokenKind::LBracket)),
            ']' => tokens.push(single(TokenKind::RBracket)),
            '(' => tokens.push(single(TokenKind::LParen)),
            ')' => tokens.push(single(TokenKind::RParen)),
            '@' => tokens.push(single(TokenKind::And)),
            '!' => tokens.push(single(TokenKind::Or)),
            '~' => tokens.push(single(TokenKind::Connect)),
            '=' => tokens.push(single(TokenKind::Parallel)),
            ':' => tokens.push(single(TokenKind::Colon)),
            '>' => {
                if bytes.get(i + 1) == Some(&b'<') {
                    tokens.push(Token {
                        kind: TokenKind::Intersect,
                        lexeme: String::from("><"),
                        position: i,
                    });
                    i += 2;
                    continue;
                }
                return Err(Error::Lex { position: i, found: '>' });
            }
            'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_uppercase() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                if word.starts_with("VAL_") {
                    if bytes.get(i) != Some(&b'(') {
                        return Err(Error::Syntax {
                            position: i.min(bytes.len()),
                            expected: String::from("'(' after value name"),
                            found: bytes
                                .get(i)
                                .map(|&b| (b as char).to_string())
                                .unwrap_or_else(|| String::from("end of input")),
                        });
                    }
                    let close = text[i..].find(')').ok_or(Error::Syntax {
                        position: bytes.len(),
                        expected: String::from("')' closing value"),
                        found: String::from("end of input"),
                    })?;
                    let end = i + close + 1;
                    tokens.push(Token {
                        kind: TokenKind::Value,
                        lexeme: text[start..end].to_string(),
                        position: start,
                    });
                    i = end;
                } else {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    tokens.push(Token {
                        kind: TokenKind::Ident,
                        lexeme: text[start..i].to_string(),
                        position: start,
                    });
                }
                continue;
            }
            other => return Err(Error::Lex { position: i, found: other }),
        }
        i += 1;
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    input_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.input_len)
    }

    fn found(&self) -> String {
        self.peek()
            .map(|t| format!("{:?}", t.lexeme))
            .unwrap_or_else(|| String::from("end of input"))
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<&'a Token> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(Error::Syntax {
                position: self.here(),
                expected: String::from(what),
                found: self.found(),
            }),
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().map(|t| t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

/// One parenthesized term before clause classification.
struct RawTerm {
    position: usize,
    a: SegId,
    op: Option<TokenKind>,
    b: Option<SegId>,
    payload: Option<Payload>,
}

struct RawClause {
    position: usize,
    groups: Vec<Vec<RawTerm>>,
}

fn parse_seg_ident(tok: &Token) -> Result<SegId> {
    let digits = tok.lexeme.strip_prefix("SL").ok_or(Error::Syntax {
        position: tok.position,
        expected: String::from("segment identifier SL<curve><index>"),
        found: format!("{:?}", tok.lexeme),
    })?;
    let mut chars = digits.chars();
    let curve = chars
        .next()
        .and_then(|c| c.to_digit(10))
        .filter(|&d| d >= 1)
        .ok_or(Error::Semantic {
            position: tok.position,
            message: format!("identifier {:?} needs a curve digit 1-9", tok.lexeme),
        })?;
    let rest: String = chars.collect();
    let display_index: u32 = rest.parse().map_err(|_| Error::Semantic {
        position: tok.position,
        message: format!("identifier {:?} needs a segment index", tok.lexeme),
    })?;
    if display_index == 0 {
        return Err(Error::Semantic {
            position: tok.position,
            message: format!("segment index in {:?} is 1-based", tok.lexeme),
        });
    }
    Ok(SegId::new(curve, display_index - 1))
}

fn parse_payload(tok: &Token) -> Result<Payload> {
    let open = tok.lexeme.find('(').expect("lexer guarantees parens");
    let name = &tok.lexeme[..open];
    let args = &tok.lexeme[open + 1..tok.lexeme.len() - 1];
    let nums: Vec<&str> = args.split(',').map(|s| s.trim()).collect();
    let parse_f = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::Syntax {
            position: tok.position,
            expected: String::from("numeric value argument"),
            found: format!("{s:?}"),
        })
    };
    let parse_i = |s: &str| -> Result<i64> {
        if let Ok(v) = s.parse::<i64>() {
            return Ok(v);
        }
        let f = parse_f(s)?;
        if f != crate::fmath::round(f) {
            return Err(Error::Syntax {
                position: tok.position,
                expected: String::from("integer coordinate"),
                found: format!("{s:?}"),
            });
        }
        Ok(f as i64)
    };
    match (name, nums.len()) {
        ("VAL_CON", 1) => Ok(Payload::Con(parse_f(nums[0])?)),
        ("VAL_PAR", 1) => Ok(Payload::Par(parse_f(nums[0])?)),
        ("VAL_INT", 2) => Ok(Payload::Int(parse_i(nums[0])?, parse_i(nums[1])?)),
        _ => Err(Error::Syntax {
            position: tok.position,
            expected: String::from("VAL_CON(d), VAL_PAR(s) or VAL_INT(x,y)"),
            found: format!("{:?}", tok.lexeme),
        }),
    }
}

fn parse_term(p: &mut Parser<'_>) -> Result<RawTerm> {
    let open = p.expect(TokenKind::LParen, "'('")?;
    let a_tok = p.expect(TokenKind::Ident, "segment identifier")?;
    let a = parse_seg_ident(a_tok)?;
    let mut term = RawTerm {
        position: open.position,
        a,
        op: None,
        b: None,
        payload: None,
    };
    if let Some(t) = p.peek() {
        if matches!(t.kind, TokenKind::Connect | TokenKind::Parallel | TokenKind::Intersect) {
            p.pos += 1;
            term.op = Some(t.kind);
            let b_tok = p.expect(TokenKind::Ident, "segment identifier")?;
            term.b = Some(parse_seg_ident(b_tok)?);
        }
    }
    if p.eat(TokenKind::Colon) {
        let v = p.expect(TokenKind::Value, "value payload")?;
        term.payload = Some(parse_payload(v)?);
    }
    p.expect(TokenKind::RParen, "')'")?;
    Ok(term)
}

fn parse_clause(p: &mut Parser<'_>) -> Result<RawClause> {
    let open = p.expect(TokenKind::LBracket, "'['")?;
    let mut groups: Vec<Vec<RawTerm>> = Vec::new();
    if p.eat(TokenKind::RBracket) {
        return Ok(RawClause {
            position: open.position,
            groups,
        });
    }
    loop {
        let mut terms = vec![parse_term(p)?];
        while p.eat(TokenKind::And) {
            terms.push(parse_term(p)?);
        }
        groups.push(terms);
        if p.eat(TokenKind::Or) {
            continue;
        }
        p.expect(TokenKind::RBracket, "']' or '@' or '!'")?;
        return Ok(RawClause {
            position: open.position,
            groups,
        });
    }
}

/// Parse a token stream into an AST. The final bracketed clause is the
/// relation clause; every clause before it must be a curve clause whose
/// connection terms chain consecutive segment indices of one curve.
pub fn parse(tokens: &[Token], input_len: usize) -> Result<KyrtosAst> {
    let mut p = Parser {
        tokens,
        pos: 0,
        input_len,
    };
    let mut clauses = vec![parse_clause(&mut p)?];
    while p.eat(TokenKind::And) {
        clauses.push(parse_clause(&mut p)?);
    }
    if p.peek().is_some() {
        return Err(Error::Syntax {
            position: p.here(),
            expected: String::from("'@' or end of input"),
            found: p.found(),
        });
    }
    if clauses.len() < 2 {
        return Err(Error::Syntax {
            position: input_len,
            expected: String::from("a relation clause after the curve clauses"),
            found: String::from("end of input"),
        });
    }

    let rel_raw = clauses.pop().expect("nonempty");
    let mut curves = Vec::new();
    for clause in clauses {
        curves.push(curve_clause_from_raw(clause)?);
    }

    let mut alternatives = Vec::new();
    for group in rel_raw.groups {
        let mut terms = Vec::new();
        for t in group {
            let b = t.b.ok_or(Error::Semantic {
                position: t.position,
                message: String::from("relation term needs two segments"),
            })?;
            match t.op {
                Some(TokenKind::Parallel) => terms.push(RelTerm::Parallel {
                    a: t.a,
                    b,
                    payload: t.payload,
                }),
                Some(TokenKind::Intersect) => terms.push(RelTerm::Intersect {
                    a: t.a,
                    b,
                    payload: t.payload,
                }),
                _ => {
                    return Err(Error::Semantic {
                        position: t.position,
                        message: String::from(
                            "relation clause admits only '=' and '><' terms",
                        ),
                    })
                }
            }
        }
        alternatives.push(terms);
    }

    let ast = KyrtosAst {
        curves,
        relations: RelationClause { alternatives },
    };

    // Cross-reference closure is a semantic parse error; softer checks are
    // the validator's.
    let defined = ast.defined_segments();
    for alt in &ast.relations.alternatives {
        for t in alt {
            let (a, b) = match t {
                RelTerm::Parallel { a, b, .. } | RelTerm::Intersect { a, b, .. } => (a, b),
            };
            for id in [a, b] {
                if !defined.contains(id) {
                    return Err(Error::Semantic {
                        position: rel_raw.position,
                        message: format!("relation references undefined segment {id}"),
                    });
                }
            }
        }
    }
    Ok(ast)
}

fn curve_clause_from_raw(clause: RawClause) -> Result<CurveClause> {
    if clause.groups.len() != 1 {
        return Err(Error::Semantic {
            position: clause.position,
            message: String::from("'!' alternatives belong to the relation clause"),
        });
    }
    let group = clause.groups.into_iter().next().expect("one group");
    if group.is_empty() {
        return Err(Error::Semantic {
            position: clause.position,
            message: String::from("curve clause cannot be empty"),
        });
    }
    let curve = group[0].a.curve;
    let mut terms = Vec::new();
    let mut prev_b: Option<SegId> = None;
    let single = group.len() == 1 && group[0].op.is_none();
    for t in &group {
        if single {
            terms.push(CurveTerm::Single { seg: t.a });
            break;
        }
        let (Some(op), Some(b)) = (t.op, t.b) else {
            return Err(Error::Semantic {
                position: t.position,
                message: String::from("curve clause terms connect two segments with '~'"),
            });
        };
        if op != TokenKind::Connect {
            return Err(Error::Semantic {
                position: t.position,
                message: String::from("curve clause admits only '~' terms"),
            });
        }
        if t.a.curve != curve || b.curve != curve {
            return Err(Error::Semantic {
                position: t.position,
                message: String::from("curve clause mixes segments of different curves"),
            });
        }
        if b.index != t.a.index + 1 {
            return Err(Error::Semantic {
                position: t.position,
                message: format!(
                    "connection must chain consecutive segments, got {} ~ {}",
                    t.a, b
                ),
            });
        }
        if let Some(pb) = prev_b {
            if t.a != pb {
                return Err(Error::Semantic {
                    position: t.position,
                    message: format!("connection chain broken at {}", t.a),
                });
            }
        }
        prev_b = Some(b);
        terms.push(CurveTerm::Connection {
            a: t.a,
            b,
            payload: t.payload,
        });
    }
    Ok(CurveClause { curve, terms })
}

/// Convenience: tokenize and parse in one step.
pub fn parse_text(text: &str) -> Result<KyrtosAst> {
    let tokens = tokenize(text)?;
    parse(&tokens, text.len())
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    UndefinedSegment,
    PayloadKindMismatch,
    SameCurveRelation,
    EmptyAlternative,
    DuplicateAlternative,
    BrokenConnectionChain,
    DuplicateCurveClause,
}

/// Structural diagnostics over an AST (which may be hand-built rather than
/// parsed). An empty list means the AST is valid.
pub fn validate(ast: &KyrtosAst) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let defined = ast.defined_segments();

    let mut seen_curves = BTreeSet::new();
    for c in &ast.curves {
        if !seen_curves.insert(c.curve) {
            out.push(Diagnostic {
                code: DiagnosticCode::DuplicateCurveClause,
                message: format!("curve {} has more than one clause", c.curve),
            });
        }
        let mut prev_b: Option<SegId> = None;
        for t in &c.terms {
            match t {
                CurveTerm::Connection { a, b, payload } => {
                    if a.curve != c.curve || b.curve != c.curve || b.index != a.index + 1
                        || prev_b.map(|pb| *a != pb).unwrap_or(false)
                    {
                        out.push(Diagnostic {
                            code: DiagnosticCode::BrokenConnectionChain,
                            message: format!("curve {} chain breaks at {} ~ {}", c.curve, a, b),
                        });
                    }
                    prev_b = Some(*b);
                    if matches!(payload, Some(Payload::Par(_)) | Some(Payload::Int(..))) {
                        out.push(Diagnostic {
                            code: DiagnosticCode::PayloadKindMismatch,
                            message: format!("connection {} ~ {} carries a non-VAL_CON payload", a, b),
                        });
                    }
                }
                CurveTerm::Single { seg } => {
                    if seg.curve != c.curve || c.terms.len() != 1 {
                        out.push(Diagnostic {
                            code: DiagnosticCode::BrokenConnectionChain,
                            message: format!("stray single-segment term {seg}"),
                        });
                    }
                }
            }
        }
    }

    let mut rendered_alts: Vec<String> = Vec::new();
    for alt in &ast.relations.alternatives {
        if alt.is_empty() && ast.relations.alternatives.len() > 1 {
            out.push(Diagnostic {
                code: DiagnosticCode::EmptyAlternative,
                message: String::from("empty '!' alternative"),
            });
        }
        let repr = format!("{alt:?}");
        if rendered_alts.contains(&repr) {
            out.push(Diagnostic {
                code: DiagnosticCode::DuplicateAlternative,
                message: String::from("duplicate '!' alternative"),
            });
        }
        rendered_alts.push(repr);
        for t in alt {
            let (a, b, kind_ok) = match t {
                RelTerm::Parallel { a, b, payload } => (
                    a,
                    b,
                    !matches!(payload, Some(Payload::Con(_)) | Some(Payload::Int(..))),
                ),
                RelTerm::Intersect { a, b, payload } => (
                    a,
                    b,
                    !matches!(payload, Some(Payload::Con(_)) | Some(Payload::Par(_))),
                ),
            };
            for id in [a, b] {
                if !defined.contains(id) {
                    out.push(Diagnostic {
                        code: DiagnosticCode::UndefinedSegment,
                        message: format!("relation references undefined segment {id}"),
                    });
                }
            }
            if !kind_ok {
                out.push(Diagnostic {
                    code: DiagnosticCode::PayloadKindMismatch,
                    message: format!("relation {} / {} payload kind mismatch", a, b),
                });
            }
            if a.curve == b.curve {
                out.push(Diagnostic {
                    code: DiagnosticCode::SameCurveRelation,
                    message: format!("{} and {} belong to the same curve", a, b),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointF;
    use proptest::prelude::*;

    fn sid(c: u32, i: u32) -> SegId {
        SegId::new(c, i)
    }

    #[test]
    fn tokenize_connection_terms() {
        let toks = tokenize("SL11 ~ SL12").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![TokenKind::Ident, TokenKind::Connect, TokenKind::Ident]
        );
        assert_eq!(toks[0].position, 0);
        assert_eq!(toks[1].position, 5);
    }

    #[test]
    fn tokenize_intersect_is_one_token() {
        let toks = tokenize("><").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Intersect);
        assert_eq!(toks[0].lexeme, "><");
    }

    #[test]
    fn tokenize_rejects_unknown_character() {
        assert!(matches!(
            tokenize("SL1$"),
            Err(Error::Lex { position: 3, found: '$' })
        ));
    }

    #[test]
    fn tokenize_value_is_one_token() {
        let toks = tokenize("VAL_CON(34.5)").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Value);
        assert_eq!(toks[0].lexeme, "VAL_CON(34.5)");
    }

    #[test]
    fn serialize_minimal_sentence() {
        let ast = KyrtosAst {
            curves: vec![CurveClause {
                curve: 1,
                terms: vec![CurveTerm::Connection {
                    a: sid(1, 0),
                    b: sid(1, 1),
                    payload: Some(Payload::Con(30.0)),
                }],
            }],
            relations: RelationClause::default(),
        };
        let text = serialize(&ast).unwrap();
        assert_eq!(text, "[(SL11 ~ SL12 : VAL_CON(30.0))] @ []");
    }

    #[test]
    fn serialize_emits_intersections_and_parallelisms() {
        let curves = vec![
            vec![
                LineSegment::new(sid(1, 0), PointF::new(0.0, 0.0), PointF::new(10.0, 10.0)),
                LineSegment::new(sid(1, 1), PointF::new(10.0, 10.0), PointF::new(20.0, 0.0)),
                LineSegment::new(sid(1, 2), PointF::new(20.0, 0.0), PointF::new(30.0, 10.0)),
            ],
            vec![
                LineSegment::new(sid(2, 0), PointF::new(0.0, 8.0), PointF::new(15.0, 6.0)),
                LineSegment::new(sid(2, 1), PointF::new(15.0, 6.0), PointF::new(30.0, 4.0)),
            ],
        ];
        let connections = crate::segment::compute_connection_angles(&curves[0]);
        let mut cross = crate::segment::find_intersections(&curves[0], &curves[1]);
        cross.extend(crate::segment::find_parallelisms(&curves[0], &curves[1], 3, 3));
        let ast = KyrtosAst::from_analysis(&curves, &connections, &cross).unwrap();
        let text = serialize(&ast).unwrap();
        assert!(text.contains("SL13 >< SL22") || text.contains("SL11 >< SL21"),
            "intersection term present: {text}");
        assert!(text.contains(" @ ["), "relation clause appended: {text}");
    }

    #[test]
    fn serialize_empty_relations_is_empty_clause() {
        let curves = vec![vec![LineSegment::new(
            sid(1, 0),
            PointF::new(0.0, 0.0),
            PointF::new(5.0, 5.0),
        )]];
        let ast = KyrtosAst::from_analysis(&curves, &[], &[]).unwrap();
        assert_eq!(serialize(&ast).unwrap(), "[(SL11)] @ []");
    }

    #[test]
    fn parse_round_trips_serialized_text() {
        let ast = KyrtosAst {
            curves: vec![
                CurveClause {
                    curve: 1,
                    terms: vec![
                        CurveTerm::Connection { a: sid(1, 0), b: sid(1, 1), payload: Some(Payload::Con(34.513084935149756)) },
                        CurveTerm::Connection { a: sid(1, 1), b: sid(1, 2), payload: Some(Payload::Con(12.0)) },
                    ],
                },
                CurveClause {
                    curve: 2,
                    terms: vec![CurveTerm::Single { seg: sid(2, 0) }],
                },
            ],
            relations: RelationClause {
                alternatives: vec![vec![
                    RelTerm::Parallel { a: sid(1, 0), b: sid(2, 0), payload: Some(Payload::Par(0.5)) },
                    RelTerm::Intersect { a: sid(1, 2), b: sid(2, 0), payload: Some(Payload::Int(111, 126)) },
                ]],
            },
        };
        let text = serialize(&ast).unwrap();
        let reparsed = parse_text(&text).unwrap();
        assert_eq!(reparsed, ast);
        assert!(validate(&reparsed).is_empty());
    }

    #[test]
    fn parse_rejects_nonconsecutive_connection() {
        let err = parse_text("[(SL11 ~ SL13)] @ []").unwrap_err();
        assert!(matches!(err, Error::Semantic { .. }), "{err:?}");
    }

    #[test]
    fn parse_rejects_unbalanced_bracket() {
        let err = parse_text("[(SL11 ~ SL12)").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn parse_requires_relation_clause() {
        let err = parse_text("[(SL11 ~ SL12)]").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn parse_rejects_undefined_relation_segment() {
        let err = parse_text("[(SL11 ~ SL12)] @ [(SL11 = SL91)]").unwrap_err();
        assert!(matches!(err, Error::Semantic { .. }), "{err:?}");
    }

    #[test]
    fn parse_accepts_or_alternatives() {
        let ast = parse_text("[(SL11 ~ SL12)] @ [(SL11 = SL11) ! (SL12 >< SL11)]");
        // Same-curve relations parse (validator flags them).
        let ast = ast.unwrap();
        assert_eq!(ast.relations.alternatives.len(), 2);
        let diags = validate(&ast);
        assert!(diags.iter().any(|d| d.code == DiagnosticCode::SameCurveRelation));
    }

    #[test]
    fn validate_flags_payload_mismatch() {
        let ast = KyrtosAst {
            curves: vec![CurveClause {
                curve: 1,
                terms: vec![CurveTerm::Connection { a: sid(1, 0), b: sid(1, 1), payload: None }],
            }, CurveClause {
                curve: 2,
                terms: vec![CurveTerm::Single { seg: sid(2, 0) }],
            }],
            relations: RelationClause {
                alternatives: vec![vec![RelTerm::Parallel {
                    a: sid(1, 0),
                    b: sid(2, 0),
                    payload: Some(Payload::Int(3, 4)),
                }]],
            },
        };
        let diags = validate(&ast);
        assert!(diags.iter().any(|d| d.code == DiagnosticCode::PayloadKindMismatch));
    }

    #[test]
    fn validate_flags_undefined_segment() {
        let ast = KyrtosAst {
            curves: vec![CurveClause {
                curve: 1,
                terms: vec![CurveTerm::Connection { a: sid(1, 0), b: sid(1, 1), payload: None }],
            }],
            relations: RelationClause {
                alternatives: vec![vec![RelTerm::Intersect {
                    a: sid(1, 0),
                    b: sid(9, 8),
                    payload: None,
                }]],
            },
        };
        let diags = validate(&ast);
        assert!(diags.iter().any(|d| d.code == DiagnosticCode::UndefinedSegment));
    }

    #[test]
    fn validate_accepts_round_trip_output() {
        let ast = parse_text("[(SL11 ~ SL12 : VAL_CON(90.0))] @ []").unwrap();
        assert!(validate(&ast).is_empty());
    }

    #[test]
    fn serializer_is_order_stable() {
        let curves = vec![
            vec![
                LineSegment::new(sid(1, 0), PointF::new(0.0, 0.0), PointF::new(10.0, 5.0)),
                LineSegment::new(sid(1, 1), PointF::new(10.0, 5.0), PointF::new(20.0, 30.0)),
            ],
            vec![
                LineSegment::new(sid(2, 0), PointF::new(0.0, 40.0), PointF::new(10.0, 45.0)),
                LineSegment::new(sid(2, 1), PointF::new(10.0, 45.0), PointF::new(20.0, 70.0)),
            ],
        ];
        let connections: Vec<Relation> = curves
            .iter()
            .flat_map(|c| crate::segment::compute_connection_angles(c))
            .collect();
        let mut cross = crate::segment::find_parallelisms(&curves[0], &curves[1], 3, 3);
        cross.extend(crate::segment::find_intersections(&curves[0], &curves[1]));
        let a = KyrtosAst::from_analysis(&curves, &connections, &cross).unwrap();
        let mut reversed = cross.clone();
        reversed.reverse();
        let b = KyrtosAst::from_analysis(&curves, &connections, &reversed).unwrap();
        assert_eq!(serialize(&a).unwrap(), serialize(&b).unwrap());
    }

    proptest! {
        // Round-trip over randomly shaped small descriptions.
        #[test]
        fn random_ast_round_trips(
            n_curves in 1u32..4,
            segs_per_curve in 1u32..5,
            angle in 0.0f64..179.0,
        ) {
            let curves: Vec<CurveClause> = (1..=n_curves)
                .map(|c| CurveClause {
                    curve: c,
                    terms: if segs_per_curve == 1 {
                        vec![CurveTerm::Single { seg: sid(c, 0) }]
                    } else {
                        (0..segs_per_curve - 1)
                            .map(|i| CurveTerm::Connection {
                                a: sid(c, i),
                                b: sid(c, i + 1),
                                payload: Some(Payload::Con(angle + i as f64 * 0.25)),
                            })
                            .collect()
                    },
                })
                .collect();
            let relations = if n_curves >= 2 {
                RelationClause {
                    alternatives: vec![vec![RelTerm::Parallel {
                        a: sid(1, 0),
                        b: sid(2, 0),
                        payload: Some(Payload::Par(angle / 100.0)),
                    }]],
                }
            } else {
                RelationClause::default()
            };
            let mut ast = KyrtosAst { curves, relations };
            ast.canonicalize();
            let text = serialize(&ast).unwrap();
            let reparsed = parse_text(&text).unwrap();
            prop_assert_eq!(reparsed, ast);
        }

        // The tokenizer/parser never panic on arbitrary input.
        #[test]
        fn lexer_parser_total_on_junk(s in "[\\[\\]()@!~=><:A-Z0-9_. ]{0,60}") {
            match tokenize(&s) {
                Ok(toks) => {
                    let _ = parse(&toks, s.len());
                }
                Err(_) => {}
            }
        }
    }
}
