//! The workspace DSL: signatures, structures, families and patterns in a
//! line-oriented text format.
//!
//! ```text
//! # comments run to the end of the line
//! signature graph { rel E : 2 symmetric }
//! structure K3 over graph { points 3; E: (0,1) (0,2) (1,2) }
//! family henson3 over graph { forbid K3 }
//! pattern edge over graph { carrier e1; left (0); right (1); base () }
//! ```
//!
//! Files are UTF-8 with `\n` or `\r\n` line endings. Duplicate tuples
//! collapse; symmetric symbols accept any coordinate order. Names must be
//! declared before they are referenced. Re-declaring a name with an
//! identical definition is allowed (so generated files can be concatenated
//! onto the workspace that produced them); conflicting re-declarations are
//! an error.

use std::fmt;
use std::sync::Arc;

use fraisse_core::forbidden::ForbiddenFamily;
use fraisse_core::structure::{Point, PointSet, RelStructure, RelSymbol, Signature, StructureError};
use fraisse_core::witness::PairPattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticCode {
    Parse,
    ArityMismatch,
    RepeatedCoordinate,
    PointOutOfRange,
    UnresolvedName,
    DuplicateName,
    EmptySignature,
    InvalidDeclaration,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Parse => "parse",
            DiagnosticCode::ArityMismatch => "arity-mismatch",
            DiagnosticCode::RepeatedCoordinate => "repeated-coordinate",
            DiagnosticCode::PointOutOfRange => "point-out-of-range",
            DiagnosticCode::UnresolvedName => "unresolved-name",
            DiagnosticCode::DuplicateName => "duplicate-name",
            DiagnosticCode::EmptySignature => "empty-signature",
            DiagnosticCode::InvalidDeclaration => "invalid-declaration",
        }
    }
}

/// A parse-time problem: position plus a one-line cause.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: [{}] {}", self.line, self.col, self.code.as_str(), self.message)
    }
}

#[derive(Clone, Debug)]
pub struct NamedStructure {
    pub name: String,
    pub signature_name: String,
    pub structure: RelStructure,
}

#[derive(Clone, Debug)]
pub struct NamedFamily {
    pub name: String,
    pub signature_name: String,
    pub member_names: Vec<String>,
    pub family: ForbiddenFamily,
}

#[derive(Clone, Debug)]
pub struct NamedPattern {
    pub name: String,
    pub signature_name: String,
    pub carrier_name: String,
    pub pattern: PairPattern,
}

/// A parsed workspace: declarations in file order, fully resolved and
/// validated against their signatures.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub signatures: Vec<(String, Arc<Signature>)>,
    pub structures: Vec<NamedStructure>,
    pub families: Vec<NamedFamily>,
    pub patterns: Vec<NamedPattern>,
}

impl Workspace {
    pub fn signature(&self, name: &str) -> Option<&Arc<Signature>> {
        self.signatures.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn structure(&self, name: &str) -> Option<&NamedStructure> {
        self.structures.iter().find(|s| s.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&NamedFamily> {
        self.families.iter().find(|s| s.name == name)
    }

    pub fn pattern(&self, name: &str) -> Option<&NamedPattern> {
        self.patterns.iter().find(|s| s.name == name)
    }

    fn signature_name_of(&self, sig: &Arc<Signature>) -> Option<&str> {
        self.signatures.iter().find(|(_, s)| s == sig).map(|(n, _)| n.as_str())
    }
}

pub fn parse_workspace(text: &str) -> Result<Workspace, Vec<Diagnostic>> {
    parse_workspace_with(Workspace::default(), text)
}

/// Parses `text` on top of an existing workspace, so several files can be
/// loaded in sequence.
pub fn parse_workspace_with(ws: Workspace, text: &str) -> Result<Workspace, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|d| vec![d])?;
    let mut parser = Parser { tokens, pos: 0, ws };
    parser.run().map_err(|d| vec![d])?;
    Ok(parser.ws)
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, Diagnostic> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '{' | '}' | '(' | ')' | ',' | ';' | ':' => {
                let c = bump(&mut chars);
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    _ => Tok::Colon,
                };
                out.push(Spanned { tok, line: tline, col: tcol });
            }
            c if c.is_ascii_digit() => {
                let mut value = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        value.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let n: usize = value.parse().map_err(|_| Diagnostic {
                    line: tline,
                    col: tcol,
                    code: DiagnosticCode::Parse,
                    message: format!("integer `{value}` is out of range"),
                })?;
                out.push(Spanned { tok: Tok::Int(n), line: tline, col: tcol });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(name), line: tline, col: tcol });
            }
            other => {
                return Err(Diagnostic {
                    line: tline,
                    col: tcol,
                    code: DiagnosticCode::Parse,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    ws: Workspace,
}

impl Parser {
    fn run(&mut self) -> Result<(), Diagnostic> {
        while self.pos < self.tokens.len() {
            let keyword = self.expect_ident("a declaration keyword")?;
            match keyword.as_str() {
                "signature" => self.signature_decl()?,
                "structure" => self.structure_decl()?,
                "family" => self.family_decl()?,
                "pattern" => self.pattern_decl()?,
                other => {
                    return Err(self.error_prev(
                        DiagnosticCode::Parse,
                        format!(
                            "expected `signature`, `structure`, `family` or `pattern`, \
                             found `{other}`"
                        ),
                    ))
                }
            }
        }
        Ok(())
    }

    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn error_here(&self, code: DiagnosticCode, message: String) -> Diagnostic {
        let (line, col) = self.here();
        Diagnostic { line, col, code, message }
    }

    fn error_prev(&self, code: DiagnosticCode, message: String) -> Diagnostic {
        let (line, col) = self
            .tokens
            .get(self.pos.saturating_sub(1))
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        Diagnostic { line, col, code, message }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, Diagnostic> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => Err(self.error_here(
                DiagnosticCode::Parse,
                format!("unexpected end of input, expected {expected}"),
            )),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), Diagnostic> {
        let found = self.next(&format!("{tok}"))?;
        if found == tok {
            Ok(())
        } else {
            Err(self.error_prev(DiagnosticCode::Parse, format!("expected {tok}, found {found}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.next(what)? {
            Tok::Ident(name) => Ok(name),
            other => {
                Err(self.error_prev(DiagnosticCode::Parse, format!("expected {what}, found {other}")))
            }
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<usize, Diagnostic> {
        match self.next(what)? {
            Tok::Int(n) => Ok(n),
            other => {
                Err(self.error_prev(DiagnosticCode::Parse, format!("expected {what}, found {other}")))
            }
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        let found = self.expect_ident(&format!("`{kw}`"))?;
        if found == kw {
            Ok(())
        } else {
            Err(self.error_prev(DiagnosticCode::Parse, format!("expected `{kw}`, found `{found}`")))
        }
    }

    fn skip_semis(&mut self) {
        while self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
        }
    }

    fn check_fresh_name(&self, name: &str) -> Result<Option<()>, ()> {
        // Ok(None): name unused. Ok(Some(())): caller must verify identity.
        let used = self.ws.signatures.iter().any(|(n, _)| n == name)
            || self.ws.structures.iter().any(|s| s.name == name)
            || self.ws.families.iter().any(|s| s.name == name)
            || self.ws.patterns.iter().any(|s| s.name == name);
        if used {
            Ok(Some(()))
        } else {
            Ok(None)
        }
    }

    fn duplicate_error(&self, name: &str) -> Diagnostic {
        self.error_prev(
            DiagnosticCode::DuplicateName,
            format!("`{name}` is already declared with a different definition"),
        )
    }

    fn signature_decl(&mut self) -> Result<(), Diagnostic> {
        let name = self.expect_ident("a signature name")?;
        let name_taken = self.check_fresh_name(&name).unwrap().is_some();
        self.expect(Tok::LBrace)?;
        let mut symbols = Vec::new();
        loop {
            self.skip_semis();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(kw)) if kw == "rel" => {
                    self.pos += 1;
                    let sym = self.expect_ident("a relation symbol name")?;
                    self.expect(Tok::Colon)?;
                    let arity = self.expect_int("an arity")?;
                    let symmetric = if let Some(Tok::Ident(kw)) = self.peek() {
                        if kw == "symmetric" {
                            self.pos += 1;
                            true
                        } else {
                            false
                        }
                    } else {
                        false
                    };
                    symbols.push(RelSymbol::new(sym, arity, symmetric));
                }
                _ => {
                    return Err(self.error_here(
                        DiagnosticCode::Parse,
                        "expected `rel` or `}` in signature body".into(),
                    ))
                }
            }
        }
        let sig = Signature::new(symbols).map_err(|e| {
            let code = match e {
                StructureError::EmptySignature => DiagnosticCode::EmptySignature,
                _ => DiagnosticCode::InvalidDeclaration,
            };
            self.error_prev(code, e.to_string())
        })?;
        let sig = Arc::new(sig);
        if name_taken {
            match self.ws.signature(&name) {
                Some(existing) if *existing == sig => return Ok(()),
                _ => return Err(self.duplicate_error(&name)),
            }
        }
        self.ws.signatures.push((name, sig));
        Ok(())
    }

    fn structure_decl(&mut self) -> Result<(), Diagnostic> {
        let name = self.expect_ident("a structure name")?;
        let name_taken = self.check_fresh_name(&name).unwrap().is_some();
        self.expect_keyword("over")?;
        let sig_name = self.expect_ident("a signature name")?;
        let sig = self
            .ws
            .signature(&sig_name)
            .cloned()
            .ok_or_else(|| {
                self.error_prev(
                    DiagnosticCode::UnresolvedName,
                    format!("signature `{sig_name}` is not declared"),
                )
            })?;
        self.expect(Tok::LBrace)?;
        self.expect_keyword("points")?;
        let n = self.expect_int("a point count")?;
        let mut s = RelStructure::empty(sig, n)
            .map_err(|e| self.error_prev(DiagnosticCode::InvalidDeclaration, e.to_string()))?;
        loop {
            self.skip_semis();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(_)) => {
                    let sym_name = self.expect_ident("a relation symbol")?;
                    let sym = s.signature().symbol_index(&sym_name).ok_or_else(|| {
                        self.error_prev(
                            DiagnosticCode::UnresolvedName,
                            format!("signature `{sig_name}` has no symbol `{sym_name}`"),
                        )
                    })?;
                    self.expect(Tok::Colon)?;
                    while self.peek() == Some(&Tok::LParen) {
                        let tuple = self.tuple()?;
                        s.add_instance(sym, &tuple).map_err(|e| self.instance_error(e))?;
                    }
                }
                _ => {
                    return Err(self.error_here(
                        DiagnosticCode::Parse,
                        "expected a relation symbol or `}` in structure body".into(),
                    ))
                }
            }
        }
        if name_taken {
            match self.ws.structure(&name) {
                Some(existing) if existing.structure == s => return Ok(()),
                _ => return Err(self.duplicate_error(&name)),
            }
        }
        self.ws.structures.push(NamedStructure { name, signature_name: sig_name, structure: s });
        Ok(())
    }

    fn instance_error(&self, e: StructureError) -> Diagnostic {
        let code = match e {
            StructureError::ArityMismatch { .. } => DiagnosticCode::ArityMismatch,
            StructureError::RepeatedCoordinate(_) => DiagnosticCode::RepeatedCoordinate,
            StructureError::PointOutOfRange(_) => DiagnosticCode::PointOutOfRange,
            _ => DiagnosticCode::InvalidDeclaration,
        };
        self.error_prev(code, e.to_string())
    }

    fn tuple(&mut self) -> Result<Vec<Point>, Diagnostic> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.expect_int("a point index")?);
            match self.next("`,` or `)`")? {
                Tok::Comma => {}
                Tok::RParen => break,
                other => {
                    return Err(self.error_prev(
                        DiagnosticCode::Parse,
                        format!("expected `,` or `)`, found {other}"),
                    ))
                }
            }
        }
        Ok(out)
    }

    fn family_decl(&mut self) -> Result<(), Diagnostic> {
        let name = self.expect_ident("a family name")?;
        let name_taken = self.check_fresh_name(&name).unwrap().is_some();
        self.expect_keyword("over")?;
        let sig_name = self.expect_ident("a signature name")?;
        let sig = self
            .ws
            .signature(&sig_name)
            .cloned()
            .ok_or_else(|| {
                self.error_prev(
                    DiagnosticCode::UnresolvedName,
                    format!("signature `{sig_name}` is not declared"),
                )
            })?;
        self.expect(Tok::LBrace)?;
        let mut member_names = Vec::new();
        let mut members = Vec::new();
        loop {
            self.skip_semis();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(kw)) if kw == "forbid" => {
                    self.pos += 1;
                    let member = self.expect_ident("a structure name")?;
                    let named = self.ws.structure(&member).ok_or_else(|| {
                        self.error_prev(
                            DiagnosticCode::UnresolvedName,
                            format!("structure `{member}` is not declared"),
                        )
                    })?;
                    members.push(named.structure.clone());
                    member_names.push(member);
                }
                _ => {
                    return Err(self.error_here(
                        DiagnosticCode::Parse,
                        "expected `forbid` or `}` in family body".into(),
                    ))
                }
            }
        }
        let family = ForbiddenFamily::new(sig, members)
            .map_err(|e| self.error_prev(DiagnosticCode::InvalidDeclaration, e.to_string()))?;
        if name_taken {
            match self.ws.family(&name) {
                Some(existing)
                    if existing.member_names == member_names
                        && existing.signature_name == sig_name =>
                {
                    return Ok(())
                }
                _ => return Err(self.duplicate_error(&name)),
            }
        }
        self.ws.families.push(NamedFamily { name, signature_name: sig_name, member_names, family });
        Ok(())
    }

    fn pattern_decl(&mut self) -> Result<(), Diagnostic> {
        let name = self.expect_ident("a pattern name")?;
        let name_taken = self.check_fresh_name(&name).unwrap().is_some();
        self.expect_keyword("over")?;
        let sig_name = self.expect_ident("a signature name")?;
        if self.ws.signature(&sig_name).is_none() {
            return Err(self.error_prev(
                DiagnosticCode::UnresolvedName,
                format!("signature `{sig_name}` is not declared"),
            ));
        }
        self.expect(Tok::LBrace)?;
        self.expect_keyword("carrier")?;
        let carrier_name = self.expect_ident("a structure name")?;
        let carrier = self
            .ws
            .structure(&carrier_name)
            .ok_or_else(|| {
                self.error_prev(
                    DiagnosticCode::UnresolvedName,
                    format!("structure `{carrier_name}` is not declared"),
                )
            })?
            .structure
            .clone();
        let mut sets = [PointSet::EMPTY; 3];
        for (i, kw) in ["left", "right", "base"].iter().enumerate() {
            self.skip_semis();
            self.expect_keyword(kw)?;
            let points = self.tuple()?;
            for &p in &points {
                if p >= carrier.size() {
                    return Err(self.error_prev(
                        DiagnosticCode::PointOutOfRange,
                        format!("point {p} is outside `{carrier_name}`"),
                    ));
                }
            }
            sets[i] = points.into_iter().collect();
        }
        self.skip_semis();
        self.expect(Tok::RBrace)?;
        let pattern = PairPattern::new(carrier, sets[0], sets[1], sets[2])
            .map_err(|e| self.error_prev(DiagnosticCode::InvalidDeclaration, e.to_string()))?;
        if name_taken {
            return Err(self.duplicate_error(&name));
        }
        self.ws.patterns.push(NamedPattern {
            name,
            signature_name: sig_name,
            carrier_name,
            pattern,
        });
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// printer

fn print_tuple(tuple: &[Point]) -> String {
    let items: Vec<String> = tuple.iter().map(|p| p.to_string()).collect();
    format!("({})", items.join(","))
}

pub fn print_signature(name: &str, sig: &Signature) -> String {
    let rels: Vec<String> = sig
        .symbols()
        .iter()
        .map(|s| {
            if s.symmetric {
                format!("rel {} : {} symmetric", s.name, s.arity)
            } else {
                format!("rel {} : {}", s.name, s.arity)
            }
        })
        .collect();
    format!("signature {name} {{ {} }}", rels.join(" "))
}

pub fn print_structure(name: &str, sig_name: &str, s: &RelStructure) -> String {
    let mut parts = vec![format!("points {}", s.size())];
    for (sym, decl) in s.signature().symbols().iter().enumerate() {
        let instances = s.instances(sym);
        if instances.is_empty() {
            continue;
        }
        let tuples: Vec<String> = instances.iter().map(|t| print_tuple(t)).collect();
        parts.push(format!("{}: {}", decl.name, tuples.join(" ")));
    }
    format!("structure {name} over {sig_name} {{ {} }}", parts.join("; "))
}

pub fn print_family(name: &str, sig_name: &str, member_names: &[String]) -> String {
    let body: Vec<String> = member_names.iter().map(|m| format!("forbid {m}")).collect();
    format!("family {name} over {sig_name} {{ {} }}", body.join(" "))
}

pub fn print_pattern(p: &NamedPattern) -> String {
    let list = |set: PointSet| print_tuple(&set.to_vec());
    format!(
        "pattern {} over {} {{ carrier {}; left {}; right {}; base {} }}",
        p.name,
        p.signature_name,
        p.carrier_name,
        list(p.pattern.left()),
        list(p.pattern.right()),
        list(p.pattern.base()),
    )
}

/// Prints a whole workspace in declaration order; parsing the output yields
/// a workspace with canonically equal content.
pub fn print_workspace(ws: &Workspace) -> String {
    let mut lines = Vec::new();
    for (name, sig) in &ws.signatures {
        lines.push(print_signature(name, sig));
    }
    for s in &ws.structures {
        lines.push(print_structure(&s.name, &s.signature_name, &s.structure));
    }
    for f in &ws.families {
        lines.push(print_family(&f.name, &f.signature_name, &f.member_names));
    }
    for p in &ws.patterns {
        lines.push(print_pattern(p));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// The text of a generated structure file: the signature it needs plus the
/// structure itself, concatenable onto the producing workspace.
pub fn print_structure_file(ws: &Workspace, name: &str, s: &RelStructure) -> String {
    let sig_name = ws.signature_name_of(s.signature()).unwrap_or("sig");
    format!(
        "{}\n{}\n",
        print_signature(sig_name, s.signature()),
        print_structure(name, sig_name, s)
    )
}
