//! Model file parser: one file holds a signature plus named nets (each
//! with named markings), equations, and counter machines. All structural
//! checks (arity, place membership, groundness) happen at parse time.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use apn_core::equation::HomogeneousEquation;
use apn_core::group::CyclicGroup;
use apn_core::minsky::{Instruction, MinskyMachine};
use apn_core::net::{NetStructure, Transition};
use apn_core::poly::{PVector, Polynomial};
use apn_core::term::{is_reserved_var, Signature, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct NetModel {
    pub structure: NetStructure,
    pub markings: BTreeMap<String, PVector>,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub signature: Signature,
    pub nets: BTreeMap<String, NetModel>,
    pub equations: BTreeMap<String, HomogeneousEquation>,
    pub machines: BTreeMap<String, MinskyMachine>,
}

impl ModelFile {
    /// The only net when the file has exactly one; commands that omit
    /// `--net` use this.
    pub fn sole_net(&self) -> Option<(&String, &NetModel)> {
        if self.nets.len() == 1 {
            self.nets.iter().next()
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i128),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Slash,
    Star,
    Plus,
    Minus,
    Arrow,
    Question,
    Equals,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Int(n) => write!(f, "`{}`", n),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Question => write!(f, "`?`"),
            Tok::Equals => write!(f, "`=`"),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if ch.is_whitespace() {
            chars.next();
            bump(ch, &mut line, &mut col);
            continue;
        }
        if ch == '#' {
            // Comment to end of line.
            for c in chars.by_ref() {
                bump(c, &mut line, &mut col);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Lexed {
                tok: Tok::Ident(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if ch.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let n: i128 = s.parse().map_err(|_| ParseError {
                line: tline,
                col: tcol,
                message: format!("integer literal `{}` out of range", s),
            })?;
            out.push(Lexed {
                tok: Tok::Int(n),
                line: tline,
                col: tcol,
            });
            continue;
        }
        chars.next();
        bump(ch, &mut line, &mut col);
        let tok = match ch {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '/' => Tok::Slash,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '?' => Tok::Question,
            '=' => Tok::Equals,
            '-' => {
                if chars.peek() == Some(&'>') {
                    chars.next();
                    bump('>', &mut line, &mut col);
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            other => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{}`", other),
                })
            }
        };
        out.push(Lexed {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    signature: Option<Signature>,
}

// Raw declarations before cross-referencing; equations need the net's
// place order, so their vectors are materialized after the whole file is
// read.
struct RawEquation {
    name: String,
    group: CyclicGroup,
    entries: Vec<(String, Term, i128)>,
    line: usize,
    col: usize,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            self.err(format!("expected {}, found {}", want, got))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                self.err(format!("expected identifier, found {}", other))
            }
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        match self.next()? {
            Tok::Int(n) if n >= 0 => Ok(n as u64),
            other => {
                self.pos -= 1;
                self.err(format!("expected natural number, found {}", other))
            }
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        let got = self.ident()?;
        if got == word {
            Ok(())
        } else {
            self.pos -= 1;
            self.err(format!("expected `{}`, found `{}`", word, got))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sig(&self) -> Result<&Signature, ParseError> {
        match &self.signature {
            Some(s) => Ok(s),
            None => {
                let (line, col) = self
                    .toks
                    .get(self.pos)
                    .map(|t| (t.line, t.col))
                    .unwrap_or((1, 1));
                Err(ParseError {
                    line,
                    col,
                    message: "no signature declared before first term".into(),
                })
            }
        }
    }

    // signature: f/1, g/1, c/0;
    fn parse_signature(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::Colon)?;
        let mut symbols = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(Tok::Slash)?;
            let arity = self.nat()? as usize;
            symbols.push((name, arity));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        if self.signature.is_some() {
            return self.err("signature declared twice; one signature per file");
        }
        match Signature::new(symbols) {
            Ok(s) => {
                self.signature = Some(s);
                Ok(())
            }
            Err(e) => self.err(e.to_string()),
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident()?;
        if is_reserved_var(&name) {
            return self.err(format!("variable name `{}` is reserved", name));
        }
        let mut args = Vec::new();
        let has_args = self.eat(&Tok::LParen);
        if has_args {
            loop {
                args.push(self.parse_term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        match self.sig()?.arity(&name) {
            Some(arity) => {
                if arity != args.len() {
                    self.err(format!(
                        "symbol `{}` has arity {}, got {} arguments",
                        name,
                        arity,
                        args.len()
                    ))
                } else {
                    Ok(Term::app(name, args))
                }
            }
            None => {
                if has_args {
                    self.err(format!("unknown symbol `{}`", name))
                } else {
                    Ok(Term::var(name))
                }
            }
        }
    }

    // [-] [INT *] term, e.g. `4 * f(x)`, `-1 * x`, `c`.
    fn parse_monomial(&mut self, leading_sign: i128) -> Result<(Term, i128), ParseError> {
        let mut sign = leading_sign;
        if self.eat(&Tok::Minus) {
            sign = -sign;
        }
        let coeff = if let Some(Tok::Int(n)) = self.peek() {
            let n = *n;
            self.pos += 1;
            self.expect(Tok::Star)?;
            n
        } else {
            1
        };
        let term = self.parse_term()?;
        Ok((term, sign * coeff))
    }

    // monomial (('+'|'-') monomial)*
    fn parse_polynomial(&mut self, group: CyclicGroup) -> Result<Polynomial, ParseError> {
        let mut entries = Vec::new();
        entries.push(self.parse_monomial(1)?);
        loop {
            let sign = if self.eat(&Tok::Plus) {
                1
            } else if self.eat(&Tok::Minus) {
                self.pos -= 1;
                1
            } else {
                break;
            };
            entries.push(self.parse_monomial(sign)?);
        }
        match Polynomial::from_entries(group, entries.into_iter().map(|(t, c)| (t, c))) {
            Ok(p) => Ok(p),
            Err(e) => self.err(e.to_string()),
        }
    }

    // place -> monomial, comma separated, ';' terminated.
    fn parse_arcs(&mut self, places: &[String]) -> Result<Vec<(String, Polynomial)>, ParseError> {
        let mut arcs = Vec::new();
        loop {
            let place = self.ident()?;
            if !places.contains(&place) {
                return self.err(format!("unknown place `{}`", place));
            }
            self.expect(Tok::Arrow)?;
            let (term, coeff) = self.parse_monomial(1)?;
            if coeff <= 0 {
                return self.err("arc multiplicity must be positive");
            }
            let poly = Polynomial::monomial(CyclicGroup::Int, term, coeff)
                .map_err(|e| ParseError {
                    line: 0,
                    col: 0,
                    message: e.to_string(),
                })?;
            arcs.push((place, poly));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        Ok(arcs)
    }

    fn parse_net(&mut self) -> Result<(String, NetModel), ParseError> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut places: Vec<String> = Vec::new();
        let mut transitions: Vec<Transition> = Vec::new();
        let mut raw_markings: Vec<(String, Vec<(String, Polynomial)>)> = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let word = self.ident()?;
            match word.as_str() {
                "signature" => self.parse_signature()?,
                "places" => {
                    self.expect(Tok::Colon)?;
                    loop {
                        places.push(self.ident()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                "transition" => {
                    if places.is_empty() {
                        return self.err("places must be declared before transitions");
                    }
                    let tname = self.ident()?;
                    self.expect(Tok::LBrace)?;
                    self.keyword("in")?;
                    self.expect(Tok::Colon)?;
                    let consume = self.parse_arcs(&places)?;
                    let produce = if self.peek() == Some(&Tok::Ident("out".into())) {
                        self.keyword("out")?;
                        self.expect(Tok::Colon)?;
                        self.parse_arcs(&places)?
                    } else {
                        Vec::new()
                    };
                    self.expect(Tok::RBrace)?;
                    let build = |entries: Vec<(String, Polynomial)>| {
                        PVector::from_entries(CyclicGroup::Int, places.clone(), entries)
                    };
                    let t = build(consume)
                        .and_then(|c| build(produce).map(|p| (c, p)))
                        .map_err(|e| e.to_string())
                        .and_then(|(c, p)| {
                            Transition::new(tname.clone(), c, p).map_err(|e| e.to_string())
                        });
                    match t {
                        Ok(t) => transitions.push(t),
                        Err(e) => return self.err(e),
                    }
                }
                "marking" => {
                    if places.is_empty() {
                        return self.err("places must be declared before markings");
                    }
                    let mname = self.ident()?;
                    self.expect(Tok::LBrace)?;
                    let mut entries = Vec::new();
                    if !self.eat(&Tok::RBrace) {
                        loop {
                            let place = self.ident()?;
                            if !places.contains(&place) {
                                return self.err(format!("unknown place `{}`", place));
                            }
                            self.expect(Tok::Colon)?;
                            let poly = self.parse_polynomial(CyclicGroup::Int)?;
                            if !poly.is_ground() || !poly.is_semi_positive() {
                                return self
                                    .err("marking tokens must be ground with positive counts");
                            }
                            entries.push((place, poly));
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace)?;
                    }
                    raw_markings.push((mname, entries));
                }
                other => {
                    self.pos -= 1;
                    return self.err(format!("unexpected `{}` inside net", other));
                }
            }
        }
        if places.is_empty() {
            return self.err(format!("net `{}` declares no places", name));
        }
        let structure =
            NetStructure::new(self.sig()?.clone(), places.clone(), transitions)
                .map_err(|e| ParseError {
                    line: 0,
                    col: 0,
                    message: e.to_string(),
                })?;
        let mut markings = BTreeMap::new();
        for (mname, entries) in raw_markings {
            let m = PVector::from_entries(CyclicGroup::Int, places.clone(), entries).map_err(
                |e| ParseError {
                    line: 0,
                    col: 0,
                    message: e.to_string(),
                },
            )?;
            if markings.insert(mname.clone(), m).is_some() {
                return self.err(format!("duplicate marking `{}`", mname));
            }
        }
        Ok((name, NetModel { structure, markings }))
    }

    // equation E1 group Z [mod N] { A: 4 * f(x), ... }
    fn parse_equation(&mut self) -> Result<RawEquation, ParseError> {
        let start = self.pos;
        let name = self.ident()?;
        self.keyword("group")?;
        self.keyword("Z")?;
        let group = if self.peek() == Some(&Tok::Ident("mod".into())) {
            self.pos += 1;
            let n = self.nat()?;
            if n == 0 {
                return self.err("modulus must be positive");
            }
            CyclicGroup::Mod(n)
        } else {
            CyclicGroup::Int
        };
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        loop {
            let place = self.ident()?;
            self.expect(Tok::Colon)?;
            let (term, coeff) = self.parse_monomial(1)?;
            entries.push((place, term, coeff));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        if self.eat(&Tok::Equals) {
            return self.err(
                "inhomogeneous equations (nonzero right-hand side) are not supported",
            );
        }
        let (line, col) = {
            let t = &self.toks[start];
            (t.line, t.col)
        };
        Ok(RawEquation {
            name,
            group,
            entries,
            line,
            col,
        })
    }

    // minsky M { registers: 2; 1: inc 1 -> 2; 2: jz 1 ? 3 : 2; 3: halt; }
    fn parse_minsky(&mut self) -> Result<(String, MinskyMachine), ParseError> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.keyword("registers")?;
        self.expect(Tok::Colon)?;
        let registers = self.nat()? as usize;
        self.expect(Tok::Semi)?;
        let mut instructions = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let index = self.nat()? as usize;
            if index != instructions.len() + 1 {
                return self.err(format!(
                    "instruction index {} out of order, expected {}",
                    index,
                    instructions.len() + 1
                ));
            }
            self.expect(Tok::Colon)?;
            let word = self.ident()?;
            let instr = match word.as_str() {
                "inc" => {
                    let register = self.nat()? as usize;
                    self.expect(Tok::Arrow)?;
                    let target = self.nat()? as usize;
                    Instruction::Inc { register, target }
                }
                "jz" => {
                    let register = self.nat()? as usize;
                    self.expect(Tok::Question)?;
                    let on_positive = self.nat()? as usize;
                    self.expect(Tok::Colon)?;
                    let on_zero = self.nat()? as usize;
                    Instruction::Jz {
                        register,
                        on_positive,
                        on_zero,
                    }
                }
                "halt" => Instruction::Halt,
                other => {
                    self.pos -= 1;
                    return self.err(format!("unknown instruction `{}`", other));
                }
            };
            self.expect(Tok::Semi)?;
            instructions.push(instr);
        }
        match MinskyMachine::new(registers, instructions) {
            Ok(m) => Ok((name, m)),
            Err(e) => self.err(e.to_string()),
        }
    }
}

pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        signature: None,
    };
    let mut nets: BTreeMap<String, NetModel> = BTreeMap::new();
    let mut raw_equations: Vec<RawEquation> = Vec::new();
    let mut machines: BTreeMap<String, MinskyMachine> = BTreeMap::new();
    while p.peek().is_some() {
        let word = p.ident()?;
        match word.as_str() {
            "signature" => p.parse_signature()?,
            "net" => {
                let (name, net) = p.parse_net()?;
                if nets.insert(name.clone(), net).is_some() {
                    return p.err(format!("duplicate net `{}`", name));
                }
            }
            "equation" => raw_equations.push(p.parse_equation()?),
            "minsky" => {
                let (name, m) = p.parse_minsky()?;
                if machines.insert(name.clone(), m).is_some() {
                    return p.err(format!("duplicate machine `{}`", name));
                }
            }
            other => {
                p.pos -= 1;
                return p.err(format!(
                    "expected `net`, `equation`, `minsky`, or `signature`, found `{}`",
                    other
                ));
            }
        }
    }
    let signature = match (&p.signature, raw_equations.is_empty() && nets.is_empty()) {
        (Some(s), _) => s.clone(),
        // Machine-only files need no user signature; the encoder supplies
        // its own.
        (None, true) => Signature::new(vec![("f".into(), 1), ("c".into(), 0)]).expect("valid"),
        (None, false) => {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: "file declares nets or equations but no signature".into(),
            })
        }
    };
    // Equation vectors take the sole net's place order so satisfaction
    // checks line up; without a net, mention order.
    let mut equations = BTreeMap::new();
    for raw in raw_equations {
        let fail = |message: String| ParseError {
            line: raw.line,
            col: raw.col,
            message,
        };
        let places: Vec<String> = if nets.len() == 1 {
            let net_places = nets.values().next().unwrap().structure.places();
            for (place, _, _) in &raw.entries {
                if !net_places.contains(place) {
                    return Err(fail(format!("unknown place `{}`", place)));
                }
            }
            net_places.to_vec()
        } else {
            raw.entries.iter().map(|(place, _, _)| place.clone()).collect()
        };
        let mut vector = PVector::zero(raw.group, places);
        for (place, term, coeff) in raw.entries {
            if vector.get(&place).is_some() {
                return Err(fail(format!("place `{}` constrained twice", place)));
            }
            let poly = Polynomial::monomial(raw.group, term, coeff)
                .map_err(|e| fail(e.to_string()))?;
            vector.set(place, poly).map_err(|e| fail(e.to_string()))?;
        }
        let eq = HomogeneousEquation::new(raw.name.clone(), vector)
            .map_err(|e| fail(e.to_string()))?;
        if equations.insert(raw.name.clone(), eq).is_some() {
            return Err(fail(format!("duplicate equation `{}`", raw.name)));
        }
    }
    Ok(ModelFile {
        signature,
        nets,
        equations,
        machines,
    })
}

/// Parses a firing script step: `t(X = c, Y = f(c))` or a bare `t`.
pub fn parse_step(text: &str, sig: &Signature) -> Result<(String, Substitution), ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        signature: Some(sig.clone()),
    };
    let name = p.ident()?;
    let mut sigma = Substitution::empty();
    if p.eat(&Tok::LParen) {
        if !p.eat(&Tok::RParen) {
            loop {
                let var = p.ident()?;
                p.expect(Tok::Equals)?;
                let term = p.parse_term()?;
                sigma.bind(var, term);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
            p.expect(Tok::RParen)?;
        }
    }
    if p.peek().is_some() {
        return p.err("trailing input after step");
    }
    Ok((name, sigma))
}

fn write_poly(out: &mut String, poly: &Polynomial) {
    let mut first = true;
    for (term, coeff) in poly.iter() {
        if first {
            if coeff < 0 {
                out.push_str("-");
            }
            first = false;
        } else if coeff < 0 {
            out.push_str(" + -");
        } else {
            out.push_str(" + ");
        }
        let _ = write!(out, "{} * {}", coeff.unsigned_abs(), term);
    }
}

/// Canonical text form; parsing the output reproduces the model.
pub fn pretty_model(model: &ModelFile) -> String {
    let mut out = String::new();
    let _ = write!(out, "signature: ");
    for (i, (name, arity)) in model.signature.symbols().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}/{}", name, arity);
    }
    out.push_str(";\n");
    for (name, net) in &model.nets {
        let _ = writeln!(out, "net {} {{", name);
        let _ = writeln!(out, "  places: {};", net.structure.places().join(", "));
        for t in net.structure.transitions() {
            let _ = writeln!(out, "  transition {} {{", t.name());
            for (label, vec) in [("in", t.consume()), ("out", t.produce())] {
                let arcs: Vec<String> = vec
                    .support_places()
                    .map(|place| {
                        let mut s = format!("{} -> ", place);
                        write_poly(&mut s, vec.get(place).expect("supported"));
                        s
                    })
                    .collect();
                if label == "in" || !arcs.is_empty() {
                    let _ = writeln!(out, "    {}: {};", label, arcs.join(", "));
                }
            }
            out.push_str("  }\n");
        }
        for (mname, m) in &net.markings {
            let entries: Vec<String> = m
                .support_places()
                .map(|place| {
                    let mut s = format!("{}: ", place);
                    write_poly(&mut s, m.get(place).expect("supported"));
                    s
                })
                .collect();
            let _ = writeln!(out, "  marking {} {{ {} }}", mname, entries.join(", "));
        }
        out.push_str("}\n");
    }
    for (name, eq) in &model.equations {
        let group = match eq.group() {
            CyclicGroup::Int => "Z".to_string(),
            CyclicGroup::Mod(n) => format!("Z mod {}", n),
        };
        let entries: Vec<String> = eq
            .vector()
            .support_places()
            .map(|place| {
                let (term, gamma) = eq.monomial(place).expect("supported");
                format!("{}: {} * {}", place, gamma.value(), term)
            })
            .collect();
        let _ = writeln!(out, "equation {} group {} {{ {} }}", name, group, entries.join(", "));
    }
    for (name, m) in &model.machines {
        let _ = writeln!(out, "minsky {} {{", name);
        let _ = writeln!(out, "  registers: {};", m.registers());
        for (i, instr) in m.instructions().iter().enumerate() {
            let body = match instr {
                Instruction::Inc { register, target } => {
                    format!("inc {} -> {}", register, target)
                }
                Instruction::Jz {
                    register,
                    on_positive,
                    on_zero,
                } => format!("jz {} ? {} : {}", register, on_positive, on_zero),
                Instruction::Halt => "halt".to_string(),
            };
            let _ = writeln!(out, "  {}: {};", i + 1, body);
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
net example1 {
  signature: f/1, g/1, c/0;
  places: A, B, C, D, E;
  transition t { in: A -> 1 * g(W), B -> 1 * f(Y), C -> 1 * W, D -> 2 * Z;
                 out: E -> 1 * f(W); }
  marking m0 { B: 1 * c, D: 3 * g(c) }
}
equation E1 group Z { A: 4 * f(x), B: 3 * g(x), C: -5 * f(g(x)), D: -1 * x }
equation E2 group Z mod 7 { A: 3 * c, D: 2 * x }
minsky M { registers: 2; 1: inc 1 -> 2; 2: jz 1 ? 3 : 2; 3: halt; }
"#;

    #[test]
    fn parses_the_reference_model() {
        let model = parse_model(EXAMPLE).unwrap();
        let net = &model.nets["example1"];
        assert_eq!(net.structure.places().len(), 5);
        assert_eq!(net.structure.transitions().len(), 1);
        let t = net.structure.transition("t").unwrap();
        assert_eq!(
            t.consume().get("D").unwrap().coeff(&Term::var("Z")),
            2
        );
        assert_eq!(net.markings["m0"].get("D").unwrap().total(), 3);
        let e1 = &model.equations["E1"];
        assert_eq!(e1.group(), CyclicGroup::Int);
        assert_eq!(e1.vector().places().len(), 5);
        let (kappa, gamma) = e1.monomial("C").unwrap();
        assert_eq!(
            kappa,
            &Term::app("f", vec![Term::app("g", vec![Term::var("x")])])
        );
        assert_eq!(gamma.value(), -5);
        assert_eq!(model.equations["E2"].group(), CyclicGroup::Mod(7));
        assert_eq!(model.machines["M"].len(), 3);
    }

    #[test]
    fn pretty_print_round_trips() {
        let model = parse_model(EXAMPLE).unwrap();
        let text = pretty_model(&model);
        let reparsed = parse_model(&text).unwrap();
        assert_eq!(pretty_model(&reparsed), text);
        assert_eq!(reparsed.equations["E1"], model.equations["E1"]);
        assert_eq!(
            reparsed.nets["example1"].structure.transitions(),
            model.nets["example1"].structure.transitions()
        );
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_model("net x { signature: f/1; places: A; } f(X,").is_err());
        let unknown_symbol = parse_model(
            "net x { signature: g/1, c/0; places: A; }\nequation E group Z { A: 4 * f(x) }",
        )
        .unwrap_err();
        assert!(unknown_symbol.message.contains("unknown symbol `f`"));
        let arity = parse_model(
            "net x { signature: f/1, c/0; places: A; }\nequation E group Z { A: 1 * f(c, c) }",
        )
        .unwrap_err();
        assert!(arity.message.contains("arity"));
        let place = parse_model(
            "net x { signature: f/1, c/0; places: A; }\nequation E group Z { Q: 1 * f(c) }",
        )
        .unwrap_err();
        assert!(place.message.contains("unknown place `Q`"));
    }

    #[test]
    fn rejects_inhomogeneous_equations() {
        let err = parse_model(
            "signature: f/1, c/0;\nequation E group Z { A: 1 * f(x) } = 1 * c",
        )
        .unwrap_err();
        assert!(err.message.contains("inhomogeneous"));
    }

    #[test]
    fn rejects_reserved_variable_names() {
        // '#' starts a comment, so reserved names cannot even be written;
        // the explicit guard covers programmatic paths.
        assert!(is_reserved_var("#0"));
        assert!(is_reserved_var("%1"));
    }

    #[test]
    fn parses_firing_steps() {
        let sig = Signature::new(vec![("f".into(), 1), ("c".into(), 0)]).unwrap();
        let (name, sigma) = parse_step("t(X = f(c), Y = c)", &sig).unwrap();
        assert_eq!(name, "t");
        assert_eq!(sigma.get("X"), Some(&Term::app("f", vec![Term::constant("c")])));
        let (name, sigma) = parse_step("t", &sig).unwrap();
        assert_eq!(name, "t");
        assert!(sigma.is_empty());
        assert!(parse_step("t(X = f(c)) extra", &sig).is_err());
    }

    #[test]
    fn reports_error_locations() {
        let err = parse_model("net x {\n  places A;\n}").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("expected"));
    }
}
