//! Text formats shared by the CLI and the function files.
//!
//! Rationals are `p/q` with an optional sign (`inf` / `-inf` for the
//! infinities). Spaces are `interval`, `counting`, `zero`, or
//! `product(A,B)`. Cells are half-open intervals `[p, q)`, identifier sets
//! `{a,b}`, and rectangles `A x B`. A function file holds one expression per
//! line:
//!
//! ```text
//! space interval
//! step { [0/1,2/1): 2/1, [1/1,3/1): -1/1 }
//! set { [0/1,1/1), [2/1,3/1) }
//! seq chi_prefix(0/1, ratio(1/1))
//! tail constant
//! ```
//!
//! `seq` lines define step-function streams from a fixed template set;
//! explicit `step` lines followed by a `tail` line give a finite table with
//! a tail rule. Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::space::{Cell, MeasureSpace};
use crate::step::StepFunction;
use crate::stream::Stream;

/// Closed-form rational sequences used inside stream templates.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    /// c
    Const(Rational),
    /// c0 + c1 * n
    Linear(Rational, Rational),
    /// c * n / (n + 1)
    Ratio(Rational),
    /// c / (n + 1)
    InvLinear(Rational),
    /// c * r^n
    Geom(Rational, Rational),
    /// c * (1 + r + ... + r^n)
    GeomSum(Rational, Rational),
}

impl Formula {
    pub fn eval(&self, n: usize) -> Rational {
        let n_rat = Rational::from(n as i64);
        match self {
            Formula::Const(c) => c.clone(),
            Formula::Linear(c0, c1) => c0 + &(c1 * &n_rat),
            Formula::Ratio(c) => c * &(&n_rat / &Rational::from(n as i64 + 1)),
            Formula::InvLinear(c) => c / &Rational::from(n as i64 + 1),
            Formula::Geom(c, r) => c * &r.pow(n as u32),
            Formula::GeomSum(c, r) => {
                let mut sum = Rational::zero();
                let mut term = Rational::one();
                for _ in 0..=n {
                    sum += &term;
                    term = &term * r;
                }
                c * &sum
            }
        }
    }
}

/// Interval step-function stream templates.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// chi over [lo, hi(n)); empty whenever hi(n) <= lo.
    ChiPrefix { lo: Rational, hi: Formula },
    /// chi over [lo(n), hi(n)).
    ChiWindow { lo: Formula, hi: Formula },
    /// scale(n) * chi over [lo(n), hi(n)).
    ScaleChi {
        scale: Formula,
        lo: Formula,
        hi: Formula,
    },
}

impl Generator {
    /// The n-th step on the interval line.
    pub fn step(&self, n: usize) -> Result<StepFunction> {
        let (scale, lo, hi) = match self {
            Generator::ChiPrefix { lo, hi } => (Rational::one(), lo.clone(), hi.eval(n)),
            Generator::ChiWindow { lo, hi } => (Rational::one(), lo.eval(n), hi.eval(n)),
            Generator::ScaleChi { scale, lo, hi } => (scale.eval(n), lo.eval(n), hi.eval(n)),
        };
        let hi = hi.max(lo.clone());
        StepFunction::from_terms(
            MeasureSpace::IntervalLine,
            [(Cell::interval(lo, hi), scale)],
        )
    }
}

/// How a sequence file defines its stream.
#[derive(Clone, Debug, PartialEq)]
pub enum SeqDef {
    Template(Generator),
    Table {
        prefix: Vec<StepFunction>,
        tail: Tail,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// Repeat the last table entry forever.
    Constant,
    Template(Generator),
}

impl SeqDef {
    /// Materializes the definition as a memoized stream.
    pub fn stream(&self) -> Stream<Result<StepFunction>> {
        match self.clone() {
            SeqDef::Template(gen) => Stream::new(move |n| gen.step(n)),
            SeqDef::Table { prefix, tail } => Stream::new(move |n| {
                if n < prefix.len() {
                    Ok(prefix[n].clone())
                } else {
                    match &tail {
                        Tail::Constant => prefix.last().cloned().ok_or_else(|| {
                            Error::parse("empty table with a constant tail")
                        }),
                        Tail::Template(gen) => gen.step(n),
                    }
                }
            }),
        }
    }
}

/// Parsed contents of a function file.
#[derive(Clone, Debug)]
pub struct FunctionFile {
    pub space: MeasureSpace,
    pub steps: Vec<StepFunction>,
    pub sets: Vec<Vec<Cell>>,
    pub seq: Option<SeqDef>,
}

pub fn parse_space(s: &str) -> Result<MeasureSpace> {
    let s = s.trim();
    match s {
        "interval" => Ok(MeasureSpace::IntervalLine),
        "counting" => Ok(MeasureSpace::Counting),
        "zero" => Ok(MeasureSpace::Zero),
        _ => {
            let inner = s
                .strip_prefix("product(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::parse(format!("unknown space {s:?}")))?;
            let parts = split_top_level(inner, ',');
            let [a, b] = parts.as_slice() else {
                return Err(Error::parse(format!("product needs two factors in {s:?}")));
            };
            Ok(MeasureSpace::product(parse_space(a)?, parse_space(b)?))
        }
    }
}

pub fn parse_cell(s: &str) -> Result<Cell> {
    let s = s.trim();
    // rectangles split on a top-level ` x `, right-associatively
    if let Some((left, right)) = split_once_top_level(s, " x ") {
        return Ok(Cell::rect(parse_cell(left)?, parse_cell(right)?));
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        return parse_cell(inner);
    }
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(')')) {
        let parts = split_top_level(inner, ',');
        if parts.len() != 2 {
            return Err(Error::parse(format!("interval needs two endpoints: {s:?}")));
        }
        let lo: Rational = parts[0].parse()?;
        let hi: Rational = parts[1].parse()?;
        if lo > hi {
            return Err(Error::parse(format!("interval endpoints out of order: {s:?}")));
        }
        return Ok(Cell::interval(lo, hi));
    }
    if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let ids: Vec<String> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            split_top_level(inner, ',')
                .into_iter()
                .map(|id| id.trim().to_string())
                .collect()
        };
        if ids.iter().any(|id| id.is_empty()) {
            return Err(Error::parse(format!("empty identifier in {s:?}")));
        }
        return Ok(Cell::finite_set(ids));
    }
    Err(Error::parse(format!("unrecognized cell {s:?}")))
}

/// Parses the body of `step { ... }` into raw (cell, coefficient) terms.
pub fn parse_step_terms(body: &str) -> Result<Vec<(Cell, Rational)>> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    for part in split_top_level(body, ',') {
        let (cell_src, coeff_src) = rsplit_once_top_level(part, ':')
            .ok_or_else(|| Error::parse(format!("term needs `cell: coeff`: {part:?}")))?;
        terms.push((parse_cell(cell_src)?, coeff_src.trim().parse()?));
    }
    Ok(terms)
}

pub fn parse_step_line(line: &str, space: &MeasureSpace) -> Result<StepFunction> {
    let body = brace_body(line, "step")?;
    StepFunction::from_terms(space.clone(), parse_step_terms(&body)?)
}

/// Set lines mirror the step format with coefficients restricted to 1;
/// the coefficient may be omitted: `set { [0,1), {a}: 1/1 }`.
pub fn parse_set_line(line: &str) -> Result<Vec<Cell>> {
    let body = brace_body(line, "set")?;
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top_level(&body, ',')
        .into_iter()
        .map(|part| match rsplit_once_top_level(part, ':') {
            None => parse_cell(part),
            Some((cell_src, coeff_src)) => {
                let coeff: Rational = coeff_src.trim().parse()?;
                if coeff != Rational::one() {
                    return Err(Error::parse(format!(
                        "set coefficients are restricted to 1, got {coeff}"
                    )));
                }
                parse_cell(cell_src)
            }
        })
        .collect()
}

fn parse_formula(s: &str) -> Result<Formula> {
    let (name, args) = call_parts(s)?;
    let args: Vec<Rational> = args
        .iter()
        .map(|a| a.parse())
        .collect::<Result<Vec<_>>>()?;
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::parse(format!("{name} takes {n} argument(s): {s:?}")))
        }
    };
    match name {
        "const" => {
            arity(1)?;
            Ok(Formula::Const(args[0].clone()))
        }
        "linear" => {
            arity(2)?;
            Ok(Formula::Linear(args[0].clone(), args[1].clone()))
        }
        "ratio" => {
            arity(1)?;
            Ok(Formula::Ratio(args[0].clone()))
        }
        "invlinear" => {
            arity(1)?;
            Ok(Formula::InvLinear(args[0].clone()))
        }
        "geom" => {
            arity(2)?;
            Ok(Formula::Geom(args[0].clone(), args[1].clone()))
        }
        "geomsum" => {
            arity(2)?;
            Ok(Formula::GeomSum(args[0].clone(), args[1].clone()))
        }
        _ => Err(Error::parse(format!("unknown formula {name:?}"))),
    }
}

pub fn parse_generator(s: &str) -> Result<Generator> {
    let (name, args) = call_parts(s)?;
    match (name, args.len()) {
        ("chi_prefix", 2) => Ok(Generator::ChiPrefix {
            lo: args[0].parse()?,
            hi: parse_formula(args[1])?,
        }),
        ("chi_window", 2) => Ok(Generator::ChiWindow {
            lo: parse_formula(args[0])?,
            hi: parse_formula(args[1])?,
        }),
        ("scale_chi", 3) => Ok(Generator::ScaleChi {
            scale: parse_formula(args[0])?,
            lo: parse_formula(args[1])?,
            hi: parse_formula(args[2])?,
        }),
        _ => Err(Error::parse(format!("unknown generator {s:?}"))),
    }
}

/// Parses a whole function file.
pub fn parse_function_file(text: &str) -> Result<FunctionFile> {
    let mut space: Option<MeasureSpace> = None;
    let mut steps = Vec::new();
    let mut sets = Vec::new();
    let mut seq: Option<SeqDef> = None;
    let mut tail: Option<Tail> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = strip_comment(raw_line).trim().to_string();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::parse(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("space ") {
            if space.is_some() {
                return Err(fail("duplicate space line".into()));
            }
            space = Some(parse_space(rest)?);
        } else if line.starts_with("step") {
            let sp = space
                .as_ref()
                .ok_or_else(|| fail("step before any space line".into()))?;
            steps.push(parse_step_line(&line, sp)?);
        } else if line.starts_with("set") {
            sets.push(parse_set_line(&line)?);
        } else if let Some(rest) = line.strip_prefix("seq ") {
            if seq.is_some() {
                return Err(fail("duplicate seq line".into()));
            }
            seq = Some(SeqDef::Template(parse_generator(rest)?));
        } else if let Some(rest) = line.strip_prefix("tail ") {
            let rest = rest.trim();
            tail = Some(if rest == "constant" {
                Tail::Constant
            } else {
                Tail::Template(parse_generator(rest)?)
            });
        } else {
            return Err(fail(format!("unrecognized line {line:?}")));
        }
    }

    let space = space.ok_or_else(|| Error::parse("file has no space line"))?;
    for cells in &sets {
        for c in cells {
            space.check_cell(c)?;
        }
    }
    if let Some(t) = tail {
        if seq.is_some() {
            return Err(Error::parse("tail line conflicts with a seq template"));
        }
        if steps.is_empty() {
            return Err(Error::parse("tail line needs preceding step lines"));
        }
        seq = Some(SeqDef::Table {
            prefix: steps.clone(),
            tail: t,
        });
    }
    Ok(FunctionFile {
        space,
        steps,
        sets,
        seq,
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn brace_body(line: &str, keyword: &str) -> Result<String> {
    let rest = line
        .trim()
        .strip_prefix(keyword)
        .ok_or_else(|| Error::parse(format!("expected {keyword} line: {line:?}")))?
        .trim();
    let body = rest
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::parse(format!("{keyword} body needs braces: {line:?}")))?;
    Ok(body.to_string())
}

fn call_parts(s: &str) -> Result<(&str, Vec<&str>)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| Error::parse(format!("expected a call form: {s:?}")))?;
    let inner = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::parse(format!("unbalanced call form: {s:?}")))?;
    Ok((s[..open].trim(), split_top_level(inner, ',')))
}

/// Splits on a separator character at bracket depth zero.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn rsplit_once_top_level(s: &str, sep: char) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    let mut found = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => found = Some(i),
            _ => {}
        }
    }
    found.map(|i| (&s[..i], &s[i + 1..]))
}

/// Finds the first top-level occurrence of a multi-character separator.
fn split_once_top_level<'a>(s: &'a str, sep: &str) -> Option<(&'a str, &'a str)> {
    let bytes = s.as_bytes();
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'[' | b'{' | b'(' => depth += 1,
            b']' | b'}' | b')' => depth = depth.saturating_sub(1),
            _ => {
                if depth == 0 && s[i..].starts_with(sep) {
                    return Some((&s[..i], &s[i + sep.len()..]));
                }
            }
        }
        i += 1;
    }
    None
}
