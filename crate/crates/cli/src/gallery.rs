//! Reproducible demonstrations of the classical boundary cases.
//!
//! Every entry re-derives its claims from the library on each run and fails
//! loudly if a claim breaks. Output is deterministic: repeated runs are
//! byte-identical. Each numeric claim line carries a marker for how it is
//! established: `[exact]` (pinned by rational arithmetic), `[derived]`
//! (follows from exact bounds), `[sampled]` (checked on a finite probe
//! grid), or `[documented]` (a statement the construction illustrates but
//! cannot decide).

use riesz_core::error::{Error, Result};
use riesz_core::monotone::{EvalParams, MonotoneLimit};
use riesz_core::numeric::{ExtendedRational, Finite, Rational};
use riesz_core::product::{counting_counterexample, inner_integral, transpose};
use riesz_core::signed::{beppo_levi, SignedLimit};
use riesz_core::space::{Cell, Ident, MeasureSpace};
use riesz_core::step::StepFunction;
use riesz_core::MeasurableSet;

#[derive(Clone, Debug)]
pub struct GalleryReport {
    pub id: String,
    pub lines: Vec<String>,
    pub pass: bool,
}

impl GalleryReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("gallery entry: {}\n", self.id));
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(if self.pass { "status: pass\n" } else { "status: FAIL\n" });
        out
    }
}

/// Identifiers of the available entries, in display order.
pub fn entry_ids() -> Vec<&'static str> {
    vec![
        "weir-set",
        "sign-not-in-r2",
        "negative-tails",
        "mu-alpha",
        "diagonal",
    ]
}

pub struct GalleryParams {
    pub depth: usize,
    pub alpha: ExtendedRational,
    pub window: Vec<Ident>,
}

impl Default for GalleryParams {
    fn default() -> Self {
        GalleryParams {
            depth: 20,
            alpha: Finite(Rational::one()),
            window: vec!["x1".into(), "x2".into(), "x3".into()],
        }
    }
}

pub fn run_entry(id: &str, params: &GalleryParams) -> Result<GalleryReport> {
    match id {
        "weir-set" => weir_set(params.depth),
        "sign-not-in-r2" => sign_not_integrable(params.depth.max(4)),
        "negative-tails" => negative_tails(params.depth.max(4)),
        "mu-alpha" => mu_alpha(&params.alpha),
        "diagonal" => diagonal(&params.window),
        other => Err(Error::Precondition(format!(
            "unknown gallery id {other:?}; known: {}",
            entry_ids().join(", ")
        ))),
    }
}

/// Rationals in (0,1) enumerated by denominator, then numerator, in lowest
/// terms: 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ... Deterministic by construction.
pub fn rational_enumeration(count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut q: i64 = 2;
    while out.len() < count {
        for p in 1..q {
            if gcd(p, q) == 1 {
                out.push(Rational::new(p, q));
                if out.len() == count {
                    break;
                }
            }
        }
        q += 1;
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// An open set containing every rational in (0,1) whose measure is trapped
/// strictly between 0 and 1, so its complement in (0,1) is a nonnegative
/// certified difference admitting no positive step minorant.
fn weir_set(depth: usize) -> Result<GalleryReport> {
    let depth = depth.max(1);
    let line = MeasureSpace::IntervalLine;
    let mut lines = Vec::new();
    let mut pass = true;

    lines.push("enumeration: rationals in (0,1) by denominator, then numerator".into());
    let centers = rational_enumeration(depth);
    // n-th interval (1-indexed): (r_n - 2^-(n+3), r_n + 2^-(n+3)), clipped
    let clipped: Vec<Cell> = centers
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let h = Rational::dyadic(-(i as i64) - 4);
            let lo = (r - &h).max(Rational::zero());
            let hi = (r + &h).min(Rational::one());
            Cell::interval(lo, hi)
        })
        .collect();

    let first_measure = line.measure(&clipped[0])?;
    lines.push(format!(
        "lower bound: mu(S) >= {first_measure} from the first clipped interval [exact]"
    ));
    pass &= first_measure.is_positive();

    // prefix-union measures are exact and sandwiched by the cover totals
    let set = MeasurableSet::from_cells(line.clone(), clipped.clone())?;
    let union_measure = set
        .as_finite_indicator()
        .expect("finite union")
        .integral();
    let mut cover_total = Rational::zero();
    for c in &clipped {
        cover_total += &line.measure(c)?;
    }
    let quarter = Rational::new(1, 4);
    lines.push(format!(
        "prefix union at depth {depth}: mu = {union_measure} [exact]"
    ));
    lines.push(format!(
        "cover partial total: {cover_total} <= 1/4 [exact]"
    ));
    pass &= first_measure <= union_measure;
    pass &= union_measure <= cover_total;
    pass &= cover_total <= quarter;
    lines.push(format!(
        "conclusion: 0 < {first_measure} <= mu(S) <= 1/4 < 1 [derived]"
    ));

    // complement demo: chi(0,1) - chi_S is nonnegative with positive
    // integral bound, yet every candidate step minorant dies on rationals
    let complement_lower = Rational::one() - &cover_total;
    lines.push(format!(
        "integral of chi(0,1) - chi_S is at least {complement_lower} > 0 [derived]"
    ));
    pass &= complement_lower.is_positive();

    let probe_cells = 4;
    let mut all_hit = true;
    for i in 0..probe_cells {
        let lo = Rational::new(i, probe_cells);
        let hi = Rational::new(i + 1, probe_cells);
        let hit = centers.iter().position(|r| lo <= *r && *r < hi);
        match hit {
            Some(n) => lines.push(format!(
                "probe cell [{lo}, {hi}) meets enumerated rational {} (index {}) [sampled]",
                centers[n],
                n + 1
            )),
            None => {
                all_hit = false;
                lines.push(format!(
                    "probe cell [{lo}, {hi}) met no enumerated rational at this depth [sampled]"
                ));
            }
        }
    }
    if all_hit {
        lines.push(
            "every probe cell meets S, so a step minorant of chi(0,1) - chi_S \
             is <= 0 on each probe cell; the difference stays outside the \
             monotone class [sampled]"
                .into(),
        );
    }
    pass &= all_hit || depth < 9;

    Ok(GalleryReport {
        id: "weir-set".into(),
        lines,
        pass,
    })
}

/// f_n = -chi(-inf,0) + chi(0,n): every term integrates to -inf, and the
/// monotone-convergence harness rejects the sequence; the pointwise limit is
/// the sign function, which is not a certified difference.
fn sign_not_integrable(window: usize) -> Result<GalleryReport> {
    let params = EvalParams {
        budget: 32,
        window: 4,
        infinity_threshold: Rational::from(10),
    };
    let mut lines = Vec::new();
    let mut pass = true;

    fn term(n: usize, params: &EvalParams) -> Result<SignedLimit> {
        let pos = MonotoneLimit::from_step(StepFunction::from_terms(
            MeasureSpace::IntervalLine,
            [(
                Cell::interval(Rational::zero(), Rational::from(n as i64)),
                Rational::one(),
            )],
        )?);
        let neg = MonotoneLimit::from_fn(MeasureSpace::IntervalLine, |k| {
            StepFunction::from_terms(
                MeasureSpace::IntervalLine,
                [(
                    Cell::interval(Rational::from(-(k as i64)), Rational::zero()),
                    Rational::one(),
                )],
            )
            .expect("interval cell")
        });
        let pos_est = pos.estimate(params)?;
        let neg_est = neg.estimate(params)?;
        SignedLimit::new(pos, neg, pos_est, neg_est)
    }

    for n in 0..window.min(4) {
        let f = term(n, &params)?;
        lines.push(format!(
            "term {n}: positive side integrates to {} [exact]; negative side \
             exceeded threshold {} [exact]; integral -inf [derived]",
            Rational::from(n as i64),
            params.infinity_threshold
        ));
        pass &= !f.neg_estimate().is_certified_finite();
    }

    let params_inner = params.clone();
    match beppo_levi(move |n| term(n, &params_inner), window, None, &params) {
        Err(Error::AllTermsMinusInfinite) => {
            lines.push("harness: rejected, every term integrates to -inf [exact]".into());
            lines.push(
                "the pointwise limit is the sign function; with both tails \
                 infinite it admits no certified difference [documented]"
                    .into(),
            );
        }
        other => {
            pass = false;
            lines.push(format!("harness unexpectedly returned {other:?}"));
        }
    }

    Ok(GalleryReport {
        id: "sign-not-in-r2".into(),
        lines,
        pass,
    })
}

/// f_n = -chi(n, inf): the pointwise limit is 0, which is integrable with
/// integral 0, yet the ladder of term integrals sits at -inf throughout, so
/// the convergence identity fails and the harness rejects the sequence.
fn negative_tails(window: usize) -> Result<GalleryReport> {
    let params = EvalParams {
        budget: 32,
        window: 4,
        infinity_threshold: Rational::from(10),
    };
    let mut lines = Vec::new();
    let mut pass = true;

    let term = |n: usize, params: &EvalParams| -> Result<SignedLimit> {
        let pos = MonotoneLimit::zero(MeasureSpace::IntervalLine);
        let neg = MonotoneLimit::from_fn(MeasureSpace::IntervalLine, move |k| {
            StepFunction::from_terms(
                MeasureSpace::IntervalLine,
                [(
                    Cell::interval(
                        Rational::from(n as i64),
                        Rational::from(n as i64 + k as i64),
                    ),
                    Rational::one(),
                )],
            )
            .expect("interval cell")
        });
        let pos_est = pos.estimate(params)?;
        let neg_est = neg.estimate(params)?;
        SignedLimit::new(pos, neg, pos_est, neg_est)
    };

    for n in 0..window.min(3) {
        let f = term(n, &params)?;
        pass &= !f.neg_estimate().is_certified_finite();
        lines.push(format!(
            "term {n}: negative tail mass past {} exceeds any threshold; \
             integral -inf [exact]",
            n
        ));
    }
    let params_inner = params.clone();
    match beppo_levi(
        move |n| term(n, &params_inner),
        window,
        None,
        &params,
    ) {
        Err(Error::AllTermsMinusInfinite) => {
            lines.push("harness: rejected, every term integrates to -inf [exact]".into());
            lines.push(
                "the pointwise limit is 0, an integrable function with \
                 integral 0; the ladder cannot climb to it from -inf, which \
                 is exactly why a term above -inf is required [documented]"
                    .into(),
            );
        }
        other => {
            pass = false;
            lines.push(format!("harness unexpectedly returned {other:?}"));
        }
    }

    Ok(GalleryReport {
        id: "negative-tails".into(),
        lines,
        pass,
    })
}

/// Symbolic countable / co-countable sets over an uncountable ground space.
#[derive(Clone, Debug, PartialEq)]
enum SymbolicSet {
    /// An explicitly listed countable set (finite list stands for the
    /// pattern; only its countability matters).
    Countable(Vec<Ident>),
    /// Complement of an explicitly listed countable set.
    CoCountable(Vec<Ident>),
}

fn mu_alpha_measure(alpha: &ExtendedRational, s: &SymbolicSet) -> ExtendedRational {
    match s {
        SymbolicSet::Countable(_) => Finite(Rational::zero()),
        SymbolicSet::CoCountable(_) => alpha.clone(),
    }
}

/// The zero measure on finite subsets of an uncountable ground set extends
/// to the countable/co-countable sigma-algebra in many ways: mu_alpha
/// assigns alpha to every co-countable set, and each alpha works.
fn mu_alpha(alpha: &ExtendedRational) -> Result<GalleryReport> {
    if matches!(alpha, ExtendedRational::MinusInf)
        || matches!(alpha, Finite(r) if r.is_negative())
    {
        return Err(Error::Precondition(
            "the extension parameter must be nonnegative".into(),
        ));
    }
    let mut lines = Vec::new();
    let mut pass = true;

    lines.push(format!("extension parameter alpha = {alpha}"));
    lines.push(
        "ground space: identifiers with no global enumeration; cells are \
         finite subsets, base measure zero [documented]"
            .into(),
    );

    // agreement with the base measure on cells
    let finite_sets = [
        SymbolicSet::Countable(vec!["a".into()]),
        SymbolicSet::Countable(vec!["a".into(), "b".into(), "c".into()]),
        SymbolicSet::Countable(Vec::new()),
    ];
    for s in &finite_sets {
        let v = mu_alpha_measure(alpha, s);
        pass &= v == Finite(Rational::zero());
        if let SymbolicSet::Countable(ids) = s {
            lines.push(format!(
                "mu_alpha({{{}}}) = 0 agrees with the base measure [exact]",
                ids.join(",")
            ));
        }
    }

    // a co-countable representative separates the extensions
    let co = SymbolicSet::CoCountable(vec!["x0".into()]);
    let v = mu_alpha_measure(alpha, &co);
    lines.push(format!(
        "mu_alpha(complement of {{x0}}) = {v}, while the zero extension \
         assigns 0 [exact]"
    ));
    if *alpha != Finite(Rational::zero()) {
        pass &= v != Finite(Rational::zero());
        lines.push(
            "the two extensions differ on a co-countable set: the extension \
             of the base measure past the sigma-ring is not unique [derived]"
                .into(),
        );
    } else {
        lines.push("alpha = 0 reproduces the zero extension [exact]".into());
    }

    // additivity spot checks within the sigma-algebra
    let disjoint_countables = (
        SymbolicSet::Countable(vec!["a".into()]),
        SymbolicSet::Countable(vec!["b".into()]),
    );
    let merged = SymbolicSet::Countable(vec!["a".into(), "b".into()]);
    pass &= mu_alpha_measure(alpha, &disjoint_countables.0)
        .add(&mu_alpha_measure(alpha, &disjoint_countables.1))?
        == mu_alpha_measure(alpha, &merged);
    lines.push("additivity on disjoint countable pieces holds [exact]".into());

    let co_rest = SymbolicSet::CoCountable(vec!["a".into(), "b".into()]);
    let whole_minus = SymbolicSet::CoCountable(vec!["a".into()]);
    let lhs = mu_alpha_measure(alpha, &SymbolicSet::Countable(vec!["b".into()]))
        .add(&mu_alpha_measure(alpha, &co_rest))?;
    pass &= lhs == mu_alpha_measure(alpha, &whole_minus);
    lines.push(
        "additivity when a countable piece joins a co-countable one holds \
         [exact]"
            .into(),
    );

    Ok(GalleryReport {
        id: "mu-alpha".into(),
        lines,
        pass,
    })
}

/// The diagonal of an uncountable square under zero x counting: iterated
/// integration gives 0 exactly on every window, while the full diagonal is
/// only locally measurable and the would-be double integral has no bounded
/// step ladder.
fn diagonal(window: &[Ident]) -> Result<GalleryReport> {
    let space = MeasureSpace::product(MeasureSpace::Zero, MeasureSpace::Counting);
    let mut lines = Vec::new();
    let mut pass = true;

    let raw: Vec<(Cell, Rational)> = window
        .iter()
        .map(|x| {
            (
                Cell::rect(
                    Cell::finite_set([x.clone()]),
                    Cell::finite_set([x.clone()]),
                ),
                Rational::one(),
            )
        })
        .collect();
    for (cell, _) in &raw {
        let m = space.measure(cell)?;
        pass &= m.is_zero();
        lines.push(format!("window cell {cell}: product measure {m} [exact]"));
    }
    let f = StepFunction::from_terms(space.clone(), raw)?;
    lines.push(format!(
        "windowed double integral: {} [exact]",
        f.integral()
    ));
    pass &= f.integral().is_zero();

    // iterated: inner over the zero-measure factor, then counting
    let inner = inner_integral(&transpose(&f)?)?;
    lines.push(format!(
        "iterated (zero measure first, then counting): {} [exact]",
        inner.integral()
    ));
    pass &= inner.integral().is_zero();

    lines.push(format!(
        "window of {} points: partials of the windowed double integral \
         scale as 0 * window and never leave 0 [exact]",
        window.len()
    ));
    lines.push(
        "the full diagonal is locally measurable only: restricted to any \
         cell it is a step function, but no countable step ladder reaches \
         it, and the locally-measurable extension would assign the double \
         integral inf while iterated integration gives 0; that extension is \
         demonstrated here, not offered as an operation [documented]"
            .into(),
    );

    Ok(GalleryReport {
        id: "diagonal".into(),
        lines,
        pass,
    })
}

/// The counting-measure failure of iterated-integral symmetry as a gallery
/// rendering (the machinery lives in the product module).
pub fn render_counting_counterexample(window: i64) -> Result<String> {
    let report = counting_counterexample(window)?;
    let mut out = String::new();
    out.push_str(&format!(
        "counting counterexample on the integer window [-{w}, {w}]\n",
        w = report.window
    ));
    out.push_str(&format!(
        "iterated (x then y): {} [exact]\n",
        report.iterated_left_then_right
    ));
    out.push_str(&format!(
        "iterated (y then x): {} [exact]\n",
        report.iterated_right_then_left
    ));
    out.push_str(&format!(
        "positive part mass: {} [exact]\n",
        report.positive_part
    ));
    out.push_str(&format!(
        "negative part mass: {} [exact]\n",
        report.negative_part
    ));
    out.push_str(&format!(
        "combined mass {} grows with the window, certifying that the double \
         integral is an undefined difference of infinities while both \
         iterated integrals vanish [derived]\n",
        report.combined_mass
    ));
    Ok(out)
}
