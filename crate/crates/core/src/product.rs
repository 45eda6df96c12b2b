//! Product spaces, sections, and the exact Fubini evaluator.
//!
//! Canonical product step functions group rectangles by their left factor,
//! so the inner integral over the right space materializes directly as a
//! step function on the left space. Double and iterated integrals are then
//! all evaluated by the same step-integration formula, and their equality is
//! asserted with zero tolerance: for step functions a mismatch is an
//! implementation bug, never a tolerance issue.

use crate::error::{Error, Result};
use crate::monotone::{EvalParams, IntegralValue, MonotoneLimit};
use crate::numeric::Rational;
use crate::signed::SignedLimit;
use crate::space::{Cell, MeasureSpace, NullCover, Point};
use crate::step::StepFunction;

/// Exact section of a product step function at a left-space point: the sum
/// over rectangles whose left factor contains the point of the right parts.
pub fn section(phi: &StepFunction, x: &Point) -> Result<StepFunction> {
    let (_, right_space) = factor_spaces(phi.space())?;
    let mut raw = Vec::new();
    for (cell, coeff) in phi.terms() {
        let Cell::Rect(a, b) = cell else {
            return Err(Error::precondition("term is not a rectangle"));
        };
        if a.contains_point(x) {
            raw.push(((**b).clone(), coeff.clone()));
        }
    }
    StepFunction::from_terms(right_space.clone(), raw)
}

/// The inner integral as a function of the left coordinate: exact, and a
/// bona fide step function on the left space.
pub fn inner_integral(phi: &StepFunction) -> Result<StepFunction> {
    let (left_space, right_space) = factor_spaces(phi.space())?;
    let mut raw = Vec::new();
    for (cell, coeff) in phi.terms() {
        let Cell::Rect(a, b) = cell else {
            return Err(Error::precondition("term is not a rectangle"));
        };
        raw.push(((**a).clone(), coeff * &right_space.measure(b)?));
    }
    StepFunction::from_terms(left_space.clone(), raw)
}

/// Swaps the two factors of every rectangle.
pub fn transpose(phi: &StepFunction) -> Result<StepFunction> {
    let (left_space, right_space) = factor_spaces(phi.space())?;
    let swapped = MeasureSpace::product(right_space.clone(), left_space.clone());
    let mut raw = Vec::new();
    for (cell, coeff) in phi.terms() {
        let Cell::Rect(a, b) = cell else {
            return Err(Error::precondition("term is not a rectangle"));
        };
        raw.push((Cell::rect((**b).clone(), (**a).clone()), coeff.clone()));
    }
    StepFunction::from_terms(swapped, raw)
}

fn factor_spaces(space: &MeasureSpace) -> Result<(&MeasureSpace, &MeasureSpace)> {
    space
        .factors()
        .ok_or_else(|| Error::precondition(format!("{space} is not a product space")))
}

#[derive(Clone, Debug, PartialEq)]
pub enum FubiniVerdict {
    /// All three integrals are exactly equal rationals.
    ExactEqual,
    /// Estimates agree per computed term; limits are evidence, not values.
    EvidenceConsistent,
    /// The double integral is an undefined difference of infinities.
    Undefined,
    /// A documented failure case (iterated orders agree, double undefined).
    CounterexampleDocumented,
}

#[derive(Clone, Debug)]
pub struct FubiniReport {
    pub double: IntegralValue,
    pub iterated_left_then_right: IntegralValue,
    pub iterated_right_then_left: IntegralValue,
    pub verdict: FubiniVerdict,
    /// Per-term ladders (double, iterated lr, iterated rl) for stream-backed
    /// inputs; empty for plain step functions.
    pub ladder: Vec<(Rational, Rational, Rational)>,
}

/// Fubini for a product step function: double and both iterated integrals,
/// all exact, asserted equal with zero tolerance.
pub fn fubini_step(phi: &StepFunction) -> Result<FubiniReport> {
    let double = phi.integral();
    let lr = inner_integral(phi)?.integral();
    let rl = inner_integral(&transpose(phi)?)?.integral();
    if double != lr || double != rl {
        return Err(Error::FubiniMismatch(format!(
            "double {double}, left-first {lr}, right-first {rl}"
        )));
    }
    Ok(FubiniReport {
        double: IntegralValue::Exact(double.clone().into()),
        iterated_left_then_right: IntegralValue::Exact(lr.into()),
        iterated_right_then_left: IntegralValue::Exact(rl.into()),
        verdict: FubiniVerdict::ExactEqual,
        ladder: Vec::new(),
    })
}

/// Fubini for a monotone limit on a product space: every step of the ladder
/// satisfies the exact step-level identity, and the three estimates inherit
/// the stream's stabilization semantics.
pub fn fubini_monotone(
    f: &MonotoneLimit,
    horizon: usize,
    params: &EvalParams,
) -> Result<FubiniReport> {
    let mut ladder = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let phi = f.step_at(n)?;
        // errors out unless the three step-level integrals agree exactly
        fubini_step(&phi)?;
        let v = phi.integral();
        ladder.push((v.clone(), v.clone(), v));
    }
    // the inner integrals form a monotone limit on the left factor
    let f_inner = f.clone();
    let left_space = factor_spaces(f.space())?.0.clone();
    let inner_limit = MonotoneLimit::from_results(left_space, move |n| {
        inner_integral(&f_inner.step_at(n)?)
    });
    let f_transposed = f.clone();
    let right_space = factor_spaces(f.space())?.1.clone();
    let transposed_inner = MonotoneLimit::from_results(right_space, move |n| {
        inner_integral(&transpose(&f_transposed.step_at(n)?)?)
    });

    let double = f.estimate(params)?.value();
    let lr = inner_limit.estimate(params)?.value();
    let rl = transposed_inner.estimate(params)?.value();
    let verdict = if double.is_exact() && lr.is_exact() && rl.is_exact() {
        if double != lr || double != rl {
            return Err(Error::FubiniMismatch(format!(
                "stabilized values disagree: {double:?} vs {lr:?} vs {rl:?}"
            )));
        }
        FubiniVerdict::ExactEqual
    } else {
        FubiniVerdict::EvidenceConsistent
    };
    Ok(FubiniReport {
        double,
        iterated_left_then_right: lr,
        iterated_right_then_left: rl,
        verdict,
        ladder,
    })
}

/// Fubini for a certified difference: the reports of the two sides combine
/// by extended subtraction. A certificate is required, so the combination is
/// defined; `fubini_sides` below serves the deliberately ill-posed demos.
pub fn fubini_signed(
    f: &SignedLimit,
    horizon: usize,
    params: &EvalParams,
) -> Result<FubiniReport> {
    if f.as_step().is_some() {
        // step-backed reduces to the plain step evaluator
        return fubini_step(&f.approximant(0)?);
    }
    fubini_sides(f.pos(), f.neg(), horizon, params)
}

/// Fubini difference report for a raw (possibly uncertified) pair. When both
/// sides claim infinite mass the verdict is `Undefined`.
pub fn fubini_sides(
    pos: &MonotoneLimit,
    neg: &MonotoneLimit,
    horizon: usize,
    params: &EvalParams,
) -> Result<FubiniReport> {
    let pos_report = fubini_monotone(pos, horizon, params)?;
    let neg_report = fubini_monotone(neg, horizon, params)?;
    let mut ladder = Vec::with_capacity(horizon + 1);
    for (p, n) in pos_report.ladder.iter().zip(&neg_report.ladder) {
        ladder.push((&p.0 - &n.0, &p.1 - &n.1, &p.2 - &n.2));
    }
    let combine = |a: &IntegralValue, b: &IntegralValue| -> Option<IntegralValue> {
        let (x, y) = (a.known()?, b.known()?);
        let v = x.sub(y).ok()?;
        Some(if a.is_exact() && b.is_exact() {
            IntegralValue::Exact(v)
        } else {
            IntegralValue::Declared(v)
        })
    };
    let double = combine(&pos_report.double, &neg_report.double);
    let lr = combine(
        &pos_report.iterated_left_then_right,
        &neg_report.iterated_left_then_right,
    );
    let rl = combine(
        &pos_report.iterated_right_then_left,
        &neg_report.iterated_right_then_left,
    );
    let undefined = {
        let both_infinite = |a: &IntegralValue, b: &IntegralValue| {
            matches!(
                (a.known(), b.known()),
                (
                    Some(crate::numeric::PlusInf),
                    Some(crate::numeric::PlusInf)
                )
            )
        };
        both_infinite(&pos_report.double, &neg_report.double)
    };
    let last = ladder.last().cloned();
    let fallback = |l: Option<&Rational>| IntegralValue::Unresolved {
        approx: l.cloned().unwrap_or_else(Rational::zero),
    };
    let (double, lr, rl, verdict) = if undefined {
        (
            fallback(last.as_ref().map(|t| &t.0)),
            lr.unwrap_or_else(|| fallback(last.as_ref().map(|t| &t.1))),
            rl.unwrap_or_else(|| fallback(last.as_ref().map(|t| &t.2))),
            FubiniVerdict::Undefined,
        )
    } else {
        let verdict = match (&double, &lr, &rl) {
            (Some(d), Some(a), Some(b))
                if d.is_exact() && a.is_exact() && b.is_exact() =>
            {
                if d != a || d != b {
                    return Err(Error::FubiniMismatch(format!(
                        "{d:?} vs {a:?} vs {b:?}"
                    )));
                }
                FubiniVerdict::ExactEqual
            }
            _ => FubiniVerdict::EvidenceConsistent,
        };
        (
            double.unwrap_or_else(|| fallback(last.as_ref().map(|t| &t.0))),
            lr.unwrap_or_else(|| fallback(last.as_ref().map(|t| &t.1))),
            rl.unwrap_or_else(|| fallback(last.as_ref().map(|t| &t.2))),
            verdict,
        )
    };
    Ok(FubiniReport {
        double,
        iterated_left_then_right: lr,
        iterated_right_then_left: rl,
        verdict,
        ladder,
    })
}

/// Sectioned null-cover evidence: every sampled left point inherits a cover
/// of its section with summable partial totals.
#[derive(Clone, Debug)]
pub struct SectionCoverEvidence {
    /// (point, epsilon, totals of the sectioned cover prefix).
    pub rows: Vec<(Point, Rational, Vec<Rational>)>,
}

pub fn section_cover_evidence(
    cover: &NullCover,
    samples: &[Point],
    epsilons: &[Rational],
    prefix: usize,
) -> Result<SectionCoverEvidence> {
    let (_, right_space) = factor_spaces(cover.space())?;
    let mut rows = Vec::new();
    for x in samples {
        for eps in epsilons {
            let cells = cover.cells(eps);
            let mut totals = Vec::with_capacity(prefix);
            let mut total = Rational::zero();
            for k in 0..prefix {
                let cell = cells.get(k);
                let Cell::Rect(a, b) = &cell else {
                    return Err(Error::precondition("cover cell is not a rectangle"));
                };
                if a.contains_point(x) {
                    total += &right_space.measure(b)?;
                }
                totals.push(total.clone());
            }
            rows.push((x.clone(), eps.clone(), totals));
        }
    }
    Ok(SectionCoverEvidence { rows })
}

/// The counting-measure failure case on a window of the integer grid:
/// f = +1 just above the diagonal and -1 just below it. Both iterated
/// integrals vanish exactly, while the positive and negative parts grow
/// linearly with the window, certifying that the double integral is an
/// undefined infinity-minus-infinity at every scale.
#[derive(Clone, Debug)]
pub struct CountingCounterexample {
    pub window: i64,
    pub iterated_left_then_right: Rational,
    pub iterated_right_then_left: Rational,
    pub positive_part: Rational,
    pub negative_part: Rational,
    /// positive_part + negative_part = 2 * (pairs in window).
    pub combined_mass: Rational,
    pub verdict: FubiniVerdict,
}

pub fn counting_counterexample(window: i64) -> Result<CountingCounterexample> {
    let window = window.max(0);
    let space = MeasureSpace::product(MeasureSpace::Counting, MeasureSpace::Counting);
    let id = |k: i64| format!("{k}");
    let mut raw = Vec::new();
    for y in -window..=window {
        for (x, sign) in [(y + 1, 1i64), (y - 1, -1)] {
            if x.abs() <= window {
                raw.push((
                    Cell::rect(Cell::finite_set([id(x)]), Cell::finite_set([id(y)])),
                    Rational::from(sign),
                ));
            }
        }
    }
    let f = StepFunction::from_terms(space, raw)?;
    let lr = inner_integral(&f)?.integral();
    let rl = inner_integral(&transpose(&f)?)?.integral();
    let positive_part = f.positive_part().integral();
    let negative_part = f.neg().positive_part().integral();
    let combined_mass = &positive_part + &negative_part;
    Ok(CountingCounterexample {
        window,
        iterated_left_then_right: lr,
        iterated_right_then_left: rl,
        positive_part,
        negative_part,
        combined_mass,
        verdict: FubiniVerdict::CounterexampleDocumented,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, Finite};
    use crate::stream::Stream;

    fn line() -> MeasureSpace {
        MeasureSpace::IntervalLine
    }

    fn iv(a: i64, b: i64) -> Cell {
        Cell::interval(rat(a, 1), rat(b, 1))
    }

    fn plane() -> MeasureSpace {
        MeasureSpace::product(line(), line())
    }

    fn line_x_counting() -> MeasureSpace {
        MeasureSpace::product(line(), MeasureSpace::Counting)
    }

    #[test]
    fn sections_read_off_rectangles() {
        let phi = StepFunction::from_terms(
            plane(),
            [(Cell::rect(iv(0, 1), iv(0, 2)), rat(1, 1))],
        )
        .unwrap();
        let s = section(&phi, &Point::real(rat(1, 2))).unwrap();
        assert_eq!(s.terms(), &[(iv(0, 2), rat(1, 1))]);
        // outside the left factor the section is zero
        assert!(section(&phi, &Point::real(rat(2, 1))).unwrap().is_zero());
    }

    #[test]
    fn sections_do_pointwise_arithmetic() {
        // 2 chi([0,1) x {a}) - chi([0,2) x {a}) sections to chi{a} at 1/2
        let phi = StepFunction::from_terms(
            line_x_counting(),
            [
                (Cell::rect(iv(0, 1), Cell::finite_set(["a"])), rat(2, 1)),
                (Cell::rect(iv(0, 2), Cell::finite_set(["a"])), rat(-1, 1)),
            ],
        )
        .unwrap();
        let s = section(&phi, &Point::real(rat(1, 2))).unwrap();
        assert_eq!(s.terms(), &[(Cell::finite_set(["a"]), rat(1, 1))]);
    }

    #[test]
    fn sections_commute_with_lattice_ops() {
        let f = StepFunction::from_terms(
            plane(),
            [(Cell::rect(iv(0, 2), iv(0, 1)), rat(2, 1))],
        )
        .unwrap();
        let g = StepFunction::from_terms(
            plane(),
            [(Cell::rect(iv(1, 3), iv(0, 2)), rat(1, 1))],
        )
        .unwrap();
        for x in [rat(1, 2), rat(3, 2), rat(5, 2)] {
            let p = Point::real(x);
            let lhs = section(&f.max(&g).unwrap(), &p).unwrap();
            let rhs = section(&f, &p).unwrap().max(&section(&g, &p).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn fubini_on_a_plain_rectangle() {
        let phi = StepFunction::from_terms(
            plane(),
            [(Cell::rect(iv(0, 2), iv(0, 3)), rat(1, 1))],
        )
        .unwrap();
        let report = fubini_step(&phi).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::ExactEqual);
        assert_eq!(report.double.known(), Some(&Finite(rat(6, 1))));
    }

    #[test]
    fn fubini_on_mixed_spaces() {
        // 2 chi([0,1) x {a}) - chi([0,2) x {a,b}): 2*1 - 1*4 = -2
        let phi = StepFunction::from_terms(
            line_x_counting(),
            [
                (Cell::rect(iv(0, 1), Cell::finite_set(["a"])), rat(2, 1)),
                (
                    Cell::rect(iv(0, 2), Cell::finite_set(["a", "b"])),
                    rat(-1, 1),
                ),
            ],
        )
        .unwrap();
        let report = fubini_step(&phi).unwrap();
        assert_eq!(report.double.known(), Some(&Finite(rat(-2, 1))));
        assert_eq!(report.verdict, FubiniVerdict::ExactEqual);
        // zero function: all three integrals vanish
        let zero_report = fubini_step(&StepFunction::zero(plane())).unwrap();
        assert_eq!(zero_report.double.known(), Some(&Finite(rat(0, 1))));
    }

    #[test]
    fn fubini_monotone_ladders_match() {
        // chi([0, n/(n+1)) x [0,1)): ladders n/(n+1) on all three routes
        let f = MonotoneLimit::from_results(plane(), |n| {
            StepFunction::from_terms(
                plane(),
                [(
                    Cell::rect(
                        Cell::interval(rat(0, 1), rat(n as i64, n as i64 + 1)),
                        iv(0, 1),
                    ),
                    rat(1, 1),
                )],
            )
        });
        let report = fubini_monotone(&f, 20, &EvalParams::default()).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::EvidenceConsistent);
        for (n, (d, a, b)) in report.ladder.iter().enumerate() {
            let expected = rat(n as i64, n as i64 + 1);
            assert_eq!(*d, expected);
            assert_eq!(*a, expected);
            assert_eq!(*b, expected);
        }
    }

    #[test]
    fn fubini_monotone_stabilized_rectangle() {
        let f = MonotoneLimit::from_step(
            StepFunction::from_terms(
                plane(),
                [(Cell::rect(iv(0, 1), iv(0, 1)), rat(1, 1))],
            )
            .unwrap(),
        );
        let report = fubini_monotone(&f, 6, &EvalParams::default()).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::ExactEqual);
        assert_eq!(report.double.known(), Some(&Finite(rat(1, 1))));
    }

    #[test]
    fn fubini_monotone_unbounded_ladders_agree() {
        // chi([0,n) x [0,1)): all three certify unbounded growth
        let f = MonotoneLimit::from_results(plane(), |n| {
            StepFunction::from_terms(
                plane(),
                [(Cell::rect(iv(0, n as i64), iv(0, 1)), rat(1, 1))],
            )
        });
        let params = EvalParams {
            budget: 30,
            window: 4,
            infinity_threshold: rat(10, 1),
        };
        let report = fubini_monotone(&f, 20, &params).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::EvidenceConsistent);
        assert_eq!(report.double.known(), Some(&crate::numeric::PlusInf));
        assert_eq!(
            report.iterated_left_then_right.known(),
            Some(&crate::numeric::PlusInf)
        );
    }

    #[test]
    fn fubini_signed_reduces_to_steps() {
        let f = SignedLimit::from_step(
            StepFunction::from_terms(
                plane(),
                [(Cell::rect(iv(0, 1), iv(0, 2)), rat(3, 1))],
            )
            .unwrap(),
        );
        let report = fubini_signed(&f, 8, &EvalParams::default()).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::ExactEqual);
        assert_eq!(report.double.known(), Some(&Finite(rat(6, 1))));
    }

    #[test]
    fn fubini_ill_posed_pair_is_undefined() {
        // both sides carry certified-infinite mass on the product
        let pos = MonotoneLimit::from_results(plane(), |n| {
            StepFunction::from_terms(
                plane(),
                [(Cell::rect(iv(0, n as i64), iv(0, 1)), rat(1, 1))],
            )
        });
        let neg = MonotoneLimit::from_results(plane(), |n| {
            StepFunction::from_terms(
                plane(),
                [(Cell::rect(iv(-(n as i64), 0), iv(0, 1)), rat(1, 1))],
            )
        });
        let params = EvalParams {
            budget: 30,
            window: 4,
            infinity_threshold: rat(10, 1),
        };
        let report = fubini_sides(&pos, &neg, 10, &params).unwrap();
        assert_eq!(report.verdict, FubiniVerdict::Undefined);
    }

    #[test]
    fn sectioned_covers_shrink() {
        // null strip [0,1) x {0}: cover by [0,1) x [-eps 2^-k-3, eps 2^-k-3)
        let cover = NullCover::new(plane(), |eps: &Rational| {
            let eps = eps.clone();
            Stream::new(move |k| {
                let h = &eps * &Rational::dyadic(-(k as i64) - 3);
                Cell::rect(
                    Cell::interval(rat(0, 1), rat(1, 1)),
                    Cell::interval(-h.clone(), h),
                )
            })
        });
        let samples = vec![Point::real(rat(1, 2)), Point::real(rat(1, 4))];
        let eps = vec![rat(1, 10), rat(1, 100)];
        let ev = section_cover_evidence(&cover, &samples, &eps, 16).unwrap();
        for (_, eps, totals) in &ev.rows {
            // the sectioned totals stay below eps/2 (geometric tail)
            assert!(totals.last().unwrap() < &(eps * &rat(1, 2)));
        }
        // an empty cover sections to empty totals
        let empty = NullCover::from_stream(
            plane(),
            Stream::new(|_| Cell::rect(iv(0, 0), iv(0, 0))),
        );
        let ev = section_cover_evidence(&empty, &samples, &eps, 4).unwrap();
        for (_, _, totals) in &ev.rows {
            assert!(totals.iter().all(|t| t.is_zero()));
        }
    }

    #[test]
    fn counting_counterexample_values() {
        for (window, pairs) in [(0i64, 0i64), (1, 2), (2, 4), (5, 10)] {
            let report = counting_counterexample(window).unwrap();
            assert_eq!(report.iterated_left_then_right, rat(0, 1));
            assert_eq!(report.iterated_right_then_left, rat(0, 1));
            assert_eq!(report.positive_part, rat(pairs, 1));
            assert_eq!(report.negative_part, rat(pairs, 1));
            assert_eq!(report.combined_mass, rat(2 * pairs, 1));
            assert_eq!(report.verdict, FubiniVerdict::CounterexampleDocumented);
        }
    }

    #[test]
    fn transposing_swaps_iterated_reports() {
        let phi = StepFunction::from_terms(
            line_x_counting(),
            [(Cell::rect(iv(0, 2), Cell::finite_set(["a", "b"])), rat(1, 2))],
        )
        .unwrap();
        let t = transpose(&phi).unwrap();
        let r1 = fubini_step(&phi).unwrap();
        let r2 = fubini_step(&t).unwrap();
        assert_eq!(
            r1.iterated_left_then_right.known(),
            r2.iterated_right_then_left.known()
        );
        assert_eq!(r1.double.known(), r2.double.known());
    }
}
