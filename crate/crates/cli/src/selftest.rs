//! The full invariant suite behind `riesz selftest`.
//!
//! Each check re-derives a batch of exact identities from fixed seeds and
//! catalogs: randomized step-function algebra against a brute-force pointwise
//! oracle, Fubini at step level across space combinations, the vanishing and
//! level-set bounds, the monotone-convergence harness on a ten-entry catalog
//! with its two classical rejections, the convergence-theorem evidence
//! tables, sigma-ring structure with the null-cover round trip, and the
//! gallery reproductions. Everything is zero-tolerance rational equality.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::error::{Error, Result};
use riesz_core::gen;
use riesz_core::monotone::EvalParams;
use riesz_core::numeric::{Finite, Rational};
use riesz_core::product::{counting_counterexample, fubini_step};
use riesz_core::signed::{
    beppo_levi, dominated_report, fatou_report, l1_certify, L1Certificate, SignedLimit,
};
use riesz_core::space::{Cell, MeasureSpace};
use riesz_core::step::{markov_level_bound, vanishing_report, StepFunction};
use riesz_core::stream::Stream;
use riesz_core::{MeasurableSet, MonotoneLimit};

use crate::gallery::{run_entry, GalleryParams};

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn render_line(&self) -> String {
        format!(
            "[{}] {}: {} ({:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

type Check = (&'static str, &'static str, fn() -> Result<String>);

const CHECKS: &[Check] = &[
    ("c1", "step-integral exactness", c1_step_exactness),
    ("c2", "step-level product integration", c2_fubini_exactness),
    ("c3", "vanishing-sequence suite", c3_vanishing_suite),
    ("c4", "level-set bound", c4_level_bound),
    ("c5", "monotone-convergence harness", c5_monotone_convergence),
    ("c6", "convergence-theorem evidence", c6_convergence_evidence),
    ("c7", "measure structure", c7_measure_structure),
    ("c8", "gallery reproduction", c8_gallery),
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|(id, _, _)| *id).collect()
}

/// Runs the checks whose id matches the filter (all when `None`).
pub fn run(filter: Option<&str>) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .filter(|(id, _, _)| filter.is_none_or(|f| f == *id))
        .map(|(id, title, f)| {
            let start = Instant::now();
            let (passed, detail) = match f() {
                Ok(detail) => (true, detail),
                Err(e) => (false, e.to_string()),
            };
            CheckOutcome {
                id,
                title,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn ensure(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg.to_string()))
    }
}

fn spaces_under_test() -> Vec<MeasureSpace> {
    vec![
        MeasureSpace::IntervalLine,
        MeasureSpace::Counting,
        MeasureSpace::product(MeasureSpace::IntervalLine, MeasureSpace::Counting),
    ]
}

fn oracle_value(raw: &[(Cell, Rational)], p: &riesz_core::Point) -> Rational {
    let mut v = Rational::zero();
    for (cell, coeff) in raw {
        if cell.contains_point(p) {
            v += coeff;
        }
    }
    v
}

/// A different raw representation of the same pointwise function: reversed,
/// with the first splittable cell split in two and a null term appended.
fn equivalent_representation(
    raw: &[(Cell, Rational)],
    space: &MeasureSpace,
) -> Vec<(Cell, Rational)> {
    let mut out: Vec<(Cell, Rational)> = raw.iter().rev().cloned().collect();
    fn split_cell(cell: &Cell) -> Option<(Cell, Cell)> {
        match cell {
            Cell::Interval { lo, hi } if lo < hi => {
                let mid = (lo + hi) * Rational::new(1, 2);
                Some((
                    Cell::interval(lo.clone(), mid.clone()),
                    Cell::interval(mid, hi.clone()),
                ))
            }
            Cell::FiniteSet(ids) if ids.len() > 1 => {
                let (head, tail) = ids.split_at(1);
                Some((Cell::FiniteSet(head.to_vec()), Cell::FiniteSet(tail.to_vec())))
            }
            Cell::Rect(a, b) => {
                let (a1, a2) = split_cell(a)?;
                Some((
                    Cell::rect(a1, (**b).clone()),
                    Cell::rect(a2, (**b).clone()),
                ))
            }
            _ => None,
        }
    }
    for i in 0..out.len() {
        if let Some((first, second)) = split_cell(&out[i].0) {
            let coeff = out[i].1.clone();
            out[i] = (first, coeff.clone());
            out.push((second, coeff));
            break;
        }
    }
    out.push((Cell::empty_like(space), Rational::from(7)));
    out
}

fn c1_step_exactness() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut cases = 0usize;
    for space in spaces_under_test() {
        for _ in 0..1000 {
            let raw = gen::raw_terms(&mut rng, &space, 4);
            let f = StepFunction::from_terms(space.clone(), raw.clone())?;

            // pointwise oracle on the refinement grid
            for p in gen::sample_points(&raw, &space) {
                ensure(
                    f.value_at(&p) == oracle_value(&raw, &p),
                    "canonical form disagrees with the pointwise oracle",
                )?;
            }

            // a different representation of the same function is a.e. equal
            let g =
                StepFunction::from_terms(space.clone(), equivalent_representation(&raw, &space))?;
            ensure(f.ae_equal(&g), "equivalent representations split")?;

            // a genuine change on a positive-measure cell is detected
            if let Some((cell, coeff)) = f.terms().first() {
                let mut bumped: Vec<(Cell, Rational)> = f.terms().to_vec();
                bumped[0] = (cell.clone(), coeff + &Rational::one());
                let h = StepFunction::from_terms(space.clone(), bumped)?;
                ensure(!f.ae_equal(&h), "a real difference went unnoticed")?;
            }

            // linearity and positivity
            let other = gen::step(&mut rng, &space, 4);
            let c = gen::rational(&mut rng, 6);
            ensure(
                f.add(&other)?.integral() == f.integral() + other.integral(),
                "additivity broke",
            )?;
            ensure(
                f.scale(&c).integral() == &c * &f.integral(),
                "homogeneity broke",
            )?;
            let nonneg = gen::nonneg_step(&mut rng, &space, 4);
            ensure(!nonneg.integral().is_negative(), "positivity broke")?;
            ensure(
                f.add(&nonneg)?.integral() >= f.integral(),
                "monotonicity broke",
            )?;

            // lattice identity min + max = sum, as functions
            let lhs = f.min(&other)?.add(&f.max(&other)?)?;
            ensure(lhs == f.add(&other)?, "lattice identity broke")?;
            cases += 1;
        }
    }
    Ok(format!("{cases} randomized cases across 3 spaces, all exact"))
}

fn c2_fubini_exactness() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let combos = vec![
        MeasureSpace::product(MeasureSpace::IntervalLine, MeasureSpace::IntervalLine),
        MeasureSpace::product(MeasureSpace::IntervalLine, MeasureSpace::Counting),
        MeasureSpace::product(MeasureSpace::Counting, MeasureSpace::Counting),
    ];
    let mut cases = 0usize;
    for space in combos {
        for _ in 0..500 {
            let f = gen::step(&mut rng, &space, 4);
            // fubini_step errors unless double and both iterated integrals
            // are exactly equal
            let report = fubini_step(&f)?;
            ensure(
                report.verdict == riesz_core::product::FubiniVerdict::ExactEqual,
                "step-level product identity not exact",
            )?;
            cases += 1;
        }
    }
    Ok(format!("{cases} random product steps, three space combinations, zero tolerance"))
}

fn chi_interval(lo: Rational, hi: Rational, c: Rational) -> StepFunction {
    StepFunction::from_terms(
        MeasureSpace::IntervalLine,
        [(Cell::interval(lo, hi.clone().max(Rational::zero())), c)],
    )
    .expect("interval cell")
}

fn c3_vanishing_suite() -> Result<String> {
    let eps = Rational::new(1, 1_000_000);
    let mut detail = String::new();

    // the two harmonic-decay scans walk a million exact steps each; they are
    // independent, so they run side by side
    let eps_a = eps.clone();
    let widths = std::thread::spawn(move || {
        vanishing_report(
            |n| {
                chi_interval(
                    Rational::zero(),
                    Rational::new(1, n as i64 + 1),
                    Rational::one(),
                )
            },
            &eps_a,
            1_000_100,
        )
    });
    let eps_b = eps.clone();
    let heights = std::thread::spawn(move || {
        vanishing_report(
            |n| {
                chi_interval(
                    Rational::zero(),
                    Rational::one(),
                    Rational::new(1, n as i64 + 1),
                )
            },
            &eps_b,
            1_000_100,
        )
    });

    let r1 = widths.join().expect("scan thread")?;
    ensure(r1.monotone(), "shrinking intervals rose")?;
    ensure(r1.below_at == Some(1_000_000), "wrong crossing for 1/(n+1) widths")?;
    write!(detail, "chi[0,1/n) crossed at {:?}; ", r1.below_at).ok();

    let r2 = heights.join().expect("scan thread")?;
    ensure(r2.monotone(), "shrinking heights rose")?;
    ensure(r2.below_at == Some(1_000_000), "wrong crossing for 1/(n+1) heights")?;
    write!(detail, "chi/n crossed at {:?}; ", r2.below_at).ok();

    // dyadic staircase 2^-n chi[0,1) + chi[0, 2^-n)
    let r3 = vanishing_report(
        |n| {
            let h = Rational::dyadic(-(n as i64));
            StepFunction::from_terms(
                MeasureSpace::IntervalLine,
                [
                    (
                        Cell::interval(Rational::zero(), Rational::one()),
                        h.clone(),
                    ),
                    (Cell::interval(Rational::zero(), h), Rational::one()),
                ],
            )
            .expect("interval cells")
        },
        &eps,
        200,
    )?;
    ensure(r3.monotone(), "dyadic staircase rose")?;
    ensure(r3.below_at == Some(21), "wrong crossing for the dyadic staircase")?;

    // quadratic decay (1/(n+1)) chi[0, 1/(n+1))
    let r4 = vanishing_report(
        |n| {
            chi_interval(
                Rational::zero(),
                Rational::new(1, n as i64 + 1),
                Rational::new(1, n as i64 + 1),
            )
        },
        &eps,
        5_000,
    )?;
    ensure(r4.monotone(), "quadratic staircase rose")?;
    ensure(r4.below_at == Some(1_000), "wrong crossing for quadratic decay")?;
    write!(detail, "staircases crossed at 21 and 1000").ok();
    Ok(detail)
}

fn c4_level_bound() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut cases = 0usize;
    for space in spaces_under_test() {
        for _ in 0..500 {
            let phi = gen::nonneg_step(&mut rng, &space, 4);
            let t = gen::positive_rational(&mut rng, 4);
            let (cells, total) = markov_level_bound(&phi, &t)?;
            ensure(&total * &t <= phi.integral(), "level bound exceeded")?;
            // returned cells are exactly those whose value tops t
            for cell in &cells {
                let rep = cell.rep_point().expect("canonical cells are nonempty");
                ensure(phi.value_at(&rep) > t, "level cell below the threshold")?;
            }
            for (cell, coeff) in phi.terms() {
                if *coeff > t {
                    ensure(cells.contains(cell), "a level cell went missing")?;
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} nonnegative functions, bound exact"))
}

struct HarnessEntry {
    name: &'static str,
    term: fn(usize) -> StepFunction,
    declared: Rational,
}

fn interval(lo: Rational, hi: Rational, c: Rational) -> StepFunction {
    let hi = hi.max(lo.clone());
    StepFunction::from_terms(MeasureSpace::IntervalLine, [(Cell::interval(lo, hi), c)])
        .expect("interval cell")
}

fn harness_catalog() -> Vec<HarnessEntry> {
    fn ratio(n: usize, shift: i64) -> Rational {
        Rational::new(n as i64, n as i64 + shift)
    }
    vec![
        HarnessEntry {
            name: "creeping indicator",
            term: |n| interval(Rational::zero(), ratio(n, 1), Rational::one()),
            declared: Rational::one(),
        },
        HarnessEntry {
            name: "dyadic indicator (stabilizing)",
            term: |n| {
                let e = -(n.min(20) as i64);
                interval(
                    Rational::zero(),
                    Rational::one() - Rational::dyadic(e),
                    Rational::one(),
                )
            },
            declared: Rational::one() - Rational::dyadic(-20),
        },
        HarnessEntry {
            name: "rising height",
            term: |n| {
                interval(
                    Rational::zero(),
                    Rational::one(),
                    Rational::one() - Rational::new(1, n as i64 + 1),
                )
            },
            declared: Rational::one(),
        },
        HarnessEntry {
            name: "filling notch",
            term: |n| {
                StepFunction::from_terms(
                    MeasureSpace::IntervalLine,
                    [
                        (
                            Cell::interval(Rational::zero(), Rational::from(2)),
                            Rational::one(),
                        ),
                        (
                            Cell::interval(Rational::zero(), Rational::one()),
                            -Rational::new(1, n as i64 + 1),
                        ),
                    ],
                )
                .expect("interval cells")
            },
            declared: Rational::from(2),
        },
        HarnessEntry {
            name: "finite geometric staircase",
            term: |n| {
                let k_max = n.min(12);
                let raw: Vec<(Cell, Rational)> = (0..=k_max)
                    .map(|k| {
                        (
                            Cell::interval(
                                Rational::from(k as i64),
                                Rational::from(k as i64 + 1),
                            ),
                            Rational::dyadic(-(k as i64) - 1),
                        )
                    })
                    .collect();
                StepFunction::from_terms(MeasureSpace::IntervalLine, raw)
                    .expect("interval cells")
            },
            declared: Rational::one() - Rational::dyadic(-13),
        },
        HarnessEntry {
            name: "symmetric window",
            term: |n| interval(-ratio(n, 1), ratio(n, 1), Rational::one()),
            declared: Rational::from(2),
        },
        HarnessEntry {
            name: "signed creep to zero",
            term: |n| {
                StepFunction::from_terms(
                    MeasureSpace::IntervalLine,
                    [
                        (
                            Cell::interval(Rational::zero(), Rational::one()),
                            ratio(n, 1),
                        ),
                        (
                            Cell::interval(Rational::one(), Rational::from(2)),
                            -Rational::one(),
                        ),
                    ],
                )
                .expect("interval cells")
            },
            declared: Rational::zero(),
        },
        HarnessEntry {
            name: "constant",
            term: |n| {
                let _ = n;
                interval(Rational::zero(), Rational::one(), Rational::one())
            },
            declared: Rational::one(),
        },
        HarnessEntry {
            name: "doubling half-interval",
            term: |n| {
                interval(
                    Rational::zero(),
                    Rational::new(1, 2),
                    Rational::from(2) - Rational::new(1, n as i64 + 1),
                )
            },
            declared: Rational::one(),
        },
        HarnessEntry {
            name: "slow second block",
            term: |n| {
                StepFunction::from_terms(
                    MeasureSpace::IntervalLine,
                    [
                        (
                            Cell::interval(Rational::zero(), Rational::one()),
                            Rational::one(),
                        ),
                        (
                            Cell::interval(Rational::one(), Rational::from(2)),
                            Rational::new(n as i64, n as i64 + 5),
                        ),
                    ],
                )
                .expect("interval cells")
            },
            declared: Rational::from(2),
        },
    ]
}

fn c5_monotone_convergence() -> Result<String> {
    let horizon = 10_000usize;
    let tolerance = Rational::new(1, 1_000);
    let params = EvalParams::default();
    let mut detail = String::new();

    for entry in harness_catalog() {
        let term = entry.term;
        let (_, report) = beppo_levi(
            move |n| Ok(SignedLimit::from_step(term(n))),
            horizon,
            Some(Finite(entry.declared.clone())),
            &params,
        )?;
        ensure(
            report.pointwise_verified,
            "step-level monotonicity was not verified",
        )?;
        ensure(
            report
                .remainder_partials
                .iter()
                .all(|r| *r <= Rational::one()),
            "a remainder partial exceeded 1",
        )?;
        let gap = report
            .declared_gap
            .clone()
            .ok_or_else(|| Error::Precondition(format!("{}: no declared gap", entry.name)))?;
        ensure(
            gap <= tolerance,
            &format!("{}: ladder gap {gap} above 1/1000 at horizon {horizon}", entry.name),
        )?;
    }
    write!(detail, "10 catalog entries within 1/1000 at horizon {horizon}; ").ok();

    // nonzero-remainder machinery: a negative part reached only through its
    // declared limit forces genuine 2^-(j+1) minorant gaps; the part is
    // shared across terms so its stream is computed once
    let geo_neg = MonotoneLimit::from_fn(MeasureSpace::IntervalLine, |m| {
        let raw: Vec<(Cell, Rational)> = (0..=m)
            .map(|k| {
                (
                    Cell::interval(
                        Rational::from(10 + k as i64),
                        Rational::from(10 + k as i64) + Rational::dyadic(-(k as i64) - 1),
                    ),
                    Rational::one(),
                )
            })
            .collect();
        StepFunction::from_terms(MeasureSpace::IntervalLine, raw).expect("interval cells")
    });
    let small = EvalParams::with_budget(24);
    let geo_est = geo_neg
        .estimate(&small)?
        .declare(Finite(Rational::one()))?;
    let mk_term = move |n: usize| -> Result<SignedLimit> {
        let pos = MonotoneLimit::from_step(interval(
            Rational::zero(),
            Rational::new(n as i64, n as i64 + 1),
            Rational::one(),
        ));
        let pos_est = pos.estimate(&EvalParams::with_budget(8))?;
        SignedLimit::new(pos, geo_neg.clone(), pos_est, geo_est.clone())
    };
    let (_, report) = beppo_levi(mk_term, 16, Some(Finite(Rational::zero())), &small)?;
    for (j, gap) in report.minorant_gaps.iter().enumerate() {
        ensure(
            *gap < Rational::dyadic(-(j as i64) - 1),
            "a minorant gap missed its dyadic budget",
        )?;
        ensure(!gap.is_negative(), "negative minorant gap")?;
    }
    ensure(
        report
            .remainder_partials
            .iter()
            .all(|r| *r <= Rational::one()),
        "accumulated remainders exceeded 1",
    )?;
    ensure(
        report.minorant_gaps.iter().any(|g| g.is_positive()),
        "the declared-limit negative part produced no genuine gaps",
    )?;
    write!(detail, "declared-limit remainders stayed under 1; ").ok();

    // the two classical rejections
    let tight = EvalParams {
        budget: 32,
        window: 4,
        infinity_threshold: Rational::from(10),
    };
    let sign_term = {
        let tight = tight.clone();
        move |n: usize| -> Result<SignedLimit> {
            let pos = MonotoneLimit::from_step(interval(
                Rational::zero(),
                Rational::from(n as i64),
                Rational::one(),
            ));
            let neg = MonotoneLimit::from_fn(MeasureSpace::IntervalLine, |k| {
                interval(Rational::from(-(k as i64)), Rational::zero(), Rational::one())
            });
            let pos_est = pos.estimate(&tight)?;
            let neg_est = neg.estimate(&tight)?;
            SignedLimit::new(pos, neg, pos_est, neg_est)
        }
    };
    ensure(
        matches!(
            beppo_levi(sign_term, 24, None, &tight),
            Err(Error::AllTermsMinusInfinite)
        ),
        "the sign sequence was not rejected",
    )?;
    let tails_term = {
        let tight = tight.clone();
        move |n: usize| -> Result<SignedLimit> {
            let pos = MonotoneLimit::zero(MeasureSpace::IntervalLine);
            let neg = MonotoneLimit::from_fn(MeasureSpace::IntervalLine, move |k| {
                interval(
                    Rational::from(n as i64),
                    Rational::from(n as i64 + k as i64),
                    Rational::one(),
                )
            });
            let pos_est = pos.estimate(&tight)?;
            let neg_est = neg.estimate(&tight)?;
            SignedLimit::new(pos, neg, pos_est, neg_est)
        }
    };
    ensure(
        matches!(
            beppo_levi(tails_term, 24, None, &tight),
            Err(Error::AllTermsMinusInfinite)
        ),
        "the escaping-tails sequence was not rejected",
    )?;
    write!(detail, "both classical rejections reproduced").ok();
    Ok(detail)
}

fn l1_step(f: StepFunction) -> Result<L1Certificate> {
    l1_certify(SignedLimit::from_step(f))
}

fn c6_convergence_evidence() -> Result<String> {
    let params = EvalParams::default();
    let horizon = 12usize;
    let one = || interval(Rational::zero(), Rational::one(), Rational::one());
    let mut entries = 0usize;

    type Terms = Box<dyn Fn(usize) -> StepFunction>;
    // Fatou-style entries: (name, terms)
    let fatou_entries: Vec<(&str, Terms)> = vec![
        (
            "escaping blocks",
            Box::new(|n| {
                interval(
                    Rational::from(n as i64),
                    Rational::from(n as i64 + 1),
                    Rational::one(),
                )
            }),
        ),
        (
            "double-speed escape",
            Box::new(|n| {
                interval(
                    Rational::from(2 * n as i64),
                    Rational::from(2 * n as i64 + 1),
                    Rational::from(2),
                )
            }),
        ),
        ("constant", Box::new(|_| {
            interval(Rational::zero(), Rational::one(), Rational::one())
        })),
        (
            "descending heights",
            Box::new(|n| {
                interval(
                    Rational::zero(),
                    Rational::one(),
                    Rational::one() + Rational::new(1, n as i64 + 1),
                )
            }),
        ),
        (
            "ascending heights",
            Box::new(|n| {
                interval(
                    Rational::zero(),
                    Rational::one(),
                    Rational::one() - Rational::dyadic(-(n as i64)),
                )
            }),
        ),
        (
            "two-site alternation",
            Box::new(|n| {
                if n % 2 == 0 {
                    interval(Rational::zero(), Rational::one(), Rational::one())
                } else {
                    interval(Rational::one(), Rational::from(2), Rational::one())
                }
            }),
        ),
    ];
    for (name, term) in &fatou_entries {
        let report = fatou_report(|n| l1_step(term(n)), horizon, &params)?;
        ensure(report.nonneg_verified, &format!("{name}: nonnegativity unverified"))?;
        ensure(report.all_ok, &format!("{name}: a Fatou row failed"))?;
        entries += 1;
    }

    // dominated entries: (name, terms, bound)
    let dominated_entries: Vec<(&str, Terms, StepFunction)> = vec![
        (
            "shrinking heights",
            Box::new(|n| {
                interval(
                    Rational::zero(),
                    Rational::one(),
                    Rational::new(1, n as i64 + 1),
                )
            }),
            one(),
        ),
        ("constant", Box::new(move |_| one()), one()),
        (
            "filling notch",
            Box::new(|n| {
                StepFunction::from_terms(
                    MeasureSpace::IntervalLine,
                    [
                        (
                            Cell::interval(Rational::zero(), Rational::one()),
                            Rational::one(),
                        ),
                        (
                            Cell::interval(Rational::zero(), Rational::new(1, 2)),
                            -Rational::new(2, n as i64 + 1),
                        ),
                    ],
                )
                .expect("interval cells")
            }),
            one(),
        ),
        (
            "alternating signs",
            Box::new(|n| {
                let c = Rational::new(1, n as i64 + 1);
                interval(
                    Rational::zero(),
                    Rational::one(),
                    if n % 2 == 0 { c } else { -c },
                )
            }),
            one(),
        ),
    ];
    for (name, term, bound) in &dominated_entries {
        let report = dominated_report(
            |n| l1_step(term(n)),
            &l1_step(bound.clone())?,
            horizon,
            &params,
        )?;
        ensure(
            report.domination_verified,
            &format!("{name}: domination unverified"),
        )?;
        ensure(report.all_ok, &format!("{name}: a squeeze row failed"))?;
        entries += 1;
    }
    Ok(format!(
        "{entries} catalog entries, ladders exact at every index through horizon {horizon}"
    ))
}

fn c7_measure_structure() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let params = EvalParams::default();
    let line = MeasureSpace::IntervalLine;
    let mut pairs = 0usize;

    for space in spaces_under_test() {
        for _ in 0..334 {
            let cells_a: Vec<Cell> = (0..rng.random_range(0..4usize))
                .map(|_| gen::cell(&mut rng, &space))
                .collect();
            let cells_b: Vec<Cell> = (0..rng.random_range(0..4usize))
                .map(|_| gen::cell(&mut rng, &space))
                .collect();
            let a = MeasurableSet::from_cells(space.clone(), cells_a)?;
            let b = MeasurableSet::from_cells(space.clone(), cells_b)?;

            // closure: the difference is again a valid 0/1 indicator set
            let d = riesz_core::measurable::set_difference(&a, &b, &params)?;
            let ind = d
                .as_finite_indicator()
                .ok_or_else(|| Error::Precondition("difference left the fast path".into()))?;
            ensure(
                ind.terms().iter().all(|(_, c)| *c == Rational::one()),
                "difference indicator is not 0/1",
            )?;

            // additivity: mu(A u B) + mu(A n B) = mu(A) + mu(B)
            ensure(
                riesz_core::measurable::additivity_check(&a, &b)?,
                "additivity failed",
            )?;

            // difference + intersection tile A
            let diff_m = ind.integral();
            let inter = riesz_core::measurable::set_difference(&a, &d, &params)?;
            let inter_m = inter
                .as_finite_indicator()
                .ok_or_else(|| Error::Precondition("nested difference left the fast path".into()))?
                .integral();
            let a_m = a.as_finite_indicator().expect("finite").integral();
            ensure(diff_m + inter_m == a_m, "difference pieces do not tile")?;
            pairs += 1;
        }
    }

    // null round trip on the five-entry catalog at the six sampled epsilons
    let epsilons: Vec<Rational> = (1..=6).map(|k| Rational::new(1, 10i64.pow(k))).collect();
    let mut catalog_hits = 0usize;

    // 1) a single point, covered by an epsilon-scaled interval
    let point_cover = riesz_core::NullCover::new(line.clone(), |eps: &Rational| {
        let eps = eps.clone();
        Stream::new(move |k| {
            if k == 0 {
                let h = &eps / &Rational::from(4);
                Cell::interval(-h.clone(), h)
            } else {
                Cell::interval(Rational::zero(), Rational::zero())
            }
        })
    });
    // 2) three points, epsilon split three ways
    let three_points = riesz_core::NullCover::new(line.clone(), |eps: &Rational| {
        let eps = eps.clone();
        Stream::new(move |k| {
            if k < 3 {
                let c = Rational::from(k as i64);
                let h = &eps / &Rational::from(8);
                Cell::interval(&c - &h, &c + &h)
            } else {
                Cell::interval(Rational::zero(), Rational::zero())
            }
        })
    });
    // 3) all rationals in (0,1), geometric epsilon split
    let rationals = riesz_core::NullCover::new(line.clone(), |eps: &Rational| {
        let eps = eps.clone();
        let centers = crate::gallery::rational_enumeration(64);
        Stream::new(move |k| {
            if k < centers.len() {
                let h = &eps * &Rational::dyadic(-(k as i64) - 3);
                Cell::interval(&centers[k] - &h, &centers[k] + &h)
            } else {
                Cell::interval(Rational::zero(), Rational::zero())
            }
        })
    });
    for (name, cover) in [
        ("point", &point_cover),
        ("three points", &three_points),
        ("rationals", &rationals),
    ] {
        match riesz_core::measurable::cover_to_measure_zero(cover, &epsilons, 64)? {
            riesz_core::measurable::NullEquivalence::CoverToMeasure { ok, .. } => {
                ensure(ok, &format!("{name}: cover mass reached an epsilon"))?
            }
            other => return Err(Error::Precondition(format!("{name}: {other:?}"))),
        }
        catalog_hits += 1;
    }
    // 4) a finite identifier set under the zero measure: both directions
    let zero_set =
        MeasurableSet::from_cells(MeasureSpace::Zero, vec![Cell::finite_set(["a", "b"])])?;
    match riesz_core::measurable::measure_zero_to_cover(&zero_set, 8, &params)? {
        riesz_core::measurable::NullEquivalence::MeasureToCover { ok, .. } => {
            ensure(ok, "zero-measure set produced a massive cover")?
        }
        other => return Err(Error::Precondition(format!("zero set: {other:?}"))),
    }
    // and back: the emitted generating cells work as a cover
    let back = riesz_core::NullCover::from_stream(
        MeasureSpace::Zero,
        zero_set.generators().expect("cell-backed").clone(),
    );
    match riesz_core::measurable::cover_to_measure_zero(&back, &epsilons, 8)? {
        riesz_core::measurable::NullEquivalence::CoverToMeasure { ok, .. } => {
            ensure(ok, "re-covered zero set kept mass")?
        }
        other => return Err(Error::Precondition(format!("zero set back: {other:?}"))),
    }
    catalog_hits += 1;
    // 5) a null strip in a product with a zero factor: both directions
    let strip_space = MeasureSpace::product(line.clone(), MeasureSpace::Zero);
    let strip = MeasurableSet::from_cells(
        strip_space,
        vec![Cell::rect(
            Cell::interval(Rational::zero(), Rational::one()),
            Cell::finite_set(["p"]),
        )],
    )?;
    match riesz_core::measurable::measure_zero_to_cover(&strip, 8, &params)? {
        riesz_core::measurable::NullEquivalence::MeasureToCover { ok, .. } => {
            ensure(ok, "null strip produced a massive cover")?
        }
        other => return Err(Error::Precondition(format!("strip: {other:?}"))),
    }
    let back = riesz_core::NullCover::from_stream(
        strip.space().clone(),
        strip.generators().expect("cell-backed").clone(),
    );
    match riesz_core::measurable::cover_to_measure_zero(&back, &epsilons, 8)? {
        riesz_core::measurable::NullEquivalence::CoverToMeasure { ok, .. } => {
            ensure(ok, "re-covered strip kept mass")?
        }
        other => return Err(Error::Precondition(format!("strip back: {other:?}"))),
    }
    catalog_hits += 1;
    // a positive-measure set is rejected by the measure-zero direction
    let unit = MeasurableSet::from_cells(line, vec![Cell::interval(Rational::zero(), Rational::one())])?;
    ensure(
        matches!(
            riesz_core::measurable::measure_zero_to_cover(&unit, 4, &params)?,
            riesz_core::measurable::NullEquivalence::Rejected { .. }
        ),
        "a unit interval passed as null",
    )?;

    Ok(format!(
        "{pairs} set pairs exact; null round trip on {catalog_hits} catalog entries at 6 epsilons"
    ))
}

fn c8_gallery() -> Result<String> {
    let params = GalleryParams::default();
    // weir bounds at depth 20 and byte-identical reruns for every entry
    for id in crate::gallery::entry_ids() {
        let a = run_entry(id, &params)?;
        let b = run_entry(id, &params)?;
        ensure(a.pass, &format!("{id} failed its claims"))?;
        ensure(a.render() == b.render(), &format!("{id} is not deterministic"))?;
    }
    // counting counterexample: iterated zero, parts growing as 2 * pairs
    for window in 1..=5i64 {
        let report = counting_counterexample(window)?;
        ensure(
            report.iterated_left_then_right.is_zero()
                && report.iterated_right_then_left.is_zero(),
            "iterated integrals moved off zero",
        )?;
        ensure(
            report.combined_mass == Rational::from(4 * window),
            "part mass is not twice the pair count",
        )?;
    }
    // diagonal iterated integral is exactly zero
    let d = run_entry("diagonal", &params)?;
    ensure(d.pass, "diagonal entry failed")?;
    Ok("5 entries deterministic; counterexample masses exact".into())
}
