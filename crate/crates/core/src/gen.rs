//! Deterministic random generators for cells and step functions.
//!
//! Used by the property suites and by the `selftest` command, which re-runs
//! the randomized invariant checks at runtime from fixed seeds.

use rand::Rng;

use crate::numeric::Rational;
use crate::space::{refine, Cell, MeasureSpace, Point};
use crate::step::StepFunction;

const IDENT_POOL: [&str; 8] = ["a", "b", "c", "d", "x1", "x2", "y1", "y2"];

pub fn rational(rng: &mut impl Rng, bound: i64) -> Rational {
    Rational::new(rng.random_range(-bound..=bound), rng.random_range(1..=4))
}

pub fn nonneg_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    Rational::new(rng.random_range(0..=bound), rng.random_range(1..=4))
}

pub fn positive_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    Rational::new(rng.random_range(1..=bound), rng.random_range(1..=4))
}

pub fn cell(rng: &mut impl Rng, space: &MeasureSpace) -> Cell {
    match space {
        MeasureSpace::IntervalLine => {
            let lo = rational(rng, 8);
            let len = nonneg_rational(rng, 6);
            Cell::interval(lo.clone(), lo + len)
        }
        MeasureSpace::Counting | MeasureSpace::Zero => {
            let k = rng.random_range(0..=3usize);
            let mut ids = Vec::with_capacity(k);
            for _ in 0..k {
                ids.push(IDENT_POOL[rng.random_range(0..IDENT_POOL.len())]);
            }
            Cell::finite_set(ids)
        }
        MeasureSpace::Product(a, b) => Cell::rect(cell(rng, a), cell(rng, b)),
    }
}

pub fn raw_terms(
    rng: &mut impl Rng,
    space: &MeasureSpace,
    max_terms: usize,
) -> Vec<(Cell, Rational)> {
    let k = rng.random_range(0..=max_terms);
    (0..k).map(|_| (cell(rng, space), rational(rng, 5))).collect()
}

pub fn step(rng: &mut impl Rng, space: &MeasureSpace, max_terms: usize) -> StepFunction {
    StepFunction::from_terms(space.clone(), raw_terms(rng, space, max_terms))
        .expect("generated cells belong to the space")
}

pub fn nonneg_step(rng: &mut impl Rng, space: &MeasureSpace, max_terms: usize) -> StepFunction {
    let k = rng.random_range(0..=max_terms);
    let raw: Vec<(Cell, Rational)> = (0..k)
        .map(|_| (cell(rng, space), nonneg_rational(rng, 5)))
        .collect();
    StepFunction::from_terms(space.clone(), raw).expect("generated cells belong to the space")
}

/// Representative points of the refinement of the given raw terms, plus one
/// point far outside every cell: the sampling grid for pointwise oracles.
pub fn sample_points(raw: &[(Cell, Rational)], space: &MeasureSpace) -> Vec<Point> {
    let cells: Vec<Cell> = raw.iter().map(|(c, _)| c.clone()).collect();
    let mut points: Vec<Point> = refine(&cells, space)
        .iter()
        .filter_map(Cell::rep_point)
        .collect();
    points.push(outside_point(space));
    points
}

fn outside_point(space: &MeasureSpace) -> Point {
    match space {
        MeasureSpace::IntervalLine => Point::real(Rational::from(1_000_003)),
        MeasureSpace::Counting | MeasureSpace::Zero => Point::id("offgrid"),
        MeasureSpace::Product(a, b) => Point::pair(outside_point(a), outside_point(b)),
    }
}
