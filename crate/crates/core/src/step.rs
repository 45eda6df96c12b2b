//! Canonical step functions and their exact integral.
//!
//! A step function is a finite linear combination of characteristic functions
//! of cells. Values are identified almost everywhere, and the canonical form
//! is the a.e. representative: cells are pairwise disjoint with nonzero
//! coefficients, null cells are dropped, adjacent interval cells with equal
//! coefficients merge, and identifier cells with a common coefficient merge.
//! Two step functions are equal a.e. exactly when their canonical forms are
//! identical, which makes a.e. equality decidable.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::space::{refine, Cell, MeasureSpace, Point};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StepFunction {
    space: MeasureSpace,
    terms: Vec<(Cell, Rational)>,
}

impl StepFunction {
    /// Builds the canonical form of an arbitrary (possibly overlapping)
    /// linear combination of cells.
    pub fn from_terms(
        space: MeasureSpace,
        raw: impl IntoIterator<Item = (Cell, Rational)>,
    ) -> Result<Self> {
        let raw: Vec<(Cell, Rational)> = raw
            .into_iter()
            .filter(|(c, v)| !c.is_empty() && !v.is_zero())
            .collect();
        for (c, _) in &raw {
            space.check_cell(c)?;
        }
        let terms = canonical_terms(&space, &raw);
        Ok(StepFunction { space, terms })
    }

    /// Characteristic function of a union of cells (overlaps collapse to 1).
    pub fn indicator(
        space: MeasureSpace,
        cells: impl IntoIterator<Item = Cell>,
    ) -> Result<Self> {
        let cells: Vec<Cell> = cells.into_iter().filter(|c| !c.is_empty()).collect();
        for c in &cells {
            space.check_cell(c)?;
        }
        let atoms = refine(&cells, &space);
        let raw: Vec<(Cell, Rational)> = atoms.into_iter().map(|a| (a, Rational::one())).collect();
        let terms = canonical_terms(&space, &raw);
        Ok(StepFunction { space, terms })
    }

    pub fn zero(space: MeasureSpace) -> Self {
        StepFunction {
            space,
            terms: Vec::new(),
        }
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn terms(&self) -> &[(Cell, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Pointwise value of the canonical representative.
    pub fn value_at(&self, p: &Point) -> Rational {
        let mut v = Rational::zero();
        for (cell, coeff) in &self.terms {
            if cell.contains_point(p) {
                v += coeff;
            }
        }
        v
    }

    /// The exact integral: sum of coefficient times cell measure.
    pub fn integral(&self) -> Rational {
        let mut total = Rational::zero();
        for (cell, coeff) in &self.terms {
            total += &(coeff * &self.space.measure_of(cell));
        }
        total
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.check_same_space(other)?;
        let raw = self.terms.iter().chain(&other.terms).cloned();
        StepFunction::from_terms(self.space.clone(), raw)
    }

    pub fn scale(&self, c: &Rational) -> StepFunction {
        if c.is_zero() {
            return StepFunction::zero(self.space.clone());
        }
        // uniform scaling preserves the canonical coefficient pattern
        StepFunction {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .map(|(cell, v)| (cell.clone(), c * v))
                .collect(),
        }
    }

    pub fn neg(&self) -> StepFunction {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.add(&other.neg())
    }

    pub fn min(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine_pointwise(other, |a, b| a.min(b))
    }

    pub fn max(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine_pointwise(other, |a, b| a.max(b))
    }

    pub fn abs(&self) -> StepFunction {
        StepFunction {
            space: self.space.clone(),
            terms: canonical_terms(
                &self.space,
                &self
                    .terms
                    .iter()
                    .map(|(c, v)| (c.clone(), v.abs()))
                    .collect::<Vec<_>>(),
            ),
        }
    }

    pub fn positive_part(&self) -> StepFunction {
        let zero = StepFunction::zero(self.space.clone());
        self.max(&zero).expect("same space")
    }

    fn combine_pointwise(
        &self,
        other: &StepFunction,
        f: impl Fn(Rational, Rational) -> Rational,
    ) -> Result<StepFunction> {
        self.check_same_space(other)?;
        let cells: Vec<Cell> = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|(c, _)| c.clone())
            .collect();
        let atoms = refine(&cells, &self.space);
        let mut raw = Vec::with_capacity(atoms.len());
        for atom in atoms {
            let rep = atom.rep_point().expect("nonempty atom");
            let v = f(self.value_at(&rep), other.value_at(&rep));
            if !v.is_zero() {
                raw.push((atom, v));
            }
        }
        Ok(StepFunction {
            terms: canonical_terms(&self.space, &raw),
            space: self.space.clone(),
        })
    }

    /// True when the function is nonnegative almost everywhere.
    pub fn is_nonneg(&self) -> bool {
        self.terms.iter().all(|(_, v)| !v.is_negative())
    }

    /// A cell on which the function is negative with positive measure, if any.
    pub fn negative_witness(&self) -> Option<&Cell> {
        self.terms
            .iter()
            .find(|(_, v)| v.is_negative())
            .map(|(c, _)| c)
    }

    /// True when `self <= other` almost everywhere.
    pub fn le_ae(&self, other: &StepFunction) -> Result<bool> {
        self.check_same_space(other)?;
        Ok(self.gt_witness(other).is_none())
    }

    /// A positive-measure cell where `self > other`, or None when
    /// `self <= other` a.e. Works directly on the common refinement, so no
    /// canonical form is rebuilt.
    pub fn gt_witness(&self, other: &StepFunction) -> Option<Cell> {
        other.lt_witness(self)
    }

    fn lt_witness(&self, other: &StepFunction) -> Option<Cell> {
        if self.space == MeasureSpace::IntervalLine {
            return interval_lt_witness(&self.terms, &other.terms);
        }
        let cells: Vec<Cell> = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|(c, _)| c.clone())
            .collect();
        for atom in refine(&cells, &self.space) {
            if self.space.cell_is_null(&atom) {
                continue;
            }
            let rep = atom.rep_point().expect("nonempty atom");
            if self.value_at(&rep) < other.value_at(&rep) {
                return Some(atom);
            }
        }
        None
    }

    /// a.e. equality; canonical forms make this plain structural equality.
    pub fn ae_equal(&self, other: &StepFunction) -> bool {
        self == other
    }

    fn check_same_space(&self, other: &StepFunction) -> Result<()> {
        if self.space != other.space {
            return Err(Error::precondition(format!(
                "operands live on different spaces: {} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {{ ")?;
        for (i, (cell, coeff)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{cell}: {coeff}")?;
        }
        write!(f, " }}")
    }
}

/// Merge walk over two canonical interval term lists: finds a piece of the
/// common refinement where the first function falls below the second,
/// without materializing atoms or cloning values.
fn interval_lt_witness(
    a: &[(Cell, Rational)],
    b: &[(Cell, Rational)],
) -> Option<Cell> {
    fn ends(cell: &Cell) -> (&Rational, &Rational) {
        match cell {
            Cell::Interval { lo, hi } => (lo, hi),
            _ => unreachable!("interval space holds interval cells"),
        }
    }
    let mut bounds: Vec<&Rational> = Vec::with_capacity(2 * (a.len() + b.len()));
    for (cell, _) in a.iter().chain(b) {
        let (lo, hi) = ends(cell);
        bounds.push(lo);
        bounds.push(hi);
    }
    bounds.sort();
    bounds.dedup();

    let mut ia = 0;
    let mut ib = 0;
    for w in bounds.windows(2) {
        let (l, r) = (w[0], w[1]);
        while ia < a.len() && ends(&a[ia].0).1 <= l {
            ia += 1;
        }
        while ib < b.len() && ends(&b[ib].0).1 <= l {
            ib += 1;
        }
        let av = a.get(ia).filter(|(c, _)| ends(c).0 <= l).map(|(_, v)| v);
        let bv = b.get(ib).filter(|(c, _)| ends(c).0 <= l).map(|(_, v)| v);
        let below = match (av, bv) {
            (Some(x), Some(y)) => x < y,
            (Some(x), None) => x.is_negative(),
            (None, Some(y)) => y.is_positive(),
            (None, None) => false,
        };
        if below {
            return Some(Cell::interval(l.clone(), r.clone()));
        }
    }
    None
}

/// Canonicalization over disjoint-or-overlapping raw terms.
///
/// Works atom by atom: values are summed on a refinement of all input cells,
/// null atoms are dropped (they are invisible a.e.), and the surviving atoms
/// are regrouped into the unique canonical cell decomposition.
fn canonical_terms(space: &MeasureSpace, raw: &[(Cell, Rational)]) -> Vec<(Cell, Rational)> {
    // a single normal-shaped term of positive measure is its own canonical
    // form; this keeps long one-cell ladders cheap
    if let [(cell, v)] = raw {
        if cell.is_normal() && !space.cell_is_null(cell) {
            return vec![(cell.clone(), v.clone())];
        }
    }
    match space {
        MeasureSpace::IntervalLine | MeasureSpace::Counting | MeasureSpace::Zero => {
            let cells: Vec<Cell> = raw.iter().map(|(c, _)| c.clone()).collect();
            let atoms = refine(&cells, space);
            let mut atom_values = Vec::with_capacity(atoms.len());
            for atom in atoms {
                if space.cell_is_null(&atom) {
                    continue;
                }
                let rep = atom.rep_point().expect("nonempty atom");
                let mut v = Rational::zero();
                for (cell, coeff) in raw {
                    if cell.contains_point(&rep) {
                        v += coeff;
                    }
                }
                if !v.is_zero() {
                    atom_values.push((atom, v));
                }
            }
            regroup_scalar(space, atom_values)
        }
        MeasureSpace::Product(left_space, right_space) => {
            let lefts: Vec<Cell> = raw
                .iter()
                .filter_map(|(c, _)| match c {
                    Cell::Rect(a, _) => Some((**a).clone()),
                    _ => None,
                })
                .collect();
            let mut sections: Vec<(Cell, Vec<(Cell, Rational)>)> = Vec::new();
            for left_atom in refine(&lefts, left_space) {
                if left_space.cell_is_null(&left_atom) {
                    continue;
                }
                let rep = left_atom.rep_point().expect("nonempty atom");
                let mut section_raw = Vec::new();
                for (cell, coeff) in raw {
                    if let Cell::Rect(a, b) = cell {
                        if a.contains_point(&rep) {
                            section_raw.push(((**b).clone(), coeff.clone()));
                        }
                    }
                }
                let section = canonical_terms(right_space, &section_raw);
                if !section.is_empty() {
                    sections.push((left_atom, section));
                }
            }
            // left atoms sharing a section form one region; the region's own
            // canonical decomposition gives the canonical left cells
            type SectionGroup = (Vec<Cell>, Vec<(Cell, Rational)>);
            let mut groups: Vec<SectionGroup> = Vec::new();
            for (atom, section) in sections {
                match groups.iter_mut().find(|(_, s)| *s == section) {
                    Some((atoms, _)) => atoms.push(atom),
                    None => groups.push((vec![atom], section)),
                }
            }
            let mut pairs: Vec<(Cell, Vec<(Cell, Rational)>)> = Vec::new();
            for (atoms, section) in groups {
                let region: Vec<(Cell, Rational)> = atoms
                    .into_iter()
                    .map(|a| (a, Rational::one()))
                    .collect();
                for (left_cell, _) in canonical_terms(left_space, &region) {
                    pairs.push((left_cell, section.clone()));
                }
            }
            pairs.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Vec::new();
            for (left_cell, section) in pairs {
                for (right_cell, coeff) in section {
                    out.push((Cell::rect(left_cell.clone(), right_cell), coeff));
                }
            }
            out
        }
    }
}

fn regroup_scalar(space: &MeasureSpace, atom_values: Vec<(Cell, Rational)>) -> Vec<(Cell, Rational)> {
    match space {
        MeasureSpace::IntervalLine => {
            let mut out: Vec<(Cell, Rational)> = Vec::new();
            for (atom, v) in atom_values {
                if let (
                    Some((Cell::Interval { hi: prev_hi, .. }, prev_v)),
                    Cell::Interval { lo, hi },
                ) = (out.last_mut(), &atom)
                {
                    if prev_hi == lo && *prev_v == v {
                        *prev_hi = hi.clone();
                        continue;
                    }
                }
                out.push((atom, v));
            }
            out
        }
        MeasureSpace::Counting | MeasureSpace::Zero => {
            // group identifiers by coefficient; one finite set per value,
            // ordered by least element
            let mut groups: Vec<(Rational, Vec<String>)> = Vec::new();
            for (atom, v) in atom_values {
                let Cell::FiniteSet(ids) = atom else {
                    unreachable!("counting atoms are identifier singletons")
                };
                match groups.iter_mut().find(|(gv, _)| *gv == v) {
                    Some((_, members)) => members.extend(ids),
                    None => groups.push((v, ids)),
                }
            }
            let mut out: Vec<(Cell, Rational)> = groups
                .into_iter()
                .map(|(v, mut ids)| {
                    ids.sort();
                    (Cell::FiniteSet(ids), v)
                })
                .collect();
            out.sort_by(|a, b| a.0.cmp(&b.0));
            out
        }
        MeasureSpace::Product(..) => unreachable!("products regroup via sections"),
    }
}

/// Cells where a nonnegative step function exceeds the level `t`, with their
/// total measure. The total obeys the Markov bound: total <= integral / t.
pub fn markov_level_bound(
    phi: &StepFunction,
    t: &Rational,
) -> Result<(Vec<Cell>, Rational)> {
    if !phi.is_nonneg() {
        return Err(Error::precondition(
            "level bound needs a nonnegative function",
        ));
    }
    if !t.is_positive() {
        return Err(Error::precondition("level must be positive"));
    }
    let mut cells = Vec::new();
    let mut total = Rational::zero();
    for (cell, coeff) in phi.terms() {
        if coeff > t {
            total += &phi.space().measure_of(cell);
            cells.push(cell.clone());
        }
    }
    debug_assert!(&total * t <= phi.integral());
    Ok((cells, total))
}

/// Verdict of the empirical check that a non-increasing sequence of
/// nonnegative step functions has integrals collapsing below epsilon.
#[derive(Clone, Debug)]
pub struct VanishingReport {
    /// First indices' integrals, capped to keep huge horizons cheap to hold.
    pub integral_prefix: Vec<Rational>,
    /// Last integral computed.
    pub last_integral: Rational,
    /// Number of consecutive pairs whose ordering was verified exactly.
    pub pairs_checked: usize,
    /// Index and witness cell where monotonicity failed, if it did.
    pub violation: Option<(usize, Cell)>,
    /// First index whose integral fell strictly below epsilon.
    pub below_at: Option<usize>,
}

impl VanishingReport {
    pub fn monotone(&self) -> bool {
        self.violation.is_none()
    }
}

const VANISHING_PREFIX_CAP: usize = 64;

/// Scans `phi(0), phi(1), ...` verifying exactly that each step dominates the
/// next a.e., until the integral drops below `epsilon`, the horizon runs out,
/// or monotonicity fails (then the witness cell is returned).
pub fn vanishing_report(
    phi: impl Fn(usize) -> StepFunction,
    epsilon: &Rational,
    horizon: usize,
) -> Result<VanishingReport> {
    let mut prev = phi(0);
    let mut prefix = vec![prev.integral()];
    let mut last = prefix[0].clone();
    let mut below_at = (last < *epsilon).then_some(0);
    let mut violation = None;
    let mut pairs_checked = 0;

    let mut n = 0;
    while below_at.is_none() && violation.is_none() && n + 1 < horizon {
        let next = phi(n + 1);
        if let Some(cell) = next.gt_witness(&prev) {
            violation = Some((n + 1, cell));
            break;
        }
        pairs_checked += 1;
        last = next.integral();
        if prefix.len() < VANISHING_PREFIX_CAP {
            prefix.push(last.clone());
        }
        if last < *epsilon {
            below_at = Some(n + 1);
        }
        prev = next;
        n += 1;
    }

    Ok(VanishingReport {
        integral_prefix: prefix,
        last_integral: last,
        pairs_checked,
        violation,
        below_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::space::Cell;

    fn line() -> MeasureSpace {
        MeasureSpace::IntervalLine
    }

    fn iv(a: i64, b: i64) -> Cell {
        Cell::interval(rat(a, 1), rat(b, 1))
    }

    fn chi(a: i64, b: i64) -> StepFunction {
        StepFunction::from_terms(line(), [(iv(a, b), rat(1, 1))]).unwrap()
    }

    /// Brute-force pointwise oracle: evaluates a raw term list directly,
    /// independent of canonicalization.
    fn oracle_value(raw: &[(Cell, Rational)], p: &Point) -> Rational {
        let mut v = Rational::zero();
        for (cell, coeff) in raw {
            if cell.contains_point(p) {
                v += coeff;
            }
        }
        v
    }

    fn oracle_points(raw: &[(Cell, Rational)], space: &MeasureSpace) -> Vec<Point> {
        let cells: Vec<Cell> = raw.iter().map(|(c, _)| c.clone()).collect();
        let mut pts: Vec<Point> = refine(&cells, space)
            .iter()
            .filter_map(|a| a.rep_point())
            .collect();
        pts.push(Point::real(rat(1_000_003, 1))); // far outside every cell
        pts
    }

    #[test]
    fn canonical_form_of_overlapping_indicators() {
        // chi[0,2) + chi[1,3), frozen from the pointwise oracle on the
        // endpoint grid: 1 on [0,1), 2 on [1,2), 1 on [2,3)
        let raw = vec![(iv(0, 2), rat(1, 1)), (iv(1, 3), rat(1, 1))];
        let f = StepFunction::from_terms(line(), raw.clone()).unwrap();
        assert_eq!(
            f.terms(),
            &[
                (iv(0, 1), rat(1, 1)),
                (iv(1, 2), rat(2, 1)),
                (iv(2, 3), rat(1, 1)),
            ]
        );
        for p in oracle_points(&raw, &line()) {
            assert_eq!(f.value_at(&p), oracle_value(&raw, &p));
        }
    }

    #[test]
    fn zero_coefficients_vanish() {
        let f = StepFunction::from_terms(line(), [(iv(0, 1), rat(0, 1))]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn adjacent_equal_cells_merge() {
        let f =
            StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1)), (iv(1, 2), rat(1, 1))])
                .unwrap();
        assert_eq!(f.terms(), &[(iv(0, 2), rat(1, 1))]);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let f =
            StepFunction::from_terms(line(), [(iv(0, 2), rat(2, 1)), (iv(1, 3), rat(-1, 1))])
                .unwrap();
        let again = StepFunction::from_terms(line(), f.terms().to_vec()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn integral_of_signed_combination() {
        // 2 chi[0,2) - chi[1,3): refine to 2*1 + 1*1 + (-1)*1 = 2
        let f =
            StepFunction::from_terms(line(), [(iv(0, 2), rat(2, 1)), (iv(1, 3), rat(-1, 1))])
                .unwrap();
        assert_eq!(f.integral(), rat(2, 1));
        assert_eq!(StepFunction::zero(line()).integral(), rat(0, 1));
    }

    #[test]
    fn counting_integral() {
        // 3 chi{a,b} under counting = 3 * 2
        let f = StepFunction::from_terms(
            MeasureSpace::Counting,
            [(Cell::finite_set(["a", "b"]), rat(3, 1))],
        )
        .unwrap();
        assert_eq!(f.integral(), rat(6, 1));
    }

    #[test]
    fn zero_space_collapses_everything() {
        let f = StepFunction::from_terms(
            MeasureSpace::Zero,
            [(Cell::finite_set(["a"]), rat(5, 1))],
        )
        .unwrap();
        let g = StepFunction::from_terms(
            MeasureSpace::Zero,
            [(Cell::finite_set(["b", "c"]), rat(-7, 2))],
        )
        .unwrap();
        // every cell is null, so any two functions agree a.e.
        assert!(f.ae_equal(&g));
        assert_eq!(f.integral(), rat(0, 1));
    }

    #[test]
    fn lattice_operations() {
        let f = chi(0, 1);
        assert_eq!(f.max(&f.neg()).unwrap(), f);
        // min(chi[0,2), chi[1,3)) = chi[1,2)
        let m = chi(0, 2).min(&chi(1, 3)).unwrap();
        assert_eq!(m, chi(1, 2));
        // f + (-f) = 0
        assert!(f.add(&f.neg()).unwrap().is_zero());
    }

    #[test]
    fn lattice_identity_min_plus_max() {
        let f = StepFunction::from_terms(line(), [(iv(0, 2), rat(2, 1)), (iv(1, 4), rat(-1, 1))])
            .unwrap();
        let g = StepFunction::from_terms(line(), [(iv(1, 3), rat(1, 2))]).unwrap();
        let lhs = f.min(&g).unwrap().add(&f.max(&g).unwrap()).unwrap();
        let rhs = f.add(&g).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ae_equality_ignores_null_adjustments() {
        // a point has measure zero, so a degenerate extra cell is invisible
        let plain = chi(0, 1);
        let adjusted = StepFunction::from_terms(
            line(),
            [(iv(0, 1), rat(1, 1)), (Cell::interval(rat(0, 1), rat(0, 1)), rat(9, 1))],
        )
        .unwrap();
        assert!(plain.ae_equal(&adjusted));
        // non-degenerate intervals are not null sets
        assert!(!chi(0, 1).ae_equal(&chi(0, 2)));
    }

    #[test]
    fn product_canonical_form_is_representation_independent() {
        let space = MeasureSpace::product(line(), line());
        let one_piece = StepFunction::from_terms(
            space.clone(),
            [(Cell::rect(iv(0, 2), iv(0, 1)), rat(1, 1))],
        )
        .unwrap();
        let two_pieces = StepFunction::from_terms(
            space,
            [
                (Cell::rect(iv(0, 1), iv(0, 1)), rat(1, 1)),
                (Cell::rect(iv(1, 2), iv(0, 1)), rat(1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(one_piece, two_pieces);
        assert_eq!(one_piece.integral(), rat(2, 1));
    }

    #[test]
    fn product_with_counting_factor() {
        let space = MeasureSpace::product(line(), MeasureSpace::Counting);
        let f = StepFunction::from_terms(
            space,
            [
                (Cell::rect(iv(0, 1), Cell::finite_set(["a"])), rat(2, 1)),
                (Cell::rect(iv(0, 2), Cell::finite_set(["a"])), rat(-1, 1)),
            ],
        )
        .unwrap();
        // 2*1 - 1*2 = 0
        assert_eq!(f.integral(), rat(0, 1));
        let p = Point::pair(Point::real(rat(1, 2)), Point::id("a"));
        assert_eq!(f.value_at(&p), rat(1, 1));
    }

    #[test]
    fn markov_bound_examples() {
        // phi = 2 chi[0,1), t = 1: level cells [0,1), total 1 <= 2/1
        let f = StepFunction::from_terms(line(), [(iv(0, 1), rat(2, 1))]).unwrap();
        let (cells, total) = markov_level_bound(&f, &rat(1, 1)).unwrap();
        assert_eq!(cells, vec![iv(0, 1)]);
        assert_eq!(total, rat(1, 1));

        // nothing exceeds t = 2
        let (cells, total) = markov_level_bound(&chi(0, 1), &rat(2, 1)).unwrap();
        assert!(cells.is_empty());
        assert_eq!(total, rat(0, 1));

        // phi = 4 chi[0,1/4), t = 1: total 1/4 <= 1
        let f = StepFunction::from_terms(
            line(),
            [(Cell::interval(rat(0, 1), rat(1, 4)), rat(4, 1))],
        )
        .unwrap();
        let (_, total) = markov_level_bound(&f, &rat(1, 1)).unwrap();
        assert_eq!(total, rat(1, 4));

        assert!(markov_level_bound(&chi(0, 1).neg(), &rat(1, 1)).is_err());
        assert!(markov_level_bound(&chi(0, 1), &rat(0, 1)).is_err());
    }

    #[test]
    fn vanishing_sequence_of_shrinking_intervals() {
        // phi_n = chi[0, 1/(n+1)): integral 1/(n+1), below 1/8 from n = 8
        let phi = |n: usize| {
            StepFunction::from_terms(
                line(),
                [(Cell::interval(rat(0, 1), rat(1, n as i64 + 1)), rat(1, 1))],
            )
            .unwrap()
        };
        let report = vanishing_report(phi, &rat(1, 8), 100).unwrap();
        assert!(report.monotone());
        assert_eq!(report.below_at, Some(8));
        assert_eq!(report.integral_prefix[0], rat(1, 1));
        assert_eq!(report.integral_prefix[4], rat(1, 5));
    }

    #[test]
    fn vanishing_zero_sequence_is_immediate() {
        let report =
            vanishing_report(|_| StepFunction::zero(line()), &rat(1, 1000), 10).unwrap();
        assert_eq!(report.below_at, Some(0));
    }

    #[test]
    fn vanishing_scaled_sequence() {
        // phi_n = 1/(n+1) chi[0,1): below 1/100 from n = 100
        let phi = |n: usize| chi(0, 1).scale(&rat(1, n as i64 + 1));
        let report = vanishing_report(phi, &rat(1, 100), 1000).unwrap();
        assert!(report.monotone());
        assert_eq!(report.below_at, Some(100));
    }

    #[test]
    fn vanishing_detects_violations() {
        // chi, chi/2, chi, ...: the rise at index 2 is caught exactly, with
        // the interval it rises on as the witness
        let phi = |n: usize| {
            if n == 1 {
                chi(0, 1).scale(&rat(1, 2))
            } else {
                chi(0, 1)
            }
        };
        let report = vanishing_report(phi, &rat(1, 1_000_000), 10).unwrap();
        assert_eq!(report.violation, Some((2, iv(0, 1))));
        assert!(!report.monotone());
        assert_eq!(report.below_at, None);
    }

    #[test]
    fn oracle_agreement_on_random_combinations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n_terms = rng.random_range(0..5);
            let raw: Vec<(Cell, Rational)> = (0..n_terms)
                .map(|_| {
                    let a = rat(rng.random_range(-6..6), rng.random_range(1..4));
                    let len = rat(rng.random_range(0..5), rng.random_range(1..4));
                    let c = rat(rng.random_range(-4..5), rng.random_range(1..4));
                    (Cell::interval(a.clone(), a + len), c)
                })
                .collect();
            let f = StepFunction::from_terms(line(), raw.clone()).unwrap();
            for p in oracle_points(&raw, &line()) {
                assert_eq!(f.value_at(&p), oracle_value(&raw, &p));
            }
            // two shuffled representations canonicalize identically
            let mut raw2 = raw.clone();
            raw2.reverse();
            let g = StepFunction::from_terms(line(), raw2).unwrap();
            assert_eq!(f, g);
        }
    }
}
