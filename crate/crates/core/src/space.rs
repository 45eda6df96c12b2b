//! Semirings of sets with finite measures.
//!
//! A space fixes a vocabulary of cells: half-open rational intervals on the
//! line, finite identifier sets under the counting or zero measure, and
//! rectangles over a pair of factor spaces. The semiring axioms (closure under
//! intersection, finite disjoint decomposition of differences) are not taken
//! on faith: `semiring_check` verifies them on any concrete family.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::stream::Stream;

/// Ground-point identifier for counting-style spaces.
///
/// The identifier space is unbounded and never enumerated as a whole; only
/// finite subsets are cells. That is how an uncountable ground set is modeled:
/// there is simply no stream of all points.
pub type Ident = String;

/// A point of some space, used for exact pointwise evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Point {
    Real(Rational),
    Id(Ident),
    Pair(Box<Point>, Box<Point>),
}

impl Point {
    pub fn real(r: Rational) -> Self {
        Point::Real(r)
    }

    pub fn id(s: impl Into<Ident>) -> Self {
        Point::Id(s.into())
    }

    pub fn pair(a: Point, b: Point) -> Self {
        Point::Pair(Box::new(a), Box::new(b))
    }
}

/// One element of a semiring.
#[derive(Clone, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// Half-open interval [lo, hi); lo = hi encodes the empty cell.
    Interval { lo: Rational, hi: Rational },
    /// Finite identifier set, sorted and duplicate-free.
    FiniteSet(Vec<Ident>),
    /// Rectangle over a product space.
    Rect(Box<Cell>, Box<Cell>),
}

impl Cell {
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Cell::Interval { lo, hi }
    }

    pub fn finite_set<I: Into<Ident>>(ids: impl IntoIterator<Item = I>) -> Self {
        let mut v: Vec<Ident> = ids.into_iter().map(Into::into).collect();
        v.sort();
        v.dedup();
        Cell::FiniteSet(v)
    }

    pub fn rect(left: Cell, right: Cell) -> Self {
        Cell::Rect(Box::new(left), Box::new(right))
    }

    pub fn empty_like(space: &MeasureSpace) -> Self {
        match space {
            MeasureSpace::IntervalLine => Cell::interval(Rational::zero(), Rational::zero()),
            MeasureSpace::Counting | MeasureSpace::Zero => Cell::FiniteSet(Vec::new()),
            MeasureSpace::Product(a, b) => Cell::rect(Self::empty_like(a), Self::empty_like(b)),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Cell::Interval { lo, hi } => lo >= hi,
            Cell::FiniteSet(ids) => ids.is_empty(),
            Cell::Rect(a, b) => a.is_empty() || b.is_empty(),
        }
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        match (self, p) {
            (Cell::Interval { lo, hi }, Point::Real(x)) => lo <= x && x < hi,
            (Cell::FiniteSet(ids), Point::Id(id)) => ids.binary_search(id).is_ok(),
            (Cell::Rect(a, b), Point::Pair(x, y)) => a.contains_point(x) && b.contains_point(y),
            _ => false,
        }
    }

    /// A representative point of a nonempty cell.
    pub fn rep_point(&self) -> Option<Point> {
        match self {
            Cell::Interval { lo, hi } => (lo < hi).then(|| Point::Real(lo.clone())),
            Cell::FiniteSet(ids) => ids.first().map(|id| Point::Id(id.clone())),
            Cell::Rect(a, b) => Some(Point::pair(a.rep_point()?, b.rep_point()?)),
        }
    }

    /// Exact intersection; always a cell by the semiring axioms.
    pub fn intersect(&self, other: &Cell) -> Cell {
        match (self, other) {
            (Cell::Interval { lo: a, hi: b }, Cell::Interval { lo: c, hi: d }) => {
                let lo = a.clone().max(c.clone());
                let hi = b.clone().min(d.clone());
                if lo < hi {
                    Cell::Interval { lo, hi }
                } else {
                    Cell::interval(Rational::zero(), Rational::zero())
                }
            }
            (Cell::FiniteSet(xs), Cell::FiniteSet(ys)) => Cell::FiniteSet(
                xs.iter()
                    .filter(|id| ys.binary_search(id).is_ok())
                    .cloned()
                    .collect(),
            ),
            (Cell::Rect(a, b), Cell::Rect(c, d)) => Cell::rect(a.intersect(c), b.intersect(d)),
            _ => panic!("intersecting cells of different kinds"),
        }
    }

    pub fn is_disjoint_from(&self, other: &Cell) -> bool {
        self.intersect(other).is_empty()
    }

    /// True when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Cell) -> bool {
        if self.is_empty() {
            return true;
        }
        match (self, other) {
            (Cell::Interval { lo: a, hi: b }, Cell::Interval { lo: c, hi: d }) => c <= a && b <= d,
            (Cell::FiniteSet(xs), Cell::FiniteSet(ys)) => {
                xs.iter().all(|id| ys.binary_search(id).is_ok())
            }
            (Cell::Rect(a, b), Cell::Rect(c, d)) => a.is_subset_of(c) && b.is_subset_of(d),
            _ => false,
        }
    }

    /// Set difference decomposed into finitely many pairwise disjoint cells.
    pub fn difference(&self, other: &Cell) -> Vec<Cell> {
        let mut out = Vec::new();
        match (self, other) {
            (Cell::Interval { lo: a, hi: b }, Cell::Interval { lo: c, hi: d }) => {
                let left_hi = b.clone().min(c.clone());
                if *a < left_hi {
                    out.push(Cell::Interval {
                        lo: a.clone(),
                        hi: left_hi,
                    });
                }
                let right_lo = a.clone().max(d.clone());
                if right_lo < *b && c < d {
                    out.push(Cell::Interval {
                        lo: right_lo,
                        hi: b.clone(),
                    });
                } else if c >= d && !self.is_empty() {
                    // subtracting an empty interval leaves self untouched,
                    // but the left branch may already have emitted it
                    out.clear();
                    out.push(self.clone());
                }
            }
            (Cell::FiniteSet(xs), Cell::FiniteSet(ys)) => {
                let rest: Vec<Ident> = xs
                    .iter()
                    .filter(|id| ys.binary_search(id).is_err())
                    .cloned()
                    .collect();
                if !rest.is_empty() {
                    out.push(Cell::FiniteSet(rest));
                }
            }
            (Cell::Rect(a, b), Cell::Rect(c, d)) => {
                // P x Q minus P' x Q' splits along the left factor first:
                // (P \ P') x Q, then (P n P') x (Q \ Q').
                for piece in a.difference(c) {
                    if !piece.is_empty() && !b.is_empty() {
                        out.push(Cell::rect(piece, (**b).clone()));
                    }
                }
                let core = a.intersect(c);
                if !core.is_empty() {
                    for piece in b.difference(d) {
                        if !piece.is_empty() {
                            out.push(Cell::rect(core.clone(), piece));
                        }
                    }
                }
            }
            _ => panic!("differencing cells of different kinds"),
        }
        out.retain(|c| !c.is_empty());
        out
    }

    /// True when the cell is already in its canonical shape: nonempty,
    /// identifier sets sorted and duplicate-free, factors normal.
    pub(crate) fn is_normal(&self) -> bool {
        match self {
            Cell::Interval { lo, hi } => lo < hi,
            Cell::FiniteSet(ids) => {
                !ids.is_empty() && ids.windows(2).all(|w| w[0] < w[1])
            }
            Cell::Rect(a, b) => a.is_normal() && b.is_normal(),
        }
    }

    fn kind_matches(&self, space: &MeasureSpace) -> bool {
        match (self, space) {
            (Cell::Interval { .. }, MeasureSpace::IntervalLine) => true,
            (Cell::FiniteSet(_), MeasureSpace::Counting | MeasureSpace::Zero) => true,
            (Cell::Rect(a, b), MeasureSpace::Product(l, r)) => {
                a.kind_matches(l) && b.kind_matches(r)
            }
            _ => false,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Interval { lo, hi } => write!(f, "[{lo}, {hi})"),
            Cell::FiniteSet(ids) => write!(f, "{{{}}}", ids.join(",")),
            Cell::Rect(a, b) => write!(f, "{a} x {b}"),
        }
    }
}

/// A semiring together with its finite measure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MeasureSpace {
    /// Bounded half-open rational intervals; measure = length.
    IntervalLine,
    /// Finite identifier sets; measure = cardinality.
    Counting,
    /// Finite identifier sets; measure identically zero.
    Zero,
    /// Rectangles over two factor spaces; measure = product of factors.
    Product(Box<MeasureSpace>, Box<MeasureSpace>),
}

impl MeasureSpace {
    pub fn product(left: MeasureSpace, right: MeasureSpace) -> Self {
        MeasureSpace::Product(Box::new(left), Box::new(right))
    }

    pub fn factors(&self) -> Option<(&MeasureSpace, &MeasureSpace)> {
        match self {
            MeasureSpace::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The exact measure of a cell of this space.
    pub fn measure(&self, cell: &Cell) -> Result<Rational> {
        if !cell.kind_matches(self) {
            return Err(Error::ForeignCell {
                cell: cell.to_string(),
                space: self.describe(),
            });
        }
        Ok(self.measure_unchecked(cell))
    }

    fn measure_unchecked(&self, cell: &Cell) -> Rational {
        match (self, cell) {
            (MeasureSpace::IntervalLine, Cell::Interval { lo, hi }) => hi - lo,
            (MeasureSpace::Counting, Cell::FiniteSet(ids)) => Rational::from(ids.len() as i64),
            (MeasureSpace::Zero, Cell::FiniteSet(_)) => Rational::zero(),
            (MeasureSpace::Product(l, r), Cell::Rect(a, b)) => {
                l.measure_unchecked(a) * r.measure_unchecked(b)
            }
            _ => unreachable!("kind checked"),
        }
    }

    /// Measure of a cell already known to belong to this space.
    pub(crate) fn measure_of(&self, cell: &Cell) -> Rational {
        self.measure(cell).expect("cell belongs to space")
    }

    pub fn describe(&self) -> String {
        match self {
            MeasureSpace::IntervalLine => "interval".into(),
            MeasureSpace::Counting => "counting".into(),
            MeasureSpace::Zero => "zero".into(),
            MeasureSpace::Product(a, b) => format!("product({},{})", a.describe(), b.describe()),
        }
    }

    pub(crate) fn check_cell(&self, cell: &Cell) -> Result<()> {
        if cell.kind_matches(self) {
            Ok(())
        } else {
            Err(Error::ForeignCell {
                cell: cell.to_string(),
                space: self.describe(),
            })
        }
    }

    /// Null test that avoids computing measures where the cell shape already
    /// decides it.
    pub(crate) fn cell_is_null(&self, cell: &Cell) -> bool {
        match (self, cell) {
            (MeasureSpace::IntervalLine, Cell::Interval { lo, hi }) => lo >= hi,
            (MeasureSpace::Counting, Cell::FiniteSet(ids)) => ids.is_empty(),
            (MeasureSpace::Zero, _) => true,
            (MeasureSpace::Product(l, r), Cell::Rect(a, b)) => {
                l.cell_is_null(a) || r.cell_is_null(b)
            }
            _ => self.measure_of(cell).is_zero(),
        }
    }
}

impl fmt::Display for MeasureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Pairwise disjoint atoms refining a cell family.
///
/// Every input cell is a union of atoms and every atom lies inside some input
/// cell, so any linear combination of the inputs is constant on each atom.
pub fn refine(cells: &[Cell], space: &MeasureSpace) -> Vec<Cell> {
    match space {
        MeasureSpace::IntervalLine => {
            let mut endpoints: Vec<Rational> = Vec::new();
            for c in cells {
                if let Cell::Interval { lo, hi } = c {
                    if lo < hi {
                        endpoints.push(lo.clone());
                        endpoints.push(hi.clone());
                    }
                }
            }
            endpoints.sort();
            endpoints.dedup();
            let mut atoms = Vec::new();
            for w in endpoints.windows(2) {
                let atom = Cell::Interval {
                    lo: w[0].clone(),
                    hi: w[1].clone(),
                };
                let rep = atom.rep_point().expect("nonempty atom");
                if cells.iter().any(|c| c.contains_point(&rep)) {
                    atoms.push(atom);
                }
            }
            atoms
        }
        MeasureSpace::Counting | MeasureSpace::Zero => {
            let mut ids: Vec<Ident> = Vec::new();
            for c in cells {
                if let Cell::FiniteSet(xs) = c {
                    ids.extend(xs.iter().cloned());
                }
            }
            ids.sort();
            ids.dedup();
            ids.into_iter().map(|id| Cell::FiniteSet(vec![id])).collect()
        }
        MeasureSpace::Product(l, r) => {
            let lefts: Vec<Cell> = cells
                .iter()
                .filter_map(|c| match c {
                    Cell::Rect(a, _) => Some((**a).clone()),
                    _ => None,
                })
                .collect();
            let rights: Vec<Cell> = cells
                .iter()
                .filter_map(|c| match c {
                    Cell::Rect(_, b) => Some((**b).clone()),
                    _ => None,
                })
                .collect();
            let left_atoms = refine(&lefts, l);
            let right_atoms = refine(&rights, r);
            let mut atoms = Vec::new();
            for a in &left_atoms {
                for b in &right_atoms {
                    let atom = Cell::rect(a.clone(), b.clone());
                    if atom.is_empty() {
                        continue;
                    }
                    let rep = atom.rep_point().expect("nonempty atom");
                    if cells.iter().any(|c| c.contains_point(&rep)) {
                        atoms.push(atom);
                    }
                }
            }
            atoms
        }
    }
}

/// Result of verifying the semiring axioms pair by pair.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub checks: Vec<PairCheck>,
}

#[derive(Clone, Debug)]
pub struct PairCheck {
    pub left: Cell,
    pub right: Cell,
    pub intersection: Cell,
    pub difference: Vec<Cell>,
    pub failure: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failure.is_none())
    }

    pub fn first_failure(&self) -> Option<&PairCheck> {
        self.checks.iter().find(|c| c.failure.is_some())
    }
}

/// Verifies, for each ordered pair in the family, that the intersection is a
/// cell contained in both operands and that the difference decomposes into
/// finitely many disjoint cells that exactly tile `left \ right`.
pub fn semiring_check(cells: &[Cell], space: &MeasureSpace) -> Result<CheckReport> {
    for c in cells {
        space.check_cell(c)?;
    }
    let mut checks = Vec::new();
    for p in cells {
        for q in cells {
            let inter = p.intersect(q);
            let diff = p.difference(q);
            let mut failure = None;

            if !inter.is_subset_of(p) || !inter.is_subset_of(q) {
                failure = Some(format!("intersection {inter} escapes the operands"));
            }
            for (i, a) in diff.iter().enumerate() {
                if !a.is_subset_of(p) {
                    failure = Some(format!("difference piece {a} escapes {p}"));
                }
                if !a.is_disjoint_from(q) {
                    failure = Some(format!("difference piece {a} meets {q}"));
                }
                for b in diff.iter().skip(i + 1) {
                    if !a.is_disjoint_from(b) {
                        failure = Some(format!("difference pieces {a} and {b} overlap"));
                    }
                }
                if !a.is_disjoint_from(&inter) {
                    failure = Some(format!("difference piece {a} meets the intersection"));
                }
            }

            // the pieces plus the intersection must tile p exactly:
            // measure additivity is the independent cross-check
            if failure.is_none() {
                let mut total = space.measure(&inter)?;
                for a in &diff {
                    total += &space.measure(a)?;
                }
                if total != space.measure(p)? {
                    failure = Some(format!(
                        "additivity broke: {} pieces total {total} vs mu({p}) = {}",
                        diff.len() + 1,
                        space.measure(p)?
                    ));
                }
                // and a set-level reconstruction check on atoms
                let mut family = vec![p.clone(), q.clone()];
                family.extend(diff.iter().cloned());
                family.push(inter.clone());
                for atom in refine(&family, space) {
                    let rep = atom.rep_point().expect("nonempty atom");
                    if p.contains_point(&rep) {
                        let in_q = q.contains_point(&rep);
                        let in_diff = diff.iter().any(|a| a.contains_point(&rep));
                        if in_q == in_diff {
                            failure = Some(format!("atom {atom} is misclassified"));
                        }
                    }
                }
            }

            checks.push(PairCheck {
                left: p.clone(),
                right: q.clone(),
                intersection: inter,
                difference: diff,
                failure,
            });
        }
    }
    Ok(CheckReport { checks })
}

/// A countable cover family witnessing that a set is null.
///
/// Nullity is cover-based: for every epsilon the family produces a cell stream
/// whose partial totals stay below epsilon while still covering the set. There
/// is deliberately no oracle deciding nullity of an arbitrary set.
type CoverFamily = Arc<dyn Fn(&Rational) -> Stream<Cell> + Send + Sync>;

#[derive(Clone)]
pub struct NullCover {
    space: MeasureSpace,
    family: CoverFamily,
}

impl NullCover {
    pub fn new(
        space: MeasureSpace,
        family: impl Fn(&Rational) -> Stream<Cell> + Send + Sync + 'static,
    ) -> Self {
        NullCover {
            space,
            family: Arc::new(family),
        }
    }

    /// A fixed cell stream used for every epsilon (meaningful when the cells
    /// already have zero total, or as a raw summable cover).
    pub fn from_stream(space: MeasureSpace, cells: Stream<Cell>) -> Self {
        NullCover::new(space, move |_| cells.clone())
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn cells(&self, epsilon: &Rational) -> Stream<Cell> {
        (self.family)(epsilon)
    }

    /// Total measure of the first `n` cover cells for the given epsilon.
    /// Non-decreasing in `n`.
    pub fn partial_total(&self, epsilon: &Rational, n: usize) -> Result<Rational> {
        let cells = self.cells(epsilon);
        let mut total = Rational::zero();
        for k in 0..n {
            total += &self.space.measure(&cells.get(k))?;
        }
        Ok(total)
    }

    /// True when the first `n` cells contain the point and their total stays
    /// below epsilon: a finite certificate of epsilon-coverability.
    pub fn certifies_point(&self, point: &Point, epsilon: &Rational, n: usize) -> Result<bool> {
        let cells = self.cells(epsilon);
        let covered = (0..n).any(|k| cells.get(k).contains_point(point));
        Ok(covered && self.partial_total(epsilon, n)? < *epsilon)
    }
}
