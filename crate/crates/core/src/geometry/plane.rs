use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, GeometryError};
use crate::field::{Elem, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Line(pub usize);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.0)
    }
}

/// A concrete failure of the projective plane axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxiomViolation {
    LineCount { expected: usize, found: usize },
    PointOutOfRange { line: Line, point: usize },
    RepeatedPoint { line: Line, point: Point },
    LineSize { line: Line, size: usize, expected: usize },
    PointDegree { point: Point, degree: usize, expected: usize },
    TwoCommonLines { points: (Point, Point), lines: (Line, Line) },
    NoCommonLine { points: (Point, Point) },
    TwoCommonPoints { lines: (Line, Line), points: (Point, Point) },
    NoCommonPoint { lines: (Line, Line) },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AxiomViolation::*;
        match self {
            LineCount { expected, found } => write!(f, "expected {expected} lines, found {found}"),
            PointOutOfRange { line, point } => write!(f, "line {line} lists point id {point} out of range"),
            RepeatedPoint { line, point } => write!(f, "line {line} lists {point} twice"),
            LineSize { line, size, expected } => {
                write!(f, "line {line} has {size} points, expected {expected}")
            }
            PointDegree { point, degree, expected } => {
                write!(f, "point {point} lies on {degree} lines, expected {expected}")
            }
            TwoCommonLines { points, lines } => {
                write!(f, "points {} and {} lie on two common lines {} and {}", points.0, points.1, lines.0, lines.1)
            }
            NoCommonLine { points } => {
                write!(f, "points {} and {} have no common line", points.0, points.1)
            }
            TwoCommonPoints { lines, points } => {
                write!(f, "lines {} and {} meet in two points {} and {}", lines.0, lines.1, points.0, points.1)
            }
            NoCommonPoint { lines } => write!(f, "lines {} and {} do not meet", lines.0, lines.1),
        }
    }
}

/// Normalized homogeneous coordinates of a plane built over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinates {
    pub points: Vec<[Elem; 3]>,
    pub lines: Vec<[Elem; 3]>,
}

/// A finite projective plane with points and lines numbered `0..q^2+q+1`.
///
/// Incidence is kept three ways: per-line point sets `I(y)`, per-point line
/// sets and a dense incidence matrix. Joins and meets are tabulated at
/// construction so `line_through` and `meet` are lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectivePlane {
    order: usize,
    line_points: Vec<Vec<Point>>,
    point_lines: Vec<Vec<Line>>,
    incidence: Vec<bool>,
    join: Vec<u32>,
    meet: Vec<u32>,
    coords: Option<Coordinates>,
}

const NONE: u32 = u32::MAX;

/// `q^2 + q + 1`.
pub fn plane_size(q: usize) -> usize {
    q * q + q + 1
}

impl ProjectivePlane {
    /// Builds PG(2,q): points are the 1-dimensional subspaces of GF(q)^3 and
    /// lines the 2-dimensional ones given by their normal vectors, both
    /// normalized so the leftmost nonzero coordinate is 1 and listed in
    /// lexicographic order.
    pub fn desarguesian(field: &Field) -> Self {
        let q = field.order();
        let mut vectors = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let v = [a, b, c];
                    if v.iter().find(|&&x| x != 0) == Some(&1) {
                        vectors.push(v);
                    }
                }
            }
        }
        let dot = |u: &[Elem; 3], v: &[Elem; 3]| (0..3).fold(0, |acc, i| field.add(acc, field.mul(u[i], v[i])));
        let lines: Vec<Vec<usize>> =
            vectors.iter().map(|l| (0..vectors.len()).filter(|&p| dot(&vectors[p], l) == 0).collect()).collect();
        let mut plane = Self::from_lines(q as usize, lines).expect("PG(2,q) over a field satisfies the plane axioms");
        plane.coords = Some(Coordinates { points: vectors.clone(), lines: vectors });
        plane
    }

    /// Builds a plane of order `q` from its lines, each given as a list of
    /// point ids, after checking every plane axiom.
    pub fn from_lines(q: usize, lines: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        let n = plane_size(q);
        if lines.len() != n {
            return Err(AxiomViolation::LineCount { expected: n, found: lines.len() }.into());
        }
        let mut incidence = vec![false; n * n];
        let mut line_points = Vec::with_capacity(n);
        for (l, pts) in lines.into_iter().enumerate() {
            let mut sorted = Vec::with_capacity(pts.len());
            for p in pts {
                if p >= n {
                    return Err(AxiomViolation::PointOutOfRange { line: Line(l), point: p }.into());
                }
                if incidence[p * n + l] {
                    return Err(AxiomViolation::RepeatedPoint { line: Line(l), point: Point(p) }.into());
                }
                incidence[p * n + l] = true;
                sorted.push(Point(p));
            }
            if sorted.len() != q + 1 {
                return Err(AxiomViolation::LineSize { line: Line(l), size: sorted.len(), expected: q + 1 }.into());
            }
            sorted.sort();
            line_points.push(sorted);
        }

        let mut point_lines = vec![Vec::new(); n];
        for (l, pts) in line_points.iter().enumerate() {
            for p in pts {
                point_lines[p.0].push(Line(l));
            }
        }
        for (p, ls) in point_lines.iter().enumerate() {
            if ls.len() != q + 1 {
                return Err(AxiomViolation::PointDegree { point: Point(p), degree: ls.len(), expected: q + 1 }.into());
            }
        }

        let mut join = vec![NONE; n * n];
        for (l, pts) in line_points.iter().enumerate() {
            for (a, &p1) in pts.iter().enumerate() {
                for &p2 in &pts[a + 1..] {
                    let slot = &mut join[p1.0 * n + p2.0];
                    if *slot != NONE {
                        return Err(AxiomViolation::TwoCommonLines {
                            points: (p1, p2),
                            lines: (Line(*slot as usize), Line(l)),
                        }
                        .into());
                    }
                    *slot = l as u32;
                    join[p2.0 * n + p1.0] = l as u32;
                }
            }
        }
        let mut meet = vec![NONE; n * n];
        for (p, ls) in point_lines.iter().enumerate() {
            for (a, &l1) in ls.iter().enumerate() {
                for &l2 in &ls[a + 1..] {
                    let slot = &mut meet[l1.0 * n + l2.0];
                    if *slot != NONE {
                        return Err(AxiomViolation::TwoCommonPoints {
                            lines: (l1, l2),
                            points: (Point(*slot as usize), Point(p)),
                        }
                        .into());
                    }
                    *slot = p as u32;
                    meet[l2.0 * n + l1.0] = p as u32;
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if join[a * n + b] == NONE {
                    return Err(AxiomViolation::NoCommonLine { points: (Point(a), Point(b)) }.into());
                }
                if meet[a * n + b] == NONE {
                    return Err(AxiomViolation::NoCommonPoint { lines: (Line(a), Line(b)) }.into());
                }
            }
        }

        Ok(ProjectivePlane { order: q, line_points, point_lines, incidence, join, meet, coords: None })
    }

    /// Parses the incidence text format: a header `q <order>` followed by one
    /// line per geometric line listing its point ids. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse_incidence(text: &str) -> Result<Self, GeometryError> {
        let mut rows = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = rows.next().ok_or_else(|| GeometryError::Malformed("empty input".into()))?;
        let q = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["q", order] => order
                .parse::<usize>()
                .map_err(|_| GeometryError::Malformed(format!("bad order in header {header:?}")))?,
            _ => return Err(GeometryError::Malformed(format!("expected header \"q <order>\", got {header:?}"))),
        };
        if q < 2 {
            return Err(GeometryError::Malformed(format!("order {q} is below 2")));
        }
        let lines = rows
            .map(|row| {
                row.split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>().map_err(|_| GeometryError::Malformed(format!("bad point id {tok:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_lines(q, lines)
    }

    /// Inverse of [`ProjectivePlane::parse_incidence`].
    pub fn to_incidence_text(&self) -> String {
        let mut out = format!("q {}\n", self.order);
        for pts in &self.line_points {
            let row: Vec<String> = pts.iter().map(|p| p.0.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> PlaneJson {
        PlaneJson {
            q: self.order,
            points: (0..self.size()).collect(),
            lines: self
                .line_points
                .iter()
                .enumerate()
                .map(|(id, pts)| LineJson { id, points: pts.iter().map(|p| p.0).collect() })
                .collect(),
        }
    }

    pub fn from_json(json: &PlaneJson) -> Result<Self, GeometryError> {
        let n = plane_size(json.q);
        if json.points != (0..n).collect::<Vec<_>>() {
            return Err(GeometryError::Malformed(format!("point ids must be 0..{n} in order")));
        }
        let mut lines = json.lines.clone();
        lines.sort_by_key(|l| l.id);
        if lines.iter().enumerate().any(|(i, l)| l.id != i) {
            return Err(GeometryError::Malformed("line ids must be 0..n without gaps".into()));
        }
        Self::from_lines(json.q, lines.into_iter().map(|l| l.points).collect())
    }

    /// The dual plane: lines become points and points become lines, with the
    /// same ids. Coordinates, when present, swap along.
    pub fn dual(&self) -> Self {
        let n = self.size();
        let mut incidence = vec![false; n * n];
        for p in 0..n {
            for l in 0..n {
                incidence[l * n + p] = self.incidence[p * n + l];
            }
        }
        ProjectivePlane {
            order: self.order,
            line_points: self.point_lines.iter().map(|ls| ls.iter().map(|l| Point(l.0)).collect()).collect(),
            point_lines: self.line_points.iter().map(|ps| ps.iter().map(|p| Line(p.0)).collect()).collect(),
            incidence,
            join: self.meet.clone(),
            meet: self.join.clone(),
            coords: self.coords.as_ref().map(|c| Coordinates { points: c.lines.clone(), lines: c.points.clone() }),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of points, which equals the number of lines.
    pub fn size(&self) -> usize {
        self.line_points.len()
    }

    pub fn points(&self) -> impl DoubleEndedIterator<Item = Point> + ExactSizeIterator {
        (0..self.size()).map(Point)
    }

    pub fn lines(&self) -> impl DoubleEndedIterator<Item = Line> + ExactSizeIterator {
        (0..self.size()).map(Line)
    }

    /// `I(y)`, sorted.
    pub fn points_on(&self, line: Line) -> &[Point] {
        &self.line_points[line.0]
    }

    pub fn lines_through(&self, point: Point) -> &[Line] {
        &self.point_lines[point.0]
    }

    #[inline]
    pub fn incident(&self, point: Point, line: Line) -> bool {
        self.incidence[point.0 * self.size() + line.0]
    }

    /// FNV-1a hash of the order and line lists; identifies a plane serialization.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: usize| {
            for b in (x as u64).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.order);
        for pts in &self.line_points {
            feed(usize::MAX);
            pts.iter().for_each(|p| feed(p.0));
        }
        h
    }

    pub fn coordinates(&self) -> Option<&Coordinates> {
        self.coords.as_ref()
    }

    pub fn line_through(&self, p1: Point, p2: Point) -> Result<Line, GeometryError> {
        self.check_point(p1)?;
        self.check_point(p2)?;
        if p1 == p2 {
            return Err(GeometryError::SamePoint(p1));
        }
        Ok(self.join_unchecked(p1, p2))
    }

    pub fn meet(&self, l1: Line, l2: Line) -> Result<Point, GeometryError> {
        self.check_line(l1)?;
        self.check_line(l2)?;
        if l1 == l2 {
            return Err(GeometryError::SameLine(l1));
        }
        Ok(self.meet_unchecked(l1, l2))
    }

    /// Table lookup for `line_through`; the points must be distinct.
    #[inline]
    pub fn join_unchecked(&self, p1: Point, p2: Point) -> Line {
        debug_assert_ne!(p1, p2);
        Line(self.join[p1.0 * self.size() + p2.0] as usize)
    }

    /// Table lookup for `meet`; the lines must be distinct.
    #[inline]
    pub fn meet_unchecked(&self, l1: Line, l2: Line) -> Point {
        debug_assert_ne!(l1, l2);
        Point(self.meet[l1.0 * self.size() + l2.0] as usize)
    }

    /// Points as black vertices `0..n`, lines as white vertices `n..2n`.
    pub fn incidence_graph(&self) -> BipartiteGraph {
        let edges: Vec<(usize, usize)> =
            self.line_points.iter().enumerate().flat_map(|(l, pts)| pts.iter().map(move |p| (p.0, l))).collect();
        BipartiteGraph::from_edges(self.size(), self.size(), &edges)
    }

    fn check_point(&self, p: Point) -> Result<(), GeometryError> {
        if p.0 < self.size() {
            Ok(())
        } else {
            Err(GeometryError::UnknownPoint(p))
        }
    }

    fn check_line(&self, l: Line) -> Result<(), GeometryError> {
        if l.0 < self.size() {
            Ok(())
        } else {
            Err(GeometryError::UnknownLine(l))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneJson {
    pub q: usize,
    pub points: Vec<usize>,
    pub lines: Vec<LineJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineJson {
    pub id: usize,
    pub points: Vec<usize>,
}
