//! Finite projective planes, their incidence graphs, generalized polygon
//! certification and graph isomorphism.

mod graph;
mod iso;
mod plane;

pub use graph::{certify_mgon, BipartiteGraph, MgonCertificate, MgonWitness, Verdict};
pub use iso::{graphs_isomorphic, Isomorphism, MAX_ISO_VERTICES};
pub use plane::{plane_size, AxiomViolation, Coordinates, Line, LineJson, PlaneJson, Point, ProjectivePlane};

use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("axiom violation")]
    Axiom(#[from] AxiomViolation),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("the two points coincide ({0})")]
    SamePoint(Point),
    #[error("the two lines coincide ({0})")]
    SameLine(Line),
    #[error("no point {0} in this plane")]
    UnknownPoint(Point),
    #[error("no line {0} in this plane")]
    UnknownLine(Line),
    #[error("graph has {vertices} vertices, isomorphism search is limited to {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

impl std::error::Error for AxiomViolation {}

/// PG(2,q) for a supported prime power `q`.
pub fn build_plane(q: u32) -> Result<ProjectivePlane, GeometryError> {
    let field = crate::field::Field::new(q)?;
    Ok(ProjectivePlane::desarguesian(&field))
}
