//! On-disk record format (JSON) for spaces, definable sets, ideal maps,
//! models, and colength models, with conversions in both directions.
//!
//! Ordinals are written as literals ("w^2*3+w+5", "0"); a cell is
//! `{lo, hi, dmin, dmax}` where `lo` may be "-" (no lower bound) and `dmax`
//! may be "inf". Malformed records are parse errors; well-formed records
//! that violate a semantic invariant surface the owning module's error.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colength::{ColengthError, ColengthModel};
use crate::ideal::{IdealError, IdealMap};
use crate::model::{DomainModel, ModelError, Terminal};
use crate::ordinal::{Ordinal, OrdinalParseError};
use crate::sets::{Cell, DefinableSet, DegMax, SetError, Space};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad ordinal literal in {field}: {source}")]
    Literal {
        field: String,
        source: OrdinalParseError,
    },
    #[error("bad degree bound {0:?} (expected a natural or \"inf\")")]
    Degree(String),
    #[error("unknown terminal {0:?} (expected \"empty\" or \"stalled\")")]
    Terminal(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Colength(#[from] ColengthError),
}

impl TextError {
    /// Distinguishes records that fail to parse from records that parse but
    /// violate a semantic invariant.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            TextError::Json(_) | TextError::Literal { .. } | TextError::Degree(_) | TextError::Terminal(_)
        )
    }
}

fn literal(field: &str, s: &str) -> Result<Ordinal, TextError> {
    Ordinal::parse(s).map_err(|source| TextError::Literal {
        field: field.to_string(),
        source,
    })
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CellRec {
    #[serde(default = "CellRec::no_bound")]
    pub lo: String,
    pub hi: String,
    #[serde(default)]
    pub dmin: u32,
    #[serde(default = "CellRec::unbounded")]
    pub dmax: String,
}

impl CellRec {
    fn no_bound() -> String {
        "-".to_string()
    }

    fn unbounded() -> String {
        "inf".to_string()
    }

    pub fn to_cell(&self) -> Result<Cell, TextError> {
        let lo = if self.lo == "-" {
            None
        } else {
            Some(literal("lo", &self.lo)?)
        };
        let hi = literal("hi", &self.hi)?;
        let dmax = if self.dmax == "inf" {
            DegMax::Inf
        } else {
            let d: u32 = self
                .dmax
                .parse()
                .map_err(|_| TextError::Degree(self.dmax.clone()))?;
            DegMax::Fin(d)
        };
        Ok(Cell::new(lo, hi, self.dmin, dmax))
    }

    pub fn from_cell(c: &Cell) -> CellRec {
        CellRec {
            lo: c.lo.as_ref().map_or_else(CellRec::no_bound, |o| o.to_string()),
            hi: c.hi.to_string(),
            dmin: c.dmin,
            dmax: match c.dmax {
                DegMax::Inf => CellRec::unbounded(),
                DegMax::Fin(d) => d.to_string(),
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SpaceRec {
    pub top: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<Vec<CellRec>>,
}

impl SpaceRec {
    pub fn to_space(&self) -> Result<Arc<Space>, TextError> {
        let top = literal("top", &self.top)?;
        match &self.carrier {
            None => Ok(Space::interval(top)),
            Some(recs) => {
                let cells = recs
                    .iter()
                    .map(|r| r.to_cell())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Space::with_carrier(top, cells)?)
            }
        }
    }

    pub fn from_space(space: &Space) -> SpaceRec {
        SpaceRec {
            top: space.top().to_string(),
            carrier: Some(space.carrier_cells().iter().map(CellRec::from_cell).collect()),
        }
    }
}

pub fn cells_to_set(
    space: &Arc<Space>,
    recs: &[CellRec],
) -> Result<DefinableSet, TextError> {
    let cells = recs
        .iter()
        .map(|r| r.to_cell())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DefinableSet::new(space, cells)?)
}

pub fn set_to_cells(set: &DefinableSet) -> Vec<CellRec> {
    set.normalized_cells().iter().map(CellRec::from_cell).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PieceRec {
    pub cell: CellRec,
    pub value: i64,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct IdealRec {
    pub space: SpaceRec,
    #[serde(default)]
    pub pieces: Vec<PieceRec>,
    #[serde(default)]
    pub overrides: Vec<(String, i64)>,
}

impl IdealRec {
    pub fn to_map(&self) -> Result<IdealMap, TextError> {
        let space = self.space.to_space()?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| Ok((p.cell.to_cell()?, p.value)))
            .collect::<Result<Vec<_>, TextError>>()?;
        let overrides = self
            .overrides
            .iter()
            .map(|(s, v)| Ok((literal("override", s)?, *v)))
            .collect::<Result<Vec<_>, TextError>>()?;
        Ok(IdealMap::new(&space, pieces, overrides)?)
    }

    pub fn from_map(map: &IdealMap) -> IdealRec {
        IdealRec {
            space: SpaceRec::from_space(map.space()),
            pieces: map
                .pieces()
                .iter()
                .map(|(c, v)| PieceRec {
                    cell: CellRec::from_cell(c),
                    value: *v,
                })
                .collect(),
            overrides: map
                .overrides()
                .iter()
                .map(|(x, v)| (x.to_string(), *v))
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ModelRec {
    pub space: SpaceRec,
    pub chain: Vec<Vec<CellRec>>,
    pub terminal: String,
}

impl ModelRec {
    pub fn to_model(&self) -> Result<DomainModel, TextError> {
        let space = self.space.to_space()?;
        let chain = self
            .chain
            .iter()
            .map(|recs| cells_to_set(&space, recs))
            .collect::<Result<Vec<_>, _>>()?;
        let terminal = match self.terminal.as_str() {
            "empty" => Terminal::Empty,
            "stalled" => Terminal::Stalled,
            other => return Err(TextError::Terminal(other.to_string())),
        };
        Ok(DomainModel::custom(&space, chain, terminal)?)
    }

    pub fn from_model(m: &DomainModel) -> ModelRec {
        ModelRec {
            space: SpaceRec::from_space(m.space()),
            chain: m.chain().iter().map(set_to_cells).collect(),
            terminal: match m.terminal() {
                Terminal::Empty => "empty".to_string(),
                Terminal::Stalled => "stalled".to_string(),
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ColengthRec {
    pub space: SpaceRec,
    pub delta: Vec<CellRec>,
}

impl ColengthRec {
    pub fn to_model(&self) -> Result<ColengthModel, TextError> {
        let space = self.space.to_space()?;
        let delta = cells_to_set(&space, &self.delta)?;
        Ok(ColengthModel::new(&space, delta)?)
    }

    pub fn from_model(cm: &ColengthModel) -> ColengthRec {
        ColengthRec {
            space: SpaceRec::from_space(cm.space()),
            delta: set_to_cells(cm.delta()),
        }
    }
}

pub fn parse_space(text: &str) -> Result<Arc<Space>, TextError> {
    let rec: SpaceRec = serde_json::from_str(text)?;
    rec.to_space()
}

pub fn parse_ideal(text: &str) -> Result<IdealMap, TextError> {
    let rec: IdealRec = serde_json::from_str(text)?;
    rec.to_map()
}

pub fn parse_model(text: &str) -> Result<DomainModel, TextError> {
    let rec: ModelRec = serde_json::from_str(text)?;
    rec.to_model()
}

pub fn parse_colength(text: &str) -> Result<ColengthModel, TextError> {
    let rec: ColengthRec = serde_json::from_str(text)?;
    rec.to_model()
}
