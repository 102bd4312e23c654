//! JSON file formats. Rationals are written as `"p/q"` strings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::measure::{Instance, Interval, Valuation};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub agents: Vec<AgentFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentFile {
    #[serde(with = "rational::serde_vec_str")]
    pub breakpoints: Vec<Rational>,
    #[serde(with = "rational::serde_vec_str")]
    pub densities: Vec<Rational>,
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        Self {
            n: instance.n(),
            agents: instance
                .valuations()
                .iter()
                .map(|v| AgentFile {
                    breakpoints: v.breakpoints().to_vec(),
                    densities: v.densities().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.n != file.agents.len() {
            return Err(Error::Parse(format!(
                "instance declares n = {} but lists {} agents",
                file.n,
                file.agents.len()
            )));
        }
        let valuations = file
            .agents
            .into_iter()
            .map(|a| Valuation::new(a.breakpoints, a.densities))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(valuations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub pieces: Vec<Vec<[String; 2]>>,
}

impl From<&Allocation> for AllocationFile {
    fn from(allocation: &Allocation) -> Self {
        Self {
            pieces: allocation
                .pieces()
                .iter()
                .map(|p| {
                    p.intervals()
                        .iter()
                        .map(|i| [rational::format(i.lo()), rational::format(i.hi())])
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<AllocationFile> for Allocation {
    type Error = Error;

    fn try_from(file: AllocationFile) -> Result<Self> {
        let pieces = file
            .pieces
            .into_iter()
            .map(|intervals| {
                intervals
                    .into_iter()
                    .map(|[lo, hi]| Interval::new(rational::parse(&lo)?, rational::parse(&hi)?))
                    .collect::<Result<Vec<_>>>()
                    .map(Piece::from_intervals)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Allocation::new(pieces))
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}

pub fn parse_allocation(text: &str) -> Result<Allocation> {
    let file: AllocationFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn instance_json(instance: &Instance) -> String {
    to_json(&InstanceFile::from(instance))
}

pub fn allocation_json(allocation: &Allocation) -> String {
    to_json(&AllocationFile::from(allocation))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?)
}

pub fn read_allocation(path: &Path) -> Result<Allocation> {
    parse_allocation(&read(path)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
