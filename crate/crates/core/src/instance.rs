//! JSON instance files.
//!
//! ```json
//! {"points": [{"id": "a", "weight": 1.0}, …],
//!  "chain": [["a"], ["a", "b"], …],
//!  "functions": {"f": [4, 1, 2]}}
//! ```
//!
//! Chain entries run smallest to largest; a leading empty set is optional.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{CoredSpace, FunctionOnU, MeasureSpace, OrderedCoreSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub points: Vec<PointRecord>,
    pub chain: Vec<Vec<String>>,
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<f64>>,
}

impl Instance {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instances serialize")
    }

    pub fn space(&self) -> Result<MeasureSpace> {
        MeasureSpace::new(
            self.points.iter().map(|p| p.id.clone()).collect(),
            self.points.iter().map(|p| p.weight).collect(),
        )
    }

    /// Chain as index sets, with `∅` prepended when omitted.
    pub fn core_spec(&self, space: &MeasureSpace) -> Result<OrderedCoreSpec> {
        let sets = self
            .chain
            .iter()
            .map(|set| {
                set.iter()
                    .map(|id| space.index_of(id).ok_or_else(|| Error::UnknownPointId(id.clone())))
                    .collect::<Result<BTreeSet<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OrderedCoreSpec::from_lists(sets))
    }

    pub fn cored_space(&self) -> Result<CoredSpace> {
        let space = self.space()?;
        let spec = self.core_spec(&space)?;
        CoredSpace::new(space, &spec)
    }

    /// Drops every point outside the union of the chain.
    pub fn restricted(&self) -> Result<Instance> {
        let space = self.space()?;
        let keep = self.core_spec(&space)?.union();
        let (_, old) = space.restrict(&keep)?;
        let functions = self
            .functions
            .iter()
            .map(|(name, values)| {
                if values.len() != space.len() {
                    return Err(Error::LengthMismatch { expected: space.len(), found: values.len() });
                }
                Ok((name.clone(), old.iter().map(|&i| values[i]).collect()))
            })
            .collect::<Result<_>>()?;
        Ok(Instance {
            points: old.iter().map(|&i| self.points[i].clone()).collect(),
            chain: self.chain.clone(),
            functions,
        })
    }

    /// Looks up a function by name; with no name, the only function or `f`.
    pub fn function(&self, cs: &CoredSpace, name: Option<&str>) -> Result<FunctionOnU> {
        let name = match name {
            Some(n) => n.to_owned(),
            None if self.functions.len() == 1 => self.functions.keys().next().cloned().expect("one entry"),
            None if self.functions.contains_key("f") => "f".to_owned(),
            None => {
                return Err(Error::Instance(format!(
                    "choose a function with --function (available: {})",
                    self.functions.keys().cloned().collect::<Vec<_>>().join(", ")
                )))
            }
        };
        let values = self.functions.get(&name).ok_or_else(|| Error::Instance(format!("no function named `{name}`")))?;
        cs.function(values.clone())
    }

    /// Serializable form of a cored space and some functions on it.
    pub fn from_parts<'a>(
        cs: &CoredSpace,
        functions: impl IntoIterator<Item = (&'a str, &'a FunctionOnU)>,
    ) -> Instance {
        let ids = cs.space().ids();
        let points = ids.iter().zip(cs.weights()).map(|(id, &weight)| PointRecord { id: id.clone(), weight }).collect();
        let chain = (0..cs.k()).map(|j| cs.atoms().chain_set(j).map(|u| ids[u].clone()).collect()).collect();
        let functions = functions.into_iter().map(|(n, f)| (n.to_owned(), f.values().to_vec())).collect();
        Instance { points, chain, functions }
    }
}
