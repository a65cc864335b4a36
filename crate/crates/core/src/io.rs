//! JSON file formats.
//!
//! Instance: `{"agents": n, "goods": m, "valuations": [[...], ...]}` where an
//! entry is a nonnegative integer or a string `"p/q"`.
//! Solution: `{"bundles": [[...], ...], "prices": ["p/q", ...]}`.
//! All indices are 0-based.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{Allocation, Instance, PriceVector, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub goods: usize,
    pub valuations: Vec<Vec<Exact>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub bundles: Vec<Vec<usize>>,
    pub prices: Vec<Exact>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        if self.valuations.len() != self.agents {
            return Err(Error::invalid(format!(
                "\"agents\" is {} but {} valuation rows were given",
                self.agents,
                self.valuations.len()
            )));
        }
        Instance::new(self.goods, self.valuations)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile { agents: inst.agents(), goods: inst.goods(), valuations: inst.rows().to_vec() }
    }
}

impl SolutionFile {
    pub fn into_solution(self) -> Result<Solution> {
        let goods = self.prices.len();
        Solution::new(Allocation::new(self.bundles, goods)?, PriceVector::new(self.prices))
    }
}

impl From<&Solution> for SolutionFile {
    fn from(sol: &Solution) -> Self {
        SolutionFile { bundles: sol.allocation.bundles().to_vec(), prices: sol.prices.as_slice().to_vec() }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed {what} JSON: {e}")))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    parse::<InstanceFile>(text, "instance")?.into_instance()
}

pub fn parse_solution(text: &str) -> Result<Solution> {
    parse::<SolutionFile>(text, "solution")?.into_solution()
}

/// Integral values are written as JSON integers when they fit in `i64`.
fn value_json(v: &Exact) -> Value {
    use num_traits::ToPrimitive;
    match v.is_integer().then(|| v.numer().to_i64()).flatten() {
        Some(n) => Value::from(n),
        None => Value::from(v.to_string()),
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    let rows: Vec<Value> = inst.rows().iter().map(|r| Value::Array(r.iter().map(value_json).collect())).collect();
    let doc = serde_json::json!({
        "agents": inst.agents(),
        "goods": inst.goods(),
        "valuations": rows,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
    out.push('\n');
    out
}

pub fn solution_to_json(sol: &Solution) -> String {
    let mut out = serde_json::to_string_pretty(&SolutionFile::from(sol)).expect("solution serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{three_agent_instance, unbalanced_solution};

    #[test]
    fn instance_round_trip() {
        let inst = three_agent_instance();
        let text = instance_to_json(&inst);
        assert!(text.contains("[\n      6,"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn mixed_entries() {
        let inst = parse_instance(r#"{"agents": 2, "goods": 2, "valuations": [[1, "3/2"], ["0", 4]]}"#).unwrap();
        assert_eq!(inst.value(0, 1), &Exact::ratio(3, 2));
        assert_eq!(inst.value(1, 0), &Exact::zero());
        assert!(instance_to_json(&inst).contains("\"3/2\""));
    }

    #[test]
    fn rejects_bad_instances() {
        for text in [
            r#"{"agents": 3, "goods": 1, "valuations": [[1], [1]]}"#,
            r#"{"agents": 1, "goods": 2, "valuations": [[1]]}"#,
            r#"{"agents": 1, "goods": 1, "valuations": [[-1]]}"#,
            r#"{"agents": 1, "goods": 1, "valuations": [[0.5]]}"#,
            r#"{"agents": 1, "goods": 1, "valuations": [["1/0"]]}"#,
            r#"{"agents": 1, "goods": 1, "valuations": [[1]], "extra": true}"#,
            "not json",
        ] {
            assert!(matches!(parse_instance(text), Err(Error::InvalidInput(_))), "{text}");
        }
    }

    #[test]
    fn solution_round_trip() {
        let sol = unbalanced_solution();
        let text = solution_to_json(&sol);
        assert!(text.contains("\"6/1\""));
        assert_eq!(parse_solution(&text).unwrap(), sol);
    }

    #[test]
    fn rejects_bad_solutions() {
        assert!(parse_solution(r#"{"bundles": [[0], [0]], "prices": [1]}"#).is_err());
        assert!(parse_solution(r#"{"bundles": [[0]], "prices": [1, 1]}"#).is_err());
        assert!(parse_solution(r#"{"bundles": [[2]], "prices": [1]}"#).is_err());
    }
}
