//! JSON forms of instances and profiles.
//!
//! ```json
//! {"agents": ["0", "5/2", "-1"], "items": ["1", "3", "7/3"]}
//! {"takers": ["0", "10"], "givers": ["1", "11"]}
//! {"rankings": [[1, 2], [2, 1]]}
//! ```
//!
//! Coordinates are strings (`"p/q"`, decimal or integer); plain integer JSON
//! numbers are accepted on input. Rankings use 1-based item ids. Output is
//! canonical, so equal values always serialize to identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, OrdinalProfile};
use crate::rational::{self, Rational};
use crate::twosided::TwoSidedInstance;

pub trait JsonFormat: Sized {
    fn to_json(&self) -> String;
    fn from_json(text: &str) -> Result<Self>;
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(with = "rational::serde_seq")]
    agents: Vec<Rational>,
    #[serde(with = "rational::serde_seq")]
    items: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoSidedDoc {
    #[serde(with = "rational::serde_seq")]
    takers: Vec<Rational>,
    #[serde(with = "rational::serde_seq")]
    givers: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    rankings: Vec<Vec<usize>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("plain data serializes");
    s.push('\n');
    s
}

fn sizes(field_a: &str, a: usize, field_b: &str, b: usize) -> Result<()> {
    if a == 0 {
        return Err(Error::parse(field_a, "must not be empty"));
    }
    if a != b {
        return Err(Error::parse(
            field_b,
            format!("has {b} entries but {field_a} has {a}"),
        ));
    }
    Ok(())
}

impl JsonFormat for Instance {
    fn to_json(&self) -> String {
        render(&InstanceDoc {
            agents: self.agents().to_vec(),
            items: self.items().to_vec(),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(json_error)?;
        sizes("agents", doc.agents.len(), "items", doc.items.len())?;
        Instance::new(doc.agents, doc.items)
    }
}

impl JsonFormat for TwoSidedInstance {
    fn to_json(&self) -> String {
        render(&TwoSidedDoc {
            takers: self.takers().to_vec(),
            givers: self.givers().to_vec(),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: TwoSidedDoc = serde_json::from_str(text).map_err(json_error)?;
        sizes("takers", doc.takers.len(), "givers", doc.givers.len())?;
        TwoSidedInstance::new(doc.takers, doc.givers)
    }
}

impl JsonFormat for OrdinalProfile {
    fn to_json(&self) -> String {
        render(&ProfileDoc {
            rankings: self
                .rankings()
                .iter()
                .map(|r| r.iter().map(|g| g + 1).collect())
                .collect(),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDoc = serde_json::from_str(text).map_err(json_error)?;
        let n = doc.rankings.len();
        if n == 0 {
            return Err(Error::parse("rankings", "must not be empty"));
        }
        let mut rankings = Vec::with_capacity(n);
        for (a, r) in doc.rankings.into_iter().enumerate() {
            let field = format!("rankings[{a}]");
            if r.len() != n {
                return Err(Error::parse(field, format!("has {} entries, expected {n}", r.len())));
            }
            let mut seen = vec![false; n];
            let mut zero_based = Vec::with_capacity(n);
            for (pos, g) in r.into_iter().enumerate() {
                if g == 0 || g > n || std::mem::replace(&mut seen[g - 1], true) {
                    return Err(Error::parse(
                        format!("{field}[{pos}]"),
                        format!("{g} is out of range 1..={n} or repeated; rankings must be permutations"),
                    ));
                }
                zero_based.push(g - 1);
            }
            rankings.push(zero_based);
        }
        OrdinalProfile::new(rankings)
    }
}

pub fn save<T: JsonFormat>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, value.to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load<T: JsonFormat>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    T::from_json(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn instance_round_trip_is_exact() {
        let inst = Instance::new(vec![ratio(1, 3), int(-2)], vec![ratio(7, 2), int(0)]).unwrap();
        let text = inst.to_json();
        assert!(text.contains("\"1/3\""));
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn accepts_numbers_and_decimals() {
        let inst = Instance::from_json(r#"{"agents": [1, "0.5"], "items": ["-3/6", 2]}"#).unwrap();
        assert_eq!(inst.agent(1), &ratio(1, 2));
        assert_eq!(inst.item(0), &ratio(-1, 2));
    }

    #[test]
    fn errors_point_at_the_problem() {
        let err = Instance::from_json("{\"agents\": [\"1\"],\n \"items\": [\"x\"]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let err = Instance::from_json(r#"{"agents": ["1"], "items": []}"#).unwrap_err();
        assert!(err.to_string().contains("items"));
        let err = Instance::from_json(r#"{"agents": ["1"], "things": []}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn profile_validation() {
        let p = OrdinalProfile::from_json(r#"{"rankings": [[2, 1], [1, 2]]}"#).unwrap();
        assert_eq!(p.ranking(0), &[1, 0]);
        assert_eq!(OrdinalProfile::from_json(&p.to_json()).unwrap(), p);
        let err = OrdinalProfile::from_json(r#"{"rankings": [[1, 1], [1, 2]]}"#).unwrap_err();
        assert!(err.to_string().contains("rankings[0][1]"), "{err}");
        assert!(OrdinalProfile::from_json(r#"{"rankings": [[1, 2]]}"#).is_err());
    }

    #[test]
    fn two_sided_round_trip() {
        let inst = TwoSidedInstance::from_ints(&[0, 10], &[1, 11]).unwrap();
        assert_eq!(TwoSidedInstance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn files_carry_the_path_in_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{").unwrap();
        let err = load::<Instance>(&path).unwrap_err();
        assert!(err.to_string().contains("bad.json"));
        let good = dir.path().join("good.json");
        let inst = Instance::from_ints(&[1], &[2]).unwrap();
        save(&good, &inst).unwrap();
        assert_eq!(load::<Instance>(&good).unwrap(), inst);
    }
}
