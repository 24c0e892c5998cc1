use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Categorical,
    #[serde(alias = "cumulative")]
    CumulativeNumeric,
    #[serde(alias = "noncumulative", alias = "non_cumulative", alias = "non_cumulative_numeric")]
    NoncumulativeNumeric,
}

impl VariableKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, VariableKind::Categorical)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_table: Option<String>,
}

impl Variable {
    pub fn new(name: &str, kind: VariableKind) -> Self {
        Variable {
            name: name.to_string(),
            kind,
            source_table: None,
        }
    }
}

/// Ordered set of variables with unique names.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Variable>", into = "Vec<Variable>")]
pub struct VariableSchema {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl PartialEq for VariableSchema {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
    }
}

impl TryFrom<Vec<Variable>> for VariableSchema {
    type Error = Error;

    fn try_from(v: Vec<Variable>) -> Result<Self> {
        VariableSchema::new(v)
    }
}

impl From<VariableSchema> for Vec<Variable> {
    fn from(s: VariableSchema) -> Self {
        s.variables
    }
}

/// Accepted on-disk layouts of a schema file.
#[derive(Deserialize)]
#[serde(untagged)]
enum SchemaFile {
    List(Vec<Variable>),
    Wrapped { variables: Vec<Variable> },
    Map(std::collections::BTreeMap<String, VariableKind>),
}

impl VariableSchema {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::Schema("empty variable name".into()));
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(VariableSchema { variables, index })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.index_of(name).map(|i| &self.variables[i])
    }

    /// Parses a schema from JSON. Accepts a list of variables, an object with a
    /// `variables` list, or a plain `name -> kind` map (sorted by name).
    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<SchemaFile>(text) {
            Ok(SchemaFile::List(v)) | Ok(SchemaFile::Wrapped { variables: v }) => VariableSchema::new(v),
            Ok(SchemaFile::Map(m)) => {
                VariableSchema::new(m.into_iter().map(|(name, kind)| Variable { name, kind, source_table: None }).collect())
            }
            Err(e) => Err(Error::Schema(format!("cannot parse schema: {e}"))),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        VariableSchema::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.variables).expect("schema serializes")
    }
}
