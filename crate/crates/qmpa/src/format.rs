//! JSON encoding of models and states.
//!
//! Complex numbers are `[re, im]`, matrices are row-major nested arrays.

use serde::{Deserialize, Serialize};

use qmpa_core::model::{ContinuousModel, DiscreteModel};
use qmpa_core::{Model, Operator, Tolerances, C64};

use crate::error::{Error, Result};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Discrete,
    Continuous,
}

/// Partial tolerance overrides; missing fields keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peripheral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_pivot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<f64>,
}

impl ToleranceOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, mut t: Tolerances) -> Result<Tolerances> {
        let fields = [
            (self.hermitian, &mut t.hermitian, "hermitian"),
            (self.positivity, &mut t.positivity, "positivity"),
            (self.model, &mut t.model, "model"),
            (self.peripheral, &mut t.peripheral, "peripheral"),
            (self.cluster, &mut t.cluster, "cluster"),
            (self.kernel, &mut t.kernel, "kernel"),
            (self.eigen, &mut t.eigen, "eigen"),
            (self.gram_pivot, &mut t.gram_pivot, "gram_pivot"),
            (self.residual, &mut t.residual, "residual"),
            (self.defect, &mut t.defect, "defect"),
        ];
        for (value, slot, name) in fields {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Format(format!("tolerance {name} must be positive and finite")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kind: Kind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_preserving: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblads: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical_potential: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tstate: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "ToleranceOverrides::is_empty")]
    pub tolerances: ToleranceOverrides,
}

/// A parsed and validated model with its optional extras.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model,
    pub tstate: Option<Operator>,
    pub tolerances: Tolerances,
}

pub fn matrix_from_json(m: &JsonMatrix, dim: usize, what: &str) -> Result<Operator> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::Format(format!("{what}: expected a {dim}x{dim} matrix")));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in m {
        for &[re, im] in row {
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Format(format!("{what}: non-finite entry")));
            }
            entries.push(C64::new(re, im));
        }
    }
    Ok(Operator::from_rows(dim, &entries)?)
}

pub fn matrix_to_json(op: &Operator) -> JsonMatrix {
    let n = op.dim();
    (0..n).map(|i| (0..n).map(|j| clean(op.get(i, j))).collect()).collect()
}

/// `[re, im]` with negative zeros removed so output is stable.
pub fn clean(z: C64) -> [f64; 2] {
    [z.re + 0.0, z.im + 0.0]
}

pub fn parse_model(text: &str, base: Tolerances) -> Result<LoadedModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    load(&file, base)
}

pub fn load(file: &ModelFile, base: Tolerances) -> Result<LoadedModel> {
    let n = file.dim;
    if n == 0 {
        return Err(Error::Format("dim must be positive".into()));
    }
    let tol = file.tolerances.apply(base)?;
    let list = |ms: &Option<Vec<JsonMatrix>>, what: &str| -> Result<Vec<Operator>> {
        ms.iter()
            .flatten()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m, n, &format!("{what}[{i}]")))
            .collect()
    };
    let model = match file.kind {
        Kind::Discrete => {
            if file.hamiltonian.is_some() || file.lindblads.is_some() || file.optical_potential.is_some() {
                return Err(Error::Format("discrete model takes only kraus operators".into()));
            }
            let kraus = list(&file.kraus, "kraus")?;
            if kraus.is_empty() {
                return Err(Error::Format("discrete model needs at least one kraus operator".into()));
            }
            Model::from(DiscreteModel::new(kraus, file.trace_preserving, &tol)?)
        }
        Kind::Continuous => {
            if file.kraus.is_some() || file.trace_preserving.is_some() {
                return Err(Error::Format(
                    "continuous model takes hamiltonian, lindblads and optical_potential".into(),
                ));
            }
            let h = match &file.hamiltonian {
                Some(m) => matrix_from_json(m, n, "hamiltonian")?,
                None => return Err(Error::Format("continuous model needs a hamiltonian".into())),
            };
            let ls = list(&file.lindblads, "lindblads")?;
            let g = file
                .optical_potential
                .as_ref()
                .map(|m| matrix_from_json(m, n, "optical_potential"))
                .transpose()?;
            Model::from(ContinuousModel::new(h, ls, g, &tol)?)
        }
    };
    let tstate = file
        .tstate
        .as_ref()
        .map(|m| matrix_from_json(m, n, "tstate"))
        .transpose()?;
    Ok(LoadedModel {
        model,
        tstate,
        tolerances: tol,
    })
}

pub fn model_to_file(model: &Model, tstate: Option<&Operator>) -> ModelFile {
    let tstate = tstate.map(matrix_to_json);
    match model {
        Model::Discrete(d) => ModelFile {
            kind: Kind::Discrete,
            dim: d.dim(),
            kraus: Some(d.kraus().iter().map(matrix_to_json).collect()),
            trace_preserving: Some(d.is_trace_preserving()),
            hamiltonian: None,
            lindblads: None,
            optical_potential: None,
            tstate,
            tolerances: ToleranceOverrides::default(),
        },
        Model::Continuous(c) => {
            let g = c.optical_potential();
            ModelFile {
                kind: Kind::Continuous,
                dim: c.dim(),
                kraus: None,
                trace_preserving: None,
                hamiltonian: Some(matrix_to_json(c.hamiltonian())),
                lindblads: Some(c.lindblads().iter().map(matrix_to_json).collect()),
                optical_potential: (g.frobenius_norm() > 0.0).then(|| matrix_to_json(g)),
                tstate,
                tolerances: ToleranceOverrides::default(),
            }
        }
    }
}

pub fn model_to_json(model: &Model, tstate: Option<&Operator>) -> String {
    serde_json::to_string_pretty(&model_to_file(model, tstate)).expect("model files always serialize")
}

/// State files: either a bare matrix or `{"dim": N, "state": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Wrapped { dim: usize, state: JsonMatrix },
    Bare(JsonMatrix),
}

pub fn parse_state(text: &str) -> Result<Operator> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match file {
        StateFile::Wrapped { dim, state } => matrix_from_json(&state, dim, "state"),
        StateFile::Bare(m) => matrix_from_json(&m, m.len(), "state"),
    }
}

pub fn state_to_json(op: &Operator) -> String {
    serde_json::to_string_pretty(&StateFile::Wrapped {
        dim: op.dim(),
        state: matrix_to_json(op),
    })
    .expect("states always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_discrete() {
        let tol = Tolerances::default();
        let a = Operator::from_rows(
            2,
            &[
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let m = Model::from(DiscreteModel::new(vec![a], Some(true), &tol).unwrap());
        let text = model_to_json(&m, None);
        let back = parse_model(&text, tol).unwrap();
        assert_eq!(back.model.generator_schrodinger(), m.generator_schrodinger());
    }

    #[test]
    fn rejects_negative_optical_potential() {
        let text = r#"{"kind":"continuous","dim":1,"hamiltonian":[[[0,0]]],"lindblads":[],
            "optical_potential":[[[-1,0]]]}"#;
        assert!(matches!(
            parse_model(text, Tolerances::default()),
            Err(Error::Core(qmpa_core::Error::InvariantViolation { .. }))
        ));
    }

    #[test]
    fn rejects_ragged_matrix() {
        let text = r#"{"kind":"discrete","dim":2,"kraus":[[[[1,0],[0,0]],[[0,0]]]]}"#;
        assert!(matches!(
            parse_model(text, Tolerances::default()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn tolerance_override() {
        let text = r#"{"kind":"discrete","dim":1,"kraus":[[[[1,0]]]],"tolerances":{"peripheral":1e-6}}"#;
        let m = parse_model(text, Tolerances::default()).unwrap();
        assert_eq!(m.tolerances.peripheral, 1e-6);
        let bad = r#"{"kind":"discrete","dim":1,"kraus":[[[[1,0]]]],"tolerances":{"nope":1}}"#;
        assert!(matches!(parse_model(bad, Tolerances::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn state_files() {
        let a = parse_state("[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]").unwrap();
        let b = parse_state(&state_to_json(&a)).unwrap();
        assert_eq!(a, b);
    }
}
