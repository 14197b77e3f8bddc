//! Input file formats. Every file is a JSON object with `"schema": 1`.
//!
//! ```text
//! observable  {"schema": 1, "dim": d, "eigenvectors": [[[re, im], ...], ...], "labels": [...]}
//! channel     {"schema": 1, "dim_in": n, "dim_out": m, "kraus": [matrix, ...]}
//! apparatus   {"schema": 1, "kraus_xz": [[matrix, ...], ...], "x_labels": [...], "z_labels": [...]}
//!          or {"schema": 1, "channel": {"dim_in", "dim_out", "kraus"}, "factors": [factor, ...]}
//!             factor = {"kind": "quantum", "dim": r} | {"kind": "classical", "role": "x"|"z", "labels": [...]}
//! sweep       {"schema": 1, "family": name, "grid": [p, ...], "observables": [observable, observable]}
//! ```
//!
//! Matrices are arrays of rows of `[re, im]` pairs. `labels` may be omitted
//! from an observable, giving `"0"`, `"1"`, ...

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::channels::{joint_apparatus, Apparatus, OutputFactor, Outcome, QuantumChannel};
use crate::opcore::serial::{matrix_from_json, vector_from_json, MatrixJson, VectorJson};
use crate::opcore::{default_labels, ComplexMatrix, Observable};
use crate::uncertainty::Family;

pub const SCHEMA_VERSION: u64 = 1;

/// An input problem, reported with the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Loaded<T> = std::result::Result<T, InputError>;

fn fail<T>(path: &Path, msg: impl std::fmt::Display) -> Loaded<T> {
    Err(InputError(format!("{}: {msg}", path.display())))
}

fn read_json(path: &Path) -> Loaded<Value> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(path, format!("cannot read file: {e}")),
    };
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return fail(path, format!("not valid JSON: {e}")),
    };
    match value.get("schema").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => Ok(value),
        Some(v) => fail(path, format!("field `schema`: unsupported version {v}, expected {SCHEMA_VERSION}")),
        None => fail(path, "field `schema`: missing or not an integer"),
    }
}

fn parse<T: DeserializeOwned>(path: &Path, what: &str, value: Value) -> Loaded<T> {
    serde_json::from_value(value).or_else(|e| fail(path, format!("{what}: {e}")))
}

#[derive(Debug, Deserialize)]
struct ObservableBody {
    dim: usize,
    eigenvectors: Vec<VectorJson>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
struct ChannelBody {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<MatrixJson>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RoleJson {
    X,
    Z,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FactorJson {
    Quantum { dim: usize },
    Classical { role: RoleJson, labels: Vec<String> },
}

#[derive(Debug, Deserialize)]
struct JointBody {
    kraus_xz: Vec<Vec<MatrixJson>>,
    x_labels: Vec<String>,
    z_labels: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct GeneralBody {
    channel: ChannelBody,
    factors: Vec<FactorJson>,
}

#[derive(Debug, Deserialize)]
struct SweepBody {
    family: String,
    grid: Vec<f64>,
    observables: Vec<ObservableBody>,
}

fn build_observable(path: &Path, field: &str, body: ObservableBody) -> Loaded<Observable> {
    if body.dim == 0 {
        return fail(path, format!("field `{field}dim`: must be positive"));
    }
    if body.eigenvectors.len() != body.dim {
        return fail(
            path,
            format!("field `{field}eigenvectors`: expected {} vectors, found {}", body.dim, body.eigenvectors.len()),
        );
    }
    for (k, v) in body.eigenvectors.iter().enumerate() {
        if v.len() != body.dim {
            return fail(path, format!("field `{field}eigenvectors[{k}]`: expected length {}, found {}", body.dim, v.len()));
        }
        if v.iter().flatten().any(|x| !x.is_finite()) {
            return fail(path, format!("field `{field}eigenvectors[{k}]`: non-finite entry"));
        }
    }
    let labels = body.labels.unwrap_or_else(|| default_labels(body.dim));
    let vectors = body.eigenvectors.iter().map(vector_from_json).collect();
    Observable::new(vectors, labels).or_else(|e| fail(path, format!("field `{field}eigenvectors`/`labels`: {e}")))
}

fn build_matrix(path: &Path, field: &str, m: &MatrixJson, rows: usize, cols: usize) -> Loaded<ComplexMatrix> {
    let out = matrix_from_json(m).or_else(|e| fail(path, format!("field `{field}`: {e}")))?;
    if out.shape() != (rows, cols) {
        return fail(
            path,
            format!("field `{field}`: expected a {rows}x{cols} matrix, found {}x{}", out.nrows(), out.ncols()),
        );
    }
    Ok(out)
}

fn build_channel(path: &Path, prefix: &str, body: ChannelBody) -> Loaded<QuantumChannel> {
    if body.dim_in == 0 || body.dim_out == 0 {
        return fail(path, format!("fields `{prefix}dim_in`/`{prefix}dim_out`: must be positive"));
    }
    if body.kraus.is_empty() {
        return fail(path, format!("field `{prefix}kraus`: no Kraus operators"));
    }
    let kraus = body
        .kraus
        .iter()
        .enumerate()
        .map(|(k, m)| build_matrix(path, &format!("{prefix}kraus[{k}]"), m, body.dim_out, body.dim_in))
        .collect::<Loaded<Vec<_>>>()?;
    QuantumChannel::new(kraus).or_else(|e| fail(path, format!("field `{prefix}kraus`: {e}")))
}

pub fn load_observable(path: &Path) -> Loaded<Observable> {
    let value = read_json(path)?;
    let body = parse(path, "observable", value)?;
    build_observable(path, "", body)
}

pub fn load_channel(path: &Path) -> Loaded<QuantumChannel> {
    let value = read_json(path)?;
    let body = parse(path, "channel", value)?;
    build_channel(path, "", body)
}

pub fn load_apparatus(path: &Path) -> Loaded<Apparatus> {
    let value = read_json(path)?;
    if value.get("kraus_xz").is_some() {
        let body: JointBody = parse(path, "joint apparatus", value)?;
        let rows = body.kraus_xz.len();
        if rows == 0 || body.kraus_xz[0].is_empty() {
            return fail(path, "field `kraus_xz`: no Kraus operators");
        }
        let first = matrix_from_json(&body.kraus_xz[0][0]).or_else(|e| fail(path, format!("field `kraus_xz[0][0]`: {e}")))?;
        let (r, d) = first.shape();
        let mut kraus = Vec::with_capacity(rows);
        for (x, row) in body.kraus_xz.iter().enumerate() {
            let built = row
                .iter()
                .enumerate()
                .map(|(z, m)| build_matrix(path, &format!("kraus_xz[{x}][{z}]"), m, r, d))
                .collect::<Loaded<Vec<_>>>()?;
            kraus.push(built);
        }
        joint_apparatus(&kraus, body.x_labels, body.z_labels).or_else(|e| fail(path, format!("field `kraus_xz`: {e}")))
    } else if value.get("channel").is_some() {
        let body: GeneralBody = parse(path, "apparatus", value)?;
        let channel = build_channel(path, "channel.", body.channel)?;
        let factors = body
            .factors
            .into_iter()
            .map(|f| match f {
                FactorJson::Quantum { dim } => OutputFactor::quantum(dim),
                FactorJson::Classical { role, labels } => OutputFactor::classical(
                    match role {
                        RoleJson::X => Outcome::X,
                        RoleJson::Z => Outcome::Z,
                    },
                    labels,
                ),
            })
            .collect();
        Apparatus::new(channel, factors).or_else(|e| fail(path, format!("field `factors`: {e}")))
    } else {
        fail(path, "apparatus needs either `kraus_xz` or `channel` and `factors`")
    }
}

/// A validated sweep request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    pub grid: Vec<f64>,
    pub x: Observable,
    pub z: Observable,
}

pub fn load_sweep(path: &Path) -> Loaded<SweepSpec> {
    let value = read_json(path)?;
    let body: SweepBody = parse(path, "sweep spec", value)?;
    let family = body.family.parse::<Family>().or_else(|e| fail(path, format!("field `family`: {e}")))?;
    if body.grid.is_empty() {
        return fail(path, "field `grid`: empty parameter grid");
    }
    if let Some((k, p)) = body.grid.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
        return fail(path, format!("field `grid[{k}]`: {p} outside [0, 1]"));
    }
    let n = body.observables.len();
    if n != 2 {
        return fail(path, format!("field `observables`: expected 2 observables, found {n}"));
    }
    let mut obs = body.observables.into_iter();
    let x = build_observable(path, "observables[0].", obs.next().expect("two observables"))?;
    let z = build_observable(path, "observables[1].", obs.next().expect("two observables"))?;
    if x.dim() != z.dim() {
        return fail(path, format!("field `observables[1].dim`: expected {}, found {}", x.dim(), z.dim()));
    }
    Ok(SweepSpec { family, grid: body.grid, x, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn observable_errors_name_the_field() {
        let f = file(r#"{"schema": 1, "dim": 2, "eigenvectors": [[[1,0],[0,0]], [[1,0],[0,0]]]}"#);
        let err = load_observable(f.path()).unwrap_err().0;
        assert!(err.contains("eigenvectors") && err.contains("Gram entry"), "{err}");
        let f = file(r#"{"schema": 1, "dim": 2, "eigenvectors": [[[1,0],[0,0]], [[0,0]]]}"#);
        assert!(load_observable(f.path()).unwrap_err().0.contains("eigenvectors[1]"));
        let f = file(r#"{"dim": 2, "eigenvectors": []}"#);
        assert!(load_observable(f.path()).unwrap_err().0.contains("schema"));
    }

    #[test]
    fn channel_shapes_and_trace_preservation() {
        let f = file(r#"{"schema": 1, "dim_in": 2, "dim_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#);
        assert_eq!(load_channel(f.path()).unwrap().dim_out(), 2);
        let f = file(r#"{"schema": 1, "dim_in": 2, "dim_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#);
        assert!(load_channel(f.path()).unwrap_err().0.contains("trace preserving"));
        let f = file(r#"{"schema": 1, "dim_in": 3, "dim_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#);
        assert!(load_channel(f.path()).unwrap_err().0.contains("kraus[0]"));
    }

    #[test]
    fn sweep_validation() {
        let obs = r#"{"dim": 2, "eigenvectors": [[[1,0],[0,0]], [[0,0],[1,0]]]}"#;
        let spec = |family: &str, grid: &str| {
            file(&format!(r#"{{"schema": 1, "family": "{family}", "grid": {grid}, "observables": [{obs}, {obs}]}}"#))
        };
        assert_eq!(load_sweep(spec("mixed_ideal_joint", "[0, 0.5]").path()).unwrap().grid.len(), 2);
        assert!(load_sweep(spec("mixed_ideal_joint", "[]").path()).unwrap_err().0.contains("grid"));
        assert!(load_sweep(spec("mixed_ideal_joint", "[1.5]").path()).unwrap_err().0.contains("grid[0]"));
        assert!(load_sweep(spec("nope", "[0]").path()).unwrap_err().0.contains("family"));
    }
}
