//! JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "entities": {
//!     "c2":  { "kind": "frobenius", "dim": 2, "mult": [[[1,0],[0,0],[0,0],[0,0]], ...], "unit": [[1,0],[1,0]] },
//!     "flip": { "kind": "cpm", "dim_in": 2, "dim_out": 2, "kraus": [[[[0,0],[1,0]],[[1,0],[0,0]]]] },
//!     "r":   { "kind": "relation", "data": [[0,1],[1,0]] }
//!   }
//! }
//! ```
//!
//! Complex entries are `[re, im]`. Frobenius structures over relations set
//! `"category": "rel"` and use `0`/`1` entries. A `cpstar` record names its
//! `dom` and `cod` structures and carries a `map`, a `kraus` witness, or both.

use std::collections::BTreeMap;
use std::path::Path;

use cpkit::{
    Bit, Complex64, ComplexMatrix, CpmMorphism, FrobeniusStructure, Matrix, Object, RelFrobeniusStructure, RelMorphism,
};
use serde::Deserialize;
use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),
    #[error("field `{field}`: {message}")]
    Header { field: String, message: String },
    #[error("entity `{entity}`, field `{field}`: {message}")]
    Entity {
        entity: String,
        field: String,
        message: String,
    },
    #[error("no entity named `{0}`")]
    Missing(String),
    #[error("entity `{name}` is a {found}, expected {expected}")]
    WrongKind {
        name: String,
        found: &'static str,
        expected: &'static str,
    },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Cell {
    Complex([f64; 2]),
    Flag(u8),
}

type Grid = Vec<Vec<Cell>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Category {
    #[default]
    Fhilb,
    Rel,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    version: u32,
    #[serde(default)]
    entities: BTreeMap<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawEntity {
    Matrix {
        data: Grid,
    },
    Frobenius {
        dim: usize,
        mult: Grid,
        unit: Vec<Cell>,
        #[serde(default)]
        carrier: Option<Vec<usize>>,
        #[serde(default)]
        category: Category,
    },
    Cpm {
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<Grid>,
    },
    Cpstar {
        dom: String,
        cod: String,
        #[serde(default)]
        map: Option<Grid>,
        #[serde(default)]
        kraus: Option<Vec<Grid>>,
    },
    Relation {
        data: Vec<Vec<u8>>,
    },
}

#[derive(Clone, Debug)]
pub enum Frobenius {
    Fhilb(FrobeniusStructure),
    Rel(RelFrobeniusStructure),
}

/// A CP* record; `dom`/`cod` name FHilb Frobenius entities.
#[derive(Clone, Debug)]
pub struct CpStarEntity {
    pub dom: String,
    pub cod: String,
    pub map: Option<ComplexMatrix>,
    pub witness: Option<CpmMorphism>,
}

#[derive(Clone, Debug)]
pub enum Entity {
    Matrix(ComplexMatrix),
    Frobenius(Frobenius),
    Cpm(CpmMorphism),
    CpStar(CpStarEntity),
    Relation(RelMorphism),
}

impl Entity {
    pub fn kind(&self) -> &'static str {
        match self {
            Entity::Matrix(_) => "matrix",
            Entity::Frobenius(_) => "frobenius",
            Entity::Cpm(_) => "cpm",
            Entity::CpStar(_) => "cpstar",
            Entity::Relation(_) => "relation",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Model {
    pub version: u32,
    pub entities: BTreeMap<String, Entity>,
}

pub fn parse_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Model::from_json_str(&text)
}

struct Ctx<'a> {
    entity: &'a str,
}

impl Ctx<'_> {
    fn err(&self, field: impl Into<String>, message: impl Into<String>) -> ModelError {
        ModelError::Entity {
            entity: self.entity.to_string(),
            field: field.into(),
            message: message.into(),
        }
    }

    fn complex(&self, cell: Cell, field: &str) -> Result<Complex64, ModelError> {
        match cell {
            Cell::Complex([re, im]) if re.is_finite() && im.is_finite() => Ok(Complex64::new(re, im)),
            Cell::Complex(_) => Err(self.err(field, "entry is not finite")),
            Cell::Flag(_) => Err(self.err(field, "expected a complex entry [re, im]")),
        }
    }

    fn bit(&self, cell: Cell, field: &str) -> Result<Bit, ModelError> {
        match cell {
            Cell::Flag(0) => Ok(Bit(false)),
            Cell::Flag(1) => Ok(Bit(true)),
            _ => Err(self.err(field, "expected 0 or 1")),
        }
    }

    fn grid<S: cpkit::Scalar>(
        &self,
        grid: &[Vec<Cell>],
        field: &str,
        shape: Option<(usize, usize)>,
        entry: impl Fn(&Self, Cell, &str) -> Result<S, ModelError>,
    ) -> Result<Matrix<S>, ModelError> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(self.err(field, "matrix is empty"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (i, row) in grid.iter().enumerate() {
            if row.len() != cols {
                return Err(self.err(
                    format!("{field}[{i}]"),
                    format!("row has {} entries, expected {cols}", row.len()),
                ));
            }
            for (j, &cell) in row.iter().enumerate() {
                data.push(entry(self, cell, &format!("{field}[{i}][{j}]"))?);
            }
        }
        if let Some((r, c)) = shape {
            if (rows, cols) != (r, c) {
                return Err(self.err(field, format!("shape is {rows}x{cols}, expected {r}x{c}")));
            }
        }
        Ok(Matrix::new(rows, cols, data).expect("rows checked rectangular"))
    }

    fn complex_grid(
        &self,
        grid: &[Vec<Cell>],
        field: &str,
        shape: Option<(usize, usize)>,
    ) -> Result<ComplexMatrix, ModelError> {
        self.grid(grid, field, shape, |c, cell, f| c.complex(cell, f))
    }

    fn kraus(&self, slices: &[Grid], field: &str, dim_in: usize, dim_out: usize) -> Result<CpmMorphism, ModelError> {
        if slices.is_empty() {
            return Err(self.err(field, "at least one slice is required"));
        }
        let kraus = slices
            .iter()
            .enumerate()
            .map(|(x, s)| self.complex_grid(s, &format!("{field}[{x}]"), Some((dim_out, dim_in))))
            .collect::<Result<Vec<_>, _>>()?;
        CpmMorphism::new(dim_in, dim_out, kraus).map_err(|e| self.err(field, e.to_string()))
    }

    fn positive(&self, value: usize, field: &str) -> Result<usize, ModelError> {
        if value == 0 {
            Err(self.err(field, "must be at least 1"))
        } else {
            Ok(value)
        }
    }
}

fn convert(name: &str, raw: RawEntity) -> Result<Entity, ModelError> {
    let ctx = Ctx { entity: name };
    Ok(match raw {
        RawEntity::Matrix { data } => Entity::Matrix(ctx.complex_grid(&data, "data", None)?),
        RawEntity::Frobenius {
            dim,
            mult,
            unit,
            carrier,
            category,
        } => {
            let d = ctx.positive(dim, "dim")?;
            let carrier = match carrier {
                None => Object::simple(d),
                Some(factors) => {
                    let obj = Object::new(factors).map_err(|e| ctx.err("carrier", e.to_string()))?;
                    if obj.dim() != d {
                        return Err(ctx.err("carrier", format!("factors multiply to {}, expected {d}", obj.dim())));
                    }
                    obj
                }
            };
            let unit_grid: Grid = unit.into_iter().map(|c| vec![c]).collect();
            match category {
                Category::Fhilb => {
                    let m = ctx.complex_grid(&mult, "mult", Some((d, d * d)))?;
                    let u = ctx.complex_grid(&unit_grid, "unit", Some((d, 1)))?;
                    let s = FrobeniusStructure::new(carrier, m, u).map_err(|e| ctx.err("mult", e.to_string()))?;
                    Entity::Frobenius(Frobenius::Fhilb(s))
                }
                Category::Rel => {
                    let m = ctx.grid(&mult, "mult", Some((d, d * d)), |c, cell, f| c.bit(cell, f))?;
                    let u = ctx.grid(&unit_grid, "unit", Some((d, 1)), |c, cell, f| c.bit(cell, f))?;
                    let s = RelFrobeniusStructure::new(carrier, m, u).map_err(|e| ctx.err("mult", e.to_string()))?;
                    Entity::Frobenius(Frobenius::Rel(s))
                }
            }
        }
        RawEntity::Cpm { dim_in, dim_out, kraus } => {
            let din = ctx.positive(dim_in, "dim_in")?;
            let dout = ctx.positive(dim_out, "dim_out")?;
            Entity::Cpm(ctx.kraus(&kraus, "kraus", din, dout)?)
        }
        RawEntity::Cpstar { dom, cod, map, kraus } => {
            if map.is_none() && kraus.is_none() {
                return Err(ctx.err("map", "a cpstar record needs `map`, `kraus`, or both"));
            }
            let map = map.map(|m| ctx.complex_grid(&m, "map", None)).transpose()?;
            // Slice shapes depend on the structures; checked once all entities are loaded.
            let witness = kraus
                .map(|k| {
                    let first = k
                        .first()
                        .ok_or_else(|| ctx.err("kraus", "at least one slice is required"))?;
                    let probe = ctx.complex_grid(first, "kraus[0]", None)?;
                    ctx.kraus(&k, "kraus", probe.cols(), probe.rows())
                })
                .transpose()?;
            Entity::CpStar(CpStarEntity { dom, cod, map, witness })
        }
        RawEntity::Relation { data } => {
            let grid: Grid = data
                .into_iter()
                .map(|row| row.into_iter().map(Cell::Flag).collect())
                .collect();
            let m = ctx.grid(&grid, "data", None, |c, cell, f| c.bit(cell, f))?;
            Entity::Relation(RelMorphism::from_matrix(m))
        }
    })
}

impl Model {
    pub fn from_json_str(text: &str) -> Result<Model, ModelError> {
        let value: Value = serde_json::from_str(text).map_err(ModelError::Json)?;
        let raw: RawModel = serde_path_to_error::deserialize(value).map_err(|e| ModelError::Header {
            field: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        if raw.version != FORMAT_VERSION {
            return Err(ModelError::Header {
                field: "version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", raw.version),
            });
        }
        let mut entities = BTreeMap::new();
        for (name, value) in raw.entities {
            let parsed: RawEntity = serde_path_to_error::deserialize(value).map_err(|e| ModelError::Entity {
                entity: name.clone(),
                field: e.path().to_string(),
                message: e.into_inner().to_string(),
            })?;
            let entity = convert(&name, parsed)?;
            entities.insert(name, entity);
        }
        let model = Model {
            version: raw.version,
            entities,
        };
        model.link_cpstar()?;
        Ok(model)
    }

    fn link_cpstar(&self) -> Result<(), ModelError> {
        for (name, entity) in &self.entities {
            let Entity::CpStar(c) = entity else { continue };
            let ctx = Ctx { entity: name };
            let structure = |field: &str, target: &str| match self.entities.get(target) {
                Some(Entity::Frobenius(Frobenius::Fhilb(s))) => Ok(s.dim()),
                Some(other) => Err(ctx.err(
                    field,
                    format!("`{target}` is a {}, expected an FHilb frobenius", other.kind()),
                )),
                None => Err(ctx.err(field, format!("no entity named `{target}`"))),
            };
            let da = structure("dom", &c.dom)?;
            let db = structure("cod", &c.cod)?;
            if let Some(m) = &c.map {
                if m.shape() != (db, da) {
                    return Err(ctx.err("map", format!("shape is {}x{}, expected {db}x{da}", m.rows(), m.cols())));
                }
            }
            if let Some(w) = &c.witness {
                if (w.dim_out(), w.dim_in()) != (db, da) {
                    return Err(ctx.err(
                        "kraus",
                        format!("slices are {}x{}, expected {db}x{da}", w.dim_out(), w.dim_in()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Entity, ModelError> {
        self.entities
            .get(name)
            .ok_or_else(|| ModelError::Missing(name.to_string()))
    }

    fn wrong(&self, name: &str, expected: &'static str) -> ModelError {
        match self.entities.get(name) {
            Some(e) => ModelError::WrongKind {
                name: name.to_string(),
                found: e.kind(),
                expected,
            },
            None => ModelError::Missing(name.to_string()),
        }
    }

    pub fn frobenius(&self, name: &str) -> Result<&Frobenius, ModelError> {
        match self.get(name)? {
            Entity::Frobenius(f) => Ok(f),
            _ => Err(self.wrong(name, "a frobenius structure")),
        }
    }

    pub fn fhilb_frobenius(&self, name: &str) -> Result<&FrobeniusStructure, ModelError> {
        match self.frobenius(name)? {
            Frobenius::Fhilb(s) => Ok(s),
            Frobenius::Rel(_) => Err(ModelError::WrongKind {
                name: name.to_string(),
                found: "rel frobenius structure",
                expected: "an FHilb frobenius structure",
            }),
        }
    }

    pub fn cpm(&self, name: &str) -> Result<&CpmMorphism, ModelError> {
        match self.get(name)? {
            Entity::Cpm(c) => Ok(c),
            _ => Err(self.wrong(name, "a cpm morphism")),
        }
    }

    pub fn cpstar(&self, name: &str) -> Result<&CpStarEntity, ModelError> {
        match self.get(name)? {
            Entity::CpStar(c) => Ok(c),
            _ => Err(self.wrong(name, "a cpstar morphism")),
        }
    }

    /// FHilb structures in name order.
    pub fn fhilb_structures(&self) -> Vec<(&str, &FrobeniusStructure)> {
        self.entities
            .iter()
            .filter_map(|(n, e)| match e {
                Entity::Frobenius(Frobenius::Fhilb(s)) => Some((n.as_str(), s)),
                _ => None,
            })
            .collect()
    }

    pub fn cpms(&self) -> Vec<(&str, &CpmMorphism)> {
        self.entities
            .iter()
            .filter_map(|(n, e)| match e {
                Entity::Cpm(c) => Some((n.as_str(), c)),
                _ => None,
            })
            .collect()
    }

    pub fn cpstars(&self) -> Vec<(&str, &CpStarEntity)> {
        self.entities
            .iter()
            .filter_map(|(n, e)| match e {
                Entity::CpStar(c) => Some((n.as_str(), c)),
                _ => None,
            })
            .collect()
    }
}

/// Row-major nested `[re, im]` arrays, the input encoding.
pub fn encode_matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| {
                            let z = m.get(i, j);
                            json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// A `cpm` entity record for `w`.
pub fn encode_cpm(w: &CpmMorphism) -> Value {
    json!({
        "kind": "cpm",
        "dim_in": w.dim_in(),
        "dim_out": w.dim_out(),
        "kraus": w.kraus().iter().map(encode_matrix).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2_json() -> Value {
        let mut mult = vec![vec![json!([0.0, 0.0]); 4]; 2];
        mult[0][0] = json!([1.0, 0.0]);
        mult[1][3] = json!([1.0, 0.0]);
        json!({"kind": "frobenius", "dim": 2, "mult": mult, "unit": [[1.0, 0.0], [1.0, 0.0]]})
    }

    fn model(entities: Value) -> Result<Model, ModelError> {
        Model::from_json_str(&json!({"version": 1, "entities": entities}).to_string())
    }

    #[test]
    fn empty_model() {
        let m = model(json!({})).unwrap();
        assert!(m.entities.is_empty());
        let m = Model::from_json_str(r#"{"version": 1}"#).unwrap();
        assert!(m.entities.is_empty());
    }

    #[test]
    fn classical_structure_loads() {
        let m = model(json!({ "c2": c2_json() })).unwrap();
        let s = m.fhilb_frobenius("c2").unwrap();
        assert_eq!(s, &FrobeniusStructure::classical(2).unwrap());
    }

    #[test]
    fn wrong_slice_shape_names_the_entity() {
        let bad = json!({"kind": "cpm", "dim_in": 2, "dim_out": 2, "kraus": [[[[1, 0], [0, 0]]]]});
        let err = model(json!({ "chan": bad })).unwrap_err();
        match &err {
            ModelError::Entity { entity, field, .. } => {
                assert_eq!(entity, "chan");
                assert_eq!(field, "kraus[0]");
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("chan"));
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        let mut extra = c2_json();
        extra["colour"] = json!("red");
        let err = model(json!({ "c2": extra })).unwrap_err().to_string();
        assert!(err.contains("c2") && err.contains("colour"), "{err}");

        let err = model(json!({ "x": {"kind": "tensor", "data": []} }))
            .unwrap_err()
            .to_string();
        assert!(err.contains("`x`") && err.contains("tensor"), "{err}");

        let err = Model::from_json_str(r#"{"version": 1, "entities": {}, "extra": 0}"#).unwrap_err();
        assert!(matches!(err, ModelError::Header { .. }));
    }

    #[test]
    fn entry_paths_are_reported() {
        let bad = json!({"kind": "matrix", "data": [[[1, 0], [0, 0]], [[0, 0], 7]]});
        let err = model(json!({ "m": bad })).unwrap_err().to_string();
        assert!(err.contains("`m`") && err.contains("data[1][1]"), "{err}");
        let ragged = json!({"kind": "matrix", "data": [[[1, 0], [0, 0]], [[0, 0]]]});
        let err = model(json!({ "m": ragged })).unwrap_err().to_string();
        assert!(err.contains("data[1]"), "{err}");
    }

    #[test]
    fn version_is_checked() {
        let err = Model::from_json_str(r#"{"version": 2, "entities": {}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("version"), "{err}");
        assert!(matches!(Model::from_json_str("{"), Err(ModelError::Json(_))));
    }

    #[test]
    fn rel_structures_and_relations() {
        let z2 = json!({
            "kind": "frobenius", "category": "rel", "dim": 2,
            "mult": [[1, 0, 0, 1], [0, 1, 1, 0]], "unit": [1, 0]
        });
        let m = model(json!({ "z2": z2, "r": {"kind": "relation", "data": [[0, 1], [1, 0]]} })).unwrap();
        assert!(matches!(m.frobenius("z2").unwrap(), Frobenius::Rel(_)));
        let Entity::Relation(r) = m.get("r").unwrap() else {
            panic!()
        };
        assert!(r.relates(0, 1) && !r.relates(0, 0));

        let bad = json!({"kind": "relation", "data": [[0, 2]]});
        let err = model(json!({ "r": bad })).unwrap_err().to_string();
        assert!(err.contains("data[0][1]"), "{err}");
    }

    #[test]
    fn cpstar_links_to_structures() {
        let ok = json!({"kind": "cpstar", "dom": "c2", "cod": "c2", "map": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]});
        let m = model(json!({ "c2": c2_json(), "id": ok })).unwrap();
        assert_eq!(m.cpstar("id").unwrap().dom, "c2");

        let dangling = json!({"kind": "cpstar", "dom": "nope", "cod": "c2", "map": [[[1, 0]]]});
        let err = model(json!({ "c2": c2_json(), "f": dangling }))
            .unwrap_err()
            .to_string();
        assert!(err.contains("`f`") && err.contains("dom"), "{err}");

        let shape = json!({"kind": "cpstar", "dom": "c2", "cod": "c2", "map": [[[1, 0]]]});
        let err = model(json!({ "c2": c2_json(), "f": shape })).unwrap_err().to_string();
        assert!(err.contains("map") && err.contains("2x2"), "{err}");

        let empty = json!({"kind": "cpstar", "dom": "c2", "cod": "c2"});
        assert!(model(json!({ "c2": c2_json(), "f": empty })).is_err());
    }

    #[test]
    fn kind_lookups() {
        let m = model(json!({ "c2": c2_json() })).unwrap();
        assert!(matches!(
            m.cpm("c2"),
            Err(ModelError::WrongKind { found: "frobenius", .. })
        ));
        assert!(matches!(m.cpm("zz"), Err(ModelError::Missing(_))));
    }

    #[test]
    fn encoded_cpm_reloads() {
        let w = CpmMorphism::identity(2);
        let m = model(json!({ "w": encode_cpm(&w) })).unwrap();
        assert_eq!(m.cpm("w").unwrap(), &w);
    }
}
