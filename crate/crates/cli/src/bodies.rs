use std::path::Path;

use flagvol::flag_measure::Body;
use flagvol::polytope::{make_cross, make_cube, make_simplex, make_square4d, make_zonotope, Polytope};
use flagvol::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

pub const BUILTINS: &str = "cube3, cube4, simplex3, cross4, square4d, ball, ball<d>, zono:<file>, <polytope.json>";

/// A body plus the zonotope generators it was built from, if any.
#[derive(Clone, Debug)]
pub struct BodySpec {
    pub name: String,
    pub body: Body,
    pub generators: Option<Vec<DVector<f64>>>,
}

impl BodySpec {
    pub fn rotate(self, rho: &DMatrix<f64>) -> Result<BodySpec> {
        Ok(BodySpec {
            name: format!("{} (rotated)", self.name),
            body: self.body.rotate(rho)?,
            generators: self.generators.map(|g| g.iter().map(|v| rho * v).collect()),
        })
    }
}

fn unit_vectors(d: usize, count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|i| DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorFile {
    Bare(Vec<Vec<f64>>),
    Named { generators: Vec<Vec<f64>> },
}

fn read_generators(path: &Path) -> Result<Vec<DVector<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let gens = match serde_json::from_str::<GeneratorFile>(&text)? {
        GeneratorFile::Bare(g) | GeneratorFile::Named { generators: g } => g,
    };
    Ok(gens.into_iter().map(DVector::from_vec).collect())
}

/// Resolves a builtin name or file. A bare `ball` needs the dimension of the
/// other body, passed as `dim_hint`.
pub fn parse_body(spec: &str, dim_hint: Option<usize>) -> Result<BodySpec> {
    let named = |body: Polytope, generators| BodySpec {
        name: spec.to_string(),
        body: Body::Polytope(body),
        generators,
    };
    Ok(match spec {
        "cube3" => named(make_cube(3)?, Some(unit_vectors(3, 3))),
        "cube4" => named(make_cube(4)?, Some(unit_vectors(4, 4))),
        "simplex3" => named(make_simplex(3)?, None),
        "cross4" => named(make_cross(4)?, None),
        "square4d" => named(make_square4d()?, Some(unit_vectors(4, 2))),
        _ if spec.starts_with("ball") => {
            let d = match &spec[4..] {
                "" => dim_hint.ok_or_else(|| {
                    Error::Precondition("a bare `ball` needs the other body to fix the dimension".into())
                })?,
                n => n
                    .parse()
                    .map_err(|_| Error::Precondition(format!("unknown body `{spec}`")))?,
            };
            BodySpec {
                name: format!("ball{d}"),
                body: Body::unit_ball(d),
                generators: None,
            }
        }
        _ if spec.starts_with("zono:") => {
            let gens = read_generators(Path::new(&spec[5..]))?;
            named(make_zonotope(&gens)?, Some(gens))
        }
        _ => named(Polytope::load(Path::new(spec))?, None),
    })
}

/// Parses both bodies, letting a bare `ball` take the other one's dimension.
pub fn parse_pair(k_spec: &str, l_spec: &str) -> Result<(BodySpec, BodySpec)> {
    if k_spec == "ball" {
        let l = parse_body(l_spec, None)?;
        let k = parse_body(k_spec, Some(l.body.dim()))?;
        Ok((k, l))
    } else {
        let k = parse_body(k_spec, None)?;
        let l = parse_body(l_spec, Some(k.body.dim()))?;
        Ok((k, l))
    }
}
