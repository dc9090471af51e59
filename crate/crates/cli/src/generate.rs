use std::collections::BTreeMap;

use anyhow::{bail, Result};
use varilab::flowdecomp::{raster_pair, seeded_pair, PairParams, TransverseFlowPair};
use varilab::normalize::seeded_shear;
use varilab::planefield::{crossing_tubes, io, GridSpec};
use varilab::varifold::{mesh, TriVarifold};
use varilab::Integrand;

pub const GENERATORS: [&str; 6] = ["icosphere", "torus", "graph-over-square", "crossing-tubes", "transverse-flow-pair", "sheared-integrand"];

/// A named output file.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, text: String) -> Self {
        Artifact { name: name.into(), bytes: text.into_bytes() }
    }

    pub fn json<T: serde::Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        Ok(Artifact::text(name, text))
    }
}

pub struct Params<'a> {
    map: &'a BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a BTreeMap<String, f64>) -> Self {
        Params { map }
    }

    pub fn f64(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => bail!("parameter {key} = {v} is not a count"),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.map.keys() {
            if !allowed.contains(&k.as_str()) {
                bail!("unknown parameter {k:?} (expected one of {allowed:?})");
            }
        }
        Ok(())
    }
}

/// Mesh generators by name.
pub fn mesh(name: &str, params: &BTreeMap<String, f64>) -> Result<TriVarifold> {
    let p = Params::new(params);
    Ok(match name {
        "icosphere" => {
            p.check_keys(&["subdiv"])?;
            let subdiv = p.usize("subdiv", 3)?;
            if subdiv > 7 {
                bail!("icosphere subdivision {subdiv} above 7");
            }
            mesh::icosphere(subdiv)
        }
        "torus" => {
            p.check_keys(&["R", "r", "nu", "nv"])?;
            mesh::torus(p.f64("R", 2.0), p.f64("r", 0.5), p.usize("nu", 128)?, p.usize("nv", 64)?)?
        }
        "graph-over-square" => {
            p.check_keys(&["n", "amp"])?;
            mesh::graph_over_square(p.usize("n", 32)?, p.f64("amp", 0.3))?
        }
        _ => bail!("unknown mesh generator {name:?}"),
    })
}

pub fn flow_pair(seed: u64, sign_violating: bool) -> Result<TransverseFlowPair> {
    let params = if sign_violating { PairParams::sign_violating() } else { PairParams::admissible() };
    Ok(seeded_pair(seed, &params)?)
}

pub fn sheared_integrand(seed: u64) -> Result<Integrand> {
    Ok(Integrand::pushforward(Integrand::area(), &seeded_shear(seed))?)
}

fn field_bytes(f: &varilab::planefield::GridField) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    io::write_binary(f, &mut out)?;
    Ok(out)
}

/// Files produced by generator `name`.
pub fn generate(name: &str, params: &BTreeMap<String, f64>, seed: u64, grid: Option<usize>) -> Result<Vec<Artifact>> {
    let p = Params::new(params);
    Ok(match name {
        "icosphere" | "torus" | "graph-over-square" => {
            let v = mesh(name, params)?;
            let stem = if name == "graph-over-square" { "graph" } else { name };
            vec![Artifact::text(&format!("{stem}.off"), mesh::to_off(&v))]
        }
        "crossing-tubes" => {
            p.check_keys(&["eps", "angle"])?;
            let g = GridSpec::square(grid.unwrap_or(256), 0.0, 1.0)?;
            let (s, t) = crossing_tubes(&g, p.f64("eps", 0.05), p.f64("angle", 0.0))?;
            vec![Artifact { name: "s.bin".into(), bytes: field_bytes(&s)? }, Artifact { name: "t.bin".into(), bytes: field_bytes(&t)? }]
        }
        "transverse-flow-pair" => {
            p.check_keys(&["sign_violating", "half_width"])?;
            let pair = flow_pair(seed, p.f64("sign_violating", 0.0) != 0.0)?;
            let (s, t) = raster_pair(&pair, grid.unwrap_or(128), p.f64("half_width", 1.2))?;
            vec![
                Artifact::json("pair.json", &pair)?,
                Artifact { name: "s.bin".into(), bytes: field_bytes(&s)? },
                Artifact { name: "t.bin".into(), bytes: field_bytes(&t)? },
            ]
        }
        "sheared-integrand" => {
            p.check_keys(&[])?;
            vec![Artifact::json("integrand.json", &sheared_integrand(seed)?)?]
        }
        _ => bail!("unknown generator {name:?} (expected one of {GENERATORS:?})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let none = BTreeMap::new();
        for name in GENERATORS {
            let params = if name == "torus" { BTreeMap::from([("nu".to_string(), 12.0), ("nv".to_string(), 6.0)]) } else { none.clone() };
            let a = generate(name, &params, 5, Some(64)).unwrap();
            let b = generate(name, &params, 5, Some(64)).unwrap();
            assert!(!a.is_empty());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.name, y.name);
                assert_eq!(x.bytes, y.bytes);
            }
        }
    }

    #[test]
    fn rejects_unknown_names_and_parameters() {
        assert!(generate("cube", &BTreeMap::new(), 0, None).is_err());
        assert!(generate("icosphere", &BTreeMap::from([("radius".to_string(), 2.0)]), 0, None).is_err());
        assert!(generate("icosphere", &BTreeMap::from([("subdiv".to_string(), 1.5)]), 0, None).is_err());
    }
}
