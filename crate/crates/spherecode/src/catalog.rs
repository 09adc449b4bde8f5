//! Catalog of best known packing densities, used as the reference scale
//! for discrepancy measurements and membership verdicts.
//!
//! Records are loaded from JSON or taken from the built-in table. A record
//! either pins the best known value in a dimension (`known-max`) or
//! describes the best packing in a restricted class (lattice, periodic
//! with a bounded number of translates). All conclusions drawn from the
//! catalog are relative to it: it encodes the current state of knowledge,
//! not ground truth.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog JSON at line {line}, column {column}: {msg}")]
    Schema { line: usize, column: usize, msg: String },
    #[error("catalog has no known-max record for dimension {0}")]
    MissingDimension(u32),
    #[error(
        "packing density {measured} exceeds the catalog maximum {maximum} in dimension {dim}; \
         either the packing is invalid or the catalog is stale"
    )]
    CatalogViolation { measured: f64, maximum: f64, dim: u32 },
}

/// Packing class a record speaks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackingKind {
    /// Lattice packings.
    Lattice,
    /// Periodic packings with at most the given number of translates.
    Periodic(u32),
    /// Best known over all packings.
    KnownMax,
}

impl Serialize for PackingKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PackingKind::Lattice => s.serialize_str("lattice"),
            PackingKind::Periodic(n) => s.serialize_str(&format!("periodic-{n}")),
            PackingKind::KnownMax => s.serialize_str("known-max"),
        }
    }
}

impl<'de> Deserialize<'de> for PackingKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.as_str() {
            "lattice" => Ok(PackingKind::Lattice),
            "known-max" => Ok(PackingKind::KnownMax),
            other => {
                if let Some(n) = other.strip_prefix("periodic-") {
                    let n: u32 = n.parse().map_err(|_| {
                        serde::de::Error::custom(format!("bad periodic kind '{other}'"))
                    })?;
                    if n == 0 {
                        return Err(serde::de::Error::custom("periodic-0 is empty"));
                    }
                    Ok(PackingKind::Periodic(n))
                } else {
                    Err(serde::de::Error::custom(format!("unknown packing kind '{other}'")))
                }
            }
        }
    }
}

impl fmt::Display for PackingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackingKind::Lattice => write!(f, "lattice"),
            PackingKind::Periodic(n) => write!(f, "periodic-{n}"),
            PackingKind::KnownMax => write!(f, "known-max"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingRecord {
    pub dim: u32,
    pub kind: PackingKind,
    /// Normalised density Delta.
    pub density: f64,
    /// Center density delta.
    pub center_density: f64,
    pub description: String,
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub version: String,
    pub records: Vec<PackingRecord>,
}

impl Catalog {
    /// The known-max record of a dimension, if any.
    pub fn known_max(&self, dim: u32) -> Option<&PackingRecord> {
        self.records
            .iter()
            .find(|r| r.dim == dim && r.kind == PackingKind::KnownMax)
    }

    pub fn records_of(&self, dim: u32) -> impl Iterator<Item = &PackingRecord> {
        self.records.iter().filter(move |r| r.dim == dim)
    }
}

/// Loads a catalog from JSON, mapping schema problems to line/column.
pub fn catalog_load(path: &Path) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CatalogError::Schema {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// Built-in catalog: best known densities in the dimensions the library's
/// experiments touch. Density values carry 17 significant digits.
pub fn default_catalog() -> Catalog {
    fn rec(
        dim: u32,
        kind: PackingKind,
        density: f64,
        center_density: f64,
        description: &str,
        source: &str,
    ) -> PackingRecord {
        PackingRecord {
            dim,
            kind,
            density,
            center_density,
            description: description.to_string(),
            source: source.to_string(),
        }
    }
    let records = vec![
        rec(1, PackingKind::KnownMax, 1.0, 0.5, "integers Z", "interval tiling"),
        rec(1, PackingKind::Lattice, 1.0, 0.5, "integers Z", "interval tiling"),
        rec(
            2,
            PackingKind::KnownMax,
            0.90689968211710893,
            0.28867513459481288,
            "hexagonal lattice",
            "classical; optimal in the plane",
        ),
        rec(
            2,
            PackingKind::Lattice,
            0.90689968211710893,
            0.28867513459481288,
            "hexagonal lattice",
            "classical; optimal among plane lattices",
        ),
        rec(
            3,
            PackingKind::KnownMax,
            0.74048048969306104,
            0.17677669529663688,
            "face-centered cubic",
            "sphere packing in 3 dimensions",
        ),
        rec(
            3,
            PackingKind::Lattice,
            0.74048048969306104,
            0.17677669529663688,
            "face-centered cubic",
            "optimal lattice in dimension 3",
        ),
        rec(4, PackingKind::Lattice, 0.61685027506808491, 0.125, "D4 checkerboard", "optimal lattice in dimension 4"),
        rec(
            5,
            PackingKind::Lattice,
            0.46525761330925864,
            0.088388347648318441,
            "D5 checkerboard",
            "optimal lattice in dimension 5",
        ),
        rec(
            6,
            PackingKind::Lattice,
            0.37294754558206494,
            0.072168783648703221,
            "E6 root lattice",
            "optimal lattice in dimension 6",
        ),
        rec(
            7,
            PackingKind::Lattice,
            0.29529787314571257,
            0.0625,
            "E7 root lattice",
            "optimal lattice in dimension 7",
        ),
        rec(
            8,
            PackingKind::KnownMax,
            0.25366950790104801,
            0.0625,
            "E8 root lattice",
            "sphere packing in 8 dimensions",
        ),
        rec(
            8,
            PackingKind::Lattice,
            0.25366950790104801,
            0.0625,
            "E8 root lattice",
            "optimal lattice in dimension 8",
        ),
        rec(
            10,
            PackingKind::KnownMax,
            0.099615782807708806,
            0.0390625,
            "best-known periodic packing P10c",
            "nonlattice record, center density 5/128",
        ),
        rec(
            10,
            PackingKind::Periodic(40),
            0.099615782807708806,
            0.0390625,
            "best-known periodic packing P10c, 40 translates",
            "nonlattice record, center density 5/128",
        ),
        rec(
            24,
            PackingKind::KnownMax,
            0.001929574309403923,
            1.0,
            "Leech lattice",
            "sphere packing in 24 dimensions",
        ),
        rec(
            24,
            PackingKind::Lattice,
            0.001929574309403923,
            1.0,
            "Leech lattice",
            "optimal lattice in dimension 24",
        ),
    ];
    Catalog { version: "builtin-1".to_string(), records }
}

/// Discrepancy of a measured density against the catalog's known maximum:
/// returns (gamma, 1 - gamma) with gamma = density / max. Densities beyond
/// the maximum (outside rounding slack) are flagged as violations.
pub fn discrepancy(density: f64, dim: u32, catalog: &Catalog) -> Result<(f64, f64), CatalogError> {
    let rec = catalog.known_max(dim).ok_or(CatalogError::MissingDimension(dim))?;
    let gamma = density / rec.density;
    if gamma > 1.0 + 1e-12 {
        return Err(CatalogError::CatalogViolation {
            measured: density,
            maximum: rec.density,
            dim,
        });
    }
    Ok((gamma, 1.0 - gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packings::{center_density, Lattice, Packing, PeriodicSet};

    #[test]
    fn default_catalog_is_consistent() {
        let cat = default_catalog();
        assert_eq!(cat.version, "builtin-1");
        for dim in [1, 2, 3, 8, 10, 24] {
            assert!(cat.known_max(dim).is_some(), "known max for dim {dim}");
        }
        assert!(cat.known_max(4).is_none(), "dim 4 has no proven maximum");
        // Delta and delta must agree through the ball volume.
        for r in &cat.records {
            let vol = crate::geom::ball_volume(r.dim as usize).unwrap();
            assert!(
                (r.center_density * vol - r.density).abs() < 1e-14,
                "dim {} {}: {} * {} vs {}",
                r.dim,
                r.kind,
                r.center_density,
                vol,
                r.density
            );
        }
        let p10 = cat.known_max(10).unwrap();
        assert_eq!(p10.center_density, 5.0 / 128.0);
    }

    #[test]
    fn measured_lattices_match_catalog() {
        let cat = default_catalog();
        let hex = center_density(&Packing::Lattice(Lattice::hexagonal())).unwrap();
        let (gamma, gap) = discrepancy(hex.density, 2, &cat).unwrap();
        assert!((gamma - 1.0).abs() < 1e-12);
        assert!(gap.abs() < 1e-12);

        let e8 = center_density(&Packing::Lattice(Lattice::e8())).unwrap();
        let (gamma, _) = discrepancy(e8.density, 8, &cat).unwrap();
        assert!((gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_lattice_discrepancy_in_dim3() {
        let cat = default_catalog();
        let z3 = center_density(&Packing::Lattice(Lattice::zn(3))).unwrap();
        let (gamma, _) = discrepancy(z3.density, 3, &cat).unwrap();
        // (pi/6) / (pi/sqrt 18) = sqrt(18)/6 = 1/sqrt 2.
        assert!((gamma - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn two_point_family_hits_its_gamma() {
        let cat = default_catalog();
        for (num, den) in [(1i64, 2i64), (2, 5), (9, 10)] {
            let p = Packing::Periodic(PeriodicSet::two_point_line(crate::exact::rat(num, den)));
            let rep = center_density(&p).unwrap();
            let (gamma, _) = discrepancy(rep.density, 1, &cat).unwrap();
            assert!((gamma - num as f64 / den as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn violations_and_missing_dims_error() {
        let cat = default_catalog();
        assert!(matches!(
            discrepancy(1.01, 1, &cat),
            Err(CatalogError::CatalogViolation { .. })
        ));
        assert!(matches!(
            discrepancy(0.5, 11, &cat),
            Err(CatalogError::MissingDimension(11))
        ));
        // Rounding slack: a hair over 1.0 passes.
        assert!(discrepancy(1.0 + 1e-13, 1, &cat).is_ok());
    }

    #[test]
    fn json_roundtrip_and_schema_errors() {
        let cat = default_catalog();
        let json = serde_json::to_string_pretty(&cat).unwrap();
        let dir = std::env::temp_dir().join(format!("spherecode-cat-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("catalog.json");
        std::fs::write(&path, &json).unwrap();
        let loaded = catalog_load(&path).unwrap();
        assert_eq!(loaded.records.len(), cat.records.len());
        assert_eq!(loaded.known_max(24).unwrap().density, cat.known_max(24).unwrap().density);

        std::fs::write(&path, "{\"version\": \"x\", \"records\": [{\"dim\": 2}]}").unwrap();
        match catalog_load(&path) {
            Err(CatalogError::Schema { line, .. }) => assert!(line >= 1),
            other => panic!("expected schema error, got {other:?}"),
        }
        std::fs::write(&path, "{\"version\": \"x\", \"records\": [{\"dim\": 2, \"kind\": \"periodic-0\", \"density\": 0.5, \"center_density\": 0.1, \"description\": \"\", \"source\": \"\"}]}").unwrap();
        assert!(catalog_load(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
