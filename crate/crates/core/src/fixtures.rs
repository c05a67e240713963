//! Bundled reference data: annual Czech inflation 2011–2021, its published
//! Fermat–Torricelli nodes, and the published ten-term exponential model.
//!
//! Each fixture is embedded from `fixtures/` and also mirrored here as
//! literal constants so drift in either copy is caught by tests.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::expfit::{is_conjugate_closed, is_negation_closed, ExpModel};
use crate::geometry::Point2;
use crate::io;
use crate::numerics::Complex;
use crate::series::TimeSeries;

pub const CZECH_INFLATION_CSV: &str = include_str!("../fixtures/czech_inflation.csv");
pub const TABLE2_NINE_CSV: &str = include_str!("../fixtures/table2_nine.csv");
pub const TABLE2_TEN_CSV: &str = include_str!("../fixtures/table2_ten.csv");
pub const EQ2_EXPONENTS_CSV: &str = include_str!("../fixtures/eq2_exponents.csv");
pub const EQ2_MODEL_JSON: &str = include_str!("../fixtures/eq2_model.json");
pub const SHA256SUMS: &str = include_str!("../fixtures/SHA256SUMS");

/// Year number (2011 = 1) and inflation in percent.
pub const INFLATION: [(f64, f64); 11] = [
    (1.0, 2.2),
    (2.0, 3.5),
    (3.0, 1.4),
    (4.0, 0.4),
    (5.0, 0.3),
    (6.0, 0.6),
    (7.0, 2.4),
    (8.0, 2.0),
    (9.0, 2.6),
    (10.0, 3.3),
    (11.0, 3.3),
];

/// Published smoothed nodes. The first nine are sliding-triple
/// Fermat–Torricelli points of [`INFLATION`]; the tenth is not (see
/// [`EXTRA_NODE`]).
pub const PUBLISHED_NODES: [(f64, f64); 10] = [
    (1.79128927, 2.46610159),
    (3.0, 1.4),
    (4.0, 0.4),
    (5.0, 0.3),
    (6.0, 0.6),
    (7.12649666, 2.10452453),
    (8.0, 2.0),
    (9.0, 2.6),
    (10.0, 3.3),
    (10.6380343, 3.57193156),
];

/// The published tenth node. Its value exceeds every sample of the last
/// window, so it lies outside that triangle and cannot be its
/// Fermat–Torricelli point.
pub const EXTRA_NODE: (f64, f64) = PUBLISHED_NODES[9];

/// Published model values at the ten node abscissae.
pub const PUBLISHED_CHECK_VALUES: [f64; 10] = [
    2.466101588,
    1.4,
    0.4,
    0.3,
    0.6,
    2.10452453,
    2.0,
    2.6,
    3.3,
    3.571931564,
];

#[allow(clippy::excessive_precision)]
/// Published model terms as `((coef re, coef im), (exponent re, exponent im))`.
pub const PUBLISHED_TERMS: [((f64, f64), (f64, f64)); 10] = [
    ((0.264901377876643, 0.0), (0.249672956416996, 0.0)),
    (
        (-0.007782663831297, 0.015129431149835),
        (0.076090999247734, 2.511250329378980),
    ),
    (
        (-0.007782663831297, -0.015129431149835),
        (0.076090999247734, -2.511250329378980),
    ),
    (
        (-1.671150941557596, -0.869131660330525),
        (-0.303576461438207, 1.138618581934044),
    ),
    (
        (-1.671150941557596, 0.869131660330525),
        (-0.303576461438207, -1.138618581934044),
    ),
    ((-0.014659833689592, 0.0), (-0.249672956416996, 0.0)),
    (
        (0.138184785734736, -0.180858361988375),
        (-0.076090999247734, -2.511250329378980),
    ),
    (
        (0.138184785734736, 0.180858361988375),
        (-0.076090999247734, 2.511250329378980),
    ),
    (
        (0.003015325281862, -0.001937822578385),
        (0.303576461438207, -1.138618581934044),
    ),
    (
        (0.003015325281862, 0.001937822578385),
        (0.303576461438207, 1.138618581934044),
    ),
];

pub fn published_exponents() -> Vec<Complex> {
    PUBLISHED_TERMS
        .iter()
        .map(|&(_, (re, im))| Complex::new(re, im))
        .collect()
}

pub fn published_coefficients() -> Vec<Complex> {
    PUBLISHED_TERMS
        .iter()
        .map(|&((re, im), _)| Complex::new(re, im))
        .collect()
}

fn embedded(name: &str) -> PathBuf {
    PathBuf::from(format!("<bundled>/{name}"))
}

/// The four data sets used by the reproduction check.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub series: TimeSeries,
    pub table2_nine: Vec<Point2>,
    pub table2_ten: Vec<Point2>,
    pub eq2_model: ExpModel,
}

impl FixtureSet {
    pub fn bundled() -> Result<Self> {
        Ok(FixtureSet {
            series: io::parse_series_csv(CZECH_INFLATION_CSV, &embedded("czech_inflation.csv"))?,
            table2_nine: io::parse_nodes_csv(TABLE2_NINE_CSV, &embedded("table2_nine.csv"))?,
            table2_ten: io::parse_nodes_csv(TABLE2_TEN_CSV, &embedded("table2_ten.csv"))?,
            eq2_model: io::ModelFile::from_json(EQ2_MODEL_JSON, &embedded("eq2_model.json"))?
                .to_model(),
        })
    }

    /// Loads the same file names from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        Ok(FixtureSet {
            series: io::read_series_csv(&dir.join("czech_inflation.csv"))?,
            table2_nine: io::read_nodes_csv(&dir.join("table2_nine.csv"))?,
            table2_ten: io::read_nodes_csv(&dir.join("table2_ten.csv"))?,
            eq2_model: io::read_model(&dir.join("eq2_model.json"))?.to_model(),
        })
    }
}

/// Checks that the published exponents are closed under negation and
/// conjugation, exactly.
pub fn assert_published_exponent_structure() -> Result<()> {
    let exponents = published_exponents();
    if !is_negation_closed(&exponents, 0.0) {
        return Err(Error::ConjugateClosure(
            "published exponents are not closed under negation".into(),
        ));
    }
    if !is_conjugate_closed(&exponents, 0.0) {
        return Err(Error::ConjugateClosure(
            "published exponents are not closed under conjugation".into(),
        ));
    }
    Ok(())
}
