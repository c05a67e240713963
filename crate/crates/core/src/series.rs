//! Time series validation and sliding-triple Fermat–Torricelli smoothing.

use crate::error::{Error, Result, Warning};
use crate::geometry::{fermat_point, Point2, Triangle};
use crate::par;

/// Calendar year corresponding to `t = 0`.
pub const DEFAULT_YEAR_OFFSET: f64 = 2010.0;

/// Samples `(t, value)` with finite entries and strictly increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        self.samples.iter().map(|&p| Point2::from(p))
    }
}

pub fn validate(samples: Vec<(f64, f64)>) -> Result<TimeSeries> {
    if samples.is_empty() {
        return Err(Error::Validation {
            index: 0,
            reason: "series is empty".into(),
        });
    }
    for (i, &(t, v)) in samples.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Validation {
                index: i,
                reason: format!("non-finite sample ({t}, {v})"),
            });
        }
        if i > 0 && t <= samples[i - 1].0 {
            return Err(Error::Validation {
                index: i,
                reason: format!("t = {t} does not exceed previous t = {}", samples[i - 1].0),
            });
        }
    }
    Ok(TimeSeries { samples })
}

pub fn year_to_t(year: f64) -> f64 {
    year - DEFAULT_YEAR_OFFSET
}

pub fn t_to_year(t: f64) -> f64 {
    t + DEFAULT_YEAR_OFFSET
}

/// Triangles over consecutive sample triples `(k, k+1, k+2)`.
pub fn sliding_triangles(s: &TimeSeries) -> Result<Vec<Triangle>> {
    if s.len() < 3 {
        return Err(Error::TooShort { len: s.len() });
    }
    Ok(s.samples
        .windows(3)
        .map(|w| Triangle::new(w[0], w[1], w[2]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries {
    pub nodes: Vec<Point2>,
    /// Inclusive source sample range `(k, k + 2)` for each node.
    pub source_window: Vec<(usize, usize)>,
    pub warnings: Vec<Warning>,
}

impl SmoothedSeries {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        !self
            .warnings
            .iter()
            .any(|w| matches!(w, Warning::Monotonicity { .. }))
    }
}

/// Replaces every sliding triple by its Fermat–Torricelli point. Nodes keep
/// triangle order; a node whose abscissa does not exceed its predecessor's is
/// reported as a [`Warning::Monotonicity`].
pub fn smooth(s: &TimeSeries) -> Result<SmoothedSeries> {
    let triangles = sliding_triangles(s)?;
    Ok(assemble(par::map(&triangles, fermat_point)))
}

pub fn smooth_sequential(s: &TimeSeries) -> Result<SmoothedSeries> {
    let triangles = sliding_triangles(s)?;
    Ok(assemble(triangles.iter().map(fermat_point).collect()))
}

fn assemble(nodes: Vec<Point2>) -> SmoothedSeries {
    let source_window = (0..nodes.len()).map(|k| (k, k + 2)).collect();
    let warnings = nodes
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].x <= w[0].x)
        .map(|(k, _)| {
            log::debug!("smoothed abscissa at node {} is not increasing", k + 1);
            Warning::Monotonicity { index: k + 1 }
        })
        .collect();
    SmoothedSeries {
        nodes,
        source_window,
        warnings,
    }
}
