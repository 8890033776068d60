//! Problem data: electrode laws, anode flux, conductivity and the boundary
//! partition, plus the two L-shape experiment configurations.

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::mesh::{build_lshape_initial, BoundaryLabel, BoundaryPartition, LabeledSegment, Mesh, Point};
use crate::{Error, Result};

/// Cathode law `f` with `f(0) = 0` and `f' >= alpha > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NonlinearLaw {
    /// `f(t) = c1 t + c2 t^3`
    Cubic { c1: f64, c2: f64 },
    /// Butler-Volmer: `f(t) = c5 (exp(c3 t) - exp(-c4 t))`
    ButlerVolmer { c3: f64, c4: f64, c5: f64 },
}

impl NonlinearLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NonlinearLaw::Cubic { c1, c2 } => c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite(),
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => [c3, c4, c5].iter().all(|c| *c > 0.0 && c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("law coefficients must be positive: {self:?}")))
        }
    }

    /// Largest admissible `|t|`; beyond it the exponentials overflow.
    pub fn argument_limit(&self) -> f64 {
        match *self {
            NonlinearLaw::Cubic { .. } => f64::INFINITY,
            NonlinearLaw::ButlerVolmer { c3, c4, .. } => 700.0 / c3.max(c4),
        }
    }

    fn guard(&self, t: f64) -> Result<()> {
        if t.is_finite() && t.abs() <= self.argument_limit() {
            Ok(())
        } else {
            Err(Error::Overflow(t))
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.guard(t)?;
        Ok(match *self {
            NonlinearLaw::Cubic { c1, c2 } => c1 * t + c2 * t * t * t,
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => c5 * ((c3 * t).exp() - (-c4 * t).exp()),
        })
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.guard(t)?;
        Ok(match *self {
            NonlinearLaw::Cubic { c1, c2 } => c1 + 3.0 * c2 * t * t,
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => c5 * (c3 * (c3 * t).exp() + c4 * (-c4 * t).exp()),
        })
    }

    /// `F(t) = int_0^t f`.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        self.guard(t)?;
        Ok(match *self {
            NonlinearLaw::Cubic { c1, c2 } => 0.5 * c1 * t * t + 0.25 * c2 * t.powi(4),
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => {
                // exp_m1 keeps F(t) accurate near t = 0
                c5 * ((c3 * t).exp_m1() / c3 + (-c4 * t).exp_m1() / c4)
            }
        })
    }

    /// `alpha = min_t f'(t)`.
    pub fn coercivity(&self) -> f64 {
        match *self {
            NonlinearLaw::Cubic { c1, .. } => c1,
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => {
                // f'' vanishes where c3^2 exp(c3 t) = c4^2 exp(-c4 t)
                let t = 2.0 * (c4 / c3).ln() / (c3 + c4);
                c5 * (c3 * (c3 * t).exp() + c4 * (-c4 * t).exp())
            }
        }
    }

    /// True when `f` is a polynomial (cubic law).
    pub fn is_polynomial(&self) -> bool {
        matches!(self, NonlinearLaw::Cubic { .. })
    }
}

/// Anode current density `g`.
#[derive(Clone)]
pub enum FluxData {
    Zero,
    Constant(f64),
    /// `g = x^2 + y^2`
    SquaredRadius,
    /// `g = sin(20 y)` on the left side `x = -1`, `sin(x) + cos(y)` elsewhere.
    Oscillatory,
    Custom(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for FluxData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FluxData::Zero => f.write_str("Zero"),
            FluxData::Constant(c) => write!(f, "Constant({c})"),
            FluxData::SquaredRadius => f.write_str("SquaredRadius"),
            FluxData::Oscillatory => f.write_str("Oscillatory"),
            FluxData::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl FluxData {
    pub fn value(&self, p: Point) -> f64 {
        match self {
            FluxData::Zero => 0.0,
            FluxData::Constant(c) => *c,
            FluxData::SquaredRadius => p.x * p.x + p.y * p.y,
            FluxData::Oscillatory => {
                if p.x == -1.0 {
                    (20.0 * p.y).sin()
                } else {
                    p.x.sin() + p.y.cos()
                }
            }
            FluxData::Custom(g) => g(p),
        }
    }

    /// Whether `g` is a polynomial of degree at most 2 (edge integrals of
    /// `g` against linears are then exact with three Gauss points).
    pub fn is_low_degree(&self) -> bool {
        matches!(self, FluxData::Zero | FluxData::Constant(_) | FluxData::SquaredRadius)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FluxData::Zero)
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub law: NonlinearLaw,
    pub flux: FluxData,
    /// Conductivity assigned to every element of generated meshes.
    pub sigma: f64,
    pub partition: BoundaryPartition,
}

fn segment(x0: f64, y0: f64, x1: f64, y1: f64, label: BoundaryLabel) -> LabeledSegment {
    LabeledSegment::new(Point::new(x0, y0), Point::new(x1, y1), label)
}

/// Cathode on the left side `{-1} x [-1, 1]`, anode elsewhere.
pub fn example1_partition() -> BoundaryPartition {
    BoundaryPartition {
        segments: vec![segment(-1.0, -1.0, -1.0, 1.0, BoundaryLabel::GammaC)],
        default: BoundaryLabel::GammaA,
    }
}

/// Cathode on the two sides meeting at the re-entrant corner,
/// `{0} x [-1, 0]` and `[0, 1] x {0}`; anode elsewhere.
pub fn example2_partition() -> BoundaryPartition {
    BoundaryPartition {
        segments: vec![
            segment(0.0, -1.0, 0.0, 0.0, BoundaryLabel::GammaC),
            segment(0.0, 0.0, 1.0, 0.0, BoundaryLabel::GammaC),
        ],
        default: BoundaryLabel::GammaA,
    }
}

impl ProblemSpec {
    /// The two L-shape experiments, both with `sigma = 1` and no insulated
    /// boundary.
    pub fn example(id: u32) -> Result<ProblemSpec> {
        match id {
            1 => Ok(ProblemSpec {
                law: NonlinearLaw::Cubic { c1: 1.0, c2: 1.0 },
                flux: FluxData::SquaredRadius,
                sigma: 1.0,
                partition: example1_partition(),
            }),
            2 => Ok(ProblemSpec {
                law: NonlinearLaw::ButlerVolmer { c3: 5.0, c4: 5.0, c5: 1.0 },
                flux: FluxData::Oscillatory,
                sigma: 1.0,
                partition: example2_partition(),
            }),
            other => Err(Error::UnknownExample(other)),
        }
    }

    /// Same data with the anode flux switched off.
    pub fn with_zero_flux(mut self) -> Self {
        self.flux = FluxData::Zero;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        self.partition.validate()
    }

    /// Uniform L-shape mesh of size `h` labeled by this problem's partition.
    pub fn initial_mesh(&self, h: f64) -> Result<Mesh> {
        build_lshape_initial(h, &self.partition, self.sigma)
    }

    /// Parses a `key = value` configuration (TOML syntax):
    ///
    /// ```text
    /// example = 2
    /// c3 = 4.0                       # law coefficient overrides
    /// sigma = 1.0
    /// gamma_c = [[0, -1, 0, 0]]      # replaces the cathode segments
    /// gamma_0 = [[-1, 1, 0, 1]]      # insulated segments
    /// ```
    pub fn from_config_str(text: &str) -> Result<ProblemSpec> {
        let cfg: ProblemConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut spec = ProblemSpec::example(cfg.example)?;
        spec.law = match spec.law {
            NonlinearLaw::Cubic { c1, c2 } => {
                if cfg.c3.or(cfg.c4).or(cfg.c5).is_some() {
                    return Err(Error::Parse("c3/c4/c5 apply only to the Butler-Volmer law".into()));
                }
                NonlinearLaw::Cubic { c1: cfg.c1.unwrap_or(c1), c2: cfg.c2.unwrap_or(c2) }
            }
            NonlinearLaw::ButlerVolmer { c3, c4, c5 } => {
                if cfg.c1.or(cfg.c2).is_some() {
                    return Err(Error::Parse("c1/c2 apply only to the cubic law".into()));
                }
                NonlinearLaw::ButlerVolmer {
                    c3: cfg.c3.unwrap_or(c3),
                    c4: cfg.c4.unwrap_or(c4),
                    c5: cfg.c5.unwrap_or(c5),
                }
            }
        };
        if let Some(s) = cfg.sigma {
            spec.sigma = s;
        }
        let to_segments = |list: &[[f64; 4]], label| list.iter().map(|s| segment(s[0], s[1], s[2], s[3], label)).collect::<Vec<_>>();
        if let Some(c) = &cfg.gamma_c {
            spec.partition.segments = to_segments(c, BoundaryLabel::GammaC);
        }
        if let Some(z) = &cfg.gamma_0 {
            spec.partition.segments.extend(to_segments(z, BoundaryLabel::Gamma0));
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemConfig {
    example: u32,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
    c4: Option<f64>,
    c5: Option<f64>,
    sigma: Option<f64>,
    gamma_c: Option<Vec<[f64; 4]>>,
    gamma_0: Option<Vec<[f64; 4]>>,
}
