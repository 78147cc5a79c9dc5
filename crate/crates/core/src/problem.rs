//! Problem data for the mutual-information optimal control problem, the
//! Gaussian policy and prior classes, validation and JSON configuration.
//!
//! The problem minimizes
//!
//! ```text
//! E[ Σ_k ½‖u_k‖²_{R_k} + ε D_KL[π_k(·|x_k) ‖ ρ_k] + ½‖x_T − μ_fin‖²_F ]
//! ```
//!
//! subject to `x_{k+1} = A_k x_k + B_k u_k + w_k`, `w_k ~ N(0, Σ_{w_k})` and
//! `x_0 ~ N(μ_ini, Σ_ini)`.

use std::fs;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{MiocpError, Result};
use crate::gaussian::Gaussian;
use crate::linalg::{self, matrix_from_rows, matrix_to_rows, Matrix, Vector, RCOND_MIN};

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub horizon: usize,
    pub a: Vec<Matrix>,
    pub b: Vec<Matrix>,
    pub sigma_w: Vec<Matrix>,
    pub r: Vec<Matrix>,
    pub f: Matrix,
    pub epsilon: f64,
    pub mu_ini: Vector,
    pub sigma_ini: Matrix,
    pub mu_fin: Vector,
    /// Broadcast initial prior for the alternating solver; `N(0, I)` when absent.
    pub prior_init: Option<Gaussian>,
}

impl ProblemSpec {
    /// A system whose matrices are the same at every step.
    #[allow(clippy::too_many_arguments)]
    pub fn time_invariant(
        horizon: usize,
        a: Matrix,
        b: Matrix,
        sigma_w: Matrix,
        r: Matrix,
        f: Matrix,
        epsilon: f64,
        mu_ini: Vector,
        sigma_ini: Matrix,
        mu_fin: Vector,
    ) -> Self {
        ProblemSpec {
            horizon,
            a: vec![a; horizon],
            b: vec![b; horizon],
            sigma_w: vec![sigma_w; horizon],
            r: vec![r; horizon],
            f,
            epsilon,
            mu_ini,
            sigma_ini,
            mu_fin,
            prior_init: None,
        }
    }

    /// The two-state, single-input benchmark: `T = 50`,
    /// `A = [[0.9, 0.2], [0.1, 1.1]]`, `B = [0; 0.2]`, `Σ_w = 10⁻³ I`,
    /// `R = I`, `F = 10 I`, `x_0 ~ N(0, I)`, target `[2, 2]`.
    pub fn benchmark_2d(epsilon: f64) -> Self {
        ProblemSpec::time_invariant(
            50,
            Matrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, 1.1]),
            Matrix::from_row_slice(2, 1, &[0.0, 0.2]),
            Matrix::identity(2, 2) * 1e-3,
            Matrix::identity(1, 1),
            Matrix::identity(2, 2) * 10.0,
            epsilon,
            Vector::zeros(2),
            Matrix::identity(2, 2),
            Vector::from_vec(vec![2.0, 2.0]),
        )
    }

    pub fn state_dim(&self) -> usize {
        self.mu_ini.len()
    }

    pub fn input_dim(&self) -> usize {
        self.b.first().map_or(0, |b| b.ncols())
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// The initial prior broadcast over the horizon.
    pub fn initial_prior(&self) -> PriorSequence {
        let g = self
            .prior_init
            .clone()
            .unwrap_or_else(|| Gaussian::standard(self.input_dim()));
        PriorSequence::broadcast(g, self.horizon)
    }

    /// Structural checks: list lengths and matrix shapes.
    pub fn check_shapes(&self) -> Result<()> {
        let t = self.horizon;
        if t == 0 {
            return Err(MiocpError::InvalidProblem("horizon T must be >= 1".into()));
        }
        let n = self.state_dim();
        if n == 0 {
            return Err(MiocpError::Shape {
                field: "mu_ini".into(),
                detail: "state dimension must be >= 1".into(),
            });
        }
        let m = self.input_dim();
        if m == 0 {
            return Err(MiocpError::Shape {
                field: "B".into(),
                detail: "input dimension must be >= 1".into(),
            });
        }
        for (field, list) in [("A", &self.a), ("B", &self.b), ("sigma_w", &self.sigma_w), ("R", &self.r)] {
            if list.len() != t {
                return Err(MiocpError::Shape {
                    field: field.into(),
                    detail: format!("expected {t} matrices (one per step), found {}", list.len()),
                });
            }
        }
        let checks: [(&str, &Vec<Matrix>, usize, usize); 4] = [
            ("A", &self.a, n, n),
            ("B", &self.b, n, m),
            ("sigma_w", &self.sigma_w, n, n),
            ("R", &self.r, m, m),
        ];
        for (field, list, rows, cols) in checks {
            for (k, mat) in list.iter().enumerate() {
                if mat.nrows() != rows || mat.ncols() != cols {
                    return Err(MiocpError::Shape {
                        field: field.into(),
                        detail: format!(
                            "expected {rows}x{cols} at k={k}, found {}x{}",
                            mat.nrows(),
                            mat.ncols()
                        ),
                    });
                }
            }
        }
        for (field, mat) in [("F", &self.f), ("sigma_ini", &self.sigma_ini)] {
            if mat.nrows() != n || mat.ncols() != n {
                return Err(MiocpError::Shape {
                    field: field.into(),
                    detail: format!("expected {n}x{n}, found {}x{}", mat.nrows(), mat.ncols()),
                });
            }
        }
        if self.mu_fin.len() != n {
            return Err(MiocpError::Shape {
                field: "mu_fin".into(),
                detail: format!("expected length {n}, found {}", self.mu_fin.len()),
            });
        }
        if let Some(p) = &self.prior_init {
            if p.dim() != m {
                return Err(MiocpError::Shape {
                    field: "prior_init".into(),
                    detail: format!("expected dimension {m}, found {}", p.dim()),
                });
            }
        }
        Ok(())
    }

    /// Checks every problem invariant and returns the spec marked as validated.
    pub fn validate(self) -> Result<ValidatedSpec> {
        self.check_shapes()?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(MiocpError::InvalidProblem(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        for k in 0..self.horizon {
            linalg::cholesky(&linalg::symmetrize(&self.r[k]), "R_k", Some(k))?;
            linalg::cholesky(&linalg::symmetrize(&self.sigma_w[k]), "sigma_w_k", Some(k))?;
            if linalg::rcond(&self.a[k]) <= RCOND_MIN {
                return Err(MiocpError::NotInvertible {
                    what: "A_k".into(),
                    k: Some(k),
                });
            }
        }
        linalg::cholesky(&linalg::symmetrize(&self.f), "F", None)?;
        linalg::cholesky(&linalg::symmetrize(&self.sigma_ini), "sigma_ini", None)?;
        let finite = |v: &Vector| v.iter().all(|x| x.is_finite());
        if !finite(&self.mu_ini) || !finite(&self.mu_fin) {
            return Err(MiocpError::InvalidProblem("non-finite mean vector".into()));
        }
        Ok(ValidatedSpec(self))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)?;
        raw.into_spec()
    }

    /// Serializes with the config schema; per-step lists collapse to a single
    /// matrix when every step is identical.
    pub fn to_json_value(&self) -> Value {
        let per_step = |list: &[Matrix]| -> Value {
            if list.windows(2).all(|w| w[0] == w[1]) && !list.is_empty() {
                serde_json::to_value(matrix_to_rows(&list[0])).unwrap()
            } else {
                serde_json::to_value(list.iter().map(matrix_to_rows).collect::<Vec<_>>()).unwrap()
            }
        };
        let mut obj = serde_json::Map::new();
        obj.insert("T".into(), self.horizon.into());
        obj.insert("A".into(), per_step(&self.a));
        obj.insert("B".into(), per_step(&self.b));
        obj.insert("sigma_w".into(), per_step(&self.sigma_w));
        obj.insert("R".into(), per_step(&self.r));
        obj.insert("F".into(), serde_json::to_value(matrix_to_rows(&self.f)).unwrap());
        obj.insert("epsilon".into(), self.epsilon.into());
        obj.insert("mu_ini".into(), self.mu_ini.iter().copied().collect::<Vec<_>>().into());
        obj.insert(
            "sigma_ini".into(),
            serde_json::to_value(matrix_to_rows(&self.sigma_ini)).unwrap(),
        );
        obj.insert("mu_fin".into(), self.mu_fin.iter().copied().collect::<Vec<_>>().into());
        if let Some(p) = &self.prior_init {
            obj.insert(
                "prior_init".into(),
                serde_json::json!({
                    "mu": p.mean().iter().copied().collect::<Vec<_>>(),
                    "sigma": matrix_to_rows(p.cov()),
                }),
            );
        }
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).unwrap()
    }
}

/// Reads a problem from a JSON config file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MiocpError::io(path, e))?;
    let raw: RawSpec = serde_json::from_str(&text).map_err(|source| MiocpError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    raw.into_spec()
}

/// A [`ProblemSpec`] that passed [`ProblemSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSpec(ProblemSpec);

impl ValidatedSpec {
    pub fn into_inner(self) -> ProblemSpec {
        self.0
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.0
    }
}

impl Deref for ValidatedSpec {
    type Target = ProblemSpec;

    fn deref(&self) -> &ProblemSpec {
        &self.0
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "T")]
    t: Option<usize>,
    #[serde(rename = "A")]
    a: Option<Value>,
    #[serde(rename = "B")]
    b: Option<Value>,
    sigma_w: Option<Value>,
    #[serde(rename = "R")]
    r: Option<Value>,
    #[serde(rename = "F")]
    f: Option<Vec<Vec<f64>>>,
    epsilon: Option<f64>,
    mu_ini: Option<Vec<f64>>,
    sigma_ini: Option<Vec<Vec<f64>>>,
    mu_fin: Option<Vec<f64>>,
    prior_init: Option<RawPrior>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| MiocpError::MissingField(field.to_string()))
}

fn to_matrix(field: &str, rows: Vec<Vec<f64>>) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(MiocpError::Shape {
            field: field.into(),
            detail: "empty matrix".into(),
        });
    }
    matrix_from_rows(&rows).ok_or_else(|| MiocpError::Shape {
        field: field.into(),
        detail: "ragged rows".into(),
    })
}

/// Accepts either one matrix (broadcast to every step) or a list of `t` matrices.
fn per_step(field: &str, value: Value, t: usize) -> Result<Vec<Matrix>> {
    let depth = {
        let mut d = 0;
        let mut cur = &value;
        while let Some(first) = cur.as_array().and_then(|a| a.first()) {
            d += 1;
            cur = first;
        }
        if cur.is_array() {
            d += 1;
        }
        d
    };
    let bad = |detail: String| MiocpError::Shape {
        field: field.into(),
        detail,
    };
    match depth {
        2 => {
            let rows: Vec<Vec<f64>> = serde_json::from_value(value)
                .map_err(|e| bad(format!("expected a matrix of numbers: {e}")))?;
            Ok(vec![to_matrix(field, rows)?; t])
        }
        3 => {
            let list: Vec<Vec<Vec<f64>>> = serde_json::from_value(value)
                .map_err(|e| bad(format!("expected a list of matrices: {e}")))?;
            if list.len() != t {
                return Err(bad(format!(
                    "expected {t} matrices (one per step), found {}",
                    list.len()
                )));
            }
            list.into_iter().map(|rows| to_matrix(field, rows)).collect()
        }
        _ => Err(bad(
            "expected a matrix [[..]] or a per-step list [[[..]]]".into(),
        )),
    }
}

impl RawSpec {
    fn into_spec(self) -> Result<ProblemSpec> {
        let t = required(self.t, "T")?;
        let spec = ProblemSpec {
            horizon: t,
            a: per_step("A", required(self.a, "A")?, t)?,
            b: per_step("B", required(self.b, "B")?, t)?,
            sigma_w: per_step("sigma_w", required(self.sigma_w, "sigma_w")?, t)?,
            r: per_step("R", required(self.r, "R")?, t)?,
            f: to_matrix("F", required(self.f, "F")?)?,
            epsilon: required(self.epsilon, "epsilon")?,
            mu_ini: Vector::from_vec(required(self.mu_ini, "mu_ini")?),
            sigma_ini: to_matrix("sigma_ini", required(self.sigma_ini, "sigma_ini")?)?,
            mu_fin: Vector::from_vec(required(self.mu_fin, "mu_fin")?),
            prior_init: match self.prior_init {
                Some(p) => Some(Gaussian::new(
                    Vector::from_vec(p.mu),
                    to_matrix("prior_init.sigma", p.sigma)?,
                )?),
                None => None,
            },
        };
        spec.check_shapes()?;
        Ok(spec)
    }
}

/// Affine-mean Gaussian policy `π_k(·|x) = N(P_k x + q_k, Σ_{π_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePolicy {
    pub p: Vec<Matrix>,
    pub q: Vec<Vector>,
    pub sigma_pi: Vec<Matrix>,
}

impl AffinePolicy {
    pub fn new(p: Vec<Matrix>, q: Vec<Vector>, sigma_pi: Vec<Matrix>) -> Result<Self> {
        let t = p.len();
        if q.len() != t || sigma_pi.len() != t {
            return Err(MiocpError::dims(
                "AffinePolicy lengths",
                t,
                format!("q: {}, sigma_pi: {}", q.len(), sigma_pi.len()),
            ));
        }
        let sigma_pi = sigma_pi.iter().map(linalg::symmetrize).collect::<Vec<_>>();
        for (k, s) in sigma_pi.iter().enumerate() {
            linalg::cholesky(s, "sigma_pi_k", Some(k))?;
        }
        Ok(AffinePolicy { p, q, sigma_pi })
    }

    pub fn horizon(&self) -> usize {
        self.p.len()
    }

    /// The conditional input distribution at step `k` given state `x`.
    pub fn conditional(&self, k: usize, x: &Vector) -> Result<Gaussian> {
        Gaussian::new(&self.p[k] * x + &self.q[k], self.sigma_pi[k].clone())
    }

    /// Checks the policy against the problem dimensions.
    pub fn check_against(&self, spec: &ProblemSpec) -> Result<()> {
        let (n, m, t) = (spec.state_dim(), spec.input_dim(), spec.horizon);
        if self.horizon() != t {
            return Err(MiocpError::dims("policy horizon", t, self.horizon()));
        }
        for k in 0..t {
            if self.p[k].shape() != (m, n) || self.q[k].len() != m || self.sigma_pi[k].shape() != (m, m) {
                return Err(MiocpError::dims(
                    &format!("policy step k={k}"),
                    format!("P {m}x{n}, q {m}, sigma_pi {m}x{m}"),
                    format!(
                        "P {:?}, q {}, sigma_pi {:?}",
                        self.p[k].shape(),
                        self.q[k].len(),
                        self.sigma_pi[k].shape()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::json!({
            "T": self.horizon(),
            "P": self.p.iter().map(matrix_to_rows).collect::<Vec<_>>(),
            "q": self.q.iter().map(|v| v.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            "sigma_pi": self.sigma_pi.iter().map(matrix_to_rows).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(value: Value) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(rename_all = "snake_case")]
        struct Raw {
            #[serde(rename = "T")]
            t: usize,
            #[serde(rename = "P")]
            p: Vec<Vec<Vec<f64>>>,
            q: Vec<Vec<f64>>,
            sigma_pi: Vec<Vec<Vec<f64>>>,
        }
        let raw: Raw = serde_json::from_value(value)?;
        if raw.p.len() != raw.t {
            return Err(MiocpError::Shape {
                field: "P".into(),
                detail: format!("expected {} matrices, found {}", raw.t, raw.p.len()),
            });
        }
        AffinePolicy::new(
            raw.p.into_iter().map(|m| to_matrix("P", m)).collect::<Result<_>>()?,
            raw.q.into_iter().map(Vector::from_vec).collect(),
            raw.sigma_pi
                .into_iter()
                .map(|m| to_matrix("sigma_pi", m))
                .collect::<Result<_>>()?,
        )
    }
}

/// State-independent Gaussian priors `ρ_k = N(μ_{ρ_k}, Σ_{ρ_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSequence {
    pub priors: Vec<Gaussian>,
}

impl PriorSequence {
    pub fn new(priors: Vec<Gaussian>) -> Self {
        PriorSequence { priors }
    }

    pub fn broadcast(g: Gaussian, horizon: usize) -> Self {
        PriorSequence {
            priors: vec![g; horizon],
        }
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn check_against(&self, spec: &ProblemSpec) -> Result<()> {
        if self.len() != spec.horizon {
            return Err(MiocpError::dims("prior length", spec.horizon, self.len()));
        }
        let m = spec.input_dim();
        for (k, g) in self.priors.iter().enumerate() {
            if g.dim() != m {
                return Err(MiocpError::dims(&format!("prior dimension at k={k}"), m, g.dim()));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::json!({
            "T": self.len(),
            "mu": self.priors.iter().map(|g| g.mean().iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            "sigma": self.priors.iter().map(|g| matrix_to_rows(g.cov())).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(value: Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "T")]
            t: usize,
            mu: Vec<Vec<f64>>,
            sigma: Vec<Vec<Vec<f64>>>,
        }
        let raw: Raw = serde_json::from_value(value)?;
        if raw.mu.len() != raw.t || raw.sigma.len() != raw.t {
            return Err(MiocpError::Shape {
                field: "prior".into(),
                detail: format!(
                    "expected {} steps, found mu: {}, sigma: {}",
                    raw.t,
                    raw.mu.len(),
                    raw.sigma.len()
                ),
            });
        }
        let priors = raw
            .mu
            .into_iter()
            .zip(raw.sigma)
            .map(|(mu, s)| Gaussian::new(Vector::from_vec(mu), to_matrix("sigma", s)?))
            .collect::<Result<_>>()?;
        Ok(PriorSequence { priors })
    }
}
