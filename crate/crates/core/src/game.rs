//! Payoff structures, mutation matrices and selector functions.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

/// Square payoff matrix, `a[(i, j)]` is the payoff of strategy `i` against `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix(DMatrix<f64>);

impl PayoffMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension("payoff matrix has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Dimension(format!(
                    "payoff matrix row {i} has {} entries, expected {n} (matrix must be square)",
                    r.len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "payoff matrix is {}x{}, must be square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("payoff matrix has non-finite entries".into()));
        }
        Ok(PayoffMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `(A p)_i` for every `i`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.0[(i, j)] * p[j]).sum()).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.0.row(i).iter().cloned().collect()).collect()
    }
}

/// The fitness landscape `f_i(p)` of a symmetric game.
#[derive(Debug, Clone, PartialEq)]
pub enum FitnessModel {
    /// Frequency-independent fitness.
    Constant(Vec<f64>),
    /// `f = A p`.
    Linear(PayoffMatrix),
    /// `f_i = (A p)_i + q_i p_i^2`.
    Quadratic { a: PayoffMatrix, q: Vec<f64> },
    /// `f_i = tanh((A p)_i) + c`.
    Saturating { a: PayoffMatrix, c: f64 },
}

impl FitnessModel {
    pub fn constant(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Dimension("constant fitness needs at least 2 entries".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter("constant fitness entries must be finite and nonnegative".into()));
        }
        Ok(FitnessModel::Constant(values))
    }

    pub fn linear(a: PayoffMatrix) -> Result<Self> {
        if a.dim() < 2 {
            return Err(Error::Dimension("a game needs at least 2 strategies".into()));
        }
        Ok(FitnessModel::Linear(a))
    }

    pub fn quadratic(a: PayoffMatrix, q: Vec<f64>) -> Result<Self> {
        if a.dim() < 2 {
            return Err(Error::Dimension("a game needs at least 2 strategies".into()));
        }
        check_dim("q", q.len(), a.dim())?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("q has non-finite entries".into()));
        }
        Ok(FitnessModel::Quadratic { a, q })
    }

    pub fn saturating(a: PayoffMatrix, c: f64) -> Result<Self> {
        if a.dim() < 2 {
            return Err(Error::Dimension("a game needs at least 2 strategies".into()));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("saturating offset c must be >= 0, got {c}")));
        }
        Ok(FitnessModel::Saturating { a, c })
    }

    pub fn dim(&self) -> usize {
        match self {
            FitnessModel::Constant(f) => f.len(),
            FitnessModel::Linear(a)
            | FitnessModel::Quadratic { a, .. }
            | FitnessModel::Saturating { a, .. } => a.dim(),
        }
    }

    /// The payoff matrix behind the model, if it has one.
    pub fn payoff_matrix(&self) -> Option<&PayoffMatrix> {
        match self {
            FitnessModel::Constant(_) => None,
            FitnessModel::Linear(a)
            | FitnessModel::Quadratic { a, .. }
            | FitnessModel::Saturating { a, .. } => Some(a),
        }
    }

    /// Evaluates the model at raw coordinates without a dimension check.
    ///
    /// Used by integrator stages and finite differences, which may step
    /// slightly off the simplex.
    pub(crate) fn eval(&self, p: &[f64]) -> Vec<f64> {
        match self {
            FitnessModel::Constant(f) => f.clone(),
            FitnessModel::Linear(a) => a.apply(p),
            FitnessModel::Quadratic { a, q } => {
                a.apply(p).into_iter().zip(q.iter().zip(p)).map(|(ap, (qi, pi))| ap + qi * pi * pi).collect()
            }
            FitnessModel::Saturating { a, c } => a.apply(p).into_iter().map(|ap| ap.tanh() + c).collect(),
        }
    }

    /// `f_i` at `p` with coordinate `i` replaced by `z`, the dummy-variable
    /// convention used by the integral cost functions.
    pub(crate) fn eval_component_at(&self, i: usize, p: &[f64], z: f64) -> f64 {
        let row_dot = |a: &PayoffMatrix| -> f64 {
            (0..a.dim()).map(|j| a.get(i, j) * if j == i { z } else { p[j] }).sum()
        };
        match self {
            FitnessModel::Constant(f) => f[i],
            FitnessModel::Linear(a) => row_dot(a),
            FitnessModel::Quadratic { a, q } => row_dot(a) + q[i] * z * z,
            FitnessModel::Saturating { a, c } => row_dot(a).tanh() + c,
        }
    }

    pub(crate) fn check(&self, p: &[f64]) -> Result<()> {
        check_dim("state", p.len(), self.dim())
    }
}

/// `(f_1(p), ..., f_N(p))`.
pub fn fitness(model: &FitnessModel, p: &[f64]) -> Result<Vec<f64>> {
    model.check(p)?;
    Ok(model.eval(p))
}

/// Population mean `sum_i p_i f_i(p)`.
pub fn mean_fitness(model: &FitnessModel, p: &[f64]) -> Result<f64> {
    let f = fitness(model, p)?;
    Ok(dot(p, &f))
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Linear models for a few textbook games.
///
/// * `rps`: rock-paper-scissors `[[0,-1,1],[1,0,-1],[-1,1,0]]`
/// * `prisoners_dilemma`: rows cooperate, defect `[[3,0],[5,1]]`
/// * `hawk_dove`: `V = 2, C = 4`, so `[[-1,2],[0,1]]`
/// * `coordination`: `[[2,0],[0,1]]`
pub fn standard_game(name: &str) -> Result<FitnessModel> {
    let rows: Vec<Vec<f64>> = match name {
        "rps" => vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]],
        "prisoners_dilemma" => vec![vec![3.0, 0.0], vec![5.0, 1.0]],
        "hawk_dove" => {
            let (v, c) = (2.0, 4.0);
            vec![vec![(v - c) / 2.0, v], vec![0.0, v / 2.0]]
        }
        "coordination" => vec![vec![2.0, 0.0], vec![0.0, 1.0]],
        other => return Err(Error::UnknownGame(other.to_string())),
    };
    FitnessModel::linear(PayoffMatrix::from_rows(&rows)?)
}

/// Recipe for a mutation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MutationSpec {
    Identity(usize),
    /// `(1 - mu) I + (mu / n) J`.
    UniformNoise(usize, f64),
}

/// Symmetric doubly stochastic matrix; `get(j, i)` is the probability that
/// strategy `j` mutates to `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationMatrix(DMatrix<f64>);

impl MutationMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.0[(j, i)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0 == DMatrix::identity(self.dim(), self.dim())
    }

    /// Checks symmetry, unit row/column sums and entry range.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let row: f64 = self.0.row(i).sum();
            let col: f64 = self.0.column(i).sum();
            if (row - 1.0).abs() > 1e-10 || (col - 1.0).abs() > 1e-10 {
                return Err(Error::Constraint(format!("row/column {i} does not sum to 1")));
            }
            for j in 0..n {
                let v = self.0[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Constraint(format!("entry ({i},{j}) = {v} outside [0,1]")));
                }
                if (v - self.0[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Constraint(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}

pub fn make_mutation_matrix(spec: MutationSpec) -> Result<MutationMatrix> {
    let (n, mu) = match spec {
        MutationSpec::Identity(n) => (n, 0.0),
        MutationSpec::UniformNoise(n, mu) => (n, mu),
    };
    if n < 2 {
        return Err(Error::Dimension(format!("mutation matrix needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Parameter(format!("mutation rate mu = {mu} outside [0, 1]")));
    }
    let off = mu / n as f64;
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - mu + off } else { off });
    let m = MutationMatrix(m);
    m.validate()?;
    Ok(m)
}

/// Weighting `h(p_i)` applied to individual fitness in selector-weighted dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    /// `sech^2(x)`, the derivative of `tanh`.
    SechSquared,
    /// `k s(kx)(1 - s(kx))` with `s` the standard logistic.
    LogisticDerivative {
        k: f64,
    },
    Identity,
}

impl Selector {
    pub fn logistic_derivative(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!("logistic steepness k must be > 0, got {k}")));
        }
        Ok(Selector::LogisticDerivative { k })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Selector::SechSquared => {
                let s = 1.0 / x.cosh();
                s * s
            }
            Selector::LogisticDerivative { k } => {
                let s = 1.0 / (1.0 + (-k * x).exp());
                k * s * (1.0 - s)
            }
            Selector::Identity => 1.0,
        }
    }
}

pub fn selector_eval(h: Selector, x: f64) -> f64 {
    h.eval(x)
}
