use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::integrate::{dopri5, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::eig_real;
use crate::polyalg::PolyMap;
use crate::scalar::{creal, lit, CMatrix, Real, C};

/// `ẋ = A x + g(x)` with `g` polynomial of order ≥ 2 (real coefficients
/// stored as complex numbers with zero imaginary part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OdeSystem<T: Real> {
    pub a: DMatrix<T>,
    pub g: Option<PolyMap<T>>,
    pub description: String,
}

impl<T: Real> OdeSystem<T> {
    pub fn new(a: DMatrix<T>, g: Option<PolyMap<T>>, description: impl Into<String>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch("linear part must be square and non-empty".into()));
        }
        if let Some(g) = &g {
            if g.dim() != a.nrows() || g.n_out() != a.nrows() {
                return Err(Error::DimensionMismatch("nonlinearity does not match state dimension".into()));
            }
            if g.basis().l_min() < 2 {
                return Err(Error::InvalidArgument("nonlinearity must start at order 2".into()));
            }
        }
        Ok(Self {
            a,
            g,
            description: description.into(),
        })
    }

    pub fn linear(a: DMatrix<T>, description: impl Into<String>) -> Result<Self> {
        Self::new(a, None, description)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn rhs(&self, x: &DVector<T>) -> DVector<T> {
        let mut dx = &self.a * x;
        if let Some(g) = &self.g {
            let z: Vec<C<T>> = x.iter().map(|&v| creal(v)).collect();
            let gz = g.eval(&z).expect("dimension checked on construction");
            for i in 0..dx.len() {
                dx[i] += gz[i].re;
            }
        }
        dx
    }

    /// Eigenvalues and unit eigenvectors of the linear part.
    pub fn linear_spectrum(&self) -> Result<(Vec<C<T>>, CMatrix<T>)> {
        eig_real(&self.a)
    }

    /// Integrates from `x0` and samples every `dt_out` up to `t_end`.
    pub fn integrate(&self, x0: &DVector<T>, t_end: T, dt_out: T, rtol: Option<T>) -> Result<Trajectory<T>> {
        if !(t_end > T::zero()) || !(dt_out > T::zero()) {
            return Err(Error::InvalidArgument("t_end and dt_out must be positive".into()));
        }
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial condition has {} entries, system has {}",
                x0.len(),
                self.dim()
            )));
        }
        let n = (t_end / dt_out + lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
        let times: Vec<T> = (0..n).map(|i| T::from_usize(i).unwrap() * dt_out).collect();
        let tol = rtol.map(Tolerances::with_rtol).unwrap_or_default();
        let states = dopri5(|_, x| self.rhs(x), x0, &times, tol)?;
        let mut data = DMatrix::zeros(self.dim(), n);
        for (j, s) in states.iter().enumerate() {
            data.set_column(j, s);
        }
        Trajectory::new(times, data)
    }
}

/// Uniformly sampled multichannel time series; column `j` is the sample at
/// `times[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub data: DMatrix<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(times: Vec<T>, data: DMatrix<T>) -> Result<Self> {
        if times.len() != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} time stamps for {} samples",
                times.len(),
                data.ncols()
            )));
        }
        let t = Self { times, data };
        t.check_uniform()?;
        Ok(t)
    }

    fn check_uniform(&self) -> Result<()> {
        if self.times.len() < 2 {
            return Ok(());
        }
        let dt = self.times[1] - self.times[0];
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument("time stamps must be strictly increasing".into()));
        }
        let t0 = self.times[0];
        let tol = lit::<T>(1e-9) * dt;
        for (j, &t) in self.times.iter().enumerate() {
            let expect = t0 + T::from_usize(j).unwrap() * dt;
            if (t - expect).abs() > tol * T::from_usize(j.max(1)).unwrap().sqrt() + lit::<T>(1e-12) * t.abs() {
                return Err(Error::InvalidArgument(format!("non-uniform sampling at sample {j}")));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> Option<T> {
        (self.times.len() >= 2)
            .then(|| (self.times[self.times.len() - 1] - self.times[0]) / T::from_usize(self.times.len() - 1).unwrap())
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Applies an observable to every sample.
    pub fn observe(&self, f: impl Fn(&DVector<T>) -> DVector<T>) -> Result<Self> {
        if self.is_empty() {
            return Ok(Self {
                times: Vec::new(),
                data: DMatrix::zeros(0, 0),
            });
        }
        let cols: Vec<DVector<T>> = self.data.column_iter().map(|c| f(&c.into_owned())).collect();
        let q = cols[0].len();
        let data = DMatrix::from_fn(q, cols.len(), |i, j| cols[j][i]);
        Self::new(self.times.clone(), data)
    }

    /// Keeps the samples from index `start` on, shifting time to start at 0.
    pub fn skip(&self, start: usize) -> Result<Self> {
        if start >= self.len() {
            return Err(Error::Empty("nothing left after skipping".into()));
        }
        let t0 = self.times[start];
        let times = self.times[start..].iter().map(|&t| t - t0).collect();
        Self::new(times, self.data.columns(start, self.len() - start).into_owned())
    }
}

/// Linear observable `μ(x) = C x` evaluated along a trajectory.
pub fn linear_observable<T: Real>(c: &DMatrix<T>) -> impl Fn(&DVector<T>) -> DVector<T> + '_ {
    move |x| c * x
}

/// Real initial condition `Σ_k w_k · Re(v_k)/‖Re(v_k)‖_∞` built from the
/// eigenvectors `v_k` of the linear part, one weight per conjugate pair
/// (ordered by increasing frequency).
pub fn modal_initial_condition<T: Real>(system: &OdeSystem<T>, weights: &[T]) -> Result<DVector<T>> {
    let (lam, vecs) = system.linear_spectrum()?;
    let mut idx: Vec<usize> = (0..lam.len()).filter(|&k| lam[k].im > T::zero()).collect();
    idx.sort_by(|&a, &b| lam[a].im.partial_cmp(&lam[b].im).unwrap());
    if weights.len() > idx.len() {
        return Err(Error::InvalidArgument(format!(
            "{} modal weights for {} oscillatory modes",
            weights.len(),
            idx.len()
        )));
    }
    let mut x = DVector::zeros(system.dim());
    for (w, &k) in weights.iter().zip(&idx) {
        // Rotate the eigenvector so its largest entry is real.
        let v = vecs.column(k);
        let big = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
            .unwrap();
        let rot = big.conj() / creal(crate::scalar::cabs(big));
        let re: DVector<T> = v.map(|z| (z * rot).re);
        let scale = re.amax();
        x += re * (*w / scale);
    }
    Ok(x)
}
