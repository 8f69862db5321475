use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::ModelError;

/// Level below which a kernel tail is treated as zero when truncating.
const TAIL_CUTOFF: f64 = 1e-16;

/// Base (unit-width) profile of an interaction kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    /// `1/2` on `[-1, 1]`.
    Uniform,
    /// `1 / (2 + e^x + e^-x)`.
    Logistic,
    /// Standard normal density.
    Gaussian,
    /// Piecewise-linear interpolation of user samples, normalized to unit mass.
    Tabulated(TabulatedProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Cumulative mass at each sample abscissa; the last entry is 1.
    cumulative: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self, ModelError> {
        if samples.len() < 2 {
            return Err(ModelError::InvalidKernel("tabulated kernel needs at least two samples".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::InvalidKernel("sample abscissae must be strictly increasing".into()));
            }
        }
        if samples.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite() || y < 0.0) {
            return Err(ModelError::InvalidKernel("samples must be finite and nonnegative".into()));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let mut ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let mass: f64 = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum();
        if !(mass > 0.0) {
            return Err(ModelError::InvalidKernel("tabulated kernel has zero mass".into()));
        }
        ys.iter_mut().for_each(|y| *y /= mass);
        let mut cumulative = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i - 1] + ys[i]);
            cumulative.push(acc);
        }
        // exact unit mass
        let total = acc;
        cumulative.iter_mut().for_each(|c| *c /= total);
        ys.iter_mut().for_each(|y| *y /= total);
        Ok(Self { xs, ys, cumulative })
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return None;
        }
        let i = self.xs.partition_point(|&xi| xi <= x);
        Some(i.clamp(1, self.xs.len() - 1) - 1)
    }

    fn pdf(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let i = self.segment(x).unwrap();
        let dx = x - self.xs[i];
        let y = self.pdf(x);
        self.cumulative[i] + 0.5 * dx * (self.ys[i] + y)
    }
}

/// Normalized nonnegative interaction kernel `J_sigma(x) = J(x / sigma) / sigma`.
///
/// `delta0` and `eta` are the constants with `J > eta` on `[-delta0, delta0]`
/// for the unit-width profile; [`Kernel::condition_constants`] rescales them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct Kernel {
    shape: KernelShape,
    sigma: f64,
    delta0: f64,
    eta: f64,
}

/// JSON form of a kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpec {
    pub shape: String,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = ModelError;

    fn try_from(spec: KernelSpec) -> Result<Self, ModelError> {
        let base = match spec.shape.to_ascii_lowercase().as_str() {
            "uniform" => Kernel::uniform(),
            "logistic" => Kernel::logistic(),
            "gaussian" => Kernel::gaussian(),
            "tabulated" => {
                let samples = spec
                    .samples
                    .as_deref()
                    .ok_or_else(|| ModelError::InvalidKernel("tabulated kernel needs samples".into()))?;
                Kernel::tabulated(samples)?
            }
            other => return Err(ModelError::InvalidKernel(format!("unknown kernel shape '{other}'"))),
        };
        let mut kernel = base.with_sigma(spec.sigma)?;
        if spec.delta0.is_some() || spec.eta.is_some() {
            let delta0 = spec.delta0.unwrap_or(kernel.delta0);
            let eta = spec.eta.unwrap_or(kernel.eta);
            kernel = kernel.with_condition_constants(delta0, eta)?;
        }
        Ok(kernel)
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> Self {
        let (shape, samples) = match &k.shape {
            KernelShape::Uniform => ("uniform", None),
            KernelShape::Logistic => ("logistic", None),
            KernelShape::Gaussian => ("gaussian", None),
            KernelShape::Tabulated(t) => ("tabulated", Some(t.samples())),
        };
        let tabulated = samples.is_some();
        KernelSpec {
            shape: shape.into(),
            sigma: k.sigma,
            samples,
            delta0: tabulated.then_some(k.delta0),
            eta: tabulated.then_some(k.eta),
        }
    }
}

impl Kernel {
    pub fn uniform() -> Self {
        Self {
            shape: KernelShape::Uniform,
            sigma: 1.0,
            delta0: 0.5,
            eta: 0.49,
        }
    }

    pub fn logistic() -> Self {
        let e = std::f64::consts::E;
        Self {
            shape: KernelShape::Logistic,
            sigma: 1.0,
            delta0: 1.0,
            eta: 1.0 / (2.0 + e + 1.0 / e) - 1e-6,
        }
    }

    pub fn gaussian() -> Self {
        Self {
            shape: KernelShape::Gaussian,
            sigma: 1.0,
            delta0: 1.0,
            eta: gaussian_pdf(1.0) - 1e-6,
        }
    }

    /// Kernel interpolating `samples` linearly; `delta0`/`eta` are derived as
    /// `eta = J(0)/2` and the widest symmetric window on which `J > eta`.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self, ModelError> {
        let profile = TabulatedProfile::new(samples)?;
        let peak = profile.pdf(0.0);
        if !(peak > 0.0) {
            return Err(ModelError::InvalidKernel(
                "tabulated kernel must be positive at the origin".into(),
            ));
        }
        let eta = 0.5 * peak;
        let reach = |dir: f64| {
            // distance from the origin to the first point where J drops to eta
            let mut pts: Vec<f64> = profile.xs.iter().map(|x| x * dir).filter(|&x| x > 0.0).collect();
            pts.sort_by(f64::total_cmp);
            let mut prev = (0.0, peak);
            for d in pts {
                let y = profile.pdf(d * dir);
                if y <= eta {
                    let t = (prev.1 - eta) / (prev.1 - y);
                    return prev.0 + t * (d - prev.0);
                }
                prev = (d, y);
            }
            prev.0
        };
        let delta0 = 0.99 * reach(1.0).min(reach(-1.0));
        if !(delta0 > 0.0) {
            return Err(ModelError::InvalidKernel("tabulated kernel has no positive plateau at 0".into()));
        }
        Ok(Self {
            shape: KernelShape::Tabulated(profile),
            sigma: 1.0,
            delta0,
            eta,
        })
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self, ModelError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be > 0",
            });
        }
        Ok(Self { sigma, ..self.clone() })
    }

    /// Override the unit-width `(delta0, eta)`; checked by sampling.
    pub fn with_condition_constants(&self, delta0: f64, eta: f64) -> Result<Self, ModelError> {
        if !(delta0 > 0.0 && eta > 0.0) {
            return Err(ModelError::InvalidKernel("delta0 and eta must be positive".into()));
        }
        let k = Self {
            delta0,
            eta,
            ..self.clone()
        };
        let violated = (0..=1000)
            .map(|i| -delta0 + 2.0 * delta0 * i as f64 / 1000.0)
            .any(|x| !(k.base_pdf(x) > eta));
        if violated {
            return Err(ModelError::InvalidKernel(format!(
                "kernel does not exceed eta = {eta} on [-{delta0}, {delta0}]"
            )));
        }
        Ok(k)
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn name(&self) -> &'static str {
        match self.shape {
            KernelShape::Uniform => "uniform",
            KernelShape::Logistic => "logistic",
            KernelShape::Gaussian => "gaussian",
            KernelShape::Tabulated(_) => "tabulated",
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self.shape, KernelShape::Tabulated(_))
    }

    /// `(delta0, eta)` for the kernel at its actual width `sigma`.
    pub fn condition_constants(&self) -> (f64, f64) {
        (self.delta0 * self.sigma, self.eta / self.sigma)
    }

    /// `J_sigma(x)`. Tabulated kernels vanish outside their sample range.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.base_pdf(x / self.sigma) / self.sigma
    }

    /// Mass of `J_sigma` on `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        let (a, b) = (a / self.sigma, b / self.sigma);
        if a >= 0.0 {
            self.base_sf(a) - self.base_sf(b)
        } else if b <= 0.0 {
            self.base_cdf(b) - self.base_cdf(a)
        } else {
            1.0 - self.base_cdf(a) - self.base_sf(b)
        }
    }

    /// Mass of `J_sigma` on `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.base_cdf(x / self.sigma)
    }

    /// Mass of `J_sigma` on `[x, inf)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.base_sf(x / self.sigma)
    }

    /// Half-width beyond which the kernel is below `1e-16` (or exactly zero).
    pub fn support_radius(&self) -> f64 {
        let base = match &self.shape {
            KernelShape::Uniform => 1.0,
            // e/(1+e)^2 <= e with e = exp(-|x|)
            KernelShape::Logistic => -TAIL_CUTOFF.ln(),
            KernelShape::Gaussian => (2.0 * (1.0 / (TAIL_CUTOFF * (2.0 * std::f64::consts::PI).sqrt())).ln()).sqrt(),
            KernelShape::Tabulated(t) => t.xs[0].abs().max(t.xs.last().unwrap().abs()),
        };
        base * self.sigma
    }

    /// Cell-averaged weights `w_k = mass of J_sigma on [(k-1/2)h, (k+1/2)h]`,
    /// truncated at the support radius with the outermost cells absorbing the
    /// remaining tails and renormalized to sum to one.
    pub fn discretize(&self, spacing: f64) -> DiscreteKernel {
        assert!(spacing > 0.0);
        let radius = (self.support_radius() / spacing).ceil() as usize;
        let r = radius as isize;
        let mut weights: Vec<f64> = (-r..=r)
            .map(|k| {
                let lo = (k as f64 - 0.5) * spacing;
                let hi = (k as f64 + 0.5) * spacing;
                match k {
                    _ if r == 0 => 1.0,
                    _ if k == -r => self.cdf(hi),
                    _ if k == r => self.sf(lo),
                    _ => self.mass_between(lo, hi),
                }
            })
            .collect();
        if self.is_symmetric() {
            // exact mirror symmetry
            for k in 0..radius {
                let avg = 0.5 * (weights[k] + weights[2 * radius - k]);
                weights[k] = avg;
                weights[2 * radius - k] = avg;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        DiscreteKernel { radius, weights }
    }

    fn base_pdf(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::Uniform => {
                if x.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelShape::Logistic => {
                let e = (-x.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            KernelShape::Gaussian => gaussian_pdf(x),
            KernelShape::Tabulated(t) => t.pdf(x),
        }
    }

    fn base_cdf(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::Uniform => ((x + 1.0) * 0.5).clamp(0.0, 1.0),
            KernelShape::Logistic => 1.0 / (1.0 + (-x).exp()),
            KernelShape::Gaussian => 0.5 * erfc(-x / std::f64::consts::SQRT_2),
            KernelShape::Tabulated(t) => t.cdf(x),
        }
    }

    fn base_sf(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::Uniform => ((1.0 - x) * 0.5).clamp(0.0, 1.0),
            KernelShape::Logistic => 1.0 / (1.0 + x.exp()),
            KernelShape::Gaussian => 0.5 * erfc(x / std::f64::consts::SQRT_2),
            KernelShape::Tabulated(t) => 1.0 - t.cdf(x),
        }
    }
}

fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Discrete convolution weights on a uniform grid, indexed by offset `-radius..=radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    radius: usize,
    weights: Vec<f64>,
}

impl DiscreteKernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weights ordered from offset `-radius` to `+radius`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, offset: isize) -> f64 {
        let idx = offset + self.radius as isize;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    /// Weight at offset zero: the self-interaction of a node.
    pub fn center(&self) -> f64 {
        self.weights[self.radius]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Kernel> {
        vec![Kernel::uniform(), Kernel::logistic(), Kernel::gaussian()]
    }

    /// Composite Gauss-Legendre (5 points) on `[a, b]` split at the given breakpoints.
    fn quad(f: impl Fn(f64) -> f64, breaks: &[f64], pieces: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683,
            0.538_469_310_105_683,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let mut total = 0.0;
        for seg in breaks.windows(2) {
            let h = (seg[1] - seg[0]) / pieces as f64;
            for p in 0..pieces {
                let mid = seg[0] + (p as f64 + 0.5) * h;
                total += X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
            }
        }
        total
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Kernel::uniform().evaluate(0.0), 0.5);
        assert_eq!(Kernel::logistic().evaluate(0.0), 0.25);
        assert_eq!(Kernel::uniform().with_sigma(2.0).unwrap().evaluate(0.0), 0.25);
        assert_eq!(Kernel::uniform().evaluate(1.5), 0.0);
    }

    #[test]
    fn unit_mass_by_quadrature() {
        for k in builtins() {
            for sigma in [0.25, 1.0, 3.0] {
                let k = k.with_sigma(sigma).unwrap();
                let r = k.support_radius();
                let breaks = [-r, -sigma, 0.0, sigma, r];
                let m = quad(|x| k.evaluate(x), &breaks, 400);
                assert!((m - 1.0).abs() < 1e-10, "{} sigma={sigma}: {m}", k.name());
            }
        }
    }

    #[test]
    fn discrete_weights_sum_to_one_before_renormalization() {
        for k in builtins() {
            for sigma in [0.1, 1.0, 4.0] {
                let k = k.with_sigma(sigma).unwrap();
                for h in [0.003, 0.01, 0.1] {
                    let r = (k.support_radius() / h).ceil() as isize;
                    let raw: f64 = (-r + 1..r)
                        .map(|i| k.mass_between((i as f64 - 0.5) * h, (i as f64 + 0.5) * h))
                        .sum();
                    let inner_tails = k.cdf(-(r as f64 - 0.5) * h) + k.sf((r as f64 - 0.5) * h);
                    assert!((raw + inner_tails - 1.0).abs() < 1e-10);
                    // truncated tails are below the cutoff
                    assert!(k.sf(k.support_radius()) < 1e-10);
                    let d = k.discretize(h);
                    assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_and_scaling_consistent() {
        for k in builtins() {
            for sigma in [0.37, 1.0, 2.0, 5.5] {
                let ks = k.with_sigma(sigma).unwrap();
                for i in 0..200 {
                    let x = -6.0 + 0.061 * i as f64;
                    assert_eq!(ks.evaluate(x), ks.evaluate(-x));
                    let scaled = k.evaluate(x / sigma) / sigma;
                    let v = ks.evaluate(x);
                    assert!((v - scaled).abs() <= 2.0 * f64::EPSILON * v.abs());
                }
                let d = ks.discretize(0.05);
                for o in 0..=d.radius() as isize {
                    assert_eq!(d.weight(o), d.weight(-o));
                }
            }
        }
    }

    #[test]
    fn condition_constants_hold() {
        for k in builtins() {
            let (d0, eta) = k.condition_constants();
            for i in 0..=100 {
                let x = -d0 + 2.0 * d0 * i as f64 / 100.0;
                assert!(k.evaluate(x) > eta, "{} at {x}", k.name());
            }
            let k2 = k.with_sigma(2.0).unwrap();
            let (d2, e2) = k2.condition_constants();
            assert_eq!((d2, e2), (2.0 * d0, eta / 2.0));
        }
        assert!(Kernel::uniform().with_condition_constants(1.5, 0.1).is_err());
    }

    #[test]
    fn tabulated_kernel() {
        // tent on [-1, 1], mass 1 after normalization
        let k = Kernel::tabulated(&[(-1.0, 0.0), (0.0, 2.0), (1.0, 0.0)]).unwrap();
        assert!((k.evaluate(0.0) - 1.0).abs() < 1e-15);
        assert!((k.evaluate(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(k.evaluate(1.5), 0.0);
        assert!((k.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((k.cdf(0.5) - 0.875).abs() < 1e-15);
        let (d0, eta) = k.condition_constants();
        assert!((eta - 0.5).abs() < 1e-15);
        assert!((d0 - 0.495).abs() < 1e-12);
        let d = k.discretize(0.1);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);

        assert!(Kernel::tabulated(&[(0.0, 1.0)]).is_err());
        assert!(Kernel::tabulated(&[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(Kernel::tabulated(&[(-1.0, -1.0), (1.0, 1.0)]).is_err());
        assert!(Kernel::tabulated(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn json_schema() {
        let k: Kernel = serde_json::from_str(r#"{"shape":"logistic","sigma":2.0}"#).unwrap();
        assert_eq!(k, Kernel::logistic().with_sigma(2.0).unwrap());
        let t: Kernel =
            serde_json::from_str(r#"{"shape":"tabulated","samples":[[-1,0],[0,2],[1,0]]}"#).unwrap();
        let back: Kernel = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back.evaluate(0.25), t.evaluate(0.25));
        assert!(serde_json::from_str::<Kernel>(r#"{"shape":"cauchy"}"#).is_err());
        assert!(serde_json::from_str::<Kernel>(r#"{"shape":"uniform","sigma":0}"#).is_err());
    }
}
