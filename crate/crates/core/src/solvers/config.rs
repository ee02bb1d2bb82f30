use serde::{Deserialize, Serialize};

use super::schedule::{BetaKind, BetaSchedule};
use super::SolverError;
use crate::oracle::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Plain gradient method, `x_{k+1} = x_k − ∇f(x_k)/L`.
    Gm,
    /// FGM with `γ₀ = L`.
    FgmCss1,
    /// FGM with `γ₀ = μ`.
    FgmCss3,
    /// Memory-augmented method.
    Sfgm,
}

/// Starting curvature `γ₀`, resolved against the oracle when a run starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialCurvature {
    Value(f64),
    StrongConvexity,
    Lipschitz,
}

impl InitialCurvature {
    pub fn resolve(self, lipschitz: f64, mu: f64) -> f64 {
        match self {
            InitialCurvature::Value(v) => v,
            InitialCurvature::StrongConvexity => mu,
            InitialCurvature::Lipschitz => lipschitz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StoppingRule {
    /// Stop once `‖∇f(y_k)‖ ≤ η`.
    GradNorm(f64),
    /// Stop once `‖x_k − x*‖ ≤ ρ·‖x₀ − x*‖`; needs a ground truth.
    DistToOpt(f64),
    MaxIters,
}

impl StoppingRule {
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            StoppingRule::GradNorm(t) | StoppingRule::DistToOpt(t) => Some(t),
            StoppingRule::MaxIters => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub beta: BetaSchedule,
    pub gamma0: InitialCurvature,
    /// Gradient step; `None` means `1/L`.
    pub step: Option<f64>,
    pub stop: StoppingRule,
    pub max_iters: usize,
}

pub const DEFAULT_MAX_ITERS: usize = 100_000;

impl SolverConfig {
    fn base(method: Method, beta: BetaKind, gamma0: InitialCurvature) -> Self {
        SolverConfig {
            method,
            beta: BetaSchedule::new(beta),
            gamma0,
            step: None,
            stop: StoppingRule::MaxIters,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn gm() -> Self {
        Self::base(Method::Gm, BetaKind::Zero, InitialCurvature::Value(0.0))
    }

    pub fn fgm_css1() -> Self {
        Self::base(Method::FgmCss1, BetaKind::Zero, InitialCurvature::Lipschitz)
    }

    pub fn fgm_css3() -> Self {
        Self::base(Method::FgmCss3, BetaKind::Zero, InitialCurvature::StrongConvexity)
    }

    /// `γ₀ = 0`, `β_{0,k} = 1`.
    pub fn sfgm_memoryless() -> Self {
        Self::base(Method::Sfgm, BetaKind::FirstTerm, InitialCurvature::Value(0.0))
    }

    /// `γ₀ = 0`, `β_{k−1,k} = min(1, μ/γ_{k−1})`.
    pub fn sfgm_last() -> Self {
        Self::base(Method::Sfgm, BetaKind::LastTerm, InitialCurvature::Value(0.0))
    }

    pub fn sfgm(beta: BetaKind, gamma0: InitialCurvature) -> Self {
        Self::base(Method::Sfgm, beta, gamma0)
    }

    /// Configuration for one of the benchmark labels
    /// `gm`, `fgm-css1`, `fgm-css3`, `sfgm-memless`, `sfgm-last`.
    pub fn from_label(label: &str) -> Option<Self> {
        Some(match label {
            "gm" => Self::gm(),
            "fgm-css1" => Self::fgm_css1(),
            "fgm-css3" => Self::fgm_css3(),
            "sfgm-memless" => Self::sfgm_memoryless(),
            "sfgm-last" => Self::sfgm_last(),
            _ => return None,
        })
    }

    pub const LABELS: [&'static str; 5] = ["gm", "fgm-css1", "fgm-css3", "sfgm-memless", "sfgm-last"];

    pub fn label(&self) -> String {
        match (self.method, self.beta.kind, self.gamma0) {
            (Method::Gm, ..) => "gm".into(),
            (Method::FgmCss1, ..) => "fgm-css1".into(),
            (Method::FgmCss3, ..) => "fgm-css3".into(),
            (Method::Sfgm, BetaKind::FirstTerm, InitialCurvature::Value(0.0)) => "sfgm-memless".into(),
            (Method::Sfgm, BetaKind::LastTerm, InitialCurvature::Value(0.0)) => "sfgm-last".into(),
            (Method::Sfgm, kind, _) => format!("sfgm-{}", kind.tag()),
        }
    }

    pub fn with_stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.beta.clamp = clamp;
        self
    }

    /// Checks the configuration against the oracle constants and returns `γ₀`.
    pub fn validate<O: Objective + ?Sized>(&self, oracle: &O) -> Result<f64, SolverError> {
        let (l, mu) = (oracle.lipschitz(), oracle.strong_convexity());
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(l > 0.0 && l.is_finite()) {
            return bad(format!("L must be positive and finite, got {l}"));
        }
        if !(mu >= 0.0 && mu <= l) {
            return bad(format!("need 0 <= mu <= L, got mu = {mu}, L = {l}"));
        }
        let gamma0 = self.gamma0.resolve(l, mu);
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return bad(format!("gamma0 must be finite and nonnegative, got {gamma0}"));
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("step must be positive, got {h}"));
            }
        }
        if let Some(t) = self.stop.threshold() {
            if !(t > 0.0) {
                return bad(format!("stopping threshold must be positive, got {t}"));
            }
        }
        if let BetaKind::Window(0) = self.beta.kind {
            return bad("window length must be positive".into());
        }
        match self.method {
            Method::FgmCss1 if self.gamma0 != InitialCurvature::Lipschitz => {
                bad("FGM CSS1 requires gamma0 = L".into())
            }
            Method::FgmCss3 if self.gamma0 != InitialCurvature::StrongConvexity => {
                bad("FGM CSS3 requires gamma0 = mu".into())
            }
            Method::FgmCss1 | Method::FgmCss3 if self.beta.kind != BetaKind::Zero => {
                bad("FGM uses no memory terms (beta must be Zero)".into())
            }
            Method::FgmCss1 | Method::FgmCss3 | Method::Sfgm if gamma0 == 0.0 && mu == 0.0 => {
                bad("gamma0 = 0 with mu = 0 gives alpha = 0 forever".into())
            }
            _ => Ok(gamma0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::QuadraticProblem;

    #[test]
    fn labels_round_trip() {
        for label in SolverConfig::LABELS {
            assert_eq!(SolverConfig::from_label(label).unwrap().label(), label);
        }
        assert!(SolverConfig::from_label("nope").is_none());
        let custom = SolverConfig::sfgm(BetaKind::Window(3), InitialCurvature::StrongConvexity);
        assert_eq!(custom.label(), "sfgm-window3");
    }

    #[test]
    fn validation_rules() {
        let p = QuadraticProblem::separable(vec![1.0, 0.5], vec![0.0; 2], 0.0).unwrap();
        assert_eq!(SolverConfig::fgm_css1().validate(&p).unwrap(), 1.0);
        assert_eq!(SolverConfig::fgm_css3().validate(&p).unwrap(), 0.5);
        let mut c = SolverConfig::fgm_css3();
        c.beta = BetaSchedule::new(BetaKind::LastTerm);
        assert!(c.validate(&p).is_err());
        let mut c = SolverConfig::fgm_css1();
        c.gamma0 = InitialCurvature::Value(2.0);
        assert!(c.validate(&p).is_err());
        assert!(SolverConfig::sfgm_last()
            .with_stop(StoppingRule::GradNorm(0.0))
            .validate(&p)
            .is_err());

        let flat = QuadraticProblem::separable(vec![1.0, 0.0], vec![0.0; 2], 0.0).unwrap();
        assert_eq!(flat.strong_convexity(), 0.0);
        assert!(matches!(
            SolverConfig::sfgm_last().validate(&flat),
            Err(SolverError::InvalidConfig(_))
        ));
        assert!(SolverConfig::gm().validate(&flat).is_ok());
        assert!(SolverConfig::fgm_css1().validate(&flat).is_ok());
    }
}
