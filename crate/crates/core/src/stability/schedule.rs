use crate::error::{Error, Result};

/// Scales tied together by `beta = delta1 / delta2` and
/// `eps = beta^{(1 - mu) / (1 - alpha)}`.
///
/// `beta` and `eps` are kept as logarithms: for `alpha` near `1` the scale
/// `eps` is far below the smallest positive double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSchedule {
    alpha: f64,
    mu: f64,
    log_beta: f64,
    delta2: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ScheduleRecord {
    alpha: f64,
    mu: f64,
    beta: f64,
    delta1: f64,
    delta2: f64,
    epsilon: f64,
    exponent: f64,
    log_beta: f64,
    log_epsilon: f64,
}

impl serde::Serialize for ParameterSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScheduleRecord {
            alpha: self.alpha,
            mu: self.mu,
            beta: self.beta(),
            delta1: self.delta1(),
            delta2: self.delta2,
            epsilon: self.epsilon(),
            exponent: self.exponent(),
            log_beta: self.log_beta,
            log_epsilon: self.log_epsilon(),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for ParameterSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ScheduleRecord::deserialize(d)?;
        ParameterSchedule::from_log_beta(r.alpha, r.mu, r.log_beta, r.delta2).map_err(serde::de::Error::custom)
    }
}

/// `(2 alpha - alpha mu - 1) / (1 - alpha)`, the power of `beta` in term 1.
pub fn schedule_exponent(alpha: f64, mu: f64) -> f64 {
    (2.0 * alpha - alpha * mu - 1.0) / (1.0 - alpha)
}

fn check_exponents(alpha: f64, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("mu = {mu} must lie in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let threshold = 1.0 / (2.0 - mu);
    if !(alpha > threshold) {
        return Err(Error::InfeasibleExponent { alpha, mu, threshold });
    }
    Ok(())
}

impl ParameterSchedule {
    pub fn from_log_beta(alpha: f64, mu: f64, log_beta: f64, delta2: f64) -> Result<Self> {
        check_exponents(alpha, mu)?;
        if !(log_beta < 0.0 && log_beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta = exp({log_beta}) must lie in (0, 1)")));
        }
        if !(delta2 > 0.0 && delta2.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta2 = {delta2} must be positive")));
        }
        Ok(ParameterSchedule { alpha, mu, log_beta, delta2 })
    }

    pub fn from_beta(alpha: f64, mu: f64, beta: f64, delta2: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta = {beta} must lie in (0, 1)")));
        }
        Self::from_log_beta(alpha, mu, beta.ln(), delta2)
    }

    /// Schedule whose mollification scale is `epsilon`:
    /// `beta = eps^{(1 - alpha) / (1 - mu)}`.
    pub fn from_epsilon(alpha: f64, mu: f64, epsilon: f64, delta2: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        Self::from_log_beta(alpha, mu, epsilon.ln() * (1.0 - alpha) / (1.0 - mu), delta2)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn log_beta(&self) -> f64 {
        self.log_beta
    }

    pub fn beta(&self) -> f64 {
        self.log_beta.exp()
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    pub fn delta1(&self) -> f64 {
        self.beta() * self.delta2
    }

    pub fn log_epsilon(&self) -> f64 {
        self.log_beta * (1.0 - self.mu) / (1.0 - self.alpha)
    }

    /// May underflow to `0`; see [`ParameterSchedule::log_epsilon`].
    pub fn epsilon(&self) -> f64 {
        self.log_epsilon().exp()
    }

    pub fn exponent(&self) -> f64 {
        schedule_exponent(self.alpha, self.mu)
    }

    /// Terms 1, 2 and 3 of the parameter balance, with `w` the bound on the
    /// fractional norm of `b2` and `c` the bounded-term constant:
    ///
    /// 1. `w beta^{exponent} / (delta2 log(1 + gamma / delta2))`
    /// 2. `w beta^mu [log(1 / beta^{mu + 1}) + log(1 / delta2)] / log(1 + gamma / delta2)`
    /// 3. `c / log(1 + gamma / delta2)`
    pub fn terms(&self, gamma: f64, w: f64, c: f64) -> [f64; 3] {
        let log_g = (gamma / self.delta2).ln_1p();
        let lb = self.log_beta;
        let t1 = w * (self.exponent() * lb).exp() / (self.delta2 * log_g);
        let t2 = w * (self.mu * lb).exp() * (-(self.mu + 1.0) * lb - self.delta2.ln()) / log_g;
        [t1, t2, c / log_g]
    }
}

/// Quantities the schedule has to balance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScheduleInputs {
    pub alpha: f64,
    pub mu: f64,
    pub gamma: f64,
    pub eta: f64,
    /// Bound on the `W^{alpha,1}` norm of `b2` in `x1`, scaling terms 1 and 2.
    pub w_bound: f64,
    /// Constant of the bounded terms.
    pub c_bound: f64,
}

/// A schedule with the three balanced terms it achieves.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterChoice {
    pub schedule: ParameterSchedule,
    pub inputs: ScheduleInputs,
    pub terms: [f64; 3],
}

const BISECTION_TOL: f64 = 1e-3;

/// Picks `delta2` so that term 3 is at most `eta / 5`, then the largest
/// `beta` found by bisection on `log beta` keeping terms 1 and 2 at most
/// `eta / 5`.
pub fn choose_parameters(inputs: ScheduleInputs) -> Result<ParameterChoice> {
    let ScheduleInputs { alpha, mu, gamma, eta, w_bound, c_bound } = inputs;
    check_exponents(alpha, mu)?;
    if !(gamma > 0.0 && eta > 0.0 && w_bound >= 0.0 && c_bound >= 0.0) {
        return Err(Error::InvalidArgument("gamma and eta must be positive, the bounds nonnegative".into()));
    }
    let target = eta / 5.0;
    // log(1 + gamma / delta2) >= 5 c / eta, with a little room for rounding
    let need = 5.0 * c_bound / eta;
    let delta2 = (gamma / need.exp_m1() * (1.0 - 1e-6)).min(1.0 - 1e-6);
    if !(delta2 > 0.0) {
        return Err(Error::NoFeasibleParameter(format!("term 3: c = {c_bound} needs log(1 + gamma/delta2) >= {need}")));
    }
    let feasible = |lb: f64| -> Result<Option<[f64; 3]>> {
        let s = ParameterSchedule::from_log_beta(alpha, mu, lb, delta2)?;
        let t = s.terms(gamma, w_bound, c_bound);
        Ok((t[0] <= target && t[1] <= target && t[2] <= target).then_some(t))
    };
    let mut lo = f64::MIN_POSITIVE.ln();
    let mut hi = 0.5f64.ln();
    let lo_terms = feasible(lo)?;
    if lo_terms.is_none() {
        let t = ParameterSchedule::from_log_beta(alpha, mu, lo, delta2)?.terms(gamma, w_bound, c_bound);
        let which = if t[0] > target { 1 } else { 2 };
        return Err(Error::NoFeasibleParameter(format!("term {which} exceeds eta/5 even at the smallest beta")));
    }
    if feasible(hi)?.is_none() {
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)?.is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        lo = hi;
    }
    let schedule = ParameterSchedule::from_log_beta(alpha, mu, lo, delta2)?;
    Ok(ParameterChoice { schedule, inputs, terms: schedule.terms(gamma, w_bound, c_bound) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(alpha: f64, mu: f64) -> ScheduleInputs {
        ScheduleInputs { alpha, mu, gamma: 0.1, eta: 0.1, w_bound: 1.0, c_bound: 0.01 }
    }

    #[test]
    fn half_is_infeasible_for_every_mu() {
        for mu in [0.01, 0.05, 0.5, 0.9] {
            assert!(matches!(choose_parameters(inputs(0.5, mu)), Err(Error::InfeasibleExponent { .. })));
        }
    }

    #[test]
    fn exponent_and_epsilon() {
        assert!((schedule_exponent(0.75, 0.1) - 1.7).abs() < 1e-12);
        let s = ParameterSchedule::from_beta(0.75, 0.5, 0.01, 0.1).unwrap();
        assert!((s.epsilon() - 1e-4).abs() < 1e-16);
        let back = ParameterSchedule::from_epsilon(0.75, 0.5, 1e-4, 0.1).unwrap();
        assert!((back.beta() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn chosen_terms_meet_the_target() {
        for alpha in [0.55, 0.65, 0.75, 0.85, 0.95] {
            let c = choose_parameters(inputs(alpha, 0.05)).unwrap();
            let again = c.schedule.terms(0.1, 1.0, 0.01);
            for t in again {
                assert!(t <= 0.02 * (1.0 + 1e-9), "alpha {alpha}: {again:?}");
                assert!(t >= 0.0);
            }
            assert!(c.schedule.delta1() <= c.schedule.delta2());
        }
    }

    #[test]
    fn serialized_fields_are_fixed() {
        let s = ParameterSchedule::from_beta(0.75, 0.1, 0.2, 0.05).unwrap();
        let v = serde_json::to_value(s).unwrap();
        for key in ["alpha", "mu", "beta", "delta1", "delta2", "epsilon", "exponent"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: ParameterSchedule = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
