use crate::error::Result;
use crate::sim::scenario::GovernorParams;
use crate::timeseries::{Unit, UniformTrace};

/// Internal sub-steps per output sample.
pub(crate) const SUBSTEPS: usize = 10;

/// Lag state `x1` and lead-lag state `x2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct GovernorState {
    pub lag: f64,
    pub lead: f64,
}

impl GovernorParams {
    fn gain(&self, f_n: f64) -> f64 {
        self.rating_mw / (self.droop * f_n)
    }

    /// State derivative for a frequency deviation `df` (Hz).
    pub(crate) fn derivative(&self, state: GovernorState, df: f64, f_n: f64) -> GovernorState {
        let reference = -df * self.gain(f_n);
        let ratio = self.t2_s / self.t3_s;
        GovernorState {
            lag: (reference - state.lag) / self.t1_s,
            lead: ((1.0 - ratio) * state.lag - state.lead) / self.t3_s,
        }
    }

    /// Mechanical power change (MW) from pre-event dispatch.
    pub(crate) fn output(&self, state: GovernorState) -> f64 {
        let raw = self.t2_s / self.t3_s * state.lag + state.lead;
        raw.clamp(-self.headroom_down_mw, self.headroom_up_mw)
    }
}

pub(crate) fn advance(state: GovernorState, rate: GovernorState, h: f64) -> GovernorState {
    GovernorState {
        lag: state.lag + h * rate.lag,
        lead: state.lead + h * rate.lead,
    }
}

/// Governor output driven by a measured frequency trace, from zero state.
///
/// The deviation is taken from `f_n` and interpolated linearly between
/// samples; integration uses the same explicit trapezoid as the simulator.
pub fn governor_response(
    params: &GovernorParams,
    frequency: &UniformTrace,
    f_n: f64,
) -> Result<UniformTrace> {
    params.validate()?;
    let f = frequency.values();
    let h = frequency.dt() / SUBSTEPS as f64;
    let mut state = GovernorState::default();
    let mut out = Vec::with_capacity(f.len());
    out.push(params.output(state));
    for k in 1..f.len() {
        let (a, b) = (f[k - 1] - f_n, f[k] - f_n);
        for j in 0..SUBSTEPS {
            let df0 = a + (b - a) * j as f64 / SUBSTEPS as f64;
            let df1 = a + (b - a) * (j + 1) as f64 / SUBSTEPS as f64;
            let k1 = params.derivative(state, df0, f_n);
            let k2 = params.derivative(advance(state, k1, h), df1, f_n);
            state = GovernorState {
                lag: state.lag + 0.5 * h * (k1.lag + k2.lag),
                lead: state.lead + 0.5 * h * (k1.lead + k2.lead),
            };
        }
        out.push(params.output(state));
    }
    UniformTrace::new(
        frequency.start_time(),
        frequency.dt(),
        out,
        Unit::MW,
        params.id.clone(),
    )
}
