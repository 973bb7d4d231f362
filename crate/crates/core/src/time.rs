use crate::{Error, Result};

/// Number of steps of size `dt` covering `[t0, t_end]`; the last step may
/// overshoot `t_end` by less than `dt`.
pub(crate) fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "time step must be positive and finite"));
    }
    if !(t_end > t0) {
        return Err(Error::param("t_end", "must exceed t0"));
    }
    let steps = (t_end - t0) / dt;
    Ok((steps - 1e-9).ceil().max(1.0) as usize)
}
