use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FundamentalMap, Mixer, Sideband, OCCUPIED_DBC};
use crate::signals::{compute_spectrum, mean_power_dbm, SampledSignal, Spectrum};

/// Smooth odd limiter `s * tanh(x / s)`: unit slope at the origin, output
/// bounded by `s`.
pub fn sat(x: f64, s: f64) -> f64 {
    s * (x / s).tanh()
}

/// Saturating stand-in for a Gilbert-cell mixer.
///
/// `out = sat(gm_gain * v_if; gm_sat) * sat(v_lo; lo_sat) + if_leak * v_if + lo_leak * v_lo`
///
/// followed by a rotation of the upper-sideband fundamentals by
/// `am_pm_slope * max(0, P_in - am_pm_threshold)`, with `P_in` the mean
/// power of the IF record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateDevice {
    pub gm_gain: f64,
    pub gm_sat: f64,
    pub lo_sat: f64,
    pub if_leak: f64,
    pub lo_leak: f64,
    pub am_pm_slope: f64,
    pub am_pm_threshold: f64,
}

impl Default for SurrogateDevice {
    /// The shipped golden parameter set (also in `configs/surrogate.toml`).
    fn default() -> Self {
        Self {
            gm_gain: 4.3,
            gm_sat: 1.0,
            lo_sat: 0.5,
            if_leak: 0.01,
            lo_leak: 0.02,
            am_pm_slope: 0.05,
            am_pm_threshold: -10.0,
        }
    }
}

impl SurrogateDevice {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gm_gain,
            self.gm_sat,
            self.lo_sat,
            self.if_leak,
            self.lo_leak,
            self.am_pm_slope,
            self.am_pm_threshold,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "surrogate parameters must be finite".into(),
            ));
        }
        if !(self.gm_sat > 0.0 && self.lo_sat > 0.0) {
            return Err(Error::InvalidConfig(
                "saturation knees must be positive".into(),
            ));
        }
        if self.if_leak < 0.0 || self.lo_leak < 0.0 {
            return Err(Error::InvalidConfig(
                "leak gains must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let dev: Self = toml::from_str(text)?;
        dev.validate()?;
        Ok(dev)
    }

    /// Memoryless part only, without the AM-PM rotation.
    pub fn eval_samples(
        &self,
        v_if: &SampledSignal,
        v_lo: &SampledSignal,
    ) -> Result<SampledSignal> {
        v_if.check_compatible(v_lo)?;
        let samples = v_if
            .samples()
            .iter()
            .zip(v_lo.samples())
            .map(|(&x, &l)| {
                sat(self.gm_gain * x, self.gm_sat) * sat(l, self.lo_sat)
                    + self.if_leak * x
                    + self.lo_leak * l
            })
            .collect();
        SampledSignal::new(v_if.sample_rate(), samples)
    }

    pub fn am_pm(&self, p_in_dbm: f64) -> f64 {
        self.am_pm_slope * (p_in_dbm - self.am_pm_threshold).max(0.0)
    }
}

impl Mixer for SurrogateDevice {
    fn mix_spectrum(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<Spectrum> {
        let out = compute_spectrum(&self.eval_samples(v_if, v_lo)?, r);
        let rot = self.am_pm(mean_power_dbm(v_if.samples(), r));
        if rot == 0.0 {
            return Ok(out);
        }
        let fund = FundamentalMap::detect(
            &compute_spectrum(v_if, r),
            &compute_spectrum(v_lo, r),
            Sideband::Upper,
            OCCUPIED_DBC,
        );
        let rotations: Vec<(usize, f64)> = fund.bins().into_iter().map(|k| (k, rot)).collect();
        out.rotated(&rotations)
    }

    fn mix(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<SampledSignal> {
        if self.am_pm(mean_power_dbm(v_if.samples(), r)) == 0.0 {
            self.eval_samples(v_if, v_lo)
        } else {
            self.mix_spectrum(v_if, v_lo, r)?.to_signal()
        }
    }
}

/// Surrogate output record for the given IF and LO drive.
pub fn surrogate_eval(
    dev: &SurrogateDevice,
    v_if: &SampledSignal,
    v_lo: &SampledSignal,
    ref_impedance: f64,
) -> Result<SampledSignal> {
    dev.mix(v_if, v_lo, ref_impedance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{synth_multitone, Port, Tone, ToneSet};

    fn record(port: Port, freqs: &[f64], amp: f64) -> SampledSignal {
        let t = ToneSet::new(
            port,
            freqs
                .iter()
                .map(|&f| Tone::new(f, amp, 0.0).unwrap())
                .collect(),
        )
        .unwrap();
        synth_multitone(&t, 64e9, 12800).unwrap()
    }

    #[test]
    fn small_signal_is_ideal_multiplier() {
        let dev = SurrogateDevice {
            if_leak: 0.0,
            lo_leak: 0.0,
            ..Default::default()
        };
        let v_if = record(Port::If, &[1e9], 1e-4);
        let v_lo = record(Port::Lo, &[9e9], 1e-3);
        let s = compute_spectrum(&surrogate_eval(&dev, &v_if, &v_lo, 50.0).unwrap(), 50.0);
        let got = s.bins()[s.bin_index(10e9).unwrap()].norm();
        let ideal = dev.gm_gain * 1e-4 * 1e-3 / 2.0;
        assert!((20.0 * (got / ideal).log10()).abs() < 0.05);
    }

    #[test]
    fn pure_if_drive_gives_leak_only() {
        let dev = SurrogateDevice::default();
        let v_if = record(Port::If, &[1e9], 0.2);
        let v_lo = SampledSignal::zeros(64e9, 12800).unwrap();
        let out = dev.eval_samples(&v_if, &v_lo).unwrap();
        for (o, x) in out.samples().iter().zip(v_if.samples()) {
            assert!((o - dev.if_leak * x).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_in_each_port() {
        // negating v_if flips the core and the IF leak but not the LO leak
        let dev = SurrogateDevice::default();
        let v_if = record(Port::If, &[0.995e9, 1.005e9], 0.1);
        let v_lo = record(Port::Lo, &[9e9, 9.5e9], 0.316);
        let a = dev.eval_samples(&v_if, &v_lo).unwrap();
        let b = dev.eval_samples(&v_if.scaled(-1.0), &v_lo).unwrap();
        for ((x, y), l) in a.samples().iter().zip(b.samples()).zip(v_lo.samples()) {
            assert!((x + y - 2.0 * dev.lo_leak * l).abs() < 1e-14);
        }
    }

    #[test]
    fn no_even_order_products() {
        let dev = SurrogateDevice::default();
        let v_if = record(Port::If, &[0.995e9, 1.005e9], 0.1);
        let v_lo = record(Port::Lo, &[9e9, 9.5e9], 0.316);
        let s = compute_spectrum(&dev.eval_samples(&v_if, &v_lo).unwrap(), 50.0);
        let peak = s.power_dbm().iter().cloned().fold(f64::MIN, f64::max);
        // even order on one port: 2 f_if, f_if1 + f_if2, f_lo +- 2 f_if, 2 f_lo
        for f in [1.99e9, 2.0e9, 10.99e9, 7.01e9, 18e9, 18.5e9, 0.5e9, 12e9] {
            assert!(s.power_dbm()[s.bin_index(f).unwrap()] < peak - 150.0, "{f}");
        }
    }

    #[test]
    fn parameters_validated() {
        let bad = SurrogateDevice {
            gm_sat: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(SurrogateDevice::from_toml("gm_gain = 1.0").is_err());
    }
}
