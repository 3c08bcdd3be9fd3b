use std::collections::BTreeSet;

use num_complex::Complex64;

use super::bins::BinSets;
use crate::error::Result;
use crate::oracle::ReferenceDataset;
use crate::signals::{
    compute_spectrum, per_tone_amplitude, synth_multitone, Port, SampledSignal, Spectrum, ToneSet,
};

/// Precomputed basis spectra that make objective evaluations cheap.
///
/// With `v(P) = g(P) u` for a unit-amplitude IF record `u`, the core output
/// is `sum_ij a_i b_j g^(2i+1) spectrum(u^(2i+1) L^(2j+1))` and the
/// sidebranches are `sum_i gamma_i g^(2i+1) spectrum(u^(2i+1)) +
/// sum_j kappa_j spectrum(L^(2j+1))`. Linearity of the DFT makes this
/// exact, and only the bins any loss looks at are kept.
#[derive(Debug, Clone)]
pub struct FitContext {
    k_core: usize,
    k_side_if: usize,
    k_side_lo: usize,
    /// Per-tone IF amplitude at each grid power.
    amps: Vec<f64>,
    ref_amp: f64,
    bins: Vec<usize>,
    pos_fund: usize,
    pos_im3: usize,
    core_basis: Vec<Vec<Complex64>>,
    side_if_basis: Vec<Vec<Complex64>>,
    side_lo_basis: Vec<Vec<Complex64>>,
    template: Spectrum,
}

fn powers(x: &SampledSignal, count: usize) -> Vec<Vec<f64>> {
    let x2: Vec<f64> = x.samples().iter().map(|v| v * v).collect();
    let mut cur = x.samples().to_vec();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i > 0 {
            cur = cur.iter().zip(&x2).map(|(c, s)| c * s).collect();
        }
        out.push(cur.clone());
    }
    out
}

impl FitContext {
    pub fn new(
        refs: &ReferenceDataset,
        bins: &BinSets,
        k_core: usize,
        k_side_if: usize,
        k_side_lo: usize,
    ) -> Result<Self> {
        let t = &refs.tone_config;
        let (kf, k3) = t.bins()?;
        let mut set: BTreeSet<usize> = [kf, k3].into_iter().collect();
        set.extend(&bins.b_strong);
        set.extend(&bins.b_weak);
        set.extend(&bins.b_side);
        let bins_list: Vec<usize> = set.into_iter().collect();
        let pos = |k: usize| bins_list.binary_search(&k).expect("bin registered above");

        let n_if = t.if_template.len();
        let unit = ToneSet::new(
            Port::If,
            t.if_template
                .tones()
                .iter()
                .map(|x| x.with_amplitude(1.0))
                .collect::<Result<_>>()?,
        )?;
        let u = synth_multitone(&unit, t.sample_rate, t.length)?;
        let lo = t.lo_signal()?;
        let pick = |samples: Vec<f64>| -> Result<Vec<Complex64>> {
            let spec = compute_spectrum(
                &SampledSignal::new(t.sample_rate, samples)?,
                t.ref_impedance,
            );
            Ok(bins_list.iter().map(|&k| spec.bins()[k]).collect())
        };
        let k_if = k_core.max(k_side_if);
        let k_lo = k_core.max(k_side_lo);
        let up = powers(&u, k_if);
        let lp = powers(&lo, k_lo);
        let mut core_basis = Vec::with_capacity(k_core * k_core);
        for ui in up.iter().take(k_core) {
            for lj in lp.iter().take(k_core) {
                core_basis.push(pick(ui.iter().zip(lj).map(|(a, b)| a * b).collect())?);
            }
        }
        let side_if_basis = up
            .iter()
            .take(k_side_if)
            .map(|v| pick(v.clone()))
            .collect::<Result<_>>()?;
        let side_lo_basis = lp
            .iter()
            .take(k_side_lo)
            .map(|v| pick(v.clone()))
            .collect::<Result<_>>()?;
        let amp = |p: f64| per_tone_amplitude(p, n_if, t.ref_impedance);
        Ok(Self {
            k_core,
            k_side_if,
            k_side_lo,
            amps: refs.power_grid.iter().map(|&p| amp(p)).collect(),
            ref_amp: amp(refs.p_in_ref),
            pos_fund: pos(kf),
            pos_im3: pos(k3),
            template: refs.s_r.clone(),
            bins: bins_list,
            core_basis,
            side_if_basis,
            side_lo_basis,
        })
    }

    pub fn k_core(&self) -> usize {
        self.k_core
    }

    pub fn k_side_if(&self) -> usize {
        self.k_side_if
    }

    pub fn k_side_lo(&self) -> usize {
        self.k_side_lo
    }

    /// Bins tracked by the context, ascending.
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn position(&self, bin: usize) -> Option<usize> {
        self.bins.binary_search(&bin).ok()
    }

    fn core_at(&self, alpha: &[f64], amp: f64, positions: &[usize], out: &mut [Complex64]) {
        let (a, b) = alpha.split_at(self.k_core);
        let mut gi = amp;
        let g2 = amp * amp;
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (i, ai) in a.iter().enumerate() {
            let ca = ai * gi;
            for (j, bj) in b.iter().enumerate() {
                let c = ca * bj;
                if c == 0.0 {
                    continue;
                }
                let basis = &self.core_basis[i * self.k_core + j];
                for (o, &p) in out.iter_mut().zip(positions) {
                    *o += basis[p] * c;
                }
            }
            gi *= g2;
        }
    }

    /// Core output at every tracked bin for input power `p_in_ref`.
    pub fn core_ref(&self, alpha: &[f64]) -> Vec<Complex64> {
        let all: Vec<usize> = (0..self.bins.len()).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); all.len()];
        self.core_at(alpha, self.ref_amp, &all, &mut out);
        out
    }

    /// Sidebranch output at every tracked bin for input power `p_in_ref`.
    pub fn side_ref(&self, gamma: &[f64], kappa: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.bins.len()];
        let g2 = self.ref_amp * self.ref_amp;
        let mut gi = self.ref_amp;
        for (c, basis) in gamma.iter().zip(&self.side_if_basis) {
            for (o, b) in out.iter_mut().zip(basis) {
                *o += b * (c * gi);
            }
            gi *= g2;
        }
        for (c, basis) in kappa.iter().zip(&self.side_lo_basis) {
            for (o, b) in out.iter_mut().zip(basis) {
                *o += b * *c;
            }
        }
        out
    }

    /// Core-only fundamental and IM3 curves over the grid, in dBm.
    pub fn curves(&self, alpha: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let positions = [self.pos_fund, self.pos_im3];
        let mut buf = [Complex64::new(0.0, 0.0); 2];
        let mut f_f = Vec::with_capacity(self.amps.len());
        let mut f_im3 = Vec::with_capacity(self.amps.len());
        for &g in &self.amps {
            self.core_at(alpha, g, &positions, &mut buf);
            f_f.push(self.dbm(self.bins[self.pos_fund], buf[0]));
            f_im3.push(self.dbm(self.bins[self.pos_im3], buf[1]));
        }
        (f_f, f_im3)
    }

    pub fn dbm(&self, bin: usize, value: Complex64) -> f64 {
        self.template.bin_dbm(bin, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::select_bins;
    use crate::model::{
        enumerate_products, eval_mixer, sweep_am_am, MixerModel, PolynomialBlock, ProductKind,
        ToneSweep,
    };
    use crate::oracle::{characterize, SurrogateDevice};

    #[test]
    fn basis_matches_direct_evaluation() {
        let setup = ToneSweep {
            if_template: ToneSet::equal_power(Port::If, &[0.995e9, 1.005e9], -20.0, 50.0).unwrap(),
            lo_tones: ToneSet::equal_power(Port::Lo, &[9e9, 9.5e9], 0.0, 50.0).unwrap(),
            fund_freq: 9.995e9,
            im3_freq: 9.985e9,
            sample_rate: 64e9,
            length: 12800,
            ref_impedance: 50.0,
        };
        let grid: Vec<f64> = (0..7).map(|i| -30.0 + 5.0 * i as f64).collect();
        let refs = characterize(&SurrogateDevice::default(), &setup, &grid, -10.0).unwrap();
        let core: Vec<f64> = enumerate_products(
            &setup.if_template,
            &setup.lo_tones,
            3,
            ProductKind::Core,
            Some(32e9),
        )
        .unwrap()
        .iter()
        .map(|p| p.frequency)
        .collect();
        let side: Vec<f64> = enumerate_products(
            &setup.if_template,
            &setup.lo_tones,
            3,
            ProductKind::Sidebranch,
            Some(32e9),
        )
        .unwrap()
        .iter()
        .map(|p| p.frequency)
        .collect();
        let bins = select_bins(&refs.s_r, &core, &side, -80.0, -120.0, None).unwrap();
        let ctx = FitContext::new(&refs, &bins, 2, 2, 2).unwrap();
        let alpha = [3.1, -20.0, 1.2, -0.9];
        let (gamma, kappa) = ([0.02, 0.3], [0.01, -0.4]);
        let model = MixerModel::new(
            PolynomialBlock::new(alpha[..2].to_vec()),
            PolynomialBlock::new(alpha[2..].to_vec()),
            PolynomialBlock::new(gamma.to_vec()),
            PolynomialBlock::new(kappa.to_vec()),
        );
        let core_only = MixerModel::new(
            PolynomialBlock::new(alpha[..2].to_vec()),
            PolynomialBlock::new(alpha[2..].to_vec()),
            PolynomialBlock::default(),
            PolynomialBlock::default(),
        );
        let (f_f, f_im3) = ctx.curves(&alpha);
        let direct = sweep_am_am(&core_only, &setup, &grid).unwrap();
        for i in 0..grid.len() {
            assert!((f_f[i] - direct.f_f[i]).abs() < 1e-9);
            assert!((f_im3[i] - direct.f_im3[i]).abs() < 1e-9);
        }
        let full = compute_spectrum(
            &eval_mixer(
                &model,
                &setup.if_signal(-10.0).unwrap(),
                &setup.lo_signal().unwrap(),
            )
            .unwrap(),
            50.0,
        );
        let y: Vec<Complex64> = ctx
            .core_ref(&alpha)
            .iter()
            .zip(ctx.side_ref(&gamma, &kappa))
            .map(|(a, b)| a + b)
            .collect();
        for (p, &k) in ctx.bins().iter().enumerate() {
            let direct = full.power_dbm()[k];
            let fast = ctx.dbm(k, y[p]);
            if direct > -150.0 {
                assert!((direct - fast).abs() < 1e-9, "bin {k}: {direct} vs {fast}");
            }
        }
    }
}
