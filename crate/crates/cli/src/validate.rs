use std::path::Path;

use multibox::model::{
    eval_mixer, eval_poly, load_model, save_model, Mixer, MixerModel, ToneSweep, TABLE1_MULTI_LO_HZ,
};
use multibox::signals::{compute_spectrum, SampledSignal};
use serde::Serialize;

use crate::failure::{read_text, Failure, Outcome};
use crate::manifest::{CommandKind, RunManifest};
use crate::output::write_json;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    model: String,
    passed: bool,
    checks: &'a [Check],
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

/// Deterministic, non-periodic test vector in roughly `[-scale, scale]`.
fn probe(n: usize, scale: f64, k: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            scale * (0.7 * (k * t).sin() + 0.3 * (2.3 * k * t + 0.4).cos())
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Run the invariant suite on a parsed document.
pub fn checks(text: &str) -> Vec<Check> {
    let model = match load_model(text) {
        Ok(m) => m,
        Err(e) => return vec![check("document loads", false, e.to_string())],
    };
    let mut out = vec![check("document loads", true, "schema and bounds accepted")];

    let resaved = save_model(&model);
    let stable = load_model(&resaved)
        .map(|m| save_model(&m) == resaved)
        .unwrap_or(false);
    out.push(check("save-load-save is byte stable", stable, ""));

    out.push(match model.check_bounds() {
        Ok(()) => check("coefficients within bounds", true, ""),
        Err(e) => check("coefficients within bounds", false, e.to_string()),
    });

    out.push(odd_symmetry(&model));

    let grid: Vec<f64> = (0..=80).map(|i| -60.0 + i as f64).collect();
    let bad_phase: Vec<usize> = model
        .phase()
        .iter()
        .filter(|(_, p)| grid.iter().any(|&x| !p.eval(x).is_finite()))
        .map(|(k, _)| *k)
        .collect();
    out.push(check(
        "phase finite over -60..20 dBm",
        bad_phase.is_empty(),
        if bad_phase.is_empty() {
            format!("{} bins", model.phase().len())
        } else {
            format!("non-finite on bins {bad_phase:?}")
        },
    ));

    out.push(match phase_preserves_power(&model) {
        Ok(worst) => check(
            "phase block preserves power",
            worst <= 1e-9,
            format!("worst bin change {worst:.3e} dB"),
        ),
        Err(e) => check("phase block preserves power", false, e.to_string()),
    });
    out
}

/// Negating the IF drive negates the core and the IF sidebranch but leaves
/// the LO sidebranch alone.
fn odd_symmetry(model: &MixerModel) -> Check {
    let n = 257;
    let x = probe(n, 0.3, 0.37);
    let y = probe(n, 0.3, 0.61);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let run = |a: &[f64]| -> multibox::Result<Vec<f64>> {
        let s = eval_mixer(
            model,
            &SampledSignal::new(1.0, a.to_vec())?,
            &SampledSignal::new(1.0, y.clone())?,
        )?;
        Ok(s.into_samples())
    };
    let (pos, flip) = match (run(&x), run(&neg)) {
        (Ok(p), Ok(f)) => (p, f),
        (Err(e), _) | (_, Err(e)) => return check("odd symmetry", false, e.to_string()),
    };
    let kappa = eval_poly(model.side_lo(), &y);
    let lhs: Vec<f64> = pos.iter().zip(&flip).map(|(p, f)| p + f).collect();
    let twice: Vec<f64> = kappa.iter().map(|k| 2.0 * k).collect();
    let scale = pos.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    let err = max_abs_diff(&lhs, &twice) / scale;
    check(
        "odd symmetry",
        err <= 1e-12,
        format!("relative error {err:.3e}"),
    )
}

/// Largest dB change the phase block makes to any bin on the two-tone setup.
fn phase_preserves_power(model: &MixerModel) -> multibox::Result<f64> {
    let setup = ToneSweep::table1(&TABLE1_MULTI_LO_HZ)?;
    let lo = setup.lo_signal()?;
    let mut worst: f64 = 0.0;
    for p in [-20.0, 0.0] {
        let v_if = setup.if_signal(p)?;
        let with = model.mix_spectrum(&v_if, &lo, setup.ref_impedance)?;
        let without = compute_spectrum(&eval_mixer(model, &v_if, &lo)?, setup.ref_impedance);
        worst = worst.max(max_abs_diff(with.power_dbm(), without.power_dbm()));
    }
    Ok(worst)
}

pub fn run(model_path: &Path, out: Option<&Path>) -> Outcome<()> {
    let text = read_text(model_path)?;
    if let Some(dir) = out {
        let mut manifest = RunManifest::new(CommandKind::Validate, model_path, None, dir);
        manifest.add_input(model_path)?;
        manifest.write(dir)?;
    }
    let results = checks(&text);
    for c in &results {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{mark} {}", c.name);
        } else {
            println!("{mark} {}: {}", c.name, c.detail);
        }
    }
    let passed = results.iter().all(|c| c.passed);
    if let Some(dir) = out {
        write_json(
            &dir.join("validation.json"),
            &Report {
                model: model_path.display().to_string(),
                passed,
                checks: &results,
            },
        )?;
    }
    if passed {
        Ok(())
    } else {
        let n = results.iter().filter(|c| !c.passed).count();
        Err(Failure::invalid(format!(
            "{n} invariant check(s) failed for {}",
            model_path.display()
        )))
    }
}
