use std::path::Path;

use multibox::model::load_model;
use multibox::oracle::SurrogateDevice;
use multibox::radar::{
    run_scenario, MixerChoice, RadarConfig, RadarMetrics, RadarRun, RadarScenario,
};
use serde::Serialize;

use crate::config::base_dir;
use crate::failure::{read_text, write_text, Failure, Outcome};
use crate::manifest::{CommandKind, RunManifest};
use crate::output::{rdm_csv, rdm_svg, write_json};

#[derive(Serialize)]
struct Labeled<'a> {
    mixer: String,
    metrics: &'a RadarMetrics,
}

/// Second run minus first, in dB.
#[derive(Debug, Serialize)]
pub struct MetricDeltas {
    pub sinr_db: f64,
    pub pslr_db: f64,
    pub islr_db: f64,
}

#[derive(Serialize)]
struct Comparison<'a> {
    a: Labeled<'a>,
    b: Labeled<'a>,
    delta: MetricDeltas,
}

/// `ideal`, `surrogate`, or a model document path.
fn parse_choice(
    arg: &str,
    scenario: &RadarScenario,
    manifest: &mut RunManifest,
) -> Outcome<(MixerChoice, String)> {
    Ok(match arg {
        "ideal" => (MixerChoice::Ideal, "ideal".into()),
        "surrogate" => {
            // the scenario's own surrogate when it has one
            let dev = match &scenario.tx_mixer {
                MixerChoice::Surrogate(d) => d.clone(),
                _ => SurrogateDevice::default(),
            };
            (MixerChoice::Surrogate(dev), "surrogate".into())
        }
        path => {
            let p = Path::new(path);
            let model =
                load_model(&read_text(p)?).map_err(|e| Failure::from(e).context(p.display()))?;
            manifest.add_input(p)?;
            (MixerChoice::Model(model), format!("model:{path}"))
        }
    })
}

fn write_run(run: &RadarRun, out: &Path, suffix: &str, label: &str) -> Outcome<()> {
    write_text(&out.join(format!("rdm{suffix}.csv")), &rdm_csv(&run.rdm))?;
    write_text(
        &out.join(format!("rdm{suffix}.svg")),
        &rdm_svg(
            &run.rdm,
            &format!("Range-Doppler map, {label} transmit mixer"),
        ),
    )?;
    write_json(
        &out.join(format!("metrics{suffix}.json")),
        &Labeled {
            mixer: label.to_string(),
            metrics: &run.metrics,
        },
    )
}

pub fn run(
    config_path: &Path,
    out: &Path,
    compare: Option<&[String]>,
    seed: Option<u64>,
    targets: Option<usize>,
) -> Outcome<()> {
    if targets == Some(0) {
        return Err(Failure::invalid(
            "--targets must be at least 1; metrics need a detected peak",
        ));
    }
    let rc = RadarConfig::from_toml(&read_text(config_path)?)
        .map_err(|e| Failure::from(e).context(config_path.display()))?;
    let base = base_dir(config_path);
    let mut scenario = rc.resolve(base)?;
    if let Some(s) = seed {
        scenario.frame_config.seed = s;
        scenario.noise_seed = s;
    }
    if let Some(n) = targets {
        if n > scenario.targets.len() {
            return Err(Failure::invalid(format!(
                "--targets {n} exceeds the {} targets of the scenario",
                scenario.targets.len()
            )));
        }
        scenario.targets.truncate(n);
    }
    if scenario.targets.is_empty() {
        return Err(Failure::invalid("the scenario has no targets"));
    }

    let mut manifest = RunManifest::new(
        CommandKind::Radar,
        config_path,
        Some(scenario.frame_config.seed),
        out,
    );
    manifest.add_input(config_path)?;
    for spec in [&rc.tx_mixer, &rc.rx_conversion] {
        if let Some(p) = spec.referenced_file(base) {
            manifest.add_input(&p)?;
        }
    }
    let choices = match compare {
        Some(args) => {
            let a = parse_choice(&args[0], &scenario, &mut manifest)?;
            let b = parse_choice(&args[1], &scenario, &mut manifest)?;
            Some((a, b))
        }
        None => None,
    };
    manifest.write(out)?;

    match choices {
        None => {
            let label = scenario.tx_mixer.label().to_string();
            let run = run_scenario(&scenario)?;
            write_run(&run, out, "", &label)
        }
        Some(((ma, la), (mb, lb))) => {
            let run_with = |m: MixerChoice, which: &'static str| {
                let mut s = scenario.clone();
                s.tx_mixer = m;
                run_scenario(&s).map_err(|e| Failure::from(e).context(format!("run {which}")))
            };
            let ra = run_with(ma, "A")?;
            let rb = run_with(mb, "B")?;
            write_run(&ra, out, "_a", &la)?;
            write_run(&rb, out, "_b", &lb)?;
            let (x, y) = (&ra.metrics, &rb.metrics);
            write_json(
                &out.join("comparison.json"),
                &Comparison {
                    a: Labeled {
                        mixer: la,
                        metrics: x,
                    },
                    b: Labeled {
                        mixer: lb,
                        metrics: y,
                    },
                    delta: MetricDeltas {
                        sinr_db: y.sinr - x.sinr,
                        pslr_db: y.pslr - x.pslr,
                        islr_db: y.islr - x.islr,
                    },
                },
            )
        }
    }
}
