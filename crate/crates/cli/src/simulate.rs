use serde::Serialize;

use elastic_core::flow::{self, FlowConfig};
use elastic_core::{ClosedCurve, Error, Scenario};

use crate::failure::{in_file, read_text, Failure};
use crate::output::OutputDir;
use crate::SimulateArgs;

#[derive(Serialize)]
struct Snapshot<'a> {
    t: f64,
    points: &'a [[f64; 2]],
}

#[derive(Serialize)]
struct Summary {
    t: f64,
    steps: u64,
    samples: usize,
    length: f64,
    energy: f64,
    deviation: f64,
    k_osc: f64,
    turning_number: i64,
}

/// The initial curve and, for seeded random curves, the seed.
pub fn initial_curve(args: &SimulateArgs) -> Result<(ClosedCurve, Option<u64>, serde_json::Value), Failure> {
    if let Some(path) = &args.curve_file {
        let curve = ClosedCurve::from_json(&read_text(path, "curve file")?).map_err(in_file(path))?;
        return Ok((curve, None, serde_json::json!({ "file": path.display().to_string() })));
    }
    let scenario: Scenario = args.curve.parse()?;
    let seed = match scenario {
        Scenario::Random { seed, .. } => Some(seed),
        _ => None,
    };
    let curve = scenario.build(args.n)?;
    Ok((curve, seed, serde_json::json!({ "spec": args.curve, "n": args.n })))
}

pub fn run(args: &SimulateArgs) -> Result<(), Failure> {
    let config = FlowConfig::from_json(&read_text(&args.config, "config")?).map_err(in_file(&args.config))?;
    let (curve, seed, curve_desc) = initial_curve(args)?;
    let mut out = OutputDir::create(&args.out)?;

    let mut snapshots: Vec<(f64, ClosedCurve)> = Vec::new();
    let result = flow::run_observed(&curve, &config, |s| {
        if args.dump_curves {
            snapshots.push((s.t, s.curve.clone()));
        }
    });
    let series = match result {
        Ok(s) => s,
        Err(Error::DtUnderflow { dt, snapshot }) => {
            out.write("underflow_snapshot.json", snapshot.curve.to_json().as_bytes())?;
            let msg = format!(
                "explicit step size underflow ({dt:e}) at t = {}; last state written to {}",
                snapshot.t,
                out.path().join("underflow_snapshot.json").display()
            );
            out.finish("simulate", manifest_config(&config, &curve_desc), seed)?;
            return Err(Failure::Check(msg));
        }
        Err(e) => return Err(e.into()),
    };

    out.write("series.csv", series.to_csv().as_bytes())?;
    let fin = &series.final_state;
    out.write("final_curve.json", fin.curve.to_json().as_bytes())?;
    out.write_json(
        "summary.json",
        &Summary {
            t: fin.t,
            steps: fin.step_count,
            samples: fin.curve.n_samples(),
            length: fin.geometry.length,
            energy: fin.geometry.energy,
            deviation: fin.geometry.deviation,
            k_osc: fin.geometry.oscillation,
            turning_number: fin.geometry.turning_number,
        },
    )?;
    if args.dump_curves {
        let dump: Vec<Snapshot> = snapshots.iter().map(|(t, c)| Snapshot { t: *t, points: c.points() }).collect();
        out.write_json("snapshots.json", &dump)?;
    }
    out.finish("simulate", manifest_config(&config, &curve_desc), seed)?;
    eprintln!("wrote {} records to {}", series.records.len(), args.out.display());
    Ok(())
}

fn manifest_config(config: &FlowConfig, curve: &serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "flow": config,
        "output_every": config.output_interval(),
        "curve": curve,
    })
}
