use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use elastic_core::experiments::*;
use elastic_core::flow::{format_number, TimeSeries};

use crate::failure::{read_text, Failure};
use crate::output::OutputDir;
use crate::{ExperimentArgs, ExperimentName};

/// Columns written to the plot-data file.
const PLOT_COLUMNS: [&str; 8] = ["L", "E", "Kosc", "e", "ks2", "lambda", "a", "dist"];

/// One block per quantity: a `# name` line, then `t value` rows, blocks
/// separated by a blank line.
pub fn plot_data(series: &TimeSeries) -> String {
    let mut out = String::new();
    for name in PLOT_COLUMNS {
        let col = series.column(name);
        if col.is_empty() {
            continue;
        }
        out.push_str(&format!("# {name}\n"));
        for (t, v) in col {
            out.push_str(&format!("{} {}\n", format_number(t), format_number(v)));
        }
        out.push('\n');
    }
    out
}

fn params<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    let (json, origin) = if text.trim_start().starts_with('{') {
        (text.to_string(), "--params".to_string())
    } else {
        let path = Path::new(text);
        (read_text(path, "params file")?, path.display().to_string())
    };
    serde_json::from_str(&json).map_err(|e| Failure::Usage(format!("{origin}: {e}")))
}

fn finish<P: Serialize, R: Serialize>(
    args: &ExperimentArgs,
    params: &P,
    report: &R,
    series: Option<&TimeSeries>,
    passed: bool,
) -> Result<(), Failure> {
    let mut out = OutputDir::create(&args.out)?;
    if let Some(series) = series {
        out.write("series.csv", series.to_csv().as_bytes())?;
        out.write("plot_data.txt", plot_data(series).as_bytes())?;
    }
    out.write_json("verdict.json", report)?;
    let config = serde_json::json!({
        "experiment": args.name.as_str(),
        "params": params,
    });
    out.finish("experiment", config, None)?;
    eprintln!("verdict written to {}", args.out.join("verdict.json").display());
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} experiment failed; see {}",
            args.name.as_str(),
            args.out.join("verdict.json").display()
        )))
    }
}

impl ExperimentName {
    fn as_str(self) -> &'static str {
        match self {
            ExperimentName::ModeDecay => "mode_decay",
            ExperimentName::Translation => "translation",
            ExperimentName::MainTheorem => "main_theorem",
            ExperimentName::Unrescaled => "unrescaled",
        }
    }
}

pub fn run(args: &ExperimentArgs) -> Result<(), Failure> {
    match args.name {
        ExperimentName::ModeDecay => {
            let p: ModeDecayParams = params(&args.params)?;
            let r = mode_decay_experiment(&p)?;
            finish(args, &p, &r, r.series.as_ref(), r.passed)
        }
        ExperimentName::Translation => {
            let p: TranslationParams = params(&args.params)?;
            let r = translation_decay_experiment(&p)?;
            finish(args, &p, &r, r.series.as_ref(), r.passed)
        }
        ExperimentName::MainTheorem => {
            let p: MainTheoremParams = params(&args.params)?;
            let r = main_theorem_experiment(&p)?;
            finish(args, &p, &r, r.series.as_ref(), r.passed)
        }
        ExperimentName::Unrescaled => {
            let p: UnrescaledParams = params(&args.params)?;
            let r = unrescaled_asymptotics_experiment(&p)?;
            finish(args, &p, &r, r.series.as_ref(), r.passed)
        }
    }
}
