use elastic_core::fit::{fit_decay_rate, FitWindow};
use elastic_core::flow::{parse_series_csv, CSV_HEADER};

use crate::failure::{in_file, read_text, Failure};
use crate::{parse_range, print_json, FitArgs};

pub fn run(args: &FitArgs) -> Result<(), Failure> {
    let records = parse_series_csv(&read_text(&args.series, "series")?).map_err(in_file(&args.series))?;
    let known = CSV_HEADER.split(',').any(|c| c == args.column) || args.column == "a";
    if !known {
        return Err(Failure::Usage(format!(
            "unknown column `{}`; expected one of {CSV_HEADER},a",
            args.column
        )));
    }
    // gauge columns are empty where the curve has no normal-angle gauge
    let series: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.column(&args.column).map(|v| (r.t, v)))
        .collect();
    let window = if args.window == "auto" {
        FitWindow::Auto
    } else {
        let (t_a, t_b) = parse_range::<f64>(&args.window, "--window")?;
        FitWindow::Range { t_a, t_b }
    };
    print_json(&fit_decay_rate(&series, &args.column, window, args.floor)?)
}
