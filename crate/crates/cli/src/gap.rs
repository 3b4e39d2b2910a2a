use elastic_core::gap::{default_n_max, gap_table, lattice_gap};
use elastic_core::SpectralReport;

use crate::failure::Failure;
use crate::{parse_range, print_json, Format, GapArgs};

pub fn text_table(reports: &[SpectralReport]) -> String {
    let mut out = format!(
        "{:>6} {:>20} {:>6} {:>22} {:>20} {:>6} {:>20}\n",
        "omega", "lambda_omega", "argmin", "delta_omega", "realizable_gap", "n", "mu_omega"
    );
    for r in reports {
        out.push_str(&format!(
            "{:>6} {:>20} {:>6} {:>22} {:>20} {:>6} {:>20}\n",
            r.omega, r.lambda_omega, r.argmin_n, r.delta_omega, r.realizable_gap, r.realizable_argmin_n, r.mu_omega
        ));
    }
    out
}

pub fn run(args: &GapArgs) -> Result<(), Failure> {
    let reports = match (&args.table, args.omega) {
        (Some(range), _) => {
            if args.n_max.is_some() {
                return Err(Failure::Usage("--n-max applies to a single --omega, not to --table".into()));
            }
            let (a, b) = parse_range::<i64>(range, "--table")?;
            if a < 1 || b < a {
                return Err(Failure::Usage(format!("--table needs 1 ≤ W1 ≤ W2, got {range}")));
            }
            gap_table(a..=b)?
        }
        (None, Some(w)) => vec![lattice_gap(w, args.n_max.unwrap_or_else(|| default_n_max(w)))?],
        (None, None) => return Err(Failure::Usage("either --omega or --table is required".into())),
    };
    match args.format {
        Format::Text => print!("{}", text_table(&reports)),
        Format::Json if args.table.is_none() => print_json(&reports[0])?,
        Format::Json => print_json(&reports)?,
    }
    Ok(())
}
