use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "homlab", version, about = "Educational homophily indicators, counterfactuals and trend scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Indicator values for every table in the panel.
    Indicators(Common),
    /// Fit one table to another table's marginals.
    Counterfactual {
        #[command(flatten)]
        common: Common,
        /// State of the source table; the national table when omitted.
        #[arg(long)]
        state: Option<String>,
        /// State of the target table; defaults to the source state.
        #[arg(long)]
        target_state: Option<String>,
        /// Wave supplying the association; defaults to the last wave.
        #[arg(long)]
        source_year: Option<u32>,
        /// Wave supplying the marginals; defaults to the first wave.
        #[arg(long)]
        target_year: Option<u32>,
    },
    /// Structural / non-structural decomposition per state and decade.
    Decompose(Common),
    /// U-shape and income-trend scoring plus cumulative series.
    Trend(Common),
    /// Run the analytical criteria checks.
    Criteria {
        #[command(flatten)]
        common: Common,
        /// Instances drawn per check.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Couples CSV: year,state,husband_edu,wife_edu,count.
    #[arg(long)]
    pub couples: Option<PathBuf>,
    /// Income CSV: state,year,top10_share.
    #[arg(long)]
    pub income: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// ipf, mdba, meda, csa, nm or nm-continuous.
    #[arg(long)]
    pub method: Option<String>,
    /// three, hs or college.
    #[arg(long)]
    pub categories: Option<String>,
    /// paper-integer or continuous.
    #[arg(long)]
    pub rounding: Option<String>,
    /// sequential or with-interaction.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Track an indicator in `trend` instead of the method's effect.
    #[arg(long)]
    pub indicator: Option<String>,
    /// Seed for the randomized criteria checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Indicators(c) => commands::indicators(&c),
        Command::Counterfactual {
            common,
            state,
            target_state,
            source_year,
            target_year,
        } => commands::counterfactual(
            &common,
            state.as_deref(),
            target_state.as_deref(),
            source_year,
            target_year,
        ),
        Command::Decompose(c) => commands::decompose(&c),
        Command::Trend(c) => commands::trend(&c),
        Command::Criteria { common, samples } => commands::criteria(&common, samples),
    };
    match result {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
