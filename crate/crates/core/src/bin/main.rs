use clap::{Parser, Subcommand};
use poisson_coh::cli::{
    cmd_hp, cmd_verify, input_error, load_deformation, load_structure, parse_range, HpArgs,
    Method, VerifyArgs,
};

/// Exact weight-graded Poisson cohomology and first-order Poisson
/// deformations for weighted-homogeneous polynomial Poisson structures.
#[derive(Parser)]
#[command(name = "poisson-coh", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute weight-graded Poisson cohomology dimensions.
    Hp {
        /// Built-in structure (symplectic2, symplectic4, sl2star, a1cone).
        #[arg(long, conflicts_with = "structure")]
        example: Option<String>,
        /// JSON structure-description file.
        #[arg(long)]
        structure: Option<String>,
        /// Complex to use: `lp` (Lichnerowicz-Poisson) or `harrison`
        /// (truncated total complex).
        #[arg(long, default_value = "lp")]
        method: String,
        /// Inclusive degree range A..B (lp method).
        #[arg(long, default_value = "0..2")]
        degrees: String,
        /// Inclusive weight range A..B (negative bounds allowed).
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        /// Cohomology degree for the harrison method (1 or 2).
        #[arg(long)]
        hp: Option<usize>,
        /// Truncation bound on total input weight (harrison method).
        #[arg(long, default_value_t = 6)]
        trunc: i64,
        /// Exit with status 3 when any truncated dimension is unstable.
        #[arg(long)]
        require_stable: bool,
        /// Output format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
        /// Skip the Jacobi check when ingesting the structure.
        #[arg(long)]
        defer_jacobi: bool,
    },
    /// Verify a structure (and optionally a first-order deformation),
    /// emitting a certificate.
    Verify {
        #[arg(long, conflicts_with = "structure")]
        example: Option<String>,
        #[arg(long)]
        structure: Option<String>,
        /// JSON deformation file to check against the structure.
        #[arg(long)]
        deformation: Option<String>,
        /// Truncation bound for deformation checks.
        #[arg(long, default_value_t = 6)]
        trunc: i64,
    },
}

fn run() -> (i32, String) {
    let cli = Cli::parse();
    match cli.command {
        Command::Hp {
            example,
            structure,
            method,
            degrees,
            weights,
            hp,
            trunc,
            require_stable,
            format,
            defer_jacobi,
        } => {
            let desc = match load_structure(example.as_deref(), structure.as_deref()) {
                Ok(d) => d,
                Err(e) => return input_error(&e),
            };
            let method = match method.as_str() {
                "lp" => Method::Lp,
                "harrison" => Method::Harrison,
                other => return input_error(&format!("unknown method `{other}`")),
            };
            let degrees = match parse_range(&degrees) {
                Ok(r) => r,
                Err(e) => return input_error(&e),
            };
            let weights = match weights.as_deref().map(parse_range).transpose() {
                Ok(w) => w,
                Err(e) => return input_error(&e),
            };
            let csv = match format.as_str() {
                "json" => false,
                "csv" => true,
                other => return input_error(&format!("unknown format `{other}`")),
            };
            let args = HpArgs {
                method,
                degrees,
                weights,
                hp,
                trunc,
                require_stable,
                defer_jacobi,
                csv,
            };
            match cmd_hp(&desc, &args) {
                Ok(out) => out,
                Err(e) => input_error(&e),
            }
        }
        Command::Verify {
            example,
            structure,
            deformation,
            trunc,
        } => {
            let desc = match load_structure(example.as_deref(), structure.as_deref()) {
                Ok(d) => d,
                Err(e) => return input_error(&e),
            };
            let deformation = match deformation.as_deref().map(load_deformation).transpose() {
                Ok(d) => d,
                Err(e) => return input_error(&e),
            };
            match cmd_verify(&desc, &VerifyArgs { trunc, deformation }) {
                Ok(out) => out,
                Err(e) => input_error(&e),
            }
        }
    }
}

fn main() {
    let (code, out) = run();
    print!("{out}");
    std::process::exit(code);
}
