use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cqoa", version, about = "Exact circle products, OPEs and BRST/BV checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Algebra selector: `bc:<lambda>`, `vir`, `brst`, optionally `vir:kappa=<k>`.
    #[arg(long, global = true, default_value = "brst")]
    pub algebra: String,
    /// Central charge of the matter sector: `sym` or an exact rational.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for sampled sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub max_weight: Option<i64>,
    /// Weight cutoff for matrix elements on states.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub cutoff: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub n_floor: Option<i64>,
    /// Check a random sample of this many cases instead of the full sweep.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Also print the state `u(-1)|0>` of each resulting expression.
    #[arg(long, global = true)]
    pub dump_states: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Singular part of the OPE u(z)v(w).
    Ope {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// The circle product u ∘ₙ v.
    Circle {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        n: i64,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// Normal form of an expression.
    Nf {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// The Wick product :uv:.
    Wick {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// Canonical monomials and basis states by bidegree.
    Basis {
        #[arg(long, allow_hyphen_values = true)]
        weight: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        ghost: Option<i64>,
    },
    /// Semi-infinite commutativity axioms on all monomial pairs.
    CheckAxioms,
    #[command(subcommand)]
    Brst(BrstCommand),
    #[command(subcommand)]
    Bv(BvCommand),
    /// Engine products against the mode-sum definition on states.
    OracleCompare {
        #[arg(allow_hyphen_values = true)]
        u: Option<String>,
        #[arg(allow_hyphen_values = true)]
        v: Option<String>,
        /// Largest product index compared; defaults to 5.
        #[arg(long, allow_hyphen_values = true)]
        n_max: Option<i64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BrstCommand {
    /// The current J, the total stress tensor and the OPE J(z)b(w).
    Current,
    /// J ∘₀ J in normal form.
    Dsquare {
        /// Also report the four contributions of the matter and ghost parts.
        #[arg(long)]
        parts: bool,
    },
    /// J ∘₀ J modulo total derivatives.
    Nilpotency,
    /// Closed and exact elements of one bidegree (kappa = 26).
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        weight: i64,
        #[arg(long, allow_hyphen_values = true)]
        ghost: i64,
    },
}

#[derive(Subcommand, Debug)]
pub enum BvCommand {
    /// Δu = b ∘₁ u.
    Delta {
        #[arg(allow_hyphen_values = true)]
        u: String,
    },
    /// The bracket {u, v}.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// Second-order identity for one triple, or a sweep over monomial triples.
    SecondOrder {
        #[arg(allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(allow_hyphen_values = true)]
        c: Option<String>,
    },
}
