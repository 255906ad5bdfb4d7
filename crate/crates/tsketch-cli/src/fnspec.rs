//! Target-function resolution shared by the subcommands.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use tsketch::boolfn::{BitMatrix, BooleanFunction, Family};

/// Flags naming the target Boolean function: a named family built from
/// numeric parameters, or a truth-table JSON file.
#[derive(clap::Args, Debug)]
pub struct FunctionSpec {
    /// Named function family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,

    /// Truth-table JSON file (alternative to --family).
    #[arg(long, conflicts_with = "family")]
    pub table: Option<PathBuf>,

    /// Input bit count. Columns for matrix-eq/rank-one, bits per operand
    /// for greater-than, check-matrix size for codeword.
    #[arg(long)]
    pub n: Option<u32>,

    /// Row count for matrix-eq/rank-one.
    #[arg(long)]
    pub m: Option<u32>,

    /// Radius for hamming-ball: accept Hamming weight <= d.
    #[arg(long)]
    pub d: Option<u32>,

    /// Gap parameter for hamming-gap: 1 iff |x| <= k, 0 iff |x| >= 2k,
    /// the band in between is outside the promise.
    #[arg(long = "k-param")]
    pub k_param: Option<u32>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyName {
    Or,
    And,
    Xor,
    Majority,
    HammingBall,
    HammingGap,
    /// Membership in the zero code: 1 iff every bit is clear (identity
    /// check matrix). Other codes go through --table.
    Codeword,
    MatrixEq,
    RankOne,
    GreaterThan,
}

/// A resolved source. Families stay symbolic so OR-reduction synthesis can
/// run at arities beyond the dense truth-table cap.
pub enum Source {
    Family(Family),
    Table(BooleanFunction),
}

impl FunctionSpec {
    pub fn resolve(&self) -> Result<Source> {
        if let Some(path) = &self.table {
            let f = BooleanFunction::load(path)
                .with_context(|| format!("loading truth table {}", path.display()))?;
            return Ok(Source::Table(f));
        }
        let Some(name) = self.family else {
            bail!("exactly one of --family or --table is required");
        };
        let family = match name {
            FamilyName::Or => Family::Or { n: self.req_n(name)? },
            FamilyName::And => Family::And { n: self.req_n(name)? },
            FamilyName::Xor => Family::Xor { n: self.req_n(name)? },
            FamilyName::Majority => Family::Majority { n: self.req_n(name)? },
            FamilyName::HammingBall => Family::HammingAtMost {
                n: self.req_n(name)?,
                d: self.req(self.d, "d", name)?,
            },
            FamilyName::HammingGap => Family::HammingGap {
                n: self.req_n(name)?,
                k: self.req(self.k_param, "k-param", name)?,
            },
            FamilyName::Codeword => {
                Family::Codeword { check: BitMatrix::identity(self.req_n(name)?)? }
            }
            FamilyName::MatrixEq => Family::MatrixEq {
                rows: self.req(self.m, "m", name)?,
                cols: self.req_n(name)?,
            },
            FamilyName::RankOne => Family::RankOne {
                rows: self.req(self.m, "m", name)?,
                cols: self.req_n(name)?,
            },
            FamilyName::GreaterThan => Family::GreaterThan { half: self.req_n(name)? },
        };
        Ok(Source::Family(family))
    }

    /// Resolves and materializes the dense truth table.
    pub fn function(&self) -> Result<BooleanFunction> {
        match self.resolve()? {
            Source::Family(fam) => Ok(fam.build()?),
            Source::Table(f) => Ok(f),
        }
    }

    fn req_n(&self, fam: FamilyName) -> Result<u32> {
        self.req(self.n, "n", fam)
    }

    fn req(&self, v: Option<u32>, flag: &str, fam: FamilyName) -> Result<u32> {
        v.with_context(|| format!("--family {} requires --{flag}", fam.cli_name()))
    }
}

impl FamilyName {
    fn cli_name(self) -> &'static str {
        match self {
            FamilyName::Or => "or",
            FamilyName::And => "and",
            FamilyName::Xor => "xor",
            FamilyName::Majority => "majority",
            FamilyName::HammingBall => "hamming-ball",
            FamilyName::HammingGap => "hamming-gap",
            FamilyName::Codeword => "codeword",
            FamilyName::MatrixEq => "matrix-eq",
            FamilyName::RankOne => "rank-one",
            FamilyName::GreaterThan => "greater-than",
        }
    }
}

impl Source {
    /// Stable label for reports and hashes.
    pub fn label(&self) -> String {
        match self {
            Source::Family(fam) => fam.label(),
            Source::Table(f) => match f.family() {
                Some(name) => name.to_string(),
                None => format!("table_{}", f.n()),
            },
        }
    }

    pub fn arity(&self) -> u32 {
        match self {
            Source::Family(fam) => fam.arity(),
            Source::Table(f) => f.n(),
        }
    }
}
