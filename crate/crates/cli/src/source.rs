//! Parsing of character and function arguments.

use mimicry::characters::DirichletCharacter;
use mimicry::multfun::CMFunction;
use mimicry::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `q=8,index=2`, `chi-4` or `legendre:7`.
pub fn parse_character(s: &str) -> Result<DirichletCharacter, String> {
    let s = s.trim();
    let lib = |e: Error| e.to_string();
    if s == "chi-4" {
        return Ok(DirichletCharacter::chi_minus_4());
    }
    if let Some(p) = s.strip_prefix("legendre:") {
        let p: u64 = p.trim().parse().map_err(|_| format!("bad prime in {s:?}"))?;
        return DirichletCharacter::legendre(p).map_err(lib);
    }
    let (mut q, mut index) = (None, None);
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value in {s:?}"))?;
        let v: u64 = v.trim().parse().map_err(|_| format!("bad number {v:?} in {s:?}"))?;
        match k.trim() {
            "q" => q = Some(v),
            "index" => index = Some(v),
            other => return Err(format!("unknown key {other:?} in {s:?}")),
        }
    }
    match (q, index) {
        (Some(q), Some(i)) => DirichletCharacter::from_index(q, i).map_err(lib),
        _ => Err(format!("character spec {s:?} needs q and index")),
    }
}

#[derive(Debug, Clone, clap::Args)]
#[group(required = true, multiple = false)]
pub struct FunctionSource {
    /// a character: q=..,index=.. | chi-4 | legendre:p
    #[arg(long = "char", value_name = "SPEC")]
    pub character: Option<String>,
    /// the constant function 1
    #[arg(long)]
    pub one: bool,
    /// random unimodular prime values up to this support (uses --seed)
    #[arg(long, value_name = "SUPPORT")]
    pub random_unimodular: Option<u64>,
    /// random prime values in the unit disc up to this support (uses --seed)
    #[arg(long, value_name = "SUPPORT")]
    pub random_disc: Option<u64>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct FunctionSpec {
    #[command(flatten)]
    pub source: FunctionSource,
    /// multiply by n^{it}
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    pub twist: Option<f64>,
}

pub enum BuildError {
    Usage(String),
    Lib(Error),
}

impl FunctionSpec {
    pub fn build(&self, seed: u64) -> Result<CMFunction, BuildError> {
        let src = &self.source;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = if let Some(c) = &src.character {
            CMFunction::from_character(&parse_character(c).map_err(BuildError::Usage)?)
        } else if src.one {
            CMFunction::one()
        } else if let Some(n) = src.random_unimodular {
            CMFunction::random_unimodular(n, &mut rng).map_err(BuildError::Lib)?
        } else if let Some(n) = src.random_disc {
            CMFunction::random_disc(n, &mut rng).map_err(BuildError::Lib)?
        } else {
            return Err(BuildError::Usage("no function given".into()));
        };
        Ok(match self.twist {
            Some(t) => f.twist(t),
            None => f,
        })
    }
}
