//! `nuhuncc` command-line tool.
//!
//! Subcommands build polar profiles, generate McEliece keys, encode and
//! decode files over a simulated multipath, tap transmissions as an
//! eavesdropper would, and emit the analysis tables as CSV.
//!
//! Every subcommand flag may also be given in a config file passed with
//! `--config FILE`. The file holds UTF-8 `key = value` lines where the key is
//! the long flag name without dashes; `#` starts a comment. Flags on the
//! command line override the file. Boolean flags take `true` or `false`.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 file or format error,
//! 3 cryptographic or decoding failure.

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use nuhuncc::analysis::{self, BoundsParams, Scheme, Table, Table1Params};
use nuhuncc::cipher::{BlockCipher, GoppaParams, McEliece, McElieceKeyPair, NullCipher, PublicKey, SecretKey};
use nuhuncc::gf::FieldSpec;
use nuhuncc::is_channel::{CodebookMode, ISCode, LinearISCode, NonlinearISCode};
use nuhuncc::pipeline::{
    decode_bytes, encode_bytes, eve_observe, storage_demo, DemoScenario, EncryptionLayout, EveMode, PipelineConfig,
    SeedPlacement, Transmission,
};
use nuhuncc::polar::{self, PolarProfile, SourceModel};
use nuhuncc::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "nuhuncc", version, about = "Hybrid post-quantum multipath cryptosystem for non-uniform messages")]
struct Cli {
    /// Config file of `key = value` lines applied before the command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a polar source-coding profile and write it to disk.
    Profile(ProfileArgs),
    /// Generate a McEliece key pair.
    Keygen(KeygenArgs),
    /// Encode a file into a transmission container.
    Encode(EncodeArgs),
    /// Decode a transmission container back into the original file.
    Decode(DecodeArgs),
    /// Extract the link segments an eavesdropper observes.
    Tap(TapArgs),
    /// Emit figure sweeps, rate tables, bounds, or the storage demo.
    Analyze(AnalyzeArgs),
    /// Run the three-file storage demo and print the four scheme rates.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Bernoulli parameter P(V = 1) of the source.
    #[arg(long, conflicts_with = "entropy")]
    p: Option<f64>,
    /// Source entropy H(V) in bits, used when --p is absent.
    #[arg(long)]
    entropy: Option<f64>,
}

impl SourceArgs {
    fn model(&self) -> Result<SourceModel, CliError> {
        match (self.p, self.entropy) {
            (Some(p), _) => Ok(SourceModel::new(p)?),
            (None, Some(h)) => Ok(SourceModel::from_entropy(h)?),
            (None, None) => Err(CliError::Usage("one of --p or --entropy is required".into())),
        }
    }
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Block length, a power of two.
    #[arg(long)]
    n: usize,
    /// Polarization exponent in the threshold 2^(-n^beta).
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Monte Carlo samples used to estimate the bit-channel entropies.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output profile file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct KeygenArgs {
    /// Extension degree of the Goppa support field GF(2^d).
    #[arg(long, default_value_t = 10)]
    d: u32,
    /// Goppa code length.
    #[arg(long = "n-g", default_value_t = 1024)]
    n_g: usize,
    /// Number of correctable errors.
    #[arg(long, default_value_t = 50)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output public key file.
    #[arg(long)]
    public: PathBuf,
    /// Output secret key file.
    #[arg(long)]
    secret: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Codec {
    Linear,
    Nonlinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CipherKind {
    Mceliece,
    Null,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Layout {
    Column,
    Symbol,
    Row,
}

/// Parameters shared by encode and decode; both sides must agree on all of them.
#[derive(Args, Debug)]
struct PipelineArgs {
    /// Polar profile file.
    #[arg(long)]
    profile: PathBuf,
    /// Number of links.
    #[arg(long, default_value_t = 4)]
    ell: usize,
    /// Number of encrypted links.
    #[arg(long, default_value_t = 1)]
    c: usize,
    /// Symbol size of the linear code's field GF(2^mu); defaults to ell.
    #[arg(long)]
    mu: Option<u32>,
    #[arg(long, value_enum, default_value_t = Codec::Linear)]
    codec: Codec,
    /// Slack exponent of the nonlinear code, ell_eps = ceil(t log2 ell).
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Seed of the channel-code construction.
    #[arg(long = "code-seed", default_value_t = 0)]
    code_seed: u64,
    #[arg(long, value_enum, default_value_t = Layout::Column)]
    layout: Layout,
    /// Link carrying the shared seed.
    #[arg(long = "seed-link")]
    seed_link: Option<usize>,
    /// Send the shared seed unencrypted.
    #[arg(long = "plain-seed")]
    plain_seed: bool,
    #[arg(long, value_enum, default_value_t = CipherKind::Mceliece)]
    cipher: CipherKind,
    /// McEliece public key file.
    #[arg(long)]
    public: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Seed of the encoder randomness (shared seed and cipher errors).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the transmission even when some frames will not decode exactly.
    #[arg(long = "allow-lossy")]
    allow_lossy: bool,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// McEliece secret key file.
    #[arg(long)]
    secret: Option<PathBuf>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TapMode {
    It,
    Crypto,
}

#[derive(Args, Debug)]
struct TapArgs {
    #[arg(long, value_enum)]
    mode: TapMode,
    /// Comma-separated link indices observed in `it` mode.
    #[arg(long, value_delimiter = ',')]
    links: Vec<usize>,
    /// Transmission file.
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving one `link<i>.bin` file per observed link.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

/// How analysis commands obtain polar profiles.
#[derive(Args, Debug)]
struct ProfileSource {
    /// Directory caching constructed profiles.
    #[arg(long = "cache-dir", default_value = "profiles")]
    cache_dir: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long = "profile-seed", default_value_t = 0)]
    profile_seed: u64,
}

impl ProfileSource {
    fn load(&self, src: SourceModel, n: usize) -> nuhuncc::Result<PolarProfile> {
        std::fs::create_dir_all(&self.cache_dir)?;
        polar::load_or_construct(&self.cache_dir, src, n, self.beta, self.samples, self.profile_seed)
    }
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["figure", "table1", "bounds", "demo"])))]
struct AnalyzeArgs {
    /// Figure sweep to emit (2 to 6).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=6))]
    figure: Option<u32>,
    /// Closed-form rates of the four schemes.
    #[arg(long)]
    table1: bool,
    /// Secrecy, reliability and advantage bounds.
    #[arg(long)]
    bounds: bool,
    /// Run the storage demo.
    #[arg(long)]
    demo: bool,
    /// Output file; figures default to their standard file name, tables to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    profiles: ProfileSource,
    /// Source entropy of the sweeps and tables.
    #[arg(long, default_value_t = 0.9)]
    entropy: f64,
    /// Block length; defaults to 2^20 for figures 4 to 6, 2^19 for tables, 1024 for bounds.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated block lengths for figures 2 and 3.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    /// Comma-separated link counts for figures 4 and 6.
    #[arg(long, value_delimiter = ',')]
    ells: Vec<usize>,
    /// Comma-separated source entropies for figure 5.
    #[arg(long, value_delimiter = ',')]
    entropies: Vec<f64>,
    /// Number of links; defaults to 8 for figures, 3 for tables, 4 for bounds.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 1)]
    c: usize,
    /// Override the measured |H_V|/n in the rate table.
    #[arg(long = "hv-frac")]
    hv_frac: Option<f64>,
    /// Override the measured d_J/n in the rate table.
    #[arg(long = "dj-frac")]
    dj_frac: Option<f64>,
    /// Compressed length for the bounds; defaults to n.
    #[arg(long = "n-tilde")]
    n_tilde: Option<usize>,
    /// Symbol size for the bounds; defaults to ell.
    #[arg(long)]
    mu: Option<usize>,
    /// Unprotected symbols for the bounds; defaults to ell - c.
    #[arg(long = "k-w")]
    k_w: Option<usize>,
    /// Nonlinear slack exponent for the bounds.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[command(flatten)]
    keys: DemoKeys,
}

/// McEliece key used by the storage demo.
#[derive(Args, Debug)]
struct DemoKeys {
    /// Public key file; a [1024, 524] key is generated from --key-seed when absent.
    #[arg(long)]
    public: Option<PathBuf>,
    /// Secret key matching --public.
    #[arg(long)]
    secret: Option<PathBuf>,
    #[arg(long = "key-seed", default_value_t = 0)]
    key_seed: u64,
    /// Seed of the demo's file sampling and encryption randomness.
    #[arg(long = "demo-seed", default_value_t = 0)]
    demo_seed: u64,
}

impl DemoKeys {
    fn cipher(&self) -> Result<Arc<dyn BlockCipher>, CliError> {
        Ok(match (&self.public, &self.secret) {
            (Some(p), Some(s)) => Arc::new(McEliece::new(PublicKey::load(p)?, Some(SecretKey::load(s)?))?),
            (None, None) => {
                Arc::new(McEliece::from_pair(McElieceKeyPair::generate(GoppaParams::classic_1024(), self.key_seed)?))
            }
            _ => return Err(CliError::Usage("--public and --secret must be given together".into())),
        })
    }
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[command(flatten)]
    profiles: ProfileSource,
    #[arg(long, default_value_t = 0.9)]
    entropy: f64,
    /// File size in bits.
    #[arg(long, default_value_t = 1 << 19)]
    n: usize,
    /// Number of files and servers.
    #[arg(long, default_value_t = 3)]
    ell: usize,
    #[command(flatten)]
    keys: DemoKeys,
}

/// Failures of a CLI run, each tied to an exit code.
#[derive(Debug)]
enum CliError {
    Lib(Error),
    Usage(String),
    Lossy(Vec<usize>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lossy(frames) => write!(
                f,
                "{} frame(s) would not decode exactly (first: {}); the input is atypical for the profile, rerun with --allow-lossy to write anyway",
                frames.len(),
                frames[0]
            ),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(Error::Usage(_) | Error::Construction(_)) => 1,
            CliError::Lib(Error::Format(_) | Error::Io(_)) => 2,
            CliError::Lib(Error::Crypto(_) | Error::Decode { .. }) => 3,
            CliError::Lossy(_) => 3,
        }
    }
}

/// Parse a config file into `(key, value)` pairs.
fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key = value", no + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') {
            return Err(format!("config line {}: bad key {k:?}", no + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Turn config entries into flags inserted right after the subcommand name,
/// so that flags given on the command line come later and win.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(PathBuf::from(it.next().ok_or("--config needs a file")?));
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut injected = Vec::new();
    for (k, v) in parse_config(&text)? {
        match v.as_str() {
            "true" => injected.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{k}")));
                injected.push(OsString::from(v));
            }
        }
    }
    let sub = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 2);
    let at = sub.unwrap_or(rest.len()).min(rest.len());
    let mut merged = rest[..at].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&rest[at..]);
    merged.push(OsString::from("--config"));
    merged.push(path.into_os_string());
    Ok(merged)
}

/// Parse arguments, letting a repeated flag replace its earlier value.
fn parse_cli(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command().args_override_self(true);
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let cmd = names.iter().fold(cmd, |c, n| c.mut_subcommand(n, |s| s.args_override_self(true)));
    let matches = cmd.try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

fn field_mu(p: &PipelineArgs) -> u32 {
    p.mu.unwrap_or(p.ell.max(2) as u32)
}

fn build_code(p: &PipelineArgs) -> Result<ISCode, CliError> {
    Ok(match p.codec {
        Codec::Linear => {
            ISCode::Linear(LinearISCode::build(&FieldSpec::binary(field_mu(p))?, p.ell, p.c, p.code_seed)?)
        }
        Codec::Nonlinear => {
            let ell_eps = (p.t * (p.ell as f64).log2()).ceil().max(0.0) as usize;
            let w = p.ell.checked_sub(p.c).ok_or_else(|| CliError::Usage("c must be below ell".into()))?;
            ISCode::Nonlinear(NonlinearISCode::build(p.ell, w, ell_eps, p.code_seed, CodebookMode::Distinct)?)
        }
    })
}

fn build_cipher(p: &PipelineArgs, secret: Option<&Path>) -> Result<Arc<dyn BlockCipher>, CliError> {
    Ok(match p.cipher {
        CipherKind::Null => {
            let mu = if p.codec == Codec::Linear { field_mu(p) as usize } else { 1 };
            Arc::new(NullCipher::new(p.c * mu))
        }
        CipherKind::Mceliece => {
            let path = p.public.as_ref().ok_or_else(|| CliError::Usage("--public is required for mceliece".into()))?;
            let sk = secret.map(SecretKey::load).transpose()?;
            Arc::new(McEliece::new(PublicKey::load(path)?, sk)?)
        }
    })
}

fn build_pipeline(p: &PipelineArgs, secret: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let profile = Arc::new(PolarProfile::load(&p.profile)?);
    let code = Arc::new(build_code(p)?);
    let cipher = build_cipher(p, secret)?;
    let layout = match p.layout {
        Layout::Column => EncryptionLayout::Column,
        Layout::Symbol => EncryptionLayout::Symbol,
        Layout::Row => EncryptionLayout::Row,
    };
    let link = p.seed_link.unwrap_or(SeedPlacement::default_for(p.c).link());
    let seed = if p.plain_seed { SeedPlacement::Plaintext { link } } else { SeedPlacement::Encrypted { link } };
    Ok(PipelineConfig::new(p.ell, p.c, code, profile, cipher, layout, seed)?)
}

fn cmd_profile(a: &ProfileArgs) -> Result<(), CliError> {
    let src = a.source.model()?;
    let prof = polar::construct_profile(src, a.n, a.beta, a.samples, a.seed)?;
    prof.save(&a.out)?;
    let (lo, hi) = analysis::seed_bounds(a.n);
    println!("n = {}", prof.n());
    println!("p = {:.6} (H = {:.6})", src.p(), src.entropy());
    println!("|H_V| = {}", prof.h_v().len());
    println!("|U_V| = {}", prof.u_v().len());
    println!("d_J = {}", prof.d_j());
    println!("n_tilde = {}", prof.n_tilde());
    println!("d_J/n_tilde = {:.6}", if prof.n_tilde() == 0 { 0.0 } else { prof.d_j() as f64 / prof.n_tilde() as f64 });
    // A decided index with conditional entropy h is wrong with probability at most h/2.
    let mass: f64 = prof.u_v().iter().map(|&i| prof.entropies()[i as usize]).sum();
    println!("block error union bound = {:.3e}", (mass / 2.0).min(1.0));
    println!("seed band [n^{}, n^{}] = [{lo:.2}, {hi:.2}]", analysis::SEED_EXP_LOW, analysis::SEED_EXP_HIGH);
    println!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_keygen(a: &KeygenArgs) -> Result<(), CliError> {
    let params = GoppaParams::new(a.d, a.n_g, a.t)?;
    let pair = McElieceKeyPair::generate(params, a.seed)?;
    pair.public.save(&a.public)?;
    pair.secret.save(&a.secret)?;
    println!("[{}, {}] Goppa code, t = {}", a.n_g, pair.public.c_g(), a.t);
    println!("wrote {} and {}", a.public.display(), a.secret.display());
    Ok(())
}

fn cmd_encode(a: &EncodeArgs) -> Result<(), CliError> {
    let cfg = build_pipeline(&a.pipeline, None)?;
    let data = std::fs::read(&a.input)?;
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let (t, check) = encode_bytes(&cfg, &data, &mut rng)?;
    if !check.lossy_frames.is_empty() && !a.allow_lossy {
        return Err(CliError::Lossy(check.lossy_frames));
    }
    let bytes = t.to_bytes();
    std::fs::write(&a.output, &bytes)?;
    println!("frames = {}", check.frames);
    println!("lossy frames = {}", check.lossy_frames.len());
    println!("input bytes = {}", data.len());
    println!("transmission bytes = {}", bytes.len());
    for (i, link) in t.links.iter().enumerate() {
        println!("link {i}: {} bytes", link.iter().map(Vec::len).sum::<usize>());
    }
    println!("wrote {}", a.output.display());
    Ok(())
}

fn cmd_decode(a: &DecodeArgs) -> Result<(), CliError> {
    let cfg = build_pipeline(&a.pipeline, a.secret.as_deref())?;
    let t = Transmission::from_bytes(&std::fs::read(&a.input)?)?;
    let data = decode_bytes(&cfg, &t)?;
    std::fs::write(&a.output, &data)?;
    println!("decoded {} bytes to {}", data.len(), a.output.display());
    Ok(())
}

fn cmd_tap(a: &TapArgs) -> Result<(), CliError> {
    let t = Transmission::from_bytes(&std::fs::read(&a.input)?)?;
    let mode = match a.mode {
        TapMode::It if a.links.is_empty() => return Err(CliError::Usage("--mode it needs --links".into())),
        TapMode::It => EveMode::It(a.links.clone()),
        TapMode::Crypto => EveMode::Crypto,
    };
    let view = eve_observe(&t, &mode)?;
    std::fs::create_dir_all(&a.out_dir)?;
    for (i, segs) in &view.observed {
        let bytes = segs.concat();
        let path = a.out_dir.join(format!("link{i}.bin"));
        std::fs::write(&path, &bytes)?;
        println!("link {i}: {} frames, {} bytes -> {}", segs.len(), bytes.len(), path.display());
    }
    println!("observed {} of {} links", view.observed.len(), t.links.len());
    Ok(())
}

fn emit(table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            table.save(p)?;
            println!("wrote {}", p.display());
        }
        None => print!("{}", table.to_csv_string()),
    }
    Ok(())
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    if let Some(fig) = a.figure {
        let mut profiles = |src: SourceModel, n: usize| a.profiles.load(src, n);
        let ns = or_default(&a.ns, &[1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18]);
        let ells = or_default(&a.ells, &(2..=10).collect::<Vec<_>>());
        let entropies = or_default(&a.entropies, &[0.5, 0.6, 0.7, 0.8, 0.9, 0.95]);
        let n = a.n.unwrap_or(1 << 20);
        let ell = a.ell.unwrap_or(8);
        let table = match fig {
            2 => analysis::fig2_seed(&ns, a.entropy, &mut profiles)?,
            3 => analysis::fig3_rate_vs_size(&ns, a.entropy, ell, a.c, &mut profiles)?,
            4 => analysis::fig4_rate_vs_links(&ells, n, a.entropy, a.c, &mut profiles)?,
            5 => analysis::fig5_rate_vs_entropy(&entropies, n, ell, a.c, &mut profiles)?,
            _ => analysis::fig6_ops_vs_links(&ells, n, a.entropy, a.c, &mut profiles)?,
        };
        let default_out = PathBuf::from(analysis::figure_file(fig).expect("figure range checked by the parser"));
        return emit(&table, Some(a.out.as_deref().unwrap_or(&default_out)));
    }
    if a.table1 {
        let (hv, dj) = match (a.hv_frac, a.dj_frac) {
            (Some(hv), Some(dj)) => (hv, dj),
            _ => {
                let prof = a.profiles.load(SourceModel::from_entropy(a.entropy)?, a.n.unwrap_or(1 << 19))?;
                (a.hv_frac.unwrap_or(prof.hv_frac()), a.dj_frac.unwrap_or(prof.dj_frac()))
            }
        };
        let ell = a.ell.unwrap_or(3);
        let w = ell.checked_sub(1).ok_or_else(|| CliError::Usage("ell must be at least 1".into()))?;
        let params = Table1Params { entropy: a.entropy, ell, c: a.c, w, ..Table1Params::storage_example(hv, dj) };
        return emit(&analysis::table1(&params)?, a.out.as_deref());
    }
    if a.bounds {
        let n = a.n.unwrap_or(1024);
        let ell = a.ell.unwrap_or(4);
        let params = BoundsParams {
            n,
            beta: a.profiles.beta,
            ell,
            n_tilde: a.n_tilde.unwrap_or(n),
            mu: a.mu.unwrap_or(ell),
            k_w: a.k_w.unwrap_or(ell.saturating_sub(a.c)),
            c: a.c,
            t: a.t,
        };
        return emit(&analysis::bounds_table(&params), a.out.as_deref());
    }
    run_demo(&a.profiles, a.entropy, a.n.unwrap_or(1 << 19), a.ell.unwrap_or(3), &a.keys)
}

fn run_demo(profiles: &ProfileSource, entropy: f64, n: usize, ell: usize, keys: &DemoKeys) -> Result<(), CliError> {
    let prof = Arc::new(profiles.load(SourceModel::from_entropy(entropy)?, n)?);
    let sc = DemoScenario { profile: prof, ell, cipher: keys.cipher()?, rng_seed: keys.demo_seed };
    println!("scheme,rate,stored_bits,source_bits,simulated,round_trip");
    for scheme in Scheme::ALL {
        let r = storage_demo(scheme, &sc)?;
        let stored: u64 = r.stored_bits.iter().sum();
        let rt = r.round_trip.map_or("n/a".to_string(), |ok| ok.to_string());
        println!("{},{:.6},{},{},{},{}", scheme.label(), r.rate, stored, r.source_bits, r.simulated, rt);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Profile(a) => cmd_profile(a),
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Tap(a) => cmd_tap(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Demo(a) => run_demo(&a.profiles, a.entropy, a.n, a.ell, &a.keys),
    }
}

fn main() -> ExitCode {
    let args = match merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match parse_cli(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    eprintln!("effective config: {cli:?}");
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
