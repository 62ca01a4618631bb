use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unistego::alphabet::lines;
use unistego::analysis::{self, AnalysisReport};
use unistego::bits::{bit_string, bits_to_bytes, bytes_to_bits, frame, parse_bit_string, unframe};
use unistego::sources::draw_hidden_bits;
use unistego::{
    Alphabet, BlockTrace, DeltaChoice, Error, LoadedModel, Probability, Scheme, Seeds, Session, SourceModel, Symbol,
};

#[derive(Parser)]
#[command(name = "unistego", version, about = "Distribution-preserving steganography for memoryless sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a payload in a cover stream.
    Embed(EmbedArgs),
    /// Recover the bits carried by a stego stream.
    Extract(ExtractArgs),
    /// Write simulated covers, hidden payloads or preset models.
    #[command(subcommand)]
    Generate(Generate),
    /// Check output law and hiding rates for a source model.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct CodecArgs {
    /// Alphabet file, one token per line.
    #[arg(long)]
    alphabet: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeArg::Stn)]
    scheme: SchemeArg,
    /// Block length n for stn; st2 always uses pairs.
    #[arg(long, default_value_t = 8)]
    block_size: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    St2,
    Stn,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::St2 => Scheme::St2,
            SchemeArg::Stn => Scheme::Stn,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BitFormat {
    /// Raw bytes, most significant bit first.
    Bytes,
    /// ASCII '0' and '1'; whitespace ignored.
    Bits,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Cover file, one token per line.
    #[arg(long)]
    cover: PathBuf,
    /// Payload file.
    #[arg(long)]
    hidden: PathBuf,
    #[arg(long, value_enum, default_value_t = BitFormat::Bytes)]
    hidden_format: BitFormat,
    /// Stego output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed_delta: u64,
    #[arg(long, default_value_t = 1)]
    seed_padding: u64,
    /// Prefix the payload with its 32-bit length so extract can strip padding.
    #[arg(long)]
    frame_length: bool,
    /// Testing only: use this payload length in every block.
    #[arg(long, value_name = "D")]
    force_delta: Option<u32>,
    /// Write the per-block trace as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    codec: CodecArgs,
    /// Stego file, one token per line.
    #[arg(long, alias = "cover")]
    stego: PathBuf,
    /// Recovered bits.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = BitFormat::Bytes)]
    format: BitFormat,
    /// The payload was embedded with --frame-length; write only the payload.
    #[arg(long)]
    frame_length: bool,
    /// Write the per-block (d, r) trace as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Generate {
    /// Cover symbols drawn from a model.
    Cover {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed_source: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniformly random payload.
    Hidden {
        /// Number of bits (rounded up to whole bytes for the bytes format).
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = BitFormat::Bytes)]
        format: BitFormat,
        #[arg(long, default_value_t = 0)]
        seed_source: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A preset model file.
    Model {
        #[arg(long, value_enum)]
        preset: Preset,
        /// Alphabet size for uniform and zipf.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Probability of the first symbol for two-point.
        #[arg(long, default_value = "0.5")]
        p: String,
        /// Integer exponent for zipf.
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long)]
        out: PathBuf,
        /// Also write the model's alphabet file.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Uniform,
    TwoPoint,
    Zipf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Empirical,
    Rates,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Model file: token and probability per line.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = SchemeArg::Stn)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 2)]
    block_size: usize,
    /// Blocks for empirical mode, cover symbols per run for rates mode.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Block lengths for rates mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
    /// Monte-Carlo blocks when the rate bound cannot be enumerated.
    #[arg(long, default_value_t = 100_000)]
    bound_samples: u64,
    /// Empirical mode: test pairs of consecutive blocks instead of single blocks.
    #[arg(long)]
    pairs: bool,
    #[arg(long, default_value_t = 0)]
    seed_source: u64,
    #[arg(long, default_value_t = 0)]
    seed_delta: u64,
    #[arg(long, default_value_t = 1)]
    seed_padding: u64,
    /// Report file; standard output if absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Io(PathBuf, io::Error),
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(..) => 2,
            Failure::Core(Error::UnknownSymbol(_)) => 3,
            Failure::Core(_) | Failure::Usage(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(path, e) => write!(f, "{}: {e}", path.display()),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(msg) => f.write_str(msg),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Embed(a) => embed(a),
        Command::Extract(a) => extract(a),
        Command::Generate(g) => generate(g),
        Command::Analyze(a) => analyze(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("unistego: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let mut json = serde_json::to_string_pretty(value).expect("serializable");
    json.push('\n');
    match path {
        Some(p) => write(p, json.as_bytes()),
        None => io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn load_alphabet(path: &Path) -> CliResult<Alphabet> {
    Ok(Alphabet::parse(&read(path)?)?)
}

fn load_model(path: &Path) -> CliResult<LoadedModel> {
    Ok(LoadedModel::parse(&read(path)?)?)
}

fn read_symbols(path: &Path, alphabet: &Alphabet) -> CliResult<Vec<Symbol>> {
    let text = read(path)?;
    let tokens: Vec<&[u8]> = lines(&text).collect();
    Ok(alphabet.resolve(&tokens)?)
}

fn symbols_file(symbols: &[Symbol], alphabet: &Alphabet) -> Vec<u8> {
    let mut out = Vec::new();
    for &s in symbols {
        out.extend_from_slice(alphabet.token(s));
        out.push(b'\n');
    }
    out
}

fn encode_bits(bits: &[bool], format: BitFormat) -> Vec<u8> {
    match format {
        BitFormat::Bytes => bits_to_bytes(bits),
        BitFormat::Bits => {
            let mut s = bit_string(bits);
            s.push('\n');
            s.into_bytes()
        }
    }
}

fn session<'a>(alphabet: &'a Alphabet, codec: &CodecArgs) -> CliResult<Session<'a>> {
    let scheme = Scheme::from(codec.scheme);
    if scheme == Scheme::Stn && codec.block_size < 2 {
        return Err(Error::InvalidBlockLength(codec.block_size).into());
    }
    alphabet.check_codec_size()?;
    Ok(Session::new(alphabet, scheme, codec.block_size))
}

#[derive(Serialize)]
struct EmbedSummary {
    scheme: Scheme,
    n: usize,
    cover_symbols: usize,
    blocks: usize,
    bits_embedded: u64,
    padding_bits: u64,
    /// Genuine bits per cover symbol.
    rate: f64,
    bits_per_block: f64,
    framed: bool,
    forced_delta: Option<u32>,
    seeds: EmbedSeeds,
}

#[derive(Serialize)]
struct EmbedSeeds {
    delta: u64,
    padding: u64,
}

#[derive(Serialize)]
struct EmbedTrace<'a> {
    summary: &'a EmbedSummary,
    blocks: &'a [BlockTrace],
    padding: String,
}

fn embed(a: EmbedArgs) -> CliResult<()> {
    let alphabet = load_alphabet(&a.codec.alphabet)?;
    let mut session = session(&alphabet, &a.codec)?;
    let cover = read_symbols(&a.cover, &alphabet)?;
    let raw = read(&a.hidden)?;
    let mut hidden = match a.hidden_format {
        BitFormat::Bytes => raw,
        BitFormat::Bits => {
            let text = String::from_utf8_lossy(&raw);
            let bits = parse_bit_string(&text)
                .ok_or_else(|| Failure::Usage(format!("{}: not a bit string", a.hidden.display())))?;
            if a.frame_length {
                if bits.len() % 8 != 0 {
                    return Err(Failure::Usage("--frame-length needs a whole number of bytes".into()));
                }
                bits_to_bytes(&bits)
            } else {
                session.trace = a.report.is_some();
                return finish_embed(&a, session, &alphabet, &cover, bits);
            }
        }
    };
    if a.frame_length {
        hidden = frame(&hidden)?;
    }
    session.trace = a.report.is_some();
    finish_embed(&a, session, &alphabet, &cover, bytes_to_bits(&hidden))
}

fn finish_embed(
    a: &EmbedArgs,
    mut session: Session<'_>,
    alphabet: &Alphabet,
    cover: &[Symbol],
    bits: Vec<bool>,
) -> CliResult<()> {
    if let Some(d) = a.force_delta {
        session.delta = DeltaChoice::Forced(d);
    }
    let seeds = Seeds::new(0, a.seed_delta, a.seed_padding);
    let result = session.embed(cover, bits, seeds.delta_rng(), seeds.padding_rng())?;
    write(&a.out, &symbols_file(&result.stego, alphabet))?;

    let blocks = cover.len() / result.block_len;
    let summary = EmbedSummary {
        scheme: result.scheme,
        n: result.block_len,
        cover_symbols: cover.len(),
        blocks,
        bits_embedded: result.bits_embedded,
        padding_bits: result.padding_bits,
        rate: ratio(result.bits_embedded, cover.len()),
        bits_per_block: ratio(result.bits_embedded, blocks),
        framed: a.frame_length,
        forced_delta: a.force_delta,
        seeds: EmbedSeeds {
            delta: a.seed_delta,
            padding: a.seed_padding,
        },
    };
    emit(&summary, None)?;
    if let Some(path) = &a.report {
        let trace = EmbedTrace {
            summary: &summary,
            blocks: &result.trace,
            padding: bit_string(&result.padding),
        };
        emit(&trace, Some(path))?;
    }
    Ok(())
}

fn ratio(num: u64, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Serialize)]
struct ExtractSummary {
    scheme: Scheme,
    n: usize,
    stego_symbols: usize,
    bits: usize,
    /// Payload bytes written when the stream was framed.
    payload_bytes: Option<usize>,
}

fn extract(a: ExtractArgs) -> CliResult<()> {
    let alphabet = load_alphabet(&a.codec.alphabet)?;
    let mut session = session(&alphabet, &a.codec)?;
    session.trace = a.report.is_some();
    let stego = read_symbols(&a.stego, &alphabet)?;
    let result = session.extract(&stego)?;

    let payload_bytes = if a.frame_length {
        let payload = unframe(&result.bits)?;
        write(&a.out, &encode_bits(&bytes_to_bits(&payload), a.format))?;
        Some(payload.len())
    } else {
        write(&a.out, &encode_bits(&result.bits, a.format))?;
        None
    };
    emit(
        &ExtractSummary {
            scheme: session.scheme,
            n: session.block_len(),
            stego_symbols: stego.len(),
            bits: result.bits.len(),
            payload_bytes,
        },
        None,
    )?;
    if let Some(path) = &a.report {
        emit(&result.trace, Some(path))?;
    }
    Ok(())
}

fn generate(g: Generate) -> CliResult<()> {
    match g {
        Generate::Cover {
            model,
            count,
            seed_source,
            out,
        } => {
            let model = load_model(&model)?.to_f64_model();
            let seeds = Seeds::new(seed_source, 0, 0);
            let cover = model.draw_cover(count, &mut seeds.cover_rng());
            write(&out, &symbols_file(&cover, model.alphabet()))
        }
        Generate::Hidden {
            count,
            format,
            seed_source,
            out,
        } => {
            let seeds = Seeds::new(seed_source, 0, 0);
            let bits = draw_hidden_bits(count, &mut seeds.hidden_rng());
            write(&out, &encode_bits(&bits, format))
        }
        Generate::Model {
            preset,
            k,
            p,
            s,
            out,
            alphabet,
        } => {
            let model: SourceModel<unistego::BigRational> = match preset {
                Preset::Uniform => SourceModel::uniform(Alphabet::numbered(k)?)?,
                Preset::TwoPoint => {
                    let p = unistego::BigRational::from_decimal(&p)
                        .ok_or_else(|| Failure::Usage(format!("bad probability {p:?}")))?;
                    SourceModel::two_point(p)?
                }
                Preset::Zipf => SourceModel::zipf(Alphabet::numbered(k)?, s)?,
            };
            write(&out, model.to_file_string().as_bytes())?;
            if let Some(path) = alphabet {
                write(&path, &model.alphabet().to_file_bytes())?;
            }
            Ok(())
        }
    }
}

fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let scheme = Scheme::from(a.scheme);
    let seeds = Seeds::new(a.seed_source, a.seed_delta, a.seed_padding);
    let mut report = AnalysisReport::default();
    match a.mode {
        Mode::Exact => {
            report.distribution = Some(match &model {
                LoadedModel::Exact(m) => analysis::exact_report(m, scheme, a.block_size)?,
                LoadedModel::Float(m) => analysis::exact_report(m, scheme, a.block_size)?,
            });
        }
        Mode::Empirical => {
            let m = model.to_f64_model();
            report.distribution = Some(if a.pairs {
                analysis::empirical_pair_report(&m, scheme, a.block_size, a.samples, seeds)?
            } else {
                analysis::empirical_report(&m, scheme, a.block_size, a.samples, seeds)?
            });
        }
        Mode::Rates => {
            let m = model.to_f64_model();
            let cover = usize::try_from(a.samples).map_err(|_| Failure::Usage("--samples too large".into()))?;
            report.rates = match scheme {
                Scheme::St2 => vec![analysis::measure_rate(&m, Scheme::St2, 2, cover, seeds, None)?],
                Scheme::Stn => {
                    let sweep = if a.sweep.is_empty() { vec![a.block_size] } else { a.sweep.clone() };
                    analysis::rate_sweep(&m, &sweep, cover, seeds, Some(a.bound_samples))?
                }
            };
        }
    }
    emit(&report, a.report.as_deref())
}
