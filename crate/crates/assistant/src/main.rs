use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use assistant::app;
use assistant::server::{self, ServerState};
use assistant_core::actions::{vehicle_eval_set, vehicle_scripts, VEHICLE_WAKE_WORD};
use assistant_core::channel::run_repl;
use assistant_core::dialogue::StageDelays;
use assistant_core::eval::{
    bench_repetitions, eval_intents, parse_eval_set, parse_script, render_report, write_report, EvalReport, Script,
};
use assistant_core::nlu::ModelFile;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "assistant", version, about = "Voice assistant for in-vehicle use")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a domain bundle and train a model file.
    Train {
        /// Directory holding domain.yml, nlu.yml, stories.yml, rules.yml and
        /// config.yml. Defaults to the bundled vehicle pack.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a channel.
    Run {
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long, value_enum, default_value_t = Channel::Rest)]
        channel: Channel,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 5005)]
        port: u16,
        /// Static web console directory served alongside the webhook.
        #[arg(long)]
        console: Option<PathBuf>,
    },
    /// Talk to the assistant in the terminal.
    Chat {
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Measure intent accuracy on a labelled utterance set.
    Eval {
        #[command(flatten)]
        model: ModelArg,
        /// Eval set (YAML). Defaults to the bundled 300-utterance set.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Directory for report.txt and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure per-turn latency over scripted conversations.
    Bench {
        #[command(flatten)]
        model: ModelArg,
        /// Directory of conversation scripts. Defaults to the bundled ones.
        #[arg(long)]
        scripts: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Injected stage delays in ms: NLU, prompt, provider.
        #[arg(long, default_value = "0,50,200", value_parser = parse_delays)]
        delays: StageDelays,
        /// Repetitions run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the bundled pack, fixtures, eval set and scripts to a directory.
    ExportPack {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Trained model file. Without it the bundled pack is trained on start.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct SessionArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Mock provider fixture directory. Defaults to the bundled fixtures.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Use live third-party providers instead of fixtures.
    #[arg(long)]
    live: bool,
    /// Persist conversations as JSONL under this directory.
    #[arg(long)]
    tracker_dir: Option<PathBuf>,
    #[arg(long, env = "ASSISTANT_WAKE_WORD", default_value = VEHICLE_WAKE_WORD)]
    wake_word: String,
    /// Sender id for the terminal channel.
    #[arg(long, default_value = "driver")]
    sender: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Channel {
    Rest,
    Repl,
}

fn parse_delays(s: &str) -> Result<StageDelays, String> {
    let ms: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match ms[..] {
        [nlu, prompt, provider] => Ok(StageDelays {
            nlu: Duration::from_millis(nlu),
            prompt: Duration::from_millis(prompt),
            provider: Duration::from_millis(provider),
        }),
        _ => Err("expected three comma-separated millisecond values: nlu,prompt,provider".into()),
    }
}

fn model(arg: &ModelArg) -> Result<ModelFile> {
    match &arg.model {
        Some(path) => app::load_model(path),
        None => {
            tracing::info!("no --model given; training the bundled pack");
            app::bundled_model()
        }
    }
}

fn train(data: Option<&Path>, out: &Path) -> Result<()> {
    let docs = app::load_pack(data)?;
    let started = Instant::now();
    let (file, report, warnings) = app::train_pack(docs)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    file.save(out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "trained {} intents in {:.2} s; training accuracy {:.2}%; final loss {:.4}",
        file.classifier.intents().len(),
        started.elapsed().as_secs_f64(),
        report.training_accuracy * 100.0,
        report.loss_trace.last().copied().unwrap_or(f64::NAN)
    );
    println!("model {} (fingerprint {})", out.display(), file.fingerprint());
    Ok(())
}

fn session(args: &SessionArgs) -> Result<(assistant_core::channel::Assistant, String)> {
    if args.live {
        bail!("live providers are not part of this build; drop --live to use the fixture providers");
    }
    let file = model(&args.model)?;
    let fixtures = app::load_fixtures(args.fixtures.as_deref())?;
    let engine = app::build_engine(&file, &fixtures, StageDelays::default())?;
    let store = app::open_store(engine.spec(), args.tracker_dir.as_deref())?;
    Ok((app::build_assistant(engine, store, &args.wake_word)?, file.fingerprint()))
}

fn chat(args: &SessionArgs) -> Result<()> {
    let (assistant, _) = session(args)?;
    eprintln!("Say \"{}\" to wake the assistant; /reset starts over, /quit exits.", assistant.wake_word());
    run_repl(&assistant, &args.sender, io::stdin().lock(), io::stdout().lock())?;
    Ok(())
}

fn run(args: &SessionArgs, channel: Channel, host: &str, port: u16, console: Option<&Path>) -> Result<()> {
    if channel == Channel::Repl {
        return chat(args);
    }
    let (assistant, fingerprint) = session(args)?;
    if let Some(dir) = console {
        if !dir.is_dir() {
            bail!("console directory {} does not exist", dir.display());
        }
    }
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    let app = server::router(ServerState::new(assistant, fingerprint), console);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!(%addr, "serving {}", server::WEBHOOK_PATH);
        server::serve(listener, app).await?;
        Ok(())
    })
}

fn eval(model_arg: &ModelArg, dataset: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let file = model(model_arg)?;
    let spec = app::model_spec(&file)?;
    let text = match dataset {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => vehicle_eval_set().to_string(),
    };
    let data = parse_eval_set(&text)?;
    let started = Instant::now();
    let intents = eval_intents(&file.classifier, &spec, &data)?;
    let elapsed = started.elapsed();
    let report = EvalReport {
        intents: Some(intents),
        ..Default::default()
    };
    print!("{}", render_report(&report));
    println!("Evaluated {} utterances in {:.3} s", data.len(), elapsed.as_secs_f64());
    if let Some(dir) = out {
        write_report(&report, dir)?;
    }
    Ok(())
}

fn load_scripts(dir: Option<&Path>) -> Result<Vec<Script>> {
    let mut sources: Vec<(String, String)> = match dir {
        Some(dir) => {
            let mut v = Vec::new();
            for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "yml" || e == "yaml") {
                    v.push((path.display().to_string(), std::fs::read_to_string(&path)?));
                }
            }
            v.sort();
            v
        }
        None => vehicle_scripts().into_iter().map(|(n, s)| (n.to_string(), s.to_string())).collect(),
    };
    if sources.is_empty() {
        bail!("no conversation scripts found");
    }
    sources
        .drain(..)
        .map(|(name, src)| parse_script(&src).with_context(|| format!("parsing script {name}")))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn bench(
    model_arg: &ModelArg,
    scripts: Option<&Path>,
    reps: usize,
    delays: StageDelays,
    jobs: usize,
    fixtures: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let file = model(model_arg)?;
    let scripts = load_scripts(scripts)?;
    let fixtures = app::load_fixtures(fixtures)?;
    let engine = std::sync::Arc::new(app::build_engine(&file, &fixtures, delays)?);
    let (latency, _) = bench_repetitions(&engine, VEHICLE_WAKE_WORD, &scripts, reps, jobs);
    let report = EvalReport {
        latency: Some(latency),
        ..Default::default()
    };
    print!("{}", render_report(&report));
    if let Some(dir) = out {
        write_report(&report, dir)?;
    }
    Ok(())
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train { data, out } => train(data.as_deref(), out),
        Command::Run {
            session,
            channel,
            host,
            port,
            console,
        } => run(session, *channel, host, *port, console.as_deref()),
        Command::Chat { session } => chat(session),
        Command::Eval { model, dataset, out } => eval(model, dataset.as_deref(), out.as_deref()),
        Command::Bench {
            model,
            scripts,
            reps,
            delays,
            jobs,
            fixtures,
            out,
        } => bench(model, scripts.as_deref(), *reps, *delays, *jobs, fixtures.as_deref(), out.as_deref()),
        Command::ExportPack { out } => app::export_pack(out),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
