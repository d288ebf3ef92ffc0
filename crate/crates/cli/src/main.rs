//! `provmap` — journals, transfer packages and the merge-scaling benchmark.

use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

mod commands;
mod store;

#[derive(Parser)]
#[command(name = "provmap", version, about = "Composable verifiable-map ledgers for content provenance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a journal directory with a fresh notary key pair.
    Init {
        dir: PathBuf,
        /// Notary identifier; derived from the public key when omitted.
        #[arg(long)]
        id: Option<String>,
    },
    /// Insert or overwrite keys and notarize the new map root.
    Commit {
        dir: PathBuf,
        /// key=file pair; the value committed is the SHA-256 of the file.
        #[arg(long = "kv", required = true)]
        kv: Vec<String>,
    },
    /// Split keys out of a committed block into a transfer package.
    Export {
        dir: PathBuf,
        /// Block index to export from.
        #[arg(long)]
        block: u64,
        /// Comma-separated key names.
        #[arg(long)]
        keys: String,
        /// Encode the payload as one multiproof instead of an entry list.
        #[arg(long)]
        multiproof: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Verify a package and merge it into a derivative store.
    Import {
        store: PathBuf,
        package: PathBuf,
        /// Notary public key (64 hex chars); required on first contact,
        /// remembered in the store afterwards.
        #[arg(long)]
        pubkey: Option<String>,
    },
    /// Re-notarize a foreign package under this journal's own chain.
    Adopt {
        dir: PathBuf,
        package: PathBuf,
        /// Public key of the package's notary (64 hex chars).
        #[arg(long)]
        pubkey: Option<String>,
    },
    /// Check a single commitment against a notary public key.
    Verify {
        commitment: PathBuf,
        #[arg(long)]
        pubkey: String,
    },
    /// Write one key's commitment at a block for out-of-band verification.
    Commitment {
        dir: PathBuf,
        #[arg(long)]
        block: u64,
        #[arg(long)]
        key: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time merges across subset sizes and write a CSV report.
    Bench {
        /// Comma-separated m/n ratios in (0, 1].
        #[arg(long, default_value = "1,0.1,0.01")]
        ratios: String,
        /// Comma-separated subset sizes m.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write per-phase (build/split/merge) timings.
        #[arg(long)]
        phases: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Init { dir, id } => commands::init(&dir, id),
        Command::Commit { dir, kv } => commands::commit(&dir, &kv),
        Command::Export {
            dir,
            block,
            keys,
            multiproof,
            output,
        } => commands::export(&dir, block, &keys, multiproof, &output),
        Command::Import {
            store,
            package,
            pubkey,
        } => commands::import(&store, &package, pubkey),
        Command::Adopt { dir, package, pubkey } => commands::adopt(&dir, &package, pubkey),
        Command::Verify { commitment, pubkey } => commands::verify(&commitment, &pubkey),
        Command::Commitment {
            dir,
            block,
            key,
            output,
        } => commands::commitment(&dir, block, &key, &output),
        Command::Bench {
            ratios,
            sizes,
            trials,
            seed,
            output,
            phases,
        } => commands::run_bench(&ratios, &sizes, trials, seed, &output, phases),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
