//! Command-line front end and live service for `airbutton-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod output;
pub mod serve;

use anyhow::Result;

use args::{Cli, Command};

/// Run one CLI invocation and return the summary line to print.
pub async fn run(cli: Cli) -> Result<String> {
    let config = commands::load_config(cli.scene.as_deref())?;
    match cli.command {
        Command::Sweep(a) => {
            let out = cli.out_dir.clone();
            tokio::task::spawn_blocking(move || commands::sweep(&config, &a, cli.seed, &out)).await?
        }
        Command::Session(a) => commands::session(&config, &a, cli.seed, &cli.out_dir),
        Command::Field(a) => {
            let out = cli.out_dir.clone();
            tokio::task::spawn_blocking(move || commands::field(&config, &a, cli.seed, &out)).await?
        }
        Command::DefaultScene => Ok(airbutton_core::Config::paper_default().to_toml_string()?),
        Command::Serve(a) => {
            let cfg = serve::ServeConfig {
                config,
                tick_hz: a.tick_hz,
                initial_height: a.initial_height_mm * airbutton_core::geometry::MM,
                record: a.record.clone(),
                ticks: a.ticks,
            };
            if let Some(rec) = &a.replay {
                let ticks = a.ticks.expect("clap requires --ticks with --replay");
                return serve::replay_command(&cfg, rec, ticks, &cli.out_dir);
            }
            let server = serve::bind(cfg, a.port).await?;
            let addr = server.local_addr()?;
            eprintln!("serving on ws://{addr}/ws (field heatmap at http://{addr}/field-slice)");
            server.run(shutdown_signal()).await?;
            Ok("serve: stopped".to_owned())
        }
    }
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
