//! Minimal external detector for exercising the subprocess protocol.
//!
//! ```text
//! tsad-stub-detector zeros           all-zero scores
//! tsad-stub-detector first-diff      |x[t] - x[t-1]| scores
//! tsad-stub-detector short           one score too few
//! tsad-stub-detector sleep [SECS]    sleeps before every score reply
//! tsad-stub-detector exit [CODE]     exits with CODE (default 3) on fit
//! tsad-stub-detector error           replies with an error message on fit
//! ```

use std::io::{BufRead, Write};
use std::process::ExitCode;
use std::time::Duration;

use tsadbench_core::external::protocol::{decode_request, encode, Reply, Request, PROTOCOL_VERSION};

fn scores(mode: &str, context: &[f64], values: &[f64]) -> Vec<f64> {
    match mode {
        "first-diff" => values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let prev = if i == 0 { context.last() } else { values.get(i - 1) };
                prev.map_or(0.0, |p| (v - p).abs())
            })
            .collect(),
        "short" => vec![0.0; values.len().saturating_sub(1)],
        _ => vec![0.0; values.len()],
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map_or("zeros", String::as_str).to_string();
    let param = args.get(1).cloned();
    if !matches!(mode.as_str(), "zeros" | "first-diff" | "short" | "sleep" | "exit" | "error") {
        eprintln!("unknown mode '{mode}'");
        return ExitCode::from(64);
    }
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    let mut send = |reply: &Reply| {
        stdout
            .write_all(encode(reply).as_bytes())
            .and_then(|()| stdout.flush())
            .is_ok()
    };
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let request = match decode_request(&line) {
            Ok(r) => r,
            Err(e) => {
                send(&Reply::Error { message: e });
                continue;
            }
        };
        let ok = match request {
            Request::Hello { .. } => send(&Reply::Hello {
                name: format!("stub-{mode}"),
                protocol: PROTOCOL_VERSION,
            }),
            Request::Fit { series } => {
                eprintln!("fitting on {} series", series.len());
                match mode.as_str() {
                    "exit" => {
                        let code = param.as_deref().and_then(|p| p.parse().ok()).unwrap_or(3);
                        return ExitCode::from(code);
                    }
                    "error" => send(&Reply::Error {
                        message: "stub refuses to fit".into(),
                    }),
                    _ => send(&Reply::FitDone),
                }
            }
            Request::Score { id, context, values } => {
                if mode == "sleep" {
                    let secs = param.as_deref().and_then(|p| p.parse().ok()).unwrap_or(60.0);
                    std::thread::sleep(Duration::from_secs_f64(secs));
                }
                send(&Reply::Scores {
                    scores: scores(&mode, &context, &values),
                    id,
                })
            }
            Request::Shutdown => return ExitCode::SUCCESS,
        };
        if !ok {
            break;
        }
    }
    ExitCode::SUCCESS
}
