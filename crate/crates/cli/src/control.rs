//! Line-based TCP control socket for `play`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{self, Sender};
use std::thread;

use bmlrt::incremental::{ControlCommand, ControlMessage, ControlResponse};

/// `tcp:<port>` or `tcp:<host>:<port>`; a bare port binds to loopback.
pub fn parse_control_addr(spec: &str) -> Result<String, String> {
    let rest = spec
        .strip_prefix("tcp:")
        .ok_or_else(|| format!("control address must start with `tcp:`, got `{spec}`"))?;
    if rest.parse::<u16>().is_ok() {
        Ok(format!("127.0.0.1:{rest}"))
    } else if rest.rsplit_once(':').is_some_and(|(_, p)| p.parse::<u16>().is_ok()) {
        Ok(rest.to_string())
    } else {
        Err(format!("bad control address `{spec}`"))
    }
}

/// Accept clients forever; each line is one command, answered with one line.
pub fn spawn_listener(listener: TcpListener, tx: Sender<ControlMessage>) {
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let tx = tx.clone();
            thread::spawn(move || {
                if let Err(e) = serve(stream, tx) {
                    log::warn!("control client: {e}");
                }
            });
        }
    });
}

fn serve(stream: TcpStream, tx: Sender<ControlMessage>) -> std::io::Result<()> {
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match line.parse::<ControlCommand>() {
            Ok(cmd) => {
                let (rtx, rrx) = mpsc::channel();
                if tx.send((cmd, Some(rtx))).is_err() {
                    ControlResponse::Warn("scheduler finished".into())
                } else {
                    rrx.recv()
                        .unwrap_or_else(|_| ControlResponse::Warn("scheduler finished".into()))
                }
            }
            Err(e) => ControlResponse::Warn(e),
        };
        writeln!(out, "{reply}")?;
    }
    Ok(())
}
