use std::future::Future;
use std::sync::Arc;

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::watch;
use tokio::task::JoinSet;

use super::engine::{Engine, HandleError, Session};
use super::protocol::WireMessage;

/// Accepts connections until `shutdown` resolves, then stops accepting,
/// lets every connection finish the line it is processing, and returns once
/// all of them are closed.
pub async fn serve<F>(
    listener: TcpListener,
    engine: Arc<Engine>,
    shutdown: F,
) -> std::io::Result<()>
where
    F: Future<Output = ()>,
{
    let (stop_tx, stop_rx) = watch::channel(false);
    let mut conns = JoinSet::new();
    tokio::pin!(shutdown);
    loop {
        tokio::select! {
            _ = &mut shutdown => break,
            accepted = listener.accept() => {
                let (socket, peer) = match accepted {
                    Ok(a) => a,
                    Err(e) => {
                        log::warn!("accept failed: {e}");
                        continue;
                    }
                };
                log::debug!("connection from {peer}");
                let engine = Arc::clone(&engine);
                let stop = stop_rx.clone();
                conns.spawn(async move {
                    if let Err(e) = connection(socket, engine, stop).await {
                        log::debug!("connection {peer} ended: {e}");
                    }
                });
            }
            Some(_) = conns.join_next(), if !conns.is_empty() => {}
        }
    }
    let _ = stop_tx.send(true);
    while conns.join_next().await.is_some() {}
    Ok(())
}

async fn connection(
    socket: TcpStream,
    engine: Arc<Engine>,
    mut stop: watch::Receiver<bool>,
) -> std::io::Result<()> {
    let (read, mut write) = socket.into_split();
    let mut lines = BufReader::new(read).lines();
    let mut session = Session::new();
    loop {
        let line = tokio::select! {
            line = lines.next_line() => line?,
            _ = stop.wait_for(|s| *s) => None,
        };
        let Some(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let (replies, close) = match engine.handle_line(&mut session, &line) {
            Ok(r) => (r, false),
            Err(HandleError::Rejected(m)) => {
                log::debug!("rejected reading: {m}");
                (vec![WireMessage::rejected()], false)
            }
            Err(e) => (
                vec![WireMessage::Error {
                    message: e.to_string(),
                }],
                true,
            ),
        };
        let mut buf = String::new();
        for r in &replies {
            buf.push_str(&r.to_line());
            buf.push('\n');
        }
        write.write_all(buf.as_bytes()).await?;
        if close {
            break;
        }
    }
    write.flush().await?;
    write.shutdown().await
}
