#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};

/// Tiny elevation service: answers `h = 100*lat + lon` for every location,
/// after returning HTTP 503 for the first `fail_first` requests.
pub struct FakeService {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
}

pub fn spawn_service(fail_first: usize) -> FakeService {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/elevation", listener.local_addr().unwrap());
    let requests = Arc::new(AtomicUsize::new(0));
    let counter = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let _ = handle(stream, n < fail_first);
        }
    });
    FakeService { url, requests }
}

fn handle(mut stream: TcpStream, fail: bool) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut len = 0usize;
    let mut auth = String::new();
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(v) = lower.strip_prefix("content-length:") {
            len = v.trim().parse().unwrap_or(0);
        }
        if lower.starts_with("authorization:") {
            auth = line["authorization:".len()..].trim().to_string();
        }
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body)?;
    let (status, payload) = if fail {
        ("503 Service Unavailable", json!({"error": "busy"}))
    } else {
        let req: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
        let results: Vec<Value> = req["locations"]
            .as_array()
            .map(|locs| {
                locs.iter()
                    .map(|l| {
                        let (lat, lon) = (l["lat"].as_f64().unwrap(), l["lon"].as_f64().unwrap());
                        json!({"lat": lat, "lon": lon, "elevation": 100.0 * lat + lon})
                    })
                    .collect()
            })
            .unwrap_or_default();
        ("200 OK", json!({"results": results, "auth": auth}))
    };
    let text = payload.to_string();
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    )?;
    stream.flush()
}

pub fn hexflood(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexflood"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("spawning hexflood")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// 21x21 closed bowl, one hour of heavy rain, half an hour of settling.
pub const BOWL_CONFIG: &str = r#"{
  "terrain": {"synthetic": {"kind": "bowl", "extent": {"nq": 21, "nr": 21}, "params": {"k": 0.002}}},
  "hex_width": 4.0,
  "rain_rate": 0.02,
  "rain_duration": 1.0,
  "equilibrate_duration": 0.5,
  "step_seconds": 10.0,
  "seed": 7,
  "boundary": "closed",
  "snapshot_every": 120,
  "output_dir": "out",
  "threshold": 0.001
}"#;

/// Writes `text` as `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}
