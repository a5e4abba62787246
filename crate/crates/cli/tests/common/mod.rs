#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use flate2::write::GzEncoder;
use flate2::Compression;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

pub fn fixture(name: &str) -> PathBuf {
    data_dir().join(format!("{name}.pgm"))
}

pub fn surfwl(args: &[&str]) -> Output {
    surfwl_env(args, &[])
}

pub fn surfwl_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_surfwl"));
    cmd.args(args)
        .env_remove("SURFWL_CACHE")
        .env("RUST_LOG", "warn");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run surfwl")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// How the fixture server answers a request for the archive.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Serve {
    Ok,
    /// Declares more bytes than it sends.
    Truncated,
    NotFound,
}

/// Minimal HTTP/1.1 server on 127.0.0.1 serving one file.
pub struct FixtureServer {
    pub base_url: String,
    hits: Arc<AtomicUsize>,
}

impl FixtureServer {
    pub fn start(file_name: &str, body: Vec<u8>, mode: Serve) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}/files", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        let wanted = format!("/files/{file_name}");
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                let _ = reader.read_line(&mut request_line);
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                }
                let path = request_line
                    .split_whitespace()
                    .nth(1)
                    .unwrap_or("")
                    .to_string();
                let found = path == wanted && mode != Serve::NotFound;
                let resp: Vec<u8> = if found {
                    let declared = if mode == Serve::Truncated {
                        body.len() + 100
                    } else {
                        body.len()
                    };
                    let mut r = format!(
                        "HTTP/1.1 200 OK\r\nContent-Type: application/gzip\r\nContent-Length: {declared}\r\nConnection: close\r\n\r\n"
                    )
                    .into_bytes();
                    r.extend_from_slice(&body);
                    r
                } else {
                    b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
                        .to_vec()
                };
                let _ = stream.write_all(&resp);
                let _ = stream.flush();
            }
        });
        FixtureServer { base_url, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

/// A tar.gz with one colour PPM, one PGM, and two non-image members.
pub fn fixture_archive(seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ppm = b"P6\n# colour\n40 30\n255\n".to_vec();
    ppm.extend((0..40 * 30 * 3).map(|_| rng.gen::<u8>()));
    let mut pgm = b"P5\n32 24\n255\n".to_vec();
    pgm.extend((0..32 * 24).map(|_| rng.gen::<u8>()));

    let mut tar = tar::Builder::new(GzEncoder::new(Vec::new(), Compression::default()));
    let mut add = |name: &str, data: &[u8]| {
        let mut h = tar::Header::new_gnu();
        h.set_size(data.len() as u64);
        h.set_mode(0o644);
        h.set_cksum();
        tar.append_data(&mut h, name, data).unwrap();
    };
    add("graf/img1.ppm", &ppm);
    add("graf/img2.pgm", &pgm);
    add("graf/H1to2p", b"1 0 0\n0 1 0\n0 0 1\n");
    add("graf/readme.txt", b"fixture\n");
    tar.into_inner().unwrap().finish().unwrap()
}
