//! Download and caching of the affine benchmark scenes.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::ValueEnum;
use flate2::read::GzDecoder;
use surfwl::{read_pnm_as_gray, write_pgm};

use crate::error::CliError;

pub const DEFAULT_BASE_URL: &str =
    "https://www.robots.ox.ac.uk/~vgg/research/affine/det_eval_files";

/// Marker written once a scene is fully extracted.
pub const COMPLETE_MARKER: &str = ".complete";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scene {
    Graffiti,
    Wall,
    Boat,
    Bark,
    Bikes,
    Trees,
    Leuven,
    Ubc,
}

impl Scene {
    pub fn name(self) -> &'static str {
        match self {
            Scene::Graffiti => "graffiti",
            Scene::Wall => "wall",
            Scene::Boat => "boat",
            Scene::Bark => "bark",
            Scene::Bikes => "bikes",
            Scene::Trees => "trees",
            Scene::Leuven => "leuven",
            Scene::Ubc => "ubc",
        }
    }

    pub fn archive(self) -> &'static str {
        match self {
            Scene::Graffiti => "graf.tar.gz",
            Scene::Wall => "wall.tar.gz",
            Scene::Boat => "boat.tar.gz",
            Scene::Bark => "bark.tar.gz",
            Scene::Bikes => "bikes.tar.gz",
            Scene::Trees => "trees.tar.gz",
            Scene::Leuven => "leuven.tar.gz",
            Scene::Ubc => "ubc.tar.gz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    CacheHit {
        dir: PathBuf,
    },
    Downloaded {
        dir: PathBuf,
        images: Vec<PathBuf>,
        bytes: usize,
    },
}

/// `$SURFWL_CACHE` is handled by the flag; this is the fallback.
pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("surfwl"),
        None => PathBuf::from("surfwl-cache"),
    }
}

pub fn scene_dir(cache: &Path, scene: Scene) -> PathBuf {
    cache.join(scene.name())
}

pub fn is_cached(cache: &Path, scene: Scene) -> bool {
    scene_dir(cache, scene).join(COMPLETE_MARKER).is_file()
}

/// Fetches `scene` unless it is already cached, converting every image in the
/// archive to 8-bit PGM.
pub fn fetch(
    scene: Scene,
    base_url: &str,
    cache: &Path,
    force: bool,
) -> Result<FetchOutcome, CliError> {
    let dir = scene_dir(cache, scene);
    if !force && is_cached(cache, scene) {
        return Ok(FetchOutcome::CacheHit { dir });
    }
    fs::create_dir_all(cache).map_err(|e| CliError::cache(cache, e))?;

    let url = format!("{}/{}", base_url.trim_end_matches('/'), scene.archive());
    log::info!("downloading {url}");
    let body = download(&url)?;

    let staging = cache.join(format!(".{}.partial", scene.name()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| CliError::cache(&staging, e))?;
    }
    fs::create_dir_all(&staging).map_err(|e| CliError::cache(&staging, e))?;
    let names = extract_images(&body, &staging)?;
    if names.is_empty() {
        return Err(CliError::Integrity(format!(
            "{url}: archive holds no PPM/PGM images"
        )));
    }
    let marker = format!("{url}\n{} images\n", names.len());
    fs::write(staging.join(COMPLETE_MARKER), marker).map_err(|e| CliError::cache(&staging, e))?;
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| CliError::cache(&dir, e))?;
    }
    fs::rename(&staging, &dir).map_err(|e| CliError::cache(&dir, e))?;

    let images = names.into_iter().map(|n| dir.join(n)).collect();
    Ok(FetchOutcome::Downloaded {
        dir,
        images,
        bytes: body.len(),
    })
}

/// GET with the body checked against the declared `Content-Length`.
pub fn download(url: &str) -> Result<Vec<u8>, CliError> {
    let resp = ureq::get(url)
        .timeout(Duration::from_secs(120))
        .call()
        .map_err(|e| match e {
            ureq::Error::Status(code, _) => CliError::Network(format!("{url}: HTTP {code}")),
            ureq::Error::Transport(t) => CliError::Network(format!("{url}: {t}")),
        })?;
    let declared = resp
        .header("Content-Length")
        .and_then(|v| v.trim().parse::<usize>().ok());
    let mut body = Vec::new();
    match resp.into_reader().read_to_end(&mut body) {
        Ok(_) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
            return Err(CliError::Integrity(format!(
                "{url}: body ended after {} of {} bytes",
                body.len(),
                declared.map_or("?".to_string(), |d| d.to_string())
            )))
        }
        Err(e) => return Err(CliError::Network(format!("{url}: {e}"))),
    }
    match declared {
        Some(n) if n != body.len() => Err(CliError::Integrity(format!(
            "{url}: declared {n} bytes, received {}",
            body.len()
        ))),
        Some(_) => Ok(body),
        None => {
            log::warn!("{url}: no Content-Length, size not verified");
            Ok(body)
        }
    }
}

/// Unpacks a gzip tarball, writing each PPM/PGM member as `<stem>.pgm` in
/// `dest`. Directory structure inside the archive is flattened. Returns the
/// written file names, sorted.
pub fn extract_images(archive: &[u8], dest: &Path) -> Result<Vec<String>, CliError> {
    let corrupt = |e: io::Error| CliError::Integrity(format!("bad archive: {e}"));
    let mut tar = tar::Archive::new(GzDecoder::new(archive));
    let mut names = Vec::new();
    for entry in tar.entries().map_err(corrupt)? {
        let mut entry = entry.map_err(corrupt)?;
        if !entry.header().entry_type().is_file() {
            continue;
        }
        let path = entry.path().map_err(corrupt)?.into_owned();
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let ext = ext.to_string_lossy().to_ascii_lowercase();
        if !matches!(ext.as_str(), "ppm" | "pgm" | "pnm") {
            continue;
        }
        let mut bytes = Vec::new();
        entry.read_to_end(&mut bytes).map_err(corrupt)?;
        let img = read_pnm_as_gray(&bytes)
            .map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
        let pgm =
            write_pgm(&img).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
        let name = format!("{}.pgm", stem.to_string_lossy());
        fs::write(dest.join(&name), pgm).map_err(|e| CliError::cache(dest, e))?;
        names.push(name);
    }
    names.sort();
    names.dedup();
    Ok(names)
}
