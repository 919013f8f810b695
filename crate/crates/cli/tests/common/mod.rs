#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use medmine_core::corpus::save_corpus_tsv;
use medmine_core::Corpus;

pub fn medmine<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    medmine_env(args, &[])
}

pub fn medmine_env<S: AsRef<std::ffi::OsStr>>(args: &[S], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_medmine"));
    cmd.args(args).env_remove("MEDMINE_SEED").env_remove("RUST_LOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}\nstdout:\n{}\nstderr:\n{}", o.status.code(), stdout(o), stderr(o));
}

/// Saves `corpus` as `<dir>/<stem>.tsv` + `.ann.tsv` and returns the tweet path.
pub fn save(corpus: &Corpus, dir: &Path, stem: &str) -> PathBuf {
    let tweets = dir.join(format!("{stem}.tsv"));
    save_corpus_tsv(corpus, &tweets, &dir.join(format!("{stem}.ann.tsv"))).unwrap();
    tweets
}

pub fn p(path: &Path) -> String {
    path.display().to_string()
}

pub fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}
