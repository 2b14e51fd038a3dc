use std::process::Command;

fn git(args: &[&str]) -> Option<String> {
    let out = Command::new("git").args(args).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!s.is_empty()).then_some(s)
}

fn main() {
    let pkg = env!("CARGO_PKG_VERSION");
    let version = git(&["describe", "--tags", "--dirty"]).unwrap_or_else(|| {
        match git(&["describe", "--always", "--dirty"]) {
            Some(h) => format!("v{pkg}-g{h}"),
            None => format!("v{pkg}"),
        }
    });
    println!("cargo:rustc-env=SEQLAB_VERSION={version}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
}
