use std::fs;
use std::path::Path;

const FORBIDDEN: &[&str] = &["static mut", "thread_local!", "lazy_static!", "OnceCell", "OnceLock", "LazyLock", "Lazy<"];
const INTERIOR: &[&str] = &["Cell<", "Mutex<", "RwLock<", "Atomic"];

fn scan(dir: &Path, hits: &mut Vec<String>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            scan(&path, hits);
            continue;
        }
        if path.extension().is_none_or(|e| e != "rs") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        for (n, line) in text.lines().enumerate() {
            let code = line.split("//").next().unwrap_or("").trim();
            let is_static = code.starts_with("static ") || code.starts_with("pub static ") || code.starts_with("pub(crate) static ");
            let bad = FORBIDDEN.iter().any(|p| code.contains(p)) || (is_static && INTERIOR.iter().any(|p| code.contains(p)));
            if bad {
                hits.push(format!("{}:{}: {}", path.display(), n + 1, line.trim()));
            }
        }
    }
}

fn main() {
    println!("cargo:rerun-if-changed=src");
    println!("cargo:rerun-if-changed=constants");
    let mut hits = Vec::new();
    scan(Path::new("src"), &mut hits);
    if !hits.is_empty() {
        panic!("mutable global state is not allowed:\n{}", hits.join("\n"));
    }
}
