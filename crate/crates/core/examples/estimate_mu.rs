//! Prior mean from a directory of images, written as JSON. Usage:
//! `estimate_mu <dir> <d_max> [out.json]`. Without arguments a small
//! synthetic corpus is used.

use std::path::PathBuf;

use wpbayes::io::{estimate_mu, read_corpus, write_mu_file};
use wpbayes::{NodeId, Signal2D};

fn main() -> wpbayes::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (corpus, d_max) = match args.as_slice() {
        [dir, d, ..] => (read_corpus(dir.as_ref())?, d.parse().expect("d_max must be an integer")),
        _ => {
            let images = (0..8)
                .map(|k| Signal2D::from_fn(4, |r, c| 100.0 + 10.0 * k as f64 + (r as f64 - c as f64)))
                .collect::<wpbayes::Result<Vec<_>>>()?;
            (images, 4)
        }
    };
    let mu = estimate_mu(&corpus, d_max)?;
    println!("{} images, root block mean {:.3}", corpus.len(), mu.block(NodeId::ROOT)[0]);
    println!("depth-1 lowpass value {:.3}", mu.block(NodeId::new(1, 0, 0)?)[0]);
    if let Some(out) = args.get(2) {
        write_mu_file(&PathBuf::from(out), &mu)?;
        println!("wrote {out}");
    }
    Ok(())
}
