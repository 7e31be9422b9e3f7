//! Provenance bytes observed at the root for each scheme over chains of
//! one to seven forwarders.
//!
//!     cargo run --example provenance_size

use pppt::codec::Scheme;
use pppt::metrics::provenance_size_bytes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schemes = [Scheme::Pppt, Scheme::Pid, Scheme::Bf];
    print!("{:>4}", "hops");
    for s in schemes {
        print!("{:>6}", s.as_str());
    }
    println!();
    for hops in 1..=7 {
        print!("{hops:>4}");
        for s in schemes {
            print!("{:>6}", provenance_size_bytes(s, hops)?);
        }
        println!();
    }
    Ok(())
}
