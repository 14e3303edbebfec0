use super::network::Network;
use std::io::{self, Write};

/// Writes one line per tick: tick number and per-cluster spike counts,
/// optionally followed by the spike index lists.
pub struct TraceWriter<W: Write> {
    out: W,
    full: bool,
    header_done: bool,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, full: bool) -> Self {
        TraceWriter {
            out,
            full,
            header_done: false,
        }
    }

    pub fn record(&mut self, net: &Network) -> io::Result<()> {
        let topo = net.topology();
        if !self.header_done {
            let names: Vec<&str> = topo.clusters.iter().map(|c| c.name.as_str()).collect();
            writeln!(self.out, "tick {}", names.join(" "))?;
            self.header_done = true;
        }
        write!(self.out, "{}", net.tick())?;
        for c in 0..topo.clusters.len() {
            write!(self.out, " {}", net.state().spikes[c].len())?;
        }
        if self.full {
            for (c, spec) in topo.clusters.iter().enumerate() {
                let s = &net.state().spikes[c];
                if !s.is_empty() {
                    write!(self.out, " | {}:{:?}", spec.name, s)?;
                }
            }
        }
        writeln!(self.out)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
