//! In-memory reliable ordered byte stream for loopback sessions.

use std::io::{self, Read, Write};
use std::sync::mpsc::{channel, Receiver, Sender};

pub struct MemoryEndpoint {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    pending: Vec<u8>,
    pos: usize,
}

/// Two connected endpoints; writes on one are read on the other.
pub fn memory_pair() -> (MemoryEndpoint, MemoryEndpoint) {
    let (ta, ra) = channel();
    let (tb, rb) = channel();
    (
        MemoryEndpoint { tx: ta, rx: rb, pending: Vec::new(), pos: 0 },
        MemoryEndpoint { tx: tb, rx: ra, pending: Vec::new(), pos: 0 },
    )
}

impl Read for MemoryEndpoint {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.pos == self.pending.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.pending = chunk;
                    self.pos = 0;
                }
                // peer hung up
                Err(_) => return Ok(0),
            }
        }
        let n = buf.len().min(self.pending.len() - self.pos);
        buf[..n].copy_from_slice(&self.pending[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for MemoryEndpoint {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.tx.send(buf.to_vec()).map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer hung up"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
