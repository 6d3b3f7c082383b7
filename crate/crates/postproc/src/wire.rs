//! Length-prefixed peer messages: `u32` big-endian payload length, `u8`
//! type, payload.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Largest accepted payload.
pub const MAX_PAYLOAD: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Hello = 1,
    Params = 2,
    Syndrome = 3,
    ConfirmHash = 4,
    ConfirmResult = 5,
    BlockDisclose = 6,
    PaParams = 7,
    AuthTag = 8,
    Abort = 9,
}

impl MsgType {
    pub fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            1 => Self::Hello,
            2 => Self::Params,
            3 => Self::Syndrome,
            4 => Self::ConfirmHash,
            5 => Self::ConfirmResult,
            6 => Self::BlockDisclose,
            7 => Self::PaParams,
            8 => Self::AuthTag,
            9 => Self::Abort,
            _ => return Err(Error::Protocol(format!("unknown message type {c}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub kind: MsgType,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(kind: MsgType, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn encoded_len(&self) -> usize {
        5 + self.payload.len()
    }
}

pub fn write_message<W: Write>(w: &mut W, m: &Message) -> Result<()> {
    if m.payload.len() > MAX_PAYLOAD {
        return Err(Error::Protocol(format!("payload of {} bytes too large", m.payload.len())));
    }
    w.write_all(&(m.payload.len() as u32).to_be_bytes())?;
    w.write_all(&[m.kind as u8])?;
    w.write_all(&m.payload)?;
    w.flush()?;
    Ok(())
}

pub fn read_message<R: Read>(r: &mut R) -> Result<Message> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head)?;
    let len = u32::from_be_bytes([head[0], head[1], head[2], head[3]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(Error::Protocol(format!("payload of {len} bytes too large")));
    }
    let kind = MsgType::from_code(head[4])?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(Message { kind, payload })
}

/// Big-endian field reader over a payload.
pub struct Fields<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Fields<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Protocol("truncated payload".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_be_bytes(self.take(16)?.try_into().unwrap()))
    }

    pub fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos..];
        self.pos = self.buf.len();
        s
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Protocol(format!("{} trailing payload bytes", self.buf.len() - self.pos)))
        }
    }
}
