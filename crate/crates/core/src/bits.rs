//! Bit/byte conversion (MSB-first) and the optional length-prefixed payload frame.

use crate::error::{Error, Result};

/// Bits of `bytes`, most significant bit of each byte first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Packs bits MSB-first. A trailing partial byte is zero-filled on the right.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}

/// Parses a text of `0`/`1` characters; whitespace is ignored.
pub fn parse_bit_string(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Prepends the payload length as a 32-bit big-endian integer.
///
/// The prefix is structured data. Unless the framed payload is encrypted as a
/// whole before embedding, its bits are not uniform and the stego output no
/// longer has exactly the cover distribution.
pub fn frame(payload: &[u8]) -> Result<Vec<u8>> {
    let len = u32::try_from(payload.len())
        .map_err(|_| Error::BadFrame(format!("payload of {} bytes is too long", payload.len())))?;
    let mut out = Vec::with_capacity(payload.len() + 4);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(payload);
    Ok(out)
}

/// Reads a frame written by [`frame`] from the front of recovered bits.
/// Bits past the frame (padding) are ignored.
pub fn unframe(bits: &[bool]) -> Result<Vec<u8>> {
    if bits.len() < 32 {
        return Err(Error::BadFrame(format!("only {} bits recovered", bits.len())));
    }
    let header = bits_to_bytes(&bits[..32]);
    let len = u32::from_be_bytes([header[0], header[1], header[2], header[3]]) as usize;
    let needed = 32 + len * 8;
    if bits.len() < needed {
        return Err(Error::BadFrame(format!(
            "frame declares {len} bytes but only {} payload bits were recovered",
            bits.len() - 32
        )));
    }
    Ok(bits_to_bytes(&bits[32..needed]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first() {
        assert_eq!(bytes_to_bits(&[0b1010_0001]), parse_bit_string("10100001").unwrap());
        assert_eq!(bits_to_bytes(&parse_bit_string("011").unwrap()), vec![0b0110_0000]);
        assert!(parse_bit_string("01x").is_none());
    }

    #[test]
    fn short_frames_are_rejected() {
        assert!(unframe(&[true; 31]).is_err());
        let mut bits = bytes_to_bits(&frame(b"hello").unwrap());
        bits.truncate(40);
        assert!(matches!(unframe(&bits), Err(Error::BadFrame(_))));
    }

    proptest! {
        #[test]
        fn frame_round_trip(payload in proptest::collection::vec(any::<u8>(), 0..64), tail in proptest::collection::vec(any::<bool>(), 0..20)) {
            let mut bits = bytes_to_bits(&frame(&payload).unwrap());
            bits.extend(tail);
            prop_assert_eq!(unframe(&bits).unwrap(), payload.clone());
            prop_assert_eq!(bits_to_bytes(&bytes_to_bits(&payload)), payload);
        }
    }
}
