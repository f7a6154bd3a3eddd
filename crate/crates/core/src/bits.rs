//! MSB-first bit packing.

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Packs bits into bytes; a trailing partial byte is dropped.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1)))
        .collect()
}

pub fn u32_to_bits(value: u32) -> Vec<u8> {
    bytes_to_bits(&value.to_be_bytes())
}

pub fn bits_to_u32(bits: &[u8]) -> u32 {
    bits.iter().take(32).fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32)
}

/// Hard decision on a soft value: strictly positive means 1.
#[inline]
pub fn hard(soft: f64) -> u8 {
    (soft > 0.0) as u8
}
