//! Typed-heap state: one independent address map per pointed-to type.

use std::collections::BTreeMap;

use thiserror::Error;

use super::term::{mask, HeapType};

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum HeapFault {
    #[error("null dereference through heap_{0}")]
    Null(HeapType),
    #[error("misaligned access through heap_{ty} at {addr:#x}")]
    Misaligned { ty: HeapType, addr: u64 },
}

/// Total maps `address -> value` per heap type; cells never written read
/// as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypedHeapState {
    heaps: BTreeMap<HeapType, BTreeMap<u64, u64>>,
}

/// The guard every heap access must satisfy: non-null and aligned to the
/// value width.
pub fn check_access(ty: HeapType, addr: u64) -> Result<(), HeapFault> {
    if addr == 0 {
        return Err(HeapFault::Null(ty));
    }
    let align = (ty.width() / 8).max(1) as u64;
    if !addr.is_multiple_of(align) {
        return Err(HeapFault::Misaligned { ty, addr });
    }
    Ok(())
}

impl TypedHeapState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read(&self, ty: HeapType, addr: u64) -> Result<u64, HeapFault> {
        check_access(ty, addr)?;
        Ok(self.peek(ty, addr))
    }

    pub fn write(&mut self, ty: HeapType, addr: u64, value: u64) -> Result<(), HeapFault> {
        check_access(ty, addr)?;
        self.heaps.entry(ty).or_default().insert(addr, value & mask(ty.width()));
        Ok(())
    }

    /// Functional update, leaving `self` untouched.
    pub fn with_write(&self, ty: HeapType, addr: u64, value: u64) -> Result<Self, HeapFault> {
        let mut next = self.clone();
        next.write(ty, addr, value)?;
        Ok(next)
    }

    /// Read without the access guard (for formula evaluation and dumps).
    pub fn peek(&self, ty: HeapType, addr: u64) -> u64 {
        self.heaps.get(&ty).and_then(|h| h.get(&addr)).copied().unwrap_or(0)
    }

    pub fn cells(&self, ty: HeapType) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.heaps.get(&ty).into_iter().flat_map(|h| h.iter().map(|(a, v)| (*a, *v)))
    }

    pub fn types(&self) -> impl Iterator<Item = HeapType> + '_ {
        self.heaps.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U32: HeapType = HeapType::Word { width: 32, signed: false };
    const S32: HeapType = HeapType::Word { width: 32, signed: true };
    const U64: HeapType = HeapType::Word { width: 64, signed: false };

    #[test]
    fn null_read_faults() {
        let s = TypedHeapState::new();
        assert_eq!(s.read(U32, 0), Err(HeapFault::Null(U32)));
    }

    #[test]
    fn read_after_write() {
        let s = TypedHeapState::new().with_write(U32, 8, 7).unwrap();
        assert_eq!(s.read(U32, 8), Ok(7));
    }

    #[test]
    fn heaps_of_other_types_are_untouched() {
        let s = TypedHeapState::new().with_write(S32, 8, 11).unwrap();
        let t = s.with_write(U32, 8, 7).unwrap();
        assert_eq!(t.read(S32, 8), Ok(11));
        assert_eq!(t.read(U64, 8), Ok(0));
    }

    #[test]
    fn frame_on_other_addresses() {
        let s = TypedHeapState::new().with_write(U32, 12, 5).unwrap();
        let t = s.with_write(U32, 8, 7).unwrap();
        assert_eq!(t.read(U32, 12), Ok(5));
    }

    #[test]
    fn misaligned_access_faults() {
        let mut s = TypedHeapState::new();
        assert!(matches!(s.write(U32, 6, 1), Err(HeapFault::Misaligned { .. })));
        assert!(s.write(U64, 12, 1).is_err());
        assert!(s.write(U32, 12, 1).is_ok());
    }
}
