//! One 512-byte region shared by a decoded HB(z1) column and a decoded hint row.

use crate::params::N;

pub const OVERLAY_BYTES: usize = 2 * N;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlayMode {
    Empty,
    HbColumn,
    HintRow,
}

/// Tag-checked union over caller memory. Switching views zeroes the region,
/// so stale contents of the other interpretation are never observable.
#[derive(Debug)]
pub struct HbHintOverlay<'a> {
    bytes: &'a mut [u8],
    mode: OverlayMode,
}

impl<'a> HbHintOverlay<'a> {
    /// `bytes` must be 512 bytes with 2-byte alignment.
    pub fn new(bytes: &'a mut [u8]) -> Self {
        assert_eq!(bytes.len(), OVERLAY_BYTES);
        assert_eq!(bytes.as_ptr() as usize % 2, 0);
        bytes.fill(0);
        HbHintOverlay { bytes, mode: OverlayMode::Empty }
    }

    pub fn mode(&self) -> OverlayMode {
        self.mode
    }

    fn switch(&mut self, mode: OverlayMode) {
        if self.mode != mode {
            self.bytes.fill(0);
            self.mode = mode;
        }
    }

    /// Column view, `n` signed bytes.
    pub fn hb_col(&mut self) -> &mut [i8] {
        self.switch(OverlayMode::HbColumn);
        bytemuck::cast_slice_mut(&mut self.bytes[..N])
    }

    /// Row view, `n` unsigned 16-bit values.
    pub fn h_row(&mut self) -> &mut [u16] {
        self.switch(OverlayMode::HintRow);
        bytemuck::cast_slice_mut(self.bytes)
    }

    /// Reads the column without switching; `None` in another mode.
    pub fn read_hb_col(&self) -> Option<&[i8]> {
        (self.mode == OverlayMode::HbColumn).then(|| bytemuck::cast_slice(&self.bytes[..N]))
    }

    pub fn read_h_row(&self) -> Option<&[u16]> {
        (self.mode == OverlayMode::HintRow).then(|| bytemuck::cast_slice(&*self.bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_are_exclusive() {
        let mut backing = [0u16; N];
        let mut o = HbHintOverlay::new(bytemuck::cast_slice_mut(&mut backing));
        assert_eq!(o.mode(), OverlayMode::Empty);
        assert!(o.read_hb_col().is_none());
        o.hb_col()[3] = -7;
        assert_eq!(o.read_hb_col().unwrap()[3], -7);
        assert!(o.read_h_row().is_none());
        assert!(o.h_row().iter().all(|&v| v == 0));
        o.h_row()[255] = 251;
        assert!(o.read_hb_col().is_none());
        assert!(o.hb_col().iter().all(|&v| v == 0));
    }
}
