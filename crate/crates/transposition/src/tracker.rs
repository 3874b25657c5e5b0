use std::collections::BTreeMap;

use crate::TransposeError;

pub const TRACKER_CAPACITY: usize = 1024;

pub type Handle = u32;

/// What the host passes when it declares an object.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectDescriptor {
    /// Host address of the first element.
    pub address: u64,
    pub size: usize,
    pub element_bits: u32,
    pub base_row: u16,
}

impl ObjectDescriptor {
    pub fn byte_len(&self) -> u64 {
        (self.size as u64 * self.element_bits as u64).div_ceil(8).max(1)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ObjectTracker {
    entries: BTreeMap<Handle, ObjectDescriptor>,
    next: Handle,
}

impl ObjectTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn register(&mut self, d: ObjectDescriptor) -> Result<Handle, TransposeError> {
        if self.entries.len() >= TRACKER_CAPACITY {
            return Err(TransposeError::TrackerFull);
        }
        let end = d.address + d.byte_len();
        if self.entries.values().any(|e| d.address < e.address + e.byte_len() && e.address < end) {
            return Err(TransposeError::Overlap);
        }
        let h = self.next;
        self.next += 1;
        self.entries.insert(h, d);
        Ok(h)
    }

    pub fn remove(&mut self, h: Handle) -> Option<ObjectDescriptor> {
        self.entries.remove(&h)
    }

    pub fn get(&self, h: Handle) -> Option<&ObjectDescriptor> {
        self.entries.get(&h)
    }

    /// Object containing host address `addr`, with the element index.
    pub fn lookup(&self, addr: u64) -> Option<(Handle, usize)> {
        self.entries.iter().find_map(|(&h, e)| {
            (addr >= e.address && addr < e.address + e.byte_len())
                .then(|| (h, ((addr - e.address) * 8 / e.element_bits as u64) as usize))
        })
    }
}

/// Hands out D-group row ranges for objects, bottom up.
#[derive(Clone, Debug)]
pub struct RowArena {
    next: usize,
    limit: usize,
}

impl RowArena {
    pub fn new(limit: u16) -> Self {
        RowArena { next: 0, limit: limit as usize }
    }

    pub fn alloc(&mut self, rows: usize) -> Result<u16, TransposeError> {
        if self.next + rows > self.limit {
            return Err(TransposeError::OutOfRows { need: rows, left: self.limit - self.next });
        }
        let base = self.next as u16;
        self.next += rows;
        Ok(base)
    }

    pub fn used(&self) -> usize {
        self.next
    }
}
