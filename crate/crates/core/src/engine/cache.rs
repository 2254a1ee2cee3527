use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::graph::NodeId;

type Slot = Arc<dyn Any + Send + Sync>;

/// Per-round memo for replicated local computations.
///
/// Lives for exactly one round. In audit mode every lookup recomputes the
/// value and compares it with the stored one.
pub struct SharedCache {
    map: RefCell<HashMap<(TypeId, u64), Slot>>,
    audit: bool,
    mismatch: RefCell<Option<(NodeId, String)>>,
}

impl SharedCache {
    pub fn new(audit: bool) -> Self {
        SharedCache { map: RefCell::new(HashMap::new()), audit, mismatch: RefCell::new(None) }
    }

    pub fn get_or_compute<K, T, F>(&self, node: NodeId, key: K, compute: F) -> Arc<T>
    where
        K: Hash,
        T: PartialEq + Debug + Any + Send + Sync,
        F: FnOnce() -> T,
    {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        let k = (TypeId::of::<T>(), h.finish());
        let cached = self.map.borrow().get(&k).cloned();
        match cached {
            Some(slot) => {
                let value = slot.downcast::<T>().expect("type id matched");
                if self.audit {
                    let fresh = compute();
                    if fresh != *value {
                        let mut m = self.mismatch.borrow_mut();
                        if m.is_none() {
                            *m = Some((node, format!("expected {value:?}, computed {fresh:?}")));
                        }
                    }
                }
                value
            }
            None => {
                let value = Arc::new(compute());
                self.map.borrow_mut().insert(k, value.clone() as Slot);
                value
            }
        }
    }

    pub(crate) fn take_mismatch(&self) -> Option<(NodeId, String)> {
        self.mismatch.borrow_mut().take()
    }
}
