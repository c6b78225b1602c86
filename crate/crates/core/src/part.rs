//! Type-erased per-component solution values.
//!
//! Each component of a composite problem works with its own solution
//! representation (a permutation, a bit vector, a digit grid, ...). The
//! framework never interprets those values itself; it shuttles them between
//! components, neighborhoods and objectives as opaque [`Part`]s. Problem
//! modules downcast back to their concrete types.

use std::any::Any;
use std::fmt;
use std::sync::Arc;

/// Object-safe bundle of what the framework needs from a component solution:
/// debug printing and equality against other erased values.
pub trait PartValue: Any + fmt::Debug + Send + Sync {
    fn as_any(&self) -> &dyn Any;
    fn dyn_eq(&self, other: &dyn PartValue) -> bool;
}

impl<T> PartValue for T
where
    T: Any + fmt::Debug + Send + Sync + PartialEq,
{
    fn as_any(&self) -> &dyn Any {
        self
    }

    fn dyn_eq(&self, other: &dyn PartValue) -> bool {
        other
            .as_any()
            .downcast_ref::<T>()
            .is_some_and(|other| other == self)
    }
}

/// An opaque, cheaply clonable solution value for one component.
///
/// Equality compares the underlying values; two parts of different concrete
/// types are never equal.
#[derive(Clone)]
pub struct Part(Arc<dyn PartValue>);

impl Part {
    pub fn new<T: PartValue>(value: T) -> Self {
        Part(Arc::new(value))
    }

    pub fn downcast_ref<T: Any>(&self) -> Option<&T> {
        self.0.as_any().downcast_ref::<T>()
    }

    /// Downcast that panics with the expected type name; used by problem code
    /// on parts that already passed the component's validity check.
    pub fn expect_ref<T: Any>(&self) -> &T {
        self.downcast_ref::<T>().unwrap_or_else(|| {
            panic!(
                "part does not hold a {} (got {:?})",
                std::any::type_name::<T>(),
                self.0
            )
        })
    }

    pub fn is<T: Any>(&self) -> bool {
        self.0.as_any().is::<T>()
    }
}

impl fmt::Debug for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl PartialEq for Part {
    fn eq(&self, other: &Self) -> bool {
        self.0.dyn_eq(other.0.as_ref())
    }
}
