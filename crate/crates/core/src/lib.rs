//! Exact toric destackification and a finite monomial-group oracle.

pub mod corpus;
pub mod destackify;
pub mod grouprep;
pub mod intlat;
pub mod invariants;
pub mod io;
pub mod stackyfan;

pub use destackify::{destackify_all, Config, DestackError, Output, Report};
pub use grouprep::{Block, IsotropyTypeRecord, Monomial, MonomialGroup};
pub use intlat::{Character, FinAbGroup, IntMatrix};
pub use invariants::{ord_na, ConeInvariants, DivisorialType, LexInvariant};
pub use stackyfan::{Cone, Ray, StackyFan, Step, StepAction, StepTrace};
