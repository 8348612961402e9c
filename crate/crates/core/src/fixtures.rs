//! The five-timestamp running example used throughout the docs and tests.
//!
//! External utilities A=2, B=1, C=3, D=2.

use crate::event::ComplexEventSequence;
use crate::io::parse_native;

pub const RUNNING_EXAMPLE: &str = "\
# running example: five simultaneous event sets
@EVENT A 2
@EVENT B 1
@EVENT C 3
@EVENT D 2
1|A:1
2|B:2 D:1
3|B:3 C:1
4|A:2 C:1
5|D:1
";

pub fn running_example() -> ComplexEventSequence {
    parse_native(RUNNING_EXAMPLE).expect("fixture parses")
}
