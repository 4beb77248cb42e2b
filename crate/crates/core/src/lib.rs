pub mod catalog;
pub mod exact;
pub mod liealg;
pub mod loopcore;
pub mod involution;
pub mod matrixrep;
