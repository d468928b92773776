pub mod freewords;
pub mod ratlin;
pub mod repcore;
pub mod coeffs;
pub mod cohomo;
pub mod branchbend;
pub mod bender;
pub mod formats;
pub mod fixture;
pub mod suite;
