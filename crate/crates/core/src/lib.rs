//! End-user computing governance: scan spreadsheet workbooks for
//! complexity indicators, score applications on the complexity x
//! materiality x control risk cube, and keep the inventory, review cycle,
//! risk register and KPI reports that go with it.
//!
//! The [`cli`] and [`api`] modules are thin adapters over the library:
//! every command and endpoint returns a module result serialised as is.

pub mod api;
pub mod cli;
pub mod inventory;
pub mod reporting;
pub mod risk;
pub mod scanner;
pub mod seed;
