pub mod agents;
pub mod cli_io;
pub mod equilibria;
pub mod learning;
pub mod radio;
pub mod schedulers;
pub mod sim;
pub mod traffic;
