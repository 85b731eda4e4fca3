//! Benchmark harness for multi-agent coordination over graph topologies.
//!
//! Agents sit on the nodes of a generated network and exchange messages with
//! their neighbors in synchronous rounds before each announces a final
//! answer for one of five classic distributed-computing tasks.

pub mod agents;
pub mod harness;
pub mod protocol;
pub mod seed;
pub mod tasks;
pub mod topology;
