pub mod potential;
pub mod radial_ode;
pub mod jost;
pub mod quadrature;
pub mod spectral;
pub mod hardy;
pub mod evolution;
pub mod oracle;
pub mod experiments;
pub mod verify;
pub mod config;
pub mod cli;
