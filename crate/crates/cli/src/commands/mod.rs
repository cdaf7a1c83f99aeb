pub mod fit;
pub mod quality;
pub mod risk_sweep;
pub mod selfcheck;
