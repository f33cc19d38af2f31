mod check;
mod comets;
mod fit;
mod regress;
mod sample;
mod s_tau;

pub use check::check;
pub use comets::comets;
pub use fit::fit;
pub use regress::regress;
pub use s_tau::s_tau;
pub use sample::sample;
